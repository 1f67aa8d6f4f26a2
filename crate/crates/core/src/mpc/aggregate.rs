use serde::Serialize;

use super::System;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateOp {
    Max,
    Sum,
    Count,
}

/// Smallest `t` with `s^t >= m`.
pub(crate) fn ceil_log(s: u64, m: u64) -> u64 {
    let mut t = 0;
    let mut reach = 1u128;
    while reach < m as u128 {
        reach *= s.max(2) as u128;
        t += 1;
    }
    t
}

impl System {
    /// Aggregates one value per live node with a convergecast over machines:
    /// one local round, then `ceil(log_f M)` rounds of partials moving up a
    /// tree of fan-in `f = S - 1` (receiving `f` words and sending one fits
    /// in `S`). All rounds are recorded as accounting rounds.
    pub fn global_aggregate(
        &mut self,
        values: impl IntoIterator<Item = u64>,
        op: AggregateOp,
    ) -> u64 {
        let out = values.into_iter().fold(0u64, |acc, x| match op {
            AggregateOp::Max => acc.max(x),
            AggregateOp::Sum => acc + x,
            AggregateOp::Count => acc + 1,
        });
        self.charge_aggregate();
        out
    }

    /// Charges the rounds of one convergecast without computing anything.
    pub fn charge_aggregate(&mut self) -> u64 {
        let s = self.memory();
        let fan_in = (s - 1).max(2);
        let m = self.machines() as u64;
        let levels = ceil_log(fan_in, m);
        self.accounting(|sys| {
            sys.idle_rounds(1);
            let mut holders = m;
            for _ in 0..levels {
                let resident = sys.resident.iter().copied().max().unwrap_or(0);
                sys.push_machine_round(1, holders.min(fan_in), resident, holders);
                holders = holders.div_ceil(fan_in);
            }
        });
        levels + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::mpc::RoundKind;

    #[test]
    fn ceil_log_exact() {
        assert_eq!(ceil_log(10, 1), 0);
        assert_eq!(ceil_log(10, 10), 1);
        assert_eq!(ceil_log(10, 11), 2);
        assert_eq!(ceil_log(2, 1024), 10);
        assert_eq!(ceil_log(253, 64_000), 2);
    }

    #[test]
    fn star_max_degree() {
        let star = Graph::from_edges(10, &(1..10).map(|v| (0, v)).collect::<Vec<_>>()).unwrap();
        let mut sys = System::new(20, 3);
        sys.place(&star).unwrap();
        let d = sys.global_aggregate(
            star.nodes().map(|v| star.degree(v) as u64),
            AggregateOp::Max,
        );
        assert_eq!(d, 9);
        assert_eq!(sys.round_index(), 2);
        assert!(sys.stats().iter().all(|r| r.kind == RoundKind::Accounting));
    }

    #[test]
    fn count_and_sum() {
        let mut sys = System::new(4, 100);
        let live = [
            true, true, false, true, false, true, true, false, true, true,
        ];
        assert_eq!(
            sys.global_aggregate(live.iter().filter(|&&l| l).map(|_| 1), AggregateOp::Count),
            7
        );
        // fan-in 3: ceil(log_3 100) = 5, plus the local round
        assert_eq!(sys.round_index(), 6);
        let path: Vec<_> = (1..50u32).map(|v| (v - 1, v)).collect();
        let g = Graph::from_edges(50, &path).unwrap();
        assert_eq!(
            sys.global_aggregate(g.nodes().map(|v| g.degree(v) as u64), AggregateOp::Sum),
            98
        );
    }
}
