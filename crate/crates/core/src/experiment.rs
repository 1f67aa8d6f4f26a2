//! Parameter sweeps: one pipeline run per `(n, seed)` point, summarized as a
//! CSV row.

use std::collections::BTreeSet;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{generate, GenKind, GenSpec};
use crate::mpc::MpcConfig;
use crate::pipeline::mis_tree;
use crate::report::RunReport;

pub const CSV_HEADER: [&str; 9] = [
    "n",
    "seed",
    "mode",
    "total_rounds",
    "shatter_iters",
    "gather_rounds",
    "peak_mem",
    "retries",
    "verdict",
];

/// One CSV row. `total_rounds` counts algorithm rounds over all phases;
/// `shatter_iters` adds degree-reduction steps and local-shattering
/// iterations; `peak_mem` is the larger of peak traffic and peak resident
/// words on any machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub seed: u64,
    pub mode: String,
    pub total_rounds: u64,
    pub shatter_iters: u64,
    pub gather_rounds: u64,
    pub peak_mem: u64,
    pub retries: u64,
    pub verdict: String,
}

impl SweepRow {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn from_report(r: &RunReport) -> Self {
        let t = &r.totals;
        SweepRow {
            n: r.config.n,
            seed: r.config.seed,
            mode: r.config.mode.clone(),
            total_rounds: t.algorithm_rounds,
            shatter_iters: t.shatter_iterations + t.local_iterations,
            gather_rounds: t.gather_rounds,
            peak_mem: t.peak_traffic.max(t.peak_resident),
            retries: t.retries,
            verdict: if r.error.is_some() {
                "error".into()
            } else if r.verdicts.pass() {
                "pass".into()
            } else {
                "fail".into()
            },
        }
    }
}

/// All `(n, seed)` pairs in order of first appearance, without repeats;
/// also returns how many repeats were dropped.
pub fn sweep_points(ns: &[usize], seeds: &[u64]) -> (Vec<(usize, u64)>, usize) {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut dropped = 0;
    for &n in ns {
        for &s in seeds {
            if seen.insert((n, s)) {
                out.push((n, s));
            } else {
                dropped += 1;
            }
        }
    }
    (out, dropped)
}

/// Runs one sweep point: generates `kind` at size `n` with `seed` and runs
/// the pipeline with `base` adjusted to that size and seed.
pub fn run_point(
    kind: &GenKind,
    n: usize,
    seed: u64,
    base: &MpcConfig,
) -> Result<(SweepRow, Option<RunReport>)> {
    let g = generate(&GenSpec::new(kind.clone().fit(n), n, seed))?;
    let mut cfg = base.clone();
    cfg.n = n;
    cfg.seed = seed;
    Ok(match mis_tree(&g, &cfg) {
        Ok(run) => (SweepRow::from_report(&run.report), Some(run.report)),
        Err(ab) => match ab.report {
            Some(r) => (SweepRow::from_report(&r), Some(*r)),
            None => return Err(ab.error),
        },
    })
}

pub fn write_csv(rows: &[SweepRow], w: impl Write) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        out.serialize(r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Parses `lo:hi:factor` into `lo, lo*factor, ...` up to `hi`.
pub fn parse_n_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("n-range must look like lo:hi:factor, got {s:?}"));
    let parts: Vec<usize> = s
        .split(':')
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [lo, hi, factor] = parts[..] else {
        return Err(bad());
    };
    if lo == 0 || factor < 2 || lo > hi {
        return Err(bad());
    }
    let mut out = Vec::new();
    let mut n = lo;
    while n <= hi {
        out.push(n);
        n = match n.checked_mul(factor) {
            Some(x) => x,
            None => break,
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpc::GatherMode;

    #[test]
    fn points_are_deduplicated() {
        let (p, dropped) = sweep_points(&[10, 20, 10], &[0, 1]);
        assert_eq!(p, vec![(10, 0), (10, 1), (20, 0), (20, 1)]);
        assert_eq!(dropped, 2);
    }

    #[test]
    fn n_range() {
        assert_eq!(
            parse_n_range("1024:16384:4").unwrap(),
            vec![1024, 4096, 16384]
        );
        assert!(parse_n_range("1:2").is_err());
        assert!(parse_n_range("8:4:2").is_err());
        assert!(parse_n_range("8:64:1").is_err());
    }

    #[test]
    fn csv_shape() {
        let base = MpcConfig::new(1, 0.5, GatherMode::Naive, 0);
        let (row, rep) = run_point(&GenKind::UniformRandomTree, 300, 2, &base).unwrap();
        assert!(row.passed());
        assert!(rep.is_some());
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("300,2,naive,"));
    }
}
