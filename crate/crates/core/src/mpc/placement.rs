//! Bin-packing helpers: first-fit over machines with `O(log M)` lookups.

/// Max-segment tree over remaining capacities; finds the leftmost machine
/// that can still take an item.
pub(crate) struct FirstFit {
    size: usize,
    tree: Vec<u64>,
}

impl FirstFit {
    /// Machines start with the given remaining capacities.
    pub fn with_free(free: &[u64]) -> Self {
        let size = free.len().max(1).next_power_of_two();
        let mut tree = vec![0; 2 * size];
        tree[size..size + free.len()].copy_from_slice(free);
        for i in (1..size).rev() {
            tree[i] = tree[2 * i].max(tree[2 * i + 1]);
        }
        FirstFit { size, tree }
    }

    /// Places an item of `w` words on the leftmost machine with room.
    pub fn place(&mut self, w: u64) -> Option<usize> {
        if self.tree[1] < w {
            return None;
        }
        let mut i = 1;
        while i < self.size {
            i = if self.tree[2 * i] >= w {
                2 * i
            } else {
                2 * i + 1
            };
        }
        self.tree[i] -= w;
        let leaf = i - self.size;
        i /= 2;
        while i >= 1 {
            self.tree[i] = self.tree[2 * i].max(self.tree[2 * i + 1]);
            i /= 2;
        }
        Some(leaf)
    }
}

/// First-fit for items with two independent capacity dimensions (message
/// traffic and resident words). Subtrees are pruned when either maximum is
/// too small.
pub(crate) struct FirstFit2 {
    size: usize,
    tree: Vec<(u64, u64)>,
}

impl FirstFit2 {
    pub fn new(machines: usize, capacity: u64) -> Self {
        let size = machines.next_power_of_two();
        let mut tree = vec![(0, 0); 2 * size];
        for leaf in 0..machines {
            tree[size + leaf] = (capacity, capacity);
        }
        for i in (1..size).rev() {
            tree[i] = join(tree[2 * i], tree[2 * i + 1]);
        }
        FirstFit2 { size, tree }
    }

    pub fn place(&mut self, traffic: u64, resident: u64) -> Option<usize> {
        let leaf = self.find(1, traffic, resident)?;
        let mut i = self.size + leaf;
        self.tree[i].0 -= traffic;
        self.tree[i].1 -= resident;
        i /= 2;
        while i >= 1 {
            self.tree[i] = join(self.tree[2 * i], self.tree[2 * i + 1]);
            i /= 2;
        }
        Some(leaf)
    }

    fn find(&self, i: usize, t: u64, r: u64) -> Option<usize> {
        let (mt, mr) = self.tree[i];
        if mt < t || mr < r {
            return None;
        }
        if i >= self.size {
            return Some(i - self.size);
        }
        self.find(2 * i, t, r)
            .or_else(|| self.find(2 * i + 1, t, r))
    }
}

fn join(a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
    (a.0.max(b.0), a.1.max(b.1))
}

/// First-fit decreasing: items sorted by decreasing size (ties by index),
/// each placed on the leftmost machine with room. Returns the machine of
/// every item, or the index of the first item that did not fit.
pub(crate) fn first_fit_decreasing(
    sizes: &[u64],
    machines: usize,
    capacity: u64,
) -> Result<Vec<usize>, usize> {
    first_fit_decreasing_into(sizes, &vec![capacity; machines.max(1)])
}

/// First-fit decreasing onto machines that are already partly filled.
pub(crate) fn first_fit_decreasing_into(sizes: &[u64], free: &[u64]) -> Result<Vec<usize>, usize> {
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut ff = FirstFit::with_free(free);
    let mut out = vec![0; sizes.len()];
    for i in order {
        out[i] = ff.place(sizes[i]).ok_or(i)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ffd_three_fives() {
        let m = first_fit_decreasing(&[5, 5, 5], 2, 10).unwrap();
        assert_eq!(m, vec![0, 0, 1]);
    }

    #[test]
    fn ffd_reports_overflow() {
        assert_eq!(first_fit_decreasing(&[11], 3, 10), Err(0));
        assert_eq!(first_fit_decreasing(&[6, 6, 6], 2, 10), Err(2));
    }

    #[test]
    fn two_dimensional_fit() {
        let mut ff = FirstFit2::new(3, 10);
        assert_eq!(ff.place(8, 1), Some(0));
        assert_eq!(ff.place(1, 8), Some(0));
        assert_eq!(ff.place(2, 2), Some(1));
        assert_eq!(ff.place(11, 1), None);
        assert_eq!(ff.place(8, 8), Some(1));
    }
}
