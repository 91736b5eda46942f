//! Block sizes of the mark partition on many leaves without building the
//! reduced tree.
//!
//! The tree is grown by line breaking: cut points `C_j = sqrt(2 Gamma_j)`
//! of a unit Poisson process in `Gamma`; the first segment `[0, C_1]` joins
//! two leaves and segment `j` of length `C_j - C_{j-1}` hangs from a uniform
//! point (by length) of what is already built, ending in a new leaf. After
//! `i - 1` segments this is the reduced tree on `i` leaves, lengths and all.
//! Marks are laid on each segment as it arrives, so only the mark-free
//! components are tracked: their total length (to place the next
//! attachment) and their leaf count.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::marks::{interior_point, poisson};
use crate::error::{invalid, Result};

/// Prefix sums over a growable array of nonnegative weights.
#[derive(Debug, Default, Clone)]
struct Fenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
}

impl Fenwick {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn prefix(&self, mut end: usize) -> f64 {
        let mut s = 0.0;
        while end > 0 {
            s += self.tree[end - 1];
            end &= end - 1;
        }
        s
    }

    fn push(&mut self, value: f64) {
        let pos = self.values.len() + 1;
        let low = pos & pos.wrapping_neg();
        let covered = self.prefix(pos - 1) - self.prefix(pos - low);
        self.tree.push(covered + value);
        self.values.push(value);
    }

    fn add(&mut self, index: usize, delta: f64) {
        self.values[index] += delta;
        let mut pos = index + 1;
        while pos <= self.tree.len() {
            self.tree[pos - 1] += delta;
            pos += pos & pos.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        self.prefix(self.len())
    }

    /// Smallest index whose prefix sum through it exceeds `target`.
    fn search(&self, mut target: f64) -> usize {
        let n = self.tree.len();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next - 1] <= target {
                pos = next;
                target -= self.tree[next - 1];
            }
            step >>= 1;
        }
        // Rounding can walk past the last positive weight.
        pos.min(n - 1)
    }
}

struct Components {
    lengths: Fenwick,
    leaves: Vec<usize>,
}

impl Components {
    fn open(&mut self, length: f64, leaves: usize) -> usize {
        self.lengths.push(length);
        self.leaves.push(leaves);
        self.leaves.len() - 1
    }
}

/// Lays Poisson(`r` per length) marks on a segment of length `len`, returns
/// the distances from the start to each mark in increasing order.
fn segment_marks<R: Rng + ?Sized>(len: f64, r: f64, rng: &mut R) -> Vec<f64> {
    let count = poisson(r * len, rng);
    let mut cuts: Vec<f64> = (0..count).map(|_| interior_point(len, rng)).collect();
    cuts.sort_unstable_by(f64::total_cmp);
    cuts
}

/// Splits a new segment hanging from component `attach` into pieces at its
/// marks: the first piece joins `attach`, inner pieces are leafless, and the
/// last piece carries the segment's leaf.
fn add_segment(comps: &mut Components, attach: usize, len: f64, cuts: &[f64]) {
    let Some(&first) = cuts.first() else {
        comps.lengths.add(attach, len);
        comps.leaves[attach] += 1;
        return;
    };
    comps.lengths.add(attach, first);
    for w in cuts.windows(2) {
        comps.open(w[1] - w[0], 0);
    }
    comps.open(len - cuts[cuts.len() - 1], 1);
}

/// Leaf counts of the blocks of the partition induced by Poisson marks of
/// intensity `r` on the reduced tree spanned by `leaves` random leaves, in
/// the order blocks were created. Same law as building the tree with
/// [`super::sample_reduced_tree`], marking it with [`super::init_marks`] and
/// reading block sizes off [`super::partition_from_marks`], in `O(i log i)`
/// time and memory proportional to the number of mark-free components.
pub fn sample_block_sizes<R: Rng + ?Sized>(leaves: usize, r: f64, rng: &mut R) -> Result<Vec<usize>> {
    if leaves < 2 {
        return Err(invalid(format!("need at least two leaves, got {leaves}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid(format!("mark intensity must be positive, got {r}")));
    }
    let mut comps = Components { lengths: Fenwick::default(), leaves: Vec::new() };
    let mut gamma: f64 = Exp1.sample(rng);
    let mut reach = (2.0 * gamma).sqrt();
    // The first segment hangs from a zero-length component holding its
    // near-end leaf.
    let root = comps.open(0.0, 1);
    let cuts = segment_marks(reach, r, rng);
    add_segment(&mut comps, root, reach, &cuts);
    for _ in 2..leaves {
        let e: f64 = Exp1.sample(rng);
        gamma += e;
        let next = (2.0 * gamma).sqrt();
        let len = next - reach;
        reach = next;
        let u = rng.random::<f64>() * comps.lengths.total();
        let attach = comps.lengths.search(u);
        let cuts = segment_marks(len, r, rng);
        add_segment(&mut comps, attach, len, &cuts);
    }
    Ok(comps.leaves.into_iter().filter(|&c| c > 0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crt_limit::{init_marks, partition_from_marks, sample_reduced_tree};
    use crate::stats::{
        chi_square_critical_001, chi_square_two_sample, ks_two_sample, pool_sparse_cells, EmpiricalSample,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fenwick_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = Fenwick::default();
        let mut plain: Vec<f64> = Vec::new();
        for step in 0..2000 {
            if step % 3 == 0 || plain.is_empty() {
                let v = rng.random::<f64>();
                f.push(v);
                plain.push(v);
            } else {
                let idx = rng.random_range(0..plain.len());
                let d = rng.random::<f64>();
                f.add(idx, d);
                plain[idx] += d;
            }
            let total: f64 = plain.iter().sum();
            assert!((f.total() - total).abs() < 1e-9);
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let expect = plain
                .iter()
                .position(|&v| {
                    acc += v;
                    acc > target
                })
                .unwrap_or(plain.len() - 1);
            let got = f.search(target);
            // Allow a neighbour on exact ties from rounding.
            assert!(got.abs_diff(expect) <= 1, "{got} vs {expect}");
        }
    }

    #[test]
    fn fenwick_skips_zero_weights() {
        let mut f = Fenwick::default();
        for v in [0.0, 2.0, 0.0, 0.0, 1.0] {
            f.push(v);
        }
        assert_eq!(f.search(0.0), 1);
        assert_eq!(f.search(1.999), 1);
        assert_eq!(f.search(2.5), 4);
    }

    #[test]
    fn sizes_cover_all_leaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &(i, r) in &[(2, 0.5), (10, 1.0), (500, 2.0), (3000, 1.0)] {
            let sizes = sample_block_sizes(i, r, &mut rng).unwrap();
            assert_eq!(sizes.iter().sum::<usize>(), i);
        }
        assert!(sample_block_sizes(1, 1.0, &mut rng).is_err());
        assert!(sample_block_sizes(5, 0.0, &mut rng).is_err());
    }

    fn explicit_sizes(i: usize, r: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let t = sample_reduced_tree(i, rng).unwrap();
        let m = init_marks(&t, r, rng).unwrap();
        partition_from_marks(&t, &m).unwrap().block_sizes()
    }

    #[test]
    fn two_leaf_split_probability() {
        // P(one block) = E[exp(-r L)] with L Rayleigh.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let runs = 100_000;
        let joined = (0..runs).filter(|_| sample_block_sizes(2, 1.0, &mut rng).unwrap().len() == 1).count();
        let p = joined as f64 / runs as f64;
        let exact = crate::crt_limit::rayleigh_laplace(1.0);
        assert!((p - exact).abs() < 0.01, "{p} vs {exact}");
    }

    #[test]
    fn agrees_with_explicit_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (i, r, runs) = (40, 0.7, 20_000);
        let mut fast_blocks = vec![0usize; i + 1];
        let mut slow_blocks = vec![0usize; i + 1];
        let mut fast_max = Vec::with_capacity(runs);
        let mut slow_max = Vec::with_capacity(runs);
        for _ in 0..runs {
            let a = sample_block_sizes(i, r, &mut rng).unwrap();
            let b = explicit_sizes(i, r, &mut rng);
            fast_blocks[a.len()] += 1;
            slow_blocks[b.len()] += 1;
            fast_max.push(*a.iter().max().unwrap() as f64);
            slow_max.push(*b.iter().max().unwrap() as f64);
        }
        let (fast_blocks, slow_blocks) = pool_sparse_cells(&fast_blocks, &slow_blocks, 20);
        let (stat, df) = chi_square_two_sample(&fast_blocks, &slow_blocks).unwrap();
        assert!(stat < chi_square_critical_001(df), "block count chi2 {stat} on {df}");
        let ks = ks_two_sample(
            &EmpiricalSample::new(fast_max).unwrap(),
            &EmpiricalSample::new(slow_max).unwrap(),
        );
        assert!(ks < 0.025, "largest block ks {ks}");
    }
}
