//! The fair-coin mark/unmark chain on a uniform tree.
//!
//! Heads marks (cuts) a uniform unmarked edge, tails unmarks (links) a
//! uniform marked edge; an empty pool turns the step into a no-op, and the
//! step counter advances either way. Edge pools are swap-remove vectors, so
//! pool order is part of the replay contract.

mod spr;

use rand::Rng;
use serde::Serialize;

pub use spr::{RootedForestState, SprMove};

use crate::dynamic_forest::{Backend, DynamicForest};
use crate::error::{invalid, Result};
use crate::random_trees::LabeledTree;
use crate::MassPartition;

/// `floor(t n + s sqrt(n))`, rejecting negative targets.
pub fn observation_index(n: usize, t: f64, s: f64) -> Result<u64> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if !(t.is_finite() && t > 0.0) || !s.is_finite() {
        return Err(invalid(format!("bad time parameters t={t}, s={s}")));
    }
    let nf = n as f64;
    let target = (t * nf + s * nf.sqrt()).floor();
    if target < 0.0 {
        return Err(invalid(format!("t n + s sqrt(n) is negative for n={n}, t={t}, s={s}")));
    }
    Ok(target as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coin {
    Head,
    Tail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Marked(usize),
    Unmarked(usize),
    Idle,
}

/// One snapshot of the chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub k: u64,
    pub masses: MassPartition,
    pub mark_count: usize,
    pub pair_flags: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct MarkChainState {
    forest: DynamicForest,
    marked: Vec<usize>,
    unmarked: Vec<usize>,
    slot: Vec<usize>,
    step: u64,
}

impl MarkChainState {
    pub fn new(tree: LabeledTree) -> Self {
        Self::with_backend(tree, Backend::default())
    }

    pub fn with_backend(tree: LabeledTree, backend: Backend) -> Self {
        let m = tree.edge_count();
        Self {
            forest: DynamicForest::with_backend(tree, backend),
            marked: Vec::new(),
            unmarked: (0..m).collect(),
            slot: (0..m).collect(),
            step: 0,
        }
    }

    pub fn forest(&self) -> &DynamicForest {
        &self.forest
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn mark_count(&self) -> usize {
        self.marked.len()
    }

    pub fn marked(&self) -> &[usize] {
        &self.marked
    }

    pub fn unmarked(&self) -> &[usize] {
        &self.unmarked
    }

    /// One step with a coin drawn from `rng`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepOutcome {
        let coin = if rng.random::<bool>() { Coin::Head } else { Coin::Tail };
        self.step_with_coin(coin, rng)
    }

    /// One step with a given coin; `rng` picks the edge.
    pub fn step_with_coin<R: Rng + ?Sized>(&mut self, coin: Coin, rng: &mut R) -> StepOutcome {
        self.step += 1;
        match coin {
            Coin::Head if !self.unmarked.is_empty() => {
                let idx = rng.random_range(0..self.unmarked.len());
                let e = take(&mut self.unmarked, &mut self.slot, idx);
                put(&mut self.marked, &mut self.slot, e);
                self.forest.cut(e).expect("unmarked edges are present");
                StepOutcome::Marked(e)
            }
            Coin::Tail if !self.marked.is_empty() => {
                let idx = rng.random_range(0..self.marked.len());
                let e = take(&mut self.marked, &mut self.slot, idx);
                put(&mut self.unmarked, &mut self.slot, e);
                self.forest.link(e).expect("marked edges are absent");
                StepOutcome::Unmarked(e)
            }
            _ => StepOutcome::Idle,
        }
    }

    /// Applies exactly `k_target - k` steps.
    pub fn run_until<R: Rng + ?Sized>(&mut self, k_target: u64, rng: &mut R) -> Result<()> {
        if k_target < self.step {
            return Err(invalid(format!(
                "cannot run back from step {} to {k_target}",
                self.step
            )));
        }
        while self.step < k_target {
            self.step(rng);
        }
        Ok(())
    }

    pub fn observe(&self, pairs: &[(usize, usize)]) -> Result<Observation> {
        let pair_flags = pairs
            .iter()
            .map(|&(u, v)| self.forest.same_component(u, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Observation {
            k: self.step,
            masses: self.forest.ranked_masses(),
            mark_count: self.marked.len(),
            pair_flags,
        })
    }
}

fn take(pool: &mut Vec<usize>, slot: &mut [usize], idx: usize) -> usize {
    let e = pool.swap_remove(idx);
    if idx < pool.len() {
        slot[pool[idx]] = idx;
    }
    e
}

fn put(pool: &mut Vec<usize>, slot: &mut [usize], e: usize) {
    slot[e] = pool.len();
    pool.push(e);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_trees::sample_uniform_tree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path4() -> LabeledTree {
        LabeledTree::new(4, vec![(1, 2), (2, 3), (3, 4)]).unwrap()
    }

    #[test]
    fn observation_index_examples() {
        assert_eq!(observation_index(100, 1.0, 0.0).unwrap(), 100);
        assert_eq!(observation_index(100, 1.0, 2.0).unwrap(), 120);
        assert_eq!(observation_index(10_000, 0.5, -1.0).unwrap(), 4900);
        assert!(observation_index(100, 1.0, -20.0).is_err());
        assert!(observation_index(100, 0.0, 0.0).is_err());
        assert!(observation_index(0, 1.0, 0.0).is_err());
    }

    #[test]
    fn no_op_steps_still_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut chain = MarkChainState::new(path4());
        assert_eq!(chain.step_with_coin(Coin::Tail, &mut rng), StepOutcome::Idle);
        assert_eq!(chain.step_count(), 1);
        for _ in 0..3 {
            assert!(matches!(chain.step_with_coin(Coin::Head, &mut rng), StepOutcome::Marked(_)));
        }
        assert_eq!(chain.step_with_coin(Coin::Head, &mut rng), StepOutcome::Idle);
        assert_eq!(chain.step_count(), 5);
        assert_eq!(chain.mark_count(), 3);
    }

    #[test]
    fn two_vertex_first_step_is_fair() {
        let tree = LabeledTree::new(2, vec![(1, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let runs = 10_000;
        let marked = (0..runs)
            .filter(|_| {
                let mut c = MarkChainState::new(tree.clone());
                c.step(&mut rng);
                c.mark_count() == 1
            })
            .count();
        let freq = marked as f64 / runs as f64;
        assert!((freq - 0.5).abs() < 0.02, "{freq}");
    }

    #[test]
    fn run_until_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tree = sample_uniform_tree(50, &mut rng).unwrap();
        let mut a = MarkChainState::new(tree.clone());
        let mut b = MarkChainState::new(tree);
        let mut ra = ChaCha8Rng::seed_from_u64(9);
        let mut rb = ChaCha8Rng::seed_from_u64(9);
        a.run_until(40, &mut ra).unwrap();
        a.run_until(40, &mut ra).unwrap();
        a.run_until(100, &mut ra).unwrap();
        b.run_until(100, &mut rb).unwrap();
        assert_eq!(a.observe(&[(1, 2)]).unwrap(), b.observe(&[(1, 2)]).unwrap());
        assert_eq!(a.marked(), b.marked());
        assert!(a.run_until(99, &mut ra).is_err());
    }

    #[test]
    fn observe_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut chain = MarkChainState::new(path4());
        let fresh = chain.observe(&[(1, 4), (2, 3)]).unwrap();
        assert_eq!(fresh.masses.as_slice(), &[1.0]);
        assert_eq!(fresh.mark_count, 0);
        assert_eq!(fresh.pair_flags, vec![true, true]);

        while chain.mark_count() < 3 {
            chain.step_with_coin(Coin::Head, &mut rng);
        }
        let all = chain.observe(&[(1, 2), (3, 3)]).unwrap();
        assert_eq!(all.masses.as_slice(), &[0.25; 4]);
        assert_eq!(all.pair_flags, vec![false, true]);
        assert_eq!(chain.observe(&[(1, 2)]).unwrap(), chain.observe(&[(1, 2)]).unwrap());
    }

    #[test]
    fn observe_single_cut() {
        let mut chain = MarkChainState::new(path4());
        chain.forest.cut(1).unwrap();
        let e = chain.unmarked.iter().position(|&e| e == 1).unwrap();
        let e = take(&mut chain.unmarked, &mut chain.slot, e);
        put(&mut chain.marked, &mut chain.slot, e);
        let obs = chain.observe(&[(1, 2), (1, 4)]).unwrap();
        assert_eq!(obs.pair_flags, vec![true, false]);
        assert_eq!(obs.masses.len(), obs.mark_count + 1);
    }

    #[test]
    fn mark_count_is_a_reflected_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let tree = sample_uniform_tree(6, &mut rng).unwrap();
        let mut chain = MarkChainState::with_backend(tree, Backend::Naive);
        // Transition counts keyed by whether each pool is empty.
        let mut up = [0usize; 3];
        let mut down = [0usize; 3];
        let mut total = [0usize; 3];
        for _ in 0..60_000 {
            let before = chain.mark_count();
            let class = match before {
                0 => 0,
                5 => 2,
                _ => 1,
            };
            chain.step(&mut rng);
            assert_eq!(chain.marked().len() + chain.unmarked().len(), 5);
            assert_eq!(chain.forest().component_count(), chain.mark_count() + 1);
            let after = chain.mark_count();
            assert!(after.abs_diff(before) <= 1);
            total[class] += 1;
            if after > before {
                up[class] += 1;
            }
            if after < before {
                down[class] += 1;
            }
        }
        assert_eq!(down[0], 0);
        assert_eq!(up[2], 0);
        for class in 0..3 {
            let p_up = up[class] as f64 / total[class] as f64;
            let p_down = down[class] as f64 / total[class] as f64;
            let want_up = if class == 2 { 0.0 } else { 0.5 };
            let want_down = if class == 0 { 0.0 } else { 0.5 };
            assert!((p_up - want_up).abs() < 0.03, "class {class}: up {p_up}");
            assert!((p_down - want_down).abs() < 0.03, "class {class}: down {p_down}");
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let tree = sample_uniform_tree(300, &mut rng).unwrap();
            let mut chain = MarkChainState::new(tree);
            let mut out = Vec::new();
            for k in [50u64, 120, 400] {
                chain.run_until(k, &mut rng).unwrap();
                out.push(chain.observe(&[(1, 2), (3, 4)]).unwrap());
            }
            out
        };
        assert_eq!(run(), run());
    }
}
