//! Rooted-forest variant inspired by subtree prune and regraft.
//!
//! Heads deletes a uniform edge; the endpoint on the detached side becomes
//! the root of its new tree. Tails picks a uniform vertex and a uniform tree
//! not containing it, and hangs that tree's root below the chosen vertex, so
//! the merged tree keeps the root of the chosen vertex's tree. A move with
//! nothing to act on (no edges, or a single tree) is a no-op.

use rand::Rng;

use super::Coin;
use crate::error::{invalid, Result};
use crate::random_trees::LabeledTree;
use crate::MassPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprMove {
    Pruned { vertex: usize },
    Regrafted { vertex: usize, root: usize },
    Idle,
}

/// A rooted forest on `1..=n` as parent pointers; roots have no parent.
#[derive(Debug, Clone)]
pub struct RootedForestState {
    parent: Vec<Option<usize>>,
    // Non-root vertices, one per edge (the child end).
    children: Vec<usize>,
    roots: Vec<usize>,
    slot: Vec<usize>,
    step: u64,
}

impl RootedForestState {
    /// `n` isolated roots.
    pub fn singletons(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("forest needs at least one vertex"));
        }
        let mut slot = vec![0; n + 1];
        for v in 1..=n {
            slot[v] = v - 1;
        }
        Ok(Self {
            parent: vec![None; n + 1],
            children: Vec::new(),
            roots: (1..=n).collect(),
            slot,
            step: 0,
        })
    }

    /// A single tree rooted at `root`.
    pub fn from_tree(tree: &LabeledTree, root: usize) -> Result<Self> {
        let n = tree.vertex_count();
        if root == 0 || root > n {
            return Err(invalid(format!("root {root} outside 1..={n}")));
        }
        let adj = tree.adjacency();
        let mut parent = vec![None; n + 1];
        let mut seen = vec![false; n + 1];
        let mut stack = vec![root];
        seen[root] = true;
        let mut children = Vec::with_capacity(n - 1);
        let mut slot = vec![0; n + 1];
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    slot[v] = children.len();
                    children.push(v);
                    stack.push(v);
                }
            }
        }
        Ok(Self { parent, children, roots: vec![root], slot, step: 0 })
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.children.len()
    }

    pub fn tree_count(&self) -> usize {
        self.roots.len()
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn root_of(&self, mut v: usize) -> usize {
        while let Some(p) = self.parent[v] {
            v = p;
        }
        v
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SprMove {
        let coin = if rng.random::<bool>() { Coin::Head } else { Coin::Tail };
        self.step_with_coin(coin, rng)
    }

    pub fn step_with_coin<R: Rng + ?Sized>(&mut self, coin: Coin, rng: &mut R) -> SprMove {
        self.step += 1;
        match coin {
            Coin::Head if !self.children.is_empty() => {
                let idx = rng.random_range(0..self.children.len());
                let v = self.children.swap_remove(idx);
                if idx < self.children.len() {
                    self.slot[self.children[idx]] = idx;
                }
                self.parent[v] = None;
                self.slot[v] = self.roots.len();
                self.roots.push(v);
                SprMove::Pruned { vertex: v }
            }
            Coin::Tail if self.roots.len() > 1 => {
                let n = self.vertex_count();
                let v = rng.random_range(1..=n);
                let own = self.slot[self.root_of(v)];
                // Uniform over the other roots: skip our own slot.
                let mut idx = rng.random_range(0..self.roots.len() - 1);
                if idx >= own {
                    idx += 1;
                }
                let root = self.roots.swap_remove(idx);
                if idx < self.roots.len() {
                    self.slot[self.roots[idx]] = idx;
                }
                self.parent[root] = Some(v);
                self.slot[root] = self.children.len();
                self.children.push(root);
                SprMove::Regrafted { vertex: v, root }
            }
            _ => SprMove::Idle,
        }
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut count = vec![0usize; n + 1];
        for v in 1..=n {
            count[self.root_of(v)] += 1;
        }
        let mut sizes: Vec<usize> = count.into_iter().filter(|&c| c > 0).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    pub fn ranked_masses(&self) -> MassPartition {
        MassPartition::from_counts(&self.component_sizes(), self.vertex_count())
            .expect("tree sizes sum to n")
    }

    /// Fresh traversal check: acyclic, one root per tree, bookkeeping agrees.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.vertex_count();
        let mut state = vec![0u8; n + 1]; // 0 new, 1 on path, 2 done
        for start in 1..=n {
            let mut path = Vec::new();
            let mut v = start;
            loop {
                match state[v] {
                    1 => return Err(format!("cycle through {v}")),
                    2 => break,
                    _ => {}
                }
                state[v] = 1;
                path.push(v);
                match self.parent[v] {
                    Some(p) => v = p,
                    None => break,
                }
            }
            for u in path {
                state[u] = 2;
            }
        }
        let roots = (1..=n).filter(|&v| self.parent[v].is_none()).count();
        if roots != self.roots.len() || roots + self.children.len() != n {
            return Err("root/edge bookkeeping out of sync".into());
        }
        if self.roots.iter().any(|&r| self.parent[r].is_some())
            || self.children.iter().any(|&c| self.parent[c].is_none())
        {
            return Err("pool membership disagrees with parent pointers".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_vertex_never_moves() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut f = RootedForestState::singletons(1).unwrap();
        for _ in 0..100 {
            assert_eq!(f.step(&mut rng), SprMove::Idle);
        }
        assert_eq!(f.step_count(), 100);
    }

    #[test]
    fn two_singletons_regraft() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut f = RootedForestState::singletons(2).unwrap();
        assert_eq!(f.step_with_coin(Coin::Head, &mut rng), SprMove::Idle);
        let mv = f.step_with_coin(Coin::Tail, &mut rng);
        let SprMove::Regrafted { vertex, root } = mv else { panic!("{mv:?}") };
        assert_ne!(vertex, root);
        assert_eq!(f.tree_count(), 1);
        assert_eq!(f.component_sizes(), vec![2]);
        assert_eq!(f.root_of(root), vertex);
        assert_eq!(f.step_with_coin(Coin::Tail, &mut rng), SprMove::Idle);
        let SprMove::Pruned { vertex: v } = f.step_with_coin(Coin::Head, &mut rng) else {
            panic!()
        };
        assert_eq!(v, root);
        assert_eq!(f.root_of(v), v);
    }

    #[test]
    fn fuzz_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut f = RootedForestState::singletons(50).unwrap();
        for _ in 0..100_000 {
            f.step(&mut rng);
            f.check_invariants().unwrap();
        }
        assert_eq!(f.component_sizes().iter().sum::<usize>(), 50);
    }

    #[test]
    fn rooted_tree_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tree = crate::random_trees::sample_uniform_tree(30, &mut rng).unwrap();
        let mut f = RootedForestState::from_tree(&tree, 7).unwrap();
        f.check_invariants().unwrap();
        assert_eq!(f.tree_count(), 1);
        assert_eq!(f.edge_count(), 29);
        assert_eq!(f.root_of(1), 7);
        for _ in 0..5_000 {
            f.step(&mut rng);
            f.check_invariants().unwrap();
        }
        assert!(RootedForestState::from_tree(&tree, 31).is_err());
    }
}
