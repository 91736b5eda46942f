//! The forest left after removing the marked edges of a fixed base tree.
//!
//! Two interchangeable connectivity backends sit behind [`DynamicForest`]:
//! a naive one that only flips presence flags and traverses at query time,
//! and an Euler-tour treap with logarithmic cut, link and size queries.
//! Component sizes are integers throughout; division by `n` happens only
//! when a [`MassPartition`] is produced.

mod euler_tour;

use std::collections::VecDeque;

pub use euler_tour::EulerTourForest;

use crate::error::{invalid, Error, Result};
use crate::random_trees::{Dsu, LabeledTree};
use crate::MassPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Recompute by traversal on every query.
    Naive,
    #[default]
    EulerTour,
}

#[derive(Debug, Clone)]
enum Index {
    Naive,
    EulerTour(EulerTourForest),
}

#[derive(Debug, Clone)]
pub struct DynamicForest {
    base: LabeledTree,
    adjacency: Vec<Vec<(usize, usize)>>,
    present: Vec<bool>,
    absent: usize,
    index: Index,
}

impl DynamicForest {
    /// All edges present, one component of size `n`.
    pub fn new(tree: LabeledTree) -> Self {
        Self::with_backend(tree, Backend::default())
    }

    pub fn with_backend(tree: LabeledTree, backend: Backend) -> Self {
        let index = match backend {
            Backend::Naive => Index::Naive,
            Backend::EulerTour => {
                let zero_based: Vec<(usize, usize)> =
                    tree.edges().iter().map(|&(u, v)| (u - 1, v - 1)).collect();
                Index::EulerTour(EulerTourForest::new(tree.vertex_count(), &zero_based))
            }
        };
        Self {
            adjacency: tree.adjacency(),
            present: vec![true; tree.edge_count()],
            absent: 0,
            base: tree,
            index,
        }
    }

    pub fn backend(&self) -> Backend {
        match self.index {
            Index::Naive => Backend::Naive,
            Index::EulerTour(_) => Backend::EulerTour,
        }
    }

    pub fn base(&self) -> &LabeledTree {
        &self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.base.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.present.len()
    }

    pub fn is_present(&self, edge: usize) -> bool {
        self.present[edge]
    }

    pub fn absent_count(&self) -> usize {
        self.absent
    }

    pub fn component_count(&self) -> usize {
        self.absent + 1
    }

    /// Removes a present edge.
    pub fn cut(&mut self, edge: usize) -> Result<()> {
        self.check_edge(edge)?;
        if !self.present[edge] {
            return Err(Error::EdgeState { edge, state: "absent" });
        }
        self.present[edge] = false;
        self.absent += 1;
        if let Index::EulerTour(ett) = &mut self.index {
            ett.cut(edge);
        }
        Ok(())
    }

    /// Re-inserts an absent edge.
    pub fn link(&mut self, edge: usize) -> Result<()> {
        self.check_edge(edge)?;
        if self.present[edge] {
            return Err(Error::EdgeState { edge, state: "present" });
        }
        self.present[edge] = true;
        self.absent -= 1;
        if let Index::EulerTour(ett) = &mut self.index {
            let (u, v) = self.base.edge(edge);
            ett.link(edge, u - 1, v - 1);
        }
        Ok(())
    }

    pub fn component_size(&self, v: usize) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(match &self.index {
            Index::Naive => self.flood(v).len(),
            Index::EulerTour(ett) => ett.component_size(v - 1),
        })
    }

    pub fn same_component(&self, u: usize, v: usize) -> Result<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Ok(true);
        }
        Ok(match &self.index {
            Index::Naive => self.path_is_present(u, v),
            Index::EulerTour(ett) => ett.connected(u - 1, v - 1),
        })
    }

    /// Component sizes in decreasing order.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut sizes = match &self.index {
            Index::Naive => naive_sizes(&self.base, &self.present),
            Index::EulerTour(ett) => ett.component_sizes(),
        };
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    pub fn ranked_masses(&self) -> MassPartition {
        MassPartition::from_counts(&self.component_sizes(), self.vertex_count())
            .expect("component sizes always sum to n")
    }

    fn check_edge(&self, edge: usize) -> Result<()> {
        if edge >= self.present.len() {
            return Err(invalid(format!("edge id {edge} out of range")));
        }
        Ok(())
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.vertex_count() {
            return Err(invalid(format!("vertex {v} outside 1..={}", self.vertex_count())));
        }
        Ok(())
    }

    fn flood(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.vertex_count() + 1];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut out = Vec::new();
        while let Some(u) = queue.pop_front() {
            out.push(u);
            for &(w, e) in &self.adjacency[u] {
                if self.present[e] && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        out
    }

    fn path_is_present(&self, u: usize, v: usize) -> bool {
        self.flood(u).contains(&v)
    }
}

fn naive_sizes(tree: &LabeledTree, present: &[bool]) -> Vec<usize> {
    let n = tree.vertex_count();
    let mut dsu = Dsu::new(n + 1);
    for (e, &(u, v)) in tree.edges().iter().enumerate() {
        if present[e] {
            dsu.union(u, v);
        }
    }
    let mut sizes = Vec::new();
    for v in 1..=n {
        if dsu.find(v) == v {
            sizes.push(dsu.size_of(v));
        }
    }
    sizes
}

/// Decreasing component sizes of `tree` minus the `absent` edges, by a fresh
/// union-find pass. This is the equivalence oracle for [`DynamicForest`].
pub fn naive_component_sizes(tree: &LabeledTree, absent: &[usize]) -> Result<Vec<usize>> {
    let mut present = vec![true; tree.edge_count()];
    for &e in absent {
        if e >= present.len() {
            return Err(invalid(format!("edge id {e} out of range")));
        }
        present[e] = false;
    }
    let mut sizes = naive_sizes(tree, &present);
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(sizes)
}

pub fn naive_ranked_masses(tree: &LabeledTree, absent: &[usize]) -> Result<MassPartition> {
    let sizes = naive_component_sizes(tree, absent)?;
    MassPartition::from_counts(&sizes, tree.vertex_count())
}
