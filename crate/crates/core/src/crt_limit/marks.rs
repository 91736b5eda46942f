//! Poisson marks on the edges of a reduced tree, their thinning-plus-births
//! transition kernel, and the leaf partitions they induce.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, Result};
use crate::random_trees::{Dsu, ReducedTree};
use crate::MassPartition;

/// A mark at `position` along edge `edge`, measured from the edge's first
/// endpoint. `id` is unique within its [`MarkSet`] and survives evolution,
/// so survivors can be told apart from births.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub edge: usize,
    pub position: f64,
    pub id: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkSet {
    atoms: Vec<Atom>,
    edge_count: usize,
    next_id: u64,
}

impl MarkSet {
    pub fn empty(tree: &ReducedTree) -> Self {
        Self { atoms: Vec::new(), edge_count: tree.edge_count(), next_id: 0 }
    }

    /// Builds a mark set from `(edge, position)` pairs, checking each lies
    /// strictly inside its edge.
    pub fn from_positions(tree: &ReducedTree, atoms: &[(usize, f64)]) -> Result<Self> {
        let mut set = Self::empty(tree);
        for &(edge, position) in atoms {
            set.push(edge, position);
        }
        set.check_against(tree)?;
        Ok(set)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Ids below this value were issued before any later evolution step.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn counts_per_edge(&self) -> Vec<usize> {
        let mut counts = vec![0; self.edge_count];
        for a in &self.atoms {
            counts[a.edge] += 1;
        }
        counts
    }

    fn push(&mut self, edge: usize, position: f64) {
        self.atoms.push(Atom { edge, position, id: self.next_id });
        self.next_id += 1;
    }

    fn check_against(&self, tree: &ReducedTree) -> Result<()> {
        if self.edge_count != tree.edge_count() {
            return Err(invalid("mark set belongs to a tree with a different edge count"));
        }
        for a in &self.atoms {
            let ok = a.edge < tree.edge_count()
                && a.position > 0.0
                && a.position < tree.lengths()[a.edge];
            if !ok {
                return Err(invalid(format!(
                    "atom at ({}, {}) is not inside an edge of this tree",
                    a.edge, a.position
                )));
            }
        }
        Ok(())
    }

    /// Adds an independent Poisson process of `rate` per unit length.
    fn sprinkle<R: Rng + ?Sized>(&mut self, tree: &ReducedTree, rate: f64, rng: &mut R) {
        if rate <= 0.0 {
            return;
        }
        for (edge, &len) in tree.lengths().iter().enumerate() {
            let count = poisson(rate * len, rng);
            for _ in 0..count {
                let position = interior_point(len, rng);
                self.push(edge, position);
            }
        }
    }
}

pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    draw as u64
}

/// Uniform on the open interval `(0, len)`.
pub(crate) fn interior_point<R: Rng + ?Sized>(len: f64, rng: &mut R) -> f64 {
    loop {
        let x = rng.random::<f64>() * len;
        if x > 0.0 && x < len {
            return x;
        }
    }
}

fn check_rate(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("mark intensity must be positive, got {r}")))
    }
}

/// Stationary marks: a Poisson process of intensity `r` per unit length.
pub fn init_marks<R: Rng + ?Sized>(tree: &ReducedTree, r: f64, rng: &mut R) -> Result<MarkSet> {
    check_rate(r)?;
    let mut set = MarkSet::empty(tree);
    set.sprinkle(tree, r, rng);
    Ok(set)
}

/// Probability that a mark present now is still present after `delta`.
pub fn survival_probability(r: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        1.0
    } else {
        (-delta / (2.0 * r)).exp()
    }
}

/// Advances marks by `delta` time units at intensity `r`: every atom is kept
/// independently with probability `exp(-delta / 2r)`, then births arrive as
/// an independent Poisson process of intensity `r (1 - exp(-delta / 2r))`.
/// Survivors keep their ids and order; births are appended with fresh ids.
pub fn evolve_marks<R: Rng + ?Sized>(
    tree: &ReducedTree,
    marks: &MarkSet,
    r: f64,
    delta: f64,
    rng: &mut R,
) -> Result<MarkSet> {
    check_rate(r)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(invalid(format!("time increment must be nonnegative, got {delta}")));
    }
    marks.check_against(tree)?;
    if delta == 0.0 {
        return Ok(marks.clone());
    }
    let keep = survival_probability(r, delta);
    let mut out = MarkSet {
        atoms: Vec::with_capacity(marks.len()),
        edge_count: marks.edge_count,
        next_id: marks.next_id,
    };
    for atom in &marks.atoms {
        if rng.random::<f64>() < keep {
            out.atoms.push(*atom);
        }
    }
    out.sprinkle(tree, r * (1.0 - keep), rng);
    Ok(out)
}

/// A set partition of the labels `1..=i`, blocks sorted internally and by
/// their smallest label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePartition {
    blocks: Vec<Vec<usize>>,
    label_count: usize,
}

impl SamplePartition {
    pub fn new(mut blocks: Vec<Vec<usize>>, label_count: usize) -> Result<Self> {
        let mut seen = vec![false; label_count + 1];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(invalid("partition blocks must be nonempty"));
            }
            block.sort_unstable();
            for &x in block.iter() {
                if x == 0 || x > label_count || seen[x] {
                    return Err(invalid(format!("label {x} is out of range or repeated")));
                }
                seen[x] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(invalid("partition does not cover every label"));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { blocks, label_count })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.blocks.iter().any(|blk| blk.contains(&a) && blk.contains(&b))
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &SamplePartition) -> bool {
        self.blocks.iter().all(|b| coarser.blocks.iter().any(|c| b.iter().all(|x| c.contains(x))))
    }
}

/// Leaves share a block iff no atom sits on the path between them. An edge
/// carrying any atom separates its two sides, so the partition is the
/// labelled part of the components of the atom-free edges.
pub fn partition_from_marks(tree: &ReducedTree, marks: &MarkSet) -> Result<SamplePartition> {
    marks.check_against(tree)?;
    let counts = marks.counts_per_edge();
    let mut dsu = Dsu::new(tree.node_count());
    for (e, &(u, v)) in tree.edges().iter().enumerate() {
        if counts[e] == 0 {
            dsu.union(u, v);
        }
    }
    let i = tree.leaf_count();
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); tree.node_count()];
    for node in 0..i {
        by_root[dsu.find(node)].push(node + 1);
    }
    let blocks = by_root.into_iter().filter(|b| !b.is_empty()).collect();
    SamplePartition::new(blocks, i)
}

/// Ranked block sizes divided by `i`: the leaf-sampling estimate of the
/// mass partition.
pub fn block_frequencies(p: &SamplePartition, i: usize) -> Result<MassPartition> {
    if i != p.label_count() {
        return Err(invalid(format!(
            "partition covers {} labels, not {i}",
            p.label_count()
        )));
    }
    MassPartition::from_counts(&p.block_sizes(), i)
}
