//! Uniform labeled trees via Prüfer sequences, and reduction of a labeled tree
//! to the subtree spanned by its first vertices.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{invalid, Error, Result};

/// A tree on the vertices `1..=n`, stored as `n - 1` edges with the smaller
/// endpoint first. Edge order is fixed at construction and serves as the edge
/// identity for everything built on top of the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl LabeledTree {
    /// Validates and canonicalises an edge list. Edges keep the given order.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTree("a tree needs at least one vertex".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges given for {n} vertices",
                edges.len()
            )));
        }
        let mut dsu = Dsu::new(n + 1);
        let mut canonical = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == 0 || v == 0 || u > n || v > n {
                return Err(Error::InvalidTree(format!("edge ({u},{v}) leaves 1..={n}")));
            }
            if u == v {
                return Err(Error::InvalidTree(format!("self loop at {u}")));
            }
            if !dsu.union(u, v) {
                return Err(Error::InvalidTree(format!("edge ({u},{v}) closes a cycle")));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        Ok(Self { n, edges: canonical })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    /// Edge set in sorted order, for order-insensitive comparison.
    pub fn sorted_edges(&self) -> Vec<(usize, usize)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }

    /// Adjacency lists indexed by vertex (index 0 unused); entries are
    /// `(neighbour, edge id)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n + 1];
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        adj
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n == other.n && self.sorted_edges() == other.sorted_edges()
    }
}

/// Text dump: a line holding `n`, then one `u v` line per edge.
impl fmt::Display for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for (u, v) in &self.edges {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

impl FromStr for LabeledTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::InvalidTree("empty tree dump".into()))?
            .parse()
            .map_err(|_| Error::InvalidTree("first line must be the vertex count".into()))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return Err(Error::InvalidTree(format!("bad edge line {line:?}"))),
            }
        }
        Self::new(n, edges)
    }
}

pub fn prufer_decode(seq: &[usize], n: usize) -> Result<LabeledTree> {
    if n < 2 {
        return Err(invalid(format!("Prüfer decoding needs n >= 2, got {n}")));
    }
    if seq.len() != n - 2 {
        return Err(invalid(format!(
            "Prüfer sequence for n={n} must have length {}, got {}",
            n - 2,
            seq.len()
        )));
    }
    if let Some(&bad) = seq.iter().find(|&&x| x == 0 || x > n) {
        return Err(invalid(format!("label {bad} outside 1..={n}")));
    }

    let mut degree = vec![1usize; n + 1];
    for &x in seq {
        degree[x] += 1;
    }
    let mut ptr = 1;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        edges.push((leaf, x));
        degree[leaf] = 0;
        degree[x] -= 1;
        if degree[x] == 1 && x < ptr {
            leaf = x;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf, n));
    LabeledTree::new(n, edges)
}

pub fn prufer_encode(tree: &LabeledTree) -> Result<Vec<usize>> {
    let n = tree.vertex_count();
    if n < 2 {
        return Err(invalid("Prüfer encoding needs n >= 2"));
    }
    // Root at n; the parent of each removed leaf is the next sequence entry.
    let adj = tree.adjacency();
    let mut parent = vec![0usize; n + 1];
    let mut stack = vec![n];
    let mut seen = vec![false; n + 1];
    seen[n] = true;
    while let Some(u) = stack.pop() {
        for &(v, _) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = u;
                stack.push(v);
            }
        }
    }
    if seen[1..].iter().any(|s| !s) {
        return Err(Error::InvalidTree("tree is disconnected".into()));
    }

    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut ptr = 1;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    let mut seq = Vec::with_capacity(n - 2);
    for _ in 0..n - 2 {
        let next = parent[leaf];
        seq.push(next);
        degree[leaf] = 0;
        degree[next] -= 1;
        if degree[next] == 1 && next < ptr {
            leaf = next;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    Ok(seq)
}

/// Uniform labeled tree on `n` vertices, drawn as a uniform Prüfer sequence.
pub fn sample_uniform_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LabeledTree> {
    match n {
        0 => Err(invalid("a tree needs at least one vertex")),
        1 => LabeledTree::new(1, Vec::new()),
        _ => {
            let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(1..=n)).collect();
            prufer_decode(&seq, n)
        }
    }
}

/// A leaf-labeled tree with positive edge lengths.
///
/// Nodes `0..leaf_count` carry the labels `1..=leaf_count`; nodes from
/// `leaf_count` on are unlabeled internal nodes of degree at least three.
/// A labeled node may sit inside the tree (degree two or more) when it comes
/// from a discrete tree.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTree {
    leaf_count: usize,
    node_count: usize,
    edges: Vec<(usize, usize)>,
    lengths: Vec<f64>,
}

impl ReducedTree {
    pub fn new(
        leaf_count: usize,
        node_count: usize,
        edges: Vec<(usize, usize)>,
        lengths: Vec<f64>,
    ) -> Result<Self> {
        if leaf_count < 2 {
            return Err(Error::InvalidTree("a reduced tree needs at least two leaves".into()));
        }
        if node_count < leaf_count || edges.len() != node_count - 1 || lengths.len() != edges.len()
        {
            return Err(Error::InvalidTree("inconsistent node, edge and length counts".into()));
        }
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidTree("edge lengths must be positive".into()));
        }
        let mut dsu = Dsu::new(node_count);
        let mut degree = vec![0usize; node_count];
        for &(u, v) in &edges {
            if u >= node_count || v >= node_count || u == v || !dsu.union(u, v) {
                return Err(Error::InvalidTree(format!("bad reduced-tree edge ({u},{v})")));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        if let Some(node) = (leaf_count..node_count).find(|&x| degree[x] < 3) {
            return Err(Error::InvalidTree(format!("internal node {node} has degree < 3")));
        }
        Ok(Self { leaf_count, node_count, edges, lengths })
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as node-index pairs; label `k` is node `k - 1`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Every labeled node is a leaf and every internal node has degree three.
    pub fn is_binary(&self) -> bool {
        let mut degree = vec![0usize; self.node_count];
        for &(u, v) in &self.edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        degree[..self.leaf_count].iter().all(|&d| d == 1)
            && degree[self.leaf_count..].iter().all(|&d| d == 3)
    }

    /// Path length between two labels (1-based).
    pub fn distance(&self, a: usize, b: usize) -> Result<f64> {
        Ok(self.path_edges(a, b)?.iter().map(|&e| self.lengths[e]).sum())
    }

    /// Edge ids on the path between two labels (1-based).
    pub fn path_edges(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        let i = self.leaf_count;
        if a == 0 || b == 0 || a > i || b > i {
            return Err(invalid(format!("labels must lie in 1..={i}")));
        }
        let (src, dst) = (a - 1, b - 1);
        let adj = self.adjacency();
        let mut via = vec![usize::MAX; self.node_count];
        let mut prev = vec![usize::MAX; self.node_count];
        let mut stack = vec![src];
        prev[src] = src;
        while let Some(u) = stack.pop() {
            for &(v, e) in &adj[u] {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    via[v] = e;
                    stack.push(v);
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = dst;
        while cur != src {
            path.push(via[cur]);
            cur = prev[cur];
        }
        Ok(path)
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        adj
    }

    /// Canonical shape key: the nontrivial leaf splits, each written as the
    /// sorted side that excludes label 1. Two trees have the same labeled
    /// shape iff their keys agree.
    pub fn shape_key(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let i = self.leaf_count;
        // Children-first order from a DFS rooted at label 1.
        let mut order = Vec::with_capacity(self.node_count);
        let mut parent_edge = vec![usize::MAX; self.node_count];
        let mut visited = vec![false; self.node_count];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(u) = stack.pop() {
            order.push(u);
            for &(v, e) in &adj[u] {
                if !visited[v] {
                    visited[v] = true;
                    parent_edge[v] = e;
                    stack.push(v);
                }
            }
        }
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.node_count];
        let mut splits = Vec::new();
        for &u in order.iter().rev() {
            let mut side = std::mem::take(&mut below[u]);
            if u < i {
                side.push(u + 1);
            }
            if u == 0 {
                break;
            }
            side.sort_unstable();
            let (a, b) = self.edges[parent_edge[u]];
            let parent = if a == u { b } else { a };
            below[parent].extend_from_slice(&side);
            if side.len() >= 2 && side.len() <= i - 2 {
                splits.push(side);
            }
        }
        splits.sort();
        splits
    }
}

/// Restricts a labeled tree to the union of paths between vertices `1..=i`,
/// scaling every base edge to length `1/sqrt(n)`.
///
/// Unlabeled vertices of degree two inside the union are suppressed and their
/// edges merged; a segment made of `j + 1` base edges gets length
/// `(j + 1)/sqrt(n)`. Labels `1..=i` are always kept, even when they sit
/// inside the union.
pub fn reduce_to_vertices(tree: &LabeledTree, i: usize) -> Result<ReducedTree> {
    let n = tree.vertex_count();
    if i < 2 || i > n {
        return Err(invalid(format!("need 2 <= i <= n, got i={i}, n={n}")));
    }
    let adj = tree.adjacency();

    // Root at vertex 1; a vertex is in the union iff its subtree holds a target.
    let mut parent = vec![0usize; n + 1];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![1usize];
    let mut seen = vec![false; n + 1];
    seen[1] = true;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &(v, _) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = u;
                stack.push(v);
            }
        }
    }
    let mut in_union = vec![false; n + 1];
    for &u in order.iter().rev() {
        if u <= i {
            in_union[u] = true;
        }
        if in_union[u] && u != 1 {
            in_union[parent[u]] = true;
        }
    }

    let union_degree = |u: usize| adj[u].iter().filter(|&&(v, _)| in_union[v]).count();
    let mut node_of = vec![usize::MAX; n + 1];
    for v in 1..=i {
        node_of[v] = v - 1;
    }
    let mut next_internal = i;
    for &u in &order {
        if u > i && in_union[u] && union_degree(u) >= 3 {
            node_of[u] = next_internal;
            next_internal += 1;
        }
    }

    // Walk from every kept node towards the root until the next kept node.
    let scale = 1.0 / (n as f64).sqrt();
    let mut edges = Vec::with_capacity(next_internal - 1);
    let mut lengths = Vec::with_capacity(next_internal - 1);
    for &u in &order {
        if u == 1 || node_of[u] == usize::MAX {
            continue;
        }
        let mut steps = 1usize;
        let mut cur = parent[u];
        while node_of[cur] == usize::MAX {
            steps += 1;
            cur = parent[cur];
        }
        edges.push((node_of[cur], node_of[u]));
        lengths.push(steps as f64 * scale);
    }
    ReducedTree::new(i, next_internal, edges, lengths)
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    pub(crate) fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}
