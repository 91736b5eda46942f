//! Euler-tour forest over an implicit treap.
//!
//! Every vertex owns one sequence node and every edge owns two arc nodes.
//! A component is stored as one cyclic Euler tour in a treap keyed by
//! position; subtree weights count vertex nodes, so the weight at a treap
//! root is the component size.

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    left: u32,
    right: u32,
    parent: u32,
    prio: u64,
    size: u32,
    weight: u32,
}

#[derive(Debug, Clone)]
pub struct EulerTourForest {
    nodes: Vec<Node>,
    vertices: usize,
}

impl EulerTourForest {
    /// Builds the tour of a spanning tree given as 0-based edges.
    pub fn new(vertices: usize, edges: &[(usize, usize)]) -> Self {
        let mut prio_state = 0x9E37_79B9_7F4A_7C15u64 ^ vertices as u64;
        let mut nodes = Vec::with_capacity(vertices + 2 * edges.len());
        for k in 0..vertices + 2 * edges.len() {
            let is_vertex = k < vertices;
            nodes.push(Node {
                left: NIL,
                right: NIL,
                parent: NIL,
                prio: splitmix(&mut prio_state),
                size: 1,
                weight: u32::from(is_vertex),
            });
        }
        let mut forest = Self { nodes, vertices };
        if vertices == 0 {
            return forest;
        }

        let mut adj = vec![Vec::new(); vertices];
        for (e, &(u, v)) in edges.iter().enumerate() {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        // Iterative DFS emitting: vertex, then per child: arc down, subtour, arc up.
        let mut tour: Vec<u32> = Vec::with_capacity(forest.nodes.len());
        let mut visited = vec![false; vertices];
        for start in 0..vertices {
            if visited[start] {
                continue;
            }
            let mut root = NIL;
            visited[start] = true;
            tour.clear();
            tour.push(start as u32);
            let mut stack: Vec<(usize, usize, Option<u32>)> = vec![(start, 0, None)];
            while let Some(top) = stack.last_mut() {
                let (u, up_arc) = (top.0, top.2);
                if top.1 < adj[u].len() {
                    let (v, e) = adj[u][top.1];
                    top.1 += 1;
                    if visited[v] {
                        continue;
                    }
                    visited[v] = true;
                    let (down, up) = forest.arcs_from(e, edges, u);
                    tour.push(down);
                    tour.push(v as u32);
                    stack.push((v, 0, Some(up)));
                } else {
                    if let Some(up) = up_arc {
                        tour.push(up);
                    }
                    stack.pop();
                }
            }
            for &x in &tour {
                root = forest.merge(root, x);
            }
        }
        forest
    }

    fn arcs_from(&self, e: usize, edges: &[(usize, usize)], from: usize) -> (u32, u32) {
        let a = (self.vertices + 2 * e) as u32;
        if edges[e].0 == from {
            (a, a + 1)
        } else {
            (a + 1, a)
        }
    }

    fn arcs(&self, e: usize) -> (u32, u32) {
        let a = (self.vertices + 2 * e) as u32;
        (a, a + 1)
    }

    #[inline]
    fn size(&self, x: u32) -> u32 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].size
        }
    }

    #[inline]
    fn weight(&self, x: u32) -> u32 {
        if x == NIL {
            0
        } else {
            self.nodes[x as usize].weight
        }
    }

    #[inline]
    fn pull(&mut self, x: u32) {
        let (l, r) = (self.nodes[x as usize].left, self.nodes[x as usize].right);
        let own = u32::from((x as usize) < self.vertices);
        let size = 1 + self.size(l) + self.size(r);
        let weight = own + self.weight(l) + self.weight(r);
        let node = &mut self.nodes[x as usize];
        node.size = size;
        node.weight = weight;
    }

    #[inline]
    fn set_parent(&mut self, x: u32, p: u32) {
        if x != NIL {
            self.nodes[x as usize].parent = p;
        }
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            self.set_parent(b, NIL);
            return b;
        }
        if b == NIL {
            self.set_parent(a, NIL);
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            let r = self.nodes[a as usize].right;
            let m = self.merge(r, b);
            self.nodes[a as usize].right = m;
            self.set_parent(m, a);
            self.pull(a);
            self.set_parent(a, NIL);
            a
        } else {
            let l = self.nodes[b as usize].left;
            let m = self.merge(a, l);
            self.nodes[b as usize].left = m;
            self.set_parent(m, b);
            self.pull(b);
            self.set_parent(b, NIL);
            b
        }
    }

    /// Splits off the first `k` nodes of the sequence rooted at `t`.
    fn split(&mut self, t: u32, k: u32) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        let l = self.nodes[t as usize].left;
        let ls = self.size(l);
        if k <= ls {
            let (a, b) = self.split(l, k);
            self.nodes[t as usize].left = b;
            self.set_parent(b, t);
            self.pull(t);
            self.set_parent(t, NIL);
            self.set_parent(a, NIL);
            (a, t)
        } else {
            let r = self.nodes[t as usize].right;
            let (a, b) = self.split(r, k - ls - 1);
            self.nodes[t as usize].right = a;
            self.set_parent(a, t);
            self.pull(t);
            self.set_parent(t, NIL);
            self.set_parent(b, NIL);
            (t, b)
        }
    }

    fn root_of(&self, mut x: u32) -> u32 {
        while self.nodes[x as usize].parent != NIL {
            x = self.nodes[x as usize].parent;
        }
        x
    }

    fn index_of(&self, x: u32) -> u32 {
        let mut idx = self.size(self.nodes[x as usize].left);
        let mut cur = x;
        loop {
            let p = self.nodes[cur as usize].parent;
            if p == NIL {
                return idx;
            }
            if self.nodes[p as usize].right == cur {
                idx += self.size(self.nodes[p as usize].left) + 1;
            }
            cur = p;
        }
    }

    /// Rotates the tour containing vertex `v` so that it starts at `v`.
    fn reroot(&mut self, v: u32) -> u32 {
        let root = self.root_of(v);
        let k = self.index_of(v);
        let (a, b) = self.split(root, k);
        self.merge(b, a)
    }

    /// Removes edge `e`, splitting its tour in two.
    pub fn cut(&mut self, e: usize) {
        let (mut a, mut b) = self.arcs(e);
        let root = self.root_of(a);
        let (mut pa, mut pb) = (self.index_of(a), self.index_of(b));
        if pa > pb {
            std::mem::swap(&mut pa, &mut pb);
            std::mem::swap(&mut a, &mut b);
        }
        let (head, rest) = self.split(root, pa);
        let (_arc_a, rest) = self.split(rest, 1);
        let (_middle, rest) = self.split(rest, pb - pa - 1);
        let (_arc_b, tail) = self.split(rest, 1);
        self.merge(head, tail);
        debug_assert_eq!(self.size(a), 1);
        debug_assert_eq!(self.size(b), 1);
    }

    /// Re-inserts edge `e = (u, v)` between two distinct components.
    pub fn link(&mut self, e: usize, u: usize, v: usize) {
        let (a, b) = self.arcs(e);
        let tu = self.reroot(u as u32);
        let tv = self.reroot(v as u32);
        let left = self.merge(tu, a);
        let left = self.merge(left, tv);
        self.merge(left, b);
    }

    pub fn component_size(&self, v: usize) -> usize {
        self.weight(self.root_of(v as u32)) as usize
    }

    pub fn connected(&self, u: usize, v: usize) -> bool {
        self.root_of(u as u32) == self.root_of(v as u32)
    }

    /// Sizes of all components, in order of first appearance by vertex.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut sizes = Vec::new();
        for v in 0..self.vertices {
            let r = self.root_of(v as u32) as usize;
            if !seen[r] {
                seen[r] = true;
                sizes.push(self.nodes[r].weight as usize);
            }
        }
        sizes
    }
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
