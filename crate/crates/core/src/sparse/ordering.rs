//! Fill-reducing symmetric orderings by nested dissection.
//!
//! Orderings are returned as `perm` with `perm[k]` the original index eliminated at
//! step `k`. Leaves of the dissection tree keep their natural order.

use std::collections::VecDeque;

use crate::scalar::Real;

use super::csr::CsrMatrix;

const LEAF_SIZE: usize = 48;

/// Strategy used to order unknowns before factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingKind {
    Natural,
    /// Level-structure separators on the matrix graph.
    GraphDissection,
    /// Median cuts on dof coordinates, refined to a vertex separator on the graph.
    CoordinateDissection,
}

/// Adjacency of the symmetrized pattern of a square matrix, without self loops.
#[derive(Debug, Clone)]
pub struct Graph {
    pub xadj: Vec<usize>,
    pub adj: Vec<u32>,
}

impl Graph {
    pub fn from_pattern<T: Real>(a: &CsrMatrix<T>) -> Self {
        let n = a.nrows;
        let mut deg = vec![0usize; n + 1];
        for i in 0..n {
            for p in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[p];
                if j != i {
                    deg[i + 1] += 1;
                    deg[j + 1] += 1;
                }
            }
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut adj = vec![0u32; deg[n]];
        for i in 0..n {
            for p in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[p];
                if j != i {
                    adj[fill[i]] = j as u32;
                    fill[i] += 1;
                    adj[fill[j]] = i as u32;
                    fill[j] += 1;
                }
            }
        }
        // Drop duplicates from the symmetrization.
        let mut xadj = vec![0usize; n + 1];
        let mut out = Vec::with_capacity(adj.len() / 2 + n);
        for i in 0..n {
            let row = &mut adj[deg[i]..deg[i + 1]];
            row.sort_unstable();
            let mut prev = u32::MAX;
            for &j in row.iter() {
                if j != prev {
                    out.push(j);
                    prev = j;
                }
            }
            xadj[i + 1] = out.len();
        }
        Graph { xadj, adj: out }
    }

    pub fn len(&self) -> usize {
        self.xadj.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[self.xadj[i]..self.xadj[i + 1]].iter().map(|&j| j as usize)
    }
}

/// Computes an elimination order for the given strategy. `coords` is required for
/// coordinate dissection and ignored otherwise; it falls back to graph dissection
/// when absent.
pub fn compute_ordering(graph: &Graph, kind: OrderingKind, coords: Option<&[[f64; 2]]>) -> Vec<usize> {
    let n = graph.len();
    match (kind, coords) {
        (OrderingKind::Natural, _) => (0..n).collect(),
        (OrderingKind::CoordinateDissection, Some(c)) => {
            assert_eq!(c.len(), n, "one coordinate per unknown");
            Dissector::new(graph).run(|d, nodes| d.coordinate_split(nodes, c))
        }
        _ => Dissector::new(graph).run(|d, nodes| d.level_split(nodes)),
    }
}

/// Result of one bisection: two independent parts and the separator between them.
struct Split {
    left: Vec<usize>,
    right: Vec<usize>,
    sep: Vec<usize>,
}

struct Dissector<'g> {
    graph: &'g Graph,
    /// Label of the subproblem a node currently belongs to.
    owner: Vec<u32>,
    next_label: u32,
    side: Vec<u8>,
    level: Vec<u32>,
}

impl<'g> Dissector<'g> {
    fn new(graph: &'g Graph) -> Self {
        let n = graph.len();
        Dissector { graph, owner: vec![0; n], next_label: 1, side: vec![0; n], level: vec![u32::MAX; n] }
    }

    fn run(mut self, mut split: impl FnMut(&mut Self, &[usize]) -> Option<Split>) -> Vec<usize> {
        let n = self.graph.len();
        let mut perm = Vec::with_capacity(n);
        // Explicit stack: `Nodes` to dissect, or `Emit` a finished separator.
        enum Task {
            Nodes(Vec<usize>, u32),
            Emit(Vec<usize>),
        }
        let mut stack = vec![Task::Nodes((0..n).collect(), 0)];
        while let Some(task) = stack.pop() {
            match task {
                Task::Emit(sep) => perm.extend(sep),
                Task::Nodes(nodes, label) => {
                    for &v in &nodes {
                        self.owner[v] = label;
                    }
                    if nodes.len() <= LEAF_SIZE {
                        perm.extend(nodes);
                        continue;
                    }
                    match split(&mut self, &nodes) {
                        Some(s) if !s.left.is_empty() && !s.right.is_empty() => {
                            let (l1, l2) = (self.next_label, self.next_label + 1);
                            self.next_label += 2;
                            stack.push(Task::Emit(s.sep));
                            stack.push(Task::Nodes(s.right, l2));
                            stack.push(Task::Nodes(s.left, l1));
                        }
                        _ => perm.extend(nodes),
                    }
                }
            }
        }
        debug_assert_eq!(perm.len(), n);
        perm
    }

    /// Splits at a coordinate cut near the median along the longer axis. Nodes on the
    /// low side with a neighbour on the high side form the separator.
    fn coordinate_split(&mut self, nodes: &[usize], coords: &[[f64; 2]]) -> Option<Split> {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for &v in nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(coords[v][d]);
                hi[d] = hi[d].max(coords[v][d]);
            }
        }
        let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
        let mut vals: Vec<f64> = nodes.iter().map(|&v| coords[v][axis]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        if vals.len() < 2 {
            return None;
        }
        let mid = vals.len() / 2;
        let label = self.owner[nodes[0]];
        let mut best: Option<Split> = None;
        let window = (vals.len() / 8).clamp(1, 3);
        for idx in mid.saturating_sub(window)..=(mid + window).min(vals.len() - 1) {
            if idx == 0 {
                continue;
            }
            // Cut between vals[idx-1] and vals[idx]: high side is >= vals[idx].
            let cut = vals[idx] - 1e-9 * (1.0 + vals[idx].abs());
            for &v in nodes {
                self.side[v] = if coords[v][axis] >= cut { 2 } else { 1 };
            }
            let s = self.separate(nodes, label);
            let better = match &best {
                None => true,
                Some(b) => {
                    let imbalance = |s: &Split| s.left.len().abs_diff(s.right.len());
                    (s.sep.len(), imbalance(&s)) < (b.sep.len(), imbalance(b))
                }
            };
            if better {
                best = Some(s);
            }
        }
        for &v in nodes {
            self.side[v] = 0;
        }
        best
    }

    /// Splits at the middle level of a breadth-first level structure rooted at a
    /// pseudo-peripheral node. Disconnected pieces are split off first.
    fn level_split(&mut self, nodes: &[usize]) -> Option<Split> {
        let label = self.owner[nodes[0]];
        let (order, depth) = self.rooted_levels(nodes[0], label);
        if order.len() < nodes.len() {
            for &v in nodes {
                self.side[v] = 2;
            }
            for &v in &order {
                self.side[v] = 1;
            }
            let s = self.separate(nodes, label);
            self.reset(nodes);
            return Some(s);
        }
        if depth < 2 {
            self.reset(nodes);
            return None;
        }
        let mut counts = vec![0usize; depth as usize + 1];
        for &v in &order {
            counts[self.level[v] as usize] += 1;
        }
        let half = order.len() / 2;
        let mut acc = 0;
        let mut cut = 1;
        for (l, &c) in counts.iter().enumerate() {
            acc += c;
            if acc >= half {
                cut = l.max(1);
                break;
            }
        }
        for &v in nodes {
            self.side[v] = if self.level[v] as usize >= cut { 2 } else { 1 };
        }
        let s = self.separate(nodes, label);
        self.reset(nodes);
        Some(s)
    }

    fn reset(&mut self, nodes: &[usize]) {
        for &v in nodes {
            self.side[v] = 0;
            self.level[v] = u32::MAX;
        }
    }

    fn clear_levels(&mut self, order: &[usize]) {
        for &v in order {
            self.level[v] = u32::MAX;
        }
    }

    /// Breadth-first levels inside subproblem `label`; levels stay set on return.
    fn bfs(&mut self, root: usize, label: u32) -> (Vec<usize>, u32) {
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        self.level[root] = 0;
        queue.push_back(root);
        let mut depth = 0;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let lv = self.level[v];
            depth = depth.max(lv);
            for w in self.graph.neighbors(v) {
                if self.owner[w] == label && self.level[w] == u32::MAX {
                    self.level[w] = lv + 1;
                    queue.push_back(w);
                }
            }
        }
        (order, depth)
    }

    /// Level structure from a pseudo-peripheral root of the component containing `seed`.
    fn rooted_levels(&mut self, seed: usize, label: u32) -> (Vec<usize>, u32) {
        let (order, _) = self.bfs(seed, label);
        let mut root = *order.last().unwrap();
        self.clear_levels(&order);
        let (mut order, mut depth) = self.bfs(root, label);
        for _ in 0..4 {
            let far = *order.last().unwrap();
            self.clear_levels(&order);
            let (o, d) = self.bfs(far, label);
            if d > depth {
                root = far;
                order = o;
                depth = d;
            } else {
                self.clear_levels(&o);
                let r = self.bfs(root, label);
                order = r.0;
                depth = r.1;
                break;
            }
        }
        (order, depth)
    }

    /// Given sides 1/2 on `nodes`, moves side-1 nodes adjacent to side 2 into the separator.
    fn separate(&self, nodes: &[usize], label: u32) -> Split {
        let mut split = Split { left: Vec::new(), right: Vec::new(), sep: Vec::new() };
        for &v in nodes {
            if self.side[v] == 2 {
                split.right.push(v);
            } else if self.graph.neighbors(v).any(|w| self.owner[w] == label && self.side[w] == 2) {
                split.sep.push(v);
            } else {
                split.left.push(v);
            }
        }
        split
    }
}

/// Moves every vertex flagged in `delayed` to just after the last of its unflagged
/// neighbours in `perm`, keeping the relative order otherwise.
///
/// Saddle-point unknowns whose diagonal is tiny are then eliminated only once their
/// coupled primal unknowns are, so diagonal pivots stay usable.
pub fn delay_after(graph: &Graph, perm: &[usize], delayed: &[bool]) -> Vec<usize> {
    let pos = invert(perm);
    let mut keyed: Vec<(usize, usize)> = perm
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if !delayed[v] {
                return (2 * k, v);
            }
            let last = graph.neighbors(v).filter(|&w| !delayed[w]).map(|w| pos[w]).max();
            match last {
                Some(m) if m > k => (2 * m + 1, v),
                _ => (2 * k, v),
            }
        })
        .collect();
    keyed.sort_by_key(|&(key, _)| key);
    keyed.into_iter().map(|(_, v)| v).collect()
}

/// Inverse of a permutation.
pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_laplacian(n: usize) -> (CsrMatrix<f64>, Vec<[f64; 2]>) {
        let id = |i: usize, j: usize| i * n + j;
        let mut t = Vec::new();
        let mut coords = Vec::new();
        for i in 0..n {
            for j in 0..n {
                coords.push([j as f64, i as f64]);
                t.push((id(i, j), id(i, j), 4.0));
                if j + 1 < n {
                    t.push((id(i, j), id(i, j + 1), -1.0));
                    t.push((id(i, j + 1), id(i, j), -1.0));
                }
                if i + 1 < n {
                    t.push((id(i, j), id(i + 1, j), -1.0));
                    t.push((id(i + 1, j), id(i, j), -1.0));
                }
            }
        }
        (CsrMatrix::from_triplets(n * n, n * n, t), coords)
    }

    fn is_permutation(p: &[usize]) -> bool {
        let mut seen = vec![false; p.len()];
        p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
    }

    #[test]
    fn orderings_are_permutations() {
        let (a, c) = grid_laplacian(30);
        let g = Graph::from_pattern(&a);
        for kind in [OrderingKind::Natural, OrderingKind::GraphDissection, OrderingKind::CoordinateDissection] {
            let p = compute_ordering(&g, kind, Some(&c));
            assert!(is_permutation(&p), "{kind:?}");
        }
    }

    #[test]
    fn graph_has_no_self_loops_or_duplicates() {
        let (a, _) = grid_laplacian(5);
        let g = Graph::from_pattern(&a);
        for i in 0..g.len() {
            let nb: Vec<usize> = g.neighbors(i).collect();
            assert!(!nb.contains(&i));
            assert!(nb.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(g.neighbors(12).count(), 4);
    }

    #[test]
    fn delayed_vertices_follow_their_neighbours() {
        let (a, c) = grid_laplacian(12);
        let g = Graph::from_pattern(&a);
        let p = compute_ordering(&g, OrderingKind::GraphDissection, Some(&c));
        let delayed: Vec<bool> = (0..144).map(|i| i % 5 == 0).collect();
        let d = delay_after(&g, &p, &delayed);
        assert!(is_permutation(&d));
        let pos = invert(&d);
        for v in (0..144).filter(|&v| delayed[v]) {
            for w in g.neighbors(v).filter(|&w| !delayed[w]) {
                assert!(pos[w] < pos[v]);
            }
        }
    }

    #[test]
    fn disconnected_graph_is_handled() {
        let mut t = Vec::new();
        for i in 0..200 {
            t.push((i, i, 1.0));
            if i % 100 != 99 {
                t.push((i, i + 1, 1.0));
            }
        }
        let a = CsrMatrix::from_triplets(200, 200, t);
        let g = Graph::from_pattern(&a);
        let p = compute_ordering(&g, OrderingKind::GraphDissection, None);
        assert!(is_permutation(&p));
    }
}
