//! Hypergraphs and the acyclicity toolbox: GYO-style safe-deletion
//! reduction, running-intersection orderings, join trees, primal-graph
//! chordality, Gilmore conformality, and extraction of minimal non-acyclic
//! cores C_n / H_n together with the safe-deletion script that reaches them.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A hypergraph on at most 64 named vertices. Edges are deduplicated at
/// construction (the edge collection is a set); every vertex must occur in
/// at least one edge, as it does for every schema.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    vertices: Vec<String>,
    edges: Vec<u64>,
}

/// Hypergraphs are pairs (V, E) with E a set: equality ignores the listing
/// order of vertices and edges.
impl PartialEq for Hypergraph {
    fn eq(&self, other: &Hypergraph) -> bool {
        let va: BTreeSet<&String> = self.vertices.iter().collect();
        let vb: BTreeSet<&String> = other.vertices.iter().collect();
        if va != vb {
            return false;
        }
        let sorted = |edges: Vec<Vec<String>>| -> BTreeSet<Vec<String>> {
            edges
                .into_iter()
                .map(|mut e| {
                    e.sort();
                    e
                })
                .collect()
        };
        sorted(self.edges_named()) == sorted(other.edges_named())
    }
}

impl Eq for Hypergraph {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SafeDeletionStep {
    Vertex { vertex: String },
    CoveredEdge { edge: Vec<String>, covering: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreKind {
    /// C_n: the length-n cycle, 2-uniform and 2-regular.
    Cycle,
    /// H_n: all (n-1)-subsets of n vertices, (n-1)-uniform and (n-1)-regular.
    Clique,
}

#[derive(Debug, Clone)]
pub enum AcyclicityVerdict {
    Acyclic {
        /// Running-intersection listing: edge indices in an order where
        /// each edge's intersection with the earlier union sits inside a
        /// single earlier edge.
        listing: Vec<usize>,
        /// Join tree/forest as a parent map over edge indices.
        join_tree: Vec<Option<usize>>,
    },
    Cyclic {
        core: CoreKind,
        n: usize,
        /// Vertex subset whose induced reduction is the core.
        w: Vec<String>,
        /// Safe-deletion script transforming H into R(H[W]).
        deletions: Vec<SafeDeletionStep>,
    },
}

#[derive(Debug, Clone)]
pub struct AcyclicityCertificate {
    pub verdict: AcyclicityVerdict,
}

#[derive(Debug, Clone)]
pub enum NonChordalWitness {
    Cycle(Vec<String>),
}

#[derive(Debug, Clone)]
pub enum NonConformalWitness {
    Clique(Vec<String>),
}

impl Hypergraph {
    pub fn new<I, E, S>(vertices: Vec<String>, edges: I) -> Result<Hypergraph>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if vertices.len() > 64 {
            return Err(Error::InvalidHypergraph("more than 64 vertices".into()));
        }
        let dedup: BTreeSet<&String> = vertices.iter().collect();
        if dedup.len() != vertices.len() {
            return Err(Error::InvalidHypergraph("duplicate vertex names".into()));
        }
        let mut masks: Vec<u64> = Vec::new();
        for edge in edges {
            let mut mask = 0u64;
            for v in edge {
                let v = v.as_ref();
                let i = vertices
                    .iter()
                    .position(|u| u == v)
                    .ok_or_else(|| Error::InvalidHypergraph(format!("unknown vertex `{v}`")))?;
                mask |= 1 << i;
            }
            if mask == 0 {
                return Err(Error::InvalidHypergraph("empty edge".into()));
            }
            if !masks.contains(&mask) {
                masks.push(mask);
            }
        }
        let covered = masks.iter().fold(0u64, |acc, m| acc | m);
        for (i, _) in vertices.iter().enumerate() {
            if covered & (1 << i) == 0 {
                return Err(Error::InvalidHypergraph(format!(
                    "vertex `{}` occurs in no edge",
                    vertices[i]
                )));
            }
        }
        Ok(Hypergraph {
            vertices,
            edges: masks,
        })
    }

    fn from_masks(vertices: Vec<String>, masks: Vec<u64>) -> Hypergraph {
        Hypergraph {
            vertices,
            edges: masks,
        }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_names(&self, idx: usize) -> Vec<String> {
        self.mask_names(self.edges[idx])
    }

    pub fn edges_named(&self) -> Vec<Vec<String>> {
        (0..self.edges.len()).map(|i| self.edge_names(i)).collect()
    }


    fn mask_names(&self, mask: u64) -> Vec<String> {
        (0..self.vertices.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.vertices[i].clone())
            .collect()
    }

    fn names_mask(&self, names: &[String]) -> Result<u64> {
        let mut mask = 0u64;
        for v in names {
            let i = self
                .vertices
                .iter()
                .position(|u| u == v)
                .ok_or_else(|| Error::InvalidHypergraph(format!("unknown vertex `{v}`")))?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    /// The reduction R(H): drops every edge strictly included in another.
    pub fn reduce(&self) -> Hypergraph {
        let kept: Vec<u64> = self
            .edges
            .iter()
            .filter(|&&e| {
                !self
                    .edges
                    .iter()
                    .any(|&f| f != e && e & f == e)
            })
            .copied()
            .collect();
        Hypergraph::from_masks(self.vertices.clone(), kept)
    }

    /// The induced hypergraph H[W] = (W, {X ∩ W} \ {∅}).
    pub fn induced(&self, w_names: &[String]) -> Result<Hypergraph> {
        if w_names.is_empty() {
            return Err(Error::InvalidHypergraph("induced set must be non-empty".into()));
        }
        let w = self.names_mask(w_names)?;
        self.induced_mask(w)
    }

    fn induced_mask(&self, w: u64) -> Result<Hypergraph> {
        let keep: Vec<usize> = (0..self.vertices.len())
            .filter(|i| w & (1 << i) != 0)
            .collect();
        let vertices: Vec<String> = keep.iter().map(|&i| self.vertices[i].clone()).collect();
        let remap = |mask: u64| -> u64 {
            let mut out = 0u64;
            for (new_i, &old_i) in keep.iter().enumerate() {
                if mask & (1 << old_i) != 0 {
                    out |= 1 << new_i;
                }
            }
            out
        };
        let mut masks = Vec::new();
        for &e in &self.edges {
            let m = remap(e & w);
            if m != 0 && !masks.contains(&m) {
                masks.push(m);
            }
        }
        Ok(Hypergraph::from_masks(vertices, masks))
    }

    /// Primal-graph adjacency: adj[i] has bit j set iff i and j share an edge.
    fn primal(&self) -> Vec<u64> {
        let n = self.vertices.len();
        let mut adj = vec![0u64; n];
        for &e in &self.edges {
            for i in 0..n {
                if e & (1 << i) != 0 {
                    adj[i] |= e & !(1 << i);
                }
            }
        }
        adj
    }

    /// Chordality of the primal graph, with a chordless cycle of length
    /// >= 4 when the answer is no.
    pub fn chordal(&self) -> (bool, Option<NonChordalWitness>) {
        let adj = self.primal();
        match find_chordless_cycle(&adj) {
            Some(cycle) => (
                false,
                Some(NonChordalWitness::Cycle(
                    cycle.into_iter().map(|i| self.vertices[i].clone()).collect(),
                )),
            ),
            None => (true, None),
        }
    }

    /// Gilmore's conformality test: every union of the pairwise
    /// intersections of three edges must sit inside some edge. When it
    /// fails, that union is an uncovered clique of the primal graph.
    pub fn conformal(&self) -> (bool, Option<NonConformalWitness>) {
        let m = self.edges.len();
        for a in 0..m {
            for b in (a + 1)..m {
                for c in (b + 1)..m {
                    let (ea, eb, ec) = (self.edges[a], self.edges[b], self.edges[c]);
                    let clique = (ea & eb) | (ea & ec) | (eb & ec);
                    if clique == 0 {
                        continue;
                    }
                    if !self.edges.iter().any(|&e| clique & e == clique) {
                        return (
                            false,
                            Some(NonConformalWitness::Clique(self.mask_names(clique))),
                        );
                    }
                }
            }
        }
        (true, None)
    }

    /// Both flags at once, as the cross-validation surface for Theorem 3.1.
    pub fn primal_chordal_conformal(
        &self,
    ) -> (bool, bool, Option<NonChordalWitness>, Option<NonConformalWitness>) {
        let (ch, chw) = self.chordal();
        let (co, cow) = self.conformal();
        (ch, co, chw, cow)
    }

    /// GYO-style iterated safe deletion. Returns the acyclic certificate
    /// (running-intersection listing + join tree) or the cyclic
    /// certificate (core kind, W, and the deletion script H -> R(H[W])).
    pub fn check_acyclic(&self) -> AcyclicityCertificate {
        if let Some((listing, join_tree)) = self.gyo() {
            return AcyclicityCertificate {
                verdict: AcyclicityVerdict::Acyclic { listing, join_tree },
            };
        }
        let (core, w) = self.find_core().expect("GYO failed, so a core exists");
        let w_names = self.mask_names(w);
        let deletions = self.deletion_script(w);
        let n = w_names.len();
        AcyclicityCertificate {
            verdict: AcyclicityVerdict::Cyclic {
                core,
                n,
                w: w_names,
                deletions,
            },
        }
    }

    /// Runs GYO; on success returns (running-intersection listing, parent
    /// map). Ties break on the lowest vertex/edge index.
    fn gyo(&self) -> Option<(Vec<usize>, Vec<Option<usize>>)> {
        let n = self.vertices.len();
        let m = self.edges.len();
        let mut cur: Vec<u64> = self.edges.clone();
        let mut alive: Vec<bool> = vec![true; m];
        let mut parent: Vec<Option<usize>> = vec![None; m];
        loop {
            let mut changed = false;
            // vertices in at most one alive edge disappear
            for v in 0..n {
                let bit = 1u64 << v;
                let holders: Vec<usize> = (0..m).filter(|&e| alive[e] && cur[e] & bit != 0).collect();
                if holders.len() == 1 {
                    cur[holders[0]] &= !bit;
                    changed = true;
                }
            }
            // covered edges attach to their cover in the join tree; equal
            // edges merge (the edge collection is a set), keeping the
            // lower index
            for e in 0..m {
                if !alive[e] {
                    continue;
                }
                for f in 0..m {
                    if f == e || !alive[f] {
                        continue;
                    }
                    let covered = cur[e] & cur[f] == cur[e];
                    let strictly = cur[e] != cur[f] || e > f;
                    if covered && strictly {
                        alive[e] = false;
                        parent[e] = Some(f);
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if alive.iter().filter(|a| **a).count() > 1 {
            return None;
        }
        // preorder traversal of the join forest gives a running-intersection
        // listing: each edge's earlier intersection lies inside its parent
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut roots: Vec<usize> = Vec::new();
        for e in 0..m {
            match parent[e] {
                Some(p) => children[p].push(e),
                None => roots.push(e),
            }
        }
        let mut listing = Vec::with_capacity(m);
        let mut stack: Vec<usize> = roots.into_iter().rev().collect();
        while let Some(e) = stack.pop() {
            listing.push(e);
            for &c in children[e].iter().rev() {
                stack.push(c);
            }
        }
        Some((listing, parent))
    }

    /// Finds a minimal vertex set whose induced reduction is a named core.
    /// Non-chordality is tried first, then non-conformality.
    fn find_core(&self) -> Option<(CoreKind, u64)> {
        let full: u64 = if self.vertices.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.vertices.len()) - 1
        };
        let not_chordal = |w: u64| -> bool {
            w != 0 && {
                let h = self.induced_mask(w).expect("vertex subset");
                !h.chordal().0
            }
        };
        let not_conformal = |w: u64| -> bool {
            w != 0 && {
                let h = self.induced_mask(w).expect("vertex subset");
                !h.conformal().0
            }
        };
        if not_chordal(full) {
            Some((CoreKind::Cycle, minimize(full, &not_chordal)))
        } else if not_conformal(full) {
            Some((CoreKind::Clique, minimize(full, &not_conformal)))
        } else {
            None
        }
    }

    /// The safe-deletion script H -> R(H[W]): vertex deletions for V \ W in
    /// index order, then covered-edge deletions.
    fn deletion_script(&self, w: u64) -> Vec<SafeDeletionStep> {
        let mut steps = Vec::new();
        let mut cur = self.clone();
        for i in 0..self.vertices.len() {
            if w & (1 << i) == 0 {
                steps.push(SafeDeletionStep::Vertex {
                    vertex: self.vertices[i].clone(),
                });
                let keep: Vec<String> = cur
                    .vertices
                    .iter()
                    .filter(|v| **v != self.vertices[i])
                    .cloned()
                    .collect();
                cur = cur.induced(&keep).expect("nonempty: W is nonempty");
            }
        }
        loop {
            let mut removed = None;
            'scan: for e in 0..cur.edges.len() {
                for f in 0..cur.edges.len() {
                    if e != f && cur.edges[e] & cur.edges[f] == cur.edges[e] && cur.edges[e] != cur.edges[f]
                    {
                        removed = Some((e, f));
                        break 'scan;
                    }
                }
            }
            match removed {
                Some((e, f)) => {
                    steps.push(SafeDeletionStep::CoveredEdge {
                        edge: cur.edge_names(e),
                        covering: cur.edge_names(f),
                    });
                    let mut masks = cur.edges.clone();
                    masks.remove(e);
                    cur = Hypergraph::from_masks(cur.vertices.clone(), masks);
                }
                None => break,
            }
        }
        steps
    }

    /// Replays a safe-deletion script, for certificate validation.
    pub fn replay(&self, steps: &[SafeDeletionStep]) -> Result<Hypergraph> {
        let mut cur = self.clone();
        for step in steps {
            match step {
                SafeDeletionStep::Vertex { vertex } => {
                    let keep: Vec<String> = cur
                        .vertices
                        .iter()
                        .filter(|v| *v != vertex)
                        .cloned()
                        .collect();
                    if keep.len() == cur.vertices.len() {
                        return Err(Error::InvalidHypergraph(format!(
                            "script deletes unknown vertex `{vertex}`"
                        )));
                    }
                    cur = cur.induced(&keep)?;
                }
                SafeDeletionStep::CoveredEdge { edge, covering } => {
                    let em = cur.names_mask(edge)?;
                    let fm = cur.names_mask(covering)?;
                    if em & fm != em || em == fm {
                        return Err(Error::InvalidHypergraph(
                            "script deletes an edge that is not strictly covered".into(),
                        ));
                    }
                    let pos = cur
                        .edges
                        .iter()
                        .position(|&m| m == em)
                        .ok_or_else(|| Error::InvalidHypergraph("script deletes a missing edge".into()))?;
                    if !cur.edges.contains(&fm) {
                        return Err(Error::InvalidHypergraph("covering edge is missing".into()));
                    }
                    let mut masks = cur.edges.clone();
                    masks.remove(pos);
                    cur = Hypergraph::from_masks(cur.vertices.clone(), masks);
                }
            }
        }
        Ok(cur)
    }

    /// Degree-sequence + rotation matching against the rigid families:
    /// is this hypergraph exactly a C_n cycle or an H_n clique complement?
    pub fn is_named_core(&self, kind: CoreKind, n: usize) -> bool {
        let nv = self.vertices.len();
        if nv != n || self.edges.len() != n {
            return false;
        }
        match kind {
            CoreKind::Cycle => {
                if n < 3 || self.edges.iter().any(|e| e.count_ones() != 2) {
                    return false;
                }
                // every vertex in exactly 2 edges, single cycle covering all
                let mut deg = vec![0usize; nv];
                for &e in &self.edges {
                    for i in 0..nv {
                        if e & (1 << i) != 0 {
                            deg[i] += 1;
                        }
                    }
                }
                if deg.iter().any(|&d| d != 2) {
                    return false;
                }
                // walk the cycle
                let adj = self.primal();
                let mut seen = vec![false; nv];
                let mut at = 0usize;
                let mut prev = usize::MAX;
                for _ in 0..nv {
                    seen[at] = true;
                    let next = (0..nv)
                        .find(|&j| adj[at] & (1 << j) != 0 && j != prev && !seen[j])
                        .or_else(|| (0..nv).find(|&j| adj[at] & (1 << j) != 0 && j != prev));
                    match next {
                        Some(j) => {
                            prev = at;
                            at = j;
                        }
                        None => return false,
                    }
                }
                seen.iter().all(|&s| s) && at == 0
            }
            CoreKind::Clique => {
                if n < 3 {
                    return false;
                }
                let full: u64 = (1u64 << nv) - 1;
                let expected: BTreeSet<u64> = (0..nv).map(|i| full & !(1 << i)).collect();
                let actual: BTreeSet<u64> = self.edges.iter().copied().collect();
                expected == actual
            }
        }
    }

    /// Validates a running-intersection listing directly.
    pub fn listing_is_running_intersection(&self, listing: &[usize]) -> bool {
        if listing.len() != self.edges.len() {
            return false;
        }
        let mut seen: Vec<u64> = Vec::new();
        for (pos, &e) in listing.iter().enumerate() {
            let union_before = seen.iter().fold(0u64, |acc, m| acc | m);
            let inter = self.edges[e] & union_before;
            if pos > 0 && inter != 0 && !seen.iter().any(|&m| inter & m == inter) {
                return false;
            }
            seen.push(self.edges[e]);
        }
        true
    }

    /// Validates the connected-subtree condition of a join tree/forest.
    pub fn join_tree_is_valid(&self, parent: &[Option<usize>]) -> bool {
        let m = self.edges.len();
        if parent.len() != m {
            return false;
        }
        // no cycles in the parent map
        for start in 0..m {
            let mut hops = 0;
            let mut at = start;
            while let Some(p) = parent[at] {
                at = p;
                hops += 1;
                if hops > m {
                    return false;
                }
            }
        }
        // the edges holding a vertex form a connected subtree iff exactly
        // one of them has its parent outside the holder set
        for v in 0..self.vertices.len() {
            let bit = 1u64 << v;
            let holders: Vec<usize> = (0..m).filter(|&e| self.edges[e] & bit != 0).collect();
            if holders.len() <= 1 {
                continue;
            }
            let holder_set: BTreeSet<usize> = holders.iter().copied().collect();
            let tops = holders
                .iter()
                .filter(|&&h| match parent[h] {
                    Some(p) => !holder_set.contains(&p),
                    None => true,
                })
                .count();
            if tops != 1 {
                return false;
            }
        }
        true
    }
}

/// Shrinks `w` greedily: repeatedly drop the lowest-index vertex whose
/// removal keeps `bad` true.
fn minimize(mut w: u64, bad: &dyn Fn(u64) -> bool) -> u64 {
    loop {
        let mut shrunk = false;
        for i in 0..64 {
            let bit = 1u64 << i;
            if w & bit != 0 && bad(w & !bit) {
                w &= !bit;
                shrunk = true;
                break;
            }
        }
        if !shrunk {
            return w;
        }
    }
}

/// Finds a chordless cycle of length >= 4 in an adjacency-bitmask graph,
/// if one exists: for a vertex v with non-adjacent neighbors x, y, a
/// shortest x–y path avoiding N[v] \ {x,y} closes such a cycle through v.
fn find_chordless_cycle(adj: &[u64]) -> Option<Vec<usize>> {
    let n = adj.len();
    for v in 0..n {
        for x in 0..n {
            if adj[v] & (1 << x) == 0 {
                continue;
            }
            for y in (x + 1)..n {
                if adj[v] & (1 << y) == 0 || adj[x] & (1 << y) != 0 {
                    continue;
                }
                let forbidden = (adj[v] | (1 << v)) & !(1 << x) & !(1 << y);
                if let Some(path) = shortest_path(adj, x, y, forbidden) {
                    let mut cycle = vec![v];
                    cycle.extend(path);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

fn shortest_path(adj: &[u64], from: usize, to: usize, forbidden: u64) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut prev = vec![usize::MAX; n];
    let mut seen = forbidden | (1u64 << from);
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    while let Some(at) = queue.pop_front() {
        if at == to {
            let mut path = vec![to];
            let mut cur = to;
            while prev[cur] != usize::MAX {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for j in 0..n {
            if adj[at] & (1 << j) != 0 && seen & (1 << j) == 0 {
                seen |= 1 << j;
                prev[j] = at;
                queue.push_back(j);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedKind {
    Path,
    Cycle,
    Clique,
}

/// The named families P_n, C_n, H_n on vertices A1..An.
pub fn make_named(kind: NamedKind, n: usize) -> Result<Hypergraph> {
    let min = match kind {
        NamedKind::Path => 2,
        NamedKind::Cycle | NamedKind::Clique => 3,
    };
    if n < min {
        return Err(Error::InvalidHypergraph(format!(
            "{kind:?} family needs n >= {min}, got {n}"
        )));
    }
    let vertices: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
    let edges: Vec<Vec<String>> = match kind {
        NamedKind::Path => (0..n - 1)
            .map(|i| vec![vertices[i].clone(), vertices[i + 1].clone()])
            .collect(),
        NamedKind::Cycle => (0..n)
            .map(|i| vec![vertices[i].clone(), vertices[(i + 1) % n].clone()])
            .collect(),
        NamedKind::Clique => (0..n)
            .map(|skip| {
                vertices
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != skip)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect(),
    };
    Hypergraph::new(vertices, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(kind: NamedKind, n: usize) -> Hypergraph {
        make_named(kind, n).unwrap()
    }

    #[test]
    fn reduce_drops_covered_edges() {
        let h = Hypergraph::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![vec!["A", "B"], vec!["A", "B", "C"]],
        )
        .unwrap();
        let r = h.reduce();
        assert_eq!(r.edge_count(), 1);
        assert_eq!(r.edge_names(0), vec!["A", "B", "C"]);
        // an already reduced hypergraph is a fixed point
        assert_eq!(r.reduce(), r);
        let c3 = named(NamedKind::Cycle, 3);
        assert_eq!(c3.reduce(), c3);
    }

    #[test]
    fn induced_on_cycle() {
        let c4 = named(NamedKind::Cycle, 4);
        let h = c4
            .induced(&["A1".into(), "A2".into(), "A3".into()])
            .unwrap();
        // edges A1A2, A2A3 survive whole; A3A4 and A4A1 shrink to singletons
        let mut edges = h.edges_named();
        edges.sort();
        assert_eq!(
            edges,
            vec![
                vec!["A1".to_string()],
                vec!["A1".to_string(), "A2".to_string()],
                vec!["A2".to_string(), "A3".to_string()],
                vec!["A3".to_string()],
            ]
        );
        assert_eq!(c4.induced(&c4.vertices().to_vec()).unwrap(), c4);
    }

    #[test]
    fn named_families_have_expected_shapes() {
        let c3 = named(NamedKind::Cycle, 3);
        let h3 = named(NamedKind::Clique, 3);
        assert_eq!(c3, h3, "C_3 = H_3");
        let p2 = named(NamedKind::Path, 2);
        assert_eq!(p2.edge_count(), 1);
        assert!(make_named(NamedKind::Cycle, 2).is_err());
    }

    #[test]
    fn chordal_conformal_flags_match_the_named_families() {
        let c4 = named(NamedKind::Cycle, 4);
        let (ch, co, chw, _) = c4.primal_chordal_conformal();
        assert!(!ch && co, "C_4 is conformal but not chordal");
        match chw {
            Some(NonChordalWitness::Cycle(cycle)) => {
                assert_eq!(cycle, vec!["A1", "A2", "A3", "A4"]);
            }
            None => panic!("expected a chordless cycle"),
        }

        let h4 = named(NamedKind::Clique, 4);
        let (ch, co, _, cow) = h4.primal_chordal_conformal();
        assert!(ch && !co, "H_4 is chordal but not conformal");
        match cow {
            Some(NonConformalWitness::Clique(clique)) => {
                assert_eq!(clique, vec!["A1", "A2", "A3", "A4"]);
            }
            None => panic!("expected an uncovered clique"),
        }

        let p5 = named(NamedKind::Path, 5);
        let (ch, co, _, _) = p5.primal_chordal_conformal();
        assert!(ch && co);

        let c3 = named(NamedKind::Cycle, 3);
        let (ch, co, _, _) = c3.primal_chordal_conformal();
        assert!(ch && !co, "C_3 = H_3 is chordal but not conformal");
    }

    #[test]
    fn paths_are_acyclic_with_path_order() {
        for n in 2..=6 {
            let p = named(NamedKind::Path, n);
            match p.check_acyclic().verdict {
                AcyclicityVerdict::Acyclic { listing, join_tree } => {
                    assert!(p.listing_is_running_intersection(&listing));
                    assert!(p.join_tree_is_valid(&join_tree));
                }
                AcyclicityVerdict::Cyclic { .. } => panic!("P_{n} is acyclic"),
            }
        }
    }

    #[test]
    fn cycles_and_cliques_yield_cores() {
        for n in 3..=6 {
            let c = named(NamedKind::Cycle, n);
            match c.check_acyclic().verdict {
                AcyclicityVerdict::Cyclic {
                    core,
                    n: size,
                    w,
                    deletions,
                } => {
                    if n == 3 {
                        assert_eq!(core, CoreKind::Clique, "C_3 core is H_3");
                    } else {
                        assert_eq!(core, CoreKind::Cycle);
                    }
                    assert_eq!(size, n);
                    assert_eq!(w.len(), n);
                    let reached = c.replay(&deletions).unwrap();
                    assert!(reached.is_named_core(core, size));
                    let reduced = c.induced(&w).unwrap().reduce();
                    assert_eq!(reached, reduced);
                }
                AcyclicityVerdict::Acyclic { .. } => panic!("C_{n} is cyclic"),
            }
        }
        for n in 4..=6 {
            let h = named(NamedKind::Clique, n);
            match h.check_acyclic().verdict {
                AcyclicityVerdict::Cyclic { core, n: size, .. } => {
                    assert_eq!(core, CoreKind::Clique);
                    assert_eq!(size, n);
                }
                AcyclicityVerdict::Acyclic { .. } => panic!("H_{n} is cyclic"),
            }
        }
    }

    #[test]
    fn uniform_regular_shapes() {
        // C_n is 2-uniform 2-regular; H_n is (n-1)-uniform (n-1)-regular
        for n in 3..=6 {
            let c = named(NamedKind::Cycle, n);
            assert!(c.edges_named().iter().all(|e| e.len() == 2));
            let h = named(NamedKind::Clique, n);
            assert!(h.edges_named().iter().all(|e| e.len() == n - 1));
            for v in h.vertices() {
                let deg = h
                    .edges_named()
                    .iter()
                    .filter(|e| e.contains(v))
                    .count();
                assert_eq!(deg, n - 1);
            }
        }
    }

    #[test]
    fn isolated_vertices_rejected() {
        assert!(Hypergraph::new(
            vec!["A".into(), "B".into()],
            vec![vec!["A"]],
        )
        .is_err());
    }
}
