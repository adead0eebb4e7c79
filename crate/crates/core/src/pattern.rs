//! Pattern graphs on a finite index set.
//!
//! A [`Pattern`] is a symmetric reflexive relation on `{0, …, n-1}`: the set
//! of index pairs on which a partially defined multiplier is specified.
//! Chordality decides whether positive completion can be done clique by
//! clique, so this module also carries maximum cardinality search, clique
//! trees, fill-in and the one-entry-at-a-time completion order.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("index set is empty")]
    Empty,
    #[error("pair ({x}, {y}) out of range for n = {n}")]
    IndexOutOfRange { x: usize, y: usize, n: usize },
    #[error("{}", describe_domain(.missing_diagonal, .asymmetric))]
    Domain {
        missing_diagonal: Vec<usize>,
        /// Mirror pairs that are absent, i.e. `(y, x)` for a listed `(x, y)`.
        asymmetric: Vec<(usize, usize)>,
    },
    #[error("pattern is not chordal (chordless cycle {cycle:?})")]
    NotChordal { cycle: Vec<usize> },
}

fn describe_domain(missing_diagonal: &[usize], asymmetric: &[(usize, usize)]) -> String {
    let mut parts = Vec::new();
    if !missing_diagonal.is_empty() {
        parts.push(format!("missing diagonal points {missing_diagonal:?}"));
    }
    if !asymmetric.is_empty() {
        parts.push(format!("missing mirror pairs {asymmetric:?}"));
    }
    format!("not a positivity domain: {}", parts.join("; "))
}

/// Symmetric reflexive pattern on `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    n: usize,
    // Off-diagonal neighbours; the diagonal is implicit.
    adj: Vec<BTreeSet<usize>>,
}

/// Checks raw input pairs without repairing them.
pub fn validate_positivity_domain(n: usize, raw_pairs: &[(usize, usize)]) -> Result<Pattern, PatternError> {
    if n == 0 {
        return Err(PatternError::Empty);
    }
    let mut set = BTreeSet::new();
    for &(x, y) in raw_pairs {
        if x >= n || y >= n {
            return Err(PatternError::IndexOutOfRange { x, y, n });
        }
        set.insert((x, y));
    }
    let missing_diagonal: Vec<usize> = (0..n).filter(|&x| !set.contains(&(x, x))).collect();
    let asymmetric: Vec<(usize, usize)> = set
        .iter()
        .filter(|&&(x, y)| !set.contains(&(y, x)))
        .map(|&(x, y)| (y, x))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !missing_diagonal.is_empty() || !asymmetric.is_empty() {
        return Err(PatternError::Domain {
            missing_diagonal,
            asymmetric,
        });
    }
    let mut adj = vec![BTreeSet::new(); n];
    for (x, y) in set {
        if x != y {
            adj[x].insert(y);
        }
    }
    Ok(Pattern { n, adj })
}

impl Pattern {
    /// Diagonal-only pattern.
    pub fn diagonal(n: usize) -> Self {
        Self {
            n,
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            adj: (0..n).map(|x| (0..n).filter(|&y| y != x).collect()).collect(),
        }
    }

    /// Builds a pattern from undirected edges; the diagonal and mirrors are added.
    ///
    /// Panics on out-of-range indices. Use [`validate_positivity_domain`] for
    /// untrusted input.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut p = Self::diagonal(n);
        for &(x, y) in edges {
            assert!(x < n && y < n, "edge ({x}, {y}) out of range for n = {n}");
            if x != y {
                p.adj[x].insert(y);
                p.adj[y].insert(x);
            }
        }
        p
    }

    /// Path `0 - 1 - … - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges)
    }

    /// Cycle `0 - 1 - … - (n-1) - 0`.
    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.n && y < self.n && (x == y || self.adj[x].contains(&y))
    }

    pub fn neighbors(&self, x: usize) -> &BTreeSet<usize> {
        &self.adj[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adj[x].len()
    }

    /// All ordered pairs, diagonal included, in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n {
            let mut row: Vec<usize> = self.adj[x].iter().copied().collect();
            row.push(x);
            row.sort_unstable();
            out.extend(row.into_iter().map(|y| (x, y)));
        }
        out
    }

    /// Off-diagonal pairs with `x < y`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|x| self.adj[x].range(x + 1..).map(move |&y| (x, y)))
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_full(&self) -> bool {
        self.adj.iter().all(|a| a.len() + 1 == self.n)
    }

    /// Pairs `(x, y)` with `x < y` outside the pattern.
    pub fn missing_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in (x + 1)..self.n {
                if !self.adj[x].contains(&y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn with_edge(&self, x: usize, y: usize) -> Self {
        let mut p = self.clone();
        if x != y {
            p.adj[x].insert(y);
            p.adj[y].insert(x);
        }
        p
    }

    pub fn is_subpattern_of(&self, other: &Pattern) -> bool {
        self.n == other.n && (0..self.n).all(|x| self.adj[x].is_subset(&other.adj[x]))
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(i, &a)| vertices[i + 1..].iter().all(|&b| self.contains(a, b)))
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern(n = {}, edges = {:?})", self.n, self.edges())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Chordality {
    /// A perfect elimination ordering, first eliminated vertex first.
    Chordal { order: Vec<usize> },
    /// A chordless cycle of length at least four, in traversal order.
    NotChordal { cycle: Vec<usize> },
}

impl Chordality {
    pub fn is_chordal(&self) -> bool {
        matches!(self, Chordality::Chordal { .. })
    }
}

/// Maximum cardinality search visit order; ties go to the lowest index.
fn mcs_visit_order(p: &Pattern) -> Vec<usize> {
    let n = p.n;
    let mut weight = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = usize::MAX;
        for v in 0..n {
            if !visited[v] && (best == usize::MAX || weight[v] > weight[best]) {
                best = v;
            }
        }
        visited[best] = true;
        order.push(best);
        for &w in &p.adj[best] {
            if !visited[w] {
                weight[w] += 1;
            }
        }
    }
    order
}

/// Whether every vertex's later neighbours form a clique.
pub fn is_perfect_elimination_ordering(p: &Pattern, order: &[usize]) -> bool {
    if order.len() != p.n {
        return false;
    }
    let mut pos = vec![usize::MAX; p.n];
    for (i, &v) in order.iter().enumerate() {
        if v >= p.n || pos[v] != usize::MAX {
            return false;
        }
        pos[v] = i;
    }
    order.iter().all(|&v| {
        let later: Vec<usize> = p.adj[v].iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        p.is_clique(&later)
    })
}

pub fn is_chordal(p: &Pattern) -> Chordality {
    let mut order = mcs_visit_order(p);
    order.reverse();
    if is_perfect_elimination_ordering(p, &order) {
        Chordality::Chordal { order }
    } else {
        Chordality::NotChordal {
            cycle: find_chordless_cycle(p).expect("MCS order failed, so a chordless cycle exists"),
        }
    }
}

/// Searches for a chordless cycle `v, a, …, b` through two non-adjacent
/// neighbours `a, b` of `v`, closing it with a shortest `a → b` path that
/// avoids the rest of `v`'s closed neighbourhood.
fn find_chordless_cycle(p: &Pattern) -> Option<Vec<usize>> {
    for v in 0..p.n {
        let nbrs: Vec<usize> = p.adj[v].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if p.contains(a, b) {
                    continue;
                }
                let mut blocked = vec![false; p.n];
                blocked[v] = true;
                for &w in &nbrs {
                    if w != a && w != b {
                        blocked[w] = true;
                    }
                }
                if let Some(path) = shortest_path(p, a, b, &blocked) {
                    let mut cycle = vec![v];
                    cycle.extend(path);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

fn shortest_path(p: &Pattern, from: usize, to: usize, blocked: &[bool]) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; p.n];
    let mut seen = vec![false; p.n];
    let mut queue = std::collections::VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &p.adj[u] {
            if !seen[w] && !blocked[w] {
                seen[w] = true;
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Maximal cliques of a chordal pattern joined by a tree with the running
/// intersection property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueTree {
    /// Sorted vertex lists, in lexicographic order.
    pub cliques: Vec<Vec<usize>>,
    /// Pairs of clique indices `(i, j)` with `i < j`.
    pub tree_edges: Vec<(usize, usize)>,
    /// Perfect elimination ordering of the pattern.
    pub order: Vec<usize>,
}

impl CliqueTree {
    /// Intersection of the two cliques joined by tree edge `edge`.
    pub fn separator(&self, edge: usize) -> Vec<usize> {
        let (i, j) = self.tree_edges[edge];
        intersect(&self.cliques[i], &self.cliques[j])
    }

    /// Every vertex's cliques induce a connected subtree.
    pub fn has_running_intersection(&self) -> bool {
        let n = self.order.len();
        (0..n).all(|v| {
            let holding: Vec<usize> = (0..self.cliques.len())
                .filter(|&c| self.cliques[c].binary_search(&v).is_ok())
                .collect();
            if holding.is_empty() {
                return false;
            }
            let inner_edges = self
                .tree_edges
                .iter()
                .filter(|(a, b)| holding.contains(a) && holding.contains(b))
                .count();
            // A subforest of a tree is connected iff it has |V| - 1 edges.
            inner_edges + 1 == holding.len()
        })
    }

    /// Every pair of the pattern lies in a common clique.
    pub fn covers(&self, p: &Pattern) -> bool {
        p.pairs().into_iter().all(|(x, y)| {
            self.cliques
                .iter()
                .any(|c| c.binary_search(&x).is_ok() && c.binary_search(&y).is_ok())
        })
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect()
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

pub fn clique_tree(p: &Pattern) -> Result<CliqueTree, PatternError> {
    let order = match is_chordal(p) {
        Chordality::Chordal { order } => order,
        Chordality::NotChordal { cycle } => return Err(PatternError::NotChordal { cycle }),
    };
    let mut pos = vec![0; p.n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let candidates: Vec<Vec<usize>> = order
        .iter()
        .map(|&v| {
            let mut c: Vec<usize> = p.adj[v].iter().copied().filter(|&w| pos[w] > pos[v]).collect();
            c.push(v);
            c.sort_unstable();
            c
        })
        .collect();
    let mut cliques: Vec<Vec<usize>> = candidates
        .iter()
        .filter(|c| !candidates.iter().any(|d| d.len() > c.len() && is_subset(c, d)))
        .cloned()
        .collect();
    cliques.sort();
    cliques.dedup();

    // Maximum-weight spanning tree on intersection sizes (Kruskal).
    let m = cliques.len();
    let mut weighted = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            weighted.push((intersect(&cliques[i], &cliques[j]).len(), i, j));
        }
    }
    weighted.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut tree_edges = Vec::with_capacity(m.saturating_sub(1));
    for (_, i, j) in weighted {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            tree_edges.push((i, j));
        }
    }

    let tree = CliqueTree {
        cliques,
        tree_edges,
        order,
    };
    assert!(tree.covers(p), "clique tree does not cover the pattern");
    assert!(
        tree.has_running_intersection(),
        "clique tree violates running intersection"
    );
    Ok(tree)
}

/// Chordal supergraph by minimum-degree elimination (lowest index on ties).
///
/// This is a heuristic; the fill is not guaranteed minimal. Chordal input is
/// returned unchanged.
pub fn fill_in(p: &Pattern) -> (Pattern, Vec<(usize, usize)>) {
    if is_chordal(p).is_chordal() {
        return (p.clone(), Vec::new());
    }
    let mut filled = p.clone();
    let mut work = p.adj.clone();
    let mut eliminated = vec![false; p.n];
    let mut added = Vec::new();
    for _ in 0..p.n {
        let v = (0..p.n)
            .filter(|&v| !eliminated[v])
            .min_by_key(|&v| (work[v].len(), v))
            .expect("vertices remain");
        let nbrs: Vec<usize> = work[v].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !work[a].contains(&b) {
                    work[a].insert(b);
                    work[b].insert(a);
                    filled = filled.with_edge(a, b);
                    added.push((a.min(b), a.max(b)));
                }
            }
        }
        for &w in &nbrs {
            work[w].remove(&v);
        }
        work[v].clear();
        eliminated[v] = true;
    }
    debug_assert!(is_chordal(&filled).is_chordal());
    (filled, added)
}

/// One step of the completion order: the new pair and the separator between
/// its endpoints in the pattern built so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionStep {
    pub x: usize,
    pub y: usize,
    pub separator: Vec<usize>,
}

/// Completion steps for a chordal pattern.
///
/// Each step joins `x ∈ C₁ \ S` and `y ∈ C₂ \ S` for two cliques adjacent in
/// the current clique tree, `S = C₁ ∩ C₂`. The intermediate patterns stay
/// chordal and `S ∪ {x, y}` becomes a clique.
pub fn completion_steps(p: &Pattern) -> Result<Vec<CompletionStep>, PatternError> {
    let mut current = p.clone();
    let mut steps = Vec::with_capacity(current.missing_edges().len());
    while !current.is_full() {
        let tree = clique_tree(&current)?;
        let (i, j) = tree.tree_edges[0];
        let separator = intersect(&tree.cliques[i], &tree.cliques[j]);
        let a = tree.cliques[i].iter().copied().find(|v| !separator.contains(v));
        let b = tree.cliques[j].iter().copied().find(|v| !separator.contains(v));
        let (a, b) = a.zip(b).expect("distinct maximal cliques differ from their separator");
        let (x, y) = (a.min(b), a.max(b));
        current = current.with_edge(x, y);
        steps.push(CompletionStep { x, y, separator });
    }
    Ok(steps)
}

/// Unspecified pairs `(x, y)`, `x < y`, in an order that keeps every
/// intermediate pattern chordal.
pub fn completion_sequence(p: &Pattern) -> Result<Vec<(usize, usize)>, PatternError> {
    Ok(completion_steps(p)?.into_iter().map(|s| (s.x, s.y)).collect())
}
