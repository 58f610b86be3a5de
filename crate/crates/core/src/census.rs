//! Exact census of bounded-degree surface triangulations and the counting
//! primitives behind the triangulation upper bound.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ribbon::{to_hex, RibbonError, RibbonGraph, TriangulationClass};

/// Largest edge count the census will search.
pub const MAX_EDGES_LIMIT: usize = 30;

/// Environment variable capping the number of census worker threads.
pub const THREADS_ENV: &str = "SURFACE_CENSUS_THREADS";

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("time budget exceeded; {} of {total_shards} shards completed", completed_shards.len())]
    BudgetExceeded {
        completed_shards: Vec<usize>,
        total_shards: usize,
        partial: Vec<TriangulationClass>,
    },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusBudget {
    pub max_genus: usize,
    pub max_edges: usize,
    pub max_seconds: Duration,
    pub shard_count: usize,
}

impl Default for CensusBudget {
    fn default() -> Self {
        Self {
            max_genus: 3,
            max_edges: 24,
            max_seconds: Duration::from_secs(120),
            shard_count: 1,
        }
    }
}

impl CensusBudget {
    pub fn validate(&self) -> Result<(), CensusError> {
        if self.max_edges > MAX_EDGES_LIMIT {
            return Err(CensusError::Refused(format!(
                "max_edges {} exceeds the search-space guard {MAX_EDGES_LIMIT}",
                self.max_edges
            )));
        }
        if self.shard_count == 0 {
            return Err(CensusError::Domain("shard_count must be at least 1".into()));
        }
        Ok(())
    }
}

/// The (m-2)-th Catalan number: triangulations of a convex m-gon.
pub fn catalan_triangulations(m: usize) -> Result<BigUint, CensusError> {
    if m < 3 {
        return Err(CensusError::Domain(format!("polygon needs at least 3 sides, got {m}")));
    }
    let n = m - 2;
    let mut num = BigUint::one();
    for i in (n + 1)..=(2 * n) {
        num *= BigUint::from(i);
    }
    let mut den = BigUint::one();
    for i in 1..=(n + 1) {
        den *= BigUint::from(i);
    }
    Ok(num / den)
}

/// Rooted unlabelled trees r(1..=n), index 0 unused.
fn rooted_tree_counts(n: usize) -> Vec<BigUint> {
    let mut r = vec![BigUint::zero(); n + 1];
    if n == 0 {
        return r;
    }
    r[1] = BigUint::one();
    // s[k] = sum over divisors d of k of d * r(d)
    let mut s = vec![BigUint::zero(); n + 1];
    for m in 1..n {
        for d in 1..=m {
            if m % d == 0 {
                s[m] += BigUint::from(d) * &r[d];
            }
        }
        let mut acc = BigUint::zero();
        for k in 1..=m {
            acc += &s[k] * &r[m - k + 1];
        }
        r[m + 1] = acc / BigUint::from(m);
    }
    r
}

/// Number of unlabelled free trees on n vertices (Otter's dissimilarity
/// formula applied to the rooted counts).
pub fn unlabelled_trees(n: usize) -> Result<BigUint, CensusError> {
    Ok(unlabelled_tree_table(n)?.pop().unwrap_or_default())
}

/// t(1..=n) in order.
pub fn unlabelled_tree_table(n: usize) -> Result<Vec<BigUint>, CensusError> {
    if n < 1 {
        return Err(CensusError::Domain("trees need at least one vertex".into()));
    }
    let r = rooted_tree_counts(n);
    let mut out = Vec::with_capacity(n);
    for m in 1..=n {
        let mut pairs = BigUint::zero();
        for i in 1..m {
            pairs += &r[i] * &r[m - i];
        }
        if m % 2 == 0 {
            pairs -= &r[m / 2];
        }
        out.push(&r[m] - pairs / BigUint::from(2u32));
    }
    Ok(out)
}

/// Restricts the census beyond genus and degree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusFilter {
    /// Only triangulations with exactly this many vertices.
    pub vertices: Option<usize>,
    /// Forbid loops and multiple edges.
    pub simplicial: bool,
}

/// Vertex counts V (with E = 3(V - 2 + 2g)) admissible for Tr(k, g).
fn candidate_vertex_counts(
    g: usize,
    k: usize,
    filter: CensusFilter,
    budget: &CensusBudget,
) -> Result<Vec<(usize, usize)>, CensusError> {
    let edges_for = |v: usize| -> Option<usize> {
        let e = 3 * (v as i64 - 2 + 2 * g as i64);
        (e > 0).then_some(e as usize)
    };
    let admissible = |v: usize, e: usize| -> bool {
        let size_ok = g == 0 || (v <= k * g && e <= k * g);
        size_ok && 2 * e <= k * v
    };
    let vs: Vec<usize> = match filter.vertices {
        Some(v) => vec![v],
        None if g >= 1 => (1..=k * g).collect(),
        None => {
            if k >= 6 {
                return Err(CensusError::Refused(
                    "genus 0 with max degree >= 6 is unbounded; pass a vertex count".into(),
                ));
            }
            (3..=12 / (6 - k)).collect()
        }
    };
    let mut out = Vec::new();
    for v in vs {
        let Some(e) = edges_for(v) else { continue };
        if !admissible(v, e) {
            continue;
        }
        if e > budget.max_edges {
            return Err(CensusError::Refused(format!(
                "{v}-vertex genus-{g} triangulations have {e} edges, above the budget of {}",
                budget.max_edges
            )));
        }
        out.push((v, e));
    }
    Ok(out)
}

/// Search state: darts `3f, 3f+1, 3f+2` bound face `f` counterclockwise.
#[derive(Clone)]
struct Gluing {
    alpha: Vec<usize>,
    opened: usize,
    faces: usize,
}

const UNPAIRED: usize = usize::MAX;

impl Gluing {
    fn new(faces: usize) -> Self {
        Self {
            alpha: vec![UNPAIRED; 3 * faces],
            opened: 1,
            faces,
        }
    }

    fn phi(d: usize) -> usize {
        3 * (d / 3) + (d % 3 + 1) % 3
    }

    fn phi_inv(d: usize) -> usize {
        3 * (d / 3) + (d % 3 + 2) % 3
    }

    fn sigma(&self, d: usize) -> Option<usize> {
        let a = self.alpha[d];
        (a != UNPAIRED).then(|| Self::phi(a))
    }

    fn sigma_inv(&self, d: usize) -> Option<usize> {
        let a = self.alpha[Self::phi_inv(d)];
        (a != UNPAIRED).then_some(a)
    }

    /// Length of the partial vertex through `d` and whether it is closed.
    fn vertex_chain(&self, d: usize) -> (usize, bool) {
        let mut len = 1;
        let mut x = d;
        while let Some(y) = self.sigma(x) {
            if y == d {
                return (len, true);
            }
            len += 1;
            x = y;
        }
        let mut x = d;
        while let Some(y) = self.sigma_inv(x) {
            len += 1;
            x = y;
        }
        (len, false)
    }

    fn first_unpaired(&self) -> Option<usize> {
        self.alpha.iter().position(|&a| a == UNPAIRED)
    }

    /// Partners for the smallest unpaired dart, in a fixed order.
    fn choices(&self) -> Option<(usize, Vec<usize>)> {
        let d = self.first_unpaired()?;
        if d >= 3 * self.opened {
            return Some((d, Vec::new()));
        }
        let mut out: Vec<usize> = ((d + 1)..3 * self.opened)
            .filter(|&e| self.alpha[e] == UNPAIRED)
            .collect();
        if self.opened < self.faces {
            out.push(3 * self.opened);
        }
        Some((d, out))
    }

    fn pair(&mut self, d: usize, e: usize) {
        self.alpha[d] = e;
        self.alpha[e] = d;
        if e == 3 * self.opened {
            self.opened += 1;
        }
    }

    fn unpair(&mut self, d: usize, e: usize, opened_before: usize) {
        self.alpha[d] = UNPAIRED;
        self.alpha[e] = UNPAIRED;
        self.opened = opened_before;
    }
}

struct SearchLimits {
    vertices: usize,
    max_degree: usize,
    simplicial: bool,
    deadline: Instant,
}

struct Search<'a> {
    limits: &'a SearchLimits,
    abort: &'a AtomicBool,
    nodes: u64,
    found: BTreeMap<Vec<u8>, TriangulationClass>,
}

impl Search<'_> {
    fn prune(&self, st: &Gluing, d: usize, e: usize) -> bool {
        let mut closed = 0;
        for x in [d, e] {
            let (len, is_closed) = st.vertex_chain(x);
            if len > self.limits.max_degree {
                return true;
            }
            if is_closed {
                closed += 1;
            }
        }
        if closed > 0 {
            // count all closed vertices only when a new one appears
            let mut seen = vec![false; st.alpha.len()];
            let mut count = 0;
            for s in 0..st.alpha.len() {
                if seen[s] {
                    continue;
                }
                let mut x = s;
                let mut ok = true;
                loop {
                    seen[x] = true;
                    match st.sigma(x) {
                        Some(y) if y == s => break,
                        Some(y) => x = y,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    count += 1;
                }
            }
            if count > self.limits.vertices {
                return true;
            }
        }
        false
    }

    fn run(&mut self, st: &mut Gluing) -> bool {
        self.nodes += 1;
        if self.nodes % 4096 == 1
            && (self.abort.load(Ordering::Relaxed) || Instant::now() > self.limits.deadline)
        {
            self.abort.store(true, Ordering::Relaxed);
            return false;
        }
        match st.choices() {
            None => {
                self.leaf(st);
                true
            }
            Some((d, partners)) => {
                for e in partners {
                    let before = st.opened;
                    st.pair(d, e);
                    if !self.prune(st, d, e) && !self.run(st) {
                        st.unpair(d, e, before);
                        return false;
                    }
                    st.unpair(d, e, before);
                }
                true
            }
        }
    }

    fn leaf(&mut self, st: &Gluing) {
        let n = st.alpha.len();
        let sigma: Vec<usize> = (0..n).map(|d| Gluing::phi(st.alpha[d])).collect();
        let Ok(graph) = RibbonGraph::new(sigma, st.alpha.clone()) else {
            return;
        };
        if graph.vertex_count() != self.limits.vertices
            || graph.max_degree() > self.limits.max_degree
            || (self.limits.simplicial && !graph.is_simplicial())
        {
            return;
        }
        let code = graph.canonical_code();
        let smaller = |c: &TriangulationClass| {
            (graph.sigma(), graph.alpha()) < (c.graph.sigma(), c.graph.alpha())
        };
        if self.found.get(&code).is_none_or(smaller) {
            if let Ok(class) = TriangulationClass::new(graph) {
                self.found.insert(code, class);
            }
        }
    }
}

/// Search-tree prefixes of the given depth, in deterministic order.
fn prefixes(faces: usize, depth: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(st: &mut Gluing, depth: usize, path: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if depth == 0 {
            out.push(path.clone());
            return;
        }
        match st.choices() {
            None => out.push(path.clone()),
            Some((_, p)) if p.is_empty() => {}
            Some((d, partners)) => {
                for e in partners {
                    let before = st.opened;
                    st.pair(d, e);
                    path.push((d, e));
                    rec(st, depth - 1, path, out);
                    path.pop();
                    st.unpair(d, e, before);
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Gluing::new(faces), depth, &mut Vec::new(), &mut out);
    out
}

fn worker_cap() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// All isomorphism classes of genus-`g` triangulations in Tr(k, g), subject
/// to `filter`. Results are sorted by canonical code and do not depend on
/// the shard count.
pub fn enumerate_triangulations(
    g: usize,
    k: usize,
    budget: &CensusBudget,
    filter: CensusFilter,
) -> Result<Vec<TriangulationClass>, CensusError> {
    budget.validate()?;
    if k < 3 {
        return Err(CensusError::Domain(format!("max degree must be at least 3, got {k}")));
    }
    if g > budget.max_genus {
        return Err(CensusError::Refused(format!(
            "genus {g} above the budget of {}",
            budget.max_genus
        )));
    }
    let deadline = Instant::now() + budget.max_seconds;
    let mut all = BTreeMap::new();
    let mut completed = Vec::new();
    let mut total_shards = 0;
    for (v, e) in candidate_vertex_counts(g, k, filter, budget)? {
        let faces = 2 * e / 3;
        let limits = SearchLimits {
            vertices: v,
            max_degree: k,
            simplicial: filter.simplicial,
            deadline,
        };
        let prefs = prefixes(faces, 2);
        let shards = budget.shard_count;
        let abort = AtomicBool::new(false);
        let workers = shards.min(worker_cap()).max(1);
        let results: Vec<(usize, bool, BTreeMap<Vec<u8>, TriangulationClass>)> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..workers)
                    .map(|w| {
                        let prefs = &prefs;
                        let limits = &limits;
                        let abort = &abort;
                        scope.spawn(move || {
                            let mut out = Vec::new();
                            for shard in (w..shards).step_by(workers) {
                                let mut search = Search {
                                    limits,
                                    abort,
                                    nodes: 0,
                                    found: BTreeMap::new(),
                                };
                                let mut ok = true;
                                for p in prefs.iter().skip(shard).step_by(shards) {
                                    let mut st = Gluing::new(faces);
                                    for &(d, e) in p {
                                        st.pair(d, e);
                                    }
                                    let pruned = p.iter().any(|&(d, e)| search.prune(&st, d, e));
                                    if !pruned && !search.run(&mut st) {
                                        ok = false;
                                        break;
                                    }
                                }
                                out.push((shard, ok, search.found));
                            }
                            out
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("census worker panicked"))
                    .collect()
            });
        let base = total_shards;
        total_shards += shards;
        for (shard, ok, found) in results {
            for (code, class) in found {
                match all.entry(code) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(class);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        let cur: &TriangulationClass = o.get();
                        if (class.graph.sigma(), class.graph.alpha())
                            < (cur.graph.sigma(), cur.graph.alpha())
                        {
                            o.insert(class);
                        }
                    }
                }
            }
            if ok {
                completed.push(base + shard);
            }
        }
    }
    completed.sort_unstable();
    let classes: Vec<TriangulationClass> = all.into_values().collect();
    if completed.len() < total_shards {
        return Err(CensusError::BudgetExceeded {
            completed_shards: completed,
            total_shards,
            partial: classes,
        });
    }
    Ok(classes)
}

/// JSON summary of one class in a census listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub canonical_code: String,
    pub vertices: usize,
    pub edges: usize,
    pub degrees: Vec<usize>,
}

impl From<&TriangulationClass> for ClassSummary {
    fn from(c: &TriangulationClass) -> Self {
        let mut degrees = c.graph.degrees();
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        Self {
            canonical_code: to_hex(&c.canonical_code),
            vertices: c.graph.vertex_count(),
            edges: c.graph.edge_count(),
            degrees,
        }
    }
}

/// Spanning tree, homology-generating edges and complementary polygons of a
/// triangulated surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanningDecomposition {
    /// Edges of the spanning tree T, each named by its smaller dart.
    pub tree_edges: Vec<usize>,
    /// Edges e_1..e_2g whose classes span the cycle space modulo faces.
    pub generator_edges: Vec<usize>,
    /// Side counts m_i of the components of S minus (T ∪ {e_i}).
    pub complement_regions: Vec<usize>,
    /// Euler characteristic of each open complementary region.
    pub region_euler: Vec<i64>,
}

impl SpanningDecomposition {
    pub fn sides_total(&self) -> usize {
        self.complement_regions.iter().sum()
    }

    pub fn all_regions_disks(&self) -> bool {
        self.region_euler.iter().all(|&x| x == 1)
    }

    /// Σ m_i ≤ 2kg.
    pub fn sides_within(&self, k: usize, genus: usize) -> bool {
        self.sides_total() <= 2 * k * genus
    }
}

/// Row-reduced basis over the rationals, supporting independence tests.
struct RationalBasis {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl RationalBasis {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn reduce(&self, mut v: Vec<BigRational>) -> Vec<BigRational> {
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= &f * r;
                }
            }
        }
        v
    }

    /// Adds `v` if independent; returns whether it was.
    fn insert(&mut self, v: Vec<BigRational>) -> bool {
        let mut v = self.reduce(v);
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[pivot].recip();
        v.iter_mut().for_each(|x| *x *= &inv);
        for (_, row) in self.rows.iter_mut() {
            if !row[pivot].is_zero() {
                let f = row[pivot].clone();
                for (x, y) in row.iter_mut().zip(&v) {
                    *x -= &f * y;
                }
            }
        }
        self.rows.push((pivot, v));
        true
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Spanning tree plus a homology basis of edges, with the complementary
/// regions checked to be disks.
pub fn decompose(t: &TriangulationClass) -> Result<SpanningDecomposition, CensusError> {
    let graph = &t.graph;
    let n = graph.darts();
    let alpha = graph.alpha();
    let vod = graph.vertex_of_dart();
    let nv = graph.vertex_count();
    let edge_of = |d: usize| d.min(alpha[d]);

    // BFS spanning tree over vertices, scanning darts in rotation order.
    let vertices = graph.vertices();
    let mut in_tree = vec![false; n];
    let mut reached = vec![false; nv];
    reached[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut tree_edges = Vec::new();
    while let Some(v) = queue.pop_front() {
        for &d in &vertices[v] {
            let w = vod[alpha[d]];
            if !reached[w] {
                reached[w] = true;
                in_tree[edge_of(d)] = true;
                tree_edges.push(edge_of(d));
                queue.push_back(w);
            }
        }
    }
    tree_edges.sort_unstable();

    let non_tree: Vec<usize> = graph
        .edges()
        .into_iter()
        .map(|(a, _)| a)
        .filter(|&e| !in_tree[e])
        .collect();
    let coord: BTreeMap<usize, usize> = non_tree.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let dim = non_tree.len();

    let faces = graph.trace_faces();
    let mut basis = RationalBasis::new();
    for face in &faces {
        let mut v = vec![BigRational::zero(); dim];
        for &d in face {
            if let Some(&i) = coord.get(&edge_of(d)) {
                let sign = if d < alpha[d] { 1 } else { -1 };
                v[i] += BigRational::from_integer(sign.into());
            }
        }
        basis.insert(v);
    }
    if basis.rank() + 1 != faces.len() {
        return Err(CensusError::Invariant(format!(
            "face boundaries have rank {}, expected {}",
            basis.rank(),
            faces.len() - 1
        )));
    }

    let target = 2 * t.genus;
    let mut generator_edges = Vec::new();
    for (i, &e) in non_tree.iter().enumerate() {
        if generator_edges.len() == target {
            break;
        }
        let mut v = vec![BigRational::zero(); dim];
        v[i] = BigRational::one();
        if basis.insert(v) {
            generator_edges.push(e);
        }
    }
    if generator_edges.len() != target || basis.rank() != dim {
        return Err(CensusError::Invariant(format!(
            "found {} homology generators, expected {target}",
            generator_edges.len()
        )));
    }

    let mut in_x = in_tree.clone();
    for &e in &generator_edges {
        in_x[e] = true;
    }
    let mut face_of = vec![0; n];
    for (f, face) in faces.iter().enumerate() {
        for &d in face {
            face_of[d] = f;
        }
    }
    let mut uf = UnionFind::new(faces.len());
    for (a, b) in graph.edges() {
        if !in_x[a] {
            uf.union(face_of[a], face_of[b]);
        }
    }
    let mut regions: BTreeMap<usize, (i64, i64, usize)> = BTreeMap::new();
    for f in 0..faces.len() {
        regions.entry(uf.find(f)).or_default().0 += 1;
    }
    for (a, _) in graph.edges() {
        if !in_x[a] {
            regions.get_mut(&uf.find(face_of[a])).expect("region").1 += 1;
        }
    }
    for d in 0..n {
        if in_x[edge_of(d)] {
            regions.get_mut(&uf.find(face_of[d])).expect("region").2 += 1;
        }
    }
    let complement_regions = regions.values().map(|r| r.2).collect();
    let region_euler = regions.values().map(|r| r.0 - r.1).collect();
    Ok(SpanningDecomposition {
        tree_edges,
        generator_edges,
        complement_regions,
        region_euler,
    })
}

/// The four factors of the triangulation count bound and their products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundFactors {
    /// Unlabelled trees with at most kg vertices.
    pub a: BigUint,
    /// Ways of adding 2g unlabelled edges.
    pub b: BigUint,
    /// Cyclic orderings at the vertices.
    pub c: BigUint,
    /// Triangulations of the complementary polygons.
    pub d: BigUint,
    pub product: BigUint,
    pub ab_variant: BigUint,
}

impl Serialize for BoundFactors {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BoundFactors", 6)?;
        st.serialize_field("a", &self.a.to_string())?;
        st.serialize_field("b", &self.b.to_string())?;
        st.serialize_field("c", &self.c.to_string())?;
        st.serialize_field("d", &self.d.to_string())?;
        st.serialize_field("product", &self.product.to_string())?;
        st.serialize_field("ab_variant", &self.ab_variant.to_string())?;
        st.end()
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Bound factors a, b, c, d for Tr(k, g). The tree factor uses the exact
/// count Σ_{n ≤ kg} t(n).
pub fn bound_factors(g: usize, k: usize) -> Result<BoundFactors, CensusError> {
    if g < 1 || k < 3 {
        return Err(CensusError::Domain(format!(
            "bound needs g >= 1 and k >= 3, got g={g}, k={k}"
        )));
    }
    let kg = k * g;
    let a = unlabelled_tree_table(kg)?
        .into_iter()
        .fold(BigUint::zero(), |acc, t| acc + t);
    let (q, r) = BigUint::from(kg).pow(4 * g as u32).div_rem(&factorial(2 * g));
    let b = if r.is_zero() { q } else { q + 1u32 };
    let c = factorial(k).pow(kg as u32);
    let d = BigUint::from(4u32).pow(2 * kg as u32);
    let ab_variant = &a * &b;
    let product = &ab_variant * &c * &d;
    Ok(BoundFactors {
        a,
        b,
        c,
        d,
        product,
        ab_variant,
    })
}

/// m · K^(kg-1) · |bound on Tr(k, g)|: the bound on genus-g surface
/// subgroup conjugacy classes given a ball cover of size `m` and per-vertex
/// placement constant `big_k`.
pub fn upper_bound_count(g: usize, k: usize, m: usize, big_k: usize) -> Result<BigUint, CensusError> {
    if m < 1 || big_k < 1 {
        return Err(CensusError::Domain("m and K must be at least 1".into()));
    }
    let f = bound_factors(g, k)?;
    Ok(BigUint::from(m) * BigUint::from(big_k).pow((k * g - 1) as u32) * f.product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ribbon::fixtures;
    use std::collections::BTreeSet;

    /// Counts maximal non-crossing diagonal sets of a convex m-gon by
    /// backtracking over the diagonals.
    fn brute_polygon_triangulations(m: usize) -> u64 {
        let diags: Vec<(usize, usize)> = (0..m)
            .flat_map(|i| ((i + 2)..m).map(move |j| (i, j)))
            .filter(|&(i, j)| !(i == 0 && j == m - 1))
            .collect();
        let crosses = |a: (usize, usize), b: (usize, usize)| {
            let inside = |x: usize, (i, j): (usize, usize)| i < x && x < j;
            let (p, q) = b;
            p != a.0 && p != a.1 && q != a.0 && q != a.1 && (inside(p, a) != inside(q, a))
        };
        fn rec(
            idx: usize,
            chosen: &mut Vec<(usize, usize)>,
            diags: &[(usize, usize)],
            need: usize,
            crosses: &dyn Fn((usize, usize), (usize, usize)) -> bool,
        ) -> u64 {
            if chosen.len() == need {
                return 1;
            }
            if idx == diags.len() || diags.len() - idx < need - chosen.len() {
                return 0;
            }
            let mut total = rec(idx + 1, chosen, diags, need, crosses);
            let d = diags[idx];
            if chosen.iter().all(|&c| !crosses(c, d)) {
                chosen.push(d);
                total += rec(idx + 1, chosen, diags, need, crosses);
                chosen.pop();
            }
            total
        }
        rec(0, &mut Vec::new(), &diags, m - 3, &crosses)
    }

    /// Canonical string of a free tree: AHU encoding rooted at its center(s).
    fn tree_canon(adj: &[Vec<usize>]) -> String {
        let n = adj.len();
        if n == 1 {
            return "()".into();
        }
        let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
        let mut leaves: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
        let mut removed = leaves.len();
        while removed < n {
            let mut next = Vec::new();
            for &l in &leaves {
                for &w in &adj[l] {
                    deg[w] -= 1;
                    if deg[w] == 1 {
                        next.push(w);
                    }
                }
            }
            removed += next.len();
            leaves = next;
        }
        fn enc(v: usize, parent: usize, adj: &[Vec<usize>]) -> String {
            let mut kids: Vec<String> = adj[v]
                .iter()
                .filter(|&&w| w != parent)
                .map(|&w| enc(w, v, adj))
                .collect();
            kids.sort();
            format!("({})", kids.concat())
        }
        leaves
            .iter()
            .map(|&c| enc(c, usize::MAX, adj))
            .min()
            .unwrap()
    }

    /// Free trees up to isomorphism, grown by attaching leaves.
    fn brute_tree_counts(max_n: usize) -> Vec<usize> {
        let mut level: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
        level.insert("()".into(), vec![vec![]]);
        let mut counts = vec![1];
        for _ in 2..=max_n {
            let mut next = BTreeMap::new();
            for adj in level.values() {
                for v in 0..adj.len() {
                    let mut a = adj.clone();
                    let new = a.len();
                    a.push(vec![v]);
                    a[v].push(new);
                    next.entry(tree_canon(&a)).or_insert(a);
                }
            }
            counts.push(next.len());
            level = next;
        }
        counts
    }

    #[test]
    fn catalan_examples() {
        assert_eq!(catalan_triangulations(3).unwrap(), 1u32.into());
        assert_eq!(catalan_triangulations(4).unwrap(), 2u32.into());
        assert_eq!(catalan_triangulations(6).unwrap(), 14u32.into());
        assert!(catalan_triangulations(2).is_err());
    }

    #[test]
    fn catalan_matches_brute_force() {
        for m in 3..=10 {
            assert_eq!(
                catalan_triangulations(m).unwrap(),
                BigUint::from(brute_polygon_triangulations(m)),
                "m={m}"
            );
        }
    }

    #[test]
    fn tree_examples() {
        assert_eq!(unlabelled_trees(1).unwrap(), 1u32.into());
        assert_eq!(unlabelled_trees(4).unwrap(), 2u32.into());
        assert_eq!(unlabelled_trees(7).unwrap(), 11u32.into());
        assert!(unlabelled_trees(0).is_err());
    }

    #[test]
    fn trees_match_brute_force() {
        let brute = brute_tree_counts(11);
        let table = unlabelled_tree_table(11).unwrap();
        for (n, (b, t)) in brute.iter().zip(&table).enumerate() {
            assert_eq!(BigUint::from(*b), *t, "n={}", n + 1);
        }
    }

    fn small_budget(shards: usize) -> CensusBudget {
        CensusBudget {
            shard_count: shards,
            ..CensusBudget::default()
        }
    }

    #[test]
    fn one_vertex_torus_census() {
        let one = CensusFilter {
            vertices: Some(1),
            simplicial: false,
        };
        let classes = enumerate_triangulations(1, 6, &small_budget(1), one).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(
            classes[0].canonical_code,
            fixtures::torus_one_vertex().canonical_code()
        );
        assert!(enumerate_triangulations(1, 5, &small_budget(1), one)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn tetrahedron_is_the_only_simplicial_four_vertex_sphere() {
        let f = CensusFilter {
            vertices: Some(4),
            simplicial: true,
        };
        let classes = enumerate_triangulations(0, 3, &small_budget(2), f).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].canonical_code, fixtures::tetrahedron().canonical_code());
    }

    #[test]
    fn census_is_shard_invariant() {
        let f = CensusFilter::default();
        let base = enumerate_triangulations(1, 7, &small_budget(1), f).unwrap();
        for shards in [2, 8] {
            assert_eq!(enumerate_triangulations(1, 7, &small_budget(shards), f).unwrap(), base);
        }
    }

    #[test]
    fn census_refusals() {
        let b = CensusBudget {
            max_edges: 31,
            ..CensusBudget::default()
        };
        assert!(matches!(
            enumerate_triangulations(1, 6, &b, CensusFilter::default()),
            Err(CensusError::Refused(_))
        ));
        let b = CensusBudget {
            max_edges: 6,
            ..CensusBudget::default()
        };
        assert!(matches!(
            enumerate_triangulations(2, 18, &b, CensusFilter::default()),
            Err(CensusError::Refused(_))
        ));
    }

    #[test]
    fn budget_exhaustion_reports_partial_shards() {
        let b = CensusBudget {
            max_seconds: Duration::ZERO,
            shard_count: 2,
            ..CensusBudget::default()
        };
        let f = CensusFilter {
            vertices: Some(1),
            simplicial: false,
        };
        match enumerate_triangulations(2, 18, &b, f) {
            Err(CensusError::BudgetExceeded { total_shards, .. }) => assert_eq!(total_shards, 2),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn decompose_torus() {
        let t = TriangulationClass::new(fixtures::torus_one_vertex()).unwrap();
        let dec = decompose(&t).unwrap();
        assert!(dec.tree_edges.is_empty());
        assert_eq!(dec.generator_edges.len(), 2);
        assert_eq!(dec.complement_regions, vec![4]);
        assert!(dec.all_regions_disks());
        assert!(dec.sides_within(6, 1));
    }

    #[test]
    fn decompose_sphere() {
        let t = TriangulationClass::new(fixtures::tetrahedron()).unwrap();
        let dec = decompose(&t).unwrap();
        assert_eq!(dec.tree_edges.len(), 3);
        assert!(dec.generator_edges.is_empty());
        assert_eq!(dec.complement_regions, vec![6]);
        assert!(dec.all_regions_disks());
    }

    #[test]
    fn decompose_every_small_census_member() {
        let f = CensusFilter::default();
        for k in 3..=8 {
            for t in enumerate_triangulations(1, k, &small_budget(1), f).unwrap() {
                let dec = decompose(&t).unwrap();
                assert_eq!(dec.generator_edges.len(), 2);
                assert!(dec.all_regions_disks());
                assert!(dec.sides_within(k, 1));
            }
        }
    }

    #[test]
    fn bound_factor_values() {
        let f = bound_factors(2, 3).unwrap();
        assert_eq!(f.b, 69984u32.into());
        assert_eq!(f.d, 16777216u32.into());
        assert_eq!(f.product, &f.a * &f.b * &f.c * &f.d);
        assert_eq!(f.ab_variant, &f.a * &f.b);
        // a = t(1) + ... + t(6) = 1 + 1 + 1 + 2 + 3 + 6
        assert_eq!(f.a, 14u32.into());
        assert_eq!(f.c, BigUint::from(6u32).pow(6));
    }

    #[test]
    fn upper_bound_substitution() {
        let p = bound_factors(2, 3).unwrap().product;
        assert_eq!(upper_bound_count(2, 3, 1, 1).unwrap(), p);
        assert_eq!(upper_bound_count(2, 3, 5, 2).unwrap(), BigUint::from(5u32 * 32) * &p);
        assert_eq!(
            upper_bound_count(2, 3, 10, 2).unwrap(),
            upper_bound_count(2, 3, 5, 2).unwrap() * 2u32
        );
    }

    #[test]
    fn census_codes_are_distinct() {
        let classes = enumerate_triangulations(1, 9, &small_budget(4), CensusFilter::default()).unwrap();
        let codes: BTreeSet<_> = classes.iter().map(|c| c.canonical_code.clone()).collect();
        assert_eq!(codes.len(), classes.len());
    }

    /// One-vertex triangulations found by fixing the rotation to a single
    /// cycle and enumerating edge pairings with face-length pruning.
    fn brute_one_vertex(edges: usize) -> BTreeSet<Vec<u8>> {
        let n = 2 * edges;
        let sigma: Vec<usize> = (0..n).map(|d| (d + 1) % n).collect();
        fn face_ok(alpha: &[usize], sigma: &[usize], d: usize) -> bool {
            // walk phi = sigma . alpha from d while defined
            let mut len = 1;
            let mut x = d;
            loop {
                if alpha[x] == usize::MAX {
                    return len <= 3;
                }
                let y = sigma[alpha[x]];
                if y == d {
                    return len == 3;
                }
                len += 1;
                if len > 3 {
                    return false;
                }
                x = y;
            }
        }
        fn rec(alpha: &mut Vec<usize>, sigma: &[usize], out: &mut BTreeSet<Vec<u8>>) {
            let Some(d) = alpha.iter().position(|&a| a == usize::MAX) else {
                let g = RibbonGraph::new(sigma.to_vec(), alpha.clone()).unwrap();
                if g.trace_faces().iter().all(|f| f.len() == 3) {
                    out.insert(g.canonical_code());
                }
                return;
            };
            for e in (d + 1)..alpha.len() {
                if alpha[e] != usize::MAX {
                    continue;
                }
                alpha[d] = e;
                alpha[e] = d;
                let ok = (0..alpha.len()).all(|x| face_ok(alpha, sigma, x));
                if ok {
                    rec(alpha, sigma, out);
                }
                alpha[d] = usize::MAX;
                alpha[e] = usize::MAX;
            }
        }
        let mut out = BTreeSet::new();
        rec(&mut vec![usize::MAX; n], &sigma, &mut out);
        out
    }

    #[test]
    fn one_vertex_census_matches_matching_brute_force() {
        let one = CensusFilter {
            vertices: Some(1),
            simplicial: false,
        };
        for (g, e) in [(1, 3), (2, 9)] {
            let census: BTreeSet<Vec<u8>> = enumerate_triangulations(g, 2 * e, &small_budget(3), one)
                .unwrap()
                .into_iter()
                .map(|c| c.canonical_code)
                .collect();
            assert_eq!(census, brute_one_vertex(e), "genus {g}");
        }
    }
}
