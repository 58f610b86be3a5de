//! Ribbon graphs (rotation systems) on closed oriented surfaces.
//!
//! A ribbon graph is stored as two permutations on darts: the vertex
//! rotation `sigma`, whose cycles list the darts around each vertex in
//! counterclockwise order, and the fixed-point-free involution `alpha`
//! pairing the two darts of every edge. Faces are the cycles of
//! `sigma ∘ alpha`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RibbonError {
    #[error("ribbon graph has no darts")]
    Empty,
    #[error("dart count {0} is odd")]
    OddDartCount(usize),
    #[error("{which} has length {len}, expected {darts}")]
    LengthMismatch {
        which: &'static str,
        len: usize,
        darts: usize,
    },
    #[error("{which} is not a bijection: dart {dart} is hit twice or out of range")]
    NotBijection { which: &'static str, dart: usize },
    #[error("edge involution fixes dart {0}")]
    FixedPoint(usize),
    #[error("edge involution is not an involution at dart {0}")]
    NotInvolution(usize),
    #[error("graph is disconnected: dart {0} is unreachable from dart 0")]
    Disconnected(usize),
    #[error("Euler characteristic {0} does not give an integral genus")]
    NonIntegralGenus(i64),
}

/// Graph embedded on a closed oriented surface, as a rotation system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RibbonGraphRepr", into = "RibbonGraphRepr")]
pub struct RibbonGraph {
    sigma: Vec<usize>,
    alpha: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RibbonGraphRepr {
    darts: usize,
    sigma: Vec<usize>,
    alpha: Vec<usize>,
}

impl TryFrom<RibbonGraphRepr> for RibbonGraph {
    type Error = RibbonError;

    fn try_from(r: RibbonGraphRepr) -> Result<Self, Self::Error> {
        if r.sigma.len() != r.darts {
            return Err(RibbonError::LengthMismatch {
                which: "sigma",
                len: r.sigma.len(),
                darts: r.darts,
            });
        }
        RibbonGraph::new(r.sigma, r.alpha)
    }
}

impl From<RibbonGraph> for RibbonGraphRepr {
    fn from(g: RibbonGraph) -> Self {
        RibbonGraphRepr {
            darts: g.sigma.len(),
            sigma: g.sigma,
            alpha: g.alpha,
        }
    }
}

fn check_bijection(p: &[usize], which: &'static str) -> Result<(), RibbonError> {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return Err(RibbonError::NotBijection { which, dart: x });
        }
        seen[x] = true;
    }
    Ok(())
}

fn orbits(perm: impl Fn(usize) -> usize, n: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut d = start;
        while !seen[d] {
            seen[d] = true;
            cycle.push(d);
            d = perm(d);
        }
        out.push(cycle);
    }
    out
}

impl RibbonGraph {
    /// Validates the permutations and connectivity.
    pub fn new(sigma: Vec<usize>, alpha: Vec<usize>) -> Result<Self, RibbonError> {
        let g = Self::new_unchecked_connectivity(sigma, alpha)?;
        g.check_connected()?;
        Ok(g)
    }

    /// Validates the permutations but allows a disconnected graph.
    pub fn new_unchecked_connectivity(
        sigma: Vec<usize>,
        alpha: Vec<usize>,
    ) -> Result<Self, RibbonError> {
        let n = sigma.len();
        if n == 0 {
            return Err(RibbonError::Empty);
        }
        if n % 2 == 1 {
            return Err(RibbonError::OddDartCount(n));
        }
        if alpha.len() != n {
            return Err(RibbonError::LengthMismatch {
                which: "alpha",
                len: alpha.len(),
                darts: n,
            });
        }
        check_bijection(&sigma, "sigma")?;
        check_bijection(&alpha, "alpha")?;
        for (d, &a) in alpha.iter().enumerate() {
            if a == d {
                return Err(RibbonError::FixedPoint(d));
            }
            if alpha[a] != d {
                return Err(RibbonError::NotInvolution(d));
            }
        }
        Ok(Self { sigma, alpha })
    }

    /// Builds a ribbon graph from vertex rotations given as dart cycles and
    /// edges given as dart pairs.
    pub fn from_rotations(
        rotations: &[Vec<usize>],
        edges: &[(usize, usize)],
    ) -> Result<Self, RibbonError> {
        let n = rotations.iter().map(Vec::len).sum();
        let mut sigma = vec![usize::MAX; n];
        for cyc in rotations {
            for (i, &d) in cyc.iter().enumerate() {
                if d >= n || sigma[d] != usize::MAX {
                    return Err(RibbonError::NotBijection {
                        which: "sigma",
                        dart: d,
                    });
                }
                sigma[d] = cyc[(i + 1) % cyc.len()];
            }
        }
        let mut alpha = vec![usize::MAX; n];
        for &(a, b) in edges {
            if a >= n || b >= n || alpha[a] != usize::MAX || alpha[b] != usize::MAX {
                return Err(RibbonError::NotBijection {
                    which: "alpha",
                    dart: a.max(b),
                });
            }
            alpha[a] = b;
            alpha[b] = a;
        }
        if let Some(d) = alpha.iter().position(|&x| x == usize::MAX) {
            return Err(RibbonError::FixedPoint(d));
        }
        Self::new(sigma, alpha)
    }

    pub fn darts(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    /// The face permutation `sigma ∘ alpha`.
    pub fn phi(&self, d: usize) -> usize {
        self.sigma[self.alpha[d]]
    }

    fn check_connected(&self) -> Result<(), RibbonError> {
        let n = self.darts();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(d) = queue.pop_front() {
            for e in [self.sigma[d], self.alpha[d]] {
                if !seen[e] {
                    seen[e] = true;
                    queue.push_back(e);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(d) => Err(RibbonError::Disconnected(d)),
            None => Ok(()),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.check_connected().is_ok()
    }

    /// Vertices as cycles of `sigma`.
    pub fn vertices(&self) -> Vec<Vec<usize>> {
        orbits(|d| self.sigma[d], self.darts())
    }

    /// Edges as dart pairs `(d, alpha(d))` with `d < alpha(d)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.darts())
            .filter(|&d| d < self.alpha[d])
            .map(|d| (d, self.alpha[d]))
            .collect()
    }

    /// Face boundary cycles: the orbits of `sigma ∘ alpha`.
    pub fn trace_faces(&self) -> Vec<Vec<usize>> {
        orbits(|d| self.phi(d), self.darts())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices().len()
    }

    pub fn edge_count(&self) -> usize {
        self.darts() / 2
    }

    pub fn face_count(&self) -> usize {
        self.trace_faces().len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    pub fn genus(&self) -> Result<usize, RibbonError> {
        self.check_connected()?;
        let chi = self.euler_characteristic();
        if chi > 2 || (2 - chi) % 2 != 0 {
            return Err(RibbonError::NonIntegralGenus(chi));
        }
        Ok(((2 - chi) / 2) as usize)
    }

    /// Vertex index of every dart.
    pub fn vertex_of_dart(&self) -> Vec<usize> {
        let mut of = vec![0; self.darts()];
        for (v, cyc) in self.vertices().iter().enumerate() {
            for &d in cyc {
                of[d] = v;
            }
        }
        of
    }

    /// Vertex degrees, a loop counting twice.
    pub fn degrees(&self) -> Vec<usize> {
        self.vertices().iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// No loops and no multiple edges.
    pub fn is_simplicial(&self) -> bool {
        let vod = self.vertex_of_dart();
        let mut pairs = Vec::new();
        for (a, b) in self.edges() {
            let (u, v) = (vod[a], vod[b]);
            if u == v {
                return false;
            }
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        pairs.windows(2).all(|w| w[0] != w[1])
    }

    /// Applies a dart relabeling `d -> perm[d]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, RibbonError> {
        check_bijection(perm, "relabeling")?;
        let n = self.darts();
        let mut sigma = vec![0; n];
        let mut alpha = vec![0; n];
        for d in 0..n {
            sigma[perm[d]] = perm[self.sigma[d]];
            alpha[perm[d]] = perm[self.alpha[d]];
        }
        Self::new(sigma, alpha)
    }

    /// Orientation-reversed embedding (inverse rotations).
    pub fn mirror(&self) -> Self {
        let mut sigma = vec![0; self.darts()];
        for (d, &s) in self.sigma.iter().enumerate() {
            sigma[s] = d;
        }
        Self {
            sigma,
            alpha: self.alpha.clone(),
        }
    }

    pub fn canonical_code(&self) -> Vec<u8> {
        self.canonical_code_with(false)
    }

    /// Canonical code up to orientation-preserving relabeling, optionally
    /// also quotienting by orientation reversal.
    pub fn canonical_code_with(&self, quotient_mirror: bool) -> Vec<u8> {
        let mut best = self.min_bfs_code();
        if quotient_mirror {
            let m = self.mirror().min_bfs_code();
            if m < best {
                best = m;
            }
        }
        best.iter().flat_map(|x| x.to_be_bytes()).collect()
    }

    fn min_bfs_code(&self) -> Vec<u32> {
        use std::cmp::Ordering;
        let n = self.darts();
        let mut best: Option<Vec<u32>> = None;
        let mut label = vec![u32::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut code = Vec::with_capacity(2 * n);
        'starts: for start in 0..n {
            label.iter_mut().for_each(|l| *l = u32::MAX);
            order.clear();
            code.clear();
            label[start] = 0;
            order.push(start);
            // Ordering of the code built so far against the best prefix.
            let mut state = Ordering::Equal;
            let mut head = 0;
            while head < order.len() {
                let d = order[head];
                head += 1;
                for e in [self.sigma[d], self.alpha[d]] {
                    if label[e] == u32::MAX {
                        label[e] = order.len() as u32;
                        order.push(e);
                    }
                    code.push(label[e]);
                    if state == Ordering::Equal {
                        if let Some(b) = &best {
                            state = label[e].cmp(&b[code.len() - 1]);
                            if state == Ordering::Greater {
                                continue 'starts;
                            }
                        }
                    }
                }
            }
            if best.is_none() || state == Ordering::Less {
                best = Some(code.clone());
            }
        }
        let mut out = vec![n as u32];
        out.extend(best.unwrap_or_default());
        out
    }

    pub fn canonical_hex(&self) -> String {
        to_hex(&self.canonical_code())
    }
}

pub fn to_hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Result of checking membership in the bounded-degree triangulation set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangulationCheck {
    pub is_triangulation: bool,
    pub genus: usize,
    pub non_triangular_faces: usize,
    pub max_degree: usize,
    pub vertices: usize,
    pub edges: usize,
    pub size_bound: usize,
}

/// Every face a triangle, every degree at most `k`, and at most `k·g`
/// vertices and edges. The size bound is skipped for genus 0, where `k·g`
/// would exclude every sphere.
pub fn is_triangulation(graph: &RibbonGraph, k: usize) -> Result<TriangulationCheck, RibbonError> {
    let genus = graph.genus()?;
    let non_triangular_faces = graph.trace_faces().iter().filter(|f| f.len() != 3).count();
    let max_degree = graph.max_degree();
    let vertices = graph.vertex_count();
    let edges = graph.edge_count();
    let size_bound = k * genus;
    let size_ok = genus == 0 || (vertices <= size_bound && edges <= size_bound);
    Ok(TriangulationCheck {
        is_triangulation: non_triangular_faces == 0 && max_degree <= k && size_ok,
        genus,
        non_triangular_faces,
        max_degree,
        vertices,
        edges,
        size_bound,
    })
}

/// Isomorphism class of a triangulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangulationClass {
    pub graph: RibbonGraph,
    pub genus: usize,
    pub max_degree: usize,
    #[serde(with = "hex_bytes")]
    pub canonical_code: Vec<u8>,
}

impl TriangulationClass {
    /// Wraps a graph whose faces are all triangles.
    pub fn new(graph: RibbonGraph) -> Result<Self, RibbonError> {
        let genus = graph.genus()?;
        let bad = graph.trace_faces().iter().position(|f| f.len() != 3);
        if let Some(f) = bad {
            let dart = graph.trace_faces()[f][0];
            return Err(RibbonError::NotBijection {
                which: "triangular face",
                dart,
            });
        }
        Ok(Self {
            max_degree: graph.max_degree(),
            canonical_code: graph.canonical_code(),
            genus,
            graph,
        })
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_hex(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Fixture graphs used across tests and examples.
pub mod fixtures {
    use super::RibbonGraph;

    /// One vertex, loops a (darts 0,1) and b (darts 2,3), rotation (a b ā b̄).
    pub fn interleaved_rose() -> RibbonGraph {
        RibbonGraph::from_rotations(&[vec![0, 2, 1, 3]], &[(0, 1), (2, 3)]).unwrap()
    }

    /// One vertex, rotation (a ā b b̄).
    pub fn planar_rose() -> RibbonGraph {
        RibbonGraph::from_rotations(&[vec![0, 1, 2, 3]], &[(0, 1), (2, 3)]).unwrap()
    }

    /// Single edge between two vertices.
    pub fn single_edge() -> RibbonGraph {
        RibbonGraph::from_rotations(&[vec![0], vec![1]], &[(0, 1)]).unwrap()
    }

    /// Square with a diagonal and opposite sides identified: one vertex,
    /// three loops a, b, c with rotation (a c b ā c̄ b̄).
    pub fn torus_one_vertex() -> RibbonGraph {
        RibbonGraph::from_rotations(&[vec![0, 4, 2, 1, 5, 3]], &[(0, 1), (2, 3), (4, 5)]).unwrap()
    }

    /// Boundary of the tetrahedron.
    pub fn tetrahedron() -> RibbonGraph {
        // Vertex i has darts toward the other three, in counterclockwise order
        // seen from outside. Dart id = 3*i + slot.
        // Edges: 0-1, 0-2, 0-3, 1-2, 1-3, 2-3.
        let dart = |from: usize, to: usize| {
            let others: Vec<usize> = (0..4).filter(|&x| x != from).collect();
            3 * from + others.iter().position(|&x| x == to).unwrap()
        };
        let rot = |v: usize, order: [usize; 3]| order.iter().map(|&t| dart(v, t)).collect();
        let rotations = vec![
            rot(0, [1, 2, 3]),
            rot(1, [0, 3, 2]),
            rot(2, [0, 1, 3]),
            rot(3, [0, 2, 1]),
        ];
        let mut edges = Vec::new();
        for a in 0..4 {
            for b in a + 1..4 {
                edges.push((dart(a, b), dart(b, a)));
            }
        }
        RibbonGraph::from_rotations(&rotations, &edges).unwrap()
    }
}
