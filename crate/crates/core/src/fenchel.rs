//! Complex Fenchel–Nielsen coordinates: pants groups from half-lengths,
//! twist-bend gluing, the (ε, R) family, bending and numerical diagnostics.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moebius::precise::{self, DMobius, DPoint, Dc};
use crate::moebius::{jorgensen_test, Jorgensen, Kind, Mobius, MoebiusError, SpherePoint};

pub type C = Complex64;

/// A letter is ±(generator index + 1); negative means inverse.
pub type Word = Vec<i32>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FenchelError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

/// Slot `slot` (0, 1 or 2) of pants `pants`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SlotRef {
    pub pants: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pants {
    /// Covering degree m of each cuff slot.
    pub degrees: [u32; 3],
    /// Id of the base pants this one covers.
    #[serde(default)]
    pub base: usize,
}

impl Default for Pants {
    fn default() -> Self {
        Self {
            degrees: [1; 3],
            base: 0,
        }
    }
}

/// A curve glued from two slots. Incidence 0 keeps its orientation,
/// incidence 1 is attached with the reversed one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cuff {
    pub incidences: [SlotRef; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PantsDecompositionGraph {
    pub pants: Vec<Pants>,
    pub cuffs: Vec<Cuff>,
}

impl PantsDecompositionGraph {
    /// Checks incidences and connectivity; returns the genus.
    pub fn validate(&self) -> Result<usize, FenchelError> {
        let np = self.pants.len();
        if np == 0 || np % 2 == 1 {
            return Err(FenchelError::Structural(format!(
                "a closed surface needs an even, positive pants count, got {np}"
            )));
        }
        let mut used = vec![[None::<usize>; 3]; np];
        for (ci, cuff) in self.cuffs.iter().enumerate() {
            for inc in cuff.incidences {
                if inc.pants >= np || inc.slot >= 3 {
                    return Err(FenchelError::Structural(format!("cuff {ci} points at missing slot {inc:?}")));
                }
                if let Some(other) = used[inc.pants][inc.slot].replace(ci) {
                    return Err(FenchelError::Structural(format!(
                        "slot {inc:?} used by cuffs {other} and {ci}"
                    )));
                }
            }
            let [s0, s1] = cuff.incidences;
            if s0 == s1 {
                return Err(FenchelError::Structural(format!("cuff {ci} glues a slot to itself")));
            }
            let (m0, m1) = (self.degree(s0), self.degree(s1));
            if m0 != m1 || m0 == 0 {
                return Err(FenchelError::Structural(format!(
                    "cuff {ci} joins slots of degree {m0} and {m1}"
                )));
            }
        }
        if let Some((p, s)) = (0..np).flat_map(|p| (0..3).map(move |s| (p, s))).find(|&(p, s)| used[p][s].is_none()) {
            return Err(FenchelError::Structural(format!("slot {s} of pants {p} is not glued")));
        }
        let (tree, _) = self.spanning_tree();
        if tree.iter().filter(|t| t.is_some()).count() + 1 != np {
            return Err(FenchelError::Structural("pants graph is disconnected".into()));
        }
        Ok(np / 2 + 1)
    }

    pub fn degree(&self, s: SlotRef) -> u32 {
        self.pants[s.pants].degrees[s.slot]
    }

    pub fn genus(&self) -> Result<usize, FenchelError> {
        self.validate()
    }

    /// For each cuff: `Some(parent incidence)` if it is a tree edge of the
    /// BFS tree of the dual graph rooted at a center (lowest index among
    /// pants of least eccentricity), which keeps conjugators short. Also
    /// returns BFS order, starting with the root.
    fn spanning_tree(&self) -> (Vec<Option<usize>>, Vec<usize>) {
        let np = self.pants.len();
        let depth = |root: usize| {
            let (tree, order) = self.bfs_from(root);
            let mut d = vec![0usize; np];
            for &p in &order {
                for (ci, cuff) in self.cuffs.iter().enumerate() {
                    if let Some(side) = tree[ci] {
                        if cuff.incidences[side].pants == p {
                            d[cuff.incidences[1 - side].pants] = d[p] + 1;
                        }
                    }
                }
            }
            d.into_iter().max().unwrap_or(0)
        };
        let root = (0..np).min_by_key(|&r| (depth(r), r)).unwrap_or(0);
        self.bfs_from(root)
    }

    fn bfs_from(&self, root: usize) -> (Vec<Option<usize>>, Vec<usize>) {
        let np = self.pants.len();
        let mut seen = vec![false; np];
        let mut tree = vec![None; self.cuffs.len()];
        let mut order = Vec::new();
        if np == 0 {
            return (tree, order);
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(p) = queue.pop_front() {
            order.push(p);
            for (ci, cuff) in self.cuffs.iter().enumerate() {
                for side in 0..2 {
                    let (me, other) = (cuff.incidences[side], cuff.incidences[1 - side]);
                    if me.pants == p && !seen[other.pants] && tree[ci].is_none() {
                        seen[other.pants] = true;
                        tree[ci] = Some(side);
                        queue.push_back(other.pants);
                    }
                }
            }
        }
        (tree, order)
    }

    /// Two pants glued along all three cuffs.
    pub fn theta() -> Self {
        let s = |pants, slot| SlotRef { pants, slot };
        Self {
            pants: vec![Pants::default(); 2],
            cuffs: (0..3)
                .map(|i| Cuff {
                    incidences: [s(0, i), s(1, i)],
                })
                .collect(),
        }
    }

    /// Genus-g surface as a chain: g one-holed tori (pants with slots 0 and
    /// 1 glued together) hung off a spine of g − 2 pants.
    pub fn closed_chain(g: usize) -> Result<Self, FenchelError> {
        if g < 2 {
            return Err(FenchelError::Domain(format!("closed chain needs genus >= 2, got {g}")));
        }
        let s = |pants, slot| SlotRef { pants, slot };
        let mut pants = vec![Pants::default(); 2 * g - 2];
        pants.iter_mut().enumerate().for_each(|(i, p)| p.base = i);
        let mut cuffs = Vec::new();
        for t in 0..g {
            cuffs.push(Cuff {
                incidences: [s(t, 0), s(t, 1)],
            });
        }
        // spine pants g..2g-3 carry (left, handle, right) in slots 0, 1, 2
        let spine: Vec<usize> = (g..2 * g - 2).collect();
        if spine.is_empty() {
            cuffs.push(Cuff {
                incidences: [s(0, 2), s(1, 2)],
            });
        } else {
            cuffs.push(Cuff {
                incidences: [s(0, 2), s(spine[0], 0)],
            });
            for (j, &q) in spine.iter().enumerate() {
                cuffs.push(Cuff {
                    incidences: [s(q, 1), s(j + 1, 2)],
                });
                let right = if j + 1 < spine.len() { s(spine[j + 1], 0) } else { s(g - 1, 2) };
                cuffs.push(Cuff {
                    incidences: [s(q, 2), right],
                });
            }
        }
        let graph = Self { pants, cuffs };
        graph.validate()?;
        Ok(graph)
    }

    /// Two surfaces of genus `h_left` and `h_right` with two boundary
    /// circles each, glued boundary to boundary. Returns the graph and the
    /// indices of the two joining cuffs.
    pub fn two_piece(h_left: usize, h_right: usize) -> Result<(Self, [usize; 2]), FenchelError> {
        if h_left == 0 || h_right == 0 {
            return Err(FenchelError::Domain("each piece needs genus >= 1".into()));
        }
        let mut graph = Self { pants: Vec::new(), cuffs: Vec::new() };
        let left = graph.push_piece(h_left);
        let right = graph.push_piece(h_right);
        let joins = [graph.cuffs.len(), graph.cuffs.len() + 1];
        for i in 0..2 {
            graph.cuffs.push(Cuff {
                incidences: [left[i], right[i]],
            });
        }
        graph.validate()?;
        Ok((graph, joins))
    }

    /// Appends a genus-h piece with two open boundary slots: a pants holding
    /// both boundaries, then a chain of h self-glued handles.
    fn push_piece(&mut self, h: usize) -> [SlotRef; 2] {
        let s = |pants, slot| SlotRef { pants, slot };
        let add = |graph: &mut Self| {
            let i = graph.pants.len();
            graph.pants.push(Pants { degrees: [1, 1, 1], base: i });
            i
        };
        let top = add(self);
        let handles: Vec<usize> = (0..h).map(|_| add(self)).collect();
        let connectors: Vec<usize> = (1..h).map(|_| add(self)).collect();
        for &q in &handles {
            self.cuffs.push(Cuff {
                incidences: [s(q, 0), s(q, 1)],
            });
        }
        let mut open = s(top, 2);
        for (j, &c) in connectors.iter().enumerate() {
            self.cuffs.push(Cuff { incidences: [open, s(c, 0)] });
            self.cuffs.push(Cuff {
                incidences: [s(c, 1), s(handles[j], 2)],
            });
            open = s(c, 2);
        }
        self.cuffs.push(Cuff {
            incidences: [open, s(handles[h - 1], 2)],
        });
        [s(top, 0), s(top, 1)]
    }
}

/// Complex Fenchel–Nielsen coordinates, one entry per cuff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnCoordinates {
    /// Half-lengths hl(C), Re > 0.
    pub z: Vec<C>,
    /// Twist-bend representatives s(C).
    pub w: Vec<C>,
    /// Bending angles on the bend set; cuffs absent here have θ = 0.
    #[serde(default)]
    pub theta: BTreeMap<usize, f64>,
}

impl FnCoordinates {
    pub fn uniform(cuffs: usize, z: C, w: C) -> Self {
        Self {
            z: vec![z; cuffs],
            w: vec![w; cuffs],
            theta: BTreeMap::new(),
        }
    }

    pub fn bend_set(&self) -> BTreeSet<usize> {
        self.theta.keys().copied().collect()
    }

    pub fn validate(&self, graph: &PantsDecompositionGraph) -> Result<(), FenchelError> {
        let n = graph.cuffs.len();
        if self.z.len() != n || self.w.len() != n {
            return Err(FenchelError::Structural(format!(
                "coordinates cover {} / {} cuffs, graph has {n}",
                self.z.len(),
                self.w.len()
            )));
        }
        if let Some(c) = self.z.iter().position(|z| !(z.re > 0.0) || !z.is_finite()) {
            return Err(FenchelError::Domain(format!("cuff {c}: Re z must be positive")));
        }
        if let Some(c) = self.w.iter().position(|w| !w.is_finite()) {
            return Err(FenchelError::Domain(format!("cuff {c}: w is not finite")));
        }
        if let Some((&c, _)) = self.theta.iter().find(|(&c, t)| c >= n || !t.is_finite()) {
            return Err(FenchelError::Domain(format!("bend angle on missing cuff {c}")));
        }
        Ok(())
    }
}

/// The SL(2,ℂ) pants triple (x, y, (xy)⁻¹) in normal form: x = diag(λ, 1/λ)
/// with λ = e^{hl1}, tr y = 2cosh(hl2), tr xy = −2cosh(hl3), and y having
/// lower-left entry 1.
pub fn pants_representation(hl1: C, hl2: C, hl3: C) -> Result<[Mobius; 3], FenchelError> {
    if [hl1, hl2, hl3].iter().any(|h| !(h.re > 0.0)) {
        return Err(FenchelError::Domain("half-lengths need positive real part".into()));
    }
    let lambda = hl1.exp();
    let gap = lambda - lambda.inv();
    if gap.norm() < 1e-12 {
        return Err(FenchelError::Degenerate("first cuff has trivial translation".into()));
    }
    let y = hl2.cosh() * 2.0;
    let z = -hl3.cosh() * 2.0;
    let p = (z - y / lambda) / gap;
    let s = y - p;
    let q = p * s - 1.0;
    let zero = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    let a = Mobius::new(lambda, zero, zero, lambda.inv())?;
    let b = Mobius::new(p, q, one, s)?;
    let c = (a * b).inverse();
    for (i, m) in [a, b, c].iter().enumerate() {
        if m.kind() != Kind::Loxodromic {
            return Err(FenchelError::Degenerate(format!("pants boundary {i} is {}", m.kind())));
        }
    }
    Ok([a, b, c])
}

/// Frame at the cuff of `g`: sends 0 and ∞ to the repelling and attracting
/// fixed points of `g`, and j to the foot of the common perpendicular from
/// the axis of `next`, with +1 pointing along it.
pub fn cuff_frame(g: &Mobius, next: &Mobius) -> Result<Mobius, FenchelError> {
    let (att, rep) = g.axis()?;
    let m = crate::moebius::frame_for(rep, att)?;
    let inv = m.inverse();
    let (na, nr) = next.axis()?;
    let (u, v) = match (inv.apply(na), inv.apply(nr)) {
        (SpherePoint::Finite(u), SpherePoint::Finite(v)) => (u, v),
        _ => return Err(FenchelError::Degenerate("adjacent cuff axes share an endpoint".into())),
    };
    let mut sigma = (u * v).sqrt();
    if sigma.norm() < 1e-14 {
        return Err(FenchelError::Degenerate("adjacent cuff axes share an endpoint".into()));
    }
    let r = (u / sigma).re;
    if r.abs() < 1e-14 {
        return Err(FenchelError::Degenerate("foot direction is undetermined".into()));
    }
    if r < 0.0 {
        sigma = -sigma;
    }
    let rt = sigma.sqrt();
    let zero = C::new(0.0, 0.0);
    Ok(m * Mobius::new(rt, zero, zero, rt.inv())?)
}

fn pants_dd(hl1: C, hl2: C, hl3: C) -> Result<[DMobius; 3], FenchelError> {
    pants_representation(hl1, hl2, hl3)?;
    let lambda = Dc::from(hl1).exp();
    let gap = lambda - lambda.inv();
    let y = Dc::from(hl2).cosh().scale(2.0);
    let z = -Dc::from(hl3).cosh().scale(2.0);
    let p = (z - y / lambda) / gap;
    let s = y - p;
    let q = p * s - Dc::ONE;
    let a = DMobius::diagonal(lambda);
    let b = DMobius::new(p, q, Dc::ONE, s);
    // conjugate by a diagonal so that y has off-diagonal entries of equal size
    let mu = Dc::from(C::new(q.norm().powf(-0.25), 0.0));
    let d = DMobius::diagonal(mu);
    let (a, b) = (d.conjugate(&a), d.conjugate(&b));
    Ok([a, b, (a * b).inverse()])
}

fn cuff_frame_dd(g: &DMobius, next: &DMobius) -> Result<DMobius, FenchelError> {
    let degenerate = || FenchelError::Degenerate("adjacent cuff axes share an endpoint".into());
    let (att, rep) = g.axis().ok_or_else(|| FenchelError::Degenerate("cuff is not loxodromic".into()))?;
    let m = precise::frame_for(rep, att).ok_or_else(degenerate)?;
    let inv = m.inverse();
    let (na, nr) = next.axis().ok_or_else(|| FenchelError::Degenerate("cuff is not loxodromic".into()))?;
    let (u, v) = match (inv.apply(na), inv.apply(nr)) {
        (DPoint::Finite(u), DPoint::Finite(v)) => (u, v),
        _ => return Err(degenerate()),
    };
    let mut sigma = (u * v).sqrt();
    if sigma.norm() < 1e-14 {
        return Err(degenerate());
    }
    let r = (u / sigma).to_c().re;
    if r.abs() < 1e-14 {
        return Err(FenchelError::Degenerate("foot direction is undetermined".into()));
    }
    if r < 0.0 {
        sigma = -sigma;
    }
    Ok(m * DMobius::diagonal(sigma.sqrt()))
}

/// z ↦ −1/z.
fn flip_dd() -> DMobius {
    DMobius::new(Dc::ZERO, -Dc::ONE, Dc::ONE, Dc::ZERO)
}

fn eval_word_dd(gens: &[DMobius], word: &[i32]) -> DMobius {
    word.iter().fold(DMobius::identity(), |acc, &l| {
        let g = gens[l.unsigned_abs() as usize - 1];
        acc * if l > 0 { g } else { g.inverse() }
    })
}

/// Generators, relators and tree data of the graph-of-groups presentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Presentation {
    pub generator_names: Vec<String>,
    pub relators: Vec<Word>,
    /// Stable letter generator index for each non-tree cuff.
    pub stable_letters: BTreeMap<usize, usize>,
}

impl Presentation {
    pub fn of(graph: &PantsDecompositionGraph) -> Self {
        let np = graph.pants.len();
        let mut names: Vec<String> = (0..np).flat_map(|p| [format!("x{p}"), format!("y{p}")]).collect();
        let (tree, _) = graph.spanning_tree();
        let mut stable_letters = BTreeMap::new();
        let mut relators = Vec::new();
        for (ci, cuff) in graph.cuffs.iter().enumerate() {
            let [s0, s1] = cuff.incidences;
            if tree[ci].is_some() {
                relators.push([slot_word(s0), slot_word(s1)].concat());
            } else {
                let t = names.len() as i32 + 1;
                stable_letters.insert(ci, names.len());
                names.push(format!("t{ci}"));
                relators.push([vec![t], slot_word(s1), vec![-t], slot_word(s0)].concat());
            }
        }
        Self {
            generator_names: names,
            relators,
            stable_letters,
        }
    }
}

/// Word of the boundary element of a slot: x, y or (xy)⁻¹.
pub fn slot_word(s: SlotRef) -> Word {
    let x = 2 * s.pants as i32 + 1;
    let y = x + 1;
    match s.slot {
        0 => vec![x],
        1 => vec![y],
        _ => vec![-y, -x],
    }
}

pub fn eval_word(gens: &[Mobius], word: &[i32]) -> Mobius {
    word.iter().fold(Mobius::identity(), |acc, &l| {
        let g = gens[l.unsigned_abs() as usize - 1];
        acc * if l > 0 { g } else { g.inverse() }
    })
}

/// A representation of the surface group on the graph-of-groups
/// presentation of a pants decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRepresentation {
    pub presentation: Presentation,
    pub generators: Vec<Mobius>,
    /// Extended-precision lifts of `generators`, when built here.
    #[serde(skip)]
    pub generators_dd: Vec<DMobius>,
    pub relator_residual: f64,
    pub coordinates: FnCoordinates,
}

impl SurfaceRepresentation {
    pub fn eval(&self, word: &[i32]) -> Mobius {
        eval_word(&self.generators, word)
    }

    pub fn residual(&self) -> f64 {
        let gens = self.lifts();
        self.presentation
            .relators
            .iter()
            .map(|r| eval_word_dd(&gens, r).distance_from_identity())
            .fold(0.0, f64::max)
    }

    fn lifts(&self) -> Vec<DMobius> {
        if self.generators_dd.len() == self.generators.len() {
            self.generators_dd.clone()
        } else {
            self.generators.iter().map(DMobius::from_mobius).collect()
        }
    }
}

pub fn relator_residual(gens: &[Mobius], relators: &[Word]) -> f64 {
    relators
        .iter()
        .map(|r| eval_word(gens, r).distance_from_identity())
        .fold(0.0, f64::max)
}

fn local_pants(graph: &PantsDecompositionGraph, c: &FnCoordinates, slot_cuff: &[[usize; 3]], p: usize) -> Result<[DMobius; 3], FenchelError> {
    let hl = |s: usize| c.z[slot_cuff[p][s]] * f64::from(graph.pants[p].degrees[s]);
    pants_dd(hl(0), hl(1), hl(2))
}

fn slot_cuffs(graph: &PantsDecompositionGraph) -> Vec<[usize; 3]> {
    let mut out = vec![[0; 3]; graph.pants.len()];
    for (ci, cuff) in graph.cuffs.iter().enumerate() {
        for s in cuff.incidences {
            out[s.pants][s.slot] = ci;
        }
    }
    out
}

/// Builds with a larger relator residual are rejected.
pub const MAX_RELATOR_RESIDUAL: f64 = 1e-8;

/// ρ_{z,w}: pants groups in normal form, conjugated into place along a
/// spanning tree of the dual graph, with stable letters for the other cuffs.
pub fn build_representation(graph: &PantsDecompositionGraph, c: &FnCoordinates) -> Result<SurfaceRepresentation, FenchelError> {
    graph.validate()?;
    c.validate(graph)?;
    let np = graph.pants.len();
    let sc = slot_cuffs(graph);
    let locals: Vec<[DMobius; 3]> = (0..np).map(|p| local_pants(graph, c, &sc, p)).collect::<Result<_, _>>()?;
    let frame = |s: SlotRef| cuff_frame_dd(&locals[s.pants][s.slot], &locals[s.pants][(s.slot + 1) % 3]);
    // X sends the incidence-1 picture to the incidence-0 one
    let gluing = |ci: usize| -> Result<DMobius, FenchelError> {
        let [s0, s1] = graph.cuffs[ci].incidences;
        Ok(frame(s0)? * flip_dd() * DMobius::translation(c.w[ci].into()) * frame(s1)?.inverse())
    };
    let (tree, order) = graph.spanning_tree();
    let mut h: Vec<Option<DMobius>> = vec![None; np];
    h[order[0]] = Some(DMobius::identity());
    for &p in &order {
        let hp = h[p].expect("BFS order visits parents first");
        for (ci, cuff) in graph.cuffs.iter().enumerate() {
            let Some(parent_side) = tree[ci] else { continue };
            if cuff.incidences[parent_side].pants != p {
                continue;
            }
            let child = cuff.incidences[1 - parent_side].pants;
            let x = gluing(ci)?;
            h[child] = Some(if parent_side == 0 { hp * x } else { hp * x.inverse() });
        }
    }
    let presentation = Presentation::of(graph);
    let mut lifts = Vec::with_capacity(presentation.generator_names.len());
    for p in 0..np {
        let hp = h[p].expect("connected");
        lifts.push(hp.conjugate(&locals[p][0]));
        lifts.push(hp.conjugate(&locals[p][1]));
    }
    for &ci in presentation.stable_letters.keys() {
        let [s0, s1] = graph.cuffs[ci].incidences;
        let (h0, h1) = (h[s0.pants].expect("connected"), h[s1.pants].expect("connected"));
        lifts.push(h0 * gluing(ci)? * h1.inverse());
    }
    let mut rep = SurfaceRepresentation {
        presentation,
        generators: lifts.iter().map(DMobius::to_mobius).collect(),
        generators_dd: lifts,
        relator_residual: 0.0,
        coordinates: c.clone(),
    };
    rep.relator_residual = rep.residual();
    if !(rep.relator_residual <= MAX_RELATOR_RESIDUAL) {
        return Err(FenchelError::Degenerate(format!(
            "relator residual {:.3e} exceeds {MAX_RELATOR_RESIDUAL:e}",
            rep.relator_residual
        )));
    }
    Ok(rep)
}

/// Reduces `w` into {αz + β·2πi : α ∈ [0, 1), β ∈ (−1/2, 1/2]}.
pub fn reduce_twist(w: C, z: C) -> C {
    let two_pi = 2.0 * PI;
    // w = α z + β 2πi with α, β real
    let alpha = w.re / z.re;
    let beta = (w.im - alpha * z.im) / two_pi;
    let a = alpha - alpha.floor();
    let mut b = beta - beta.round();
    if b <= -0.5 {
        b += 1.0;
    }
    z * a + C::new(0.0, two_pi * b)
}

/// Reduces Im into (−π, π].
fn reduce_imag(z: C) -> C {
    let two_pi = 2.0 * PI;
    let mut im = z.im.rem_euclid(two_pi);
    if im > PI {
        im -= two_pi;
    }
    C::new(z.re, im)
}

/// Coordinates read back from a representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extracted {
    /// z with Im ∈ (−π, π], w reduced to the lattice domain.
    pub coordinates: FnCoordinates,
    /// w modulo 2πi only; rebuilding from these reproduces the input.
    pub twist_representatives: Vec<C>,
}

/// Solves A e = b over GF(2) with free variables set to 0.
fn solve_gf2(rows: &[Vec<bool>], rhs: &[bool], vars: usize) -> Option<Vec<bool>> {
    let mut m: Vec<(Vec<bool>, bool)> = rows.iter().cloned().zip(rhs.iter().copied()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..vars {
        let Some(k) = (r..m.len()).find(|&k| m[k].0[col]) else { continue };
        m.swap(r, k);
        for k in 0..m.len() {
            if k != r && m[k].0[col] {
                let (src, b) = (m[r].0.clone(), m[r].1);
                m[k].0.iter_mut().zip(&src).for_each(|(x, y)| *x ^= y);
                m[k].1 ^= b;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if m[r..].iter().any(|(_, b)| *b) {
        return None;
    }
    let mut e = vec![false; vars];
    for (i, &col) in pivots.iter().enumerate() {
        e[col] = m[i].1;
    }
    Some(e)
}

/// Recovers (z, w) from a representation built over `graph`.
pub fn extract_coordinates(rep: &SurfaceRepresentation, graph: &PantsDecompositionGraph) -> Result<Extracted, FenchelError> {
    graph.validate()?;
    let pres = Presentation::of(graph);
    if pres.generator_names.len() != rep.generators.len() {
        return Err(FenchelError::Structural("representation does not match the graph".into()));
    }
    let gens = &rep.generators;
    let lifts = rep.lifts();
    let elem = |s: SlotRef| eval_word(gens, &slot_word(s));
    let elem_dd = |s: SlotRef| eval_word_dd(&lifts, &slot_word(s));
    let nc = graph.cuffs.len();
    let np = graph.pants.len();
    let sc = slot_cuffs(graph);

    // half-lengths up to iπ, then fix the iπ ambiguity pants by pants
    let mut base = Vec::with_capacity(nc);
    for cuff in &graph.cuffs {
        let e = elem(cuff.incidences[0]);
        if e.kind() != Kind::Loxodromic {
            return Err(MoebiusError::Classification(e.kind()).into());
        }
        let l = crate::moebius::complex_length_of_trace(elem_dd(cuff.incidences[0]).trace().to_c());
        base.push(l / 2.0);
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for p in 0..np {
        let (x, y) = (lifts[2 * p], lifts[2 * p + 1]);
        let observed = (x.trace() * y.trace() * (x * y).trace()).to_c();
        let model = -(0..3).fold(C::new(8.0, 0.0), |acc, s| acc * base[sc[p][s]].cosh());
        let ratio = observed / model;
        if (ratio.norm() - 1.0).abs() > 1e-6 || ratio.im.abs() > 1e-6 {
            return Err(FenchelError::Degenerate(format!("pants {p} traces do not fit its cuffs")));
        }
        let mut row = vec![false; nc];
        for s in 0..3 {
            row[sc[p][s]] ^= true;
        }
        rows.push(row);
        rhs.push(ratio.re < 0.0);
    }
    let bits = solve_gf2(&rows, &rhs, nc).ok_or_else(|| FenchelError::Degenerate("inconsistent lift signs".into()))?;
    let z: Vec<C> = (0..nc)
        .map(|ci| {
            let m = f64::from(graph.degree(graph.cuffs[ci].incidences[0]));
            let hl = base[ci] + C::new(0.0, if bits[ci] { PI } else { 0.0 });
            reduce_imag(hl / m)
        })
        .collect();

    let mut reps = Vec::with_capacity(nc);
    for (ci, cuff) in graph.cuffs.iter().enumerate() {
        let [s0, s1] = cuff.incidences;
        let next = |s: SlotRef| SlotRef { pants: s.pants, slot: (s.slot + 1) % 3 };
        let f0 = cuff_frame_dd(&elem_dd(s0), &elem_dd(next(s0)))?;
        let mut f1 = cuff_frame_dd(&elem_dd(s1), &elem_dd(next(s1)))?;
        if let Some(&t) = pres.stable_letters.get(&ci) {
            f1 = lifts[t] * f1;
        }
        let t = (flip_dd().inverse() * f0.inverse() * f1).to_mobius();
        let scale = t.a.norm().max(t.d.norm());
        if t.b.norm() > 1e-6 * scale || t.c.norm() > 1e-6 * scale {
            return Err(FenchelError::Degenerate(format!("cuff {ci} frames are not aligned")));
        }
        reps.push(reduce_imag(t.a.ln() * 2.0));
    }
    let w = reps.iter().zip(&z).map(|(&w, &z)| reduce_twist(w, z)).collect();
    Ok(Extracted {
        coordinates: FnCoordinates {
            z,
            w,
            theta: rep.coordinates.theta.clone(),
        },
        twist_representatives: reps,
    })
}

/// Largest bend allowed by the sparse-bending hypothesis.
pub const MAX_BEND: f64 = 3.0 * PI / 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendResult {
    pub representation: SurfaceRepresentation,
    /// Cuffs with |θ| ≥ 3π/4; the bend is computed anyway.
    pub hypothesis_violations: Vec<usize>,
}

/// Rebuilds with w(C) + iθ_C on the bend set of `c`.
pub fn bend(graph: &PantsDecompositionGraph, c: &FnCoordinates) -> Result<BendResult, FenchelError> {
    c.validate(graph)?;
    let mut bent = c.clone();
    let mut hypothesis_violations = Vec::new();
    for (&ci, &th) in &c.theta {
        if th != 0.0 {
            bent.w[ci] += C::new(0.0, th);
        }
        if th.abs() >= MAX_BEND {
            hypothesis_violations.push(ci);
        }
    }
    Ok(BendResult {
        representation: build_representation(graph, &bent)?,
        hypothesis_violations,
    })
}

/// The disc family z(C) = R/2 + τζ_C/2, w(C) = 1 + itθ_C + τη_C/R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRFamily {
    pub r: f64,
    pub epsilon: f64,
    pub zeta: Vec<C>,
    pub eta: Vec<C>,
    #[serde(default)]
    pub theta: BTreeMap<usize, f64>,
    pub tau: C,
    pub t: u8,
}

impl EpsilonRFamily {
    /// ζ = η = 0, τ = 0, t = 0.
    pub fn reference(cuffs: usize, r: f64, epsilon: f64) -> Self {
        Self {
            r,
            epsilon,
            zeta: vec![C::new(0.0, 0.0); cuffs],
            eta: vec![C::new(0.0, 0.0); cuffs],
            theta: BTreeMap::new(),
            tau: C::new(0.0, 0.0),
            t: 0,
        }
    }

    pub fn validate(&self, cuffs: usize) -> Result<(), FenchelError> {
        if !(self.r > 1.0) || !(self.epsilon > 0.0) {
            return Err(FenchelError::Domain("need R > 1 and ε > 0".into()));
        }
        if self.zeta.len() != cuffs || self.eta.len() != cuffs {
            return Err(FenchelError::Structural("ζ and η need one entry per cuff".into()));
        }
        if self.zeta.iter().chain(&self.eta).chain([&self.tau]).any(|x| !(x.norm() < 1.0)) {
            return Err(FenchelError::Domain("ζ, η and τ must lie in the unit disc".into()));
        }
        if self.t > 1 {
            return Err(FenchelError::Domain("t must be 0 or 1".into()));
        }
        Ok(())
    }

    pub fn at(&self, tau: C) -> Self {
        Self { tau, ..self.clone() }
    }

    /// Coordinates at the current τ, t (without disc checks on τ).
    pub fn coordinates_at(&self, tau: C) -> FnCoordinates {
        let n = self.zeta.len();
        let t = f64::from(self.t);
        let z = (0..n).map(|c| tau * self.zeta[c] / 2.0 + self.r / 2.0).collect();
        let w = (0..n)
            .map(|c| {
                let th = self.theta.get(&c).copied().unwrap_or(0.0);
                C::new(1.0, t * th) + tau * self.eta[c] / self.r
            })
            .collect();
        FnCoordinates {
            z,
            w,
            theta: self.theta.clone(),
        }
    }

    pub fn coordinates(&self) -> FnCoordinates {
        self.coordinates_at(self.tau)
    }
}

pub fn family_representation(f: &EpsilonRFamily, graph: &PantsDecompositionGraph) -> Result<SurfaceRepresentation, FenchelError> {
    f.validate(graph.cuffs.len())?;
    build_representation(graph, &f.coordinates())
}

/// K(τ) = (ε̂ + |τ|)/(ε̂ − |τ|).
pub fn k_of_tau(eps_hat: f64, tau: C) -> Result<f64, FenchelError> {
    let r = tau.norm();
    if !(eps_hat > 0.0) || r >= eps_hat {
        return Err(FenchelError::Domain(format!("need |τ| < ε̂, got |τ| = {r}, ε̂ = {eps_hat}")));
    }
    Ok((eps_hat + r) / (eps_hat - r))
}

/// Calls `visit(word, image)` for every freely reduced word of length
/// 1..=max_len, in a fixed order; stops early when `visit` returns false.
pub fn for_each_reduced_word<F: FnMut(&[i32], &Mobius) -> bool>(gens: &[Mobius], max_len: usize, mut visit: F) {
    let n = gens.len() as i32;
    let letters: Vec<i32> = (1..=n).flat_map(|g| [g, -g]).collect();
    let image = |l: i32| {
        let g = gens[l.unsigned_abs() as usize - 1];
        if l > 0 { g } else { g.inverse() }
    };
    let images: Vec<Mobius> = letters.iter().map(|&l| image(l)).collect();
    fn rec<F: FnMut(&[i32], &Mobius) -> bool>(
        word: &mut Vec<i32>,
        acc: Mobius,
        max_len: usize,
        letters: &[i32],
        images: &[Mobius],
        visit: &mut F,
    ) -> bool {
        for (i, &l) in letters.iter().enumerate() {
            if word.last() == Some(&-l) {
                continue;
            }
            let next = acc * images[i];
            word.push(l);
            let go = visit(word, &next) && (word.len() == max_len || rec(word, next, max_len, letters, images, visit));
            word.pop();
            if !go {
                return false;
            }
        }
        true
    }
    if max_len > 0 {
        rec(&mut Vec::new(), Mobius::identity(), max_len, &letters, &images, &mut visit);
    }
}

/// Traces of all reduced words up to `max_len`, in enumeration order.
pub fn word_traces(rep: &SurfaceRepresentation, max_len: usize) -> Vec<C> {
    let mut out = Vec::new();
    for_each_reduced_word(&rep.generators, max_len, |_, m| {
        out.push(m.trace());
        true
    });
    out
}

/// Whether two trace lists agree as multisets up to sign, with relative
/// tolerance `tol`.
pub fn trace_multisets_match(a: &[C], b: &[C], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let key = |x: &C| x.norm();
    let mut bs: Vec<C> = b.to_vec();
    bs.sort_by(|x, y| key(x).total_cmp(&key(y)));
    let keys: Vec<f64> = bs.iter().map(key).collect();
    let mut used = vec![false; bs.len()];
    for x in a {
        let t = tol * x.norm().max(1.0);
        let lo = keys.partition_point(|&k| k < key(x) - t);
        let hit = (lo..bs.len())
            .take_while(|&j| keys[j] <= key(x) + t)
            .find(|&j| !used[j] && ((x - bs[j]).norm() <= t || (x + bs[j]).norm() <= t));
        match hit {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Largest word-by-word trace difference up to sign, relative to max(1, |tr|).
pub fn trace_map_distance(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm().min((x + y).norm()) / x.norm().max(1.0))
        .fold(0.0, f64::max)
}

/// Jørgensen values for all pairs of generators.
pub fn generator_jorgensen(rep: &SurfaceRepresentation) -> Vec<((usize, usize), Jorgensen)> {
    let n = rep.generators.len();
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| ((i, j), jorgensen_test(&rep.generators[i], &rep.generators[j])))
        .collect()
}

/// Smallest step accepted by the holomorphy check.
pub const MIN_STEP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolomorphyReport {
    pub h: f64,
    pub residual_h: f64,
    pub residual_half: f64,
    /// log2(residual(h) / residual(h/2)); absent when both vanish.
    pub observed_order: Option<f64>,
}

fn cr_residual<F: Fn(C) -> Result<C, FenchelError>>(f: &F, h: f64) -> Result<f64, FenchelError> {
    let f0 = f(C::new(0.0, 0.0))?;
    // align each value with f(0) to undo the PSL sign
    let g = |tau: C| -> Result<C, FenchelError> {
        let v = f(tau)?;
        Ok(if (v - f0).norm() <= (v + f0).norm() { v } else { -v })
    };
    let fx = (g(C::new(h, 0.0))? - g(C::new(-h, 0.0))?) / (2.0 * h);
    let fy = (g(C::new(0.0, h))? - g(C::new(0.0, -h))?) / (2.0 * h);
    Ok(((fx + C::i() * fy) / 2.0).norm())
}

fn order_report<F: Fn(C) -> Result<C, FenchelError>>(f: F, h: f64) -> Result<HolomorphyReport, FenchelError> {
    if !(h >= MIN_STEP) {
        return Err(FenchelError::Domain(format!("step {h} below {MIN_STEP}; cancellation dominates")));
    }
    let residual_h = cr_residual(&f, h)?;
    let residual_half = cr_residual(&f, h / 2.0)?;
    let observed_order = (residual_h > 0.0 && residual_half > 0.0).then(|| (residual_h / residual_half).log2());
    Ok(HolomorphyReport {
        h,
        residual_h,
        residual_half,
        observed_order,
    })
}

/// Cauchy–Riemann residual |∂f/∂τ̄| at τ = 0 for f(τ) = tr ρ_τ(word),
/// by central differences, at h and h/2.
pub fn holomorphy_check(f: &EpsilonRFamily, graph: &PantsDecompositionGraph, word: &[i32], h: f64) -> Result<HolomorphyReport, FenchelError> {
    f.validate(graph.cuffs.len())?;
    order_report(|tau| Ok(build_representation(graph, &f.coordinates_at(tau))?.eval(word).trace()), h)
}

/// Control probe: τ ↦ tr ρ_τ̄(word), which is anti-holomorphic.
pub fn conjugate_probe(f: &EpsilonRFamily, graph: &PantsDecompositionGraph, word: &[i32], h: f64) -> Result<HolomorphyReport, FenchelError> {
    f.validate(graph.cuffs.len())?;
    order_report(|tau| Ok(build_representation(graph, &f.coordinates_at(tau.conj()))?.eval(word).trace()), h)
}

/// Longest word length accepted by `limit_set_cloud`.
pub const MAX_CLOUD_WORD: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCloud {
    pub points: Vec<SpherePoint>,
    /// True when the word budget ran out before all lengths were covered.
    pub partial: bool,
    pub words_visited: usize,
}

/// Fixed points of the loxodromic images of reduced words up to
/// `max_word_length`, deduplicated at 1e-6 on the unit sphere.
pub fn limit_set_cloud(rep: &SurfaceRepresentation, max_word_length: usize, max_words: usize) -> Result<LimitCloud, FenchelError> {
    if max_word_length == 0 || max_word_length > MAX_CLOUD_WORD {
        return Err(FenchelError::Domain(format!("word length must lie in 1..={MAX_CLOUD_WORD}")));
    }
    let mut seen: BTreeMap<[i64; 3], SpherePoint> = BTreeMap::new();
    let mut visited = 0usize;
    let mut partial = false;
    for_each_reduced_word(&rep.generators, max_word_length, |_, m| {
        if visited >= max_words {
            partial = true;
            return false;
        }
        visited += 1;
        if m.kind() == Kind::Loxodromic {
            for p in m.fixed_points() {
                let q = p.to_unit_sphere().map(|x| (x * 1e6).round() as i64);
                seen.entry(q).or_insert(p);
            }
        }
        true
    });
    Ok(LimitCloud {
        points: seen.into_values().collect(),
        partial,
        words_visited: visited,
    })
}

/// Best-fit plane through the projected cloud; the residual is the largest
/// distance from a point to the plane (zero for a round circle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub normal: [f64; 3],
    pub offset: f64,
    pub residual: f64,
}

pub fn circle_fit(points: &[SpherePoint]) -> Result<CircleFit, FenchelError> {
    if points.len() < 3 {
        return Err(FenchelError::Domain("circle fit needs three points".into()));
    }
    let xs: Vec<nalgebra::Vector3<f64>> = points.iter().map(|p| p.to_unit_sphere().into()).collect();
    let mean = xs.iter().fold(nalgebra::Vector3::zeros(), |a, x| a + x) / xs.len() as f64;
    let cov = xs.iter().fold(nalgebra::Matrix3::zeros(), |a, x| {
        let d = x - mean;
        a + d * d.transpose()
    });
    let eig = nalgebra::SymmetricEigen::new(cov);
    let i = eig.eigenvalues.imin();
    let n = eig.eigenvectors.column(i).into_owned();
    let offset = n.dot(&mean);
    let residual = xs.iter().map(|x| (n.dot(x) - offset).abs()).fold(0.0, f64::max);
    Ok(CircleFit {
        normal: [n[0], n[1], n[2]],
        offset,
        residual,
    })
}
