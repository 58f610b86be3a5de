//! Finite covers of closed surfaces as permutation representations of the
//! surface group: homomorphism and subgroup counts, primitivity, lifts of
//! the marked curve a₁, cut-and-reglue surgery and amalgamation.
//!
//! Permutations act on sheets `0..n` along paths: the image of a word
//! `s₁s₂…` sends sheet i to the end of the lift of the word starting at i,
//! so `s₁` is applied first.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fenchel::{FnCoordinates, PantsDecompositionGraph};

pub type Perm = Vec<usize>;
pub type Word = Vec<i32>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("refused: {reason} (estimated {estimate} steps)")]
    Refused { reason: String, estimate: f64 },
    #[error("structural error: {0}")]
    Structural(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("fenchel: {0}")]
    Fenchel(#[from] crate::fenchel::FenchelError),
}

/// Brute-force counts stop at this degree and genus.
pub const BRUTE_MAX_DEGREE: usize = 5;
pub const BRUTE_MAX_GENUS: usize = 3;
/// Character-sum counts stop at this degree.
pub const FROBENIUS_MAX_DEGREE: usize = 12;

/// ⟨a₁, b₁, …, a_g, b_g | [a₁,b₁]⋯[a_g,b_g]⟩ with letters a_i = 2i−1,
/// b_i = 2i and negatives for inverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceGroupPresentation {
    pub genus: usize,
}

impl SurfaceGroupPresentation {
    pub fn new(genus: usize) -> Result<Self, CoverError> {
        if genus == 0 {
            return Err(CoverError::Domain("surface group needs genus >= 1".into()));
        }
        Ok(Self { genus })
    }

    pub fn generator_names(&self) -> Vec<String> {
        (1..=self.genus).flat_map(|i| [format!("a{i}"), format!("b{i}")]).collect()
    }

    pub fn relator(&self) -> Word {
        (0..self.genus as i32)
            .flat_map(|i| {
                let (a, b) = (2 * i + 1, 2 * i + 2);
                [a, b, -a, -b]
            })
            .collect()
    }

    /// Parses names like `a1`, `b2^-1`, separated by spaces or `*`.
    pub fn parse_word(&self, text: &str) -> Result<Word, CoverError> {
        let names = self.generator_names();
        text.split(|c: char| c.is_whitespace() || c == '*')
            .filter(|t| !t.is_empty())
            .map(|tok| {
                let (name, inv) = match tok.strip_suffix("^-1") {
                    Some(n) => (n, true),
                    None => (tok, false),
                };
                let i = names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| CoverError::Domain(format!("unknown generator {name:?}")))?;
                let l = i as i32 + 1;
                Ok(if inv { -l } else { l })
            })
            .collect()
    }
}

pub fn identity(n: usize) -> Perm {
    (0..n).collect()
}

/// First `p`, then `q`.
pub fn then(p: &[usize], q: &[usize]) -> Perm {
    p.iter().map(|&i| q[i]).collect()
}

pub fn inverse(p: &[usize]) -> Perm {
    let mut out = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        out[j] = i;
    }
    out
}

/// Sorted cycle lengths.
pub fn cycle_type(p: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = cycles(p).iter().map(Vec::len).collect();
    out.sort_unstable();
    out
}

/// Cycles in order of their smallest element, each starting there.
pub fn cycles(p: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            cyc.push(i);
            i = p[i];
        }
        out.push(cyc);
    }
    out
}

fn is_perm(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&j| j < p.len() && !std::mem::replace(&mut seen[j], true))
}

/// A homomorphism π₁S_g → S_n given by the images of a₁, b₁, ….
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "CoverRecord", try_from = "CoverRecord")]
pub struct PermutationCover {
    pub genus: usize,
    pub degree: usize,
    pub images: Vec<Perm>,
}

/// File form: generator name → 1-based image list.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CoverRecord {
    genus: usize,
    degree: usize,
    images: BTreeMap<String, Vec<usize>>,
}

impl From<PermutationCover> for CoverRecord {
    fn from(c: PermutationCover) -> Self {
        let names = SurfaceGroupPresentation { genus: c.genus }.generator_names();
        Self {
            genus: c.genus,
            degree: c.degree,
            images: names.into_iter().zip(c.images.iter().map(|p| p.iter().map(|i| i + 1).collect())).collect(),
        }
    }
}

impl TryFrom<CoverRecord> for PermutationCover {
    type Error = CoverError;
    fn try_from(r: CoverRecord) -> Result<Self, CoverError> {
        let names = SurfaceGroupPresentation::new(r.genus)?.generator_names();
        if r.images.len() != names.len() {
            return Err(CoverError::Structural(format!("expected {} images", names.len())));
        }
        let mut images = Vec::new();
        for n in &names {
            let img = r.images.get(n).ok_or_else(|| CoverError::Structural(format!("missing image of {n}")))?;
            if img.contains(&0) {
                return Err(CoverError::Structural(format!("image of {n} is not 1-based")));
            }
            images.push(img.iter().map(|i| i - 1).collect());
        }
        let c = PermutationCover {
            genus: r.genus,
            degree: r.degree,
            images,
        };
        c.validate()?;
        Ok(c)
    }
}

impl PermutationCover {
    pub fn new(genus: usize, images: Vec<Perm>) -> Result<Self, CoverError> {
        let degree = images.first().map_or(0, Vec::len);
        let c = Self { genus, degree, images };
        c.validate()?;
        Ok(c)
    }

    pub fn presentation(&self) -> SurfaceGroupPresentation {
        SurfaceGroupPresentation { genus: self.genus }
    }

    /// Relator maps to the identity and the action is transitive.
    pub fn validate(&self) -> Result<(), CoverError> {
        SurfaceGroupPresentation::new(self.genus)?;
        if self.degree == 0 {
            return Err(CoverError::Domain("degree must be positive".into()));
        }
        if self.images.len() != 2 * self.genus || self.images.iter().any(|p| p.len() != self.degree || !is_perm(p)) {
            return Err(CoverError::Structural("images must be 2g permutations of 0..n".into()));
        }
        if self.word_image(&self.presentation().relator()) != identity(self.degree) {
            return Err(CoverError::Structural("relator image is not the identity".into()));
        }
        if !self.is_transitive() {
            return Err(CoverError::Structural("image group is not transitive".into()));
        }
        Ok(())
    }

    pub fn word_image(&self, word: &[i32]) -> Perm {
        word.iter().fold(identity(self.degree), |acc, &l| {
            let p = &self.images[l.unsigned_abs() as usize - 1];
            if l > 0 { then(&acc, p) } else { then(&acc, &inverse(p)) }
        })
    }

    pub fn is_transitive(&self) -> bool {
        orbit(&self.images, 0).len() == self.degree
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degree as i64 * (2 - 2 * self.genus as i64)
    }

    pub fn cover_genus(&self) -> usize {
        (2 - self.euler_characteristic()) as usize / 2
    }

    /// Relabelled so that the tuple of images is lexicographically least
    /// among labellings by breadth-first search from a basepoint. Returns
    /// the canonical cover and the number of basepoints attaining it, which
    /// is the order of the centralizer of the image.
    pub fn canonical(&self) -> (PermutationCover, usize) {
        let (images, aut) = canonical_images(&self.images, self.degree);
        (
            Self {
                genus: self.genus,
                degree: self.degree,
                images,
            },
            aut,
        )
    }
}

fn orbit(gens: &[Perm], start: usize) -> Vec<usize> {
    let n = gens.first().map_or(1, Vec::len);
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut out = vec![start];
    let mut k = 0;
    while k < out.len() {
        let v = out[k];
        k += 1;
        for g in gens {
            if !std::mem::replace(&mut seen[g[v]], true) {
                out.push(g[v]);
            }
        }
    }
    out
}

fn canonical_images(images: &[Perm], n: usize) -> (Vec<Perm>, usize) {
    let mut best: Option<Vec<Perm>> = None;
    let mut count = 0;
    for b in 0..n {
        let order = orbit(images, b);
        if order.len() != n {
            continue;
        }
        let mut label = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            label[v] = k;
        }
        let relabelled: Vec<Perm> = images
            .iter()
            .map(|p| {
                let mut q = vec![0; n];
                for v in 0..n {
                    q[label[v]] = label[p[v]];
                }
                q
            })
            .collect();
        match &best {
            Some(cur) if relabelled > *cur => {}
            Some(cur) if relabelled == *cur => count += 1,
            _ => {
                best = Some(relabelled);
                count = 1;
            }
        }
    }
    (best.unwrap_or_else(|| images.to_vec()), count)
}

/// S_n as an indexed multiplication table.
struct SymmetricGroup {
    elems: Vec<Perm>,
    /// mul[x·m + y] = first x, then y
    mul: Vec<u32>,
    inv: Vec<u32>,
    id: u32,
}

impl SymmetricGroup {
    fn new(n: usize) -> Self {
        let mut elems = Vec::new();
        let mut p = identity(n);
        loop {
            elems.push(p.clone());
            if !next_permutation(&mut p) {
                break;
            }
        }
        let index: HashMap<Perm, u32> = elems.iter().enumerate().map(|(i, p)| (p.clone(), i as u32)).collect();
        let m = elems.len();
        let mut mul = vec![0; m * m];
        for x in 0..m {
            for y in 0..m {
                mul[x * m + y] = index[&then(&elems[x], &elems[y])];
            }
        }
        let inv = elems.iter().map(|p| index[&inverse(p)]).collect();
        let id = index[&identity(n)];
        Self { elems, mul, inv, id }
    }

    fn m(&self) -> usize {
        self.elems.len()
    }

    fn mul(&self, x: u32, y: u32) -> u32 {
        self.mul[x as usize * self.m() + y as usize]
    }

    fn comm(&self, a: u32, b: u32) -> u32 {
        let ab = self.mul(a, b);
        self.mul(self.mul(ab, self.inv[a as usize]), self.inv[b as usize])
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Brute,
    Frobenius,
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |a, k| a * k)
}

/// |Hom(π₁S_g, S_n)|.
pub fn count_homomorphisms(genus: usize, n: usize, method: CountMethod) -> Result<BigUint, CoverError> {
    SurfaceGroupPresentation::new(genus)?;
    if n == 0 {
        return Err(CoverError::Domain("degree must be positive".into()));
    }
    match method {
        CountMethod::Brute => count_brute(genus, n),
        CountMethod::Frobenius => count_frobenius(genus, n),
    }
}

/// Tabulates [a, b] over all pairs, then counts g-tuples of pairs whose
/// commutators multiply to 1 by convolution.
fn count_brute(genus: usize, n: usize) -> Result<BigUint, CoverError> {
    if n > BRUTE_MAX_DEGREE || genus > BRUTE_MAX_GENUS {
        let m = factorial(n).to_f64().unwrap_or(f64::INFINITY);
        return Err(CoverError::Refused {
            reason: format!("brute force needs n <= {BRUTE_MAX_DEGREE} and g <= {BRUTE_MAX_GENUS}"),
            estimate: m * m * genus as f64,
        });
    }
    let g = SymmetricGroup::new(n);
    let m = g.m();
    let mut dist = vec![0u128; m];
    for a in 0..m as u32 {
        for b in 0..m as u32 {
            dist[g.comm(a, b) as usize] += 1;
        }
    }
    let mut acc = vec![0u128; m];
    acc[g.id as usize] = 1;
    for _ in 0..genus {
        let mut next = vec![0u128; m];
        for (x, &cx) in acc.iter().enumerate() {
            if cx == 0 {
                continue;
            }
            for (y, &cy) in dist.iter().enumerate() {
                if cy != 0 {
                    next[g.mul(x as u32, y as u32) as usize] += cx * cy;
                }
            }
        }
        acc = next;
    }
    Ok(BigUint::from(acc[g.id as usize]))
}

/// Integer partitions of n in decreasing order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            rec(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Degree of the irreducible character of S_n for `shape`, by hook lengths.
pub fn character_degree(shape: &[usize]) -> BigUint {
    let n: usize = shape.iter().sum();
    let mut hooks = BigUint::one();
    for (i, &row) in shape.iter().enumerate() {
        for j in 0..row {
            let below = shape[i + 1..].iter().filter(|&&r| r > j).count();
            hooks *= (row - j - 1 + below + 1) as u64;
        }
    }
    factorial(n) / hooks
}

/// |G|^{2g−1} Σ_χ χ(1)^{2−2g}.
fn count_frobenius(genus: usize, n: usize) -> Result<BigUint, CoverError> {
    if n > FROBENIUS_MAX_DEGREE {
        return Err(CoverError::Refused {
            reason: format!("character sum limited to n <= {FROBENIUS_MAX_DEGREE}"),
            estimate: partitions(n.min(60)).len() as f64,
        });
    }
    let order = BigRational::from_integer(factorial(n).into());
    let e = 2 * genus - 2;
    let sum = partitions(n).iter().fold(BigRational::zero(), |acc, shape| {
        let d = BigRational::from_integer(character_degree(shape).into());
        acc + num_traits::pow(d, e).recip()
    });
    let total = num_traits::pow(order, 2 * genus - 1) * sum;
    if !total.is_integer() {
        return Err(CoverError::Structural("character sum is not an integer".into()));
    }
    Ok(total.to_integer().to_biguint().expect("nonnegative"))
}

/// Big integers as decimal strings.
pub mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let t = String::deserialize(d)?;
        t.parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverBudget {
    pub max_seconds: f64,
    pub threads: usize,
}

impl Default for CoverBudget {
    fn default() -> Self {
        Self {
            max_seconds: 300.0,
            threads: 1,
        }
    }
}

/// Transitive homomorphisms up to simultaneous conjugation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverEnumeration {
    pub genus: usize,
    pub degree: usize,
    /// Canonical representatives, sorted.
    pub covers: Vec<PermutationCover>,
    /// Σ n!/|C(c)|: the number of transitive homomorphisms.
    #[serde(with = "decimal")]
    pub transitive_homomorphisms: BigUint,
    /// Σ n/|C(c)|: the number of index-n subgroups, equal to the line above
    /// divided by (n−1)!.
    #[serde(with = "decimal")]
    pub subgroups: BigUint,
    pub partial: bool,
}

/// Enumerates covers of degree n. Tuples are sharded by the conjugacy class
/// of the image of a₁, which is fixed to a class representative.
pub fn enumerate_covers(genus: usize, n: usize, budget: &CoverBudget) -> Result<CoverEnumeration, CoverError> {
    SurfaceGroupPresentation::new(genus)?;
    if n == 0 {
        return Err(CoverError::Domain("degree must be positive".into()));
    }
    if n > BRUTE_MAX_DEGREE || genus > BRUTE_MAX_GENUS {
        let m = factorial(n).to_f64().unwrap_or(f64::INFINITY);
        return Err(CoverError::Refused {
            reason: format!("enumeration needs n <= {BRUTE_MAX_DEGREE} and g <= {BRUTE_MAX_GENUS}"),
            estimate: m.powi(2 * genus as i32 - 1),
        });
    }
    let g = SymmetricGroup::new(n);
    let m = g.m();
    // by_comm[a·m + c] = all b with [a, b] = c
    let mut by_comm: Vec<Vec<u32>> = vec![Vec::new(); m * m];
    for a in 0..m as u32 {
        for b in 0..m as u32 {
            by_comm[a as usize * m + g.comm(a, b) as usize].push(b);
        }
    }
    let mut reps: BTreeMap<Vec<usize>, u32> = BTreeMap::new();
    for (i, p) in g.elems.iter().enumerate() {
        reps.entry(cycle_type(p)).or_insert(i as u32);
    }
    let shards: Vec<u32> = reps.into_values().collect();
    let deadline = Instant::now() + Duration::from_secs_f64(budget.max_seconds.max(0.0));
    let workers = budget.threads.clamp(1, shards.len());
    let ctx = EnumCtx {
        g: &g,
        by_comm: &by_comm,
        genus,
        n,
        deadline,
    };
    let results: Vec<(BTreeMap<Vec<Perm>, usize>, bool)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let mine: Vec<u32> = shards.iter().copied().skip(w).step_by(workers).collect();
                let ctx = &ctx;
                s.spawn(move || {
                    let mut found = BTreeMap::new();
                    let mut partial = false;
                    for a1 in mine {
                        if !ctx.shard(a1, &mut found) {
                            partial = true;
                            break;
                        }
                    }
                    (found, partial)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut all = BTreeMap::new();
    let mut partial = false;
    for (found, p) in results {
        partial |= p;
        all.extend(found);
    }
    let nf = factorial(n);
    let mut homs = BigUint::zero();
    let mut subgroups = BigUint::zero();
    for &aut in all.values() {
        homs += &nf / aut;
        subgroups += BigUint::from(n / aut);
    }
    Ok(CoverEnumeration {
        genus,
        degree: n,
        covers: all
            .into_keys()
            .map(|images| PermutationCover {
                genus,
                degree: n,
                images,
            })
            .collect(),
        transitive_homomorphisms: homs,
        subgroups,
        partial,
    })
}

struct EnumCtx<'a> {
    g: &'a SymmetricGroup,
    by_comm: &'a [Vec<u32>],
    genus: usize,
    n: usize,
    deadline: Instant,
}

impl EnumCtx<'_> {
    /// All tuples with a₁ = `a1`; false when the deadline passed.
    fn shard(&self, a1: u32, found: &mut BTreeMap<Vec<Perm>, usize>) -> bool {
        let mut tuple = vec![a1];
        let mut steps = 0u64;
        for b1 in 0..self.g.m() as u32 {
            if Instant::now() > self.deadline {
                return false;
            }
            tuple.push(b1);
            let ok = self.pairs(self.g.comm(a1, b1), &mut tuple, found, &mut steps);
            tuple.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn pairs(&self, prefix: u32, tuple: &mut Vec<u32>, found: &mut BTreeMap<Vec<Perm>, usize>, steps: &mut u64) -> bool {
        let m = self.g.m();
        *steps += 1;
        if steps.is_multiple_of(1024) && Instant::now() > self.deadline {
            return false;
        }
        if tuple.len() == 2 * self.genus {
            if prefix == self.g.id {
                self.record(tuple, found);
            }
            return true;
        }
        if tuple.len() == 2 * self.genus - 2 {
            let need = self.g.inv[prefix as usize];
            for a in 0..m as u32 {
                for &b in &self.by_comm[a as usize * m + need as usize] {
                    tuple.extend([a, b]);
                    self.record(tuple, found);
                    tuple.truncate(tuple.len() - 2);
                }
            }
            return true;
        }
        for a in 0..m as u32 {
            for b in 0..m as u32 {
                tuple.extend([a, b]);
                let ok = self.pairs(self.g.mul(prefix, self.g.comm(a, b)), tuple, found, steps);
                tuple.truncate(tuple.len() - 2);
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    fn record(&self, tuple: &[u32], found: &mut BTreeMap<Vec<Perm>, usize>) {
        let images: Vec<Perm> = tuple.iter().map(|&i| self.g.elems[i as usize].clone()).collect();
        if orbit(&images, 0).len() != self.n {
            return;
        }
        let (canon, aut) = canonical_images(&images, self.n);
        found.entry(canon).or_insert(aut);
    }
}

/// Whether the image group acts primitively: for each j the smallest block
/// containing {0, j} must be everything.
pub fn is_primitive(c: &PermutationCover) -> Result<bool, CoverError> {
    if !c.is_transitive() {
        return Err(CoverError::Structural("is_primitive needs a transitive cover".into()));
    }
    Ok((1..c.degree).all(|j| minimal_block(&c.images, j).len() == c.degree))
}

/// The block containing 0 in the finest block system joining 0 and j.
pub fn minimal_block(gens: &[Perm], j: usize) -> Vec<usize> {
    let n = gens.first().map_or(1, Vec::len);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut queue = vec![(0, j)];
    while let Some((x, y)) = queue.pop() {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        if rx == ry {
            continue;
        }
        parent[ry] = rx;
        for g in gens {
            queue.push((g[x], g[y]));
        }
    }
    let r0 = find(&mut parent, 0);
    (0..n).filter(|&v| find(&mut parent, v) == r0).collect()
}

/// Cycle type of the image of `word`: the degrees of its lifts.
pub fn lift_degrees(c: &PermutationCover, word: &[i32]) -> Vec<usize> {
    cycle_type(&c.word_image(word))
}

/// Whether the lift of a₁ through `sheet` is nonzero in H₁(cover; ℤ/2),
/// i.e. does not separate.
pub fn lift_is_nonseparating(c: &PermutationCover, sheet: usize) -> bool {
    let n = c.degree;
    let edges = 2 * c.genus * n;
    let edge = |gen: usize, v: usize| gen * n + v;
    // face at sheet i: the relator read from i; each letter crosses one edge
    let relator = c.presentation().relator();
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let words = edges.div_ceil(64);
    for i in 0..n {
        let mut row = vec![0u64; words];
        let mut v = i;
        for &l in &relator {
            let gen = l.unsigned_abs() as usize - 1;
            let e = if l > 0 {
                let e = edge(gen, v);
                v = c.images[gen][v];
                e
            } else {
                v = inverse(&c.images[gen])[v];
                edge(gen, v)
            };
            row[e / 64] ^= 1 << (e % 64);
        }
        rows.push(row);
    }
    let mut target = vec![0u64; words];
    let mut v = sheet;
    loop {
        let e = edge(0, v);
        target[e / 64] ^= 1 << (e % 64);
        v = c.images[0][v];
        if v == sheet {
            break;
        }
    }
    !in_span_gf2(rows, target, edges)
}

fn in_span_gf2(mut rows: Vec<Vec<u64>>, mut target: Vec<u64>, bits: usize) -> bool {
    let get = |r: &[u64], b: usize| r[b / 64] >> (b % 64) & 1 == 1;
    let mut r = 0;
    for b in 0..bits {
        let Some(k) = (r..rows.len()).find(|&k| get(&rows[k], b)) else { continue };
        rows.swap(r, k);
        let pivot = rows[r].clone();
        for row in rows.iter_mut().skip(r + 1) {
            if get(row, b) {
                row.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
            }
        }
        if get(&target, b) {
            target.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
        }
        r += 1;
    }
    target.iter().all(|&w| w == 0)
}

/// m_n and its stratification m_n(k) by lift degrees of a marked curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalCounts {
    pub genus: usize,
    pub degree: usize,
    pub curve: Word,
    pub covers: usize,
    /// Number of primitive classes, m_n.
    pub maximal: usize,
    /// (k, m_n(k)) for k = 1..=n.
    pub by_lift_degree: Vec<(usize, usize)>,
    /// m_n(1) ≥ m_n(n).
    pub inequality_holds: bool,
    pub partial: bool,
}

pub fn count_maximal(genus: usize, n: usize, curve: &[i32], budget: &CoverBudget) -> Result<MaximalCounts, CoverError> {
    let pres = SurfaceGroupPresentation::new(genus)?;
    if curve.is_empty() || curve.iter().any(|l| l.unsigned_abs() as usize > 2 * pres.genus || *l == 0) {
        return Err(CoverError::Domain("curve must be a nonempty word in the generators".into()));
    }
    let e = enumerate_covers(genus, n, budget)?;
    let mut maximal = 0;
    let mut by_k = vec![0usize; n + 1];
    for c in &e.covers {
        if !is_primitive(c)? {
            continue;
        }
        maximal += 1;
        let mut degs = lift_degrees(c, curve);
        degs.dedup();
        for k in degs {
            by_k[k] += 1;
        }
    }
    Ok(MaximalCounts {
        genus,
        degree: n,
        curve: curve.to_vec(),
        covers: e.covers.len(),
        maximal,
        inequality_holds: by_k[1] >= by_k[n],
        by_lift_degree: (1..=n).map(|k| (k, by_k[k])).collect(),
        partial: e.partial,
    })
}

/// A closed surface glued from copies of the base 4g-gon. Face i's side
/// labelled x (read forward) is glued to the side labelled x⁻¹ of face
/// `sides[x][i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluedSurface {
    pub base_genus: usize,
    pub sides: Vec<Perm>,
}

/// Side gluings of the lifted relator polygons, plus for each generator the
/// face owning the backward side of each edge.
fn gluing_data(c: &PermutationCover) -> (Vec<Perm>, Vec<Perm>) {
    let n = c.degree;
    let ng = 2 * c.genus;
    let inv: Vec<Perm> = c.images.iter().map(|p| inverse(p)).collect();
    let mut fwd_edge = vec![vec![0; n]; ng];
    let mut bwd_owner = vec![vec![0; n]; ng];
    let relator = c.presentation().relator();
    for i in 0..n {
        let mut v = i;
        for &l in &relator {
            let x = l.unsigned_abs() as usize - 1;
            if l > 0 {
                fwd_edge[x][i] = v;
                v = c.images[x][v];
            } else {
                v = inv[x][v];
                bwd_owner[x][v] = i;
            }
        }
    }
    let sides = (0..ng).map(|x| (0..n).map(|i| bwd_owner[x][fwd_edge[x][i]]).collect()).collect();
    (sides, bwd_owner)
}

impl GluedSurface {
    pub fn from_cover(c: &PermutationCover) -> Self {
        Self {
            base_genus: c.genus,
            sides: gluing_data(c).0,
        }
    }

    pub fn faces(&self) -> usize {
        self.sides.first().map_or(0, Vec::len)
    }

    /// Positions of x and x⁻¹ in the relator.
    fn positions(&self) -> Vec<(usize, usize)> {
        let relator = SurfaceGroupPresentation { genus: self.base_genus }.relator();
        (1..=2 * self.base_genus as i32)
            .map(|x| {
                let f = relator.iter().position(|&l| l == x).expect("letter present");
                let b = relator.iter().position(|&l| l == -x).expect("letter present");
                (f, b)
            })
            .collect()
    }

    /// Vertex class of every corner (face·4g + position); corner p of a face
    /// is where side p starts.
    fn corner_classes(&self) -> (Vec<usize>, usize) {
        let len = 4 * self.base_genus;
        let f = self.faces();
        let mut parent: Vec<usize> = (0..f * len).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut union = |a: usize, b: usize| {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        };
        for (x, &(fp, bp)) in self.positions().iter().enumerate() {
            for i in 0..f {
                let j = self.sides[x][i];
                union(i * len + fp, j * len + (bp + 1) % len);
                union(i * len + (fp + 1) % len, j * len + bp);
            }
        }
        let mut label = HashMap::new();
        let classes: Vec<usize> = (0..f * len)
            .map(|c| {
                let r = find(&mut parent, c);
                let next = label.len();
                *label.entry(r).or_insert(next)
            })
            .collect();
        (classes, label.len())
    }

    pub fn vertices(&self) -> usize {
        self.corner_classes().1
    }

    pub fn is_connected(&self) -> bool {
        self.faces() > 0 && orbit(&self.sides, 0).len() == self.faces()
    }

    /// F − E + V with E = 2g·F.
    pub fn euler_characteristic(&self) -> i64 {
        let f = self.faces() as i64;
        f - 2 * self.base_genus as i64 * f + self.vertices() as i64
    }

    pub fn genus(&self) -> Result<usize, CoverError> {
        if !self.is_connected() {
            return Err(CoverError::Structural("glued surface is disconnected".into()));
        }
        Ok(((2 - self.euler_characteristic()) / 2) as usize)
    }

    /// Every vertex has a full 4g corners around it.
    pub fn is_unbranched(&self) -> bool {
        self.vertices() == self.faces()
    }

    /// Reads the surface as a cover of the base, labelling each vertex by
    /// the face whose first corner lies there.
    pub fn to_cover(&self) -> Result<PermutationCover, CoverError> {
        if !self.is_unbranched() {
            return Err(CoverError::Structural("glued surface is branched over the base vertex".into()));
        }
        let len = 4 * self.base_genus;
        let f = self.faces();
        let (classes, _) = self.corner_classes();
        let mut name = vec![usize::MAX; f];
        for i in 0..f {
            name[classes[i * len]] = i;
        }
        let vertex = |i: usize, p: usize| name[classes[i * len + p % len]];
        let mut images = vec![vec![0; f]; 2 * self.base_genus];
        for (x, &(fp, _)) in self.positions().iter().enumerate() {
            for i in 0..f {
                images[x][vertex(i, fp)] = vertex(i, fp + 1);
            }
        }
        PermutationCover::new(self.base_genus, images)
    }
}

/// A cover cut open along all lifts of a₁: each cycle of the image of a₁
/// leaves a `+` circle (forward sides) and a `−` circle (backward sides).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutCover {
    pub cover: PermutationCover,
    pub boundary: Vec<Vec<usize>>,
}

pub fn cut(c: &PermutationCover) -> CutCover {
    CutCover {
        cover: c.clone(),
        boundary: cycles(&c.images[0]),
    }
}

/// Glue the `+` circle of boundary cycle `plus` to the `−` circle of
/// `minus`, rotated by `rotation` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryPair {
    pub plus: usize,
    pub minus: usize,
    pub rotation: usize,
}

impl CutCover {
    pub fn identity_matching(&self) -> Vec<BoundaryPair> {
        (0..self.boundary.len())
            .map(|i| BoundaryPair {
                plus: i,
                minus: i,
                rotation: 0,
            })
            .collect()
    }

    /// The sheet map h sending each `+` edge to the `−` edge it meets.
    fn edge_map(&self, matching: &[BoundaryPair]) -> Result<Perm, CoverError> {
        let nb = self.boundary.len();
        let mut plus_seen = vec![false; nb];
        let mut minus_seen = vec![false; nb];
        let mut h = vec![usize::MAX; self.cover.degree];
        for pair in matching {
            if pair.plus >= nb || pair.minus >= nb {
                return Err(CoverError::Structural(format!("matching refers to a missing boundary in {pair:?}")));
            }
            if std::mem::replace(&mut plus_seen[pair.plus], true) || std::mem::replace(&mut minus_seen[pair.minus], true) {
                return Err(CoverError::Structural("matching uses a boundary twice".into()));
            }
            let (c, d) = (&self.boundary[pair.plus], &self.boundary[pair.minus]);
            if c.len() != d.len() {
                return Err(CoverError::Structural(format!(
                    "boundaries of degree {} and {} cannot be glued",
                    c.len(),
                    d.len()
                )));
            }
            for (t, &v) in c.iter().enumerate() {
                h[v] = d[(t + pair.rotation) % d.len()];
            }
        }
        if plus_seen.contains(&false) {
            return Err(CoverError::Structural("matching leaves a boundary open".into()));
        }
        Ok(h)
    }
}

/// Reglues a cut cover by a degree-preserving matching.
pub fn rejoin(cut: &CutCover, matching: &[BoundaryPair]) -> Result<GluedSurface, CoverError> {
    let h = cut.edge_map(matching)?;
    let (mut sides, bwd) = gluing_data(&cut.cover);
    // face i's forward a₁ side is edge i
    sides[0] = (0..cut.cover.degree).map(|i| bwd[0][h[i]]).collect();
    Ok(GluedSurface {
        base_genus: cut.cover.genus,
        sides,
    })
}

/// Two covers cut along one lift of a₁ each and glued crosswise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmalgamatedSurface {
    pub left: PermutationCover,
    pub right: PermutationCover,
    pub k: usize,
    /// The chosen lifts, as cycles of sheets.
    pub left_lift: Vec<usize>,
    pub right_lift: Vec<usize>,
    pub euler_characteristic: i64,
    /// Genus from the Euler characteristic of the glued surface.
    pub genus: usize,
    /// n(2g₀ − 1), reported alongside for comparison.
    pub formula_genus: usize,
    /// The glued surface as a cover of the base of degree 2n.
    pub cover: PermutationCover,
    pub graph: PantsDecompositionGraph,
    pub coordinates_template: FnCoordinates,
    /// Cuffs of the graph along which the two pieces meet.
    pub bend_cuffs: [usize; 2],
    pub epsilon: f64,
    pub r: f64,
}

/// First degree-k lift of a₁ that does not separate; errors when none has
/// degree k, or when all of degree k separate.
pub fn choose_lift(c: &PermutationCover, k: usize) -> Result<Vec<usize>, CoverError> {
    let of_degree: Vec<Vec<usize>> = cycles(&c.images[0]).into_iter().filter(|cyc| cyc.len() == k).collect();
    if of_degree.is_empty() {
        return Err(CoverError::Precondition(format!("a1 has no degree-{k} lift")));
    }
    of_degree
        .into_iter()
        .find(|cyc| lift_is_nonseparating(c, cyc[0]))
        .ok_or_else(|| CoverError::Precondition(format!("every degree-{k} lift of a1 separates; instance skipped")))
}

pub fn amalgamate(left: &PermutationCover, right: &PermutationCover, k: usize, epsilon: f64, r: f64) -> Result<AmalgamatedSurface, CoverError> {
    left.validate()?;
    right.validate()?;
    if left.genus != right.genus || left.degree != right.degree {
        return Err(CoverError::Precondition("covers need the same base genus and degree".into()));
    }
    if !(epsilon > 0.0) || !(r > 1.0) {
        return Err(CoverError::Domain("need ε > 0 and R > 1".into()));
    }
    let (n, g0) = (left.degree, left.genus);
    let cl = choose_lift(left, k)?;
    let cr = choose_lift(right, k)?;
    let (ls, lb) = gluing_data(left);
    let (rs, rb) = gluing_data(right);
    let mut sides: Vec<Perm> = ls.iter().zip(&rs).map(|(a, b)| a.iter().copied().chain(b.iter().map(|j| j + n)).collect()).collect();
    for (&j, &jr) in cl.iter().zip(&cr) {
        sides[0][j] = rb[0][jr] + n;
        sides[0][jr + n] = lb[0][j];
    }
    let glued = GluedSurface { base_genus: g0, sides };
    let genus = glued.genus()?;
    let cover = glued.to_cover()?;
    let piece = n * (g0 - 1);
    let (graph, bend_cuffs) = PantsDecompositionGraph::two_piece(piece, piece)?;
    let nc = graph.cuffs.len();
    let mut coordinates_template = FnCoordinates::uniform(nc, num_complex::Complex64::new(r / 2.0, 0.0), num_complex::Complex64::new(1.0, 0.0));
    for &ci in &bend_cuffs {
        coordinates_template.w[ci] = num_complex::Complex64::new(1.0, std::f64::consts::FRAC_PI_2);
    }
    Ok(AmalgamatedSurface {
        left: left.clone(),
        right: right.clone(),
        k,
        left_lift: cl,
        right_lift: cr,
        euler_characteristic: glued.euler_characteristic(),
        genus,
        formula_genus: n * (2 * g0 - 1),
        cover,
        graph,
        coordinates_template,
        bend_cuffs,
        epsilon,
        r,
    })
}
