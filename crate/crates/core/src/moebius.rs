//! PSL(2,ℂ) acting on the Riemann sphere and the upper half-space model of
//! hyperbolic 3-space, with a bilipschitz harness for piecewise geodesics.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod precise;

pub type C = Complex64;

/// Trace tolerance used by classification.
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoebiusError {
    #[error("singular matrix (determinant {0})")]
    Singular(C),
    #[error("expected a loxodromic element, got {0}")]
    Classification(Kind),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Conjugacy type of an element, read from its trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Identity,
    Parabolic,
    Elliptic,
    Loxodromic,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Identity => "identity",
            Kind::Parabolic => "parabolic",
            Kind::Elliptic => "elliptic",
            Kind::Loxodromic => "loxodromic",
        };
        f.write_str(s)
    }
}

/// A point of ℂ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(C),
    Infinity,
}

impl SpherePoint {
    pub fn finite(self) -> Option<C> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// Chordal distance on the unit sphere (diameter 2).
    pub fn chordal(self, other: SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
            }
        }
    }

    /// Inverse stereographic projection onto the unit sphere.
    pub fn to_unit_sphere(self) -> [f64; 3] {
        match self {
            SpherePoint::Infinity => [0.0, 0.0, 1.0],
            SpherePoint::Finite(z) => {
                let n = 1.0 + z.norm_sqr();
                [2.0 * z.re / n, 2.0 * z.im / n, (z.norm_sqr() - 1.0) / n]
            }
        }
    }
}

impl From<C> for SpherePoint {
    fn from(z: C) -> Self {
        SpherePoint::Finite(z)
    }
}

/// A point (z, t) of upper half-space, t > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperPoint {
    pub z: C,
    pub t: f64,
}

impl UpperPoint {
    pub const J: UpperPoint = UpperPoint {
        z: C::new(0.0, 0.0),
        t: 1.0,
    };

    pub fn new(z: C, t: f64) -> Result<Self, MoebiusError> {
        if !(t > 0.0) || !t.is_finite() || !z.is_finite() {
            return Err(MoebiusError::Domain(format!("({z}, {t}) is not in upper half-space")));
        }
        Ok(Self { z, t })
    }

    /// Hyperbolic distance.
    pub fn distance(self, other: UpperPoint) -> f64 {
        let num = (self.z - other.z).norm_sqr() + (self.t - other.t).powi(2);
        2.0 * (num.sqrt() / (2.0 * (self.t * other.t).sqrt())).asinh()
    }
}

fn det(a: C, b: C, c: C, d: C) -> C {
    a * d - b * c
}

/// Spectral norm of a 2×2 complex matrix.
fn op_norm(m: [C; 4]) -> f64 {
    let f2: f64 = m.iter().map(|x| x.norm_sqr()).sum();
    let dn = det(m[0], m[1], m[2], m[3]).norm();
    ((f2 + (f2 * f2 - 4.0 * dn * dn).max(0.0).sqrt()) / 2.0).sqrt()
}

/// An element of PSL(2,ℂ), stored with determinant 1 and the first nonzero
/// entry having argument in [0, π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl Mobius {
    pub fn new(a: C, b: C, c: C, d: C) -> Result<Self, MoebiusError> {
        let det = det(a, b, c, d);
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if det.norm() < f64::MIN_POSITIVE || !det.is_finite() || !scale.is_finite() {
            return Err(MoebiusError::Singular(det));
        }
        Ok(Self::normalized(a, b, c, d))
    }

    /// Takes entries already of determinant 1 and applies only the sign rule.
    pub fn from_sl(a: C, b: C, c: C, d: C) -> Self {
        Self::scaled(a, b, c, d, C::new(1.0, 0.0))
    }

    fn normalized(a: C, b: C, c: C, d: C) -> Self {
        Self::scaled(a, b, c, d, det(a, b, c, d))
    }

    /// Divides by √det and fixes the sign.
    fn scaled(a: C, b: C, c: C, d: C, det: C) -> Self {
        let s = det.sqrt();
        let (mut a, mut b, mut c, mut d) = (a / s, b / s, c / s, d / s);
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        let lead = [a, b, c, d]
            .into_iter()
            .find(|x| x.norm() > 1e-13 * scale)
            .unwrap_or(a);
        let arg = lead.arg();
        if !(0.0..PI).contains(&arg) {
            (a, b, c, d) = (-a, -b, -c, -d);
        }
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::diagonal(C::new(1.0, 0.0))
    }

    /// diag(λ, 1/λ).
    pub fn diagonal(lambda: C) -> Self {
        Self::normalized(lambda, C::new(0.0, 0.0), C::new(0.0, 0.0), lambda.inv())
    }

    /// Loxodromic with axis (0, ∞), ∞ attracting when Re ℓ > 0.
    pub fn translation(length: C) -> Self {
        Self::diagonal((length / 2.0).exp())
    }

    pub fn entries(&self) -> [C; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> C {
        det(self.a, self.b, self.c, self.d)
    }

    pub fn trace(&self) -> C {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Self::from_sl(self.d, -self.b, -self.c, self.a)
    }

    /// g h g⁻¹.
    pub fn conjugate(&self, h: &Mobius) -> Self {
        *self * *h * self.inverse()
    }

    pub fn commutator(&self, other: &Mobius) -> Self {
        *self * *other * self.inverse() * other.inverse()
    }

    /// tr(AB) for the stored SL(2,ℂ) lifts, without sign normalization.
    pub fn trace_of_product(&self, o: &Mobius) -> C {
        self.a * o.a + self.b * o.c + self.c * o.b + self.d * o.d
    }

    /// tr(aba⁻¹b⁻¹), well defined on PSL(2,ℂ).
    pub fn commutator_trace(&self, other: &Mobius) -> C {
        let (x, y) = (self.entries(), other.entries());
        let (xi, yi) = ([x[3], -x[1], -x[2], x[0]], [y[3], -y[1], -y[2], y[0]]);
        let m = [x, y, xi, yi].into_iter().fold(
            [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)],
            |p, q| {
                [
                    p[0] * q[0] + p[1] * q[2],
                    p[0] * q[1] + p[1] * q[3],
                    p[2] * q[0] + p[3] * q[2],
                    p[2] * q[1] + p[3] * q[3],
                ]
            },
        );
        m[0] + m[3]
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        (0..n.unsigned_abs()).fold(Self::identity(), |acc, _| acc * base)
    }

    /// Distance from the identity in PSL(2,ℂ): min over signs of ‖A ∓ I‖₂.
    pub fn distance_from_identity(&self) -> f64 {
        let one = C::new(1.0, 0.0);
        let m = [self.a - one, self.b, self.c, self.d - one];
        let p = [self.a + one, self.b, self.c, self.d + one];
        op_norm(m).min(op_norm(p))
    }

    /// Distance between two elements of PSL(2,ℂ) (sign ambiguity removed).
    pub fn distance(&self, other: &Mobius) -> f64 {
        let e = self.entries();
        let f = other.entries();
        let minus = [e[0] - f[0], e[1] - f[1], e[2] - f[2], e[3] - f[3]];
        let plus = [e[0] + f[0], e[1] + f[1], e[2] + f[2], e[3] + f[3]];
        op_norm(minus).min(op_norm(plus))
    }

    pub fn approx_eq(&self, other: &Mobius, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Infinity => {
                if self.c.norm() == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a / self.c)
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Poincaré extension to upper half-space.
    pub fn apply_upper(&self, p: UpperPoint) -> UpperPoint {
        let czd = self.c * p.z + self.d;
        let den = czd.norm_sqr() + self.c.norm_sqr() * p.t * p.t;
        let z = ((self.a * p.z + self.b) * czd.conj() + self.a * self.c.conj() * p.t * p.t) / den;
        UpperPoint { z, t: p.t / den }
    }

    pub fn kind(&self) -> Kind {
        let tr = self.trace();
        if tr.im.abs() > CLASSIFY_TOL || tr.re.abs() > 2.0 + CLASSIFY_TOL {
            return Kind::Loxodromic;
        }
        if (tr.re.abs() - 2.0).abs() <= CLASSIFY_TOL {
            if self.distance_from_identity() <= 1e-7 {
                Kind::Identity
            } else {
                Kind::Parabolic
            }
        } else {
            Kind::Elliptic
        }
    }

    /// Fixed points on the sphere: two for loxodromic and elliptic elements,
    /// one for parabolic, none for the identity.
    pub fn fixed_points(&self) -> Vec<SpherePoint> {
        match self.kind() {
            Kind::Identity => Vec::new(),
            Kind::Parabolic => {
                if self.c.norm() <= 1e-12 {
                    vec![SpherePoint::Infinity]
                } else {
                    vec![SpherePoint::Finite((self.a - self.d) / (self.c * 2.0))]
                }
            }
            _ => {
                let (p, q) = self.two_fixed_points();
                vec![p, q]
            }
        }
    }

    fn two_fixed_points(&self) -> (SpherePoint, SpherePoint) {
        let scale = self.a.norm().max(self.d.norm()).max(1.0);
        if self.c.norm() <= 1e-14 * scale {
            return (SpherePoint::Infinity, SpherePoint::Finite(self.b / (self.d - self.a)));
        }
        // c z² + (d − a) z − b = 0, solved stably
        let bq = self.d - self.a;
        let disc = (bq * bq + self.c * self.b * 4.0).sqrt();
        let s = if (bq.conj() * disc).re >= 0.0 { bq + disc } else { bq - disc };
        let z1 = -s / (self.c * 2.0);
        let z2 = if s.norm() == 0.0 { z1 } else { self.b * 2.0 / s };
        (SpherePoint::Finite(z1), SpherePoint::Finite(z2))
    }

    /// |derivative| at a fixed point; below 1 means attracting.
    fn multiplier(&self, p: SpherePoint) -> f64 {
        match p {
            SpherePoint::Infinity => (self.d / self.a).norm_sqr(),
            SpherePoint::Finite(z) => 1.0 / (self.c * z + self.d).norm_sqr(),
        }
    }

    /// Complex translation length ℓ with 2cosh(ℓ/2) = ±tr, Re ℓ > 0,
    /// Im ℓ ∈ (−π, π].
    pub fn complex_length(&self) -> Result<C, MoebiusError> {
        match self.kind() {
            Kind::Loxodromic => Ok(complex_length_of_trace(self.trace())),
            k => Err(MoebiusError::Classification(k)),
        }
    }

    /// (attracting, repelling) fixed points.
    pub fn axis(&self) -> Result<(SpherePoint, SpherePoint), MoebiusError> {
        let k = self.kind();
        if k != Kind::Loxodromic {
            return Err(MoebiusError::Classification(k));
        }
        let (p, q) = self.two_fixed_points();
        if p.chordal(q) <= 1e-9 {
            return Err(MoebiusError::Degenerate("fixed points coincide".into()));
        }
        if self.multiplier(p) < self.multiplier(q) {
            Ok((p, q))
        } else {
            Ok((q, p))
        }
    }
}

/// ℓ = 2 acosh(tr/2), normalized to Re ℓ ≥ 0 and Im ℓ ∈ (−π, π].
pub fn complex_length_of_trace(tr: C) -> C {
    let mut l = (tr / 2.0).acosh() * 2.0;
    if l.re < 0.0 {
        l = -l;
    }
    let two_pi = 2.0 * PI;
    let mut im = l.im.rem_euclid(two_pi);
    if im > PI {
        im -= two_pi;
    }
    C::new(l.re, im)
}

impl Mul for Mobius {
    type Output = Mobius;

    fn mul(self, o: Mobius) -> Mobius {
        // both factors are unimodular; a recomputed det is only cancellation noise
        Mobius::from_sl(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// An element sending 0 ↦ p and ∞ ↦ q.
pub fn frame_for(p: SpherePoint, q: SpherePoint) -> Result<Mobius, MoebiusError> {
    if p.chordal(q) <= 1e-12 {
        return Err(MoebiusError::Degenerate("axis endpoints coincide".into()));
    }
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    match (p, q) {
        (SpherePoint::Finite(p), SpherePoint::Finite(q)) => Mobius::new(q, p, one, one),
        (SpherePoint::Finite(p), SpherePoint::Infinity) => Mobius::new(one, p, zero, one),
        (SpherePoint::Infinity, SpherePoint::Finite(q)) => Mobius::new(q, -one, one, zero),
        _ => unreachable!("coincident endpoints rejected above"),
    }
}

/// Elliptic element rotating by `angle` about the geodesic from p to q.
pub fn rotate_about_axis(p: SpherePoint, q: SpherePoint, angle: f64) -> Result<Mobius, MoebiusError> {
    let m = frame_for(p, q)?;
    Ok(m * Mobius::diagonal(C::new(0.0, angle / 2.0).exp()) * m.inverse())
}

/// Loxodromic element with repelling point p, attracting point q and
/// complex length ℓ (Re ℓ > 0).
pub fn translate_along_axis(p: SpherePoint, q: SpherePoint, length: C) -> Result<Mobius, MoebiusError> {
    let m = frame_for(p, q)?;
    Ok(m * Mobius::translation(length) * m.inverse())
}

/// Result of the Jørgensen test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Jorgensen {
    Value(f64),
    /// The pair generates an elementary group; the test says nothing.
    Elementary(String),
}

impl Jorgensen {
    pub fn value(&self) -> Option<f64> {
        match self {
            Jorgensen::Value(v) => Some(*v),
            Jorgensen::Elementary(_) => None,
        }
    }

    /// A value below 1 proves the group is not discrete.
    pub fn violated(&self) -> bool {
        self.value().is_some_and(|v| v < 1.0)
    }
}

/// |tr²a − 4| + |tr[a,b] − 2|.
pub fn jorgensen_test(a: &Mobius, b: &Mobius) -> Jorgensen {
    if a.kind() == Kind::Identity || b.kind() == Kind::Identity {
        return Jorgensen::Elementary("a generator is the identity".into());
    }
    let fa = a.fixed_points();
    let fb = b.fixed_points();
    if fa.iter().any(|p| fb.iter().any(|q| p.chordal(*q) <= 1e-9)) {
        return Jorgensen::Elementary("generators share a fixed point".into());
    }
    let ta = a.trace();
    let tc = a.commutator_trace(b);
    Jorgensen::Value((ta * ta - 4.0).norm() + (tc - 2.0).norm())
}

/// A piecewise geodesic path in upper half-space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSegmentPath {
    pub breakpoints: Vec<UpperPoint>,
    pub segment_lengths: Vec<f64>,
    pub bend_angles: Vec<f64>,
    #[serde(skip)]
    frames: Vec<Mobius>,
    /// Frame of segment k+1 seen from the frame of segment k, up to a
    /// rotation about the vertical.
    #[serde(skip)]
    steps: Vec<Mobius>,
}

/// Isometry taking j to `p` with `q` on the upward vertical through j.
fn segment_frame(p: UpperPoint, q: UpperPoint) -> Mobius {
    let s = p.t.sqrt();
    let h = Mobius::normalized(
        C::new(1.0 / s, 0.0),
        -p.z / s,
        C::new(0.0, 0.0),
        C::new(s, 0.0),
    );
    let q1 = h.apply_upper(q);
    let u = match forward_endpoint(q1) {
        SpherePoint::Infinity => Mobius::identity(),
        SpherePoint::Finite(xi) => {
            let n = (1.0 + xi.norm_sqr()).sqrt();
            let beta = C::new(1.0 / n, 0.0);
            let alpha = xi.conj() / n;
            Mobius::normalized(alpha, beta, -beta.conj(), alpha.conj())
        }
    };
    (u * h).inverse()
}

/// Endpoint of the geodesic ray from j through `q`.
fn forward_endpoint(q: UpperPoint) -> SpherePoint {
    let r = q.z.norm();
    if r <= 1e-15 {
        return if q.t >= 1.0 {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(C::new(0.0, 0.0))
        };
    }
    let c = (r * r + q.t * q.t - 1.0) / (2.0 * r);
    let radius = (c * c + 1.0).sqrt();
    SpherePoint::Finite(q.z / r * (c + radius))
}

/// Angle at j between the upward vertical and the geodesic towards `q`.
fn angle_from_vertical(q: UpperPoint) -> f64 {
    let r = q.z.norm();
    if r <= 1e-15 {
        return if q.t > 1.0 { 0.0 } else { PI };
    }
    let c = (r * r + q.t * q.t - 1.0) / (2.0 * r);
    1.0f64.atan2(c)
}

fn upper_at_height(u: f64) -> UpperPoint {
    UpperPoint {
        z: C::new(0.0, 0.0),
        t: u.exp(),
    }
}

impl GeodesicSegmentPath {
    pub fn new(breakpoints: Vec<UpperPoint>) -> Result<Self, MoebiusError> {
        if breakpoints.len() < 2 {
            return Err(MoebiusError::Domain("a path needs two breakpoints".into()));
        }
        let segment_lengths: Vec<f64> = breakpoints.windows(2).map(|w| w[0].distance(w[1])).collect();
        if segment_lengths.iter().any(|&l| l <= 1e-12) {
            return Err(MoebiusError::Domain("zero-length segment".into()));
        }
        if segment_lengths.iter().any(|l| !l.is_finite()) {
            return Err(MoebiusError::Domain("breakpoints beyond floating-point range".into()));
        }
        let bend_angles = breakpoints
            .windows(3)
            .map(|w| {
                let (c, a, b) = (w[0].distance(w[1]), w[1].distance(w[2]), w[0].distance(w[2]));
                let cos = (c.cosh() * a.cosh() - b.cosh()) / (c.sinh() * a.sinh());
                PI - cos.clamp(-1.0, 1.0).acos()
            })
            .collect();
        let frames: Vec<Mobius> = breakpoints.windows(2).map(|w| segment_frame(w[0], w[1])).collect();
        let steps = frames.windows(2).map(|f| f[0].inverse() * f[1]).collect();
        Ok(Self {
            breakpoints,
            segment_lengths,
            bend_angles,
            frames,
            steps,
        })
    }

    /// Planar path from j heading up, turning by the signed exterior angle
    /// `turns[i]` after segment i.
    pub fn planar(lengths: &[f64], turns: &[f64]) -> Result<Self, MoebiusError> {
        if lengths.is_empty() || turns.len() + 1 != lengths.len() {
            return Err(MoebiusError::Domain(format!(
                "{} segments need {} turns, got {}",
                lengths.len(),
                lengths.len().saturating_sub(1),
                turns.len()
            )));
        }
        if lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(MoebiusError::Domain("zero-length segment".into()));
        }
        if turns.iter().any(|t| t.abs() >= PI) {
            return Err(MoebiusError::Domain("bend angles must lie in [0, π)".into()));
        }
        let one = C::new(1.0, 0.0);
        let mut steps = Vec::new();
        for (&l, &th) in lengths.iter().zip(turns) {
            steps.push(Mobius::translation(C::new(l, 0.0)) * rotate_about_axis((-one).into(), one.into(), th)?);
        }
        let mut frames = vec![Mobius::identity()];
        for st in &steps {
            frames.push(*frames.last().expect("nonempty") * *st);
        }
        let mut breakpoints: Vec<UpperPoint> = frames.iter().map(|f| f.apply_upper(UpperPoint::J)).collect();
        breakpoints.push(frames.last().expect("nonempty").apply_upper(upper_at_height(*lengths.last().expect("nonempty"))));
        if breakpoints.iter().any(|p| !(p.t > 0.0 && p.t.is_finite() && p.z.is_finite())) {
            return Err(MoebiusError::Domain("breakpoints beyond floating-point range".into()));
        }
        Ok(Self {
            breakpoints,
            segment_lengths: lengths.to_vec(),
            bend_angles: turns.iter().map(|t| t.abs()).collect(),
            frames,
            steps,
        })
    }

    pub fn total_length(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }

    /// Segment index and offset for arc length `s`.
    fn locate(&self, s: f64) -> (usize, f64) {
        let mut rest = s.clamp(0.0, self.total_length());
        for (i, &l) in self.segment_lengths.iter().enumerate() {
            if rest <= l || i + 1 == self.segment_lengths.len() {
                return (i, rest.min(l));
            }
            rest -= l;
        }
        unreachable!("path has at least one segment")
    }

    /// Arc-length parametrization ψ(s).
    pub fn point_at(&self, s: f64) -> UpperPoint {
        let (i, u) = self.locate(s);
        self.frames[i].apply_upper(upper_at_height(u))
    }

    /// d(ψ(s), ψ(t)) measured in the frame of the earlier segment, so the
    /// matrices involved only grow with the separation of the two points.
    pub fn distance_between(&self, s: f64, t: f64) -> f64 {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        UpperPoint::J.distance(self.seen_from(s, t))
    }

    /// ψ(t) in the frame at ψ(s), for s ≤ t.
    fn seen_from(&self, s: f64, t: f64) -> UpperPoint {
        let ((i, a), (j, b)) = (self.locate(s), self.locate(t));
        let m = self.steps[i..j].iter().fold(Mobius::translation(C::new(-a, 0.0)), |acc, st| acc * *st);
        m.apply_upper(upper_at_height(b))
    }

    fn breakpoint_params(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for l in &self.segment_lengths {
            acc += l;
            out.push(acc);
        }
        out
    }
}

/// Distortion statistics over sampled parameter pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distortion {
    pub max: f64,
    pub min: f64,
    pub median: f64,
    pub pairs: usize,
}

/// Samples pairs (s, t) and measures max(d/|s−t|, |s−t|/d). Every pair of
/// breakpoints is included; the remaining pairs are drawn from a seeded RNG.
pub fn bilipschitz_harness(path: &GeodesicSegmentPath, samples: usize, seed: u64) -> Result<Distortion, MoebiusError> {
    if samples < 2 {
        return Err(MoebiusError::Domain("need at least two samples".into()));
    }
    let total = path.total_length();
    if !(total.is_finite() && total > 0.0) {
        return Err(MoebiusError::Domain(format!("path length {total} is not usable")));
    }
    let bp = path.breakpoint_params();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for i in 0..bp.len() {
        for j in (i + 1)..bp.len() {
            pairs.push((bp[i], bp[j]));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pairs.len() < samples.max(pairs.len()) {
        let s = rng.gen_range(0.0..total);
        let t = rng.gen_range(0.0..total);
        if (s - t).abs() > 1e-9 * total.max(1.0) {
            pairs.push((s, t));
        }
    }
    let mut ratios: Vec<f64> = pairs
        .iter()
        .map(|&(s, t)| {
            let arc = (s - t).abs();
            let d = path.distance_between(s, t);
            if d == 0.0 {
                f64::INFINITY
            } else {
                (d / arc).max(arc / d)
            }
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    Ok(Distortion {
        max: *ratios.last().expect("nonempty"),
        min: ratios[0],
        median: ratios[ratios.len() / 2],
        pairs: ratios.len(),
    })
}

/// Largest angle between ψ'(x) and the chord from ψ(x) to ψ(y) over grid
/// points x and y ∈ (x, x+1], with grid spacing `step`.
pub fn nearly_geodesic_angle(path: &GeodesicSegmentPath, step: f64) -> Result<f64, MoebiusError> {
    if !(step > 0.0) || step > 1.0 {
        return Err(MoebiusError::Domain("step must lie in (0, 1]".into()));
    }
    let total = path.total_length();
    let n = (total / step).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(total)).collect();
    let window = (1.0 / step).round().max(1.0) as usize;
    let mut worst: f64 = 0.0;
    for (i, &x) in grid.iter().enumerate() {
        for &y in grid.iter().skip(i + 1).take(window) {
            if y - x <= 1e-12 {
                continue;
            }
            worst = worst.max(angle_from_vertical(path.seen_from(x, y)));
        }
    }
    Ok(worst)
}

/// Whether the sampled path is δ-nearly geodesic.
pub fn is_nearly_geodesic(path: &GeodesicSegmentPath, delta: f64, step: f64) -> Result<bool, MoebiusError> {
    Ok(nearly_geodesic_angle(path, step)? <= delta)
}

/// A random element with entries uniform in the unit square, for tests and
/// demos.
pub fn random_mobius<R: Rng>(rng: &mut R) -> Mobius {
    loop {
        let mut e = || C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if let Ok(m) = Mobius::new(e(), e(), e(), e()) {
            if m.det().norm() > 0.0 && m.entries().iter().all(|x| x.norm() < 1e3) {
                return m;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest, Strategy};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn complex_length_of_diagonals() {
        let l = Mobius::diagonal(c(0.5f64.exp(), 0.0)).complex_length().unwrap();
        assert!(close(l, c(1.0, 0.0), 1e-12));
        let target = c(1.0, PI / 3.0);
        let l = Mobius::translation(target).complex_length().unwrap();
        assert!(close(l, target, 1e-12), "{l}");
    }

    #[test]
    fn complex_length_rejects_non_loxodromic() {
        let p = Mobius::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(p.complex_length(), Err(MoebiusError::Classification(Kind::Parabolic)));
        let e = rotate_about_axis(c(0.0, 0.0).into(), SpherePoint::Infinity, 1.0).unwrap();
        assert_eq!(e.kind(), Kind::Elliptic);
        assert!(e.complex_length().is_err());
        assert_eq!(Mobius::identity().kind(), Kind::Identity);
    }

    #[test]
    fn complex_length_trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let m = random_mobius(&mut rng);
            if let Ok(l) = m.complex_length() {
                let tr = (l / 2.0).cosh() * 2.0;
                assert!(close(tr, m.trace(), 1e-10) || close(tr, -m.trace(), 1e-10));
                assert!(l.re > 0.0 && l.im > -PI && l.im <= PI);
            }
        }
    }

    #[test]
    fn axis_of_diagonal() {
        let m = Mobius::diagonal(c(2.0, 0.0));
        let (att, rep) = m.axis().unwrap();
        assert_eq!(att, SpherePoint::Infinity);
        assert!(rep.chordal(c(0.0, 0.0).into()) < 1e-12);
        let shift = Mobius::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let (att, rep) = shift.conjugate(&m).axis().unwrap();
        assert_eq!(att, SpherePoint::Infinity);
        assert!(rep.chordal(c(1.0, 0.0).into()) < 1e-12);
        assert!(shift.axis().is_err());
    }

    #[test]
    fn axis_points_are_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let m = random_mobius(&mut rng);
            if let Ok((att, rep)) = m.axis() {
                assert!(m.apply(att).chordal(att) < 1e-9);
                assert!(m.apply(rep).chordal(rep) < 1e-9);
                // iterating pushes a generic point towards the attractor
                let mut p: SpherePoint = c(0.3, -0.7).into();
                let m8 = m.pow(16);
                p = m8.apply(p);
                if m.complex_length().unwrap().re > 1.0 {
                    assert!(p.chordal(att) < 1e-3, "{m:?} {att:?} {rep:?} {p:?}");
                }
            }
        }
    }

    #[test]
    fn rotation_examples() {
        let th = 0.7;
        let r = rotate_about_axis(c(0.0, 0.0).into(), SpherePoint::Infinity, th).unwrap();
        assert!(r.approx_eq(&Mobius::diagonal(c(0.0, th / 2.0).exp()), 1e-12));
        let p: SpherePoint = c(0.3, 1.0).into();
        let q: SpherePoint = c(-2.0, 0.5).into();
        assert!(rotate_about_axis(p, q, 0.0).unwrap().approx_eq(&Mobius::identity(), 1e-12));
        let back = rotate_about_axis(p, q, th).unwrap() * rotate_about_axis(p, q, -th).unwrap();
        assert!(back.approx_eq(&Mobius::identity(), 1e-12));
        let r = rotate_about_axis(p, q, th).unwrap();
        assert!(close(r.trace(), c(2.0 * (th / 2.0).cos(), 0.0), 1e-12) || close(r.trace(), c(-2.0 * (th / 2.0).cos(), 0.0), 1e-12));
        assert!(r.apply(p).chordal(p) < 1e-12 && r.apply(q).chordal(q) < 1e-12);
        assert!(rotate_about_axis(p, p, th).is_err());
    }

    #[test]
    fn translation_along_axis_has_requested_data() {
        let p: SpherePoint = c(1.0, 1.0).into();
        let l = c(0.8, 0.4);
        for q in [SpherePoint::Infinity, c(-1.0, 0.5).into()] {
            let t = translate_along_axis(p, q, l).unwrap();
            assert!(close(t.complex_length().unwrap(), l, 1e-10));
            let (att, rep) = t.axis().unwrap();
            assert!(att.chordal(q) < 1e-9 && rep.chordal(p) < 1e-9);
        }
    }

    #[test]
    fn jorgensen_examples() {
        let a = Mobius::new(c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let b = Mobius::new(c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)).unwrap();
        // tr a = 2 and tr [a, b] = -14 by direct multiplication
        assert!((jorgensen_test(&a, &b).value().unwrap() - 16.0).abs() < 1e-12);
        assert!(matches!(jorgensen_test(&Mobius::identity(), &b), Jorgensen::Elementary(_)));
        let d1 = Mobius::diagonal(c(2.0, 0.0));
        let d2 = Mobius::diagonal(c(0.0, 1.5f64).exp());
        assert!(matches!(jorgensen_test(&d1, &d2), Jorgensen::Elementary(_)));
    }

    #[test]
    fn irrational_elliptic_pair_violates_jorgensen() {
        // rotations by 2π(√2 − 1) about two nearby axes
        let th = 2.0 * PI * (2f64.sqrt() - 1.0);
        let a = rotate_about_axis(c(0.0, 0.0).into(), SpherePoint::Infinity, th).unwrap();
        let b = rotate_about_axis(c(1.0, 0.0).into(), c(-1.0, 0.0).into(), th).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let gens = [a, a.inverse(), b, b.inverse()];
        let mut found = false;
        for _ in 0..20000 {
            let len = rng.gen_range(1..=8);
            let w = (0..len).fold(Mobius::identity(), |acc, _| acc * gens[rng.gen_range(0..4)]);
            if jorgensen_test(&w, &b).violated() {
                found = true;
                break;
            }
        }
        assert!(found);
    }

    #[test]
    fn upper_action_matches_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = UpperPoint::new(c(0.2, -0.4), 0.7).unwrap();
        let q = UpperPoint::new(c(-1.0, 0.3), 2.5).unwrap();
        for _ in 0..50 {
            let g = random_mobius(&mut rng);
            let d = g.apply_upper(p).distance(g.apply_upper(q));
            assert!((d - p.distance(q)).abs() < 1e-8);
        }
        assert!((UpperPoint::J.distance(upper_at_height(1.5)) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn single_segment_is_isometric() {
        let p = UpperPoint::new(c(0.5, 0.5), 0.3).unwrap();
        let q = UpperPoint::new(c(-0.7, 1.2), 1.4).unwrap();
        let path = GeodesicSegmentPath::new(vec![p, q]).unwrap();
        let dist = bilipschitz_harness(&path, 500, 0).unwrap();
        assert!((dist.max - 1.0).abs() < 1e-9 && (dist.min - 1.0).abs() < 1e-9);
        assert!(nearly_geodesic_angle(&path, 0.05).unwrap() < 1e-6);
    }

    #[test]
    fn planar_path_reproduces_lengths_and_bends() {
        let path = GeodesicSegmentPath::planar(&[1.0, 2.0, 0.5], &[0.4, -1.1]).unwrap();
        let measured = GeodesicSegmentPath::new(path.breakpoints.clone()).unwrap();
        for (l, e) in measured.segment_lengths.iter().zip([1.0, 2.0, 0.5]) {
            assert!((l - e).abs() < 1e-9);
        }
        assert!((measured.bend_angles[0] - 0.4).abs() < 1e-9);
        assert!((measured.bend_angles[1] - 1.1).abs() < 1e-9);
        assert!((path.nearly_angle_at_start() - 0.0).abs() < 1e-9);
    }

    impl GeodesicSegmentPath {
        fn nearly_angle_at_start(&self) -> f64 {
            angle_from_vertical(self.seen_from(0.0, self.segment_lengths[0] / 2.0))
        }
    }

    #[test]
    fn long_segments_stay_bilipschitz() {
        let path = GeodesicSegmentPath::planar(&[20.0, 20.0], &[3.0 * PI / 4.0]).unwrap();
        let d = bilipschitz_harness(&path, 2000, 11).unwrap();
        assert!(d.max.is_finite() && d.max < 10.0, "{d:?}");
    }

    #[test]
    fn short_segments_close_up() {
        let th = 3.0 * PI / 4.0;
        let measure = |n: usize| {
            let path = GeodesicSegmentPath::planar(&vec![0.1; n], &vec![th; n - 1]).unwrap();
            bilipschitz_harness(&path, 500, 5).unwrap().max
        };
        assert!(measure(8) > 100.0);
        assert!(measure(8) > 10.0 * measure(2));
    }

    #[test]
    fn products_stay_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let gens: Vec<Mobius> = (0..6).map(|_| random_mobius(&mut rng)).collect();
        let mut m = Mobius::identity();
        for _ in 0..10_000 {
            m = m * gens[rng.gen_range(0..gens.len())];
            if m.entries().iter().any(|x| x.norm() > 1e3) {
                m = Mobius::identity();
            }
            assert!((m.det() - 1.0).norm() <= 1e-9);
        }
    }

    fn arb_mobius() -> impl Strategy<Value = Mobius> {
        any::<u64>().prop_map(|s| random_mobius(&mut ChaCha8Rng::seed_from_u64(s)))
    }

    proptest! {
        #[test]
        fn complex_length_is_conjugation_invariant(t in arb_mobius(), g in arb_mobius()) {
            if let Ok(l) = t.complex_length() {
                let l2 = g.conjugate(&t).complex_length().unwrap();
                let diff = l - l2;
                let wrapped = (diff.im.abs() - 2.0 * PI).abs().min(diff.im.abs());
                prop_assert!(diff.re.abs() < 1e-9 && wrapped < 1e-9, "{l} vs {l2}");
            }
        }

        #[test]
        fn jorgensen_is_conjugation_invariant(a in arb_mobius(), b in arb_mobius(), g in arb_mobius()) {
            if let (Some(v), Some(w)) = (
                jorgensen_test(&a, &b).value(),
                jorgensen_test(&g.conjugate(&a), &g.conjugate(&b)).value(),
            ) {
                prop_assert!((v - w).abs() <= 1e-9 * v.max(1.0), "{v} {w}");
            }
        }

        #[test]
        fn inverse_is_inverse(a in arb_mobius()) {
            prop_assert!((a * a.inverse()).approx_eq(&Mobius::identity(), 1e-9));
        }
    }
}
