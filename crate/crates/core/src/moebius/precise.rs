//! Double-double arithmetic for SL(2,ℂ), used where products of large
//! matrices must cancel to the identity far below f64 resolution.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Mobius, SpherePoint};

/// An unevaluated sum hi + lo with |lo| ≤ ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};
const HALF_PI: Dd = Dd {
    hi: std::f64::consts::FRAC_PI_2,
    lo: 6.123233995736766e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 { -self } else { self }
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            hi: self.hi * k,
            lo: self.lo * k,
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let s = Dd::new(self.hi.sqrt());
        s + (self - s * s) / s.scale(2.0)
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::new(k)).scale(1.0 / 1024.0);
        // Taylor series on |r| < 1e-3
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..=16 {
            term = term * r / Dd::new(n as f64);
            sum = sum + term;
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        sum.scale(2f64.powi(k as i32))
    }

    /// (sin x, cos x).
    pub fn sin_cos(self) -> (Self, Self) {
        let k = (self.hi / HALF_PI.hi).round();
        let r = self - HALF_PI * Dd::new(k);
        let r2 = r * r;
        let (mut s, mut c) = (Dd::ZERO, Dd::ZERO);
        let mut ts = r;
        let mut tc = Dd::ONE;
        for n in 0..24 {
            s = s + ts;
            c = c + tc;
            let (a, b) = ((2 * n + 2) as f64, (2 * n + 3) as f64);
            ts = -(ts * r2) / Dd::new(a * b);
            tc = -(tc * r2) / Dd::new((2 * n + 1) as f64 * a);
        }
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Double-double complex number.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Dc {
    pub re: Dd,
    pub im: Dd,
}

impl Dc {
    pub const ZERO: Dc = Dc {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };
    pub const ONE: Dc = Dc {
        re: Dd::ONE,
        im: Dd::ZERO,
    };

    pub fn new(re: Dd, im: Dd) -> Self {
        Self { re, im }
    }

    pub fn to_c(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    pub fn norm(self) -> f64 {
        self.to_c().norm()
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.re.scale(k), self.im.scale(k))
    }

    pub fn sqrt(self) -> Self {
        let r = self.norm_sqr().sqrt();
        if self.re.hi >= 0.0 {
            let t = (r + self.re).scale(0.5).sqrt();
            if t.hi == 0.0 {
                return Self::ZERO;
            }
            Self::new(t, self.im / t.scale(2.0))
        } else {
            let t = (r - self.re).scale(0.5).sqrt();
            let re = self.im.abs() / t.scale(2.0);
            Self::new(re, if self.im.hi < 0.0 { -t } else { t })
        }
    }

    pub fn exp(self) -> Self {
        let m = self.re.exp();
        let (s, c) = self.im.sin_cos();
        Self::new(m * c, m * s)
    }

    pub fn cosh(self) -> Self {
        (self.exp() + (-self).exp()).scale(0.5)
    }

    pub fn inv(self) -> Self {
        Dc::ONE / self
    }
}

impl From<Complex64> for Dc {
    fn from(z: Complex64) -> Self {
        Self::new(Dd::new(z.re), Dd::new(z.im))
    }
}

impl Neg for Dc {
    type Output = Dc;
    fn neg(self) -> Dc {
        Dc::new(-self.re, -self.im)
    }
}

impl Add for Dc {
    type Output = Dc;
    fn add(self, o: Dc) -> Dc {
        Dc::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Dc {
    type Output = Dc;
    fn sub(self, o: Dc) -> Dc {
        Dc::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Dc {
    type Output = Dc;
    fn mul(self, o: Dc) -> Dc {
        Dc::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Div for Dc {
    type Output = Dc;
    fn div(self, o: Dc) -> Dc {
        let d = o.norm_sqr();
        let n = self * o.conj();
        Dc::new(n.re / d, n.im / d)
    }
}

/// An SL(2,ℂ) matrix in double-double precision. The sign is kept as
/// computed; use `to_mobius` for the normalized PSL view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DMobius {
    pub a: Dc,
    pub b: Dc,
    pub c: Dc,
    pub d: Dc,
}

impl DMobius {
    pub fn new(a: Dc, b: Dc, c: Dc, d: Dc) -> Self {
        let s = (a * d - b * c).sqrt();
        Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
    }

    pub fn identity() -> Self {
        Self {
            a: Dc::ONE,
            b: Dc::ZERO,
            c: Dc::ZERO,
            d: Dc::ONE,
        }
    }

    pub fn diagonal(lambda: Dc) -> Self {
        Self {
            a: lambda,
            b: Dc::ZERO,
            c: Dc::ZERO,
            d: lambda.inv(),
        }
    }

    /// diag(e^{ℓ/2}, e^{−ℓ/2}).
    pub fn translation(length: Dc) -> Self {
        let h = length.scale(0.5);
        Self {
            a: h.exp(),
            b: Dc::ZERO,
            c: Dc::ZERO,
            d: (-h).exp(),
        }
    }

    pub fn from_mobius(m: &Mobius) -> Self {
        Self::new(m.a.into(), m.b.into(), m.c.into(), m.d.into())
    }

    pub fn to_mobius(&self) -> Mobius {
        Mobius::from_sl(self.a.to_c(), self.b.to_c(), self.c.to_c(), self.d.to_c())
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn trace(&self) -> Dc {
        self.a + self.d
    }

    pub fn det(&self) -> Dc {
        self.a * self.d - self.b * self.c
    }

    pub fn conjugate(&self, h: &DMobius) -> Self {
        *self * *h * self.inverse()
    }

    pub fn apply(&self, p: DPoint) -> DPoint {
        match p {
            DPoint::Infinity => {
                if self.c.norm() == 0.0 {
                    DPoint::Infinity
                } else {
                    DPoint::Finite(self.a / self.c)
                }
            }
            DPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() == 0.0 {
                    DPoint::Infinity
                } else {
                    DPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Distance from ±I in the spectral norm, with the difference formed in
    /// double-double before rounding.
    pub fn distance_from_identity(&self) -> f64 {
        let near = |sign: f64| {
            let one = Dc::ONE.scale(sign);
            [self.a - one, self.b, self.c, self.d - one].map(Dc::to_c)
        };
        super::op_norm(near(1.0)).min(super::op_norm(near(-1.0)))
    }

    /// Fixed points (attracting, repelling) of a loxodromic element; the
    /// attracting one is chosen with the f64 multiplier.
    pub fn axis(&self) -> Option<(DPoint, DPoint)> {
        let scale = self.a.norm().max(self.d.norm()).max(1.0);
        let (p, q) = if self.c.norm() <= 1e-30 * scale {
            let fin = self.b / (self.d - self.a);
            (DPoint::Infinity, DPoint::Finite(fin))
        } else {
            let bq = self.d - self.a;
            let disc = (bq * bq + (self.c * self.b).scale(4.0)).sqrt();
            let s = if (bq.to_c().conj() * disc.to_c()).re >= 0.0 { bq + disc } else { bq - disc };
            if s.norm() == 0.0 {
                return None;
            }
            (DPoint::Finite(-s / self.c.scale(2.0)), DPoint::Finite(self.b.scale(2.0) / s))
        };
        let mult = |x: DPoint| match x {
            DPoint::Infinity => (self.d / self.a).norm(),
            DPoint::Finite(z) => 1.0 / (self.c * z + self.d).norm().powi(2),
        };
        if p.to_sphere().chordal(q.to_sphere()) <= 1e-12 {
            return None;
        }
        Some(if mult(p) < mult(q) { (p, q) } else { (q, p) })
    }
}

impl Mul for DMobius {
    type Output = DMobius;
    fn mul(self, o: DMobius) -> DMobius {
        DMobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// A point of the Riemann sphere in double-double precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DPoint {
    Finite(Dc),
    Infinity,
}

impl DPoint {
    pub fn to_sphere(self) -> SpherePoint {
        match self {
            DPoint::Finite(z) => SpherePoint::Finite(z.to_c()),
            DPoint::Infinity => SpherePoint::Infinity,
        }
    }
}

/// An element sending 0 ↦ p and ∞ ↦ q.
pub fn frame_for(p: DPoint, q: DPoint) -> Option<DMobius> {
    if p.to_sphere().chordal(q.to_sphere()) <= 1e-12 {
        return None;
    }
    let one = Dc::ONE;
    Some(match (p, q) {
        (DPoint::Finite(p), DPoint::Finite(q)) => DMobius::new(q, p, one, one),
        (DPoint::Finite(p), DPoint::Infinity) => DMobius::new(one, p, Dc::ZERO, one),
        (DPoint::Infinity, DPoint::Finite(q)) => DMobius::new(q, -one, one, Dc::ZERO),
        _ => return None,
    })
}
