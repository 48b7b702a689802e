//! Laws represented by piecewise quantile functions.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::distortion::DistortionFunction;
use crate::error::{Error, Result};
use crate::measure::{DerivativeMeasure, Inverse};
use crate::quadrature::{integrate_term, Sum, Term};

const INTEGRATION_TOL: f64 = 1e-12;

/// Location and scale `(μ, σ)` of the law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSpec {
    pub mu: f64,
    pub sigma: f64,
}

impl MomentSpec {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::NonPositiveScale(sigma));
        }
        if !mu.is_finite() {
            return Err(Error::Parse(format!("mean must be finite, got {mu}")));
        }
        Ok(MomentSpec { mu, sigma })
    }

    pub fn standard() -> Self {
        MomentSpec {
            mu: 0.0,
            sigma: 1.0,
        }
    }

    /// `μ + σ z`, keeping infinities.
    pub fn scale(&self, z: f64) -> f64 {
        if z.is_infinite() {
            z
        } else {
            self.mu + self.sigma * z
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeClass {
    General,
    Symmetric,
    Unimodal,
    #[serde(rename = "us")]
    UnimodalSymmetric,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 4] = [
        ShapeClass::General,
        ShapeClass::Symmetric,
        ShapeClass::Unimodal,
        ShapeClass::UnimodalSymmetric,
    ];

    pub fn is_symmetric(self) -> bool {
        matches!(self, ShapeClass::Symmetric | ShapeClass::UnimodalSymmetric)
    }

    pub fn is_unimodal(self) -> bool {
        matches!(self, ShapeClass::Unimodal | ShapeClass::UnimodalSymmetric)
    }
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeClass::General => "general",
            ShapeClass::Symmetric => "symmetric",
            ShapeClass::Unimodal => "unimodal",
            ShapeClass::UnimodalSymmetric => "us",
        })
    }
}

impl FromStr for ShapeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "general" | "none" => Ok(ShapeClass::General),
            "symmetric" | "s" => Ok(ShapeClass::Symmetric),
            "unimodal" | "u" => Ok(ShapeClass::Unimodal),
            "us" | "unimodal-symmetric" | "unimodalsymmetric" => Ok(ShapeClass::UnimodalSymmetric),
            other => Err(Error::Parse(format!("unknown shape class '{other}'"))),
        }
    }
}

/// `coef · |p − anchor|^exponent`; the anchor never lies inside its segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerTerm {
    pub coef: f64,
    pub anchor: f64,
    pub exponent: f64,
}

/// `offset + slope · (p − lo) + Σ powers` on `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub offset: f64,
    pub slope: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub powers: Vec<PowerTerm>,
}

impl Segment {
    pub fn affine(lo: f64, hi: f64, start: f64, end: f64) -> Segment {
        Segment {
            lo,
            hi,
            offset: start,
            slope: if hi > lo { (end - start) / (hi - lo) } else { 0.0 },
            powers: vec![],
        }
    }

    pub fn is_constant(&self) -> bool {
        self.slope == 0.0 && self.powers.is_empty()
    }

    /// Value on the closed segment (limits at the ends).
    pub fn value(&self, p: f64) -> f64 {
        let mut v = self.offset + self.slope * (p - self.lo);
        for t in &self.powers {
            let d = (p - t.anchor).abs();
            v += t.coef * d.powf(t.exponent);
        }
        v
    }

    pub fn derivative(&self, p: f64) -> f64 {
        let mut d = self.slope;
        for t in &self.powers {
            let s = if p >= t.anchor { 1.0 } else { -1.0 };
            d += t.coef * t.exponent * (p - t.anchor).abs().powf(t.exponent - 1.0) * s;
        }
        d
    }

    pub(crate) fn terms(&self) -> Vec<Term> {
        // anchoring the slope at `lo` avoids cancellation on steep segments far from 0
        let mut v = vec![Term::constant(self.offset)];
        if self.slope != 0.0 {
            v.push(Term::power(self.slope, self.lo, 1.0));
        }
        v.extend(
            self.powers
                .iter()
                .map(|t| Term::power(t.coef, t.anchor, t.exponent)),
        );
        v
    }
}

/// Nondecreasing quantile function on (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileFunction {
    segments: Vec<Segment>,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidQuantile(msg.into()))
}

impl QuantileFunction {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return invalid("no segments");
        }
        if segments[0].lo != 0.0 || segments[segments.len() - 1].hi != 1.0 {
            return invalid("segments must cover (0, 1)");
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.lo < s.hi) {
                return invalid(format!("empty segment [{}, {})", s.lo, s.hi));
            }
            if i > 0 && segments[i - 1].hi != s.lo {
                return invalid(format!("gap or overlap at p = {}", s.lo));
            }
            if !(s.slope >= 0.0 && s.slope.is_finite() && s.offset.is_finite()) {
                return invalid(format!("bad slope or offset on [{}, {})", s.lo, s.hi));
            }
            for t in &s.powers {
                if t.anchor > s.lo && t.anchor < s.hi {
                    return invalid("power anchor inside its segment");
                }
                let rising = (t.anchor <= s.lo) == (t.exponent > 0.0);
                if (rising && t.coef < 0.0) || (!rising && t.coef > 0.0) {
                    return invalid(format!("decreasing power term on [{}, {})", s.lo, s.hi));
                }
            }
        }
        for w in segments.windows(2) {
            let left = w[0].value(w[0].hi);
            let right = w[1].value(w[1].lo);
            if !(left.is_finite() && right.is_finite()) {
                return invalid(format!("unbounded value at interior point {}", w[1].lo));
            }
            if left > right + 1e-9 * (1.0 + left.abs()) {
                return invalid(format!("quantile decreases at p = {}", w[1].lo));
            }
        }
        Ok(QuantileFunction { segments })
    }

    pub fn constant(a: f64) -> Self {
        QuantileFunction {
            segments: vec![Segment::affine(0.0, 1.0, a, a)],
        }
    }

    /// Consecutive affine pieces `(hi, start, end)` starting at p = 0.
    pub fn piecewise(pieces: &[(f64, f64, f64)]) -> Result<Self> {
        let mut lo = 0.0;
        let mut segs = Vec::with_capacity(pieces.len());
        for (i, &(hi, a, b)) in pieces.iter().enumerate() {
            let hi = if i + 1 == pieces.len() { 1.0 } else { hi };
            if hi > lo {
                segs.push(Segment::affine(lo, hi, a, b));
                lo = hi;
            }
        }
        Self::new(segs)
    }

    /// Discrete law from `(value, mass)` pairs in increasing order of value.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut acc = 0.0;
        let pieces: Vec<(f64, f64, f64)> = atoms
            .iter()
            .filter(|a| a.1 > 0.0)
            .map(|&(v, m)| {
                acc += m;
                (acc, v, v)
            })
            .collect();
        if (acc - 1.0).abs() > 1e-9 {
            return invalid(format!("atom masses sum to {acc}"));
        }
        Self::piecewise(&pieces)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::piecewise(&[(1.0, a, b)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn index(&self, p: f64) -> usize {
        match self
            .segments
            .binary_search_by(|s| s.lo.partial_cmp(&p).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    /// `F⁻¹(p)`, the left-continuous inverse.
    pub fn eval_left(&self, p: f64) -> f64 {
        let i = self.index(p);
        let s = &self.segments[i];
        if p == s.lo && i > 0 {
            let prev = &self.segments[i - 1];
            prev.value(prev.hi)
        } else {
            s.value(p)
        }
    }

    /// `F⁻¹⁺(p)`, the right-continuous inverse.
    pub fn eval_right(&self, p: f64) -> f64 {
        let i = self.index(p);
        self.segments[i].value(p)
    }

    pub fn eval(&self, p: f64, side: Inverse) -> f64 {
        match side {
            Inverse::Left => self.eval_left(p),
            Inverse::Right => self.eval_right(p),
        }
    }

    pub fn var_minus(&self, alpha: f64) -> f64 {
        self.eval_left(alpha)
    }

    pub fn var_plus(&self, alpha: f64) -> f64 {
        self.eval_right(alpha)
    }

    fn integrate_power(&self, k: u32, shift: f64) -> Result<f64> {
        let mut sum = Sum::default();
        for s in &self.segments {
            let mut terms = s.terms();
            terms[0].coef -= shift;
            let expanded: Vec<Term> = match k {
                1 => terms,
                _ => {
                    let mut out = Vec::new();
                    for a in &terms {
                        for b in &terms {
                            out.push(a.mul(b));
                        }
                    }
                    out
                }
            };
            for t in &expanded {
                sum.add(integrate_term(t, s.lo, s.hi, INTEGRATION_TOL)?);
            }
        }
        sum.value()
    }

    pub fn mean(&self) -> f64 {
        self.integrate_power(1, 0.0).unwrap_or(f64::NAN)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        if !m.is_finite() {
            return f64::NAN;
        }
        self.integrate_power(2, m).unwrap_or(f64::NAN)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// `∫ Q dM`, reading atoms on the side they request.
    pub fn integrate_against(&self, m: &DerivativeMeasure) -> Result<f64> {
        let mut sum = Sum::default();
        for a in &m.atoms {
            if a.mass != 0.0 {
                sum.add(a.mass * self.eval(a.location, a.inverse));
            }
        }
        for piece in &m.pieces {
            let dt = piece.density.term();
            for s in &self.segments {
                let lo = s.lo.max(piece.lo);
                let hi = s.hi.min(piece.hi);
                if hi > lo {
                    for t in s.terms() {
                        sum.add(integrate_term(&t.mul(&dt), lo, hi, INTEGRATION_TOL)?);
                    }
                }
            }
        }
        sum.value()
    }

    /// `a · Q + b` for `a > 0`.
    pub fn affine(&self, a: f64, b: f64) -> QuantileFunction {
        assert!(a > 0.0, "scale must be positive");
        QuantileFunction {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    lo: s.lo,
                    hi: s.hi,
                    offset: a * s.offset + b,
                    slope: a * s.slope,
                    powers: s
                        .powers
                        .iter()
                        .map(|t| PowerTerm {
                            coef: a * t.coef,
                            ..*t
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Law of `μ + σ X` for a standardized `X`.
    pub fn scaled(&self, m: &MomentSpec) -> QuantileFunction {
        self.affine(m.sigma, m.mu)
    }

    /// Quantile function of `−X`.
    pub fn reflect(&self) -> QuantileFunction {
        QuantileFunction {
            segments: self
                .segments
                .iter()
                .rev()
                .map(|s| Segment {
                    lo: 1.0 - s.hi,
                    hi: 1.0 - s.lo,
                    offset: -s.offset - s.slope * (s.hi - s.lo),
                    slope: s.slope,
                    powers: s
                        .powers
                        .iter()
                        .map(|t| PowerTerm {
                            coef: -t.coef,
                            anchor: 1.0 - t.anchor,
                            exponent: t.exponent,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Rescales to mean `m.mu` and standard deviation `m.sigma`; `None` for a
    /// degenerate or infinite-variance shape.
    pub fn standardized(&self, m: &MomentSpec) -> Option<QuantileFunction> {
        let mean = self.mean();
        let sd = self.std_dev();
        if !(mean.is_finite() && sd.is_finite() && sd > 1e-300) {
            return None;
        }
        Some(self.affine(m.sigma / sd, m.mu - m.sigma * mean / sd))
    }

    /// `P(X ≥ x)`.
    pub fn prob_at_least(&self, x: f64) -> f64 {
        let tol = 1e-12 * (1.0 + x.abs());
        for s in &self.segments {
            if s.value(s.hi) < x - tol {
                continue;
            }
            if s.value(s.lo) >= x - tol {
                return 1.0 - s.lo;
            }
            let (mut a, mut b) = (s.lo, s.hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if s.value(m) >= x - tol {
                    b = m;
                } else {
                    a = m;
                }
            }
            return 1.0 - b;
        }
        0.0
    }

    /// `(p, q)` rows at segment ends plus `grid` interior points.
    pub fn csv_rows(&self, grid: usize) -> Vec<(f64, f64)> {
        let mut rows = Vec::new();
        let gp: Vec<f64> = (1..grid).map(|i| i as f64 / grid as f64).collect();
        for s in &self.segments {
            rows.push((s.lo, s.value(s.lo)));
            for &p in gp.iter().filter(|&&p| p > s.lo && p < s.hi) {
                rows.push((p, s.value(p)));
            }
            rows.push((s.hi, s.value(s.hi)));
        }
        rows
    }
}

/// `ρ_h[X] = ∫ Q dh̃`.
pub fn rho(h: &DistortionFunction, q: &QuantileFunction) -> Result<f64> {
    q.integrate_against(&h.dual().measure())
}

/// Why a law fails [`validate_shape`].
pub fn shape_violation(
    q: &QuantileFunction,
    class: ShapeClass,
    m: &MomentSpec,
    tol: f64,
) -> Option<String> {
    let mean = q.mean();
    let var = q.variance();
    let scale = 1.0f64.max(m.mu.abs()).max(m.sigma);
    if !((mean - m.mu).abs() <= tol * scale) {
        return Some(format!("mean {mean} differs from {}", m.mu));
    }
    if !((var - m.sigma * m.sigma).abs() <= tol * scale * scale) {
        return Some(format!("variance {var} differs from {}", m.sigma * m.sigma));
    }
    if class.is_symmetric() {
        if let Some(p) = asymmetry(q, m, tol * scale) {
            return Some(format!("not symmetric about the mean at p = {p}"));
        }
    }
    if class.is_unimodal() && !is_valley(&slope_profile(q, tol * scale)) {
        return Some("quantile slope profile is not valley-shaped".into());
    }
    None
}

/// Mean, variance and shape membership at tolerance `tol`.
pub fn validate_shape(q: &QuantileFunction, class: ShapeClass, m: &MomentSpec, tol: f64) -> bool {
    shape_violation(q, class, m, tol).is_none()
}

fn asymmetry(q: &QuantileFunction, m: &MomentSpec, tol: f64) -> Option<f64> {
    // probe inside the cells cut by the segment ends and their mirrors, where
    // the two inverses agree
    let mut cuts = vec![0.0, 1.0];
    for s in q.segments() {
        cuts.extend([s.lo, s.hi, 1.0 - s.lo, 1.0 - s.hi]);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    let mut ps: Vec<f64> = Vec::new();
    for w in cuts.windows(2) {
        for t in [0.25, 0.5, 0.75] {
            ps.push(w[0] + t * (w[1] - w[0]));
        }
    }
    ps.extend(
        (1..100)
            .map(|i| i as f64 / 100.0)
            .filter(|p| cuts.iter().all(|c| (c - p).abs() > 1e-9)),
    );
    ps.into_iter()
        .filter(|&p| p > 0.0 && p < 1.0)
        .find(|&p| {
            let a = q.eval_left(p);
            let b = q.eval_right(1.0 - p);
            let d = a + b - 2.0 * m.mu;
            // 1 − p carries a rounding error, which a steep segment magnifies
            let r = 1.0 - p;
            let res = (q.eval_right((r + f64::EPSILON).min(1.0)) - q.eval_right(r - f64::EPSILON)).abs();
            a.is_finite() && b.is_finite() && d.abs() > tol * (1.0 + a.abs()) + res
        })
}

/// Quantile slopes in p order; jumps enter as `+inf`.
fn slope_profile(q: &QuantileFunction, tol: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let segs = q.segments();
    for (i, s) in segs.iter().enumerate() {
        if i > 0 {
            let prev = &segs[i - 1];
            if s.value(s.lo) - prev.value(prev.hi) > tol {
                out.push(f64::INFINITY);
            }
        }
        if s.powers.is_empty() {
            out.push(s.slope);
        } else {
            for k in 1..16 {
                out.push(s.derivative(s.lo + (s.hi - s.lo) * k as f64 / 16.0));
            }
        }
    }
    out
}

/// Nonincreasing then nondecreasing.
fn is_valley(xs: &[f64]) -> bool {
    let close = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-9 * (1.0 + a.abs().min(b.abs()));
    let mut rising = false;
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        if close(a, b) {
            continue;
        }
        if b > a {
            rising = true;
        } else if rising {
            return false;
        }
    }
    true
}

/// Sharp upper bound on `P((X − μ)/σ ≥ v)` over the class.
pub fn tail_bound(class: ShapeClass, v: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::NegativeThreshold(v));
    }
    let v2 = v * v;
    Ok(match class {
        ShapeClass::General => 1.0 / (1.0 + v2),
        ShapeClass::Symmetric => 0.5 / v.max(1.0).powi(2),
        ShapeClass::Unimodal => {
            if v < (5.0f64 / 3.0).sqrt() {
                (3.0 - v2) / (3.0 * (1.0 + v2))
            } else {
                4.0 / (9.0 * (1.0 + v2))
            }
        }
        ShapeClass::UnimodalSymmetric => {
            if v < 2.0 / 3.0f64.sqrt() {
                0.5 * (1.0 - v / 3.0f64.sqrt())
            } else {
                2.0 / (9.0 * v2)
            }
        }
    })
}

/// Standardized law attaining [`tail_bound`] at `v`.
///
/// The general and unimodal bounds at `v = 0` are not attained. The symmetric
/// law is the one at `max(1, v)`, which attains the bound for `v ≥ 1` only.
pub fn tail_extremal(class: ShapeClass, v: f64) -> Result<QuantileFunction> {
    if !(v >= 0.0) {
        return Err(Error::NegativeThreshold(v));
    }
    let v2 = v * v;
    let no_law = || {
        Err(Error::NotAttainable(format!(
            "the {class} tail bound at v = {v} has no attaining law"
        )))
    };
    match class {
        ShapeClass::General => {
            if v == 0.0 {
                return no_law();
            }
            QuantileFunction::from_atoms(&[(-1.0 / v, v2 / (1.0 + v2)), (v, 1.0 / (1.0 + v2))])
        }
        ShapeClass::Symmetric => {
            let w = v.max(1.0);
            let t = 0.5 / (w * w);
            QuantileFunction::from_atoms(&[(-w, t), (0.0, 1.0 - 2.0 * t), (w, t)])
        }
        ShapeClass::Unimodal => {
            if v == 0.0 {
                return no_law();
            }
            if v < (5.0f64 / 3.0).sqrt() {
                // uniform on [lo, v] below an atom at v
                let w = 4.0 * v2 / (3.0 * (1.0 + v2));
                let lo = -(3.0 + v2) / (2.0 * v);
                QuantileFunction::piecewise(&[(w, lo, v), (1.0, v, v)])
            } else {
                // atom at −1/v at the foot of a uniform piece that straddles v
                let atom = -1.0 / v;
                let top = (1.0 + 3.0 * v2) / (2.0 * v);
                let mass = (3.0 * v2 - 1.0) / (3.0 * (1.0 + v2));
                QuantileFunction::piecewise(&[(mass, atom, atom), (1.0, atom, top)])
            }
        }
        ShapeClass::UnimodalSymmetric => {
            let s = 3.0f64.sqrt().max(1.5 * v);
            let center = (1.0 - 4.0 / (3.0 * v2)).max(0.0);
            let t = 0.5 * (1.0 - center);
            QuantileFunction::piecewise(&[(t, -s, 0.0), (t + center, 0.0, 0.0), (1.0, 0.0, s)])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_two_point(alpha: f64) -> QuantileFunction {
        let lo = -((1.0 - alpha) / alpha).sqrt();
        let hi = (alpha / (1.0 - alpha)).sqrt();
        QuantileFunction::from_atoms(&[(lo, alpha), (hi, 1.0 - alpha)]).unwrap()
    }

    #[test]
    fn moments() {
        assert_eq!(QuantileFunction::constant(2.5).mean(), 2.5);
        let q = std_two_point(0.95);
        assert!(q.mean().abs() < 1e-14);
        assert!((q.variance() - 1.0).abs() < 1e-13);
        let s = 3.0f64.sqrt();
        let u = QuantileFunction::uniform(1.0 - 2.0 * s, 1.0 + 2.0 * s).unwrap();
        assert!((u.mean() - 1.0).abs() < 1e-14);
        assert!((u.variance() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sides_at_atoms() {
        let q = std_two_point(0.95);
        assert!((q.eval_left(0.95) + 0.229416).abs() < 1e-6);
        assert!((q.eval_right(0.95) - 4.358899).abs() < 1e-6);
    }

    #[test]
    fn rho_examples() {
        let s = 3.0f64.sqrt();
        let u = QuantileFunction::uniform(-s, s).unwrap();
        let h = DistortionFunction::tvar(0.3).unwrap();
        // TVaR of a uniform law is the midpoint of [α, 1] mapped through Q
        let expect = s * 0.3;
        assert!((rho(&h, &u).unwrap() - expect).abs() < 1e-13);
        assert!((rho(&DistortionFunction::identity(), &u).unwrap()).abs() < 1e-15);

        let r = DistortionFunction::rvar(0.9, 0.99).unwrap();
        let q = std_two_point(0.95);
        let expect = (0.05 * q.eval_left(0.5) + 0.04 * q.eval_right(0.99)) / 0.09;
        assert!((rho(&r, &q).unwrap() - expect).abs() < 1e-13);
        assert!((expect - 1.809_835_233_867_77).abs() < 1e-12);
    }

    #[test]
    fn var_sides_follow_distortion_continuity() {
        let q = std_two_point(0.9);
        let lo = q.eval_left(0.9);
        let hi = q.eval_right(0.9);
        assert_eq!(rho(&DistortionFunction::var(0.9).unwrap(), &q).unwrap(), lo);
        assert_eq!(rho(&DistortionFunction::var_plus(0.9).unwrap(), &q).unwrap(), hi);
    }

    #[test]
    fn reflect_and_affine() {
        let q = QuantileFunction::piecewise(&[(0.25, -3.0, -1.0), (0.75, -1.0, -1.0), (1.0, 0.0, 4.0)]).unwrap();
        let r = q.reflect();
        for p in [0.1, 0.3, 0.5, 0.8, 0.95] {
            assert!((r.eval_right(p) + q.eval_left(1.0 - p)).abs() < 1e-14);
        }
        assert!((r.mean() + q.mean()).abs() < 1e-13);
        let a = q.affine(2.0, 1.0);
        assert!((a.mean() - (2.0 * q.mean() + 1.0)).abs() < 1e-13);
    }

    #[test]
    fn shape_checks() {
        let m = MomentSpec::standard();
        let two = std_two_point(0.95);
        assert!(validate_shape(&two, ShapeClass::General, &m, 1e-9));
        assert!(!validate_shape(&two, ShapeClass::Unimodal, &m, 1e-9));
        assert!(!validate_shape(&two, ShapeClass::Symmetric, &m, 1e-9));
        let w = 2.0f64;
        let three = QuantileFunction::from_atoms(&[(-w, 0.125), (0.0, 0.75), (w, 0.125)]).unwrap();
        assert!(validate_shape(&three, ShapeClass::Symmetric, &m, 1e-9));
        assert!(!validate_shape(&three, ShapeClass::UnimodalSymmetric, &m, 1e-9));
        let s = 3.0f64.sqrt();
        let u = QuantileFunction::uniform(-s, s).unwrap();
        assert!(validate_shape(&u, ShapeClass::UnimodalSymmetric, &m, 1e-9));
        let shifted = QuantileFunction::uniform(-s + 0.1, s + 0.1).unwrap();
        assert!(!validate_shape(&shifted, ShapeClass::General, &m, 1e-9));
    }

    #[test]
    fn tail_bound_examples() {
        assert_eq!(tail_bound(ShapeClass::General, 1.0).unwrap(), 0.5);
        let b = (5.0f64 / 3.0).sqrt();
        let left = (3.0 - b * b) / (3.0 * (1.0 + b * b));
        assert!((tail_bound(ShapeClass::Unimodal, b).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((left - 1.0 / 6.0).abs() < 1e-15);
        let c = 2.0 / 3.0f64.sqrt();
        assert!((tail_bound(ShapeClass::UnimodalSymmetric, c).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(tail_bound(ShapeClass::Symmetric, -0.1).is_err());
    }

    #[test]
    fn tail_extremals_attain() {
        let m = MomentSpec::standard();
        for class in ShapeClass::ALL {
            for v in [0.3, 0.9, 1.0, 1.2, 1.3, 2.0, 4.0] {
                if class == ShapeClass::Symmetric && v < 1.0 {
                    continue;
                }
                let q = tail_extremal(class, v).unwrap();
                assert!(validate_shape(&q, class, &m, 1e-9), "{class} {v}");
                let p = q.prob_at_least(v);
                let b = tail_bound(class, v).unwrap();
                assert!((p - b).abs() < 1e-9, "{class} v={v}: {p} vs {b}");
            }
        }
    }
}
