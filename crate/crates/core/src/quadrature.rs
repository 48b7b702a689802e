//! Stieltjes integrals of kernels against [`DerivativeMeasure`]s.
//!
//! Integrands are products `coef · Π |p − x_i|^{e_i}` ("terms"). A term with at
//! most one anchor, or with one integer exponent, or with two square-root
//! factors bracketing the interval, is integrated in closed form. Everything
//! else goes to an adaptive 15-point Gauss–Kronrod rule with a power
//! substitution at singular endpoints.

use crate::error::{Error, Result};
use crate::measure::DerivativeMeasure;

pub const DEFAULT_TOL: f64 = 1e-10;
/// Maximum integrand evaluations per adaptive integral.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// An evaluation point with accurate distances to the interval ends.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub p: f64,
    pub from_lo: f64,
    pub to_hi: f64,
    lo: f64,
    hi: f64,
}

impl Point {
    pub fn at(p: f64) -> Self {
        Point {
            p,
            from_lo: p,
            to_hi: 1.0 - p,
            lo: 0.0,
            hi: 1.0,
        }
    }

    /// `|p − x|`, exact when `x` is an interval end.
    pub fn dist(&self, x: f64) -> f64 {
        if x == self.lo {
            self.from_lo
        } else if x == self.hi {
            self.to_hi
        } else {
            (self.p - x).abs()
        }
    }
}

/// `coef · Π |p − anchor|^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Term {
    pub coef: f64,
    pub factors: Vec<(f64, f64)>,
}

impl Term {
    pub fn constant(c: f64) -> Term {
        Term {
            coef: c,
            factors: vec![],
        }
    }

    pub fn power(c: f64, anchor: f64, exponent: f64) -> Term {
        Term {
            coef: c,
            factors: vec![(anchor, exponent)],
        }
        .normalized()
    }

    fn normalized(mut self) -> Term {
        self.factors
            .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.factors.len());
        for (x, e) in self.factors {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 += e,
                _ => out.push((x, e)),
            }
        }
        out.retain(|f| f.1 != 0.0);
        Term {
            coef: self.coef,
            factors: out,
        }
    }

    pub fn mul(&self, other: &Term) -> Term {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Term {
            coef: self.coef * other.coef,
            factors,
        }
        .normalized()
    }

    pub fn eval(&self, pt: &Point) -> f64 {
        self.factors
            .iter()
            .fold(self.coef, |acc, &(x, e)| acc * pt.dist(x).powf(e))
    }
}

/// Integral of `t^e` over `[a, b]` with `0 ≤ a ≤ b`.
fn power_integral(a: f64, b: f64, e: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if e == 0.0 {
        return b - a;
    }
    if (e + 1.0).abs() < 1e-14 {
        return if a == 0.0 { f64::INFINITY } else { (b / a).ln() };
    }
    if a == 0.0 && e < -1.0 {
        return f64::INFINITY;
    }
    (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn small_integer(e: f64) -> Option<u32> {
    if (0.0..=12.0).contains(&e) && e.fract() == 0.0 {
        Some(e as u32)
    } else {
        None
    }
}

/// Combined exponent of the factors anchored at `x`.
fn exponent_at(t: &Term, x: f64) -> f64 {
    t.factors.iter().filter(|f| f.0 == x).map(|f| f.1).sum()
}

pub(crate) fn integrate_term(t: &Term, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    integrate_term_with(t, lo, hi, tol, false)
}

fn integrate_term_with(t: &Term, lo: f64, hi: f64, tol: f64, numeric: bool) -> Result<f64> {
    if !(hi > lo) || t.coef == 0.0 {
        return Ok(0.0);
    }
    let cuts: Vec<f64> = t
        .factors
        .iter()
        .map(|f| f.0)
        .filter(|&x| x > lo && x < hi)
        .collect();
    if !cuts.is_empty() {
        let mut edges = vec![lo];
        edges.extend(cuts);
        edges.push(hi);
        let mut sum = 0.0;
        for w in edges.windows(2) {
            sum += integrate_term_with(t, w[0], w[1], tol, numeric)?;
        }
        return Ok(sum);
    }
    let (e_lo, e_hi) = (exponent_at(t, lo), exponent_at(t, hi));
    if e_lo <= -1.0 || e_hi <= -1.0 {
        return Ok(t.coef.signum() * f64::INFINITY);
    }
    if !numeric {
        if let Some(v) = closed_form(t, lo, hi) {
            return Ok(v);
        }
    }
    let tt = t.clone();
    adaptive(
        move |pt| tt.eval(pt),
        lo,
        hi,
        e_lo,
        e_hi,
        tol,
        DEFAULT_BUDGET,
    )
}

fn closed_form(t: &Term, lo: f64, hi: f64) -> Option<f64> {
    match t.factors.as_slice() {
        [] => Some(t.coef * (hi - lo)),
        &[(x, e)] => {
            let (a, b) = if x <= lo { (lo - x, hi - x) } else { (x - hi, x - lo) };
            Some(t.coef * power_integral(a, b, e))
        }
        &[(x1, e1), (x2, e2)] => {
            if let Some(n) = small_integer(e2) {
                Some(t.coef * expand(x1, e1, x2, n, lo, hi))
            } else if let Some(n) = small_integer(e1) {
                Some(t.coef * expand(x2, e2, x1, n, lo, hi))
            } else if e1 == 0.5 && e2 == 0.5 && x1 <= lo && x2 >= hi {
                let r = 0.5 * (x2 - x1);
                let c = 0.5 * (x1 + x2);
                let f = |u: f64| {
                    let s = (r * r - u * u).max(0.0).sqrt();
                    0.5 * (u * s + r * r * (u / r).clamp(-1.0, 1.0).asin())
                };
                Some(t.coef * (f(hi - c) - f(lo - c)))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// `∫ |p − x1|^e1 · |p − x2|^n dp` over `[lo, hi]` by binomial expansion in `|p − x1|`.
fn expand(x1: f64, e1: f64, x2: f64, n: u32, lo: f64, hi: f64) -> f64 {
    // sign of p − x2 on the interval
    let s = if x2 <= lo { 1.0 } else { -1.0 };
    let d = x1 - x2;
    let sn = if n.is_multiple_of(2) { 1.0 } else { s };
    let mut sum = 0.0;
    if x1 <= lo {
        // p − x2 = u + d with u = p − x1
        for j in 0..=n {
            sum += binomial(n, j) * d.powi((n - j) as i32) * power_integral(lo - x1, hi - x1, e1 + j as f64);
        }
    } else {
        // p − x2 = d − u with u = x1 − p
        for j in 0..=n {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign
                * binomial(n, j)
                * d.powi((n - j) as i32)
                * power_integral(x1 - hi, x1 - lo, e1 + j as f64);
        }
    }
    sn * sum
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Half of the split interval, parameterised by `s ∈ [0, s_max]` with
/// `p = base ± s^m`.
#[derive(Clone, Copy)]
struct HalfMap {
    from_left: bool,
    m: f64,
    lo: f64,
    hi: f64,
}

impl HalfMap {
    fn point(&self, s: f64) -> (Point, f64) {
        let d = if self.m == 1.0 { s } else { s.powf(self.m) };
        let jac = if self.m == 1.0 {
            1.0
        } else {
            self.m * s.powf(self.m - 1.0)
        };
        let pt = if self.from_left {
            let p = self.lo + d;
            Point {
                p,
                from_lo: d,
                to_hi: self.hi - p,
                lo: self.lo,
                hi: self.hi,
            }
        } else {
            let p = self.hi - d;
            Point {
                p,
                from_lo: p - self.lo,
                to_hi: d,
                lo: self.lo,
                hi: self.hi,
            }
        };
        (pt, jac)
    }
}

fn substitution_power(e: f64) -> f64 {
    if e < 0.0 {
        1.0 / (1.0 + e)
    } else {
        1.0
    }
}

struct Panel {
    map: usize,
    a: f64,
    b: f64,
    est: f64,
    err: f64,
}

fn gk15<F: Fn(&Point) -> f64>(f: &F, map: &HalfMap, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let g = |s: f64| {
        let (pt, jac) = map.point(s);
        if jac == 0.0 {
            0.0
        } else {
            f(&pt) * jac
        }
    };
    let fc = g(c);
    let mut k = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = g(c - dx) + g(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (k * h, ((k - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod on `[lo, hi]` for an integrand behaving like
/// `(p − lo)^{e_lo}` and `(hi − p)^{e_hi}` at the ends.
pub fn adaptive<F: Fn(&Point) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    e_lo: f64,
    e_hi: f64,
    tol: f64,
    budget: usize,
) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let mid = 0.5 * (lo + hi);
    let maps = [
        HalfMap {
            from_left: true,
            m: substitution_power(e_lo),
            lo,
            hi,
        },
        HalfMap {
            from_left: false,
            m: substitution_power(e_hi),
            lo,
            hi,
        },
    ];
    let spans = [
        (mid - lo).powf(1.0 / maps[0].m),
        (hi - mid).powf(1.0 / maps[1].m),
    ];
    let mut panels: Vec<Panel> = Vec::new();
    let mut evals = 0usize;
    for (i, map) in maps.iter().enumerate() {
        let (est, err) = gk15(&f, map, 0.0, spans[i]);
        evals += 15;
        panels.push(Panel {
            map: i,
            a: 0.0,
            b: spans[i],
            est,
            err,
        });
    }
    loop {
        let total: f64 = panels.iter().map(|p| p.est).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
                tol,
            });
        }
        if err <= tol {
            return Ok(total);
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err.partial_cmp(&b.1.err).unwrap())
            .unwrap();
        let worst = panels.swap_remove(idx);
        let m = 0.5 * (worst.a + worst.b);
        if evals + 30 > budget || !(m > worst.a && m < worst.b) {
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
                tol,
            });
        }
        let map = &maps[worst.map];
        for (a, b) in [(worst.a, m), (m, worst.b)] {
            let (est, err) = gk15(&f, map, a, b);
            evals += 15;
            panels.push(Panel {
                map: worst.map,
                a,
                b,
                est,
                err,
            });
        }
    }
}

/// Kernels appearing in the bound formulas.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    One,
    Identity,
    /// `√p`
    Sqrt,
    /// `√(1 − p)`
    SqrtComplement,
    /// `√(p(8 − 9p))`, defined on `[0, 8/9]`.
    UnimodalLow,
    /// `√((1 − p)(9p − 1))`, defined on `[1/9, 1]`.
    UnimodalHigh,
    /// `p(1 − p)`
    Logistic,
    /// Piecewise-linear interpolation of `(p, k(p))` nodes.
    Tabulated(Vec<(f64, f64)>),
}

const EIGHT_NINTHS: f64 = 8.0 / 9.0;
const ONE_NINTH: f64 = 1.0 / 9.0;

impl Kernel {
    pub fn eval(&self, p: f64) -> f64 {
        match self {
            Kernel::Tabulated(nodes) => tabulated(nodes, p),
            k => k
                .terms()
                .iter()
                .map(|t| t.eval(&Point::at(p)))
                .sum(),
        }
    }

    fn terms(&self) -> Vec<Term> {
        match self {
            Kernel::One => vec![Term::constant(1.0)],
            Kernel::Identity => vec![Term::power(1.0, 0.0, 1.0)],
            Kernel::Sqrt => vec![Term::power(1.0, 0.0, 0.5)],
            Kernel::SqrtComplement => vec![Term::power(1.0, 1.0, 0.5)],
            Kernel::UnimodalLow => vec![Term::power(3.0, 0.0, 0.5).mul(&Term::power(1.0, EIGHT_NINTHS, 0.5))],
            Kernel::UnimodalHigh => vec![Term::power(3.0, ONE_NINTH, 0.5).mul(&Term::power(1.0, 1.0, 0.5))],
            Kernel::Logistic => vec![Term::power(1.0, 0.0, 1.0), Term::power(-1.0, 0.0, 2.0)],
            Kernel::Tabulated(_) => unreachable!("tabulated kernels are cut into cells"),
        }
    }

    fn domain(&self) -> (f64, f64) {
        match self {
            Kernel::UnimodalLow => (0.0, EIGHT_NINTHS),
            Kernel::UnimodalHigh => (ONE_NINTH, 1.0),
            _ => (0.0, 1.0),
        }
    }

    /// `(lo, hi, terms)` cells covering `[a, b]` on which the kernel is a sum of terms.
    fn cells(&self, a: f64, b: f64) -> Vec<(f64, f64, Vec<Term>)> {
        match self {
            Kernel::Tabulated(nodes) => {
                let mut edges = vec![a];
                edges.extend(nodes.iter().map(|n| n.0).filter(|&x| x > a && x < b));
                edges.push(b);
                edges
                    .windows(2)
                    .map(|w| {
                        let (v0, v1) = (tabulated(nodes, w[0]), tabulated(nodes, w[1]));
                        let s = (v1 - v0) / (w[1] - w[0]);
                        (
                            w[0],
                            w[1],
                            vec![Term::constant(v0 - s * w[0]), Term::power(s, 0.0, 1.0)],
                        )
                    })
                    .collect()
            }
            k => vec![(a, b, k.terms())],
        }
    }
}

fn tabulated(nodes: &[(f64, f64)], p: f64) -> f64 {
    match nodes.iter().position(|n| n.0 >= p) {
        None => nodes.last().map_or(0.0, |n| n.1),
        Some(0) => nodes[0].1,
        Some(i) => {
            let (x0, y0) = nodes[i - 1];
            let (x1, y1) = nodes[i];
            if x1 == x0 {
                y1
            } else {
                y0 + (y1 - y0) * (p - x0) / (x1 - x0)
            }
        }
    }
}

/// A kernel integral `∫_{[a,b]} k(p) dM(p)`.
#[derive(Debug, Clone)]
pub struct IntegralSpec<'a> {
    pub kernel: Kernel,
    pub measure: &'a DerivativeMeasure,
    pub a: f64,
    pub b: f64,
    pub tol: f64,
}

/// Value of the integral; `±inf` when a density is not integrable against the kernel.
pub fn integrate(spec: &IntegralSpec<'_>) -> Result<f64> {
    if !(spec.a <= spec.b) || !(spec.tol > 0.0) {
        return Err(Error::InvalidLevel {
            name: "interval",
            value: spec.a,
            range: "a <= b with tol > 0",
        });
    }
    integrate_measure_with(&spec.kernel, spec.measure, spec.a, spec.b, spec.tol, false)
}

pub fn integrate_measure(
    kernel: &Kernel,
    m: &DerivativeMeasure,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    integrate_measure_with(kernel, m, a, b, tol, false)
}

/// Same as [`integrate_measure`] but never uses the closed forms.
pub fn integrate_measure_adaptive(
    kernel: &Kernel,
    m: &DerivativeMeasure,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    integrate_measure_with(kernel, m, a, b, tol, true)
}

fn integrate_measure_with(
    kernel: &Kernel,
    m: &DerivativeMeasure,
    a: f64,
    b: f64,
    tol: f64,
    numeric: bool,
) -> Result<f64> {
    let (dlo, dhi) = kernel.domain();
    let mut acc = Sum::default();
    for atom in m.atoms_in(a, b) {
        if atom.location < dlo || atom.location > dhi {
            return Err(Error::NotRepresentable(format!(
                "atom at {} lies outside the kernel domain",
                atom.location
            )));
        }
        acc.add(kernel.eval(atom.location) * atom.mass);
    }
    let npieces = m.pieces.len().max(1) as f64;
    for piece in &m.pieces {
        let lo = piece.lo.max(a);
        let hi = piece.hi.min(b);
        if !(hi > lo) {
            continue;
        }
        if lo < dlo - 1e-15 || hi > dhi + 1e-15 {
            return Err(Error::NotRepresentable(format!(
                "density on [{lo}, {hi}] leaves the kernel domain"
            )));
        }
        let dt = piece.density.term();
        for (clo, chi, terms) in kernel.cells(lo, hi) {
            let tol_cell = tol / (npieces * terms.len() as f64 * 2.0);
            for kt in &terms {
                acc.add(integrate_term_with(&kt.mul(&dt), clo, chi, tol_cell, numeric)?);
            }
        }
    }
    acc.value()
}

/// Sum that keeps track of opposite infinities.
#[derive(Default)]
pub(crate) struct Sum {
    finite: f64,
    pos_inf: bool,
    neg_inf: bool,
}

impl Sum {
    pub fn add(&mut self, x: f64) {
        if x == f64::INFINITY {
            self.pos_inf = true;
        } else if x == f64::NEG_INFINITY {
            self.neg_inf = true;
        } else {
            self.finite += x;
        }
    }

    pub fn value(&self) -> Result<f64> {
        match (self.pos_inf, self.neg_inf) {
            (true, true) => Err(Error::NotRepresentable(
                "integral has the indeterminate form inf - inf".into(),
            )),
            (true, false) => Ok(f64::INFINITY),
            (false, true) => Ok(f64::NEG_INFINITY),
            _ if self.finite.is_nan() => Err(Error::NotRepresentable("integral is NaN".into())),
            _ => Ok(self.finite),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Atom, Density, DensityPiece, Inverse};

    fn lebesgue() -> DerivativeMeasure {
        DerivativeMeasure {
            atoms: vec![],
            pieces: vec![DensityPiece {
                lo: 0.0,
                hi: 1.0,
                density: Density::Constant(1.0),
            }],
        }
    }

    #[test]
    fn identity_against_lebesgue() {
        let m = lebesgue();
        let v = integrate(&IntegralSpec {
            kernel: Kernel::Identity,
            measure: &m,
            a: 0.0,
            b: 1.0,
            tol: DEFAULT_TOL,
        })
        .unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn atom_rule() {
        let m = DerivativeMeasure {
            atoms: vec![Atom {
                location: 0.9,
                mass: 10.0,
                inverse: Inverse::Left,
            }],
            pieces: vec![],
        };
        let v = integrate_measure(&Kernel::SqrtComplement, &m, 0.0, 1.0, DEFAULT_TOL).unwrap();
        assert!((v - 0.1f64.sqrt() / 0.1).abs() < 1e-12);
    }

    #[test]
    fn divergent_power_density() {
        let (alpha, r) = (0.9f64, 0.25f64);
        let m = DerivativeMeasure {
            atoms: vec![],
            pieces: vec![DensityPiece {
                lo: alpha,
                hi: 1.0,
                density: Density::FromRight {
                    coef: r * (1.0 - r) / (1.0 - alpha).powf(r),
                    anchor: 1.0,
                    exponent: r - 2.0,
                },
            }],
        };
        let v = integrate_measure(&Kernel::SqrtComplement, &m, 0.0, 1.0, DEFAULT_TOL).unwrap();
        assert_eq!(v, f64::INFINITY);
    }

    #[test]
    fn circle_closed_form_matches_numeric() {
        let m = lebesgue();
        let exact = integrate_measure(&Kernel::UnimodalLow, &m, 0.0, 0.5, 1e-13).unwrap();
        let num = integrate_measure_adaptive(&Kernel::UnimodalLow, &m, 0.0, 0.5, 1e-13).unwrap();
        assert!((exact - num).abs() < 1e-11, "{exact} vs {num}");
        let exact = integrate_measure(&Kernel::UnimodalHigh, &m, 0.5, 1.0, 1e-13).unwrap();
        let num = integrate_measure_adaptive(&Kernel::UnimodalHigh, &m, 0.5, 1.0, 1e-13).unwrap();
        assert!((exact - num).abs() < 1e-11);
    }

    #[test]
    fn singular_endpoint_numeric() {
        // ∫_0^1 p^{-1/2} (1-p)^{-1/2} dp = π
        let t = Term::power(1.0, 0.0, -0.5).mul(&Term::power(1.0, 1.0, -0.5));
        let v = integrate_term(&t, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-10, "{v}");
    }

    #[test]
    fn binomial_expansion() {
        // ∫_0^1 p^3 (1-p)^{0.3} dp = B(4, 1.3)
        let t = Term::power(1.0, 0.0, 3.0).mul(&Term::power(1.0, 1.0, 0.3));
        let exact = integrate_term(&t, 0.0, 1.0, 1e-13).unwrap();
        let num = integrate_term_with(&t, 0.0, 1.0, 1e-13, true).unwrap();
        assert!((exact - num).abs() < 1e-12, "{exact} vs {num}");
    }

    #[test]
    fn tabulated_kernel() {
        let k = Kernel::Tabulated(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]);
        let v = integrate_measure(&k, &lebesgue(), 0.0, 1.0, DEFAULT_TOL).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }
}
