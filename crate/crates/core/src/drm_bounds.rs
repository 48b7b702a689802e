//! Worst- and best-case distortion risk measures over the four shape classes.
//!
//! Every bound is computed for a standardized law first. The infimum of `ρ_h`
//! is `μ − σ·sup ρ_h̃`, so the infimum side runs the supremum machinery on the
//! dual and reflects the resulting law.

use crate::distortion::{pwl_first_derivative, DistortionFunction, Side};
use crate::error::{check_level, Error, Result};
use crate::exec::Execution;
use crate::measure::{Density, DensityPiece, DerivativeMeasure};
use crate::optimize::{self, Maximum};
use crate::quadrature::{self, integrate_term, Kernel, Sum, Term};
use crate::quantile::{rho, MomentSpec, PowerTerm, QuantileFunction, Segment, ShapeClass};
use crate::var_bounds::{sup_law, var_sup_standardized};

pub use crate::var_bounds::{BoundResult, BoundSide, BracketDetail, Branch, Method};

/// Relative tolerance of the attainment check `ρ_h[extremal] = value`.
pub const ATTAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub execution: Execution,
    /// Scan points for the `b`-optimization.
    pub scan: usize,
    /// Absolute tolerance for kernel integrals.
    pub tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            execution: Execution::Auto,
            scan: optimize::DEFAULT_SCAN,
            tol: quadrature::DEFAULT_TOL,
        }
    }
}

/// Supremum of `ρ_f` over standardized laws of the class.
struct Standard {
    value: f64,
    law: Option<QuantileFunction>,
    method: Method,
    bracket: Option<StdBracket>,
    degenerate: bool,
    notes: Vec<String>,
}

struct StdBracket {
    lower: f64,
    upper: f64,
    at: Maximum,
    branch: Branch,
    witness: QuantileFunction,
}

impl Standard {
    fn new(value: f64, method: Method) -> Self {
        Standard {
            value,
            law: None,
            method,
            bracket: None,
            degenerate: false,
            notes: vec![],
        }
    }
}

/// Sharp bound (or bracket) for `ρ_h` over the class.
pub fn bound(
    h: &DistortionFunction,
    class: ShapeClass,
    side: BoundSide,
    m: &MomentSpec,
    opts: &Options,
) -> Result<BoundResult> {
    let m = MomentSpec::new(m.mu, m.sigma)?;
    let f = match side {
        BoundSide::Sup => h.clone(),
        BoundSide::Inf => h.dual(),
    };
    let s = match class {
        ShapeClass::General => general(&f)?,
        ShapeClass::Symmetric => symmetric(&f)?,
        ShapeClass::Unimodal | ShapeClass::UnimodalSymmetric => shaped(&f, class, opts)?,
    };
    finish(h, side, &m, s)
}

pub fn sup_general(h: &DistortionFunction, m: &MomentSpec) -> Result<BoundResult> {
    bound(h, ShapeClass::General, BoundSide::Sup, m, &Options::default())
}

pub fn inf_general(h: &DistortionFunction, m: &MomentSpec) -> Result<BoundResult> {
    bound(h, ShapeClass::General, BoundSide::Inf, m, &Options::default())
}

pub fn sup_symmetric(h: &DistortionFunction, m: &MomentSpec) -> Result<BoundResult> {
    bound(h, ShapeClass::Symmetric, BoundSide::Sup, m, &Options::default())
}

pub fn inf_symmetric(h: &DistortionFunction, m: &MomentSpec) -> Result<BoundResult> {
    bound(h, ShapeClass::Symmetric, BoundSide::Inf, m, &Options::default())
}

pub fn sup_unimodal(h: &DistortionFunction, m: &MomentSpec) -> Result<BoundResult> {
    bound(h, ShapeClass::Unimodal, BoundSide::Sup, m, &Options::default())
}

pub fn inf_unimodal(h: &DistortionFunction, m: &MomentSpec) -> Result<BoundResult> {
    bound(h, ShapeClass::Unimodal, BoundSide::Inf, m, &Options::default())
}

pub fn sup_us(h: &DistortionFunction, m: &MomentSpec) -> Result<BoundResult> {
    bound(h, ShapeClass::UnimodalSymmetric, BoundSide::Sup, m, &Options::default())
}

pub fn inf_us(h: &DistortionFunction, m: &MomentSpec) -> Result<BoundResult> {
    bound(h, ShapeClass::UnimodalSymmetric, BoundSide::Inf, m, &Options::default())
}

fn finish(h: &DistortionFunction, side: BoundSide, m: &MomentSpec, s: Standard) -> Result<BoundResult> {
    let to_scale = |z: f64| match side {
        BoundSide::Sup => m.scale(z),
        BoundSide::Inf => m.mu - m.sigma * z,
    };
    let to_law = |q: &QuantileFunction| match side {
        BoundSide::Sup => q.scaled(m),
        BoundSide::Inf => q.reflect().scaled(m),
    };
    let value = to_scale(s.value);
    let mut out = BoundResult {
        side,
        value,
        attainable: false,
        extremal: None,
        method: s.method,
        bracket: None,
        degenerate: s.degenerate,
        diagnostics: s.notes,
    };
    if let Some(b) = s.bracket {
        let (lower, upper) = match side {
            BoundSide::Sup => (to_scale(b.lower), to_scale(b.upper)),
            BoundSide::Inf => (to_scale(b.upper), to_scale(b.lower)),
        };
        let witness = to_law(&b.witness);
        let at = if side == BoundSide::Sup { lower } else { upper };
        let r = rho(h, &witness)?;
        if (r - at).abs() > 1e-8 * (1.0 + at.abs()) {
            out.diagnostics
                .push(format!("witness gives {r}, expected {at}"));
        }
        out.bracket = Some(BracketDetail {
            lower,
            upper,
            argmax_b: b.at.x,
            branch: b.branch,
            grid_size: b.at.grid_size,
            refinements: b.at.refinements,
            witness: Some(witness),
        });
        return Ok(out);
    }
    if let (Some(q), true) = (s.law, value.is_finite()) {
        let q = to_law(&q);
        let r = rho(h, &q)?;
        if (r - value).abs() <= ATTAIN_TOL * (1.0 + value.abs()) {
            out.attainable = true;
            out.extremal = Some(q);
        } else {
            out.diagnostics
                .push(format!("candidate law gives {r}; the bound is approached, not attained"));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- general

fn general(f: &DistortionFunction) -> Result<Standard> {
    let g = f.dual();
    let env = g.convex_envelope().measure();
    let mut s = Standard::new(0.0, Method::EnvelopeIntegral);
    if has_atoms(&env) {
        s.value = f64::INFINITY;
        s.notes.push("the convex envelope of the dual jumps at 1".into());
        return Ok(s);
    }
    let i = l2_sq(&env, 1.0)?;
    if i.is_infinite() {
        s.value = f64::INFINITY;
        s.notes.push("the squared envelope slope is not integrable".into());
        return Ok(s);
    }
    if i <= 1e-24 {
        s.degenerate = true;
        s.law = two_point_fixed(f, &g);
        return Ok(s);
    }
    s.value = i.sqrt();
    s.law = Some(density_quantile(&env, 1.0, 1.0 / s.value)?);
    Ok(s)
}

/// A two-point law at a level `t` with `h̃(t) = t`, whose risk is the mean.
fn two_point_fixed(f: &DistortionFunction, g: &DistortionFunction) -> Option<QuantileFunction> {
    let mut ts = vec![0.5];
    if let Some(p) = g.as_pwl() {
        ts.extend(p.knots().iter().map(|k| k.p).filter(|&t| t > 0.0 && t < 1.0));
    }
    ts.into_iter().find_map(|t| {
        let q = QuantileFunction::from_atoms(&[
            (-((1.0 - t) / t).sqrt(), t),
            ((t / (1.0 - t)).sqrt(), 1.0 - t),
        ])
        .ok()?;
        let r = rho(f, &q).ok()?;
        (r.abs() <= ATTAIN_TOL).then_some(q)
    })
}

// -------------------------------------------------------------- symmetric

fn symmetric(f: &DistortionFunction) -> Result<Standard> {
    let g = f.dual();
    let mut s = Standard::new(0.0, Method::EnvelopeIntegral);
    let (dm, flat) = match (g.as_pwl(), f.as_pwl()) {
        (Some(gp), Some(fp)) => {
            let half = gp.combine(fp, 0.5, -0.5);
            let env = half.lower_hull().simplify(1e-14);
            (pwl_first_derivative(&env), zero_prefix(&half))
        }
        _ if f.classify().is_concave => {
            let a = g.measure().scaled(0.5);
            let b = f.measure().scaled(-0.5);
            let mut dm = a;
            dm.pieces.extend(b.pieces);
            (dm, 0.0)
        }
        // a convex f lies below its dual, so the half-difference is nonnegative
        // and its envelope vanishes
        _ => (DerivativeMeasure::default(), 0.0),
    };
    if has_atoms(&dm) {
        s.value = f64::INFINITY;
        s.notes.push("the symmetrized envelope jumps at an endpoint".into());
        return Ok(s);
    }
    let i = l2_sq(&dm, 0.0)?;
    if i.is_infinite() {
        s.value = f64::INFINITY;
        s.notes.push("the squared envelope slope is not integrable".into());
        return Ok(s);
    }
    if i <= 1e-24 {
        s.degenerate = true;
        if flat > 0.0 {
            let w = (0.5 / flat).sqrt();
            s.law = Some(QuantileFunction::from_atoms(&[
                (-w, flat),
                (0.0, 1.0 - 2.0 * flat),
                (w, flat),
            ])?);
        }
        return Ok(s);
    }
    s.value = i.sqrt();
    s.law = Some(density_quantile(&dm, 0.0, 1.0 / s.value)?);
    Ok(s)
}

/// Largest `δ ≤ 1/2` with `f = 0` on `[0, δ]`.
fn zero_prefix(f: &crate::pwl::Pwl) -> f64 {
    let z = |x: f64| x.abs() <= 1e-12;
    let ks = f.knots();
    if !(z(ks[0].at) && z(ks[0].above)) {
        return 0.0;
    }
    let mut delta = 0.0;
    for k in &ks[1..] {
        if !z(k.below) {
            break;
        }
        delta = k.p;
        if !(z(k.at) && z(k.above)) {
            break;
        }
    }
    delta.min(0.5)
}

// ---------------------------------------------------- unimodal and US

fn shaped(f: &DistortionFunction, class: ShapeClass, opts: &Options) -> Result<Standard> {
    let c = f.classify();
    let g = f.dual();
    // Summing per-level suprema bounds the supremum from above; the sum is
    // sharp only when a single level carries all the weight.
    let (kernel, method) = if c.is_simple {
        let dg = g.measure();
        let mut sum = Sum::default();
        for a in &dg.atoms {
            sum.add(a.mass * var_sup_standardized(class, a.location));
        }
        let mut s = Standard::new(sum.value()?, Method::ClosedForm);
        if let [a] = dg.atoms.as_slice() {
            if a.location > 0.0 && a.location < 1.0 {
                s.law = Some(sup_law(class, a.location));
            }
            return Ok(s);
        }
        (s.value, Method::ClosedForm)
    } else if c.is_concave {
        let mut s = Standard::new(0.0, Method::EnvelopeIntegral);
        if g.jump_at_one() > 0.0 {
            s.value = f64::INFINITY;
            s.notes.push("the dual jumps at 1".into());
            return Ok(s);
        }
        let d2 = g.derivative_measure(2, Side::Right)?;
        s.value = kernel_integral(class, &d2, opts.tol)?;
        if d2.pieces.is_empty() && d2.atoms.is_empty() {
            // linear: every law of the class gives the mean
            s.degenerate = true;
            s.law = Some(QuantileFunction::uniform(-3f64.sqrt(), 3f64.sqrt())?);
            return Ok(s);
        }
        if d2.pieces.is_empty() && d2.atoms.len() <= 1 {
            if let [a] = d2.atoms.as_slice() {
                if a.location > 0.0 && a.location < 1.0 {
                    s.law = Some(match class {
                        ShapeClass::Unimodal => tvar_law_unimodal(a.location)?,
                        _ => tvar_law_us(a.location)?,
                    });
                }
            }
            return Ok(s);
        }
        (s.value, Method::EnvelopeIntegral)
    } else {
        if !c.boundary_ok {
            return Err(Error::Hypothesis(format!(
                "{f} needs h(0+) = 0 and h(1-) = 1 for the bracket"
            )));
        }
        let env = g.convex_envelope();
        let k = if env.jump_at_one() > 0.0 {
            f64::INFINITY
        } else {
            kernel_integral(class, &env.derivative_measure(2, Side::Right)?, opts.tol)?
        };
        (k, Method::Bracket)
    };

    // the enclosing class has a sharp bound, which may be smaller
    let (outer, outer_name) = match class {
        ShapeClass::Unimodal => (general(f)?.value, "general"),
        _ => (symmetric(f)?.value, "symmetric"),
    };
    let mut notes = Vec::new();
    if outer < kernel {
        notes.push(format!(
            "the kernel integral {kernel} exceeds the sharp {outer_name} bound {outer}, which is used instead"
        ));
    }
    let upper = kernel.min(outer);
    if upper.is_infinite() {
        let mut s = Standard::new(upper, method);
        s.notes.push(divergence_note(class));
        return Ok(s);
    }
    let (lower, at, branch, witness) = family_sup(&g, class, opts)?;
    if lower > upper + 1e-9 * (1.0 + upper.abs()) {
        notes.push(format!("family value {lower} exceeds the upper bound {upper}"));
    }
    if lower >= upper - 1e-9 * (1.0 + upper.abs()) {
        // the bracket closes on a feasible law
        let mut s = Standard::new(upper, if method == Method::Bracket { Method::EnvelopeIntegral } else { method });
        s.law = Some(witness);
        s.notes = notes;
        return Ok(s);
    }
    let mut s = Standard::new(upper, Method::Bracket);
    s.notes = notes;
    s.bracket = Some(StdBracket {
        lower,
        upper,
        at,
        branch,
        witness,
    });
    Ok(s)
}

fn divergence_note(class: ShapeClass) -> String {
    match class {
        ShapeClass::Unimodal => "divergent term: (1 - p)^(r - 3/2) against the kernel near p = 1".into(),
        _ => "divergent term: the sqrt(1 - p) kernel against the curvature density near p = 1".into(),
    }
}

/// Best member of the kinked families against `dg`, standardized.
fn family_sup(
    g: &DistortionFunction,
    class: ShapeClass,
    opts: &Options,
) -> Result<(f64, Maximum, Branch, QuantileFunction)> {
    let dg = g.measure();
    let mut extra: Vec<f64> = dg.atoms.iter().map(|a| a.location).collect();
    for p in &dg.pieces {
        extra.push(p.lo);
        extra.push(p.hi);
    }
    let eval = |member: fn(f64) -> Result<QuantileFunction>, b: f64| -> f64 {
        member(b)
            .and_then(|q| q.integrate_against(&dg))
            .unwrap_or(f64::NAN)
    };
    let run = |member: fn(f64) -> Result<QuantileFunction>, lo: f64, hi: f64| {
        optimize::maximize(|b| eval(member, b), lo, hi, opts.scan, &extra, opts.execution)
    };
    let (best, branch, member): (Maximum, Branch, fn(f64) -> Result<QuantileFunction>) =
        if class == ShapeClass::Unimodal {
            let r = run(right_kinked, 0.0, 1.0 - B_GUARD);
            let l = run(left_kinked, B_GUARD, 1.0);
            if r.value >= l.value {
                (r, Branch::R, right_kinked)
            } else {
                (l, Branch::L, left_kinked)
            }
        } else {
            (run(symmetric_kinked, 0.5, 1.0 - B_GUARD), Branch::Theta, symmetric_kinked)
        };
    Ok((best.value, best, branch, member(best.x)?))
}

/// Keeps `b` away from the ends where the family degenerates.
const B_GUARD: f64 = 1e-9;

/// Standardized member of `U_R`: flat on `[0, b)`, affine after.
pub fn right_kinked(b: f64) -> Result<QuantileFunction> {
    if !(0.0..1.0).contains(&b) {
        return Err(Error::InvalidLevel {
            name: "b",
            value: b,
            range: "[0, 1)",
        });
    }
    let d = ((1.0 - b).powi(3) * (1.0 / 3.0 + b)).sqrt();
    let low = -((1.0 - b) / (1.0 / 3.0 + b)).sqrt();
    QuantileFunction::piecewise(&[(b, low, low), (1.0, low, (1.0 - b * b) / d)])
}

/// Standardized member of `U_L`: affine on `[0, b)`, flat after.
pub fn left_kinked(b: f64) -> Result<QuantileFunction> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::InvalidLevel {
            name: "b",
            value: b,
            range: "(0, 1]",
        });
    }
    let d = (b.powi(3) * (4.0 - 3.0 * b)).sqrt();
    let top = (3.0 * b / (4.0 - 3.0 * b)).sqrt();
    let start = 3f64.sqrt() * (b * b - 2.0 * b) / d;
    QuantileFunction::piecewise(&[(b, start, top), (1.0, top, top)])
}

/// Standardized member of `𝒱(b)`: affine, flat on `[1 − b, b]`, affine.
pub fn symmetric_kinked(b: f64) -> Result<QuantileFunction> {
    if !(0.5..1.0).contains(&b) {
        return Err(Error::InvalidLevel {
            name: "b",
            value: b,
            range: "[1/2, 1)",
        });
    }
    let c = 1.0 / (2.0 / 3.0 * (1.0 - b).powi(3)).sqrt();
    let w = c * (1.0 - b);
    QuantileFunction::piecewise(&[(1.0 - b, -w, 0.0), (b, 0.0, 0.0), (1.0, 0.0, w)])
}

/// Risk of the `U_R` member at `b` under the measure `dg`.
pub fn delta_r(g: &DistortionFunction, b: f64) -> Result<f64> {
    right_kinked(b)?.integrate_against(&g.measure())
}

/// Risk of the `U_L` member at `b` under the measure `dg`.
pub fn delta_l(g: &DistortionFunction, b: f64) -> Result<f64> {
    left_kinked(b)?.integrate_against(&g.measure())
}

/// Risk of the `𝒱(b)` member under the measure `dg`.
pub fn theta(g: &DistortionFunction, b: f64) -> Result<f64> {
    symmetric_kinked(b)?.integrate_against(&g.measure())
}

/// `Υ(g)`: the unimodal-symmetric kernels integrated against `dg′`.
pub fn upsilon(g: &DistortionFunction) -> Result<f64> {
    kernel_integral(
        ShapeClass::UnimodalSymmetric,
        &g.derivative_measure(2, Side::Right)?,
        quadrature::DEFAULT_TOL,
    )
}

/// The unimodal kernel `(1/3)√(p(8−9p))` / `(1/3)√((1−p)(9p−1))` against `dg′`.
pub fn unimodal_curvature_integral(g: &DistortionFunction) -> Result<f64> {
    kernel_integral(
        ShapeClass::Unimodal,
        &g.derivative_measure(2, Side::Right)?,
        quadrature::DEFAULT_TOL,
    )
}

/// Lower end of the bracket for the supremum: the best kinked-family member.
pub fn family_lower_bound(
    h: &DistortionFunction,
    class: ShapeClass,
    m: &MomentSpec,
    opts: &Options,
) -> Result<(f64, f64, Branch)> {
    if !class.is_unimodal() {
        return Err(Error::Hypothesis(format!("no kinked family for the {class} class")));
    }
    let (v, at, branch, _) = family_sup(&h.dual(), class, opts)?;
    Ok((m.scale(v), at.x, branch))
}

fn kernel_integral(class: ShapeClass, d2: &DerivativeMeasure, tol: f64) -> Result<f64> {
    let parts: Vec<(f64, Kernel, f64, f64)> = match class {
        ShapeClass::Unimodal => vec![
            (1.0 / 3.0, Kernel::UnimodalLow, 0.0, 0.5),
            (1.0 / 3.0, Kernel::UnimodalHigh, 0.5, 1.0),
        ],
        ShapeClass::UnimodalSymmetric => vec![
            (2.0 / 3.0, Kernel::Sqrt, 0.0, 1.0 / 3.0),
            (3f64.sqrt(), Kernel::Logistic, 1.0 / 3.0, 2.0 / 3.0),
            (2.0 / 3.0, Kernel::SqrtComplement, 2.0 / 3.0, 1.0),
        ],
        _ => unreachable!("kernels exist for the unimodal classes only"),
    };
    let mut sum = Sum::default();
    for (w, k, a, b) in parts {
        sum.add(w * quadrature::integrate_measure(&k, d2, a, b, tol / 3.0)?);
    }
    sum.value()
}

// ------------------------------------------------------------------ TVaR

/// Law attaining the unimodal TVaR supremum, standardized.
fn tvar_law_unimodal(a: f64) -> Result<QuantileFunction> {
    if a >= 0.5 {
        right_kinked(0.5 * (3.0 * a - 1.0))
    } else {
        left_kinked(1.5 * a)
    }
}

/// Law attaining the unimodal-symmetric TVaR supremum, standardized.
fn tvar_law_us(a: f64) -> Result<QuantileFunction> {
    let b = if a >= 2.0 / 3.0 {
        1.5 * a - 0.5
    } else if a >= 1.0 / 3.0 {
        0.5
    } else {
        1.0 - 1.5 * a
    };
    symmetric_kinked(b)
}

fn tvar_result(
    class: ShapeClass,
    alpha: f64,
    m: &MomentSpec,
    z: f64,
    law: QuantileFunction,
) -> Result<BoundResult> {
    let h = DistortionFunction::tvar(alpha)?;
    let s = Standard {
        law: Some(law),
        ..Standard::new(z, Method::ClosedForm)
    };
    let _ = class;
    finish(&h, BoundSide::Sup, m, s)
}

pub fn tvar_sup_unimodal(alpha: f64, m: &MomentSpec) -> Result<BoundResult> {
    let a = check_level("alpha", alpha)?;
    let m = MomentSpec::new(m.mu, m.sigma)?;
    let z = if a < 0.5 {
        (a * (8.0 / 9.0 - a)).sqrt() / (1.0 - a)
    } else {
        (8.0 / (9.0 * (1.0 - a)) - 1.0).sqrt()
    };
    tvar_result(ShapeClass::Unimodal, a, &m, z, tvar_law_unimodal(a)?)
}

pub fn tvar_sup_us(alpha: f64, m: &MomentSpec) -> Result<BoundResult> {
    let a = check_level("alpha", alpha)?;
    let m = MomentSpec::new(m.mu, m.sigma)?;
    let z = if a < 1.0 / 3.0 {
        2.0 * a.sqrt() / (3.0 * (1.0 - a))
    } else if a < 2.0 / 3.0 {
        3f64.sqrt() * a
    } else {
        2.0 / 3.0 / (1.0 - a).sqrt()
    };
    tvar_result(ShapeClass::UnimodalSymmetric, a, &m, z, tvar_law_us(a)?)
}

// --------------------------------------------------------------- helpers

fn has_atoms(m: &DerivativeMeasure) -> bool {
    m.atoms.iter().any(|a| a.mass.abs() > 1e-14)
}

/// Breakpoints of the density pieces, with 0 and 1.
fn cells(m: &DerivativeMeasure) -> Vec<f64> {
    let mut xs = vec![0.0, 1.0];
    for p in &m.pieces {
        xs.push(p.lo);
        xs.push(p.hi);
    }
    xs.retain(|x| (0.0..=1.0).contains(x));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

fn covering(m: &DerivativeMeasure, lo: f64, hi: f64) -> impl Iterator<Item = &DensityPiece> {
    m.pieces.iter().filter(move |p| p.lo <= lo && p.hi >= hi)
}

/// `∫₀¹ (density − shift)² dp`.
fn l2_sq(m: &DerivativeMeasure, shift: f64) -> Result<f64> {
    let mut sum = Sum::default();
    for w in cells(m).windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut terms = vec![Term::constant(-shift)];
        terms.extend(covering(m, lo, hi).map(|p| p.density.term()));
        for a in &terms {
            for b in &terms {
                sum.add(integrate_term(&a.mul(b), lo, hi, quadrature::DEFAULT_TOL)?);
            }
        }
    }
    sum.value()
}

/// Quantile function `scale · (density − shift)`.
fn density_quantile(m: &DerivativeMeasure, shift: f64, scale: f64) -> Result<QuantileFunction> {
    let mut segs: Vec<Segment> = Vec::new();
    for w in cells(m).windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut offset = -shift;
        let mut powers = Vec::new();
        for p in covering(m, lo, hi) {
            match p.density {
                Density::Constant(c) => offset += c,
                Density::FromLeft {
                    coef,
                    anchor,
                    exponent,
                }
                | Density::FromRight {
                    coef,
                    anchor,
                    exponent,
                } => powers.push(PowerTerm {
                    coef: scale * coef,
                    anchor,
                    exponent,
                }),
            }
        }
        let offset = scale * offset;
        match segs.last_mut() {
            Some(s) if powers.is_empty() && s.is_constant() && (s.offset - offset).abs() <= 1e-15 => {
                s.hi = hi;
            }
            _ => segs.push(Segment {
                lo,
                hi,
                offset,
                slope: 0.0,
                powers,
            }),
        }
    }
    QuantileFunction::new(segs)
}
