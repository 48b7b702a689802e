//! Brute-force search over moment-matched parametric families, and a checker
//! for the Moriguti inequality.
//!
//! The search never proves optimality. It reports the best feasible risk it
//! found, so a value beyond an analytic bound refutes that bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distortion::DistortionFunction;
use crate::drm_bounds::{self, right_kinked, left_kinked, symmetric_kinked, BoundResult, Method, Options};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::pwl::{lower_chain, Knot, Pwl};
use crate::quantile::{rho, validate_shape, MomentSpec, PowerTerm, QuantileFunction, Segment, ShapeClass};
use crate::var_bounds::BoundSide;

pub const DEFAULT_BUDGET: usize = 10_000;
pub const DEFAULT_SEED: u64 = 20_240_601;
/// Moment and shape tolerance for candidates.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Allowed excess of a feasible candidate over an analytic bound.
pub const VIOLATION_TOL: f64 = 1e-7;
/// Distance within which an attainable bound counts as reached.
pub const ATTAINMENT_TOL: f64 = 1e-4;

/// Candidate shapes. Each is standardized to the target moments before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// Atoms at 0 and 1 with masses `q`, `1 − q`.
    TwoPoint,
    /// Atoms at 0, `x`, 1.
    ThreePoint,
    /// 0 on `[0, b)`, `(1 − p)^{−κ}` after.
    PowerTail,
    /// Atoms ±1 with mass `t/2` each, the rest at 0.
    SymmetricThreePoint,
    /// `∓` power tails outside `[1 − b, b]`, 0 inside.
    SymmetricPowerTail,
    /// Flat then affine.
    RightKinked,
    /// Affine then flat.
    LeftKinked,
    /// Affine, flat, affine with independent slopes.
    AtomInside,
    /// Affine, flat on `[1 − b, b]`, affine.
    SymmetricKinked,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::TwoPoint,
        Family::ThreePoint,
        Family::PowerTail,
        Family::SymmetricThreePoint,
        Family::SymmetricPowerTail,
        Family::RightKinked,
        Family::LeftKinked,
        Family::AtomInside,
        Family::SymmetricKinked,
    ];

    /// Families whose members lie in the class.
    pub fn for_class(class: ShapeClass) -> Vec<Family> {
        use Family::*;
        match class {
            ShapeClass::General => Family::ALL.to_vec(),
            ShapeClass::Symmetric => vec![SymmetricThreePoint, SymmetricPowerTail, SymmetricKinked],
            ShapeClass::Unimodal => vec![RightKinked, LeftKinked, AtomInside, SymmetricKinked],
            ShapeClass::UnimodalSymmetric => vec![SymmetricKinked],
        }
    }

    /// Parameter box.
    fn bounds(self) -> Vec<(f64, f64)> {
        const E: f64 = 1e-6;
        // inf brackets on kinked families close only in the limit b -> end
        const K: f64 = 1e-9;
        match self {
            Family::TwoPoint => vec![(E, 1.0 - E)],
            Family::ThreePoint => vec![(E, 1.0 - E), (E, 1.0 - E), (E, 1.0 - E)],
            Family::PowerTail => vec![(0.0, 1.0 - 1e-3), (0.01, 0.49)],
            Family::SymmetricThreePoint => vec![(E, 1.0)],
            Family::SymmetricPowerTail => vec![(0.5, 1.0 - 1e-3), (0.01, 0.49)],
            Family::RightKinked => vec![(0.0, 1.0 - K)],
            Family::LeftKinked => vec![(K, 1.0)],
            Family::AtomInside => vec![(0.0, 1.0 - E), (E, 1.0 - E), (-3.0, 3.0)],
            Family::SymmetricKinked => vec![(0.5, 1.0 - K)],
        }
    }

    /// Raw shape for the parameters; `None` when they are infeasible.
    pub fn shape(self, x: &[f64]) -> Option<QuantileFunction> {
        let q = match self {
            Family::TwoPoint => QuantileFunction::from_atoms(&[(0.0, x[0]), (1.0, 1.0 - x[0])]),
            Family::ThreePoint => {
                let p1 = x[0];
                let p2 = x[1] * (1.0 - p1);
                QuantileFunction::from_atoms(&[(0.0, p1), (x[2], p2), (1.0, 1.0 - p1 - p2)])
            }
            Family::PowerTail => {
                let (b, k) = (x[0], x[1]);
                let tail = Segment {
                    lo: b,
                    hi: 1.0,
                    offset: 0.0,
                    slope: 0.0,
                    powers: vec![PowerTerm {
                        coef: 1.0,
                        anchor: 1.0,
                        exponent: -k,
                    }],
                };
                let mut segs = Vec::new();
                if b > 0.0 {
                    segs.push(Segment::affine(0.0, b, 0.0, 0.0));
                }
                segs.push(tail);
                QuantileFunction::new(segs)
            }
            Family::SymmetricThreePoint => {
                let t = x[0];
                QuantileFunction::from_atoms(&[(-1.0, 0.5 * t), (0.0, 1.0 - t), (1.0, 0.5 * t)])
            }
            Family::SymmetricPowerTail => {
                let (b, k) = (x[0], x[1]);
                let mut segs = vec![Segment {
                    lo: 0.0,
                    hi: 1.0 - b,
                    offset: 0.0,
                    slope: 0.0,
                    powers: vec![PowerTerm {
                        coef: -1.0,
                        anchor: 0.0,
                        exponent: -k,
                    }],
                }];
                if b > 0.5 {
                    segs.push(Segment::affine(1.0 - b, b, 0.0, 0.0));
                }
                segs.push(Segment {
                    lo: b,
                    hi: 1.0,
                    offset: 0.0,
                    slope: 0.0,
                    powers: vec![PowerTerm {
                        coef: 1.0,
                        anchor: 1.0,
                        exponent: -k,
                    }],
                });
                QuantileFunction::new(segs)
            }
            Family::RightKinked => right_kinked(x[0]),
            Family::LeftKinked => left_kinked(x[0]),
            Family::AtomInside => {
                let b1 = x[0];
                let b2 = b1 + x[1] * (1.0 - b1);
                let w = 10f64.powf(x[2]);
                QuantileFunction::piecewise(&[
                    (b1, -b1, 0.0),
                    (b2, 0.0, 0.0),
                    (1.0, 0.0, w * (1.0 - b2)),
                ])
            }
            Family::SymmetricKinked => symmetric_kinked(x[0]),
        };
        q.ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Target {
    pub distortion: String,
    pub class: ShapeClass,
    pub side: BoundSide,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub family: Family,
    pub params: Vec<f64>,
    /// The law is the reflection `−X` of the family member.
    pub reflected: bool,
    pub law: QuantileFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub target: Target,
    pub best_value: f64,
    pub best_candidate: Option<Candidate>,
    pub analytic_value: f64,
    pub analytic_method: Method,
    pub attainable: bool,
    pub bracket_lower: Option<f64>,
    pub bracket_upper: Option<f64>,
    /// `analytic − best` for a supremum, `best − analytic` for an infimum.
    pub gap: f64,
    /// The search beat the analytic bound by more than the violation tolerance.
    pub violation: bool,
    /// The search came within the attainment tolerance of the bound, or of the
    /// constructive end of a bracket. `None` when neither is required.
    pub reached: Option<bool>,
    pub families_searched: Vec<Family>,
    pub budget: usize,
    pub evaluations: usize,
    pub seed: u64,
    pub notes: Vec<String>,
}

impl OracleReport {
    /// No violation, and every required value reached.
    pub fn passed(&self) -> bool {
        !self.violation && self.reached != Some(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub budget: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: DEFAULT_BUDGET,
            seed: DEFAULT_SEED,
            execution: Execution::Auto,
        }
    }
}

struct Scored {
    score: f64,
    value: f64,
    params: Vec<f64>,
    reflected: bool,
}

/// Searches the class's families for the largest (sup) or smallest (inf) risk
/// and compares it with the analytic bound.
pub fn search(
    h: &DistortionFunction,
    class: ShapeClass,
    side: BoundSide,
    m: &MomentSpec,
    opts: &SearchOptions,
) -> Result<OracleReport> {
    let m = MomentSpec::new(m.mu, m.sigma)?;
    let analytic = drm_bounds::bound(
        h,
        class,
        side,
        &m,
        &Options {
            execution: opts.execution,
            ..Options::default()
        },
    )?;
    let families = Family::for_class(class);
    let share = (opts.budget / families.len()).max(8);
    let anchors = anchors(h);
    let sign = if side == BoundSide::Sup { 1.0 } else { -1.0 };
    let mut notes = Vec::new();
    let mut evaluations = 0;
    let mut best: Option<(Family, Scored)> = None;

    for (fi, &fam) in families.iter().enumerate() {
        let score = |x: &Vec<f64>| evaluate(h, class, &m, fam, x, sign);
        let grid = grid_points(fam, share * 6 / 10, &anchors);
        let mut results: Vec<Option<Scored>> = exec::map(opts.execution, &grid, score);
        evaluations += grid.len();
        let mut fam_best = pick(&mut results);

        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((fi as u64 + 1) << 32));
        let bounds = fam.bounds();
        let mut radius = 0.05;
        let batch = 32;
        let mut left = share.saturating_sub(grid.len());
        while left > 0 {
            let Some(centre) = fam_best.as_ref().map(|b| b.params.clone()) else {
                break;
            };
            let n = batch.min(left);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    centre
                        .iter()
                        .zip(&bounds)
                        .map(|(&c, &(lo, hi))| {
                            let w = radius * (hi - lo);
                            (c + rng.gen_range(-w..=w)).clamp(lo, hi)
                        })
                        .collect()
                })
                .collect();
            let mut res = exec::map(opts.execution, &pts, score);
            evaluations += n;
            left -= n;
            match (pick(&mut res), &fam_best) {
                (Some(c), Some(b)) if c.score > b.score => fam_best = Some(c),
                _ => radius = (radius * 0.6).max(1e-9),
            }
        }
        match fam_best {
            None => notes.push(format!("{fam:?}: no feasible member")),
            Some(b) => {
                if best.as_ref().is_none_or(|(_, cur)| b.score > cur.score) {
                    best = Some((fam, b));
                }
            }
        }
    }

    let (best_value, best_candidate) = match best {
        Some((family, s)) => {
            let law = build(family, &s.params, s.reflected, &m).expect("scored candidate rebuilds");
            (
                s.value,
                Some(Candidate {
                    family,
                    params: s.params,
                    reflected: s.reflected,
                    law,
                }),
            )
        }
        None => (f64::NAN, None),
    };
    Ok(report(h, class, side, &m, opts, analytic, best_value, best_candidate, families, evaluations, notes))
}

#[allow(clippy::too_many_arguments)]
fn report(
    h: &DistortionFunction,
    class: ShapeClass,
    side: BoundSide,
    m: &MomentSpec,
    opts: &SearchOptions,
    analytic: BoundResult,
    best_value: f64,
    best_candidate: Option<Candidate>,
    families: Vec<Family>,
    evaluations: usize,
    notes: Vec<String>,
) -> OracleReport {
    let sign = if side == BoundSide::Sup { 1.0 } else { -1.0 };
    let (bl, bu) = match &analytic.bracket {
        Some(b) => (Some(b.lower), Some(b.upper)),
        None => (None, None),
    };
    let gap = sign * (analytic.value - best_value);
    let scale = m.sigma.max(1.0);
    let violation = gap < -VIOLATION_TOL * scale;
    let reached = if let Some(b) = &analytic.bracket {
        // the constructive end of the bracket
        let target = if side == BoundSide::Sup { b.lower } else { b.upper };
        Some(sign * (target - best_value) <= ATTAINMENT_TOL * scale)
    } else if analytic.attainable {
        Some(gap <= ATTAINMENT_TOL * scale)
    } else {
        None
    };
    OracleReport {
        target: Target {
            distortion: h.to_string(),
            class,
            side,
            mu: m.mu,
            sigma: m.sigma,
        },
        best_value,
        best_candidate,
        analytic_value: analytic.value,
        analytic_method: analytic.method,
        attainable: analytic.attainable,
        bracket_lower: bl,
        bracket_upper: bu,
        gap,
        violation,
        reached,
        families_searched: families,
        budget: opts.budget,
        evaluations,
        seed: opts.seed,
        notes,
    }
}

fn build(fam: Family, x: &[f64], reflected: bool, m: &MomentSpec) -> Option<QuantileFunction> {
    let q = fam.shape(x)?.standardized(m)?;
    Some(if reflected {
        q.reflect().standardized(m)?
    } else {
        q
    })
}

/// Scores a member and its reflection; the better feasible one wins.
fn evaluate(
    h: &DistortionFunction,
    class: ShapeClass,
    m: &MomentSpec,
    fam: Family,
    x: &[f64],
    sign: f64,
) -> Option<Scored> {
    let mut out: Option<Scored> = None;
    for reflected in [false, true] {
        let Some(q) = build(fam, x, reflected, m) else {
            continue;
        };
        if !validate_shape(&q, class, m, FEASIBILITY_TOL) {
            continue;
        }
        let Ok(v) = rho(h, &q) else { continue };
        if !v.is_finite() {
            continue;
        }
        if out.as_ref().is_none_or(|o| sign * v > o.score) {
            out = Some(Scored {
                score: sign * v,
                value: v,
                params: x.to_vec(),
                reflected,
            });
        }
    }
    out
}

/// Best entry; ties keep the earliest, so the reduction is schedule-free.
fn pick(results: &mut [Option<Scored>]) -> Option<Scored> {
    let scores: Vec<f64> = results
        .iter()
        .map(|r| r.as_ref().map_or(f64::NAN, |s| s.score))
        .collect();
    exec::argmax(&scores).and_then(|i| results[i].take())
}

/// Kinks of the objective: atom locations and density ends of `dh̃`, with mirrors.
fn anchors(h: &DistortionFunction) -> Vec<f64> {
    let dm = h.dual().measure();
    let mut xs: Vec<f64> = dm.atoms.iter().map(|a| a.location).collect();
    for p in &dm.pieces {
        xs.push(p.lo);
        xs.push(p.hi);
    }
    let mirrored: Vec<f64> = xs.iter().map(|x| 1.0 - x).collect();
    xs.extend(mirrored);
    xs.retain(|x| *x > 0.0 && *x < 1.0);
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

/// Tensor grid with about `n` points, plus anchors on the first axis.
fn grid_points(fam: Family, n: usize, anchors: &[f64]) -> Vec<Vec<f64>> {
    let bounds = fam.bounds();
    let d = bounds.len();
    let k = ((n.max(1) as f64).powf(1.0 / d as f64).floor() as usize).max(2);
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| {
            let mut v: Vec<f64> = (0..k).map(|j| lo + (hi - lo) * j as f64 / (k - 1) as f64).collect();
            if i == 0 {
                v.extend(anchors.iter().copied().filter(|a| *a >= lo && *a <= hi));
                // the flat part of a centred family ends at b = 1 − t/2
                if fam == Family::SymmetricKinked {
                    v.extend(anchors.iter().map(|a| 1.0 - 0.5 * a).filter(|a| *a >= lo && *a <= hi));
                }
            }
            v
        })
        .collect();
    let mut pts: Vec<Vec<f64>> = vec![vec![]];
    for axis in &axes {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    pts
}

// -------------------------------------------------------------- Moriguti

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MorigutiReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Tabulated function: `(t, value)` rows in nondecreasing `t`. A repeated `t`
/// is a jump: the first row gives the left limit, the last the value.
fn tabulation(rows: &[(f64, f64)], name: &str) -> Result<(Pwl, f64, f64, Knot, Knot)> {
    if rows.len() < 2 {
        return Err(Error::Tabulation(format!("{name} needs at least two rows")));
    }
    let mut knots: Vec<Knot> = Vec::new();
    for &(t, v) in rows {
        if !(t.is_finite() && v.is_finite()) {
            return Err(Error::Tabulation(format!("{name} has a non-finite row")));
        }
        match knots.last_mut() {
            Some(k) if k.p == t => {
                k.at = v;
                k.above = v;
            }
            Some(k) if k.p > t => {
                return Err(Error::Tabulation(format!("{name} is not sorted at t = {t}")));
            }
            _ => knots.push(Knot {
                p: t,
                below: v,
                at: v,
                above: v,
            }),
        }
    }
    if knots.len() < 2 {
        return Err(Error::Tabulation(format!("{name} spans no interval")));
    }
    // both integrals are invariant under an affine change of t, so work on [0, 1]
    let (a, b) = (knots[0].p, knots[knots.len() - 1].p);
    let n = knots.len();
    for (i, k) in knots.iter_mut().enumerate() {
        k.p = if i == 0 {
            0.0
        } else if i == n - 1 {
            1.0
        } else {
            (k.p - a) / (b - a)
        };
    }
    let first = knots[0];
    let last = knots[n - 1];
    let f = Pwl::new(knots).map_err(|e| Error::Tabulation(format!("{name}: {e}")))?;
    Ok((f, a, b, first, last))
}

/// Checks `∫ x dH ≤ ∫ x h̄ dt` on the common interval, where `h̄` is the right
/// derivative of the greatest convex minorant of `H`.
///
/// `x` must be nondecreasing and `H` continuous at both ends. `grid` extra
/// uniform cuts refine the cells (the rules are exact on each cell anyway).
pub fn moriguti_check(x: &[(f64, f64)], big_h: &[(f64, f64)], grid: usize) -> Result<MorigutiReport> {
    let (xf, a, b, _, _) = tabulation(x, "x")?;
    let (hf, ha, hb, h0, hn) = tabulation(big_h, "H")?;
    if ha != a || hb != b {
        return Err(Error::Tabulation("x and H must share their interval".into()));
    }
    for w in xf.knots().windows(2) {
        if w[1].below < w[0].above || w[0].at < w[0].below || w[0].above < w[0].at {
            return Err(Error::Tabulation("x must be nondecreasing".into()));
        }
    }
    if h0.below != h0.above || hn.below != hn.above {
        return Err(Error::Tabulation("H must be continuous at the ends".into()));
    }

    let pts: Vec<(f64, f64)> = hf.knots().iter().map(|k| (k.p, k.below.min(k.at).min(k.above))).collect();
    let hull = lower_chain(&pts);

    let mut cuts: Vec<f64> = xf.knots().iter().chain(hf.knots()).map(|k| k.p).collect();
    cuts.extend(hull.iter().map(|v| v.0));
    cuts.extend((1..grid).map(|i| i as f64 / grid as f64));
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();

    let hull_slope = |t: f64| -> f64 {
        let i = hull.partition_point(|v| v.0 <= t).clamp(1, hull.len() - 1);
        let (p0, p1) = (hull[i - 1], hull[i]);
        (p1.1 - p0.1) / (p1.0 - p0.0)
    };
    let mut lhs = 0.0;
    for k in hf.knots() {
        lhs += (k.above - k.below) * xf.eval(k.p);
    }
    let mut rhs = 0.0;
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if !(t1 > t0) {
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        let slope_h = (hf.left_limit(t1) - hf.right_limit(t0)) / (t1 - t0);
        let slope_m = hull_slope(tm);
        // Simpson's rule is exact for the linear x on each cell
        let xi = (xf.right_limit(t0) + 4.0 * xf.eval(tm) + xf.left_limit(t1)) / 6.0 * (t1 - t0);
        lhs += slope_h * xi;
        rhs += slope_m * xi;
    }
    let scale = 1.0 + lhs.abs().max(rhs.abs());
    Ok(MorigutiReport {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9 * scale,
    })
}

/// Random `(x, H)` pair for property runs: `x` nondecreasing, `H` of bounded
/// variation with jumps inside `(0, 1)` and continuous at the ends.
pub fn random_moriguti_instance(rng: &mut impl Rng) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let n = rng.gen_range(3..12);
    let mut ts: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    ts.push(0.0);
    ts.push(1.0);
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();

    let mut x = Vec::new();
    let mut level = rng.gen_range(-2.0..2.0);
    for (i, &t) in ts.iter().enumerate() {
        if i > 0 {
            level += rng.gen_range(0.0..1.0);
        }
        x.push((t, level));
        if i > 0 && i + 1 < ts.len() && rng.gen_bool(0.2) {
            level += rng.gen_range(0.0..1.0);
            x.push((t, level));
        }
    }

    let mut big_h = Vec::new();
    let mut v = rng.gen_range(-1.0..1.0);
    for (i, &t) in ts.iter().enumerate() {
        if i > 0 {
            v += rng.gen_range(-1.0..1.0);
        }
        big_h.push((t, v));
        if i > 0 && i + 1 < ts.len() && rng.gen_bool(0.3) {
            v += rng.gen_range(-1.0..1.0);
            big_h.push((t, v));
        }
    }
    (x, big_h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moriguti_examples() {
        let x = [(0.0, 0.0), (1.0, 1.0)];
        let sq: Vec<(f64, f64)> = (0..=200).map(|i| {
            let t = i as f64 / 200.0;
            (t, t * t)
        }).collect();
        let r = moriguti_check(&x, &sq, 0).unwrap();
        assert!((r.lhs - 2.0 / 3.0).abs() < 1e-5 && (r.rhs - r.lhs).abs() < 1e-12);

        let step = [(0.0, 0.0), (0.5, 0.0), (0.5, 1.0), (1.0, 1.0)];
        let r = moriguti_check(&x, &step, 10).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-12, "{}", r.lhs);
        assert!((r.rhs - 0.75).abs() < 1e-12, "{}", r.rhs);
        assert!(r.holds);
    }

    #[test]
    fn moriguti_rejects_bad_tables() {
        let x = [(0.0, 1.0), (1.0, 0.0)];
        assert!(moriguti_check(&x, &[(0.0, 0.0), (1.0, 1.0)], 0).is_err());
        let x = [(0.0, 0.0), (1.0, 1.0)];
        assert!(moriguti_check(&x, &[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)], 0).is_err());
    }

    #[test]
    fn identity_search_is_flat() {
        let m = MomentSpec::new(1.0, 2.0).unwrap();
        let opts = SearchOptions {
            budget: 400,
            ..SearchOptions::default()
        };
        for class in ShapeClass::ALL {
            let r = search(&DistortionFunction::identity(), class, BoundSide::Sup, &m, &opts).unwrap();
            assert!((r.best_value - 1.0).abs() < 1e-9, "{class}: {}", r.best_value);
            assert!(r.passed());
        }
    }

    #[test]
    fn tvar_general_reaches_the_bound() {
        let h = DistortionFunction::tvar(0.75).unwrap();
        let r = search(&h, ShapeClass::General, BoundSide::Sup, &MomentSpec::standard(), &SearchOptions::default()).unwrap();
        assert!((r.best_value - 3f64.sqrt()).abs() < 1e-4, "{}", r.best_value);
        assert!(r.passed());
    }

    #[test]
    fn deterministic_across_schedules() {
        let h = DistortionFunction::rvar(0.3, 0.8).unwrap();
        let run = |execution| {
            search(&h, ShapeClass::Unimodal, BoundSide::Sup, &MomentSpec::standard(), &SearchOptions {
                budget: 600,
                seed: 7,
                execution,
            })
            .unwrap()
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }
}
