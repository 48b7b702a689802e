//! Distortion functions, duals, envelopes and derivative measures.

use std::fmt;

use crate::error::{check_level, Error, Result};
use crate::measure::{Atom, Density, DensityPiece, DerivativeMeasure, Inverse};
use crate::pwl::{lower_chain, Knot, Pwl};

/// Grid size used to hull functions that have no piecewise-linear form.
pub const DEFAULT_ENVELOPE_GRID: usize = 2001;

const SHAPE_TOL: f64 = 1e-12;

/// Side from which a step is taken at its jump location.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpSide {
    /// `h(t)` equals the new level.
    Right,
    /// `h(t)` equals the previous level.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub t: f64,
    pub level: f64,
    pub side: JumpSide,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Identity,
    /// `h(p) = 1{p > 1 − α}`: left-continuous, ρ_h is the lower quantile.
    VaR { alpha: f64 },
    /// `h(p) = 1{p ≥ 1 − α}`: right-continuous, ρ_h is the upper quantile.
    VaRPlus { alpha: f64 },
    TVaR { alpha: f64 },
    RVaR { alpha: f64, beta: f64 },
    /// Proportional hazard: `h(p) = min((p / (1 − α))^r, 1)`.
    PH { alpha: f64, r: f64 },
    PiecewiseLinear(Vec<(f64, f64)>),
    PiecewiseConstant(Vec<Step>),
    Dual(Box<Kind>),
    ConvexEnvelope(Box<Kind>),
    ConcaveEnvelope(Box<Kind>),
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Identity => write!(f, "identity"),
            Kind::VaR { alpha } => write!(f, "var:{alpha}"),
            Kind::VaRPlus { alpha } => write!(f, "varplus:{alpha}"),
            Kind::TVaR { alpha } => write!(f, "tvar:{alpha}"),
            Kind::RVaR { alpha, beta } => write!(f, "rvar:{alpha},{beta}"),
            Kind::PH { alpha, r } => write!(f, "ph:{alpha},{r}"),
            Kind::PiecewiseLinear(pts) => {
                let body: Vec<String> = pts.iter().map(|(p, v)| format!("{p},{v}")).collect();
                write!(f, "pwl:{}", body.join(";"))
            }
            Kind::PiecewiseConstant(steps) => {
                let body: Vec<String> = steps
                    .iter()
                    .map(|s| match s.side {
                        JumpSide::Right => format!("{},{}", s.t, s.level),
                        JumpSide::Left => format!("{},{},l", s.t, s.level),
                    })
                    .collect();
                write!(f, "steps:{}", body.join(";"))
            }
            Kind::Dual(k) => write!(f, "dual({k})"),
            Kind::ConvexEnvelope(k) => write!(f, "convex_envelope({k})"),
            Kind::ConcaveEnvelope(k) => write!(f, "concave_envelope({k})"),
        }
    }
}

/// The PH curve, or its dual, for `r < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PowerCurve {
    alpha: f64,
    r: f64,
    dual: bool,
}

impl PowerCurve {
    fn eval(&self, p: f64) -> f64 {
        let w = 1.0 - self.alpha;
        if self.dual {
            if p <= self.alpha {
                0.0
            } else {
                1.0 - ((1.0 - p) / w).powf(self.r)
            }
        } else if p >= w {
            1.0
        } else {
            (p / w).powf(self.r)
        }
    }

    /// `r (1 − α)^{−r}`
    fn scale(&self) -> f64 {
        self.r * (1.0 - self.alpha).powf(-self.r)
    }

    fn first_derivative(&self) -> DerivativeMeasure {
        let c = self.scale();
        let e = self.r - 1.0;
        let piece = if self.dual {
            DensityPiece {
                lo: self.alpha,
                hi: 1.0,
                density: Density::FromRight {
                    coef: c,
                    anchor: 1.0,
                    exponent: e,
                },
            }
        } else {
            DensityPiece {
                lo: 0.0,
                hi: 1.0 - self.alpha,
                density: Density::FromLeft {
                    coef: c,
                    anchor: 0.0,
                    exponent: e,
                },
            }
        };
        DerivativeMeasure {
            atoms: vec![],
            pieces: vec![piece],
        }
    }

    fn second_derivative(&self) -> DerivativeMeasure {
        let c = self.scale() * (1.0 - self.r);
        let e = self.r - 2.0;
        let kink = self.r / (1.0 - self.alpha);
        if self.dual {
            DerivativeMeasure {
                atoms: vec![Atom {
                    location: self.alpha,
                    mass: kink,
                    inverse: Inverse::Left,
                }],
                pieces: vec![DensityPiece {
                    lo: self.alpha,
                    hi: 1.0,
                    density: Density::FromRight {
                        coef: c,
                        anchor: 1.0,
                        exponent: e,
                    },
                }],
            }
        } else {
            DerivativeMeasure {
                atoms: vec![Atom {
                    location: 1.0 - self.alpha,
                    mass: -kink,
                    inverse: Inverse::Left,
                }],
                pieces: vec![DensityPiece {
                    lo: 0.0,
                    hi: 1.0 - self.alpha,
                    density: Density::FromLeft {
                        coef: -c,
                        anchor: 0.0,
                        exponent: e,
                    },
                }],
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Form {
    Pwl(Pwl),
    Power(PowerCurve),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuity {
    Continuous,
    LeftContinuous,
    RightContinuous,
    /// Some jumps are left-continuous and others right-continuous.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub is_simple: bool,
    pub is_concave: bool,
    pub is_convex: bool,
    /// Continuity on the open interval (0, 1).
    pub continuity: Continuity,
    /// `h(0+) = 0` and `h(1−) = 1`.
    pub boundary_ok: bool,
}

/// Nondecreasing `h: [0,1] → [0,1]` with `h(0) = 0`, `h(1) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionFunction {
    kind: Kind,
    form: Form,
}

impl fmt::Display for DistortionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}

fn step_up(t: f64, side: JumpSide) -> Knot {
    Knot {
        p: t,
        below: 0.0,
        at: if side == JumpSide::Right { 1.0 } else { 0.0 },
        above: 1.0,
    }
}

fn parametric_form(kind: &Kind, dual: bool) -> Form {
    let pts = |v: &[(f64, f64)]| Form::Pwl(Pwl::from_points(v).expect("valid parametric knots"));
    let steps = |k: Knot| {
        Form::Pwl(
            Pwl::new(vec![Knot::continuous(0.0, 0.0), k, Knot::continuous(1.0, 1.0)])
                .expect("valid step"),
        )
    };
    match (kind, dual) {
        (Kind::Identity, _) => pts(&[(0.0, 0.0), (1.0, 1.0)]),
        (Kind::VaR { alpha }, false) => steps(step_up(1.0 - alpha, JumpSide::Left)),
        (Kind::VaR { alpha }, true) => steps(step_up(*alpha, JumpSide::Right)),
        (Kind::VaRPlus { alpha }, false) => steps(step_up(1.0 - alpha, JumpSide::Right)),
        (Kind::VaRPlus { alpha }, true) => steps(step_up(*alpha, JumpSide::Left)),
        (Kind::TVaR { alpha }, false) | (Kind::PH { alpha, r: _ }, false) => {
            pts(&[(0.0, 0.0), (1.0 - alpha, 1.0), (1.0, 1.0)])
        }
        (Kind::TVaR { alpha }, true) | (Kind::PH { alpha, r: _ }, true) => {
            pts(&[(0.0, 0.0), (*alpha, 0.0), (1.0, 1.0)])
        }
        (Kind::RVaR { alpha, beta }, false) => pts(&[
            (0.0, 0.0),
            (1.0 - beta, 0.0),
            (1.0 - alpha, 1.0),
            (1.0, 1.0),
        ]),
        (Kind::RVaR { alpha, beta }, true) => {
            pts(&[(0.0, 0.0), (*alpha, 0.0), (*beta, 1.0), (1.0, 1.0)])
        }
        _ => unreachable!("not a parametric kind"),
    }
}

fn check_distortion_pwl(f: &Pwl) -> Result<()> {
    let ks = f.knots();
    let bad = |msg: String| Err(Error::InvalidDistortion(msg));
    if ks[0].at.abs() > SHAPE_TOL {
        return bad(format!("h(0) must be 0, got {}", ks[0].at));
    }
    if (ks[ks.len() - 1].at - 1.0).abs() > SHAPE_TOL {
        return bad(format!("h(1) must be 1, got {}", ks[ks.len() - 1].at));
    }
    for k in ks {
        if k.below > k.at + SHAPE_TOL || k.at > k.above + SHAPE_TOL {
            return bad(format!("h decreases at p = {}", k.p));
        }
        if k.below < -SHAPE_TOL || k.above > 1.0 + SHAPE_TOL {
            return bad(format!("h leaves [0, 1] at p = {}", k.p));
        }
    }
    for w in ks.windows(2) {
        if w[1].below < w[0].above - SHAPE_TOL {
            return bad(format!("h decreases on [{}, {}]", w[0].p, w[1].p));
        }
    }
    Ok(())
}

impl DistortionFunction {
    pub fn identity() -> Self {
        DistortionFunction {
            kind: Kind::Identity,
            form: parametric_form(&Kind::Identity, false),
        }
    }

    fn parametric(kind: Kind) -> Self {
        let form = parametric_form(&kind, false);
        DistortionFunction { kind, form }
    }

    /// Lower quantile at level α.
    pub fn var(alpha: f64) -> Result<Self> {
        let alpha = check_level("alpha", alpha)?;
        Ok(Self::parametric(Kind::VaR { alpha }))
    }

    /// Upper quantile at level α.
    pub fn var_plus(alpha: f64) -> Result<Self> {
        let alpha = check_level("alpha", alpha)?;
        Ok(Self::parametric(Kind::VaRPlus { alpha }))
    }

    pub fn tvar(alpha: f64) -> Result<Self> {
        let alpha = check_level("alpha", alpha)?;
        Ok(Self::parametric(Kind::TVaR { alpha }))
    }

    pub fn rvar(alpha: f64, beta: f64) -> Result<Self> {
        let alpha = check_level("alpha", alpha)?;
        let beta = check_level("beta", beta)?;
        if alpha >= beta {
            return Err(Error::InvalidLevel {
                name: "beta",
                value: beta,
                range: "(alpha, 1)",
            });
        }
        Ok(Self::parametric(Kind::RVaR { alpha, beta }))
    }

    pub fn ph(alpha: f64, r: f64) -> Result<Self> {
        let alpha = check_level("alpha", alpha)?;
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidLevel {
                name: "r",
                value: r,
                range: "(0, 1]",
            });
        }
        let kind = Kind::PH { alpha, r };
        let form = if r == 1.0 {
            parametric_form(&kind, false)
        } else {
            Form::Power(PowerCurve {
                alpha,
                r,
                dual: false,
            })
        };
        Ok(DistortionFunction { kind, form })
    }

    /// Continuous piecewise-linear `h` through the given `(p, h(p))` points.
    pub fn piecewise_linear(points: &[(f64, f64)]) -> Result<Self> {
        let f = Pwl::from_points(points)?;
        check_distortion_pwl(&f)?;
        Ok(DistortionFunction {
            kind: Kind::PiecewiseLinear(points.to_vec()),
            form: Form::Pwl(f),
        })
    }

    /// Step function starting at 0 that jumps to `level` at each `t`.
    pub fn piecewise_constant(steps: &[Step]) -> Result<Self> {
        let mut knots = vec![Knot::continuous(0.0, 0.0)];
        let mut level = 0.0;
        for s in steps {
            if !(0.0..=1.0).contains(&s.t) || !(0.0..=1.0).contains(&s.level) {
                return Err(Error::InvalidDistortion(format!(
                    "step ({}, {}) outside [0, 1]",
                    s.t, s.level
                )));
            }
            if s.level < level {
                return Err(Error::InvalidDistortion("step levels must be nondecreasing".into()));
            }
            let prev_t = knots.last().unwrap().p;
            if s.t <= prev_t && !(s.t == 0.0 && knots.len() == 1) {
                return Err(Error::InvalidDistortion(
                    "step locations must be strictly increasing".into(),
                ));
            }
            let at = match s.side {
                _ if s.t == 0.0 => 0.0,
                _ if s.t == 1.0 => s.level,
                JumpSide::Right => s.level,
                JumpSide::Left => level,
            };
            let k = Knot {
                p: s.t,
                below: level,
                at,
                above: s.level,
            };
            if s.t == 0.0 {
                knots[0] = Knot {
                    p: 0.0,
                    below: 0.0,
                    at: 0.0,
                    above: s.level,
                };
            } else {
                knots.push(k);
            }
            level = s.level;
        }
        if knots.last().unwrap().p < 1.0 {
            knots.push(Knot::continuous(1.0, level));
        }
        let f = Pwl::new(knots)?;
        check_distortion_pwl(&f)?;
        Ok(DistortionFunction {
            kind: Kind::PiecewiseConstant(steps.to_vec()),
            form: Form::Pwl(f),
        })
    }

    /// Wraps a piecewise-linear function that already satisfies the invariants.
    pub fn from_pwl(kind: Kind, f: Pwl) -> Result<Self> {
        check_distortion_pwl(&f)?;
        Ok(DistortionFunction {
            kind,
            form: Form::Pwl(f),
        })
    }

    /// Parses `identity`, `var:α`, `varplus:α`, `tvar:α`, `rvar:α,β`, `ph:α,r`,
    /// `pwl:p,h;...` or `steps:t,c[,l];...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let nums = |s: &str| -> Result<Vec<f64>> {
            s.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number '{x}' in '{spec}'")))
                })
                .collect()
        };
        let arity = |v: Vec<f64>, n: usize| -> Result<Vec<f64>> {
            if v.len() == n {
                Ok(v)
            } else {
                Err(Error::Parse(format!(
                    "'{name}' takes {n} parameter(s), got {} in '{spec}'",
                    v.len()
                )))
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "identity" | "mean" if args.is_empty() => Ok(Self::identity()),
            "var" => Self::var(arity(nums(args)?, 1)?[0]),
            "varplus" => Self::var_plus(arity(nums(args)?, 1)?[0]),
            "tvar" => Self::tvar(arity(nums(args)?, 1)?[0]),
            "rvar" => {
                let v = arity(nums(args)?, 2)?;
                Self::rvar(v[0], v[1])
            }
            "ph" => {
                let v = arity(nums(args)?, 2)?;
                Self::ph(v[0], v[1])
            }
            "pwl" => {
                let pts = args
                    .split(';')
                    .map(|pair| {
                        let v = arity(nums(pair)?, 2)?;
                        Ok((v[0], v[1]))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::piecewise_linear(&pts)
            }
            "steps" => {
                let steps = args
                    .split(';')
                    .map(|item| {
                        let parts: Vec<&str> = item.split(',').map(str::trim).collect();
                        let side = match parts.as_slice() {
                            [_, _] => JumpSide::Right,
                            [_, _, "l"] => JumpSide::Left,
                            [_, _, "r"] => JumpSide::Right,
                            _ => {
                                return Err(Error::Parse(format!(
                                    "bad step '{item}', expected t,c or t,c,l"
                                )))
                            }
                        };
                        let v = nums(&parts[..2].join(","))?;
                        Ok(Step {
                            t: v[0],
                            level: v[1],
                            side,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::piecewise_constant(&steps)
            }
            _ => Err(Error::Parse(format!("unknown distortion '{spec}'"))),
        }
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// The piecewise-linear representation, if there is one.
    pub fn as_pwl(&self) -> Option<&Pwl> {
        match &self.form {
            Form::Pwl(f) => Some(f),
            Form::Power(_) => None,
        }
    }

    pub fn eval(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        Ok(self.value(p))
    }

    pub(crate) fn value(&self, p: f64) -> f64 {
        match &self.form {
            Form::Pwl(f) => f.eval(p),
            Form::Power(c) => c.eval(p),
        }
    }

    pub fn left_limit(&self, p: f64) -> f64 {
        match &self.form {
            Form::Pwl(f) => f.left_limit(p),
            Form::Power(c) => c.eval(p),
        }
    }

    pub fn right_limit(&self, p: f64) -> f64 {
        match &self.form {
            Form::Pwl(f) => f.right_limit(p),
            Form::Power(c) => c.eval(p),
        }
    }

    /// `h̃(p) = 1 − h(1 − p)`.
    pub fn dual(&self) -> DistortionFunction {
        let kind = match &self.kind {
            Kind::Dual(k) => (**k).clone(),
            Kind::Identity => Kind::Identity,
            k => Kind::Dual(Box::new(k.clone())),
        };
        let form = match (&self.kind, &self.form) {
            (_, Form::Power(c)) => Form::Power(PowerCurve {
                dual: !c.dual,
                ..*c
            }),
            (Kind::Identity, _) => parametric_form(&Kind::Identity, false),
            (
                Kind::VaR { .. }
                | Kind::VaRPlus { .. }
                | Kind::TVaR { .. }
                | Kind::RVaR { .. }
                | Kind::PH { .. },
                _,
            ) => parametric_form(&self.kind, true),
            (Kind::Dual(inner), _) => match rebuild(inner) {
                Some(form) => form,
                None => Form::Pwl(self.as_pwl().expect("piecewise form").reflect(1.0)),
            },
            (_, Form::Pwl(f)) => Form::Pwl(f.reflect(1.0)),
        };
        DistortionFunction { kind, form }
    }

    pub fn classify(&self) -> Classification {
        match &self.form {
            Form::Power(c) => Classification {
                is_simple: false,
                is_concave: !c.dual,
                is_convex: c.dual,
                continuity: Continuity::Continuous,
                boundary_ok: true,
            },
            Form::Pwl(f) => {
                let ks = f.knots();
                let n = ks.len();
                let is_simple = f.slopes().iter().all(|s| s.abs() <= SHAPE_TOL);
                let is_convex = f.is_convex(SHAPE_TOL);
                let is_concave = f.reflect(1.0).is_convex(SHAPE_TOL);
                let (mut left, mut right) = (true, true);
                for k in &ks[1..n - 1] {
                    if k.above - k.below > 0.0 {
                        left &= k.at == k.below;
                        right &= k.at == k.above;
                    }
                }
                let continuity = match (left, right) {
                    (true, true) => Continuity::Continuous,
                    (true, false) => Continuity::LeftContinuous,
                    (false, true) => Continuity::RightContinuous,
                    (false, false) => Continuity::Mixed,
                };
                let boundary_ok = ks[0].above == 0.0 && ks[n - 1].below == 1.0;
                Classification {
                    is_simple,
                    is_concave,
                    is_convex,
                    continuity,
                    boundary_ok,
                }
            }
        }
    }

    /// True when `h(p) = p` everywhere.
    pub fn is_identity(&self) -> bool {
        match &self.form {
            Form::Power(_) => false,
            Form::Pwl(f) => f
                .knots()
                .iter()
                .all(|k| k.below == k.p && k.at == k.p && k.above == k.p),
        }
    }

    /// Size of the jump at 1, `h(1) − h(1−)`.
    pub fn jump_at_one(&self) -> f64 {
        1.0 - self.left_limit(1.0)
    }

    /// Size of the jump at 0, `h(0+) − h(0)`.
    pub fn jump_at_zero(&self) -> f64 {
        self.right_limit(0.0)
    }

    /// Greatest convex minorant, exact for piecewise-linear and PH inputs.
    pub fn convex_envelope(&self) -> DistortionFunction {
        let kind = Kind::ConvexEnvelope(Box::new(self.kind.clone()));
        match &self.form {
            Form::Power(c) if c.dual => self.clone(),
            // a concave distortion lies above the chord, which is then its minorant
            Form::Power(_) => DistortionFunction {
                kind,
                form: parametric_form(&Kind::Identity, false),
            },
            Form::Pwl(f) => {
                if f.is_convex(SHAPE_TOL) {
                    self.clone()
                } else {
                    DistortionFunction {
                        kind,
                        form: Form::Pwl(f.lower_hull().simplify(SHAPE_TOL)),
                    }
                }
            }
        }
    }

    /// Convex envelope from `n` uniform samples plus one-sided limits at jumps.
    pub fn convex_envelope_on_grid(&self, n: usize) -> DistortionFunction {
        let f = grid_hull(|p| self.value(p), n, self.as_pwl());
        DistortionFunction {
            kind: Kind::ConvexEnvelope(Box::new(self.kind.clone())),
            form: Form::Pwl(f),
        }
    }

    /// Least concave majorant: the dual of the convex envelope of the dual.
    pub fn concave_envelope(&self) -> DistortionFunction {
        let mut env = self.dual().convex_envelope().dual();
        if env.form != self.form {
            env.kind = Kind::ConcaveEnvelope(Box::new(self.kind.clone()));
        } else {
            env.kind = self.kind.clone();
        }
        env
    }

    /// `dh` (order 1) or `d(h′)` (order 2).
    ///
    /// The second-order measure lives on the open interval (0, 1); both one-sided
    /// derivatives induce the same measure there, so `side` only documents intent.
    pub fn derivative_measure(&self, order: u8, side: Side) -> Result<DerivativeMeasure> {
        let _ = side;
        match (order, &self.form) {
            (1, Form::Power(c)) => Ok(c.first_derivative()),
            (2, Form::Power(c)) => Ok(c.second_derivative()),
            (1, Form::Pwl(f)) => Ok(pwl_first_derivative(f)),
            (2, Form::Pwl(f)) => pwl_second_derivative(f),
            _ => Err(Error::NotRepresentable(format!(
                "derivative order {order} is not supported"
            ))),
        }
    }

    /// Order-1 measure `dh`.
    pub fn measure(&self) -> DerivativeMeasure {
        self.derivative_measure(1, Side::Right)
            .expect("first derivative always exists")
    }
}

/// Exact form of a directly constructed kind, so that double duals do not
/// accumulate rounding from `1 − (1 − p)`.
fn rebuild(k: &Kind) -> Option<Form> {
    match k {
        Kind::VaR { .. } | Kind::VaRPlus { .. } | Kind::TVaR { .. } | Kind::RVaR { .. } => {
            Some(parametric_form(k, false))
        }
        Kind::PH { alpha, r } => DistortionFunction::ph(*alpha, *r).ok().map(|h| h.form),
        Kind::PiecewiseLinear(pts) => DistortionFunction::piecewise_linear(pts).ok().map(|h| h.form),
        Kind::PiecewiseConstant(steps) => {
            DistortionFunction::piecewise_constant(steps).ok().map(|h| h.form)
        }
        _ => None,
    }
}

/// Side of a one-sided derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub(crate) fn pwl_first_derivative(f: &Pwl) -> DerivativeMeasure {
    let mut m = DerivativeMeasure::default();
    for k in f.knots() {
        let jump = k.above - k.below;
        if jump != 0.0 {
            m.atoms.push(Atom {
                location: k.p,
                mass: jump,
                inverse: if k.at == k.above {
                    Inverse::Left
                } else {
                    Inverse::Right
                },
            });
        }
    }
    for (p0, v0, p1, v1) in f.pieces() {
        let s = (v1 - v0) / (p1 - p0);
        if s != 0.0 {
            m.pieces.push(DensityPiece {
                lo: p0,
                hi: p1,
                density: Density::Constant(s),
            });
        }
    }
    m
}

fn pwl_second_derivative(f: &Pwl) -> Result<DerivativeMeasure> {
    let ks = f.knots();
    if let Some(k) = ks.iter().find(|k| k.has_jump()) {
        return Err(Error::NotRepresentable(format!(
            "jump at p = {} has no second-derivative measure",
            k.p
        )));
    }
    let slopes = f.slopes();
    let mut m = DerivativeMeasure::default();
    for (i, k) in ks.iter().enumerate().skip(1).take(ks.len() - 2) {
        let kink = slopes[i] - slopes[i - 1];
        if kink != 0.0 {
            m.atoms.push(Atom {
                location: k.p,
                mass: kink,
                inverse: Inverse::Left,
            });
        }
    }
    Ok(m)
}

/// Lower hull of `f` sampled on `n` uniform points; jumps of a piecewise
/// form contribute both one-sided limits.
pub(crate) fn grid_hull<F: Fn(f64) -> f64>(f: F, n: usize, pwl: Option<&Pwl>) -> Pwl {
    let n = n.max(2);
    let mut xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    if let Some(g) = pwl {
        xs.extend(g.knots().iter().map(|k| k.p));
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
    }
    let mut pts = Vec::with_capacity(xs.len() + 2);
    for &x in &xs {
        let (lo, at, hi) = match pwl {
            Some(g) => (g.left_limit(x), g.eval(x), g.right_limit(x)),
            None => {
                let v = f(x);
                (v, v, v)
            }
        };
        if x == 0.0 {
            pts.push((0.0, at));
            if hi < at {
                pts.push((0.0, hi));
            }
        } else if x == 1.0 {
            if lo < at {
                pts.push((1.0, lo));
            }
            pts.push((1.0, at));
        } else {
            pts.push((x, lo.min(at).min(hi)));
        }
    }
    let hull = lower_chain(&pts);
    let mut knots: Vec<Knot> = Vec::new();
    for (x, y) in hull {
        match knots.last_mut() {
            Some(k) if k.p == x => {
                if x == 0.0 {
                    k.above = y;
                } else {
                    k.at = y;
                    k.above = y;
                }
            }
            _ => knots.push(Knot::continuous(x, y)),
        }
    }
    Pwl::new(knots).expect("hull knots are ordered")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(DistortionFunction::identity().eval(0.3).unwrap(), 0.3);
        let t = DistortionFunction::tvar(0.9).unwrap();
        assert!((t.eval(0.05).unwrap() - 0.5).abs() < 1e-12);
        let r = DistortionFunction::rvar(0.9, 0.99).unwrap();
        assert!((r.eval(0.055).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(r.eval(0.005).unwrap(), 0.0);
        assert!(matches!(
            t.eval(1.5),
            Err(Error::ProbabilityOutOfRange(_))
        ));
    }

    #[test]
    fn constructors_reject_bad_levels() {
        assert!(DistortionFunction::rvar(0.9, 0.8).is_err());
        assert!(DistortionFunction::ph(0.5, 1.5).is_err());
        assert!(DistortionFunction::tvar(1.0).is_err());
        assert!(DistortionFunction::piecewise_linear(&[(0.0, 0.0), (0.5, 0.7), (0.7, 0.6), (1.0, 1.0)]).is_err());
        assert!(DistortionFunction::piecewise_linear(&[(0.0, 0.1), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn var_sides() {
        let v = DistortionFunction::var(0.9).unwrap();
        let t = 1.0 - 0.9;
        assert_eq!(v.eval(t).unwrap(), 0.0);
        assert_eq!(v.right_limit(t), 1.0);
        let d = v.dual();
        assert_eq!(d.eval(0.9).unwrap(), 1.0);
        assert_eq!(d.left_limit(0.9), 0.0);
        assert_eq!(v.classify().continuity, Continuity::LeftContinuous);
        assert_eq!(d.classify().continuity, Continuity::RightContinuous);
        let vp = DistortionFunction::var_plus(0.9).unwrap();
        assert_eq!(vp.eval(t).unwrap(), 1.0);
    }

    #[test]
    fn dual_of_rvar_matches_display() {
        let d = DistortionFunction::rvar(0.9, 0.99).unwrap().dual();
        assert_eq!(d.eval(0.5).unwrap(), 0.0);
        assert!((d.eval(0.945).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(d.eval(0.995).unwrap(), 1.0);
        assert_eq!(
            d.dual(),
            DistortionFunction::rvar(0.9, 0.99).unwrap()
        );
    }

    #[test]
    fn envelopes_of_rvar() {
        let h = DistortionFunction::rvar(0.9, 0.99).unwrap();
        let lo = h.dual().convex_envelope();
        assert_eq!(lo.eval(0.5).unwrap(), 0.0);
        assert!((lo.eval(0.95).unwrap() - 0.5).abs() < 1e-12);
        // h_* = max(0, (p + β − 1) / β) is the piece used by the infimum
        let h_lo = h.convex_envelope();
        assert_eq!(h_lo.eval(0.005).unwrap(), 0.0);
        assert!((h_lo.eval(0.5).unwrap() - (0.5 - 0.01) / 0.99).abs() < 1e-12);
        let hi = h.concave_envelope();
        assert!((hi.eval(0.05).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(hi.eval(0.5).unwrap(), 1.0);
        for i in 0..=50 {
            let p = i as f64 / 50.0;
            let via_dual = 1.0 - h.dual().convex_envelope().eval(1.0 - p).unwrap();
            assert!((hi.eval(p).unwrap() - via_dual).abs() < 1e-12);
        }
    }

    #[test]
    fn tvar_envelope_is_chord() {
        let e = DistortionFunction::tvar(0.6).unwrap().convex_envelope();
        assert!(e.is_identity());
        let e = DistortionFunction::ph(0.6, 0.5).unwrap().convex_envelope();
        assert!(e.is_identity());
    }

    #[test]
    fn classification() {
        let c = DistortionFunction::var(0.3).unwrap().classify();
        assert!(c.is_simple && !c.is_concave && !c.is_convex);
        let c = DistortionFunction::tvar(0.3).unwrap().classify();
        assert!(c.is_concave && !c.is_simple && !c.is_convex);
        let c = DistortionFunction::rvar(0.3, 0.6).unwrap().classify();
        assert!(!c.is_concave && !c.is_simple && !c.is_convex && c.boundary_ok);
        let c = DistortionFunction::ph(0.3, 0.5).unwrap().dual().classify();
        assert!(c.is_convex);
    }

    #[test]
    fn derivative_measures() {
        let m = DistortionFunction::identity().measure();
        assert!(m.atoms.is_empty());
        assert_eq!(m.pieces.len(), 1);
        assert_eq!(m.pieces[0].density, Density::Constant(1.0));

        let m = DistortionFunction::tvar(0.75)
            .unwrap()
            .dual()
            .derivative_measure(2, Side::Right)
            .unwrap();
        assert_eq!(m.atoms.len(), 1);
        assert_eq!(m.atoms[0].location, 0.75);
        assert!((m.atoms[0].mass - 4.0).abs() < 1e-12);
        assert!(m.pieces.is_empty());

        let m = DistortionFunction::ph(0.9, 0.75)
            .unwrap()
            .dual()
            .derivative_measure(2, Side::Right)
            .unwrap();
        assert!((m.atoms[0].mass - 7.5).abs() < 1e-12);
        let expected = 0.75 * 0.25 * 0.05f64.powf(-1.25) / 0.1f64.powf(0.75);
        assert!((m.density_at(0.95) - expected).abs() < 1e-9 * expected);

        let steps = DistortionFunction::parse("steps:0.3,0.5;0.8,1").unwrap();
        assert!(matches!(
            steps.derivative_measure(2, Side::Right),
            Err(Error::NotRepresentable(_))
        ));
    }

    #[test]
    fn first_derivative_has_unit_mass() {
        for spec in [
            "identity",
            "var:0.3",
            "tvar:0.7",
            "rvar:0.2,0.9",
            "ph:0.9,0.75",
            "ph:0.5,0.3",
            "steps:0,0.2;0.5,0.6,l;1,1",
        ] {
            let h = DistortionFunction::parse(spec).unwrap();
            for g in [h.clone(), h.dual()] {
                let m = g.measure().total_mass();
                assert!((m - 1.0).abs() < 1e-10, "{spec}: {m}");
            }
        }
    }

    #[test]
    fn steps_grammar() {
        let h = DistortionFunction::parse("steps:0.25,0.5;0.75,1,l").unwrap();
        assert_eq!(h.eval(0.25).unwrap(), 0.5);
        assert_eq!(h.eval(0.75).unwrap(), 0.5);
        assert_eq!(h.right_limit(0.75), 1.0);
        assert!(DistortionFunction::parse("steps:0.25,0.5").is_err());
        assert!(DistortionFunction::parse("nonsense:1").is_err());
        assert!(DistortionFunction::parse("tvar:0.5,0.2").is_err());
    }

    #[test]
    fn grid_hull_matches_exact_hull() {
        let h = DistortionFunction::parse("pwl:0,0;0.3,0.1;0.7,0.9;1,1").unwrap();
        let exact = h.convex_envelope();
        let grid = h.convex_envelope_on_grid(101);
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            assert!((exact.value(p) - grid.value(p)).abs() < 1e-12);
        }
    }
}
