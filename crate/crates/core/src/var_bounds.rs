//! Worst- and best-case quantiles over the four shape classes.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{check_level, Error, Result};
use crate::quantile::{MomentSpec, QuantileFunction, ShapeClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Sup,
    Inf,
}

impl fmt::Display for BoundSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSide::Sup => "sup",
            BoundSide::Inf => "inf",
        })
    }
}

impl FromStr for BoundSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sup" | "worst" => Ok(BoundSide::Sup),
            "inf" | "best" => Ok(BoundSide::Inf),
            other => Err(Error::Parse(format!("unknown side '{other}'"))),
        }
    }
}

/// Lower (`F⁻¹`) or upper (`F⁻¹⁺`) quantile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarKind {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "closed-form")]
    ClosedForm,
    #[serde(rename = "envelope-integral")]
    EnvelopeIntegral,
    #[serde(rename = "bracket")]
    Bracket,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed-form",
            Method::EnvelopeIntegral => "envelope-integral",
            Method::Bracket => "bracket",
        })
    }
}

/// Family whose member realises the lower end of a bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// Flat then affine (`U_R`).
    R,
    /// Affine then flat (`U_L`).
    L,
    /// Symmetric affine–flat–affine.
    Theta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketDetail {
    pub lower: f64,
    pub upper: f64,
    pub argmax_b: f64,
    pub branch: Branch,
    pub grid_size: usize,
    pub refinements: usize,
    /// Feasible law whose risk equals `lower`.
    #[serde(skip)]
    pub witness: Option<QuantileFunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub side: BoundSide,
    pub value: f64,
    pub attainable: bool,
    #[serde(skip)]
    pub extremal: Option<QuantileFunction>,
    pub method: Method,
    pub bracket: Option<BracketDetail>,
    /// The bound equals the mean.
    pub degenerate: bool,
    pub diagnostics: Vec<String>,
}

impl BoundResult {
    pub(crate) fn closed_form(side: BoundSide, value: f64) -> Self {
        BoundResult {
            side,
            value,
            attainable: false,
            extremal: None,
            method: Method::ClosedForm,
            bracket: None,
            degenerate: false,
            diagnostics: vec![],
        }
    }
}

/// Supremum of the standardized α-quantile over the class.
pub fn var_sup_standardized(class: ShapeClass, alpha: f64) -> f64 {
    let a = alpha;
    if a >= 1.0 {
        return f64::INFINITY;
    }
    match class {
        ShapeClass::General => (a / (1.0 - a)).sqrt(),
        ShapeClass::Symmetric => {
            if a >= 0.5 {
                (0.5 / (1.0 - a)).sqrt()
            } else {
                0.0
            }
        }
        ShapeClass::Unimodal => {
            if a < 5.0 / 6.0 {
                (3.0 * a / (4.0 - 3.0 * a)).sqrt()
            } else {
                (4.0 / (9.0 * (1.0 - a)) - 1.0).sqrt()
            }
        }
        ShapeClass::UnimodalSymmetric => {
            if a < 0.5 {
                0.0
            } else if a < 5.0 / 6.0 {
                3.0f64.sqrt() * (2.0 * a - 1.0)
            } else {
                (2.0 / (9.0 * (1.0 - a))).sqrt()
            }
        }
    }
}

/// Infimum of the standardized α-quantile over the class.
pub fn var_inf_standardized(class: ShapeClass, alpha: f64) -> f64 {
    let a = alpha;
    if a <= 0.0 {
        return f64::NEG_INFINITY;
    }
    match class {
        ShapeClass::General => -((1.0 - a) / a).sqrt(),
        ShapeClass::Symmetric => {
            if a <= 0.5 {
                -(0.5 / a).sqrt()
            } else {
                0.0
            }
        }
        ShapeClass::Unimodal => {
            if a >= 1.0 / 6.0 {
                -(3.0 * (1.0 - a) / (1.0 + 3.0 * a)).sqrt()
            } else {
                -(4.0 / (9.0 * a) - 1.0).sqrt()
            }
        }
        ShapeClass::UnimodalSymmetric => {
            if a > 0.5 {
                0.0
            } else if a > 1.0 / 6.0 {
                -(3.0f64.sqrt()) * (1.0 - 2.0 * a)
            } else {
                -(2.0 / (9.0 * a)).sqrt()
            }
        }
    }
}

/// Standardized law whose upper α-quantile equals the supremum.
pub(crate) fn sup_law(class: ShapeClass, a: f64) -> QuantileFunction {
    let law = match class {
        ShapeClass::General => QuantileFunction::from_atoms(&[
            (-((1.0 - a) / a).sqrt(), a),
            ((a / (1.0 - a)).sqrt(), 1.0 - a),
        ]),
        ShapeClass::Symmetric => {
            if a >= 0.5 {
                let w = (0.5 / (1.0 - a)).sqrt();
                QuantileFunction::from_atoms(&[(-w, 1.0 - a), (0.0, 2.0 * a - 1.0), (w, 1.0 - a)])
            } else {
                let w = (1.0 / a).sqrt();
                QuantileFunction::from_atoms(&[(-w, 0.5 * a), (0.0, 1.0 - a), (w, 0.5 * a)])
            }
        }
        ShapeClass::Unimodal => {
            if a < 5.0 / 6.0 {
                let v = (3.0 * a / (4.0 - 3.0 * a)).sqrt();
                let lo = -(2.0 - a) * (3.0 / (a * (4.0 - 3.0 * a))).sqrt();
                QuantileFunction::piecewise(&[(a, lo, v), (1.0, v, v)])
            } else {
                let v = (4.0 / (9.0 * (1.0 - a)) - 1.0).sqrt();
                let foot = -1.0 / v;
                let top = (1.0 + 3.0 * v * v) / (2.0 * v);
                QuantileFunction::piecewise(&[(3.0 * a - 2.0, foot, foot), (1.0, foot, top)])
            }
        }
        ShapeClass::UnimodalSymmetric => {
            if a < 0.5 {
                let s = (3.0 / a).sqrt();
                QuantileFunction::piecewise(&[
                    (0.5 * a, -s, 0.0),
                    (1.0 - 0.5 * a, 0.0, 0.0),
                    (1.0, 0.0, s),
                ])
            } else if a < 5.0 / 6.0 {
                QuantileFunction::uniform(-(3.0f64.sqrt()), 3.0f64.sqrt())
            } else {
                let s = (0.5 / (1.0 - a)).sqrt();
                let t = 3.0 * (1.0 - a);
                QuantileFunction::piecewise(&[(t, -s, 0.0), (1.0 - t, 0.0, 0.0), (1.0, 0.0, s)])
            }
        }
    };
    law.expect("extremal laws are valid quantile functions")
}

/// Extremal law for the α-quantile: the supremum law attains it through the
/// upper quantile, the infimum law through the lower quantile.
pub fn extremal_var_distribution(
    class: ShapeClass,
    side: BoundSide,
    alpha: f64,
    m: &MomentSpec,
) -> Result<QuantileFunction> {
    let a = check_level("alpha", alpha)?;
    let z = match side {
        BoundSide::Sup => sup_law(class, a),
        BoundSide::Inf => snap(sup_law(class, 1.0 - a).reflect(), a),
    };
    Ok(z.scaled(m))
}

/// Moves segment ends lying within rounding of `a` onto `a`, so that the
/// reflected law reads the intended side at `a`.
fn snap(q: QuantileFunction, a: f64) -> QuantileFunction {
    let near = |x: f64| (x - a).abs() <= 4.0 * f64::EPSILON;
    let segs: Vec<_> = q
        .segments()
        .iter()
        .cloned()
        .map(|mut s| {
            if near(s.lo) {
                s.lo = a;
            }
            if near(s.hi) {
                s.hi = a;
            }
            s
        })
        .collect();
    QuantileFunction::new(segs).unwrap_or(q)
}

/// Extremal law for the requested quantile, or an error when the bound is not attained.
pub fn extremal_var_distribution_for(
    class: ShapeClass,
    side: BoundSide,
    kind: VarKind,
    alpha: f64,
    m: &MomentSpec,
) -> Result<QuantileFunction> {
    let r = var_bound(class, side, kind, alpha, m)?;
    r.extremal.ok_or_else(|| {
        Error::NotAttainable(format!(
            "the {side} of the {} quantile over the {class} class is approached but not attained",
            match kind {
                VarKind::Minus => "lower",
                VarKind::Plus => "upper",
            }
        ))
    })
}

pub fn var_bound(
    class: ShapeClass,
    side: BoundSide,
    kind: VarKind,
    alpha: f64,
    m: &MomentSpec,
) -> Result<BoundResult> {
    let a = check_level("alpha", alpha)?;
    let m = MomentSpec::new(m.mu, m.sigma)?;
    let z = match side {
        BoundSide::Sup => var_sup_standardized(class, a),
        BoundSide::Inf => var_inf_standardized(class, a),
    };
    let value = m.scale(z);
    let law = extremal_var_distribution(class, side, a, &m)?;
    let reached = match kind {
        VarKind::Minus => law.var_minus(a),
        VarKind::Plus => law.var_plus(a),
    };
    let mut r = BoundResult::closed_form(side, value);
    r.degenerate = z == 0.0;
    if (reached - value).abs() <= 1e-9 * (1.0 + value.abs()) {
        r.attainable = true;
        r.extremal = Some(law);
    } else {
        r.diagnostics.push(format!(
            "approached by a sequence of laws; the closest extremal law gives {reached}"
        ));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantile::validate_shape;

    #[test]
    fn spot_values() {
        let m = MomentSpec::standard();
        let sup = |c, a| var_bound(c, BoundSide::Sup, VarKind::Plus, a, &m).unwrap().value;
        assert!((sup(ShapeClass::General, 0.99) - 99f64.sqrt()).abs() < 1e-12);
        assert!((sup(ShapeClass::UnimodalSymmetric, 0.9) - (2.0f64 / 0.9).sqrt()).abs() < 1e-12);
        assert!((sup(ShapeClass::Unimodal, 5.0 / 6.0) - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(sup(ShapeClass::Symmetric, 0.25), 0.0);
        let r = var_bound(ShapeClass::UnimodalSymmetric, BoundSide::Inf, VarKind::Minus, 0.1, &m).unwrap();
        assert!((r.value + 1.490712).abs() < 1e-6);
        assert!(r.attainable);
    }

    #[test]
    fn general_lower_quantile_sup_is_not_attained() {
        let m = MomentSpec::standard();
        let r = var_bound(ShapeClass::General, BoundSide::Sup, VarKind::Minus, 0.95, &m).unwrap();
        assert!(!r.attainable && r.extremal.is_none());
        let r = var_bound(ShapeClass::General, BoundSide::Sup, VarKind::Plus, 0.95, &m).unwrap();
        assert!(r.attainable);
        assert!(extremal_var_distribution_for(
            ShapeClass::General,
            BoundSide::Sup,
            VarKind::Minus,
            0.95,
            &m
        )
        .is_err());
    }

    #[test]
    fn laws_from_the_examples() {
        let m = MomentSpec::standard();
        let q = extremal_var_distribution(ShapeClass::General, BoundSide::Sup, 0.95, &m).unwrap();
        assert!((q.eval_right(0.5) + 0.229416).abs() < 1e-6);
        assert!((q.eval_right(0.97) - 4.358899).abs() < 1e-6);

        let q = extremal_var_distribution(ShapeClass::UnimodalSymmetric, BoundSide::Sup, 0.9, &m).unwrap();
        assert!((q.eval_right(0.999_999) - 5f64.sqrt()).abs() < 1e-5);
        assert_eq!(q.eval_right(0.5), 0.0);
        assert!((q.segments()[1].hi - q.segments()[1].lo - 0.4).abs() < 1e-12);

        let q = extremal_var_distribution(ShapeClass::Unimodal, BoundSide::Sup, 0.5, &m).unwrap();
        assert!((q.eval_right(0.0) + 2.323790).abs() < 1e-6);
        assert!((q.eval_right(0.75) - 0.774597).abs() < 1e-6);
    }

    #[test]
    fn every_law_is_feasible_and_attains() {
        let m = MomentSpec::new(1.5, 2.0).unwrap();
        for class in ShapeClass::ALL {
            for side in [BoundSide::Sup, BoundSide::Inf] {
                for a in [0.05, 0.1, 0.2, 0.4, 0.5, 0.6, 0.75, 0.85, 0.95, 0.99] {
                    let q = extremal_var_distribution(class, side, a, &m).unwrap();
                    assert!(validate_shape(&q, class, &m, 1e-9), "{class} {side} {a}");
                    let kind = if side == BoundSide::Sup { VarKind::Plus } else { VarKind::Minus };
                    let r = var_bound(class, side, kind, a, &m).unwrap();
                    assert!(r.attainable, "{class} {side} {a}");
                }
            }
        }
    }
}
