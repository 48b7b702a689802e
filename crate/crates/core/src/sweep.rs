//! Bounds along a grid of levels α for a one-parameter distortion family.

use serde::Serialize;

use crate::distortion::DistortionFunction;
use crate::drm_bounds::{bound, Method, Options};
use crate::error::{Error, Result};
use crate::exec;
use crate::quantile::{MomentSpec, ShapeClass};
use crate::var_bounds::BoundSide;

/// A distortion with its level left open: `var`, `varplus`, `tvar`,
/// `rvar:β` or `ph:r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Template {
    Var,
    VarPlus,
    Tvar,
    Rvar { beta: f64 },
    Ph { r: f64 },
}

impl Template {
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
        let num = || -> Result<f64> {
            arg.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("'{name}' needs one number after ':', got '{spec}'")))
        };
        let bare = |t| {
            if arg.is_empty() {
                Ok(t)
            } else {
                Err(Error::Parse(format!("'{name}' takes no parameter in a sweep; α comes from the grid")))
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "var" => bare(Template::Var),
            "varplus" => bare(Template::VarPlus),
            "tvar" => bare(Template::Tvar),
            "rvar" => Ok(Template::Rvar { beta: num()? }),
            "ph" => Ok(Template::Ph { r: num()? }),
            _ => Err(Error::Parse(format!("cannot sweep '{spec}'"))),
        }
    }

    pub fn at(&self, alpha: f64) -> Result<DistortionFunction> {
        match *self {
            Template::Var => DistortionFunction::var(alpha),
            Template::VarPlus => DistortionFunction::var_plus(alpha),
            Template::Tvar => DistortionFunction::tvar(alpha),
            Template::Rvar { beta } => DistortionFunction::rvar(alpha, beta),
            Template::Ph { r } => DistortionFunction::ph(alpha, r),
        }
    }
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("bad grid '{spec}', expected start:stop:step")))?;
    let [start, stop, step] = parts[..] else {
        return Err(Error::Parse(format!("bad grid '{spec}', expected start:stop:step")));
    };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Parse(format!("bad grid '{spec}'")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + step * i as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub sup: Option<f64>,
    pub inf: Option<f64>,
    pub method: Option<Method>,
    /// Error text when the level was rejected or a hypothesis failed.
    pub error: Option<String>,
}

/// Evaluates sup and inf at every level, in parallel over levels.
pub fn sweep(
    template: &Template,
    class: ShapeClass,
    alphas: &[f64],
    m: &MomentSpec,
    opts: &Options,
) -> Vec<SweepRow> {
    // levels run in parallel; each bound stays sequential inside
    let inner = Options {
        execution: exec::Execution::Sequential,
        ..*opts
    };
    exec::map(opts.execution, alphas, |&alpha| {
        let both = template.at(alpha).and_then(|h| {
            let s = bound(&h, class, BoundSide::Sup, m, &inner)?;
            let i = bound(&h, class, BoundSide::Inf, m, &inner)?;
            Ok((s, i))
        });
        match both {
            Ok((s, i)) => SweepRow {
                alpha,
                sup: Some(s.value),
                inf: Some(i.value),
                method: Some(s.method),
                error: None,
            },
            Err(e) => SweepRow {
                alpha,
                sup: None,
                inf: None,
                method: None,
                error: Some(e.to_string()),
            },
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive() {
        let g = parse_grid("0.05:0.95:0.05").unwrap();
        assert_eq!(g.len(), 19);
        assert!((g[18] - 0.95).abs() < 1e-12);
        assert!(parse_grid("0.5:0.1:0.1").is_err());
        assert!(parse_grid("0.1:0.5").is_err());
    }

    #[test]
    fn templates() {
        assert_eq!(Template::parse("ph:0.5").unwrap(), Template::Ph { r: 0.5 });
        assert!(Template::parse("tvar:0.5").is_err());
        assert!(Template::parse("identity").is_err());
    }

    #[test]
    fn tvar_general_sweep() {
        let rows = sweep(
            &Template::Tvar,
            ShapeClass::General,
            &parse_grid("0.1:0.9:0.2").unwrap(),
            &MomentSpec::standard(),
            &Options::default(),
        );
        for r in rows {
            let want = (r.alpha / (1.0 - r.alpha)).sqrt();
            assert!((r.sup.unwrap() - want).abs() < 1e-9);
            assert!((r.inf.unwrap()).abs() < 1e-12);
        }
    }
}
