//! Piecewise-linear functions on [0, 1] with explicit jumps.
//!
//! A function is stored as knots `p_0 = 0 < p_1 < ... < p_n = 1`. Each knot
//! records the left limit, the value and the right limit, and the function is
//! affine between the right limit at one knot and the left limit at the next.

use crate::error::{Error, Result};

/// One breakpoint of a [`Pwl`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub p: f64,
    /// Left limit (equals `at` at p = 0).
    pub below: f64,
    pub at: f64,
    /// Right limit (equals `at` at p = 1).
    pub above: f64,
}

impl Knot {
    pub fn continuous(p: f64, v: f64) -> Self {
        Knot {
            p,
            below: v,
            at: v,
            above: v,
        }
    }

    pub fn has_jump(&self) -> bool {
        self.below != self.above || self.at != self.below || self.at != self.above
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pwl {
    knots: Vec<Knot>,
}

impl Pwl {
    pub fn new(mut knots: Vec<Knot>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidDistortion(
                "need at least the knots p = 0 and p = 1".into(),
            ));
        }
        for w in knots.windows(2) {
            if !(w[0].p < w[1].p) {
                return Err(Error::InvalidDistortion(format!(
                    "knots must be strictly increasing, got {} then {}",
                    w[0].p, w[1].p
                )));
            }
        }
        if knots[0].p != 0.0 || knots[knots.len() - 1].p != 1.0 {
            return Err(Error::InvalidDistortion(
                "knots must start at p = 0 and end at p = 1".into(),
            ));
        }
        if knots
            .iter()
            .any(|k| !(k.below.is_finite() && k.at.is_finite() && k.above.is_finite()))
        {
            return Err(Error::InvalidDistortion("non-finite knot value".into()));
        }
        let first = &mut knots[0];
        first.below = first.at;
        let n = knots.len();
        let last = &mut knots[n - 1];
        last.above = last.at;
        Ok(Pwl { knots })
    }

    /// Continuous interpolant through `(p, v)` points.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        Pwl::new(points.iter().map(|&(p, v)| Knot::continuous(p, v)).collect())
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    /// Index `i` such that `p` lies in `[p_i, p_{i+1})`, or the knot index on an exact hit.
    fn locate(&self, p: f64) -> std::result::Result<usize, usize> {
        match self.knots.binary_search_by(|k| k.p.partial_cmp(&p).unwrap()) {
            Ok(i) => Ok(i),
            Err(i) => Err(i.saturating_sub(1).min(self.knots.len() - 2)),
        }
    }

    fn interior(&self, i: usize, p: f64) -> f64 {
        let a = &self.knots[i];
        let b = &self.knots[i + 1];
        let t = (p - a.p) / (b.p - a.p);
        a.above + t * (b.below - a.above)
    }

    pub fn eval(&self, p: f64) -> f64 {
        match self.locate(p) {
            Ok(i) => self.knots[i].at,
            Err(i) => self.interior(i, p),
        }
    }

    pub fn left_limit(&self, p: f64) -> f64 {
        match self.locate(p) {
            Ok(i) => self.knots[i].below,
            Err(i) => self.interior(i, p),
        }
    }

    pub fn right_limit(&self, p: f64) -> f64 {
        match self.locate(p) {
            Ok(i) => self.knots[i].above,
            Err(i) => self.interior(i, p),
        }
    }

    /// Affine pieces as `(p0, v0, p1, v1)` with `v0` the right limit at `p0`
    /// and `v1` the left limit at `p1`.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.knots
            .windows(2)
            .map(|w| (w[0].p, w[0].above, w[1].p, w[1].below))
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.pieces()
            .map(|(p0, v0, p1, v1)| (v1 - v0) / (p1 - p0))
            .collect()
    }

    /// `p -> c - f(1 - p)`; with `c = 1` this is the dual of a distortion.
    pub fn reflect(&self, c: f64) -> Pwl {
        let knots = self
            .knots
            .iter()
            .rev()
            .map(|k| Knot {
                p: 1.0 - k.p,
                below: c - k.above,
                at: c - k.at,
                above: c - k.below,
            })
            .collect();
        Pwl { knots }
    }

    /// Pointwise linear combination `a·f + b·g` on the union of the knots.
    pub fn combine(&self, other: &Pwl, a: f64, b: f64) -> Pwl {
        let mut ps: Vec<f64> = self
            .knots
            .iter()
            .chain(other.knots.iter())
            .map(|k| k.p)
            .collect();
        ps.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ps.dedup();
        let knots = ps
            .into_iter()
            .map(|p| Knot {
                p,
                below: a * self.left_limit(p) + b * other.left_limit(p),
                at: a * self.eval(p) + b * other.eval(p),
                above: a * self.right_limit(p) + b * other.right_limit(p),
            })
            .collect();
        Pwl { knots }
    }

    /// Drops knots where the function is continuous and affine across.
    pub fn simplify(&self, tol: f64) -> Pwl {
        let mut out: Vec<Knot> = vec![self.knots[0]];
        for i in 1..self.knots.len() - 1 {
            let k = self.knots[i];
            let prev = *out.last().unwrap();
            let next = self.knots[i + 1];
            let jump = (k.below - k.at).abs() > tol || (k.above - k.at).abs() > tol;
            let s0 = (k.below - prev.above) / (k.p - prev.p);
            let s1 = (next.below - k.above) / (next.p - k.p);
            if jump || (s1 - s0).abs() > tol * (1.0 + s0.abs().max(s1.abs())) {
                out.push(k);
            }
        }
        out.push(*self.knots.last().unwrap());
        Pwl { knots: out }
    }

    /// True when the slopes are nondecreasing and there are no interior jumps.
    /// Endpoint jumps are allowed only in the direction a convex function permits.
    pub fn is_convex(&self, tol: f64) -> bool {
        let n = self.knots.len();
        if self.knots[1..n - 1].iter().any(|k| k.has_jump()) {
            return false;
        }
        if self.knots[0].above > self.knots[0].at + tol
            || self.knots[n - 1].below > self.knots[n - 1].at + tol
        {
            return false;
        }
        self.slopes()
            .windows(2)
            .all(|s| s[1] >= s[0] - tol * (1.0 + s[0].abs()))
    }

    /// Greatest convex minorant on [0, 1].
    pub fn lower_hull(&self) -> Pwl {
        let n = self.knots.len();
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(n + 2);
        let k0 = self.knots[0];
        pts.push((0.0, k0.at));
        if k0.above < k0.at {
            pts.push((0.0, k0.above));
        }
        for k in &self.knots[1..n - 1] {
            pts.push((k.p, k.below.min(k.at).min(k.above)));
        }
        let kn = self.knots[n - 1];
        if kn.below < kn.at {
            pts.push((1.0, kn.below));
        }
        pts.push((1.0, kn.at));
        let hull = lower_chain(&pts);
        from_hull_vertices(&hull)
    }
}

/// Andrew's monotone chain, lower part. Input sorted by x; stacked points at
/// equal x are kept in the given order so vertical edges at the ends survive.
pub(crate) fn lower_chain(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut h: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &pt in pts {
        while h.len() >= 2 {
            let a = h[h.len() - 2];
            let b = h[h.len() - 1];
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
                        if cross <= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(pt);
    }
    h
}

fn from_hull_vertices(hull: &[(f64, f64)]) -> Pwl {
    let mut knots: Vec<Knot> = Vec::new();
    for &(x, y) in hull {
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
    Pwl { knots }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rvar_dual(a: f64, b: f64) -> Pwl {
        Pwl::from_points(&[(0.0, 0.0), (a, 0.0), (b, 1.0), (1.0, 1.0)]).unwrap()
    }

    #[test]
    fn eval_interpolates_and_honours_sides() {
        let f = Pwl::new(vec![
            Knot::continuous(0.0, 0.0),
            Knot {
                p: 0.5,
                below: 0.2,
                at: 0.2,
                above: 0.6,
            },
            Knot::continuous(1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(f.eval(0.25), 0.1);
        assert_eq!(f.eval(0.5), 0.2);
        assert_eq!(f.right_limit(0.5), 0.6);
        assert!((f.eval(0.75) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn hull_of_rvar_dual_is_chord_from_alpha() {
        let h = rvar_dual(0.9, 0.99).lower_hull();
        assert_eq!(h.knots().len(), 3);
        assert!((h.eval(0.95) - 0.5).abs() < 1e-12);
        assert_eq!(h.eval(0.5), 0.0);
    }

    #[test]
    fn hull_bridges_jump_at_one() {
        // step up at 1: the minorant is the zero function with a jump at 1
        let f = Pwl::new(vec![
            Knot::continuous(0.0, 0.0),
            Knot {
                p: 1.0,
                below: 0.0,
                at: 1.0,
                above: 1.0,
            },
        ])
        .unwrap();
        let h = f.lower_hull();
        assert_eq!(h.knots().len(), 2);
        assert_eq!(h.left_limit(1.0), 0.0);
        assert_eq!(h.eval(1.0), 1.0);
    }

    #[test]
    fn hull_keeps_downward_jump_at_zero() {
        let f = Pwl::new(vec![
            Knot {
                p: 0.0,
                below: 0.0,
                at: 0.0,
                above: -0.5,
            },
            Knot::continuous(1.0, 0.0),
        ])
        .unwrap();
        let h = f.lower_hull();
        assert_eq!(h.eval(0.0), 0.0);
        assert_eq!(h.right_limit(0.0), -0.5);
        assert!(h.is_convex(1e-12));
    }

    #[test]
    fn reflect_is_involution() {
        let f = rvar_dual(0.25, 0.75);
        assert_eq!(f.reflect(1.0).reflect(1.0), f);
    }
}
