//! Signed Stieltjes measures on [0, 1]: atoms plus piecewise densities.

use crate::quadrature::{self, Kernel, Term};

/// Which generalized inverse an atom of dh̃ reads from the quantile function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inverse {
    /// F⁻¹, the left-continuous inverse.
    Left,
    /// F⁻¹⁺, the right-continuous inverse.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
    pub inverse: Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Constant(f64),
    /// `coef · (p − anchor)^exponent` for p > anchor.
    FromLeft { coef: f64, anchor: f64, exponent: f64 },
    /// `coef · (anchor − p)^exponent` for p < anchor.
    FromRight { coef: f64, anchor: f64, exponent: f64 },
}

impl Density {
    pub fn value(&self, p: f64) -> f64 {
        match *self {
            Density::Constant(c) => c,
            Density::FromLeft {
                coef,
                anchor,
                exponent,
            } => coef * (p - anchor).powf(exponent),
            Density::FromRight {
                coef,
                anchor,
                exponent,
            } => coef * (anchor - p).powf(exponent),
        }
    }

    pub fn scaled(&self, k: f64) -> Density {
        match *self {
            Density::Constant(c) => Density::Constant(k * c),
            Density::FromLeft {
                coef,
                anchor,
                exponent,
            } => Density::FromLeft {
                coef: k * coef,
                anchor,
                exponent,
            },
            Density::FromRight {
                coef,
                anchor,
                exponent,
            } => Density::FromRight {
                coef: k * coef,
                anchor,
                exponent,
            },
        }
    }

    pub(crate) fn term(&self) -> Term {
        match *self {
            Density::Constant(c) => Term::constant(c),
            Density::FromLeft {
                coef,
                anchor,
                exponent,
            }
            | Density::FromRight {
                coef,
                anchor,
                exponent,
            } => Term::power(coef, anchor, exponent),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub density: Density,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DerivativeMeasure {
    pub atoms: Vec<Atom>,
    pub pieces: Vec<DensityPiece>,
}

impl DerivativeMeasure {
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.pieces.is_empty()
    }

    pub fn scaled(&self, k: f64) -> DerivativeMeasure {
        DerivativeMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    mass: k * a.mass,
                    ..*a
                })
                .collect(),
            pieces: self
                .pieces
                .iter()
                .map(|d| DensityPiece {
                    density: d.density.scaled(k),
                    ..*d
                })
                .collect(),
        }
    }

    /// Total signed mass; `±inf` when a density is not integrable.
    pub fn total_mass(&self) -> f64 {
        quadrature::integrate_measure(&Kernel::One, self, 0.0, 1.0, quadrature::DEFAULT_TOL)
            .unwrap_or(f64::NAN)
    }

    /// Density value at `p` (sum over pieces containing `p`), ignoring atoms.
    pub fn density_at(&self, p: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|d| d.lo <= p && p <= d.hi)
            .map(|d| d.density.value(p))
            .sum()
    }

    /// True when every atom and density is nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.mass >= 0.0)
            && self.pieces.iter().all(|d| match d.density {
                Density::Constant(c) => c >= 0.0,
                Density::FromLeft { coef, .. } | Density::FromRight { coef, .. } => coef >= 0.0,
            })
    }

    pub fn is_nonpositive(&self) -> bool {
        self.scaled(-1.0).is_nonnegative()
    }

    /// Mass of the atoms located in `[lo, hi)`; an atom at 1 counts when `hi >= 1`.
    pub(crate) fn atoms_in(&self, lo: f64, hi: f64) -> impl Iterator<Item = &Atom> {
        self.atoms
            .iter()
            .filter(move |a| (a.location >= lo && a.location < hi) || (hi >= 1.0 && a.location >= 1.0))
    }
}
