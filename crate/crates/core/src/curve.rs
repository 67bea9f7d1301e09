//! General real functions of one variable.
//!
//! Coefficient slots such as `κ(s)`, `ρ(s)`, `φ(s)`, `ν(s)` or `F` need not
//! be monotone (a constant `κ ≡ 2` is a perfectly good coefficient), so they
//! are [`Curve`]s rather than [`ScaleFunction`]s.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::eta::GammaMap;
use crate::scales::{Knots, ScaleFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Curve {
    Constant { value: f64 },
    Scale { scale: ScaleFunction },
    /// The inverse `f^{-1}` of a strictly monotone scale.
    InverseOf { scale: ScaleFunction },
    /// `amplitude·sin(frequency·(t − center))`
    Sine {
        amplitude: f64,
        frequency: f64,
        center: f64,
    },
    /// Piecewise-linear, values unrestricted.
    Table { knots: Knots },
    /// `factor·inner(t)`
    Scaled { inner: Box<Curve>, factor: f64 },
    /// `λ ↦ γ(λ, s)` for a fixed `s`.
    GammaSection { gamma: Box<GammaMap>, s: f64 },
}

impl Curve {
    pub fn constant(value: f64) -> Self {
        Curve::Constant { value }
    }

    pub fn scale(scale: ScaleFunction) -> Self {
        Curve::Scale { scale }
    }

    pub fn identity() -> Self {
        Curve::scale(ScaleFunction::identity())
    }

    pub fn table(knots: Knots) -> Self {
        Curve::Table { knots }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = match self {
            Curve::Constant { value } => *value,
            Curve::Scale { scale } => return scale.eval(t),
            Curve::InverseOf { scale } => return scale.invert(t),
            Curve::Sine {
                amplitude,
                frequency,
                center,
            } => amplitude * (frequency * (t - center)).sin(),
            Curve::Table { knots } => return knots.interpolate(t),
            Curve::Scaled { inner, factor } => factor * inner.eval(t)?,
            Curve::GammaSection { gamma, s } => return gamma.eval(t, *s),
        };
        finite(v, || format!("curve value at {t}"))
    }

    /// The underlying scale when the curve is one.
    pub fn as_scale(&self) -> Option<&ScaleFunction> {
        match self {
            Curve::Scale { scale } => Some(scale),
            _ => None,
        }
    }

    /// Strictly monotone view of the curve, needed wherever it gets inverted.
    pub fn to_scale(&self) -> Result<ScaleFunction> {
        match self {
            Curve::Scale { scale } => Ok(scale.clone()),
            Curve::InverseOf { scale } => scale.inverted(),
            Curve::Table { knots } => ScaleFunction::table(knots.clone()),
            other => Err(Error::NotInvertible(format!(
                "curve {other:?} is not a strictly monotone scale"
            ))),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Curve::Constant { value } => Some(*value),
            _ => None,
        }
    }
}

impl From<ScaleFunction> for Curve {
    fn from(scale: ScaleFunction) -> Self {
        Curve::Scale { scale }
    }
}

impl From<f64> for Curve {
    fn from(value: f64) -> Self {
        Curve::Constant { value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn variants_evaluate() {
        assert_eq!(Curve::constant(3.0).eval(-7.0).unwrap(), 3.0);
        let sine = Curve::Sine {
            amplitude: 1.0,
            frequency: PI,
            center: 0.5,
        };
        assert!((sine.eval(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(sine.eval(0.5).unwrap(), 0.0);
        let inv = Curve::InverseOf {
            scale: ScaleFunction::power(1.0, 2.0, 0.0).unwrap(),
        };
        assert!((inv.eval(9.0).unwrap() - 3.0).abs() < 1e-15);
        let scaled = Curve::Scaled {
            inner: Box::new(inv),
            factor: 0.5,
        };
        assert!((scaled.eval(4.0).unwrap() - 1.0).abs() < 1e-15);
        let t = Curve::table(Knots::from_pairs(&[(0.0, 1.0), (1.0, 1.0), (2.0, 0.0)]).unwrap());
        assert_eq!(t.eval(1.5).unwrap(), 0.5);
        assert!(t.eval(2.5).is_err());
    }

    #[test]
    fn non_monotone_curves_do_not_convert_to_scales() {
        assert!(Curve::constant(1.0).to_scale().is_err());
        let flat = Curve::table(Knots::from_pairs(&[(0.0, 1.0), (1.0, 1.0)]).unwrap());
        assert!(flat.to_scale().is_err());
    }
}
