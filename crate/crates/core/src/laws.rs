//! Residual checkers for the similarity law and its specializations, and a
//! classifier that runs them together.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::eta::{EtaMap, GammaMap};
use crate::families::SensitivityFamily;
use crate::fitting::{fit_power_per_s, SampleSet};
use crate::grid::Grid;
use crate::report::{relative, ResidualReport, ResidualSweep};
use crate::scales::linspace;

/// Sweeps `ξ_s(λx) − γ(λ,s)·ξ_η(λ,s)(x)`, scaled by `1 + |ξ_s(λx)|`, over
/// the grid's `(x, λ)` pairs and `s` samples. Points where `η` leaves `S`
/// or a family value is undefined are excluded and counted.
pub fn iverson_residual(
    family: &SensitivityFamily,
    gamma: &GammaMap,
    eta: &EtaMap,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    let mut sweep = ResidualSweep::new("similarity law", tol);
    for (x, l) in grid.pairs() {
        for &s in grid.s() {
            sweep.try_record([x, l, s], || {
                let lhs = family.eval(l * x, s)?;
                let moved = eta.eval(l, s)?;
                let rhs = gamma.eval(l, s)? * family.eval(x, moved)?;
                Ok(relative(lhs - rhs, lhs))
            });
        }
    }
    sweep.finish()
}

/// `ξ_s(λx) = λ·ξ_s(x)`
pub fn weber_residual(family: &SensitivityFamily, grid: &Grid, tol: f64) -> Result<ResidualReport> {
    iverson_residual(family, &GammaMap::LambdaOnly, &EtaMap::identity_in_s(), grid, tol)
}

/// `ξ_s(λx) = λ^φ(s)·ξ_s(x)`
pub fn power_law_residual(family: &SensitivityFamily, phi: &Curve, grid: &Grid, tol: f64) -> Result<ResidualReport> {
    let gamma = GammaMap::PowerPhi { phi: phi.clone() };
    iverson_residual(family, &gamma, &EtaMap::identity_in_s(), grid, tol)
}

/// `ξ_(λ^θ·s)(λx) = λ·ξ_s(x)`; `θ = 1` is the Plateau relationship.
pub fn shift_invariance_residual(family: &SensitivityFamily, theta: f64, grid: &Grid, tol: f64) -> Result<ResidualReport> {
    let mut sweep = ResidualSweep::new("shift invariance", tol);
    for (x, l) in grid.pairs() {
        for &s in grid.s() {
            sweep.try_record([x, l, s], || {
                let lhs = family.eval(l * x, l.powf(theta) * s)?;
                Ok(relative(lhs - l * family.eval(x, s)?, lhs))
            });
        }
    }
    sweep.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LawLabel {
    Weber,
    /// Fitted exponent curve `φ̂` on the grid's `s` samples.
    PowerLaw { phi: Curve },
    Shift { theta: f64 },
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub labels: Vec<LawLabel>,
    pub weber: ResidualReport,
    /// Power-law residual with the regressed `φ̂`, absent when the
    /// regression is impossible (non-positive values, too few `x`).
    pub power_law: Option<ResidualReport>,
    pub phi_hat: Option<Curve>,
    /// Best `θ̂` of the shift-invariance search and its residual.
    pub theta_hat: Option<f64>,
    pub shift: Option<ResidualReport>,
}

impl Classification {
    pub fn has(&self, pred: impl Fn(&LawLabel) -> bool) -> bool {
        self.labels.iter().any(pred)
    }
}

const THETA_RANGE: (f64, f64) = (-4.0, 4.0);
const THETA_SCAN: usize = 81;
const THETA_WIDTH: f64 = 1e-12;

/// Golden-section refinement of the best of an 81-point scan of
/// `θ ↦ max |shift residual|` on `[−4, 4]`.
pub fn search_shift_theta(family: &SensitivityFamily, grid: &Grid) -> (f64, f64) {
    let objective = |theta: f64| {
        shift_invariance_residual(family, theta, grid, 0.0)
            .map(|r| r.max_abs)
            .unwrap_or(f64::INFINITY)
    };
    let thetas = linspace(THETA_RANGE.0, THETA_RANGE.1, THETA_SCAN);
    let values: Vec<f64> = thetas.iter().map(|&t| objective(t)).collect();
    let best = (0..values.len())
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("scan is nonempty");
    let mut a = thetas[best.saturating_sub(1)];
    let mut b = thetas[(best + 1).min(thetas.len() - 1)];
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > THETA_WIDTH {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d);
        }
    }
    let mid = 0.5 * (a + b);
    let candidates = [(thetas[best], values[best]), (mid, objective(mid))];
    candidates
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("two candidates")
}

/// Runs the Weber, power-law and shift-invariance checks and returns every
/// label that passes, or `GENERAL` when none does.
///
/// Shift invariance at `θ = 0` is Weber's law itself, so `SHIFT` is only
/// reported for families that are not Weber.
pub fn classify_laws(family: &SensitivityFamily, grid: &Grid, tol: f64) -> Result<Classification> {
    let weber = weber_residual(family, grid, tol)?;
    let mut labels = Vec::new();
    if weber.pass {
        labels.push(LawLabel::Weber);
    }

    let mut samples = SampleSet::default();
    for &s in grid.s() {
        for &x in grid.x() {
            if let Ok(xi) = family.eval(x, s) {
                samples.push(x, s, xi);
            }
        }
    }
    let (phi_hat, power_law) = match fit_power_per_s(&samples, tol) {
        Ok(fit) => {
            let phi = fit.exponent_curve()?;
            let report = power_law_residual(family, &phi, grid, tol)?;
            (Some(phi), Some(report))
        }
        Err(Error::NonPositive(_)) | Err(Error::InsufficientData(_)) => (None, None),
        Err(e) => return Err(e),
    };
    if let (Some(phi), Some(report)) = (&phi_hat, &power_law) {
        if report.pass {
            labels.push(LawLabel::PowerLaw { phi: phi.clone() });
        }
    }

    let (theta, _) = search_shift_theta(family, grid);
    let shift = shift_invariance_residual(family, theta, grid, tol).ok();
    if let Some(report) = &shift {
        if report.pass && !weber.pass {
            labels.push(LawLabel::Shift { theta });
        }
    }
    if labels.is_empty() {
        labels.push(LawLabel::General);
    }
    Ok(Classification {
        labels,
        weber,
        power_law,
        phi_hat,
        theta_hat: Some(theta),
        shift,
    })
}
