//! Closed-form solutions of `f(ℓ(x) + g(y)) = m(x) + h(x + y)` and a
//! residual check of the equation on a product grid.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::report::{ResidualReport, ResidualSweep};
use crate::scales::Interval;

/// The five solution families. Parameter names follow the usual
/// `α, ρ, β, b, τ, κ, c, d, δ, ε` lettering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum LundbergCase {
    /// Affine `f`, `g`, `h` with an arbitrary `ℓ`.
    I { alpha: f64, rho: f64, beta: f64, b: f64, tau: f64, ell: Curve },
    II { alpha: f64, rho: f64, kappa: f64, c: f64, beta: f64, d: f64, delta: f64, b: f64, tau: f64 },
    III { rho: f64, alpha: f64, b: f64, kappa: f64, beta: f64, d: f64, tau: f64, epsilon: f64 },
    IV { alpha: f64, rho: f64, kappa: f64, beta: f64, b: f64, c: f64, delta: f64, tau: f64 },
    V { alpha: f64, rho: f64, delta: f64, beta: f64, epsilon: f64, c: f64, tau: f64, b: f64 },
}

/// Which of the five functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    F,
    G,
    H,
    L,
    M,
}

/// A validated solution `(f, g, h, ℓ, m)` on the body `X × Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LundbergSolution {
    case: LundbergCase,
    x: Interval,
    y: Interval,
}

const VALIDATION_SAMPLES: usize = 65;

/// Builds the five functions of `case` and checks that they are real on a
/// dense sampling of `X`, `Y`, `X + Y` and `ℓ(X) + g(Y)`.
pub fn make_lundberg_case(case: LundbergCase, x: Interval, y: Interval) -> Result<LundbergSolution> {
    let nonzero = |name: &str, v: f64| {
        if v == 0.0 {
            Err(Error::Param(format!("{name} must be nonzero")))
        } else {
            Ok(())
        }
    };
    match &case {
        LundbergCase::II { kappa, .. } | LundbergCase::III { kappa, .. } | LundbergCase::IV { kappa, .. } => {
            nonzero("kappa", *kappa)?
        }
        LundbergCase::V { delta, .. } => nonzero("delta", *delta)?,
        LundbergCase::I { .. } => {}
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::Param("Lundberg body must be bounded".into()));
    }
    let sol = LundbergSolution { case, x, y };
    let xs = x.linspace(VALIDATION_SAMPLES);
    let ys = y.linspace(VALIDATION_SAMPLES);
    let real = |part: Part, t: f64| {
        sol.eval(part, t)
            .map_err(|_| Error::Param(format!("{part:?}({t}) is not real for these parameters")))
    };
    for &xv in &xs {
        real(Part::L, xv)?;
        real(Part::M, xv)?;
        for &yv in &ys {
            real(Part::H, xv + yv)?;
            real(Part::F, sol.eval(Part::L, xv)? + real(Part::G, yv)?)?;
        }
    }
    Ok(sol)
}

fn real(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("non-real value {v}")))
    }
}

impl LundbergSolution {
    pub fn case(&self) -> &LundbergCase {
        &self.case
    }

    pub fn eval(&self, part: Part, t: f64) -> Result<f64> {
        use Part::*;
        let v = match (&self.case, part) {
            (LundbergCase::I { alpha, rho, .. }, F) => alpha + rho * t,
            (LundbergCase::I { beta, b, .. }, G) => beta + b * t,
            (LundbergCase::I { rho, b, tau, .. }, H) => -tau + rho * b * t,
            (LundbergCase::I { ell, .. }, L) => ell.eval(t)?,
            (LundbergCase::I { alpha, rho, beta, b, tau, ell }, M) => {
                rho * ell.eval(t)? - rho * b * t + alpha + rho * beta + tau
            }

            (LundbergCase::II { alpha, rho, kappa, c, .. }, F) => alpha + rho * (c + (kappa * t).exp()).ln(),
            (LundbergCase::II { kappa, c, beta, d, delta, .. }, G) => (-beta * c + d * (delta * t).exp()).ln() / kappa,
            (LundbergCase::II { alpha, rho, c, d, delta, b, tau, .. }, H) => {
                -tau + alpha + rho * (b * c + d * (delta * t).exp()).ln()
            }
            (LundbergCase::II { kappa, beta, delta, b, .. }, L) => -(beta + b * (-delta * t).exp()).ln() / kappa,
            (LundbergCase::II { rho, beta, delta, b, tau, .. }, M) => tau - rho * (b + beta * (delta * t).exp()).ln(),

            (LundbergCase::III { rho, alpha, b, kappa, .. }, F) => rho * (alpha - b * (kappa * t).exp()).ln(),
            (LundbergCase::III { alpha, kappa, beta, d, .. }, G) => (beta - d * alpha * t).ln() / kappa,
            (LundbergCase::III { rho, alpha, b, beta, d, tau, epsilon, .. }, H) => {
                -tau + rho * (b * d * alpha * t + alpha * epsilon - b * beta).ln()
            }
            (LundbergCase::III { b, kappa, d, epsilon, .. }, L) => -(epsilon + b * d * t).ln() / kappa,
            (LundbergCase::III { rho, b, d, tau, epsilon, .. }, M) => tau - rho * (epsilon + b * d * t).ln(),

            (LundbergCase::IV { alpha, rho, kappa, .. }, F) => alpha + rho * (kappa * t).exp(),
            (LundbergCase::IV { kappa, beta, b, c, delta, .. }, G) => beta + (b + c * (delta * t).exp()).ln() / kappa,
            (LundbergCase::IV { alpha, rho, c, delta, tau, .. }, H) => -tau + alpha + rho * c * (delta * t).exp(),
            (LundbergCase::IV { kappa, beta, delta, .. }, L) => -beta + delta / kappa * t,
            (LundbergCase::IV { rho, b, delta, tau, .. }, M) => tau + rho * b * (delta * t).exp(),

            (LundbergCase::V { alpha, rho, delta, beta, .. }, F) => alpha + rho / delta * (beta + t).ln(),
            (LundbergCase::V { delta, beta, epsilon, c, .. }, G) => -beta - epsilon + c * (delta * t).exp(),
            (LundbergCase::V { alpha, rho, delta, c, tau, b, .. }, H) => {
                -tau + alpha + rho / delta * (b + c * (delta * t).exp()).ln()
            }
            (LundbergCase::V { delta, epsilon, b, .. }, L) => epsilon + b * (-delta * t).exp(),
            (LundbergCase::V { rho, tau, .. }, M) => tau - rho * t,
        };
        real(v)
    }

    /// `h`, `ℓ` and `m` must not be constant on any interval; on samples
    /// this is checked as a nonzero spread of each over `X` (for `h`, over
    /// `X + Y`).
    pub fn is_philandering(&self) -> bool {
        let spread = |part: Part, iv: Interval| {
            let vals: Vec<f64> = iv
                .linspace(VALIDATION_SAMPLES)
                .iter()
                .filter_map(|&t| self.eval(part, t).ok())
                .collect();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo > 1e-12 * (1.0 + lo.abs().max(hi.abs()))
        };
        let sum = Interval {
            lo: self.x.lo + self.y.lo,
            hi: self.x.hi + self.y.hi,
        };
        spread(Part::H, sum) && spread(Part::L, self.x) && spread(Part::M, self.x)
    }

    pub fn residual(&self, xs: &[f64], ys: &[f64], tol: f64) -> Result<ResidualReport> {
        lundberg_residual(
            |t| self.eval(Part::F, t),
            |t| self.eval(Part::G, t),
            |t| self.eval(Part::H, t),
            |t| self.eval(Part::L, t),
            |t| self.eval(Part::M, t),
            xs,
            ys,
            tol,
        )
    }
}

/// Sweeps `f(ℓ(x) + g(y)) − m(x) − h(x + y)` over `xs × ys`; worst point
/// is reported as `(x, y, 0)`.
#[allow(clippy::too_many_arguments)]
pub fn lundberg_residual(
    f: impl Fn(f64) -> Result<f64>,
    g: impl Fn(f64) -> Result<f64>,
    h: impl Fn(f64) -> Result<f64>,
    l: impl Fn(f64) -> Result<f64>,
    m: impl Fn(f64) -> Result<f64>,
    xs: &[f64],
    ys: &[f64],
    tol: f64,
) -> Result<ResidualReport> {
    let mut sweep = ResidualSweep::new("lundberg", tol);
    for &x in xs {
        for &y in ys {
            sweep.try_record([x, y, 0.0], || Ok(f(l(x)? + g(y)?)? - m(x)? - h(x + y)?));
        }
    }
    sweep.finish()
}

/// Draws parameters of case `which` (1 to 5) from ranges that keep every
/// logarithm argument positive for `x, y ∈ [0, 1]`.
pub fn random_admissible<R: Rng>(which: u8, rng: &mut R) -> Result<LundbergCase> {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..=hi);
    let case = match which {
        1 => LundbergCase::I {
            alpha: u(-2.0, 2.0),
            rho: u(-2.0, 2.0),
            beta: u(-2.0, 2.0),
            b: u(-2.0, 2.0),
            tau: u(-2.0, 2.0),
            ell: Curve::Sine {
                amplitude: u(0.5, 2.0),
                frequency: u(1.0, 4.0),
                center: u(-1.0, 1.0),
            },
        },
        2 => {
            let sign = if u(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
            LundbergCase::II {
                alpha: u(-2.0, 2.0),
                rho: u(-2.0, 2.0),
                kappa: sign * u(0.5, 2.0),
                c: u(0.1, 0.8),
                beta: u(0.1, 0.8),
                d: u(2.0, 3.0),
                delta: u(-1.0, 1.0),
                b: u(0.5, 2.0),
                tau: u(-2.0, 2.0),
            }
        }
        3 => {
            let sign = if u(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
            let alpha = u(0.5, 1.0);
            let d = u(0.2, 0.5);
            let b = u(0.5, 1.0);
            let beta = d * alpha + u(0.1, 0.5);
            let epsilon = b * beta / alpha + u(0.1, 1.0);
            LundbergCase::III {
                rho: u(-2.0, 2.0),
                alpha,
                b,
                kappa: sign * u(0.5, 2.0),
                beta,
                d,
                tau: u(-2.0, 2.0),
                epsilon,
            }
        }
        4 => {
            let sign = if u(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
            LundbergCase::IV {
                alpha: u(-2.0, 2.0),
                rho: u(-2.0, 2.0),
                kappa: sign * u(0.5, 2.0),
                beta: u(-2.0, 2.0),
                b: u(0.5, 2.0),
                c: u(0.5, 2.0),
                delta: u(-1.0, 1.0),
                tau: u(-2.0, 2.0),
            }
        }
        5 => {
            let sign = if u(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
            LundbergCase::V {
                alpha: u(-2.0, 2.0),
                rho: u(-2.0, 2.0),
                delta: sign * u(0.5, 1.5),
                beta: u(-2.0, 2.0),
                epsilon: u(-2.0, 2.0),
                c: u(0.5, 2.0),
                tau: u(-2.0, 2.0),
                b: u(0.5, 2.0),
            }
        }
        other => return Err(Error::Param(format!("no Lundberg case {other}"))),
    };
    Ok(case)
}
