//! Psychophysical representations, psychometric families and the
//! anchored / parallel / balanced property checks.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{finite, Error, Result};
use crate::families::SensitivityFamily;
use crate::grid::Grid;
use crate::report::{relative, ResidualReport, ResidualSweep};
use crate::scales::{Interval, Knots, ScaleFunction, BISECTION_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representation {
    /// `s = u(ξ_s(x)) − u(x)`
    Fechnerian { u: ScaleFunction },
    /// `s = u(ξ_s(x)) − w(x)`
    Subtractive { u: ScaleFunction, w: ScaleFunction },
    /// `s·σ(x) = u(ξ_s(x)) − u(x)`
    GainControl { u: ScaleFunction, sigma: Curve },
    /// `ξ_s(x) = u(x) + v(s)`
    Parallel { u: ScaleFunction, v: ScaleFunction },
    /// `ξ_s(x) = x + ν(s)`
    BalancedParallel { nu: ScaleFunction },
}

fn increasing(name: &str, f: &ScaleFunction) -> Result<()> {
    if f.is_increasing() {
        Ok(())
    } else {
        Err(Error::NonMonotone(format!("{name} must be strictly increasing")))
    }
}

impl Representation {
    /// Checks that the scales are strictly increasing.
    pub fn validate(&self) -> Result<()> {
        match self {
            Representation::Fechnerian { u } | Representation::GainControl { u, .. } => increasing("u", u),
            Representation::Subtractive { u, w } => {
                increasing("u", u)?;
                increasing("w", w)
            }
            Representation::Parallel { u, v } => {
                increasing("u", u)?;
                increasing("v", v)
            }
            Representation::BalancedParallel { nu } => increasing("nu", nu),
        }
    }

    /// `ξ_s(x)` as given by the representation.
    pub fn xi(&self, x: f64, s: f64) -> Result<f64> {
        match self {
            Representation::Fechnerian { u } => u.invert(s + u.eval(x)?),
            Representation::Subtractive { u, w } => u.invert(s + w.eval(x)?),
            Representation::GainControl { u, sigma } => u.invert(s * sigma.eval(x)? + u.eval(x)?),
            Representation::Parallel { u, v } => Ok(u.eval(x)? + v.eval(s)?),
            Representation::BalancedParallel { nu } => Ok(x + nu.eval(s)?),
        }
    }

    /// Residual of the defining identity at `(x, s, ξ)`, scaled by
    /// `1 + |left-hand side|`.
    pub fn identity_residual(&self, x: f64, s: f64, xi: f64) -> Result<f64> {
        Ok(match self {
            Representation::Fechnerian { u } => relative(s - (u.eval(xi)? - u.eval(x)?), s),
            Representation::Subtractive { u, w } => relative(s - (u.eval(xi)? - w.eval(x)?), s),
            Representation::GainControl { u, sigma } => {
                let lhs = s * sigma.eval(x)?;
                relative(lhs - (u.eval(xi)? - u.eval(x)?), lhs)
            }
            Representation::Parallel { u, v } => relative(xi - u.eval(x)? - v.eval(s)?, xi),
            Representation::BalancedParallel { nu } => relative(xi - x - nu.eval(s)?, xi),
        })
    }

    /// The argument `t` fed to the link, `p_a(x) = F(t(a, x))`.
    pub fn link_argument(&self, a: f64, x: f64) -> Result<f64> {
        let t = match self {
            Representation::Fechnerian { u } => u.eval(x)? - u.eval(a)?,
            Representation::Subtractive { u, w } => u.eval(x)? - w.eval(a)?,
            Representation::GainControl { u, sigma } => {
                let sd = sigma.eval(a)?;
                if sd == 0.0 {
                    return Err(Error::Division(format!("sigma({a}) = 0")));
                }
                (u.eval(x)? - u.eval(a)?) / sd
            }
            Representation::Parallel { u, v } => v.invert(x - u.eval(a)?)?,
            Representation::BalancedParallel { nu } => nu.invert(x - a)?,
        };
        finite(t, || format!("link argument at a = {a}, x = {x}"))
    }
}

/// `ξ_s(x)` from a representation.
pub fn xi_from_representation(rep: &Representation, x: f64, s: f64) -> Result<f64> {
    rep.xi(x, s)
}

/// Sweeps the representation's defining identity over the `x × s` samples
/// of the grid; points where the scales are undefined are excluded.
pub fn representation_residual(
    family: &SensitivityFamily,
    rep: &Representation,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    let mut sweep = ResidualSweep::new("representation", tol);
    for &x in grid.x() {
        for &s in grid.s() {
            sweep.try_record([x, 0.0, s], || rep.identity_residual(x, s, family.eval(x, s)?));
        }
    }
    sweep.finish()
}

/// `{p_a}` with `p_a(x) = F(t(a, x))` on a finite stimulus interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsychometricFamily {
    rep: Representation,
    link: ScaleFunction,
    stimulus: Interval,
}

const PROBE_POINTS: usize = 65;

/// Builds a psychometric family, checking that the link is strictly
/// increasing with values in `]0,1[` and that sampled `p_a` increase in `x`.
pub fn make_psychometric(rep: Representation, link: ScaleFunction, stimulus: Interval) -> Result<PsychometricFamily> {
    rep.validate()?;
    if !link.is_increasing() {
        return Err(Error::LinkRange("link must be strictly increasing".into()));
    }
    let range = link.range();
    if !(range.lo > 0.0 && range.hi < 1.0) {
        return Err(Error::LinkRange(format!(
            "link range [{}, {}] is not inside ]0,1[",
            range.lo, range.hi
        )));
    }
    if !stimulus.is_finite() || stimulus.hi <= stimulus.lo {
        return Err(Error::Param("psychometric families need a finite stimulus interval".into()));
    }
    let pf = PsychometricFamily { rep, link, stimulus };
    let probe = stimulus.linspace(PROBE_POINTS);
    for &a in &probe {
        let mut prev: Option<f64> = None;
        for &x in &probe {
            if let Ok(p) = pf.p(a, x) {
                if prev.is_some_and(|q| p <= q) {
                    return Err(Error::NonMonotone(format!("p_{a} is not strictly increasing near x = {x}")));
                }
                prev = Some(p);
            }
        }
    }
    Ok(pf)
}

impl PsychometricFamily {
    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    pub fn link(&self) -> &ScaleFunction {
        &self.link
    }

    pub fn stimulus(&self) -> Interval {
        self.stimulus
    }

    /// `p_a(x)`
    pub fn p(&self, a: f64, x: f64) -> Result<f64> {
        if !self.stimulus.contains(a) || !self.stimulus.contains(x) {
            return Err(Error::Domain(format!("({a}, {x}) outside the stimulus interval")));
        }
        self.link.eval(self.rep.link_argument(a, x)?)
    }

    /// Solves `t(a, x) = target` for `x ∈ I`; `t` increases in `x`.
    fn solve_x(&self, a: f64, target: f64) -> Result<f64> {
        let (lo, hi) = self.usable_ends(|x| self.rep.link_argument(a, x))?;
        let t = |x: f64| self.rep.link_argument(a, x).unwrap_or(f64::NAN);
        let (tlo, thi) = (t(lo), t(hi));
        if !(tlo <= target && target <= thi) {
            return Err(Error::Range(format!(
                "level {target} not attained by p_{a} on the stimulus interval"
            )));
        }
        Ok(bisect(lo, hi, |x| t(x) < target))
    }

    /// Endpoints of `I`, pulled inward slightly where `f` is undefined.
    fn usable_ends(&self, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
        let Interval { lo, hi } = self.stimulus;
        let width = hi - lo;
        let nudge = |end: f64, dir: f64| {
            let mut step = 1e-12 * width;
            let mut x = end;
            while f(x).is_err() && step < width {
                x = end + dir * step;
                step *= 16.0;
            }
            f(x).map(|_| x)
        };
        Ok((nudge(lo, 1.0)?, nudge(hi, -1.0)?))
    }

    /// `ξ_π(a) = p_a⁻¹(π)`.
    pub fn sensitivity(&self, a: f64, pi: f64) -> Result<f64> {
        let target = self.link.invert(pi).map_err(|_| {
            Error::Range(format!("probability {pi} outside the link's range"))
        })?;
        self.solve_x(a, target)
    }
}

/// Bisection on `[lo, hi]` for the boundary of `below`, which holds near `lo`.
fn bisect(mut lo: f64, mut hi: f64, below: impl Fn(f64) -> bool) -> f64 {
    while hi - lo > BISECTION_TOL * (1.0 + lo.abs().max(hi.abs())) * 1e-2 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ξ_π(a) = p_a⁻¹(π)`, the stimulus whose response probability against
/// background `a` is `π`.
pub fn sensitivity_from_psychometric(pf: &PsychometricFamily, a: f64, pi: f64) -> Result<f64> {
    pf.sensitivity(a, pi)
}

/// Anchor level used by the anchored check.
pub const ANCHOR_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyProperties {
    /// `|p_a(x_a) − α|` for the solved `x_a`, and the same for solved
    /// backgrounds; unattained levels contribute their distance to `α`.
    pub anchored: ResidualReport,
    /// `|(ξ_π(a) − ξ_π*(a)) − (ξ_π(b) − ξ_π*(b))|`
    pub parallel: ResidualReport,
    /// `|p_a(b) + p_b(a) − 1|`
    pub balanced: ResidualReport,
}

const ANCHOR_SCAN: usize = 257;

/// Runs the anchored, parallel and balanced checks on backgrounds `a, b`
/// from `backgrounds` and levels `π, π*` from `levels`.
pub fn check_family_properties(
    pf: &PsychometricFamily,
    backgrounds: &[f64],
    levels: &[f64],
    tol: f64,
) -> Result<FamilyProperties> {
    if backgrounds.is_empty() || levels.is_empty() {
        return Err(Error::EmptyGrid("need backgrounds and probability levels".into()));
    }
    let alpha = ANCHOR_LEVEL;
    let scan = pf.stimulus.linspace(ANCHOR_SCAN);
    let mut anchored = ResidualSweep::new("anchored", tol);
    for &a in backgrounds {
        let r = match pf.sensitivity(a, alpha) {
            Ok(x) => pf.p(a, x)? - alpha,
            Err(Error::Range(_)) => gap(scan.iter().map(|&x| pf.p(a, x)), alpha),
            Err(e) => return Err(e),
        };
        anchored.record(r, [a, 0.0, alpha]);
    }
    // conversely, every stimulus is the α-point of some background
    for &x in backgrounds {
        let values: Vec<Option<f64>> = scan.iter().map(|&a| pf.p(a, x).ok()).collect();
        let hit = scan.windows(2).zip(values.windows(2)).find_map(|(aw, vw)| match (vw[0], vw[1]) {
            (Some(p0), Some(p1)) if (p0 - alpha) * (p1 - alpha) <= 0.0 => Some((aw[0], aw[1], p0 > alpha)),
            _ => None,
        });
        let r = match hit {
            Some((lo, hi, decreasing)) => {
                let above = |a: f64| pf.p(a, x).map(|p| p > alpha).unwrap_or(decreasing);
                let a = bisect(lo, hi, |a| above(a) == decreasing);
                pf.p(a, x)? - alpha
            }
            None => gap(values.iter().map(|v| v.ok_or_else(|| Error::Domain(String::new()))), alpha),
        };
        anchored.record(r, [x, 1.0, alpha]);
    }

    let sens: Vec<Vec<Option<f64>>> = backgrounds
        .iter()
        .map(|&a| levels.iter().map(|&pi| pf.sensitivity(a, pi).ok()).collect())
        .collect();
    let mut parallel = ResidualSweep::new("parallel", tol);
    for (ia, &a) in backgrounds.iter().enumerate() {
        for (ib, &b) in backgrounds.iter().enumerate().skip(ia + 1) {
            for (i, &pi) in levels.iter().enumerate() {
                for (j, &pj) in levels.iter().enumerate().skip(i + 1) {
                    match (sens[ia][i], sens[ia][j], sens[ib][i], sens[ib][j]) {
                        (Some(a1), Some(a2), Some(b1), Some(b2)) => {
                            parallel.record((a1 - a2) - (b1 - b2), [a, b, pi - pj])
                        }
                        _ => parallel.exclude(),
                    }
                }
            }
        }
    }

    let mut balanced = ResidualSweep::new("balanced", tol);
    for &a in backgrounds {
        for &b in backgrounds {
            balanced.try_record([a, b, 0.0], || Ok(pf.p(a, b)? + pf.p(b, a)? - 1.0));
        }
    }

    let parallel = if backgrounds.len() < 2 || levels.len() < 2 {
        ResidualReport::vacuous(tol)
    } else {
        parallel.finish_lenient()?
    };
    Ok(FamilyProperties {
        anchored: anchored.finish_lenient()?,
        parallel,
        balanced: balanced.finish_lenient()?,
    })
}

/// Distance from `level` to the nearest attained value.
fn gap(values: impl Iterator<Item = Result<f64>>, level: f64) -> f64 {
    values
        .filter_map(|v| v.ok())
        .map(|p| (p - level).abs())
        .fold(f64::INFINITY, f64::min)
}

/// `ν̂` and the two residual reports of the balanced-parallel decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedDecomposition {
    /// `ν̂(s)` on the grid's `s` samples.
    pub nu: Knots,
    /// `|ξ_s(x) − x − ν̂(s)|`
    pub x_independence: ResidualReport,
    /// `|ν̂(1−s) + ν̂(s)|`, worst point `(0, 0, s)`.
    pub antisymmetry: ResidualReport,
    pub pass: bool,
}

/// Estimates `ν̂(s)` as the mean over `x` of `ξ_s(x) − x` and tests the
/// decomposition `ξ_s(x) = x + ν(s)` with `ν(1−s) = −ν(s)`.
pub fn decompose_balanced_parallel(family: &SensitivityFamily, grid: &Grid, tol: f64) -> Result<BalancedDecomposition> {
    let ss = grid.s();
    let mirror = |s: f64| {
        let t = 1.0 - s;
        ss.iter().position(|&v| (v - t).abs() <= 1e-12 * (1.0 + t.abs()))
    };
    let partners = ss
        .iter()
        .map(|&s| mirror(s).ok_or_else(|| Error::GridSymmetry(format!("1 - {s} is not sampled"))))
        .collect::<Result<Vec<_>>>()?;

    let xs = grid.x();
    let mut nu = Vec::with_capacity(ss.len());
    for &s in ss {
        let mut sum = 0.0;
        for &x in xs {
            sum += family.eval(x, s)? - x;
        }
        nu.push(sum / xs.len() as f64);
    }
    let mut indep = ResidualSweep::new("x-independence", tol);
    for (k, &s) in ss.iter().enumerate() {
        for &x in xs {
            indep.record(family.eval(x, s)? - x - nu[k], [x, 0.0, s]);
        }
    }
    let mut anti = ResidualSweep::new("antisymmetry", tol);
    for (k, &s) in ss.iter().enumerate() {
        anti.record(nu[partners[k]] + nu[k], [0.0, 0.0, s]);
    }
    let x_independence = indep.finish()?;
    let antisymmetry = anti.finish()?;
    let pass = x_independence.pass && antisymmetry.pass;
    Ok(BalancedDecomposition {
        nu: Knots::new(ss.to_vec(), nu)?,
        x_independence,
        antisymmetry,
        pass,
    })
}
