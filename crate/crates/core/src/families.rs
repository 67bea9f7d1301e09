//! Closed-form sensitivity families `ξ_s(x)` and their companion maps.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{finite, Error, Result};
use crate::eta::{EtaMap, GammaMap};
use crate::representations::Representation;
use crate::scales::{Interval, ScaleFunction};
use crate::table2d::Table2d;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `k(s)·x`
    Weber { k: Curve },
    /// `κ(s)·x^ρ(s)`
    Power { kappa: Curve, rho: Curve },
    /// `Φ(f(s)·x)/g(s)`
    PhiForm { phi: Curve, f: Curve, g: Curve },
    /// `((s+d)/c)^(1/μ)·x`
    AffineA { c: f64, mu: f64, d: f64 },
    /// `exp((s−d)/c)·x`
    AffineB { c: f64, d: f64 },
    /// `x`
    AffineC,
    /// `α·ln(f(s)·x) + β + γ`
    ParallelLog { alpha: f64, beta: f64, gamma: f64, f: Curve },
    /// `α·x^ρ + γ/f(s)^ρ`
    ParallelPower { alpha: f64, rho: f64, gamma: f64, f: Curve },
    /// `x + ν(s)`, with `s` a probability centred at 1/2.
    BalancedParallel { nu: Curve },
    /// `a·e^(bρs)·x^(r+ρ)`
    SubCaseI { a: f64, b: f64, rho: f64, r: f64 },
    /// `a·(c·x^(r/ρ) + s − ε)^ρ`
    SubCaseII { a: f64, c: f64, rho: f64, r: f64, epsilon: f64 },
    /// `e^(ρ̄s)·x`
    FechExp { rho_bar: f64 },
    /// `x^φ(s)·F(x·H⁻¹(s))`
    PowerF { phi: Curve, big_f: Curve, h: ScaleFunction },
    /// `f(x·s^(1/θ))/f(s^(1/θ))·F(x^θ·s)`
    ShiftForm { f: Curve, big_f: Curve, theta: f64 },
    /// `s·φ(x/s)` for `s ≠ 0`, `c·x` at `s = 0`.
    Homogeneous { phi: Curve, c: f64 },
    /// Bilinear table with rows `x` and columns `s`.
    Tabulated { table: Table2d },
    /// `ξ` induced by a psychophysical representation.
    Represented { rep: Representation },
}

/// A validated sensitivity family on the rectangle `I × S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityFamily {
    kind: FamilyKind,
    stimulus: Interval,
    s_domain: Interval,
}

fn need(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Param(msg.to_string()))
    }
}

fn all_finite(v: &[f64]) -> Result<()> {
    need(v.iter().all(|t| t.is_finite()), "family parameters must be finite")
}

/// Validates the parameter constraints of `kind` and builds the family on
/// the default rectangle `I = [0, ∞]`, `S = ℝ` (tables use their own).
pub fn make_family(kind: FamilyKind) -> Result<SensitivityFamily> {
    match &kind {
        FamilyKind::AffineA { c, mu, d } => {
            all_finite(&[*c, *mu, *d])?;
            need(*c != 0.0, "affine_a needs c != 0")?;
            need(*mu != 0.0, "affine_a needs mu != 0")?;
        }
        FamilyKind::AffineB { c, d } => {
            all_finite(&[*c, *d])?;
            need(*c != 0.0, "affine_b needs c != 0")?;
        }
        FamilyKind::ParallelLog { alpha, beta, gamma, .. } => {
            all_finite(&[*alpha, *beta, *gamma])?;
            need(*alpha != 0.0, "parallel_log needs alpha != 0")?;
        }
        FamilyKind::ParallelPower { alpha, rho, gamma, .. } => {
            all_finite(&[*alpha, *rho, *gamma])?;
            need(*alpha != 0.0, "parallel_power needs alpha != 0")?;
            need(*rho != 0.0, "parallel_power needs rho != 0")?;
        }
        FamilyKind::SubCaseI { a, b, rho, r } => all_finite(&[*a, *b, *rho, *r])?,
        FamilyKind::SubCaseII { a, c, rho, r, epsilon } => {
            all_finite(&[*a, *c, *rho, *r, *epsilon])?;
            need(*rho != 0.0, "sub_case_ii needs rho != 0")?;
        }
        FamilyKind::FechExp { rho_bar } => all_finite(&[*rho_bar])?,
        FamilyKind::ShiftForm { theta, .. } => {
            need(theta.is_finite() && *theta > 0.0, "shift_form needs theta > 0")?;
        }
        FamilyKind::Homogeneous { c, .. } => all_finite(&[*c])?,
        _ => {}
    }
    let (stimulus, s_domain) = match &kind {
        FamilyKind::Tabulated { table } => (table.row_domain(), table.col_domain()),
        _ => (Interval::non_negative(), Interval::real_line()),
    };
    Ok(SensitivityFamily {
        kind,
        stimulus,
        s_domain,
    })
}

impl SensitivityFamily {
    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn stimulus(&self) -> Interval {
        self.stimulus
    }

    pub fn s_domain(&self) -> Interval {
        self.s_domain
    }

    /// Declares the rectangle `I × S` the family is evaluated on.
    pub fn with_domain(mut self, stimulus: Interval, s_domain: Interval) -> Self {
        self.stimulus = stimulus;
        self.s_domain = s_domain;
        self
    }

    pub fn weber(k: impl Into<Curve>) -> Self {
        make_family(FamilyKind::Weber { k: k.into() }).expect("weber has no constraints")
    }

    pub fn power(kappa: impl Into<Curve>, rho: impl Into<Curve>) -> Self {
        make_family(FamilyKind::Power {
            kappa: kappa.into(),
            rho: rho.into(),
        })
        .expect("power has no constraints")
    }

    pub fn fech_exp(rho_bar: f64) -> Result<Self> {
        make_family(FamilyKind::FechExp { rho_bar })
    }

    pub fn sub_case_i(a: f64, b: f64, rho: f64, r: f64) -> Result<Self> {
        make_family(FamilyKind::SubCaseI { a, b, rho, r })
    }

    pub fn sub_case_ii(a: f64, c: f64, rho: f64, r: f64, epsilon: f64) -> Result<Self> {
        make_family(FamilyKind::SubCaseII { a, c, rho, r, epsilon })
    }

    pub fn homogeneous(phi: impl Into<Curve>, c: f64) -> Result<Self> {
        make_family(FamilyKind::Homogeneous { phi: phi.into(), c })
    }

    pub fn balanced_parallel(nu: impl Into<Curve>) -> Self {
        make_family(FamilyKind::BalancedParallel { nu: nu.into() }).expect("no constraints")
    }

    pub fn tabulated(table: Table2d) -> Self {
        make_family(FamilyKind::Tabulated { table }).expect("no constraints")
    }

    pub fn represented(rep: Representation) -> Self {
        make_family(FamilyKind::Represented { rep }).expect("no constraints")
    }

    pub fn eval(&self, x: f64, s: f64) -> Result<f64> {
        if !self.stimulus.contains(x) {
            return Err(Error::Domain(format!("x = {x} outside the stimulus interval")));
        }
        if !self.s_domain.contains(s) {
            return Err(Error::Domain(format!("s = {s} outside the family's S")));
        }
        let v = match &self.kind {
            FamilyKind::Weber { k } => k.eval(s)? * x,
            FamilyKind::Power { kappa, rho } => kappa.eval(s)? * x.powf(rho.eval(s)?),
            FamilyKind::PhiForm { phi, f, g } => {
                let den = g.eval(s)?;
                if den == 0.0 {
                    return Err(Error::Division(format!("g({s}) = 0")));
                }
                phi.eval(f.eval(s)? * x)? / den
            }
            FamilyKind::AffineA { c, mu, d } => ((s + d) / c).powf(1.0 / mu) * x,
            FamilyKind::AffineB { c, d } => ((s - d) / c).exp() * x,
            FamilyKind::AffineC => x,
            FamilyKind::ParallelLog { alpha, beta, gamma, f } => alpha * (f.eval(s)? * x).ln() + beta + gamma,
            FamilyKind::ParallelPower { alpha, rho, gamma, f } => alpha * x.powf(*rho) + gamma / f.eval(s)?.powf(*rho),
            FamilyKind::BalancedParallel { nu } => x + nu.eval(s)?,
            FamilyKind::SubCaseI { a, b, rho, r } => a * (b * rho * s).exp() * x.powf(r + rho),
            FamilyKind::SubCaseII { a, c, rho, r, epsilon } => a * (c * x.powf(r / rho) + s - epsilon).powf(*rho),
            FamilyKind::FechExp { rho_bar } => (rho_bar * s).exp() * x,
            FamilyKind::PowerF { phi, big_f, h } => x.powf(phi.eval(s)?) * big_f.eval(x * h.invert(s)?)?,
            FamilyKind::ShiftForm { f, big_f, theta } => {
                let root = s.powf(1.0 / theta);
                let den = f.eval(root)?;
                if den == 0.0 {
                    return Err(Error::Division(format!("f({root}) = 0")));
                }
                f.eval(x * root)? / den * big_f.eval(x.powf(*theta) * s)?
            }
            FamilyKind::Homogeneous { phi, c } => {
                if s == 0.0 {
                    c * x
                } else {
                    s * phi.eval(x / s)?
                }
            }
            FamilyKind::Tabulated { table } => table.eval(x, s)?,
            FamilyKind::Represented { rep } => rep.xi(x, s)?,
        };
        finite(v, || format!("xi_{s}({x})"))
    }

    /// A `(γ, η)` pair for which the similarity law holds identically, when
    /// one is known in closed form.
    pub fn canonical_companions(&self) -> Option<(GammaMap, EtaMap)> {
        let weber = || Some((GammaMap::LambdaOnly, EtaMap::identity_in_s()));
        // η(λ, s) = f⁻¹(λ·f(s)), i.e. the conjugate map with H = f⁻¹
        let rescaling = |f: &Curve| -> Option<EtaMap> {
            let h = f.to_scale().ok()?.inverted().ok()?;
            Some(EtaMap::conjugate(h))
        };
        match &self.kind {
            FamilyKind::Weber { .. }
            | FamilyKind::AffineA { .. }
            | FamilyKind::AffineB { .. }
            | FamilyKind::AffineC
            | FamilyKind::FechExp { .. } => weber(),
            FamilyKind::Power { rho, .. } => Some((GammaMap::PowerPhi { phi: rho.clone() }, EtaMap::identity_in_s())),
            FamilyKind::SubCaseI { b, rho, r, .. } => {
                if *b == 0.0 {
                    Some((GammaMap::PowerOfLambda { r: r + rho }, EtaMap::identity_in_s()))
                } else {
                    let eta = EtaMap::additive_log(1.0, *b).ok()?;
                    Some((GammaMap::PowerOfLambda { r: *r }, eta))
                }
            }
            FamilyKind::SubCaseII { rho, r, epsilon, .. } => {
                let eta = EtaMap::affine_shift(r / rho, *epsilon).ok()?;
                Some((GammaMap::PowerOfLambda { r: *r }, eta))
            }
            FamilyKind::Homogeneous { .. } => Some((GammaMap::LambdaOnly, EtaMap::power_scale(-1.0).ok()?)),
            FamilyKind::PowerF { phi, h, .. } => {
                // the law only closes when φ(η(λ, s)) = φ(s), i.e. φ constant
                phi.as_constant()?;
                Some((GammaMap::PowerPhi { phi: phi.clone() }, EtaMap::conjugate(h.clone())))
            }
            FamilyKind::ShiftForm { f, theta, .. } => {
                let h = Curve::scale(ScaleFunction::power(1.0, 1.0 / theta, 0.0).ok()?);
                let gamma = GammaMap::RatioForm { kappa: f.clone(), h };
                Some((gamma, EtaMap::power_scale(*theta).ok()?))
            }
            FamilyKind::PhiForm { f, g, .. } if f == g => Some((GammaMap::LambdaOnly, rescaling(f)?)),
            FamilyKind::ParallelPower { rho, f, .. } => Some((GammaMap::PowerOfLambda { r: *rho }, rescaling(f)?)),
            FamilyKind::ParallelLog { f, .. } => Some((GammaMap::PowerOfLambda { r: 0.0 }, rescaling(f)?)),
            _ => None,
        }
    }

    /// Samples the family on `xs × ss` into a tabulated family.
    pub fn tabulate(&self, xs: &[f64], ss: &[f64]) -> Result<SensitivityFamily> {
        let table = Table2d::tabulate(xs.to_vec(), ss.to_vec(), |x, s| self.eval(x, s))?;
        Ok(SensitivityFamily::tabulated(table))
    }
}

/// The scales `(u, σ)` of the gain-control representation that the affine
/// alternatives admit: `u = c·x^μ`, `σ = x^μ` for A (valid when `d = c`),
/// `u = c·ln x + d`, `σ ≡ 1` for B (valid when `d = 0`) and `u = id`,
/// `σ ≡ 0` for C.
pub fn gain_control_scales(family: &SensitivityFamily) -> Result<Representation> {
    match family.kind() {
        FamilyKind::AffineA { c, mu, d } => Ok(Representation::GainControl {
            u: ScaleFunction::power(*c, *mu, d - c)?,
            sigma: Curve::scale(ScaleFunction::power(1.0, *mu, 0.0)?),
        }),
        FamilyKind::AffineB { c, d } => Ok(Representation::GainControl {
            u: ScaleFunction::log(*c, *d)?,
            sigma: Curve::constant(1.0),
        }),
        FamilyKind::AffineC => Ok(Representation::GainControl {
            u: ScaleFunction::identity(),
            sigma: Curve::constant(0.0),
        }),
        other => Err(Error::Param(format!("{other:?} is not an affine alternative"))),
    }
}
