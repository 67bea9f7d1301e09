//! The two-variable maps `η(λ, s)` and `γ(λ, s)` of the similarity law.
//!
//! Besides evaluation this module hosts the multiplicatively translational
//! check (cocycle plus the two boundary conditions), extraction of the
//! conjugating scale `H` from a section `λ ↦ η(λ, s*)`, the conjugate
//! construction `η(λ, s) = H(λ·H⁻¹(s))`, the ratio form of `γ` implied by a
//! regular translational `η`, and the `φ(s) = φ(η(λ, s))` consistency test.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{finite, Error, Result};
use crate::grid::Grid;
use crate::report::{ResidualReport, ResidualSweep};
use crate::scales::{Interval, Knots, ScaleFunction};
use crate::table2d::Table2d;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EtaKind {
    /// `λ^θ·s`
    PowerScale { theta: f64 },
    /// `H(λ·H⁻¹(s))`
    Conjugate { h: ScaleFunction },
    /// `s`
    IdentityInS,
    /// `ν(s)`, independent of `λ`.
    ConstantPerS { nu: Curve },
    /// `λ^(−δ)(s − ε) + ε`
    AffineShift { delta: f64, epsilon: f64 },
    /// `−(1/κ)·ln(λ^(−δ)(e^(−κs) − β) + β)`
    LogBlend { kappa: f64, beta: f64, delta: f64 },
    /// `s + (δ/κ)·ln λ`
    AdditiveLog { delta: f64, kappa: f64 },
    /// Bilinear table with rows `λ` and columns `s`.
    Tabulated { table: Table2d },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaMap {
    kind: EtaKind,
    s_domain: Interval,
}

fn nonzero(name: &str, v: f64) -> Result<()> {
    if v == 0.0 || !v.is_finite() {
        Err(Error::Param(format!("{name} must be finite and nonzero")))
    } else {
        Ok(())
    }
}

fn finite_param(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Param(format!("{name} must be finite")))
    }
}

impl EtaMap {
    fn unbounded(kind: EtaKind) -> Self {
        EtaMap {
            kind,
            s_domain: Interval::real_line(),
        }
    }

    pub fn power_scale(theta: f64) -> Result<Self> {
        finite_param("theta", theta)?;
        Ok(Self::unbounded(EtaKind::PowerScale { theta }))
    }

    pub fn conjugate(h: ScaleFunction) -> Self {
        Self::unbounded(EtaKind::Conjugate { h })
    }

    pub fn identity_in_s() -> Self {
        Self::unbounded(EtaKind::IdentityInS)
    }

    pub fn constant_per_s(nu: Curve) -> Self {
        Self::unbounded(EtaKind::ConstantPerS { nu })
    }

    pub fn affine_shift(delta: f64, epsilon: f64) -> Result<Self> {
        finite_param("delta", delta)?;
        finite_param("epsilon", epsilon)?;
        Ok(Self::unbounded(EtaKind::AffineShift { delta, epsilon }))
    }

    pub fn log_blend(kappa: f64, beta: f64, delta: f64) -> Result<Self> {
        nonzero("kappa", kappa)?;
        finite_param("beta", beta)?;
        finite_param("delta", delta)?;
        Ok(Self::unbounded(EtaKind::LogBlend { kappa, beta, delta }))
    }

    pub fn additive_log(delta: f64, kappa: f64) -> Result<Self> {
        finite_param("delta", delta)?;
        nonzero("kappa", kappa)?;
        Ok(Self::unbounded(EtaKind::AdditiveLog { delta, kappa }))
    }

    /// Tabulated map; every tabulated value must lie in the tabulated `s` range.
    pub fn tabulated(table: Table2d) -> Result<Self> {
        let s_domain = table.col_domain();
        if !table.value_hull().is_subset_of(&s_domain) {
            return Err(Error::Domain("tabulated eta leaves its s range".into()));
        }
        Ok(EtaMap {
            kind: EtaKind::Tabulated { table },
            s_domain,
        })
    }

    /// Declares the set `S` the map must stay inside.
    pub fn with_s_domain(mut self, s_domain: Interval) -> Self {
        self.s_domain = s_domain;
        self
    }

    pub fn kind(&self) -> &EtaKind {
        &self.kind
    }

    pub fn s_domain(&self) -> Interval {
        self.s_domain
    }

    pub fn eval(&self, lambda: f64, s: f64) -> Result<f64> {
        if !self.s_domain.contains(s) {
            return Err(Error::Domain(format!("s = {s} outside the eta domain")));
        }
        let v = match &self.kind {
            EtaKind::PowerScale { theta } => lambda.powf(*theta) * s,
            EtaKind::Conjugate { h } => h.eval(lambda * h.invert(s)?)?,
            EtaKind::IdentityInS => s,
            EtaKind::ConstantPerS { nu } => nu.eval(s)?,
            EtaKind::AffineShift { delta, epsilon } => lambda.powf(-delta) * (s - epsilon) + epsilon,
            EtaKind::LogBlend { kappa, beta, delta } => {
                -((lambda.powf(-delta) * ((-kappa * s).exp() - beta) + beta).ln()) / kappa
            }
            EtaKind::AdditiveLog { delta, kappa } => s + delta / kappa * lambda.ln(),
            EtaKind::Tabulated { table } => table.eval(lambda, s)?,
        };
        let v = finite(v, || format!("eta({lambda}, {s})"))?;
        if !self.s_domain.contains(v) {
            return Err(Error::Domain(format!("eta({lambda}, {s}) = {v} leaves S")));
        }
        Ok(v)
    }

    /// Whether every sampled `η(λ, s)` lands in `S`.
    pub fn maps_into_s(&self, lambdas: &[f64], ss: &[f64]) -> bool {
        lambdas
            .iter()
            .all(|&l| ss.iter().all(|&s| self.eval(l, s).is_ok()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaMap {
    /// `λ^r`
    PowerOfLambda { r: f64 },
    /// `λ^φ(s)`
    PowerPhi { phi: Curve },
    /// `λ`
    LambdaOnly,
    /// `κ(h(s)·λ) / κ(h(s))`
    RatioForm { kappa: Curve, h: Curve },
    Tabulated { table: Table2d },
}

impl GammaMap {
    pub fn eval(&self, lambda: f64, s: f64) -> Result<f64> {
        let v = match self {
            GammaMap::PowerOfLambda { r } => lambda.powf(*r),
            GammaMap::PowerPhi { phi } => lambda.powf(phi.eval(s)?),
            GammaMap::LambdaOnly => lambda,
            GammaMap::RatioForm { kappa, h } => {
                let hs = h.eval(s)?;
                let den = kappa.eval(hs)?;
                if den == 0.0 {
                    return Err(Error::Division(format!("kappa(h({s})) = 0")));
                }
                kappa.eval(hs * lambda)? / den
            }
            GammaMap::Tabulated { table } => table.eval(lambda, s)?,
        };
        finite(v, || format!("gamma({lambda}, {s})"))
    }
}

/// Residuals of the multiplicatively translational conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationalReport {
    /// `|η(λλ̃, s) − η(λ̃, η(λ, s))|`, worst point `(λ̃, λ, s)`.
    pub cocycle: ResidualReport,
    /// `|η(1, s) − s|`
    pub unit_boundary: ResidualReport,
    /// `|η(λ, 0)|`
    pub zero_boundary: ResidualReport,
    pub pass: bool,
}

/// Checks `η(λλ̃, s) = η(λ̃, η(λ, s))`, `η(1, s) = s` and `η(λ, 0) = 0`.
///
/// Products `λλ̃` outside the sampled `J` hull are skipped and counted;
/// a composition leaving `S` is a domain error.
pub fn check_mult_translational(eta: &EtaMap, grid: &Grid, tol: f64) -> Result<TranslationalReport> {
    let lambdas = grid.lambda();
    let j = Interval::new(lambdas[0], lambdas[lambdas.len() - 1])?;
    let slack = |v: f64| 1e-12 * (1.0 + v.abs());

    let mut cocycle = ResidualSweep::new("cocycle", tol);
    for &l in lambdas {
        for &lt in lambdas {
            let prod = l * lt;
            if prod < j.lo - slack(prod) || prod > j.hi + slack(prod) {
                for _ in grid.s() {
                    cocycle.exclude();
                }
                continue;
            }
            for &s in grid.s() {
                let direct = eta.eval(prod, s)?;
                let composed = eta.eval(lt, eta.eval(l, s)?)?;
                cocycle.record(direct - composed, [lt, l, s]);
            }
        }
    }

    let mut unit = ResidualSweep::new("eta(1,s)=s", tol);
    for &s in grid.s() {
        unit.record(eta.eval(1.0, s)? - s, [0.0, 1.0, s]);
    }
    let mut zero = ResidualSweep::new("eta(lambda,0)=0", tol);
    for &l in lambdas {
        zero.record(eta.eval(l, 0.0)?, [0.0, l, 0.0]);
    }

    let cocycle = cocycle.finish_lenient()?;
    let unit_boundary = unit.finish()?;
    let zero_boundary = zero.finish()?;
    let pass = cocycle.pass && unit_boundary.pass && zero_boundary.pass;
    Ok(TranslationalReport {
        cocycle,
        unit_boundary,
        zero_boundary,
        pass,
    })
}

/// `H` recovered from the section `λ ↦ η(λ, s*)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HExtraction {
    pub h: ScaleFunction,
    /// `|η(λ, s) − H(λ·H⁻¹(s))|` over the grid.
    pub reconstruction: ResidualReport,
}

/// Tabulates `H(λ) = η(λ, s*)` on the grid's `λ` samples.
///
/// Strict monotonicity on the samples stands in for bijectivity. The
/// reconstruction residual is swept over grid `s` values inside the range
/// of `H`; points whose `λ·H⁻¹(s)` leaves the sampled `J` are skipped.
pub fn extract_h(eta: &EtaMap, s_star: f64, grid: &Grid, tol: f64) -> Result<HExtraction> {
    let lambdas = grid.lambda();
    if lambdas.len() < 2 {
        return Err(Error::NotInvertible("need at least two lambda samples".into()));
    }
    let values = lambdas
        .iter()
        .map(|&l| eta.eval(l, s_star))
        .collect::<Result<Vec<_>>>()?;
    let up = values.windows(2).all(|w| w[1] > w[0]);
    let down = values.windows(2).all(|w| w[1] < w[0]);
    if !up && !down {
        return Err(Error::NotInvertible(format!(
            "lambda -> eta(lambda, {s_star}) is not strictly monotone on the samples"
        )));
    }
    let h = ScaleFunction::table(Knots::new(lambdas.to_vec(), values)?)?;
    let conj = conjugate_eta(h.clone());
    let range = h.range();
    let mut sweep = ResidualSweep::new("H reconstruction", tol);
    for &l in lambdas {
        for &s in grid.s() {
            if !range.contains(s) {
                sweep.exclude();
                continue;
            }
            sweep.try_record([0.0, l, s], || Ok(eta.eval(l, s)? - conj.eval(l, s)?));
        }
    }
    Ok(HExtraction {
        h,
        reconstruction: sweep.finish_lenient()?,
    })
}

/// The regular translational map `η(λ, s) = H(λ·H⁻¹(s))`.
pub fn conjugate_eta(h: ScaleFunction) -> EtaMap {
    EtaMap::conjugate(h)
}

/// Compares two maps pointwise on `λ × s` samples; failing evaluations are
/// skipped and counted.
pub fn compare_eta(a: &EtaMap, b: &EtaMap, lambdas: &[f64], ss: &[f64], tol: f64) -> Result<ResidualReport> {
    let mut sweep = ResidualSweep::new("eta comparison", tol);
    for &l in lambdas {
        for &s in ss {
            sweep.try_record([0.0, l, s], || Ok(a.eval(l, s)? - b.eval(l, s)?));
        }
    }
    sweep.finish_lenient()
}

/// Builds the ratio form `γ(λ, s) = κ(h(s)λ)/κ(h(s))` with `κ(λ) = γ(λ, 1)`
/// and `h(s) = H⁻¹(s)/H⁻¹(1)`, and reports how far the given `γ` is from it.
///
/// Grid points where `κ(h(s))` vanishes are excluded and counted.
pub fn derive_gamma(gamma: &GammaMap, h: &ScaleFunction, grid: &Grid, tol: f64) -> Result<(GammaMap, ResidualReport)> {
    let h_inv_one = h.invert(1.0)?;
    if h_inv_one == 0.0 {
        return Err(Error::Division("H^-1(1) = 0".into()));
    }
    let derived = GammaMap::RatioForm {
        kappa: Curve::GammaSection {
            gamma: Box::new(gamma.clone()),
            s: 1.0,
        },
        h: Curve::Scaled {
            inner: Box::new(Curve::InverseOf { scale: h.clone() }),
            factor: 1.0 / h_inv_one,
        },
    };
    let mut sweep = ResidualSweep::new("gamma ratio form", tol);
    for &s in grid.s() {
        for &l in grid.lambda() {
            match derived.eval(l, s) {
                Ok(pred) => sweep.record(gamma.eval(l, s)? - pred, [0.0, l, s]),
                Err(Error::Division(_)) => sweep.exclude(),
                Err(Error::Range(_)) | Err(Error::Domain(_)) => sweep.exclude(),
                Err(e) => return Err(e),
            }
        }
    }
    Ok((derived, sweep.finish_lenient()?))
}

/// Sweeps `|φ(s) − φ(η(λ, s))|`. For strictly monotone `φ` and a regular
/// translational `η` other than the identity this is expected to fail.
pub fn phi_consistency(phi: &Curve, eta: &EtaMap, grid: &Grid, tol: f64) -> Result<ResidualReport> {
    let mut sweep = ResidualSweep::new("phi consistency", tol);
    for &l in grid.lambda() {
        for &s in grid.s() {
            let moved = eta.eval(l, s)?;
            sweep.record(phi.eval(s)? - phi.eval(moved)?, [0.0, l, s]);
        }
    }
    sweep.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scales::{geomspace, linspace};

    fn grid(lambdas: Vec<f64>, ss: Vec<f64>) -> Grid {
        Grid::with_stimulus(Interval::non_negative(), vec![1.0], lambdas, ss).unwrap()
    }

    #[test]
    fn translational_examples() {
        let g = grid(linspace(0.5, 2.0, 16), linspace(0.0, 1.0, 11));
        let r = check_mult_translational(&EtaMap::power_scale(-1.0).unwrap(), &g, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.cocycle.excluded > 0);

        let r = check_mult_translational(&EtaMap::affine_shift(1.0, 0.5).unwrap(), &g, 1e-10).unwrap();
        assert!(r.cocycle.pass && r.unit_boundary.pass);
        assert!(!r.zero_boundary.pass);
        // ε(1 − λ^{-δ}) at λ = 2 is 0.25
        assert!((r.zero_boundary.max_abs - 0.5).abs() < 1e-15);

        let r = check_mult_translational(&EtaMap::identity_in_s(), &g, 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.cocycle.max_abs, 0.0);
    }

    #[test]
    fn closing_catalog_boundaries() {
        // η1 with β = 1 is real only for small s when λ < 1
        let g = grid(linspace(0.5, 2.0, 9), linspace(0.0, 0.5, 9));
        let tol = 1e-10;
        let check = |eta: EtaMap| check_mult_translational(&eta, &g, tol).unwrap();
        // η1: boundary holds iff β = 1 or δ = 0
        assert!(check(EtaMap::log_blend(0.7, 1.0, 1.3).unwrap()).pass);
        assert!(check(EtaMap::log_blend(0.7, 0.4, 0.0).unwrap()).pass);
        let r = check(EtaMap::log_blend(0.7, 0.4, 1.3).unwrap());
        assert!(r.cocycle.pass && r.unit_boundary.pass && !r.zero_boundary.pass);
        // η2: iff δ = 0
        assert!(check(EtaMap::additive_log(0.0, 2.0).unwrap()).pass);
        let r = check(EtaMap::additive_log(1.0, 2.0).unwrap());
        assert!(r.cocycle.pass && r.unit_boundary.pass && !r.zero_boundary.pass);
        // η3: iff ε = 0 or δ = 0
        assert!(check(EtaMap::affine_shift(1.0, 0.0).unwrap()).pass);
        assert!(check(EtaMap::affine_shift(0.0, 0.5).unwrap()).pass);
    }

    #[test]
    fn extract_h_examples() {
        let lambdas = geomspace(0.5, 2.0, 17);
        let g = grid(lambdas.clone(), vec![1.0]);
        let ex = extract_h(&EtaMap::power_scale(2.0).unwrap(), 1.0, &g, 1e-9).unwrap();
        for &l in &lambdas {
            assert!((ex.h.eval(l).unwrap() - l * l).abs() < 1e-15);
        }
        let err = extract_h(&EtaMap::identity_in_s(), 0.3, &g, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NotInvertible(_)));

        // H(λ) = 1/λ; sample s on the image nodes so λ·H⁻¹(s) lands on knots
        let eta = EtaMap::power_scale(-1.0).unwrap();
        let nodes: Vec<f64> = lambdas.iter().rev().map(|l| 1.0 / l).collect();
        let g = grid(lambdas.clone(), nodes);
        let ex = extract_h(&eta, 1.0, &g, 1e-9).unwrap();
        assert!(ex.reconstruction.pass, "{:?}", ex.reconstruction);
        assert!(ex.reconstruction.evaluated > 0);
    }

    #[test]
    fn conjugate_examples() {
        let sq = conjugate_eta(ScaleFunction::power(1.0, 2.0, 0.0).unwrap());
        assert!((sq.eval(1.5, 0.8).unwrap() - 2.25 * 0.8).abs() < 1e-14);
        let id = conjugate_eta(ScaleFunction::identity());
        assert!((id.eval(1.5, 0.8).unwrap() - 1.2).abs() < 1e-15);
        let em1 = conjugate_eta(ScaleFunction::exp(1.0, 1.0, -1.0).unwrap());
        for (l, s) in [(0.5, 0.3), (2.0, 1.7), (1.3, 0.0)] {
            let expect = (l * (1.0f64 + s).ln()).exp() - 1.0;
            assert!((em1.eval(l, s).unwrap() - expect).abs() < 1e-14);
        }
        assert_eq!(em1.eval(3.0, 0.0).unwrap(), 0.0);
        assert!(matches!(sq.eval(1.0, -1.0), Err(Error::Range(_))));
    }

    #[test]
    fn derive_gamma_examples() {
        let g = grid(linspace(0.5, 2.0, 7), linspace(0.25, 2.0, 8));
        let inv = ScaleFunction::power(1.0, -1.0, 0.0).unwrap();
        let (derived, r) = derive_gamma(&GammaMap::LambdaOnly, &inv, &g, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
        for &s in g.s() {
            assert_eq!(derived.eval(1.0, s).unwrap(), 1.0);
        }
        let (_, r) = derive_gamma(&GammaMap::PowerOfLambda { r: 2.0 }, &ScaleFunction::identity(), &g, 1e-12).unwrap();
        assert!(r.pass);
        let (_, r) = derive_gamma(&GammaMap::PowerOfLambda { r: 0.0 }, &ScaleFunction::identity(), &g, 0.0).unwrap();
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn derive_gamma_excludes_vanishing_denominators() {
        // κ(λ) = γ(λ, 1) = λ − 1 vanishes at h(s) = 1, i.e. s = 1
        let gamma = GammaMap::Tabulated {
            table: Table2d::tabulate(linspace(0.0, 4.0, 5), linspace(0.0, 2.0, 3), |l, _| Ok(l - 1.0)).unwrap(),
        };
        let g = grid(vec![1.0, 2.0], vec![0.5, 1.0, 1.5]);
        let (_, r) = derive_gamma(&gamma, &ScaleFunction::identity(), &g, 1e-12).unwrap();
        assert_eq!(r.excluded, 2);
    }

    #[test]
    fn phi_consistency_examples() {
        let g = grid(linspace(1.5, 2.0, 5), linspace(0.1, 1.0, 10));
        let eta = EtaMap::power_scale(1.0).unwrap();
        let r = phi_consistency(&Curve::identity(), &eta, &g, 1e-9).unwrap();
        assert!(!r.pass);
        // max |s − λs| = 1.0·(2 − 1)
        assert!((r.max_abs - 1.0).abs() < 1e-15);
        let r = phi_consistency(&Curve::constant(3.0), &eta, &g, 0.0).unwrap();
        assert!(r.pass);
        let r = phi_consistency(&Curve::identity(), &EtaMap::identity_in_s(), &g, 0.0).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn tabulated_eta_must_stay_in_s() {
        let t = Table2d::tabulate(vec![0.5, 2.0], vec![0.0, 1.0], |l, s| Ok(l * s)).unwrap();
        assert!(EtaMap::tabulated(t).is_err());
        let t = Table2d::tabulate(vec![0.5, 1.0], vec![0.0, 1.0], |l, s| Ok(l * s)).unwrap();
        assert!(EtaMap::tabulated(t).is_ok());
    }

    #[test]
    fn gamma_variants() {
        assert_eq!(GammaMap::LambdaOnly.eval(3.0, 9.0).unwrap(), 3.0);
        assert_eq!(GammaMap::PowerOfLambda { r: 2.0 }.eval(3.0, 9.0).unwrap(), 9.0);
        let pp = GammaMap::PowerPhi { phi: Curve::identity() };
        assert!((pp.eval(2.0, 3.0).unwrap() - 8.0).abs() < 1e-15);
        let ratio = GammaMap::RatioForm {
            kappa: Curve::identity(),
            h: Curve::constant(0.0),
        };
        assert!(matches!(ratio.eval(2.0, 1.0), Err(Error::Division(_))));
    }
}
