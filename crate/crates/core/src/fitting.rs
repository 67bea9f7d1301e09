//! Recovery of parameters and scales from `(x, s, ξ)` samples.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::eta::{EtaMap, GammaMap};
use crate::families::{make_family, FamilyKind, SensitivityFamily};
use crate::grid::Grid;
use crate::report::{relative, ResidualReport, ResidualSweep};
use crate::scales::{parse_field, Knots, ScaleFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub s: f64,
    pub xi: f64,
}

/// Rows of `(x, s, ξ)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    rows: Vec<Sample>,
    /// Standard deviation of the additive noise, when known.
    pub noise_sigma: Option<f64>,
}

impl SampleSet {
    pub fn new(rows: Vec<Sample>) -> Self {
        SampleSet {
            rows,
            noise_sigma: None,
        }
    }

    pub fn push(&mut self, x: f64, s: f64, xi: f64) {
        self.rows.push(Sample { x, s, xi });
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Samples `family` on `xs × ss`, `s` varying slowest.
    pub fn from_family(family: &SensitivityFamily, xs: &[f64], ss: &[f64]) -> Result<Self> {
        let mut set = SampleSet::default();
        for &s in ss {
            for &x in xs {
                set.push(x, s, family.eval(x, s)?);
            }
        }
        Ok(set)
    }

    /// Adds seeded Gaussian noise of standard deviation `sigma` to every `ξ`.
    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Result<Self> {
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::Param(format!("noise sigma: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for row in &mut self.rows {
            row.xi += normal.sample(&mut rng);
        }
        self.noise_sigma = Some(sigma);
        Ok(self)
    }

    /// Deterministic split: every fifth row (indices 4, 9, ...) is held out.
    pub fn split(&self) -> (SampleSet, SampleSet) {
        let mut train = SampleSet::default();
        let mut test = SampleSet::default();
        for (i, r) in self.rows.iter().enumerate() {
            if i % 5 == 4 {
                test.rows.push(*r);
            } else {
                train.rows.push(*r);
            }
        }
        train.noise_sigma = self.noise_sigma;
        test.noise_sigma = self.noise_sigma;
        (train, test)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "s", "xi"])?;
        for r in &self.rows {
            w.write_record([r.x.to_string(), r.s.to_string(), r.xi.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header != ["x", "s", "xi"] {
            return Err(Error::Config(format!("expected header `x,s,xi`, found `{}`", header.join(","))));
        }
        let mut set = SampleSet::default();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Config("expected three columns".into()));
            }
            set.push(parse_field(&rec[0])?, parse_field(&rec[1])?, parse_field(&rec[2])?);
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Rows grouped by exact `s` value, in ascending `s`.
    fn groups(&self) -> Vec<(f64, Vec<Sample>)> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.x.total_cmp(&b.x)));
        let mut out: Vec<(f64, Vec<Sample>)> = Vec::new();
        for r in rows {
            match out.last_mut() {
                Some((s, g)) if *s == r.s => g.push(r),
                _ => out.push((r.s, vec![r])),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedParam {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: String,
    pub params: Vec<NamedParam>,
    pub residual: ResidualReport,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }
}

fn named(names: &[&str], values: &[f64]) -> Vec<NamedParam> {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| NamedParam {
            name: n.to_string(),
            value: *v,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub s: f64,
    pub kappa: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub rows: Vec<PowerRow>,
    pub result: FitResult,
}

impl PowerFit {
    /// `φ̂(s) = ρ̂(s)` as a curve: constant for one `s` level, else a table.
    pub fn exponent_curve(&self) -> Result<Curve> {
        if self.rows.len() == 1 {
            return Ok(Curve::constant(self.rows[0].rho));
        }
        let knots = Knots::new(
            self.rows.iter().map(|r| r.s).collect(),
            self.rows.iter().map(|r| r.rho).collect(),
        )?;
        Ok(Curve::table(knots))
    }
}

/// Per-`s` ordinary least squares of `ln ξ` on `ln x`, giving
/// `κ̂(s) = e^intercept` and `ρ̂(s) = slope`.
///
/// The residual report sweeps the power law on the data itself: for every
/// pair of rows at the same `s`, `ξ(x_j) − (x_j/x_i)^ρ̂ · ξ(x_i)`, scaled by
/// `1 + |ξ(x_j)|`.
pub fn fit_power_per_s(samples: &SampleSet, tol: f64) -> Result<PowerFit> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    if let Some(r) = samples.rows().iter().find(|r| !(r.x > 0.0 && r.xi > 0.0)) {
        return Err(Error::NonPositive(format!("x = {}, xi = {} at s = {}", r.x, r.xi, r.s)));
    }
    let mut rows = Vec::new();
    let mut sweep = ResidualSweep::new("power law on data", tol);
    for (s, group) in samples.groups() {
        let mut xs: Vec<f64> = group.iter().map(|r| r.x).collect();
        xs.dedup();
        if xs.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "{} distinct x at s = {s}, need 3",
                xs.len()
            )));
        }
        let n = group.len() as f64;
        let lx: Vec<f64> = group.iter().map(|r| r.x.ln()).collect();
        let ly: Vec<f64> = group.iter().map(|r| r.xi.ln()).collect();
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
        let rho = sxy / sxx;
        let kappa = (my - rho * mx).exp();
        for i in &group {
            for j in &group {
                if i.x != j.x {
                    let lambda = j.x / i.x;
                    sweep.record(relative(j.xi - lambda.powf(rho) * i.xi, j.xi), [i.x, lambda, s]);
                }
            }
        }
        rows.push(PowerRow { s, kappa, rho });
    }
    let params = rows
        .iter()
        .flat_map(|r| {
            [
                NamedParam {
                    name: format!("kappa@{}", r.s),
                    value: r.kappa,
                },
                NamedParam {
                    name: format!("rho@{}", r.s),
                    value: r.rho,
                },
            ]
        })
        .collect();
    Ok(PowerFit {
        rows,
        result: FitResult {
            kind: "power_per_s".into(),
            params,
            residual: sweep.finish()?,
            iterations: 1,
            converged: true,
        },
    })
}

/// `(Φ, f, g)` with `g(s)·ξ_s(x) = Φ(f(s)·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiFormExtraction {
    /// `Φ(t) = ξ_s*(t)` tabulated at the products `λ·x` of the grid.
    pub phi: Knots,
    /// `f(s) = λ` with `η(λ, s*) = s`.
    pub f: ScaleFunction,
    /// `g(s) = γ(f(s), s*)`.
    pub g: Knots,
    /// `g(s)·ξ_s(x) − Φ(f(s)·x)` scaled by `1 + |Φ|`, on `s ∈ η(J, s*)`.
    pub residual: ResidualReport,
}

impl PhiFormExtraction {
    /// The family `Φ(f(s)·x)/g(s)` assembled from the tables.
    pub fn family(&self) -> Result<SensitivityFamily> {
        make_family(FamilyKind::PhiForm {
            phi: Curve::table(self.phi.clone()),
            f: Curve::scale(self.f.clone()),
            g: Curve::table(self.g.clone()),
        })
    }
}

/// Builds the one-variable functions of the `Φ(f(s)x)/g(s)` form from a
/// family satisfying the similarity law with `(γ, η)`, using the section
/// `λ ↦ η(λ, s*)` on the grid's `λ` samples.
pub fn extract_phi_form(
    family: &SensitivityFamily,
    eta: &EtaMap,
    gamma: &GammaMap,
    s_star: f64,
    grid: &Grid,
    tol: f64,
) -> Result<PhiFormExtraction> {
    let lambdas = grid.lambda();
    if lambdas.len() < 2 {
        return Err(Error::NotInvertible("need at least two lambda samples".into()));
    }
    let h = lambdas
        .iter()
        .map(|&l| eta.eval(l, s_star))
        .collect::<Result<Vec<_>>>()?;
    let up = h.windows(2).all(|w| w[1] > w[0]);
    let down = h.windows(2).all(|w| w[1] < w[0]);
    if !up && !down {
        return Err(Error::NotInvertible(format!(
            "lambda -> eta(lambda, {s_star}) is not strictly monotone on the samples"
        )));
    }
    let mut f_pairs = Vec::with_capacity(lambdas.len());
    let mut g_pairs = Vec::with_capacity(lambdas.len());
    for (&l, &hv) in lambdas.iter().zip(&h) {
        f_pairs.push((hv, l));
        g_pairs.push((hv, gamma.eval(l, s_star)?));
    }
    f_pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    g_pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let f = ScaleFunction::table_from_pairs(&f_pairs)?;
    let g = Knots::from_pairs(&g_pairs)?;

    let mut products: Vec<f64> = lambdas
        .iter()
        .flat_map(|&l| grid.x().iter().map(move |&x| l * x))
        .collect();
    products.sort_by(f64::total_cmp);
    products.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    if products.len() < 2 {
        return Err(Error::InsufficientData("need at least two distinct products lambda*x".into()));
    }
    let phi_vals = products
        .iter()
        .map(|&t| family.eval(t, s_star))
        .collect::<Result<Vec<_>>>()?;
    let phi = Knots::new(products, phi_vals)?;

    let mut sweep = ResidualSweep::new("phi form", tol);
    for (&l, &s) in lambdas.iter().zip(&h) {
        for &x in grid.x() {
            let fx = f.eval(s)? * x;
            let p = phi.interpolate(fx).map_err(|_| {
                Error::Domain(format!("f({s})*x = {fx} leaves the tabulated stimulus range"))
            })?;
            let gs = g.interpolate(s)?;
            let r = match family.eval(x, s) {
                Ok(xi) => relative(gs * xi - p, p),
                Err(_) => f64::NAN,
            };
            sweep.record(r, [x, l, s]);
        }
    }
    Ok(PhiFormExtraction {
        phi,
        f,
        g,
        residual: sweep.finish()?,
    })
}

/// Parametric catalog variants that [`fit_family`] can fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    AffineA,
    AffineB,
    SubCaseI,
    SubCaseII,
    FechExp,
    /// Constant `κ` and `ρ`.
    Power,
}

impl FitKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "affine_a" => FitKind::AffineA,
            "affine_b" => FitKind::AffineB,
            "sub_case_i" => FitKind::SubCaseI,
            "sub_case_ii" => FitKind::SubCaseII,
            "fech_exp" => FitKind::FechExp,
            "power" => FitKind::Power,
            other => return Err(Error::Config(format!("no fittable family kind `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            FitKind::AffineA => "affine_a",
            FitKind::AffineB => "affine_b",
            FitKind::SubCaseI => "sub_case_i",
            FitKind::SubCaseII => "sub_case_ii",
            FitKind::FechExp => "fech_exp",
            FitKind::Power => "power",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitKind::AffineA => &["c", "mu", "d"],
            FitKind::AffineB => &["c", "d"],
            FitKind::SubCaseI => &["a", "b", "rho", "r"],
            FitKind::SubCaseII => &["a", "c", "rho", "r", "epsilon"],
            FitKind::FechExp => &["rho_bar"],
            FitKind::Power => &["kappa", "rho"],
        }
    }

    fn default_value(name: &str) -> f64 {
        match name {
            "d" | "epsilon" | "rho_bar" => 0.0,
            _ => 1.0,
        }
    }

    /// The family for a parameter vector in `param_names` order.
    pub fn family(self, p: &[f64]) -> Result<SensitivityFamily> {
        let kind = match self {
            FitKind::AffineA => FamilyKind::AffineA { c: p[0], mu: p[1], d: p[2] },
            FitKind::AffineB => FamilyKind::AffineB { c: p[0], d: p[1] },
            FitKind::SubCaseI => FamilyKind::SubCaseI { a: p[0], b: p[1], rho: p[2], r: p[3] },
            FitKind::SubCaseII => FamilyKind::SubCaseII {
                a: p[0],
                c: p[1],
                rho: p[2],
                r: p[3],
                epsilon: p[4],
            },
            FitKind::FechExp => FamilyKind::FechExp { rho_bar: p[0] },
            FitKind::Power => FamilyKind::Power {
                kappa: Curve::constant(p[0]),
                rho: Curve::constant(p[1]),
            },
        };
        make_family(kind)
    }
}

/// Stopping and damping settings of the Levenberg–Marquardt loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub step_tol: f64,
    pub initial_damping: f64,
    pub divergence_streak: usize,
    /// Pass threshold of the held-out residual report.
    pub tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            step_tol: 1e-10,
            initial_damping: 1e-3,
            divergence_streak: 20,
            tol: 1e-7,
        }
    }
}

fn residuals(kind: FitKind, p: &[f64], rows: &[Sample]) -> Option<DVector<f64>> {
    let fam = kind.family(p).ok()?;
    let mut r = DVector::zeros(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let v = fam.eval(row.x, row.s).ok()?;
        r[k] = v - row.xi;
    }
    Some(r)
}

fn jacobian(kind: FitKind, p: &[f64], rows: &[Sample]) -> Option<DMatrix<f64>> {
    let mut j = DMatrix::zeros(rows.len(), p.len());
    let mut q = p.to_vec();
    for c in 0..p.len() {
        let h = 6e-6 * (1.0 + p[c].abs());
        q[c] = p[c] + h;
        let plus = residuals(kind, &q, rows);
        q[c] = p[c] - h;
        let minus = residuals(kind, &q, rows);
        q[c] = p[c];
        match (plus, minus) {
            (Some(a), Some(b)) => j.set_column(c, &((a - b) / (2.0 * h))),
            (Some(a), None) => j.set_column(c, &((a - residuals(kind, p, rows)?) / h)),
            (None, Some(b)) => j.set_column(c, &((residuals(kind, p, rows)? - b) / h)),
            (None, None) => return None,
        }
    }
    Some(j)
}

/// Damped Gauss–Newton (Levenberg–Marquardt with diagonal scaling) least
/// squares of `Σ (ξ_model − ξ_sample)²` over the training rows; the
/// residual report is computed on the held-out fifth of the rows.
///
/// `init` supplies starting values by name; missing names start at 1
/// (0 for offsets).
pub fn fit_family(samples: &SampleSet, kind: FitKind, init: &[(String, f64)], opts: &LmOptions) -> Result<FitResult> {
    let names = kind.param_names();
    let mut p: Vec<f64> = names
        .iter()
        .map(|n| {
            init.iter()
                .find(|(k, _)| k == n)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| FitKind::default_value(n))
        })
        .collect();
    if let Some((k, _)) = init.iter().find(|(k, _)| !names.contains(&k.as_str())) {
        return Err(Error::Config(format!("{} has no parameter `{k}`", kind.name())));
    }
    kind.family(&p).map_err(|e| Error::Constraint(format!("initial parameters: {e}")))?;
    let (train, test) = samples.split();
    if train.len() < p.len() || test.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} rows are too few to fit {} parameters with a held-out split",
            samples.len(),
            p.len()
        )));
    }
    let rows = train.rows();
    let Some(mut r) = residuals(kind, &p, rows) else {
        return Err(Error::Constraint("model undefined at the initial parameters".into()));
    };
    let mut cost = r.norm_squared();
    let mut mu = opts.initial_damping;
    let mut streak = 0;
    let mut converged = false;
    let mut iterations = 0;
    let floor = |row: &Sample, v: f64| v.abs() <= 1e-15 * (1.0 + row.xi.abs());

    while iterations < opts.max_iterations {
        if rows.iter().zip(r.iter()).all(|(row, v)| floor(row, *v)) {
            converged = true;
            break;
        }
        iterations += 1;
        let Some(j) = jacobian(kind, &p, rows) else {
            return Err(Error::Constraint("model undefined next to the current parameters".into()));
        };
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        // Marquardt scaling, solved in Jacobi-scaled coordinates
        let scale = DVector::from_iterator(
            p.len(),
            jtj.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 }),
        );
        let mut a = DMatrix::from_fn(p.len(), p.len(), |i, k| jtj[(i, k)] * scale[i] * scale[k]);
        for c in 0..p.len() {
            a[(c, c)] += mu;
        }
        let rhs = -g.component_mul(&scale);
        let y = match a.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => match a.lu().solve(&rhs) {
                Some(d) => d,
                None => {
                    mu *= 2.0;
                    continue;
                }
            },
        };
        let delta = y.component_mul(&scale);
        let pnorm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let small = delta.norm() < opts.step_tol * (1.0 + pnorm);
        let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
        let trial_r = residuals(kind, &trial, rows);
        let trial_cost = trial_r.as_ref().map(|v| v.norm_squared()).unwrap_or(f64::NAN);
        if trial_cost.is_finite() && trial_cost < cost {
            p = trial;
            r = trial_r.expect("finite cost has residuals");
            cost = trial_cost;
            mu = (mu / 2.0).max(1e-12);
            streak = 0;
        } else {
            if trial_cost.is_finite() && trial_cost > cost * (1.0 + 1e-10) + 1e-300 {
                streak += 1;
            } else if trial_cost.is_finite() {
                streak = 0;
            }
            mu *= 2.0;
            if streak >= opts.divergence_streak {
                return Err(Error::Divergence(format!(
                    "cost rose on {streak} consecutive damped steps at iteration {iterations}"
                )));
            }
        }
        if small {
            converged = true;
            break;
        }
    }

    let fam = kind.family(&p)?;
    let mut sweep = ResidualSweep::new("held-out fit", opts.tol);
    for row in test.rows() {
        sweep.try_record([row.x, 0.0, row.s], || Ok(relative(fam.eval(row.x, row.s)? - row.xi, row.xi)));
    }
    Ok(FitResult {
        kind: kind.name().into(),
        params: named(names, &p),
        residual: sweep.finish()?,
        iterations,
        converged,
    })
}

/// Scales of a subtractive representation recovered from samples, in the
/// gauge `û(first ξ knot) = 0`, `û(last ξ knot) = 1`, which leaves a free
/// factor `â` on `s`: `û(ξ_s(x)) = â·s + ŵ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtractiveFit {
    pub u: ScaleFunction,
    pub w: ScaleFunction,
    pub s_scale: f64,
    pub result: FitResult,
}

impl SubtractiveFit {
    /// `ξ_s(x) = û⁻¹(â·s + ŵ(x))`
    pub fn xi(&self, x: f64, s: f64) -> Result<f64> {
        self.u.invert(self.s_scale * s + self.w.eval(x)?)
    }

    /// The same representation after `û → αû + β`, `ŵ → αŵ + β`, `â → αâ`.
    pub fn regauged(&self, alpha: f64, beta: f64) -> Result<SubtractiveFit> {
        Ok(SubtractiveFit {
            u: self.u.map_values(alpha, beta)?,
            w: self.w.map_values(alpha, beta)?,
            s_scale: alpha * self.s_scale,
            result: self.result.clone(),
        })
    }

    /// The representation with `s` in its original units,
    /// `s = u(ξ) − w(x)` for `u = û/â`, `w = ŵ/â`.
    pub fn representation(&self) -> Result<crate::representations::Representation> {
        if !(self.s_scale > 0.0) {
            return Err(Error::Constraint(format!("fitted s scale {} is not positive", self.s_scale)));
        }
        Ok(crate::representations::Representation::Subtractive {
            u: self.u.map_values(1.0 / self.s_scale, 0.0)?,
            w: self.w.map_values(1.0 / self.s_scale, 0.0)?,
        })
    }
}

/// Knots at evenly spaced quantiles of the distinct values, or at every
/// distinct value when there are at most `count` of them.
fn quantile_knots(values: impl Iterator<Item = f64>, count: usize) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    if v.len() <= count {
        return v;
    }
    let last = (v.len() - 1) as f64;
    let mut k: Vec<f64> = (0..count)
        .map(|i| v[((i as f64) * last / (count - 1) as f64).round() as usize])
        .collect();
    k.dedup();
    k
}

/// Hat-function weights of `t` on `knots`: `(index, weight)` pairs.
fn hat(knots: &[f64], t: f64) -> [(usize, f64); 2] {
    let hi = knots.partition_point(|&k| k <= t).clamp(1, knots.len() - 1);
    let lo = hi - 1;
    let theta = ((t - knots[lo]) / (knots[hi] - knots[lo])).clamp(0.0, 1.0);
    [(lo, 1.0 - theta), (hi, theta)]
}

/// Pool-adjacent-violators projection onto ascending sequences.
fn pava(v: &mut [f64]) {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v.iter() {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().expect("two blocks") = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    let mut i = 0;
    for (m, n) in blocks {
        for slot in &mut v[i..i + n] {
            *slot = m;
        }
        i += n;
    }
}

fn least_squares(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    a.svd(true, true)
        .solve(&b, 1e-13)
        .map_err(|e| Error::InsufficientData(format!("least squares failed: {e}")))
}

struct SubtractiveProblem {
    u_knots: Vec<f64>,
    w_knots: Vec<f64>,
    rows: Vec<Sample>,
}

impl SubtractiveProblem {
    fn u_at(&self, u: &[f64], xi: f64) -> f64 {
        hat(&self.u_knots, xi).iter().map(|&(j, c)| c * u[j]).sum()
    }

    fn w_at(&self, w: &[f64], x: f64) -> f64 {
        hat(&self.w_knots, x).iter().map(|&(j, c)| c * w[j]).sum()
    }

    fn objective(&self, u: &[f64], w: &[f64], a: f64) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let d = self.u_at(u, r.xi) - a * r.s - self.w_at(w, r.x);
                d * d
            })
            .sum()
    }

    /// Equality-constrained joint least squares over interior `û` values,
    /// all `ŵ` values and `â`.
    fn joint(&self) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mu = self.u_knots.len();
        let mw = self.w_knots.len();
        let cols = (mu - 2) + mw + 1;
        let mut m = DMatrix::zeros(self.rows.len(), cols);
        let mut b = DVector::zeros(self.rows.len());
        for (k, r) in self.rows.iter().enumerate() {
            for (j, c) in hat(&self.u_knots, r.xi) {
                if j == mu - 1 {
                    b[k] -= c;
                } else if j > 0 {
                    m[(k, j - 1)] += c;
                }
            }
            for (j, c) in hat(&self.w_knots, r.x) {
                m[(k, mu - 2 + j)] -= c;
            }
            m[(k, cols - 1)] = -r.s;
        }
        let sol = least_squares(m, b)?;
        let mut u = vec![0.0; mu];
        u[mu - 1] = 1.0;
        u[1..mu - 1].copy_from_slice(&sol.as_slice()[..mu - 2]);
        let w = sol.as_slice()[mu - 2..mu - 2 + mw].to_vec();
        Ok((u, w, sol[cols - 1]))
    }

    /// Refits `û` with `ŵ, â` fixed, then projects onto ascending values in `[0, 1]`.
    fn update_u(&self, u: &mut [f64], w: &[f64], a: f64) -> Result<()> {
        let mu = self.u_knots.len();
        if mu > 2 {
            let mut m = DMatrix::zeros(self.rows.len(), mu - 2);
            let mut b = DVector::zeros(self.rows.len());
            for (k, r) in self.rows.iter().enumerate() {
                b[k] = a * r.s + self.w_at(w, r.x);
                for (j, c) in hat(&self.u_knots, r.xi) {
                    if j == mu - 1 {
                        b[k] -= c;
                    } else if j > 0 {
                        m[(k, j - 1)] += c;
                    }
                }
            }
            let sol = least_squares(m, b)?;
            u[1..mu - 1].copy_from_slice(sol.as_slice());
        }
        pava(u);
        u[0] = 0.0;
        u[mu - 1] = 1.0;
        for v in u.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        Ok(())
    }

    /// Refits `ŵ, â` with `û` fixed, then projects `ŵ` onto ascending values.
    fn update_w(&self, u: &[f64], w: &mut [f64], a: &mut f64) -> Result<()> {
        let mw = self.w_knots.len();
        let mut m = DMatrix::zeros(self.rows.len(), mw + 1);
        let mut b = DVector::zeros(self.rows.len());
        for (k, r) in self.rows.iter().enumerate() {
            b[k] = self.u_at(u, r.xi);
            for (j, c) in hat(&self.w_knots, r.x) {
                m[(k, j)] += c;
            }
            m[(k, mw)] = r.s;
        }
        let sol = least_squares(m, b)?;
        w.copy_from_slice(&sol.as_slice()[..mw]);
        *a = sol[mw];
        pava(w);
        Ok(())
    }
}

/// Strictly ascending knot values for a table scale; ties left by the
/// monotone projection are split by a negligible ramp.
fn strict_table(knots: &[f64], values: &[f64]) -> Result<ScaleFunction> {
    let mut v = values.to_vec();
    let span = (v[v.len() - 1] - v[0]).abs().max(1.0);
    for i in 1..v.len() {
        if v[i] <= v[i - 1] {
            v[i] = v[i - 1] + 1e-13 * span;
        }
    }
    ScaleFunction::table(Knots::new(knots.to_vec(), v)?)
}

const SUBTRACTIVE_ROUNDS: usize = 100;
const SUBTRACTIVE_DECREASE: f64 = 1e-12;

/// Piecewise-linear `û` (knots over `ξ`) and `ŵ` (knots over `x`) with
/// `û(ξ_s(x)) ≈ â·s + ŵ(x)`, by alternating monotone least squares started
/// from the joint unconstrained solution.
///
/// The residual report is in `s` units at the samples:
/// `(û(ξ) − ŵ(x))/â − s`.
pub fn fit_scales_subtractive(samples: &SampleSet, knot_count: usize, tol: f64) -> Result<SubtractiveFit> {
    if knot_count < 4 {
        return Err(Error::Param("knot_count must be at least 4".into()));
    }
    if let Some(r) = samples.rows().iter().find(|r| !(r.xi > 0.0)) {
        return Err(Error::NonPositive(format!("xi = {} at x = {}, s = {}", r.xi, r.x, r.s)));
    }
    let problem = SubtractiveProblem {
        u_knots: quantile_knots(samples.rows().iter().map(|r| r.xi), knot_count),
        w_knots: quantile_knots(samples.rows().iter().map(|r| r.x), knot_count),
        rows: samples.rows().to_vec(),
    };
    if problem.u_knots.len() < 2 || problem.w_knots.len() < 2 {
        return Err(Error::InsufficientData("need at least two distinct x and xi values".into()));
    }
    let (mut u, mut w, mut a) = problem.joint()?;
    // the joint solution may violate monotonicity; project before iterating
    problem.update_u(&mut u, &w, a)?;
    problem.update_w(&u, &mut w, &mut a)?;
    let mut obj = problem.objective(&u, &w, a);
    let mut rounds = 0;
    let mut converged = false;
    while rounds < SUBTRACTIVE_ROUNDS {
        rounds += 1;
        problem.update_u(&mut u, &w, a)?;
        problem.update_w(&u, &mut w, &mut a)?;
        let next = problem.objective(&u, &w, a);
        let decrease = obj - next;
        obj = next.min(obj);
        if decrease < SUBTRACTIVE_DECREASE {
            converged = true;
            break;
        }
    }

    let u_scale = strict_table(&problem.u_knots, &u)?;
    let w_scale = strict_table(&problem.w_knots, &w)?;
    let mut sweep = ResidualSweep::new("subtractive fit", tol);
    for r in &problem.rows {
        sweep.try_record([r.x, 0.0, r.s], || {
            if a == 0.0 {
                return Err(Error::Division("fitted s scale is 0".into()));
            }
            Ok((u_scale.eval(r.xi)? - w_scale.eval(r.x)?) / a - r.s)
        });
    }
    let fit = SubtractiveFit {
        u: u_scale,
        w: w_scale,
        s_scale: a,
        result: FitResult {
            kind: "subtractive_scales".into(),
            params: named(&["s_scale", "objective"], &[a, obj]),
            residual: sweep.finish_lenient()?,
            iterations: rounds,
            converged,
        },
    };
    if !converged {
        return Err(Error::NonConvergence {
            rounds,
            best: Box::new(fit),
        });
    }
    Ok(fit)
}
