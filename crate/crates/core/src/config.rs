//! Run configuration and the spec layer that turns TOML tables into
//! scales, curves, families and maps.
//!
//! Every object is a table with a `kind` key and kind-specific parameters.
//! Parameters that take a function accept either a number (a constant) or
//! a nested table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::eta::{EtaMap, GammaMap};
use crate::families::{make_family, FamilyKind, SensitivityFamily};
use crate::grid::Grid;
use crate::representations::Representation;
use crate::scales::{Interval, Knots, ScaleFunction};
use crate::table2d::Table2d;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Text(String),
    List(Vec<f64>),
    Nested(Spec),
}

/// A `kind` plus named parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spec {
    pub kind: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, Value>,
}

impl Spec {
    pub fn new(kind: &str) -> Self {
        Spec {
            kind: kind.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    fn missing(&self, key: &str) -> Error {
        Error::Config(format!("`{}` needs parameter `{key}`", self.kind))
    }

    fn wrong(&self, key: &str, what: &str) -> Error {
        Error::Config(format!("`{}`: parameter `{key}` must be {what}", self.kind))
    }

    pub fn num(&self, key: &str) -> Result<f64> {
        match self.params.get(key) {
            Some(Value::Number(v)) => Ok(*v),
            Some(_) => Err(self.wrong(key, "a number")),
            None => Err(self.missing(key)),
        }
    }

    pub fn num_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(_) => self.num(key),
        }
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        match self.params.get(key) {
            Some(Value::Text(v)) => Ok(v),
            Some(_) => Err(self.wrong(key, "a string")),
            None => Err(self.missing(key)),
        }
    }

    pub fn list(&self, key: &str) -> Result<&[f64]> {
        match self.params.get(key) {
            Some(Value::List(v)) => Ok(v),
            Some(_) => Err(self.wrong(key, "a list of numbers")),
            None => Err(self.missing(key)),
        }
    }

    pub fn nested(&self, key: &str) -> Result<&Spec> {
        match self.params.get(key) {
            Some(Value::Nested(v)) => Ok(v),
            Some(_) => Err(self.wrong(key, "a table")),
            None => Err(self.missing(key)),
        }
    }

    fn interval(&self, key: &str) -> Result<Option<Interval>> {
        if !self.params.contains_key(key) {
            return Ok(None);
        }
        match self.list(key)? {
            [lo, hi] => Interval::new(*lo, *hi).map(Some),
            _ => Err(self.wrong(key, "a [lo, hi] pair")),
        }
    }

    /// The parameter as a scale; a number `c` is not a scale.
    pub fn scale(&self, key: &str, base: &Path) -> Result<ScaleFunction> {
        self.nested(key)?.to_scale(base)
    }

    /// The parameter as a curve; a number is a constant.
    pub fn curve(&self, key: &str, base: &Path) -> Result<Curve> {
        match self.params.get(key) {
            Some(Value::Number(v)) => Ok(Curve::constant(*v)),
            Some(Value::Nested(s)) => s.to_curve(base),
            Some(_) => Err(self.wrong(key, "a number or a table")),
            None => Err(self.missing(key)),
        }
    }

    fn knots(&self, base: &Path) -> Result<Knots> {
        if self.params.contains_key("csv") {
            let path = resolve(base, self.text("csv")?);
            return Knots::read_csv(std::fs::File::open(&path)?, ["x", "y"]);
        }
        Knots::new(self.list("xs")?.to_vec(), self.list("ys")?.to_vec())
    }

    fn table2d(&self, base: &Path, header: [&str; 3]) -> Result<Table2d> {
        let path = resolve(base, self.text("csv")?);
        Table2d::read_csv(std::fs::File::open(&path)?, header)
    }

    /// Kinds: `identity`, `affine` (a, b), `log` (a, b), `power` (a, p, b),
    /// `exp` (a, k, b), `table` (xs, ys or csv), `logistic` (half_width, n).
    /// Any kind takes an optional `domain = [lo, hi]`.
    pub fn to_scale(&self, base: &Path) -> Result<ScaleFunction> {
        let scale = match self.kind.as_str() {
            "identity" => ScaleFunction::identity(),
            "affine" => ScaleFunction::affine(self.num_or("a", 1.0)?, self.num_or("b", 0.0)?)?,
            "log" => ScaleFunction::log(self.num_or("a", 1.0)?, self.num_or("b", 0.0)?)?,
            "power" => ScaleFunction::power(self.num_or("a", 1.0)?, self.num("p")?, self.num_or("b", 0.0)?)?,
            "exp" => ScaleFunction::exp(self.num_or("a", 1.0)?, self.num_or("k", 1.0)?, self.num_or("b", 0.0)?)?,
            "table" => ScaleFunction::table(self.knots(base)?)?,
            "logistic" => {
                let n = self.num_or("n", 2401.0)?;
                if n.fract() != 0.0 || n < 3.0 {
                    return Err(self.wrong("n", "an integer of at least 3"));
                }
                ScaleFunction::logistic_table(self.num_or("half_width", 12.0)?, n as usize)?
            }
            other => return Err(Error::Config(format!("unknown scale kind `{other}`"))),
        };
        match self.interval("domain")? {
            Some(d) => scale.restricted(d),
            None => Ok(scale),
        }
    }

    /// Scale kinds plus `constant` (value), `sine` (amplitude, frequency,
    /// center), `inverse` (of) and `table` with unrestricted values.
    pub fn to_curve(&self, base: &Path) -> Result<Curve> {
        Ok(match self.kind.as_str() {
            "constant" => Curve::constant(self.num("value")?),
            "sine" => Curve::Sine {
                amplitude: self.num("amplitude")?,
                frequency: self.num("frequency")?,
                center: self.num_or("center", 0.0)?,
            },
            "inverse" => Curve::InverseOf {
                scale: self.scale("of", base)?,
            },
            "table" => Curve::table(self.knots(base)?),
            _ => Curve::scale(self.to_scale(base)?),
        })
    }

    /// Kinds follow the family catalog in snake case; `tabulated` reads a
    /// `x,s,xi` table from `csv`. Optional `stimulus` and `s_domain`
    /// intervals restrict the rectangle.
    pub fn to_family(&self, base: &Path) -> Result<SensitivityFamily> {
        let c = |k: &str| self.curve(k, base);
        let n = |k: &str| self.num(k);
        let kind = match self.kind.as_str() {
            "weber" => FamilyKind::Weber { k: c("k")? },
            "power" => FamilyKind::Power {
                kappa: c("kappa")?,
                rho: c("rho")?,
            },
            "phi_form" => FamilyKind::PhiForm {
                phi: c("phi")?,
                f: c("f")?,
                g: c("g")?,
            },
            "affine_a" => FamilyKind::AffineA {
                c: n("c")?,
                mu: n("mu")?,
                d: n("d")?,
            },
            "affine_b" => FamilyKind::AffineB { c: n("c")?, d: n("d")? },
            "affine_c" => FamilyKind::AffineC,
            "parallel_log" => FamilyKind::ParallelLog {
                alpha: n("alpha")?,
                beta: n("beta")?,
                gamma: n("gamma")?,
                f: c("f")?,
            },
            "parallel_power" => FamilyKind::ParallelPower {
                alpha: n("alpha")?,
                rho: n("rho")?,
                gamma: n("gamma")?,
                f: c("f")?,
            },
            "balanced_parallel" => FamilyKind::BalancedParallel { nu: c("nu")? },
            "sub_case_i" => FamilyKind::SubCaseI {
                a: n("a")?,
                b: n("b")?,
                rho: n("rho")?,
                r: n("r")?,
            },
            "sub_case_ii" => FamilyKind::SubCaseII {
                a: n("a")?,
                c: n("c")?,
                rho: n("rho")?,
                r: n("r")?,
                epsilon: n("epsilon")?,
            },
            "fech_exp" => FamilyKind::FechExp { rho_bar: n("rho_bar")? },
            "power_f" => FamilyKind::PowerF {
                phi: c("phi")?,
                big_f: c("big_f")?,
                h: self.scale("h", base)?,
            },
            "shift_form" => FamilyKind::ShiftForm {
                f: c("f")?,
                big_f: c("big_f")?,
                theta: n("theta")?,
            },
            "homogeneous" => FamilyKind::Homogeneous {
                phi: c("phi")?,
                c: n("c")?,
            },
            "tabulated" => FamilyKind::Tabulated {
                table: self.table2d(base, ["x", "s", "xi"])?,
            },
            "represented" => FamilyKind::Represented {
                rep: self.nested("rep")?.to_representation(base)?,
            },
            other => return Err(Error::Config(format!("unknown family kind `{other}`"))),
        };
        let family = make_family(kind)?;
        let stimulus = self.interval("stimulus")?.unwrap_or(family.stimulus());
        let s_domain = self.interval("s_domain")?.unwrap_or(family.s_domain());
        Ok(family.with_domain(stimulus, s_domain))
    }

    /// Kinds: `power_scale` (theta), `conjugate` (h), `identity_in_s`,
    /// `constant_per_s` (nu), `affine_shift` (delta, epsilon), `log_blend`
    /// (kappa, beta, delta), `additive_log` (delta, kappa), `tabulated`
    /// (csv with `lambda,s,value`). Optional `s_domain`.
    pub fn to_eta(&self, base: &Path) -> Result<EtaMap> {
        let eta = match self.kind.as_str() {
            "power_scale" => EtaMap::power_scale(self.num("theta")?)?,
            "conjugate" => EtaMap::conjugate(self.scale("h", base)?),
            "identity_in_s" => EtaMap::identity_in_s(),
            "constant_per_s" => EtaMap::constant_per_s(self.curve("nu", base)?),
            "affine_shift" => EtaMap::affine_shift(self.num("delta")?, self.num("epsilon")?)?,
            "log_blend" => EtaMap::log_blend(self.num("kappa")?, self.num("beta")?, self.num("delta")?)?,
            "additive_log" => EtaMap::additive_log(self.num("delta")?, self.num("kappa")?)?,
            "tabulated" => EtaMap::tabulated(self.table2d(base, ["lambda", "s", "value"])?)?,
            other => return Err(Error::Config(format!("unknown eta kind `{other}`"))),
        };
        Ok(match self.interval("s_domain")? {
            Some(d) => eta.with_s_domain(d),
            None => eta,
        })
    }

    /// Kinds: `power_of_lambda` (r), `power_phi` (phi), `lambda_only`,
    /// `ratio_form` (kappa, h), `tabulated` (csv with `lambda,s,value`).
    pub fn to_gamma(&self, base: &Path) -> Result<GammaMap> {
        Ok(match self.kind.as_str() {
            "power_of_lambda" => GammaMap::PowerOfLambda { r: self.num("r")? },
            "power_phi" => GammaMap::PowerPhi {
                phi: self.curve("phi", base)?,
            },
            "lambda_only" => GammaMap::LambdaOnly,
            "ratio_form" => GammaMap::RatioForm {
                kappa: self.curve("kappa", base)?,
                h: self.curve("h", base)?,
            },
            "tabulated" => GammaMap::Tabulated {
                table: self.table2d(base, ["lambda", "s", "value"])?,
            },
            other => return Err(Error::Config(format!("unknown gamma kind `{other}`"))),
        })
    }

    /// Kinds: `fechnerian` (u), `subtractive` (u, w), `gain_control`
    /// (u, sigma), `parallel` (u, v), `balanced_parallel` (nu).
    pub fn to_representation(&self, base: &Path) -> Result<Representation> {
        let rep = match self.kind.as_str() {
            "fechnerian" => Representation::Fechnerian {
                u: self.scale("u", base)?,
            },
            "subtractive" => Representation::Subtractive {
                u: self.scale("u", base)?,
                w: self.scale("w", base)?,
            },
            "gain_control" => Representation::GainControl {
                u: self.scale("u", base)?,
                sigma: self.curve("sigma", base)?,
            },
            "parallel" => Representation::Parallel {
                u: self.scale("u", base)?,
                v: self.scale("v", base)?,
            },
            "balanced_parallel" => Representation::BalancedParallel {
                nu: self.scale("nu", base)?,
            },
            other => return Err(Error::Config(format!("unknown representation kind `{other}`"))),
        };
        rep.validate()?;
        Ok(rep)
    }
}

fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Check,
    Fit,
    Classify,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Check => "check",
            Command::Fit => "fit",
            Command::Classify => "classify",
            Command::Report => "report",
        }
    }
}

/// Interval bounds and sample counts of `I`, `J`, `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_stimulus")]
    pub stimulus: [f64; 2],
    #[serde(default = "default_lambda")]
    pub lambda: [f64; 2],
    #[serde(default = "default_s")]
    pub s: [f64; 2],
    #[serde(default = "default_counts")]
    pub counts: [usize; 3],
    /// Interval that `λx` must stay in; defaults to `stimulus`.
    #[serde(default)]
    pub closure: Option<[f64; 2]>,
}

fn default_stimulus() -> [f64; 2] {
    [0.5, 4.0]
}
fn default_lambda() -> [f64; 2] {
    [0.5, 2.0]
}
fn default_s() -> [f64; 2] {
    [0.1, 1.0]
}
fn default_counts() -> [usize; 3] {
    [32, 32, 32]
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            stimulus: default_stimulus(),
            lambda: default_lambda(),
            s: default_s(),
            counts: default_counts(),
            closure: None,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let intervals = [("stimulus", self.stimulus), ("lambda", self.lambda), ("s", self.s)];
        for (name, [lo, hi]) in intervals.into_iter().chain(self.closure.map(|c| ("closure", c))) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!("grid.{name} needs finite bounds with lo < hi")));
            }
        }
        if self.counts.iter().any(|&n| n < 4) {
            return Err(Error::Config("grid sample counts must be at least 4".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Grid> {
        self.validate()?;
        let iv = |[lo, hi]: [f64; 2]| Interval::new(lo, hi);
        let closure = iv(self.closure.unwrap_or(self.stimulus))?;
        Grid::uniform_with_stimulus(closure, iv(self.stimulus)?, iv(self.lambda)?, iv(self.s)?, self.counts)
    }
}

/// Settings of the `fit` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    /// `family`, `power_per_s`, `subtractive` or `phi_form`.
    pub method: String,
    /// Family kind for `family` fits.
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub init: BTreeMap<String, f64>,
    #[serde(default)]
    pub knot_count: Option<usize>,
    #[serde(default)]
    pub s_star: Option<f64>,
}

/// Settings of the `simulate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    /// `family` (writes `x,s,xi`) or `psychometric` (writes `a,x,p`).
    #[serde(default = "default_source")]
    pub source: String,
    #[serde(default)]
    pub noise_sigma: Option<f64>,
}

fn default_source() -> String {
    "family".into()
}

/// A parsed TOML run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub family: Option<Spec>,
    #[serde(default)]
    pub eta: Option<Spec>,
    #[serde(default)]
    pub gamma: Option<Spec>,
    #[serde(default)]
    pub representation: Option<Spec>,
    /// Link `F` of a psychometric family.
    #[serde(default)]
    pub link: Option<Spec>,
    #[serde(default)]
    pub checks: Vec<Spec>,
    #[serde(default)]
    pub fit: Option<FitSpec>,
    #[serde(default)]
    pub simulate: Option<SimulateSpec>,
    /// Sample CSV or prior report, relative to the config file.
    #[serde(default)]
    pub input: Option<String>,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base: PathBuf,
}

fn default_tolerance() -> f64 {
    1e-8
}
fn default_seed() -> u64 {
    42
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            tolerance: default_tolerance(),
            seed: default_seed(),
            grid: GridSpec::default(),
            family: None,
            eta: None,
            gamma: None,
            representation: None,
            link: None,
            checks: Vec::new(),
            fit: None,
            simulate: None,
            input: None,
            base: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        self.grid.validate()
    }

    pub fn input_path(&self) -> Option<PathBuf> {
        self.input.as_deref().map(|p| resolve(&self.base, p))
    }

    pub fn family(&self) -> Result<SensitivityFamily> {
        self.family
            .as_ref()
            .ok_or_else(|| Error::Config("missing [family]".into()))?
            .to_family(&self.base)
    }

    pub fn eta(&self) -> Result<EtaMap> {
        self.eta
            .as_ref()
            .ok_or_else(|| Error::Config("missing [eta]".into()))?
            .to_eta(&self.base)
    }

    pub fn gamma(&self) -> Result<GammaMap> {
        self.gamma
            .as_ref()
            .ok_or_else(|| Error::Config("missing [gamma]".into()))?
            .to_gamma(&self.base)
    }

    pub fn representation(&self) -> Result<Representation> {
        self.representation
            .as_ref()
            .ok_or_else(|| Error::Config("missing [representation]".into()))?
            .to_representation(&self.base)
    }

    pub fn link(&self) -> Result<ScaleFunction> {
        match &self.link {
            Some(spec) => spec.to_scale(&self.base),
            None => ScaleFunction::logistic_table(12.0, 2401),
        }
    }
}
