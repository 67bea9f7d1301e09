//! Command-line orchestration: `simulate`, `check`, `fit`, `classify` and
//! `report`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::config::{Command, RunConfig, Spec};
use crate::error::{Error, Result};
use crate::eta::{check_mult_translational, derive_gamma, extract_h, phi_consistency};
use crate::fitting::{
    extract_phi_form, fit_family, fit_power_per_s, fit_scales_subtractive, FitKind, LmOptions, SampleSet,
};
use crate::grid::Grid;
use crate::laws::{classify_laws, iverson_residual, power_law_residual, shift_invariance_residual, weber_residual};
use crate::lundberg::random_admissible;
use crate::report::ResidualReport;
use crate::representations::{check_family_properties, decompose_balanced_parallel, make_psychometric, representation_residual};
use crate::scales::{linspace, Interval};

const TOOL: &str = "iverson";
const REPORT_FILE: &str = "report.json";

fn parse_counts(text: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected nx,nl,ns".into());
    }
    let mut out = [0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|e| format!("bad count `{p}`: {e}"))?;
    }
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "iverson", version, about = "Similarity-law checks, representations and fitting for sensitivity functions")]
pub struct Cli {
    /// Overrides the `command` key of the config.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for the report and any CSV artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample counts `nx,nl,ns`.
    #[arg(long, value_parser = parse_counts)]
    pub grid: Option<[usize; 3]>,
    /// Sample CSV for `fit`, or a prior report for `report`.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

/// One gating residual report of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub report: ResidualReport,
}

/// The structured report written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: RunConfig,
    pub checks: Vec<CheckEntry>,
    pub details: BTreeMap<String, Json>,
    pub artifacts: Vec<String>,
    pub pass: bool,
}

impl RunReport {
    fn new(command: Command, config: &RunConfig) -> Self {
        RunReport {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            config: config.clone(),
            checks: Vec::new(),
            details: BTreeMap::new(),
            artifacts: Vec::new(),
            pass: true,
        }
    }

    fn check(&mut self, name: impl Into<String>, report: ResidualReport) {
        self.checks.push(CheckEntry {
            name: name.into(),
            report,
        });
    }

    fn detail(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        let v = serde_json::to_value(value).map_err(|e| Error::Config(format!("serializing {key}: {e}")))?;
        self.details.insert(key.into(), v);
        Ok(())
    }

    fn finish(mut self) -> Self {
        self.pass = self.checks.iter().all(|c| c.report.pass);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::Config(format!("serializing report: {e}")))
    }

    /// Aligned text table of the gating checks.
    pub fn render(&self) -> String {
        let header = ["check", "pass", "max_abs", "mean_abs", "evaluated", "excluded", "tolerance"];
        let rows: Vec<[String; 7]> = self
            .checks
            .iter()
            .map(|c| {
                let r = &c.report;
                [
                    c.name.clone(),
                    if r.pass { "yes" } else { "NO" }.into(),
                    format!("{:.3e}", r.max_abs),
                    format!("{:.3e}", r.mean_abs),
                    r.evaluated.to_string(),
                    r.excluded.to_string(),
                    format!("{:.1e}", r.tolerance),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = format!("{} {} {}\n", self.tool, self.version, self.command.name());
        out += &line(&header.map(String::from));
        out.push('\n');
        out += &widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ");
        out.push('\n');
        for row in &rows {
            out += &line(row);
            out.push('\n');
        }
        if let Some(Json::Array(labels)) = self.details.get("classification").and_then(|c| c.get("labels")) {
            let names: Vec<String> = labels
                .iter()
                .map(|l| match (l.get("label").and_then(Json::as_str), l.get("theta").and_then(Json::as_f64)) {
                    (Some(name), Some(theta)) => format!("{name}({theta:.6})"),
                    (Some(name), None) => name.to_string(),
                    _ => "?".into(),
                })
                .collect();
            out += &format!("labels: {}\n", names.join(", "));
        }
        out += &format!("overall: {}\n", if self.pass { "pass" } else { "FAIL" });
        out
    }
}

/// Outcome of a run: the report plus the exit status it implies.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub rendered: Option<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.pass {
            0
        } else {
            1
        }
    }
}

/// Applies CLI overrides to the config and resolves the command.
pub fn resolve_config(cli: &Cli) -> Result<(Command, RunConfig)> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.tol {
        cfg.tolerance = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(g) = cli.grid {
        cfg.grid.counts = g;
    }
    if let Some(p) = &cli.input {
        // CLI paths are relative to the working directory, not the config
        let abs = std::path::absolute(p)?;
        cfg.input = Some(abs.to_string_lossy().into_owned());
    }
    let command = cli
        .command
        .or(cfg.command)
        .ok_or_else(|| Error::Config("no command given on the command line or in the config".into()))?;
    cfg.command = Some(command);
    cfg.validate()?;
    Ok((command, cfg))
}

/// Runs `command`, writing `report.json` and any artifacts into `out`.
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out)?;
    let (report, rendered) = match command {
        Command::Report => {
            let path = cfg
                .input_path()
                .ok_or_else(|| Error::Config("report needs --input <report.json>".into()))?;
            let text = std::fs::read_to_string(&path)?;
            let prior: RunReport =
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let text = prior.render();
            std::fs::write(out.join("report.txt"), &text)?;
            return Ok(RunOutcome {
                report: prior,
                rendered: Some(text),
            });
        }
        Command::Simulate => (simulate(cfg, out).map_err(|e| e.within("simulate"))?, None),
        Command::Check => (check(cfg).map_err(|e| e.within("check"))?, None),
        Command::Fit => (fit(cfg, out).map_err(|e| e.within("fit"))?, None),
        Command::Classify => (classify(cfg).map_err(|e| e.within("classify"))?, None),
    };
    let report = report.finish();
    std::fs::write(out.join(REPORT_FILE), report.to_json()?)?;
    Ok(RunOutcome { report, rendered })
}

/// Parses arguments, runs, prints, and returns the process exit code
/// (0 all checks pass, 1 some check fails, 2 error).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve_config(&cli).and_then(|(command, cfg)| run(command, &cfg, &cli.out));
    match result {
        Ok(outcome) => {
            match &outcome.rendered {
                Some(text) => print!("{text}"),
                None => print!("{}", outcome.report.render()),
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn samples(cfg: &RunConfig, grid: &Grid) -> Result<SampleSet> {
    match cfg.input_path() {
        Some(path) => SampleSet::load(&path),
        None => SampleSet::from_family(&cfg.family()?, grid.x(), grid.s()),
    }
}

fn write_artifact(report: &mut RunReport, out: &Path, name: &str, write: impl FnOnce(std::fs::File) -> Result<()>) -> Result<()> {
    write(std::fs::File::create(out.join(name))?)?;
    report.artifacts.push(name.into());
    Ok(())
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    let grid = cfg.grid.build()?;
    let spec = cfg.simulate.clone().unwrap_or(crate::config::SimulateSpec {
        source: "family".into(),
        noise_sigma: None,
    });
    let mut report = RunReport::new(Command::Simulate, cfg);
    match spec.source.as_str() {
        "family" => {
            let mut data = SampleSet::from_family(&cfg.family()?, grid.x(), grid.s())?;
            if let Some(sigma) = spec.noise_sigma {
                data = data.with_noise(sigma, cfg.seed)?;
            }
            report.detail("rows", data.len())?;
            write_artifact(&mut report, out, "samples.csv", |f| data.write_csv(f))?;
        }
        "psychometric" => {
            let stimulus = Interval::new(cfg.grid.stimulus[0], cfg.grid.stimulus[1])?;
            let pf = make_psychometric(cfg.representation()?, cfg.link()?, stimulus)?;
            let mut rows = 0usize;
            write_artifact(&mut report, out, "psychometric.csv", |f| {
                let mut w = csv::Writer::from_writer(f);
                w.write_record(["a", "x", "p"])?;
                for &a in grid.x() {
                    for &x in grid.x() {
                        if let Ok(p) = pf.p(a, x) {
                            w.write_record([a.to_string(), x.to_string(), p.to_string()])?;
                            rows += 1;
                        }
                    }
                }
                w.flush()?;
                Ok(())
            })?;
            report.detail("rows", rows)?;
        }
        other => return Err(Error::Config(format!("unknown simulate source `{other}`"))),
    }
    Ok(report)
}

fn default_checks(cfg: &RunConfig) -> Vec<Spec> {
    let mut v = Vec::new();
    if cfg.family.is_some() && (cfg.eta.is_some() || cfg.gamma.is_some()) {
        v.push(Spec::new("iverson"));
    }
    if cfg.eta.is_some() && cfg.family.is_none() {
        v.push(Spec::new("translational"));
    }
    if cfg.family.is_some() && cfg.representation.is_some() {
        v.push(Spec::new("representation"));
    }
    if v.is_empty() && cfg.family.is_some() {
        v.push(Spec::new("weber"));
    }
    v
}

fn check(cfg: &RunConfig) -> Result<RunReport> {
    let grid = cfg.grid.build()?;
    let tol = cfg.tolerance;
    let base = &cfg.base;
    let mut report = RunReport::new(Command::Check, cfg);
    let checks = if cfg.checks.is_empty() {
        default_checks(cfg)
    } else {
        cfg.checks.clone()
    };
    if checks.is_empty() {
        return Err(Error::Config("nothing to check: give [[checks]] or family/eta specs".into()));
    }
    for spec in &checks {
        let name = spec.kind.as_str();
        let run = |report: &mut RunReport| -> Result<()> {
            match name {
                "iverson" => {
                    let family = cfg.family()?;
                    let (gamma, eta) = match (&cfg.gamma, &cfg.eta) {
                        (Some(_), Some(_)) => (cfg.gamma()?, cfg.eta()?),
                        _ => family
                            .canonical_companions()
                            .ok_or_else(|| Error::Config("family has no canonical companions; give [gamma] and [eta]".into()))?,
                    };
                    report.check("iverson", iverson_residual(&family, &gamma, &eta, &grid, tol)?);
                }
                "weber" => report.check("weber", weber_residual(&cfg.family()?, &grid, tol)?),
                "power_law" => {
                    let phi = spec.curve("phi", base)?;
                    report.check("power_law", power_law_residual(&cfg.family()?, &phi, &grid, tol)?);
                }
                "shift" => {
                    let theta = spec.num("theta")?;
                    report.check("shift", shift_invariance_residual(&cfg.family()?, theta, &grid, tol)?);
                }
                "translational" => {
                    let r = check_mult_translational(&cfg.eta()?, &grid, tol)?;
                    report.check("translational.cocycle", r.cocycle);
                    report.check("translational.unit_boundary", r.unit_boundary);
                    report.check("translational.zero_boundary", r.zero_boundary);
                }
                "extract_h" => {
                    let ex = extract_h(&cfg.eta()?, spec.num_or("s_star", 1.0)?, &grid, tol)?;
                    report.check("extract_h.reconstruction", ex.reconstruction);
                    report.detail("h", ex.h)?;
                }
                "derive_gamma" => {
                    let h = spec.scale("h", base)?;
                    let (derived, r) = derive_gamma(&cfg.gamma()?, &h, &grid, tol)?;
                    report.check("derive_gamma", r);
                    report.detail("derived_gamma", derived)?;
                }
                "phi_consistency" => {
                    let phi = spec.curve("phi", base)?;
                    report.check("phi_consistency", phi_consistency(&phi, &cfg.eta()?, &grid, tol)?);
                }
                "representation" => {
                    let r = representation_residual(&cfg.family()?, &cfg.representation()?, &grid, tol)?;
                    report.check("representation", r);
                }
                "properties" => {
                    let stimulus = Interval::new(cfg.grid.stimulus[0], cfg.grid.stimulus[1])?;
                    let pf = make_psychometric(cfg.representation()?, cfg.link()?, stimulus)?;
                    let levels = match spec.params.get("levels") {
                        Some(_) => spec.list("levels")?.to_vec(),
                        None => linspace(0.1, 0.9, 9),
                    };
                    let p = check_family_properties(&pf, grid.x(), &levels, tol)?;
                    report.check("properties.anchored", p.anchored);
                    report.check("properties.parallel", p.parallel);
                    report.check("properties.balanced", p.balanced);
                }
                "balanced" => {
                    let d = decompose_balanced_parallel(&cfg.family()?, &grid, tol)?;
                    report.check("balanced.x_independence", d.x_independence);
                    report.check("balanced.antisymmetry", d.antisymmetry);
                    report.detail("nu_hat", d.nu)?;
                }
                "lundberg" => {
                    use rand::SeedableRng;
                    let case = spec.num("case")?;
                    if !(1.0..=5.0).contains(&case) || case.fract() != 0.0 {
                        return Err(Error::Config("lundberg case must be 1..5".into()));
                    }
                    let draws = spec.num_or("draws", 3.0)? as usize;
                    let n = spec.num_or("points", 30.0)? as usize;
                    let axis = linspace(0.0, 1.0, n);
                    let unit = Interval::new(0.0, 1.0)?;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
                    let mut drawn = Vec::new();
                    for k in 0..draws {
                        let params = random_admissible(case as u8, &mut rng)?;
                        let sol = crate::lundberg::make_lundberg_case(params.clone(), unit, unit)?;
                        report.check(format!("lundberg.{}.{k}", case as u8), sol.residual(&axis, &axis, tol)?);
                        drawn.push(params);
                    }
                    report.detail("lundberg_draws", drawn)?;
                }
                other => return Err(Error::Config(format!("unknown check `{other}`"))),
            }
            Ok(())
        };
        run(&mut report).map_err(|e| e.within(name))?;
    }
    Ok(report)
}

fn fit(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    let spec = cfg.fit.clone().ok_or_else(|| Error::Config("missing [fit]".into()))?;
    let grid = cfg.grid.build()?;
    let tol = cfg.tolerance;
    let mut report = RunReport::new(Command::Fit, cfg);
    match spec.method.as_str() {
        "family" => {
            let kind = FitKind::parse(spec.family.as_deref().ok_or_else(|| Error::Config("fit.family is required".into()))?)?;
            let init: Vec<(String, f64)> = spec.init.iter().map(|(k, v)| (k.clone(), *v)).collect();
            let opts = LmOptions { tol, ..LmOptions::default() };
            let result = fit_family(&samples(cfg, &grid)?, kind, &init, &opts)?;
            report.check(format!("fit.{}", kind.name()), result.residual.clone());
            report.detail("fit", result)?;
        }
        "power_per_s" => {
            let fit = fit_power_per_s(&samples(cfg, &grid)?, tol)?;
            report.check("fit.power_per_s", fit.result.residual.clone());
            report.detail("fit", fit)?;
        }
        "subtractive" => {
            let knots = spec.knot_count.unwrap_or(8);
            let (fit, converged) = match fit_scales_subtractive(&samples(cfg, &grid)?, knots, tol) {
                Ok(f) => (f, true),
                Err(Error::NonConvergence { best, .. }) => (*best, false),
                Err(e) => return Err(e),
            };
            let mut r = fit.result.residual.clone();
            r.pass &= converged;
            report.check("fit.subtractive", r);
            write_artifact(&mut report, out, "u.csv", |f| fit.u.write_csv(f))?;
            write_artifact(&mut report, out, "w.csv", |f| fit.w.write_csv(f))?;
            report.detail("fit", fit.result)?;
            report.detail("s_scale", fit.s_scale)?;
        }
        "phi_form" => {
            let s_star = spec.s_star.unwrap_or(1.0);
            let ex = extract_phi_form(&cfg.family()?, &cfg.eta()?, &cfg.gamma()?, s_star, &grid, tol)?;
            report.check("fit.phi_form", ex.residual.clone());
            write_artifact(&mut report, out, "phi.csv", |f| ex.phi.write_csv(f, ["x", "y"]))?;
            write_artifact(&mut report, out, "f.csv", |f| ex.f.write_csv(f))?;
            write_artifact(&mut report, out, "g.csv", |f| ex.g.write_csv(f, ["x", "y"]))?;
        }
        other => return Err(Error::Config(format!("unknown fit method `{other}`"))),
    }
    Ok(report)
}

fn classify(cfg: &RunConfig) -> Result<RunReport> {
    let grid = cfg.grid.build()?;
    let c = classify_laws(&cfg.family()?, &grid, cfg.tolerance)?;
    let mut report = RunReport::new(Command::Classify, cfg);
    // the evidence reports are informational; a label set is always a result
    report.detail("classification", c)?;
    Ok(report)
}
