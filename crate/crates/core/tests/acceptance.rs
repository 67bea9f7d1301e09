//! Acceptance suite: one line per criterion, exit status 1 if any fails.

use std::path::Path;
use std::process::Command;

use iverson::eta::{check_mult_translational, compare_eta, conjugate_eta, derive_gamma, extract_h, phi_consistency};
use iverson::families::FamilyKind;
use iverson::fitting::{fit_family, fit_power_per_s, FitKind, LmOptions};
use iverson::lundberg::{make_lundberg_case, random_admissible};
use iverson::representations::{decompose_balanced_parallel, representation_residual};
use iverson::scales::{geomspace, linspace};
use iverson::{
    classify_laws, iverson_residual, make_family, make_psychometric, Curve, EtaMap, GammaMap, Grid, Interval,
    LawLabel, Representation, SampleSet, ScaleFunction, SensitivityFamily,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ok_if(pass: bool, detail: String) -> Outcome {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: iverson::Error) -> String {
    format!("error: {e}")
}

fn standard_grid() -> Grid {
    Grid::uniform(
        Interval::new(0.5, 4.0).unwrap(),
        Interval::new(0.5, 2.0).unwrap(),
        Interval::new(0.1, 1.0).unwrap(),
        [32, 32, 32],
    )
    .unwrap()
}

fn closed_forms() -> Outcome {
    const TOL: f64 = 1e-10;
    let sa = |s: ScaleFunction| Curve::scale(s);
    let families = vec![
        ("weber", SensitivityFamily::weber(ScaleFunction::exp(1.0, 1.0, 0.0).unwrap())),
        ("fech_exp", SensitivityFamily::fech_exp(1.0).unwrap()),
        ("sub_case_i", SensitivityFamily::sub_case_i(1.0, 1.0, 1.0, 1.0).unwrap()),
        ("sub_case_ii", SensitivityFamily::sub_case_ii(1.0, 1.0, 1.0, 1.0, 0.0).unwrap()),
        (
            "homogeneous",
            SensitivityFamily::homogeneous(ScaleFunction::affine(1.0, 1.0).unwrap(), 1.0).unwrap(),
        ),
        (
            "power_f",
            make_family(FamilyKind::PowerF {
                phi: Curve::constant(1.5),
                big_f: sa(ScaleFunction::affine(1.0, 1.0).unwrap()),
                h: ScaleFunction::power(1.0, 2.0, 0.0).unwrap(),
            })
            .unwrap(),
        ),
        (
            "shift_form",
            make_family(FamilyKind::ShiftForm {
                f: Curve::identity(),
                big_f: sa(ScaleFunction::exp(1.0, 0.3, 1.0).unwrap()),
                theta: 0.5,
            })
            .unwrap(),
        ),
    ];
    let g = standard_grid();
    let mut worst = 0.0f64;
    for (name, fam) in families {
        let (gamma, eta) = fam.canonical_companions().ok_or(format!("{name}: no companions"))?;
        let r = iverson_residual(&fam, &gamma, &eta, &g, TOL).map_err(err)?;
        if !r.pass {
            return Err(format!("{name}: max {:.3e} > {TOL:e}", r.max_abs));
        }
        worst = worst.max(r.max_abs);
    }
    Ok(format!("7 families, max {worst:.2e} <= {TOL:e}"))
}

fn translational() -> Outcome {
    let g = Grid::with_stimulus(Interval::non_negative(), vec![1.0], linspace(0.5, 2.0, 16), linspace(0.0, 1.0, 11))
        .unwrap();
    let mut closing = vec![EtaMap::identity_in_s()];
    for theta in [-2.0, -1.0, 0.5, 1.0, 2.0] {
        closing.push(EtaMap::power_scale(theta).unwrap());
    }
    closing.push(EtaMap::conjugate(ScaleFunction::power(1.0, 2.0, 0.0).unwrap()));
    closing.push(EtaMap::conjugate(ScaleFunction::exp(1.0, 1.0, -1.0).unwrap()));
    closing.push(EtaMap::conjugate(ScaleFunction::affine(2.0, 0.0).unwrap()));
    for eta in &closing {
        let r = check_mult_translational(eta, &g, 1e-10).map_err(err)?;
        let boundary = r.unit_boundary.max_abs.max(r.zero_boundary.max_abs);
        if !r.pass || boundary > 1e-12 {
            return Err(format!("{:?}: cocycle {:.2e}, boundary {boundary:.2e}", eta.kind(), r.cocycle.max_abs));
        }
    }
    for (delta, epsilon) in [(1.0, 0.5), (2.0, -0.3), (0.5, 1.0)] {
        let eta = EtaMap::affine_shift(delta, epsilon).unwrap();
        let r = check_mult_translational(&eta, &g, 1e-10).map_err(err)?;
        let at = eta.eval(2.0, 0.0).map_err(err)?.abs();
        if r.pass || at <= 0.1 * epsilon.abs() {
            return Err(format!("affine_shift({delta}, {epsilon}) not rejected"));
        }
    }
    for (delta, epsilon) in [(1.0, 0.0), (0.0, 0.5)] {
        let r = check_mult_translational(&EtaMap::affine_shift(delta, epsilon).unwrap(), &g, 1e-10).map_err(err)?;
        if !r.pass {
            return Err(format!("affine_shift({delta}, {epsilon}) rejected"));
        }
    }
    Ok(format!("{} closing maps pass, 3 shifted maps rejected (cocycle 1e-10, boundary 1e-12)", closing.len()))
}

fn conjugacy() -> Outcome {
    const TOL: f64 = 1e-9;
    // ratio 2^(1/32) puts λ = 1 on the lattice, which closes it under products
    let lambdas = geomspace(0.5, 0.5 * 2f64.powf(63.0 / 32.0), 64);
    let mut worst = 0.0f64;
    for eta in [
        EtaMap::power_scale(2.0).unwrap(),
        EtaMap::conjugate(ScaleFunction::exp(1.0, 1.0, -1.0).unwrap()),
    ] {
        // s on the image nodes of H so λ·H⁻¹(s) lands on the λ lattice
        let nodes: Vec<f64> = lambdas.iter().map(|&l| eta.eval(l, 1.0).unwrap()).collect();
        let g = Grid::with_stimulus(Interval::non_negative(), vec![1.0], lambdas.clone(), nodes.clone()).unwrap();
        let ex = extract_h(&eta, 1.0, &g, TOL).map_err(err)?;
        let r = compare_eta(&eta, &conjugate_eta(ex.h), &lambdas, &nodes, TOL).map_err(err)?;
        if !r.pass || r.evaluated < 64 * 32 {
            return Err(format!("{:?}: max {:.2e} over {}", eta.kind(), r.max_abs, r.evaluated));
        }
        worst = worst.max(r.max_abs);
    }
    Ok(format!("64x64 lattice, max {worst:.2e} <= {TOL:e}"))
}

fn gamma_derivation() -> Outcome {
    const TOL: f64 = 1e-10;
    let g = Grid::with_stimulus(Interval::non_negative(), vec![1.0], linspace(0.5, 2.0, 32), linspace(0.25, 2.0, 32))
        .unwrap();
    let mut worst = 0.0f64;
    for (gamma, h) in [
        (GammaMap::LambdaOnly, ScaleFunction::power(1.0, -1.0, 0.0).unwrap()),
        (GammaMap::PowerOfLambda { r: 2.0 }, ScaleFunction::identity()),
    ] {
        let (derived, r) = derive_gamma(&gamma, &h, &g, TOL).map_err(err)?;
        if !r.pass {
            return Err(format!("{gamma:?}: max {:.2e}", r.max_abs));
        }
        for &s in g.s() {
            if derived.eval(1.0, s).map_err(err)? != 1.0 {
                return Err(format!("{gamma:?}: derived γ(1, {s}) != 1"));
            }
        }
        worst = worst.max(r.max_abs);
    }
    Ok(format!("2 pairs, max {worst:.2e} <= {TOL:e}, γ(1,s) = 1 exactly"))
}

fn phi_cross_check() -> Outcome {
    let g = Grid::with_stimulus(Interval::non_negative(), vec![1.0], linspace(1.5, 2.0, 16), linspace(0.1, 1.0, 16))
        .unwrap();
    let eta = EtaMap::power_scale(1.0).unwrap();
    let bad = phi_consistency(&Curve::identity(), &eta, &g, 1e-10).map_err(err)?;
    let good = phi_consistency(&Curve::constant(1.5), &eta, &g, 1e-10).map_err(err)?;
    ok_if(
        !bad.pass && bad.max_abs > 0.1 && good.pass && good.max_abs == 0.0,
        format!("φ = id rejected with {:.3} > 0.1, constant φ gives {:.1e}", bad.max_abs, good.max_abs),
    )
}

fn lundberg() -> Outcome {
    const TOL: f64 = 1e-9;
    let pts = linspace(0.0, 1.0, 30);
    let unit = Interval::new(0.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    for which in 1..=5u8 {
        for seed in 0..3u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let case = random_admissible(which, &mut rng).map_err(err)?;
            let sol = make_lundberg_case(case, unit, unit).map_err(err)?;
            let r = sol.residual(&pts, &pts, TOL).map_err(err)?;
            if !r.pass {
                return Err(format!("case {which} seed {seed}: max {:.2e}", r.max_abs));
            }
            worst = worst.max(r.max_abs);
        }
    }
    Ok(format!("5 cases x 3 draws on 30x30, max {worst:.2e} <= {TOL:e}"))
}

fn representations() -> Outcome {
    const TOL: f64 = 1e-10;
    const PSY_TOL: f64 = 1e-9;
    let id = ScaleFunction::identity();
    let g = Grid::new(linspace(0.5, 3.0, 20), vec![1.0], linspace(0.0, 1.0, 20)).unwrap();
    let x_plus_s = SensitivityFamily::homogeneous(ScaleFunction::affine(1.0, 1.0).unwrap(), 1.0).unwrap();
    let pairs = [
        (x_plus_s, Representation::Subtractive { u: id.clone(), w: id.clone() }),
        (
            SensitivityFamily::fech_exp(1.0).unwrap(),
            Representation::Fechnerian { u: ScaleFunction::log(1.0, 0.0).unwrap() },
        ),
        (
            SensitivityFamily::weber(ScaleFunction::affine(1.0, 1.0).unwrap()),
            Representation::GainControl { u: id.clone(), sigma: Curve::identity() },
        ),
    ];
    let mut worst = 0.0f64;
    for (fam, rep) in &pairs {
        let r = representation_residual(fam, rep, &g, TOL).map_err(err)?;
        if !r.pass {
            return Err(format!("{rep:?}: max {:.2e}", r.max_abs));
        }
        worst = worst.max(r.max_abs);
    }

    let link = ScaleFunction::logistic_table(12.0, 2401).unwrap();
    let rep = Representation::Fechnerian { u: ScaleFunction::affine(2.0, 0.0).unwrap() };
    let pf = make_psychometric(rep, link, Interval::new(-10.0, 10.0).unwrap()).map_err(err)?;
    let mut round = 0.0f64;
    for a in linspace(-3.0, 3.0, 20) {
        for pi in linspace(0.05, 0.95, 20) {
            let x = pf.sensitivity(a, pi).map_err(err)?;
            round = round.max((pf.p(a, x).map_err(err)? - pi).abs());
        }
    }
    ok_if(
        round <= PSY_TOL,
        format!("3 pairs max {worst:.2e} <= {TOL:e}, psychometric round trip {round:.2e} <= {PSY_TOL:e}"),
    )
}

fn balanced() -> Outcome {
    const TOL: f64 = 1e-10;
    let g = Grid::new(linspace(0.5, 4.0, 8), vec![1.0], linspace(0.1, 0.9, 9)).unwrap();
    let odd = SensitivityFamily::balanced_parallel(Curve::Sine {
        amplitude: 0.3,
        frequency: std::f64::consts::PI,
        center: 0.5,
    });
    let d = decompose_balanced_parallel(&odd, &g, TOL).map_err(err)?;
    let plus = SensitivityFamily::homogeneous(ScaleFunction::affine(1.0, 1.0).unwrap(), 1.0).unwrap();
    let e = decompose_balanced_parallel(&plus, &g, TOL).map_err(err)?;
    ok_if(
        d.pass && !e.pass && e.antisymmetry.max_abs >= 0.5,
        format!(
            "odd ν max {:.2e} <= {TOL:e}, x+s antisymmetry {:.3} >= 0.5",
            d.x_independence.max_abs.max(d.antisymmetry.max_abs),
            e.antisymmetry.max_abs
        ),
    )
}

fn fitting() -> Outcome {
    const TOL: f64 = 1e-7;
    const NOISY_TOL: f64 = 5e-3;
    let xs = linspace(0.5, 2.0, 10);
    let ss = linspace(0.0, 1.0, 10);
    let opts = LmOptions { tol: TOL, ..LmOptions::default() };
    let cases: [(FitKind, &[f64]); 4] = [
        (FitKind::SubCaseI, &[1.5, 0.7, 1.2, 0.5]),
        (FitKind::SubCaseII, &[1.2, 0.8, 1.5, 1.0, 0.1]),
        (FitKind::AffineB, &[2.0, 0.3]),
        (FitKind::Power, &[2.0, 1.5]),
    ];
    let mut worst = 0.0f64;
    for (kind, truth) in cases {
        let samples = SampleSet::from_family(&kind.family(truth).map_err(err)?, &xs, &ss).map_err(err)?;
        let init: Vec<(String, f64)> = kind
            .param_names()
            .iter()
            .zip(truth)
            .map(|(n, v)| (n.to_string(), if *v == 0.0 { 0.05 } else { v * 1.1 }))
            .collect();
        let fit = fit_family(&samples, kind, &init, &opts).map_err(err)?;
        if !fit.residual.pass {
            return Err(format!("{}: residual {:.2e}", kind.name(), fit.residual.max_abs));
        }
        worst = worst.max(fit.residual.max_abs);
    }

    let power = SampleSet::from_family(&SensitivityFamily::power(2.0, 1.5), &xs, &linspace(0.1, 1.0, 5)).unwrap();
    let pf = fit_power_per_s(&power, 1e-9).map_err(err)?;
    let off = pf
        .rows
        .iter()
        .map(|r| (r.kappa - 2.0).abs().max((r.rho - 1.5).abs()))
        .fold(0.0, f64::max);
    if off > 1e-9 {
        return Err(format!("per-s power fit off by {off:.2e}"));
    }

    let kind = FitKind::SubCaseI;
    let truth = [1.5, 0.7, 1.2, 0.5];
    let noisy = || {
        SampleSet::from_family(&kind.family(&truth).unwrap(), &xs, &ss)
            .and_then(|s| s.with_noise(1e-3, 42))
            .and_then(|s| {
                let init: Vec<(String, f64)> =
                    kind.param_names().iter().map(|n| (n.to_string(), 1.0)).collect();
                fit_family(&s, kind, &init, &LmOptions { tol: NOISY_TOL, ..LmOptions::default() })
            })
    };
    let (a, b) = (noisy().map_err(err)?, noisy().map_err(err)?);
    ok_if(
        a.residual.pass && a == b,
        format!(
            "4 variants max {worst:.2e} <= {TOL:e}, per-s power {off:.1e}, noisy {:.2e} <= {NOISY_TOL:e} (deterministic)",
            a.residual.max_abs
        ),
    )
}

fn classification() -> Outcome {
    const TOL: f64 = 1e-6;
    let g = Grid::uniform(
        Interval::new(0.5, 4.0).unwrap(),
        Interval::new(0.5, 2.0).unwrap(),
        Interval::new(0.1, 1.0).unwrap(),
        [16, 16, 16],
    )
    .unwrap();
    let names = |fam: &SensitivityFamily| -> Result<Vec<LawLabel>, String> {
        Ok(classify_laws(fam, &g, TOL).map_err(err)?.labels)
    };
    let mut weber_ok = true;
    for fam in [
        SensitivityFamily::weber(1.0),
        SensitivityFamily::weber(ScaleFunction::exp(1.0, 1.0, 0.0).unwrap()),
    ] {
        let w = names(&fam)?;
        weber_ok &= w.len() == 2
            && w.iter().any(|l| matches!(l, LawLabel::Weber))
            && w.iter().any(|l| matches!(l, LawLabel::PowerLaw { .. }));
    }
    let near = names(&SensitivityFamily::power(1.0, 1.01))?;
    let near_ok = near.iter().any(|l| matches!(l, LawLabel::PowerLaw { .. }))
        && !near.iter().any(|l| matches!(l, LawLabel::Weber));
    let hom = names(&SensitivityFamily::homogeneous(ScaleFunction::affine(1.0, 1.0).unwrap(), 1.0).unwrap())?;
    let theta = hom.iter().find_map(|l| match l {
        LawLabel::Shift { theta } => Some(*theta),
        _ => None,
    });
    let shift_ok = hom.len() == 1 && theta.is_some_and(|t| (t - 1.0).abs() <= 1e-3);
    ok_if(
        weber_ok && near_ok && shift_ok,
        format!("weber {weber_ok}, ρ = 1.01 power-only {near_ok}, homogeneous θ̂ = {theta:?} (±1e-3)"),
    )
}

const PASSING: &str = r#"
command = "check"
tolerance = 1e-10
[grid]
stimulus = [0.5, 3.0]
counts = [12, 12, 12]
[family]
kind = "sub_case_ii"
a = 1
c = 1
rho = 1
r = 1
epsilon = 0
[gamma]
kind = "lambda_only"
[eta]
kind = "power_scale"
theta = -1
"#;

const FAILING: &str = r#"
command = "check"
[eta]
kind = "affine_shift"
delta = 1
epsilon = 0.5
"#;

fn run_cli(config: &Path, out: &Path) -> Result<(i32, Vec<u8>), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_iverson"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?
        .status;
    let bytes = std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?;
    Ok((status.code().unwrap_or(-1), bytes))
}

fn cli() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let good = dir.path().join("good.toml");
    let bad = dir.path().join("bad.toml");
    std::fs::write(&good, PASSING).map_err(|e| e.to_string())?;
    std::fs::write(&bad, FAILING).map_err(|e| e.to_string())?;
    let (c1, r1) = run_cli(&good, &dir.path().join("a"))?;
    let (c2, r2) = run_cli(&good, &dir.path().join("b"))?;
    let (c3, r3) = run_cli(&bad, &dir.path().join("c"))?;
    let report: serde_json::Value = serde_json::from_slice(&r3).map_err(|e| e.to_string())?;
    let failed_check = report["checks"]
        .as_array()
        .is_some_and(|cs| cs.iter().any(|c| c["report"]["pass"] == false));
    ok_if(
        c1 == 0 && c2 == 0 && r1 == r2 && c3 == 1 && report["pass"] == false && failed_check,
        format!("identical reports {}, exit codes {c1}/{c2}/{c3}", r1 == r2),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("closed-form families satisfy the similarity law", closed_forms),
        ("translational maps and boundary conditions", translational),
        ("conjugacy reconstruction of η from H", conjugacy),
        ("γ derived from H", gamma_derivation),
        ("φ cross-check", phi_cross_check),
        ("functional-equation solutions", lundberg),
        ("representations and psychometric inversion", representations),
        ("balanced-parallel decomposition", balanced),
        ("parameter recovery", fitting),
        ("law classification", classification),
        ("CLI determinism and exit status", cli),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("[PASS] {:>2}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
