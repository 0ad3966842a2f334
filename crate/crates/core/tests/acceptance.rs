use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use qsis::certify::{
    certify_bspline, certify_rect, certify_sobolev_rectangle, certify_step, Certificate, TheoremId,
};
use qsis::cli::{cmd_sweep, CellArg, CommandKind, CommonArgs, ConventionArg, Format, RunConfig};
use qsis::generator::{grad_lp_norm, modulus_continuity};
use qsis::oracle::{
    empirical_bounds_p2, exponential_gram, gram_matrix, perturbation_power, problem1_residual,
    run_oracle, OracleConfig,
};
use qsis::perturb::{
    explicit, jitter_adversarial, jitter_uniform, kadec_check, single_node_displacement,
    PerturbationSet, TranslationGrid,
};
use qsis::quadrature::QuadratureSpec;
use qsis::spectrum::{periodization, riesz_bounds_p2};
use qsis::{Exponent, FrameBounds, Generator, Provenance};

type Outcome = Result<(), String>;
type Criterion = (u32, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exp(p: f64) -> Exponent {
    Exponent::new(p).unwrap()
}

fn grid(k: usize) -> TranslationGrid {
    TranslationGrid::new(1, k).unwrap()
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn ac1() -> Outcome {
    let profile = periodization(&Generator::rect(), 256, 2000).map_err(e)?;
    let b = riesz_bounds_p2(&profile).map_err(e)?;
    ensure(
        (b.lower() - 1.0).abs() <= 1e-3 && (b.upper() - 1.0).abs() <= 1e-3,
        || format!("squared bounds ({}, {})", b.lower(), b.upper()),
    )?;
    let y = PerturbationSet::identity(grid(32));
    for p in [1.0, 2.0, 3.0] {
        let r = run_oracle(&Generator::rect(), &y, exp(p), &OracleConfig::default()).map_err(e)?;
        ensure(
            (r.min_ratio - 1.0).abs() <= 1e-6 && (r.max_ratio - 1.0).abs() <= 1e-6,
            || format!("p = {p}: ratios [{}, {}]", r.min_ratio, r.max_ratio),
        )?;
    }
    Ok(())
}

/// Gram symbol of the hat function: `(2 + cos 2πy) / 3`.
fn hat_symbol(y: f64) -> f64 {
    (2.0 + (2.0 * PI * y).cos()) / 3.0
}

fn ac2() -> Outcome {
    let hat = Generator::bspline(1);
    let profile = periodization(&hat, 256, 2000).map_err(e)?;
    ensure(
        (profile.g_min - 1.0 / 3.0).abs() <= 1e-3 && (profile.g_max - 1.0).abs() <= 1e-3,
        || format!("G range [{}, {}]", profile.g_min, profile.g_max),
    )?;
    for (i, v) in profile.values.iter().enumerate() {
        let y = profile.grid_point(i)[0];
        ensure((v - hat_symbol(y)).abs() <= 1e-3, || {
            format!("G({y}) = {v}")
        })?;
    }
    for k in [16, 32, 64, 128] {
        let gram = gram_matrix(&hat, &PerturbationSet::identity(grid(k))).map_err(e)?;
        let (lo, hi) = empirical_bounds_p2(&gram).map_err(e)?;
        ensure(lo >= 1.0 / 3.0 - 1e-8 && hi <= 1.0 + 1e-8, || {
            format!("K = {k}: eig [{lo}, {hi}]")
        })?;
        let n = (2 * k + 1) as f64;
        let exact_min = (2.0 - (PI / (n + 1.0)).cos()) / 3.0;
        ensure((lo - exact_min).abs() <= 1e-9, || {
            format!("K = {k}: eig_min {lo} vs {exact_min}")
        })?;
    }
    let gram = gram_matrix(&hat, &PerturbationSet::identity(grid(256))).map_err(e)?;
    let (lo, _) = empirical_bounds_p2(&gram).map_err(e)?;
    ensure((lo - 1.0 / 3.0).abs() <= 1e-2, || {
        format!("K = 256: eig_min {lo}")
    })
}

fn rect_sweep_args() -> CommonArgs {
    CommonArgs {
        generator: r#"{"kind":"rect"}"#.into(),
        perturb: Some(r#"{"model":"adversarial","L":0,"grid_K":32}"#.into()),
        p: 2.0,
        grid_k: None,
        resolution: 256,
        tail_k: 2000,
        samples: 20,
        seed: 0,
        out: None,
        format: Format::Csv,
        cell: CellArg::Unit,
        bounds: None,
        convention: ConventionArg::Squared,
    }
}

fn ac3() -> Outcome {
    let pass = certify_rect(
        &jitter_adversarial(grid(32), 0.20, &[1.0]).map_err(e)?,
        exp(2.0),
    )
    .map_err(e)?;
    let fail = certify_rect(
        &jitter_adversarial(grid(32), 0.25, &[1.0]).map_err(e)?,
        exp(2.0),
    )
    .map_err(e)?;
    ensure(pass.passed() && !fail.passed(), || {
        format!("L = 0.20 {:?}, L = 0.25 {:?}", pass.verdict, fail.verdict)
    })?;
    let cfg = RunConfig::from_args(
        CommandKind::Sweep,
        &rect_sweep_args(),
        Some("0,0.05,0.1,0.15,0.2,0.25,0.3"),
    )
    .map_err(e)?;
    let report = cmd_sweep(&cfg).map_err(e)?;
    let verdicts: Vec<&str> = report
        .rows
        .iter()
        .filter(|r| r.theorem_id == TheoremId::Rect)
        .map(|r| r.verdict.as_str())
        .collect();
    let flips = verdicts.windows(2).filter(|w| w[0] != w[1]).count();
    ensure(
        verdicts.len() == 7 && flips == 1 && verdicts[0] == "pass",
        || format!("verdicts {verdicts:?}"),
    )
}

struct Soundness {
    label: String,
    g: Generator,
    y: PerturbationSet,
    cert: Certificate,
}

fn soundness_matrix() -> Result<Vec<Soundness>, String> {
    let p = exp(2.0);
    let jitter = |l: f64| jitter_uniform(grid(32), l, 1).map_err(e);
    let mut out = Vec::new();
    for l in [0.05, 0.1] {
        let y = jitter(l)?;
        let cert = certify_rect(&y, p).map_err(e)?;
        out.push(Soundness {
            label: format!("rect L={l}"),
            g: Generator::rect(),
            y,
            cert,
        });
    }
    let hat = Generator::bspline(1);
    let hat_bounds = FrameBounds::squared(1.0 / 3.0, 1.0, Provenance::Spectrum).map_err(e)?;
    for l in [0.005, 0.01] {
        let y = jitter(l)?;
        let cert = certify_sobolev_rectangle(&hat, &y, p, &hat_bounds).map_err(e)?;
        out.push(Soundness {
            label: format!("beta1 sobolev L={l}"),
            g: hat.clone(),
            y,
            cert,
        });
    }
    let step = Generator::step(vec![0.25, 1.0, 0.25]).map_err(e)?;
    let step_bounds = riesz_bounds_p2(&periodization(&step, 256, 2000).map_err(e)?).map_err(e)?;
    let y = jitter(0.01)?;
    let cert = certify_step(&step, &y, p, &step_bounds).map_err(e)?;
    out.push(Soundness {
        label: "step L=0.01".into(),
        g: step,
        y,
        cert,
    });
    let y = jitter(0.02)?;
    let cert = certify_bspline(2, &y, p, None).map_err(e)?;
    out.push(Soundness {
        label: "beta2 L=0.02".into(),
        g: Generator::bspline(2),
        y,
        cert,
    });
    Ok(out)
}

fn ac4() -> Outcome {
    let quad = QuadratureSpec::default();
    for case in soundness_matrix()? {
        let label = &case.label;
        ensure(case.cert.passed(), || {
            format!("{label}: certificate does not pass")
        })?;
        let budget = case
            .cert
            .budget_cp
            .ok_or_else(|| format!("{label}: no budget"))?;
        let rho = case.cert.rho.ok_or_else(|| format!("{label}: no rho"))?;
        let bounds = case
            .cert
            .input_bounds
            .ok_or_else(|| format!("{label}: no bounds"))?
            .to_unsquared();
        let power = perturbation_power(&case.g, &case.y, exp(2.0), 200, 0, &quad).map_err(e)?;
        ensure(power <= budget + 1e-6, || {
            format!("{label}: power {power} > budget {budget}")
        })?;
        let r = run_oracle(&case.g, &case.y, exp(2.0), &OracleConfig::default()).map_err(e)?;
        let (lo, hi) = (bounds.lower() - rho - 1e-3, bounds.upper() + rho + 1e-3);
        ensure(r.min_ratio >= lo && r.max_ratio <= hi, || {
            format!(
                "{label}: ratios [{}, {}] outside [{lo}, {hi}]",
                r.min_ratio, r.max_ratio
            )
        })?;
    }
    Ok(())
}

fn ac5() -> Outcome {
    let y = jitter_adversarial(grid(32), 0.01, &[1.0]).map_err(e)?;
    let bounds = FrameBounds::squared(1.0 / 3.0, 1.0, Provenance::Spectrum).map_err(e)?;
    let cert =
        certify_sobolev_rectangle(&Generator::bspline(1), &y, exp(2.0), &bounds).map_err(e)?;
    ensure(cert.budget_cp == Some(0.06), || {
        format!("budget {:?}", cert.budget_cp)
    })?;
    let fmr = cert.fmr_comparison.ok_or("no FMR comparison")?;
    ensure(
        fmr.fmr_constant.is_finite() && fmr.fmr_constant > 0.0,
        || format!("FMR constant {}", fmr.fmr_constant),
    )
}

fn ac6() -> Outcome {
    let g = grid(32);
    let inside = kadec_check(&single_node_displacement(g, &[3], 0.24).map_err(e)?);
    let edge = kadec_check(&single_node_displacement(g, &[3], 0.25).map_err(e)?);
    ensure(inside.pass && !edge.pass, || {
        format!("0.24 -> {}, 0.25 -> {}", inside.pass, edge.pass)
    })?;
    for seed in 0..10 {
        let (lo, _) = exponential_gram(&jitter_uniform(g, 0.2, seed).map_err(e)?).map_err(e)?;
        ensure(lo > 0.0, || format!("seed {seed}: eig_min {lo}"))?;
    }
    let twin = explicit(g, &[(vec![1], vec![0.0])]).map_err(e)?;
    let (lo, _) = exponential_gram(&twin).map_err(e)?;
    ensure(lo.abs() <= 1e-10, || {
        format!("duplicated node eig_min {lo}")
    })
}

fn ac7() -> Outcome {
    let r = problem1_residual(0.3, 32).map_err(e)?;
    ensure(
        (r.perturbed - 0.3f64.sqrt()).abs() <= 1e-3 && r.unperturbed < r.perturbed,
        || format!("perturbed {}, unperturbed {}", r.perturbed, r.unperturbed),
    )
}

fn ac8() -> Outcome {
    let quad = QuadratureSpec::default();
    for g in [Generator::bspline(1), Generator::bspline(2)] {
        for p in [1.5, 2.0, 3.0] {
            let grad = grad_lp_norm(&g, exp(p), 0).map_err(e)?;
            for delta in [1e-3, 1e-2, 1e-1] {
                let omega = modulus_continuity(&g, delta, exp(p), 64, &quad).map_err(e)?;
                ensure(omega <= grad * delta + 1e-6, || {
                    format!(
                        "{} p = {p} δ = {delta}: {omega} > {}",
                        g.name(),
                        grad * delta
                    )
                })?;
            }
        }
    }
    Ok(())
}

fn qsis(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qsis"))
        .args(args)
        .env("QSIS_THREADS", threads)
        .output()
        .map_err(e)?;
    ensure(out.status.success(), || {
        format!("qsis {args:?}: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn ac9() -> Outcome {
    let perturb = r#"{"model":"uniform","L":0.1,"seed":5,"grid_K":16}"#;
    let hat = r#"{"kind":"bspline","order":1}"#;
    let runs: [Vec<&str>; 4] = [
        vec![
            "oracle",
            "--generator",
            hat,
            "--perturb",
            perturb,
            "--samples",
            "64",
            "--seed",
            "9",
        ],
        vec!["certify", "--generator", hat, "--perturb", perturb],
        vec!["analyze", "--generator", hat, "--resolution", "128"],
        vec![
            "sweep",
            "--generator",
            hat,
            "--perturb",
            perturb,
            "--samples",
            "32",
            "--l-grid",
            "0,0.01,0.05,0.1",
        ],
    ];
    for args in &runs {
        let one = qsis(args, "1")?;
        let four = qsis(args, "4")?;
        let again = qsis(args, "4")?;
        ensure(one == four && four == again, || {
            format!("{} output differs across runs", args[0])
        })?;
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, ac1, Duration::from_secs(10)),
        (2, ac2, Duration::from_secs(30)),
        (3, ac3, Duration::from_secs(5)),
        (4, ac4, Duration::from_secs(120)),
        (5, ac5, Duration::from_secs(1)),
        (6, ac6, Duration::from_secs(20)),
        (7, ac7, Duration::from_secs(10)),
        (8, ac8, Duration::from_secs(30)),
        (9, ac9, Duration::from_secs(120)),
    ];
    let mut failed = Vec::new();
    for (n, check, limit) in criteria {
        let start = Instant::now();
        let outcome = check().and_then(|()| {
            let took = start.elapsed();
            ensure(took <= limit, || {
                format!("took {took:.2?}, limit {limit:?}")
            })
        });
        match outcome {
            Ok(()) => println!("[PASS] AC-{n} ({:.2?})", start.elapsed()),
            Err(msg) => {
                println!("[FAIL] AC-{n}: {msg}");
                failed.push(n);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
