// Checking a certificate against finite-section measurements.

use qsis::certify::certify_sobolev_rectangle;
use qsis::oracle::{empirical_bounds_p2, gram_matrix, run_oracle, OracleConfig};
use qsis::perturb::{jitter_uniform, TranslationGrid};
use qsis::{Exponent, FrameBounds, Generator, Provenance};

pub fn run_example() -> qsis::Result<()> {
    let hat = Generator::bspline(1);
    let p = Exponent::new(2.0)?;
    let y = jitter_uniform(TranslationGrid::new(1, 32)?, 0.005, 11)?;
    let bounds = FrameBounds::squared(1.0 / 3.0, 1.0, Provenance::Spectrum)?;
    let cert = certify_sobolev_rectangle(&hat, &y, p, &bounds)?;

    let report = run_oracle(
        &hat,
        &y,
        p,
        &OracleConfig {
            samples: 100,
            ..OracleConfig::default()
        },
    )?;
    let budget = cert.budget_cp.unwrap_or(f64::INFINITY);
    let rho = cert.rho.unwrap_or(0.0);
    let (a, b) = (bounds.to_unsquared().lower(), bounds.to_unsquared().upper());
    println!(
        "certificate {:?}: budget {budget:.4}, rho {rho:.4}",
        cert.verdict
    );
    println!(
        "oracle power {:.3e} <= budget: {}",
        report.perturbation_power_max,
        report.perturbation_power_max <= budget
    );
    println!(
        "ratios [{:.4}, {:.4}] inside [{:.4}, {:.4}]",
        report.min_ratio,
        report.max_ratio,
        a - rho,
        b + rho
    );
    assert!(report.perturbation_power_max <= budget + 1e-6);
    assert!(report.min_ratio >= a - rho - 1e-3 && report.max_ratio <= b + rho + 1e-3);

    let (lo, hi) = empirical_bounds_p2(&gram_matrix(&hat, &y)?)?;
    println!("Gram section eigenvalues in [{lo:.5}, {hi:.5}]");
    Ok(())
}

fn main() -> qsis::Result<()> {
    run_example()
}
