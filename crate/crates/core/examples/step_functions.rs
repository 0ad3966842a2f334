// Step-function windows `Σ s_j rect(· − j)`.

use qsis::certify::{certify_step, certify_step_p1_extension};
use qsis::perturb::{jitter_adversarial, TranslationGrid};
use qsis::spectrum::{periodization, riesz_bounds_p2};
use qsis::{Exponent, FrameBounds, Generator, Provenance, QsisError};

pub fn run_example() -> qsis::Result<()> {
    let g = Generator::step(vec![0.25, 1.0, 0.25])?;
    let bounds = riesz_bounds_p2(&periodization(&g, 256, 2000)?)?;
    let unsq = bounds.to_unsquared();
    println!(
        "{}: unsquared lattice bounds ({:.4}, {:.4})",
        g.name(),
        unsq.lower(),
        unsq.upper()
    );

    let y = jitter_adversarial(TranslationGrid::new(1, 32)?, 0.01, &[1.0])?;
    let cert = certify_step(&g, &y, Exponent::new(2.0)?, &unsq)?;
    println!(
        "p = 2: budget {:.4} (textbook {:.4}), {:?}",
        cert.budget_cp.unwrap_or(f64::NAN),
        cert.paper_budget_cp.unwrap_or(f64::NAN),
        cert.verdict
    );

    let asserted = FrameBounds::unsquared(0.5, 1.5, Provenance::User)?;
    let one = Exponent::new(1.0)?;
    assert!(matches!(
        certify_step(&g, &y, one, &asserted),
        Err(QsisError::DualExponentInfinite)
    ));
    let ext = certify_step_p1_extension(&g, &y, &asserted)?;
    println!(
        "p = 1 extension: budget {:.4}, {:?}",
        ext.budget_cp.unwrap_or(f64::NAN),
        ext.verdict
    );
    Ok(())
}

fn main() -> qsis::Result<()> {
    run_example()
}
