// Stability certificates for perturbed translate systems.

use qsis::certify::{
    certify_bspline, certify_per_index, certify_rect, certify_sobolev_rectangle, geometric_weights,
    paley_wiener_update, per_index_radii,
};
use qsis::perturb::{jitter_adversarial, PerturbationSet, TranslationGrid};
use qsis::{Exponent, FrameBounds, Generator, Provenance};

pub fn run_example() -> qsis::Result<()> {
    let grid = TranslationGrid::new(1, 16)?;
    let p = Exponent::new(2.0)?;

    for l in [0.2, 0.25] {
        let cert = certify_rect(&jitter_adversarial(grid, l, &[1.0])?, p)?;
        println!(
            "rect L = {l}: {:?}, rho = {:.4}",
            cert.verdict,
            cert.rho.unwrap_or(f64::NAN)
        );
    }

    for l in [0.08, 0.09] {
        let cert = certify_bspline(1, &jitter_adversarial(grid, l, &[1.0])?, p, None)?;
        println!(
            "beta_1 L = {l}: {:?}, margin = {:+.4}",
            cert.verdict,
            cert.corrected_margin.unwrap_or(f64::NAN)
        );
    }

    let hat = Generator::bspline(1);
    let bounds = FrameBounds::squared(1.0 / 3.0, 1.0, Provenance::Spectrum)?;
    let y = jitter_adversarial(grid, 0.01, &[1.0])?;
    let cert = certify_sobolev_rectangle(&hat, &y, p, &bounds)?;
    let fmr = cert.fmr_comparison.as_ref().map(|f| f.fmr_constant);
    println!(
        "beta_1 Sobolev: budget = {:?}, FMR constant = {:?}",
        cert.budget_cp, fmr
    );
    println!("  updated bounds: {:?}", cert.updated_bounds);

    let pw = paley_wiener_update(&FrameBounds::unsquared(1.0, 2.0, Provenance::User)?, 0.4, p)?;
    println!(
        "Paley-Wiener: {:?}",
        pw.updated_bounds.map(|b| (b.lower(), b.upper()))
    );

    let radii = per_index_radii(&hat, p, &bounds, grid, &geometric_weights(&grid, 0.5))?;
    let centre = radii.radii[grid.position(&[0])?];
    let offsets = radii.radii.iter().map(|r| vec![0.5 * r]).collect();
    let nudged = PerturbationSet::from_offsets(grid, offsets, None)?;
    let cert = certify_per_index(&hat, &nudged, p, &bounds, &radii)?;
    println!(
        "per-index radii: centre {centre:.3e}, certificate {:?}",
        cert.verdict
    );
    Ok(())
}

fn main() -> qsis::Result<()> {
    run_example()
}
