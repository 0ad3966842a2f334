// Building windows, sampling them, and measuring their norms.

use qsis::generator::{grad_lp_norm, lp_norm, modulus_continuity};
use qsis::quadrature::QuadratureSpec;
use qsis::{Exponent, Generator};

pub fn run_example() -> qsis::Result<()> {
    let quad = QuadratureSpec::default();
    let p = Exponent::new(2.0)?;
    let windows = [
        Generator::rect(),
        Generator::bspline(1),
        Generator::bspline(3),
        Generator::step(vec![0.25, 1.0, 0.25])?,
    ];
    for g in &windows {
        let norm = lp_norm(g, p, &quad)?;
        let hat0 = g.fourier1(0.0)?.re;
        println!(
            "{:<14} psi(0.3) = {:.6}  |psi|_2 = {:.6}  psi^(0) = {:.6}",
            g.name(),
            g.eval1(0.3),
            norm,
            hat0
        );
    }

    let hat = Generator::bspline(1);
    let grad = grad_lp_norm(&hat, p, 0)?;
    for delta in [1e-3, 1e-2, 1e-1] {
        let omega = modulus_continuity(&hat, delta, p, 64, &quad)?;
        println!("omega_2({delta}) = {omega:.6e} <= {:.6e}", grad * delta);
        assert!(omega <= grad * delta + 1e-6);
    }

    let spec = r#"{"kind":"tensor","factors":[{"kind":"bspline","order":1},{"kind":"rect"}]}"#;
    let plane = Generator::from_json(spec)?;
    println!(
        "{} in dimension {}: value at (0.25, 0) = {}",
        plane.name(),
        plane.dimension(),
        plane.eval(&[0.25, 0.0])
    );
    Ok(())
}

fn main() -> qsis::Result<()> {
    run_example()
}
