// Moving one rect translate changes the spanned space.

use qsis::oracle::problem1_residual;

pub fn run_example() -> qsis::Result<()> {
    let r = problem1_residual(0.3, 32)?;
    println!("target chi_[-1/2, -1/2 + 0.3], norm {:.6}", r.target_norm);
    println!("residual against perturbed set: {:.6}", r.perturbed);
    println!("residual against lattice:       {:.6}", r.unperturbed);
    assert!((r.perturbed - 0.3f64.sqrt()).abs() < 1e-3);
    assert!(r.unperturbed < r.perturbed);
    Ok(())
}

fn main() -> qsis::Result<()> {
    run_example()
}
