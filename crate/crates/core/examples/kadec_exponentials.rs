// Exponentials `e^{2πi y_k x}` at jittered nodes and the one-quarter condition.

use qsis::oracle::{exponential_bounds, exponential_gram};
use qsis::perturb::{explicit, jitter_uniform, kadec_check, TranslationGrid};

pub fn run_example() -> qsis::Result<()> {
    let grid = TranslationGrid::new(1, 32)?;
    for seed in 0..4 {
        let y = jitter_uniform(grid, 0.2, seed)?;
        let (lo, hi) = exponential_gram(&y)?;
        println!(
            "seed {seed}: kadec {}, eig in [{lo:.4}, {hi:.4}]",
            kadec_check(&y).pass
        );
    }
    let b = exponential_bounds(&jitter_uniform(grid, 0.2, 0)?)?;
    println!(
        "estimated (A1, B1) = ({:.4}, {:.4}) from {:?}",
        b.a1, b.b1, b.provenance
    );

    let twin = explicit(TranslationGrid::new(1, 2)?, &[(vec![1], vec![0.0])])?;
    let (lo, _) = exponential_gram(&twin)?;
    println!("duplicated node: eig_min = {lo:.2e}");
    Ok(())
}

fn main() -> qsis::Result<()> {
    run_example()
}
