// Lattice Riesz bounds from the periodization `G(y) = Σ |ψ̂(y + m)|²`.

use qsis::spectrum::{amalgam_sums, periodization, riesz_bounds_p2, Cell};
use qsis::Generator;

pub fn run_example() -> qsis::Result<()> {
    for order in 0..=3 {
        let g = Generator::bspline(order);
        let profile = periodization(&g, 256, 2000)?;
        let b = riesz_bounds_p2(&profile)?;
        println!(
            "beta_{order}: G in [{:.6}, {:.6}] (tail <= {:.1e}), squared bounds ({:.6}, {:.6})",
            profile.g_min,
            profile.g_max,
            profile.tail_bound,
            b.lower(),
            b.upper()
        );
    }
    let hat = periodization(&Generator::bspline(1), 256, 2000)?;
    assert!((hat.g_min - 1.0 / 3.0).abs() < 1e-3 && (hat.g_max - 1.0).abs() < 1e-3);

    for cell in [Cell::Unit, Cell::Centered] {
        let sums = amalgam_sums(&Generator::sinc(), 256, 2000, cell)?;
        println!(
            "sinc amalgam sums on {cell:?} cell: c = {:.4}, C = {:.4}",
            sums.lower_c, sums.upper_c
        );
    }

    let degenerate = periodization(&Generator::step(vec![0.0, 1.0, -1.0])?, 256, 2000)?;
    println!("step (0, 1, -1): {:?}", riesz_bounds_p2(&degenerate).err());
    Ok(())
}

fn main() -> qsis::Result<()> {
    run_example()
}
