// Perturbed translation sets `Y = {k + u_k}` and their deviation measures.

use qsis::perturb::{
    jitter_adversarial, jitter_uniform, kadec_check, single_node_displacement, PerturbationSpec,
    TranslationGrid,
};

pub fn run_example() -> qsis::Result<()> {
    let grid = TranslationGrid::new(1, 8)?;

    let uniform = jitter_uniform(grid, 0.2, 7)?;
    let again = jitter_uniform(grid, 0.2, 7)?;
    assert_eq!(uniform, again);
    println!(
        "uniform: {} nodes, l2 = {:.4}, linf = {:.4}",
        uniform.len(),
        uniform.l2_deviation(),
        uniform.linf_deviation()
    );

    let pushed = jitter_adversarial(grid, 0.2, &[1.0])?;
    println!("adversarial: first nodes {:?}", &pushed.points1()?[..3]);

    for delta in [0.24, 0.25] {
        let y = single_node_displacement(grid, &[0], delta)?;
        let check = kadec_check(&y);
        println!(
            "single node moved by {delta}: kadec pass = {}, margin = {:+.3}",
            check.pass, check.margin
        );
    }

    let spec = PerturbationSpec::from_json(r#"{"model":"uniform","L":0.1,"seed":3,"grid_K":4}"#)?;
    let y = spec.build()?;
    println!("from spec: {:?}", y.points1()?);
    println!("{}", serde_json::to_string(&y)?);
    Ok(())
}

fn main() -> qsis::Result<()> {
    run_example()
}
