macro_rules! example {
    ($name:ident, $path:literal) => {
        #[allow(dead_code)]
        mod $name {
            include!($path);
        }

        #[test]
        fn $name() {
            $name::run_example().unwrap();
        }
    };
}

example!(generators, "../examples/generators.rs");
example!(spectrum_bounds, "../examples/spectrum_bounds.rs");
example!(perturbation_sets, "../examples/perturbation_sets.rs");
example!(certificates, "../examples/certificates.rs");
example!(oracle_soundness, "../examples/oracle_soundness.rs");
example!(
    problem1_counterexample,
    "../examples/problem1_counterexample.rs"
);
example!(kadec_exponentials, "../examples/kadec_exponentials.rs");
example!(step_functions, "../examples/step_functions.rs");
