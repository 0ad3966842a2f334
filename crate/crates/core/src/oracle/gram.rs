use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certify::{ExpProvenance, ExponentialBounds};
use crate::error::{QsisError, Result};
use crate::generator::{bspline, sinc, Generator, GeneratorKind};
use crate::perturb::{single_node_displacement, PerturbationSet, TranslationGrid};
use crate::quadrature::{normalize_breaks, panel_rule, PanelShape, QuadratureSpec};

/// `R(t) = ∫ ψ(x) ψ(x − t) dx` for a scalar generator.
fn autocorrelation(g: &Generator, t: f64) -> Result<f64> {
    match g.kind() {
        GeneratorKind::Rect => Ok(bspline(1, t)),
        GeneratorKind::BSpline { order } => Ok(bspline(2 * order + 1, t)),
        GeneratorKind::Sinc => Ok(sinc(t)),
        GeneratorKind::Step { coeffs } => {
            let mut total = 0.0;
            for (i, si) in coeffs.iter().enumerate() {
                for (j, sj) in coeffs.iter().enumerate() {
                    total += si * sj * bspline(1, t + j as f64 - i as f64);
                }
            }
            Ok(total)
        }
        GeneratorKind::Tabulated { .. } => {
            let knots = g.knots1().expect("tabulated generator has knots");
            let mut breaks: Vec<f64> = knots
                .iter()
                .copied()
                .chain(knots.iter().map(|k| k + t))
                .collect();
            normalize_breaks(&mut breaks);
            let rule = panel_rule(
                &breaks,
                PanelShape::Polynomial { degree: 1, p: 2.0 },
                &QuadratureSpec::default(),
            );
            Ok(rule.integrate(|x| g.eval1(x) * g.eval1(x - t)))
        }
        GeneratorKind::TensorProduct { .. } => Err(QsisError::UnsupportedDimension {
            given: g.dimension(),
            supported: 1,
        }),
    }
}

/// `G_{jk} = ⟨ψ(· − y_j), ψ(· − y_k)⟩`, in closed form except for tabulated
/// factors.
pub fn gram_matrix(g: &Generator, y: &PerturbationSet) -> Result<DMatrix<f64>> {
    if g.dimension() != y.grid().dimension() {
        return Err(QsisError::InvalidParameter(format!(
            "generator dimension {} does not match translation set dimension {}",
            g.dimension(),
            y.grid().dimension()
        )));
    }
    let factors = g.factors();
    let points = y.points();
    let n = points.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let mut v = 1.0;
            for (axis, f) in factors.iter().enumerate() {
                v *= autocorrelation(f, points[j][axis] - points[k][axis])?;
            }
            m[(j, k)] = v;
            m[(k, j)] = v;
        }
    }
    Ok(m)
}

/// Extreme eigenvalues of a real symmetric matrix.
pub fn empirical_bounds_p2(gram: &DMatrix<f64>) -> Result<(f64, f64)> {
    if !gram.is_square() {
        return Err(QsisError::NumericalBreakdown(
            "Gram matrix is not square".into(),
        ));
    }
    let scale = gram.amax().max(1.0);
    if (gram - gram.transpose()).amax() > 1e-12 * scale {
        return Err(QsisError::NumericalBreakdown(
            "Gram matrix is not symmetric".into(),
        ));
    }
    let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
    Ok((eig.min(), eig.max()))
}

/// Extreme eigenvalues of a complex Hermitian matrix.
pub fn hermitian_extremes(m: &DMatrix<Complex64>) -> Result<(f64, f64)> {
    if !m.is_square() {
        return Err(QsisError::NumericalBreakdown("matrix is not square".into()));
    }
    let scale = m.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    if m.iter()
        .zip(m.adjoint().iter())
        .any(|(a, b)| (a - b).norm() > 1e-12 * scale)
    {
        return Err(QsisError::NumericalBreakdown(
            "matrix is not Hermitian".into(),
        ));
    }
    let n = m.nrows();
    let diagonal = (0..n).all(|j| (0..n).all(|k| j == k || m[(j, k)] == Complex64::new(0.0, 0.0)));
    if diagonal {
        let d: Vec<f64> = (0..n).map(|j| m[(j, j)].re).collect();
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Ok((lo, hi));
    }
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    Ok((eig.min(), eig.max()))
}

/// Gram matrix of `{e^{2πi y_k·x}}` on `L²([0,1)^d)` and its extreme
/// eigenvalues.
pub fn exponential_gram(y: &PerturbationSet) -> Result<(f64, f64)> {
    let points = y.points();
    let n = points.len();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        for k in j..n {
            let mut v = Complex64::new(1.0, 0.0);
            for (a, b) in points[j].iter().zip(&points[k]) {
                let t = a - b;
                let s = sinc(t);
                v *= if s == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(s, PI * t)
                };
            }
            m[(j, k)] = v;
            m[(k, j)] = v.conj();
        }
    }
    hermitian_extremes(&m)
}

/// `exponential_gram` packaged as bounds with oracle provenance.
pub fn exponential_bounds(y: &PerturbationSet) -> Result<ExponentialBounds> {
    let (lo, hi) = exponential_gram(y)?;
    ExponentialBounds::new(lo, hi, ExpProvenance::OracleGram)
}

/// Least-squares residual of `χ_{[−1/2, −1/2+δ]}` against rect translates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Problem1Residual {
    pub delta: f64,
    pub grid_k: usize,
    /// `y_0 = δ`, all other nodes on the lattice.
    pub perturbed: f64,
    pub unperturbed: f64,
    /// `‖χ_{[−1/2, −1/2+δ]}‖₂ = √δ`.
    pub target_norm: f64,
}

pub fn problem1_residual(delta: f64, grid_k: usize) -> Result<Problem1Residual> {
    if !(0.0..1.0).contains(&delta) {
        return Err(QsisError::InvalidParameter(format!(
            "displacement must lie in [0, 1), got {delta}"
        )));
    }
    let grid = TranslationGrid::new(1, grid_k)?;
    let moved = single_node_displacement(grid, &[0], delta)?;
    let target = (-0.5, -0.5 + delta);
    Ok(Problem1Residual {
        delta,
        grid_k,
        perturbed: rect_residual(&moved, target)?,
        unperturbed: rect_residual(&PerturbationSet::identity(grid), target)?,
        target_norm: delta.sqrt(),
    })
}

fn rect_residual(y: &PerturbationSet, (a, b): (f64, f64)) -> Result<f64> {
    let gram = gram_matrix(&Generator::rect(), y)?;
    let rhs = DVector::from_iterator(
        y.len(),
        y.points1()?
            .into_iter()
            .map(|c| ((c + 0.5).min(b) - (c - 0.5).max(a)).max(0.0)),
    );
    let norm_sq = b - a;
    if norm_sq == 0.0 {
        return Ok(0.0);
    }
    let chol = gram.cholesky().ok_or(QsisError::SingularGram)?;
    let coeffs = chol.solve(&rhs);
    Ok((norm_sq - rhs.dot(&coeffs)).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::{explicit, jitter_adversarial, jitter_uniform};
    use approx::assert_abs_diff_eq;

    fn lattice(k: usize) -> PerturbationSet {
        PerturbationSet::identity(TranslationGrid::new(1, k).unwrap())
    }

    /// Inner products of hat translates by direct integration.
    fn brute_inner(t: f64) -> f64 {
        let n = 200_000;
        let h = 4.0 / n as f64;
        (0..n)
            .map(|i| {
                let x = -2.0 + (i as f64 + 0.5) * h;
                bspline(1, x) * bspline(1, x - t) * h
            })
            .sum()
    }

    #[test]
    fn identity_grams() {
        for g in [Generator::rect(), Generator::sinc()] {
            let m = gram_matrix(&g, &lattice(5)).unwrap();
            assert_eq!(m, DMatrix::identity(11, 11));
        }
    }

    #[test]
    fn hat_gram_is_tridiagonal() {
        let m = gram_matrix(&Generator::bspline(1), &lattice(5)).unwrap();
        for j in 0..11usize {
            for k in 0..11 {
                let expected = match j.abs_diff(k) {
                    0 => 2.0 / 3.0,
                    1 => 1.0 / 6.0,
                    _ => 0.0,
                };
                assert_abs_diff_eq!(m[(j, k)], expected, epsilon = 1e-15);
            }
        }
        for t in [0.0, 0.3, 1.0, 1.7] {
            assert_abs_diff_eq!(
                autocorrelation(&Generator::bspline(1), t).unwrap(),
                brute_inner(t),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn step_and_tabulated_correlations_agree() {
        let hat = Generator::tabulated(vec![0.0, 1.0, 0.0], 1.0, (-1.0, 1.0)).unwrap();
        for t in [0.0, 0.25, 0.5, 1.3] {
            assert_abs_diff_eq!(
                autocorrelation(&hat, t).unwrap(),
                autocorrelation(&Generator::bspline(1), t).unwrap(),
                epsilon = 1e-13
            );
        }
        let step = Generator::step(vec![0.5, 1.0, -0.25]).unwrap();
        assert_abs_diff_eq!(
            autocorrelation(&step, 0.0).unwrap(),
            0.25 + 1.0 + 0.0625,
            epsilon = 1e-15
        );
    }

    #[test]
    fn hat_gram_eigenvalues_bracketed() {
        let mut last_min = f64::INFINITY;
        for k in [16, 32, 64, 128] {
            let (lo, hi) =
                empirical_bounds_p2(&gram_matrix(&Generator::bspline(1), &lattice(k)).unwrap())
                    .unwrap();
            assert!(lo >= 1.0 / 3.0 - 1e-8 && hi <= 1.0 + 1e-8);
            assert!(lo <= last_min);
            last_min = lo;
        }
    }

    #[test]
    fn global_shift_keeps_spectrum() {
        let shifted =
            jitter_adversarial(TranslationGrid::new(1, 16).unwrap(), 0.3, &[-1.0]).unwrap();
        let a = empirical_bounds_p2(&gram_matrix(&Generator::bspline(2), &lattice(16)).unwrap())
            .unwrap();
        let b =
            empirical_bounds_p2(&gram_matrix(&Generator::bspline(2), &shifted).unwrap()).unwrap();
        assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-12);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            empirical_bounds_p2(&m),
            Err(QsisError::NumericalBreakdown(_))
        ));
    }

    #[test]
    fn tensor_gram_is_kronecker_product() {
        let t = Generator::tensor(vec![Generator::bspline(1), Generator::rect()]).unwrap();
        let y = PerturbationSet::identity(TranslationGrid::new(2, 4).unwrap());
        let (lo, hi) = empirical_bounds_p2(&gram_matrix(&t, &y).unwrap()).unwrap();
        let (lo1, hi1) =
            empirical_bounds_p2(&gram_matrix(&Generator::bspline(1), &lattice(4)).unwrap())
                .unwrap();
        assert_abs_diff_eq!(lo, lo1, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, hi1, epsilon = 1e-12);
    }

    #[test]
    fn integer_exponentials_are_orthonormal() {
        assert_eq!(exponential_gram(&lattice(8)).unwrap(), (1.0, 1.0));
        let b = exponential_bounds(&lattice(8)).unwrap();
        assert_eq!((b.a1, b.b1), (1.0, 1.0));
    }

    #[test]
    fn kadec_jitter_keeps_gram_positive() {
        let y = jitter_uniform(TranslationGrid::new(1, 32).unwrap(), 0.2, 1).unwrap();
        let (lo, hi) = exponential_gram(&y).unwrap();
        assert!(lo > 0.0 && hi < 4.0);
        let y2 = jitter_uniform(TranslationGrid::new(2, 3).unwrap(), 0.2, 1).unwrap();
        assert!(exponential_gram(&y2).unwrap().0 > 0.0);
    }

    #[test]
    fn duplicated_node_is_singular() {
        let y = explicit(TranslationGrid::new(1, 8).unwrap(), &[(vec![1], vec![0.0])]).unwrap();
        let (lo, _) = exponential_gram(&y).unwrap();
        assert!(lo.abs() < 1e-10);
    }

    #[test]
    fn problem1_gap_is_unreachable() {
        let r = problem1_residual(0.3, 32).unwrap();
        assert_abs_diff_eq!(r.perturbed, 0.3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.unperturbed, 0.21f64.sqrt(), epsilon = 1e-12);
        assert!(r.perturbed > r.unperturbed);
        let zero = problem1_residual(0.0, 8).unwrap();
        assert_eq!((zero.perturbed, zero.unperturbed), (0.0, 0.0));
        assert!(problem1_residual(1.0, 8).is_err());
    }
}
