use super::{bspline, Exponent, Generator, GeneratorKind};
use crate::error::{QsisError, Result};
use crate::quadrature::{
    integrate_product, normalize_breaks, panel_rule, PanelShape, QuadratureSpec, Rule,
};

/// `‖ψ‖_p`, in closed form where one exists and by breakpoint-aligned
/// quadrature otherwise.
pub fn lp_norm(g: &Generator, p: Exponent, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    let pv = p.value();
    match g.kind() {
        GeneratorKind::TensorProduct { factors } => {
            let mut total = 1.0;
            for f in factors {
                total *= lp_norm(f, p, quad)?;
            }
            Ok(total)
        }
        GeneratorKind::Rect => Ok(1.0),
        GeneratorKind::Step { coeffs } => Ok(coeffs
            .iter()
            .map(|s| s.abs().powf(pv))
            .sum::<f64>()
            .powf(1.0 / pv)),
        GeneratorKind::Sinc => {
            if pv <= 1.0 {
                return Err(QsisError::NotIntegrable(g.name(), pv));
            }
            if pv == 2.0 {
                return Ok(1.0);
            }
            let radius = quad
                .truncation_radius
                .ok_or(QsisError::UnboundedSupportWithoutTruncation)?;
            let r = radius.ceil() as i64;
            let breaks: Vec<f64> = (-r..=r).map(|k| k as f64).collect();
            let rule = panel_rule(&breaks, PanelShape::Smooth, quad);
            Ok(rule.integrate(|x| g.eval1(x).abs().powf(pv)).powf(1.0 / pv))
        }
        GeneratorKind::BSpline { .. } | GeneratorKind::Tabulated { .. } => {
            let rule = scalar_rule(g, pv, quad);
            Ok(rule.integrate(|x| g.eval1(x).abs().powf(pv)).powf(1.0 / pv))
        }
    }
}

/// `‖∂_axis ψ‖_p` from the closed-form distributional derivative.
pub fn grad_lp_norm(g: &Generator, p: Exponent, axis: usize) -> Result<f64> {
    Ok(grad_lp_power(g, p, axis)?.powf(1.0 / p.value()))
}

/// `‖∂_axis ψ‖_p^p`.
pub(crate) fn grad_lp_power(g: &Generator, p: Exponent, axis: usize) -> Result<f64> {
    if !g.flags().in_w1p {
        return Err(QsisError::NotSobolev(g.name()));
    }
    if axis >= g.dimension() {
        return Err(QsisError::InvalidParameter(format!(
            "axis {axis} out of range for dimension {}",
            g.dimension()
        )));
    }
    let pv = p.value();
    let quad = QuadratureSpec::default();
    match g.kind() {
        GeneratorKind::TensorProduct { factors } => {
            let mut total = 1.0;
            for (j, f) in factors.iter().enumerate() {
                total *= if j == axis {
                    grad_lp_power(f, p, 0)?
                } else {
                    lp_norm(f, p, &quad)?.powf(pv)
                };
            }
            Ok(total)
        }
        GeneratorKind::BSpline { order } => {
            let knots = g.knots1().expect("bspline has knots");
            let rule = panel_rule(
                &knots,
                PanelShape::Polynomial {
                    degree: order - 1,
                    p: pv,
                },
                &quad,
            );
            let m = order - 1;
            Ok(rule.integrate(|x| (bspline(m, x + 0.5) - bspline(m, x - 0.5)).abs().powf(pv)))
        }
        GeneratorKind::Tabulated { samples, step, .. } => Ok(samples
            .windows(2)
            .map(|w| step * ((w[1] - w[0]) / step).abs().powf(pv))
            .sum()),
        _ => Err(QsisError::NotSobolev(g.name())),
    }
}

/// `(Σ_j ‖∂_j ψ‖_p²)^{1/2}`, a constant `c` with `‖τ_t ψ − ψ‖_p ≤ c |t|₂`.
pub fn gradient_constant(g: &Generator, p: Exponent) -> Result<f64> {
    let mut sum = 0.0;
    for axis in 0..g.dimension() {
        sum += grad_lp_norm(g, p, axis)?.powi(2);
    }
    Ok(sum.sqrt())
}

/// Estimate of `ω_p(δ, ψ) = sup_{|t| < δ} ‖τ_t ψ − ψ‖_p`, maximised over
/// `probes` shifts spread along axis and diagonal directions.
///
/// The supremum over the open ball is approached at `|t| = δ`, which is
/// included among the probes.
pub fn modulus_continuity(
    g: &Generator,
    delta: f64,
    p: Exponent,
    probes: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(QsisError::InvalidParameter(format!(
            "shift radius must be non-negative, got {delta}"
        )));
    }
    if probes == 0 {
        return Err(QsisError::InvalidParameter(
            "at least one probe is required".into(),
        ));
    }
    if delta == 0.0 {
        return Ok(0.0);
    }
    if g.support().as_box().is_none() {
        return Err(QsisError::UnboundedSupport);
    }
    quad.validate()?;
    let d = g.dimension();
    let directions = probe_directions(d);
    let per_direction = (probes / directions.len()).max(1);
    let mut best: f64 = 0.0;
    for dir in &directions {
        for k in 1..=per_direction {
            let r = delta * k as f64 / per_direction as f64;
            let t: Vec<f64> = dir.iter().map(|u| u * r).collect();
            best = best.max(shift_difference_norm(g, &t, p, quad));
        }
    }
    Ok(best)
}

fn probe_directions(d: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for j in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[j] = s;
            dirs.push(e);
        }
    }
    if d > 1 {
        let scale = 1.0 / (d as f64).sqrt();
        for mask in 0..(1usize << d) {
            dirs.push(
                (0..d)
                    .map(|j| if mask >> j & 1 == 1 { -scale } else { scale })
                    .collect(),
            );
        }
    }
    dirs
}

/// `‖ψ(· + t) − ψ‖_p` for a compactly supported generator.
pub(crate) fn shift_difference_norm(
    g: &Generator,
    t: &[f64],
    p: Exponent,
    quad: &QuadratureSpec,
) -> f64 {
    let pv = p.value();
    let axes: Vec<Rule> = g
        .factors()
        .iter()
        .zip(t)
        .map(|(f, &tj)| {
            let knots = f.knots1().expect("compact factor has knots");
            let mut breaks: Vec<f64> = knots
                .iter()
                .copied()
                .chain(knots.iter().map(|k| k - tj))
                .collect();
            normalize_breaks(&mut breaks);
            let degree = f.piece_degree().unwrap_or(0);
            panel_rule(&breaks, PanelShape::Polynomial { degree, p: pv }, quad)
        })
        .collect();
    let mut shifted = vec![0.0; t.len()];
    let integral = integrate_product(&axes, |x| {
        for (s, (xi, ti)) in shifted.iter_mut().zip(x.iter().zip(t)) {
            *s = xi + ti;
        }
        (g.eval(&shifted) - g.eval(x)).abs().powf(pv)
    });
    integral.powf(1.0 / pv)
}

/// `rect ∗ ψ`.
///
/// B-splines stay closed-form; steps and tabulated windows come back as
/// tabulated windows (exact on the integer grid for steps).
pub fn convolve_rect(g: &Generator) -> Result<Generator> {
    match g.kind() {
        GeneratorKind::Rect => Ok(Generator::bspline(1)),
        GeneratorKind::BSpline { order } => Ok(Generator::bspline(order + 1)),
        GeneratorKind::Sinc => Err(QsisError::UnboundedSupportWithoutTruncation),
        GeneratorKind::Step { coeffs } => {
            let half = (coeffs.len() / 2) as i64;
            let lo = -(half as f64) - 1.0;
            let subdivisions = 4;
            let n = (2 * half as usize + 2) * subdivisions + 1;
            let h = 1.0 / subdivisions as f64;
            let samples = (0..n)
                .map(|i| {
                    let x = lo + i as f64 * h;
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, &s)| s * bspline(1, x - (k as i64 - half) as f64))
                        .sum()
                })
                .collect();
            Generator::tabulated(samples, h, (lo, -lo))
        }
        GeneratorKind::Tabulated {
            samples,
            step,
            support,
        } => {
            let (a, b) = *support;
            let (lo, hi) = (a - 0.5, b + 0.5);
            let n = ((hi - lo) / (step / 8.0)).ceil() as usize;
            let h = (hi - lo) / n as f64;
            let out = (0..=n)
                .map(|i| {
                    let x = lo + i as f64 * h;
                    tabulated_integral(samples, *step, a, x - 0.5, x + 0.5)
                })
                .collect();
            Generator::tabulated(out, h, (lo, hi))
        }
        GeneratorKind::TensorProduct { .. } => Err(QsisError::UnsupportedDimension {
            given: g.dimension(),
            supported: 1,
        }),
    }
}

/// `∫_lo^hi` of the linear interpolant of `samples` starting at `a`.
fn tabulated_integral(samples: &[f64], step: f64, a: f64, lo: f64, hi: f64) -> f64 {
    let b = a + (samples.len() - 1) as f64 * step;
    let (lo, hi) = (lo.max(a), hi.min(b));
    if hi <= lo {
        return 0.0;
    }
    let first = ((lo - a) / step).floor().max(0.0) as usize;
    let last = (((hi - a) / step).ceil() as usize).min(samples.len() - 1);
    let mut total = 0.0;
    for i in first..last {
        let s = (a + i as f64 * step).max(lo);
        let e = (a + (i + 1) as f64 * step).min(hi);
        if e > s {
            // linear on [s, e]: trapezoid is exact; evaluate inside the segment
            let vs = samples[i] + ((s - a) / step - i as f64) * (samples[i + 1] - samples[i]);
            let ve = samples[i] + ((e - a) / step - i as f64) * (samples[i + 1] - samples[i]);
            total += 0.5 * (e - s) * (vs + ve);
        }
    }
    total
}

fn scalar_rule(g: &Generator, p: f64, quad: &QuadratureSpec) -> Rule {
    let knots = g.knots1().expect("compact scalar generator has knots");
    let degree = g.piece_degree().unwrap_or(0);
    panel_rule(&knots, PanelShape::Polynomial { degree, p }, quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn exp(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    /// Midpoint Riemann sum on a fine uniform grid, independent of the panel rules.
    fn brute_lp(f: impl Fn(f64) -> f64, a: f64, b: f64, p: f64) -> f64 {
        let n = 400_000;
        let h = (b - a) / n as f64;
        let s: f64 = (0..n)
            .map(|i| f(a + (i as f64 + 0.5) * h).abs().powf(p))
            .sum();
        (s * h).powf(1.0 / p)
    }

    #[test]
    fn rect_norm_is_one() {
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert_eq!(
                lp_norm(&Generator::rect(), exp(p), &QuadratureSpec::default()).unwrap(),
                1.0
            );
        }
    }

    #[test]
    fn hat_l2_norm() {
        // ∫_{-1}^{1} (1 − |t|)² dt = 2/3
        let v = lp_norm(&Generator::bspline(1), exp(2.0), &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(v, (2.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        let brute = brute_lp(|x| bspline(1, x), -1.0, 1.0, 2.0);
        assert_abs_diff_eq!(v, brute, epsilon = 1e-8);
    }

    #[test]
    fn bspline_norms_match_brute_force() {
        for m in 2..=4 {
            for p in [1.0, 1.5, 3.0] {
                let h = (m as f64 + 1.0) / 2.0;
                let v =
                    lp_norm(&Generator::bspline(m), exp(p), &QuadratureSpec::default()).unwrap();
                let brute = brute_lp(|x| bspline(m, x), -h, h, p);
                assert_abs_diff_eq!(v, brute, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn bspline_norm_facts() {
        let quad = QuadratureSpec::default();
        for m in 1..=6 {
            let g = Generator::bspline(m);
            // total mass is preserved by convolution
            assert_abs_diff_eq!(lp_norm(&g, exp(1.0), &quad).unwrap(), 1.0, epsilon = 1e-13);
            for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
                assert!(lp_norm(&g, exp(p), &quad).unwrap() <= 1.0 + 1e-12);
                assert!(grad_lp_norm(&g, exp(p), 0).unwrap() <= 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn hat_gradient_norm() {
        // β₁' = ±1 on a set of length 2
        for p in [1.0, 1.5, 2.0, 3.0] {
            let v = grad_lp_norm(&Generator::bspline(1), exp(p), 0).unwrap();
            assert_abs_diff_eq!(v, 2f64.powf(1.0 / p), epsilon = 1e-13);
        }
    }

    #[test]
    fn gradient_of_discontinuous_window_rejected() {
        assert!(matches!(
            grad_lp_norm(&Generator::rect(), exp(2.0), 0),
            Err(QsisError::NotSobolev(_))
        ));
        let s = Generator::step(vec![1.0, -1.0, 1.0]).unwrap();
        assert!(matches!(
            grad_lp_norm(&s, exp(2.0), 0),
            Err(QsisError::NotSobolev(_))
        ));
    }

    #[test]
    fn sinc_norm_needs_truncation_and_p_above_one() {
        let quad = QuadratureSpec {
            points_per_unit: 64,
            truncation_radius: None,
        };
        assert!(matches!(
            lp_norm(&Generator::sinc(), exp(3.0), &quad),
            Err(QsisError::UnboundedSupportWithoutTruncation)
        ));
        assert!(matches!(
            lp_norm(&Generator::sinc(), exp(1.0), &QuadratureSpec::default()),
            Err(QsisError::NotIntegrable(..))
        ));
        let quad = QuadratureSpec {
            points_per_unit: 64,
            truncation_radius: Some(64.0),
        };
        let v = lp_norm(&Generator::sinc(), exp(4.0), &quad).unwrap();
        // ∫ sinc⁴ = 2/3
        assert_abs_diff_eq!(v, (2.0f64 / 3.0).powf(0.25), epsilon = 1e-6);
    }

    #[test]
    fn tensor_norms_factor() {
        let t = Generator::tensor(vec![Generator::bspline(1), Generator::bspline(2)]).unwrap();
        let quad = QuadratureSpec::default();
        let v = lp_norm(&t, exp(2.0), &quad).unwrap();
        let a = lp_norm(&Generator::bspline(1), exp(2.0), &quad).unwrap();
        let b = lp_norm(&Generator::bspline(2), exp(2.0), &quad).unwrap();
        assert_abs_diff_eq!(v, a * b, epsilon = 1e-15);
        let g0 = grad_lp_norm(&t, exp(2.0), 0).unwrap();
        assert_abs_diff_eq!(g0, 2f64.sqrt() * b, epsilon = 1e-13);
        assert!(grad_lp_norm(&t, exp(2.0), 2).is_err());
    }

    #[test]
    fn rect_modulus_is_symmetric_difference() {
        // ‖τ_t rect − rect‖₁ = 2|t|
        let v = modulus_continuity(
            &Generator::rect(),
            0.1,
            exp(1.0),
            64,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(v, 0.2, epsilon = 1e-14);
        assert_eq!(
            modulus_continuity(
                &Generator::rect(),
                0.0,
                exp(2.0),
                8,
                &QuadratureSpec::default()
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn hat_modulus_below_gradient_bound() {
        let quad = QuadratureSpec::default();
        for p in [1.5, 2.0, 3.0] {
            let c = gradient_constant(&Generator::bspline(1), exp(p)).unwrap();
            for delta in [1e-3, 1e-2, 1e-1] {
                let w =
                    modulus_continuity(&Generator::bspline(1), delta, exp(p), 64, &quad).unwrap();
                assert!(
                    w <= c * delta + 1e-12,
                    "p={p} δ={delta}: {w} > {}",
                    c * delta
                );
            }
        }
        let w = modulus_continuity(&Generator::bspline(1), 0.1, exp(2.0), 64, &quad).unwrap();
        // exact: ‖τ_t β₁ − β₁‖₂² = 2t² − t³ at t = 0.1
        assert_abs_diff_eq!(w, (2.0 * 0.01 - 0.001f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn tensor_modulus_below_gradient_bound() {
        let t = Generator::tensor(vec![Generator::bspline(1), Generator::bspline(1)]).unwrap();
        let quad = QuadratureSpec {
            points_per_unit: 64,
            truncation_radius: None,
        };
        let c = gradient_constant(&t, exp(2.0)).unwrap();
        let w = modulus_continuity(&t, 0.05, exp(2.0), 16, &quad).unwrap();
        assert!(w > 0.0 && w <= c * 0.05 + 1e-12);
    }

    #[test]
    fn convolve_rect_closed_forms() {
        assert_eq!(
            convolve_rect(&Generator::rect()).unwrap(),
            Generator::bspline(1)
        );
        assert_eq!(
            convolve_rect(&Generator::bspline(1)).unwrap(),
            Generator::bspline(2)
        );
        assert!(matches!(
            convolve_rect(&Generator::sinc()),
            Err(QsisError::UnboundedSupportWithoutTruncation)
        ));
    }

    #[test]
    fn convolve_rect_of_step_is_exact_hat_sum() {
        let s = Generator::step(vec![0.5, -1.0, 2.0]).unwrap();
        let c = convolve_rect(&s).unwrap();
        assert!(c.flags().in_w1p);
        for i in -40..=40 {
            let x = i as f64 * 0.061;
            let expect: f64 = [(-1, 0.5), (0, -1.0), (1, 2.0)]
                .iter()
                .map(|&(j, sj)| sj * bspline(1, x - j as f64))
                .sum();
            assert_abs_diff_eq!(c.eval1(x), expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn young_inequality_for_sampled_steps() {
        // ‖rect ∗ g‖₁ ≤ ‖rect‖₁ ‖g‖₁ = ‖g‖₁
        let quad = QuadratureSpec::default();
        let cases = [
            vec![1.0, -1.0, 1.0],
            vec![0.25, 1.0, 0.25],
            vec![-2.0, 0.5, 3.0, -1.0, 0.1],
        ];
        for coeffs in cases {
            let g = Generator::step(coeffs).unwrap();
            let conv = convolve_rect(&g).unwrap();
            let lhs = lp_norm(&conv, exp(1.0), &quad).unwrap();
            let rhs = lp_norm(&g, exp(1.0), &quad).unwrap();
            assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
            let brute = brute_lp(|x| conv.eval1(x), -4.0, 4.0, 1.0);
            assert_abs_diff_eq!(lhs, brute, epsilon = 1e-6);
        }
    }

    #[test]
    fn convolve_rect_of_tabulated_hat_approximates_quadratic_spline() {
        let hat = Generator::tabulated(vec![0.0, 1.0, 0.0], 1.0, (-1.0, 1.0)).unwrap();
        let c = convolve_rect(&hat).unwrap();
        for i in -30..=30 {
            let x = i as f64 * 0.05;
            assert_abs_diff_eq!(c.eval1(x), bspline(2, x), epsilon = 5e-3);
        }
        // grid points carry the exact integral
        assert_abs_diff_eq!(c.eval1(0.0), 0.75, epsilon = 1e-14);
    }
}
