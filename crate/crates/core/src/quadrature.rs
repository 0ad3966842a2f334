//! Breakpoint-aligned Gauss–Legendre quadrature.
//!
//! Every integrand handled by the crate is piecewise smooth with known
//! breakpoints (knots of translated windows). Panels are placed between
//! consecutive breakpoints, so piecewise-polynomial integrands are integrated
//! exactly whenever `|f|^p` is itself a polynomial on each panel, and with
//! small, controllable error otherwise.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{QsisError, Result};

/// Order of the rule used on subdivided panels when the integrand is not a
/// polynomial on the panel.
const SUBDIVISION_ORDER: usize = 8;
const MAX_CACHED_ORDER: usize = 64;

/// Resolution and truncation used for `L^p` quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Quadrature nodes per unit length on panels that cannot be integrated exactly.
    pub points_per_unit: usize,
    /// Truncation radius for generators with unbounded support.
    pub truncation_radius: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            points_per_unit: 512,
            truncation_radius: Some(64.0),
        }
    }
}

impl QuadratureSpec {
    pub const MIN_POINTS_PER_UNIT: usize = 16;

    pub fn validate(&self) -> Result<()> {
        if self.points_per_unit < Self::MIN_POINTS_PER_UNIT {
            return Err(QsisError::GridTooCoarse {
                given: self.points_per_unit,
                minimum: Self::MIN_POINTS_PER_UNIT,
            });
        }
        if let Some(r) = self.truncation_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(QsisError::InvalidParameter(format!(
                    "truncation radius must be positive, got {r}"
                )));
            }
        }
        Ok(())
    }

    fn max_subpanel_width(&self) -> f64 {
        SUBDIVISION_ORDER as f64 / self.points_per_unit as f64
    }
}

/// Cached Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(order: usize) -> &'static [(f64, f64)] {
    static TABLES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=MAX_CACHED_ORDER)
            .map(|n| match NonZeroUsize::new(n) {
                Some(n) => GaussLegendre::new(n).as_node_weight_pairs().to_vec(),
                None => Vec::new(),
            })
            .collect()
    });
    &tables[order.clamp(1, MAX_CACHED_ORDER)]
}

/// How the integrand behaves between consecutive breakpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PanelShape {
    /// `|f|^p` where `f` is a polynomial of the given degree on each panel.
    Polynomial { degree: u32, p: f64 },
    /// Anything else: smooth but not polynomial.
    Smooth,
}

impl PanelShape {
    /// Number of nodes that integrate the panel exactly, if one exists.
    fn exact_order(self) -> Option<usize> {
        match self {
            PanelShape::Polynomial { degree: 0, .. } => Some(1),
            PanelShape::Polynomial { degree, p } => {
                let even = p.fract() == 0.0 && (p as u64).is_multiple_of(2);
                if even {
                    let total = p as usize * degree as usize;
                    Some((total + 2) / 2)
                } else {
                    None
                }
            }
            PanelShape::Smooth => None,
        }
    }
}

/// Nodes and weights of a composite rule.
#[derive(Debug, Clone, Default)]
pub(crate) struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Sorts and deduplicates breakpoints in place.
pub(crate) fn normalize_breaks(breaks: &mut Vec<f64>) {
    breaks.retain(|x| x.is_finite());
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
}

/// Builds a composite rule over the panels delimited by `breaks` (sorted).
pub(crate) fn panel_rule(breaks: &[f64], shape: PanelShape, spec: &QuadratureSpec) -> Rule {
    let mut rule = Rule::default();
    let exact = shape.exact_order();
    let width = spec.max_subpanel_width();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        match exact {
            Some(order) => push_panel(&mut rule, a, b, order),
            None => {
                let pieces = ((b - a) / width).ceil().max(1.0) as usize;
                let h = (b - a) / pieces as f64;
                for i in 0..pieces {
                    let lo = a + i as f64 * h;
                    let hi = if i + 1 == pieces { b } else { lo + h };
                    push_panel(&mut rule, lo, hi, SUBDIVISION_ORDER);
                }
            }
        }
    }
    rule
}

fn push_panel(rule: &mut Rule, a: f64, b: f64, order: usize) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for &(x, w) in gauss_legendre(order) {
        rule.nodes.push(mid + half * x);
        rule.weights.push(half * w);
    }
}

/// Integrates `f` over the product of one-dimensional composite rules.
pub(crate) fn integrate_product(axes: &[Rule], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let d = axes.len();
    if d == 0 || axes.iter().any(|r| r.len() == 0) {
        return 0.0;
    }
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (j, rule) in axes.iter().enumerate() {
            point[j] = rule.nodes[idx[j]];
            w *= rule.weights[idx[j]];
        }
        total += w * f(&point);
        // odometer increment, last axis fastest
        let mut axis = d;
        loop {
            if axis == 0 {
                return total;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_order_matches_polynomial_degree() {
        assert_eq!(
            PanelShape::Polynomial { degree: 0, p: 3.0 }.exact_order(),
            Some(1)
        );
        assert_eq!(
            PanelShape::Polynomial { degree: 1, p: 2.0 }.exact_order(),
            Some(2)
        );
        assert_eq!(
            PanelShape::Polynomial { degree: 3, p: 4.0 }.exact_order(),
            Some(7)
        );
        assert_eq!(
            PanelShape::Polynomial { degree: 1, p: 3.0 }.exact_order(),
            None
        );
    }

    #[test]
    fn panel_rule_integrates_piecewise_quadratic_exactly() {
        let breaks = vec![-1.0, 0.0, 0.5, 2.0];
        let rule = panel_rule(
            &breaks,
            PanelShape::Polynomial { degree: 1, p: 2.0 },
            &QuadratureSpec::default(),
        );
        let v = rule.integrate(|x| if x < 0.0 { (1.0 + x).powi(2) } else { x * x });
        // 1/3 + 8/3
        assert_abs_diff_eq!(v, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn product_rule_multiplies_volumes() {
        let spec = QuadratureSpec::default();
        let shape = PanelShape::Polynomial { degree: 0, p: 1.0 };
        let a = panel_rule(&[0.0, 2.0], shape, &spec);
        let b = panel_rule(&[-1.0, 0.5], shape, &spec);
        let v = integrate_product(&[a, b], |_| 1.0);
        assert_abs_diff_eq!(v, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn coarse_spec_rejected() {
        let spec = QuadratureSpec {
            points_per_unit: 4,
            truncation_radius: None,
        };
        assert!(matches!(
            spec.validate(),
            Err(QsisError::GridTooCoarse { .. })
        ));
    }
}
