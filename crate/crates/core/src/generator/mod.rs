//! Window functions whose translates span the spaces under study.
//!
//! Translates are placed with the signal-processing sign: the translate "at"
//! `y` is `x ↦ ψ(x − y)`. Every norm the crate certifies is invariant under
//! the reflection `Y ↦ −Y`, so this agrees with the `τ_s f(x) = f(x + s)`
//! convention up to relabelling.

mod norms;
mod spec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QsisError, Result};

pub(crate) use norms::grad_lp_power;
pub use norms::{convolve_rect, grad_lp_norm, gradient_constant, lp_norm, modulus_continuity};
pub use spec::GeneratorSpec;

/// `L^p` exponent `p ∈ [1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent(f64);

/// Hölder dual of an [`Exponent`]; `p = 1` has an infinite dual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualExponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Self(p))
        } else {
            Err(QsisError::ExponentOutOfRange(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn dual(self) -> DualExponent {
        if self.0 == 1.0 {
            DualExponent::Infinite
        } else {
            DualExponent::Finite(self.0 / (self.0 - 1.0))
        }
    }

    /// The dual exponent, or [`QsisError::DualExponentInfinite`] when `p = 1`.
    pub fn finite_dual(self) -> Result<f64> {
        match self.dual() {
            DualExponent::Finite(q) => Ok(q),
            DualExponent::Infinite => Err(QsisError::DualExponentInfinite),
        }
    }
}

impl TryFrom<f64> for Exponent {
    type Error = QsisError;
    fn try_from(p: f64) -> Result<Self> {
        Exponent::new(p)
    }
}

impl From<Exponent> for f64 {
    fn from(p: Exponent) -> f64 {
        p.0
    }
}

/// Closed box or the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Box(Vec<(f64, f64)>),
    Unbounded,
}

impl Support {
    pub fn as_box(&self) -> Option<&[(f64, f64)]> {
        match self {
            Support::Box(b) => Some(b),
            Support::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothnessFlags {
    pub compact_support: bool,
    pub band_limited: bool,
    pub in_w1p: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    Rect,
    BSpline {
        order: u32,
    },
    Sinc,
    /// `Σ_{|j|≤J} s_j rect(x − j)`; `coeffs[i]` holds `s_{i−J}`.
    Step {
        coeffs: Vec<f64>,
    },
    /// Linear interpolation of `samples` taken at `support.0 + i·step`.
    Tabulated {
        samples: Vec<f64>,
        step: f64,
        support: (f64, f64),
    },
    TensorProduct {
        factors: Vec<Generator>,
    },
}

/// A window `ψ` together with its derived metadata.
///
/// Values are immutable; all metadata is computed from the kind, so the
/// support and smoothness invariants hold by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneratorSpec", into = "GeneratorSpec")]
pub struct Generator {
    kind: GeneratorKind,
}

impl Generator {
    pub fn rect() -> Self {
        Self {
            kind: GeneratorKind::Rect,
        }
    }

    /// `β_m`, the `(m+1)`-fold convolution power of rect.
    pub fn bspline(order: u32) -> Self {
        Self {
            kind: GeneratorKind::BSpline { order },
        }
    }

    pub fn sinc() -> Self {
        Self {
            kind: GeneratorKind::Sinc,
        }
    }

    /// Step function from `2J + 1` coefficients `s_{−J}, …, s_J`.
    pub fn step(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len().is_multiple_of(2) {
            return Err(QsisError::InvalidParameter(format!(
                "step needs 2J+1 coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(QsisError::InvalidParameter(
                "non-finite step coefficient".into(),
            ));
        }
        Ok(Self {
            kind: GeneratorKind::Step { coeffs },
        })
    }

    /// Step function `Σ_j s_j rect(x − j)` from `(j, s_j)` pairs, padded to a
    /// symmetric index range `|j| ≤ J`.
    pub fn step_from_pairs(pairs: &[(i64, f64)]) -> Result<Self> {
        let half = pairs
            .iter()
            .map(|(j, _)| j.unsigned_abs())
            .max()
            .unwrap_or(0) as usize;
        let mut coeffs = vec![0.0; 2 * half + 1];
        for &(j, s) in pairs {
            coeffs[(j + half as i64) as usize] += s;
        }
        Self::step(coeffs)
    }

    pub fn tabulated(samples: Vec<f64>, step: f64, support: (f64, f64)) -> Result<Self> {
        if samples.len() < 2 {
            return Err(QsisError::InvalidParameter(
                "tabulated needs at least two samples".into(),
            ));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(QsisError::InvalidParameter(format!(
                "tabulated step must be positive, got {step}"
            )));
        }
        let (a, b) = support;
        let expected = a + (samples.len() - 1) as f64 * step;
        if !(a.is_finite() && b.is_finite()) || (expected - b).abs() > 1e-9 * (1.0 + b.abs()) {
            return Err(QsisError::InvalidParameter(format!(
                "tabulated support [{a}, {b}] does not match {} samples at step {step}",
                samples.len()
            )));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(QsisError::InvalidParameter(
                "non-finite tabulated sample".into(),
            ));
        }
        Ok(Self {
            kind: GeneratorKind::Tabulated {
                samples,
                step,
                support,
            },
        })
    }

    /// Tensor product of one-dimensional factors.
    pub fn tensor(factors: Vec<Generator>) -> Result<Self> {
        if factors.is_empty() {
            return Err(QsisError::InvalidParameter(
                "tensor product needs at least one factor".into(),
            ));
        }
        if factors.iter().any(|f| f.dimension() != 1) {
            return Err(QsisError::InvalidParameter(
                "tensor factors must be one-dimensional".into(),
            ));
        }
        Ok(Self {
            kind: GeneratorKind::TensorProduct { factors },
        })
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GeneratorKind::Rect => "rect".into(),
            GeneratorKind::BSpline { order } => format!("bspline({order})"),
            GeneratorKind::Sinc => "sinc".into(),
            GeneratorKind::Step { coeffs } => format!("step(J={})", coeffs.len() / 2),
            GeneratorKind::Tabulated { samples, .. } => {
                format!("tabulated({} samples)", samples.len())
            }
            GeneratorKind::TensorProduct { factors } => {
                let names: Vec<_> = factors.iter().map(Generator::name).collect();
                format!("tensor[{}]", names.join(" x "))
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            GeneratorKind::TensorProduct { factors } => factors.len(),
            _ => 1,
        }
    }

    /// One-dimensional factors (the generator itself when scalar).
    pub fn factors(&self) -> Vec<&Generator> {
        match &self.kind {
            GeneratorKind::TensorProduct { factors } => factors.iter().collect(),
            _ => vec![self],
        }
    }

    pub fn support(&self) -> Support {
        match &self.kind {
            GeneratorKind::Rect => Support::Box(vec![(-0.5, 0.5)]),
            GeneratorKind::BSpline { order } => {
                let h = (*order as f64 + 1.0) / 2.0;
                Support::Box(vec![(-h, h)])
            }
            GeneratorKind::Sinc => Support::Unbounded,
            GeneratorKind::Step { coeffs } => {
                let j = (coeffs.len() / 2) as f64;
                Support::Box(vec![(-j - 0.5, j + 0.5)])
            }
            GeneratorKind::Tabulated { support, .. } => Support::Box(vec![*support]),
            GeneratorKind::TensorProduct { factors } => {
                let mut sides = Vec::with_capacity(factors.len());
                for f in factors {
                    match f.support() {
                        Support::Box(b) => sides.extend(b),
                        Support::Unbounded => return Support::Unbounded,
                    }
                }
                Support::Box(sides)
            }
        }
    }

    pub fn flags(&self) -> SmoothnessFlags {
        match &self.kind {
            GeneratorKind::Rect | GeneratorKind::Step { .. } => SmoothnessFlags {
                compact_support: true,
                band_limited: false,
                in_w1p: false,
            },
            GeneratorKind::BSpline { order } => SmoothnessFlags {
                compact_support: true,
                band_limited: false,
                in_w1p: *order >= 1,
            },
            // sinc' decays like 1/x and is not in L^1; treated as outside W^{1,p}.
            GeneratorKind::Sinc => SmoothnessFlags {
                compact_support: false,
                band_limited: true,
                in_w1p: false,
            },
            GeneratorKind::Tabulated { samples, .. } => SmoothnessFlags {
                compact_support: true,
                band_limited: false,
                in_w1p: samples[0] == 0.0 && samples[samples.len() - 1] == 0.0,
            },
            GeneratorKind::TensorProduct { factors } => {
                let fl: Vec<_> = factors.iter().map(Generator::flags).collect();
                SmoothnessFlags {
                    compact_support: fl.iter().all(|f| f.compact_support),
                    band_limited: fl.iter().all(|f| f.band_limited),
                    in_w1p: fl.iter().all(|f| f.in_w1p),
                }
            }
        }
    }

    /// `ψ(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            GeneratorKind::TensorProduct { factors } => {
                factors.iter().zip(x).map(|(f, &xi)| f.eval1(xi)).product()
            }
            _ => self.eval1(x[0]),
        }
    }

    /// `ψ(x)` for a scalar generator.
    pub fn eval1(&self, x: f64) -> f64 {
        match &self.kind {
            GeneratorKind::Rect => rect(x),
            GeneratorKind::BSpline { order } => bspline(*order, x),
            GeneratorKind::Sinc => sinc(x),
            GeneratorKind::Step { coeffs } => {
                let half = (coeffs.len() / 2) as i64;
                // rect(x − j) = 1 iff j = round-half-down of x
                let j = (x + 0.5).floor() as i64;
                if j.abs() <= half {
                    coeffs[(j + half) as usize]
                } else {
                    0.0
                }
            }
            GeneratorKind::Tabulated {
                samples,
                step,
                support,
            } => tabulated_eval(samples, *step, *support, x),
            GeneratorKind::TensorProduct { factors } => {
                debug_assert_eq!(factors.len(), 1, "eval1 on a multi-dimensional tensor");
                factors[0].eval1(x)
            }
        }
    }

    /// Derivative of a scalar Sobolev generator (a.e. value).
    pub fn derivative1(&self, x: f64) -> Result<f64> {
        match &self.kind {
            GeneratorKind::BSpline { order } if *order >= 1 => {
                Ok(bspline(order - 1, x + 0.5) - bspline(order - 1, x - 0.5))
            }
            GeneratorKind::Tabulated {
                samples,
                step,
                support,
            } if self.flags().in_w1p => {
                let (a, b) = *support;
                if x < a || x >= b {
                    return Ok(0.0);
                }
                let i = (((x - a) / step).floor() as usize).min(samples.len() - 2);
                Ok((samples[i + 1] - samples[i]) / step)
            }
            GeneratorKind::TensorProduct { factors } if factors.len() == 1 => {
                factors[0].derivative1(x)
            }
            _ => Err(QsisError::NotSobolev(self.name())),
        }
    }

    /// `∂_axis ψ(x)`.
    pub fn partial(&self, axis: usize, x: &[f64]) -> Result<f64> {
        match &self.kind {
            GeneratorKind::TensorProduct { factors } => {
                let mut v = 1.0;
                for (j, (f, &xj)) in factors.iter().zip(x).enumerate() {
                    v *= if j == axis {
                        f.derivative1(xj)?
                    } else {
                        f.eval1(xj)
                    };
                }
                Ok(v)
            }
            _ if axis == 0 => self.derivative1(x[0]),
            _ => Err(QsisError::InvalidParameter(format!(
                "axis {axis} out of range"
            ))),
        }
    }

    /// Breakpoints of a scalar compactly supported generator, sorted.
    pub fn knots1(&self) -> Option<Vec<f64>> {
        match &self.kind {
            GeneratorKind::Rect => Some(vec![-0.5, 0.5]),
            GeneratorKind::BSpline { order } => {
                let h = (*order as f64 + 1.0) / 2.0;
                Some((0..=order + 1).map(|i| -h + i as f64).collect())
            }
            GeneratorKind::Step { coeffs } => {
                let half = (coeffs.len() / 2) as i64;
                Some((-half..=half + 1).map(|j| j as f64 - 0.5).collect())
            }
            GeneratorKind::Tabulated {
                samples,
                step,
                support,
            } => Some(
                (0..samples.len())
                    .map(|i| support.0 + i as f64 * step)
                    .collect(),
            ),
            GeneratorKind::Sinc => None,
            GeneratorKind::TensorProduct { factors } if factors.len() == 1 => factors[0].knots1(),
            GeneratorKind::TensorProduct { .. } => None,
        }
    }

    /// Polynomial degree of a scalar generator between knots.
    pub fn piece_degree(&self) -> Option<u32> {
        match &self.kind {
            GeneratorKind::Rect | GeneratorKind::Step { .. } => Some(0),
            GeneratorKind::BSpline { order } => Some(*order),
            GeneratorKind::Tabulated { .. } => Some(1),
            GeneratorKind::Sinc => None,
            GeneratorKind::TensorProduct { factors } if factors.len() == 1 => {
                factors[0].piece_degree()
            }
            GeneratorKind::TensorProduct { .. } => None,
        }
    }

    /// `ψ̂(ξ) = ∫ ψ(x) e^{2πi x·ξ} dx` in closed form.
    pub fn fourier(&self, xi: &[f64]) -> Result<Complex64> {
        match &self.kind {
            GeneratorKind::TensorProduct { factors } => {
                let mut v = Complex64::new(1.0, 0.0);
                for (f, &x) in factors.iter().zip(xi) {
                    v *= f.fourier1(x)?;
                }
                Ok(v)
            }
            _ => self.fourier1(xi[0]),
        }
    }

    pub fn fourier1(&self, xi: f64) -> Result<Complex64> {
        match &self.kind {
            GeneratorKind::Rect => Ok(Complex64::new(sinc(xi), 0.0)),
            GeneratorKind::BSpline { order } => {
                Ok(Complex64::new(sinc(xi).powi(*order as i32 + 1), 0.0))
            }
            GeneratorKind::Sinc => Ok(Complex64::new(rect(xi), 0.0)),
            GeneratorKind::Step { coeffs } => {
                let half = (coeffs.len() / 2) as i64;
                let symbol: Complex64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| {
                        let j = i as i64 - half;
                        s * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 * xi)
                    })
                    .sum();
                Ok(symbol * sinc(xi))
            }
            GeneratorKind::Tabulated { .. } => Err(QsisError::NoClosedFormTransform(self.name())),
            GeneratorKind::TensorProduct { factors } if factors.len() == 1 => {
                factors[0].fourier1(xi)
            }
            GeneratorKind::TensorProduct { .. } => Err(QsisError::UnsupportedDimension {
                given: self.dimension(),
                supported: 1,
            }),
        }
    }
}

/// `χ_{[−1/2, 1/2)}`.
pub fn rect(x: f64) -> f64 {
    if (-0.5..0.5).contains(&x) {
        1.0
    } else {
        0.0
    }
}

/// `sin(πx)/(πx)`, exactly zero at nonzero integers.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.fract() == 0.0 {
        0.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Centered B-spline `β_m` by the Cox–de Boor recursion on knots `−(m+1)/2 + i`.
pub fn bspline(order: u32, x: f64) -> f64 {
    let m = order as usize;
    let h = (order as f64 + 1.0) / 2.0;
    if x < -h || x >= h {
        return 0.0;
    }
    let t = |i: usize| -h + i as f64;
    // degree-0 pieces, half-open [t_i, t_{i+1})
    let mut n: Vec<f64> = (0..=m)
        .map(|i| if t(i) <= x && x < t(i + 1) { 1.0 } else { 0.0 })
        .collect();
    for k in 1..=m {
        let kf = k as f64;
        for i in 0..=(m - k) {
            n[i] = (x - t(i)) / kf * n[i] + (t(i + k + 1) - x) / kf * n[i + 1];
        }
    }
    n[0]
}

fn tabulated_eval(samples: &[f64], step: f64, support: (f64, f64), x: f64) -> f64 {
    let (a, b) = support;
    if x < a || x > b {
        return 0.0;
    }
    let pos = (x - a) / step;
    let i = (pos.floor() as usize).min(samples.len() - 2);
    let frac = pos - i as f64;
    samples[i] + frac * (samples[i + 1] - samples[i])
}
