use serde::{Deserialize, Serialize};

use crate::error::{QsisError, Result};

/// Which inequality the constants refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `A‖d‖ ≤ ‖Σ d_k τ_k ψ‖_p ≤ B‖d‖`.
    Unsquared,
    /// `A‖d‖² ≤ ‖Σ d_k τ_k ψ‖₂² ≤ B‖d‖²` (spectral bounds).
    Squared,
}

impl Convention {
    fn other(self) -> Self {
        match self {
            Convention::Unsquared => Convention::Squared,
            Convention::Squared => Convention::Unsquared,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Spectrum,
    /// Empirical estimate from finite sections; not certified.
    Oracle,
    User,
    Paper,
}

/// Riesz/frame constants `0 < A ≤ B` with an explicit convention tag.
///
/// Both conventions are held at construction, so converting back and forth
/// reproduces the original values bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds")]
pub struct FrameBounds {
    lower: f64,
    upper: f64,
    convention: Convention,
    provenance: Provenance,
    counterpart_lower: f64,
    counterpart_upper: f64,
}

#[derive(Deserialize)]
struct RawBounds {
    lower: f64,
    upper: f64,
    convention: Convention,
    provenance: Provenance,
    counterpart_lower: Option<f64>,
    counterpart_upper: Option<f64>,
}

impl TryFrom<RawBounds> for FrameBounds {
    type Error = QsisError;
    fn try_from(raw: RawBounds) -> Result<Self> {
        let mut b = FrameBounds::new(raw.lower, raw.upper, raw.convention, raw.provenance)?;
        if let (Some(l), Some(u)) = (raw.counterpart_lower, raw.counterpart_upper) {
            b.counterpart_lower = l;
            b.counterpart_upper = u;
        }
        Ok(b)
    }
}

impl FrameBounds {
    pub fn new(
        lower: f64,
        upper: f64,
        convention: Convention,
        provenance: Provenance,
    ) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower > 0.0 && lower <= upper) {
            return Err(QsisError::NonPositiveBounds { lower, upper });
        }
        let (counterpart_lower, counterpart_upper) = match convention {
            Convention::Unsquared => (lower * lower, upper * upper),
            Convention::Squared => (lower.sqrt(), upper.sqrt()),
        };
        Ok(Self {
            lower,
            upper,
            convention,
            provenance,
            counterpart_lower,
            counterpart_upper,
        })
    }

    pub fn unsquared(lower: f64, upper: f64, provenance: Provenance) -> Result<Self> {
        Self::new(lower, upper, Convention::Unsquared, provenance)
    }

    pub fn squared(lower: f64, upper: f64, provenance: Provenance) -> Result<Self> {
        Self::new(lower, upper, Convention::Squared, provenance)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn to_convention(&self, target: Convention) -> Self {
        if target == self.convention {
            return *self;
        }
        Self {
            lower: self.counterpart_lower,
            upper: self.counterpart_upper,
            convention: self.convention.other(),
            provenance: self.provenance,
            counterpart_lower: self.lower,
            counterpart_upper: self.upper,
        }
    }

    pub fn to_unsquared(&self) -> Self {
        self.to_convention(Convention::Unsquared)
    }

    pub fn to_squared(&self) -> Self {
        self.to_convention(Convention::Squared)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_invalid_bounds() {
        assert!(FrameBounds::unsquared(0.0, 1.0, Provenance::User).is_err());
        assert!(FrameBounds::unsquared(2.0, 1.0, Provenance::User).is_err());
        assert!(FrameBounds::unsquared(f64::NAN, 1.0, Provenance::User).is_err());
    }

    #[test]
    fn converts_by_square_root() {
        let b = FrameBounds::squared(1.0 / 3.0, 1.0, Provenance::Spectrum).unwrap();
        let u = b.to_unsquared();
        assert_eq!(u.convention(), Convention::Unsquared);
        assert!((u.lower() - (1.0f64 / 3.0).sqrt()).abs() < 1e-16);
        assert_eq!(u.provenance(), Provenance::Spectrum);
    }

    proptest! {
        #[test]
        fn convention_round_trip_is_exact(a in 1e-6f64..10.0, ratio in 1.0f64..100.0) {
            let b = FrameBounds::squared(a, a * ratio, Provenance::User).unwrap();
            let back = b.to_unsquared().to_squared();
            prop_assert_eq!(back, b);
            let u = FrameBounds::unsquared(a, a * ratio, Provenance::User).unwrap();
            prop_assert_eq!(u.to_squared().to_unsquared(), u);
        }

        #[test]
        fn json_round_trip(a in 1e-6f64..10.0, ratio in 1.0f64..100.0) {
            let b = FrameBounds::squared(a, a * ratio, Provenance::Oracle).unwrap().to_unsquared();
            let back: FrameBounds = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
            prop_assert_eq!(back, b);
        }
    }
}
