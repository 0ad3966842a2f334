use serde::{Deserialize, Serialize};

use super::{Generator, GeneratorKind};
use crate::error::{QsisError, Result};

/// JSON form of a [`Generator`].
///
/// ```json
/// {"kind": "bspline", "order": 2}
/// {"kind": "step", "J": 1, "coeffs": [0.25, 1.0, 0.25]}
/// {"kind": "tensor", "factors": [{"kind": "bspline", "order": 1}, {"kind": "rect"}]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorSpec {
    Rect,
    Bspline {
        order: u32,
    },
    Sinc,
    Step {
        coeffs: Vec<f64>,
        #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
        half_width: Option<usize>,
    },
    Tabulated {
        samples: Vec<f64>,
        step: f64,
        support: [f64; 2],
    },
    Tensor {
        factors: Vec<GeneratorSpec>,
    },
}

impl TryFrom<GeneratorSpec> for Generator {
    type Error = QsisError;

    fn try_from(spec: GeneratorSpec) -> Result<Self> {
        match spec {
            GeneratorSpec::Rect => Ok(Generator::rect()),
            GeneratorSpec::Bspline { order } => Ok(Generator::bspline(order)),
            GeneratorSpec::Sinc => Ok(Generator::sinc()),
            GeneratorSpec::Step { coeffs, half_width } => {
                if let Some(j) = half_width {
                    if coeffs.len() != 2 * j + 1 {
                        return Err(QsisError::InvalidParameter(format!(
                            "step with J = {j} needs {} coefficients, got {}",
                            2 * j + 1,
                            coeffs.len()
                        )));
                    }
                }
                Generator::step(coeffs)
            }
            GeneratorSpec::Tabulated {
                samples,
                step,
                support,
            } => Generator::tabulated(samples, step, (support[0], support[1])),
            GeneratorSpec::Tensor { factors } => {
                let factors = factors
                    .into_iter()
                    .map(Generator::try_from)
                    .collect::<Result<Vec<_>>>()?;
                Generator::tensor(factors)
            }
        }
    }
}

impl From<Generator> for GeneratorSpec {
    fn from(g: Generator) -> Self {
        match g.kind {
            GeneratorKind::Rect => GeneratorSpec::Rect,
            GeneratorKind::BSpline { order } => GeneratorSpec::Bspline { order },
            GeneratorKind::Sinc => GeneratorSpec::Sinc,
            GeneratorKind::Step { coeffs } => {
                let j = coeffs.len() / 2;
                GeneratorSpec::Step {
                    coeffs,
                    half_width: Some(j),
                }
            }
            GeneratorKind::Tabulated {
                samples,
                step,
                support,
            } => GeneratorSpec::Tabulated {
                samples,
                step,
                support: [support.0, support.1],
            },
            GeneratorKind::TensorProduct { factors } => GeneratorSpec::Tensor {
                factors: factors.into_iter().map(GeneratorSpec::from).collect(),
            },
        }
    }
}

impl Generator {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let cases = [
            r#"{"kind":"rect"}"#,
            r#"{"kind":"bspline","order":3}"#,
            r#"{"kind":"sinc"}"#,
            r#"{"kind":"step","J":1,"coeffs":[0.25,1.0,0.25]}"#,
            r#"{"kind":"tabulated","samples":[0,1,0],"step":0.5,"support":[-0.5,0.5]}"#,
            r#"{"kind":"tensor","factors":[{"kind":"bspline","order":1},{"kind":"rect"}]}"#,
        ];
        for text in cases {
            let g = Generator::from_json(text).unwrap();
            let back: Generator =
                serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
            assert_eq!(g, back, "{text}");
        }
    }

    #[test]
    fn rejects_unknown_kind() {
        assert!(Generator::from_json(r#"{"kind":"gaussian"}"#).is_err());
        assert!(Generator::from_json(r#"{"order":2}"#).is_err());
    }

    #[test]
    fn rejects_inconsistent_step() {
        assert!(Generator::from_json(r#"{"kind":"step","J":2,"coeffs":[1,1,1]}"#).is_err());
        assert!(Generator::from_json(r#"{"kind":"step","coeffs":[1,1]}"#).is_err());
    }
}
