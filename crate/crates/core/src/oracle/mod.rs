//! Brute-force finite-section estimates used to check the spectral bounds and
//! the certificates: norm ratios, perturbation powers, Gram spectra.
//!
//! Translates are placed at `ψ(x − y_k)`. Every quantity computed here is
//! invariant under `Y ↦ −Y`, so the placement convention does not matter.

mod gram;

pub use gram::{
    empirical_bounds_p2, exponential_bounds, exponential_gram, gram_matrix, hermitian_extremes,
    problem1_residual, Problem1Residual,
};

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QsisError, Result};
use crate::generator::{Exponent, Generator, Support};
use crate::perturb::PerturbationSet;
use crate::quadrature::{normalize_breaks, panel_rule, PanelShape, QuadratureSpec};

/// Coefficients `a_k` over the index box, in grid order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub values: Vec<Complex64>,
    pub p: f64,
    pub normalized: bool,
}

impl CoefficientVector {
    pub fn new(values: Vec<Complex64>, p: Exponent) -> Self {
        Self {
            values,
            p: p.value(),
            normalized: false,
        }
    }

    pub fn lp_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|a| a.norm().powf(self.p))
            .sum::<f64>()
            .powf(1.0 / self.p)
    }

    /// Scales to unit `ℓ^p` norm; the zero vector is left unchanged.
    pub fn normalize(mut self) -> Self {
        let n = self.lp_norm();
        if n > 0.0 {
            for a in &mut self.values {
                *a /= n;
            }
            self.normalized = true;
        }
        self
    }

    /// Isotropic complex Gaussian draw, normalised.
    pub fn random(len: usize, p: Exponent, rng: &mut impl Rng) -> Self {
        let values = (0..len)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::new(values, p).normalize()
    }

    pub fn probe(probe: Probe, len: usize, p: Exponent) -> Self {
        let values = (0..len)
            .map(|i| match probe {
                Probe::Spike => Complex64::new(if i == len / 2 { 1.0 } else { 0.0 }, 0.0),
                Probe::Alternating => Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
                Probe::Ones => Complex64::new(1.0, 0.0),
            })
            .collect();
        Self::new(values, p).normalize()
    }
}

/// Deterministic coefficient patterns evaluated alongside random draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    /// Single coefficient at the centre index `k = 0`.
    Spike,
    /// `(−1)^k`.
    Alternating,
    Ones,
}

pub const PROBES: [Probe; 3] = [Probe::Spike, Probe::Alternating, Probe::Ones];

/// Pointwise `f(x) = Σ_k a_k ψ(x − y_k)`.
pub fn synthesize(
    g: &Generator,
    y: &PerturbationSet,
    a: &CoefficientVector,
    xs: &[Vec<f64>],
) -> Result<Vec<Complex64>> {
    if a.values.len() != y.len() {
        return Err(QsisError::InvalidParameter(
            "coefficient vector does not match the translation set".into(),
        ));
    }
    let points = y.points();
    Ok(xs
        .iter()
        .map(|x| {
            let mut shifted = vec![0.0; x.len()];
            a.values
                .iter()
                .zip(&points)
                .map(|(&c, yk)| {
                    for (s, (xi, yi)) in shifted.iter_mut().zip(x.iter().zip(yk)) {
                        *s = xi - yi;
                    }
                    c * g.eval(&shifted)
                })
                .sum()
        })
        .collect())
}

/// Quadrature-ready synthesis operator: for each node, the translates that
/// are nonzero there with their values.
#[derive(Debug, Clone)]
pub struct Synthesis {
    weights: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    p: f64,
}

impl Synthesis {
    /// Nodes lie on panels aligned with every breakpoint of every translate.
    pub fn new(
        g: &Generator,
        positions: &[f64],
        p: Exponent,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        quad.validate()?;
        if g.dimension() != 1 {
            return Err(QsisError::UnsupportedDimension {
                given: g.dimension(),
                supported: 1,
            });
        }
        let (a, b) = match g.support() {
            Support::Box(bx) => bx[0],
            Support::Unbounded => return Err(QsisError::UnboundedSupport),
        };
        let knots = g.knots1().ok_or(QsisError::UnboundedSupport)?;
        let degree = g.piece_degree().unwrap_or(0);
        let mut breaks: Vec<f64> = positions
            .iter()
            .flat_map(|y| knots.iter().map(move |k| y + k))
            .collect();
        normalize_breaks(&mut breaks);
        let rule = panel_rule(
            &breaks,
            PanelShape::Polynomial {
                degree,
                p: p.value(),
            },
            quad,
        );

        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by(|&i, &j| positions[i].total_cmp(&positions[j]));
        let sorted: Vec<f64> = order.iter().map(|&i| positions[i]).collect();
        let rows = rule
            .nodes
            .iter()
            .map(|&x| {
                // ψ(x − y) ≠ 0 needs y ∈ (x − b, x − a)
                let lo = sorted.partition_point(|&y| y < x - b);
                let hi = sorted.partition_point(|&y| y <= x - a);
                (lo..hi)
                    .filter_map(|s| {
                        let k = order[s];
                        let v = g.eval1(x - positions[k]);
                        (v != 0.0).then_some((k, v))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            weights: rule.weights,
            rows,
            p: p.value(),
        })
    }

    pub fn nodes(&self) -> usize {
        self.weights.len()
    }

    /// `∫ |Σ_k c_k ψ(x − y_k)|^p dx`.
    pub fn power(&self, coeffs: &[Complex64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.weights)
            .map(|(row, w)| {
                let f: Complex64 = row.iter().map(|&(k, v)| coeffs[k] * v).sum();
                w * f.norm().powf(self.p)
            })
            .sum()
    }

    pub fn norm(&self, coeffs: &[Complex64]) -> f64 {
        self.power(coeffs).powf(1.0 / self.p)
    }
}

fn coefficients(index: usize, len: usize, p: Exponent, seed: u64) -> CoefficientVector {
    if index < PROBES.len() {
        return CoefficientVector::probe(PROBES[index], len, p);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((index - PROBES.len()) as u64);
    CoefficientVector::random(len, p, &mut rng)
}

/// Per-vector results for the probes followed by `samples` random draws,
/// computed in parallel and returned in index order.
fn sweep<T: Send>(
    len: usize,
    p: Exponent,
    samples: usize,
    seed: u64,
    f: impl Fn(&CoefficientVector) -> T + Sync,
) -> Vec<T> {
    (0..PROBES.len() + samples)
        .into_par_iter()
        .map(|i| f(&coefficients(i, len, p, seed)))
        .collect()
}

fn extremes(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Observed range of `‖Σ a_k ψ(· − y_k)‖_p / ‖a‖_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Probe ratios first (spike, alternating, ones), then random samples.
    pub ratios: Vec<f64>,
}

pub fn empirical_ratio_lp(
    g: &Generator,
    y: &PerturbationSet,
    p: Exponent,
    samples: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<RatioEstimate> {
    if samples == 0 {
        return Err(QsisError::InvalidParameter(
            "at least one sample is required".into(),
        ));
    }
    let synthesis = Synthesis::new(g, &y.points1()?, p, quad)?;
    let ratios = sweep(y.len(), p, samples, seed, |a| synthesis.norm(&a.values));
    let (min_ratio, max_ratio) = extremes(&ratios);
    Ok(RatioEstimate {
        min_ratio,
        max_ratio,
        ratios,
    })
}

/// Largest observed `‖Σ a_k (ψ(· − k) − ψ(· − y_k))‖_p^p` over unit vectors.
pub fn perturbation_power(
    g: &Generator,
    y: &PerturbationSet,
    p: Exponent,
    samples: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let moved = y.points1()?;
    let n = moved.len();
    let r = y.grid().radius() as i64;
    let positions: Vec<f64> = (-r..=r).map(|k| k as f64).chain(moved).collect();
    let synthesis = Synthesis::new(g, &positions, p, quad)?;
    let powers = sweep(n, p, samples, seed, |a| {
        let signed: Vec<Complex64> = a
            .values
            .iter()
            .copied()
            .chain(a.values.iter().map(|c| -c))
            .collect();
        synthesis.power(&signed)
    });
    Ok(extremes(&powers).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub samples: usize,
    pub seed: u64,
    pub quadrature: QuadratureSpec,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 0,
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// Finite-section statistics for one generator and translation set.
///
/// These are empirical: `min_ratio` can only over-estimate the true lower
/// frame bound, since sampling never finds the exact infimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub generator: String,
    pub grid_k: usize,
    pub p: f64,
    pub quadrature: QuadratureSpec,
    pub samples: usize,
    pub seed: u64,
    pub probes: Vec<Probe>,
    pub l2_deviation: f64,
    pub linf_deviation: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub min_ratio_is_upper_estimate: bool,
    pub perturbation_power_max: f64,
    pub gram_eig_min: Option<f64>,
    pub gram_eig_max: Option<f64>,
    pub sample_ratios: Vec<f64>,
}

pub fn run_oracle(
    g: &Generator,
    y: &PerturbationSet,
    p: Exponent,
    cfg: &OracleConfig,
) -> Result<OracleReport> {
    let ratios = empirical_ratio_lp(g, y, p, cfg.samples, cfg.seed, &cfg.quadrature)?;
    let power = perturbation_power(g, y, p, cfg.samples, cfg.seed, &cfg.quadrature)?;
    let (gram_eig_min, gram_eig_max) = if p.value() == 2.0 {
        let (lo, hi) = empirical_bounds_p2(&gram_matrix(g, y)?)?;
        (Some(lo), Some(hi))
    } else {
        (None, None)
    };
    Ok(OracleReport {
        generator: g.name(),
        grid_k: y.grid().radius(),
        p: p.value(),
        quadrature: cfg.quadrature,
        samples: cfg.samples,
        seed: cfg.seed,
        probes: PROBES.to_vec(),
        l2_deviation: y.l2_deviation(),
        linf_deviation: y.linf_deviation(),
        min_ratio: ratios.min_ratio,
        max_ratio: ratios.max_ratio,
        min_ratio_is_upper_estimate: true,
        perturbation_power_max: power,
        gram_eig_min,
        gram_eig_max,
        sample_ratios: ratios.ratios,
    })
}

/// Per-vector ratios as CSV: `index,kind,ratio`.
pub fn write_ratio_csv(report: &OracleReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| QsisError::NumericalBreakdown(format!("csv output failed: {e}"));
    w.write_record(["index", "kind", "ratio"]).map_err(io)?;
    for (i, r) in report.sample_ratios.iter().enumerate() {
        let kind = match report.probes.get(i) {
            Some(Probe::Spike) => "spike",
            Some(Probe::Alternating) => "alternating",
            Some(Probe::Ones) => "ones",
            None => "random",
        };
        w.write_record([i.to_string(), kind.to_string(), format!("{r:?}")])
            .map_err(io)?;
    }
    w.flush()
        .map_err(|e| QsisError::NumericalBreakdown(format!("csv output failed: {e}")))?;
    Ok(())
}
