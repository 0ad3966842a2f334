//! Fourier periodization `G(y) = Σ_m |ψ̂(y+m)|²`, the spectral (p = 2) Riesz
//! bounds of the integer-lattice system, and the amalgam sums `c`, `C`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{Convention, FrameBounds, Provenance};
use crate::error::{QsisError, Result};
use crate::generator::{Generator, GeneratorKind};

pub const MIN_RESOLUTION: usize = 16;
pub const MIN_TAIL_K: usize = 8;
const MAX_GRID_POINTS: usize = 1 << 22;

/// Unit cell over which amalgam infima/suprema are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    /// `[0, 1)^d`.
    #[default]
    Unit,
    /// `[−1/2, 1/2)^d`.
    Centered,
}

impl Cell {
    fn origin(self) -> f64 {
        match self {
            Cell::Unit => 0.0,
            Cell::Centered => -0.5,
        }
    }
}

/// Lower and upper amalgam sums `c = Σ_k inf |ψ̂(x+k)|²`, `C = Σ_k sup |ψ̂(x+k)|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmalgamSums {
    pub lower_c: f64,
    pub upper_c: f64,
    pub cell: Cell,
    pub resolution: usize,
    pub tail_k: usize,
    /// Bound on the discarded `|k| > tail_k` terms, already added to `upper_c`.
    pub upper_tail: f64,
    /// Extremes are taken over a grid of the cell; when the transform is
    /// continuous the grid includes the closing endpoint of each axis.
    pub closed_grid: bool,
}

/// Sampled periodization on `[−1/2, 1/2)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumProfile {
    pub dimension: usize,
    /// Grid points per axis; the grid is `−1/2 + i/M`, row-major with the
    /// last axis fastest.
    pub resolution: usize,
    pub values: Vec<f64>,
    pub tail_k: usize,
    pub tail_bound: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub amalgam: AmalgamSums,
    pub convention: Convention,
}

impl SpectrumProfile {
    pub fn grid_point(&self, index: usize) -> Vec<f64> {
        let m = self.resolution;
        let mut rest = index;
        let mut y = vec![0.0; self.dimension];
        for axis in (0..self.dimension).rev() {
            y[axis] = -0.5 + (rest % m) as f64 / m as f64;
            rest /= m;
        }
        y
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `|ψ̂(ξ)|² ≤ D / |ξ|^{2q}` for `|ξ| ≥ 1/2`, or compact spectral support.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Decay {
    Power { constant: f64, order: f64 },
    BandLimited { radius: f64 },
}

impl Decay {
    fn of(g: &Generator) -> Self {
        match g.kind() {
            GeneratorKind::Rect => Decay::Power {
                constant: PI.powi(-2),
                order: 1.0,
            },
            GeneratorKind::BSpline { order } => {
                let q = *order as f64 + 1.0;
                Decay::Power {
                    constant: PI.powf(-2.0 * q),
                    order: q,
                }
            }
            GeneratorKind::Sinc => Decay::BandLimited { radius: 0.5 },
            GeneratorKind::Step { coeffs } => {
                let l1: f64 = coeffs.iter().map(|s| s.abs()).sum();
                Decay::Power {
                    constant: (l1 / PI).powi(2),
                    order: 1.0,
                }
            }
            GeneratorKind::Tabulated { samples, .. } => {
                // |f̂(ξ)| ≤ Var(f) / (2π|ξ|), jumps to zero at the ends included
                let var: f64 = samples.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
                    + samples[0].abs()
                    + samples[samples.len() - 1].abs();
                Decay::Power {
                    constant: (var / (2.0 * PI)).powi(2),
                    order: 1.0,
                }
            }
            GeneratorKind::TensorProduct { factors } => Decay::of(&factors[0]),
        }
    }

    /// Bound on `Σ_{|m| > k} |ψ̂(x + m)|²` when every retained argument
    /// satisfies `|x + m| ≥ |m| − offset`.
    fn tail(self, k: usize, offset: f64) -> f64 {
        match self {
            Decay::BandLimited { radius } => {
                if k as f64 >= radius + offset {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Decay::Power { constant, order } => {
                let start = k as f64 - offset;
                if start <= 0.0 {
                    return f64::INFINITY;
                }
                // Σ_{n>k} (n − offset)^{−2q} ≤ ∫_k^∞ (x − offset)^{−2q} dx
                2.0 * constant * start.powf(1.0 - 2.0 * order) / (2.0 * order - 1.0)
            }
        }
    }
}

/// `ψ̂(ξ)` for a scalar generator, using the exact piecewise-linear transform
/// for tabulated windows.
pub fn transform1(g: &Generator, xi: f64) -> Result<Complex64> {
    match g.kind() {
        GeneratorKind::Tabulated {
            samples,
            step,
            support,
        } => Ok(piecewise_linear_transform(samples, *step, support.0, xi)),
        _ => g.fourier1(xi),
    }
}

fn piecewise_linear_transform(samples: &[f64], h: f64, a: f64, xi: f64) -> Complex64 {
    let w = 2.0 * PI * xi;
    let z = Complex64::new(0.0, w * h);
    let (i0, i1) = if (w * h).abs() < 1e-3 {
        let z2 = z * z;
        let z3 = z2 * z;
        let z4 = z2 * z2;
        (
            h * (1.0 + z / 2.0 + z2 / 6.0 + z3 / 24.0 + z4 / 120.0),
            h * h * (0.5 + z / 3.0 + z2 / 8.0 + z3 / 30.0 + z4 / 144.0),
        )
    } else {
        let iw = Complex64::new(0.0, w);
        let e = z.exp();
        ((e - 1.0) / iw, h * e / iw - (e - 1.0) / (iw * iw))
    };
    samples
        .windows(2)
        .enumerate()
        .map(|(i, seg)| {
            let u = a + i as f64 * h;
            let slope = (seg[1] - seg[0]) / h;
            Complex64::from_polar(1.0, w * u) * (seg[0] * i0 + slope * i1)
        })
        .sum()
}

fn check_transform_path(g: &Generator) -> Result<()> {
    for f in g.factors() {
        if let Err(QsisError::NoClosedFormTransform(_)) = transform1(f, 0.25) {
            return Err(QsisError::NoTransformPath(f.name()));
        }
    }
    Ok(())
}

fn validate(resolution: usize, tail_k: usize, d: usize) -> Result<()> {
    if resolution < MIN_RESOLUTION {
        return Err(QsisError::InvalidParameter(format!(
            "resolution {resolution} below minimum {MIN_RESOLUTION}"
        )));
    }
    if tail_k < MIN_TAIL_K {
        return Err(QsisError::InvalidParameter(format!(
            "tail_K {tail_k} below minimum {MIN_TAIL_K}"
        )));
    }
    let total = (resolution as f64).powi(d as i32);
    if total > MAX_GRID_POINTS as f64 {
        return Err(QsisError::InvalidParameter(format!(
            "grid of {resolution}^{d} points exceeds the supported size"
        )));
    }
    Ok(())
}

/// Terms in increasing `|m|`, so enlarging `tail_k` only appends
/// non-negative terms to each partial sum.
fn symmetric_indices(k: usize) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=k as i64).flat_map(|m| [m, -m]))
}

/// `Σ_{|m| ≤ tail_k} |ψ̂(y+m)|²` for a scalar generator.
pub fn periodization_at(g: &Generator, y: f64, tail_k: usize) -> Result<f64> {
    let y = wrap(y);
    let mut sum = 0.0;
    for m in symmetric_indices(tail_k) {
        sum += transform1(g, y + m as f64)?.norm_sqr();
    }
    Ok(sum)
}

/// Reduces `y` to `[−1/2, 1/2)`.
pub fn wrap(y: f64) -> f64 {
    let r = y - (y + 0.5).floor();
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

struct AxisProfile {
    values: Vec<f64>,
    tail: f64,
}

fn axis_profile(g: &Generator, resolution: usize, tail_k: usize) -> Result<AxisProfile> {
    let values = (0..resolution)
        .into_par_iter()
        .map(|i| periodization_at(g, -0.5 + i as f64 / resolution as f64, tail_k))
        .collect::<Result<Vec<_>>>()?;
    let tail = Decay::of(g).tail(tail_k, 0.5);
    Ok(AxisProfile { values, tail })
}

/// Samples the periodization on an `M^d` grid of `[−1/2, 1/2)^d` and the
/// amalgam sums on the literal unit cell `[0, 1)^d`.
pub fn periodization(g: &Generator, resolution: usize, tail_k: usize) -> Result<SpectrumProfile> {
    periodization_with_cell(g, resolution, tail_k, Cell::Unit)
}

pub fn periodization_with_cell(
    g: &Generator,
    resolution: usize,
    tail_k: usize,
    cell: Cell,
) -> Result<SpectrumProfile> {
    let d = g.dimension();
    validate(resolution, tail_k, d)?;
    check_transform_path(g)?;
    let axes = g
        .factors()
        .into_iter()
        .map(|f| axis_profile(f, resolution, tail_k))
        .collect::<Result<Vec<_>>>()?;

    // G factorises over tensor factors.
    let mut values = vec![1.0];
    for axis in &axes {
        values = values
            .iter()
            .flat_map(|&v| axis.values.iter().map(move |&a| v * a))
            .collect();
    }
    let g_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let g_max = values.iter().copied().fold(0.0, f64::max);

    let tail_bound = if axes.len() == 1 {
        axes[0].tail
    } else {
        let maxes: Vec<f64> = axes
            .iter()
            .map(|a| a.values.iter().copied().fold(0.0, f64::max))
            .collect();
        let with_tail: f64 = axes.iter().zip(&maxes).map(|(a, m)| m + a.tail).product();
        with_tail - maxes.iter().product::<f64>()
    };

    let amalgam = amalgam_sums(g, resolution, tail_k, cell)?;
    Ok(SpectrumProfile {
        dimension: d,
        resolution,
        values,
        tail_k,
        tail_bound,
        g_min,
        g_max,
        amalgam,
        convention: Convention::Squared,
    })
}

/// Squared-convention Riesz bounds `(g_min − tail, g_max + tail)`.
pub fn riesz_bounds_p2(profile: &SpectrumProfile) -> Result<FrameBounds> {
    if !profile.tail_bound.is_finite() {
        return Err(QsisError::InvalidParameter(
            "periodization tail bound is not finite".into(),
        ));
    }
    let lower = profile.g_min - profile.tail_bound;
    if lower <= 0.0 {
        return Err(QsisError::DegenerateSpectrum { lower });
    }
    FrameBounds::new(
        lower,
        profile.g_max + profile.tail_bound,
        Convention::Squared,
        Provenance::Spectrum,
    )
}

/// Amalgam sums over the chosen cell, extremes approximated on a grid.
pub fn amalgam_sums(
    g: &Generator,
    resolution: usize,
    tail_k: usize,
    cell: Cell,
) -> Result<AmalgamSums> {
    validate(resolution, tail_k, 1)?;
    check_transform_path(g)?;
    let mut lower = 1.0;
    let mut upper = 1.0;
    let mut upper_tail_total = 0.0;
    let closed_grid = g.flags().compact_support;
    for f in g.factors() {
        let (c, big_c, tail) = axis_amalgam(f, resolution, tail_k, cell, closed_grid)?;
        lower *= c;
        upper_tail_total = upper_tail_total * (big_c + tail) + tail * upper;
        upper *= big_c + tail;
    }
    Ok(AmalgamSums {
        lower_c: lower,
        upper_c: upper,
        cell,
        resolution,
        tail_k,
        upper_tail: upper_tail_total,
        closed_grid,
    })
}

fn axis_amalgam(
    g: &Generator,
    resolution: usize,
    tail_k: usize,
    cell: Cell,
    closed: bool,
) -> Result<(f64, f64, f64)> {
    let points = if closed { resolution + 1 } else { resolution };
    let origin = cell.origin();
    let per_k = symmetric_indices(tail_k)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| {
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for i in 0..points {
                let x = origin + i as f64 / resolution as f64;
                let v = transform1(g, x + k as f64)?.norm_sqr();
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>>>()?;
    let c = per_k.iter().map(|p| p.0).sum();
    let big_c = per_k.iter().map(|p| p.1).sum();
    let tail = Decay::of(g).tail(tail_k, 1.0);
    Ok((c, big_c, tail))
}

/// `C′ = L²(1+2L)^{2d} ‖∇ψ‖²_{W(L^∞, ℓ¹)}`, the amalgam-space perturbation
/// constant used for comparison with the Sobolev budget.
///
/// The amalgam norm `Σ_n sup_{x ∈ [0,1)^d} |∇ψ(x+n)|₂` is approximated on a
/// `resolution^d` grid per cell.
pub fn fmr_constant(g: &Generator, l: f64, resolution: usize) -> Result<f64> {
    if !g.flags().in_w1p {
        return Err(QsisError::NotSobolev(g.name()));
    }
    if !(l.is_finite() && l >= 0.0) {
        return Err(QsisError::InvalidParameter(format!(
            "deviation L must be non-negative, got {l}"
        )));
    }
    let support = g.support();
    let bx = support.as_box().ok_or(QsisError::UnboundedSupport)?;
    let d = g.dimension();
    validate(resolution, MIN_TAIL_K, d)?;
    let cell_ranges: Vec<(i64, i64)> = bx
        .iter()
        .map(|&(a, b)| (a.floor() as i64, b.ceil() as i64))
        .collect();
    let cells: Vec<Vec<i64>> = cell_ranges.iter().fold(vec![vec![]], |acc, &(lo, hi)| {
        acc.into_iter()
            .flat_map(|prefix| {
                (lo..hi).map(move |n| {
                    let mut v = prefix.clone();
                    v.push(n);
                    v
                })
            })
            .collect()
    });
    let per_cell = cells
        .par_iter()
        .map(|cell| {
            let total = resolution.pow(d as u32);
            let mut x = vec![0.0; d];
            let mut sup: f64 = 0.0;
            for flat in 0..total {
                let mut rest = flat;
                for axis in (0..d).rev() {
                    x[axis] = cell[axis] as f64 + (rest % resolution) as f64 / resolution as f64;
                    rest /= resolution;
                }
                let mut sq = 0.0;
                for axis in 0..d {
                    sq += g.partial(axis, &x)?.powi(2);
                }
                sup = sup.max(sq.sqrt());
            }
            Ok(sup)
        })
        .collect::<Result<Vec<f64>>>()?;
    let norm: f64 = per_cell.iter().sum();
    Ok(l * l * (1.0 + 2.0 * l).powi(2 * d as i32) * norm * norm)
}
