//! Perturbed translation sets `Y = {y_k}` on a finite index box of `ℤ^d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QsisError, Result};

/// The integer box `{k ∈ ℤ^d : |k|∞ ≤ K}`, enumerated row-major with the
/// last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationGrid {
    dimension: usize,
    radius: usize,
}

impl TranslationGrid {
    pub fn new(dimension: usize, radius: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(QsisError::InvalidParameter(
                "grid dimension must be positive".into(),
            ));
        }
        if radius == 0 {
            return Err(QsisError::InvalidParameter(
                "grid radius K must be at least 1".into(),
            ));
        }
        Ok(Self { dimension, radius })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: &[i64]) -> bool {
        index.len() == self.dimension
            && index
                .iter()
                .all(|k| k.unsigned_abs() as usize <= self.radius)
    }

    /// Position of `index` in the enumeration.
    pub fn position(&self, index: &[i64]) -> Result<usize> {
        if !self.contains(index) {
            return Err(QsisError::IndexOutsideGrid {
                index: index.to_vec(),
                radius: self.radius,
            });
        }
        Ok(index.iter().fold(0, |acc, &k| {
            acc * self.side() + (k + self.radius as i64) as usize
        }))
    }

    pub fn index(&self, position: usize) -> Vec<i64> {
        let mut rest = position;
        let mut k = vec![0; self.dimension];
        for axis in (0..self.dimension).rev() {
            k[axis] = (rest % self.side()) as i64 - self.radius as i64;
            rest /= self.side();
        }
        k
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(|i| self.index(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationNorm {
    L2,
    Linf,
}

/// Translation set `y_k = k + u_k` over a [`TranslationGrid`].
///
/// Offsets `u_k` are stored directly, so deviation statistics are exact
/// functions of the stored data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet")]
pub struct PerturbationSet {
    grid: TranslationGrid,
    offsets: Vec<Vec<f64>>,
    l2_deviation: f64,
    linf_deviation: f64,
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct RawSet {
    grid: TranslationGrid,
    offsets: Vec<Vec<f64>>,
    seed: Option<u64>,
}

impl TryFrom<RawSet> for PerturbationSet {
    type Error = QsisError;
    fn try_from(raw: RawSet) -> Result<Self> {
        Self::from_offsets(raw.grid, raw.offsets, raw.seed)
    }
}

fn norm2(u: &[f64]) -> f64 {
    if u.len() == 1 {
        u[0].abs()
    } else {
        u.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn norm_inf(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl PerturbationSet {
    pub fn from_offsets(
        grid: TranslationGrid,
        offsets: Vec<Vec<f64>>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if offsets.len() != grid.len() {
            return Err(QsisError::InvalidParameter(format!(
                "expected {} offsets, got {}",
                grid.len(),
                offsets.len()
            )));
        }
        if offsets
            .iter()
            .any(|u| u.len() != grid.dimension() || u.iter().any(|x| !x.is_finite()))
        {
            return Err(QsisError::InvalidParameter(
                "offsets must be finite vectors of the grid dimension".into(),
            ));
        }
        let l2_deviation = offsets.iter().map(|u| norm2(u)).fold(0.0, f64::max);
        let linf_deviation = offsets.iter().map(|u| norm_inf(u)).fold(0.0, f64::max);
        Ok(Self {
            grid,
            offsets,
            l2_deviation,
            linf_deviation,
            seed,
        })
    }

    pub fn identity(grid: TranslationGrid) -> Self {
        let offsets = vec![vec![0.0; grid.dimension()]; grid.len()];
        Self::from_offsets(grid, offsets, None).expect("zero offsets are valid")
    }

    pub fn grid(&self) -> TranslationGrid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `u_k = y_k − k` in grid order.
    pub fn offsets(&self) -> &[Vec<f64>] {
        &self.offsets
    }

    /// `y_k` in grid order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.grid
            .indices()
            .zip(&self.offsets)
            .map(|(k, u)| k.iter().zip(u).map(|(&k, &u)| k as f64 + u).collect())
            .collect()
    }

    /// `y_k` for a one-dimensional set.
    pub fn points1(&self) -> Result<Vec<f64>> {
        if self.grid.dimension() != 1 {
            return Err(QsisError::UnsupportedDimension {
                given: self.grid.dimension(),
                supported: 1,
            });
        }
        let r = self.grid.radius() as i64;
        Ok(self
            .offsets
            .iter()
            .zip(-r..=r)
            .map(|(u, k)| k as f64 + u[0])
            .collect())
    }

    pub fn l2_deviation(&self) -> f64 {
        self.l2_deviation
    }

    pub fn linf_deviation(&self) -> f64 {
        self.linf_deviation
    }

    /// Replaces every offset by `f(u_k)`.
    pub fn map_offsets(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let offsets = self.offsets.iter().map(|u| f(u)).collect();
        Self::from_offsets(self.grid, offsets, self.seed)
    }
}

fn check_radius(l: f64) -> Result<()> {
    if !(l.is_finite() && l >= 0.0) {
        return Err(QsisError::InvalidParameter(format!(
            "deviation L must be non-negative, got {l}"
        )));
    }
    Ok(())
}

/// `y_k = k + u_k`, `u_k` uniform on the `ℓ∞` ball of radius `l`.
pub fn jitter_uniform(grid: TranslationGrid, l: f64, seed: u64) -> Result<PerturbationSet> {
    check_radius(l)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets = (0..grid.len())
        .map(|_| {
            (0..grid.dimension())
                .map(|_| {
                    if l == 0.0 {
                        0.0
                    } else {
                        rng.random_range(-l..=l)
                    }
                })
                .collect()
        })
        .collect();
    PerturbationSet::from_offsets(grid, offsets, Some(seed))
}

/// `y_k = k + l·direction` for every `k`: a global translate of the lattice.
pub fn jitter_adversarial(
    grid: TranslationGrid,
    l: f64,
    direction: &[f64],
) -> Result<PerturbationSet> {
    check_radius(l)?;
    if direction.len() != grid.dimension() {
        return Err(QsisError::InvalidParameter(
            "direction has the wrong dimension".into(),
        ));
    }
    if (norm2(direction) - 1.0).abs() > 1e-12 {
        return Err(QsisError::InvalidParameter(
            "direction must be a unit vector".into(),
        ));
    }
    let u: Vec<f64> = direction.iter().map(|e| l * e).collect();
    PerturbationSet::from_offsets(grid, vec![u; grid.len()], None)
}

/// Moves only `y_index` by `delta` along the first axis.
pub fn single_node_displacement(
    grid: TranslationGrid,
    index: &[i64],
    delta: f64,
) -> Result<PerturbationSet> {
    if !delta.is_finite() {
        return Err(QsisError::InvalidParameter(format!(
            "displacement must be finite, got {delta}"
        )));
    }
    let pos = grid.position(index)?;
    let mut offsets = vec![vec![0.0; grid.dimension()]; grid.len()];
    offsets[pos][0] = delta;
    PerturbationSet::from_offsets(grid, offsets, None)
}

/// Explicit points; indices not listed stay on the lattice.
pub fn explicit(grid: TranslationGrid, points: &[(Vec<i64>, Vec<f64>)]) -> Result<PerturbationSet> {
    let mut offsets = vec![vec![0.0; grid.dimension()]; grid.len()];
    for (k, y) in points {
        let pos = grid.position(k)?;
        if y.len() != grid.dimension() {
            return Err(QsisError::InvalidParameter(format!(
                "point for index {k:?} has the wrong dimension"
            )));
        }
        offsets[pos] = k.iter().zip(y).map(|(&k, &y)| y - k as f64).collect();
    }
    PerturbationSet::from_offsets(grid, offsets, None)
}

pub fn sup_deviation(y: &PerturbationSet, norm: DeviationNorm) -> f64 {
    match norm {
        DeviationNorm::L2 => y.l2_deviation(),
        DeviationNorm::Linf => y.linf_deviation(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KadecCheck {
    pub pass: bool,
    pub margin: f64,
    pub linf_deviation: f64,
}

/// Strict one-quarter condition `sup_k |y_k − k|∞ < 1/4`.
pub fn kadec_check(y: &PerturbationSet) -> KadecCheck {
    let linf = y.linf_deviation();
    KadecCheck {
        pass: linf < 0.25,
        margin: 0.25 - linf,
        linf_deviation: linf,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationModel {
    Identity,
    Uniform,
    Adversarial,
    Single,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitPoint {
    pub index: Vec<i64>,
    pub y: Vec<f64>,
}

/// JSON form of a perturbation set.
///
/// ```json
/// {"model": "uniform", "L": 0.2, "seed": 7, "grid_K": 32}
/// {"model": "single", "L": 0.3, "grid_K": 32, "index": [0]}
/// {"model": "explicit", "grid_K": 2, "points": [{"index": [0], "y": [0.1]}]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub model: PerturbationModel,
    #[serde(rename = "L", default)]
    pub l: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "grid_K")]
    pub grid_k: usize,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<ExplicitPoint>>,
}

fn one() -> usize {
    1
}

impl PerturbationSpec {
    pub fn new(model: PerturbationModel, l: f64, grid_k: usize) -> Self {
        Self {
            model,
            l,
            seed: 0,
            grid_k,
            dim: 1,
            direction: None,
            index: None,
            points: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Same spec with a different deviation.
    pub fn with_l(&self, l: f64) -> Self {
        Self { l, ..self.clone() }
    }

    pub fn build(&self) -> Result<PerturbationSet> {
        let grid = TranslationGrid::new(self.dim, self.grid_k)?;
        match self.model {
            PerturbationModel::Identity => Ok(PerturbationSet::identity(grid)),
            PerturbationModel::Uniform => jitter_uniform(grid, self.l, self.seed),
            PerturbationModel::Adversarial => {
                let mut e1 = vec![0.0; self.dim];
                e1[0] = 1.0;
                jitter_adversarial(grid, self.l, self.direction.as_deref().unwrap_or(&e1))
            }
            PerturbationModel::Single => {
                let origin = vec![0; self.dim];
                single_node_displacement(grid, self.index.as_deref().unwrap_or(&origin), self.l)
            }
            PerturbationModel::Explicit => {
                let points: Vec<_> = self
                    .points
                    .iter()
                    .flatten()
                    .map(|p| (p.index.clone(), p.y.clone()))
                    .collect();
                explicit(grid, &points)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid1(k: usize) -> TranslationGrid {
        TranslationGrid::new(1, k).unwrap()
    }

    fn recompute(y: &PerturbationSet) -> (f64, f64) {
        let mut l2: f64 = 0.0;
        let mut linf: f64 = 0.0;
        for (k, p) in y.grid().indices().zip(y.points()) {
            let diff: Vec<f64> = k.iter().zip(&p).map(|(&k, &p)| p - k as f64).collect();
            l2 = l2.max(diff.iter().map(|x| x * x).sum::<f64>().sqrt());
            linf = linf.max(diff.iter().fold(0.0, |m, x| m.max(x.abs())));
        }
        (l2, linf)
    }

    #[test]
    fn grid_enumeration_round_trips() {
        let g = TranslationGrid::new(2, 3).unwrap();
        assert_eq!(g.len(), 49);
        for i in 0..g.len() {
            assert_eq!(g.position(&g.index(i)).unwrap(), i);
        }
        assert_eq!(g.index(0), vec![-3, -3]);
        assert_eq!(g.index(1), vec![-3, -2]);
        assert!(TranslationGrid::new(1, 0).is_err());
    }

    #[test]
    fn zero_jitter_is_identity() {
        let y = jitter_uniform(grid1(16), 0.0, 3).unwrap();
        assert_eq!(
            y.points1().unwrap(),
            PerturbationSet::identity(grid1(16)).points1().unwrap()
        );
        assert_eq!(y.l2_deviation(), 0.0);
    }

    #[test]
    fn uniform_jitter_is_seeded() {
        let a = jitter_uniform(grid1(16), 0.2, 7).unwrap();
        let b = jitter_uniform(grid1(16), 0.2, 7).unwrap();
        let c = jitter_uniform(grid1(16), 0.2, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.linf_deviation() <= 0.2);
    }

    #[test]
    fn adversarial_shift() {
        let y = jitter_adversarial(grid1(4), 0.25, &[1.0]).unwrap();
        assert!(y.offsets().iter().all(|u| u[0] == 0.25));
        assert_eq!(sup_deviation(&y, DeviationNorm::L2), 0.25);
        let y = jitter_adversarial(grid1(4), 0.3, &[-1.0]).unwrap();
        assert_eq!(y.linf_deviation(), 0.3);
        assert!(jitter_adversarial(grid1(4), 0.3, &[0.5]).is_err());
    }

    #[test]
    fn single_node() {
        let y = single_node_displacement(grid1(8), &[0], 0.3).unwrap();
        let pts = y.points1().unwrap();
        assert_eq!(pts[8], 0.3);
        assert_eq!(pts.iter().filter(|&&p| p.fract() != 0.0).count(), 1);
        assert_eq!(y.l2_deviation(), 0.3);
        assert!(matches!(
            single_node_displacement(grid1(8), &[9], 0.3),
            Err(QsisError::IndexOutsideGrid { .. })
        ));
        assert_eq!(
            single_node_displacement(grid1(8), &[0], 0.0)
                .unwrap()
                .l2_deviation(),
            0.0
        );
    }

    #[test]
    fn kadec_boundary() {
        let at = |l: f64| kadec_check(&jitter_adversarial(grid1(4), l, &[1.0]).unwrap());
        let pass = at(0.24);
        assert!(pass.pass);
        assert!((pass.margin - 0.01).abs() < 1e-15);
        assert!(!at(0.25).pass);
        let id = kadec_check(&PerturbationSet::identity(grid1(4)));
        assert!(id.pass && id.margin == 0.25);
    }

    #[test]
    fn spec_builds_every_model() {
        let texts = [
            r#"{"model":"uniform","L":0.2,"seed":7,"grid_K":16}"#,
            r#"{"model":"adversarial","L":0.1,"grid_K":8}"#,
            r#"{"model":"single","L":0.3,"grid_K":32,"index":[0]}"#,
            r#"{"model":"explicit","grid_K":2,"points":[{"index":[1],"y":[1.1]}]}"#,
            r#"{"model":"uniform","L":0.2,"seed":1,"grid_K":3,"dim":2}"#,
        ];
        for t in texts {
            let spec = PerturbationSpec::from_json(t).unwrap();
            let y = spec.build().unwrap();
            let back: PerturbationSpec =
                serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
            assert_eq!(back, spec);
            let set_back: PerturbationSet =
                serde_json::from_str(&serde_json::to_string(&y).unwrap()).unwrap();
            assert_eq!(set_back, y);
        }
        assert!(PerturbationSpec::from_json(r#"{"model":"spiral","grid_K":2}"#).is_err());
    }

    proptest! {
        #[test]
        fn caches_match_recomputation(seed in any::<u64>(), l in 0.0f64..0.5, d in 1usize..3) {
            let y = jitter_uniform(TranslationGrid::new(d, 3).unwrap(), l, seed).unwrap();
            let (l2, linf) = recompute(&y);
            prop_assert!((y.l2_deviation() - l2).abs() <= 1e-12);
            prop_assert!((y.linf_deviation() - linf).abs() <= 1e-12);
            prop_assert!(y.linf_deviation() <= l);
            prop_assert!(y.linf_deviation() <= y.l2_deviation());
            prop_assert!(y.l2_deviation() <= (d as f64).sqrt() * y.linf_deviation() + 1e-15);
        }

        #[test]
        fn kadec_is_monotone(seed in any::<u64>(), l in 0.0f64..0.4, shrink in 0.0f64..=1.0) {
            let y = jitter_uniform(grid1(8), l, seed).unwrap();
            let smaller = y.map_offsets(|u| u.iter().map(|x| x * shrink).collect()).unwrap();
            prop_assert!(!kadec_check(&y).pass || kadec_check(&smaller).pass);
        }
    }
}
