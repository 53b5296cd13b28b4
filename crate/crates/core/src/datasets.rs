//! Synthetic point clouds and embeddings into higher dimensions.
//!
//! The 2D generators return uniform clouds centered at the origin with unit RMS
//! radius, so learning rates transfer between datasets.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use crate::measures::{load_cloud_csv, save_cloud_csv};
use crate::measures::WeightedCloud;
use crate::rng::{self, tag};
use crate::slicing::{fill_gaussian, random_rotation, Subspace};
use crate::{Error, Result};

/// Angle range of the Swiss roll, in units of π.
pub const SWISS_TURNS: (f64, f64) = (1.5, 4.5);
/// Jitter of the Swiss roll before normalization (the radius spans 4.7 to 14.1).
pub const SWISS_JITTER: f64 = 0.25;
/// Radius of the circle carrying the eight Gaussian modes.
pub const EIGHT_RADIUS: f64 = 4.0;
/// Per-coordinate standard deviation of each mode before normalization.
pub const EIGHT_STD: f64 = 0.5;
/// Jitter of the trefoil before normalization (its radius spans 1 to 3).
pub const KNOT_JITTER: f64 = 0.05;

const SWISS_STREAM: u64 = 1;
const EIGHT_STREAM: u64 = 2;
const KNOT_STREAM: u64 = 3;
const SOURCE_STREAM: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dataset {
    SwissRoll,
    EightGaussians,
    Knot,
}

impl Dataset {
    pub const ALL: [Dataset; 3] = [Dataset::SwissRoll, Dataset::EightGaussians, Dataset::Knot];

    pub fn generate(self, n: usize, seed: u64) -> Result<WeightedCloud> {
        match self {
            Dataset::SwissRoll => swiss_roll_2d(n, seed),
            Dataset::EightGaussians => eight_gaussians_2d(n, seed),
            Dataset::Knot => knot_2d(n, seed),
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dataset::SwissRoll => "swiss",
            Dataset::EightGaussians => "8gaussians",
            Dataset::Knot => "knot",
        })
    }
}

impl FromStr for Dataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "swiss" | "swiss-roll" | "swissroll" => Ok(Dataset::SwissRoll),
            "8gaussians" | "8-gaussians" | "eight-gaussians" => Ok(Dataset::EightGaussians),
            "knot" | "trefoil" => Ok(Dataset::Knot),
            other => Err(Error::contract(format!("unknown dataset {other:?}"))),
        }
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::contract("a dataset needs at least one point"));
    }
    Ok(())
}

/// Centers the rows and scales them to unit RMS norm. Returns the applied
/// shift (the original mean) and scale (the original RMS radius).
pub fn normalize_rms(points: &mut Array2<f64>) -> (Array1<f64>, f64) {
    let mean = points.mean_axis(Axis(0)).expect("non-empty cloud");
    *points -= &mean;
    let rms = (points.iter().map(|v| v * v).sum::<f64>() / points.nrows() as f64).sqrt();
    if rms > 0.0 {
        *points /= rms;
    }
    (mean, rms)
}

fn finish(mut points: Array2<f64>) -> Result<WeightedCloud> {
    normalize_rms(&mut points);
    WeightedCloud::uniform(points)
}

/// Archimedean spiral `r = φ` for `φ ∈ [1.5π, 4.5π]` with Gaussian jitter.
pub fn swiss_roll_2d(n: usize, seed: u64) -> Result<WeightedCloud> {
    check_count(n)?;
    let mut rng = rng::stream(seed, SWISS_STREAM);
    let (lo, hi) = (SWISS_TURNS.0 * PI, SWISS_TURNS.1 * PI);
    let mut pts = Array2::zeros((n, 2));
    for mut row in pts.outer_iter_mut() {
        let phi = lo + (hi - lo) * rng.random::<f64>();
        row[0] = phi * phi.cos() + SWISS_JITTER * rng.sample::<f64, _>(StandardNormal);
        row[1] = phi * phi.sin() + SWISS_JITTER * rng.sample::<f64, _>(StandardNormal);
    }
    finish(pts)
}

/// Mixture of eight Gaussians on a circle; point `i` belongs to mode `i mod 8`.
pub fn eight_gaussians_2d(n: usize, seed: u64) -> Result<WeightedCloud> {
    check_count(n)?;
    let mut rng = rng::stream(seed, EIGHT_STREAM);
    let mut pts = Array2::zeros((n, 2));
    for (i, mut row) in pts.outer_iter_mut().enumerate() {
        let angle = 2.0 * PI * (i % 8) as f64 / 8.0;
        row[0] = EIGHT_RADIUS * angle.cos() + EIGHT_STD * rng.sample::<f64, _>(StandardNormal);
        row[1] = EIGHT_RADIUS * angle.sin() + EIGHT_STD * rng.sample::<f64, _>(StandardNormal);
    }
    finish(pts)
}

/// Trefoil `(sin t + 2 sin 2t, cos t - 2 cos 2t)` with `t` stratified on `[0, 2π)`.
pub fn knot_2d(n: usize, seed: u64) -> Result<WeightedCloud> {
    check_count(n)?;
    let mut rng = rng::stream(seed, KNOT_STREAM);
    let mut pts = Array2::zeros((n, 2));
    for (i, mut row) in pts.outer_iter_mut().enumerate() {
        let t = 2.0 * PI * (i as f64 + rng.random::<f64>()) / n as f64;
        row[0] = t.sin() + 2.0 * (2.0 * t).sin() + KNOT_JITTER * rng.sample::<f64, _>(StandardNormal);
        row[1] = t.cos() - 2.0 * (2.0 * t).cos() + KNOT_JITTER * rng.sample::<f64, _>(StandardNormal);
    }
    finish(pts)
}

/// Standard Gaussian cloud in `R^d`, the usual flow source.
pub fn gaussian_cloud(n: usize, d: usize, seed: u64) -> Result<WeightedCloud> {
    check_count(n)?;
    if d == 0 {
        return Err(Error::contract("dimension must be >= 1"));
    }
    let mut rng = rng::stream(seed, SOURCE_STREAM);
    WeightedCloud::uniform(Array2::from_shape_simple_fn((n, d), || rng.sample(StandardNormal)))
}

/// Zero-padding into `R^{ambient_d}` followed by a fixed rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpec {
    pub ambient_d: usize,
    pub seed: u64,
    rotation: Array2<f64>,
}

impl EmbeddingSpec {
    /// Haar-random rotation drawn from `seed`.
    pub fn new(ambient_d: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            ambient_d,
            seed,
            rotation: random_rotation(ambient_d, seed)?,
        })
    }

    pub fn identity(ambient_d: usize) -> Result<Self> {
        Self::with_rotation(Array2::eye(ambient_d), 0)
    }

    pub fn with_rotation(rotation: Array2<f64>, seed: u64) -> Result<Self> {
        let d = rotation.nrows();
        if d == 0 || rotation.ncols() != d {
            return Err(Error::contract("rotation must be a non-empty square matrix"));
        }
        Subspace::new(rotation.clone())?;
        Ok(Self {
            ambient_d: d,
            seed,
            rotation,
        })
    }

    pub fn rotation(&self) -> &Array2<f64> {
        &self.rotation
    }

    /// The image of the first `k` coordinate axes.
    pub fn subspace(&self, k: usize) -> Result<Subspace> {
        if k == 0 || k > self.ambient_d {
            return Err(Error::contract(format!("cannot take {k} columns of a {}-dimensional rotation", self.ambient_d)));
        }
        Subspace::new(self.rotation.slice(s![.., ..k]).to_owned())
    }
}

pub fn embed(cloud: &WeightedCloud, spec: &EmbeddingSpec) -> Result<WeightedCloud> {
    let k = cloud.dim();
    if spec.ambient_d < k {
        return Err(Error::contract(format!(
            "cannot embed a {k}-dimensional cloud into R^{}",
            spec.ambient_d
        )));
    }
    // Padding then rotating is multiplication by the first k columns.
    let pts = cloud.points().dot(&spec.rotation.slice(s![.., ..k]).t());
    cloud.with_points(pts)
}

/// Two `n`-point unit Gaussians in `R^k`, centered at the origin and at
/// `separation · e_1`, embedded through one random `d × k` basis.
pub fn gaussian_pair_subspace(
    d: usize,
    k: usize,
    n: usize,
    separation: f64,
    seed: u64,
) -> Result<(WeightedCloud, WeightedCloud, Subspace)> {
    check_count(n)?;
    let sub = Subspace::random(d, k, rng::derive_seed(seed, tag::SUBSPACE))?;
    let low = |stream_seed: u64, shift: f64| {
        let mut pts = Array2::zeros((n, k));
        for (i, mut row) in pts.outer_iter_mut().enumerate() {
            fill_gaussian(stream_seed, i as u64, row.as_slice_mut().expect("row-major"));
        }
        pts.column_mut(0).mapv_inplace(|v| v + shift);
        WeightedCloud::uniform(pts)
    };
    let a = sub.lift_cloud(&low(rng::derive_seed(seed, tag::CLOUD_A), 0.0)?)?;
    let b = sub.lift_cloud(&low(rng::derive_seed(seed, tag::CLOUD_B), separation)?)?;
    Ok((a, b, sub))
}

/// Numeric rank of the mean-centered points: the number of singular values
/// above `rel_tol` times the largest one.
pub fn centered_rank(cloud: &WeightedCloud, rel_tol: f64) -> usize {
    let pts = cloud.points();
    let mean = pts.mean_axis(Axis(0)).expect("non-empty cloud");
    let m = DMatrix::from_fn(pts.nrows(), pts.ncols(), |i, j| pts[[i, j]] - mean[j]);
    let sv = m.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}
