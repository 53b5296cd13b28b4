//! Slicing distributions, projections and effective-subspace geometry.
//!
//! Directions are generated one slice at a time from the counter-based stream
//! `(seed, slice index)` (see [`crate::rng`]), so a [`SliceSet`] is identical
//! whatever the number of worker threads, and the first `L` slices of a set of
//! size `L' > L` coincide with the set of size `L` drawn from the same seed.

use std::io::Write;

use nalgebra::DMatrix;
use ndarray::parallel::prelude::*;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::measures::WeightedCloud;
use crate::rng;
use crate::table::fmt_float;
use crate::vmf::VonMisesFisher;
use crate::{Error, Result};

/// Norm tolerance for directions stored in a [`SliceSet`].
pub const UNIT_TOL: f64 = 1e-9;

/// Norm tolerance accepted by [`project`].
pub const PROJECT_UNIT_TOL: f64 = 1e-6;

/// `‖U^T θ‖` below this is treated as an orthogonal slice.
pub const REDUCE_ZERO_TOL: f64 = 1e-12;

/// Semi-orthogonality tolerance for a [`Subspace`] basis.
pub const ORTHO_TOL: f64 = 1e-9;

/// Redraws allowed before a random path with coincident endpoints is an error.
pub const MAX_PAIR_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SliceDistribution {
    UniformSphere,
    /// Raw standard Gaussian vectors, not normalized.
    GaussianRaw,
    /// Normalized differences of random pairs, optionally vMF-perturbed.
    /// `kappa = +∞` leaves the path direction untouched.
    RandomPath { kappa: f64 },
    /// Directions supplied by the caller.
    Explicit,
}

/// `L` projection directions in `R^d`, stored row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSet {
    directions: Array2<f64>,
    seed: u64,
    distribution: SliceDistribution,
}

impl SliceSet {
    /// Wraps caller-provided directions. Unless `distribution` is
    /// [`SliceDistribution::GaussianRaw`], every row must be a unit vector.
    pub fn new(directions: Array2<f64>, seed: u64, distribution: SliceDistribution) -> Result<Self> {
        if directions.nrows() == 0 || directions.ncols() == 0 {
            return Err(Error::contract("a slice set needs L >= 1 directions of dimension >= 1"));
        }
        if directions.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("non-finite slice direction"));
        }
        if distribution != SliceDistribution::GaussianRaw {
            for (l, row) in directions.outer_iter().enumerate() {
                let norm = row.dot(&row).sqrt();
                if (norm - 1.0).abs() > UNIT_TOL {
                    return Err(Error::contract(format!("slice {l} has norm {norm}")));
                }
            }
        }
        Ok(Self {
            directions,
            seed,
            distribution,
        })
    }

    /// Slices that may include zero rows, e.g. reductions of ambient slices
    /// orthogonal to a subspace.
    pub(crate) fn new_unchecked(directions: Array2<f64>, seed: u64, distribution: SliceDistribution) -> Self {
        Self {
            directions,
            seed,
            distribution,
        }
    }

    pub fn len(&self) -> usize {
        self.directions.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.directions.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self) -> SliceDistribution {
        self.distribution
    }

    pub fn directions(&self) -> ArrayView2<'_, f64> {
        self.directions.view()
    }

    pub fn direction(&self, l: usize) -> ArrayView1<'_, f64> {
        self.directions.row(l)
    }

    /// Each row scaled to unit norm (zero rows stay zero).
    pub fn normalized(&self) -> SliceSet {
        let mut dirs = self.directions.clone();
        for mut row in dirs.outer_iter_mut() {
            let norm = row.dot(&row).sqrt();
            if norm > 0.0 {
                row /= norm;
            }
        }
        let distribution = match self.distribution {
            SliceDistribution::GaussianRaw => SliceDistribution::UniformSphere,
            other => other,
        };
        SliceSet::new_unchecked(dirs, self.seed, distribution)
    }

    /// Applies `x ↦ M x` to every direction (no renormalization).
    pub fn mapped(&self, matrix: ArrayView2<'_, f64>) -> SliceSet {
        SliceSet::new_unchecked(self.directions.dot(&matrix.t()), self.seed, SliceDistribution::Explicit)
    }

    /// CSV with one direction per row, for auditing.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let to_io = |e: csv::Error| Error::io("<csv>", e.into());
        let header: Vec<String> = (0..self.dim()).map(|c| format!("theta{c}")).collect();
        wtr.write_record(&header).map_err(to_io)?;
        for row in self.directions.outer_iter() {
            wtr.write_record(row.iter().map(|&v| fmt_float(v))).map_err(to_io)?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))
    }
}

fn check_shape(d: usize, count: usize) -> Result<()> {
    if d == 0 || count == 0 {
        return Err(Error::contract(format!(
            "need d >= 1 and L >= 1, got d = {d}, L = {count}"
        )));
    }
    Ok(())
}

/// Fills `out` with the standard Gaussian vector of slice `index`.
pub(crate) fn fill_gaussian(seed: u64, index: u64, out: &mut [f64]) {
    let mut rng = rng::stream(seed, index);
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// Fills `out` with the uniform direction of slice `index`. This is the
/// normalized Gaussian of the same slice, so uniform and raw-Gaussian sets
/// drawn from one seed pair up slice by slice.
pub(crate) fn fill_uniform(seed: u64, index: u64, out: &mut [f64]) {
    let mut rng = rng::stream(seed, index);
    loop {
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            out.iter_mut().for_each(|v| *v /= norm);
            return;
        }
    }
}

/// `L` i.i.d. directions from the uniform distribution on `S^{d-1}`.
pub fn sample_uniform_sphere(d: usize, count: usize, seed: u64) -> Result<SliceSet> {
    check_shape(d, count)?;
    let mut dirs = Array2::zeros((count, d));
    dirs.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(l, mut row)| fill_uniform(seed, l as u64, row.as_slice_mut().expect("row-major")));
    Ok(SliceSet::new_unchecked(dirs, seed, SliceDistribution::UniformSphere))
}

/// `L` raw standard Gaussian vectors; normalizing them yields exactly
/// [`sample_uniform_sphere`] with the same seed.
pub fn sample_gaussian_raw(d: usize, count: usize, seed: u64) -> Result<SliceSet> {
    check_shape(d, count)?;
    let mut dirs = Array2::zeros((count, d));
    dirs.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(l, mut row)| fill_gaussian(seed, l as u64, row.as_slice_mut().expect("row-major")));
    Ok(SliceSet::new_unchecked(dirs, seed, SliceDistribution::GaussianRaw))
}

/// Pushforward of `cloud` under `x ↦ θ^T x`.
pub fn project(cloud: &WeightedCloud, direction: ArrayView1<'_, f64>) -> Result<WeightedCloud> {
    if direction.len() != cloud.dim() {
        return Err(Error::contract(format!(
            "direction has dimension {}, cloud has {}",
            direction.len(),
            cloud.dim()
        )));
    }
    let norm = direction.dot(&direction).sqrt();
    if (norm - 1.0).abs() > PROJECT_UNIT_TOL {
        return Err(Error::contract(format!("projection direction has norm {norm}")));
    }
    let values = cloud.points().dot(&direction);
    WeightedCloud::new(values.insert_axis(Axis(1)), cloud.weights().to_owned())
}

/// All projections at once, shape `(L, n)`: row `l` holds `θ_l^T x_i`.
pub(crate) fn project_all(cloud: &WeightedCloud, slices: &SliceSet) -> Array2<f64> {
    slices.directions.dot(&cloud.points().t())
}

/// A `d × k` semi-orthogonal basis `U` (`U^T U = I_k`).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Array2<f64>,
    axis_aligned: bool,
}

impl Subspace {
    pub fn new(basis: Array2<f64>) -> Result<Self> {
        let (d, k) = basis.dim();
        if k == 0 || k > d {
            return Err(Error::contract(format!("subspace needs 1 <= k <= d, got d = {d}, k = {k}")));
        }
        let gram = basis.t().dot(&basis);
        let err = gram
            .indexed_iter()
            .map(|((i, j), &g)| (g - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        if err > ORTHO_TOL {
            return Err(Error::contract(format!("basis is not semi-orthogonal (max |U^T U - I| = {err:e})")));
        }
        let axis_aligned = basis
            .indexed_iter()
            .all(|((i, j), &v)| v == if i == j { 1.0 } else { 0.0 });
        Ok(Self { basis, axis_aligned })
    }

    /// The span of the first `k` coordinate axes.
    pub fn coordinate(d: usize, k: usize) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::contract(format!("subspace needs 1 <= k <= d, got d = {d}, k = {k}")));
        }
        let mut basis = Array2::zeros((d, k));
        for j in 0..k {
            basis[[j, j]] = 1.0;
        }
        Self::new(basis)
    }

    /// Haar-random `k`-dimensional subspace: thin QR of a Gaussian `d × k`
    /// matrix with the signs of `diag(R)` folded into `Q`.
    pub fn random(d: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::contract(format!("subspace needs 1 <= k <= d, got d = {d}, k = {k}")));
        }
        Self::new(haar_columns(d, k, seed))
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> ArrayView2<'_, f64> {
        self.basis.view()
    }

    /// `U^T x`.
    pub fn coefficients(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        assert_eq!(x.len(), self.ambient_dim(), "vector dimension must match the ambient space");
        if self.axis_aligned {
            x.slice(s![..self.dim()]).to_owned()
        } else {
            self.basis.t().dot(&x)
        }
    }

    /// `U c`.
    pub fn lift(&self, coefficients: ArrayView1<'_, f64>) -> Array1<f64> {
        self.basis.dot(&coefficients)
    }

    /// `‖x - U U^T x‖`.
    pub fn residual(&self, x: ArrayView1<'_, f64>) -> f64 {
        let back = self.lift(self.coefficients(x).view());
        let diff = &x - &back;
        diff.dot(&diff).sqrt()
    }

    /// Pushforward under `U^T` (a cloud in `R^k`).
    pub fn reduce_cloud(&self, cloud: &WeightedCloud) -> Result<WeightedCloud> {
        cloud.mapped(self.basis.t())
    }

    /// Pushforward of a `k`-dimensional cloud under `U`.
    pub fn lift_cloud(&self, cloud: &WeightedCloud) -> Result<WeightedCloud> {
        cloud.mapped(self.basis.view())
    }

    /// The subspace with basis `U Q` for a `k × k` orthogonal `Q`.
    pub fn right_multiply(&self, q: ArrayView2<'_, f64>) -> Result<Self> {
        if q.dim() != (self.dim(), self.dim()) {
            return Err(Error::contract("rotation must be k x k"));
        }
        Self::new(self.basis.dot(&q))
    }
}

fn haar_columns(d: usize, k: usize, seed: u64) -> Array2<f64> {
    let mut gauss = Array2::<f64>::zeros((d, k));
    for (i, mut row) in gauss.outer_iter_mut().enumerate() {
        fill_gaussian(seed, i as u64, row.as_slice_mut().expect("row-major"));
    }
    let m = DMatrix::from_fn(d, k, |i, j| gauss[[i, j]]);
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    Array2::from_shape_fn((d, k), |(i, j)| {
        let sign = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
        q[(i, j)] * sign
    })
}

/// `φ_U(θ) = ‖U^T θ‖`, the share of a slice lying in the subspace.
pub fn phi_es(sub: &Subspace, direction: ArrayView1<'_, f64>) -> f64 {
    let c = sub.coefficients(direction);
    c.dot(&c).sqrt()
}

/// Splits a slice into its normalized in-subspace direction `θ^k` and the
/// scale `‖U^T θ‖`. Slices orthogonal to the subspace map to `(0_k, 0)`.
pub fn reduce_slice(sub: &Subspace, direction: ArrayView1<'_, f64>) -> (Array1<f64>, f64) {
    let c = sub.coefficients(direction);
    let scale = c.dot(&c).sqrt();
    if scale < REDUCE_ZERO_TOL {
        (Array1::zeros(sub.dim()), 0.0)
    } else {
        (c / scale, scale)
    }
}

/// Reduces every slice of a set; returns the reduced set and the scales.
pub fn reduce_slices(sub: &Subspace, slices: &SliceSet) -> (SliceSet, Vec<f64>) {
    let mut dirs = Array2::zeros((slices.len(), sub.dim()));
    let mut scales = Vec::with_capacity(slices.len());
    for (l, mut row) in dirs.outer_iter_mut().enumerate() {
        let (v, s) = reduce_slice(sub, slices.direction(l));
        row.assign(&v);
        scales.push(s);
    }
    (
        SliceSet::new_unchecked(dirs, slices.seed(), SliceDistribution::Explicit),
        scales,
    )
}

/// Haar-distributed `d × d` orthogonal matrix.
pub fn random_rotation(d: usize, seed: u64) -> Result<Array2<f64>> {
    if d == 0 {
        return Err(Error::contract("rotation dimension must be >= 1"));
    }
    Ok(haar_columns(d, d, seed))
}

fn cumulative(weights: ArrayView1<'_, f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn draw_index<R: Rng + ?Sized>(cum: &[f64], rng: &mut R) -> usize {
    let total = *cum.last().expect("non-empty cloud");
    let u = rng.random::<f64>() * total;
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

/// Random-path slices: each direction is the normalized difference `x - y` of
/// a pair drawn from `a ⊗ b` by weight, perturbed by a vMF draw with
/// concentration `kappa` (`+∞` keeps the path direction).
pub fn sample_random_path_slices(
    a: &WeightedCloud,
    b: &WeightedCloud,
    count: usize,
    kappa: f64,
    seed: u64,
) -> Result<SliceSet> {
    if a.dim() != b.dim() {
        return Err(Error::contract(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    check_shape(a.dim(), count)?;
    if kappa.is_nan() || kappa < 0.0 {
        return Err(Error::contract(format!("concentration must be >= 0, got {kappa}")));
    }
    let d = a.dim();
    let cum_a = cumulative(a.weights());
    let cum_b = cumulative(b.weights());
    let rows: Vec<Result<Array1<f64>>> = (0..count)
        .into_par_iter()
        .map(|l| {
            let mut rng = rng::stream(seed, l as u64);
            for _ in 0..=MAX_PAIR_REDRAWS {
                let i = draw_index(&cum_a, &mut rng);
                let j = draw_index(&cum_b, &mut rng);
                let diff = &a.point(i) - &b.point(j);
                let norm = diff.dot(&diff).sqrt();
                if norm > 0.0 {
                    let base = diff / norm;
                    if kappa == f64::INFINITY {
                        return Ok(base);
                    }
                    let vmf = VonMisesFisher::new(base.view(), kappa)?;
                    return Ok(vmf.sample(&mut rng));
                }
            }
            Err(Error::DegeneratePair(format!(
                "slice {l}: {MAX_PAIR_REDRAWS} redraws all produced coincident points"
            )))
        })
        .collect();
    let mut dirs = Array2::zeros((count, d));
    for (l, row) in rows.into_iter().enumerate() {
        dirs.row_mut(l).assign(&row?);
    }
    Ok(SliceSet::new_unchecked(dirs, seed, SliceDistribution::RandomPath { kappa }))
}
