//! Sliced Wasserstein estimators under slice reweighting.
//!
//! Every estimator evaluates the exact one-dimensional `W_p^p` on each slice
//! and aggregates with per-slice weights. Per-slice work runs in parallel; the
//! aggregation is a plain sequential sum in slice order, so results do not
//! depend on the thread count.

use std::time::Instant;

use ndarray::{Array1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::measures::{check_order, line_sensitivity, line_wpp, WeightedCloud};
use crate::rng::{self, tag};
use crate::slicing::{
    fill_uniform, project_all, sample_random_path_slices, sample_uniform_sphere, SliceDistribution, SliceSet,
    Subspace, REDUCE_ZERO_TOL,
};
use crate::{Error, Result};

/// Positive increasing energy used by EBSW.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyFn {
    /// `f(x) = e^x`, evaluated with the maximum shifted out.
    Exp,
    /// `f(x) = x + 1`.
    IdentityPlusOne,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightingScheme {
    Classical,
    /// Weights `‖U^T θ‖^{-p}`, with orthogonal slices contributing zero.
    ReciprocalEs(Subspace),
    Energy(EnergyFn),
    /// Plain average over slices that must come from a random-path sampler.
    RandomPath,
}

impl WeightingScheme {
    pub fn name(&self) -> &'static str {
        match self {
            WeightingScheme::Classical => "classical",
            WeightingScheme::ReciprocalEs(_) => "reciprocal-es",
            WeightingScheme::Energy(_) => "energy",
            WeightingScheme::RandomPath => "random-path",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwEstimate {
    /// The estimate of `SW_p^p`.
    pub value_p: f64,
    pub per_slice: Vec<f64>,
    pub weights: Vec<f64>,
    pub p: f64,
}

impl SwEstimate {
    /// `SW_p`, the `p`-th root of the estimate.
    pub fn value(&self) -> f64 {
        self.value_p.powf(1.0 / self.p)
    }
}

/// One estimate in the JSON export format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub variant: String,
    pub p: f64,
    #[serde(rename = "L")]
    pub slices: usize,
    pub seed: u64,
    pub value_p: f64,
    pub runtime_ms: f64,
}

impl EstimateRecord {
    pub fn new(variant: &str, estimate: &SwEstimate, seed: u64, started: Instant) -> Self {
        Self {
            variant: variant.to_string(),
            p: estimate.p,
            slices: estimate.per_slice.len(),
            seed,
            value_p: estimate.value_p,
            runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

fn check_pair(a: &WeightedCloud, b: &WeightedCloud, p: f64) -> Result<()> {
    check_order(p)?;
    if a.dim() != b.dim() {
        return Err(Error::contract(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

fn check_slices(a: &WeightedCloud, slices: &SliceSet) -> Result<()> {
    if slices.dim() != a.dim() {
        return Err(Error::contract(format!(
            "slices live in dimension {}, clouds in {}",
            slices.dim(),
            a.dim()
        )));
    }
    Ok(())
}

pub(crate) fn uniform_pair(a: &WeightedCloud, b: &WeightedCloud) -> bool {
    a.len() == b.len() && a.is_uniform() && b.is_uniform()
}

/// `W_p^p` of the projections on every slice, in slice order.
pub fn per_slice_wpp(a: &WeightedCloud, b: &WeightedCloud, p: f64, slices: &SliceSet) -> Result<Vec<f64>> {
    check_pair(a, b, p)?;
    check_slices(a, slices)?;
    Ok(per_slice_unchecked(a, b, p, slices.directions()))
}

fn per_slice_unchecked(a: &WeightedCloud, b: &WeightedCloud, p: f64, directions: ArrayView2<'_, f64>) -> Vec<f64> {
    let set = SliceSet::new_unchecked(directions.to_owned(), 0, SliceDistribution::Explicit);
    let pa = project_all(a, &set);
    let pb = project_all(b, &set);
    let wa = a.weights().to_vec();
    let wb = b.weights().to_vec();
    let pair = uniform_pair(a, b);
    (0..set.len())
        .into_par_iter()
        .map(|l| {
            let xa = pa.row(l).to_vec();
            let xb = pb.row(l).to_vec();
            line_wpp(&xa, &wa, &xb, &wb, p, pair)
        })
        .collect()
}

/// Monte Carlo sliced Wasserstein: the plain average of the per-slice values.
pub fn sw_mc(a: &WeightedCloud, b: &WeightedCloud, p: f64, slices: &SliceSet) -> Result<SwEstimate> {
    let per_slice = per_slice_wpp(a, b, p, slices)?;
    let value_p = per_slice.iter().sum::<f64>() / per_slice.len() as f64;
    Ok(SwEstimate {
        value_p,
        weights: vec![1.0; per_slice.len()],
        per_slice,
        p,
    })
}

/// Sliced Wasserstein with each slice reweighted according to `scheme`.
pub fn rescaled_sw(
    a: &WeightedCloud,
    b: &WeightedCloud,
    p: f64,
    slices: &SliceSet,
    scheme: &WeightingScheme,
) -> Result<SwEstimate> {
    match scheme {
        WeightingScheme::Classical => sw_mc(a, b, p, slices),
        WeightingScheme::RandomPath => {
            if !matches!(slices.distribution(), SliceDistribution::RandomPath { .. }) {
                return Err(Error::contract("random-path weighting needs slices from the random-path sampler"));
            }
            sw_mc(a, b, p, slices)
        }
        WeightingScheme::ReciprocalEs(sub) => {
            let per_slice = per_slice_wpp(a, b, p, slices)?;
            if sub.ambient_dim() != slices.dim() {
                return Err(Error::contract("subspace and slices have different ambient dimensions"));
            }
            let weights: Vec<f64> = slices
                .directions()
                .outer_iter()
                .map(|theta| {
                    let c = sub.coefficients(theta);
                    let phi = c.dot(&c).sqrt();
                    if phi < REDUCE_ZERO_TOL {
                        0.0
                    } else {
                        phi.powf(-p)
                    }
                })
                .collect();
            let total: f64 = weights.iter().zip(&per_slice).map(|(w, v)| w * v).sum();
            Ok(SwEstimate {
                value_p: total / per_slice.len() as f64,
                per_slice,
                weights,
                p,
            })
        }
        WeightingScheme::Energy(f) => {
            let per_slice = per_slice_wpp(a, b, p, slices)?;
            let weights = energy_weights(&per_slice, *f)?;
            let value_p = weights.iter().zip(&per_slice).map(|(w, v)| w * v).sum();
            Ok(SwEstimate {
                value_p,
                per_slice,
                weights,
                p,
            })
        }
    }
}

/// Normalized energies `f(v_l) / Σ_m f(v_m)`.
pub fn energy_weights(values: &[f64], f: EnergyFn) -> Result<Vec<f64>> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("energy of a non-finite slice value {v}")));
    }
    let raw: Vec<f64> = match f {
        EnergyFn::Exp => {
            let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            values.iter().map(|v| (v - top).exp()).collect()
        }
        EnergyFn::IdentityPlusOne => values.iter().map(|v| v + 1.0).collect(),
    };
    let total: f64 = raw.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Numeric(format!("energy normalizer is {total}")));
    }
    Ok(raw.into_iter().map(|r| r / total).collect())
}

/// Energy-based sliced Wasserstein.
pub fn ebsw(a: &WeightedCloud, b: &WeightedCloud, p: f64, slices: &SliceSet, f: EnergyFn) -> Result<SwEstimate> {
    rescaled_sw(a, b, p, slices, &WeightingScheme::Energy(f))
}

/// Random-path sliced Wasserstein with vMF smoothing `kappa`.
pub fn rpsw(a: &WeightedCloud, b: &WeightedCloud, p: f64, count: usize, kappa: f64, seed: u64) -> Result<SwEstimate> {
    check_pair(a, b, p)?;
    let slices = sample_random_path_slices(a, b, count, kappa, seed)?;
    sw_mc(a, b, p, &slices)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxSwConfig {
    pub iters: usize,
    pub step: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MaxSwConfig {
    fn default() -> Self {
        Self {
            iters: 100,
            step: 0.1,
            restarts: 4,
            seed: 0,
        }
    }
}

/// Size of the uniform probe whose best slice floors the Max-SW value.
pub const MAX_SW_PROBE: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct MaxSwResult {
    pub value_p: f64,
    pub direction: Array1<f64>,
}

/// Value and `θ`-gradient of `W_p^p(θ#a, θ#b)` with the monotone coupling held fixed.
fn slice_objective(a: &WeightedCloud, b: &WeightedCloud, p: f64, theta: &Array1<f64>) -> (f64, Array1<f64>) {
    let xa = a.points().dot(theta).to_vec();
    let xb = b.points().dot(theta).to_vec();
    let sens = line_sensitivity(&xa, &a.weights().to_vec(), &xb, &b.weights().to_vec(), p, uniform_pair(a, b));
    let grad = a.points().t().dot(&Array1::from(sens.source)) + b.points().t().dot(&Array1::from(sens.target));
    (sens.value, grad)
}

/// Max-sliced Wasserstein by projected gradient ascent on the sphere.
///
/// Restart 0 starts from the best slice of a 50-slice uniform probe, later
/// restarts from independent uniform draws. The best value seen over all
/// iterates, restarts and the probe is returned, so the result never falls
/// below the probe and never decreases when restarts are added.
pub fn max_sw(a: &WeightedCloud, b: &WeightedCloud, p: f64, cfg: &MaxSwConfig) -> Result<MaxSwResult> {
    check_pair(a, b, p)?;
    if cfg.restarts == 0 {
        return Err(Error::contract("max_sw needs at least one restart"));
    }
    if !(cfg.step.is_finite() && cfg.step > 0.0) {
        return Err(Error::contract(format!("step must be positive, got {}", cfg.step)));
    }
    let d = a.dim();
    let probe = sample_uniform_sphere(d, MAX_SW_PROBE, rng::derive_seed(cfg.seed, tag::PROBE))?;
    let probe_values = per_slice_unchecked(a, b, p, probe.directions());
    let (best_l, &probe_best) = probe_values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
        .expect("non-empty probe");
    let mut best = MaxSwResult {
        value_p: probe_best,
        direction: probe.direction(best_l).to_owned(),
    };
    let restart_seed = rng::derive_seed(cfg.seed, tag::RESTART);
    for r in 0..cfg.restarts {
        let mut theta = if r == 0 {
            best.direction.clone()
        } else {
            let mut v = Array1::zeros(d);
            fill_uniform(restart_seed, r as u64, v.as_slice_mut().expect("contiguous"));
            v
        };
        for _ in 0..=cfg.iters {
            let (value, grad) = slice_objective(a, b, p, &theta);
            if value > best.value_p {
                best = MaxSwResult {
                    value_p: value,
                    direction: theta.clone(),
                };
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numeric("non-finite Max-SW gradient".into()));
            }
            theta.scaled_add(cfg.step, &grad);
            let norm = theta.dot(&theta).sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::Numeric(format!("Max-SW iterate has norm {norm}")));
            }
            theta /= norm;
        }
    }
    Ok(best)
}
