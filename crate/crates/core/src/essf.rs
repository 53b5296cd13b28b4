//! The effective subspace scaling factor `C_k / C_d`.
//!
//! For measures supported on a `k`-dimensional subspace of `R^d`, sliced
//! distances in `R^d` are those in `R^k` scaled by `E‖U^T θ‖^p` over uniform
//! `θ`, which equals `Γ(k/2 + p/2) Γ(d/2) / (Γ(k/2) Γ(d/2 + p/2))`.

use std::io::Write;

use rand::Rng;
use rand_distr::{ChiSquared, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::gaussian_pair_subspace;
use crate::gamma::ln_gamma_ratio;
use crate::measures::check_order;
use crate::rng::{self, tag};
use crate::slicing::{sample_uniform_sphere, Subspace};
use crate::table::fmt_float;
use crate::variants::sw_mc;
use crate::{Error, Result};

/// Separation of the two Gaussians in the theorem experiment.
pub const VALIDATION_SEPARATION: f64 = 5.0;

fn check_dims(d: usize, k: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::contract(format!("need 1 <= k <= d, got d = {d}, k = {k}")));
    }
    Ok(())
}

/// Exact scaling factor, through log-gamma ratios so that `d` up to `10^6`
/// neither overflows nor cancels.
pub fn essf_exact(d: usize, k: usize, p: f64) -> Result<f64> {
    check_dims(d, k)?;
    check_order(p)?;
    if k == d {
        return Ok(1.0);
    }
    let half_p = p / 2.0;
    Ok((ln_gamma_ratio(k as f64 / 2.0, half_p) - ln_gamma_ratio(d as f64 / 2.0, half_p)).exp())
}

/// `(1/L) Σ_l ‖U^T θ_l‖^p` over `L` uniform slices.
pub fn essf_empirical(sub: &Subspace, count: usize, p: f64, seed: u64) -> Result<f64> {
    check_order(p)?;
    let slices = sample_uniform_sphere(sub.ambient_dim(), count, seed)?;
    let total: f64 = slices
        .directions()
        .outer_iter()
        .map(|theta| {
            let c = sub.coefficients(theta);
            c.dot(&c).powf(p / 2.0)
        })
        .sum();
    Ok(total / count as f64)
}

/// Ambient-to-reduced ratio of Monte Carlo sliced distances for two separated
/// Gaussians in a random `k`-dimensional subspace of `R^d`. Returns
/// `(ratio_hat, exact)`.
pub fn validate_theorem(d: usize, k: usize, p: f64, n: usize, count: usize, seed: u64) -> Result<(f64, f64)> {
    let exact = essf_exact(d, k, p)?;
    let (a, b, sub) = gaussian_pair_subspace(d, k, n, VALIDATION_SEPARATION, seed)?;
    let ambient = sample_uniform_sphere(d, count, rng::derive_seed(seed, tag::AMBIENT_SLICES))?;
    let reduced = sample_uniform_sphere(k, count, rng::derive_seed(seed, tag::REDUCED_SLICES))?;
    let high = sw_mc(&a, &b, p, &ambient)?.value_p;
    let low = sw_mc(&sub.reduce_cloud(&a)?, &sub.reduce_cloud(&b)?, p, &reduced)?.value_p;
    if low <= 0.0 {
        return Err(Error::Numeric("reduced sliced distance vanished".into()));
    }
    Ok((high / low, exact))
}

/// Statistics of the empirical factor at one slice count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssfReport {
    pub d: usize,
    pub k: usize,
    pub p: f64,
    #[serde(rename = "L")]
    pub slices: usize,
    pub runs: usize,
    pub exact: f64,
    pub mean: f64,
    /// Sample standard deviation over runs.
    pub std: f64,
    pub seed: u64,
}

impl EssfReport {
    pub fn standard_error(&self) -> f64 {
        self.std / (self.runs as f64).sqrt()
    }
}

/// Mean and sample standard deviation of the empirical factor over `runs`
/// repetitions for every slice count in `grid`, one report per count.
///
/// Run `r` uses seed `seed + r`. The factor only depends on the subspace
/// through rotation-invariant quantities, so the first `k` coordinate axes
/// stand in for a random subspace. Slice `l` then needs only its first `k`
/// Gaussian coordinates and the squared norm of the other `d - k`, which is
/// drawn directly as a `χ²_{d-k}` variate; this has exactly the law of a
/// uniform slice at `O(k)` cost. A run's estimate at count `L` reads the first
/// `L` slices of that run's stream, so all counts share one pass.
pub fn essf_variance_curve(
    d: usize,
    k: usize,
    p: f64,
    grid: &[usize],
    runs: usize,
    seed: u64,
) -> Result<Vec<EssfReport>> {
    Ok(essf_variance_curves(d, k, &[p], grid, runs, seed)?.remove(0))
}

/// [`essf_variance_curve`] for several orders at once, drawing the slices only
/// once. Returns one curve per entry of `orders`.
pub fn essf_variance_curves(
    d: usize,
    k: usize,
    orders: &[f64],
    grid: &[usize],
    runs: usize,
    seed: u64,
) -> Result<Vec<Vec<EssfReport>>> {
    check_dims(d, k)?;
    for &p in orders {
        check_order(p)?;
    }
    if runs < 2 {
        return Err(Error::contract("variance curves need at least two runs"));
    }
    if grid.is_empty() || grid.contains(&0) {
        return Err(Error::contract("slice counts must be >= 1"));
    }
    let mut counts = grid.to_vec();
    counts.sort_unstable();
    counts.dedup();
    let max_count = *counts.last().expect("non-empty grid");

    let tail = (d > k).then(|| ChiSquared::new((d - k) as f64).expect("positive degrees of freedom"));

    // estimates[r][o][g]: run r, order o, grid position g.
    let estimates: Vec<Vec<Vec<f64>>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let run_seed = seed.wrapping_add(r as u64);
            let mut sums = vec![0.0; orders.len()];
            let mut out = vec![Vec::with_capacity(counts.len()); orders.len()];
            let mut head = vec![0.0; k];
            let mut next = 0;
            for l in 0..max_count {
                let mut stream = rng::stream(run_seed, l as u64);
                let sq = loop {
                    for v in head.iter_mut() {
                        *v = stream.sample(StandardNormal);
                    }
                    let inside: f64 = head.iter().map(|v| v * v).sum();
                    let outside = tail.map_or(0.0, |t| stream.sample(t));
                    if inside + outside > 0.0 {
                        break inside / (inside + outside);
                    }
                };
                for (o, &p) in orders.iter().enumerate() {
                    sums[o] += if p == 2.0 { sq } else { sq.powf(p / 2.0) };
                }
                if l + 1 == counts[next] {
                    for o in 0..orders.len() {
                        out[o].push(sums[o] / (l + 1) as f64);
                    }
                    next += 1;
                }
            }
            out
        })
        .collect();

    orders
        .iter()
        .enumerate()
        .map(|(o, &p)| {
            let exact = essf_exact(d, k, p)?;
            Ok(counts
                .iter()
                .enumerate()
                .map(|(g, &count)| {
                    let values: Vec<f64> = estimates.iter().map(|run| run[o][g]).collect();
                    let (mean, std) = mean_std(&values);
                    EssfReport {
                        d,
                        k,
                        p,
                        slices: count,
                        runs,
                        exact,
                        mean,
                        std,
                        seed,
                    }
                })
                .collect())
        })
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Least-squares slope of `ln(std²)` against `ln L`.
pub fn variance_slope(reports: &[EssfReport]) -> f64 {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| ((r.slices as f64).ln(), (r.std * r.std).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn write_essf_csv<W: Write>(writer: W, reports: &[EssfReport]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| Error::io("<csv>", e.into());
    wtr.write_record(["d", "k", "p", "L", "runs", "exact", "mean", "std", "seed"])
        .map_err(to_io)?;
    for r in reports {
        wtr.write_record([
            r.d.to_string(),
            r.k.to_string(),
            fmt_float(r.p),
            r.slices.to_string(),
            r.runs.to_string(),
            fmt_float(r.exact),
            fmt_float(r.mean),
            fmt_float(r.std),
            r.seed.to_string(),
        ])
        .map_err(to_io)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))
}
