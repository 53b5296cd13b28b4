//! Sliced gradients and particle gradient flows.
//!
//! The flow minimizes the Monte Carlo objective `(1/L) Σ_l W_p^p(θ_l#X, θ_l#Y)`,
//! or its `p`-th root (see [`FlowObjective`]), over the source positions `X`
//! by plain gradient descent. Gradients hold the
//! per-slice monotone couplings fixed, so the gradient for point `i` on slice
//! `θ` is `Σ_j γ_ij · ∂|r|^p/∂r · θ` with `r = θ^T(x_i - y_j)`.

use std::io::Write;
use std::time::Instant;

use ndarray::{Array1, Array2, Zip};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::measures::{check_order, exact_w2, line_sensitivity, sort_order, walk_monotone, WeightedCloud};
use crate::rng;
use crate::slicing::{
    project_all, sample_random_path_slices, sample_uniform_sphere, SliceSet, Subspace, REDUCE_ZERO_TOL,
};
use crate::table::fmt_float;
use crate::variants::{energy_weights, uniform_pair, EnergyFn};
use crate::{Error, Result};

/// Size of the fixed probe set that averages couplings in [`expected_gradient`].
pub const EXPECTED_PROBE_SLICES: usize = 64;
const EXPECTED_PROBE_SEED: u64 = 0x4558_5043;

/// Default spacing of W2 checkpoints.
pub const DEFAULT_EVAL_EVERY: usize = 500;

fn check_pair(source: &WeightedCloud, target: &WeightedCloud) -> Result<()> {
    if source.dim() != target.dim() {
        return Err(Error::contract(format!(
            "dimension mismatch: {} vs {}",
            source.dim(),
            target.dim()
        )));
    }
    Ok(())
}

/// Per-slice objective values and source sensitivities (`L × n`).
fn slice_terms(source: &WeightedCloud, target: &WeightedCloud, p: f64, slices: &SliceSet) -> (Vec<f64>, Array2<f64>) {
    let xs = project_all(source, slices);
    let ys = project_all(target, slices);
    let ws = source.weights().to_vec();
    let wt = target.weights().to_vec();
    let pair = uniform_pair(source, target);
    let rows: Vec<(f64, Vec<f64>)> = (0..slices.len())
        .into_par_iter()
        .map(|l| {
            let s = line_sensitivity(&xs.row(l).to_vec(), &ws, &ys.row(l).to_vec(), &wt, p, pair);
            (s.value, s.source)
        })
        .collect();
    let mut sens = Array2::zeros((slices.len(), source.len()));
    let mut values = Vec::with_capacity(slices.len());
    for (l, (v, row)) in rows.into_iter().enumerate() {
        values.push(v);
        sens.row_mut(l).assign(&Array1::from(row));
    }
    (values, sens)
}

/// `Σ_l w_l c_l θ_l^T`, the gradient for per-slice weights `w`.
fn combine(sens: &Array2<f64>, weights: &[f64], slices: &SliceSet) -> Array2<f64> {
    let mut scaled = sens.clone();
    for (mut row, &w) in scaled.outer_iter_mut().zip(weights) {
        row *= w;
    }
    scaled.t().dot(&slices.directions())
}

fn check_slices(source: &WeightedCloud, slices: &SliceSet) -> Result<()> {
    if slices.dim() != source.dim() {
        return Err(Error::contract(format!(
            "slices live in dimension {}, clouds in {}",
            slices.dim(),
            source.dim()
        )));
    }
    Ok(())
}

/// Gradient of the Monte Carlo objective with respect to the source points.
pub fn sw_gradient(source: &WeightedCloud, target: &WeightedCloud, p: f64, slices: &SliceSet) -> Result<Array2<f64>> {
    check_order(p)?;
    check_pair(source, target)?;
    check_slices(source, slices)?;
    let (_, sens) = slice_terms(source, target, p, slices);
    let w = vec![1.0 / slices.len() as f64; slices.len()];
    Ok(combine(&sens, &w, slices))
}

/// Largest stable step for a point of mass `q` in effective dimension `k`.
pub fn optimal_lr(k: usize, q: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::contract("effective dimension must be >= 1"));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::contract(format!("point mass must lie in (0, 1], got {q}")));
    }
    Ok(k as f64 / (2.0 * q))
}

/// Quadratic-cost gradient with `E[θθ^T] = I/d` substituted:
/// `(2/d)(q_i x_i - Σ_j γ̄_ij y_j)`, where `γ̄` averages the monotone couplings
/// of a fixed probe set of slices.
pub fn expected_gradient(source: &WeightedCloud, target: &WeightedCloud, p: f64) -> Result<Array2<f64>> {
    let probe = sample_uniform_sphere(source.dim(), EXPECTED_PROBE_SLICES, EXPECTED_PROBE_SEED)?;
    expected_gradient_with_probe(source, target, p, &probe)
}

/// [`expected_gradient`] with a caller-chosen probe set.
pub fn expected_gradient_with_probe(
    source: &WeightedCloud,
    target: &WeightedCloud,
    p: f64,
    probe: &SliceSet,
) -> Result<Array2<f64>> {
    if p != 2.0 {
        return Err(Error::Unsupported(format!(
            "the expectation-mode gradient is only defined for p = 2, got {p}"
        )));
    }
    check_pair(source, target)?;
    check_slices(source, probe)?;
    let n = source.len();
    let d = source.dim() as f64;
    let xs = project_all(source, probe);
    let ys = project_all(target, probe);
    let ws = source.weights().to_vec();
    let wt = target.weights().to_vec();
    // Σ_j γ̄_ij (x_i - y_j), which equals q_i x_i - Σ_j γ̄_ij y_j because the
    // couplings have source marginal q.
    let mut grad = Array2::<f64>::zeros((n, source.dim()));
    for l in 0..probe.len() {
        let oa = sort_order(&xs.row(l).to_vec());
        let ob = sort_order(&ys.row(l).to_vec());
        walk_monotone(&ws, &oa, &wt, &ob, |i, j, m| {
            let diff = &source.point(i) - &target.point(j);
            grad.row_mut(i).scaled_add(m, &diff);
        });
    }
    grad /= probe.len() as f64;
    grad *= 2.0 / d;
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearningRate {
    Scalar(f64),
    /// One step size per source point.
    PerPoint(Vec<f64>),
}

impl LearningRate {
    fn validate(&self, n: usize) -> Result<()> {
        let ok = |h: f64| h.is_finite() && h > 0.0;
        match self {
            LearningRate::Scalar(h) if ok(*h) => Ok(()),
            LearningRate::PerPoint(h) if h.len() == n && h.iter().all(|&v| ok(v)) => Ok(()),
            LearningRate::Scalar(h) => Err(Error::contract(format!("learning rate must be positive, got {h}"))),
            LearningRate::PerPoint(h) => Err(Error::contract(format!(
                "need {n} positive per-point learning rates, got {}",
                h.len()
            ))),
        }
    }
}

/// Slice weighting used by the flow.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowVariant {
    Classical,
    /// Slices weighted by `‖U^T θ‖^{-p}`.
    ReciprocalEs(Subspace),
    /// Energy weights, held fixed while differentiating.
    Energy(EnergyFn),
    /// Slices drawn along random source-target paths.
    RandomPath { kappa: f64 },
    /// Slice-free expectation gradient (p = 2 only).
    Expected,
}

impl FlowVariant {
    pub fn name(&self) -> &'static str {
        match self {
            FlowVariant::Classical => "classical",
            FlowVariant::ReciprocalEs(_) => "reciprocal-es",
            FlowVariant::Energy(_) => "energy",
            FlowVariant::RandomPath { .. } => "random-path",
            FlowVariant::Expected => "expected",
        }
    }
}

/// Quantity the flow descends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowObjective {
    /// The `p`-th power `SW_p^p`; its Hessian gives the `k / (2q)` step bound.
    Power,
    /// The distance `SW_p` itself. Its gradient does not vanish near the
    /// target, so the final error scales with the step size and sweeps show
    /// a basin of good learning rates.
    Root,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMetric {
    /// Exact W2 against the target (equal-size uniform clouds only).
    ExactW2,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub p: f64,
    /// Slices per iteration.
    pub slices: usize,
    pub lr: LearningRate,
    pub iters: usize,
    pub eval_every: usize,
    pub seed: u64,
    pub variant: FlowVariant,
    pub objective: FlowObjective,
    /// Draw fresh slices every iteration; otherwise reuse the first set.
    pub resample_slices: bool,
    pub metric: FlowMetric,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            slices: 50,
            lr: LearningRate::Scalar(1.0),
            iters: 10_000,
            eval_every: DEFAULT_EVAL_EVERY,
            seed: 0,
            variant: FlowVariant::Classical,
            objective: FlowObjective::Power,
            resample_slices: true,
            metric: FlowMetric::ExactW2,
        }
    }
}

impl FlowConfig {
    fn validate(&self, source: &WeightedCloud) -> Result<()> {
        check_order(self.p)?;
        if self.iters == 0 || self.eval_every == 0 || self.slices == 0 {
            return Err(Error::contract("iters, eval_every and slices must all be >= 1"));
        }
        self.lr.validate(source.len())?;
        if self.variant == FlowVariant::Expected && (self.p != 2.0 || self.objective != FlowObjective::Power) {
            return Err(Error::Unsupported(
                "the expected-gradient flow needs p = 2 and the power objective".into(),
            ));
        }
        if let FlowVariant::ReciprocalEs(sub) = &self.variant {
            if sub.ambient_dim() != source.dim() {
                return Err(Error::contract("subspace and clouds have different ambient dimensions"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub iteration: usize,
    pub w2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub checkpoints: Vec<Checkpoint>,
    pub final_cloud: WeightedCloud,
    /// Wall time in seconds.
    pub wall_time: f64,
}

impl FlowTrace {
    pub fn final_w2(&self) -> Option<f64> {
        self.checkpoints.last().map(|c| c.w2)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let to_io = |e: csv::Error| Error::io("<csv>", e.into());
        wtr.write_record(["iteration", "w2"]).map_err(to_io)?;
        for c in &self.checkpoints {
            wtr.write_record([c.iteration.to_string(), fmt_float(c.w2)]).map_err(to_io)?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))
    }
}

/// Slices for iteration `t`.
fn step_slices(source: &WeightedCloud, target: &WeightedCloud, cfg: &FlowConfig, t: usize) -> Result<SliceSet> {
    let seed = rng::derive_seed(cfg.seed, if cfg.resample_slices { t as u64 } else { 0 });
    match cfg.variant {
        FlowVariant::RandomPath { kappa } => sample_random_path_slices(source, target, cfg.slices, kappa, seed),
        _ => sample_uniform_sphere(source.dim(), cfg.slices, seed),
    }
}

/// Gradient for one flow step. `cached` holds the slice set when slices are reused.
fn step_gradient(
    source: &WeightedCloud,
    target: &WeightedCloud,
    cfg: &FlowConfig,
    t: usize,
    cached: &mut Option<SliceSet>,
) -> Result<Array2<f64>> {
    if cfg.variant == FlowVariant::Expected {
        return expected_gradient(source, target, cfg.p);
    }
    // Random paths depend on the current source, so they are always redrawn.
    let reuse = !cfg.resample_slices && !matches!(cfg.variant, FlowVariant::RandomPath { .. });
    let slices = match cached {
        Some(s) if reuse => s.clone(),
        _ => {
            let s = step_slices(source, target, cfg, t)?;
            if reuse {
                *cached = Some(s.clone());
            }
            s
        }
    };
    let (values, sens) = slice_terms(source, target, cfg.p, &slices);
    let count = slices.len() as f64;
    let weights: Vec<f64> = match &cfg.variant {
        FlowVariant::Classical | FlowVariant::RandomPath { .. } | FlowVariant::Expected => vec![1.0 / count; slices.len()],
        FlowVariant::ReciprocalEs(sub) => slices
            .directions()
            .outer_iter()
            .map(|theta| {
                let c = sub.coefficients(theta);
                let phi = c.dot(&c).sqrt();
                if phi < REDUCE_ZERO_TOL {
                    0.0
                } else {
                    phi.powf(-cfg.p) / count
                }
            })
            .collect(),
        FlowVariant::Energy(f) => energy_weights(&values, *f)?,
    };
    let mut grad = combine(&sens, &weights, &slices);
    if cfg.objective == FlowObjective::Root {
        // ∇ V^{1/p} = V^{1/p - 1} ∇V / p, taken as zero once V vanishes.
        let value: f64 = weights.iter().zip(&values).map(|(w, v)| w * v).sum();
        let scale = if value > 0.0 {
            value.powf(1.0 / cfg.p - 1.0) / cfg.p
        } else {
            0.0
        };
        grad *= scale;
    }
    Ok(grad)
}

/// Gradient descent of the source cloud toward `target`.
pub fn run_flow(source: &WeightedCloud, target: &WeightedCloud, cfg: &FlowConfig) -> Result<FlowTrace> {
    check_pair(source, target)?;
    cfg.validate(source)?;
    let started = Instant::now();
    let mut current = source.clone();
    let mut checkpoints = Vec::new();
    let mut cached = None;
    let record = |cloud: &WeightedCloud, t: usize, out: &mut Vec<Checkpoint>| -> Result<()> {
        if cfg.metric == FlowMetric::ExactW2 {
            out.push(Checkpoint {
                iteration: t,
                w2: exact_w2(cloud, target)?,
            });
        }
        Ok(())
    };
    let step_sizes: Array1<f64> = match &cfg.lr {
        LearningRate::Scalar(h) => Array1::from_elem(source.len(), *h),
        LearningRate::PerPoint(h) => Array1::from(h.clone()),
    };
    for t in 0..cfg.iters {
        if t % cfg.eval_every == 0 {
            record(&current, t, &mut checkpoints)?;
        }
        let grad = step_gradient(&current, target, cfg, t, &mut cached)?;
        let mut pts = current.points().to_owned();
        Zip::from(pts.rows_mut())
            .and(grad.rows())
            .and(&step_sizes)
            .for_each(|mut x, g, &h| x.scaled_add(-h, &g));
        if pts.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { iteration: t + 1 });
        }
        current = current.with_points(pts)?;
    }
    record(&current, cfg.iters, &mut checkpoints)?;
    Ok(FlowTrace {
        checkpoints,
        final_cloud: current,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Monte Carlo objective `(1/L) Σ_l W_p^p` on a fixed slice set.
pub fn sw_objective(source: &WeightedCloud, target: &WeightedCloud, p: f64, slices: &SliceSet) -> Result<f64> {
    Ok(crate::variants::sw_mc(source, target, p, slices)?.value_p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lr: f64,
    /// `None` when the run diverged.
    pub final_w2: Option<f64>,
    pub diverged: bool,
    pub wall_time_s: f64,
}

/// One flow per learning rate, sharing every other setting and the seed.
/// Divergent runs are recorded in their row rather than aborting the sweep.
pub fn lr_sweep(
    source: &WeightedCloud,
    target: &WeightedCloud,
    grid: &[f64],
    template: &FlowConfig,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::contract("learning-rate grid is empty"));
    }
    check_pair(source, target)?;
    let check = FlowConfig {
        lr: LearningRate::Scalar(1.0),
        ..template.clone()
    };
    check.validate(source)?;
    if let Some(bad) = grid.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
        return Err(Error::contract(format!("learning rate must be positive, got {bad}")));
    }
    grid.par_iter()
        .map(|&lr| {
            let cfg = FlowConfig {
                lr: LearningRate::Scalar(lr),
                ..template.clone()
            };
            let started = Instant::now();
            match run_flow(source, target, &cfg) {
                Ok(trace) => {
                    let w2 = trace.final_w2().filter(|w| w.is_finite());
                    Ok(SweepRow {
                        lr,
                        final_w2: w2,
                        diverged: w2.is_none() && cfg.metric == FlowMetric::ExactW2,
                        wall_time_s: started.elapsed().as_secs_f64(),
                    })
                }
                Err(Error::Divergence { .. }) => Ok(SweepRow {
                    lr,
                    final_w2: None,
                    diverged: true,
                    wall_time_s: started.elapsed().as_secs_f64(),
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Index of the converged row with the smallest final W2 (first on ties).
pub fn best_row(rows: &[SweepRow]) -> Option<usize> {
    rows.iter()
        .enumerate()
        .filter_map(|(i, r)| r.final_w2.filter(|_| !r.diverged).map(|w| (i, w)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
}

/// CSV with columns `lr, final_w2, diverged, wall_time_s, best`; diverged
/// rows leave `final_w2` empty.
pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    let best = best_row(rows);
    let mut wtr = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| Error::io("<csv>", e.into());
    wtr.write_record(["lr", "final_w2", "diverged", "wall_time_s", "best"])
        .map_err(to_io)?;
    for (i, r) in rows.iter().enumerate() {
        wtr.write_record([
            fmt_float(r.lr),
            r.final_w2.map(fmt_float).unwrap_or_default(),
            r.diverged.to_string(),
            format!("{:.3}", r.wall_time_s),
            (best == Some(i)).to_string(),
        ])
        .map_err(to_io)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))
}
