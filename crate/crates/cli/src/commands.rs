//! Subcommand definitions and their implementations.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;

use swkit::color::{
    read_image, synthetic_source, synthetic_target, transfer_colors, write_image, ColorTransferConfig, PaletteStep,
    RecolorRule, DEFAULT_KMEANS_ITERS,
};
use swkit::datasets::{
    embed, gaussian_cloud, gaussian_pair_subspace, load_cloud_csv, save_cloud_csv, Dataset, EmbeddingSpec,
};
use swkit::essf::{essf_variance_curves, validate_theorem, write_essf_csv, VALIDATION_SEPARATION};
use swkit::flow::{
    best_row, lr_sweep, run_flow, write_sweep_csv, FlowConfig, FlowMetric, FlowObjective, FlowVariant, LearningRate,
};
use swkit::slicing::sample_uniform_sphere;
use swkit::table::fmt_float;
use swkit::variants::{max_sw, rescaled_sw, rpsw, EnergyFn, EstimateRecord, MaxSwConfig, WeightingScheme};
use swkit::WeightedCloud;

use crate::grid::parse_lr_grid;
use crate::manifest::{digest, write_manifest, FileDigest, RunManifest};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ambient-to-reduced sliced distance ratios against the exact factor.
    Validate(ValidateArgs),
    /// Mean and spread of the empirical scaling factor over slice counts.
    Essf(EssfArgs),
    /// One gradient flow from a Gaussian (or CSV) source to a target cloud.
    Flow(FlowArgs),
    /// Learning-rate sweep of the gradient flow.
    Sweep(SweepArgs),
    /// Palette-based color transfer between two images.
    #[command(alias = "color")]
    ColorTransfer(ColorArgs),
    /// Runtime of the sliced-distance variants on one instance.
    Bench(BenchArgs),
    /// Writes a synthetic dataset or the synthetic image pair.
    Generate(GenerateArgs),
}

fn parse_dataset(s: &str) -> Result<Dataset, String> {
    s.parse().map_err(|e: swkit::Error| e.to_string())
}

const DIM_GRID: [usize; 9] = [10, 30, 50, 80, 100, 300, 500, 800, 1000];

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    /// Ambient dimensions for the sweep at fixed `k`.
    #[arg(long, value_delimiter = ',', default_values_t = DIM_GRID)]
    pub d_grid: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Subspace dimensions for the sweep at fixed `d`; empty skips it.
    #[arg(long, value_delimiter = ',', default_values_t = DIM_GRID)]
    pub k_grid: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub d: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub p: Vec<f64>,
    /// Points per Gaussian.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub slices: usize,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EssfArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [100, 500, 1000])]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 10, 50])]
    pub k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [10, 50, 100, 500, 1000, 5000, 10000])]
    pub slices_grid: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Classical,
    ReciprocalEs,
    Ebsw,
    EbswLinear,
    Rpsw,
    Expected,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveArg {
    Power,
    Root,
}

#[derive(Debug, Args, Serialize)]
pub struct ProblemArgs {
    /// Target shape; ignored when --target-csv is given.
    #[arg(long, value_parser = parse_dataset, default_value = "swiss")]
    pub dataset: Dataset,
    #[arg(long)]
    pub source_csv: Option<PathBuf>,
    #[arg(long)]
    pub target_csv: Option<PathBuf>,
    /// Points in the generated clouds.
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    /// The source is `gaussian(n, data_seed)`, the target `dataset(n, data_seed + 1)`.
    #[arg(long, default_value_t = 1)]
    pub data_seed: u64,
    /// Dimension the clouds are isometrically embedded in.
    #[arg(long, default_value_t = 2)]
    pub ambient_d: usize,
    #[arg(long, default_value_t = 3)]
    pub embed_seed: u64,
    #[arg(long, value_enum, default_value_t = VariantArg::Classical)]
    pub variant: VariantArg,
    /// vMF concentration for random-path slices.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub kappa: f64,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Power)]
    pub objective: ObjectiveArg,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 50)]
    pub slices: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 500)]
    pub eval_every: usize,
    /// Reuse one slice set for every iteration.
    #[arg(long)]
    pub fixed_slices: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct FlowArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lr: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Grid such as `{1,3,5,8}e{-6..2}` or `0.1,1,10`.
    #[arg(long, default_value = "{1,3,5,8}e{-6..2}")]
    pub lr_grid: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    Displacement,
    Centroid,
}

#[derive(Debug, Args, Serialize)]
pub struct ColorArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    /// Recolored image (.png or .ppm); the manifest goes next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 3000)]
    pub clusters: usize,
    /// Fixed step size; by default each cluster gets a mass-scaled step.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Scale of the mass-scaled step `scale * 3 / (2 q)`.
    #[arg(long, default_value_t = 0.5)]
    pub lr_scale: f64,
    #[arg(long, default_value_t = 50_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 50)]
    pub slices: usize,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Power)]
    pub objective: ObjectiveArg,
    #[arg(long, default_value_t = DEFAULT_KMEANS_ITERS)]
    pub kmeans_iters: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::Displacement)]
    pub rule: RuleArg,
    /// Points per side in the reported W2.
    #[arg(long, default_value_t = 1024)]
    pub w2_sample: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON summary with the final W2 and palette sizes.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchVariant {
    Classical,
    ReciprocalEs,
    Ebsw,
    MaxSw,
    Rpsw,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = [BenchVariant::Classical, BenchVariant::ReciprocalEs, BenchVariant::Ebsw, BenchVariant::MaxSw, BenchVariant::Rpsw])]
    pub variants: Vec<BenchVariant>,
    #[arg(long, default_value_t = 50)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub slices: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenerateKind {
    Swiss,
    #[value(name = "8gaussians")]
    EightGaussians,
    Knot,
    Gaussian,
    /// The synthetic cool/warm image pair.
    Images,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GenerateKind,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub ambient_d: usize,
    #[arg(long, default_value_t = 3)]
    pub embed_seed: u64,
    /// Image side length for `--kind images`.
    #[arg(long, default_value_t = 96)]
    pub size: u32,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Shared bookkeeping: times the command, hashes inputs and outputs and
/// writes the manifest last.
struct Run {
    command: &'static str,
    params: serde_json::Value,
    seed: u64,
    inputs: Vec<FileDigest>,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl Run {
    fn new(command: &'static str, params: &impl Serialize, seed: u64) -> Result<Self> {
        Ok(Self {
            command,
            params: serde_json::to_value(params)?,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(digest(path)?);
        Ok(())
    }

    fn create(&mut self, path: PathBuf) -> Result<BufWriter<File>> {
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.outputs.push(path);
        Ok(BufWriter::new(f))
    }

    fn finish(self, dir: &Path) -> Result<()> {
        let outputs = self.outputs.iter().map(|p| digest(p)).collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            params: self.params,
            seed: self.seed,
            inputs: self.inputs,
            outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        write_manifest(dir, &manifest)?;
        Ok(())
    }
}

fn out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Validate(a) => validate(a),
        Command::Essf(a) => essf(a),
        Command::Flow(a) => flow(a),
        Command::Sweep(a) => sweep(a),
        Command::ColorTransfer(a) => color(a),
        Command::Bench(a) => bench(a),
        Command::Generate(a) => generate(a),
    }
}

fn validate(a: ValidateArgs) -> Result<()> {
    out_dir(&a.out)?;
    let mut run = Run::new("validate", &a, a.seed)?;
    let mut cases: Vec<(&str, usize, usize)> = a.d_grid.iter().map(|&d| ("d", d, a.k)).collect();
    cases.extend(a.k_grid.iter().map(|&k| ("k", a.d, k)));
    if let Some((_, d, k)) = cases.iter().find(|c| c.2 == 0 || c.2 > c.1) {
        bail!("need 1 <= k <= d, got d = {d}, k = {k}");
    }
    let mut wtr = csv::Writer::from_writer(run.create(a.out.join("validate.csv"))?);
    wtr.write_record(["sweep", "d", "k", "p", "run", "seed", "ratio_hat", "exact"])?;
    for &(sweep, d, k) in &cases {
        for &p in &a.p {
            for r in 0..a.runs {
                let seed = a.seed.wrapping_add(r as u64);
                let (ratio, exact) = validate_theorem(d, k, p, a.n, a.slices, seed)?;
                wtr.write_record([
                    sweep.to_string(),
                    d.to_string(),
                    k.to_string(),
                    fmt_float(p),
                    r.to_string(),
                    seed.to_string(),
                    fmt_float(ratio),
                    fmt_float(exact),
                ])?;
            }
        }
    }
    wtr.flush()?;
    drop(wtr);
    run.finish(&a.out)
}

fn essf(a: EssfArgs) -> Result<()> {
    out_dir(&a.out)?;
    let mut run = Run::new("essf", &a, a.seed)?;
    let mut reports = Vec::new();
    for &d in &a.d {
        for &k in &a.k {
            if k > d {
                continue;
            }
            for curve in essf_variance_curves(d, k, &a.p, &a.slices_grid, a.runs, a.seed)? {
                reports.extend(curve);
            }
        }
    }
    reports.sort_by(|x, y| {
        (x.d, x.k, x.slices)
            .cmp(&(y.d, y.k, y.slices))
            .then(x.p.total_cmp(&y.p))
    });
    write_essf_csv(run.create(a.out.join("essf.csv"))?, &reports)?;
    run.finish(&a.out)
}

struct Problem {
    source: WeightedCloud,
    target: WeightedCloud,
    template: FlowConfig,
}

fn build_problem(a: &ProblemArgs, run: &mut Run) -> Result<Problem> {
    let source = match &a.source_csv {
        Some(path) => {
            run.input(path)?;
            load_cloud_csv(path)?
        }
        None => gaussian_cloud(a.n, 2, a.data_seed)?,
    };
    let target = match &a.target_csv {
        Some(path) => {
            run.input(path)?;
            load_cloud_csv(path)?
        }
        None => a.dataset.generate(a.n, a.data_seed.wrapping_add(1))?,
    };
    if source.dim() != target.dim() {
        bail!("source has dimension {}, target {}", source.dim(), target.dim());
    }
    let k = source.dim();
    if a.ambient_d < k {
        bail!("ambient dimension {} is below the data dimension {k}", a.ambient_d);
    }
    let spec = EmbeddingSpec::new(a.ambient_d, a.embed_seed)?;
    let (source, target, sub) = (embed(&source, &spec)?, embed(&target, &spec)?, spec.subspace(k)?);
    let variant = match a.variant {
        VariantArg::Classical => FlowVariant::Classical,
        VariantArg::ReciprocalEs => FlowVariant::ReciprocalEs(sub),
        VariantArg::Ebsw => FlowVariant::Energy(EnergyFn::Exp),
        VariantArg::EbswLinear => FlowVariant::Energy(EnergyFn::IdentityPlusOne),
        VariantArg::Rpsw => FlowVariant::RandomPath { kappa: a.kappa },
        VariantArg::Expected => FlowVariant::Expected,
    };
    let metric = if source.is_uniform() && target.is_uniform() && source.len() == target.len() {
        FlowMetric::ExactW2
    } else {
        FlowMetric::None
    };
    let template = FlowConfig {
        p: a.p,
        slices: a.slices,
        lr: LearningRate::Scalar(1.0),
        iters: a.iters,
        eval_every: a.eval_every,
        seed: a.seed,
        variant,
        objective: match a.objective {
            ObjectiveArg::Power => FlowObjective::Power,
            ObjectiveArg::Root => FlowObjective::Root,
        },
        resample_slices: !a.fixed_slices,
        metric,
    };
    Ok(Problem {
        source,
        target,
        template,
    })
}

fn flow(a: FlowArgs) -> Result<()> {
    out_dir(&a.out)?;
    let mut run = Run::new("flow", &a, a.problem.seed)?;
    let problem = build_problem(&a.problem, &mut run)?;
    let cfg = FlowConfig {
        lr: LearningRate::Scalar(a.lr),
        ..problem.template
    };
    let trace = run_flow(&problem.source, &problem.target, &cfg)?;
    trace.write_csv(run.create(a.out.join("trace.csv"))?)?;
    let final_path = a.out.join("final.csv");
    save_cloud_csv(&final_path, &trace.final_cloud)?;
    run.outputs.push(final_path);
    run.finish(&a.out)
}

fn sweep(a: SweepArgs) -> Result<()> {
    out_dir(&a.out)?;
    let grid = parse_lr_grid(&a.lr_grid).map_err(anyhow::Error::msg)?;
    let mut run = Run::new("sweep", &a, a.problem.seed)?;
    let problem = build_problem(&a.problem, &mut run)?;
    let rows = lr_sweep(&problem.source, &problem.target, &grid, &problem.template)?;
    write_sweep_csv(run.create(a.out.join("sweep.csv"))?, &rows)?;
    if let Some(best) = best_row(&rows) {
        eprintln!("best lr {} (final W2 {:.3e})", rows[best].lr, rows[best].final_w2.unwrap_or(f64::NAN));
    }
    run.finish(&a.out)
}

#[derive(Debug, Serialize)]
struct ColorReport {
    w2: f64,
    source_clusters: usize,
    target_clusters: usize,
    source_sse: f64,
    target_sse: f64,
    iters: usize,
    wall_time_s: f64,
}

fn color(a: ColorArgs) -> Result<()> {
    let dir = match a.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    out_dir(&dir)?;
    let mut run = Run::new("color-transfer", &a, a.seed)?;
    run.input(&a.source)?;
    run.input(&a.target)?;
    let source = read_image(&a.source)?;
    let target = read_image(&a.target)?;
    let cfg = ColorTransferConfig {
        clusters: a.clusters,
        kmeans_iters: a.kmeans_iters,
        step: match a.lr {
            Some(h) => PaletteStep::Fixed(h),
            None => PaletteStep::MassScaled(a.lr_scale),
        },
        flow: FlowConfig {
            iters: a.iters,
            eval_every: a.iters,
            slices: a.slices,
            seed: a.seed,
            objective: match a.objective {
                ObjectiveArg::Power => FlowObjective::Power,
                ObjectiveArg::Root => FlowObjective::Root,
            },
            ..FlowConfig::default()
        },
        rule: match a.rule {
            RuleArg::Displacement => RecolorRule::Displacement,
            RuleArg::Centroid => RecolorRule::Centroid,
        },
        w2_sample: a.w2_sample,
    };
    let out = transfer_colors(&source, &target, &cfg)?;
    write_image(&a.out, &out.image)?;
    run.outputs.push(a.out.clone());
    let report = ColorReport {
        w2: out.w2,
        source_clusters: out.source_palette.len(),
        target_clusters: out.target_palette.len(),
        source_sse: out.source_palette.sse(),
        target_sse: out.target_palette.sse(),
        iters: a.iters,
        wall_time_s: run.started.elapsed().as_secs_f64(),
    };
    eprintln!("final W2 {:.4}", out.w2);
    if let Some(path) = &a.report {
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        run.outputs.push(path.clone());
    }
    run.finish(&dir)
}

#[derive(Debug, Serialize)]
pub struct BenchSummary {
    pub variant: BenchVariant,
    pub mean_s: f64,
    pub std_s: f64,
    pub records: Vec<EstimateRecord>,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub slices: usize,
    pub p: f64,
    pub reps: usize,
    pub seed: u64,
    pub results: Vec<BenchSummary>,
}

fn bench(a: BenchArgs) -> Result<()> {
    if a.reps == 0 {
        bail!("--reps must be >= 1");
    }
    out_dir(&a.out)?;
    let mut run = Run::new("bench", &a, a.seed)?;
    let (x, y, sub) = gaussian_pair_subspace(a.d, a.k, a.n, VALIDATION_SEPARATION, a.seed)?;
    let mut results = Vec::new();
    for &variant in &a.variants {
        let mut records = Vec::with_capacity(a.reps);
        for r in 0..a.reps {
            let seed = a.seed.wrapping_add(r as u64);
            let started = Instant::now();
            let record = match variant {
                BenchVariant::MaxSw => {
                    let cfg = MaxSwConfig {
                        seed,
                        ..MaxSwConfig::default()
                    };
                    let res = max_sw(&x, &y, a.p, &cfg)?;
                    EstimateRecord {
                        variant: "max-sw".into(),
                        p: a.p,
                        slices: 1,
                        seed,
                        value_p: res.value_p,
                        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
                    }
                }
                BenchVariant::Rpsw => {
                    let est = rpsw(&x, &y, a.p, a.slices, f64::INFINITY, seed)?;
                    EstimateRecord::new("rpsw", &est, seed, started)
                }
                _ => {
                    let slices = sample_uniform_sphere(a.d, a.slices, seed)?;
                    let scheme = match variant {
                        BenchVariant::Classical => WeightingScheme::Classical,
                        BenchVariant::ReciprocalEs => WeightingScheme::ReciprocalEs(sub.clone()),
                        _ => WeightingScheme::Energy(EnergyFn::Exp),
                    };
                    let est = rescaled_sw(&x, &y, a.p, &slices, &scheme)?;
                    EstimateRecord::new(scheme.name(), &est, seed, started)
                }
            };
            records.push(record);
        }
        let secs: Vec<f64> = records.iter().map(|r| r.runtime_ms / 1e3).collect();
        let mean = secs.iter().sum::<f64>() / secs.len() as f64;
        let std = if secs.len() > 1 {
            (secs.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (secs.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        results.push(BenchSummary {
            variant,
            mean_s: mean,
            std_s: std,
            records,
        });
    }
    let report = BenchReport {
        d: a.d,
        k: a.k,
        n: a.n,
        slices: a.slices,
        p: a.p,
        reps: a.reps,
        seed: a.seed,
        results,
    };
    let w = run.create(a.out.join("bench.json"))?;
    serde_json::to_writer_pretty(w, &report)?;
    run.finish(&a.out)
}

fn generate(a: GenerateArgs) -> Result<()> {
    out_dir(&a.out)?;
    let mut run = Run::new("generate", &a, a.seed)?;
    let dataset = match a.kind {
        GenerateKind::Images => {
            for (name, img) in [
                ("cool.ppm", synthetic_source(a.size, a.size)?),
                ("warm.ppm", synthetic_target(a.size, a.size)?),
            ] {
                let path = a.out.join(name);
                write_image(&path, &img)?;
                run.outputs.push(path);
            }
            return run.finish(&a.out);
        }
        GenerateKind::Gaussian => None,
        GenerateKind::Swiss => Some(Dataset::SwissRoll),
        GenerateKind::EightGaussians => Some(Dataset::EightGaussians),
        GenerateKind::Knot => Some(Dataset::Knot),
    };
    let cloud = match dataset {
        Some(ds) => ds.generate(a.n, a.seed)?,
        None => gaussian_cloud(a.n, 2, a.seed)?,
    };
    let cloud = if a.ambient_d > 2 {
        embed(&cloud, &EmbeddingSpec::new(a.ambient_d, a.embed_seed)?)?
    } else {
        cloud
    };
    let name = match dataset {
        Some(ds) => format!("{ds}.csv"),
        None => "gaussian.csv".to_string(),
    };
    let path = a.out.join(name);
    save_cloud_csv(&path, &cloud)?;
    run.outputs.push(path);
    run.finish(&a.out)
}
