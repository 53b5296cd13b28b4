//! Palette-based color transfer.
//!
//! Both images become clouds of RGB values in `[0, 1]^3`, each is compressed
//! to a weighted k-means palette, and the source palette flows toward the
//! target palette. Every pixel then moves by its centroid's displacement.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flow::{run_flow, FlowConfig, FlowMetric, FlowTrace, LearningRate};
use crate::measures::{exact_w2, WeightedCloud};
use crate::rng::{self, tag};
use crate::{Error, Result};

/// 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Image(format!("empty image {width}x{height}")));
        }
        let want = width as usize * height as usize * 3;
        if data.len() != want {
            return Err(Error::Image(format!("{width}x{height} RGB needs {want} bytes, got {}", data.len())));
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image from a function of `(x, y)` returning channels in `[0, 1]`.
    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> [f64; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend(f(x, y).map(quantize));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len() / 3
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    /// Mean of each channel, in `[0, 255]`.
    pub fn channel_means(&self) -> [f64; 3] {
        let mut sums = [0.0; 3];
        for px in self.data.chunks_exact(3) {
            for c in 0..3 {
                sums[c] += px[c] as f64;
            }
        }
        sums.map(|s| s / self.pixel_count() as f64)
    }

    /// Largest per-channel difference to another image of the same size.
    pub fn max_channel_delta(&self, other: &RgbImage) -> Option<u8> {
        if (self.width, self.height) != (other.width, other.height) {
            return None;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| a.abs_diff(*b)).max()
    }
}

/// Clamps to `[0, 1]` and rounds to 8 bits, ties to even.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round_ties_even() as u8
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default()
}

/// Reads a PNG or binary PPM (P6, maxval 255) file.
pub fn read_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "ppm" => parse_ppm(&fs::read(path).map_err(|e| Error::io(path, e))?),
        "png" => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
                .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?;
            match img {
                image::DynamicImage::ImageRgb8(buf) => RgbImage::new(buf.width(), buf.height(), buf.into_raw()),
                other => Err(Error::Unsupported(format!(
                    "{}: expected 8-bit RGB, found {:?}",
                    path.display(),
                    other.color()
                ))),
            }
        }
        other => Err(Error::Unsupported(format!("image format {other:?} (use .png or .ppm)"))),
    }
}

/// Writes PNG or PPM according to the extension.
pub fn write_image(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "ppm" => fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e)),
        "png" => image::save_buffer_with_format(
            path,
            &img.data,
            img.width,
            img.height,
            image::ExtendedColorType::Rgb8,
            image::ImageFormat::Png,
        )
        .map_err(|e| Error::Image(format!("{}: {e}", path.display()))),
        other => Err(Error::Unsupported(format!("image format {other:?} (use .png or .ppm)"))),
    }
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn parse_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Image("truncated PPM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    if magic != "P6" {
        return Err(Error::Unsupported(format!("PPM variant {magic:?}; only binary RGB (P6) is read")));
    }
    let mut number = |what: &str| -> Result<u32> {
        let t = token()?;
        t.parse().map_err(|_| Error::Image(format!("bad PPM {what} {t:?}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != 255 {
        return Err(Error::Unsupported(format!("PPM maxval {maxval}; only 8-bit images are read")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let start = pos + 1;
    let want = width as usize * height as usize * 3;
    if bytes.len() < start + want {
        return Err(Error::Image("truncated PPM raster".into()));
    }
    RgbImage::new(width, height, bytes[start..start + want].to_vec())
}

/// One point per pixel, channels scaled to `[0, 1]`, uniform weights.
pub fn image_to_cloud(img: &RgbImage) -> Result<WeightedCloud> {
    let pts = Array2::from_shape_fn((img.pixel_count(), 3), |(i, c)| img.data[3 * i + c] as f64 / 255.0);
    WeightedCloud::uniform(pts)
}

/// Default cap on Lloyd iterations.
pub const DEFAULT_KMEANS_ITERS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    /// `N × d` cluster centers.
    pub centroids: Array2<f64>,
    /// Cluster index of every input point.
    pub assignment: Vec<usize>,
    pub counts: Vec<usize>,
    /// Within-cluster sum of squares after each Lloyd iteration.
    pub sse_trace: Vec<f64>,
}

impl Palette {
    pub fn len(&self) -> usize {
        self.centroids.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.nrows() == 0
    }

    /// Cluster masses `count / total`.
    pub fn weights(&self) -> Array1<f64> {
        let total: usize = self.counts.iter().sum();
        self.counts.iter().map(|&c| c as f64 / total as f64).collect()
    }

    pub fn sse(&self) -> f64 {
        self.sse_trace.last().copied().unwrap_or(f64::NAN)
    }
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: ArrayView1<'_, f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.outer_iter().enumerate() {
        let d = sq_dist(x, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding. When every remaining point coincides with a chosen
/// center, the next center is drawn uniformly among the unchosen points.
fn kmeans_pp(points: &Array2<f64>, clusters: usize, seed: u64) -> Array2<f64> {
    let n = points.nrows();
    let mut rng = rng::stream(seed, 0);
    let mut chosen = vec![false; n];
    let mut centers = Vec::with_capacity(clusters);
    let first = rng.random_range(0..n);
    chosen[first] = true;
    centers.push(first);
    let mut d2: Vec<f64> = points.outer_iter().map(|x| sq_dist(x, points.row(first))).collect();
    while centers.len() < clusters {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > u && w > 0.0 {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `u` just above the running sum.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centers.push(pick);
        let c = points.row(pick);
        d2.par_iter_mut()
            .zip(points.outer_iter().into_par_iter())
            .for_each(|(d, x)| *d = d.min(sq_dist(x, c)));
    }
    points.select(ndarray::Axis(0), &centers)
}

/// k-means++ initialization followed by at most `iters` Lloyd iterations.
/// Empty clusters are re-seeded at the point farthest from its center.
pub fn kmeans_palette(cloud: &WeightedCloud, clusters: usize, iters: usize, seed: u64) -> Result<Palette> {
    let n = cloud.len();
    if clusters == 0 || clusters > n {
        return Err(Error::contract(format!("cannot form {clusters} clusters from {n} points")));
    }
    if iters == 0 {
        return Err(Error::contract("k-means needs at least one iteration"));
    }
    let points = cloud.points().to_owned();
    let d = points.ncols();
    let mut centroids = kmeans_pp(&points, clusters, seed);
    let mut assignment: Vec<usize> = Vec::new();
    let mut counts = vec![0usize; clusters];
    let mut sse_trace = Vec::new();
    for _ in 0..iters {
        let nearest_rows: Vec<(usize, f64)> = points
            .outer_iter()
            .into_par_iter()
            .map(|x| nearest(x, &centroids))
            .collect();
        let next: Vec<usize> = nearest_rows.iter().map(|r| r.0).collect();
        if next == assignment {
            break;
        }
        assignment = next;

        let mut sums = Array2::<f64>::zeros((clusters, d));
        counts = vec![0; clusters];
        for (i, &c) in assignment.iter().enumerate() {
            sums.row_mut(c).scaled_add(1.0, &points.row(i));
            counts[c] += 1;
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let mean = &sums.row(c) / count as f64;
                centroids.row_mut(c).assign(&mean);
            }
        }
        for c in 0..clusters {
            if counts[c] == 0 {
                let (worst, dist) = assignment
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| (i, sq_dist(points.row(i), centroids.row(a))))
                    .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                if dist <= 0.0 {
                    continue;
                }
                counts[assignment[worst]] -= 1;
                assignment[worst] = c;
                counts[c] = 1;
                centroids.row_mut(c).assign(&points.row(worst));
            }
        }
        let sse: f64 = assignment
            .iter()
            .enumerate()
            .map(|(i, &a)| sq_dist(points.row(i), centroids.row(a)))
            .sum();
        sse_trace.push(sse);
    }
    Ok(Palette {
        centroids,
        assignment,
        counts,
        sse_trace,
    })
}

/// How pixels follow their cluster once the palette has flowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecolorRule {
    /// Pixel plus the displacement of its centroid; keeps in-cluster texture
    /// and leaves the image untouched when the palette does not move.
    Displacement,
    /// Pixel replaced by its centroid's final position.
    Centroid,
}

/// Step size for the palette flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaletteStep {
    Fixed(f64),
    /// `scale · 3 / (2 q_i)` for a cluster of mass `q_i`, the mass-adapted
    /// step that makes every cluster move at the same relative speed.
    MassScaled(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorTransferConfig {
    pub clusters: usize,
    pub kmeans_iters: usize,
    pub step: PaletteStep,
    /// Flow settings; `lr` and `metric` are replaced by the transfer.
    pub flow: FlowConfig,
    pub rule: RecolorRule,
    /// Points per side in the reported W2.
    pub w2_sample: usize,
}

impl Default for ColorTransferConfig {
    fn default() -> Self {
        Self {
            clusters: 3000,
            kmeans_iters: DEFAULT_KMEANS_ITERS,
            step: PaletteStep::MassScaled(0.5),
            flow: FlowConfig {
                iters: 50_000,
                ..FlowConfig::default()
            },
            rule: RecolorRule::Displacement,
            w2_sample: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorTransfer {
    pub image: RgbImage,
    pub trace: FlowTrace,
    /// Exact W2 between subsamples of the recolored and target pixels.
    pub w2: f64,
    pub source_palette: Palette,
    pub target_palette: Palette,
}

/// Palette as a weighted cloud, skipping empty clusters. Also returns the
/// palette index of every cloud row.
fn palette_cloud(p: &Palette) -> Result<(WeightedCloud, Vec<usize>)> {
    let rows: Vec<usize> = (0..p.len()).filter(|&c| p.counts[c] > 0).collect();
    let weights = p.weights();
    let cloud = WeightedCloud::new(
        p.centroids.select(ndarray::Axis(0), &rows),
        rows.iter().map(|&c| weights[c]).collect(),
    )?;
    Ok((cloud, rows))
}

fn subsample(cloud: &WeightedCloud, size: usize, seed: u64) -> Result<WeightedCloud> {
    let mut rng = rng::stream(seed, 0);
    let mut rows = index::sample(&mut rng, cloud.len(), size).into_vec();
    rows.sort_unstable();
    cloud.uniform_subsample(&rows)
}

/// Moves the colors of `source` toward the palette of `target`.
pub fn transfer_colors(source: &RgbImage, target: &RgbImage, cfg: &ColorTransferConfig) -> Result<ColorTransfer> {
    let src_cloud = image_to_cloud(source)?;
    let tgt_cloud = image_to_cloud(target)?;
    // One seed for both palettes, so identical images give identical palettes.
    let km_seed = rng::derive_seed(cfg.flow.seed, tag::PALETTE);
    let source_palette = kmeans_palette(&src_cloud, cfg.clusters, cfg.kmeans_iters, km_seed)?;
    let target_palette = kmeans_palette(&tgt_cloud, cfg.clusters, cfg.kmeans_iters, km_seed)?;
    let (src_pal, src_rows) = palette_cloud(&source_palette)?;
    let (tgt_pal, _) = palette_cloud(&target_palette)?;

    let lr = match cfg.step {
        PaletteStep::Fixed(h) => LearningRate::Scalar(h),
        PaletteStep::MassScaled(s) => {
            LearningRate::PerPoint(src_pal.weights().iter().map(|&q| s * 3.0 / (2.0 * q)).collect())
        }
    };
    let flow_cfg = FlowConfig {
        lr,
        metric: FlowMetric::None,
        ..cfg.flow.clone()
    };
    let trace = run_flow(&src_pal, &tgt_pal, &flow_cfg)?;

    let mut moved = source_palette.centroids.clone();
    for (r, &c) in src_rows.iter().enumerate() {
        moved.row_mut(c).assign(&trace.final_cloud.point(r));
    }
    let data: Vec<u8> = src_cloud
        .points()
        .outer_iter()
        .into_par_iter()
        .zip(source_palette.assignment.par_iter())
        .flat_map_iter(|(x, &c)| {
            let color: Vec<f64> = match cfg.rule {
                RecolorRule::Displacement => (0..3)
                    .map(|k| x[k] + moved[[c, k]] - source_palette.centroids[[c, k]])
                    .collect(),
                RecolorRule::Centroid => moved.row(c).to_vec(),
            };
            color.into_iter().map(quantize)
        })
        .collect();
    let image = RgbImage::new(source.width, source.height, data)?;

    let out_cloud = image_to_cloud(&image)?;
    let size = cfg.w2_sample.min(out_cloud.len()).min(tgt_cloud.len());
    if size == 0 {
        return Err(Error::contract("W2 sample size must be >= 1"));
    }
    let sub_seed = rng::derive_seed(cfg.flow.seed, tag::SUBSAMPLE);
    let w2 = exact_w2(
        &subsample(&out_cloud, size, sub_seed)?,
        &subsample(&tgt_cloud, size, rng::derive_seed(sub_seed, 1))?,
    )?;
    Ok(ColorTransfer {
        image,
        trace,
        w2,
        source_palette,
        target_palette,
    })
}

/// Bundled-style synthetic source: cool blues and teals in smooth gradients.
pub fn synthetic_source(width: u32, height: u32) -> Result<RgbImage> {
    RgbImage::from_fn(width, height, |x, y| {
        let u = x as f64 / (width.max(2) - 1) as f64;
        let v = y as f64 / (height.max(2) - 1) as f64;
        let ring = ((u - 0.5).powi(2) + (v - 0.5).powi(2)).sqrt();
        [
            0.10 + 0.25 * u * v,
            0.30 + 0.35 * v + 0.10 * (6.0 * ring).sin(),
            0.55 + 0.35 * (1.0 - u),
        ]
    })
}

/// Bundled-style synthetic target: warm reds and oranges.
pub fn synthetic_target(width: u32, height: u32) -> Result<RgbImage> {
    RgbImage::from_fn(width, height, |x, y| {
        let u = x as f64 / (width.max(2) - 1) as f64;
        let v = y as f64 / (height.max(2) - 1) as f64;
        let wave = (3.0 * std::f64::consts::PI * (u + 0.5 * v)).sin();
        [
            0.65 + 0.30 * v,
            0.25 + 0.30 * u + 0.08 * wave,
            0.10 + 0.20 * (1.0 - v) * u,
        ]
    })
}

/// One row per cluster: `r,g,b,count`.
pub fn write_palette_csv<W: Write>(writer: W, palette: &Palette) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| Error::io("<csv>", e.into());
    wtr.write_record(["r", "g", "b", "count"]).map_err(to_io)?;
    for (row, count) in palette.centroids.outer_iter().zip(&palette.counts) {
        let mut rec: Vec<String> = row.iter().map(|&v| crate::table::fmt_float(v)).collect();
        rec.push(count.to_string());
        wtr.write_record(&rec).map_err(to_io)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_colors() -> RgbImage {
        let colors = [[255, 0, 0], [0, 255, 0], [0, 0, 255], [255, 255, 0]];
        let mut data = Vec::new();
        for i in 0..64 {
            data.extend(colors[i % 4]);
        }
        RgbImage::new(8, 8, data).unwrap()
    }

    #[test]
    fn pixels_become_unit_cube_points() {
        let img = RgbImage::new(2, 1, vec![0, 0, 0, 255, 255, 255]).unwrap();
        let cloud = image_to_cloud(&img).unwrap();
        assert_eq!(cloud.points().to_owned(), ndarray::array![[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]);
        assert_eq!(cloud.weights().to_vec(), vec![0.5, 0.5]);
        let big = synthetic_source(20, 10).unwrap();
        let c = image_to_cloud(&big).unwrap();
        assert_eq!(c.len(), 200);
        assert!(c.points().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn quantization_clamps_and_rounds_half_to_even() {
        assert_eq!(quantize(-0.2), 0);
        assert_eq!(quantize(1.7), 255);
        assert_eq!(quantize(0.5 / 255.0), 0);
        assert_eq!(quantize(1.5 / 255.0), 2);
        assert_eq!(quantize(128.0 / 255.0), 128);
    }

    #[test]
    fn ppm_round_trip_and_rejections() {
        let img = synthetic_target(7, 5).unwrap();
        assert_eq!(parse_ppm(&encode_ppm(&img)).unwrap(), img);
        let commented = b"P6 # comment\n2 1\n255\n\x01\x02\x03\x04\x05\x06";
        assert_eq!(parse_ppm(commented).unwrap().pixel(1, 0), [4, 5, 6]);
        assert!(matches!(parse_ppm(b"P5\n1 1\n255\n\x00"), Err(Error::Unsupported(_))));
        assert!(matches!(parse_ppm(b"P6\n1 1\n65535\n\x00\x00"), Err(Error::Unsupported(_))));
        assert!(matches!(parse_ppm(b"P6\n2 2\n255\n\x00"), Err(Error::Image(_))));
    }

    #[test]
    fn kmeans_recovers_separated_colors() {
        let cloud = image_to_cloud(&four_colors()).unwrap();
        let pal = kmeans_palette(&cloud, 4, 20, 3).unwrap();
        let mut found: Vec<Vec<f64>> = pal.centroids.outer_iter().map(|r| r.to_vec()).collect();
        found.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]];
        for (f, w) in found.iter().zip(want) {
            assert!(f.iter().zip(w).all(|(a, b)| (a - b).abs() < 1e-6), "{f:?}");
        }
        assert_eq!(pal.counts, vec![16; 4]);
        assert_eq!(pal.sse(), 0.0);
    }

    #[test]
    fn kmeans_with_one_cluster_per_point_is_exact() {
        let cloud = image_to_cloud(&synthetic_source(6, 5).unwrap()).unwrap();
        let pal = kmeans_palette(&cloud, cloud.len(), 10, 1).unwrap();
        assert_eq!(pal.sse(), 0.0);
        assert!(kmeans_palette(&cloud, cloud.len() + 1, 10, 1).is_err());
    }

    #[test]
    fn kmeans_sse_never_increases() {
        let cloud = image_to_cloud(&synthetic_target(40, 30).unwrap()).unwrap();
        let pal = kmeans_palette(&cloud, 25, 50, 8).unwrap();
        assert!(pal.sse_trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(pal.counts.iter().sum::<usize>(), 1200);
        assert!(pal.centroids.iter().all(|v| (0.0..=1.0).contains(v)));
        let w = pal.weights();
        assert!((w.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_images_survive_the_round_trip() {
        let img = synthetic_source(24, 24).unwrap();
        let cfg = ColorTransferConfig {
            clusters: 40,
            flow: FlowConfig {
                iters: 50,
                ..FlowConfig::default()
            },
            w2_sample: 200,
            ..ColorTransferConfig::default()
        };
        let out = transfer_colors(&img, &img, &cfg).unwrap();
        assert!(out.image.max_channel_delta(&img).unwrap() <= 1);
        assert_eq!((out.image.width(), out.image.height()), (24, 24));
    }

    #[test]
    fn gray_source_reddens_toward_a_red_target() {
        let gray = RgbImage::from_fn(20, 20, |x, y| {
            let g = 0.2 + 0.6 * (x + y) as f64 / 38.0;
            [g, g, g]
        })
        .unwrap();
        let red = RgbImage::from_fn(20, 20, |x, y| {
            let g = 0.1 + 0.3 * (x * y) as f64 / 361.0;
            [0.85, g, g]
        })
        .unwrap();
        let cfg = ColorTransferConfig {
            clusters: 30,
            flow: FlowConfig {
                iters: 300,
                ..FlowConfig::default()
            },
            w2_sample: 100,
            ..ColorTransferConfig::default()
        };
        let out = transfer_colors(&gray, &red, &cfg).unwrap();
        assert!(out.image.channel_means()[0] > gray.channel_means()[0]);
    }

    #[test]
    fn unknown_extensions_are_unsupported() {
        let dir = tempfile::tempdir().unwrap();
        let img = four_colors();
        assert!(matches!(write_image(dir.path().join("a.bmp"), &img), Err(Error::Unsupported(_))));
        for name in ["a.ppm", "a.png"] {
            let path = dir.path().join(name);
            write_image(&path, &img).unwrap();
            assert_eq!(read_image(&path).unwrap(), img);
        }
        let gray = image::GrayImage::from_pixel(2, 2, image::Luma([7]));
        let gpath = dir.path().join("g.png");
        gray.save(&gpath).unwrap();
        assert!(matches!(read_image(&gpath), Err(Error::Unsupported(_))));
    }
}
