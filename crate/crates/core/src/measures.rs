//! Weighted empirical measures and exact transport between them.
//!
//! One-dimensional distances use the closed form through quantile functions:
//! both supports are sorted and the two cumulative distribution functions are
//! walked in lockstep (the north-west-corner rule on sorted supports), which
//! yields the monotone optimal coupling for every convex cost `|x - y|^p`.
//! Multi-dimensional W2 between equal-size uniform clouds is solved exactly as
//! an assignment problem and is meant for evaluation, not inner loops.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::assignment;
use crate::table::fmt_float;
use crate::{Error, Result};

/// Tolerance on `Σ weights = 1` for a [`WeightedCloud`].
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Tolerance on the weight sum accepted when reading decimal CSV files.
pub const CSV_WEIGHT_SUM_TOL: f64 = 1e-6;

/// Largest cloud accepted by [`exact_w2`].
pub const MAX_EXACT_POINTS: usize = 2048;

/// Leftover mass below this is treated as exhausted while walking CDFs.
const MASS_EPS: f64 = 1e-15;

/// A discrete probability measure: `n` points in `R^d` with a mass vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCloud {
    points: Array2<f64>,
    weights: Array1<f64>,
}

impl WeightedCloud {
    /// Builds a cloud, validating every invariant. Weights are never rescaled.
    pub fn new(points: Array2<f64>, weights: Array1<f64>) -> Result<Self> {
        let (n, d) = points.dim();
        if n == 0 || d == 0 {
            return Err(Error::contract(format!(
                "a cloud needs at least one point and one dimension, got {n}x{d}"
            )));
        }
        if weights.len() != n {
            return Err(Error::contract(format!(
                "{} weights for {n} points",
                weights.len()
            )));
        }
        if let Some(bad) = points.iter().find(|v| !v.is_finite()) {
            return Err(Error::contract(format!("non-finite coordinate {bad}")));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::contract(format!("invalid weight {bad}")));
        }
        let total: f64 = weights.sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::contract(format!(
                "weights sum to {total}, expected 1 within {WEIGHT_SUM_TOL}"
            )));
        }
        Ok(Self { points, weights })
    }

    /// Cloud with mass `1/n` on every row of `points`.
    pub fn uniform(points: Array2<f64>) -> Result<Self> {
        let n = points.nrows();
        let weights = Array1::from_elem(n, if n == 0 { 0.0 } else { 1.0 / n as f64 });
        Self::new(points, weights)
    }

    /// One-dimensional cloud from support values and weights.
    pub fn from_line(values: &[f64], weights: &[f64]) -> Result<Self> {
        let points = Array2::from_shape_vec((values.len(), 1), values.to_vec())
            .map_err(|e| Error::contract(e.to_string()))?;
        Self::new(points, Array1::from(weights.to_vec()))
    }

    /// One-dimensional uniform cloud.
    pub fn uniform_line(values: &[f64]) -> Result<Self> {
        let points = Array2::from_shape_vec((values.len(), 1), values.to_vec())
            .map_err(|e| Error::contract(e.to_string()))?;
        Self::uniform(points)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn into_parts(self) -> (Array2<f64>, Array1<f64>) {
        (self.points, self.weights)
    }

    /// True when every weight equals `1/n` bitwise.
    pub fn is_uniform(&self) -> bool {
        let w0 = 1.0 / self.len() as f64;
        self.weights.iter().all(|&w| w == w0)
    }

    /// Same weights, new support. Fails if `points` breaks the invariants.
    pub fn with_points(&self, points: Array2<f64>) -> Result<Self> {
        if points.nrows() != self.len() {
            return Err(Error::contract(format!(
                "replacement support has {} rows, cloud has {}",
                points.nrows(),
                self.len()
            )));
        }
        Self::new(points, self.weights.clone())
    }

    /// Pushforward under `x ↦ alpha * x`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        self.with_points(&self.points * alpha)
    }

    /// Pushforward under `x ↦ x + shift`.
    pub fn translated(&self, shift: ArrayView1<'_, f64>) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(Error::contract("shift dimension mismatch"));
        }
        self.with_points(&self.points + &shift)
    }

    /// Pushforward under the linear map `x ↦ M x`, `M` of shape `(d_out, d)`.
    pub fn mapped(&self, matrix: ArrayView2<'_, f64>) -> Result<Self> {
        if matrix.ncols() != self.dim() {
            return Err(Error::contract(format!(
                "map expects dimension {}, cloud has {}",
                matrix.ncols(),
                self.dim()
            )));
        }
        self.with_points(self.points.dot(&matrix.t()))
    }

    /// Sub-cloud on the given rows with uniform weights.
    pub fn uniform_subsample(&self, rows: &[usize]) -> Result<Self> {
        Self::uniform(self.points.select(Axis(0), rows))
    }
}

/// The monotone transport plan between two one-dimensional clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct OneDimCoupling {
    /// `(source index, target index, mass)` in increasing source quantile order.
    pub pairs: Vec<(usize, usize, f64)>,
}

impl OneDimCoupling {
    pub fn cost(&self, a: &WeightedCloud, b: &WeightedCloud, p: f64) -> f64 {
        self.pairs
            .iter()
            .map(|&(i, j, m)| m * pow_abs(a.points[[i, 0]] - b.points[[j, 0]], p))
            .sum()
    }

    pub fn source_marginal(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(i, _, m) in &self.pairs {
            out[i] += m;
        }
        out
    }

    pub fn target_marginal(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for &(_, j, mass) in &self.pairs {
            out[j] += mass;
        }
        out
    }
}

fn check_line_inputs(a: &WeightedCloud, b: &WeightedCloud, p: f64) -> Result<()> {
    if a.dim() != 1 || b.dim() != 1 {
        return Err(Error::contract(format!(
            "one-dimensional clouds required, got d = {} and d = {}",
            a.dim(),
            b.dim()
        )));
    }
    check_order(p)
}

pub(crate) fn check_order(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::contract(format!("order p must be finite and >= 1, got {p}")));
    }
    Ok(())
}

/// `W_p^p(a, b)` between one-dimensional clouds (the p-th power, not the root).
pub fn wasserstein_1d(a: &WeightedCloud, b: &WeightedCloud, p: f64) -> Result<f64> {
    check_line_inputs(a, b, p)?;
    let xa = a.points.column(0).to_vec();
    let xb = b.points.column(0).to_vec();
    let uniform_pair = a.len() == b.len() && a.is_uniform() && b.is_uniform();
    Ok(line_wpp(
        &xa,
        a.weights.as_slice().expect("contiguous weights"),
        &xb,
        b.weights.as_slice().expect("contiguous weights"),
        p,
        uniform_pair,
    ))
}

/// Monotone coupling realizing [`wasserstein_1d`].
pub fn coupling_1d(a: &WeightedCloud, b: &WeightedCloud) -> Result<OneDimCoupling> {
    check_line_inputs(a, b, 1.0)?;
    let xa = a.points.column(0).to_vec();
    let xb = b.points.column(0).to_vec();
    let wa = a.weights.as_slice().expect("contiguous weights");
    let wb = b.weights.as_slice().expect("contiguous weights");
    let oa = sort_order(&xa);
    let ob = sort_order(&xb);
    let mut pairs = Vec::with_capacity(a.len() + b.len());
    walk_monotone(wa, &oa, wb, &ob, |i, j, m| pairs.push((i, j, m)));
    Ok(OneDimCoupling { pairs })
}

/// Exact W2 (not squared) between equal-size uniform clouds via optimal assignment.
pub fn exact_w2(a: &WeightedCloud, b: &WeightedCloud) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::contract(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if a.len() != b.len() || !a.is_uniform() || !b.is_uniform() {
        return Err(Error::Unsupported(
            "exact W2 needs two uniform clouds of equal size".into(),
        ));
    }
    let n = a.len();
    if n > MAX_EXACT_POINTS {
        return Err(Error::Resource(format!(
            "exact W2 is capped at {MAX_EXACT_POINTS} points, got {n}"
        )));
    }
    let cost = squared_distances(a.points.view(), b.points.view());
    let solution = assignment::solve(&cost);
    Ok((solution.cost / n as f64).max(0.0).sqrt())
}

/// Pairwise squared Euclidean distances between the rows of `x` and `y`.
pub fn squared_distances(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), y.nrows()));
    for (i, xi) in x.outer_iter().enumerate() {
        for (j, yj) in y.outer_iter().enumerate() {
            out[[i, j]] = xi
                .iter()
                .zip(yj.iter())
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>();
        }
    }
    out
}

#[inline]
pub(crate) fn pow_abs(r: f64, p: f64) -> f64 {
    if p == 2.0 {
        r * r
    } else if p == 1.0 {
        r.abs()
    } else {
        r.abs().powf(p)
    }
}

/// Derivative of `|r|^p`; zero at `r = 0` (the subgradient choice for `p = 1`).
#[inline]
pub(crate) fn pow_abs_derivative(r: f64, p: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else if p == 2.0 {
        2.0 * r
    } else if p == 1.0 {
        r.signum()
    } else {
        p * r.abs().powf(p - 1.0) * r.signum()
    }
}

/// Indices sorting `values` by `(value, index)`, values in `total_cmp` order.
pub(crate) fn sort_order(values: &[f64]) -> Vec<usize> {
    // Integer keys with the same order as `f64::total_cmp` sort much faster
    // than an indirect comparator.
    let key = |x: f64| {
        let bits = x.to_bits();
        if bits >> 63 == 1 {
            !bits
        } else {
            bits | (1 << 63)
        }
    };
    let mut keyed: Vec<(u64, usize)> = values.iter().enumerate().map(|(i, &v)| (key(v), i)).collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Walks the two CDFs in sorted order, reporting each block of shared mass.
pub(crate) fn walk_monotone(
    wa: &[f64],
    order_a: &[usize],
    wb: &[f64],
    order_b: &[usize],
    mut emit: impl FnMut(usize, usize, f64),
) {
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut ra = match order_a.first() {
        Some(&i) => wa[i],
        None => return,
    };
    let mut rb = match order_b.first() {
        Some(&j) => wb[j],
        None => return,
    };
    loop {
        let m = ra.min(rb);
        if m > 0.0 {
            emit(order_a[ia], order_b[ib], m);
        }
        ra -= m;
        rb -= m;
        if ra <= MASS_EPS {
            ia += 1;
            match order_a.get(ia) {
                Some(&i) => ra = wa[i],
                None => break,
            }
        }
        if rb <= MASS_EPS {
            ib += 1;
            match order_b.get(ib) {
                Some(&j) => rb = wb[j],
                None => break,
            }
        }
    }
}

/// `W_p^p` between two weighted lines. `uniform_pair` selects the sorted-pairing
/// shortcut, valid when both sides are uniform with the same number of points.
pub(crate) fn line_wpp(xa: &[f64], wa: &[f64], xb: &[f64], wb: &[f64], p: f64, uniform_pair: bool) -> f64 {
    if uniform_pair {
        let mut sa = xa.to_vec();
        let mut sb = xb.to_vec();
        sa.sort_unstable_by(f64::total_cmp);
        sb.sort_unstable_by(f64::total_cmp);
        let total: f64 = sa.iter().zip(&sb).map(|(u, v)| pow_abs(u - v, p)).sum();
        return total / sa.len() as f64;
    }
    let oa = sort_order(xa);
    let ob = sort_order(xb);
    let mut total = 0.0;
    walk_monotone(wa, &oa, wb, &ob, |i, j, m| total += m * pow_abs(xa[i] - xb[j], p));
    total
}

/// Value and first-order sensitivities of `W_p^p` on a line with the coupling held fixed.
pub(crate) struct LineSensitivity {
    pub value: f64,
    /// `∂W/∂x_i = Σ_j γ_ij · d|r|^p/dr` at `r = x_i - y_j`.
    pub source: Vec<f64>,
    /// `∂W/∂y_j`, which is the negated column sum of the same terms.
    pub target: Vec<f64>,
}

pub(crate) fn line_sensitivity(
    xa: &[f64],
    wa: &[f64],
    xb: &[f64],
    wb: &[f64],
    p: f64,
    uniform_pair: bool,
) -> LineSensitivity {
    let mut source = vec![0.0; xa.len()];
    let mut target = vec![0.0; xb.len()];
    let mut value = 0.0;
    let oa = sort_order(xa);
    if uniform_pair {
        let ob = sort_order(xb);
        let mass = 1.0 / xa.len() as f64;
        let mut total = 0.0;
        for (&i, &j) in oa.iter().zip(&ob) {
            let r = xa[i] - xb[j];
            total += pow_abs(r, p);
            let g = mass * pow_abs_derivative(r, p);
            source[i] = g;
            target[j] = -g;
        }
        value = total * mass;
    } else {
        let ob = sort_order(xb);
        walk_monotone(wa, &oa, wb, &ob, |i, j, m| {
            let r = xa[i] - xb[j];
            value += m * pow_abs(r, p);
            let g = m * pow_abs_derivative(r, p);
            source[i] += g;
            target[j] -= g;
        });
    }
    LineSensitivity {
        value,
        source,
        target,
    }
}

/// Reads a cloud from CSV: header row, `d` coordinate columns and an optional
/// trailing `weight` column. Without a weight column the cloud is uniform.
pub fn read_cloud_csv<R: Read>(reader: R) -> Result<WeightedCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Parse {
            row: 1,
            message: "empty file: a header row is required".into(),
        });
    }
    let width = headers.len();
    let weighted = headers[width - 1].eq_ignore_ascii_case("weight");
    let d = if weighted { width - 1 } else { width };
    if d == 0 {
        return Err(Error::Parse {
            row: 1,
            message: "no coordinate columns".into(),
        });
    }

    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        // Line numbers are 1-based and the header occupies line 1.
        let row = k + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != width {
            return Err(Error::Parse {
                row,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                message: format!("column {} is not a number: {field:?}", c + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    message: format!("column {} is not finite", c + 1),
                });
            }
            if weighted && c == d {
                if v < 0.0 {
                    return Err(Error::Parse {
                        row,
                        message: "negative weight".into(),
                    });
                }
                weights.push(v);
            } else {
                coords.push(v);
            }
        }
    }
    let n = coords.len() / d;
    if n == 0 {
        return Err(Error::Parse {
            row: 2,
            message: "no data rows".into(),
        });
    }
    let points = Array2::from_shape_vec((n, d), coords).expect("row-major coordinates");
    if !weighted {
        return WeightedCloud::uniform(points);
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > CSV_WEIGHT_SUM_TOL {
        return Err(Error::Parse {
            row: n + 1,
            message: format!("weights sum to {total}, expected 1 within {CSV_WEIGHT_SUM_TOL}"),
        });
    }
    // Decimal files may round masses; the accepted deviation is renormalized.
    let weights = if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        Array1::from(weights) / total
    } else {
        Array1::from(weights)
    };
    WeightedCloud::new(points, weights)
}

/// Writes `cloud` as CSV with 17 significant digits and a trailing weight column.
pub fn write_cloud_csv<W: Write>(writer: W, cloud: &WeightedCloud) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..cloud.dim()).map(|c| format!("x{c}")).collect();
    header.push("weight".into());
    let to_io = |e: csv::Error| Error::io("<csv>", e.into());
    wtr.write_record(&header).map_err(to_io)?;
    for (row, w) in cloud.points.outer_iter().zip(cloud.weights.iter()) {
        let mut fields: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        fields.push(fmt_float(*w));
        wtr.write_record(&fields).map_err(to_io)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn load_cloud_csv(path: impl AsRef<Path>) -> Result<WeightedCloud> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_cloud_csv(std::io::BufReader::new(file))
}

pub fn save_cloud_csv(path: impl AsRef<Path>, cloud: &WeightedCloud) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_cloud_csv(std::io::BufWriter::new(file), cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn line(values: &[f64]) -> WeightedCloud {
        WeightedCloud::uniform_line(values).unwrap()
    }

    #[test]
    fn sort_order_follows_total_order_then_index() {
        let values = [0.5, -0.0, 0.0, f64::NEG_INFINITY, -3.25, 0.5, f64::INFINITY, -1e-300, 1e-300];
        let mut want: Vec<usize> = (0..values.len()).collect();
        want.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
        assert_eq!(sort_order(&values), want);
    }

    #[test]
    fn identical_lines_are_at_distance_zero() {
        let a = line(&[0.0, 1.0]);
        assert_eq!(wasserstein_1d(&a, &a, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_mass_over_unit_distance() {
        assert_eq!(wasserstein_1d(&line(&[0.0]), &line(&[1.0]), 2.0).unwrap(), 1.0);
    }

    #[test]
    fn sorted_pairing_beats_crossing() {
        // Permutation oracle: pairing (0,1),(2,3) costs 1, crossing costs 2.
        let a = line(&[2.0, 0.0]);
        let b = line(&[1.0, 3.0]);
        assert_eq!(wasserstein_1d(&a, &b, 1.0).unwrap(), 1.0);
        let c = coupling_1d(&line(&[0.0, 2.0]), &line(&[1.0, 3.0])).unwrap();
        assert_eq!(c.pairs, vec![(0, 0, 0.5), (1, 1, 0.5)]);
    }

    #[test]
    fn dirac_against_two_atoms_splits_mass() {
        // Quantile oracle: F_a^{-1} = 0 on (0,1); F_b^{-1} = 0 on (0,.5), 2 on (.5,1).
        let a = line(&[0.0]);
        let b = line(&[0.0, 2.0]);
        assert_eq!(wasserstein_1d(&a, &b, 1.0).unwrap(), 1.0);
        let c = coupling_1d(&a, &b).unwrap();
        assert_eq!(c.pairs, vec![(0, 0, 0.5), (0, 1, 0.5)]);
        assert_eq!(coupling_1d(&line(&[0.0]), &line(&[1.0])).unwrap().pairs, vec![(0, 0, 1.0)]);
    }

    #[test]
    fn general_weights_walk() {
        // F_a^{-1}: 0 on (0,.2), 1 on (.2,1); F_b^{-1}: 0.5 on (0,.7), 3 on (.7,1).
        // ∫|Δ|^2 = .2*.25 + .5*.25 + .3*4 = 1.375
        let a = WeightedCloud::from_line(&[1.0, 0.0], &[0.8, 0.2]).unwrap();
        let b = WeightedCloud::from_line(&[3.0, 0.5], &[0.3, 0.7]).unwrap();
        let w = wasserstein_1d(&a, &b, 2.0).unwrap();
        assert!((w - 1.375).abs() < 1e-15);
        let c = coupling_1d(&a, &b).unwrap();
        assert!((c.cost(&a, &b, 2.0) - w).abs() < 1e-12);
        let sm = c.source_marginal(2);
        let tm = c.target_marginal(2);
        assert!((sm[0] - 0.8).abs() < 1e-12 && (sm[1] - 0.2).abs() < 1e-12);
        assert!((tm[0] - 0.3).abs() < 1e-12 && (tm[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn contract_violations() {
        let planar = WeightedCloud::uniform(array![[0.0, 1.0]]).unwrap();
        assert!(matches!(
            wasserstein_1d(&planar, &planar, 2.0),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            wasserstein_1d(&line(&[0.0]), &line(&[1.0]), 0.5),
            Err(Error::Contract(_))
        ));
        assert!(WeightedCloud::from_line(&[0.0, 1.0], &[0.5, 0.4]).is_err());
        assert!(WeightedCloud::from_line(&[0.0, f64::NAN], &[0.5, 0.5]).is_err());
        assert!(WeightedCloud::uniform(Array2::zeros((0, 2))).is_err());
    }

    #[test]
    fn exact_w2_basics() {
        let a = WeightedCloud::uniform(array![[0.0, 0.0]]).unwrap();
        let b = WeightedCloud::uniform(array![[3.0, 4.0]]).unwrap();
        assert_eq!(exact_w2(&a, &b).unwrap(), 5.0);
        assert_eq!(exact_w2(&b, &b).unwrap(), 0.0);
    }

    #[test]
    fn exact_w2_matches_line_closed_form() {
        let a = line(&[0.3, -1.2, 2.5, 0.0, 4.1]);
        let b = line(&[1.7, 0.4, -0.6, 3.3, 2.2]);
        let expected = wasserstein_1d(&a, &b, 2.0).unwrap().sqrt();
        assert!((exact_w2(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn exact_w2_rejects_unsupported_inputs() {
        let a = line(&[0.0, 1.0]);
        let b = line(&[0.0, 1.0, 2.0]);
        assert!(matches!(exact_w2(&a, &b), Err(Error::Unsupported(_))));
        let w = WeightedCloud::from_line(&[0.0, 1.0], &[0.25, 0.75]).unwrap();
        assert!(matches!(exact_w2(&w, &a), Err(Error::Unsupported(_))));
        let big = WeightedCloud::uniform(Array2::zeros((MAX_EXACT_POINTS + 1, 1))).unwrap();
        assert!(matches!(exact_w2(&big, &big), Err(Error::Resource(_))));
    }

    #[test]
    fn csv_fixture_parses() {
        let text = "x,y,weight\n0.5,1,0.25\n-2,3e-1,0.25\n7,8,0.5\n";
        let cloud = read_cloud_csv(text.as_bytes()).unwrap();
        assert_eq!(cloud.points(), array![[0.5, 1.0], [-2.0, 0.3], [7.0, 8.0]]);
        assert_eq!(cloud.weights(), array![0.25, 0.25, 0.5]);

        let unweighted = read_cloud_csv("a,b,c\n1,2,3\n4,5,6\n".as_bytes()).unwrap();
        assert_eq!(unweighted.dim(), 3);
        assert!(unweighted.is_uniform());
    }

    #[test]
    fn csv_errors_carry_rows() {
        assert!(matches!(read_cloud_csv("".as_bytes()), Err(Error::Parse { .. })));
        match read_cloud_csv("x,y\n1,2\n3\n".as_bytes()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
        match read_cloud_csv("x,y\n1,2\n3,abc\n".as_bytes()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_cloud_csv("x,weight\n1,0.5\n2,0.4\n".as_bytes()),
            Err(Error::Parse { .. })
        ));
        // A rounded decimal weight vector within the reading tolerance is accepted.
        let rounded = read_cloud_csv("x,weight\n1,0.333333\n2,0.333333\n3,0.333334\n".as_bytes()).unwrap();
        assert!((rounded.weights().sum() - 1.0).abs() < WEIGHT_SUM_TOL);
    }

    #[test]
    fn csv_round_trip_is_bitwise() {
        let cloud = WeightedCloud::new(
            array![[0.1, 1.0 / 3.0], [-2.5e-300, 6.02214076e23]],
            array![0.7, 0.30000000000000004],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_cloud_csv(&mut buf, &cloud).unwrap();
        let back = read_cloud_csv(buf.as_slice()).unwrap();
        assert_eq!(back, cloud);
    }
}
