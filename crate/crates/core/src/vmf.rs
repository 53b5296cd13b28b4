//! von Mises–Fisher sampling on `S^{d-1}` (Wood's rejection scheme).

use ndarray::{Array1, ArrayView1};
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::{Error, Result};

/// vMF distribution with unit mean direction and concentration `kappa >= 0`.
/// `kappa = +∞` is the point mass at the mean; `kappa = 0` is uniform.
#[derive(Debug, Clone)]
pub struct VonMisesFisher {
    mean: Array1<f64>,
    kappa: f64,
    // Precomputed rejection constants (unused for d = 1 or infinite kappa).
    b: f64,
    x0: f64,
    c: f64,
    beta: Option<Beta<f64>>,
}

impl VonMisesFisher {
    pub fn new(mean: ArrayView1<'_, f64>, kappa: f64) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::contract("vMF mean must have at least one coordinate"));
        }
        let norm = mean.dot(&mean).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::contract(format!("vMF mean must be a unit vector, norm {norm}")));
        }
        if kappa.is_nan() || kappa < 0.0 {
            return Err(Error::contract(format!("vMF concentration must be >= 0, got {kappa}")));
        }
        let mut out = Self {
            mean: mean.to_owned(),
            kappa,
            b: 0.0,
            x0: 0.0,
            c: 0.0,
            beta: None,
        };
        if d >= 2 && kappa.is_finite() {
            let m = (d - 1) as f64;
            let b = m / (2.0 * kappa + (4.0 * kappa * kappa + m * m).sqrt());
            let x0 = (1.0 - b) / (1.0 + b);
            // ln(1 - x0^2) = ln(4b) - 2 ln(1 + b)
            let c = kappa * x0 + m * ((4.0 * b).ln() - 2.0 * b.ln_1p());
            out.b = b;
            out.x0 = x0;
            out.c = c;
            out.beta = Some(Beta::new(m / 2.0, m / 2.0).map_err(|e| Error::Numeric(e.to_string()))?);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Array1<f64> {
        let d = self.dim();
        if self.kappa == f64::INFINITY {
            return self.mean.clone();
        }
        if d == 1 {
            // S^0 = {±1}: P(+mean) = e^κ / (e^κ + e^-κ).
            let p_same = 1.0 / (1.0 + (-2.0 * self.kappa).exp());
            let sign = if rng.random::<f64>() < p_same { 1.0 } else { -1.0 };
            return &self.mean * sign;
        }
        let m = (d - 1) as f64;
        let beta = self.beta.as_ref().expect("rejection constants for d >= 2");
        let w = loop {
            let z = beta.sample(rng);
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            let u: f64 = rng.random();
            if self.kappa * w + m * (1.0 - self.x0 * w).ln() - self.c >= u.ln() {
                break w;
            }
        };
        let tangent = loop {
            let mut v: Array1<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let along = v.dot(&self.mean);
            v.scaled_add(-along, &self.mean);
            let norm = v.dot(&v).sqrt();
            if norm > 1e-12 {
                break v / norm;
            }
        };
        let radial = (1.0 - w * w).max(0.0).sqrt();
        let mut x = &self.mean * w + &tangent * radial;
        let norm = x.dot(&x).sqrt();
        x /= norm;
        x
    }
}
