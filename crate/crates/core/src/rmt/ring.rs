use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SpectralSample;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Default slack around the annulus when counting conforming eigenvalues.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Limiting eigenvalue law of a standardized product of `depth` singular
/// value equivalents with aspect ratio `c = p / n`: an annulus with inner
/// radius `(1 - c)^(L/2)` and outer radius 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingLawModel {
    pub c: f64,
    pub depth: usize,
}

impl RingLawModel {
    pub fn new(c: f64, depth: usize) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::Config(format!("ratio c must lie in (0, 1], got {c}")));
        }
        if depth == 0 {
            return Err(Error::Config("product depth must be at least 1".into()));
        }
        Ok(Self { c, depth })
    }

    pub fn from_dims(p: usize, n: usize, depth: usize) -> Result<Self> {
        if p == 0 || n == 0 || p > n {
            return Err(Error::Ratio {
                p,
                n,
                c: p as f64 / n as f64,
            });
        }
        Self::new(p as f64 / n as f64, depth)
    }

    pub fn inner_radius(&self) -> f64 {
        (1.0 - self.c).powf(self.depth as f64 / 2.0)
    }

    pub fn outer_radius(&self) -> f64 {
        1.0
    }

    /// Density in the complex plane at `z`; zero outside the annulus.
    pub fn density(&self, z: C64) -> f64 {
        let r = z.norm();
        if r < self.inner_radius() || r > 1.0 || r == 0.0 {
            return 0.0;
        }
        let l = self.depth as f64;
        r.powf(2.0 / l - 2.0) / (PI * self.c * l)
    }

    /// Density of `|lambda|`, i.e. `2 pi r` times the planar density.
    pub fn radial_density(&self, r: f64) -> f64 {
        2.0 * PI * r * self.density(C64::new(r, 0.0))
    }

    /// `P(|lambda| <= r)`.
    pub fn radial_cdf(&self, r: f64) -> f64 {
        if r <= self.inner_radius() {
            return 0.0;
        }
        if r >= 1.0 {
            return 1.0;
        }
        ((r.powf(2.0 / self.depth as f64) - (1.0 - self.c)) / self.c).clamp(0.0, 1.0)
    }
}

/// Expected `|lambda|` under the model:
/// `2 (1 - (1 - c)^((L + 2) / 2)) / (c (L + 2))`.
pub fn ring_mean_radius(model: &RingLawModel) -> f64 {
    let l = model.depth as f64;
    2.0 * (1.0 - (1.0 - model.c).powf((l + 2.0) / 2.0)) / (model.c * (l + 2.0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub margin: f64,
    /// Fraction of eigenvalues with modulus in `[inner - margin, outer + margin]`.
    pub in_annulus_fraction: f64,
    /// Eigenvalues beyond `outer + margin`, largest modulus first.
    pub outliers: Vec<(f64, f64)>,
    /// Kolmogorov-Smirnov distance between the empirical modulus CDF and the
    /// model's radial CDF.
    pub ks_distance: f64,
    pub msr: f64,
    pub analytic_msr: f64,
}

pub fn ring_conformance(sample: &SpectralSample, model: &RingLawModel, margin: f64) -> ConformanceReport {
    let inner = model.inner_radius();
    let outer = model.outer_radius();
    let mut radii: Vec<f64> = sample.eigenvalues.iter().map(|z| z.norm()).collect();
    radii.sort_by(f64::total_cmp);
    let n = radii.len();
    let inside = radii
        .iter()
        .filter(|&&r| r >= inner - margin && r <= outer + margin)
        .count();
    let mut outliers: Vec<C64> = sample
        .eigenvalues
        .iter()
        .copied()
        .filter(|z| z.norm() > outer + margin)
        .collect();
    outliers.sort_by(|a, b| b.norm().total_cmp(&a.norm()));

    let mut ks: f64 = 0.0;
    for (i, &r) in radii.iter().enumerate() {
        let f = model.radial_cdf(r);
        ks = ks.max((i + 1) as f64 / n as f64 - f).max(f - i as f64 / n as f64);
    }

    ConformanceReport {
        inner_radius: inner,
        outer_radius: outer,
        margin,
        in_annulus_fraction: if n == 0 { 0.0 } else { inside as f64 / n as f64 },
        outliers: outliers.iter().map(|z| (z.re, z.im)).collect(),
        ks_distance: ks,
        msr: sample.msr,
        analytic_msr: ring_mean_radius(model),
    }
}
