//! Random-matrix machinery of the detector: window standardization, singular
//! value equivalents, products of windows, the Ring Law reference model and
//! the mean spectral radius.

mod ring;
mod spectrum;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    eigen_general, sample_haar_unitary, sqrt_psd, ComplexMatrix, EigenConfig, C64,
};

pub use ring::{ring_conformance, ring_mean_radius, ConformanceReport, RingLawModel, DEFAULT_MARGIN};
pub use spectrum::{read_spectrum_csv, write_spectrum, SpectrumMetadata};

/// Rows with population standard deviation at or below this are dead.
pub const DEFAULT_SIGMA_MIN: f64 = 1e-12;

/// Jitter amplitude, relative to the channel's scale, used to revive dead
/// channels when jitter mode is on.
pub const JITTER_SCALE: f64 = 1e-8;

/// Population mean and standard deviation (divide by the row length).
pub fn row_stats(row: &[C64]) -> (C64, f64) {
    let n = row.len() as f64;
    let mean: C64 = row.iter().sum::<C64>() / n;
    let var = row.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn dead_rows(x: &ComplexMatrix, sigma_min: f64) -> Vec<usize> {
    (0..x.rows())
        .filter(|&i| row_stats(x.row(i)).1 <= sigma_min)
        .collect()
}

/// Shift and scale every row to sample mean 0 and standard deviation 1.
pub fn standardize_rows(x: &ComplexMatrix, sigma_min: f64) -> Result<ComplexMatrix> {
    let dead = dead_rows(x, sigma_min);
    if !dead.is_empty() {
        return Err(Error::DeadChannel { rows: dead });
    }
    let mut out = x.clone();
    for i in 0..out.rows() {
        let (mean, sigma) = row_stats(out.row(i));
        let inv = 1.0 / sigma;
        for z in out.row_mut(i) {
            *z = (*z - mean) * inv;
        }
    }
    Ok(out)
}

/// Adds Gaussian noise to dead rows only, with amplitude
/// `JITTER_SCALE * max(range, max |x|)` of the row (or `JITTER_SCALE` for an
/// all-zero row). Live rows are returned untouched.
pub fn jitter_dead_rows<R: Rng + ?Sized>(x: &ComplexMatrix, sigma_min: f64, rng: &mut R) -> ComplexMatrix {
    let mut out = x.clone();
    for i in dead_rows(x, sigma_min) {
        let row = out.row_mut(i);
        let (lo, hi) = row
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
        let peak = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let scale = (hi - lo).max(peak);
        let amp = JITTER_SCALE * if scale > 0.0 { scale } else { 1.0 };
        for z in row.iter_mut() {
            let e: f64 = rng.sample(StandardNormal);
            z.re += amp * e;
        }
    }
    out
}

/// `sqrt(X X^H / n) U` for a `p x n` standardized window, with `U` a fresh
/// Haar unitary drawn from `rng`. The result is `p x p` and has the singular
/// values of `X / sqrt(n)`.
pub fn singular_value_equivalent<R: Rng + ?Sized>(x_std: &ComplexMatrix, rng: &mut R) -> Result<ComplexMatrix> {
    let (p, n) = (x_std.rows(), x_std.cols());
    if p == 0 || p > n {
        return Err(Error::Ratio {
            p,
            n,
            c: p as f64 / n as f64,
        });
    }
    let w = x_std.gram().scale_real(1.0 / n as f64);
    let s = sqrt_psd(&w)?;
    let u = sample_haar_unitary(p, rng);
    s.matmul(&u)
}

/// Product of already-computed singular value equivalents, left to right.
pub fn product(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::Dimension("empty window product".into()))?;
    rest.iter().try_fold(first.clone(), |acc, f| acc.matmul(f))
}

/// `Z = prod_k SVE(windows_k)` for standardized windows of identical shape.
/// Haar factors are drawn from `rng` in window order.
pub fn window_product<R: Rng + ?Sized>(windows: &[ComplexMatrix], rng: &mut R) -> Result<ComplexMatrix> {
    let first = windows
        .first()
        .ok_or_else(|| Error::Dimension("window product needs at least one window".into()))?;
    if let Some(bad) = windows
        .iter()
        .find(|w| (w.rows(), w.cols()) != (first.rows(), first.cols()))
    {
        return Err(Error::Dimension(format!(
            "windows must share a shape: {}x{} vs {}x{}",
            first.rows(),
            first.cols(),
            bad.rows(),
            bad.cols()
        )));
    }
    let sves = windows
        .iter()
        .map(|w| singular_value_equivalent(w, rng))
        .collect::<Result<Vec<_>>>()?;
    product(&sves)
}

/// Rescales each row of the square product to variance `1/p`:
/// `z_i / (sqrt(p) * sigma(z_i))`. Unlike [`standardize_rows`] the row mean
/// is left in place.
pub fn standardize_product(z: &ComplexMatrix, sigma_min: f64) -> Result<ComplexMatrix> {
    if !z.is_square() {
        return Err(Error::Dimension(format!(
            "product must be square, got {}x{}",
            z.rows(),
            z.cols()
        )));
    }
    let dead = dead_rows(z, sigma_min);
    if !dead.is_empty() {
        return Err(Error::DeadChannel { rows: dead });
    }
    let sqrt_p = (z.rows() as f64).sqrt();
    let mut out = z.clone();
    for i in 0..out.rows() {
        let sigma = row_stats(out.row(i)).1;
        let inv = 1.0 / (sqrt_p * sigma);
        for v in out.row_mut(i) {
            *v *= inv;
        }
    }
    Ok(out)
}

/// Eigenvalues of a standardized product together with their mean modulus.
#[derive(Debug, Clone)]
pub struct SpectralSample {
    pub eigenvalues: Vec<C64>,
    pub msr: f64,
    pub c: f64,
    pub depth: usize,
}

/// `(1/p) * sum |lambda_i|`.
pub fn mean_spectral_radius(eigenvalues: &[C64]) -> f64 {
    if eigenvalues.is_empty() {
        return 0.0;
    }
    eigenvalues.iter().map(|z| z.norm()).sum::<f64>() / eigenvalues.len() as f64
}

pub fn spectral_sample(z_std: &ComplexMatrix, c: f64, depth: usize) -> Result<SpectralSample> {
    let eig = eigen_general(z_std, &EigenConfig::values_only())?;
    let msr = mean_spectral_radius(&eig.values);
    Ok(SpectralSample {
        eigenvalues: eig.values,
        msr,
        c,
        depth,
    })
}

/// Standardize, take the singular value equivalent and rescale to row
/// variance `1/p`: the normalized noise factor whose spectrum follows the
/// single-window Ring Law.
pub fn normalized_equivalent<R: Rng + ?Sized>(
    window: &ComplexMatrix,
    sigma_min: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let x = standardize_rows(window, sigma_min)?;
    let sve = singular_value_equivalent(&x, rng)?;
    standardize_product(&sve, sigma_min)
}

/// The full spectral pipeline on `L` raw windows: standardize each, multiply
/// their singular value equivalents, re-standardize and take the spectrum.
pub fn analyze_windows<R: Rng + ?Sized>(
    windows: &[ComplexMatrix],
    sigma_min: f64,
    rng: &mut R,
) -> Result<SpectralSample> {
    let std = windows
        .iter()
        .map(|w| standardize_rows(w, sigma_min))
        .collect::<Result<Vec<_>>>()?;
    let z = window_product(&std, rng)?;
    let z_std = standardize_product(&z, sigma_min)?;
    let (p, n) = (windows[0].rows(), windows[0].cols());
    spectral_sample(&z_std, p as f64 / n as f64, windows.len())
}
