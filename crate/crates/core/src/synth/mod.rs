//! Synthetic data: spiked `signal + noise` matrices whose spectra show Ring
//! Law outliers, and streaming step/ramp scenarios for the detector.

mod scenario;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{sample_ginibre, ComplexMatrix, Field, C64};
use crate::rmt::{normalized_equivalent, product, DEFAULT_SIGMA_MIN};

pub use scenario::{generate_scenario, noise_scale_gamma, Anomaly, GroundTruth, Scenario, ScenarioSpec};

/// Diagonal spike values placed at the top-left of an otherwise zero
/// `p x p` matrix. Empirically only spikes with modulus above 1 separate
/// from the ring.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpikeSpec {
    pub values: Vec<C64>,
}

impl SpikeSpec {
    pub fn new(values: Vec<C64>) -> Self {
        Self { values }
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `diag(values, 0, ..., 0)` of order `p`.
    pub fn matrix(&self, p: usize) -> Result<ComplexMatrix> {
        if self.len() > p {
            return Err(Error::Dimension(format!("{} spikes do not fit in order {p}", self.len())));
        }
        let mut m = ComplexMatrix::zeros(p, p);
        for (k, &v) in self.values.iter().enumerate() {
            m.row_mut(k)[k] = v;
        }
        Ok(m)
    }
}

/// A `p x n` draw of `Ginibre / sqrt(p)` together with the spikes meant to
/// be superimposed on it.
#[derive(Debug, Clone)]
pub struct SpikedNoise {
    pub noise: ComplexMatrix,
    pub spikes: SpikeSpec,
}

impl SpikedNoise {
    /// The raw data matrix `noise + [P | 0]`.
    pub fn matrix(&self) -> ComplexMatrix {
        let mut m = self.noise.clone();
        for (k, &v) in self.spikes.values.iter().enumerate() {
            m.row_mut(k)[k] += v;
        }
        m
    }

    /// Normalized singular value equivalent of the noise (row variance
    /// `1/p`) plus `P`. The Haar factor would scramble a spike planted in the
    /// data itself, so the low-rank term is added after the noise is mapped
    /// to its square equivalent.
    pub fn equivalent<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ComplexMatrix> {
        let base = self.noise_equivalent(rng)?;
        base.add(&self.spikes.matrix(self.noise.rows())?)
    }

    pub fn noise_equivalent<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ComplexMatrix> {
        normalized_equivalent(&self.noise, DEFAULT_SIGMA_MIN, rng)
    }
}

/// Draws real `Ginibre(p, n) / sqrt(p)` and attaches `spikes`.
pub fn make_signal_plus_noise<R: Rng + ?Sized>(
    p: usize,
    n: usize,
    spikes: &SpikeSpec,
    rng: &mut R,
) -> Result<SpikedNoise> {
    if spikes.len() > p.min(n) {
        return Err(Error::Dimension(format!(
            "{} spikes exceed min(p, n) = {}",
            spikes.len(),
            p.min(n)
        )));
    }
    let noise = sample_ginibre(p, n, rng, Field::Real).scale_real(1.0 / (p as f64).sqrt());
    Ok(SpikedNoise {
        noise,
        spikes: spikes.clone(),
    })
}

/// Both readings of a product of spiked factors, built on the same noise
/// equivalents `N_k`.
#[derive(Debug, Clone)]
pub struct SpikedProduct {
    /// `prod_k (N_k + P_k)`, mixed terms included.
    pub full: ComplexMatrix,
    /// `prod_k N_k + prod_k P_k`.
    pub separated: ComplexMatrix,
}

pub fn spiked_product<R: Rng + ?Sized>(factors: &[SpikedNoise], rng: &mut R) -> Result<SpikedProduct> {
    let first = factors
        .first()
        .ok_or_else(|| Error::Dimension("spiked product needs at least one factor".into()))?;
    let p = first.noise.rows();
    let noise = factors
        .iter()
        .map(|f| f.noise_equivalent(rng))
        .collect::<Result<Vec<_>>>()?;
    let spikes = factors
        .iter()
        .map(|f| f.spikes.matrix(p))
        .collect::<Result<Vec<_>>>()?;
    let sums = noise
        .iter()
        .zip(&spikes)
        .map(|(n, s)| n.add(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpikedProduct {
        full: product(&sums)?,
        separated: product(&noise)?.add(&product(&spikes)?)?,
    })
}

/// Predicted outlier locations of a product: the elementwise product of the
/// spike diagonals.
pub fn product_spike_reference(specs: &[SpikeSpec]) -> Result<Vec<C64>> {
    let first = specs
        .first()
        .ok_or_else(|| Error::Dimension("no spike specs".into()))?;
    if let Some(bad) = specs.iter().find(|s| s.len() != first.len()) {
        return Err(Error::Dimension(format!(
            "spike specs differ in length: {} vs {}",
            first.len(),
            bad.len()
        )));
    }
    Ok((0..first.len())
        .map(|k| specs.iter().map(|s| s.values[k]).product())
        .collect())
}
