//! Dense complex linear algebra used by the spectral pipeline.
//!
//! Everything here is a pure function of its inputs plus an explicitly
//! passed [`RandomSource`], so distinct inputs may be processed on distinct
//! threads.

mod general;
mod hermitian;
mod householder;
mod matrix;
mod qr;
mod random;
mod sqrt;

pub use general::eigen_general;
pub use hermitian::{eigen_hermitian, HERMITIAN_TOL};
pub use matrix::{ComplexMatrix, C64};
pub use qr::qr_decompose;
pub use random::{sample_ginibre, sample_haar_unitary, seeded, Field, RandomSource};
pub use sqrt::{sqrt_psd, PSD_CLAMP_FLOOR};

/// Default relative residual bound for computed eigenvectors.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
/// Default QR iteration budget, in sweeps per matrix order.
pub const DEFAULT_SWEEPS_PER_ORDER: usize = 30;

/// Knobs for [`eigen_general`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenConfig {
    pub want_vectors: bool,
    /// Eigenvectors must satisfy `||A v - lambda v|| <= residual_tol * ||A||_F`.
    pub residual_tol: f64,
    /// Iterations allowed per deflated eigenvalue, times `max(order, 10)`.
    pub sweeps_per_order: usize,
}

impl EigenConfig {
    pub fn values_only() -> Self {
        Self {
            want_vectors: false,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            sweeps_per_order: DEFAULT_SWEEPS_PER_ORDER,
        }
    }

    pub fn with_vectors() -> Self {
        Self {
            want_vectors: true,
            ..Self::values_only()
        }
    }
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self::values_only()
    }
}

/// Eigenvalues with optional right eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<C64>,
    pub vectors: Option<ComplexMatrix>,
}

impl EigenResult {
    /// Largest `||A v_i - lambda_i v_i||_2` over all eigenpairs, or `None`
    /// when no vectors were computed.
    pub fn max_residual(&self, a: &ComplexMatrix) -> Option<f64> {
        let v = self.vectors.as_ref()?;
        let av = a.matmul(v).ok()?;
        let n = v.rows();
        let mut worst: f64 = 0.0;
        for (k, &lambda) in self.values.iter().enumerate() {
            let r = (0..n)
                .map(|i| (av[(i, k)] - lambda * v[(i, k)]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        Some(worst)
    }
}
