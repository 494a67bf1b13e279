use super::{eigen_hermitian, ComplexMatrix};
use crate::error::{Error, Result};

/// Eigenvalues at or above this floor are treated as roundoff and clamped
/// to zero; anything more negative is reported as not PSD.
pub const PSD_CLAMP_FLOOR: f64 = -1e-6;

/// Principal square root of a Hermitian positive semidefinite matrix.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eigen_hermitian(m, true)?;
    if let Some(bad) = eig.values.iter().map(|z| z.re).find(|&l| l < PSD_CLAMP_FLOOR) {
        return Err(Error::NotPsd { eigenvalue: bad });
    }
    let v = eig.vectors.expect("vectors requested");
    let n = v.rows();
    // S = (V D^{1/4}) (V D^{1/4})^H
    let mut b = v;
    let quarter: Vec<f64> = eig.values.iter().map(|z| z.re.max(0.0).sqrt().sqrt()).collect();
    for r in 0..n {
        for (x, &q) in b.row_mut(r).iter_mut().zip(&quarter) {
            *x *= q;
        }
    }
    let mut s = b.gram();
    for i in 0..n {
        s[(i, i)].im = 0.0;
    }
    Ok(s)
}
