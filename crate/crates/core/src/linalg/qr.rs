use num_traits::Zero;

use super::householder::reflector;
use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Thin Householder QR of a `rows x cols` matrix with `rows >= cols`.
///
/// Returns `Q` (`rows x cols`, orthonormal columns) and `R` (`cols x cols`,
/// upper triangular with a real diagonal).
pub fn qr_decompose(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows < cols {
        return Err(Error::Dimension(format!(
            "QR needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let mut a = m.clone();
    let mut vs: Vec<Vec<C64>> = Vec::with_capacity(cols);
    let mut taus = Vec::with_capacity(cols);
    let mut w = vec![C64::zero(); cols];

    for k in 0..cols {
        let alpha = a[(k, k)];
        let mut tail: Vec<C64> = (k + 1..rows).map(|i| a[(i, k)]).collect();
        let (beta, tau) = reflector(alpha, &mut tail);
        a[(k, k)] = C64::new(beta, 0.0);
        for i in k + 1..rows {
            a[(i, k)] = C64::zero();
        }
        let mut v = Vec::with_capacity(rows - k);
        v.push(C64::new(1.0, 0.0));
        v.extend(tail);

        if !tau.is_zero() && k + 1 < cols {
            // A[k.., k+1..] -= conj(tau) v (v^H A)
            let wk = &mut w[k + 1..cols];
            wk.iter_mut().for_each(|z| *z = C64::zero());
            for (off, vi) in v.iter().enumerate() {
                let vc = vi.conj();
                let row = &a.row(k + off)[k + 1..cols];
                for (acc, &x) in wk.iter_mut().zip(row) {
                    *acc += vc * x;
                }
            }
            let tc = tau.conj();
            for (off, vi) in v.iter().enumerate() {
                let s = tc * vi;
                let row = &mut a.row_mut(k + off)[k + 1..cols];
                for (x, &acc) in row.iter_mut().zip(wk.iter()) {
                    *x -= s * acc;
                }
            }
        }
        vs.push(v);
        taus.push(tau);
    }

    let mut r = ComplexMatrix::zeros(cols, cols);
    for i in 0..cols {
        r.row_mut(i)[i..].copy_from_slice(&a.row(i)[i..cols]);
    }

    // Q = H_0 H_1 ... H_{cols-1} applied to the leading columns of I.
    let mut q = ComplexMatrix::zeros(rows, cols);
    for i in 0..cols {
        q[(i, i)] = C64::new(1.0, 0.0);
    }
    for k in (0..cols).rev() {
        let (v, tau) = (&vs[k], taus[k]);
        if tau.is_zero() {
            continue;
        }
        let wk = &mut w[k..cols];
        wk.iter_mut().for_each(|z| *z = C64::zero());
        for (off, vi) in v.iter().enumerate() {
            let vc = vi.conj();
            let row = &q.row(k + off)[k..cols];
            for (acc, &x) in wk.iter_mut().zip(row) {
                *acc += vc * x;
            }
        }
        for (off, vi) in v.iter().enumerate() {
            let s = tau * vi;
            let row = &mut q.row_mut(k + off)[k..cols];
            for (x, &acc) in row.iter_mut().zip(wk.iter()) {
                *x -= s * acc;
            }
        }
    }
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factors_trivially() {
        let (q, r) = qr_decompose(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(q, ComplexMatrix::identity(3));
        assert_eq!(r, ComplexMatrix::identity(3));
    }

    #[test]
    fn permutation_matrix() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::zero();
        let m = ComplexMatrix::from_rows(&[vec![zero, one], vec![one, zero]]).unwrap();
        let (q, r) = qr_decompose(&m).unwrap();
        assert!(q.unitarity_defect() < 1e-12);
        assert!(q.matmul(&r).unwrap().distance(&m) < 1e-12);
        assert!(r.is_upper_triangular(0.0));
    }

    #[test]
    fn tall_matrix_thin_factors() {
        let m = ComplexMatrix::from_fn(6, 3, |i, j| C64::new((i + 2 * j) as f64, (i as f64 - j as f64).powi(2)));
        let (q, r) = qr_decompose(&m).unwrap();
        assert_eq!((q.rows(), q.cols()), (6, 3));
        assert_eq!((r.rows(), r.cols()), (3, 3));
        assert!(q.unitarity_defect() < 1e-12);
        assert!(q.matmul(&r).unwrap().distance(&m) < 1e-12 * m.frobenius_norm());
    }

    #[test]
    fn wide_matrix_is_rejected() {
        assert!(matches!(
            qr_decompose(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }
}
