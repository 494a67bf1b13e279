use num_traits::Zero;

use super::householder::reflector;
use super::{ComplexMatrix, EigenResult, C64};
use crate::error::{Error, Result};

/// Relative asymmetry `||m - m^H||_F / ||m||_F` tolerated by [`eigen_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// QL iterations allowed per eigenvalue before giving up.
const QL_MAX_ITER: usize = 60;

/// Eigen-decomposition of a Hermitian matrix.
///
/// Householder reduction to a real symmetric tridiagonal matrix followed by
/// implicit QL with Wilkinson shifts. Eigenvalues are returned in descending
/// order with zero imaginary part; when `want_vectors` is set the columns of
/// `vectors` form a unitary matrix of matching eigenvectors.
pub fn eigen_hermitian(m: &ComplexMatrix, want_vectors: bool) -> Result<EigenResult> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigen_hermitian needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let norm = m.frobenius_norm();
    let asym = m.distance(&m.adjoint());
    if asym > HERMITIAN_TOL * norm {
        return Err(Error::NonHermitian {
            asymmetry: if norm > 0.0 { asym / norm } else { asym },
        });
    }
    if n == 0 {
        return Ok(EigenResult {
            values: Vec::new(),
            vectors: want_vectors.then(|| ComplexMatrix::zeros(0, 0)),
        });
    }

    let tri = tridiagonalize(m);
    let mut d = tri.diag.clone();
    let mut e = tri.offdiag.clone();
    e.push(0.0);
    // Rows of `zt` are eigenvectors of the tridiagonal matrix.
    let mut zt = want_vectors.then(|| {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        z
    });
    tridiagonal_ql(&mut d, &mut e, zt.as_deref_mut(), n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let values = order.iter().map(|&i| C64::new(d[i], 0.0)).collect();

    let vectors = zt.map(|zt| {
        let mut v = ComplexMatrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            for r in 0..n {
                v[(r, col)] = C64::new(zt[src * n + r], 0.0);
            }
        }
        tri.apply_q(&mut v);
        v
    });
    Ok(EigenResult { values, vectors })
}

/// `m = Q T Q^H` with `T` real symmetric tridiagonal and `Q` stored as
/// Householder reflectors.
struct Tridiagonal {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    reflectors: Vec<(Vec<C64>, C64)>,
}

impl Tridiagonal {
    /// Overwrites `v` with `Q v`.
    fn apply_q(&self, v: &mut ComplexMatrix) {
        let cols = v.cols();
        let mut w = vec![C64::zero(); cols];
        for (k, (refl, tau)) in self.reflectors.iter().enumerate().rev() {
            if tau.is_zero() {
                continue;
            }
            let base = k + 1;
            w.iter_mut().for_each(|z| *z = C64::zero());
            for (off, vi) in refl.iter().enumerate() {
                let vc = vi.conj();
                for (acc, &x) in w.iter_mut().zip(v.row(base + off)) {
                    *acc += vc * x;
                }
            }
            for (off, vi) in refl.iter().enumerate() {
                let s = tau * vi;
                for (x, &acc) in v.row_mut(base + off).iter_mut().zip(&w) {
                    *x -= s * acc;
                }
            }
        }
    }
}

fn tridiagonalize(m: &ComplexMatrix) -> Tridiagonal {
    let n = m.rows();
    let mut a = m.clone();
    let mut diag = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n.saturating_sub(1));
    let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
    let mut y = vec![C64::zero(); n];

    for k in 0..n.saturating_sub(1) {
        diag.push(a[(k, k)].re);
        let alpha = a[(k + 1, k)];
        let mut tail: Vec<C64> = (k + 2..n).map(|i| a[(i, k)]).collect();
        let (beta, tau) = reflector(alpha, &mut tail);
        offdiag.push(beta);
        let mut v = Vec::with_capacity(n - k - 1);
        v.push(C64::new(1.0, 0.0));
        v.extend(tail);

        if !tau.is_zero() {
            // Trailing block B = A[k+1.., k+1..] becomes H^H B H via
            // y = tau B v, w = y - (tau/2)(y^H v) v, B -= v w^H + w v^H.
            let base = k + 1;
            let len = n - base;
            let y = &mut y[..len];
            for (r, yr) in y.iter_mut().enumerate() {
                let row = &a.row(base + r)[base..];
                let mut acc = C64::zero();
                for (&x, vi) in row.iter().zip(&v) {
                    acc += x * vi;
                }
                *yr = tau * acc;
            }
            let yhv: C64 = y.iter().zip(&v).map(|(yi, vi)| yi.conj() * vi).sum();
            let coef = -0.5 * tau * yhv;
            for (yi, vi) in y.iter_mut().zip(&v) {
                *yi += coef * vi;
            }
            for r in 0..len {
                let (vr, wr) = (v[r], y[r]);
                let row = &mut a.row_mut(base + r)[base..];
                for ((x, vj), wj) in row.iter_mut().zip(&v).zip(y.iter()) {
                    *x -= vr * wj.conj() + wr * vj.conj();
                }
            }
        }
        reflectors.push((v, tau));
    }
    diag.push(a[(n - 1, n - 1)].re);
    Tridiagonal {
        diag,
        offdiag,
        reflectors,
    }
}

/// Implicit QL with Wilkinson shifts on the symmetric tridiagonal `(d, e)`,
/// where `e[i]` couples `i` and `i + 1` and `e[n - 1]` is scratch. Rotations
/// are accumulated into the rows of `zt` when given.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>, n: usize) -> Result<()> {
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                let off = e[..n - 1].iter().map(|x| x * x).sum::<f64>().sqrt();
                return Err(Error::NoConvergence {
                    order: n,
                    off_diagonal: off,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
