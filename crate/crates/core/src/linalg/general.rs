use num_traits::Zero;

use super::householder::reflector;
use super::{ComplexMatrix, EigenConfig, EigenResult, C64};
use crate::error::{Error, Result};

/// Exceptional shifts are used every `EXCEPTIONAL_PERIOD` iterations
/// without deflation.
const EXCEPTIONAL_PERIOD: usize = 10;
const EXCEPTIONAL_SCALE: f64 = 0.75;

#[inline]
fn cabs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Eigenvalues (and optionally right eigenvectors) of a general complex
/// square matrix.
///
/// The matrix is reduced to upper Hessenberg form with Householder
/// reflectors and then driven to triangular (Schur) form by single-shift
/// implicit QR sweeps with Wilkinson shifts and aggressive-early-style
/// small-subdiagonal deflation. Eigenvectors come from back substitution on
/// the Schur form.
pub fn eigen_general(m: &ComplexMatrix, cfg: &EigenConfig) -> Result<EigenResult> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigen_general needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(EigenResult {
            values: Vec::new(),
            vectors: cfg.want_vectors.then(|| ComplexMatrix::zeros(0, 0)),
        });
    }
    let mut h = m.clone();
    let mut z = cfg.want_vectors.then(|| ComplexMatrix::identity(n));
    reduce_to_hessenberg(&mut h, z.as_mut());

    let max_iter = cfg.sweeps_per_order * n.max(10);
    let values = hessenberg_qr(
        h.as_mut_slice(),
        n,
        cfg.want_vectors,
        z.as_mut().map(|z| z.as_mut_slice()),
        max_iter,
    )?;

    let vectors = match z {
        Some(z) => Some(schur_eigenvectors(&h, &z, &values)),
        None => None,
    };
    let result = EigenResult { values, vectors };
    if cfg.want_vectors {
        let residual = result.max_residual(m).unwrap_or(0.0);
        let tolerance = cfg.residual_tol * m.frobenius_norm().max(f64::MIN_POSITIVE);
        if residual > tolerance {
            return Err(Error::InaccurateEigenvectors {
                residual,
                tolerance,
            });
        }
    }
    Ok(result)
}

/// In-place similarity reduction `A <- Q^H A Q` to upper Hessenberg form.
/// When `q` is given it is right-multiplied by the accumulated reflectors.
fn reduce_to_hessenberg(a: &mut ComplexMatrix, mut q: Option<&mut ComplexMatrix>) {
    let n = a.rows();
    let mut w = vec![C64::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let alpha = a[(k + 1, k)];
        let mut tail: Vec<C64> = (k + 2..n).map(|i| a[(i, k)]).collect();
        let (beta, tau) = reflector(alpha, &mut tail);
        if tau.is_zero() {
            continue;
        }
        a[(k + 1, k)] = C64::new(beta, 0.0);
        for i in k + 2..n {
            a[(i, k)] = C64::zero();
        }
        let mut v = Vec::with_capacity(n - k - 1);
        v.push(C64::new(1.0, 0.0));
        v.extend(tail);
        let base = k + 1;

        // Left: A[base.., k+1..] -= conj(tau) v (v^H A).
        let wl = &mut w[base..];
        wl.iter_mut().for_each(|z| *z = C64::zero());
        for (off, vi) in v.iter().enumerate() {
            let vc = vi.conj();
            for (acc, &x) in wl.iter_mut().zip(&a.row(base + off)[base..]) {
                *acc += vc * x;
            }
        }
        let tc = tau.conj();
        for (off, vi) in v.iter().enumerate() {
            let s = tc * vi;
            for (x, &acc) in a.row_mut(base + off)[base..].iter_mut().zip(wl.iter()) {
                *x -= s * acc;
            }
        }

        // Right: A[.., base..] -= (A v) tau v^H.
        right_apply(a, base, &v, tau);
        if let Some(q) = q.as_deref_mut() {
            right_apply(q, base, &v, tau);
        }
    }
}

/// `M[:, base..] <- M[:, base..] (I - tau v v^H)` for every row.
fn right_apply(m: &mut ComplexMatrix, base: usize, v: &[C64], tau: C64) {
    for r in 0..m.rows() {
        let row = &mut m.row_mut(r)[base..];
        let mut s = C64::zero();
        for (&x, vi) in row.iter().zip(v) {
            s += x * vi;
        }
        let s = s * tau;
        for (x, vi) in row.iter_mut().zip(v) {
            *x -= s * vi.conj();
        }
    }
}

/// Single-shift complex QR iteration on an upper Hessenberg matrix stored
/// row-major in `h`.
///
/// With `want_t` the full Schur form is computed in place; otherwise only
/// the active diagonal block is updated, which is enough for eigenvalues.
/// `z` accumulates the Schur vectors when present.
fn hessenberg_qr(
    h: &mut [C64],
    n: usize,
    want_t: bool,
    mut z: Option<&mut [C64]>,
    max_iter: usize,
) -> Result<Vec<C64>> {
    macro_rules! at {
        ($r:expr, $c:expr) => {
            h[($r) * n + ($c)]
        };
    }
    let mut w = vec![C64::zero(); n];
    if n == 1 {
        w[0] = h[0];
        return Ok(w);
    }

    for j in 0..n.saturating_sub(3) {
        at!(j + 2, j) = C64::zero();
        at!(j + 3, j) = C64::zero();
    }
    if n >= 3 {
        at!(n - 1, n - 3) = C64::zero();
    }

    // Make the subdiagonal real with a diagonal unitary similarity.
    for i in 1..n {
        let sub = at!(i, i - 1);
        if sub.im != 0.0 {
            let sc = sub / cabs1(sub);
            let sc = sc.conj() / sc.norm();
            at!(i, i - 1) = C64::new(sub.norm(), 0.0);
            for j in i..n {
                at!(i, j) *= sc;
            }
            for r in 0..=(i + 1).min(n - 1) {
                at!(r, i) *= sc.conj();
            }
            if let Some(z) = z.as_deref_mut() {
                for r in 0..n {
                    z[r * n + i] *= sc.conj();
                }
            }
        }
    }

    let ulp = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ulp);
    let (mut i1, mut i2) = (0usize, n - 1);
    let mut kdefl = 0usize;
    let mut i = n as isize - 1;

    while i >= 0 {
        let iu = i as usize;
        let mut l = 0usize;
        let mut converged = false;

        for _ in 0..=max_iter {
            // Look for a single small subdiagonal element.
            let mut k = iu;
            while k > l {
                let sub = at!(k, k - 1);
                if cabs1(sub) <= smlnum {
                    break;
                }
                let mut tst = cabs1(at!(k - 1, k - 1)) + cabs1(at!(k, k));
                if tst == 0.0 {
                    if k >= 2 {
                        tst += at!(k - 1, k - 2).re.abs();
                    }
                    if k + 1 < n {
                        tst += at!(k + 1, k).re.abs();
                    }
                }
                if sub.re.abs() <= ulp * tst {
                    // Ahues & Kressner deflation test.
                    let (x, y) = (cabs1(sub), cabs1(at!(k - 1, k)));
                    let (ab, ba) = (x.max(y), x.min(y));
                    let (x, y) = (cabs1(at!(k, k)), cabs1(at!(k - 1, k - 1) - at!(k, k)));
                    let (aa, bb) = (x.max(y), x.min(y));
                    let s = aa + ab;
                    if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                        break;
                    }
                }
                k -= 1;
            }
            l = k;
            if l > 0 {
                at!(l, l - 1) = C64::zero();
            }
            if l >= iu {
                converged = true;
                break;
            }
            kdefl += 1;
            if !want_t {
                i1 = l;
                i2 = iu;
            }

            let t = if kdefl % (2 * EXCEPTIONAL_PERIOD) == 0 {
                C64::new(EXCEPTIONAL_SCALE * at!(iu, iu - 1).re.abs(), 0.0) + at!(iu, iu)
            } else if kdefl % EXCEPTIONAL_PERIOD == 0 {
                C64::new(EXCEPTIONAL_SCALE * at!(l + 1, l).re.abs(), 0.0) + at!(l, l)
            } else {
                wilkinson_shift(at!(iu - 1, iu - 1), at!(iu - 1, iu), at!(iu, iu - 1), at!(iu, iu))
            };

            // Look for two consecutive small subdiagonal elements.
            let mut v;
            let mut m = iu - 1;
            loop {
                let h11 = at!(m, m);
                let h22 = at!(m + 1, m + 1);
                let mut h11s = h11 - t;
                let mut h21 = at!(m + 1, m).re;
                let s = cabs1(h11s) + h21.abs();
                h11s /= s;
                h21 /= s;
                v = [h11s, C64::new(h21, 0.0)];
                if m == l {
                    break;
                }
                let h10 = at!(m, m - 1).re;
                if h10.abs() * h21.abs() <= ulp * (cabs1(h11s) * (cabs1(h11) + cabs1(h22))) {
                    break;
                }
                m -= 1;
            }

            // Single-shift QR sweep chasing the bulge from row m to row i.
            for k in m..iu {
                if k > m {
                    v = [at!(k, k - 1), at!(k + 1, k - 1)];
                }
                let mut tail = [v[1]];
                let (beta, t1) = reflector(v[0], &mut tail);
                if k > m {
                    at!(k, k - 1) = C64::new(beta, 0.0);
                    at!(k + 1, k - 1) = C64::zero();
                }
                let v2 = tail[0];
                let t2 = (t1 * v2).re;
                let t1c = t1.conj();

                {
                    let (lo, hi) = h.split_at_mut((k + 1) * n);
                    let rk = &mut lo[k * n + k..k * n + i2 + 1];
                    let rk1 = &mut hi[k..i2 + 1];
                    for (a, b) in rk.iter_mut().zip(rk1.iter_mut()) {
                        let sum = t1c * *a + *b * t2;
                        *a -= sum;
                        *b -= sum * v2;
                    }
                }
                let v2c = v2.conj();
                for j in i1..=(k + 2).min(iu) {
                    let sum = t1 * at!(j, k) + at!(j, k + 1) * t2;
                    at!(j, k) -= sum;
                    at!(j, k + 1) -= sum * v2c;
                }
                if let Some(z) = z.as_deref_mut() {
                    for j in 0..n {
                        let row = &mut z[j * n..(j + 1) * n];
                        let sum = t1 * row[k] + row[k + 1] * t2;
                        row[k] -= sum;
                        row[k + 1] -= sum * v2c;
                    }
                }

                if k == m && m > l {
                    // Restore a real subdiagonal after starting mid-block.
                    let mut temp = C64::new(1.0, 0.0) - t1;
                    temp /= temp.norm();
                    at!(m + 1, m) *= temp.conj();
                    if m + 2 <= iu {
                        at!(m + 2, m + 1) *= temp;
                    }
                    for j in m..=iu {
                        if j == m + 1 {
                            continue;
                        }
                        for c in j + 1..=i2 {
                            at!(j, c) *= temp;
                        }
                        for r in i1..j {
                            at!(r, j) *= temp.conj();
                        }
                        if let Some(z) = z.as_deref_mut() {
                            for r in 0..n {
                                z[r * n + j] *= temp.conj();
                            }
                        }
                    }
                }
            }

            let temp = at!(iu, iu - 1);
            if temp.im != 0.0 {
                let rtemp = temp.norm();
                at!(iu, iu - 1) = C64::new(rtemp, 0.0);
                let temp = temp / rtemp;
                for c in iu + 1..=i2 {
                    at!(iu, c) *= temp.conj();
                }
                for r in i1..iu {
                    at!(r, iu) *= temp;
                }
                if let Some(z) = z.as_deref_mut() {
                    for r in 0..n {
                        z[r * n + iu] *= temp;
                    }
                }
            }
        }

        if !converged {
            let off = (l.max(1)..=iu)
                .map(|k| at!(k, k - 1).norm_sqr())
                .sum::<f64>()
                .sqrt();
            return Err(Error::NoConvergence {
                order: n,
                off_diagonal: off,
            });
        }
        w[iu] = at!(iu, iu);
        kdefl = 0;
        i = l as isize - 1;
    }
    Ok(w)
}

/// Eigenvalue of the trailing 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let u = b.sqrt() * c.sqrt();
    let s = cabs1(u);
    if s == 0.0 {
        return d;
    }
    let x = (a - d) * 0.5;
    let sx = cabs1(x);
    let s = s.max(sx);
    let mut y = s * ((x / s) * (x / s) + (u / s) * (u / s)).sqrt();
    if sx > 0.0 {
        let xs = x / sx;
        if xs.re * y.re + xs.im * y.im < 0.0 {
            y = -y;
        }
    }
    d - u * (u / (x + y))
}

/// Right eigenvectors from the Schur form `t` and Schur vectors `z`.
fn schur_eigenvectors(t: &ComplexMatrix, z: &ComplexMatrix, values: &[C64]) -> ComplexMatrix {
    let n = t.rows();
    let ulp = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ulp);
    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut x = vec![C64::zero(); n];
    for k in 0..n {
        let lambda = values[k];
        let smin = (ulp * cabs1(lambda)).max(smlnum);
        x[..=k].iter_mut().for_each(|v| *v = C64::zero());
        x[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let row = t.row(i);
            let mut s = C64::zero();
            for j in i + 1..=k {
                s += row[j] * x[j];
            }
            let mut d = row[i] - lambda;
            if cabs1(d) < smin {
                d = C64::new(smin, 0.0);
            }
            x[i] = -s / d;
        }
        let mut norm = 0.0;
        for r in 0..n {
            let zr = &z.row(r)[..=k];
            let mut acc = C64::zero();
            for (a, b) in zr.iter().zip(&x[..=k]) {
                acc += a * b;
            }
            vectors[(r, k)] = acc;
            norm += acc.norm_sqr();
        }
        let norm = norm.sqrt();
        if norm > 0.0 {
            for r in 0..n {
                vectors[(r, k)] /= norm;
            }
        }
    }
    vectors
}
