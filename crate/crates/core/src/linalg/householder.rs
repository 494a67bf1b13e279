use num_traits::{One, Zero};

use super::C64;

/// Elementary reflector `H = I - tau * w * w^H` with `w = (1, x')`.
///
/// On return `x` holds the tail `x'` of `w` and the function yields
/// `(beta, tau)` such that `H^H * (alpha, x) = (beta, 0)`. `beta` is always
/// real, which keeps subdiagonals produced by reductions real.
pub(crate) fn reflector(alpha: C64, x: &mut [C64]) -> (f64, C64) {
    let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if xnorm == 0.0 && alpha.im == 0.0 {
        return (alpha.re, C64::zero());
    }
    let beta = -alpha.re.hypot(alpha.im).hypot(xnorm).copysign(alpha.re);
    let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scale = C64::one() / (alpha - beta);
    for z in x.iter_mut() {
        *z *= scale;
    }
    (beta, tau)
}
