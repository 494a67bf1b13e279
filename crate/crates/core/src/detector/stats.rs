use statrs::function::beta::beta_reg;

/// History spread below which the t-statistic is treated as degenerate.
pub const DEGENERATE_SIGMA: f64 = 1e-15;

/// Student-t CDF with `dof` degrees of freedom through the regularized
/// incomplete beta function.
pub fn t_cdf(x: f64, dof: usize) -> f64 {
    assert!(dof >= 1, "t distribution needs at least one degree of freedom");
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let v = dof as f64;
    let tail = 0.5 * beta_reg(v / 2.0, 0.5, v / (v + x * x));
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Two-sided coverage `F(x) - F(-x)` for `x >= 0`.
pub fn two_sided_confidence(eta_hat: f64, dof: usize) -> f64 {
    let x = eta_hat.abs();
    (t_cdf(x, dof) - t_cdf(-x, dof)).clamp(0.0, 1.0)
}

/// Standardizes the last value of `etas` against the whole history
/// (population mean and deviation) and returns `(eta_hat, confidence)` with
/// `len - 1` degrees of freedom. A flat history gives confidence 0 when the
/// current value sits on the mean and 1 otherwise.
pub fn eta_stat(etas: &[f64]) -> (f64, f64) {
    assert!(etas.len() >= 2, "eta history needs at least two values");
    let n = etas.len() as f64;
    let mean = etas.iter().sum::<f64>() / n;
    let sigma = (etas.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n).sqrt();
    let dev = (etas[etas.len() - 1] - mean).abs();
    if sigma < DEGENERATE_SIGMA {
        return if dev < DEGENERATE_SIGMA {
            (0.0, 0.0)
        } else {
            (f64::INFINITY, 1.0)
        };
    }
    let eta_hat = dev / sigma;
    (eta_hat, two_sided_confidence(eta_hat, etas.len() - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ln_gamma_half_integer(v: f64) -> f64 {
        statrs::function::gamma::ln_gamma(v)
    }

    /// `F(x) = 1/2 + integral_0^x density`, by composite Simpson.
    fn cdf_by_quadrature(x: f64, dof: usize) -> f64 {
        let v = dof as f64;
        let log_norm = ln_gamma_half_integer((v + 1.0) / 2.0) - ln_gamma_half_integer(v / 2.0) - 0.5 * (v * PI).ln();
        let density = |t: f64| (log_norm - (v + 1.0) / 2.0 * (1.0 + t * t / v).ln()).exp();
        let steps = 20_000;
        let h = x / steps as f64;
        let mut s = density(0.0) + density(x);
        for k in 1..steps {
            s += density(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        0.5 + s * h / 3.0
    }

    #[test]
    fn cauchy_closed_form() {
        assert!((t_cdf(1.0, 1) - 0.75).abs() < 1e-12);
        for &x in &[-3.0, -0.4, 0.0, 0.7, 5.0] {
            let want = 0.5 + f64::atan(x) / PI;
            assert!((t_cdf(x, 1) - want).abs() < 1e-12, "x={x}");
        }
        assert!((two_sided_confidence(1.0, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_dof_closed_form() {
        for &x in &[-2.0f64, 0.3, 1.0, 4.0] {
            let want = 0.5 + x / (2.0 * (2.0 + x * x).sqrt());
            assert!((t_cdf(x, 2) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_quadrature() {
        for &(x, dof) in &[(0.5, 3), (1.7, 7), (2.364, 100), (3.1, 30)] {
            assert!((t_cdf(x, dof) - cdf_by_quadrature(x, dof)).abs() < 1e-9, "x={x} dof={dof}");
        }
    }

    #[test]
    fn ninety_eight_percent_anchor() {
        assert!((t_cdf(2.364, 100) - 0.99).abs() < 5e-4);
        assert!((two_sided_confidence(2.364, 100) - 0.98).abs() < 1e-3);
        assert_eq!(t_cdf(0.0, 7), 0.5);
        assert_eq!(two_sided_confidence(0.0, 9), 0.0);
    }

    #[test]
    fn eta_stat_by_hand() {
        // mean 2, population sigma 1, last value 3 -> eta_hat 1 with 1 dof.
        let (h, c) = eta_stat(&[1.0, 3.0]);
        assert!((h - 1.0).abs() < 1e-15);
        assert!((c - 0.5).abs() < 1e-12);
        let (h, c) = eta_stat(&[2.0, 1.0, 3.0, 2.0]);
        assert_eq!((h, c), (0.0, 0.0));
    }

    #[test]
    fn degenerate_history() {
        assert_eq!(eta_stat(&[0.1, 0.1, 0.1]), (0.0, 0.0));
        let (h, c) = eta_stat(&[0.0; 3]);
        assert_eq!((h, c), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn cdf_symmetric_and_monotone(x in -50.0f64..50.0, dx in 0.0f64..5.0, dof in 1usize..200) {
            let f = t_cdf(x, dof);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((f + t_cdf(-x, dof) - 1.0).abs() < 1e-12);
            prop_assert!(t_cdf(x + dx, dof) >= f - 1e-15);
        }

        #[test]
        fn confidence_nondecreasing_in_eta_hat(a in 0.0f64..20.0, b in 0.0f64..20.0, dof in 2usize..150) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(two_sided_confidence(lo, dof) <= two_sided_confidence(hi, dof) + 1e-15);
        }
    }
}
