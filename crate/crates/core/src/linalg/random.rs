use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{qr_decompose, ComplexMatrix, C64};

/// Seedable, platform-independent generator; one seed reproduces a run
/// bit for bit.
pub type RandomSource = ChaCha8Rng;

pub fn seeded(seed: u64) -> RandomSource {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entry field of a Ginibre draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// Entries `N(0, 1)`.
    Real,
    /// Independent `N(0, 1/2)` real and imaginary parts.
    Complex,
}

/// Matrix of i.i.d. standard Gaussian entries.
pub fn sample_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R, field: Field) -> ComplexMatrix {
    let len = rows * cols;
    let mut data = Vec::with_capacity(len);
    match field {
        Field::Real => {
            for _ in 0..len {
                data.push(C64::new(rng.sample(StandardNormal), 0.0));
            }
        }
        Field::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for _ in 0..len {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                data.push(C64::new(re * s, im * s));
            }
        }
    }
    ComplexMatrix::from_raw(rows, cols, data)
}

/// Haar-distributed unitary of the given order.
///
/// QR of a complex Ginibre matrix alone is not Haar; each column of `Q` is
/// rotated by the phase of the matching `R` diagonal entry so that the
/// factorization has a positive diagonal, which makes the law of `Q` exactly
/// Haar.
pub fn sample_haar_unitary<R: Rng + ?Sized>(order: usize, rng: &mut R) -> ComplexMatrix {
    assert!(order >= 1, "Haar unitary order must be at least 1");
    let g = sample_ginibre(order, order, rng, Field::Complex);
    let (mut q, r) = qr_decompose(&g).expect("square QR cannot fail");
    let phases: Vec<C64> = (0..order)
        .map(|j| {
            let d = r[(j, j)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    for i in 0..order {
        for (x, ph) in q.row_mut(i).iter_mut().zip(&phases) {
            *x *= ph;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigen_general, EigenConfig};

    #[test]
    fn ginibre_is_deterministic_per_seed() {
        let a = sample_ginibre(5, 7, &mut seeded(42), Field::Complex);
        let b = sample_ginibre(5, 7, &mut seeded(42), Field::Complex);
        assert_eq!(a, b);
        let c = sample_ginibre(5, 7, &mut seeded(43), Field::Complex);
        assert_ne!(a, c);
    }

    #[test]
    fn scalar_draw_moments() {
        let mut rng = seeded(7);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_ginibre(1, 1, &mut rng, Field::Real)[(0, 0)].re)
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");

        let zs: Vec<C64> = (0..n)
            .map(|_| sample_ginibre(1, 1, &mut rng, Field::Complex)[(0, 0)])
            .collect();
        let total = zs.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((total - 1.0).abs() < 0.03, "complex variance {total}");
    }

    #[test]
    fn real_rows_have_unit_variance() {
        // Each row variance has sd sqrt(2/1000) ~ 0.045, so 1 +- 0.15 is a
        // 3.3 sigma band: nearly every row, but not reliably all 800, fall
        // inside it. Nothing may sit outside the 5.5 sigma band.
        let g = sample_ginibre(800, 1000, &mut seeded(3), Field::Real);
        let mut inside = 0;
        for i in 0..g.rows() {
            let row = g.row(i);
            let mean = row.iter().map(|z| z.re).sum::<f64>() / 1000.0;
            let var = row.iter().map(|z| (z.re - mean).powi(2)).sum::<f64>() / 1000.0;
            assert!((var - 1.0).abs() < 0.25, "row {i} variance {var}");
            if (var - 1.0).abs() < 0.15 {
                inside += 1;
            }
            assert!(row.iter().all(|z| z.im == 0.0));
        }
        assert!(inside >= 796, "{inside} of 800 rows within 1 +- 0.15");
    }

    #[test]
    fn order_one_is_a_phase() {
        let u = sample_haar_unitary(1, &mut seeded(11));
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_is_unitary_with_unimodular_spectrum() {
        let u = sample_haar_unitary(200, &mut seeded(5));
        assert!(u.unitarity_defect() < 1e-10);
        let eig = eigen_general(&u, &EigenConfig::values_only()).unwrap();
        for z in &eig.values {
            assert!((z.norm() - 1.0).abs() < 1e-8, "|lambda| = {}", z.norm());
        }
    }

    #[test]
    fn haar_trace_second_moment() {
        // E|tr U|^2 = 1 for Haar U of any order >= 1.
        let mut rng = seeded(2024);
        let draws = 10;
        let m2 = (0..draws)
            .map(|_| sample_haar_unitary(400, &mut rng).trace().norm_sqr())
            .sum::<f64>()
            / draws as f64;
        assert!((m2 - 1.0).abs() <= 0.6, "mean |tr U|^2 = {m2}");
    }

    #[test]
    fn left_rotation_preserves_trace_moment_statistics() {
        // For a fixed unitary V, V U is again Haar; spot check E|tr(VU)|^2 = 1.
        let mut rng = seeded(99);
        let v = sample_haar_unitary(60, &mut seeded(1));
        let draws = 400;
        let mut plain = 0.0;
        let mut rotated = 0.0;
        for _ in 0..draws {
            let u = sample_haar_unitary(60, &mut rng);
            plain += u.trace().norm_sqr();
            rotated += v.matmul(&u).unwrap().trace().norm_sqr();
        }
        plain /= draws as f64;
        rotated /= draws as f64;
        assert!((plain - 1.0).abs() < 0.25, "{plain}");
        assert!((rotated - 1.0).abs() < 0.25, "{rotated}");
    }
}
