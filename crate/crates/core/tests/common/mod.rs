#![allow(dead_code)]

use std::sync::Arc;

use nlhelm::fields::{Domain, Field};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `C⁹` bump `(1 − t²)¹⁰` on `[a, b]`, equal to 1 at the midpoint.
pub fn bump(r: f64, a: f64, b: f64) -> f64 {
    if r <= a || r >= b {
        return 0.0;
    }
    let t = (2.0 * r - a - b) / (b - a);
    (1.0 - t * t).powi(10)
}

/// Compactly supported sources with random angular content on degrees `≤ max_l`.
pub fn source_corpus(domain: &Arc<Domain>, count: usize, max_l: usize, seed: u64) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = domain.modes();
    (0..count)
        .map(|_| {
            let a = rng.gen_range(1.5..4.0);
            let b = a + rng.gen_range(3.0..10.0);
            let k = rng.gen_range(0.0..2.0);
            let coeffs: Vec<Complex64> = (0..domain.mode_count())
                .map(|idx| {
                    if modes.degree(idx) <= max_l {
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            Field::from_profiles(domain, |r, idx| coeffs[idx] * bump(r, a, b) * (k * r).cos())
        })
        .collect()
}

/// Largest relative change of `r^{(n−1)/2} e^{∓iλr} u` over the outer tenth of
/// the grid, measured across all modes at once.
pub fn asymptotic_variation(u: &Field, sign: f64) -> f64 {
    let d = u.domain();
    let nm = d.mode_count();
    let r = d.nodes();
    let n = r.len();
    let start = d.grid().index_at_or_above(0.9 * d.grid().r_max());
    let half = (d.dim() as f64 - 1.0) / 2.0;
    let profile = |i: usize| -> Vec<Complex64> {
        let f = Complex64::from_polar(r[i].powf(half), -sign * d.lambda() * r[i]);
        u.modes()[i * nm..(i + 1) * nm]
            .iter()
            .map(|c| c * f)
            .collect()
    };
    let end = profile(n - 1);
    let scale = end.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    (start..n)
        .map(|i| {
            let p = profile(i);
            p.iter()
                .zip(&end)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / scale
        })
        .fold(0.0, f64::max)
}

/// Band-limited incoming data with random coefficients on degrees `≤ max_l`.
pub fn random_spectrum(
    dim: usize,
    big_l: usize,
    max_l: usize,
    seed: u64,
) -> nlhelm::angular::AngularSpectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = nlhelm::angular::AngularSpectrum::zeros(dim, big_l).unwrap();
    let modes = f.modes;
    for idx in 0..modes.count() {
        if modes.degree(idx) <= max_l {
            f.coeffs[idx] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    f
}

/// Smooth compactly supported field with random angular content, scaled so
/// its largest value is `size`.
pub fn random_perturbation(domain: &Arc<Domain>, size: f64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = rng.gen_range(1.5..5.0);
    let b = a + rng.gen_range(5.0..30.0);
    let coeffs: Vec<Complex64> = (0..domain.mode_count())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let raw = Field::from_profiles(domain, |r, idx| coeffs[idx] * bump(r, a, b));
    let peak = raw.max_abs();
    raw.scale(Complex64::new(size / peak, 0.0))
}
