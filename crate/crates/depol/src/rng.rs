//! Deterministic random numbers for count simulation.
//!
//! Every stochastic operation in this crate takes an explicit 64-bit seed;
//! there is no hidden global generator. The generator is the ChaCha12 stream
//! cipher, whose integer output stream depends only on the seed, so
//! identical seeds reproduce identical counts on every run. Independent
//! tasks (sweep rows, tomography inputs) each get their own stream through
//! [`child_seed`], a SplitMix64 hash of (master seed, task index) — adding
//! or reordering tasks never perturbs the draws of another.
//!
//! Poisson sampling uses inversion by sequential search below mean 10 and
//! Hörmann's PTRS transformed rejection above it. Besides the portable
//! integer stream, the samplers touch only IEEE arithmetic and libm ln/exp,
//! so streams agree across platforms whose math libraries round those two
//! functions the same way (in practice, all common ones).

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// A seeded generator positioned at the start of its stream.
pub fn seeded(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Deterministic per-task seed derived from a master seed and a task index.
pub fn child_seed(master: u64, index: u64) -> u64 {
    // SplitMix64 finalizer over the combined word.
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One draw from a Poisson distribution with the given mean.
pub fn poisson<R: RngExt + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    assert!(mean.is_finite() && mean >= 0.0, "Poisson mean must be finite and >= 0");
    if mean == 0.0 {
        0
    } else if mean < 10.0 {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

/// Knuth-style inversion: count uniform factors until the product drops below
/// e^{-mean}. O(mean) draws, exact, safe for small means.
fn poisson_inversion<R: RngExt + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let threshold = (-mean).exp();
    let mut k = 0u64;
    let mut product = rng.random::<f64>();
    while product > threshold {
        k += 1;
        product *= rng.random::<f64>();
    }
    k
}

/// Hörmann's transformed rejection with squeeze (PTRS), valid for mean >= 10.
fn poisson_ptrs<R: RngExt + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v = rng.random::<f64>();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if (v * inv_alpha / (a / (us * us) + b)).ln()
            <= k * loglam - mean - ln_factorial(k as u64)
        {
            return k as u64;
        }
    }
}

/// ln(k!): exact table up to 20!, Stirling series beyond.
fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k <= 20 {
        let mut f = 1u64;
        for i in 2..=k {
            f *= i;
        }
        return (f as f64).ln();
    }
    // ln Γ(k+1) via the Stirling series at n = k+1.
    let n = (k + 1) as f64;
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    (n - 0.5) * n.ln() - n + 0.5 * ln2pi + 1.0 / (12.0 * n) - 1.0 / (360.0 * n.powi(3))
        + 1.0 / (1260.0 * n.powi(5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_always_zero() {
        let mut rng = seeded(5);
        for _ in 0..100 {
            assert_eq!(poisson(&mut rng, 0.0), 0);
        }
    }

    #[test]
    fn identical_seeds_identical_streams() {
        let draws = |seed| {
            let mut rng = seeded(seed);
            (0..50).map(|_| poisson(&mut rng, 123.4)).collect::<Vec<_>>()
        };
        assert_eq!(draws(42), draws(42));
        assert_ne!(draws(42), draws(43));
    }

    #[test]
    fn child_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for master in [0u64, 1, 99] {
            for idx in 0..100 {
                assert!(seen.insert(child_seed(master, idx)));
            }
        }
    }

    #[test]
    fn ln_factorial_consistent_across_table_boundary() {
        // Compare the Stirling branch against exact recursion at the seam.
        let exact_21 = ln_factorial(20) + 21f64.ln();
        assert!((ln_factorial(21) - exact_21).abs() < 1e-12);
        let exact_25: f64 = (2..=25u64).map(|i| (i as f64).ln()).sum();
        assert!((ln_factorial(25) - exact_25).abs() < 1e-11);
    }

    #[test]
    fn sample_moments_match_poisson() {
        // Both branches of the sampler: small mean (inversion), large (PTRS).
        for mean in [3.5, 250.0] {
            let mut rng = seeded(11);
            let n = 20_000;
            let samples: Vec<f64> = (0..n).map(|_| poisson(&mut rng, mean) as f64).collect();
            let avg = samples.iter().sum::<f64>() / n as f64;
            let var = samples.iter().map(|x| (x - avg).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((avg - mean).abs() < 4.0 * (mean / n as f64).sqrt(), "mean {avg} vs {mean}");
            assert!((var / mean - 1.0).abs() < 0.08, "variance {var} vs {mean}");
        }
    }
}
