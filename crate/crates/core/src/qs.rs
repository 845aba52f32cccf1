//! Explicit quasisymmetric bounds: the deviation bound `ζ(M)` for maps of
//! `[0, 1]` with dyadic ratios in `[1/M, M]`, and the exponential bounds
//! `M(K)`, `λ(K)`.
//!
//! With `a = M/(M+1)` the increments satisfy
//! `χ_k = max{aᵏ − 2⁻ᵏ, 2⁻ᵏ − (1−a)ᵏ}` and `ζ(M) = sup_n Σ_{k≤n} χ_k`.
//! Summing the two geometric series gives
//!
//! ```text
//! δ_n = max{ M − 1 + 2⁻ⁿ − M aⁿ,  1 − 1/M + (1/M)(1/(M+1))ⁿ − 2⁻ⁿ }
//! ```
//!
//! which is what [`zeta_closed_form`] evaluates. [`zeta_closed_form_printed`]
//! keeps the variant with `(1/M)ⁿ` in place of `(1/(M+1))ⁿ`; it does not vanish
//! at `M = 1` and is reported only for comparison.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Series terms below this are dropped.
pub const SERIES_CUTOFF: f64 = 1e-15;

fn check_m(m: f64) -> Result<()> {
    if m.is_finite() && m >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidM(m))
    }
}

/// `χ_k`.
pub fn chi(m: f64, k: i32) -> f64 {
    let a = m / (m + 1.0);
    let h = 0.5f64.powi(k);
    (a.powi(k) - h).max(h - (1.0 - a).powi(k))
}

/// `ζ(M)` by direct summation of `χ_k` until the terms fall below
/// [`SERIES_CUTOFF`].
pub fn zeta(m: f64) -> Result<f64> {
    check_m(m)?;
    let mut sum = 0.0;
    let mut best = 0.0f64;
    let mut k = 1;
    loop {
        let c = chi(m, k);
        sum += c;
        best = best.max(sum);
        // each χ_k is at most aᵏ, so the tail is below a^{k+1}/(1−a)
        let a = m / (m + 1.0);
        if a.powi(k + 1) * (m + 1.0) < SERIES_CUTOFF || k > 100_000 {
            return Ok(best);
        }
        k += 1;
    }
}

fn closed_form(m: f64, second: impl Fn(f64, i32) -> f64) -> f64 {
    let a = m / (m + 1.0);
    let first = |n: i32| m - 1.0 + 0.5f64.powi(n) - m * a.powi(n);
    let mut best = (m - 1.0).max(1.0 - 1.0 / m);
    let mut n = 1;
    while n < 100_000 {
        best = best.max(first(n)).max(second(m, n));
        if a.powi(n) * m < SERIES_CUTOFF && 0.5f64.powi(n) < SERIES_CUTOFF {
            break;
        }
        n += 1;
    }
    best
}

/// `ζ(M)` from the summed geometric series, including the limit `n → ∞`.
pub fn zeta_closed_form(m: f64) -> Result<f64> {
    check_m(m)?;
    Ok(closed_form(m, |m, n| {
        1.0 - 1.0 / m + (1.0 / m) * (1.0 / (m + 1.0)).powi(n) - 0.5f64.powi(n)
    }))
}

/// The same expression with `(1/M)ⁿ` in the second branch.
pub fn zeta_closed_form_printed(m: f64) -> Result<f64> {
    check_m(m)?;
    Ok(closed_form(m, |m, n| 1.0 - 1.0 / m + (1.0 / m) * (1.0 / m).powi(n) - 0.5f64.powi(n)))
}

fn check_k(k: f64) -> Result<()> {
    if k.is_finite() && k >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidK(k))
    }
}

/// `M(K) = e^{10(K−1)}`.
pub fn m_of_k(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok((10.0 * (k - 1.0)).exp())
}

/// `λ(K) ≤ e^{5(K−1)}`.
pub fn lambda_bound(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok((5.0 * (k - 1.0)).exp())
}

/// Values of an increasing map of `[0, 1]` at the dyadics `i/2ⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicQsMap {
    pub depth: u32,
    pub values: Vec<f64>,
    pub ratio_bound: f64,
}

impl DyadicQsMap {
    pub fn identity(depth: u32) -> Self {
        let n = 1usize << depth;
        DyadicQsMap {
            depth,
            values: (0..=n).map(|i| i as f64 / n as f64).collect(),
            ratio_bound: 1.0,
        }
    }

    /// `max_i |H(i/2ⁿ) − i/2ⁿ|`.
    pub fn sup_deviation(&self) -> f64 {
        let n = self.values.len() - 1;
        self.values
            .iter()
            .enumerate()
            .map(|(i, h)| (h - i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Largest violation of the dyadic midpoint condition, 0 if none.
    pub fn ratio_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for level in 1..=self.depth {
            let step = 1usize << (self.depth - level);
            let mut l = 0;
            while l + 2 * step < self.values.len() {
                let (a, b, c) = (self.values[l], self.values[l + step], self.values[l + 2 * step]);
                let r = (b - a) / (c - b);
                let lo = 1.0 / self.ratio_bound;
                worst = worst.max(lo - r).max(r - self.ratio_bound);
                l += 2 * step;
            }
        }
        worst.max(0.0)
    }
}

/// How the midpoint fractions are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Uniform in `[1/(M+1), M/(M+1)]`.
    Uniform,
    /// One of the two endpoints, each with probability one half.
    Extremal,
}

/// A random map fixing 0 and 1 whose dyadic midpoint ratios lie in
/// `[1/M, M]`, built level by level.
pub fn sample_dyadic_qs(m: f64, depth: u32, seed: u64, sampling: Sampling) -> Result<DyadicQsMap> {
    check_m(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_with(m, depth, &mut rng, sampling))
}

fn sample_with<R: Rng>(m: f64, depth: u32, rng: &mut R, sampling: Sampling) -> DyadicQsMap {
    let n = 1usize << depth;
    let mut values = vec![0.0; n + 1];
    values[n] = 1.0;
    let lo = 1.0 / (m + 1.0);
    let hi = m / (m + 1.0);
    for level in 1..=depth {
        let step = n >> level;
        let mut l = 0;
        while l + 2 * step <= n {
            let f = if hi > lo {
                match sampling {
                    Sampling::Uniform => rng.gen_range(lo..=hi),
                    Sampling::Extremal => {
                        if rng.gen::<bool>() {
                            hi
                        } else {
                            lo
                        }
                    }
                }
            } else {
                0.5
            };
            values[l + step] = values[l] + f * (values[l + 2 * step] - values[l]);
            l += 2 * step;
        }
    }
    DyadicQsMap {
        depth,
        values,
        ratio_bound: m,
    }
}

/// Whether the sup deviation over the dyadics respects `ζ(M)`.
pub fn verify_sd_bound(map: &DyadicQsMap) -> Result<bool> {
    Ok(map.sup_deviation() <= zeta(map.ratio_bound)?)
}

/// Outcome of a batch of samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdReport {
    pub m: f64,
    pub zeta: f64,
    pub samples: usize,
    pub violations: usize,
    pub max_deviation: f64,
    /// `max_deviation / ζ(M)`.
    pub ratio: f64,
}

/// Samples `count` maps in parallel batches, each batch on its own stream.
pub fn sd_experiment(m: f64, depth: u32, count: usize, seed: u64, sampling: Sampling) -> Result<SdReport> {
    let z = zeta(m)?;
    const BATCH: usize = 256;
    let batches = count.div_ceil(BATCH);
    let per: Vec<(usize, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let todo = BATCH.min(count - b * BATCH);
            let mut bad = 0;
            let mut worst = 0.0f64;
            for _ in 0..todo {
                let d = sample_with(m, depth, &mut rng, sampling).sup_deviation();
                if d > z {
                    bad += 1;
                }
                worst = worst.max(d);
            }
            (bad, worst)
        })
        .collect();
    let violations = per.iter().map(|p| p.0).sum();
    let max_deviation = per.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(SdReport {
        m,
        zeta: z,
        samples: count,
        violations,
        max_deviation,
        ratio: if z > 0.0 { max_deviation / z } else { 0.0 },
    })
}
