//! Pre-scaling and scaling functions on the dual space, with certified error
//! bounds, and the maximum metric between two marked surfaces.
//!
//! # Error bounds
//!
//! Let `w* = jₙ … j₀` and let `P` be the parent cylinder `I_{jₙ … j₁}`. Any deeper
//! value `S(… j_{n+1} w*)` is the ratio of the images of `I_{w*} ⊂ P` under a
//! further inverse-branch composition `h`, so it differs from `S(w*)` by the
//! ratio of the averages of `|h′|` over the two arcs. The oscillation of
//! `log|h′|` on `P` is at most `K·|P|` with
//!
//! ```text
//! K = M_log · Σ_{r≥1} 1/D_r ≤ M_log · (Σ_{r=1}^{J} 1/D_r) / (1 − 1/D_J),
//! ```
//!
//! `M_log` the largest `|(log|f′|)′|` and `D_r` the exact minimum of `|(f^r)′|`
//! over depth-r cylinders (the tail uses `D_{qJ+s} ≥ D_J^q D_s`). Hence
//! `|S(w*) − S(… w*)| ≤ S(w*)·(exp(K|P|) − 1)`, which is the per-word bound
//! reported, and `|P| ≤ A μⁿ` turns it into the uniform `C μⁿ`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bowen_series::{derivative_minima, MarkovSystem};
use crate::error::{Error, Result};
use crate::mobius::{Arc, CirclePoint, DiskMobius};
use crate::precision::Precision;
use crate::symbolic::{
    count_words, cylinder_length, fold_words, predecessors, random_dual_word, CylinderLengths, DualWord,
};

/// Relative slack added to every bound for floating-point error in the lengths.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// Safety factor on grid maxima of the second derivative.
pub const GRID_SAFETY: f64 = 1.05;

/// Dual words are enumerated exhaustively up to this many; beyond it a
/// stratified sample is used.
pub const EXHAUSTIVE_LIMIT: u128 = 60_000_000;

/// `|I_{w*}| / |I_{σ*w*}|` for a dual word of length at least two.
pub fn prescaling(system: &MarkovSystem, word: &DualWord, precision: Precision) -> Result<f64> {
    word.validate(system)?;
    if word.symbols.len() < 2 {
        return Err(Error::InvalidConfig("pre-scaling needs at least two symbols".into()));
    }
    let child = cylinder_length(system, &word.symbols, precision)?;
    let parent = cylinder_length(system, &word.symbols[..word.symbols.len() - 1], precision)?;
    Ok(child / parent)
}

/// Constants of the distortion argument for one Markov map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionConstants {
    /// `min |f′|` over the partition intervals.
    pub m: f64,
    /// `max |f″|` over the partition intervals, times [`GRID_SAFETY`].
    pub m_bound: f64,
    /// `max |(log|f′|)′|` over the partition intervals.
    pub m_log: f64,
    /// Exact minima `D_r` of `|(f^r)′|`, `r = 1, 2, …`.
    pub derivative_minima: Vec<f64>,
    /// `K` of the module documentation.
    pub k_tail: f64,
    /// Largest cylinder length `ν_n` for word lengths `n = 1, 2, …`; exact up
    /// to `exact_depth`, bounded through `D_r` beyond.
    pub nu: Vec<f64>,
    pub exact_depth: usize,
    /// `ν_n ≤ A μⁿ` for all `n ≥ 1`.
    pub a_len: f64,
    pub mu: f64,
    /// Distortion bound `exp(A M / (m (1 − μ)))`.
    pub b: f64,
    /// Smallest child-to-parent ratio at the first level.
    pub e_min: f64,
    /// Bounded-geometry constant `E / B`.
    pub c_geom: f64,
    /// Lipschitz constant: `|S(w*) − S(w̃*)| ≤ C μⁿ` when the rightmost `n + 1`
    /// symbols agree.
    pub c_lip: f64,
}

impl DistortionConstants {
    /// Per-word bound `S·(exp(K|P|) − 1)` plus rounding slack.
    pub fn word_bound(&self, value: f64, parent: f64) -> f64 {
        value * (self.k_tail * parent).exp_m1() + ROUNDING_SLACK * value
    }

    /// Uniform bound `C μⁿ` for dual words of length `n + 1`.
    pub fn uniform_bound(&self, n: usize) -> f64 {
        self.c_lip * self.mu.powi(n as i32) + ROUNDING_SLACK
    }

    /// `ν_n`, exact or bounded.
    pub fn nu_at(&self, n: usize) -> f64 {
        if n == 0 {
            return std::f64::consts::TAU;
        }
        if n <= self.nu.len() {
            return self.nu[n - 1];
        }
        self.a_len * self.mu.powi(n as i32)
    }
}

/// Extremes of `|(log|m′|)′|` and `|m″|` over an arc, evaluating on a grid and
/// at the interior critical points.
fn slope_extremes(m: &DiskMobius, arc: &Arc, grid: usize) -> (f64, f64) {
    let p = m.a.norm_sqr() + m.b.norm_sqr();
    let q = 2.0 * m.a.norm() * m.b.norm();
    let theta0 = (m.a.conj() * m.b).arg();
    let mut pts: Vec<CirclePoint> = arc.sample(grid).collect();
    if q > 0.0 {
        // (log|m′|)′ = q sin u / (p + q cos u) peaks at cos u = −q/p
        let u = (-q / p).acos();
        // m″ = q sin u / (p + q cos u)² peaks where q c² − p c − 2q = 0
        let c = (p - (p * p + 8.0 * q * q).sqrt()) / (2.0 * q);
        let v = c.clamp(-1.0, 1.0).acos();
        for a in [u, -u, v, -v] {
            let x = CirclePoint::new(theta0 + a);
            if arc.contains(x, 0.0) {
                pts.push(x);
            }
        }
    }
    pts.iter().fold((0.0f64, 0.0f64), |(l, s), &x| {
        (
            l.max(m.log_derivative_slope(x).abs()),
            s.max(m.second_derivative(x).abs()),
        )
    })
}

/// Largest cylinder length for each word length `1..=depth`.
pub fn max_cylinder_lengths(system: &MarkovSystem, depth: usize) -> Vec<f64> {
    (1..=depth)
        .map(|n| {
            fold_words(&[system], n, || 0.0f64, |acc, _, l| *acc = acc.max(l[0].length))
                .into_iter()
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Computes all constants. `exact_depth` word lengths are measured exactly;
/// the fit uses lengths `1..=fit_depth`.
pub fn distortion_constants_with(system: &MarkovSystem, exact_depth: usize, fit_depth: usize) -> Result<DistortionConstants> {
    let k = system.len();
    let mut m_log = 0.0f64;
    let mut m2 = 0.0f64;
    let mut m = f64::INFINITY;
    for j in 0..k {
        let arc = system.interval(j);
        let g = system.branch_map(j);
        let (l, s) = slope_extremes(g, &arc, 1024);
        m_log = m_log.max(l);
        m2 = m2.max(s);
        m = m.min(g.derivative_range_on_arc(&arc).0);
    }
    let m_bound = m2 * GRID_SAFETY;
    let minima = if system.expansion.minima.len() >= system.options.expansion_depth {
        system.expansion.minima.clone()
    } else {
        derivative_minima(system, system.options.expansion_depth)
    };
    let jj = minima
        .iter()
        .rposition(|&d| d > 1.0)
        .ok_or_else(|| Error::ExpansionFailure(format!("no iterate is expanding: {minima:?}")))?;
    let d_j = minima[jj];
    let head: f64 = minima[..=jj].iter().map(|d| d.recip()).sum();
    let k_tail = m_log * head / (1.0 - d_j.recip());

    let exact_depth = exact_depth.max(1);
    let mut nu = max_cylinder_lengths(system, exact_depth);
    // beyond the exact range, ν_n ≤ min_r ν_{n−r} / D_r
    for n in exact_depth + 1..=fit_depth.max(exact_depth) {
        let bound = (1..=minima.len().min(n - 1))
            .map(|r| nu[n - r - 1] / minima[r - 1])
            .fold(f64::INFINITY, f64::min);
        nu.push(bound);
    }
    // least squares on log ν_n, then enclose
    let pts: Vec<(f64, f64)> = nu.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v.ln())).collect();
    let np = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = if pts.len() > 1 {
        (np * sxy - sx * sy) / (np * sxx - sx * sx)
    } else {
        -0.1
    };
    // the tail recursion ν_n ≤ ν_{n−J}/D_J needs μ^J ≥ 1/D_J
    let floor = d_j.recip().powf(1.0 / (jj + 1) as f64);
    let mu = slope.exp().max(floor);
    if mu >= 1.0 {
        return Err(Error::ExpansionFailure(format!("cylinder decay rate μ = {mu} ≥ 1")));
    }
    let a_len = nu
        .iter()
        .enumerate()
        .map(|(i, &v)| v / mu.powi(i as i32 + 1))
        .fold(0.0, f64::max);
    let b = (a_len * m_bound / (m * (1.0 - mu))).exp();
    let e_min = fold_words(&[system], 2, || f64::INFINITY, |acc, _, l| {
        *acc = acc.min(l[0].length / l[0].parent)
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let c_lip = k_tail * a_len * (k_tail * a_len * mu).exp();
    Ok(DistortionConstants {
        m,
        m_bound,
        m_log,
        derivative_minima: minima,
        k_tail,
        nu,
        exact_depth,
        a_len,
        mu,
        b,
        e_min,
        c_geom: e_min / b,
        c_lip,
    })
}

/// Constants with the default depths (exact to 6, fit over 1..=8).
pub fn distortion_constants(system: &MarkovSystem) -> Result<DistortionConstants> {
    distortion_constants_with(system, 6, 8)
}

/// A certified value of the scaling function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    pub dual_word: DualWord,
    pub value: f64,
    /// `|S(w*) − value| ≤ error_bound` for every infinite extension to the left.
    pub error_bound: f64,
    /// The coarser `C μⁿ`.
    pub uniform_bound: f64,
}

impl ScalingSample {
    pub fn enclosure(&self) -> (f64, f64) {
        (self.value - self.error_bound, self.value + self.error_bound)
    }
}

/// Pre-scaling of the rightmost `n + 1` symbols of `tail`, with bounds.
pub fn scaling_estimate(
    system: &MarkovSystem,
    constants: &DistortionConstants,
    tail: &DualWord,
    n: usize,
    precision: Precision,
) -> Result<ScalingSample> {
    if n < 1 || tail.symbols.len() < n + 1 {
        return Err(Error::InvalidConfig(format!(
            "depth {n} needs a dual word of at least {} symbols",
            n + 1
        )));
    }
    let w = tail.tail(n);
    w.validate(system)?;
    let child = cylinder_length(system, &w.symbols, precision)?;
    let parent = cylinder_length(system, &w.symbols[..n], precision)?;
    let value = child / parent;
    Ok(ScalingSample {
        dual_word: w,
        value,
        error_bound: constants.word_bound(value, parent),
        uniform_bound: constants.uniform_bound(n),
    })
}

/// All pre-scaling values at dual-word length `n + 1`, with per-word bounds.
pub fn scaling_table(system: &MarkovSystem, constants: &DistortionConstants, n: usize) -> Vec<ScalingSample> {
    let uniform = constants.uniform_bound(n);
    fold_words(&[system], n + 1, Vec::new, |acc: &mut Vec<ScalingSample>, w, l| {
        let value = l[0].length / l[0].parent;
        acc.push(ScalingSample {
            dual_word: DualWord::new(w.to_vec()),
            value,
            error_bound: constants.word_bound(value, l[0].parent),
            uniform_bound: uniform,
        });
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Largest deviation from one of the child sums `Σ_j S(v j)` over all parents
/// `v` of length `1..=depth`.
pub fn partition_of_unity_residual(system: &MarkovSystem, depth: usize) -> f64 {
    let mut worst = 0.0f64;
    for n in 1..=depth {
        // children of a parent are consecutive in the walk order
        let per = fold_words(
            &[system],
            n + 1,
            || (0.0f64, Vec::<usize>::new(), 0.0f64),
            |acc, w, l| {
                let parent = &w[..w.len() - 1];
                if acc.1.as_slice() != parent {
                    if !acc.1.is_empty() {
                        acc.0 = acc.0.max((acc.2 - 1.0).abs());
                    }
                    acc.1 = parent.to_vec();
                    acc.2 = 0.0;
                }
                acc.2 += l[0].length / l[0].parent;
            },
        );
        for (r, _, sum) in per {
            worst = worst.max(r).max((sum - 1.0).abs());
        }
    }
    worst
}

/// Smallest child-to-parent ratio over word lengths `2..=depth`.
pub fn min_child_ratio(system: &MarkovSystem, depth: usize) -> f64 {
    (2..=depth)
        .map(|n| {
            fold_words(&[system], n, || f64::INFINITY, |acc, _, l| {
                *acc = acc.min(l[0].length / l[0].parent)
            })
            .into_iter()
            .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest ratio of extreme values of `|(fⁿ)′|` on a depth-n cylinder, over
/// word lengths `1..=depth`.
pub fn max_distortion_ratio(system: &MarkovSystem, depth: usize) -> f64 {
    let k = system.len();
    let inv: Vec<DiskMobius> = (0..k).map(|j| system.branch_map(j).inverse()).collect();
    let images: Vec<Arc> = (0..k).map(|j| system.image_arc(j)).collect();
    let mut worst = 1.0f64;
    for n in 1..=depth {
        let r = fold_words(&[system], n, || 1.0f64, |acc, w, _| {
            let h = w.iter().fold(DiskMobius::identity(), |a, &i| a.compose(&inv[i]));
            let (lo, hi) = h.derivative_range_on_arc(&images[*w.last().unwrap()]);
            *acc = acc.max(hi / lo);
        });
        worst = r.into_iter().fold(worst, f64::max);
    }
    worst
}

/// Result of comparing two scaling functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DmaxEstimate {
    /// Dual-word length minus one.
    pub depth: usize,
    pub lower: f64,
    pub upper: f64,
    /// Largest raw difference `|S_X − S_Y|` at this depth.
    pub raw_max: f64,
    pub argmax: DualWord,
    pub words: u128,
    /// True when only a stratified sample of the dual words was visited.
    pub sampled: bool,
}

#[derive(Clone)]
struct DmaxAcc {
    lower: f64,
    upper: f64,
    raw: f64,
    arg: Vec<usize>,
    words: u128,
}

impl DmaxAcc {
    fn new() -> Self {
        DmaxAcc {
            lower: 0.0,
            upper: 0.0,
            raw: 0.0,
            arg: Vec::new(),
            words: 0,
        }
    }

    fn push(&mut self, w: &[usize], l: &[CylinderLengths], cx: &DistortionConstants, cy: &DistortionConstants) {
        let sx = l[0].length / l[0].parent;
        let sy = l[1].length / l[1].parent;
        let diff = (sx - sy).abs();
        let slack = cx.word_bound(sx, l[0].parent) + cy.word_bound(sy, l[1].parent);
        self.words += 1;
        self.lower = self.lower.max(diff - slack);
        self.upper = self.upper.max(diff + slack);
        if diff > self.raw || self.arg.is_empty() {
            self.raw = diff;
            self.arg = w.to_vec();
        }
    }

    fn merge(mut self, o: DmaxAcc) -> DmaxAcc {
        self.lower = self.lower.max(o.lower);
        self.upper = self.upper.max(o.upper);
        self.words += o.words;
        if o.raw > self.raw {
            self.raw = o.raw;
            self.arg = o.arg;
        }
        self
    }
}

/// Bounds on `d_max(X, Y)` from all dual words of length `n + 1` (or a sample
/// when there are more than [`EXHAUSTIVE_LIMIT`]).
pub fn d_max_estimate(
    x: &MarkovSystem,
    y: &MarkovSystem,
    cx: &DistortionConstants,
    cy: &DistortionConstants,
    n: usize,
    seed: u64,
) -> Result<DmaxEstimate> {
    if x.image != y.image {
        return Err(Error::CombinatoricsMismatch);
    }
    let total = *count_words(x, n + 1).last().unwrap();
    let (acc, sampled) = if total <= EXHAUSTIVE_LIMIT {
        let per = fold_words(&[x, y], n + 1, DmaxAcc::new, |a, w, l| a.push(w, l, cx, cy));
        (per.into_iter().fold(DmaxAcc::new(), DmaxAcc::merge), false)
    } else {
        (sampled_dmax(x, y, cx, cy, n, seed)?, true)
    };
    Ok(DmaxEstimate {
        depth: n,
        lower: acc.lower.max(0.0),
        upper: acc.upper,
        raw_max: acc.raw,
        argmax: DualWord::new(acc.arg),
        words: acc.words,
        sampled,
    })
}

/// Every admissible word of length three extended by random admissible symbols
/// on the left until the requested length, several times each.
fn sampled_dmax(
    x: &MarkovSystem,
    y: &MarkovSystem,
    cx: &DistortionConstants,
    cy: &DistortionConstants,
    n: usize,
    seed: u64,
) -> Result<DmaxAcc> {
    use rand::Rng;
    let pred = predecessors(x);
    let cores: Vec<Vec<usize>> = fold_words(&[x], 3.min(n + 1), Vec::new, |acc: &mut Vec<Vec<usize>>, w, _| {
        acc.push(w.to_vec())
    })
    .into_iter()
    .flatten()
    .collect();
    let reps = (10_000 / cores.len()).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = DmaxAcc::new();
    for core in &cores {
        for _ in 0..reps {
            let mut w = core.clone();
            while w.len() < n + 1 {
                let p = &pred[w[0]];
                w.insert(0, p[rng.gen_range(0..p.len())]);
            }
            let lx = cylinder_pair(x, &w)?;
            let ly = cylinder_pair(y, &w)?;
            acc.push(&w, &[lx, ly], cx, cy);
        }
    }
    Ok(acc)
}

fn cylinder_pair(system: &MarkovSystem, w: &[usize]) -> Result<CylinderLengths> {
    Ok(CylinderLengths {
        length: cylinder_length(system, w, Precision::Double)?,
        parent: cylinder_length(system, &w[..w.len() - 1], Precision::Double)?,
    })
}

/// Outcome of the periodic-cycle identity for one cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleCheck {
    /// One period `c₀ … c_{p−1}` as symbols of the subshift.
    pub cycle: Vec<usize>,
    pub depth: usize,
    /// `Σ_r log S(window_r)`.
    pub sum: f64,
    /// `−log|(f^p)′|` at the periodic point, i.e. minus the translation length
    /// of the branch composition.
    pub target: f64,
    pub residual: f64,
    /// Certified bound `Σ_r K·|parent_r|`.
    pub bound: f64,
}

/// Compares the sum of `log S` around a periodic dual word with the
/// multiplier of the corresponding periodic orbit.
pub fn cycle_sum_check(
    system: &MarkovSystem,
    constants: &DistortionConstants,
    cycle: &[usize],
    depth: usize,
) -> Result<CycleCheck> {
    let p = cycle.len();
    if p == 0 {
        return Err(Error::EmptyWord);
    }
    for i in 0..p {
        if !system.allowed(cycle[i], cycle[(i + 1) % p]) {
            return Err(Error::Inadmissible(i));
        }
    }
    // x_t = c_{t mod p}; window r is x_{−r−depth} … x_{−r}
    let x = |t: i64| cycle[t.rem_euclid(p as i64) as usize];
    let mut sum = 0.0;
    let mut bound = 0.0;
    for r in 0..p as i64 {
        let w: Vec<usize> = (-r - depth as i64..=-r).map(x).collect();
        let child = cylinder_length(system, &w, Precision::Double)?;
        let parent = cylinder_length(system, &w[..w.len() - 1], Precision::Double)?;
        sum += (child / parent).ln();
        bound += constants.k_tail * parent + ROUNDING_SLACK;
    }
    // f^p near the periodic point applies the branches of c₀, c₁, … in turn
    let composed = cycle
        .iter()
        .fold(DiskMobius::identity(), |acc, &c| system.branch_map(c).compose(&acc));
    let target = -composed.translation_length()?;
    Ok(CycleCheck {
        cycle: cycle.to_vec(),
        depth,
        sum,
        target,
        residual: (sum - target).abs(),
        bound,
    })
}

/// All cycles of length `1..=max_period` up to rotation (smallest rotation
/// first).
pub fn periodic_cycles(system: &MarkovSystem, max_period: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for p in 1..=max_period {
        let words = fold_words(&[system], p, Vec::new, |acc: &mut Vec<Vec<usize>>, w, _| {
            if system.allowed(w[p - 1], w[0]) && (1..p).all(|r| w[r..].iter().chain(&w[..r]).cmp(w.iter()).is_ge()) {
                acc.push(w.to_vec());
            }
        });
        out.extend(words.into_iter().flatten());
    }
    out
}

/// Random dual tails of the given length, for convergence experiments.
pub fn random_tails(system: &MarkovSystem, count: usize, len: usize, seed: u64) -> Vec<DualWord> {
    let pred = predecessors(system);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_dual_word(system, &pred, len, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn g2() -> &'static (MarkovSystem, DistortionConstants) {
        static S: OnceLock<(MarkovSystem, DistortionConstants)> = OnceLock::new();
        S.get_or_init(|| {
            let s = MarkovSystem::standard(2).unwrap();
            let c = distortion_constants_with(&s, 4, 8).unwrap();
            (s, c)
        })
    }

    #[test]
    fn constants_are_sane() {
        let (_, c) = g2();
        assert!(c.m > 1.0);
        assert!(c.mu < 1.0 && c.mu > 0.0);
        for (i, &v) in c.nu.iter().enumerate() {
            assert!(v <= c.a_len * c.mu.powi(i as i32 + 1) * (1.0 + 1e-12));
        }
        assert!(c.b >= 1.0 && c.c_geom > 0.0);
    }

    #[test]
    fn distortion_bound_dominates_cylinders() {
        let (s, c) = g2();
        assert!(max_distortion_ratio(s, 3) <= c.b);
    }

    #[test]
    fn bounded_geometry() {
        let (s, c) = g2();
        assert!(min_child_ratio(s, 4) >= c.c_geom);
    }

    #[test]
    fn partition_of_unity_to_depth_three() {
        let (s, _) = g2();
        assert!(partition_of_unity_residual(s, 3) < 1e-10);
    }

    #[test]
    fn prescaling_in_unit_interval_and_reproducible() {
        let (s, c) = g2();
        for t in random_tails(s, 20, 4, 7) {
            let a = scaling_estimate(s, c, &t, 3, Precision::Double).unwrap();
            let b = scaling_estimate(s, c, &t, 3, Precision::Double).unwrap();
            assert!(a.value > 0.0 && a.value <= 1.0 + 1e-10);
            assert_eq!(a.value.to_bits(), b.value.to_bits());
            assert!(a.error_bound <= a.uniform_bound);
        }
    }

    #[test]
    fn deeper_values_stay_in_enclosures() {
        let (s, c) = g2();
        for t in random_tails(s, 20, 11, 9) {
            let deep = scaling_estimate(s, c, &t, 10, Precision::Double).unwrap().value;
            for n in 2..10 {
                let e = scaling_estimate(s, c, &t, n, Precision::Double).unwrap();
                let (lo, hi) = e.enclosure();
                assert!(lo <= deep && deep <= hi, "n={n}");
            }
        }
    }

    #[test]
    fn self_distance_is_zero() {
        let (s, c) = g2();
        let d = d_max_estimate(s, s, c, c, 2, 0).unwrap();
        assert_eq!(d.lower, 0.0);
        assert_eq!(d.raw_max, 0.0);
        assert!(d.upper <= 2.0 * c.uniform_bound(2));
    }

    #[test]
    fn period_one_cycles() {
        let (s, c) = g2();
        let cycles = periodic_cycles(s, 1);
        for cyc in cycles.iter().take(5) {
            let r = cycle_sum_check(s, c, cyc, 6).unwrap();
            assert!(r.residual <= r.bound, "{r:?}");
        }
    }

    #[test]
    fn cycle_enumeration_counts_traces() {
        let (s, _) = g2();
        // number of closed paths of length 2 is trace(A²); up to rotation the
        // non-constant ones pair up
        let a = s.matrix();
        let k = s.len();
        let tr1: usize = (0..k).filter(|&i| a[i][i] == 1).count();
        let tr2: usize = (0..k)
            .map(|i| (0..k).filter(|&j| a[i][j] == 1 && a[j][i] == 1).count())
            .sum();
        let c = periodic_cycles(s, 2);
        assert_eq!(c.iter().filter(|w| w.len() == 1).count(), tr1);
        assert_eq!(c.iter().filter(|w| w.len() == 2).count(), (tr2 - tr1) / 2 + tr1);
    }
}
