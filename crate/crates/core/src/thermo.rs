//! Pressure, Gibbs measures and variance for locally constant potentials on
//! the subshift, and the pressure metric of a deformation path.
//!
//! A potential of length `L` takes one value per admissible word of length
//! `L`. The transfer matrix has an edge `u → v` whenever `v` extends the last
//! `L − 1` symbols of `u`, weighted by `exp(φ(v))`.
//!
//! Words are stored in a trie whose levels are in walk order (first symbol,
//! then successors in cyclic order), which is the order of
//! [`fold_words`](crate::symbolic::fold_words). The successors of a word are
//! then one contiguous block of ids, so each matrix-vector product is a
//! prefix sum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bowen_series::{conjugated_system, MarkovSystem};
use crate::error::{Error, Result};
use crate::fuchsian::twist_deform;
use crate::symbolic::fold_words;

/// Relative tolerance of the power iteration.
pub const POWER_TOL: f64 = 1e-13;
pub const MAX_ITERATIONS: usize = 20_000;
/// Iterations without halving the residual after which it counts as converged.
const STALL: usize = 30;
/// Default step of the second-difference variance.
pub const VARIANCE_STEP: f64 = 1e-3;
/// Default step of the path derivative.
pub const PATH_STEP: f64 = 1e-2;

/// Area of a closed hyperbolic surface of genus `g`.
pub fn area(genus: usize) -> f64 {
    4.0 * std::f64::consts::PI * (genus as f64 - 1.0)
}

/// Transition structure in which every row is a cyclic block of symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transitions {
    /// `(first successor, number of successors)` per symbol.
    pub blocks: Vec<(usize, usize)>,
}

impl Transitions {
    pub fn of_system(system: &MarkovSystem) -> Self {
        Transitions {
            blocks: (0..system.len()).map(|i| (system.image[i].0, system.out_degree(i))).collect(),
        }
    }

    pub fn full_shift(k: usize) -> Self {
        Transitions { blocks: vec![(0, k); k] }
    }

    pub fn symbols(&self) -> usize {
        self.blocks.len()
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let k = self.symbols();
        let (a, n) = self.blocks[i];
        (0..n).map(move |o| (a + o) % k)
    }

    fn position(&self, i: usize, j: usize) -> usize {
        let k = self.symbols();
        (j + k - self.blocks[i].0) % k
    }

    /// Strong connectivity of the symbol graph.
    pub fn is_irreducible(&self) -> bool {
        let k = self.symbols();
        let reach = |fwd: bool| {
            let mut seen = vec![false; k];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..k {
                    let edge = if fwd {
                        self.successors(i).any(|s| s == j)
                    } else {
                        self.successors(j).any(|s| s == i)
                    };
                    if edge && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.iter().all(|&b| b)
        };
        k > 0 && reach(true) && reach(false)
    }

    /// Largest eigenvalue of the 0-1 matrix, by power iteration.
    pub fn spectral_radius(&self) -> f64 {
        let k = self.symbols();
        let mut x = vec![1.0; k];
        let mut rho = 0.0;
        for _ in 0..MAX_ITERATIONS {
            let y: Vec<f64> = (0..k).map(|i| self.successors(i).map(|j| x[j]).sum()).collect();
            let r = y.iter().sum::<f64>() / x.iter().sum::<f64>();
            let m = y.iter().cloned().fold(0.0, f64::max);
            x = y.iter().map(|v| v / m).collect();
            if (r - rho).abs() <= POWER_TOL * r {
                return r;
            }
            rho = r;
        }
        rho
    }
}

#[derive(Clone, Debug, Default)]
struct Level {
    parent: Vec<u32>,
    last: Vec<u32>,
    suffix: Vec<u32>,
    /// `child_start[i]..child_start[i + 1]` are the children at the next level.
    child_start: Vec<u32>,
}

/// All admissible words of lengths `1..=len`, level by level.
#[derive(Clone, Debug)]
pub struct WordTable {
    pub transitions: Transitions,
    pub len: usize,
    levels: Vec<Level>,
}

impl WordTable {
    pub fn new(transitions: Transitions, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidConfig("word length must be at least 1".into()));
        }
        if !transitions.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let k = transitions.symbols();
        let mut levels = vec![Level {
            parent: vec![0],
            last: vec![0],
            suffix: vec![0],
            child_start: vec![0, k as u32],
        }];
        let first = Level {
            parent: vec![0; k],
            last: (0..k as u32).collect(),
            suffix: vec![0; k],
            child_start: Vec::new(),
        };
        levels.push(first);
        for l in 2..=len {
            let prev = &levels[l - 1];
            let n = prev.last.len();
            let mut next = Level::default();
            let mut starts = Vec::with_capacity(n + 1);
            for p in 0..n {
                starts.push(next.last.len() as u32);
                let lp = prev.last[p] as usize;
                for s in transitions.successors(lp) {
                    next.parent.push(p as u32);
                    next.last.push(s as u32);
                    let suf = if l == 2 {
                        s as u32
                    } else {
                        let sp = prev.suffix[p] as usize;
                        levels[l - 2].child_start[sp] + transitions.position(lp, s) as u32
                    };
                    next.suffix.push(suf);
                }
            }
            starts.push(next.last.len() as u32);
            levels[l - 1].child_start = starts;
            levels.push(next);
        }
        Ok(WordTable { transitions, len, levels })
    }

    pub fn of_system(system: &MarkovSystem, len: usize) -> Result<Self> {
        WordTable::new(Transitions::of_system(system), len)
    }

    /// Number of words of length `l`.
    pub fn count(&self, l: usize) -> usize {
        self.levels[l].last.len()
    }

    pub fn states(&self) -> usize {
        self.count(self.len)
    }

    /// Symbols of word `id` at length `l`.
    pub fn word_at(&self, l: usize, mut id: usize) -> Vec<usize> {
        let mut w = vec![0; l];
        for lev in (1..=l).rev() {
            w[lev - 1] = self.levels[lev].last[id] as usize;
            id = self.levels[lev].parent[id] as usize;
        }
        w
    }

    pub fn word(&self, id: usize) -> Vec<usize> {
        self.word_at(self.len, id)
    }

    /// Id of the word dropping the last symbol.
    pub fn prefix_id(&self, id: usize) -> usize {
        self.levels[self.len].parent[id] as usize
    }

    /// Id of the word dropping the first symbol.
    pub fn suffix_id(&self, id: usize) -> usize {
        self.levels[self.len].suffix[id] as usize
    }

    /// Successor block `(start, count)` of a state; may wrap when `len = 1`.
    pub fn successor_range(&self, id: usize) -> (usize, usize) {
        let top = &self.levels[self.len];
        let last = top.last[id] as usize;
        let count = self.transitions.blocks[last].1;
        if self.len == 1 {
            return (self.transitions.blocks[last].0, count);
        }
        let s = top.suffix[id] as usize;
        (self.levels[self.len - 1].child_start[s] as usize, count)
    }

    /// Finds a word, or `None` if it is not admissible.
    pub fn id_of(&self, word: &[usize]) -> Option<usize> {
        if word.len() != self.len {
            return None;
        }
        let mut id = *word.first()?;
        if id >= self.transitions.symbols() {
            return None;
        }
        for l in 1..word.len() {
            let last = self.levels[l].last[id] as usize;
            if !self.transitions.successors(last).any(|s| s == word[l]) {
                return None;
            }
            id = self.levels[l].child_start[id] as usize + self.transitions.position(last, word[l]);
        }
        Some(id)
    }
}

/// A locally constant potential: one value per word of length `len`, in table
/// order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub len: usize,
    pub values: Vec<f64>,
}

impl Potential {
    pub fn constant(table: &WordTable, c: f64) -> Self {
        Potential {
            len: table.len,
            values: vec![c; table.states()],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + t·other`.
    pub fn add_scaled(&self, other: &Potential, t: f64) -> Result<Potential> {
        if self.len != other.len {
            return Err(Error::DepthMismatch(self.len, other.len));
        }
        Ok(Potential {
            len: self.len,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + t * b).collect(),
        })
    }

    pub fn shifted(&self, c: f64) -> Potential {
        Potential {
            len: self.len,
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// `u∘σ − u` for a potential `u` on words one shorter, as a potential on
    /// the table's words.
    pub fn coboundary(table: &WordTable, u: &[f64]) -> Result<Potential> {
        if table.len < 2 || u.len() != table.count(table.len - 1) {
            return Err(Error::DepthMismatch(table.len, table.len));
        }
        Ok(Potential {
            len: table.len,
            values: (0..table.states())
                .map(|i| u[table.suffix_id(i)] - u[table.prefix_id(i)])
                .collect(),
        })
    }

    pub fn random(table: &WordTable, seed: u64) -> Potential {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Potential {
            len: table.len,
            values: (0..table.states()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }
    }
}

/// `log S` on all words of length `table.len ≥ 2`.
pub fn potential_from_scaling(system: &MarkovSystem, table: &WordTable) -> Result<Potential> {
    if table.len < 2 {
        return Err(Error::InvalidConfig("scaling potentials need words of length ≥ 2".into()));
    }
    if table.transitions != Transitions::of_system(system) {
        return Err(Error::CombinatoricsMismatch);
    }
    let values: Vec<f64> = fold_words(&[system], table.len, Vec::new, |acc: &mut Vec<f64>, _, l| {
        acc.push((l[0].length / l[0].parent).ln())
    })
    .into_iter()
    .flatten()
    .collect();
    debug_assert_eq!(values.len(), table.states());
    Ok(Potential { len: table.len, values })
}

/// Result of the power iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureResult {
    pub pressure: f64,
    /// `‖M r − ρ r‖∞ / (ρ ‖r‖∞)` at exit.
    pub residual: f64,
    pub iterations: usize,
}

fn check_len(table: &WordTable, phi: &Potential) -> Result<()> {
    if phi.len != table.len || phi.values.len() != table.states() {
        return Err(Error::DepthMismatch(phi.len, table.len));
    }
    Ok(())
}

/// Weights `exp(φ − max φ)`, with the shift returned.
fn weights(phi: &Potential) -> (Vec<f64>, f64) {
    let top = phi.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (phi.values.iter().map(|v| (v - top).exp()).collect(), top)
}

/// `(M r)(u) = Σ_{u → v} w(v) r(v)`.
fn right_step(table: &WordTable, w: &[f64], r: &[f64]) -> Vec<f64> {
    let n = r.len();
    if table.len == 1 {
        return (0..n)
            .into_par_iter()
            .map(|i| table.transitions.successors(i).map(|j| w[j] * r[j]).sum())
            .collect();
    }
    // the successors of u are the children of suffix(u)
    let below = &table.levels[table.len - 1];
    let t: Vec<f64> = (0..below.last.len())
        .into_par_iter()
        .map(|x| {
            let (lo, hi) = (below.child_start[x] as usize, below.child_start[x + 1] as usize);
            (lo..hi).map(|v| w[v] * r[v]).sum()
        })
        .collect();
    let top = &table.levels[table.len];
    top.suffix.par_iter().map(|&x| t[x as usize]).collect()
}

/// `(l M)(v) = w(v) Σ_{u → v} l(u)`.
fn left_step(table: &WordTable, w: &[f64], l: &[f64]) -> Vec<f64> {
    let n = l.len();
    if table.len == 1 {
        let mut y = vec![0.0; n];
        for (i, &x) in l.iter().enumerate() {
            for j in table.transitions.successors(i) {
                y[j] += x;
            }
        }
        return y.iter().zip(w).map(|(a, b)| a * b).collect();
    }
    // u → v exactly when suffix(u) = prefix(v)
    let top = &table.levels[table.len];
    let mut s = vec![0.0; table.count(table.len - 1)];
    for (u, &x) in l.iter().enumerate() {
        s[top.suffix[u] as usize] += x;
    }
    top.parent.par_iter().zip(w).map(|(&p, &wv)| wv * s[p as usize]).collect()
}

fn power<F: Fn(&[f64]) -> Vec<f64>>(step: F, n: usize) -> (f64, Vec<f64>, f64, usize) {
    let mut x = vec![1.0; n];
    let mut rho = 0.0;
    // stop at the tolerance, or once the residual has stopped improving
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for it in 1..=MAX_ITERATIONS {
        let y = step(&x);
        let m = y.iter().cloned().fold(0.0, f64::max);
        let r = y.iter().sum::<f64>() / x.iter().sum::<f64>();
        let res = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - r * b).abs())
            .fold(0.0, f64::max)
            / (r * x.iter().cloned().fold(0.0, f64::max));
        x = y.into_iter().map(|v| v / m).collect();
        if res < 0.5 * best {
            best = res;
            since_best = 0;
        } else {
            since_best += 1;
        }
        let settled = (r - rho).abs() <= POWER_TOL * r;
        if settled && (res <= POWER_TOL || since_best >= STALL) || it == MAX_ITERATIONS {
            return (r, x, res, it);
        }
        rho = r;
    }
    unreachable!()
}

/// `log` of the spectral radius of the weighted transfer matrix.
pub fn pressure(table: &WordTable, phi: &Potential) -> Result<PressureResult> {
    check_len(table, phi)?;
    let (w, top) = weights(phi);
    let (rho, _, residual, iterations) = power(|r| right_step(table, &w, r), table.states());
    Ok(PressureResult {
        pressure: rho.ln() + top,
        residual,
        iterations,
    })
}

/// Perron data and the Gibbs measure on words of length `len`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsApprox {
    pub pressure: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub measure: Vec<f64>,
    pub residual: f64,
}

pub fn gibbs(table: &WordTable, phi: &Potential) -> Result<GibbsApprox> {
    check_len(table, phi)?;
    let (w, top) = weights(phi);
    let n = table.states();
    let (rho, right, res_r, _) = power(|r| right_step(table, &w, r), n);
    let (_, left, res_l, _) = power(|l| left_step(table, &w, l), n);
    let mut measure: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a * b).collect();
    let total: f64 = measure.iter().sum();
    measure.iter_mut().for_each(|m| *m /= total);
    Ok(GibbsApprox {
        pressure: rho.ln() + top,
        left,
        right,
        measure,
        residual: res_r.max(res_l),
    })
}

impl GibbsApprox {
    /// Masses of the words of length `l ≤ len`, each the sum over its
    /// extensions.
    pub fn marginal(&self, table: &WordTable, l: usize) -> Vec<f64> {
        let mut m = self.measure.clone();
        for lev in (l + 1..=table.len).rev() {
            let mut up = vec![0.0; table.count(lev - 1)];
            for (i, &x) in m.iter().enumerate() {
                up[table.levels[lev].parent[i] as usize] += x;
            }
            m = up;
        }
        m
    }

    /// Largest difference between the masses of a word of length `len − 1`
    /// seen as a prefix and seen as a suffix.
    pub fn shift_invariance_residual(&self, table: &WordTable) -> f64 {
        let pre = self.marginal(table, table.len - 1);
        let mut suf = vec![0.0; pre.len()];
        for (i, &x) in self.measure.iter().enumerate() {
            suf[table.suffix_id(i)] += x;
        }
        pre.iter().zip(&suf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

pub fn mean(psi: &Potential, g: &GibbsApprox) -> Result<f64> {
    if psi.values.len() != g.measure.len() {
        return Err(Error::DepthMismatch(psi.values.len(), g.measure.len()));
    }
    Ok(psi.values.iter().zip(&g.measure).map(|(a, b)| a * b).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    /// Second difference of the pressure with step `h`.
    SecondDifference { h: f64 },
    /// Sums along sampled orbit segments of the Gibbs chain.
    Birkhoff { segments: usize, length: usize, seed: u64 },
}

impl Default for VarianceMethod {
    fn default() -> Self {
        VarianceMethod::SecondDifference { h: VARIANCE_STEP }
    }
}

/// Variance of `ψ` for the Gibbs measure of `φ`.
pub fn variance(table: &WordTable, phi: &Potential, psi: &Potential, method: VarianceMethod) -> Result<f64> {
    check_len(table, psi)?;
    let g = gibbs(table, phi)?;
    let m = mean(psi, &g)?;
    let centred = psi.shifted(-m);
    match method {
        VarianceMethod::SecondDifference { h } => {
            let p = |t: f64| -> Result<f64> { Ok(pressure(table, &phi.add_scaled(&centred, t)?)?.pressure) };
            Ok((p(h)? - 2.0 * g.pressure + p(-h)?) / (h * h))
        }
        VarianceMethod::Birkhoff { segments, length, seed } => Ok(birkhoff(table, phi, &g, &centred, segments, length, seed)),
    }
}

const CHUNK: usize = 1000;

fn birkhoff(
    table: &WordTable,
    phi: &Potential,
    g: &GibbsApprox,
    psi: &Potential,
    segments: usize,
    length: usize,
    seed: u64,
) -> f64 {
    let n = table.states();
    let (w, _) = weights(phi);
    let q: Vec<f64> = w.iter().zip(&g.right).map(|(a, b)| a * b).collect();
    let mut pi = Vec::with_capacity(n);
    let mut mass = 0.0;
    for &m in &g.measure {
        mass += m;
        pi.push(mass);
    }
    let succ = |u: usize| -> Vec<usize> {
        let (st, ct) = table.successor_range(u);
        (0..ct).map(|o| (st + o) % n).collect()
    };
    let step = |u: usize, x: f64| -> usize {
        let next = succ(u);
        let total: f64 = next.iter().map(|&v| q[v]).sum();
        let mut target = x * total;
        for &v in &next {
            if target < q[v] {
                return v;
            }
            target -= q[v];
        }
        *next.last().unwrap()
    };
    let chunks = segments.div_ceil(CHUNK);
    let sums: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let todo = CHUNK.min(segments - c * CHUNK);
            let mut acc = 0.0;
            for _ in 0..todo {
                let x: f64 = rng.gen::<f64>() * mass;
                let mut u = pi.partition_point(|&c| c <= x).min(n - 1);
                let mut s = psi.values[u];
                for _ in 1..length {
                    u = step(u, rng.gen());
                    s += psi.values[u];
                }
                acc += s * s;
            }
            acc
        })
        .collect();
    sums.iter().sum::<f64>() / (segments as f64 * length as f64)
}

/// `P(φ + tψ̃) − P(φ) − t²σ²/2` for each `t`, and the fitted power of `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub ts: Vec<f64>,
    pub residuals: Vec<f64>,
    pub variance: f64,
    pub order: f64,
}

pub fn expansion_check(table: &WordTable, phi: &Potential, psi: &Potential, ts: &[f64]) -> Result<ExpansionCheck> {
    let g = gibbs(table, phi)?;
    let m = mean(psi, &g)?;
    let centred = psi.shifted(-m);
    let var = variance(table, phi, psi, VarianceMethod::default())?;
    let residuals = ts
        .iter()
        .map(|&t| {
            let p = pressure(table, &phi.add_scaled(&centred, t)?)?.pressure;
            Ok(p - g.pressure - 0.5 * t * t * var)
        })
        .collect::<Result<Vec<f64>>>()?;
    let pts: Vec<(f64, f64)> = ts.iter().zip(&residuals).map(|(t, r)| (t.abs().ln(), r.abs().ln())).collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Ok(ExpansionCheck {
        ts: ts.to_vec(),
        residuals,
        variance: var,
        order: (n * sxy - sx * sy) / (n * sxx - sx * sx),
    })
}

/// `|P(log S)|` for each word length.
pub fn check_zero_pressure(system: &MarkovSystem, lens: &[usize]) -> Result<Vec<(usize, f64)>> {
    lens.iter()
        .map(|&l| {
            let table = WordTable::of_system(system, l)?;
            let phi = potential_from_scaling(system, &table)?;
            Ok((l, pressure(&table, &phi)?.pressure.abs()))
        })
        .collect()
}

/// Pressure-metric data of a path `t ↦ X_t` at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureMetric {
    pub len: usize,
    pub delta: f64,
    pub value: f64,
    pub variance: f64,
    /// `−∫ log S₀ dm₀`.
    pub denominator: f64,
    /// `|∫ ψ dm₀|`.
    pub mean_residual: f64,
    pub psi_norm: f64,
    pub pressure: f64,
}

/// `Var(ψ) / (−∫ log S₀ dm₀)` with `ψ` the central difference of `log S`
/// between `minus` and `plus` at step `delta`.
pub fn pressure_metric(
    table: &WordTable,
    base: &MarkovSystem,
    minus: &MarkovSystem,
    plus: &MarkovSystem,
    delta: f64,
) -> Result<PressureMetric> {
    if minus.image != base.image || plus.image != base.image {
        return Err(Error::CombinatoricsMismatch);
    }
    let phi = potential_from_scaling(base, table)?;
    let lp = potential_from_scaling(plus, table)?;
    let lm = potential_from_scaling(minus, table)?;
    let psi = Potential {
        len: table.len,
        values: lp.values.iter().zip(&lm.values).map(|(a, b)| (a - b) / (2.0 * delta)).collect(),
    };
    let g = gibbs(table, &phi)?;
    let m = mean(&psi, &g)?;
    let denominator = -mean(&phi, &g)?;
    let var = variance(table, &phi, &psi, VarianceMethod::default())?;
    Ok(PressureMetric {
        len: table.len,
        delta,
        value: var / denominator,
        variance: var,
        denominator,
        mean_residual: m.abs(),
        psi_norm: psi.sup_norm(),
        pressure: g.pressure,
    })
}

/// Pressure metric along the twist about `a_handle` at `t = 0`.
pub fn twist_pressure_metric(system: &MarkovSystem, handle: usize, len: usize, delta: f64) -> Result<PressureMetric> {
    let table = WordTable::of_system(system, len)?;
    let (_, mp) = twist_deform(&system.rep, handle, delta)?;
    let (_, mm) = twist_deform(&system.rep, handle, -delta)?;
    let plus = conjugated_system(system, &mp)?;
    let minus = conjugated_system(system, &mm)?;
    pressure_metric(&table, system, &minus, &plus, delta)
}
