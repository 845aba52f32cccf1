//! Words of the subshift of finite type, their cylinder arcs, and the
//! preperiodic codes of partition points.
//!
//! A [`Word`] `i₀ i₁ … iₙ` is read left to right and is admissible when
//! `a_{i_l i_{l+1}} = 1`. A [`DualWord`] stores the same symbols in the same
//! written order but is read as `jₙ … j₁ j₀` with `j₀ = iₙ`; its shift drops
//! the rightmost symbol. Both denote the cylinder
//! `I_w = g_{i₀} ∘ … ∘ g_{i_{n−1}}(I_{iₙ})`, `g_i` the inverse of the branch on
//! `I_i`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bowen_series::MarkovSystem;
use crate::error::{Error, Result};
use crate::fuchsian::Marking;
use crate::mobius::{Arc, CirclePoint, DiskMobius, TAU};
use crate::precision::{composed_image_length, Precision};

fn check_symbols(system: &MarkovSystem, symbols: &[usize]) -> Result<()> {
    if symbols.is_empty() {
        return Err(Error::EmptyWord);
    }
    let k = system.len();
    if let Some(&s) = symbols.iter().find(|&&s| s >= k) {
        return Err(Error::SymbolOutOfRange { symbol: s, size: k });
    }
    if let Some(p) = symbols.windows(2).position(|w| !system.allowed(w[0], w[1])) {
        return Err(Error::Inadmissible(p));
    }
    Ok(())
}

/// True when consecutive symbols are allowed transitions.
pub fn is_admissible(system: &MarkovSystem, symbols: &[usize]) -> bool {
    check_symbols(system, symbols).is_ok()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    pub symbols: Vec<usize>,
}

impl Word {
    pub fn new(symbols: Vec<usize>) -> Self {
        Word { symbols }
    }

    pub fn validate(&self, system: &MarkovSystem) -> Result<()> {
        check_symbols(system, &self.symbols)
    }

    /// Drops the leftmost symbol.
    pub fn shift(&self) -> Result<Word> {
        if self.symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(Word::new(self.symbols[1..].to_vec()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DualWord {
    /// Written order `jₙ … j₀`.
    pub symbols: Vec<usize>,
}

impl DualWord {
    pub fn new(symbols: Vec<usize>) -> Self {
        DualWord { symbols }
    }

    pub fn validate(&self, system: &MarkovSystem) -> Result<()> {
        check_symbols(system, &self.symbols)
    }

    /// Drops the rightmost symbol `j₀`.
    pub fn dual_shift(&self) -> Result<DualWord> {
        if self.symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(DualWord::new(self.symbols[..self.symbols.len() - 1].to_vec()))
    }

    /// The last `n + 1` symbols `jₙ … j₀`.
    pub fn tail(&self, n: usize) -> DualWord {
        let len = self.symbols.len();
        DualWord::new(self.symbols[len - (n + 1).min(len)..].to_vec())
    }

    pub fn as_word(&self) -> Word {
        Word::new(self.symbols.clone())
    }

    /// Dot-separated symbols, e.g. `12.40.7`.
    pub fn display(&self) -> String {
        self.symbols
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn parse(s: &str) -> Result<DualWord> {
        let symbols = s
            .split(|c: char| c == '.' || c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidConfig(format!("bad dual word `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if symbols.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(DualWord::new(symbols))
    }
}

/// Number of admissible words of each length `1..=max_len`.
pub fn count_words(system: &MarkovSystem, max_len: usize) -> Vec<u128> {
    let k = system.len();
    let mut ending = vec![1u128; k];
    let mut out = Vec::with_capacity(max_len);
    for len in 1..=max_len {
        if len > 1 {
            let mut next = vec![0u128; k];
            for (i, &c) in ending.iter().enumerate() {
                for j in system.successors(i) {
                    next[j] += c;
                }
            }
            ending = next;
        }
        out.push(ending.iter().sum());
    }
    out
}

/// Inverse branches `g_i`.
pub fn inverse_branches(system: &MarkovSystem) -> Vec<DiskMobius> {
    (0..system.len()).map(|j| system.branch_map(j).inverse()).collect()
}

/// `g_{i₀} ∘ … ∘ g_{i_{n−1}}` for the word `i₀ … iₙ`.
pub fn cylinder_map(system: &MarkovSystem, symbols: &[usize]) -> DiskMobius {
    symbols[..symbols.len() - 1]
        .iter()
        .fold(DiskMobius::identity(), |acc, &i| acc.compose(&system.branch_map(i).inverse()))
}

/// The cylinder arc of an admissible word.
pub fn cylinder_interval(system: &MarkovSystem, word: &Word) -> Result<Arc> {
    word.validate(system)?;
    let last = *word.symbols.last().unwrap();
    Ok(cylinder_map(system, &word.symbols).apply_arc(&system.interval(last)))
}

/// Angular length of a cylinder, from the chord of its Möbius endpoints.
pub fn cylinder_length(system: &MarkovSystem, symbols: &[usize], precision: Precision) -> Result<f64> {
    check_symbols(system, symbols)?;
    let last = *symbols.last().unwrap();
    let maps: Vec<DiskMobius> = symbols[..symbols.len() - 1]
        .iter()
        .map(|&i| system.branch_map(i).inverse())
        .collect();
    Ok(composed_image_length(&maps, &system.interval(last), precision))
}

/// `π` on a finite prefix: the midpoint of the cylinder and the length of the
/// cylinder, which bounds the distance to the true image of any extension.
pub fn pi_point(system: &MarkovSystem, word: &Word) -> Result<(CirclePoint, f64)> {
    let arc = cylinder_interval(system, word)?;
    Ok((arc.midpoint(), arc.length()))
}

/// Lengths of a cylinder in each of several systems together with the length
/// of its parent (the word without its last symbol).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderLengths {
    pub length: f64,
    pub parent: f64,
}

/// Walks all admissible words of length `len` in a fixed order (first symbol
/// ascending, then successors in their cyclic order) simultaneously in every
/// system, which must share the transition structure. One accumulator is
/// produced per first symbol so that reductions over the result are
/// deterministic.
pub fn fold_words<A, I, V>(systems: &[&MarkovSystem], len: usize, init: I, visit: V) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &[usize], &[CylinderLengths]) + Sync,
{
    assert!(len >= 1 && !systems.is_empty());
    let base = systems[0];
    let k = base.len();
    let inv: Vec<Vec<DiskMobius>> = systems.iter().map(|s| inverse_branches(s)).collect();
    let arcs: Vec<Vec<Arc>> = systems.iter().map(|s| s.intervals()).collect();
    (0..k)
        .into_par_iter()
        .map(|i0| {
            let mut acc = init();
            let mut word = vec![i0];
            let maps = vec![DiskMobius::identity(); systems.len()];
            let lens: Vec<CylinderLengths> = arcs
                .iter()
                .map(|a| CylinderLengths {
                    length: a[i0].length(),
                    parent: TAU,
                })
                .collect();
            walk(base, &inv, &arcs, len, &mut word, &maps, &lens, &mut acc, &visit);
            acc
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn walk<A, V>(
    base: &MarkovSystem,
    inv: &[Vec<DiskMobius>],
    arcs: &[Vec<Arc>],
    len: usize,
    word: &mut Vec<usize>,
    maps: &[DiskMobius],
    lens: &[CylinderLengths],
    acc: &mut A,
    visit: &V,
) where
    V: Fn(&mut A, &[usize], &[CylinderLengths]),
{
    if word.len() == len {
        visit(acc, word, lens);
        return;
    }
    let last = *word.last().unwrap();
    let next_maps: Vec<DiskMobius> = maps
        .iter()
        .zip(inv)
        .map(|(m, g)| m.compose(&g[last]))
        .collect();
    let mut child = vec![CylinderLengths { length: 0.0, parent: 0.0 }; maps.len()];
    for s in base.successors(last) {
        for (c, ((m, a), l)) in child.iter_mut().zip(next_maps.iter().zip(arcs).zip(lens)) {
            c.length = m.image_arc_length(&a[s]);
            c.parent = l.length;
        }
        word.push(s);
        walk(base, inv, arcs, len, word, &next_maps, &child, acc, visit);
        word.pop();
    }
}

/// Predecessor lists `{ i : a_{ij} = 1 }`.
pub fn predecessors(system: &MarkovSystem) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); system.len()];
    for i in 0..system.len() {
        for j in system.successors(i) {
            pred[j].push(i);
        }
    }
    pred
}

/// A random admissible dual word `j_{len−1} … j₀`, grown leftwards from a
/// uniformly chosen `j₀`.
pub fn random_dual_word<R: Rng>(system: &MarkovSystem, pred: &[Vec<usize>], len: usize, rng: &mut R) -> DualWord {
    let mut rev = vec![rng.gen_range(0..system.len())];
    while rev.len() < len {
        let p = &pred[*rev.last().unwrap()];
        rev.push(p[rng.gen_range(0..p.len())]);
    }
    rev.reverse();
    DualWord::new(rev)
}

/// A random admissible forward word of the given length.
pub fn random_word<R: Rng>(system: &MarkovSystem, len: usize, rng: &mut R) -> Word {
    let mut w = vec![rng.gen_range(0..system.len())];
    while w.len() < len {
        let last = *w.last().unwrap();
        let d = system.out_degree(last);
        let o = rng.gen_range(0..d);
        w.push(system.successors(last).nth(o).unwrap());
    }
    Word::new(w)
}

/// Eventually periodic branch itinerary of a partition point under `f₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreperiodicCode {
    /// Index of the point in `W`.
    pub index: usize,
    pub point: CirclePoint,
    /// Sides of the generators applied before the orbit becomes periodic, in
    /// order of application.
    pub preperiod: Vec<usize>,
    /// Sides applied along one period, in order of application.
    pub period: Vec<usize>,
    /// Distance between `f₀^m(w)` and the repelling fixed point of the period.
    pub residual: f64,
    /// Steps at which the other one-sided branch also landed in `W`.
    pub ties: Vec<usize>,
}

/// Composition of the generators of `sides`, applied in the listed order.
fn applied(sides: &[usize], image: impl Fn(usize) -> DiskMobius) -> DiskMobius {
    sides
        .iter()
        .fold(DiskMobius::identity(), |acc, &s| image(s).compose(&acc))
}

/// Iterates `f₀` on `W` from `points[index]` until the orbit repeats.
pub fn code_of_partition_point(system: &MarkovSystem, index: usize) -> Result<PreperiodicCode> {
    let k = system.len();
    let fail = |reason: String| Error::CodeFailure { index, reason };
    let tol = system.options.markov_tol;
    let mut seen = vec![usize::MAX; k];
    let mut sides = Vec::new();
    let mut ties = Vec::new();
    let mut cur = index;
    let mut step = 0;
    while seen[cur] == usize::MAX {
        seen[cur] = step;
        let right = system.endpoint_image(cur, cur);
        let left_interval = (cur + k - 1) % k;
        let left = system.endpoint_image(cur, left_interval);
        let (interval, (next, res)) = if right.1 <= left.1 {
            (cur, right)
        } else {
            (left_interval, left)
        };
        if right.1.max(left.1) <= tol {
            ties.push(step);
        }
        if res > tol {
            return Err(fail(format!("orbit leaves W by {res:e}")));
        }
        sides.push(system.branch[interval]);
        cur = next;
        step += 1;
    }
    let m = seen[cur];
    let period = sides[m..].to_vec();
    let preperiod = sides[..m].to_vec();
    let gens = |s: usize| system.rep.generators[s];
    let p = applied(&period, gens);
    let rep = p.repelling_fixed_point().map_err(|e| fail(e.to_string()))?;
    let residual = rep.distance(system.points[cur]);
    if residual > 1e-9 {
        return Err(fail(format!("periodic point misses the fixed point by {residual:e}")));
    }
    let back = applied(&preperiod, gens).inverse().apply_point(rep);
    if back.distance(system.points[index]) > 1e-9 {
        return Err(fail("preperiod does not return to the point".into()));
    }
    Ok(PreperiodicCode {
        index,
        point: system.points[index],
        preperiod,
        period,
        residual,
        ties,
    })
}

/// Codes of every partition point.
pub fn partition_codes(system: &MarkovSystem) -> Result<Vec<PreperiodicCode>> {
    (0..system.len())
        .into_par_iter()
        .map(|i| code_of_partition_point(system, i))
        .collect()
}

/// `H(w)` for the deformation described by `marking`: the preimage under the
/// transported preperiod of the repelling fixed point of the transported period.
pub fn transport_point(code: &PreperiodicCode, marking: &Marking) -> Result<CirclePoint> {
    let image = |s: usize| *marking.image(s);
    let p = applied(&code.period, image);
    let rep = p.repelling_fixed_point()?;
    Ok(applied(&code.preperiod, image).inverse().apply_point(rep))
}
