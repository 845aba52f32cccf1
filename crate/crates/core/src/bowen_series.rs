//! The Bowen–Series Markov map of the standard group and its conjugates.
//!
//! Construction for the standard group:
//!
//! * the net is the tessellation by translates of the polygon `D`; only
//!   tiles touching a vertex of `D` are enumerated,
//! * `V` collects the tile vertices joined by a net edge to a vertex of `D`,
//! * `W` is the set of ideal endpoints of the `2g` net geodesics through the
//!   points of `V`,
//! * for each vertex `v` of `D`, `J(v)` is the arc between consecutive points of
//!   `W` cut out by the two geodesics through the tile opposite to `v`,
//! * the branch domain of the side-`s` generator runs counterclockwise from the
//!   start of `J(vertex s)` to the start of `J(vertex s+1)`.
//!
//! A deformed surface reuses the combinatorics: each point of `W` is
//! transported by its preperiodic code (see [`crate::symbolic`]).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuchsian::{build_standard_group, Marking, Polygon, SurfaceGroupRep};
use crate::mobius::{Arc, CirclePoint, Complex, DiskMobius, Geodesic, ANGLE_TOL, TAU};
use crate::symbolic;

/// Knobs of the construction. Defaults follow the documented tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Identification tolerance for points of the circle.
    pub angle_tol: f64,
    /// Tolerance on branch images of partition points.
    pub markov_tol: f64,
    /// Word-length cutoff for the tile enumeration; `None` means `2g`.
    pub net_cutoff: Option<usize>,
    /// Largest iterate tried when certifying (eventual) expansion.
    pub expansion_depth: usize,
    pub branch_rule: BranchRule,
}

/// Which generator acts on an interval that admits several expanding Markov
/// branches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchRule {
    /// The generator with the largest derivative minimum on the interval.
    #[default]
    LargestDerivative,
    /// The generator whose domain `[J_v, J_{v+1})` contains the interval.
    Domain,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            angle_tol: ANGLE_TOL,
            markov_tol: 1e-8,
            net_cutoff: None,
            expansion_depth: 4,
            branch_rule: BranchRule::default(),
        }
    }
}

/// A translate `γ(D)` of the fundamental polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    /// Side indices whose generators compose, left to right, to `map`.
    pub word: Vec<usize>,
    pub map: DiskMobius,
    pub vertices: Vec<Complex>,
}

impl Tile {
    pub fn center(&self) -> Complex {
        self.map.apply(Complex::new(0.0, 0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub polygon: Polygon,
    /// `D` itself first, then every tile sharing at least a vertex with it.
    pub tiles: Vec<Tile>,
    pub cutoff: usize,
    /// Vertices adjacent to `V₀` along net edges, not in `V₀`.
    pub outer: Vec<Complex>,
    /// For each point of `outer`, the index of its neighbour in `V₀`.
    pub outer_neighbour: Vec<usize>,
}

impl Net {
    pub fn base_vertices(&self) -> &[Complex] {
        &self.polygon.vertices
    }

    /// Number of tiles having `z` as a vertex.
    pub fn tiles_at(&self, z: Complex, tol: f64) -> usize {
        self.tiles
            .iter()
            .filter(|t| t.vertices.iter().any(|w| (w - z).norm() < tol))
            .count()
    }

    pub fn find_tile(&self, center: Complex, tol: f64) -> Option<usize> {
        self.tiles.iter().position(|t| (t.center() - center).norm() < tol)
    }
}

fn close(a: Complex, b: Complex, tol: f64) -> bool {
    (a - b).norm() < tol
}

/// Enumerates the tiles around `D` by breadth-first search over generator
/// words and asserts that every vertex of `D` is surrounded.
pub fn build_net(polygon: &Polygon, rep: &SurfaceGroupRep, cutoff: Option<usize>, tol: f64) -> Result<Net> {
    let n = polygon.sides();
    let cutoff = cutoff.unwrap_or(2 * polygon.genus);
    let v0 = &polygon.vertices;
    let make_tile = |word: Vec<usize>, map: DiskMobius| {
        let vertices = v0.iter().map(|&v| map.apply(v)).collect();
        Tile { word, map, vertices }
    };
    let touches = |t: &Tile| t.vertices.iter().any(|&w| v0.iter().any(|&v| close(v, w, tol)));
    let mut tiles = vec![make_tile(Vec::new(), DiskMobius::identity())];
    let mut frontier = vec![0usize];
    for _ in 0..cutoff {
        let mut next = Vec::new();
        for &ti in &frontier {
            for s in 0..n {
                let map = tiles[ti].map.compose(&rep.generators[s]);
                let center = map.apply(Complex::new(0.0, 0.0));
                if tiles.iter().any(|t| close(t.center(), center, tol)) {
                    continue;
                }
                let mut word = tiles[ti].word.clone();
                word.push(s);
                let tile = make_tile(word, map);
                if !touches(&tile) {
                    continue;
                }
                tiles.push(tile);
                next.push(tiles.len() - 1);
            }
        }
        frontier = next;
    }
    let angle = std::f64::consts::PI / (2 * polygon.genus) as f64;
    let mut net = Net {
        polygon: polygon.clone(),
        tiles,
        cutoff,
        outer: Vec::new(),
        outer_neighbour: Vec::new(),
    };
    for (vi, &v) in v0.iter().enumerate() {
        let count = net.tiles_at(v, tol);
        let angle_sum = count as f64 * angle;
        if (angle_sum - TAU).abs() > 1e-6 {
            return Err(Error::NetIncomplete {
                cutoff,
                vertex: vi,
                angle_sum,
            });
        }
    }
    let in_v0 = |z: Complex| v0.iter().position(|&v| close(v, z, tol));
    for t in &net.tiles {
        for i in 0..n {
            let (x, y) = (t.vertices[i], t.vertices[(i + 1) % n]);
            for (p, q) in [(x, y), (y, x)] {
                if let (Some(vi), None) = (in_v0(p), in_v0(q)) {
                    if !net.outer.iter().any(|&u| close(u, q, tol)) {
                        net.outer.push(q);
                        net.outer_neighbour.push(vi);
                    }
                }
            }
        }
    }
    Ok(net)
}

/// Where a partition point came from: the `direction`-th net geodesic through
/// `outer[vertex]`, forward or backward end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSource {
    pub vertex: usize,
    pub direction: usize,
    pub backward: bool,
}

/// Ideal endpoints of the `2g` net geodesics through the interior point `p`,
/// one of them heading to `towards`. Returned in the order
/// `(direction 0 forward, direction 0 backward, direction 1 forward, …)`.
pub fn net_geodesic_ends(p: Complex, towards: Complex, genus: usize) -> Vec<CirclePoint> {
    let t = DiskMobius::moving_to_origin(p);
    let back = t.inverse();
    let dir = t.apply(towards).arg();
    let step = std::f64::consts::PI / (2 * genus) as f64;
    let mut out = Vec::with_capacity(4 * genus);
    for k in 0..2 * genus {
        let a = dir + step * k as f64;
        for e in [0.0, std::f64::consts::PI] {
            out.push(CirclePoint::from_complex(back.apply(Complex::from_polar(1.0, a + e))));
        }
    }
    out
}

/// The sorted partition set `W` with provenance of each merged point.
pub fn compute_w(net: &Net, tol: f64) -> Result<(Vec<CirclePoint>, Vec<PointSource>)> {
    let g = net.polygon.genus;
    let mut raw: Vec<(CirclePoint, PointSource)> = Vec::new();
    for (pi, (&p, &nb)) in net.outer.iter().zip(&net.outer_neighbour).enumerate() {
        let ends = net_geodesic_ends(p, net.base_vertices()[nb], g);
        for i in 0..ends.len() {
            for j in 0..i {
                if ends[i].distance(ends[j]) <= tol {
                    return Err(Error::DegenerateGeodesic(ends[i].angle(), ends[j].angle()));
                }
            }
        }
        for (i, e) in ends.into_iter().enumerate() {
            raw.push((
                e,
                PointSource {
                    vertex: pi,
                    direction: i / 2,
                    backward: i % 2 == 1,
                },
            ));
        }
    }
    raw.sort_by(|a, b| a.0.angle().total_cmp(&b.0.angle()));
    let mut points: Vec<CirclePoint> = Vec::new();
    let mut sources = Vec::new();
    for (x, src) in raw {
        if let Some(last) = points.last() {
            if last.ccw_offset(x) <= tol {
                continue;
            }
        }
        points.push(x);
        sources.push(src);
    }
    if points.len() > 1 && points[points.len() - 1].ccw_offset(points[0]) <= tol {
        points.pop();
        sources.pop();
    }
    // net geodesics through the vertices of D end in W as well
    let v0 = net.base_vertices();
    let n = v0.len();
    for (qi, &q) in v0.iter().enumerate() {
        for e in net_geodesic_ends(q, v0[(qi + 1) % n], g) {
            if nearest_index(&points, e).1 > tol {
                return Err(Error::ConstructionFailure {
                    vertex: qi,
                    reason: format!("geodesic end {} through a base vertex is not in W", e.angle()),
                });
            }
        }
    }
    Ok((points, sources))
}

/// Index of the point of a sorted cyclic list nearest to `x`, with distance.
pub fn nearest_index(points: &[CirclePoint], x: CirclePoint) -> (usize, f64) {
    let k = points.len();
    let pos = points.partition_point(|p| p.angle() < x.angle());
    let mut best = (0, f64::INFINITY);
    for c in [pos + k - 1, pos, pos + 1] {
        let i = c % k;
        let d = points[i].distance(x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// The arc `J_s` cut off by the full geodesic through side `s`, on the side
/// away from `D`.
pub fn side_arc(polygon: &Polygon, s: usize) -> Result<Arc> {
    let (small, _) = polygon.side_geodesics[s].arcs();
    if small.length() >= std::f64::consts::PI {
        return Err(Error::ConstructionFailure {
            vertex: s,
            reason: "side geodesic does not cut off an arc shorter than π".into(),
        });
    }
    Ok(small)
}

/// `J(v)` as a pair of consecutive indices into `W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexArc {
    pub vertex: usize,
    pub start: usize,
    pub end: usize,
}

/// Builds `J(v)` for the base vertex `vi`.
pub fn compute_jv(net: &Net, points: &[CirclePoint], vi: usize, tol: f64) -> Result<VertexArc> {
    let v0 = net.base_vertices();
    let n = v0.len();
    let fail = |reason: String| Error::ConstructionFailure { vertex: vi, reason };
    // the tile opposite to v across the vertex is the image of D under the
    // half-turn about v
    let h = DiskMobius::half_turn(v0[vi]);
    if net.find_tile(h.apply(Complex::new(0.0, 0.0)), 1e-8).is_none() {
        return Err(fail("opposite tile not found in the net".into()));
    }
    let p = h.apply(v0[(vi + n - 1) % n]);
    let q = h.apply(v0[(vi + n - 2) % n]);
    let p2 = h.apply(v0[(vi + 1) % n]);
    let q2 = h.apply(v0[(vi + 2) % n]);
    let ja = side_arc(&net.polygon, (vi + n - 1) % n)?;
    let jb = side_arc(&net.polygon, vi)?;
    let mut cands = Vec::new();
    for (x, y) in [(p, q), (p2, q2)] {
        let delta = Geodesic::through(x, y)?;
        for e in [delta.p, delta.q] {
            if ja.contains(e, tol) && jb.contains(e, tol) {
                cands.push(e);
            }
        }
    }
    if cands.len() != 2 {
        return Err(fail(format!("found {} geodesic ends in J_s ∩ J_s'", cands.len())));
    }
    let (mut a, mut b) = (cands[0], cands[1]);
    if a.ccw_offset(b) > std::f64::consts::PI {
        std::mem::swap(&mut a, &mut b);
    }
    let (ia, ra) = nearest_index(points, a);
    let (ib, rb) = nearest_index(points, b);
    if ra > tol || rb > tol {
        return Err(fail(format!("endpoints miss W by {:e}", ra.max(rb))));
    }
    if (ia + 1) % points.len() != ib {
        return Err(fail("J(v) contains further points of W".into()));
    }
    let inner = Arc::new(points[ia], points[ib]);
    if !(ja.contains_arc(&inner, tol) && jb.contains_arc(&inner, tol)) {
        return Err(fail("J(v) leaves J_s ∩ J_s'".into()));
    }
    Ok(VertexArc {
        vertex: vi,
        start: ia,
        end: ib,
    })
}

/// Lower bounds for `|(fⁿ)′|` and the depth at which expansion is certified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    /// `min |f′|` over all intervals.
    pub lambda0: f64,
    /// `minima[j-1]` is the exact minimum of `|(f^j)′|` over depth-j cylinders.
    pub minima: Vec<f64>,
    /// Smallest `j` with `minima[j-1] > 1`.
    pub depth_used: usize,
}

/// An expanding Markov map of the circle, piecewise given by the generators of
/// a marked surface group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovSystem {
    pub genus: usize,
    pub rep: SurfaceGroupRep,
    /// Sorted partition points `W`; interval `j` runs from `points[j]` to `points[j+1]`.
    pub points: Vec<CirclePoint>,
    pub sources: Vec<PointSource>,
    /// Generator (side index) acting on each interval.
    pub branch: Vec<usize>,
    /// The image of interval `j` is the union of intervals `image[j].0 ..
    /// image[j].1` (cyclic, end exclusive), so each row of the transition
    /// matrix is a cyclic block of ones.
    pub image: Vec<(usize, usize)>,
    pub jv: Vec<VertexArc>,
    /// For each interval, the other sides whose generator is expanding there
    /// and sends its endpoints into `W`.
    pub alternatives: Vec<Vec<usize>>,
    pub expansion: Expansion,
    pub lambda0: f64,
    pub n_mix: usize,
    pub markov_residual: f64,
    pub options: BuildOptions,
}

impl MarkovSystem {
    /// The Markov map of the standard genus-g group with default options.
    pub fn standard(genus: usize) -> Result<Self> {
        Self::standard_with(genus, &BuildOptions::default())
    }

    pub fn standard_with(genus: usize, options: &BuildOptions) -> Result<Self> {
        let (rep, polygon) = build_standard_group(genus)?;
        let net = build_net(&polygon, &rep, options.net_cutoff, options.angle_tol)?;
        let (points, sources) = compute_w(&net, options.angle_tol)?;
        let jv = (0..polygon.sides())
            .map(|v| compute_jv(&net, &points, v, options.angle_tol))
            .collect::<Result<Vec<_>>>()?;
        assign_branches(rep, points, sources, jv, options)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn interval(&self, j: usize) -> Arc {
        Arc::new(self.points[j], self.points[(j + 1) % self.len()])
    }

    pub fn intervals(&self) -> Vec<Arc> {
        (0..self.len()).map(|j| self.interval(j)).collect()
    }

    /// The Möbius map of `f` on interval `j`.
    pub fn branch_map(&self, j: usize) -> &DiskMobius {
        &self.rep.generators[self.branch[j]]
    }

    /// The image arc `f(I_j)`.
    pub fn image_arc(&self, j: usize) -> Arc {
        let (a, b) = self.image[j];
        Arc::new(self.points[a], self.points[b % self.len()])
    }

    /// `a_{ij}`.
    pub fn allowed(&self, i: usize, j: usize) -> bool {
        let k = self.len();
        let (a, b) = self.image[i];
        let span = (b + k - a) % k;
        let off = (j + k - a) % k;
        off < span
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let k = self.len();
        let (a, b) = self.image[i];
        let span = (b + k - a) % k;
        (0..span).map(move |o| (a + o) % k)
    }

    pub fn out_degree(&self, i: usize) -> usize {
        let k = self.len();
        let (a, b) = self.image[i];
        (b + k - a) % k
    }

    /// The transition matrix as 0-1 rows.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        (0..self.len())
            .map(|i| (0..self.len()).map(|j| self.allowed(i, j) as u8).collect())
            .collect()
    }

    /// The point reached from `points[i]` by the branch of interval `j`
    /// (`j = i` for the right-hand branch, `j = i − 1` for the left-hand one),
    /// as an index into `W` and its residual.
    pub fn endpoint_image(&self, i: usize, j: usize) -> (usize, f64) {
        let x = self.branch_map(j).apply_point(self.points[i]);
        nearest_index(&self.points, x)
    }

    /// Evaluates `f` at a point of interval `j`.
    pub fn apply(&self, j: usize, x: CirclePoint) -> CirclePoint {
        self.branch_map(j).apply_point(x)
    }

    /// Interval containing `x` (half-open `[start, end)`). The point list only
    /// needs to be cyclically ordered.
    pub fn locate(&self, x: CirclePoint) -> usize {
        let k = self.len();
        let base = self.points[0];
        let off = base.ccw_offset(x);
        let (mut lo, mut hi) = (0usize, k);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if base.ccw_offset(self.points[mid]) <= off {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Sum of interval lengths.
    pub fn total_length(&self) -> f64 {
        (0..self.len()).map(|j| self.interval(j).length()).sum()
    }
}

/// Assigns a generator to every interval, computes the transition structure and
/// certifies the Markov and expansion properties.
pub fn assign_branches(
    rep: SurfaceGroupRep,
    points: Vec<CirclePoint>,
    sources: Vec<PointSource>,
    jv: Vec<VertexArc>,
    options: &BuildOptions,
) -> Result<MarkovSystem> {
    let k = points.len();
    let n = rep.sides();
    let mut branch = vec![usize::MAX; k];
    for s in 0..n {
        let from = jv[s].start;
        let to = jv[(s + 1) % n].start;
        let mut i = from;
        while i != to {
            if branch[i] != usize::MAX {
                return Err(Error::MarkovFailure(format!("interval {i} lies in two branch domains")));
            }
            branch[i] = s;
            i = (i + 1) % k;
        }
    }
    if let Some(i) = branch.iter().position(|&b| b == usize::MAX) {
        return Err(Error::UncoveredInterval(i));
    }
    let mut system = MarkovSystem {
        genus: rep.genus,
        rep,
        points,
        sources,
        branch,
        image: vec![(0, 0); k],
        jv,
        alternatives: vec![Vec::new(); k],
        expansion: Expansion {
            lambda0: 0.0,
            minima: Vec::new(),
            depth_used: 0,
        },
        lambda0: 0.0,
        n_mix: 0,
        markov_residual: 0.0,
        options: options.clone(),
    };
    // every branch expands on its whole domain
    for s in 0..n {
        let dom = Arc::new(system.points[system.jv[s].start], system.points[system.jv[(s + 1) % n].start]);
        let (lo, _) = system.rep.generators[s].derivative_range_on_arc(&dom);
        if lo <= 1.0 {
            return Err(Error::ExpansionFailure(format!(
                "generator of side {s} has |γ′| = {lo} on its domain"
            )));
        }
    }
    fill_images(&mut system)?;
    for j in 0..k {
        let arc = system.interval(j);
        for t in 0..n {
            if t == system.branch[j] {
                continue;
            }
            let m = &system.rep.generators[t];
            let (lo, _) = m.derivative_range_on_arc(&arc);
            let ok = lo > 1.0
                && nearest_index(&system.points, m.apply_point(arc.start)).1 <= options.markov_tol
                && nearest_index(&system.points, m.apply_point(arc.end)).1 <= options.markov_tol;
            if ok {
                system.alternatives[j].push(t);
            }
        }
    }
    if options.branch_rule == BranchRule::LargestDerivative {
        for j in 0..k {
            let arc = system.interval(j);
            let lo = |t: usize| system.rep.generators[t].derivative_range_on_arc(&arc).0;
            let mut best = system.branch[j];
            for &t in &system.alternatives[j] {
                if lo(t) > lo(best) {
                    best = t;
                }
            }
            if best != system.branch[j] {
                let old = system.branch[j];
                let alts = &mut system.alternatives[j];
                alts.retain(|&t| t != best);
                alts.push(old);
                alts.sort_unstable();
                system.branch[j] = best;
            }
        }
        fill_images(&mut system)?;
    }
    finish(&mut system)?;
    Ok(system)
}

/// Computes the images of the intervals and checks the Markov property.
fn fill_images(system: &mut MarkovSystem) -> Result<()> {
    let k = system.len();
    let mut residual = 0.0f64;
    for j in 0..k {
        let (a, ra) = system.endpoint_image(j, j);
        let (b, rb) = system.endpoint_image((j + 1) % k, j);
        residual = residual.max(ra).max(rb);
        if ra.max(rb) > system.options.markov_tol {
            return Err(Error::MarkovFailure(format!(
                "interval {j}: endpoint image misses W by {:e}",
                ra.max(rb)
            )));
        }
        if a == b {
            return Err(Error::MarkovFailure(format!("interval {j} collapses or covers the circle")));
        }
        system.image[j] = (a, b);
    }
    system.markov_residual = residual;
    Ok(())
}

fn finish(system: &mut MarkovSystem) -> Result<()> {
    let (transitive, n_mix, witness) = check_transitive(system);
    if !transitive {
        let (i, j) = witness.unwrap_or((0, 0));
        return Err(Error::MarkovFailure(format!("{j} is not reachable from {i}")));
    }
    system.n_mix = n_mix;
    system.expansion = certify_expansion(system)?;
    system.lambda0 = system.expansion.lambda0;
    Ok(())
}

/// Reachability in the transition graph. Returns `(transitive, n_mix,
/// witness)` where `n_mix` is the least `n` such that every pair is joined by a
/// path of length at most `n`, and `witness` an unreachable pair otherwise.
pub fn check_transitive(system: &MarkovSystem) -> (bool, usize, Option<(usize, usize)>) {
    let k = system.len();
    let words = k.div_ceil(64);
    let row = |i: usize| {
        let mut r = vec![0u64; words];
        for j in system.successors(i) {
            r[j / 64] |= 1 << (j % 64);
        }
        r
    };
    let a: Vec<Vec<u64>> = (0..k).map(row).collect();
    let full = |r: &Vec<u64>| (0..k).all(|j| r[j / 64] >> (j % 64) & 1 == 1);
    let mut power = a.clone();
    let mut reach = a.clone();
    for n in 1..=k {
        if reach.iter().all(full) {
            return (true, n, None);
        }
        let next: Vec<Vec<u64>> = power
            .iter()
            .map(|r| {
                let mut out = vec![0u64; words];
                for l in 0..k {
                    if r[l / 64] >> (l % 64) & 1 == 1 {
                        for (o, x) in out.iter_mut().zip(&a[l]) {
                            *o |= x;
                        }
                    }
                }
                out
            })
            .collect();
        for (r, x) in reach.iter_mut().zip(&next) {
            for (u, v) in r.iter_mut().zip(x) {
                *u |= v;
            }
        }
        power = next;
    }
    for i in 0..k {
        for j in 0..k {
            if reach[i][j / 64] >> (j % 64) & 1 == 0 {
                return (false, 0, Some((i, j)));
            }
        }
    }
    (true, k, None)
}

/// Exact minimum of `|(f^j)′|` over all depth-j cylinders, for `j = 1..=depth`.
///
/// On the cylinder of `i₀ … i_{j−1}`, `f^j` inverts `H = g_{i₀} ∘ … ∘ g_{i_{j−1}}`
/// (`g` the inverse branches), so its derivative at `H(y)` is `1/|H′(y)|` for `y`
/// in the image arc `f(I_{i_{j−1}})`.
pub fn derivative_minima(system: &MarkovSystem, depth: usize) -> Vec<f64> {
    let k = system.len();
    let inv: Vec<DiskMobius> = (0..k).map(|j| system.branch_map(j).inverse()).collect();
    let images: Vec<Arc> = (0..k).map(|j| system.image_arc(j)).collect();
    let per_start: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|i0| {
            let mut best = vec![f64::INFINITY; depth];
            let mut stack = vec![(inv[i0], i0, 1usize)];
            while let Some((h, last, len)) = stack.pop() {
                let (_, hi) = h.derivative_range_on_arc(&images[last]);
                best[len - 1] = best[len - 1].min(hi.recip());
                if len < depth {
                    for nx in system.successors(last) {
                        stack.push((h.compose(&inv[nx]), nx, len + 1));
                    }
                }
            }
            best
        })
        .collect();
    (0..depth)
        .map(|d| per_start.iter().map(|b| b[d]).fold(f64::INFINITY, f64::min))
        .collect()
}

fn certify_expansion(system: &MarkovSystem) -> Result<Expansion> {
    let k = system.len();
    let lambda0 = (0..k)
        .map(|j| system.branch_map(j).derivative_range_on_arc(&system.interval(j)).0)
        .fold(f64::INFINITY, f64::min);
    let minima = derivative_minima(system, system.options.expansion_depth.max(1));
    match minima.iter().position(|&d| d > 1.0) {
        Some(j) => Ok(Expansion {
            lambda0,
            minima,
            depth_used: j + 1,
        }),
        None => Err(Error::ExpansionFailure(format!(
            "no iterate up to {} is expanding (minima {:?})",
            system.options.expansion_depth, minima
        ))),
    }
}

/// The Markov map of a deformed surface, `f_X = H ∘ f₀ ∘ H⁻¹`, built by
/// transporting every partition point through its preperiodic code.
pub fn conjugated_system(system0: &MarkovSystem, marking: &Marking) -> Result<MarkovSystem> {
    let codes = symbolic::partition_codes(system0)?;
    conjugated_system_with_codes(system0, marking, &codes)
}

pub fn conjugated_system_with_codes(
    system0: &MarkovSystem,
    marking: &Marking,
    codes: &[symbolic::PreperiodicCode],
) -> Result<MarkovSystem> {
    let k = system0.len();
    let moved = codes
        .iter()
        .map(|c| symbolic::transport_point(c, marking))
        .collect::<Result<Vec<_>>>()?;
    // same cyclic order: consecutive ccw gaps are positive and wind once
    let mut winding = 0.0;
    for i in 0..k {
        let gap = moved[i].ccw_offset(moved[(i + 1) % k]);
        if gap <= system0.options.angle_tol * 1e-3 {
            return Err(Error::OrderViolation(i));
        }
        winding += gap;
    }
    if (winding - TAU).abs() > 1e-6 {
        return Err(Error::OrderViolation(0));
    }
    // keep index 0 the same point: the list is cyclically sorted, not
    // necessarily starting at the smallest angle
    let mut system = MarkovSystem {
        genus: system0.genus,
        rep: marking.target.clone(),
        points: moved,
        sources: system0.sources.clone(),
        branch: system0.branch.iter().map(|&s| marking.generator_map[s]).collect(),
        image: system0.image.clone(),
        jv: system0.jv.clone(),
        alternatives: system0.alternatives.clone(),
        expansion: system0.expansion.clone(),
        lambda0: 0.0,
        n_mix: system0.n_mix,
        markov_residual: 0.0,
        options: system0.options.clone(),
    };
    let mut residual = 0.0f64;
    for j in 0..k {
        let (a, b) = system0.image[j];
        let m = system.branch_map(j);
        let ra = m.apply_point(system.points[j]).distance(system.points[a]);
        let rb = m.apply_point(system.points[(j + 1) % k]).distance(system.points[b % k]);
        residual = residual.max(ra).max(rb);
    }
    if residual > system.options.markov_tol {
        return Err(Error::MarkovFailure(format!("transported branches miss W by {residual:e}")));
    }
    system.markov_residual = residual;
    system.expansion = certify_expansion(&system)?;
    system.lambda0 = system.expansion.lambda0;
    Ok(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::{build_standard_group, twist_deform};
    use std::sync::OnceLock;

    fn g2() -> &'static MarkovSystem {
        static S: OnceLock<MarkovSystem> = OnceLock::new();
        S.get_or_init(|| MarkovSystem::standard(2).unwrap())
    }

    #[test]
    fn net_surrounds_base_vertices() {
        let (rep, poly) = build_standard_group(2).unwrap();
        let net = build_net(&poly, &rep, None, ANGLE_TOL).unwrap();
        for &v in net.base_vertices() {
            assert_eq!(net.tiles_at(v, 1e-9), 8);
        }
        // 8 vertices each surrounded by 8 tiles: D plus 8·(8 − 2) others
        assert_eq!(net.tiles.len(), 49);
        assert_eq!(net.outer.len(), 48);
        let again = build_net(&poly, &rep, None, ANGLE_TOL).unwrap();
        assert_eq!(again.tiles.len(), net.tiles.len());
    }

    #[test]
    fn short_cutoff_is_reported() {
        let (rep, poly) = build_standard_group(2).unwrap();
        assert!(matches!(
            build_net(&poly, &rep, Some(1), ANGLE_TOL),
            Err(Error::NetIncomplete { .. })
        ));
    }

    #[test]
    fn tile_set_is_rotation_invariant() {
        let (rep, poly) = build_standard_group(2).unwrap();
        let net = build_net(&poly, &rep, None, ANGLE_TOL).unwrap();
        let r = DiskMobius::rotation(std::f64::consts::FRAC_PI_4);
        for t in &net.tiles {
            assert!(net.find_tile(r.apply(t.center()), 1e-9).is_some());
        }
    }

    #[test]
    fn w_is_rotation_invariant() {
        let s = g2();
        for &x in &s.points {
            let (_, d) = nearest_index(&s.points, x.rotated(std::f64::consts::FRAC_PI_4));
            assert!(d < 1e-9);
        }
        assert_eq!(s.len() % 8, 0);
    }

    #[test]
    fn eight_ends_per_outer_vertex() {
        let (rep, poly) = build_standard_group(2).unwrap();
        let net = build_net(&poly, &rep, None, ANGLE_TOL).unwrap();
        for (&p, &nb) in net.outer.iter().zip(&net.outer_neighbour) {
            let ends = net_geodesic_ends(p, poly.vertices[nb], 2);
            assert_eq!(ends.len(), 8);
        }
    }

    #[test]
    fn intervals_tile_the_circle() {
        let s = g2();
        assert!((s.total_length() - TAU).abs() < 1e-9);
        for j in 0..s.len() {
            assert!(s.interval(j).length() > 0.0);
        }
    }

    #[test]
    fn vertex_arcs_are_disjoint_and_consecutive() {
        let s = g2();
        let k = s.len();
        for a in &s.jv {
            assert_eq!((a.start + 1) % k, a.end);
        }
        let mut starts: Vec<usize> = s.jv.iter().map(|a| a.start).collect();
        starts.sort();
        starts.dedup();
        assert_eq!(starts.len(), s.jv.len());
    }

    #[test]
    fn markov_and_expansion() {
        let s = g2();
        assert!(s.markov_residual <= 1e-8);
        assert!(s.lambda0 > 1.0);
        assert_eq!(s.expansion.depth_used, 1);
        for i in 0..s.len() {
            assert!(s.out_degree(i) >= 1);
        }
        assert!(s.n_mix >= 1);
    }

    #[test]
    fn rows_match_arc_containment() {
        let s = g2();
        for i in (0..s.len()).step_by(7) {
            let img = s.branch_map(i).apply_arc(&s.interval(i));
            for j in 0..s.len() {
                let inside = img.contains_arc(&s.interval(j), 1e-9);
                assert_eq!(inside, s.allowed(i, j), "row {i} col {j}");
            }
        }
    }

    #[test]
    fn identity_marking_reproduces_system() {
        let s = g2();
        let m = Marking::identity(&s.rep);
        let c = conjugated_system(s, &m).unwrap();
        for (x, y) in c.points.iter().zip(&s.points) {
            assert!(x.distance(*y) < 1e-10);
        }
        assert_eq!(c.image, s.image);
    }

    #[test]
    fn twisted_system_keeps_order() {
        let s = g2();
        let (_, m) = twist_deform(&s.rep, 1, 0.2).unwrap();
        let c = conjugated_system(s, &m).unwrap();
        assert!(c.markov_residual < 1e-8);
        assert!(c.expansion.minima[c.expansion.depth_used - 1] > 1.0);
    }

    #[test]
    fn transitivity_detects_disconnection() {
        let mut s = g2().clone();
        // make every interval map only onto itself
        for j in 0..s.len() {
            s.image[j] = (j, (j + 1) % s.len());
        }
        let (ok, _, witness) = check_transitive(&s);
        assert!(!ok);
        assert!(witness.is_some());
    }
}
