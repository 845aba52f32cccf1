//! The standard genus-g surface group built from the regular 4g-gon, and its
//! marked deformations.
//!
//! Sides of the polygon are numbered `0..4g` counterclockwise, side `s` having
//! its midpoint on the ray at angle `2πs/4g`. Vertex `s` is the start of side
//! `s`, so side `s` runs from vertex `s` to vertex `s + 1`. Within each block of
//! four sides `4j, 4j+1, 4j+2, 4j+3` the labels are
//! `a_{j+1}, b_{j+1}, a_{j+1}⁻¹, b_{j+1}⁻¹`, and sides `4j` and `4j+2`
//! (respectively `4j+1` and `4j+3`) are paired.
//!
//! The generator attached to side `s` carries side `s` onto its partner and
//! moves the polygon across the partner side. With these conventions the
//! surface relation reads `∏_j a_j⁻¹ b_j a_j b_j⁻¹ = ±1`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobius::{Complex, DiskMobius, Geodesic, TAU};

/// Tolerance on the vertex angle of the constructed polygon.
pub const ANGLE_CHECK_TOL: f64 = 1e-9;

/// Tolerance on the surface relation.
pub const RELATION_TOL: f64 = 1e-9;

/// The four kinds of label inside one block of sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelKind {
    A,
    B,
    AInv,
    BInv,
}

/// A generator label such as `a1` or `b2inv`, with 1-based handle index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Label {
    pub handle: usize,
    pub kind: LabelKind,
}

impl Label {
    pub fn from_side(side: usize) -> Self {
        let kind = match side % 4 {
            0 => LabelKind::A,
            1 => LabelKind::B,
            2 => LabelKind::AInv,
            _ => LabelKind::BInv,
        };
        Label {
            handle: side / 4 + 1,
            kind,
        }
    }

    pub fn side(self) -> usize {
        let offset = match self.kind {
            LabelKind::A => 0,
            LabelKind::B => 1,
            LabelKind::AInv => 2,
            LabelKind::BInv => 3,
        };
        4 * (self.handle - 1) + offset
    }

    pub fn inverse(self) -> Self {
        let kind = match self.kind {
            LabelKind::A => LabelKind::AInv,
            LabelKind::B => LabelKind::BInv,
            LabelKind::AInv => LabelKind::A,
            LabelKind::BInv => LabelKind::B,
        };
        Label { kind, ..self }
    }

    /// Parses `a1`, `b2`, `a1inv`, `a1^-1` or `A1` (capital for inverse).
    pub fn parse(s: &str, genus: usize) -> Result<Self> {
        let bad = || Error::UnknownLabel(s.to_string());
        let mut chars = s.chars();
        let first = chars.next().ok_or_else(bad)?;
        let rest: String = chars.collect();
        let (digits, inverted) = if let Some(d) = rest.strip_suffix("inv") {
            (d, true)
        } else if let Some(d) = rest.strip_suffix("^-1") {
            (d, true)
        } else {
            (rest.as_str(), false)
        };
        let handle: usize = digits.parse().map_err(|_| bad())?;
        if handle == 0 || handle > genus {
            return Err(bad());
        }
        let (base, upper) = match first {
            'a' => (LabelKind::A, false),
            'b' => (LabelKind::B, false),
            'A' => (LabelKind::A, true),
            'B' => (LabelKind::B, true),
            _ => return Err(bad()),
        };
        let label = Label { handle, kind: base };
        Ok(if inverted ^ upper { label.inverse() } else { label })
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (c, inv) = match self.kind {
            LabelKind::A => ('a', ""),
            LabelKind::B => ('b', ""),
            LabelKind::AInv => ('a', "inv"),
            LabelKind::BInv => ('b', "inv"),
        };
        write!(f, "{c}{}{inv}", self.handle)
    }
}

/// Index of the side paired with `s`.
pub fn partner(s: usize) -> usize {
    if s % 4 < 2 {
        s + 2
    } else {
        s - 2
    }
}

/// The regular 4g-gon centred at the origin with all angles π/(2g).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub genus: usize,
    /// Hyperbolic distance from the centre to each vertex.
    pub circumradius: f64,
    /// Hyperbolic distance from the centre to each side midpoint.
    pub inradius: f64,
    pub vertices: Vec<Complex>,
    /// Ideal endpoints of the full geodesic through each side, oriented from
    /// the end beyond vertex `s` to the end beyond vertex `s + 1`.
    pub side_geodesics: Vec<Geodesic>,
}

impl Polygon {
    pub fn sides(&self) -> usize {
        self.vertices.len()
    }

    /// Angle of the ray through the midpoint of side `s`.
    pub fn side_direction(&self, s: usize) -> f64 {
        TAU * s as f64 / self.sides() as f64
    }

    /// Interior angle at vertex `v`, measured after moving the vertex to the
    /// origin, where geodesics through it become diameters.
    pub fn vertex_angle(&self, v: usize) -> f64 {
        let n = self.sides();
        let t = DiskMobius::moving_to_origin(self.vertices[v]);
        let prev = t.apply(self.vertices[(v + n - 1) % n]);
        let next = t.apply(self.vertices[(v + 1) % n]);
        let a = (prev / next).arg().abs();
        a.min(TAU - a)
    }
}

/// Interior angle of a regular hyperbolic n-gon with circumradius `r`.
fn regular_angle(n: usize, r: f64) -> f64 {
    2.0 * (1.0 / (r.cosh() * (PI / n as f64).tan())).atan()
}

/// Solves for the circumradius whose interior angle is `target` by bisection.
fn solve_circumradius(n: usize, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while regular_angle(n, hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if regular_angle(n, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Builds the regular 4g-gon with interior angle π/(2g).
pub fn build_polygon(genus: usize) -> Result<Polygon> {
    if genus < 2 {
        return Err(Error::InvalidGenus(genus));
    }
    let n = 4 * genus;
    let target = PI / (2 * genus) as f64;
    let circumradius = solve_circumradius(n, target);
    let euclid = (0.5 * circumradius).tanh();
    let step = TAU / n as f64;
    let vertices: Vec<Complex> = (0..n)
        .map(|s| Complex::from_polar(euclid, step * s as f64 - 0.5 * step))
        .collect();
    let mut side_geodesics = Vec::with_capacity(n);
    for s in 0..n {
        side_geodesics.push(Geodesic::through(vertices[s], vertices[(s + 1) % n])?);
    }
    // the side geodesic is symmetric about the ray through its midpoint; its
    // closest point to the origin sits at Euclidean radius tan(π/4 − θ/2),
    // θ being the half-width of the arc it cuts off.
    let half = 0.5 * side_geodesics[0].p.distance(side_geodesics[0].q);
    let inradius = 2.0 * (0.25 * PI - 0.5 * half).tan().atanh();
    let polygon = Polygon {
        genus,
        circumradius,
        inradius,
        vertices,
        side_geodesics,
    };
    for v in 0..n {
        let angle = polygon.vertex_angle(v);
        if (angle - target).abs() > ANGLE_CHECK_TOL {
            return Err(Error::InvalidConfig(format!(
                "polygon vertex {v} has angle {angle}, expected {target}"
            )));
        }
    }
    Ok(polygon)
}

/// One step in the construction history of a representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Deformation {
    Twist { handle: usize, t: f64 },
    Conjugate { by: DiskMobius },
}

/// A marked representation of the genus-g surface group into the disk
/// automorphisms, with generators indexed by polygon side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGroupRep {
    pub genus: usize,
    pub generators: Vec<DiskMobius>,
    pub is_standard: bool,
    pub relation_residual: f64,
    pub history: Vec<Deformation>,
}

impl SurfaceGroupRep {
    fn from_generators(genus: usize, generators: Vec<DiskMobius>, history: Vec<Deformation>) -> Self {
        let mut rep = SurfaceGroupRep {
            genus,
            generators,
            is_standard: history.is_empty(),
            relation_residual: 0.0,
            history,
        };
        rep.relation_residual = rep.relator().distance_from_identity();
        rep
    }

    pub fn sides(&self) -> usize {
        self.generators.len()
    }

    pub fn generator(&self, label: Label) -> &DiskMobius {
        &self.generators[label.side()]
    }

    /// `∏_j a_j⁻¹ b_j a_j b_j⁻¹`.
    pub fn relator(&self) -> DiskMobius {
        let mut p = DiskMobius::identity();
        for j in 0..self.genus {
            let a_inv = &self.generators[4 * j + 2];
            let b = &self.generators[4 * j + 1];
            p = p
                .compose(a_inv)
                .compose(b)
                .compose(&a_inv.inverse())
                .compose(&b.inverse());
        }
        p
    }

    /// Largest deviation of a labelled inverse from the matrix inverse of its
    /// partner.
    pub fn inverse_residual(&self) -> f64 {
        (0..self.sides())
            .map(|s| {
                self.generators[s]
                    .compose(&self.generators[partner(s)])
                    .distance_from_identity()
            })
            .fold(0.0, f64::max)
    }

    pub fn check(&self) -> Result<()> {
        for m in &self.generators {
            m.translation_length()?;
        }
        if self.relation_residual > RELATION_TOL || self.inverse_residual() > 1e-10 {
            return Err(Error::InvalidConfig(format!(
                "representation fails the surface relation (residual {:e})",
                self.relation_residual
            )));
        }
        Ok(())
    }
}

/// The standard group together with its fundamental polygon.
pub fn build_standard_group(genus: usize) -> Result<(SurfaceGroupRep, Polygon)> {
    let polygon = build_polygon(genus)?;
    let n = polygon.sides();
    let shift = DiskMobius::real_translation(-2.0 * polygon.inradius);
    let generators = (0..n)
        .map(|s| {
            DiskMobius::rotation(polygon.side_direction(partner(s)) - PI)
                .compose(&shift)
                .compose(&DiskMobius::rotation(-polygon.side_direction(s)))
        })
        .collect();
    let rep = SurfaceGroupRep::from_generators(genus, generators, Vec::new());
    rep.check()?;
    Ok((rep, polygon))
}

/// Generator correspondence between the standard group and a deformation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marking {
    pub source: SurfaceGroupRep,
    pub target: SurfaceGroupRep,
    pub generator_map: Vec<usize>,
}

impl Marking {
    pub fn identity(rep: &SurfaceGroupRep) -> Self {
        Marking {
            source: rep.clone(),
            target: rep.clone(),
            generator_map: (0..rep.sides()).collect(),
        }
    }

    /// Image of the generator attached to side `s`.
    pub fn image(&self, s: usize) -> &DiskMobius {
        &self.target.generators[self.generator_map[s]]
    }

    /// Image of a word given as side indices, composed left to right.
    pub fn image_of_word(&self, sides: &[usize]) -> DiskMobius {
        sides
            .iter()
            .fold(DiskMobius::identity(), |acc, &s| acc.compose(self.image(s)))
    }

    /// Follows this marking with another one whose source is our target.
    pub fn then(&self, next: &Marking) -> Marking {
        Marking {
            source: self.source.clone(),
            target: next.target.clone(),
            generator_map: self
                .generator_map
                .iter()
                .map(|&i| next.generator_map[i])
                .collect(),
        }
    }
}

/// Twist along the curve of `a_handle`: `b ↦ b·A_t` where `A_t` translates by
/// `t` along the axis of `a_handle`. The relation is preserved because `A_t`
/// commutes with `a_handle`.
pub fn twist_deform(rep: &SurfaceGroupRep, handle: usize, t: f64) -> Result<(SurfaceGroupRep, Marking)> {
    if handle == 0 || handle > rep.genus {
        return Err(Error::UnknownLabel(format!("a{handle}")));
    }
    let a = &rep.generators[4 * (handle - 1)];
    let axis = a.axis()?;
    let shift = DiskMobius::translation_along(&axis, t);
    let mut generators = rep.generators.clone();
    let b = 4 * (handle - 1) + 1;
    generators[b] = rep.generators[b].compose(&shift);
    generators[b + 2] = generators[b].inverse();
    let mut history = rep.history.clone();
    history.push(Deformation::Twist { handle, t });
    let target = SurfaceGroupRep::from_generators(rep.genus, generators, history);
    let marking = Marking {
        source: rep.clone(),
        target: target.clone(),
        generator_map: (0..rep.sides()).collect(),
    };
    Ok((target, marking))
}

/// Conjugates every generator by `m`.
pub fn conjugate_rep(rep: &SurfaceGroupRep, m: &DiskMobius) -> (SurfaceGroupRep, Marking) {
    let generators = rep.generators.iter().map(|g| g.conjugate_by(m)).collect();
    let mut history = rep.history.clone();
    history.push(Deformation::Conjugate { by: *m });
    let target = SurfaceGroupRep::from_generators(rep.genus, generators, history);
    let marking = Marking {
        source: rep.clone(),
        target: target.clone(),
        generator_map: (0..rep.sides()).collect(),
    };
    (target, marking)
}

/// Evaluates a whitespace-separated word of labels, e.g. `"a1 b1 a1inv"`.
pub fn evaluate_word(rep: &SurfaceGroupRep, word: &str) -> Result<DiskMobius> {
    word.split_whitespace().try_fold(DiskMobius::identity(), |acc, tok| {
        let label = Label::parse(tok, rep.genus)?;
        Ok(acc.compose(rep.generator(label)))
    })
}

/// The relator as a label word.
pub fn relator_word(genus: usize) -> String {
    (1..=genus)
        .map(|j| format!("a{j}inv b{j} a{j} b{j}inv"))
        .collect::<Vec<_>>()
        .join(" ")
}
