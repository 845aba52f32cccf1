//! Geometry of the unit disk and its boundary circle.
//!
//! Every isometry of the disk is stored in the form
//! `z ↦ (a·z + b) / (conj(b)·z + conj(a))` with `|a|² − |b|² = 1`, so the
//! group structure is the matrix group SU(1,1) acting projectively. Points of
//! the boundary circle are angles in `[0, 2π)` and arcs are always oriented
//! counterclockwise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const TAU: f64 = std::f64::consts::TAU;

/// Default tolerance for identifying two points of the circle.
pub const ANGLE_TOL: f64 = 1e-9;

/// Tolerance on `|trace| − 2` used to call an element parabolic or the identity.
pub const TRACE_TOL: f64 = 1e-10;

/// A point of the unit circle, stored as its angle in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        CirclePoint(a)
    }

    pub fn from_complex(z: Complex) -> Self {
        Self::new(z.im.atan2(z.re))
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    pub fn to_complex(self) -> Complex {
        Complex::from_polar(1.0, self.0)
    }

    /// Counterclockwise angular offset from `self` to `other`, in `[0, 2π)`.
    pub fn ccw_offset(self, other: CirclePoint) -> f64 {
        let d = (other.0 - self.0).rem_euclid(TAU);
        if d >= TAU {
            0.0
        } else {
            d
        }
    }

    /// Unsigned angular distance, in `[0, π]`.
    pub fn distance(self, other: CirclePoint) -> f64 {
        let d = self.ccw_offset(other);
        d.min(TAU - d)
    }

    pub fn rotated(self, theta: f64) -> Self {
        Self::new(self.0 + theta)
    }
}

/// Angular length of the arc subtended by a chord of the given Euclidean length.
pub fn arc_from_chord(chord: f64) -> f64 {
    2.0 * (0.5 * chord).min(1.0).asin()
}

/// A counterclockwise arc of the circle from `start` to `end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: CirclePoint,
    pub end: CirclePoint,
}

impl Arc {
    pub fn new(start: CirclePoint, end: CirclePoint) -> Self {
        Arc { start, end }
    }

    /// Angular Lebesgue measure of the arc.
    pub fn length(&self) -> f64 {
        self.start.ccw_offset(self.end)
    }

    pub fn midpoint(&self) -> CirclePoint {
        self.start.rotated(0.5 * self.length())
    }

    /// Signed offset of `p` from `start`, with points just clockwise of
    /// `start` (within `tol`) reported as small negative numbers.
    fn offset_of(&self, p: CirclePoint, tol: f64) -> f64 {
        let d = self.start.ccw_offset(p);
        if d > TAU - tol {
            d - TAU
        } else {
            d
        }
    }

    pub fn contains(&self, p: CirclePoint, tol: f64) -> bool {
        let d = self.offset_of(p, tol);
        d >= -tol && d <= self.length() + tol
    }

    /// Point strictly inside, at least `margin` away from both endpoints.
    pub fn contains_strictly(&self, p: CirclePoint, margin: f64) -> bool {
        let d = self.start.ccw_offset(p);
        d > margin && d < self.length() - margin
    }

    /// `other ⊆ self` up to `tol` at either end.
    pub fn contains_arc(&self, other: &Arc, tol: f64) -> bool {
        let d = self.offset_of(other.start, tol);
        d >= -tol && d + other.length() <= self.length() + tol
    }

    /// Evenly spaced sample points, endpoints included.
    pub fn sample(&self, count: usize) -> impl Iterator<Item = CirclePoint> + '_ {
        let n = count.max(2);
        let len = self.length();
        (0..n).map(move |i| self.start.rotated(len * i as f64 / (n - 1) as f64))
    }
}

/// A complete geodesic of the disk, given by its two ideal endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub p: CirclePoint,
    pub q: CirclePoint,
}

impl Geodesic {
    pub fn new(p: CirclePoint, q: CirclePoint) -> Result<Self> {
        if p.distance(q) <= ANGLE_TOL {
            return Err(Error::DegenerateGeodesic(p.angle(), q.angle()));
        }
        Ok(Geodesic { p, q })
    }

    /// The geodesic through two interior points, oriented from `z1` towards `z2`:
    /// `p` lies behind `z1` and `q` beyond `z2`.
    pub fn through(z1: Complex, z2: Complex) -> Result<Self> {
        let to_origin = DiskMobius::moving_to_origin(z1);
        let w = to_origin.apply(z2);
        if w.norm() < 1e-15 {
            return Err(Error::DegenerateGeodesic(z1.arg(), z2.arg()));
        }
        let dir = w / w.norm();
        let back = to_origin.inverse();
        Geodesic::new(
            CirclePoint::from_complex(back.apply(-dir)),
            CirclePoint::from_complex(back.apply(dir)),
        )
    }

    /// The two arcs into which the geodesic cuts the circle, shorter first.
    pub fn arcs(&self) -> (Arc, Arc) {
        let a = Arc::new(self.p, self.q);
        let b = Arc::new(self.q, self.p);
        if a.length() <= b.length() {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn has_endpoint(&self, x: CirclePoint, tol: f64) -> bool {
        self.p.distance(x) <= tol || self.q.distance(x) <= tol
    }
}

/// Conjugacy class type of a disk automorphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// An orientation-preserving isometry of the disk in SU(1,1) normal form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskMobius {
    pub a: Complex,
    pub b: Complex,
}

impl DiskMobius {
    pub fn identity() -> Self {
        DiskMobius {
            a: Complex::new(1.0, 0.0),
            b: Complex::new(0.0, 0.0),
        }
    }

    /// Builds from raw coefficients and renormalizes to unit determinant.
    pub fn new(a: Complex, b: Complex) -> Self {
        DiskMobius { a, b }.renormalized()
    }

    /// Rotation `z ↦ e^{iθ} z`.
    pub fn rotation(theta: f64) -> Self {
        DiskMobius {
            a: Complex::from_polar(1.0, 0.5 * theta),
            b: Complex::new(0.0, 0.0),
        }
    }

    /// Hyperbolic translation of length `t` along the real diameter, towards `+1`.
    pub fn real_translation(t: f64) -> Self {
        DiskMobius {
            a: Complex::new((0.5 * t).cosh(), 0.0),
            b: Complex::new((0.5 * t).sinh(), 0.0),
        }
    }

    /// The isometry `z ↦ (z − p) / (1 − conj(p) z)` sending `p` to the origin.
    pub fn moving_to_origin(p: Complex) -> Self {
        let s = (1.0 - p.norm_sqr()).sqrt();
        DiskMobius {
            a: Complex::new(1.0 / s, 0.0),
            b: -p / s,
        }
    }

    /// Half-turn (rotation by π) about the interior point `p`.
    pub fn half_turn(p: Complex) -> Self {
        let t = Self::moving_to_origin(p);
        t.inverse().compose(&Self::rotation(std::f64::consts::PI)).compose(&t)
    }

    pub fn determinant(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    /// Rescales to unit determinant. When `|a| ≈ |b|` are large the computed
    /// determinant is itself only accurate to `ε(|a|² + |b|²)`; a deviation
    /// below that level is rounding noise and rescaling by it would inject
    /// error rather than remove it.
    pub fn renormalized(self) -> Self {
        let det = self.determinant();
        let noise = 8.0 * f64::EPSILON * (self.a.norm_sqr() + self.b.norm_sqr());
        if det > 0.0 && (det - 1.0).abs() > noise {
            let s = det.sqrt().recip();
            DiskMobius {
                a: self.a * s,
                b: self.b * s,
            }
        } else {
            self
        }
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &DiskMobius) -> DiskMobius {
        DiskMobius {
            a: self.a * other.a + self.b * other.b.conj(),
            b: self.a * other.b + self.b * other.a.conj(),
        }
        .renormalized()
    }

    pub fn inverse(&self) -> DiskMobius {
        DiskMobius {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// `h ∘ self ∘ h⁻¹`.
    pub fn conjugate_by(&self, h: &DiskMobius) -> DiskMobius {
        h.compose(self).compose(&h.inverse())
    }

    /// Lower-row entries `(c, d)` of the matrix, `c = conj(b)`, `d = conj(a)`.
    #[inline]
    pub fn lower_row(&self) -> (Complex, Complex) {
        (self.b.conj(), self.a.conj())
    }

    pub fn apply(&self, z: Complex) -> Complex {
        let (c, d) = self.lower_row();
        (self.a * z + self.b) / (c * z + d)
    }

    pub fn apply_point(&self, x: CirclePoint) -> CirclePoint {
        CirclePoint::from_complex(self.apply(x.to_complex()))
    }

    /// Image of an arc (Möbius maps preserve the circle orientation).
    pub fn apply_arc(&self, arc: &Arc) -> Arc {
        Arc::new(self.apply_point(arc.start), self.apply_point(arc.end))
    }

    /// `|m′(z)|` for `z` on the circle.
    pub fn circle_derivative(&self, x: CirclePoint) -> f64 {
        let (c, d) = self.lower_row();
        (c * x.to_complex() + d).norm_sqr().recip()
    }

    /// Length of the image arc, computed from the chord
    /// `|m(z₂) − m(z₁)| = |z₂ − z₁| / (|c z₁ + d| |c z₂ + d|)` so that tiny images
    /// keep full relative precision.
    pub fn image_arc_length(&self, arc: &Arc) -> f64 {
        let z1 = arc.start.to_complex();
        let z2 = arc.end.to_complex();
        let (c, d) = self.lower_row();
        let chord = (z2 - z1).norm() / ((c * z1 + d).norm() * (c * z2 + d).norm());
        let len = arc_from_chord(chord);
        // chords cannot tell an arc from its complement; images of long arcs
        // fall back to the angular difference.
        if arc.length() > std::f64::consts::PI || len > 3.0 {
            self.apply_arc(arc).length()
        } else {
            len
        }
    }

    /// Representation `|c e^{iθ} + d|² = P + Q cos(θ − θ₀)` of the squared
    /// denominator on the circle.
    fn denominator_form(&self) -> (f64, f64, f64) {
        let p = self.a.norm_sqr() + self.b.norm_sqr();
        let q = 2.0 * self.a.norm() * self.b.norm();
        let theta0 = (self.a.conj() * self.b).arg();
        (p, q, theta0)
    }

    /// Exact `(min, max)` of `|m′|` over an arc.
    pub fn derivative_range_on_arc(&self, arc: &Arc) -> (f64, f64) {
        let (p, q, theta0) = self.denominator_form();
        let ends = [arc.start, arc.end];
        let mut dmin = f64::INFINITY;
        let mut dmax = 0.0f64;
        for x in ends {
            let v = self.circle_derivative(x);
            dmin = dmin.min(v);
            dmax = dmax.max(v);
        }
        // largest denominator (smallest derivative) at θ₀, smallest at θ₀ + π
        if q > 0.0 {
            if arc.contains(CirclePoint::new(theta0), 0.0) {
                dmin = dmin.min((p + q).recip());
            }
            if arc.contains(CirclePoint::new(theta0 + std::f64::consts::PI), 0.0) {
                dmax = dmax.max((p - q).recip());
            }
        }
        (dmin, dmax)
    }

    /// `d/dθ log|m′(e^{iθ})|`.
    pub fn log_derivative_slope(&self, x: CirclePoint) -> f64 {
        let (p, q, theta0) = self.denominator_form();
        let u = x.angle() - theta0;
        q * u.sin() / (p + q * u.cos())
    }

    /// Second derivative of the induced circle map in arc length,
    /// `d/dθ |m′(e^{iθ})|`.
    pub fn second_derivative(&self, x: CirclePoint) -> f64 {
        let (p, q, theta0) = self.denominator_form();
        let u = x.angle() - theta0;
        let den = p + q * u.cos();
        q * u.sin() / (den * den)
    }

    /// Real trace `2 Re(a)`.
    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    pub fn classify(&self) -> Classification {
        let t = self.trace().abs();
        if (t - 2.0).abs() <= TRACE_TOL {
            if self.b.norm() <= TRACE_TOL.sqrt() {
                Classification::Identity
            } else {
                Classification::Parabolic
            }
        } else if t < 2.0 {
            Classification::Elliptic
        } else {
            Classification::Hyperbolic
        }
    }

    fn require_hyperbolic(&self) -> Result<()> {
        match self.classify() {
            Classification::Hyperbolic => Ok(()),
            _ => Err(Error::NotHyperbolic {
                trace: self.trace().abs(),
            }),
        }
    }

    /// `(attracting, repelling)` fixed points on the circle.
    pub fn fixed_points(&self) -> Result<(CirclePoint, CirclePoint)> {
        self.require_hyperbolic()?;
        // conj(b) z² + (conj(a) − a) z − b = 0
        let im = self.a.im;
        let disc = (self.b.norm_sqr() - im * im).max(0.0).sqrt();
        let c = self.b.conj();
        let z1 = (Complex::new(disc, im)) / c;
        let z2 = (Complex::new(-disc, im)) / c;
        let p1 = CirclePoint::from_complex(z1);
        let p2 = CirclePoint::from_complex(z2);
        if self.circle_derivative(p1) < self.circle_derivative(p2) {
            Ok((p1, p2))
        } else {
            Ok((p2, p1))
        }
    }

    pub fn attracting_fixed_point(&self) -> Result<CirclePoint> {
        Ok(self.fixed_points()?.0)
    }

    pub fn repelling_fixed_point(&self) -> Result<CirclePoint> {
        Ok(self.fixed_points()?.1)
    }

    /// Translation axis, oriented from the repelling to the attracting point.
    pub fn axis(&self) -> Result<Geodesic> {
        let (att, rep) = self.fixed_points()?;
        Geodesic::new(rep, att)
    }

    /// `2 arccosh(|trace| / 2)`.
    pub fn translation_length(&self) -> Result<f64> {
        self.require_hyperbolic()?;
        Ok(2.0 * (0.5 * self.trace().abs()).acosh())
    }

    /// Hyperbolic translation by `t` along `g`, moving from `g.p` towards `g.q`.
    pub fn translation_along(g: &Geodesic, t: f64) -> DiskMobius {
        // The diameter (−1, 1) is carried onto g by R(φ) ∘ T(s) ∘ R(π/2), where
        // T(s) moves the endpoints ∓i to e^{∓iθ} with cos θ = tanh s.
        let half = 0.5 * g.p.ccw_offset(g.q);
        let phi = g.p.angle() + half;
        let s = half.cos().atanh();
        let frame = DiskMobius::rotation(phi)
            .compose(&DiskMobius::real_translation(s))
            .compose(&DiskMobius::rotation(0.5 * std::f64::consts::PI));
        DiskMobius::real_translation(t).conjugate_by(&frame)
    }

    /// Isometric circle `{ z : |c z + d| = 1 }` as `(center, radius)`.
    pub fn isometric_circle(&self) -> Option<(Complex, f64)> {
        let r = self.b.norm();
        if r <= 1e-15 {
            return None;
        }
        Some((-self.a.conj() / self.b.conj(), r.recip()))
    }

    /// Max entrywise distance to `±other`.
    pub fn distance_projective(&self, other: &DiskMobius) -> f64 {
        let plus = (self.a - other.a).norm().max((self.b - other.b).norm());
        let minus = (self.a + other.a).norm().max((self.b + other.b).norm());
        plus.min(minus)
    }

    /// Distance from `±identity`.
    pub fn distance_from_identity(&self) -> f64 {
        self.distance_projective(&DiskMobius::identity())
    }
}

impl std::ops::Mul for DiskMobius {
    type Output = DiskMobius;
    fn mul(self, rhs: DiskMobius) -> DiskMobius {
        self.compose(&rhs)
    }
}
