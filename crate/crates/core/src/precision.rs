//! Optional extended-precision kernel for long compositions.
//!
//! Deep cylinders are images of a partition interval under a product of a
//! dozen or more Möbius maps. In binary64 each product loses a little relative
//! accuracy; the extended mode carries the product and the chord formula in a
//! binary float with a configurable mantissa and only rounds the final length.

use std::fmt;
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mobius::{arc_from_chord, Arc, DiskMobius};

type F = FBig<HalfEven, 2>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    Double,
    Extended {
        bits: usize,
    },
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => write!(f, "double"),
            Precision::Extended { bits } => write!(f, "extended:{bits}"),
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "double" {
            return Ok(Precision::Double);
        }
        let bits = s
            .strip_prefix("extended:")
            .and_then(|b| b.parse::<usize>().ok())
            .filter(|&b| b >= 53)
            .ok_or_else(|| Error::InvalidConfig(format!("bad precision `{s}`")))?;
        Ok(Precision::Extended { bits })
    }
}

#[derive(Clone, Debug)]
struct XComplex {
    re: F,
    im: F,
}

impl XComplex {
    fn from_parts(re: f64, im: f64, bits: usize) -> Self {
        let conv = |x: f64| F::try_from(x).unwrap_or(F::ZERO).with_precision(bits).value();
        XComplex {
            re: conv(re),
            im: conv(im),
        }
    }

    fn add(&self, o: &XComplex) -> XComplex {
        XComplex {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    fn sub(&self, o: &XComplex) -> XComplex {
        XComplex {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    fn mul(&self, o: &XComplex) -> XComplex {
        XComplex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn conj(&self) -> XComplex {
        XComplex {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    fn norm_sqr(&self) -> F {
        &self.re * &self.re + &self.im * &self.im
    }
}

#[derive(Clone, Debug)]
struct XMobius {
    a: XComplex,
    b: XComplex,
}

impl XMobius {
    fn from(m: &DiskMobius, bits: usize) -> Self {
        XMobius {
            a: XComplex::from_parts(m.a.re, m.a.im, bits),
            b: XComplex::from_parts(m.b.re, m.b.im, bits),
        }
    }

    fn compose(&self, o: &XMobius) -> XMobius {
        XMobius {
            a: self.a.mul(&o.a).add(&self.b.mul(&o.b.conj())),
            b: self.a.mul(&o.b).add(&self.b.mul(&o.a.conj())),
        }
    }
}

/// Composes `maps[0] ∘ maps[1] ∘ …` and returns the angular length of the
/// image of `arc`.
pub fn composed_image_length(maps: &[DiskMobius], arc: &Arc, precision: Precision) -> f64 {
    match precision {
        Precision::Double => maps
            .iter()
            .fold(DiskMobius::identity(), |acc, m| acc.compose(m))
            .image_arc_length(arc),
        Precision::Extended { bits } => {
            if arc.length() > std::f64::consts::PI {
                let m = maps.iter().fold(DiskMobius::identity(), |acc, m| acc.compose(m));
                return m.image_arc_length(arc);
            }
            let mut acc = XMobius::from(&DiskMobius::identity(), bits);
            for m in maps {
                acc = acc.compose(&XMobius::from(m, bits));
            }
            let det = acc.a.norm_sqr() - acc.b.norm_sqr();
            let (c, d) = (acc.b.conj(), acc.a.conj());
            let z1 = arc.start.to_complex();
            let z2 = arc.end.to_complex();
            let x1 = XComplex::from_parts(z1.re, z1.im, bits);
            let x2 = XComplex::from_parts(z2.re, z2.im, bits);
            let num = x2.sub(&x1).norm_sqr();
            let den1 = c.mul(&x1).add(&d).norm_sqr();
            let den2 = c.mul(&x2).add(&d).norm_sqr();
            // chord² = det² |Δz|² / (|c z₁ + d|² |c z₂ + d|²)
            let chord_sq = &(&det * &det) * &num / (&den1 * &den2);
            let chord: f64 = chord_sq.sqrt().to_f64().value();
            arc_from_chord(chord)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::{CirclePoint, Complex};

    #[test]
    fn parse_and_display() {
        assert_eq!("double".parse::<Precision>().unwrap(), Precision::Double);
        let p: Precision = "extended:128".parse().unwrap();
        assert_eq!(p, Precision::Extended { bits: 128 });
        assert_eq!(p.to_string(), "extended:128");
        assert!("extended:12".parse::<Precision>().is_err());
        assert!("quad".parse::<Precision>().is_err());
    }

    #[test]
    fn extended_agrees_with_double_on_short_products() {
        let m1 = DiskMobius::new(Complex::new(1.2, 0.3), Complex::new(0.4, -0.5));
        let m2 = DiskMobius::rotation(0.7).compose(&DiskMobius::real_translation(0.9));
        let arc = Arc::new(CirclePoint::new(0.4), CirclePoint::new(0.9));
        let d = composed_image_length(&[m1, m2, m1], &arc, Precision::Double);
        let e = composed_image_length(&[m1, m2, m1], &arc, Precision::Extended { bits: 160 });
        assert!((d - e).abs() < 1e-13 * d.max(1e-300) + 1e-16);
    }
}
