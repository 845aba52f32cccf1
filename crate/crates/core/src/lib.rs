//! Scaling-function coordinates for the Teichmüller space of a closed
//! hyperbolic surface.
//!
//! The pipeline runs from a marked surface group to numbers:
//!
//! 1. [`fuchsian`] builds the standard genus-g group from the regular
//!    4g-gon and deforms it by twists.
//! 2. [`bowen_series`] turns the standard group into an expanding Markov map
//!    of the circle, and transports it to any deformation.
//! 3. [`symbolic`] relates words of the subshift to arcs of the circle.
//! 4. [`scaling`] evaluates the scaling function with certified error bounds
//!    and compares surfaces in the maximum metric.
//! 5. [`thermo`] computes pressure, Gibbs measures, variance and the pressure
//!    metric of finite-depth potentials.
//! 6. [`qs`] holds the explicit quasisymmetric bounds.
//!
//! ```
//! use teich_scaling::prelude::*;
//!
//! let (rep, _polygon) = build_standard_group(2)?;
//! assert!(rep.relation_residual < 1e-9);
//! let system = MarkovSystem::standard(2)?;
//! assert!(system.lambda0 > 1.0);
//! # Ok::<(), teich_scaling::Error>(())
//! ```

pub mod bowen_series;
pub mod error;
pub mod fuchsian;
pub mod mobius;
pub mod precision;
pub mod qs;
pub mod scaling;
pub mod store;
pub mod symbolic;
pub mod thermo;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::bowen_series::{BranchRule, BuildOptions, MarkovSystem, Net};
    pub use crate::error::{Error, Result};
    pub use crate::fuchsian::{
        build_standard_group, conjugate_rep, evaluate_word, twist_deform, Label, Marking,
        Polygon, SurfaceGroupRep,
    };
    pub use crate::mobius::{Arc, CirclePoint, DiskMobius, Geodesic};
    pub use crate::precision::Precision;
    pub use crate::scaling::{DistortionConstants, ScalingSample};
    pub use crate::symbolic::{DualWord, Word};
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/markov.md")]
    mod markov {}
    #[doc = include_str!("../../../book/src/scaling.md")]
    mod scaling {}
    #[doc = include_str!("../../../book/src/thermodynamics.md")]
    mod thermodynamics {}
    #[doc = include_str!("../../../book/src/quasisymmetry.md")]
    mod quasisymmetry {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
