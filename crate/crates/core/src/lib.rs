//! Simulation and numerical verification of billiards in asymmetric lemon
//! tables: the intersection of a unit disk with a disk of radius `R ≥ 1`
//! whose boundary circles cross at position angle `±φ*` on the unit circle.
//!
//! ```
//! use lemon_billiards::{billiard_step, LemonTable, PhasePoint};
//!
//! let table = LemonTable::new(std::f64::consts::FRAC_PI_4, 1800.0).unwrap();
//! let x = PhasePoint::small(std::f64::consts::PI, std::f64::consts::FRAC_PI_2);
//! let next = billiard_step(&table, &x).into_result().unwrap();
//! assert_eq!(next.point, PhasePoint::big(0.0, std::f64::consts::FRAC_PI_2));
//! ```

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod phase;
pub mod returnmap;
pub mod tangent;
pub mod verify;

pub use dynamics::{billiard_inverse, billiard_step, orbit, CollisionEvent, Singularity, StepOutcome};
pub use error::{Error, Result};
pub use geometry::{min_radius_threshold, radius_threshold, ArcLabel, LemonTable, ThresholdVariant};
pub use phase::PhasePoint;
pub use returnmap::{extract_segment, first_return, ReturnSegment, SegmentCase};
pub use tangent::{classify_defocusing, DefocusClass, Mat2};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tables.md")]
    mod tables {}
    #[doc = include_str!("../../../book/src/billiard-map.md")]
    mod billiard_map {}
    #[doc = include_str!("../../../book/src/tangent-maps.md")]
    mod tangent_maps {}
    #[doc = include_str!("../../../book/src/return-map.md")]
    mod return_map {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/lyapunov.md")]
    mod lyapunov {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
