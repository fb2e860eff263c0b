//! Linear stability of the period-two orbit along the symmetry axis.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::Result;
use crate::geometry::LemonTable;
use crate::phase::PhasePoint;
use crate::tangent::{step_jacobian, Mat2};

/// Tolerance on `|trace| − 2`.
pub const TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Period2 {
    pub class: Stability,
    pub trace: f64,
    pub monodromy: Mat2,
}

/// `(Γ_r, π, π/2)` and `(Γ_R, 0, π/2)`.
pub fn axis_orbit() -> [PhasePoint; 2] {
    [PhasePoint::small(PI, FRAC_PI_2), PhasePoint::big(0.0, FRAC_PI_2)]
}

/// `2 − 4b(R + r − b)/(rR)`.
pub fn period2_trace(table: &LemonTable) -> f64 {
    let (r, big_r, b) = (table.r, table.big_r, table.b);
    2.0 - 4.0 * b * (big_r + r - b) / (r * big_r)
}

pub fn classify_trace(trace: f64) -> Stability {
    let excess = trace.abs() - 2.0;
    if excess > TRACE_TOL {
        Stability::Hyperbolic
    } else if excess < -TRACE_TOL {
        Stability::Elliptic
    } else {
        Stability::Parabolic
    }
}

/// Classify the axis orbit from the product of its two step tangent maps.
pub fn period2_stability(table: &LemonTable) -> Result<Period2> {
    let [x, y] = axis_orbit();
    let monodromy = step_jacobian(table, &y)? * step_jacobian(table, &x)?;
    let trace = monodromy.trace();
    Ok(Period2 { class: classify_trace(trace), trace, monodromy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn trace_matches_closed_form() {
        for (p, big_r) in [(FRAC_PI_4, 3.0), (FRAC_PI_6, 20.0), (1.2, 1800.0)] {
            let t = LemonTable::new(p, big_r).unwrap();
            let s = period2_stability(&t).unwrap();
            let oracle = period2_trace(&t);
            assert!((s.trace - oracle).abs() < 1e-9 * oracle.abs().max(1.0), "{} vs {oracle}", s.trace);
            assert_eq!(s.class, Stability::Hyperbolic);
            assert!((s.monodromy.det() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn trichotomy_on_harness_tables() {
        let elliptic = LemonTable::with_separation(1.5, 0.8).unwrap();
        assert_eq!(period2_stability(&elliptic).unwrap().class, Stability::Elliptic);
        let parabolic = LemonTable::with_separation(1.5, 1.0).unwrap();
        assert_eq!(period2_stability(&parabolic).unwrap().class, Stability::Parabolic);
        assert!(!parabolic.canonical);
    }
}
