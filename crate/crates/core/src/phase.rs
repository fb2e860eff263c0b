//! Phase-space points, the time-reversal involution and the neighborhoods
//! `U(δ)`, `V(δ)` of the trajectories running along the chord `AB`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::dynamics::{billiard_step, StepOutcome};
use crate::error::{Error, Result};
use crate::geometry::{ArcLabel, LemonTable};

/// A unit inward vector at a boundary point: arc, position angle `φ` and
/// angle `θ ∈ (0, π)` measured from the positive (counterclockwise) tangent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub arc: ArcLabel,
    pub phi: f64,
    pub theta: f64,
}

impl PhasePoint {
    /// Checked constructor.
    pub fn new(table: &LemonTable, arc: ArcLabel, phi: f64, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::Domain(format!("theta = {theta} outside (0, pi)")));
        }
        let (lo, hi) = table.arc_range(arc);
        let inside = match arc {
            ArcLabel::Small => phi >= lo && phi <= hi,
            ArcLabel::Big => phi > lo && phi < hi,
        };
        if !inside {
            return Err(Error::Range { arc: arc.name(), phi });
        }
        Ok(PhasePoint { arc, phi, theta })
    }

    pub const fn small(phi: f64, theta: f64) -> Self {
        PhasePoint { arc: ArcLabel::Small, phi, theta }
    }

    pub const fn big(phi: f64, theta: f64) -> Self {
        PhasePoint { arc: ArcLabel::Big, phi, theta }
    }

    pub fn involution(self) -> Self {
        PhasePoint { theta: PI - self.theta, ..self }
    }

    /// Half the length of the chord cut by the trajectory in the osculating
    /// circle, `ρ sin θ`.
    pub fn d(&self, table: &LemonTable) -> f64 {
        table.radius(self.arc) * self.theta.sin()
    }

    /// Euclidean distance in `(φ, θ)`; infinite across arcs.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        if self.arc != other.arc {
            return f64::INFINITY;
        }
        (self.phi - other.phi).hypot(self.theta - other.theta)
    }

    /// Image under the reflection of the table in its symmetry axis.
    pub fn mirrored(self) -> Self {
        let phi = match self.arc {
            ArcLabel::Small => TAU - self.phi,
            ArcLabel::Big => -self.phi,
        };
        PhasePoint { arc: self.arc, phi, theta: PI - self.theta }
    }
}

/// `I(φ, θ) = (φ, π − θ)`.
pub fn involution(x: PhasePoint) -> PhasePoint {
    x.involution()
}

/// Where a point sits in the partition of phase space by the arcs of its
/// neighbors in the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionTag {
    /// `M_{r,n}^{in}`, `n ≥ 1`: came from `Γ_R`, `n` more reflections on `Γ_r`.
    MrIn(u64),
    /// `M_{r,n}^{out}`, `n ≥ 1`: leaves for `Γ_R` next, `n` reflections on
    /// `Γ_r` since arriving.
    MrOut(u64),
    /// `M_{r,0}^{in} = M_{r,0}^{out}`: both neighbors on `Γ_R`.
    MrBoth,
    /// Both neighbors on `Γ_r`.
    MrInterior,
    MRIn,
    MROut,
    /// Both neighbors on `Γ_r` (single reflection on `Γ_R`).
    MRBoth,
    /// Both neighbors on `Γ_R`.
    MRInterior,
}

impl RegionTag {
    /// The tag of `I x` given the tag of `x`.
    pub fn reversed(self) -> Self {
        match self {
            RegionTag::MrIn(n) => RegionTag::MrOut(n),
            RegionTag::MrOut(n) => RegionTag::MrIn(n),
            RegionTag::MRIn => RegionTag::MROut,
            RegionTag::MROut => RegionTag::MRIn,
            other => other,
        }
    }
}

/// The points `x*`, `y*` of `M_r^{out}` whose trajectories run along the
/// chord `AB`, and their images `I x*`, `I y*` in `M_r^{in}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoints {
    pub x_star: PhasePoint,
    pub y_star: PhasePoint,
    pub ix_star: PhasePoint,
    pub iy_star: PhasePoint,
}

pub fn reference_points(table: &LemonTable) -> ReferencePoints {
    let p = table.phi_star;
    ReferencePoints {
        x_star: PhasePoint::small(TAU - p, p),
        y_star: PhasePoint::small(p, PI - p),
        ix_star: PhasePoint::small(TAU - p, PI - p),
        iy_star: PhasePoint::small(p, p),
    }
}

/// Whether the next collision of a small-arc point is on `Γ_R`.
///
/// Trajectories ending exactly in a corner are counted as leaving: this is
/// the closure of `M_r^{out}`, which differs from it on a null set and
/// contains `x*` and `y*`.
pub(crate) fn leaves_small_arc(table: &LemonTable, x: &PhasePoint) -> bool {
    if x.arc != ArcLabel::Small {
        return false;
    }
    match billiard_step(table, x) {
        StepOutcome::Next(e) => e.point.arc == ArcLabel::Big,
        StepOutcome::CornerHit { .. } => true,
        StepOutcome::TangentialEscape => false,
    }
}

/// `x ∈ V(δ)`: `x ∈ M_r^{out}` within distance `δ` of `x*` or `y*`.
pub fn in_v_delta(table: &LemonTable, x: &PhasePoint, delta: f64) -> bool {
    if x.arc != ArcLabel::Small {
        return false;
    }
    let refs = reference_points(table);
    let near = x.distance(&refs.x_star) < delta || x.distance(&refs.y_star) < delta;
    near && leaves_small_arc(table, x)
}

/// `x ∈ U(δ) = I(V(δ))`.
pub fn in_u_delta(table: &LemonTable, x: &PhasePoint, delta: f64) -> bool {
    in_v_delta(table, &x.involution(), delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn involution_examples() {
        let x = PhasePoint::small(PI, FRAC_PI_2);
        assert_eq!(x.involution(), x);
        let y = PhasePoint::small(FRAC_PI_4 + 0.1, 0.3);
        assert_eq!(y.involution(), PhasePoint::small(FRAC_PI_4 + 0.1, PI - 0.3));
    }

    #[test]
    fn reference_points_at_quarter_pi() {
        let t = LemonTable::new(FRAC_PI_4, 1800.0).unwrap();
        let refs = reference_points(&t);
        assert_eq!(refs.x_star, PhasePoint::small(7.0 * FRAC_PI_4, FRAC_PI_4));
        assert_eq!(refs.iy_star, PhasePoint::small(FRAC_PI_4, FRAC_PI_4));
        assert_eq!(refs.x_star.involution(), refs.ix_star);
        assert_eq!(refs.y_star.involution(), refs.iy_star);
        assert_eq!(refs.x_star.mirrored(), refs.y_star);
    }

    #[test]
    fn centers_belong_to_their_neighborhoods() {
        for &phi in &[0.3, FRAC_PI_4, 1.2] {
            let t = LemonTable::new(phi, 2000.0).unwrap();
            let refs = reference_points(&t);
            for delta in [1e-6, 0.1, t.delta_star] {
                assert!(in_v_delta(&t, &refs.x_star, delta));
                assert!(in_v_delta(&t, &refs.y_star, delta));
                assert!(in_u_delta(&t, &refs.iy_star, delta));
                assert!(in_u_delta(&t, &refs.ix_star, delta));
            }
        }
    }

    #[test]
    fn far_points_and_big_arc_are_outside() {
        let t = LemonTable::new(FRAC_PI_4, 1800.0).unwrap();
        let d = 0.05;
        let refs = reference_points(&t);
        // 2δ from x*, farther from y*.
        let x = PhasePoint::small(refs.x_star.phi - 2.0 * d, refs.x_star.theta);
        assert!(!in_v_delta(&t, &x, d));
        assert!(!in_u_delta(&t, &PhasePoint::big(0.0, 0.001), d));
        assert!(!in_v_delta(&t, &PhasePoint::big(0.0, 0.001), d));
    }

    #[test]
    fn inside_ball_but_not_leaving() {
        // (7π/4 − δ*/2, π/4 + 0.45δ*) is within δ* of x* but its chord ends at
        // φ + 2θ − 2π = π/4 + 0.4δ*, still on the small arc.
        let t = LemonTable::new(FRAC_PI_4, 1800.0).unwrap();
        let d = t.delta_star;
        let x = PhasePoint::small(7.0 * FRAC_PI_4 - d / 2.0, FRAC_PI_4 + d / 2.0 * 0.9);
        let endpoint = x.phi + 2.0 * x.theta - TAU;
        let oracle = !(endpoint >= t.phi_star && endpoint <= TAU - t.phi_star);
        assert!(!oracle);
        assert_eq!(in_v_delta(&t, &x, d), oracle);
    }

    #[test]
    fn checked_constructor() {
        let t = LemonTable::new(FRAC_PI_4, 100.0).unwrap();
        assert!(PhasePoint::new(&t, ArcLabel::Small, PI, 0.0).is_err());
        assert!(PhasePoint::new(&t, ArcLabel::Small, 0.1, 1.0).is_err());
        assert!(PhasePoint::new(&t, ArcLabel::Big, t.big_phi_star, 1.0).is_err());
        assert!(PhasePoint::new(&t, ArcLabel::Small, t.phi_star, 1.0).is_ok());
    }
}
