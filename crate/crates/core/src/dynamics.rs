//! The billiard map `F`, its inverse, orbits and the arc-exit bookkeeping.
//!
//! Steps are closed-form. A chord that starts and ends on the same circle is
//! the rotation `φ ↦ φ + 2θ`, evaluated exactly so that repeated reflections
//! on one arc accumulate no geometric error. Cross-arc chords are found by
//! intersecting the ray with the other circle.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArcLabel, LemonTable, Point};
use crate::phase::{PhasePoint, RegionTag};

/// Arrivals closer than this arc length to a corner are singular.
pub const CORNER_TOL: f64 = 1e-9;
/// Directions closer than this to the tangent line are singular.
pub const TANGENT_TOL: f64 = 1e-12;
/// Cap on the number of consecutive small-arc reflections followed.
pub const REMAINING_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    A,
    B,
}

/// Why a step could not be taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Singularity {
    Corner { corner: Corner, distance: f64 },
    Tangential,
}

impl fmt::Display for Singularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Singularity::Corner { corner, distance } => {
                write!(f, "corner {corner:?} hit at distance {distance:e}")
            }
            Singularity::Tangential => f.write_str("tangential direction"),
        }
    }
}

/// One collision. `tau_prev` is the free path into it (absent for the first
/// event of an orbit); `d` is `ρ sin θ` at the collision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub point: PhasePoint,
    pub tau_prev: Option<f64>,
    pub d: f64,
}

impl CollisionEvent {
    pub fn start(table: &LemonTable, point: PhasePoint) -> Self {
        CollisionEvent { point, tau_prev: None, d: point.d(table) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Next(CollisionEvent),
    CornerHit { corner: Corner, distance: f64 },
    TangentialEscape,
}

impl StepOutcome {
    pub fn into_result(self) -> Result<CollisionEvent> {
        match self {
            StepOutcome::Next(e) => Ok(e),
            StepOutcome::CornerHit { corner, distance } => {
                Err(Error::Singularity(Singularity::Corner { corner, distance }))
            }
            StepOutcome::TangentialEscape => Err(Error::Singularity(Singularity::Tangential)),
        }
    }
}

/// `(sin φ, cos φ)` evaluated about the middle of the arc, so that the
/// symmetry axis (`φ = π` on `Γ_r`, `φ = 0` on `Γ_R`) is exact.
fn arc_sin_cos(arc: ArcLabel, phi: f64) -> (f64, f64) {
    match arc {
        ArcLabel::Small => {
            let (s, c) = (phi - PI).sin_cos();
            (-s, -c)
        }
        ArcLabel::Big => phi.sin_cos(),
    }
}

/// `(sin θ, cos θ)` evaluated about `π/2`.
fn theta_sin_cos(theta: f64) -> (f64, f64) {
    let (s, c) = (theta - FRAC_PI_2).sin_cos();
    (c, -s)
}

/// Direction of the trajectory leaving `x`.
fn direction(arc: ArcLabel, phi: f64, theta: f64) -> Point {
    // cos θ · tangent + sin θ · inward normal, tangent = (−sin φ, cos φ).
    let (sp, cp) = arc_sin_cos(arc, phi);
    let (st, ct) = theta_sin_cos(theta);
    Point::new(-ct * sp - st * cp, ct * cp - st * sp)
}

/// Largest root of `|w + s v|² = ρ²` for a ray starting inside the circle.
fn exit_time(w: Point, v: Point, radius: f64) -> f64 {
    let half_b = v.dot(w);
    let c = (w.norm() - radius) * (w.norm() + radius);
    let disc = (half_b * half_b - c).max(0.0).sqrt();
    if half_b <= 0.0 {
        disc - half_b
    } else {
        // Both terms positive only when c < 0; avoid cancellation.
        -c / (half_b + disc)
    }
}

fn same_arc(x: &PhasePoint, phi: f64, radius: f64) -> StepOutcome {
    let d = radius * x.theta.sin();
    StepOutcome::Next(CollisionEvent {
        point: PhasePoint { arc: x.arc, phi, theta: x.theta },
        tau_prev: Some(2.0 * d),
        d,
    })
}

fn corner_hit(corner: Corner, distance: f64) -> StepOutcome {
    StepOutcome::CornerHit { corner, distance }
}

/// One application of the billiard map.
pub fn billiard_step(table: &LemonTable, x: &PhasePoint) -> StepOutcome {
    if !(x.theta >= TANGENT_TOL && PI - x.theta >= TANGENT_TOL) {
        return StepOutcome::TangentialEscape;
    }
    let psi = x.phi + 2.0 * x.theta;
    match x.arc {
        ArcLabel::Small => {
            let tol = CORNER_TOL / table.r;
            let hi = TAU - table.phi_star;
            let wrap = TAU + table.phi_star;
            if psi < hi - tol {
                same_arc(x, psi, table.r)
            } else if psi <= hi + tol {
                corner_hit(Corner::B, table.r * (psi - hi).abs())
            } else if psi < wrap - tol {
                cross_arc(table, x, ArcLabel::Big)
            } else if psi <= wrap + tol {
                corner_hit(Corner::A, table.r * (psi - wrap).abs())
            } else {
                same_arc(x, psi - TAU, table.r)
            }
        }
        ArcLabel::Big => {
            let tol = CORNER_TOL / table.big_r;
            let hi = table.big_phi_star;
            let wrap = TAU - table.big_phi_star;
            if psi < hi - tol {
                same_arc(x, psi, table.big_r)
            } else if psi <= hi + tol {
                corner_hit(Corner::A, table.big_r * (psi - hi).abs())
            } else if psi < wrap - tol {
                cross_arc(table, x, ArcLabel::Small)
            } else if psi <= wrap + tol {
                corner_hit(Corner::B, table.big_r * (psi - wrap).abs())
            } else {
                same_arc(x, psi - TAU, table.big_r)
            }
        }
    }
}

fn cross_arc(table: &LemonTable, x: &PhasePoint, to: ArcLabel) -> StepOutcome {
    let from_center = table.center(x.arc);
    let (sp, cp) = arc_sin_cos(x.arc, x.phi);
    let rho = table.radius(x.arc);
    let start = from_center + Point::new(rho * cp, rho * sp);
    let v = direction(x.arc, x.phi, x.theta);
    let center = table.center(to);
    let radius = table.radius(to);
    let s = exit_time(start - center, v, radius);
    if !(s > 1e-12 * table.r) {
        // Leaving a corner straight out of the table.
        let corner = if x.phi < PI && x.arc == ArcLabel::Small || x.arc == ArcLabel::Big && x.phi > 0.0 {
            Corner::A
        } else {
            Corner::B
        };
        return corner_hit(corner, 0.0);
    }
    let q = start + s * v;
    let da = q.distance(table.corner_a);
    let db = q.distance(table.corner_b);
    if da <= CORNER_TOL * table.r {
        return corner_hit(Corner::A, da);
    }
    if db <= CORNER_TOL * table.r {
        return corner_hit(Corner::B, db);
    }
    let rel = q - center;
    let mut phi = rel.y.atan2(rel.x);
    if to == ArcLabel::Small && phi < 0.0 {
        phi += TAU;
    }
    let (lo, hi) = table.arc_range(to);
    if !(phi > lo && phi < hi) {
        // Only reachable within rounding of a corner.
        return if da < db { corner_hit(Corner::A, da) } else { corner_hit(Corner::B, db) };
    }
    let (sp, cp) = arc_sin_cos(to, phi);
    let tangent = Point::new(-sp, cp);
    let inward = Point::new(-cp, -sp);
    // Reflection keeps the tangential component and flips the normal one.
    let theta = (-v.dot(inward)).atan2(v.dot(tangent));
    if !(theta >= TANGENT_TOL && PI - theta >= TANGENT_TOL) {
        return StepOutcome::TangentialEscape;
    }
    let point = PhasePoint { arc: to, phi, theta };
    StepOutcome::Next(CollisionEvent { point, tau_prev: Some(s), d: point.d(table) })
}

/// `F⁻¹ = I ∘ F ∘ I`.
pub fn billiard_inverse(table: &LemonTable, x: &PhasePoint) -> StepOutcome {
    match billiard_step(table, &x.involution()) {
        StepOutcome::Next(e) => StepOutcome::Next(CollisionEvent {
            point: e.point.involution(),
            ..e
        }),
        other => other,
    }
}

/// A forward orbit, possibly cut short by a singularity.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub events: Vec<CollisionEvent>,
    pub stopped: Option<Singularity>,
}

pub fn orbit(table: &LemonTable, x: PhasePoint, n_steps: usize) -> Orbit {
    let mut events = Vec::with_capacity(n_steps + 1);
    events.push(CollisionEvent::start(table, x));
    let mut current = x;
    for _ in 0..n_steps {
        match billiard_step(table, &current).into_result() {
            Ok(e) => {
                current = e.point;
                events.push(e);
            }
            Err(Error::Singularity(s)) => return Orbit { events, stopped: Some(s) },
            Err(_) => unreachable!("billiard_step only fails with a singularity"),
        }
    }
    Orbit { events, stopped: None }
}

pub const ORBIT_CSV_HEADER: &str = "step,arc,phi,theta,tau_prev,d";

/// One row per collision; `tau_prev` is empty for the initial point.
pub fn write_orbit_csv<W: Write>(out: &mut W, orbit: &Orbit) -> Result<()> {
    writeln!(out, "{ORBIT_CSV_HEADER}")?;
    for (k, e) in orbit.events.iter().enumerate() {
        let tau = e.tau_prev.map(|t| format!("{t:.16e}")).unwrap_or_default();
        writeln!(
            out,
            "{k},{},{:.16e},{:.16e},{tau},{:.16e}",
            e.point.arc.name(),
            e.point.phi,
            e.point.theta,
            e.d
        )?;
    }
    Ok(())
}

/// Result of counting remaining reflections on the small arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Remaining {
    Count(u64),
    NeverLeaves,
}

/// `n(x)`: the smallest `n ≥ 0` such that `Fⁿx ∈ M_r^{out}`.
pub fn remaining_reflections(table: &LemonTable, x: &PhasePoint) -> Result<Remaining> {
    if x.arc != ArcLabel::Small {
        return Err(Error::Domain("remaining reflections need a small-arc point".into()));
    }
    let mut current = *x;
    for n in 0..=REMAINING_CAP {
        let e = billiard_step(table, &current).into_result()?;
        if e.point.arc == ArcLabel::Big {
            return Ok(Remaining::Count(n));
        }
        current = e.point;
    }
    Ok(Remaining::NeverLeaves)
}

fn count_or_err(r: Remaining) -> Result<u64> {
    match r {
        Remaining::Count(n) => Ok(n),
        Remaining::NeverLeaves => Err(Error::NeverLeaves(REMAINING_CAP)),
    }
}

pub fn region_of(table: &LemonTable, x: &PhasePoint) -> Result<RegionTag> {
    let prev = billiard_inverse(table, x).into_result()?;
    let next = billiard_step(table, x).into_result()?;
    let came_in = prev.point.arc != x.arc;
    let goes_out = next.point.arc != x.arc;
    Ok(match (x.arc, came_in, goes_out) {
        (ArcLabel::Small, true, true) => RegionTag::MrBoth,
        (ArcLabel::Small, true, false) => {
            RegionTag::MrIn(count_or_err(remaining_reflections(table, x)?)?)
        }
        (ArcLabel::Small, false, true) => {
            RegionTag::MrOut(count_or_err(remaining_reflections(table, &x.involution())?)?)
        }
        (ArcLabel::Small, false, false) => RegionTag::MrInterior,
        (ArcLabel::Big, true, true) => RegionTag::MRBoth,
        (ArcLabel::Big, true, false) => RegionTag::MRIn,
        (ArcLabel::Big, false, true) => RegionTag::MROut,
        (ArcLabel::Big, false, false) => RegionTag::MRInterior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::reference_points;
    use std::f64::consts::FRAC_PI_4;

    fn axis_table() -> LemonTable {
        LemonTable::new(FRAC_PI_2, 2.0).unwrap()
    }

    #[test]
    fn axis_step_lands_on_big_arc_vertex() {
        let t = axis_table();
        let e = billiard_step(&t, &PhasePoint::small(PI, FRAC_PI_2)).into_result().unwrap();
        assert_eq!(e.point.arc, ArcLabel::Big);
        assert!(e.point.phi.abs() < 1e-15);
        assert!((e.point.theta - FRAC_PI_2).abs() < 1e-15);
        // Oracle: |(R, 0) − (b − r, 0)| with b = √3.
        let oracle = 2.0 - (3f64.sqrt() - 1.0);
        assert!((e.tau_prev.unwrap() - oracle).abs() < 1e-15);
        assert!((oracle - 1.267_949_192_431_122_7).abs() < 1e-15);
        assert_eq!(e.d, 2.0);
    }

    #[test]
    fn axis_inverse() {
        let t = axis_table();
        let e = billiard_inverse(&t, &PhasePoint::big(0.0, FRAC_PI_2)).into_result().unwrap();
        assert_eq!(e.point.arc, ArcLabel::Small);
        assert!((e.point.phi - PI).abs() < 1e-15);
        assert!((e.point.theta - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn same_arc_chord_is_rotation() {
        let t = LemonTable::new(FRAC_PI_4, 50.0).unwrap();
        let x = PhasePoint::small(2.0, 0.1);
        let e = billiard_step(&t, &x).into_result().unwrap();
        assert_eq!(e.point, PhasePoint::small(2.0 + 0.2, 0.1));
        assert_eq!(e.tau_prev.unwrap(), 2.0 * 0.1f64.sin());
        // Backwards-pointing chord wraps through 2π.
        let y = PhasePoint::small(2.0, PI - 0.1);
        let e = billiard_step(&t, &y).into_result().unwrap();
        assert!((e.point.phi - (2.0 - 0.2)).abs() < 1e-14);
    }

    #[test]
    fn chord_ab_is_singular() {
        let t = LemonTable::new(FRAC_PI_4, 1800.0).unwrap();
        let refs = reference_points(&t);
        match billiard_step(&t, &refs.x_star) {
            StepOutcome::CornerHit { corner, .. } => assert_eq!(corner, Corner::A),
            other => panic!("expected corner hit, got {other:?}"),
        }
        match billiard_step(&t, &refs.y_star) {
            StepOutcome::CornerHit { corner, .. } => assert_eq!(corner, Corner::B),
            other => panic!("expected corner hit, got {other:?}"),
        }
    }

    #[test]
    fn grazing_is_tangential_escape() {
        let t = LemonTable::new(FRAC_PI_4, 10.0).unwrap();
        assert_eq!(
            billiard_step(&t, &PhasePoint::small(2.0, 1e-13)),
            StepOutcome::TangentialEscape
        );
        assert_eq!(
            billiard_step(&t, &PhasePoint::small(2.0, PI - 1e-13)),
            StepOutcome::TangentialEscape
        );
    }

    #[test]
    fn orbit_truncation_and_period_two() {
        let t = axis_table();
        let start = PhasePoint::small(PI, FRAC_PI_2);
        let o = orbit(&t, start, 0);
        assert_eq!(o.events.len(), 1);
        assert!(o.events[0].tau_prev.is_none());
        let o = orbit(&t, start, 100);
        assert_eq!(o.events.len(), 101);
        assert!(o.stopped.is_none());
        for (k, e) in o.events.iter().enumerate() {
            let expect = if k % 2 == 0 { ArcLabel::Small } else { ArcLabel::Big };
            assert_eq!(e.point.arc, expect);
        }
        let last = o.events[100].point;
        assert!((last.phi - PI).abs() < 1e-9 && (last.theta - FRAC_PI_2).abs() < 1e-9);
        let refs = reference_points(&LemonTable::new(FRAC_PI_4, 1800.0).unwrap());
        let o = orbit(&LemonTable::new(FRAC_PI_4, 1800.0).unwrap(), refs.x_star, 5);
        assert_eq!(o.events.len(), 1);
        assert!(matches!(o.stopped, Some(Singularity::Corner { corner: Corner::A, .. })));
    }

    #[test]
    fn remaining_reflection_counts() {
        let t = axis_table();
        let x = PhasePoint::small(PI, FRAC_PI_2);
        assert_eq!(remaining_reflections(&t, &x).unwrap(), Remaining::Count(0));
        assert_eq!(region_of(&t, &x).unwrap(), RegionTag::MrBoth);
        // A diameter orbit between φ = 2 and φ = 2 + π never leaves Γ_r.
        let t = LemonTable::new(FRAC_PI_4, 100.0).unwrap();
        let x = PhasePoint::small(2.0, FRAC_PI_2);
        assert_eq!(remaining_reflections(&t, &x).unwrap(), Remaining::NeverLeaves);
        assert!(remaining_reflections(&t, &PhasePoint::big(0.0, 1.0)).is_err());
    }

    #[test]
    fn region_counts_match_orbit_walk() {
        let t = LemonTable::new(0.6, 40.0).unwrap();
        // Enter from the big arc with a shallow angle: several Γ_r hits.
        let x1 = PhasePoint::big(0.0, 2.8);
        let x = billiard_step(&t, &x1).into_result().unwrap().point;
        assert_eq!(x.arc, ArcLabel::Small);
        let tag = region_of(&t, &x).unwrap();
        let RegionTag::MrIn(n) = tag else { panic!("{tag:?}") };
        let o = orbit(&t, x, n as usize + 2);
        for k in 0..=n as usize {
            assert_eq!(o.events[k].point.arc, ArcLabel::Small);
        }
        assert_eq!(o.events[n as usize + 1].point.arc, ArcLabel::Big);
        assert_eq!(region_of(&t, &x.involution()).unwrap(), RegionTag::MrOut(n));
    }

    #[test]
    fn orbit_csv_rows() {
        let t = LemonTable::new(FRAC_PI_2, 2.0).unwrap();
        let o = orbit(&t, PhasePoint::small(PI, FRAC_PI_2), 2);
        let mut out = Vec::new();
        write_orbit_csv(&mut out, &o).unwrap();
        let text = String::from_utf8(out).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0], ORBIT_CSV_HEADER);
        assert!(rows[1].starts_with("0,small,3.1415926535897931e0,"));
        assert!(rows[1].contains(",,"));
        assert!(rows[2].starts_with("1,big,0.0000000000000000e0,"));
    }
}
