//! The reduced set `M̂ ⊂ M_r`, its first-return map and the labelled orbit
//! segments `(F⁻¹x₀, x₀, x₁, …, F^{n₁}x₁, x₂, Fx₂)` together with the
//! matrices `D` and `G` built from them.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{billiard_inverse, billiard_step, CollisionEvent};
use crate::error::{Error, Result};
use crate::geometry::{ArcLabel, LemonTable};
use crate::phase::{in_u_delta, PhasePoint};
use crate::tangent::{segment_jacobian, Mat2};

/// Cap on the number of steps searched for a return to `M̂`.
pub const RETURN_CAP: u64 = 10_000_000;

/// An orbit window around a base point, extended lazily in both directions.
///
/// Index `0` is the base point; negative indices run backwards in time.
#[derive(Debug, Clone)]
pub struct Trajectory<'t> {
    table: &'t LemonTable,
    points: VecDeque<PhasePoint>,
    /// Free path into each point, when its predecessor is known.
    tau_in: VecDeque<Option<f64>>,
    /// Index of `points[0]`.
    first: i64,
}

impl<'t> Trajectory<'t> {
    pub fn new(table: &'t LemonTable, x: PhasePoint) -> Self {
        Trajectory {
            table,
            points: VecDeque::from([x]),
            tau_in: VecDeque::from([None]),
            first: 0,
        }
    }

    pub fn table(&self) -> &'t LemonTable {
        self.table
    }

    fn last(&self) -> i64 {
        self.first + self.points.len() as i64 - 1
    }

    fn extend_to(&mut self, k: i64) -> Result<()> {
        while self.last() < k {
            let x = *self.points.back().expect("nonempty");
            let e = billiard_step(self.table, &x).into_result()?;
            self.points.push_back(e.point);
            self.tau_in.push_back(e.tau_prev);
        }
        while self.first > k {
            let x = *self.points.front().expect("nonempty");
            let e = billiard_inverse(self.table, &x).into_result()?;
            self.tau_in[0] = e.tau_prev;
            self.points.push_front(e.point);
            self.tau_in.push_front(None);
            self.first -= 1;
        }
        Ok(())
    }

    pub fn point(&mut self, k: i64) -> Result<PhasePoint> {
        self.extend_to(k)?;
        Ok(self.points[(k - self.first) as usize])
    }

    pub fn arc(&mut self, k: i64) -> Result<ArcLabel> {
        Ok(self.point(k)?.arc)
    }

    /// Collision events `from..=to`; the first carries no free path.
    pub fn events(&mut self, from: i64, to: i64) -> Result<Vec<CollisionEvent>> {
        self.extend_to(from)?;
        self.extend_to(to)?;
        Ok((from..=to)
            .map(|k| {
                let i = (k - self.first) as usize;
                let point = self.points[i];
                CollisionEvent {
                    point,
                    tau_prev: if k == from { None } else { self.tau_in[i] },
                    d: point.d(self.table),
                }
            })
            .collect())
    }

    /// Free path from `k − 1` to `k`.
    pub fn tau_into(&mut self, k: i64) -> Result<f64> {
        self.extend_to(k - 1)?;
        self.extend_to(k)?;
        Ok(self.tau_in[(k - self.first) as usize].expect("predecessor is known"))
    }

    /// Whether the point at index `k` belongs to `M̂`.
    pub fn in_hat_m(&mut self, k: i64) -> Result<bool> {
        if self.arc(k)? != ArcLabel::Small {
            return Ok(false);
        }
        let delta = self.table.delta_star;
        if self.arc(k - 1)? == ArcLabel::Big {
            // x ∈ M_{r,n}^{in}: keep n = 0, and n = 1 outside U(δ*).
            if self.arc(k + 1)? == ArcLabel::Big {
                return Ok(true);
            }
            if self.arc(k + 2)? == ArcLabel::Big {
                let x = self.point(k)?;
                return Ok(!in_u_delta(self.table, &x, delta));
            }
            return Ok(false);
        }
        if self.arc(k - 2)? == ArcLabel::Big {
            // x = F y with y ∈ M_{r,n+1}^{in}.
            if self.arc(k + 1)? == ArcLabel::Big {
                let y = self.point(k - 1)?;
                return Ok(in_u_delta(self.table, &y, delta));
            }
            return Ok(true);
        }
        Ok(false)
    }
}

/// `x ∈ M̂`.
pub fn in_hat_m(table: &LemonTable, x: &PhasePoint) -> Result<bool> {
    Trajectory::new(table, *x).in_hat_m(0)
}

/// `σ(x) = min{n ≥ 1 : Fⁿx ∈ M̂}` and `F^σ x`.
pub fn first_return(table: &LemonTable, x: &PhasePoint) -> Result<(u64, PhasePoint)> {
    let mut traj = Trajectory::new(table, *x);
    let sigma = return_index(&mut traj)?;
    Ok((sigma as u64, traj.point(sigma)?))
}

fn return_index(traj: &mut Trajectory<'_>) -> Result<i64> {
    for k in 1..=RETURN_CAP as i64 {
        if traj.in_hat_m(k)? {
            return Ok(k);
        }
    }
    Err(Error::NoReturn(RETURN_CAP))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentCase {
    /// `n₁ = 0`, `d₁ ≥ 2r`.
    SingleTransverse,
    /// `n₁ = 0`, `d₁ < 2r`.
    SingleTangential,
    /// `n₁ ≥ 1`.
    Multiple,
}

impl SegmentCase {
    pub fn name(self) -> &'static str {
        match self {
            SegmentCase::SingleTransverse => "single_transverse",
            SegmentCase::SingleTangential => "single_tangential",
            SegmentCase::Multiple => "multiple",
        }
    }
}

/// The labelled orbit piece attached to a point of `M̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSegment {
    pub n0: u64,
    pub n1: u64,
    pub pre0: PhasePoint,
    pub x0: PhasePoint,
    pub x1: PhasePoint,
    pub x2: PhasePoint,
    pub post2: PhasePoint,
    pub tau0: f64,
    pub tau1: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    /// `n₁/(n₁+1)`.
    pub p: f64,
    /// Events from `F⁻¹x₀` to `Fx₂`, both included.
    pub events: Vec<CollisionEvent>,
}

impl ReturnSegment {
    pub fn case(&self, table: &LemonTable) -> SegmentCase {
        if self.n1 >= 1 {
            SegmentCase::Multiple
        } else if self.d1 >= 2.0 * table.r {
            SegmentCase::SingleTransverse
        } else {
            SegmentCase::SingleTangential
        }
    }

    /// Index of `x₂` inside [`ReturnSegment::events`].
    pub fn x2_index(&self) -> usize {
        self.n1 as usize + 3
    }

    /// Whether both neighbours `F⁻¹x₀` and `Fx₂` lie on `Γ_r`.
    pub fn extension_valid(&self) -> bool {
        self.pre0.arc == ArcLabel::Small && self.post2.arc == ArcLabel::Small
    }
}

/// The segment together with where it sits in the return window of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnWindow {
    pub segment: ReturnSegment,
    pub sigma: u64,
    /// Orbit index of `F⁻¹x₀` relative to `x` (may be `−1`).
    pub pre0_index: i64,
    /// Orbit index of `Fx₂` relative to `x`.
    pub post2_index: i64,
    /// `D_x F^σ`.
    pub jacobian: Mat2,
}

impl ReturnWindow {
    /// The extended segment lies within `(F^k x)_{0 ≤ k ≤ σ}`.
    pub fn extension_within_window(&self) -> bool {
        self.pre0_index >= 0 && self.post2_index <= self.sigma as i64
    }
}

fn segment_at(traj: &mut Trajectory<'_>, k0: i64, n0: u64) -> Result<ReturnSegment> {
    let k1 = k0 + 1;
    let mut k2 = k1 + 1;
    while traj.arc(k2)? == ArcLabel::Big {
        k2 += 1;
        if k2 - k1 > RETURN_CAP as i64 {
            return Err(Error::NeverLeaves(RETURN_CAP));
        }
    }
    let n1 = (k2 - k1 - 1) as u64;
    let events = traj.events(k0 - 1, k2 + 1)?;
    let table = traj.table();
    let (x0, x1, x2) = (traj.point(k0)?, traj.point(k1)?, traj.point(k2)?);
    Ok(ReturnSegment {
        n0,
        n1,
        pre0: traj.point(k0 - 1)?,
        x0,
        x1,
        x2,
        post2: traj.point(k2 + 1)?,
        tau0: traj.tau_into(k1)?,
        tau1: traj.tau_into(k2)?,
        d0: x0.d(table),
        d1: x1.d(table),
        d2: x2.d(table),
        p: n1 as f64 / (n1 as f64 + 1.0),
        events,
    })
}

/// Index of `x₀`: the first `k ≥ 0` on `Γ_r` whose successor is on `Γ_R`.
fn x0_index(traj: &mut Trajectory<'_>) -> Result<i64> {
    if traj.arc(0)? != ArcLabel::Small {
        return Err(Error::Domain("segments start on the small arc".into()));
    }
    let mut k = 0;
    while traj.arc(k + 1)? == ArcLabel::Small {
        k += 1;
        if k as u64 > crate::dynamics::REMAINING_CAP {
            return Err(Error::NeverLeaves(crate::dynamics::REMAINING_CAP));
        }
    }
    Ok(k)
}

/// The segment attached to `x ∈ M_r`.
pub fn extract_segment(table: &LemonTable, x: &PhasePoint) -> Result<ReturnSegment> {
    let mut traj = Trajectory::new(table, *x);
    let k0 = x0_index(&mut traj)?;
    segment_at(&mut traj, k0, k0 as u64)
}

/// Segment, return time and return-window tangent map of `x ∈ M̂`.
pub fn return_window(table: &LemonTable, x: &PhasePoint) -> Result<ReturnWindow> {
    let mut traj = Trajectory::new(table, *x);
    let k0 = x0_index(&mut traj)?;
    let segment = segment_at(&mut traj, k0, k0 as u64)?;
    let sigma = return_index(&mut traj)?;
    let jacobian = segment_jacobian(&traj.events(0, sigma)?)?;
    Ok(ReturnWindow {
        pre0_index: k0 - 1,
        post2_index: k0 + segment.n1 as i64 + 3,
        segment,
        sigma: sigma as u64,
        jacobian,
    })
}

/// The point of `M̂` whose segment has entry point `x₁ ∈ M_R^{in}`.
pub fn hat_m_point_from_entry(table: &LemonTable, x1: &PhasePoint) -> Result<PhasePoint> {
    let mut traj = Trajectory::new(table, *x1);
    if x1.arc != ArcLabel::Big || traj.arc(-1)? != ArcLabel::Small {
        return Err(Error::Domain("entry point must lie in M_R^in".into()));
    }
    // Walk back over the Γ_r run ending in x₀ = F⁻¹x₁.
    let mut k = -1;
    while traj.arc(k - 1)? == ArcLabel::Small {
        k -= 1;
        if (-k) as u64 > crate::dynamics::REMAINING_CAP {
            return Err(Error::NeverLeaves(crate::dynamics::REMAINING_CAP));
        }
    }
    let n = (-1 - k) as u64;
    let y = traj.point(k)?;
    let pick_y = n == 0 || (n == 1 && !in_u_delta(table, &y, table.delta_star));
    if pick_y {
        Ok(y)
    } else {
        traj.point(k + 1)
    }
}

/// `(d₁d₂)·D_{x₀}F^{n₁+2}` from the closed-form expressions.
pub fn d_matrix(seg: &ReturnSegment) -> Mat2 {
    let (t0, t1, d0, d1, d2) = (seg.tau0, seg.tau1, seg.d0, seg.d1, seg.d2);
    if seg.n1 == 0 {
        return Mat2::new(
            2.0 * t1 * (t0 - d0) - d1 * (t0 - d0 + t1),
            2.0 * t1 * t0 - d1 * (t0 + t1),
            2.0 * (t1 - d2) * (t0 - d0) - d1 * (t0 - d0 + t1 - d2),
            2.0 * (t1 - d2) * t0 - d1 * (t0 + t1 - d2),
        );
    }
    let k = seg.n1 as f64 + 1.0;
    let p = seg.p;
    Mat2::new(
        k * ((t1 - d1) * (t0 - d0 - p * d1) + (t1 - p * d1) * (t0 - d0 - d1)),
        k * ((t1 - d1) * (t0 - p * d1) + (t1 - p * d1) * (t0 - d1)),
        k * ((t1 - d1 - d2) * (t0 - d0 - p * d1) + (t1 - p * d1 - d2) * (t0 - d0 - d1)),
        k * ((t1 - d1 - d2) * (t0 - p * d1) + (t1 - p * d1 - d2) * (t0 - d1)),
    )
}

/// `S·D·S` with `S` the shear, i.e. `(d₁d₂)·D_{F⁻¹x₀}F^{n₁+4}`.
pub fn g_matrix(seg: &ReturnSegment) -> Result<Mat2> {
    if seg.pre0.arc != ArcLabel::Small {
        return Err(Error::ExtensionInvalid("F^-1 x0 is not on the small arc"));
    }
    if seg.post2.arc != ArcLabel::Small {
        return Err(Error::ExtensionInvalid("F x2 is not on the small arc"));
    }
    let d = d_matrix(seg);
    Ok(Mat2::new(
        d.a11 + 2.0 * d.a21,
        2.0 * d.a11 + 4.0 * d.a21 + d.a12 + 2.0 * d.a22,
        d.a21,
        2.0 * d.a21 + d.a22,
    ))
}

/// `D` by multiplying step tangent maps from `x₀` to `x₂`.
pub fn d_matrix_by_product(seg: &ReturnSegment) -> Result<Mat2> {
    let j = segment_jacobian(&seg.events[1..=seg.x2_index()])?;
    Ok(j.scale(seg.d1 * seg.d2))
}

/// `G` by multiplying step tangent maps from `F⁻¹x₀` to `Fx₂`.
pub fn g_matrix_by_product(seg: &ReturnSegment) -> Result<Mat2> {
    Ok(segment_jacobian(&seg.events)?.scale(seg.d1 * seg.d2))
}

pub const SEGMENT_CSV_HEADER: &str =
    "n0,n1,phi0,theta0,phi1,theta1,phi2,theta2,tau0,tau1,d0,d1,d2,case,G11,G12,G21,G22";

/// One CSV row; the `G` columns are empty when the extension is invalid.
pub fn segment_csv_row(table: &LemonTable, seg: &ReturnSegment) -> String {
    let f = |v: f64| format!("{v:.16e}");
    let g = match g_matrix(seg) {
        Ok(g) => g.entries().map(f).join(","),
        Err(_) => ",,,".to_string(),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        seg.n0,
        seg.n1,
        f(seg.x0.phi),
        f(seg.x0.theta),
        f(seg.x1.phi),
        f(seg.x1.theta),
        f(seg.x2.phi),
        f(seg.x2.theta),
        f(seg.tau0),
        f(seg.tau1),
        f(seg.d0),
        f(seg.d1),
        f(seg.d2),
        seg.case(table).name(),
        g
    )
}

pub fn write_segments_csv<W: Write>(
    out: &mut W,
    table: &LemonTable,
    segments: &[ReturnSegment],
) -> Result<()> {
    writeln!(out, "{SEGMENT_CSV_HEADER}")?;
    for s in segments {
        writeln!(out, "{}", segment_csv_row(table, s))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::orbit;
    use crate::phase::in_v_delta;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn axis_segment() {
        let t = LemonTable::new(FRAC_PI_2, 2.0).unwrap();
        let x = PhasePoint::small(PI, FRAC_PI_2);
        assert!(in_hat_m(&t, &x).unwrap());
        let seg = extract_segment(&t, &x).unwrap();
        assert_eq!((seg.n0, seg.n1), (0, 0));
        assert_eq!(seg.x0, x);
        assert_eq!(seg.d1, 2.0);
        assert_eq!(seg.case(&t), SegmentCase::SingleTransverse);
        assert!(!seg.extension_valid());
        assert!(matches!(g_matrix(&seg), Err(Error::ExtensionInvalid(_))));
        let (sigma, y) = first_return(&t, &x).unwrap();
        assert_eq!(sigma, 2);
        assert!(y.distance(&x) < 1e-12);
    }

    #[test]
    fn big_arc_points_are_not_in_hat_m() {
        let t = LemonTable::new(FRAC_PI_4, 1800.0).unwrap();
        assert!(!in_hat_m(&t, &PhasePoint::big(0.0, 1.0)).unwrap());
    }

    #[test]
    fn d_closed_forms_agree() {
        // The p-form at p = 0 reproduces the single-reflection form.
        let seg = ReturnSegment {
            n0: 0,
            n1: 0,
            pre0: PhasePoint::small(3.0, 1.0),
            x0: PhasePoint::small(3.0, 1.0),
            x1: PhasePoint::big(0.0, 1.0),
            x2: PhasePoint::small(3.0, 1.0),
            post2: PhasePoint::small(3.0, 1.0),
            tau0: 1.3,
            tau1: 0.9,
            d0: 0.4,
            d1: 0.7,
            d2: 0.5,
            p: 0.0,
            events: vec![],
        };
        let d = d_matrix(&seg);
        let (t0, t1, d0, d1, d2) = (1.3, 0.9, 0.4, 0.7, 0.5);
        let df2 = Mat2::new(
            (t1 - d1) * (t0 - d0) + t1 * (t0 - d0 - d1),
            (t1 - d1) * t0 + t1 * (t0 - d1),
            (t1 - d1 - d2) * (t0 - d0) + (t1 - d2) * (t0 - d0 - d1),
            (t1 - d1 - d2) * t0 + (t1 - d2) * (t0 - d1),
        );
        assert!(d.rel_diff(&df2) < 1e-15);
        assert!((d.a12 - (2.0 * t1 * t0 - d1 * (t0 + t1))).abs() < 1e-15);
        let g = g_matrix(&seg).unwrap();
        let s = Mat2::SHEAR;
        assert!(g.rel_diff(&(s * d * s)).abs() < 1e-15);
        assert_eq!(g.a21, d.a21);
    }

    #[test]
    fn g_for_two_reflections_on_the_big_arc() {
        let (t0, t1, d0, d1, d2) = (0.61, 0.58, 0.69, 0.33, 0.71);
        let seg = ReturnSegment {
            n0: 1,
            n1: 1,
            pre0: PhasePoint::small(3.0, 1.0),
            x0: PhasePoint::small(3.0, 1.0),
            x1: PhasePoint::big(0.0, 1.0),
            x2: PhasePoint::small(3.0, 1.0),
            post2: PhasePoint::small(3.0, 1.0),
            tau0: t0,
            tau1: t1,
            d0,
            d1,
            d2,
            p: 0.5,
            events: vec![],
        };
        let g = g_matrix(&seg).unwrap();
        let g11 = 6.0 * (t1 - d1 - 2.0 / 3.0 * d2) * (t0 - d0 - 0.5 * d1)
            + 6.0 * (t1 - 0.5 * d1 - 2.0 / 3.0 * d2) * (t0 - d0 - d1);
        assert!((g.a11 - g11).abs() < 1e-14);
        // D = J₁ S J₀ scaled by d₁d₂.
        let j0 = crate::tangent::jacobian_from(t0, d0, d1);
        let j1 = crate::tangent::jacobian_from(t1, d1, d2);
        let prod = (j1 * Mat2::SHEAR * j0).scale(d1 * d2);
        assert!(d_matrix(&seg).rel_diff(&prod) < 1e-14);
    }

    #[test]
    fn segment_walk_matches_orbit() {
        let t = LemonTable::new(0.6, 40.0).unwrap();
        let x = billiard_step(&t, &PhasePoint::big(0.0, 2.8)).into_result().unwrap().point;
        let seg = extract_segment(&t, &x).unwrap();
        let o = orbit(&t, x, seg.n0 as usize + seg.n1 as usize + 3);
        let ev = &o.events;
        assert_eq!(ev[seg.n0 as usize].point, seg.x0);
        assert_eq!(ev[seg.n0 as usize + 1].point, seg.x1);
        assert_eq!(ev[seg.n0 as usize + seg.n1 as usize + 2].point, seg.x2);
        assert_eq!(ev[seg.n0 as usize + 1].tau_prev.unwrap(), seg.tau0);
        let prod = d_matrix_by_product(&seg).unwrap();
        assert!(d_matrix(&seg).rel_diff(&prod) < 1e-9);
    }

    #[test]
    fn return_window_and_entry_inverse() {
        let t = LemonTable::new(FRAC_PI_4, 1800.0).unwrap();
        // A grazing entry near the lower end of Γ_R.
        let x1 = PhasePoint::big(-0.0002, 0.0004);
        let prev = billiard_inverse(&t, &x1).into_result().unwrap().point;
        assert_eq!(prev.arc, ArcLabel::Small);
        let x = hat_m_point_from_entry(&t, &x1).unwrap();
        assert!(in_hat_m(&t, &x).unwrap());
        let w = return_window(&t, &x).unwrap();
        assert!(w.segment.x1.distance(&x1) < 1e-12);
        assert!(w.segment.d1 < 2.0);
        assert!(in_v_delta(&t, &w.segment.x0, t.delta_star));
        assert!(in_u_delta(&t, &w.segment.x2, t.delta_star));
        assert!(w.extension_within_window());
        assert!((w.jacobian.det() - x.d(&t) / billiard_step_chain_d(&t, &x, w.sigma)).abs() < 1e-9);
    }

    fn billiard_step_chain_d(t: &LemonTable, x: &PhasePoint, n: u64) -> f64 {
        let o = orbit(t, *x, n as usize);
        o.events.last().unwrap().d
    }
}
