//! Tangent maps of `F` in `(φ, θ)` coordinates, defocusing classes and the
//! constant cone field `{uv ≥ 0}`.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::dynamics::{billiard_step, CollisionEvent, StepOutcome};
use crate::error::{Error, Result};
use crate::geometry::{ArcLabel, LemonTable};
use crate::phase::PhasePoint;

/// A real 2×2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    /// Tangent map between consecutive collisions on one circle.
    pub const SHEAR: Mat2 = Mat2::new(1.0, 2.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(s * self.a11, s * self.a12, s * self.a21, s * self.a22)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2::new(self.a22, -self.a12, -self.a21, self.a11).scale(1.0 / det))
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|a| a.is_finite())
    }

    /// Largest entrywise difference relative to the larger max-abs entry.
    pub fn rel_diff(&self, other: &Mat2) -> f64 {
        let scale = self.max_abs().max(other.max_abs()).max(f64::MIN_POSITIVE);
        self.entries()
            .iter()
            .zip(other.entries())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{:e}, {:e}], [{:e}, {:e}]]", self.a11, self.a12, self.a21, self.a22)
    }
}

/// `(1/d₁)·[[τ−d₀, τ], [τ−d₀−d₁, τ−d₁]]`.
pub fn jacobian_from(tau: f64, d0: f64, d1: f64) -> Mat2 {
    Mat2::new(tau - d0, tau, tau - d0 - d1, tau - d1).scale(1.0 / d1)
}

/// Tangent map for the step `from → to`, `to` carrying the free path.
///
/// Steps along one circle return the exact shear.
pub fn event_jacobian(from: &CollisionEvent, to: &CollisionEvent) -> Mat2 {
    if from.point.arc == to.point.arc {
        return Mat2::SHEAR;
    }
    let tau = to.tau_prev.expect("a step always records its free path");
    jacobian_from(tau, from.d, to.d)
}

/// `D_x F`.
pub fn step_jacobian(table: &LemonTable, x: &PhasePoint) -> Result<Mat2> {
    let next = billiard_step(table, x).into_result()?;
    Ok(event_jacobian(&CollisionEvent::start(table, *x), &next))
}

/// Ordered product of step tangent maps, last step leftmost.
pub fn segment_jacobian(events: &[CollisionEvent]) -> Result<Mat2> {
    if events.len() < 2 {
        return Err(Error::Domain("a segment needs at least two events".into()));
    }
    Ok(events
        .windows(2)
        .fold(Mat2::IDENTITY, |acc, w| event_jacobian(&w[0], &w[1]) * acc))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DefocusClass {
    PositivelyDefocusing,
    NegativelyDefocusing,
    Neither,
    /// Some nonzero entry lies within the sign tolerance of zero.
    Marginal(f64),
}

impl DefocusClass {
    pub fn is_defocusing(self) -> bool {
        matches!(self, DefocusClass::PositivelyDefocusing | DefocusClass::NegativelyDefocusing)
    }
}

/// Default sign tolerance: `1e-9` times the largest entry.
pub fn default_sign_tol(m: &Mat2) -> f64 {
    1e-9 * m.max_abs()
}

/// Sign class of a matrix.
///
/// Exact zeros are structural (for instance the shear) and give `Neither`;
/// a nonzero entry inside `sign_tol` gives `Marginal` unless the strict
/// signs of the others already disagree.
pub fn classify_defocusing(m: &Mat2, sign_tol: f64) -> DefocusClass {
    let e = m.entries();
    if e.iter().any(|a| *a == 0.0 || !a.is_finite()) {
        return DefocusClass::Neither;
    }
    let strict_pos = e.iter().any(|a| *a > sign_tol);
    let strict_neg = e.iter().any(|a| *a < -sign_tol);
    if strict_pos && strict_neg {
        return DefocusClass::Neither;
    }
    let smallest = e.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()));
    if smallest <= sign_tol {
        return DefocusClass::Marginal(smallest);
    }
    if strict_pos {
        DefocusClass::PositivelyDefocusing
    } else {
        DefocusClass::NegativelyDefocusing
    }
}

pub fn classify_defocusing_default(m: &Mat2) -> DefocusClass {
    classify_defocusing(m, default_sign_tol(m))
}

/// Whether `m` maps the cone `{uv ≥ 0}` into itself.
pub fn cone_maps_into(m: &Mat2) -> bool {
    let e = m.entries();
    if e.iter().all(|a| *a > 0.0) || e.iter().all(|a| *a < 0.0) {
        return true;
    }
    let nonneg = e.iter().all(|a| *a >= 0.0);
    let nonpos = e.iter().all(|a| *a <= 0.0);
    (nonneg || nonpos) && m.det() > 0.0
}

/// Fourth-order central differences of `F` in `(φ, θ)` with step `h`.
///
/// On the big arc `φ` only ranges over `(−Φ*, Φ*)`, so the second-order
/// stencil loses accuracy there for large `R`. All perturbed points must land
/// on the same arc as the unperturbed image; otherwise the difference
/// quotient straddles a singularity.
pub fn finite_diff_jacobian(table: &LemonTable, x: &PhasePoint, h: f64) -> Result<Mat2> {
    let centre = billiard_step(table, x).into_result()?.point;
    let image = |dphi: f64, dtheta: f64| -> Result<PhasePoint> {
        let p = PhasePoint { phi: x.phi + dphi, theta: x.theta + dtheta, ..*x };
        match billiard_step(table, &p) {
            StepOutcome::Next(e) if e.point.arc == centre.arc => Ok(e.point),
            _ => Err(Error::ItineraryChange),
        }
    };
    // Same-arc images may straddle the 2π seam on the small arc.
    let unwrap = |phi: f64| {
        if centre.arc == ArcLabel::Small {
            let d = phi - centre.phi;
            centre.phi + d - TAU * (d / TAU).round()
        } else {
            phi
        }
    };
    let column = |dir: [f64; 2]| -> Result<[f64; 2]> {
        let mut acc = [0.0; 2];
        for (k, w) in [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)] {
            let p = image(k * h * dir[0], k * h * dir[1])?;
            acc[0] += w * unwrap(p.phi);
            acc[1] += w * p.theta;
        }
        Ok([acc[0] / (12.0 * h), acc[1] / (12.0 * h)])
    };
    let (c1, c2) = (column([1.0, 0.0])?, column([0.0, 1.0])?);
    Ok(Mat2::new(c1[0], c2[0], c1[1], c2[1]))
}
