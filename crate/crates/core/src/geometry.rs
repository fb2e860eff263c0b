//! Table geometry for the asymmetric lemon `Q(φ*, R)`.
//!
//! The frame is fixed once and for all: the center of the big circle `O_R`
//! sits at the origin and the center of the small circle `O_r` at `(b, 0)`,
//! so the table is symmetric about the x-axis. Position angles on both arcs
//! are measured counterclockwise from the `O_R → O_r` direction (the positive
//! x-axis). The small arc `Γ_r` is the major arc `[φ*, 2π − φ*]`, the big arc
//! `Γ_R` the open arc `(−Φ*, Φ*)`. The corners `A` (upper) and `B` (lower)
//! belong to `Γ_r`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radius of the small circle. Every length in the crate is in units of it.
pub const SMALL_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point::new(radius * c, radius * s)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, p: Point) -> Point {
        Point::new(self * p.x, self * p.y)
    }
}

/// Which boundary arc a phase point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArcLabel {
    /// `Γ_r`, radius `r`, position angles in `[φ*, 2π − φ*]`.
    Small,
    /// `Γ_R`, radius `R`, position angles in `(−Φ*, Φ*)`.
    Big,
}

impl ArcLabel {
    pub fn name(self) -> &'static str {
        match self {
            ArcLabel::Small => "small",
            ArcLabel::Big => "big",
        }
    }
}

impl fmt::Display for ArcLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which lower bound on `R` to use for the hyperbolicity hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdVariant {
    /// Constants `{14.6, 147, 1773.7}` from the statement of the main theorem.
    #[default]
    Theorem,
    /// Constants `{16, 165, 1773.7}` obtained by collecting every bound used
    /// in the proof.
    Collected,
}

/// An asymmetric lemon table. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemonTable {
    pub r: f64,
    pub big_r: f64,
    /// Distance between the two centers.
    pub b: f64,
    /// Position angle of corner `A` seen from `O_r`.
    pub phi_star: f64,
    /// Position angle of corner `A` seen from `O_R`.
    pub big_phi_star: f64,
    /// `min(φ*, π/2 − φ*)`.
    pub delta_star: f64,
    pub corner_a: Point,
    pub corner_b: Point,
    pub center_small: Point,
    pub center_big: Point,
    /// False for harness tables whose `b` was chosen freely rather than from
    /// the corner-fixing relation.
    pub canonical: bool,
}

impl LemonTable {
    /// The table `Q(φ*, R)` with corners pinned on the unit circle at `±φ*`.
    ///
    /// `φ* = π/2` is accepted (the corners then sit on the diameter and the
    /// small arc is a half circle); the threshold radius diverges there.
    pub fn new(phi_star: f64, big_r: f64) -> Result<Self> {
        if !(phi_star > 0.0 && phi_star <= FRAC_PI_2) {
            return Err(Error::Domain(format!(
                "phi_star = {phi_star} outside (0, pi/2]"
            )));
        }
        let r = SMALL_RADIUS;
        if !(big_r.is_finite() && big_r >= r) {
            return Err(Error::Domain(format!("R = {big_r} must be finite and >= r")));
        }
        let (s, c) = phi_star.sin_cos();
        let big_phi_star = (r * s / big_r).asin();
        // (R² − r² sin²φ*)^{1/2} written to avoid cancellation for large R.
        let b = ((big_r - r * s) * (big_r + r * s)).sqrt() - r * c;
        if !(b > big_r - r && b < big_r + r) {
            return Err(Error::Domain(format!(
                "degenerate lemon: b = {b} not in (R - r, R + r) for R = {big_r}"
            )));
        }
        Ok(Self::assemble(r, big_r, b, phi_star, big_phi_star, true))
    }

    /// A harness table with a freely chosen center separation.
    ///
    /// Only `R − r < b < R + r` is required; the corner angles follow from
    /// intersecting the two circles. Such tables are flagged non-canonical.
    pub fn with_separation(big_r: f64, b: f64) -> Result<Self> {
        let r = SMALL_RADIUS;
        if !(big_r.is_finite() && big_r >= r) {
            return Err(Error::Domain(format!("R = {big_r} must be finite and >= r")));
        }
        if !(b > big_r - r && b < big_r + r) {
            return Err(Error::Domain(format!(
                "b = {b} not in (R - r, R + r) for R = {big_r}"
            )));
        }
        let x = (big_r * big_r - r * r + b * b) / (2.0 * b);
        let y = ((big_r - x) * (big_r + x)).max(0.0).sqrt();
        let phi_star = y.atan2(x - b);
        let big_phi_star = y.atan2(x);
        Ok(Self::assemble(r, big_r, b, phi_star, big_phi_star, false))
    }

    fn assemble(
        r: f64,
        big_r: f64,
        b: f64,
        phi_star: f64,
        big_phi_star: f64,
        canonical: bool,
    ) -> Self {
        let center_small = Point::new(b, 0.0);
        let corner_a = center_small + Point::polar(r, phi_star);
        let corner_b = Point::new(corner_a.x, -corner_a.y);
        LemonTable {
            r,
            big_r,
            b,
            phi_star,
            big_phi_star,
            delta_star: phi_star.min(FRAC_PI_2 - phi_star).max(0.0),
            corner_a,
            corner_b,
            center_small,
            center_big: Point::new(0.0, 0.0),
            canonical,
        }
    }

    pub fn radius(&self, arc: ArcLabel) -> f64 {
        match arc {
            ArcLabel::Small => self.r,
            ArcLabel::Big => self.big_r,
        }
    }

    pub fn center(&self, arc: ArcLabel) -> Point {
        match arc {
            ArcLabel::Small => self.center_small,
            ArcLabel::Big => self.center_big,
        }
    }

    /// Closed position-angle range `[lo, hi]` of an arc.
    pub fn arc_range(&self, arc: ArcLabel) -> (f64, f64) {
        match arc {
            ArcLabel::Small => (self.phi_star, TAU - self.phi_star),
            ArcLabel::Big => (-self.big_phi_star, self.big_phi_star),
        }
    }

    /// Arc lengths `(|Γ_r|, |Γ_R|)`.
    pub fn arc_lengths(&self) -> (f64, f64) {
        (
            self.r * (TAU - 2.0 * self.phi_star),
            self.big_r * 2.0 * self.big_phi_star,
        )
    }

    /// `Ψ_R = arcsin(2r/R)`: below this angle a chord on `Γ_R` is shorter
    /// than the small diameter, i.e. `d₁ < 2r`.
    pub fn psi_big(&self) -> f64 {
        (2.0 * self.r / self.big_r).min(1.0).asin()
    }

    /// Whether `R` meets the hyperbolicity threshold for this `φ*`.
    pub fn meets_threshold(&self, variant: ThresholdVariant) -> bool {
        match radius_threshold(self.phi_star, variant) {
            Ok(t) => self.big_r >= t,
            Err(_) => false,
        }
    }
}

/// Alias of [`LemonTable::new`].
pub fn build_table(phi_star: f64, big_r: f64) -> Result<LemonTable> {
    LemonTable::new(phi_star, big_r)
}

/// `R(φ*)` from the main theorem: `max{14.6r/(δ* sin φ*), 147r/sin²φ*, 1773.7r}`.
pub fn min_radius_threshold(phi_star: f64) -> Result<f64> {
    radius_threshold(phi_star, ThresholdVariant::Theorem)
}

pub fn radius_threshold(phi_star: f64, variant: ThresholdVariant) -> Result<f64> {
    if !(phi_star > 0.0 && phi_star < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "phi_star = {phi_star} outside (0, pi/2)"
        )));
    }
    let (near, square, floor) = match variant {
        ThresholdVariant::Theorem => (14.6, 147.0, 1773.7),
        ThresholdVariant::Collected => (16.0, 165.0, 1773.7),
    };
    let r = SMALL_RADIUS;
    let s = phi_star.sin();
    let delta = phi_star.min(FRAC_PI_2 - phi_star);
    let first = if delta > 0.0 { near * r / (delta * s) } else { f64::INFINITY };
    Ok(first.max(square * r / (s * s)).max(floor * r))
}

/// Lower bound on `R` required by the near-tangency lemma:
/// `max{34r/φ*, 14.6r/(δ sin φ*)}` with `δ = δ*`, or with `δ = π/2 − φ*`
/// when `use_complement` is set.
pub fn near_tangency_threshold(phi_star: f64, use_complement: bool) -> f64 {
    let r = SMALL_RADIUS;
    let delta = if use_complement {
        FRAC_PI_2 - phi_star
    } else {
        phi_star.min(FRAC_PI_2 - phi_star)
    };
    (34.0 * r / phi_star).max(14.6 * r / (delta * phi_star.sin()))
}

/// Planar position of the boundary point with position angle `phi` on `arc`.
///
/// Both ranges are taken closed here so that the corners can be embedded
/// from either circle.
pub fn arc_point(table: &LemonTable, arc: ArcLabel, phi: f64) -> Result<Point> {
    let (lo, hi) = table.arc_range(arc);
    let slack = 4.0 * f64::EPSILON * PI;
    if !(phi >= lo - slack && phi <= hi + slack) {
        return Err(Error::Range { arc: arc.name(), phi });
    }
    Ok(table.center(arc) + Point::polar(table.radius(arc), phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn half_disk_corners_give_sqrt3_separation() {
        let t = LemonTable::new(FRAC_PI_2, 2.0).unwrap();
        assert!((t.b - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.delta_star, 0.0);
    }

    #[test]
    fn big_phi_star_matches_high_precision_value() {
        // 50-digit value of arcsin(sin(π/4)/10).
        let t = LemonTable::new(FRAC_PI_4, 10.0).unwrap();
        assert!((t.big_phi_star - 0.070_769_736_662_213_61).abs() < 1e-15);
        assert!((t.big_phi_star.sin() * 10.0 - FRAC_PI_4.sin()).abs() < 1e-15);
    }

    #[test]
    fn separation_matches_high_precision_value() {
        // 50-digit value of sqrt(10000 - 1/4) - sqrt(3)/2.
        let t = LemonTable::new(FRAC_PI_6, 100.0).unwrap();
        assert!((t.b - 99.132_724_588_402_963_7).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(LemonTable::new(0.0, 10.0).is_err());
        assert!(LemonTable::new(1.6, 10.0).is_err());
        assert!(LemonTable::new(0.5, 0.5).is_err());
        assert!(LemonTable::new(0.5, f64::NAN).is_err());
        // R = r collapses the two circles.
        assert!(LemonTable::new(0.5, 1.0).is_err());
    }

    #[test]
    fn threshold_branches() {
        assert_eq!(min_radius_threshold(FRAC_PI_6).unwrap(), 1773.7);
        assert_eq!(min_radius_threshold(FRAC_PI_4).unwrap(), 1773.7);
        let s = FRAC_PI_4.sin();
        assert!(14.6 / (FRAC_PI_4 * s) < 26.3 + 0.1);
        assert!((147.0 / (s * s) - 294.0).abs() < 1e-9);
        assert!(min_radius_threshold(FRAC_PI_2).is_err());
        assert!(min_radius_threshold(0.0).is_err());
        // Small φ*: the 147/sin² branch dominates.
        let t = min_radius_threshold(0.2).unwrap();
        assert!((t - 147.0 / 0.2f64.sin().powi(2)).abs() < 1e-9);
        assert!(radius_threshold(0.2, ThresholdVariant::Collected).unwrap() > t);
    }

    #[test]
    fn threshold_diverges_at_half_disk() {
        let mut last = 0.0;
        for k in 2..12 {
            let t = min_radius_threshold(FRAC_PI_2 - 10f64.powi(-k)).unwrap();
            assert!(t > last);
            last = t;
        }
        assert!(last > 1e12);
    }

    #[test]
    fn axis_points() {
        let t = LemonTable::new(0.7, 5.0).unwrap();
        let p = arc_point(&t, ArcLabel::Small, PI).unwrap();
        assert!((p.x - (t.b - 1.0)).abs() < 1e-15 && p.y.abs() < 1e-15);
        let q = arc_point(&t, ArcLabel::Big, 0.0).unwrap();
        assert_eq!(q, Point::new(5.0, 0.0));
        let a = arc_point(&t, ArcLabel::Small, t.phi_star).unwrap();
        assert!(a.distance(t.corner_a) < 1e-15);
        assert!(arc_point(&t, ArcLabel::Small, 0.1).is_err());
        assert!(arc_point(&t, ArcLabel::Big, 1.0).is_err());
    }

    #[test]
    fn harness_table_recovers_canonical_angles() {
        let t = LemonTable::new(0.9, 7.0).unwrap();
        let h = LemonTable::with_separation(7.0, t.b).unwrap();
        assert!(!h.canonical);
        assert!((h.phi_star - t.phi_star).abs() < 1e-12);
        assert!((h.big_phi_star - t.big_phi_star).abs() < 1e-12);
        assert!(LemonTable::with_separation(2.0, 0.5).is_err());
    }
}
