//! Random phase points.
//!
//! Every sample index owns its own ChaCha8 stream, keyed by the run seed and
//! a per-check salt, so results do not depend on how work is scheduled.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::billiard_inverse;
use crate::error::{Error, Result};
use crate::geometry::{ArcLabel, LemonTable};
use crate::phase::PhasePoint;
use crate::returnmap::{hat_m_point_from_entry, in_hat_m};

/// Rejections allowed while drawing one sample.
pub const MAX_ATTEMPTS: u64 = 100_000;

pub fn stream_rng(seed: u64, salt: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((salt << 40).wrapping_add(index));
    rng
}

/// Open-interval uniform draw.
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// `θ` with density `sin θ / 2` on `(0, π)`.
pub fn sample_theta<R: Rng>(rng: &mut R) -> f64 {
    sample_theta_below(rng, PI)
}

/// `θ` with density proportional to `sin θ` on `(0, c)`.
pub fn sample_theta_below<R: Rng>(rng: &mut R, c: f64) -> f64 {
    2.0 * (open_unit(rng).sqrt() * (c / 2.0).sin()).asin()
}

/// `θ` with density proportional to `sin θ` on `(0, c) ∪ (π − c, π)`.
pub fn sample_theta_two_sided<R: Rng>(rng: &mut R, c: f64) -> f64 {
    let theta = sample_theta_below(rng, c);
    if rng.random::<bool>() {
        PI - theta
    } else {
        theta
    }
}

fn sample_phi<R: Rng>(rng: &mut R, table: &LemonTable, arc: ArcLabel) -> f64 {
    let (lo, hi) = table.arc_range(arc);
    lo + (hi - lo) * open_unit(rng)
}

/// A draw from the invariant measure restricted to `M_r`.
pub fn sample_mu_small<R: Rng>(table: &LemonTable, rng: &mut R) -> PhasePoint {
    PhasePoint::small(sample_phi(rng, table, ArcLabel::Small), sample_theta(rng))
}

/// A draw from the invariant measure `μ ∝ ρ sin θ dφ dθ` on `M`.
pub fn sample_mu<R: Rng>(table: &LemonTable, rng: &mut R) -> PhasePoint {
    let (small, big) = table.arc_lengths();
    let arc = if rng.random::<f64>() * (small + big) < small {
        ArcLabel::Small
    } else {
        ArcLabel::Big
    };
    PhasePoint { arc, phi: sample_phi(rng, table, arc), theta: sample_theta(rng) }
}

/// How points of `M̂` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    /// `μ` on `M_r` conditioned on `M̂`.
    Invariant,
    /// Entry points `x₁` with `θ₁` within `Ψ_R` of the tangent (`d₁ < 2r`).
    Grazing,
    /// Entry points `x₁` with `θ₁` within `Φ*` of the tangent, where all
    /// segments with `n₁ ≥ 1` come from.
    Multiple,
}

impl Stratum {
    pub fn name(self) -> &'static str {
        match self {
            Stratum::Invariant => "invariant",
            Stratum::Grazing => "grazing",
            Stratum::Multiple => "multiple",
        }
    }

    /// The mixture used by checks over all of `M̂`: half invariant, a quarter
    /// of each conditioned stratum.
    pub fn mixed(index: u64) -> Stratum {
        match index % 4 {
            0 | 1 => Stratum::Invariant,
            2 => Stratum::Grazing,
            _ => Stratum::Multiple,
        }
    }

    /// The conditioned strata only, alternating.
    pub fn tangential(index: u64) -> Stratum {
        if index.is_multiple_of(2) {
            Stratum::Grazing
        } else {
            Stratum::Multiple
        }
    }
}

/// Counts of rejected and singular draws spent on one sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DrawCost {
    pub rejected: u64,
    pub singular: u64,
}

/// Draw `x ∈ M̂` from a stratum.
pub fn sample_hat_m<R: Rng>(
    table: &LemonTable,
    stratum: Stratum,
    rng: &mut R,
    cost: &mut DrawCost,
) -> Result<PhasePoint> {
    for _ in 0..MAX_ATTEMPTS {
        let drawn = match stratum {
            Stratum::Invariant => {
                let x = sample_mu_small(table, rng);
                in_hat_m(table, &x).map(|inside| inside.then_some(x))
            }
            Stratum::Grazing | Stratum::Multiple => {
                let c = if stratum == Stratum::Grazing { table.psi_big() } else { table.big_phi_star };
                let x1 = PhasePoint::big(
                    sample_phi(rng, table, ArcLabel::Big),
                    sample_theta_two_sided(rng, c),
                );
                match billiard_inverse(table, &x1).into_result() {
                    Ok(prev) if prev.point.arc == ArcLabel::Small => {
                        hat_m_point_from_entry(table, &x1).map(Some)
                    }
                    Ok(_) => Ok(None),
                    Err(e) => Err(e),
                }
            }
        };
        match drawn {
            Ok(Some(x)) => return Ok(x),
            Ok(None) => cost.rejected += 1,
            Err(Error::Singularity(_)) | Err(Error::NeverLeaves(_)) => cost.singular += 1,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Precondition(format!(
        "no admissible {} sample after {MAX_ATTEMPTS} draws",
        stratum.name()
    )))
}
