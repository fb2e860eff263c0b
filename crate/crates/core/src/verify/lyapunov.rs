//! Largest Lyapunov exponent by tangent-vector renormalization.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{billiard_step, CollisionEvent};
use crate::error::{Error, Result};
use crate::geometry::LemonTable;
use crate::phase::PhasePoint;
use crate::tangent::{event_jacobian, step_jacobian, Mat2};

use super::sampling::{sample_mu, sample_theta, stream_rng};

const SALT: u64 = 100;
/// Restarts allowed per orbit before giving up.
const MAX_RESTARTS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    /// Nats per collision.
    pub chi: f64,
    /// `√(stat_err² + truncation_err²)`.
    pub stderr: f64,
    /// Standard error of the mean over orbits.
    pub stat_err: f64,
    /// `|χ(n) − χ(n/2)|` for the orbit means: the finite-time bias.
    pub truncation_err: f64,
    pub n_orbits: u64,
    pub n_steps: u64,
    /// Orbits restarted after hitting a singularity.
    pub discarded: u64,
}

/// A map with a tangent map along orbits.
pub trait TangentSystem: Sync {
    /// Initial condition drawn from the invariant measure.
    fn sample(&self, rng: &mut ChaCha8Rng) -> PhasePoint;
    /// Image of `x` and the tangent map at `x`.
    fn advance(&self, x: &PhasePoint) -> Result<(PhasePoint, Mat2)>;
}

impl TangentSystem for LemonTable {
    fn sample(&self, rng: &mut ChaCha8Rng) -> PhasePoint {
        sample_mu(self, rng)
    }

    fn advance(&self, x: &PhasePoint) -> Result<(PhasePoint, Mat2)> {
        let next = billiard_step(self, x).into_result()?;
        let m = event_jacobian(&CollisionEvent::start(self, *x), &next);
        Ok((next.point, m))
    }
}

/// `F⁻¹ = I∘F∘I` on a lemon table.
pub struct Reversed<'t>(pub &'t LemonTable);

impl TangentSystem for Reversed<'_> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> PhasePoint {
        sample_mu(self.0, rng)
    }

    fn advance(&self, x: &PhasePoint) -> Result<(PhasePoint, Mat2)> {
        let ix = x.involution();
        let next = billiard_step(self.0, &ix).into_result()?.point.involution();
        let m = step_jacobian(self.0, &ix)?;
        // Conjugate by DI = diag(1, −1).
        Ok((next, Mat2::new(m.a11, -m.a12, -m.a21, m.a22)))
    }
}

/// Billiard in the unit disk: `(φ, θ) ↦ (φ + 2θ, θ)`.
pub struct CircleBilliard;

impl TangentSystem for CircleBilliard {
    fn sample(&self, rng: &mut ChaCha8Rng) -> PhasePoint {
        PhasePoint::small(TAU * rng.random::<f64>(), sample_theta(rng))
    }

    fn advance(&self, x: &PhasePoint) -> Result<(PhasePoint, Mat2)> {
        let phi = (x.phi + 2.0 * x.theta).rem_euclid(TAU);
        Ok((PhasePoint::small(phi, x.theta), Mat2::SHEAR))
    }
}

/// `(χ over n steps, χ over the first n/2 steps, restarts)` for one orbit.
fn one_orbit<S: TangentSystem>(system: &S, n_steps: u64, mut rng: ChaCha8Rng) -> Result<(f64, f64, u64)> {
    let half = n_steps / 2;
    let mut restarts = 0;
    'restart: loop {
        let mut x = system.sample(&mut rng);
        let angle = PI * rng.random::<f64>();
        let mut v = [angle.cos(), angle.sin()];
        let mut log_sum = 0.0;
        let mut log_half = 0.0;
        for k in 0..n_steps {
            let (next, m) = match system.advance(&x) {
                Ok(step) => step,
                Err(Error::Singularity(_)) => {
                    restarts += 1;
                    if restarts > MAX_RESTARTS {
                        return Err(Error::Precondition(format!(
                            "orbit restarted {restarts} times"
                        )));
                    }
                    continue 'restart;
                }
                Err(e) => return Err(e),
            };
            let w = m.apply(v);
            let norm = w[0].hypot(w[1]);
            log_sum += norm.ln();
            v = [w[0] / norm, w[1] / norm];
            x = next;
            if k + 1 == half {
                log_half = log_sum;
            }
        }
        return Ok((log_sum / n_steps as f64, log_half / half as f64, restarts));
    }
}

/// Estimate `χ` over `n_orbits` orbits of `n_steps` collisions each.
pub fn lyapunov_of<S: TangentSystem>(system: &S, n_orbits: u64, n_steps: u64, seed: u64) -> Result<LyapunovEstimate> {
    if n_steps < 1000 {
        return Err(Error::Precondition(format!("n_steps = {n_steps} must be at least 1000")));
    }
    if n_orbits < 2 {
        return Err(Error::Precondition("at least two orbits are needed for an error bar".into()));
    }
    let runs: Vec<(f64, f64, u64)> = (0..n_orbits)
        .into_par_iter()
        .map(|i| one_orbit(system, n_steps, stream_rng(seed, SALT, i)))
        .collect::<Result<_>>()?;
    let n = n_orbits as f64;
    let chi = runs.iter().map(|r| r.0).sum::<f64>() / n;
    let chi_half = runs.iter().map(|r| r.1).sum::<f64>() / n;
    let var = runs.iter().map(|r| (r.0 - chi).powi(2)).sum::<f64>() / (n - 1.0);
    let stat_err = (var / n).sqrt();
    let truncation_err = (chi - chi_half).abs();
    Ok(LyapunovEstimate {
        chi,
        stderr: stat_err.hypot(truncation_err),
        stat_err,
        truncation_err,
        n_orbits,
        n_steps,
        discarded: runs.iter().map(|r| r.2).sum(),
    })
}

/// `χ` of the billiard map of `table`.
pub fn lyapunov_exponent(table: &LemonTable, n_orbits: u64, n_steps: u64, seed: u64) -> Result<LyapunovEstimate> {
    lyapunov_of(table, n_orbits, n_steps, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn guards() {
        let t = LemonTable::new(FRAC_PI_4, 10.0).unwrap();
        assert!(lyapunov_exponent(&t, 4, 999, 0).is_err());
        assert!(lyapunov_exponent(&t, 1, 1000, 0).is_err());
    }

    #[test]
    fn disk_is_integrable() {
        let e = lyapunov_of(&CircleBilliard, 20, 4000, 1).unwrap();
        assert!(e.chi.abs() < 3.0 * e.stderr, "{e:?}");
        assert_eq!(e.discarded, 0);
    }

    #[test]
    fn reversed_tangent_map_inverts_forward() {
        let t = LemonTable::new(0.7, 30.0).unwrap();
        let x = PhasePoint::small(2.5, 1.6);
        let (y, m) = t.advance(&x).unwrap();
        let (back, n) = Reversed(&t).advance(&y).unwrap();
        assert!(back.distance(&x) < 1e-12);
        assert!((n * m).rel_diff(&Mat2::IDENTITY) < 1e-10, "{}", n * m);
    }

    #[test]
    fn small_lemon_is_chaotic_and_reproducible() {
        let t = LemonTable::new(FRAC_PI_4, 10.0).unwrap();
        let a = lyapunov_exponent(&t, 8, 5000, 3).unwrap();
        let b = lyapunov_exponent(&t, 8, 5000, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.chi > 5.0 * a.stderr, "{a:?}");
    }
}
