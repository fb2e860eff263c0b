//! The quadratics `E_α` and `F_α` behind the radius bound for segments with
//! a single reflection on the big arc, and the bounds they produce.

use serde::Serialize;

use crate::error::{Error, Result};

/// Scale factor `(30/13)²` relating the `G` entry bounds to `R`.
const SCALE: f64 = (30.0 / 13.0) * (30.0 / 13.0);

/// The level `λ₁` must exceed.
pub const LAMBDA_LEVEL: f64 = 2.25;

/// `α` used for the `G₂₂` bound.
pub const ALPHA_G22: f64 = 0.9807;
/// `α` used for the `G₁₂` bound.
pub const ALPHA_G12: f64 = 0.9778;

pub fn e_poly(alpha: f64, lambda: f64) -> f64 {
    let (a, b, c) = e_coefficients(alpha);
    (a * lambda + b) * lambda + c
}

pub fn f_poly(alpha: f64, lambda: f64) -> f64 {
    let (a, b, c) = f_coefficients(alpha);
    (a * lambda + b) * lambda + c
}

fn e_coefficients(alpha: f64) -> (f64, f64, f64) {
    (-8.0 + 20.0 * alpha - 12.0 * alpha * alpha, 13.0 - 24.0 * alpha, 24.0)
}

fn f_coefficients(alpha: f64) -> (f64, f64, f64) {
    let s = 1.0 - alpha;
    (4.0 - 36.0 * s * s, 30.0 - 72.0 * alpha, 72.0)
}

/// Real roots of `aλ² + bλ + c`, ascending, without cancellation.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Result<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if a == 0.0 || disc < 0.0 {
        return Err(Error::Domain(format!("no real root pair for {a}λ² + {b}λ + {c}")));
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = (q / a, c / q);
    Ok(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

pub fn e_roots(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 2.0 / 3.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("E_alpha needs 2/3 < alpha < 1, got {alpha}")));
    }
    let (a, b, c) = e_coefficients(alpha);
    quadratic_roots(a, b, c)
}

pub fn f_roots(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 2.0 / 3.0 && alpha < 4.0 / 3.0) {
        return Err(Error::Domain(format!("F_alpha needs 2/3 < alpha < 4/3, got {alpha}")));
    }
    let (a, b, c) = f_coefficients(alpha);
    quadratic_roots(a, b, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProofRoots {
    pub e: (f64, f64),
    pub f: (f64, f64),
}

/// Roots of both quadratics at `α`.
pub fn proof_polynomials(alpha: f64) -> Result<ProofRoots> {
    Ok(ProofRoots { e: e_roots(alpha)?, f: f_roots(alpha)? })
}

/// `λ₁^E(α) > 2.25`.
pub fn e_lambda_ok(alpha: f64) -> bool {
    e_roots(alpha).map(|r| r.0 > LAMBDA_LEVEL).unwrap_or(false)
}

/// `λ₁^F(α) > 2.25`.
pub fn f_lambda_ok(alpha: f64) -> bool {
    f_roots(alpha).map(|r| r.0 > LAMBDA_LEVEL).unwrap_or(false)
}

/// `2/α < λ₁^F(1)`.
pub fn f1_ratio_ok(alpha: f64) -> bool {
    2.0 / alpha < f_roots(1.0).expect("alpha = 1 lies in the strip").0
}

/// `2/α < 24/11`.
pub fn e_ratio_ok(alpha: f64) -> bool {
    2.0 / alpha < 24.0 / 11.0
}

/// Point in `(lo, hi)` where `pred` changes value, assuming a single change.
pub fn boundary(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> Result<f64> {
    let at_lo = pred(lo);
    if at_lo == pred(hi) {
        return Err(Error::Domain(format!("predicate does not change on [{lo}, {hi}]")));
    }
    while hi - lo > 1e-15 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lower bound on `R/r` making `G₂₂` negative, as a function of `α`.
pub fn g22_radius_bound(alpha: f64) -> f64 {
    let via_e = SCALE * 139.5 / e_poly(alpha, LAMBDA_LEVEL);
    let via_ratio = SCALE * 332.0 / (24.0 - 22.0 / alpha);
    via_e.max(via_ratio)
}

/// Lower bound on `R/r` making `G₁₂` negative, as a function of `α`.
pub fn g12_radius_bound(alpha: f64) -> f64 {
    let via_f = SCALE * 418.5 / f_poly(alpha, LAMBDA_LEVEL);
    let via_ratio = SCALE * 940.0 / f_poly(1.0, 2.0 / alpha);
    via_f.max(via_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_roots_closed_form() {
        let (lo, hi) = f_roots(1.0).unwrap();
        let s = 17f64.sqrt();
        assert!((lo - (42.0 - 6.0 * s) / 8.0).abs() < 1e-14);
        assert!((hi - (42.0 + 6.0 * s) / 8.0).abs() < 1e-14);
        assert!((lo - 2.157670780786755).abs() < 1e-12);
        assert!((hi - 8.342329219213244).abs() < 1e-12);
    }

    #[test]
    fn roots_are_roots() {
        for alpha in [0.7, 0.8, 0.9, 0.9778, 0.9807, 0.99] {
            let p = proof_polynomials(alpha).unwrap();
            for l in [p.e.0, p.e.1] {
                assert!(e_poly(alpha, l).abs() < 1e-10, "E {alpha} {l}");
            }
            for l in [p.f.0, p.f.1] {
                assert!(f_poly(alpha, l).abs() < 1e-10, "F {alpha} {l}");
            }
        }
    }

    #[test]
    fn strips() {
        assert!(e_roots(1.0).is_err());
        assert!(e_roots(0.6).is_err());
        assert!(f_roots(1.2).is_ok());
        assert!(f_roots(4.0 / 3.0).is_err());
    }

    #[test]
    fn chosen_alphas() {
        assert!(e_lambda_ok(ALPHA_G22) && e_ratio_ok(ALPHA_G22));
        assert!(f_lambda_ok(ALPHA_G12) && f1_ratio_ok(ALPHA_G12));
    }

    #[test]
    fn predicate_boundaries() {
        let b = boundary(e_lambda_ok, 0.9, 0.999).unwrap();
        assert!((b - 0.9898141014664671).abs() < 1e-12, "{b}");
        let b = boundary(f_lambda_ok, 0.9, 0.999).unwrap();
        assert!((b - 0.9858870384670801).abs() < 1e-12, "{b}");
        let b = boundary(f1_ratio_ok, 0.8, 0.999).unwrap();
        assert!((b - 0.9269254688014716).abs() < 1e-12, "{b}");
        let b = boundary(e_ratio_ok, 0.8, 0.999).unwrap();
        assert!((b - 11.0 / 12.0).abs() < 1e-12, "{b}");
    }

    #[test]
    fn radius_bounds() {
        assert!((g22_radius_bound(ALPHA_G22) - 1128.27).abs() < 0.01);
        assert!((g12_radius_bound(ALPHA_G12) - 1773.62).abs() < 0.01);
        assert!(g12_radius_bound(ALPHA_G12) < 1773.7);
    }
}
