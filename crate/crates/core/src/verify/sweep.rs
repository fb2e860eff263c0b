//! Defocusing, cone and Lyapunov summaries over a `(φ*, R)` grid.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{LemonTable, ThresholdVariant};

use super::checks::{check_cone_field, check_defocusing};
use super::lyapunov::lyapunov_exponent;

/// Orbits per cell for the Lyapunov estimate.
const CELL_ORBITS: u64 = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub phi_star: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub meets_threshold: bool,
    pub defocusing_violations: u64,
    pub defocusing_marginal: u64,
    pub cone_violations: u64,
    pub chi: f64,
    pub chi_stderr: f64,
    /// Set when the cell could not be evaluated.
    pub error: Option<String>,
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of a cell, a function of the run seed and the cell coordinates only.
pub fn cell_seed(seed: u64, phi_star: f64, big_r: f64) -> u64 {
    mix(mix(seed ^ phi_star.to_bits()) ^ big_r.to_bits())
}

fn evaluate(phi_star: f64, big_r: f64, budget: u64, seed: u64, variant: ThresholdVariant) -> SweepCell {
    let mut cell = SweepCell {
        phi_star,
        big_r,
        meets_threshold: false,
        defocusing_violations: 0,
        defocusing_marginal: 0,
        cone_violations: 0,
        chi: f64::NAN,
        chi_stderr: f64::NAN,
        error: None,
    };
    let table = match LemonTable::new(phi_star, big_r) {
        Ok(t) => t,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    let seed = cell_seed(seed, phi_star, big_r);
    cell.meets_threshold = table.meets_threshold(variant);
    let defocusing = check_defocusing(&table, variant, budget, seed);
    let cone = check_cone_field(&table, variant, budget, seed);
    cell.defocusing_violations = defocusing.violations;
    cell.defocusing_marginal = defocusing.marginal;
    cell.cone_violations = cone.violations;
    if let Some(reason) = defocusing.aborted.or(cone.aborted) {
        cell.error = Some(reason);
    }
    match lyapunov_exponent(&table, CELL_ORBITS, budget, seed) {
        Ok(e) => {
            cell.chi = e.chi;
            cell.chi_stderr = e.stderr;
        }
        Err(e) => {
            cell.error.get_or_insert(e.to_string());
        }
    }
    cell
}

/// Evaluate every cell of `phi_grid × r_grid`, row-major in `φ*`.
pub fn sweep(
    phi_grid: &[f64],
    r_grid: &[f64],
    per_cell_budget: u64,
    seed: u64,
    variant: ThresholdVariant,
) -> Result<Vec<SweepCell>> {
    if phi_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::Precondition("sweep grids must be nonempty".into()));
    }
    if per_cell_budget < 1000 {
        return Err(Error::Precondition(format!(
            "per-cell budget {per_cell_budget} must be at least 1000"
        )));
    }
    let cells: Vec<(f64, f64)> = phi_grid
        .iter()
        .flat_map(|&p| r_grid.iter().map(move |&r| (p, r)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(p, r)| evaluate(p, r, per_cell_budget, seed, variant))
        .collect())
}

pub const SWEEP_CSV_HEADER: &str = "phi_star,R,meets_threshold,defocusing_violations,defocusing_marginal,cone_violations,chi,chi_stderr,error";

pub fn write_sweep_csv<W: Write>(out: &mut W, cells: &[SweepCell]) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for c in cells {
        writeln!(
            out,
            "{:.16e},{:.16e},{},{},{},{},{:.16e},{:.16e},{}",
            c.phi_star,
            c.big_r,
            c.meets_threshold,
            c.defocusing_violations,
            c.defocusing_marginal,
            c.cone_violations,
            c.chi,
            c.chi_stderr,
            c.error.as_deref().unwrap_or("").replace(',', ";"),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn guards() {
        assert!(sweep(&[], &[10.0], 1000, 0, ThresholdVariant::Theorem).is_err());
        assert!(sweep(&[FRAC_PI_4], &[10.0], 10, 0, ThresholdVariant::Theorem).is_err());
    }

    #[test]
    fn cells_do_not_depend_on_grid_order() {
        let a = sweep(&[FRAC_PI_4, 0.5], &[20.0, 2000.0], 1000, 4, ThresholdVariant::Theorem).unwrap();
        let b = sweep(&[0.5, FRAC_PI_4], &[2000.0, 20.0], 1000, 4, ThresholdVariant::Theorem).unwrap();
        for cell in &a {
            let twin = b
                .iter()
                .find(|c| c.phi_star == cell.phi_star && c.big_r == cell.big_r)
                .unwrap();
            assert_eq!(format!("{cell:?}"), format!("{twin:?}"));
        }
        for cell in a.iter().filter(|c| c.meets_threshold) {
            assert_eq!(cell.defocusing_violations, 0, "{cell:?}");
        }
    }

    #[test]
    fn csv_shape() {
        let cells = sweep(&[FRAC_PI_4], &[2000.0], 1000, 0, ThresholdVariant::Theorem).unwrap();
        let mut out = Vec::new();
        write_sweep_csv(&mut out, &cells).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 9);
    }
}
