//! Check reports and the per-sample inequality bookkeeping behind them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::LemonTable;
use crate::phase::PhasePoint;
use crate::tangent::{classify_defocusing_default, DefocusClass, Mat2};

/// Violation records kept per report.
pub const MAX_DETAILS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub phi_star: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub b: f64,
}

impl From<&LemonTable> for TableSummary {
    fn from(t: &LemonTable) -> Self {
        TableSummary { phi_star: t.phi_star, big_r: t.big_r, b: t.b }
    }
}

/// One failed assertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub sample: u64,
    pub point: PhasePoint,
    pub quantity: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub samples: u64,
    pub violations: u64,
    pub marginal: u64,
    /// Smallest relative slack over all evaluated inequalities.
    pub worst_margin: f64,
    pub table: TableSummary,
    pub seed: u64,
    pub runtime_ms: u64,
    /// Whether the table satisfies the hypothesis under which the checked
    /// statement is claimed. Violations only count as failures when it does.
    pub hypothesis_met: bool,
    pub singular_resampled: u64,
    /// Set when the check gave up, e.g. on too many singular samples.
    pub aborted: Option<String>,
    pub stats: BTreeMap<String, f64>,
    pub details: Vec<Detail>,
}

impl CheckReport {
    pub fn new(check: &str, table: &LemonTable, seed: u64, hypothesis_met: bool) -> Self {
        CheckReport {
            check: check.to_string(),
            samples: 0,
            violations: 0,
            marginal: 0,
            worst_margin: f64::INFINITY,
            table: table.into(),
            seed,
            runtime_ms: 0,
            hypothesis_met,
            singular_resampled: 0,
            aborted: None,
            stats: BTreeMap::new(),
            details: Vec::new(),
        }
    }

    /// A violation under a satisfied hypothesis, or an aborted run.
    pub fn hard_failure(&self) -> bool {
        self.aborted.is_some() || (self.hypothesis_met && self.violations > 0)
    }

    pub fn passed(&self) -> bool {
        self.aborted.is_none() && self.violations == 0
    }

    pub fn bump(&mut self, key: &str, by: f64) {
        *self.stats.entry(key.to_string()).or_insert(0.0) += by;
    }

    /// Fold one sample into the report. Call in sample order.
    pub fn absorb(&mut self, index: u64, point: PhasePoint, a: Assessment) {
        self.samples += 1;
        self.worst_margin = self.worst_margin.min(a.margin);
        for (k, v) in a.stats {
            self.bump(k, v);
        }
        if let Some(mut d) = a.violation {
            self.violations += 1;
            if self.details.len() < MAX_DETAILS {
                d.sample = index;
                d.point = point;
                self.details.push(d);
            }
        } else if a.marginal {
            self.marginal += 1;
        }
    }
}

/// Outcome of the assertions evaluated on one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub violation: Option<Detail>,
    pub marginal: bool,
    pub margin: f64,
    pub stats: Vec<(&'static str, f64)>,
}

impl Default for Assessment {
    fn default() -> Self {
        Assessment { violation: None, marginal: false, margin: f64::INFINITY, stats: Vec::new() }
    }
}

impl Assessment {
    fn fail(&mut self, quantity: String, value: f64, bound: f64) {
        if self.violation.is_none() {
            self.violation = Some(Detail {
                sample: 0,
                point: PhasePoint::small(0.0, 0.0),
                quantity,
                value,
                bound,
            });
        }
    }

    pub fn count(&mut self, key: &'static str) {
        self.stats.push((key, 1.0));
    }

    /// Strict `value < bound` with a relative dead band of `1e-9`.
    pub fn less(&mut self, name: &str, value: f64, bound: f64) {
        let scale = value.abs().max(bound.abs());
        let slack = bound - value;
        let tol = 1e-9 * scale + 1e-15;
        self.margin = self.margin.min(slack / scale.max(f64::MIN_POSITIVE));
        if slack > tol {
            return;
        }
        if slack >= -tol {
            self.marginal = true;
        } else {
            self.fail(format!("{name}: expected < bound"), value, bound);
        }
    }

    pub fn greater(&mut self, name: &str, value: f64, bound: f64) {
        self.less(name, -value, -bound);
    }

    /// `value ≤ bound + abs_tol` with no dead band beyond `abs_tol`.
    pub fn at_most(&mut self, name: &str, value: f64, bound: f64, abs_tol: f64) {
        let scale = value.abs().max(bound.abs()).max(f64::MIN_POSITIVE);
        let slack = bound + abs_tol - value;
        self.margin = self.margin.min(slack / scale);
        if slack < 0.0 {
            self.fail(format!("{name}: expected <= bound + {abs_tol:e}"), value, bound);
        }
    }

    pub fn holds(&mut self, name: &str, cond: bool) {
        if !cond {
            self.fail(format!("{name}: false"), 0.0, 0.0);
        }
    }

    /// All four entries of `m` must have the sign of `positive`.
    pub fn defocusing(&mut self, name: &str, m: &Mat2, positive: bool) {
        let class = classify_defocusing_default(m);
        let signed = if positive { *m } else { m.scale(-1.0) };
        let least = signed.entries().iter().fold(f64::INFINITY, |a, b| a.min(*b));
        self.margin = self.margin.min(least / m.max_abs().max(f64::MIN_POSITIVE));
        let wanted = if positive {
            DefocusClass::PositivelyDefocusing
        } else {
            DefocusClass::NegativelyDefocusing
        };
        match class {
            c if c == wanted => {}
            DefocusClass::Marginal(_) if least >= -1e-9 * m.max_abs() => {
                self.marginal = true
            }
            _ => self.fail(format!("{name}: {class:?}, entries {m}"), least, 0.0),
        }
    }
}
