//! Machine-readable bound reports.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundInterval, Method};
use crate::error::Result;
use crate::estimand::EstimandId;
use crate::inference::BootstrapResult;

/// `{"estimand", "method", "lower", "upper", "active_lower", "active_upper", "noninformative"}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub estimand: EstimandId,
    pub method: Method,
    pub lower: f64,
    pub upper: f64,
    pub active_lower: Option<usize>,
    pub active_upper: Option<usize>,
    pub noninformative: bool,
}

impl BoundReport {
    pub fn new(estimand: EstimandId, b: &BoundInterval) -> Self {
        Self {
            estimand,
            method: b.method,
            lower: b.lower,
            upper: b.upper,
            active_lower: b.active_lower,
            active_upper: b.active_upper,
            noninformative: b.is_noninformative(),
        }
    }

    /// One human-readable line, rounded to four decimals.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<12} {:<12} ({:.4}, {:.4})  width {:.4}",
            self.estimand,
            self.method.as_str(),
            self.lower,
            self.upper,
            self.upper - self.lower
        );
        if self.noninformative {
            s.push_str("  noninformative");
        }
        s
    }
}

/// Bound report extended with bootstrap percentile limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    #[serde(flatten)]
    pub bounds: BoundReport,
    pub ci_lower: [f64; 2],
    pub ci_upper: [f64; 2],
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

impl From<&BootstrapResult> for BootstrapReport {
    fn from(r: &BootstrapResult) -> Self {
        Self {
            bounds: BoundReport::new(r.estimand, &r.point),
            ci_lower: r.ci_lower,
            ci_upper: r.ci_upper,
            replicates: r.replicates,
            level: r.level,
            seed: r.seed,
        }
    }
}

impl BootstrapReport {
    pub fn to_text(&self) -> String {
        format!(
            "{}\n  lower limit {:.0}% CI ({:.4}, {:.4})\n  upper limit {:.0}% CI ({:.4}, {:.4})\n  {} replicates, seed {}",
            self.bounds.to_text(),
            self.level * 100.0,
            self.ci_lower[0],
            self.ci_lower[1],
            self.level * 100.0,
            self.ci_upper[0],
            self.ci_upper[1],
            self.replicates,
            self.seed
        )
    }
}

pub fn write_reports_csv<W: Write>(reports: &[BoundReport], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "estimand",
        "method",
        "lower",
        "upper",
        "active_lower",
        "active_upper",
        "noninformative",
    ])?;
    for r in reports {
        let opt = |v: Option<usize>| v.map(|k| k.to_string()).unwrap_or_default();
        wtr.write_record([
            r.estimand.to_string(),
            r.method.as_str().to_string(),
            r.lower.to_string(),
            r.upper.to_string(),
            opt(r.active_lower),
            opt(r.active_upper),
            r.noninformative.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
