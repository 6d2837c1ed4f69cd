use std::fmt;
use std::path::Path;

use serde::Serialize;

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    /// the premise of a conditional check is false
    #[serde(rename = "VACUOUS")]
    Vacuous,
    /// the space fails the Boyd-index (or Young) gate
    #[serde(rename = "SKIPPED-GATE")]
    SkippedGate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "VACUOUS",
            Verdict::SkippedGate => "SKIPPED-GATE",
        })
    }
}

/// What a check measured. A check passes when `ratio ≤ tol` and every
/// side condition recorded in `notes` holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub inputs: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn skipped(inputs: String, note: String) -> Self {
        Self {
            inputs,
            lhs: f64::NAN,
            rhs: f64::NAN,
            ratio: f64::NAN,
            tol: f64::NAN,
            verdict: Verdict::SkippedGate,
            notes: vec![note],
        }
    }

    pub fn errored(inputs: String, err: &HarnessError) -> Self {
        Self { verdict: Verdict::Fail, notes: vec![format!("error: {err}")], ..Self::skipped(inputs, String::new()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_id: String,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub runtime_ms: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcome.verdict != Verdict::Fail
    }
}

/// CSV with columns `check_id,lhs,rhs,ratio,tol,verdict,runtime_ms`. The
/// runtime column stays empty unless `timing` is set, so that equal seeds
/// give byte-identical files.
pub fn to_csv(reports: &[CheckReport], timing: bool) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check_id", "lhs", "rhs", "ratio", "tol", "verdict", "runtime_ms"]).map_err(csv_err)?;
    for r in reports {
        let o = &r.outcome;
        let runtime = if timing { format!("{:.3}", r.runtime_ms) } else { String::new() };
        w.write_record([
            r.check_id.clone(),
            o.lhs.to_string(),
            o.rhs.to_string(),
            o.ratio.to_string(),
            o.tol.to_string(),
            o.verdict.to_string(),
            runtime,
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Io(std::io::Error::other(e))
}

/// Writes `reports.csv` and `reports.json` into `dir`, creating it.
pub fn write_reports(dir: &Path, reports: &[CheckReport], timing: bool) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("reports.csv"), to_csv(reports, timing)?)?;
    let json = serde_json::to_string_pretty(reports).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("reports.json"), json + "\n")?;
    Ok(())
}
