//! Verification report model and its two serializations.
//!
//! A report is a header plus a list of check records.  The machine format is
//! line-delimited JSON (one record per line, ordered by check id); the human
//! format is a table printing the *same* digit strings for every residual, so
//! the two formats can never disagree on a value.

use serde::{Deserialize, Serialize};

use crate::error::{HmxError, Result};

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    /// A conditional identity whose stated precondition does not hold here.
    #[serde(rename = "skipped: precondition")]
    SkippedPrecondition,
    /// Reported for information only; never gates the exit code.
    #[serde(rename = "exploratory")]
    Exploratory,
}

/// One identity check: the residual actually measured against the tolerance
/// it is held to, plus the conventions the computation depended on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    /// What identity this verifies, in words.
    pub reference: String,
    pub residual: f64,
    pub tolerance: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conventions: Vec<String>,
    pub inputs_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    /// Graded record: pass/fail by comparing residual to tolerance.
    pub fn graded(check_id: &str, reference: &str, residual: f64, tolerance: f64) -> CheckRecord {
        CheckRecord {
            check_id: check_id.to_string(),
            reference: reference.to_string(),
            residual,
            tolerance,
            status: if residual.is_finite() && residual <= tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            conventions: Vec::new(),
            inputs_digest: String::new(),
            note: None,
        }
    }

    pub fn exploratory(check_id: &str, reference: &str, residual: f64) -> CheckRecord {
        CheckRecord {
            check_id: check_id.to_string(),
            reference: reference.to_string(),
            residual,
            tolerance: f64::INFINITY,
            status: Status::Exploratory,
            conventions: Vec::new(),
            inputs_digest: String::new(),
            note: None,
        }
    }

    pub fn skipped(check_id: &str, reference: &str, tolerance: f64, why: &str) -> CheckRecord {
        CheckRecord {
            check_id: check_id.to_string(),
            reference: reference.to_string(),
            residual: f64::NAN,
            tolerance,
            status: Status::SkippedPrecondition,
            conventions: Vec::new(),
            inputs_digest: String::new(),
            note: Some(why.to_string()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> CheckRecord {
        self.note = Some(note.into());
        self
    }

    pub fn with_conventions(mut self, conv: &[&str]) -> CheckRecord {
        self.conventions = conv.iter().map(|s| s.to_string()).collect();
        self
    }
}

/// Report header: run identity and the conventions in force.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportHeader {
    pub command: String,
    pub seed: u64,
    pub inputs_digest: String,
    pub conventions: Vec<String>,
    /// The effective configuration, echoed back with all defaults
    /// materialized (canonical JSON).
    pub effective_config: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub header: ReportHeader,
    pub checks: Vec<CheckRecord>,
}

/// Conventions every run records.
pub const CONVENTIONS: &[&str] = &[
    "v_cov=unscaled(del_dot - C)",
    "normal_sign=last_axis_nonneg,first_nonzero_positive",
    "rel_gap=abs_gap/max(1,ref_norm)",
];

impl Report {
    pub fn new(command: &str, seed: u64, effective_config: serde_json::Value) -> Report {
        let digest = digest_hex(&format!(
            "{}|{}|{}",
            command,
            seed,
            serde_json::to_string(&effective_config).unwrap_or_default()
        ));
        Report {
            header: ReportHeader {
                command: command.to_string(),
                seed,
                inputs_digest: digest,
                conventions: CONVENTIONS.iter().map(|s| s.to_string()).collect(),
                effective_config,
            },
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, mut rec: CheckRecord) {
        rec.inputs_digest = self.header.inputs_digest.clone();
        self.checks.push(rec);
    }

    pub fn extend(&mut self, recs: Vec<CheckRecord>) {
        for r in recs {
            self.push(r);
        }
    }

    /// Deterministic ordering: by check id, then reference.
    pub fn normalize(&mut self) {
        self.checks
            .sort_by(|a, b| (&a.check_id, &a.reference).cmp(&(&b.check_id, &b.reference)));
    }

    pub fn overall_pass(&self) -> bool {
        !self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn counts(&self) -> (usize, usize, usize, usize) {
        let mut pass = 0;
        let mut fail = 0;
        let mut skipped = 0;
        let mut expl = 0;
        for c in &self.checks {
            match c.status {
                Status::Pass => pass += 1,
                Status::Fail => fail += 1,
                Status::SkippedPrecondition => skipped += 1,
                Status::Exploratory => expl += 1,
            }
        }
        (pass, fail, skipped, expl)
    }

    /// Machine format: one JSON record per line; first the header, then the
    /// checks in normalized order.
    pub fn to_machine(&self) -> Result<String> {
        let mut doc = self.clone();
        doc.normalize();
        let mut out = String::new();
        let header = serde_json::json!({"record": "header", "header": doc.header});
        out.push_str(&serde_json::to_string(&header).map_err(|e| HmxError::Report(e.to_string()))?);
        out.push('\n');
        for c in &doc.checks {
            let line = serde_json::json!({"record": "check", "check": c});
            out.push_str(
                &serde_json::to_string(&line).map_err(|e| HmxError::Report(e.to_string()))?,
            );
            out.push('\n');
        }
        let (pass, fail, skipped, expl) = doc.counts();
        let summary = serde_json::json!({
            "record": "summary",
            "pass": pass,
            "fail": fail,
            "skipped": skipped,
            "exploratory": expl,
            "overall": if doc.overall_pass() { "pass" } else { "fail" },
        });
        out.push_str(
            &serde_json::to_string(&summary).map_err(|e| HmxError::Report(e.to_string()))?,
        );
        out.push('\n');
        Ok(out)
    }

    /// Human format: fixed-width table; residual digits identical to the
    /// machine format (both go through the JSON float writer).
    pub fn to_human(&self) -> Result<String> {
        let mut doc = self.clone();
        doc.normalize();
        let mut out = String::new();
        out.push_str(&format!(
            "run: {}   seed: {}   digest: {}\n",
            doc.header.command, doc.header.seed, doc.header.inputs_digest
        ));
        out.push_str(&format!(
            "conventions: {}\n",
            doc.header.conventions.join("; ")
        ));
        let id_w = doc
            .checks
            .iter()
            .map(|c| c.check_id.len())
            .max()
            .unwrap_or(8)
            .max(8);
        out.push_str(&format!(
            "{:<id_w$}  {:<24}  {:<24}  {:<22}  reference\n",
            "check", "residual", "tolerance", "status",
        ));
        for c in &doc.checks {
            let status = match c.status {
                Status::Pass => "pass".to_string(),
                Status::Fail => "FAIL".to_string(),
                Status::SkippedPrecondition => "skipped: precondition".to_string(),
                Status::Exploratory => "exploratory".to_string(),
            };
            out.push_str(&format!(
                "{:<id_w$}  {:<24}  {:<24}  {:<22}  {}\n",
                c.check_id,
                fmt_f64(c.residual),
                fmt_f64(c.tolerance),
                status,
                c.reference,
            ));
            if let Some(n) = &c.note {
                out.push_str(&format!("{:<id_w$}    note: {}\n", "", n));
            }
        }
        let (pass, fail, skipped, expl) = doc.counts();
        out.push_str(&format!(
            "summary: {} pass, {} fail, {} skipped, {} exploratory -> {}\n",
            pass,
            fail,
            skipped,
            expl,
            if doc.overall_pass() { "pass" } else { "fail" }
        ));
        Ok(out)
    }
}

/// Float rendering shared by both formats (JSON shortest round-trip digits).
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "null".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    serde_json::to_string(&serde_json::json!(v)).unwrap_or_else(|_| v.to_string())
}

/// FNV-1a 64-bit over the canonical run description; stable across builds.
pub fn digest_hex(s: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_a_valid_pass() {
        let r = Report::new("frame", 1, serde_json::json!({}));
        assert!(r.overall_pass());
        let m = r.to_machine().unwrap();
        assert!(m.lines().count() == 2); // header + summary
        assert!(m.contains("\"overall\":\"pass\""));
    }

    #[test]
    fn one_failing_check_flips_overall_status() {
        let mut r = Report::new("frame", 1, serde_json::json!({}));
        r.push(CheckRecord::graded("a.ok", "x", 1e-12, 1e-9));
        r.push(CheckRecord::graded("b.bad", "y", 1.0, 1e-9));
        assert!(!r.overall_pass());
        let h = r.to_human().unwrap();
        assert!(h.contains("FAIL"));
    }

    #[test]
    fn machine_output_is_deterministic_and_ordered() {
        let build = || {
            let mut r = Report::new("chain", 7, serde_json::json!({"n": 3}));
            r.push(CheckRecord::graded("z.last", "idz", 3e-11, 1e-9));
            r.push(CheckRecord::graded("a.first", "ida", 1e-13, 1e-10));
            r.to_machine().unwrap()
        };
        let m1 = build();
        let m2 = build();
        assert_eq!(m1, m2);
        let idx_a = m1.find("a.first").unwrap();
        let idx_z = m1.find("z.last").unwrap();
        assert!(idx_a < idx_z);
    }

    #[test]
    fn residual_digits_agree_between_formats() {
        let mut r = Report::new("chain", 7, serde_json::json!({}));
        r.push(CheckRecord::graded("c.x", "id", 1.2345678912345e-9, 1e-8));
        let m = r.to_machine().unwrap();
        let h = r.to_human().unwrap();
        let digits = fmt_f64(1.2345678912345e-9);
        assert!(m.contains(&digits));
        assert!(h.contains(&digits));
    }

    #[test]
    fn machine_records_round_trip_losslessly() {
        let mut r = Report::new("chain", 7, serde_json::json!({"a": 0.1}));
        r.push(CheckRecord::graded(
            "c.x",
            "id",
            5.48172618408671e-16,
            1e-10,
        ));
        r.push(CheckRecord::graded("c.y", "id", 0.1 + 0.2, 1e-1));
        let m = r.to_machine().unwrap();
        for line in m.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            if let Some(check) = v.get("check") {
                let back: CheckRecord = serde_json::from_value(check.clone()).unwrap();
                let orig = r
                    .checks
                    .iter()
                    .find(|c| c.check_id == back.check_id)
                    .unwrap();
                assert_eq!(back.residual.to_bits(), orig.residual.to_bits());
                assert_eq!(back.tolerance.to_bits(), orig.tolerance.to_bits());
            }
        }
    }

    #[test]
    fn exploratory_never_fails_a_report() {
        let mut r = Report::new("probes", 7, serde_json::json!({}));
        r.push(CheckRecord::exploratory("p.gap", "gap probe", 123.4));
        assert!(r.overall_pass());
    }
}
