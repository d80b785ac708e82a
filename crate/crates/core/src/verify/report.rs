//! Serialization of suite results and the CSV export.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CheckReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub passed: usize,
    pub total: usize,
    pub reports: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn new(suite: &str, reports: Vec<CheckReport>) -> SuiteReport {
        let passed = reports.iter().filter(|r| r.pass).count();
        SuiteReport { suite: suite.into(), pass: passed == reports.len(), passed, total: reports.len(), reports }
    }
}

/// Pretty JSON with a trailing newline. Output depends only on the reports.
pub fn suite_json(suite: &SuiteReport) -> String {
    let mut s = serde_json::to_string_pretty(suite).expect("reports serialize");
    s.push('\n');
    s
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, data: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(data)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn read_reports(path: &Path) -> Result<SuiteReport, Box<dyn std::error::Error + Send + Sync>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per sample: `check_id/label, log2 eps, log2 |x_eps|`.
pub fn render_csv(suite: &SuiteReport) -> String {
    let mut out = String::from("check_id,log2_eps,log2_magnitude\n");
    for r in &suite.reports {
        for s in &r.series {
            let id = csv_field(&format!("{}/{}", r.check_id, s.label));
            for (x, y) in s.log2_eps.iter().zip(&s.log2_magnitude) {
                out.push_str(&format!("{id},{x},{y}\n"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::EpsGrid;
    use crate::verify::Series;

    fn sample() -> SuiteReport {
        let r = CheckReport {
            check_id: "X".into(),
            claim: "c".into(),
            statement: "s".into(),
            assertions: vec![],
            pass: true,
            error: None,
            eps_grid: EpsGrid::default(),
            runtime_ms: None,
            corpus_version: "corpus-v1".into(),
            notes: vec![],
            series: vec![Series { label: "a,b".into(), log2_eps: vec![-6.0, -7.0], log2_magnitude: vec![-12.0, -14.0] }],
        };
        SuiteReport::new("all", vec![r])
    }

    #[test]
    fn csv_and_roundtrip() {
        let s = sample();
        let csv = render_csv(&s);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("\"X/a,b\",-6,-12"));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, suite_json(&s).as_bytes()).unwrap();
        assert_eq!(read_reports(&p).unwrap(), s);
    }
}
