use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Perturbation, ReportFormat};
use crate::{Error, Result};

pub const REPORT_HEADER: [&str; 10] = [
    "dataset",
    "backbone",
    "mode",
    "measure",
    "perturbation",
    "n",
    "plcc",
    "srcc",
    "krcc",
    "errors",
];

/// Correlations of one (dataset, backbone, mode, measure, perturbation) cell.
///
/// `n` counts the pairs that were scored; `errors` the pairs that failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub dataset: String,
    pub backbone: String,
    pub mode: String,
    pub measure: String,
    pub perturbation: Perturbation,
    pub n: usize,
    pub plcc: f64,
    pub srcc: f64,
    pub krcc: f64,
    pub errors: usize,
}

impl CorrelationReport {
    pub fn cell_id(&self) -> [&str; 5] {
        [
            &self.dataset,
            &self.backbone,
            &self.mode,
            &self.measure,
            self.perturbation.as_str(),
        ]
    }
}

/// Renders reports in cell-id order.
pub fn render_report(reports: &[CorrelationReport], format: ReportFormat) -> Result<Vec<u8>> {
    if reports.is_empty() {
        return Err(Error::DegenerateInput("no reports to emit".into()));
    }
    let mut sorted: Vec<&CorrelationReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.cell_id().cmp(&b.cell_id()));
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(&sorted)
                .map_err(|e| Error::Serialize(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            for r in sorted {
                writer
                    .serialize(r)
                    .map_err(|e| Error::Serialize(e.to_string()))?;
            }
            writer
                .into_inner()
                .map_err(|e| Error::Serialize(e.to_string()))
        }
    }
}

/// Writes reports to `path`, creating parent directories as needed.
pub fn emit_report(
    reports: &[CorrelationReport],
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = render_report(reports, format)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads back a report file written by [`emit_report`].
pub fn load_report(path: impl AsRef<Path>, format: ReportFormat) -> Result<Vec<CorrelationReport>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        ReportFormat::Json => {
            serde_json::from_slice(&bytes).map_err(|e| Error::Parse {
                line: e.line() as u64,
                message: e.to_string(),
            })
        }
        ReportFormat::Csv => {
            let mut reader = csv::Reader::from_reader(bytes.as_slice());
            reader
                .deserialize()
                .map(|r| {
                    r.map_err(|e: csv::Error| Error::Parse {
                        line: e.position().map_or(0, |p| p.line()),
                        message: e.to_string(),
                    })
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reports() -> Vec<CorrelationReport> {
        Perturbation::ALL
            .iter()
            .rev()
            .enumerate()
            .map(|(i, p)| CorrelationReport {
                dataset: "tid2013".into(),
                backbone: "toy-42".into(),
                mode: "feats".into(),
                measure: "cos".into(),
                perturbation: *p,
                n: 3000 - i,
                plcc: 0.1 * i as f64 + 1.0 / 3.0,
                srcc: -0.5,
                krcc: 0.25,
                errors: i,
            })
            .collect()
    }

    #[test]
    fn csv_has_header_and_one_row_per_report() {
        let text = String::from_utf8(render_report(&reports(), ReportFormat::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], REPORT_HEADER.join(","));
        // cell-id order puts dilation first
        assert!(lines[1].contains(",dilation,"));
    }

    #[test]
    fn both_formats_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut expected = reports();
        expected.sort_by(|a, b| a.cell_id().cmp(&b.cell_id()));
        for format in [ReportFormat::Csv, ReportFormat::Json] {
            let path = dir.path().join("nested/report");
            emit_report(&reports(), &path, format).unwrap();
            assert_eq!(load_report(&path, format).unwrap(), expected);
        }
    }

    #[test]
    fn emission_is_deterministic() {
        for format in [ReportFormat::Csv, ReportFormat::Json] {
            assert_eq!(
                render_report(&reports(), format).unwrap(),
                render_report(&reports(), format).unwrap()
            );
        }
    }

    #[test]
    fn empty_is_rejected() {
        assert!(render_report(&[], ReportFormat::Csv).is_err());
    }
}
