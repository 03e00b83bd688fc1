//! Run records and their on-disk forms: a line-delimited JSON record set
//! (schema-versioned header line, one record per line) plus the
//! comma-delimited summary table used for plotting.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{HarnessError, Method};
use crate::gibbs::ChainTrace;

pub const RECORDS_SCHEMA_VERSION: u32 = 1;

/// Outcome class of one reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "failed")]
    Failed,
    #[serde(rename = "projected-roots")]
    ProjectedRoots,
}

/// Everything needed to replay one cell: provenance, truth, estimate,
/// and scores. Failed reconstructions carry `error = 1` (the score of the
/// zero-signal estimate) so breakdowns stay visible in aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub sigma_e: f64,
    pub n_samples: usize,
    pub seed_index: u64,
    pub method: Method,
    pub sigma_h: f64,
    pub period: f64,
    pub model_order: usize,
    pub truth_weights: Vec<f64>,
    pub truth_locations: Vec<f64>,
    pub estimate_weights: Option<Vec<f64>>,
    pub estimate_locations: Option<Vec<f64>>,
    pub error: Option<f64>,
    /// Infinite for noiseless cells; serialized as the string "inf".
    #[serde(with = "inf_float")]
    pub snr_db: f64,
    pub sigma_e_estimate: Option<f64>,
    pub wall_clock_ms: f64,
    pub status: RunStatus,
    pub failure: Option<String>,
    pub trace_path: Option<String>,
}

/// JSON has no literal for infinity, so the SNR field round-trips the
/// noiseless sentinel through the string "inf".
mod inf_float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::custom(format!("bad float string '{other}'"))),
            },
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordsHeader {
    schema: String,
    version: u32,
    count: usize,
}

const RECORDS_SCHEMA_NAME: &str = "fri-run-records";

/// Write the record set: header line, then one JSON record per line.
pub fn export_records(records: &[RunRecord], path: &Path) -> Result<(), HarnessError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = RecordsHeader {
        schema: RECORDS_SCHEMA_NAME.to_string(),
        version: RECORDS_SCHEMA_VERSION,
        count: records.len(),
    };
    writeln!(file, "{}", serde_json::to_string(&header).expect("header"))?;
    for r in records {
        writeln!(file, "{}", serde_json::to_string(r).expect("record"))?;
    }
    Ok(())
}

/// Read a record set back, validating the schema version and reporting
/// malformed rows with their line numbers.
pub fn import_records(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let file = BufReader::new(std::fs::File::open(path)?);
    let mut lines = file.lines().enumerate();
    let (_, first) = lines.next().ok_or(HarnessError::Parse {
        line: 1,
        message: "empty file: missing header".into(),
    })?;
    let header: RecordsHeader =
        serde_json::from_str(&first?).map_err(|e| HarnessError::Parse {
            line: 1,
            message: format!("bad header: {e}"),
        })?;
    if header.schema != RECORDS_SCHEMA_NAME || header.version != RECORDS_SCHEMA_VERSION {
        return Err(HarnessError::RecordsVersion {
            found: header.version,
            expected: RECORDS_SCHEMA_VERSION,
        });
    }
    let mut records = Vec::with_capacity(header.count);
    for (idx, line) in lines {
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let record: RunRecord = serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    if records.len() != header.count {
        return Err(HarnessError::Parse {
            line: records.len() + 1,
            message: format!(
                "record count mismatch: header says {}, found {}",
                header.count,
                records.len()
            ),
        });
    }
    Ok(records)
}

/// One row of the plotting summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sigma_e: f64,
    pub n_samples: usize,
    pub method: Method,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_snr_db: f64,
    pub n_ok: usize,
    pub n_failed: usize,
}

/// Aggregate records per `(σ_e, N, method)` cell, in sweep order.
/// `n_ok` counts completed reconstructions (including projected-root
/// ones); `n_failed` counts hard failures, whose `error = 1` still enters
/// the mean.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(u64, usize)> = Vec::new();
    for r in records {
        let key = (r.sigma_e.to_bits(), r.n_samples);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let methods = [Method::Gibbs, Method::GibbsLlse, Method::Annihilator];
    let mut rows = Vec::new();
    for (sigma_bits, n) in keys {
        for method in methods {
            let cell: Vec<&RunRecord> = records
                .iter()
                .filter(|r| {
                    r.sigma_e.to_bits() == sigma_bits && r.n_samples == n && r.method == method
                })
                .collect();
            if cell.is_empty() {
                continue;
            }
            let errors: Vec<f64> = cell.iter().filter_map(|r| r.error).collect();
            let mean_error = errors.iter().sum::<f64>() / errors.len().max(1) as f64;
            let std_error = if errors.len() > 1 {
                (errors
                    .iter()
                    .map(|e| (e - mean_error) * (e - mean_error))
                    .sum::<f64>()
                    / (errors.len() - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            let mean_snr_db = if cell.iter().any(|r| r.snr_db.is_infinite()) {
                f64::INFINITY
            } else {
                cell.iter().map(|r| r.snr_db).sum::<f64>() / cell.len() as f64
            };
            let n_failed = cell
                .iter()
                .filter(|r| r.status == RunStatus::Failed)
                .count();
            rows.push(SummaryRow {
                sigma_e: f64::from_bits(sigma_bits),
                n_samples: n,
                method,
                mean_error,
                std_error,
                mean_snr_db,
                n_ok: cell.len() - n_failed,
                n_failed,
            });
        }
    }
    rows
}

/// Render the summary as CSV with the documented header.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("sigma_e,N,method,mean_E,std_E,mean_snr_db,n_ok,n_failed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.sigma_e,
            r.n_samples,
            r.method.as_str(),
            r.mean_error,
            r.std_error,
            r.mean_snr_db,
            r.n_ok,
            r.n_failed
        ));
    }
    out
}

/// Per-run chain trace: `sweep,c_1..c_K,t_1..t_K,sigma_e,neg_log_lik`.
pub fn write_trace_csv(trace: &ChainTrace, path: &Path) -> Result<(), HarnessError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let order = trace.states.first().map(|s| s.order()).unwrap_or(0);
    let mut header = String::from("sweep");
    for k in 1..=order {
        header.push_str(&format!(",c_{k}"));
    }
    for k in 1..=order {
        header.push_str(&format!(",t_{k}"));
    }
    header.push_str(",sigma_e,neg_log_lik");
    writeln!(file, "{header}")?;
    for (i, (state, nll)) in trace
        .states
        .iter()
        .zip(&trace.neg_log_likelihood)
        .enumerate()
    {
        let mut row = format!("{}", i + 1);
        for &c in &state.c {
            row.push_str(&format!(",{c}"));
        }
        for &t in &state.t {
            row.push_str(&format!(",{t}"));
        }
        row.push_str(&format!(",{},{}", state.sigma_e, nll));
        writeln!(file, "{row}")?;
    }
    Ok(())
}

/// Summary aggregated over every cell of one method; used by the CLI for
/// quick reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_error: f64,
    pub n_records: usize,
}

pub fn method_summary(records: &[RunRecord]) -> Vec<MethodSummary> {
    [Method::Gibbs, Method::GibbsLlse, Method::Annihilator]
        .into_iter()
        .filter_map(|method| {
            let errs: Vec<f64> = records
                .iter()
                .filter(|r| r.method == method)
                .filter_map(|r| r.error)
                .collect();
            if errs.is_empty() {
                return None;
            }
            Some(MethodSummary {
                method,
                mean_error: errs.iter().sum::<f64>() / errs.len() as f64,
                n_records: errs.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::GibbsState;

    fn sample_record(seed: u64, snr: f64) -> RunRecord {
        RunRecord {
            experiment: "t".into(),
            sigma_e: 0.5,
            n_samples: 30,
            seed_index: seed,
            method: Method::Gibbs,
            sigma_h: 2.0,
            period: 1.0,
            model_order: 2,
            truth_weights: vec![1.0, -2.0],
            truth_locations: vec![3.0, 9.0],
            estimate_weights: Some(vec![1.01, -1.99]),
            estimate_locations: Some(vec![3.02, 8.97]),
            error: Some(0.001 * (seed + 1) as f64),
            snr_db: snr,
            sigma_e_estimate: Some(0.51),
            wall_clock_ms: 12.5,
            status: RunStatus::Ok,
            failure: None,
            trace_path: None,
        }
    }

    #[test]
    fn records_round_trip_including_infinite_snr() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let records = vec![
            sample_record(0, 12.5),
            sample_record(1, f64::INFINITY),
            sample_record(2, 30.0),
        ];
        export_records(&records, &path).unwrap();
        let back = import_records(&path).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn empty_record_set_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        export_records(&[], &path).unwrap();
        assert_eq!(import_records(&path).unwrap(), Vec::<RunRecord>::new());
    }

    #[test]
    fn truncated_file_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        export_records(&[sample_record(0, 1.0), sample_record(1, 2.0)], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: String = text.lines().take(2).collect::<Vec<_>>().join("\n");
        let cut = &truncated[..truncated.len() - 10];
        std::fs::write(&path, cut).unwrap();
        match import_records(&path) {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error with line, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("old.jsonl");
        std::fs::write(
            &path,
            "{\"schema\":\"fri-run-records\",\"version\":0,\"count\":0}\n",
        )
        .unwrap();
        assert!(matches!(
            import_records(&path),
            Err(HarnessError::RecordsVersion { found: 0, .. })
        ));
    }

    #[test]
    fn summary_has_documented_header_and_is_stable() {
        let records = vec![sample_record(0, 10.0), sample_record(1, 12.0)];
        let rows = summarize(&records);
        let csv1 = summary_csv(&rows);
        let csv2 = summary_csv(&summarize(&records));
        assert_eq!(csv1, csv2);
        assert!(csv1.starts_with("sigma_e,N,method,mean_E,std_E,mean_snr_db,n_ok,n_failed\n"));
        assert!(csv1.contains("0.5,30,gibbs,"));
    }

    #[test]
    fn summary_infinite_snr_prints_inf() {
        let records = vec![sample_record(0, f64::INFINITY)];
        let csv = summary_csv(&summarize(&records));
        assert!(csv.lines().nth(1).unwrap().contains(",inf,"));
    }

    #[test]
    fn trace_csv_has_expected_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let trace = ChainTrace {
            states: vec![
                GibbsState {
                    c: vec![1.0, 2.0],
                    t: vec![3.0, 4.0],
                    sigma_e: 0.5,
                },
                GibbsState {
                    c: vec![1.1, 2.1],
                    t: vec![3.1, 4.1],
                    sigma_e: 0.6,
                },
            ],
            neg_log_likelihood: vec![10.0, 9.0],
            rejection_fallback_count: 0,
        };
        write_trace_csv(&trace, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "sweep,c_1,c_2,t_1,t_2,sigma_e,neg_log_lik"
        );
        assert_eq!(lines.next().unwrap(), "1,1,2,3,4,0.5,10");
        assert_eq!(lines.next().unwrap(), "2,1.1,2.1,3.1,4.1,0.6,9");
    }
}
