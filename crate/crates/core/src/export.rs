//! Text outputs: run traces, amplitude snapshots, run descriptors and
//! expected-query tables.
//!
//! Every table starts with `#` comment lines supplied by the caller (tool
//! version, resolved configuration) followed by a CSV header row.

use crate::analysis::QueryPoint;
use crate::error::{Error, Result};
use crate::objective::{ObjectiveTable, TableSource};
use crate::schedule::{IterationRecord, KScan, OracleSchedule, RunTrace, SizeCurve};
use crate::state::{Amplitudes, QuantumState, Representation};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write;

pub const TRACE_HEADER: &str = "iter,k,p_solution,p_worst,mean_re,mean_im,norm_err,amplifying";
pub const SNAPSHOT_HEADER: &str = "x,f,amp_re,amp_im";
pub const COMPRESSED_SNAPSHOT_HEADER: &str = "x,f,amp_re,amp_im,multiplicity";
pub const QUERY_HEADER: &str = "t,e_q,p_solution";
pub const K_CURVE_HEADER: &str = "stage,iterations,k,peak_p,peak_iteration";
pub const SIZE_CURVE_HEADER: &str = "n,k,iter,ratio";

/// Shortest round-trip decimal; exponent form outside a readable range.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn comment_block(buf: &mut String, header: &[String]) {
    for line in header {
        for part in line.lines() {
            writeln!(buf, "# {part}").unwrap();
        }
    }
}

fn repr_name(r: Representation) -> &'static str {
    match r {
        Representation::Dense => "dense",
        Representation::Compressed => "compressed",
    }
}

pub fn write_trace_csv<W: Write>(mut out: W, trace: &RunTrace, header: &[String]) -> Result<()> {
    let mut buf = String::new();
    comment_block(&mut buf, header);
    writeln!(buf, "# n_states: {}", trace.n_states).unwrap();
    writeln!(buf, "# solution_count: {}", trace.solution_count).unwrap();
    writeln!(buf, "# representation: {}", repr_name(trace.representation)).unwrap();
    writeln!(buf, "# tuning_queries: {}", trace.tuning_queries).unwrap();
    writeln!(buf, "{TRACE_HEADER}").unwrap();
    for r in &trace.records {
        writeln!(
            buf,
            "{},{},{},{},{},{},{},{}",
            r.iteration,
            fmt_f64(r.k_used),
            fmt_f64(r.p_solution),
            fmt_f64(r.p_worst),
            fmt_f64(r.mean.re),
            fmt_f64(r.mean.im),
            fmt_f64(r.norm_error),
            u8::from(r.amplifying)
        )
        .unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Reads a trace written by [`write_trace_csv`].
pub fn parse_trace_csv(text: &str) -> Result<RunTrace> {
    let mut n_states = None;
    let mut solution_count = 1;
    let mut representation = Representation::Dense;
    let mut tuning_queries = 0;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut saw_header = false;
    let meta = |line: usize, v: &str| -> Result<usize> {
        v.trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad integer {v:?}"),
        })
    };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.trim().split_once(':') {
                match key.trim() {
                    "n_states" => n_states = Some(meta(line_no, value)?),
                    "solution_count" => solution_count = meta(line_no, value)?,
                    "tuning_queries" => tuning_queries = meta(line_no, value)? as u64,
                    "representation" if value.trim() == "compressed" => representation = Representation::Compressed,
                    _ => {}
                }
            }
            continue;
        }
        if !saw_header {
            if line != TRACE_HEADER {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header {TRACE_HEADER:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let num = |idx: usize| -> Result<f64> {
            fields[idx].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad number {:?}", fields[idx]),
            })
        };
        records.push(IterationRecord {
            iteration: meta(line_no, fields[0])?,
            k_used: num(1)?,
            p_solution: num(2)?,
            p_worst: num(3)?,
            mean: Complex64::new(num(4)?, num(5)?),
            norm_error: num(6)?,
            amplifying: fields[7] == "1",
        });
    }
    let n_states = n_states.ok_or(Error::Parse {
        line: 0,
        message: "missing `# n_states:` line".into(),
    })?;
    if records.len() < 2 {
        return Err(Error::Parse {
            line: 0,
            message: "trace needs at least two records".into(),
        });
    }
    let schedule = OracleSchedule::new(records[1..].iter().map(|r| r.k_used).collect())?;
    Ok(RunTrace {
        records,
        table: TableSource::Values,
        n_states,
        solution_count,
        representation,
        schedule,
        tuning_queries,
    })
}

/// Amplitude table for complex-plane plots: one row per basis index (dense) or
/// per unique value with its multiplicity (compressed).
pub fn write_snapshot_csv<W: Write>(
    mut out: W,
    state: &QuantumState,
    table: &ObjectiveTable,
    header: &[String],
) -> Result<()> {
    if state.n_states() != table.n_states() {
        return Err(Error::Dimension(format!(
            "state has {} basis states but table has {}",
            state.n_states(),
            table.n_states()
        )));
    }
    let mut buf = String::new();
    comment_block(&mut buf, header);
    match state.amplitudes() {
        Amplitudes::Dense(amps) => {
            writeln!(buf, "{SNAPSHOT_HEADER}").unwrap();
            for (x, (a, f)) in amps.iter().zip(table.values()).enumerate() {
                writeln!(buf, "{x},{},{},{}", fmt_f64(*f), fmt_f64(a.re), fmt_f64(a.im)).unwrap();
            }
        }
        Amplitudes::Compressed(groups) => {
            writeln!(buf, "{COMPRESSED_SNAPSHOT_HEADER}").unwrap();
            let mut x = 0;
            for g in groups {
                writeln!(
                    buf,
                    "{x},{},{},{},{}",
                    fmt_f64(g.value),
                    fmt_f64(g.amplitude.re),
                    fmt_f64(g.amplitude.im),
                    g.multiplicity
                )
                .unwrap();
                x += g.multiplicity;
            }
        }
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Peak probability against `k` for every stage of a scan.
pub fn write_k_curve<W: Write>(mut out: W, stages: &[KScan], header: &[String]) -> Result<()> {
    let mut buf = String::new();
    comment_block(&mut buf, header);
    writeln!(buf, "{K_CURVE_HEADER}").unwrap();
    for (s, scan) in stages.iter().enumerate() {
        let iterations = scan.trace_best.records.len() - 1;
        for p in &scan.curve {
            writeln!(
                buf,
                "{s},{iterations},{},{},{}",
                fmt_f64(p.k),
                fmt_f64(p.peak_p),
                p.peak_iteration
            )
            .unwrap();
        }
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// `P_solution / P_initial` per iteration for every size of a study.
pub fn write_size_curves<W: Write>(mut out: W, curves: &[SizeCurve], header: &[String]) -> Result<()> {
    let mut buf = String::new();
    comment_block(&mut buf, header);
    writeln!(buf, "{SIZE_CURVE_HEADER}").unwrap();
    for c in curves {
        for (t, r) in c.ratio.iter().enumerate() {
            writeln!(buf, "{},{},{t},{}", c.n_states, fmt_f64(c.k), fmt_f64(*r)).unwrap();
        }
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn write_query_table<W: Write>(mut out: W, curve: &[QueryPoint], header: &[String]) -> Result<()> {
    let mut buf = String::new();
    comment_block(&mut buf, header);
    writeln!(buf, "{QUERY_HEADER}").unwrap();
    for p in curve {
        writeln!(buf, "{},{},{}", p.t, fmt_f64(p.e_q), fmt_f64(p.p_solution)).unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakStats {
    pub iteration: usize,
    pub p_solution: f64,
    pub p_worst_at_peak: f64,
    pub max_norm_error: f64,
}

/// Machine-readable summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDescriptor {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub table: TableSource,
    pub rng: Option<String>,
    pub seed: Option<u64>,
    pub n_states: usize,
    pub solution_count: usize,
    pub representation: Representation,
    pub schedule: Vec<f64>,
    pub tuning_queries: u64,
    pub peak: PeakStats,
}

impl RunDescriptor {
    pub fn new(tool: &str, version: &str, command: &str, config: serde_json::Value, trace: &RunTrace) -> Self {
        let (iteration, p_solution) = trace.peak();
        let seed = match &trace.table {
            TableSource::Distribution(spec) => Some(spec.seed),
            _ => None,
        };
        Self {
            tool: tool.to_string(),
            version: version.to_string(),
            command: command.to_string(),
            config,
            table: trace.table.clone(),
            rng: seed.map(|_| crate::objective::RNG_NAME.to_string()),
            seed,
            n_states: trace.n_states,
            solution_count: trace.solution_count,
            representation: trace.representation,
            schedule: trace.schedule.entries().to_vec(),
            tuning_queries: trace.tuning_queries,
            peak: PeakStats {
                iteration,
                p_solution,
                p_worst_at_peak: trace.records[iteration].p_worst,
                max_norm_error: trace.max_norm_error(),
            },
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Domain(e.to_string()))?;
        text.push('\n');
        out.write_all(text.as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{make_injective, DistributionSpec, InjectiveKind, InjectiveSpec};
    use crate::schedule::{run_fixed_k, Simulator};
    use crate::state::{apply_phase_oracle, OracleParameter};
    use std::f64::consts::PI;

    #[test]
    fn trace_csv_round_trips() {
        let table = crate::objective::sample_distribution(&DistributionSpec::normal(0.0, 10.0, 3), 500).unwrap();
        let trace = run_fixed_k(&table, 0.05, 12).unwrap();
        let mut bytes = Vec::new();
        write_trace_csv(&mut bytes, &trace, &["tool: test".into()]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("# tool: test\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 13);
        let back = parse_trace_csv(&text).unwrap();
        assert_eq!(back.records, trace.records);
        assert_eq!(back.n_states, 500);
        assert_eq!(back.schedule, trace.schedule);
    }

    #[test]
    fn malformed_trace_reports_line() {
        let text = format!("# n_states: 4\n{TRACE_HEADER}\n0,0,0.25,0.25,0.5,0,0,0\n1,x,0.25,0.25,0.5,0,0,0\n");
        match parse_trace_csv(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn snapshot_of_quadratic_sixteen() {
        let table = make_injective(&InjectiveSpec::new(InjectiveKind::Quadratic, 16)).unwrap();
        let mut state = QuantumState::uniform(16).unwrap();
        apply_phase_oracle(&mut state, &table, OracleParameter::new(PI / 225.0).unwrap()).unwrap();
        let mut bytes = Vec::new();
        write_snapshot_csv(&mut bytes, &state, &table, &[]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], SNAPSHOT_HEADER);
        assert_eq!(rows.len(), 17);
        let last: Vec<f64> = rows[16].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(last[0], 15.0);
        assert_eq!(last[1], 225.0);
        assert!((last[3].atan2(last[2]).abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn compressed_snapshot_has_multiplicity() {
        let table = ObjectiveTable::from_values(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let (_, state) = Simulator::new(&table)
            .with_representation(Representation::Compressed)
            .evolve(&OracleSchedule::constant(PI, 1).unwrap())
            .unwrap();
        let mut bytes = Vec::new();
        write_snapshot_csv(&mut bytes, &state, &table, &[]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], COMPRESSED_SNAPSHOT_HEADER);
        assert_eq!(rows.len(), 3);
        assert!(rows[1].starts_with("0,0,") && rows[1].ends_with(",3"));
        assert!(rows[2].starts_with("3,1,") && rows[2].ends_with(",1"));
    }

    #[test]
    fn descriptor_carries_seed_and_peak() {
        let spec = DistributionSpec::exponential(1.0, 77);
        let table = crate::objective::sample_distribution(&spec, 300).unwrap();
        let trace = run_fixed_k(&table, 0.4, 10).unwrap();
        let d = RunDescriptor::new("spo", "0.1.0", "run", serde_json::json!({"k": 0.4}), &trace);
        assert_eq!(d.seed, Some(77));
        assert_eq!(d.rng.as_deref(), Some("chacha20"));
        assert_eq!(d.schedule.len(), 10);
        assert_eq!(d.peak.iteration, trace.peak().0);
        let mut bytes = Vec::new();
        d.write(&mut bytes).unwrap();
        let back: RunDescriptor = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(1e-300), "1e-300");
        assert_eq!(fmt_f64(-3.5e-7), "-3.5e-7");
        assert_eq!("1e-300".parse::<f64>().unwrap(), 1e-300);
    }
}
