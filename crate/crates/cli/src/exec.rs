//! Runs a resolved [`ExperimentConfig`] and writes its output files.

use crate::config::{sibling, CommandConfig, ExperimentConfig, ObjectiveConfig, SnapshotStage};
use crate::CliError;
use serde::Serialize;
use spo_core::export::{
    parse_trace_csv, write_k_curve, write_query_table, write_size_curves, write_snapshot_csv, write_trace_csv,
    RunDescriptor,
};
use spo_core::schedule::default_greedy_grid;
use spo_core::{
    advantage_report, apply_phase_oracle, expected_queries, load_table, make_injective, sample_distribution,
    size_scaling_study, AdvantageReport, InjectiveSpec, ObjectiveTable, OracleParameter, OracleSchedule, QuantumState,
    RunTrace, Simulator,
};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub const TOOL: &str = "spo";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// One-line human summary.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Runs `config`, honouring its thread cap.
pub fn execute(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    match config.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Config {
                    flag: "--threads".into(),
                    message: e.to_string(),
                })?;
            pool.install(|| dispatch(config))
        }
        None => dispatch(config),
    }
}

fn header(config: &ExperimentConfig) -> Vec<String> {
    let json = serde_json::to_string(config).expect("config serializes");
    vec![format!("{TOOL} {VERSION}"), format!("config: {json}")]
}

fn build_table(objective: &ObjectiveConfig) -> Result<ObjectiveTable, CliError> {
    Ok(match objective {
        ObjectiveConfig::Distribution { spec, n } => sample_distribution(spec, *n)?,
        ObjectiveConfig::Injective { spec } => make_injective(spec)?,
        ObjectiveConfig::File { path } => load_table(path)?,
    })
}

fn write_file(path: &Path, fill: impl FnOnce(&mut Vec<u8>) -> spo_core::Result<()>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, buf).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn positive_f_max(table: &ObjectiveTable) -> Result<f64, CliError> {
    let f = table.max_value();
    if f > 0.0 {
        Ok(f)
    } else {
        Err(spo_core::Error::Domain("all objective values are equal; no k range to default to".into()).into())
    }
}

/// Peak, optimal stopping point and speedup of a trace.
fn trace_summary(trace: &RunTrace) -> String {
    let (t_peak, p_peak) = trace.peak();
    let stopping = match expected_queries(trace) {
        Ok(q) => format!(
            "t*={} e_q*={:.6e} speedup={:.6e}",
            q.t_star,
            q.e_q_star,
            q.e_c / q.e_q_star
        ),
        Err(_) => "t*=undefined".to_string(),
    };
    format!("peak p_solution={p_peak:.6} at t={t_peak} {stopping}")
}

fn write_trace_pair(config: &ExperimentConfig, trace: &RunTrace, csv: &Path) -> Result<Vec<PathBuf>, CliError> {
    let head = header(config);
    write_file(csv, |b| write_trace_csv(b, trace, &head))?;
    let json = sibling(csv, "", "json");
    let config_value = serde_json::to_value(config).expect("config serializes");
    let descriptor = RunDescriptor::new(TOOL, VERSION, config.command.name(), config_value, trace);
    write_file(&json, |b| descriptor.write(b))?;
    Ok(vec![csv.to_path_buf(), json])
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    tool: &'a str,
    version: &'a str,
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    report: &'a AdvantageReport,
}

fn dispatch(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let name = config.command.name();
    let head = header(config);
    // study-size builds its own tables, one per size
    let table = match (&config.objective, &config.command) {
        (_, CommandConfig::StudySize { .. }) | (None, _) => None,
        (Some(objective), _) => Some(build_table(objective)?),
    };
    let sim = table
        .as_ref()
        .map(|t| Simulator::new(t).with_representation(config.representation_for(t.n_states())));
    let out = config.out.clone();
    let (summary, files) = match &config.command {
        CommandConfig::Run { k, iterations } => {
            let trace = sim.expect("table").run_fixed_k(*k, *iterations)?;
            (trace_summary(&trace), write_trace_pair(config, &trace, &out)?)
        }
        CommandConfig::Alternate { k, iterations } => {
            let alt = sim.expect("table").alternating_k(*k, *iterations)?;
            let max_imag = alt.mean_imag.iter().copied().fold(0.0, f64::max);
            let summary = format!("{} max|Im(mean)|={max_imag:.3e}", trace_summary(&alt.trace));
            (summary, write_trace_pair(config, &alt.trace, &out)?)
        }
        CommandConfig::Greedy { iterations, k_grid } => {
            let table = table.as_ref().expect("table");
            let grid = match k_grid {
                Some(g) => g.clone(),
                None => default_greedy_grid(positive_f_max(table)?),
            };
            let trace = sim.expect("table").greedy_dynamic_k(*iterations, &grid)?;
            let summary = format!("{} tuning_queries={}", trace_summary(&trace), trace.tuning_queries);
            (summary, write_trace_pair(config, &trace, &out)?)
        }
        CommandConfig::ScanK { k_min, k_max, stages } => {
            let table = table.as_ref().expect("table");
            let (lo, hi) = match (k_min, k_max) {
                (Some(lo), Some(hi)) => (*lo, *hi),
                _ => {
                    let f = positive_f_max(table)?;
                    (k_min.unwrap_or(PI / (4.0 * f)), k_max.unwrap_or(3.0 * PI / f))
                }
            };
            let scans = sim.expect("table").refine_scan(lo, hi, stages)?;
            write_file(&out, |b| write_k_curve(b, &scans, &head))?;
            let best = scans.last().expect("at least one stage");
            let mut files = vec![out.clone()];
            files.extend(write_trace_pair(
                config,
                &best.trace_best,
                &sibling(&out, "_best", "csv"),
            )?);
            (
                format!("k_best={:.12e} {}", best.k_best, trace_summary(&best.trace_best)),
                files,
            )
        }
        CommandConfig::StudySize {
            sizes,
            k_scale,
            iters_scale,
        } => {
            let Some(ObjectiveConfig::Injective { spec }) = &config.objective else {
                unreachable!("validated as injective")
            };
            let f_max = |n: usize| make_injective(&InjectiveSpec { n_states: n, ..*spec }).map(|t| t.max_value());
            let k_of: Vec<(usize, f64)> = sizes
                .iter()
                .map(|&n| f_max(n).map(|f| (n, k_scale * PI / f)))
                .collect::<spo_core::Result<_>>()?;
            let k_rule = |n: usize| {
                k_of.iter()
                    .find(|(m, _)| *m == n)
                    .map(|(_, k)| *k)
                    .expect("listed size")
            };
            let iter_rule = |n: usize| (iters_scale * (n as f64).sqrt()).ceil() as usize;
            let curves = size_scaling_study(spec, sizes, k_rule, iter_rule)?;
            write_file(&out, |b| write_size_curves(b, &curves, &head))?;
            let peaks: Vec<String> = curves
                .iter()
                .map(|c| format!("{}:{:.4}", c.n_states, c.peak_ratio()))
                .collect();
            (format!("peak P/P0 by size {}", peaks.join(" ")), vec![out.clone()])
        }
        CommandConfig::Snapshot { k, iterations, stage } => {
            let table = table.as_ref().expect("table");
            let sim = sim.expect("table");
            let state = match stage {
                SnapshotStage::Diffusion => sim.evolve(&OracleSchedule::constant(*k, *iterations)?)?.1,
                SnapshotStage::Oracle => {
                    let mut state = if *iterations > 1 {
                        sim.evolve(&OracleSchedule::constant(*k, iterations - 1)?)?.1
                    } else {
                        QuantumState::uniform_for(table, sim.representation())
                    };
                    apply_phase_oracle(&mut state, table, OracleParameter::new(*k)?)?;
                    state
                }
            };
            write_file(&out, |b| write_snapshot_csv(b, &state, table, &head))?;
            let top = state.last_amplitude();
            let summary = format!(
                "snapshot after {} of iteration {iterations}: top state |a|={:.6} arg={:.6}",
                match stage {
                    SnapshotStage::Oracle => "oracle",
                    SnapshotStage::Diffusion => "diffusion",
                },
                top.norm(),
                top.arg()
            );
            (summary, vec![out.clone()])
        }
        CommandConfig::Report { trace, k, iterations } => {
            let run = match trace {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    parse_trace_csv(&text)?
                }
                None => sim
                    .expect("table")
                    .run_fixed_k(k.expect("k"), iterations.expect("iterations"))?,
            };
            let report = advantage_report(&run)?;
            let doc = ReportDocument {
                tool: TOOL,
                version: VERSION,
                config,
                report: &report,
            };
            let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
            text.push('\n');
            write_file(&out, |b| {
                b.extend_from_slice(text.as_bytes());
                Ok(())
            })?;
            let eq = sibling(&out, "_eq", "csv");
            write_file(&eq, |b| write_query_table(b, &report.e_q_curve, &head))?;
            let summary = format!(
                "peak p_solution={:.6} at t={} t*={} e_q*={:.6e} speedup={:.6e}",
                report.peak_p_solution, report.peak_iteration, report.t_star, report.e_q_star, report.speedup
            );
            (summary, vec![out.clone(), eq])
        }
    };
    Ok(Outcome {
        summary: format!("{name}: {summary}"),
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Cli;
    use clap::Parser;

    fn run(args: &[&str]) -> Outcome {
        let cli = Cli::try_parse_from(std::iter::once("spo").chain(args.iter().copied())).unwrap();
        execute(&ExperimentConfig::from_cli(&cli).unwrap()).unwrap()
    }

    #[test]
    fn outputs_are_byte_identical_across_runs_and_thread_caps() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let common = [
            "--objective",
            "skew-normal",
            "--alpha",
            "5",
            "--n",
            "5000",
            "--seed",
            "3",
            "--k",
            "0.05",
            "--iters",
            "40",
        ];
        let mut args_a = vec!["run"];
        args_a.extend(common);
        args_a.extend(["--out", a.to_str().unwrap(), "--threads", "1"]);
        let mut args_b = vec!["run"];
        args_b.extend(common);
        args_b.extend(["--out", b.to_str().unwrap(), "--threads", "3"]);
        run(&args_a);
        let first = std::fs::read(&a).unwrap();
        run(&args_a);
        assert_eq!(std::fs::read(&a).unwrap(), first);
        run(&args_b);
        let strip = |p: &Path| {
            std::fs::read_to_string(p)
                .unwrap()
                .replace(a.to_str().unwrap(), "")
                .replace(b.to_str().unwrap(), "")
        };
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(strip(&sibling(&a, "", "json")), strip(&sibling(&b, "", "json")));
    }

    #[test]
    fn report_reads_a_written_trace() {
        let dir = tempfile::tempdir().unwrap();
        let trace = dir.path().join("t.csv");
        let report = dir.path().join("r.json");
        run(&[
            "run",
            "--objective",
            "linear",
            "--n",
            "256",
            "--k",
            "pi/255",
            "--iters",
            "30",
            "--out",
            trace.to_str().unwrap(),
        ]);
        let direct = run(&[
            "report",
            "--objective",
            "linear",
            "--n",
            "256",
            "--k",
            "pi/255",
            "--iters",
            "30",
            "--out",
            report.to_str().unwrap(),
        ]);
        let from_file = run(&[
            "report",
            "--trace",
            trace.to_str().unwrap(),
            "--out",
            report.to_str().unwrap(),
        ]);
        assert_eq!(direct.summary, from_file.summary);
        let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(doc["n_states"], 256);
        assert_eq!(doc["e_c"], 256.0);
        assert!(std::fs::read_to_string(dir.path().join("r_eq.csv"))
            .unwrap()
            .contains("t,e_q,p_solution\n1,"));
    }
}
