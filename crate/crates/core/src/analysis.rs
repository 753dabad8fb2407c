//! Query accounting over run traces.
//!
//! One oracle + diffusion pair counts as one query; the diffusion is free. A
//! sampling scheme that runs `t` iterations and measures succeeds with
//! probability `p(t)`, so the expected number of queries is `t / p(t)`.
//! Classically the solution is found in `N` queries.

use crate::error::{Error, Result};
use crate::schedule::RunTrace;
use serde::{Deserialize, Serialize};

/// Success target used for the trials-needed figure in reports.
pub const REPORT_SUCCESS_TARGET: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryPoint {
    pub t: usize,
    pub e_q: f64,
    pub p_solution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryAnalysis {
    pub n_states: usize,
    pub e_q_curve: Vec<QueryPoint>,
    pub t_star: usize,
    pub e_q_star: f64,
    pub p_at_t_star: f64,
    /// Classical exhaustive expectation, `N`.
    pub e_c: f64,
    /// Classical single-sample success probability, `1/N`.
    pub p_c: f64,
}

pub fn expected_queries(trace: &RunTrace) -> Result<QueryAnalysis> {
    let curve: Vec<QueryPoint> = trace
        .records
        .iter()
        .filter(|r| r.iteration >= 1 && r.p_solution > 0.0)
        .map(|r| QueryPoint {
            t: r.iteration,
            e_q: r.iteration as f64 / r.p_solution,
            p_solution: r.p_solution,
        })
        .collect();
    let Some(first) = curve.first() else {
        return Err(Error::UndefinedExpectation(
            "solution probability is zero at every iteration t >= 1".into(),
        ));
    };
    let mut best = *first;
    for p in &curve[1..] {
        if p.e_q < best.e_q {
            best = *p;
        }
    }
    let n = trace.n_states as f64;
    Ok(QueryAnalysis {
        n_states: trace.n_states,
        e_q_curve: curve,
        t_star: best.t,
        e_q_star: best.e_q,
        p_at_t_star: best.p_solution,
        e_c: n,
        p_c: 1.0 / n,
    })
}

/// Independent repetitions of a single-shot experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessModel {
    pub p_single: f64,
    pub trials: u64,
}

impl SuccessModel {
    pub fn new(p_single: f64, trials: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_single) {
            return Err(Error::Domain(format!(
                "single-trial probability {p_single} outside [0, 1]"
            )));
        }
        if trials == 0 {
            return Err(Error::Domain("need at least one trial".into()));
        }
        Ok(Self { p_single, trials })
    }
}

/// `1 − (1 − p)^trials`
pub fn success_probability(model: &SuccessModel) -> f64 {
    let miss = 1.0 - model.p_single;
    let all_miss = match i32::try_from(model.trials) {
        Ok(t) => miss.powi(t),
        Err(_) => miss.powf(model.trials as f64),
    };
    (1.0 - all_miss).clamp(0.0, 1.0)
}

/// Fewest trials reaching `target` success probability; `None` when `p_single` is 0.
pub fn trials_for(p_single: f64, target: f64) -> Option<u64> {
    if target <= 0.0 || p_single >= 1.0 {
        return Some(1);
    }
    if p_single <= 0.0 || target >= 1.0 {
        return None;
    }
    let estimate = ((1.0 - target).ln() / (1.0 - p_single).ln()).ceil().max(1.0);
    let mut trials = estimate as u64;
    let hit = |t: u64| success_probability(&SuccessModel { p_single, trials: t }) >= target;
    while trials > 1 && hit(trials - 1) {
        trials -= 1;
    }
    while !hit(trials) {
        trials += 1;
    }
    Some(trials)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageReport {
    pub n_states: usize,
    pub e_c: f64,
    pub p_c: f64,
    pub t_star: usize,
    pub e_q_star: f64,
    pub p_at_t_star: f64,
    /// `E_C / e_q(t*)`
    pub speedup: f64,
    pub success_target: f64,
    pub trials_for_target: Option<u64>,
    pub peak_iteration: usize,
    pub peak_p_solution: f64,
    pub tuning_queries: u64,
    pub e_q_curve: Vec<QueryPoint>,
}

pub fn advantage_report(trace: &RunTrace) -> Result<AdvantageReport> {
    let q = expected_queries(trace)?;
    let (peak_iteration, peak_p_solution) = trace.peak();
    Ok(AdvantageReport {
        n_states: q.n_states,
        e_c: q.e_c,
        p_c: q.p_c,
        t_star: q.t_star,
        e_q_star: q.e_q_star,
        p_at_t_star: q.p_at_t_star,
        speedup: q.e_c / q.e_q_star,
        success_target: REPORT_SUCCESS_TARGET,
        trials_for_target: trials_for(q.p_at_t_star, REPORT_SUCCESS_TARGET),
        peak_iteration,
        peak_p_solution,
        tuning_queries: trace.tuning_queries,
        e_q_curve: q.e_q_curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{ObjectiveTable, TableSource};
    use crate::schedule::{run_fixed_k, IterationRecord, OracleSchedule};
    use crate::state::Representation;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn synthetic(n: usize, ps: &[f64]) -> RunTrace {
        let records = ps
            .iter()
            .enumerate()
            .map(|(i, &p)| IterationRecord {
                iteration: i,
                k_used: if i == 0 { 0.0 } else { 1.0 },
                p_solution: p,
                p_worst: 0.0,
                mean: Complex64::new(0.0, 0.0),
                norm_error: 0.0,
                amplifying: false,
            })
            .collect();
        RunTrace {
            records,
            table: TableSource::Values,
            n_states: n,
            solution_count: 1,
            representation: Representation::Dense,
            schedule: OracleSchedule::constant(1.0, ps.len().max(2) - 1).unwrap(),
            tuning_queries: 0,
        }
    }

    #[test]
    fn direct_formula() {
        let mut ps = vec![0.001; 101];
        ps[100] = 0.5;
        let q = expected_queries(&synthetic(1000, &ps)).unwrap();
        let at_100 = q.e_q_curve.iter().find(|p| p.t == 100).unwrap();
        assert_eq!(at_100.e_q, 200.0);
        assert_eq!(q.e_c, 1000.0);
        assert_eq!(q.p_c, 0.001);
    }

    #[test]
    fn zero_k_degenerates_to_classical() {
        let table = ObjectiveTable::from_values((0..128).map(f64::from).collect()).unwrap();
        let trace = run_fixed_k(&table, 0.0, 10).unwrap();
        let q = expected_queries(&trace).unwrap();
        assert_eq!(q.t_star, 1);
        assert!((q.e_q_star - 128.0).abs() < 1e-9);
        for p in &q.e_q_curve {
            assert!((p.e_q - p.t as f64 * 128.0).abs() < 1e-9);
        }
        let report = advantage_report(&trace).unwrap();
        assert!((report.speedup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_probability_is_an_error() {
        let trace = synthetic(10, &[0.1, 0.0, 0.0]);
        assert!(matches!(expected_queries(&trace), Err(Error::UndefinedExpectation(_))));
    }

    #[test]
    fn ties_pick_the_earliest_t() {
        let trace = synthetic(10, &[0.1, 0.25, 0.5, 0.2]);
        let q = expected_queries(&trace).unwrap();
        assert_eq!(q.t_star, 1);
        assert_eq!(q.e_q_star, 4.0);
    }

    #[test]
    fn success_examples() {
        let p = success_probability(&SuccessModel::new(0.97, 3).unwrap());
        assert_eq!(format!("{p:.6}"), "0.999973");
        assert_eq!(success_probability(&SuccessModel::new(0.0, 17).unwrap()), 0.0);
        assert_eq!(success_probability(&SuccessModel::new(0.5, 1).unwrap()), 0.5);
        assert!(SuccessModel::new(1.5, 1).is_err());
        assert!(SuccessModel::new(0.5, 0).is_err());
    }

    #[test]
    fn trials_needed() {
        assert_eq!(trials_for(0.5, 0.99), Some(7));
        assert_eq!(trials_for(0.97, 0.99), Some(2));
        assert_eq!(trials_for(1.0, 0.99), Some(1));
        assert_eq!(trials_for(0.0, 0.99), None);
        // 1 - 0.9^t >= 0.99 first holds at t = 44
        assert_eq!(trials_for(0.1, 0.99), Some(44));
    }

    proptest! {
        #[test]
        fn success_is_monotone(p in 0.0f64..=1.0, dp in 0.0f64..0.5, t in 1u64..200, dt in 0u64..50) {
            let p2 = (p + dp).min(1.0);
            let base = success_probability(&SuccessModel { p_single: p, trials: t });
            prop_assert!((0.0..=1.0).contains(&base));
            let more_p = success_probability(&SuccessModel { p_single: p2, trials: t });
            let more_trials = success_probability(&SuccessModel { p_single: p, trials: t + dt });
            prop_assert!(more_p >= base);
            prop_assert!(more_trials >= base);
        }

        #[test]
        fn e_q_identity_and_optimal_stopping(ps in proptest::collection::vec(1e-6f64..1.0, 2..60)) {
            let trace = synthetic(1 << 12, &ps);
            let q = expected_queries(&trace).unwrap();
            for p in &q.e_q_curve {
                prop_assert!(p.e_q > 0.0);
                prop_assert!((p.e_q * p.p_solution - p.t as f64).abs() <= 1e-12 * p.t as f64);
            }
            let at_peak = q.e_q_curve.iter().fold(q.e_q_curve[0], |a, &b| if b.p_solution > a.p_solution { b } else { a });
            prop_assert!(q.e_q_star <= at_peak.e_q);
        }
    }
}
