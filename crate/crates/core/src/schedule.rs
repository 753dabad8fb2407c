//! Oracle schedules and the amplification loop.
//!
//! A run prepares the uniform superposition and then, for every schedule
//! entry `k_j`, applies the phase oracle `O(k_j)` followed by the diffusion,
//! recording one [`IterationRecord`] per step. Variants built on top of the
//! loop: constant `k`, a grid scan over `k`, greedy per-step `k`, and the
//! alternating `+k, −k` schedule.

use crate::error::{Error, Result};
use crate::objective::{make_injective, InjectiveSpec, ObjectiveTable, TableSource};
use crate::state::{amplifies, Amplitudes, Phases, QuantumState, Representation, Sweep};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::Range;

/// Largest state size simulated densely by default.
pub const DENSE_LIMIT: usize = 1 << 22;

/// Number of log-spaced magnitudes in the default greedy grid.
pub const GREEDY_GRID_POINTS: usize = 64;

/// Dense up to [`DENSE_LIMIT`] states, compressed above.
pub fn default_representation(n_states: usize) -> Representation {
    if n_states <= DENSE_LIMIT {
        Representation::Dense
    } else {
        Representation::Compressed
    }
}

/// Default iteration budget for fixed-k runs: `⌈3√N⌉`.
pub fn default_iterations(n_states: usize) -> usize {
    (3.0 * (n_states as f64).sqrt()).ceil() as usize
}

/// `0` plus 64 log-spaced magnitudes from `π/(10·f_max)` to `π/f_max`, ascending.
pub fn default_greedy_grid(f_max: f64) -> Vec<f64> {
    let hi = PI / f_max;
    let lo = hi / 10.0;
    let mut grid = vec![0.0];
    let steps = (GREEDY_GRID_POINTS - 1) as f64;
    grid.extend((0..GREEDY_GRID_POINTS).map(|i| match i {
        0 => lo,
        i if i + 1 == GREEDY_GRID_POINTS => hi,
        i => lo * (hi / lo).powf(i as f64 / steps),
    }));
    grid
}

/// Per-iteration oracle strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSchedule {
    entries: Vec<f64>,
}

impl OracleSchedule {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("schedule must have at least one entry".into()));
        }
        if let Some(i) = entries.iter().position(|k| !k.is_finite()) {
            return Err(Error::Domain(format!("schedule entry {i} is not finite")));
        }
        Ok(Self { entries })
    }

    pub fn constant(k: f64, iterations: usize) -> Result<Self> {
        Self::new(vec![k; iterations])
    }

    /// `+k, −k, +k, …`
    pub fn alternating(k: f64, iterations: usize) -> Result<Self> {
        Self::new((0..iterations).map(|j| if j % 2 == 0 { k } else { -k }).collect())
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub k_used: f64,
    pub p_solution: f64,
    pub p_worst: f64,
    pub mean: Complex64,
    pub norm_error: f64,
    /// Whether the diffusion that produced this record grew the solution
    /// amplitude. Record 0 evaluates the condition on the uniform state.
    pub amplifying: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub table: TableSource,
    pub n_states: usize,
    pub solution_count: usize,
    pub representation: Representation,
    pub schedule: OracleSchedule,
    /// Candidate evaluations spent choosing `k` (greedy runs only).
    pub tuning_queries: u64,
}

impl RunTrace {
    /// Global maximum of `p_solution` as `(iteration, p)`; ties go to the earliest.
    pub fn peak(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for r in &self.records {
            if r.p_solution > best.1 {
                best = (r.iteration, r.p_solution);
            }
        }
        best
    }

    pub fn p_solution(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.p_solution).collect()
    }

    /// Largest norm error over the run.
    pub fn max_norm_error(&self) -> f64 {
        self.records.iter().map(|r| r.norm_error).fold(0.0, f64::max)
    }
}

/// One grid point of a `k` scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KPoint {
    pub k: f64,
    pub peak_p: f64,
    pub peak_iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KScan {
    pub k_best: f64,
    pub trace_best: RunTrace,
    pub curve: Vec<KPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    /// Evenly spaced grid including both ends.
    Grid,
    /// Golden-section search for the maximum; assumes one peak in the window.
    Golden,
}

/// One level of a coarse-to-fine `k` search: `points` runs of `iterations` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanStage {
    pub kind: StageKind,
    pub points: usize,
    pub iterations: usize,
}

impl ScanStage {
    pub fn grid(points: usize, iterations: usize) -> Self {
        Self {
            kind: StageKind::Grid,
            points,
            iterations,
        }
    }

    pub fn golden(points: usize, iterations: usize) -> Self {
        Self {
            kind: StageKind::Golden,
            points,
            iterations,
        }
    }
}

/// Grid steps kept on each side of the best `k` when narrowing to the next stage.
pub const REFINE_HALF_WIDTH: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingTrace {
    pub trace: RunTrace,
    /// `|Im(mean)|` per record.
    pub mean_imag: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCurve {
    pub n_states: usize,
    pub k: f64,
    /// `P_solution / P_initial` per record, with `P_initial = 1/N`.
    pub ratio: Vec<f64>,
}

impl SizeCurve {
    pub fn peak_ratio(&self) -> f64 {
        self.ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Rotated state waiting for its diffusion.
#[derive(Debug, Clone, Copy)]
struct Pending {
    iteration: usize,
    k: f64,
    mean: Complex64,
    amplifying: bool,
}

/// Runs oracle + diffusion pairs. The diffusion of step `j` is fused with the
/// oracle of step `j + 1` into one pass, so a record is produced one step late;
/// [`Engine::settle`] flushes it.
struct Engine<'t> {
    table: &'t ObjectiveTable,
    state: QuantumState,
    values: Vec<f64>,
    observe: [Range<usize>; 2],
    phase_cache: HashMap<u64, Vec<Complex64>>,
    pending: Option<Pending>,
    records: Vec<IterationRecord>,
}

impl<'t> Engine<'t> {
    fn new(table: &'t ObjectiveTable, repr: Representation) -> Self {
        Self::from_state(table, QuantumState::uniform_for(table, repr))
    }

    fn from_state(table: &'t ObjectiveTable, state: QuantumState) -> Self {
        let values = state.stored_values(table.values()).into_owned();
        let observe = match state.amplitudes() {
            Amplitudes::Dense(_) => [table.solution_set(), table.worst_set()],
            // the solution and worst sets are exactly the top and bottom groups
            Amplitudes::Compressed(g) => [g.len() - 1..g.len(), 0..1],
        };
        Self {
            table,
            state,
            values,
            observe,
            phase_cache: HashMap::new(),
            pending: None,
            records: Vec::new(),
        }
    }

    /// Precomputes phase factors for every `k` used more than once in `schedule`.
    fn prepare(&mut self, schedule: &OracleSchedule) {
        let mut uses: HashMap<u64, usize> = HashMap::new();
        for k in schedule.entries() {
            *uses.entry(k.to_bits()).or_default() += 1;
        }
        let mut repeated: Vec<u64> = uses.into_iter().filter(|&(_, n)| n > 1).map(|(k, _)| k).collect();
        repeated.sort_unstable();
        // bounded memory: a handful of distinct repeated values is the common case
        repeated.truncate(4);
        for bits in repeated {
            let k = f64::from_bits(bits);
            let phases = self.values.par_iter().map(|&f| Complex64::cis(k * f)).collect();
            self.phase_cache.insert(bits, phases);
        }
    }

    fn record_initial(&mut self) {
        let mean = crate::state::mean_amplitude(&self.state).expect("nonempty").value();
        let best = self.state.last_amplitude();
        self.records.push(IterationRecord {
            iteration: 0,
            k_used: 0.0,
            p_solution: self.state.probability_in(self.table.solution_set()),
            p_worst: self.state.probability_in(self.table.worst_set()),
            mean,
            norm_error: (self.state.norm_sqr() - 1.0).abs(),
            amplifying: amplifies(mean, best),
        });
    }

    fn finish(&mut self, pending: Pending, sweep: Sweep) {
        let (mean, norm_sqr) = sweep.reflected.expect("reflected");
        let [p_solution, p_worst] = sweep.observed.expect("observed");
        self.records.push(IterationRecord {
            iteration: pending.iteration,
            k_used: pending.k,
            p_solution,
            p_worst,
            mean,
            norm_error: (norm_sqr - 1.0).abs(),
            amplifying: pending.amplifying,
        });
    }

    /// One oracle + diffusion pair.
    fn step(&mut self, iteration: usize, k: f64) {
        let pending = self.pending.take();
        let reflect = pending.map(|p| p.mean);
        let observe = pending.map(|_| &self.observe);
        let phases = match self.phase_cache.get(&k.to_bits()) {
            Some(cached) => Phases::Cached(cached),
            None => Phases::Exact {
                values: &self.values,
                k,
            },
        };
        let sweep = self.state.sweep(reflect, observe, Some(phases));
        if let Some(p) = pending {
            self.finish(p, sweep);
        }
        let mean = sweep.rotated.expect("rotated");
        let amplifying = amplifies(mean, self.state.last_amplitude());
        self.pending = Some(Pending {
            iteration,
            k,
            mean,
            amplifying,
        });
    }

    /// Completes the outstanding diffusion, if any.
    fn settle(&mut self) {
        if let Some(p) = self.pending.take() {
            let sweep = self.state.sweep(Some(p.mean), Some(&self.observe), None);
            self.finish(p, sweep);
        }
    }
}

/// Runs schedules over one table in a fixed representation.
#[derive(Debug, Clone, Copy)]
pub struct Simulator<'t> {
    table: &'t ObjectiveTable,
    repr: Representation,
}

impl<'t> Simulator<'t> {
    /// Uses [`default_representation`] for the table size.
    pub fn new(table: &'t ObjectiveTable) -> Self {
        Self {
            table,
            repr: default_representation(table.n_states()),
        }
    }

    pub fn with_representation(mut self, repr: Representation) -> Self {
        self.repr = repr;
        self
    }

    pub fn table(&self) -> &'t ObjectiveTable {
        self.table
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    fn trace(&self, records: Vec<IterationRecord>, schedule: OracleSchedule, tuning_queries: u64) -> RunTrace {
        RunTrace {
            records,
            table: self.table.source().clone(),
            n_states: self.table.n_states(),
            solution_count: self.table.solution_set().len(),
            representation: self.repr,
            schedule,
            tuning_queries,
        }
    }

    /// Runs `schedule` and also returns the final state.
    pub fn evolve(&self, schedule: &OracleSchedule) -> Result<(RunTrace, QuantumState)> {
        let mut engine = Engine::new(self.table, self.repr);
        engine.prepare(schedule);
        engine.records.reserve(schedule.len() + 1);
        engine.record_initial();
        for (j, &k) in schedule.entries().iter().enumerate() {
            engine.step(j + 1, k);
        }
        engine.settle();
        Ok((self.trace(engine.records, schedule.clone(), 0), engine.state))
    }

    pub fn run_schedule(&self, schedule: &OracleSchedule) -> Result<RunTrace> {
        self.evolve(schedule).map(|(trace, _)| trace)
    }

    pub fn run_fixed_k(&self, k: f64, iterations: usize) -> Result<RunTrace> {
        self.run_schedule(&OracleSchedule::constant(k, iterations)?)
    }

    /// Runs a constant-`k` schedule at each of `grid_points` evenly spaced values
    /// in `[k_min, k_max]` and keeps the one with the highest peak.
    pub fn scan_k(&self, k_min: f64, k_max: f64, grid_points: usize, max_iterations: usize) -> Result<KScan> {
        if !(k_min.is_finite() && k_max.is_finite() && k_min < k_max) {
            return Err(Error::Domain(format!(
                "k range [{k_min}, {k_max}] is empty or not finite"
            )));
        }
        if grid_points < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points, got {grid_points}"
            )));
        }
        let grid = linspace(k_min, k_max, grid_points);
        self.scan_grid(&grid, max_iterations)
    }

    /// Like [`Simulator::scan_k`] over an explicit list of `k` values.
    pub fn scan_grid(&self, grid: &[f64], max_iterations: usize) -> Result<KScan> {
        if grid.is_empty() {
            return Err(Error::Domain("k grid is empty".into()));
        }
        let traces: Vec<RunTrace> = grid
            .par_iter()
            .map(|&k| self.run_fixed_k(k, max_iterations))
            .collect::<Result<_>>()?;
        Ok(best_of(grid.iter().copied().zip(traces).collect()))
    }

    /// Golden-section search for the `k` in `[k_min, k_max]` with the highest
    /// peak, using `evaluations` runs. Converges to a local maximum when the
    /// window holds several.
    pub fn golden_k(&self, k_min: f64, k_max: f64, evaluations: usize, max_iterations: usize) -> Result<KScan> {
        if !(k_min.is_finite() && k_max.is_finite() && k_min < k_max) {
            return Err(Error::Domain(format!(
                "k range [{k_min}, {k_max}] is empty or not finite"
            )));
        }
        if evaluations < 2 {
            return Err(Error::Domain(format!(
                "golden search needs at least 2 evaluations, got {evaluations}"
            )));
        }
        let shrink = (5f64.sqrt() - 1.0) / 2.0;
        let mut runs: Vec<(f64, RunTrace)> = Vec::with_capacity(evaluations);
        let mut eval = |k: f64| -> Result<f64> {
            let trace = self.run_fixed_k(k, max_iterations)?;
            let peak = trace.peak().1;
            runs.push((k, trace));
            Ok(peak)
        };
        let (mut a, mut b) = (k_min, k_max);
        let mut c = b - shrink * (b - a);
        let mut d = a + shrink * (b - a);
        let mut fc = eval(c)?;
        let mut fd = eval(d)?;
        for _ in 2..evaluations {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - shrink * (b - a);
                fc = eval(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + shrink * (b - a);
                fd = eval(d)?;
            }
        }
        runs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(best_of(runs))
    }

    /// Coarse-to-fine search: the first stage covers `[k_min, k_max]`, each later
    /// stage covers [`REFINE_HALF_WIDTH`] times the previous stage's finest
    /// `k` spacing on either side of its best `k`. Returns every stage; the last
    /// one holds the result.
    pub fn refine_scan(&self, k_min: f64, k_max: f64, stages: &[ScanStage]) -> Result<Vec<KScan>> {
        if stages.is_empty() {
            return Err(Error::Domain("refined scan needs at least one stage".into()));
        }
        let mut scans: Vec<KScan> = Vec::with_capacity(stages.len());
        let (mut lo, mut hi) = (k_min, k_max);
        for stage in stages {
            if let Some(prev) = scans.last() {
                let step = prev
                    .curve
                    .windows(2)
                    .map(|w| w[1].k - w[0].k)
                    .fold(f64::INFINITY, f64::min);
                lo = prev.k_best - REFINE_HALF_WIDTH * step;
                hi = prev.k_best + REFINE_HALF_WIDTH * step;
            }
            let scan = match stage.kind {
                StageKind::Grid => self.scan_k(lo, hi, stage.points, stage.iterations)?,
                StageKind::Golden => self.golden_k(lo, hi, stage.points, stage.iterations)?,
            };
            scans.push(scan);
        }
        Ok(scans)
    }

    /// At each step applies the candidate `k` whose single oracle + diffusion
    /// pair yields the highest `p_solution`; ties go to the smallest `k`.
    pub fn greedy_dynamic_k(&self, iterations: usize, k_grid: &[f64]) -> Result<RunTrace> {
        if k_grid.is_empty() {
            return Err(Error::Domain("greedy k grid is empty".into()));
        }
        if let Some(k) = k_grid.iter().find(|k| !k.is_finite()) {
            return Err(Error::Domain(format!("greedy k grid contains non-finite value {k}")));
        }
        if iterations == 0 {
            return Err(Error::Domain("greedy run needs at least one iteration".into()));
        }
        let mut candidates = k_grid.to_vec();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();

        let mut engine = Engine::new(self.table, self.repr);
        let mut chosen = Vec::with_capacity(iterations);
        engine.record_initial();
        for j in 1..=iterations {
            let scores: Vec<f64> = candidates
                .par_iter()
                .map(|&k| {
                    let mut probe = Engine::from_state(self.table, engine.state.clone());
                    probe.step(j, k);
                    probe.settle();
                    probe.records[0].p_solution
                })
                .collect();
            let mut best = 0;
            for (i, &p) in scores.iter().enumerate() {
                if p > scores[best] {
                    best = i;
                }
            }
            let k = candidates[best];
            chosen.push(k);
            engine.step(j, k);
            engine.settle();
        }
        let tuning = (candidates.len() * iterations) as u64;
        Ok(self.trace(engine.records, OracleSchedule::new(chosen)?, tuning))
    }

    /// Constant magnitude with alternating sign: `+k, −k, +k, …`.
    pub fn alternating_k(&self, k: f64, iterations: usize) -> Result<AlternatingTrace> {
        if iterations < 2 {
            return Err(Error::Domain(format!(
                "alternating schedule needs at least 2 iterations, got {iterations}"
            )));
        }
        let trace = self.run_schedule(&OracleSchedule::alternating(k, iterations)?)?;
        let mean_imag = trace.records.iter().map(|r| r.mean.im.abs()).collect();
        Ok(AlternatingTrace { trace, mean_imag })
    }
}

/// Highest peak among `runs` (sorted by `k`); ties go to the smallest `k`.
fn best_of(runs: Vec<(f64, RunTrace)>) -> KScan {
    let curve: Vec<KPoint> = runs
        .iter()
        .map(|(k, t)| {
            let (peak_iteration, peak_p) = t.peak();
            KPoint {
                k: *k,
                peak_p,
                peak_iteration,
            }
        })
        .collect();
    let mut best = 0;
    for (i, p) in curve.iter().enumerate() {
        if p.peak_p > curve[best].peak_p {
            best = i;
        }
    }
    let trace_best = runs.into_iter().nth(best).expect("nonempty").1;
    KScan {
        k_best: curve[best].k,
        trace_best,
        curve,
    }
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / last)
            }
        })
        .collect()
}

pub fn run_schedule(table: &ObjectiveTable, schedule: &OracleSchedule) -> Result<RunTrace> {
    Simulator::new(table).run_schedule(schedule)
}

pub fn run_fixed_k(table: &ObjectiveTable, k: f64, iterations: usize) -> Result<RunTrace> {
    Simulator::new(table).run_fixed_k(k, iterations)
}

pub fn scan_k(
    table: &ObjectiveTable,
    k_min: f64,
    k_max: f64,
    grid_points: usize,
    max_iterations: usize,
) -> Result<KScan> {
    Simulator::new(table).scan_k(k_min, k_max, grid_points, max_iterations)
}

pub fn refine_scan(table: &ObjectiveTable, k_min: f64, k_max: f64, stages: &[ScanStage]) -> Result<Vec<KScan>> {
    Simulator::new(table).refine_scan(k_min, k_max, stages)
}

pub fn greedy_dynamic_k(table: &ObjectiveTable, iterations: usize, k_grid: &[f64]) -> Result<RunTrace> {
    Simulator::new(table).greedy_dynamic_k(iterations, k_grid)
}

pub fn alternating_k(table: &ObjectiveTable, k: f64, iterations: usize) -> Result<AlternatingTrace> {
    Simulator::new(table).alternating_k(k, iterations)
}

/// Runs a fixed-`k` amplification of the injective family `spec.kind` at every
/// size in `sizes` (ascending); `spec.n_states` is ignored.
pub fn size_scaling_study<K, I>(
    spec: &InjectiveSpec,
    sizes: &[usize],
    k_rule: K,
    iterations_rule: I,
) -> Result<Vec<SizeCurve>>
where
    K: Fn(usize) -> f64 + Sync,
    I: Fn(usize) -> usize + Sync,
{
    if sizes.is_empty() {
        return Err(Error::Domain("size study needs at least one size".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("sizes must be strictly ascending".into()));
    }
    sizes
        .par_iter()
        .map(|&n| {
            let table = make_injective(&InjectiveSpec { n_states: n, ..*spec })?;
            let k = k_rule(n);
            let trace = run_fixed_k(&table, k, iterations_rule(n))?;
            let ratio = trace.records.iter().map(|r| r.p_solution * n as f64).collect();
            Ok(SizeCurve { n_states: n, k, ratio })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{make_injective, sample_distribution, DistributionSpec, InjectiveKind};
    use crate::state::{apply_diffusion, apply_phase_oracle, OracleParameter};

    fn binary_table(n: usize, marked: usize, f_max: f64) -> ObjectiveTable {
        let values = (0..n).map(|x| if x >= n - marked { f_max } else { 0.0 }).collect();
        ObjectiveTable::from_values(values).unwrap()
    }

    fn grover(n: usize, marked: usize, j: usize) -> f64 {
        let theta = (marked as f64 / n as f64).sqrt().asin();
        ((2 * j + 1) as f64 * theta).sin().powi(2)
    }

    #[test]
    fn zero_schedule_keeps_uniform_probability() {
        let table = sample_distribution(&DistributionSpec::normal(0.0, 10.0, 1), 256).unwrap();
        let trace = run_fixed_k(&table, 0.0, 20).unwrap();
        assert_eq!(trace.records.len(), 21);
        for r in &trace.records {
            assert!((r.p_solution - 1.0 / 256.0).abs() < 1e-15);
        }
    }

    #[test]
    fn four_state_grover_is_exact_after_one_step() {
        let f = 2.5;
        let table = binary_table(4, 1, f);
        let trace = run_fixed_k(&table, PI / f, 1).unwrap();
        assert!((trace.records[1].p_solution - 1.0).abs() < 1e-12);
        assert!(trace.records[1].amplifying);
    }

    #[test]
    fn binary_tables_follow_grover_curve() {
        for (n, t) in [(64, 1), (1024, 3), (1000, 10)] {
            let table = binary_table(n, t, 1.0);
            let trace = run_fixed_k(&table, PI, 40).unwrap();
            for r in &trace.records {
                assert!((r.p_solution - grover(n, t, r.iteration)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn record_zero_is_uniform() {
        let table = binary_table(50, 5, 1.0);
        let trace = run_fixed_k(&table, 1.0, 3).unwrap();
        let r0 = trace.records[0];
        assert_eq!(r0.iteration, 0);
        assert_eq!(r0.k_used, 0.0);
        assert!((r0.p_solution - 5.0 / 50.0).abs() < 1e-15);
        assert!((r0.mean.re - 1.0 / 50f64.sqrt()).abs() < 1e-15);
        assert!(r0.mean.im.abs() < 1e-15);
        assert!(!r0.amplifying);
    }

    #[test]
    fn trace_matches_manual_operator_sequence_bitwise() {
        let table = sample_distribution(&DistributionSpec::exponential(1.0, 4), 9000).unwrap();
        let schedule = OracleSchedule::new(vec![0.7, 0.7, -0.2, 0.7, 1.1]).unwrap();
        let (trace, state) = Simulator::new(&table).evolve(&schedule).unwrap();

        let mut manual = QuantumState::uniform_for(&table, Representation::Dense);
        for (&k, r) in schedule.entries().iter().zip(&trace.records[1..]) {
            apply_phase_oracle(&mut manual, &table, OracleParameter::new(k).unwrap()).unwrap();
            apply_diffusion(&mut manual).unwrap();
            assert_eq!(
                manual.probability_in(table.solution_set()).to_bits(),
                r.p_solution.to_bits()
            );
        }
        assert_eq!(manual, state);
    }

    #[test]
    fn rerunning_recorded_schedule_reproduces_trace() {
        let table = make_injective(&InjectiveSpec::new(InjectiveKind::Quadratic, 200)).unwrap();
        let greedy = greedy_dynamic_k(&table, 15, &default_greedy_grid(table.max_value())).unwrap();
        let replay = run_schedule(&table, &greedy.schedule).unwrap();
        assert_eq!(greedy.records, replay.records);
    }

    #[test]
    fn compressed_matches_dense() {
        let values: Vec<f64> = (0..600).map(|x| ((x * 7) % 13) as f64 * 0.5).collect();
        let table = ObjectiveTable::from_values(values).unwrap();
        let schedule = OracleSchedule::new(vec![0.3, 0.3, 0.9, -0.4, 0.3, 0.3]).unwrap();
        let sim = Simulator::new(&table);
        let (dense_trace, dense) = sim
            .with_representation(Representation::Dense)
            .evolve(&schedule)
            .unwrap();
        let (comp_trace, comp) = sim
            .with_representation(Representation::Compressed)
            .evolve(&schedule)
            .unwrap();
        let comp = comp.expand().unwrap();
        for x in 0..table.n_states() {
            assert!((dense.amplitude(x).unwrap() - comp.amplitude(x).unwrap()).norm() < 1e-12);
        }
        for (a, b) in dense_trace.records.iter().zip(&comp_trace.records) {
            assert!((a.p_solution - b.p_solution).abs() < 1e-12);
            assert!((a.p_worst - b.p_worst).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_finds_grover_flip() {
        let f = 4.0;
        let table = binary_table(256, 1, f);
        let scan = scan_k(&table, PI / (2.0 * f), 3.0 * PI / (2.0 * f), 11, 20).unwrap();
        assert!((scan.k_best - PI / f).abs() < 1e-12);
        assert_eq!(scan.curve.len(), 11);
        assert!(scan.curve.windows(2).all(|w| w[0].k < w[1].k));
    }

    #[test]
    fn scan_rejects_bad_ranges() {
        let table = binary_table(8, 1, 1.0);
        assert!(scan_k(&table, 1.0, 1.0, 5, 3).is_err());
        assert!(scan_k(&table, 0.0, 1.0, 1, 3).is_err());
    }

    #[test]
    fn refined_scan_narrows_around_the_best_k() {
        let table = sample_distribution(&DistributionSpec::exponential(1.0, 3), 4096).unwrap();
        let f = table.max_value();
        let stages = [ScanStage::grid(21, 8), ScanStage::grid(9, 40)];
        let scans = refine_scan(&table, PI / (2.0 * f), 3.0 * PI / f, &stages).unwrap();
        assert_eq!(scans.len(), 2);
        let step = (3.0 * PI / f - PI / (2.0 * f)) / 20.0;
        let fine = &scans[1].curve;
        assert_eq!(fine.len(), 9);
        assert!((fine[0].k - (scans[0].k_best - 2.0 * step)).abs() < 1e-12);
        assert!((fine[8].k - (scans[0].k_best + 2.0 * step)).abs() < 1e-12);
        assert_eq!(scans[1].trace_best.records.len(), 41);
        let direct = scan_k(&table, fine[0].k, fine[8].k, 9, 40).unwrap();
        assert_eq!(direct.k_best, scans[1].k_best);
        assert!(refine_scan(&table, 0.0, 1.0, &[]).is_err());
    }

    #[test]
    fn golden_search_climbs_to_the_grover_flip() {
        let f = 4.0;
        let table = binary_table(256, 1, f);
        let sim = Simulator::new(&table);
        let scan = sim.golden_k(0.6 * PI / f, 1.3 * PI / f, 30, 12).unwrap();
        assert_eq!(scan.curve.len(), 30);
        assert!(scan.curve.windows(2).all(|w| w[0].k <= w[1].k));
        assert!((scan.k_best - PI / f).abs() < 1e-4);
        let direct = sim.run_fixed_k(scan.k_best, 12).unwrap();
        assert_eq!(direct, scan.trace_best);
        assert!(sim.golden_k(1.0, 0.5, 5, 3).is_err());
        assert!(sim.golden_k(0.5, 1.0, 1, 3).is_err());
        let staged = sim
            .refine_scan(
                0.6 * PI / f,
                1.3 * PI / f,
                &[ScanStage::grid(8, 12), ScanStage::golden(12, 12)],
            )
            .unwrap();
        assert!((staged[1].k_best - PI / f).abs() < 1e-3);
    }

    #[test]
    fn greedy_on_binary_table_picks_the_flip() {
        let f = 2.0;
        let table = binary_table(1024, 1, f);
        let grid = default_greedy_grid(f);
        let greedy = greedy_dynamic_k(&table, 20, &grid).unwrap();
        let fixed = run_fixed_k(&table, *grid.last().unwrap(), 20).unwrap();
        assert!(greedy.schedule.entries().iter().all(|&k| k == PI / f));
        assert_eq!(greedy.records, fixed.records);
        assert_eq!(greedy.tuning_queries, 65 * 20);
    }

    #[test]
    fn greedy_with_zero_grid_is_inert() {
        let table = make_injective(&InjectiveSpec::new(InjectiveKind::Linear, 64)).unwrap();
        let trace = greedy_dynamic_k(&table, 5, &[0.0]).unwrap();
        for r in &trace.records {
            assert!((r.p_solution - 1.0 / 64.0).abs() < 1e-15);
        }
    }

    #[test]
    fn default_grid_shape() {
        let grid = default_greedy_grid(10.0);
        assert_eq!(grid.len(), 65);
        assert_eq!(grid[0], 0.0);
        assert!((grid[1] - PI / 100.0).abs() < 1e-15);
        assert!((grid[64] - PI / 10.0).abs() < 1e-15);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn alternating_first_pair_mean_is_real() {
        let table = sample_distribution(&DistributionSpec::normal(0.0, 10.0, 8), 4096).unwrap();
        for k in [0.01, 0.05, 0.3] {
            let alt = alternating_k(&table, k, 2).unwrap();
            assert!(alt.mean_imag[2] < 1e-12);
            assert_eq!(alt.trace.schedule.entries(), &[k, -k]);
        }
        assert!(alternating_k(&table, 0.1, 1).is_err());
    }

    #[test]
    fn size_study_single_size_starts_at_one() {
        let spec = InjectiveSpec::new(InjectiveKind::Quadratic, 0);
        let curves = size_scaling_study(&spec, &[256], |n| PI / ((n - 1) as f64).powi(2), |_| 10).unwrap();
        assert_eq!(curves.len(), 1);
        assert!((curves[0].ratio[0] - 1.0).abs() < 1e-12);
        assert!(size_scaling_study(&spec, &[512, 256], |_| 0.1, |_| 3).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(OracleSchedule::new(vec![]).is_err());
        assert!(OracleSchedule::new(vec![1.0, f64::NAN]).is_err());
        assert_eq!(
            OracleSchedule::alternating(0.5, 3).unwrap().entries(),
            &[0.5, -0.5, 0.5]
        );
    }

    #[test]
    fn defaults() {
        assert_eq!(default_iterations(1 << 20), 3072);
        assert_eq!(default_iterations(10), 10);
        assert_eq!(default_representation(1 << 22), Representation::Dense);
        assert_eq!(default_representation((1 << 22) + 1), Representation::Compressed);
    }
}
