//! Exact state evolution under the subdivided phase oracle and the
//! inversion-about-mean diffusion.
//!
//! A [`QuantumState`] is either dense (one amplitude per basis index) or
//! value-compressed (one amplitude per unique objective value plus its
//! multiplicity). Both the oracle and the diffusion treat basis states with
//! equal objective values identically, so compression is exact.
//!
//! All sums go through [`crate::reduction`], which keeps every result
//! independent of the rayon thread count.

use crate::error::{Error, Result};
use crate::objective::ObjectiveTable;
use crate::reduction::{block_partial_by, pairwise_sum, BLOCK_SIZE, LEAF, LEAVES_PER_BLOCK};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Normalization tolerance accepted when building a state from raw amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Relative margin below which a change in magnitude counts as rounding.
const AMPLIFY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Dense,
    Compressed,
}

/// All basis states sharing one objective value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueGroup {
    pub value: f64,
    pub multiplicity: usize,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Amplitudes {
    Dense(Vec<Complex64>),
    /// Groups sorted by strictly increasing value.
    Compressed(Vec<ValueGroup>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_states: usize,
    amps: Amplitudes,
}

/// Arithmetic mean of all `N` amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanVector(pub Complex64);

impl MeanVector {
    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// Oracle strength `k` in radians per objective unit. Zero is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParameter(f64);

impl OracleParameter {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() {
            Ok(Self(k))
        } else {
            Err(Error::Domain(format!("oracle parameter k must be finite, got {k}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl QuantumState {
    /// Uniform superposition over `n` basis states, dense.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("state needs at least one basis state".into()));
        }
        let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        Ok(Self {
            n_states: n,
            amps: Amplitudes::Dense(vec![a; n]),
        })
    }

    /// Uniform superposition laid out over `table` in the requested representation.
    pub fn uniform_for(table: &ObjectiveTable, repr: Representation) -> Self {
        let n = table.n_states();
        let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        let amps = match repr {
            Representation::Dense => Amplitudes::Dense(vec![a; n]),
            Representation::Compressed => Amplitudes::Compressed(
                table
                    .value_groups()
                    .into_iter()
                    .map(|(value, multiplicity)| ValueGroup {
                        value,
                        multiplicity,
                        amplitude: a,
                    })
                    .collect(),
            ),
        };
        Self { n_states: n, amps }
    }

    pub fn from_dense(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Dimension("state needs at least one basis state".into()));
        }
        let state = Self {
            n_states: amps.len(),
            amps: Amplitudes::Dense(amps),
        };
        state.check_norm()?;
        Ok(state)
    }

    pub fn from_groups(groups: Vec<ValueGroup>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Dimension("compressed state needs at least one group".into()));
        }
        let mut n: usize = 0;
        for (i, g) in groups.iter().enumerate() {
            if g.multiplicity == 0 {
                return Err(Error::Domain(format!("group {i} has zero multiplicity")));
            }
            if !g.value.is_finite() {
                return Err(Error::Domain(format!("group {i} has a non-finite value")));
            }
            if i > 0 && groups[i - 1].value >= g.value {
                return Err(Error::Domain("group values must be strictly increasing".into()));
            }
            n = n
                .checked_add(g.multiplicity)
                .ok_or_else(|| Error::Dimension("multiplicities overflow".into()))?;
        }
        let state = Self {
            n_states: n,
            amps: Amplitudes::Compressed(groups),
        };
        state.check_norm()?;
        Ok(state)
    }

    fn check_norm(&self) -> Result<()> {
        let err = self.norm_error();
        if err < NORM_TOLERANCE {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "state is not normalized (|norm^2 - 1| = {err:e})"
            )))
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn representation(&self) -> Representation {
        match self.amps {
            Amplitudes::Dense(_) => Representation::Dense,
            Amplitudes::Compressed(_) => Representation::Compressed,
        }
    }

    pub fn amplitudes(&self) -> &Amplitudes {
        &self.amps
    }

    /// Amplitude of basis index `x`.
    pub fn amplitude(&self, x: usize) -> Result<Complex64> {
        if x >= self.n_states {
            return Err(Error::Dimension(format!(
                "index {x} out of range for {} states",
                self.n_states
            )));
        }
        Ok(match &self.amps {
            Amplitudes::Dense(a) => a[x],
            Amplitudes::Compressed(groups) => {
                let mut end = 0;
                let mut found = groups[0].amplitude;
                for g in groups {
                    end += g.multiplicity;
                    if x < end {
                        found = g.amplitude;
                        break;
                    }
                }
                found
            }
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        match &self.amps {
            Amplitudes::Dense(a) => crate::reduction::block_sum_by(a, |z| z.norm_sqr()),
            Amplitudes::Compressed(g) => {
                crate::reduction::block_sum_by(g, |g| g.amplitude.norm_sqr() * g.multiplicity as f64)
            }
        }
    }

    pub fn norm_error(&self) -> f64 {
        (self.norm_sqr() - 1.0).abs()
    }

    /// Amplitude of the top basis index `N − 1`.
    pub fn last_amplitude(&self) -> Complex64 {
        match &self.amps {
            Amplitudes::Dense(a) => a[a.len() - 1],
            Amplitudes::Compressed(g) => g[g.len() - 1].amplitude,
        }
    }

    /// Total measurement probability of the basis indices in `range`.
    pub fn probability_in(&self, range: Range<usize>) -> f64 {
        let range = range.start.min(self.n_states)..range.end.min(self.n_states);
        match &self.amps {
            Amplitudes::Dense(a) => {
                let partials: Vec<f64> = a
                    .par_chunks(BLOCK_SIZE)
                    .enumerate()
                    .filter_map(|(b, block)| range_partial(block, b * BLOCK_SIZE, &range))
                    .collect();
                pairwise_sum(&partials)
            }
            Amplitudes::Compressed(groups) => {
                let overlap = |start: usize, g: &ValueGroup| {
                    let lo = start.max(range.start);
                    let hi = (start + g.multiplicity).min(range.end);
                    if lo < hi {
                        (hi - lo) as f64 * g.amplitude.norm_sqr()
                    } else {
                        0.0
                    }
                };
                let mut p = 0.0;
                if range.end == self.n_states {
                    // suffix: walk down from the top
                    let mut end = self.n_states;
                    for g in groups.iter().rev() {
                        if end <= range.start {
                            break;
                        }
                        end -= g.multiplicity;
                        p += overlap(end, g);
                    }
                } else {
                    let mut start = 0;
                    for g in groups {
                        if start >= range.end {
                            break;
                        }
                        p += overlap(start, g);
                        start += g.multiplicity;
                    }
                }
                p
            }
        }
    }

    /// Dense copy; basis indices follow non-decreasing objective order.
    pub fn expand(&self) -> Result<Self> {
        match &self.amps {
            Amplitudes::Dense(_) => Ok(self.clone()),
            Amplitudes::Compressed(groups) => {
                let mut amps = Vec::new();
                amps.try_reserve_exact(self.n_states)
                    .map_err(|_| Error::Dimension(format!("cannot allocate {} amplitudes", self.n_states)))?;
                for g in groups {
                    amps.extend(std::iter::repeat_n(g.amplitude, g.multiplicity));
                }
                Ok(Self {
                    n_states: self.n_states,
                    amps: Amplitudes::Dense(amps),
                })
            }
        }
    }

    /// Groups a dense state by the sorted objective `values`. Amplitudes within a
    /// group must be identical.
    pub fn compress(&self, values: &[f64]) -> Result<Self> {
        let dense = match &self.amps {
            Amplitudes::Compressed(_) => return Ok(self.clone()),
            Amplitudes::Dense(a) => a,
        };
        if values.len() != self.n_states {
            return Err(Error::Dimension(format!(
                "{} values for a state of {} basis states",
                values.len(),
                self.n_states
            )));
        }
        let mut groups: Vec<ValueGroup> = Vec::new();
        for (x, (&value, &amplitude)) in values.iter().zip(dense).enumerate() {
            match groups.last_mut() {
                Some(g) if g.value == value => {
                    if g.amplitude != amplitude {
                        return Err(Error::Domain(format!(
                            "index {x} differs in amplitude from other states with value {value}"
                        )));
                    }
                    g.multiplicity += 1;
                }
                Some(g) if g.value > value => {
                    return Err(Error::Domain("objective values must be sorted ascending".into()));
                }
                _ => groups.push(ValueGroup {
                    value,
                    multiplicity: 1,
                    amplitude,
                }),
            }
        }
        Ok(Self {
            n_states: self.n_states,
            amps: Amplitudes::Compressed(groups),
        })
    }

    /// Group values for a compressed state, the table values for a dense one.
    pub(crate) fn stored_values<'a>(&self, table_values: &'a [f64]) -> std::borrow::Cow<'a, [f64]> {
        match &self.amps {
            Amplitudes::Dense(_) => std::borrow::Cow::Borrowed(table_values),
            Amplitudes::Compressed(g) => std::borrow::Cow::Owned(g.iter().map(|g| g.value).collect()),
        }
    }

    /// One pass over the stored amplitudes: optional reflection about `reflect`,
    /// then optional range probabilities, then optional multiplication by the
    /// phase factors. Ranges and phases index stored amplitudes.
    pub(crate) fn sweep(
        &mut self,
        reflect: Option<Complex64>,
        observe: Option<&[Range<usize>; 2]>,
        phase: Option<Phases<'_>>,
    ) -> Sweep {
        let n = self.n_states as f64;
        let parts: Vec<BlockSweep> = match &mut self.amps {
            Amplitudes::Dense(a) => sweep_cells(a, reflect, observe, phase),
            Amplitudes::Compressed(g) => sweep_cells(g, reflect, observe, phase),
        };
        let reflected = reflect.map(|_| {
            let sums: Vec<Complex64> = parts.iter().map(|p| p.reflected.0).collect();
            let norms: Vec<f64> = parts.iter().map(|p| p.reflected.1).collect();
            (pairwise_sum(&sums) / n, pairwise_sum(&norms))
        });
        let observed = observe.map(|_| {
            let solution: Vec<f64> = parts.iter().filter_map(|p| p.ranges[0]).collect();
            let worst: Vec<f64> = parts.iter().filter_map(|p| p.ranges[1]).collect();
            [pairwise_sum(&solution), pairwise_sum(&worst)]
        });
        let rotated = phase.map(|_| {
            let sums: Vec<Complex64> = parts.iter().map(|p| p.rotated).collect();
            pairwise_sum(&sums) / n
        });
        Sweep {
            reflected,
            observed,
            rotated,
        }
    }

    /// Multiplies every stored amplitude by its phase factor; returns the new mean.
    pub(crate) fn rotate(&mut self, phase: Phases<'_>) -> Complex64 {
        self.sweep(None, None, Some(phase)).rotated.expect("rotation requested")
    }

    /// Replaces every amplitude by `2·mean − α`; returns the new mean and norm².
    pub(crate) fn reflect(&mut self, mean: Complex64) -> (Complex64, f64) {
        self.sweep(Some(mean), None, None)
            .reflected
            .expect("reflection requested")
    }

    /// Mean of the amplitudes with the blocked reduction.
    fn mean(&self) -> Complex64 {
        let n = self.n_states as f64;
        let sum = match &self.amps {
            Amplitudes::Dense(a) => crate::reduction::block_sum(a),
            Amplitudes::Compressed(g) => crate::reduction::block_sum_by(g, weighted),
        };
        sum / n
    }
}

/// Oracle phase factors, one per stored amplitude.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Phases<'a> {
    Cached(&'a [Complex64]),
    /// `e^{i·k·f}` computed on the fly.
    Exact {
        values: &'a [f64],
        k: f64,
    },
}

impl<'a> Phases<'a> {
    /// Phase factors for stored indices `base..base + len`.
    fn block(self, base: usize, len: usize) -> PhaseBlock<'a> {
        match self {
            Phases::Cached(p) => PhaseBlock::Cached(p[base..base + len].iter()),
            Phases::Exact { values, k } => PhaseBlock::Exact(values[base..base + len].iter(), k),
        }
    }
}

enum PhaseBlock<'a> {
    Cached(std::slice::Iter<'a, Complex64>),
    Exact(std::slice::Iter<'a, f64>, f64),
}

/// Runs `body` with the block's phase factors as a concrete iterator.
macro_rules! with_phases {
    ($block:expr, |$it:ident| $body:expr) => {
        match $block {
            PhaseBlock::Cached(p) => {
                let $it = p.copied();
                $body
            }
            PhaseBlock::Exact(v, k) => {
                let $it = v.map(move |&f| Complex64::cis(k * f));
                $body
            }
        }
    };
}

/// Results of [`QuantumState::sweep`]; each field is present iff requested.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sweep {
    /// Mean and norm² right after the reflection.
    pub reflected: Option<(Complex64, f64)>,
    pub observed: Option<[f64; 2]>,
    /// Mean after the phase multiplication.
    pub rotated: Option<Complex64>,
}

struct BlockSweep {
    reflected: (Complex64, f64),
    ranges: [Option<f64>; 2],
    rotated: Complex64,
}

trait Cell: Send + Sync {
    fn amp(&mut self) -> &mut Complex64;
    /// Contribution to the amplitude sum.
    fn mass(&self) -> Complex64;
    fn prob(&self) -> f64;
}

impl Cell for Complex64 {
    fn amp(&mut self) -> &mut Complex64 {
        self
    }
    fn mass(&self) -> Complex64 {
        *self
    }
    fn prob(&self) -> f64 {
        self.norm_sqr()
    }
}

impl Cell for ValueGroup {
    fn amp(&mut self) -> &mut Complex64 {
        &mut self.amplitude
    }
    fn mass(&self) -> Complex64 {
        weighted(self)
    }
    fn prob(&self) -> f64 {
        self.amplitude.norm_sqr() * self.multiplicity as f64
    }
}

fn sweep_cells<T: Cell>(
    cells: &mut [T],
    reflect: Option<Complex64>,
    observe: Option<&[Range<usize>; 2]>,
    phase: Option<Phases<'_>>,
) -> Vec<BlockSweep> {
    let zero = Complex64::new(0.0, 0.0);
    cells
        .par_chunks_mut(BLOCK_SIZE)
        .enumerate()
        .map(|(b, block)| {
            let base = b * BLOCK_SIZE;
            let mut out = BlockSweep {
                reflected: (zero, 0.0),
                ranges: [None, None],
                rotated: zero,
            };
            let observed_here = observe.is_some_and(|r| r.iter().any(|r| r.start < base + block.len() && base < r.end));
            let phases = phase.map(|p| p.block(base, block.len()));
            match (reflect, phases) {
                (Some(mean), Some(phases)) if !observed_here => {
                    let (reflected, rotated) = with_phases!(phases, |it| reflect_rotate_block(block, mean * 2.0, it));
                    out.reflected = reflected;
                    out.rotated = rotated;
                }
                (_, phases) => {
                    if let Some(mean) = reflect {
                        let two_mean = mean * 2.0;
                        for c in block.iter_mut() {
                            let a = c.amp();
                            *a = two_mean - *a;
                        }
                        out.reflected = (block_partial_by(block, &T::mass), block_partial_by(block, &T::prob));
                    }
                    if let Some(ranges) = observe {
                        out.ranges = [
                            range_partial(block, base, &ranges[0]),
                            range_partial(block, base, &ranges[1]),
                        ];
                    }
                    if let Some(phases) = phases {
                        with_phases!(phases, |it| {
                            for (c, u) in block.iter_mut().zip(it) {
                                *c.amp() *= u;
                            }
                        });
                        out.rotated = block_partial_by(block, &T::mass);
                    }
                }
            }
            out
        })
        .collect()
}

/// Reflection and rotation of one block in a single pass. Sums are accumulated
/// in the same order as [`block_partial_by`], so the result matches the staged
/// path bit for bit.
fn reflect_rotate_block<T, I>(block: &mut [T], two_mean: Complex64, mut phases: I) -> ((Complex64, f64), Complex64)
where
    T: Cell,
    I: Iterator<Item = Complex64>,
{
    let zero = Complex64::new(0.0, 0.0);
    let mut masses = [zero; LEAVES_PER_BLOCK];
    let mut probs = [0.0; LEAVES_PER_BLOCK];
    let mut rotated = [zero; LEAVES_PER_BLOCK];
    let mut used = 0;
    for (l, leaf) in block.chunks_mut(LEAF).enumerate() {
        let (mut m, mut p, mut r) = (zero, 0.0, zero);
        for (c, u) in leaf.iter_mut().zip(&mut phases) {
            let a = c.amp();
            *a = two_mean - *a;
            m += c.mass();
            p += c.prob();
            *c.amp() *= u;
            r += c.mass();
        }
        masses[l] = m;
        probs[l] = p;
        rotated[l] = r;
        used += 1;
    }
    (
        (pairwise_sum(&masses[..used]), pairwise_sum(&probs[..used])),
        pairwise_sum(&rotated[..used]),
    )
}

/// Probability mass of `block` (starting at `base`) inside `range`, if they overlap.
fn range_partial<T: Cell>(block: &[T], base: usize, range: &Range<usize>) -> Option<f64> {
    let lo = range.start.max(base);
    let hi = range.end.min(base + block.len());
    (lo < hi).then(|| block_partial_by(&block[lo - base..hi - base], &T::prob))
}

fn weighted(g: &ValueGroup) -> Complex64 {
    g.amplitude * g.multiplicity as f64
}

/// Whether reflecting `alpha` about `mean` strictly increases its magnitude.
pub(crate) fn amplifies(mean: Complex64, alpha: Complex64) -> bool {
    let after = (mean * 2.0 - alpha).norm_sqr();
    let before = alpha.norm_sqr();
    after > before * (1.0 + AMPLIFY_MARGIN)
}

/// Multiplies each amplitude `α_x` by `e^{i·k·f(x)}`.
pub fn apply_phase_oracle(state: &mut QuantumState, table: &ObjectiveTable, k: OracleParameter) -> Result<()> {
    if state.n_states() != table.n_states() {
        return Err(Error::Dimension(format!(
            "state has {} basis states but table has {}",
            state.n_states(),
            table.n_states()
        )));
    }
    let k = k.value();
    let values = state.stored_values(table.values());
    state.rotate(Phases::Exact { values: &values, k });
    Ok(())
}

/// Inversion about the mean: `α_x → 2·mean − α_x`.
pub fn apply_diffusion(state: &mut QuantumState) -> Result<()> {
    let mean = mean_amplitude(state)?;
    state.reflect(mean.value());
    Ok(())
}

pub fn mean_amplitude(state: &QuantumState) -> Result<MeanVector> {
    if state.n_states() == 0 {
        return Err(Error::Dimension("mean of an empty state".into()));
    }
    Ok(MeanVector(state.mean()))
}

/// True iff the next diffusion strictly grows the magnitude of `solution_index`.
pub fn is_amplifying(state: &QuantumState, solution_index: usize) -> Result<bool> {
    let alpha = state.amplitude(solution_index)?;
    let mean = mean_amplitude(state)?;
    Ok(amplifies(mean.value(), alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{make_injective, InjectiveKind, InjectiveSpec};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense(state: &QuantumState) -> Vec<Complex64> {
        match state.expand().unwrap().amplitudes() {
            Amplitudes::Dense(a) => a.clone(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_k_is_identity() {
        let table = ObjectiveTable::from_values(vec![0.0, 1.5, 2.0, 9.0]).unwrap();
        let original = QuantumState::from_dense(vec![c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)]).unwrap();
        let mut s = original.clone();
        apply_phase_oracle(&mut s, &table, OracleParameter::new(0.0).unwrap()).unwrap();
        assert_eq!(s, original);
    }

    #[test]
    fn pi_flip_on_two_states() {
        let table = ObjectiveTable::from_values(vec![0.0, 1.0]).unwrap();
        let mut s = QuantumState::uniform(2).unwrap();
        apply_phase_oracle(&mut s, &table, OracleParameter::new(PI).unwrap()).unwrap();
        let a = dense(&s);
        assert!((a[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((a[1] - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quadratic_sixteen_puts_top_state_at_pi() {
        let table = make_injective(&InjectiveSpec::new(InjectiveKind::Quadratic, 16)).unwrap();
        let mut s = QuantumState::uniform(16).unwrap();
        apply_phase_oracle(&mut s, &table, OracleParameter::new(PI / 225.0).unwrap()).unwrap();
        let top = s.amplitude(15).unwrap();
        assert!((top.arg().abs() - PI).abs() < 1e-12);
        assert!((top.norm() - 0.25).abs() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_rejects_bad_inputs() {
        let table = ObjectiveTable::from_values(vec![0.0, 1.0, 2.0]).unwrap();
        let mut s = QuantumState::uniform(2).unwrap();
        assert!(matches!(
            apply_phase_oracle(&mut s, &table, OracleParameter::new(1.0).unwrap()),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(OracleParameter::new(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(OracleParameter::new(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn diffusion_fixes_uniform_and_is_involutive() {
        let mut s = QuantumState::uniform(8).unwrap();
        let before = dense(&s);
        apply_diffusion(&mut s).unwrap();
        for (a, b) in dense(&s).iter().zip(&before) {
            assert!((a - b).norm() < 1e-15);
        }

        let table = ObjectiveTable::from_values(vec![0.0, 0.3, 1.1, 2.0, 2.5]).unwrap();
        let mut s = QuantumState::uniform(5).unwrap();
        apply_phase_oracle(&mut s, &table, OracleParameter::new(1.3).unwrap()).unwrap();
        let before = dense(&s);
        apply_diffusion(&mut s).unwrap();
        apply_diffusion(&mut s).unwrap();
        for (a, b) in dense(&s).iter().zip(&before) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn diffusion_of_basis_state() {
        let mut s = QuantumState::from_dense(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        apply_diffusion(&mut s).unwrap();
        assert_eq!(dense(&s), vec![c(-0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
    }

    #[test]
    fn mean_examples() {
        let s = QuantumState::uniform(9).unwrap();
        assert!((mean_amplitude(&s).unwrap().value() - c(1.0 / 3.0, 0.0)).norm() < 1e-15);

        let s = QuantumState::from_dense(vec![c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]).unwrap();
        assert_eq!(mean_amplitude(&s).unwrap().value(), c(0.0, 0.0));

        // N=4, f=[0,1,2,3], k=π/2 from uniform: amplitudes (1, i, -1, -i)/2, brute-force mean 0
        let table = ObjectiveTable::from_values(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let mut s = QuantumState::uniform(4).unwrap();
        apply_phase_oracle(&mut s, &table, OracleParameter::new(PI / 2.0).unwrap()).unwrap();
        let brute: Complex64 = dense(&s).iter().sum::<Complex64>() / 4.0;
        assert!(brute.norm() < 1e-15);
        assert!((mean_amplitude(&s).unwrap().value() - brute).norm() < 1e-12);
    }

    #[test]
    fn amplifying_condition() {
        let s = QuantumState::uniform(16).unwrap();
        assert!(!is_amplifying(&s, 15).unwrap());

        // Grover, N=4, one marked state after the π oracle
        let table = ObjectiveTable::from_values(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let mut s = QuantumState::uniform(4).unwrap();
        apply_phase_oracle(&mut s, &table, OracleParameter::new(PI).unwrap()).unwrap();
        assert!(is_amplifying(&s, 3).unwrap());
        // direct check: mean 1/4, best -1/2, |2/4 + 1/2| = 1 > 1/2
        let m = mean_amplitude(&s).unwrap().value();
        assert!((m - c(0.25, 0.0)).norm() < 1e-15);

        // best amplitude orthogonal in phase to the mean
        let s = QuantumState::from_dense(vec![c(0.8, 0.0), c(0.0, 0.6)]).unwrap();
        assert!(is_amplifying(&s, 1).unwrap());

        assert!(matches!(is_amplifying(&s, 2), Err(Error::Dimension(_))));
    }

    #[test]
    fn expansion_and_compression() {
        let a = c(0.5, 0.0);
        let b = c(0.0, 0.5);
        let s = QuantumState::from_groups(vec![
            ValueGroup {
                value: 0.0,
                multiplicity: 3,
                amplitude: a,
            },
            ValueGroup {
                value: 1.0,
                multiplicity: 1,
                amplitude: b,
            },
        ])
        .unwrap();
        assert_eq!(s.n_states(), 4);
        assert_eq!(dense(&s), vec![a, a, a, b]);
        assert_eq!(s.amplitude(3).unwrap(), b);
        assert_eq!(s.expand().unwrap().compress(&[0.0, 0.0, 0.0, 1.0]).unwrap(), s);

        let u = QuantumState::from_groups(vec![ValueGroup {
            value: 2.0,
            multiplicity: 4,
            amplitude: c(0.5, 0.0),
        }])
        .unwrap();
        assert_eq!(u.expand().unwrap(), QuantumState::uniform(4).unwrap());
    }

    #[test]
    fn invalid_compressed_states() {
        let g = |value, multiplicity, re| ValueGroup {
            value,
            multiplicity,
            amplitude: c(re, 0.0),
        };
        assert!(QuantumState::from_groups(vec![g(1.0, 2, 0.5), g(1.0, 2, 0.5)]).is_err());
        assert!(QuantumState::from_groups(vec![g(1.0, 2, 0.5), g(0.0, 2, 0.5)]).is_err());
        assert!(QuantumState::from_groups(vec![g(0.0, 0, 0.5), g(1.0, 4, 0.5)]).is_err());
        assert!(QuantumState::from_groups(vec![g(0.0, 4, 0.6)]).is_err());
        assert!(QuantumState::from_dense(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(QuantumState::from_dense(vec![]).is_err());
    }

    #[test]
    fn compressed_probability_over_ranges() {
        let s = QuantumState::from_groups(vec![
            ValueGroup {
                value: 0.0,
                multiplicity: 2,
                amplitude: c(0.5, 0.0),
            },
            ValueGroup {
                value: 1.0,
                multiplicity: 2,
                amplitude: c(0.0, 0.5),
            },
        ])
        .unwrap();
        assert!((s.probability_in(1..3) - 0.5).abs() < 1e-15);
        assert!((s.probability_in(2..4) - 0.5).abs() < 1e-15);
        assert!((s.probability_in(0..4) - 1.0).abs() < 1e-15);
    }
}
