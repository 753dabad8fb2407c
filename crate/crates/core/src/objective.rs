//! Objective-value tables.
//!
//! The oracle only sees the multiset of objective values, so every table is
//! kept in canonical form: values sorted ascending (index `x` carries the
//! `x`-th smallest value) and shifted so the minimum is exactly zero. The
//! optimum therefore always sits at the top of the index range.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

/// Name of the generator used for every sampled table.
pub const RNG_NAME: &str = "chacha20";

/// Where a table came from; carried into trace descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TableSource {
    Distribution(DistributionSpec),
    Injective(InjectiveSpec),
    File { path: String },
    Values,
}

/// Canonical objective table: non-decreasing, non-negative, minimum zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveTable {
    values: Vec<f64>,
    solution_start: usize,
    worst_end: usize,
    source: TableSource,
}

impl ObjectiveTable {
    /// Canonicalizes arbitrary finite values: sort ascending, subtract the minimum.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("objective table needs at least one value".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("objective value at index {i} is not finite")));
        }
        values.sort_by(f64::total_cmp);
        let min = values[0];
        for v in values.iter_mut() {
            *v -= min;
        }
        let max = values[values.len() - 1];
        let solution_start = values.partition_point(|&v| v < max);
        let worst_end = values.partition_point(|&v| v <= 0.0);
        Ok(Self {
            values,
            solution_start,
            worst_end,
            source: TableSource::Values,
        })
    }

    pub fn with_source(mut self, source: TableSource) -> Self {
        self.source = source;
        self
    }

    pub fn n_states(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Indices attaining the maximum value (always a suffix of the index range).
    pub fn solution_set(&self) -> Range<usize> {
        self.solution_start..self.values.len()
    }

    /// Indices attaining the minimum value (always a prefix).
    pub fn worst_set(&self) -> Range<usize> {
        0..self.worst_end
    }

    pub fn source(&self) -> &TableSource {
        &self.source
    }

    /// Unique values with their multiplicities, ascending.
    pub fn value_groups(&self) -> Vec<(f64, usize)> {
        let mut groups: Vec<(f64, usize)> = Vec::new();
        for &v in &self.values {
            match groups.last_mut() {
                Some((last, count)) if *last == v => *count += 1,
                _ => groups.push((v, 1)),
            }
        }
        groups
    }
}

/// Shape of a sampled objective-value distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionKind {
    Normal { mu: f64, sigma: f64 },
    SkewNormal { mu: f64, sigma: f64, alpha: f64 },
    Exponential { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub kind: DistributionKind,
    pub seed: u64,
}

impl DistributionSpec {
    pub fn normal(mu: f64, sigma: f64, seed: u64) -> Self {
        Self {
            kind: DistributionKind::Normal { mu, sigma },
            seed,
        }
    }

    pub fn skew_normal(mu: f64, sigma: f64, alpha: f64, seed: u64) -> Self {
        Self {
            kind: DistributionKind::SkewNormal { mu, sigma, alpha },
            seed,
        }
    }

    pub fn exponential(lambda: f64, seed: u64) -> Self {
        Self {
            kind: DistributionKind::Exponential { lambda },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be finite, got {v}")))
            }
        };
        match self.kind {
            DistributionKind::Normal { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)
            }
            DistributionKind::SkewNormal { mu, sigma, alpha } => {
                finite("mu", mu)?;
                positive("sigma", sigma)?;
                finite("alpha", alpha)
            }
            DistributionKind::Exponential { lambda } => positive("lambda", lambda),
        }
    }

    /// Raw, unsorted, unshifted samples in generation order.
    pub fn draw_samples(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        let samples = match self.kind {
            DistributionKind::Normal { mu, sigma } => (0..n)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    mu + sigma * z
                })
                .collect(),
            DistributionKind::SkewNormal { mu, sigma, alpha } => {
                let delta = alpha / (1.0 + alpha * alpha).sqrt();
                let rest = (1.0 - delta * delta).sqrt();
                (0..n)
                    .map(|_| {
                        let u0: f64 = rng.sample(StandardNormal);
                        let u1: f64 = rng.sample(StandardNormal);
                        mu + sigma * (delta * u0.abs() + rest * u1)
                    })
                    .collect()
            }
            DistributionKind::Exponential { lambda } => {
                let exp = Exp::new(lambda).map_err(|e| Error::Domain(e.to_string()))?;
                (0..n).map(|_| exp.sample(&mut rng)).collect()
            }
        };
        Ok(samples)
    }
}

/// Draws `n` samples and returns them as a canonical table.
pub fn sample_distribution(spec: &DistributionSpec, n: usize) -> Result<ObjectiveTable> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    let samples = spec.draw_samples(n)?;
    Ok(ObjectiveTable::from_values(samples)?.with_source(TableSource::Distribution(*spec)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectiveKind {
    Linear,
    Quadratic,
    Cubic,
    Exp10,
}

/// One of the strictly increasing analytic objective families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectiveSpec {
    pub kind: InjectiveKind,
    pub n_states: usize,
    /// When set, index `x` is evaluated at `x / m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_divisor: Option<u64>,
}

impl InjectiveSpec {
    pub fn new(kind: InjectiveKind, n_states: usize) -> Self {
        Self {
            kind,
            n_states,
            scale_divisor: None,
        }
    }

    pub fn with_divisor(mut self, m: u64) -> Self {
        self.scale_divisor = Some(m);
        self
    }
}

const CUBIC_MAX_STATES: usize = 1 << 26;

pub fn make_injective(spec: &InjectiveSpec) -> Result<ObjectiveTable> {
    let n = spec.n_states;
    if n < 2 {
        return Err(Error::Domain(format!("injective table needs n >= 2, got {n}")));
    }
    if spec.kind == InjectiveKind::Cubic && n > CUBIC_MAX_STATES {
        return Err(Error::Domain(format!(
            "cubic objective overflows exact double range for n = {n} > 2^26"
        )));
    }
    let m = match spec.scale_divisor {
        Some(0) => return Err(Error::Domain("scale divisor must be positive".into())),
        Some(m) => m as f64,
        None => 1.0,
    };
    let nf = n as f64;
    let values = (0..n)
        .map(|x| {
            let y = x as f64 / m;
            match spec.kind {
                InjectiveKind::Linear => y,
                InjectiveKind::Quadratic => y * y,
                InjectiveKind::Cubic => y * y * y,
                InjectiveKind::Exp10 => (10.0 * y / nf).exp2(),
            }
        })
        .collect();
    Ok(ObjectiveTable::from_values(values)?.with_source(TableSource::Injective(*spec)))
}

/// Folds a feasibility predicate into the objective: infeasible entries drop by `c`.
pub fn absorb_constraint(values: &[f64], feasible: &[bool], c: f64) -> Result<Vec<f64>> {
    if values.len() != feasible.len() {
        return Err(Error::Dimension(format!(
            "{} values but {} feasibility flags",
            values.len(),
            feasible.len()
        )));
    }
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let (lo, hi) = min_max(values)?;
    let required = hi - lo;
    if !(c.is_finite() && c > 0.0 && c > required) {
        return Err(Error::Domain(format!(
            "constraint penalty C = {c} must exceed max f - min f = {required}"
        )));
    }
    Ok(values
        .iter()
        .zip(feasible)
        .map(|(&v, &ok)| if ok { v } else { v - c })
        .collect())
}

/// Shifts values so the minimum is exactly zero.
pub fn shift_nonnegative(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let (lo, _) = min_max(values)?;
    Ok(values.iter().map(|v| v - lo).collect())
}

fn min_max(values: &[f64]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Domain(format!("value at index {i} is not finite")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Parses the one-value-per-line text format. Blank lines and `#` comments are skipped.
pub fn parse_table(text: &str) -> Result<ObjectiveTable> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("not a number: {line:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("non-finite value {line:?}"),
            });
        }
        values.push(v);
    }
    if values.len() < 2 {
        return Err(Error::Domain(format!(
            "objective file needs at least 2 values, found {}",
            values.len()
        )));
    }
    ObjectiveTable::from_values(values)
}

pub fn load_table(path: impl AsRef<Path>) -> Result<ObjectiveTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Ok(parse_table(&text)?.with_source(TableSource::File {
        path: path.display().to_string(),
    }))
}

/// Writes values in the objective file format with 17 significant digits.
pub fn write_table<W: Write>(mut out: W, values: &[f64], header: &[String]) -> Result<()> {
    let mut buf = String::new();
    for line in header {
        writeln!(buf, "# {line}").unwrap();
    }
    for v in values {
        writeln!(buf, "{v:.16e}").unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}
