//! Monte Carlo calibration, power estimation and grid sweeps.
//!
//! Every replicate draws from its own RNG stream, identified by purpose,
//! cell and replicate index, and results are collected in replicate order.
//! A run is therefore a pure function of its configuration and seed, whatever
//! the number of worker threads.
//!
//! Critical values are the `ceil((1 - alpha) R)`-th order statistic of `R`
//! null statistics and a test rejects when its statistic is strictly larger.

mod persist;

pub use persist::{
    load_calibration, load_grid_json, read_grid_csv, save_calibration, save_grid_json, write_grid_csv,
    GRID_FORMAT_VERSION,
};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundaries::{annotate, BoundaryFlag};
use crate::detectors::{DetectorKind, NullCdfMode, PreparedNull};
use crate::error::{Error, Result};
use crate::model::{
    null_fingerprint, Hypothesis, Means, ModelSpec, Regime, RngStream, ScenarioConfig, Sidedness, Sparsity,
    StreamPurpose,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub alpha: f64,
    pub null_reps: usize,
    pub seed: u64,
}

impl CalibrationConfig {
    pub fn new(seed: u64) -> Self {
        CalibrationConfig { alpha: 0.05, null_reps: 500, seed }
    }

    fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha = {} must lie in (0, 1]", self.alpha)));
        }
        if self.null_reps < 2 {
            return Err(Error::invalid(format!("null_reps = {} must be at least 2", self.null_reps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedDetector {
    pub kind: DetectorKind,
    #[serde(flatten)]
    pub calibration: CalibrationConfig,
    #[serde(with = "crate::serde_util")]
    pub critical_value: f64,
    pub spec_fingerprint: String,
    pub tool_version: String,
}

impl CalibratedDetector {
    /// Strict exceedance; the empty-set sentinel never rejects.
    pub fn rejects(&self, statistic: f64) -> bool {
        statistic > self.critical_value && statistic != f64::NEG_INFINITY
    }
}

/// Index of the critical order statistic (1-based), `ceil((1 - alpha) R)` clamped to `[1, R]`.
pub fn critical_rank(alpha: f64, reps: usize) -> usize {
    // guard against 0.95 * 500 = 474.99999999999994
    let k = ((1.0 - alpha) * reps as f64 - 1e-9).ceil();
    (k.max(1.0) as usize).min(reps)
}

/// Critical value from null statistics; sentinels sort as `-inf`.
pub fn empirical_quantile(stats: &mut [f64], alpha: f64) -> f64 {
    stats.sort_by(f64::total_cmp);
    stats[critical_rank(alpha, stats.len()) - 1]
}

fn fingerprint_for(kind: DetectorKind, prep: &PreparedNull, model: Option<&ModelSpec>) -> Result<String> {
    if kind.needs_alternative() {
        let m = model.ok_or_else(|| Error::invalid(format!("{kind} needs the alternative model")))?;
        Ok(m.full_fingerprint())
    } else {
        Ok(null_fingerprint(prep.lambdas()))
    }
}

/// Statistics of every kind on `reps` samples drawn from `(seed, purpose, cell, rep)` streams.
///
/// Returns one vector per kind, in replicate order.
#[allow(clippy::too_many_arguments)]
pub fn simulate_statistics(
    prep: &PreparedNull,
    model: Option<&ModelSpec>,
    kinds: &[DetectorKind],
    under: Hypothesis,
    reps: usize,
    seed: u64,
    purpose: StreamPurpose,
    cell: u32,
) -> Result<Vec<Vec<f64>>> {
    if under == Hypothesis::Alternative && model.is_none() {
        return Err(Error::invalid("sampling the alternative needs a model"));
    }
    prep.warm(kinds);
    let rows: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::derived(seed, purpose, cell, rep as u32).rng();
            let counts = match (under, model) {
                (Hypothesis::Alternative, Some(m)) => m.sample_with(&mut rng, Hypothesis::Alternative).counts,
                _ => prep.lambdas().iter().map(|&l| crate::model::poisson(&mut rng, l)).collect(),
            };
            kinds
                .iter()
                .map(|&k| {
                    let r = match model {
                        Some(m) => prep.evaluate_against(k, &counts, m),
                        None => prep.evaluate(k, &counts),
                    };
                    r.map(|r| r.statistic)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..kinds.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect())
}

/// Critical values for `kinds` from shared null samples.
///
/// The likelihood ratio depends on the alternative, so it is calibrated
/// against `model` and fingerprinted with the whole model.
pub fn calibrate(
    prep: &PreparedNull,
    model: Option<&ModelSpec>,
    kinds: &[DetectorKind],
    config: &CalibrationConfig,
) -> Result<Vec<CalibratedDetector>> {
    config.check()?;
    let model = model.or(prep.alternative());
    let fingerprints = kinds.iter().map(|&k| fingerprint_for(k, prep, model)).collect::<Result<Vec<_>>>()?;
    let stats = simulate_statistics(
        prep,
        model,
        kinds,
        Hypothesis::Null,
        config.null_reps,
        config.seed,
        StreamPurpose::Calibration,
        0,
    )?;
    Ok(kinds
        .iter()
        .zip(stats)
        .zip(fingerprints)
        .map(|((&kind, mut s), spec_fingerprint)| CalibratedDetector {
            kind,
            calibration: *config,
            critical_value: empirical_quantile(&mut s, config.alpha),
            spec_fingerprint,
            tool_version: TOOL_VERSION.to_string(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub detector: DetectorKind,
    pub rejections: usize,
    pub reps: usize,
    pub power: f64,
    /// Every replicate returned the empty-threshold-set sentinel.
    pub all_sentinel: bool,
}

fn check_fingerprints(prep: &PreparedNull, model: &ModelSpec, calibrated: &[CalibratedDetector]) -> Result<()> {
    for c in calibrated {
        let expected = fingerprint_for(c.kind, prep, Some(model))?;
        if expected != c.spec_fingerprint {
            return Err(Error::FingerprintMismatch { expected, found: c.spec_fingerprint.clone() });
        }
    }
    Ok(())
}

/// Fraction of `reps` samples from `under` rejected by each calibrated detector.
#[allow(clippy::too_many_arguments)]
pub fn rejection_rates(
    prep: &PreparedNull,
    model: &ModelSpec,
    calibrated: &[CalibratedDetector],
    under: Hypothesis,
    reps: usize,
    seed: u64,
    purpose: StreamPurpose,
    cell: u32,
) -> Result<Vec<PowerEstimate>> {
    if reps == 0 {
        return Err(Error::invalid("reps must be positive"));
    }
    check_fingerprints(prep, model, calibrated)?;
    let kinds: Vec<DetectorKind> = calibrated.iter().map(|c| c.kind).collect();
    let stats = simulate_statistics(prep, Some(model), &kinds, under, reps, seed, purpose, cell)?;
    Ok(calibrated
        .iter()
        .zip(stats)
        .map(|(c, s)| {
            let rejections = s.iter().filter(|&&v| c.rejects(v)).count();
            PowerEstimate {
                detector: c.kind,
                rejections,
                reps,
                power: rejections as f64 / reps as f64,
                all_sentinel: s.iter().all(|v| *v == f64::NEG_INFINITY),
            }
        })
        .collect())
}

/// Empirical power under the model's alternative, on power streams of `cell`.
pub fn estimate_power(
    prep: &PreparedNull,
    model: &ModelSpec,
    calibrated: &[CalibratedDetector],
    reps: usize,
    seed: u64,
    cell: u32,
) -> Result<Vec<PowerEstimate>> {
    rejection_rates(prep, model, calibrated, Hypothesis::Alternative, reps, seed, StreamPurpose::Power, cell)
}

/// Empirical level on fresh null samples, disjoint from calibration and power streams.
pub fn empirical_level(
    prep: &PreparedNull,
    model: &ModelSpec,
    calibrated: &[CalibratedDetector],
    reps: usize,
    seed: u64,
) -> Result<Vec<PowerEstimate>> {
    rejection_rates(prep, model, calibrated, Hypothesis::Null, reps, seed, StreamPurpose::Validation, 0)
}

/// Which regime a grid sweeps and what its signal axis means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    DenseTwoSided,
    SparseTwoSided,
    SmallMeans,
    OneSidedDense,
    OneSidedSparse,
}

impl Family {
    pub fn regime(self, signal: f64) -> Regime {
        match self {
            Family::DenseTwoSided => Regime::DenseTwoSided { s: signal },
            Family::SparseTwoSided => Regime::SparseTwoSided { r: signal },
            Family::SmallMeans => Regime::SmallMeans { gamma: signal },
            Family::OneSidedDense => Regime::OneSidedDense { s: signal },
            Family::OneSidedSparse => Regime::OneSidedSparse { r: signal },
        }
    }

    pub fn sidedness(self) -> Sidedness {
        match self {
            Family::OneSidedDense | Family::OneSidedSparse => Sidedness::OneSided,
            _ => Sidedness::TwoSided,
        }
    }

    pub fn signal_kind(self) -> SignalKind {
        match self {
            Family::DenseTwoSided | Family::OneSidedDense => SignalKind::S,
            Family::SparseTwoSided | Family::OneSidedSparse => SignalKind::R,
            Family::SmallMeans => SignalKind::Gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    S,
    R,
    Gamma,
}

impl SignalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::S => "s",
            SignalKind::R => "r",
            SignalKind::Gamma => "gamma",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "s" => SignalKind::S,
            "r" => SignalKind::R,
            "gamma" => SignalKind::Gamma,
            _ => return None,
        })
    }
}

/// Grid axis: explicit values or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range { from: f64, to: f64, step: f64 },
}

impl Axis {
    pub fn points(&self) -> Result<Vec<f64>> {
        match *self {
            Axis::Values(ref v) => Ok(v.clone()),
            Axis::Range { from, to, step } => {
                if !(step > 0.0) || !(to >= from) || !from.is_finite() || !to.is_finite() {
                    return Err(Error::invalid(format!("bad axis range {from}..={to} step {step}")));
                }
                let k = ((to - from) / step + 1e-9).floor() as usize;
                // rounded so that 0.1 + 3 * 0.05 prints as 0.25
                Ok((0..=k).map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12).collect())
            }
        }
    }
}

fn default_alpha() -> f64 {
    0.05
}
fn default_null_reps() -> usize {
    500
}
fn default_power_reps() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub means: Means,
    pub family: Family,
    pub betas: Axis,
    pub signals: Axis,
    pub detectors: Vec<DetectorKind>,
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_null_reps")]
    pub null_reps: usize,
    #[serde(default = "default_power_reps")]
    pub power_reps: usize,
    #[serde(default)]
    pub null_cdf: NullCdfMode,
    #[serde(default)]
    pub require_unit_means: bool,
}

impl GridConfig {
    pub fn calibration(&self) -> CalibrationConfig {
        CalibrationConfig { alpha: self.alpha, null_reps: self.null_reps, seed: self.seed }
    }

    pub fn scenario(&self, beta: f64, signal: f64) -> ScenarioConfig {
        ScenarioConfig {
            n: self.n,
            means: self.means.clone(),
            sparsity: Sparsity::Beta(beta),
            regime: self.family.regime(signal),
            sidedness: self.family.sidedness(),
            require_unit_means: self.require_unit_means,
        }
    }
}

/// Per-cell status shown in the CSV `flag` column, `|`-separated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellFlags {
    pub boundary: BoundaryFlag,
    pub sentinel: bool,
    pub error: bool,
}

impl fmt::Display for CellFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.boundary.as_str())?;
        if self.sentinel {
            f.write_str("|sentinel")?;
        }
        if self.error {
            f.write_str("|error")?;
        }
        Ok(())
    }
}

impl FromStr for CellFlags {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split('|');
        let head = parts.next().unwrap_or_default();
        let boundary =
            BoundaryFlag::parse(head).ok_or_else(|| Error::invalid(format!("unknown boundary flag {head:?}")))?;
        let mut flags = CellFlags { boundary, sentinel: false, error: false };
        for p in parts {
            match p {
                "sentinel" => flags.sentinel = true,
                "error" => flags.error = true,
                other => return Err(Error::invalid(format!("unknown cell flag {other:?}"))),
            }
        }
        Ok(flags)
    }
}

impl Serialize for CellFlags {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CellFlags {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    pub detector: DetectorKind,
    pub n: usize,
    pub beta: f64,
    pub signal_kind: SignalKind,
    pub signal: f64,
    /// `None` when the cell could not be run.
    pub power: Option<f64>,
    pub reps: usize,
    pub boundary_value: Option<f64>,
    pub flag: CellFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub beta: f64,
    pub signal: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerGrid {
    pub config: GridConfig,
    pub null_fingerprint: String,
    /// Critical values shared by every cell (the likelihood ratio is calibrated per cell).
    pub calibration: Vec<CalibratedDetector>,
    pub cells: Vec<PowerCell>,
    #[serde(default)]
    pub errors: Vec<CellError>,
}

impl PowerGrid {
    pub fn cell(&self, detector: DetectorKind, beta: f64, signal: f64) -> Option<&PowerCell> {
        self.cells.iter().find(|c| c.detector == detector && c.beta == beta && c.signal == signal)
    }
}

/// Runs a full sweep. `workers = 0` uses all cores.
pub fn run_grid(config: &GridConfig, workers: usize) -> Result<PowerGrid> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| run_grid_inner(config))
}

fn run_grid_inner(config: &GridConfig) -> Result<PowerGrid> {
    if config.detectors.is_empty() {
        return Err(Error::invalid("grid has no detectors"));
    }
    if config.power_reps == 0 {
        return Err(Error::invalid("power_reps must be positive"));
    }
    let betas = config.betas.points()?;
    let signals = config.signals.points()?;
    let cells: Vec<(f64, f64)> = betas.iter().flat_map(|&b| signals.iter().map(move |&s| (b, s))).collect();
    if cells.len() >= 1 << 24 {
        return Err(Error::invalid("too many grid cells"));
    }
    let mut seen = std::collections::HashSet::new();
    for &(b, s) in &cells {
        if !seen.insert((b.to_bits(), s.to_bits())) {
            return Err(Error::invalid(format!("grid cell (beta {b}, signal {s}) appears twice")));
        }
    }
    let mut dedup = config.detectors.clone();
    dedup.sort();
    dedup.dedup();
    if dedup.len() != config.detectors.len() {
        return Err(Error::invalid("grid lists a detector twice"));
    }

    // the null law does not depend on the cell; any valid scenario gives it
    let null_spec = ModelSpec::build(ScenarioConfig {
        sparsity: Sparsity::Epsilon(0.0),
        regime: Regime::Explicit { delta: vec![0.0; config.n] },
        ..config.scenario(0.5, 0.0)
    })?;
    let prep = PreparedNull::with_mode(null_spec.lambdas(), config.null_cdf)?;
    let shared: Vec<DetectorKind> = config.detectors.iter().copied().filter(|k| !k.needs_alternative()).collect();
    let per_cell: Vec<DetectorKind> = config.detectors.iter().copied().filter(|k| k.needs_alternative()).collect();
    let calibration = if shared.is_empty() { Vec::new() } else { calibrate(&prep, None, &shared, &config.calibration())? };

    let results: Vec<std::result::Result<Vec<PowerCell>, CellError>> = cells
        .par_iter()
        .enumerate()
        .map(|(ci, &(beta, signal))| {
            run_cell(config, &prep, &calibration, &per_cell, ci as u32, beta, signal)
                .map_err(|e| CellError { beta, signal, message: e.to_string() })
        })
        .collect();

    let mut out = Vec::with_capacity(cells.len() * config.detectors.len());
    let mut errors = Vec::new();
    for ((beta, signal), r) in cells.into_iter().zip(results) {
        match r {
            Ok(c) => out.extend(c),
            Err(e) => {
                let (bv, bf) = annotate(beta, &config.family.regime(signal));
                for &d in &config.detectors {
                    out.push(PowerCell {
                        detector: d,
                        n: config.n,
                        beta,
                        signal_kind: config.family.signal_kind(),
                        signal,
                        power: None,
                        reps: 0,
                        boundary_value: bv,
                        flag: CellFlags { boundary: bf, sentinel: false, error: true },
                    });
                }
                errors.push(e);
            }
        }
    }
    Ok(PowerGrid {
        config: config.clone(),
        null_fingerprint: null_fingerprint(prep.lambdas()),
        calibration,
        cells: out,
        errors,
    })
}

fn run_cell(
    config: &GridConfig,
    prep: &PreparedNull,
    shared: &[CalibratedDetector],
    per_cell: &[DetectorKind],
    cell: u32,
    beta: f64,
    signal: f64,
) -> Result<Vec<PowerCell>> {
    let spec = ModelSpec::build(config.scenario(beta, signal))?;
    let mut calibrated = shared.to_vec();
    if !per_cell.is_empty() {
        calibrated.extend(calibrate(prep, Some(&spec), per_cell, &config.calibration())?);
    }
    let estimates = estimate_power(prep, &spec, &calibrated, config.power_reps, config.seed, cell)?;
    let (boundary_value, boundary) = annotate(beta, spec.regime());
    let by_kind = |k: DetectorKind| estimates.iter().find(|e| e.detector == k).expect("estimated above");
    Ok(config
        .detectors
        .iter()
        .map(|&d| {
            let e = by_kind(d);
            PowerCell {
                detector: d,
                n: config.n,
                beta,
                signal_kind: config.family.signal_kind(),
                signal,
                power: Some(e.power),
                reps: e.reps,
                boundary_value,
                flag: CellFlags { boundary, sentinel: e.all_sentinel, error: false },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_rank_convention() {
        assert_eq!(critical_rank(0.05, 500), 475);
        assert_eq!(critical_rank(0.05, 2000), 1900);
        assert_eq!(critical_rank(1.0, 500), 1);
        assert_eq!(critical_rank(0.01, 10), 10);
        let mut v: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        v.reverse();
        assert_eq!(empirical_quantile(&mut v, 0.05), 19.0);
        let mut v = vec![f64::NEG_INFINITY, 1.0, f64::NEG_INFINITY];
        assert_eq!(empirical_quantile(&mut v, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn axis_points() {
        let a = Axis::Range { from: 0.1, to: 0.45, step: 0.05 };
        assert_eq!(a.points().unwrap(), vec![0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45]);
        let a = Axis::Range { from: -0.5, to: 0.0, step: 0.05 };
        assert_eq!(a.points().unwrap().len(), 11);
        assert!(Axis::Range { from: 1.0, to: 0.0, step: 0.1 }.points().is_err());
    }

    #[test]
    fn flags_round_trip() {
        for s in ["above", "below|sentinel", "na|error", "on|sentinel|error"] {
            assert_eq!(s.parse::<CellFlags>().unwrap().to_string(), s);
        }
        assert!("up".parse::<CellFlags>().is_err());
    }

    #[test]
    fn sentinel_never_rejects() {
        let c = CalibratedDetector {
            kind: DetectorKind::HigherCriticismZ,
            calibration: CalibrationConfig::new(1),
            critical_value: f64::NEG_INFINITY,
            spec_fingerprint: String::new(),
            tool_version: TOOL_VERSION.into(),
        };
        assert!(!c.rejects(f64::NEG_INFINITY));
        assert!(c.rejects(-1e300));
    }
}
