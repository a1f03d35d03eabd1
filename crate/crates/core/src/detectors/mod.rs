//! Test statistics for the sparse Poisson detection problem.
//!
//! Every statistic rejects for large values. Statistics that take a supremum
//! over a threshold set return `-inf` with [`Diagnostics::empty_threshold_set`]
//! when that set is empty; a calibrated test never rejects on the sentinel.
//!
//! The free functions are convenient one-shot evaluators. Repeated evaluation
//! against the same null means should go through [`PreparedNull`], which
//! groups coordinates by mean and caches tail tables and threshold sets.

mod hc;
mod prepared;

pub use prepared::{NullCdfMode, PreparedNull};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Sidedness;
use crate::poisson::{one_sided_pvalue, two_sided_pvalue, PoissonParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    ChiSquared,
    LikelihoodRatioG2,
    FreemanTukey,
    MaxAbsZ,
    MaxZ,
    Bonferroni,
    BonferroniOneSided,
    Fisher,
    FisherOneSided,
    HigherCriticismZ,
    HigherCriticismPval,
    HigherCriticismPvalOneSided,
    TukeyHc,
    OneSidedSum,
    OneSidedHc,
    OracleLrt,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 16] = [
        DetectorKind::ChiSquared,
        DetectorKind::LikelihoodRatioG2,
        DetectorKind::FreemanTukey,
        DetectorKind::MaxAbsZ,
        DetectorKind::MaxZ,
        DetectorKind::Bonferroni,
        DetectorKind::BonferroniOneSided,
        DetectorKind::Fisher,
        DetectorKind::FisherOneSided,
        DetectorKind::HigherCriticismZ,
        DetectorKind::HigherCriticismPval,
        DetectorKind::HigherCriticismPvalOneSided,
        DetectorKind::TukeyHc,
        DetectorKind::OneSidedSum,
        DetectorKind::OneSidedHc,
        DetectorKind::OracleLrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::ChiSquared => "chi2",
            DetectorKind::LikelihoodRatioG2 => "g2",
            DetectorKind::FreemanTukey => "ft",
            DetectorKind::MaxAbsZ => "max",
            DetectorKind::MaxZ => "max1",
            DetectorKind::Bonferroni => "bonferroni",
            DetectorKind::BonferroniOneSided => "bonferroni1",
            DetectorKind::Fisher => "fisher",
            DetectorKind::FisherOneSided => "fisher1",
            DetectorKind::HigherCriticismZ => "hc-z",
            DetectorKind::HigherCriticismPval => "hc-p",
            DetectorKind::HigherCriticismPvalOneSided => "hc-p1",
            DetectorKind::TukeyHc => "hc-tukey",
            DetectorKind::OneSidedSum => "sum1",
            DetectorKind::OneSidedHc => "hc1",
            DetectorKind::OracleLrt => "lrt",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownDetector(name.to_string()))
    }

    /// `None` for the likelihood ratio, whose sidedness is that of the model.
    pub fn sidedness(self) -> Option<Sidedness> {
        use DetectorKind::*;
        match self {
            MaxZ | BonferroniOneSided | FisherOneSided | HigherCriticismPvalOneSided | OneSidedSum
            | OneSidedHc => Some(Sidedness::OneSided),
            OracleLrt => None,
            _ => Some(Sidedness::TwoSided),
        }
    }

    /// Whether evaluation uses the exact null law of the P-values.
    pub fn needs_null_cdf(self) -> bool {
        matches!(self, DetectorKind::HigherCriticismPval | DetectorKind::HigherCriticismPvalOneSided)
    }

    /// Whether the statistic depends on the alternative as well as the null.
    pub fn needs_alternative(self) -> bool {
        self == DetectorKind::OracleLrt
    }

    /// The detectors compared under the two-sided model.
    pub fn two_sided_suite() -> Vec<DetectorKind> {
        use DetectorKind::*;
        vec![
            ChiSquared, LikelihoodRatioG2, FreemanTukey, MaxAbsZ, Bonferroni, Fisher, HigherCriticismZ,
            HigherCriticismPval, TukeyHc, OracleLrt,
        ]
    }

    /// The detectors compared under the one-sided model.
    pub fn one_sided_suite() -> Vec<DetectorKind> {
        use DetectorKind::*;
        vec![OneSidedSum, MaxZ, BonferroniOneSided, FisherOneSided, OneSidedHc, HigherCriticismPvalOneSided, OracleLrt]
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::from_name(s)
    }
}

impl Serialize for DetectorKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for DetectorKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        DetectorKind::from_name(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Maximizing threshold: `z` for hc-z, `t` for hc-p, `x` for hc1, `i` for hc-tukey.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmax: Option<f64>,
    /// Number of thresholds the supremum ran over.
    #[serde(default)]
    pub thresholds: usize,
    #[serde(default)]
    pub empty_threshold_set: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorResult {
    pub kind: DetectorKind,
    #[serde(with = "crate::serde_util")]
    pub statistic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

impl DetectorResult {
    pub fn plain(kind: DetectorKind, statistic: f64) -> Self {
        DetectorResult { kind, statistic, diagnostics: None }
    }

    pub fn sentinel(kind: DetectorKind) -> Self {
        DetectorResult {
            kind,
            statistic: f64::NEG_INFINITY,
            diagnostics: Some(Diagnostics { argmax: None, thresholds: 0, empty_threshold_set: true }),
        }
    }

    pub fn is_sentinel(&self) -> bool {
        self.diagnostics.is_some_and(|d| d.empty_threshold_set)
    }
}

pub(crate) fn check_inputs(lambdas: &[f64], counts: &[u64]) -> Result<()> {
    if lambdas.len() != counts.len() {
        return Err(Error::LengthMismatch { lambdas: lambdas.len(), counts: counts.len() });
    }
    if lambdas.is_empty() {
        return Err(Error::EmptyInput("no coordinates".into()));
    }
    if let Some((i, l)) = lambdas.iter().enumerate().find(|(_, l)| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::invalid(format!("lambda[{i}] = {l} must be positive and finite")));
    }
    Ok(())
}

/// `sum (X - lambda)^2 / lambda`.
pub fn chi_squared(lambdas: &[f64], counts: &[u64]) -> Result<f64> {
    check_inputs(lambdas, counts)?;
    Ok(chi_squared_unchecked(lambdas, counts))
}

pub(crate) fn chi_squared_unchecked(lambdas: &[f64], counts: &[u64]) -> f64 {
    lambdas.iter().zip(counts).map(|(&l, &x)| (x as f64 - l).powi(2) / l).sum()
}

/// `2 sum X log(X / lambda)` with `0 log 0 = 0`.
pub fn g2_statistic(lambdas: &[f64], counts: &[u64]) -> Result<f64> {
    check_inputs(lambdas, counts)?;
    Ok(g2_unchecked(lambdas, counts))
}

pub(crate) fn g2_unchecked(lambdas: &[f64], counts: &[u64]) -> f64 {
    2.0 * lambdas
        .iter()
        .zip(counts)
        .filter(|(_, &x)| x > 0)
        .map(|(&l, &x)| {
            let x = x as f64;
            x * (x / l).ln()
        })
        .sum::<f64>()
}

/// `4 sum (sqrt X - sqrt lambda)^2`.
pub fn freeman_tukey(lambdas: &[f64], counts: &[u64]) -> Result<f64> {
    check_inputs(lambdas, counts)?;
    Ok(freeman_tukey_unchecked(lambdas, counts))
}

pub(crate) fn freeman_tukey_unchecked(lambdas: &[f64], counts: &[u64]) -> f64 {
    4.0 * lambdas.iter().zip(counts).map(|(&l, &x)| ((x as f64).sqrt() - l.sqrt()).powi(2)).sum::<f64>()
}

#[inline]
fn z_score(l: f64, x: u64) -> f64 {
    (x as f64 - l) / l.sqrt()
}

/// `max |Z_i|`.
pub fn max_abs_z(lambdas: &[f64], counts: &[u64]) -> Result<f64> {
    check_inputs(lambdas, counts)?;
    Ok(max_abs_z_unchecked(lambdas, counts))
}

pub(crate) fn max_abs_z_unchecked(lambdas: &[f64], counts: &[u64]) -> f64 {
    lambdas.iter().zip(counts).map(|(&l, &x)| z_score(l, x).abs()).fold(0.0, f64::max)
}

/// `max Z_i`.
pub fn max_z(lambdas: &[f64], counts: &[u64]) -> Result<f64> {
    check_inputs(lambdas, counts)?;
    Ok(max_z_unchecked(lambdas, counts))
}

pub(crate) fn max_z_unchecked(lambdas: &[f64], counts: &[u64]) -> f64 {
    lambdas.iter().zip(counts).map(|(&l, &x)| z_score(l, x)).fold(f64::NEG_INFINITY, f64::max)
}

/// `sum Z_i`.
pub fn one_sided_sum(lambdas: &[f64], counts: &[u64]) -> Result<f64> {
    check_inputs(lambdas, counts)?;
    Ok(one_sided_sum_unchecked(lambdas, counts))
}

pub(crate) fn one_sided_sum_unchecked(lambdas: &[f64], counts: &[u64]) -> f64 {
    lambdas.iter().zip(counts).map(|(&l, &x)| z_score(l, x)).sum()
}

fn log_pvalues(lambdas: &[f64], counts: &[u64], sidedness: Sidedness) -> Result<Vec<f64>> {
    check_inputs(lambdas, counts)?;
    lambdas
        .iter()
        .zip(counts)
        .map(|(&l, &x)| {
            let p = PoissonParams::new(l)?;
            Ok(match sidedness {
                Sidedness::TwoSided => two_sided_pvalue(&p, x).ln(),
                Sidedness::OneSided => one_sided_pvalue(&p, x).ln(),
            })
        })
        .collect()
}

/// `-log min p_i`.
pub fn bonferroni(lambdas: &[f64], counts: &[u64], sidedness: Sidedness) -> Result<f64> {
    Ok(bonferroni_from_log_p(&log_pvalues(lambdas, counts, sidedness)?))
}

pub(crate) fn bonferroni_from_log_p(log_p: &[f64]) -> f64 {
    -log_p.iter().cloned().fold(0.0, f64::min)
}

/// `-2 sum log p_i`.
pub fn fisher(lambdas: &[f64], counts: &[u64], sidedness: Sidedness) -> Result<f64> {
    Ok(fisher_from_log_p(&log_pvalues(lambdas, counts, sidedness)?))
}

pub(crate) fn fisher_from_log_p(log_p: &[f64]) -> f64 {
    -2.0 * log_p.iter().sum::<f64>()
}

/// Tukey's higher criticism over the lower half of the sorted P-values,
/// `max_{i <= n/2} sqrt(n) (i/n - p_(i)) / sqrt(p_(i) (1 - p_(i)))`.
///
/// Order statistics equal to 1 have a zero denominator and are skipped.
pub fn tukey_hc(pvalues: &[f64]) -> Result<DetectorResult> {
    if let Some(p) = pvalues.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Error::invalid(format!("P-value {p} outside (0, 1]")));
    }
    let mut sorted = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(tukey_hc_sorted(&sorted))
}

pub(crate) fn tukey_hc_sorted(sorted: &[f64]) -> DetectorResult {
    let n = sorted.len();
    let nf = n as f64;
    let mut best = f64::NEG_INFINITY;
    let mut argmax = None;
    let mut used = 0;
    for (i, &p) in sorted.iter().take(n / 2).enumerate() {
        if p >= 1.0 {
            continue;
        }
        used += 1;
        let rank = (i + 1) as f64;
        let v = nf.sqrt() * (rank / nf - p) / (p * (1.0 - p)).sqrt();
        if v > best {
            best = v;
            argmax = Some(rank);
        }
    }
    if used == 0 {
        return DetectorResult::sentinel(DetectorKind::TukeyHc);
    }
    DetectorResult {
        kind: DetectorKind::TukeyHc,
        statistic: best,
        diagnostics: Some(Diagnostics { argmax, thresholds: used, empty_threshold_set: false }),
    }
}

/// Higher criticism over normalized-deviation thresholds `z` in `{0, 1, 2, ...}`.
pub fn higher_criticism_z(lambdas: &[f64], counts: &[u64]) -> Result<DetectorResult> {
    check_inputs(lambdas, counts)?;
    PreparedNull::new(lambdas)?.evaluate(DetectorKind::HigherCriticismZ, counts)
}

/// Higher criticism over attainable P-value thresholds with exact null CDFs.
pub fn higher_criticism_pval(lambdas: &[f64], counts: &[u64], sidedness: Sidedness) -> Result<DetectorResult> {
    check_inputs(lambdas, counts)?;
    let kind = match sidedness {
        Sidedness::TwoSided => DetectorKind::HigherCriticismPval,
        Sidedness::OneSided => DetectorKind::HigherCriticismPvalOneSided,
    };
    PreparedNull::new(lambdas)?.evaluate(kind, counts)
}

/// One-sided higher criticism over count thresholds `x` in `{1, 2, ...}`.
pub fn one_sided_hc(lambdas: &[f64], counts: &[u64]) -> Result<DetectorResult> {
    check_inputs(lambdas, counts)?;
    PreparedNull::new(lambdas)?.evaluate(DetectorKind::OneSidedHc, counts)
}
