use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;

use super::hc::{HcOneSided, HcPval, HcZ};
use super::{
    bonferroni_from_log_p, check_inputs, chi_squared_unchecked, fisher_from_log_p, freeman_tukey_unchecked,
    g2_unchecked, max_abs_z_unchecked, max_z_unchecked, one_sided_sum_unchecked, tukey_hc_sorted,
    DetectorKind, DetectorResult,
};
use crate::error::{Error, Result};
use crate::model::{poisson, ModelSpec, RngStream, Sidedness, StreamPurpose};
use crate::poisson::{CdfStep, PoissonParams, TailTable};

/// How the null CDF of each P-value is obtained for the P-value HC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum NullCdfMode {
    #[default]
    Exact,
    /// Empirical CDF from `draws` null variates per distinct mean.
    Simulated { draws: usize, seed: u64 },
}

/// Coordinates sharing one mean.
pub(crate) struct Group {
    pub(crate) table: TailTable,
    pub(crate) count: usize,
}

/// Null-side precomputation shared by every detector evaluated against the
/// same means. Threshold sets are built on first use and are safe to share
/// across threads.
pub struct PreparedNull {
    lambdas: Vec<f64>,
    groups: Vec<Group>,
    group_of: Vec<u32>,
    null_cdf: NullCdfMode,
    alternative: Option<ModelSpec>,
    hc_z: OnceLock<HcZ>,
    hc_one: OnceLock<HcOneSided>,
    hc_p_two: OnceLock<HcPval>,
    hc_p_one: OnceLock<HcPval>,
}

impl PreparedNull {
    pub fn new(lambdas: &[f64]) -> Result<Self> {
        Self::with_mode(lambdas, NullCdfMode::Exact)
    }

    pub fn with_mode(lambdas: &[f64], null_cdf: NullCdfMode) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::EmptyInput("no coordinates".into()));
        }
        if let NullCdfMode::Simulated { draws, .. } = null_cdf {
            if draws == 0 {
                return Err(Error::invalid("simulated null CDF needs at least one draw"));
            }
        }
        let mut index: HashMap<u64, u32> = HashMap::new();
        let mut distinct = Vec::new();
        let mut counts = Vec::new();
        let mut group_of = Vec::with_capacity(lambdas.len());
        for (i, &l) in lambdas.iter().enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid(format!("lambda[{i}] = {l} must be positive and finite")));
            }
            let g = *index.entry(l.to_bits()).or_insert_with(|| {
                distinct.push(l);
                counts.push(0);
                (distinct.len() - 1) as u32
            });
            counts[g as usize] += 1;
            group_of.push(g);
        }
        let groups = distinct
            .par_iter()
            .zip(counts.par_iter())
            .map(|(&l, &count)| Group { table: TailTable::new(PoissonParams::new(l).expect("checked above")), count })
            .collect();
        Ok(PreparedNull {
            lambdas: lambdas.to_vec(),
            groups,
            group_of,
            null_cdf,
            alternative: None,
            hc_z: OnceLock::new(),
            hc_one: OnceLock::new(),
            hc_p_two: OnceLock::new(),
            hc_p_one: OnceLock::new(),
        })
    }

    /// Prepares the model's null and keeps the alternative for the likelihood ratio.
    pub fn for_model(spec: &ModelSpec) -> Result<Self> {
        Self::for_model_with_mode(spec, NullCdfMode::Exact)
    }

    pub fn for_model_with_mode(spec: &ModelSpec, null_cdf: NullCdfMode) -> Result<Self> {
        let mut p = Self::with_mode(spec.lambdas(), null_cdf)?;
        p.alternative = Some(spec.clone());
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn distinct_means(&self) -> usize {
        self.groups.len()
    }

    pub fn null_cdf_mode(&self) -> NullCdfMode {
        self.null_cdf
    }

    pub fn alternative(&self) -> Option<&ModelSpec> {
        self.alternative.as_ref()
    }

    fn hc_z(&self) -> &HcZ {
        self.hc_z.get_or_init(|| HcZ::new(&self.groups, self.n()))
    }

    fn hc_one(&self) -> &HcOneSided {
        self.hc_one.get_or_init(|| HcOneSided::new(&self.groups, self.n()))
    }

    fn hc_p(&self, sidedness: Sidedness) -> &HcPval {
        let (cell, kind) = match sidedness {
            Sidedness::TwoSided => (&self.hc_p_two, DetectorKind::HigherCriticismPval),
            Sidedness::OneSided => (&self.hc_p_one, DetectorKind::HigherCriticismPvalOneSided),
        };
        cell.get_or_init(|| {
            let steps: Vec<Vec<CdfStep>> = match self.null_cdf {
                NullCdfMode::Exact => self
                    .groups
                    .par_iter()
                    .map(|g| match sidedness {
                        Sidedness::TwoSided => g.table.two_sided_steps(),
                        Sidedness::OneSided => g.table.one_sided_steps(),
                    })
                    .collect(),
                NullCdfMode::Simulated { draws, seed } => self
                    .groups
                    .par_iter()
                    .enumerate()
                    .map(|(gi, g)| simulated_steps(g, gi, draws, seed, sidedness))
                    .collect(),
            };
            HcPval::new(kind, &self.groups, &steps, self.n())
        })
    }

    /// Integer `z` thresholds used by hc-z.
    pub fn hc_z_thresholds(&self) -> Vec<f64> {
        self.hc_z().thresholds()
    }

    /// Integer count thresholds used by hc1.
    pub fn hc_one_sided_thresholds(&self) -> Vec<u64> {
        self.hc_one().thresholds().to_vec()
    }

    /// Candidate P-value thresholds used by hc-p / hc-p1.
    pub fn hc_pval_thresholds(&self, sidedness: Sidedness) -> Vec<f64> {
        self.hc_p(sidedness).thresholds()
    }

    /// Builds every threshold set the given detectors need, in parallel.
    pub fn warm(&self, kinds: &[DetectorKind]) {
        let jobs: Vec<DetectorKind> = kinds.to_vec();
        jobs.par_iter().for_each(|k| match k {
            DetectorKind::HigherCriticismZ => {
                self.hc_z();
            }
            DetectorKind::OneSidedHc => {
                self.hc_one();
            }
            DetectorKind::HigherCriticismPval => {
                self.hc_p(Sidedness::TwoSided);
            }
            DetectorKind::HigherCriticismPvalOneSided => {
                self.hc_p(Sidedness::OneSided);
            }
            _ => {}
        });
    }

    /// Log P-values of a sample.
    pub fn log_pvalues(&self, counts: &[u64], sidedness: Sidedness) -> Result<Vec<f64>> {
        self.check(counts)?;
        Ok(self.log_pvalues_unchecked(counts, sidedness))
    }

    fn log_pvalues_unchecked(&self, counts: &[u64], sidedness: Sidedness) -> Vec<f64> {
        self.group_of
            .iter()
            .zip(counts)
            .map(|(&g, &x)| {
                let t = &self.groups[g as usize].table;
                match sidedness {
                    Sidedness::TwoSided => t.two_sided_pvalue(x).ln(),
                    Sidedness::OneSided => t.one_sided_pvalue(x).ln(),
                }
            })
            .collect()
    }

    fn check(&self, counts: &[u64]) -> Result<()> {
        if counts.len() != self.n() {
            return Err(Error::LengthMismatch { lambdas: self.n(), counts: counts.len() });
        }
        Ok(())
    }

    pub fn evaluate(&self, kind: DetectorKind, counts: &[u64]) -> Result<DetectorResult> {
        self.evaluate_inner(kind, counts, self.alternative.as_ref())
    }

    /// Like [`evaluate`](Self::evaluate), with the likelihood ratio taken against `model`.
    /// `model` must share this null's means.
    pub fn evaluate_against(&self, kind: DetectorKind, counts: &[u64], model: &ModelSpec) -> Result<DetectorResult> {
        if model.lambdas() != &self.lambdas[..] {
            return Err(Error::invalid("model means differ from the prepared null"));
        }
        self.evaluate_inner(kind, counts, Some(model))
    }

    fn evaluate_inner(&self, kind: DetectorKind, counts: &[u64], alternative: Option<&ModelSpec>) -> Result<DetectorResult> {
        check_inputs(&self.lambdas, counts)?;
        let l = &self.lambdas[..];
        let needs_two = matches!(
            kind,
            DetectorKind::HigherCriticismZ
                | DetectorKind::HigherCriticismPval
                | DetectorKind::HigherCriticismPvalOneSided
                | DetectorKind::OneSidedHc
        );
        if needs_two && self.n() < 2 {
            return Err(Error::invalid(format!("{kind} needs at least 2 coordinates")));
        }
        let plain = |v: f64| Ok(DetectorResult::plain(kind, v));
        match kind {
            DetectorKind::ChiSquared => plain(chi_squared_unchecked(l, counts)),
            DetectorKind::LikelihoodRatioG2 => plain(g2_unchecked(l, counts)),
            DetectorKind::FreemanTukey => plain(freeman_tukey_unchecked(l, counts)),
            DetectorKind::MaxAbsZ => plain(max_abs_z_unchecked(l, counts)),
            DetectorKind::MaxZ => plain(max_z_unchecked(l, counts)),
            DetectorKind::OneSidedSum => plain(one_sided_sum_unchecked(l, counts)),
            DetectorKind::Bonferroni => {
                plain(bonferroni_from_log_p(&self.log_pvalues_unchecked(counts, Sidedness::TwoSided)))
            }
            DetectorKind::BonferroniOneSided => {
                plain(bonferroni_from_log_p(&self.log_pvalues_unchecked(counts, Sidedness::OneSided)))
            }
            DetectorKind::Fisher => plain(fisher_from_log_p(&self.log_pvalues_unchecked(counts, Sidedness::TwoSided))),
            DetectorKind::FisherOneSided => {
                plain(fisher_from_log_p(&self.log_pvalues_unchecked(counts, Sidedness::OneSided)))
            }
            DetectorKind::TukeyHc => {
                let mut p: Vec<f64> =
                    self.log_pvalues_unchecked(counts, Sidedness::TwoSided).iter().map(|v| v.exp()).collect();
                p.sort_by(f64::total_cmp);
                Ok(tukey_hc_sorted(&p))
            }
            DetectorKind::HigherCriticismZ => Ok(self.hc_z().evaluate(&self.group_of, counts)),
            DetectorKind::OneSidedHc => Ok(self.hc_one().evaluate(counts)),
            DetectorKind::HigherCriticismPval => {
                Ok(self.hc_p(Sidedness::TwoSided).evaluate(self.log_pvalues_unchecked(counts, Sidedness::TwoSided)))
            }
            DetectorKind::HigherCriticismPvalOneSided => {
                Ok(self.hc_p(Sidedness::OneSided).evaluate(self.log_pvalues_unchecked(counts, Sidedness::OneSided)))
            }
            DetectorKind::OracleLrt => {
                let spec = alternative
                    .ok_or_else(|| Error::invalid("the likelihood ratio needs the alternative model"))?;
                plain(spec.oracle_lrt(counts)?)
            }
        }
    }
}

/// Empirical null CDF of one group's P-value from `draws` simulated counts.
fn simulated_steps(g: &Group, gi: usize, draws: usize, seed: u64, sidedness: Sidedness) -> Vec<CdfStep> {
    let cell = (gi % (1 << 24)) as u32;
    let replicate = (gi >> 24) as u32;
    let mut rng = RngStream::derived(seed, StreamPurpose::NullCdfEstimate, cell, replicate).rng();
    let lam = g.table.lambda();
    let mut log_p: Vec<f64> = (0..draws)
        .map(|_| {
            let x = poisson(&mut rng, lam);
            match sidedness {
                Sidedness::TwoSided => g.table.two_sided_pvalue(x).ln(),
                Sidedness::OneSided => g.table.one_sided_pvalue(x).ln(),
            }
        })
        .collect();
    log_p.sort_by(f64::total_cmp);
    let m = draws as f64;
    let mut steps: Vec<CdfStep> = Vec::new();
    for (i, &t) in log_p.iter().enumerate() {
        let cdf = (i + 1) as f64 / m;
        match steps.last_mut() {
            Some(last) if last.log_t == t => last.cdf = cdf,
            _ => steps.push(CdfStep { log_t: t, cdf }),
        }
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_by_mean() {
        let p = PreparedNull::new(&[2.0, 3.0, 2.0, 3.0, 7.5]).unwrap();
        assert_eq!(p.distinct_means(), 3);
        assert_eq!(p.group_of, vec![0, 1, 0, 1, 2]);
    }

    #[test]
    fn hc_z_empty_set_at_tiny_n() {
        let r = PreparedNull::new(&[2.0; 3]).unwrap().evaluate(DetectorKind::HigherCriticismZ, &[2, 2, 2]).unwrap();
        assert!(r.is_sentinel());
        assert_eq!(r.statistic, f64::NEG_INFINITY);
    }

    #[test]
    fn lrt_requires_alternative() {
        let p = PreparedNull::new(&[2.0; 3]).unwrap();
        assert!(p.evaluate(DetectorKind::OracleLrt, &[1, 2, 3]).is_err());
    }

    #[test]
    fn table_and_direct_pvalue_stats_agree() {
        let l = [1.0, 4.0, 15.0, 15.0, 2.5];
        let x = [0, 9, 30, 14, 2];
        let p = PreparedNull::new(&l).unwrap();
        for (kind, side) in [(DetectorKind::Bonferroni, Sidedness::TwoSided), (DetectorKind::BonferroniOneSided, Sidedness::OneSided)] {
            let a = p.evaluate(kind, &x).unwrap().statistic;
            let b = super::super::bonferroni(&l, &x, side).unwrap();
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
        }
        let a = p.evaluate(DetectorKind::Fisher, &x).unwrap().statistic;
        let b = super::super::fisher(&l, &x, Sidedness::TwoSided).unwrap();
        assert!((a - b).abs() < 1e-10 * b.abs());
    }

    #[test]
    fn simulated_cdf_mode_is_close_to_exact() {
        let l = vec![15.0; 1000];
        let exact = PreparedNull::new(&l).unwrap();
        let sim = PreparedNull::with_mode(&l, NullCdfMode::Simulated { draws: 200_000, seed: 5 }).unwrap();
        let mut rng = RngStream::new(1, 2).rng();
        let x: Vec<u64> = l.iter().map(|&m| poisson(&mut rng, m)).collect();
        let a = exact.evaluate(DetectorKind::HigherCriticismPval, &x).unwrap().statistic;
        let b = sim.evaluate(DetectorKind::HigherCriticismPval, &x).unwrap().statistic;
        assert!((a - b).abs() < 0.3, "{a} vs {b}");
    }
}
