//! Precomputed tails for one Poisson mean, used on the hot path of the
//! detectors. Values are accumulated from both ends of the table starting at
//! exact kernel tails, so they carry the same relative accuracy as the kernel.

use std::ops::RangeInclusive;

use super::pvalue::{mirror_ceil, mirror_floor, TailCut};
use super::{ln_pmf, pvalue, LogProb, PoissonParams};

/// Omitted probability mass allowed outside the table.
const OMITTED_MASS: f64 = 1e-14;

/// A step of a P-value null CDF: `F(t) = cdf` at the attainable value `t = exp(log_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfStep {
    pub log_t: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone)]
pub struct TailTable {
    params: PoissonParams,
    lo: u64,
    hi: u64,
    log_pmf: Vec<f64>,
    log_upper: Vec<f64>,
    log_lower: Vec<f64>,
    log_p2: Vec<f64>,
}

impl TailTable {
    pub fn new(params: PoissonParams) -> Self {
        let lam = params.lambda();
        let sd = lam.sqrt();
        let cap = 50.0 * sd + 50.0;
        let mut width = 6.0 * sd + 6.0;
        let (lo, hi) = loop {
            let lo = (lam - width).floor().max(0.0) as u64;
            let hi = (lam + width).ceil() as u64;
            let mut omitted = params.survival_upper(hi + 1).prob();
            if lo > 0 {
                omitted += params.survival_lower(lo - 1).prob();
            }
            if omitted < OMITTED_MASS || width >= cap {
                break (lo, hi);
            }
            width = (width * 1.3).min(cap);
        };

        let len = (hi - lo + 1) as usize;
        let log_pmf: Vec<f64> = (lo..=hi).map(|x| ln_pmf(lam, x)).collect();
        let pmf: Vec<f64> = log_pmf.iter().map(|l| l.exp()).collect();

        let mut upper = vec![0.0; len];
        upper[len - 1] = params.survival_upper(hi).prob();
        for i in (0..len - 1).rev() {
            upper[i] = upper[i + 1] + pmf[i];
        }
        let mut lower = vec![0.0; len];
        lower[0] = params.survival_lower(lo).prob();
        for i in 1..len {
            lower[i] = lower[i - 1] + pmf[i];
        }
        let log_upper: Vec<f64> = upper.iter().map(|u| u.ln().min(0.0)).collect();
        let log_lower: Vec<f64> = lower.iter().map(|l| l.ln().min(0.0)).collect();

        let mut table = TailTable { params, lo, hi, log_pmf, log_upper, log_lower, log_p2: Vec::new() };
        table.log_p2 = (lo..=hi).map(|x| table.compute_two_sided(x).ln()).collect();
        table
    }

    pub fn params(&self) -> &PoissonParams {
        &self.params
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda()
    }

    pub fn range(&self) -> RangeInclusive<u64> {
        self.lo..=self.hi
    }

    #[inline]
    fn slot(&self, x: u64) -> Option<usize> {
        (x >= self.lo && x <= self.hi).then(|| (x - self.lo) as usize)
    }

    pub fn log_pmf(&self, x: u64) -> LogProb {
        match self.slot(x) {
            Some(i) => LogProb::clamped(self.log_pmf[i]),
            None => self.params.log_pmf(x),
        }
    }

    /// `log P(X >= x)`.
    pub fn log_upper(&self, x: u64) -> LogProb {
        if x == 0 {
            return LogProb::ONE;
        }
        match self.slot(x) {
            Some(i) => LogProb::clamped(self.log_upper[i]),
            None => self.params.survival_upper(x),
        }
    }

    /// `log P(X <= x)`.
    pub fn log_lower(&self, x: u64) -> LogProb {
        match self.slot(x) {
            Some(i) => LogProb::clamped(self.log_lower[i]),
            None => self.params.survival_lower(x),
        }
    }

    fn compute_two_sided(&self, x: u64) -> LogProb {
        let lam = self.lambda();
        let xf = x as f64;
        if xf == lam {
            LogProb::ONE
        } else if xf > lam {
            let up = self.log_upper(x);
            match mirror_floor(lam, x) {
                Some(m) => up.ln_add(self.log_lower(m)),
                None => up,
            }
        } else {
            self.log_lower(x).ln_add(self.log_upper(mirror_ceil(lam, x)))
        }
    }

    /// Two-sided P-value `P(|X - lambda| >= |x - lambda|)`.
    #[inline]
    pub fn two_sided_pvalue(&self, x: u64) -> LogProb {
        match self.slot(x) {
            Some(i) => LogProb::clamped(self.log_p2[i]),
            None => self.compute_two_sided(x),
        }
    }

    /// One-sided P-value `P(X >= x)`.
    #[inline]
    pub fn one_sided_pvalue(&self, x: u64) -> LogProb {
        self.log_upper(x)
    }

    pub fn cut_log_prob(&self, cut: &TailCut) -> LogProb {
        let up = if cut.upper == u64::MAX { LogProb::ZERO } else { self.log_upper(cut.upper) };
        match cut.lower {
            Some(l) => up.ln_add(self.log_lower(l)),
            None => up,
        }
    }

    /// `P(G(X) <= t)` for the two-sided P-value.
    pub fn two_sided_null_cdf(&self, log_t: LogProb) -> LogProb {
        if log_t.ln() >= 0.0 {
            return LogProb::ONE;
        }
        let lam = self.lambda();
        let mid = lam.ceil() as u64;
        // points beyond either end have smaller p-values than the end itself
        let beyond_hi = log_t < self.two_sided_pvalue(self.hi);
        let beyond_lo = self.lo > 0 && log_t < self.two_sided_pvalue(self.lo);
        if mid < self.lo || mid > self.hi || beyond_hi || beyond_lo {
            return pvalue::pvalue_null_cdf_log(&self.params, log_t);
        }
        // right side: p-values nonincreasing over mid..=hi
        let right = &self.log_p2[(mid - self.lo) as usize..];
        let a = mid + right.partition_point(|&g| g > log_t.ln()) as u64;
        let mut total = self.log_upper(a);
        // left side: p-values nonincreasing as x decreases over lo..mid
        let left = &self.log_p2[..(mid - self.lo) as usize];
        let first_above = left.partition_point(|&g| g <= log_t.ln());
        if first_above > 0 {
            total = total.ln_add(self.log_lower(self.lo + first_above as u64 - 1));
        }
        total
    }

    /// `P(P(X >= x) <= t)`, the null law of the one-sided P-value.
    pub fn one_sided_null_cdf(&self, log_t: LogProb) -> LogProb {
        if log_t.ln() >= 0.0 {
            return LogProb::ONE;
        }
        if log_t.ln() < self.log_upper[self.log_upper.len() - 1] || log_t.ln() > self.log_upper[0] {
            return pvalue::one_sided_null_cdf(&self.params, log_t);
        }
        let a = self.lo + self.log_upper.partition_point(|&u| u > log_t.ln()) as u64;
        self.log_upper(a)
    }

    /// Attainable two-sided P-values inside the table with the null CDF at each, ascending in `t`.
    pub fn two_sided_steps(&self) -> Vec<CdfStep> {
        let mut ts: Vec<f64> = self.log_p2.clone();
        ts.sort_by(|a, b| a.total_cmp(b));
        ts.dedup();
        ts.into_iter()
            .map(|log_t| CdfStep { log_t, cdf: self.two_sided_null_cdf(LogProb::clamped(log_t)).prob() })
            .collect()
    }

    /// Attainable one-sided P-values inside the table with the null CDF at each, ascending in `t`.
    pub fn one_sided_steps(&self) -> Vec<CdfStep> {
        let mut ts: Vec<f64> = self.log_upper.clone();
        ts.sort_by(|a, b| a.total_cmp(b));
        ts.dedup();
        ts.into_iter()
            .map(|log_t| CdfStep { log_t, cdf: self.one_sided_null_cdf(LogProb::clamped(log_t)).prob() })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(l: f64) -> TailTable {
        TailTable::new(PoissonParams::new(l).unwrap())
    }

    #[test]
    fn omitted_mass_is_negligible() {
        for l in [1.0, 2.5, 15.0, 100.0, 1234.5] {
            let t = table(l);
            let p = t.params();
            let mut out = p.survival_upper(t.hi + 1).prob();
            if t.lo > 0 {
                out += p.survival_lower(t.lo - 1).prob();
            }
            assert!(out < OMITTED_MASS, "lambda={l}: {out}");
            assert!((t.hi as f64) <= l + 50.0 * l.sqrt() + 51.0);
        }
    }

    #[test]
    fn table_agrees_with_direct_kernel() {
        for l in [1.0, 3.7, 15.0, 60.0] {
            let t = table(l);
            let p = *t.params();
            for x in t.range() {
                let rel = |a: LogProb, b: LogProb| (a.ln() - b.ln()).abs();
                assert!(rel(t.log_upper(x), p.survival_upper(x)) < 1e-12, "upper l={l} x={x}");
                assert!(rel(t.log_lower(x), p.survival_lower(x)) < 1e-12, "lower l={l} x={x}");
                assert!(
                    rel(t.two_sided_pvalue(x), pvalue::two_sided_pvalue(&p, x)) < 1e-12,
                    "p2 l={l} x={x}"
                );
            }
        }
    }

    #[test]
    fn null_cdf_routes_agree() {
        for l in [1.0, 2.0, 9.5, 15.0] {
            let t = table(l);
            let p = *t.params();
            for step in t.two_sided_steps() {
                // probe just above the step: the two routes differ in the last bits
                let probe = LogProb::clamped(step.log_t + 1e-11);
                let direct = pvalue::pvalue_null_cdf_log(&p, probe).prob();
                assert!((step.cdf / direct - 1.0).abs() < 1e-10, "l={l} t={} {} {}", step.log_t.exp(), step.cdf, direct);
                assert!(step.cdf <= step.log_t.exp() * (1.0 + 1e-12));
            }
            for step in t.one_sided_steps() {
                let probe = LogProb::clamped(step.log_t + 1e-11);
                let direct = pvalue::one_sided_null_cdf(&p, probe).prob();
                assert!((step.cdf / direct - 1.0).abs() < 1e-10);
            }
        }
    }
}
