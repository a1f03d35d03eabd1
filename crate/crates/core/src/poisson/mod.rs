//! Exact Poisson probabilities in log space.
//!
//! Every probability leaving this module is a [`LogProb`]. Tail sums are
//! accumulated from the small end of the tail toward the large end, and a
//! tail is only ever obtained by complementing when the complementary tail is
//! at most about one half, so relative accuracy holds far into the tails
//! (well below `1e-300` before underflow of the log itself becomes an issue).

mod bounds;
mod pvalue;
mod table;

pub use bounds::{
    berry_esseen_gap, bohman_lower_bound, chernoff_lower_tail, chernoff_upper_tail, h_rate,
    normal_cdf, normal_sf, ChernoffBounds,
};
pub use pvalue::{
    one_sided_null_cdf, one_sided_pvalue, pvalue_null_cdf, pvalue_null_cdf_log, two_sided_pvalue,
    two_sided_tail, TailCut,
};
pub use table::{CdfStep, TailTable};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Natural log of a probability. `-inf` encodes probability zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    /// Wraps a log-probability, clamping tiny positive rounding excess to 0.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value > 1e-12 {
            return Err(Error::invalid(format!("{value} is not the log of a probability")));
        }
        Ok(LogProb(value.min(0.0)))
    }

    pub(crate) fn clamped(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        LogProb(value.min(0.0))
    }

    pub fn from_prob(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("{p} is not a probability")));
        }
        Ok(LogProb(p.ln()))
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `log(p + q)`.
    pub fn ln_add(self, other: LogProb) -> LogProb {
        let (hi, lo) = if self.0 >= other.0 { (self.0, other.0) } else { (other.0, self.0) };
        if lo == f64::NEG_INFINITY {
            return LogProb(hi);
        }
        LogProb::clamped(hi + (lo - hi).exp().ln_1p())
    }

    /// `log(1 - p)`.
    pub fn complement(self) -> LogProb {
        if self.0 > -std::f64::consts::LN_2 {
            LogProb((-self.0.exp_m1()).ln())
        } else {
            LogProb((-self.0.exp()).ln_1p())
        }
    }
}

/// Mean of a Poisson law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams {
    lambda: f64,
}

impl PoissonParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!("Poisson mean must be finite and > 0, got {lambda}")));
        }
        Ok(PoissonParams { lambda })
    }

    /// As [`PoissonParams::new`], additionally enforcing `lambda >= 1`.
    pub fn at_least_one(lambda: f64) -> Result<Self> {
        let p = Self::new(lambda)?;
        if lambda < 1.0 {
            return Err(Error::invalid(format!("Poisson mean must be >= 1, got {lambda}")));
        }
        Ok(p)
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `log P(X = x)`.
    pub fn log_pmf(&self, x: u64) -> LogProb {
        LogProb::clamped(ln_pmf(self.lambda, x))
    }

    /// `log P(X >= x)`.
    pub fn survival_upper(&self, x: u64) -> LogProb {
        let lam = self.lambda;
        if x == 0 {
            return LogProb::ONE;
        }
        if x as f64 > lam {
            LogProb::clamped(ln_upper_tail_sum(lam, x))
        } else {
            LogProb::clamped(ln_lower_tail_sum(lam, x - 1)).complement()
        }
    }

    /// `log P(X <= x)`.
    pub fn survival_lower(&self, x: u64) -> LogProb {
        let lam = self.lambda;
        if (x as f64) < lam {
            LogProb::clamped(ln_lower_tail_sum(lam, x))
        } else {
            match x.checked_add(1) {
                Some(next) => LogProb::clamped(ln_upper_tail_sum(lam, next)).complement(),
                None => LogProb::ONE,
            }
        }
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Error of Stirling's approximation: `ln n! - (n + 1/2) ln n + n - ln sqrt(2 pi)`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        // n! is exact in f64 up to 22!
        let fact: u64 = (1..=n).product();
        let nf = n as f64;
        return (fact as f64).ln() - (nf + 0.5) * nf.ln() + nf - LN_SQRT_2PI;
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x / m) + m - x`, evaluated without cancellation when `x ~ m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// Saddle-point evaluation of the Poisson log-pmf (Loader's method).
pub(crate) fn ln_pmf(lambda: f64, x: u64) -> f64 {
    if x == 0 {
        return -lambda;
    }
    let xf = x as f64;
    -stirlerr(x) - bd0(xf, lambda) - 0.5 * (2.0 * PI * xf).ln()
}

fn sum_ascending(terms: &[f64]) -> f64 {
    terms.iter().rev().sum()
}

/// `ln P(X >= x)` for `x > lambda`, summing the decreasing terms upward.
fn ln_upper_tail_sum(lambda: f64, x: u64) -> f64 {
    let base = ln_pmf(lambda, x);
    if base == f64::NEG_INFINITY {
        return base;
    }
    let mut terms = Vec::with_capacity(64);
    let mut term = 1.0_f64;
    let mut total = 0.0_f64;
    let mut k = x;
    loop {
        terms.push(term);
        total += term;
        k = k.saturating_add(1);
        let ratio = lambda / k as f64;
        term *= ratio;
        // geometric bound on the remainder
        if term < 1e-18 * total * (1.0 - ratio) || term == 0.0 {
            break;
        }
    }
    base + sum_ascending(&terms).ln()
}

/// `ln P(X <= x)` for `x < lambda`, summing the decreasing terms downward.
fn ln_lower_tail_sum(lambda: f64, x: u64) -> f64 {
    let base = ln_pmf(lambda, x);
    if base == f64::NEG_INFINITY {
        return base;
    }
    let mut terms = Vec::with_capacity(64);
    let mut term = 1.0_f64;
    let mut total = 0.0_f64;
    let mut k = x;
    loop {
        terms.push(term);
        total += term;
        if k == 0 {
            break;
        }
        let ratio = k as f64 / lambda;
        term *= ratio;
        k -= 1;
        if term < 1e-18 * total * (1.0 - ratio) || term == 0.0 {
            break;
        }
    }
    base + sum_ascending(&terms).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: f64) -> PoissonParams {
        PoissonParams::new(l).unwrap()
    }

    #[test]
    fn rejects_nonpositive_means() {
        assert!(PoissonParams::new(0.0).is_err());
        assert!(PoissonParams::new(-1.0).is_err());
        assert!(PoissonParams::new(f64::NAN).is_err());
        assert!(PoissonParams::at_least_one(0.5).is_err());
        assert!(PoissonParams::at_least_one(1.0).is_ok());
    }

    #[test]
    fn pmf_at_zero_is_exp_minus_lambda() {
        assert_eq!(p(1.0).log_pmf(0).ln(), -1.0);
        assert_eq!(p(7.5).log_pmf(0).ln(), -7.5);
    }

    #[test]
    fn pmf_small_cases() {
        let v = p(2.0).log_pmf(2).ln();
        assert!((v - (2.0_f64.ln() - 2.0)).abs() < 1e-15);
        let v = p(15.0).log_pmf(15).prob();
        assert!((v / 0.102_435_866_664_534_19 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn total_mass_and_complements() {
        assert_eq!(p(1.0).survival_upper(0), LogProb::ONE);
        assert_eq!(p(1.0).survival_lower(1_000_000).ln(), 0.0);
        assert!((p(1.0).survival_lower(0).ln() + 1.0).abs() < 1e-15);
        let want = 1.0 - 2.0 * (-1.0_f64).exp();
        assert!((p(1.0).survival_upper(2).prob() / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_prob_arithmetic() {
        let a = LogProb::from_prob(0.25).unwrap();
        let b = LogProb::from_prob(0.5).unwrap();
        assert!((a.ln_add(b).prob() - 0.75).abs() < 1e-15);
        assert!((a.complement().prob() - 0.75).abs() < 1e-15);
        assert_eq!(LogProb::ZERO.complement(), LogProb::ONE);
        assert!(LogProb::ONE.complement().is_zero());
        assert_eq!(LogProb::ZERO.ln_add(b), b);
        assert!(LogProb::new(0.5).is_err());
        assert!(LogProb::from_prob(1.5).is_err());
    }

    #[test]
    fn stirlerr_continuity_across_branches() {
        // the exact branch and the series agree where they meet
        let exact = |n: u64| {
            let lnfact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
            let nf = n as f64;
            lnfact - (nf + 0.5) * nf.ln() + nf - LN_SQRT_2PI
        };
        for n in [16_u64, 20, 30] {
            assert!((stirlerr(n) - exact(n)).abs() < 1e-13, "n={n}");
        }
    }
}
