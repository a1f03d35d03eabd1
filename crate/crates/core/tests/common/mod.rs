//! Test-side oracles. Nothing here calls into the tail code under test.

#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `ln(num / den)` from a ~64-bit quotient of the exact ratio.
pub fn ln_ratio(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return f64::NEG_INFINITY;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 { (num << shift as u64) / den } else { num / (den << (-shift) as u64) };
    q.to_f64().unwrap().ln() - shift as f64 * std::f64::consts::LN_2
}

/// Exact Poisson law with an integer mean, as scaled integer weights.
///
/// `weight[k] = lambda^k * K!/k!` so that `P(X = k) = e^-lambda weight[k] / K!`
/// for `k <= K`. The support is cut at `K`, far enough out that the omitted
/// mass is negligible next to every tail probed by the tests.
pub struct ExactPoisson {
    pub lambda: u64,
    pub last: u64,
    weights: Vec<BigUint>,
    suffix: Vec<BigUint>,
    prefix: Vec<BigUint>,
    denominator: BigUint,
}

impl ExactPoisson {
    pub fn new(lambda: u64, last: u64) -> Self {
        let n = last as usize + 1;
        let lam = BigUint::from(lambda);
        // weight[k] = lambda^k * prod_{j=k+1}^{K} j, built from the top down
        let mut pow = vec![BigUint::one(); n];
        for k in 1..n {
            pow[k] = &pow[k - 1] * &lam;
        }
        let mut weights = vec![BigUint::zero(); n];
        let mut falling = BigUint::one();
        for k in (0..n).rev() {
            weights[k] = &pow[k] * &falling;
            falling *= BigUint::from(k as u64).max(BigUint::one());
        }
        // `falling` is now K! (times the harmless factor 1 for k = 0)
        let mut suffix = vec![BigUint::zero(); n + 1];
        for k in (0..n).rev() {
            suffix[k] = &suffix[k + 1] + &weights[k];
        }
        let mut prefix = vec![BigUint::zero(); n];
        let mut acc = BigUint::zero();
        for k in 0..n {
            acc += &weights[k];
            prefix[k] = acc.clone();
        }
        ExactPoisson { lambda, last, weights, suffix, prefix, denominator: falling }
    }

    /// Support cut suitable for probing `x <= lambda + 20 sqrt(lambda)`.
    pub fn for_grid(lambda: u64) -> Self {
        let sd = (lambda as f64).sqrt();
        let last = (lambda as f64 + 60.0 * sd + 120.0).ceil() as u64;
        Self::new(lambda, last)
    }

    fn ln_scaled(&self, w: &BigUint) -> f64 {
        -(self.lambda as f64) + ln_ratio(w, &self.denominator)
    }

    pub fn ln_pmf(&self, k: u64) -> f64 {
        self.ln_scaled(&self.weights[k as usize])
    }

    /// `ln P(X >= x)`.
    pub fn ln_upper(&self, x: u64) -> f64 {
        assert!(x <= self.last);
        self.ln_scaled(&self.suffix[x as usize])
    }

    /// `ln P(X <= x)`.
    pub fn ln_lower(&self, x: u64) -> f64 {
        let x = x.min(self.last);
        self.ln_scaled(&self.prefix[x as usize])
    }

    /// `ln P(|X - lambda| >= |x - lambda|)`, from the exact integer event.
    pub fn ln_two_sided_pvalue(&self, x: u64) -> f64 {
        let lam = self.lambda as i64;
        let d = (x as i64 - lam).abs();
        if d == 0 {
            return 0.0;
        }
        let mut w = self.suffix[(lam + d) as usize].clone();
        if lam - d >= 0 {
            w += &self.prefix[(lam - d) as usize];
        }
        self.ln_scaled(&w)
    }

    /// `ln P(|X - lambda| > (m/4) sqrt(lambda))`, decided in integers:
    /// `16 (k - lambda)^2 > m^2 lambda`.
    pub fn ln_two_sided_tail_quarter(&self, m: u64) -> f64 {
        let lam = self.lambda as i128;
        let rhs = (m as i128) * (m as i128) * lam;
        let mut w = BigUint::zero();
        for k in 0..=self.last {
            let d = k as i128 - lam;
            if 16 * d * d > rhs {
                w += &self.weights[k as usize];
            }
        }
        self.ln_scaled(&w)
    }

    /// `ln p(k)` for every `k` in the represented support.
    pub fn ln_pvalues(&self) -> Vec<f64> {
        (0..=self.last).map(|k| self.ln_two_sided_pvalue(k)).collect()
    }

    /// `ln P(X >= x)` for every `x` in the represented support.
    pub fn ln_uppers(&self) -> Vec<f64> {
        (0..=self.last).map(|k| self.ln_upper(k)).collect()
    }

    /// `P(G(X) <= t)` by enumerating the support and the oracle P-values.
    pub fn pvalue_null_cdf(&self, t: f64) -> f64 {
        let mut w = BigUint::zero();
        for k in 0..=self.last {
            if self.ln_two_sided_pvalue(k).exp() <= t {
                w += &self.weights[k as usize];
            }
        }
        self.ln_scaled(&w).exp()
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

/// Relative error between two probabilities given as logs.
pub fn rel_err_ln(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).exp_m1().abs()
    }
}
