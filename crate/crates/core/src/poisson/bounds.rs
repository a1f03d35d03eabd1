//! Analytic tail bounds and normal-approximation diagnostics. None of these
//! feed the P-value computations; they exist to bracket the exact tails.

use std::f64::consts::SQRT_2;

use super::{ln_pmf, PoissonParams};
use crate::error::{Error, Result};

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// Large-deviation rate `h(x) = x ln x - x + 1`, with `h(0) = 1` (the limit at 0).
///
/// Returns NaN for negative `x`.
pub fn h_rate(x: f64) -> f64 {
    if x < 0.0 {
        f64::NAN
    } else if x == 0.0 {
        1.0
    } else {
        x * x.ln() - x + 1.0
    }
}

/// Lower and upper bounds on a log tail probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffBounds {
    pub lower: f64,
    pub upper: f64,
}

impl ChernoffBounds {
    pub fn contains(&self, log_p: f64) -> bool {
        self.lower <= log_p && log_p <= self.upper
    }
}

/// Bounds on `log P(X >= x)` for `x >= lambda`:
/// `-lambda h(ceil(x)/lambda) - ln(ceil(x))/2 - 1 <= log P <= -lambda h(x/lambda)`.
pub fn chernoff_upper_tail(p: &PoissonParams, x: f64) -> Result<ChernoffBounds> {
    let lam = p.lambda();
    if !(x >= lam) || !x.is_finite() {
        return Err(Error::Domain { op: "chernoff_upper_tail", value: x, domain: "[lambda, inf)" });
    }
    let m = x.ceil();
    Ok(ChernoffBounds {
        lower: -lam * h_rate(m / lam) - 0.5 * m.ln() - 1.0,
        upper: -lam * h_rate(x / lam),
    })
}

/// Bounds on `log P(X <= x)` for `0 <= x <= lambda`:
/// `-lambda h(floor(x)/lambda) - ln(floor(x))/2 - 1 <= log P <= -lambda h(x/lambda)`.
///
/// At `floor(x) = 0` the log term is read as `ln 1 = 0`; `P(X <= 0) = e^-lambda`
/// then sits between `-lambda - 1` and `-lambda`.
pub fn chernoff_lower_tail(p: &PoissonParams, x: f64) -> Result<ChernoffBounds> {
    let lam = p.lambda();
    if !(0.0..=lam).contains(&x) {
        return Err(Error::Domain { op: "chernoff_lower_tail", value: x, domain: "[0, lambda]" });
    }
    let m = x.floor();
    Ok(ChernoffBounds {
        lower: -lam * h_rate(m / lam) - 0.5 * m.max(1.0).ln() - 1.0,
        upper: -lam * h_rate(x / lam),
    })
}

/// Normal lower bound `P(X >= x) >= 1 - Phi((x - lambda)/sqrt(lambda))` (Bohman).
pub fn bohman_lower_bound(p: &PoissonParams, x: u64) -> f64 {
    let lam = p.lambda();
    normal_sf((x as f64 - lam) / lam.sqrt())
}

/// Kolmogorov distance between the standardized Poisson law and the standard normal.
///
/// The standardized CDF is a step function, so the supremum is attained at
/// the left or right limit of a jump; every jump out to
/// `lambda + 50 sqrt(lambda) + 50` is scanned.
pub fn berry_esseen_gap(p: &PoissonParams) -> Result<f64> {
    let lam = p.lambda();
    if lam < 1.0 {
        return Err(Error::Domain { op: "berry_esseen_gap", value: lam, domain: "[1, inf)" });
    }
    let sd = lam.sqrt();
    let last = (lam + 50.0 * sd + 50.0).ceil() as u64;
    let mut cdf_left = 0.0_f64;
    let mut gap = 0.0_f64;
    for k in 0..=last {
        let cdf_right = (cdf_left + ln_pmf(lam, k).exp()).min(1.0);
        let phi = normal_cdf((k as f64 - lam) / sd);
        gap = gap.max((cdf_left - phi).abs()).max((cdf_right - phi).abs());
        cdf_left = cdf_right;
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: f64) -> PoissonParams {
        PoissonParams::new(l).unwrap()
    }

    #[test]
    fn rate_function_values() {
        assert_eq!(h_rate(1.0), 0.0);
        assert!((h_rate(std::f64::consts::E) - 1.0).abs() < 1e-15);
        assert_eq!(h_rate(0.0), 1.0);
        assert!(h_rate(1e-300) > 0.999);
        assert!(h_rate(-1.0).is_nan());
    }

    #[test]
    fn chernoff_worked_example() {
        let b = chernoff_upper_tail(&p(4.0), 4.0).unwrap();
        assert_eq!(b.upper, 0.0);
        let b = chernoff_upper_tail(&p(4.0), 8.0).unwrap();
        assert!((b.upper + 4.0 * (2.0 * 2.0_f64.ln() - 1.0)).abs() < 1e-14);
        let exact = p(4.0).survival_upper(8).ln();
        assert!(b.contains(exact), "{b:?} vs {exact}");
    }

    #[test]
    fn chernoff_domains() {
        assert!(chernoff_upper_tail(&p(4.0), 3.9).is_err());
        assert!(chernoff_lower_tail(&p(4.0), 4.1).is_err());
        assert!(chernoff_lower_tail(&p(4.0), -0.1).is_err());
        let b = chernoff_lower_tail(&p(4.0), 0.0).unwrap();
        assert!(b.contains(-4.0));
    }

    #[test]
    fn bohman_examples() {
        assert_eq!(bohman_lower_bound(&p(9.0), 9), 0.5);
        assert!((bohman_lower_bound(&p(1.0), 0) - 0.841_344_746_068_542_9).abs() < 1e-12);
    }

    #[test]
    fn berry_esseen_needs_unit_mean() {
        assert!(berry_esseen_gap(&p(0.5)).is_err());
    }
}
