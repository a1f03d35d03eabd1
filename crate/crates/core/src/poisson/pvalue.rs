//! Two-sided tails, P-values and the null law of the P-values.

use super::{LogProb, PoissonParams};

/// Integer cut points of the strict two-sided event `|X - lambda| > z sqrt(lambda)`.
///
/// The event is `X >= upper` or `X <= lower` (no lower part when `lower` is
/// `None`). Detectors count sample exceedances with the same cut points, so a
/// count sits on the same side of a threshold in the statistic and in its
/// null expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailCut {
    pub upper: u64,
    pub lower: Option<u64>,
}

impl TailCut {
    pub fn strict(lambda: f64, z: f64) -> TailCut {
        let half_width = z * lambda.sqrt();
        let hi = lambda + half_width;
        let lo = lambda - half_width;
        // X > hi  <=>  X >= floor(hi) + 1
        let upper = if hi >= 9.0e18 { u64::MAX } else { hi.floor() as u64 + 1 };
        // X < lo  <=>  X <= ceil(lo) - 1, empty unless lo > 0
        let lower = if lo > 0.0 { Some(lo.ceil() as u64 - 1) } else { None };
        TailCut { upper, lower }
    }

    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        x >= self.upper || self.lower.is_some_and(|l| x <= l)
    }

    pub fn log_prob(&self, p: &PoissonParams) -> LogProb {
        let up = if self.upper == u64::MAX { LogProb::ZERO } else { p.survival_upper(self.upper) };
        match self.lower {
            Some(l) => up.ln_add(p.survival_lower(l)),
            None => up,
        }
    }
}

/// `K_lambda(z) = P(|X - lambda| / sqrt(lambda) > z)`.
pub fn two_sided_tail(p: &PoissonParams, z: f64) -> LogProb {
    assert!(z >= 0.0, "two_sided_tail needs z >= 0, got {z}");
    TailCut::strict(p.lambda(), z).log_prob(p)
}

/// Largest integer `<= 2 lambda - x`, or `None` when negative. Exact for
/// `lambda < 2^51`: `2 lambda` is a double and the subtraction of an integer
/// from it is representable.
pub(crate) fn mirror_floor(lambda: f64, x: u64) -> Option<u64> {
    let m = 2.0 * lambda - x as f64;
    (m >= 0.0).then(|| m.floor() as u64)
}

/// Smallest integer `>= 2 lambda - x` (the mirror lies above the mean).
pub(crate) fn mirror_ceil(lambda: f64, x: u64) -> u64 {
    (2.0 * lambda - x as f64).ceil() as u64
}

/// Two-sided P-value `P(|X - lambda| >= |x - lambda|)`.
pub fn two_sided_pvalue(p: &PoissonParams, x: u64) -> LogProb {
    let lam = p.lambda();
    let xf = x as f64;
    if xf == lam {
        return LogProb::ONE;
    }
    if xf > lam {
        let up = p.survival_upper(x);
        match mirror_floor(lam, x) {
            Some(m) => up.ln_add(p.survival_lower(m)),
            None => up,
        }
    } else {
        p.survival_lower(x).ln_add(p.survival_upper(mirror_ceil(lam, x)))
    }
}

/// One-sided P-value `P(X >= x)`.
pub fn one_sided_pvalue(p: &PoissonParams, x: u64) -> LogProb {
    p.survival_upper(x)
}

/// `P(G(X) <= t)` for the two-sided P-value `G`, with `t` given as a log-probability.
///
/// `G` is nonincreasing in `|x - lambda|` on each side of the mean, so the
/// event is a union of an upper tail `{x >= a}` and a lower tail `{x <= b}`;
/// both cut points are located by bisection and the tails are summed exactly.
pub fn pvalue_null_cdf_log(p: &PoissonParams, log_t: LogProb) -> LogProb {
    if log_t.ln() >= 0.0 {
        return LogProb::ONE;
    }
    if log_t.is_zero() {
        return LogProb::ZERO;
    }
    let lam = p.lambda();
    let below = |x: u64| two_sided_pvalue(p, x) <= log_t;
    // right side: x >= ceil(lambda)
    let right_start = lam.ceil() as u64;
    let a = first_true_from(right_start, below);
    let mut total = p.survival_upper(a);
    // left side: 0 <= x < lambda, predicate true on a prefix
    if right_start > 0 {
        let hi = right_start - 1;
        if below(0) {
            let (mut good, mut bad) = (0_u64, hi + 1);
            if below(hi) {
                good = hi;
                bad = hi + 1;
            }
            while bad - good > 1 {
                let mid = good + (bad - good) / 2;
                if below(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            total = total.ln_add(p.survival_lower(good));
        }
    }
    total
}

/// `P(G(X) <= t)` for the two-sided P-value.
pub fn pvalue_null_cdf(p: &PoissonParams, t: f64) -> f64 {
    assert!((0.0..=1.0).contains(&t), "pvalue_null_cdf needs t in [0, 1], got {t}");
    if t >= 1.0 {
        return 1.0;
    }
    pvalue_null_cdf_log(p, LogProb::clamped(t.ln())).prob()
}

/// `P(G1(X) <= t)` for the one-sided P-value `G1(x) = P(X >= x)`.
pub fn one_sided_null_cdf(p: &PoissonParams, log_t: LogProb) -> LogProb {
    if log_t.ln() >= 0.0 {
        return LogProb::ONE;
    }
    if log_t.is_zero() {
        return LogProb::ZERO;
    }
    let a = first_true_from(0, |x| p.survival_upper(x) <= log_t);
    p.survival_upper(a)
}

/// Smallest `x >= start` at which a monotone (false..., true...) predicate holds.
fn first_true_from(start: u64, pred: impl Fn(u64) -> bool) -> u64 {
    if pred(start) {
        return start;
    }
    let mut bad = start;
    let mut step = 1_u64;
    let mut good = loop {
        let probe = bad.saturating_add(step);
        if pred(probe) || probe == u64::MAX {
            break probe;
        }
        bad = probe;
        step = step.saturating_mul(2);
    };
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if pred(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}
