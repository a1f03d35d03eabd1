//! Threshold sets and null moments for the higher-criticism statistics.
//!
//! Each structure is built once per null (the means) and then evaluated
//! against many samples. All threshold comparisons use the same tail table
//! values that produced the null moments, so a count is on the same side of a
//! threshold in the statistic and in its centering.

use super::prepared::Group;
use super::{DetectorKind, DetectorResult, Diagnostics};
use crate::poisson::{CdfStep, LogProb, TailCut};

/// Safety stop for the integer threshold scans.
const MAX_THRESHOLD: u64 = 1 << 20;

fn sup_result(kind: DetectorKind, values: impl Iterator<Item = (f64, f64)>) -> DetectorResult {
    let mut best = f64::NEG_INFINITY;
    let mut argmax = None;
    let mut count = 0;
    for (at, v) in values {
        count += 1;
        if v > best {
            best = v;
            argmax = Some(at);
        }
    }
    if count == 0 {
        return DetectorResult::sentinel(kind);
    }
    DetectorResult {
        kind,
        statistic: best,
        diagnostics: Some(Diagnostics { argmax, thresholds: count, empty_threshold_set: false }),
    }
}

/// `K(1 - K)` from `ln K`.
fn bernoulli_var(k: LogProb) -> f64 {
    (k.ln() + k.complement().ln()).exp()
}

struct ZLevel {
    z: f64,
    cuts: Vec<TailCut>,
    mean: f64,
    sd: f64,
}

/// Thresholds `z` in `{0, 1, 2, ...}` with `sum K(z)(1 - K(z)) >= log n`.
pub(crate) struct HcZ {
    levels: Vec<ZLevel>,
}

impl HcZ {
    pub(crate) fn new(groups: &[Group], n: usize) -> Self {
        let log_n = (n as f64).ln();
        let mut levels = Vec::new();
        for zi in 0..MAX_THRESHOLD {
            let z = zi as f64;
            let mut mean = 0.0;
            let mut var = 0.0;
            let mut cuts = Vec::with_capacity(groups.len());
            for g in groups {
                let cut = TailCut::strict(g.table.lambda(), z);
                let k = g.table.cut_log_prob(&cut);
                mean += g.count as f64 * k.prob();
                var += g.count as f64 * bernoulli_var(k);
                cuts.push(cut);
            }
            // var <= mean, and mean only decreases from here on
            if mean < log_n {
                break;
            }
            if var >= log_n {
                levels.push(ZLevel { z, cuts, mean, sd: var.sqrt() });
            }
        }
        HcZ { levels }
    }

    pub(crate) fn thresholds(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.z).collect()
    }

    pub(crate) fn evaluate(&self, group_of: &[u32], counts: &[u64]) -> DetectorResult {
        let mut hits = vec![0_u64; self.levels.len()];
        for (&g, &x) in group_of.iter().zip(counts) {
            for (h, level) in hits.iter_mut().zip(&self.levels) {
                *h += level.cuts[g as usize].contains(x) as u64;
            }
        }
        sup_result(
            DetectorKind::HigherCriticismZ,
            self.levels.iter().zip(&hits).map(|(l, &h)| (l.z, (h as f64 - l.mean) / l.sd)),
        )
    }
}

/// Thresholds `x` in `{1, 2, ...}` with `sum G1(x)(1 - G1(x)) >= log n`,
/// where `G1(x) = P(X >= x)`. Exceedances are counted as `X_i >= x`, the
/// event whose probability is `G1(x)`.
pub(crate) struct HcOneSided {
    xs: Vec<u64>,
    mean: Vec<f64>,
    sd: Vec<f64>,
}

impl HcOneSided {
    pub(crate) fn new(groups: &[Group], n: usize) -> Self {
        let log_n = (n as f64).ln();
        let (mut xs, mut mean, mut sd) = (Vec::new(), Vec::new(), Vec::new());
        for x in 1..MAX_THRESHOLD {
            let mut m = 0.0;
            let mut v = 0.0;
            for g in groups {
                let gx = g.table.log_upper(x);
                m += g.count as f64 * gx.prob();
                v += g.count as f64 * bernoulli_var(gx);
            }
            if m < log_n {
                break;
            }
            if v >= log_n {
                xs.push(x);
                mean.push(m);
                sd.push(v.sqrt());
            }
        }
        HcOneSided { xs, mean, sd }
    }

    pub(crate) fn thresholds(&self) -> &[u64] {
        &self.xs
    }

    pub(crate) fn evaluate(&self, counts: &[u64]) -> DetectorResult {
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        sup_result(
            DetectorKind::OneSidedHc,
            self.xs.iter().enumerate().map(|(k, &x)| {
                let above = n - sorted.partition_point(|&c| c < x);
                (x as f64, (above as f64 - self.mean[k]) / self.sd[k])
            }),
        )
    }
}

/// Candidate P-value thresholds with the null mean and standard deviation of
/// `#{i : p_i <= t}` at each.
pub(crate) struct HcPval {
    kind: DetectorKind,
    log_t: Vec<f64>,
    mean: Vec<f64>,
    sd: Vec<f64>,
}

/// `F(t)` from a step list: the CDF at the last step at or below `log_t`.
fn cdf_at(steps: &[CdfStep], log_t: f64) -> f64 {
    match steps.partition_point(|s| s.log_t <= log_t) {
        0 => 0.0,
        k => steps[k - 1].cdf,
    }
}

impl HcPval {
    /// `steps[g]` is the null CDF of group `g`'s P-value at its attainable values.
    ///
    /// The admissible set `{t : 1/n <= F_i(t) <= 1/2 for every i}` is an
    /// interval `[t_low, t_high)` because every `F_i` is nondecreasing. The
    /// candidates are the attainable values in it; a sweep over the merged
    /// step events keeps `sum F` and `sum F (1 - F)` current.
    pub(crate) fn new(kind: DetectorKind, groups: &[Group], steps: &[Vec<CdfStep>], n: usize) -> Self {
        let empty = HcPval { kind, log_t: Vec::new(), mean: Vec::new(), sd: Vec::new() };
        let floor = 1.0 / n as f64;
        let mut t_low = f64::NEG_INFINITY;
        let mut t_high = f64::INFINITY;
        for s in steps {
            match s.iter().find(|st| st.cdf >= floor) {
                Some(st) => t_low = t_low.max(st.log_t),
                None => return empty,
            }
            if let Some(st) = s.iter().find(|st| st.cdf > 0.5) {
                t_high = t_high.min(st.log_t);
            }
        }
        // the set lives inside (0, 1)
        t_high = t_high.min(0.0);
        if !(t_low < t_high) {
            return empty;
        }

        let mut cur: Vec<f64> = steps.iter().map(|s| cdf_at(s, t_low)).collect();
        let mut s1 = 0.0;
        let mut v = 0.0;
        for (g, f) in groups.iter().zip(&cur) {
            s1 += g.count as f64 * f;
            v += g.count as f64 * f * (1.0 - f);
        }
        let mut events: Vec<(f64, u32, f64)> = steps
            .iter()
            .enumerate()
            .flat_map(|(g, s)| {
                s.iter().filter(|st| st.log_t > t_low && st.log_t < t_high).map(move |st| (st.log_t, g as u32, st.cdf))
            })
            .collect();
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut out = HcPval { kind, log_t: vec![t_low], mean: vec![s1], sd: vec![v.sqrt()] };
        let mut i = 0;
        while i < events.len() {
            let t = events[i].0;
            while i < events.len() && events[i].0 == t {
                let (_, g, f) = events[i];
                let c = groups[g as usize].count as f64;
                let old = cur[g as usize];
                s1 += c * (f - old);
                v += c * (f * (1.0 - f) - old * (1.0 - old));
                cur[g as usize] = f;
                i += 1;
            }
            out.log_t.push(t);
            out.mean.push(s1);
            out.sd.push(v.max(0.0).sqrt());
        }
        out
    }

    pub(crate) fn thresholds(&self) -> Vec<f64> {
        self.log_t.iter().map(|t| t.exp()).collect()
    }

    /// `log_p` are the sample's log P-values, computed from the same tables.
    pub(crate) fn evaluate(&self, mut log_p: Vec<f64>) -> DetectorResult {
        log_p.sort_by(f64::total_cmp);
        let mut below = 0;
        sup_result(
            self.kind,
            self.log_t.iter().enumerate().map(|(k, &t)| {
                while below < log_p.len() && log_p[below] <= t {
                    below += 1;
                }
                (t.exp(), (below as f64 - self.mean[k]) / self.sd[k])
            }),
        )
    }
}
