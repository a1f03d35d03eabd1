//! Sparse Poisson mixture scenarios.
//!
//! A [`ScenarioConfig`] is the declarative, serializable description of a
//! scenario; [`ModelSpec`] is the same scenario with every per-coordinate
//! quantity materialized. A spec serializes back to its config, so JSON
//! documents stay small even for large `n`.

mod rng;

pub use rng::{poisson, RngStream, StreamPurpose, INVERSION_CUTOFF};

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::poisson::ln_pmf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    TwoSided,
    OneSided,
}

/// How the signal strength `Delta_i` (or the alternative mean) is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Regime {
    /// `Delta_i = n^s sqrt(lambda_i)`.
    DenseTwoSided { s: f64 },
    /// `Delta_i = sqrt(2 r log n) sqrt(lambda_i)`.
    SparseTwoSided { r: f64 },
    /// `lambda_i' = lambda_i^(1-gamma) (log n)^gamma`, `lambda_i'' = 0`.
    SmallMeans { gamma: f64 },
    OneSidedDense { s: f64 },
    OneSidedSparse { r: f64 },
    Explicit { delta: Vec<f64> },
}

impl Regime {
    fn check(&self, n: usize, sidedness: Sidedness) -> Result<()> {
        match *self {
            Regime::DenseTwoSided { s } | Regime::OneSidedDense { s } if !s.is_finite() => {
                Err(Error::invalid(format!("s = {s} must be finite")))
            }
            Regime::SparseTwoSided { r } | Regime::OneSidedSparse { r } if !(r > 0.0 && r < 1.0) => {
                Err(Error::invalid(format!("r = {r} must lie in (0, 1)")))
            }
            Regime::SmallMeans { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::invalid(format!("gamma = {gamma} must be positive")))
            }
            Regime::Explicit { ref delta } if delta.len() != n => {
                Err(Error::invalid(format!("{} shifts given for n = {n}", delta.len())))
            }
            Regime::DenseTwoSided { .. } | Regime::SparseTwoSided { .. }
                if sidedness == Sidedness::OneSided =>
            {
                Err(Error::invalid("two-sided regime paired with one-sided sidedness"))
            }
            Regime::OneSidedDense { .. } | Regime::OneSidedSparse { .. }
                if sidedness == Sidedness::TwoSided =>
            {
                Err(Error::invalid("one-sided regime paired with two-sided sidedness"))
            }
            _ => Ok(()),
        }
    }

    /// Natural sidedness of the regime, if it has one.
    pub fn implied_sidedness(&self) -> Option<Sidedness> {
        match self {
            Regime::DenseTwoSided { .. } | Regime::SparseTwoSided { .. } => Some(Sidedness::TwoSided),
            Regime::OneSidedDense { .. } | Regime::OneSidedSparse { .. } => Some(Sidedness::OneSided),
            _ => None,
        }
    }
}

/// Source of the null means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Means {
    Constant { lambda0: f64 },
    /// `lambda_i = lambda0 + Exp(mean lambda0)`, drawn from its own stream.
    ShiftedExponential { lambda0: f64, seed: u64 },
    Explicit { lambdas: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sparsity {
    /// `epsilon = n^-beta`, `beta` in (0, 1).
    Beta(f64),
    Epsilon(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub means: Means,
    pub sparsity: Sparsity,
    pub regime: Regime,
    pub sidedness: Sidedness,
    /// Reject any null mean below 1.
    #[serde(default)]
    pub require_unit_means: bool,
}

/// Which mixture component produced a count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Null,
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Null,
    Alternative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub counts: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Component>>,
}

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ScenarioConfig", try_from = "ScenarioConfig")]
pub struct ModelSpec {
    config: ScenarioConfig,
    lambdas: Vec<f64>,
    epsilon: f64,
    delta: Vec<f64>,
    lambda_up: Vec<f64>,
    lambda_down: Vec<f64>,
}

impl From<ModelSpec> for ScenarioConfig {
    fn from(spec: ModelSpec) -> Self {
        spec.config
    }
}

impl TryFrom<ScenarioConfig> for ModelSpec {
    type Error = Error;
    fn try_from(config: ScenarioConfig) -> Result<Self> {
        ModelSpec::build(config)
    }
}

fn generate_means(n: usize, means: &Means) -> Result<Vec<f64>> {
    let lambdas = match *means {
        Means::Constant { lambda0 } => vec![lambda0; n],
        Means::ShiftedExponential { lambda0, seed } => {
            if !(lambda0 > 0.0 && lambda0.is_finite()) {
                return Err(Error::invalid(format!("lambda0 = {lambda0} must be positive")));
            }
            let exp = Exp::new(1.0 / lambda0).map_err(|e| Error::invalid(e.to_string()))?;
            let mut rng = RngStream::derived(seed, StreamPurpose::Lambdas, 0, 0).rng();
            (0..n).map(|_| lambda0 + exp.sample(&mut rng)).collect()
        }
        Means::Explicit { ref lambdas } => {
            if lambdas.len() != n {
                return Err(Error::LengthMismatch { lambdas: lambdas.len(), counts: n });
            }
            lambdas.clone()
        }
    };
    Ok(lambdas)
}

impl ModelSpec {
    pub fn build(config: ScenarioConfig) -> Result<Self> {
        let n = config.n;
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        let lambdas = generate_means(n, &config.means)?;
        if let Some((i, &l)) = lambdas.iter().enumerate().find(|(_, l)| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::invalid(format!("lambda[{i}] = {l} must be positive and finite")));
        }
        if config.require_unit_means {
            if let Some((i, &l)) = lambdas.iter().enumerate().find(|(_, l)| **l < 1.0) {
                return Err(Error::invalid(format!("lambda[{i}] = {l} is below 1")));
            }
        }
        config.regime.check(n, config.sidedness)?;

        let log_n = (n as f64).ln();
        let epsilon = match config.sparsity {
            Sparsity::Beta(beta) => {
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(Error::invalid(format!("beta = {beta} must lie in (0, 1)")));
                }
                (-beta * log_n).exp()
            }
            Sparsity::Epsilon(eps) => {
                if !(0.0..=1.0).contains(&eps) {
                    return Err(Error::invalid(format!("epsilon = {eps} must lie in [0, 1]")));
                }
                eps
            }
        };

        let (delta, lambda_up): (Vec<f64>, Vec<f64>) = match config.regime {
            Regime::DenseTwoSided { s } | Regime::OneSidedDense { s } => {
                let scale = (n as f64).powf(s);
                let d: Vec<f64> = lambdas.iter().map(|l| scale * l.sqrt()).collect();
                let up = lambdas.iter().zip(&d).map(|(l, d)| l + d).collect();
                (d, up)
            }
            Regime::SparseTwoSided { r } | Regime::OneSidedSparse { r } => {
                let scale = (2.0 * r * log_n).sqrt();
                let d: Vec<f64> = lambdas.iter().map(|l| scale * l.sqrt()).collect();
                let up = lambdas.iter().zip(&d).map(|(l, d)| l + d).collect();
                (d, up)
            }
            Regime::SmallMeans { gamma } => {
                let up: Vec<f64> =
                    lambdas.iter().map(|l| l.powf(1.0 - gamma) * log_n.powf(gamma)).collect();
                let d = up.iter().zip(&lambdas).map(|(u, l)| u - l).collect();
                (d, up)
            }
            Regime::Explicit { ref delta } => {
                let up = lambdas.iter().zip(delta).map(|(l, d)| l + d).collect();
                (delta.clone(), up)
            }
        };
        if let Some((i, &d)) = delta.iter().enumerate().find(|(_, d)| !(**d >= 0.0 && d.is_finite())) {
            return Err(Error::invalid(format!("shift Delta[{i}] = {d} is negative or not finite")));
        }
        let lambda_down = match config.regime {
            Regime::SmallMeans { .. } => vec![0.0; n],
            _ => lambdas.iter().zip(&delta).map(|(l, d)| (l - d).max(0.0)).collect(),
        };

        Ok(ModelSpec { config, lambdas, epsilon, delta, lambda_up, lambda_down })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Sparsity exponent, `-log(epsilon) / log(n)` when epsilon was given directly.
    pub fn beta(&self) -> f64 {
        match self.config.sparsity {
            Sparsity::Beta(b) => b,
            Sparsity::Epsilon(e) => -e.ln() / (self.n() as f64).ln(),
        }
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn lambda_up(&self) -> &[f64] {
        &self.lambda_up
    }

    pub fn lambda_down(&self) -> &[f64] {
        &self.lambda_down
    }

    pub fn sidedness(&self) -> Sidedness {
        self.config.sidedness
    }

    pub fn regime(&self) -> &Regime {
        &self.config.regime
    }

    /// Hash of the null law only; see [`null_fingerprint`].
    pub fn null_fingerprint(&self) -> String {
        null_fingerprint(&self.lambdas)
    }

    /// Hash of the whole scenario, alternative included.
    pub fn full_fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.null_fingerprint().as_bytes());
        h.update(self.epsilon.to_bits().to_le_bytes());
        h.update([self.sidedness() as u8]);
        for v in self.lambda_up.iter().chain(&self.lambda_down) {
            h.update(v.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn sample(&self, stream: RngStream, under: Hypothesis) -> Sample {
        let mut rng = stream.rng();
        self.sample_with(&mut rng, under)
    }

    /// Draws one sample from a caller-supplied generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, under: Hypothesis) -> Sample {
        let n = self.n();
        let mut counts = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let eps = self.epsilon;
        let one_sided = self.sidedness() == Sidedness::OneSided;
        for i in 0..n {
            let comp = match under {
                Hypothesis::Null => Component::Null,
                Hypothesis::Alternative => {
                    let u: f64 = rng.random();
                    if u >= eps {
                        Component::Null
                    } else if one_sided || u < 0.5 * eps {
                        Component::Up
                    } else {
                        Component::Down
                    }
                }
            };
            let mean = match comp {
                Component::Null => self.lambdas[i],
                Component::Up => self.lambda_up[i],
                Component::Down => self.lambda_down[i],
            };
            counts.push(poisson(rng, mean));
            labels.push(comp);
        }
        Sample { counts, labels: Some(labels) }
    }

    /// `sum_i log L_i`, the log likelihood ratio of the mixture against the null.
    pub fn oracle_lrt(&self, counts: &[u64]) -> Result<f64> {
        if counts.len() != self.n() {
            return Err(Error::LengthMismatch { lambdas: self.n(), counts: counts.len() });
        }
        let eps = self.epsilon;
        if eps == 0.0 {
            return Ok(0.0);
        }
        let ln_null_w = (-eps).ln_1p();
        let (ln_alt_w, two_sided) = match self.sidedness() {
            Sidedness::TwoSided => ((0.5 * eps).ln(), true),
            Sidedness::OneSided => (eps.ln(), false),
        };
        let mut total = 0.0;
        for (i, &x) in counts.iter().enumerate() {
            let base = ln_pmf(self.lambdas[i], x);
            let mut terms = [ln_null_w, ln_alt_w + ln_pmf_or_point(self.lambda_up[i], x) - base, f64::NEG_INFINITY];
            if two_sided {
                terms[2] = ln_alt_w + ln_pmf_or_point(self.lambda_down[i], x) - base;
            }
            let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY || base == f64::NEG_INFINITY {
                return Err(Error::ImpossibleCount { index: i, count: x });
            }
            total += m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
        }
        Ok(total)
    }
}

/// Hash of a null law: `n` and the bit patterns of the means.
pub fn null_fingerprint(lambdas: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update((lambdas.len() as u64).to_le_bytes());
    for l in lambdas {
        h.update(l.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Log pmf that also accepts the degenerate mean 0.
fn ln_pmf_or_point(lambda: f64, x: u64) -> f64 {
    if lambda == 0.0 {
        if x == 0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        ln_pmf(lambda, x)
    }
}
