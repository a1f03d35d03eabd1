//! Detection boundaries in the (beta, signal) plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Regime, Sidedness};

fn domain(op: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain { op, value, domain }
}

/// `beta/2 - 1/4` on `(0, 1/2)`.
pub fn rho_dense(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(domain("rho_dense", beta, "(0, 1/2)"));
    }
    Ok(beta / 2.0 - 0.25)
}

/// `beta - 1/2` on `(1/2, 3/4]`, `(1 - sqrt(1 - beta))^2` on `(3/4, 1)`.
pub fn rho_sparse(beta: f64) -> Result<f64> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(domain("rho_sparse", beta, "(1/2, 1)"));
    }
    Ok(if beta <= 0.75 { beta - 0.5 } else { (1.0 - (1.0 - beta).sqrt()).powi(2) })
}

/// Critical `gamma` when the means are small: `gamma = beta`.
pub fn rho_small_means(beta: f64) -> Result<f64> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(domain("rho_small_means", beta, "(1/2, 1)"));
    }
    Ok(beta)
}

/// `beta - 1/2` on `(0, 1/2)`.
pub fn rho_dense_one_sided(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(domain("rho_dense_one_sided", beta, "(0, 1/2)"));
    }
    Ok(beta - 0.5)
}

/// Boundary reached by the max test, `(1 - sqrt(1 - beta))^2` on `(1/2, 1)`.
pub fn max_test_boundary(beta: f64) -> Result<f64> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(domain("max_test_boundary", beta, "(1/2, 1)"));
    }
    Ok((1.0 - (1.0 - beta).sqrt()).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeLabel {
    Dense,
    ModeratelySparse,
    VerySparse,
}

impl RegimeLabel {
    pub fn of(beta: f64) -> Self {
        if beta < 0.5 {
            RegimeLabel::Dense
        } else if beta <= 0.75 {
            RegimeLabel::ModeratelySparse
        } else {
            RegimeLabel::VerySparse
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeansScale {
    /// Means much larger than `log n`.
    Large,
    /// Means much smaller than `log n`.
    Small,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub beta: f64,
    /// Critical `s`, `r` or `gamma`, depending on the regime.
    pub threshold: f64,
    pub regime_label: RegimeLabel,
    pub sidedness: Sidedness,
    pub means_scale: MeansScale,
}

/// Detection boundary at `beta`.
///
/// At `beta = 1/2` the dense and sparse curves meet at 0. Small means have a
/// boundary only in the sparse range.
pub fn boundary_point(beta: f64, sidedness: Sidedness, means_scale: MeansScale) -> Result<BoundaryPoint> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain("boundary_point", beta, "(0, 1)"));
    }
    let threshold = match (means_scale, sidedness) {
        (MeansScale::Small, _) if beta <= 0.5 => {
            return Err(domain("boundary_point (small means)", beta, "(1/2, 1)"));
        }
        (MeansScale::Small, _) => rho_small_means(beta)?,
        (MeansScale::Large, _) if beta == 0.5 => 0.0,
        (MeansScale::Large, Sidedness::TwoSided) if beta < 0.5 => rho_dense(beta)?,
        (MeansScale::Large, Sidedness::OneSided) if beta < 0.5 => rho_dense_one_sided(beta)?,
        (MeansScale::Large, _) => rho_sparse(beta)?,
    };
    Ok(BoundaryPoint { beta, threshold, regime_label: RegimeLabel::of(beta), sidedness, means_scale })
}

/// Position of a grid cell relative to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryFlag {
    Above,
    Below,
    On,
    /// No boundary is known for this cell.
    Na,
}

impl BoundaryFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryFlag::Above => "above",
            BoundaryFlag::Below => "below",
            BoundaryFlag::On => "on",
            BoundaryFlag::Na => "na",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "above" => BoundaryFlag::Above,
            "below" => BoundaryFlag::Below,
            "on" => BoundaryFlag::On,
            "na" => BoundaryFlag::Na,
            _ => return None,
        })
    }
}

/// Boundary value and position for one `(beta, regime)` grid cell.
///
/// The regime fixes which parameter is compared: `s` for dense, `r` for
/// sparse, `gamma` for small means. Explicit shifts have no boundary.
pub fn annotate(beta: f64, regime: &Regime) -> (Option<f64>, BoundaryFlag) {
    let (sidedness, scale, value) = match *regime {
        Regime::DenseTwoSided { s } => (Sidedness::TwoSided, MeansScale::Large, s),
        Regime::OneSidedDense { s } => (Sidedness::OneSided, MeansScale::Large, s),
        Regime::SparseTwoSided { r } => (Sidedness::TwoSided, MeansScale::Large, r),
        Regime::OneSidedSparse { r } => (Sidedness::OneSided, MeansScale::Large, r),
        Regime::SmallMeans { gamma } => (Sidedness::TwoSided, MeansScale::Small, gamma),
        Regime::Explicit { .. } => return (None, BoundaryFlag::Na),
    };
    let dense_param = matches!(regime, Regime::DenseTwoSided { .. } | Regime::OneSidedDense { .. });
    // a dense parameter is only compared against the dense curve and vice versa
    if dense_param != (beta <= 0.5) && scale == MeansScale::Large {
        return (None, BoundaryFlag::Na);
    }
    match boundary_point(beta, sidedness, scale) {
        Ok(p) => {
            let flag = if value > p.threshold {
                BoundaryFlag::Above
            } else if value < p.threshold {
                BoundaryFlag::Below
            } else {
                BoundaryFlag::On
            };
            (Some(p.threshold), flag)
        }
        Err(_) => (None, BoundaryFlag::Na),
    }
}
