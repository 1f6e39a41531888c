//! The six center-surround contrast measures.
//!
//! Gaussian descriptors compare by the closed-form 1-D 2nd Wasserstein
//! distance, the plain L2 distance in (mu, sigma^2) space, or the signed
//! difference pair. Histogram descriptors compare by Kullback-Leibler
//! divergence, Hellinger distance or histogram intersection.

use crate::descriptors::{GaussianDescriptor, HistogramDescriptor};
use crate::{Error, Result};

/// Bin floor applied before the KLD log-ratio; keeps the divergence finite
/// on empty bins.
pub const KLD_EPSILON: f64 = 1e-6;

/// Contrast measure selector. `SGrd` produces two components, all others one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// 2nd Wasserstein distance between the two Gaussians.
    W2,
    /// Euclidean distance between (mu, sigma^2) points.
    L2,
    /// Signed gradient pair (delta mu, delta sigma^2).
    SGrd,
    /// Kullback-Leibler divergence D(center || surround).
    Kld,
    /// Hellinger distance.
    Hellinger,
    /// Histogram intersection (similarity in [0,1]).
    HistIntersect,
}

impl Measure {
    /// Number of scalar components this measure emits per cell pair.
    pub fn dim(self) -> usize {
        match self {
            Measure::SGrd => 2,
            _ => 1,
        }
    }

    /// Whether this measure operates on Gaussian descriptors (otherwise
    /// histogram descriptors).
    pub fn is_gaussian(self) -> bool {
        matches!(self, Measure::W2 | Measure::L2 | Measure::SGrd)
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::W2 => "w2",
            Measure::L2 => "l2",
            Measure::SGrd => "sgrd",
            Measure::Kld => "kld",
            Measure::Hellinger => "hellinger",
            Measure::HistIntersect => "hi",
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "w2" => Ok(Measure::W2),
            "l2" => Ok(Measure::L2),
            "sgrd" => Ok(Measure::SGrd),
            "kld" => Ok(Measure::Kld),
            "hellinger" => Ok(Measure::Hellinger),
            "hi" | "histintersect" => Ok(Measure::HistIntersect),
            other => Err(Error::config(format!("unknown contrast measure '{other}'"))),
        }
    }
}

/// One or two scalar contrast components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastVector {
    vals: [f64; 2],
    dim: usize,
}

impl ContrastVector {
    pub fn scalar(v: f64) -> Self {
        ContrastVector { vals: [v, 0.0], dim: 1 }
    }

    pub fn pair(a: f64, b: f64) -> Self {
        ContrastVector { vals: [a, b], dim: 2 }
    }

    #[inline]
    pub fn components(&self) -> &[f64] {
        &self.vals[..self.dim]
    }
}

/// Contrast between two Gaussian cell descriptors.
pub fn gaussian_contrast(
    center: GaussianDescriptor,
    surround: GaussianDescriptor,
    measure: Measure,
) -> ContrastVector {
    let dmu = center.mu - surround.mu;
    let dsig = center.sigma2 - surround.sigma2;
    match measure {
        Measure::W2 => {
            let radicand =
                dmu * dmu + center.sigma2 + surround.sigma2 - 2.0 * (center.sigma2 * surround.sigma2).sqrt();
            ContrastVector::scalar(radicand.max(0.0).sqrt())
        }
        Measure::L2 => ContrastVector::scalar((dmu * dmu + dsig * dsig).sqrt()),
        Measure::SGrd => ContrastVector::pair(dmu, dsig),
        _ => panic!("{} is not a Gaussian contrast measure", measure.name()),
    }
}

/// Contrast between two histogram cell descriptors.
pub fn histogram_contrast(
    center: &HistogramDescriptor,
    surround: &HistogramDescriptor,
    measure: Measure,
) -> Result<ContrastVector> {
    if center.len() != surround.len() {
        return Err(Error::shape(format!(
            "histogram bin counts differ: {} vs {}",
            center.len(),
            surround.len()
        )));
    }
    let v = match measure {
        Measure::Kld => {
            let hc = floored(&center.bins);
            let hs = floored(&surround.bins);
            hc.iter().zip(&hs).map(|(&c, &s)| c * (c / s).ln()).sum::<f64>()
        }
        Measure::Hellinger => {
            let s: f64 = center
                .bins
                .iter()
                .zip(&surround.bins)
                .map(|(&c, &s)| {
                    let d = c.sqrt() - s.sqrt();
                    d * d
                })
                .sum();
            s.sqrt() / std::f64::consts::SQRT_2
        }
        Measure::HistIntersect => {
            center.bins.iter().zip(&surround.bins).map(|(&c, &s)| c.min(s)).sum()
        }
        _ => panic!("{} is not a histogram contrast measure", measure.name()),
    };
    Ok(ContrastVector::scalar(v))
}

/// Floor bins at epsilon and renormalize so the log-ratio stays defined.
fn floored(bins: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = bins.iter().map(|&v| v.max(KLD_EPSILON)).collect();
    let total: f64 = out.iter().sum();
    for v in &mut out {
        *v /= total;
    }
    out
}
