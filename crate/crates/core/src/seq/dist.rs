use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Distribution over non-negative priority tips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TipDistribution {
    Exponential {
        mean: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    /// Piecewise-uniform density over `edges` with relative bin `weights`.
    Histogram {
        edges: Vec<f64>,
        weights: Vec<f64>,
    },
    /// A tip known exactly. Accepted for attacker and victim tips, not for
    /// background flow.
    Point {
        value: f64,
    },
}

impl Default for TipDistribution {
    fn default() -> Self {
        TipDistribution::Exponential { mean: 1.0 }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidInput(msg)
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

impl TipDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            TipDistribution::Exponential { mean } => {
                if !(mean.is_finite() && *mean > 0.0) {
                    return Err(invalid(format!("exponential mean must be positive, got {mean}")));
                }
            }
            TipDistribution::LogNormal { mu, sigma } => {
                if !(mu.is_finite() && sigma.is_finite() && *sigma > 0.0) {
                    return Err(invalid(format!(
                        "lognormal needs finite mu and positive sigma, got ({mu}, {sigma})"
                    )));
                }
            }
            TipDistribution::Histogram { edges, weights } => {
                if edges.len() < 2 || weights.len() + 1 != edges.len() {
                    return Err(invalid(format!(
                        "histogram needs n+1 edges for n weights, got {} edges and {} weights",
                        edges.len(),
                        weights.len()
                    )));
                }
                if edges[0] < 0.0 || edges.iter().any(|e| !e.is_finite()) {
                    return Err(invalid("histogram edges must be finite and non-negative".into()));
                }
                if edges.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("histogram edges must be strictly increasing".into()));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(invalid("histogram weights must be finite and non-negative".into()));
                }
                if weights.iter().sum::<f64>() <= 0.0 {
                    return Err(invalid("histogram weights must not all be zero".into()));
                }
            }
            TipDistribution::Point { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(invalid(format!("point tip must be non-negative, got {value}")));
                }
            }
        }
        Ok(())
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, TipDistribution::Point { .. })
    }

    /// `Pr[T ≤ x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match self {
            TipDistribution::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            TipDistribution::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - mu) / sigma)
                }
            }
            TipDistribution::Histogram { edges, weights } => {
                let total: f64 = weights.iter().sum();
                let mut acc = 0.0;
                for (i, w) in weights.iter().enumerate() {
                    let (lo, hi) = (edges[i], edges[i + 1]);
                    if x >= hi {
                        acc += w;
                    } else {
                        if x > lo {
                            acc += w * (x - lo) / (hi - lo);
                        }
                        break;
                    }
                }
                (acc / total).min(1.0)
            }
            TipDistribution::Point { value } => {
                if x >= *value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `Pr[lo < T < hi]`; zero when `hi ≤ lo`.
    pub fn prob_between(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match self {
            TipDistribution::Point { value } => {
                if lo < *value && *value < hi {
                    1.0
                } else {
                    0.0
                }
            }
            _ => (self.cdf(hi) - self.cdf(lo)).clamp(0.0, 1.0),
        }
    }

    pub fn sampler(&self) -> Result<TipSampler> {
        self.validate()?;
        Ok(match self {
            TipDistribution::Exponential { mean } => {
                TipSampler::Exponential(Exp::new(1.0 / mean).map_err(|e| invalid(e.to_string()))?)
            }
            TipDistribution::LogNormal { mu, sigma } => TipSampler::LogNormal(
                LogNormal::new(*mu, *sigma).map_err(|e| invalid(e.to_string()))?,
            ),
            TipDistribution::Histogram { edges, weights } => TipSampler::Histogram {
                edges: edges.clone(),
                bins: WeightedIndex::new(weights).map_err(|e| invalid(e.to_string()))?,
            },
            TipDistribution::Point { value } => TipSampler::Point(*value),
        })
    }
}

/// Pre-built sampler for a [`TipDistribution`].
#[derive(Debug, Clone)]
pub enum TipSampler {
    Exponential(Exp<f64>),
    LogNormal(LogNormal<f64>),
    Histogram {
        edges: Vec<f64>,
        bins: WeightedIndex<f64>,
    },
    Point(f64),
}

impl TipSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            TipSampler::Exponential(d) => d.sample(rng),
            TipSampler::LogNormal(d) => d.sample(rng),
            TipSampler::Histogram { edges, bins } => {
                let i = bins.sample(rng);
                rng.random_range(edges[i]..edges[i + 1])
            }
            TipSampler::Point(v) => *v,
        }
    }
}

/// Number of background transactions sharing the attacker's batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BatchSizeModel {
    /// Poisson with the given mean, or `λ·T_s` when absent.
    Poisson {
        #[serde(default)]
        mean: Option<f64>,
    },
    Fixed {
        k: u32,
    },
    /// `pmf[k] = Pr[K = k]`.
    Empirical {
        pmf: Vec<f64>,
    },
}

impl Default for BatchSizeModel {
    fn default() -> Self {
        BatchSizeModel::Poisson { mean: None }
    }
}

/// Tail mass left out of truncated sums over K.
pub const TRUNCATION_TOLERANCE: f64 = 1e-10;

impl BatchSizeModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            BatchSizeModel::Poisson { mean: Some(m) } if !(m.is_finite() && *m >= 0.0) => {
                Err(invalid(format!("Poisson mean must be non-negative, got {m}")))
            }
            BatchSizeModel::Empirical { pmf } => {
                if pmf.is_empty() || pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(invalid("batch-size pmf must be non-empty and non-negative".into()));
                }
                let total: f64 = pmf.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(invalid(format!("batch-size pmf sums to {total}, expected 1")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `E[(1-q)^K]`. Poisson uses the closed form `exp(-mean·q)`.
    pub fn no_interference(&self, q: f64, default_mean: f64) -> f64 {
        let keep = (1.0 - q).clamp(0.0, 1.0);
        match self {
            BatchSizeModel::Poisson { mean } => (-mean.unwrap_or(default_mean) * q).exp(),
            BatchSizeModel::Fixed { k } => keep.powi(*k as i32),
            BatchSizeModel::Empirical { pmf } => pmf
                .iter()
                .enumerate()
                .map(|(k, p)| p * keep.powi(k as i32))
                .sum(),
        }
    }

    pub fn sampler(&self, default_mean: f64) -> Result<KSampler> {
        self.validate()?;
        Ok(match self {
            BatchSizeModel::Poisson { mean } => {
                let m = mean.unwrap_or(default_mean);
                if m > 0.0 {
                    KSampler::Poisson(Poisson::new(m).map_err(|e| invalid(e.to_string()))?)
                } else {
                    KSampler::Fixed(0)
                }
            }
            BatchSizeModel::Fixed { k } => KSampler::Fixed(*k),
            BatchSizeModel::Empirical { pmf } => {
                KSampler::Empirical(WeightedIndex::new(pmf).map_err(|e| invalid(e.to_string()))?)
            }
        })
    }
}

/// `Σ_k Pois(k; mean) (1-q)^k`, stopped once the remaining Poisson tail is
/// below [`TRUNCATION_TOLERANCE`].
pub fn poisson_truncated_sum(mean: f64, q: f64) -> f64 {
    let keep = (1.0 - q).clamp(0.0, 1.0);
    let mut term = (-mean).exp();
    let mut mass = term;
    let mut total = term;
    let mut k = 0u64;
    while 1.0 - mass > TRUNCATION_TOLERANCE && term.is_finite() {
        k += 1;
        term *= mean / k as f64;
        mass += term;
        total += term * keep.powi(k as i32);
        if k > 1_000_000 {
            break;
        }
    }
    total
}

#[derive(Debug, Clone)]
pub enum KSampler {
    Poisson(Poisson<f64>),
    Fixed(u32),
    Empirical(WeightedIndex<f64>),
}

impl KSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            KSampler::Poisson(d) => d.sample(rng) as usize,
            KSampler::Fixed(k) => *k as usize,
            KSampler::Empirical(d) => d.sample(rng),
        }
    }
}
