//! Channel model: gains, gain normalization, power accounting and the
//! two-receiver Gaussian MAC itself.
//!
//! The intended receiver observes `y = sum_k h[k] x[k] + w1` and the
//! eavesdropper observes `z = sum_k h_e[k] x[k] + w2`, with independent
//! Gaussian noises.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

/// Main-receiver and eavesdropper gains of a K-user MAC.
///
/// Gains may optionally carry exact rational values; those route the
/// unique-decomposability check to exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGains {
    h: Vec<f64>,
    h_e: Vec<f64>,
    exact: Option<(Vec<BigRational>, Vec<BigRational>)>,
}

impl ChannelGains {
    pub fn new(h: Vec<f64>, h_e: Vec<f64>) -> Result<Self> {
        if h.len() != h_e.len() {
            return Err(Error::Shape(format!(
                "{} main gains but {} eavesdropper gains",
                h.len(),
                h_e.len()
            )));
        }
        if h.len() < 2 {
            return Err(Error::Parameter(format!(
                "need at least 2 users, got {}",
                h.len()
            )));
        }
        for (k, (&a, &b)) in h.iter().zip(&h_e).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Domain {
                    index: k,
                    reason: "gain is not finite".into(),
                });
            }
            if b == 0.0 {
                return Err(Error::Domain {
                    index: k,
                    reason: "eavesdropper gain is zero".into(),
                });
            }
        }
        Ok(Self { h, h_e, exact: None })
    }

    /// Gains given as exact rationals. The floating-point views are the
    /// nearest binary64 values.
    pub fn from_rationals(h: Vec<BigRational>, h_e: Vec<BigRational>) -> Result<Self> {
        let to_f64 = |v: &[BigRational]| -> Vec<f64> {
            v.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect()
        };
        let mut gains = Self::new(to_f64(&h), to_f64(&h_e))?;
        if let Some(k) = h_e.iter().position(Zero::is_zero) {
            return Err(Error::Domain {
                index: k,
                reason: "eavesdropper gain is zero".into(),
            });
        }
        gains.exact = Some((h, h_e));
        Ok(gains)
    }

    pub fn k(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn h_e(&self) -> &[f64] {
        &self.h_e
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self) -> Option<(&[BigRational], &[BigRational])> {
        self.exact.as_ref().map(|(h, he)| (h.as_slice(), he.as_slice()))
    }
}

/// Gain ratios `h[k] / h_e[k]` rescaled so that the last one is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedGains {
    g: Vec<f64>,
    scale: f64,
    exact: Option<Vec<BigRational>>,
}

impl NormalizedGains {
    /// Normalizes an arbitrary ratio vector by its last entry.
    pub fn from_ratios(ratios: &[f64]) -> Result<Self> {
        let Some(&scale) = ratios.last() else {
            return Err(Error::Parameter("empty gain vector".into()));
        };
        for (k, r) in ratios.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::Domain {
                    index: k,
                    reason: "gain ratio is not finite".into(),
                });
            }
        }
        if scale == 0.0 {
            return Err(Error::Domain {
                index: ratios.len() - 1,
                reason: "last gain ratio is zero".into(),
            });
        }
        let mut g: Vec<f64> = ratios.iter().map(|r| r / scale).collect();
        *g.last_mut().unwrap() = 1.0;
        Ok(Self {
            g,
            scale,
            exact: None,
        })
    }

    /// Exact counterpart of [`NormalizedGains::from_ratios`].
    pub fn from_exact_ratios(ratios: &[BigRational]) -> Result<Self> {
        let Some(last) = ratios.last() else {
            return Err(Error::Parameter("empty gain vector".into()));
        };
        if last.is_zero() {
            return Err(Error::Domain {
                index: ratios.len() - 1,
                reason: "last gain ratio is zero".into(),
            });
        }
        let exact: Vec<BigRational> = ratios.iter().map(|r| r / last).collect();
        let g = exact
            .iter()
            .map(|r| r.to_f64().unwrap_or(f64::NAN))
            .collect();
        Ok(Self {
            g,
            scale: last.to_f64().unwrap_or(f64::NAN),
            exact: Some(exact),
        })
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn k(&self) -> usize {
        self.g.len()
    }

    /// The ratio `h[K] / h_e[K]` that was divided out.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exact(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }
}

/// Per-user power budget together with the derived effective power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerParams {
    pub p: f64,
    pub p_tilde: f64,
    pub epsilon: f64,
}

impl PowerParams {
    pub fn new(gains: &ChannelGains, p: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        let p_tilde = effective_power(gains, p)?;
        Ok(Self {
            p,
            p_tilde,
            epsilon,
        })
    }
}

/// Additive Gaussian noise statistics, shared by both receivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    variance: f64,
}

impl NoiseModel {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::Parameter(format!(
                "noise variance must be finite and >= 0, got {variance}"
            )));
        }
        Ok(Self { variance })
    }

    pub fn noiseless() -> Self {
        Self { variance: 0.0 }
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { variance: 1.0 }
    }
}

/// Divides out the eavesdropper gains and rescales so the last ratio is 1.
pub fn normalize_gains(gains: &ChannelGains) -> Result<NormalizedGains> {
    if let Some((h, h_e)) = gains.exact() {
        let ratios: Vec<BigRational> = h.iter().zip(h_e).map(|(a, b)| a / b).collect();
        return NormalizedGains::from_exact_ratios(&ratios).map_err(|e| match e {
            Error::Domain { index, .. } => Error::Domain {
                index,
                reason: "main gain of the last user is zero".into(),
            },
            other => other,
        });
    }
    let k = gains.k();
    if gains.h[k - 1] == 0.0 {
        return Err(Error::Domain {
            index: k - 1,
            reason: "main gain of the last user is zero".into(),
        });
    }
    let ratios: Vec<f64> = gains.h.iter().zip(&gains.h_e).map(|(a, b)| a / b).collect();
    NormalizedGains::from_ratios(&ratios)
}

/// Draws all `2K` gains i.i.d. uniform on `[low, high]`.
pub fn sample_gains(seed: u64, k: usize, low: f64, high: f64) -> Result<ChannelGains> {
    if k < 2 {
        return Err(Error::Parameter(format!("need at least 2 users, got {k}")));
    }
    if !(low > 0.0 && low < high && high.is_finite()) {
        return Err(Error::Parameter(format!(
            "gain range must satisfy 0 < low < high, got [{low}, {high}]"
        )));
    }
    let mut rng = rng::stream(seed, Purpose::Gains, k as u64, 0);
    let h = (0..k).map(|_| rng.gen_range(low..=high)).collect();
    let h_e = (0..k).map(|_| rng.gen_range(low..=high)).collect();
    ChannelGains::new(h, h_e)
}

/// `min_k h_e[k]^2 * P`: the largest common effective power that keeps
/// every user within its own budget.
pub fn effective_power(gains: &ChannelGains, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("power must be > 0, got {p}")));
    }
    let min_sq = gains
        .h_e
        .iter()
        .map(|g| g * g)
        .fold(f64::INFINITY, f64::min);
    Ok(min_sq * p)
}

/// Sends one block of `n` channel uses through both receivers.
///
/// `x[k][i]` is the input of user `k` at time `i`. Returns `(y, z)`.
pub fn transmit(
    x: &[Vec<f64>],
    gains: &ChannelGains,
    noise: NoiseModel,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != gains.k() {
        return Err(Error::Shape(format!(
            "{} input sequences for {} users",
            x.len(),
            gains.k()
        )));
    }
    let n = x[0].len();
    if n == 0 {
        return Err(Error::Shape("empty input block".into()));
    }
    if let Some(k) = x.iter().position(|row| row.len() != n) {
        return Err(Error::Shape(format!(
            "user {k} sent {} symbols, user 0 sent {n}",
            x[k].len()
        )));
    }
    let superpose = |coeffs: &[f64], i: usize| -> f64 {
        coeffs.iter().zip(x).map(|(c, row)| c * row[i]).sum()
    };
    let mut y: Vec<f64> = (0..n).map(|i| superpose(&gains.h, i)).collect();
    let mut z: Vec<f64> = (0..n).map(|i| superpose(&gains.h_e, i)).collect();
    if noise.variance() > 0.0 {
        let sd = noise.std_dev();
        let mut main = rng::stream(seed, Purpose::MainNoise, 0, 0);
        let mut eve = rng::stream(seed, Purpose::EavesdropperNoise, 0, 0);
        for v in &mut y {
            *v += sd * main.sample::<f64, _>(StandardNormal);
        }
        for v in &mut z {
            *v += sd * eve.sample::<f64, _>(StandardNormal);
        }
    }
    Ok((y, z))
}
