//! Plug-in estimate of the information an eavesdropper's observation carries
//! about the transmitted integer tuple.

use std::collections::BTreeMap;

use super::entropy::{residual_secrecy, sum_entropy};
use crate::error::{Error, Result};

/// Smallest sample count for which an estimate is reported.
pub const MIN_LEAKAGE_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct LeakageEstimate {
    /// Plug-in `I(tuple; quantized z)`.
    pub mi_bits: f64,
    /// `H(sum of tuple)`, the exact leakage of a noiseless aligned observation.
    pub reference_bits: f64,
    /// `K log2(2Q+1) - H(sum)`, the uncertainty alignment leaves behind.
    pub residual_bits: f64,
    /// `(cells - 1) / (2 N ln 2)` over occupied joint cells.
    pub bias_bound_bits: f64,
    pub samples: usize,
    pub occupied_bins: usize,
}

/// Estimates `I(x; z)` from `(tuple, z)` samples, quantizing `z` to the
/// nearest multiple of `bin_width`. An infinite width collapses every
/// observation into one bin.
pub fn leakage_estimate(samples: &[(Vec<i64>, f64)], bin_width: f64, q: u32) -> Result<LeakageEstimate> {
    if !(bin_width > 0.0) {
        return Err(Error::Parameter(format!("bin width must be > 0, got {bin_width}")));
    }
    if samples.len() < MIN_LEAKAGE_SAMPLES {
        return Err(Error::SampleSize {
            got: samples.len(),
            need: MIN_LEAKAGE_SAMPLES,
        });
    }
    let k = samples[0].0.len();
    if k == 0 || samples.iter().any(|(x, _)| x.len() != k) {
        return Err(Error::Shape("all tuples must have the same nonzero length".into()));
    }
    if let Some((_, z)) = samples.iter().find(|(_, z)| !z.is_finite()) {
        return Err(Error::Parameter(format!("observation {z} is not finite")));
    }

    let mut joint: BTreeMap<(&[i64], i64), u64> = BTreeMap::new();
    let mut by_x: BTreeMap<&[i64], u64> = BTreeMap::new();
    let mut by_z: BTreeMap<i64, u64> = BTreeMap::new();
    for (x, z) in samples {
        let bin = if bin_width.is_infinite() {
            0
        } else {
            (z / bin_width).round() as i64
        };
        *joint.entry((x.as_slice(), bin)).or_default() += 1;
        *by_x.entry(x.as_slice()).or_default() += 1;
        *by_z.entry(bin).or_default() += 1;
    }

    let n = samples.len() as f64;
    let mi: f64 = joint
        .iter()
        .map(|((x, b), &c)| {
            let c = c as f64;
            c / n * (c * n / (by_x[x] as f64 * by_z[b] as f64)).log2()
        })
        .sum();

    Ok(LeakageEstimate {
        mi_bits: mi.max(0.0),
        reference_bits: sum_entropy(k, q)?,
        residual_bits: residual_secrecy(k, q)?,
        bias_bound_bits: (joint.len() as f64 - 1.0) / (2.0 * n * std::f64::consts::LN_2),
        samples: samples.len(),
        occupied_bins: joint.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exhaustive(k: usize, q: i64, a: f64, repeats: usize) -> Vec<(Vec<i64>, f64)> {
        let side = (2 * q + 1) as usize;
        let mut out = Vec::new();
        for code in 0..side.pow(k as u32) {
            let mut rest = code;
            let x: Vec<i64> = (0..k)
                .map(|_| {
                    let d = (rest % side) as i64 - q;
                    rest /= side;
                    d
                })
                .collect();
            let z = a * x.iter().sum::<i64>() as f64;
            for _ in 0..repeats {
                out.push((x.clone(), z));
            }
        }
        out
    }

    #[test]
    fn noiseless_exhaustive_equals_sum_entropy() {
        let est = leakage_estimate(&exhaustive(2, 1, 7.5, 112), 0.75, 1).unwrap();
        assert!((est.mi_bits - 2.197159723424149).abs() < 1e-12);
        assert!((est.mi_bits - est.reference_bits).abs() < 1e-12);
        assert!((est.residual_bits - (2.0 * 3f64.log2() - 2.197159723424149)).abs() < 1e-12);

        let est = leakage_estimate(&exhaustive(3, 2, 3.0, 8), 0.3, 2).unwrap();
        assert!((est.mi_bits - est.reference_bits).abs() < 1e-12);
    }

    #[test]
    fn pure_noise_leaks_little() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<_> = (0..100_000)
            .map(|_| {
                let x = vec![rng.gen_range(-1..=1), rng.gen_range(-1..=1)];
                (x, rng.gen_range(-5.0..5.0))
            })
            .collect();
        let est = leakage_estimate(&samples, 1.0, 1).unwrap();
        assert!(est.mi_bits < 0.05, "{}", est.mi_bits);
        assert!(est.mi_bits <= 2.0 * est.bias_bound_bits);
    }

    #[test]
    fn single_bin_gives_zero() {
        let est = leakage_estimate(&exhaustive(2, 1, 1.0, 200), f64::INFINITY, 1).unwrap();
        assert_eq!(est.mi_bits, 0.0);
    }

    #[test]
    fn input_checks() {
        let s = exhaustive(2, 1, 1.0, 10);
        assert!(matches!(
            leakage_estimate(&s, 0.1, 1),
            Err(Error::SampleSize { got: 90, need: 1000 })
        ));
        assert!(leakage_estimate(&exhaustive(2, 1, 1.0, 200), 0.0, 1).is_err());
        let mut ragged = exhaustive(2, 1, 1.0, 200);
        ragged[3].0.push(0);
        assert!(leakage_estimate(&ragged, 0.1, 1).is_err());
    }
}
