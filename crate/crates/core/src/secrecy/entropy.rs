use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest support `2KQ+1` that [`sum_entropy`] will convolve.
pub const SUM_SUPPORT_CAP: u64 = 10_000_000;

/// Mutual information of a two-way joint pmf `joint[a][b]`.
pub fn mutual_information(joint: &[Vec<f64>]) -> Result<f64> {
    let rows = joint.len();
    let cols = joint.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Normalization("empty table".into()));
    }
    if joint.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape("ragged joint table".into()));
    }
    let mut total = 0.0;
    for &p in joint.iter().flatten() {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::Normalization(format!("invalid entry {p}")));
        }
        total += p;
    }
    let tol = 1e-12 + (rows * cols) as f64 * f64::EPSILON;
    if (total - 1.0).abs() > tol {
        return Err(Error::Normalization(format!("entries sum to {total}")));
    }
    let pa: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let pb: Vec<f64> = (0..cols).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let mut mi = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                mi += p * (p / (pa[i] * pb[j])).log2();
            }
        }
    }
    Ok(if mi < 0.0 { 0.0 } else { mi })
}

fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap().log2()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap().log2() + shift as f64
    }
}

/// Exact integer counts of `sum_k X_k` for `K` i.i.d. uniform `X_k` on
/// `{-Q..Q}`; entry `j` counts the tuples with sum `j - KQ`.
pub fn sum_counts(k: usize, q: u32) -> Result<Vec<BigUint>> {
    if k == 0 {
        return Err(Error::Parameter("need K >= 1".into()));
    }
    let support = 2 * k as u64 * q as u64 + 1;
    if support > SUM_SUPPORT_CAP {
        return Err(Error::Size {
            what: "sum support 2KQ+1",
            required: support as f64,
            cap: SUM_SUPPORT_CAP as f64,
        });
    }
    let width = 2 * q as usize + 1;
    let mut counts = vec![BigUint::one(); width];
    for _ in 1..k {
        // convolution with a box of `width` ones through running sums
        let mut next = Vec::with_capacity(counts.len() + width - 1);
        let mut window = BigUint::zero();
        for j in 0..counts.len() + width - 1 {
            if j < counts.len() {
                window += &counts[j];
            }
            if j >= width {
                window -= &counts[j - width];
            }
            next.push(window.clone());
        }
        counts = next;
    }
    Ok(counts)
}

/// Entropy in bits of the sum of `K` i.i.d. uniform integers on `{-Q..Q}`.
///
/// The distribution is computed exactly as integer counts over
/// `(2Q+1)^K`; only the final logarithms are floating point.
pub fn sum_entropy(k: usize, q: u32) -> Result<f64> {
    let counts = sum_counts(k, q)?;
    let total = BigUint::from(2 * q as u64 + 1).pow(k as u32);
    let log_total = log2_big(&total);
    let weighted: f64 = counts
        .iter()
        .map(|c| {
            let lc = log2_big(c);
            (lc - log_total).exp2() * lc
        })
        .sum();
    Ok((log_total - weighted).max(0.0))
}

/// Secrecy sum-rate lower bound of the integer scheme, in bits per use:
///
/// `[K log2(2Q+1) - log2(2KQ+1) - 1 - Pe K log2(2Q+1)]^+`.
///
/// The Fano term charges `Pe` times the log-cardinality of the whole input
/// tuple, `K log2(2Q+1)`.
pub fn sum_rate_lower_bound(k: usize, q: u32, pe: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Parameter("need K >= 1".into()));
    }
    if q == 0 {
        return Err(Error::Parameter("need Q >= 1".into()));
    }
    if !(0.0..=1.0).contains(&pe) {
        return Err(Error::Parameter(format!("error probability {pe} outside [0, 1]")));
    }
    let kf = k as f64;
    let qf = q as f64;
    let tuple_bits = kf * (2.0 * qf + 1.0).log2();
    let raw = tuple_bits - (2.0 * kf * qf + 1.0).log2() - 1.0 - pe * tuple_bits;
    Ok(raw.max(0.0))
}

/// `(K-1)(1-eps)/(K+eps)`, the prelog achieved for a given `eps`.
pub fn sdof_limit(k: usize, epsilon: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Parameter(format!("need K >= 2, got {k}")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Parameter(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    let kf = k as f64;
    Ok((kf - 1.0) * (1.0 - epsilon) / (kf + epsilon))
}

/// Least-squares line through `(log2(P)/2, R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Fits the sum rate against `log2(P)/2`; the slope estimates the secure
/// degrees of freedom.
pub fn sdof_fit(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(Error::Fit(format!("need >= 2 points, got {}", points.len())));
    }
    if let Some(&(p, _)) = points.iter().find(|(p, _)| !(*p > 1.0 && p.is_finite())) {
        return Err(Error::Fit(format!("power {p} must be finite and > 1")));
    }
    let xs: Vec<f64> = points.iter().map(|(p, _)| 0.5 * p.log2()).collect();
    let n = points.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|(_, r)| r).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all powers are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(points).map(|(x, (_, r))| (x - mx) * (r - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(points)
        .map(|(x, (_, r))| (r - slope * x - intercept).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (sse / n).sqrt(),
    })
}

/// Entropy of the uniform input tuple minus the sum entropy: what the
/// eavesdropper still does not know after observing the noiseless sum.
pub fn residual_secrecy(k: usize, q: u32) -> Result<f64> {
    Ok(k as f64 * (2.0 * q as f64 + 1.0).log2() - sum_entropy(k, q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::select_params;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    /// Oracle: enumerate every tuple and histogram the sums.
    fn enumerated_sum_entropy(k: usize, q: i64) -> f64 {
        let mut hist: BTreeMap<i64, u64> = BTreeMap::new();
        let base = 2 * q + 1;
        let total = base.pow(k as u32);
        for idx in 0..total {
            let mut rest = idx;
            let mut s = 0;
            for _ in 0..k {
                s += rest % base - q;
                rest /= base;
            }
            *hist.entry(s).or_default() += 1;
        }
        hist.values()
            .map(|&c| {
                let p = c as f64 / total as f64;
                -p * p.log2()
            })
            .sum()
    }

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn mutual_information_examples() {
        let product = vec![vec![0.12, 0.28], vec![0.18, 0.42]];
        assert!(mutual_information(&product).unwrap().abs() < 1e-15);
        let copy = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        assert_eq!(mutual_information(&copy).unwrap(), 1.0);
        let f = 0.11;
        let bsc = vec![vec![0.5 * (1.0 - f), 0.5 * f], vec![0.5 * f, 0.5 * (1.0 - f)]];
        let mi = mutual_information(&bsc).unwrap();
        assert_relative_eq!(mi, 1.0 - h2(f), max_relative = 1e-12);
        assert_relative_eq!(mi, 0.500_084_041_835_472, max_relative = 1e-9);
        assert!(matches!(
            mutual_information(&[vec![0.5, 0.4]]),
            Err(Error::Normalization(_))
        ));
        assert!(mutual_information(&[vec![1.2, -0.2]]).is_err());
    }

    #[test]
    fn sum_entropy_examples() {
        assert_relative_eq!(sum_entropy(1, 7).unwrap(), 15f64.log2(), max_relative = 1e-14);
        let h = sum_entropy(2, 1).unwrap();
        assert!((h - 2.197_159_723_424_149).abs() < 1e-12);
        assert!((h - enumerated_sum_entropy(2, 1)).abs() < 1e-12);
        assert_eq!(sum_entropy(3, 0).unwrap(), 0.0);
        for (k, q) in [(2, 3), (3, 2), (4, 1), (3, 5)] {
            assert!((sum_entropy(k, q).unwrap() - enumerated_sum_entropy(k, q as i64)).abs() < 1e-12);
            assert!(sum_entropy(k, q).unwrap() < (2.0 * k as f64 * q as f64 + 1.0).log2());
        }
        assert!(matches!(sum_entropy(2, 5_000_000), Err(Error::Size { .. })));
    }

    #[test]
    fn counts_are_exact() {
        let c = sum_counts(2, 1).unwrap();
        let c: Vec<u64> = c.iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(c, vec![1, 2, 3, 2, 1]);
        let c = sum_counts(60, 1).unwrap();
        let total: BigUint = c.iter().sum();
        assert_eq!(total, BigUint::from(3u32).pow(60));
        assert!(sum_entropy(60, 1).unwrap().is_finite());
    }

    #[test]
    fn sum_rate_bound_examples() {
        assert_eq!(sum_rate_lower_bound(2, 1, 0.0).unwrap(), 0.0);
        let raw = 2.0 * 3f64.log2() - 5f64.log2() - 1.0;
        assert_relative_eq!(raw, -0.152_003_093_445_050, max_relative = 1e-9);
        // 2 log2(201) - log2(401) - 1
        assert_relative_eq!(
            sum_rate_lower_bound(2, 100, 0.0).unwrap(),
            5.654_644_955_902_938,
            max_relative = 1e-12
        );
        assert_eq!(sum_rate_lower_bound(2, 100, 1.0).unwrap(), 0.0);
        assert!(sum_rate_lower_bound(2, 0, 0.0).is_err());
        assert!(sum_rate_lower_bound(2, 3, 1.5).is_err());
    }

    #[test]
    fn sdof_limit_examples() {
        assert_eq!(sdof_limit(2, 0.0).unwrap(), 0.5);
        assert_relative_eq!(sdof_limit(2, 0.1).unwrap(), 0.9 / 2.1, max_relative = 1e-15);
        assert_relative_eq!(sdof_limit(3, 0.01).unwrap(), 0.657_807_308_970_099_7, max_relative = 1e-12);
        assert!(sdof_limit(1, 0.1).is_err());
        assert!(sdof_limit(2, 1.0).is_err());
    }

    #[test]
    fn sdof_fit_examples() {
        let line: Vec<(f64, f64)> = [1e2, 1e4, 1e8].iter().map(|&p: &f64| (p, 0.25 * p.log2())).collect();
        let fit = sdof_fit(&line).unwrap();
        assert_relative_eq!(fit.slope, 0.5, max_relative = 1e-12);
        assert!(fit.residual < 1e-12);

        let flat = [(10.0, 3.0), (100.0, 3.0), (1000.0, 3.0)];
        assert_eq!(sdof_fit(&flat).unwrap().slope, 0.0);

        assert!(sdof_fit(&[(10.0, 1.0)]).is_err());
        assert!(sdof_fit(&[(10.0, 1.0), (10.0, 2.0)]).is_err());
        assert!(sdof_fit(&[(1.0, 1.0), (10.0, 2.0)]).is_err());
    }

    #[test]
    fn k2_slope_near_limit() {
        let pts: Vec<(f64, f64)> = (4..=16)
            .map(|e| {
                let p = 10f64.powi(e);
                let q = select_params(p, 2, 0.01).unwrap().q;
                (p, sum_rate_lower_bound(2, q, 0.0).unwrap())
            })
            .collect();
        let fit = sdof_fit(&pts).unwrap();
        assert!((fit.slope - sdof_limit(2, 0.01).unwrap()).abs() < 0.02);
    }

    #[test]
    fn residual_secrecy_k2_q1() {
        assert!((residual_secrecy(2, 1).unwrap() - 0.972_765_278_018_163).abs() < 1e-12);
    }

    #[test]
    fn sum_entropy_monotone() {
        for k in 1..=5 {
            for q in 1..=20u32 {
                let h = sum_entropy(k, q).unwrap();
                assert!(sum_entropy(k, q + 1).unwrap() > h);
                assert!(sum_entropy(k + 1, q).unwrap() > h);
                let bound = (2.0 * k as f64 * q as f64 + 1.0).log2();
                if k == 1 {
                    assert!((h - bound).abs() < 1e-12);
                } else {
                    assert!(h < bound);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn mi_is_nonnegative_and_bounded(cells in prop::collection::vec(0.0f64..1.0, 6)) {
            let total: f64 = cells.iter().sum();
            prop_assume!(total > 1e-6);
            let joint: Vec<Vec<f64>> = cells.chunks(3).map(|r| r.iter().map(|c| c / total).collect()).collect();
            let mi = mutual_information(&joint).unwrap();
            prop_assert!(mi >= 0.0);
            prop_assert!(mi <= 1.0 + 1e-12);
        }
    }
}
