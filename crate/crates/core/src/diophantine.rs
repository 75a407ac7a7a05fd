//! Exhaustive Diophantine machinery for small linear forms.
//!
//! For normalized gains `g` (the first `K-1` ratios, the last one being 1)
//! the received constellation's minimum distance is governed by
//!
//! ```text
//! m(N) = min { |p + q . g| : p in Z, q in Z^(K-1), 0 < |q|_inf <= N }.
//! ```
//!
//! For almost every `g`, `m(N) * N^(K-1+eps)` stays bounded away from zero.
//! The functions here compute `m(N)` by brute force and expose the empirical
//! constant of that bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Largest number of `q` vectors a single search may visit.
pub const DEFAULT_SEARCH_CAP: u64 = 100_000_000;

/// The smallest value of `|p + q . g|` found by an exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFormResult {
    pub value: f64,
    pub p: i64,
    /// Canonical sign: the first nonzero entry is positive.
    pub q: Vec<i64>,
    /// Search bound on `|q|_inf`.
    pub bound: u64,
}

/// Scans every canonical `q` with `0 < |q|_inf <= bound`, choosing the
/// optimal `p = round(-q . g)` for each.
///
/// Ties are resolved toward the lexicographically smallest `q`.
pub fn min_linear_form(g: &[f64], bound: u64) -> Result<LinearFormResult> {
    if g.is_empty() {
        return Err(Error::Parameter("linear form needs at least one gain".into()));
    }
    if bound == 0 {
        return Err(Error::Parameter("search bound must be >= 1".into()));
    }
    if let Some(i) = g.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain {
            index: i,
            reason: "gain is not finite".into(),
        });
    }
    let required = (2.0 * bound as f64 + 1.0).powi(g.len() as i32);
    if required > DEFAULT_SEARCH_CAP as f64 {
        return Err(Error::Size {
            what: "linear-form search vectors",
            required,
            cap: DEFAULT_SEARCH_CAP as f64,
        });
    }

    let n = bound as i64;
    let d = g.len();
    let mut q = vec![-n; d];
    let mut best: Option<(f64, i64, Vec<i64>)> = None;
    loop {
        if is_canonical(&q) {
            let s: f64 = q.iter().zip(g).map(|(qi, gi)| *qi as f64 * gi).sum();
            let p = (-s).round();
            let value = (p + s).abs();
            if best.as_ref().is_none_or(|b| value < b.0) {
                best = Some((value, p as i64, q.clone()));
            }
        }
        // lexicographic odometer
        let mut pos = d;
        loop {
            if pos == 0 {
                let (value, p, q) = best.expect("bound >= 1 always yields a candidate");
                return Ok(LinearFormResult { value, p, q, bound });
            }
            pos -= 1;
            if q[pos] < n {
                q[pos] += 1;
                break;
            }
            q[pos] = -n;
        }
    }
}

fn is_canonical(q: &[i64]) -> bool {
    q.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// One row of a Khintchine-Groshev profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KgRow {
    pub n: u64,
    pub m: f64,
    /// `m * N^(K-1+eps)`.
    pub m_scaled: f64,
}

/// `m(N)` over a list of search bounds and the smallest scaled value.
#[derive(Debug, Clone, PartialEq)]
pub struct KgProfile {
    pub epsilon: f64,
    pub rows: Vec<KgRow>,
    /// Empirical estimate of the constant `c`; never a proven bound.
    pub c_hat: f64,
}

pub fn kg_profile(g: &[f64], epsilon: f64, bounds: &[u64]) -> Result<KgProfile> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if bounds.is_empty() {
        return Err(Error::Parameter("empty list of search bounds".into()));
    }
    if bounds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("search bounds must be strictly increasing".into()));
    }
    let exponent = g.len() as f64 + epsilon;
    let rows = bounds
        .iter()
        .map(|&n| {
            let m = min_linear_form(g, n)?.value;
            Ok(KgRow {
                n,
                m,
                m_scaled: m * (n as f64).powf(exponent),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let c_hat = rows.iter().map(|r| r.m_scaled).fold(f64::INFINITY, f64::min);
    Ok(KgProfile {
        epsilon,
        rows,
        c_hat,
    })
}

/// An exact relation `p + sum_k q[k] g[k] = 0` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerRelation {
    pub p: BigInt,
    pub q: Vec<BigInt>,
}

impl IntegerRelation {
    /// `p + q . g`, evaluated exactly.
    pub fn residual(&self, g: &[BigRational]) -> BigRational {
        self.q
            .iter()
            .zip(g)
            .fold(BigRational::from_integer(self.p.clone()), |acc, (q, x)| {
                acc + BigRational::from_integer(q.clone()) * x
            })
    }
}

/// Returns an integer relation among `{1, g_1, ..., g_{K-1}}`.
///
/// Rationals always satisfy one: writing `g_1 = a/b` in lowest terms,
/// `-a + b * g_1 = 0`.
pub fn find_integer_relation(g: &[BigRational]) -> Result<IntegerRelation> {
    let Some(first) = g.first() else {
        return Err(Error::Parameter("relation search needs at least one gain".into()));
    };
    let mut q = vec![BigInt::zero(); g.len()];
    q[0] = first.denom().clone();
    let relation = IntegerRelation {
        p: -first.numer().clone(),
        q,
    };
    debug_assert!(relation.residual(g).is_zero());
    Ok(relation)
}

/// Heuristic relation finder for floating-point gains: reports the best
/// linear form when its value is below `tau`.
///
/// A result is evidence of a near-relation within the searched box, not a
/// proof of rational dependence; `None` rules nothing out beyond the box.
pub fn suspected_relation(g: &[f64], bound: u64, tau: f64) -> Result<Option<LinearFormResult>> {
    if !(tau > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be > 0, got {tau}")));
    }
    let best = min_linear_form(g, bound)?;
    Ok((best.value < tau).then_some(best))
}

/// Partial sum `sum_{q=1}^{q_max} q^(K-2) psi(q)` for `psi(q) = q^-(K-1+eps)`.
///
/// Each term simplifies to `q^-(1+eps)`; terms are added smallest first.
pub fn psi_series_partial_sum(k: usize, epsilon: f64, q_max: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Parameter(format!("need K >= 2, got {k}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!(
            "epsilon must be > 0 for a convergent series, got {epsilon}"
        )));
    }
    if q_max == 0 {
        return Err(Error::Parameter("q_max must be >= 1".into()));
    }
    let exponent = -(1.0 + epsilon);
    Ok((1..=q_max).rev().map(|q| (q as f64).powf(exponent)).sum())
}

/// `true` when the relation is nontrivial and holds exactly.
pub fn verifies(relation: &IntegerRelation, g: &[BigRational]) -> bool {
    relation.q.len() == g.len()
        && relation.q.iter().any(|x| !x.is_zero())
        && relation.residual(g).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Independent oracle: scans every integer `p` in a window that surely
    /// contains the optimum, and every nonzero `q` (both signs).
    fn oracle(g: &[f64], n: i64) -> f64 {
        let span: f64 = g.iter().map(|x| x.abs()).sum::<f64>() * n as f64 + 2.0;
        let d = g.len();
        let mut best = f64::INFINITY;
        let total = (2 * n + 1).pow(d as u32);
        for idx in 0..total {
            let mut rest = idx;
            let q: Vec<i64> = (0..d)
                .map(|_| {
                    let v = rest % (2 * n + 1) - n;
                    rest /= 2 * n + 1;
                    v
                })
                .collect();
            if q.iter().all(|&x| x == 0) {
                continue;
            }
            let s: f64 = q.iter().zip(g).map(|(a, b)| *a as f64 * b).sum();
            for p in -(span as i64)..=(span as i64) {
                best = best.min((p as f64 + s).abs());
            }
        }
        best
    }

    /// Residuals |q sqrt2 - p| of the continued-fraction convergents of sqrt 2.
    fn sqrt2_convergents(count: usize) -> Vec<(i64, i64, f64)> {
        let (mut p0, mut q0, mut p1, mut q1) = (1i64, 1i64, 3i64, 2i64);
        let mut out = vec![(p0, q0), (p1, q1)];
        while out.len() < count {
            let (p2, q2) = (2 * p1 + p0, 2 * q1 + q0);
            out.push((p2, q2));
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
        }
        let r2 = 2f64.sqrt();
        out.into_iter().map(|(p, q)| (p, q, (q as f64 * r2 - p as f64).abs())).collect()
    }

    #[test]
    fn min_linear_form_examples() {
        let r2 = 2f64.sqrt();
        let r = min_linear_form(&[r2], 4).unwrap();
        assert_eq!((r.p, r.q.clone()), (-3, vec![2]));
        assert_relative_eq!(r.value, 3.0 - 2.0 * r2, max_relative = 1e-12);

        let r = min_linear_form(&[0.5], 2).unwrap();
        assert_eq!((r.value, r.p, r.q), (0.0, -1, vec![2]));

        let r = min_linear_form(&[r2, 3f64.sqrt()], 2).unwrap();
        assert_eq!((r.p, r.q.clone()), (2, vec![1, -2]));
        assert_relative_eq!(r.value, 0.049_888_052_764_659_46, max_relative = 1e-9);
        assert_eq!(r.value, oracle(&[r2, 3f64.sqrt()], 2));
    }

    #[test]
    fn search_cap_and_bad_input() {
        assert!(matches!(
            min_linear_form(&[0.3, 0.7, 0.1], 300),
            Err(Error::Size { .. })
        ));
        assert!(min_linear_form(&[], 3).is_err());
        assert!(min_linear_form(&[0.3], 0).is_err());
    }

    #[test]
    fn convergent_residuals_of_sqrt2() {
        let conv = sqrt2_convergents(5);
        for (&n, (_, q, res)) in [1u64, 2, 5, 12, 29].iter().zip(conv) {
            assert_eq!(q as u64, n);
            let r = min_linear_form(&[2f64.sqrt()], n).unwrap();
            assert!((r.value - res).abs() < 1e-12, "N={n}: {} vs {res}", r.value);
        }
    }

    #[test]
    fn kg_profile_examples() {
        let prof = kg_profile(&[2f64.sqrt()], 0.5, &[2, 4, 12]).unwrap();
        let m: Vec<f64> = prof.rows.iter().map(|r| r.m).collect();
        let scaled: Vec<f64> = prof.rows.iter().map(|r| r.m_scaled).collect();
        assert_relative_eq!(m[0], 0.171_572_875_253_809_7, max_relative = 1e-12);
        assert_relative_eq!(m[1], 0.171_572_875_253_809_7, max_relative = 1e-12);
        assert_relative_eq!(m[2], 0.029_437_251_522_857_37, max_relative = 1e-9);
        assert_relative_eq!(scaled[0], 0.485_281_374_238_57, max_relative = 1e-9);
        assert_relative_eq!(scaled[1], 1.372_583_002_030_48, max_relative = 1e-9);
        assert_relative_eq!(scaled[2], 1.223_683_566_546_558, max_relative = 1e-9);
        assert_eq!(prof.c_hat, scaled[0]);

        assert_eq!(kg_profile(&[0.5], 0.3, &[2, 4, 8]).unwrap().c_hat, 0.0);
        assert!(kg_profile(&[0.5], 0.3, &[4, 4]).is_err());
    }

    #[test]
    fn sqrt2_is_badly_approximable() {
        let bounds: Vec<u64> = (1..=400).collect();
        let prof = kg_profile(&[2f64.sqrt()], 0.0, &bounds).unwrap();
        let floor = 1.0 / (2.0 + 2.0 * 2f64.sqrt());
        assert!(prof.c_hat >= floor, "{}", prof.c_hat);
        assert!(prof.rows.windows(2).all(|w| w[1].m <= w[0].m));
    }

    #[test]
    fn relations_from_rationals() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let rel = find_integer_relation(&[r(1, 2)]).unwrap();
        assert_eq!(rel.p, BigInt::from(-1));
        assert_eq!(rel.q, vec![BigInt::from(2)]);

        let g = [r(3, 4), r(1, 2)];
        let rel = find_integer_relation(&g).unwrap();
        assert_eq!(rel.p, BigInt::from(-3));
        assert_eq!(rel.q, vec![BigInt::from(4), BigInt::from(0)]);
        assert!(rel.residual(&g).is_zero());

        assert!(find_integer_relation(&[]).is_err());
    }

    #[test]
    fn suspected_relation_examples() {
        assert_eq!(suspected_relation(&[2f64.sqrt()], 64, 1e-9).unwrap(), None);
        let hit = suspected_relation(&[0.75], 4, 1e-9).unwrap().unwrap();
        assert_eq!((hit.p, hit.q), (-3, vec![4]));
        assert_eq!(suspected_relation(&[2f64.sqrt() + 1e-12], 4, 1e-6).unwrap(), None);
        assert!(suspected_relation(&[0.75], 4, 0.0).is_err());
    }

    #[test]
    fn psi_series() {
        assert_eq!(psi_series_partial_sum(2, 1.0, 1).unwrap(), 1.0);
        // zeta(2) minus the Euler-Maclaurin tail 1/q - 1/(2 q^2)
        let qmax = 1_000_000u64;
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let expected = zeta2 - 1.0 / qmax as f64 + 0.5 / (qmax as f64).powi(2);
        let got = psi_series_partial_sum(3, 1.0, qmax).unwrap();
        assert!((got - expected).abs() < 1e-5);
        assert!((got - 1.644_933).abs() < 1e-5);
        assert!(psi_series_partial_sum(2, 0.0, 10).is_err());
        assert!(psi_series_partial_sum(2, -0.5, 10).is_err());
    }

    #[test]
    fn psi_series_is_cauchy() {
        let eps = 0.5;
        for m in [10u64, 100, 1000, 10_000] {
            let inc = psi_series_partial_sum(2, eps, 2 * m).unwrap()
                - psi_series_partial_sum(2, eps, m).unwrap();
            // integral comparison for a decreasing summand
            let integral = ((m as f64).powf(-eps) - ((2 * m) as f64).powf(-eps)) / eps;
            assert!(inc > 0.0 && inc <= integral, "m={m}");
            assert!(inc < 2f64.powf(-0.5) * (m as f64).powf(-eps) / eps);
        }
    }

    proptest! {
        #[test]
        fn matches_oracle(g0 in -3.0f64..3.0, g1 in -3.0f64..3.0, n in 1i64..6, two in any::<bool>()) {
            let g: Vec<f64> = if two { vec![g0, g1] } else { vec![g0] };
            let r = min_linear_form(&g, n as u64).unwrap();
            prop_assert_eq!(r.value, oracle(&g, n));
            prop_assert!(is_canonical(&r.q));
            prop_assert!(r.q.iter().all(|x| x.abs() <= n));
        }

        #[test]
        fn m_is_nonincreasing(g0 in 0.01f64..3.0, g1 in 0.01f64..3.0) {
            let mut prev = f64::INFINITY;
            for n in 1..=12 {
                let m = min_linear_form(&[g0, g1], n).unwrap().value;
                prop_assert!(m <= prev);
                prev = m;
            }
        }

        #[test]
        fn rational_relations_verify(
            nums in prop::collection::vec(-1000i64..1000, 1..5),
            dens in prop::collection::vec(1i64..1000, 5),
        ) {
            let g: Vec<BigRational> = nums.iter().zip(&dens)
                .map(|(a, b)| BigRational::new((*a).into(), (*b).into()))
                .collect();
            let rel = find_integer_relation(&g).unwrap();
            prop_assert!(rel.residual(&g).is_zero());
            prop_assert!(!rel.q[0].is_zero());
        }
    }
}
