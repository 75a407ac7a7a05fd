//! Integer transmit constellations and the received constellation they
//! induce at the intended receiver.
//!
//! Every user sends an integer from `{-Q, ..., Q}`. After normalization the
//! receiver sees the point `A * sum_k g[k] * v[k]`. When the normalized gains
//! are rationally independent, distinct integer tuples land on distinct
//! points (unique decomposability), and the smallest gap between points
//! controls the hard-decoding error probability.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::model::NormalizedGains;

/// Default cap on the number of enumerated received points.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Two floating-point points closer than this multiple of `A` are reported
/// as a suspected collision.
pub const SUSPECT_TOLERANCE: f64 = 1e-9;

/// Transmit constellation shared by all users: `{-Q, ..., Q}` scaled by `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationSpec {
    pub k: usize,
    pub q: u32,
    pub a: f64,
}

impl ConstellationSpec {
    /// Number of points of one user's alphabet.
    pub fn alphabet_size(&self) -> u64 {
        2 * self.q as u64 + 1
    }

    /// Peak per-symbol energy `A^2 Q^2` of the normalized input.
    pub fn peak_energy(&self) -> f64 {
        let aq = self.a * self.q as f64;
        aq * aq
    }
}

/// Picks `Q = floor(P^((1-e)/(2(K+e))))` and `A = P^((K-1+2e)/(2(K+e)))`.
///
/// The product `A^2 Q^2` never exceeds `p_tilde`; if rounding pushes it
/// over, `A` is nudged down by whole ulps.
pub fn select_params(p_tilde: f64, k: usize, epsilon: f64) -> Result<ConstellationSpec> {
    if k < 2 {
        return Err(Error::Parameter(format!("need at least 2 users, got {k}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if p_tilde.is_nan() || p_tilde < 1.0 {
        return Err(Error::InfeasiblePower { p_tilde });
    }
    if !p_tilde.is_finite() {
        return Err(Error::Parameter("effective power is not finite".into()));
    }
    let kf = k as f64;
    let denom = 2.0 * (kf + epsilon);
    let q = p_tilde.powf((1.0 - epsilon) / denom).floor();
    if q > u32::MAX as f64 {
        return Err(Error::Parameter(format!("Q = {q} does not fit in 32 bits")));
    }
    let q = (q as u32).max(1);
    let mut a = p_tilde.powf((kf - 1.0 + 2.0 * epsilon) / denom);
    let qf = q as f64;
    while a * a * qf * qf > p_tilde {
        a = a.next_down();
    }
    Ok(ConstellationSpec { k, q, a })
}

/// Outcome of the unique-decomposability check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gamma {
    /// Every point has exactly one integer decomposition.
    Holds,
    /// Two tuples provably share a point.
    Violated,
    /// Floating-point enumeration found two points closer than
    /// [`SUSPECT_TOLERANCE`]` * A`; a collision cannot be ruled out.
    Suspect,
}

impl Gamma {
    pub fn holds(self) -> bool {
        self == Gamma::Holds
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gamma::Holds => "true",
            Gamma::Violated => "false",
            Gamma::Suspect => "suspect",
        }
    }
}

/// All noiseless observations `A * sum_k g[k] v[k]` of the intended receiver.
#[derive(Debug, Clone)]
pub struct ReceivedConstellation {
    k: usize,
    q: u32,
    a: f64,
    /// Distinct point values, ascending.
    points: Vec<f64>,
    /// Mixed-radix code of the first (lexicographically smallest) tuple
    /// that lands on each point.
    codes: Vec<u64>,
    gamma: Gamma,
    d_min: f64,
    collisions: u64,
}

impl ReceivedConstellation {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn gamma(&self) -> Gamma {
        self.gamma
    }

    /// Smallest gap between enumerated points; `0` when two tuples collide
    /// exactly and `+inf` for a single-point constellation.
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    /// Number of tuples that landed on a point already taken by another tuple.
    pub fn collisions(&self) -> u64 {
        self.collisions
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `(2Q+1)^K`, the number of transmit tuples.
    pub fn tuple_count(&self) -> u64 {
        (2 * self.q as u64 + 1).pow(self.k as u32)
    }

    /// Minimum distance of the constellation.
    pub fn min_distance(&self) -> Result<f64> {
        if self.points.len() < 2 {
            return Err(Error::UndefinedDistance {
                points: self.points.len(),
            });
        }
        Ok(self.d_min)
    }

    /// The unique tuple behind a stored point value.
    pub fn decompose(&self, point: f64) -> Result<Vec<i64>> {
        self.require_gamma()?;
        let idx = self.points.partition_point(|p| *p < point);
        match self.points.get(idx) {
            Some(p) if *p == point => Ok(self.tuple_of(idx)),
            _ => Err(Error::NotInConstellation(point)),
        }
    }

    /// Index of the point nearest to `y`; ties go to the smaller point.
    pub fn nearest_index(&self, y: f64) -> usize {
        let idx = self.points.partition_point(|p| *p < y);
        if idx == 0 {
            return 0;
        }
        if idx == self.points.len() {
            return idx - 1;
        }
        let below = y - self.points[idx - 1];
        let above = self.points[idx] - y;
        if above < below {
            idx
        } else {
            idx - 1
        }
    }

    /// Tuple stored for point index `idx`.
    pub fn tuple_of(&self, idx: usize) -> Vec<i64> {
        decode_tuple(self.codes[idx], self.k, self.q)
    }

    pub(crate) fn require_gamma(&self) -> Result<()> {
        match self.gamma {
            Gamma::Holds => Ok(()),
            Gamma::Violated => Err(Error::Ambiguous(format!(
                "{} tuple(s) share a point with another tuple",
                self.collisions
            ))),
            Gamma::Suspect => Err(Error::Ambiguous(format!(
                "points closer than {SUSPECT_TOLERANCE} * A; collision not ruled out"
            ))),
        }
    }
}

fn decode_tuple(mut code: u64, k: usize, q: u32) -> Vec<i64> {
    let base = 2 * q as u64 + 1;
    let mut v = vec![0i64; k];
    for slot in v.iter_mut().rev() {
        *slot = (code % base) as i64 - q as i64;
        code /= base;
    }
    v
}

/// Calls `f(code, tuple)` for every tuple in `{-Q..Q}^K`, in code order.
fn for_each_tuple(k: usize, q: u32, mut f: impl FnMut(u64, &[i64])) {
    let q = q as i64;
    let mut v = vec![-q; k];
    let mut code = 0u64;
    loop {
        f(code, &v);
        code += 1;
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if v[pos] < q {
                v[pos] += 1;
                break;
            }
            v[pos] = -q;
        }
    }
}

/// The value of one received point, `A * sum_k g[k] v[k]`, summed in user order.
pub fn point_value(g: &[f64], v: &[i64], a: f64) -> f64 {
    let mut s = 0.0;
    for (gk, vk) in g.iter().zip(v) {
        s += gk * *vk as f64;
    }
    a * s
}

/// Enumerates the received constellation with the default size cap.
pub fn received_constellation(g: &NormalizedGains, q: u32, a: f64) -> Result<ReceivedConstellation> {
    received_constellation_capped(g, q, a, DEFAULT_ENUMERATION_CAP)
}

pub fn received_constellation_capped(
    g: &NormalizedGains,
    q: u32,
    a: f64,
    cap: u64,
) -> Result<ReceivedConstellation> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Parameter(format!("A must be finite and > 0, got {a}")));
    }
    let k = g.k();
    let required = (2.0 * q as f64 + 1.0).powi(k as i32);
    if required > cap as f64 {
        return Err(Error::Size {
            what: "received constellation points",
            required,
            cap: cap as f64,
        });
    }
    match g.exact() {
        Some(exact) => enumerate_exact(exact, q, a),
        None => Ok(enumerate_float(g.g(), q, a)),
    }
}

fn enumerate_float(g: &[f64], q: u32, a: f64) -> ReceivedConstellation {
    let k = g.len();
    let mut all: Vec<(f64, u64)> = Vec::with_capacity((2 * q as usize + 1).pow(k as u32));
    for_each_tuple(k, q, |code, v| all.push((point_value(g, v, a), code)));
    all.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    // -0.0 and +0.0 sort apart under total_cmp but are the same point
    all.iter_mut().for_each(|p| p.0 += 0.0);

    let mut points = Vec::with_capacity(all.len());
    let mut codes = Vec::with_capacity(all.len());
    let mut d_min = f64::INFINITY;
    let mut collisions = 0u64;
    for (value, code) in all {
        if let Some(&last) = points.last() {
            let gap = value - last;
            d_min = d_min.min(gap);
            if gap == 0.0 {
                collisions += 1;
                continue;
            }
        }
        points.push(value);
        codes.push(code);
    }
    let gamma = if collisions > 0 {
        Gamma::Violated
    } else if d_min < SUSPECT_TOLERANCE * a {
        Gamma::Suspect
    } else {
        Gamma::Holds
    };
    ReceivedConstellation {
        k,
        q,
        a,
        points,
        codes,
        gamma,
        d_min,
        collisions,
    }
}

/// Exact enumeration for rational gains: all gains are brought to a common
/// denominator so every point becomes an integer multiple of `A / D`.
fn enumerate_exact(
    exact: &[num_rational::BigRational],
    q: u32,
    a: f64,
) -> Result<ReceivedConstellation> {
    let k = exact.len();
    let denom = exact
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let too_big = || Error::Size {
        what: "exact gain numerator magnitude (bits)",
        required: f64::INFINITY,
        cap: 60.0,
    };
    let limit = BigInt::one() << 60;
    let coeffs: Vec<i128> = exact
        .iter()
        .map(|r| {
            let c = r.numer() * (&denom / r.denom());
            if c.abs() >= limit {
                Err(too_big())
            } else {
                Ok(c.to_i128().unwrap())
            }
        })
        .collect::<Result<_>>()?;
    if denom >= limit {
        return Err(too_big());
    }
    let denom_f = denom.to_f64().unwrap();

    let mut all: Vec<(i128, u64)> = Vec::with_capacity((2 * q as usize + 1).pow(k as u32));
    for_each_tuple(k, q, |code, v| {
        let s: i128 = coeffs.iter().zip(v).map(|(c, x)| c * *x as i128).sum();
        all.push((s, code));
    });
    all.sort_unstable();

    let mut points = Vec::with_capacity(all.len());
    let mut codes = Vec::with_capacity(all.len());
    let mut min_gap: Option<i128> = None;
    let mut collisions = 0u64;
    let mut last: Option<i128> = None;
    for (s, code) in all {
        if let Some(prev) = last {
            let gap = s - prev;
            min_gap = Some(min_gap.map_or(gap, |m| m.min(gap)));
            if gap == 0 {
                collisions += 1;
                continue;
            }
        }
        last = Some(s);
        points.push(a * (s as f64) / denom_f);
        codes.push(code);
    }
    let d_min = min_gap.map_or(f64::INFINITY, |gap| a * gap as f64 / denom_f);
    Ok(ReceivedConstellation {
        k,
        q,
        a,
        points,
        codes,
        gamma: if collisions > 0 {
            Gamma::Violated
        } else {
            Gamma::Holds
        },
        d_min,
        collisions,
    })
}

/// Smallest gap of an arbitrary point set (sorted internally).
pub fn min_distance_of(points: &[f64]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::UndefinedDistance {
            points: points.len(),
        });
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min))
}

/// Standard Gaussian upper tail `P(N(0,1) > x)`.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Hard-decoding error bounds for unit-variance noise:
/// `(Qfunc(d_min / 2), exp(-d_min^2 / 8))`.
pub fn pe_upper_bound(d_min: f64) -> Result<(f64, f64)> {
    if d_min.is_nan() || d_min < 0.0 {
        return Err(Error::Parameter(format!("d_min must be >= 0, got {d_min}")));
    }
    if d_min.is_infinite() {
        return Ok((0.0, 0.0));
    }
    Ok((gaussian_tail(d_min / 2.0), (-d_min * d_min / 8.0).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn norm(g: &[f64]) -> NormalizedGains {
        NormalizedGains::from_ratios(g).unwrap()
    }

    fn brute_min_distance(g: &[f64], q: u32, a: f64) -> f64 {
        let mut pts = Vec::new();
        for_each_tuple(g.len(), q, |_, v| pts.push(point_value(g, v, a)));
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i != j {
                    best = best.min((pts[i] - pts[j]).abs());
                }
            }
        }
        best
    }

    #[test]
    fn select_params_examples() {
        let s = select_params(1e6, 2, 0.1).unwrap();
        assert_eq!(s.q, 19);
        assert_relative_eq!(s.a, 51.794_746_792_312_11, max_relative = 1e-12);

        let s = select_params(1.0, 2, 0.1).unwrap();
        assert_eq!((s.q, s.a), (1, 1.0));

        let s = select_params(1e4, 2, 0.5).unwrap();
        assert_eq!(s.q, 2);
        assert_relative_eq!(s.a, 39.810_717_055_349_73, max_relative = 1e-12);

        assert!(matches!(
            select_params(0.5, 2, 0.1),
            Err(Error::InfeasiblePower { .. })
        ));
        assert!(select_params(10.0, 1, 0.1).is_err());
        assert!(select_params(10.0, 2, 1.0).is_err());
    }

    #[test]
    fn power_feasibility_grid() {
        for e in 0..=16 {
            let p = 10f64.powi(e);
            for k in 2..=6 {
                for eps in [0.01, 0.1, 0.5] {
                    let s = select_params(p, k, eps).unwrap();
                    assert!(s.peak_energy() <= p, "P={p} K={k} eps={eps}");
                    assert!(s.q >= 1);
                }
            }
        }
    }

    #[test]
    fn sqrt2_constellations() {
        let r2 = 2f64.sqrt();
        let rc = received_constellation(&norm(&[r2, 1.0]), 1, 1.0).unwrap();
        assert_eq!(rc.points().len(), 9);
        assert_eq!(rc.gamma(), Gamma::Holds);
        // For Q = 1 the pairwise differences are bounded by 2, so the
        // best form is |sqrt2 - 1|.
        assert_eq!(rc.d_min(), brute_min_distance(&[r2, 1.0], 1, 1.0));
        assert_relative_eq!(rc.d_min(), r2 - 1.0, max_relative = 1e-12);

        let rc = received_constellation(&norm(&[r2, 1.0]), 2, 1.0).unwrap();
        assert_relative_eq!(rc.min_distance().unwrap(), 3.0 - 2.0 * r2, max_relative = 1e-12);
        let rc10 = received_constellation(&norm(&[r2, 1.0]), 2, 10.0).unwrap();
        assert_relative_eq!(rc10.min_distance().unwrap(), 10.0 * (3.0 - 2.0 * r2), max_relative = 1e-12);
    }

    #[test]
    fn rational_float_gains_collide() {
        let rc = received_constellation(&norm(&[0.5, 1.0]), 2, 1.0).unwrap();
        assert_eq!(rc.gamma(), Gamma::Violated);
        assert_eq!(rc.d_min(), 0.0);
        assert!(rc.points().len() < 25);
        assert!(matches!(rc.decompose(1.0), Err(Error::Ambiguous(_))));
    }

    #[test]
    fn exact_rational_gains_collide() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let g = NormalizedGains::from_exact_ratios(&[r(1, 2), r(1, 1)]).unwrap();
        let rc = received_constellation(&g, 2, 1.0).unwrap();
        assert_eq!(rc.gamma(), Gamma::Violated);
        assert_eq!(rc.d_min(), 0.0);
        // points are the half-integers -3..3
        assert_eq!(rc.points().len(), 13);

        let g = NormalizedGains::from_exact_ratios(&[r(7, 3), r(1, 1)]).unwrap();
        let rc = received_constellation(&g, 1, 3.0).unwrap();
        assert_eq!(rc.gamma(), Gamma::Holds);
        assert_relative_eq!(rc.d_min(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn near_collision_is_suspect() {
        let rc = received_constellation(&norm(&[0.5 + 1e-13, 1.0]), 2, 1.0).unwrap();
        assert_eq!(rc.gamma(), Gamma::Suspect);
        assert!(rc.decompose(0.0).is_err());
    }

    #[test]
    fn single_point_constellation() {
        let rc = received_constellation(&norm(&[1.7, 0.3, 1.0]), 0, 1.0).unwrap();
        assert_eq!(rc.points(), &[0.0]);
        assert_eq!(rc.d_min(), f64::INFINITY);
        assert!(matches!(rc.min_distance(), Err(Error::UndefinedDistance { points: 1 })));
        assert_eq!(pe_upper_bound(rc.d_min()).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn min_distance_of_point_set() {
        assert_eq!(min_distance_of(&[0.0, 1.0, 3.0]).unwrap(), 1.0);
        assert_eq!(min_distance_of(&[3.0, 0.0, 1.0]).unwrap(), 1.0);
        assert!(min_distance_of(&[2.0]).is_err());
    }

    #[test]
    fn decompose_examples() {
        let r2 = 2f64.sqrt();
        let g = norm(&[r2, 1.0]);
        let rc = received_constellation(&g, 1, 1.0).unwrap();
        assert_eq!(rc.decompose(point_value(g.g(), &[1, -1], 1.0)).unwrap(), vec![1, -1]);
        assert_eq!(rc.decompose(0.0).unwrap(), vec![0, 0]);
        assert_eq!(rc.decompose(-0.0).unwrap(), vec![0, 0]);
        assert!(matches!(rc.decompose(0.123), Err(Error::NotInConstellation(_))));
        for (i, &p) in rc.points().iter().enumerate() {
            let v = rc.decompose(p).unwrap();
            assert_eq!(v, rc.tuple_of(i));
            assert_eq!(point_value(g.g(), &v, 1.0), p);
        }
    }

    #[test]
    fn enumeration_cap() {
        let g = norm(&[1.1, 1.3, 1.7, 1.0]);
        let err = received_constellation_capped(&g, 10, 1.0, 1000).unwrap_err();
        assert!(matches!(err, Error::Size { required, .. } if required == 21f64.powi(4)));
    }

    #[test]
    fn tail_bounds() {
        assert_eq!(pe_upper_bound(0.0).unwrap(), (0.5, 1.0));
        let (t, e) = pe_upper_bound(4.0).unwrap();
        assert_relative_eq!(t, 0.022_750_131_948_179_21, max_relative = 1e-12);
        assert_relative_eq!(e, (-2.0f64).exp(), max_relative = 1e-15);
        let (t, e) = pe_upper_bound(10.0).unwrap();
        assert_relative_eq!(t, 2.866_515_718_791_939e-7, max_relative = 1e-10);
        assert_relative_eq!(e, 3.726_653_172_078_671e-6, max_relative = 1e-12);
        assert!(pe_upper_bound(-1.0).is_err());
    }

    #[test]
    fn tail_matches_quadrature() {
        // Simpson integration of the Gaussian density over [x, x + 12].
        let simpson = |x: f64| {
            let n = 20_000;
            let h = 12.0 / n as f64;
            let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let mut s = f(x) + f(x + 12.0);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(x + i as f64 * h);
            }
            s * h / 3.0
        };
        for x in [0.0, 0.5, 1.0, 2.0, 3.4] {
            assert_relative_eq!(gaussian_tail(x), simpson(x), max_relative = 1e-9);
        }
    }

    #[test]
    fn gamma_holds_for_independent_gains() {
        let (r2, r3) = (2f64.sqrt(), 3f64.sqrt());
        for q in 1..=4 {
            assert!(received_constellation(&norm(&[r2, 1.0]), q, 1.0).unwrap().gamma().holds());
            assert!(received_constellation(&norm(&[r2, r3, 1.0]), q, 1.0).unwrap().gamma().holds());
        }
    }

    proptest! {
        #[test]
        fn sort_based_equals_pairwise(
            g0 in 0.5f64..2.0, g1 in 0.5f64..2.0, q in 1u32..5, three in any::<bool>(),
        ) {
            let g: Vec<f64> = if three { vec![g0, g1, 1.0] } else { vec![g0, 1.0] };
            let rc = received_constellation(&norm(&g), q, 1.0).unwrap();
            prop_assert_eq!(rc.d_min().to_bits(), brute_min_distance(&g, q, 1.0).to_bits());
        }

        #[test]
        fn d_min_scales_with_a(g0 in 0.5f64..2.0, q in 1u32..6, c in 0.01f64..100.0) {
            let g = norm(&[g0, 1.0]);
            let base = received_constellation(&g, q, 1.0).unwrap().d_min();
            let scaled = received_constellation(&g, q, c).unwrap().d_min();
            prop_assume!(base > 0.0);
            // gaps are differences of rounded points, so the error is
            // relative to the point magnitude rather than to the gap
            let span = 4.0 * q as f64;
            let tol = 1e-12 * c * base + 8.0 * f64::EPSILON * c * span;
            prop_assert!((scaled - c * base).abs() <= tol);
        }

        #[test]
        fn d_min_scaling_on_irrational_gains(c in 0.01f64..1000.0, q in 1u32..5) {
            for g in [vec![2f64.sqrt(), 1.0], vec![2f64.sqrt(), 3f64.sqrt(), 1.0]] {
                let g = norm(&g);
                let base = received_constellation(&g, q, 1.0).unwrap().d_min();
                let scaled = received_constellation(&g, q, c).unwrap().d_min();
                prop_assert!((scaled - c * base).abs() <= 1e-12 * c * base);
            }
        }

        #[test]
        fn tail_below_exp(logd in -6.0f64..2.5) {
            let (t, e) = pe_upper_bound(10f64.powf(logd)).unwrap();
            prop_assert!(t <= e);
        }

        #[test]
        fn nearest_is_nearest(y in -5.0f64..5.0) {
            let rc = received_constellation(&norm(&[2f64.sqrt(), 1.0]), 2, 1.0).unwrap();
            let i = rc.nearest_index(y);
            let best = rc.points().iter().map(|p| (p - y).abs()).fold(f64::INFINITY, f64::min);
            prop_assert_eq!((rc.points()[i] - y).abs(), best);
        }
    }
}
