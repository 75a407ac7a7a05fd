//! Achievable secrecy region of a finite-alphabet wiretap MAC.
//!
//! For independent auxiliaries `U_k`, channel prefixes `P(x_k | u_k)` and a
//! channel `P(y, z | x_1..x_K)`, the rate tuples satisfying
//!
//! ```text
//! sum_{i in S} R_i <= I(U_S; Y | U_{S^c})      for every nonempty S != {1..K}
//! sum_k R_k        <= [I(U; Y) - I(U; Z)]^+
//! ```
//!
//! are achievable with perfect secrecy.

use super::entropy_bits;
use crate::error::{Error, Result};

/// Largest joint table `|U_1|...|U_K| |Y| |Z|` the region computation builds.
pub const JOINT_TABLE_CAP: usize = 10_000_000;

const PMF_TOLERANCE: f64 = 1e-12;

/// A discrete memoryless wiretap MAC with its input distribution.
///
/// Joint indices over users are mixed radix with user 1 most significant.
/// Channel rows are indexed by the joint `x` index; each row lists
/// `P(y, z | x)` at position `y * |Z| + z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMacSpec {
    p_u: Vec<Vec<f64>>,
    p_x_given_u: Vec<Vec<Vec<f64>>>,
    y_size: usize,
    z_size: usize,
    p_yz_given_x: Vec<Vec<f64>>,
}

fn check_pmf(row: &[f64], what: &str) -> Result<()> {
    if row.is_empty() {
        return Err(Error::Normalization(format!("{what} is empty")));
    }
    if let Some(p) = row.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
        return Err(Error::Normalization(format!("{what} has invalid entry {p}")));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > PMF_TOLERANCE + row.len() as f64 * f64::EPSILON {
        return Err(Error::Normalization(format!("{what} sums to {total}")));
    }
    Ok(())
}

impl DiscreteMacSpec {
    pub fn new(
        p_u: Vec<Vec<f64>>,
        p_x_given_u: Vec<Vec<Vec<f64>>>,
        y_size: usize,
        z_size: usize,
        p_yz_given_x: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = p_u.len();
        if k == 0 {
            return Err(Error::Parameter("need at least one user".into()));
        }
        if p_x_given_u.len() != k {
            return Err(Error::Shape(format!(
                "{k} input marginals but {} channel prefixes",
                p_x_given_u.len()
            )));
        }
        if y_size == 0 || z_size == 0 {
            return Err(Error::Shape("output alphabets must be nonempty".into()));
        }
        let mut nx = 1usize;
        for (user, (pu, pxu)) in p_u.iter().zip(&p_x_given_u).enumerate() {
            check_pmf(pu, &format!("P(u_{})", user + 1))?;
            if pxu.len() != pu.len() {
                return Err(Error::Shape(format!(
                    "user {}: {} rows in P(x|u) for |U| = {}",
                    user + 1,
                    pxu.len(),
                    pu.len()
                )));
            }
            let x_size = pxu[0].len();
            for (u, row) in pxu.iter().enumerate() {
                if row.len() != x_size {
                    return Err(Error::Shape(format!("user {}: ragged P(x|u)", user + 1)));
                }
                check_pmf(row, &format!("P(x_{} | u = {u})", user + 1))?;
            }
            nx = nx.checked_mul(x_size).ok_or_else(|| Error::Shape("input alphabet overflow".into()))?;
        }
        if p_yz_given_x.len() != nx {
            return Err(Error::Shape(format!(
                "channel has {} rows, joint input alphabet has {nx}",
                p_yz_given_x.len()
            )));
        }
        for (x, row) in p_yz_given_x.iter().enumerate() {
            if row.len() != y_size * z_size {
                return Err(Error::Shape(format!(
                    "channel row {x} has {} entries, expected {}",
                    row.len(),
                    y_size * z_size
                )));
            }
            check_pmf(row, &format!("P(y, z | x = {x})"))?;
        }
        Ok(Self {
            p_u,
            p_x_given_u,
            y_size,
            z_size,
            p_yz_given_x,
        })
    }

    pub fn k(&self) -> usize {
        self.p_u.len()
    }

    pub fn u_sizes(&self) -> Vec<usize> {
        self.p_u.iter().map(Vec::len).collect()
    }

    pub fn x_sizes(&self) -> Vec<usize> {
        self.p_x_given_u.iter().map(|t| t[0].len()).collect()
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn p_u(&self) -> &[Vec<f64>] {
        &self.p_u
    }

    pub fn p_x_given_u(&self) -> &[Vec<Vec<f64>>] {
        &self.p_x_given_u
    }

    pub fn p_yz_given_x(&self) -> &[Vec<f64>] {
        &self.p_yz_given_x
    }

    /// Parses the `key = value` text format:
    ///
    /// ```text
    /// k = 2
    /// u_sizes = 2 2
    /// x_sizes = 2 2
    /// y_size = 3
    /// z_size = 1
    /// p_u.1 = 1/2 1/2
    /// p_x_given_u.1 = 1 0 0 1      # row-major [u][x]
    /// p_yz_given_x = ...            # row-major [x_1..x_K][y][z], x_1 most significant
    /// ```
    ///
    /// Probabilities may be decimals or exact `a/b` fractions.
    pub fn from_text(text: &str) -> Result<Self> {
        let map = crate::config::parse_key_values(text)?;
        let mut allowed: Vec<String> = ["k", "u_sizes", "x_sizes", "y_size", "z_size", "p_yz_given_x"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let k: usize = map.require_parsed("k")?;
        for user in 1..=k {
            allowed.push(format!("p_u.{user}"));
            allowed.push(format!("p_x_given_u.{user}"));
        }
        map.reject_unknown(&allowed)?;
        let u_sizes: Vec<usize> = map.require_list("u_sizes")?;
        let x_sizes: Vec<usize> = map.require_list("x_sizes")?;
        if u_sizes.len() != k || x_sizes.len() != k {
            return Err(Error::Parse(format!("u_sizes and x_sizes must list {k} sizes")));
        }
        let y_size: usize = map.require_parsed("y_size")?;
        let z_size: usize = map.require_parsed("z_size")?;
        let probs = |key: &str, len: usize| -> Result<Vec<f64>> {
            let v = map
                .require(key)?
                .split_whitespace()
                .map(crate::config::parse_probability)
                .collect::<Result<Vec<f64>>>()?;
            if v.len() != len {
                return Err(Error::Parse(format!("{key}: expected {len} values, got {}", v.len())));
            }
            Ok(v)
        };
        let mut p_u = Vec::with_capacity(k);
        let mut p_x_given_u = Vec::with_capacity(k);
        for user in 0..k {
            p_u.push(probs(&format!("p_u.{}", user + 1), u_sizes[user])?);
            let flat = probs(&format!("p_x_given_u.{}", user + 1), u_sizes[user] * x_sizes[user])?;
            p_x_given_u.push(flat.chunks(x_sizes[user]).map(<[f64]>::to_vec).collect());
        }
        let nx: usize = x_sizes.iter().product();
        let flat = probs("p_yz_given_x", nx * y_size * z_size)?;
        let channel = flat.chunks(y_size * z_size).map(<[f64]>::to_vec).collect();
        Self::new(p_u, p_x_given_u, y_size, z_size, channel)
    }

    /// Renders the channel description in the format read by [`DiscreteMacSpec::from_text`].
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|p| format!("{p:?}")).collect::<Vec<_>>().join(" ");
        let sizes = |v: Vec<usize>| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let mut out = format!(
            "k = {}\nu_sizes = {}\nx_sizes = {}\ny_size = {}\nz_size = {}\n",
            self.k(),
            sizes(self.u_sizes()),
            sizes(self.x_sizes()),
            self.y_size,
            self.z_size
        );
        for (user, (pu, pxu)) in self.p_u.iter().zip(&self.p_x_given_u).enumerate() {
            out += &format!("p_u.{} = {}\n", user + 1, join(pu));
            out += &format!("p_x_given_u.{} = {}\n", user + 1, join(&pxu.concat()));
        }
        out += &format!("p_yz_given_x = {}\n", join(&self.p_yz_given_x.concat()));
        out
    }
}

/// Constraint set of the achievable region.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion {
    pub k: usize,
    /// `(subset bitmask, bound in bits)` for every nonempty proper subset;
    /// bit `i` stands for user `i + 1`.
    pub constraints: Vec<(u32, f64)>,
    /// `[I(U; Y) - I(U; Z)]^+`.
    pub sum_bound: f64,
    pub i_uy: f64,
    pub i_uz: f64,
}

impl RateRegion {
    pub fn bound_for(&self, mask: u32) -> Option<f64> {
        self.constraints.iter().find(|(m, _)| *m == mask).map(|(_, b)| *b)
    }
}

fn mixed_radix(index: usize, sizes: &[usize]) -> Vec<usize> {
    let mut rest = index;
    let mut digits = vec![0; sizes.len()];
    for (d, &s) in digits.iter_mut().zip(sizes).rev() {
        *d = rest % s;
        rest /= s;
    }
    digits
}

/// Computes every region constraint from the joint law of `(U, Y, Z)`.
pub fn achievable_region(spec: &DiscreteMacSpec) -> Result<RateRegion> {
    let k = spec.k();
    if k > 20 {
        return Err(Error::Parameter(format!("at most 20 users supported, got {k}")));
    }
    let u_sizes = spec.u_sizes();
    let x_sizes = spec.x_sizes();
    let nu: usize = u_sizes.iter().product();
    let nx: usize = x_sizes.iter().product();
    let (ny, nz) = (spec.y_size, spec.z_size);
    let cells = nu as f64 * ny as f64 * nz as f64;
    if cells > JOINT_TABLE_CAP as f64 {
        return Err(Error::Size {
            what: "joint table entries",
            required: cells,
            cap: JOINT_TABLE_CAP as f64,
        });
    }

    // P(u, y) and P(u, z), with x summed out.
    let mut p_uy = vec![0.0; nu * ny];
    let mut p_uz = vec![0.0; nu * nz];
    let x_digits: Vec<Vec<usize>> = (0..nx).map(|x| mixed_radix(x, &x_sizes)).collect();
    for u in 0..nu {
        let ud = mixed_radix(u, &u_sizes);
        let pu: f64 = ud.iter().enumerate().map(|(i, &v)| spec.p_u[i][v]).product();
        if pu == 0.0 {
            continue;
        }
        for (x, xd) in x_digits.iter().enumerate() {
            let px: f64 = xd
                .iter()
                .enumerate()
                .map(|(i, &v)| spec.p_x_given_u[i][ud[i]][v])
                .product();
            let w = pu * px;
            if w == 0.0 {
                continue;
            }
            let row = &spec.p_yz_given_x[x];
            for y in 0..ny {
                for z in 0..nz {
                    let p = w * row[y * nz + z];
                    p_uy[u * ny + y] += p;
                    p_uz[u * nz + z] += p;
                }
            }
        }
    }

    let h_u = entropy_bits((0..nu).map(|u| p_uy[u * ny..(u + 1) * ny].iter().sum::<f64>()));
    let h_y = entropy_bits((0..ny).map(|y| (0..nu).map(|u| p_uy[u * ny + y]).sum::<f64>()));
    let h_z = entropy_bits((0..nz).map(|z| (0..nu).map(|u| p_uz[u * nz + z]).sum::<f64>()));
    let h_uy = entropy_bits(p_uy.iter().copied());
    let h_uz = entropy_bits(p_uz.iter().copied());
    let i_uy = (h_u + h_y - h_uy).max(0.0);
    let i_uz = (h_u + h_z - h_uz).max(0.0);

    // I(U_S; Y | U_Sc) = H(U_Sc, Y) - H(U_Sc) - H(U, Y) + H(U)
    let full = (1u32 << k) - 1;
    let mut constraints = Vec::new();
    let u_digits: Vec<Vec<usize>> = (0..nu).map(|u| mixed_radix(u, &u_sizes)).collect();
    for mask in 1..full {
        let rest: Vec<usize> = (0..k).filter(|i| mask & (1 << i) == 0).collect();
        let rest_sizes: Vec<usize> = rest.iter().map(|&i| u_sizes[i]).collect();
        let n_rest: usize = rest_sizes.iter().product();
        let mut p_ry = vec![0.0; n_rest * ny];
        for (u, ud) in u_digits.iter().enumerate() {
            let r = rest.iter().fold(0, |acc, &i| acc * u_sizes[i] + ud[i]);
            for y in 0..ny {
                p_ry[r * ny + y] += p_uy[u * ny + y];
            }
        }
        let h_r = entropy_bits((0..n_rest).map(|r| p_ry[r * ny..(r + 1) * ny].iter().sum::<f64>()));
        let h_ry = entropy_bits(p_ry.iter().copied());
        let bound = (h_ry - h_r - h_uy + h_u).max(0.0);
        constraints.push((mask, bound));
    }

    Ok(RateRegion {
        k,
        constraints,
        sum_bound: (i_uy - i_uz).max(0.0),
        i_uy,
        i_uz,
    })
}

/// Membership test with `1e-9` slack on every constraint.
pub fn region_contains(region: &RateRegion, rates: &[f64]) -> Result<bool> {
    const SLACK: f64 = 1e-9;
    if rates.len() != region.k {
        return Err(Error::Shape(format!(
            "{} rates for {} users",
            rates.len(),
            region.k
        )));
    }
    if let Some(r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(Error::Parameter(format!("rate {r} must be finite and >= 0")));
    }
    let subset_ok = region.constraints.iter().all(|&(mask, bound)| {
        let s: f64 = (0..region.k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| rates[i])
            .sum();
        s <= bound + SLACK
    });
    Ok(subset_ok && rates.iter().sum::<f64>() <= region.sum_bound + SLACK)
}
