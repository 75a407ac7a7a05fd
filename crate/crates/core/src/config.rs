//! The `key = value` text format shared by simulation configs and channel
//! specs, plus parsing of gain and probability tokens.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Keys may not repeat.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::model::ChannelGains;
use crate::simulator::{GainsSource, SimConfig};

/// Parsed assignments, keyed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

pub fn parse_key_values(text: &str) -> Result<KeyValues> {
    let mut entries = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
        }
        if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(KeyValues { entries })
}

impl KeyValues {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("missing required key `{key}`")))
    }

    pub fn require_parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        parse_value(key, self.require(key)?)
    }

    pub fn optional_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key).map(|v| parse_value(key, v)).transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.optional_parsed(key)?.unwrap_or(default))
    }

    /// A list separated by commas and/or whitespace.
    pub fn require_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        split_list(self.require(key)?)
            .map(|tok| parse_value(key, tok))
            .collect()
    }

    pub fn reject_unknown<S: AsRef<str>>(&self, allowed: &[S]) -> Result<()> {
        match self
            .entries
            .keys()
            .find(|k| !allowed.iter().any(|a| a.as_ref() == k.as_str()))
        {
            Some(k) => Err(Error::Parse(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{key}`: cannot parse `{value}`")))
}

pub fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

/// A probability written as a decimal or as an exact fraction `a/b`.
pub fn parse_probability(token: &str) -> Result<f64> {
    let v = if token.contains('/') {
        parse_rational(token)?
            .to_f64()
            .ok_or_else(|| Error::Parse(format!("`{token}` out of range")))?
    } else {
        token
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("`{token}` is not a number")))?
    };
    Ok(v)
}

pub fn parse_rational(token: &str) -> Result<BigRational> {
    let (num, den) = token.split_once('/').unwrap_or((token, "1"));
    let num: BigInt = num
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{token}` is not a fraction")))?;
    let den: BigInt = den
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{token}` is not a fraction")))?;
    if den == BigInt::from(0) {
        return Err(Error::Parse(format!("`{token}` has a zero denominator")));
    }
    Ok(BigRational::new(num, den))
}

/// A list of gains. When every token is an integer or a fraction and at
/// least one is a fraction, the values are kept exact; otherwise they are
/// binary64.
#[derive(Debug, Clone, PartialEq)]
pub enum GainList {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl GainList {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            GainList::Exact(v) => v.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
            GainList::Float(v) => v.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GainList::Exact(v) => v.len(),
            GainList::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn parse_gain_list(s: &str) -> Result<GainList> {
    let tokens: Vec<&str> = split_list(s).collect();
    if tokens.is_empty() {
        return Err(Error::Parse("empty gain list".into()));
    }
    let is_int = |t: &str| t.parse::<BigInt>().is_ok();
    let any_fraction = tokens.iter().any(|t| t.contains('/'));
    if any_fraction && tokens.iter().all(|t| t.contains('/') || is_int(t)) {
        return tokens
            .iter()
            .map(|t| parse_rational(t))
            .collect::<Result<_>>()
            .map(GainList::Exact);
    }
    let values = tokens
        .iter()
        .map(|t| parse_probability(t))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("gain {v} is not finite")));
    }
    Ok(GainList::Float(values))
}

/// Builds channel gains from two lists; exact only if both lists are.
pub fn gains_from_lists(h: &GainList, h_e: &GainList) -> Result<ChannelGains> {
    match (h, h_e) {
        (GainList::Exact(a), GainList::Exact(b)) => ChannelGains::from_rationals(a.clone(), b.clone()),
        (GainList::Exact(a), GainList::Float(b)) if b.iter().all(|v| v.fract() == 0.0) => {
            let b = b.iter().map(|v| BigRational::from_float(*v).expect("finite")).collect();
            ChannelGains::from_rationals(a.clone(), b)
        }
        _ => ChannelGains::new(h.to_f64(), h_e.to_f64()),
    }
}

const SIM_KEYS: &[&str] = &[
    "k",
    "h",
    "h_e",
    "gains_seed",
    "gains_low",
    "gains_high",
    "epsilon",
    "p_grid",
    "trials",
    "n",
    "master_seed",
    "noise_variance",
    "bin_width",
    "workers",
    "per_bin",
    "leakage_samples",
];

/// Parses a simulation config.
///
/// Required: `k`, `epsilon`, `p_grid`, `trials`, `master_seed`, and either
/// `h` with `h_e` or `gains_seed` (with optional `gains_low`, `gains_high`).
pub fn parse_sim_config(text: &str) -> Result<SimConfig> {
    let map = parse_key_values(text)?;
    map.reject_unknown(SIM_KEYS)?;
    let k: usize = map.require_parsed("k")?;
    let gains = match (map.get("h"), map.get("h_e"), map.get("gains_seed")) {
        (Some(h), Some(h_e), None) => {
            let gains = gains_from_lists(&parse_gain_list(h)?, &parse_gain_list(h_e)?)?;
            if gains.k() != k {
                return Err(Error::Parse(format!("`h` lists {} gains but k = {k}", gains.k())));
            }
            GainsSource::Explicit(gains)
        }
        (None, None, Some(_)) => GainsSource::Sampled {
            seed: map.require_parsed("gains_seed")?,
            low: map.parsed_or("gains_low", 0.5)?,
            high: map.parsed_or("gains_high", 2.0)?,
        },
        (Some(_), None, _) => return Err(Error::Parse("missing required key `h_e`".into())),
        (None, Some(_), _) => return Err(Error::Parse("missing required key `h`".into())),
        (Some(_), Some(_), Some(_)) => {
            return Err(Error::Parse("give either `h`/`h_e` or `gains_seed`, not both".into()))
        }
        (None, None, None) => return Err(Error::Parse("missing required key `h` (or `gains_seed`)".into())),
    };
    let defaults = SimConfig::default();
    let cfg = SimConfig {
        k,
        gains,
        epsilon: map.require_parsed("epsilon")?,
        p_grid: map.require_list("p_grid")?,
        trials: map.require_parsed("trials")?,
        master_seed: map.require_parsed("master_seed")?,
        n: map.parsed_or("n", defaults.n)?,
        noise_variance: map.parsed_or("noise_variance", defaults.noise_variance)?,
        bin_width: map.optional_parsed("bin_width")?,
        workers: map.parsed_or("workers", defaults.workers)?,
        per_bin: map.parsed_or("per_bin", defaults.per_bin)?,
        leakage_samples: map.parsed_or("leakage_samples", defaults.leakage_samples)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "k = 2\nh = 1.4142135623730951, 1\nh_e = 1 1\nepsilon = 0.5\n\
                        p_grid = 1e2, 1e4\ntrials = 10\nmaster_seed = 7\n";

    #[test]
    fn key_values() {
        let kv = parse_key_values("# header\n a = 1 # note\n\nb=x y\n").unwrap();
        assert_eq!(kv.get("a"), Some("1"));
        assert_eq!(kv.get("b"), Some("x y"));
        assert!(parse_key_values("a = 1\na = 2").is_err());
        assert!(parse_key_values("just words").is_err());
        assert!(kv.reject_unknown(&["a"]).is_err());
        assert!(kv.reject_unknown(&["a", "b"]).is_ok());
    }

    #[test]
    fn tokens() {
        assert_eq!(parse_probability("1/4").unwrap(), 0.25);
        assert_eq!(parse_probability("0.5").unwrap(), 0.5);
        assert!(parse_probability("1/0").is_err());
        assert!(matches!(parse_gain_list("1, 1/2").unwrap(), GainList::Exact(_)));
        assert!(matches!(parse_gain_list("1.41421356237,1").unwrap(), GainList::Float(_)));
        assert!(matches!(parse_gain_list("1 2").unwrap(), GainList::Float(_)));
        assert_eq!(parse_gain_list("1.5, 1/2").unwrap().to_f64(), vec![1.5, 0.5]);
        assert!(parse_gain_list("").is_err());
    }

    #[test]
    fn sim_config() {
        let cfg = parse_sim_config(BASE).unwrap();
        assert_eq!(cfg.k, 2);
        assert_eq!(cfg.p_grid, vec![100.0, 10_000.0]);
        assert_eq!(cfg.noise_variance, 1.0);
    }

    #[test]
    fn sim_config_errors_name_the_key() {
        let missing = BASE.replace("trials = 10\n", "");
        let err = parse_sim_config(&missing).unwrap_err().to_string();
        assert!(err.contains("`trials`"), "{err}");
        let unknown = format!("{BASE}colour = red\n");
        assert!(parse_sim_config(&unknown).unwrap_err().to_string().contains("colour"));
        let decreasing = BASE.replace("1e2, 1e4", "1e4, 1e2");
        assert!(parse_sim_config(&decreasing).is_err());
    }
}
