//! Random-binning wiretap codes over integer sequences.
//!
//! A [`Codebook`] holds `B * L` sequences of length `n` drawn i.i.d. uniform
//! over `{-Q..Q}^n` and split into `B` message bins of `L` sequences each.
//! To send message `w` a user picks a random member of bin `w`; the
//! receiver hard-decodes every symbol to the nearest received point,
//! splits it into per-user integers and looks the sequences up.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::constellation::ReceivedConstellation;
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

/// Oversampling factor: at most `16 (2Q+1)^n` sequences per codebook.
pub const OVERSAMPLING: u128 = 16;

const FORMAT_TAG: &str = "sdof-codebook v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    q: u32,
    bins: usize,
    per_bin: usize,
    seed: u64,
    user: usize,
    /// Row `b * L + j` is member `j` of bin `b`.
    table: Vec<Vec<i64>>,
    /// First row holding each distinct sequence, and whether the sequence
    /// also appears in another bin.
    index: HashMap<Vec<i64>, (usize, bool)>,
}

fn build_index(table: &[Vec<i64>], per_bin: usize) -> HashMap<Vec<i64>, (usize, bool)> {
    let mut index: HashMap<Vec<i64>, (usize, bool)> = HashMap::with_capacity(table.len());
    for (row, seq) in table.iter().enumerate() {
        index
            .entry(seq.clone())
            .and_modify(|(first, ambiguous)| *ambiguous |= *first / per_bin != row / per_bin)
            .or_insert((row, false));
    }
    index
}

/// Largest `B * L` the oversampling cap allows for `(n, Q)`.
pub fn max_sequences(n: usize, q: u32) -> u128 {
    let base = 2 * q as u128 + 1;
    u32::try_from(n)
        .ok()
        .and_then(|n| base.checked_pow(n))
        .and_then(|m| m.checked_mul(OVERSAMPLING))
        .unwrap_or(u128::MAX)
}

/// Draws the sequences of user `user` and shuffles them into equal bins.
pub fn build_codebook(n: usize, q: u32, bins: usize, per_bin: usize, seed: u64, user: usize) -> Result<Codebook> {
    if n == 0 || q == 0 || bins == 0 || per_bin == 0 {
        return Err(Error::Parameter(format!(
            "need n, Q, B, L >= 1, got n={n} Q={q} B={bins} L={per_bin}"
        )));
    }
    let requested = bins as u128 * per_bin as u128;
    let max = max_sequences(n, q);
    if requested > max {
        return Err(Error::RateInfeasible { requested, max });
    }
    let total = bins * per_bin;
    let qi = q as i64;
    let mut symbols = rng::stream(seed, Purpose::CodebookSymbols, user as u64, 0);
    let drawn: Vec<Vec<i64>> = (0..total)
        .map(|_| (0..n).map(|_| symbols.gen_range(-qi..=qi)).collect())
        .collect();
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng::stream(seed, Purpose::Binning, user as u64, 0));
    let table: Vec<Vec<i64>> = order.iter().map(|&i| drawn[i].clone()).collect();
    let index = build_index(&table, per_bin);
    Ok(Codebook {
        n,
        q,
        bins,
        per_bin,
        seed,
        user,
        table,
        index,
    })
}

impl Codebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn per_bin(&self) -> usize {
        self.per_bin
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn user(&self) -> usize {
        self.user
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Rate in bits per channel use, `log2(B) / n`.
    pub fn rate(&self) -> f64 {
        (self.bins as f64).log2() / self.n as f64
    }

    /// The `L` sequences of bin `w`.
    pub fn bin(&self, w: usize) -> Result<&[Vec<i64>]> {
        if w >= self.bins {
            return Err(Error::Message {
                index: w,
                bins: self.bins,
            });
        }
        Ok(&self.table[w * self.per_bin..(w + 1) * self.per_bin])
    }

    /// Number of distinct sequences that occur in more than one bin.
    pub fn cross_bin_duplicates(&self) -> usize {
        self.index.values().filter(|(_, amb)| *amb).count()
    }

    /// Bin of the first row equal to `seq`, and whether `seq` also lies in
    /// some other bin.
    pub fn lookup(&self, seq: &[i64]) -> Option<(usize, bool)> {
        self.index.get(seq).map(|&(row, amb)| (row / self.per_bin, amb))
    }

    /// Stochastic encoder: a uniformly chosen member of bin `w`, reproducible
    /// from `seed`.
    pub fn encode(&self, w: usize, seed: u64) -> Result<&[i64]> {
        let members = self.bin(w)?;
        let mut rng = rng::stream(seed, Purpose::Encoder, self.user as u64, w as u64);
        Ok(&members[rng.gen_range(0..self.per_bin)])
    }

    /// Versioned text form: a header line, then one sequence per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{FORMAT_TAG} n={} q={} bins={} per_bin={} seed={} user={}\n",
            self.n, self.q, self.bins, self.per_bin, self.seed, self.user
        );
        for seq in &self.table {
            let line: Vec<String> = seq.iter().map(i64::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|h| h.strip_prefix(FORMAT_TAG))
            .ok_or_else(|| Error::Parse(format!("missing `{FORMAT_TAG}` header")))?;
        let mut fields = HashMap::new();
        for item in header.split_whitespace() {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{item}`")))?;
            let v: u64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad header value `{item}`")))?;
            fields.insert(k, v);
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::Parse(format!("header lacks `{k}`")))
        };
        let (n, q, bins, per_bin) = (get("n")? as usize, get("q")?, get("bins")? as usize, get("per_bin")? as usize);
        let (seed, user) = (get("seed")?, get("user")? as usize);
        let q = u32::try_from(q).map_err(|_| Error::Parse("q out of range".into()))?;
        if n == 0 || q == 0 || bins == 0 || per_bin == 0 {
            return Err(Error::Parse("header sizes must be >= 1".into()));
        }
        let table: Vec<Vec<i64>> = lines
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<i64>().map_err(|_| Error::Parse(format!("bad symbol `{t}`"))))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<_>>()?;
        if table.len() != bins * per_bin {
            return Err(Error::Parse(format!(
                "{} sequences listed, header implies {}",
                table.len(),
                bins * per_bin
            )));
        }
        if let Some(seq) = table
            .iter()
            .find(|s| s.len() != n || s.iter().any(|v| v.unsigned_abs() > q as u64))
        {
            return Err(Error::Parse(format!("sequence {seq:?} is not in [-{q}, {q}]^{n}")));
        }
        let index = build_index(&table, per_bin);
        Ok(Self {
            n,
            q,
            bins,
            per_bin,
            seed,
            user,
            table,
            index,
        })
    }
}

/// Encoder free function mirroring [`Codebook::encode`].
pub fn encode(codebook: &Codebook, w: usize, seed: u64) -> Result<Vec<i64>> {
    codebook.encode(w, seed).map(<[i64]>::to_vec)
}

/// `A * x / h_e`, the channel input that puts `x` on the integer lattice
/// at the eavesdropper.
pub fn scale_to_channel(x_tilde: &[i64], a: f64, h_e: f64) -> Result<Vec<f64>> {
    if h_e == 0.0 || !h_e.is_finite() {
        return Err(Error::Domain {
            index: 0,
            reason: format!("eavesdropper gain {h_e} cannot be divided out"),
        });
    }
    Ok(x_tilde.iter().map(|&v| a * v as f64 / h_e).collect())
}

/// Maps each observation to the nearest received point and splits it into
/// its per-user integers. Output is indexed `[time][user]`.
pub fn hard_decode(y: &[f64], rc: &ReceivedConstellation) -> Result<Vec<Vec<i64>>> {
    rc.require_gamma()?;
    Ok(y.iter().map(|&v| rc.tuple_of(rc.nearest_index(v))).collect())
}

/// Result of looking up one user's decoded sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinDecision {
    /// Bin of the first matching row; `ambiguous` when the sequence also
    /// lies in another bin.
    Bin { bin: usize, ambiguous: bool },
    /// The sequence is not in the codebook.
    Failure,
}

impl BinDecision {
    pub fn bin(self) -> Option<usize> {
        match self {
            BinDecision::Bin { bin, .. } => Some(bin),
            BinDecision::Failure => None,
        }
    }
}

/// Looks up every user's sequence in its codebook.
///
/// `decoded` is indexed `[user][time]`.
pub fn decode_messages(decoded: &[Vec<i64>], codebooks: &[Codebook]) -> Result<Vec<BinDecision>> {
    if decoded.len() != codebooks.len() {
        return Err(Error::Shape(format!(
            "{} decoded sequences for {} codebooks",
            decoded.len(),
            codebooks.len()
        )));
    }
    decoded
        .iter()
        .zip(codebooks)
        .map(|(seq, cb)| {
            if seq.len() != cb.n {
                return Err(Error::Shape(format!(
                    "decoded length {} but codebook length {}",
                    seq.len(),
                    cb.n
                )));
            }
            Ok(match cb.lookup(seq) {
                Some((bin, ambiguous)) => BinDecision::Bin { bin, ambiguous },
                None => BinDecision::Failure,
            })
        })
        .collect()
}

/// Transposes `[time][user]` symbols into `[user][time]` sequences.
pub fn per_user(symbols: &[Vec<i64>], k: usize) -> Vec<Vec<i64>> {
    (0..k).map(|u| symbols.iter().map(|t| t[u]).collect()).collect()
}
