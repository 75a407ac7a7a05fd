//! Seeded Monte Carlo experiments over a grid of transmit powers.
//!
//! Every random draw comes from a stream addressed by the master seed, the
//! grid index and the trial index (see [`crate::rng`]), and trial outcomes
//! are combined by integer sums. Reports are therefore identical for any
//! number of worker threads.

use rand::Rng;
use rayon::prelude::*;

use crate::codec::{self, build_codebook, hard_decode, scale_to_channel, BinDecision, Codebook};
use crate::constellation::{pe_upper_bound, received_constellation, select_params, ReceivedConstellation};
use crate::error::{Error, Result};
use crate::model::{effective_power, normalize_gains, sample_gains, transmit, ChannelGains, NoiseModel};
use crate::report::{Cell, Sidecar, Table};
use crate::rng::{self, derive_seed, Purpose};
use crate::secrecy::{leakage_estimate, sdof_fit, sum_rate_lower_bound, SlopeFit, MIN_LEAKAGE_SAMPLES};

/// Largest number of codebook symbols (`B * L * n`, per user) a block run
/// may allocate.
pub const BLOCK_TABLE_CAP: u64 = 10_000_000;

const WILSON_Z: f64 = 1.959_963_984_540_054;
const LEAKAGE_CHUNK: usize = 4096;

// Major-index offsets keep the noise streams of different experiments apart.
const BLOCK_STREAMS: u64 = 1 << 48;
const LEAKAGE_STREAMS: u64 = 2 << 48;

/// Where the channel gains come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GainsSource {
    Explicit(ChannelGains),
    /// All `2K` gains i.i.d. uniform on `[low, high]`.
    Sampled { seed: u64, low: f64, high: f64 },
}

impl GainsSource {
    pub fn resolve(&self, k: usize) -> Result<ChannelGains> {
        match self {
            GainsSource::Explicit(g) => Ok(g.clone()),
            GainsSource::Sampled { seed, low, high } => sample_gains(*seed, k, *low, *high),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub k: usize,
    pub gains: GainsSource,
    pub epsilon: f64,
    /// Strictly increasing transmit powers, all `> 1`.
    pub p_grid: Vec<f64>,
    pub trials: u64,
    /// Block length of codec runs.
    pub n: usize,
    pub master_seed: u64,
    pub noise_variance: f64,
    /// Quantizer width for leakage runs; `A / 10` when unset.
    pub bin_width: Option<f64>,
    /// Worker threads; `0` lets the thread pool decide.
    pub workers: usize,
    /// Sequences per message bin in codec runs.
    pub per_bin: usize,
    pub leakage_samples: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            k: 2,
            gains: GainsSource::Sampled {
                seed: 0,
                low: 0.5,
                high: 2.0,
            },
            epsilon: 0.5,
            p_grid: vec![1e2, 1e4, 1e6],
            trials: 1000,
            n: 4,
            master_seed: 0,
            noise_variance: 1.0,
            bin_width: None,
            workers: 1,
            per_bin: 4,
            leakage_samples: 100_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Parameter(format!("need k >= 2, got {}", self.k)));
        }
        if let GainsSource::Explicit(g) = &self.gains {
            if g.k() != self.k {
                return Err(Error::Shape(format!("{} gains for k = {}", g.k(), self.k)));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.p_grid.is_empty() {
            return Err(Error::Parameter("p_grid is empty".into()));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
            return Err(Error::Parameter(format!("grid power {p} must be finite and > 1")));
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("p_grid must be strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be >= 1".into()));
        }
        if self.n == 0 || self.per_bin == 0 {
            return Err(Error::Parameter("n and per_bin must be >= 1".into()));
        }
        NoiseModel::new(self.noise_variance)?;
        if let Some(w) = self.bin_width {
            if !(w > 0.0) {
                return Err(Error::Parameter(format!("bin_width must be > 0, got {w}")));
            }
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Parameter(format!("thread pool: {e}")))
    }

    /// Records the configuration in a sidecar.
    pub fn describe(&self, gains: &ChannelGains, sidecar: &mut Sidecar) {
        sidecar.set("k", self.k);
        sidecar.set_list("h", gains.h());
        sidecar.set_list("h_e", gains.h_e());
        if let GainsSource::Sampled { seed, low, high } = &self.gains {
            sidecar.set("gains_seed", seed);
            sidecar.set_real("gains_low", *low);
            sidecar.set_real("gains_high", *high);
        }
        sidecar.set_real("epsilon", self.epsilon);
        sidecar.set_list("p_grid", &self.p_grid);
        sidecar.set("master_seed", self.master_seed);
        sidecar.set("trials", self.trials);
        sidecar.set_real("noise_variance", self.noise_variance);
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Everything a grid point needs before trials start.
struct GridPoint {
    p: f64,
    p_tilde: f64,
    q: u32,
    a: f64,
    /// Constellation seen by the intended receiver, amplitude `A |scale|`.
    rc: ReceivedConstellation,
    /// Sign of the normalization scale; received samples are multiplied by it.
    sign: f64,
}

fn at_power(p: f64) -> impl Fn(Error) -> Error {
    move |e| Error::AtPower { p, source: Box::new(e) }
}

fn prepare(cfg: &SimConfig, gains: &ChannelGains) -> Result<Vec<GridPoint>> {
    cfg.validate()?;
    let ng = normalize_gains(gains)?;
    cfg.p_grid
        .iter()
        .map(|&p| {
            let point = || -> Result<GridPoint> {
                let p_tilde = effective_power(gains, p)?;
                let spec = select_params(p_tilde, cfg.k, cfg.epsilon)?;
                let rc = received_constellation(&ng, spec.q, spec.a * ng.scale().abs())?;
                Ok(GridPoint {
                    p,
                    p_tilde,
                    q: spec.q,
                    a: spec.a,
                    rc,
                    sign: ng.scale().signum(),
                })
            };
            point().map_err(at_power(p))
        })
        .collect()
}

fn draw_tuple(rng: &mut impl Rng, k: usize, q: u32) -> Vec<i64> {
    let q = q as i64;
    (0..k).map(|_| rng.gen_range(-q..=q)).collect()
}

/// One row of a symbol sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub p_tilde: f64,
    pub q: u32,
    pub a: f64,
    pub d_min: f64,
    pub pe_tail_bound: f64,
    pub pe_exp_bound: f64,
    pub pe_mc: f64,
    pub pe_mc_ci_low: f64,
    pub pe_mc_ci_high: f64,
    pub r_sum_bound_bits: f64,
    pub eta_running: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Fit of `r_sum_bound_bits` against `log2(P)/2`; absent for one-point grids.
    pub slope: Option<SlopeFit>,
    pub gains: ChannelGains,
    pub errors: Vec<u64>,
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "P",
    "P_tilde",
    "Q",
    "A",
    "d_min",
    "pe_tail_bound",
    "pe_exp_bound",
    "pe_mc",
    "pe_mc_ci_low",
    "pe_mc_ci_high",
    "r_sum_bound_bits",
    "eta_running",
];

impl SweepReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(SWEEP_COLUMNS);
        for r in &self.rows {
            t.push(vec![
                r.p.into(),
                r.p_tilde.into(),
                r.q.into(),
                r.a.into(),
                r.d_min.into(),
                r.pe_tail_bound.into(),
                r.pe_exp_bound.into(),
                r.pe_mc.into(),
                r.pe_mc_ci_low.into(),
                r.pe_mc_ci_high.into(),
                r.r_sum_bound_bits.into(),
                r.eta_running.into(),
            ]);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }
}

/// Sends `trials` uniformly random symbol tuples at each grid power and
/// counts hard-decoding errors.
pub fn run_symbol_sweep(cfg: &SimConfig) -> Result<SweepReport> {
    let gains = cfg.gains.resolve(cfg.k)?;
    let points = prepare(cfg, &gains)?;
    let noise = NoiseModel::new(cfg.noise_variance)?;
    let pool = cfg.pool()?;
    let mut rows = Vec::with_capacity(points.len());
    let mut errors = Vec::with_capacity(points.len());
    for (idx, gp) in points.iter().enumerate() {
        let run = || -> Result<(SweepRow, u64)> {
            gp.rc.min_distance()?;
            let d_min = gp.rc.d_min();
            let sd = noise.std_dev();
            let (tail, exp) = if sd == 0.0 {
                (0.0, 0.0)
            } else {
                pe_upper_bound(d_min / sd)?
            };
            let trial = |t: u64| -> Result<u64> {
                let mut inputs = rng::stream(cfg.master_seed, Purpose::SymbolInputs, idx as u64, t);
                let v = draw_tuple(&mut inputs, cfg.k, gp.q);
                let x: Vec<Vec<f64>> = v
                    .iter()
                    .zip(gains.h_e())
                    .map(|(&vk, &he)| scale_to_channel(&[vk], gp.a, he))
                    .collect::<Result<_>>()?;
                let noise_seed = derive_seed(cfg.master_seed, Purpose::Trial, idx as u64, t);
                let (y, _) = transmit(&x, &gains, noise, noise_seed)?;
                let decoded = hard_decode(&[gp.sign * y[0]], &gp.rc)?;
                Ok(u64::from(decoded[0] != v))
            };
            let errs = pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(trial)
                    .try_reduce(|| 0, |a, b| Ok(a + b))
            })?;
            let pe = errs as f64 / cfg.trials as f64;
            let (lo, hi) = wilson_interval(errs, cfg.trials);
            let r_sum = sum_rate_lower_bound(cfg.k, gp.q, pe)?;
            let row = SweepRow {
                p: gp.p,
                p_tilde: gp.p_tilde,
                q: gp.q,
                a: gp.a,
                d_min,
                pe_tail_bound: tail,
                pe_exp_bound: exp,
                pe_mc: pe,
                pe_mc_ci_low: lo,
                pe_mc_ci_high: hi,
                r_sum_bound_bits: r_sum,
                eta_running: r_sum / (0.5 * gp.p.log2()),
            };
            Ok((row, errs))
        };
        let (row, errs) = run().map_err(at_power(gp.p))?;
        rows.push(row);
        errors.push(errs);
    }
    let slope = if rows.len() >= 2 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.p, r.r_sum_bound_bits)).collect();
        Some(sdof_fit(&pts)?)
    } else {
        None
    };
    Ok(SweepReport {
        rows,
        slope,
        gains,
        errors,
    })
}

/// One row of a block-coding run.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRow {
    pub p: f64,
    pub q: u32,
    pub a: f64,
    pub n: usize,
    pub bins: usize,
    pub per_bin: usize,
    /// `log2(B) / n` per user.
    pub rate_bits: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub block_error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// User lookups that found no codebook sequence.
    pub decode_failures: u64,
    /// User lookups whose sequence lies in more than one bin.
    pub ambiguous_lookups: u64,
    /// Sequences duplicated across bins, summed over users.
    pub cross_bin_duplicates: usize,
}

pub const BLOCK_COLUMNS: [&str; 15] = [
    "P",
    "Q",
    "A",
    "n",
    "bins",
    "per_bin",
    "rate_bits",
    "trials",
    "block_errors",
    "block_error_rate",
    "ci_low",
    "ci_high",
    "decode_failures",
    "ambiguous_lookups",
    "cross_bin_duplicates",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub rows: Vec<BlockRow>,
    pub gains: ChannelGains,
}

impl BlockReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(BLOCK_COLUMNS);
        for r in &self.rows {
            t.push(vec![
                r.p.into(),
                r.q.into(),
                r.a.into(),
                r.n.into(),
                r.bins.into(),
                r.per_bin.into(),
                r.rate_bits.into(),
                r.trials.into(),
                r.block_errors.into(),
                r.block_error_rate.into(),
                r.ci_low.into(),
                r.ci_high.into(),
                r.decode_failures.into(),
                r.ambiguous_lookups.into(),
                r.cross_bin_duplicates.into(),
            ]);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }
}

/// Number of bins per user: `2^ceil(n R / K)` with `R` the noiseless
/// sum-rate bound.
pub fn bins_for(n: usize, k: usize, q: u32) -> Result<usize> {
    let r_sum = sum_rate_lower_bound(k, q, 0.0)?;
    let exponent = (n as f64 * r_sum / k as f64).ceil();
    if exponent > 40.0 {
        return Err(Error::Size {
            what: "bins per codebook",
            required: exponent.exp2(),
            cap: 2f64.powi(40),
        });
    }
    Ok(1usize << exponent as u32)
}

/// Full pipeline per trial: random messages, stochastic encoding, channel,
/// hard decoding and bin lookup. A block is in error when any user's
/// message is wrong.
pub fn run_block_trials(cfg: &SimConfig) -> Result<BlockReport> {
    let gains = cfg.gains.resolve(cfg.k)?;
    let points = prepare(cfg, &gains)?;
    let noise = NoiseModel::new(cfg.noise_variance)?;

    // Size every codebook before running any trial.
    let mut books: Vec<(usize, Vec<Codebook>)> = Vec::with_capacity(points.len());
    for (idx, gp) in points.iter().enumerate() {
        let build = || -> Result<(usize, Vec<Codebook>)> {
            gp.rc.require_gamma()?;
            let bins = bins_for(cfg.n, cfg.k, gp.q)?;
            let symbols = bins as f64 * cfg.per_bin as f64 * cfg.n as f64;
            if symbols > BLOCK_TABLE_CAP as f64 {
                return Err(Error::Size {
                    what: "codebook symbols per user",
                    required: symbols,
                    cap: BLOCK_TABLE_CAP as f64,
                });
            }
            let seed = derive_seed(cfg.master_seed, Purpose::CodebookSymbols, idx as u64, 0);
            let cbs = (0..cfg.k)
                .map(|u| build_codebook(cfg.n, gp.q, bins, cfg.per_bin, seed, u))
                .collect::<Result<Vec<_>>>()?;
            Ok((bins, cbs))
        };
        books.push(build().map_err(at_power(gp.p))?);
    }

    let pool = cfg.pool()?;
    let mut rows = Vec::with_capacity(points.len());
    for (idx, (gp, (bins, cbs))) in points.iter().zip(&books).enumerate() {
        let bins = *bins;
        let trial = |t: u64| -> Result<(u64, u64, u64)> {
            let mut msg_rng = rng::stream(cfg.master_seed, Purpose::Messages, idx as u64, t);
            let msgs: Vec<usize> = (0..cfg.k).map(|_| msg_rng.gen_range(0..bins)).collect();
            let enc_seed = derive_seed(cfg.master_seed, Purpose::Encoder, idx as u64, t);
            let x: Vec<Vec<f64>> = cbs
                .iter()
                .zip(&msgs)
                .zip(gains.h_e())
                .map(|((cb, &w), &he)| scale_to_channel(cb.encode(w, enc_seed)?, gp.a, he))
                .collect::<Result<_>>()?;
            let noise_seed = derive_seed(cfg.master_seed, Purpose::Trial, BLOCK_STREAMS + idx as u64, t);
            let (y, _) = transmit(&x, &gains, noise, noise_seed)?;
            let y: Vec<f64> = y.iter().map(|v| gp.sign * v).collect();
            let decoded = codec::per_user(&hard_decode(&y, &gp.rc)?, cfg.k);
            let decisions = codec::decode_messages(&decoded, cbs)?;
            let wrong = decisions.iter().zip(&msgs).any(|(d, &w)| d.bin() != Some(w));
            let failures = decisions.iter().filter(|d| **d == BinDecision::Failure).count();
            let ambiguous = decisions
                .iter()
                .filter(|d| matches!(d, BinDecision::Bin { ambiguous: true, .. }))
                .count();
            Ok((u64::from(wrong), failures as u64, ambiguous as u64))
        };
        let (errs, failures, ambiguous) = pool
            .install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(trial)
                    .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))
            })
            .map_err(at_power(gp.p))?;
        let (lo, hi) = wilson_interval(errs, cfg.trials);
        rows.push(BlockRow {
            p: gp.p,
            q: gp.q,
            a: gp.a,
            n: cfg.n,
            bins,
            per_bin: cfg.per_bin,
            rate_bits: cbs[0].rate(),
            trials: cfg.trials,
            block_errors: errs,
            block_error_rate: errs as f64 / cfg.trials as f64,
            ci_low: lo,
            ci_high: hi,
            decode_failures: failures,
            ambiguous_lookups: ambiguous,
            cross_bin_duplicates: cbs.iter().map(Codebook::cross_bin_duplicates).sum(),
        });
    }
    Ok(BlockReport { rows, gains })
}

/// One row of a leakage run.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageRow {
    pub p: f64,
    pub q: u32,
    pub a: f64,
    pub bin_width: f64,
    pub samples: usize,
    pub mi_bits: f64,
    pub reference_bits: f64,
    pub residual_bits: f64,
    pub bias_bound_bits: f64,
    pub occupied_bins: usize,
}

pub const LEAKAGE_COLUMNS: [&str; 10] = [
    "P",
    "Q",
    "A",
    "bin_width",
    "samples",
    "mi_bits",
    "reference_bits",
    "residual_bits",
    "bias_bound_bits",
    "occupied_bins",
];

#[derive(Debug, Clone, PartialEq)]
pub struct LeakageReport {
    pub rows: Vec<LeakageRow>,
    pub gains: ChannelGains,
}

impl LeakageReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(LEAKAGE_COLUMNS);
        for r in &self.rows {
            t.push(vec![
                r.p.into(),
                r.q.into(),
                r.a.into(),
                r.bin_width.into(),
                r.samples.into(),
                r.mi_bits.into(),
                r.reference_bits.into(),
                r.residual_bits.into(),
                r.bias_bound_bits.into(),
                Cell::from(r.occupied_bins),
            ]);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }
}

/// Sends uniformly random tuples through the eavesdropper's channel and
/// estimates what its quantized observation reveals.
pub fn run_leakage(cfg: &SimConfig) -> Result<LeakageReport> {
    if cfg.leakage_samples < MIN_LEAKAGE_SAMPLES {
        return Err(Error::SampleSize {
            got: cfg.leakage_samples,
            need: MIN_LEAKAGE_SAMPLES,
        });
    }
    let gains = cfg.gains.resolve(cfg.k)?;
    cfg.validate()?;
    let noise = NoiseModel::new(cfg.noise_variance)?;
    let pool = cfg.pool()?;
    let chunks = cfg.leakage_samples.div_ceil(LEAKAGE_CHUNK);
    let mut rows = Vec::with_capacity(cfg.p_grid.len());
    for (idx, &p) in cfg.p_grid.iter().enumerate() {
        let run = || -> Result<LeakageRow> {
            let p_tilde = effective_power(&gains, p)?;
            let spec = select_params(p_tilde, cfg.k, cfg.epsilon)?;
            let width = cfg.bin_width.unwrap_or(spec.a / 10.0);
            let chunk = |c: usize| -> Result<Vec<(Vec<i64>, f64)>> {
                let len = LEAKAGE_CHUNK.min(cfg.leakage_samples - c * LEAKAGE_CHUNK);
                let mut inputs = rng::stream(cfg.master_seed, Purpose::LeakageInputs, idx as u64, c as u64);
                let tuples: Vec<Vec<i64>> = (0..len).map(|_| draw_tuple(&mut inputs, cfg.k, spec.q)).collect();
                let x: Vec<Vec<f64>> = (0..cfg.k)
                    .map(|u| {
                        let col: Vec<i64> = tuples.iter().map(|t| t[u]).collect();
                        scale_to_channel(&col, spec.a, gains.h_e()[u])
                    })
                    .collect::<Result<_>>()?;
                let noise_seed =
                    derive_seed(cfg.master_seed, Purpose::Trial, LEAKAGE_STREAMS + idx as u64, c as u64);
                let (_, z) = transmit(&x, &gains, noise, noise_seed)?;
                Ok(tuples.into_iter().zip(z).collect())
            };
            let parts: Vec<Vec<(Vec<i64>, f64)>> =
                pool.install(|| (0..chunks).into_par_iter().map(chunk).collect::<Result<_>>())?;
            let samples: Vec<(Vec<i64>, f64)> = parts.into_iter().flatten().collect();
            let est = leakage_estimate(&samples, width, spec.q)?;
            Ok(LeakageRow {
                p,
                q: spec.q,
                a: spec.a,
                bin_width: width,
                samples: est.samples,
                mi_bits: est.mi_bits,
                reference_bits: est.reference_bits,
                residual_bits: est.residual_bits,
                bias_bound_bits: est.bias_bound_bits,
                occupied_bins: est.occupied_bins,
            })
        };
        rows.push(run().map_err(at_power(p))?);
    }
    Ok(LeakageReport { rows, gains })
}
