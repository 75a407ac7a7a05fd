//! `sdof`: command-line front end.
//!
//! Every command writes a CSV table (to `--out`, or stdout) and a metadata
//! sidecar (to `<out>.meta` and stdout). Exit status is 0 on success, 2 for
//! invalid input and 3 when a computation would exceed a size cap.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sdof::config::{parse_gain_list, parse_sim_config, split_list, GainList};
use sdof::constellation::{pe_upper_bound, received_constellation, select_params};
use sdof::diophantine::kg_profile;
use sdof::model::NormalizedGains;
use sdof::report::{check_csv, Cell, Sidecar, Table};
use sdof::secrecy::{achievable_region, residual_secrecy, sum_entropy, sum_rate_lower_bound, DiscreteMacSpec};
use sdof::simulator::{run_block_trials, run_leakage, run_symbol_sweep, SimConfig};
use sdof::Error;

#[derive(Parser)]
#[command(name = "sdof", version, about = "Secure degrees of freedom of the Gaussian wiretap MAC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; overrides `master_seed` in configs.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; the sidecar goes to `<out>.meta`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time in the sidecar (makes it run-dependent).
    #[arg(long)]
    wall_time: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Constellation parameters `(Q, A)` for an effective power.
    Params {
        #[arg(long = "p-tilde")]
        p_tilde: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Minimum distance and unique decomposability of a received constellation.
    Dmin {
        /// Gain ratios, comma separated; `a/b` tokens are kept exact.
        #[arg(long, allow_hyphen_values = true)]
        gains: String,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        a: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Symbol-error sweep over a power grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Block-coding trials with random binning.
    Block {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Minimum linear forms `m(N)` and the scaled profile.
    Kg {
        /// The free gains `g_1..g_{K-1}`.
        #[arg(long, allow_hyphen_values = true)]
        gains: String,
        #[arg(long)]
        eps: f64,
        /// Strictly increasing search bounds.
        #[arg(long, default_value = "2,4,8,16,32,64")]
        bounds: String,
        #[command(flatten)]
        common: Common,
    },
    /// Achievable secrecy region of a discrete wiretap MAC.
    Region {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Entropy of a sum of uniform integers and the derived rate bound.
    Entropy {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: u32,
        /// Symbol error probability used in the rate bound.
        #[arg(long, default_value_t = 0.0)]
        pe: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Eavesdropper leakage estimate over a power grid.
    Leakage {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Verify that a CSV written by this tool re-renders identically.
    Check {
        file: PathBuf,
    },
}

/// Failure of a command, carrying its exit status.
enum Failure {
    Invalid(String),
    Cap(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_cap() {
            Failure::Cap(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_config(path: &Path, common: &Common) -> Result<SimConfig, Failure> {
    let mut cfg = parse_sim_config(&read(path)?)?;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

fn emit(table: &Table, mut sidecar: Sidecar, common: &Common, started: Instant) -> Outcome {
    if let Some(seed) = common.seed {
        sidecar.set("seed", seed);
    }
    if common.wall_time {
        sidecar.set("wall_time_s", format!("{:.6}", started.elapsed().as_secs_f64()));
    }
    let csv = table.to_csv();
    let meta = sidecar.render();
    match &common.out {
        Some(path) => {
            let write = |p: &Path, text: &str| {
                fs::write(p, text).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", p.display())))
            };
            write(path, &csv)?;
            let mut meta_path = path.as_os_str().to_owned();
            meta_path.push(".meta");
            write(Path::new(&meta_path), &meta)?;
        }
        None => print!("{csv}"),
    }
    print!("{meta}");
    Ok(())
}

fn gains_to_normalized(gains: &str) -> Result<NormalizedGains, Failure> {
    Ok(match parse_gain_list(gains)? {
        GainList::Exact(v) => NormalizedGains::from_exact_ratios(&v)?,
        GainList::Float(v) => NormalizedGains::from_ratios(&v)?,
    })
}

fn run(command: Command) -> Outcome {
    let started = Instant::now();
    match command {
        Command::Params { p_tilde, k, eps, common } => {
            let spec = select_params(p_tilde, k, eps)?;
            let mut t = Table::new(["P_tilde", "K", "epsilon", "Q", "A", "peak_energy", "power_ok"]);
            let ok = spec.peak_energy() <= p_tilde;
            t.push(vec![
                p_tilde.into(),
                k.into(),
                eps.into(),
                spec.q.into(),
                spec.a.into(),
                spec.peak_energy().into(),
                Cell::from(if ok { "true" } else { "false" }),
            ]);
            let mut s = Sidecar::new("params");
            s.set("power_policy", "P_tilde = min_k h_e[k]^2 P, shared by all users");
            s.set("Q", spec.q);
            s.set_real("A", spec.a);
            emit(&t, s, &common, started)
        }
        Command::Dmin { gains, q, a, common } => {
            let g = gains_to_normalized(&gains)?;
            let rc = received_constellation(&g, q, a)?;
            let d = rc.min_distance()?;
            let (tail, exp) = pe_upper_bound(d)?;
            let mut t = Table::new(["Q", "A", "points", "collisions", "gamma", "d_min", "pe_tail_bound", "pe_exp_bound"]);
            t.push(vec![
                q.into(),
                a.into(),
                rc.points().len().into(),
                rc.collisions().into(),
                rc.gamma().as_str().into(),
                d.into(),
                tail.into(),
                exp.into(),
            ]);
            let mut s = Sidecar::new("dmin");
            s.set_list("g", g.g());
            s.set("exact", g.exact().is_some());
            s.set_real("d_min", d);
            s.set("gamma", rc.gamma().as_str());
            emit(&t, s, &common, started)
        }
        Command::Sweep { config, common } => {
            let cfg = load_config(&config, &common)?;
            let report = run_symbol_sweep(&cfg)?;
            let mut s = Sidecar::new("sweep");
            cfg.describe(&report.gains, &mut s);
            if let Some(fit) = report.slope {
                s.set_real("slope", fit.slope);
                s.set_real("slope_intercept", fit.intercept);
                s.set_real("slope_residual", fit.residual);
            }
            emit(&report.to_table(), s, &common, started)
        }
        Command::Block { config, common } => {
            let cfg = load_config(&config, &common)?;
            let report = run_block_trials(&cfg)?;
            let mut s = Sidecar::new("block");
            cfg.describe(&report.gains, &mut s);
            s.set("n", cfg.n);
            s.set("per_bin", cfg.per_bin);
            emit(&report.to_table(), s, &common, started)
        }
        Command::Kg { gains, eps, bounds, common } => {
            let g = parse_gain_list(&gains)?.to_f64();
            let bounds = split_list(&bounds)
                .map(|b| b.parse::<u64>().map_err(|_| Failure::Invalid(format!("bad search bound `{b}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            let prof = kg_profile(&g, eps, &bounds)?;
            let mut t = Table::new(["N", "m", "m_scaled"]);
            for r in &prof.rows {
                t.push(vec![r.n.into(), r.m.into(), r.m_scaled.into()]);
            }
            let mut s = Sidecar::new("kg");
            s.set_list("g", &g);
            s.set_real("epsilon", eps);
            s.set_real("c_hat", prof.c_hat);
            emit(&t, s, &common, started)
        }
        Command::Region { spec, common } => {
            let mac = DiscreteMacSpec::from_text(&read(&spec)?)?;
            let region = achievable_region(&mac)?;
            let mut t = Table::new(["subset_mask", "bound_bits"]);
            for &(mask, bound) in &region.constraints {
                t.push(vec![u64::from(mask).into(), bound.into()]);
            }
            let full = (1u64 << region.k) - 1;
            t.push(vec![full.into(), region.sum_bound.into()]);
            let mut s = Sidecar::new("region");
            s.set("spec", spec.display());
            s.set("k", region.k);
            s.set_real("sum_bound_bits", region.sum_bound);
            s.set_real("i_uy_bits", region.i_uy);
            s.set_real("i_uz_bits", region.i_uz);
            emit(&t, s, &common, started)
        }
        Command::Entropy { k, q, pe, common } => {
            let h = sum_entropy(k, q)?;
            let residual = residual_secrecy(k, q)?;
            let bound = sum_rate_lower_bound(k, q, pe)?;
            let mut t = Table::new(["K", "Q", "sum_entropy_bits", "residual_bits", "pe", "r_sum_bound_bits"]);
            t.push(vec![k.into(), q.into(), h.into(), residual.into(), pe.into(), bound.into()]);
            let mut s = Sidecar::new("entropy");
            s.set_real("sum_entropy_bits", h);
            emit(&t, s, &common, started)
        }
        Command::Leakage { config, common } => {
            let cfg = load_config(&config, &common)?;
            let report = run_leakage(&cfg)?;
            let mut s = Sidecar::new("leakage");
            cfg.describe(&report.gains, &mut s);
            s.set("leakage_samples", cfg.leakage_samples);
            emit(&report.to_table(), s, &common, started)
        }
        Command::Check { file } => {
            let summary = check_csv(&read(&file)?)?;
            println!("ok: {} rows, {} columns, zero diffs", summary.rows, summary.columns);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
