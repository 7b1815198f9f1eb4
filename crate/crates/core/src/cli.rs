//! The `cofine` command line.
//!
//! ```text
//! cofine learn-u <profiles.csv> --k 5 [--ridge] --out dir
//! cofine simulate <config.toml | manifest.toml> [--seed S] [--trials N] [--horizon T] --out dir
//! cofine report <traces.csv>... --out dir
//! ```
//!
//! Exit codes: 0 ok, 2 input or config error, 3 rank error, 4 runtime error.
//! `COFINE_THREADS` caps the worker thread count.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{load_config, RunManifest, SimConfig};
use crate::harness::{aggregate_traces, paired_record, run_protocol, AggregateReport, RegretTrace, SweepPoint};
use crate::hierarchy::{decompose, learn_u};
use crate::io::{
    read_profiles, read_traces, write_aggregate, write_bound, write_matrix, write_summary, write_text, write_traces, write_vector,
};
use crate::plot::{plot_regret, plot_sweep};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RANK: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

pub const THREADS_ENV: &str = "COFINE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "cofine", version, about = "Coarse-to-fine contextual bandit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Learn a feature hierarchy from a profile CSV.
    LearnU {
        profiles: PathBuf,
        #[arg(long)]
        k: usize,
        /// Augment the profiles with the identity before the SVD.
        #[arg(long)]
        ridge: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the experiment described by a config or a run manifest.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Merge trace CSVs into a comparison table and plot.
    Report {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::RankDeficient { .. } => EXIT_RANK,
        Error::Parse(_) | Error::InvalidConfig(_) | Error::InvalidProfiles(_) | Error::Csv(_) => EXIT_INPUT,
        _ => EXIT_RUNTIME,
    }
}

fn finish(result: Result<()>) -> i32 {
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Output-side failures are runtime errors whatever their type.
fn runtime<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Csv(_) | Error::Io(_) => Error::Output(e.to_string()),
        other => other,
    })
}

fn create_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Output(format!("cannot create {}: {e}", out.display())))
}

pub fn cmd_learn_u(profiles_csv: &Path, k: usize, ridge: bool, out: &Path) -> i32 {
    finish((|| {
        let profiles = read_profiles(profiles_csv)?;
        if k == 0 || k > profiles.dim() {
            return Err(Error::InvalidConfig(format!("need 1 ≤ k ≤ D = {}, got {k}", profiles.dim())));
        }
        let h = learn_u(&profiles, k, ridge)?;
        runtime((|| {
            create_dir(out)?;
            write_matrix(&out.join("u.csv"), &h.u)?;
            write_matrix(&out.join("u0.csv"), &h.u0)?;
            write_matrix(&out.join("omega.csv"), &h.omega)?;
            write_vector(&out.join("singular_values.csv"), &h.singular_values)
        })())?;
        println!("D = {}, N = {}, K = {k}", profiles.dim(), profiles.len());
        println!("||U||_F^2 = {:.12}", h.u.norm_squared());
        for i in 0..profiles.len() {
            let d = decompose(&profiles.profile(i), &h)?;
            println!("profile {i}: residual norm {:.6}", d.s_perp);
        }
        Ok(())
    })())
}

fn write_report(
    out: &Path,
    stem: &str,
    report: &AggregateReport,
    cfg: &SimConfig,
    title: &str,
    artifacts: &mut Vec<String>,
) -> Result<()> {
    let mut emit = |name: String| {
        let p = out.join(&name);
        artifacts.push(name);
        p
    };
    write_aggregate(&emit(format!("aggregate{stem}.csv")), report)?;
    if cfg.write_traces {
        write_traces(&emit(format!("traces{stem}.csv")), &report.traces)?;
    }
    if let Some(b) = &report.bound {
        write_bound(&emit(format!("bound{stem}.csv")), b)?;
    }
    plot_regret(&emit(format!("regret{stem}.svg")), report, title, cfg.plot_bound)
}

/// Runs a resolved config and writes every artifact plus `manifest.toml` into `out`.
pub fn simulate(cfg: &SimConfig, out: &Path) -> Result<Vec<SweepPoint>> {
    let exp = cfg.experiment()?;
    let scenario = cfg.scenario()?;
    let points = run_protocol(&exp, &scenario)?;
    runtime((|| {
        create_dir(out)?;
        let mut artifacts = Vec::new();
        if let [only] = points.as_slice() {
            if only.param == "none" {
                write_report(out, "", &only.report, cfg, "cumulative regret", &mut artifacts)?;
            }
        }
        if artifacts.is_empty() {
            for p in &points {
                let stem = format!("_{}_{}", p.param, p.value);
                write_report(out, &stem, &p.report, cfg, &format!("{} = {}", p.param, p.value), &mut artifacts)?;
            }
            write_summary(&out.join("summary.csv"), &points)?;
            plot_sweep(&out.join("sweep.svg"), &points)?;
            artifacts.push("summary.csv".into());
            artifacts.push("sweep.svg".into());
        }
        write_text(&out.join("manifest.toml"), &RunManifest::new(cfg.clone(), artifacts).to_toml())
    })())?;
    Ok(points)
}

pub fn cmd_simulate(config: &Path, out: &Path, seed: Option<u64>, trials: Option<usize>, horizon: Option<usize>) -> i32 {
    finish((|| {
        let mut cfg = load_config(config)?;
        cfg.seed = seed.unwrap_or(cfg.seed);
        cfg.trials = trials.unwrap_or(cfg.trials);
        cfg.horizon = horizon.unwrap_or(cfg.horizon);
        let points = simulate(&cfg, out)?;
        for p in &points {
            if p.param != "none" {
                println!("{} = {}", p.param, p.value);
            }
            for s in &p.report.series {
                println!("  {:<18} final regret {:>10.3} ± {:.3} (n = {})", s.label, s.final_mean(), s.final_stderr(), s.n);
            }
        }
        println!("wrote {}", out.join("manifest.toml").display());
        Ok(())
    })())
}

/// Merges trace files; a `(policy, trial)` pair may appear only once.
pub fn merge_traces(paths: &[PathBuf]) -> Result<Vec<RegretTrace>> {
    let mut all: Vec<RegretTrace> = Vec::new();
    for p in paths {
        for t in read_traces(p)? {
            if all.iter().any(|a| a.policy == t.policy && a.trial == t.trial) {
                return Err(Error::Parse(format!("{}: duplicate trace for {} trial {}", p.display(), t.policy, t.trial)));
            }
            all.push(t);
        }
    }
    if all.is_empty() {
        return Err(Error::Parse("no traces found".into()));
    }
    Ok(all)
}

pub fn cmd_report(traces: &[PathBuf], out: &Path) -> i32 {
    finish((|| {
        let all = merge_traces(traces)?;
        let report = aggregate_traces(&all).map_err(|e| Error::Parse(e.to_string()))?;
        let mut table = String::from("policy,n,final_mean_cum_regret,final_stderr\n");
        for s in &report.series {
            table += &format!("{},{},{},{}\n", s.label, s.n, s.final_mean(), s.final_stderr());
        }
        let mut pairs = String::from("policy_a,policy_b,wins,ties,losses\n");
        for (i, a) in report.series.iter().enumerate() {
            for b in &report.series[i + 1..] {
                let r = paired_record(&all, &a.label, &b.label);
                pairs += &format!("{},{},{},{},{}\n", a.label, b.label, r.wins, r.ties, r.losses);
            }
        }
        runtime((|| {
            create_dir(out)?;
            write_text(&out.join("report.csv"), &table)?;
            write_text(&out.join("pairs.csv"), &pairs)?;
            plot_regret(&out.join("regret.svg"), &report, "cumulative regret", false)
        })())?;
        print!("{table}\n{pairs}");
        Ok(())
    })())
}

/// Applies `COFINE_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} = `{v}` is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("{THREADS_ENV}: {e}")))?;
    }
    Ok(())
}

/// Parses `args` and runs the chosen command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    match cli.command {
        Command::LearnU { profiles, k, ridge, out } => cmd_learn_u(&profiles, k, ridge, &out),
        Command::Simulate { config, seed, trials, horizon, out } => cmd_simulate(&config, &out, seed, trials, horizon),
        Command::Report { traces, out } => cmd_report(&traces, &out),
    }
}
