//! `zecap`: zero-error capacity analysis from the command line.
//!
//! Exit status: 0 success, 1 a theorem violation (or a failed campaign),
//! 2 bad input.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use zecap_core::campaign::{run_campaign, CampaignConfig, CampaignMode};
use zecap_core::capacity::{superactivation_analysis, CapacityVerdict, SuperactivationOptions};
use zecap_core::channel::TP_TOL;
use zecap_core::io::ChannelFile;
use zecap_core::sampling::ChannelFamily;
use zecap_core::{one_shot_zero_error_positive, CapacityOptions, Channel, Error, SuperactivationReport};

#[derive(Parser)]
#[command(name = "zecap", version, about = "One-shot zero-error capacity and superactivation of quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a channel file parses and is trace preserving.
    Validate {
        path: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Decide whether a channel has positive one-shot zero-error capacity.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Decide whether several zero-capacity channels superactivate jointly.
    Superactivate {
        #[arg(required = true, num_args = 2..)]
        paths: Vec<PathBuf>,
        /// Always run the joint search, even when the theorem already settles it.
        #[arg(long)]
        no_fast_path: bool,
        /// Largest joint input dimension to attempt.
        #[arg(long, default_value_t = 64)]
        ambient_cap: usize,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a seeded randomized campaign.
    Campaign(CampaignArgs),
    /// Write a random channel (Haar-random Stinespring isometry) to a file.
    RandomChannel {
        #[arg(long)]
        d_in: usize,
        #[arg(long, default_value_t = 2)]
        env_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct AnalysisArgs {
    /// Relative eigenvalue cutoff for the capacity subspace.
    #[arg(long)]
    tol: Option<f64>,
    /// Overlaps at or below this count as zero.
    #[arg(long)]
    zero_tol: Option<f64>,
    /// Product search counts `1 − objective` below this as found.
    #[arg(long)]
    found_tol: Option<f64>,
    /// Width of the inconclusive band below 1.
    #[arg(long)]
    gray_tol: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl AnalysisArgs {
    fn options(&self) -> CapacityOptions {
        let mut o = CapacityOptions::default().with_seed(self.seed);
        if let Some(t) = self.tol {
            o.support_tol = t;
        }
        if let Some(t) = self.zero_tol {
            o.zero_tol = t;
        }
        if let Some(t) = self.found_tol {
            o.search.found_tol = t;
        }
        if let Some(t) = self.gray_tol {
            o.search.gray_tol = t;
        }
        if let Some(r) = self.restarts {
            o = o.with_restarts(r);
        }
        if let Some(m) = self.max_iter {
            o = o.with_max_iter(m);
        }
        o
    }
}

#[derive(Args)]
struct CampaignArgs {
    /// JSON campaign configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<CampaignMode>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated input dimensions, e.g. `2,3`.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    env_dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    margin_filter: Option<f64>,
    #[arg(long, value_parser = parse_family)]
    family: Option<ChannelFamily>,
    #[arg(long)]
    arity: Option<usize>,
    #[arg(long)]
    no_fast_path: bool,
    /// Skip the extra fast-path-disabled joint search.
    #[arg(long)]
    no_explicit_joint: bool,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    zero_tol: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Record wall time in the report (makes it non-reproducible).
    #[arg(long)]
    wall_time: bool,
    /// Run trials one after another.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_mode(s: &str) -> Result<CampaignMode, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| "expected oracle, lemma-dim, theorem, corollary or lemma-fuzz".into())
}

fn parse_family(s: &str) -> Result<ChannelFamily, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| "expected isometry, measure-prepare or mixed".into())
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct ChannelSummary {
    name: String,
    d_in: usize,
    d_out: usize,
    kraus_count: usize,
    tp_residual: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct ValidateReport {
    command: String,
    channel: ChannelSummary,
    trace_preserving: bool,
    tolerance: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct AnalyzeReport {
    command: String,
    channel: ChannelSummary,
    options: CapacityOptions,
    verdict: CapacityVerdict,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct SuperactivateReport {
    command: String,
    channels: Vec<ChannelSummary>,
    options: SuperactivationOptions,
    /// Joint search says superactivated although the theorem's hypothesis holds.
    theorem_violation: bool,
    report: SuperactivationReport,
}

enum Failure {
    Input(String),
    Violation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn command_echo() -> String {
    std::iter::once("zecap".to_string())
        .chain(std::env::args().skip(1))
        .collect::<Vec<_>>()
        .join(" ")
}

fn load(path: &Path) -> Result<(ChannelFile, Channel), Failure> {
    let file = ChannelFile::read(path)?;
    let ch = file.to_channel()?;
    Ok((file, ch))
}

fn summary(file: &ChannelFile, ch: &Channel) -> ChannelSummary {
    ChannelSummary {
        name: file.name.clone(),
        d_in: ch.d_in(),
        d_out: ch.d_out(),
        kraus_count: ch.kraus().len(),
        tp_residual: ch.tp_residual(),
    }
}

fn emit<T: Serialize>(report: &T, output: &OutputArgs, human: impl FnOnce() -> String) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(report).map_err(|e| Failure::Input(e.to_string()))?;
    if let Some(path) = &output.out {
        std::fs::write(path, format!("{json}\n")).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    if output.json {
        println!("{json}");
    } else {
        println!("{}", human());
    }
    Ok(())
}

fn fmt_state(v: &zecap_core::PureState) -> String {
    let parts: Vec<String> = v
        .amplitudes()
        .iter()
        .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
        .collect();
    format!("[{}]", parts.join(", "))
}

fn verdict_text(v: &CapacityVerdict) -> String {
    let mut s = format!(
        "status: {:?}\nmargin: {:.6e}\ndim S: {}\ndim S⊥: {}\nsubspace search: {:?} (objective {:.12})\n\
         direct minimum: {:.6e}\nroutes agree: {}",
        v.status,
        v.margin,
        v.subspace_dim,
        v.complement_dim,
        v.subspace_status,
        v.subspace_objective,
        v.direct_value,
        v.agreement
    );
    if let Some((psi, phi)) = &v.witness {
        s += &format!("\nwitness ψ: {}\nwitness φ: {}", fmt_state(psi), fmt_state(phi));
    }
    for w in &v.warnings {
        s += &format!("\nwarning: eigenvalues {:?} lie near the support cutoff {:e}", w.relative_eigenvalues, w.tol);
    }
    s
}

fn validate(path: &Path, output: &OutputArgs) -> Result<(), Failure> {
    let (file, ch) = load(path)?;
    let report = ValidateReport {
        command: command_echo(),
        channel: summary(&file, &ch),
        trace_preserving: ch.is_trace_preserving(),
        tolerance: TP_TOL,
    };
    emit(&report, output, || {
        format!(
            "{}: d_in {} d_out {} with {} Kraus operators, trace-preservation residual {:.3e}{}",
            path.display(),
            ch.d_in(),
            ch.d_out(),
            ch.kraus().len(),
            ch.tp_residual(),
            if ch.is_trace_preserving() { "" } else { " (not trace preserving)" }
        )
    })?;
    ch.require_trace_preserving()?;
    Ok(())
}

fn analyze(path: &Path, analysis: &AnalysisArgs, output: &OutputArgs) -> Result<(), Failure> {
    let (file, ch) = load(path)?;
    let options = analysis.options();
    let verdict = one_shot_zero_error_positive(&ch, &options)?;
    let report = AnalyzeReport {
        command: command_echo(),
        channel: summary(&file, &ch),
        options,
        verdict,
    };
    emit(&report, output, || verdict_text(&report.verdict))
}

fn superactivate(
    paths: &[PathBuf],
    no_fast_path: bool,
    ambient_cap: usize,
    analysis: &AnalysisArgs,
    output: &OutputArgs,
) -> Result<(), Failure> {
    let loaded = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let channels: Vec<Channel> = loaded.iter().map(|(_, ch)| ch.clone()).collect();
    let options = SuperactivationOptions {
        capacity: analysis.options(),
        fast_path: !no_fast_path,
        ambient_cap,
    };
    let report = superactivation_analysis(&channels, &options)?;
    let small = report.complement_dims.iter().filter(|&&d| d <= 1).count();
    let theorem_violation = report.is_superactivated() && small + 1 >= channels.len();
    let out = SuperactivateReport {
        command: command_echo(),
        channels: loaded.iter().map(|(f, ch)| summary(f, ch)).collect(),
        options,
        theorem_violation,
        report,
    };
    emit(&out, output, || {
        let r = &out.report;
        let mut s = format!("conclusion: {:?}\ndim S⊥ per channel: {:?}", r.conclusion, r.complement_dims);
        for (i, v) in r.individual_verdicts.iter().enumerate() {
            s += &format!("\nchannel {i}: {:?}, margin {:.6e}", v.status, v.margin);
        }
        if let Some(reason) = &r.fast_path_reason {
            s += &format!("\nfast path: {reason}");
        }
        if let Some(j) = &r.joint_verdict {
            s += &format!("\njoint verdict:\n{}", verdict_text(j));
        }
        if theorem_violation {
            s += "\nTHEOREM VIOLATION: superactivated although the hypothesis holds";
        }
        s
    })?;
    if theorem_violation {
        return Err(Failure::Violation);
    }
    Ok(())
}

fn campaign(args: &CampaignArgs) -> Result<(), Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            CampaignConfig::from_json(&text)?
        }
        None => CampaignConfig::default(),
    };
    macro_rules! set {
        ($($field:ident).+ = $value:expr) => {
            if let Some(v) = $value {
                cfg.$($field).+ = v;
            }
        };
    }
    set!(mode = args.mode);
    set!(trials = args.trials);
    set!(dims = args.dims.clone());
    set!(env_dim = args.env_dim);
    set!(seed = args.seed);
    set!(margin_filter = args.margin_filter);
    set!(family = args.family);
    set!(arity = args.arity);
    set!(tolerances.support_tol = args.tol.map(Some));
    set!(tolerances.zero_tol = args.zero_tol.map(Some));
    set!(tolerances.restarts = args.restarts.map(Some));
    set!(tolerances.max_iter = args.max_iter.map(Some));
    if args.no_fast_path {
        cfg.fast_path = false;
    }
    if args.no_explicit_joint {
        cfg.explicit_joint = false;
    }
    if args.wall_time {
        cfg.record_wall_time = true;
    }
    if args.sequential {
        cfg.exec = zecap_core::Exec::Sequential;
    }
    let report = run_campaign(&cfg, &command_echo())?;
    emit(&report, &args.output, || {
        let n = &report.counts;
        let mut s = format!(
            "mode {:?}, {} trials, seed {}\npositive {} zero {} unknown {} superactivated {} fastpath {} violation {}\n\
             unknown rate {:.4}",
            cfg.mode, cfg.trials, cfg.seed, n.positive, n.zero, n.unknown, n.superactivated, n.fastpath, n.violation, report.unknown_rate
        );
        if let Some(e) = &report.explicit_counts {
            s += &format!(
                "\nexplicit joint search: zero {} unknown {} superactivated {}",
                e.zero, e.unknown, e.superactivated
            );
        }
        for r in report.records.iter().filter(|r| r.note.is_some()) {
            s += &format!("\ntrial {}: {}", r.trial, r.note.as_deref().unwrap_or(""));
        }
        s += if report.passed { "\nPASSED" } else { "\nFAILED" };
        s
    })?;
    if !report.passed {
        return Err(Failure::Violation);
    }
    Ok(())
}

fn random_channel(d_in: usize, env_dim: usize, seed: u64, out: &Path, name: Option<String>) -> Result<(), Failure> {
    if d_in == 0 || env_dim == 0 {
        return Err(Failure::Input("d_in and env_dim must be positive".into()));
    }
    let ch = Channel::random(d_in, env_dim, seed)?;
    let name = name.unwrap_or_else(|| format!("random-d{d_in}-env{env_dim}-seed{seed}"));
    ChannelFile::from_channel(name, &ch).write(out)?;
    println!(
        "wrote {} ({} Kraus operators, {}→{})",
        out.display(),
        ch.kraus().len(),
        ch.d_in(),
        ch.d_out()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { path, output } => validate(path, output),
        Command::Analyze { path, analysis, output } => analyze(path, analysis, output),
        Command::Superactivate {
            paths,
            no_fast_path,
            ambient_cap,
            analysis,
            output,
        } => superactivate(paths, *no_fast_path, *ambient_cap, analysis, output),
        Command::Campaign(args) => campaign(args),
        Command::RandomChannel {
            d_in,
            env_dim,
            seed,
            out,
            name,
        } => random_channel(*d_in, *env_dim, *seed, out, name.clone()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
