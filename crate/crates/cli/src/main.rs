//! Command-line driver: run the certification pipeline, sweep random
//! instances, validate metric files, and compute free norms.
//!
//! Exit code is 0 exactly when the command's verdict passes.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lipfree::io;
use lipfree::pipeline::{
    density_probe, norm_with_witness, run_pipeline_full, AmbientSource, CheckSettings,
    PipelineConfig, SeedMetric, DEFAULT_EPS_GRID,
};
use lipfree::report::CertificateReport;
use lipfree::{Config, Measure, Space};

#[derive(Parser)]
#[command(name = "lipfree", version, about = "Finite metric constructions with certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Human-readable tables.
    Text,
    /// JSON on stdout.
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AmbientKind {
    CompositeGrid,
    CompositeRandom,
    File,
}

#[derive(Args)]
struct RunArgs {
    /// Load the full pipeline configuration from a JSON file; flags below
    /// are ignored when set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Closeness parameter, strictly inside (0, 1/13).
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    /// Cantor model depth (2^level subset points).
    #[arg(long, default_value_t = 4)]
    level: u32,
    /// Total ambient size for generated sources.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, value_enum, default_value_t = AmbientKind::CompositeGrid)]
    ambient: AmbientKind,
    /// Metric file for `--ambient file`.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Comma-separated subset indices for `--ambient file`.
    #[arg(long, value_delimiter = ',')]
    k_mask: Vec<usize>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Directory for report and artifact JSON files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Random vertices in the operator-norm family.
    #[arg(long, default_value_t = 200)]
    op_samples: usize,
    /// Random vertices for the anchored extension bound.
    #[arg(long, default_value_t = 500)]
    ball_samples: usize,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long, default_value_t = 3)]
    trials: usize,
    /// Comma-separated eps grid; defaults to 0.01,0.03,0.05,0.07.
    #[arg(long, value_delimiter = ',')]
    eps_grid: Vec<f64>,
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    level: u32,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, default_value_t = 32)]
    op_samples: usize,
    #[arg(long, default_value_t = 64)]
    ball_samples: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// Metric file (plain text matrix or structured JSON).
    #[arg(long)]
    space: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long)]
    space: PathBuf,
    /// JSON array of [label, weight] pairs; must sum to zero.
    #[arg(long)]
    measure: PathBuf,
    /// Write the optimal transport plan here.
    #[arg(long)]
    plan_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full construction pipeline and print its certificates.
    Run(RunArgs),
    /// Sweep random instances over an eps grid; all ratios must stay <= 13.
    Probe(ProbeArgs),
    /// Validate the metric axioms of a space file.
    Validate(ValidateArgs),
    /// Free-space norm of a zero-sum measure with duality-gap check.
    Norm(NormArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Probe(args) => cmd_probe(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Norm(args) => cmd_norm(args),
    }
}

fn run_config(args: &RunArgs) -> anyhow::Result<Config> {
    if let Some(path) = &args.config {
        let config: Config = io::load_json(path).context("reading pipeline config")?;
        return Ok(config);
    }
    let ambient = match args.ambient {
        AmbientKind::CompositeGrid => AmbientSource::CompositeGrid {
            n: args.n,
            length: 1.0,
            gap: 0.5,
            halo: 4,
            k_scale: None,
        },
        AmbientKind::CompositeRandom => AmbientSource::CompositeRandom {
            n: args.n,
            gap: 0.5,
            halo: 4,
            weight_min: 1.0,
            weight_max: 2.0,
            k_scale: None,
        },
        AmbientKind::File => {
            let path = args
                .space
                .clone()
                .context("--ambient file requires --space")?;
            if args.k_mask.is_empty() {
                bail!("--ambient file requires --k-mask with the subset indices");
            }
            AmbientSource::File {
                path,
                k_mask: Some(args.k_mask.clone()),
            }
        }
    };
    Ok(PipelineConfig {
        ambient,
        cantor_level: args.level,
        eps: args.eps,
        seed_metric: SeedMetric::MiddleThirds,
        out_dir: args.out.clone(),
        checks: CheckSettings {
            operator_norm_samples: args.op_samples,
            unit_ball_samples: args.ball_samples,
        },
        rng_seed: args.seed,
    })
}

fn cmd_run(args: RunArgs) -> anyhow::Result<bool> {
    let config = run_config(&args)?;
    let (artifacts, report) = run_pipeline_full(&config)?;
    match args.format {
        Format::Structured => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Text => {
            println!(
                "pipeline: n = {}, |K| = {}, |C| = {}, eps = {}",
                artifacts.ambient.len(),
                artifacts.k_mask.len(),
                artifacts.glued.c_mask.len(),
                config.eps
            );
            print_report(&report);
            println!(
                "rho(extended, d) = {:.6e} (budget 13*eps = {:.6e}), operator norm = {:.9}",
                artifacts.rho_final,
                13.0 * config.eps,
                artifacts.operator_norm
            );
            println!("verdict: {}", if report.verdict { "PASS" } else { "FAIL" });
        }
    }
    Ok(report.verdict)
}

fn cmd_probe(args: ProbeArgs) -> anyhow::Result<bool> {
    let eps_grid = if args.eps_grid.is_empty() {
        DEFAULT_EPS_GRID.to_vec()
    } else {
        args.eps_grid.clone()
    };
    let config: Config = PipelineConfig {
        ambient: AmbientSource::CompositeRandom {
            n: args.n,
            gap: 0.5,
            halo: 4,
            weight_min: 1.0,
            weight_max: 2.0,
            k_scale: None,
        },
        cantor_level: args.level,
        eps: eps_grid[0],
        seed_metric: SeedMetric::MiddleThirds,
        out_dir: None,
        checks: CheckSettings {
            operator_norm_samples: args.op_samples,
            unit_ball_samples: args.ball_samples,
        },
        rng_seed: args.seed,
    };
    let summary = density_probe(&config, args.trials, &eps_grid)?;
    match args.format {
        Format::Structured => println!("{}", serde_json::to_string_pretty(&summary)?),
        Format::Text => {
            println!("{:>6} {:>8} {:>14} {:>10} {:>6}", "trial", "eps", "rho", "ratio", "pass");
            for row in &summary.rows {
                match (&row.rho, &row.ratio) {
                    (Some(rho), Some(ratio)) => println!(
                        "{:>6} {:>8} {:>14.6e} {:>10.4} {:>6}",
                        row.trial, row.eps, rho, ratio, row.pass
                    ),
                    _ => println!(
                        "{:>6} {:>8} {:>14} {:>10} {:>6} ({})",
                        row.trial,
                        row.eps,
                        "-",
                        "-",
                        row.pass,
                        row.error.as_deref().unwrap_or("error")
                    ),
                }
            }
            println!("all ratios <= 13: {}", summary.all_pass);
        }
    }
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        io::save_json(&summary, dir.join("probe.json"))?;
    }
    Ok(summary.all_pass)
}

fn cmd_validate(args: ValidateArgs) -> anyhow::Result<bool> {
    let (space, report): (Space, _) = io::load_space(&args.space)?;
    let verdict = report.is_metric();
    match args.format {
        Format::Structured => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Text => {
            println!("space: {} points", space.len());
            println!("summary: {}", report.summary());
            for v in report.triangle_violations.iter().take(10) {
                println!(
                    "  triangle violation: d({}, {}) > d({}, {}) + d({}, {}) by {:.3e}",
                    v.from, v.to, v.from, v.via, v.via, v.to, v.excess
                );
            }
            if report.triangle_violations.len() > 10 {
                println!(
                    "  ... {} more violations",
                    report.triangle_violations.len() - 10
                );
            }
            println!("verdict: {}", if verdict { "PASS" } else { "FAIL" });
        }
    }
    Ok(verdict)
}

fn cmd_norm(args: NormArgs) -> anyhow::Result<bool> {
    let (space, report): (Space, _) = io::load_space(&args.space)?;
    if !report.is_metric() {
        bail!("space fails metric validation: {}", report.summary());
    }
    let measure: Measure = io::load_measure(&space, &args.measure)?;
    let (norm, plan, gap) = norm_with_witness(&space, &measure)?;
    let pass = gap <= 1e-7;
    match args.format {
        Format::Structured => {
            let out = serde_json::json!({
                "norm": norm,
                "duality_gap": gap,
                "flows": plan.flows.len(),
                "pass": pass,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Format::Text => {
            println!("free-space norm = {norm:.12}");
            println!("duality gap     = {gap:.3e} (tolerance 1e-7)");
            println!("plan arcs       = {}", plan.flows.len());
            println!("verdict: {}", if pass { "PASS" } else { "FAIL" });
        }
    }
    if let Some(path) = &args.plan_out {
        io::save_plan(&space, &plan, path)?;
    }
    Ok(pass)
}

fn print_report(report: &CertificateReport<f64>) {
    println!(
        "{:<36} {:>14} {:>14} {:>12} {:>6}",
        "check", "measured", "bound", "slack", "pass"
    );
    for e in &report.entries {
        println!(
            "{:<36} {:>14.6e} {:>14.6e} {:>12.3e} {:>6}",
            e.check, e.measured, e.bound, e.slack, e.pass
        );
    }
}
