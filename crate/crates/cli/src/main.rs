use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qwa_cli::{
    parse_kind, scenario_gen, scenario_run, scenario_scaling, scenario_validate, InstanceSource,
    PathChoice, RunSettings, ScalingFamily,
};
use qwa_core::anneal::AnnealParams;
use qwa_core::instance::CouplingDist;

/// Annealed matrix-product simulation of transverse-field Ising models.
#[derive(Parser)]
#[command(name = "qwa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance and write it as JSON.
    Gen(GenArgs),
    /// Anneal one instance, writing telemetry and a summary.
    Run(RunArgs),
    /// Anneal one instance and check the answer against exhaustive search.
    Validate(RunArgs),
    /// Sweep instance sizes and collect an aggregate of the runs.
    Scaling(ScalingArgs),
}

#[derive(Args)]
struct SharedArgs {
    /// Seed for generated instances.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Discarded-weight threshold for bond truncation.
    #[arg(long, default_value_t = AnnealParams::default().dmrg.epsilon)]
    eps: f64,
    /// Bond dimension cap.
    #[arg(long = "m-max", default_value_t = AnnealParams::default().dmrg.m_max)]
    m_max: usize,
    /// Smallest acceptable step fidelity.
    #[arg(long = "f-min", default_value_t = AnnealParams::default().f_min)]
    f_min: f64,
    /// Initial schedule step.
    #[arg(long, default_value_t = AnnealParams::default().ds_init)]
    ds: f64,
    /// Step floor; the run aborts when halving drops below it.
    #[arg(long = "ds-min", default_value_t = AnnealParams::default().ds_min)]
    ds_min: f64,
    /// Step ceiling for growth after repeated accepts.
    #[arg(long = "ds-max", default_value_t = AnnealParams::default().ds_max)]
    ds_max: f64,
    /// Schedule endpoint.
    #[arg(long = "s-final", default_value_t = AnnealParams::default().s_final)]
    s_final: f64,
    /// Site ordering: identity, heuristic, or an explicit permutation like 0,2,1,3.
    #[arg(long, default_value = "heuristic")]
    path: PathChoice,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

impl SharedArgs {
    fn settings(&self) -> RunSettings {
        RunSettings {
            eps: self.eps,
            m_max: self.m_max,
            f_min: self.f_min,
            ds: self.ds,
            ds_min: self.ds_min,
            ds_max: self.ds_max,
            s_final: self.s_final,
            path: self.path.clone(),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Spin count.
    #[arg(long)]
    n: usize,
    /// Graph family: chain, grid:WxH, or regular:D.
    #[arg(long, default_value = "chain")]
    kind: String,
    /// Coupling distribution: pm1 or gaussian.
    #[arg(long, default_value = "gaussian")]
    dist: String,
    /// Instance seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Instance file written by gen; omit to generate one in memory.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Spin count for a generated instance.
    #[arg(long)]
    n: Option<usize>,
    /// Graph family for a generated instance: chain, grid:WxH, or regular:D.
    #[arg(long, default_value = "chain")]
    kind: String,
    /// Coupling distribution for a generated instance: pm1 or gaussian.
    #[arg(long, default_value = "gaussian")]
    dist: String,
    #[command(flatten)]
    shared: SharedArgs,
}

impl RunArgs {
    fn source(&self) -> Result<InstanceSource> {
        if let Some(file) = &self.instance {
            return Ok(InstanceSource::File(file.clone()));
        }
        let n = self
            .n
            .context("either --instance FILE or --n N is required")?;
        Ok(InstanceSource::Generated {
            n,
            kind: parse_kind(&self.kind)?,
            dist: CouplingDist::parse(&self.dist)?,
            seed: self.shared.seed,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioName {
    /// Uniform and gaussian chains at every size in the list.
    #[value(name = "scaling-1d", alias = "scaling_1d", alias = "1d")]
    Scaling1d,
    /// Ferromagnetic strips of width 2 and 4.
    #[value(name = "strip-2d", alias = "strip_2d", alias = "2d")]
    Strip2d,
}

#[derive(Args)]
struct ScalingArgs {
    /// Which scaling family to sweep.
    #[arg(long, value_enum)]
    scenario: ScenarioName,
    /// Comma-separated instance sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[command(flatten)]
    shared: SharedArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen(args) => {
            let kind = parse_kind(&args.kind)?;
            let dist = CouplingDist::parse(&args.dist)?;
            let path = scenario_gen(args.n, kind, dist, args.seed, &args.out)?;
            println!("{}", path.display());
            Ok(0)
        }
        Command::Run(args) => {
            let inst = args.source()?.load()?;
            let (artifacts, code) = scenario_run(&inst, &args.shared.settings(), &args.shared.out)?;
            let r = &artifacts.report;
            if r.aborted {
                eprintln!(
                    "aborted: {}",
                    r.abort_reason.as_deref().unwrap_or("unknown reason")
                );
            } else {
                println!(
                    "energy {} after {} steps, peak entropy {} at s={}",
                    r.final_classical_energy,
                    r.steps.len(),
                    r.global_max_entropy,
                    r.s_peak_entropy
                );
            }
            Ok(code)
        }
        Command::Validate(args) => {
            let inst = args.source()?.load()?;
            let (validation, code) =
                scenario_validate(&inst, &args.shared.settings(), &args.shared.out)?;
            println!(
                "annealed {} vs exhaustive {}: {}",
                validation.annealed_energy,
                validation.exhaustive_energy,
                if validation.passed { "match" } else { "MISMATCH" }
            );
            Ok(code)
        }
        Command::Scaling(args) => {
            let family = match args.scenario {
                ScenarioName::Scaling1d => ScalingFamily::Chains1d,
                ScenarioName::Strip2d => ScalingFamily::Strips2d,
            };
            let (rows, code) = scenario_scaling(
                family,
                &args.sizes,
                &args.shared.settings(),
                args.shared.seed,
                &args.shared.out,
            )?;
            println!(
                "{} runs, aggregate at {}",
                rows.len(),
                args.shared.out.join("aggregate.csv").display()
            );
            Ok(code)
        }
    }
}
