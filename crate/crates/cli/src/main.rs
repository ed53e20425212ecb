use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use slicing_core::experiment::{self, EtaSpec, ExperimentConfig};

/// Online learning of training-slice allocations.
#[derive(Parser)]
#[command(name = "slicing", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment and write all CSV outputs.
    Run(Common),
    /// Build the decision spaces and write only the space manifest.
    Space(Common),
    /// Compare cumulative regret across learning rates.
    CompareEta {
        #[command(flatten)]
        common: Common,
        /// Comma-separated rates; `auto` stands for the bound-minimizing rate.
        #[arg(long, value_delimiter = ',', required = true)]
        etas: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Config file, or the name of a bundled config (table3_2model, table3_4model).
    config: String,
    /// Override the seed list, e.g. `--seeds 0,1,2`.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output directory.
    #[arg(long, env = "SLICING_OUT_DIR")]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = experiment::load_config_or_bundled(&self.config)
            .with_context(|| format!("loading config `{}`", self.config))?;
        if let Some(seeds) = &self.seeds {
            let mut seeds = seeds.clone();
            seeds.sort_unstable();
            seeds.dedup();
            anyhow::ensure!(!seeds.is_empty(), "--seeds needs at least one seed");
            cfg.seeds = seeds;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.load()?;
            let summary = experiment::run_experiment(&cfg)?;
            println!(
                "{}: {} arms ({}), eta {:.6}, T = {}, {} seeds",
                summary.name,
                summary.arms,
                summary.algorithm,
                summary.eta,
                summary.horizon,
                summary.seeds.len()
            );
            println!(
                "optimum {:.6}, mean final average reward {:.6}, mean regret {:.3}",
                summary.optimal_performance, summary.mean_final_average_reward, summary.mean_final_cumulative_regret
            );
            println!("wrote {} files to {}", summary.files.len(), cfg.output_dir.display());
        }
        Command::Space(common) => {
            let cfg = common.load()?;
            let m = experiment::space_manifest(&cfg)?;
            let path = experiment::write_manifest(&m, &cfg.output_dir)?;
            println!("ols {} / ols-sa {} / ols-rsa {}", m.ols, m.ols_sa, m.ols_rsa);
            println!("wrote {}", path.display());
        }
        Command::CompareEta { common, etas } => {
            let cfg = common.load()?;
            let etas = etas
                .iter()
                .map(|t| EtaSpec::from_token(t))
                .collect::<Result<Vec<_>, _>>()?;
            let cmp = experiment::compare_etas(&cfg, &etas)?;
            let path = experiment::write_eta_comparison(&cmp, &cfg.output_dir)?;
            for (label, curve) in cmp.labels.iter().zip(&cmp.curves) {
                println!("{label}: final cumulative regret {:.3}", curve.last().copied().unwrap_or(0.0));
            }
            println!("bound at eta_op {:.6}: {:.3}", cmp.eta_op, cmp.bound.last().copied().unwrap_or(0.0));
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
