use std::path::PathBuf;
use std::process::ExitCode;

use bxos_core::construction::Variant;
use bxos_core::lab::{
    check_opt, gen_instances, instance_to_json, parse_instance, run_protocol, verify_concentration, verify_info,
    verify_nu_equivalence, verify_theta_recovery, ExperimentConfig, LabError, Report,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bxos-lab", version, about = "Hard instances and protocol experiments for two-bidder binary-XOS auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample instances and print them as JSON.
    Gen(Common),
    /// Run one verification suite and print its report.
    Verify {
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
    /// Check the welfare oracle on sampled instances or on an instance file.
    Opt {
        instance: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Execute a registered protocol over sampled instances.
    Run {
        #[arg(long)]
        protocol: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Concentration,
    Theta,
    NuEquivalence,
    Info,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Nu,
    NuPrime,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 160)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 0.002)]
    eps: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, env = "BXOS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = VariantArg::Nu)]
    variant: VariantArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, protocol: Option<String>) -> ExperimentConfig {
        ExperimentConfig {
            m: self.m,
            n: self.n,
            eps: self.eps,
            trials: self.trials,
            seed: self.seed,
            variant: match self.variant {
                VariantArg::Nu => Variant::Nu,
                VariantArg::NuPrime => Variant::NuPrime,
            },
            protocol,
            out: self.out.clone(),
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Config(_) | LabError::Malformed(_) | LabError::Json(_) => Failure::Usage(e.to_string()),
            LabError::Protocol(bxos_core::protocol::ProtocolError::Unknown(_)) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Returns whether every assertion passed.
fn run(cli: Cli) -> Result<bool, Failure> {
    let (report, out): (Report, Option<PathBuf>) = match cli.command {
        Command::Gen(common) => {
            let cfg = common.config(None);
            let insts = gen_instances(&cfg)?;
            let value = if insts.len() == 1 {
                instance_to_json(&insts[0])
            } else {
                serde_json::Value::Array(insts.iter().map(instance_to_json).collect())
            };
            emit(&serde_json::to_string_pretty(&value).expect("json"), &common.out)?;
            return Ok(true);
        }
        Command::Verify { suite, common } => {
            let cfg = common.config(None);
            let r = match suite {
                Suite::Concentration => verify_concentration(&cfg)?,
                Suite::Theta => verify_theta_recovery(&cfg)?,
                Suite::NuEquivalence => verify_nu_equivalence(&cfg)?,
                Suite::Info => verify_info(&cfg)?,
            };
            (r, common.out)
        }
        Command::Opt { instance, common } => {
            let cfg = common.config(None);
            let insts = match instance {
                Some(path) => {
                    let bytes = std::fs::read(&path)
                        .map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))?;
                    vec![parse_instance(&bytes)?]
                }
                None => gen_instances(&cfg)?,
            };
            (check_opt(&cfg, &insts)?, common.out)
        }
        Command::Run { protocol, common } => (run_protocol(&common.config(Some(protocol)))?, common.out),
    };
    emit(&report.to_json(), &out)?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
