//! Command-line front end for the teleportation-as-measurement library:
//! verification suites and seeded Monte Carlo experiments with
//! machine-readable reports.

mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{parse_input_mode, CommandKind, InputMode, OutputFormat, RunConfig};
use experiments::{
    run_ensemble_demo, run_protocol_experiment, run_telepovm, run_verification_suite,
};
use report::{resolve_output_path, Report};

#[derive(Parser)]
#[command(
    name = "telepovm",
    version,
    about = "Teleportation as generalized measurement: verification and Monte Carlo experiments",
    after_help = "Exit codes: 0 success, 1 verification failure, 2 configuration error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Random seed; identical seeds replay identical reports.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Report format for --out (and stdout when --out is absent).
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Report file path; relative paths honor $TELEPOVM_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProtocolArgs {
    /// Channel weight α² in (0, 1]; Schmidt ordering maps values below ½
    /// to 1 − α².
    #[arg(long, default_value_t = 0.5)]
    alpha2: f64,
    /// Number of Monte Carlo trials.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Input state per trial: `random` or `a,b` with complex components
    /// such as `0.6,0.8i` or `0.5+0.5i,-0.5i`.
    #[arg(long, default_value = "random")]
    input: String,
    /// Evaluate the exact outcome tree instead of sampling.
    #[arg(long)]
    enumerate: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full verification suite (deterministic; seconds-scale).
    Verify {
        /// Also inject a broken POVM and require the validator to flag it.
        #[arg(long)]
        negative_control: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Standard Bell-measurement teleportation (2 classical bits).
    Teleport {
        /// Singlet-only variant: 1 bit, success on Ψ₋ only (requires a
        /// maximally entangled channel).
        #[arg(long)]
        one_bit: bool,
        #[command(flatten)]
        protocol: ProtocolArgs,
    },
    /// Conclusive teleportation over a partially entangled channel
    /// (3 classical bits; fidelity one on success).
    Conclusive {
        /// One-bit variant: success only on the Ψ₋-analogue outcome.
        #[arg(long)]
        one_bit: bool,
        #[command(flatten)]
        protocol: ProtocolArgs,
    },
    /// Verify that a Bell measurement with an ancilla realizes the
    /// four-element POVM, and that fixed rotations recover the state.
    Telepovm {
        /// Angle θ; omit for a 100-point sweep.
        #[arg(long)]
        theta: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Remote ensemble-generation demonstrations (two-state, basis choice,
    /// four-state telepovm).
    EnsembleDemo {
        /// Signal-state weight α² for the two-state ensemble.
        #[arg(long, default_value_t = 0.8)]
        alpha2: f64,
        /// Angle θ for the four-state ensemble.
        #[arg(long)]
        theta: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn config_from(
    command: CommandKind,
    alpha2: f64,
    theta: Option<f64>,
    trials: u64,
    input_mode: InputMode,
    common: &CommonArgs,
    negative_control: bool,
) -> RunConfig {
    RunConfig {
        command,
        alpha2,
        theta,
        trials,
        seed: common.seed,
        input_mode,
        format: common.format.into(),
        out: common.out.clone(),
        negative_control,
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, config::ConfigError> {
    let config = match &cli.command {
        Command::Verify {
            negative_control,
            common,
        } => config_from(
            CommandKind::Verify,
            0.5,
            None,
            1,
            InputMode::Random,
            common,
            *negative_control,
        ),
        Command::Teleport { one_bit, protocol } => {
            let kind = if *one_bit {
                CommandKind::OneBitTeleport
            } else {
                CommandKind::Teleport
            };
            let mode = parse_input_mode(&protocol.input, protocol.enumerate)?;
            config_from(
                kind,
                protocol.alpha2,
                None,
                protocol.trials,
                mode,
                &protocol.common,
                false,
            )
        }
        Command::Conclusive { one_bit, protocol } => {
            let kind = if *one_bit {
                CommandKind::OneBitConclusive
            } else {
                CommandKind::Conclusive
            };
            let mode = parse_input_mode(&protocol.input, protocol.enumerate)?;
            config_from(
                kind,
                protocol.alpha2,
                None,
                protocol.trials,
                mode,
                &protocol.common,
                false,
            )
        }
        Command::Telepovm { theta, common } => config_from(
            CommandKind::Telepovm,
            0.5,
            *theta,
            1,
            InputMode::Random,
            common,
            false,
        ),
        Command::EnsembleDemo {
            alpha2,
            theta,
            common,
        } => config_from(
            CommandKind::EnsembleDemo,
            *alpha2,
            *theta,
            1,
            InputMode::Random,
            common,
            false,
        ),
    };
    config.validate()?;
    Ok(config)
}

fn emit(report: &Report, config: &RunConfig) -> Result<(), experiments::RunError> {
    println!("{}", report.summary());
    let body = match config.format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv(),
    };
    match &config.out {
        Some(path) => {
            let path = resolve_output_path(path);
            std::fs::write(&path, &body)?;
            println!("report written to {}", path.display());
        }
        None => println!("{body}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let result = match config.command {
        CommandKind::Verify => run_verification_suite(&config),
        CommandKind::Telepovm => run_telepovm(&config),
        CommandKind::EnsembleDemo => run_ensemble_demo(&config),
        _ => run_protocol_experiment(&config),
    };

    let report = match result {
        Ok(r) => r,
        Err(experiments::RunError::Core(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(experiments::RunError::Io(e)) => {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(2);
        }
    };

    if let Err(e) = emit(&report, &config) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    if report.all_checks_pass() {
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed");
        ExitCode::from(1)
    }
}
