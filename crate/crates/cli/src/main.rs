use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use levsg::{execute, load_config, EtaSource, Mode, Task};

#[derive(Parser)]
#[command(
    name = "levsg",
    version,
    about = "Levitated Stern-Gerlach chip: fields, trajectories and closure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (key = value with [sections]); defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Analytic,
    Numeric,
}

#[derive(Clone, Copy, ValueEnum)]
enum EtaArg {
    Thin,
    Field,
}

#[derive(Subcommand)]
enum Command {
    /// |B| and components on a planar grid.
    FieldMap(Common),
    /// Thin-wire levitation gradient against wire spacing.
    GradientSweep(Common),
    /// Residual vertical field at the levitation height against wire spacing.
    BzSweep(Common),
    /// Trap parameters and the numeric levitation height.
    Levitate(Common),
    /// Two-arm trajectories through the three-stage protocol.
    Interferometer {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "analytic")]
        mode: ModeArg,
        /// Gradient source for the analytic mode.
        #[arg(long, value_enum, default_value = "thin")]
        eta_source: EtaArg,
    },
    /// Maximum superposition size against release distance for each mass.
    SizeSweep(Common),
    /// Solve for the closing stage-3 current.
    CloseLoop(Common),
    /// Joule heating and substrate diffusion length.
    Estimate(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let (task, common) = match cli.command {
        Command::FieldMap(c) => (Task::FieldMap, c),
        Command::GradientSweep(c) => (Task::GradientSweep, c),
        Command::BzSweep(c) => (Task::BzSweep, c),
        Command::Levitate(c) => (Task::Levitate, c),
        Command::Interferometer {
            common,
            mode,
            eta_source,
        } => {
            let mode = match mode {
                ModeArg::Analytic => Mode::Analytic,
                ModeArg::Numeric => Mode::Numeric,
            };
            let eta_source = match eta_source {
                EtaArg::Thin => EtaSource::Thin,
                EtaArg::Field => EtaSource::Field,
            };
            (Task::Interferometer { mode, eta_source }, common)
        }
        Command::SizeSweep(c) => (Task::SizeSweep, c),
        Command::CloseLoop(c) => (Task::CloseLoop, c),
        Command::Estimate(c) => (Task::Estimate, c),
    };
    let result = load_config(common.config.as_deref()).and_then(|mut cfg| {
        if let Some(out) = common.out {
            cfg.output_dir = out;
        }
        execute(task, &cfg)
    });
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
