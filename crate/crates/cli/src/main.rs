use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gmid_cli::{characterize, charts, size, verify, CliError, Outcome};

#[derive(Parser)]
#[command(
    name = "gmid",
    version,
    about = "gm/ID sizing and verification for a two-stage Miller op-amp"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate nmos_lut.csv and pmos_lut.csv from the device surrogate.
    Characterize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the three sizing-chart panels of one LUT as CSV series.
    Charts {
        #[arg(long)]
        lut: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Size the amplifier and write design.kv.
    Size {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        lut_n: PathBuf,
        #[arg(long)]
        lut_p: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a design; writes report.kv, bode.csv and verdicts.kv.
    Verify {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        lut_n: PathBuf,
        #[arg(long)]
        lut_p: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Characterize { config, out } => characterize(&config, out.as_deref()),
        Command::Charts { lut, out } => charts(&lut, &out),
        Command::Size {
            config,
            lut_n,
            lut_p,
            out,
        } => size(&config, &lut_n, &lut_p, out.as_deref()),
        Command::Verify {
            design,
            lut_n,
            lut_p,
            config,
            out,
        } => verify(&design, &lut_n, &lut_p, &config, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            for f in outcome.files() {
                println!("wrote {}", f.display());
            }
            if let Outcome::Verified { pass: false, .. } = outcome {
                eprintln!("gmid: specification not met, see verdicts.kv");
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("gmid: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
