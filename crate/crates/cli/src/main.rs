use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use carleman_cli::commands::{self, read_numeric_csv};
use carleman_cli::config::{load_file, Loaded};
use carleman_cli::{CliError, CliResult};
use carleman_core::Point2;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "carleman", version, about = "Carleman kernel evaluation and boundary reconstruction in a band")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate Phi(y, x) for each row of a `y1,y2,x1,x2` CSV.
    KernelEval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: PathBuf,
    },
    /// Run the invariant suites; exits 1 if any fails.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct U from the configured Neumann traces.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// `x1,x2` CSV; defaults to the config's `points`.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Ratio of max |U| on circles |x| = R to exp(pi R / 2h).
    DecayReport {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature relative tolerance; also caps the absolute tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn load(&self) -> CliResult<Loaded> {
        load_file(&self.config, self.tol)
    }

    fn dest(&self) -> String {
        self.out.as_ref().map_or_else(|| "<stdout>".into(), |p| p.display().to_string())
    }

    fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p.display().to_string(), e))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn read_points(path: &Path, header: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|e| CliError::io(name.clone(), e))?;
    read_numeric_csv(file, header, &name)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::KernelEval { common, points } => {
            let loaded = common.load()?;
            let rows = read_points(&points, &["y1", "y2", "x1", "x2"])?;
            commands::kernel_eval(&loaded, &rows, common.writer()?, &common.dest())
        }
        Command::Verify { common } => {
            let loaded = common.load()?;
            let outcomes = commands::verify(&loaded)?;
            print!("{}", commands::verify_text(&outcomes));
            if common.out.is_some() {
                commands::write_verify_csv(&outcomes, common.writer()?, &common.dest())?;
            }
            commands::verify_status(&outcomes)
        }
        Command::Reconstruct { common, points } => {
            let loaded = common.load()?;
            let pts: Vec<Point2> = match &points {
                Some(p) => read_points(p, &["x1", "x2"])?.iter().map(|r| Point2::new(r[0], r[1])).collect(),
                None if !loaded.config.points.is_empty() => {
                    loaded.config.points.iter().map(|p| Point2::new(p[0], p[1])).collect()
                }
                None => return Err(CliError::config("points", "give --points or a `points` list in the config")),
            };
            commands::reconstruct(&loaded, &pts, common.writer()?, &common.dest(), io::stderr().lock())
        }
        Command::DecayReport { common } => {
            let loaded = common.load()?;
            let report = commands::decay_report(&loaded, io::stderr().lock())?;
            commands::write_decay_report(&report, &loaded.config.decay.radii, common.writer()?, &common.dest())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
