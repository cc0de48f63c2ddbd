use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use trajsim_cli::bench::{run_suite, Suite, Table};
use trajsim_cli::report::{run_model, RunOptions};
use trajsim_cli::{analytic, export, model};

#[derive(Parser)]
#[command(name = "trajsim", version, about = "Trajectory-based discrete-event simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a model and print a summary of its replications
    Run {
        model: PathBuf,
        /// Base seed; defaults to the model's
        #[arg(long)]
        seed: Option<u64>,
        /// Number of replications; defaults to the model's
        #[arg(long)]
        reps: Option<usize>,
        /// Horizon; defaults to the model's
        #[arg(long)]
        until: Option<f64>,
        /// Worker threads (0 = all cores)
        #[arg(long, env = "TRAJSIM_JOBS", default_value_t = 0)]
        jobs: usize,
        /// Directory that receives the monitoring tables as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and compile a model without running it
    Validate { model: PathBuf },
    /// Time one of the relative performance suites
    Bench {
        suite: SuiteArg,
        /// Problem size; 0 gives no rows
        #[arg(long)]
        n: Option<u64>,
        /// Timed runs per case
        #[arg(long, default_value_t = 5)]
        runs: usize,
    },
    /// Closed-form results
    Analytic {
        #[command(subcommand)]
        which: Analytic,
    },
}

#[derive(Subcommand)]
enum Analytic {
    /// M/M/1 queue
    Mm1 {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SuiteArg {
    Mm1Scaling,
    BatchMSweep,
    ThunkVsConstant,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Mm1Scaling => Suite::Mm1Scaling,
            SuiteArg::BatchMSweep => Suite::BatchMSweep,
            SuiteArg::ThunkVsConstant => Suite::ThunkVsConstant,
        }
    }
}

const MODEL_ERROR: u8 = 1;
const RUNTIME_ERROR: u8 = 2;

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(MODEL_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run {
            model,
            seed,
            reps,
            until,
            jobs,
            out,
        } => {
            let m = match model::load(&model) {
                Ok(m) => m,
                Err(e) => return fail(MODEL_ERROR, e),
            };
            let meta = m.meta();
            let Some(until) = until.or(meta.horizon) else {
                return fail(MODEL_ERROR, format!("{}: no horizon; set one in the model or pass --until", model.display()));
            };
            let opts = RunOptions {
                seed: seed.unwrap_or(meta.seed),
                reps: reps.unwrap_or(meta.replications),
                until,
                jobs,
            };
            let report = match run_model(&m, opts) {
                Ok(r) => r,
                Err(e) => return fail(RUNTIME_ERROR, e),
            };
            print!("{report}");
            if let Some(dir) = out {
                match export::export_csv(&report, &dir) {
                    Ok(files) => {
                        for f in files {
                            println!("wrote {}", f.display());
                        }
                    }
                    Err(e) => return fail(RUNTIME_ERROR, e),
                }
            }
            ExitCode::SUCCESS
        }
        Command::Validate { model } => match model::load(&model) {
            Ok(m) => {
                println!(
                    "{}: ok ({} resources, {} generators)",
                    m.meta().name,
                    m.ast.resources.len(),
                    m.ast.generators.len()
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(MODEL_ERROR, e),
        },
        Command::Bench { suite, n, runs } => {
            let suite = Suite::from(suite);
            let rows = run_suite(suite, n.unwrap_or(suite.default_n()), runs);
            println!("{}", suite.name());
            print!("{}", Table(&rows));
            ExitCode::SUCCESS
        }
        Command::Analytic {
            which: Analytic::Mm1 { lambda, mu },
        } => match analytic::mm1(lambda, mu) {
            Ok(r) => {
                println!("{r}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(MODEL_ERROR, e),
        },
    }
}
