use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use randcert::acceptance::{self, AcceptanceOptions};
use randcert::behavior_io::BehaviorFile;
use randcert::commands::{self, CurveSource, EvalInput, Grid, SCAN_SAMPLES};
use randcert::config::{parse_range, Format, LevelArg, ModelArg, Range, RunConfig, WitnessArg, DEFAULT_SEED, OUT_DIR_ENV};
use randcert::output::{emit, Report};
use randcert::{CliError, CliResult};
use randcert_core::quantum::{MeasurementSettings, PureState, StateSign};

/// Certified-randomness curves, tables and checks for the two-party,
/// two-setting, two-outcome Bell scenario.
///
/// Output goes to --out, else to a file named after the command inside the
/// directory in RANDCERT_OUT_DIR, else to stdout.
///
/// Exit codes: 0 success, 1 acceptance failures, 2 configuration error,
/// 3 infeasible witness value, 4 solver did not converge, 5 output error.
#[derive(Debug, Parser)]
#[command(name = "randcert", version)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for every randomized start and sample.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Optimizer starts per problem (default: 100 for Hardy, 200 for CL).
    #[arg(long, global = true)]
    starts: Option<usize>,

    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct Points {
    /// A single witness value.
    #[arg(long, conflicts_with = "range", allow_negative_numbers = true)]
    value: Option<f64>,

    /// Evenly spaced values `lo:hi:n`, both ends included.
    #[arg(long, value_parser = parse_range)]
    range: Option<Range>,
}

impl Points {
    fn grid(&self) -> Grid {
        match (self.value, self.range) {
            (Some(v), _) => Grid::Value(v),
            (_, Some(r)) => Grid::Range(r),
            _ => Grid::Default,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Guaranteed-randomness curve for one bound model or relaxation level.
    Curve {
        #[arg(long, value_enum)]
        witness: WitnessArg,
        #[arg(long, value_enum, conflicts_with = "level", required_unless_present = "level")]
        model: Option<ModelArg>,
        #[arg(long, value_enum)]
        level: Option<LevelArg>,
        #[command(flatten)]
        points: Points,
        /// Iteration cap for the SDP solver.
        #[arg(long)]
        sdp_max_iter: Option<usize>,
    },
    /// Hardy, CL and CHSH relaxation bounds side by side at P = (B - 2)/4.
    Compare {
        #[command(flatten)]
        points: Points,
        #[arg(long, value_enum, default_value_t = LevelArg::L1ab)]
        level: LevelArg,
        #[arg(long)]
        sdp_max_iter: Option<usize>,
    },
    /// The four optimizer table rows with parameters and residuals.
    Tables,
    /// Extremal scan over mixtures of the witness face's vertices.
    Scan {
        #[arg(long, value_enum)]
        witness: WitnessArg,
        #[arg(long, default_value_t = SCAN_SAMPLES)]
        samples: usize,
    },
    /// Runs the acceptance suite; exits 1 if any criterion fails.
    Verify {
        #[arg(long)]
        sdp_max_iter: Option<usize>,
        /// Comma-separated criterion numbers to run.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
        #[arg(long, default_value_t = SCAN_SAMPLES)]
        scan_samples: usize,
    },
    /// Behavior, witnesses and min-entropy for a state and settings, or for
    /// a behavior file.
    Eval {
        /// Behavior JSON file.
        #[arg(long, conflicts_with_all = ["alpha", "sign", "theta", "phi"])]
        behavior: Option<PathBuf>,
        /// State amplitude in α|01⟩ ± √(1−α²)|10⟩.
        #[arg(long, required_unless_present = "behavior")]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value_t = SignArg::Minus)]
        sign: SignArg,
        /// Polar angles θx1,θx2,θy1,θy2.
        #[arg(long, value_delimiter = ',', required_unless_present = "behavior")]
        theta: Vec<f64>,
        /// Azimuthal angles φx1,φx2,φy1,φy2.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.0, 0.0, 0.0])]
        phi: Vec<f64>,
    },
    /// Dumps the 24 no-signalling vertices.
    Vertices,
}

fn write(cfg: &RunConfig, stem: &str, r: &Report) -> CliResult<()> {
    let bytes = r.render(cfg.format)?;
    emit(&bytes, cfg.output_path(stem).as_deref())
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let cfg = RunConfig {
        seed: cli.common.seed,
        starts: cli.common.starts,
        format: cli.common.format,
        out: cli.common.out,
    };
    if cfg.starts == Some(0) {
        return Err(CliError::Config("--starts must be at least 1".into()));
    }
    match cli.command {
        Command::Curve {
            witness,
            model,
            level,
            points,
            sdp_max_iter,
        } => {
            let source = match (model, level) {
                (Some(m), _) => CurveSource::Model(m.into()),
                (_, Some(l)) => CurveSource::Level(l.into()),
                _ => return Err(CliError::Config("curve needs --model or --level".into())),
            };
            let r = commands::curve(&cfg, witness.into(), source, points.grid(), sdp_max_iter)?;
            write(&cfg, "curve", &r)?;
        }
        Command::Compare {
            points,
            level,
            sdp_max_iter,
        } => {
            let r = commands::compare(&cfg, points.grid(), level.into(), sdp_max_iter)?;
            write(&cfg, "compare", &r)?;
        }
        Command::Tables => {
            let (rows, r) = commands::tables(&cfg)?;
            for row in rows.iter().filter(|r| r.flagged()) {
                eprintln!(
                    "flagged: table {} row {}: {:.4} bits against {:.4}",
                    row.spec.table, row.spec.row, row.outcome.best_value, row.spec.target_bits
                );
            }
            write(&cfg, "tables", &r)?;
        }
        Command::Scan { witness, samples } => {
            let r = commands::scan(&cfg, witness.into(), samples)?;
            write(&cfg, "scan", &r)?;
        }
        Command::Verify {
            sdp_max_iter,
            only,
            scan_samples,
        } => {
            let opts = AcceptanceOptions {
                seed: cfg.seed,
                starts: cfg.starts,
                sdp_max_iter,
                scan_samples,
                only,
            };
            let res = acceptance::run_with(&opts, |c| eprintln!("{}", c.line()));
            write(&cfg, "verify", &acceptance::report(&opts, &res))?;
            if res.iter().any(|c| !c.passed) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Eval {
            behavior,
            alpha,
            sign,
            theta,
            phi,
        } => {
            let input = match behavior {
                Some(p) => EvalInput::Behavior(BehaviorFile::parse(&std::fs::read_to_string(p)?)?),
                None => {
                    let sign = match sign {
                        SignArg::Plus => StateSign::Plus,
                        SignArg::Minus => StateSign::Minus,
                    };
                    let state = PureState::new(alpha.unwrap_or_default(), sign)?;
                    let to4 = |v: &[f64]| -> CliResult<[f64; 4]> {
                        v.try_into().map_err(|_| CliError::Config("angles need exactly four values".into()))
                    };
                    let settings = MeasurementSettings::new(to4(&theta)?, to4(&phi)?)?;
                    EvalInput::State { state, settings }
                }
            };
            let e = commands::evaluate(&input);
            match cfg.format {
                Format::Csv => write(&cfg, "eval", &commands::eval_report(&cfg, &e))?,
                Format::Json => {
                    let mut b = serde_json::to_vec_pretty(&commands::eval_json(&cfg, &e))?;
                    b.push(b'\n');
                    emit(&b, cfg.output_path("eval").as_deref())?;
                }
            }
        }
        Command::Vertices => write(&cfg, "vertices", &commands::vertices(&cfg))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("randcert: {e}");
            if let CliError::Config(_) = e {
                eprintln!("(output directory variable: {OUT_DIR_ENV})");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
