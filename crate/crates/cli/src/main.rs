use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use geompert::models::{builtin, builtins, BUILTIN_NAMES};
use geompert::oracle::DEFAULT_WINDOW;
use geompert::Gauge;
use geompert_cli::error::{EXIT_FAIL, EXIT_PASS};
use geompert_cli::pipeline::{default_window_points, frame_options_from_env, write_outputs};
use geompert_cli::{parse_model, run_pipeline, run_sweep, CheckSet, CliError, ModelDocument, Settings, Verdict};

#[derive(Parser)]
#[command(name = "geompert", version, about = "Non-Hermitian perturbation series from evolution generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GaugeArg {
    /// Zero diagonal of every K₀ coefficient in the eigenframe.
    ZeroDiag,
}

#[derive(Subcommand)]
enum Command {
    /// Compute generators and corrections; write report.json and series.csv.
    Expand {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value = "zero-diag")]
        gauge: GaugeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the series against exact diagonalization; print the report.
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = DEFAULT_WINDOW.0)]
        q_lo: f64,
        #[arg(long, default_value_t = DEFAULT_WINDOW.1)]
        q_hi: f64,
        /// Log-spaced samples across [q-lo, q-hi] (at least 8 per decade);
        /// defaults to 12 per decade.
        #[arg(long)]
        points: Option<usize>,
        /// Also write report.json and series.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact spectrum on [0, q-max]; write sweep.csv and report.json.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        q_max: f64,
        #[arg(long)]
        points: usize,
        /// Series order used for the residual column.
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Built-in models.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
}

#[derive(Subcommand)]
enum ModelsAction {
    /// List built-in model names.
    List,
    /// Print a built-in model as a model file.
    Export { name: String },
}

fn load(path: &Path) -> Result<ModelDocument, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&bytes)
}

fn settings(order: usize) -> Result<Settings, CliError> {
    if order == 0 {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    let env = std::env::var("GEOMPERT_GAP_TOL").ok();
    let mut s = Settings::new(order);
    s.frame = frame_options_from_env(env.as_deref())?;
    Ok(s)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Expand { model, order, gauge, out } => {
            let doc = load(&model)?;
            let mut s = settings(order)?;
            s.gauge = match gauge {
                GaugeArg::ZeroDiag => Gauge::ZeroDiagonal,
            };
            let c = run_pipeline(&doc, &s)?;
            write_outputs(&out, &[("report.json", c.report.to_json()), ("series.csv", c.report.series_csv())])?;
            eprintln!("{}: verdict {:?}", doc.name, c.report.verdict);
            Ok(verdict_code(c.report.verdict))
        }
        Command::Verify { model, order, q_lo, q_hi, points, out } => {
            if !(q_lo > 0.0 && q_hi > q_lo && q_hi.is_finite()) {
                return Err(CliError::Usage(format!("need 0 < --q-lo < --q-hi, got {q_lo} and {q_hi}")));
            }
            let window = (q_lo, q_hi);
            let points = points.unwrap_or_else(|| default_window_points(window));
            let needed = (8.0 * (q_hi / q_lo).log10()).ceil() as usize + 1;
            if points < needed.max(4) {
                return Err(CliError::Usage(format!("--points {points} is below 8 per decade (need {needed})")));
            }
            let doc = load(&model)?;
            let mut s = settings(order)?;
            s.checks = CheckSet { internal: true, oracle: true };
            s.window = window;
            s.window_points = points;
            let c = run_pipeline(&doc, &s)?;
            if let Some(dir) = out {
                write_outputs(&dir, &[("report.json", c.report.to_json()), ("series.csv", c.report.series_csv())])?;
            }
            print!("{}", c.report.to_json());
            for check in &c.report.verification {
                eprintln!("{:<20} {}", check.name, if check.passed { "pass" } else { "FAIL" });
            }
            Ok(verdict_code(c.report.verdict))
        }
        Command::Sweep { model, q_max, points, order, out } => {
            if !(q_max > 0.0 && q_max.is_finite()) || points < 2 {
                return Err(CliError::Usage("need --q-max > 0 and --points >= 2".into()));
            }
            let doc = load(&model)?;
            let s = settings(order)?;
            let (c, table) = run_sweep(&doc, &s, q_max, points)?;
            write_outputs(&out, &[("report.json", c.report.to_json()), ("sweep.csv", table)])?;
            Ok(verdict_code(c.report.verdict))
        }
        Command::Models { action } => match action {
            ModelsAction::List => {
                for m in builtins() {
                    println!("{}\t{}", m.name, m.description);
                }
                Ok(EXIT_PASS)
            }
            ModelsAction::Export { name } => {
                let m = builtin(&name).ok_or_else(|| {
                    CliError::Usage(format!("unknown model {name:?}; available: {}", BUILTIN_NAMES.join(", ")))
                })?;
                println!("{}", ModelDocument::from_builtin(&m).to_json());
                Ok(EXIT_PASS)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
