//! The `permadss` command line, callable in-process through [`run`].

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use permadss_core::calibration::check_calibration;
use permadss_core::fis_text::parse_fis_bytes;
use permadss_core::surface::SweepError;
use permadss_core::{export_grid, sweep, ExportFormat, PermanenceModels, Scenario};
use permadss_service::{evaluate, parse_fix, resolve_axes, EvaluateRequest};

/// Incentive-to-remain decision support for generics laboratories.
///
/// Models are read from the bundled `models/` directory, or from
/// `$PERMADSS_MODELS_DIR` when set.
#[derive(Debug, Parser)]
#[command(name = "permadss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one scenario at one point.
    Eval {
        #[arg(long, value_parser = parse_scenario)]
        scenario: Scenario,
        /// Expected NPV in euros (exponent notation accepted, e.g. 20e6).
        #[arg(long, allow_hyphen_values = true)]
        npv: f64,
        /// Number of generics in the portfolio.
        #[arg(long, allow_hyphen_values = true)]
        gen: f64,
        /// Diversification score, 0 to 5.
        #[arg(long, allow_hyphen_values = true)]
        divers: f64,
        /// Snap out-of-range inputs to the nearest bound instead of failing.
        #[arg(long)]
        clamp: bool,
        /// Print the full trace as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Sweep two inputs over their ranges with the third held fixed.
    Sweep {
        #[arg(long, value_parser = parse_scenario)]
        scenario: Scenario,
        /// Fixed input as VAR=VALUE, e.g. NPV=20e6.
        #[arg(long, value_parser = parse_fix_arg)]
        fix: (String, f64),
        #[arg(long, default_value_t = permadss_core::surface::DEFAULT_STEPS)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Horizontal axis variable (default depends on --fix).
        #[arg(long)]
        x: Option<String>,
        /// Vertical axis variable.
        #[arg(long)]
        y: Option<String>,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a .fis file and report problems.
    Validate { file: PathBuf },
    /// Check the bundled models against their calibration anchors.
    Calibrate {
        #[arg(long)]
        json: bool,
    },
    /// Start the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Directory of static files to serve at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: permadss_core::ModelError| e.to_string())
}

fn parse_fix_arg(s: &str) -> Result<(String, f64), String> {
    parse_fix(s, '=')
}

/// Failure that maps to exit code 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn models() -> Result<PermanenceModels, Failure> {
    Ok(PermanenceModels::load_default()?)
}

fn emit(out: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Failure> {
    match command {
        Command::Eval {
            scenario,
            npv,
            gen,
            divers,
            clamp,
            json,
        } => {
            let models = models()?;
            let req = EvaluateRequest {
                scenario,
                npv,
                gen,
                divers,
                clamp,
            };
            let res = evaluate(&models, &req, json).map_err(|e| Failure(e.message))?;
            if json {
                let mut text = serde_json::to_string(&res)?;
                text.push('\n');
                emit(out, text.as_bytes())?;
            } else {
                emit(out, format!("{}\n", res.incentive).as_bytes())?;
            }
        }
        Command::Sweep {
            scenario,
            fix,
            steps,
            format,
            x,
            y,
            out: path,
        } => {
            let models = models()?;
            let (x, y) = resolve_axes(&fix.0, x, y);
            let grid = sweep(models.system(scenario), (&fix.0, fix.1), &x, &y, steps).map_err(|e| match e {
                SweepError::Inference(inner) => Failure(permadss_core::ModelError::from(inner).to_string()),
                other => Failure(other.to_string()),
            })?;
            let format = match format {
                Format::Csv => ExportFormat::Csv,
                Format::Json => ExportFormat::Json,
            };
            let bytes = export_grid(&grid, format);
            match path {
                Some(path) => std::fs::write(&path, bytes)
                    .map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))?,
                None => emit(out, &bytes)?,
            }
        }
        Command::Validate { file } => {
            let bytes = std::fs::read(&file).map_err(|e| Failure(format!("cannot read {}: {e}", file.display())))?;
            let fis = parse_fis_bytes(&bytes).map_err(|e| {
                Failure(format!("{}:{}:{}: {}", file.display(), e.pos.line, e.pos.column, e.kind))
            })?;
            let line = format!("{} rules, {} variables\n", fis.rules().len(), fis.inputs().len() + 1);
            emit(out, line.as_bytes())?;
        }
        Command::Calibrate { json } => {
            let report = check_calibration(&models()?);
            let text = if json {
                serde_json::to_string_pretty(&report)?
            } else {
                report.to_string()
            };
            emit(out, format!("{text}\n").as_bytes())?;
            if !report.all_passed() {
                return Ok(1);
            }
        }
        Command::Serve { addr, static_dir } => {
            let models = Arc::new(models()?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(&addr)
                    .await
                    .map_err(|e| Failure(format!("cannot listen on {addr}: {e}")))?;
                writeln!(err, "listening on http://{}", listener.local_addr()?)?;
                err.flush()?;
                let app = permadss_service::router(models, static_dir);
                permadss_service::serve(listener, app).await?;
                Ok::<_, Failure>(())
            })?;
        }
    }
    Ok(0)
}

/// Runs one invocation and returns the exit status: 0 success, 1 domain
/// error, 2 usage error. Data goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return e.exit_code() as u8;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = writeln!(err, "error: {message}");
            1
        }
    }
}
