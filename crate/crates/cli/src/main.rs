use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use nikstar::checks::Check;
use nikstar::harness::{self, PrecisionPolicy, RecurrenceData, VerifyOptions};
use nikstar::limits::LimitTable;
use nikstar::measures::{load_preset, MeasureSet};
use nikstar::mop::{psi_zeros, MopSolver, SecondKindEvaluator};
use nikstar::num::{parse_real, Cplx};
use nikstar::surface::solve_uniformization;
use nikstar::{Error, StarSystemConfig};

#[derive(Parser)]
#[command(name = "nikstar", version, about = "Multiple orthogonal polynomials on star-like sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Config JSON file, or one of the presets cfg_a, cfg_b, cfg_c.
    #[arg(long)]
    config: String,
    #[arg(long, env = "NIKSTAR_PRECISION_BITS")]
    precision_bits: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check and write checks.json plus plot data.
    Verify {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 20)]
        lambda_max: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// The type II polynomial Q_n and the zeros of its second-kind functions.
    Mop {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// a_n for n = p..=n_max as CSV.
    Recurrence {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        n_max: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Uniformizing map, conformal families and predicted limits.
    Surface {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ratio deviations on a grid of star-plane points (CSV with re, im).
    Ratio {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        rho: usize,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 20)]
        lambda_max: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge every checks.json under a directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Checks,
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn load_config(args: &ConfigArgs) -> Result<StarSystemConfig, Failure> {
    let mut config = match load_preset(&args.config) {
        Some(c) => c,
        None => StarSystemConfig::load(Path::new(&args.config))?,
    };
    if let Some(bits) = args.precision_bits {
        config = config.with_precision(bits);
    }
    config.validate()?;
    Ok(config)
}

fn write_json(path: &Path, v: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Input(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print_checks(checks: &[Check]) -> Result<(), Failure> {
    for c in checks {
        println!("{}", c.line());
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn read_grid(path: &Path, prec: u32) -> Result<Vec<Cplx>, Failure> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| Failure::Input(e.to_string()))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Failure::Input(format!("grid needs a column {name}")))
    };
    let (ire, iim) = (col("re")?, col("im")?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Failure::Input(e.to_string()))?;
        let re = parse_real(prec, rec.get(ire).unwrap_or("").trim())?;
        let im = parse_real(prec, rec.get(iim).unwrap_or("").trim())?;
        out.push(Cplx::new(re, im));
    }
    if out.is_empty() {
        return Err(Failure::Input("grid is empty".into()));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Verify { cfg, lambda_max, out } => {
            let config = load_config(&cfg)?;
            let options = VerifyOptions { lambda_max, ..VerifyOptions::default() };
            let v = harness::verify(&config, &options)?;
            v.write(&out)?;
            for w in &v.report.warnings {
                eprintln!("warning: {w}");
            }
            print_checks(&v.report.checks)
        }
        Command::Mop { cfg, n, out } => {
            let config = load_config(&cfg)?;
            let shape = config.shape();
            let set = MeasureSet::build(&config)?;
            let q = MopSolver::new(&set, shape.degree(n)).compute_qd(n)?;
            let ev = SecondKindEvaluator::new(&set, q.clone());
            let zeros = (0..shape.p())
                .map(|k| {
                    let z = psi_zeros(&ev, k)?;
                    Ok(json!({"k": k, "zeros": z.zeros.iter().map(nikstar::num::to_decimal).collect::<Vec<_>>()}))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            write_json(&out, &json!({"config_digest": config.digest(), "polynomial": q.to_json(), "second_kind_zeros": zeros}))
        }
        Command::Recurrence { cfg, n_max, out } => {
            let config = load_config(&cfg)?;
            let data = RecurrenceData::prepare(&config, n_max, PrecisionPolicy::Raise)?;
            for w in &data.warnings {
                eprintln!("warning: {w}");
            }
            harness::write_recurrence_csv(&out, &data)?;
            Ok(())
        }
        Command::Surface { cfg, out } => {
            let config = load_config(&cfg)?;
            let table = LimitTable::build(solve_uniformization(&config)?)?;
            let checks = harness::surface_checks(&table, 100)?;
            write_json(
                &out,
                &json!({
                    "config_digest": config.digest(),
                    "surface": table.surface.to_json(),
                    "limits": table.to_json(),
                    "checks": checks,
                }),
            )?;
            print_checks(&checks)
        }
        Command::Ratio { cfg, rho, grid, lambda_max, out } => {
            let config = load_config(&cfg)?;
            if rho >= config.shape().period() {
                return Err(Failure::Input(format!("rho must be below {}", config.shape().period())));
            }
            let points = read_grid(&grid, config.precision_bits)?;
            let run = harness::run_ratio(&config, rho, lambda_max, &points)?;
            harness::write_ratio_csv(&out, &[run])?;
            Ok(())
        }
        Command::Report { input, out } => {
            let body = harness::emit_report(&input, &out)?;
            println!("{} checks, {} failed", body["checks"], body["failed"]);
            if body["passed"] == json!(true) {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
