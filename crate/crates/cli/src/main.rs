use std::f64::consts::{FRAC_PI_6, PI};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mdsteer::adversary::{constraint_report, BiasModel};
use mdsteer::behavior::{
    chsh_value, correlators, no_signalling_check_with, pr_box, randomness_behavior, tilted_behavior, Behavior,
};
use mdsteer::inequality::{local_bound, md_operator};
use mdsteer::io::{
    behavior_to_json, model_to_json, parse_behavior, parse_model, write_curve_csv, write_curve_json, FormatError,
};
use mdsteer::kernel::Direction;
use mdsteer::optimizer::{curve, linear_grid, CurveKind, OptimizerConfig};
use mdsteer::oracle::bound_sweep;
use mdsteer::steering::{assemblage_from_mdlhs, mdlhv_decomposition_check, MdLhsModel};
use mdsteer::tolerance::Tolerances;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const EXIT_IO: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

/// Measurement-dependent steering toolkit.
#[derive(Parser)]
#[command(name = "mdsteer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the MD operator on a behavior file.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Emit a curve of the operator value over a p grid.
    Curve {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        #[arg(long, default_value_t = 0.5)]
        p_max: f64,
        /// Number of grid points, endpoints included.
        #[arg(long, default_value_t = 51, value_parser = clap::value_parser!(u32).range(1..))]
        steps: u32,
        #[arg(long, default_value_t = FRAC_PI_6)]
        delta: f64,
        #[arg(long, default_value_t = PI / 12.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Search arbitrary Bloch directions instead of the x-z plane.
        #[arg(long)]
        full_sphere: bool,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
        format: DataFormat,
    },
    /// Sample extremal hidden-variable strategies and compare with the bound.
    Oracle {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Setting bias of the two-valued hidden-variable adversary.
    Adversary {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Write a reference behavior as JSON.
    Behavior {
        #[arg(long, value_enum)]
        kind: BehaviorKind,
        #[arg(long, default_value_t = FRAC_PI_6)]
        delta: f64,
        #[arg(long, default_value_t = PI / 12.0)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a hidden-state model reproduces its assemblage, or emit a
    /// random one.
    Model {
        #[arg(long = "in", conflicts_with = "random")]
        input: Option<PathBuf>,
        /// Number of hidden-variable values of a random model.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        random: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Local,
    Prbox,
    Quantum,
    Tilted,
    Randomness,
}

#[derive(Clone, Copy, ValueEnum)]
enum BehaviorKind {
    Prbox,
    Uniform,
    Tilted,
    Randomness,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    Csv,
    Json,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<mdsteer::Error> for Failure {
    fn from(e: mdsteer::Error) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: e.to_string(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::io(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::io(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_IO)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    let tol = Tolerances::from_env().map_err(|e| Failure::io(format!("{}: {e}", mdsteer::tolerance::TOLERANCE_ENV)))?;
    match cli.command {
        Command::Eval { input, p, format } => eval(&input, p, format, &tol),
        Command::Curve {
            kind,
            p_min,
            p_max,
            steps,
            delta,
            gamma,
            seed,
            full_sphere,
            out,
            format,
        } => {
            let kind = match kind {
                Kind::Local => CurveKind::Local,
                Kind::Prbox => CurveKind::PrBox,
                Kind::Quantum => CurveKind::Quantum,
                Kind::Tilted => CurveKind::Tilted { delta },
                Kind::Randomness => CurveKind::Randomness { gamma },
            };
            let config = OptimizerConfig {
                seed,
                full_sphere,
                ..OptimizerConfig::default()
            };
            let points = curve(kind, &linear_grid(p_min, p_max, steps as usize), &config)?;
            with_output(out.as_deref(), |w| match format {
                DataFormat::Csv => write_curve_csv(kind, &points, w),
                DataFormat::Json => write_curve_json(&points, w),
            })?;
            Ok(0)
        }
        Command::Oracle { p, samples, seed } => {
            let report = bound_sweep(p, samples as usize, seed)?;
            println!("{}", to_json(&report));
            Ok(if report.pass { 0 } else { EXIT_VIOLATION })
        }
        Command::Adversary {
            theta,
            phi,
            delta,
            format,
        } => {
            let report = constraint_report(&BiasModel::new(theta, phi, delta)?);
            match format {
                ReportFormat::Json => println!("{}", to_json(&report)),
                ReportFormat::Text => {
                    println!("p(lambda) = {:?}", report.p_lambda);
                    for (i, row) in report.p_x_given_lambda.iter().enumerate() {
                        println!("p(x|lambda{}) = {row:?}", i + 1);
                    }
                    println!("p(x1) = {}", report.p_x1);
                    println!("p(x2) = {}", report.p_x2);
                    println!("max l = {}", report.max_l);
                    println!("measurement independent: {}", report.independent);
                }
            }
            Ok(0)
        }
        Command::Behavior { kind, delta, gamma, out } => {
            let b = match kind {
                BehaviorKind::Prbox => pr_box(),
                BehaviorKind::Uniform => Behavior::uniform(),
                BehaviorKind::Tilted => tilted_behavior(delta)?,
                BehaviorKind::Randomness => randomness_behavior(gamma)?,
            };
            with_output(out.as_deref(), |w| {
                writeln!(w, "{}", behavior_to_json(&b))?;
                Ok(())
            })?;
            Ok(0)
        }
        Command::Model {
            input,
            random,
            seed,
            out,
        } => model(input.as_deref(), random, seed, out.as_deref(), &tol),
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct EvalReport {
    p: f64,
    #[serde(rename = "I")]
    value: f64,
    bound: f64,
    delta: f64,
    chsh: f64,
    correlators: [f64; 4],
    no_signalling: mdsteer::behavior::NoSignallingReport,
}

fn eval(input: &Path, p: f64, format: ReportFormat, tol: &Tolerances) -> CliResult<u8> {
    let text = std::fs::read_to_string(input).map_err(|e| Failure::io(format!("{}: {e}", input.display())))?;
    let behavior = parse_behavior(&text, tol)?;
    let c = correlators(&behavior);
    let value = md_operator(&c, p)?;
    let bound = local_bound(p)?;
    let report = EvalReport {
        p,
        value,
        bound,
        delta: value - bound,
        chsh: chsh_value(&behavior),
        correlators: c.to_array(),
        no_signalling: no_signalling_check_with(&behavior, tol),
    };
    match format {
        ReportFormat::Json => println!("{}", to_json(&report)),
        ReportFormat::Text => {
            println!("I = {}", report.value);
            println!("bound = {}", report.bound);
            println!("delta = {}", report.delta);
            println!("CHSH = {}", report.chsh);
            let ns = report.no_signalling;
            println!(
                "no-signalling: {} (max deviation {})",
                if ns.pass { "pass" } else { "fail" },
                ns.max_deviation
            );
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct ModelReport {
    lambdas: usize,
    residual: f64,
    pass: bool,
}

fn model(input: Option<&Path>, random: Option<u32>, seed: u64, out: Option<&Path>, tol: &Tolerances) -> CliResult<u8> {
    match (input, random) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            let m = parse_model(&text, tol)?;
            assemblage_from_mdlhs(&m)?;
            let residual = mdlhv_decomposition_check(&m, &[Direction::z(), Direction::x()])?;
            let report = ModelReport {
                lambdas: m.lambdas(),
                residual,
                pass: residual <= tol.equality,
            };
            println!("{}", to_json(&report));
            Ok(if report.pass { 0 } else { EXIT_DOMAIN })
        }
        (None, Some(n)) => {
            let m = MdLhsModel::random(n as usize, &mut ChaCha8Rng::seed_from_u64(seed));
            with_output(out, |w| {
                writeln!(w, "{}", model_to_json(&m))?;
                Ok(())
            })?;
            Ok(0)
        }
        _ => Err(Failure::io("give exactly one of --in or --random")),
    }
}

fn with_output<F>(path: Option<&Path>, write: F) -> CliResult
where
    F: FnOnce(&mut dyn Write) -> Result<(), FormatError>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure::io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report fields are plain data")
}
