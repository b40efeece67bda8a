//! `spiderlift`: command-line front end for the spiderlift library.
//!
//! Every subcommand prints a JSON document on stdout, except `approximate`
//! with `--out`, which writes CSV or JSON to the given path.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error (including a
//! failed `verify` property), 3 no convergence.

mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use spiderlift::angle_lift::{lift_angle, lift_inverse, orbit_avoids_sector};
use spiderlift::angles::{kneading, orbit, to_digits};
use spiderlift::external_address::{address_plan, theta_at};
use spiderlift::spider_combinatorics::{
    angular_class, build_exp_spider, build_spider, companion_pair, internal_address, is_satellite,
    orbit_portrait_from_pair,
};
use spiderlift::spider_dynamics::{
    approximate, exp_spider_solve, poly_spider_solve, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use spiderlift::{Angle, Error, ExternalAddress};

use crate::output::{
    approximation_csv, approximation_json, complex, portrait_json, report_json, spider_json,
};

#[derive(Parser, Debug)]
#[command(
    name = "spiderlift",
    version,
    about = "Degree-raising lifts of angles and spider solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lift an angle from degree d to d + 1 with Z_j, or invert the lift.
    Lift {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        j: u32,
        #[arg(long)]
        theta: String,
        /// Treat --theta as an angle of degree d + 1 and return its preimage.
        #[arg(long)]
        inverse: bool,
    },
    /// Address plan of an external address and its angles θ_d.
    Address {
        #[arg(long)]
        s: String,
        /// Degrees to evaluate; defaults to the five smallest admissible ones.
        #[arg(long, value_delimiter = ',')]
        degrees: Vec<u32>,
    },
    /// Forward orbit of an angle under multiplication by d.
    AngleOrbit(AngleArgs),
    /// Kneading sequence and internal address of an angle.
    Kneading(AngleArgs),
    /// Orbit portrait generated by a pair, or by an angle and its companion.
    Portrait {
        #[arg(long)]
        d: u32,
        #[arg(long, conflicts_with_all = ["alpha", "beta"], required_unless_present_all = ["alpha", "beta"])]
        theta: Option<String>,
        #[arg(long, requires = "beta")]
        alpha: Option<String>,
        #[arg(long, requires = "alpha")]
        beta: Option<String>,
    },
    /// Combinatorial spider of a polynomial angle or an exponential address.
    Spider {
        #[arg(long, requires = "theta", conflicts_with = "s")]
        d: Option<u32>,
        #[arg(long, requires = "d")]
        theta: Option<String>,
        #[arg(long, required_unless_present = "d")]
        s: Option<String>,
    },
    /// Angular class of a strictly preperiodic angle, optionally with its lift.
    Class {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        theta: String,
        /// Also lift the class with Z_j and compare with the class at d + 1.
        #[arg(long)]
        j: Option<u32>,
    },
    /// Solve the polynomial spider of an angle.
    SolvePoly {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        theta: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve the exponential spider of an external address.
    SolveExp {
        #[arg(long)]
        s: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Polynomial solves along the degree ladder of an address, plus the limit.
    Approximate {
        #[arg(long)]
        s: String,
        #[arg(long, value_delimiter = ',', required = true)]
        degrees: Vec<u32>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format; defaults to the extension of --out, else JSON.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run the randomized property suites.
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Suite::All)]
        suite: verify::Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct AngleArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    theta: String,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Include the residual of every iteration.
    #[arg(long)]
    history: bool,
}

impl SolverArgs {
    fn validated(&self) -> Result<(f64, usize), Failure> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid(format!("tolerance {} must be positive", self.tol)));
        }
        Ok((self.tol, self.max_iter))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(Error::NoConvergence { .. }) => 3,
            Failure::Lib(_) | Failure::Verify => 2,
            Failure::Io(_) => 1,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Lib(Error::InvalidArgument(msg.into()))
}

fn degree(d: u32) -> Result<u32, Failure> {
    if d < 2 {
        return Err(invalid(format!("degree {d} must be at least 2")));
    }
    Ok(d)
}

fn angle(s: &str) -> Result<Angle, Failure> {
    Ok(s.parse()?)
}

fn address(s: &str) -> Result<ExternalAddress, Failure> {
    Ok(s.parse()?)
}

fn run(command: Command) -> Result<Value, Failure> {
    match command {
        Command::Lift {
            d,
            j,
            theta,
            inverse,
        } => {
            let d = degree(d)?;
            let t = angle(&theta)?;
            if inverse {
                let pre = lift_inverse(d + 1, j, &t)?;
                return Ok(
                    json!({ "d": d, "j": j, "phi": t.to_string(), "theta": pre.to_string() }),
                );
            }
            let z = lift_angle(d, j, &t)?;
            Ok(json!({
                "d": d,
                "j": j,
                "theta": t.to_string(),
                "lift": z.to_string(),
                "digits": to_digits(d, &t).to_string(),
                "lift_digits": to_digits(d + 1, &z).to_string(),
                "avoids_sector": orbit_avoids_sector(d + 1, j, &z),
            }))
        }
        Command::Address { s, degrees } => {
            let plan = address_plan(&address(&s)?)?;
            let degrees = if degrees.is_empty() {
                (plan.min_degree..plan.min_degree + 5).collect()
            } else {
                degrees
            };
            let angles = degrees
                .iter()
                .map(|&d| {
                    let t = theta_at(&plan, degree(d)?)?;
                    Ok(json!({ "d": d, "theta": t.to_string(), "digits": to_digits(d, &t).to_string() }))
                })
                .collect::<Result<Vec<Value>, Failure>>()?;
            Ok(json!({
                "address": plan.address.to_string(),
                "min_degree": plan.min_degree,
                "j": plan.j,
                "j_alternate": plan.j_alternate,
                "q": plan.q.to_string(),
                "q_tilde": plan.q_tilde.to_string(),
                "ell": plan.ell,
                "k": plan.k,
                "angles": angles,
            }))
        }
        Command::AngleOrbit(AngleArgs { d, theta }) => {
            let d = degree(d)?;
            let t = angle(&theta)?;
            let o = orbit(d, &t);
            Ok(json!({
                "d": d,
                "theta": t.to_string(),
                "preperiod": o.preperiod,
                "period": o.period,
                "digits": to_digits(d, &t).to_string(),
                "points": o.points.iter().map(Angle::to_string).collect::<Vec<_>>(),
            }))
        }
        Command::Kneading(AngleArgs { d, theta }) => {
            let d = degree(d)?;
            let t = angle(&theta)?;
            let nu = kneading(d, &t)?;
            let a = internal_address(&nu);
            Ok(json!({
                "d": d,
                "theta": t.to_string(),
                "kneading": nu.to_string(),
                "internal_address": a.entries,
                "truncated": a.truncated,
                "satellite": is_satellite(&a).ok(),
            }))
        }
        Command::Portrait {
            d,
            theta,
            alpha,
            beta,
        } => {
            let d = degree(d)?;
            let (alpha, beta) = match (theta, alpha, beta) {
                (Some(t), _, _) => {
                    let t = angle(&t)?;
                    let other = companion_pair(d, &t)
                        .ok_or_else(|| invalid(format!("{t} has no companion under μ_{d}")))?;
                    (t, other)
                }
                (None, Some(a), Some(b)) => (angle(&a)?, angle(&b)?),
                _ => unreachable!("clap enforces --theta or --alpha with --beta"),
            };
            Ok(portrait_json(&orbit_portrait_from_pair(d, &alpha, &beta)?))
        }
        Command::Spider { d, theta, s } => {
            let spider = match (d, theta, s) {
                (Some(d), Some(t), _) => build_spider(degree(d)?, &angle(&t)?),
                (_, _, Some(s)) => build_exp_spider(&address(&s)?),
                _ => unreachable!("clap enforces --d with --theta, or --s"),
            };
            Ok(spider_json(&spider))
        }
        Command::Class { d, theta, j } => {
            let d = degree(d)?;
            let t = angle(&theta)?;
            let class = angular_class(d, &t)?;
            let strings = |c: &[Angle]| c.iter().map(Angle::to_string).collect::<Vec<_>>();
            let mut out = json!({ "d": d, "theta": t.to_string(), "class": strings(&class) });
            if let Some(j) = j {
                let mut lifted = class
                    .iter()
                    .map(|x| lift_angle(d, j, x))
                    .collect::<Result<Vec<_>, _>>()?;
                lifted.sort();
                let target = angular_class(d + 1, &lift_angle(d, j, &t)?)?;
                out["j"] = json!(j);
                out["lifted_class"] = json!(strings(&lifted));
                out["lifted_matches"] = json!(lifted == target);
            }
            Ok(out)
        }
        Command::SolvePoly { d, theta, solver } => {
            let (tol, max_iter) = solver.validated()?;
            let r = poly_spider_solve(degree(d)?, &angle(&theta)?, tol, max_iter)?;
            Ok(report_json(&r, solver.history))
        }
        Command::SolveExp { s, solver } => {
            let (tol, max_iter) = solver.validated()?;
            let r = exp_spider_solve(&address(&s)?, tol, max_iter)?;
            Ok(report_json(&r, solver.history))
        }
        Command::Approximate {
            s,
            degrees,
            solver,
            out,
            format,
        } => {
            let (tol, max_iter) = solver.validated()?;
            for &d in &degrees {
                degree(d)?;
            }
            let approx = approximate(&address(&s)?, &degrees, tol, max_iter)?;
            let format = format.unwrap_or(match out.as_ref().and_then(|p| p.extension()) {
                Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
                _ => Format::Json,
            });
            let doc = approximation_json(&approx, solver.history);
            match (out, format) {
                (None, Format::Json) => Ok(doc),
                (None, Format::Csv) => {
                    print!("{}", approximation_csv(&approx).map_err(Failure::Io)?);
                    Ok(Value::Null)
                }
                (Some(path), format) => {
                    let text = match format {
                        Format::Csv => approximation_csv(&approx).map_err(Failure::Io)?,
                        Format::Json => output::pretty(&doc) + "\n",
                    };
                    std::fs::write(&path, text)
                        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                    let lambda = approx.exponential.as_ref().ok().map(|r| complex(r.lambda));
                    Ok(
                        json!({ "out": path.display().to_string(), "rows": approx.rows.len(), "lambda": lambda }),
                    )
                }
            }
        }
        Command::Verify { suite, seed } => {
            let report = verify::run(suite, seed);
            let passed = report.passed();
            let doc = report.to_json();
            if passed {
                Ok(doc)
            } else {
                println!("{}", output::pretty(&doc));
                Err(Failure::Verify)
            }
        }
    }
}

/// Caps the global rayon pool at `SPIDERLIFT_THREADS` when set.
fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("SPIDERLIFT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SPIDERLIFT_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(Value::Null) => ExitCode::SUCCESS,
        Ok(doc) => {
            println!("{}", output::pretty(&doc));
            ExitCode::SUCCESS
        }
        Err(failure) => {
            match &failure {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
                Failure::Verify => eprintln!("error: verification failed"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
