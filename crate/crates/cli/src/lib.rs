//! Command-line front end for the Grassmannian star product.
//!
//! Every command writes one JSON document; diagnostics go to stderr.
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 pole of a coefficient, 4 numeric failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use grassmann_star::center::{s_coeffs, t_from_characters};
use grassmann_star::characters::character_table;
use grassmann_star::geometry::{sample_point, FunctionExpr, PointZ, SpaceConfig};
use grassmann_star::rational::{fmt_rational, parse_rational};
use grassmann_star::star::{
    c_of, cp_star_eval, star_eval, verify_suite, CoefficientPath, LambdaMode, StarConfig, StarValue,
};
use grassmann_star::Error;
use num::BigRational;
use serde_json::{json, Map, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_POLE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gstar", version, about = "Star products on complex Grassmann manifolds")]
pub struct Cli {
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Character table of S_r.
    Chartable { r: usize },
    /// t polynomials and s coefficients of S_r at c = mu/lambda + p.
    Coeffs {
        r: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value = "1")]
        mu: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        lambda: String,
    },
    /// Evaluate f * g at a point.
    Star {
        f: PathBuf,
        g: PathBuf,
        #[command(flatten)]
        star: StarArgs,
        /// Use the projective-space closed form (p = 1, formal lambda).
        #[arg(long)]
        closed_form: bool,
        /// JSON file {"z": [[[re, im], ..], ..]}; sampled from the seed otherwise.
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Run the identity checks and report residuals.
    Verify {
        #[command(flatten)]
        star: StarArgs,
        /// Replaces every floating-point tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct StarArgs {
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    #[arg(long, default_value = "1")]
    pub mu: String,
    /// "formal" or a rational "num/den".
    #[arg(long, default_value = "formal", allow_hyphen_values = true)]
    pub lambda: String,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "classes")]
    pub path: String,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Pole { .. } => EXIT_POLE,
            Error::Singular(_) | Error::Numeric(_) => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// A JSON document and the exit code it should be reported with.
pub struct Outcome {
    pub document: Value,
    pub code: i32,
}

impl StarArgs {
    pub fn config(&self) -> Result<StarConfig, CliError> {
        let space = SpaceConfig::new(self.p, self.q, parse_rational(&self.mu)?)?;
        let mode = parse_lambda(&self.lambda)?;
        let path: CoefficientPath = self.path.parse()?;
        Ok(StarConfig::new(space, self.order, mode, path)?)
    }
}

pub fn parse_lambda(s: &str) -> Result<LambdaMode, CliError> {
    if s.trim() == "formal" {
        Ok(LambdaMode::Formal)
    } else {
        Ok(LambdaMode::Fixed(parse_rational(s)?))
    }
}

fn read_json(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn pair(c: num::complex::Complex64) -> Value {
    json!([c.re, c.im])
}

pub fn cmd_chartable(r: usize) -> Result<Value, CliError> {
    let table = character_table(r)?;
    Ok(serde_json::to_value(&*table).expect("character table serializes"))
}

pub fn cmd_coeffs(r: usize, p: usize, mu: &str, lambda: &str) -> Result<Value, CliError> {
    let mu = parse_rational(mu)?;
    let lambda = parse_rational(lambda)?;
    if mu <= BigRational::from_integer(0.into()) {
        return Err(CliError::usage("mu must be positive"));
    }
    if p == 0 {
        return Err(CliError::usage("p must be at least 1"));
    }
    let c = c_of(&mu, &lambda, p)?;
    let table = character_table(r)?;
    let mut t = Map::new();
    for f in &table.frames {
        let poly = t_from_characters(f)?;
        t.insert(f.to_string(), json!(poly.coeffs().iter().map(fmt_rational).collect::<Vec<_>>()));
    }
    let s = s_coeffs(r, &c)?;
    let mut s_json = Map::new();
    for (class, v) in s.classes().iter().zip(s.coeffs()) {
        s_json.insert(class.to_string(), json!(fmt_rational(v)));
    }
    let sum_check = s.augmentation();
    Ok(json!({
        "r": r,
        "p": p,
        "mu": fmt_rational(&mu),
        "lambda": fmt_rational(&lambda),
        "c": fmt_rational(&c),
        "t": t,
        "s": s_json,
        "sum_check": fmt_rational(&sum_check),
    }))
}

pub fn cmd_star(f: &Path, g: &Path, args: &StarArgs, closed_form: bool, point: Option<&Path>) -> Result<Value, CliError> {
    let sc = args.config()?;
    let dim = sc.space.rows();
    let f = FunctionExpr::from_json(&read_json(f)?)?;
    let g = FunctionExpr::from_json(&read_json(g)?)?;
    f.validate(dim)?;
    g.validate(dim)?;
    let z = match point {
        Some(path) => {
            let z: PointZ = serde_json::from_str(&read_json(path)?)
                .map_err(|e| CliError::usage(format!("bad point file: {e}")))?;
            z.check_space(&sc.space)?;
            z
        }
        None => sample_point(&sc.space, args.seed)?,
    };
    let value = if closed_form {
        if sc.space.p != 1 || sc.mode != LambdaMode::Formal {
            return Err(CliError::usage("--closed-form needs --p 1 and a formal lambda"));
        }
        StarValue::Series(cp_star_eval(&f, &g, &z, &sc.space.mu, sc.order)?)
    } else {
        star_eval(&f, &g, &z, &sc)?
    };
    let mut doc = json!({
        "config": {
            "space": sc.space,
            "order": sc.order,
            "lambda": sc.mode.to_string(),
            "path": sc.path,
            "closed_form": closed_form,
        },
        "seed": args.seed,
        "point": z,
    });
    match value {
        StarValue::Series(s) => doc["series"] = Value::Array(s.coeffs().iter().copied().map(pair).collect()),
        StarValue::Value(v) => doc["value"] = pair(v),
    }
    Ok(doc)
}

pub fn cmd_verify(args: &StarArgs, tolerance: Option<f64>) -> Result<Outcome, CliError> {
    if let Some(t) = tolerance {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::usage("--tolerance must be a finite non-negative number"));
        }
    }
    let sc = args.config()?;
    let report = verify_suite(&sc, args.seed, tolerance)?;
    let code = if report.pass { EXIT_OK } else { EXIT_VERIFY_FAILED };
    let mut document = json!({
        "config": {
            "space": sc.space,
            "order": sc.order,
            "lambda": sc.mode.to_string(),
            "path": sc.path,
        },
    });
    let body = serde_json::to_value(&report).expect("report serializes");
    for (k, v) in body.as_object().expect("report is an object") {
        document[k] = v.clone();
    }
    Ok(Outcome { document, code })
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let ok = |document| Ok(Outcome { document, code: EXIT_OK });
    match &cli.command {
        Command::Chartable { r } => ok(cmd_chartable(*r)?),
        Command::Coeffs { r, p, mu, lambda } => ok(cmd_coeffs(*r, *p, mu, lambda)?),
        Command::Star {
            f,
            g,
            star,
            closed_form,
            point,
        } => ok(cmd_star(f, g, star, *closed_form, point.as_deref())?),
        Command::Verify { star, tolerance } => cmd_verify(star, *tolerance),
    }
}

/// Runs the command and writes its document; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return e.code;
        }
    };
    let text = serde_json::to_string_pretty(&outcome.document).expect("JSON document") + "\n";
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => print!("{text}"),
    }
    outcome.code
}
