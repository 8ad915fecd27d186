//! `bicircle`: moments, recurrence coefficients, factorization tests and
//! stability certificates from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bicircle::factorization::DEFAULT_TOL;
use bicircle::stability::DEFAULT_GRID;
use bicircle::*;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const OK: u8 = 0;
const INVALID: u8 = 2;
const NOT_CONVERGED: u8 = 3;
const NOT_POSITIVE: u8 = 4;
const CONDITIONS_FAIL: u8 = 5;
const VERIFY_FAIL: u8 = 6;

/// Default verification and plot grid for `factor`.
const PLOT_GRID: usize = 64;
/// Largest residual accepted by `verify-split`.
const SPLIT_TOL: f64 = 1e-7;

#[derive(Parser)]
#[command(name = "bicircle", version, about = "Orthogonal polynomials on the bi-circle and Fejer-Riesz factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moment table of a weight for |k| <= K, |l| <= L (given by --level K L).
    Moments {
        weight: PathBuf,
        #[command(flatten)]
        opts: Shared,
    },
    /// Recurrence coefficients, condition report, vanishing window scan and verdict.
    Analyze {
        weight: PathBuf,
        #[command(flatten)]
        opts: Shared,
    },
    /// Factor nonzero for |z| = 1, |w| <= 1, with the full construction dump.
    Factor {
        weight: PathBuf,
        #[command(flatten)]
        opts: Shared,
        /// CSV of |p|^2 / Q - 1 on a --grid x --grid torus grid.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Structural check of a user-supplied split into two stable factors.
    VerifySplit {
        weight: PathBuf,
        p: PathBuf,
        q: PathBuf,
        #[command(flatten)]
        opts: Shared,
    },
    /// Stability verdict for a polynomial.
    Stability {
        poly: PathBuf,
        #[command(flatten)]
        opts: Shared,
        /// Include the per-slice Schur-Cohn margins.
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Args, Clone)]
struct Shared {
    #[arg(long, num_args = 2, value_names = ["N", "M"], default_values_t = [2, 2])]
    level: Vec<usize>,
    /// Classification tolerance (stability tolerance for `stability`).
    #[arg(long)]
    tol: Option<f64>,
    /// Stability sweep slices, or the plot grid for `factor`.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    quad_initial: usize,
    #[arg(long, default_value_t = 4096)]
    quad_max: usize,
    #[arg(long, default_value_t = 1e-12)]
    quad_tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotConverged { .. } => NOT_CONVERGED,
            Error::NotPositive { .. } | Error::NotPositiveDefinite { .. } => NOT_POSITIVE,
            Error::VerificationFailed(_)
            | Error::CrossCheckFailed(_)
            | Error::NotIsometry(_)
            | Error::NullSpaceDegenerate
            | Error::StructureUnattainable(_)
            | Error::ConditionViolated(_)
            | Error::RankOverflow { .. }
            | Error::NotStableCase(_) => VERIFY_FAIL,
            _ => INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: INVALID, message: message.into() }
}

type Outcome = std::result::Result<u8, Failure>;

impl Shared {
    fn level(&self) -> (usize, usize) {
        (self.level[0], self.level[1])
    }

    fn quadrature(&self) -> std::result::Result<QuadratureConfig, Failure> {
        if self.quad_initial == 0 || self.quad_max < self.quad_initial || !(self.quad_tol > 0.0) {
            return Err(invalid("quadrature settings need 0 < initial <= max and a positive tolerance"));
        }
        Ok(QuadratureConfig { initial: self.quad_initial, max: self.quad_max, tol: self.quad_tol })
    }

    fn tol(&self, default: f64) -> std::result::Result<f64, Failure> {
        match self.tol {
            Some(t) if !(t > 0.0) => Err(invalid("--tol must be positive")),
            Some(t) => Ok(t),
            None => Ok(default),
        }
    }

    fn factor_level(&self) -> std::result::Result<(usize, usize), Failure> {
        let (n, m) = self.level();
        if n == 0 || m == 0 {
            return Err(invalid("--level needs n, m >= 1"));
        }
        Ok((n, m))
    }
}

fn read_json(path: &Path) -> std::result::Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> std::result::Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| invalid(format!("{what}: {e}")))
}

fn read_poly(path: &Path) -> std::result::Result<LaurentPoly, Failure> {
    parse(read_json(path)?, "polynomial")
}

/// Tagged `{"kind": "mod_square" | "trig", "poly": ...}` or
/// `{"kind": "moments", "table": ...}`; untagged files hold a bare polynomial
/// (read as `mod_square`) or a moment table.
fn read_weight(path: &Path) -> std::result::Result<WeightSpec, Failure> {
    let mut v = read_json(path)?;
    let Some(obj) = v.as_object_mut() else {
        return Err(invalid("weight file must hold a JSON object"));
    };
    match obj.remove("kind") {
        Some(Value::String(kind)) => {
            let field = if kind == "moments" { "table" } else { "poly" };
            let body = obj.remove(field).ok_or_else(|| invalid(format!("weight of kind {kind} needs \"{field}\"")))?;
            match kind.as_str() {
                "mod_square" => Ok(WeightSpec::ReciprocalModSquare(parse(body, "polynomial")?)),
                "trig" => Ok(WeightSpec::ReciprocalTrigPoly(parse(body, "polynomial")?)),
                "moments" => Ok(WeightSpec::ExplicitMoments(parse(body, "moment table")?)),
                other => Err(invalid(format!("unknown weight kind {other}"))),
            }
        }
        Some(_) => Err(invalid("weight kind must be a string")),
        None if obj.contains_key("c") => Ok(WeightSpec::ExplicitMoments(parse(v, "moment table")?)),
        None => Ok(WeightSpec::ReciprocalModSquare(parse(v, "polynomial")?)),
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn csv_num(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| "nan".into())
}

fn poly_csv(p: &LaurentPoly) -> String {
    let mut s = String::from("k,l,re,im\n");
    for (k, l, c) in p.terms() {
        s += &format!("{k},{l},{},{}\n", csv_num(c.re), csv_num(c.im));
    }
    s
}

fn cmd_moments(weight: &Path, opts: &Shared) -> Outcome {
    let spec = read_weight(weight)?;
    let (kk, ll) = opts.level();
    let table = compute_moments(&spec, kk, ll, &opts.quadrature()?)?;
    let text = match opts.format {
        Format::Json => json_text(&to_value(&table)),
        Format::Csv => {
            let mut s = String::from("k,l,re,im\n");
            for (k, l, c) in table.half_entries() {
                s += &format!("{k},{l},{},{}\n", csv_num(c.re), csv_num(c.im));
            }
            s
        }
    };
    write_out(&opts.out, &text)?;
    Ok(if table.converged() { OK } else { NOT_CONVERGED })
}

/// Window `k in n+1..=n+3`, `l in m+1..=m+3`, clipped to the available moments.
fn scan_window(table: &MomentTable, n: usize, m: usize) -> Result<(Vec<usize>, Vec<usize>, Vec<recurrence::ScanRow>)> {
    let ks: Vec<usize> = (n + 1..=n + 3).filter(|&k| k <= table.k_max()).collect();
    let ls: Vec<usize> = (m + 1..=m + 3).filter(|&l| l <= table.l_max()).collect();
    let rows = if ks.is_empty() || ls.is_empty() { Vec::new() } else { ehat_scan(table, &ks, &ls)? };
    Ok((ks, ls, rows))
}

fn cmd_analyze(weight: &Path, opts: &Shared) -> Outcome {
    let spec = read_weight(weight)?;
    let (n, m) = opts.factor_level()?;
    let tol = opts.tol(DEFAULT_TOL)?;
    let reach = match &spec {
        WeightSpec::ExplicitMoments(t) => (t.k_max(), t.l_max()),
        _ => (n + 3, m + 3),
    };
    let table = compute_moments(&spec, reach.0, reach.1, &opts.quadrature()?)?;
    let rs = compute_coefficients(&table, n, m)?;
    let report = check_conditions(&rs, tol);
    let (ks, ls, rows) = scan_window(&table, n, m)?;
    let text = match opts.format {
        Format::Json => json_text(&json!({
            "level": [n, m],
            "verdict": report.class(),
            "moments_converged": table.converged(),
            "coefficients": to_value(&rs),
            "conditions": to_value(&report),
            "scan": {"k": ks, "l": ls, "rows": to_value(&rows)},
        })),
        Format::Csv => {
            let mut s = String::from("k,l,ehat_norm,ehat_tilde_norm\n");
            let opt = |x: Option<f64>| x.map(csv_num).unwrap_or_default();
            for r in &rows {
                s += &format!("{},{},{},{}\n", r.k, r.l, opt(r.ehat_norm), opt(r.ehat_tilde_norm));
            }
            s
        }
    };
    write_out(&opts.out, &text)?;
    Ok(if table.converged() { OK } else { NOT_CONVERGED })
}

/// `|p|^2 / Q - 1` on a torus grid, as CSV rows `i,j,theta,phi,residual`.
fn plot_grid(spec: &WeightSpec, p: &LaurentPoly, grid: usize) -> std::result::Result<String, Failure> {
    let q = match spec {
        WeightSpec::ReciprocalModSquare(p0) => p0.herm_square(),
        WeightSpec::ReciprocalTrigPoly(q) => q.clone(),
        WeightSpec::ExplicitMoments(_) => return Err(invalid("--plot-data needs a weight given by a polynomial")),
    };
    let ps = p.herm_square();
    let angles = toeplitz::sample_angles(grid);
    let mut s = String::from("i,j,theta,phi,residual\n");
    for (i, &th) in angles.iter().enumerate() {
        for (j, &ph) in angles.iter().enumerate() {
            let (z, w) = (C64::from_polar(1.0, th), C64::from_polar(1.0, ph));
            let r = ps.evaluate(z, w)?.re / q.evaluate(z, w)?.re - 1.0;
            s += &format!("{i},{j},{},{},{}\n", csv_num(th), csv_num(ph), csv_num(r));
        }
    }
    Ok(s)
}

fn cmd_factor(weight: &Path, opts: &Shared, plot: &Option<PathBuf>) -> Outcome {
    let spec = read_weight(weight)?;
    let (n, m) = opts.factor_level()?;
    let tol = opts.tol(DEFAULT_TOL)?;
    let out = factor_one_sided(&spec, n, m, tol, &opts.quadrature()?)?;
    let text = match (opts.format, &out.p) {
        (Format::Csv, Some(p)) => poly_csv(p),
        (Format::Csv, None) => String::from("k,l,re,im\n"),
        (Format::Json, _) => json_text(&json!({
            "level": [n, m],
            "verdict": out.report.class(),
            "p": out.p.as_ref().map(to_value),
            "conditions": to_value(&out.report),
            "work": out.work.as_ref().map(to_value),
            "moments_grid": out.moments_grid,
            "moments_converged": out.moments_converged,
        })),
    };
    write_out(&opts.out, &text)?;
    let Some(p) = &out.p else {
        return Ok(CONDITIONS_FAIL);
    };
    if let Some(path) = plot {
        let csv = plot_grid(&spec, p, opts.grid.unwrap_or(PLOT_GRID))?;
        std::fs::write(path, csv).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    }
    Ok(if out.moments_converged { OK } else { NOT_CONVERGED })
}

fn cmd_verify_split(weight: &Path, p: &Path, q: &Path, opts: &Shared) -> Outcome {
    let spec = read_weight(weight)?;
    let (p, q) = (read_poly(p)?, read_poly(q)?);
    let tol = opts.tol(SPLIT_TOL)?;
    let rep = verify_splitting_structure(&spec, &p, &q, &opts.quadrature()?)?;
    let pass = rep.max() <= tol;
    let text = match opts.format {
        Format::Json => json_text(&json!({"pass": pass, "tol": tol, "residuals": to_value(&rep)})),
        Format::Csv => {
            let mut s = String::from("label,residual\n");
            for (label, v) in rep.iter() {
                s += &format!("{label},{}\n", csv_num(*v));
            }
            s
        }
    };
    write_out(&opts.out, &text)?;
    Ok(if pass { OK } else { VERIFY_FAIL })
}

fn cmd_stability(poly: &Path, opts: &Shared, verbose: bool) -> Outcome {
    let p = read_poly(poly)?;
    let grid = opts.grid.unwrap_or(DEFAULT_GRID);
    if grid == 0 {
        return Err(invalid("--grid must be positive"));
    }
    let mut rep = stable_bidisk(&p, grid, opts.tol(stability::DEFAULT_TOL)?)?;
    if !verbose {
        rep.slice_margins.clear();
    }
    let text = match opts.format {
        Format::Json => json_text(&to_value(&rep)),
        Format::Csv => {
            let mut s = String::from("verdict,min_modulus,margin,grid\n");
            let verdict = to_value(&rep.verdict);
            s += &format!(
                "{},{},{},{}\n",
                verdict.as_str().unwrap_or_default(),
                csv_num(rep.min_modulus),
                csv_num(rep.margin),
                rep.grid
            );
            s
        }
    };
    write_out(&opts.out, &text)?;
    Ok(OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INVALID } else { OK });
        }
    };
    let result = match &cli.command {
        Command::Moments { weight, opts } => cmd_moments(weight, opts),
        Command::Analyze { weight, opts } => cmd_analyze(weight, opts),
        Command::Factor { weight, opts, plot_data } => cmd_factor(weight, opts, plot_data),
        Command::VerifySplit { weight, p, q, opts } => cmd_verify_split(weight, p, q, opts),
        Command::Stability { poly, opts, verbose } => cmd_stability(poly, opts, *verbose),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
