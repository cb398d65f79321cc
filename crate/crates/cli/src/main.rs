use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use energylab::conjecture::{self, SearchFamily, SeedOrder};
use energylab::parse;
use energylab::radial;
use energylab::verify::{self, CheckReport, Suite};
use energylab::{Error, QuadratureSpec, RadialMeasure, RadialProfile, Weight};

/// Weighted Monge-Ampère energies of radial plurisubharmonic functions.
///
/// Specs use the `kind:key=value,...` mini-language or JSON, for example
/// `trunc:M=2`, `poly:p=2`, `ma:trunc:M=2`.
#[derive(Parser, Debug)]
#[command(name = "energylab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Relative tolerance of the quadrature.
    #[arg(long, value_name = "TOL")]
    quad_rel_tol: Option<f64>,
    /// Write the full JSON result (JSON lines for `verify`) to this file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write CSV plot data (`x,y,series`; report summary for `verify`).
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Measure spec, e.g. `ma:trunc:M=2` or `density:scale=2,rate=2`.
    #[arg(long, conflicts_with = "measure_file")]
    measure: Option<String>,
    /// CSV table of `(s, m(s))` rows.
    #[arg(long, value_name = "PATH")]
    measure_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energy `E`: Luxembourg norm of the profile against its own Monge-Ampère measure.
    Energy {
        #[arg(long)]
        profile: String,
        #[arg(long)]
        weight: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Capacity energy `J`: Choquet norm with the capacity-weighted transform.
    Jenergy {
        #[arg(long)]
        profile: String,
        #[arg(long)]
        weight: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Radial Dirichlet problem with zero boundary values for a measure.
    Solve {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Also report the energy of the solution under this weight.
        #[arg(long)]
        weight: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Subextension to the ball of radius `e^{log_r}`.
    Subext {
        #[arg(long)]
        profile: String,
        #[arg(long)]
        log_r: f64,
        /// Also compare energies under this weight.
        #[arg(long)]
        weight: Option<String>,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Run inequality checks; exits 1 if any asserted check fails.
    Verify {
        /// `all` or one group name.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Dimensions to run; defaults to 1, 2 and 3.
        #[arg(long)]
        n: Vec<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Lower bound for the half-measure norm ratio over a profile family.
    Kappa {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long)]
        weight: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Family spec: `trunc`, `power`, `exhaust`, `trunc_power` or `fixed:profile=(...)`.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[arg(long, default_value = "ascending")]
        seed_order: String,
        #[command(flatten)]
        common: Common,
    },
    /// Support line of the measure norm against the energy over a family.
    Fit {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long)]
        weight: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Finite energies for bounded profiles, witness-weight divergence otherwise.
    Bedford {
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Check(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Check(_) => "check_failure",
            Failure::Input(_) => "input_error",
            Failure::Numerical(_) => "non_convergence",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotInOrliczSpace { .. } => Failure::Check(e.to_string()),
            e if e.is_numerical() => Failure::Numerical(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

type Outcome = std::result::Result<(), Failure>;

/// Seven decimals for the terminal; files carry full precision.
fn fmt(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    if (1e-3..1e7).contains(&x.abs()) {
        format!("{x:.7}")
    } else {
        format!("{x:.7e}")
    }
}

fn spec(common: &Common) -> Result<QuadratureSpec, Failure> {
    let mut s = QuadratureSpec::default();
    if let Some(t) = common.quad_rel_tol {
        s = s.with_rel_tol(t);
    }
    s.validate()?;
    Ok(s)
}

fn dimension(n: u32) -> Result<u32, Failure> {
    if n == 0 {
        return Err(Failure::Input("dimension n must be at least 1".into()));
    }
    Ok(n)
}

fn profile(text: &str) -> Result<RadialProfile, Failure> {
    let g: RadialProfile = parse::decode(text)?;
    g.validate()?;
    Ok(g)
}

fn weight(text: &str) -> Result<Weight, Failure> {
    let w: Weight = parse::decode(text)?;
    w.validate()?;
    Ok(w)
}

fn family(text: &str) -> Result<SearchFamily, Failure> {
    let f: SearchFamily = parse::decode(text)?;
    f.validate()?;
    Ok(f)
}

fn measure(args: &MeasureArgs, n: u32) -> Result<RadialMeasure, Failure> {
    match (&args.measure, &args.measure_file) {
        (Some(text), None) => Ok(parse::parse_measure(text, n)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            Ok(parse::parse_measure_csv(&text)?)
        }
        _ => Err(Failure::Input("give exactly one of --measure and --measure-file".into())),
    }
}

fn write_json<T: Serialize>(path: &Option<PathBuf>, value: &T) -> Outcome {
    if let Some(path) = path {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| io_failure(path, e))?;
    }
    Ok(())
}

fn write_plot(path: &Option<PathBuf>, rows: &[(f64, f64, &str)]) -> Outcome {
    let Some(path) = path else { return Ok(()) };
    let mut w = csv::Writer::from_path(path).map_err(|e| io_failure(path, e))?;
    w.write_record(["x", "y", "series"]).map_err(|e| io_failure(path, e))?;
    for &(x, y, series) in rows {
        w.write_record([x.to_string(), y.to_string(), series.to_string()])
            .map_err(|e| io_failure(path, e))?;
    }
    w.flush().map_err(|e| io_failure(path, e))
}

fn run_energy(profile_text: &str, weight_text: &str, n: u32, common: &Common, capacity: bool) -> Outcome {
    let (g, w, n, spec) = (profile(profile_text)?, weight(weight_text)?, dimension(n)?, spec(common)?);
    let value = if capacity { radial::j_energy(&g, &w, n, &spec)? } else { radial::energy(&g, &w, n, &spec)? };
    println!("{}", fmt(value));
    let quantity = if capacity { "j_energy" } else { "energy" };
    write_json(&common.out, &json!({"quantity": quantity, "profile": g, "weight": w, "n": n, "value": json_number(value)}))
}

/// Non-finite values are written as strings, like the library schema.
fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or_else(|| Value::String(fmt(x)))
}

fn run_solve(args: &MeasureArgs, n: u32, weight_text: &Option<String>, common: &Common) -> Outcome {
    let n = dimension(n)?;
    let m = measure(args, n)?;
    let spec = spec(common)?;
    let g = radial::dirichlet_solve(&m, n)?;
    let lower = g.lower_limit();
    println!("lower_limit {}", fmt(lower));
    let mut result = json!({"profile": g, "n": n, "lower_limit": json_number(lower)});
    if let Some(text) = weight_text {
        let w = weight(text)?;
        let e = radial::energy(&g, &w, n, &spec)?;
        println!("energy {}", fmt(e));
        result["weight"] = json!(w);
        result["energy"] = json_number(e);
    }
    let rows: Vec<(f64, f64, &str)> = (0..=400)
        .map(|i| -10.0 + i as f64 * 0.025)
        .flat_map(|s| [(s, g.value(s), "profile"), (s, m.mass(s), "mass")])
        .collect();
    write_plot(&common.csv, &rows)?;
    write_json(&common.out, &result)
}

fn run_subext(profile_text: &str, log_r: f64, weight_text: &Option<String>, n: u32, common: &Common) -> Outcome {
    let (g, n, spec) = (profile(profile_text)?, dimension(n)?, spec(common)?);
    let sub = radial::subextension(&g, log_r)?;
    let slope = match &sub {
        RadialProfile::Subext { slope, .. } => *slope,
        other => other.asymptotic_slope(),
    };
    println!("slope {}", fmt(slope));
    let mut result = json!({"profile": g, "log_r": log_r, "subextension": sub, "slope": json_number(slope)});
    if let Some(text) = weight_text {
        let w = weight(text)?;
        let before = radial::energy(&g, &w, n, &spec)?;
        let after = radial::energy(&sub, &w, n, &spec)?;
        println!("energy {}", fmt(before));
        println!("subextension_energy {}", fmt(after));
        result["weight"] = json!(w);
        result["n"] = json!(n);
        result["energy"] = json_number(before);
        result["subextension_energy"] = json_number(after);
    }
    write_json(&common.out, &result)
}

fn run_verify(suite: &str, dims: &[u32], common: &Common) -> Outcome {
    let group: Suite = suite.parse()?;
    let spec = spec(common)?;
    let dims = if dims.is_empty() { vec![1, 2, 3] } else { dims.to_vec() };
    let mut reports: Vec<CheckReport> = vec![];
    for &n in &dims {
        reports.extend(verify::run_suite(group, dimension(n)?, &spec)?);
    }
    if let Some(path) = &common.out {
        let file = fs::File::create(path).map_err(|e| io_failure(path, e))?;
        verify::write_jsonl(&reports, io::BufWriter::new(file)).map_err(|e| io_failure(path, e))?;
    }
    if let Some(path) = &common.csv {
        let file = fs::File::create(path).map_err(|e| io_failure(path, e))?;
        verify::write_csv(&reports, file).map_err(|e| io_failure(path, e))?;
    }
    let failed: Vec<&CheckReport> = reports.iter().filter(|r| !r.pass).collect();
    let evaluated = reports.iter().filter(|r| r.is_evaluated()).count();
    println!("checks {}", reports.len());
    println!("evaluated {evaluated}");
    println!("failed {}", failed.len());
    for r in &failed {
        println!("FAILED {} lhs={} rhs={} margin={}", r.name, fmt(r.lhs), fmt(r.rhs), fmt(r.margin));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} of {} checks failed", failed.len(), reports.len())))
    }
}

#[allow(clippy::too_many_arguments)]
fn run_kappa(
    args: &MeasureArgs,
    weight_text: &str,
    n: u32,
    family_text: &str,
    budget: usize,
    order: &str,
    common: &Common,
) -> Outcome {
    let n = dimension(n)?;
    let (m, w, fam, spec) = (measure(args, n)?, weight(weight_text)?, family(family_text)?, spec(common)?);
    let order: SeedOrder = order.parse()?;
    let est = conjecture::kappa_lower_bound(&m, &w, &fam, budget, order, &spec)?;
    println!("{}", fmt(est.best_ratio));
    let rows: Vec<(f64, f64, &str)> = est
        .trace
        .iter()
        .filter_map(|s| s.parameters.first().map(|&p| (p, s.ratio, "ratio")))
        .collect();
    write_plot(&common.csv, &rows)?;
    write_json(&common.out, &est)
}

fn run_fit(args: &MeasureArgs, weight_text: &str, n: u32, family_text: &str, samples: usize, common: &Common) -> Outcome {
    let n = dimension(n)?;
    let (m, w, fam, spec) = (measure(args, n)?, weight(weight_text)?, family(family_text)?, spec(common)?);
    let fit = conjecture::coercivity_fit(&m, &w, n, &fam, samples, &spec)?;
    println!("slope {}", fmt(fit.slope));
    println!("intercept {}", fmt(fit.intercept));
    let mut rows: Vec<(f64, f64, &str)> = fit.samples.iter().map(|s| (s.energy, s.norm, "sample")).collect();
    rows.extend(fit.samples.iter().map(|s| (s.energy, fit.slope * s.energy + fit.intercept, "line")));
    write_plot(&common.csv, &rows)?;
    write_json(&common.out, &fit)
}

fn run_bedford(profile_text: &str, n: u32, common: &Common) -> Outcome {
    let (g, n, spec) = (profile(profile_text)?, dimension(n)?, spec(common)?);
    let report = conjecture::bedford_pipeline(&g, n, &spec)?;
    if report.bounded {
        println!("bounded");
        for e in &report.energies {
            println!("energy {} {}", verify::label(&e.weight), fmt(e.energy));
        }
    } else {
        println!("unbounded");
        for p in &report.probes {
            println!("probe lambda={} partial={} t_end={} exceeded={}", fmt(p.lambda), fmt(p.partial), fmt(p.t_end), p.exceeded);
        }
    }
    write_json(&common.out, &report)?;
    if report.conclusive {
        Ok(())
    } else {
        Err(Failure::Check("pipeline was not conclusive".into()))
    }
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Energy { profile, weight, n, common } => run_energy(profile, weight, *n, common, false),
        Command::Jenergy { profile, weight, n, common } => run_energy(profile, weight, *n, common, true),
        Command::Solve { measure, n, weight, common } => run_solve(measure, *n, weight, common),
        Command::Subext { profile, log_r, weight, n, common } => run_subext(profile, *log_r, weight, *n, common),
        Command::Verify { suite, n, common } => run_verify(suite, n, common),
        Command::Kappa { measure, weight, n, family, budget, seed_order, common } => {
            run_kappa(measure, weight, *n, family, *budget, seed_order, common)
        }
        Command::Fit { measure, weight, n, family, samples, common } => run_fit(measure, weight, *n, family, *samples, common),
        Command::Bedford { profile, n, common } => run_bedford(profile, *n, common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let diag = json!({"error": "input_error", "message": e.to_string().trim_end(), "exit_code": 2});
            eprintln!("{diag}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let diag = json!({"error": f.kind(), "message": f.message(), "exit_code": f.code()});
            let _ = writeln!(io::stderr(), "{diag}");
            ExitCode::from(f.code())
        }
    }
}
