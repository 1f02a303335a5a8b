//! Command-line front end: CSV input, the `screen`, `simulate` and `test`
//! workflows, and their JSON/CSV outputs.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::run_replications;
use crate::dataset::Dataset;
use crate::error::{Result, ScreenError};
use crate::rc::{wild_bootstrap_test, BootstrapTestResult};
use crate::rng::derive_seed;
use crate::rpc::BasisConfig;
use crate::screening::{screen, Method, ScreenOptions, ScreeningReport, ThresholdMode};
use crate::simgen::{ScenarioId, SimScenario};
use crate::spline::IrlsConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "robscreen", version, about = "Robust correlation screening for ultrahigh-dimensional data")]
pub struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the covariates of a CSV file.
    Screen(ScreenArgs),
    /// Run Monte-Carlo replications of a simulation design.
    Simulate(SimulateArgs),
    /// Wild bootstrap test of independence between the response and covariates.
    Test(TestArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Response column name.
    #[arg(long, short, default_value = "y")]
    pub response: String,
    /// Exposure column name (required by rpc-l2 and rpc-l1).
    #[arg(long, short)]
    pub exposure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rc,
    RpcL2,
    RpcL1,
    Pearson,
    Kendall,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rc => Method::Rc,
            MethodArg::RpcL2 => Method::RpcL2,
            MethodArg::RpcL1 => Method::RpcL1,
            MethodArg::Pearson => Method::Pearson,
            MethodArg::Kendall => Method::Kendall,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SplineArgs {
    /// Spline degree.
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// Number of spline basis functions.
    #[arg(long = "basis-dim", default_value_t = 4)]
    pub basis_dim: usize,
    /// IRLS iteration cap for the L1 fit.
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
}

impl SplineArgs {
    fn options(&self) -> ScreenOptions {
        ScreenOptions {
            basis: BasisConfig { degree: self.degree, dim: self.basis_dim },
            irls: IrlsConfig { max_iter: self.max_iter, ..IrlsConfig::default() },
        }
    }
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, short, value_enum, default_value = "rc")]
    pub method: MethodArg,
    /// Keep the top D covariates (default floor(n / ln n)).
    #[arg(long, conflicts_with = "threshold")]
    pub top_d: Option<usize>,
    /// Keep covariates whose utility exceeds this value.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub spline: SplineArgs,
    /// Write the JSON report here (default: standard output).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write a per-covariate CSV table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Number of top covariates in the printed summary.
    #[arg(long, default_value_t = 10)]
    pub show: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Design id (E1, E2b1..E2b4, E3, E4, E5d1..E5d3, E6, S1..S4).
    #[arg(long, short)]
    pub scenario: Option<String>,
    /// Scenario file of `key = value` lines; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long)]
    pub w0: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    /// Model error family (none, normal, t3, cauchy, cauchy/3, mixnormal, cauchy:S, t:DF, normal:M:S).
    #[arg(long)]
    pub error: Option<String>,
    /// Covariate case 1-4 of the discrete-response designs.
    #[arg(long)]
    pub case: Option<u8>,
    /// Four comma-separated coefficients for designs E2b2..E2b4.
    #[arg(long)]
    pub beta: Option<String>,
    /// Methods to compare.
    #[arg(long, short, value_enum, value_delimiter = ',', num_args = 1.., default_values = ["rc"])]
    pub method: Vec<MethodArg>,
    /// Replication count.
    #[arg(long, default_value_t = 50, conflicts_with = "full")]
    pub reps: usize,
    /// Use 200 replications.
    #[arg(long)]
    pub full: bool,
    /// Base seed; chosen from entropy and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Screening budget override (default floor(n / ln n)).
    #[arg(long)]
    pub d: Option<usize>,
    #[command(flatten)]
    pub spline: SplineArgs,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Covariate to test (default: every covariate).
    #[arg(long, short)]
    pub covariate: Option<String>,
    /// Bootstrap replicates.
    #[arg(long, short = 'D', default_value_t = 500)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Base seed; chosen from entropy and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(ScreenError),
}

impl From<ScreenError> for CliError {
    fn from(e: ScreenError) -> Self {
        CliError::Runtime(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Loads a CSV file: the response and optional exposure columns are pulled
/// out by name and every other column becomes a covariate in header order.
pub fn load_csv(path: &Path, response: &str, exposure: Option<&str>) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| ScreenError::Data(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file, response, exposure)
}

pub fn read_csv<R: Read>(input: R, response: &str, exposure: Option<&str>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let find = |name: &str, role: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            ScreenError::Data(format!("{role} column '{name}' not found; header has: {}", headers.join(", ")))
        })
    };
    let y_idx = find(response, "response")?;
    let z_idx = exposure.map(|z| find(z, "exposure")).transpose()?;
    if z_idx == Some(y_idx) {
        return Err(ScreenError::Data("response and exposure name the same column".into()));
    }
    let x_idx: Vec<usize> = (0..headers.len()).filter(|&c| c != y_idx && Some(c) != z_idx).collect();

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        // Line 1 is the header.
        let line = r + 2;
        if record.len() != headers.len() {
            return Err(ScreenError::Data(format!(
                "line {line}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                ScreenError::Data(format!("line {line}, column '{}': '{cell}' is not a number", headers[c]))
            })?;
            if !v.is_finite() {
                return Err(ScreenError::Data(format!(
                    "line {line}, column '{}': non-finite value '{cell}'",
                    headers[c]
                )));
            }
            columns[c].push(v);
        }
    }
    let rows = columns[y_idx].len();
    if rows < 2 {
        return Err(ScreenError::Data(format!("need at least 2 data rows, found {rows}")));
    }
    let names = x_idx.iter().map(|&c| headers[c].clone()).collect();
    let z = z_idx.map(|c| std::mem::take(&mut columns[c]));
    let y = std::mem::take(&mut columns[y_idx]);
    let x = x_idx.iter().map(|&c| std::mem::take(&mut columns[c])).collect();
    let mut ds = Dataset::with_names(y, x, z, names)?;
    ds.response_name = response.to_string();
    ds.exposure_name = exposure.map(str::to_string);
    Ok(ds)
}

/// Writes the dataset as CSV (response, exposure, then covariates) using the
/// shortest representation that parses back to the same value.
pub fn write_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![dataset.response_name.clone()];
    if dataset.exposure.is_some() {
        header.push(dataset.exposure_name.clone().unwrap_or_else(|| "z".to_string()));
    }
    header.extend(dataset.names.iter().cloned());
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..dataset.n() {
        row.clear();
        row.push(dataset.response[i].to_string());
        if let Some(z) = &dataset.exposure {
            row.push(z[i].to_string());
        }
        row.extend(dataset.covariates.iter().map(|c| c[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScreenJson<'a> {
    schema: u32,
    method: &'a str,
    n: usize,
    p: usize,
    response: &'a str,
    exposure: Option<&'a str>,
    threshold: ThresholdMode,
    /// Column names by descending utility.
    ranking: Vec<&'a str>,
    selected: Vec<&'a str>,
    utilities: Vec<NamedUtility<'a>>,
}

#[derive(Debug, Serialize)]
struct NamedUtility<'a> {
    name: &'a str,
    utility: f64,
    rank: usize,
}

fn screen_json<'a>(report: &ScreeningReport, ds: &'a Dataset) -> ScreenJson<'a> {
    let ranks = report.ranks();
    ScreenJson {
        schema: 1,
        method: report.method.tag(),
        n: report.n,
        p: report.p,
        response: &ds.response_name,
        exposure: ds.exposure_name.as_deref(),
        threshold: report.threshold_mode,
        ranking: report.ranking.iter().map(|&j| ds.names[j].as_str()).collect(),
        selected: report.selected.iter().map(|&j| ds.names[j].as_str()).collect(),
        utilities: (0..report.p)
            .map(|j| NamedUtility { name: &ds.names[j], utility: report.utilities[j], rank: ranks[j] })
            .collect(),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Runtime(ScreenError::Data(format!("cannot write {}: {e}", p.display()))))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s} (pass --seed {s} to replay)");
        s
    })
}

fn cmd_screen(args: &ScreenArgs) -> CliResult<()> {
    let method = Method::from(args.method);
    if method.needs_exposure() && args.input.exposure.is_none() {
        return Err(CliError::Usage(format!("method {} requires --exposure", method.cli_name())));
    }
    let ds = load_csv(&args.input.input, &args.input.response, args.input.exposure.as_deref())?;
    let mode = match (args.top_d, args.threshold) {
        (_, Some(t)) => ThresholdMode::Value(t),
        (Some(d), None) => ThresholdMode::TopD(d),
        (None, None) => ThresholdMode::default_for(ds.n()),
    };
    let report = screen(method, &ds, mode, &args.spline.options())?;
    let json = serde_json::to_string_pretty(&screen_json(&report, &ds)).map_err(ScreenError::from)? + "\n";

    if let Some(path) = &args.csv {
        let file = fs::File::create(path)?;
        let mut w = csv::Writer::from_writer(file);
        let ranks = report.ranks();
        w.write_record(["name", "utility", "rank", "selected"]).map_err(ScreenError::from)?;
        for j in 0..report.p {
            let sel = report.selected.contains(&j);
            w.write_record([ds.names[j].clone(), report.utilities[j].to_string(), ranks[j].to_string(), sel.to_string()])
                .map_err(ScreenError::from)?;
        }
        w.flush()?;
    }

    let mut summary = format!(
        "{} on n={} p={}: {} selected\n",
        method.tag(),
        report.n,
        report.p,
        report.selected.len()
    );
    for (k, &j) in report.ranking.iter().take(args.show).enumerate() {
        summary.push_str(&format!("{:>4}  {:<20} {:.6}\n", k + 1, ds.names[j], report.utilities[j]));
    }
    match &args.out {
        Some(path) => {
            write_output(Some(path), &json)?;
            print!("{summary}");
        }
        None => {
            eprint!("{summary}");
            print!("{json}");
        }
    }
    Ok(())
}

fn build_scenario(args: &SimulateArgs) -> CliResult<SimScenario> {
    let mut sc = match (&args.config, &args.scenario) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Runtime(ScreenError::Data(format!("cannot read {}: {e}", path.display()))))?;
            let sc = SimScenario::from_config_str(&text).map_err(|e| CliError::Usage(e.to_string()))?;
            if let Some(id) = &args.scenario {
                let id: ScenarioId = id.parse().map_err(|e: ScreenError| CliError::Usage(e.to_string()))?;
                if id != sc.id {
                    return Err(CliError::Usage(format!(
                        "--scenario {id} disagrees with the config file's scenario {}",
                        sc.id
                    )));
                }
            }
            sc
        }
        (None, Some(id)) => SimScenario::new(id.parse().map_err(|e: ScreenError| CliError::Usage(e.to_string()))?),
        (None, None) => {
            return Err(CliError::Usage(format!(
                "either --scenario or --config is required; valid ids: {}",
                ScenarioId::valid_ids()
            )))
        }
    };
    let overrides: [(&str, Option<String>); 8] = [
        ("n", args.n.map(|v| v.to_string())),
        ("p", args.p.map(|v| v.to_string())),
        ("rho0", args.rho0.map(|v| v.to_string())),
        ("w0", args.w0.map(|v| v.to_string())),
        ("r2", args.r2.map(|v| v.to_string())),
        ("error", args.error.clone()),
        ("case", args.case.map(|v| v.to_string())),
        ("beta", args.beta.clone()),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            sc.set(key, &v).map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    sc.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(sc)
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let sc = build_scenario(args)?;
    let methods: Vec<Method> = args.method.iter().map(|&m| m.into()).collect();
    if let Some(m) = methods.iter().find(|m| m.needs_exposure() && !sc.id.has_exposure()) {
        return Err(CliError::Usage(format!("method {} needs a design with an exposure; {} has none", m.cli_name(), sc.id)));
    }
    let reps = if args.full { 200 } else { args.reps };
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let seed = resolve_seed(args.seed.or(args.config.as_ref().map(|_| sc.seed)));
    let report = run_replications(&sc, &methods, reps, seed, args.d, &args.spline.options())?;
    let text = match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json()? + "\n",
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv output is UTF-8")
        }
    };
    write_output(args.out.as_deref(), &text)
}

#[derive(Debug, Serialize)]
struct TestRow {
    covariate: String,
    #[serde(flatten)]
    result: BootstrapTestResult,
}

fn cmd_test(args: &TestArgs) -> CliResult<()> {
    if args.replicates < 2 {
        return Err(CliError::Usage("--replicates must be at least 2".into()));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage("--alpha must lie in (0, 1)".into()));
    }
    let ds = load_csv(&args.input.input, &args.input.response, args.input.exposure.as_deref())?;
    ds.validate()?;
    let columns: Vec<usize> = match &args.covariate {
        Some(name) => vec![ds.names.iter().position(|c| c == name).ok_or_else(|| {
            CliError::Runtime(ScreenError::Data(format!("covariate '{name}' not found")))
        })?],
        None => (0..ds.p()).collect(),
    };
    let seed = resolve_seed(args.seed);
    let mut rows = Vec::with_capacity(columns.len());
    for j in columns {
        let result = wild_bootstrap_test(&ds.response, ds.column(j), args.replicates, args.alpha, derive_seed(seed, j as u64))?;
        rows.push(TestRow { covariate: ds.names[j].clone(), result });
    }
    let text = match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                schema: u32,
                base_seed: u64,
                tests: &'a [TestRow],
            }
            serde_json::to_string_pretty(&Out { schema: 1, base_seed: seed, tests: &rows }).map_err(ScreenError::from)?
                + "\n"
        }
        Format::Csv => {
            let mut buf = Vec::new();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(["covariate", "statistic", "critical_value", "p_value", "decision", "seed"])
                    .map_err(ScreenError::from)?;
                for r in &rows {
                    w.write_record([
                        r.covariate.clone(),
                        r.result.statistic.to_string(),
                        r.result.critical_value.to_string(),
                        r.result.p_value.to_string(),
                        decision(&r.result).to_string(),
                        r.result.seed.to_string(),
                    ])
                    .map_err(ScreenError::from)?;
                }
                w.flush()?;
            }
            String::from_utf8(buf).expect("csv output is UTF-8")
        }
        Format::Text => {
            let mut t = format!("wild bootstrap, D={} alpha={}\n", args.replicates, args.alpha);
            for r in &rows {
                t.push_str(&format!(
                    "{:<20} stat={:.6} crit={:.6} p={:.4} {}\n",
                    r.covariate,
                    r.result.statistic,
                    r.result.critical_value,
                    r.result.p_value,
                    decision(&r.result)
                ));
            }
            t
        }
    };
    write_output(args.out.as_deref(), &text)
}

fn decision(r: &BootstrapTestResult) -> &'static str {
    if r.reject {
        "reject"
    } else {
        "fail to reject"
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();

    let exec = || match &cli.command {
        Command::Screen(a) => cmd_screen(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Test(a) => cmd_test(a),
    };
    let outcome = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(exec),
            Err(e) => Err(CliError::Runtime(ScreenError::Harness(format!("thread pool: {e}")))),
        },
        None => exec(),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_three_column_csv() {
        let ds = read_csv("y,x1,x2\n1,2,3\n4,5,6\n".as_bytes(), "y", None).unwrap();
        assert_eq!(ds.p(), 2);
        assert_eq!(ds.names, ["x1", "x2"]);
        assert_eq!(ds.covariates[1], [3.0, 6.0]);
    }

    #[test]
    fn exposure_column_is_extracted() {
        let ds = read_csv("a,z,y\n1,0.5,3\n4,0.1,6\n".as_bytes(), "y", Some("z")).unwrap();
        assert_eq!(ds.names, ["a"]);
        assert_eq!(ds.exposure.as_deref(), Some(&[0.5, 0.1][..]));
    }

    #[test]
    fn errors_name_their_location() {
        let e = read_csv("y,x1\n1,2\n3,NaN\n".as_bytes(), "y", None).unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("x1"), "{e}");
        let e = read_csv("y,x1\n1,2\n3,abc\n".as_bytes(), "y", None).unwrap_err().to_string();
        assert!(e.contains("'abc'"), "{e}");
        let e = read_csv("y,x1\n1,2\n3\n".as_bytes(), "y", None).unwrap_err().to_string();
        assert!(e.contains("expected 2 fields"), "{e}");
        let e = read_csv("y,x1\n1,2\n".as_bytes(), "y", None).unwrap_err().to_string();
        assert!(e.contains("at least 2"), "{e}");
        let e = read_csv("y,x1\n1,2\n3,4\n".as_bytes(), "resp", None).unwrap_err().to_string();
        assert!(e.contains("'resp'"), "{e}");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let cols = vec![vec![0.1, 1e-300, -2.5e17], vec![std::f64::consts::PI, -0.0, 7.0]];
        let ds = Dataset::new(vec![1.0 / 3.0, 2.0, 3.0], cols, None).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), "y", None).unwrap();
        assert_eq!(back.response, ds.response);
        assert_eq!(back.covariates, ds.covariates);
        assert_eq!(back.names, ds.names);
    }
}
