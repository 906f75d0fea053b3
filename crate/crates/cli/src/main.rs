use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rsqmc::digital_net::DigitalNet;
use rsqmc::error_bounds::{
    bound_exponential, bound_rational_variant, bound_unit_cube, neumaier_sum, wce_bound_construction,
    RationalConstant, WeightModel,
};
use rsqmc::mapping::{map_net, read_point_table};
use rsqmc::partition::{GeneralPartitionScheme, SchemeKind};
use rsqmc::quadrature::{self, baseline_invcdf, bench_csv, integrand, integrate_streaming, Config, SchemeName};
use serde_json::{json, Value};

const EXIT_VALIDATION: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser)]
#[command(name = "rsqmc", version, about = "Quasi-Monte Carlo quadrature on ℝ^s with mapped digital nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the mapped point set, one line per point: coordinates then weight.
    Generate(ConfigArgs),
    /// Integrate a registered integrand, or one over a point file from `generate`.
    Integrate(IntegrateArgs),
    /// Run the benchmark against the inverse-CDF baseline and emit CSV.
    Bench(ConfigArgs),
    /// Print closed-form worst-case error bounds and the construction bounds.
    Bound(BoundArgs),
    /// Check structural invariants and print a JSON report.
    Verify(ConfigArgs),
}

/// Flags mirroring the configuration keys. Flags override the config file,
/// which overrides the built-in defaults.
#[derive(Args, Clone, Debug, Default)]
struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Digit base of the net (only 2 is supported).
    #[arg(long)]
    base: Option<u32>,
    /// Sets both m_min and m_max.
    #[arg(long, conflicts_with_all = ["m_min", "m_max"])]
    m: Option<u32>,
    /// Smallest log2 point count.
    #[arg(long)]
    m_min: Option<u32>,
    /// Largest log2 point count.
    #[arg(long)]
    m_max: Option<u32>,
    /// Dimension.
    #[arg(long)]
    s: Option<usize>,
    /// Scale X of the erfinv scheme; repeat or separate with commas.
    #[arg(long = "x", short = 'X', value_delimiter = ',')]
    x: Vec<f64>,
    /// Partition scheme: erfinv, dyadic, unit, trivial or custom.
    #[arg(long)]
    scheme: Option<SchemeName>,
    /// Sobol direction-number table in `d s a m_i` format.
    #[arg(long)]
    direction_numbers_path: Option<PathBuf>,
    /// Registered integrand name.
    #[arg(long)]
    integrand: Option<String>,
    /// Write results here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Point file written by `generate`; the integrand is evaluated on it directly.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Also evaluate the inverse-CDF baseline.
    #[arg(long)]
    baseline: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    Conservative,
    Tight,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    s: usize,
    /// Net quality; defaults to the t value of the Sobol net.
    #[arg(long)]
    t: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Constant used by the rational-decay closed form.
    #[arg(long, value_enum, default_value_t = Variant::Conservative)]
    variant: Variant,
    /// Also evaluate the construction bound on the Sobol net for each scheme.
    #[arg(long)]
    construction: bool,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Validation(anyhow::Error),
    Verification(String),
    Runtime(anyhow::Error),
}

impl From<rsqmc::Error> for Failure {
    fn from(e: rsqmc::Error) -> Self {
        match e {
            rsqmc::Error::Io(io) => Failure::Runtime(io.into()),
            other => Failure::Validation(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CliResult<T> = Result<T, Failure>;

fn validation(msg: impl Into<String>) -> Failure {
    Failure::Validation(anyhow::anyhow!(msg.into()))
}

impl ConfigArgs {
    fn resolve(&self) -> CliResult<Config> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| validation(format!("cannot read config {}: {e}", path.display())))?;
                Config::from_toml_str(&text)?
            }
            None => Config::default(),
        };
        if let Some(b) = self.base {
            config.base = b;
        }
        if let Some(m) = self.m {
            config.m_min = m;
            config.m_max = m;
        }
        if let Some(m) = self.m_min {
            config.m_min = m;
        }
        if let Some(m) = self.m_max {
            config.m_max = m;
        }
        if let Some(s) = self.s {
            config.s = s;
        }
        if !self.x.is_empty() {
            config.x = self.x.clone();
        }
        if let Some(scheme) = self.scheme {
            config.scheme = scheme;
        }
        if let Some(p) = &self.direction_numbers_path {
            config.direction_numbers_path = Some(p.clone());
        }
        if let Some(name) = &self.integrand {
            config.integrand = name.clone();
        }
        if let Some(p) = &self.output {
            config.output = Some(p.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json(value: &impl serde::Serialize) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    text.push('\n');
    Ok(text)
}

fn generate(args: &ConfigArgs) -> CliResult<()> {
    let config = args.resolve()?;
    if config.m_min != config.m_max {
        return Err(validation("generate writes one point set; pass a single --m"));
    }
    let runs = config.runs();
    if runs.len() != 1 {
        return Err(validation("generate writes one point set; pass a single --x"));
    }
    let net = DigitalNet::sobol_with(&config.direction_numbers()?, config.s, config.m_min)?;
    let scheme = config.scheme_for(config.m_min, runs[0])?;
    let ps = map_net(&net, &scheme)?;
    match &config.output {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut out = io::BufWriter::new(file);
            ps.write_text(&mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = io::BufWriter::new(stdout.lock());
            ps.write_text(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn integrate(args: &IntegrateArgs) -> CliResult<()> {
    if let Some(path) = &args.points {
        let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let table = read_point_table(BufReader::new(file))?;
        let name = args.config.integrand.as_deref().unwrap_or("gaussian-exp");
        let f = integrand(name, table.dim)?;
        let value = neumaier_sum(
            table
                .points
                .chunks(table.dim)
                .zip(&table.weights)
                .map(|(x, w)| w * f.eval(x)),
        );
        let result = json!({
            "integrand": name,
            "points": table.weights.len(),
            "value": value,
            "exact": f.exact(),
            "error": f.exact().map(|e| (value - e).abs()),
        });
        return emit(args.config.output.as_deref(), &to_json(&result)?);
    }
    let config = args.config.resolve()?;
    let f = integrand(&config.integrand, config.s)?;
    let dirs = config.direction_numbers()?;
    let mut rows: Vec<Value> = Vec::new();
    for m in config.m_min..=config.m_max {
        let net = DigitalNet::sobol_with(&dirs, config.s, m)?;
        for x in config.runs() {
            let value = integrate_streaming(&f, &net, &config.scheme_for(m, x)?)?.value;
            rows.push(json!({
                "m": m,
                "X": x,
                "method": "rs",
                "value": value,
                "error": f.exact().map(|e| (value - e).abs()),
            }));
        }
        if args.baseline {
            let value = baseline_invcdf(&f, &net)?;
            rows.push(json!({
                "m": m,
                "X": null,
                "method": "inv-com",
                "value": value,
                "error": f.exact().map(|e| (value - e).abs()),
            }));
        }
    }
    emit(config.output.as_deref(), &to_json(&rows)?)
}

fn bench(args: &ConfigArgs) -> CliResult<()> {
    let config = args.resolve()?;
    let rows = quadrature::bench(&config)?;
    emit(config.output.as_deref(), &bench_csv(&config, &rows))
}

fn outcome<T: serde::Serialize>(r: rsqmc::Result<T>) -> Value {
    match r {
        Ok(v) => json!(v),
        Err(e) => json!({ "unavailable": e.to_string() }),
    }
}

fn bound(args: &BoundArgs) -> CliResult<()> {
    if !(args.alpha > 0.5 && args.alpha <= 1.0) {
        return Err(validation(format!("alpha must lie in (1/2, 1], got {}", args.alpha)));
    }
    let net = DigitalNet::sobol(args.s, args.m)?;
    let t = args.t.unwrap_or_else(|| net.t());
    let constant = match args.variant {
        Variant::Conservative => RationalConstant::Conservative,
        Variant::Tight => RationalConstant::Tight,
    };
    let mut report = json!({
        "m": args.m,
        "s": args.s,
        "t": t,
        "alpha": args.alpha,
        "closed_form": {
            "unit_cube": outcome(bound_unit_cube(2, args.m, t, args.s, args.alpha)),
            "rational": outcome(bound_rational_variant(args.m, t, args.s, args.alpha, constant)),
            "exponential": outcome(bound_exponential(args.m, t, args.s, args.alpha)),
        },
    });
    if args.construction {
        if args.t.is_some_and(|given| given != net.t()) {
            return Err(validation("--construction uses the Sobol net and its own t; drop --t"));
        }
        let mut construction = serde_json::Map::new();
        for (name, kind, model) in [
            ("unit_cube", SchemeKind::Trivial, WeightModel::unit_cube(args.alpha)?),
            ("rational", SchemeKind::Dyadic, WeightModel::rational(args.alpha)?),
            ("exponential", SchemeKind::Unit, WeightModel::exponential(args.alpha)?),
        ] {
            let value = GeneralPartitionScheme::uniform(kind, args.s, 2, args.m)
                .and_then(|scheme| wce_bound_construction(&scheme, &net, &model))
                .map(|w| json!({ "total": w.total(), "truncation": w.truncation, "net": w.net, "occupied": w.occupied }));
            construction.insert(name.into(), outcome(value));
        }
        report["construction"] = Value::Object(construction);
    }
    emit(None, &to_json(&report)?)
}

fn verify(args: &ConfigArgs) -> CliResult<()> {
    let config = args.resolve()?;
    let report = quadrature::verify(&config)?;
    emit(config.output.as_deref(), &to_json(&report)?)?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} (m={})", c.name, c.m))
            .collect();
        Err(Failure::Verification(failed.join(", ")))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(args) => generate(&args),
        Command::Integrate(args) => integrate(&args),
        Command::Bench(args) => bench(&args),
        Command::Bound(args) => bound(&args),
        Command::Verify(args) => verify(&args),
    }
}

fn exit_code(failure: &Failure) -> ExitCode {
    match failure {
        Failure::Validation(_) => ExitCode::from(EXIT_VALIDATION),
        Failure::Verification(_) => ExitCode::from(EXIT_VERIFICATION),
        Failure::Runtime(_) => ExitCode::FAILURE,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Validation(e) => eprintln!("error: {e:#}"),
                Failure::Verification(which) => eprintln!("verification failed: {which}"),
                Failure::Runtime(e) => eprintln!("error: {e:#}"),
            }
            exit_code(&failure)
        }
    }
}
