//! Command-line grammar and validation into run configurations.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jmatrix::PotentialSpec;
use serde_json::{json, Value};

use crate::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "jmx",
    version,
    about = "J-matrix transmission and reflection in one dimension"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplitudes, phases and unitarity defect over an energy grid.
    Sweep(SweepArgs),
    /// Scan |T|² over N and λ and report the stable λ window.
    Plateau(PlateauArgs),
    /// Partial-sum combinations of the reference solutions on an x grid.
    Figures(FiguresArgs),
    /// Transfer-matrix reference amplitudes over an energy grid.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PotentialKind {
    Zero,
    PoschlTeller,
    SquareBarrier,
    DoubleBarrier,
    Expr,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct PotentialArgs {
    #[arg(long, value_enum)]
    pub potential: PotentialKind,
    /// Pöschl-Teller range parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Pöschl-Teller strength parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    /// Barrier height.
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    /// Square-barrier width.
    #[arg(long, alias = "L", allow_negative_numbers = true)]
    pub width: Option<f64>,
    /// Left edge of the square barrier.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub offset: f64,
    /// Double-barrier half-width.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// V(x) as an arithmetic expression in x.
    #[arg(long, allow_hyphen_values = true)]
    pub expr: Option<String>,
    /// The expression is taken as zero for |x| > cutoff.
    #[arg(long, allow_negative_numbers = true)]
    pub cutoff: Option<f64>,
    /// File of `x V(x)` lines, `#` comments allowed.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub emin: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub emax: f64,
    #[arg(long = "n-points", default_value_t = 200, allow_negative_numbers = true)]
    pub n_points: usize,
    /// Space the energies logarithmically.
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Compare {
    Exact,
    Oracle,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long = "N", default_value_t = 50, allow_negative_numbers = true)]
    pub n: usize,
    /// Basis scale, or `auto` to take it from a plateau scan.
    #[arg(long, default_value = "1.0", allow_negative_numbers = true)]
    pub lambda: String,
    /// Quadrature size override.
    #[arg(long = "K", allow_negative_numbers = true)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub compare: Option<Compare>,
    /// Plateau tolerance used with `--lambda auto`; relaxed up to 100x if
    /// nothing meets it.
    #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PlateauArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long = "N", value_delimiter = ',', default_values_t = [30usize, 50])]
    pub n: Vec<usize>,
    #[arg(long = "lambda-min", default_value_t = 0.25, allow_negative_numbers = true)]
    pub lambda_min: f64,
    #[arg(long = "lambda-max", default_value_t = 4.0, allow_negative_numbers = true)]
    pub lambda_max: f64,
    #[arg(long = "lambda-step", default_value_t = 0.05, allow_negative_numbers = true)]
    pub lambda_step: f64,
    /// Probe energy; repeat for several.
    #[arg(long = "energy", default_values_t = [1.0], allow_negative_numbers = true)]
    pub energies: Vec<f64>,
    #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Cosine combination, tends to 2cos(kx) on the right.
    Fig1a,
    /// Sine combination, tends to 2sin(kx) on the right.
    Fig1b,
}

#[derive(Debug, Clone, Args)]
pub struct FiguresArgs {
    #[arg(value_enum)]
    pub which: Figure,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Number of leading terms removed, one column each.
    #[arg(long = "N", value_delimiter = ',', default_values_t = [0usize, 10, 30])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = -15.0, allow_negative_numbers = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
    pub xmax: f64,
    #[arg(long = "x-points", default_value_t = 601, allow_negative_numbers = true)]
    pub x_points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Largest transfer-matrix step.
    #[arg(long, allow_negative_numbers = true)]
    pub step: Option<f64>,
    /// Half-width of the integration window.
    #[arg(long, allow_negative_numbers = true)]
    pub extent: Option<f64>,
    /// Allowed unitarity defect.
    #[arg(long, allow_negative_numbers = true)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parsed potential plus the flags that defined it, for the metadata echo.
#[derive(Debug, Clone)]
pub struct PotentialChoice {
    pub kind: PotentialKind,
    pub spec: PotentialSpec,
    pub echo: Value,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone)]
pub struct EnergyGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl EnergyGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }

    fn echo(&self) -> Value {
        json!({"emin": self.min, "emax": self.max, "n_points": self.count, "log": self.log})
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub format: Format,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub potential: PotentialChoice,
    pub n: usize,
    pub lambda: LambdaChoice,
    pub k: Option<usize>,
    pub grid: EnergyGrid,
    pub compare: Option<Compare>,
    pub tolerance: f64,
    pub output: Output,
}

#[derive(Debug, Clone)]
pub struct PlateauConfig {
    pub potential: PotentialChoice,
    pub ns: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub energies: Vec<f64>,
    pub tolerance: f64,
    pub output: Output,
}

#[derive(Debug, Clone)]
pub struct FiguresConfig {
    pub which: Figure,
    pub energy: f64,
    pub lambda: f64,
    pub ns: Vec<usize>,
    pub xs: Vec<f64>,
    pub output: Output,
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub potential: PotentialChoice,
    pub grid: EnergyGrid,
    pub settings: jmatrix::OracleSettings,
    pub output: Output,
}

#[derive(Debug, Clone)]
pub enum RunConfig {
    Sweep(SweepConfig),
    Plateau(PlateauConfig),
    Figures(FiguresConfig),
    Oracle(OracleConfig),
}

impl SweepConfig {
    pub fn echo(&self) -> Value {
        json!({
            "command": "sweep",
            "potential": self.potential.echo,
            "N": self.n,
            "lambda": match self.lambda {
                LambdaChoice::Fixed(l) => json!(l),
                LambdaChoice::Auto => json!("auto"),
            },
            "K": self.k,
            "grid": self.grid.echo(),
            "compare": self.compare.map(|c| match c {
                Compare::Exact => "exact",
                Compare::Oracle => "oracle",
            }),
        })
    }
}

impl PlateauConfig {
    pub fn echo(&self) -> Value {
        json!({
            "command": "plateau",
            "potential": self.potential.echo,
            "N": self.ns,
            "lambdas": self.lambdas,
            "energies": self.energies,
            "tolerance": self.tolerance,
        })
    }
}

impl FiguresConfig {
    pub fn echo(&self) -> Value {
        json!({
            "command": "figures",
            "which": match self.which {
                Figure::Fig1a => "fig1a",
                Figure::Fig1b => "fig1b",
            },
            "energy": self.energy,
            "lambda": self.lambda,
            "N": self.ns,
            "xmin": self.xs.first(),
            "xmax": self.xs.last(),
            "x_points": self.xs.len(),
        })
    }
}

impl OracleConfig {
    pub fn echo(&self) -> Value {
        json!({
            "command": "oracle",
            "potential": self.potential.echo,
            "grid": self.grid.echo(),
            "step": self.settings.step,
            "extent": self.settings.extent,
            "tolerance": self.settings.tolerance,
        })
    }
}

/// Drops accumulated float noise from grid values such as `0.25 + 63·0.05`.
pub fn round_grid(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn require<T: Clone>(value: &Option<T>, flag: &str, kind: &str) -> CliResult<T> {
    value
        .clone()
        .ok_or_else(|| usage(format!("{flag} is required with --potential {kind}")))
}

fn positive(value: f64, flag: &str) -> CliResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(usage(format!("{flag} must be positive and finite, got {value}")))
    }
}

pub fn potential(args: &PotentialArgs) -> CliResult<PotentialChoice> {
    let built = match args.potential {
        PotentialKind::Zero => (PotentialSpec::Zero, json!({"kind": "zero"})),
        PotentialKind::PoschlTeller => {
            let eta = require(&args.eta, "--eta", "poschl-teller")?;
            let nu = require(&args.nu, "--nu", "poschl-teller")?;
            let spec = PotentialSpec::poschl_teller(eta, nu).map_err(|e| usage(format!("--eta/--nu: {e}")))?;
            (spec, json!({"kind": "poschl-teller", "eta": eta, "nu": nu}))
        }
        PotentialKind::SquareBarrier => {
            let v0 = require(&args.v0, "--v0", "square-barrier")?;
            let width = require(&args.width, "--width", "square-barrier")?;
            let spec = PotentialSpec::square_barrier_at(v0, width, args.offset)
                .map_err(|e| usage(format!("--v0/--width/--offset: {e}")))?;
            (
                spec,
                json!({"kind": "square-barrier", "v0": v0, "width": width, "offset": args.offset}),
            )
        }
        PotentialKind::DoubleBarrier => {
            let v0 = require(&args.v0, "--v0", "double-barrier")?;
            let a = require(&args.a, "--a", "double-barrier")?;
            let spec = PotentialSpec::double_barrier(v0, a).map_err(|e| usage(format!("--v0/--a: {e}")))?;
            (spec, json!({"kind": "double-barrier", "v0": v0, "a": a}))
        }
        PotentialKind::Expr => {
            let source = require(&args.expr, "--expr", "expr")?;
            let cutoff = require(&args.cutoff, "--cutoff", "expr")?;
            let spec = PotentialSpec::expression(&source, cutoff).map_err(|e| usage(format!("--expr: {e}")))?;
            (spec, json!({"kind": "expr", "expr": source, "cutoff": cutoff}))
        }
        PotentialKind::Table => {
            let path = require(&args.table, "--table", "table")?;
            let spec = PotentialSpec::tabulated_from_path(&path).map_err(|e| usage(format!("--table: {e}")))?;
            (spec, json!({"kind": "table", "table": path.display().to_string()}))
        }
    };
    Ok(PotentialChoice {
        kind: args.potential,
        spec: built.0,
        echo: built.1,
    })
}

fn grid(args: &GridArgs) -> CliResult<EnergyGrid> {
    positive(args.emin, "--emin")?;
    positive(args.emax, "--emax")?;
    if args.emax < args.emin {
        return Err(usage(format!("--emax ({}) is below --emin ({})", args.emax, args.emin)));
    }
    if args.n_points < 1 {
        return Err(usage("--n-points must be at least 1"));
    }
    Ok(EnergyGrid {
        min: args.emin,
        max: args.emax,
        count: args.n_points,
        log: args.log,
    })
}

fn output(args: &OutputArgs) -> Output {
    Output {
        format: args.format,
        path: args.output.clone(),
    }
}

fn truncation(n: usize) -> CliResult<usize> {
    if n < 2 {
        return Err(usage(format!("--N must be at least 2, got {n}")));
    }
    Ok(n)
}

fn sweep(args: &SweepArgs) -> CliResult<SweepConfig> {
    let potential = potential(&args.potential)?;
    let lambda = if args.lambda.eq_ignore_ascii_case("auto") {
        LambdaChoice::Auto
    } else {
        let l: f64 = args
            .lambda
            .parse()
            .map_err(|_| usage(format!("--lambda must be a number or 'auto', got '{}'", args.lambda)))?;
        LambdaChoice::Fixed(positive(l, "--lambda")?)
    };
    let n = truncation(args.n)?;
    if let Some(k) = args.k {
        if k <= 2 * n {
            return Err(usage(format!("--K must exceed 2N = {}, got {k}", 2 * n)));
        }
    }
    if args.compare == Some(Compare::Exact)
        && !matches!(
            potential.kind,
            PotentialKind::PoschlTeller | PotentialKind::SquareBarrier | PotentialKind::Zero
        )
    {
        return Err(usage(
            "--compare exact needs a closed form: use poschl-teller, square-barrier or zero, or --compare oracle",
        ));
    }
    Ok(SweepConfig {
        potential,
        n,
        lambda,
        k: args.k,
        grid: grid(&args.grid)?,
        compare: args.compare,
        tolerance: positive(args.tolerance, "--tolerance")?,
        output: output(&args.output),
    })
}

fn plateau(args: &PlateauArgs) -> CliResult<PlateauConfig> {
    let potential = potential(&args.potential)?;
    if args.n.is_empty() {
        return Err(usage("--N needs at least one value"));
    }
    let ns = args.n.iter().map(|&n| truncation(n)).collect::<CliResult<Vec<_>>>()?;
    let lo = positive(args.lambda_min, "--lambda-min")?;
    let hi = positive(args.lambda_max, "--lambda-max")?;
    let step = positive(args.lambda_step, "--lambda-step")?;
    if hi < lo {
        return Err(usage(format!("--lambda-max ({hi}) is below --lambda-min ({lo})")));
    }
    // round so that 0.25 + 75*0.05 lands on 4.0 rather than just short of it
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count < 2 {
        return Err(usage(
            "--lambda-min/--lambda-max/--lambda-step give fewer than two λ values",
        ));
    }
    let lambdas = (0..count).map(|i| round_grid(lo + i as f64 * step)).collect();
    for &e in &args.energies {
        positive(e, "--energy")?;
    }
    Ok(PlateauConfig {
        potential,
        ns,
        lambdas,
        energies: args.energies.clone(),
        tolerance: positive(args.tolerance, "--tolerance")?,
        output: output(&args.output),
    })
}

fn figures(args: &FiguresArgs) -> CliResult<FiguresConfig> {
    positive(args.energy, "--energy")?;
    positive(args.lambda, "--lambda")?;
    if args.n.is_empty() {
        return Err(usage("--N needs at least one value"));
    }
    if !(args.xmin.is_finite() && args.xmax.is_finite() && args.xmax > args.xmin) {
        return Err(usage(format!(
            "--xmax ({}) must exceed --xmin ({})",
            args.xmax, args.xmin
        )));
    }
    if args.x_points < 2 {
        return Err(usage("--x-points must be at least 2"));
    }
    let h = (args.xmax - args.xmin) / (args.x_points - 1) as f64;
    Ok(FiguresConfig {
        which: args.which,
        energy: args.energy,
        lambda: args.lambda,
        ns: args.n.clone(),
        xs: (0..args.x_points).map(|i| args.xmin + i as f64 * h).collect(),
        output: output(&args.output),
    })
}

fn oracle(args: &OracleArgs) -> CliResult<OracleConfig> {
    let check = |v: Option<f64>, flag: &str| v.map(|x| positive(x, flag)).transpose();
    Ok(OracleConfig {
        potential: potential(&args.potential)?,
        grid: grid(&args.grid)?,
        settings: jmatrix::OracleSettings {
            step: check(args.step, "--step")?,
            extent: check(args.extent, "--extent")?,
            tolerance: check(args.tolerance, "--tolerance")?,
        },
        output: output(&args.output),
    })
}

pub fn validate(cli: &Cli) -> CliResult<RunConfig> {
    Ok(match &cli.command {
        Command::Sweep(a) => RunConfig::Sweep(sweep(a)?),
        Command::Plateau(a) => RunConfig::Plateau(plateau(a)?),
        Command::Figures(a) => RunConfig::Figures(figures(a)?),
        Command::Oracle(a) => RunConfig::Oracle(oracle(a)?),
    })
}

/// Parses and validates `argv` (program name first). Help and version
/// requests come back as `CliError::Help` carrying the text to print.
pub fn parse_args<I, T>(argv: I) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    validate(&cli)
}
