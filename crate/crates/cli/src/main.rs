//! Command-line interface: run two-sample tests on CSV files or bundled
//! datasets, sweep p-value-versus-gamma curves, and drive simulation
//! studies.
//!
//! Exit codes: 0 success, 2 input error, 3 estimator non-convergence,
//! 4 simulation config error.

// Domain checks are spelled `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dpd::{
    datasets, dpd_test, ks_test, pooled_t_test, run_level_power_study, trimmed_t_test,
    wilcoxon_test, Error as DpdError, Sample, SimulationConfig, SolverConfig, TuningBeta,
    TuningGamma,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

const EXIT_INPUT: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "dpd", version, about = "Robust two-sample mean tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single two-sample test.
    Test(TestArgs),
    /// Sweep divergence-test p-values over a gamma grid.
    Curve(CurveArgs),
    /// Run a Monte Carlo level/power study from a config file.
    Simulate(SimulateArgs),
    /// Inspect the bundled datasets.
    Datasets(DatasetsArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Bundled dataset name (see `datasets list`).
    #[arg(long, conflicts_with_all = ["x", "y"])]
    dataset: Option<String>,
    /// CSV file with the first sample: one decimal value per line,
    /// optional header line.
    #[arg(long, requires = "y")]
    x: Option<PathBuf>,
    /// CSV file with the second sample.
    #[arg(long, requires = "x")]
    y: Option<PathBuf>,
    /// Remove the annotated outliers (bundled datasets only).
    #[arg(long)]
    drop_outliers: bool,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = Method::Dpd)]
    method: Method,
    /// Estimation tuning parameter; defaults to --gamma.
    #[arg(long)]
    beta: Option<f64>,
    /// Divergence tuning parameter (the single robustness parameter when
    /// --beta is not given).
    #[arg(long)]
    gamma: Option<f64>,
    /// Trimming proportion per tail for --method trimmed-t.
    #[arg(long, default_value_t = 0.2)]
    trim: f64,
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Gamma grid as start:step:end, all within [0, 1].
    #[arg(long, default_value = "0:0.05:1")]
    grid: String,
    /// Hold beta fixed at this value instead of beta = gamma.
    #[arg(long)]
    beta: Option<f64>,
    /// Write an SVG rendering of the curves here.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON study configuration (see the repository README for the schema).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DatasetsArgs {
    #[command(subcommand)]
    command: DatasetsCommand,
}

#[derive(Debug, Subcommand)]
enum DatasetsCommand {
    /// List the bundled datasets.
    List,
    /// Print one dataset in the resource text format.
    Show { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Dpd,
    #[value(name = "pooled-t")]
    PooledT,
    #[value(name = "trimmed-t")]
    TrimmedT,
    Wilcoxon,
    Ks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<DpdError> for Failure {
    fn from(e: DpdError) -> Self {
        let code = match &e {
            DpdError::DidNotConverge { .. } => EXIT_CONVERGENCE,
            DpdError::InvalidConfig { .. } => EXIT_CONFIG,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Curve(args) => cmd_curve(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Datasets(args) => cmd_datasets(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Load the two samples plus a description of where they came from.
fn load_input(input: &InputArgs) -> Result<(Sample, Sample, serde_json::Value), Failure> {
    match (&input.dataset, &input.x, &input.y) {
        (Some(name), None, None) => {
            let mut d = datasets::load(name)?;
            if input.drop_outliers {
                d = d.without_outliers();
            }
            let desc = json!({
                "dataset": d.name,
                "drop_outliers": input.drop_outliers,
                "n1": d.x.len(),
                "n2": d.y.len(),
            });
            Ok((d.x, d.y, desc))
        }
        (None, Some(x_path), Some(y_path)) => {
            if input.drop_outliers {
                return Err(Failure::input(
                    "--drop-outliers requires a bundled dataset; CSV inputs carry no outlier annotations",
                ));
            }
            let x = read_csv_sample(x_path)?;
            let y = read_csv_sample(y_path)?;
            let desc = json!({
                "x": x_path.display().to_string(),
                "y": y_path.display().to_string(),
                "n1": x.len(),
                "n2": y.len(),
            });
            Ok((x, y, desc))
        }
        _ => Err(Failure::input(
            "provide either --dataset NAME or both --x FILE and --y FILE",
        )),
    }
}

/// Single column of decimal values, optional header line, '.' decimal.
fn read_csv_sample(path: &Path) -> Result<Sample, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(Failure::input(format!(
                    "{}:{}: non-finite value {v}",
                    path.display(),
                    i + 1
                )))
            }
            Err(_) if i == 0 => {} // header line
            Err(_) => {
                return Err(Failure::input(format!(
                    "{}:{}: cannot parse `{trimmed}` as a decimal value",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sample".to_string());
    Ok(Sample::new(values, label)?)
}

fn resolve_tuning(beta: Option<f64>, gamma: Option<f64>) -> (f64, f64) {
    // One robustness parameter by default: beta = gamma, at 0.1 unless set.
    let gamma = gamma.unwrap_or_else(|| beta.unwrap_or(0.1));
    let beta = beta.unwrap_or(gamma);
    (beta, gamma)
}

fn write_out(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_test(args: TestArgs) -> Result<(), Failure> {
    let (x, y, input_desc) = load_input(&args.input)?;
    let (beta, gamma) = resolve_tuning(args.beta, args.gamma);

    let (config, result) = match args.method {
        Method::Dpd => {
            let r = dpd_test(
                &x,
                &y,
                TuningBeta::new(beta)?,
                TuningGamma::new(gamma)?,
                &SolverConfig::default(),
            )?;
            (
                json!({"method": "dpd", "beta": beta, "gamma": gamma, "input": input_desc}),
                serde_json::to_value(&r).expect("serializable result"),
            )
        }
        Method::PooledT => {
            let r = pooled_t_test(&x, &y)?;
            (
                json!({"method": "pooled-t", "input": input_desc}),
                serde_json::to_value(&r).expect("serializable result"),
            )
        }
        Method::TrimmedT => {
            let r = trimmed_t_test(&x, &y, args.trim)?;
            (
                json!({"method": "trimmed-t", "trim": args.trim, "input": input_desc}),
                serde_json::to_value(&r).expect("serializable result"),
            )
        }
        Method::Wilcoxon => {
            let r = wilcoxon_test(&x, &y)?;
            (
                json!({"method": "wilcoxon", "input": input_desc}),
                serde_json::to_value(&r).expect("serializable result"),
            )
        }
        Method::Ks => {
            let r = ks_test(&x, &y)?;
            (
                json!({"method": "ks", "input": input_desc}),
                serde_json::to_value(&r).expect("serializable result"),
            )
        }
    };

    let content = match args.format {
        Format::Json => {
            let record = json!({
                "tool": "dpd",
                "version": VERSION,
                "command": "test",
                "config": config,
                "result": result,
            });
            format!("{}\n", serde_json::to_string_pretty(&record).expect("json"))
        }
        Format::Csv => {
            let statistic = result["statistic"].as_f64().unwrap_or(f64::NAN);
            let p = result["p_value"].as_f64().unwrap_or(f64::NAN);
            format!(
                "# dpd {VERSION}\n# config={config}\nmethod,statistic,p_value\n{},{},{}\n",
                config["method"].as_str().unwrap_or("?"),
                statistic,
                p
            )
        }
    };
    write_out(&args.out, &content)
}

fn parse_grid(raw: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::input(format!(
            "grid `{raw}` must be start:step:end"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Failure::input(format!("grid component `{p}` is not a number")))
        })
        .collect::<Result<_, _>>()?;
    let (start, step, end) = (nums[0], nums[1], nums[2]);
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) || start > end {
        return Err(Failure::input("grid must satisfy 0 <= start <= end <= 1"));
    }
    if !(step > 0.0) && start != end {
        return Err(Failure::input("grid step must be > 0"));
    }
    let mut grid = Vec::new();
    let mut k = 0usize;
    loop {
        let g = start + step * k as f64;
        if g > end + 1e-12 {
            break;
        }
        grid.push(g.min(1.0));
        if start == end {
            break;
        }
        k += 1;
    }
    Ok(grid)
}

/// P-values over the grid; estimator failures at single grid points are
/// recorded as missing values, never fabricated.
fn curve_p_values(x: &Sample, y: &Sample, grid: &[f64], beta_fixed: Option<f64>) -> Vec<Option<f64>> {
    let cfg = SolverConfig::default();
    grid.iter()
        .map(|g| {
            let beta = beta_fixed.unwrap_or(*g);
            let b = TuningBeta::new(beta).ok()?;
            let gm = TuningGamma::new(*g).ok()?;
            dpd_test(x, y, b, gm, &cfg).ok().map(|r| r.p_value)
        })
        .collect()
}

fn cmd_curve(args: CurveArgs) -> Result<(), Failure> {
    let grid = parse_grid(&args.grid)?;
    // Full-data curve always; outlier-deleted curve when requested.
    let base_input = InputArgs {
        drop_outliers: false,
        dataset: args.input.dataset.clone(),
        x: args.input.x.clone(),
        y: args.input.y.clone(),
    };
    let (x, y, _) = load_input(&base_input)?;
    let p_full = curve_p_values(&x, &y, &grid, args.beta);
    let p_deleted = if args.input.drop_outliers {
        let (xc, yc, _) = load_input(&args.input)?;
        Some(curve_p_values(&xc, &yc, &grid, args.beta))
    } else {
        None
    };

    let beta_rule = match args.beta {
        Some(b) => format!("fixed({b})"),
        None => "equal-to-gamma".to_string(),
    };
    let source = args
        .input
        .dataset
        .clone()
        .unwrap_or_else(|| format!("{:?}/{:?}", args.input.x, args.input.y));

    let mut csv = format!(
        "# dpd {VERSION}\n# command=curve source={source} beta_rule={beta_rule} grid={}\n",
        args.grid
    );
    csv.push_str(if p_deleted.is_some() {
        "gamma,p_full,p_outlier_deleted\n"
    } else {
        "gamma,p_full\n"
    });
    for (i, g) in grid.iter().enumerate() {
        let full = p_full[i].map_or(String::new(), |p| p.to_string());
        match &p_deleted {
            Some(del) => {
                let d = del[i].map_or(String::new(), |p| p.to_string());
                csv.push_str(&format!("{g},{full},{d}\n"));
            }
            None => csv.push_str(&format!("{g},{full}\n")),
        }
    }

    if let Some(svg_path) = &args.svg {
        let rendered = svg::render_curves(&grid, &p_full, p_deleted.as_deref(), &source);
        fs::write(svg_path, rendered)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", svg_path.display())))?;
    }
    write_out(&args.out, &csv)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config: SimulationConfig = serde_json::from_str(&text).map_err(|e| Failure {
        code: EXIT_CONFIG,
        message: format!("{}: {e}", args.config.display()),
    })?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    let report = run_level_power_study(&config)?;

    let config_echo = serde_json::to_string(&report.config).expect("serializable config");
    let mut csv = format!("# dpd {VERSION}\n# config={config_echo}\n");
    csv.push_str("test,n,n1,n2,replications,rejections,excluded,rejection_rate,monte_carlo_se\n");
    for c in &report.cells {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.test,
            c.n,
            c.n1,
            c.n2,
            c.replications,
            c.rejections,
            c.excluded,
            c.rejection_rate,
            c.monte_carlo_se
        ));
    }
    write_out(&args.out, &csv)
}

fn cmd_datasets(args: DatasetsArgs) -> Result<(), Failure> {
    match args.command {
        DatasetsCommand::List => {
            for name in datasets::list_names() {
                let d = datasets::load(name)?;
                println!(
                    "{name}: {} (n={}) vs {} (n={}), {} annotated outliers",
                    d.x.label(),
                    d.x.len(),
                    d.y.label(),
                    d.y.len(),
                    d.outlier_indices_x.len() + d.outlier_indices_y.len()
                );
            }
            Ok(())
        }
        DatasetsCommand::Show { name } => {
            let d = datasets::load(&name)?;
            println!("# {}", d.provenance);
            print!("{}", datasets::to_resource_text(&d.x));
            if !d.outlier_indices_x.is_empty() {
                println!("# outlier indices: {:?}", d.outlier_indices_x);
            }
            println!();
            print!("{}", datasets::to_resource_text(&d.y));
            if !d.outlier_indices_y.is_empty() {
                println!("# outlier indices: {:?}", d.outlier_indices_y);
            }
            Ok(())
        }
    }
}
