//! `gclt`: batch front end for sublinear expectations, the G-heat solver and
//! central-limit experiments.
//!
//! Exit status: 0 success, 1 a convergence or verification criterion was
//! missed, 2 invalid input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gclt::clt::preset::{ExperimentPreset, BUILTIN_NAMES};
use gclt::gheat::{solve, value_at, SolverConfig};
use gclt::scenario::io::parse_steps;
use gclt::scenario::{expect, lower_expect};
use gclt::{GParams, TestFunction};
use serde::Deserialize;

#[derive(Parser)]
#[command(
    name = "gclt",
    version,
    about = "Sublinear expectations, G-heat equation and CLT experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Upper and lower expectation of a function on every step of a scenario document.
    Expect {
        #[arg(long)]
        config: PathBuf,
        /// One of: x, x2, abs, abs3, cos, relu, xy, y.
        #[arg(long, default_value = "x2")]
        function: String,
    },
    /// Run a convergence experiment and write its CSV and condition report.
    Clt {
        /// Preset file; a shipped preset name is accepted too.
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the preset tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run a seeded verification suite.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 20_241_015)]
        seed: u64,
    },
    /// Solve the G-heat equation and dump the value function as CSV.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the hypothesis report of a preset's sequence model.
    CheckConditions {
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Criterion(String),
    Invalid(String),
}

impl From<gclt::Error> for Failure {
    fn from(e: gclt::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn named_function(name: &str) -> Result<TestFunction, Failure> {
    let f = match name {
        "x" => TestFunction::identity(),
        "x2" | "x^2" => TestFunction::square(),
        "abs" => TestFunction::scalar("|x|", 1.0, f64::INFINITY, f64::abs),
        "abs3" => TestFunction::scalar("|x|^3", f64::INFINITY, f64::INFINITY, |x| x.abs().powi(3)),
        "cos" => TestFunction::cos(),
        "relu" => TestFunction::scalar("max(x,0)", 1.0, f64::INFINITY, |x| x.max(0.0)),
        "y" => TestFunction::new("y", 2, 1.0, f64::INFINITY, |p| p[1]),
        "xy" => TestFunction::new("xy", 2, f64::INFINITY, f64::INFINITY, |p| p[0] * p[1]),
        other => {
            return Err(Failure::Invalid(format!(
                "unknown function `{other}` (known: x, x2, abs, abs3, cos, relu, y, xy)"
            )))
        }
    };
    Ok(f)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn load_preset(config: &str) -> Result<ExperimentPreset, Failure> {
    let path = Path::new(config);
    let preset = if !path.exists() && BUILTIN_NAMES.contains(&config) {
        ExperimentPreset::builtin(config)
    } else {
        ExperimentPreset::from_json(&read(path)?)
    };
    preset.map_err(|e| Failure::Invalid(format!("{config}: {e}")))
}

fn cmd_expect(config: &Path, function: &str) -> Outcome {
    let (label, steps) = parse_steps(&read(config)?)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", config.display())))?;
    let phi = named_function(function)?;
    for (i, s) in steps.iter().enumerate() {
        let f = if phi.dim() == 1 && s.dim() == 2 {
            phi.on_coordinate(0, 2)
        } else {
            phi.clone()
        };
        let upper = expect(&f, s)?;
        let lower = lower_expect(&f, s)?;
        println!("{label} step {i}: E[{function}] = {upper:?}  -E[-{function}] = {lower:?}");
    }
    Ok(())
}

fn cmd_clt(config: &str, out: Option<PathBuf>, tol: Option<f64>) -> Outcome {
    let mut preset = load_preset(config)?;
    if let Some(tol) = tol {
        preset.tolerance = tol;
        preset.validate()?;
    }
    let outcome = preset.run()?;
    let dir = out.unwrap_or_else(|| preset.output_dir.clone());
    let (csv, json) = outcome.write(&dir)?;
    println!("n,lhs,pde,e_n");
    for r in &outcome.report.rows {
        println!("{},{},{},{}", r.n, r.lhs, r.pde, r.e_n);
    }
    println!("wrote {} and {}", csv.display(), json.display());
    let e = outcome.final_error();
    if outcome.passed() {
        println!(
            "{}: final e_n = {e:.6e} within tolerance {}",
            preset.name, preset.tolerance
        );
        Ok(())
    } else {
        Err(Failure::Criterion(format!(
            "{}: final e_n = {e:.6e} exceeds tolerance {}",
            preset.name, preset.tolerance
        )))
    }
}

fn cmd_verify(suite: &str, seed: u64) -> Outcome {
    let report = gclt::suites::run_suite(suite, seed)?;
    println!("suite {suite}, seed {seed}");
    for line in report.lines() {
        println!("{line}");
    }
    if report.passed() {
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        Err(Failure::Criterion(format!("{failed} check(s) failed")))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfig {
    gp: GParams,
    phi: String,
    #[serde(default)]
    phi_value: Option<f64>,
    pde: SolverConfig,
}

fn cmd_solve(config: &Path, out: &Path) -> Outcome {
    let text = read(config)?;
    let cfg: SolveConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", config.display())))?;
    let phi = match cfg.phi.as_str() {
        "relu_clip" => TestFunction::relu_clip(cfg.phi_value.unwrap_or(cfg.pde.x_hi)),
        "const" => TestFunction::constant(cfg.phi_value.unwrap_or(0.0), 1),
        name => named_function(name)?,
    };
    if phi.dim() != 1 {
        return Err(Failure::Invalid(format!(
            "`{}` is not a function of one variable",
            cfg.phi
        )));
    }
    let pde = cfg.pde.resolve_dt(&cfg.gp)?;
    let vf = solve(&cfg.gp, &phi, &pde)?;
    std::fs::create_dir_all(out).map_err(gclt::Error::from)?;
    let path = out.join("value_function.csv");
    vf.write_csv(std::fs::File::create(&path).map_err(gclt::Error::from)?)?;
    if pde.x_lo <= 0.0 && pde.x_hi >= 0.0 {
        println!("v({}, 0) = {:?}", vf.t, value_at(&vf, 0.0)?);
    }
    println!(
        "wrote {} ({} nodes, dt = {:e})",
        path.display(),
        vf.values.len(),
        pde.dt
    );
    Ok(())
}

fn cmd_check_conditions(config: &str, out: Option<PathBuf>) -> Outcome {
    let preset = load_preset(config)?;
    let report = gclt::clt::check_conditions(&preset.model()?, preset.quant_levels)?;
    let json = serde_json::to_string_pretty(&report).map_err(gclt::Error::from)?;
    println!("{json}");
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).map_err(gclt::Error::from)?;
        let path = dir.join(format!("{}.conditions.json", preset.name));
        std::fs::write(&path, json + "\n").map_err(gclt::Error::from)?;
    }
    if report.means_vanish(1e-12) && report.beta > 0.0 {
        Ok(())
    } else {
        Err(Failure::Criterion(format!(
            "mean residual {:e} or beta {} violates the hypotheses",
            report.max_mean_residual(),
            report.beta
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Expect { config, function } => cmd_expect(&config, &function),
        Command::Clt { config, out, tol } => cmd_clt(&config, out, tol),
        Command::Verify { suite, seed } => cmd_verify(&suite, seed),
        Command::Solve { config, out } => cmd_solve(&config, &out),
        Command::CheckConditions { config, out } => cmd_check_conditions(&config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Criterion(msg)) => {
            eprintln!("criterion missed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
