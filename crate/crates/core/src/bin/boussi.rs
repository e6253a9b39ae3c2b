//! Experiment runner: reproduces the soliton-collision error-scaling
//! studies from the command line and emits CSV/JSON results.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use boussi_core::assemble::ApproximationOrder;
use boussi_core::config::{parse_config, RunConfig};
use boussi_core::error::Error;
use boussi_core::fitting::fit_power_law;
use boussi_core::grid::{Field, Grid};
use boussi_core::harness::{
    find_peaks, fit_all, run_scenario, write_errors_csv, write_fits_json, write_peaks_csv,
    write_snapshots, ErrorRecord, Scenario,
};
use boussi_core::kdv::{d_dt, Direction, KdvProfile, Soliton};
use boussi_core::spectral::{apply_lambda_inverse, apply_symbol, discrete_norms, lambda_symbol};
use boussi_core::transport::gregory_weights;
use boussi_core::Result;

#[derive(Parser)]
#[command(name = "boussi", version, about = "Boussinesq long-wave approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $BOUSSI_OUT/<scenario> or ./results/<scenario>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the eps sweep, e.g. --eps 0.1,0.05.
    #[arg(long)]
    eps: Option<String>,
    /// Worker threads for per-eps runs.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario sweep and write errors.csv, fits.json, peaks.csv and
    /// profile snapshots.
    Run {
        /// Built-in scenario when no config file is given.
        #[arg(default_value = "head-on")]
        scenario: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Parse and validate a configuration without running or writing.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-fit an existing errors.csv and print the orders.
    Fit {
        /// Path to an errors.csv produced by `run`.
        errors: PathBuf,
        /// Also rewrite fits.json next to the input.
        #[arg(long)]
        write: bool,
    },
    /// Run the built-in invariant checks and report pass/fail counts.
    Selftest,
}

fn exit_category(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::ConfigSyntax { .. } | Error::BadTruncationOrder(_) => 2,
        Error::Io(_) | Error::Json(_) => 4,
        Error::AtEps { source, .. } => exit_category(source),
        _ => 3,
    }
}

fn load_scenario(name: &str, opts: &CommonOpts) -> Result<Scenario> {
    let mut scenario = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let RunConfig { scenario } = parse_config(&text)?;
            scenario
        }
        None => match name {
            "head-on" => Scenario::head_on(),
            "overtaking" => Scenario::overtaking(),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown scenario `{other}` (built-ins: head-on, overtaking)"
                )))
            }
        },
    };
    if let Some(list) = &opts.eps {
        let mut eps = Vec::new();
        for part in list.split(',') {
            eps.push(part.trim().parse::<f64>().map_err(|_| {
                Error::InvalidConfig(format!("--eps: `{part}` is not a number"))
            })?);
        }
        eps.sort_by(|a, b| b.total_cmp(a));
        scenario.eps_list = eps;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn out_dir(scenario: &str, opts: &CommonOpts) -> PathBuf {
    if let Some(dir) = &opts.out {
        return dir.clone();
    }
    let root = std::env::var_os("BOUSSI_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results"));
    root.join(scenario)
}

fn cmd_run(name: &str, opts: &CommonOpts) -> Result<()> {
    let scenario = load_scenario(name, opts)?;
    let dir = out_dir(&scenario.name, opts);
    std::fs::create_dir_all(&dir)?;
    if !opts.quiet {
        println!(
            "running `{}` over eps {:?} on {} thread(s)",
            scenario.name,
            scenario.eps_list,
            opts.threads.max(1)
        );
    }
    let started = Instant::now();
    let result = run_scenario(&scenario, opts.threads)?;
    if !opts.quiet {
        println!("sweep finished in {:.1}s", started.elapsed().as_secs_f64());
    }

    write_errors_csv(&dir.join("errors.csv"), &result.records())?;
    if scenario.measure_theta {
        write_errors_csv(&dir.join("errors_theta.csv"), &result.theta_records())?;
    }
    let fits = fit_all(&result.scenario, &result.records())?;
    write_fits_json(&dir.join("fits.json"), &fits)?;
    write_peaks_csv(&dir.join("peaks.csv"), &result)?;
    write_snapshots(&dir.join("snapshots"), &result)?;
    if !opts.quiet {
        for f in &fits {
            println!(
                "{} {} ({}): order {:.3}, constant {:.3e}",
                f.scenario, f.order, f.norm, f.slope, f.constant
            );
        }
        println!("results in {}", dir.display());
    }
    Ok(())
}

fn cmd_fit(path: &Path, write: bool) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::ConfigSyntax {
                line: i + 1,
                message: format!("expected 6 CSV columns, got {}", cols.len()),
            });
        }
        let num = |j: usize| -> Result<f64> {
            cols[j].trim().parse().map_err(|_| Error::ConfigSyntax {
                line: i + 1,
                message: format!("column {} is not a number", j + 1),
            })
        };
        let order = match cols[2].trim() {
            "kdv_only" => ApproximationOrder::KdvOnly,
            "second_order" => ApproximationOrder::SecondOrder,
            other => {
                return Err(Error::ConfigSyntax {
                    line: i + 1,
                    message: format!("unknown order `{other}`"),
                })
            }
        };
        records.push(ErrorRecord {
            scenario: cols[0].trim().to_string(),
            eps: num(1)?,
            order,
            sup_l2: num(3)?,
            sup_linf: num(4)?,
            t_at_max: num(5)?,
        });
    }
    let mut scenarios: Vec<String> = records.iter().map(|r| r.scenario.clone()).collect();
    scenarios.sort();
    scenarios.dedup();
    let mut all_fits = Vec::new();
    for scenario in &scenarios {
        let subset: Vec<ErrorRecord> =
            records.iter().filter(|r| &r.scenario == scenario).cloned().collect();
        for f in fit_all(scenario, &subset)? {
            println!(
                "{} {} ({}): order {:.3}, constant {:.3e}, fit residual {:.2e}",
                f.scenario, f.order, f.norm, f.slope, f.constant, f.residual
            );
            all_fits.push(f);
        }
    }
    if write {
        let out = path.with_file_name("fits.json");
        write_fits_json(&out, &all_fits)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn selftest_checks() -> Vec<(&'static str, Result<()>)> {
    fn check(ok: bool, what: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("selftest assertion failed: {what}")))
        }
    }

    let mut out: Vec<(&'static str, Result<()>)> = Vec::new();

    out.push((
        "spectral derivative and lambda inverse",
        (|| {
            let g = Grid::new(256, 2.0 * std::f64::consts::PI)?;
            let f = Field::from_fn(g.clone(), |x| (3.0 * x).sin());
            let lam = lambda_symbol(&g);
            let back = apply_lambda_inverse(&apply_symbol(&f, &lam)?)?;
            let err = discrete_norms(&back.sub(&f)?).linf;
            check(err < 1e-12, "lambda round trip")
        })(),
    ));

    out.push((
        "closed-form soliton solves KdV",
        (|| {
            let g = Grid::new(2048, 80.0)?;
            let p = KdvProfile::SingleSoliton {
                direction: Direction::Right,
                soliton: Soliton { kappa: 1.0, x0: 0.0 },
            };
            let (w, dt_exact) = p.eval_with_dt(&g, 0.0, 0.3)?;
            let rhs = d_dt(&w, Direction::Right)?;
            let err = discrete_norms(&rhs.sub(&dt_exact)?).linf;
            check(err < 1e-8, "soliton KdV residual")
        })(),
    ));

    out.push((
        "quadrature weights integrate degree-5 polynomials",
        (|| {
            let n = 41;
            let h = 1.0 / (n - 1) as f64;
            let w = gregory_weights(n, h, 5);
            let exact = 1.0 / 6.0; // integral of x^5 on [0, 1]
            let total: f64 =
                w.iter().enumerate().map(|(j, &wj)| wj * (j as f64 * h).powi(5)).sum();
            check((total - exact).abs() < 1e-14, "Gregory polynomial exactness")
        })(),
    ));

    out.push((
        "power-law fit recovers synthetic orders",
        (|| {
            let pts: Vec<(f64, f64)> =
                [0.1f64, 0.05, 0.025].iter().map(|&e| (e, 7.0 * e.powi(4))).collect();
            let fit = fit_power_law(&pts)?;
            check(
                (fit.slope - 4.0).abs() < 1e-10 && (fit.constant - 7.0).abs() < 1e-10,
                "power-law fit",
            )
        })(),
    ));

    out.push((
        "sub-grid peak refinement",
        (|| {
            let g: Arc<Grid> = Grid::new(512, 80.0)?;
            let center = 1.7 + g.dx() * 0.37;
            let f = Field::from_fn(g.clone(), |x| 6.0 / (x - center).cosh().powi(2));
            let peaks = find_peaks(&f, 1.0);
            check(
                peaks.len() == 1 && (peaks[0].position - center).abs() < g.dx() / 10.0,
                "peak localization",
            )
        })(),
    ));

    out.push((
        "truth solver conserves the mean",
        (|| {
            use boussi_core::boussinesq::{evolve, SolverConfig, UVState};
            let g = Grid::new(512, 80.0)?;
            let u = Field::from_fn(g.clone(), |x| 0.05 / (0.5 * x).cosh().powi(2));
            let v = Field::zeros(g);
            let mean0 = u.mean();
            let state = UVState::new(u, v, 0.0)?;
            let cfg = SolverConfig::default();
            let out = evolve(state, 5.0, &cfg, |_| Ok(()))?;
            let drift = (out.u.mean() + out.v.mean() - mean0).abs();
            check(drift < 1e-12, "mean conservation")
        })(),
    ));

    out
}

fn cmd_selftest() -> Result<()> {
    let checks = selftest_checks();
    let mut failed = 0usize;
    for (name, result) in &checks {
        match result {
            Ok(()) => println!("PASS {name}"),
            Err(e) => {
                failed += 1;
                println!("FAIL {name}: {e}");
            }
        }
    }
    println!("selftest: {} passed, {} failed", checks.len() - failed, failed);
    if failed > 0 {
        return Err(Error::InvalidConfig(format!("{failed} selftest check(s) failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, opts } => cmd_run(scenario, opts),
        Command::Validate { config } => (|| {
            let text = std::fs::read_to_string(config)?;
            let cfg = parse_config(&text)?;
            println!(
                "ok: scenario `{}`, eps {:?}",
                cfg.scenario.name, cfg.scenario.eps_list
            );
            Ok(())
        })(),
        Command::Fit { errors, write } => cmd_fit(errors, *write),
        Command::Selftest => cmd_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_category(&e))
        }
    }
}
