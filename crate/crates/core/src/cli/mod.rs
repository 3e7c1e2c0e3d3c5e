//! Experiment runner behind the `ua-dirac` binary: single runs, time and
//! space sweeps, the limit-model rate and the toy-model check, with CSV,
//! plot-data and SVG output.

mod config;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    CustomProblem, ExperimentConfig, LimitConfig, Operation, OutputConfig, Overrides, Preset, ReferenceConfig,
    SpaceSweepConfig, ToyConfig,
};
use output::{write_curves, write_field_csv, write_loglog_svg, Curve};

use crate::diagnostics::{l2_error, linf_error, reference_solution, ConservationTracker, ErrorReport, FailedRun, ReportRow};
use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::limit::{limit_compare, LimitReport};
use crate::model::Problem;
use crate::steppers::{propagate, propagate_with, reconstruct_phi};
use crate::toy::{successive_ratios, toy_derivative_bound, ToyBoundRow, ToyProblem};

/// Propagates one `(eps, dt)` point and compares with `reference`.
fn run_point(cfg: &ExperimentConfig, problem: &Problem, dt: f64, reference: &SpinorField) -> Result<(ReportRow, SpinorField)> {
    let eps = problem.epsilon;
    let m = problem.model(cfg.n)?;
    let phi0 = problem.initial_data(cfg.n)?;
    let opts = cfg.stepper(dt, cfg.n_tau);
    let start = Instant::now();
    let mut tracker = ConservationTracker::new(&phi0, &m)?;
    let mut probe_err = None;
    let state = propagate_with(&m, &phi0, cfg.order(), cfg.g1, &opts, cfg.t_final, |s| {
        if let Err(e) = tracker.observe(&reconstruct_phi(s, eps), &m) {
            probe_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = probe_err {
        return Err(e);
    }
    let phi = reconstruct_phi(&state, eps);
    let row = ReportRow {
        scheme: cfg.scheme,
        init_order: cfg.order(),
        epsilon: eps,
        dt,
        n: cfg.n,
        n_tau: cfg.n_tau,
        err_linf: linf_error(reference, &phi)?,
        err_l2: l2_error(reference, &phi)?,
        mass_drift: tracker.mass_drift,
        energy_drift: tracker.energy_drift,
        runtime_s: start.elapsed().as_secs_f64(),
    };
    Ok((row, phi))
}

fn reference_for(cfg: &ExperimentConfig, problem: &Problem) -> Result<SpinorField> {
    let m = problem.model(cfg.n)?;
    let phi0 = problem.initial_data(cfg.n)?;
    let cache = cfg.cache_dir();
    reference_solution(&m, &phi0, cfg.t_final, &cfg.reference_spec(), Some(&cache))
}

fn write_report_csv(report: &ErrorReport, path: &Path) -> Result<()> {
    report.write_csv(fs::File::create(path)?)
}

/// Result of an operation plus the files it wrote.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome<R> {
    pub report: R,
    pub files: Vec<PathBuf>,
}

/// One propagation at `(epsilons[0], dts[0])`, compared with the cached
/// reference. Writes `run.csv` and the final field `run_phi.csv`.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome<ErrorReport>> {
    cfg.validate(Operation::Run)?;
    let (eps, dt) = (cfg.epsilons[0], cfg.dts[0]);
    let problem = cfg.problem(eps)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let mut report = ErrorReport::default();
    let mut files = Vec::new();
    match reference_for(cfg, &problem).and_then(|r| run_point(cfg, &problem, dt, &r)) {
        Ok((row, phi)) => {
            report.push(row);
            let p = dir.join("run_phi.csv");
            write_field_csv(&p, &phi)?;
            files.push(p);
        }
        Err(e @ Error::InvalidConfig(_)) => return Err(e),
        Err(e) => report.failures.push(FailedRun { epsilon: eps, dt, message: e.to_string() }),
    }
    let p = dir.join("run.csv");
    write_report_csv(&report, &p)?;
    files.insert(0, p);
    Ok(Outcome { report, files })
}

/// Full `(eps, dt)` cross product. References are computed once per `eps`
/// (in parallel) before the points run in parallel; a failed point is
/// recorded and the sweep continues. Writes `sweep_time.csv`, one data file
/// per `eps` plus the uniform curve, and optionally `sweep_time.svg`.
pub fn sweep_time(cfg: &ExperimentConfig) -> Result<Outcome<ErrorReport>> {
    cfg.validate(Operation::SweepTime)?;
    let problems: Vec<Problem> = cfg.epsilons.iter().map(|&e| cfg.problem(e)).collect::<Result<_>>()?;
    let references: Vec<Result<SpinorField>> = problems.par_iter().map(|p| reference_for(cfg, p)).collect();
    let points: Vec<(usize, f64)> =
        (0..problems.len()).flat_map(|i| cfg.dts.iter().map(move |&dt| (i, dt))).collect();
    let results: Vec<(f64, f64, Result<ReportRow>)> = points
        .par_iter()
        .map(|&(i, dt)| {
            let res = match &references[i] {
                Ok(r) => run_point(cfg, &problems[i], dt, r).map(|(row, _)| row),
                Err(e) => Err(Error::NumericalConsistency(format!("reference failed: {e}"))),
            };
            (problems[i].epsilon, dt, res)
        })
        .collect();
    let mut report = ErrorReport::default();
    for (epsilon, dt, res) in results {
        match res {
            Ok(row) => {
                info!("eps={epsilon:e} dt={dt:e}: err={:e}", row.err_linf);
                report.push(row);
            }
            Err(e) => {
                warn!("eps={epsilon:e} dt={dt:e} failed: {e}");
                report.failures.push(FailedRun { epsilon, dt, message: e.to_string() });
            }
        }
    }
    report.sort();
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let csv = dir.join("sweep_time.csv");
    write_report_csv(&report, &csv)?;
    let mut files = vec![csv];
    let mut curves: Vec<Curve> =
        report.epsilons().into_iter().map(|e| Curve::new(format!("eps={e:e}"), report.series(e))).collect();
    curves.push(Curve::new("uniform", report.uniform_errors()));
    files.extend(write_plots(cfg, "sweep_time", "Temporal error", "dt", "err_linf", &curves)?);
    Ok(Outcome { report, files })
}

fn write_plots(
    cfg: &ExperimentConfig,
    stem: &str,
    title: &str,
    x_name: &str,
    y_name: &str,
    curves: &[Curve],
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if cfg.output.plot_data {
        files.extend(write_curves(&cfg.output.dir.join("plot"), stem, x_name, y_name, curves)?);
    }
    if cfg.output.svg {
        let p = cfg.output.dir.join(format!("{stem}.svg"));
        match write_loglog_svg(&p, title, x_name, y_name, curves) {
            Ok(()) => files.push(p),
            Err(e) => warn!("{e}"),
        }
    }
    Ok(files)
}

/// Which discretization parameter a space-sweep row varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceAxis {
    #[serde(rename = "N")]
    N,
    #[serde(rename = "Ntau")]
    NTau,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceRow {
    pub axis: SpaceAxis,
    pub n: usize,
    pub n_tau: usize,
    pub err_linf: f64,
    pub err_l2: f64,
    pub runtime_s: f64,
}

impl SpaceRow {
    pub fn value(&self) -> usize {
        match self.axis {
            SpaceAxis::N => self.n,
            SpaceAxis::NTau => self.n_tau,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFailure {
    pub axis: SpaceAxis,
    pub value: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub rows: Vec<SpaceRow>,
    pub failures: Vec<SpaceFailure>,
}

impl SpaceReport {
    /// `(value, err_linf)` along one axis, increasing value.
    pub fn series(&self, axis: SpaceAxis) -> Vec<(f64, f64)> {
        let mut s: Vec<(f64, f64)> =
            self.rows.iter().filter(|r| r.axis == axis).map(|r| (r.value() as f64, r.err_linf)).collect();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        s
    }
}

fn solve_on(cfg: &ExperimentConfig, problem: &Problem, n: usize, n_tau: usize) -> Result<SpinorField> {
    let m = problem.model(n)?;
    let phi0 = problem.initial_data(n)?;
    let opts = cfg.stepper(cfg.sweep_space.dt, n_tau);
    let state = propagate(&m, &phi0, cfg.order(), cfg.g1, &opts, cfg.t_final)?;
    Ok(reconstruct_phi(&state, problem.epsilon))
}

/// Spectral accuracy at a fixed small `dt`: the `N` sweep (at
/// `N_tau = ref_n_tau`) and the `N_tau` sweep (at `N = ref_n`) are compared
/// with the run on `(ref_n, ref_n_tau)` at the coarse grid nodes. Writes
/// `sweep_space.csv` and one data file per axis.
pub fn sweep_space(cfg: &ExperimentConfig) -> Result<Outcome<SpaceReport>> {
    cfg.validate(Operation::SweepSpace)?;
    let s = &cfg.sweep_space;
    let problem = cfg.problem(s.epsilon.unwrap_or(cfg.epsilons[0]))?;
    let reference = solve_on(cfg, &problem, s.ref_n, s.ref_n_tau)?;
    let points: Vec<(SpaceAxis, usize, usize)> = s
        .n_values
        .iter()
        .map(|&n| (SpaceAxis::N, n, s.ref_n_tau))
        .chain(s.n_tau_values.iter().map(|&nt| (SpaceAxis::NTau, s.ref_n, nt)))
        .collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(axis, n, n_tau)| {
            let start = Instant::now();
            let res = solve_on(cfg, &problem, n, n_tau).and_then(|phi| {
                let r = reference.subsample(*phi.grid())?;
                Ok(SpaceRow {
                    axis,
                    n,
                    n_tau,
                    err_linf: linf_error(&r, &phi)?,
                    err_l2: l2_error(&r, &phi)?,
                    runtime_s: start.elapsed().as_secs_f64(),
                })
            });
            (axis, if axis == SpaceAxis::N { n } else { n_tau }, res)
        })
        .collect();
    let mut report = SpaceReport::default();
    for (axis, value, res) in results {
        match res {
            Ok(row) => report.rows.push(row),
            Err(e) => report.failures.push(SpaceFailure { axis, value, message: e.to_string() }),
        }
    }
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("sweep_space.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::Serialization(e.to_string()))?;
    for r in &report.rows {
        w.serialize(r).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    w.flush()?;
    let curves = [Curve::new("N", report.series(SpaceAxis::N)), Curve::new("Ntau", report.series(SpaceAxis::NTau))];
    let mut files = vec![csv_path];
    files.extend(write_plots(cfg, "sweep_space", "Spatial and tau error", "points", "err_linf", &curves)?);
    Ok(Outcome { report, files })
}

/// Distance between the Dirac reference and the reconstructed limit-model
/// solution for each `eps` of `[limit_rate]`. Writes `limit_rate.csv`.
pub fn limit_rate(cfg: &ExperimentConfig) -> Result<Outcome<LimitReport>> {
    cfg.validate(Operation::LimitRate)?;
    let l = &cfg.limit_rate;
    let n = l.n.unwrap_or(cfg.n);
    let problem = cfg.problem(l.epsilons[0])?;
    let spec = cfg.reference_spec();
    let cache = cfg.cache_dir();
    let report = limit_compare(&problem, &l.epsilons, n, cfg.t_final, l.dt, |m, phi0| {
        reference_solution(m, phi0, cfg.t_final, &spec, Some(&cache))
    })?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("limit_rate.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::Serialization(e.to_string()))?;
    for r in &report.rows {
        w.serialize(r).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    w.flush()?;
    let curve = Curve::new("limit", report.rows.iter().map(|r| (r.epsilon, r.error)).collect());
    let mut files = vec![csv_path];
    files.extend(write_plots(cfg, "limit_rate", "Dirac vs limit model", "epsilon", "err_linf", &[curve])?);
    Ok(Outcome { report, files })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyReport {
    pub prepared: Vec<ToyBoundRow>,
    pub unprepared: Vec<ToyBoundRow>,
}

impl ToyReport {
    pub fn prepared_ratios(&self) -> Vec<f64> {
        successive_ratios(&self.prepared)
    }

    pub fn unprepared_ratios(&self) -> Vec<f64> {
        successive_ratios(&self.unprepared)
    }
}

/// Derivative estimates of the toy model with prepared and unprepared data.
/// Writes `toy_check.csv`.
pub fn toy_check(cfg: &ExperimentConfig) -> Result<Outcome<ToyReport>> {
    cfg.validate(Operation::ToyCheck)?;
    let t = &cfg.toy_check;
    let prob = ToyProblem::new(t.coefficient.clone(), cfg.toy_u0(), t.epsilons[0], t.p)?;
    let report = ToyReport {
        prepared: toy_derivative_bound(&prob, true, &t.epsilons)?,
        unprepared: toy_derivative_bound(&prob, false, &t.epsilons)?,
    };
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("toy_check.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::Serialization(e.to_string()))?;
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(["data", "epsilon", "estimate"]).map_err(ser)?;
    for (name, rows) in [("prepared", &report.prepared), ("unprepared", &report.unprepared)] {
        for r in rows {
            w.write_record([name.to_string(), format!("{:e}", r.epsilon), format!("{:e}", r.estimate)]).map_err(ser)?;
        }
    }
    w.flush()?;
    let curves: Vec<Curve> = [("prepared", &report.prepared), ("unprepared", &report.unprepared)]
        .into_iter()
        .map(|(name, rows)| Curve::new(name, rows.iter().map(|r| (r.epsilon, r.estimate)).collect()))
        .collect();
    let mut files = vec![csv_path];
    files.extend(write_plots(cfg, "toy_check", "Toy model dt^p u(0)", "epsilon", "estimate", &curves)?);
    Ok(Outcome { report, files })
}

#[derive(Debug, Parser)]
#[command(name = "ua-dirac", version, about = "Uniformly accurate two-scale solvers for the nonlinear Dirac equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Preset problem: I, II, III or custom.
    #[arg(long, global = true)]
    pub example: Option<Preset>,
    /// Time integrator: ua1 or ua2.
    #[arg(long, global = true)]
    pub scheme: Option<crate::steppers::Scheme>,
    /// Preparation order of the initial data (0..=5).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(0..=5))]
    pub order: Option<u32>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    /// UA2 prediction variant: halfstep or printed.
    #[arg(long = "ua2-prediction", global = true)]
    pub ua2_prediction: Option<crate::steppers::PredictionVariant>,
    /// Definition of g1 in the order-4/5 data: printed or dx.
    #[arg(long, global = true)]
    pub g1: Option<crate::initdata::G1Variant>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// One propagation at the first epsilon and dt.
    Run,
    /// Cross product of epsilons and time steps.
    SweepTime,
    /// Spectral accuracy in x and tau.
    SweepSpace,
    /// Convergence to the limit model as epsilon decreases.
    LimitRate,
    /// Toy-model derivative bounds.
    ToyCheck,
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            example: self.example,
            scheme: self.scheme,
            order: self.order,
            out: self.out.clone(),
            svg: self.svg,
            ua2_prediction: self.ua2_prediction,
            g1: self.g1,
        }
    }

    pub fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&self.overrides());
        Ok(cfg)
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_PARTIAL: u8 = 2;

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn execute_inner(cli: &Cli) -> Result<u8> {
    let cfg = cli.config()?;
    if let Some(t) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            warn!("could not size the worker pool: {e}");
        }
    }
    match cli.command {
        Command::Run | Command::SweepTime => {
            let out = if cli.command == Command::Run { run(&cfg)? } else { sweep_time(&cfg)? };
            let r = &out.report;
            for row in &r.rows {
                println!(
                    "{} order={} eps={:e} dt={:e}: err_linf={:e} err_l2={:e} mass_drift={:e}",
                    row.scheme, row.init_order, row.epsilon, row.dt, row.err_linf, row.err_l2, row.mass_drift
                );
            }
            if cli.command == Command::SweepTime {
                for (e, o) in r.orders_per_epsilon() {
                    match o {
                        Ok(o) => println!("eps={e:e}: observed order {o:.3}"),
                        Err(err) => println!("eps={e:e}: no order ({err})"),
                    }
                }
                if let Ok(o) = r.uniform_order() {
                    println!("uniform observed order {o:.3}");
                }
            }
            for f in &r.failures {
                println!("FAILED eps={:e} dt={:e}: {}", f.epsilon, f.dt, f.message);
            }
            print_files(&out.files);
            Ok(if r.failures.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
        }
        Command::SweepSpace => {
            let out = sweep_space(&cfg)?;
            for row in &out.report.rows {
                println!("N={} Ntau={}: err_linf={:e}", row.n, row.n_tau, row.err_linf);
            }
            for f in &out.report.failures {
                println!("FAILED {:?}={}: {}", f.axis, f.value, f.message);
            }
            print_files(&out.files);
            Ok(if out.report.failures.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
        }
        Command::LimitRate => {
            let out = limit_rate(&cfg)?;
            for row in &out.report.rows {
                println!("eps={:e}: err_linf={:e}", row.epsilon, row.error);
            }
            println!("log-log slope {:.3}", out.report.slope);
            print_files(&out.files);
            Ok(EXIT_OK)
        }
        Command::ToyCheck => {
            let out = toy_check(&cfg)?;
            let fmt = |v: Vec<f64>| v.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(" ");
            println!("prepared ratios:   {}", fmt(out.report.prepared_ratios()));
            println!("unprepared ratios: {}", fmt(out.report.unprepared_ratios()));
            print_files(&out.files);
            Ok(EXIT_OK)
        }
    }
}

/// Runs a parsed command line and maps the outcome to the process exit code:
/// 0 on success, 2 when some sweep points failed, 1 on configuration or
/// other fatal errors.
pub fn execute(cli: &Cli) -> ExitCode {
    match execute_inner(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
