//! Command-line front end and the benchmark scenarios it reproduces.
//!
//! Exit codes of `synth`: 0 feasible, 2 infeasible, 3 marginal, 4 precondition failure
//! (rank-deficient data, missing rank-one factor, inconsistent data, wrong disturbance
//! model), 5 numerical failure, 1 any other error. With `--method all` the largest code
//! over the methods is returned.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::consistency::{Domain, DisturbanceModel, ExperimentData};
use crate::error::{Error, Result};
use crate::linalg::{self, from_rows, to_rows, Mat};
use crate::regions::{
    boundary_points, classify_rank_one, inner_approx_wedge, make_region, rank_one_factor, RegionIntersection,
};
use crate::sim::{closed_loop_response, laplacian_system, run_experiment, tape_transport, LinearSystem};
use crate::solve::SolveStatus;
use crate::synthesis::{synthesize, Method, SynthesisInputs, SynthesisOptions, SynthesisResult};
use crate::verify::{verify_synthesis, VerifyOptions};

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_MARGINAL: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1;

/// Offset between the input seed and the disturbance seed of one experiment.
const DIST_SEED_OFFSET: u64 = 1_000_003;

pub fn status_exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Feasible => EXIT_FEASIBLE,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::Marginal => EXIT_MARGINAL,
        SolveStatus::NumericalFailure => EXIT_NUMERICAL,
    }
}

pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::RankDeficient { .. }
        | Error::NoRankOneFactor(_)
        | Error::InconsistentData { .. }
        | Error::Precondition(_) => EXIT_PRECONDITION,
        Error::Numerical(_) | Error::Solver(_) => EXIT_NUMERICAL,
        _ => EXIT_ERROR,
    }
}

/// Benchmark setup: plant, target, experiment length and the bound grid of its table.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub system: LinearSystem,
    pub target: RegionIntersection,
    /// Target used by the rank-one method when `target` has no rank-one factor.
    pub rank_one_target: Option<RegionIntersection>,
    pub ts: f64,
    pub samples: usize,
    /// Bounds in decreasing order.
    pub grid: Vec<f64>,
    pub default_eps: f64,
}

impl Scenario {
    /// Tape transport, `T = 200` samples at `Ts = 0.1`, wedge `(0.3, 2, π/5.7)`.
    pub fn ct() -> Result<Self> {
        let theta = std::f64::consts::PI / 5.7;
        Ok(Self {
            name: "ct",
            system: tape_transport(),
            target: crate::regions::wedge_regions(0.3, 2.0, theta)?,
            rank_one_target: Some(inner_approx_wedge(0.3, 2.0, theta)?.disks),
            ts: 0.1,
            samples: 200,
            grid: vec![2.5e-4, 1e-4, 2.5e-5, 1e-5, 2.5e-6],
            default_eps: 2.5e-6,
        })
    }

    /// Laplacian network, `T = 200`, disk centered at `0.47` with radius `0.43`.
    pub fn dt() -> Result<Self> {
        Ok(Self {
            name: "dt",
            system: laplacian_system(),
            target: RegionIntersection::single(make_region("disk", &[0.47, 0.43])?),
            rank_one_target: None,
            ts: 1.0,
            samples: 200,
            grid: vec![2.5e-4, 1e-4, 5e-5, 2.5e-5, 1e-5],
            default_eps: 1e-5,
        })
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "ct" => Self::ct(),
            "dt" => Self::dt(),
            other => Err(Error::InvalidParameter(format!("unknown scenario '{other}', expected ct or dt"))),
        }
    }

    /// Experiment `seed`: input seed `seed`, disturbance seed `seed + 1000003`.
    pub fn experiment(&self, seed: u64, eps: f64) -> Result<ExperimentData> {
        run_experiment(&self.system, self.samples, self.ts, seed, seed.wrapping_add(DIST_SEED_OFFSET), eps)
    }

    /// Inputs with the per-sample bound `eps` and the true plant as nominal model.
    pub fn inputs(&self, data: ExperimentData, eps: f64) -> SynthesisInputs {
        SynthesisInputs {
            data,
            model: DisturbanceModel::Instantaneous { eps },
            nominal: Some((self.system.a.clone(), self.system.b.clone())),
        }
    }

    pub fn synthesize(&self, method: Method, inputs: &SynthesisInputs, opts: &SynthesisOptions) -> Result<SynthesisResult> {
        synthesize(method, inputs, &self.target, self.rank_one_target.as_ref(), opts)
    }
}

/// How a sweep obtains the data of each cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// New experiment per bound, with disturbances drawn inside that bound.
    Regenerate,
    /// One experiment per seed with disturbances inside the smallest bound; only the
    /// assumed bound changes between cells.
    Fixed,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub eps: f64,
    pub method: Method,
    pub seed: u64,
    pub status: Option<SolveStatus>,
    pub error: Option<String>,
    pub t: f64,
    pub iterations: usize,
    pub seconds: f64,
}

impl SweepCell {
    pub fn feasible(&self) -> bool {
        self.status == Some(SolveStatus::Feasible)
    }
}

/// Run every (bound, method, seed) cell. Cells are computed in parallel and returned
/// sorted by bound, method and seed.
pub fn run_sweep(
    scenario: &Scenario,
    grid: &[f64],
    methods: &[Method],
    seeds: &[u64],
    mode: SweepMode,
    opts: &SynthesisOptions,
) -> Result<Vec<SweepCell>> {
    let data_eps = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let jobs: Vec<(u64, f64)> = seeds.iter().flat_map(|&s| grid.iter().map(move |&e| (s, e))).collect();
    let cells: Vec<Vec<SweepCell>> = jobs
        .par_iter()
        .map(|&(seed, eps)| -> Result<Vec<SweepCell>> {
            let data = scenario.experiment(seed, if mode == SweepMode::Fixed { data_eps } else { eps })?;
            let inputs = scenario.inputs(data, eps);
            Ok(methods
                .iter()
                .map(|&method| match scenario.synthesize(method, &inputs, opts) {
                    Ok(r) => SweepCell {
                        eps,
                        method,
                        seed,
                        status: Some(r.status()),
                        error: None,
                        t: r.outcome.t,
                        iterations: r.outcome.iterations,
                        seconds: r.solve_seconds,
                    },
                    Err(e) => SweepCell {
                        eps,
                        method,
                        seed,
                        status: None,
                        error: Some(e.to_string()),
                        t: f64::NAN,
                        iterations: 0,
                        seconds: 0.0,
                    },
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut cells: Vec<SweepCell> = cells.into_iter().flatten().collect();
    let order = |m: Method| Method::ALL.iter().position(|&x| x == m).unwrap_or(usize::MAX);
    cells.sort_by(|a, b| {
        a.eps
            .total_cmp(&b.eps)
            .then(order(a.method).cmp(&order(b.method)))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(cells)
}

/// `eps,method,seed,status,t,iterations,seconds`
pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("eps,method,seed,status,t,iterations,seconds\n");
    for c in cells {
        let status = match (&c.status, &c.error) {
            (Some(s), _) => serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            (None, _) => "error".to_string(),
        };
        let _ = writeln!(out, "{:e},{},{},{},{:e},{},{:.4}", c.eps, c.method, c.seed, status, c.t, c.iterations, c.seconds);
    }
    out
}

/// Table with one row per bound (decreasing) and `✓`/`x` by majority over seeds.
pub fn sweep_table(cells: &[SweepCell], methods: &[Method]) -> String {
    let mut eps: Vec<f64> = cells.iter().map(|c| c.eps).collect();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let mut out = format!("{:>10}", "eps");
    for m in methods {
        let _ = write!(out, " {:>15}", m.as_str());
    }
    out.push('\n');
    for e in eps {
        let _ = write!(out, "{e:>10.1e}");
        for &m in methods {
            let sel: Vec<&SweepCell> = cells.iter().filter(|c| c.eps == e && c.method == m).collect();
            let ok = sel.iter().filter(|c| c.feasible()).count();
            let mark = if 2 * ok > sel.len() { "✓" } else { "x" };
            let secs = sel.iter().map(|c| c.seconds).sum::<f64>() / sel.len().max(1) as f64;
            let _ = write!(out, " {:>15}", format!("{mark} {ok}/{} {secs:.2}s", sel.len()));
        }
        out.push('\n');
    }
    out
}

/// Largest bound in `grid` at which `feasible` holds; `None` if it holds nowhere.
pub fn eps_max(grid: &[f64], feasible: impl Fn(f64) -> bool) -> Option<f64> {
    grid.iter().copied().filter(|&e| feasible(e)).fold(None, |acc, e| Some(acc.map_or(e, |a: f64| a.max(e))))
}

#[derive(Serialize, Deserialize)]
struct SystemFile {
    domain: Domain,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(default)]
    label: Option<String>,
}

/// `tape`, `laplacian`, or a JSON file `{"domain", "A", "B"}`.
pub fn load_system(spec: &str) -> Result<LinearSystem> {
    match spec {
        "tape" | "ct" => Ok(tape_transport()),
        "laplacian" | "dt" => Ok(laplacian_system()),
        path => {
            let f: SystemFile = serde_json::from_str(&crate::error::read_text(path.as_ref())?)?;
            let a = from_rows(&f.a, 0)?;
            let b = from_rows(&f.b, 0)?;
            LinearSystem::new(a, b, f.domain, f.label.unwrap_or_else(|| path.to_string()))
        }
    }
}

/// A number is a per-sample bound for the instantaneous model; anything else is a JSON file.
pub fn load_disturbance(spec: &str) -> Result<DisturbanceModel> {
    match spec.trim().parse::<f64>() {
        Ok(eps) if eps >= 0.0 && eps.is_finite() => Ok(DisturbanceModel::Instantaneous { eps }),
        Ok(_) => Err(Error::InvalidParameter(format!("disturbance bound {spec} must be >= 0"))),
        Err(_) => DisturbanceModel::from_json(&crate::error::read_text(spec.as_ref())?),
    }
}

/// Target from a preset or a JSON file, plus the wedge parameters when it is a single wedge preset.
pub fn load_target(spec: &str) -> Result<(RegionIntersection, Option<[f64; 3]>)> {
    if Path::new(spec).is_file() {
        return Ok((RegionIntersection::from_json(&crate::error::read_text(spec.as_ref())?)?, None));
    }
    let target = RegionIntersection::from_preset(spec)?;
    let wedge = spec.trim().strip_prefix("wedge:").and_then(|p| {
        let v: Vec<f64> = p.split(',').filter_map(|x| x.trim().parse().ok()).collect();
        <[f64; 3]>::try_from(v).ok()
    });
    Ok((target, wedge))
}

fn parse_methods(text: &str) -> Result<Vec<Method>> {
    if text == "all" {
        return Ok(Method::ALL.to_vec());
    }
    text.split(',').map(|m| m.trim().parse::<Method>()).collect()
}

fn mat_json(m: &Mat) -> Value {
    json!(to_rows(m))
}

#[derive(Parser, Debug)]
#[command(name = "ddlmi", version, about = "Data-driven state feedback with eigenvalues in LMI regions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesize a gain from experiment data.
    Synth(SynthArgs),
    /// Feasibility table over disturbance bounds for a benchmark.
    Sweep(SweepArgs),
    /// Simulate, synthesize with every method, verify and write plot data.
    Demo(DemoArgs),
    /// Inspect a target region.
    Region {
        #[command(subcommand)]
        command: RegionCommand,
    },
    /// Generate experiment data from a system.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Experiment JSON.
    #[arg(long)]
    pub data: PathBuf,
    /// Per-sample bound (a number) or disturbance-model JSON file.
    #[arg(long)]
    pub disturbance: String,
    /// Region preset such as `wedge:0.3,2,0.5512` or `disk:-1,1+hurwitz`, or a JSON file.
    #[arg(long)]
    pub region: String,
    /// `model`, `petersen`, `rank1`, `sproc-energy`, `sproc-instant`, a comma list, or `all`.
    #[arg(long, default_value = "all")]
    pub method: String,
    /// Let the rank-one method use the two-disk inner approximation of a wedge target.
    #[arg(long)]
    pub inner_approx: bool,
    /// Known system JSON for the model-based method (default: ellipsoid center).
    #[arg(long)]
    pub system: Option<String>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Strictness margin of the LMIs.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Number of sampled consistent systems used to verify each feasible gain.
    #[arg(long, default_value_t = 0)]
    pub verify: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// `ct` (tape transport, wedge) or `dt` (Laplacian, disk).
    pub scenario: String,
    /// Comma-separated bounds (default: the scenario grid).
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Methods as for `synth --method` (default: the four data-driven ones).
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// First seed; seeds are consecutive.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SweepMode::Regenerate)]
    pub mode: SweepMode,
    /// Per-cell CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    /// `ct` or `dt`.
    pub scenario: String,
    #[arg(long, default_value = "demo_out")]
    pub out_dir: PathBuf,
    /// Bound (default: the scenario's feasible bound).
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Verification samples per method.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Subcommand, Debug)]
pub enum RegionCommand {
    /// Matrices, rank-one factor and shape of each region.
    Info { region: String },
    /// Boundary points as CSV `re,im,margin`.
    Boundary {
        region: String,
        #[arg(long, default_value_t = 360)]
        rays: usize,
    },
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// `tape`, `laplacian` or a system JSON file.
    #[arg(long)]
    pub system: String,
    #[arg(long = "samples", default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.1)]
    pub ts: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse arguments, run, print errors, and return the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_FEASIBLE };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Demo(a) => cmd_demo(&a),
        Command::Region { command } => cmd_region(&command),
        Command::Simulate(a) => cmd_simulate(&a),
    }
}

/// Write to stdout, treating a closed pipe as success.
fn print_out(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print_out(&format!("{text}\n"))?,
    }
    Ok(())
}

fn synth_options(margin: Option<f64>) -> SynthesisOptions {
    let mut opts = SynthesisOptions::default();
    if let Some(m) = margin {
        opts.scalarize.margin = Some(m);
    }
    opts
}

/// Result record of one method: the synthesis report plus target and optional verification.
pub fn synth_record(
    method: Method,
    inputs: &SynthesisInputs,
    target: &RegionIntersection,
    rank_one_target: Option<&RegionIntersection>,
    opts: &SynthesisOptions,
    verify: Option<&VerifyOptions>,
) -> (Value, i32) {
    let run = || -> Result<(Value, i32)> {
        let r = synthesize(method, inputs, target, rank_one_target, opts)?;
        let (a, b) = inputs.nominal_system()?;
        let mut rec = serde_json::to_value(r.report(&a, &b, target)?)?;
        rec["target"] = json!(target.label());
        // closed-loop eigenvalues and margins are evaluated at this (A, B)
        rec["nominal"] = json!(if inputs.nominal.is_some() { "system" } else { "center" });
        if method == Method::RankOne {
            if let Some(r1) = rank_one_target {
                rec["rank_one_target"] = json!(r1.label());
            }
        }
        if let (Some(vopts), true) = (verify, r.is_feasible()) {
            match verify_synthesis(&r, inputs, target, vopts) {
                Ok(v) => rec["verification"] = serde_json::to_value(v)?,
                Err(e) => rec["verification_error"] = json!(e.to_string()),
            }
        }
        Ok((rec, status_exit_code(r.status())))
    };
    match run() {
        Ok(x) => x,
        Err(e) => {
            let code = error_exit_code(&e);
            let status = if code == EXIT_PRECONDITION { "precondition_error" } else { "error" };
            (json!({ "method": method, "status": status, "error": e.to_string() }), code)
        }
    }
}

pub fn cmd_synth(a: &SynthArgs) -> Result<i32> {
    let data = ExperimentData::load(&a.data)?;
    let model = load_disturbance(&a.disturbance)?;
    let (target, wedge) = load_target(&a.region)?;
    let methods = parse_methods(&a.method)?;
    let nominal = match &a.system {
        Some(s) => {
            let sys = load_system(s)?;
            Some((sys.a, sys.b))
        }
        None => None,
    };
    let inputs = SynthesisInputs { data, model, nominal };
    let rank_one_target = match (a.inner_approx, wedge) {
        (false, _) => None,
        (true, Some([ell, rho, theta])) => Some(inner_approx_wedge(ell, rho, theta)?.disks),
        (true, None) => {
            return Err(Error::Precondition("--inner-approx needs a single wedge:l,r,theta preset".into()))
        }
    };
    let opts = synth_options(a.margin);
    let vopts = (a.verify > 0).then(|| VerifyOptions { n_samples: a.verify, seed: a.seed, ..Default::default() });
    let mut records = Vec::new();
    let mut code = EXIT_FEASIBLE;
    for &m in &methods {
        let (rec, c) = synth_record(m, &inputs, &target, rank_one_target.as_ref(), &opts, vopts.as_ref());
        records.push(rec);
        code = code.max(c);
    }
    let out = if methods.len() == 1 && a.method != "all" {
        records.pop().expect("one record")
    } else {
        Value::Array(records)
    };
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&out)?)?;
    Ok(code)
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let scenario = Scenario::by_name(&a.scenario)?;
    let grid = a.eps.clone().unwrap_or_else(|| scenario.grid.clone());
    let methods = match &a.methods {
        Some(m) => parse_methods(m)?,
        None => Method::DATA_DRIVEN.to_vec(),
    };
    let seeds: Vec<u64> = (0..a.seeds as u64).map(|i| a.seed + i).collect();
    let opts = SynthesisOptions::default();
    let cells = match a.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(|| run_sweep(&scenario, &grid, &methods, &seeds, a.mode, &opts))?,
        None => run_sweep(&scenario, &grid, &methods, &seeds, a.mode, &opts)?,
    };
    if let Some(p) = &a.out {
        std::fs::write(p, sweep_csv(&cells))?;
    }
    print_out(&sweep_table(&cells, &methods))?;
    Ok(EXIT_FEASIBLE)
}

/// Eigenvalue scatter CSV lines `series,re,im`.
fn push_eigs(out: &mut String, series: &str, eig: impl IntoIterator<Item = [f64; 2]>) {
    for [re, im] in eig {
        let _ = writeln!(out, "{series},{re},{im}");
    }
}

pub fn cmd_demo(a: &DemoArgs) -> Result<i32> {
    let scenario = Scenario::by_name(&a.scenario)?;
    let eps = a.eps.unwrap_or(scenario.default_eps);
    std::fs::create_dir_all(&a.out_dir)?;
    let data = scenario.experiment(a.seed, eps)?;
    data.save(a.out_dir.join("experiment.json"))?;
    let inputs = scenario.inputs(data, eps);
    let opts = SynthesisOptions::default();
    let vopts = VerifyOptions { n_samples: a.samples, seed: a.seed, ..Default::default() };

    let mut scatter = String::from("series,re,im\n");
    push_eigs(&mut scatter, "open_loop", linalg::eigenvalues(&scenario.system.a).iter().map(|z| [z.re, z.im]));
    for z in boundary_points(&scenario.target, 720)? {
        let _ = writeln!(scatter, "boundary,{},{}", z.re, z.im);
    }
    if let Some(r1) = &scenario.rank_one_target {
        for z in boundary_points(r1, 720)? {
            let _ = writeln!(scatter, "boundary_inner,{},{}", z.re, z.im);
        }
    }
    let x0 = DVector::from_element(scenario.system.n(), 1.0);
    let horizon = match scenario.system.domain {
        Domain::ContinuousTime => 20.0,
        Domain::DiscreteTime => 30.0,
    };
    let mut summary = Vec::new();
    for m in Method::ALL {
        let r = match scenario.synthesize(m, &inputs, &opts) {
            Ok(r) => r,
            Err(e) => {
                print_out(&format!("{m:>14}: {e}\n"))?;
                summary.push(json!({ "method": m, "status": "error", "error": e.to_string() }));
                continue;
            }
        };
        let mut rec = serde_json::to_value(r.report(&scenario.system.a, &scenario.system.b, &scenario.target)?)?;
        let mut line = format!("{m:>14}: {:?}", r.status());
        if let Ok(k) = r.gain() {
            let acl = scenario.system.closed_loop(k)?;
            push_eigs(&mut scatter, &format!("closed_loop_{m}"), linalg::eigenvalues(&acl).iter().map(|z| [z.re, z.im]));
            let report = verify_synthesis(&r, &inputs, &scenario.target, &vopts)?;
            for s in &report.samples {
                push_eigs(&mut scatter, &format!("sampled_{m}"), s.eigenvalues.iter().copied());
            }
            let _ = write!(line, ", {}/{} sampled systems in target, min margin {:.3e}", report.n_stable, report.n_samples, report.min_margin);
            rec["verification"] = serde_json::to_value(&report)?;
            let traj = closed_loop_response(&scenario.system, k, &x0, horizon, scenario.ts)?;
            std::fs::write(a.out_dir.join(format!("trajectory_{m}.csv")), traj.to_csv())?;
        }
        print_out(&format!("{line}\n"))?;
        summary.push(rec);
    }
    std::fs::write(a.out_dir.join("eigenvalues.csv"), scatter)?;
    std::fs::write(a.out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    print_out(&format!("wrote {}\n", a.out_dir.display()))?;
    Ok(EXIT_FEASIBLE)
}

/// JSON description of every region in a target.
pub fn region_info(target: &RegionIntersection) -> Result<Value> {
    let regions = target
        .regions()
        .iter()
        .map(|r| -> Result<Value> {
            let factor = rank_one_factor(r);
            let class = match &factor {
                Some(f) if r.s() == 2 => Some(serde_json::to_value(classify_rank_one(r, f)?)?),
                _ => None,
            };
            Ok(json!({
                "label": r.label(),
                "s": r.s(),
                "alpha": mat_json(r.alpha()),
                "beta": mat_json(r.beta()),
                "rank_one": factor.as_ref().map(|f| json!({ "eta": f.eta.as_slice(), "gamma": f.gamma.as_slice() })),
                "class": class,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({ "label": target.label(), "regions": regions }))
}

pub fn cmd_region(c: &RegionCommand) -> Result<i32> {
    match c {
        RegionCommand::Info { region } => {
            let (target, _) = load_target(region)?;
            print_out(&format!("{}\n", serde_json::to_string_pretty(&region_info(&target)?)?))?;
        }
        RegionCommand::Boundary { region, rays } => {
            let (target, _) = load_target(region)?;
            let mut out = String::from("re,im,margin\n");
            for z in boundary_points(&target, *rays)? {
                let _ = writeln!(out, "{},{},{:e}", z.re, z.im, target.margin(z));
            }
            print_out(&out)?;
        }
    }
    Ok(EXIT_FEASIBLE)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let sys = load_system(&a.system)?;
    let data = run_experiment(&sys, a.samples, a.ts, a.seed, a.seed.wrapping_add(DIST_SEED_OFFSET), a.eps)?;
    emit(a.out.as_deref(), &data.to_json())?;
    Ok(EXIT_FEASIBLE)
}
