use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use safeopt_core::benchmarks::{load_preset, DemoFunction, PRESET_NAMES};
use safeopt_core::network::{
    assemble_network, eigenmodes, eigenvalue_map, simulate, write_eigenmap_csv, write_sim_csv, NetworkConfig,
};
use safeopt_core::safe_bo::{
    export, transfer_context, AxisSpec, Campaign, CampaignError, CampaignSetup, Evaluation, ParameterGrid, Plant,
    TransferReport,
};
use serde::Serialize;

use crate::config::{self, Overrides, ResolvedConfig};
use crate::error::CliError;
use crate::output::{Manifest, OutDir};
use crate::plant::{self, BuiltPlant};

const DEFAULT_OUT: &str = "safeopt-out";

fn out_root(cli: Option<&Path>, from_file: Option<&Path>, base_dir: &Path) -> PathBuf {
    match (cli, from_file) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => base_dir.join(p),
        (None, None) => PathBuf::from(DEFAULT_OUT),
    }
}

#[derive(Serialize)]
struct BestPoint {
    iteration: usize,
    point: Vec<f64>,
    objective: f64,
    constraint: f64,
}

impl From<&Evaluation> for BestPoint {
    fn from(e: &Evaluation) -> Self {
        Self { iteration: e.iteration, point: e.point.clone(), objective: e.objective, constraint: e.constraint }
    }
}

#[derive(Serialize)]
struct CampaignSummary {
    status: &'static str,
    error: Option<String>,
    evaluations: usize,
    iterations: usize,
    best: Option<BestPoint>,
    /// Evaluations whose measured constraint exceeded the threshold.
    measured_violations: usize,
    /// Evaluations whose noise-free constraint exceeded the threshold (analytic plants only).
    true_violations: Option<usize>,
    final_safe_set_size: Option<usize>,
    plant: String,
    wall_time_s: f64,
}

fn true_violations(truth: Option<DemoFunction>, history: &[Evaluation], threshold: f64) -> Option<usize> {
    let f = truth?;
    Some(
        history
            .iter()
            .filter(|e| {
                let z = e.context.as_ref().and_then(|c| c.first().copied());
                f.eval(e.point[0], z).map(|(_, c)| c > threshold).unwrap_or(false)
            })
            .count(),
    )
}

/// Runs a campaign to completion, dumping the planned surfaces of every
/// iteration. Returns the campaign (if it started) and the first error.
fn drive(
    start: Result<Campaign, (CampaignError, Vec<Evaluation>)>,
    plant: &mut dyn Plant,
    surfaces: &mut impl Write,
) -> Result<(Campaign, Option<CampaignError>), (CampaignError, Vec<Evaluation>)> {
    let mut campaign = start?;
    while !campaign.is_finished() {
        let selected = match campaign.plan() {
            Ok(i) => i,
            Err(e) => return Ok((campaign, Some(e))),
        };
        if let Err(e) = export::write_surface_jsonl(&mut *surfaces, campaign.state()) {
            return Ok((campaign, Some(CampaignError::Input(format!("surface dump failed: {e}")))));
        }
        match campaign.commit(plant, selected) {
            Ok(report) => info!(
                "iteration {}: grid point {} -> O = {}, C = {} (safe set {})",
                report.iteration,
                report.selected,
                report.measurement.objective,
                report.measurement.constraint,
                report.safe_set_size
            ),
            Err(e) => return Ok((campaign, Some(e))),
        }
    }
    Ok((campaign, None))
}

fn setup_for(cfg: &ResolvedConfig, grid: ParameterGrid) -> CampaignSetup {
    CampaignSetup {
        grid,
        objective_spec: cfg.objective.clone(),
        constraint_spec: cfg.constraint.clone(),
        config: cfg.algorithm.clone(),
        init_points: cfg.initializers.clone(),
        prior: cfg.prior,
    }
}

fn finish_error(error: Option<CampaignError>) -> Result<(), CliError> {
    match error {
        None => Ok(()),
        Some(e) => Err(e.into()),
    }
}

pub fn optimize(config_path: &Path, out: Option<&Path>, ov: &Overrides) -> Result<(), CliError> {
    let (raw, dir) = config::load(config_path)?;
    let cfg = config::resolve(&raw, &dir, ov)?;
    let grid = cfg.grid()?;
    let BuiltPlant { mut plant, truth } = plant::build(&cfg)?;
    let out = OutDir::create(&out_root(out, raw.out.as_deref(), &dir))?;
    info!("optimize: {} on {} grid points, seed {}", plant.description(), grid.len(), cfg.seed);

    let clock = Instant::now();
    let mut surfaces = BufWriter::new(File::create(out.path("surfaces.jsonl"))?);
    let start = Campaign::initialize(&mut *plant, setup_for(&cfg, grid)).map_err(|a| (a.error, a.history));
    let (history, best, safe_size, error) = match drive(start, &mut *plant, &mut surfaces) {
        Ok((campaign, error)) => {
            let size = campaign.state().safe_set_size();
            let outcome = campaign.finish();
            (outcome.history, outcome.best, Some(size), error)
        }
        Err((error, history)) => (history, None, None, Some(error)),
    };
    surfaces.flush()?;

    out.write_with("history.csv", |w| export::write_history_csv(w, &history))?;
    let threshold = cfg.algorithm.safety_threshold;
    let summary = CampaignSummary {
        status: if error.is_none() { "completed" } else { "aborted" },
        error: error.as_ref().map(ToString::to_string),
        evaluations: history.len(),
        iterations: history.iter().filter(|e| !e.was_initializer).count(),
        best: best.as_ref().map(BestPoint::from),
        measured_violations: history.iter().filter(|e| e.constraint > threshold).count(),
        true_violations: true_violations(truth, &history, threshold),
        final_safe_set_size: safe_size,
        plant: plant.description(),
        wall_time_s: clock.elapsed().as_secs_f64(),
    };
    out.write_json("summary.json", &summary)?;
    let mut manifest = Manifest::new("optimize", cfg.seed, &cfg);
    manifest.artifacts = ["history.csv", "surfaces.jsonl", "summary.json"].map(String::from).to_vec();
    out.write_json("manifest.json", &manifest)?;
    match &summary.best {
        Some(b) => println!("best point {:?}: objective {}, constraint {}", b.point, b.objective, b.constraint),
        None => println!("no feasible evaluation"),
    }
    finish_error(error)
}

#[derive(Serialize)]
struct StageSummary {
    context: Vec<f64>,
    evaluations: usize,
    best: Option<BestPoint>,
    measured_violations: usize,
    transfer: Option<TransferReport>,
}

pub fn context_chain(config_path: &Path, out: Option<&Path>, ov: &Overrides) -> Result<(), CliError> {
    let (raw, dir) = config::load(config_path)?;
    let cfg = config::resolve(&raw, &dir, ov)?;
    if cfg.stages.len() < 2 {
        return Err(CliError::Config("context-chain needs at least two [[stages]]".into()));
    }
    if cfg.initializers.is_empty() {
        return Err(CliError::Config("the first stage needs initializer points".into()));
    }
    let base_grid = ParameterGrid::uniform(&cfg.axes)?;
    let BuiltPlant { mut plant, .. } = plant::build(&cfg)?;
    let out = OutDir::create(&out_root(out, raw.out.as_deref(), &dir))?;
    let threshold = cfg.algorithm.safety_threshold;

    let mut all: Vec<Evaluation> = Vec::new();
    let mut specs = (cfg.objective.clone(), cfg.constraint.clone());
    let mut stages = Vec::new();
    let mut artifacts = Vec::new();
    let mut error = None;
    for (k, stage) in cfg.stages.iter().enumerate() {
        let mut algo = cfg.algorithm.clone();
        algo.max_iterations = stage.iterations;
        if algo.algorithm != safeopt_core::safe_bo::Algorithm::SafeOpt && algo.switch_iteration >= algo.max_iterations {
            algo.switch_iteration = algo.max_iterations / 2;
        }
        let name = format!("stage{}", k + 1);
        info!("{name}: context {:?}, {} iterations", stage.context, stage.iterations);
        let mut surfaces = BufWriter::new(File::create(out.path(&format!("{name}_surfaces.jsonl")))?);
        let (start, transfer) = if k == 0 {
            let mut setup = setup_for(&cfg, base_grid.clone().with_context(Some(stage.context.clone())));
            setup.config = algo;
            (Campaign::initialize(&mut *plant, setup).map_err(|a| (a.error, a.history)), None)
        } else {
            match transfer_context(&all, &stage.context, &base_grid, &specs.0, &specs.1, &algo) {
                Ok((c, report)) => (Ok(c), Some(report)),
                Err(e) => (Err((e, Vec::new())), None),
            }
        };
        let (history, best, stage_error) = match drive(start, &mut *plant, &mut surfaces) {
            Ok((campaign, e)) => {
                if k == 0 {
                    // later stages reuse the prior means the first stage settled on
                    specs = (campaign.state().objective_model.spec().clone(), campaign.state().constraint_model.spec().clone());
                }
                let o = campaign.finish();
                (o.history, o.best, e)
            }
            Err((e, h)) => (h, None, Some(e)),
        };
        surfaces.flush()?;
        let file = format!("{name}_history.csv");
        out.write_with(&file, |w| export::write_history_csv(w, &history))?;
        artifacts.push(file);
        artifacts.push(format!("{name}_surfaces.jsonl"));
        stages.push(StageSummary {
            context: stage.context.clone(),
            evaluations: history.len(),
            best: best.as_ref().map(BestPoint::from),
            measured_violations: history.iter().filter(|e| e.constraint > threshold).count(),
            transfer,
        });
        all.extend(history);
        if stage_error.is_some() {
            error = stage_error;
            break;
        }
    }
    let reports: Vec<&TransferReport> = stages.iter().filter_map(|s| s.transfer.as_ref()).collect();
    out.write_json("transfer_report.json", &reports)?;
    out.write_json("summary.json", &stages)?;
    let mut manifest = Manifest::new("context-chain", cfg.seed, &cfg);
    artifacts.extend(["transfer_report.json", "summary.json"].map(String::from));
    manifest.artifacts = artifacts;
    out.write_json("manifest.json", &manifest)?;
    for (k, s) in stages.iter().enumerate() {
        let factor = s.transfer.as_ref().and_then(|t| t.entries.last()).map(|e| e.objective_factor);
        println!(
            "stage {} at {:?}: {} evaluations, best {:?}{}",
            k + 1,
            s.context,
            s.evaluations,
            s.best.as_ref().map(|b| b.objective),
            factor.map(|f| format!(", transfer factor {f:.4}")).unwrap_or_default()
        );
    }
    finish_error(error)
}

/// Parses `lower:upper:count`.
pub fn parse_range(text: &str) -> Result<AxisSpec, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Config(format!("range `{text}` must be lower:upper:count"));
    let [lo, hi, count] = parts[..] else { return Err(bad()) };
    Ok(AxisSpec::new(
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
        count.trim().parse().map_err(|_| bad())?,
    ))
}

fn range_values(axis: AxisSpec) -> Result<Vec<f64>, CliError> {
    if axis.count == 0 {
        return Err(CliError::Config("range is empty".into()));
    }
    Ok(ParameterGrid::uniform(&[axis])?.axes()[0].clone())
}

fn load_network(path: Option<&Path>) -> Result<NetworkConfig, CliError> {
    match path {
        Some(p) => NetworkConfig::load(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
        None => Ok(NetworkConfig::shipped()),
    }
}

#[derive(Serialize)]
struct EigmapRun<'a> {
    network: &'a NetworkConfig,
    n: AxisSpec,
    tau_ms: AxisSpec,
    modes: usize,
}

pub fn eigmap(network: Option<&Path>, n: &str, tau_ms: &str, modes: usize, out: Option<&Path>) -> Result<(), CliError> {
    let config = load_network(network)?;
    let (n_axis, tau_axis) = (parse_range(n)?, parse_range(tau_ms)?);
    let ns = range_values(n_axis)?;
    let taus: Vec<f64> = range_values(tau_axis)?.iter().map(|t| t * 1e-3).collect();
    if modes == 0 {
        return Err(CliError::Config("--modes must be at least 1".into()));
    }
    let model = assemble_network(&config)?;
    let out = OutDir::create(out.unwrap_or(Path::new(DEFAULT_OUT)))?;
    info!("eigmap: {} × {} points, state dimension {}", ns.len(), taus.len(), model.state_dim());
    let map = eigenvalue_map(&model, &ns, &taus, modes)?;
    out.write_with("eigmap.csv", |w| write_eigenmap_csv(w, &map))?;
    let stable = map.iter().filter(|e| e.is_stable()).count();
    let best = map.iter().min_by(|a, b| a.max_growth().total_cmp(&b.max_growth()));
    out.write_json(
        "summary.json",
        &serde_json::json!({
            "points": map.len(),
            "stable_points": stable,
            "most_stable": best.map(|e| serde_json::json!({"n": e.n, "tau_ms": e.tau * 1e3, "growth_rate": e.max_growth()})),
        }),
    )?;
    let run = EigmapRun { network: &config, n: n_axis, tau_ms: tau_axis, modes };
    let mut manifest = Manifest::new("eigmap", 0, &run);
    manifest.artifacts = vec!["eigmap.csv".into(), "summary.json".into()];
    out.write_json("manifest.json", &manifest)?;
    println!("{stable}/{} points fully stable", map.len());
    if let Some(b) = best {
        println!("most stable: n = {}, τ = {} ms, growth {:.3} 1/s", b.n, b.tau * 1e3, b.max_growth());
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateRun<'a> {
    network: &'a NetworkConfig,
    n: f64,
    tau_ms: f64,
    duration: f64,
    linear: bool,
}

pub struct SimulateArgs<'a> {
    pub network: Option<&'a Path>,
    pub n: f64,
    pub tau_ms: f64,
    pub duration: Option<f64>,
    pub seed: u64,
    pub linear: bool,
    pub out: Option<&'a Path>,
}

pub fn simulate_cmd(args: SimulateArgs<'_>) -> Result<(), CliError> {
    let config = load_network(args.network)?;
    if !(args.tau_ms >= 0.0 && args.n.is_finite()) {
        return Err(CliError::Config(format!("invalid controller n = {}, τ = {} ms", args.n, args.tau_ms)));
    }
    let model = assemble_network(&config.clone().with_linear(args.linear))?.with_controller(args.n, args.tau_ms * 1e-3)?;
    let duration = args.duration.unwrap_or(model.duration);
    let out = OutDir::create(args.out.unwrap_or(Path::new(DEFAULT_OUT)))?;
    let result = simulate(&model, duration, args.seed).map_err(|e| CliError::Plant(e.to_string()))?;
    for note in &model.adjustments {
        warn!("{note}");
    }
    out.write_with("sim.csv", |w| write_sim_csv(w, &result))?;
    let dominant = eigenmodes(&model)?.first().copied();
    out.write_json(
        "summary.json",
        &serde_json::json!({
            "rms_pressure": result.rms_pressure,
            "rms_voltage": result.rms_voltage,
            "fs": result.fs,
            "duration": result.duration,
            "dominant_mode": dominant.map(|m| serde_json::json!({"frequency": m.frequency, "growth_rate": m.growth_rate})),
        }),
    )?;
    let run = SimulateRun { network: &config, n: args.n, tau_ms: args.tau_ms, duration, linear: args.linear };
    let mut manifest = Manifest::new("simulate", args.seed, &run);
    manifest.artifacts = vec!["sim.csv".into(), "summary.json".into()];
    out.write_json("manifest.json", &manifest)?;
    println!("rms pressure {:.3} Pa, rms voltage {:.4} V", result.rms_pressure, result.rms_voltage);
    Ok(())
}

pub fn presets(json: bool) -> Result<(), CliError> {
    let all = PRESET_NAMES.iter().map(|n| load_preset(n)).collect::<Result<Vec<_>, _>>()?;
    if json {
        println!("{}", serde_json::to_string_pretty(&all).map_err(|e| CliError::Output(e.to_string()))?);
        return Ok(());
    }
    for p in &all {
        let axes: Vec<String> = p
            .axis_names
            .iter()
            .zip(&p.axes)
            .map(|(name, a)| format!("{name} ∈ [{}, {}] × {}", a.lower, a.upper, a.count))
            .collect();
        println!("{:<13} T = {:<5} {}  ({})", p.name, p.safety_threshold, axes.join(", "), p.description);
    }
    Ok(())
}
