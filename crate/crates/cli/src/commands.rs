//! The four `chiplace` commands as plain functions.
//!
//! Each command prints its human-readable summary to stdout and writes any
//! artifacts into the chosen output directory. Artifact bytes depend only
//! on inputs and the seed; wall-clock timings go to stdout, never to files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use chiplace_core::stage1::run_stage_one;
use chiplace_core::stage2::run_stage_two;
use chiplace_core::netlist::hpwl;
use chiplace_core::surrogate::{train_with, Sample, SampleStore, SurrogateError};
use chiplace_core::thermal::{power_map, solve_steady_state};
use chiplace_core::{
    route_wirelength, AnnealConfig, Placement, RunReport, StageOneConfig, SurrogateConfig,
    ThermalConfig,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::io::{parse_spec, PlacementFile, SystemSpec};
use crate::CliError;

/// How much of the pipeline `place` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageSelection {
    /// Compact floorplanning only.
    One,
    /// Both stages (stage two cannot start without stage one's output).
    Two,
    /// Both stages; the default.
    Full,
}

/// Flags of the `place` command; `None` means "use the spec file's override
/// or the built-in default".
#[derive(Debug, Clone)]
pub struct PlaceFlags {
    pub seed: u64,
    pub stage: StageSelection,
    pub budget: Option<u64>,
    pub decay: Option<f64>,
    pub granularity: Option<f64>,
    pub resolution: Option<usize>,
    pub out_dir: PathBuf,
    pub emit_samples: bool,
}

impl Default for PlaceFlags {
    fn default() -> Self {
        PlaceFlags {
            seed: 1,
            stage: StageSelection::Full,
            budget: None,
            decay: None,
            granularity: None,
            resolution: None,
            out_dir: PathBuf::from("."),
            emit_samples: false,
        }
    }
}

/// What `place` produced, for callers that want more than the exit code.
#[derive(Debug, Clone)]
pub struct PlaceSummary {
    pub placement_path: PathBuf,
    pub report: Option<RunReport>,
}

/// Resolve the effective configs: built-in defaults, then spec-file
/// overrides, then command-line flags.
pub fn effective_configs(spec: &SystemSpec, flags: &PlaceFlags) -> (ThermalConfig, AnnealConfig) {
    let mut thermal = spec.thermal.apply(ThermalConfig::default());
    if let Some(resolution) = flags.resolution {
        thermal.grid_resolution = resolution;
    }
    let mut anneal = spec.anneal.apply(AnnealConfig::default());
    if spec.anneal.inner_iterations.is_none() {
        // Convention: one inner iteration per mm of interposer edge.
        anneal.inner_iterations = (spec.interposer_size.round() as usize).max(1);
    }
    if let Some(budget) = flags.budget {
        anneal.oracle_budget = budget;
    }
    if let Some(decay) = flags.decay {
        anneal.decay = decay;
    }
    if let Some(granularity) = flags.granularity {
        anneal.granularity = granularity;
    }
    (thermal, anneal)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)?;
    Ok(())
}

fn emit_thermal_artifacts(
    placement: &Placement,
    thermal: &ThermalConfig,
    out_dir: &Path,
) -> Result<f64, CliError> {
    let power = power_map(placement, thermal.grid_resolution);
    let map = solve_steady_state(&power, thermal)
        .map_err(|e| CliError::NonConvergence(e.to_string()))?;
    write_file(&out_dir.join("thermal.csv"), map.to_csv().as_bytes())?;
    write_file(&out_dir.join("thermal.pgm"), &map.to_pgm())?;
    Ok(map.max_temperature())
}

/// Run the placement pipeline on a system description.
pub fn cmd_place(spec_path: &Path, flags: &PlaceFlags) -> Result<PlaceSummary, CliError> {
    let spec = parse_spec(spec_path)?;
    let (thermal, anneal) = effective_configs(&spec, flags);
    let chiplets = spec.chiplets();
    let nets = spec.nets();
    let names: Vec<String> = spec.chiplets.iter().map(|c| c.name.clone()).collect();

    std::fs::create_dir_all(&flags.out_dir)?;

    let stage_one_started = Instant::now();
    let (compact, stage_one_report) =
        run_stage_one(&chiplets, &nets, spec.interposer_size, &StageOneConfig::default(), flags.seed)
            .map_err(|e| CliError::Infeasible(e.to_string()))?;
    println!(
        "stage one: wirelength {:?} mm, bounding box {:?} mm^2 ({} packings, {:.2}s)",
        stage_one_report.best.0,
        stage_one_report.best.1,
        stage_one_report.evaluated.len(),
        stage_one_started.elapsed().as_secs_f64()
    );

    let placement_path = flags.out_dir.join("placement.json");
    if flags.stage == StageSelection::One {
        let file = PlacementFile::from_parts(&compact, &names, &nets);
        write_file(&placement_path, file.to_json().as_bytes())?;
        println!("wrote {}", placement_path.display());
        return Ok(PlaceSummary { placement_path, report: None });
    }

    let stage_two_started = Instant::now();
    let outcome =
        run_stage_two(&compact, &nets, &thermal, &SurrogateConfig::default(), &anneal, flags.seed)
            .map_err(|e| CliError::NonConvergence(e.to_string()))?;
    let wall = stage_two_started.elapsed().as_secs_f64();
    let report = outcome.report.clone();
    println!(
        "stage two: {:?} -> {:?} degC, {:?} -> {:?} mm wirelength",
        report.initial_temperature,
        report.final_temperature,
        report.initial_wirelength,
        report.final_wirelength
    );
    println!(
        "stage two: {} oracle calls ({} budget{}), {} levels, {} steps, {:.2}s",
        report.oracle_calls,
        anneal.oracle_budget,
        if report.stopped_by_budget { ", exhausted" } else { "" },
        report.levels_completed,
        report.steps,
        wall
    );

    let file = PlacementFile::from_parts(&outcome.best, &names, &nets);
    write_file(&placement_path, file.to_json().as_bytes())?;
    let report_path = flags.out_dir.join("report.json");
    let mut report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    report_json.push('\n');
    write_file(&report_path, report_json.as_bytes())?;
    let peak = emit_thermal_artifacts(&outcome.best, &thermal, &flags.out_dir)?;
    println!("final map peak {peak:?} degC");
    if flags.emit_samples {
        write_file(&flags.out_dir.join("samples.csv"), outcome.store.to_csv().as_bytes())?;
    }
    println!("wrote {}", placement_path.display());
    println!("wrote {}", report_path.display());

    Ok(PlaceSummary { placement_path, report: Some(report) })
}

/// Solve and report the thermal state of an existing placement file.
pub fn cmd_thermal(
    placement_path: &Path,
    resolution: Option<usize>,
    out_dir: &Path,
) -> Result<f64, CliError> {
    let file = PlacementFile::read(placement_path)?;
    let (placement, _) = file.to_parts()?;
    let mut thermal = ThermalConfig::default();
    if let Some(resolution) = resolution {
        thermal.grid_resolution = resolution;
    }
    std::fs::create_dir_all(out_dir)?;
    let power = power_map(&placement, thermal.grid_resolution);
    let map = solve_steady_state(&power, &thermal)
        .map_err(|e| CliError::NonConvergence(e.to_string()))?;
    write_file(&out_dir.join("thermal.csv"), map.to_csv().as_bytes())?;
    write_file(&out_dir.join("thermal.pgm"), &map.to_pgm())?;
    let (row, col) = map.hottest_cell();
    println!("{:?}", map.max_temperature());
    println!("hottest cell ({row}, {col}) of {0}x{0}", map.resolution());
    Ok(map.max_temperature())
}

/// Print the wirelength metrics of an existing placement file.
pub fn cmd_wirelength(placement_path: &Path) -> Result<(f64, f64), CliError> {
    let file = PlacementFile::read(placement_path)?;
    let (placement, nets) = file.to_parts()?;
    let bound = hpwl(&placement, &nets);
    let routed = route_wirelength(&placement, &nets).total_wirelength;
    println!("hpwl {bound:?} mm");
    println!("routed {routed:?} mm");
    Ok((bound, routed))
}

/// Per-fold and pooled cross-validation results of the global surrogate on
/// an archived sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub fold_rmse: Vec<f64>,
    pub pooled_rmse: f64,
    pub target_range: f64,
}

/// K-fold cross-validate the global surrogate on a sample archive CSV.
pub fn cmd_surrogate_eval(
    samples_path: &Path,
    folds: usize,
    seed: u64,
) -> Result<CrossValidation, CliError> {
    if folds < 2 {
        return Err(CliError::Validation(format!("folds: need at least 2, got {folds}")));
    }
    let text = std::fs::read_to_string(samples_path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", samples_path.display())))?;
    let store = SampleStore::from_csv(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", samples_path.display())))?;
    let n = store.len();
    if n < folds {
        return Err(CliError::Validation(format!(
            "samples: {n} samples cannot fill {folds} folds"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let config = SurrogateConfig::default();
    let (t_min, t_max) = store
        .samples()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.temperature), hi.max(s.temperature))
        });
    let target_range = t_max - t_min;

    println!("fold  train   test        rmse");
    let mut fold_rmse = Vec::with_capacity(folds);
    let mut pooled_sq = 0.0;
    for fold in 0..folds {
        let held_out: Vec<usize> =
            order.iter().copied().skip(fold).step_by(folds).collect();
        let train: Vec<Sample> = order
            .iter()
            .filter(|i| !held_out.contains(i))
            .map(|&i| store.samples()[i].clone())
            .collect();
        let k = config.k_for(train.len());
        let train_seed = fold as u64;
        let model = match train_with(&train, k, train_seed, &config) {
            Ok(m) => m,
            Err(SurrogateError::DegenerateInput { .. }) => train_with(&train, 1, train_seed, &config)
                .map_err(|e| CliError::Validation(format!("samples: {e}")))?,
            Err(e) => return Err(CliError::Validation(format!("samples: {e}"))),
        };
        let mut sq = 0.0;
        for &i in &held_out {
            let s = &store.samples()[i];
            let predicted = model
                .predict(&s.features)
                .map_err(|e| CliError::Validation(format!("samples: {e}")))?;
            sq += (predicted - s.temperature).powi(2);
        }
        pooled_sq += sq;
        let rmse = (sq / held_out.len() as f64).sqrt();
        println!("{:>4}  {:>5}  {:>5}  {:>10.6}", fold + 1, train.len(), held_out.len(), rmse);
        fold_rmse.push(rmse);
    }
    let pooled_rmse = (pooled_sq / n as f64).sqrt();
    if target_range > 0.0 {
        println!(
            "pooled rmse {:.6} over range {:.6} ({:.2}%)",
            pooled_rmse,
            target_range,
            100.0 * pooled_rmse / target_range
        );
    } else {
        println!("pooled rmse {pooled_rmse:.6} (constant targets)");
    }

    Ok(CrossValidation { fold_rmse, pooled_rmse, target_range })
}
