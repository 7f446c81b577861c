//! Whole-pipeline integration at desk scale: stage one feeds stage two, the
//! outcome is legal and reproducible, and the report serializes losslessly.

use chiplace_core::stage1::run_stage_one;
use chiplace_core::stage2::run_stage_two;
use chiplace_core::{
    AnnealConfig, Chiplet, Net, RunReport, StageOneConfig, SurrogateConfig, ThermalConfig,
};

fn system() -> (Vec<Chiplet>, Vec<Net>) {
    let chiplets = vec![
        Chiplet::new(0, 9.0, 9.0, 120.0),
        Chiplet::new(1, 7.0, 7.0, 80.0),
        Chiplet::new(2, 6.0, 4.0, 30.0),
        Chiplet::new(3, 5.0, 5.0, 20.0),
    ];
    let nets = vec![Net::new(0, 0, 1, 4), Net::new(1, 1, 2, 2), Net::new(2, 0, 3, 1)];
    (chiplets, nets)
}

fn fast_configs() -> (StageOneConfig, ThermalConfig, SurrogateConfig, AnnealConfig) {
    let stage_one = StageOneConfig { moves_per_level: 30, ..StageOneConfig::default() };
    let thermal = ThermalConfig { grid_resolution: 16, ..ThermalConfig::default() };
    let surrogate = SurrogateConfig::default();
    let anneal = AnnealConfig {
        oracle_budget: 80,
        seed_samples: 10,
        inner_iterations: 12,
        min_temperature: 0.4,
        ..AnnealConfig::default()
    };
    (stage_one, thermal, surrogate, anneal)
}

#[test]
fn stage_one_output_feeds_stage_two() {
    let (chiplets, nets) = system();
    let (stage_one, thermal, surrogate, anneal) = fast_configs();
    let (compact, _) = run_stage_one(&chiplets, &nets, 45.0, &stage_one, 42).unwrap();
    assert!(compact.is_legal());

    let outcome = run_stage_two(&compact, &nets, &thermal, &surrogate, &anneal, 42).unwrap();
    assert!(outcome.best.is_legal());
    assert!(outcome.report.oracle_calls <= anneal.oracle_budget);
    assert_eq!(outcome.report.seed, 42);
    assert!(outcome.report.final_temperature > thermal.ambient);
    assert!(outcome.report.final_wirelength > 0.0);
    // Every oracle-backed sample pairs a temperature with its wirelength.
    assert_eq!(outcome.store.len() as u64, outcome.report.oracle_calls);
}

#[test]
fn reports_serialize_round_trip() {
    let (chiplets, nets) = system();
    let (stage_one, thermal, surrogate, anneal) = fast_configs();
    let (compact, _) = run_stage_one(&chiplets, &nets, 45.0, &stage_one, 7).unwrap();
    let outcome = run_stage_two(&compact, &nets, &thermal, &surrogate, &anneal, 7).unwrap();

    let json = serde_json::to_string_pretty(&outcome.report).unwrap();
    let back: RunReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, outcome.report);
}

#[test]
fn identical_seeds_give_byte_identical_reports() {
    let (chiplets, nets) = system();
    let (stage_one, thermal, surrogate, anneal) = fast_configs();
    let mut jsons = Vec::new();
    for _ in 0..2 {
        let (compact, _) = run_stage_one(&chiplets, &nets, 45.0, &stage_one, 3).unwrap();
        let outcome = run_stage_two(&compact, &nets, &thermal, &surrogate, &anneal, 3).unwrap();
        jsons.push(serde_json::to_vec(&outcome.report).unwrap());
    }
    assert_eq!(jsons[0], jsons[1]);
}

#[test]
fn wirelength_only_mode_never_trades_wirelength_away() {
    // Cool systems anneal with the temperature weight at zero; the best
    // update rule then demands strictly shorter wirelength, so the final
    // best can never be longer than the initial placement's routing.
    let chiplets = vec![
        Chiplet::new(0, 9.0, 9.0, 2.0),
        Chiplet::new(1, 7.0, 7.0, 1.5),
        Chiplet::new(2, 6.0, 4.0, 1.0),
        Chiplet::new(3, 5.0, 5.0, 0.5),
    ];
    let nets = vec![Net::new(0, 0, 1, 4), Net::new(1, 1, 2, 2), Net::new(2, 0, 3, 1)];
    let (stage_one, thermal, surrogate, anneal) = fast_configs();
    let (compact, _) = run_stage_one(&chiplets, &nets, 45.0, &stage_one, 11).unwrap();
    let outcome = run_stage_two(&compact, &nets, &thermal, &surrogate, &anneal, 11).unwrap();

    assert!(outcome.report.levels.iter().all(|l| l.weight_a == 0.0), "cool case must stay cool");
    assert!(outcome.report.final_wirelength <= outcome.report.initial_wirelength);
}
