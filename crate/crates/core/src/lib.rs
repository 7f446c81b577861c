//! Thermal-aware placement of chiplets on a 2.5D interposer.
//!
//! The pipeline has two stages. Stage one packs the chiplets into a compact
//! arrangement with a B*-tree floorplanner driven by simulated annealing
//! ([`stage1`]). Stage two anneals that arrangement on the full interposer,
//! trading routed wirelength against peak steady-state temperature
//! ([`stage2`]). Temperature comes from a finite-volume solver ([`thermal`]);
//! because each solve is comparatively expensive, stage two consults a
//! radial-basis-function surrogate ([`surrogate`]) for most candidate
//! evaluations and reserves the real solver for periodic ground-truth checks.
//!
//! All randomness flows from a single `u64` seed, so every run is
//! reproducible bit for bit.

pub mod geometry;
pub mod netlist;
mod norm;
pub mod stage1;
pub mod stage2;
pub mod surrogate;
pub mod thermal;

pub use geometry::{Chiplet, Direction, Placement, Rect, LEGAL_EPS};
pub use netlist::{route_wirelength, Net, PinClump, RoutingSolution, Side};
pub use norm::MinMax;
pub use stage1::{run_stage_one, BStarTree, StageOneConfig, StageOneReport};
pub use stage2::{run_stage_two, AnnealConfig, OracleCache, RunReport, StageTwoOutcome};
pub use surrogate::{FeatureVector, RbfModel, Sample, SampleStore, SurrogateConfig};
pub use thermal::{max_temperature, solve_steady_state, ThermalConfig, ThermalMap};
