//! Representative spatial sampling on a gridded study area.
//!
//! Candidate grid cells are stratified by built-up share, then a fixed number
//! of cells is chosen per stratum by simulated annealing against two costs:
//! the inverse average-nearest-neighbor index (spatial spread) and the
//! inverse mean mixed-use level (POI diversity measured with Hill numbers).
//!
//! All math is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annealer;
pub mod diversity;
pub mod geomodel;
pub mod ingest;
pub mod metrics;
pub mod scalar;
pub mod spatial;
pub mod strata;
pub mod synth;

pub use scalar::Scalar;

pub type Point = geomodel::PlanarPoint<f64>;
pub type Unit = geomodel::SamplingUnit<f64>;
pub type Candidates = geomodel::CandidateSet<f64>;
pub type Profile = geomodel::DiversityProfile<f64>;
pub type Costs = geomodel::CostPair<f64>;
pub type Selection = geomodel::Solution<f64>;
pub type Config = annealer::AnnealConfig<f64>;
pub type Trace = Vec<annealer::TraceRow<f64>>;
pub type Strata = strata::Stratification<f64>;
pub type Scenario = synth::Scenario<f64>;
pub type ScenarioSpec = synth::ScenarioSpec<f64>;
pub type Report = synth::ComparisonReport<f64>;
