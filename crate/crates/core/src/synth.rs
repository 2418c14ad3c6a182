//! Synthetic study areas and the baseline samplers used to compare against
//! the dual-objective annealer.
//!
//! Samplers are scored by the cost values they reach, not by any
//! downstream model accuracy.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use thiserror::Error;

use crate::annealer::{
    self, draw_positions, rng_for, AnnealConfig, AnnealError, Objectives, RunResult,
};
use crate::diversity::{self, DiversityError};
use crate::geomodel::{CandidateSet, GeoError, PlanarPoint, Solution};
use crate::ingest::{self, BoundingBox, IngestError, Poi};
use crate::scalar::Scalar;
use crate::strata::{self, Allocation, StrataError, Stratification, Stratum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Anneal(#[from] AnnealError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Strata(#[from] StrataError),
    #[error(transparent)]
    Diversity(#[from] DiversityError),
    #[error("unknown method `{0}` (expected random, stratified, spatial or dual)")]
    UnknownMethod(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec<T> {
    pub nx: usize,
    pub ny: usize,
    pub cell_side: T,
    pub n_clusters: usize,
    pub pois_per_cluster: usize,
    pub n_categories: usize,
    /// Standard deviation of each Gaussian POI cluster, in meters.
    pub cluster_spread: T,
    pub builtup_peak: T,
    pub seed: u64,
}

impl<T: Scalar> Default for ScenarioSpec<T> {
    /// A 50 × 50 km study area of 1 km cells.
    fn default() -> Self {
        Self {
            nx: 50,
            ny: 50,
            cell_side: T::of(1000.0),
            n_clusters: 12,
            pois_per_cluster: 1500,
            n_categories: 10,
            cluster_spread: T::of(8000.0),
            builtup_peak: T::of(0.9),
            seed: 0,
        }
    }
}

impl<T: Scalar> ScenarioSpec<T> {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        if self.nx == 0 || self.ny == 0 {
            return bad("grid dimensions must be positive");
        }
        if !(self.cell_side > T::zero()) {
            return bad("cell_side must be positive");
        }
        if self.n_clusters == 0 || self.n_categories == 0 {
            return bad("n_clusters and n_categories must be positive");
        }
        if !(self.cluster_spread > T::zero()) {
            return bad("cluster_spread must be positive");
        }
        if !(self.builtup_peak > T::zero() && self.builtup_peak <= T::one()) {
            return bad("builtup_peak must be in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    /// Units with built-up share and POI counts, not yet enriched.
    pub candidates: CandidateSet<T>,
    pub pois: Vec<Poi<T>>,
    pub out_of_grid_pois: usize,
}

impl<T: Scalar> Scenario<T> {
    /// Units with diversity profiles and study-wide MUL.
    pub fn enriched(&self) -> Result<CandidateSet<T>, SynthError> {
        let mut units = self.candidates.units().to_vec();
        diversity::enrich_units(&mut units)?;
        Ok(CandidateSet::from_units(units)?)
    }
}

fn category_name(i: usize) -> String {
    format!("c{i:02}")
}

/// Gaussian POI clusters with random category mixes; built-up share is the
/// smoothed cluster density scaled to `[0, builtup_peak]`.
pub fn generate_scenario<T: Scalar>(spec: &ScenarioSpec<T>) -> Result<Scenario<T>, SynthError> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, 0);
    let side = spec.cell_side.as_f64();
    let (width, height) = (spec.nx as f64 * side, spec.ny as f64 * side);
    let spread = spec.cluster_spread.as_f64();

    let centers: Vec<(f64, f64)> = (0..spec.n_clusters)
        .map(|_| (rng.gen::<f64>() * width, rng.gen::<f64>() * height))
        .collect();
    let mixes: Vec<WeightedIndex<f64>> = (0..spec.n_clusters)
        .map(|_| {
            let w: Vec<f64> = (0..spec.n_categories)
                .map(|_| rng.gen::<f64>() + 1e-9)
                .collect();
            WeightedIndex::new(w).expect("positive weights")
        })
        .collect();
    let offset = Normal::new(0.0, spread).expect("positive spread");

    let mut pois = Vec::with_capacity(spec.n_clusters * spec.pois_per_cluster);
    for (k, &(cx, cy)) in centers.iter().enumerate() {
        for _ in 0..spec.pois_per_cluster {
            let x = cx + offset.sample(&mut rng);
            let y = cy + offset.sample(&mut rng);
            let category = category_name(mixes[k].sample(&mut rng));
            pois.push(Poi {
                id: pois.len() as u64,
                location: PlanarPoint::new(T::of(x), T::of(y)),
                category,
            });
        }
    }

    let bbox = BoundingBox::new(T::zero(), T::zero(), T::of(width), T::of(height))?;
    let mut units = ingest::generate_grid(&bbox, spec.cell_side)?;
    let density: Vec<f64> = units
        .iter()
        .map(|u| {
            let (ux, uy) = (u.centroid.x.as_f64(), u.centroid.y.as_f64());
            centers
                .iter()
                .map(|&(cx, cy)| {
                    let d2 = (ux - cx).powi(2) + (uy - cy).powi(2);
                    (-d2 / (2.0 * spread * spread)).exp()
                })
                .sum()
        })
        .collect();
    let max_density = density.iter().copied().fold(0.0, f64::max);
    let peak = spec.builtup_peak.as_f64();
    for (u, d) in units.iter_mut().zip(&density) {
        let b = if max_density > 0.0 {
            peak * d / max_density
        } else {
            0.0
        };
        u.builtup = T::of(b.clamp(0.0, 1.0));
    }
    let summary = ingest::assign_pois_to_cells(&pois, &mut units)?;
    Ok(Scenario {
        candidates: CandidateSet::from_units(units)?,
        pois,
        out_of_grid_pois: summary.out_of_grid_count,
    })
}

fn solution_of<T: Scalar>(
    candidates: &CandidateSet<T>,
    positions: &[usize],
) -> Result<Solution<T>, AnnealError> {
    let ids: Vec<u64> = positions
        .iter()
        .map(|&p| candidates.units()[p].id)
        .collect();
    let costs = annealer::evaluate_ids(candidates, &ids)?;
    Ok(Solution {
        member_ids: ids,
        costs,
    })
}

/// Uniform draw of `n` units without replacement.
pub fn sample_random<T: Scalar, R: Rng>(
    candidates: &CandidateSet<T>,
    n: usize,
    rng: &mut R,
) -> Result<Solution<T>, AnnealError> {
    let positions = draw_positions(candidates.len(), n, rng)?;
    solution_of(candidates, &positions)
}

/// Uniform draws within each stratum per the allocation, dense first.
pub fn sample_stratified_random<T: Scalar, R: Rng>(
    strata: &Stratification<T>,
    allocation: &Allocation,
    rng: &mut R,
) -> Result<(Solution<T>, Solution<T>), AnnealError> {
    let dense = sample_random(&strata.dense, allocation.n_dense, rng)?;
    let sparse = sample_random(&strata.sparse, allocation.n_sparse, rng)?;
    Ok((dense, sparse))
}

/// The annealer with only the spatial move.
pub fn sample_spatial_only<T: Scalar>(
    candidates: &CandidateSet<T>,
    n: usize,
    config: &AnnealConfig<T>,
) -> Result<RunResult<T>, AnnealError> {
    let config = AnnealConfig {
        n,
        ..config.clone()
    };
    annealer::run(candidates, &config, Objectives::SpatialOnly)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Uniform over the whole study area, costs scored per stratum.
    Random,
    /// Uniform within each stratum per the allocation.
    Stratified,
    /// Spatial-spread-only annealing per stratum.
    Spatial,
    /// Dual-objective annealing per stratum.
    Dual,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Random,
        Method::Stratified,
        Method::Spatial,
        Method::Dual,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Stratified => "stratified",
            Method::Spatial => "spatial",
            Method::Dual => "dual",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| SynthError::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<T> {
    /// `Random` rows hold NaN costs when the draw left a stratum with an
    /// undefined cost.
    pub method: Method,
    pub seed: u64,
    pub stratum: Stratum,
    pub n: usize,
    pub final_cost_ann: T,
    pub final_cost_amul: T,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<T> {
    pub rows: Vec<ReportRow<T>>,
}

pub const REPORT_HEADER: &str = "method,seed,stratum,n,final_cost_ann,final_cost_amul,wall_time_ms";

impl<T: Scalar> ComparisonReport<T> {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{REPORT_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.method,
                r.seed,
                r.stratum,
                r.n,
                r.final_cost_ann,
                r.final_cost_amul,
                r.wall_time_ms
            )?;
        }
        Ok(())
    }

    /// Rows for one method and stratum, ordered by seed.
    pub fn series(&self, method: Method, stratum: Stratum) -> Vec<&ReportRow<T>> {
        let mut rows: Vec<_> = self
            .rows
            .iter()
            .filter(|r| r.method == method && r.stratum == stratum)
            .collect();
        rows.sort_by_key(|r| r.seed);
        rows
    }

    /// Mean `(cost_ann, cost_amul)` per method and stratum over the runs
    /// where that cost is defined.
    pub fn means(&self) -> BTreeMap<(Method, Stratum), (T, T)> {
        let mut acc: BTreeMap<(Method, Stratum), [(T, usize); 2]> = BTreeMap::new();
        for r in &self.rows {
            let e = acc
                .entry((r.method, r.stratum))
                .or_insert([(T::zero(), 0); 2]);
            for (slot, v) in e.iter_mut().zip([r.final_cost_ann, r.final_cost_amul]) {
                if !v.is_nan() {
                    slot.0 = slot.0 + v;
                    slot.1 += 1;
                }
            }
        }
        let mean = |(sum, n): (T, usize)| {
            if n == 0 {
                T::nan()
            } else {
                sum / T::of_count(n)
            }
        };
        acc.into_iter()
            .map(|(k, [a, m])| (k, (mean(a), mean(m))))
            .collect()
    }
}

/// Inputs shared by every run of a comparison.
#[derive(Debug, Clone)]
pub struct CompareSetup<'a, T> {
    pub strata: &'a Stratification<T>,
    pub allocation: Allocation,
    /// Template for the annealing methods; `seed`, `stream` and `n` are
    /// overwritten per run.
    pub config: AnnealConfig<T>,
    pub record_timing: bool,
}

/// Runs every method on seeds `0..n_seeds`. Each (method, seed) pair owns
/// its RNG streams, so rows do not depend on method order or scheduling.
pub fn compare<T: Scalar>(
    setup: &CompareSetup<'_, T>,
    methods: &[Method],
    n_seeds: u64,
) -> Result<ComparisonReport<T>, SynthError> {
    setup.allocation.check(setup.strata)?;
    let mut methods: Vec<Method> = methods.to_vec();
    methods.sort();
    methods.dedup();
    let pairs: Vec<(Method, u64)> = methods
        .iter()
        .flat_map(|&m| (0..n_seeds).map(move |s| (m, s)))
        .collect();
    let nested: Vec<Vec<ReportRow<T>>> = pairs
        .par_iter()
        .map(|&(method, seed)| run_method(setup, method, seed))
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<ReportRow<T>> = nested.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.method, r.seed, r.stratum));
    Ok(ComparisonReport { rows })
}

/// Stream offset for the whole-area random sampler, clear of the
/// per-stratum streams.
const RANDOM_STREAM: u64 = 16;

fn run_method<T: Scalar>(
    setup: &CompareSetup<'_, T>,
    method: Method,
    seed: u64,
) -> Result<Vec<ReportRow<T>>, SynthError> {
    let row = |stratum, n, costs: (T, T), started: Instant| ReportRow {
        method,
        seed,
        stratum,
        n,
        final_cost_ann: costs.0,
        final_cost_amul: costs.1,
        wall_time_ms: if setup.record_timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    };
    let strata = setup.strata;
    match method {
        Method::Random => {
            let started = Instant::now();
            let whole = union_of(strata)?;
            let mut rng = rng_for(seed, RANDOM_STREAM);
            let pick = sample_random(&whole, setup.allocation.total(), &mut rng)?;
            Stratum::ALL
                .into_iter()
                .map(|s| {
                    let set = strata.stratum(s);
                    let ids: Vec<u64> = pick
                        .member_ids
                        .iter()
                        .copied()
                        .filter(|&id| set.get(id).is_some())
                        .collect();
                    // too few picks (or all-zero MUL) in a stratum leave its costs undefined
                    let costs = match annealer::evaluate_ids(set, &ids) {
                        Ok(c) => (c.ann, c.amul),
                        Err(AnnealError::Cost(_)) => (T::nan(), T::nan()),
                        Err(e) => return Err(e.into()),
                    };
                    Ok(row(s, ids.len(), costs, started))
                })
                .collect()
        }
        Method::Stratified => {
            let started = Instant::now();
            let mut rng = rng_for(seed, 0);
            let (dense, sparse) = sample_stratified_random(strata, &setup.allocation, &mut rng)?;
            Ok(vec![
                row(
                    Stratum::Dense,
                    dense.len(),
                    (dense.costs.ann, dense.costs.amul),
                    started,
                ),
                row(
                    Stratum::Sparse,
                    sparse.len(),
                    (sparse.costs.ann, sparse.costs.amul),
                    started,
                ),
            ])
        }
        Method::Spatial | Method::Dual => Stratum::ALL
            .into_iter()
            .map(|s| {
                let started = Instant::now();
                let config = AnnealConfig {
                    seed,
                    stream: s.stream(),
                    n: setup.allocation.for_stratum(s),
                    ..setup.config.clone()
                };
                let objectives = if method == Method::Dual {
                    Objectives::Dual
                } else {
                    Objectives::SpatialOnly
                };
                let out = annealer::run(strata.stratum(s), &config, objectives)?;
                Ok(row(
                    s,
                    config.n,
                    (out.best.costs.ann, out.best.costs.amul),
                    started,
                ))
            })
            .collect(),
    }
}

fn union_of<T: Scalar>(strata: &Stratification<T>) -> Result<CandidateSet<T>, GeoError> {
    let mut units = strata.dense.units().to_vec();
    units.extend_from_slice(strata.sparse.units());
    units.sort_by_key(|u| u.id);
    CandidateSet::from_units(units)
}

/// Stratifies an enriched candidate set at its lower built-up quartile.
pub fn default_stratification<T: Scalar>(
    enriched: &CandidateSet<T>,
) -> Result<Stratification<T>, SynthError> {
    let builtups: Vec<T> = enriched.units().iter().map(|u| u.builtup).collect();
    let threshold = strata::quartile_threshold(&builtups)?;
    Ok(strata::stratify(enriched, threshold)?)
}

/// One-sided exact sign test: probability of at least `wins` successes out
/// of `wins + losses` fair coin flips. Ties are dropped by the caller.
pub fn sign_test_p_value(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let mut p = 0.0;
    let mut binom = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            binom = binom * (n - k + 1) as f64 / k as f64;
        }
        if k >= wins {
            p += binom;
        }
    }
    p / 2f64.powi(n as i32)
}
