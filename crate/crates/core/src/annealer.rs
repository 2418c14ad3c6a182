//! Dual-objective simulated annealing over a candidate set.
//!
//! Each iteration makes two tentative replacements. The spatial move swaps
//! out the member with the shortest nearest-neighbor distance and is judged
//! on the change in `Cost_ANN`; the diversity move then swaps out the member
//! with the lowest MUL and is judged on the change in `Cost_AMUL`. Both
//! replacements draw uniformly from the units not currently selected.
//!
//! The best-so-far solution is replaced only by a solution that Pareto
//! dominates it (no worse in both costs, strictly better in one).

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geomodel::{CandidateSet, CostPair, PlanarPoint, Solution};
use crate::scalar::Scalar;
use crate::spatial::{self, SpatialError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnealError {
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("invalid annealing config: {0}")]
    InvalidConfig(String),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("{available} candidates cannot supply {requested} samples")]
    InsufficientCandidates { available: usize, requested: usize },
    #[error("every candidate is already selected; nothing to swap in")]
    ExhaustedCandidates,
    #[error("unit {0} has no mixed-use level; enrich the units first")]
    MissingMul(u64),
    #[error("unit {0} is not in the candidate set")]
    UnknownUnit(u64),
    #[error(transparent)]
    Cost(#[from] SpatialError),
}

/// Which objectives drive the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objectives {
    /// Spatial and diversity moves every iteration.
    #[default]
    Dual,
    /// Spatial move only; best-so-far judged on `Cost_ANN` alone.
    SpatialOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealConfig<T> {
    pub t0: T,
    pub alpha: T,
    pub t_tol: T,
    pub max_iters: usize,
    pub seed: u64,
    /// ChaCha stream index; one stream per stratum run.
    pub stream: u64,
    pub n: usize,
}

impl<T: Scalar> AnnealConfig<T> {
    pub const DEFAULT_ITERS: usize = 5000;

    /// Defaults: `t0 = 0.05`, `alpha = 0.999`, `t_tol = 1e-8`, 5000 iterations.
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            t0: T::of(0.05),
            alpha: T::of(0.999),
            t_tol: T::of(1e-8),
            max_iters: Self::DEFAULT_ITERS,
            seed,
            stream: 0,
            n,
        }
    }

    /// `t0 <= t_tol` is allowed and yields a run with zero iterations.
    pub fn validate(&self) -> Result<(), AnnealError> {
        if !(self.t0 > T::zero()) || !self.t0.is_finite() {
            return Err(AnnealError::InvalidConfig(format!(
                "t0 must be > 0, got {}",
                self.t0
            )));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(AnnealError::InvalidConfig(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.t_tol > T::zero()) || !self.t_tol.is_finite() {
            return Err(AnnealError::InvalidConfig(format!(
                "t_tol must be > 0, got {}",
                self.t_tol
            )));
        }
        if self.n < 2 {
            return Err(AnnealError::TooFewSamples(self.n));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        rng_for(self.seed, self.stream)
    }
}

/// ChaCha8 seeded from `seed` on stream `stream`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Metropolis rule: 1 for an improving move, `exp(-delta / T)` otherwise.
pub fn acceptance_probability<T: Scalar>(delta_cost: T, temperature: T) -> Result<T, AnnealError> {
    if !(temperature > T::zero()) {
        return Err(AnnealError::NonPositiveTemperature(temperature.as_f64()));
    }
    if delta_cost < T::zero() {
        Ok(T::one())
    } else {
        Ok((-delta_cost / temperature).exp())
    }
}

/// Geometric cooling step.
pub fn cool<T: Scalar>(temperature: T, alpha: T) -> T {
    alpha * temperature
}

/// One row of the optimization trace. Temperature is the one used during
/// the iteration, `t0 * alpha^iter`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T> {
    pub iter: usize,
    pub temperature: T,
    pub cost_ann_current: T,
    pub cost_amul_current: T,
    pub cost_ann_best: T,
    pub cost_amul_best: T,
    pub accepted_spatial: bool,
    /// `None` when the diversity move is disabled.
    pub accepted_diversity: Option<bool>,
    pub p_spatial: T,
    pub p_diversity: Option<T>,
}

pub const TRACE_HEADER: &str = "iter,temperature,cost_ann_current,cost_amul_current,cost_ann_best,cost_amul_best,accepted_spatial,accepted_diversity,p_spatial,p_diversity";

pub fn write_trace_csv<T: Scalar, W: Write>(
    rows: &[TraceRow<T>],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in rows {
        let acc_div = r
            .accepted_diversity
            .map(|a| (a as u8).to_string())
            .unwrap_or_default();
        let p_div = r.p_diversity.map(|p| p.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.iter,
            r.temperature,
            r.cost_ann_current,
            r.cost_amul_current,
            r.cost_ann_best,
            r.cost_amul_best,
            r.accepted_spatial as u8,
            acc_div,
            r.p_spatial,
            p_div
        )?;
    }
    Ok(())
}

/// A candidate replacement of one member.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub member_ids: Vec<u64>,
    pub removed: u64,
    pub added: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult<T> {
    pub initial: Solution<T>,
    pub best: Solution<T>,
    /// Current solution when the loop stopped.
    pub last: Solution<T>,
    pub trace: Vec<TraceRow<T>>,
}

/// What an observer of [`run_observed`] is shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckpointKind {
    Initial,
    SpatialProposal,
    DiversityProposal,
    EndOfIteration,
}

/// Positions (indices into `candidates.units()`) of a solution seen mid-run.
#[derive(Debug, Clone, Copy)]
pub struct Checkpoint<'a> {
    pub iter: usize,
    pub kind: CheckpointKind,
    pub positions: &'a [usize],
}

/// Evaluates both costs for the given member positions.
fn evaluate<T: Scalar>(
    candidates: &CandidateSet<T>,
    positions: &[usize],
) -> Result<(CostPair<T>, Vec<T>), SpatialError> {
    let units = candidates.units();
    let points: Vec<PlanarPoint<T>> = positions.iter().map(|&p| units[p].centroid).collect();
    let nn = spatial::nearest_neighbor_distances(&points)?;
    let ann = spatial::cost_ann_from_distances(&nn, candidates.total_area())?;
    let muls: Vec<T> = positions
        .iter()
        .map(|&p| units[p].mul.unwrap_or_else(T::zero))
        .collect();
    let amul = spatial::cost_amul(&muls)?;
    Ok((CostPair::new(ann, amul), nn))
}

/// Evaluates both costs for a list of unit ids.
pub fn evaluate_ids<T: Scalar>(
    candidates: &CandidateSet<T>,
    ids: &[u64],
) -> Result<CostPair<T>, AnnealError> {
    let positions = positions_of(candidates, ids)?;
    require_mul(candidates, &positions)?;
    Ok(evaluate(candidates, &positions)?.0)
}

fn positions_of<T: Scalar>(
    candidates: &CandidateSet<T>,
    ids: &[u64],
) -> Result<Vec<usize>, AnnealError> {
    ids.iter()
        .map(|&id| candidates.position(id).ok_or(AnnealError::UnknownUnit(id)))
        .collect()
}

fn require_mul<T: Scalar>(
    candidates: &CandidateSet<T>,
    positions: &[usize],
) -> Result<(), AnnealError> {
    let units = candidates.units();
    match positions.iter().find(|&&p| units[p].mul.is_none()) {
        Some(&p) => Err(AnnealError::MissingMul(units[p].id)),
        None => Ok(()),
    }
}

fn check_draw(available: usize, n: usize) -> Result<(), AnnealError> {
    if n < 2 {
        return Err(AnnealError::TooFewSamples(n));
    }
    if available < n {
        return Err(AnnealError::InsufficientCandidates {
            available,
            requested: n,
        });
    }
    Ok(())
}

/// Current selection plus the complement it draws replacements from.
struct State<'a, T> {
    candidates: &'a CandidateSet<T>,
    members: Vec<usize>,
    outside: Vec<usize>,
    nn: Vec<T>,
    costs: CostPair<T>,
}

struct Move<T> {
    slot: usize,
    outside_slot: usize,
    positions: Vec<usize>,
    /// `None` when the proposed set has an undefined cost.
    evaluated: Option<(CostPair<T>, Vec<T>)>,
}

#[derive(Clone, Copy)]
enum Target {
    ShortestNn,
    LowestMul,
}

impl<'a, T: Scalar> State<'a, T> {
    fn new(candidates: &'a CandidateSet<T>, members: Vec<usize>) -> Result<Self, AnnealError> {
        require_mul(candidates, &(0..candidates.len()).collect::<Vec<_>>())?;
        let (costs, nn) = evaluate(candidates, &members)?;
        let mut selected = vec![false; candidates.len()];
        for &m in &members {
            selected[m] = true;
        }
        let outside = (0..candidates.len()).filter(|&i| !selected[i]).collect();
        Ok(Self {
            candidates,
            members,
            outside,
            nn,
            costs,
        })
    }

    fn solution(&self) -> Solution<T> {
        let units = self.candidates.units();
        Solution {
            member_ids: self.members.iter().map(|&p| units[p].id).collect(),
            costs: self.costs,
        }
    }

    /// Slot of the member to replace; ties go to the smallest unit id.
    fn target_slot(&self, target: Target) -> usize {
        let units = self.candidates.units();
        let key = |slot: usize| -> T {
            match target {
                Target::ShortestNn => self.nn[slot],
                Target::LowestMul => units[self.members[slot]].mul.unwrap_or_else(T::zero),
            }
        };
        (0..self.members.len())
            .min_by(|&a, &b| {
                key(a)
                    .partial_cmp(&key(b))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(units[self.members[a]].id.cmp(&units[self.members[b]].id))
            })
            .expect("solution is non-empty")
    }

    fn propose<R: Rng>(&self, target: Target, rng: &mut R) -> Result<Move<T>, AnnealError> {
        if self.outside.is_empty() {
            return Err(AnnealError::ExhaustedCandidates);
        }
        let slot = self.target_slot(target);
        let outside_slot = rng.gen_range(0..self.outside.len());
        let mut positions = self.members.clone();
        positions[slot] = self.outside[outside_slot];
        let evaluated = evaluate(self.candidates, &positions).ok();
        Ok(Move {
            slot,
            outside_slot,
            positions,
            evaluated,
        })
    }

    fn apply(&mut self, mv: Move<T>) {
        let (costs, nn) = mv.evaluated.expect("only feasible moves are applied");
        let leaving = self.members[mv.slot];
        self.members = mv.positions;
        self.outside[mv.outside_slot] = leaving;
        self.costs = costs;
        self.nn = nn;
    }

    /// Runs one tentative move and its Metropolis test.
    /// Returns `(accepted, probability)`.
    fn step<R: Rng>(
        &mut self,
        target: Target,
        temperature: T,
        rng: &mut R,
    ) -> Result<(bool, T, Move<T>), AnnealError> {
        let mv = self.propose(target, rng)?;
        let u = T::of(rng.gen::<f64>());
        let p = match &mv.evaluated {
            Some((costs, _)) => {
                let delta = match target {
                    Target::ShortestNn => costs.ann - self.costs.ann,
                    Target::LowestMul => costs.amul - self.costs.amul,
                };
                acceptance_probability(delta, temperature)?
            }
            None => T::zero(),
        };
        Ok((u < p, p, mv))
    }
}

/// Draws `n` distinct candidates uniformly without replacement.
pub fn init_solution<T: Scalar, R: Rng>(
    candidates: &CandidateSet<T>,
    n: usize,
    rng: &mut R,
) -> Result<Solution<T>, AnnealError> {
    let positions = draw_positions(candidates.len(), n, rng)?;
    let state = State::new(candidates, positions)?;
    Ok(state.solution())
}

pub(crate) fn draw_positions<R: Rng>(
    available: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>, AnnealError> {
    check_draw(available, n)?;
    Ok(rand::seq::index::sample(rng, available, n).into_vec())
}

fn state_for<'a, T: Scalar>(
    solution: &Solution<T>,
    candidates: &'a CandidateSet<T>,
) -> Result<State<'a, T>, AnnealError> {
    let positions = positions_of(candidates, &solution.member_ids)?;
    State::new(candidates, positions)
}

fn proposal_of<T: Scalar>(state: &State<'_, T>, mv: &Move<T>) -> Proposal {
    let units = state.candidates.units();
    Proposal {
        member_ids: mv.positions.iter().map(|&p| units[p].id).collect(),
        removed: units[state.members[mv.slot]].id,
        added: units[state.outside[mv.outside_slot]].id,
    }
}

/// Replaces the member with the shortest nearest-neighbor distance by a
/// random non-member.
pub fn perturb_spatial<T: Scalar, R: Rng>(
    solution: &Solution<T>,
    candidates: &CandidateSet<T>,
    rng: &mut R,
) -> Result<Proposal, AnnealError> {
    let state = state_for(solution, candidates)?;
    let mv = state.propose(Target::ShortestNn, rng)?;
    Ok(proposal_of(&state, &mv))
}

/// Replaces the member with the lowest MUL by a random non-member.
pub fn perturb_diversity<T: Scalar, R: Rng>(
    solution: &Solution<T>,
    candidates: &CandidateSet<T>,
    rng: &mut R,
) -> Result<Proposal, AnnealError> {
    let state = state_for(solution, candidates)?;
    let mv = state.propose(Target::LowestMul, rng)?;
    Ok(proposal_of(&state, &mv))
}

pub fn run<T: Scalar>(
    candidates: &CandidateSet<T>,
    config: &AnnealConfig<T>,
    objectives: Objectives,
) -> Result<RunResult<T>, AnnealError> {
    run_observed(candidates, config, objectives, |_| {})
}

/// Like [`run`], calling `observer` on the initial solution, every proposal
/// and the solution at the end of every iteration.
pub fn run_observed<T: Scalar, F>(
    candidates: &CandidateSet<T>,
    config: &AnnealConfig<T>,
    objectives: Objectives,
    mut observer: F,
) -> Result<RunResult<T>, AnnealError>
where
    F: FnMut(Checkpoint<'_>),
{
    config.validate()?;
    let mut rng = config.rng();
    let positions = draw_positions(candidates.len(), config.n, &mut rng)?;
    let mut state = State::new(candidates, positions)?;
    observer(Checkpoint {
        iter: 0,
        kind: CheckpointKind::Initial,
        positions: &state.members,
    });

    let initial = state.solution();
    let mut best = initial.clone();
    let mut trace = Vec::new();
    let mut temperature = config.t0;
    let mut iter = 0;

    while temperature > config.t_tol && iter < config.max_iters {
        let (accepted_spatial, p_spatial, mv) =
            state.step(Target::ShortestNn, temperature, &mut rng)?;
        observer(Checkpoint {
            iter,
            kind: CheckpointKind::SpatialProposal,
            positions: &mv.positions,
        });
        if accepted_spatial {
            state.apply(mv);
        }

        let (accepted_diversity, p_diversity) = match objectives {
            Objectives::Dual => {
                let (accepted, p, mv) = state.step(Target::LowestMul, temperature, &mut rng)?;
                observer(Checkpoint {
                    iter,
                    kind: CheckpointKind::DiversityProposal,
                    positions: &mv.positions,
                });
                if accepted {
                    state.apply(mv);
                }
                (Some(accepted), Some(p))
            }
            Objectives::SpatialOnly => (None, None),
        };

        let improved = match objectives {
            Objectives::Dual => state.costs.dominates(&best.costs),
            Objectives::SpatialOnly => state.costs.ann < best.costs.ann,
        };
        if improved {
            best = state.solution();
        }
        observer(Checkpoint {
            iter,
            kind: CheckpointKind::EndOfIteration,
            positions: &state.members,
        });

        trace.push(TraceRow {
            iter,
            temperature,
            cost_ann_current: state.costs.ann,
            cost_amul_current: state.costs.amul,
            cost_ann_best: best.costs.ann,
            cost_amul_best: best.costs.amul,
            accepted_spatial,
            accepted_diversity,
            p_spatial,
            p_diversity,
        });

        temperature = cool(temperature, config.alpha);
        iter += 1;
    }

    Ok(RunResult {
        initial,
        best,
        last: state.solution(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomodel::{validate_candidates, SamplingUnit};

    fn unit(id: u64, x: f64, y: f64, mul: f64) -> SamplingUnit<f64> {
        SamplingUnit::new(id, PlanarPoint::new(x, y), 1.0).with_mul(mul)
    }

    fn grid(n: usize) -> CandidateSet<f64> {
        let mut units = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let id = (i * n + j) as u64;
                let mul = ((i * 7 + j * 3) % 10) as f64 / 10.0;
                units.push(unit(id, i as f64 + 0.5, j as f64 + 0.5, mul));
            }
        }
        validate_candidates(units).unwrap()
    }

    #[test]
    fn acceptance_examples() {
        assert_eq!(acceptance_probability(-0.5, 1.0).unwrap(), 1.0);
        assert!((acceptance_probability(0.1f64, 1.0).unwrap() - 0.9048374180359595).abs() < 1e-15);
        assert_eq!(acceptance_probability(0.0, 1.0).unwrap(), 1.0);
        assert!(matches!(
            acceptance_probability(0.1, 0.0),
            Err(AnnealError::NonPositiveTemperature(_))
        ));
    }

    #[test]
    fn cooling() {
        assert_eq!(cool(1.0, 0.999), 0.999);
        let mut t = 1.0f64;
        for _ in 0..5000 {
            t = cool(t, 0.999);
        }
        // mpmath: 0.999^5000 = 6.7211119598656178e-3
        assert!((t - 6.721111959865618e-3).abs() / 6.721111959865618e-3 < 1e-12);
        let mut cfg = AnnealConfig::<f64>::new(4, 0);
        cfg.alpha = 1.0;
        assert!(matches!(cfg.validate(), Err(AnnealError::InvalidConfig(_))));
    }

    #[test]
    fn init_draws() {
        let set = grid(3);
        let mut rng = rng_for(1, 0);
        let all = init_solution(&set, 9, &mut rng).unwrap();
        assert_eq!(all.sorted_ids(), (0..9).collect::<Vec<_>>());
        let a = init_solution(&set, 4, &mut rng_for(5, 0)).unwrap();
        let b = init_solution(&set, 4, &mut rng_for(5, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            init_solution(&set, 1, &mut rng),
            Err(AnnealError::TooFewSamples(1))
        );
        assert!(matches!(
            init_solution(&set, 10, &mut rng),
            Err(AnnealError::InsufficientCandidates {
                available: 9,
                requested: 10
            })
        ));
    }

    #[test]
    fn spatial_move_tie_goes_to_smallest_id() {
        let set = validate_candidates(vec![
            unit(3, 0.0, 0.0, 0.5),
            unit(1, 1.0, 0.0, 0.5),
            unit(2, 0.0, 1.0, 0.5),
            unit(4, 1.0, 1.0, 0.5),
            unit(9, 50.0, 50.0, 0.5),
        ])
        .unwrap();
        let sol = evaluate_solution(&set, &[3, 1, 2, 4]);
        let p = perturb_spatial(&sol, &set, &mut rng_for(0, 0)).unwrap();
        assert_eq!(p.removed, 1);
        assert_eq!(p.added, 9);
        assert_eq!(p.member_ids, vec![3, 9, 2, 4]);
    }

    #[test]
    fn diversity_move_targets_lowest_mul() {
        let set = validate_candidates(vec![
            unit(0, 0.0, 0.0, 0.9),
            unit(1, 3.0, 0.0, 0.2),
            unit(2, 0.0, 5.0, 0.9),
            unit(3, 9.0, 9.0, 0.1),
        ])
        .unwrap();
        let sol = evaluate_solution(&set, &[0, 1, 2]);
        let p = perturb_diversity(&sol, &set, &mut rng_for(0, 0)).unwrap();
        assert_eq!((p.removed, p.added), (1, 3));

        let flat = validate_candidates(vec![
            unit(5, 0.0, 0.0, 0.4),
            unit(2, 3.0, 0.0, 0.4),
            unit(8, 0.0, 5.0, 0.4),
            unit(1, 9.0, 9.0, 0.4),
        ])
        .unwrap();
        let sol = evaluate_solution(&flat, &[5, 2, 8]);
        assert_eq!(
            perturb_diversity(&sol, &flat, &mut rng_for(0, 0))
                .unwrap()
                .removed,
            2
        );
    }

    #[test]
    fn exhausted_when_everything_selected() {
        let set = grid(2);
        let sol = evaluate_solution(&set, &[0, 1, 2, 3]);
        let mut rng = rng_for(0, 0);
        assert_eq!(
            perturb_spatial(&sol, &set, &mut rng),
            Err(AnnealError::ExhaustedCandidates)
        );
        assert_eq!(
            perturb_diversity(&sol, &set, &mut rng),
            Err(AnnealError::ExhaustedCandidates)
        );
    }

    #[test]
    fn proposals_keep_cardinality() {
        let set = grid(6);
        let mut rng = rng_for(11, 0);
        let mut sol = init_solution(&set, 8, &mut rng).unwrap();
        for _ in 0..200 {
            let p = perturb_spatial(&sol, &set, &mut rng).unwrap();
            let mut ids = p.member_ids.clone();
            ids.sort_unstable();
            ids.dedup();
            assert_eq!(ids.len(), 8);
            sol = evaluate_solution(&set, &p.member_ids);
        }
    }

    #[test]
    fn zero_iterations_when_t0_not_above_tol() {
        let set = grid(5);
        let mut cfg = AnnealConfig::new(6, 3);
        cfg.t0 = 1e-9;
        let out = run(&set, &cfg, Objectives::Dual).unwrap();
        assert!(out.trace.is_empty());
        assert_eq!(out.best, out.initial);
        assert_eq!(out.last, out.initial);
    }

    #[test]
    fn run_is_deterministic_and_monotone() {
        let set = grid(8);
        let mut cfg = AnnealConfig::new(10, 42);
        cfg.max_iters = 400;
        let a = run(&set, &cfg, Objectives::Dual).unwrap();
        let b = run(&set, &cfg, Objectives::Dual).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.len(), 400);
        for w in a.trace.windows(2) {
            assert!(w[1].cost_ann_best <= w[0].cost_ann_best);
            assert!(w[1].cost_amul_best <= w[0].cost_amul_best);
        }
        assert!(a.best.costs.ann <= a.initial.costs.ann);
        assert!(a.best.costs.amul <= a.initial.costs.amul);
        assert_eq!(
            evaluate_ids(&set, &a.best.member_ids).unwrap(),
            a.best.costs
        );
    }

    #[test]
    fn spatial_only_leaves_diversity_columns_empty() {
        let set = grid(8);
        let mut cfg = AnnealConfig::new(10, 1);
        cfg.max_iters = 100;
        let out = run(&set, &cfg, Objectives::SpatialOnly).unwrap();
        assert!(out
            .trace
            .iter()
            .all(|r| r.accepted_diversity.is_none() && r.p_diversity.is_none()));
        let mut buf = Vec::new();
        write_trace_csv(&out.trace[..1], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn missing_mul_is_reported() {
        let set = validate_candidates(vec![
            unit(0, 0.0, 0.0, 0.5),
            SamplingUnit::new(1, PlanarPoint::new(1.0, 0.0), 1.0),
            unit(2, 2.0, 0.0, 0.5),
        ])
        .unwrap();
        let cfg = AnnealConfig::new(2, 0);
        assert_eq!(
            run(&set, &cfg, Objectives::Dual),
            Err(AnnealError::MissingMul(1))
        );
    }

    fn evaluate_solution(set: &CandidateSet<f64>, ids: &[u64]) -> Solution<f64> {
        Solution {
            member_ids: ids.to_vec(),
            costs: evaluate_ids(set, ids).unwrap(),
        }
    }
}
