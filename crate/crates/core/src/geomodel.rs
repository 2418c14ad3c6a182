//! Core domain types shared by every other module.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("duplicate unit id {0}")]
    DuplicateId(u64),
    #[error("field `{field}` out of range: {value}")]
    FieldOutOfRange { field: &'static str, value: f64 },
    #[error("candidate set is empty")]
    Empty,
    #[error("unknown unit id {0}")]
    UnknownId(u64),
}

/// A point in planar meters (x east, y north).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> PlanarPoint<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn try_new(x: T, y: T) -> Result<Self, GeoError> {
        if !x.is_finite() {
            return Err(out_of_range("x", x));
        }
        if !y.is_finite() {
            return Err(out_of_range("y", y));
        }
        Ok(Self { x, y })
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Self) -> T {
        self.distance_sq(other).sqrt()
    }

    pub fn distance_sq(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Hill numbers of orders 0, 1 and 2 for one unit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiversityProfile<T> {
    pub d0: T,
    pub d1: T,
    pub d2: T,
}

impl<T: Scalar> DiversityProfile<T> {
    pub fn new(d0: T, d1: T, d2: T) -> Self {
        Self { d0, d1, d2 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Value of the order-`q` Hill number, `q` in 0..=2.
    pub fn order(&self, q: usize) -> T {
        match q {
            0 => self.d0,
            1 => self.d1,
            2 => self.d2,
            _ => panic!("diversity profile holds orders 0..=2, got {q}"),
        }
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        for (field, v) in [("d0", self.d0), ("d1", self.d1), ("d2", self.d2)] {
            if !v.is_finite() || v < T::zero() {
                return Err(out_of_range(field, v));
            }
        }
        Ok(())
    }
}

/// One grid cell that may be selected as a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingUnit<T> {
    pub id: u64,
    pub centroid: PlanarPoint<T>,
    pub cell_side: T,
    pub builtup: T,
    pub poi_counts: BTreeMap<String, u64>,
    pub profile: Option<DiversityProfile<T>>,
    pub mul: Option<T>,
}

impl<T: Scalar> SamplingUnit<T> {
    pub fn new(id: u64, centroid: PlanarPoint<T>, cell_side: T) -> Self {
        Self {
            id,
            centroid,
            cell_side,
            builtup: T::zero(),
            poi_counts: BTreeMap::new(),
            profile: None,
            mul: None,
        }
    }

    pub fn with_builtup(mut self, builtup: T) -> Self {
        self.builtup = builtup;
        self
    }

    pub fn with_mul(mut self, mul: T) -> Self {
        self.mul = Some(mul);
        self
    }

    /// Nominal cell area; partial edge cells keep the full `cell_side²`.
    pub fn area(&self) -> T {
        self.cell_side * self.cell_side
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        if !self.centroid.x.is_finite() {
            return Err(out_of_range("x", self.centroid.x));
        }
        if !self.centroid.y.is_finite() {
            return Err(out_of_range("y", self.centroid.y));
        }
        if !self.cell_side.is_finite() || self.cell_side <= T::zero() {
            return Err(out_of_range("cell_side", self.cell_side));
        }
        if !in_unit_interval(self.builtup) {
            return Err(out_of_range("builtup", self.builtup));
        }
        if let Some(mul) = self.mul {
            if !in_unit_interval(mul) {
                return Err(out_of_range("mul", mul));
            }
        }
        if let Some(profile) = &self.profile {
            profile.validate()?;
        }
        Ok(())
    }
}

/// A validated set of candidate units with its covered area.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet<T> {
    units: Vec<SamplingUnit<T>>,
    total_area: T,
    by_id: HashMap<u64, usize>,
}

/// Checks every unit and builds a [`CandidateSet`].
///
/// `total_area` is the sum of nominal cell areas, i.e. `count × cell_side²`
/// on a regular grid.
pub fn validate_candidates<T: Scalar>(
    units: Vec<SamplingUnit<T>>,
) -> Result<CandidateSet<T>, GeoError> {
    if units.is_empty() {
        return Err(GeoError::Empty);
    }
    CandidateSet::from_units(units)
}

impl<T: Scalar> CandidateSet<T> {
    /// Like [`validate_candidates`] but accepts an empty list (an empty stratum).
    pub fn from_units(units: Vec<SamplingUnit<T>>) -> Result<Self, GeoError> {
        let mut by_id = HashMap::with_capacity(units.len());
        let mut total_area = T::zero();
        for (i, unit) in units.iter().enumerate() {
            unit.validate()?;
            if by_id.insert(unit.id, i).is_some() {
                return Err(GeoError::DuplicateId(unit.id));
            }
            total_area = total_area + unit.area();
        }
        Ok(Self {
            units,
            total_area,
            by_id,
        })
    }

    pub fn units(&self) -> &[SamplingUnit<T>] {
        &self.units
    }

    pub fn into_units(self) -> Vec<SamplingUnit<T>> {
        self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn total_area(&self) -> T {
        self.total_area
    }

    pub fn get(&self, id: u64) -> Option<&SamplingUnit<T>> {
        self.by_id.get(&id).map(|&i| &self.units[i])
    }

    pub fn position(&self, id: u64) -> Option<usize> {
        self.by_id.get(&id).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.units.iter().map(|u| u.id)
    }

    /// True when every unit carries a MUL value.
    pub fn is_enriched(&self) -> bool {
        self.units.iter().all(|u| u.mul.is_some())
    }
}

/// Values of the two objectives for one solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostPair<T> {
    pub ann: T,
    pub amul: T,
}

impl<T: Scalar> CostPair<T> {
    pub fn new(ann: T, amul: T) -> Self {
        Self { ann, amul }
    }

    /// No worse in both costs and strictly better in at least one.
    pub fn dominates(&self, other: &Self) -> bool {
        self.ann <= other.ann
            && self.amul <= other.amul
            && (self.ann < other.ann || self.amul < other.amul)
    }
}

/// A set of `N` distinct selected unit ids with its cached costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub member_ids: Vec<u64>,
    pub costs: CostPair<T>,
}

impl<T: Scalar> Solution<T> {
    pub fn len(&self) -> usize {
        self.member_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_ids.is_empty()
    }

    pub fn cost_ann(&self) -> T {
        self.costs.ann
    }

    pub fn cost_amul(&self) -> T {
        self.costs.amul
    }

    /// Member ids in ascending order.
    pub fn sorted_ids(&self) -> Vec<u64> {
        let mut ids = self.member_ids.clone();
        ids.sort_unstable();
        ids
    }

    /// Checks distinctness and membership in `candidates`.
    pub fn check_structure(&self, candidates: &CandidateSet<T>) -> Result<(), GeoError> {
        let mut seen = std::collections::HashSet::with_capacity(self.member_ids.len());
        for &id in &self.member_ids {
            if candidates.get(id).is_none() {
                return Err(GeoError::UnknownId(id));
            }
            if !seen.insert(id) {
                return Err(GeoError::DuplicateId(id));
            }
        }
        Ok(())
    }
}

fn in_unit_interval<T: Scalar>(v: T) -> bool {
    v.is_finite() && v >= T::zero() && v <= T::one()
}

pub(crate) fn out_of_range<T: Scalar>(field: &'static str, value: T) -> GeoError {
    GeoError::FieldOutOfRange {
        field,
        value: value.as_f64(),
    }
}
