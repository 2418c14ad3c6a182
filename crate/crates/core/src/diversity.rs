//! Hill numbers and the synthesized mixed-use level (MUL).
//!
//! Orders 0, 1 and 2 are supported. Order 1 uses the exp-Shannon limit since
//! the general exponent `1/(1-q)` is singular there. A unit with no POIs has
//! every Hill number equal to 0, so it lands at the bottom of the min-max
//! normalization.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geomodel::{DiversityProfile, SamplingUnit};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiversityError {
    #[error("unsupported Hill number order {0}; expected 0, 1 or 2")]
    UnsupportedOrder(u32),
    #[error("no diversity profiles to normalize")]
    EmptyInput,
    #[error("invalid proportions: {0}")]
    InvalidProportions(String),
    #[error("unit {0} has no diversity profile")]
    MissingProfile(u64),
}

/// Highest order of Hill number used in the MUL synthesis.
pub const MAX_ORDER: usize = 2;

/// Category proportions of one unit.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryDistribution<T> {
    proportions: Vec<T>,
    richness: usize,
}

impl<T: Scalar> CategoryDistribution<T> {
    /// Normalizes raw counts. All-zero (or no) counts give the empty distribution.
    pub fn from_counts<I: IntoIterator<Item = u64>>(counts: I) -> Self {
        let counts: Vec<u64> = counts.into_iter().collect();
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Self {
                proportions: vec![T::zero(); counts.len()],
                richness: 0,
            };
        }
        let total = T::of(total as f64);
        let proportions: Vec<T> = counts.iter().map(|&c| T::of(c as f64) / total).collect();
        let richness = counts.iter().filter(|&&c| c > 0).count();
        Self {
            proportions,
            richness,
        }
    }

    /// Accepts proportions that sum to 1 (within 1e-12 for `f64`) or are all zero.
    pub fn from_proportions(proportions: Vec<T>) -> Result<Self, DiversityError> {
        if let Some(bad) = proportions
            .iter()
            .find(|p| !p.is_finite() || **p < T::zero())
        {
            return Err(DiversityError::InvalidProportions(format!(
                "negative or non-finite entry {bad}"
            )));
        }
        let richness = proportions.iter().filter(|&&p| p > T::zero()).count();
        if richness > 0 {
            let sum: T = proportions.iter().copied().sum();
            let tol = T::of(1e-12).max(T::epsilon() * T::of_count(proportions.len().max(4)));
            if (sum - T::one()).abs() > tol {
                return Err(DiversityError::InvalidProportions(format!(
                    "proportions sum to {sum}"
                )));
            }
        }
        Ok(Self {
            proportions,
            richness,
        })
    }

    pub fn proportions(&self) -> &[T] {
        &self.proportions
    }

    /// Number of categories with a strictly positive share.
    pub fn richness(&self) -> usize {
        self.richness
    }

    fn positive(&self) -> impl Iterator<Item = T> + '_ {
        self.proportions.iter().copied().filter(|&p| p > T::zero())
    }
}

/// Hill number of order `q` (0, 1 or 2).
pub fn hill_number<T: Scalar>(dist: &CategoryDistribution<T>, q: u32) -> Result<T, DiversityError> {
    if q > MAX_ORDER as u32 {
        return Err(DiversityError::UnsupportedOrder(q));
    }
    if dist.richness == 0 {
        return Ok(T::zero());
    }
    let value = match q {
        0 => T::of_count(dist.richness),
        1 => {
            let entropy: T = dist.positive().map(|p| -p * p.ln()).sum();
            entropy.exp()
        }
        _ => {
            let simpson: T = dist.positive().map(|p| p * p).sum();
            T::one() / simpson
        }
    };
    Ok(value)
}

/// Hill numbers of orders 0..=2 from per-category POI counts.
pub fn diversity_profile<T: Scalar>(counts: &BTreeMap<String, u64>) -> DiversityProfile<T> {
    let dist = CategoryDistribution::<T>::from_counts(counts.values().copied());
    profile_of(&dist)
}

pub fn profile_of<T: Scalar>(dist: &CategoryDistribution<T>) -> DiversityProfile<T> {
    let h = |q| hill_number(dist, q).expect("orders 0..=2 are supported");
    DiversityProfile::new(h(0), h(1), h(2))
}

/// Min-max normalizes each order across all `profiles` and averages the
/// `MAX_ORDER + 1` normalized values per unit.
///
/// An order whose values are all equal normalizes to 0 for every unit. The
/// normalization population is exactly the slice passed in.
pub fn mixed_use_levels<T: Scalar>(
    profiles: &[DiversityProfile<T>],
) -> Result<Vec<T>, DiversityError> {
    if profiles.is_empty() {
        return Err(DiversityError::EmptyInput);
    }
    let mut mul = vec![T::zero(); profiles.len()];
    for q in 0..=MAX_ORDER {
        let (lo, hi) = profiles
            .iter()
            .map(|p| p.order(q))
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        let range = hi - lo;
        if range <= T::zero() {
            continue;
        }
        for (m, p) in mul.iter_mut().zip(profiles) {
            *m = *m + (p.order(q) - lo) / range;
        }
    }
    let divisor = T::of_count(MAX_ORDER + 1);
    Ok(mul
        .into_iter()
        .map(|m| (m / divisor).max(T::zero()).min(T::one()))
        .collect())
}

/// Computes profiles from POI counts and MUL across the whole slice.
pub fn enrich_units<T: Scalar>(units: &mut [SamplingUnit<T>]) -> Result<(), DiversityError> {
    let profiles: Vec<DiversityProfile<T>> = units
        .iter()
        .map(|u| diversity_profile(&u.poi_counts))
        .collect();
    let muls = mixed_use_levels(&profiles)?;
    for ((unit, profile), mul) in units.iter_mut().zip(profiles).zip(muls) {
        unit.profile = Some(profile);
        unit.mul = Some(mul);
    }
    Ok(())
}

/// Recomputes MUL from profiles already attached to the units.
pub fn renormalize_units<T: Scalar>(units: &mut [SamplingUnit<T>]) -> Result<(), DiversityError> {
    let profiles = units
        .iter()
        .map(|u| u.profile.ok_or(DiversityError::MissingProfile(u.id)))
        .collect::<Result<Vec<_>, _>>()?;
    let muls = mixed_use_levels(&profiles)?;
    for (unit, mul) in units.iter_mut().zip(muls) {
        unit.mul = Some(mul);
    }
    Ok(())
}
