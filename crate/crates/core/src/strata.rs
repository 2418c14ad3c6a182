//! Built-up stratification and per-stratum sample allocation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geomodel::{out_of_range, CandidateSet, GeoError, SamplingUnit};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrataError {
    #[error("no built-up values to take a quantile of")]
    EmptyInput,
    #[error("{stratum} stratum has {available} units but {requested} were allocated")]
    InsufficientCandidates {
        stratum: Stratum,
        available: usize,
        requested: usize,
    },
    #[error(transparent)]
    Geo(#[from] GeoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stratum {
    Dense,
    Sparse,
}

impl Stratum {
    pub const ALL: [Stratum; 2] = [Stratum::Dense, Stratum::Sparse];

    pub fn as_str(&self) -> &'static str {
        match self {
            Stratum::Dense => "dense",
            Stratum::Sparse => "sparse",
        }
    }

    /// RNG stream index for runs on this stratum.
    pub fn stream(&self) -> u64 {
        match self {
            Stratum::Dense => 0,
            Stratum::Sparse => 1,
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stratum {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dense" => Ok(Stratum::Dense),
            "sparse" => Ok(Stratum::Sparse),
            other => Err(format!(
                "unknown stratum `{other}` (expected dense or sparse)"
            )),
        }
    }
}

/// Lower quartile with linear interpolation between order statistics at
/// zero-based rank `0.25 * (n - 1)`.
pub fn quartile_threshold<T: Scalar>(builtups: &[T]) -> Result<T, StrataError> {
    quantile(builtups, T::of(0.25))
}

pub fn quantile<T: Scalar>(values: &[T], prob: T) -> Result<T, StrataError> {
    if values.is_empty() {
        return Err(StrataError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let pos = prob * T::of_count(sorted.len() - 1);
    let lo = pos.floor();
    let i = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let frac = pos - lo;
    if i + 1 >= sorted.len() || frac == T::zero() {
        return Ok(sorted[i]);
    }
    Ok(sorted[i] + frac * (sorted[i + 1] - sorted[i]))
}

/// Checks a user-supplied threshold lies in `[0, 1]`.
pub fn check_threshold<T: Scalar>(threshold: T) -> Result<T, GeoError> {
    if threshold.is_finite() && threshold >= T::zero() && threshold <= T::one() {
        Ok(threshold)
    } else {
        Err(out_of_range("threshold", threshold))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stratification<T> {
    pub threshold: T,
    pub dense: CandidateSet<T>,
    pub sparse: CandidateSet<T>,
}

impl<T: Scalar> Stratification<T> {
    pub fn stratum(&self, s: Stratum) -> &CandidateSet<T> {
        match s {
            Stratum::Dense => &self.dense,
            Stratum::Sparse => &self.sparse,
        }
    }
}

/// Splits units into dense (`builtup >= threshold`) and sparse. Either side
/// may come out empty.
pub fn stratify<T: Scalar>(
    units: &CandidateSet<T>,
    threshold: T,
) -> Result<Stratification<T>, StrataError> {
    check_threshold(threshold)?;
    let (dense, sparse): (Vec<SamplingUnit<T>>, Vec<SamplingUnit<T>>) = units
        .units()
        .iter()
        .cloned()
        .partition(|u| u.builtup >= threshold);
    Ok(Stratification {
        threshold,
        dense: CandidateSet::from_units(dense)?,
        sparse: CandidateSet::from_units(sparse)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Allocation {
    pub n_dense: usize,
    pub n_sparse: usize,
}

impl Allocation {
    pub fn total(&self) -> usize {
        self.n_dense + self.n_sparse
    }

    pub fn for_stratum(&self, s: Stratum) -> usize {
        match s {
            Stratum::Dense => self.n_dense,
            Stratum::Sparse => self.n_sparse,
        }
    }

    /// Fails when either stratum holds fewer units than allocated to it.
    pub fn check<T: Scalar>(&self, strata: &Stratification<T>) -> Result<(), StrataError> {
        for s in Stratum::ALL {
            let available = strata.stratum(s).len();
            let requested = self.for_stratum(s);
            if available < requested {
                return Err(StrataError::InsufficientCandidates {
                    stratum: s,
                    available,
                    requested,
                });
            }
        }
        Ok(())
    }
}

/// `n_dense = round(n_total * dense_fraction)`, half away from zero.
pub fn allocate<T: Scalar>(n_total: usize, dense_fraction: T) -> Result<Allocation, GeoError> {
    if !(dense_fraction >= T::zero() && dense_fraction <= T::one()) {
        return Err(out_of_range("dense_fraction", dense_fraction));
    }
    let n_dense = (T::of_count(n_total) * dense_fraction)
        .round()
        .to_usize()
        .unwrap_or(0)
        .min(n_total);
    Ok(Allocation {
        n_dense,
        n_sparse: n_total - n_dense,
    })
}
