//! Nearest-neighbor distances and the two sampling cost functions.

use thiserror::Error;

use crate::geomodel::PlanarPoint;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("mean nearest-neighbor distance is zero (all points coincide)")]
    ZeroMeanDistance,
    #[error("area must be positive, got {0}")]
    NonPositiveArea(f64),
    #[error("mean mixed-use level is zero")]
    ZeroMeanMul,
    #[error("no mixed-use levels given")]
    EmptyMul,
    #[error("mixed-use level {0} outside [0, 1]")]
    MulOutOfRange(f64),
}

/// Static 2-d tree over a fixed point set with exact nearest-neighbor queries.
///
/// Nodes live in one array; the subtree over `order[lo..hi]` splits at its
/// median `mid = (lo + hi) / 2` along `axis[mid]`.
#[derive(Debug, Clone)]
pub struct NnIndex<T> {
    points: Vec<PlanarPoint<T>>,
    order: Vec<usize>,
    axis: Vec<u8>,
}

impl<T: Scalar> NnIndex<T> {
    pub fn build(points: &[PlanarPoint<T>]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut axis = vec![0u8; points.len()];
        build_rec(points, &mut order, &mut axis, 0);
        Self {
            points: points.to_vec(),
            order,
            axis,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PlanarPoint<T>] {
        &self.points
    }

    /// Nearest point to `query` other than the point stored at `exclude`.
    /// Returns `(index, squared distance)`; ties go to the lower index.
    pub fn nearest_excluding(
        &self,
        query: &PlanarPoint<T>,
        exclude: Option<usize>,
    ) -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        self.search(0, self.order.len(), query, exclude, &mut best);
        best
    }

    pub fn nearest(&self, query: &PlanarPoint<T>) -> Option<(usize, T)> {
        self.nearest_excluding(query, None)
    }

    fn search(
        &self,
        lo: usize,
        hi: usize,
        query: &PlanarPoint<T>,
        exclude: Option<usize>,
        best: &mut Option<(usize, T)>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let idx = self.order[mid];
        if Some(idx) != exclude {
            let d = query.distance_sq(&self.points[idx]);
            let better = match *best {
                None => true,
                Some((bi, bd)) => d < bd || (d == bd && idx < bi),
            };
            if better {
                *best = Some((idx, d));
            }
        }
        let split = coord(&self.points[idx], self.axis[mid]);
        let diff = coord(query, self.axis[mid]) - split;
        let (near, far) = if diff < T::zero() {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, query, exclude, best);
        // `<=` keeps equal-distance candidates reachable for the index tie-break.
        let visit_far = match *best {
            None => true,
            Some((_, bd)) => diff * diff <= bd,
        };
        if visit_far {
            self.search(far.0, far.1, query, exclude, best);
        }
    }
}

fn coord<T: Scalar>(p: &PlanarPoint<T>, axis: u8) -> T {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

fn build_rec<T: Scalar>(
    points: &[PlanarPoint<T>],
    order: &mut [usize],
    axis: &mut [u8],
    depth: usize,
) {
    if order.is_empty() {
        return;
    }
    // split on the wider extent; fall back to alternating when degenerate
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (
        T::infinity(),
        T::neg_infinity(),
        T::infinity(),
        T::neg_infinity(),
    );
    for &i in order.iter() {
        let p = &points[i];
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let ax: u8 = if max_x - min_x > max_y - min_y {
        0
    } else if max_y - min_y > max_x - min_x {
        1
    } else {
        (depth % 2) as u8
    };
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        coord(&points[a], ax)
            .partial_cmp(&coord(&points[b], ax))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    axis[mid] = ax;
    let (left, rest) = order.split_at_mut(mid);
    let (left_axis, rest_axis) = axis.split_at_mut(mid);
    build_rec(points, left, left_axis, depth + 1);
    build_rec(points, &mut rest[1..], &mut rest_axis[1..], depth + 1);
}

/// Distance from each point to its nearest other point.
pub fn nearest_neighbor_distances<T: Scalar>(
    points: &[PlanarPoint<T>],
) -> Result<Vec<T>, SpatialError> {
    if points.len() < 2 {
        return Err(SpatialError::TooFewPoints(points.len()));
    }
    let index = NnIndex::build(points);
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (_, d2) = index
                .nearest_excluding(p, Some(i))
                .expect("at least one other point");
            d2.sqrt()
        })
        .collect())
}

/// Expected mean nearest-neighbor distance of a random pattern, `1 / (2√(N/A))`.
pub fn expected_nn_distance<T: Scalar>(n: usize, area: T) -> T {
    T::one() / (T::of(2.0) * (T::of_count(n) / area).sqrt())
}

/// Inverse of the average nearest-neighbor index: expected / observed mean
/// NN distance. No edge correction is applied.
pub fn cost_ann<T: Scalar>(points: &[PlanarPoint<T>], area: T) -> Result<T, SpatialError> {
    let distances = nearest_neighbor_distances(points)?;
    cost_ann_from_distances(&distances, area)
}

pub fn cost_ann_from_distances<T: Scalar>(distances: &[T], area: T) -> Result<T, SpatialError> {
    if distances.len() < 2 {
        return Err(SpatialError::TooFewPoints(distances.len()));
    }
    if !(area > T::zero()) || !area.is_finite() {
        return Err(SpatialError::NonPositiveArea(area.as_f64()));
    }
    let n = distances.len();
    let mean = distances.iter().copied().sum::<T>() / T::of_count(n);
    if !(mean > T::zero()) {
        return Err(SpatialError::ZeroMeanDistance);
    }
    Ok(expected_nn_distance(n, area) / mean)
}

/// Inverse of the mean mixed-use level.
pub fn cost_amul<T: Scalar>(muls: &[T]) -> Result<T, SpatialError> {
    if muls.is_empty() {
        return Err(SpatialError::EmptyMul);
    }
    if let Some(bad) = muls
        .iter()
        .find(|m| !m.is_finite() || **m < T::zero() || **m > T::one())
    {
        return Err(SpatialError::MulOutOfRange(bad.as_f64()));
    }
    let sum: T = muls.iter().copied().sum();
    if !(sum > T::zero()) {
        return Err(SpatialError::ZeroMeanMul);
    }
    Ok(T::of_count(muls.len()) / sum)
}
