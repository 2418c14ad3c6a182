//! Grid generation, coordinate projection, and per-cell POI / built-up
//! aggregation.
//!
//! Cells use half-open intervals `[x0, x0 + side) × [y0, y0 + side)`, so a
//! point on a shared edge belongs to the cell to its right (or above).

mod boundary;
mod formats;

use std::collections::HashMap;

use thiserror::Error;

use crate::geomodel::{PlanarPoint, SamplingUnit};
use crate::scalar::Scalar;

pub use boundary::{filter_by_boundary, parse_boundary_geojson, Boundary};
pub use formats::{
    parse_class_map, parse_instance_pixels, parse_label_grid, parse_labeled_points, parse_pois_csv,
    parse_units_csv, write_units_csv, ClassMap, InstancePixels, LabeledPoint, PoiFile,
    UNITS_BASE_HEADER, UNITS_ENRICHED_HEADER,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("degenerate bounding box: max must exceed min on both axes")]
    DegenerateBox,
    #[error("cell side must be positive, got {0}")]
    NonPositiveCellSide(f64),
    #[error("latitude {0} is at or beyond a pole")]
    PoleLatitude(f64),
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),
    #[error("units do not form a regular grid: {0}")]
    IrregularGrid(String),
}

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, PartialEq)]
pub struct Poi<T> {
    pub id: u64,
    pub location: PlanarPoint<T>,
    pub category: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox<T> {
    pub min_x: T,
    pub min_y: T,
    pub max_x: T,
    pub max_y: T,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(min_x: T, min_y: T, max_x: T, max_y: T) -> Result<Self, IngestError> {
        let finite = [min_x, min_y, max_x, max_y].iter().all(|v| v.is_finite());
        if !finite || !(max_x > min_x) || !(max_y > min_y) {
            return Err(IngestError::DegenerateBox);
        }
        Ok(Self {
            min_x,
            min_y,
            max_x,
            max_y,
        })
    }

    pub fn width(&self) -> T {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> T {
        self.max_y - self.min_y
    }
}

/// Reference point of the local equirectangular projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoOrigin<T> {
    pub lon0: T,
    pub lat0: T,
}

impl<T: Scalar> GeoOrigin<T> {
    pub fn new(lon0: T, lat0: T) -> Result<Self, IngestError> {
        check_latitude(lat0)?;
        Ok(Self { lon0, lat0 })
    }
}

fn check_latitude<T: Scalar>(lat: T) -> Result<(), IngestError> {
    if !lat.is_finite() || lat.abs() >= T::of(90.0) {
        return Err(IngestError::PoleLatitude(lat.as_f64()));
    }
    Ok(())
}

/// Local equirectangular projection to meters east/north of `origin`.
pub fn project_geographic<T: Scalar>(
    lon: T,
    lat: T,
    origin: GeoOrigin<T>,
) -> Result<PlanarPoint<T>, IngestError> {
    check_latitude(origin.lat0)?;
    check_latitude(lat)?;
    let r = T::of(EARTH_RADIUS_M);
    let x = r * (lon - origin.lon0).to_radians() * origin.lat0.to_radians().cos();
    let y = r * (lat - origin.lat0).to_radians();
    Ok(PlanarPoint::new(x, y))
}

/// Inverse of [`project_geographic`]; returns `(lon, lat)`.
pub fn unproject<T: Scalar>(point: PlanarPoint<T>, origin: GeoOrigin<T>) -> (T, T) {
    let r = T::of(EARTH_RADIUS_M);
    let lat = origin.lat0 + (point.y / r).to_degrees();
    let lon = origin.lon0 + (point.x / (r * origin.lat0.to_radians().cos())).to_degrees();
    (lon, lat)
}

/// Tiles `bbox` row-major from `(min_x, min_y)`. Partial cells at the top and
/// right edges are kept at their nominal size.
pub fn generate_grid<T: Scalar>(
    bbox: &BoundingBox<T>,
    cell_side: T,
) -> Result<Vec<SamplingUnit<T>>, IngestError> {
    if !(cell_side > T::zero()) || !cell_side.is_finite() {
        return Err(IngestError::NonPositiveCellSide(cell_side.as_f64()));
    }
    let cols = (bbox.width() / cell_side)
        .ceil()
        .to_usize()
        .unwrap_or(0)
        .max(1);
    let rows = (bbox.height() / cell_side)
        .ceil()
        .to_usize()
        .unwrap_or(0)
        .max(1);
    let half = cell_side / T::of(2.0);
    let mut units = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let id = (row * cols + col) as u64;
            let cx = bbox.min_x + T::of_count(col) * cell_side + half;
            let cy = bbox.min_y + T::of_count(row) * cell_side + half;
            units.push(SamplingUnit::new(id, PlanarPoint::new(cx, cy), cell_side));
        }
    }
    Ok(units)
}

/// Lookup from a planar point to the unit whose cell contains it.
#[derive(Debug, Clone)]
pub struct GridLocator<T> {
    x0: T,
    y0: T,
    side: T,
    cells: HashMap<(i64, i64), usize>,
}

impl<T: Scalar> GridLocator<T> {
    /// Recovers the tiling from unit centroids. All units must share one
    /// cell side and sit on a common lattice.
    pub fn new(units: &[SamplingUnit<T>]) -> Result<Self, IngestError> {
        let first = units
            .first()
            .ok_or_else(|| IngestError::IrregularGrid("no units".into()))?;
        let side = first.cell_side;
        let half = side / T::of(2.0);
        let mut x0 = T::infinity();
        let mut y0 = T::infinity();
        for u in units {
            if u.cell_side != side {
                return Err(IngestError::IrregularGrid(format!(
                    "unit {} has cell_side {} but unit {} has {}",
                    u.id, u.cell_side, first.id, side
                )));
            }
            x0 = x0.min(u.centroid.x - half);
            y0 = y0.min(u.centroid.y - half);
        }
        let tol = T::of(1e-6);
        let mut cells = HashMap::with_capacity(units.len());
        for (i, u) in units.iter().enumerate() {
            let fc = (u.centroid.x - x0) / side - T::of(0.5);
            let fr = (u.centroid.y - y0) / side - T::of(0.5);
            let (c, r) = (fc.round(), fr.round());
            if (fc - c).abs() > tol || (fr - r).abs() > tol {
                return Err(IngestError::IrregularGrid(format!(
                    "unit {} is off the lattice",
                    u.id
                )));
            }
            let key = (
                c.to_i64().unwrap_or(i64::MIN),
                r.to_i64().unwrap_or(i64::MIN),
            );
            if cells.insert(key, i).is_some() {
                return Err(IngestError::IrregularGrid(format!(
                    "unit {} overlaps another cell",
                    u.id
                )));
            }
        }
        Ok(Self {
            x0,
            y0,
            side,
            cells,
        })
    }

    /// Index of the unit whose half-open cell contains `p`.
    pub fn locate(&self, p: &PlanarPoint<T>) -> Option<usize> {
        if !p.is_finite() {
            return None;
        }
        let c = ((p.x - self.x0) / self.side).floor().to_i64()?;
        let r = ((p.y - self.y0) / self.side).floor().to_i64()?;
        self.cells.get(&(c, r)).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AssignmentSummary {
    pub assigned: usize,
    pub out_of_grid_count: usize,
}

/// Adds each POI to the `poi_counts` of the cell containing it. POIs outside
/// every cell are only counted.
pub fn assign_pois_to_cells<T: Scalar>(
    pois: &[Poi<T>],
    grid: &mut [SamplingUnit<T>],
) -> Result<AssignmentSummary, IngestError> {
    let locator = GridLocator::new(grid)?;
    let mut summary = AssignmentSummary::default();
    for poi in pois {
        match locator.locate(&poi.location) {
            Some(i) => {
                *grid[i].poi_counts.entry(poi.category.clone()).or_insert(0) += 1;
                summary.assigned += 1;
            }
            None => summary.out_of_grid_count += 1,
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuiltupEstimate<T> {
    pub fraction: T,
    /// No labeled points fell in the cell; `fraction` is 0.
    pub empty_cell: bool,
}

/// Share of built-up labels among points already filtered to one cell.
pub fn compute_builtup<T: Scalar>(
    _cell: &SamplingUnit<T>,
    labeled_points: &[(PlanarPoint<T>, bool)],
) -> BuiltupEstimate<T> {
    if labeled_points.is_empty() {
        return BuiltupEstimate {
            fraction: T::zero(),
            empty_cell: true,
        };
    }
    let built = labeled_points.iter().filter(|(_, b)| *b).count();
    BuiltupEstimate {
        fraction: T::of_count(built) / T::of_count(labeled_points.len()),
        empty_cell: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuiltupSummary {
    pub empty_cells: usize,
    pub out_of_grid_count: usize,
}

/// Groups labeled points by cell and sets each unit's `builtup`.
pub fn assign_builtup<T: Scalar>(
    points: &[LabeledPoint<T>],
    grid: &mut [SamplingUnit<T>],
) -> Result<BuiltupSummary, IngestError> {
    let locator = GridLocator::new(grid)?;
    let mut per_cell: Vec<Vec<(PlanarPoint<T>, bool)>> = vec![Vec::new(); grid.len()];
    let mut summary = BuiltupSummary::default();
    for p in points {
        match locator.locate(&p.location) {
            Some(i) => per_cell[i].push((p.location, p.is_builtup)),
            None => summary.out_of_grid_count += 1,
        }
    }
    for (unit, pts) in grid.iter_mut().zip(&per_cell) {
        let est = compute_builtup(unit, pts);
        unit.builtup = est.fraction;
        if est.empty_cell {
            summary.empty_cells += 1;
        }
    }
    Ok(summary)
}
