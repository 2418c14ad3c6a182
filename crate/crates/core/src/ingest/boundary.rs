use serde_json::Value;

use super::{project_geographic, GeoOrigin, IngestError};
use crate::geomodel::{PlanarPoint, SamplingUnit};
use crate::scalar::Scalar;

/// Study-area outline: polygons with optional holes, in planar meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary<T> {
    /// Each polygon is a list of rings; the first is the outer ring.
    pub polygons: Vec<Vec<Vec<PlanarPoint<T>>>>,
}

impl<T: Scalar> Boundary<T> {
    /// Even-odd containment over every ring.
    pub fn contains(&self, p: &PlanarPoint<T>) -> bool {
        self.polygons
            .iter()
            .any(|rings| rings.iter().filter(|ring| ring_crossings(ring, p)).count() % 2 == 1)
    }

    /// Axis-aligned extent as `(min_x, min_y, max_x, max_y)`.
    pub fn extent(&self) -> Option<(T, T, T, T)> {
        let mut pts = self.polygons.iter().flatten().flatten().peekable();
        pts.peek()?;
        Some(pts.fold(
            (
                T::infinity(),
                T::infinity(),
                T::neg_infinity(),
                T::neg_infinity(),
            ),
            |(a, b, c, d), p| (a.min(p.x), b.min(p.y), c.max(p.x), d.max(p.y)),
        ))
    }
}

fn ring_crossings<T: Scalar>(ring: &[PlanarPoint<T>], p: &PlanarPoint<T>) -> bool {
    let mut inside = false;
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Parses a GeoJSON Polygon or MultiPolygon, bare or wrapped in a Feature or
/// FeatureCollection. With `origin` the coordinates are taken as lon/lat and
/// projected; without it they are used as planar meters.
pub fn parse_boundary_geojson<T: Scalar>(
    text: &str,
    origin: Option<GeoOrigin<T>>,
) -> Result<Boundary<T>, IngestError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| IngestError::InvalidBoundary(e.to_string()))?;
    let mut polygons = Vec::new();
    collect(&value, origin, &mut polygons)?;
    if polygons.is_empty() {
        return Err(IngestError::InvalidBoundary("no polygon found".into()));
    }
    Ok(Boundary { polygons })
}

type Polygon<T> = Vec<Vec<PlanarPoint<T>>>;

fn collect<T: Scalar>(
    value: &Value,
    origin: Option<GeoOrigin<T>>,
    out: &mut Vec<Polygon<T>>,
) -> Result<(), IngestError> {
    let kind = value.get("type").and_then(Value::as_str).unwrap_or("");
    match kind {
        "FeatureCollection" => {
            let features = value
                .get("features")
                .and_then(Value::as_array)
                .ok_or_else(|| IngestError::InvalidBoundary("features must be an array".into()))?;
            for f in features {
                collect(f, origin, out)?;
            }
        }
        "Feature" => {
            if let Some(g) = value.get("geometry") {
                collect(g, origin, out)?;
            }
        }
        "Polygon" => out.push(polygon(coords(value)?, origin)?),
        "MultiPolygon" => {
            for p in coords(value)?
                .as_array()
                .ok_or_else(|| IngestError::InvalidBoundary("MultiPolygon coordinates".into()))?
            {
                out.push(polygon(p, origin)?);
            }
        }
        other => {
            return Err(IngestError::InvalidBoundary(format!(
                "unsupported GeoJSON type `{other}`"
            )))
        }
    }
    Ok(())
}

fn coords(value: &Value) -> Result<&Value, IngestError> {
    value
        .get("coordinates")
        .ok_or_else(|| IngestError::InvalidBoundary("missing coordinates".into()))
}

fn polygon<T: Scalar>(
    rings: &Value,
    origin: Option<GeoOrigin<T>>,
) -> Result<Polygon<T>, IngestError> {
    let bad = |what: &str| IngestError::InvalidBoundary(format!("malformed {what}"));
    rings
        .as_array()
        .ok_or_else(|| bad("polygon"))?
        .iter()
        .map(|ring| {
            ring.as_array()
                .ok_or_else(|| bad("ring"))?
                .iter()
                .map(|pos| {
                    let pos = pos.as_array().ok_or_else(|| bad("position"))?;
                    let a = pos
                        .first()
                        .and_then(Value::as_f64)
                        .ok_or_else(|| bad("position"))?;
                    let b = pos
                        .get(1)
                        .and_then(Value::as_f64)
                        .ok_or_else(|| bad("position"))?;
                    let (a, b) = (T::of(a), T::of(b));
                    match origin {
                        Some(o) => project_geographic(a, b, o),
                        None => Ok(PlanarPoint::new(a, b)),
                    }
                })
                .collect()
        })
        .collect()
}

/// Keeps the units whose centroid falls inside the boundary.
pub fn filter_by_boundary<T: Scalar>(
    units: Vec<SamplingUnit<T>>,
    boundary: &Boundary<T>,
) -> Vec<SamplingUnit<T>> {
    units
        .into_iter()
        .filter(|u| boundary.contains(&u.centroid))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE_WITH_HOLE: &str = r#"{"type":"Feature","properties":{},"geometry":{"type":"Polygon","coordinates":[
        [[0,0],[10,0],[10,10],[0,10],[0,0]],
        [[4,4],[6,4],[6,6],[4,6],[4,4]]]}}"#;

    #[test]
    fn polygon_with_hole() {
        let b: Boundary<f64> = parse_boundary_geojson(SQUARE_WITH_HOLE, None).unwrap();
        assert!(b.contains(&PlanarPoint::new(1.0, 1.0)));
        assert!(!b.contains(&PlanarPoint::new(5.0, 5.0)));
        assert!(!b.contains(&PlanarPoint::new(11.0, 5.0)));
        assert_eq!(b.extent(), Some((0.0, 0.0, 10.0, 10.0)));
    }

    #[test]
    fn rejects_points() {
        let err = parse_boundary_geojson::<f64>(r#"{"type":"Point","coordinates":[0,0]}"#, None);
        assert!(matches!(err, Err(IngestError::InvalidBoundary(_))));
    }

    #[test]
    fn filters_cells() {
        let b: Boundary<f64> = parse_boundary_geojson(
            r#"{"type":"Polygon","coordinates":[[[0,0],[1500,0],[1500,1000],[0,1000],[0,0]]]}"#,
            None,
        )
        .unwrap();
        let units = vec![
            SamplingUnit::new(0, PlanarPoint::new(500.0, 500.0), 1000.0),
            SamplingUnit::new(1, PlanarPoint::new(1500.0 + 1.0, 500.0), 1000.0),
        ];
        let kept = filter_by_boundary(units, &b);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, 0);
    }
}
