use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{project_geographic, GeoOrigin, IngestError, Poi};
use crate::geomodel::{DiversityProfile, PlanarPoint, SamplingUnit};
use crate::metrics::{LabelGrid, PixelClassCounts};
use crate::scalar::Scalar;

pub const UNITS_BASE_HEADER: [&str; 5] = ["id", "x", "y", "cell_side", "builtup"];
pub const UNITS_ENRICHED_HEADER: [&str; 4] = ["d0", "d1", "d2", "mul"];

fn reader<R: Read>(input: R, has_headers: bool) -> csv::Reader<R> {
    ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(Trim::All)
        .from_reader(input)
}

fn csv_err(e: csv::Error) -> IngestError {
    match e.position() {
        Some(pos) => IngestError::MalformedRow {
            line: pos.line(),
            reason: e.to_string(),
        },
        None => IngestError::Csv(e.to_string()),
    }
}

struct Columns {
    headers: StringRecord,
}

impl Columns {
    fn find(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, name: &str) -> Result<usize, IngestError> {
        self.find(name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    }
}

fn line_of(record: &StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn field<V: FromStr>(record: &StringRecord, col: usize, name: &str) -> Result<V, IngestError> {
    let raw = record.get(col).unwrap_or("");
    raw.parse().map_err(|_| IngestError::MalformedRow {
        line: line_of(record),
        reason: format!("cannot parse `{name}` from {raw:?}"),
    })
}

/// Reads the units CSV (`id,x,y,cell_side,builtup`, optionally followed by
/// `d0,d1,d2,mul`). Unknown columns are ignored.
pub fn parse_units_csv<T: Scalar, R: Read>(input: R) -> Result<Vec<SamplingUnit<T>>, IngestError> {
    let mut rdr = reader(input, true);
    let cols = Columns {
        headers: rdr.headers().map_err(csv_err)?.clone(),
    };
    let base: Vec<usize> = UNITS_BASE_HEADER
        .iter()
        .map(|c| cols.require(c))
        .collect::<Result<_, _>>()?;
    let enriched: Vec<Option<usize>> = UNITS_ENRICHED_HEADER.iter().map(|c| cols.find(c)).collect();
    let has_profile = enriched[..3].iter().all(Option::is_some);
    if enriched[..3].iter().any(Option::is_some) && !has_profile {
        let missing = UNITS_ENRICHED_HEADER[..3]
            .iter()
            .zip(&enriched)
            .find(|(_, c)| c.is_none())
            .map(|(n, _)| *n)
            .unwrap_or("d0");
        return Err(IngestError::MissingColumn(missing.to_string()));
    }

    let mut units = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let mut unit = SamplingUnit::new(
            field(&rec, base[0], "id")?,
            PlanarPoint::new(field(&rec, base[1], "x")?, field(&rec, base[2], "y")?),
            field(&rec, base[3], "cell_side")?,
        )
        .with_builtup(field(&rec, base[4], "builtup")?);
        if has_profile {
            unit.profile = Some(DiversityProfile::new(
                field(&rec, enriched[0].unwrap(), "d0")?,
                field(&rec, enriched[1].unwrap(), "d1")?,
                field(&rec, enriched[2].unwrap(), "d2")?,
            ));
        }
        if let Some(c) = enriched[3] {
            unit.mul = Some(field(&rec, c, "mul")?);
        }
        unit.validate().map_err(|e| IngestError::MalformedRow {
            line: line_of(&rec),
            reason: e.to_string(),
        })?;
        units.push(unit);
    }
    Ok(units)
}

/// Writes the units CSV. Enrichment columns are written when every unit
/// carries a profile and MUL; `extra` appends one constant-valued column.
pub fn write_units_csv<T: Scalar, W: Write>(
    units: &[SamplingUnit<T>],
    extra: Option<(&str, &str)>,
    mut out: W,
) -> std::io::Result<()> {
    let enriched =
        !units.is_empty() && units.iter().all(|u| u.profile.is_some() && u.mul.is_some());
    let mut header = UNITS_BASE_HEADER.join(",");
    if enriched {
        header.push(',');
        header.push_str(&UNITS_ENRICHED_HEADER.join(","));
    }
    if let Some((name, _)) = extra {
        header.push(',');
        header.push_str(name);
    }
    writeln!(out, "{header}")?;
    for u in units {
        write!(
            out,
            "{},{},{},{},{}",
            u.id, u.centroid.x, u.centroid.y, u.cell_side, u.builtup
        )?;
        if enriched {
            let p = u.profile.expect("checked above");
            write!(
                out,
                ",{},{},{},{}",
                p.d0,
                p.d1,
                p.d2,
                u.mul.expect("checked above")
            )?;
        }
        if let Some((_, value)) = extra {
            write!(out, ",{value}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoiFile<T> {
    pub pois: Vec<Poi<T>>,
    /// Projection origin used for a lon/lat file; `None` for planar files.
    pub origin: Option<GeoOrigin<T>>,
    /// The origin was derived as the centroid of the file's points.
    pub origin_derived: bool,
}

enum CoordKind {
    Planar(usize, usize),
    Geographic(usize, usize),
}

fn coord_kind(cols: &Columns) -> Result<CoordKind, IngestError> {
    if let (Some(x), Some(y)) = (cols.find("x"), cols.find("y")) {
        return Ok(CoordKind::Planar(x, y));
    }
    if let (Some(lon), Some(lat)) = (cols.find("lon"), cols.find("lat")) {
        return Ok(CoordKind::Geographic(lon, lat));
    }
    Err(IngestError::MissingColumn(if cols.find("lon").is_some() {
        "lat".into()
    } else if cols.find("x").is_some() {
        "y".into()
    } else {
        "x".into()
    }))
}

/// Reads `id,lon,lat,category` or `id,x,y,category`. A geographic file with
/// no `origin` is projected about the mean of its own coordinates.
pub fn parse_pois_csv<T: Scalar, R: Read>(
    input: R,
    origin: Option<GeoOrigin<T>>,
) -> Result<PoiFile<T>, IngestError> {
    let mut rdr = reader(input, true);
    let cols = Columns {
        headers: rdr.headers().map_err(csv_err)?.clone(),
    };
    let id_col = cols.require("id")?;
    let kind = coord_kind(&cols)?;
    let cat_col = cols.require("category")?;

    let mut raw = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let (a, b) = match kind {
            CoordKind::Planar(x, y) => (x, y),
            CoordKind::Geographic(lon, lat) => (lon, lat),
        };
        let category = rec.get(cat_col).unwrap_or("").to_string();
        if category.is_empty() {
            return Err(IngestError::MalformedRow {
                line: line_of(&rec),
                reason: "empty category".into(),
            });
        }
        let u: T = field(&rec, a, "coordinate")?;
        let v: T = field(&rec, b, "coordinate")?;
        if !u.is_finite() || !v.is_finite() {
            return Err(IngestError::MalformedRow {
                line: line_of(&rec),
                reason: "non-finite coordinate".into(),
            });
        }
        raw.push((
            field::<u64>(&rec, id_col, "id")?,
            u,
            v,
            category,
            line_of(&rec),
        ));
    }

    match kind {
        CoordKind::Planar(..) => Ok(PoiFile {
            pois: raw
                .into_iter()
                .map(|(id, x, y, category, _)| Poi {
                    id,
                    location: PlanarPoint::new(x, y),
                    category,
                })
                .collect(),
            origin: None,
            origin_derived: false,
        }),
        CoordKind::Geographic(..) => {
            let (origin, derived) = match origin {
                Some(o) => (o, false),
                None => (centroid_origin(raw.iter().map(|r| (r.1, r.2)))?, true),
            };
            let pois = raw
                .into_iter()
                .map(|(id, lon, lat, category, line)| {
                    let location = project_geographic(lon, lat, origin).map_err(|e| {
                        IngestError::MalformedRow {
                            line,
                            reason: e.to_string(),
                        }
                    })?;
                    Ok(Poi {
                        id,
                        location,
                        category,
                    })
                })
                .collect::<Result<_, IngestError>>()?;
            Ok(PoiFile {
                pois,
                origin: Some(origin),
                origin_derived: derived,
            })
        }
    }
}

fn centroid_origin<T: Scalar>(
    coords: impl Iterator<Item = (T, T)>,
) -> Result<GeoOrigin<T>, IngestError> {
    let (mut sx, mut sy, mut n) = (T::zero(), T::zero(), 0usize);
    for (lon, lat) in coords {
        sx = sx + lon;
        sy = sy + lat;
        n += 1;
    }
    if n == 0 {
        return GeoOrigin::new(T::zero(), T::zero());
    }
    GeoOrigin::new(sx / T::of_count(n), sy / T::of_count(n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint<T> {
    pub location: PlanarPoint<T>,
    pub is_builtup: bool,
}

/// Reads land-cover sample points: `x,y,builtup` or `lon,lat,builtup` with a
/// 0/1 flag. Geographic files need an explicit origin.
pub fn parse_labeled_points<T: Scalar, R: Read>(
    input: R,
    origin: Option<GeoOrigin<T>>,
) -> Result<Vec<LabeledPoint<T>>, IngestError> {
    let mut rdr = reader(input, true);
    let cols = Columns {
        headers: rdr.headers().map_err(csv_err)?.clone(),
    };
    let kind = coord_kind(&cols)?;
    let flag_col = cols.require("builtup")?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let is_builtup = match rec.get(flag_col).unwrap_or("") {
            "1" | "true" => true,
            "0" | "false" => false,
            other => {
                return Err(IngestError::MalformedRow {
                    line: line_of(&rec),
                    reason: format!("builtup flag must be 0 or 1, got {other:?}"),
                })
            }
        };
        let location = match kind {
            CoordKind::Planar(x, y) => PlanarPoint::new(field(&rec, x, "x")?, field(&rec, y, "y")?),
            CoordKind::Geographic(lon, lat) => {
                let origin = origin.ok_or_else(|| IngestError::MalformedRow {
                    line: line_of(&rec),
                    reason: "lon/lat land-cover points require a projection origin".into(),
                })?;
                project_geographic(field(&rec, lon, "lon")?, field(&rec, lat, "lat")?, origin)
                    .map_err(|e| IngestError::MalformedRow {
                        line: line_of(&rec),
                        reason: e.to_string(),
                    })?
            }
        };
        out.push(LabeledPoint {
            location,
            is_builtup,
        });
    }
    Ok(out)
}

/// Headerless CSV of integer labels, one line per pixel row.
pub fn parse_label_grid<R: Read>(input: R) -> Result<LabelGrid, IngestError> {
    let mut rdr = reader(input, false);
    let mut cells = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        if cols.is_some_and(|c| c != rec.len()) {
            return Err(IngestError::MalformedRow {
                line: line_of(&rec),
                reason: format!("expected {} values, got {}", cols.unwrap_or(0), rec.len()),
            });
        }
        cols = Some(rec.len());
        for i in 0..rec.len() {
            cells.push(field::<u32>(&rec, i, "label")?);
        }
        rows += 1;
    }
    Ok(LabelGrid::new(rows, cols.unwrap_or(0), cells))
}

/// Class list in declared order; the order breaks majority-vote ties.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassMap {
    pub ids: Vec<u32>,
    pub names: Vec<String>,
}

impl ClassMap {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ordinal(&self, class_id: u32) -> Option<usize> {
        self.ids.iter().position(|&c| c == class_id)
    }
}

/// Reads `class_id,class_name`.
pub fn parse_class_map<R: Read>(input: R) -> Result<ClassMap, IngestError> {
    let mut rdr = reader(input, true);
    let cols = Columns {
        headers: rdr.headers().map_err(csv_err)?.clone(),
    };
    let id_col = cols.require("class_id")?;
    let name_col = cols.require("class_name")?;
    let mut map = ClassMap::default();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let id: u32 = field(&rec, id_col, "class_id")?;
        if map.ordinal(id).is_some() {
            return Err(IngestError::MalformedRow {
                line: line_of(&rec),
                reason: format!("duplicate class_id {id}"),
            });
        }
        map.ids.push(id);
        map.names.push(rec.get(name_col).unwrap_or("").to_string());
    }
    Ok(map)
}

/// Per-instance pixel counts keyed by instance id.
pub type InstancePixels = BTreeMap<u64, PixelClassCounts>;

/// Reads `instance_id,class_id,count`; class ids resolve through `classes`.
pub fn parse_instance_pixels<R: Read>(
    input: R,
    classes: &ClassMap,
) -> Result<InstancePixels, IngestError> {
    let mut rdr = reader(input, true);
    let cols = Columns {
        headers: rdr.headers().map_err(csv_err)?.clone(),
    };
    let inst_col = cols.require("instance_id")?;
    let class_col = cols.require("class_id")?;
    let count_col = cols.require("count")?;
    let mut out = InstancePixels::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let instance: u64 = field(&rec, inst_col, "instance_id")?;
        let class_id: u32 = field(&rec, class_col, "class_id")?;
        let count: u64 = field(&rec, count_col, "count")?;
        let ordinal = classes
            .ordinal(class_id)
            .ok_or_else(|| IngestError::MalformedRow {
                line: line_of(&rec),
                reason: format!("class_id {class_id} not in class map"),
            })?;
        out.entry(instance)
            .or_insert_with(|| PixelClassCounts::new(vec![0; classes.len()]))
            .add(ordinal, count);
    }
    Ok(out)
}
