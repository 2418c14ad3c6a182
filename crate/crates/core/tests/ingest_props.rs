use dualsample::geomodel::{validate_candidates, PlanarPoint, SamplingUnit};
use dualsample::ingest::{self, BoundingBox, GeoOrigin, LabeledPoint, Poi};
use proptest::prelude::*;

fn unit_strategy() -> impl Strategy<Value = SamplingUnit<f64>> {
    (
        -1e6f64..1e6,
        -1e6f64..1e6,
        1.0f64..5000.0,
        0.0f64..=1.0,
        prop::option::of((1.0f64..20.0, 1.0f64..10.0, 1.0f64..5.0, 0.0f64..=1.0)),
    )
        .prop_map(|(x, y, side, b, enriched)| {
            let mut u = SamplingUnit::new(0, PlanarPoint::new(x, y), side).with_builtup(b);
            if let Some((d0, d1, d2, mul)) = enriched {
                u.profile = Some(dualsample::geomodel::DiversityProfile::new(
                    d0,
                    d1.min(d0),
                    d2.min(d1).min(d0),
                ));
                u.mul = Some(mul);
            }
            u
        })
}

proptest! {
    #[test]
    fn units_csv_round_trips(mut units in prop::collection::vec(unit_strategy(), 1..40)) {
        for (i, u) in units.iter_mut().enumerate() {
            u.id = i as u64 * 3 + 1;
        }
        let mut buf = Vec::new();
        ingest::write_units_csv(&units, None, &mut buf).unwrap();
        let back: Vec<SamplingUnit<f64>> = ingest::parse_units_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), units.len());
        let all_enriched = units.iter().all(|u| u.mul.is_some());
        for (a, b) in units.iter().zip(&back) {
            prop_assert_eq!(a.id, b.id);
            prop_assert_eq!(a.centroid, b.centroid);
            prop_assert_eq!(a.cell_side, b.cell_side);
            prop_assert_eq!(a.builtup, b.builtup);
            if all_enriched {
                prop_assert_eq!(a.mul, b.mul);
                prop_assert_eq!(a.profile, b.profile);
            }
        }
        let mut again = Vec::new();
        ingest::write_units_csv(&back, None, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn validation_is_idempotent(mut units in prop::collection::vec(unit_strategy(), 1..40)) {
        for (i, u) in units.iter_mut().enumerate() {
            u.id = i as u64;
        }
        let once = validate_candidates(units).unwrap();
        let twice = validate_candidates(once.units().to_vec()).unwrap();
        prop_assert_eq!(once.units(), twice.units());
        prop_assert_eq!(once.total_area(), twice.total_area());
    }

    #[test]
    fn projection_inverts(lon0 in -179.0f64..179.0, lat0 in -80.0f64..80.0, dlon in -0.5f64..0.5, dlat in -0.5f64..0.5) {
        let origin = GeoOrigin::new(lon0, lat0).unwrap();
        let p = ingest::project_geographic(lon0 + dlon, lat0 + dlat, origin).unwrap();
        let (lon, lat) = ingest::unproject(p, origin);
        prop_assert!((lon - (lon0 + dlon)).abs() < 1e-9);
        prop_assert!((lat - (lat0 + dlat)).abs() < 1e-9);
    }

    #[test]
    fn poi_mass_is_conserved(
        cols in 1usize..8,
        rows in 1usize..8,
        pts in prop::collection::vec((-2000.0f64..10000.0, -2000.0f64..10000.0, 0u8..4), 0..300),
    ) {
        let bbox = BoundingBox::new(0.0, 0.0, cols as f64 * 1000.0, rows as f64 * 1000.0).unwrap();
        let mut grid = ingest::generate_grid(&bbox, 1000.0).unwrap();
        let pois: Vec<Poi<f64>> = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y, c))| Poi { id: i as u64, location: PlanarPoint::new(x, y), category: format!("k{c}") })
            .collect();
        let s = ingest::assign_pois_to_cells(&pois, &mut grid).unwrap();
        let in_cells: u64 = grid.iter().flat_map(|u| u.poi_counts.values()).sum();
        prop_assert_eq!(in_cells as usize + s.out_of_grid_count, pois.len());
        prop_assert_eq!(s.assigned as u64, in_cells);
    }

    #[test]
    fn builtup_stays_in_unit_interval(
        pts in prop::collection::vec((0.0f64..3000.0, 0.0f64..3000.0, any::<bool>()), 0..200),
    ) {
        let bbox = BoundingBox::new(0.0, 0.0, 3000.0, 3000.0).unwrap();
        let mut grid = ingest::generate_grid(&bbox, 1000.0).unwrap();
        let labeled: Vec<LabeledPoint<f64>> = pts
            .iter()
            .map(|&(x, y, b)| LabeledPoint { location: PlanarPoint::new(x, y), is_builtup: b })
            .collect();
        let s = ingest::assign_builtup(&labeled, &mut grid).unwrap();
        prop_assert_eq!(s.out_of_grid_count, 0);
        prop_assert!(grid.iter().all(|u| (0.0..=1.0).contains(&u.builtup)));
    }
}

#[test]
fn grid_covers_bbox_with_ceil_cells() {
    let bbox = BoundingBox::new(0.0, 0.0, 2500.0, 1000.0).unwrap();
    let grid = ingest::generate_grid(&bbox, 1000.0).unwrap();
    assert_eq!(grid.len(), 3);
    assert_eq!(grid[2].centroid, PlanarPoint::new(2500.0, 500.0));
}

#[test]
fn malformed_row_reports_its_line() {
    let text = "id,x,y,cell_side,builtup\n1,0,0,10,0.5\n2,0,oops,10,0.5\n";
    let err = ingest::parse_units_csv::<f64, _>(text.as_bytes()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains('3'), "{msg}");
}
