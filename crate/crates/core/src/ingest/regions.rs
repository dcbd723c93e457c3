use super::geometry::{PlanarPoint, PointLocation};
use super::{BusRecord, IngestError, NamedPolygon, PlanningArea, PopulationPoint};

#[derive(Clone, Debug, PartialEq)]
pub struct RegionAssignment {
    /// Input buses, same order, with `planning_area_id` and `is_urban` set.
    pub buses: Vec<BusRecord>,
    /// Ids of buses that fall in no planning area.
    pub unassigned: Vec<String>,
}

/// Index of the planning area containing `p`.
///
/// Strict interior wins. A point lying only on boundaries (typically a
/// shared border) goes to the area with the smallest id. Interior
/// membership in two areas is an overlap and is reported through `Err`
/// with the offending area ids.
fn containing_area(p: PlanarPoint, areas: &[PlanningArea]) -> Result<Option<usize>, Vec<String>> {
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    for (idx, area) in areas.iter().enumerate() {
        match area.boundary.locate(p) {
            PointLocation::Inside => interior.push(idx),
            PointLocation::OnBoundary => boundary.push(idx),
            PointLocation::Outside => {}
        }
    }
    match interior.len() {
        0 => Ok(boundary
            .into_iter()
            .min_by(|&a, &b| areas[a].id.cmp(&areas[b].id))),
        1 => Ok(Some(interior[0])),
        _ => {
            let mut ids: Vec<String> = interior.iter().map(|&i| areas[i].id.clone()).collect();
            ids.sort();
            Err(ids)
        }
    }
}

pub fn assign_regions(
    buses: &[BusRecord],
    planning_areas: &[PlanningArea],
    city_polygons: &[NamedPolygon],
) -> Result<RegionAssignment, IngestError> {
    let mut out = Vec::with_capacity(buses.len());
    let mut unassigned = Vec::new();
    for bus in buses {
        let area = containing_area(bus.location, planning_areas).map_err(|areas| {
            IngestError::OverlappingAreas {
                bus: bus.id.clone(),
                areas,
            }
        })?;
        let mut annotated = bus.clone();
        annotated.planning_area_id = area.map(|i| planning_areas[i].id.clone());
        annotated.is_urban = city_polygons
            .iter()
            .any(|c| c.polygon.locate(bus.location) != PointLocation::Outside);
        if annotated.planning_area_id.is_none() {
            unassigned.push(bus.id.clone());
        }
        out.push(annotated);
    }
    unassigned.sort();
    Ok(RegionAssignment {
        buses: out,
        unassigned,
    })
}

/// Sums population points into the planning areas that contain them.
/// Returned vector is parallel to `planning_areas`; points outside every
/// area are dropped.
pub fn aggregate_population(
    planning_areas: &[PlanningArea],
    points: &[PopulationPoint],
) -> Result<Vec<u64>, IngestError> {
    let mut totals = vec![0u64; planning_areas.len()];
    for pt in points {
        let area = containing_area(pt.location, planning_areas).map_err(|areas| {
            IngestError::OverlappingAreas {
                bus: format!("population point of {}", pt.city_id),
                areas,
            }
        })?;
        if let Some(i) = area {
            totals[i] += pt.population;
        }
    }
    Ok(totals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::geometry::PlanarPolygon;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> PlanarPolygon {
        PlanarPolygon::new(vec![vec![
            PlanarPoint::new(x0, y0),
            PlanarPoint::new(x1, y0),
            PlanarPoint::new(x1, y1),
            PlanarPoint::new(x0, y1),
        ]])
        .unwrap()
    }

    fn area(id: &str, poly: PlanarPolygon) -> PlanningArea {
        PlanningArea {
            id: id.into(),
            name: id.into(),
            boundary: poly,
            avg_hourly_load_mw: 0.0,
            population: 0,
        }
    }

    fn bus(id: &str, x: f64, y: f64) -> BusRecord {
        BusRecord {
            id: id.into(),
            name: id.into(),
            location: PlanarPoint::new(x, y),
            voltage_kv: 138.0,
            planning_area_id: None,
            is_urban: false,
        }
    }

    fn city(id: &str, poly: PlanarPolygon) -> NamedPolygon {
        NamedPolygon {
            id: id.into(),
            name: id.into(),
            polygon: poly,
        }
    }

    #[test]
    fn urban_rural_and_unassigned() {
        let areas = vec![area("60", rect(0.0, 0.0, 10.0, 10.0))];
        let cities = vec![city("EDM", rect(2.0, 2.0, 4.0, 4.0))];
        let buses = vec![bus("A", 3.0, 3.0), bus("B", 8.0, 8.0), bus("C", 20.0, 20.0)];
        let out = assign_regions(&buses, &areas, &cities).unwrap();
        assert_eq!(out.buses[0].planning_area_id.as_deref(), Some("60"));
        assert!(out.buses[0].is_urban);
        assert_eq!(out.buses[1].planning_area_id.as_deref(), Some("60"));
        assert!(!out.buses[1].is_urban);
        assert_eq!(out.buses[2].planning_area_id, None);
        assert_eq!(out.unassigned, vec!["C".to_string()]);
    }

    #[test]
    fn shared_border_goes_to_smallest_id() {
        let areas = vec![
            area("B", rect(0.0, 0.0, 10.0, 10.0)),
            area("A", rect(10.0, 0.0, 20.0, 10.0)),
        ];
        let out = assign_regions(&[bus("S", 10.0, 5.0)], &areas, &[]).unwrap();
        assert_eq!(out.buses[0].planning_area_id.as_deref(), Some("A"));
    }

    #[test]
    fn interior_overlap_is_an_error() {
        let areas = vec![
            area("1", rect(0.0, 0.0, 10.0, 10.0)),
            area("2", rect(5.0, 5.0, 15.0, 15.0)),
        ];
        let err = assign_regions(&[bus("S", 7.0, 7.0)], &areas, &[]).unwrap_err();
        assert!(
            matches!(err, IngestError::OverlappingAreas { ref areas, .. } if areas == &["1", "2"])
        );
    }

    #[test]
    fn record_order_does_not_matter() {
        let areas = vec![
            area("1", rect(0.0, 0.0, 10.0, 10.0)),
            area("2", rect(10.0, 0.0, 20.0, 10.0)),
        ];
        let cities = vec![city("X", rect(12.0, 1.0, 14.0, 3.0))];
        let buses = vec![bus("a", 1.0, 1.0), bus("b", 13.0, 2.0), bus("c", 30.0, 1.0)];
        let fwd = assign_regions(&buses, &areas, &cities).unwrap();
        let mut rev_buses = buses.clone();
        rev_buses.reverse();
        let mut rev_areas = areas.clone();
        rev_areas.reverse();
        let rev = assign_regions(&rev_buses, &rev_areas, &cities).unwrap();
        let mut a = fwd.buses.clone();
        let mut b = rev.buses.clone();
        a.sort_by(|x, y| x.id.cmp(&y.id));
        b.sort_by(|x, y| x.id.cmp(&y.id));
        assert_eq!(a, b);
        assert_eq!(fwd.unassigned, rev.unassigned);
    }

    #[test]
    fn population_sums_per_area() {
        let areas = vec![
            area("1", rect(0.0, 0.0, 10.0, 10.0)),
            area("2", rect(10.0, 0.0, 20.0, 10.0)),
        ];
        let pts = vec![
            PopulationPoint {
                city_id: "a".into(),
                location: PlanarPoint::new(1.0, 1.0),
                population: 100,
            },
            PopulationPoint {
                city_id: "b".into(),
                location: PlanarPoint::new(2.0, 1.0),
                population: 50,
            },
            PopulationPoint {
                city_id: "c".into(),
                location: PlanarPoint::new(15.0, 1.0),
                population: 7,
            },
            PopulationPoint {
                city_id: "d".into(),
                location: PlanarPoint::new(50.0, 1.0),
                population: 9,
            },
        ];
        assert_eq!(aggregate_population(&areas, &pts).unwrap(), vec![150, 7]);
    }
}
