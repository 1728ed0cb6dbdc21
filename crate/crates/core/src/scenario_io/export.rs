use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

use crate::framework::{AllocationSolution, RouteArchive};
use crate::noise::{GridGeometry, Period};
use crate::trajectory::TrackVertex;

/// One row of a front export. Distance and flight time are summed over all movements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontRow {
    pub solution_id: usize,
    #[serde(rename = "N_pa")]
    pub n_pa: f64,
    /// kg
    #[serde(rename = "T_fuel")]
    pub t_fuel: f64,
    pub distance_km: f64,
    pub flight_time_h: f64,
}

/// Front rows of a Step-1 archive under its design counts.
pub fn front_rows_for_archive(archive: &RouteArchive) -> Vec<FrontRow> {
    archive
        .entries
        .iter()
        .enumerate()
        .map(|(n, e)| {
            let moves = archive.design_counts.iter().map(|c| c.iter().sum::<u32>() as f64);
            let (d, t) = moves
                .zip(e.distance.iter().zip(&e.flight_time))
                .fold((0.0, 0.0), |(d, t), (m, (de, te))| (d + m * de, t + m * te));
            FrontRow {
                solution_id: n,
                n_pa: e.objectives[0],
                t_fuel: e.objectives[1],
                distance_km: d / 1000.0,
                flight_time_h: t / 3600.0,
            }
        })
        .collect()
}

/// Front rows of allocation solutions; `archives` are the route archives they index into.
pub fn front_rows_for_allocation(solutions: &[AllocationSolution], archives: &[RouteArchive]) -> Vec<FrontRow> {
    solutions
        .iter()
        .enumerate()
        .map(|(n, s)| {
            let (mut d, mut t) = (0.0, 0.0);
            for (k, (&r, a)) in s.routes.iter().zip(archives).enumerate() {
                let e = &a.entries[r];
                for i in 0..s.counts.types() {
                    let m = s.counts.movements(k, i) as f64;
                    d += m * e.distance[i];
                    t += m * e.flight_time[i];
                }
            }
            FrontRow {
                solution_id: n,
                n_pa: s.objectives[0],
                t_fuel: s.objectives[1],
                distance_km: d / 1000.0,
                flight_time_h: t / 3600.0,
            }
        })
        .collect()
}

pub fn front_csv(rows: &[FrontRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(["solution_id", "N_pa", "T_fuel", "distance_km", "flight_time_h"])
            .expect("in-memory write");
    }
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

/// Allocation tables: one row per (solution, SID, aircraft type) with the
/// `[day, evening, night]` counts.
pub fn allocation_table_csv(solutions: &[AllocationSolution], archives: &[RouteArchive]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["solution_id", "sid", "route", "aircraft", "day", "evening", "night", "counts"])
        .expect("in-memory write");
    for (n, s) in solutions.iter().enumerate() {
        for (k, (&r, a)) in s.routes.iter().zip(archives).enumerate() {
            for (i, name) in a.aircraft.iter().enumerate() {
                let c = Period::ALL.map(|p| s.counts.get(k, i, p));
                w.write_record([
                    n.to_string(),
                    a.sid.clone(),
                    r.to_string(),
                    name.clone(),
                    c[0].to_string(),
                    c[1].to_string(),
                    c[2].to_string(),
                    format!("[{}, {}, {}]", c[0], c[1], c[2]),
                ])
                .expect("in-memory write");
            }
        }
    }
    w.into_inner().expect("in-memory write")
}

/// Ground tracks as a GeoJSON FeatureCollection of LineStrings in scenario
/// plane coordinates. `selection` picks `(solution_id, archive, entry)` triples.
pub fn tracks_geojson(selection: &[(usize, &RouteArchive, usize)]) -> String {
    let features: Vec<_> = selection
        .iter()
        .map(|&(id, a, r)| {
            let e = &a.entries[r];
            let coords: Vec<[f64; 2]> = e.track.iter().map(|v: &TrackVertex| [v.x, v.y]).collect();
            json!({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {
                    "solution_id": id,
                    "sid": a.sid,
                    "route": r,
                    "mode": a.mode.to_string(),
                    "N_pa": e.objectives[0],
                    "T_fuel": e.objectives[1],
                },
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&json!({"type": "FeatureCollection", "features": features}))
        .expect("GeoJSON serializes");
    s.push('\n');
    s
}

/// Vertical profiles of every archive entry and aircraft type.
pub fn profiles_csv(archive: &RouteArchive) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["solution_id", "aircraft", "time_s", "s_m", "h_m", "v_eas_m_s", "thrust_n"])
        .expect("in-memory write");
    for (n, e) in archive.entries.iter().enumerate() {
        for (name, p) in archive.aircraft.iter().zip(&e.profiles) {
            for q in p {
                w.write_record([
                    n.to_string(),
                    name.clone(),
                    q.time.to_string(),
                    q.s.to_string(),
                    q.h.to_string(),
                    q.v_eas.to_string(),
                    q.thrust.to_string(),
                ])
                .expect("in-memory write");
            }
        }
    }
    w.into_inner().expect("in-memory write")
}

/// ESRI ASCII grid with 1 where `lden ≥ threshold_db` and 0 elsewhere; rows run north to south.
pub fn lden_contour_ascii(geometry: &GridGeometry, lden: &[f64], threshold_db: f64) -> String {
    let mut s = String::new();
    let half = geometry.cell_size / 2.0;
    writeln!(s, "ncols {}", geometry.nx).unwrap();
    writeln!(s, "nrows {}", geometry.ny).unwrap();
    writeln!(s, "xllcorner {}", geometry.origin_x - half).unwrap();
    writeln!(s, "yllcorner {}", geometry.origin_y - half).unwrap();
    writeln!(s, "cellsize {}", geometry.cell_size).unwrap();
    writeln!(s, "NODATA_value -9999").unwrap();
    for iy in (0..geometry.ny).rev() {
        let row: Vec<&str> = (0..geometry.nx)
            .map(|ix| if lden[geometry.index(ix, iy)] >= threshold_db { "1" } else { "0" })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{Mode, ProfilePoint, RouteEntry};
    use crate::noise::{OperationCounts, SelGrid};
    use crate::trajectory::LegKind;

    fn archive() -> RouteArchive {
        let g = GridGeometry::new(0.0, 0.0, 500.0, 2, 2).unwrap();
        let entry = |n: usize| RouteEntry {
            x: vec![n as f64],
            objectives: [100.0 * n as f64, 5000.0 - n as f64],
            fuel: vec![50.0],
            distance: vec![20_000.0 + n as f64],
            flight_time: vec![360.0],
            sel: vec![SelGrid { geometry: g, sel: vec![80.0; 4] }],
            track: vec![
                TrackVertex { x: 0.0, y: 0.0, s: 0.0, leg: LegKind::Tf, turn_radius: None },
                TrackVertex { x: 100.0, y: 0.5, s: 100.0, leg: LegKind::Rf, turn_radius: Some(-2000.0) },
            ],
            profiles: vec![vec![ProfilePoint { time: 0.0, s: 0.0, h: 10.668, v_eas: 82.0, thrust: 2e5 }]],
        };
        RouteArchive {
            sid: "NORTH".into(),
            mode: Mode::TwoD,
            aircraft: vec!["A".into()],
            design_counts: vec![[7, 2, 1]],
            geometry: g,
            entries: (0..3).map(entry).collect(),
        }
    }

    #[test]
    fn front_with_three_solutions_has_three_rows() {
        let a = archive();
        let text = String::from_utf8(front_csv(&front_rows_for_archive(&a))).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "solution_id,N_pa,T_fuel,distance_km,flight_time_h");
        assert_eq!(lines[2], "1,100.0,4999.0,200.01,1.0");
        assert_eq!(front_csv(&[]), b"solution_id,N_pa,T_fuel,distance_km,flight_time_h\n");
    }

    #[test]
    fn allocation_rows_and_table() {
        let a = archive();
        let s = AllocationSolution {
            routes: vec![2],
            counts: OperationCounts::from_nested(&[vec![[3, 1, 0]]]),
            objectives: [1.0, 2.0],
        };
        let rows = front_rows_for_allocation(std::slice::from_ref(&s), std::slice::from_ref(&a));
        assert!((rows[0].distance_km - 4.0 * 20.002).abs() < 1e-9);
        assert!((rows[0].flight_time_h - 0.4).abs() < 1e-12);
        let t = String::from_utf8(allocation_table_csv(&[s], &[a])).unwrap();
        assert_eq!(t.lines().nth(1).unwrap(), "0,NORTH,2,A,3,1,0,\"[3, 1, 0]\"");
    }

    #[test]
    fn geojson_is_a_feature_collection_of_linestrings() {
        let a = archive();
        let text = tracks_geojson(&[(0, &a, 0), (1, &a, 2)]);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["type"], "FeatureCollection");
        let f = v["features"].as_array().unwrap();
        assert_eq!(f.len(), 2);
        for feat in f {
            assert_eq!(feat["type"], "Feature");
            assert_eq!(feat["geometry"]["type"], "LineString");
            let coords = feat["geometry"]["coordinates"].as_array().unwrap();
            assert!(coords.len() >= 2 && coords.iter().all(|c| c.as_array().unwrap().len() == 2));
            assert!(feat["properties"].is_object());
        }
        assert_eq!(f[1]["properties"]["route"], 2);
        assert_eq!(text, tracks_geojson(&[(0, &a, 0), (1, &a, 2)]));
    }

    #[test]
    fn contour_grid_header_and_row_order() {
        let g = GridGeometry::new(0.0, 0.0, 500.0, 3, 2).unwrap();
        let lden = [40.0, 60.0, 70.0, 30.0, 55.0, 56.0];
        let s = lden_contour_ascii(&g, &lden, 55.0);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "ncols 3");
        assert_eq!(lines[2], "xllcorner -250");
        assert_eq!(lines[6], "0 1 1");
        assert_eq!(lines[7], "0 1 1");
        let s = lden_contour_ascii(&g, &lden, 58.0);
        assert_eq!(s.lines().nth(6).unwrap(), "0 0 0");
        assert_eq!(s.lines().nth(7).unwrap(), "0 1 1");
    }

    #[test]
    fn profile_rows_per_point() {
        let t = String::from_utf8(profiles_csv(&archive())).unwrap();
        assert_eq!(t.lines().count(), 4);
        assert_eq!(t.lines().nth(1).unwrap(), "0,A,0,0,10.668,82,200000");
    }
}
