use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::geometry::{PlanarPoint, PlanarPolygon};
use super::{
    BusRecord, GeneratorRecord, HourlyLoadRecord, IngestError, LineRecord, NamedPolygon,
    PopulationPoint,
};

pub(crate) const BUS_COLUMNS: [&str; 5] = ["id", "name", "x", "y", "voltage_kv"];
pub(crate) const LINE_COLUMNS: [&str; 4] = ["id", "bus_a", "bus_b", "voltage_kv"];
pub(crate) const LINE_GEOMETRY_COLUMN: &str = "wkt_geometry";
pub(crate) const GENERATOR_COLUMNS: [&str; 4] = ["id", "bus_id", "max_capacity_mw", "fuel_type"];
pub(crate) const AREA_BORDER_COLUMNS: [&str; 6] =
    ["area_id", "name", "ring_index", "vertex_index", "x", "y"];
pub(crate) const CITY_BORDER_COLUMNS: [&str; 6] =
    ["city_id", "name", "ring_index", "vertex_index", "x", "y"];
pub(crate) const POPULATION_COLUMNS: [&str; 4] = ["city_id", "x", "y", "population"];
pub(crate) const HOURLY_LOAD_COLUMNS: [&str; 3] = ["area_id", "name", "avg_hourly_load_mw"];

/// Header-indexed view over a CSV source. Row numbers count the header as
/// row 1, so the first data row is row 2.
pub(crate) struct Table {
    label: String,
    columns: HashMap<String, usize>,
    records: Vec<csv::StringRecord>,
}

pub(crate) struct Row<'a> {
    table: &'a Table,
    pub(crate) number: usize,
    record: &'a csv::StringRecord,
}

impl Table {
    pub(crate) fn read<R: Read>(
        reader: R,
        label: &str,
        required: &[&str],
    ) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let csv_err = |source| IngestError::Csv {
            file: label.to_string(),
            source,
        };
        let headers = rdr.headers().map_err(csv_err)?.clone();
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim_start_matches('\u{feff}').to_string(), i))
            .collect();
        for col in required {
            if !columns.contains_key(*col) {
                return Err(IngestError::MissingColumn {
                    file: label.to_string(),
                    column: col.to_string(),
                });
            }
        }
        let records = rdr
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(csv_err)?;
        Ok(Self {
            label: label.to_string(),
            columns,
            records,
        })
    }

    pub(crate) fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.records.iter().enumerate().map(move |(i, record)| Row {
            table: self,
            number: i + 2,
            record,
        })
    }

    pub(crate) fn has_column(&self, col: &str) -> bool {
        self.columns.contains_key(col)
    }

    pub(crate) fn label(&self) -> &str {
        &self.label
    }
}

impl Row<'_> {
    pub(crate) fn str(&self, col: &str) -> &str {
        self.table
            .columns
            .get(col)
            .and_then(|&i| self.record.get(i))
            .unwrap_or("")
    }

    pub(crate) fn f64(&self, col: &str) -> Result<f64, IngestError> {
        let raw = self.str(col);
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(IngestError::NonNumeric {
                file: self.table.label.clone(),
                row: self.number,
                column: col.to_string(),
                value: raw.to_string(),
            }),
        }
    }

    pub(crate) fn u64(&self, col: &str) -> Result<u64, IngestError> {
        let raw = self.str(col);
        raw.parse::<u64>().map_err(|_| IngestError::NonNumeric {
            file: self.table.label.clone(),
            row: self.number,
            column: col.to_string(),
            value: raw.to_string(),
        })
    }

    pub(crate) fn invalid(&self, col: &str, reason: &str) -> IngestError {
        IngestError::InvalidValue {
            file: self.table.label.clone(),
            row: self.number,
            column: col.to_string(),
            reason: reason.to_string(),
        }
    }

    fn id(&self, col: &str) -> Result<String, IngestError> {
        let id = self.str(col);
        if id.is_empty() {
            return Err(self.invalid(col, "is empty"));
        }
        Ok(id.to_string())
    }
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn label_of(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn check_unique(
    seen: &mut HashSet<String>,
    id: &str,
    table: &Table,
    row: usize,
) -> Result<(), IngestError> {
    if !seen.insert(id.to_string()) {
        return Err(IngestError::DuplicateId {
            file: table.label().to_string(),
            id: id.to_string(),
            row,
        });
    }
    Ok(())
}

pub fn parse_buses(path: &Path) -> Result<Vec<BusRecord>, IngestError> {
    parse_buses_from(open(path)?, &label_of(path))
}

pub fn parse_buses_from<R: Read>(reader: R, label: &str) -> Result<Vec<BusRecord>, IngestError> {
    let table = Table::read(reader, label, &BUS_COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in table.rows() {
        let id = row.id("id")?;
        check_unique(&mut seen, &id, &table, row.number)?;
        let voltage_kv = row.f64("voltage_kv")?;
        if voltage_kv <= 0.0 {
            return Err(row.invalid("voltage_kv", "must be positive"));
        }
        out.push(BusRecord {
            id,
            name: row.str("name").to_string(),
            location: PlanarPoint::new(row.f64("x")?, row.f64("y")?),
            voltage_kv,
            planning_area_id: None,
            is_urban: false,
        });
    }
    Ok(out)
}

pub fn parse_lines(path: &Path) -> Result<Vec<LineRecord>, IngestError> {
    parse_lines_from(open(path)?, &label_of(path))
}

pub fn parse_lines_from<R: Read>(reader: R, label: &str) -> Result<Vec<LineRecord>, IngestError> {
    let table = Table::read(reader, label, &LINE_COLUMNS)?;
    let with_geometry = table.has_column(LINE_GEOMETRY_COLUMN);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in table.rows() {
        let id = row.id("id")?;
        check_unique(&mut seen, &id, &table, row.number)?;
        let endpoint_a = row.id("bus_a")?;
        let endpoint_b = row.id("bus_b")?;
        if endpoint_a == endpoint_b {
            return Err(IngestError::SelfLoop {
                file: table.label().to_string(),
                row: row.number,
                id,
            });
        }
        let voltage_kv = row.f64("voltage_kv")?;
        if voltage_kv <= 0.0 {
            return Err(row.invalid("voltage_kv", "must be positive"));
        }
        let geometry = if with_geometry {
            let raw = row.str(LINE_GEOMETRY_COLUMN);
            if raw.is_empty() {
                None
            } else {
                Some(
                    parse_wkt_linestring(raw)
                        .map_err(|reason| row.invalid(LINE_GEOMETRY_COLUMN, &reason))?,
                )
            }
        } else {
            None
        };
        out.push(LineRecord {
            id,
            endpoint_a,
            endpoint_b,
            voltage_kv,
            geometry,
        });
    }
    Ok(out)
}

pub fn parse_generators(path: &Path) -> Result<Vec<GeneratorRecord>, IngestError> {
    parse_generators_from(open(path)?, &label_of(path))
}

pub fn parse_generators_from<R: Read>(
    reader: R,
    label: &str,
) -> Result<Vec<GeneratorRecord>, IngestError> {
    let table = Table::read(reader, label, &GENERATOR_COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in table.rows() {
        let id = row.id("id")?;
        check_unique(&mut seen, &id, &table, row.number)?;
        let max_capacity_mw = row.f64("max_capacity_mw")?;
        if max_capacity_mw < 0.0 {
            return Err(row.invalid("max_capacity_mw", "must be nonnegative"));
        }
        out.push(GeneratorRecord {
            id,
            bus_id: row.id("bus_id")?,
            max_capacity_mw,
            fuel_type: row.str("fuel_type").to_string(),
        });
    }
    Ok(out)
}

pub fn parse_planning_area_polygons(path: &Path) -> Result<Vec<NamedPolygon>, IngestError> {
    parse_planning_area_polygons_from(open(path)?, &label_of(path))
}

pub fn parse_planning_area_polygons_from<R: Read>(
    reader: R,
    label: &str,
) -> Result<Vec<NamedPolygon>, IngestError> {
    let table = Table::read(reader, label, &AREA_BORDER_COLUMNS)?;
    parse_polygon_table(&table, "area_id")
}

pub fn parse_city_polygons(path: &Path) -> Result<Vec<NamedPolygon>, IngestError> {
    parse_city_polygons_from(open(path)?, &label_of(path))
}

pub fn parse_city_polygons_from<R: Read>(
    reader: R,
    label: &str,
) -> Result<Vec<NamedPolygon>, IngestError> {
    let table = Table::read(reader, label, &CITY_BORDER_COLUMNS)?;
    parse_polygon_table(&table, "city_id")
}

type RingMap = BTreeMap<u64, BTreeMap<u64, PlanarPoint>>;

fn parse_polygon_table(table: &Table, id_col: &str) -> Result<Vec<NamedPolygon>, IngestError> {
    let mut grouped: BTreeMap<String, (String, RingMap)> = BTreeMap::new();
    for row in table.rows() {
        let id = row.id(id_col)?;
        let ring = row.u64("ring_index")?;
        let vertex = row.u64("vertex_index")?;
        let point = PlanarPoint::new(row.f64("x")?, row.f64("y")?);
        let entry = grouped
            .entry(id.clone())
            .or_insert_with(|| (row.str("name").to_string(), BTreeMap::new()));
        let previous = entry.1.entry(ring).or_default().insert(vertex, point);
        if previous.is_some() {
            return Err(IngestError::DuplicateId {
                file: table.label().to_string(),
                id: format!("{id}/{ring}/{vertex}"),
                row: row.number,
            });
        }
    }
    grouped
        .into_iter()
        .map(|(id, (name, rings))| {
            let rings = rings
                .into_values()
                .map(|verts| verts.into_values().collect())
                .collect();
            let polygon = PlanarPolygon::new(rings).map_err(|e| match e {
                IngestError::InvalidPolygon(msg) => {
                    IngestError::InvalidPolygon(format!("{}: `{id}`: {msg}", table.label()))
                }
                other => other,
            })?;
            Ok(NamedPolygon { id, name, polygon })
        })
        .collect()
}

pub fn parse_population_points(path: &Path) -> Result<Vec<PopulationPoint>, IngestError> {
    parse_population_points_from(open(path)?, &label_of(path))
}

pub fn parse_population_points_from<R: Read>(
    reader: R,
    label: &str,
) -> Result<Vec<PopulationPoint>, IngestError> {
    let table = Table::read(reader, label, &POPULATION_COLUMNS)?;
    table
        .rows()
        .map(|row| {
            Ok(PopulationPoint {
                city_id: row.id("city_id")?,
                location: PlanarPoint::new(row.f64("x")?, row.f64("y")?),
                population: row.u64("population")?,
            })
        })
        .collect()
}

pub fn parse_hourly_loads(path: &Path) -> Result<Vec<HourlyLoadRecord>, IngestError> {
    parse_hourly_loads_from(open(path)?, &label_of(path))
}

pub fn parse_hourly_loads_from<R: Read>(
    reader: R,
    label: &str,
) -> Result<Vec<HourlyLoadRecord>, IngestError> {
    let table = Table::read(reader, label, &HOURLY_LOAD_COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in table.rows() {
        let area_id = row.id("area_id")?;
        check_unique(&mut seen, &area_id, &table, row.number)?;
        let load = row.f64("avg_hourly_load_mw")?;
        if load < 0.0 {
            return Err(row.invalid("avg_hourly_load_mw", "must be nonnegative"));
        }
        out.push(HourlyLoadRecord {
            area_id,
            name: row.str("name").to_string(),
            avg_hourly_load_mw: load,
        });
    }
    Ok(out)
}

/// Parses `LINESTRING (x y, x y, ...)`. Case-insensitive keyword.
fn parse_wkt_linestring(raw: &str) -> Result<Vec<PlanarPoint>, String> {
    let trimmed = raw.trim();
    let upper = trimmed.to_ascii_uppercase();
    let body = upper
        .strip_prefix("LINESTRING")
        .map(|_| trimmed["LINESTRING".len()..].trim())
        .ok_or_else(|| "expected a WKT LINESTRING".to_string())?;
    let inner = body
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| "unbalanced parentheses in WKT".to_string())?;
    let mut points = Vec::new();
    for pair in inner.split(',') {
        let mut coords = pair.split_whitespace().map(str::parse::<f64>);
        match (coords.next(), coords.next(), coords.next()) {
            (Some(Ok(x)), Some(Ok(y)), None) if x.is_finite() && y.is_finite() => {
                points.push(PlanarPoint::new(x, y))
            }
            _ => return Err(format!("bad WKT coordinate pair `{}`", pair.trim())),
        }
    }
    if points.len() < 2 {
        return Err("a LINESTRING needs at least two points".into());
    }
    Ok(points)
}

fn format_wkt_linestring(points: &[PlanarPoint]) -> String {
    let coords: Vec<String> = points.iter().map(|p| format!("{} {}", p.x, p.y)).collect();
    format!("LINESTRING ({})", coords.join(", "))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

pub fn write_buses<W: Write>(buses: &[BusRecord], w: W) -> csv::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(BUS_COLUMNS)?;
    for b in buses {
        wtr.write_record([
            b.id.clone(),
            b.name.clone(),
            b.location.x.to_string(),
            b.location.y.to_string(),
            b.voltage_kv.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_lines<W: Write>(lines: &[LineRecord], w: W) -> csv::Result<()> {
    let mut wtr = writer(w);
    let mut header = LINE_COLUMNS.to_vec();
    header.push(LINE_GEOMETRY_COLUMN);
    wtr.write_record(header)?;
    for l in lines {
        wtr.write_record([
            l.id.clone(),
            l.endpoint_a.clone(),
            l.endpoint_b.clone(),
            l.voltage_kv.to_string(),
            l.geometry
                .as_deref()
                .map(format_wkt_linestring)
                .unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_generators<W: Write>(gens: &[GeneratorRecord], w: W) -> csv::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(GENERATOR_COLUMNS)?;
    for g in gens {
        wtr.write_record([
            g.id.clone(),
            g.bus_id.clone(),
            g.max_capacity_mw.to_string(),
            g.fuel_type.clone(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_polygons<W: Write>(header: [&str; 6], polys: &[NamedPolygon], w: W) -> csv::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(header)?;
    for poly in polys {
        for (ring_idx, ring) in poly.polygon.rings().iter().enumerate() {
            for (vertex_idx, p) in ring.iter().enumerate() {
                wtr.write_record([
                    poly.id.clone(),
                    poly.name.clone(),
                    ring_idx.to_string(),
                    vertex_idx.to_string(),
                    p.x.to_string(),
                    p.y.to_string(),
                ])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_planning_area_polygons<W: Write>(polys: &[NamedPolygon], w: W) -> csv::Result<()> {
    write_polygons(AREA_BORDER_COLUMNS, polys, w)
}

pub fn write_city_polygons<W: Write>(polys: &[NamedPolygon], w: W) -> csv::Result<()> {
    write_polygons(CITY_BORDER_COLUMNS, polys, w)
}

pub fn write_population_points<W: Write>(points: &[PopulationPoint], w: W) -> csv::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(POPULATION_COLUMNS)?;
    for p in points {
        wtr.write_record([
            p.city_id.clone(),
            p.location.x.to_string(),
            p.location.y.to_string(),
            p.population.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_hourly_loads<W: Write>(loads: &[HourlyLoadRecord], w: W) -> csv::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(HOURLY_LOAD_COLUMNS)?;
    for l in loads {
        wtr.write_record([
            l.area_id.clone(),
            l.name.clone(),
            l.avg_hourly_load_mw.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
