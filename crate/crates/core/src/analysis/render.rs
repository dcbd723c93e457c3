//! GeoJSON, DOT and SVG renderings of an oriented grid.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::direction::Orientation;
use crate::dispatch::{directed_ends, FlowSolution};
use crate::grid::Grid;
use crate::ingest::{GridDataset, PlanarPoint};

#[derive(Debug, thiserror::Error)]
#[error("cannot render: {0}")]
pub struct RenderError(pub String);

/// Linear interpolation between two sRGB colors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ColorRamp {
    pub low: [u8; 3],
    pub high: [u8; 3],
}

impl ColorRamp {
    /// Color at position `t`, clamped to `[0, 1]`.
    pub fn at(&self, t: f64) -> String {
        let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
        let mix = |lo: u8, hi: u8| (lo as f64 + (hi as f64 - lo as f64) * t).round() as u8;
        format!(
            "#{:02x}{:02x}{:02x}",
            mix(self.low[0], self.high[0]),
            mix(self.low[1], self.high[1]),
            mix(self.low[2], self.high[2])
        )
    }

    pub fn bottom(&self) -> String {
        self.at(0.0)
    }

    pub fn top(&self) -> String {
        self.at(1.0)
    }
}

/// Min/max of a plotted quantity; values map linearly onto the ramp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub min: f64,
    pub max: f64,
}

impl Normalization {
    pub fn over(values: impl IntoIterator<Item = f64>) -> Self {
        let (min, max) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        if min.is_finite() {
            Self { min, max }
        } else {
            Self { min: 0.0, max: 0.0 }
        }
    }

    /// Position of `v` in `[0, 1]`; a degenerate range maps everything to 0.
    pub fn position(&self, v: f64) -> f64 {
        if self.max > self.min {
            (v - self.min) / (self.max - self.min)
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderStyle {
    /// Buses by load, or by voltage without a solution.
    pub bus_ramp: ColorRamp,
    /// Lines by flow, or by voltage without a solution.
    pub line_ramp: ColorRamp,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            bus_ramp: ColorRamp {
                low: [0x31, 0x36, 0x95],
                high: [0xd7, 0x30, 0x27],
            },
            line_ramp: ColorRamp {
                low: [0xbd, 0xbd, 0xbd],
                high: [0x67, 0x00, 0x0d],
            },
        }
    }
}

struct BusView {
    id: String,
    location: PlanarPoint,
    voltage_kv: f64,
    load: Option<(f64, f64)>,
    color: String,
}

struct LineView {
    id: String,
    from: String,
    to: String,
    provenance: &'static str,
    voltage_kv: f64,
    path: Vec<PlanarPoint>,
    flow: Option<f64>,
    color: String,
}

struct Scene {
    buses: Vec<BusView>,
    lines: Vec<LineView>,
    bus_quantity: &'static str,
    bus_norm: Normalization,
    line_quantity: &'static str,
    line_norm: Normalization,
}

fn scene(
    dataset: &GridDataset,
    grid: &Grid,
    orientation: &Orientation,
    solution: Option<&FlowSolution>,
    style: &RenderStyle,
) -> Result<Scene, RenderError> {
    let ends = directed_ends(grid, orientation).map_err(|e| RenderError(e.to_string()))?;

    let bus_value = |id: &str| -> Option<(f64, f64)> {
        solution.map(|s| {
            s.bus(id)
                .map(|b| (b.load_mw, b.epsilon_mw))
                .unwrap_or((0.0, 0.0))
        })
    };
    let (bus_quantity, bus_norm) = match solution {
        Some(_) => (
            "load_mw",
            Normalization::over(dataset.buses().iter().map(|b| bus_value(&b.id).unwrap().0)),
        ),
        None => (
            "voltage_kv",
            Normalization::over(dataset.buses().iter().map(|b| b.voltage_kv)),
        ),
    };
    let buses = dataset
        .buses()
        .iter()
        .map(|b| {
            let load = bus_value(&b.id);
            let v = load.map(|l| l.0).unwrap_or(b.voltage_kv);
            BusView {
                id: b.id.clone(),
                location: b.location,
                voltage_kv: b.voltage_kv,
                load,
                color: style.bus_ramp.at(bus_norm.position(v)),
            }
        })
        .collect();

    let flow_of = |li: usize| solution.map(|s| s.flow(&grid.line(li).id).unwrap_or(0.0));
    let (line_quantity, line_norm) = match solution {
        Some(_) => (
            "flow_mw",
            Normalization::over((0..grid.line_count()).map(|li| flow_of(li).unwrap())),
        ),
        None => (
            "voltage_kv",
            Normalization::over(grid.lines().iter().map(|l| l.voltage_kv)),
        ),
    };
    let lines = ends
        .iter()
        .enumerate()
        .map(|(li, &(f, t))| {
            let line = grid.line(li);
            let record = &dataset.lines()[li];
            debug_assert_eq!(record.id, line.id);
            let path = match &record.geometry {
                Some(g) if f == line.a => g.clone(),
                Some(g) => g.iter().rev().copied().collect(),
                None => vec![dataset.buses()[f].location, dataset.buses()[t].location],
            };
            let flow = flow_of(li);
            let v = flow.unwrap_or(line.voltage_kv);
            let k = orientation
                .find(&line.id)
                .expect("checked by directed_ends");
            LineView {
                id: line.id.clone(),
                from: grid.bus_id(f).to_string(),
                to: grid.bus_id(t).to_string(),
                provenance: orientation.entry(k).source.as_str(),
                voltage_kv: line.voltage_kv,
                path,
                flow,
                color: style.line_ramp.at(line_norm.position(v)),
            }
        })
        .collect();
    Ok(Scene {
        buses,
        lines,
        bus_quantity,
        bus_norm,
        line_quantity,
        line_norm,
    })
}

fn position(p: PlanarPoint) -> Value {
    json!([p.x, p.y])
}

/// FeatureCollection with bus points (by id) followed by line strings (by
/// id). The `normalization` member records the ramp range used.
pub fn render_geojson(
    dataset: &GridDataset,
    grid: &Grid,
    orientation: &Orientation,
    solution: Option<&FlowSolution>,
    style: &RenderStyle,
) -> Result<Value, RenderError> {
    let s = scene(dataset, grid, orientation, solution, style)?;
    let mut features = Vec::with_capacity(s.buses.len() + s.lines.len());
    for b in &s.buses {
        let mut props = Map::new();
        props.insert("id".into(), json!(b.id));
        props.insert("kind".into(), json!("bus"));
        props.insert("voltage_kv".into(), json!(b.voltage_kv));
        if let Some((load, eps)) = b.load {
            props.insert("load_mw".into(), json!(load));
            props.insert("epsilon_mw".into(), json!(eps));
        }
        props.insert("color".into(), json!(b.color));
        features.push(json!({
            "type": "Feature",
            "id": b.id,
            "geometry": {"type": "Point", "coordinates": position(b.location)},
            "properties": props,
        }));
    }
    for l in &s.lines {
        let mut props = Map::new();
        props.insert("id".into(), json!(l.id));
        props.insert("kind".into(), json!("line"));
        props.insert("from".into(), json!(l.from));
        props.insert("to".into(), json!(l.to));
        props.insert("direction".into(), json!(format!("{}->{}", l.from, l.to)));
        props.insert("provenance".into(), json!(l.provenance));
        props.insert("voltage_kv".into(), json!(l.voltage_kv));
        if let Some(flow) = l.flow {
            props.insert("flow_mw".into(), json!(flow));
        }
        props.insert("color".into(), json!(l.color));
        let coords: Vec<Value> = l.path.iter().map(|p| position(*p)).collect();
        features.push(json!({
            "type": "Feature",
            "id": l.id,
            "geometry": {"type": "LineString", "coordinates": coords},
            "properties": props,
        }));
    }
    Ok(json!({
        "type": "FeatureCollection",
        "features": features,
        "normalization": {
            "method": "linear between min and max of this render",
            "bus_quantity": s.bus_quantity,
            "bus_min": s.bus_norm.min,
            "bus_max": s.bus_norm.max,
            "bus_ramp": [style.bus_ramp.bottom(), style.bus_ramp.top()],
            "line_quantity": s.line_quantity,
            "line_min": s.line_norm.min,
            "line_max": s.line_norm.max,
            "line_ramp": [style.line_ramp.bottom(), style.line_ramp.top()],
        },
    }))
}

fn dot_id(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Directed graph with one node statement per bus and one edge per line.
pub fn render_dot(grid: &Grid, orientation: &Orientation) -> Result<String, RenderError> {
    let ends = directed_ends(grid, orientation).map_err(|e| RenderError(e.to_string()))?;
    let mut out = String::from("digraph grid {\n");
    for b in 0..grid.bus_count() {
        let _ = writeln!(
            out,
            "  {} [voltage_kv={}];",
            dot_id(grid.bus_id(b)),
            dot_id(&grid.bus_kv(b).to_string())
        );
    }
    for (li, &(f, t)) in ends.iter().enumerate() {
        let id = &grid.line(li).id;
        let k = orientation.find(id).expect("checked by directed_ends");
        let _ = writeln!(
            out,
            "  {} -> {} [line={}, provenance={}];",
            dot_id(grid.bus_id(f)),
            dot_id(grid.bus_id(t)),
            dot_id(id),
            dot_id(orientation.entry(k).source.as_str())
        );
    }
    out.push_str("}\n");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Flat projection of the GeoJSON scene: x to the right, y up.
pub fn render_svg(
    dataset: &GridDataset,
    grid: &Grid,
    orientation: &Orientation,
    solution: Option<&FlowSolution>,
    style: &RenderStyle,
) -> Result<String, RenderError> {
    const WIDTH: f64 = 1000.0;
    const MARGIN: f64 = 20.0;
    let s = scene(dataset, grid, orientation, solution, style)?;

    let points = s
        .buses
        .iter()
        .map(|b| b.location)
        .chain(s.lines.iter().flat_map(|l| l.path.iter().copied()));
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in points {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    if !x0.is_finite() {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let scale = (WIDTH - 2.0 * MARGIN) / span;
    let height = (y1 - y0) * scale + 2.0 * MARGIN;
    let px = |p: PlanarPoint| ((p.x - x0) * scale + MARGIN, (y1 - p.y) * scale + MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.3}" viewBox="0 0 {WIDTH:.0} {height:.3}">"#
    );
    let _ = writeln!(
        out,
        "<!-- buses: {} in [{}, {}]; lines: {} in [{}, {}] -->",
        s.bus_quantity,
        s.bus_norm.min,
        s.bus_norm.max,
        s.line_quantity,
        s.line_norm.min,
        s.line_norm.max
    );
    for l in &s.lines {
        let pts: Vec<String> = l
            .path
            .iter()
            .map(|p| {
                let (x, y) = px(*p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"><title>{} {} -&gt; {}</title></polyline>"#,
            pts.join(" "),
            l.color,
            xml_escape(&l.id),
            xml_escape(&l.from),
            xml_escape(&l.to)
        );
    }
    for b in &s.buses {
        let (x, y) = px(b.location);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="{}"><title>{}</title></circle>"#,
            b.color,
            xml_escape(&b.id)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
