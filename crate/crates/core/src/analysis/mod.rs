//! Scenario comparison, renderings and the end-to-end pipeline.

mod diff;
pub mod pipeline;
mod render;

use std::fmt;

pub use diff::{direction_diff, DirectionDiff, LineChange, LineSetMismatch};
pub use pipeline::{
    load_grid, orient_scenario, run_pipeline, solve_scenario, LoadedGrid, OrientedScenario,
    PipelineError, PipelineOptions, PipelineRun,
};
pub use render::{
    render_dot, render_geojson, render_svg, ColorRamp, Normalization, RenderError, RenderStyle,
};

/// Machine-readable one-line run summary; absent fields print as `-`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    pub objective: Option<f64>,
    pub max_residual: Option<f64>,
    pub lines: Option<usize>,
    pub directed_heuristic: Option<usize>,
    pub changed: Option<usize>,
}

fn count(v: Option<usize>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or large magnitudes.
fn real(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:?}"))
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "objective={} max_residual={} lines={} directed_heuristic={} changed={}",
            real(self.objective),
            real(self.max_residual),
            count(self.lines),
            count(self.directed_heuristic),
            count(self.changed)
        )
    }
}
