//! Generator output attribution and the nodal-balance flow LP.

mod lp;
mod simplex;
mod snapshot;

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use thiserror::Error;

use crate::demand::DemandIndex;
use crate::direction::Orientation;
use crate::grid::Grid;
use crate::ingest::IngestError;

pub use lp::{solve_flow_lp, BusBalance, FlowSolution, LineFlow, BALANCE_TOLERANCE};
pub use simplex::{solve as solve_standard_lp, SimplexError, SimplexResult, StandardLp};
pub use snapshot::{
    make_snapshot, max_capacity_snapshot, time_point_snapshot, GenerationSnapshot, ScenarioMode,
    SnapshotMode, SnapshotOutcome,
};

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("time-point mode needs a snapshot file")]
    MissingSnapshotFile,
    #[error("orientation does not match the grid: {0}")]
    OrientationMismatch(String),
    #[error("simplex stalled after {iterations} iterations")]
    SolverStall { iterations: usize },
    #[error("flow LP unexpectedly unbounded")]
    Unbounded,
}

/// `(from, to)` bus indices per grid line, checked against the grid.
pub fn directed_ends(
    grid: &Grid,
    orientation: &Orientation,
) -> Result<Vec<(usize, usize)>, DispatchError> {
    if orientation.len() != grid.line_count() {
        return Err(DispatchError::OrientationMismatch(format!(
            "{} oriented lines for {} grid lines",
            orientation.len(),
            grid.line_count()
        )));
    }
    grid.lines()
        .iter()
        .map(|line| {
            let k = orientation.find(&line.id).ok_or_else(|| {
                DispatchError::OrientationMismatch(format!("line {} has no direction", line.id))
            })?;
            let (f, t) = orientation.ends(k);
            let (f, t) = (grid.bus_index(f), grid.bus_index(t));
            match (f, t) {
                (Some(f), Some(t)) if (f, t) == (line.a, line.b) || (f, t) == (line.b, line.a) => {
                    Ok((f, t))
                }
                _ => Err(DispatchError::OrientationMismatch(format!(
                    "line {} endpoints differ from the grid",
                    line.id
                ))),
            }
        })
        .collect()
}

fn out_adjacency(grid: &Grid, ends: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); grid.bus_count()];
    for &(f, t) in ends {
        adj[f].push(t);
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

fn reach(adj: &[Vec<usize>], source: usize) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    seen[source] = true;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    (0..adj.len()).filter(|&b| seen[b]).collect()
}

/// Buses reachable from `source` along directed lines, `source` included,
/// sorted by id.
pub fn reachable_buses(
    orientation: &Orientation,
    grid: &Grid,
    source: &str,
) -> Result<Vec<String>, DispatchError> {
    let ends = directed_ends(grid, orientation)?;
    let s = grid
        .bus_index(source)
        .ok_or_else(|| DispatchError::OrientationMismatch(format!("unknown bus {source}")))?;
    Ok(reach(&out_adjacency(grid, &ends), s)
        .into_iter()
        .map(|b| grid.bus_id(b).to_string())
        .collect())
}

/// Estimated load per bus id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BusLoad {
    values: BTreeMap<String, f64>,
}

impl BusLoad {
    pub fn from_values(values: BTreeMap<String, f64>) -> Self {
        debug_assert!(values.values().all(|v| *v >= 0.0));
        Self { values }
    }

    pub fn get(&self, bus_id: &str) -> f64 {
        self.values.get(bus_id).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["bus_id", "load_mw"])?;
        for (id, v) in &self.values {
            wtr.write_record([id.clone(), v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BusLoadOutcome {
    pub load: BusLoad,
    /// Generation buses whose reachable set has zero total RDI; their
    /// output stays on the bus itself.
    pub zero_index_buses: Vec<String>,
}

/// Spreads each generation bus's output over the buses it reaches,
/// proportionally to their RDI.
pub fn estimate_bus_load(
    demand_index: &DemandIndex,
    snapshot: &GenerationSnapshot,
    orientation: &Orientation,
    grid: &Grid,
) -> Result<BusLoadOutcome, DispatchError> {
    let ends = directed_ends(grid, orientation)?;
    let adj = out_adjacency(grid, &ends);
    let generation = snapshot.bus_generation(grid);
    let rdi: Vec<f64> = grid
        .bus_ids()
        .iter()
        .map(|id| demand_index.get(id))
        .collect();

    let mut load = vec![0.0; grid.bus_count()];
    let mut zero_index_buses = Vec::new();
    for (b, &g) in generation.iter().enumerate() {
        if g <= 0.0 {
            continue;
        }
        let reached = reach(&adj, b);
        let total: f64 = reached.iter().map(|&r| rdi[r]).sum();
        if total > 0.0 {
            for &r in &reached {
                load[r] += rdi[r] / total * g;
            }
        } else {
            log::warn!(
                "buses reachable from {} carry no demand index; keeping its {g} MW on the bus",
                grid.bus_id(b)
            );
            zero_index_buses.push(grid.bus_id(b).to_string());
            load[b] += g;
        }
    }
    let values = grid.bus_ids().iter().cloned().zip(load).collect();
    Ok(BusLoadOutcome {
        load: BusLoad { values },
        zero_index_buses,
    })
}
