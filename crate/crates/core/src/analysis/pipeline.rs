//! End-to-end run: dataset, snapshot, orientation, RDI, bus load, flow LP.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::demand::{allocate_demand_index, AllocationOutcome, DemandError};
use crate::direction::{orient_all, Orientation};
use crate::dispatch::{
    estimate_bus_load, make_snapshot, solve_flow_lp, BusLoadOutcome, DispatchError, FlowSolution,
    ScenarioMode, SnapshotOutcome,
};
use crate::grid::{build_grid, Grid};
use crate::ingest::{load_dataset, GridDataset, IngestError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    pub seed: u64,
    pub urban_share: f64,
    pub mode: ScenarioMode,
    pub snapshot_file: Option<PathBuf>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            seed: crate::direction::rng::DEFAULT_SEED,
            urban_share: crate::demand::DEFAULT_URBAN_SHARE,
            mode: ScenarioMode::Max,
            snapshot_file: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoadedGrid {
    pub dataset: GridDataset,
    pub grid: Grid,
}

pub fn load_grid(data_dir: &Path) -> Result<LoadedGrid, IngestError> {
    let dataset = load_dataset(data_dir)?;
    let grid = build_grid(&dataset);
    Ok(LoadedGrid { dataset, grid })
}

#[derive(Clone, Debug)]
pub struct OrientedScenario {
    pub snapshot: SnapshotOutcome,
    pub orientation: Orientation,
}

pub fn orient_scenario(
    loaded: &LoadedGrid,
    options: &PipelineOptions,
) -> Result<OrientedScenario, DispatchError> {
    let snapshot = make_snapshot(
        &loaded.dataset,
        options.mode,
        options.snapshot_file.as_deref(),
    )?;
    for w in &snapshot.warnings {
        log::warn!("{w}");
    }
    let orientation = orient_all(&loaded.grid, &snapshot.snapshot, options.seed);
    Ok(OrientedScenario {
        snapshot,
        orientation,
    })
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub loaded: LoadedGrid,
    pub scenario: OrientedScenario,
    pub demand: AllocationOutcome,
    pub bus_load: BusLoadOutcome,
    pub solution: FlowSolution,
}

pub fn solve_scenario(
    loaded: &LoadedGrid,
    scenario: &OrientedScenario,
    urban_share: f64,
) -> Result<(AllocationOutcome, BusLoadOutcome, FlowSolution), PipelineError> {
    let demand = allocate_demand_index(&loaded.dataset, urban_share)?;
    let bus_load = estimate_bus_load(
        &demand.index,
        &scenario.snapshot.snapshot,
        &scenario.orientation,
        &loaded.grid,
    )?;
    let solution = solve_flow_lp(
        &scenario.orientation,
        &loaded.grid,
        &bus_load.load,
        &scenario.snapshot.snapshot,
    )?;
    Ok((demand, bus_load, solution))
}

pub fn run_pipeline(
    data_dir: &Path,
    options: &PipelineOptions,
) -> Result<PipelineRun, PipelineError> {
    let loaded = load_grid(data_dir)?;
    let scenario = orient_scenario(&loaded, options)?;
    let (demand, bus_load, solution) = solve_scenario(&loaded, &scenario, options.urban_share)?;
    Ok(PipelineRun {
        loaded,
        scenario,
        demand,
        bus_load,
        solution,
    })
}
