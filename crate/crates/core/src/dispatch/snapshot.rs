use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::grid::Grid;
use crate::ingest::{GridDataset, IngestError};

use super::DispatchError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SnapshotMode {
    MaxCapacity,
    TimePoint(String),
}

/// Per-generator output for one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationSnapshot {
    outputs: BTreeMap<String, f64>,
    mode: SnapshotMode,
}

impl GenerationSnapshot {
    pub fn new(outputs: BTreeMap<String, f64>, mode: SnapshotMode) -> Self {
        debug_assert!(outputs.values().all(|v| *v >= 0.0));
        Self { outputs, mode }
    }

    pub fn mode(&self) -> &SnapshotMode {
        &self.mode
    }

    pub fn outputs(&self) -> &BTreeMap<String, f64> {
        &self.outputs
    }

    pub fn output(&self, generator_id: &str) -> f64 {
        self.outputs.get(generator_id).copied().unwrap_or(0.0)
    }

    /// Total output per bus index, summed over the generators at each bus.
    pub fn bus_generation(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.bus_count())
            .map(|b| grid.generators_at(b).iter().map(|g| self.output(g)).sum())
            .collect()
    }
}

/// Which scenario to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioMode {
    Max,
    TimePoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotOutcome {
    pub snapshot: GenerationSnapshot,
    pub warnings: Vec<String>,
}

pub fn make_snapshot(
    dataset: &GridDataset,
    mode: ScenarioMode,
    snapshot_file: Option<&Path>,
) -> Result<SnapshotOutcome, DispatchError> {
    match mode {
        ScenarioMode::Max => Ok(max_capacity_snapshot(dataset)),
        ScenarioMode::TimePoint => {
            let path = snapshot_file.ok_or(DispatchError::MissingSnapshotFile)?;
            let file = File::open(path).map_err(|source| {
                DispatchError::Ingest(IngestError::Io {
                    path: path.to_path_buf(),
                    source,
                })
            })?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "timepoint".into());
            time_point_snapshot(dataset, file, &label)
        }
    }
}

pub fn max_capacity_snapshot(dataset: &GridDataset) -> SnapshotOutcome {
    let outputs = dataset
        .generators()
        .iter()
        .map(|g| (g.id.clone(), g.max_capacity_mw))
        .collect();
    SnapshotOutcome {
        snapshot: GenerationSnapshot::new(outputs, SnapshotMode::MaxCapacity),
        warnings: Vec::new(),
    }
}

/// Reads `generator_id,output_mw` rows. Generators missing from the file
/// produce 0 MW; outputs above nameplate are kept with a warning.
pub fn time_point_snapshot<R: Read>(
    dataset: &GridDataset,
    reader: R,
    label: &str,
) -> Result<SnapshotOutcome, DispatchError> {
    use crate::ingest::Table;

    let table = Table::read(reader, label, &["generator_id", "output_mw"])?;
    let capacity: BTreeMap<&str, f64> = dataset
        .generators()
        .iter()
        .map(|g| (g.id.as_str(), g.max_capacity_mw))
        .collect();
    let mut outputs = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut seen = HashSet::new();
    for row in table.rows() {
        let id = row.str("generator_id").to_string();
        let Some(&cap) = capacity.get(id.as_str()) else {
            return Err(DispatchError::Ingest(IngestError::DanglingReference {
                kind: "snapshot row",
                id: format!("row {}", row.number),
                target: "generator",
                reference: id,
            }));
        };
        if !seen.insert(id.clone()) {
            return Err(DispatchError::Ingest(IngestError::DuplicateId {
                file: label.to_string(),
                id,
                row: row.number,
            }));
        }
        let out = row.f64("output_mw")?;
        if out < 0.0 {
            return Err(row.invalid("output_mw", "must be nonnegative").into());
        }
        if out > cap {
            warnings.push(format!(
                "generator {id} output {out} MW exceeds capacity {cap} MW"
            ));
        }
        outputs.insert(id, out);
    }
    for g in dataset.generators() {
        if !outputs.contains_key(&g.id) {
            warnings.push(format!(
                "generator {} missing from {label}, using 0 MW",
                g.id
            ));
            outputs.insert(g.id.clone(), 0.0);
        }
    }
    Ok(SnapshotOutcome {
        snapshot: GenerationSnapshot::new(outputs, SnapshotMode::TimePoint(label.to_string())),
        warnings,
    })
}
