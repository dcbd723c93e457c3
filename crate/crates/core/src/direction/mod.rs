//! Line-flow direction recovery.
//!
//! Directions are fixed in two stages. A heuristic pass directs every line
//! it can from generator placement and voltage tiers. The lines it leaves
//! open form residual subgraphs, each oriented by a multi-source BFS from
//! its entry buses; edges the BFS tree skips get a seeded random direction.

mod heuristics;
mod residual;
pub mod rng;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::dispatch::GenerationSnapshot;
use crate::grid::{Grid, GridLine};
use crate::ingest::{IngestError, Table};

pub use heuristics::{apply_heuristics, line_voltage_rule, two_end_voltage_rule};
pub use residual::{bfs_orient, entry_points, residual_subgraphs, EntryPoints, ResidualSubgraph};
pub use rng::{DirectionRng, DEFAULT_SEED};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlowDirection {
    AtoB,
    BtoA,
}

impl FlowDirection {
    pub fn reversed(self) -> Self {
        match self {
            FlowDirection::AtoB => FlowDirection::BtoA,
            FlowDirection::BtoA => FlowDirection::AtoB,
        }
    }

    /// Direction that leaves `bus` along `line`.
    pub fn out_of(line: &GridLine, bus: usize) -> Self {
        if line.a == bus {
            FlowDirection::AtoB
        } else {
            FlowDirection::BtoA
        }
    }

    /// `(from, to)` bus indices.
    pub fn ends(self, line: &GridLine) -> (usize, usize) {
        match self {
            FlowDirection::AtoB => (line.a, line.b),
            FlowDirection::BtoA => (line.b, line.a),
        }
    }
}

/// How a line's direction was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DirectionSource {
    TwoEndVoltage,
    LineVoltage,
    GeneratorSource,
    BothEndsGeneratorRandom,
    BfsTree,
    ResidualRandom,
}

impl DirectionSource {
    pub const ALL: [DirectionSource; 6] = [
        DirectionSource::TwoEndVoltage,
        DirectionSource::LineVoltage,
        DirectionSource::GeneratorSource,
        DirectionSource::BothEndsGeneratorRandom,
        DirectionSource::BfsTree,
        DirectionSource::ResidualRandom,
    ];

    /// Decided in the heuristic pass, before any residual subgraph work.
    pub fn is_heuristic(self) -> bool {
        !matches!(
            self,
            DirectionSource::BfsTree | DirectionSource::ResidualRandom
        )
    }

    /// May change with the seed.
    pub fn is_random(self) -> bool {
        matches!(
            self,
            DirectionSource::BothEndsGeneratorRandom | DirectionSource::ResidualRandom
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DirectionSource::TwoEndVoltage => "TwoEndVoltage",
            DirectionSource::LineVoltage => "LineVoltage",
            DirectionSource::GeneratorSource => "GeneratorSource",
            DirectionSource::BothEndsGeneratorRandom => "BothEndsGeneratorRandom",
            DirectionSource::BfsTree => "BfsTree",
            DirectionSource::ResidualRandom => "ResidualRandom",
        }
    }
}

impl fmt::Display for DirectionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DirectionSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DirectionSource::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown provenance `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineOrientation {
    pub direction: FlowDirection,
    pub source: DirectionSource,
}

/// Why the heuristic pass left a line open.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeferReason {
    /// Line tier below both endpoint tiers: power may flow either way.
    FreeFlow,
    Undetermined,
}

/// The generator rule overrode a voltage rule pointing the other way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicConflict {
    pub line: usize,
    pub overridden: DirectionSource,
}

/// Output of the heuristic pass, indexed by line.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialOrientation {
    pub decided: Vec<Option<LineOrientation>>,
    pub deferred: Vec<Option<DeferReason>>,
    pub conflicts: Vec<HeuristicConflict>,
}

impl PartialOrientation {
    pub fn is_decided(&self, line: usize) -> bool {
        self.decided[line].is_some()
    }

    pub fn decided_count(&self) -> usize {
        self.decided.iter().flatten().count()
    }
}

/// A direction for every line of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Orientation {
    line_ids: Vec<String>,
    /// `(from, to)` bus ids per line.
    ends: Vec<(String, String)>,
    entries: Vec<LineOrientation>,
    pub conflicts: Vec<String>,
    pub free_flow_lines: Vec<String>,
    /// Subgraphs whose entry set fell back to the lowest-id bus.
    pub entry_fallbacks: Vec<String>,
    pub residual_subgraph_count: usize,
}

impl Orientation {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn line_ids(&self) -> &[String] {
        &self.line_ids
    }

    pub fn entry(&self, line: usize) -> LineOrientation {
        self.entries[line]
    }

    pub fn entries(&self) -> &[LineOrientation] {
        &self.entries
    }

    /// `(from, to)` bus ids of line index `line`.
    pub fn ends(&self, line: usize) -> (&str, &str) {
        let (f, t) = &self.ends[line];
        (f, t)
    }

    pub fn find(&self, line_id: &str) -> Option<usize> {
        self.line_ids
            .binary_search_by(|id| id.as_str().cmp(line_id))
            .ok()
    }

    pub fn heuristic_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.source.is_heuristic())
            .count()
    }

    pub fn count_by_source(&self) -> BTreeMap<DirectionSource, usize> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.source).or_default() += 1;
        }
        out
    }

    /// `line_id,from_bus,to_bus,provenance`, one row per line in id order.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["line_id", "from_bus", "to_bus", "provenance"])?;
        for (i, id) in self.line_ids.iter().enumerate() {
            let (from, to) = self.ends(i);
            wtr.write_record([id.as_str(), from, to, self.entries[i].source.as_str()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads an exported orientation. Each line's `a` end is taken to be
    /// its `from_bus`.
    pub fn read_csv<R: Read>(reader: R, label: &str) -> Result<Self, IngestError> {
        let table = Table::read(
            reader,
            label,
            &["line_id", "from_bus", "to_bus", "provenance"],
        )?;
        let mut rows: Vec<(String, (String, String), LineOrientation)> = Vec::new();
        for row in table.rows() {
            let source = row
                .str("provenance")
                .parse::<DirectionSource>()
                .map_err(|e| row.invalid("provenance", &e))?;
            rows.push((
                row.str("line_id").to_string(),
                (
                    row.str("from_bus").to_string(),
                    row.str("to_bus").to_string(),
                ),
                LineOrientation {
                    direction: FlowDirection::AtoB,
                    source,
                },
            ));
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        for w in rows.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(IngestError::DuplicateId {
                    file: label.to_string(),
                    id: w[0].0.clone(),
                    row: 0,
                });
            }
        }
        let mut out = Orientation {
            line_ids: Vec::with_capacity(rows.len()),
            ends: Vec::with_capacity(rows.len()),
            entries: Vec::with_capacity(rows.len()),
            conflicts: Vec::new(),
            free_flow_lines: Vec::new(),
            entry_fallbacks: Vec::new(),
            residual_subgraph_count: 0,
        };
        for (id, ends, entry) in rows {
            out.line_ids.push(id);
            out.ends.push(ends);
            out.entries.push(entry);
        }
        Ok(out)
    }
}

/// Heuristic pass, then BFS orientation of each residual subgraph.
pub fn orient_all(grid: &Grid, snapshot: &GenerationSnapshot, seed: u64) -> Orientation {
    let generation = snapshot.bus_generation(grid);
    let partial = apply_heuristics(grid, &generation, seed);
    let subgraphs = residual_subgraphs(grid, &partial);

    let mut entries: Vec<Option<LineOrientation>> = partial.decided.clone();
    let mut entry_fallbacks = Vec::new();
    for (k, sub) in subgraphs.iter().enumerate() {
        let entry = entry_points(sub, grid, &generation, &partial);
        if entry.fallback {
            log::warn!(
                "no entry point for residual subgraph containing {}, using it as the entry",
                grid.bus_id(entry.buses[0])
            );
            entry_fallbacks.push(grid.bus_id(entry.buses[0]).to_string());
        }
        let mut rng = DirectionRng::stream(seed, k as u64 + 1);
        for (li, o) in bfs_orient(grid, sub, &entry.buses, &mut rng) {
            debug_assert!(entries[li].is_none(), "heuristic direction overwritten");
            entries[li] = Some(o);
        }
    }

    let entries: Vec<LineOrientation> = entries
        .into_iter()
        .map(|e| e.expect("every line is covered by heuristics or a residual subgraph"))
        .collect();
    let ends = grid
        .lines()
        .iter()
        .zip(&entries)
        .map(|(line, e)| {
            let (f, t) = e.direction.ends(line);
            (grid.bus_id(f).to_string(), grid.bus_id(t).to_string())
        })
        .collect();
    Orientation {
        line_ids: grid.lines().iter().map(|l| l.id.clone()).collect(),
        ends,
        entries,
        conflicts: partial
            .conflicts
            .iter()
            .map(|c| grid.line(c.line).id.clone())
            .collect(),
        free_flow_lines: partial
            .deferred
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == Some(DeferReason::FreeFlow))
            .map(|(li, _)| grid.line(li).id.clone())
            .collect(),
        entry_fallbacks,
        residual_subgraph_count: subgraphs.len(),
    }
}
