//! Undirected multigraph over buses and lines, plus voltage-class ordering.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::ingest::GridDataset;

/// Ordered voltage tier. 240 kV and 500 kV (and anything between) share a
/// tier; every other nominal voltage is its own tier ordered by kV.
#[derive(Clone, Copy, Debug)]
pub struct VoltageClass {
    key_kv: f64,
}

const MERGED_LOW_KV: f64 = 240.0;
const MERGED_HIGH_KV: f64 = 500.0;

pub fn voltage_class(kv: f64) -> VoltageClass {
    let key_kv = if (MERGED_LOW_KV..=MERGED_HIGH_KV).contains(&kv) {
        MERGED_LOW_KV
    } else {
        kv
    };
    VoltageClass { key_kv }
}

impl VoltageClass {
    /// Representative kV of the tier (the merged tier reports 240).
    pub fn representative_kv(&self) -> f64 {
        self.key_kv
    }
}

impl PartialEq for VoltageClass {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for VoltageClass {}

impl PartialOrd for VoltageClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VoltageClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_kv.total_cmp(&other.key_kv)
    }
}

#[derive(Clone, Debug)]
pub struct GridLine {
    pub id: String,
    pub a: usize,
    pub b: usize,
    pub voltage_kv: f64,
    pub class: VoltageClass,
}

impl GridLine {
    pub fn other(&self, bus: usize) -> usize {
        if bus == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Buses and lines are indexed in id order; adjacency lists are sorted by
/// (neighbor index, line index), i.e. by neighbor id then line id.
#[derive(Clone, Debug)]
pub struct Grid {
    bus_ids: Vec<String>,
    bus_kv: Vec<f64>,
    bus_class: Vec<VoltageClass>,
    bus_index: HashMap<String, usize>,
    lines: Vec<GridLine>,
    line_index: HashMap<String, usize>,
    adjacency: Vec<Vec<(usize, usize)>>,
    generator_bus: BTreeMap<String, usize>,
    generators_at: Vec<Vec<String>>,
}

impl Grid {
    pub fn build(dataset: &GridDataset) -> Self {
        // dataset records are already sorted by id
        let bus_ids: Vec<String> = dataset.buses().iter().map(|b| b.id.clone()).collect();
        let bus_kv: Vec<f64> = dataset.buses().iter().map(|b| b.voltage_kv).collect();
        let bus_class = bus_kv.iter().map(|&kv| voltage_class(kv)).collect();
        let bus_index: HashMap<String, usize> = bus_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();

        let lines: Vec<GridLine> = dataset
            .lines()
            .iter()
            .map(|l| GridLine {
                id: l.id.clone(),
                a: bus_index[&l.endpoint_a],
                b: bus_index[&l.endpoint_b],
                voltage_kv: l.voltage_kv,
                class: voltage_class(l.voltage_kv),
            })
            .collect();
        let line_index = lines
            .iter()
            .enumerate()
            .map(|(i, l)| (l.id.clone(), i))
            .collect();

        let mut adjacency = vec![Vec::new(); bus_ids.len()];
        for (li, line) in lines.iter().enumerate() {
            adjacency[line.a].push((li, line.b));
            adjacency[line.b].push((li, line.a));
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|&(li, nbr)| (nbr, li));
        }

        let mut generator_bus = BTreeMap::new();
        let mut generators_at = vec![Vec::new(); bus_ids.len()];
        for g in dataset.generators() {
            let bi = bus_index[&g.bus_id];
            generator_bus.insert(g.id.clone(), bi);
            generators_at[bi].push(g.id.clone());
        }

        Self {
            bus_ids,
            bus_kv,
            bus_class,
            bus_index,
            lines,
            line_index,
            adjacency,
            generator_bus,
            generators_at,
        }
    }

    pub fn bus_count(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn bus_id(&self, bus: usize) -> &str {
        &self.bus_ids[bus]
    }

    pub fn bus_ids(&self) -> &[String] {
        &self.bus_ids
    }

    pub fn bus_kv(&self, bus: usize) -> f64 {
        self.bus_kv[bus]
    }

    pub fn bus_class(&self, bus: usize) -> VoltageClass {
        self.bus_class[bus]
    }

    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.bus_index.get(id).copied()
    }

    pub fn lines(&self) -> &[GridLine] {
        &self.lines
    }

    pub fn line(&self, line: usize) -> &GridLine {
        &self.lines[line]
    }

    pub fn line_index(&self, id: &str) -> Option<usize> {
        self.line_index.get(id).copied()
    }

    /// `(line index, neighbor bus index)` pairs incident to `bus`.
    pub fn neighbors(&self, bus: usize) -> &[(usize, usize)] {
        &self.adjacency[bus]
    }

    pub fn degree(&self, bus: usize) -> usize {
        self.adjacency[bus].len()
    }

    pub fn generator_bus(&self, generator_id: &str) -> Option<usize> {
        self.generator_bus.get(generator_id).copied()
    }

    pub fn generators_at(&self, bus: usize) -> &[String] {
        &self.generators_at[bus]
    }

    /// Connected components over the lines accepted by `keep`. Buses with
    /// no accepted line are included as singletons only when
    /// `include_isolated` is set. Each component is sorted, and components
    /// are ordered by their smallest bus index.
    pub fn components_where(
        &self,
        keep: impl Fn(usize) -> bool,
        include_isolated: bool,
    ) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.bus_count()];
        let mut out = Vec::new();
        for start in 0..self.bus_count() {
            if seen[start] {
                continue;
            }
            let touches = self.adjacency[start].iter().any(|&(li, _)| keep(li));
            if !touches && !include_isolated {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(li, v) in &self.adjacency[u] {
                    if keep(li) && !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

pub fn build_grid(dataset: &GridDataset) -> Grid {
    Grid::build(dataset)
}

/// Partition of all buses into undirected connected components.
pub fn undirected_components(grid: &Grid) -> Vec<Vec<String>> {
    grid.components_where(|_| true, true)
        .into_iter()
        .map(|c| c.into_iter().map(|b| grid.bus_id(b).to_string()).collect())
        .collect()
}
