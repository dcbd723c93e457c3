#![allow(dead_code)]

use opengrid_core::ingest::{
    BusRecord, DatasetParts, GeneratorRecord, GridDataset, LineRecord, PlanarPoint, Provenance,
};
use proptest::prelude::*;

pub const KV: [f64; 5] = [69.0, 138.0, 144.0, 240.0, 500.0];

#[derive(Clone, Debug)]
pub struct GraphCase {
    pub bus_kv: Vec<f64>,
    /// `(a, b, kv)` by bus index.
    pub lines: Vec<(usize, usize, f64)>,
    /// Generator capacity per bus; 0 means no generator.
    pub capacity: Vec<f64>,
}

pub fn bus_id(i: usize) -> String {
    format!("B{i:03}")
}

pub fn line_id(i: usize) -> String {
    format!("L{i:03}")
}

impl GraphCase {
    pub fn dataset(&self) -> GridDataset {
        let parts = DatasetParts {
            buses: self
                .bus_kv
                .iter()
                .enumerate()
                .map(|(i, &kv)| BusRecord {
                    id: bus_id(i),
                    name: bus_id(i),
                    location: PlanarPoint::new(i as f64, (i * 7 % 11) as f64),
                    voltage_kv: kv,
                    planning_area_id: None,
                    is_urban: false,
                })
                .collect(),
            lines: self
                .lines
                .iter()
                .enumerate()
                .map(|(i, &(a, b, kv))| LineRecord {
                    id: line_id(i),
                    endpoint_a: bus_id(a),
                    endpoint_b: bus_id(b),
                    voltage_kv: kv,
                    geometry: None,
                })
                .collect(),
            generators: self
                .capacity
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0.0)
                .map(|(i, &c)| GeneratorRecord {
                    id: format!("G{i:03}"),
                    bus_id: bus_id(i),
                    max_capacity_mw: c,
                    fuel_type: "GAS".into(),
                })
                .collect(),
            ..Default::default()
        };
        GridDataset::assemble(parts, Provenance::default()).expect("generated dataset is valid")
    }
}

fn kv() -> impl Strategy<Value = f64> {
    prop::sample::select(KV.to_vec())
}

fn capacity() -> impl Strategy<Value = f64> {
    prop_oneof![3 => Just(0.0), 1 => (1u32..500).prop_map(f64::from)]
}

/// Connected multigraph: a random spanning tree plus up to `n` extra lines
/// (parallel lines allowed, self-loops not).
pub fn connected_graph(max_buses: usize) -> impl Strategy<Value = GraphCase> {
    (2..=max_buses).prop_flat_map(|n| {
        (
            prop::collection::vec(kv(), n),
            prop::collection::vec((any::<prop::sample::Index>(), kv()), n - 1),
            prop::collection::vec((0..n, 1..n, kv()), 0..=n),
            prop::collection::vec(capacity(), n),
        )
            .prop_map(move |(bus_kv, tree, extra, capacity)| {
                let mut lines: Vec<(usize, usize, f64)> = tree
                    .iter()
                    .enumerate()
                    .map(|(k, (parent, kv))| (parent.index(k + 1), k + 1, *kv))
                    .collect();
                lines.extend(extra.iter().map(|&(a, off, kv)| (a, (a + off) % n, kv)));
                GraphCase {
                    bus_kv,
                    lines,
                    capacity,
                }
            })
    })
}
