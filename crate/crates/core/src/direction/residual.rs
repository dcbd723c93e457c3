use std::collections::VecDeque;

use crate::grid::Grid;

use super::rng::DirectionRng;
use super::{DirectionSource, FlowDirection, LineOrientation, PartialOrientation};

/// Connected piece of the grid restricted to lines the heuristic pass
/// left open. Both lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualSubgraph {
    pub buses: Vec<usize>,
    pub lines: Vec<usize>,
}

pub fn residual_subgraphs(grid: &Grid, partial: &PartialOrientation) -> Vec<ResidualSubgraph> {
    let open = |li: usize| !partial.is_decided(li);
    grid.components_where(open, false)
        .into_iter()
        .map(|buses| {
            let mut lines: Vec<usize> = buses
                .iter()
                .flat_map(|&b| grid.neighbors(b).iter().map(|&(li, _)| li))
                .filter(|&li| open(li))
                .collect();
            lines.sort_unstable();
            lines.dedup();
            ResidualSubgraph { buses, lines }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryPoints {
    /// Sorted bus indices, never empty.
    pub buses: Vec<usize>,
    /// No rule matched and the lowest-id bus was used instead.
    pub fallback: bool,
}

/// Buses through which power enters a residual subgraph: the top voltage
/// tier (only when the subgraph spans more than one tier), buses with
/// active generation, and buses fed by an already-directed line.
pub fn entry_points(
    subgraph: &ResidualSubgraph,
    grid: &Grid,
    generation: &[f64],
    partial: &PartialOrientation,
) -> EntryPoints {
    let classes = subgraph.buses.iter().map(|&b| grid.bus_class(b));
    let top = classes.clone().max();
    let bottom = classes.min();
    let tiered = top != bottom;

    let mut entries: Vec<usize> = subgraph
        .buses
        .iter()
        .copied()
        .filter(|&b| {
            let highest = tiered && Some(grid.bus_class(b)) == top;
            let generating = generation[b] > 0.0;
            let fed = grid.neighbors(b).iter().any(|&(li, _)| {
                partial.decided[li]
                    .map(|o| o.direction.ends(grid.line(li)).1 == b)
                    .unwrap_or(false)
            });
            highest || generating || fed
        })
        .collect();

    let fallback = entries.is_empty();
    if fallback {
        entries.push(subgraph.buses[0]);
    }
    EntryPoints {
        buses: entries,
        fallback,
    }
}

/// Multi-source BFS over the subgraph's lines. All entries start at depth
/// 0; buses leave the queue FIFO and neighbors are scanned in (bus id,
/// line id) order. A tree edge is directed from the discovering bus. Lines
/// the tree does not use get a random direction from `rng`, drawn in line
/// id order.
pub fn bfs_orient(
    grid: &Grid,
    subgraph: &ResidualSubgraph,
    entries: &[usize],
    rng: &mut DirectionRng,
) -> Vec<(usize, LineOrientation)> {
    let mut in_subgraph = vec![false; grid.line_count()];
    for &li in &subgraph.lines {
        in_subgraph[li] = true;
    }
    let mut visited = vec![false; grid.bus_count()];
    let mut queue = VecDeque::new();
    for &b in entries {
        if !visited[b] {
            visited[b] = true;
            queue.push_back(b);
        }
    }

    let mut tree: Vec<Option<FlowDirection>> = vec![None; grid.line_count()];
    while let Some(u) = queue.pop_front() {
        for &(li, v) in grid.neighbors(u) {
            if !in_subgraph[li] || visited[v] {
                continue;
            }
            visited[v] = true;
            tree[li] = Some(FlowDirection::out_of(grid.line(li), u));
            queue.push_back(v);
        }
    }

    subgraph
        .lines
        .iter()
        .map(|&li| {
            let o = match tree[li] {
                Some(direction) => LineOrientation {
                    direction,
                    source: DirectionSource::BfsTree,
                },
                None => LineOrientation {
                    direction: rng.direction(),
                    source: DirectionSource::ResidualRandom,
                },
            };
            (li, o)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::apply_heuristics;
    use crate::dispatch::max_capacity_snapshot;
    use crate::grid::build_grid;
    use crate::grid::test_support::dataset;

    type Lines<'a> = &'a [(&'a str, &'a str, &'a str, f64)];

    fn setup(
        buses: &[(&str, f64)],
        lines: Lines<'_>,
        gens: &[(&str, &str, f64)],
    ) -> (Grid, Vec<f64>, PartialOrientation) {
        let ds = dataset(buses, lines, gens);
        let grid = build_grid(&ds);
        let generation = max_capacity_snapshot(&ds).snapshot.bus_generation(&grid);
        let partial = apply_heuristics(&grid, &generation, 42);
        (grid, generation, partial)
    }

    fn ends(
        grid: &Grid,
        out: &[(usize, LineOrientation)],
        line_id: &str,
    ) -> (String, String, DirectionSource) {
        let (li, o) = out
            .iter()
            .find(|(li, _)| grid.line(*li).id == line_id)
            .unwrap();
        let (f, t) = o.direction.ends(grid.line(*li));
        (grid.bus_id(f).into(), grid.bus_id(t).into(), o.source)
    }

    #[test]
    fn subgraph_shapes() {
        let (grid, _, p) = setup(
            &[("a", 240.0), ("b", 138.0)],
            &[("L1", "a", "b", 240.0)],
            &[],
        );
        assert!(residual_subgraphs(&grid, &p).is_empty());

        let (grid, _, p) = setup(
            &[("a", 138.0), ("b", 138.0)],
            &[("L1", "a", "b", 138.0)],
            &[],
        );
        let subs = residual_subgraphs(&grid, &p);
        assert_eq!(
            subs,
            vec![ResidualSubgraph {
                buses: vec![0, 1],
                lines: vec![0]
            }]
        );

        let (grid, _, p) = setup(
            &[("a", 138.0), ("b", 138.0), ("c", 138.0), ("d", 138.0)],
            &[
                ("L1", "a", "b", 138.0),
                ("L2", "b", "c", 138.0),
                ("L3", "c", "d", 138.0),
            ],
            &[],
        );
        let subs = residual_subgraphs(&grid, &p);
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].buses.len(), 4);
        assert_eq!(subs[0].lines.len(), 3);
    }

    #[test]
    fn entry_is_top_tier_bus() {
        // b (240) reaches the 138 buses over 69 kV free-flow lines
        let (grid, g, p) = setup(
            &[("a", 138.0), ("b", 240.0), ("c", 138.0)],
            &[("L1", "a", "b", 69.0), ("L2", "b", "c", 69.0)],
            &[],
        );
        let subs = residual_subgraphs(&grid, &p);
        let e = entry_points(&subs[0], &grid, &g, &p);
        assert_eq!(e.buses, vec![grid.bus_index("b").unwrap()]);
        assert!(!e.fallback);
    }

    #[test]
    fn entry_is_generator_bus() {
        // An active generator directs all of its lines in the heuristic
        // pass, so its bus only reaches a residual subgraph when generation
        // differs between passes. Heuristics run with G1 idle here.
        let (grid, g, p) = setup(
            &[("a", 138.0), ("b", 138.0), ("c", 138.0)],
            &[("L1", "a", "b", 138.0), ("L2", "b", "c", 138.0)],
            &[("G1", "c", 0.0)],
        );
        let subs = residual_subgraphs(&grid, &p);
        let mut gen = g.clone();
        gen[2] = 10.0; // active only for entry selection
        let e = entry_points(&subs[0], &grid, &gen, &p);
        assert_eq!(e.buses, vec![2]);
    }

    #[test]
    fn entry_is_inflow_bus() {
        // x (240) feeds b directly; a-b-c are the undirected 138 path
        let (grid, g, p) = setup(
            &[("a", 138.0), ("b", 138.0), ("c", 138.0), ("x", 240.0)],
            &[
                ("L1", "a", "b", 138.0),
                ("L2", "b", "c", 138.0),
                ("L3", "x", "b", 240.0),
            ],
            &[],
        );
        let subs = residual_subgraphs(&grid, &p);
        assert_eq!(subs.len(), 1);
        let e = entry_points(&subs[0], &grid, &g, &p);
        assert_eq!(e.buses, vec![grid.bus_index("b").unwrap()]);
    }

    #[test]
    fn entry_fallback_is_lowest_id() {
        let (grid, g, p) = setup(
            &[("q", 138.0), ("p", 138.0)],
            &[("L1", "p", "q", 138.0)],
            &[],
        );
        let subs = residual_subgraphs(&grid, &p);
        let e = entry_points(&subs[0], &grid, &g, &p);
        assert!(e.fallback);
        assert_eq!(grid.bus_id(e.buses[0]), "p");
    }

    #[test]
    fn bfs_chain() {
        let (grid, _, p) = setup(
            &[("a", 138.0), ("b", 138.0), ("c", 138.0)],
            &[("L1", "b", "a", 138.0), ("L2", "b", "c", 138.0)],
            &[],
        );
        let subs = residual_subgraphs(&grid, &p);
        let mut rng = DirectionRng::stream(42, 1);
        let out = bfs_orient(&grid, &subs[0], &[0], &mut rng);
        assert_eq!(
            ends(&grid, &out, "L1"),
            ("a".into(), "b".into(), DirectionSource::BfsTree)
        );
        assert_eq!(
            ends(&grid, &out, "L2"),
            ("b".into(), "c".into(), DirectionSource::BfsTree)
        );
    }

    #[test]
    fn bfs_triangle_non_tree_edge_is_random() {
        let (grid, _, p) = setup(
            &[("a", 138.0), ("b", 138.0), ("c", 138.0)],
            &[
                ("L1", "a", "b", 138.0),
                ("L2", "a", "c", 138.0),
                ("L3", "b", "c", 138.0),
            ],
            &[],
        );
        let subs = residual_subgraphs(&grid, &p);
        let mut rng = DirectionRng::stream(42, 1);
        let out = bfs_orient(&grid, &subs[0], &[0], &mut rng);
        assert_eq!(
            ends(&grid, &out, "L1"),
            ("a".into(), "b".into(), DirectionSource::BfsTree)
        );
        assert_eq!(
            ends(&grid, &out, "L2"),
            ("a".into(), "c".into(), DirectionSource::BfsTree)
        );
        assert_eq!(ends(&grid, &out, "L3").2, DirectionSource::ResidualRandom);
    }

    #[test]
    fn bfs_two_entries_on_path() {
        let (grid, _, p) = setup(
            &[("a", 138.0), ("b", 138.0), ("c", 138.0), ("d", 138.0)],
            &[
                ("L1", "a", "b", 138.0),
                ("L2", "b", "c", 138.0),
                ("L3", "c", "d", 138.0),
            ],
            &[],
        );
        let subs = residual_subgraphs(&grid, &p);
        let mut rng = DirectionRng::stream(42, 1);
        let out = bfs_orient(&grid, &subs[0], &[0, 3], &mut rng);
        assert_eq!(
            ends(&grid, &out, "L1"),
            ("a".into(), "b".into(), DirectionSource::BfsTree)
        );
        assert_eq!(
            ends(&grid, &out, "L3"),
            ("d".into(), "c".into(), DirectionSource::BfsTree)
        );
        assert_eq!(ends(&grid, &out, "L2").2, DirectionSource::ResidualRandom);
    }

    #[test]
    fn parallel_line_beyond_the_first_is_random() {
        let (grid, _, p) = setup(
            &[("a", 138.0), ("b", 138.0)],
            &[("L1", "a", "b", 138.0), ("L2", "b", "a", 138.0)],
            &[],
        );
        let subs = residual_subgraphs(&grid, &p);
        let mut rng = DirectionRng::stream(3, 1);
        let out = bfs_orient(&grid, &subs[0], &[0], &mut rng);
        assert_eq!(
            ends(&grid, &out, "L1"),
            ("a".into(), "b".into(), DirectionSource::BfsTree)
        );
        assert_eq!(ends(&grid, &out, "L2").2, DirectionSource::ResidualRandom);
    }
}
