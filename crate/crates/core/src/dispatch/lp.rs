use std::io::Write;

use crate::direction::Orientation;
use crate::grid::Grid;

use super::simplex::{solve, SimplexError, StandardLp};
use super::{directed_ends, BusLoad, DispatchError, GenerationSnapshot};

/// Largest acceptable nodal balance residual, in MW.
pub const BALANCE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct LineFlow {
    pub line_id: String,
    pub from_bus: String,
    pub to_bus: String,
    pub flow_mw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BusBalance {
    pub bus_id: String,
    pub injection_mw: f64,
    pub load_mw: f64,
    pub epsilon_mw: f64,
    /// `inflow + injection - outflow - load + epsilon`, ideally 0.
    pub residual_mw: f64,
}

/// An optimal point of the flow LP. Only bus quantities and the objective
/// are unique; line flows are one consistent allocation among possibly
/// many.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSolution {
    pub lines: Vec<LineFlow>,
    pub buses: Vec<BusBalance>,
    pub objective: f64,
    pub max_residual: f64,
    pub iterations: usize,
}

impl FlowSolution {
    pub fn flow(&self, line_id: &str) -> Option<f64> {
        self.lines
            .binary_search_by(|l| l.line_id.as_str().cmp(line_id))
            .ok()
            .map(|i| self.lines[i].flow_mw)
    }

    pub fn bus(&self, bus_id: &str) -> Option<&BusBalance> {
        self.buses
            .binary_search_by(|b| b.bus_id.as_str().cmp(bus_id))
            .ok()
            .map(|i| &self.buses[i])
    }

    pub fn total_injection(&self) -> f64 {
        self.buses.iter().map(|b| b.injection_mw).sum()
    }

    pub fn total_load(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }

    pub fn total_epsilon(&self) -> f64 {
        self.buses.iter().map(|b| b.epsilon_mw).sum()
    }

    /// `line_id,from_bus,to_bus,flow_mw`
    pub fn write_flows_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["line_id", "from_bus", "to_bus", "flow_mw"])?;
        for l in &self.lines {
            wtr.write_record([
                l.line_id.as_str(),
                &l.from_bus,
                &l.to_bus,
                &l.flow_mw.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// `bus_id,injection_mw,load_mw,epsilon_mw`
    pub fn write_buses_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["bus_id", "injection_mw", "load_mw", "epsilon_mw"])?;
        for b in &self.buses {
            wtr.write_record([
                b.bus_id.clone(),
                b.injection_mw.to_string(),
                b.load_mw.to_string(),
                b.epsilon_mw.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn summary_text(&self) -> String {
        let unmet = self
            .buses
            .iter()
            .filter(|b| b.epsilon_mw > BALANCE_TOLERANCE)
            .count();
        format!(
            "objective_mw={}\nmax_residual_mw={}\ntotal_injection_mw={}\ntotal_load_mw={}\nbuses_with_unmet_load={}\nbuses={}\nlines={}\nsimplex_iterations={}\n",
            self.objective,
            self.max_residual,
            self.total_injection(),
            self.total_load(),
            unmet,
            self.buses.len(),
            self.lines.len(),
            self.iterations,
        )
    }
}

/// Minimizes total unmet load Σε subject to, at every bus,
/// `inflow + g - outflow - load + ε = 0` with `0 ≤ g ≤ capacity`,
/// flows `≥ 0` along the orientation and `ε ≥ 0`. Capacity at a bus is the
/// summed snapshot output of its generators.
pub fn solve_flow_lp(
    orientation: &Orientation,
    grid: &Grid,
    bus_load: &BusLoad,
    snapshot: &GenerationSnapshot,
) -> Result<FlowSolution, DispatchError> {
    let ends = directed_ends(grid, orientation)?;
    let n = grid.bus_count();
    let nl = grid.line_count();
    let cap = snapshot.bus_generation(grid);
    let load: Vec<f64> = grid.bus_ids().iter().map(|id| bus_load.get(id)).collect();
    let gen_buses: Vec<usize> = (0..n).filter(|&b| cap[b] > 0.0).collect();
    let ng = gen_buses.len();

    // Columns: flows, injections, epsilons, capacity slacks.
    let g_col = |k: usize| nl + k;
    let e_col = |b: usize| nl + ng + b;
    let s_col = |k: usize| nl + ng + n + k;
    let cols = nl + ng + n + ng;
    let rows = n + ng;

    let mut a = vec![vec![0.0; cols]; rows];
    let mut rhs = vec![0.0; rows];
    let mut c = vec![0.0; cols];
    let mut basis = Vec::with_capacity(rows);
    for (li, &(f, t)) in ends.iter().enumerate() {
        a[t][li] += 1.0;
        a[f][li] -= 1.0;
    }
    for b in 0..n {
        a[b][e_col(b)] = 1.0;
        c[e_col(b)] = 1.0;
        rhs[b] = load[b];
        basis.push(e_col(b));
    }
    for (k, &b) in gen_buses.iter().enumerate() {
        a[b][g_col(k)] = 1.0;
        a[n + k][g_col(k)] = 1.0;
        a[n + k][s_col(k)] = 1.0;
        rhs[n + k] = cap[b];
        basis.push(s_col(k));
    }

    let lp = StandardLp {
        a,
        b: rhs,
        c,
        basis,
    };
    let cap_iters = 50 * (rows + cols) + 1000;
    let result = solve(&lp, cap_iters).map_err(|e| match e {
        SimplexError::Stall { iterations } => DispatchError::SolverStall { iterations },
        SimplexError::Unbounded { .. } => DispatchError::Unbounded,
    })?;
    let x = result.x;

    let mut injection = vec![0.0; n];
    for (k, &b) in gen_buses.iter().enumerate() {
        injection[b] = x[g_col(k)].min(cap[b]);
    }
    let mut balance: Vec<f64> = (0..n)
        .map(|b| injection[b] - load[b] + x[e_col(b)])
        .collect();
    for (li, &(f, t)) in ends.iter().enumerate() {
        balance[t] += x[li];
        balance[f] -= x[li];
    }

    let lines = ends
        .iter()
        .enumerate()
        .map(|(li, &(f, t))| LineFlow {
            line_id: grid.line(li).id.clone(),
            from_bus: grid.bus_id(f).to_string(),
            to_bus: grid.bus_id(t).to_string(),
            flow_mw: x[li],
        })
        .collect();
    let buses: Vec<BusBalance> = (0..n)
        .map(|b| BusBalance {
            bus_id: grid.bus_id(b).to_string(),
            injection_mw: injection[b],
            load_mw: load[b],
            epsilon_mw: x[e_col(b)],
            residual_mw: balance[b],
        })
        .collect();
    let max_residual = buses
        .iter()
        .map(|b| b.residual_mw.abs())
        .fold(0.0, f64::max);
    let objective = buses.iter().map(|b| b.epsilon_mw).sum();
    Ok(FlowSolution {
        lines,
        buses,
        objective,
        max_residual,
        iterations: result.iterations,
    })
}
