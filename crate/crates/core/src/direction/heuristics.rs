use crate::grid::{Grid, VoltageClass};

use super::rng::DirectionRng;
use super::{
    DeferReason, DirectionSource, FlowDirection, HeuristicConflict, LineOrientation,
    PartialOrientation,
};

/// Power flows from the higher-tier bus to the lower-tier bus.
pub fn two_end_voltage_rule(a: VoltageClass, b: VoltageClass) -> Option<FlowDirection> {
    match a.cmp(&b) {
        std::cmp::Ordering::Greater => Some(FlowDirection::AtoB),
        std::cmp::Ordering::Less => Some(FlowDirection::BtoA),
        std::cmp::Ordering::Equal => None,
    }
}

/// A bus below the line's tier may not feed the line. Decides only when
/// exactly one end is allowed to feed it.
pub fn line_voltage_rule(
    a: VoltageClass,
    b: VoltageClass,
    line: VoltageClass,
) -> Option<FlowDirection> {
    match (a >= line, b >= line) {
        (true, false) => Some(FlowDirection::AtoB),
        (false, true) => Some(FlowDirection::BtoA),
        _ => None,
    }
}

/// Heuristic pass over every line, in line-id order.
///
/// Precedence is generator source, then two-end voltage, then line
/// voltage. A line between two active generators gets a random direction
/// from stream 0 of `seed`. A line whose tier is below both endpoint tiers
/// is left open for the residual stage, unless a generator decides it.
/// `generation` is total output per bus index.
pub fn apply_heuristics(grid: &Grid, generation: &[f64], seed: u64) -> PartialOrientation {
    let mut rng = DirectionRng::stream(seed, 0);
    let n = grid.line_count();
    let mut out = PartialOrientation {
        decided: vec![None; n],
        deferred: vec![None; n],
        conflicts: Vec::new(),
    };

    for (li, line) in grid.lines().iter().enumerate() {
        let (ca, cb) = (grid.bus_class(line.a), grid.bus_class(line.b));
        let gen_a = generation[line.a] > 0.0;
        let gen_b = generation[line.b] > 0.0;

        let voltage_rule = two_end_voltage_rule(ca, cb)
            .map(|d| (d, DirectionSource::TwoEndVoltage))
            .or_else(|| {
                line_voltage_rule(ca, cb, line.class).map(|d| (d, DirectionSource::LineVoltage))
            });

        let decided = match (gen_a, gen_b) {
            (true, true) => Some(LineOrientation {
                direction: rng.direction(),
                source: DirectionSource::BothEndsGeneratorRandom,
            }),
            (true, false) | (false, true) => {
                let direction = if gen_a {
                    FlowDirection::AtoB
                } else {
                    FlowDirection::BtoA
                };
                if let Some((d, src)) = voltage_rule {
                    if d != direction {
                        out.conflicts.push(HeuristicConflict {
                            line: li,
                            overridden: src,
                        });
                    }
                }
                Some(LineOrientation {
                    direction,
                    source: DirectionSource::GeneratorSource,
                })
            }
            (false, false) => {
                if line.class < ca && line.class < cb {
                    out.deferred[li] = Some(DeferReason::FreeFlow);
                    None
                } else if let Some((direction, source)) = voltage_rule {
                    Some(LineOrientation { direction, source })
                } else {
                    out.deferred[li] = Some(DeferReason::Undetermined);
                    None
                }
            }
        };
        out.decided[li] = decided;
    }
    out
}
