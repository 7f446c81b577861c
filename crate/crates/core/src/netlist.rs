//! Two-pin nets between chiplets, half-perimeter wirelength, and routed
//! wirelength through per-edge pin clumps.
//!
//! Pins are not modeled individually: all wires entering a chiplet do so
//! through one of four *clumps* sitting at the midpoints of its footprint
//! edges. A wire between chiplets i and j runs from one clump of i to one
//! clump of j and costs their Manhattan distance.

use crate::geometry::Placement;

/// A bundle of wires between two chiplets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Net {
    pub id: usize,
    /// Indices of the two connected chiplets; always distinct.
    pub endpoints: (usize, usize),
    /// Number of parallel wires in the bundle; at least 1.
    pub wire_count: u32,
}

impl Net {
    pub fn new(id: usize, a: usize, b: usize, wire_count: u32) -> Self {
        assert_ne!(a, b, "a net connects two distinct chiplets");
        assert!(wire_count >= 1, "a net carries at least one wire");
        Net { id, endpoints: (a, b), wire_count }
    }
}

/// Chiplet edges, in tie-breaking order: when several clump pairs are
/// equally short the router picks the lexicographically smallest
/// (source side, sink side) pair under `Left < Right < Top < Bottom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Top, Side::Bottom];
}

/// A pin clump: the midpoint of one footprint edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinClump {
    pub chiplet_id: usize,
    pub side: Side,
    /// Position on the interposer in mm.
    pub location: (f64, f64),
}

/// The four clumps of chiplet `idx` in [`Side::ALL`] order, computed on the
/// rotation-applied footprint.
pub fn clump_locations(placement: &Placement, idx: usize) -> [PinClump; 4] {
    let r = placement.rect(idx);
    let cx = (r.x_min + r.x_max) / 2.0;
    let cy = (r.y_min + r.y_max) / 2.0;
    let at = |side: Side, location: (f64, f64)| PinClump { chiplet_id: idx, side, location };
    [
        at(Side::Left, (r.x_min, cy)),
        at(Side::Right, (r.x_max, cy)),
        at(Side::Top, (cx, r.y_max)),
        at(Side::Bottom, (cx, r.y_min)),
    ]
}

/// Wires of one net grouped by their (source clump, sink clump) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireGroup {
    /// Clump side on the net's first endpoint.
    pub source: Side,
    /// Clump side on the net's second endpoint.
    pub sink: Side,
    pub wires: u32,
}

/// Clump assignment for one net; the group wire counts sum to the net's
/// `wire_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetRoute {
    pub net_id: usize,
    pub groups: Vec<WireGroup>,
}

/// A complete clump assignment with its total routed wirelength in mm.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingSolution {
    pub routes: Vec<NetRoute>,
    pub total_wirelength: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RouteError {
    /// The exhaustive router only handles small instances.
    TooManyWires { total: u32, limit: u32 },
}

impl std::fmt::Display for RouteError {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            RouteError::TooManyWires { total, limit } => {
                write!(f, "exhaustive routing supports at most {limit} wires, got {total}")
            }
        }
    }
}

impl std::error::Error for RouteError {}

fn manhattan(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs() + (a.1 - b.1).abs()
}

/// Half-perimeter wirelength: for two-pin nets this is the Manhattan
/// distance between the chiplet centers, weighted by wire count.
pub fn hpwl(placement: &Placement, nets: &[Net]) -> f64 {
    nets.iter()
        .map(|net| {
            let (a, b) = net.endpoints;
            f64::from(net.wire_count) * manhattan(placement.centers[a], placement.centers[b])
        })
        .sum()
}

/// Manhattan distances of all 16 clump pairs of a net, indexed
/// `source_side * 4 + sink_side` in [`Side::ALL`] order.
fn pair_distances(placement: &Placement, net: &Net) -> [f64; 16] {
    let (a, b) = net.endpoints;
    let from = clump_locations(placement, a);
    let to = clump_locations(placement, b);
    let mut d = [0.0; 16];
    for (l, src) in from.iter().enumerate() {
        for (k, snk) in to.iter().enumerate() {
            d[l * 4 + k] = manhattan(src.location, snk.location);
        }
    }
    d
}

/// Route every net greedily: all wires of a net take the clump pair with the
/// smallest Manhattan distance, ties broken toward the lexicographically
/// smallest (source side, sink side).
///
/// For this cost model the greedy choice is exact: wires do not interact, so
/// each one is optimal on a shortest pair (see [`brute_force_route`]).
pub fn route_wirelength(placement: &Placement, nets: &[Net]) -> RoutingSolution {
    let mut routes = Vec::with_capacity(nets.len());
    let mut total = 0.0;
    for net in nets {
        let d = pair_distances(placement, net);
        let mut best = 0;
        for q in 1..16 {
            if d[q] < d[best] {
                best = q;
            }
        }
        let group = WireGroup {
            source: Side::ALL[best / 4],
            sink: Side::ALL[best % 4],
            wires: net.wire_count,
        };
        total += f64::from(net.wire_count) * d[best];
        routes.push(NetRoute { net_id: net.id, groups: vec![group] });
    }
    RoutingSolution { routes, total_wirelength: total }
}

/// Maximum total wire count accepted by [`brute_force_route`].
pub const BRUTE_FORCE_WIRE_LIMIT: u32 = 12;

/// Exhaustive reference router: enumerates every way to distribute each
/// net's wires over its 16 clump pairs and keeps the cheapest assignment
/// (first encountered on ties). Exponential in the wire count; refuses
/// instances with more than [`BRUTE_FORCE_WIRE_LIMIT`] wires in total.
pub fn brute_force_route(placement: &Placement, nets: &[Net]) -> Result<RoutingSolution, RouteError> {
    let total_wires: u32 = nets.iter().map(|n| n.wire_count).sum();
    if total_wires > BRUTE_FORCE_WIRE_LIMIT {
        return Err(RouteError::TooManyWires { total: total_wires, limit: BRUTE_FORCE_WIRE_LIMIT });
    }

    let mut routes = Vec::with_capacity(nets.len());
    let mut total = 0.0;
    for net in nets {
        let d = pair_distances(placement, net);
        let mut best_cost = f64::INFINITY;
        let mut best_counts = [0u32; 16];
        let mut counts = [0u32; 16];
        distribute(&d, 0, net.wire_count, 0.0, &mut counts, &mut best_cost, &mut best_counts);
        let groups: Vec<WireGroup> = (0..16)
            .filter(|&q| best_counts[q] > 0)
            .map(|q| WireGroup { source: Side::ALL[q / 4], sink: Side::ALL[q % 4], wires: best_counts[q] })
            .collect();
        total += best_cost;
        routes.push(NetRoute { net_id: net.id, groups });
    }
    Ok(RoutingSolution { routes, total_wirelength: total })
}

/// Recursively assign `remaining` wires to pairs `q..16`, enumerating counts
/// for each pair in descending order so the all-on-one-pair candidates come
/// first.
fn distribute(
    d: &[f64; 16],
    q: usize,
    remaining: u32,
    cost: f64,
    counts: &mut [u32; 16],
    best_cost: &mut f64,
    best_counts: &mut [u32; 16],
) {
    if q == 15 {
        let final_cost = cost + f64::from(remaining) * d[15];
        counts[15] = remaining;
        if final_cost < *best_cost {
            *best_cost = final_cost;
            *best_counts = *counts;
        }
        counts[15] = 0;
        return;
    }
    let mut c = remaining;
    loop {
        counts[q] = c;
        distribute(d, q + 1, remaining - c, cost + f64::from(c) * d[q], counts, best_cost, best_counts);
        counts[q] = 0;
        if c == 0 {
            break;
        }
        c -= 1;
    }
}
