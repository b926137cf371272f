//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::Rng;
use tovac::geo::{haversine_m, LatLon};
use tovac::graph::{
    build_capacity_graph, ingest_cells, ingest_roads, BuildOptions, CapacityGraph, EdgeId, IngestOptions, NodeId, RoadEdge,
    RoadNode,
};
use tovac::routing::{RouteAssignment, VehicleRequest};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/three_roads").join(name)
}

pub fn three_road_graph(opts: &BuildOptions) -> CapacityGraph {
    let roads = ingest_roads(&fixture("roads.csv"), &IngestOptions::default()).unwrap();
    let cells = ingest_cells(&fixture("cells.csv")).unwrap();
    build_capacity_graph(&roads, &cells, opts).unwrap()
}

pub fn three_road_requests(n: usize) -> Vec<VehicleRequest> {
    (1..=n)
        .map(|i| VehicleRequest::new(i.to_string(), NodeId::from("u"), NodeId::from("v"), 0.0).unwrap())
        .collect()
}

/// A random directed road graph with `n` nodes in a 2 km box. Each ordered
/// pair is joined with probability `p`; roads are 1 to 1.5 times the chord
/// long, and capacities are drawn from `caps`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64, caps: std::ops::RangeInclusive<u64>) -> CapacityGraph {
    let nodes: Vec<RoadNode> = (0..n)
        .map(|i| RoadNode {
            id: NodeId(format!("n{i:02}")),
            pos: LatLon::new(45.0 + rng.random_range(0.0..0.018), 7.6 + rng.random_range(0.0..0.025)).unwrap(),
        })
        .collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b || !rng.random_bool(p) {
                continue;
            }
            let chord = haversine_m(nodes[a].pos, nodes[b].pos).max(1.0);
            let len = chord * rng.random_range(1.0..1.5);
            let speed = [30.0, 50.0, 70.0, 90.0][rng.random_range(0..4)];
            edges.push(
                RoadEdge::new(
                    EdgeId(format!("e{a:02}-{b:02}")),
                    nodes[a].id.clone(),
                    nodes[b].id.clone(),
                    len,
                    speed,
                    vec![nodes[a].pos, nodes[b].pos],
                    1000.0,
                )
                .unwrap(),
            );
        }
    }
    let capacity = edges.iter().map(|_| rng.random_range(caps.clone())).collect();
    let serving = vec![Vec::new(); edges.len()];
    CapacityGraph::from_parts(BuildOptions::default().params(), nodes, edges, Vec::new(), capacity, serving).unwrap()
}

/// Checks every admitted assignment against the graph: contiguous path from
/// source to destination, entry no earlier than departure, each hop taking
/// exactly its travel time, and at most `capacity` vehicles on a road at any
/// instant (half-open intervals, by sweep line).
pub fn check_schedule(graph: &CapacityGraph, requests: &[VehicleRequest], out: &[RouteAssignment]) -> Result<(), String> {
    let mut by_edge: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for (r, a) in requests.iter().zip(out) {
        if !a.admitted {
            if !a.path.is_empty() {
                return Err(format!("{}: rejected with a path", a.vehicle_id));
            }
            continue;
        }
        let mut at = r.source.clone();
        let mut t = r.depart_time_s;
        for hop in &a.path {
            let e = &graph.edges()[graph.edge_index(&hop.edge).ok_or("unknown edge")?];
            if e.from != at {
                return Err(format!("{}: path breaks at {}", a.vehicle_id, hop.edge));
            }
            if hop.entry_s < t - 1e-9 {
                return Err(format!("{}: enters {} before arriving", a.vehicle_id, hop.edge));
            }
            if (hop.exit_s - hop.entry_s - e.travel_time_s()).abs() > 1e-9 {
                return Err(format!("{}: wrong travel time on {}", a.vehicle_id, hop.edge));
            }
            by_edge.entry(hop.edge.as_str()).or_default().push((hop.entry_s, hop.exit_s));
            at = e.to.clone();
            t = hop.exit_s;
        }
        if at != r.destination {
            return Err(format!("{}: ends at {at}", a.vehicle_id));
        }
        if (a.total_time_s - (t - r.depart_time_s)).abs() > 1e-9 {
            return Err(format!("{}: total time mismatch", a.vehicle_id));
        }
    }
    for (edge, ivs) in by_edge {
        let cap = graph.capacity_of(&EdgeId::from(edge)).unwrap() as i64;
        let peak = max_overlap(&ivs);
        if peak > cap {
            return Err(format!("{edge}: {peak} vehicles on a road of capacity {cap}"));
        }
    }
    Ok(())
}

/// Largest number of half-open intervals covering one instant.
pub fn max_overlap(ivs: &[(f64, f64)]) -> i64 {
    let mut events: Vec<(f64, i64)> = ivs.iter().flat_map(|&(a, b)| [(a, 1), (b, -1)]).collect();
    // Exits sort before entries at the same instant.
    events.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let (mut cur, mut peak) = (0, 0);
    for (_, d) in events {
        cur += d;
        peak = peak.max(cur);
    }
    peak
}

/// Shortest travel time over all simple paths, by exhaustive search.
pub fn brute_force_shortest(graph: &CapacityGraph, src: usize, dst: usize) -> Option<f64> {
    fn go(g: &CapacityGraph, at: usize, dst: usize, seen: &mut Vec<bool>, acc: f64, best: &mut Option<f64>) {
        if at == dst {
            if best.is_none_or(|b| acc < b) {
                *best = Some(acc);
            }
            return;
        }
        for &e in g.out_edges(at) {
            let (_, to) = g.edge_ends(e);
            if !seen[to] {
                seen[to] = true;
                go(g, to, dst, seen, acc + g.edges()[e].travel_time_s(), best);
                seen[to] = false;
            }
        }
    }
    let mut seen = vec![false; graph.nodes().len()];
    seen[src] = true;
    let mut best = None;
    go(graph, src, dst, &mut seen, 0.0, &mut best);
    best
}
