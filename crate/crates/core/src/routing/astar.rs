//! Time-dependent A* over (node, arrival time) states.
//!
//! Whether a road can be used depends on when the vehicle reaches it, so a node
//! reached at two different times yields two distinct states and the search may
//! return a walk (for instance a detour that lets an earlier vehicle clear a
//! full road). Once past the ledger horizon every road is as free as it will
//! ever be, so from there on the earliest arrival at a node dominates later ones
//! and the search becomes plain A*.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet, VecDeque};

use super::ledger::ScheduleLedger;
use crate::geo::haversine_m;
use crate::graph::CapacityGraph;

/// Default bound on the number of states expanded for one request.
pub const DEFAULT_LABEL_BUDGET: usize = 2_000_000;

/// Arrival times closer than this are treated as the same state.
const TIME_QUANTUM_S: f64 = 1e-6;

/// Time-dependent cost of a road.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    Finite(f64),
    /// The road is full for this vehicle at this time and cannot be used.
    Infinite,
}

impl Weight {
    pub fn is_finite(self) -> bool {
        matches!(self, Weight::Finite(_))
    }
}

/// The travel time of `edge` if fewer than its capacity of other vehicles
/// overlap `[arrival_s, arrival_s + tau)`, else [`Weight::Infinite`].
pub fn edge_weight(graph: &CapacityGraph, edge: usize, arrival_s: f64, vehicle: &str, ledger: &ScheduleLedger) -> Weight {
    let e = &graph.edges()[edge];
    let tau = e.travel_time_s();
    let busy = ledger.overlap_count_unchecked(&e.id, arrival_s, arrival_s + tau, Some(vehicle)) as u64;
    if busy < graph.capacity(edge) {
        Weight::Finite(tau)
    } else {
        Weight::Infinite
    }
}

#[derive(Clone, Copy)]
pub(crate) enum Costing<'a> {
    /// Respect road capacities against the committed ledger.
    Capacity { ledger: &'a ScheduleLedger, vehicle: &'a str },
    /// Plain travel times; capacities ignored.
    Static,
}

/// A found route: edge indices with entry and exit times, and the summed travel time.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Found {
    pub hops: Vec<(usize, f64, f64)>,
    pub total_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum SearchResult {
    Found(Found),
    NoPath,
    BudgetExhausted,
}

struct Label {
    node: usize,
    t: f64,
    g: f64,
    parent: Option<usize>,
    via: usize,
}

#[derive(PartialEq)]
struct Entry {
    f: f64,
    rank: usize,
    seq: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Reversed so the max-heap pops the smallest f, then the smallest node id,
    // then the oldest label.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.rank.cmp(&self.rank))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// True when `dst` can be reached from `src` at all, ignoring time.
pub(crate) fn reachable(graph: &CapacityGraph, src: usize, dst: usize) -> bool {
    let mut seen = vec![false; graph.nodes().len()];
    let mut queue = VecDeque::from([src]);
    seen[src] = true;
    while let Some(n) = queue.pop_front() {
        if n == dst {
            return true;
        }
        for &e in graph.out_edges(n) {
            let next = graph.edge_ends(e).1;
            if !seen[next] {
                seen[next] = true;
                queue.push_back(next);
            }
        }
    }
    false
}

pub(crate) fn search(
    graph: &CapacityGraph,
    src: usize,
    dst: usize,
    depart_s: f64,
    costing: Costing<'_>,
    budget: usize,
) -> SearchResult {
    if !reachable(graph, src, dst) {
        return SearchResult::NoPath;
    }
    let speed = graph.heuristic_speed_mps();
    let goal = graph.nodes()[dst].pos;
    let h: Vec<f64> = graph
        .nodes()
        .iter()
        .map(|n| if speed > 0.0 { haversine_m(n.pos, goal) / speed } else { 0.0 })
        .collect();
    let horizon = match costing {
        Costing::Capacity { ledger, .. } => ledger.horizon_s(),
        Costing::Static => f64::NEG_INFINITY,
    };

    let mut labels = vec![Label {
        node: src,
        t: depart_s,
        g: 0.0,
        parent: None,
        via: usize::MAX,
    }];
    let mut heap = BinaryHeap::from([Entry {
        f: h[src],
        rank: src,
        seq: 0,
    }]);
    let mut seen: HashSet<(usize, i64)> = HashSet::new();
    let mut best_after = vec![f64::INFINITY; graph.nodes().len()];
    let mut closed_after = vec![false; graph.nodes().len()];
    if depart_s >= horizon {
        best_after[src] = depart_s;
    } else {
        seen.insert((src, quantize(depart_s)));
    }

    let mut pops = 0usize;
    while let Some(Entry { seq, .. }) = heap.pop() {
        let (node, t, g) = (labels[seq].node, labels[seq].t, labels[seq].g);
        if t >= horizon {
            if closed_after[node] || t > best_after[node] {
                continue;
            }
            closed_after[node] = true;
        }
        pops += 1;
        if pops > budget {
            return SearchResult::BudgetExhausted;
        }
        if node == dst {
            return SearchResult::Found(unwind(&labels, seq, g));
        }
        for &e in graph.out_edges(node) {
            let tau = match costing {
                Costing::Static => graph.edges()[e].travel_time_s(),
                Costing::Capacity { ledger, vehicle } => match edge_weight(graph, e, t, vehicle, ledger) {
                    Weight::Finite(tau) => tau,
                    Weight::Infinite => continue,
                },
            };
            let next = graph.edge_ends(e).1;
            let (t2, g2) = (t + tau, g + tau);
            if t2 >= horizon {
                if closed_after[next] || best_after[next] <= t2 {
                    continue;
                }
                best_after[next] = t2;
            } else if !seen.insert((next, quantize(t2))) {
                continue;
            }
            labels.push(Label {
                node: next,
                t: t2,
                g: g2,
                parent: Some(seq),
                via: e,
            });
            heap.push(Entry {
                f: g2 + h[next],
                rank: next,
                seq: labels.len() - 1,
            });
        }
    }
    SearchResult::NoPath
}

fn quantize(t: f64) -> i64 {
    (t / TIME_QUANTUM_S).round() as i64
}

fn unwind(labels: &[Label], mut at: usize, total_s: f64) -> Found {
    let mut hops = Vec::new();
    while let Some(p) = labels[at].parent {
        hops.push((labels[at].via, labels[p].t, labels[at].t));
        at = p;
    }
    hops.reverse();
    Found { hops, total_s }
}
