//! Packet-level evaluation of admitted schedules.
//!
//! Every admitted vehicle sends a fixed number of packets on each road it
//! crosses. Within a road, vehicles are given slots by greedy interval
//! colouring, and slots are handed to the road's serving cells in cell-id order,
//! each cell taking as many slots as it has capacity. A packet sent from a slot
//! beyond the road's capacity cannot be scheduled in time and is a violation.
//! Otherwise the packet's SINR is drawn at the road's worst point for its cell
//! (fading i.i.d. per packet) and it is a violation when it needs more RBs than
//! were provisioned for it.

mod campaign;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use campaign::{run_campaign, Campaign, CampaignError, CampaignReport, CampaignRow, EdgeRow};

use crate::channel::{shannon_se, Link};
use crate::error::{Error, Result};
use crate::exec::{mix_seed, Exec};
use crate::graph::build::point_geometry;
use crate::graph::{CapacityGraph, EdgeId, NodeId};
use crate::nr_radio::{allocated_rbs, packets_per_window, rb_per_packet};
use crate::routing::{shortest_time_route, RouteAssignment, VehicleRequest};

/// Packets simulated per independent random stream.
const CHUNK: u64 = 1 << 16;

/// One batch of concurrent requests: `5v + 1` vehicles drawn between
/// `ceil(V / 2^s)` sources and `ceil(V / 2^d)` destinations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub v_index: u32,
    pub s_exponent: u32,
    pub d_exponent: u32,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn vehicles(&self) -> usize {
        5 * self.v_index as usize + 1
    }

    pub fn sources(&self) -> usize {
        self.vehicles().div_ceil(1usize.checked_shl(self.s_exponent).unwrap_or(usize::MAX))
    }

    pub fn destinations(&self) -> usize {
        self.vehicles().div_ceil(1usize.checked_shl(self.d_exponent).unwrap_or(usize::MAX))
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_index > 20 {
            return Err(Error::config(format!(
                "experiment {}: v_index {} outside 0..=20",
                self.name, self.v_index
            )));
        }
        Ok(())
    }
}

/// Draws the request batch of `spec`: distinct source and destination nodes
/// sampled uniformly, then a uniform (source, destination) pair with distinct
/// ends for each vehicle. Every vehicle departs at time 0.
pub fn generate_experiment(spec: &ExperimentSpec, graph: &CapacityGraph) -> Result<Vec<VehicleRequest>> {
    spec.validate()?;
    let n = graph.nodes().len();
    let (s, d) = (spec.sources(), spec.destinations());
    if n < s.max(d) || n < 2 {
        return Err(Error::config(format!(
            "experiment {}: graph has {n} nodes, needs at least {}",
            spec.name,
            s.max(d).max(2)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sources = rand::seq::index::sample(&mut rng, n, s).into_vec();
    let mut dests = rand::seq::index::sample(&mut rng, n, d).into_vec();
    if s == 1 && d == 1 && sources[0] == dests[0] {
        // The only pair would be a loop; draw the destination among the other nodes.
        let k = rand::Rng::random_range(&mut rng, 0..n - 1);
        dests[0] = if k >= sources[0] { k + 1 } else { k };
    }
    let pairs: Vec<(usize, usize)> = sources
        .iter()
        .flat_map(|&a| dests.iter().map(move |&b| (a, b)))
        .filter(|(a, b)| a != b)
        .collect();
    let node_id = |i: usize| -> NodeId { graph.nodes()[i].id.clone() };
    (0..spec.vehicles())
        .map(|v| {
            let (a, b) = pairs[rand::Rng::random_range(&mut rng, 0..pairs.len())];
            VehicleRequest::new(format!("{}-{}", spec.name, v + 1), node_id(a), node_id(b), 0.0)
        })
        .collect()
}

/// Admit-all comparator: every vehicle takes its fastest route on the full
/// graph, ignoring capacities. Only unreachable destinations are refused.
pub fn baseline_admit_all(requests: &[VehicleRequest], graph: &CapacityGraph) -> Vec<RouteAssignment> {
    requests
        .iter()
        .map(|r| {
            shortest_time_route(r, graph).unwrap_or_else(|e| RouteAssignment::errored(&r.vehicle_id, e.to_string()))
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VehicleStats {
    pub vehicle_id: String,
    pub packets: u64,
    pub violations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeStats {
    pub edge: EdgeId,
    pub traversals: usize,
    /// Traversals whose slot exceeded the road's capacity.
    pub over_capacity: usize,
    pub packets: u64,
    pub violations: u64,
    /// Fraction of the road's allocated RBs consumed while it was in use;
    /// `None` when the road has no allocation.
    pub utilization: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ViolationReport {
    pub packets: u64,
    pub violations: u64,
    pub per_vehicle: Vec<VehicleStats>,
    /// Roads that were used, by edge id.
    pub per_edge: Vec<EdgeStats>,
}

impl ViolationReport {
    pub fn ratio(&self) -> f64 {
        if self.packets == 0 {
            0.0
        } else {
            self.violations as f64 / self.packets as f64
        }
    }

    /// Mean of the per-road utilizations that are defined.
    pub fn mean_utilization(&self) -> Option<f64> {
        let u: Vec<f64> = self.per_edge.iter().filter_map(|e| e.utilization).collect();
        (!u.is_empty()).then(|| u.iter().sum::<f64>() / u.len() as f64)
    }
}

#[derive(Clone, Debug)]
pub struct SimulationOptions {
    pub packets_per_vehicle_edge: u64,
    pub seed: u64,
    pub exec: Exec,
}

/// A traversal with its serving arrangement resolved.
struct Job {
    vehicle: usize,
    duration_s: f64,
    /// `None` when the slot is beyond the road's capacity.
    service: Option<Service>,
}

struct Service {
    link: Link,
    /// RBs provisioned per packet.
    rb_prov: u64,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    violations: u64,
    rbs_used: u64,
}

/// Simulates the packets of every admitted vehicle in `assignments`.
pub fn simulate_pdb_violations(
    assignments: &[RouteAssignment],
    graph: &CapacityGraph,
    opts: &SimulationOptions,
) -> Result<ViolationReport> {
    if opts.packets_per_vehicle_edge == 0 {
        return Err(Error::config("packets per vehicle and road must be at least 1"));
    }
    let params = graph.params();
    let nr = &params.nr;
    let table = &params.mcs;
    let rb_by_mcs: Vec<u64> = table.entries().iter().map(|&s| rb_per_packet(s, nr)).collect::<Result<_>>()?;
    let ppw = packets_per_window(nr.pdb_s, nr)?;

    // Traversals grouped by road, in commit order.
    let mut by_edge: BTreeMap<usize, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for (v, a) in assignments.iter().enumerate().filter(|(_, a)| a.admitted) {
        for t in &a.path {
            let e = graph
                .edge_index(&t.edge)
                .ok_or_else(|| Error::Request(format!("vehicle {} uses unknown road `{}`", a.vehicle_id, t.edge)))?;
            by_edge.entry(e).or_default().push((v, t.entry_s, t.exit_s));
        }
    }

    let mut jobs = Vec::new();
    let mut edge_meta = Vec::new();
    for (&e, travs) in &by_edge {
        let serving = graph.serving(e);
        let slots = colour_intervals(travs);
        let first_job = jobs.len();
        for (&(vehicle, entry, exit), &slot) in travs.iter().zip(&slots) {
            let mut start = 0u64;
            let mut service = None;
            for s in serving {
                if (slot as u64) < start + s.capacity {
                    let r = graph.cells().binary_search_by(|c| c.id.cmp(&s.cell)).expect("serving cell exists");
                    let geom = point_geometry(s.worst_point, r, graph.cells())?;
                    service = Some(Service {
                        link: Link::new(&geom, &params.channel),
                        rb_prov: rb_per_packet(s.worst_se, nr)?,
                    });
                    break;
                }
                start += s.capacity;
            }
            jobs.push(Job {
                vehicle,
                duration_s: exit - entry,
                service,
            });
        }
        let allocated: u64 = serving
            .iter()
            .map(|s| allocated_rbs(nr.pdb_s, s.iota, nr))
            .sum::<Result<u64>>()?;
        edge_meta.push((e, first_job..jobs.len(), allocated, busy_length(travs)));
    }

    let n = opts.packets_per_vehicle_edge;
    let chunks_per_job = n.div_ceil(CHUNK);
    let work = jobs.len() * chunks_per_job as usize;
    let tallies = opts.exec.map_range(work, |k| {
        let (j, c) = (k / chunks_per_job as usize, k as u64 % chunks_per_job);
        let count = CHUNK.min(n - c * CHUNK);
        let Some(svc) = &jobs[j].service else {
            return Tally {
                violations: count,
                rbs_used: 0,
            };
        };
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, &[j as u64, c]));
        let mut t = Tally::default();
        for _ in 0..count {
            let se = shannon_se(svc.link.sample(&mut rng));
            match table.effective_index(se).map(|i| rb_by_mcs[i]) {
                Some(rb) if rb <= svc.rb_prov => t.rbs_used += rb,
                _ => {
                    t.violations += 1;
                    t.rbs_used += svc.rb_prov;
                }
            }
        }
        t
    });
    let mut per_job = vec![Tally::default(); jobs.len()];
    for (k, t) in tallies.into_iter().enumerate() {
        let j = k / chunks_per_job as usize;
        per_job[j].violations += t.violations;
        per_job[j].rbs_used += t.rbs_used;
    }

    let mut report = ViolationReport {
        per_vehicle: assignments
            .iter()
            .map(|a| VehicleStats {
                vehicle_id: a.vehicle_id.clone(),
                ..VehicleStats::default()
            })
            .collect(),
        ..ViolationReport::default()
    };
    for (job, t) in jobs.iter().zip(&per_job) {
        let v = &mut report.per_vehicle[job.vehicle];
        v.packets += n;
        v.violations += t.violations;
        report.packets += n;
        report.violations += t.violations;
    }
    for (e, range, allocated, busy_s) in edge_meta {
        let mut used = 0.0;
        let mut violations = 0;
        let mut over = 0;
        for j in range.clone() {
            violations += per_job[j].violations;
            match jobs[j].service {
                // RBs per window: packets per window times mean RBs per packet.
                Some(_) => used += jobs[j].duration_s * ppw as f64 * per_job[j].rbs_used as f64 / n as f64,
                None => over += 1,
            }
        }
        let utilization = (allocated > 0 && busy_s > 0.0).then(|| used / (allocated as f64 * busy_s));
        report.per_edge.push(EdgeStats {
            edge: graph.edges()[e].id.clone(),
            traversals: range.len(),
            over_capacity: over,
            packets: n * range.len() as u64,
            violations,
            utilization,
        });
    }
    Ok(report)
}

/// Greedy colouring of half-open intervals taken in order of entry time (ties
/// by position): each gets the lowest slot free at its entry. Uses exactly as
/// many slots as the maximum number of overlapping intervals.
fn colour_intervals(travs: &[(usize, f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..travs.len()).collect();
    order.sort_by(|&a, &b| travs[a].1.total_cmp(&travs[b].1).then(a.cmp(&b)));
    let mut free_at: Vec<f64> = Vec::new();
    let mut slots = vec![0; travs.len()];
    for i in order {
        let (_, entry, exit) = travs[i];
        let slot = match free_at.iter().position(|&f| f <= entry) {
            Some(k) => k,
            None => {
                free_at.push(0.0);
                free_at.len() - 1
            }
        };
        free_at[slot] = exit;
        slots[i] = slot;
    }
    slots
}

/// Length of the union of the intervals.
fn busy_length(travs: &[(usize, f64, f64)]) -> f64 {
    let mut iv: Vec<(f64, f64)> = travs.iter().map(|&(_, a, b)| (a, b)).collect();
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in iv {
        cur = match cur {
            Some((s, e)) if a <= e => Some((s, e.max(b))),
            Some((s, e)) => {
                total += e - s;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    total + cur.map_or(0.0, |(s, e)| e - s)
}
