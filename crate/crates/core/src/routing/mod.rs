//! Admission control and routing against road capacities.
//!
//! Vehicles are handled one at a time in request order. Each is routed by a
//! time-dependent A* that may only use a road while fewer than its capacity of
//! already admitted vehicles are on it; an admitted vehicle's road intervals are
//! committed before the next request is considered, a rejected one leaves no trace.

mod astar;
mod ledger;

use std::path::Path;

pub use astar::{edge_weight, Weight, DEFAULT_LABEL_BUDGET};
pub use ledger::{Occupancy, ScheduleLedger};

use astar::{search, Costing, Found, SearchResult};

use crate::error::{read_to_string, write_string, Error, Result};
use crate::graph::ingest::line_of;
use crate::graph::{CapacityGraph, EdgeId, NodeId};

#[derive(Clone, Debug, PartialEq)]
pub struct VehicleRequest {
    pub vehicle_id: String,
    pub source: NodeId,
    pub destination: NodeId,
    pub depart_time_s: f64,
}

impl VehicleRequest {
    pub fn new(vehicle_id: impl Into<String>, source: NodeId, destination: NodeId, depart_time_s: f64) -> Result<Self> {
        let vehicle_id = vehicle_id.into();
        if source == destination {
            return Err(Error::Request(format!("vehicle {vehicle_id}: source equals destination `{source}`")));
        }
        if !(depart_time_s >= 0.0 && depart_time_s.is_finite()) {
            return Err(Error::Request(format!(
                "vehicle {vehicle_id}: departure time {depart_time_s} must be finite and non-negative"
            )));
        }
        Ok(VehicleRequest {
            vehicle_id,
            source,
            destination,
            depart_time_s,
        })
    }
}

/// One road on an admitted route.
#[derive(Clone, Debug, PartialEq)]
pub struct Traversal {
    pub edge: EdgeId,
    pub entry_s: f64,
    pub exit_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouteAssignment {
    pub vehicle_id: String,
    pub admitted: bool,
    /// Roads in travel order; empty unless admitted.
    pub path: Vec<Traversal>,
    /// Sum of the travel times of `path`.
    pub total_time_s: f64,
    /// Set when the request itself was invalid; such rows are neither admitted nor rejected.
    pub error: Option<String>,
}

impl RouteAssignment {
    pub fn rejected(vehicle_id: impl Into<String>) -> Self {
        RouteAssignment {
            vehicle_id: vehicle_id.into(),
            admitted: false,
            path: Vec::new(),
            total_time_s: 0.0,
            error: None,
        }
    }

    pub fn errored(vehicle_id: impl Into<String>, msg: impl Into<String>) -> Self {
        RouteAssignment {
            error: Some(msg.into()),
            ..Self::rejected(vehicle_id)
        }
    }

    pub fn edge_ids(&self) -> Vec<&EdgeId> {
        self.path.iter().map(|t| &t.edge).collect()
    }

    fn from_found(vehicle_id: &str, graph: &CapacityGraph, found: Found) -> Self {
        let path = found
            .hops
            .into_iter()
            .map(|(e, entry_s, exit_s)| Traversal {
                edge: graph.edges()[e].id.clone(),
                entry_s,
                exit_s,
            })
            .collect();
        RouteAssignment {
            vehicle_id: vehicle_id.to_string(),
            admitted: true,
            path,
            total_time_s: found.total_s,
            error: None,
        }
    }
}

/// Removes every road that cannot carry a single vehicle. Nodes are kept.
pub fn prune_graph(graph: &CapacityGraph) -> CapacityGraph {
    graph.filter_edges(|e| graph.capacity(e) >= 1)
}

fn endpoints(request: &VehicleRequest, graph: &CapacityGraph) -> Result<(usize, usize)> {
    let find = |n: &NodeId| {
        graph
            .node_index(n)
            .ok_or_else(|| Error::Request(format!("vehicle {}: unknown node `{n}`", request.vehicle_id)))
    };
    Ok((find(&request.source)?, find(&request.destination)?))
}

/// Fastest capacity-respecting route for `request` given the committed ledger.
/// Nothing is committed. A request with no usable route comes back not admitted.
pub fn astar_route(request: &VehicleRequest, graph: &CapacityGraph, ledger: &ScheduleLedger) -> Result<RouteAssignment> {
    astar_route_with_budget(request, graph, ledger, DEFAULT_LABEL_BUDGET)
}

/// As [`astar_route`], rejecting the request if more than `budget` states would be expanded.
pub fn astar_route_with_budget(
    request: &VehicleRequest,
    graph: &CapacityGraph,
    ledger: &ScheduleLedger,
    budget: usize,
) -> Result<RouteAssignment> {
    let (src, dst) = endpoints(request, graph)?;
    let costing = Costing::Capacity {
        ledger,
        vehicle: &request.vehicle_id,
    };
    Ok(match search(graph, src, dst, request.depart_time_s, costing, budget) {
        SearchResult::Found(f) => RouteAssignment::from_found(&request.vehicle_id, graph, f),
        SearchResult::NoPath | SearchResult::BudgetExhausted => RouteAssignment::rejected(&request.vehicle_id),
    })
}

/// Fastest route by travel time alone, ignoring capacities and other vehicles.
pub fn shortest_time_route(request: &VehicleRequest, graph: &CapacityGraph) -> Result<RouteAssignment> {
    let (src, dst) = endpoints(request, graph)?;
    Ok(
        match search(graph, src, dst, request.depart_time_s, Costing::Static, usize::MAX) {
            SearchResult::Found(f) => RouteAssignment::from_found(&request.vehicle_id, graph, f),
            _ => RouteAssignment::rejected(&request.vehicle_id),
        },
    )
}

/// Sequential admission state: the pruned graph and the ledger of admitted vehicles.
#[derive(Clone, Debug)]
pub struct Router {
    graph: CapacityGraph,
    ledger: ScheduleLedger,
    budget: usize,
}

impl Router {
    pub fn new(graph: &CapacityGraph) -> Self {
        Router {
            graph: prune_graph(graph),
            ledger: ScheduleLedger::new(),
            budget: DEFAULT_LABEL_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// Routes one vehicle and, if admitted, commits its road intervals.
    pub fn admit(&mut self, request: &VehicleRequest) -> RouteAssignment {
        match astar_route_with_budget(request, &self.graph, &self.ledger, self.budget) {
            Ok(a) => {
                if a.admitted {
                    for t in &a.path {
                        let occ = Occupancy {
                            vehicle: a.vehicle_id.clone(),
                            entry_s: t.entry_s,
                            exit_s: t.exit_s,
                        };
                        self.ledger.commit(t.edge.clone(), occ).expect("travel times are positive");
                    }
                }
                a
            }
            Err(e) => RouteAssignment::errored(&request.vehicle_id, e.to_string()),
        }
    }

    pub fn graph(&self) -> &CapacityGraph {
        &self.graph
    }

    pub fn ledger(&self) -> &ScheduleLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> ScheduleLedger {
        self.ledger
    }
}

/// Prunes the graph, then admits and routes the requests in order.
pub fn admit_and_route(requests: &[VehicleRequest], graph: &CapacityGraph) -> Vec<RouteAssignment> {
    let mut router = Router::new(graph);
    requests.iter().map(|r| router.admit(r)).collect()
}

/// A row of a requests file: a valid request, or the reason it could not be read.
#[derive(Clone, Debug, PartialEq)]
pub enum RequestRow {
    Valid(VehicleRequest),
    Malformed { vehicle_id: String, line: usize, msg: String },
}

/// Reads `vehicle_id,source_node,dest_node[,depart_time_s]` rows. A header row
/// starting with `vehicle_id` is skipped; a missing departure time means 0.
/// Malformed rows are returned in place rather than aborting the read.
pub fn parse_requests_csv(text: &str, source_name: &str) -> Result<Vec<RequestRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv {
            context: source_name.to_string(),
            source: e,
        })?;
        let f: Vec<&str> = rec.iter().collect();
        if f.iter().all(|s| s.is_empty()) || (i == 0 && f[0].eq_ignore_ascii_case("vehicle_id")) {
            continue;
        }
        let line = rec.position().map_or(0, |p| line_of(text, p.byte() as usize));
        let vehicle_id = f[0].to_string();
        let parsed = if f.len() < 3 || f.len() > 4 {
            Err(format!("expected 3 or 4 columns, found {}", f.len()))
        } else {
            let depart = match f.get(3) {
                None | Some(&"") => Ok(0.0),
                Some(s) => s.parse::<f64>().map_err(|_| format!("departure time `{s}` is not a number")),
            };
            depart.and_then(|d| {
                VehicleRequest::new(vehicle_id.clone(), NodeId::from(f[1]), NodeId::from(f[2]), d)
                    .map_err(|e| e.to_string())
            })
        };
        rows.push(match parsed {
            Ok(r) => RequestRow::Valid(r),
            Err(msg) => RequestRow::Malformed { vehicle_id, line, msg },
        });
    }
    Ok(rows)
}

pub fn read_requests(path: &Path) -> Result<Vec<RequestRow>> {
    parse_requests_csv(&read_to_string(path)?, &path.display().to_string())
}

/// Routes every valid row in order; malformed rows come back as errored assignments.
pub fn admit_rows(rows: &[RequestRow], graph: &CapacityGraph) -> Vec<RouteAssignment> {
    let mut router = Router::new(graph);
    rows.iter()
        .map(|row| match row {
            RequestRow::Valid(r) => router.admit(r),
            RequestRow::Malformed { vehicle_id, line, msg } => {
                RouteAssignment::errored(vehicle_id, format!("line {line}: {msg}"))
            }
        })
        .collect()
}

/// CSV `vehicle_id,admitted,total_time_s,path` with the path as `;`-joined edge
/// ids. Errored rows carry `error` in the `admitted` column.
pub fn assignments_csv(assignments: &[RouteAssignment]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |source| Error::Csv {
        context: "writing assignments".into(),
        source,
    };
    w.write_record(["vehicle_id", "admitted", "total_time_s", "path"]).map_err(csv_err)?;
    for a in assignments {
        let admitted = match (&a.error, a.admitted) {
            (Some(_), _) => "error",
            (None, true) => "true",
            (None, false) => "false",
        };
        let total = if a.admitted { a.total_time_s.to_string() } else { String::new() };
        let path = a.path.iter().map(|t| t.edge.as_str()).collect::<Vec<_>>().join(";");
        w.write_record([a.vehicle_id.as_str(), admitted, &total, &path]).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::domain(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
}

pub fn write_assignments(path: &Path, assignments: &[RouteAssignment]) -> Result<()> {
    write_string(path, &assignments_csv(assignments)?)
}
