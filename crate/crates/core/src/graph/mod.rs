//! Road capacity graph: roads as directed edges weighted by the number of
//! tele-operated vehicles they can carry concurrently.

pub mod build;
pub mod heatmap;
pub mod ingest;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::error::{read_to_string, write_string, Error, Result};
use crate::geo::{densify, haversine_m, LatLon};
use crate::nr_radio::{max_vehicles_cell, McsTable, NrConfig};

pub use build::{
    allocate_iota, build_capacity_graph, road_worst_se, serving_sets, BuildOptions, IotaAllocation, IotaPolicy,
    ServingSets, WorstSe,
};
pub use heatmap::{export_heatmap, heatmap_geojson};
pub use ingest::{ingest_cells, ingest_roads, parse_cells_csv, parse_roads_csv, parse_roads_geojson, IngestOptions, RoadNetwork};

macro_rules! string_id {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

string_id!(NodeId);
string_id!(EdgeId);
string_id!(CellId);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadNode {
    pub id: NodeId,
    pub pos: LatLon,
}

/// A directed road section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadEdge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    pub length_m: f64,
    pub max_speed_kmh: f64,
    /// Polyline from `from` to `to`, endpoints included.
    pub geometry: Vec<LatLon>,
    /// Points at which the channel is evaluated.
    pub samples: Vec<LatLon>,
}

impl RoadEdge {
    pub fn new(
        id: EdgeId,
        from: NodeId,
        to: NodeId,
        length_m: f64,
        max_speed_kmh: f64,
        geometry: Vec<LatLon>,
        sample_spacing_m: f64,
    ) -> Result<Self> {
        let bad = |msg: String| Error::Record {
            record: id.to_string(),
            msg,
        };
        if !(length_m > 0.0 && length_m.is_finite()) {
            return Err(bad(format!("length {length_m} m must be positive")));
        }
        if !(max_speed_kmh > 0.0 && max_speed_kmh.is_finite()) {
            return Err(bad(format!("max speed {max_speed_kmh} km/h must be positive")));
        }
        if geometry.len() < 2 {
            return Err(bad("geometry needs at least both endpoints".into()));
        }
        if !(sample_spacing_m > 0.0) {
            return Err(Error::config(format!("sample spacing {sample_spacing_m} m must be positive")));
        }
        let samples = densify(&geometry, sample_spacing_m);
        Ok(RoadEdge {
            id,
            from,
            to,
            length_m,
            max_speed_kmh,
            geometry,
            samples,
        })
    }

    /// Travel time at the road's maximum speed, seconds.
    pub fn travel_time_s(&self) -> f64 {
        self.length_m * 3.6 / self.max_speed_kmh
    }

    pub fn max_speed_mps(&self) -> f64 {
        self.max_speed_kmh / 3.6
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub pos: LatLon,
}

/// One serving cell's contribution to an edge's capacity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServingCell {
    pub cell: CellId,
    /// Share of the cell's RBs given to this road.
    pub iota: f64,
    /// True when the road is served only by this cell and receives a dedicated carrier.
    #[serde(default)]
    pub dedicated: bool,
    /// Worst effective spectral efficiency along the road.
    pub worst_se: f64,
    /// Sample point at which `worst_se` is attained.
    pub worst_point: LatLon,
    /// Vehicles this cell can carry on the road.
    pub capacity: u64,
}

/// Parameters the graph was built with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    pub nr: NrConfig,
    pub channel: ChannelModel,
    pub mcs: McsTable,
    pub reliability: f64,
    pub policy: IotaPolicy,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GraphRecord {
    params: BuildParams,
    nodes: Vec<RoadNode>,
    cells: Vec<Cell>,
    edges: Vec<EdgeRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct EdgeRecord {
    #[serde(flatten)]
    edge: RoadEdge,
    nu_max: u64,
    serving: Vec<ServingCell>,
}

/// The capacity graph. Nodes, edges and cells are kept sorted by id; the
/// position of an item in its slice is its index everywhere in the crate.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "GraphRecord", try_from = "GraphRecord")]
pub struct CapacityGraph {
    params: BuildParams,
    nodes: Vec<RoadNode>,
    edges: Vec<RoadEdge>,
    cells: Vec<Cell>,
    capacity: Vec<u64>,
    serving: Vec<Vec<ServingCell>>,
    node_index: HashMap<NodeId, usize>,
    edge_index: HashMap<EdgeId, usize>,
    edge_ends: Vec<(usize, usize)>,
    out_edges: Vec<Vec<usize>>,
    heuristic_speed_mps: f64,
}

impl CapacityGraph {
    /// Assembles a graph from its parts. `capacity` and `serving` are indexed
    /// like `edges`; all three are reordered together by edge id.
    pub fn from_parts(
        params: BuildParams,
        mut nodes: Vec<RoadNode>,
        edges: Vec<RoadEdge>,
        mut cells: Vec<Cell>,
        capacity: Vec<u64>,
        serving: Vec<Vec<ServingCell>>,
    ) -> Result<Self> {
        if capacity.len() != edges.len() || serving.len() != edges.len() {
            return Err(Error::config("capacity and serving data must match the edge list"));
        }
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        cells.sort_by(|a, b| a.id.cmp(&b.id));
        let mut rows: Vec<_> = edges.into_iter().zip(capacity).zip(serving).collect();
        rows.sort_by(|a, b| a.0 .0.id.cmp(&b.0 .0.id));

        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.id.clone(), i).is_some() {
                return Err(Error::Record {
                    record: n.id.to_string(),
                    msg: "duplicate node id".into(),
                });
            }
        }
        for w in cells.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::Record {
                    record: w[0].id.to_string(),
                    msg: "duplicate cell id".into(),
                });
            }
        }

        let mut edges = Vec::with_capacity(rows.len());
        let mut capacity = Vec::with_capacity(rows.len());
        let mut serving = Vec::with_capacity(rows.len());
        let mut edge_index = HashMap::with_capacity(rows.len());
        let mut edge_ends = Vec::with_capacity(rows.len());
        let mut out_edges = vec![Vec::new(); nodes.len()];
        for (i, ((edge, cap), mut srv)) in rows.into_iter().enumerate() {
            let lookup = |n: &NodeId| {
                node_index.get(n).copied().ok_or_else(|| Error::Record {
                    record: edge.id.to_string(),
                    msg: format!("references unknown node `{n}`"),
                })
            };
            let ends = (lookup(&edge.from)?, lookup(&edge.to)?);
            if edge_index.insert(edge.id.clone(), i).is_some() {
                return Err(Error::Record {
                    record: edge.id.to_string(),
                    msg: "duplicate edge id".into(),
                });
            }
            srv.sort_by(|a, b| a.cell.cmp(&b.cell));
            out_edges[ends.0].push(i);
            edge_ends.push(ends);
            edges.push(edge);
            capacity.push(cap);
            serving.push(srv);
        }

        // Largest straight-line speed any edge allows; keeps the A* heuristic
        // consistent even when a road's stated length is shorter than its chord.
        let heuristic_speed_mps = edges
            .iter()
            .zip(&edge_ends)
            .map(|(e, &(a, b))| {
                let chord = haversine_m(nodes[a].pos, nodes[b].pos);
                e.max_speed_mps().max(chord / e.travel_time_s())
            })
            .fold(0.0, f64::max);

        Ok(CapacityGraph {
            params,
            nodes,
            edges,
            cells,
            capacity,
            serving,
            node_index,
            edge_index,
            edge_ends,
            out_edges,
            heuristic_speed_mps,
        })
    }

    pub fn params(&self) -> &BuildParams {
        &self.params
    }

    pub fn nodes(&self) -> &[RoadNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn capacity(&self, edge: usize) -> u64 {
        self.capacity[edge]
    }

    pub fn capacities(&self) -> &[u64] {
        &self.capacity
    }

    pub fn capacity_of(&self, id: &EdgeId) -> Option<u64> {
        self.edge_index(id).map(|i| self.capacity[i])
    }

    pub fn serving(&self, edge: usize) -> &[ServingCell] {
        &self.serving[edge]
    }

    pub fn node_index(&self, id: &NodeId) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge_index(&self, id: &EdgeId) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn edge_ends(&self, edge: usize) -> (usize, usize) {
        self.edge_ends[edge]
    }

    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    /// Speed that turns straight-line distance into a lower bound on travel time.
    pub fn heuristic_speed_mps(&self) -> f64 {
        self.heuristic_speed_mps
    }

    /// Copy of the graph restricted to the edges for which `keep` holds. Nodes are retained.
    pub fn filter_edges(&self, keep: impl Fn(usize) -> bool) -> CapacityGraph {
        let idx: Vec<usize> = (0..self.edges.len()).filter(|&i| keep(i)).collect();
        CapacityGraph::from_parts(
            self.params.clone(),
            self.nodes.clone(),
            idx.iter().map(|&i| self.edges[i].clone()).collect(),
            self.cells.clone(),
            idx.iter().map(|&i| self.capacity[i]).collect(),
            idx.iter().map(|&i| self.serving[i].clone()).collect(),
        )
        .expect("a subgraph of a valid graph is valid")
    }

    /// Number of edges at each capacity value.
    pub fn capacity_histogram(&self) -> BTreeMap<u64, usize> {
        let mut h = BTreeMap::new();
        for &c in &self.capacity {
            *h.entry(c).or_insert(0) += 1;
        }
        h
    }

    /// Recomputes every edge capacity from its stored (cell, share, worst SE)
    /// triples and checks the per-cell RB shares.
    pub fn verify(&self) -> Result<()> {
        let nr = &self.params.nr;
        let mut shared: BTreeMap<&CellId, f64> = BTreeMap::new();
        for (i, srv) in self.serving.iter().enumerate() {
            let mut total = 0;
            for s in srv {
                let c = max_vehicles_cell(s.worst_se, s.iota, nr)?;
                if c != s.capacity {
                    return Err(Error::Record {
                        record: self.edges[i].id.to_string(),
                        msg: format!("cell {} stores capacity {} but recomputes to {c}", s.cell, s.capacity),
                    });
                }
                total += c;
                if !s.dedicated {
                    *shared.entry(&s.cell).or_insert(0.0) += s.iota;
                }
            }
            if total != self.capacity[i] {
                return Err(Error::Record {
                    record: self.edges[i].id.to_string(),
                    msg: format!("capacity {} differs from the per-cell sum {total}", self.capacity[i]),
                });
            }
        }
        if let Some((cell, sum)) = shared.into_iter().find(|(_, s)| *s > 1.0 + 1e-9) {
            return Err(Error::Record {
                record: cell.to_string(),
                msg: format!("RB shares sum to {sum} > 1"),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            context: "serializing capacity graph".into(),
            source,
        })
    }

    pub fn from_json(text: &str, source_name: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json {
            context: source_name.to_string(),
            source,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_to_string(path)?, &path.display().to_string())
    }
}

impl From<CapacityGraph> for GraphRecord {
    fn from(g: CapacityGraph) -> Self {
        let edges = g
            .edges
            .into_iter()
            .zip(g.capacity)
            .zip(g.serving)
            .map(|((edge, nu_max), serving)| EdgeRecord { edge, nu_max, serving })
            .collect();
        GraphRecord {
            params: g.params,
            nodes: g.nodes,
            cells: g.cells,
            edges,
        }
    }
}

impl TryFrom<GraphRecord> for CapacityGraph {
    type Error = Error;

    fn try_from(r: GraphRecord) -> Result<Self> {
        let mut edges = Vec::with_capacity(r.edges.len());
        let mut capacity = Vec::with_capacity(r.edges.len());
        let mut serving = Vec::with_capacity(r.edges.len());
        for e in r.edges {
            edges.push(e.edge);
            capacity.push(e.nu_max);
            serving.push(e.serving);
        }
        CapacityGraph::from_parts(r.params, r.nodes, edges, r.cells, capacity, serving)
    }
}
