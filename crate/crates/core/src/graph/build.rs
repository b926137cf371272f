//! Capacity graph construction: coverage sets, RB shares and per-road capacity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ingest::RoadNetwork;
use super::{BuildParams, CapacityGraph, Cell, RoadEdge, ServingCell};
use crate::channel::{ChannelModel, Geometry, Link};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geo::{link_distance_m, LatLon};
use crate::nr_radio::{max_vehicles_cell, McsTable, NrConfig};

/// How a cell splits its RBs among the roads it covers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IotaPolicy {
    /// Every covered road gets `1 / |E(r)|`.
    #[default]
    Uniform,
    /// A road covered by a single cell gets a dedicated carrier (share 1);
    /// roads covered by several cells split each cell's RBs uniformly.
    Dedicated,
}

impl FromStr for IotaPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(IotaPolicy::Uniform),
            "dedicated" => Ok(IotaPolicy::Dedicated),
            other => Err(Error::config(format!(
                "unknown iota policy `{other}` (expected `uniform` or `dedicated`)"
            ))),
        }
    }
}

impl fmt::Display for IotaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IotaPolicy::Uniform => "uniform",
            IotaPolicy::Dedicated => "dedicated",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildOptions {
    pub nr: NrConfig,
    pub channel: ChannelModel,
    pub mcs: McsTable,
    /// Target probability that the SINR stays above the provisioned level.
    pub reliability: f64,
    pub policy: IotaPolicy,
    pub exec: Exec,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            nr: NrConfig::uplink_defaults(),
            channel: ChannelModel::default(),
            mcs: McsTable::pusch_64qam(),
            reliability: 0.99999,
            policy: IotaPolicy::Uniform,
            exec: Exec::default(),
        }
    }
}

impl BuildOptions {
    pub fn validate(&self) -> Result<()> {
        self.nr.validate()?;
        self.nr.nrb()?;
        self.channel.validate()?;
        if !(self.reliability > 0.0 && self.reliability < 1.0) {
            return Err(Error::config(format!("reliability {} must lie in (0, 1)", self.reliability)));
        }
        Ok(())
    }

    pub fn params(&self) -> BuildParams {
        BuildParams {
            nr: self.nr.clone(),
            channel: self.channel,
            mcs: self.mcs.clone(),
            reliability: self.reliability,
            policy: self.policy,
        }
    }
}

/// The worst provisioned spectral efficiency of a road under one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorstSe {
    /// Effective (MCS-quantized) spectral efficiency.
    pub se: f64,
    /// Shannon spectral efficiency at the reliability percentile, before quantization.
    pub shannon_se: f64,
    /// Sample point where the minimum is attained.
    pub point: LatLon,
}

/// Channel geometry of a point served by `cells[serving]`; every other cell interferes.
pub fn point_geometry(point: LatLon, serving: usize, cells: &[Cell]) -> Result<Geometry> {
    let interferers = cells
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != serving)
        .map(|(_, c)| link_distance_m(c.pos, point))
        .collect();
    Geometry::new(link_distance_m(cells[serving].pos, point), interferers)
}

/// Minimum over the road's sample points of the effective spectral efficiency
/// the reliability percentile of the SINR supports. `None` when some point
/// cannot use any MCS.
pub fn road_worst_se(
    edge: &RoadEdge,
    serving: usize,
    cells: &[Cell],
    model: &ChannelModel,
    table: &McsTable,
    reliability: f64,
) -> Result<Option<WorstSe>> {
    let mut worst: Option<(f64, LatLon)> = None;
    for &x in &edge.samples {
        let geom = point_geometry(x, serving, cells)?;
        let shannon = Link::new(&geom, model).percentile(reliability)?.spectral_efficiency();
        if table.effective_se(shannon).is_none() {
            return Ok(None);
        }
        if worst.is_none_or(|(w, _)| shannon < w) {
            worst = Some((shannon, x));
        }
    }
    Ok(worst.and_then(|(shannon_se, point)| {
        table.effective_se(shannon_se).map(|se| WorstSe { se, shannon_se, point })
    }))
}

/// Coverage relation between cells and roads, by index into the slices it was built from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ServingSets {
    /// Roads covered by each cell, ascending.
    pub by_cell: Vec<Vec<usize>>,
    /// Covering cells of each road, ascending, with the road's worst SE under that cell.
    pub by_edge: Vec<Vec<(usize, WorstSe)>>,
}

/// A road is covered by a cell when every one of its sample points supports some MCS.
pub fn serving_sets(edges: &[RoadEdge], cells: &[Cell], opts: &BuildOptions) -> Result<ServingSets> {
    let n_cells = cells.len();
    let pairs = opts.exec.map_range(edges.len() * n_cells, |k| {
        let (e, r) = (k / n_cells, k % n_cells);
        road_worst_se(&edges[e], r, cells, &opts.channel, &opts.mcs, opts.reliability)
    });
    let mut sets = ServingSets {
        by_cell: vec![Vec::new(); n_cells],
        by_edge: vec![Vec::new(); edges.len()],
    };
    for (k, res) in pairs.into_iter().enumerate() {
        if let Some(w) = res? {
            let (e, r) = (k / n_cells, k % n_cells);
            sets.by_cell[r].push(e);
            sets.by_edge[e].push((r, w));
        }
    }
    Ok(sets)
}

/// One cell's RB share on one road.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Share {
    pub cell: usize,
    pub iota: f64,
    pub dedicated: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IotaAllocation {
    /// Shares per road, in the order of `ServingSets::by_edge`.
    pub per_edge: Vec<Vec<Share>>,
}

impl IotaAllocation {
    pub fn iota(&self, cell: usize, edge: usize) -> Option<f64> {
        self.per_edge.get(edge)?.iter().find(|s| s.cell == cell).map(|s| s.iota)
    }

    /// Sum of a cell's shares that come out of its own carrier (dedicated ones excluded).
    pub fn shared_total(&self, cell: usize) -> f64 {
        self.per_edge
            .iter()
            .flatten()
            .filter(|s| s.cell == cell && !s.dedicated)
            .map(|s| s.iota)
            .sum()
    }
}

pub fn allocate_iota(sets: &ServingSets, policy: IotaPolicy) -> IotaAllocation {
    let is_dedicated = |e: usize| policy == IotaPolicy::Dedicated && sets.by_edge[e].len() == 1;
    let shared_count: Vec<usize> = sets
        .by_cell
        .iter()
        .map(|roads| roads.iter().filter(|&&e| !is_dedicated(e)).count())
        .collect();
    let per_edge = sets
        .by_edge
        .iter()
        .enumerate()
        .map(|(e, serving)| {
            serving
                .iter()
                .map(|&(cell, _)| {
                    if is_dedicated(e) {
                        Share {
                            cell,
                            iota: 1.0,
                            dedicated: true,
                        }
                    } else {
                        Share {
                            cell,
                            iota: 1.0 / shared_count[cell] as f64,
                            dedicated: false,
                        }
                    }
                })
                .collect()
        })
        .collect();
    IotaAllocation { per_edge }
}

/// Builds the capacity graph: each road's capacity is the sum over its covering
/// cells of the vehicles that cell can carry at the road's worst SE.
pub fn build_capacity_graph(network: &RoadNetwork, cells: &[Cell], opts: &BuildOptions) -> Result<CapacityGraph> {
    opts.validate()?;
    let mut cells = cells.to_vec();
    cells.sort_by(|a, b| a.id.cmp(&b.id));
    let sets = serving_sets(&network.edges, &cells, opts)?;
    let alloc = allocate_iota(&sets, opts.policy);

    let mut capacity = Vec::with_capacity(network.edges.len());
    let mut serving = Vec::with_capacity(network.edges.len());
    for (by_edge, shares) in sets.by_edge.iter().zip(&alloc.per_edge) {
        let mut total = 0u64;
        let mut srv = Vec::with_capacity(shares.len());
        for (&(cell, worst), share) in by_edge.iter().zip(shares) {
            let cap = max_vehicles_cell(worst.se, share.iota, &opts.nr)?;
            total += cap;
            srv.push(ServingCell {
                cell: cells[cell].id.clone(),
                iota: share.iota,
                dedicated: share.dedicated,
                worst_se: worst.se,
                worst_point: worst.point,
                capacity: cap,
            });
        }
        capacity.push(total);
        serving.push(srv);
    }
    CapacityGraph::from_parts(
        opts.params(),
        network.nodes.clone(),
        network.edges.clone(),
        cells,
        capacity,
        serving,
    )
}
