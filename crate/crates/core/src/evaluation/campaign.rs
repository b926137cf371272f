//! Experiment campaigns: every experiment at every bandwidth and reliability.

use std::path::Path;

use serde::Deserialize;

use super::{baseline_admit_all, generate_experiment, simulate_pdb_violations, ExperimentSpec, SimulationOptions, ViolationReport};
use crate::error::{read_to_string, write_string, Error, Result};
use crate::exec::mix_seed;
use crate::graph::{build_capacity_graph, BuildOptions, Cell, RoadNetwork};
use crate::routing::admit_and_route;

/// A campaign file, in TOML:
///
/// ```toml
/// bandwidths_mhz = [80, 160]
/// reliabilities = [0.99999, 0.999]
/// packets_per_vehicle_edge = 1000
/// baseline = true
///
/// [[experiment]]
/// name = "v4"
/// v_index = 4
/// s_exponent = 1
/// d_exponent = 1
/// seed = 7
/// ```
///
/// Missing `bandwidths_mhz`, `reliabilities` or `packets_per_vehicle_edge` fall
/// back to the run configuration.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    #[serde(default)]
    pub bandwidths_mhz: Vec<u32>,
    #[serde(default)]
    pub reliabilities: Vec<f64>,
    #[serde(default)]
    pub packets_per_vehicle_edge: Option<u64>,
    /// Also run the admit-all comparator on every batch.
    #[serde(default)]
    pub baseline: bool,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentSpec>,
}

impl Campaign {
    pub fn from_toml(text: &str, source_name: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            line: e.span().map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1)),
            msg: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_to_string(path)?, &path.display().to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignRow {
    pub experiment: String,
    pub bandwidth_mhz: u32,
    pub reliability: f64,
    pub requested: usize,
    pub admitted: usize,
    pub packets: u64,
    pub violations: u64,
    pub ratio: f64,
    pub mean_utilization: Option<f64>,
}

/// Utilization of one road in one campaign row.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRow {
    pub scheme: &'static str,
    pub experiment: String,
    pub bandwidth_mhz: u32,
    pub reliability: f64,
    pub edge_id: String,
    pub traversals: usize,
    pub over_capacity: usize,
    pub packets: u64,
    pub violations: u64,
    pub utilization: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignError {
    pub experiment: String,
    pub bandwidth_mhz: u32,
    pub reliability: f64,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CampaignReport {
    pub rows: Vec<CampaignRow>,
    pub baseline_rows: Vec<CampaignRow>,
    pub edge_rows: Vec<EdgeRow>,
    pub errors: Vec<CampaignError>,
}

struct Outcome {
    tovac: (CampaignRow, ViolationReport),
    baseline: Option<(CampaignRow, ViolationReport)>,
}

/// Runs every experiment at every (bandwidth, reliability) setting, bandwidth
/// outermost. The capacity graph is rebuilt per setting; a failure is recorded
/// against the affected rows and the campaign carries on. Packet draws are
/// seeded from `seed`, the experiment's own seed and the setting.
pub fn run_campaign(
    campaign: &Campaign,
    network: &RoadNetwork,
    cells: &[Cell],
    base: &BuildOptions,
    default_packets: u64,
    seed: u64,
) -> CampaignReport {
    let bandwidths = if campaign.bandwidths_mhz.is_empty() {
        vec![base.nr.bandwidth_mhz]
    } else {
        campaign.bandwidths_mhz.clone()
    };
    let reliabilities = if campaign.reliabilities.is_empty() {
        vec![base.reliability]
    } else {
        campaign.reliabilities.clone()
    };
    let packets = campaign.packets_per_vehicle_edge.unwrap_or(default_packets);

    let mut report = CampaignReport::default();
    for &bw in &bandwidths {
        for &p in &reliabilities {
            let opts = BuildOptions {
                nr: base.nr.with_bandwidth(bw),
                reliability: p,
                ..base.clone()
            };
            let fail = |spec: &ExperimentSpec, e: &Error| CampaignError {
                experiment: spec.name.clone(),
                bandwidth_mhz: bw,
                reliability: p,
                message: e.to_string(),
            };
            let graph = match build_capacity_graph(network, cells, &opts) {
                Ok(g) => g,
                Err(e) => {
                    report.errors.extend(campaign.experiments.iter().map(|s| fail(s, &e)));
                    continue;
                }
            };
            let outcomes = opts.exec.map(&campaign.experiments, |spec| -> Result<Outcome> {
                let requests = generate_experiment(spec, &graph)?;
                let seed = mix_seed(seed, &[spec.seed, u64::from(bw), p.to_bits()]);
                let run = |assignments: &[crate::routing::RouteAssignment], scheme: u64| -> Result<(CampaignRow, ViolationReport)> {
                    let sim = SimulationOptions {
                        packets_per_vehicle_edge: packets,
                        seed: mix_seed(seed, &[scheme]),
                        exec: opts.exec,
                    };
                    let r = simulate_pdb_violations(assignments, &graph, &sim)?;
                    let row = CampaignRow {
                        experiment: spec.name.clone(),
                        bandwidth_mhz: bw,
                        reliability: p,
                        requested: requests.len(),
                        admitted: assignments.iter().filter(|a| a.admitted).count(),
                        packets: r.packets,
                        violations: r.violations,
                        ratio: r.ratio(),
                        mean_utilization: r.mean_utilization(),
                    };
                    Ok((row, r))
                };
                let tovac = run(&admit_and_route(&requests, &graph), 0)?;
                let baseline = if campaign.baseline {
                    Some(run(&baseline_admit_all(&requests, &graph), 1)?)
                } else {
                    None
                };
                Ok(Outcome { tovac, baseline })
            });
            for (spec, out) in campaign.experiments.iter().zip(outcomes) {
                match out {
                    Ok(o) => {
                        push_edges(&mut report.edge_rows, "tovac", &o.tovac);
                        report.rows.push(o.tovac.0);
                        if let Some(b) = o.baseline {
                            push_edges(&mut report.edge_rows, "baseline", &b);
                            report.baseline_rows.push(b.0);
                        }
                    }
                    Err(e) => report.errors.push(fail(spec, &e)),
                }
            }
        }
    }
    report
}

fn push_edges(out: &mut Vec<EdgeRow>, scheme: &'static str, (row, r): &(CampaignRow, ViolationReport)) {
    out.extend(r.per_edge.iter().map(|e| EdgeRow {
        scheme,
        experiment: row.experiment.clone(),
        bandwidth_mhz: row.bandwidth_mhz,
        reliability: row.reliability,
        edge_id: e.edge.to_string(),
        traversals: e.traversals,
        over_capacity: e.over_capacity,
        packets: e.packets,
        violations: e.violations,
        utilization: e.utilization,
    }));
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn to_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |source| Error::Csv {
        context: "writing report".into(),
        source,
    };
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::domain(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
}

impl CampaignReport {
    pub fn rows_csv(rows: &[CampaignRow]) -> Result<String> {
        to_csv(
            &[
                "experiment",
                "bandwidth_mhz",
                "reliability",
                "requested",
                "admitted",
                "packets",
                "violations",
                "ratio",
                "mean_utilization",
            ],
            rows.iter().map(|r| {
                vec![
                    r.experiment.clone(),
                    r.bandwidth_mhz.to_string(),
                    r.reliability.to_string(),
                    r.requested.to_string(),
                    r.admitted.to_string(),
                    r.packets.to_string(),
                    r.violations.to_string(),
                    r.ratio.to_string(),
                    opt(r.mean_utilization),
                ]
            }),
        )
    }

    pub fn edges_csv(&self) -> Result<String> {
        to_csv(
            &[
                "scheme",
                "experiment",
                "bandwidth_mhz",
                "reliability",
                "edge_id",
                "traversals",
                "over_capacity",
                "packets",
                "violations",
                "utilization",
            ],
            self.edge_rows.iter().map(|e| {
                vec![
                    e.scheme.to_string(),
                    e.experiment.clone(),
                    e.bandwidth_mhz.to_string(),
                    e.reliability.to_string(),
                    e.edge_id.clone(),
                    e.traversals.to_string(),
                    e.over_capacity.to_string(),
                    e.packets.to_string(),
                    e.violations.to_string(),
                    opt(e.utilization),
                ]
            }),
        )
    }

    pub fn errors_csv(&self) -> Result<String> {
        to_csv(
            &["experiment", "bandwidth_mhz", "reliability", "error"],
            self.errors.iter().map(|e| {
                vec![
                    e.experiment.clone(),
                    e.bandwidth_mhz.to_string(),
                    e.reliability.to_string(),
                    e.message.clone(),
                ]
            }),
        )
    }

    /// Writes `campaign.csv`, `edge_utilization.csv`, `campaign_errors.csv`
    /// and, when the baseline ran, `campaign_baseline.csv` into `dir`.
    pub fn write(&self, dir: &Path, with_baseline: bool) -> Result<()> {
        write_string(&dir.join("campaign.csv"), &Self::rows_csv(&self.rows)?)?;
        if with_baseline {
            write_string(&dir.join("campaign_baseline.csv"), &Self::rows_csv(&self.baseline_rows)?)?;
        }
        write_string(&dir.join("edge_utilization.csv"), &self.edges_csv()?)?;
        write_string(&dir.join("campaign_errors.csv"), &self.errors_csv()?)
    }
}
