use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use tovac::config::{reference_markdown, RunConfig};
use tovac::evaluation::{run_campaign, Campaign, CampaignReport};
use tovac::graph::{build_capacity_graph, export_heatmap, ingest_cells, ingest_roads, CapacityGraph};
use tovac::routing::{admit_rows, read_requests, write_assignments};
use tovac::Exec;

#[derive(Parser)]
#[command(name = "tovac", version, about = "Capacity-aware admission control and routing for tele-operated vehicles")]
struct Cli {
    /// Worker threads for the parallel stages (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the capacity graph and write it with its heatmap.
    BuildGraph {
        #[arg(long)]
        config: PathBuf,
    },
    /// Admit and route a batch of requests.
    Route {
        #[arg(long)]
        config: PathBuf,
        /// Requests CSV; defaults to the `requests` key of the configuration.
        #[arg(long)]
        requests: Option<PathBuf>,
    },
    /// Run an experiment campaign and write the report CSVs.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        campaign: PathBuf,
    },
    /// Export the heatmap of a saved capacity graph.
    Heatmap {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the configuration key reference.
    ConfigReference,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.chain().any(|c| c.downcast_ref::<tovac::Error>().is_some_and(tovac::Error::is_usage));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(tovac::Error::Config("--jobs must be at least 1".into()).into());
        }
        tovac::exec::configure_threads(jobs)?;
    }
    match cli.command {
        Command::BuildGraph { config } => build_graph(&config),
        Command::Route { config, requests } => route(&config, requests),
        Command::Evaluate { config, campaign } => evaluate(&config, &campaign),
        Command::Heatmap { graph, out } => {
            let g = CapacityGraph::load(&graph)?;
            export_heatmap(&g, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::ConfigReference => {
            print!("{}", reference_markdown());
            Ok(())
        }
    }
}

fn output_dir(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| tovac::Error::Io { path: cfg.output_dir.clone(), source: e })
        .context("creating output directory")?;
    Ok(&cfg.output_dir)
}

fn build(cfg: &RunConfig) -> Result<CapacityGraph> {
    let roads = ingest_roads(&cfg.roads, &cfg.ingest_options())?;
    let cells = ingest_cells(&cfg.cells)?;
    Ok(build_capacity_graph(&roads, &cells, &cfg.build_options(Exec::Parallel)?)?)
}

fn graph_for(cfg: &RunConfig) -> Result<CapacityGraph> {
    match &cfg.graph {
        Some(p) => Ok(CapacityGraph::load(p)?),
        None => build(cfg),
    }
}

fn build_graph(config: &Path) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let g = build(&cfg)?;
    let dir = output_dir(&cfg)?;
    g.save(&dir.join("capacity_graph.json"))?;
    export_heatmap(&g, &dir.join("heatmap.geojson"))?;
    println!("nodes: {}  edges: {}  cells: {}", g.nodes().len(), g.edges().len(), g.cells().len());
    println!("capacity histogram (vehicles: edges):");
    for (cap, n) in g.capacity_histogram() {
        println!("  {cap}: {n}");
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn route(config: &Path, requests: Option<PathBuf>) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let Some(req_path) = requests.or_else(|| cfg.requests.clone()) else {
        return Err(tovac::Error::Config("no requests file: pass --requests or set `requests`".into()).into());
    };
    let rows = read_requests(&req_path)?;
    let g = graph_for(&cfg)?;
    let out = admit_rows(&rows, &g);
    for a in &out {
        if let Some(msg) = &a.error {
            eprintln!("request {}: {msg}", a.vehicle_id);
        }
    }
    let dir = output_dir(&cfg)?;
    write_assignments(&dir.join("assignments.csv"), &out)?;
    let admitted = out.iter().filter(|a| a.admitted).count();
    let errored = out.iter().filter(|a| a.error.is_some()).count();
    println!(
        "requests: {}  admitted: {admitted}  rejected: {}  errored: {errored}",
        out.len(),
        out.len() - admitted - errored
    );
    Ok(())
}

fn evaluate(config: &Path, campaign_path: &Path) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let campaign = Campaign::load(campaign_path)?;
    let roads = ingest_roads(&cfg.roads, &cfg.ingest_options())?;
    let cells = ingest_cells(&cfg.cells)?;
    let opts = cfg.build_options(Exec::Parallel)?;
    let report: CampaignReport = run_campaign(&campaign, &roads, &cells, &opts, cfg.packets_per_vehicle_edge, cfg.seed);
    let dir = output_dir(&cfg)?;
    report.write(dir, campaign.baseline)?;
    for e in &report.errors {
        eprintln!(
            "experiment {} at {} MHz, reliability {}: {}",
            e.experiment, e.bandwidth_mhz, e.reliability, e.message
        );
    }
    println!("rows: {}  failed: {}", report.rows.len(), report.errors.len());
    if report.rows.is_empty() && !report.errors.is_empty() {
        bail!("every campaign row failed");
    }
    Ok(())
}
