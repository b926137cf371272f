//! Cross-module properties: determinism, simulation sanity and admission
//! behaviour on small fixtures.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tovac::evaluation::{baseline_admit_all, generate_experiment, run_campaign, simulate_pdb_violations, Campaign, ExperimentSpec, SimulationOptions};
use tovac::geo::LatLon;
use tovac::graph::{
    build_capacity_graph, ingest_cells, ingest_roads, BuildOptions, CapacityGraph, Cell, CellId, EdgeId, IngestOptions, NodeId,
    RoadEdge, RoadNetwork, RoadNode,
};
use tovac::channel::ChannelModel;
use tovac::routing::{admit_and_route, Router, VehicleRequest};
use tovac::Exec;

use common::{check_schedule, three_road_graph, three_road_requests, fixture, random_graph};

fn sim(seed: u64, exec: Exec) -> SimulationOptions {
    SimulationOptions {
        packets_per_vehicle_edge: 20_000,
        seed,
        exec,
    }
}

#[test]
fn noiseless_lone_cell_never_violates() {
    let cell = Cell {
        id: CellId::from("r"),
        pos: LatLon::new(45.07, 7.68).unwrap(),
    };
    let (a, b) = (LatLon::new(45.0705, 7.68).unwrap(), LatLon::new(45.0705, 7.681).unwrap());
    let net = RoadNetwork::new(
        vec![RoadNode { id: NodeId::from("a"), pos: a }, RoadNode { id: NodeId::from("b"), pos: b }],
        vec![RoadEdge::new(EdgeId::from("ab"), NodeId::from("a"), NodeId::from("b"), 80.0, 50.0, vec![a, b], 10.0).unwrap()],
    )
    .unwrap();
    let opts = BuildOptions {
        channel: ChannelModel::new(1.0, 1.0, 4.0, 0.0).unwrap(),
        ..BuildOptions::default()
    };
    let g = build_capacity_graph(&net, &[cell], &opts).unwrap();
    let reqs: Vec<_> = (0..3)
        .map(|i| VehicleRequest::new(i.to_string(), NodeId::from("a"), NodeId::from("b"), 0.0).unwrap())
        .collect();
    let out = admit_and_route(&reqs, &g);
    let r = simulate_pdb_violations(&out, &g, &sim(1, Exec::Parallel)).unwrap();
    assert!(r.packets > 0);
    assert_eq!(r.violations, 0);
}

#[test]
fn simulation_is_identical_sequential_and_parallel() {
    let g = three_road_graph(&BuildOptions::default());
    let base = baseline_admit_all(&three_road_requests(5), &g);
    let a = simulate_pdb_violations(&base, &g, &sim(9, Exec::Sequential)).unwrap();
    let b = simulate_pdb_violations(&base, &g, &sim(9, Exec::Parallel)).unwrap();
    assert_eq!(a, b);
    let c = simulate_pdb_violations(&base, &g, &sim(10, Exec::Parallel)).unwrap();
    assert_ne!(a.violations, 0);
    assert_ne!(a, c);
}

#[test]
fn graph_build_is_identical_sequential_and_parallel() {
    let seq = three_road_graph(&BuildOptions { exec: Exec::Sequential, ..BuildOptions::default() });
    let par = three_road_graph(&BuildOptions { exec: Exec::Parallel, ..BuildOptions::default() });
    assert_eq!(seq.to_json().unwrap(), par.to_json().unwrap());
}

#[test]
fn utilization_stays_within_one() {
    let g = three_road_graph(&BuildOptions::default());
    for out in [admit_and_route(&three_road_requests(6), &g), baseline_admit_all(&three_road_requests(6), &g)] {
        let r = simulate_pdb_violations(&out, &g, &sim(3, Exec::Parallel)).unwrap();
        for e in &r.per_edge {
            let u = e.utilization.unwrap();
            assert!(u > 0.0 && u <= 1.0, "{}: {u}", e.edge);
        }
    }
}

#[test]
fn over_capacity_traversals_all_violate() {
    let g = three_road_graph(&BuildOptions::default());
    let base = baseline_admit_all(&three_road_requests(4), &g);
    let r = simulate_pdb_violations(&base, &g, &sim(4, Exec::Parallel)).unwrap();
    let uv = r.per_edge.iter().find(|e| e.edge.as_str() == "uv").unwrap();
    assert_eq!((uv.traversals, uv.over_capacity), (4, 3));
    assert!(uv.violations >= 3 * 20_000);
}

#[test]
fn relaxed_reliability_admits_at_least_as_many() {
    let strict = three_road_graph(&BuildOptions::default());
    let relaxed = three_road_graph(&BuildOptions { reliability: 0.999, ..BuildOptions::default() });
    for n in 1..=8 {
        let count = |g: &CapacityGraph| admit_and_route(&three_road_requests(n), g).iter().filter(|a| a.admitted).count();
        assert!(count(&relaxed) >= count(&strict), "{n} requests");
    }
    assert!(relaxed.capacities().iter().zip(strict.capacities()).all(|(r, s)| r >= s));
}

#[test]
fn experiments_respect_capacity_and_baseline_admits_more() {
    let g = three_road_graph(&BuildOptions::default());
    for v in 0..=4 {
        let spec = ExperimentSpec {
            name: format!("v{v}"),
            v_index: v,
            s_exponent: 3,
            d_exponent: 3,
            seed: 100 + u64::from(v),
        };
        let reqs = generate_experiment(&spec, &g).unwrap();
        assert_eq!(reqs.len(), 5 * v as usize + 1);
        let ours = admit_and_route(&reqs, &g);
        check_schedule(&g, &reqs, &ours).unwrap();
        let base = baseline_admit_all(&reqs, &g);
        let count = |v: &[tovac::routing::RouteAssignment]| v.iter().filter(|a| a.admitted).count();
        assert!(count(&base) >= count(&ours));
    }
}

#[test]
fn campaign_is_deterministic_across_executors() {
    let roads = ingest_roads(&fixture("roads.csv"), &IngestOptions::default()).unwrap();
    let cells = ingest_cells(&fixture("cells.csv")).unwrap();
    let mut campaign = Campaign::load(&fixture("campaign.toml")).unwrap();
    campaign.packets_per_vehicle_edge = Some(500);
    let run = |exec| {
        let opts = BuildOptions { exec, ..BuildOptions::default() };
        let r = run_campaign(&campaign, &roads, &cells, &opts, 1000, 1);
        (tovac::evaluation::CampaignReport::rows_csv(&r.rows).unwrap(), r.edges_csv().unwrap(), r.errors.len())
    };
    let a = run(Exec::Sequential);
    assert_eq!(a, run(Exec::Parallel));
    assert_eq!(a, run(Exec::Parallel));
    assert_eq!(a.2, 0);
}

#[test]
fn tampered_graph_fails_verification() {
    let g = three_road_graph(&BuildOptions::default());
    let json = g.to_json().unwrap();
    assert!(json.contains("\"nu_max\": 2"));
    let tampered = json.replacen("\"capacity\": 2", "\"capacity\": 3", 1);
    assert_ne!(tampered, json);
    let bad = CapacityGraph::from_json(&tampered, "mem").and_then(|g| g.verify());
    assert!(bad.is_err());
}

#[test]
fn capacities_grow_with_bandwidth() {
    let mut prev = vec![0; 3];
    for bw in [80, 160, 240, 320] {
        let opts = BuildOptions { nr: BuildOptions::default().nr.with_bandwidth(bw), ..BuildOptions::default() };
        let caps = three_road_graph(&opts).capacities().to_vec();
        assert!(caps.iter().zip(&prev).all(|(c, p)| c >= p));
        prev = caps;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn router_never_exceeds_capacity(seed in any::<u64>(), n in 3usize..10, k in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, 0.4, 1..=2);
        let reqs: Vec<VehicleRequest> = (0..k)
            .map(|i| {
                let s = (i * 7 + seed as usize) % n;
                let d = (s + 1 + i % (n - 1)) % n;
                VehicleRequest::new(i.to_string(), g.nodes()[s].id.clone(), g.nodes()[d].id.clone(), (i % 4) as f64 * 5.0).unwrap()
            })
            .collect();
        let mut router = Router::new(&g);
        let out: Vec<_> = reqs.iter().map(|r| router.admit(r)).collect();
        prop_assert!(check_schedule(&g, &reqs, &out).is_ok(), "{:?}", check_schedule(&g, &reqs, &out));
    }
}
