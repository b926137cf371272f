use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/three_roads")
}

/// A scratch copy of the three-road fixture.
fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in ["roads.csv", "cells.csv", "requests.csv", "config.txt", "campaign.toml"] {
        fs::copy(fixture_dir().join(f), dir.path().join(f)).unwrap();
    }
    dir
}

fn tovac(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tovac")).current_dir(dir).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn route_admits_two_of_three() {
    let ws = workspace();
    let o = tovac(ws.path(), &["route", "--config", "config.txt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(ws.path().join("out/assignments.csv")).unwrap();
    assert_eq!(
        csv,
        "vehicle_id,admitted,total_time_s,path\n1,true,10,uv\n2,true,20,uw;wv\n3,false,,\n"
    );
}

#[test]
fn build_graph_writes_graph_and_heatmap() {
    let ws = workspace();
    let o = tovac(ws.path(), &["build-graph", "--config", "config.txt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("2: 1"));
    let out = ws.path().join("out");
    assert!(out.join("capacity_graph.json").is_file());
    assert!(out.join("heatmap.geojson").is_file());

    // Routing over the saved graph gives the same assignments.
    fs::write(
        ws.path().join("saved.txt"),
        "roads = roads.csv\ncells = cells.csv\ngraph = out/capacity_graph.json\noutput_dir = saved\n",
    )
    .unwrap();
    let o = tovac(ws.path(), &["route", "--config", "saved.txt", "--requests", "requests.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = tovac(ws.path(), &["route", "--config", "config.txt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        fs::read(ws.path().join("saved/assignments.csv")).unwrap(),
        fs::read(out.join("assignments.csv")).unwrap()
    );

    let o = tovac(ws.path(), &["heatmap", "--graph", "out/capacity_graph.json", "--out", "again.geojson"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read(ws.path().join("again.geojson")).unwrap(), fs::read(out.join("heatmap.geojson")).unwrap());
}

#[test]
fn missing_input_file_is_a_usage_error() {
    let ws = workspace();
    fs::remove_file(ws.path().join("cells.csv")).unwrap();
    let o = tovac(ws.path(), &["build-graph", "--config", "config.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cells.csv"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let ws = workspace();
    fs::write(ws.path().join("bad.txt"), "roads = roads.csv\ncells = cells.csv\nbandwith_mhz = 80\n").unwrap();
    let o = tovac(ws.path(), &["build-graph", "--config", "bad.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bandwith_mhz"), "{}", stderr(&o));
}

#[test]
fn malformed_roads_name_the_line() {
    let ws = workspace();
    fs::write(
        ws.path().join("roads.csv"),
        "nodes:\nid,lat,lon\nu,45.0,7.0\nv,45.0,seven\nedges:\nid,from,to,length_m,maxspeed_kmh\nuv,u,v,100,50\n",
    )
    .unwrap();
    let o = tovac(ws.path(), &["build-graph", "--config", "config.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("roads.csv:4:"), "{}", stderr(&o));
}

#[test]
fn empty_request_file_gives_header_only() {
    let ws = workspace();
    fs::write(ws.path().join("none.csv"), "").unwrap();
    let o = tovac(ws.path(), &["route", "--config", "config.txt", "--requests", "none.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(ws.path().join("out/assignments.csv")).unwrap(),
        "vehicle_id,admitted,total_time_s,path\n"
    );
}

#[test]
fn unknown_node_errors_only_its_row() {
    let ws = workspace();
    fs::write(ws.path().join("mixed.csv"), "1,u,v,0\n2,u,nowhere,0\n3,u,v,0\n").unwrap();
    let o = tovac(ws.path(), &["route", "--config", "config.txt", "--requests", "mixed.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("nowhere"));
    let csv = fs::read_to_string(ws.path().join("out/assignments.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[1], "1,true,10,uv");
    assert!(rows[2].starts_with("2,error"), "{}", rows[2]);
    assert_eq!(rows[3], "3,true,20,uw;wv");
}

#[test]
fn jobs_zero_is_rejected() {
    let ws = workspace();
    let o = tovac(ws.path(), &["--jobs", "0", "route", "--config", "config.txt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_reference_lists_every_key() {
    let o = tovac(Path::new("."), &["config-reference"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["roads", "bandwidth_mhz", "reliability", "iota_policy", "seed"] {
        assert!(text.contains(&format!("`{key}`")), "missing {key}");
    }
}

fn run_all(ws: &Path, jobs: &str) -> Vec<(String, Vec<u8>)> {
    for args in [
        vec!["--jobs", jobs, "build-graph", "--config", "config.txt"],
        vec!["--jobs", jobs, "route", "--config", "config.txt"],
        vec!["--jobs", jobs, "evaluate", "--config", "config.txt", "--campaign", "campaign.toml"],
    ] {
        let o = tovac(ws, &args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
    let mut files: Vec<_> = fs::read_dir(ws.join("out"))
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn every_command_is_deterministic() {
    let (a, b) = (workspace(), workspace());
    let first = run_all(a.path(), "1");
    let second = run_all(b.path(), "4");
    assert_eq!(first.len(), 7);
    assert_eq!(first, second);
}
