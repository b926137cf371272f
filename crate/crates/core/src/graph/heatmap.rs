//! GeoJSON heatmap of per-road capacities.

use std::path::Path;

use serde_json::{json, Value};

use super::CapacityGraph;
use crate::error::{write_string, Error, Result};

/// One LineString feature per edge, in edge-id order, with properties
/// `edge_id`, `from`, `to`, `nu_max` and `cells` (`cell_id`, `iota`, `se`, `nu`).
pub fn heatmap_geojson(graph: &CapacityGraph) -> Value {
    let features: Vec<Value> = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let coords: Vec<[f64; 2]> = e.geometry.iter().map(|p| [p.lon, p.lat]).collect();
            let cells: Vec<Value> = graph
                .serving(i)
                .iter()
                .map(|s| json!({ "cell_id": s.cell, "iota": s.iota, "se": s.worst_se, "nu": s.capacity }))
                .collect();
            json!({
                "type": "Feature",
                "geometry": { "type": "LineString", "coordinates": coords },
                "properties": {
                    "edge_id": e.id,
                    "from": e.from,
                    "to": e.to,
                    "nu_max": graph.capacity(i),
                    "cells": cells,
                },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

pub fn export_heatmap(graph: &CapacityGraph, out_path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&heatmap_geojson(graph)).map_err(|source| Error::Json {
        context: "serializing heatmap".into(),
        source,
    })?;
    write_string(out_path, &(text + "\n"))
}
