//! Road and cell file readers.
//!
//! Roads come either as a sectioned CSV file
//!
//! ```text
//! nodes:
//! id,lat,lon
//! u,45.06946,7.677008
//! edges:
//! id,from,to,length_m,maxspeed_kmh,geometry
//! uv,u,v,350,126,45.0695 7.6790
//! ```
//!
//! where `geometry` lists intermediate `lat lon` points separated by `;`, or as
//! a GeoJSON FeatureCollection of LineStrings. Cells are CSV `id,lat,lon`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde_json::Value;

use super::{Cell, CellId, EdgeId, NodeId, RoadEdge, RoadNode};
use crate::error::{read_to_string, Error, Result};
use crate::geo::{polyline_length_m, LatLon};

#[derive(Clone, Debug, PartialEq)]
pub struct IngestOptions {
    /// Speed used for edges that do not state one.
    pub default_maxspeed_kmh: f64,
    pub sample_spacing_m: f64,
    /// Add a reverse edge `{id}:rev` for every two-way road.
    pub bidirectional: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            default_maxspeed_kmh: 50.0,
            sample_spacing_m: 10.0,
            bidirectional: false,
        }
    }
}

/// Validated roads: unique ids, every edge endpoint exists.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoadNetwork {
    pub nodes: Vec<RoadNode>,
    pub edges: Vec<RoadEdge>,
}

impl RoadNetwork {
    pub fn new(nodes: Vec<RoadNode>, edges: Vec<RoadEdge>) -> Result<Self> {
        let mut ids = HashSet::new();
        for n in &nodes {
            if !ids.insert(&n.id) {
                return Err(Error::Record {
                    record: n.id.to_string(),
                    msg: "duplicate node id".into(),
                });
            }
        }
        let mut edge_ids = HashSet::new();
        for e in &edges {
            for end in [&e.from, &e.to] {
                if !ids.contains(end) {
                    return Err(Error::Record {
                        record: e.id.to_string(),
                        msg: format!("references unknown node `{end}`"),
                    });
                }
            }
            if !edge_ids.insert(&e.id) {
                return Err(Error::Record {
                    record: e.id.to_string(),
                    msg: "duplicate edge id".into(),
                });
            }
        }
        Ok(RoadNetwork { nodes, edges })
    }
}

/// Reads a roads file, choosing the format from the extension (`.geojson`,
/// `.json`) or, failing that, from the first non-blank character.
pub fn ingest_roads(path: &Path, opts: &IngestOptions) -> Result<RoadNetwork> {
    let text = read_to_string(path)?;
    let name = path.display().to_string();
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    if ext == "geojson" || ext == "json" || text.trim_start().starts_with('{') {
        parse_roads_geojson(&text, &name, opts)
    } else {
        parse_roads_csv(&text, &name, opts)
    }
}

pub fn ingest_cells(path: &Path) -> Result<Vec<Cell>> {
    parse_cells_csv(&read_to_string(path)?, &path.display().to_string())
}

struct Row {
    line: usize,
    fields: Vec<String>,
}

fn csv_rows(text: &str, source_name: &str) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            line: e.position().map_or(0, |p| line_of(text, p.byte() as usize)),
            msg: e.to_string(),
        })?;
        // Line from the byte offset: the reader's own line counter skips blank lines.
        let line = rec.position().map_or(0, |p| line_of(text, p.byte() as usize));
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if fields.iter().all(String::is_empty) {
            continue;
        }
        rows.push(Row { line, fields });
    }
    Ok(rows)
}

pub(crate) fn line_of(text: &str, byte: usize) -> usize {
    let bytes = text.as_bytes();
    // Record positions can point at the blank lines preceding the record.
    let mut start = byte.min(bytes.len());
    while start < bytes.len() && matches!(bytes[start], b'\n' | b'\r') {
        start += 1;
    }
    bytes[..start].iter().filter(|&&b| b == b'\n').count() + 1
}

fn parse_f64(field: &str, what: &str, line: usize, source_name: &str) -> Result<f64> {
    field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
        source_name: source_name.to_string(),
        line,
        msg: format!("{what} `{field}` is not a number"),
    })
}

fn parse_point(lat: &str, lon: &str, line: usize, source_name: &str) -> Result<LatLon> {
    let lat = parse_f64(lat, "latitude", line, source_name)?;
    let lon = parse_f64(lon, "longitude", line, source_name)?;
    LatLon::new(lat, lon).map_err(|e| Error::Parse {
        source_name: source_name.to_string(),
        line,
        msg: e.to_string(),
    })
}

fn is_header(fields: &[String]) -> bool {
    fields.first().is_some_and(|f| f.eq_ignore_ascii_case("id"))
}

#[derive(PartialEq)]
enum Section {
    None,
    Nodes,
    Edges,
}

struct RawEdge {
    line: usize,
    id: String,
    from: String,
    to: String,
    length_m: Option<f64>,
    maxspeed_kmh: Option<f64>,
    interior: Vec<LatLon>,
}

pub fn parse_roads_csv(text: &str, source_name: &str, opts: &IngestOptions) -> Result<RoadNetwork> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        msg,
    };
    let mut section = Section::None;
    let mut nodes = Vec::new();
    let mut raw_edges = Vec::new();
    for Row { line, fields } in csv_rows(text, source_name)? {
        if fields.len() == 1 && fields[0].ends_with(':') {
            section = match fields[0].to_ascii_lowercase().as_str() {
                "nodes:" => Section::Nodes,
                "edges:" => Section::Edges,
                other => return Err(parse_err(line, format!("unknown section `{other}`"))),
            };
            continue;
        }
        if is_header(&fields) {
            continue;
        }
        match section {
            Section::None => return Err(parse_err(line, "data before a `nodes:` or `edges:` section".into())),
            Section::Nodes => {
                if fields.len() < 3 {
                    return Err(parse_err(line, "node rows need id,lat,lon".into()));
                }
                nodes.push(RoadNode {
                    id: NodeId(fields[0].clone()),
                    pos: parse_point(&fields[1], &fields[2], line, source_name)?,
                });
            }
            Section::Edges => {
                if fields.len() < 3 {
                    return Err(parse_err(line, "edge rows need id,from,to[,length_m,maxspeed_kmh,geometry]".into()));
                }
                let opt_num = |i: usize, what: &str| -> Result<Option<f64>> {
                    match fields.get(i).map(String::as_str) {
                        None | Some("") => Ok(None),
                        Some(f) => parse_f64(f, what, line, source_name).map(Some),
                    }
                };
                let mut interior = Vec::new();
                if let Some(geom) = fields.get(5) {
                    for pt in geom.split(';').map(str::trim).filter(|p| !p.is_empty()) {
                        let mut it = pt.split_whitespace();
                        match (it.next(), it.next(), it.next()) {
                            (Some(lat), Some(lon), None) => interior.push(parse_point(lat, lon, line, source_name)?),
                            _ => return Err(parse_err(line, format!("geometry point `{pt}` is not `lat lon`"))),
                        }
                    }
                }
                raw_edges.push(RawEdge {
                    line,
                    id: fields[0].clone(),
                    from: fields[1].clone(),
                    to: fields[2].clone(),
                    length_m: opt_num(3, "length")?,
                    maxspeed_kmh: opt_num(4, "max speed")?,
                    interior,
                });
            }
        }
    }

    let positions: HashMap<&str, LatLon> = nodes.iter().map(|n| (n.id.as_str(), n.pos)).collect();
    let mut edges = Vec::with_capacity(raw_edges.len());
    for raw in raw_edges {
        let pos = |n: &str| {
            positions.get(n).copied().ok_or_else(|| Error::Record {
                record: raw.id.clone(),
                msg: format!("line {}: references unknown node `{n}`", raw.line),
            })
        };
        let (a, b) = (pos(&raw.from)?, pos(&raw.to)?);
        let geometry = polyline(a, &raw.interior, b);
        let length_m = raw.length_m.unwrap_or_else(|| polyline_length_m(&geometry));
        push_edge(
            &mut edges,
            EdgeId(raw.id),
            NodeId(raw.from),
            NodeId(raw.to),
            length_m,
            raw.maxspeed_kmh.unwrap_or(opts.default_maxspeed_kmh),
            geometry,
            opts,
            opts.bidirectional,
        )?;
    }
    RoadNetwork::new(nodes, edges)
}

/// Endpoints plus interior points, dropping interior points that repeat an endpoint.
fn polyline(a: LatLon, interior: &[LatLon], b: LatLon) -> Vec<LatLon> {
    let mut pts = vec![a];
    pts.extend(interior.iter().copied().filter(|p| *p != a && *p != b));
    pts.push(b);
    pts
}

#[allow(clippy::too_many_arguments)]
fn push_edge(
    edges: &mut Vec<RoadEdge>,
    id: EdgeId,
    from: NodeId,
    to: NodeId,
    length_m: f64,
    maxspeed_kmh: f64,
    geometry: Vec<LatLon>,
    opts: &IngestOptions,
    two_way: bool,
) -> Result<()> {
    if two_way {
        let rev_geom = geometry.iter().rev().copied().collect();
        let rev_id = EdgeId(format!("{id}:rev"));
        edges.push(RoadEdge::new(
            id,
            from.clone(),
            to.clone(),
            length_m,
            maxspeed_kmh,
            geometry,
            opts.sample_spacing_m,
        )?);
        edges.push(RoadEdge::new(rev_id, to, from, length_m, maxspeed_kmh, rev_geom, opts.sample_spacing_m)?);
    } else {
        edges.push(RoadEdge::new(id, from, to, length_m, maxspeed_kmh, geometry, opts.sample_spacing_m)?);
    }
    Ok(())
}

/// Reads a FeatureCollection of LineStrings. Recognised properties: `id`,
/// `from`, `to`, `maxspeed` (km/h, number or leading number of a string),
/// `length_m` and `oneway`. Endpoints without `from`/`to` get ids derived from
/// their coordinates, so touching LineStrings share nodes.
pub fn parse_roads_geojson(text: &str, source_name: &str, opts: &IngestOptions) -> Result<RoadNetwork> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        source_name: source_name.to_string(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    let bad = |msg: String| Error::Parse {
        source_name: source_name.to_string(),
        line: 0,
        msg,
    };
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("expected a FeatureCollection".into()))?;

    let mut nodes: BTreeMap<String, LatLon> = BTreeMap::new();
    let mut edges = Vec::new();
    for (i, f) in features.iter().enumerate() {
        let props = f.get("properties").cloned().unwrap_or(Value::Null);
        let prop_str = |k: &str| -> Option<String> {
            match props.get(k)? {
                Value::String(s) => Some(s.clone()),
                Value::Number(n) => Some(n.to_string()),
                _ => None,
            }
        };
        let id = prop_str("id").unwrap_or_else(|| format!("f{i}"));
        let geom = f.get("geometry").ok_or_else(|| bad(format!("feature `{id}` has no geometry")))?;
        if geom.get("type").and_then(Value::as_str) != Some("LineString") {
            return Err(bad(format!("feature `{id}` is not a LineString")));
        }
        let coords = geom
            .get("coordinates")
            .and_then(Value::as_array)
            .ok_or_else(|| bad(format!("feature `{id}` has no coordinates")))?;
        let mut pts = Vec::with_capacity(coords.len());
        for c in coords {
            let pair = c.as_array().filter(|a| a.len() >= 2).and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)));
            let (lon, lat) = pair.ok_or_else(|| bad(format!("feature `{id}` has a malformed coordinate")))?;
            pts.push(LatLon::new(lat, lon).map_err(|e| bad(format!("feature `{id}`: {e}")))?);
        }
        pts.dedup();
        if pts.len() < 2 {
            return Err(Error::Record {
                record: id,
                msg: "LineString needs two distinct points".into(),
            });
        }
        let (a, b) = (pts[0], pts[pts.len() - 1]);
        let from = prop_str("from").unwrap_or_else(|| coord_id(a));
        let to = prop_str("to").unwrap_or_else(|| coord_id(b));
        for (n, p) in [(&from, a), (&to, b)] {
            if let Some(prev) = nodes.insert(n.clone(), p) {
                if prev != p {
                    return Err(Error::Record {
                        record: id,
                        msg: format!("node `{n}` appears at two positions"),
                    });
                }
            }
        }
        let maxspeed = match prop_str("maxspeed") {
            Some(s) => leading_number(&s).ok_or_else(|| Error::Record {
                record: id.clone(),
                msg: format!("unreadable maxspeed `{s}`"),
            })?,
            None => opts.default_maxspeed_kmh,
        };
        let length_m = props.get("length_m").and_then(Value::as_f64).unwrap_or_else(|| polyline_length_m(&pts));
        let oneway = matches!(prop_str("oneway").as_deref(), Some("yes" | "true" | "1"))
            || props.get("oneway").and_then(Value::as_bool) == Some(true);
        push_edge(
            &mut edges,
            EdgeId(id),
            NodeId(from),
            NodeId(to),
            length_m,
            maxspeed,
            pts,
            opts,
            opts.bidirectional && !oneway,
        )?;
    }
    let nodes = nodes.into_iter().map(|(id, pos)| RoadNode { id: NodeId(id), pos }).collect();
    RoadNetwork::new(nodes, edges)
}

fn coord_id(p: LatLon) -> String {
    format!("{:.7},{:.7}", p.lat, p.lon)
}

fn leading_number(s: &str) -> Option<f64> {
    let end = s.find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(s.len());
    s[..end].parse().ok().filter(|v: &f64| *v > 0.0)
}

/// Reads cells. With a header row, columns are found by name (`id` or the
/// OpenCelliD `mcc,net,area,cell` tuple, plus `lat` and `lon`); without one,
/// the first three columns are `id,lat,lon`. Other columns are ignored.
pub fn parse_cells_csv(text: &str, source_name: &str) -> Result<Vec<Cell>> {
    let rows = csv_rows(text, source_name)?;
    let header = rows
        .first()
        .filter(|r| r.fields.iter().any(|f| f.eq_ignore_ascii_case("lat")))
        .map(|r| r.fields.iter().map(|f| f.to_ascii_lowercase()).collect::<Vec<_>>());
    let col = |name: &str| header.as_ref().and_then(|h| h.iter().position(|f| f == name));

    enum IdCols {
        Single(usize),
        OpenCellId([usize; 4]),
    }
    let (id_cols, lat_col, lon_col) = match &header {
        None => (IdCols::Single(0), 1, 2),
        Some(_) => {
            let missing = |what: &str| Error::Parse {
                source_name: source_name.to_string(),
                line: rows[0].line,
                msg: format!("header has no `{what}` column"),
            };
            let id = match (col("id"), col("mcc"), col("net"), col("area"), col("cell")) {
                (Some(i), ..) => IdCols::Single(i),
                (None, Some(a), Some(b), Some(c), Some(d)) => IdCols::OpenCellId([a, b, c, d]),
                (None, _, _, _, Some(d)) => IdCols::Single(d),
                _ => return Err(missing("id")),
            };
            (id, col("lat").ok_or_else(|| missing("lat"))?, col("lon").ok_or_else(|| missing("lon"))?)
        }
    };

    let mut seen = HashSet::new();
    let mut cells = Vec::new();
    for row in rows.iter().skip(usize::from(header.is_some())) {
        let get = |i: usize| {
            row.fields.get(i).map(String::as_str).ok_or_else(|| Error::Parse {
                source_name: source_name.to_string(),
                line: row.line,
                msg: format!("expected at least {} columns", i + 1),
            })
        };
        let id = match id_cols {
            IdCols::Single(i) => get(i)?.to_string(),
            IdCols::OpenCellId(cols) => cols.iter().map(|&i| get(i)).collect::<Result<Vec<_>>>()?.join("-"),
        };
        if id.is_empty() {
            return Err(Error::Parse {
                source_name: source_name.to_string(),
                line: row.line,
                msg: "empty cell id".into(),
            });
        }
        let pos = parse_point(get(lat_col)?, get(lon_col)?, row.line, source_name)?;
        if !seen.insert(id.clone()) {
            return Err(Error::Record {
                record: id,
                msg: format!("line {}: duplicate cell id", row.line),
            });
        }
        cells.push(Cell { id: CellId(id), pos });
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_ROADS: &str = "\
# three-node fixture
nodes:
id,lat,lon
u,45.06946,7.677008
v,45.06946,7.681273
w,45.071664,7.679236
edges:
id,from,to,length_m,maxspeed_kmh,geometry
uv,u,v,350,126,
uw,u,w,350,126,
wv,w,v,350,126,
";

    #[test]
    fn reads_three_road_topology() {
        let net = parse_roads_csv(THREE_ROADS, "three_roads", &IngestOptions::default()).unwrap();
        assert_eq!(net.nodes.len(), 3);
        assert_eq!(net.edges.len(), 3);
        let uv = &net.edges[0];
        assert_eq!(uv.travel_time_s(), 10.0);
        assert_eq!(uv.samples.first(), Some(&net.nodes[0].pos));
        assert_eq!(uv.samples.last(), Some(&net.nodes[1].pos));
    }

    #[test]
    fn bidirectional_adds_reverse_edges() {
        let opts = IngestOptions {
            bidirectional: true,
            ..IngestOptions::default()
        };
        let net = parse_roads_csv(THREE_ROADS, "three_roads", &opts).unwrap();
        assert_eq!(net.edges.len(), 6);
        let rev = net.edges.iter().find(|e| e.id.as_str() == "uv:rev").unwrap();
        assert_eq!((rev.from.as_str(), rev.to.as_str()), ("v", "u"));
    }

    #[test]
    fn empty_edge_list_is_fine() {
        let net = parse_roads_csv("nodes:\nu,45,7\nedges:\n", "t", &IngestOptions::default()).unwrap();
        assert_eq!(net.nodes.len(), 1);
        assert!(net.edges.is_empty());
    }

    #[test]
    fn defaults_and_geometry() {
        let text = "nodes:\na,45,7\nb,45.001,7\nedges:\nab,a,b,,,45.0005 7.0001\n";
        let net = parse_roads_csv(text, "t", &IngestOptions::default()).unwrap();
        let e = &net.edges[0];
        assert_eq!(e.max_speed_kmh, 50.0);
        assert_eq!(e.geometry.len(), 3);
        assert!((e.length_m - polyline_length_m(&e.geometry)).abs() < 1e-9);
    }

    #[test]
    fn dangling_node_names_the_edge() {
        let err = parse_roads_csv("nodes:\na,45,7\nedges:\nab,a,zz,10,50\n", "t", &IngestOptions::default()).unwrap_err();
        assert!(matches!(&err, Error::Record { record, .. } if record == "ab"), "{err}");
    }

    #[test]
    fn non_positive_length_names_the_edge() {
        let err = parse_roads_csv("nodes:\na,45,7\nb,45.1,7\nedges:\nab,a,b,0,50\n", "t", &IngestOptions::default())
            .unwrap_err();
        assert!(matches!(&err, Error::Record { record, .. } if record == "ab"), "{err}");
    }

    #[test]
    fn bad_number_reports_line() {
        let err = parse_roads_csv("nodes:\na,45,7\nb,north,7\n", "t", &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn geojson_linestrings_share_nodes() {
        let text = r#"{"type":"FeatureCollection","features":[
          {"type":"Feature","properties":{"id":"a","maxspeed":"30 mph"},
           "geometry":{"type":"LineString","coordinates":[[7.0,45.0],[7.001,45.0]]}},
          {"type":"Feature","properties":{"id":"b","maxspeed":50,"oneway":"yes"},
           "geometry":{"type":"LineString","coordinates":[[7.001,45.0],[7.002,45.0]]}}]}"#;
        let opts = IngestOptions {
            bidirectional: true,
            ..IngestOptions::default()
        };
        let net = parse_roads_geojson(text, "t", &opts).unwrap();
        assert_eq!(net.nodes.len(), 3);
        assert_eq!(net.edges.len(), 3);
        assert_eq!(net.edges[0].max_speed_kmh, 30.0);
    }

    #[test]
    fn cells_positional_with_extra_columns() {
        let cells = parse_cells_csv("c1,45.07,7.68,LTE,222,1\n", "t").unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].id.as_str(), "c1");
    }

    #[test]
    fn cells_opencellid_header() {
        let text = "radio,mcc,net,area,cell,unit,lon,lat,range\nNR,222,1,100,7,,7.68,45.07,500\n";
        let cells = parse_cells_csv(text, "t").unwrap();
        assert_eq!(cells[0].id.as_str(), "222-1-100-7");
        assert_eq!(cells[0].pos, LatLon::new(45.07, 7.68).unwrap());
    }

    #[test]
    fn duplicate_cell_rejected() {
        let err = parse_cells_csv("a,45,7\na,45.1,7\n", "t").unwrap_err();
        assert!(matches!(err, Error::Record { .. }));
        // Shared coordinates are allowed.
        assert_eq!(parse_cells_csv("a,45,7\nb,45,7\n", "t").unwrap().len(), 2);
    }

    #[test]
    fn malformed_cell_row_reports_line() {
        let err = parse_cells_csv("a,45,7\n\nb,45\n", "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
