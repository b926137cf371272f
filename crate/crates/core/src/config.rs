//! Run configuration: a flat `key = value` file, `#` starts a comment.
//!
//! Relative paths are resolved against the directory of the configuration
//! file. Unset keys take the defaults listed in [`KEYS`], which reproduce the
//! uplink tele-operated driving setup (25 Mbit/s, 12 kbit packets, 5 ms,
//! numerology 2, 108 RBs at 80 MHz, 14% overhead, path-loss exponent 4).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::ChannelModel;
use crate::error::{read_to_string, Error, Result};
use crate::exec::Exec;
use crate::graph::{BuildOptions, IngestOptions, IotaPolicy};
use crate::nr_radio::{McsTable, NrConfig};

/// A documented configuration key.
pub struct KeyDoc {
    pub key: &'static str,
    /// Default value as written in a file; empty when the key is required or optional without default.
    pub default: &'static str,
    pub doc: &'static str,
}

pub const KEYS: &[KeyDoc] = &[
    KeyDoc { key: "roads", default: "", doc: "Roads file (sectioned CSV or GeoJSON). Required." },
    KeyDoc { key: "cells", default: "", doc: "Cells CSV `id,lat,lon`, extra columns ignored. Required." },
    KeyDoc { key: "mcs_table", default: "", doc: "MCS spectral efficiencies, one per line. Defaults to the built-in PUSCH 64QAM table." },
    KeyDoc { key: "requests", default: "", doc: "Requests CSV used by `route` when `--requests` is not given." },
    KeyDoc { key: "graph", default: "", doc: "Prebuilt capacity graph JSON; `route` and `evaluate` build one from roads and cells when unset." },
    KeyDoc { key: "output_dir", default: "out", doc: "Directory for all outputs; created if missing." },
    KeyDoc { key: "numerology", default: "2", doc: "NR numerology index." },
    KeyDoc { key: "bandwidth_mhz", default: "80", doc: "Channel bandwidth in MHz; must appear in `nrb_per_symbol`." },
    KeyDoc { key: "overhead", default: "0.14", doc: "Signalling overhead fraction." },
    KeyDoc { key: "bitrate_bps", default: "25000000", doc: "Service bitrate per vehicle, bit/s." },
    KeyDoc { key: "packet_bits", default: "12000", doc: "Packet length, bits." },
    KeyDoc { key: "pdb_s", default: "0.005", doc: "Packet delay budget, seconds." },
    KeyDoc { key: "nrb_per_symbol", default: "80:108,160:216,240:324,320:432", doc: "RBs per symbol by bandwidth, `MHz:RB` pairs." },
    KeyDoc { key: "decode_error", default: "0.00001", doc: "Target decoding error; recorded, not used by any formula." },
    KeyDoc { key: "band_label", default: "FR2 26 GHz", doc: "Carrier band; informational." },
    KeyDoc { key: "fading_mu", default: "1", doc: "Rate of the exponential serving-link power." },
    KeyDoc { key: "fading_lambda", default: "1", doc: "Rate of the exponential interferer powers." },
    KeyDoc { key: "pathloss_alpha", default: "4", doc: "Path-loss exponent." },
    KeyDoc { key: "noise_power", default: "1e-15", doc: "Noise power relative to unit transmit power at 1 m." },
    KeyDoc { key: "reliability", default: "0.99999", doc: "Probability with which the provisioned SINR must be met." },
    KeyDoc { key: "iota_policy", default: "uniform", doc: "RB split among covered roads: `uniform` or `dedicated`." },
    KeyDoc { key: "sample_spacing_m", default: "10", doc: "Maximum spacing of channel sample points along a road, metres." },
    KeyDoc { key: "default_maxspeed_kmh", default: "50", doc: "Speed of roads that state none, km/h." },
    KeyDoc { key: "bidirectional", default: "false", doc: "Add a reverse edge `{id}:rev` for every road." },
    KeyDoc { key: "seed", default: "1", doc: "Base seed for packet simulation." },
    KeyDoc { key: "packets_per_vehicle_edge", default: "1000", doc: "Packets simulated per vehicle and road, unless a campaign overrides it." },
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub roads: PathBuf,
    pub cells: PathBuf,
    pub mcs_table: Option<PathBuf>,
    pub requests: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub nr: NrConfig,
    pub channel: ChannelModel,
    pub reliability: f64,
    pub iota_policy: IotaPolicy,
    pub sample_spacing_m: f64,
    pub default_maxspeed_kmh: f64,
    pub bidirectional: bool,
    pub seed: u64,
    pub band_label: String,
    pub packets_per_vehicle_edge: u64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path).map_err(|e| Error::config(format!("cannot read configuration: {e}")))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let cfg = Self::parse(&text, &path.display().to_string(), base)?;
        cfg.check_files()?;
        Ok(cfg)
    }

    /// Parses configuration text; relative paths are joined to `base_dir`.
    /// Referenced files are not checked.
    pub fn parse(text: &str, source_name: &str, base_dir: &Path) -> Result<Self> {
        let mut values: BTreeMap<&str, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                source_name: source_name.to_string(),
                line: i + 1,
                msg,
            };
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let k = k.trim();
            let doc = KEYS.iter().find(|d| d.key == k).ok_or_else(|| err(format!("unknown key `{k}`")))?;
            if values.insert(doc.key, (i + 1, v.trim().to_string())).is_some() {
                return Err(err(format!("key `{k}` set twice")));
            }
        }

        let get = |key: &str| -> Option<(usize, &str)> { values.get(key).map(|(l, v)| (*l, v.as_str())) };
        let num = |key: &'static str| -> Result<f64> { parse_value(get(key), key, source_name) };
        let path = |key: &str| get(key).filter(|(_, v)| !v.is_empty()).map(|(_, v)| base_dir.join(v));
        let required = |key: &str| path(key).ok_or_else(|| Error::config(format!("{source_name}: `{key}` is required")));

        let nr_map = match get("nrb_per_symbol") {
            Some((line, v)) => parse_nrb(v).map_err(|msg| Error::Parse {
                source_name: source_name.to_string(),
                line,
                msg,
            })?,
            None => parse_nrb(default_of("nrb_per_symbol")).expect("default RB map parses"),
        };
        let nr = NrConfig {
            numerology: parse_value(get("numerology"), "numerology", source_name)?,
            bandwidth_mhz: parse_value(get("bandwidth_mhz"), "bandwidth_mhz", source_name)?,
            overhead: num("overhead")?,
            bitrate_bps: num("bitrate_bps")?,
            packet_bits: parse_value(get("packet_bits"), "packet_bits", source_name)?,
            pdb_s: num("pdb_s")?,
            nrb_per_symbol: nr_map,
            decode_error: num("decode_error")?,
        };
        nr.validate()?;
        let channel = ChannelModel::new(
            num("fading_mu")?,
            num("fading_lambda")?,
            num("pathloss_alpha")?,
            num("noise_power")?,
        )?;
        let reliability = num("reliability")?;
        if !(reliability > 0.0 && reliability < 1.0) {
            return Err(Error::config(format!("reliability {reliability} must lie in (0, 1)")));
        }
        let sample_spacing_m = num("sample_spacing_m")?;
        let default_maxspeed_kmh = num("default_maxspeed_kmh")?;
        if !(sample_spacing_m > 0.0 && default_maxspeed_kmh > 0.0) {
            return Err(Error::config("sample_spacing_m and default_maxspeed_kmh must be positive"));
        }
        let packets_per_vehicle_edge: u64 = parse_value(get("packets_per_vehicle_edge"), "packets_per_vehicle_edge", source_name)?;
        if packets_per_vehicle_edge == 0 {
            return Err(Error::config("packets_per_vehicle_edge must be at least 1"));
        }
        Ok(RunConfig {
            roads: required("roads")?,
            cells: required("cells")?,
            mcs_table: path("mcs_table"),
            requests: path("requests"),
            graph: path("graph"),
            output_dir: path("output_dir").unwrap_or_else(|| base_dir.join(default_of("output_dir"))),
            nr,
            channel,
            reliability,
            iota_policy: parse_value(get("iota_policy"), "iota_policy", source_name)?,
            sample_spacing_m,
            default_maxspeed_kmh,
            bidirectional: parse_value(get("bidirectional"), "bidirectional", source_name)?,
            seed: parse_value(get("seed"), "seed", source_name)?,
            band_label: get("band_label").map_or(default_of("band_label"), |(_, v)| v).to_string(),
            packets_per_vehicle_edge,
        })
    }

    fn check_files(&self) -> Result<()> {
        let files = [Some(&self.roads), Some(&self.cells), self.mcs_table.as_ref(), self.graph.as_ref()];
        for p in files.into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::config(format!("file not found: {}", p.display())));
            }
        }
        Ok(())
    }

    pub fn mcs(&self) -> Result<McsTable> {
        match &self.mcs_table {
            Some(p) => McsTable::from_file(p),
            None => Ok(McsTable::pusch_64qam()),
        }
    }

    pub fn build_options(&self, exec: Exec) -> Result<BuildOptions> {
        Ok(BuildOptions {
            nr: self.nr.clone(),
            channel: self.channel,
            mcs: self.mcs()?,
            reliability: self.reliability,
            policy: self.iota_policy,
            exec,
        })
    }

    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            default_maxspeed_kmh: self.default_maxspeed_kmh,
            sample_spacing_m: self.sample_spacing_m,
            bidirectional: self.bidirectional,
        }
    }
}

fn default_of(key: &str) -> &'static str {
    KEYS.iter().find(|d| d.key == key).map_or("", |d| d.default)
}

fn parse_value<T: FromStr>(value: Option<(usize, &str)>, key: &'static str, source_name: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let (line, text) = value.unwrap_or((0, default_of(key)));
    text.parse::<T>().map_err(|e| Error::Parse {
        source_name: source_name.to_string(),
        line,
        msg: format!("bad value `{text}` for `{key}`: {e}"),
    })
}

fn parse_nrb(text: &str) -> std::result::Result<BTreeMap<u32, u32>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (b, n) = pair.split_once(':').ok_or_else(|| format!("expected `MHz:RB`, found `{pair}`"))?;
            let b = b.trim().parse().map_err(|_| format!("bad bandwidth in `{pair}`"))?;
            let n = n.trim().parse().map_err(|_| format!("bad RB count in `{pair}`"))?;
            Ok((b, n))
        })
        .collect()
}

/// Markdown table of every key with its default and meaning.
pub fn reference_markdown() -> String {
    let mut out = String::from(
        "# Configuration keys\n\nOne `key = value` per line; `#` starts a comment. \
         Relative paths are resolved against the configuration file's directory.\n\n\
         | key | default | meaning |\n|---|---|---|\n",
    );
    for k in KEYS {
        let default = if k.default.is_empty() { String::new() } else { format!("`{}`", k.default) };
        out.push_str(&format!("| `{}` | {} | {} |\n", k.key, default, k.doc));
    }
    out
}
