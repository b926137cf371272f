//! NR resource-block arithmetic.
//!
//! Packets are converted to resource blocks (RBs) from the spectral efficiency
//! a vehicle is guaranteed, RB budgets are derived for a delay window, and the
//! two are combined into the number of vehicles a cell can carry.
//!
//! All integer results are computed with exact rational arithmetic: every
//! floating-point input is first mapped to the shortest rational that
//! reproduces it, so `0.005` s is exactly 1/200 s and ceilings/floors never
//! pick up binary rounding noise.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};

const DEFAULT_MCS_TABLE: &str = include_str!("../data/mcs_pusch_64qam.txt");

/// Radio configuration of every cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NrConfig {
    /// NR numerology index.
    pub numerology: u32,
    /// Channel bandwidth in MHz.
    pub bandwidth_mhz: u32,
    /// Signalling overhead fraction in `[0, 1)`.
    pub overhead: f64,
    /// Peak service bitrate in bit/s.
    pub bitrate_bps: f64,
    /// Packet length in bits.
    pub packet_bits: u64,
    /// Packet delay budget in seconds.
    pub pdb_s: f64,
    /// RBs available per symbol duration, keyed by bandwidth in MHz.
    pub nrb_per_symbol: BTreeMap<u32, u32>,
    /// Target decoding error. Carried for completeness; no formula consumes it.
    pub decode_error: f64,
}

impl NrConfig {
    /// The uplink tele-operated driving setup: 25 Mbit/s video in 12 kbit
    /// packets, 5 ms delay budget, numerology 2, 108 RBs per symbol at 80 MHz,
    /// 14% overhead.
    pub fn uplink_defaults() -> Self {
        let nrb_per_symbol = [(80, 108), (160, 216), (240, 324), (320, 432)].into_iter().collect();
        NrConfig {
            numerology: 2,
            bandwidth_mhz: 80,
            overhead: 0.14,
            bitrate_bps: 25e6,
            packet_bits: 12_000,
            pdb_s: 5e-3,
            nrb_per_symbol,
            decode_error: 1e-5,
        }
    }

    pub fn with_bandwidth(&self, bandwidth_mhz: u32) -> Self {
        NrConfig {
            bandwidth_mhz,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.numerology > 6 {
            return Err(Error::config(format!("numerology {} out of range 0..=6", self.numerology)));
        }
        if !(0.0..1.0).contains(&self.overhead) {
            return Err(Error::config(format!("overhead {} must lie in [0, 1)", self.overhead)));
        }
        if !(self.bitrate_bps > 0.0 && self.bitrate_bps.is_finite()) {
            return Err(Error::config(format!("bitrate {} must be positive", self.bitrate_bps)));
        }
        if self.packet_bits == 0 {
            return Err(Error::config("packet length must be positive"));
        }
        if !(self.pdb_s > 0.0 && self.pdb_s.is_finite()) {
            return Err(Error::config(format!("packet delay budget {} must be positive", self.pdb_s)));
        }
        self.nrb()?;
        Ok(())
    }

    /// Symbol duration `1e-3 / (14 * 2^mu)` in seconds.
    pub fn symbol_duration_s(&self) -> f64 {
        1e-3 / (14.0 * f64::from(1u32 << self.numerology))
    }

    /// Subcarrier spacing `15 * 2^mu` kHz, in Hz.
    pub fn subcarrier_spacing_hz(&self) -> f64 {
        15e3 * f64::from(1u32 << self.numerology)
    }

    /// RBs per symbol duration at the configured bandwidth.
    pub fn nrb(&self) -> Result<u32> {
        self.nrb_per_symbol.get(&self.bandwidth_mhz).copied().ok_or_else(|| {
            Error::config(format!("no RB count configured for a {} MHz bandwidth", self.bandwidth_mhz))
        })
    }

    fn symbol_duration_q(&self) -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(14_000u64 << self.numerology))
    }

    /// Bits carried by one RB at unit spectral efficiency: `T_S * 12 * delta_f`.
    fn rb_time_bandwidth_q(&self) -> BigRational {
        self.symbol_duration_q() * BigInt::from(12u64 * 15_000 * (1u64 << self.numerology))
    }

    /// Total RBs in a window of `window_s` seconds, before overhead.
    fn nrb_window_q(&self, window_s: f64) -> Result<BigRational> {
        check_positive("window", window_s)?;
        let symbols = (exact(window_s) / self.symbol_duration_q()).floor();
        if symbols.is_zero() {
            return Err(Error::domain(format!(
                "window {window_s} s is shorter than one symbol ({} s)",
                self.symbol_duration_s()
            )));
        }
        Ok(symbols * BigInt::from(self.nrb()?))
    }
}

impl Default for NrConfig {
    fn default() -> Self {
        Self::uplink_defaults()
    }
}

/// RBs consumed by one packet at spectral efficiency `se`.
pub fn rb_per_packet(se: f64, cfg: &NrConfig) -> Result<u64> {
    check_positive("spectral efficiency", se)?;
    let per_rb = cfg.rb_time_bandwidth_q() * exact(se);
    to_u64(&(BigRational::from_integer(BigInt::from(cfg.packet_bits)) / per_rb).ceil())
}

/// Packets a vehicle emits in `window_s` seconds: `ceil(b * t / L)`.
pub fn packets_per_window(window_s: f64, cfg: &NrConfig) -> Result<u64> {
    check_positive("window", window_s)?;
    let bits = exact(cfg.bitrate_bps) * exact(window_s);
    to_u64(&(bits / BigInt::from(cfg.packet_bits)).ceil())
}

/// RBs one vehicle needs over a window of `window_s` seconds at spectral efficiency `se`.
pub fn rb_per_vehicle_window(window_s: f64, se: f64, cfg: &NrConfig) -> Result<u64> {
    let rb = rb_per_packet(se, cfg)?;
    let packets = packets_per_window(window_s, cfg)?;
    rb.checked_mul(packets).ok_or_else(|| Error::domain("RB demand overflows u64"))
}

/// RBs left for the service in a window of `window_s` seconds after overhead.
pub fn available_rbs(window_s: f64, cfg: &NrConfig) -> Result<u64> {
    allocated_rbs(window_s, 1.0, cfg)
}

/// The share `iota` of a cell's post-overhead RB budget over `window_s` seconds:
/// `floor(iota * (1 - OH) * NRB(window))`.
pub fn allocated_rbs(window_s: f64, iota: f64, cfg: &NrConfig) -> Result<u64> {
    if !(0.0..=1.0).contains(&iota) {
        return Err(Error::domain(format!("RB share {iota} must lie in [0, 1]")));
    }
    let keep = BigRational::from_integer(BigInt::from(1)) - exact(cfg.overhead);
    to_u64(&(exact(iota) * keep * cfg.nrb_window_q(window_s)?).floor())
}

/// Vehicles a cell can serve within the delay budget when every one of them
/// sits at spectral efficiency `worst_se` and the cell gives a share `iota` of
/// its RBs.
pub fn max_vehicles_cell(worst_se: f64, iota: f64, cfg: &NrConfig) -> Result<u64> {
    let budget = allocated_rbs(cfg.pdb_s, iota, cfg)?;
    let per_vehicle = rb_per_vehicle_window(cfg.pdb_s, worst_se, cfg)?;
    Ok(budget / per_vehicle)
}

/// Achievable spectral efficiencies, one per MCS, strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct McsTable {
    entries: Vec<f64>,
}

impl McsTable {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::config("MCS table is empty"));
        }
        if let Some(bad) = entries.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::config(format!("MCS spectral efficiency {bad} must be positive")));
        }
        if let Some(w) = entries.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::config(format!(
                "MCS table must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(McsTable { entries })
    }

    /// PUSCH MCS table with 64QAM (3GPP TS 38.214, Table 6.1.4.1-1).
    pub fn pusch_64qam() -> Self {
        Self::parse(DEFAULT_MCS_TABLE, "builtin MCS table").expect("builtin MCS table is valid")
    }

    /// Parses one value per line; `#` starts a comment.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let value = line.parse::<f64>().map_err(|e| Error::Parse {
                source_name: source_name.to_string(),
                line: i + 1,
                msg: format!("bad spectral efficiency `{line}`: {e}"),
            })?;
            entries.push(value);
        }
        Self::new(entries)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?, &path.display().to_string())
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of the largest entry strictly below `shannon_se`.
    pub fn effective_index(&self, shannon_se: f64) -> Option<usize> {
        if shannon_se.is_nan() {
            return None;
        }
        self.entries.partition_point(|&s| s < shannon_se).checked_sub(1)
    }

    /// The largest entry strictly below `shannon_se`, or `None` when no MCS fits.
    pub fn effective_se(&self, shannon_se: f64) -> Option<f64> {
        self.effective_index(shannon_se).map(|i| self.entries[i])
    }
}

impl TryFrom<Vec<f64>> for McsTable {
    type Error = Error;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<McsTable> for Vec<f64> {
    fn from(table: McsTable) -> Self {
        table.entries
    }
}

impl Default for McsTable {
    fn default() -> Self {
        Self::pusch_64qam()
    }
}

/// Quantizes a Shannon spectral efficiency down to the table. `None` means no MCS.
pub fn effective_se(shannon_se: f64, table: &McsTable) -> Option<f64> {
    table.effective_se(shannon_se)
}

/// Inputs of the aggregate uplink capacity formula of 3GPP TR 38.306 (5.1.1-1),
/// used as an alternative way to size RBs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixCapacityParams {
    /// Fraction of resources scheduled in uplink.
    pub ul_ratio: f64,
    pub layers: u32,
    pub modulation_order: u32,
    pub scaling: f64,
    pub max_code_rate: f64,
    /// RBs of each component carrier.
    pub prb_per_carrier: Vec<u32>,
    pub overhead: f64,
}

impl AppendixCapacityParams {
    pub fn validate(&self) -> Result<()> {
        let in_range = |name: &str, v: f64, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("{name} = {v} out of range")))
            }
        };
        in_range("ul_ratio", self.ul_ratio, (0.0..=1.0).contains(&self.ul_ratio))?;
        in_range("scaling", self.scaling, self.scaling > 0.0 && self.scaling <= 1.0)?;
        in_range("max_code_rate", self.max_code_rate, self.max_code_rate > 0.0 && self.max_code_rate < 1.0)?;
        in_range("overhead", self.overhead, (0.0..1.0).contains(&self.overhead))?;
        if self.layers == 0 || self.modulation_order == 0 {
            return Err(Error::config("layers and modulation order must be positive"));
        }
        if self.prb_per_carrier.is_empty() || self.prb_per_carrier.contains(&0) {
            return Err(Error::config("need at least one component carrier with a positive RB count"));
        }
        Ok(())
    }

    fn per_rb_factor(&self) -> f64 {
        self.ul_ratio
            * f64::from(self.layers)
            * f64::from(self.modulation_order)
            * self.scaling
            * self.max_code_rate
            * 12.0
            * (1.0 - self.overhead)
    }
}

/// Average bits per RB across component carriers, from the aggregate capacity
/// of each carrier divided by its RB rate.
pub fn bits_per_rb_appendix(params: &AppendixCapacityParams, cfg: &NrConfig) -> Result<f64> {
    params.validate()?;
    let ts = cfg.symbol_duration_s();
    let total: f64 = params
        .prb_per_carrier
        .iter()
        .map(|&n| {
            let n = f64::from(n);
            let carrier_bps = params.per_rb_factor() * n / ts;
            carrier_bps * ts / n
        })
        .sum();
    Ok(total / params.prb_per_carrier.len() as f64)
}

/// RBs per packet when each RB carries [`bits_per_rb_appendix`] bits. The
/// carrier RB count and symbol duration cancel, so the exact form is used.
pub fn rb_per_packet_appendix(params: &AppendixCapacityParams, cfg: &NrConfig) -> Result<u64> {
    params.validate()?;
    let per_rb = exact(params.ul_ratio)
        * BigInt::from(params.layers)
        * BigInt::from(params.modulation_order)
        * exact(params.scaling)
        * exact(params.max_code_rate)
        * BigInt::from(12)
        * (BigRational::from_integer(BigInt::from(1)) - exact(params.overhead));
    if per_rb.is_zero() {
        return Err(Error::domain("appendix parameters give zero bits per RB"));
    }
    to_u64(&(BigRational::from_integer(BigInt::from(cfg.packet_bits)) / per_rb).ceil())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Shortest rational that reproduces `x` in binary floating point.
fn exact(x: f64) -> BigRational {
    match Ratio::<i64>::approximate_float(x) {
        Some(r) if r.to_f64() == Some(x) => BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
        _ => BigRational::from_float(x).expect("finite input"),
    }
}

fn to_u64(r: &BigRational) -> Result<u64> {
    r.to_integer()
        .to_u64()
        .ok_or_else(|| Error::domain(format!("RB count {r} does not fit in u64")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent hand evaluation: straight f64 arithmetic on the textbook formula.
    fn hand_rb_per_packet(se: f64, mu: u32, l: f64) -> f64 {
        let ts = 1e-3 / (14.0 * 2f64.powi(mu as i32));
        let rb_bw = 12.0 * 15e3 * 2f64.powi(mu as i32);
        (l / (ts * rb_bw * se)).ceil()
    }

    #[test]
    fn rb_per_packet_golden() {
        let cfg = NrConfig::uplink_defaults();
        assert_eq!(hand_rb_per_packet(5.0, 2, 12000.0), 187.0);
        assert_eq!(rb_per_packet(5.0, &cfg).unwrap(), 187);
        // 12000 / (90/7 * 7.4063) = 126.0186..., so the ceiling is 127.
        assert_eq!(hand_rb_per_packet(7.4063, 2, 12000.0), 127.0);
        assert_eq!(rb_per_packet(7.4063, &cfg).unwrap(), 127);
    }

    #[test]
    fn one_rb_when_packet_fits_exactly() {
        let mut cfg = NrConfig::uplink_defaults();
        // One RB carries 90/7 * se bits; se = 7/90 * L makes one packet fill one RB.
        cfg.packet_bits = 90;
        assert_eq!(rb_per_packet(7.0, &cfg).unwrap(), 1);
        assert_eq!(rb_per_packet(6.999, &cfg).unwrap(), 2);
    }

    #[test]
    fn rb_per_packet_rejects_non_positive() {
        let cfg = NrConfig::uplink_defaults();
        assert!(matches!(rb_per_packet(0.0, &cfg), Err(Error::Domain(_))));
        assert!(matches!(rb_per_packet(-1.0, &cfg), Err(Error::Domain(_))));
        assert!(matches!(rb_per_packet(f64::NAN, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn packets_per_window_golden() {
        let cfg = NrConfig::uplink_defaults();
        assert_eq!((25e6_f64 * 5e-3 / 12000.0).ceil(), 11.0);
        assert_eq!(packets_per_window(5e-3, &cfg).unwrap(), 11);
        // b*t = L exactly: 12000 / 25e6 = 0.00048 s.
        assert_eq!(packets_per_window(0.00048, &cfg).unwrap(), 1);
        // b*t = 2L + 1 bit.
        assert_eq!(packets_per_window(24001.0 / 25e6, &cfg).unwrap(), 3);
        assert!(matches!(packets_per_window(0.0, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn vehicle_window_is_product() {
        let cfg = NrConfig::uplink_defaults();
        assert_eq!(rb_per_vehicle_window(5e-3, 5.0, &cfg).unwrap(), 187 * 11);
        assert_eq!(rb_per_vehicle_window(0.00048, 5.0, &cfg).unwrap(), rb_per_packet(5.0, &cfg).unwrap());
        for se in [0.3, 1.0, 2.5, 4.2] {
            assert!(
                rb_per_vehicle_window(5e-3, 2.0 * se, &cfg).unwrap() <= rb_per_vehicle_window(5e-3, se, &cfg).unwrap()
            );
        }
    }

    #[test]
    fn available_rbs_golden() {
        let cfg = NrConfig::uplink_defaults();
        // floor(0.86 * 108 * 280) = floor(26006.4)
        assert_eq!((0.86_f64 * 108.0 * 280.0).floor(), 26006.0);
        assert_eq!(available_rbs(5e-3, &cfg).unwrap(), 26006);

        let mut no_oh = cfg.clone();
        no_oh.overhead = 0.0;
        let ts = cfg.symbol_duration_s();
        assert_eq!(available_rbs(ts, &no_oh).unwrap(), 108);
        assert_eq!(available_rbs(2.0 * ts * 0.999, &no_oh).unwrap(), 108);
        assert!(matches!(available_rbs(ts * 0.5, &no_oh), Err(Error::Domain(_))));

        let missing = cfg.with_bandwidth(100);
        assert!(matches!(available_rbs(5e-3, &missing), Err(Error::Config(_))));
    }

    #[test]
    fn max_vehicles_golden() {
        let cfg = NrConfig::uplink_defaults();
        assert_eq!(26006 / 2057, 12);
        assert_eq!(max_vehicles_cell(5.0, 1.0, &cfg).unwrap(), 12);
        assert_eq!(max_vehicles_cell(5.0, 0.0, &cfg).unwrap(), 0);
        let half = max_vehicles_cell(5.0, 0.5, &cfg).unwrap();
        assert!((12 / 2 - 1..=12).contains(&half));
        assert!(matches!(max_vehicles_cell(5.0, 1.5, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn effective_se_strict_below() {
        let t = McsTable::new(vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(effective_se(3.5, &t), Some(2.0));
        assert_eq!(effective_se(0.5, &t), None);
        assert_eq!(effective_se(4.0, &t), Some(2.0));
        assert_eq!(effective_se(1.0, &t), None);
        assert_eq!(effective_se(f64::INFINITY, &t), Some(4.0));
    }

    #[test]
    fn mcs_table_validation() {
        assert!(matches!(McsTable::new(vec![]), Err(Error::Config(_))));
        assert!(McsTable::new(vec![1.0, 1.0]).is_err());
        assert!(McsTable::new(vec![2.0, 1.0]).is_err());
        assert!(McsTable::new(vec![0.0, 1.0]).is_err());
        let t = McsTable::parse("# header\n0.5\n\n1.5 # trailing\n", "t").unwrap();
        assert_eq!(t.entries(), &[0.5, 1.5]);
        let err = McsTable::parse("0.5\nabc\n", "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let builtin = McsTable::pusch_64qam();
        assert_eq!(builtin.len(), 28);
        assert_eq!(builtin.entries()[0], 0.2344);
        assert_eq!(builtin.entries()[27], 5.5547);
    }

    #[test]
    fn appendix_bits_per_rb() {
        let cfg = NrConfig::uplink_defaults();
        let mut p = AppendixCapacityParams {
            ul_ratio: 1.0,
            layers: 1,
            modulation_order: 2,
            scaling: 1.0,
            max_code_rate: 0.5,
            prb_per_carrier: vec![66, 132],
            overhead: 0.0,
        };
        approx::assert_relative_eq!(bits_per_rb_appendix(&p, &cfg).unwrap(), 12.0, max_relative = 1e-12);
        assert_eq!(rb_per_packet_appendix(&p, &cfg).unwrap(), 1000);
        p.modulation_order = 4;
        approx::assert_relative_eq!(bits_per_rb_appendix(&p, &cfg).unwrap(), 24.0, max_relative = 1e-12);
        p.overhead = 1.0;
        assert!(bits_per_rb_appendix(&p, &cfg).is_err());
    }

    #[test]
    fn rb_per_packet_monotone_grid() {
        let mut cfg = NrConfig::uplink_defaults();
        let ses: Vec<f64> = (1..=40).map(|i| 0.15 * i as f64).collect();
        let lens: Vec<u64> = (1..=25).map(|i| 800 * i).collect();
        for &l in &lens {
            cfg.packet_bits = l;
            let rbs: Vec<u64> = ses.iter().map(|&s| rb_per_packet(s, &cfg).unwrap()).collect();
            assert!(rbs.windows(2).all(|w| w[1] <= w[0]), "not non-increasing in se at L={l}");
        }
        for &s in &ses {
            let rbs: Vec<u64> = lens
                .iter()
                .map(|&l| {
                    cfg.packet_bits = l;
                    rb_per_packet(s, &cfg).unwrap()
                })
                .collect();
            assert!(rbs.windows(2).all(|w| w[1] >= w[0]), "not non-decreasing in L at se={s}");
        }
    }

    #[test]
    fn max_vehicles_monotone_grid() {
        let base = NrConfig::uplink_defaults();
        let ses = [0.2344, 0.6016, 1.3262, 2.4063, 3.9023, 5.5547];
        for &se in &ses {
            let by_bw: Vec<u64> = [80, 160, 240, 320]
                .iter()
                .map(|&b| max_vehicles_cell(se, 1.0, &base.with_bandwidth(b)).unwrap())
                .collect();
            assert!(by_bw.windows(2).all(|w| w[1] >= w[0]));
            let by_iota: Vec<u64> = (0..=20)
                .map(|i| max_vehicles_cell(se, i as f64 / 20.0, &base).unwrap())
                .collect();
            assert!(by_iota.windows(2).all(|w| w[1] >= w[0]));
            let by_rate: Vec<u64> = (1..=10)
                .map(|i| {
                    let mut c = base.clone();
                    c.bitrate_bps = 5e6 * i as f64;
                    max_vehicles_cell(se, 1.0, &c).unwrap()
                })
                .collect();
            assert!(by_rate.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn max_vehicles_not_monotone_in_packet_length() {
        // The two ceilings pull in opposite directions as L grows: fewer,
        // larger packets can round to fewer RBs in total.
        let mut c = NrConfig::uplink_defaults();
        let iota = 1.0 / 3.0;
        c.packet_bits = 31_249;
        assert_eq!(rb_per_vehicle_window(c.pdb_s, 2.7305, &c).unwrap(), 891 * 5);
        assert_eq!(max_vehicles_cell(2.7305, iota, &c).unwrap(), 1);
        c.packet_bits = 31_250;
        assert_eq!(rb_per_vehicle_window(c.pdb_s, 2.7305, &c).unwrap(), 891 * 4);
        assert_eq!(max_vehicles_cell(2.7305, iota, &c).unwrap(), 2);
    }

    proptest! {
        #[test]
        fn budget_never_exceeded(se in 0.05f64..10.0, oh in 0.0f64..0.9, bw_idx in 0usize..4) {
            let mut cfg = NrConfig::uplink_defaults().with_bandwidth([80, 160, 240, 320][bw_idx]);
            cfg.overhead = oh;
            let n = max_vehicles_cell(se, 1.0, &cfg).unwrap();
            let per = rb_per_vehicle_window(cfg.pdb_s, se, &cfg).unwrap();
            let budget = (1.0 - oh) * f64::from(cfg.nrb().unwrap()) * 280.0;
            prop_assert!((n * per) as f64 <= budget + 1e-6);
        }

        #[test]
        fn effective_se_is_member_below_input(shannon in 0.0f64..8.0) {
            let t = McsTable::pusch_64qam();
            if let Some(s) = t.effective_se(shannon) {
                prop_assert!(t.entries().contains(&s));
                prop_assert!(s < shannon);
            } else {
                prop_assert!(shannon <= t.entries()[0]);
            }
        }
    }
}
