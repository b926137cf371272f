use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::EdgeId;

/// One committed traversal: `vehicle` occupies the road during `[entry_s, exit_s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Occupancy {
    pub vehicle: String,
    pub entry_s: f64,
    pub exit_s: f64,
}

/// Committed occupancy intervals of admitted vehicles, per road.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScheduleLedger {
    by_edge: BTreeMap<EdgeId, Vec<Occupancy>>,
    horizon_s: f64,
}

impl ScheduleLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Vehicles other than `exclude` whose interval on `edge` intersects `[entry_s, exit_s)`.
    pub fn overlap_count(&self, edge: &EdgeId, entry_s: f64, exit_s: f64, exclude: Option<&str>) -> Result<usize> {
        if !(entry_s < exit_s) {
            return Err(Error::domain(format!("empty occupancy interval [{entry_s}, {exit_s})")));
        }
        Ok(self.overlap_count_unchecked(edge, entry_s, exit_s, exclude))
    }

    pub(crate) fn overlap_count_unchecked(&self, edge: &EdgeId, entry_s: f64, exit_s: f64, exclude: Option<&str>) -> usize {
        self.by_edge.get(edge).map_or(0, |occ| {
            occ.iter()
                .filter(|o| o.entry_s < exit_s && entry_s < o.exit_s)
                .filter(|o| exclude != Some(o.vehicle.as_str()))
                .count()
        })
    }

    pub fn commit(&mut self, edge: EdgeId, occupancy: Occupancy) -> Result<()> {
        if !(occupancy.entry_s < occupancy.exit_s) {
            return Err(Error::domain(format!(
                "empty occupancy interval [{}, {})",
                occupancy.entry_s, occupancy.exit_s
            )));
        }
        self.horizon_s = self.horizon_s.max(occupancy.exit_s);
        self.by_edge.entry(edge).or_default().push(occupancy);
        Ok(())
    }

    pub fn intervals(&self, edge: &EdgeId) -> &[Occupancy] {
        self.by_edge.get(edge).map_or(&[], Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EdgeId, &[Occupancy])> {
        self.by_edge.iter().map(|(e, o)| (e, o.as_slice()))
    }

    /// Latest committed exit time; every road is free from here on.
    pub fn horizon_s(&self) -> f64 {
        self.horizon_s
    }

    pub fn is_empty(&self) -> bool {
        self.by_edge.is_empty()
    }
}
