use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius (IUGG), metres.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Link distances below this are clamped to keep `d^-a` finite.
pub const MIN_LINK_DISTANCE_M: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::domain(format!("coordinate ({lat}, {lon}) out of range")));
        }
        Ok(LatLon { lat, lon })
    }

    pub fn haversine_m(&self, other: &LatLon) -> f64 {
        haversine_m(*self, *other)
    }

    fn lerp(&self, other: &LatLon, t: f64) -> LatLon {
        LatLon {
            lat: self.lat + (other.lat - self.lat) * t,
            lon: self.lon + (other.lon - self.lon) * t,
        }
    }
}

pub fn haversine_m(a: LatLon, b: LatLon) -> f64 {
    let (la1, la2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = la2 - la1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + la1.cos() * la2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Cell-to-vehicle distance with the 1 m floor applied.
pub fn link_distance_m(a: LatLon, b: LatLon) -> f64 {
    haversine_m(a, b).max(MIN_LINK_DISTANCE_M)
}

pub fn polyline_length_m(points: &[LatLon]) -> f64 {
    points.windows(2).map(|w| haversine_m(w[0], w[1])).sum()
}

/// Resamples a polyline so consecutive points are at most `spacing_m` apart.
/// Every original vertex, endpoints included, is kept.
pub fn densify(points: &[LatLon], spacing_m: f64) -> Vec<LatLon> {
    let Some(first) = points.first() else {
        return Vec::new();
    };
    let mut out = vec![*first];
    for w in points.windows(2) {
        let len = haversine_m(w[0], w[1]);
        let steps = (len / spacing_m).ceil().max(1.0) as usize;
        for k in 1..=steps {
            out.push(w[0].lerp(&w[1], k as f64 / steps as f64));
        }
    }
    out
}
