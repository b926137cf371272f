//! Uplink SINR model with exponentially distributed serving and interfering
//! powers and power-law path loss.
//!
//! With `h ~ Exp(mu)` and `g_i ~ Exp(lambda)` the SINR
//! `h d^-a / (s2 + sum g_i d_i^-a)` has the closed-form CCDF
//!
//! ```text
//! P[SINR > x] = exp(-mu x d^a s2) * prod_i lambda / (lambda + mu x d^a d_i^-a)
//! ```
//!
//! which [`sinr_ccdf`] evaluates and [`sinr_percentile`] inverts.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Rate of the exponential serving-cell power.
    pub serving_rate: f64,
    /// Rate of the i.i.d. exponential interferer powers.
    pub interferer_rate: f64,
    /// Path-loss exponent.
    pub pathloss_exp: f64,
    /// Additive noise power, in the same units as the received powers.
    pub noise_power: f64,
}

impl ChannelModel {
    pub fn new(serving_rate: f64, interferer_rate: f64, pathloss_exp: f64, noise_power: f64) -> Result<Self> {
        let m = ChannelModel {
            serving_rate,
            interferer_rate,
            pathloss_exp,
            noise_power,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("serving power rate", self.serving_rate)?;
        positive("interferer power rate", self.interferer_rate)?;
        positive("path-loss exponent", self.pathloss_exp)?;
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(Error::config(format!("noise power must be >= 0, got {}", self.noise_power)));
        }
        Ok(())
    }
}

impl Default for ChannelModel {
    /// Unit-mean fading, path-loss exponent 4, and noise `1e-15` relative to
    /// unit received power at 1 m.
    fn default() -> Self {
        ChannelModel {
            serving_rate: 1.0,
            interferer_rate: 1.0,
            pathloss_exp: 4.0,
            noise_power: 1e-15,
        }
    }
}

/// Distances from a vehicle to its serving cell and to every interfering cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    serving_distance: f64,
    interferer_distances: Vec<f64>,
}

impl Geometry {
    pub fn new(serving_distance: f64, interferer_distances: Vec<f64>) -> Result<Self> {
        let ok = |d: f64| d > 0.0 && d.is_finite();
        if !ok(serving_distance) || !interferer_distances.iter().all(|&d| ok(d)) {
            return Err(Error::domain("all link distances must be strictly positive"));
        }
        Ok(Geometry {
            serving_distance,
            interferer_distances,
        })
    }

    pub fn serving_distance(&self) -> f64 {
        self.serving_distance
    }

    pub fn interferer_distances(&self) -> &[f64] {
        &self.interferer_distances
    }
}

/// Result of inverting the CCDF.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SinrThreshold {
    Finite(f64),
    /// No noise and no interference: the SINR is infinite almost surely.
    Unbounded,
}

impl SinrThreshold {
    pub fn spectral_efficiency(self) -> f64 {
        match self {
            SinrThreshold::Finite(g) => shannon_se(g),
            SinrThreshold::Unbounded => f64::INFINITY,
        }
    }
}

const PERCENTILE_REL_TOL: f64 = 1e-9;
const BRACKET_CAP: f64 = 18_446_744_073_709_551_616.0; // 2^64

/// A geometry bound to a channel model, with the path-loss powers precomputed.
#[derive(Clone, Debug)]
pub struct Link {
    model: ChannelModel,
    /// `d^a` of the serving link.
    serving_loss: f64,
    /// `d_i^-a` of each interferer.
    interferer_gains: Vec<f64>,
}

impl Link {
    pub fn new(geom: &Geometry, model: &ChannelModel) -> Self {
        let a = model.pathloss_exp;
        Link {
            model: *model,
            serving_loss: geom.serving_distance.powf(a),
            interferer_gains: geom.interferer_distances.iter().map(|d| d.powf(-a)).collect(),
        }
    }

    fn is_degenerate(&self) -> bool {
        self.model.noise_power == 0.0 && self.interferer_gains.is_empty()
    }

    pub fn ccdf(&self, gamma: f64) -> f64 {
        let m = &self.model;
        let k = m.serving_rate * gamma * self.serving_loss;
        let log_interf: f64 = self
            .interferer_gains
            .iter()
            .map(|g| (k * g / m.interferer_rate).ln_1p())
            .sum();
        (-k * m.noise_power - log_interf).exp()
    }

    pub fn laplace(&self, s: f64) -> f64 {
        let lambda = self.model.interferer_rate;
        self.interferer_gains.iter().map(|g| lambda / (lambda + s * g)).product()
    }

    /// Largest SINR threshold still exceeded with probability `reliability`.
    pub fn percentile(&self, reliability: f64) -> Result<SinrThreshold> {
        if !(reliability > 0.0 && reliability < 1.0) {
            return Err(Error::domain(format!("reliability {reliability} must lie in (0, 1)")));
        }
        if self.is_degenerate() {
            return Ok(SinrThreshold::Unbounded);
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.ccdf(hi) >= reliability {
            lo = hi;
            hi *= 2.0;
            if hi > BRACKET_CAP {
                return Ok(SinrThreshold::Finite(BRACKET_CAP));
            }
        }
        while hi - lo > PERCENTILE_REL_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if self.ccdf(mid) >= reliability {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(SinrThreshold::Finite(lo))
    }

    /// One instantaneous SINR draw; `f64::INFINITY` when noise and
    /// interference are both zero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let m = &self.model;
        let h: f64 = Exp1.sample(rng);
        let h = h / m.serving_rate;
        let interference: f64 = self
            .interferer_gains
            .iter()
            .map(|g| {
                let p: f64 = Exp1.sample(rng);
                p / m.interferer_rate * g
            })
            .sum();
        let denom = self.serving_loss * (m.noise_power + interference);
        if denom == 0.0 {
            f64::INFINITY
        } else {
            h / denom
        }
    }

    /// One draw of the aggregate interference `sum g_i d_i^-a`.
    pub fn sample_interference<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let lambda = self.model.interferer_rate;
        self.interferer_gains
            .iter()
            .map(|g| {
                let p: f64 = Exp1.sample(rng);
                p / lambda * g
            })
            .sum()
    }
}

/// `P[SINR > gamma_hat]`.
pub fn sinr_ccdf(gamma_hat: f64, geom: &Geometry, model: &ChannelModel) -> Result<f64> {
    if !(gamma_hat >= 0.0) {
        return Err(Error::domain(format!("SINR threshold {gamma_hat} must be >= 0")));
    }
    Ok(Link::new(geom, model).ccdf(gamma_hat))
}

/// Laplace transform of the aggregate interference, `E[exp(-s I)]`.
pub fn interference_laplace(s: f64, geom: &Geometry, model: &ChannelModel) -> f64 {
    Link::new(geom, model).laplace(s)
}

/// The SINR exceeded with probability at least `reliability`, by bracketing
/// and bisection to a relative tolerance of 1e-9.
pub fn sinr_percentile(reliability: f64, geom: &Geometry, model: &ChannelModel) -> Result<SinrThreshold> {
    Link::new(geom, model).percentile(reliability)
}

/// Shannon spectral efficiency `log2(1 + gamma)` in bit/s/Hz.
pub fn shannon_se(gamma_hat: f64) -> f64 {
    (1.0 + gamma_hat).log2()
}

pub fn sample_instantaneous_sinr<R: Rng + ?Sized>(geom: &Geometry, model: &ChannelModel, rng: &mut R) -> f64 {
    Link::new(geom, model).sample(rng)
}
