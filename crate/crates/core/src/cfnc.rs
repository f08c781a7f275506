//! Complex-field network coding baseline.
//!
//! The relay forwards `power_norm * (x̂A + θ x̂B)`, an M²-point constellation,
//! and the destination runs a joint minimum-distance search that trusts the
//! relay. Sources keep the same per-phase weights as the PNC scheme so both
//! schemes spend identical energy per frame; only the relay symbol differs.

use std::f64::consts::FRAC_PI_4;

use thiserror::Error;

use crate::channel::{phase1, ChannelRealization};
use crate::destination::{Branch, DecodeOutput};
use crate::numerics::Complex;
use crate::relay::relay_ml_decode;
use crate::scheme::SchemeConstants;
use crate::signal::SignalSet;

const UNIQUE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CfncError {
    #[error("|theta| = {0}, expected 1")]
    NotUnitModulus(f64),
    #[error("theta = {0} makes two source pairs combine to the same relay symbol")]
    Collision(Complex),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfncConfig {
    theta: Complex,
    power_norm: f64,
}

impl CfncConfig {
    /// Validates `theta` against `s` and scales the relay constellation to
    /// unit mean energy.
    pub fn new(s: &SignalSet, theta: Complex) -> Result<Self, CfncError> {
        if (theta.norm() - 1.0).abs() > 1e-12 {
            return Err(CfncError::NotUnitModulus(theta.norm()));
        }
        if !check_cfnc_uniqueness(s, theta) {
            return Err(CfncError::Collision(theta));
        }
        let m = s.m();
        let energy: f64 = s
            .points()
            .iter()
            .flat_map(|&xa| s.points().iter().map(move |&xb| (xa + theta * xb).norm_sqr()))
            .sum::<f64>()
            / (m * m) as f64;
        Ok(Self {
            theta,
            power_norm: 1.0 / energy.sqrt(),
        })
    }

    /// `θ = e^{iπ/4}`.
    pub fn default_for(s: &SignalSet) -> Result<Self, CfncError> {
        Self::new(s, Complex::from_polar(1.0, FRAC_PI_4))
    }

    pub fn theta(&self) -> Complex {
        self.theta
    }

    pub fn power_norm(&self) -> f64 {
        self.power_norm
    }

    pub fn relay_symbol(&self, xa: Complex, xb: Complex) -> Complex {
        (xa + self.theta * xb) * self.power_norm
    }
}

/// True iff all M² combinations `xA + θ xB` are pairwise distinct.
pub fn check_cfnc_uniqueness(s: &SignalSet, theta: Complex) -> bool {
    let sums: Vec<Complex> = s
        .points()
        .iter()
        .flat_map(|&xa| s.points().iter().map(move |&xb| xa + theta * xb))
        .collect();
    sums.iter()
        .enumerate()
        .all(|(i, u)| sums[i + 1..].iter().all(|v| (u - v).norm() > UNIQUE_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfncFrame {
    pub decoded: DecodeOutput,
    pub relay_pair: (usize, usize),
    pub y_d1: Complex,
    pub y_d2: Complex,
}

/// Joint minimum-distance decode over both phases, assuming the relay sent
/// the combination of the hypothesised pair. Scan order matches the PNC
/// decoders: `xB` outer, `xA` inner, first strict minimum.
pub fn cfnc_decode(
    y_d1: Complex,
    y_d2: Complex,
    h: &ChannelRealization,
    k: &SchemeConstants,
    s: &SignalSet,
    cfg: &CfncConfig,
) -> DecodeOutput {
    let g = k.sqrt_es();
    let (a1, b1) = (h.h_ad * k.a() * g, h.h_bd * k.b() * g);
    let (a2, b2, r2) = (h.h_ad * k.c() * g, h.h_bd * k.d() * g, h.h_rd * g);
    let p = s.points();
    let mut best = (0, 0);
    let mut best_metric = f64::INFINITY;
    for (ib, &xb) in p.iter().enumerate() {
        for (ia, &xa) in p.iter().enumerate() {
            let xr = cfg.relay_symbol(xa, xb);
            let metric = (y_d1 - a1 * xa - b1 * xb).norm_sqr()
                + (y_d2 - a2 * xa - b2 * xb - r2 * xr).norm_sqr();
            if metric < best_metric {
                best_metric = metric;
                best = (ia, ib);
            }
        }
    }
    DecodeOutput {
        xa_idx: best.0,
        xb_idx: best.1,
        branch: Branch::RelayCorrect,
    }
}

/// One full CFNC frame given the transmitted indices and the three noises.
#[allow(clippy::too_many_arguments)]
pub fn cfnc_run_frame(
    k: &SchemeConstants,
    h: &ChannelRealization,
    s: &SignalSet,
    cfg: &CfncConfig,
    xa_idx: usize,
    xb_idx: usize,
    z_r: Complex,
    z_d1: Complex,
    z_d2: Complex,
) -> CfncFrame {
    let p = s.points();
    let (xa, xb) = (p[xa_idx], p[xb_idx]);
    let (y_r, y_d1) = phase1(k, h, xa, xb, z_r, z_d1);
    let relay_pair = relay_ml_decode(y_r, h, k, s);
    let xr = cfg.relay_symbol(p[relay_pair.0], p[relay_pair.1]);
    let g = k.sqrt_es();
    let y_d2 = h.h_ad * k.c() * xa * g + h.h_bd * k.d() * xb * g + h.h_rd * xr * g + z_d2;
    CfncFrame {
        decoded: cfnc_decode(y_d1, y_d2, h, k, s, cfg),
        relay_pair,
        y_d1,
        y_d2,
    }
}
