//! Joint ML detection of both source symbols at the relay, followed by the
//! network-coded forward.

use crate::channel::ChannelRealization;
use crate::netcode::LatinSquare;
use crate::numerics::Complex;
use crate::scheme::SchemeConstants;
use crate::signal::SignalSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayDecision {
    pub xa_idx: usize,
    pub xb_idx: usize,
    pub x_r: Complex,
}

/// Exhaustive search over all M² pairs. Iterates `xa` then `xb` ascending and
/// keeps the first strict minimum, so ties resolve to the lexicographically
/// smallest pair.
pub fn relay_ml_decode(
    y_r: Complex,
    h: &ChannelRealization,
    k: &SchemeConstants,
    s: &SignalSet,
) -> (usize, usize) {
    let g = k.sqrt_es();
    let ga = h.h_ar * k.a() * g;
    let gb = h.h_br * k.b() * g;
    let mut best = (0, 0);
    let mut best_metric = f64::INFINITY;
    for (ia, &xa) in s.points().iter().enumerate() {
        let partial = y_r - ga * xa;
        for (ib, &xb) in s.points().iter().enumerate() {
            let metric = (partial - gb * xb).norm_sqr();
            if metric < best_metric {
                best_metric = metric;
                best = (ia, ib);
            }
        }
    }
    best
}

pub fn relay_forward(dec: (usize, usize), f: &LatinSquare, s: &SignalSet) -> Complex {
    s.points()[f.cell(dec.0, dec.1)]
}

pub fn relay_decide(
    y_r: Complex,
    h: &ChannelRealization,
    k: &SchemeConstants,
    s: &SignalSet,
    f: &LatinSquare,
) -> RelayDecision {
    let (xa_idx, xb_idx) = relay_ml_decode(y_r, h, k, s);
    RelayDecision {
        xa_idx,
        xb_idx,
        x_r: relay_forward((xa_idx, xb_idx), f, s),
    }
}
