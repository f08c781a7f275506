//! Empirical diversity order: least-squares slope of `-log10(p)` against
//! `SNR_dB / 10`.

use thiserror::Error;

use super::{SepCurve, SepPoint};

/// Minimum number of events a point needs before it may enter a fit.
pub const MIN_EVENTS: u64 = 50;
pub const MIN_POINTS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("fit window {lo}..{hi} dB holds {have} points, need at least {need}")]
    TooFewPoints { lo: f64, hi: f64, have: usize, need: usize },
    #[error("point at {snr_db} dB has {have} events, need at least {need}")]
    InsufficientEvents { snr_db: f64, have: u64, need: u64 },
    #[error("probability at {snr_db} dB is undefined or zero")]
    Undefined { snr_db: f64 },
}

/// Which per-point probability to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    SepJoint,
    SepA,
    SepB,
    RelayNcError,
    ErrGivenRelayCorrect,
    ErrGivenRelayWrong,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::SepJoint => "sep_joint",
            Quantity::SepA => "sep_a",
            Quantity::SepB => "sep_b",
            Quantity::RelayNcError => "p_relay_err",
            Quantity::ErrGivenRelayCorrect => "p_err_rc",
            Quantity::ErrGivenRelayWrong => "p_err_rw",
        }
    }

    pub fn value(self, p: &SepPoint) -> Option<f64> {
        match self {
            Quantity::SepJoint => Some(p.sep_joint()),
            Quantity::SepA => Some(p.sep_a()),
            Quantity::SepB => Some(p.sep_b()),
            Quantity::RelayNcError => Some(p.p_relay_nc_error()),
            Quantity::ErrGivenRelayCorrect => p.p_err_given_relay_correct(),
            Quantity::ErrGivenRelayWrong => p.p_err_given_relay_wrong(),
        }
    }

    /// Number of events behind [`Quantity::value`].
    pub fn events(self, p: &SepPoint) -> u64 {
        let c = &p.counts;
        match self {
            Quantity::SepJoint => c.joint_errors,
            Quantity::SepA => c.errors_a,
            Quantity::SepB => c.errors_b,
            Quantity::RelayNcError => c.relay_nc_errors,
            Quantity::ErrGivenRelayCorrect => c.errors_relay_correct,
            Quantity::ErrGivenRelayWrong => c.errors_relay_wrong,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityFit {
    pub slope: f64,
    pub intercept: f64,
    pub fit_window_db: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares on `(snr_db, p)` pairs; no event checks.
pub fn fit_slope(samples: &[(f64, f64)]) -> Result<DiversityFit, FitError> {
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    if samples.len() < MIN_POINTS {
        return Err(FitError::TooFewPoints {
            lo,
            hi,
            have: samples.len(),
            need: MIN_POINTS,
        });
    }
    if let Some(&(snr_db, _)) = samples.iter().find(|s| !(s.1 > 0.0) || !s.1.is_finite()) {
        return Err(FitError::Undefined { snr_db });
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0 / 10.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| -s.1.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(DiversityFit {
        slope,
        intercept,
        fit_window_db: (lo, hi),
        r_squared,
        points: samples.len(),
    })
}

/// Fits `which` over every point with `window.0 <= snr_db <= window.1`.
/// Each point must carry at least [`MIN_EVENTS`] events.
pub fn estimate_diversity(
    curve: &SepCurve,
    which: Quantity,
    window_db: (f64, f64),
) -> Result<DiversityFit, FitError> {
    let in_window: Vec<&SepPoint> = curve
        .points
        .iter()
        .filter(|p| p.snr_db >= window_db.0 && p.snr_db <= window_db.1)
        .collect();
    if in_window.len() < MIN_POINTS {
        return Err(FitError::TooFewPoints {
            lo: window_db.0,
            hi: window_db.1,
            have: in_window.len(),
            need: MIN_POINTS,
        });
    }
    let mut samples = Vec::with_capacity(in_window.len());
    for p in in_window {
        let have = which.events(p);
        if have < MIN_EVENTS {
            return Err(FitError::InsufficientEvents {
                snr_db: p.snr_db,
                have,
                need: MIN_EVENTS,
            });
        }
        let v = which.value(p).ok_or(FitError::Undefined { snr_db: p.snr_db })?;
        samples.push((p.snr_db, v));
    }
    fit_slope(&samples)
}

/// Smallest and largest SNR whose `which` value lies strictly inside
/// `(lo, hi)` with enough events.
pub fn window_where(curve: &SepCurve, which: Quantity, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let inside: Vec<f64> = curve
        .points
        .iter()
        .filter(|p| {
            which.events(p) >= MIN_EVENTS
                && which.value(p).is_some_and(|v| v > lo && v < hi)
        })
        .map(|p| p.snr_db)
        .collect();
    Some((*inside.first()?, *inside.last()?))
}
