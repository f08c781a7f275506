//! Quasi-static Rayleigh fading for the five MARC links and the two
//! received-signal phases.

use thiserror::Error;

use crate::numerics::{Complex, StreamRng};
use crate::scheme::SchemeConstants;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("link variance for {link} must be positive and finite, got {value}")]
    Variance { link: &'static str, value: f64 },
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Linear variances of the A→R, B→R, A→D, B→D and R→D fades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingProfile {
    pub var_ar: f64,
    pub var_br: f64,
    pub var_ad: f64,
    pub var_bd: f64,
    pub var_rd: f64,
}

impl FadingProfile {
    pub fn from_db(ar: f64, br: f64, ad: f64, bd: f64, rd: f64) -> Result<Self, ChannelError> {
        Self::new(
            db_to_linear(ar),
            db_to_linear(br),
            db_to_linear(ad),
            db_to_linear(bd),
            db_to_linear(rd),
        )
    }

    pub fn new(var_ar: f64, var_br: f64, var_ad: f64, var_bd: f64, var_rd: f64) -> Result<Self, ChannelError> {
        let p = Self {
            var_ar,
            var_br,
            var_ad,
            var_bd,
            var_rd,
        };
        for (link, value) in p.named() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ChannelError::Variance { link, value });
            }
        }
        Ok(p)
    }

    /// All links at 0 dB.
    pub fn equal() -> Self {
        Self::new(1.0, 1.0, 1.0, 1.0, 1.0).expect("unit variances")
    }

    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("ar", self.var_ar),
            ("br", self.var_br),
            ("ad", self.var_ad),
            ("bd", self.var_bd),
            ("rd", self.var_rd),
        ]
    }

    pub fn to_db(&self) -> [f64; 5] {
        self.named().map(|(_, v)| linear_to_db(v))
    }
}

/// One frame's fades; held fixed across both phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub h_ar: Complex,
    pub h_br: Complex,
    pub h_ad: Complex,
    pub h_bd: Complex,
    pub h_rd: Complex,
}

impl ChannelRealization {
    pub fn ones() -> Self {
        let one = Complex::new(1.0, 0.0);
        Self {
            h_ar: one,
            h_br: one,
            h_ad: one,
            h_bd: one,
            h_rd: one,
        }
    }

    pub fn zeros() -> Self {
        let z = Complex::new(0.0, 0.0);
        Self {
            h_ar: z,
            h_br: z,
            h_ad: z,
            h_bd: z,
            h_rd: z,
        }
    }
}

/// Five independent circularly symmetric Gaussian fades, drawn in the order
/// AR, BR, AD, BD, RD.
pub fn sample_channel(rng: &mut StreamRng, p: &FadingProfile) -> ChannelRealization {
    ChannelRealization {
        h_ar: rng.gaussian_unchecked(p.var_ar),
        h_br: rng.gaussian_unchecked(p.var_br),
        h_ad: rng.gaussian_unchecked(p.var_ad),
        h_bd: rng.gaussian_unchecked(p.var_bd),
        h_rd: rng.gaussian_unchecked(p.var_rd),
    }
}

/// Phase-1 observations at the relay and the destination.
pub fn phase1(
    k: &SchemeConstants,
    h: &ChannelRealization,
    xa: Complex,
    xb: Complex,
    z_r: Complex,
    z_d1: Complex,
) -> (Complex, Complex) {
    let g = k.sqrt_es();
    let sa = k.a() * xa * g;
    let sb = k.b() * xb * g;
    (h.h_ar * sa + h.h_br * sb + z_r, h.h_ad * sa + h.h_bd * sb + z_d1)
}

/// Phase-2 observation at the destination with relay symbol `xr`.
pub fn phase2(
    k: &SchemeConstants,
    h: &ChannelRealization,
    xa: Complex,
    xb: Complex,
    xr: Complex,
    z_d2: Complex,
) -> Complex {
    let g = k.sqrt_es();
    h.h_ad * k.c() * xa * g + h.h_bd * k.d() * xb * g + h.h_rd * xr * g + z_d2
}

/// All three observations of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedFrame {
    pub y_r: Complex,
    pub y_d1: Complex,
    pub y_d2: Complex,
}
