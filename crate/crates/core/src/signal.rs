//! Unit-energy PSK constellations and their difference sets.

use std::f64::consts::PI;

use thiserror::Error;

use crate::numerics::Complex;

/// Tolerance used to identify two constellation differences as equal.
const IDENT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("constellation size {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),
    #[error("expected {expected} bits, got {got}")]
    BitLength { expected: usize, got: usize },
    #[error("symbol index {index} out of range for M = {m}")]
    IndexOutOfRange { index: usize, m: usize },
}

/// M-PSK signal set with natural binary labelling: the λ-bit tuple whose
/// big-endian value is `k` maps to `points[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    points: Vec<Complex>,
    lambda: u32,
}

impl SignalSet {
    pub fn psk(m: usize) -> Result<Self, SignalError> {
        Self::psk_with_offset(m, 0.0)
    }

    /// `points[k] = exp(i (2πk/M + offset))`.
    pub fn psk_with_offset(m: usize, offset: f64) -> Result<Self, SignalError> {
        if m < 2 || !m.is_power_of_two() {
            return Err(SignalError::NotPowerOfTwo(m));
        }
        let points = (0..m)
            .map(|k| {
                let angle = 2.0 * PI * k as f64 / m as f64 + offset;
                let (s, c) = angle.sin_cos();
                Complex::new(snap(c), snap(s))
            })
            .collect();
        Ok(Self {
            points,
            lambda: m.trailing_zeros(),
        })
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Result<Complex, SignalError> {
        self.points
            .get(index)
            .copied()
            .ok_or(SignalError::IndexOutOfRange {
                index,
                m: self.m(),
            })
    }

    /// Maps a λ-bit tuple (most significant bit first) to its point.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Complex, SignalError> {
        if bits.len() != self.lambda as usize {
            return Err(SignalError::BitLength {
                expected: self.lambda as usize,
                got: bits.len(),
            });
        }
        let index = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        Ok(self.points[index])
    }

    /// All distinct values `x - x'` over pairs of points, in first-seen order.
    pub fn difference_set(&self) -> Vec<Complex> {
        let mut out: Vec<Complex> = Vec::new();
        for &x in &self.points {
            for &y in &self.points {
                let d = x - y;
                if !out.iter().any(|v| (v - d).norm() <= IDENT_TOL) {
                    out.push(d);
                }
            }
        }
        out
    }
}

/// Removes floating residue from exact trigonometric values such as cos(π/2).
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-15 {
        r
    } else {
        x
    }
}
