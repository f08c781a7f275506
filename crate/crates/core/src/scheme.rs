//! Source power-split constants, weight matrices and the two design checks.

use std::f64::consts::FRAC_1_SQRT_2;

use thiserror::Error;

use crate::numerics::{cmat_mul, conj_transpose, det2, CMatrix, Complex, NumericsError};
use crate::signal::SignalSet;

/// Energy-split tolerance for `|a|^2 + |c|^2 = 1` and `|b|^2 + |d|^2 = 1`.
pub const ENERGY_TOL: f64 = 1e-12;
pub const FULL_RANK_TOL: f64 = 1e-9;
pub const HR_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("|a|^2 + |c|^2 = {0}, expected 1")]
    EnergyA(f64),
    #[error("|b|^2 + |d|^2 = {0}, expected 1")]
    EnergyB(f64),
    #[error("energy per symbol must be positive and finite, got {0}")]
    Energy(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Phase-1 (`a`, `b`) and phase-2 (`c`, `d`) source weights plus `E_s`.
///
/// Noise has unit variance, so `es` is also the SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConstants {
    a: Complex,
    b: Complex,
    c: Complex,
    d: Complex,
    es: f64,
}

impl SchemeConstants {
    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex, es: f64) -> Result<Self, SchemeError> {
        let ea = a.norm_sqr() + c.norm_sqr();
        if (ea - 1.0).abs() > ENERGY_TOL {
            return Err(SchemeError::EnergyA(ea));
        }
        let eb = b.norm_sqr() + d.norm_sqr();
        if (eb - 1.0).abs() > ENERGY_TOL {
            return Err(SchemeError::EnergyB(eb));
        }
        if !(es > 0.0) || !es.is_finite() {
            return Err(SchemeError::Energy(es));
        }
        Ok(Self { a, b, c, d, es })
    }

    /// `a = 1`, `b = d = 1/sqrt(2)`, `c = 0`: full rank and fast-decodable.
    pub fn example1(es: f64) -> Result<Self, SchemeError> {
        Self::new(
            Complex::new(1.0, 0.0),
            Complex::new(FRAC_1_SQRT_2, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(FRAC_1_SQRT_2, 0.0),
            es,
        )
    }

    pub fn with_es(&self, es: f64) -> Result<Self, SchemeError> {
        Self::new(self.a, self.b, self.c, self.d, es)
    }

    pub fn a(&self) -> Complex {
        self.a
    }
    pub fn b(&self) -> Complex {
        self.b
    }
    pub fn c(&self) -> Complex {
        self.c
    }
    pub fn d(&self) -> Complex {
        self.d
    }
    pub fn es(&self) -> f64 {
        self.es
    }

    pub fn sqrt_es(&self) -> f64 {
        self.es.sqrt()
    }

    /// `ad - cb`; the restricted difference determinant is this times `dA dB`.
    pub fn cross_determinant(&self) -> Complex {
        self.a * self.d - self.c * self.b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrices {
    pub w_a: CMatrix,
    pub w_b: CMatrix,
    pub w_r: CMatrix,
}

pub fn weight_matrices(k: &SchemeConstants) -> WeightMatrices {
    let z = Complex::new(0.0, 0.0);
    let one = Complex::new(1.0, 0.0);
    WeightMatrices {
        w_a: CMatrix::from_rows([[k.a, k.c], [z, z], [z, z]]),
        w_b: CMatrix::from_rows([[z, z], [k.b, k.d], [z, z]]),
        w_r: CMatrix::from_rows([[z, z], [z, z], [z, one]]),
    }
}

/// 3×2 codeword matrix `[[a xA, c xA], [b xB, d xB], [0, xR]]`.
pub fn codeword_matrix(k: &SchemeConstants, xa: Complex, xb: Complex, xr: Complex) -> CMatrix {
    CMatrix::from_rows([
        [k.a * xa, k.c * xa],
        [k.b * xb, k.d * xb],
        [Complex::new(0.0, 0.0), xr],
    ])
}

/// Top 2×2 block of the codeword difference matrix.
pub fn restricted_diff_matrix(k: &SchemeConstants, da: Complex, db: Complex) -> CMatrix {
    CMatrix::from_rows([[k.a * da, k.c * da], [k.b * db, k.d * db]])
}

/// True iff every restricted difference matrix with both differences nonzero
/// has `|det| > tol`.
pub fn check_full_rank_condition(k: &SchemeConstants, s: &SignalSet, tol: f64) -> bool {
    let nonzero: Vec<Complex> = s
        .difference_set()
        .into_iter()
        .filter(|d| d.norm() > 1e-12)
        .collect();
    nonzero.iter().all(|&da| {
        nonzero.iter().all(|&db| {
            let det = det2(&restricted_diff_matrix(k, da, db)).expect("2x2 by construction");
            det.norm() > tol
        })
    })
}

/// Hurwitz–Radon orthogonality: `‖X Y* + Y X*‖∞ <= tol`.
pub fn check_hr_orthogonal(x: &CMatrix, y: &CMatrix, tol: f64) -> Result<bool, NumericsError> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(NumericsError::DimensionMismatch {
            lhs_rows: x.rows(),
            lhs_cols: x.cols(),
            rhs_rows: y.rows(),
            rhs_cols: y.cols(),
        });
    }
    let xy = cmat_mul(x, &conj_transpose(y))?;
    let yx = cmat_mul(y, &conj_transpose(x))?;
    Ok(xy.add(&yx)?.norm_inf() <= tol)
}

/// Which source's weight matrix is H-R orthogonal to the relay's.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastRoute {
    /// `W_A` and `W_R` are H-R orthogonal.
    Direct,
    /// Only `W_B` and `W_R` are; decode with A and B interchanged.
    Swapped,
}

/// `W_A W_R* + W_R W_A*` has `c` and `conj(c)` as its only nonzero entries
/// (likewise `d` for `W_B`), so the route reduces to testing `|c|` and `|d|`.
pub fn fast_route(k: &SchemeConstants) -> Option<FastRoute> {
    if k.c.norm() <= HR_TOL {
        Some(FastRoute::Direct)
    } else if k.d.norm() <= HR_TOL {
        Some(FastRoute::Swapped)
    } else {
        None
    }
}
