//! Complex scalar and small dense matrix kernels.
//!
//! Everything here works on matrices of at most 3×3 entries, which is all the
//! two-phase relay model ever needs. The QR factorisation is specialised to
//! the 2×3 equivalent channel seen by the destination.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use num_complex::Complex64 as Complex;

/// Absolute tolerance used for algebraic identities at double precision.
pub const TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: {lhs_rows}x{lhs_cols} times {rhs_rows}x{rhs_cols}")]
    DimensionMismatch {
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },
    #[error("expected a {expected} matrix, got {rows}x{cols}")]
    Shape {
        expected: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix dimensions must be in 1..=3, got {rows}x{cols}")]
    Unsupported { rows: usize, cols: usize },
    #[error("entry count {len} does not match {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, len: usize },
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("non-finite entry")]
    NonFinite,
}

/// Dense complex matrix stored row-major, 1..=3 rows and columns.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex>) -> Result<Self, NumericsError> {
        if !(1..=3).contains(&rows) || !(1..=3).contains(&cols) {
            return Err(NumericsError::Unsupported { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(NumericsError::EntryCount {
                rows,
                cols,
                len: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NumericsError::NonFinite);
        }
        Ok(Self { rows, cols, entries })
    }

    /// Builds a matrix from nested rows. Panics on ragged or oversized input,
    /// so it is meant for literals.
    pub fn from_rows<const R: usize, const C: usize>(rows: [[Complex; C]; R]) -> Self {
        let entries = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(R, C, entries).expect("literal matrix must be 1..=3 square-ish and finite")
    }

    pub fn from_real_rows<const R: usize, const C: usize>(rows: [[f64; C]; R]) -> Self {
        Self::from_rows(rows.map(|r| r.map(|x| Complex::new(x, 0.0))))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!((1..=3).contains(&rows) && (1..=3).contains(&cols));
        Self {
            rows,
            cols,
            entries: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    /// Largest entry modulus.
    pub fn norm_inf(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> Result<f64, NumericsError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumericsError::DimensionMismatch {
                lhs_rows: self.rows,
                lhs_cols: self.cols,
                rhs_rows: other.rows,
                rhs_cols: other.cols,
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix, NumericsError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumericsError::DimensionMismatch {
                lhs_rows: self.rows,
                lhs_cols: self.cols,
                rhs_rows: other.rows,
                rhs_cols: other.cols,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex;

    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        &mut self.entries[r * self.cols + c]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn cmat_mul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, NumericsError> {
    if a.cols != b.rows {
        return Err(NumericsError::DimensionMismatch {
            lhs_rows: a.rows,
            lhs_cols: a.cols,
            rhs_rows: b.rows,
            rhs_cols: b.cols,
        });
    }
    let mut out = CMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = Complex::new(0.0, 0.0);
            for k in 0..a.cols {
                acc += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

pub fn conj_transpose(a: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.cols, a.rows);
    for i in 0..a.rows {
        for j in 0..a.cols {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

pub fn det2(a: &CMatrix) -> Result<Complex, NumericsError> {
    if a.rows != 2 || a.cols != 2 {
        return Err(NumericsError::Shape {
            expected: "2x2",
            rows: a.rows,
            cols: a.cols,
        });
    }
    Ok(a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)])
}

/// Unit-modulus phase of `z`, with 1 for `z == 0`.
fn unit_phase(z: Complex) -> Complex {
    let n = z.norm();
    if n == 0.0 {
        Complex::new(1.0, 0.0)
    } else {
        z / n
    }
}

/// QR factorisation of a 2×3 matrix, `H = Q R`.
///
/// `Q` is 2×2 unitary and `R` is 2×3 with `r21 = 0` exactly and real,
/// non-negative `r11`, `r22`. The first column is annihilated below the
/// diagonal with one complex Householder reflector; a diagonal phase
/// correction then fixes the sign convention. A zero first column skips the
/// reflector and leaves `Q` diagonal.
pub fn qr_2x3(h: &CMatrix) -> Result<(CMatrix, CMatrix), NumericsError> {
    if h.rows != 2 || h.cols != 3 {
        return Err(NumericsError::Shape {
            expected: "2x3",
            rows: h.rows,
            cols: h.cols,
        });
    }
    let rows = [[h[(0, 0)], h[(0, 1)], h[(0, 2)]], [h[(1, 0)], h[(1, 1)], h[(1, 2)]]];
    let (q, r) = qr_2x3_array(&rows);
    Ok((CMatrix::from_rows(q), CMatrix::from_rows(r)))
}

/// Allocation-free form of [`qr_2x3`] on row arrays.
pub fn qr_2x3_array(h: &[[Complex; 3]; 2]) -> ([[Complex; 2]; 2], [[Complex; 3]; 2]) {
    let zero = Complex::new(0.0, 0.0);
    let one = Complex::new(1.0, 0.0);
    let (x0, x1) = (h[0][0], h[1][0]);
    let col_norm = (x0.norm_sqr() + x1.norm_sqr()).sqrt();

    // Reflector P = I - 2 v v* / (v* v), Hermitian and unitary.
    let p = if col_norm == 0.0 || x1 == zero {
        [[one, zero], [zero, one]]
    } else {
        let alpha = -unit_phase(x0) * col_norm;
        let v0 = x0 - alpha;
        let v1 = x1;
        let s = 2.0 / (v0.norm_sqr() + v1.norm_sqr());
        [
            [one - v0 * v0.conj() * s, -(v0 * v1.conj()) * s],
            [-(v1 * v0.conj()) * s, one - v1 * v1.conj() * s],
        ]
    };

    let mut r = [[zero; 3]; 2];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = p[i][0] * h[0][j] + p[i][1] * h[1][j];
        }
    }
    r[1][0] = zero;

    let d = [unit_phase(r[0][0]), unit_phase(r[1][1])];
    for (row, di) in r.iter_mut().zip(d) {
        for e in row.iter_mut() {
            *e *= di.conj();
        }
    }
    r[0][0] = Complex::new(r[0][0].re.max(0.0), 0.0);
    r[1][1] = Complex::new(r[1][1].re.max(0.0), 0.0);

    let mut q = p;
    for row in q.iter_mut() {
        row[0] *= d[0];
        row[1] *= d[1];
    }
    (q, r)
}

/// Identifies one reproducible random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> StreamRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream_id);
        StreamRng { inner }
    }
}

/// Generator positioned at the start of an [`RngStream`].
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    /// Circularly symmetric complex Gaussian with `E|z|^2 = sigma2`, via
    /// Box–Muller.
    pub fn sample_gaussian(&mut self, sigma2: f64) -> Result<Complex, NumericsError> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(NumericsError::NonPositiveVariance(sigma2));
        }
        Ok(self.gaussian_unchecked(sigma2))
    }

    #[inline]
    pub(crate) fn gaussian_unchecked(&mut self, sigma2: f64) -> Complex {
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.inner.gen::<f64>();
        let u2 = self.inner.gen::<f64>();
        let radius = (-sigma2 * u1.ln()).sqrt();
        Complex::from_polar(radius, 2.0 * PI * u2)
    }

    pub fn uniform_index(&mut self, m: usize) -> usize {
        self.inner.gen_range(0..m)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.inner.gen()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn identity_product() {
        let i2 = CMatrix::identity(2);
        assert_eq!(cmat_mul(&i2, &i2).unwrap(), i2);
    }

    #[test]
    fn swap_is_involution() {
        let p = CMatrix::from_real_rows([[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(cmat_mul(&p, &p).unwrap(), CMatrix::identity(2));
    }

    #[test]
    fn mul_dimension_mismatch() {
        let a = CMatrix::zeros(2, 3);
        let b = CMatrix::zeros(2, 2);
        assert!(matches!(
            cmat_mul(&a, &b),
            Err(NumericsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(CMatrix::new(4, 1, vec![c(0.0, 0.0); 4]).is_err());
        assert!(CMatrix::new(2, 2, vec![c(0.0, 0.0); 3]).is_err());
        assert_eq!(
            CMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(NumericsError::NonFinite)
        );
    }

    #[test]
    fn conj_transpose_cases() {
        let sym = CMatrix::from_real_rows([[1.0, 2.0], [2.0, 5.0]]);
        assert_eq!(conj_transpose(&sym), sym);
        let i = CMatrix::from_rows([[c(0.0, 1.0)]]);
        assert_eq!(conj_transpose(&i), CMatrix::from_rows([[c(0.0, -1.0)]]));
        let a = CMatrix::from_rows([[c(1.0, 2.0), c(3.0, -1.0), c(0.5, 0.5)]]);
        assert_eq!(conj_transpose(&a).rows(), 3);
        assert_eq!(conj_transpose(&conj_transpose(&a)), a);
    }

    #[test]
    fn det2_cases() {
        assert_eq!(det2(&CMatrix::identity(2)).unwrap(), c(1.0, 0.0));
        let delta = 2.0;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = CMatrix::from_real_rows([[delta, 0.0], [delta * s, delta * s]]);
        let d = det2(&m).unwrap();
        assert!((d - c(2.0 * 2.0_f64.sqrt(), 0.0)).norm() < 1e-12);
        let singular = CMatrix::from_real_rows([[1.0, 1.0], [1.0, 1.0]]);
        assert_eq!(det2(&singular).unwrap(), c(0.0, 0.0));
        assert!(det2(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn qr_example_one_channel_is_already_triangular() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMatrix::from_real_rows([[1.0, s, 0.0], [0.0, s, 1.0]]);
        let (q, r) = qr_2x3(&h).unwrap();
        assert!(q.max_abs_diff(&CMatrix::identity(2)).unwrap() < 1e-12);
        assert!(r.max_abs_diff(&h).unwrap() < 1e-12);
        assert_eq!(r[(0, 2)], c(0.0, 0.0));
    }

    #[test]
    fn qr_zero_first_column_does_not_crash() {
        let h = CMatrix::from_rows([
            [c(0.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-0.5, 2.0), c(0.3, -0.1)],
        ]);
        let (q, r) = qr_2x3(&h).unwrap();
        let qr = cmat_mul(&q, &r).unwrap();
        assert!(qr.max_abs_diff(&h).unwrap() < TOL);
        assert_eq!(r[(1, 0)], c(0.0, 0.0));
        assert!(r[(1, 1)].im == 0.0 && r[(1, 1)].re >= 0.0);
    }

    #[test]
    fn qr_rejects_wrong_shape() {
        assert!(qr_2x3(&CMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn gaussian_rejects_nonpositive_variance() {
        let mut rng = RngStream::new(1, 2).rng();
        assert!(rng.sample_gaussian(0.0).is_err());
        assert!(rng.sample_gaussian(-1.0).is_err());
        assert!(rng.sample_gaussian(f64::NAN).is_err());
    }

    #[test]
    fn gaussian_is_deterministic_per_stream() {
        let draw = |s: RngStream| {
            let mut rng = s.rng();
            (0..64)
                .map(|_| rng.sample_gaussian(1.0).unwrap())
                .collect::<Vec<_>>()
        };
        let a = draw(RngStream::new(7, 3));
        let b = draw(RngStream::new(7, 3));
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
        let other = draw(RngStream::new(7, 4));
        assert_ne!(a, other);
    }
}
