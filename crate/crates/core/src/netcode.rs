//! Relay network-coding maps over symbol indices.
//!
//! A map `f: S x S -> S` is stored as an M×M grid, rows indexed by A's symbol
//! and columns by B's. Maps that satisfy the exclusive law are exactly the
//! Latin squares, which is what [`LatinSquare`] guarantees at construction.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::numerics::Complex;
use crate::signal::SignalSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetcodeError {
    #[error("order {0} is too small, need at least 2")]
    OrderTooSmall(usize),
    #[error("order {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("grid is not square: row {row} has {len} cells, expected {order}")]
    Ragged { row: usize, len: usize, order: usize },
    #[error("cell ({row},{col}) holds {value}, outside 0..{order}")]
    SymbolOutOfRange {
        row: usize,
        col: usize,
        value: usize,
        order: usize,
    },
    #[error("grid violates the exclusive law")]
    NotLatin,
    #[error("index ({a},{b}) out of range for order {order}")]
    IndexOutOfRange { a: usize, b: usize, order: usize },
    #[error("map order {map} does not match constellation size {signal}")]
    OrderMismatch { map: usize, signal: usize },
    #[error("cannot parse grid: {0}")]
    Parse(String),
}

/// Which standard Latin-square family to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Modulo,
    Xor,
}

impl MapKind {
    pub fn build(self, m: usize) -> Result<LatinSquare, NetcodeError> {
        match self {
            MapKind::Modulo => LatinSquare::modulo(m),
            MapKind::Xor => LatinSquare::xor(m),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MapKind::Modulo => "modulo",
            MapKind::Xor => "xor",
        }
    }
}

impl FromStr for MapKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "modulo" | "mod" => Ok(MapKind::Modulo),
            "xor" => Ok(MapKind::Xor),
            other => Err(format!("unknown map '{other}', expected modulo or xor")),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct LatinSquare {
    order: usize,
    cells: Vec<usize>,
}

impl LatinSquare {
    /// `cells[r][c] = (r + c) mod M`.
    pub fn modulo(m: usize) -> Result<Self, NetcodeError> {
        if m < 2 {
            return Err(NetcodeError::OrderTooSmall(m));
        }
        let cells = (0..m * m).map(|i| (i / m + i % m) % m).collect();
        Ok(Self { order: m, cells })
    }

    /// `cells[r][c] = r XOR c`.
    pub fn xor(m: usize) -> Result<Self, NetcodeError> {
        if m < 2 {
            return Err(NetcodeError::OrderTooSmall(m));
        }
        if !m.is_power_of_two() {
            return Err(NetcodeError::NotPowerOfTwo(m));
        }
        let cells = (0..m * m).map(|i| (i / m) ^ (i % m)).collect();
        Ok(Self { order: m, cells })
    }

    /// Validates an arbitrary grid as a Latin square.
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self, NetcodeError> {
        let order = rows.len();
        if order < 2 {
            return Err(NetcodeError::OrderTooSmall(order));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != order {
                return Err(NetcodeError::Ragged {
                    row: r,
                    len: row.len(),
                    order,
                });
            }
            if let Some((c, &value)) = row.iter().enumerate().find(|(_, &v)| v >= order) {
                return Err(NetcodeError::SymbolOutOfRange {
                    row: r,
                    col: c,
                    value,
                    order,
                });
            }
        }
        if !check_exclusive_law(rows) {
            return Err(NetcodeError::NotLatin);
        }
        Ok(Self {
            order,
            cells: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn cell(&self, a: usize, b: usize) -> usize {
        self.cells[a * self.order + b]
    }

    pub fn get(&self, a: usize, b: usize) -> Result<usize, NetcodeError> {
        if a >= self.order || b >= self.order {
            return Err(NetcodeError::IndexOutOfRange {
                a,
                b,
                order: self.order,
            });
        }
        Ok(self.cell(a, b))
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.cells.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    /// The map with its two arguments swapped.
    pub fn transpose(&self) -> Self {
        let m = self.order;
        let cells = (0..m * m).map(|i| self.cell(i % m, i / m)).collect();
        Self { order: m, cells }
    }

    /// Plain-text grid, one row per line, cells separated by single spaces.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse_text(text: &str) -> Result<Self, NetcodeError> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.split_whitespace()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|e| NetcodeError::Parse(format!("'{t}': {e}")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(&rows)
    }
}

impl fmt::Display for LatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.order) {
            let line: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for LatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LatinSquare(order {})\n{}", self.order, self)
    }
}

/// True iff every row and every column of the grid holds distinct entries.
///
/// Non-square grids and entries outside `0..M` fail the check.
pub fn check_exclusive_law(map: &[Vec<usize>]) -> bool {
    let m = map.len();
    if m == 0 || map.iter().any(|row| row.len() != m) {
        return false;
    }
    let words = m.div_ceil(64);
    let mut seen = vec![0u64; words];
    let mark = |seen: &mut [u64], v: usize| -> bool {
        if v >= m {
            return false;
        }
        let (w, bit) = (v / 64, 1u64 << (v % 64));
        let fresh = seen[w] & bit == 0;
        seen[w] |= bit;
        fresh
    };
    for row in map {
        seen.iter_mut().for_each(|w| *w = 0);
        if !row.iter().all(|&v| mark(&mut seen, v)) {
            return false;
        }
    }
    for col in 0..m {
        seen.iter_mut().for_each(|w| *w = 0);
        if !map.iter().all(|row| mark(&mut seen, row[col])) {
            return false;
        }
    }
    true
}

/// Constellation point sent by the relay for the index pair `(a, b)`.
pub fn apply_map(
    f: &LatinSquare,
    s: &SignalSet,
    a: usize,
    b: usize,
) -> Result<Complex, NetcodeError> {
    if f.order() != s.m() {
        return Err(NetcodeError::OrderMismatch {
            map: f.order(),
            signal: s.m(),
        });
    }
    let idx = f.get(a, b)?;
    Ok(s.points()[idx])
}
