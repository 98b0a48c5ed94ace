//! Dense matrices over a prime field.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::PrimeField;

/// Row-major matrix of residues in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl FieldMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1 % field.modulus();
        }
        m
    }

    /// Builds a matrix from row-major entries, reducing each into the field.
    pub fn from_entries(field: PrimeField, rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(FieldMatrix {
            field,
            rows,
            cols,
            entries: entries.into_iter().map(|v| field.reduce(v)).collect(),
        })
    }

    /// Builds a matrix from a list of rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[u64]>>(field: PrimeField, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            entries.extend(r.iter().map(|&v| field.reduce(v)));
        }
        Ok(FieldMatrix {
            field,
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub(crate) fn from_raw(field: PrimeField, rows: usize, cols: usize, entries: Vec<u32>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        debug_assert!(entries.iter().all(|&v| v < field.modulus()));
        FieldMatrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.entries[r * self.cols + c] = v % self.field.modulus();
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.entries[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        self.field.check_same(&other.field)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.field.modulus() as u64;
        let mut out = vec![0u32; self.rows * other.cols];
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for t in 0..self.cols {
                    acc = (acc + self.get(i, t) as u64 * other.get(t, j) as u64) % p;
                }
                out[i * other.cols + j] = acc as u32;
            }
        }
        Ok(FieldMatrix::from_raw(self.field, self.rows, other.cols, out))
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), v)).collect())
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let p = self.field.modulus() as u64;
        Ok((0..self.cols)
            .map(|c| {
                (0..self.rows).fold(0u64, |acc, r| (acc + v[r] as u64 * self.get(r, c) as u64) % p) as u32
            })
            .collect())
    }

    pub fn select_columns(&self, cols: &[usize]) -> FieldMatrix {
        let mut out = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            out.extend(cols.iter().map(|&c| self.get(r, c)));
        }
        FieldMatrix::from_raw(self.field, self.rows, cols.len(), out)
    }

    pub fn select_rows(&self, rows: &[usize]) -> FieldMatrix {
        let mut out = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            out.extend_from_slice(self.row(r));
        }
        FieldMatrix::from_raw(self.field, rows.len(), self.cols, out)
    }

    /// Appends a row; its length must equal `cols` (any length is accepted
    /// for an empty 0x0 matrix, which then takes the row's width).
    pub fn push_row(&mut self, row: &[u32]) -> Result<()> {
        if self.rows == 0 && self.cols == 0 {
            self.cols = row.len();
        }
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} appended to {} columns",
                row.len(),
                self.cols
            )));
        }
        self.entries.extend(row.iter().map(|&v| v % self.field.modulus()));
        self.rows += 1;
        Ok(())
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        self.field.check_same(&other.field)?;
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns on {}",
                other.cols, self.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(FieldMatrix::from_raw(self.field, self.rows + other.rows, self.cols, entries))
    }

    /// Reduced row echelon form together with the pivot columns.
    ///
    /// Pivots are the first nonzero entry found scanning down each column,
    /// so the result is fully deterministic.
    pub fn rref(&self) -> (FieldMatrix, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..m.cols {
            if lead == m.rows {
                break;
            }
            let Some(pr) = (lead..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            m.swap_rows(pr, lead);
            let inv = f.inv(m.get(lead, c)).expect("pivot is nonzero");
            for j in 0..m.cols {
                let v = m.get(lead, j);
                m.entries[lead * m.cols + j] = f.mul(v, inv);
            }
            for r in 0..m.rows {
                if r == lead {
                    continue;
                }
                let factor = m.get(r, c);
                if factor == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let v = f.sub(m.get(r, j), f.mul(factor, m.get(lead, j)));
                    m.entries[r * m.cols + j] = v;
                }
            }
            pivots.push(c);
            lead += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn require_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    /// Solves `self · x = y` for a square nonsingular `self`.
    pub fn solve_square(&self, y: &[u32]) -> Result<Vec<u32>> {
        self.require_square()?;
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                y.len(),
                self.rows
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut aug = Vec::with_capacity(n * (n + 1));
        for r in 0..n {
            aug.extend_from_slice(self.row(r));
            aug.push(y[r] % self.field.modulus());
        }
        let (red, pivots) = FieldMatrix::from_raw(self.field, n, n + 1, aug).rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::SingularMatrix);
        }
        Ok((0..n).map(|r| red.get(r, n)).collect())
    }

    pub fn inverse(&self) -> Result<FieldMatrix> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(self.clone());
        }
        let mut aug = Vec::with_capacity(2 * n * n);
        let one = 1 % self.field.modulus();
        for r in 0..n {
            aug.extend_from_slice(self.row(r));
            aug.extend((0..n).map(|c| if c == r { one } else { 0 }));
        }
        let (red, pivots) = FieldMatrix::from_raw(self.field, n, 2 * n, aug).rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::SingularMatrix);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Ok(red.select_columns(&cols))
    }

    /// Whether `v` lies in the row space of `self`.
    pub fn in_row_space(&self, v: &[u32]) -> Result<bool> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut stacked = self.clone();
        stacked.push_row(v)?;
        Ok(stacked.rank() == self.rank())
    }
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(u32::to_string).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}
