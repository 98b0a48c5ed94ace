//! `(n, k)` MDS codes over a prime field.
//!
//! A code is held as its `k x n` generator matrix. Codeword positions are
//! 1-based on the public surface and 0-based inside the module.
//!
//! Three constructions are available:
//!
//! * [`MdsCode::vandermonde`]: generalized Reed-Solomon, `G[i][j] = x_j^i`.
//!   Any `l x l` submatrix formed by the first `l` rows and any `l` columns
//!   is again Vandermonde on distinct points, hence nonsingular.
//! * [`MdsCode::systematic`]: the reduced row echelon form of the above, so
//!   the first `k` columns are the identity.
//! * [`MdsCode::from_generator`]: an explicit matrix, accepted only after the
//!   exhaustive all-minors check.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::FieldMatrix;

/// Largest `n` for which the all-minors MDS check is run.
pub const MDS_CHECK_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorStyle {
    Vandermonde,
    Systematic,
    Explicit,
}

impl std::str::FromStr for GeneratorStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vandermonde" => Ok(GeneratorStyle::Vandermonde),
            "systematic" => Ok(GeneratorStyle::Systematic),
            "explicit" => Ok(GeneratorStyle::Explicit),
            other => Err(Error::BadParams(format!("unknown generator style {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsCode {
    n: usize,
    k: usize,
    generator: FieldMatrix,
    style: GeneratorStyle,
    eval_points: Option<Vec<u32>>,
}

impl MdsCode {
    /// Generalized Reed-Solomon code on `points` (default `0, 1, ..., n-1`).
    pub fn vandermonde(n: usize, k: usize, field: PrimeField, points: Option<&[u32]>) -> Result<Self> {
        let points = eval_points(n, k, field, points)?;
        let mut g = FieldMatrix::zeros(field, k, n);
        for (j, &x) in points.iter().enumerate() {
            for i in 0..k {
                g.set(i, j, field.pow(x, i as u64));
            }
        }
        Ok(MdsCode {
            n,
            k,
            generator: g,
            style: GeneratorStyle::Vandermonde,
            eval_points: Some(points),
        })
    }

    /// Systematic form of the Vandermonde code on the same points.
    pub fn systematic(n: usize, k: usize, field: PrimeField, points: Option<&[u32]>) -> Result<Self> {
        let v = Self::vandermonde(n, k, field, points)?;
        let (g, pivots) = v.generator.rref();
        debug_assert_eq!(pivots, (0..k).collect::<Vec<_>>());
        Ok(MdsCode {
            generator: g,
            style: GeneratorStyle::Systematic,
            ..v
        })
    }

    /// Accepts an explicit `k x n` generator after checking every `k x k`
    /// minor.
    pub fn from_generator(generator: FieldMatrix) -> Result<Self> {
        let (k, n) = (generator.rows(), generator.cols());
        if k == 0 || k > n {
            return Err(Error::InvalidCode(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        if n > MDS_CHECK_LIMIT {
            return Err(Error::MdsCheckTooLarge {
                n,
                limit: MDS_CHECK_LIMIT,
            });
        }
        if let Some(columns) = find_singular_minor(&generator) {
            return Err(Error::NotMds { columns });
        }
        Self::from_generator_unchecked(generator)
    }

    /// Wraps `generator` without the minors check. Decoding from a
    /// singular column set then fails with [`Error::SingularSubmatrix`].
    pub fn from_generator_unchecked(generator: FieldMatrix) -> Result<Self> {
        let (k, n) = (generator.rows(), generator.cols());
        if k == 0 || k > n {
            return Err(Error::InvalidCode(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        Ok(MdsCode {
            n,
            k,
            generator,
            style: GeneratorStyle::Explicit,
            eval_points: None,
        })
    }

    /// Builds a code in the requested style on the default points.
    /// `Explicit` needs a matrix and is rejected here.
    pub fn with_style(style: GeneratorStyle, n: usize, k: usize, field: PrimeField) -> Result<Self> {
        match style {
            GeneratorStyle::Vandermonde => Self::vandermonde(n, k, field, None),
            GeneratorStyle::Systematic => Self::systematic(n, k, field, None),
            GeneratorStyle::Explicit => Err(Error::BadParams("explicit style needs a generator matrix".into())),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> PrimeField {
        self.generator.field()
    }

    pub fn generator(&self) -> &FieldMatrix {
        &self.generator
    }

    pub fn style(&self) -> GeneratorStyle {
        self.style
    }

    pub fn eval_points(&self) -> Option<&[u32]> {
        self.eval_points.as_deref()
    }

    /// Column `position` (1-based) of the generator.
    pub fn column(&self, position: usize) -> Vec<u32> {
        assert!((1..=self.n).contains(&position), "position {position} outside 1..={}", self.n);
        self.generator.column(position - 1)
    }

    /// `message · G`.
    pub fn encode_row(&self, message: &[u32]) -> Result<Vec<u32>> {
        if message.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "message of length {} for k = {}",
                message.len(),
                self.k
            )));
        }
        self.generator.vec_mul(message)
    }

    /// Recovers the message from the symbols at `k` distinct 1-based
    /// positions.
    pub fn erasure_decode(&self, positions: &[usize], symbols: &[u32]) -> Result<Vec<u32>> {
        if positions.len() != self.k || symbols.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "need exactly k = {} positions and symbols, got {} and {}",
                self.k,
                positions.len(),
                symbols.len()
            )));
        }
        if positions.iter().any(|&p| p == 0 || p > self.n) || !positions.iter().all_unique() {
            return Err(Error::DimensionMismatch(format!(
                "positions {positions:?} must be distinct and within 1..={}",
                self.n
            )));
        }
        let cols: Vec<usize> = positions.iter().map(|p| p - 1).collect();
        // m · G_S = s  <=>  G_S^T · m^T = s^T
        let sub = self.generator.select_columns(&cols).transpose();
        sub.solve_square(symbols).map_err(|e| match e {
            Error::SingularMatrix => Error::SingularSubmatrix(positions.to_vec()),
            other => other,
        })
    }

    /// Whether every `k x k` minor is nonsingular (exhaustive).
    pub fn verify_mds(&self) -> bool {
        find_singular_minor(&self.generator).is_none()
    }

    pub fn to_document(&self) -> GeneratorDocument {
        GeneratorDocument {
            p: self.field().modulus() as u64,
            n: self.n,
            k: self.k,
            generator: self
                .generator
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(u64::from).collect())
                .collect(),
        }
    }
}

fn eval_points(n: usize, k: usize, field: PrimeField, points: Option<&[u32]>) -> Result<Vec<u32>> {
    if k == 0 || k > n {
        return Err(Error::InvalidCode(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if n as u64 > field.modulus() as u64 {
        return Err(Error::TooFewPoints { n, p: field.modulus() });
    }
    let pts: Vec<u32> = match points {
        Some(p) => {
            if p.len() != n {
                return Err(Error::DimensionMismatch(format!("{} points for n = {n}", p.len())));
            }
            p.iter().map(|&x| x % field.modulus()).collect()
        }
        None => (0..n as u32).collect(),
    };
    if !pts.iter().all_unique() {
        return Err(Error::DuplicatePoints);
    }
    Ok(pts)
}

/// Returns the 1-based columns of the first singular `k x k` minor, if any.
pub fn find_singular_minor(generator: &FieldMatrix) -> Option<Vec<usize>> {
    let k = generator.rows();
    (0..generator.cols())
        .combinations(k)
        .find(|cols| generator.select_columns(cols).rank() < k)
        .map(|cols| cols.into_iter().map(|c| c + 1).collect())
}

/// JSON form of an explicit generator: `{"p", "n", "k", "generator"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDocument {
    pub p: u64,
    pub n: usize,
    pub k: usize,
    pub generator: Vec<Vec<u64>>,
}

impl GeneratorDocument {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("generator document serializes")
    }

    /// Validates shape, then runs [`MdsCode::from_generator`].
    pub fn into_code(self) -> Result<MdsCode> {
        let field = PrimeField::new(self.p)?;
        if self.generator.len() != self.k || self.generator.iter().any(|r| r.len() != self.n) {
            return Err(Error::DimensionMismatch(format!(
                "generator must be {} rows of {} entries",
                self.k, self.n
            )));
        }
        MdsCode::from_generator(FieldMatrix::from_rows(field, &self.generator)?)
    }
}
