//! Secure message layouts against an `(l1, l2)` eavesdropper.
//!
//! With `l = l1 + l2 < k`, the first `k·l` source symbols are uniform random
//! keys `r` and the remaining `k(k - l)` carry the secure payload `f^s`.
//! Both are laid into `A1` column by column, so columns `1..=l` hold `r`.
//!
//! A Type 1 node `j` stores `A1 · g1_j`; given the payload, its random part
//! is `R · B_j` where `R` is the `k x l` block of keys and `B_j` the first
//! `l` entries of `g1_j`. For a set `E` of Type 1 nodes the keys mask the
//! observation completely when the `l x |E|` block of `G1` (rows `1..=l`,
//! columns `E`) has full column rank. A Vandermonde generator satisfies this
//! for every `E` with `|E| <= l`.
//!
//! Type 2 nodes store `A1ᵀ · g2_j`, whose entry `t` only involves column `t`
//! of `A1`. Entries past `l` are therefore pure payload combinations, and no
//! nonempty set of Type 2 nodes is protected by this layout.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::mds::GeneratorStyle;
use crate::twin::{MessageMatrix, NodeId, NodeType, TwinConfig};

/// `k(k - l1 - l2)`: the payload a secure layout carries.
pub fn secure_capacity_twin(k: usize, l1: usize, l2: usize) -> Result<usize> {
    let l = l1 + l2;
    if l >= k {
        return Err(Error::BudgetExceeded { l, k });
    }
    Ok(k * (k - l))
}

/// Draws `count` i.i.d. uniform residues from a ChaCha8 stream seeded with
/// `seed`.
pub fn random_symbols(field: PrimeField, count: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0..field.modulus())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecureLayout {
    k: usize,
    l1: usize,
    l2: usize,
    seed: Option<u64>,
    random_symbols: Vec<u32>,
    payload: Vec<u32>,
    matrix: MessageMatrix,
}

impl SecureLayout {
    /// Pads `payload` with `k(l1 + l2)` seeded random symbols.
    pub fn new(field: PrimeField, payload: &[u32], k: usize, l1: usize, l2: usize, seed: u64) -> Result<Self> {
        let keys = random_symbols(field, k * (l1 + l2), seed);
        let mut layout = Self::from_parts(field, &keys, payload, k, l1, l2)?;
        layout.seed = Some(seed);
        Ok(layout)
    }

    /// Builds a layout from explicit key and payload symbols.
    pub fn from_parts(
        field: PrimeField,
        keys: &[u32],
        payload: &[u32],
        k: usize,
        l1: usize,
        l2: usize,
    ) -> Result<Self> {
        let expected = secure_capacity_twin(k, l1, l2)?;
        if payload.len() != expected {
            return Err(Error::BadPayloadLength {
                expected,
                got: payload.len(),
            });
        }
        if keys.len() != k * (l1 + l2) {
            return Err(Error::BadPayloadLength {
                expected: k * (l1 + l2),
                got: keys.len(),
            });
        }
        let keys: Vec<u32> = keys.iter().map(|&v| v % field.modulus()).collect();
        let payload: Vec<u32> = payload.iter().map(|&v| v % field.modulus()).collect();
        let source: Vec<u32> = keys.iter().chain(&payload).copied().collect();
        let matrix = MessageMatrix::from_payload(field, &source, k)?;
        Ok(SecureLayout {
            k,
            l1,
            l2,
            seed: None,
            random_symbols: keys,
            payload,
            matrix,
        })
    }

    /// A layout without keys: `l1 = l2 = 0`, the whole matrix is payload.
    pub fn plain(field: PrimeField, payload: &[u32], k: usize) -> Result<Self> {
        Self::from_parts(field, &[], payload, k, 0, 0)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l1(&self) -> usize {
        self.l1
    }

    pub fn l2(&self) -> usize {
        self.l2
    }

    /// `l1 + l2`, the number of key columns.
    pub fn key_columns(&self) -> usize {
        self.l1 + self.l2
    }

    /// Number of key coordinates, `k(l1 + l2)`.
    pub fn key_len(&self) -> usize {
        self.k * self.key_columns()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn random_symbols(&self) -> &[u32] {
        &self.random_symbols
    }

    pub fn payload(&self) -> &[u32] {
        &self.payload
    }

    pub fn matrix(&self) -> &MessageMatrix {
        &self.matrix
    }

    /// The source vector `f = (r, f^s)`.
    pub fn source(&self) -> Vec<u32> {
        self.random_symbols.iter().chain(&self.payload).copied().collect()
    }

    /// Label of source coordinate `c` (0-based): `r{c+1}` for keys,
    /// `a{c+1}` for payload.
    pub fn label(&self, c: usize) -> String {
        if c < self.key_len() {
            format!("r{}", c + 1)
        } else {
            format!("a{}", c + 1)
        }
    }

    /// Strips the key columns from a reconstructed matrix.
    pub fn extract_payload(&self, recovered: &MessageMatrix) -> Vec<u32> {
        recovered.column_major()[self.key_len()..].to_vec()
    }

    pub fn to_document(&self) -> LayoutDocument {
        LayoutDocument {
            p: self.matrix.a1().field().modulus() as u64,
            k: self.k,
            l1: self.l1,
            l2: self.l2,
            seed: self.seed,
            random_symbols: self.random_symbols.clone(),
            payload: self.payload.clone(),
        }
    }
}

/// JSON form of a layout. When `seed` is present the keys must match the
/// seeded stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub p: u64,
    pub k: usize,
    pub l1: usize,
    pub l2: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub random_symbols: Vec<u32>,
    pub payload: Vec<u32>,
}

impl LayoutDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn into_layout(self) -> Result<SecureLayout> {
        let field = PrimeField::new(self.p)?;
        match self.seed {
            Some(seed) => {
                let layout = SecureLayout::new(field, &self.payload, self.k, self.l1, self.l2, seed)?;
                if layout.random_symbols != self.random_symbols {
                    return Err(Error::BadParams("random symbols do not match the recorded seed".into()));
                }
                Ok(layout)
            }
            None => SecureLayout::from_parts(field, &self.random_symbols, &self.payload, self.k, self.l1, self.l2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuaranteeReason {
    /// Empty set, or Type 1 nodes under a Vandermonde generator where every
    /// leading-rows submatrix is nonsingular by construction.
    AllSameTypeWithinBudget,
    /// Type 1 nodes whose leading-rows generator block was checked to have
    /// full column rank.
    SubmatrixFullRank,
    NotGuaranteed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecrecyGuarantee {
    pub guaranteed: bool,
    pub reason: GuaranteeReason,
}

impl SecrecyGuarantee {
    fn yes(reason: GuaranteeReason) -> Self {
        SecrecyGuarantee {
            guaranteed: true,
            reason,
        }
    }

    fn no() -> Self {
        SecrecyGuarantee {
            guaranteed: false,
            reason: GuaranteeReason::NotGuaranteed,
        }
    }
}

/// Sufficient condition for zero leakage to the nodes `e1` (stored data)
/// and `e2` (repair downloads).
///
/// A repair download of node `x` spans the same space as `x`'s stored
/// content, so both sets are treated as one set of exposed nodes.
pub fn guaranteed_secure_set(
    config: &TwinConfig,
    layout: &SecureLayout,
    e1: &[NodeId],
    e2: &[NodeId],
) -> SecrecyGuarantee {
    let exposed: Vec<NodeId> = e1.iter().chain(e2).copied().unique().collect();
    if exposed.is_empty() {
        return SecrecyGuarantee::yes(GuaranteeReason::AllSameTypeWithinBudget);
    }
    let l = layout.key_columns();
    if layout.k() != config.k() || e1.len() + e2.len() > l || exposed.iter().any(|id| config.check_node(*id).is_err())
    {
        return SecrecyGuarantee::no();
    }
    if exposed.iter().any(|id| id.node_type != NodeType::One) {
        return SecrecyGuarantee::no();
    }
    let code = config.code(NodeType::One);
    let rows: Vec<usize> = (0..l).collect();
    let cols: Vec<usize> = exposed.iter().map(|id| id.index - 1).collect();
    let block = code.generator().select_rows(&rows).select_columns(&cols);
    if block.rank() < cols.len() {
        return SecrecyGuarantee::no();
    }
    match code.style() {
        GeneratorStyle::Vandermonde => SecrecyGuarantee::yes(GuaranteeReason::AllSameTypeWithinBudget),
        _ => SecrecyGuarantee::yes(GuaranteeReason::SubmatrixFullRank),
    }
}
