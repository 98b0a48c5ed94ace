//! The twin-code storage framework.
//!
//! A `k x k` message matrix `A1` is stored on two families of nodes. Type 1
//! node `j` keeps `A1 · g1_j` and Type 2 node `j` keeps `A1ᵀ · g2_j`, where
//! `gi_j` is column `j` of the generator of code `Ci`.
//!
//! * **Reconstruction** reads any `k` nodes of one type (`k²` symbols) and
//!   erasure-decodes every row of `A_i` under `C_i`.
//! * **Repair** of a node of one type contacts `k` nodes of the other type.
//!   Each helper returns one symbol, the inner product of the failed node's
//!   encoding vector with its own content. The `k` symbols are a codeword
//!   fragment of the helpers' code whose message is exactly the lost
//!   content.
//! * **Deployment** seeds `k` nodes of each type and fills the rest by
//!   repair.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::FieldMatrix;
use crate::mds::{GeneratorStyle, MdsCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum NodeType {
    One,
    Two,
}

impl NodeType {
    pub const BOTH: [NodeType; 2] = [NodeType::One, NodeType::Two];

    pub fn opposite(self) -> NodeType {
        match self {
            NodeType::One => NodeType::Two,
            NodeType::Two => NodeType::One,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            NodeType::One => 1,
            NodeType::Two => 2,
        }
    }

    fn slot(self) -> usize {
        self.number() as usize - 1
    }
}

impl TryFrom<u8> for NodeType {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(NodeType::One),
            2 => Ok(NodeType::Two),
            other => Err(format!("node type must be 1 or 2, got {other}")),
        }
    }
}

impl From<NodeType> for u8 {
    fn from(t: NodeType) -> u8 {
        t.number()
    }
}

/// A node address: type plus 1-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    #[serde(rename = "type")]
    pub node_type: NodeType,
    pub index: usize,
}

impl NodeId {
    pub fn new(node_type: NodeType, index: usize) -> Self {
        NodeId { node_type, index }
    }

    pub fn one(index: usize) -> Self {
        Self::new(NodeType::One, index)
    }

    pub fn two(index: usize) -> Self {
        Self::new(NodeType::Two, index)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}:{}", self.node_type.number(), self.index)
    }
}

/// Parses `T1:3` (or `1:3`).
impl std::str::FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadParams(format!("node {s:?} is not of the form T<type>:<index>"));
        let (t, i) = s.trim().trim_start_matches(['T', 't']).split_once(':').ok_or_else(bad)?;
        let node_type = match t {
            "1" => NodeType::One,
            "2" => NodeType::Two,
            _ => return Err(bad()),
        };
        Ok(NodeId::new(node_type, i.parse().map_err(|_| bad())?))
    }
}

/// Field, dimension and the two constituent codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinConfig {
    code1: MdsCode,
    code2: MdsCode,
}

impl TwinConfig {
    pub fn new(code1: MdsCode, code2: MdsCode) -> Result<Self> {
        code1.field().check_same(&code2.field())?;
        if code1.k() != code2.k() {
            return Err(Error::InvalidCode(format!(
                "both codes need the same dimension, got {} and {}",
                code1.k(),
                code2.k()
            )));
        }
        Ok(TwinConfig { code1, code2 })
    }

    /// Both codes built in `style` on the default evaluation points.
    pub fn with_style(style: GeneratorStyle, q: u64, n1: usize, n2: usize, k: usize) -> Result<Self> {
        let field = PrimeField::new(q)?;
        Self::new(
            MdsCode::with_style(style, n1, k, field)?,
            MdsCode::with_style(style, n2, k, field)?,
        )
    }

    pub fn field(&self) -> PrimeField {
        self.code1.field()
    }

    pub fn k(&self) -> usize {
        self.code1.k()
    }

    pub fn n(&self, t: NodeType) -> usize {
        self.code(t).n()
    }

    pub fn total_nodes(&self) -> usize {
        self.code1.n() + self.code2.n()
    }

    pub fn code(&self, t: NodeType) -> &MdsCode {
        match t {
            NodeType::One => &self.code1,
            NodeType::Two => &self.code2,
        }
    }

    /// False when either type has fewer than `2k - 1` nodes. Advisory only.
    pub fn meets_recommended_connectivity(&self) -> bool {
        let want = 2 * self.k() - 1;
        self.code1.n() >= want && self.code2.n() >= want
    }

    pub fn check_node(&self, id: NodeId) -> Result<()> {
        if id.index == 0 || id.index > self.n(id.node_type) {
            return Err(Error::NodeOutOfRange(id));
        }
        Ok(())
    }

    pub fn nodes(&self, t: NodeType) -> impl Iterator<Item = NodeId> {
        (1..=self.n(t)).map(move |i| NodeId::new(t, i))
    }

    pub fn all_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes(NodeType::One).chain(self.nodes(NodeType::Two))
    }

    pub fn encoding_vector(&self, id: NodeId) -> Result<EncodingVector> {
        self.check_node(id)?;
        Ok(EncodingVector {
            node: id,
            field: self.field(),
            coefficients: self.code(id.node_type).column(id.index),
        })
    }
}

/// The `k x k` message matrix `A1`. `A2` is its transpose and is never
/// stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageMatrix {
    a1: FieldMatrix,
    pad: usize,
}

impl MessageMatrix {
    /// Fills `A1` column by column from `payload`, zero-padding to `k²`.
    pub fn from_payload(field: PrimeField, payload: &[u32], k: usize) -> Result<Self> {
        let max = k * k;
        if payload.len() > max {
            return Err(Error::PayloadTooLarge {
                len: payload.len(),
                max,
            });
        }
        let mut a1 = FieldMatrix::zeros(field, k, k);
        for (i, &v) in payload.iter().enumerate() {
            a1.set(i % k, i / k, v);
        }
        Ok(MessageMatrix {
            a1,
            pad: max - payload.len(),
        })
    }

    pub fn from_matrix(a1: FieldMatrix) -> Result<Self> {
        if a1.rows() != a1.cols() {
            return Err(Error::DimensionMismatch(format!(
                "message matrix must be square, got {}x{}",
                a1.rows(),
                a1.cols()
            )));
        }
        Ok(MessageMatrix { a1, pad: 0 })
    }

    pub fn k(&self) -> usize {
        self.a1.rows()
    }

    pub fn a1(&self) -> &FieldMatrix {
        &self.a1
    }

    pub fn a2(&self) -> FieldMatrix {
        self.a1.transpose()
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    /// All `k²` entries in column-major order.
    pub fn column_major(&self) -> Vec<u32> {
        self.a1.transpose().entries().to_vec()
    }

    /// The payload, i.e. the column-major entries without the trailing pad.
    pub fn payload(&self) -> Vec<u32> {
        let mut v = self.column_major();
        v.truncate(v.len() - self.pad);
        v
    }

    fn for_type(&self, t: NodeType) -> FieldMatrix {
        match t {
            NodeType::One => self.a1.clone(),
            NodeType::Two => self.a2(),
        }
    }
}

/// Column of a node's generator: the node's encoding vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingVector {
    pub node: NodeId,
    pub field: PrimeField,
    pub coefficients: Vec<u32>,
}

/// What a node currently holds; `None` once erased.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeContent {
    pub node: NodeId,
    pub symbols: Option<Vec<u32>>,
}

/// The `k` symbols that regenerated a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairOutcome {
    pub content: NodeContent,
    pub helpers: Vec<NodeId>,
    pub shares: Vec<u32>,
}

impl RepairOutcome {
    pub fn symbols_transferred(&self) -> usize {
        self.shares.len()
    }
}

/// One helper's contribution to a repair: `targetᵀ · helper_content`.
pub fn helper_share(helper: &NodeContent, target: &EncodingVector) -> Result<u32> {
    if helper.node.node_type == target.node.node_type {
        return Err(Error::SameTypeHelper(helper.node));
    }
    let symbols = helper.symbols.as_ref().ok_or(Error::EmptyHelper(helper.node))?;
    if symbols.len() != target.coefficients.len() {
        return Err(Error::DimensionMismatch(format!(
            "helper holds {} symbols, encoding vector has {}",
            symbols.len(),
            target.coefficients.len()
        )));
    }
    Ok(target.field.dot(symbols, &target.coefficients))
}

/// Stored contents and liveness of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinSystem {
    config: TwinConfig,
    nodes: [Vec<NodeContent>; 2],
    live: [Vec<bool>; 2],
}

/// Encodes `msg` onto every node of both types.
pub fn encode_system(config: &TwinConfig, msg: &MessageMatrix) -> Result<TwinSystem> {
    if msg.k() != config.k() {
        return Err(Error::DimensionMismatch(format!(
            "message matrix is {0}x{0}, config has k = {1}",
            msg.k(),
            config.k()
        )));
    }
    config.field().check_same(&msg.a1.field())?;
    let mut system = TwinSystem::empty(config.clone());
    for t in NodeType::BOTH {
        let stored = msg.for_type(t).mul(config.code(t).generator())?;
        for j in 0..config.n(t) {
            system.nodes[t.slot()][j].symbols = Some(stored.column(j));
            system.live[t.slot()][j] = true;
        }
    }
    Ok(system)
}

/// Seeds `k` nodes of each type with their encoded content, then fills all
/// remaining nodes by repair, alternating types in ascending index order.
pub fn deploy(
    config: &TwinConfig,
    msg: &MessageMatrix,
    seeds1: &[usize],
    seeds2: &[usize],
) -> Result<TwinSystem> {
    let k = config.k();
    for (t, seeds) in [(NodeType::One, seeds1), (NodeType::Two, seeds2)] {
        if seeds.len() != k || !seeds.iter().all_unique() {
            return Err(Error::InsufficientSeeds { k });
        }
        for &s in seeds {
            config.check_node(NodeId::new(t, s))?;
        }
    }
    let full = encode_system(config, msg)?;
    let mut system = TwinSystem::empty(config.clone());
    for (t, seeds) in [(NodeType::One, seeds1), (NodeType::Two, seeds2)] {
        for &s in seeds {
            let id = NodeId::new(t, s);
            system.store(id, full.node(id)?.symbols.clone())?;
        }
    }
    let empties = |t: NodeType| -> Vec<NodeId> {
        config
            .nodes(t)
            .filter(|id| !system.is_live(*id).unwrap_or(false))
            .collect()
    };
    let (e1, e2) = (empties(NodeType::One), empties(NodeType::Two));
    for id in e1.into_iter().interleave(e2) {
        let helpers = system
            .lowest_live(id.node_type.opposite(), k)
            .ok_or(Error::NotEnoughLiveNodes {
                needed: k,
                got: system.live_nodes(id.node_type.opposite()).len(),
            })?;
        system.repair(id, &helpers)?;
    }
    Ok(system)
}

impl TwinSystem {
    /// Every node empty and down.
    pub fn empty(config: TwinConfig) -> Self {
        let nodes = NodeType::BOTH.map(|t| {
            config
                .nodes(t)
                .map(|node| NodeContent { node, symbols: None })
                .collect::<Vec<_>>()
        });
        let live = NodeType::BOTH.map(|t| vec![false; config.n(t)]);
        TwinSystem { config, nodes, live }
    }

    pub fn config(&self) -> &TwinConfig {
        &self.config
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeContent> {
        self.config.check_node(id)?;
        Ok(&self.nodes[id.node_type.slot()][id.index - 1])
    }

    pub fn is_live(&self, id: NodeId) -> Result<bool> {
        self.config.check_node(id)?;
        Ok(self.live[id.node_type.slot()][id.index - 1])
    }

    /// 1-based indices of live nodes of type `t`, ascending.
    pub fn live_nodes(&self, t: NodeType) -> Vec<usize> {
        self.live[t.slot()]
            .iter()
            .enumerate()
            .filter(|(_, &l)| l)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// The `count` lowest-index live nodes of type `t`, if there are enough.
    pub fn lowest_live(&self, t: NodeType, count: usize) -> Option<Vec<usize>> {
        let live = self.live_nodes(t);
        (live.len() >= count).then(|| live[..count].to_vec())
    }

    /// Crash-stop failure: content erased, node marked down.
    pub fn fail(&mut self, id: NodeId) -> Result<()> {
        self.config.check_node(id)?;
        let slot = id.node_type.slot();
        self.nodes[slot][id.index - 1].symbols = None;
        self.live[slot][id.index - 1] = false;
        Ok(())
    }

    fn store(&mut self, id: NodeId, symbols: Option<Vec<u32>>) -> Result<()> {
        self.config.check_node(id)?;
        let slot = id.node_type.slot();
        self.live[slot][id.index - 1] = symbols.is_some();
        self.nodes[slot][id.index - 1].symbols = symbols;
        Ok(())
    }

    /// Recovers `A1` from `k` live nodes of type `t`.
    pub fn reconstruct(&self, t: NodeType, indices: &[usize]) -> Result<MessageMatrix> {
        let ids: Vec<NodeId> = indices.iter().map(|&i| NodeId::new(t, i)).collect();
        self.reconstruct_from(&ids)
    }

    /// As [`reconstruct`](Self::reconstruct), for an arbitrary node list that
    /// must turn out to be of a single type.
    pub fn reconstruct_from(&self, ids: &[NodeId]) -> Result<MessageMatrix> {
        let k = self.config.k();
        let Some(first) = ids.first() else {
            return Err(Error::NotEnoughLiveNodes { needed: k, got: 0 });
        };
        let t = first.node_type;
        if ids.iter().any(|id| id.node_type != t) {
            return Err(Error::MixedTypes);
        }
        let distinct = ids.iter().unique().count();
        if ids.len() != k || distinct != k {
            return Err(Error::NotEnoughLiveNodes { needed: k, got: distinct });
        }
        let mut columns = Vec::with_capacity(k);
        for &id in ids {
            if !self.is_live(id)? {
                return Err(Error::DeadNode(id));
            }
            columns.push(self.node(id)?.symbols.clone().ok_or(Error::DeadNode(id))?);
        }
        let code = self.config.code(t);
        let positions: Vec<usize> = ids.iter().map(|id| id.index).collect();
        // Row r of A_t times G_t restricted to `positions` gives row r of the
        // downloaded columns.
        let mut a = FieldMatrix::zeros(self.config.field(), k, k);
        for r in 0..k {
            let observed: Vec<u32> = columns.iter().map(|c| c[r]).collect();
            let row = code.erasure_decode(&positions, &observed)?;
            for (c, v) in row.into_iter().enumerate() {
                a.set(r, c, v);
            }
        }
        let a1 = match t {
            NodeType::One => a,
            NodeType::Two => a.transpose(),
        };
        MessageMatrix::from_matrix(a1)
    }

    /// Regenerates `failed` from the opposite-type nodes `helper_indices`
    /// and marks it live.
    pub fn repair(&mut self, failed: NodeId, helper_indices: &[usize]) -> Result<RepairOutcome> {
        let opp = failed.node_type.opposite();
        let helpers: Vec<NodeId> = helper_indices.iter().map(|&i| NodeId::new(opp, i)).collect();
        self.repair_with(failed, &helpers)
    }

    /// As [`repair`](Self::repair) with explicit helper addresses.
    pub fn repair_with(&mut self, failed: NodeId, helpers: &[NodeId]) -> Result<RepairOutcome> {
        let outcome = self.regenerate(failed, helpers)?;
        self.store(failed, outcome.content.symbols.clone())?;
        Ok(outcome)
    }

    /// Computes the regenerated content without committing it.
    pub fn regenerate(&self, failed: NodeId, helpers: &[NodeId]) -> Result<RepairOutcome> {
        let k = self.config.k();
        let target = self.config.encoding_vector(failed)?;
        if let Some(h) = helpers.iter().find(|h| h.node_type == failed.node_type) {
            return Err(Error::WrongHelperType(*h));
        }
        let distinct = helpers.iter().unique().count();
        if helpers.len() != k || distinct != k {
            return Err(Error::NotEnoughHelpers { needed: k, got: distinct });
        }
        let mut shares = Vec::with_capacity(k);
        for &h in helpers {
            if !self.is_live(h)? {
                return Err(Error::DeadNode(h));
            }
            let share = helper_share(self.node(h)?, &target)?;
            shares.push(share);
        }
        // shares = τᵀ · G_opp[:, helpers] with τ the lost content.
        let positions: Vec<usize> = helpers.iter().map(|h| h.index).collect();
        let tau = self.config.code(failed.node_type.opposite()).erasure_decode(&positions, &shares)?;
        Ok(RepairOutcome {
            content: NodeContent {
                node: failed,
                symbols: Some(tau),
            },
            helpers: helpers.to_vec(),
            shares,
        })
    }

    pub fn snapshot(&self) -> SystemSnapshot {
        SystemSnapshot {
            p: self.config.field().modulus() as u64,
            k: self.config.k(),
            code1: CodeRecord::from_code(self.config.code(NodeType::One)),
            code2: CodeRecord::from_code(self.config.code(NodeType::Two)),
            nodes: self
                .config
                .all_nodes()
                .map(|id| NodeRecord {
                    node: id,
                    live: self.live[id.node_type.slot()][id.index - 1],
                    symbols: self.nodes[id.node_type.slot()][id.index - 1].symbols.clone(),
                })
                .collect(),
        }
    }

    pub fn from_snapshot(snap: &SystemSnapshot) -> Result<Self> {
        let field = PrimeField::new(snap.p)?;
        let config = TwinConfig::new(snap.code1.to_code(field, snap.k)?, snap.code2.to_code(field, snap.k)?)?;
        let mut system = TwinSystem::empty(config);
        for rec in &snap.nodes {
            if let Some(s) = &rec.symbols {
                if s.len() != snap.k || s.iter().any(|&v| v >= field.modulus()) {
                    return Err(Error::DimensionMismatch(format!(
                        "node {} holds an invalid symbol vector",
                        rec.node
                    )));
                }
            }
            system.config.check_node(rec.node)?;
            let slot = rec.node.node_type.slot();
            system.nodes[slot][rec.node.index - 1].symbols = rec.symbols.clone();
            system.live[slot][rec.node.index - 1] = rec.live && rec.symbols.is_some();
        }
        Ok(system)
    }
}

/// JSON snapshot of a system: codes, per-node symbols and liveness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSnapshot {
    pub p: u64,
    pub k: usize,
    pub code1: CodeRecord,
    pub code2: CodeRecord,
    pub nodes: Vec<NodeRecord>,
}

impl SystemSnapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRecord {
    pub style: GeneratorStyle,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_points: Option<Vec<u32>>,
    pub generator: Vec<Vec<u64>>,
}

impl CodeRecord {
    pub fn from_code(code: &MdsCode) -> Self {
        CodeRecord {
            style: code.style(),
            n: code.n(),
            eval_points: code.eval_points().map(<[u32]>::to_vec),
            generator: code.to_document().generator,
        }
    }

    pub fn to_code(&self, field: PrimeField, k: usize) -> Result<MdsCode> {
        let code = match self.style {
            GeneratorStyle::Vandermonde => MdsCode::vandermonde(self.n, k, field, self.eval_points.as_deref())?,
            GeneratorStyle::Systematic => MdsCode::systematic(self.n, k, field, self.eval_points.as_deref())?,
            GeneratorStyle::Explicit => MdsCode::from_generator(FieldMatrix::from_rows(field, &self.generator)?)?,
        };
        if code.to_document().generator != self.generator {
            return Err(Error::InvalidCode(format!(
                "stored generator does not match its {:?} construction",
                self.style
            )));
        }
        Ok(code)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    #[serde(flatten)]
    pub node: NodeId,
    pub live: bool,
    pub symbols: Option<Vec<u32>>,
}
