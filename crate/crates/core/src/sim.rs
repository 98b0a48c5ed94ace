//! Deterministic scenario engine.
//!
//! A [`Scenario`] fixes the codes, the (optionally secure) message and a
//! script of events. [`run`] replays the script against a [`TwinSystem`]
//! and returns an [`EventLog`] with one record per event. Faults that
//! depend on runtime state (too few live helpers, dead nodes) become error
//! records; anything detectable up front is rejected as
//! [`Error::MalformedScenario`] before the first event runs.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eavesdrop::{
    build_observation, independent_symbol_count, leakage, EavesdropReport, EavesdropperSpec, RepairPlan,
};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::FieldMatrix;
use crate::mds::{GeneratorStyle, MdsCode};
use crate::secure::{guaranteed_secure_set, random_symbols, secure_capacity_twin, SecureLayout};
use crate::twin::{deploy, encode_system, MessageMatrix, NodeId, NodeType, TwinConfig, TwinSystem};

/// How to pick the nodes a repair or reconstruction contacts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selection {
    /// The `k` lowest-index live nodes.
    #[default]
    #[serde(with = "lowest")]
    Lowest,
    Explicit(Vec<usize>),
}

mod lowest {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("lowest")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "lowest" {
            Ok(())
        } else {
            Err(serde::de::Error::custom(format!("unknown selection policy {s:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatchedRepair {
    #[serde(rename = "type")]
    pub node_type: NodeType,
    pub index: usize,
    #[serde(default)]
    pub helpers: Selection,
}

impl WatchedRepair {
    pub fn node(&self) -> NodeId {
        NodeId::new(self.node_type, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    Fail {
        #[serde(rename = "type")]
        node_type: NodeType,
        index: usize,
    },
    Repair {
        #[serde(rename = "type")]
        node_type: NodeType,
        index: usize,
        #[serde(default)]
        helpers: Selection,
    },
    Reconstruct {
        #[serde(rename = "type")]
        node_type: NodeType,
        #[serde(default)]
        nodes: Selection,
    },
    Eavesdrop {
        #[serde(default)]
        e1: Vec<NodeId>,
        #[serde(default)]
        e2: Vec<WatchedRepair>,
    },
    Deploy {
        seeds1: Vec<usize>,
        seeds2: Vec<usize>,
    },
}

fn default_true() -> bool {
    true
}

fn default_style() -> GeneratorStyle {
    GeneratorStyle::Vandermonde
}

/// A scripted run. Generators are given explicitly for `"explicit"` style
/// and derived from `(q, n, k)` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub q: u64,
    pub k: usize,
    pub n1: usize,
    pub n2: usize,
    #[serde(default = "default_style")]
    pub style: GeneratorStyle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator1: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator2: Option<Vec<Vec<u64>>>,
    /// Run the all-minors check on explicit generators.
    #[serde(default = "default_true")]
    pub verify_mds: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub l1: usize,
    #[serde(default)]
    pub l2: usize,
    /// Secure payload of `k(k - l1 - l2)` symbols; drawn from `seed` when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Vec<u32>>,
    #[serde(default)]
    pub events: Vec<Event>,
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::MalformedScenario(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn config(&self) -> Result<TwinConfig> {
        let field = PrimeField::new(self.q)?;
        let code = |n: usize, g: &Option<Vec<Vec<u64>>>| -> Result<MdsCode> {
            match (self.style, g) {
                (GeneratorStyle::Explicit, Some(rows)) => {
                    let g = FieldMatrix::from_rows(field, rows)?;
                    let code = if self.verify_mds {
                        MdsCode::from_generator(g)?
                    } else {
                        MdsCode::from_generator_unchecked(g)?
                    };
                    if code.n() != n || code.k() != self.k {
                        return Err(Error::DimensionMismatch(format!(
                            "generator is {}x{}, expected {}x{n}",
                            code.k(),
                            code.n(),
                            self.k
                        )));
                    }
                    Ok(code)
                }
                (GeneratorStyle::Explicit, None) => {
                    Err(Error::BadParams("explicit style needs generator1 and generator2".into()))
                }
                (style, _) => MdsCode::with_style(style, n, self.k, field),
            }
        };
        TwinConfig::new(code(self.n1, &self.generator1)?, code(self.n2, &self.generator2)?)
    }

    pub fn layout(&self) -> Result<SecureLayout> {
        let field = PrimeField::new(self.q)?;
        let len = secure_capacity_twin(self.k, self.l1, self.l2)?;
        let payload = match &self.payload {
            Some(p) => p.clone(),
            None => random_symbols(field, len, self.seed.wrapping_add(1)),
        };
        SecureLayout::new(field, &payload, self.k, self.l1, self.l2, self.seed)
    }

    /// Static checks: parameters, index ranges, eavesdropper budgets, and
    /// that every repair targets a node failed earlier in the script.
    pub fn validate(&self) -> Result<(TwinConfig, SecureLayout)> {
        let bad = |e: Error| Error::MalformedScenario(e.to_string());
        let config = self.config().map_err(bad)?;
        let layout = self.layout().map_err(bad)?;
        let k = config.k();
        let check = |id: NodeId| config.check_node(id).map_err(bad);
        let check_sel = |t: NodeType, sel: &Selection| -> Result<()> {
            if let Selection::Explicit(ix) = sel {
                for &i in ix {
                    check(NodeId::new(t, i))?;
                }
                if ix.len() != k || !ix.iter().all_unique() {
                    return Err(Error::MalformedScenario(format!("selection {ix:?} must name {k} distinct nodes")));
                }
            }
            Ok(())
        };
        let mut failed: BTreeSet<NodeId> = BTreeSet::new();
        for (seq, ev) in self.events.iter().enumerate() {
            let at = |e: Error| Error::MalformedScenario(format!("event {seq}: {e}"));
            match ev {
                Event::Fail { node_type, index } => {
                    let id = NodeId::new(*node_type, *index);
                    check(id).map_err(at)?;
                    failed.insert(id);
                }
                Event::Repair {
                    node_type,
                    index,
                    helpers,
                } => {
                    let id = NodeId::new(*node_type, *index);
                    check(id).map_err(at)?;
                    check_sel(node_type.opposite(), helpers).map_err(at)?;
                    if !failed.remove(&id) {
                        return Err(at(Error::BadParams(format!("repair of {id}, which has not failed"))));
                    }
                }
                Event::Reconstruct { node_type, nodes } => check_sel(*node_type, nodes).map_err(at)?,
                Event::Eavesdrop { e1, e2 } => {
                    let spec = EavesdropperSpec::new(e1.clone(), e2.iter().map(WatchedRepair::node).collect());
                    spec.validate(&config).map_err(|e| at(bad(e)))?;
                    for w in e2 {
                        check_sel(w.node_type.opposite(), &w.helpers).map_err(at)?;
                    }
                }
                Event::Deploy { seeds1, seeds2 } => {
                    for (t, seeds) in [(NodeType::One, seeds1), (NodeType::Two, seeds2)] {
                        for &s in seeds.iter() {
                            check(NodeId::new(t, s)).map_err(at)?;
                        }
                        if seeds.len() != k || !seeds.iter().all_unique() {
                            return Err(at(Error::InsufficientSeeds { k }));
                        }
                    }
                    failed.clear();
                }
            }
        }
        Ok((config, layout))
    }
}

/// Extra information attached to a log record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detail {
    Repair {
        helpers: Vec<usize>,
        matches_original: bool,
    },
    Reconstruct {
        nodes: Vec<usize>,
        matches_original: bool,
    },
    Eavesdrop(EavesdropReport),
    Deploy {
        repairs: usize,
        matches_encode: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: usize,
    pub event: Event,
    pub ok: bool,
    /// Symbols sent over the network for this event.
    pub symbols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Detail>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    pub records: Vec<LogRecord>,
}

impl EventLog {
    /// One JSON object per line, each terminated by `\n`.
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }

    pub fn has_errors(&self) -> bool {
        self.records.iter().any(|r| !r.ok)
    }

    pub fn symbols_transferred(&self) -> usize {
        self.records.iter().map(|r| r.symbols).sum()
    }
}

/// Final state alongside the log.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub log: EventLog,
    pub system: TwinSystem,
    pub layout: SecureLayout,
}

pub fn run(scenario: &Scenario) -> Result<EventLog> {
    Ok(run_with_state(scenario)?.log)
}

pub fn run_with_state(scenario: &Scenario) -> Result<RunOutcome> {
    let (config, layout) = scenario.validate()?;
    let k = config.k();
    let original = layout.matrix().clone();
    let reference = encode_system(&config, &original)?;
    let mut system = reference.clone();
    let mut log = EventLog::default();

    for (seq, event) in scenario.events.iter().enumerate() {
        let mut rec = LogRecord {
            seq,
            event: event.clone(),
            ok: true,
            symbols: 0,
            error: None,
            detail: None,
        };
        let outcome: Result<()> = (|| {
            match event {
                Event::Fail { node_type, index } => system.fail(NodeId::new(*node_type, *index))?,
                Event::Repair {
                    node_type,
                    index,
                    helpers,
                } => {
                    let id = NodeId::new(*node_type, *index);
                    let opp = node_type.opposite();
                    let helpers = select(&system, opp, helpers, k).ok_or_else(|| {
                        Error::Io(format!(
                            "RepairStarvation: {} live type {} nodes, need {k}",
                            system.live_nodes(opp).len(),
                            opp.number()
                        ))
                    })?;
                    let out = system.repair(id, &helpers)?;
                    rec.symbols = out.symbols_transferred();
                    rec.detail = Some(Detail::Repair {
                        matches_original: out.content.symbols == reference.node(id)?.symbols,
                        helpers,
                    });
                }
                Event::Reconstruct { node_type, nodes } => {
                    let nodes = select(&system, *node_type, nodes, k).ok_or(Error::NotEnoughLiveNodes {
                        needed: k,
                        got: system.live_nodes(*node_type).len(),
                    })?;
                    let recovered = system.reconstruct(*node_type, &nodes)?;
                    rec.symbols = k * k;
                    rec.detail = Some(Detail::Reconstruct {
                        matches_original: recovered.a1() == original.a1(),
                        nodes,
                    });
                }
                Event::Eavesdrop { e1, e2 } => {
                    let spec = EavesdropperSpec::new(e1.clone(), e2.iter().map(WatchedRepair::node).collect());
                    let mut plans = Vec::new();
                    for w in e2 {
                        let opp = w.node_type.opposite();
                        let helpers = select(&system, opp, &w.helpers, k).ok_or(Error::NotEnoughLiveNodes {
                            needed: k,
                            got: system.live_nodes(opp).len(),
                        })?;
                        plans.push(RepairPlan {
                            failed: w.node(),
                            helpers,
                        });
                    }
                    let obs = build_observation(&config, &layout, &spec, &plans)?;
                    rec.detail = Some(Detail::Eavesdrop(EavesdropReport::new(&config, &layout, &spec, &plans, &obs)));
                }
                Event::Deploy { seeds1, seeds2 } => {
                    system = deploy(&config, &original, seeds1, seeds2)?;
                    let repairs = config.total_nodes() - 2 * k;
                    rec.symbols = repairs * k;
                    rec.detail = Some(Detail::Deploy {
                        repairs,
                        matches_encode: system == reference,
                    });
                }
            }
            Ok(())
        })();
        if let Err(e) = outcome {
            rec.ok = false;
            rec.symbols = 0;
            rec.error = Some(match e {
                // starvation is reported under its own name
                Error::Io(msg) if msg.starts_with("RepairStarvation") => msg,
                other => other.to_string(),
            });
        }
        log.records.push(rec);
    }
    Ok(RunOutcome { log, system, layout })
}

fn select(system: &TwinSystem, t: NodeType, sel: &Selection, k: usize) -> Option<Vec<usize>> {
    match sel {
        Selection::Lowest => system.lowest_live(t, k),
        Selection::Explicit(ix) => Some(ix.clone()),
    }
}

/// Restricts which eavesdropper specs a sweep visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFilter {
    All,
    SameTypeOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub e1: Vec<NodeId>,
    pub e2: Vec<NodeId>,
    pub rank: usize,
    pub leakage: usize,
    pub guaranteed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstCase {
    pub l1: usize,
    pub l2: usize,
    pub leakage: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub exhaustive: bool,
    pub rows: Vec<SweepRow>,
    pub worst: Vec<WorstCase>,
}

/// Enumeration cap before [`sweep_eavesdroppers`] switches to sampling.
pub const SWEEP_ENUMERATION_LIMIT: u128 = 100_000;
/// Number of specs drawn when sampling.
pub const SWEEP_SAMPLES: usize = 5_000;

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Leakage of every spec with at most `max_budget` exposed nodes (capped at
/// `k - 1`). Repair-observed nodes use the lowest-index helpers of a fully
/// live system. Falls back to [`SWEEP_SAMPLES`] seeded samples when the
/// number of specs exceeds [`SWEEP_ENUMERATION_LIMIT`].
pub fn sweep_eavesdroppers(
    config: &TwinConfig,
    layout: &SecureLayout,
    max_budget: usize,
    filter: SweepFilter,
    seed: u64,
) -> Result<SweepSummary> {
    let k = config.k();
    let budget = max_budget.min(k - 1);
    let nodes: Vec<NodeId> = config.all_nodes().collect();
    let total: u128 = (0..=budget).map(|s| binomial(nodes.len(), s) << s).sum();
    let exhaustive = total <= SWEEP_ENUMERATION_LIMIT;

    let mut specs: Vec<EavesdropperSpec> = Vec::new();
    let split = |set: &[NodeId], mask: u64| {
        let (mut e1, mut e2) = (Vec::new(), Vec::new());
        for (i, &id) in set.iter().enumerate() {
            if mask >> i & 1 == 1 {
                e2.push(id);
            } else {
                e1.push(id);
            }
        }
        EavesdropperSpec::new(e1, e2)
    };
    if exhaustive {
        for s in 0..=budget {
            for set in nodes.iter().copied().combinations(s) {
                for mask in 0..1u64 << s {
                    specs.push(split(&set, mask));
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..SWEEP_SAMPLES {
            let s = rng.gen_range(0..=budget);
            let mut set: Vec<NodeId> = sample(&mut rng, nodes.len(), s).into_iter().map(|i| nodes[i]).collect();
            set.sort();
            let mask = rng.gen_range(0..1u64 << s);
            specs.push(split(&set, mask));
        }
    }

    let mut rows = Vec::new();
    let mut worst: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for spec in specs {
        if filter == SweepFilter::SameTypeOnly && !(spec.all_of_type(NodeType::One) || spec.all_of_type(NodeType::Two))
        {
            continue;
        }
        let plans: Vec<RepairPlan> = spec
            .e2
            .iter()
            .map(|&failed| RepairPlan {
                failed,
                helpers: (1..=k).collect(),
            })
            .collect();
        let obs = build_observation(config, layout, &spec, &plans)?;
        let leak = leakage(&obs);
        let slot = worst.entry((spec.e1.len(), spec.e2.len())).or_default();
        *slot = (*slot).max(leak);
        rows.push(SweepRow {
            guaranteed: guaranteed_secure_set(config, layout, &spec.e1, &spec.e2).guaranteed,
            rank: independent_symbol_count(&obs),
            leakage: leak,
            e1: spec.e1,
            e2: spec.e2,
        });
    }
    Ok(SweepSummary {
        exhaustive,
        rows,
        worst: worst
            .into_iter()
            .map(|((l1, l2), leakage)| WorstCase { l1, l2, leakage })
            .collect(),
    })
}

/// Message matrix a scenario encodes, for callers that want to compare.
pub fn scenario_message(scenario: &Scenario) -> Result<MessageMatrix> {
    Ok(scenario.layout()?.matrix().clone())
}
