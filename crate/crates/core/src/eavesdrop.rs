//! Passive `(l1, l2)` eavesdroppers and exact leakage for linear layouts.
//!
//! An eavesdropper reads the stored content of the nodes in `e1` and the
//! `k` helper symbols downloaded while each node in `e2` is repaired. Every
//! observed symbol is a linear functional of the source vector
//! `f = (r, f^s)`, so the whole view is `e = M · f` for an observation
//! matrix `M` with `k²` columns. Rows are built from the generators, never
//! from the stored values, so the analysis is a property of the scheme.
//!
//! With `r` and `f^s` independent and uniform,
//!
//! ```text
//! I(f^s; e) = (rank M - rank M_r) · log q
//! ```
//!
//! where `M_r` keeps only the key columns. [`brute_force_mi`] computes the
//! same quantity by enumerating every source vector.

use std::collections::HashMap;
use std::ops::Range;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::FieldMatrix;
use crate::secure::{guaranteed_secure_set, SecrecyGuarantee, SecureLayout};
use crate::twin::{NodeId, NodeType, TwinConfig, TwinSystem};

/// Which nodes are read (`e1`) and whose repairs are watched (`e2`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EavesdropperSpec {
    #[serde(default)]
    pub e1: Vec<NodeId>,
    #[serde(default)]
    pub e2: Vec<NodeId>,
}

impl EavesdropperSpec {
    pub fn new(e1: Vec<NodeId>, e2: Vec<NodeId>) -> Self {
        EavesdropperSpec { e1, e2 }
    }

    pub fn size(&self) -> usize {
        self.e1.len() + self.e2.len()
    }

    /// Disjointness, index ranges and `|e1| + |e2| < k`.
    pub fn validate(&self, config: &TwinConfig) -> Result<()> {
        for id in self.e1.iter().chain(&self.e2) {
            config.check_node(*id)?;
        }
        if let Some(dup) = self.e1.iter().chain(&self.e2).duplicates().next() {
            return Err(Error::OverlappingSets(*dup));
        }
        if self.size() >= config.k() {
            return Err(Error::BudgetExceeded {
                l: self.size(),
                k: config.k(),
            });
        }
        Ok(())
    }

    /// Whether every exposed node is of type `t`.
    pub fn all_of_type(&self, t: NodeType) -> bool {
        self.e1.iter().chain(&self.e2).all(|id| id.node_type == t)
    }
}

/// The helpers used to repair one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairPlan {
    pub failed: NodeId,
    pub helpers: Vec<usize>,
}

/// Provenance of an observation row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowOrigin {
    Stored { node: NodeId, symbol: usize },
    RepairShare { failed: NodeId, helper: NodeId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    matrix: FieldMatrix,
    values: Vec<u32>,
    key_len: usize,
    origins: Vec<RowOrigin>,
}

impl Observation {
    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }

    /// Observed symbols, `M · f`.
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn origins(&self) -> &[RowOrigin] {
        &self.origins
    }

    pub fn random_cols(&self) -> Range<usize> {
        0..self.key_len
    }

    pub fn payload_cols(&self) -> Range<usize> {
        self.key_len..self.matrix.cols()
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    fn key_block(&self) -> FieldMatrix {
        let cols: Vec<usize> = self.random_cols().collect();
        self.matrix.select_columns(&cols)
    }
}

/// Column of `A1[row][col]` in the source vector (column-major layout).
fn coord(k: usize, row: usize, col: usize) -> usize {
    col * k + row
}

/// Rows describing the `k` stored symbols of `node` as functionals of `f`.
pub fn stored_functionals(config: &TwinConfig, node: NodeId) -> Result<Vec<Vec<u32>>> {
    let k = config.k();
    let g = config.encoding_vector(node)?.coefficients;
    Ok((0..k)
        .map(|t| {
            let mut row = vec![0u32; k * k];
            for (s, &gs) in g.iter().enumerate() {
                let c = match node.node_type {
                    // (A1 g)_t = Σ_s A1[t][s] g_s
                    NodeType::One => coord(k, t, s),
                    // (A1ᵀ g)_t = Σ_s A1[s][t] g_s
                    NodeType::Two => coord(k, s, t),
                };
                row[c] = gs;
            }
            row
        })
        .collect())
}

/// The functional of the symbol `helper` sends when `failed` is repaired.
pub fn share_functional(config: &TwinConfig, failed: NodeId, helper: NodeId) -> Result<Vec<u32>> {
    if failed.node_type == helper.node_type {
        return Err(Error::WrongHelperType(helper));
    }
    let k = config.k();
    let field = config.field();
    let gf = config.encoding_vector(failed)?.coefficients;
    let gh = config.encoding_vector(helper)?.coefficients;
    let mut row = vec![0u32; k * k];
    for s in 0..k {
        for t in 0..k {
            let c = match failed.node_type {
                // g1ᵀ A2 g2 = Σ g1[s] A1[t][s] g2[t]
                NodeType::One => coord(k, t, s),
                // g2ᵀ A1 g1 = Σ g2[s] A1[s][t] g1[t]
                NodeType::Two => coord(k, s, t),
            };
            row[c] = field.add(row[c], field.mul(gf[s], gh[t]));
        }
    }
    Ok(row)
}

/// Builds the observation of `spec` without the budget check, so that
/// over-budget views (e.g. a full reconstruction set) can be analysed too.
pub fn build_observation(
    config: &TwinConfig,
    layout: &SecureLayout,
    spec: &EavesdropperSpec,
    plans: &[RepairPlan],
) -> Result<Observation> {
    let k = config.k();
    if layout.k() != k {
        return Err(Error::DimensionMismatch(format!("layout has k = {}, config k = {k}", layout.k())));
    }
    let mut matrix = FieldMatrix::zeros(config.field(), 0, k * k);
    let mut origins = Vec::new();
    for &node in &spec.e1 {
        for (t, row) in stored_functionals(config, node)?.into_iter().enumerate() {
            matrix.push_row(&row)?;
            origins.push(RowOrigin::Stored { node, symbol: t + 1 });
        }
    }
    for &failed in &spec.e2 {
        let plan = plans
            .iter()
            .find(|p| p.failed == failed)
            .ok_or(Error::MissingRepairPlan(failed))?;
        let distinct = plan.helpers.iter().unique().count();
        if plan.helpers.len() != k || distinct != k {
            return Err(Error::NotEnoughHelpers { needed: k, got: distinct });
        }
        for &h in &plan.helpers {
            let helper = NodeId::new(failed.node_type.opposite(), h);
            matrix.push_row(&share_functional(config, failed, helper)?)?;
            origins.push(RowOrigin::RepairShare { failed, helper });
        }
    }
    let values = matrix.mul_vec(&layout.source())?;
    Ok(Observation {
        matrix,
        values,
        key_len: layout.key_len(),
        origins,
    })
}

/// Validated observation of `spec` against the system's configuration.
pub fn observe(
    system: &TwinSystem,
    layout: &SecureLayout,
    spec: &EavesdropperSpec,
    plans: &[RepairPlan],
) -> Result<Observation> {
    spec.validate(system.config())?;
    build_observation(system.config(), layout, spec, plans)
}

/// Leaked payload information in `q`-ary symbols.
pub fn leakage(obs: &Observation) -> usize {
    obs.matrix.rank() - obs.key_block().rank()
}

/// Number of linearly independent observed symbols.
pub fn independent_symbol_count(obs: &Observation) -> usize {
    obs.matrix.rank()
}

/// Source coordinates whose value the eavesdropper can compute outright.
pub fn revealed_coordinates(obs: &Observation) -> Vec<usize> {
    let n = obs.matrix.cols();
    if obs.rows() == 0 {
        return Vec::new();
    }
    let (reduced, pivots) = obs.matrix.rref();
    let basis = reduced.select_rows(&(0..pivots.len()).collect::<Vec<_>>());
    (0..n)
        .filter(|&c| {
            let mut unit = vec![0u32; n];
            unit[c] = 1;
            basis.in_row_space(&unit).expect("matching width")
        })
        .collect()
}

/// [`revealed_coordinates`] with `r…`/`a…` labels.
pub fn revealed_symbols(obs: &Observation, layout: &SecureLayout) -> Vec<String> {
    revealed_coordinates(obs).into_iter().map(|c| layout.label(c)).collect()
}

/// Largest enumeration [`brute_force_mi`] will attempt.
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

/// Exact `I(f^s; e)` in bits by enumerating every source vector.
///
/// `template` is an observation matrix over `field` whose first `key_len`
/// columns are keys. All `q^cols` source vectors are equally likely.
pub fn brute_force_mi(template: &FieldMatrix, field: PrimeField, key_len: usize) -> Result<f64> {
    let q = field.modulus() as u64;
    let n = template.cols();
    let total = (0..n).try_fold(1u64, |acc, _| acc.checked_mul(q).filter(|&v| v <= BRUTE_FORCE_LIMIT));
    let Some(total) = total else {
        return Err(Error::InstanceTooLarge(format!("q^{n} with q = {q} exceeds {BRUTE_FORCE_LIMIT}")));
    };
    if key_len > n {
        return Err(Error::DimensionMismatch(format!("{key_len} key columns of {n}")));
    }
    let mut joint: HashMap<(u64, Vec<u32>), u64> = HashMap::new();
    let mut secret: HashMap<u64, u64> = HashMap::new();
    let mut view: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut f = vec![0u32; n];
    for idx in 0..total {
        let mut rest = idx;
        for slot in f.iter_mut() {
            *slot = (rest % q) as u32;
            rest /= q;
        }
        // Payload coordinates sit above the key coordinates in `idx`.
        let s = idx / q.pow(key_len as u32);
        let e = template.mul_vec(&f)?;
        *joint.entry((s, e.clone())).or_default() += 1;
        *secret.entry(s).or_default() += 1;
        *view.entry(e).or_default() += 1;
    }
    let total = total as f64;
    let mi = joint
        .iter()
        .map(|((s, e), &c)| {
            let pxy = c as f64 / total;
            let px = secret[s] as f64 / total;
            let py = view[e] as f64 / total;
            pxy * (pxy / (px * py)).log2()
        })
        .sum::<f64>();
    Ok(mi.max(0.0))
}

/// Renders a functional as `r1+4r2+3r3+2r4`.
pub fn format_functional(coeffs: &[u32], layout: &SecureLayout) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| {
            let label = layout.label(i);
            if c == 1 {
                label
            } else {
                format!("{c}{label}")
            }
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

/// Serializable summary of one eavesdropping episode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EavesdropReport {
    pub spec: EavesdropperSpec,
    pub repair_plans: Vec<RepairPlan>,
    pub rows: usize,
    pub rank: usize,
    pub leakage: usize,
    pub revealed: Vec<String>,
    pub guarantee: SecrecyGuarantee,
}

impl EavesdropReport {
    pub fn new(
        config: &TwinConfig,
        layout: &SecureLayout,
        spec: &EavesdropperSpec,
        plans: &[RepairPlan],
        obs: &Observation,
    ) -> Self {
        EavesdropReport {
            spec: spec.clone(),
            repair_plans: plans.iter().filter(|p| spec.e2.contains(&p.failed)).cloned().collect(),
            rows: obs.rows(),
            rank: independent_symbol_count(obs),
            leakage: leakage(obs),
            revealed: revealed_symbols(obs, layout),
            guarantee: guaranteed_secure_set(config, layout, &spec.e1, &spec.e2),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Default repair plans for `spec.e2`: lowest-index live helpers.
pub fn default_plans(system: &TwinSystem, spec: &EavesdropperSpec) -> Result<Vec<RepairPlan>> {
    let k = system.config().k();
    spec.e2
        .iter()
        .map(|&failed| {
            let opp = failed.node_type.opposite();
            let helpers = system.lowest_live(opp, k).ok_or(Error::NotEnoughLiveNodes {
                needed: k,
                got: system.live_nodes(opp).len(),
            })?;
            Ok(RepairPlan { failed, helpers })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twin::encode_system;
    use crate::worked_example;

    fn example() -> (TwinSystem, SecureLayout) {
        let layout = worked_example::layout(5);
        let system = encode_system(&worked_example::config(), layout.matrix()).unwrap();
        (system, layout)
    }

    #[test]
    fn stored_rows_evaluate_to_node_contents() {
        let (system, layout) = example();
        let f = layout.source();
        for id in system.config().all_nodes() {
            let rows = stored_functionals(system.config(), id).unwrap();
            let m = FieldMatrix::from_entries(
                system.config().field(),
                rows.len(),
                16,
                rows.concat().into_iter().map(u64::from).collect(),
            )
            .unwrap();
            assert_eq!(m.mul_vec(&f).unwrap(), system.node(id).unwrap().symbols.clone().unwrap());
        }
    }

    #[test]
    fn share_rows_evaluate_to_helper_shares() {
        let (system, layout) = example();
        let f = layout.source();
        let cfg = system.config();
        for failed in cfg.all_nodes() {
            let target = cfg.encoding_vector(failed).unwrap();
            for helper in cfg.nodes(failed.node_type.opposite()) {
                let row = share_functional(cfg, failed, helper).unwrap();
                let expected = crate::twin::helper_share(system.node(helper).unwrap(), &target).unwrap();
                assert_eq!(cfg.field().dot(&row, &f), expected, "{failed} <- {helper}");
            }
        }
    }

    #[test]
    fn mixed_type_view() {
        let (system, layout) = example();
        let spec = EavesdropperSpec::new(vec![NodeId::one(1), NodeId::two(2)], vec![]);
        let obs = observe(&system, &layout, &spec, &[]).unwrap();
        assert_eq!(obs.rows(), 8);
        assert_eq!(independent_symbol_count(&obs), 7);
        assert_eq!(leakage(&obs), 2);
        assert_eq!(revealed_symbols(&obs, &layout), ["r1", "r2", "r3", "r4", "r6", "a10", "a14"]);
        let f = layout.source();
        assert_eq!(&obs.values()[..4], &f[0..4]);
        assert_eq!(&obs.values()[4..], &[f[1], f[5], f[9], f[13]]);
    }

    #[test]
    fn same_type_view() {
        let (system, layout) = example();
        let spec = EavesdropperSpec::new(vec![NodeId::one(2), NodeId::one(3)], vec![]);
        let obs = observe(&system, &layout, &spec, &[]).unwrap();
        assert_eq!(independent_symbol_count(&obs), 8);
        assert_eq!(leakage(&obs), 4);
        let spec = EavesdropperSpec::new(vec![NodeId::one(1), NodeId::one(2)], vec![]);
        let obs = observe(&system, &layout, &spec, &[]).unwrap();
        assert_eq!(leakage(&obs), 0);
    }

    #[test]
    fn repair_observation_example() {
        let (system, layout) = example();
        let spec = EavesdropperSpec::new(vec![NodeId::two(1)], vec![NodeId::two(2)]);
        let plan = RepairPlan {
            failed: NodeId::two(2),
            helpers: vec![1, 3, 4, 5],
        };
        let obs = observe(&system, &layout, &spec, &[plan]).unwrap();
        assert_eq!(obs.rows(), 8);
        assert_eq!(independent_symbol_count(&obs), 8);
        assert!(leakage(&obs) < 8);
        assert_eq!(leakage(&obs), 4);
    }

    #[test]
    fn observe_errors() {
        let (system, layout) = example();
        let spec = EavesdropperSpec::new(vec![], vec![NodeId::two(2)]);
        assert_eq!(observe(&system, &layout, &spec, &[]), Err(Error::MissingRepairPlan(NodeId::two(2))));
        let spec = EavesdropperSpec::new(vec![NodeId::one(1), NodeId::one(2), NodeId::one(3), NodeId::one(4)], vec![]);
        assert_eq!(observe(&system, &layout, &spec, &[]), Err(Error::BudgetExceeded { l: 4, k: 4 }));
        let spec = EavesdropperSpec::new(vec![NodeId::one(1)], vec![NodeId::one(1)]);
        assert_eq!(observe(&system, &layout, &spec, &[]), Err(Error::OverlappingSets(NodeId::one(1))));
    }

    #[test]
    fn empty_and_full_views() {
        let (system, layout) = example();
        let obs = observe(&system, &layout, &EavesdropperSpec::default(), &[]).unwrap();
        assert_eq!(obs.rows(), 0);
        assert_eq!(leakage(&obs), 0);
        assert!(revealed_symbols(&obs, &layout).is_empty());
        let all = EavesdropperSpec::new(system.config().nodes(NodeType::Two).take(4).collect(), vec![]);
        let obs = build_observation(system.config(), &layout, &all, &[]).unwrap();
        assert_eq!(revealed_coordinates(&obs), (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn format_functional_matches_table_notation() {
        let (system, layout) = example();
        let rows = stored_functionals(system.config(), NodeId::two(5)).unwrap();
        assert_eq!(format_functional(&rows[0], &layout), "r1+4r2+3r3+2r4");
        assert_eq!(format_functional(&rows[3], &layout), "a13+4a14+3a15+2a16");
        assert_eq!(format_functional(&[0; 16], &layout), "0");
    }

    #[test]
    fn brute_force_small_cases() {
        let f3 = PrimeField::new(3).unwrap();
        // one key column of a 2x2 matrix; view = key + payload coordinate
        let masked = FieldMatrix::from_rows(f3, &[[1, 0, 1, 0]]).unwrap();
        assert!(brute_force_mi(&masked, f3, 2).unwrap().abs() < 1e-12);
        let bare = FieldMatrix::from_rows(f3, &[[0, 0, 1, 0], [0, 0, 0, 1]]).unwrap();
        assert!((brute_force_mi(&bare, f3, 2).unwrap() - 2.0 * 3f64.log2()).abs() < 1e-9);
        let wide = FieldMatrix::zeros(PrimeField::new(11).unwrap(), 1, 16);
        assert!(matches!(
            brute_force_mi(&wide, PrimeField::new(11).unwrap(), 0),
            Err(Error::InstanceTooLarge(_))
        ));
    }
}
