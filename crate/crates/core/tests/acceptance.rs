//! Acceptance criteria, one line each.
//!
//! Runs without the libtest harness so the output is a flat table. Three
//! criteria cannot hold for the worked example as printed and are listed in
//! `KNOWN_FAILURES`; they still run in full and print FAIL. The process
//! exits nonzero if any other criterion fails, or if a known failure starts
//! passing (so the list never goes stale).

use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twincode::bounds::{comparison_series, BoundRow, SeriesKind};
use twincode::eavesdrop::{
    brute_force_mi, build_observation, format_functional, independent_symbol_count, leakage, revealed_symbols,
    stored_functionals,
};
use twincode::secure::random_symbols;
use twincode::{
    encode_system, worked_example, EavesdropperSpec, Error, FieldMatrix, GeneratorStyle, MdsCode, NodeId, NodeType,
    PrimeField, RepairPlan, SecureLayout, TwinConfig,
};

const KNOWN_FAILURES: [u32; 3] = [4, 9, 10];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Node contents as printed in the worked-example table, symbol by symbol.
const TABLE: [(u8, usize, [&str; 4]); 11] = [
    (1, 1, ["r_1", "r_2", "r_3", "r_4"]),
    (1, 2, ["r_5", "r_6", "r_7", "r_8"]),
    (1, 3, ["a_9", "a_{10}", "a_{11}", "a_{12}"]),
    (1, 4, ["a_{13}", "a_{14}", "a_{15}", "a_{16}"]),
    (
        1,
        5,
        [
            "r_1 + r_5 + a_9 + a_{13}",
            "r_2 + r_6 + a_{10} + a_{14}",
            "r_3 + r_7 + a_{11} + a_{15}",
            "r_4 + r_8 + a_{12} + a_{16}",
        ],
    ),
    (2, 1, ["r_1", "r_5", "a_9", "a_{13}"]),
    (2, 2, ["r_2", "r_6", "a_{10}", "a_{14}"]),
    (2, 3, ["r_3", "r_7", "a_{11}", "a_{15}"]),
    (
        2,
        4,
        [
            "r_1 + r_2 + r_3 + r_4",
            "r_5 + r_6 + r_7 + r_8",
            "a_9 + a_{10} + a_{11} + a_{12}",
            "a_{13} + a_{14} + a_{15} + a_{16}",
        ],
    ),
    (
        2,
        5,
        [
            "r_1 + 4r_2 + 3r_3 + 2r_4",
            "r_5 + 4r_6 + 3r_7 + 2r_8",
            "a_9 + 4a_{10} + 3a_{11} + 2a_{12}",
            "a_{13} + 4a_{14} + 3a_{15} + 2a_{16}",
        ],
    ),
    (
        2,
        6,
        [
            "r_1 + 3r_2 + 4r_3 + 2r_4",
            "r_5 + 3r_6 + 4r_7 + 2r_8",
            "a_9 + 3a_{10} + 4a_{11} + 2a_{12}",
            "a_{13} + 3a_{14} + 4a_{15} + 2a_{16}",
        ],
    ),
];

fn normalize(cell: &str) -> String {
    cell.chars().filter(|c| !matches!(c, ' ' | '_' | '{' | '}')).collect()
}

fn node(t: u8, i: usize) -> NodeId {
    NodeId::new(if t == 1 { NodeType::One } else { NodeType::Two }, i)
}

fn c1_golden_encode() -> Outcome {
    let config = worked_example::config();
    let layout = worked_example::layout(2024);
    let system = encode_system(&config, layout.matrix()).unwrap();
    let source = layout.source();
    let field = config.field();
    let mut mismatches = Vec::new();
    for (t, i, cells) in TABLE {
        let id = node(t, i);
        let rows = stored_functionals(&config, id).unwrap();
        let stored = system.node(id).unwrap().symbols.clone().unwrap();
        for (s, cell) in cells.iter().enumerate() {
            let got = format_functional(&rows[s], &layout);
            let value = field.dot(&rows[s], &source);
            if got != normalize(cell) || value != stored[s] {
                mismatches.push(format!("{id} symbol {}: {got} vs {cell}", s + 1));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "44/44 stored symbols match the table".to_string()
        } else {
            mismatches.join("; ")
        },
    )
}

fn view(config: &TwinConfig, layout: &SecureLayout, e1: Vec<NodeId>, e2: Vec<NodeId>, plans: &[RepairPlan]) -> (usize, usize, Vec<String>) {
    let spec = EavesdropperSpec::new(e1, e2);
    let obs = build_observation(config, layout, &spec, plans).unwrap();
    (independent_symbol_count(&obs), leakage(&obs), revealed_symbols(&obs, layout))
}

fn c2_mixed_and_same_type_views() -> Outcome {
    let config = worked_example::config();
    let layout = worked_example::layout(1);
    let (rank_i, _, revealed) = view(&config, &layout, vec![NodeId::one(1), NodeId::two(2)], vec![], &[]);
    let expected: Vec<String> = ["r1", "r2", "r3", "r4", "r6", "a10", "a14"].map(String::from).to_vec();
    let (rank_ii, _, _) = view(&config, &layout, vec![NodeId::one(2), NodeId::one(3)], vec![], &[]);
    outcome(
        rank_i == 7 && revealed == expected && rank_ii == 8,
        format!("mixed view: rank {rank_i}, revealed {{{}}}; Type 1 {{2,3}}: rank {rank_ii}", revealed.join(",")),
    )
}

fn c3_repair_view() -> Outcome {
    let config = worked_example::config();
    let layout = worked_example::layout(1);
    let plans = [RepairPlan {
        failed: NodeId::two(2),
        helpers: vec![1, 3, 4, 5],
    }];
    let (rank, leak, revealed) = view(&config, &layout, vec![NodeId::two(1)], vec![NodeId::two(2)], &plans);
    outcome(
        rank == 8 && leak < 8,
        format!("rank {rank} = k(l1+l2) = 8, leakage {leak}, revealed {{{}}}", revealed.join(",")),
    )
}

fn c4_universality() -> Outcome {
    let config = worked_example::config();
    let layout = worked_example::layout(77);
    let reference = encode_system(&config, layout.matrix()).unwrap();
    let k = config.k();
    let (mut ok_rec, mut all_rec, mut ok_rep, mut all_rep) = (0, 0, 0, 0);
    let mut failures = Vec::new();
    for t in NodeType::BOTH {
        for subset in (1..=config.n(t)).combinations(k) {
            all_rec += 1;
            match reference.reconstruct(t, &subset) {
                Ok(m) if &m == layout.matrix() => ok_rec += 1,
                other => failures.push(format!("reconstruct T{}{subset:?}: {}", t.number(), describe(other.map(|_| ())))),
            }
        }
    }
    for failed in config.all_nodes() {
        let opp = failed.node_type.opposite();
        for helpers in (1..=config.n(opp)).combinations(k) {
            all_rep += 1;
            let mut system = reference.clone();
            system.fail(failed).unwrap();
            match system.repair(failed, &helpers) {
                Ok(out) if &out.content == reference.node(failed).unwrap() => ok_rep += 1,
                other => failures.push(format!("repair {failed} from T{}{helpers:?}: {}", opp.number(), describe(other.map(|_| ())))),
            }
        }
    }
    let pass = failures.is_empty();
    let mut detail = format!("reconstructions {ok_rec}/{all_rec}, repairs {ok_rep}/{all_rep}");
    if !pass {
        let on_minor = failures.iter().filter(|f| f.contains("T2[2, 3, 5, 6]")).count();
        detail.push_str(&format!(
            "; {} failures, {on_minor} of them on Type 2 nodes [2, 3, 5, 6]; first: {}",
            failures.len(),
            failures[0]
        ));
    }
    outcome(pass, detail)
}

fn describe(r: Result<(), Error>) -> String {
    match r {
        Ok(()) => "wrong result".into(),
        Err(e) => e.to_string(),
    }
}

fn int(x: &Option<BigRational>) -> Option<i64> {
    x.as_ref().filter(|v| v.is_integer()).and_then(|v| v.to_integer().to_i64())
}

fn c5_plain_sizes() -> Outcome {
    let rows = comparison_series(SeriesKind::fig5(50)).unwrap();
    let shape = rows.len() == 48 && rows[0].k == 3;
    let ok = rows.iter().all(|r: &BoundRow| {
        let k = r.k as i64;
        int(&r.s_twin) == Some(k * k) && int(&r.s_msr) == Some(k * k) && int(&r.s_mbr) == Some(k * (k + 1) / 2)
    });
    let last = rows.last().unwrap();
    let spot = int(&last.s_twin) == Some(2500) && int(&last.s_mbr) == Some(1275);
    outcome(
        shape && ok && spot,
        format!(
            "{} rows k=3..50, k=50: twin {} msr {} mbr {}",
            rows.len(),
            int(&last.s_twin).unwrap_or(-1),
            int(&last.s_msr).unwrap_or(-1),
            int(&last.s_mbr).unwrap_or(-1)
        ),
    )
}

fn c6_secure_mbr() -> Outcome {
    let rows = comparison_series(SeriesKind::fig8(50)).unwrap();
    let ok = rows.iter().all(|r| {
        let (k, l) = (50i64, r.l1.unwrap() as i64);
        let twin = int(&r.s_twin);
        let mbr = int(&r.s_mbr);
        twin == Some(k * (k - l)) && mbr == Some((k - l) * (k + 1 - l) / 2) && twin >= mbr
    });
    let first = &rows[0];
    let spot = int(&first.s_twin) == Some(2450) && int(&first.s_mbr) == Some(1225);
    outcome(
        rows.len() == 49 && ok && spot,
        format!(
            "{} rows l=1..49, l=1: twin {} mbr {}",
            rows.len(),
            int(&first.s_twin).unwrap_or(-1),
            int(&first.s_mbr).unwrap_or(-1)
        ),
    )
}

fn c7_secure_msr() -> Outcome {
    let rows = comparison_series(SeriesKind::fig9(50, 2)).unwrap();
    let ok = rows.iter().all(|r| {
        let l2 = r.l2.unwrap() as i64;
        let twin = BigRational::from_integer((50 * (48 - l2)).into());
        let factor = BigRational::new(49.into(), 50.into());
        let msr = &twin * num_traits::pow(factor, l2 as usize);
        r.s_twin.as_ref() == Some(&twin) && r.s_msr.as_ref() == Some(&msr) && twin > msr
    });
    let first = &rows[0];
    let spot = int(&first.s_twin) == Some(2350) && int(&first.s_msr) == Some(47 * 49);
    let last = rows.last().unwrap();
    outcome(
        rows.len() == 47 && ok && spot,
        format!(
            "{} rows l2=1..47, l2=1: twin {} msr {}; l2=47: msr {}",
            rows.len(),
            int(&first.s_twin).unwrap_or(-1),
            int(&first.s_msr).unwrap_or(-1),
            twincode::bounds::format_rational(last.s_msr.as_ref().unwrap())
        ),
    )
}

fn c8_brute_force_oracle() -> Outcome {
    let mut checked = 0;
    let mut worst = 0.0f64;
    for q in [2u64, 3] {
        for style in [GeneratorStyle::Vandermonde, GeneratorStyle::Systematic] {
            let n = q as usize;
            let config = TwinConfig::with_style(style, q, n, n, 2).unwrap();
            let field = config.field();
            for (l1, l2) in [(0, 0), (1, 0), (0, 1)] {
                let layout = SecureLayout::new(field, &random_symbols(field, 2 * (2 - l1 - l2), 5), 2, l1, l2, 6).unwrap();
                let nodes: Vec<NodeId> = config.all_nodes().collect();
                let mut specs = vec![EavesdropperSpec::new(vec![], vec![])];
                for &id in &nodes {
                    specs.push(EavesdropperSpec::new(vec![id], vec![]));
                    specs.push(EavesdropperSpec::new(vec![], vec![id]));
                }
                for spec in specs {
                    let plans: Vec<RepairPlan> = spec
                        .e2
                        .iter()
                        .map(|&failed| RepairPlan {
                            failed,
                            helpers: vec![1, 2],
                        })
                        .collect();
                    let obs = build_observation(&config, &layout, &spec, &plans).unwrap();
                    let mi = brute_force_mi(obs.matrix(), field, layout.key_len()).unwrap();
                    let expected = leakage(&obs) as f64 * (q as f64).log2();
                    worst = worst.max((mi - expected).abs());
                    checked += 1;
                }
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("{checked} specs over q in {{2,3}}, max |MI - leakage*log2 q| = {worst:.1e} bits"),
    )
}

/// Every same-type spec `(e1, e2)` with `|e1| <= l1`, `|e2| <= l2`.
fn same_type_specs(config: &TwinConfig, t: NodeType, l1: usize, l2: usize, rng: &mut ChaCha8Rng) -> (Vec<EavesdropperSpec>, bool) {
    let n = config.n(t);
    let binom = |n: usize, r: usize| -> u128 { (0..r).fold(1u128, |a, i| a * (n - i) as u128 / (i + 1) as u128) };
    let count: u128 = (0..=l1).flat_map(|a| (0..=l2).map(move |b| (a, b))).map(|(a, b)| binom(n, a) * binom(n - a, b)).sum();
    let ids = |v: Vec<usize>| v.into_iter().map(|i| NodeId::new(t, i + 1)).collect::<Vec<_>>();
    if count <= 10_000 {
        let mut specs = Vec::new();
        for a in 0..=l1 {
            for e1 in (0..n).combinations(a) {
                let rest: Vec<usize> = (0..n).filter(|i| !e1.contains(i)).collect();
                for b in 0..=l2 {
                    for e2 in rest.iter().copied().combinations(b) {
                        specs.push(EavesdropperSpec::new(ids(e1.clone()), ids(e2)));
                    }
                }
            }
        }
        (specs, true)
    } else {
        let specs = (0..500)
            .map(|_| {
                let picked: Vec<usize> = sample(rng, n, l1 + l2).into_vec();
                EavesdropperSpec::new(ids(picked[..l1].to_vec()), ids(picked[l1..].to_vec()))
            })
            .collect();
        (specs, false)
    }
}

fn c9_same_type_secrecy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sets = [0usize; 2];
    let mut leaky = [0usize; 2];
    let mut worst = [0usize; 2];
    let mut sampled = 0;
    let mut first_leak: Option<String> = None;
    for q in [11u64, 101] {
        for k in 2..=6usize {
            let n = 2 * k - 1;
            let config = TwinConfig::with_style(GeneratorStyle::Vandermonde, q, n, n, k).unwrap();
            let field = config.field();
            for l1 in 0..k {
                for l2 in 0..k - l1 {
                    let payload = random_symbols(field, k * (k - l1 - l2), q ^ k as u64);
                    let layout = SecureLayout::new(field, &payload, k, l1, l2, 31).unwrap();
                    assert_eq!(layout.payload().len(), k * (k - l1 - l2));
                    for t in NodeType::BOTH {
                        let (specs, exhaustive) = same_type_specs(&config, t, l1, l2, &mut rng);
                        sampled += usize::from(!exhaustive);
                        for spec in specs {
                            let plans: Vec<RepairPlan> = spec
                                .e2
                                .iter()
                                .map(|&failed| RepairPlan {
                                    failed,
                                    helpers: (1..=k).collect(),
                                })
                                .collect();
                            let obs = build_observation(&config, &layout, &spec, &plans).unwrap();
                            let leak = leakage(&obs);
                            let slot = t.number() as usize - 1;
                            sets[slot] += 1;
                            if leak > 0 {
                                leaky[slot] += 1;
                                worst[slot] = worst[slot].max(leak);
                                first_leak.get_or_insert_with(|| {
                                    format!(
                                        "q={q} k={k} (l1,l2)=({l1},{l2}) e1=[{}] e2=[{}] leaks {leak}",
                                        spec.e1.iter().join(","),
                                        spec.e2.iter().join(",")
                                    )
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    let pass = leaky == [0, 0];
    let mut detail = format!(
        "Type 1: {} sets, {} leak; Type 2: {} sets, {} leak (max {}); {sampled} groups sampled",
        sets[0], leaky[0], sets[1], leaky[1], worst[1]
    );
    if let Some(example) = first_leak {
        detail.push_str(&format!("; first: {example}"));
    }
    outcome(pass, detail)
}

fn c10_mds_check() -> Outcome {
    let g1 = MdsCode::from_generator(worked_example::example_g1());
    let g2 = MdsCode::from_generator(worked_example::example_g2());
    let mut rows = worked_example::example_g2().to_rows();
    // make column 5 equal column 6
    rows[1][4] = 3;
    rows[2][4] = 4;
    let mutated = FieldMatrix::from_rows(
        PrimeField::new(11).unwrap(),
        &rows.iter().map(|r| r.iter().map(|&x| x as u64).collect::<Vec<_>>()).collect::<Vec<_>>(),
    )
    .unwrap();
    let m = MdsCode::from_generator(mutated);
    let show = |r: &Result<MdsCode, Error>| match r {
        Ok(_) => "accepted".to_string(),
        Err(e) => format!("rejected ({e})"),
    };
    outcome(
        g1.is_ok() && g2.is_ok() && matches!(m, Err(Error::NotMds { .. })),
        format!("G1 {}, G2 {}, mutated G2 {}", show(&g1), show(&g2), show(&m)),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 10] = [
        (1, "golden encode of the worked example", Duration::from_secs(1), c1_golden_encode),
        (2, "mixed and same-type storage views", Duration::from_secs(1), c2_mixed_and_same_type_views),
        (3, "storage plus repair view", Duration::from_secs(1), c3_repair_view),
        (4, "reconstruction and repair universality", Duration::from_secs(5), c4_universality),
        (5, "plain file sizes k=3..50", Duration::from_secs(1), c5_plain_sizes),
        (6, "secure MBR comparison at k=50", Duration::from_secs(1), c6_secure_mbr),
        (7, "secure MSR comparison at k=50, l1=2", Duration::from_secs(1), c7_secure_msr),
        (8, "rank leakage equals brute-force mutual information", Duration::from_secs(30), c8_brute_force_oracle),
        (9, "same-type sets leak nothing on Vandermonde systems", Duration::from_secs(60), c9_same_type_secrecy),
        (10, "exhaustive MDS check", Duration::from_secs(1), c10_mds_check),
    ];
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = out.pass && in_time;
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        let timing = if in_time {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!("{:.2}s over {}s budget", elapsed.as_secs_f64(), budget.as_secs())
        };
        println!("criterion {id:>2} {tag:<12} {name}: {} [{timing}]", out.detail);
        if pass {
            passed += 1;
        }
        if pass == known {
            unexpected.push(id);
        }
    }
    println!("acceptance: {passed}/10 pass, known failures {KNOWN_FAILURES:?}");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
