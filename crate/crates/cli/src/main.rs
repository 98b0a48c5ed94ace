//! `twincode` command-line driver.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage error (bad flags or
//! malformed input files).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use twincode::bounds::{comparison_series, series_csv, SeriesKind};
use twincode::eavesdrop::{build_observation, default_plans, format_functional, stored_functionals};
use twincode::secure::{random_symbols, secure_capacity_twin, LayoutDocument};
use twincode::sim::{run, Scenario};
use twincode::{
    encode_system, worked_example, EavesdropReport, EavesdropperSpec, Error, FieldMatrix, GeneratorDocument,
    GeneratorStyle, MdsCode, NodeId, NodeType, PrimeField, RepairPlan, SecureLayout, SystemSnapshot, TwinConfig,
    TwinSystem,
};

#[derive(Parser)]
#[command(name = "twincode", version, about = "Twin-MDS storage: encode, repair, eavesdrop, bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a comparison series as CSV.
    Bounds(BoundsArgs),
    /// Replay the 4x4 worked example and check it against golden values.
    DemoPaper(DemoArgs),
    /// Run a scenario file and write its JSON-lines log.
    Scenario(ScenarioArgs),
    /// Encode a payload and write the system state.
    Encode(EncodeArgs),
    /// Recover the payload from k same-type nodes of a state file.
    Reconstruct(ReconstructArgs),
    /// Fail and regenerate one node of a state file.
    Repair(RepairArgs),
    /// Report what an eavesdropper learns from a state file.
    Eavesdrop(EavesdropArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Fig5,
    Fig8,
    Fig9,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Largest k for fig5.
    #[arg(long, default_value_t = 50)]
    k_max: u64,
    /// Fixed k for fig8 and fig9.
    #[arg(long, default_value_t = 50)]
    k: u64,
    /// Fixed l1 for fig9.
    #[arg(long, default_value_t = 2)]
    l1: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    /// Generator JSON replacing G1.
    #[arg(long)]
    g1: Option<PathBuf>,
    /// Generator JSON replacing G2.
    #[arg(long)]
    g2: Option<PathBuf>,
    /// Seed for the key and payload values.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Systematic,
    Vandermonde,
    Explicit,
}

impl From<StyleArg> for GeneratorStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Systematic => GeneratorStyle::Systematic,
            StyleArg::Vandermonde => GeneratorStyle::Vandermonde,
            StyleArg::Explicit => GeneratorStyle::Explicit,
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "vandermonde")]
    style: StyleArg,
    /// Generator JSON for Type 1 (explicit style).
    #[arg(long)]
    g1: Option<PathBuf>,
    /// Generator JSON for Type 2 (explicit style).
    #[arg(long)]
    g2: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    l1: usize,
    #[arg(long, default_value_t = 0)]
    l2: usize,
    /// JSON array of payload symbols; drawn from the seed when absent.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "type")]
    node_type: u8,
    /// Comma-separated node indices; lowest live nodes when absent.
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RepairArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "type")]
    node_type: u8,
    #[arg(long)]
    index: usize,
    /// Comma-separated helper indices; lowest live helpers when absent.
    #[arg(long, value_delimiter = ',')]
    helpers: Vec<usize>,
    /// Updated state file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EavesdropArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Nodes whose storage is read, e.g. T1:1,T2:2.
    #[arg(long, value_delimiter = ',')]
    e1: Vec<NodeId>,
    /// Nodes whose repair downloads are observed.
    #[arg(long, value_delimiter = ',')]
    e2: Vec<NodeId>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(anyhow::Error),
    Domain(anyhow::Error),
}

type CmdResult = Result<u8, Failure>;

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn domain(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn domain(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Domain(e.into()))
    }
}

/// Saved by `encode`, read by the other state commands.
#[derive(serde::Serialize, serde::Deserialize)]
struct StateFile {
    system: SystemSnapshot,
    layout: LayoutDocument,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::DemoPaper(a) => cmd_demo(a),
        Command::Scenario(a) => cmd_scenario(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Repair(a) => cmd_repair(a),
        Command::Eavesdrop(a) => cmd_eavesdrop(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())).domain(),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout").domain(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).usage()
}

fn node_type(t: u8) -> Result<NodeType, Failure> {
    match t {
        1 => Ok(NodeType::One),
        2 => Ok(NodeType::Two),
        _ => Err(Failure::Usage(anyhow!("--type must be 1 or 2, got {t}"))),
    }
}

fn cmd_bounds(a: BoundsArgs) -> CmdResult {
    let kind = match a.kind {
        Kind::Fig5 => SeriesKind::fig5(a.k_max),
        Kind::Fig8 => SeriesKind::fig8(a.k),
        Kind::Fig9 => SeriesKind::fig9(a.k, a.l1),
    };
    let rows = comparison_series(kind).usage()?;
    emit(a.out.as_deref(), &series_csv(&rows).domain()?)?;
    Ok(0)
}

fn load_generator(path: &Path) -> Result<FieldMatrix, Failure> {
    let doc = GeneratorDocument::from_json(&read(path)?).usage()?;
    let field = PrimeField::new(doc.p).usage()?;
    let g = FieldMatrix::from_rows(field, &doc.generator).usage()?;
    if g.rows() != doc.k || g.cols() != doc.n {
        return Err(Failure::Usage(anyhow!(
            "{}: generator is {}x{}, header says {}x{}",
            path.display(),
            g.rows(),
            g.cols(),
            doc.k,
            doc.n
        )));
    }
    Ok(g)
}

struct Check {
    name: String,
    expected: String,
    got: String,
}

impl Check {
    fn new(name: impl Into<String>, expected: impl ToString, got: impl ToString) -> Self {
        Check {
            name: name.into(),
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    fn pass(&self) -> bool {
        self.expected == self.got
    }
}

fn mds_status(g: &FieldMatrix) -> String {
    match MdsCode::from_generator(g.clone()) {
        Ok(_) => "MDS".into(),
        Err(Error::NotMds { columns }) => format!("NotMds {columns:?}"),
        Err(e) => e.to_string(),
    }
}

fn cmd_demo(a: DemoArgs) -> CmdResult {
    let g1 = match &a.g1 {
        Some(p) => load_generator(p)?,
        None => worked_example::example_g1(),
    };
    let g2 = match &a.g2 {
        Some(p) => load_generator(p)?,
        None => worked_example::example_g2(),
    };
    let mut checks = vec![
        Check::new("G1 all-minors check", "MDS", mds_status(&g1)),
        Check::new("G2 all-minors check", "MDS", mds_status(&g2)),
    ];

    // the remaining checks run on the generators as given
    let config = MdsCode::from_generator_unchecked(g1)
        .and_then(|c1| TwinConfig::new(c1, MdsCode::from_generator_unchecked(g2)?))
        .usage()?;
    if config.k() != worked_example::K || config.field().modulus() as u64 != worked_example::Q {
        return Err(Failure::Usage(anyhow!("demo generators must be 4 x n over F_11")));
    }
    let layout = worked_example::layout(a.seed);
    let system = encode_system(&config, layout.matrix()).domain()?;

    let mut matched = 0;
    for (t, i, cells) in worked_example::NODE_TABLE {
        let id = NodeId::new(t, i);
        if config.check_node(id).is_err() {
            continue;
        }
        let rows = stored_functionals(&config, id).domain()?;
        let stored = system.node(id).domain()?.symbols.clone().unwrap_or_default();
        for (s, cell) in cells.iter().enumerate() {
            let value = config.field().dot(&rows[s], &layout.source());
            if format_functional(&rows[s], &layout) == worked_example::plain_cell(cell) && stored.get(s) == Some(&value) {
                matched += 1;
            }
        }
    }
    checks.push(Check::new("stored symbols matching the table", 44, matched));

    let report = |e1: Vec<NodeId>, e2: Vec<NodeId>, plans: Vec<RepairPlan>| -> Result<EavesdropReport, Failure> {
        let spec = EavesdropperSpec::new(e1, e2);
        let obs = build_observation(&config, &layout, &spec, &plans).domain()?;
        Ok(EavesdropReport::new(&config, &layout, &spec, &plans, &obs))
    };
    let mixed = report(vec![NodeId::one(1), NodeId::two(2)], vec![], vec![])?;
    checks.push(Check::new("T1:1 + T2:2 independent symbols", 7, mixed.rank));
    checks.push(Check::new("T1:1 + T2:2 leakage", 2, mixed.leakage));
    checks.push(Check::new(
        "T1:1 + T2:2 revealed",
        "r1,r2,r3,r4,r6,a10,a14",
        mixed.revealed.join(","),
    ));
    let same = report(vec![NodeId::one(2), NodeId::one(3)], vec![], vec![])?;
    checks.push(Check::new("T1:2 + T1:3 independent symbols", 8, same.rank));
    checks.push(Check::new("T1:2 + T1:3 leakage", 4, same.leakage));
    let keys = report(vec![NodeId::one(1), NodeId::one(2)], vec![], vec![])?;
    checks.push(Check::new("T1:1 + T1:2 leakage", 0, keys.leakage));

    let mut repaired = system.clone();
    repaired.fail(NodeId::two(2)).domain()?;
    let out = repaired.repair(NodeId::two(2), &[1, 3, 4, 5]).domain()?;
    checks.push(Check::new("repair T2:2 from T1 {1,3,4,5}: symbols", 4, out.symbols_transferred()));
    checks.push(Check::new("repair T2:2 restores content", true, repaired == system));
    let plan = RepairPlan {
        failed: NodeId::two(2),
        helpers: vec![1, 3, 4, 5],
    };
    let watched = report(vec![NodeId::two(1)], vec![NodeId::two(2)], vec![plan])?;
    checks.push(Check::new("T2:1 stored + T2:2 repair independent symbols", 8, watched.rank));
    checks.push(Check::new("T2:1 stored + T2:2 repair leaks under 8", true, watched.leakage < 8));

    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut failed = 0;
    for c in &checks {
        let tag = if c.pass() { "PASS" } else { "FAIL" };
        failed += usize::from(!c.pass());
        println!("{tag}  {:<width$}  expected {}, got {}", c.name, c.expected, c.got);
    }
    println!("{} checks, {failed} failed", checks.len());
    Ok(u8::from(failed > 0))
}

fn cmd_scenario(a: ScenarioArgs) -> CmdResult {
    let scenario = Scenario::from_json(&read(&a.input)?).usage()?;
    let log = match run(&scenario) {
        Ok(log) => log,
        Err(e @ Error::MalformedScenario(_)) => return Err(Failure::Usage(e.into())),
        Err(e) => return Err(Failure::Domain(e.into())),
    };
    emit(a.out.as_deref(), &log.to_jsonl())?;
    Ok(u8::from(log.has_errors()))
}

fn cmd_encode(a: EncodeArgs) -> CmdResult {
    let field = PrimeField::new(a.q).usage()?;
    let style = GeneratorStyle::from(a.style);
    let code = |n: usize, g: &Option<PathBuf>, which: &str| -> Result<MdsCode, Failure> {
        match (style, g) {
            (GeneratorStyle::Explicit, Some(p)) => {
                let m = load_generator(p)?;
                if m.rows() != a.k || m.cols() != n {
                    return Err(Failure::Usage(anyhow!("{which} must be {}x{n}", a.k)));
                }
                MdsCode::from_generator(m).domain()
            }
            (GeneratorStyle::Explicit, None) => Err(Failure::Usage(anyhow!("--style explicit needs --{which}"))),
            (s, _) => MdsCode::with_style(s, n, a.k, field).usage(),
        }
    };
    let config = TwinConfig::new(code(a.n1, &a.g1, "g1")?, code(a.n2, &a.g2, "g2")?).usage()?;
    let len = secure_capacity_twin(a.k, a.l1, a.l2).usage()?;
    let payload: Vec<u32> = match &a.input {
        Some(p) => {
            let raw: Vec<u64> = serde_json::from_str(&read(p)?).context("payload must be a JSON array").usage()?;
            raw.into_iter().map(|v| field.reduce(v)).collect()
        }
        None => random_symbols(field, len, a.seed.wrapping_add(1)),
    };
    let layout = SecureLayout::new(field, &payload, a.k, a.l1, a.l2, a.seed).usage()?;
    let system = encode_system(&config, layout.matrix()).domain()?;
    if !config.meets_recommended_connectivity() {
        eprintln!("warning: n1 or n2 is below the recommended 2k-1 = {}", 2 * a.k - 1);
    }
    save_state(a.out.as_deref(), &system, &layout)?;
    Ok(0)
}

fn save_state(out: Option<&Path>, system: &TwinSystem, layout: &SecureLayout) -> Result<(), Failure> {
    let state = StateFile {
        system: system.snapshot(),
        layout: layout.to_document(),
    };
    let mut text = serde_json::to_string_pretty(&state).context("serializing state").domain()?;
    text.push('\n');
    emit(out, &text)
}

fn load_state(path: &Path) -> Result<(TwinSystem, SecureLayout), Failure> {
    let state: StateFile = serde_json::from_str(&read(path)?)
        .with_context(|| format!("{} is not a state file", path.display()))
        .usage()?;
    let system = TwinSystem::from_snapshot(&state.system).usage()?;
    let layout = state.layout.into_layout().usage()?;
    if layout.k() != system.config().k() {
        return Err(Failure::Usage(anyhow!("layout and system disagree on k")));
    }
    Ok((system, layout))
}

fn cmd_reconstruct(a: ReconstructArgs) -> CmdResult {
    let (system, layout) = load_state(&a.input)?;
    let t = node_type(a.node_type)?;
    let k = system.config().k();
    let nodes = if a.nodes.is_empty() {
        system
            .lowest_live(t, k)
            .ok_or_else(|| Failure::Domain(anyhow!("fewer than {k} live Type {} nodes", t.number())))?
    } else {
        a.nodes
    };
    let recovered = system.reconstruct(t, &nodes).domain()?;
    let payload = layout.extract_payload(&recovered);
    let doc = json!({
        "type": t.number(),
        "nodes": nodes,
        "symbols": k * k,
        "payload": payload,
        "matches_original": payload == layout.payload(),
    });
    emit(a.out.as_deref(), &format!("{doc}\n"))?;
    Ok(0)
}

fn cmd_repair(a: RepairArgs) -> CmdResult {
    let (mut system, layout) = load_state(&a.input)?;
    let id = NodeId::new(node_type(a.node_type)?, a.index);
    system.config().check_node(id).usage()?;
    let before = system.node(id).domain()?.symbols.clone();
    system.fail(id).domain()?;
    let k = system.config().k();
    let opp = id.node_type.opposite();
    let helpers = if a.helpers.is_empty() {
        system.lowest_live(opp, k).ok_or_else(|| {
            Failure::Domain(anyhow!(
                "RepairStarvation: {} live Type {} nodes, need {k}",
                system.live_nodes(opp).len(),
                opp.number()
            ))
        })?
    } else {
        a.helpers
    };
    let out = system.repair(id, &helpers).domain()?;
    let doc = json!({
        "node": id,
        "helpers": helpers,
        "shares": out.shares,
        "symbols": out.symbols_transferred(),
        "content": out.content.symbols,
        "matches_previous": before.is_none() || before == out.content.symbols,
    });
    match &a.out {
        Some(p) => {
            save_state(Some(p), &system, &layout)?;
            println!("{doc}");
        }
        None => println!("{doc}"),
    }
    Ok(0)
}

fn cmd_eavesdrop(a: EavesdropArgs) -> CmdResult {
    let (system, layout) = load_state(&a.input)?;
    let spec = EavesdropperSpec::new(a.e1, a.e2);
    if let Err(e) = spec.validate(system.config()) {
        bail_usage(e)?;
    }
    let plans = default_plans(&system, &spec).domain()?;
    let obs = build_observation(system.config(), &layout, &spec, &plans).domain()?;
    let report = EavesdropReport::new(system.config(), &layout, &spec, &plans, &obs);
    emit(a.out.as_deref(), &format!("{}\n", report.to_json()))?;
    Ok(0)
}

fn bail_usage(e: Error) -> Result<(), Failure> {
    let wrapped: anyhow::Result<()> = Err(e.into());
    wrapped.context("invalid eavesdropper").usage()
}

