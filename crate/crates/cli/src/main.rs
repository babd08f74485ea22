//! `sfqmap`: map, verify, inspect and sweep SFQ circuits.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sfqmap::netlist::{parse_json, parse_netlist, Network};
use sfqmap::phase::{build_phase_model, build_stage_bounds, PhaseError, StageAssignment};
use sfqmap::report::{emit_dot, emit_netlist, emit_report_json, CostTable};
use sfqmap::solver::{dump_model, SolverBudget};
use sfqmap::verify::{check_annotation, verify_timing};
use sfqmap::{
    decompose, map_network, MappedCircuit, MappingConfig, ObjectiveMode, OrStyle, PipelineError, SfqNetwork,
    SpacingMode,
};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "sfqmap", version, about = "Multiphase SFQ technology mapper")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Map a BLIF or JSON netlist and write the requested artifacts.
    Map(MapArgs),
    /// Check an annotated mapped netlist.
    Verify {
        input: PathBuf,
    },
    /// Print gate statistics of a netlist.
    Stats {
        input: PathBuf,
        #[arg(long, value_parser = parse_or_style, default_value = "merger")]
        or_style: OrStyle,
    },
    /// Map once per phase count and tabulate the results.
    Sweep {
        #[command(flatten)]
        map: MapArgs,
        /// Comma-separated phase counts.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,7")]
        phase_list: Vec<u32>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Dot,
    Json,
    Netlist,
    All,
}

fn parse_objective(s: &str) -> Result<ObjectiveMode, String> {
    s.parse().map_err(|e: sfqmap::decompose::ParseEnumError| e.0)
}

fn parse_or_style(s: &str) -> Result<OrStyle, String> {
    s.parse().map_err(|e: sfqmap::decompose::ParseEnumError| e.0)
}

fn parse_spacing(s: &str) -> Result<SpacingMode, String> {
    s.parse().map_err(|e: sfqmap::decompose::ParseEnumError| e.0)
}

#[derive(Args, Debug, Clone)]
struct MapArgs {
    input: PathBuf,
    /// Directory for artifacts.
    #[arg(short, long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    phases: u32,
    #[arg(long, value_parser = parse_objective, default_value = "gate-max")]
    objective: ObjectiveMode,
    #[arg(long, value_parser = parse_or_style, default_value = "merger")]
    or_style: OrStyle,
    #[arg(long, value_parser = parse_spacing, default_value = "window")]
    spacing: SpacingMode,
    /// Wall-clock limit of the phase solve, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Search-node limit for every solve; replaces wall-clock limits.
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON cost table; defaults to $SFQMAP_COST_TABLE or the bundled table.
    #[arg(long)]
    cost_table: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json")]
    emit: Vec<Emit>,
    /// Worker threads for DFF insertion (default: all processors).
    #[arg(long)]
    threads: Option<usize>,
    /// Write the phase-assignment model as text.
    #[arg(long)]
    dump_models: bool,
    /// Include per-step wall times in the report.
    #[arg(long)]
    report_timings: bool,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Phase(
                PhaseError::Infeasible | PhaseError::NoSolution | PhaseError::InfeasibleBounds(_) | PhaseError::Model(_),
            )
            | PipelineError::Dff(_) => EXIT_SOLVER,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<Network, Failure> {
    let text = read(path)?;
    let mut net = parse_netlist(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    if net.name().is_empty() {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        net.set_name(stem);
    }
    Ok(net)
}

fn config(args: &MapArgs, n: u32) -> Result<MappingConfig, Failure> {
    let mut cfg = MappingConfig::new(n);
    cfg.objective = args.objective;
    cfg.or_style = args.or_style;
    cfg.spacing = args.spacing;
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    if let Some(t) = args.time_limit {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::usage("--time-limit must be a positive number of seconds"));
        }
        cfg.phase_budget = SolverBudget::seconds(t);
    }
    if let Some(nodes) = args.node_limit {
        cfg = cfg.with_node_limits(nodes, nodes);
    }
    cfg.cost_table = match &args.cost_table {
        Some(p) => CostTable::load(p),
        None => CostTable::from_env(),
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

fn wants(args: &MapArgs, e: Emit) -> bool {
    args.emit.contains(&e) || args.emit.contains(&Emit::All)
}

fn write_artifacts(args: &MapArgs, cfg: &MappingConfig, net: &Network, m: &MappedCircuit, suffix: &str) -> Result<(), Failure> {
    fs::create_dir_all(&args.out_dir).map_err(|e| Failure::usage(format!("{}: {e}", args.out_dir.display())))?;
    let base = format!("{}{suffix}", m.sfq.net.name());
    let path = |ext: &str| args.out_dir.join(format!("{base}.{ext}"));
    if wants(args, Emit::Json) {
        write(&path("report.json"), &emit_report_json(&m.report(cfg, args.report_timings)))?;
    }
    if wants(args, Emit::Dot) {
        write(&path("dot"), &emit_dot(&m.sfq, &m.stages))?;
    }
    if wants(args, Emit::Netlist) {
        write(&path("mapped.json"), &emit_netlist(&m.sfq, &m.stages))?;
    }
    if args.dump_models {
        let sfq = decompose(net, cfg.or_style).map_err(|e| Failure::usage(e.to_string()))?;
        let bounds = build_stage_bounds(&sfq, cfg.n).map_err(|e| Failure::usage(e.to_string()))?;
        let pm = build_phase_model(&sfq, cfg.n, cfg.objective, &bounds).map_err(|e| Failure::usage(e.to_string()))?;
        write(&path("phase.model"), &dump_model(&pm.model))?;
    }
    Ok(())
}

/// Exit code of a finished mapping: solver status first, then verification.
fn outcome(m: &MappedCircuit) -> u8 {
    if !m.status().has_solution() {
        EXIT_SOLVER
    } else if !m.validation.ok() {
        EXIT_VERIFY
    } else {
        0
    }
}

fn summary(m: &MappedCircuit, n: u32) -> String {
    format!(
        "{}: phases={} dff={} splitters={} jj={} status={} verified={}",
        m.sfq.net.name(),
        n,
        m.dff_count(),
        m.splitters.splitter_count(),
        m.jj_count,
        m.status().name(),
        m.validation.ok()
    )
}

fn run_map(args: &MapArgs) -> Result<u8, Failure> {
    let net = load_network(&args.input)?;
    let cfg = config(args, args.phases)?;
    let m = map_network(&net, &cfg)?;
    write_artifacts(args, &cfg, &net, &m, "")?;
    println!("{}", summary(&m, cfg.n));
    if !m.validation.ok() {
        eprintln!("{}", m.validation);
    }
    Ok(outcome(&m))
}

fn run_sweep(args: &MapArgs, phases: &[u32]) -> Result<u8, Failure> {
    if phases.is_empty() || phases.contains(&0) {
        return Err(Failure::usage("--phase-list needs phase counts of at least 1"));
    }
    let net = load_network(&args.input)?;
    let mut rows = Vec::new();
    let mut csv = String::from("n,dff_count,splitter_count,jj_count,status,verified\n");
    let mut code = 0;
    for &n in phases {
        let cfg = config(args, n)?;
        let (row, c) = match map_network(&net, &cfg) {
            Ok(m) => {
                write_artifacts(args, &cfg, &net, &m, &format!(".n{n}"))?;
                println!("{}", summary(&m, n));
                let row = json!({
                    "n": n,
                    "dff_count": m.dff_count(),
                    "splitter_count": m.splitters.splitter_count(),
                    "jj_count": m.jj_count,
                    "status": m.status().name(),
                    "verified": m.validation.ok(),
                });
                (row, outcome(&m))
            }
            Err(e) => {
                let f = Failure::from(e);
                eprintln!("n={n}: {}", f.message);
                let row = json!({ "n": n, "status": "error", "error": f.message });
                (row, f.code)
            }
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            n,
            row["dff_count"].as_u64().map_or(String::new(), |v| v.to_string()),
            row["splitter_count"].as_u64().map_or(String::new(), |v| v.to_string()),
            row["jj_count"].as_u64().map_or(String::new(), |v| v.to_string()),
            row["status"].as_str().unwrap_or(""),
            row["verified"].as_bool().map_or(String::new(), |v| v.to_string()),
        ));
        rows.push(row);
        code = code.max(c);
    }
    let table = json!({ "circuit": net.name(), "rows": rows });
    let mut text = serde_json::to_string_pretty(&table).expect("table serializes");
    text.push('\n');
    fs::create_dir_all(&args.out_dir).map_err(|e| Failure::usage(format!("{}: {e}", args.out_dir.display())))?;
    write(&args.out_dir.join(format!("{}.sweep.json", net.name())), &text)?;
    write(&args.out_dir.join(format!("{}.sweep.csv", net.name())), &csv)?;
    Ok(code)
}

fn run_verify(input: &Path) -> Result<u8, Failure> {
    let text = read(input)?;
    let (net, ann) = parse_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", input.display())))?;
    let ann = ann.ok_or_else(|| Failure::usage("netlist has no stage annotations"))?;
    let sigma = ann
        .stages()
        .ok_or_else(|| Failure::usage("every gate needs a stage annotation"))?;
    let sfq = SfqNetwork::from_network(net).map_err(|e| Failure::usage(e.to_string()))?;
    let mut report = check_annotation(&ann);
    report
        .violations
        .extend(verify_timing(&sfq, &StageAssignment::new(ann.phases, sigma)).violations);
    if report.ok() {
        println!("{}: ok", sfq.net.name());
        Ok(0)
    } else {
        println!("{}: {} violations", sfq.net.name(), report.violations.len());
        println!("{report}");
        Ok(EXIT_VERIFY)
    }
}

fn run_stats(input: &Path, or_style: OrStyle) -> Result<u8, Failure> {
    let net = load_network(input)?;
    let sfq = decompose(&net, or_style).map_err(|e| Failure::usage(e.to_string()))?;
    let bounds = build_stage_bounds(&sfq, 1).map_err(|e| Failure::usage(e.to_string()))?;
    let stats = json!({
        "circuit": net.name(),
        "inputs": net.primary_inputs().len(),
        "outputs": net.primary_outputs().len(),
        "gates": sfqmap::report::gate_counts(&net),
        "sfq_gates": sfqmap::report::gate_counts(&sfq.net),
        "clocked_depth": bounds.clocked_depth,
    });
    println!("{}", serde_json::to_string_pretty(&stats).expect("stats serialize"));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Map(args) => run_map(args),
        Command::Verify { input } => run_verify(input),
        Command::Stats { input, or_style } => run_stats(input, *or_style),
        Command::Sweep { map, phase_list } => run_sweep(map, phase_list),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
