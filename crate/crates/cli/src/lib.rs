//! Command-line surface: solve / oracle / verify / generate / simulate over
//! JSON instance and mechanism files.
//!
//! Exit codes: 0 success (and IC for `verify`), 1 verification failure,
//! 2 bad arguments, 3 file or parse errors, 4 solver failure.

pub mod files;

use clap::{Args, Parser, Subcommand, ValueEnum};
use files::{to_canonical_json, InstanceFile, MechanismFile};
use serde_json::json;
use sigpact::gen;
use sigpact::model::{check_ic, principal_utility, Instance, Mechanism};
use sigpact::oracle::{ContractGrid, KUniformParams};
use sigpact::{Error, SolveReport};
use std::io::Read;
use std::path::PathBuf;

const EXIT_OK: i32 = 0;
const EXIT_VERIFY_FAILED: i32 = 1;
const EXIT_BAD_ARGS: i32 = 2;
const EXIT_PARSE: i32 = 3;
const EXIT_SOLVER: i32 = 4;

#[derive(Parser)]
#[command(name = "sigpact", version, about = "Joint design of signaling schemes and contracts", max_term_width = 100)]
struct Cli {
    /// Emit one machine-readable JSON document on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel solvers (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance with one of the design pipelines.
    Solve(SolveArgs),
    /// Brute-force lattice baselines for explicit contracts.
    Oracle(OracleArgs),
    /// Check a mechanism's incentive compatibility and report its utility.
    Verify(VerifyArgs),
    /// Generate a named instance and write it as JSON.
    Generate(GenerateArgs),
    /// Monte Carlo estimate of a mechanism's expected utility.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMode {
    Amb,
    LinearSingle,
    LinearMenu,
    Kuniform,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    mode: SolveMode,
    /// Instance file; `-` reads stdin.
    #[arg(long)]
    instance: PathBuf,
    /// Target additive gap for `amb`.
    #[arg(long)]
    zeta: Option<f64>,
    /// Grid step for the linear modes.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Support-sample count for `kuniform`.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Payment bound for `kuniform`.
    #[arg(long)]
    bound: Option<f64>,
    /// Write the solved mechanism to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMode {
    Single,
    Menu,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    mode: OracleMode,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    grid_step: f64,
    #[arg(long)]
    bound: f64,
    /// Enumeration refusal threshold (lattice points / signals).
    #[arg(long)]
    budget: Option<u128>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    mechanism: PathBuf,
    #[arg(long)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenerateKind {
    Prop2,
    Prop4,
    MenuHard,
    SingleHard,
    Random,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: GenerateKind,
    /// Prior weight of each minority state (prop4).
    #[arg(long)]
    delta: Option<f64>,
    /// Graph file for the reduction constructions; `-` reads stdin.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Actions (random).
    #[arg(long)]
    n: Option<usize>,
    /// Outcomes (random).
    #[arg(long)]
    m: Option<usize>,
    /// States (random).
    #[arg(long)]
    num_states: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reward_bound: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    mechanism: PathBuf,
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    seed: u64,
}

/// Formats with 12 significant digits for human-readable output.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn parse(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_PARSE, message: msg.into() }
    }
    fn solver(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_SOLVER, message: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::solver(e.to_string())
    }
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::parse(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::parse(format!("reading {}: {e}", path.display())))
    }
}

fn load_instance(path: &PathBuf) -> Result<Instance, Failure> {
    let text = read_input(path)?;
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("parsing {}: {e}", path.display())))?;
    file.into_instance().map_err(Failure::parse)
}

fn load_mechanism(path: &PathBuf, inst: &Instance) -> Result<Mechanism, Failure> {
    let text = read_input(path)?;
    let file: MechanismFile = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("parsing {}: {e}", path.display())))?;
    file.into_mechanism(inst).map_err(Failure::parse)
}

fn write_output(path: Option<&PathBuf>, contents: &str) -> Result<(), Failure> {
    match path {
        None => {
            print!("{contents}");
            Ok(())
        }
        Some(p) if p.as_os_str() == "-" => {
            print!("{contents}");
            Ok(())
        }
        Some(p) => std::fs::write(p, contents)
            .map_err(|e| Failure::parse(format!("writing {}: {e}", p.display()))),
    }
}

fn report_json(
    inst: &Instance,
    report: &SolveReport,
    extra: serde_json::Value,
) -> serde_json::Value {
    let d = &report.diagnostics;
    let mut doc = json!({
        "utility": report.utility,
        "lp_value": d.lp_value,
        "residual_ic": d.residual_ic,
        "scaled_bound": d.scaled_bound,
        "params": d.params.iter().map(|(k, v)| json!({"name": k, "value": v})).collect::<Vec<_>>(),
        "mechanism": MechanismFile::from_mechanism(inst, &report.mechanism),
    });
    if !d.grid_values.is_empty() {
        doc["grid_values"] = json!(d
            .grid_values
            .iter()
            .map(|(a, v)| json!([a, v]))
            .collect::<Vec<_>>());
    }
    if let serde_json::Value::Object(extra) = extra {
        for (k, v) in extra {
            doc[k] = v;
        }
    }
    doc
}

fn print_report_text(report: &SolveReport) {
    let d = &report.diagnostics;
    if let Some(lp) = d.lp_value {
        println!("lp value: {}", sig12(lp));
    }
    println!("utility: {}", sig12(report.utility));
    println!("residual ic violation: {}", sig12(d.residual_ic));
    for (k, v) in &d.params {
        println!("{k}: {}", sig12(*v));
    }
    if d.scaled_bound {
        println!("note: loss bounds scaled by max(1, bound_c) for unnormalized data");
    }
}

fn cmd_solve(args: &SolveArgs, json: bool) -> Result<i32, Failure> {
    let inst = load_instance(&args.instance)?;
    let (mode_name, report) = match args.mode {
        SolveMode::Amb => {
            let zeta = args.zeta.ok_or(Failure {
                code: EXIT_BAD_ARGS,
                message: "--zeta is required for --mode amb".into(),
            })?;
            ("amb", sigpact::amb::solve_amb(&inst, zeta)?)
        }
        SolveMode::LinearSingle => {
            let eps = args.epsilon.ok_or(Failure {
                code: EXIT_BAD_ARGS,
                message: "--epsilon is required for --mode linear-single".into(),
            })?;
            ("linear-single", sigpact::linear::solve_single_linear(&inst, eps)?)
        }
        SolveMode::LinearMenu => {
            let eps = args.epsilon.ok_or(Failure {
                code: EXIT_BAD_ARGS,
                message: "--epsilon is required for --mode linear-menu".into(),
            })?;
            ("linear-menu", sigpact::linear::solve_menu_linear(&inst, eps)?)
        }
        SolveMode::Kuniform => {
            let k = args.k.ok_or(Failure {
                code: EXIT_BAD_ARGS,
                message: "--K is required for --mode kuniform".into(),
            })?;
            let bound = args.bound.ok_or(Failure {
                code: EXIT_BAD_ARGS,
                message: "--bound is required for --mode kuniform".into(),
            })?;
            let params = KUniformParams::new(k, bound, 0.1)?;
            ("kuniform", sigpact::oracle::solve_kuniform(&inst, &params)?)
        }
    };
    if let Some(out) = &args.out {
        let file = MechanismFile::from_mechanism(&inst, &report.mechanism);
        write_output(Some(out), &to_canonical_json(&file))?;
    }
    if json {
        let doc = report_json(&inst, &report, json!({"command": "solve", "mode": mode_name}));
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    } else {
        println!("mode: {mode_name}");
        print_report_text(&report);
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(args: &OracleArgs, json: bool) -> Result<i32, Failure> {
    let inst = load_instance(&args.instance)?;
    let mut grid = ContractGrid::new(args.grid_step, args.bound)?;
    if let Some(budget) = args.budget {
        grid = grid.with_budget(budget);
    }
    let (mode_name, report) = match args.mode {
        OracleMode::Single => ("single", sigpact::oracle::oracle_single(&inst, &grid)?),
        OracleMode::Menu => ("menu", sigpact::oracle::oracle_menu(&inst, &grid)?),
    };
    if let Some(out) = &args.out {
        let file = MechanismFile::from_mechanism(&inst, &report.mechanism);
        write_output(Some(out), &to_canonical_json(&file))?;
    }
    if json {
        let doc = report_json(&inst, &report, json!({"command": "oracle", "mode": mode_name}));
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    } else {
        println!("mode: oracle-{mode_name}");
        print_report_text(&report);
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, json: bool) -> Result<i32, Failure> {
    let inst = load_instance(&args.instance)?;
    let mech = load_mechanism(&args.mechanism, &inst)?;
    let report = check_ic(&inst, &mech, args.tol)?;
    let utility = principal_utility(&inst, &mech)?;
    let ic = report.is_ic(args.tol);
    if json {
        let doc = json!({
            "command": "verify",
            "ic": ic,
            "ir_ok": report.ir_ok,
            "max_violation": report.max_violation,
            "utility": utility,
            "per_signal": report.per_signal.iter().map(|s| json!({
                "signal": s.signal_id,
                "recommended": inst.action_ids[s.recommended],
                "worst_deviation": inst.action_ids[s.worst_deviation],
                "slack": s.slack,
                "agent_utility": s.agent_utility,
            })).collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    } else {
        println!("utility: {}", sig12(utility));
        println!("max violation: {}", sig12(report.max_violation));
        println!("ir ok: {}", report.ir_ok);
        println!("ic at tol {}: {}", args.tol, ic);
        for s in &report.per_signal {
            println!(
                "  signal {}: recommended {} worst-deviation {} slack {}",
                s.signal_id,
                inst.action_ids[s.recommended],
                inst.action_ids[s.worst_deviation],
                sig12(s.slack)
            );
        }
    }
    Ok(if ic { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_generate(args: &GenerateArgs) -> Result<i32, Failure> {
    let inst = match args.kind {
        GenerateKind::Prop2 => gen::gen_prop2(),
        GenerateKind::Prop4 => gen::gen_prop4(args.delta.unwrap_or(0.1))?,
        GenerateKind::MenuHard => {
            let path = args.graph.as_ref().ok_or(Failure {
                code: EXIT_BAD_ARGS,
                message: "--graph is required for --kind menu-hard".into(),
            })?;
            let g = gen::Graph::parse(&read_input(path)?)
                .map_err(|e| Failure::parse(e.to_string()))?;
            gen::gen_menu_hardness(&g)?
        }
        GenerateKind::SingleHard => {
            let path = args.graph.as_ref().ok_or(Failure {
                code: EXIT_BAD_ARGS,
                message: "--graph is required for --kind single-hard".into(),
            })?;
            let g = gen::Graph::parse(&read_input(path)?)
                .map_err(|e| Failure::parse(e.to_string()))?;
            gen::gen_single_hardness(&g)?
        }
        GenerateKind::Random => gen::gen_random(
            args.n.unwrap_or(3),
            args.m.unwrap_or(3),
            args.num_states.unwrap_or(3),
            args.seed.unwrap_or(0),
            args.reward_bound.unwrap_or(1.0),
        )?,
    };
    let file = InstanceFile::from_instance(&inst).map_err(Failure::solver)?;
    write_output(args.out.as_ref(), &to_canonical_json(&file))?;
    Ok(EXIT_OK)
}

fn cmd_simulate(args: &SimulateArgs, json: bool) -> Result<i32, Failure> {
    let inst = load_instance(&args.instance)?;
    let mech = load_mechanism(&args.mechanism, &inst)?;
    let (mean, stderr) = sigpact::oracle::simulate(&inst, &mech, args.samples, args.seed)?;
    if json {
        let doc = json!({
            "command": "simulate",
            "mean": mean,
            "stderr": stderr,
            "samples": args.samples,
            "seed": args.seed,
        });
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    } else {
        println!("mean: {}", sig12(mean));
        println!("stderr: {}", sig12(stderr));
    }
    Ok(EXIT_OK)
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses exit code 2 for usage errors and 0 for --help.
            let code = if e.exit_code() == 0 { EXIT_OK } else { EXIT_BAD_ARGS };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        // Ignore failure: the global pool can only be installed once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args, cli.json),
        Command::Oracle(args) => cmd_oracle(args, cli.json),
        Command::Verify(args) => cmd_verify(args, cli.json),
        Command::Generate(args) => cmd_generate(args),
        Command::Simulate(args) => cmd_simulate(args, cli.json),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
