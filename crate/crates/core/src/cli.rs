//! The `mpshl` command line. `run` returns the process exit code:
//! 0 success, 1 failed verification (or other failure), 2 usage,
//! 3 input/output or parse error, 4 a size cap was exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dmrg::{sweep, DmrgOptions};
use crate::error::{Error, Result};
use crate::frontends::{clique_to_bqp, independent_set_to_bqp, parse_dimacs, parse_qubo};
use crate::hamiltonian::ChainHamiltonian;
use crate::io::{parse_bqp_json, read_instance, write_instance};
use crate::mps::{capped_profile, random_mps, DEFAULT_DENSE_CAP};
use crate::oracles::{
    dense_ground_energy, fixed_gauge_check, verify_indicator_family, windows_decomposition_check,
    IndicatorCheckOptions, OracleReport,
};
use crate::reduction::{assemble_instance, solve_instance, AssemblyOptions, BqpInstance, BqpSource, SolveMode, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mpshl", version, about = "MPS variational toolkit and BQP-to-chain reduction")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "MPSHL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Gauge tolerance for verification and energy tolerance for sweeps.
    #[arg(long, global = true, env = "MPSHL_TOL", default_value_t = 1e-12)]
    pub tol: f64,
    /// Largest dense vector or matrix dimension the dense oracles may build.
    #[arg(long = "dense-cap", global = true, env = "MPSHL_DENSE_CAP", default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
    /// Machine-readable output.
    #[arg(long, global = true, env = "MPSHL_JSON")]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a graph or QUBO file into a reduction instance.
    Reduce(ReduceArgs),
    /// Run the gauge, indicator and window checks on an instance.
    Verify(VerifyArgs),
    /// Ground-state sweeps on a model chain.
    Sweep(SweepArgs),
    /// Solve the BQP encoded by an instance.
    Solve(SolveArgs),
    /// Summarize an instance.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Auto,
    Dimacs,
    Qubo,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphProblem {
    Clique,
    IndependentSet,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Graph problem encoded for DIMACS input.
    #[arg(long, value_enum, default_value_t = GraphProblem::Clique)]
    pub problem: GraphProblem,
    #[arg(long, default_value_t = 2.0)]
    pub penalty: f64,
    /// Starting indicator scale.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Pad to `a D + b` sites; needs `--pad-b` too.
    #[arg(long, requires = "pad_b")]
    pub pad_a: Option<usize>,
    #[arg(long, requires = "pad_a")]
    pub pad_b: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    /// Words sampled when the indicator family is too large to scan.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Random `(c, d)` points for the window check.
    #[arg(long, default_value_t = 4)]
    pub windows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Tfi,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Model::Tfi)]
    pub model: Model,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Maximal bond dimension.
    #[arg(long = "D", alias = "bond-dim", default_value_t = 16)]
    pub bond: usize,
    #[arg(long, default_value_t = 20)]
    pub max_sweeps: usize,
    /// Plain open chain without the half-field edge terms.
    #[arg(long)]
    pub open: bool,
    /// Compare with exact diagonalization (subject to `--dense-cap`).
    #[arg(long)]
    pub dense: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Enumerate,
    Alternating,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Enumerate)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 4)]
    pub starts: usize,
    #[arg(long, default_value_t = 20)]
    pub max_rounds: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub instance: PathBuf,
    /// Random `(c, d)` points for the window characterization.
    #[arg(long, default_value_t = 2)]
    pub samples: usize,
}

/// Parses `args` (program name first) and runs the command, printing to
/// stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Parse { .. } | Error::Json(_) | Error::Document(_) => EXIT_IO,
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::UnsupportedStrategy(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Text to print and the exit code.
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Reduce(a) => reduce(g, a),
        Command::Verify(a) => verify(g, a),
        Command::Sweep(a) => sweep_cmd(g, a),
        Command::Solve(a) => solve(g, a),
        Command::Report(a) => report(g, a),
    }
}

fn emit(g: &GlobalArgs, value: &Value, text: String, code: i32) -> Result<Outcome> {
    let text = if g.json { format!("{}\n", serde_json::to_string_pretty(value)?) } else { text };
    Ok(Outcome { text, code })
}

fn sniff(path: &Path, text: &str) -> InputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => return InputFormat::Json,
        Some("qubo") => return InputFormat::Qubo,
        Some("col" | "clq" | "dimacs" | "graph") => return InputFormat::Dimacs,
        _ => {}
    }
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if line.starts_with('{') {
            return InputFormat::Json;
        }
        if line.starts_with("p edge") || line.starts_with("p col") || line.starts_with("e ") {
            return InputFormat::Dimacs;
        }
        if line.starts_with('c') || line.starts_with('#') {
            continue;
        }
        break;
    }
    InputFormat::Qubo
}

fn load_bqp(a: &ReduceArgs) -> Result<(BqpInstance, Vec<String>)> {
    let text = std::fs::read_to_string(&a.input)?;
    let format = if a.format == InputFormat::Auto { sniff(&a.input, &text) } else { a.format };
    match format {
        InputFormat::Dimacs => {
            let parsed = parse_dimacs(&text)?;
            let bqp = match a.problem {
                GraphProblem::Clique => clique_to_bqp(&parsed.graph, a.penalty)?,
                GraphProblem::IndependentSet => independent_set_to_bqp(&parsed.graph, a.penalty)?,
            };
            Ok((bqp, parsed.warnings))
        }
        InputFormat::Qubo => Ok((parse_qubo(&text)?, Vec::new())),
        InputFormat::Json | InputFormat::Auto => Ok((parse_bqp_json(&text)?, Vec::new())),
    }
}

fn reduce(g: &GlobalArgs, a: &ReduceArgs) -> Result<Outcome> {
    let (bqp, warnings) = load_bqp(a)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let opts = AssemblyOptions { gamma: a.gamma, affine_target: a.pad_a.zip(a.pad_b) };
    let inst = assemble_instance(&bqp, &opts)?;
    write_instance(&a.output, &inst)?;
    let l = inst.layout();
    let affine = inst.affine();
    let value = json!({
        "output": a.output.display().to_string(),
        "N": l.n_vars, "D": l.dim, "m": l.m, "n": l.sites,
        "kappa": inst.kappa(), "gamma": inst.gamma(),
        "free_sites": inst.free_sites(),
        "affine": affine,
        "scale": bqp.scale(),
        "source": bqp.source(),
        "warnings": warnings,
    });
    let text = format!(
        "wrote {}\nN = {}  D = {}  m = {}  n = {}\nkappa = {}  gamma = {}\nfree sites {:?}\nn = {} * D + {} (padding {})\n",
        a.output.display(),
        l.n_vars,
        l.dim,
        l.m,
        l.sites,
        inst.kappa(),
        inst.gamma(),
        inst.free_sites(),
        affine.a,
        affine.b,
        affine.padding
    );
    emit(g, &value, text, EXIT_OK)
}

fn check_line(r: &OracleReport) -> String {
    let status = match r.passed {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "INFO",
    };
    let mut line = format!("{status} {}", r.oracle);
    let p = &r.payload;
    match r.oracle.as_str() {
        "fixed-gauge" => {
            let _ = write!(line, ": {} sites, max residual {:.3e}", p["sites"], p["max_residual"].as_f64().unwrap_or(f64::NAN));
            if let Some(bad) = p["failing"].as_array() {
                for b in bad.iter().take(5) {
                    let _ = write!(line, "\n    site {} residual {:.3e}", b["site"], b["residual"].as_f64().unwrap_or(f64::NAN));
                }
            }
        }
        "indicator-family" => {
            let _ = write!(
                line,
                ": {} words ({}), {} nonzero outcomes, max value error {:.3e}, max gauge residual {:.3e}",
                p["words_checked"],
                if r.exhaustive { "exhaustive" } else { "sampled" },
                p["nonzero_outcomes"],
                p["max_value_error"].as_f64().unwrap_or(f64::NAN),
                p["max_gauge_residual"].as_f64().unwrap_or(f64::NAN)
            );
            if let Some(bad) = p["failures"].as_array() {
                for b in bad.iter().take(5) {
                    let word = b["word"].as_str().unwrap_or("-");
                    let _ = write!(line, "\n    word {word}: {}", b["reason"].as_str().unwrap_or(""));
                }
            }
        }
        "windows-decomposition" => {
            let _ = write!(
                line,
                ": {} samples, tail max {:.3e}, additivity error {:.3e}",
                p["samples"],
                p["tail_max_abs"].as_f64().unwrap_or(f64::NAN),
                p["additivity_max_error"].as_f64().unwrap_or(f64::NAN)
            );
        }
        _ => {}
    }
    line
}

fn verify(g: &GlobalArgs, a: &VerifyArgs) -> Result<Outcome> {
    let inst = read_instance(&a.instance)?;
    let opts = IndicatorCheckOptions { samples: a.samples, seed: g.seed, ..Default::default() };
    let reports = vec![
        fixed_gauge_check(&inst, g.tol).without_timing(),
        verify_indicator_family(inst.family(), &opts).without_timing(),
        windows_decomposition_check(&inst, a.windows, g.seed)?.without_timing(),
    ];
    let passed = reports.iter().all(|r| !r.failed());
    let mut text = String::new();
    for r in &reports {
        text.push_str(&check_line(r));
        text.push('\n');
    }
    text.push_str(if passed { "verification passed\n" } else { "verification FAILED\n" });
    // the per-sample records are bulky; keep them out of the summary
    let compact: Vec<Value> = reports
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).unwrap_or(Value::Null);
            if let Some(p) = v.get_mut("payload").and_then(Value::as_object_mut) {
                p.remove("records");
            }
            v
        })
        .collect();
    let value = json!({ "passed": passed, "reports": compact });
    emit(g, &value, text, if passed { EXIT_OK } else { EXIT_FAILURE })
}

fn sweep_cmd(g: &GlobalArgs, a: &SweepArgs) -> Result<Outcome> {
    if a.n < 2 || a.bond == 0 {
        return Err(Error::UnsupportedStrategy("sweep needs --n >= 2 and --D >= 1".into()));
    }
    let h = match a.model {
        Model::Tfi => ChainHamiltonian::tfi(a.n, a.g, !a.open)?,
    };
    let dense = if a.dense { Some(dense_ground_energy(&h, g.dense_cap)?) } else { None };
    let psi = random_mps(a.n, 2, &capped_profile(a.n, 2, a.bond), g.seed)?;
    let opts = DmrgOptions { max_sweeps: a.max_sweeps, tol_energy: g.tol, ..Default::default() };
    let (_, report) = sweep(&psi, &h, &opts)?;
    let mut value = json!({
        "model": "tfi",
        "n": a.n,
        "g": a.g,
        "D": a.bond,
        "boundary_corrected": !a.open,
        "initial_energy": report.initial_energy,
        "final_energy": report.final_energy,
        "sweeps": report.sweeps,
        "converged": report.converged,
        "local_solves": report.energies.len(),
        "max_increase": report.max_increase(),
    });
    let mut text = format!(
        "tfi n = {} g = {} D = {}\nenergy {:.15} after {} sweeps (converged: {})\nlargest local increase {:.3e}\n",
        a.n,
        a.g,
        a.bond,
        report.final_energy,
        report.sweeps,
        report.converged,
        report.max_increase()
    );
    if let Some(e) = dense {
        value["dense_energy"] = json!(e);
        value["error"] = json!(report.final_energy - e);
        let _ = writeln!(text, "dense {e:.15} difference {:.3e}", report.final_energy - e);
    }
    emit(g, &value, text, EXIT_OK)
}

fn mode_of(m: ModeArg) -> SolveMode {
    match m {
        ModeArg::Enumerate => SolveMode::Enumerate,
        ModeArg::Alternating => SolveMode::Alternating,
    }
}

fn bit_string(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

fn solve(g: &GlobalArgs, a: &SolveArgs) -> Result<Outcome> {
    let inst = read_instance(&a.instance)?;
    let opts = SolveOptions {
        starts: a.starts,
        seed: g.seed,
        max_rounds: a.max_rounds,
        dmrg: DmrgOptions { tol_energy: g.tol, ..Default::default() },
        chain_energy: true,
    };
    let out = solve_instance(&inst, mode_of(a.mode), &opts)?;
    let mut value = serde_json::to_value(&out)?;
    value["b"] = json!(bit_string(&out.bits));
    let mut text = format!(
        "b={}\nvalue={}\npenalty objective={}\nshortcut energy={:.6e}\n",
        bit_string(&out.bits),
        out.value,
        out.energy,
        out.shortcut
    );
    if let Some(e) = out.chain_energy {
        let _ = writeln!(text, "chain energy={e:.12}");
    }
    if let Some(e) = out.variational_energy {
        let _ = writeln!(text, "variational energy={e:.12}");
    }
    let selected = out.bits.iter().filter(|b| **b != 0).count();
    match inst.bqp().source() {
        BqpSource::Clique { .. } => {
            value["clique_size"] = json!(selected);
            let _ = writeln!(text, "clique size={selected} (objective {})", out.original_value);
        }
        BqpSource::IndependentSet { .. } => {
            value["independent_set_size"] = json!(selected);
            let _ = writeln!(text, "independent set size={selected} (objective {})", out.original_value);
        }
        _ => {
            if inst.bqp().scale() != 1.0 {
                let _ = writeln!(text, "unscaled value={}", out.original_value);
            }
        }
    }
    emit(g, &value, text, EXIT_OK)
}

fn report(g: &GlobalArgs, a: &ReportArgs) -> Result<Outcome> {
    let inst = read_instance(&a.instance)?;
    let l = inst.layout();
    let worst = inst.worst_fixed_site().map(|w| w.1).unwrap_or(0.0);
    let windows = windows_decomposition_check(&inst, a.samples, g.seed)?.without_timing();
    let findings = windows.payload["findings"].clone();
    let best = solve_instance(&inst, SolveMode::Enumerate, &SolveOptions { seed: g.seed, ..Default::default() })?;
    let value = json!({
        "N": l.n_vars, "D": l.dim, "m": l.m, "n": l.sites,
        "layout": l,
        "kappa": inst.kappa(),
        "gamma": inst.gamma(),
        "gamma_requested": inst.gamma_requested(),
        "gamma_halvings": inst.family().gamma_halvings(),
        "y_scale": inst.penalty().y_scale,
        "free_sites": inst.free_sites(),
        "affine": inst.affine(),
        "source": inst.bqp().source(),
        "max_fixed_residual": worst,
        "windows": {
            "passed": windows.passed,
            "tail_max_abs": windows.payload["tail_max_abs"],
            "additivity_max_error": windows.payload["additivity_max_error"],
        },
        "findings": findings,
        "enumerate": best,
    });
    let f = &value["findings"];
    let text = format!(
        "N = {}  D = {}  m = {}  n = {}\n\
         regions: left tail {:?}, left centre {:?}, right centre {:?}, right tail {:?}, padding {:?}\n\
         free sites {:?}\n\
         kappa = {}  gamma = {} (requested {}, {} halvings)  Y scale = {}\n\
         n = {} * D + {}\n\
         largest fixed-site gauge residual {:.3e}\n\
         window check: tail max {:.3e}, additivity error {:.3e}\n\
         chain energy matches x Y y^T / N: {}\n\
         chain energy matches shortcut: {} (fit ratio {})\n\
         right-centre windows contribute: {}\n\
         best witness b = {} value {} objective {}\n",
        l.n_vars,
        l.dim,
        l.m,
        l.sites,
        l.left_tail,
        l.left_center,
        l.right_center,
        l.right_tail,
        l.padding,
        inst.free_sites(),
        inst.kappa(),
        inst.gamma(),
        inst.gamma_requested(),
        inst.family().gamma_halvings(),
        inst.penalty().y_scale,
        inst.affine().a,
        inst.affine().b,
        worst,
        windows.payload["tail_max_abs"].as_f64().unwrap_or(f64::NAN),
        windows.payload["additivity_max_error"].as_f64().unwrap_or(f64::NAN),
        f["literal_identity_observed"],
        f["shortcut_identity_observed"],
        f["chain_over_shortcut_fit"],
        f["right_center_contributes"],
        bit_string(&best.bits),
        best.value,
        best.energy
    );
    emit(g, &value, text, EXIT_OK)
}
