//! `frjc`: check, run, trace and verify FRJ programs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use frj::builtins::SensorScript;
use frj::harness::{self, ReplayOptions, Verdict};
use frj::runtime::{GcPolicy, Machine, Policy, RunOptions, RuntimeError, DEFAULT_MAX_STEPS};
use frj::{check_source, diag, Checked};

const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_PROPERTY: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "frjc",
    version,
    about = "Checker, interpreter and determinism harness for FRJ"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, check well-formedness and type check.
    Check(CheckArgs),
    /// Check, then evaluate and print the final value.
    Run(RunArgs),
    /// Like `run`, printing one line per reduction step.
    Trace(RunArgs),
    /// Replay under many schedules and report determinism and races.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CheckArgs {
    file: PathBuf,
    /// Emit a JSON report.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sched {
    Random,
    RoundRobin,
    MainFirst,
    Parallel,
}

#[derive(Args)]
struct ExecArgs {
    /// Sensor script for the Sensors capability.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Garbage collection: never, every-K or terminal.
    #[arg(long, default_value = "every-1024", value_parser = parse_gc)]
    gc: GcPolicy,
    /// Step budget; overrides FRJC_MAX_STEPS.
    #[arg(long)]
    max_steps: Option<u64>,
    /// Check configuration well-formedness after every step.
    #[arg(long)]
    debug_preserve: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    sched: Sched,
    /// Worker threads for `--sched parallel`.
    #[arg(long, default_value_t = 4)]
    workers: usize,
    /// Write the AC output log here, one on|off per line.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    /// Number of seeded sequential runs.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// Parallel runs used for replay and the race log.
    #[arg(long, default_value_t = 10)]
    parallel_runs: usize,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    /// Also explore every schedule exhaustively.
    #[arg(long)]
    enumerate: bool,
    /// Depth bound for `--enumerate`.
    #[arg(long, default_value_t = 10_000)]
    depth: usize,
    /// State bound for `--enumerate`.
    #[arg(long, default_value_t = 100_000)]
    max_states: usize,
    #[command(flatten)]
    exec: ExecArgs,
}

fn parse_gc(s: &str) -> Result<GcPolicy, String> {
    s.parse()
}

/// Explicit flag, then FRJC_MAX_STEPS, then the default.
fn max_steps(flag: Option<u64>) -> Result<u64, String> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var("FRJC_MAX_STEPS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("FRJC_MAX_STEPS must be a number, got `{v}`")),
        Err(_) => Ok(DEFAULT_MAX_STEPS),
    }
}

struct Failure(u8);

type CliResult = Result<(), Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    eprintln!("frjc: {msg}");
    Failure(EXIT_USAGE)
}

fn load(file: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(file).map_err(|e| usage(format!("cannot read {}: {e}", file.display())))
}

fn load_script(path: Option<&Path>) -> Result<SensorScript, Failure> {
    match path {
        None => Ok(SensorScript::default()),
        Some(p) => load(p)?
            .parse()
            .map_err(|e| usage(format!("{}: {e}", p.display()))),
    }
}

fn checked(file: &Path, json: bool) -> Result<Checked, Failure> {
    let src = load(file)?;
    check_source(&src).map_err(|diags| {
        if json {
            println!(
                "{}",
                json!({ "file": file.display().to_string(), "ok": false, "diagnostics": diags })
            );
        } else {
            eprint!("{}", diag::render_all(&diags, &file.display().to_string()));
        }
        Failure(EXIT_DIAGNOSTICS)
    })
}

fn cmd_check(args: &CheckArgs) -> CliResult {
    let c = checked(&args.file, args.json)?;
    let main_type = c.report.main_type.as_ref().map(|t| t.to_string());
    if args.json {
        println!(
            "{}",
            json!({ "file": args.file.display().to_string(), "ok": true, "diagnostics": [], "main_type": main_type })
        );
    } else {
        match main_type {
            Some(t) => println!("{}: ok (main: {t})", args.file.display()),
            None => println!("{}: ok", args.file.display()),
        }
    }
    Ok(())
}

fn run_options(exec: &ExecArgs, policy: Policy, trace: bool) -> Result<RunOptions, Failure> {
    Ok(RunOptions {
        policy,
        max_steps: max_steps(exec.max_steps).map_err(usage)?,
        gc: exec.gc,
        trace,
        debug_preserve: exec.debug_preserve,
    })
}

fn runtime_failure(e: &RuntimeError, json: bool) -> Failure {
    if json {
        println!("{}", json!({ "ok": false, "error": e.to_string() }));
    } else {
        eprintln!("frjc: runtime error: {e}");
    }
    Failure(EXIT_RUNTIME)
}

fn cmd_run(args: &RunArgs, trace: bool) -> CliResult {
    let c = checked(&args.file, args.exec.json)?;
    let script = load_script(args.exec.script.as_deref())?;
    let policy = match args.sched {
        Sched::Random => Policy::SeededRandom(args.seed),
        Sched::RoundRobin => Policy::RoundRobin,
        Sched::MainFirst => Policy::MainFirst,
        Sched::Parallel => Policy::Parallel {
            workers: args.workers,
            seed: args.seed,
        },
    };
    let opts = run_options(&args.exec, policy, trace)?;
    let out = Machine::new(&c.program, script)
        .run(&opts)
        .map_err(|e| runtime_failure(&e, args.exec.json))?;
    if let Some(path) = &args.out {
        std::fs::write(path, out.config.host.ac_log_text())
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    if args.exec.json {
        let trace: Vec<String> = out.trace.iter().map(|t| t.to_string()).collect();
        println!(
            "{}",
            json!({
                "ok": true,
                "value": out.rendered,
                "stats": out.stats,
                "ac_log": out.config.host.ac_log,
                "console": out.config.host.console,
                "trace": trace,
            })
        );
    } else {
        for t in &out.trace {
            println!("{t}");
        }
        for line in &out.config.host.console {
            println!("{line}");
        }
        println!("{}", out.rendered);
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CliResult {
    let c = checked(&args.file, args.exec.json)?;
    let script = load_script(args.exec.script.as_deref())?;
    let base = run_options(&args.exec, Policy::MainFirst, false)?;
    let machine = Machine::new(&c.program, script);
    let name = args.file.display().to_string();
    let expected_det = c.report.expected_deterministic();

    let replay = harness::replay_determinism(
        &name,
        &machine,
        &ReplayOptions {
            seeds: (0..args.seeds).collect(),
            parallel_runs: args.parallel_runs,
            workers: args.workers,
            base: base.clone(),
        },
    );
    let races = harness::race_check(&machine, args.parallel_runs, args.workers, &base);
    let enumeration = args
        .enumerate
        .then(|| harness::enumerate_schedules(&machine, args.depth, args.max_states, true));

    let mut failures = Vec::new();
    if expected_det && replay.verdict == Verdict::Nondeterministic {
        failures.push(format!(
            "expected deterministic, observed {} outcomes",
            replay.distinct.len()
        ));
    }
    if !races.overlaps.is_empty() {
        failures.push(format!(
            "{} overlapping field updates",
            races.overlaps.len()
        ));
    }
    if let Some(e) = &enumeration {
        if expected_det && e.values.len() > 1 {
            failures.push(format!(
                "expected deterministic, enumeration found {} values",
                e.values.len()
            ));
        }
    }
    let run_errors: Vec<&str> = replay
        .runs
        .iter()
        .filter_map(|r| r.error.as_deref())
        .collect();

    if args.exec.json {
        println!(
            "{}",
            json!({
                "file": name,
                "expected_deterministic": expected_det,
                "replay": replay,
                "races": { "runs": races.runs, "overlaps": races.overlaps, "errors": races.errors },
                "enumeration": enumeration,
                "failures": failures,
            })
        );
    } else {
        println!("program: {name}");
        println!(
            "expected: {}",
            if expected_det {
                "deterministic"
            } else {
                "may be nondeterministic"
            }
        );
        let verdict = match replay.verdict {
            Verdict::Deterministic => "deterministic",
            Verdict::Nondeterministic => "nondeterministic",
            Verdict::Inconclusive => "inconclusive",
        };
        println!(
            "replay: {} runs, {} distinct outcome(s), {verdict}",
            replay.runs.len(),
            replay.distinct.len()
        );
        for o in &replay.distinct {
            println!("  outcome: {}{}", o.value, ac_suffix(&o.ac_log));
        }
        for e in &run_errors {
            println!("  error: {e}");
        }
        println!(
            "races: {} parallel runs, {} overlapping updates",
            races.runs,
            races.overlaps.len()
        );
        if let Some(e) = &enumeration {
            let values: Vec<String> = e
                .values
                .iter()
                .map(|o| format!("{}{}", o.value, ac_suffix(&o.ac_log)))
                .collect();
            println!(
                "enumerate: {} states{}, values {{{}}}",
                e.states,
                if e.partial { " (partial)" } else { "" },
                values.join(", ")
            );
            for err in &e.errors {
                println!("  error: {err}");
            }
        }
        match failures.is_empty() {
            true => println!("verdict: ok"),
            false => println!("verdict: FAIL: {}", failures.join("; ")),
        }
    }
    if !failures.is_empty() {
        Err(Failure(EXIT_PROPERTY))
    } else if !run_errors.is_empty() {
        Err(Failure(EXIT_RUNTIME))
    } else {
        Ok(())
    }
}

fn ac_suffix(log: &[bool]) -> String {
    if log.is_empty() {
        String::new()
    } else {
        let words: Vec<&str> = log.iter().map(|&b| if b { "on" } else { "off" }).collect();
        format!(" (ac: {})", words.join(" "))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Run(a) => cmd_run(a, false),
        Command::Trace(a) => cmd_run(a, true),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code)) => ExitCode::from(code),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_wins_over_default() {
        assert_eq!(max_steps(Some(12)), Ok(12));
    }

    #[test]
    fn ac_suffix_words() {
        assert_eq!(ac_suffix(&[]), "");
        assert_eq!(ac_suffix(&[true, false]), " (ac: on off)");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
