use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use qprobe_core::harness::{
    benchmark, builtin_benchmarks, builtin_integrations, emit_report, integration, load_program, run_integration,
    run_mutation, run_plan, Format, IntegrationOptions, Report, TestPlan,
};
use qprobe_core::program::{parse_sources, Invocation, Program};
use qprobe_core::sim::{RandomStream, StateVector};

/// Test quantum programs on an embedded statevector simulator.
#[derive(Parser)]
#[command(name = "qprobe", version)]
struct Cli {
    /// Override the seed of every plan (and of its mutant sampling).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report format: table or tsv.
    #[arg(long, global = true, default_value = "table")]
    format: Format,
    /// Worker threads. Reports do not depend on this.
    #[arg(long, global = true, default_value_t = default_jobs())]
    jobs: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the shipped benchmarks and integration programs.
    List,
    /// Run unit test plans. Each argument is a plan file or a benchmark name.
    Run {
        #[arg(required = true)]
        plans: Vec<String>,
    },
    /// Test a program bottom-up, one plan per subroutine on its integration path.
    Integrate {
        /// A shipped integration program, or program source files.
        #[arg(required = true)]
        program: Vec<String>,
        /// Plan files, one per subroutine (required for source files).
        #[arg(long = "plan")]
        plans: Vec<PathBuf>,
        /// Entry subroutine, if not the program's own.
        #[arg(long)]
        entry: Option<String>,
        /// Keep going after a failing level.
        #[arg(long = "continue")]
        continue_on_failure: bool,
    },
    /// Mutation analysis of a plan's suite. Exits 0 once the analysis completes.
    Mutate {
        /// Plan file or benchmark name.
        plan: String,
        /// Also report how each survivor was classified.
        #[arg(long)]
        survivors: bool,
        /// Add a run-time column (makes the report non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Run one subroutine on a basis input and print the final state.
    Simulate {
        /// A benchmark name or a program source file.
        program: String,
        /// Subroutine to run.
        sub: String,
        /// Classical argument, `name=value`.
        #[arg(long = "arg", value_parser = parse_pair::<i64>)]
        args: Vec<(String, i64)>,
        /// Bind an op parameter to a subroutine of the program, `param=Sub`.
        #[arg(long = "oracle", value_parser = parse_pair::<String>)]
        oracles: Vec<(String, String)>,
        /// Basis index of the input state.
        #[arg(long, default_value_t = 0)]
        input: u64,
        /// Print amplitudes only for registers up to this many qubits.
        #[arg(long, default_value_t = 10)]
        max_qubits: usize,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(String, T), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v = v.trim().parse().map_err(|_| format!("bad value in `{s}`"))?;
    Ok((k.trim().to_string(), v))
}

/// A plan file if the path exists, otherwise a benchmark's shipped plan.
fn resolve_plan(arg: &str, seed: Option<u64>) -> Result<TestPlan> {
    let path = Path::new(arg);
    let mut plan = if path.is_file() {
        TestPlan::load(path)?
    } else if let Some(b) = benchmark(arg) {
        b.plan()?
    } else {
        bail!("`{arg}` is neither a plan file nor a benchmark (see `qprobe list`)");
    };
    if let Some(s) = seed {
        plan.seed = s;
        if let Some(m) = plan.mutation.as_mut() {
            m.config.seed = s;
        }
    }
    Ok(plan)
}

fn read_sources(files: &[String]) -> Result<Program> {
    let texts = files
        .iter()
        .map(|f| std::fs::read_to_string(f).with_context(|| format!("reading {f}")))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    Ok(parse_sources(&refs)?)
}

struct Output {
    text: String,
    pass: bool,
}

fn list() -> Output {
    let mut text = String::from("benchmarks:\n");
    for b in builtin_benchmarks() {
        text.push_str(&format!("  {:<10} {}\n", b.name, b.description));
    }
    text.push_str("integration programs:\n");
    for i in builtin_integrations() {
        text.push_str(&format!("  {:<10} {}\n", i.name, i.description));
    }
    Output { text, pass: true }
}

fn run(cli: &Cli, plans: &[String]) -> Result<Output> {
    let mut results = Vec::new();
    for arg in plans {
        let plan = resolve_plan(arg, cli.seed)?;
        let program = load_program(&plan)?;
        results.push(run_plan(&plan, &program, cli.jobs).with_context(|| format!("running {arg}"))?);
    }
    let pass = results.iter().all(|r| r.all_pass());
    Ok(Output { text: emit_report(Report::Suites(&results), cli.format), pass })
}

fn integrate(
    cli: &Cli,
    program: &[String],
    plan_files: &[PathBuf],
    entry: Option<&str>,
    continue_on_failure: bool,
) -> Result<Output> {
    let (mut prog, mut plans) = match (program, integration(&program[0])) {
        ([_], Some(i)) => (i.program()?, i.plans()?),
        _ => (read_sources(program)?, Vec::new()),
    };
    if !plan_files.is_empty() {
        plans = plan_files.iter().map(|p| TestPlan::load(p)).collect::<Result<_, _>>()?;
    }
    if plans.is_empty() {
        bail!("no plans given; pass one --plan per subroutine");
    }
    if let Some(s) = cli.seed {
        plans.iter_mut().for_each(|p| p.seed = s);
    }
    if let Some(e) = entry {
        prog = prog.with_entry(e)?;
    }
    let options = IntegrationOptions { continue_on_failure, jobs: cli.jobs };
    let outcome = run_integration(&prog, &plans, &BTreeMap::new(), options)?;
    let mut text = emit_report(Report::Integration(&outcome), cli.format);
    if cli.format == Format::Table {
        if let Some(level) = &outcome.stopped_at {
            text.push_str(&format!("stopped at {level}; pass --continue to test the levels above it\n"));
        }
    }
    Ok(Output { text, pass: outcome.all_pass() })
}

fn mutate(cli: &Cli, arg: &str, survivors: bool, timing: bool) -> Result<Output> {
    let plan = resolve_plan(arg, cli.seed)?;
    let program = load_program(&plan)?;
    let outcome = run_mutation(&plan, &program, cli.jobs)?;
    let mut text =
        emit_report(Report::Mutations { reports: std::slice::from_ref(&outcome.report), timing }, cli.format);
    if survivors {
        text.push('\n');
        text.push_str(&emit_report(Report::Survivors(&outcome.survivors), cli.format));
    }
    Ok(Output { text, pass: true })
}

fn simulate(
    program: &str,
    sub: &str,
    args: &[(String, i64)],
    oracles: &[(String, String)],
    input: u64,
    max_qubits: usize,
) -> Result<Output> {
    let prog = match benchmark(program) {
        Some(b) if !Path::new(program).is_file() => b.program()?,
        _ => read_sources(&[program.to_string()])?,
    };
    let mut inv = Invocation::new(sub);
    for (k, v) in args {
        inv = inv.arg(k, *v);
    }
    for (param, target) in oracles {
        inv = inv.oracle(param, prog.subroutine(target)?.clone());
    }
    let width = prog.qubit_layout(&inv)?.width();
    let state = StateVector::basis(width, input).map_err(|e| anyhow!("input {input}: {e}"))?;
    let out = prog.run(&inv, state, &mut RandomStream::new(0))?;
    let mut text = format!("qubits: {width}\n");
    for (k, v) in &out.results {
        text.push_str(&format!("{k} = {v}\n"));
    }
    if width > max_qubits {
        text.push_str(&format!("amplitudes omitted: {width} qubits exceeds --max-qubits {max_qubits}\n"));
    } else {
        for (j, a) in out.state.amplitudes().iter().enumerate() {
            if a.norm() > 1e-12 {
                let clean = |x: f64| if x.abs() < 5e-7 { 0.0 } else { x };
                text.push_str(&format!("|{j:0width$b}>  {:+.6} {:+.6}i\n", clean(a.re), clean(a.im)));
            }
        }
    }
    Ok(Output { text, pass: true })
}

fn execute(cli: &Cli) -> Result<Output> {
    if cli.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    match &cli.command {
        Command::List => Ok(list()),
        Command::Run { plans } => run(cli, plans),
        Command::Integrate { program, plans, entry, continue_on_failure } => {
            integrate(cli, program, plans, entry.as_deref(), *continue_on_failure)
        }
        Command::Mutate { plan, survivors, timing } => mutate(cli, plan, *survivors, *timing),
        Command::Simulate { program, sub, args, oracles, input, max_qubits } => {
            simulate(program, sub, args, oracles, *input, *max_qubits)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|out| {
        match &cli.out {
            Some(path) => std::fs::write(path, &out.text).with_context(|| format!("writing {}", path.display()))?,
            None => print!("{}", out.text),
        }
        Ok(out.pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
