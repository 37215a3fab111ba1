//! `trisect`: solve single problems, benchmark problem classes, draw diagrams.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use trisect_bench::diagram::{emit_diagram, DiagramKind};
use trisect_bench::harness::BenchError;
use trisect_bench::{parse_class, read_manifest, report, run_class_with, write_manifest, Method};
use trisect_core::baselines::{direct_run, directl_run};
use trisect_core::geometry::Domain;
use trisect_core::optimizer::{OptConfig, OptState, RunReport, StartVertex};
use trisect_core::problems::{analytic_suite, generate, EvalError, Problem, ProblemClass};
use trisect_core::stopping::StopRule;
use trisect_core::trace::{read_trace, write_domain, write_partition, write_trials};

#[derive(Parser)]
#[command(name = "trisect", version, about = "Derivative-based global minimization by one-point trisection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize one problem.
    Solve {
        /// Class manifest path, or the name of a built-in problem.
        #[arg(long)]
        problem: String,
        /// Problem number within a manifest.
        #[arg(long, default_value_t = 1)]
        index: usize,
        #[arg(long, default_value = "new")]
        method: Method,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        pmax: usize,
        /// Stop once within this accuracy of the known minimizer.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value = "a")]
        start: StartVertex,
        /// Write a line trace of the run here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the run report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run methods over a problem class and report the comparison criteria.
    Bench {
        /// Manifest path, or `dim:difficulty:count`.
        #[arg(long)]
        class: String,
        #[arg(long, value_delimiter = ',', default_value = "new,direct,directl")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        #[arg(long, default_value_t = 100_000)]
        pmax: usize,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        /// Directory for report.txt, runs.csv, summary.csv and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Generator seed for a `dim:difficulty:count` class.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Render a trace as SVG.
    Diagram {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        kind: DiagramKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the manifest of a generated class.
    Class {
        /// `dim:difficulty:count`.
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_problem(spec: &str, index: usize) -> Result<Problem> {
    let path = Path::new(spec);
    if path.is_file() {
        let m = read_manifest(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(generate(&m.class, index)?);
    }
    let suite = analytic_suite();
    let names: Vec<String> = suite.iter().map(|p| p.name.clone()).collect();
    suite
        .into_iter()
        .find(|p| p.name == spec)
        .ok_or_else(|| anyhow!("{spec:?} is neither a manifest file nor a built-in problem ({})", names.join(", ")))
}

fn load_class(spec: &str, seed: u64) -> Result<ProblemClass> {
    let path = Path::new(spec);
    if path.is_file() {
        return Ok(read_manifest(path).with_context(|| format!("reading {}", path.display()))?.class);
    }
    Ok(parse_class(spec, seed)?)
}

#[allow(clippy::too_many_arguments)]
fn solve(
    spec: &str,
    index: usize,
    method: Method,
    eps: f64,
    pmax: usize,
    delta: Option<f64>,
    start: StartVertex,
    trace: Option<&Path>,
    json: bool,
) -> Result<()> {
    let problem = load_problem(spec, index)?;
    let stop = match delta {
        Some(d) if !(d > 0.0 && d <= 1.0) => bail!("--delta must lie in (0, 1]"),
        Some(d) => {
            let opt = problem.known_opt.as_ref().ok_or_else(|| anyhow!("{} has no known minimizer for --delta", problem.name))?;
            StopRule::target(opt.x.clone(), d)
        }
        None => StopRule::budget(),
    };
    if eps < 0.0 || pmax == 0 {
        bail!("--eps must be nonnegative and --pmax positive");
    }
    let cfg = OptConfig { epsilon: eps, max_trials: pmax, start, stop, trace: trace.is_some() };
    let mut sink = match trace {
        Some(p) => Some(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => None,
    };
    let report: RunReport = match method {
        Method::New => {
            let mut st = OptState::initialize(&problem, cfg)?;
            st.run_in_place()?;
            if let Some(w) = sink.as_mut() {
                write_domain(w, st.partition().domain())?;
                write_partition(w, st.partition())?;
            }
            st.report()
        }
        Method::Direct | Method::DirectL => {
            let r = if method == Method::Direct { direct_run(&problem, &cfg)? } else { directl_run(&problem, &cfg)? };
            if let Some(w) = sink.as_mut() {
                write_domain(w, &Domain::new(problem.lower().to_vec(), problem.upper().to_vec(), false))?;
            }
            r
        }
    };
    if let Some(mut w) = sink {
        write_trials(&mut w, &report.events)?;
        w.flush()?;
    }
    if json {
        let quiet = RunReport { events: Vec::new(), ..report };
        println!("{}", serde_json::to_string_pretty(&quiet)?);
    } else {
        println!("problem  {}", report.problem);
        println!("method   {}", report.method);
        println!("stop     {}", report.stop_reason);
        println!("trials   {}", report.trials);
        println!("boxes    {}", report.boxes);
        println!("f_min    {:?}", report.f_min);
        println!("x_min    {:?}", report.x_min);
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { problem, index, method, eps, pmax, delta, start, trace, json } => {
            solve(&problem, index, method, eps, pmax, delta, start, trace.as_deref(), json)
        }
        Command::Bench { class, methods, delta, pmax, eps, out, workers, seed } => {
            if !(delta > 0.0 && delta <= 1.0) || pmax == 0 || eps < 0.0 {
                bail!("need 0 < --delta <= 1, --pmax > 0 and --eps >= 0");
            }
            let class = load_class(&class, seed)?;
            let r = run_class_with(&methods, &class, delta, pmax, workers, eps)?;
            print!("{}", report::text_table(&r));
            if let Some(dir) = out {
                for p in report::write_all(&r, &dir).with_context(|| format!("writing {}", dir.display()))? {
                    log::info!("wrote {}", p.display());
                }
            }
            Ok(())
        }
        Command::Diagram { trace, kind, out } => {
            let file = File::open(&trace).with_context(|| format!("opening {}", trace.display()))?;
            let t = read_trace(BufReader::new(file))?;
            let d = emit_diagram(&t, kind, &out)?;
            log::info!("{} boxes, {} trial points drawn", d.boxes, d.vertices);
            Ok(())
        }
        Command::Class { class, seed, out } => {
            let class = parse_class(&class, seed)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let m = write_manifest(&class, &out)?;
            let bad = m.problems.iter().filter(|e| e.error.is_some()).count();
            println!("{} problems written to {} ({bad} invalid)", m.problems.len(), out.display());
            Ok(())
        }
    }
}

fn is_evaluation_failure(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.is::<EvalError>() || matches!(c.downcast_ref::<BenchError>(), Some(BenchError::Eval { .. })))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_evaluation_failure(&e) { 2 } else { 1 })
        }
    }
}
