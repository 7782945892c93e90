//! `stulife`: validate datasets, run and resume benchmark runs, and re-emit
//! reports from stored outcomes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stulife_core::agent::RemoteConfig;
use stulife_core::controller::rundir::{load_report, resume_run, start_run, DirOutcome};
use stulife_core::controller::{AgentConfig, RunConfig, RunError, DEFAULT_CHECKPOINT_EVERY, DEFAULT_MAX_TURNS};
use stulife_core::dataset::{load_dataset, DatasetCounts, LoadError};
use stulife_core::evaluation::ReportBundle;
use stulife_core::task::{Scenario, ScenarioGroup};

const EXIT_USER: u8 = 1;
const EXIT_INTERNAL: u8 = 2;

#[derive(Parser)]
#[command(name = "stulife", version, about = "Campus-life benchmark simulator and evaluator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a dataset and print its task counts next to the declared ones.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Start a run, or continue one with --resume.
    Run(RunArgs),
    /// Continue an interrupted run from its newest checkpoint.
    Resume {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print the report of a finished run without re-running it.
    Report {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// `replay:<script.json>` or `remote:<model>@<base_url>`.
    #[arg(long)]
    agent: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_turns: Option<u32>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    #[arg(long)]
    run_id: Option<String>,
    /// Run directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue the run in --out instead of starting a new one.
    #[arg(long)]
    resume: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn user(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USER,
            message: message.into(),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let code = match e {
            RunError::Config(_) | RunError::Resume(_) | RunError::Dataset(_) | RunError::Io { .. } => EXIT_USER,
            RunError::Verify(_) | RunError::World(_) | RunError::Checkpoint(_) => EXIT_INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn parse_agent(spec: &str) -> Result<AgentConfig, Failure> {
    match spec.split_once(':') {
        Some(("replay", path)) if !path.is_empty() => Ok(AgentConfig::Replay {
            script: PathBuf::from(path),
        }),
        Some(("remote", rest)) => match rest.split_once('@') {
            Some((model, url)) if !model.is_empty() && !url.is_empty() => Ok(AgentConfig::Remote(RemoteConfig {
                base_url: url.to_string(),
                model: model.to_string(),
                timeout_secs: 60,
                retries: 2,
            })),
            _ => Err(Failure::user(format!("--agent remote needs `remote:<model>@<base_url>`, got `{spec}`"))),
        },
        _ => Err(Failure::user(format!(
            "--agent must be `replay:<script>` or `remote:<model>@<base_url>`, got `{spec}`"
        ))),
    }
}

fn build_config(a: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let missing = |flag: &str| Failure::user(format!("{flag} is required without --config"));
            RunConfig {
                dataset: a.dataset.clone().ok_or_else(|| missing("--dataset"))?,
                agent: parse_agent(a.agent.as_deref().ok_or_else(|| missing("--agent"))?)?,
                preset: "vanilla".into(),
                seed: 0,
                max_turns: DEFAULT_MAX_TURNS,
                checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
                out: a.out.clone().ok_or_else(|| missing("--out"))?,
                run_id: "run".into(),
                probe: None,
            }
        }
    };
    if let Some(d) = &a.dataset {
        cfg.dataset = d.clone();
    }
    if let Some(s) = &a.agent {
        cfg.agent = parse_agent(s)?;
    }
    if let Some(p) = &a.preset {
        cfg.preset = p.clone();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(m) = a.max_turns {
        cfg.max_turns = m;
    }
    if let Some(c) = a.checkpoint_every {
        cfg.checkpoint_every = c;
    }
    if let Some(r) = &a.run_id {
        cfg.run_id = r.clone();
    }
    if let Some(o) = &a.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn counts_table(computed: &DatasetCounts, declared: Option<&DatasetCounts>) -> String {
    let mut rows = vec![["scenario".to_string(), "#Num".into(), "#LTM".into(), "#SelfMotivated".into()]];
    let cell = |have: u32, want: Option<u32>| match want {
        Some(w) if w != have => format!("{have} (declared {w})"),
        Some(_) => format!("{have} ok"),
        None => have.to_string(),
    };
    let has_scenarios = declared.is_some_and(|d| !d.scenarios.is_empty());
    for s in Scenario::ALL {
        let (h, w) = (computed.scenario(s), declared.filter(|_| has_scenarios).map(|d| d.scenario(s)));
        rows.push([
            s.label().to_string(),
            cell(h.num, w.map(|w| w.num)),
            cell(h.ltm, w.map(|w| w.ltm)),
            cell(h.self_motivated, w.map(|w| w.self_motivated)),
        ]);
    }
    for g in ScenarioGroup::ALL {
        rows.push([
            format!("[{}]", g.label()),
            cell(computed.group(g), declared.map(|d| d.group(g))),
            String::new(),
            String::new(),
        ]);
    }
    rows.push([
        "total".into(),
        cell(computed.total, declared.map(|d| d.total)),
        cell(computed.ltm, declared.map(|d| d.ltm)),
        cell(computed.self_motivated, declared.map(|d| d.self_motivated)),
    ]);
    let widths: Vec<usize> = (0..4).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in &rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn cmd_validate(dataset: &Path) -> Result<(), Failure> {
    let ds = load_dataset(dataset).map_err(|e| match e {
        LoadError::Invalid(issues) => Failure::user(format!(
            "{} is invalid:\n{}",
            dataset.display(),
            issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
        )),
        other => Failure::user(other.to_string()),
    })?;
    print!("{}", counts_table(&ds.counts, ds.dataset.declared_counts.as_ref()));
    println!("dataset hash {}", ds.hash);
    if !ds.warnings.is_empty() {
        return Err(Failure::user(format!(
            "task counts differ from the declaration:\n{}",
            ds.warnings.iter().map(|w| format!("  {w}")).collect::<Vec<_>>().join("\n")
        )));
    }
    Ok(())
}

fn emit(report: &ReportBundle, format: Format) {
    match format {
        Format::Json => print!("{}", report.to_json()),
        Format::Csv => print!("{}", report.to_csv()),
    }
}

fn finish(outcome: DirOutcome, dir: &Path, format: Format) {
    match outcome {
        DirOutcome::Completed { report } => emit(&report, format),
        DirOutcome::Interrupted { cursor } => eprintln!(
            "interrupted before task {cursor}; checkpoint saved. Continue with `stulife resume --out {}`",
            dir.display()
        ),
    }
}

fn install_stop_flag() -> Arc<AtomicBool> {
    let stop = Arc::new(AtomicBool::new(false));
    let s = stop.clone();
    if let Err(e) = ctrlc::set_handler(move || s.store(true, Ordering::SeqCst)) {
        eprintln!("warning: cannot install interrupt handler: {e}");
    }
    stop
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { dataset } => cmd_validate(&dataset),
        Command::Run(args) if args.resume => {
            let out = match (&args.out, &args.config) {
                (Some(o), _) => o.clone(),
                (None, Some(_)) => build_config(&args)?.out,
                (None, None) => return Err(Failure::user("--resume needs --out")),
            };
            finish(resume_run(&out, install_stop_flag())?, &out, args.format);
            Ok(())
        }
        Command::Run(args) => {
            let cfg = build_config(&args)?;
            finish(start_run(&cfg, install_stop_flag())?, &cfg.out, args.format);
            Ok(())
        }
        Command::Resume { out, format } => {
            finish(resume_run(&out, install_stop_flag())?, &out, format);
            Ok(())
        }
        Command::Report { out, format } => {
            emit(&load_report(&out)?, format);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USER } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
