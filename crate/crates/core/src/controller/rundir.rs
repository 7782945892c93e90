//! On-disk layout of a run: `run.json`, `transcript/`, `checkpoints/`,
//! `outcomes.json`, `report.json` and `report.csv`.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{render_transcript, RunConfig, RunError, RunProgress, RunSink, RunStatus, Runner};
use crate::agent::ConversationTurn;
use crate::dataset::{load_dataset, DatasetCounts, LoadedDataset};
use crate::evaluation::{ReportBundle, RunMeta};
use crate::world::Checkpoint;

pub const RUN_FILE: &str = "run.json";
pub const OUTCOMES_FILE: &str = "outcomes.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const TRANSCRIPT_DIR: &str = "transcript";
pub const CHECKPOINT_DIR: &str = "checkpoints";

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Io { context, source }
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(io(format!("writing {}", path.display())))
}

/// What `run.json` records: the resolved config and the dataset hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunEcho {
    pub config: RunConfig,
    pub dataset_hash: String,
}

/// Everything needed to rebuild the report without re-running.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredOutcomes {
    pub meta: RunMeta,
    pub dataset_counts: DatasetCounts,
    pub progress: RunProgress,
}

impl StoredOutcomes {
    pub fn report(&self) -> Result<ReportBundle, RunError> {
        let matrix = (!self.progress.matrix.is_empty()).then_some(&self.progress.matrix);
        ReportBundle::build(
            self.meta.clone(),
            self.dataset_counts.clone(),
            &self.progress.outcomes,
            &self.progress.squandered,
            matrix,
        )
        .map_err(RunError::Dataset)
    }
}

/// Writes transcripts and checkpoints under a run directory and stops when
/// the shared flag is raised.
pub struct DirSink {
    dir: PathBuf,
    stop: Arc<AtomicBool>,
}

impl DirSink {
    pub fn new(dir: &Path, stop: Arc<AtomicBool>) -> Result<Self, RunError> {
        for sub in [TRANSCRIPT_DIR, CHECKPOINT_DIR] {
            let p = dir.join(sub);
            std::fs::create_dir_all(&p).map_err(io(format!("creating {}", p.display())))?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            stop,
        })
    }
}

impl RunSink for DirSink {
    fn transcript(&mut self, task_id: &str, turns: &[ConversationTurn]) -> Result<(), RunError> {
        write(&self.dir.join(TRANSCRIPT_DIR).join(format!("{task_id}.txt")), &render_transcript(turns))
    }

    fn checkpoint(&mut self, checkpoint: &Checkpoint<RunProgress>) -> Result<(), RunError> {
        let text = checkpoint.to_text().map_err(|e| RunError::Config(format!("serializing checkpoint: {e}")))?;
        write(&self.dir.join(CHECKPOINT_DIR).join(checkpoint.file_name()), &text)
    }

    fn should_stop(&mut self, _cursor: usize) -> bool {
        self.stop.load(Ordering::SeqCst)
    }
}

/// Result of driving a run directory.
#[derive(Debug)]
pub enum DirOutcome {
    Completed { report: Box<ReportBundle> },
    Interrupted { cursor: usize },
}

fn open_dataset(cfg: &RunConfig) -> Result<LoadedDataset, RunError> {
    load_dataset(&cfg.dataset).map_err(|e| RunError::Dataset(e.to_string()))
}

fn finish(dir: &Path, runner: &Runner, agent_desc: String, status: RunStatus) -> Result<DirOutcome, RunError> {
    match status {
        RunStatus::Interrupted { cursor, .. } => Ok(DirOutcome::Interrupted { cursor }),
        RunStatus::Completed(result) => {
            let stored = StoredOutcomes {
                meta: RunMeta {
                    agent: agent_desc,
                    ..result.report.meta.clone()
                },
                dataset_counts: runner.dataset.counts.clone(),
                progress: result.progress,
            };
            let json = serde_json::to_string_pretty(&stored).expect("outcomes serialize");
            write(&dir.join(OUTCOMES_FILE), &json)?;
            let report = stored.report()?;
            write(&dir.join(REPORT_JSON), &report.to_json())?;
            write(&dir.join(REPORT_CSV), &report.to_csv())?;
            Ok(DirOutcome::Completed { report: Box::new(report) })
        }
    }
}

/// Starts a fresh run in `cfg.out`.
pub fn start_run(cfg: &RunConfig, stop: Arc<AtomicBool>) -> Result<DirOutcome, RunError> {
    cfg.validate()?;
    let ds = open_dataset(cfg)?;
    let dir = &cfg.out;
    std::fs::create_dir_all(dir).map_err(io(format!("creating {}", dir.display())))?;
    let echo = RunEcho {
        config: cfg.absolutized(),
        dataset_hash: ds.hash.clone(),
    };
    write(&dir.join(RUN_FILE), &serde_json::to_string_pretty(&echo).expect("config serializes"))?;
    let runner = Runner::new(&ds, cfg.settings())?;
    let mut agent = cfg.build_agent()?;
    let mut sink = DirSink::new(dir, stop)?;
    let status = runner.run(agent.as_mut(), &mut sink, None)?;
    finish(dir, &runner, agent.describe(), status)
}

/// The checkpoint in `dir` with the largest cursor.
pub fn latest_checkpoint(dir: &Path) -> Result<Checkpoint<RunProgress>, RunError> {
    let cdir = dir.join(CHECKPOINT_DIR);
    let entries = std::fs::read_dir(&cdir).map_err(io(format!("no checkpoints in {}", dir.display())))?;
    let mut best: Option<(usize, PathBuf)> = None;
    for entry in entries {
        let path = entry.map_err(io(format!("listing {}", cdir.display())))?.path();
        let cursor = path
            .file_stem()
            .and_then(|s| s.to_str())
            .filter(|s| s.starts_with("checkpoint_"))
            .and_then(|s| s.rsplit('_').next())
            .and_then(|c| c.parse::<usize>().ok());
        if let Some(c) = cursor {
            if best.as_ref().is_none_or(|(b, _)| c > *b) {
                best = Some((c, path));
            }
        }
    }
    let (_, path) = best.ok_or_else(|| RunError::Resume(format!("no checkpoint found in {}", cdir.display())))?;
    let text = std::fs::read_to_string(&path).map_err(io(format!("reading {}", path.display())))?;
    Ok(Checkpoint::from_text(&text)?)
}

pub fn read_echo(dir: &Path) -> Result<RunEcho, RunError> {
    let path = dir.join(RUN_FILE);
    let text = std::fs::read_to_string(&path).map_err(io(format!("reading {}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

/// Continues the run in `dir` from its newest checkpoint.
pub fn resume_run(dir: &Path, stop: Arc<AtomicBool>) -> Result<DirOutcome, RunError> {
    let echo = read_echo(dir)?;
    let cfg = echo.config;
    let checkpoint = latest_checkpoint(dir)?;
    let ds = open_dataset(&cfg)?;
    if ds.hash != echo.dataset_hash || checkpoint.dataset_hash != ds.hash {
        return Err(RunError::Resume(format!(
            "dataset {} changed since the run started (hash {} now, {} recorded)",
            cfg.dataset.display(),
            ds.hash,
            checkpoint.dataset_hash
        )));
    }
    let runner = Runner::new(&ds, cfg.settings())?;
    let mut agent = cfg.build_agent()?;
    let mut sink = DirSink::new(dir, stop)?;
    let status = runner.run(agent.as_mut(), &mut sink, Some(checkpoint))?;
    finish(dir, &runner, agent.describe(), status)
}

/// Rebuilds the report from stored outcomes without touching the run.
pub fn load_report(dir: &Path) -> Result<ReportBundle, RunError> {
    let path = dir.join(OUTCOMES_FILE);
    let text = std::fs::read_to_string(&path).map_err(io(format!("reading {}", path.display())))?;
    let stored: StoredOutcomes =
        serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    stored.report()
}
