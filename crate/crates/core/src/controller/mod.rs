//! The serial benchmark loop over one persistent world.

pub mod config;
pub mod rundir;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{parse_action, Agent, AgentAction, AgentError, ConversationTurn, Role};
use crate::dataset::LoadedDataset;
use crate::evaluation::{
    evaluate_trigger_window, verify_task, FailureReason, OutcomeRecord, PerformanceMatrix, ReportBundle, RunMeta,
    SquanderedBooking, VerifyError,
};
use crate::evaluation::report::TURN_ACCOUNTING;
use crate::task::TaskSpec;
use crate::tools::{dispatch, TaskFacts};
use crate::world::{Checkpoint, CheckpointError, WorldError, WorldState};

pub use config::{AgentConfig, ProbeConfig, RunConfig};

pub const DEFAULT_MAX_TURNS: u32 = 30;
pub const DEFAULT_CHECKPOINT_EVERY: usize = 10;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("{0}")]
    Resume(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("configuration error: {0}")]
    Config(String),
}

/// Parameters of one run that do not depend on where its files live.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSettings {
    pub run_id: String,
    pub seed: u64,
    pub max_turns: u32,
    pub checkpoint_every: usize,
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            run_id: "run".into(),
            seed: 0,
            max_turns: DEFAULT_MAX_TURNS,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            preset: "vanilla".into(),
            probe: None,
        }
    }
}

/// Everything a checkpoint must carry besides the world.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunProgress {
    pub outcomes: Vec<OutcomeRecord>,
    pub squandered: Vec<SquanderedBooking>,
    #[serde(default)]
    pub matrix: PerformanceMatrix,
    /// World as it stood before each probe task first ran, keyed by index.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub probe_worlds: BTreeMap<usize, WorldState>,
}

/// Receives run artifacts and decides when to stop early.
pub trait RunSink {
    fn transcript(&mut self, _task_id: &str, _turns: &[ConversationTurn]) -> Result<(), RunError> {
        Ok(())
    }

    fn checkpoint(&mut self, _checkpoint: &Checkpoint<RunProgress>) -> Result<(), RunError> {
        Ok(())
    }

    /// Polled before each task and between agent turns; `cursor` is the
    /// index of the task about to run or running.
    fn should_stop(&mut self, _cursor: usize) -> bool {
        false
    }
}

/// A sink that keeps checkpoints in memory and never stops.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub checkpoints: Vec<Checkpoint<RunProgress>>,
    pub transcripts: BTreeMap<String, Vec<ConversationTurn>>,
    /// Stop before the task with this index starts.
    pub stop_at: Option<usize>,
}

impl RunSink for MemorySink {
    fn transcript(&mut self, task_id: &str, turns: &[ConversationTurn]) -> Result<(), RunError> {
        self.transcripts.insert(task_id.to_string(), turns.to_vec());
        Ok(())
    }

    fn checkpoint(&mut self, checkpoint: &Checkpoint<RunProgress>) -> Result<(), RunError> {
        self.checkpoints.push(checkpoint.clone());
        Ok(())
    }

    fn should_stop(&mut self, cursor: usize) -> bool {
        self.stop_at == Some(cursor)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub progress: RunProgress,
    pub report: ReportBundle,
    pub world: WorldState,
}

#[derive(Debug, Clone)]
pub enum RunStatus {
    Completed(Box<RunResult>),
    /// Stopped at a task boundary; a checkpoint for `cursor` was emitted.
    Interrupted { cursor: usize, checkpoint: Box<Checkpoint<RunProgress>> },
}

impl RunStatus {
    pub fn completed(self) -> Option<RunResult> {
        match self {
            RunStatus::Completed(r) => Some(*r),
            RunStatus::Interrupted { .. } => None,
        }
    }
}

struct TaskRun {
    record: OutcomeRecord,
    turns: Vec<ConversationTurn>,
}

enum Step {
    Done(Box<TaskRun>),
    Stopped,
}

/// Renders a transcript as plain text.
pub fn render_transcript(turns: &[ConversationTurn]) -> String {
    let mut out = String::new();
    for t in turns {
        let who = match t.role {
            Role::Environment => "environment",
            Role::Agent => "agent",
        };
        out.push_str(&format!("[{who} @ {}]\n{}\n\n", t.clock_at, t.text.trim_end()));
    }
    out
}

pub struct Runner<'a> {
    pub dataset: &'a LoadedDataset,
    pub settings: RunSettings,
    probe_indices: Vec<usize>,
}

impl<'a> Runner<'a> {
    pub fn new(dataset: &'a LoadedDataset, settings: RunSettings) -> Result<Self, RunError> {
        if settings.max_turns == 0 {
            return Err(RunError::Config("max_turns must be at least 1".into()));
        }
        let mut probe_indices = Vec::new();
        if let Some(p) = &settings.probe {
            for id in &p.tasks {
                let i = dataset
                    .task_index(id)
                    .ok_or_else(|| RunError::Config(format!("probe task `{id}` is not in the dataset")))?;
                probe_indices.push(i);
            }
            probe_indices.sort_unstable();
            probe_indices.dedup();
        }
        Ok(Self {
            dataset,
            settings,
            probe_indices,
        })
    }

    fn tasks(&self) -> &[TaskSpec] {
        &self.dataset.dataset.tasks
    }

    pub fn initial_world(&self) -> WorldState {
        self.dataset.initial_world(self.settings.seed)
    }

    pub fn meta(&self, agent: &dyn Agent, elapsed_ms: u64) -> RunMeta {
        RunMeta {
            run_id: self.settings.run_id.clone(),
            dataset_name: self.dataset.dataset.name.clone(),
            dataset_hash: self.dataset.hash.clone(),
            agent: agent.describe(),
            preset: self.settings.preset.clone(),
            seed: self.settings.seed,
            max_turns: self.settings.max_turns,
            turn_accounting: TURN_ACCOUNTING.into(),
            elapsed_ms,
        }
    }

    fn snapshot(&self, world: &WorldState, cursor: usize, progress: &RunProgress) -> Checkpoint<RunProgress> {
        Checkpoint::snapshot(&self.settings.run_id, &self.dataset.hash, world, cursor, progress.clone())
    }

    /// Runs from the start, or from `resume` when given.
    pub fn run(
        &self,
        agent: &mut dyn Agent,
        sink: &mut dyn RunSink,
        resume: Option<Checkpoint<RunProgress>>,
    ) -> Result<RunStatus, RunError> {
        let started = Instant::now();
        let (mut world, mut progress, start) = match resume {
            Some(cp) => {
                if cp.dataset_hash != self.dataset.hash {
                    return Err(RunError::Resume(format!(
                        "checkpoint was taken on dataset {} but the dataset now hashes to {}",
                        cp.dataset_hash, self.dataset.hash
                    )));
                }
                if cp.run_cursor > self.tasks().len() || cp.outcome_log.outcomes.len() != cp.run_cursor {
                    return Err(RunError::Resume(format!(
                        "checkpoint cursor {} does not fit a dataset of {} tasks",
                        cp.run_cursor,
                        self.tasks().len()
                    )));
                }
                (cp.world, cp.outcome_log, cp.run_cursor)
            }
            None => {
                let world = self.initial_world();
                let mut progress = RunProgress::default();
                if !self.probe_indices.is_empty() {
                    let mut baseline = Vec::new();
                    for &i in &self.probe_indices {
                        baseline.push(self.sandbox_score(&world, i, agent)?);
                    }
                    progress.matrix.baseline = Some(baseline);
                }
                (world, progress, 0)
            }
        };

        for index in start..self.tasks().len() {
            if sink.should_stop(index) {
                return self.interrupt(sink, &world, index, progress);
            }
            let before = world.clone();
            if self.probe_indices.contains(&index) {
                progress.probe_worlds.insert(index, before.clone());
            }
            let step = self.execute(&mut world, index, agent, Some(&mut progress), sink)?;
            let run = match step {
                Step::Done(run) => run,
                Step::Stopped => return self.interrupt(sink, &before, index, progress),
            };
            sink.transcript(&run.record.task_id, &run.turns)?;
            let success = run.record.success;
            progress.outcomes.push(run.record);

            if let Some(t) = self.probe_indices.iter().position(|&p| p == index) {
                let mut row = Vec::with_capacity(t + 1);
                for &earlier in &self.probe_indices[..t] {
                    let pre = &progress.probe_worlds[&earlier];
                    row.push(self.sandbox_score(pre, earlier, agent)?);
                }
                row.push(if success { 1.0 } else { 0.0 });
                progress.matrix.rows.push(row);
            }

            let cursor = index + 1;
            if self.settings.checkpoint_every > 0 && cursor % self.settings.checkpoint_every == 0 {
                sink.checkpoint(&self.snapshot(&world, cursor, &progress))?;
            }
        }

        if self.settings.checkpoint_every > 0 && !self.tasks().len().is_multiple_of(self.settings.checkpoint_every) {
            sink.checkpoint(&self.snapshot(&world, self.tasks().len(), &progress))?;
        }
        let matrix = (!progress.matrix.is_empty()).then_some(&progress.matrix);
        let report = ReportBundle::build(
            self.meta(agent, started.elapsed().as_millis() as u64),
            self.dataset.counts.clone(),
            &progress.outcomes,
            &progress.squandered,
            matrix,
        )
        .map_err(RunError::Dataset)?;
        Ok(RunStatus::Completed(Box::new(RunResult {
            progress,
            report,
            world,
        })))
    }

    fn interrupt(
        &self,
        sink: &mut dyn RunSink,
        world: &WorldState,
        cursor: usize,
        progress: RunProgress,
    ) -> Result<RunStatus, RunError> {
        let cp = self.snapshot(world, cursor, &progress);
        sink.checkpoint(&cp)?;
        tracing::info!(cursor, "run interrupted at task boundary");
        Ok(RunStatus::Interrupted {
            cursor,
            checkpoint: Box::new(cp),
        })
    }

    /// Re-runs task `index` on a throwaway copy of `world`, ignoring
    /// dependencies, and scores it 1 or 0.
    fn sandbox_score(&self, world: &WorldState, index: usize, agent: &mut dyn Agent) -> Result<f64, RunError> {
        let mut copy = world.clone();
        let mut quiet = MemorySink::default();
        match self.execute(&mut copy, index, agent, None, &mut quiet)? {
            Step::Done(run) => Ok(if run.record.success { 1.0 } else { 0.0 }),
            Step::Stopped => Ok(0.0),
        }
    }

    /// Runs one task. `progress` is `None` for sandbox re-evaluation, which
    /// rewinds the clock instead of advancing it and skips dependencies.
    fn execute(
        &self,
        world: &mut WorldState,
        index: usize,
        agent: &mut dyn Agent,
        mut progress: Option<&mut RunProgress>,
        sink: &mut dyn RunSink,
    ) -> Result<Step, RunError> {
        let task = &self.tasks()[index];
        let sandbox = progress.is_none();

        for u in &task.world_updates {
            world.courses.apply_update(u).map_err(RunError::Dataset)?;
        }
        if let Some(sem) = task.semester {
            let alloc = self.dataset.dataset.pass_allocations.get(&sem).cloned().ok_or_else(|| {
                RunError::Dataset(format!("task {} names semester {sem} without an allocation", task.task_id))
            })?;
            world.courses.begin_semester(sem, alloc);
        }
        if sandbox {
            world.clock = task.start_time;
            world.location = world.map.default_start_building().clone();
        } else {
            world.advance_clock(task.start_time)?;
        }
        if let Some(p) = progress.as_deref_mut() {
            for b in world.reservations.judge_squandered(world.clock) {
                p.squandered.push(SquanderedBooking {
                    booking_id: b.booking_id,
                    task_id: b.task_id,
                    judged_at: world.clock,
                });
            }
        }
        let (here, now) = (world.location.clone(), world.clock);
        world.reservations.mark_used(&here, now);

        let mut record = OutcomeRecord {
            task_id: task.task_id.clone(),
            index,
            scenario: task.scenario,
            flags: task.flags,
            clock_at_start: world.clock,
            success: false,
            failure_reason: None,
            detail: None,
            turns: 0,
            tokens_in: None,
            tokens_out: None,
            latency_ms: None,
            latency_samples: None,
            dependency_failed: false,
            failed_ancestor: None,
            soft_dependency_failures: vec![],
            presence_ok: None,
            proactive_success: None,
            broken_commitment: false,
            memory_distance: task
                .memory_source
                .as_ref()
                .and_then(|s| self.dataset.task_index(s))
                .map(|src| (index - src) as u32),
        };

        if let Some(p) = progress.as_deref() {
            let outcome = |id: &str| p.outcomes.iter().find(|o| o.task_id == id);
            record.soft_dependency_failures = task
                .depends_on
                .iter()
                .filter(|d| d.kind == crate::task::DependencyKind::Soft)
                .filter(|d| outcome(&d.task_id).is_some_and(|o| !o.success))
                .map(|d| d.task_id.clone())
                .collect();
            let failed = task
                .hard_dependencies()
                .filter_map(outcome)
                .find(|o| !o.success);
            if let Some(dep) = failed {
                record.dependency_failed = true;
                record.failed_ancestor = Some(dep.failed_ancestor.clone().unwrap_or_else(|| dep.task_id.clone()));
                record.failure_reason = Some(FailureReason::DependencyFailed);
                record.detail = Some(format!("depends on failed task {}", dep.task_id));
                if task.presence_requirement().is_some() {
                    record.presence_ok = Some(false);
                }
                if task.flags.self_motivated {
                    record.proactive_success = Some(false);
                }
                return Ok(Step::Done(Box::new(TaskRun { record, turns: vec![] })));
            }
        }

        let mut facts = TaskFacts::default();
        facts.visits.push((world.location.clone(), world.clock));
        let opening = format!(
            "It is now {}.\n\n{}\n\nAvailable tool systems: {}.",
            world.clock,
            task.instruction.trim(),
            task.tool_whitelist.join(", ")
        );
        let env_turn = |text: String, world: &WorldState| ConversationTurn {
            role: Role::Environment,
            text,
            clock_at: world.clock,
            token_count: None,
            latency_ms: None,
        };
        let mut turns = vec![env_turn(opening, world)];
        let mut forced: Option<(FailureReason, String)> = None;

        loop {
            if record.turns >= self.settings.max_turns {
                forced = Some((FailureReason::TurnLimit, format!("no answer or finish within {} turns", self.settings.max_turns)));
                break;
            }
            if !sandbox && sink.should_stop(index) {
                return Ok(Step::Stopped);
            }
            let reply = match agent.step(&task.task_id, &turns) {
                Ok(r) => r,
                Err(e @ AgentError::Exhausted { .. }) => {
                    forced = Some((FailureReason::AgentExhausted, e.to_string()));
                    break;
                }
                Err(e) => {
                    forced = Some((FailureReason::AgentError, e.to_string()));
                    break;
                }
            };
            record.turns += 1;
            let add = |acc: &mut Option<u64>, x: Option<u64>| {
                if let Some(x) = x {
                    *acc = Some(acc.unwrap_or(0) + x);
                }
            };
            add(&mut record.tokens_in, reply.tokens_in);
            add(&mut record.tokens_out, reply.tokens_out);
            add(&mut record.latency_ms, reply.latency_ms);
            add(&mut record.latency_samples, reply.latency_ms.map(|_| 1));
            turns.push(ConversationTurn {
                role: Role::Agent,
                text: reply.text.clone(),
                clock_at: world.clock,
                token_count: reply.tokens_out,
                latency_ms: reply.latency_ms,
            });
            let observation = match parse_action(&reply.text) {
                Err(e) => e.to_string(),
                Ok(AgentAction::Answer(c)) => {
                    facts.answer = Some(c);
                    break;
                }
                Ok(AgentAction::Finish) => {
                    facts.finished = true;
                    break;
                }
                Ok(AgentAction::ToolCall { tool, args }) => match dispatch(world, task, &mut facts, &tool, &args) {
                    Ok(text) => text,
                    Err(e) => e.to_string(),
                },
            };
            turns.push(env_turn(observation, world));
        }

        let verdict = verify_task(task, &facts, world)?;
        record.presence_ok = verdict.presence_ok;
        record.broken_commitment = verdict.broken_commitment;
        match forced {
            Some((reason, detail)) => {
                record.success = false;
                record.failure_reason = Some(reason);
                record.detail = Some(detail);
            }
            None => {
                record.success = verdict.success;
                record.failure_reason = verdict.failure_reason;
                record.detail = verdict.detail;
            }
        }
        if task.flags.self_motivated {
            record.proactive_success = Some(evaluate_trigger_window(task, &facts, record.success));
        }
        Ok(Step::Done(Box::new(TaskRun { record, turns })))
    }
}
