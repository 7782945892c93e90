mod common;

use common::*;
use stulife_core::agent::ReplayAgent;
use stulife_core::controller::{MemorySink, ProbeConfig, RunError, RunProgress, RunSink, RunStatus, Runner};
use stulife_core::evaluation::FailureReason;
use stulife_core::world::Checkpoint;

fn report(r: &stulife_core::controller::RunResult) -> String {
    let mut rep = r.report.clone();
    rep.zero_wall_clock();
    rep.to_json()
}

/// Stops on the `polls`-th poll for task `at`, which lands between turns.
struct StopMidTask {
    at: usize,
    polls: usize,
    seen: usize,
    inner: MemorySink,
}

impl RunSink for StopMidTask {
    fn checkpoint(&mut self, cp: &Checkpoint<RunProgress>) -> Result<(), RunError> {
        self.inner.checkpoint(cp)
    }

    fn should_stop(&mut self, cursor: usize) -> bool {
        if cursor == self.at {
            self.seen += 1;
        }
        cursor == self.at && self.seen == self.polls
    }
}

#[test]
fn mid_task_interrupt_checkpoints_the_last_boundary() {
    let ds = mini();
    let at = ds.task_index("course_sel_01").unwrap();
    let runner = Runner::new(&ds, settings("mid")).unwrap();

    let mut boundary = MemorySink {
        stop_at: Some(at),
        ..MemorySink::default()
    };
    let RunStatus::Interrupted { checkpoint: clean, .. } =
        runner.run(&mut ReplayAgent::new(script("oracle.json")), &mut boundary, None).unwrap()
    else {
        panic!("boundary stop did not interrupt");
    };

    let mut sink = StopMidTask {
        at,
        polls: 4,
        seen: 0,
        inner: MemorySink::default(),
    };
    let status = runner.run(&mut ReplayAgent::new(script("oracle.json")), &mut sink, None).unwrap();
    let RunStatus::Interrupted { cursor, checkpoint } = status else {
        panic!("mid-task stop did not interrupt");
    };
    assert_eq!(cursor, at);
    assert_eq!(checkpoint.run_cursor, at);
    assert_eq!(checkpoint.outcome_log.outcomes.len(), at);
    assert_eq!(checkpoint.world, clean.world, "partial task effects leaked into the checkpoint");
    assert_eq!(sink.inner.checkpoints.last(), Some(&*checkpoint));

    let resumed = runner
        .run(&mut ReplayAgent::new(script("oracle.json")), &mut MemorySink::default(), Some(*checkpoint))
        .unwrap()
        .completed()
        .unwrap();
    assert_eq!(report(&resumed), report(&run_replay(&ds, "oracle.json", settings("mid"))));
}

#[test]
fn resume_refuses_a_checkpoint_from_another_dataset() {
    let ds = mini();
    let runner = Runner::new(&ds, settings("hash")).unwrap();
    let mut sink = MemorySink {
        stop_at: Some(5),
        ..MemorySink::default()
    };
    let RunStatus::Interrupted { checkpoint, .. } =
        runner.run(&mut ReplayAgent::new(script("oracle.json")), &mut sink, None).unwrap()
    else {
        panic!("run did not stop");
    };
    let mut foreign = *checkpoint;
    foreign.dataset_hash = "0".repeat(64);
    let err = runner
        .run(&mut ReplayAgent::new(script("oracle.json")), &mut MemorySink::default(), Some(foreign))
        .unwrap_err();
    assert!(matches!(err, RunError::Resume(ref m) if m.contains("dataset")), "{err}");
}

#[test]
fn checkpoints_follow_the_cadence() {
    let ds = mini();
    let runner = Runner::new(
        &ds,
        stulife_core::controller::RunSettings {
            checkpoint_every: 10,
            ..settings("cadence")
        },
    )
    .unwrap();
    let mut sink = MemorySink::default();
    runner.run(&mut ReplayAgent::new(script("oracle.json")), &mut sink, None).unwrap();
    let cursors: Vec<usize> = sink.checkpoints.iter().map(|c| c.run_cursor).collect();
    assert_eq!(cursors, vec![10, 20, 30, 35]);
}

#[test]
fn empty_dataset_reports_null_metrics() {
    let ds = subset(Some(&[]));
    let r = run_replay(&ds, "oracle.json", settings("empty"));
    let rep = &r.report;
    assert_eq!(rep.tasks_evaluated, 0);
    assert_eq!(rep.core.totals.per_task.success_rate, None);
    assert_eq!(rep.core.totals.per_task.avg_turns, None);
    assert_eq!(rep.core.stugpa.total, None);
    assert_eq!(rep.core.ltrr.percent, None);
    assert_eq!(rep.core.pis.percent, None);
    assert_eq!(rep.efficiency.memory_utilization, None);
    assert!(rep.lifelong.is_none());
    let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    assert!(json.pointer("/core/stugpa/total").unwrap().is_null());
}

#[test]
fn stood_up_when_absent_from_a_booked_meeting() {
    let ds = mini();
    let mut s = script("oracle.json");
    s.tasks.insert("advisor_02".into(), vec!["<action>Action: finish()</action>".into()]);
    let runner = Runner::new(&ds, settings("stood")).unwrap();
    let r = runner
        .run(&mut ReplayAgent::new(s), &mut MemorySink::default(), None)
        .unwrap()
        .completed()
        .unwrap();
    let o = r.progress.outcomes.iter().find(|o| o.task_id == "advisor_02").unwrap();
    assert_eq!(o.failure_reason, Some(FailureReason::StoodUp));
    assert_eq!(o.presence_ok, Some(false));
    assert_eq!(o.proactive_success, Some(false));
    assert!(r.progress.squandered.iter().any(|b| b.task_id == "advisor_01"));
    assert_eq!(r.report.core.stugpa.infractions, 2, "unused room plus missed meeting");
}

#[test]
fn exhausted_script_fails_only_that_task() {
    let ds = mini();
    let mut s = script("oracle.json");
    s.tasks.remove("library_01");
    let runner = Runner::new(&ds, settings("short")).unwrap();
    let r = runner
        .run(&mut ReplayAgent::new(s), &mut MemorySink::default(), None)
        .unwrap()
        .completed()
        .unwrap();
    let failed: Vec<_> = r.progress.outcomes.iter().filter(|o| !o.success).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].task_id, "library_01");
    assert_eq!(failed[0].failure_reason, Some(FailureReason::AgentExhausted));
}

#[test]
fn probe_tasks_fill_the_performance_matrix() {
    let ds = mini();
    let probes = ["campus_01", "library_01", "core_01"];
    let settings = stulife_core::controller::RunSettings {
        probe: Some(ProbeConfig {
            tasks: probes.iter().map(|s| s.to_string()).collect(),
        }),
        ..settings("probe")
    };
    let with = run_replay(&ds, "oracle.json", settings);
    let without = run_replay(&ds, "oracle.json", common::settings("probe"));
    assert_eq!(with.progress.outcomes, without.progress.outcomes, "probing changed the main run");

    let m = &with.progress.matrix;
    assert_eq!(m.rows, vec![vec![1.0], vec![1.0, 1.0], vec![1.0, 1.0, 1.0]]);
    assert_eq!(m.baseline.as_deref(), Some(&[1.0, 1.0, 1.0][..]));
    let ll = with.report.lifelong.as_ref().unwrap();
    assert_eq!(ll.aip, Some(1.0));
    assert!(ll.steps.iter().skip(1).all(|s| s.fgt == Some(0.0) && s.bwt == Some(0.0) && s.fwt == Some(0.0)));
    assert_eq!(with.report.transfer.as_ref().unwrap().v, 0.0);
    assert!(without.report.lifelong.is_none());
}

#[test]
fn probe_ids_must_exist() {
    let ds = mini();
    let bad = stulife_core::controller::RunSettings {
        probe: Some(ProbeConfig {
            tasks: vec!["nope".into()],
        }),
        ..settings("probe")
    };
    assert!(matches!(Runner::new(&ds, bad), Err(RunError::Config(m)) if m.contains("nope")));
}

#[test]
fn transcripts_open_with_the_time_and_instruction() {
    let ds = mini();
    let runner = Runner::new(&ds, settings("tx")).unwrap();
    let mut sink = MemorySink::default();
    runner.run(&mut ReplayAgent::new(script("oracle.json")), &mut sink, None).unwrap();
    let t = &sink.transcripts["campus_01"];
    assert!(t[0].text.starts_with(&format!("It is now {}.", ds.dataset.tasks[0].start_time)));
    assert!(t[0].text.contains(ds.dataset.tasks[0].instruction.trim()));
    assert_eq!(t.len(), 2 * 4);
    assert!(sink.transcripts["club_03"].is_empty() || sink.transcripts["club_03"][0].text.starts_with("It is now"));
}
