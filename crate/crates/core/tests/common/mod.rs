#![allow(dead_code)]

pub mod graphs;

use std::path::PathBuf;

use stulife_core::agent::{ReplayAgent, ReplayScript};
use stulife_core::controller::{MemorySink, RunResult, RunSettings, Runner};
use stulife_core::dataset::{load_dataset, LoadedDataset};

pub fn mini_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/mini")
}

pub fn mini() -> LoadedDataset {
    load_dataset(&mini_dir()).expect("bundled mini-dataset loads")
}

pub fn script(name: &str) -> ReplayScript {
    ReplayScript::load(&mini_dir().join(name)).expect("bundled replay script loads")
}

pub fn settings(run_id: &str) -> RunSettings {
    RunSettings {
        run_id: run_id.into(),
        seed: 7,
        ..RunSettings::default()
    }
}

/// Runs `script_name` over the mini-dataset to completion.
pub fn run_replay(ds: &LoadedDataset, script_name: &str, settings: RunSettings) -> RunResult {
    let runner = Runner::new(ds, settings).unwrap();
    let mut agent = ReplayAgent::new(script(script_name));
    let mut sink = MemorySink::default();
    runner
        .run(&mut agent, &mut sink, None)
        .unwrap()
        .completed()
        .expect("run completes")
}

/// The mini-dataset reduced to `keep` (all tasks when `None`), with
/// references to dropped tasks removed.
pub fn subset(keep: Option<&[&str]>) -> LoadedDataset {
    let text = std::fs::read_to_string(mini_dir().join("dataset.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("declared_counts");
    obj.remove("popularity_updates");
    let tasks = obj["tasks"].as_array_mut().unwrap();
    tasks.retain(|t| keep.is_some_and(|k| k.contains(&t["task_id"].as_str().unwrap())));
    let ids: Vec<String> = tasks.iter().map(|t| t["task_id"].as_str().unwrap().to_string()).collect();
    for t in tasks.iter_mut() {
        let t = t.as_object_mut().unwrap();
        if let Some(deps) = t.get_mut("depends_on").and_then(|d| d.as_array_mut()) {
            deps.retain(|d| ids.iter().any(|i| i == d["task_id"].as_str().unwrap()));
        }
        if t.get("memory_source").and_then(|m| m.as_str()).is_some_and(|m| !ids.iter().any(|i| i == m)) {
            t.remove("memory_source");
        }
    }
    stulife_core::dataset::load_dataset_str(&v.to_string()).expect("subset is valid")
}
