use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{RunError, RunSettings, DEFAULT_CHECKPOINT_EVERY, DEFAULT_MAX_TURNS};
use crate::agent::presets::{preset, PRESET_NAMES};
use crate::agent::remote::{RemoteAgent, RemoteConfig};
use crate::agent::replay::{ReplayAgent, ReplayScript};
use crate::agent::Agent;

/// Probe tasks whose earlier scores are re-measured after each later probe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub tasks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentConfig {
    Replay { script: PathBuf },
    Remote(RemoteConfig),
}

fn default_preset() -> String {
    "vanilla".into()
}

fn default_max_turns() -> u32 {
    DEFAULT_MAX_TURNS
}

fn default_checkpoint_every() -> usize {
    DEFAULT_CHECKPOINT_EVERY
}

fn default_run_id() -> String {
    "run".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub agent: AgentConfig,
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_turns")]
    pub max_turns: u32,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
    pub out: PathBuf,
    #[serde(default = "default_run_id")]
    pub run_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
}

impl RunConfig {
    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
            context: format!("reading run config {}", path.display()),
            source,
        })?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_against(base);
        Ok(cfg)
    }

    pub fn resolve_against(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset);
        fix(&mut self.out);
        if let AgentConfig::Replay { script } = &mut self.agent {
            fix(script);
        }
    }

    /// Checks invariants that do not require loading the dataset.
    pub fn validate(&self) -> Result<(), RunError> {
        if preset(&self.preset).is_none() {
            return Err(RunError::Config(format!(
                "unknown preset `{}` (expected one of {})",
                self.preset,
                PRESET_NAMES.join(", ")
            )));
        }
        if !self.dataset.exists() {
            return Err(RunError::Config(format!("dataset {} does not exist", self.dataset.display())));
        }
        if let AgentConfig::Replay { script } = &self.agent {
            if !script.is_file() {
                return Err(RunError::Config(format!("replay script {} does not exist", script.display())));
            }
        }
        if self.max_turns == 0 {
            return Err(RunError::Config("max_turns must be at least 1".into()));
        }
        if self.run_id.is_empty() || self.run_id.contains(['/', '\\']) {
            return Err(RunError::Config(format!("run_id `{}` is not a valid file name part", self.run_id)));
        }
        Ok(())
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            run_id: self.run_id.clone(),
            seed: self.seed,
            max_turns: self.max_turns,
            checkpoint_every: self.checkpoint_every,
            preset: self.preset.clone(),
            probe: self.probe.clone(),
        }
    }

    pub fn build_agent(&self) -> Result<Box<dyn Agent>, RunError> {
        match &self.agent {
            AgentConfig::Replay { script } => {
                let script = ReplayScript::load(script).map_err(RunError::Config)?;
                Ok(Box::new(ReplayAgent::new(script)))
            }
            AgentConfig::Remote(remote) => {
                let prompt = preset(&self.preset)
                    .ok_or_else(|| RunError::Config(format!("unknown preset `{}`", self.preset)))?;
                Ok(Box::new(RemoteAgent::new(remote.clone(), prompt)))
            }
        }
    }

    /// Same config with every path made absolute.
    pub fn absolutized(&self) -> Self {
        let cwd = std::env::current_dir().unwrap_or_default();
        let mut c = self.clone();
        c.resolve_against(&cwd);
        let canon = |p: &mut PathBuf| {
            if let Ok(abs) = p.canonicalize() {
                *p = abs;
            }
        };
        canon(&mut c.dataset);
        canon(&mut c.out);
        if let AgentConfig::Replay { script } = &mut c.agent {
            canon(script);
        }
        c
    }
}
