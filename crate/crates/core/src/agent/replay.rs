use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_transcript, Agent, AgentError, AgentReply, ConversationTurn, Role};

/// Ordered responses per task id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayScript {
    pub tasks: BTreeMap<String, Vec<String>>,
}

impl ReplayScript {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Returns the scripted line at (task id, number of agent turns so far).
#[derive(Debug, Clone)]
pub struct ReplayAgent {
    script: ReplayScript,
}

impl ReplayAgent {
    pub fn new(script: ReplayScript) -> Self {
        Self { script }
    }

    pub fn script(&self) -> &ReplayScript {
        &self.script
    }
}

impl Agent for ReplayAgent {
    fn step(&mut self, task_id: &str, transcript: &[ConversationTurn]) -> Result<AgentReply, AgentError> {
        check_transcript(transcript)?;
        let turn = transcript.iter().filter(|t| t.role == Role::Agent).count();
        self.script
            .tasks
            .get(task_id)
            .and_then(|lines| lines.get(turn))
            .map(|line| AgentReply::text(line.clone()))
            .ok_or_else(|| AgentError::Exhausted {
                task_id: task_id.to_string(),
                turn,
            })
    }

    fn describe(&self) -> String {
        "replay".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn turn(role: Role, text: &str) -> ConversationTurn {
        ConversationTurn {
            role,
            text: text.into(),
            clock_at: "Week 0, Monday, 08:00".parse().unwrap(),
            token_count: None,
            latency_ms: None,
        }
    }

    #[test]
    fn lines_come_back_in_order() {
        let script = ReplayScript {
            tasks: [("t1".to_string(), vec!["a".into(), "b".into(), "c".into()])].into_iter().collect(),
        };
        let mut agent = ReplayAgent::new(script);
        let mut transcript = vec![turn(Role::Environment, "go")];
        let mut seen = Vec::new();
        for _ in 0..3 {
            let r = agent.step("t1", &transcript).unwrap();
            seen.push(r.text.clone());
            transcript.push(turn(Role::Agent, &r.text));
            transcript.push(turn(Role::Environment, "ok"));
        }
        assert_eq!(seen, ["a", "b", "c"]);
        assert!(matches!(agent.step("t1", &transcript), Err(AgentError::Exhausted { turn: 3, .. })));
    }

    #[test]
    fn requires_environment_last() {
        let mut agent = ReplayAgent::new(ReplayScript::default());
        let t = vec![turn(Role::Environment, "go"), turn(Role::Agent, "x")];
        assert!(matches!(agent.step("t1", &t), Err(AgentError::Precondition(_))));
        assert!(matches!(agent.step("t1", &[]), Err(AgentError::Precondition(_))));
    }
}
