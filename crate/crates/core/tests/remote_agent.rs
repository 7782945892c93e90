mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};

use common::*;
use stulife_core::agent::{Agent, AgentError, ConversationTurn, RemoteAgent, RemoteConfig, Role};
use stulife_core::controller::{MemorySink, RunSettings, Runner};
use stulife_core::evaluation::FailureReason;

#[derive(Debug, Clone)]
struct Seen {
    auth: Option<String>,
    body: Value,
}

type Responder = Box<dyn Fn(usize) -> (u16, Value) + Send>;

/// A one-request-per-connection HTTP stub answering from `respond(n)`.
fn stub(respond: Responder) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    std::thread::spawn(move || {
        for (n, stream) in listener.incoming().enumerate() {
            let Ok(stream) = stream else { return };
            let request = read_request(&stream);
            log.lock().unwrap().push(request);
            let (status, body) = respond(n);
            let text = body.to_string();
            let mut s = stream;
            let _ = write!(
                s,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                text.len()
            );
        }
    });
    (url, seen)
}

fn read_request(stream: &TcpStream) -> Seen {
    let mut r = BufReader::new(stream);
    let (mut len, mut auth) = (0usize, None);
    loop {
        let mut line = String::new();
        r.read_line(&mut line).unwrap();
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            match k.to_ascii_lowercase().as_str() {
                "content-length" => len = v.trim().parse().unwrap(),
                "authorization" => auth = Some(v.trim().to_string()),
                _ => {}
            }
        }
    }
    let mut body = vec![0; len];
    r.read_exact(&mut body).unwrap();
    Seen {
        auth,
        body: serde_json::from_slice(&body).unwrap_or(Value::Null),
    }
}

fn completion(text: &str) -> Value {
    json!({
        "choices": [{"message": {"role": "assistant", "content": text}}],
        "usage": {"prompt_tokens": 11, "completion_tokens": 4}
    })
}

fn config(url: &str, retries: u32) -> RemoteConfig {
    RemoteConfig {
        base_url: url.to_string(),
        model: "stub-model".into(),
        timeout_secs: 5,
        retries,
    }
}

fn opening() -> Vec<ConversationTurn> {
    vec![ConversationTurn {
        role: Role::Environment,
        text: "It is now Week 0, Monday, 08:00.".into(),
        clock_at: "Week 0, Monday, 08:00".parse().unwrap(),
        token_count: None,
        latency_ms: None,
    }]
}

#[test]
fn sends_the_transcript_and_reads_usage() {
    let (url, seen) = stub(Box::new(|_| (200, completion("<action>Action: finish()</action>"))));
    let mut agent = RemoteAgent::with_key(config(&url, 0), "SYSTEM PROMPT", Some("k3y".into()));
    let reply = agent.step("t1", &opening()).unwrap();
    assert_eq!(reply.text, "<action>Action: finish()</action>");
    assert_eq!((reply.tokens_in, reply.tokens_out), (Some(11), Some(4)));
    assert!(reply.latency_ms.is_some());
    assert_eq!(agent.describe(), "remote:stub-model");

    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 1);
    assert_eq!(seen[0].auth.as_deref(), Some("Bearer k3y"));
    let msgs = seen[0].body["messages"].as_array().unwrap();
    assert_eq!(msgs[0], json!({"role": "system", "content": "SYSTEM PROMPT"}));
    assert_eq!(msgs[1]["role"], "user");
    assert_eq!(seen[0].body["model"], "stub-model");
}

#[test]
fn retries_server_errors_but_not_client_errors() {
    let (url, seen) = stub(Box::new(|n| if n == 0 { (503, json!({})) } else { (200, completion("ok")) }));
    let mut agent = RemoteAgent::with_key(config(&url, 2), "p", None);
    assert_eq!(agent.step("t", &opening()).unwrap().text, "ok");
    assert_eq!(seen.lock().unwrap().len(), 2);
    assert!(seen.lock().unwrap()[0].auth.is_none());

    let (url, seen) = stub(Box::new(|_| (400, json!({"error": "bad"}))));
    let mut agent = RemoteAgent::with_key(config(&url, 3), "p", None);
    let err = agent.step("t", &opening()).unwrap_err();
    assert!(matches!(err, AgentError::Transport(ref m) if m.contains("400")), "{err}");
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn refuses_a_transcript_not_ending_with_the_environment() {
    let (url, seen) = stub(Box::new(|_| (200, completion("x"))));
    let mut agent = RemoteAgent::with_key(config(&url, 0), "p", None);
    assert!(matches!(agent.step("t", &[]), Err(AgentError::Precondition(_))));
    assert!(seen.lock().unwrap().is_empty());
}

#[test]
fn turn_cap_fails_a_task_that_never_finishes() {
    let ds = subset(Some(&["campus_01"]));
    let (url, seen) = stub(Box::new(|_| {
        (200, completion("<action>Action: map.find_building_id(building_name=\"Library\")</action>"))
    }));
    let runner = Runner::new(
        &ds,
        RunSettings {
            max_turns: 3,
            ..settings("cap")
        },
    )
    .unwrap();
    let mut agent = RemoteAgent::with_key(config(&url, 0), "p", None);
    let r = runner.run(&mut agent, &mut MemorySink::default(), None).unwrap().completed().unwrap();
    let o = &r.progress.outcomes[0];
    assert_eq!(o.failure_reason, Some(FailureReason::TurnLimit));
    assert_eq!(o.turns, 3);
    assert_eq!((o.tokens_in, o.tokens_out), (Some(33), Some(12)));
    assert_eq!(o.latency_samples, Some(3));
    assert_eq!(seen.lock().unwrap().len(), 3);
    let last = &seen.lock().unwrap()[2].body["messages"];
    assert_eq!(last.as_array().unwrap().len(), 1 + 5, "system plus five alternating turns");
    assert_eq!(r.report.efficiency.tokens_in_total, Some(33));
}

#[test]
fn unreachable_endpoint_fails_the_task_and_the_run_continues() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let ds = subset(Some(&["campus_01", "reg_01"]));
    let runner = Runner::new(&ds, settings("down")).unwrap();
    let mut agent = RemoteAgent::with_key(config(&format!("http://127.0.0.1:{port}"), 0), "p", None);
    let r = runner.run(&mut agent, &mut MemorySink::default(), None).unwrap().completed().unwrap();
    assert_eq!(r.progress.outcomes.len(), 2);
    for o in &r.progress.outcomes {
        assert_eq!(o.failure_reason, Some(FailureReason::AgentError));
        assert_eq!(o.turns, 0);
    }
}
