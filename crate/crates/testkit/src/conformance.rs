//! Scripted adapter scenarios for the external generator protocol.
//!
//! Each scenario launches `mock_adapter.py` in one mode and states how
//! `run_external` must classify the session.

use std::path::PathBuf;

use caster_punct::generation::{run_external, AdapterError, ExternalConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Expect {
    Outputs(Vec<String>),
    Timeout(Option<u64>),
    Protocol,
    Crashed,
    /// Crash after this many answered contexts, with those kept as partial results.
    CrashedWithPartial(usize),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub mode: &'static str,
    pub contexts: Vec<String>,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub workers: usize,
    pub render_markers: bool,
    pub expect: Expect,
}

pub fn mock_adapter_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join("mock_adapter.py")
}

fn contexts(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("commentary line {i}")).collect()
}

fn base(name: &'static str, mode: &'static str, expect: Expect) -> Scenario {
    Scenario {
        name,
        mode,
        contexts: contexts(3),
        timeout_ms: 5_000,
        max_retries: 0,
        workers: 1,
        render_markers: false,
        expect,
    }
}

/// The twelve conformance scenarios.
pub fn scenarios() -> Vec<Scenario> {
    let echoed = contexts(3);
    let rendered: Vec<String> = echoed
        .iter()
        .map(|c| format!("<start> {c} <end>"))
        .collect();
    let upper: Vec<String> = contexts(9).iter().map(|c| c.to_uppercase()).collect();
    vec![
        base("echo roundtrip", "echo", Expect::Outputs(echoed.clone())),
        Scenario {
            render_markers: true,
            ..base(
                "marker-rendered contexts",
                "echo",
                Expect::Outputs(rendered),
            )
        },
        base(
            "diagnostic lines ignored",
            "diagnostics",
            Expect::Outputs(echoed.clone()),
        ),
        Scenario {
            timeout_ms: 300,
            ..base("handshake timeout", "no-ready", Expect::Timeout(None))
        },
        base("unsupported ready version", "bad-version", Expect::Protocol),
        base(
            "response before ready",
            "response-before-ready",
            Expect::Protocol,
        ),
        Scenario {
            timeout_ms: 300,
            ..base("request timeout", "silent", Expect::Timeout(Some(0)))
        },
        base("mismatched response id", "wrong-id", Expect::Protocol),
        base("malformed response line", "malformed", Expect::Protocol),
        base(
            "crash mid-session",
            "crash-after-1",
            Expect::CrashedWithPartial(1),
        ),
        base("exit before ready", "exit-immediately", Expect::Crashed),
        Scenario {
            workers: 3,
            contexts: contexts(9),
            ..base(
                "order kept across workers",
                "reverse-delay",
                Expect::Outputs(upper),
            )
        },
    ]
}

/// Runs one scenario against `command` (program followed by leading args;
/// the scenario's mode is appended). Returns a description of any mismatch.
pub fn run_scenario(command: &[String], scenario: &Scenario) -> Result<(), String> {
    let mut args: Vec<String> = command[1..].to_vec();
    args.push(scenario.mode.to_string());
    let mut config = ExternalConfig::command(command[0].clone(), args);
    config.timeout_ms = scenario.timeout_ms;
    config.max_retries = scenario.max_retries;
    config.workers = scenario.workers;
    config.render_markers = scenario.render_markers;

    let outcome = run_external(&config, &scenario.contexts);
    let ok = match (&scenario.expect, &outcome) {
        (Expect::Outputs(expected), Ok(run)) => run.outputs == *expected,
        (Expect::Timeout(id), Err(e)) => e.cause == AdapterError::Timeout { id: *id },
        (Expect::Protocol, Err(e)) => matches!(e.cause, AdapterError::Protocol { .. }),
        (Expect::Crashed, Err(e)) => matches!(e.cause, AdapterError::Crashed(_)),
        (Expect::CrashedWithPartial(done), Err(e)) => {
            matches!(e.cause, AdapterError::Crashed(_))
                && e.partial.iter().take_while(|p| p.is_some()).count() == *done
                && e.partial.iter().skip(*done).all(Option::is_none)
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!(
            "{}: expected {:?}, got {:?}",
            scenario.name, scenario.expect, outcome
        ))
    }
}

pub fn python_mock_command() -> Vec<String> {
    vec![
        "python3".to_string(),
        mock_adapter_path().display().to_string(),
    ]
}
