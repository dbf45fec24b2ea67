use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::Value;
use thiserror::Error;

use super::protocol::{AdapterLine, GeneratorRequest, GeneratorResponse, PROTOCOL_VERSION};
use crate::punctuation::render_default;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdapterTransport {
    /// Child process speaking the protocol over stdin/stdout.
    Command { program: String, args: Vec<String> },
    /// Base URL; requests go to `POST {url}/generate`.
    Http { url: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalConfig {
    pub transport: AdapterTransport,
    /// Bound on the handshake and on each request.
    pub timeout_ms: u64,
    /// Adapter restarts allowed per worker before the run aborts.
    pub max_retries: u32,
    /// Independent adapter connections, each with one request in flight.
    pub workers: usize,
    /// Wrap contexts as `<start> .. <end>` before sending.
    pub render_markers: bool,
}

impl ExternalConfig {
    pub fn command(program: impl Into<String>, args: Vec<String>) -> Self {
        ExternalConfig {
            transport: AdapterTransport::Command {
                program: program.into(),
                args,
            },
            timeout_ms: 30_000,
            max_retries: 0,
            workers: 1,
            render_markers: true,
        }
    }

    pub fn http(url: impl Into<String>) -> Self {
        ExternalConfig {
            transport: AdapterTransport::Http { url: url.into() },
            ..ExternalConfig::command("", vec![])
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AdapterError {
    #[error("adapter crashed: {0}")]
    Crashed(String),
    /// `id` is `None` while waiting for the ready handshake.
    #[error("adapter timed out waiting for {}", match .id { Some(id) => format!("response {id}"), None => "ready handshake".to_string() })]
    Timeout { id: Option<u64> },
    #[error("protocol error on line `{line}`: {reason}")]
    Protocol { line: String, reason: String },
    #[error("adapter could not be started: {0}")]
    Spawn(String),
}

/// Aborted run: the last failure plus whatever completed before it.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("external generation aborted after {attempts} attempt(s): {cause}")]
pub struct ExternalRunError {
    pub cause: AdapterError,
    pub partial: Vec<Option<String>>,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalRun {
    /// `outputs[i]` answers `contexts[i]`.
    pub outputs: Vec<String>,
    /// The ready announcement of the first session, if the transport has one.
    pub adapter_info: Option<Value>,
}

/// Sends every context to the adapter and collects commentaries in input order.
///
/// Request ids are the context positions, so they increase strictly within
/// each session. A crashed, hung or misbehaving adapter is restarted and the
/// failed request resent, up to `max_retries` times per worker.
pub fn run_external(
    config: &ExternalConfig,
    contexts: &[String],
) -> Result<ExternalRun, ExternalRunError> {
    let results: Mutex<Vec<Option<String>>> = Mutex::new(vec![None; contexts.len()]);
    let failure: Mutex<Option<(u64, AdapterError, u32)>> = Mutex::new(None);
    let info: Mutex<Option<Value>> = Mutex::new(None);
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let workers = config.workers.max(1).min(contexts.len().max(1));

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let outcome = Worker::new(config).run(contexts, &next, &abort, &results, &info);
                if let Err((id, err, attempts)) = outcome {
                    abort.store(true, Ordering::SeqCst);
                    let mut slot = failure.lock().unwrap();
                    // the lowest failing id wins so the reported cause is deterministic
                    if slot.as_ref().is_none_or(|(first, _, _)| id < *first) {
                        *slot = Some((id, err, attempts));
                    }
                }
            });
        }
    });

    let results = results.into_inner().unwrap();
    match failure.into_inner().unwrap() {
        Some((_, cause, attempts)) => Err(ExternalRunError {
            cause,
            partial: results,
            attempts,
        }),
        None => Ok(ExternalRun {
            outputs: results
                .into_iter()
                .map(|r| r.expect("every context answered"))
                .collect(),
            adapter_info: info.into_inner().unwrap(),
        }),
    }
}

struct Worker<'a> {
    config: &'a ExternalConfig,
    session: Option<Session>,
    retries_left: u32,
    attempts: u32,
}

impl<'a> Worker<'a> {
    fn new(config: &'a ExternalConfig) -> Self {
        Worker {
            config,
            session: None,
            retries_left: config.max_retries,
            attempts: 0,
        }
    }

    fn run(
        &mut self,
        contexts: &[String],
        next: &AtomicUsize,
        abort: &AtomicBool,
        results: &Mutex<Vec<Option<String>>>,
        info: &Mutex<Option<Value>>,
    ) -> Result<(), (u64, AdapterError, u32)> {
        loop {
            if abort.load(Ordering::SeqCst) {
                return Ok(());
            }
            let i = next.fetch_add(1, Ordering::SeqCst);
            let Some(context) = contexts.get(i) else {
                return Ok(());
            };
            let context = if self.config.render_markers {
                render_default(context)
            } else {
                context.clone()
            };
            let commentary = self
                .answer(i as u64, &context, info)
                .map_err(|e| (i as u64, e, self.attempts))?;
            results.lock().unwrap()[i] = Some(commentary);
        }
    }

    fn answer(
        &mut self,
        id: u64,
        context: &str,
        info: &Mutex<Option<Value>>,
    ) -> Result<String, AdapterError> {
        loop {
            match self.try_answer(id, context, info) {
                Ok(commentary) => return Ok(commentary),
                Err(err) => {
                    self.session = None;
                    if self.retries_left == 0 {
                        return Err(err);
                    }
                    self.retries_left -= 1;
                    log::warn!("adapter failed on request {id} ({err}); restarting");
                }
            }
        }
    }

    fn try_answer(
        &mut self,
        id: u64,
        context: &str,
        info: &Mutex<Option<Value>>,
    ) -> Result<String, AdapterError> {
        let timeout = Duration::from_millis(self.config.timeout_ms);
        if self.session.is_none() {
            self.attempts += 1;
            let session = Session::open(&self.config.transport, timeout)?;
            let mut first = info.lock().unwrap();
            if first.is_none() {
                *first = session.ready_info().cloned();
            }
            self.session = Some(session);
        }
        let session = self.session.as_mut().expect("session opened above");
        session.request(
            &GeneratorRequest {
                id,
                context: context.to_string(),
            },
            timeout,
        )
    }
}

enum Session {
    Process(ProcessSession),
    Http(HttpSession),
}

impl Session {
    fn open(transport: &AdapterTransport, timeout: Duration) -> Result<Session, AdapterError> {
        match transport {
            AdapterTransport::Command { program, args } => {
                ProcessSession::spawn(program, args, timeout).map(Session::Process)
            }
            AdapterTransport::Http { url } => Ok(Session::Http(HttpSession::new(url, timeout))),
        }
    }

    fn ready_info(&self) -> Option<&Value> {
        match self {
            Session::Process(p) => Some(&p.ready),
            Session::Http(_) => None,
        }
    }

    fn request(
        &mut self,
        request: &GeneratorRequest,
        timeout: Duration,
    ) -> Result<String, AdapterError> {
        match self {
            Session::Process(p) => p.request(request, timeout),
            Session::Http(h) => h.request(request),
        }
    }
}

enum LineEvent {
    Line(String),
    Closed,
}

struct ProcessSession {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<LineEvent>,
    ready: Value,
}

impl ProcessSession {
    fn spawn(program: &str, args: &[String], timeout: Duration) -> Result<Self, AdapterError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| AdapterError::Spawn(format!("{program}: {e}")))?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");
        let stderr = child.stderr.take().expect("stderr piped");

        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            let mut buf = Vec::new();
            loop {
                buf.clear();
                match reader.read_until(b'\n', &mut buf) {
                    Ok(0) | Err(_) => {
                        let _ = tx.send(LineEvent::Closed);
                        return;
                    }
                    Ok(_) => {
                        let line = String::from_utf8_lossy(&buf)
                            .trim_end_matches(['\n', '\r'])
                            .to_string();
                        if tx.send(LineEvent::Line(line)).is_err() {
                            return;
                        }
                    }
                }
            }
        });
        thread::spawn(move || drain_diagnostics(stderr));

        let mut session = ProcessSession {
            child,
            stdin,
            lines,
            ready: Value::Null,
        };
        session.handshake(timeout)?;
        Ok(session)
    }

    fn handshake(&mut self, timeout: Duration) -> Result<(), AdapterError> {
        let deadline = Instant::now() + timeout;
        loop {
            let line = self.next_line(deadline, None)?;
            match AdapterLine::parse(&line) {
                Ok(AdapterLine::Ignored) => continue,
                Ok(AdapterLine::Ready { version, info }) if version == PROTOCOL_VERSION => {
                    self.ready = info;
                    return Ok(());
                }
                Ok(AdapterLine::Ready { version, .. }) => {
                    return Err(protocol(
                        &line,
                        format!("unsupported protocol version {version}"),
                    ))
                }
                Ok(_) => return Err(protocol(&line, "message before ready handshake")),
                Err(reason) => return Err(protocol(&line, reason)),
            }
        }
    }

    fn request(
        &mut self,
        request: &GeneratorRequest,
        timeout: Duration,
    ) -> Result<String, AdapterError> {
        if let Err(e) = self
            .stdin
            .write_all(request.to_line().as_bytes())
            .and_then(|_| self.stdin.flush())
        {
            return Err(AdapterError::Crashed(format!(
                "write failed: {e}{}",
                self.exit_note()
            )));
        }
        let deadline = Instant::now() + timeout;
        loop {
            let line = self.next_line(deadline, Some(request.id))?;
            match AdapterLine::parse(&line) {
                Ok(AdapterLine::Ignored) => continue,
                Ok(AdapterLine::Response(GeneratorResponse { id, commentary })) => {
                    if id != request.id {
                        return Err(protocol(
                            &line,
                            format!("unknown id {id} (expected {})", request.id),
                        ));
                    }
                    return Ok(commentary);
                }
                Ok(AdapterLine::Ready { .. }) => {
                    return Err(protocol(&line, "repeated ready handshake"))
                }
                Ok(AdapterLine::AdapterReportedError { message, .. }) => {
                    return Err(protocol(
                        &line,
                        format!("adapter reported error: {message}"),
                    ))
                }
                Err(reason) => return Err(protocol(&line, reason)),
            }
        }
    }

    fn next_line(&mut self, deadline: Instant, id: Option<u64>) -> Result<String, AdapterError> {
        let wait = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(wait) {
            Ok(LineEvent::Line(line)) => Ok(line),
            Ok(LineEvent::Closed) | Err(RecvTimeoutError::Disconnected) => Err(
                AdapterError::Crashed(format!("stdout closed{}", self.exit_note())),
            ),
            Err(RecvTimeoutError::Timeout) => Err(AdapterError::Timeout { id }),
        }
    }

    fn exit_note(&mut self) -> String {
        // give a dying process a moment to be reaped so the status is reported
        for _ in 0..20 {
            if let Ok(Some(status)) = self.child.try_wait() {
                return format!(" ({status})");
            }
            thread::sleep(Duration::from_millis(5));
        }
        String::new()
    }
}

impl Drop for ProcessSession {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn drain_diagnostics(stderr: impl Read) {
    for line in BufReader::new(stderr).lines() {
        let Ok(line) = line else { return };
        if !line.starts_with('#') {
            log::debug!("adapter: {line}");
        }
    }
}

fn protocol(line: &str, reason: impl Into<String>) -> AdapterError {
    AdapterError::Protocol {
        line: line.to_string(),
        reason: reason.into(),
    }
}

struct HttpSession {
    agent: ureq::Agent,
    endpoint: String,
}

impl HttpSession {
    fn new(url: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpSession {
            agent,
            endpoint: format!("{}/generate", url.trim_end_matches('/')),
        }
    }

    fn request(&mut self, request: &GeneratorRequest) -> Result<String, AdapterError> {
        let body = serde_json::to_string(request).expect("request serialization is infallible");
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("content-type", "application/json")
            .send(body.as_str())
            .map_err(|e| http_error(e, request.id))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| http_error(e, request.id))?;
        if status != 200 {
            return Err(AdapterError::Crashed(format!(
                "HTTP {status} from {}",
                self.endpoint
            )));
        }
        let line = text.trim_end();
        match AdapterLine::parse(line) {
            Ok(AdapterLine::Response(GeneratorResponse { id, commentary })) if id == request.id => {
                Ok(commentary)
            }
            Ok(AdapterLine::Response(GeneratorResponse { id, .. })) => Err(protocol(
                line,
                format!("unknown id {id} (expected {})", request.id),
            )),
            Ok(AdapterLine::AdapterReportedError { message, .. }) => {
                Err(protocol(line, format!("adapter reported error: {message}")))
            }
            Ok(_) => Err(protocol(line, "expected a response object")),
            Err(reason) => Err(protocol(line, reason)),
        }
    }
}

fn http_error(err: ureq::Error, id: u64) -> AdapterError {
    match err {
        ureq::Error::Timeout(_) => AdapterError::Timeout { id: Some(id) },
        ureq::Error::Io(e)
            if matches!(
                e.kind(),
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
            ) =>
        {
            AdapterError::Timeout { id: Some(id) }
        }
        other => AdapterError::Crashed(other.to_string()),
    }
}
