//! Client for external scorers (COMET, BLEURT, QE models, ...) speaking a
//! line-delimited JSON protocol over a byte stream.
//!
//! On connect both sides send `{"protocol":"rmbr-scorer/1"}`. Each request is
//! `{"id":7,"src":"..."|null,"hyp":"...","ref":"..."}` and is answered by
//! exactly one `{"id":7,"score":0.83}` or `{"id":7,"error":"..."}`. Responses
//! may arrive in any order; ids are unique per connection.
//!
//! Addresses: `HOST:PORT` or `tcp:HOST:PORT`, `unix:PATH`, or `exec:CMD ARGS...`
//! to spawn a child process and talk over its stdin/stdout.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::os::unix::net::UnixStream;
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use rmbr_core::{Utility, UtilityError, UtilityPair};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: &str = "rmbr-scorer/1";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const TIMEOUT_ENV: &str = "RMBR_SCORER_TIMEOUT_SECS";

/// Timeout from `RMBR_SCORER_TIMEOUT_SECS`, or the 30 s default.
pub fn timeout_from_env() -> Result<Duration, String> {
    match std::env::var(TIMEOUT_ENV) {
        Err(_) => Ok(DEFAULT_TIMEOUT),
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(secs) if secs > 0.0 && secs.is_finite() => Ok(Duration::from_secs_f64(secs)),
            _ => Err(format!("{TIMEOUT_ENV} must be a positive number of seconds, got `{v}`")),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub protocol: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerRequest {
    pub id: u64,
    pub src: Option<String>,
    pub hyp: String,
    #[serde(rename = "ref")]
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerResponse {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One item to score. `reference` is the pseudo-reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScorePair<'a> {
    pub src: Option<&'a str>,
    pub hyp: &'a str,
    pub reference: &'a str,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ServiceError {
    #[error("invalid scorer address `{0}`")]
    Address(String),

    #[error("cannot reach scorer `{addr}`: {message}")]
    Connect { addr: String, message: String },

    #[error("scorer transport error: {message}")]
    Transport {
        message: String,
        /// Position of the first unanswered pair of the failed batch.
        first_pending: Option<usize>,
    },

    #[error("scorer timed out after {secs:.1}s; pending ids {pending:?}")]
    Timeout {
        secs: f64,
        pending: Vec<u64>,
        first_pending: usize,
    },

    #[error("scorer rejected pair {pair} (id {id}): {message}")]
    Scoring { pair: usize, id: u64, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScorerAddress {
    Tcp(String),
    Unix(PathBuf),
    Exec(Vec<String>),
}

impl FromStr for ScorerAddress {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, ServiceError> {
        let bad = || ServiceError::Address(s.to_string());
        if let Some(path) = s.strip_prefix("unix:") {
            return if path.is_empty() { Err(bad()) } else { Ok(ScorerAddress::Unix(path.into())) };
        }
        if let Some(cmd) = s.strip_prefix("exec:") {
            let argv: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            return if argv.is_empty() { Err(bad()) } else { Ok(ScorerAddress::Exec(argv)) };
        }
        let hostport = s.strip_prefix("tcp:").unwrap_or(s);
        match hostport.rsplit_once(':') {
            Some((host, port)) if !host.is_empty() && port.parse::<u16>().is_ok() => {
                Ok(ScorerAddress::Tcp(hostport.to_string()))
            }
            _ => Err(bad()),
        }
    }
}

enum Event {
    Line(String),
    Closed,
    Failed(String),
}

struct Inner {
    writer: Box<dyn Write + Send>,
    events: Receiver<Event>,
    next_id: u64,
}

/// A connected scorer. Calls are serialized internally, so one client may be
/// shared between threads; requests within a call are pipelined.
pub struct ScorerClient {
    inner: Mutex<Inner>,
    timeout: Duration,
    child: Option<Mutex<Child>>,
}

impl std::fmt::Debug for ScorerClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScorerClient").field("timeout", &self.timeout).finish_non_exhaustive()
    }
}

impl ScorerClient {
    /// Wraps an already-open byte stream and performs the version handshake.
    pub fn from_stream<R, W>(reader: R, writer: W, timeout: Duration) -> Result<Self, ServiceError>
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        thread::Builder::new()
            .name("rmbr-scorer-reader".into())
            .spawn(move || {
                for line in BufReader::new(reader).lines() {
                    let event = match line {
                        Ok(l) => Event::Line(l),
                        Err(e) => Event::Failed(e.to_string()),
                    };
                    let stop = matches!(event, Event::Failed(_));
                    if tx.send(event).is_err() || stop {
                        return;
                    }
                }
                let _ = tx.send(Event::Closed);
            })
            .map_err(|e| transport(format!("cannot start reader thread: {e}"), None))?;

        let client = ScorerClient {
            inner: Mutex::new(Inner { writer: Box::new(writer), events: rx, next_id: 0 }),
            timeout,
            child: None,
        };
        client.handshake()?;
        Ok(client)
    }

    pub fn connect(addr: &str, timeout: Duration) -> Result<Self, ServiceError> {
        let connect_err = |e: std::io::Error| ServiceError::Connect { addr: addr.to_string(), message: e.to_string() };
        match addr.parse::<ScorerAddress>()? {
            ScorerAddress::Tcp(hostport) => {
                let stream = TcpStream::connect(&hostport).map_err(connect_err)?;
                let _ = stream.set_nodelay(true);
                let reader = stream.try_clone().map_err(connect_err)?;
                ScorerClient::from_stream(reader, stream, timeout)
            }
            ScorerAddress::Unix(path) => {
                let stream = UnixStream::connect(&path).map_err(connect_err)?;
                let reader = stream.try_clone().map_err(connect_err)?;
                ScorerClient::from_stream(reader, stream, timeout)
            }
            ScorerAddress::Exec(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(connect_err)?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                match ScorerClient::from_stream(stdout, stdin, timeout) {
                    Ok(mut client) => {
                        client.child = Some(Mutex::new(child));
                        Ok(client)
                    }
                    Err(e) => {
                        let _ = child.kill();
                        let _ = child.wait();
                        Err(e)
                    }
                }
            }
        }
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    fn handshake(&self) -> Result<(), ServiceError> {
        let mut inner = self.inner.lock().expect("scorer client poisoned");
        let hello = serde_json::to_string(&Hello { protocol: PROTOCOL_VERSION.into() }).expect("serializes");
        writeln!(inner.writer, "{hello}")
            .and_then(|_| inner.writer.flush())
            .map_err(|e| transport(format!("handshake write failed: {e}"), None))?;
        let line = match inner.events.recv_timeout(self.timeout) {
            Ok(Event::Line(l)) => l,
            Ok(Event::Closed) => return Err(transport("scorer closed the stream during handshake", None)),
            Ok(Event::Failed(m)) => return Err(transport(m, None)),
            Err(_) => {
                return Err(ServiceError::Timeout {
                    secs: self.timeout.as_secs_f64(),
                    pending: Vec::new(),
                    first_pending: 0,
                })
            }
        };
        let reply: Hello = serde_json::from_str(&line)
            .map_err(|e| transport(format!("bad handshake `{line}`: {e}"), None))?;
        if reply.protocol != PROTOCOL_VERSION {
            return Err(transport(
                format!("scorer speaks `{}`, expected `{PROTOCOL_VERSION}`", reply.protocol),
                None,
            ));
        }
        Ok(())
    }

    /// Scores `pairs`; the output is in input order whatever order the
    /// responses arrive in.
    pub fn score(&self, pairs: &[ScorePair<'_>]) -> Result<Vec<f64>, ServiceError> {
        let mut inner = self.inner.lock().expect("scorer client poisoned");
        let base = inner.next_id;
        inner.next_id += pairs.len() as u64;

        for (k, p) in pairs.iter().enumerate() {
            let req = ScorerRequest {
                id: base + k as u64,
                src: p.src.map(str::to_string),
                hyp: p.hyp.to_string(),
                reference: p.reference.to_string(),
            };
            let line = serde_json::to_string(&req).expect("requests serialize");
            writeln!(inner.writer, "{line}")
                .map_err(|e| transport(format!("write failed: {e}"), Some(k)))?;
        }
        inner.writer.flush().map_err(|e| transport(format!("flush failed: {e}"), Some(0)))?;

        let mut scores: Vec<Option<f64>> = vec![None; pairs.len()];
        let mut answered = vec![false; pairs.len()];
        let mut remaining = pairs.len();
        let mut rejected: Option<(usize, String)> = None;
        let mut deadline = Instant::now() + self.timeout;
        let first_pending = |answered: &[bool]| answered.iter().position(|a| !a);

        while remaining > 0 {
            let wait = deadline.saturating_duration_since(Instant::now());
            let line = match inner.events.recv_timeout(wait) {
                Ok(Event::Line(l)) => l,
                Ok(Event::Closed) | Err(RecvTimeoutError::Disconnected) => {
                    return Err(transport(
                        format!("scorer closed the stream with {remaining} requests pending"),
                        first_pending(&answered),
                    ))
                }
                Ok(Event::Failed(m)) => return Err(transport(m, first_pending(&answered))),
                Err(RecvTimeoutError::Timeout) => {
                    let pending: Vec<u64> = (0..pairs.len())
                        .filter(|&k| !answered[k])
                        .map(|k| base + k as u64)
                        .collect();
                    return Err(ServiceError::Timeout {
                        secs: self.timeout.as_secs_f64(),
                        first_pending: first_pending(&answered).unwrap_or(0),
                        pending,
                    });
                }
            };
            let resp: ScorerResponse = serde_json::from_str(&line).map_err(|e| {
                transport(format!("malformed response `{line}`: {e}"), first_pending(&answered))
            })?;
            if resp.id < base {
                // left over from an earlier batch that failed
                continue;
            }
            let k = (resp.id - base) as usize;
            if k >= pairs.len() {
                return Err(transport(format!("response for unknown id {}", resp.id), first_pending(&answered)));
            }
            if answered[k] {
                return Err(transport(format!("duplicate response for id {}", resp.id), Some(k)));
            }
            match (resp.score, resp.error) {
                (_, Some(message)) => {
                    if rejected.as_ref().is_none_or(|(p, _)| k < *p) {
                        rejected = Some((k, message));
                    }
                }
                (Some(s), None) => scores[k] = Some(s),
                (None, None) => {
                    return Err(transport(format!("response for id {} has neither score nor error", resp.id), Some(k)))
                }
            }
            answered[k] = true;
            remaining -= 1;
            deadline = Instant::now() + self.timeout;
        }

        if let Some((pair, message)) = rejected {
            return Err(ServiceError::Scoring { pair, id: base + pair as u64, message });
        }
        Ok(scores.into_iter().map(|s| s.expect("all answered")).collect())
    }
}

impl Drop for ScorerClient {
    fn drop(&mut self) {
        if let Some(child) = &self.child {
            let mut child = child.lock().unwrap_or_else(|e| e.into_inner());
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

fn transport(message: impl Into<String>, first_pending: Option<usize>) -> ServiceError {
    ServiceError::Transport { message: message.into(), first_pending }
}

/// Scores `pairs` through `client`, aligned with the input order.
pub fn scorer_service_score(client: &ScorerClient, pairs: &[ScorePair<'_>]) -> Result<Vec<f64>, ServiceError> {
    client.score(pairs)
}

/// A scorer service used as an MBR utility. Candidate surface texts are sent
/// as `hyp` and `ref`.
#[derive(Debug, Clone)]
pub struct ServiceUtility {
    client: Arc<ScorerClient>,
    send_source: bool,
    name: String,
}

impl ServiceUtility {
    pub fn new(client: Arc<ScorerClient>, send_source: bool) -> Self {
        ServiceUtility { client, send_source, name: "service".into() }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl Utility for ServiceUtility {
    fn name(&self) -> &str {
        &self.name
    }

    fn supports_source(&self) -> bool {
        self.send_source
    }

    fn score_pairs(&self, pairs: &[UtilityPair<'_>]) -> Result<Vec<f64>, UtilityError> {
        let requests: Vec<ScorePair<'_>> = pairs
            .iter()
            .map(|p| ScorePair { src: p.source, hyp: p.hyp.text(), reference: p.pseudo_ref.text() })
            .collect();
        self.client.score(&requests).map_err(|e| match &e {
            ServiceError::Scoring { pair, message, .. } => UtilityError::scoring(*pair, message.clone()),
            ServiceError::Timeout { first_pending, .. } => UtilityError::transport(*first_pending, e.to_string()),
            ServiceError::Transport { first_pending, .. } => {
                UtilityError::transport(first_pending.unwrap_or(0), e.to_string())
            }
            _ => UtilityError::transport(0, e.to_string()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Serves one connection: answers the handshake, then hands each batch of
    /// `batch` requests to `respond`, which returns the response lines.
    fn spawn_double<F>(batch: usize, respond: F) -> ScorerClient
    where
        F: Fn(Vec<ScorerRequest>) -> Vec<String> + Send + 'static,
    {
        let (client_end, server_end) = UnixStream::pair().unwrap();
        thread::spawn(move || {
            let mut writer = server_end.try_clone().unwrap();
            let mut lines = BufReader::new(server_end).lines();
            let hello: Hello = serde_json::from_str(&lines.next().unwrap().unwrap()).unwrap();
            assert_eq!(hello.protocol, PROTOCOL_VERSION);
            writeln!(writer, "{{\"protocol\":\"{PROTOCOL_VERSION}\"}}").unwrap();
            let mut pending = Vec::new();
            for line in lines {
                let Ok(line) = line else { return };
                pending.push(serde_json::from_str::<ScorerRequest>(&line).unwrap());
                if pending.len() == batch {
                    for out in respond(std::mem::take(&mut pending)) {
                        if writeln!(writer, "{out}").is_err() {
                            return;
                        }
                    }
                }
            }
        });
        let reader = client_end.try_clone().unwrap();
        ScorerClient::from_stream(reader, client_end, Duration::from_secs(5)).unwrap()
    }

    fn pairs(n: usize) -> Vec<(String, String)> {
        (0..n).map(|i| (format!("hyp {i}"), format!("ref {i}"))).collect()
    }

    fn as_pairs(v: &[(String, String)]) -> Vec<ScorePair<'_>> {
        v.iter().map(|(h, r)| ScorePair { src: None, hyp: h, reference: r }).collect()
    }

    #[test]
    fn echo_double_scores_everything() {
        let client = spawn_double(4, |reqs| {
            reqs.iter().map(|r| format!("{{\"id\":{},\"score\":0.5}}", r.id)).collect()
        });
        let p = pairs(4);
        assert_eq!(scorer_service_score(&client, &as_pairs(&p)).unwrap(), vec![0.5; 4]);
    }

    #[test]
    fn out_of_order_responses_are_realigned() {
        let client = spawn_double(5, |reqs| {
            // score = index parsed from the hyp text; answer in a fixed shuffle
            let order = [3, 0, 4, 2, 1];
            order
                .iter()
                .map(|&k| {
                    let r = &reqs[k];
                    let v: f64 = r.hyp.trim_start_matches("hyp ").parse().unwrap();
                    format!("{{\"id\":{},\"score\":{}}}", r.id, v / 10.0)
                })
                .collect()
        });
        let p = pairs(5);
        assert_eq!(client.score(&as_pairs(&p)).unwrap(), vec![0.0, 0.1, 0.2, 0.3, 0.4]);
        // ids keep increasing across calls on one connection
        assert_eq!(client.score(&as_pairs(&p)).unwrap(), vec![0.0, 0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn error_response_names_the_pair() {
        let client = spawn_double(3, |reqs| {
            reqs.iter()
                .enumerate()
                .map(|(k, r)| {
                    if k == 2 {
                        format!("{{\"id\":{},\"error\":\"model exploded\"}}", r.id)
                    } else {
                        format!("{{\"id\":{},\"score\":1.0}}", r.id)
                    }
                })
                .collect()
        });
        let p = pairs(3);
        match client.score(&as_pairs(&p)) {
            Err(ServiceError::Scoring { pair, message, .. }) => {
                assert_eq!(pair, 2);
                assert_eq!(message, "model exploded");
            }
            other => panic!("unexpected {other:?}"),
        }
        // the connection stays usable
        assert!(client.score(&as_pairs(&p)).is_err());
    }

    #[test]
    fn timeout_lists_pending_ids() {
        let (client_end, server_end) = UnixStream::pair().unwrap();
        thread::spawn(move || {
            let mut writer = server_end.try_clone().unwrap();
            let mut lines = BufReader::new(server_end).lines();
            lines.next();
            writeln!(writer, "{{\"protocol\":\"{PROTOCOL_VERSION}\"}}").unwrap();
            // answer only id 1 and keep the stream open
            let mut reqs = Vec::new();
            for line in lines.by_ref().take(3) {
                reqs.push(serde_json::from_str::<ScorerRequest>(&line.unwrap()).unwrap());
            }
            writeln!(writer, "{{\"id\":{},\"score\":0.1}}", reqs[1].id).unwrap();
            thread::sleep(Duration::from_secs(2));
        });
        let reader = client_end.try_clone().unwrap();
        let client = ScorerClient::from_stream(reader, client_end, Duration::from_millis(200)).unwrap();
        let p = pairs(3);
        match client.score(&as_pairs(&p)) {
            Err(ServiceError::Timeout { pending, first_pending, .. }) => {
                assert_eq!(pending, vec![0, 2]);
                assert_eq!(first_pending, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let (client_end, server_end) = UnixStream::pair().unwrap();
        thread::spawn(move || {
            let mut writer = server_end.try_clone().unwrap();
            let mut lines = BufReader::new(server_end).lines();
            lines.next();
            writeln!(writer, "{{\"protocol\":\"rmbr-scorer/0\"}}").unwrap();
        });
        let reader = client_end.try_clone().unwrap();
        let err = ScorerClient::from_stream(reader, client_end, Duration::from_secs(2)).unwrap_err();
        assert!(matches!(err, ServiceError::Transport { .. }), "{err:?}");
    }

    #[test]
    fn parses_addresses() {
        assert_eq!("localhost:9000".parse::<ScorerAddress>().unwrap(), ScorerAddress::Tcp("localhost:9000".into()));
        assert_eq!("tcp:127.0.0.1:1".parse::<ScorerAddress>().unwrap(), ScorerAddress::Tcp("127.0.0.1:1".into()));
        assert_eq!("unix:/tmp/s.sock".parse::<ScorerAddress>().unwrap(), ScorerAddress::Unix("/tmp/s.sock".into()));
        assert_eq!(
            "exec:python3 scorer.py --gpu".parse::<ScorerAddress>().unwrap(),
            ScorerAddress::Exec(vec!["python3".into(), "scorer.py".into(), "--gpu".into()])
        );
        for bad in ["", "nohost", "host:notaport", "unix:", "exec:  "] {
            assert!(bad.parse::<ScorerAddress>().is_err(), "{bad}");
        }
    }

    #[test]
    fn request_wire_format() {
        let req = ScorerRequest { id: 3, src: None, hyp: "h".into(), reference: "r".into() };
        assert_eq!(serde_json::to_string(&req).unwrap(), r#"{"id":3,"src":null,"hyp":"h","ref":"r"}"#);
    }
}
