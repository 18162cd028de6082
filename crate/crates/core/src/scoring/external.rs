//! Client side of the external scorer protocol.
//!
//! The scorer runs as a separate process reachable over stdio (`cmd:`) or
//! TCP (`tcp:`). Messages are single-line JSON objects. The server greets
//! with `{"protocol":1,"capabilities":["tokens","sentence"]}`; requests look
//! like `{"id":7,"kind":"tokens","source":"...","hypothesis":"..."}` and are
//! answered, in any order, by
//! `{"id":7,"word_probs":[...],"gap_probs":[...]}` or `{"id":7,"score":0.8}`.
//! Errors carry `{"id":7,"code":...,"message":"..."}`; `id: -1` reports a
//! line the server could not parse.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ScoreError, Scorer, ScorerOutput};
use crate::edits::{LabelVector, TokenSeq};

pub const PROTOCOL_VERSION: u32 = 1;

/// Environment variable overriding the configured scorer endpoint.
pub const ENDPOINT_ENV: &str = "GEC_COMBINE_SCORER_ENDPOINT";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    /// `tcp:<host>:<port>`
    Tcp(String),
    /// `cmd:<program> [args...]`, spoken to over stdin/stdout.
    Command(Vec<String>),
}

impl FromStr for Endpoint {
    type Err = ScoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(addr) = s.strip_prefix("tcp:") {
            Ok(Endpoint::Tcp(addr.to_owned()))
        } else if let Some(cmd) = s.strip_prefix("cmd:") {
            let argv: Vec<String> = cmd.split_whitespace().map(str::to_owned).collect();
            if argv.is_empty() {
                return Err(ScoreError::InvalidConfig("empty scorer command".into()));
            }
            Ok(Endpoint::Command(argv))
        } else {
            Err(ScoreError::InvalidConfig(format!(
                "scorer endpoint {s:?} must start with tcp: or cmd:"
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestKind {
    Tokens,
    Sentence,
}

#[derive(Debug, Serialize)]
struct Request<'a> {
    id: i64,
    kind: RequestKind,
    source: &'a str,
    hypothesis: &'a str,
}

#[derive(Debug, Deserialize)]
struct Hello {
    protocol: u32,
    #[serde(default)]
    capabilities: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct Response {
    id: i64,
    word_probs: Option<Vec<f64>>,
    gap_probs: Option<Vec<f64>>,
    score: Option<f64>,
    code: Option<serde_json::Value>,
    message: Option<String>,
}

struct Connection {
    reader: Box<dyn BufRead + Send>,
    writer: Option<Box<dyn Write + Send>>,
    child: Option<Child>,
    next_id: i64,
}

impl Drop for Connection {
    fn drop(&mut self) {
        // Closing the write side lets the server see end-of-input and exit.
        self.writer.take();
        if let Some(mut child) = self.child.take() {
            let _ = child.wait();
        }
    }
}

/// A [`Scorer`] backed by an external process.
///
/// Requests are serialized over a single connection; each batch is written
/// from a helper thread while responses are read and matched by id.
pub struct ExternalScorer {
    conn: Mutex<Connection>,
    kind: RequestKind,
    capabilities: Vec<String>,
}

fn transport(e: impl std::fmt::Display) -> ScoreError {
    ScoreError::Transport(e.to_string())
}

impl ExternalScorer {
    pub fn connect(endpoint: &Endpoint) -> Result<Self, ScoreError> {
        match endpoint {
            Endpoint::Tcp(addr) => {
                let stream = TcpStream::connect(addr).map_err(transport)?;
                let reader = BufReader::new(stream.try_clone().map_err(transport)?);
                Self::from_streams(reader, BufWriter::new(stream), None)
            }
            Endpoint::Command(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(transport)?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Self::from_streams(BufReader::new(stdout), BufWriter::new(stdin), Some(child))
            }
        }
    }

    /// Speaks the protocol over arbitrary streams. Reads the greeting first.
    pub fn from_streams<R, W>(reader: R, writer: W, child: Option<Child>) -> Result<Self, ScoreError>
    where
        R: BufRead + Send + 'static,
        W: Write + Send + 'static,
    {
        let mut conn = Connection {
            reader: Box::new(reader),
            writer: Some(Box::new(writer)),
            child,
            next_id: 0,
        };
        let mut line = String::new();
        if conn.reader.read_line(&mut line).map_err(transport)? == 0 {
            return Err(ScoreError::Transport("scorer closed before greeting".into()));
        }
        let hello: Hello = serde_json::from_str(line.trim())
            .map_err(|e| ScoreError::Protocol(format!("bad greeting {:?}: {e}", line.trim())))?;
        if hello.protocol != PROTOCOL_VERSION {
            return Err(ScoreError::Protocol(format!(
                "unsupported protocol version {}",
                hello.protocol
            )));
        }
        let kind = if hello.capabilities.iter().any(|c| c == "tokens") {
            RequestKind::Tokens
        } else if hello.capabilities.iter().any(|c| c == "sentence") {
            RequestKind::Sentence
        } else {
            return Err(ScoreError::Protocol("scorer advertises no capabilities".into()));
        };
        Ok(Self { conn: Mutex::new(conn), kind, capabilities: hello.capabilities })
    }

    /// Forces sentence- or token-level requests.
    pub fn with_kind(mut self, kind: RequestKind) -> Result<Self, ScoreError> {
        let name = match kind {
            RequestKind::Tokens => "tokens",
            RequestKind::Sentence => "sentence",
        };
        if !self.capabilities.iter().any(|c| c == name) {
            return Err(ScoreError::Protocol(format!("scorer lacks capability {name}")));
        }
        self.kind = kind;
        Ok(self)
    }

    pub fn kind(&self) -> RequestKind {
        self.kind
    }

    pub fn capabilities(&self) -> &[String] {
        &self.capabilities
    }

    fn convert(&self, resp: Response, hypothesis: &TokenSeq) -> Result<ScorerOutput, ScoreError> {
        match self.kind {
            RequestKind::Tokens => {
                let (Some(word), Some(gap)) = (resp.word_probs, resp.gap_probs) else {
                    return Err(ScoreError::Protocol(format!("response {} lacks probabilities", resp.id)));
                };
                if word.len() != hypothesis.len() {
                    return Err(ScoreError::Shape { expected: hypothesis.len(), got: word.len() });
                }
                LabelVector::new(word, gap)
                    .map(ScorerOutput::Labels)
                    .map_err(|e| ScoreError::Protocol(e.to_string()))
            }
            RequestKind::Sentence => match resp.score {
                Some(q) if q > 0.0 && q <= 1.0 => Ok(ScorerOutput::Sentence(q)),
                Some(q) => Err(ScoreError::Protocol(format!("score {q} outside (0, 1]"))),
                None => Err(ScoreError::Protocol(format!("response {} lacks score", resp.id))),
            },
        }
    }
}

impl Scorer for ExternalScorer {
    fn name(&self) -> &str {
        "external"
    }

    fn score(&self, source: &TokenSeq, hypothesis: &TokenSeq) -> Result<ScorerOutput, ScoreError> {
        let mut out = self.score_batch(&[(source, hypothesis)])?;
        Ok(out.pop().expect("one output per request"))
    }

    fn score_batch(&self, pairs: &[(&TokenSeq, &TokenSeq)]) -> Result<Vec<ScorerOutput>, ScoreError> {
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        let mut guard = self.conn.lock().map_err(|_| ScoreError::Transport("scorer connection poisoned".into()))?;
        let conn = &mut *guard;
        let first_id = conn.next_id;
        conn.next_id += pairs.len() as i64;

        let mut payload = String::new();
        for (i, (s, h)) in pairs.iter().enumerate() {
            let req = Request {
                id: first_id + i as i64,
                kind: self.kind,
                source: &s.to_string(),
                hypothesis: &h.to_string(),
            };
            payload.push_str(&serde_json::to_string(&req).expect("request serializes"));
            payload.push('\n');
        }

        let writer = conn.writer.as_mut().ok_or_else(|| ScoreError::Transport("writer closed".into()))?;
        let reader = &mut conn.reader;
        let mut slots: Vec<Option<ScorerOutput>> = vec![None; pairs.len()];
        let result = std::thread::scope(|scope| {
            let send = scope.spawn(move || -> std::io::Result<()> {
                writer.write_all(payload.as_bytes())?;
                writer.flush()
            });
            let mut pending: HashMap<i64, usize> =
                (0..pairs.len()).map(|i| (first_id + i as i64, i)).collect();
            let mut line = String::new();
            let read_result = (|| {
                while !pending.is_empty() {
                    line.clear();
                    if reader.read_line(&mut line).map_err(transport)? == 0 {
                        return Err(ScoreError::Transport(format!(
                            "scorer closed with {} responses outstanding",
                            pending.len()
                        )));
                    }
                    let resp: Response = serde_json::from_str(line.trim()).map_err(|e| {
                        ScoreError::Protocol(format!("unparseable response {:?}: {e}", line.trim()))
                    })?;
                    if let Some(code) = &resp.code {
                        return Err(ScoreError::Remote {
                            id: resp.id,
                            code: code.to_string(),
                            message: resp.message.clone().unwrap_or_default(),
                        });
                    }
                    let idx = pending.remove(&resp.id).ok_or_else(|| {
                        ScoreError::Protocol(format!("unexpected response id {}", resp.id))
                    })?;
                    slots[idx] = Some(self.convert(resp, pairs[idx].1)?);
                }
                Ok(())
            })();
            let send_result = send.join().expect("writer thread");
            read_result?;
            send_result.map_err(transport)
        });
        result?;
        Ok(slots.into_iter().map(|s| s.expect("every slot filled")).collect())
    }
}
