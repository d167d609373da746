//! External fill/embed models over newline-delimited JSON on the plugin
//! process's stdin/stdout.
//!
//! ```text
//! → {"op":"hello"}                              ← {"capabilities":["fill","embed"]}
//! → {"op":"fill","template":"[MASK] обед","top_n":10}
//!                                               ← {"candidates":[{"lemma":"готовить","score":0.66}]}
//! → {"op":"embed","text":"..."}                 ← {"vector":[0.1,0.2]}
//! ```
//!
//! Any request may be answered with `{"error":"..."}`. Exactly one response
//! line per request, in order. A connection is a serial channel;
//! [`PluginPool`] spreads concurrent callers over several processes.

use std::collections::BTreeSet;
use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{rank_candidates, Candidate, ClozeQuery, Embedder, FillModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Capability {
    Fill,
    Embed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Request {
    Hello,
    Fill { template: String, top_n: usize },
    Embed { text: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Response {
    Error { error: String },
    Hello { capabilities: Vec<Capability> },
    Fill { candidates: Vec<Candidate> },
    Embed { vector: Vec<f64> },
}

pub fn parse_request(line: &str) -> Result<Request> {
    Ok(serde_json::from_str(line)?)
}

pub fn parse_response(line: &str) -> Result<Response> {
    Ok(serde_json::from_str(line)?)
}

fn check_candidates(candidates: &[Candidate]) -> Result<()> {
    match candidates
        .iter()
        .find(|c| c.lemma.is_empty() || !(0.0..=1.0).contains(&c.score))
    {
        Some(c) => Err(Error::Plugin(format!(
            "invalid candidate {:?} with score {}",
            c.lemma, c.score
        ))),
        None => Ok(()),
    }
}

struct Channel {
    reader: Box<dyn BufRead + Send>,
    writer: Option<Box<dyn Write + Send>>,
    child: Option<Child>,
}

impl Channel {
    fn roundtrip(&mut self, request: &Request) -> Result<Response> {
        let writer = self
            .writer
            .as_mut()
            .ok_or_else(|| Error::Plugin("channel closed".into()))?;
        let mut line = serde_json::to_string(request)?;
        line.push('\n');
        writer
            .write_all(line.as_bytes())
            .and_then(|_| writer.flush())
            .map_err(|e| Error::Plugin(format!("write failed: {e}")))?;
        let mut reply = String::new();
        let n = self
            .reader
            .read_line(&mut reply)
            .map_err(|e| Error::Plugin(format!("read failed: {e}")))?;
        if n == 0 {
            return Err(Error::Plugin("plugin closed its output".into()));
        }
        let response = parse_response(reply.trim_end())
            .map_err(|e| Error::Plugin(format!("bad response: {e}")))?;
        match response {
            Response::Error { error } => Err(Error::Plugin(error)),
            other => Ok(other),
        }
    }
}

impl Drop for Channel {
    fn drop(&mut self) {
        // closing stdin lets a well-behaved plugin exit on EOF
        self.writer.take();
        if let Some(mut child) = self.child.take() {
            if matches!(child.try_wait(), Ok(None)) {
                let _ = child.kill();
            }
            let _ = child.wait();
        }
    }
}

/// One connection to a plugin.
pub struct PluginClient {
    channel: Mutex<Channel>,
    capabilities: BTreeSet<Capability>,
}

impl PluginClient {
    /// Spawns `command` (split with shell quoting rules) and performs the
    /// handshake. The plugin's stderr is inherited.
    pub fn spawn(command: &str) -> Result<Self> {
        let argv = shlex::split(command)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| Error::Plugin(format!("cannot parse command {command:?}")))?;
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Plugin(format!("cannot start {command:?}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Self::handshake(Channel {
            reader: Box::new(BufReader::new(stdout)),
            writer: Some(Box::new(stdin)),
            child: Some(child),
        })
    }

    /// Connects over arbitrary streams, e.g. an in-memory loopback.
    pub fn from_streams(
        reader: impl BufRead + Send + 'static,
        writer: impl Write + Send + 'static,
    ) -> Result<Self> {
        Self::handshake(Channel {
            reader: Box::new(reader),
            writer: Some(Box::new(writer)),
            child: None,
        })
    }

    fn handshake(mut channel: Channel) -> Result<Self> {
        let capabilities = match channel.roundtrip(&Request::Hello)? {
            Response::Hello { capabilities } => capabilities.into_iter().collect(),
            other => {
                return Err(Error::Plugin(format!(
                    "unexpected handshake reply {other:?}"
                )))
            }
        };
        Ok(PluginClient {
            channel: Mutex::new(channel),
            capabilities,
        })
    }

    pub fn capabilities(&self) -> &BTreeSet<Capability> {
        &self.capabilities
    }

    pub fn has(&self, capability: Capability) -> bool {
        self.capabilities.contains(&capability)
    }

    fn request(&self, request: &Request) -> Result<Response> {
        self.channel
            .lock()
            .map_err(|_| Error::Plugin("channel poisoned".into()))?
            .roundtrip(request)
    }
}

impl FillModel for PluginClient {
    fn fill(&self, query: &ClozeQuery) -> Result<Vec<Candidate>> {
        if !self.has(Capability::Fill) {
            return Err(Error::MissingCapability("fill"));
        }
        let request = Request::Fill {
            template: query.template().to_owned(),
            top_n: query.top_n(),
        };
        match self.request(&request)? {
            Response::Fill { mut candidates } => {
                check_candidates(&candidates)?;
                rank_candidates(&mut candidates, query.top_n());
                Ok(candidates)
            }
            other => Err(Error::Plugin(format!("expected candidates, got {other:?}"))),
        }
    }
}

impl Embedder for PluginClient {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        if !self.has(Capability::Embed) {
            return Err(Error::MissingCapability("embed"));
        }
        match self.request(&Request::Embed {
            text: text.to_owned(),
        })? {
            Response::Embed { vector } if vector.iter().all(|x| x.is_finite()) => Ok(vector),
            other => Err(Error::Plugin(format!(
                "expected a finite vector, got {other:?}"
            ))),
        }
    }
}

/// Several connections to the same plugin command, used round-robin.
pub struct PluginPool {
    clients: Vec<PluginClient>,
    next: AtomicUsize,
}

impl PluginPool {
    pub fn spawn(command: &str, size: usize) -> Result<Self> {
        let clients = (0..size.max(1))
            .map(|_| PluginClient::spawn(command))
            .collect::<Result<Vec<_>>>()?;
        Ok(PluginPool {
            clients,
            next: AtomicUsize::new(0),
        })
    }

    pub fn has(&self, capability: Capability) -> bool {
        self.clients[0].has(capability)
    }

    fn pick(&self) -> &PluginClient {
        let i = self.next.fetch_add(1, Ordering::Relaxed) % self.clients.len();
        &self.clients[i]
    }
}

impl FillModel for PluginPool {
    fn fill(&self, query: &ClozeQuery) -> Result<Vec<Candidate>> {
        self.pick().fill(query)
    }
}

impl Embedder for PluginPool {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        self.pick().embed(text)
    }
}

/// Serves the protocol until `reader` reaches EOF. Malformed requests get an
/// error response; the loop only stops on I/O failure or EOF.
pub fn serve(
    reader: impl BufRead,
    mut writer: impl Write,
    fill: Option<&dyn FillModel>,
    embed: Option<&dyn Embedder>,
) -> io::Result<()> {
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match parse_request(&line) {
            Err(e) => Response::Error {
                error: e.to_string(),
            },
            Ok(req) => answer(req, fill, embed).unwrap_or_else(|e| Response::Error {
                error: e.to_string(),
            }),
        };
        let mut out = serde_json::to_string(&response).map_err(io::Error::other)?;
        out.push('\n');
        writer.write_all(out.as_bytes())?;
        writer.flush()?;
    }
    Ok(())
}

fn answer(
    req: Request,
    fill: Option<&dyn FillModel>,
    embed: Option<&dyn Embedder>,
) -> Result<Response> {
    match req {
        Request::Hello => {
            let mut capabilities = Vec::new();
            if fill.is_some() {
                capabilities.push(Capability::Fill);
            }
            if embed.is_some() {
                capabilities.push(Capability::Embed);
            }
            Ok(Response::Hello { capabilities })
        }
        Request::Fill { template, top_n } => {
            let model = fill.ok_or(Error::MissingCapability("fill"))?;
            let candidates = model.fill(&ClozeQuery::new(template, top_n)?)?;
            Ok(Response::Fill { candidates })
        }
        Request::Embed { text } => {
            let model = embed.ok_or(Error::MissingCapability("embed"))?;
            Ok(Response::Embed {
                vector: model.embed(&text)?,
            })
        }
    }
}
