//! Line protocol for external scorers.
//!
//! The child prints `{"ready": true}` once it is able to accept work. The
//! parent then writes one JSON request per line and closes stdin; the child
//! answers each with one JSON response line carrying the same `id`, in any
//! order. Requests can be split across several child processes.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{MetricDescriptor, MetricRequest, Scorer};
use crate::error::{Error, Result};
use crate::model::ScoreRecord;

#[derive(Debug, Clone)]
pub struct SubprocessConfig {
    /// Shell command line, run through `sh -c`.
    pub command: String,
    /// Limit for one shard's whole exchange, including start-up.
    pub timeout: Duration,
    /// Number of child processes to split requests across.
    pub shards: usize,
}

impl SubprocessConfig {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            timeout: Duration::from_secs(600),
            shards: 1,
        }
    }
}

#[derive(Debug, Deserialize)]
struct ScoreResponse {
    id: String,
    score: f64,
}

/// Sends `requests` through the protocol and returns responses keyed by id.
pub fn run_line_protocol<Req, Resp>(
    config: &SubprocessConfig,
    requests: &[Req],
    request_id: impl Fn(&Req) -> &str + Sync,
    response_id: impl Fn(&Resp) -> &str + Sync,
) -> Result<HashMap<String, Resp>>
where
    Req: Serialize + Sync,
    Resp: DeserializeOwned + Send,
{
    let mut seen = HashSet::new();
    for r in requests {
        if !seen.insert(request_id(r)) {
            return Err(Error::Subprocess(format!("duplicate request id {:?}", request_id(r))));
        }
    }
    if requests.is_empty() {
        return Ok(HashMap::new());
    }
    let shards = config.shards.clamp(1, requests.len());
    let chunk = requests.len().div_ceil(shards);
    let results: Vec<Result<HashMap<String, Resp>>> = thread::scope(|scope| {
        let handles: Vec<_> = requests
            .chunks(chunk)
            .map(|part| scope.spawn(|| run_shard(config, part, &request_id, &response_id)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Subprocess("shard thread panicked".into()))))
            .collect()
    });
    let mut merged = HashMap::with_capacity(requests.len());
    for r in results {
        merged.extend(r?);
    }
    Ok(merged)
}

fn run_shard<Req, Resp>(
    config: &SubprocessConfig,
    requests: &[Req],
    request_id: &(impl Fn(&Req) -> &str + Sync),
    response_id: &(impl Fn(&Resp) -> &str + Sync),
) -> Result<HashMap<String, Resp>>
where
    Req: Serialize,
    Resp: DeserializeOwned,
{
    let deadline = Instant::now() + config.timeout;
    let mut command = Command::new("sh");
    command
        .arg("-c")
        .arg(&config.command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit());
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut command, 0);
    let mut child = command
        .spawn()
        .map_err(|e| Error::Subprocess(format!("cannot start {:?}: {e}", config.command)))?;

    let stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel::<std::io::Result<String>>();
    let reader = thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });

    let outcome = exchange(config, &mut child, &rx, deadline, requests, request_id, response_id);
    drop(rx);
    if outcome.is_err() {
        kill_tree(&mut child);
        // a surviving grandchild may still hold stdout open; leave the reader detached
        return outcome;
    }
    let _ = reader.join();
    outcome
}

/// Kills the shell and, on Unix, everything it started.
fn kill_tree(child: &mut Child) {
    #[cfg(unix)]
    let _ = Command::new("kill")
        .args(["-KILL", "--", &format!("-{}", child.id())])
        .stderr(Stdio::null())
        .status();
    let _ = child.kill();
    let _ = child.wait();
}

fn next_line(
    rx: &mpsc::Receiver<std::io::Result<String>>,
    deadline: Instant,
) -> Result<Option<String>> {
    let wait = deadline.saturating_duration_since(Instant::now());
    match rx.recv_timeout(wait) {
        Ok(Ok(line)) => Ok(Some(line)),
        Ok(Err(e)) => Err(Error::Subprocess(format!("reading child output: {e}"))),
        Err(mpsc::RecvTimeoutError::Disconnected) => Ok(None),
        Err(mpsc::RecvTimeoutError::Timeout) => Err(Error::Subprocess("timed out".into())),
    }
}

fn exchange<Req, Resp>(
    config: &SubprocessConfig,
    child: &mut Child,
    rx: &mpsc::Receiver<std::io::Result<String>>,
    deadline: Instant,
    requests: &[Req],
    request_id: &(impl Fn(&Req) -> &str + Sync),
    response_id: &(impl Fn(&Resp) -> &str + Sync),
) -> Result<HashMap<String, Resp>>
where
    Req: Serialize,
    Resp: DeserializeOwned,
{
    let mut line_no = 0usize;
    loop {
        match next_line(rx, deadline)? {
            Some(line) if line.trim().is_empty() => line_no += 1,
            Some(line) => {
                line_no += 1;
                let ready = serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("ready").and_then(serde_json::Value::as_bool))
                    == Some(true);
                if !ready {
                    return Err(Error::Subprocess(format!(
                        "line {line_no}: expected {{\"ready\": true}}, got {line:?}"
                    )));
                }
                break;
            }
            None => {
                let status = child.wait().map_err(|e| Error::Subprocess(e.to_string()))?;
                return Err(Error::Subprocess(format!(
                    "{:?} exited ({status}) before signalling readiness",
                    config.command
                )));
            }
        }
    }

    let mut payload = Vec::new();
    for r in requests {
        serde_json::to_writer(&mut payload, r)?;
        payload.push(b'\n');
    }
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || {
        let res = stdin.write_all(&payload).and_then(|_| stdin.flush());
        drop(stdin);
        res
    });

    let expected: HashSet<&str> = requests.iter().map(&request_id).collect();
    let mut responses: HashMap<String, Resp> = HashMap::with_capacity(requests.len());
    while responses.len() < expected.len() {
        let Some(line) = next_line(rx, deadline)? else { break };
        line_no += 1;
        if line.trim().is_empty() {
            continue;
        }
        let resp: Resp = serde_json::from_str(&line).map_err(|e| {
            Error::Subprocess(format!("line {line_no}: malformed response {line:?}: {e}"))
        })?;
        let id = response_id(&resp).to_owned();
        if !expected.contains(id.as_str()) {
            return Err(Error::Subprocess(format!("line {line_no}: response for unknown id {id:?}")));
        }
        if responses.insert(id.clone(), resp).is_some() {
            return Err(Error::Subprocess(format!("line {line_no}: second response for id {id:?}")));
        }
    }
    let write_result = writer.join();

    let status = loop {
        if let Some(status) = child.try_wait().map_err(|e| Error::Subprocess(e.to_string()))? {
            break status;
        }
        if Instant::now() >= deadline {
            return Err(Error::Subprocess("timed out waiting for exit".into()));
        }
        thread::sleep(Duration::from_millis(2));
    };
    if !status.success() {
        return Err(Error::Subprocess(format!("{:?} exited with {status}", config.command)));
    }
    if responses.len() < expected.len() {
        let mut missing: Vec<&str> = expected
            .iter()
            .copied()
            .filter(|id| !responses.contains_key(*id))
            .collect();
        missing.sort_unstable();
        return Err(Error::Subprocess(format!("no response for ids: {}", missing.join(", "))));
    }
    match write_result {
        Ok(Ok(())) | Ok(Err(_)) => Ok(responses),
        Err(_) => Err(Error::Subprocess("writer thread panicked".into())),
    }
}

/// A metric hosted by an external program speaking the line protocol.
#[derive(Debug, Clone)]
pub struct SubprocessScorer {
    descriptor: MetricDescriptor,
    config: SubprocessConfig,
}

impl SubprocessScorer {
    pub fn new(descriptor: MetricDescriptor, config: SubprocessConfig) -> Self {
        Self { descriptor, config }
    }
}

impl Scorer for SubprocessScorer {
    fn descriptor(&self) -> &MetricDescriptor {
        &self.descriptor
    }

    fn score_batch(&self, requests: &[MetricRequest]) -> Result<Vec<f64>> {
        for r in requests {
            r.check(&self.descriptor)?;
        }
        let mut responses: HashMap<String, ScoreResponse> =
            run_line_protocol(&self.config, requests, |r| r.id.as_str(), |r: &ScoreResponse| r.id.as_str())?;
        requests
            .iter()
            .map(|r| {
                let resp = responses.remove(&r.id).expect("completeness checked");
                if resp.score.is_finite() {
                    Ok(resp.score)
                } else {
                    Err(Error::Subprocess(format!("non-finite score for id {:?}", r.id)))
                }
            })
            .collect()
    }
}

/// Scores `requests` with an external program and wraps the results as
/// records. Request ids must follow the `<example_id>|<condition>` form
/// produced by [`crate::conditions::request_id`].
pub fn score_subprocess(
    metric: &str,
    requests: &[MetricRequest],
    config: &SubprocessConfig,
) -> Result<Vec<ScoreRecord>> {
    let descriptor = MetricDescriptor {
        name: metric.to_owned(),
        needs_reference: false,
        needs_source: false,
        accepts_tag: true,
        range_hint: None,
    };
    let scores = SubprocessScorer::new(descriptor, config.clone()).score_batch(requests)?;
    requests
        .iter()
        .zip(scores)
        .map(|(req, score)| {
            let (example_id, condition) = crate::conditions::split_request_id(&req.id)?;
            ScoreRecord::new(metric, example_id, condition, score)
        })
        .collect()
}
