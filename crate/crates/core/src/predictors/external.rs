//! Adapter for an out-of-process motion predictor.
//!
//! The external predictor (typically a trained network served by a small
//! wrapper script) speaks a line-delimited JSON protocol on stdin/stdout:
//!
//! ```text
//! -> {"t_obs":8,"vehicles":[[[x,y],...],...],"ego_plan":[[x,y],...]}
//! <- {"pred":[[[x,y],...],...]}
//! ```
//!
//! One request and one response per line. Row order matches the request
//! (ego first); each response row must hold exactly `t_pred` positions.
//! A response that does not arrive within the configured deadline marks the
//! connection broken and surfaces as [`PredictError::DeadlineExceeded`],
//! which the controller treats as an infeasible candidate.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::Point;

use super::{ObservationWindow, PredictError, PredictionSheet, Predictor, PredictorFactory};

/// Request sent to the adapter, one JSON object per line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireRequest {
    pub t_obs: usize,
    /// Per-vehicle observed positions, ego first, oldest first.
    pub vehicles: Vec<Vec<Point>>,
    /// Planned ego positions; empty when the prediction is unconditioned.
    pub ego_plan: Vec<Point>,
}

/// Response from the adapter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireResponse {
    /// Per-vehicle predicted positions, same row order as the request.
    pub pred: Vec<Vec<Point>>,
}

#[derive(Debug, Clone)]
pub struct ExternalConfig {
    /// Command line to spawn, argv style.
    pub command: Vec<String>,
    /// Steps the adapter predicts per request.
    pub t_pred: usize,
    /// Per-request response deadline.
    pub deadline: Duration,
}

impl ExternalConfig {
    pub fn new(command: Vec<String>, t_pred: usize, deadline_ms: u64) -> Self {
        Self { command, t_pred, deadline: Duration::from_millis(deadline_ms) }
    }
}

struct Connection {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Connection {
    fn spawn(cfg: &ExternalConfig) -> Result<Self, PredictError> {
        let (program, args) = cfg
            .command
            .split_first()
            .ok_or_else(|| PredictError::Protocol("empty adapter command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, lines) = mpsc::channel();
        // Dedicated reader thread so requests can time out; it exits when
        // the child closes stdout or the receiver is dropped.
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines })
    }

    fn request(&mut self, req: &WireRequest, deadline: Duration) -> Result<WireResponse, PredictError> {
        let mut line = serde_json::to_string(req)
            .map_err(|e| PredictError::Protocol(format!("request encode: {e}")))?;
        line.push('\n');
        self.stdin.write_all(line.as_bytes())?;
        self.stdin.flush()?;
        match self.lines.recv_timeout(deadline) {
            Ok(Ok(text)) => serde_json::from_str(&text)
                .map_err(|e| PredictError::Protocol(format!("response decode: {e}"))),
            Ok(Err(io)) => Err(PredictError::Io(io)),
            Err(RecvTimeoutError::Timeout) => Err(PredictError::DeadlineExceeded(deadline)),
            Err(RecvTimeoutError::Disconnected) => {
                Err(PredictError::Protocol("adapter process closed its output".into()))
            }
        }
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Pool of adapter processes. Parallel rollout workers each check out a
/// connection, so requests never interleave on one process.
pub struct AdapterPool {
    cfg: ExternalConfig,
    idle: Mutex<Vec<Connection>>,
}

impl AdapterPool {
    pub fn new(cfg: ExternalConfig) -> Arc<Self> {
        Arc::new(Self { cfg, idle: Mutex::new(Vec::new()) })
    }

    pub fn t_pred(&self) -> usize {
        self.cfg.t_pred
    }

    fn checkout(&self) -> Result<Connection, PredictError> {
        if let Some(conn) = self.idle.lock().expect("pool lock").pop() {
            return Ok(conn);
        }
        Connection::spawn(&self.cfg)
    }

    fn give_back(&self, conn: Connection) {
        self.idle.lock().expect("pool lock").push(conn);
    }
}

/// Per-candidate handle on the adapter pool.
pub struct ExternalPredictor {
    pool: Arc<AdapterPool>,
    conn: Option<Connection>,
}

impl ExternalPredictor {
    pub fn new(pool: Arc<AdapterPool>) -> Self {
        Self { pool, conn: None }
    }
}

impl Predictor for ExternalPredictor {
    fn horizon(&self) -> usize {
        self.pool.cfg.t_pred
    }

    fn predict(
        &mut self,
        window: &ObservationWindow,
        ego_plan: Option<&[Point]>,
    ) -> Result<PredictionSheet, PredictError> {
        window.validate()?;
        let req = WireRequest {
            t_obs: window.t_obs,
            vehicles: window.tracks.clone(),
            ego_plan: ego_plan.map(<[Point]>::to_vec).unwrap_or_default(),
        };
        if self.conn.is_none() {
            self.conn = Some(self.pool.checkout()?);
        }
        let conn = self.conn.as_mut().expect("connection just ensured");
        let response = match conn.request(&req, self.pool.cfg.deadline) {
            Ok(r) => r,
            Err(e) => {
                // Broken or timed-out connection: drop it (kills the child)
                // rather than returning it to the pool.
                self.conn = None;
                return Err(e);
            }
        };
        if response.pred.len() != window.tracks.len() {
            self.conn = None;
            return Err(PredictError::Protocol(format!(
                "adapter returned {} rows for {} vehicles",
                response.pred.len(),
                window.tracks.len()
            )));
        }
        for (i, row) in response.pred.iter().enumerate() {
            if row.len() != self.pool.cfg.t_pred {
                self.conn = None;
                return Err(PredictError::Protocol(format!(
                    "adapter row {i} has {} of {} steps",
                    row.len(),
                    self.pool.cfg.t_pred
                )));
            }
        }
        Ok(PredictionSheet { steps: self.pool.cfg.t_pred, tracks: response.pred })
    }
}

impl Drop for ExternalPredictor {
    fn drop(&mut self) {
        if let Some(conn) = self.conn.take() {
            self.pool.give_back(conn);
        }
    }
}

/// Factory handing out pooled adapter connections.
pub struct ExternalFactory {
    pub pool: Arc<AdapterPool>,
}

impl PredictorFactory for ExternalFactory {
    fn instance(&self) -> Box<dyn Predictor + Send + '_> {
        Box::new(ExternalPredictor::new(self.pool.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> ObservationWindow {
        ObservationWindow::backfilled(4, &[[0.0, 0.0], [5.0, 3.7]], 0)
    }

    #[test]
    fn wire_format_round_trips() {
        let req = WireRequest {
            t_obs: 2,
            vehicles: vec![vec![[0.0, 0.0], [1.0, 0.5]], vec![[4.0, 3.7], [4.5, 3.7]]],
            ego_plan: vec![[2.0, 1.0]],
        };
        let json = serde_json::to_string(&req).unwrap();
        assert_eq!(
            json,
            r#"{"t_obs":2,"vehicles":[[[0.0,0.0],[1.0,0.5]],[[4.0,3.7],[4.5,3.7]]],"ego_plan":[[2.0,1.0]]}"#
        );
        let back: WireRequest = serde_json::from_str(&json).unwrap();
        assert_eq!(back.vehicles, req.vehicles);

        let resp: WireResponse = serde_json::from_str(r#"{"pred":[[[1.5,0.7],[2.0,0.9]]]}"#).unwrap();
        assert_eq!(resp.pred, vec![vec![[1.5, 0.7], [2.0, 0.9]]]);
    }

    #[test]
    fn echoing_process_is_a_protocol_error() {
        // `cat` echoes the request back, which is not a valid response.
        let pool = AdapterPool::new(ExternalConfig::new(vec!["cat".into()], 2, 1000));
        let mut p = ExternalPredictor::new(pool);
        match p.predict(&window(), None) {
            Err(PredictError::Protocol(_)) => {}
            other => panic!("expected protocol error, got {other:?}"),
        }
    }

    #[test]
    fn silent_process_hits_the_deadline() {
        // `sleep` never answers.
        let pool = AdapterPool::new(ExternalConfig::new(
            vec!["sleep".into(), "5".into()],
            2,
            50,
        ));
        let mut p = ExternalPredictor::new(pool);
        match p.predict(&window(), None) {
            Err(PredictError::DeadlineExceeded(_)) => {}
            other => panic!("expected deadline error, got {other:?}"),
        }
    }

    #[test]
    fn missing_program_is_an_io_error() {
        let pool = AdapterPool::new(ExternalConfig::new(
            vec!["definitely-not-a-real-binary-name".into()],
            2,
            50,
        ));
        let mut p = ExternalPredictor::new(pool);
        assert!(matches!(p.predict(&window(), None), Err(PredictError::Io(_))));
    }
}
