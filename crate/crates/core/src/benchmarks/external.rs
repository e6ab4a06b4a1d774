//! Plant adapter for an external process speaking a line protocol.
//!
//! Request (one line, UTF-8): `EVAL p1 p2 … | z1 …`. The ` | z…` part is
//! omitted when there is no context. Numbers are written in Rust's shortest
//! round-trip form, so parsing them back yields the exact same `f64`.
//!
//! Response (one line): `OK <objective> <constraint>` or `ERR <message>`.
//! Non-finite values are rejected.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::safe_bo::{Measurement, Plant, PlantError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalPlantSpec {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    30_000
}

impl ExternalPlantSpec {
    pub fn new(command: Vec<String>) -> Self {
        Self { command, timeout_ms: default_timeout_ms() }
    }

    /// Splits a whitespace-separated command line, e.g. `"python3 rig.py --port 3"`.
    pub fn parse(command_line: &str) -> Self {
        Self::new(command_line.split_whitespace().map(String::from).collect())
    }
}

pub fn format_request(point: &[f64], context: Option<&[f64]>) -> String {
    let mut line = String::from("EVAL");
    for v in point {
        line.push(' ');
        line.push_str(&format!("{v:?}"));
    }
    if let Some(z) = context {
        line.push_str(" |");
        for v in z {
            line.push(' ');
            line.push_str(&format!("{v:?}"));
        }
    }
    line
}

/// Inverse of [`format_request`]; used by plant implementations and tests.
pub fn parse_request(line: &str) -> Result<(Vec<f64>, Option<Vec<f64>>), String> {
    let rest = line.trim().strip_prefix("EVAL").ok_or("request must start with EVAL")?;
    let (p, z) = match rest.split_once('|') {
        Some((p, z)) => (p, Some(z)),
        None => (rest, None),
    };
    let nums = |s: &str| -> Result<Vec<f64>, String> {
        s.split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
            .collect()
    };
    Ok((nums(p)?, z.map(nums).transpose()?))
}

pub fn parse_response(line: &str) -> Result<Measurement, PlantError> {
    let malformed = |reason: &str| PlantError::Malformed { payload: line.to_string(), reason: reason.into() };
    let trimmed = line.trim();
    if let Some(msg) = trimmed.strip_prefix("ERR") {
        return Err(PlantError::Reported(msg.trim().to_string()));
    }
    let rest = trimmed.strip_prefix("OK").ok_or_else(|| malformed("expected OK or ERR"))?;
    let values: Vec<&str> = rest.split_whitespace().collect();
    let [o, c] = values.as_slice() else {
        return Err(malformed("expected two values after OK"));
    };
    let o: f64 = o.parse().map_err(|_| malformed("objective is not a number"))?;
    let c: f64 = c.parse().map_err(|_| malformed("constraint is not a number"))?;
    if !(o.is_finite() && c.is_finite()) {
        return Err(malformed("non-finite measurement"));
    }
    Ok(Measurement { objective: o, constraint: c })
}

/// Subprocess plant with one outstanding request at a time.
pub struct ExternalPlant {
    spec: ExternalPlantSpec,
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl ExternalPlant {
    pub fn spawn(spec: ExternalPlantSpec) -> Result<Self, PlantError> {
        let (program, args) = spec
            .command
            .split_first()
            .ok_or_else(|| PlantError::Io("empty external plant command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| PlantError::Io(format!("cannot start {program:?}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Self { spec, child, stdin, lines: rx })
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.spec.timeout_ms)
    }
}

impl Plant for ExternalPlant {
    fn evaluate(&mut self, point: &[f64], context: Option<&[f64]>) -> Result<Measurement, PlantError> {
        let request = format_request(point, context);
        debug!("external plant <- {request}");
        writeln!(self.stdin, "{request}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| PlantError::Io(format!("write failed: {e}")))?;
        let line = match self.lines.recv_timeout(self.timeout()) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(PlantError::Io(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => return Err(PlantError::Timeout(self.timeout())),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(PlantError::Io("external plant closed its output".into()))
            }
        };
        debug!("external plant -> {line}");
        parse_response(&line).inspect_err(|e| warn!("external plant response rejected: {e}"))
    }

    fn description(&self) -> String {
        format!("external process {:?}", self.spec.command)
    }
}

impl Drop for ExternalPlant {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_layout() {
        assert_eq!(format_request(&[1.5, 2.0], None), "EVAL 1.5 2.0");
        assert_eq!(format_request(&[0.1], Some(&[0.684])), "EVAL 0.1 | 0.684");
    }

    #[test]
    fn six_decimal_coordinates_round_trip_exactly() {
        let p = [1.234567, -0.000001, 7.654321];
        let z = [0.753001];
        let (q, w) = parse_request(&format_request(&p, Some(&z))).unwrap();
        assert_eq!(q.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), p.map(f64::to_bits));
        assert_eq!(w.unwrap()[0].to_bits(), z[0].to_bits());
    }

    #[test]
    fn responses() {
        assert_eq!(
            parse_response("OK 1.0 0.0").unwrap(),
            Measurement { objective: 1.0, constraint: 0.0 }
        );
        assert!(matches!(parse_response("ERR rig offline"), Err(PlantError::Reported(m)) if m == "rig offline"));
        assert!(matches!(parse_response("OK nan 0"), Err(PlantError::Malformed { .. })));
        assert!(matches!(parse_response("nan"), Err(PlantError::Malformed { .. })));
        assert!(matches!(parse_response("OK 1"), Err(PlantError::Malformed { .. })));
    }
}
