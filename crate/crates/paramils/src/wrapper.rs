//! Subprocess backend.
//!
//! The wrapper is called as
//! `<cmd> <instance_path> <seed> <captime> -<param> <value> ...` with the
//! active parameters sorted by name, and must print one line
//! `RESULT: <SUCCESS|TIMEOUT|CRASHED> <seconds>` on stdout.

use std::collections::HashMap;
use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use paramils_core::error::BackendError;
use paramils_core::run::{RunOutcome, RunStatus};
use paramils_core::{Configuration, ConfigurationSpace, Instance, TargetRunner};

pub const GRACE: Duration = Duration::from_secs(1);
const POLL: Duration = Duration::from_millis(2);

/// Wall-clock bookkeeping for one wrapper call.
#[derive(Debug, Clone, PartialEq)]
pub struct WallRecord {
    pub instance: String,
    pub seed: u32,
    pub captime: f64,
    pub status: RunStatus,
    pub reported: f64,
    pub wall_s: f64,
}

#[derive(Debug)]
pub struct WrapperRunner {
    command: Vec<String>,
    paths: HashMap<String, PathBuf>,
    grace: Duration,
    log: Vec<WallRecord>,
}

impl WrapperRunner {
    /// `paths` maps instance names to the paths handed to the wrapper;
    /// unknown names are passed through unchanged.
    pub fn new(command: Vec<String>, paths: HashMap<String, PathBuf>) -> Self {
        assert!(!command.is_empty(), "wrapper command is empty");
        WrapperRunner { command, paths, grace: GRACE, log: Vec::new() }
    }

    pub fn with_grace(mut self, grace: Duration) -> Self {
        self.grace = grace;
        self
    }

    pub fn log(&self) -> &[WallRecord] {
        &self.log
    }

    pub fn args(&self, space: &ConfigurationSpace, config: &Configuration, instance: &Instance, seed: u32, captime: f64) -> Vec<String> {
        let path = self.paths.get(&instance.name).map(|p| p.display().to_string()).unwrap_or_else(|| instance.name.clone());
        let mut args = vec![path, seed.to_string(), captime.to_string()];
        for (name, value) in space.active_assignment(config) {
            args.push(format!("-{name}"));
            args.push(value.to_string());
        }
        args
    }
}

/// The single result line of the wrapper's output, if well formed.
pub fn parse_result(stdout: &str) -> Option<(RunStatus, f64)> {
    let mut found = None;
    for line in stdout.lines() {
        let Some(rest) = line.trim().strip_prefix("RESULT:") else { continue };
        if found.is_some() {
            return None;
        }
        let mut parts = rest.split_whitespace();
        let status = parts.next()?.parse::<RunStatus>().ok()?;
        let cost = parts.next()?.parse::<f64>().ok().filter(|c| c.is_finite() && *c >= 0.0)?;
        if parts.next().is_some() {
            return None;
        }
        found = Some((status, cost));
    }
    found
}

impl TargetRunner for WrapperRunner {
    fn run(
        &mut self,
        space: &ConfigurationSpace,
        config: &Configuration,
        instance: &Instance,
        seed: u32,
        captime: f64,
    ) -> Result<RunOutcome, BackendError> {
        let args = self.args(space, config, instance, seed, captime);
        let started = Instant::now();
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .args(&args)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| BackendError::new(format!("cannot start wrapper `{}`: {e}", self.command[0])))?;

        let mut stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stdout.read_to_end(&mut buf);
            let _ = tx.send(buf);
        });

        let deadline = Duration::from_secs_f64(captime) + self.grace;
        let mut killed = false;
        loop {
            match child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) if started.elapsed() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    killed = true;
                    break;
                }
                Ok(None) => thread::sleep(POLL),
                Err(e) => return Err(BackendError::new(format!("waiting for wrapper: {e}"))),
            }
        }
        // a grandchild may keep the pipe open; do not wait for it forever
        let output = rx.recv_timeout(self.grace).unwrap_or_default();
        let wall_s = started.elapsed().as_secs_f64();

        let outcome = if killed {
            RunOutcome::timeout(captime)
        } else {
            match parse_result(&String::from_utf8_lossy(&output)) {
                Some((RunStatus::Success, t)) => RunOutcome::success(t),
                Some((RunStatus::Timeout, _)) => RunOutcome::timeout(captime),
                Some((RunStatus::Crashed, _)) | None => RunOutcome::crashed(captime),
            }
        };
        self.log.push(WallRecord {
            instance: instance.name.clone(),
            seed,
            captime,
            status: outcome.status,
            reported: outcome.cost,
            wall_s,
        });
        Ok(outcome)
    }
}
