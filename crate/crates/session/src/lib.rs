//! Live interactive session: a fixed-rate loop driven by joystick messages
//! over a websocket, streaming one state frame per tick.
//!
//! [`Session`] is the synchronous state machine and can be ticked directly.
//! [`serve`] wraps it in a 50 Hz loop task and a websocket endpoint at
//! `/ws` that accepts one client at a time.

use darboux_assist::controller::{RawUserInput, STEER_LIMIT};
use darboux_assist::sim::{make_route, route_start, ClosedLoop, RouteKind, SimError, DEFAULT_DT};
use darboux_assist::telemetry::{LogSource, LogWriter, RunHeader, SimRecord, TelemetryError, SCHEMA_VERSION};
use darboux_assist::{AssistConfig, ConfigError};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use thiserror::Error;

mod server;

pub use server::{serve, serve_on, ServeOptions};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error("route: {0}")]
    Route(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Messages from the client. Normalized inputs are clamped to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InboundMessage {
    Input { v_norm: f64, steer_norm: f64 },
    /// Partial configuration: any subset of the config keys, plus
    /// `controller_on`.
    SetConfig { config: serde_json::Map<String, serde_json::Value> },
    Reset { route: RouteKind },
    Record { on: bool },
}

/// Messages to the client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OutboundMessage {
    State {
        record: SimRecord,
        recording: bool,
    },
    ConfigAck {
        config: AssistConfig,
        controller_on: bool,
    },
    Error {
        code: String,
        text: String,
    },
}

impl OutboundMessage {
    pub fn error(code: &str, text: impl Into<String>) -> Self {
        OutboundMessage::Error {
            code: code.into(),
            text: text.into(),
        }
    }
}

/// Held joystick sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Joystick {
    pub v_norm: f64,
    pub steer_norm: f64,
}

impl Joystick {
    pub fn new(v_norm: f64, steer_norm: f64) -> Self {
        let clamp = |x: f64| if x.is_nan() { 0.0 } else { x.clamp(-1.0, 1.0) };
        Self {
            v_norm: clamp(v_norm),
            steer_norm: clamp(steer_norm),
        }
    }

    /// Raw input for a vehicle heading `psi`. The vehicle only drives
    /// forward, so pulling back means stop.
    pub fn to_raw(self, psi: f64, v_m: f64) -> RawUserInput {
        RawUserInput {
            v_cmd: self.v_norm.max(0.0) * v_m,
            psi_cmd: psi + self.steer_norm * STEER_LIMIT,
        }
    }
}

struct Recording {
    writer: LogWriter<BufWriter<File>>,
    path: PathBuf,
}

pub struct Session {
    sim: ClosedLoop,
    route: RouteKind,
    held: Joystick,
    log_dir: PathBuf,
    recording: Option<Recording>,
    finished: Vec<PathBuf>,
    segment: u32,
}

impl Session {
    pub fn new(config: AssistConfig, route: RouteKind, log_dir: PathBuf) -> Result<Self, SessionError> {
        let start = start_pose(route)?;
        Ok(Self {
            sim: ClosedLoop::new(config, start, DEFAULT_DT, true)?,
            route,
            held: Joystick::default(),
            log_dir,
            recording: None,
            finished: Vec::new(),
            segment: 0,
        })
    }

    pub fn sim(&self) -> &ClosedLoop {
        &self.sim
    }

    pub fn held(&self) -> Joystick {
        self.held
    }

    pub fn is_recording(&self) -> bool {
        self.recording.is_some()
    }

    /// Paths of completed recordings, oldest first.
    pub fn recordings(&self) -> &[PathBuf] {
        &self.finished
    }

    /// Applies one inbound message. Inputs are held until replaced; other
    /// messages may produce a reply.
    pub fn handle(&mut self, msg: InboundMessage) -> Option<OutboundMessage> {
        match msg {
            InboundMessage::Input { v_norm, steer_norm } => {
                self.held = Joystick::new(v_norm, steer_norm);
                None
            }
            InboundMessage::SetConfig { config } => Some(match self.set_config(&config) {
                Ok(()) => self.config_ack(),
                Err(e) => OutboundMessage::error("bad_config", e.to_string()),
            }),
            InboundMessage::Reset { route } => match self.reset(route) {
                Ok(()) => None,
                Err(e) => Some(OutboundMessage::error("bad_route", e.to_string())),
            },
            InboundMessage::Record { on } => {
                let result = if on { self.start_recording() } else { self.stop_recording() };
                result.err().map(|e| OutboundMessage::error("record_failed", e.to_string()))
            }
        }
    }

    pub fn config_ack(&self) -> OutboundMessage {
        OutboundMessage::ConfigAck {
            config: *self.sim.config(),
            controller_on: self.sim.controller_on(),
        }
    }

    fn set_config(&mut self, partial: &serde_json::Map<String, serde_json::Value>) -> Result<(), SessionError> {
        let mut cfg = *self.sim.config();
        let mut controller_on = self.sim.controller_on();
        for (key, value) in partial {
            if key == "controller_on" {
                controller_on = value.as_bool().ok_or_else(|| ConfigError::BadValue {
                    key: key.clone(),
                    value: value.to_string(),
                    reason: "expected a boolean".into(),
                })?;
                continue;
            }
            let text = match value {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                other => {
                    return Err(ConfigError::BadValue {
                        key: key.clone(),
                        value: other.to_string(),
                        reason: "expected a number".into(),
                    }
                    .into())
                }
            };
            cfg.set(key, &text)?;
        }
        cfg.validate()?;
        self.sim.set_config(cfg)?;
        self.sim.set_controller_on(controller_on);
        self.restart_recording()
    }

    fn reset(&mut self, route: RouteKind) -> Result<(), SessionError> {
        let pose = start_pose(route)?;
        self.route = route;
        self.sim.reset(pose);
        self.held = Joystick::default();
        self.restart_recording()
    }

    /// Splits an active recording so every file replays under one
    /// configuration.
    fn restart_recording(&mut self) -> Result<(), SessionError> {
        if self.recording.is_some() {
            self.stop_recording()?;
            self.start_recording()?;
        }
        Ok(())
    }

    fn start_recording(&mut self) -> Result<(), SessionError> {
        if self.recording.is_some() {
            return Ok(());
        }
        std::fs::create_dir_all(&self.log_dir)?;
        self.segment += 1;
        let path = self
            .log_dir
            .join(format!("session-{}-{:03}.jsonl", std::process::id(), self.segment));
        let header = RunHeader {
            schema_version: SCHEMA_VERSION,
            source: LogSource::Session,
            config: *self.sim.config(),
            controller_on: self.sim.controller_on(),
            route: self.route,
            route_scale: self.route.default_scale(),
            driver: None,
            seed: 0,
            dt: self.sim.dt(),
            initial_pose: self.sim.pose(),
            resume: Some(self.sim.state()),
        };
        let writer = LogWriter::new(BufWriter::new(File::create(&path)?), &header)?;
        log::info!("recording to {}", path.display());
        self.recording = Some(Recording { writer, path });
        Ok(())
    }

    fn stop_recording(&mut self) -> Result<(), SessionError> {
        if let Some(rec) = self.recording.take() {
            let (_, bytes) = rec.writer.finish()?;
            log::info!("recording closed: {} ({bytes} bytes)", rec.path.display());
            self.finished.push(rec.path);
        }
        Ok(())
    }

    /// Advances the loop by exactly one step using the held input.
    pub fn tick(&mut self) -> OutboundMessage {
        let v_m = self.sim.config().controller.v_m;
        let raw = self.held.to_raw(self.sim.pose().psi, v_m);
        let record = self.sim.tick(raw);
        if let Some(rec) = &mut self.recording {
            if let Err(e) = rec.writer.append(&record) {
                log::error!("recording failed, stopping: {e}");
                self.recording = None;
            }
        }
        OutboundMessage::State {
            record,
            recording: self.recording.is_some(),
        }
    }

    /// The client went away: release the joystick and close the recording.
    pub fn disconnect(&mut self) -> Result<(), SessionError> {
        self.held = Joystick::default();
        self.stop_recording()
    }

    /// Flushes and closes any active recording.
    pub fn close(&mut self) -> Result<(), SessionError> {
        self.stop_recording()
    }
}

fn start_pose(route: RouteKind) -> Result<darboux_assist::sim::VehiclePose, SessionError> {
    let r = make_route(route, route.default_scale()).map_err(|e| SessionError::Route(e.to_string()))?;
    Ok(route_start(&r))
}
