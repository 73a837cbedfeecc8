//! Per-tick run logs.
//!
//! A log is UTF-8 text, one JSON object per line: the first line is the
//! [`RunHeader`], every following line one [`SimRecord`]. Floats are written
//! in shortest round-trip form so reading a log back is bit-exact.

use crate::config::AssistConfig;
use crate::controller::{
    BlendedCommand, ControllerCommand, MonitorReport, MonitorValues, RawUserInput, UserCommand,
};
use crate::geometry::ArcLengthInputs;
use crate::sim::driver::DriverConfig;
use crate::sim::metrics::{compute_metrics, MetricsError, TrajectoryMetrics};
use crate::sim::route::{Route, RouteKind};
use crate::sim::runner::LoopState;
use crate::sim::vehicle::VehiclePose;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema version {found} does not match supported version {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("log is empty")]
    MissingHeader,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// One control tick. Pose and time are taken after the plant step; the
/// commands are the ones applied during the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub t: f64,
    pub pose: VehiclePose,
    pub v_v: f64,
    pub psi_dot: f64,
    /// Accumulated rotation of the virtual wheel (rad).
    pub wheel_theta: f64,
    pub raw: RawUserInput,
    pub user_cmd: UserCommand,
    pub ctrl_cmd: ControllerCommand,
    pub blended: BlendedCommand,
    pub arc_inputs: ArcLengthInputs,
    pub monitors: MonitorReport,
    pub degraded: bool,
}

impl SimRecord {
    /// All-zero record with passing monitors.
    pub fn zeroed() -> Self {
        Self {
            t: 0.0,
            pose: VehiclePose::default(),
            v_v: 0.0,
            psi_dot: 0.0,
            wheel_theta: 0.0,
            raw: RawUserInput::default(),
            user_cmd: UserCommand::default(),
            ctrl_cmd: ControllerCommand::default(),
            blended: BlendedCommand::default(),
            arc_inputs: ArcLengthInputs::default(),
            monitors: MonitorReport::from_values(MonitorValues::default()),
            degraded: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogSource {
    Headless,
    Session,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub schema_version: u32,
    pub source: LogSource,
    pub config: AssistConfig,
    pub controller_on: bool,
    pub route: RouteKind,
    pub route_scale: f64,
    pub driver: Option<DriverConfig>,
    pub seed: u64,
    pub dt: f64,
    pub initial_pose: VehiclePose,
    /// Loop state at the first record when recording started mid-run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume: Option<LoopState>,
}

/// Streaming log writer; the header is written on construction.
pub struct LogWriter<W: Write> {
    sink: W,
    bytes: u64,
}

impl<W: Write> LogWriter<W> {
    pub fn new(mut sink: W, header: &RunHeader) -> Result<Self, TelemetryError> {
        let bytes = write_line(&mut sink, header)?;
        Ok(Self { sink, bytes })
    }

    pub fn append(&mut self, record: &SimRecord) -> Result<(), TelemetryError> {
        self.bytes += write_line(&mut self.sink, record)?;
        Ok(())
    }

    pub fn bytes_written(&self) -> u64 {
        self.bytes
    }

    pub fn finish(mut self) -> Result<(W, u64), TelemetryError> {
        self.sink.flush()?;
        Ok((self.sink, self.bytes))
    }
}

fn write_line<W: Write, T: Serialize>(sink: &mut W, value: &T) -> Result<u64, TelemetryError> {
    let mut line = serde_json::to_vec(value).map_err(|e| TelemetryError::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    line.push(b'\n');
    sink.write_all(&line)?;
    Ok(line.len() as u64)
}

/// Writes a complete log and returns the number of bytes written.
pub fn write_log<W: Write>(
    header: &RunHeader,
    records: &[SimRecord],
    sink: W,
) -> Result<u64, TelemetryError> {
    let mut w = LogWriter::new(sink, header)?;
    for r in records {
        w.append(r)?;
    }
    Ok(w.finish()?.1)
}

pub fn read_log<R: BufRead>(source: R) -> Result<(RunHeader, Vec<SimRecord>), TelemetryError> {
    let mut lines = source.lines().enumerate();
    let header: RunHeader = match lines.next() {
        None => return Err(TelemetryError::MissingHeader),
        Some((_, line)) => parse_line(1, &line?)?,
    };
    if header.schema_version != SCHEMA_VERSION {
        return Err(TelemetryError::VersionMismatch {
            found: header.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_line(i + 1, &line)?);
    }
    Ok((header, records))
}

fn parse_line<T: for<'de> Deserialize<'de>>(line_no: usize, text: &str) -> Result<T, TelemetryError> {
    serde_json::from_str(text).map_err(|e| TelemetryError::Parse {
        line: line_no,
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MonitorViolations {
    pub velocity: u64,
    pub steering: u64,
    pub stability: u64,
    pub degraded: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSummary {
    pub records: usize,
    pub metrics: TrajectoryMetrics,
    pub violations: MonitorViolations,
}

pub fn summarize(records: &[SimRecord], route: &Route, v_m: f64) -> Result<LogSummary, TelemetryError> {
    let metrics = compute_metrics(records, route, v_m)?;
    let mut violations = MonitorViolations::default();
    for r in records {
        violations.velocity += u64::from(!r.monitors.velocity_ok);
        violations.steering += u64::from(!r.monitors.steering_ok);
        violations.stability += u64::from(!r.monitors.stability_ok);
        violations.degraded += u64::from(r.degraded);
    }
    Ok(LogSummary {
        records: records.len(),
        metrics,
        violations,
    })
}
