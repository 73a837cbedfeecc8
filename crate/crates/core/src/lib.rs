//! Geometric assistive shared control for differential-drive vehicles.
//!
//! User joystick input (desired speed and heading) is blended with a
//! controller command derived from the Darboux-frame kinematics of a
//! virtual wheel. No desired trajectory is needed: the correction depends
//! only on the joystick and the measured vehicle state.
//!
//! * [`geometry`]: Darboux-frame kinematics of the virtual wheel.
//! * [`controller`]: curvature inputs, controller command, blending, monitors.
//! * [`sim`]: unicycle plant, routes, scripted driver, metrics, closed loop.
//! * [`telemetry`]: line-delimited run logs and summaries.

pub mod config;
pub mod controller;
pub mod geometry;
pub mod sim;
pub mod telemetry;

pub use config::{AssistConfig, ConfigError, ControllerConfig, SafetyBoundConfig};
pub use controller::{assist_step, AssistOutput, BlendedCommand, RawUserInput};
pub use geometry::ArcLengthInputs;
