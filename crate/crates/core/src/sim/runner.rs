//! Fixed-step closed loop: driver -> controller -> plant -> record.

use crate::config::{AssistConfig, ConfigError, ControllerConfig};
use crate::controller::{assist_step, MonitorState, RawUserInput};
use crate::geometry::VirtualWheel;
use crate::sim::driver::{DriverConfig, ScriptedDriver};
use crate::sim::route::Route;
use crate::sim::vehicle::{step, VehicleParams, VehiclePose};
use crate::telemetry::{RunHeader, SimRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DT: f64 = 0.02;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
    #[error("duration must be positive and finite, got {0}")]
    BadDuration(f64),
}

/// The parts of the loop state besides the pose that a record depends on.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LoopState {
    pub ticks: u64,
    pub v_prev: f64,
    pub omega_integral: f64,
    pub wheel_theta: f64,
}

/// Mutable loop state advanced one control period per [`ClosedLoop::tick`].
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    config: AssistConfig,
    controller_on: bool,
    dt: f64,
    pose: VehiclePose,
    v_prev: f64,
    omega_integral: f64,
    wheel: VirtualWheel,
    ticks: u64,
}

impl ClosedLoop {
    pub fn new(
        config: AssistConfig,
        initial_pose: VehiclePose,
        dt: f64,
        controller_on: bool,
    ) -> Result<Self, SimError> {
        config.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::BadTimeStep(dt));
        }
        Ok(Self {
            wheel: VirtualWheel::new(config.controller.r_v),
            config,
            controller_on,
            dt,
            pose: initial_pose,
            v_prev: 0.0,
            omega_integral: 0.0,
            ticks: 0,
        })
    }

    /// Controller parameters in effect; switching the controller off is the
    /// same as running with `n = 1`.
    pub fn effective_controller(&self) -> ControllerConfig {
        let mut c = self.config.controller;
        if !self.controller_on {
            c.n = 1;
        }
        c
    }

    pub fn config(&self) -> &AssistConfig {
        &self.config
    }

    pub fn set_config(&mut self, config: AssistConfig) -> Result<(), SimError> {
        config.validate()?;
        self.config = config;
        self.wheel.radius = config.controller.r_v;
        Ok(())
    }

    pub fn controller_on(&self) -> bool {
        self.controller_on
    }

    pub fn set_controller_on(&mut self, on: bool) {
        self.controller_on = on;
    }

    pub fn pose(&self) -> VehiclePose {
        self.pose
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn vehicle_params(&self) -> VehicleParams {
        VehicleParams {
            l: self.config.l,
            wheel_radius: self.config.controller.r_v,
            v_m: self.config.controller.v_m,
        }
    }

    pub fn state(&self) -> LoopState {
        LoopState {
            ticks: self.ticks,
            v_prev: self.v_prev,
            omega_integral: self.omega_integral,
            wheel_theta: self.wheel.theta,
        }
    }

    pub fn resume(&mut self, state: LoopState) {
        self.ticks = state.ticks;
        self.v_prev = state.v_prev;
        self.omega_integral = state.omega_integral;
        self.wheel.theta = state.wheel_theta;
    }

    /// Puts the vehicle back at rest at `pose`; the tick counter keeps
    /// running so log time stays monotone.
    pub fn reset(&mut self, pose: VehiclePose) {
        self.pose = pose;
        self.v_prev = 0.0;
        self.omega_integral = 0.0;
        self.wheel.theta = 0.0;
    }

    pub fn tick(&mut self, raw: RawUserInput) -> SimRecord {
        let cfg = self.effective_controller();
        let state = MonitorState {
            v_v: self.v_prev,
            psi: self.pose.psi,
            omega_integral: self.omega_integral,
            dt: self.dt,
        };
        let out = assist_step(raw, &state, self.v_prev, &cfg, &self.config.bounds);
        debug_assert!(out.blended.u_v <= cfg.v_m);

        self.pose = step(&self.pose, &out.blended, self.dt);
        self.omega_integral += out.blended.u_omega * self.dt;
        self.wheel.roll(out.inputs.delta, self.dt);
        self.v_prev = out.blended.u_v;
        self.ticks += 1;

        SimRecord {
            t: self.ticks as f64 * self.dt,
            pose: self.pose,
            v_v: out.blended.u_v,
            psi_dot: out.blended.u_omega,
            wheel_theta: self.wheel.theta,
            raw,
            user_cmd: out.user,
            ctrl_cmd: out.ctrl,
            blended: out.blended,
            arc_inputs: out.inputs,
            monitors: out.monitors,
            degraded: out.degraded.is_some(),
        }
    }
}

/// Number of ticks in a run of `duration` seconds.
pub fn tick_count(duration: f64, dt: f64) -> usize {
    (duration / dt).round() as usize
}

/// Runs the scripted driver on `route` for `duration` seconds, starting at
/// the route's first point facing along it.
pub fn run_closed_loop(
    config: &AssistConfig,
    route: &Route,
    driver: DriverConfig,
    duration: f64,
    dt: f64,
    controller_on: bool,
) -> Result<Vec<SimRecord>, SimError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(SimError::BadDuration(duration));
    }
    let start = route_start(route);
    let mut sim = ClosedLoop::new(*config, start, dt, controller_on)?;
    let mut driver = ScriptedDriver::new(driver);
    let v_m = config.controller.v_m;
    Ok((0..tick_count(duration, dt))
        .map(|_| {
            let raw = driver.drive_tick(&sim.pose(), route, v_m);
            sim.tick(raw)
        })
        .collect())
}

pub fn route_start(route: &Route) -> VehiclePose {
    let p = route.points[0];
    VehiclePose::new(p.x, p.y, route.start_heading())
}

/// Re-drives the loop described by `header` with a recorded raw-input
/// sequence.
pub fn replay<I>(header: &RunHeader, raws: I) -> Result<Vec<SimRecord>, SimError>
where
    I: IntoIterator<Item = RawUserInput>,
{
    let mut sim = ClosedLoop::new(header.config, header.initial_pose, header.dt, header.controller_on)?;
    if let Some(state) = header.resume {
        sim.resume(state);
    }
    Ok(raws.into_iter().map(|raw| sim.tick(raw)).collect())
}
