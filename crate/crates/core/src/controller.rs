//! Geometric assistive controller.
//!
//! The raw joystick pair (desired speed, desired absolute heading) and the
//! measured vehicle state are mapped onto the arc-length inputs
//! `(alpha_s, gamma_s, delta)` of a virtual surface sandwiched between the
//! virtual wheel and the floor. Those inputs give the controller command
//! `u_c = [delta (1 + R_v gamma_s), delta alpha_s]`, which is blended with the
//! user command `u_u` as `u = (u_u + (n - 1) u_c) / n`.
//!
//! * `gamma_s = 1 / R_i` where `R_i` grows with the relative steering angle
//!   through the incircle of an isosceles triangle built on `R_v`.
//! * `alpha_s = tan(zeta) / R_i` where `zeta` is the projection angle of a
//!   spherical cap whose area `R_v^2 |dpsi|` encodes the heading error
//!   (Gauss-Bonnet with Gaussian curvature `1 / R_v^2`).
//! * `delta = lambda_s / lambda_t`, with `lambda_s` the user speed decayed
//!   exponentially once the previous vehicle speed exceeds `v_c`.

use crate::config::{ControllerConfig, SafetyBoundConfig};
use crate::geometry::ArcLengthInputs;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Largest relative steering angle fed to the incircle construction.
pub const STEER_LIMIT: f64 = FRAC_PI_2 * 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
pub enum DomainError {
    #[error("steering angle {0} rad outside (-pi/2, pi/2)")]
    SteeringAngle(f64),
    #[error("heading difference {0} rad outside (-pi/2, pi/2)")]
    HeadingDifference(f64),
    #[error("cap area {0} m^2 outside [0, 4 pi R_v^2]")]
    CapArea(f64),
    #[error("non-finite input")]
    NonFinite,
}

/// Joystick pair: desired speed (m/s) and desired absolute heading (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RawUserInput {
    pub v_cmd: f64,
    pub psi_cmd: f64,
}

/// User command `u_u = c u'_u` in the plant's input space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UserCommand {
    pub u_v_u: f64,
    pub u_omega_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControllerCommand {
    pub u_v_c: f64,
    pub u_omega_c: f64,
}

/// Command actually sent to the plant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlendedCommand {
    pub u_v: f64,
    pub u_omega: f64,
}

/// Both sides of the three monitored inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MonitorValues {
    pub velocity_lhs: f64,
    pub velocity_rhs: f64,
    pub steering_lhs: f64,
    pub steering_rhs: f64,
    pub stability_lhs: f64,
    pub stability_rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub velocity_ok: bool,
    pub steering_ok: bool,
    pub stability_ok: bool,
    pub values: MonitorValues,
}

impl MonitorReport {
    pub fn from_values(values: MonitorValues) -> Self {
        // u_u = 0 makes the bound 0; the inequality is then vacuous.
        let stability_ok = values.stability_lhs < values.stability_rhs
            || (values.stability_rhs == 0.0 && values.stability_lhs == 0.0);
        Self {
            velocity_ok: values.velocity_lhs <= values.velocity_rhs,
            steering_ok: values.steering_lhs <= values.steering_rhs,
            stability_ok,
            values,
        }
    }
}

/// Vehicle quantities the monitors need.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MonitorState {
    /// Current measured speed (m/s).
    pub v_v: f64,
    /// Current unwrapped heading (rad).
    pub psi: f64,
    /// Integral of the applied turn rate so far (rad).
    pub omega_integral: f64,
    /// Control period (s).
    pub dt: f64,
}

/// Radius of the imaginary sphere for a relative steering angle:
/// `R_v / mu_r` plus the inradius of the isosceles triangle with legs
/// `R_v / cos|psi|` and base `2 R_v tan|psi|`.
pub fn incircle_radius(psi_rel: f64, cfg: &ControllerConfig) -> Result<f64, DomainError> {
    if !psi_rel.is_finite() {
        return Err(DomainError::NonFinite);
    }
    let a = psi_rel.abs();
    if a >= FRAC_PI_2 {
        return Err(DomainError::SteeringAngle(psi_rel));
    }
    let r_v = cfg.r_v;
    let leg = r_v / a.cos();
    let base = 2.0 * r_v * a.tan();
    let s = (2.0 * leg + base) / 2.0;
    let inradius = ((s - leg).powi(2) * (s - base) / s).sqrt();
    Ok(r_v / cfg.mu_r + inradius)
}

/// Normal-curvature input `gamma_s = 1 / R_i`.
pub fn gamma_input(psi_rel: f64, cfg: &ControllerConfig) -> Result<f64, DomainError> {
    incircle_radius(psi_rel, cfg).map(|r| 1.0 / r)
}

/// Spherical cap area `R_v^2 |psi_cmd - psi|` encoding the heading error.
pub fn cap_area(psi_cmd: f64, psi_vehicle: f64, r_v: f64) -> Result<f64, DomainError> {
    let d = psi_cmd - psi_vehicle;
    if !d.is_finite() {
        return Err(DomainError::NonFinite);
    }
    if d.abs() >= FRAC_PI_2 {
        return Err(DomainError::HeadingDifference(d));
    }
    Ok(r_v * r_v * d.abs())
}

/// Projection angle of a cap of area `s_c` on a sphere of radius `r_v`.
pub fn projection_angle(s_c: f64, r_v: f64) -> Result<f64, DomainError> {
    if !s_c.is_finite() {
        return Err(DomainError::NonFinite);
    }
    let h = s_c / (2.0 * PI * r_v);
    let radicand = s_c / PI - h * h;
    if s_c < 0.0 || radicand < 0.0 {
        return Err(DomainError::CapArea(s_c));
    }
    let base_diameter = 2.0 * radicand.sqrt();
    Ok(2.0 * (base_diameter / (2.0 * r_v)).atan())
}

/// Geodesic-curvature input `alpha_s = sign(dpsi) tan(zeta) / R_i`.
pub fn alpha_input(
    psi_cmd: f64,
    psi_vehicle: f64,
    psi_rel: f64,
    cfg: &ControllerConfig,
) -> Result<f64, DomainError> {
    let s_c = cap_area(psi_cmd, psi_vehicle, cfg.r_v)?;
    let zeta = projection_angle(s_c, cfg.r_v)?;
    let r_i = incircle_radius(psi_rel, cfg)?;
    let magnitude = zeta.tan() / r_i;
    let d = psi_cmd - psi_vehicle;
    Ok(if d < 0.0 { -magnitude } else { magnitude })
}

/// Arc-length difference `lambda_s`: the user speed, decayed with time
/// scale `T` once the previous vehicle speed exceeds `v_c`.
pub fn arc_length_rate(v_cmd_in: f64, v_prev: f64, cfg: &ControllerConfig) -> f64 {
    let v_c = cfg.critical_velocity();
    if v_prev <= v_c {
        v_cmd_in
    } else {
        v_cmd_in * (-(v_prev - v_c) / cfg.time_scale).exp()
    }
}

/// Rolling rate `delta = lambda_s / lambda_t`.
pub fn rolling_rate(lambda_s: f64, cfg: &ControllerConfig) -> f64 {
    lambda_s / cfg.lambda_t
}

pub fn controller_command(inputs: ArcLengthInputs, cfg: &ControllerConfig) -> ControllerCommand {
    ControllerCommand {
        u_v_c: inputs.delta * (1.0 + cfg.r_v * inputs.gamma_s),
        u_omega_c: inputs.delta * inputs.alpha_s,
    }
}

/// Shared-control blend `(u_u + (n - 1) u_c) / n`. `n = 1` returns the
/// user command unchanged.
pub fn blend(user: UserCommand, ctrl: ControllerCommand, n: u32) -> BlendedCommand {
    if n <= 1 {
        return BlendedCommand {
            u_v: user.u_v_u,
            u_omega: user.u_omega_u,
        };
    }
    let nf = n as f64;
    let w = nf - 1.0;
    BlendedCommand {
        u_v: (user.u_v_u + w * ctrl.u_v_c) / nf,
        u_omega: (user.u_omega_u + w * ctrl.u_omega_c) / nf,
    }
}

/// Upper bound of the controller contribution: the stability inequality's
/// left side evaluated at the extreme curvature inputs, i.e. the smallest
/// incircle radius `R_v / mu_r` and the supremum of the projection angle
/// over `|dpsi| < pi/2`.
pub fn stability_bound_lhs(delta: f64, cfg: &ControllerConfig) -> f64 {
    let r_i_min = cfg.r_v / cfg.mu_r;
    let zeta_max = max_projection_angle(cfg.r_v);
    let gamma_max = 1.0 / r_i_min;
    let alpha_max = zeta_max.tan() / r_i_min;
    let one_minus_m = 1.0 - cfg.m();
    one_minus_m * one_minus_m * delta * delta * ((1.0 + cfg.r_v * gamma_max).powi(2) + alpha_max.powi(2))
}

/// Supremum of the projection angle on the admissible heading-difference
/// domain (attained only in the limit `|dpsi| -> pi/2`).
pub fn max_projection_angle(r_v: f64) -> f64 {
    projection_angle(r_v * r_v * FRAC_PI_2, r_v).expect("limit cap area is admissible")
}

pub fn evaluate_monitors(
    user: UserCommand,
    ctrl: ControllerCommand,
    state: &MonitorState,
    cfg: &ControllerConfig,
    bounds: &SafetyBoundConfig,
) -> MonitorReport {
    let blended = blend(user, ctrl, cfg.n);
    let heading_step = blended.u_omega * state.dt;
    let one_minus_m = 1.0 - cfg.m();
    let ctrl_sq = ctrl.u_v_c * ctrl.u_v_c + ctrl.u_omega_c * ctrl.u_omega_c;
    let user_sq = user.u_v_u * user.u_v_u + user.u_omega_u * user.u_omega_u;
    MonitorReport::from_values(MonitorValues {
        velocity_lhs: blended.u_v.abs(),
        velocity_rhs: state.v_v.abs(),
        steering_lhs: (state.omega_integral + heading_step).abs(),
        steering_rhs: (state.psi + heading_step).abs(),
        stability_lhs: one_minus_m * one_minus_m * ctrl_sq,
        stability_rhs: bounds.gain_squared() * user_sq,
    })
}

/// Maps the raw joystick pair to the user command: speed clamped to
/// `[0, v_m]` and scaled by `c`; turn rate proportional to the clamped
/// heading difference.
pub fn user_command(raw: RawUserInput, psi: f64, cfg: &ControllerConfig) -> UserCommand {
    let v = clamp_speed(raw.v_cmd, cfg.v_m);
    let rel = clamp_steer(raw.psi_cmd - psi);
    UserCommand {
        u_v_u: (cfg.c * v).min(cfg.v_m),
        u_omega_u: cfg.c_psi * rel,
    }
}

fn clamp_speed(v: f64, v_m: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, v_m)
    }
}

/// Clamps a relative steering angle to `[-STEER_LIMIT, STEER_LIMIT]`;
/// NaN maps to 0.
pub fn clamp_steer(a: f64) -> f64 {
    if a.is_nan() {
        0.0
    } else {
        a.clamp(-STEER_LIMIT, STEER_LIMIT)
    }
}

/// Everything one controller evaluation produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssistOutput {
    pub user: UserCommand,
    pub ctrl: ControllerCommand,
    pub blended: BlendedCommand,
    pub inputs: ArcLengthInputs,
    pub monitors: MonitorReport,
    /// Set when the controller contribution was dropped for this tick.
    pub degraded: Option<DomainError>,
}

/// One full controller evaluation: clamp the raw input, derive the
/// arc-length inputs, form `u_c`, blend with `u_u` and evaluate the
/// monitors. Out-of-domain heading differences zero the controller
/// contribution for the tick instead of failing.
pub fn assist_step(
    raw: RawUserInput,
    state: &MonitorState,
    v_prev: f64,
    cfg: &ControllerConfig,
    bounds: &SafetyBoundConfig,
) -> AssistOutput {
    let user = user_command(raw, state.psi, cfg);
    let rel = clamp_steer(raw.psi_cmd - state.psi);

    let derived = (|| -> Result<ArcLengthInputs, DomainError> {
        if !raw.v_cmd.is_finite() || !state.psi.is_finite() || !v_prev.is_finite() {
            return Err(DomainError::NonFinite);
        }
        let gamma_s = gamma_input(rel, cfg)?;
        let alpha_s = alpha_input(raw.psi_cmd, state.psi, rel, cfg)?;
        let lambda_s = arc_length_rate(user.u_v_u, v_prev, cfg);
        Ok(ArcLengthInputs {
            alpha_s,
            gamma_s,
            delta: rolling_rate(lambda_s, cfg),
        })
    })();

    let (inputs, ctrl, degraded) = match derived {
        Ok(inputs) => (inputs, controller_command(inputs, cfg), None),
        Err(e) => (ArcLengthInputs::default(), ControllerCommand::default(), Some(e)),
    };

    let mut blended = blend(user, ctrl, cfg.n);
    blended.u_v = blended.u_v.min(cfg.v_m);
    let monitors = evaluate_monitors(user, ctrl, state, cfg, bounds);

    AssistOutput {
        user,
        ctrl,
        blended,
        inputs,
        monitors,
        degraded,
    }
}
