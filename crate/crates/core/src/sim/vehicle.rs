//! Differential-drive plant: unicycle kinematics and wheel mixing.

use crate::controller::BlendedCommand;
use serde::{Deserialize, Serialize};

/// Planar pose. `psi` is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehiclePose {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl VehiclePose {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self { x, y, psi }
    }
}

/// Time derivative of a pose.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseRate {
    pub x_dot: f64,
    pub y_dot: f64,
    pub psi_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Wheel separation (m).
    pub l: f64,
    /// Wheel radius (m).
    pub wheel_radius: f64,
    /// Maximum speed (m/s).
    pub v_m: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            l: 0.5,
            wheel_radius: 0.133,
            v_m: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelCommand {
    pub u_r: f64,
    pub u_l: f64,
}

pub fn unicycle_derivative(pose: &VehiclePose, cmd: &BlendedCommand) -> PoseRate {
    let (s, c) = pose.psi.sin_cos();
    PoseRate {
        x_dot: c * cmd.u_v,
        y_dot: s * cmd.u_v,
        psi_dot: cmd.u_omega,
    }
}

/// Exact update for a command held constant over `dt`: a straight segment
/// when `u_omega = 0`, otherwise a circular arc of radius `u_v / u_omega`.
///
/// Written with the half-angle identity
/// `sin(a + t) - sin(a) = 2 cos(a + t/2) sin(t/2)` so that it stays accurate
/// as the turn rate goes to zero.
pub fn step(pose: &VehiclePose, cmd: &BlendedCommand, dt: f64) -> VehiclePose {
    let turn = cmd.u_omega * dt;
    let half = 0.5 * turn;
    let sinc = if half == 0.0 { 1.0 } else { half.sin() / half };
    let chord = cmd.u_v * dt * sinc;
    let (s, c) = (pose.psi + half).sin_cos();
    VehiclePose {
        x: pose.x + chord * c,
        y: pose.y + chord * s,
        psi: pose.psi + turn,
    }
}

/// Wheel inputs to body velocities, `[1/2 1/2; 1/l -1/l]`.
pub fn wheel_mix(w: &WheelCommand, p: &VehicleParams) -> (f64, f64) {
    ((w.u_r + w.u_l) / 2.0, (w.u_r - w.u_l) / p.l)
}

pub fn wheel_decompose(u_v: f64, u_omega: f64, p: &VehicleParams) -> WheelCommand {
    let half = u_omega * p.l / 2.0;
    WheelCommand {
        u_r: u_v + half,
        u_l: u_v - half,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cmd(u_v: f64, u_omega: f64) -> BlendedCommand {
        BlendedCommand { u_v, u_omega }
    }

    #[test]
    fn derivative_examples() {
        let r = unicycle_derivative(&VehiclePose::default(), &cmd(1.0, 0.0));
        assert_eq!((r.x_dot, r.y_dot, r.psi_dot), (1.0, 0.0, 0.0));
        let r = unicycle_derivative(&VehiclePose::new(0.0, 0.0, FRAC_PI_2), &cmd(2.0, 0.5));
        assert!(r.x_dot.abs() < 1e-15);
        assert_relative_eq!(r.y_dot, 2.0);
        assert_eq!(r.psi_dot, 0.5);
        let r = unicycle_derivative(&VehiclePose::new(1.0, 2.0, 0.3), &cmd(0.0, 0.7));
        assert_eq!((r.x_dot, r.y_dot, r.psi_dot), (0.0, 0.0, 0.7));
    }

    #[test]
    fn straight_step() {
        let p = step(&VehiclePose::default(), &cmd(1.0, 0.0), 1.0);
        assert_eq!(p, VehiclePose::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn quarter_arc() {
        let p = step(&VehiclePose::default(), &cmd(1.0, 1.0), FRAC_PI_2);
        assert_relative_eq!(p.x, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.y, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.psi, FRAC_PI_2);
    }

    #[test]
    fn full_circle_closes() {
        let start = VehiclePose::new(0.3, -1.2, 0.4);
        let omega = 0.8;
        let p = step(&start, &cmd(1.5, omega), 2.0 * PI / omega);
        assert!((p.x - start.x).abs() < 1e-12);
        assert!((p.y - start.y).abs() < 1e-12);
        assert_relative_eq!(p.psi, start.psi + 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn half_steps_match_full_step() {
        let start = VehiclePose::new(1.0, 2.0, -0.7);
        for &(v, w) in &[(1.0, 0.5), (2.5, -1.3), (0.4, 1e-9)] {
            let full = step(&start, &cmd(v, w), 0.02);
            let half = step(&step(&start, &cmd(v, w), 0.01), &cmd(v, w), 0.01);
            assert!((full.x - half.x).abs() < 1e-12);
            assert!((full.y - half.y).abs() < 1e-12);
            assert!((full.psi - half.psi).abs() < 1e-12);
        }
    }

    #[test]
    fn wheel_mix_examples() {
        let p = VehicleParams::default();
        assert_eq!(wheel_mix(&WheelCommand { u_r: 0.7, u_l: 0.7 }, &p), (0.7, 0.0));
        assert_eq!(wheel_mix(&WheelCommand { u_r: 0.7, u_l: -0.7 }, &p), (0.0, 2.8));
        assert_eq!(wheel_mix(&WheelCommand { u_r: 1.0, u_l: 0.0 }, &p), (0.5, 2.0));
    }

    #[test]
    fn wheel_decompose_examples() {
        let p = VehicleParams::default();
        assert_eq!(wheel_decompose(0.7, 0.0, &p), WheelCommand { u_r: 0.7, u_l: 0.7 });
        assert_eq!(wheel_decompose(0.5, 2.0, &p), WheelCommand { u_r: 1.0, u_l: 0.0 });
        assert_eq!(wheel_decompose(0.0, 2.8, &p), WheelCommand { u_r: 0.7, u_l: -0.7 });
    }
}
