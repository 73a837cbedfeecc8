//! Scripted human surrogate.
//!
//! A delayed, noisy pure-pursuit driver: the heading command is the bearing
//! to a lookahead point on the route plus Gaussian jitter, the speed command
//! is a constant fraction of `v_m` plus jitter. When the heading error grows
//! past `release_angle` the driver lets go of the throttle and only pushes
//! it again once the error has dropped below `reengage_angle`, the way a
//! startled joystick user does. Decisions reach the joystick
//! `reaction_delay` ticks after they are made.

use crate::controller::{clamp_steer, RawUserInput};
use crate::geometry::wrap_angle;
use crate::sim::route::{Point2, Route};
use crate::sim::vehicle::VehiclePose;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// How far ahead of the last progress index the nearest-point search looks.
const SEARCH_WINDOW: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverConfig {
    /// Lookahead distance along the route (m).
    pub lookahead: f64,
    /// Ticks between a decision and the joystick output.
    pub reaction_delay: usize,
    /// Standard deviation of heading jitter (rad).
    pub heading_noise: f64,
    /// Standard deviation of speed jitter as a fraction of `v_m`.
    pub speed_noise: f64,
    /// Target speed as a fraction of `v_m`.
    pub speed_fraction: f64,
    /// Heading error that makes the driver release the throttle (rad).
    pub release_angle: f64,
    /// Heading error below which the throttle is pushed again (rad).
    pub reengage_angle: f64,
    pub seed: u64,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self {
            lookahead: 1.5,
            reaction_delay: 10,
            heading_noise: 0.15,
            speed_noise: 0.05,
            speed_fraction: 1.0,
            release_angle: 1.0,
            reengage_angle: 0.35,
            seed: 0,
        }
    }
}

impl DriverConfig {
    /// Noise-free, instant-reaction variant.
    pub fn ideal(lookahead: f64) -> Self {
        Self {
            lookahead,
            reaction_delay: 0,
            heading_noise: 0.0,
            speed_noise: 0.0,
            release_angle: 4.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScriptedDriver {
    pub config: DriverConfig,
    rng: ChaCha8Rng,
    progress: usize,
    released: bool,
    pending: VecDeque<RawUserInput>,
}

impl ScriptedDriver {
    pub fn new(config: DriverConfig) -> Self {
        assert!(config.lookahead > 0.0, "lookahead must be positive");
        Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            progress: 0,
            released: false,
            pending: VecDeque::with_capacity(config.reaction_delay + 1),
        }
    }

    pub fn progress(&self) -> usize {
        self.progress
    }

    fn gaussian(&mut self, std_dev: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        z * std_dev
    }

    /// Produces the joystick input for this tick.
    pub fn drive_tick(&mut self, pose: &VehiclePose, route: &Route, v_m: f64) -> RawUserInput {
        let cfg = self.config;
        // Draw unconditionally so the noise stream does not depend on state.
        let heading_jitter = self.gaussian(cfg.heading_noise);
        let speed_jitter = self.gaussian(cfg.speed_noise);

        let here = Point2::new(pose.x, pose.y);
        self.progress = route.nearest_ahead(here, self.progress, SEARCH_WINDOW);
        let target = route.walk(self.progress, cfg.lookahead);
        let error = if target == here {
            0.0
        } else {
            wrap_angle((target.y - here.y).atan2(target.x - here.x) - pose.psi)
        };

        if self.released && error.abs() < cfg.reengage_angle {
            self.released = false;
        } else if !self.released && error.abs() > cfg.release_angle {
            self.released = true;
        }

        let at_end = route.is_end(self.progress) || (!route.closed && here.dist(target) < 0.1);
        let v_cmd = if self.released || at_end {
            0.0
        } else {
            ((cfg.speed_fraction + speed_jitter) * v_m).clamp(0.0, v_m)
        };
        let decision = RawUserInput {
            v_cmd,
            psi_cmd: pose.psi + clamp_steer(error + heading_jitter),
        };

        self.pending.push_back(decision);
        if self.pending.len() > cfg.reaction_delay {
            self.pending.pop_front().expect("queue is non-empty")
        } else {
            RawUserInput {
                v_cmd: 0.0,
                psi_cmd: pose.psi,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::STEER_LIMIT;

    fn straight() -> Route {
        Route::from_waypoints(&[Point2::new(0.0, 0.0), Point2::new(20.0, 0.0)], false).unwrap()
    }

    #[test]
    fn on_route_heading_at_target_keeps_heading() {
        let mut d = ScriptedDriver::new(DriverConfig::ideal(1.0));
        let pose = VehiclePose::new(0.0, 0.0, 0.0);
        let raw = d.drive_tick(&pose, &straight(), 2.0);
        assert_eq!(raw.psi_cmd, pose.psi);
        assert_eq!(raw.v_cmd, 2.0);
    }

    #[test]
    fn target_to_the_left_saturates() {
        let mut d = ScriptedDriver::new(DriverConfig::ideal(1.0));
        // Facing -y while the route runs along +x: target is 90 degrees left.
        let pose = VehiclePose::new(0.0, 0.0, -std::f64::consts::FRAC_PI_2);
        let route =
            Route::from_waypoints(&[Point2::new(0.0, 0.0), Point2::new(0.0, 0.0001), Point2::new(20.0, 0.0001)], false)
                .unwrap();
        let raw = d.drive_tick(&pose, &route, 2.0);
        assert!((raw.psi_cmd - (pose.psi + STEER_LIMIT)).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_inputs() {
        let route = straight();
        let cfg = DriverConfig {
            seed: 42,
            reaction_delay: 3,
            ..DriverConfig::default()
        };
        let run = || {
            let mut d = ScriptedDriver::new(cfg);
            (0..50)
                .map(|k| d.drive_tick(&VehiclePose::new(0.1 * k as f64, 0.05, 0.01), &route, 3.0))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
        let other = {
            let mut d = ScriptedDriver::new(DriverConfig { seed: 43, ..cfg });
            d.drive_tick(&VehiclePose::default(), &route, 3.0);
            d.drive_tick(&VehiclePose::default(), &route, 3.0);
            d.drive_tick(&VehiclePose::default(), &route, 3.0);
            d.drive_tick(&VehiclePose::default(), &route, 3.0)
        };
        assert_ne!(run()[3], other);
    }

    #[test]
    fn reaction_delay_holds_back_output() {
        let mut d = ScriptedDriver::new(DriverConfig {
            reaction_delay: 2,
            ..DriverConfig::ideal(1.0)
        });
        let pose = VehiclePose::default();
        assert_eq!(d.drive_tick(&pose, &straight(), 2.0).v_cmd, 0.0);
        assert_eq!(d.drive_tick(&pose, &straight(), 2.0).v_cmd, 0.0);
        assert_eq!(d.drive_tick(&pose, &straight(), 2.0).v_cmd, 2.0);
    }

    #[test]
    fn releases_throttle_on_large_error() {
        let mut d = ScriptedDriver::new(DriverConfig {
            release_angle: 1.0,
            reengage_angle: 0.3,
            ..DriverConfig::ideal(1.0)
        });
        let route = straight();
        let facing_away = VehiclePose::new(0.0, 0.0, 2.0);
        assert_eq!(d.drive_tick(&facing_away, &route, 2.0).v_cmd, 0.0);
        // Still inside the hysteresis band.
        assert_eq!(d.drive_tick(&VehiclePose::new(0.0, 0.0, 0.5), &route, 2.0).v_cmd, 0.0);
        assert_eq!(d.drive_tick(&VehiclePose::new(0.0, 0.0, 0.1), &route, 2.0).v_cmd, 2.0);
    }

    #[test]
    fn outputs_stay_in_domain() {
        let route = straight();
        let mut d = ScriptedDriver::new(DriverConfig {
            heading_noise: 3.0,
            speed_noise: 2.0,
            reaction_delay: 0,
            ..DriverConfig::default()
        });
        for k in 0..500 {
            let pose = VehiclePose::new(0.01 * k as f64, 0.0, 0.0);
            let raw = d.drive_tick(&pose, &route, 3.0);
            assert!((0.0..=3.0).contains(&raw.v_cmd));
            assert!((raw.psi_cmd - pose.psi).abs() <= STEER_LIMIT);
        }
    }
}
