//! Plant, reference routes, scripted driver, metrics and the closed loop.

pub mod driver;
pub mod metrics;
pub mod route;
pub mod runner;
pub mod vehicle;

pub use driver::{DriverConfig, ScriptedDriver};
pub use metrics::{compute_metrics, TrajectoryMetrics};
pub use route::{make_route, Point2, Route, RouteKind};
pub use runner::{replay, route_start, run_closed_loop, ClosedLoop, LoopState, SimError, DEFAULT_DT};
pub use vehicle::{step, unicycle_derivative, wheel_decompose, wheel_mix, VehicleParams, VehiclePose, WheelCommand};
