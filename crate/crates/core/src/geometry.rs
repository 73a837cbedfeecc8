//! Darboux-frame kinematics of a virtual wheel rolling on a plane.
//!
//! The frame `(e1, e2, e3)` rides the contact point: `e1` is tangent to the
//! traversed path, `e3` is the plane normal and `e2 = e3 × e1`. Vectors
//! returned by [`contact_angular_velocity`] and [`contact_linear_velocity`]
//! are expressed in those frame coordinates.
//!
//! Two sign conventions for the normal-curvature input coexist:
//! [`compose_curvatures`] subtracts `gamma_s` from the wheel's normal
//! curvature, while the contact velocities (and the controller built on
//! them) add it. Both are implemented as stated; everything downstream of
//! this module uses the additive form.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Plain 3-vector used for frame bases and contact velocities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Orthonormal right-handed frame at the contact point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarbouxBasis {
    /// Tangent along the path.
    pub e1: Vec3,
    pub e2: Vec3,
    /// Plane normal.
    pub e3: Vec3,
}

impl DarbouxBasis {
    /// Maps frame coordinates `(c1, c2, c3)` to the inertial frame.
    pub fn to_inertial(&self, local: Vec3) -> Vec3 {
        self.e1 * local.x + self.e2 * local.y + self.e3 * local.z
    }
}

/// Geodesic curvature, normal curvature and geodesic torsion of a surface
/// curve, all in 1/m.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SurfaceCurvatures {
    pub k_g: f64,
    pub k_n: f64,
    pub tau_g: f64,
}

impl SurfaceCurvatures {
    /// A flat plane: all curvatures vanish.
    pub const PLANE: SurfaceCurvatures = SurfaceCurvatures {
        k_g: 0.0,
        k_n: 0.0,
        tau_g: 0.0,
    };

    /// A disc of the given radius rolling upright: only `k_n = 1/radius`.
    pub fn wheel(radius: f64) -> Self {
        Self {
            k_g: 0.0,
            k_n: 1.0 / radius,
            tau_g: 0.0,
        }
    }
}

/// The virtual rolling disc placed at the vehicle centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualWheel {
    pub radius: f64,
    /// Accumulated rotation angle (rad). Only used for telemetry.
    pub theta: f64,
}

impl VirtualWheel {
    pub fn new(radius: f64) -> Self {
        assert!(radius > 0.0, "virtual wheel radius must be positive");
        Self { radius, theta: 0.0 }
    }

    /// Advances `theta` by the arc length rolled in `dt` at rolling rate `delta`.
    pub fn roll(&mut self, delta: f64, dt: f64) {
        self.theta += delta * dt / self.radius;
    }
}

/// Arc-length-domain controller inputs: the two virtual-surface curvatures
/// and the rolling rate `delta = ds/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ArcLengthInputs {
    pub alpha_s: f64,
    pub gamma_s: f64,
    pub delta: f64,
}

impl ArcLengthInputs {
    pub fn is_finite(&self) -> bool {
        self.alpha_s.is_finite() && self.gamma_s.is_finite() && self.delta.is_finite()
    }
}

/// Relative curvatures between the wheel and the fixed surface with the
/// virtual surface sandwiched in between.
pub fn compose_curvatures(
    wheel: SurfaceCurvatures,
    plane: SurfaceCurvatures,
    inputs: ArcLengthInputs,
) -> SurfaceCurvatures {
    SurfaceCurvatures {
        k_g: wheel.k_g - plane.k_g - inputs.alpha_s,
        k_n: wheel.k_n - plane.k_n - inputs.gamma_s,
        tau_g: wheel.tau_g - plane.tau_g,
    }
}

/// Angular velocity of the virtual wheel at the contact point, in frame
/// coordinates. The `e1` component is identically zero.
pub fn contact_angular_velocity(inputs: ArcLengthInputs, wheel: &VirtualWheel) -> Vec3 {
    let d = inputs.delta;
    Vec3::new(
        0.0,
        d * (1.0 / wheel.radius + inputs.gamma_s),
        d * inputs.alpha_s,
    )
}

/// Linear velocity of the contact point, `omega_p × (R_v e3)`, in frame
/// coordinates. Always along `e1`.
pub fn contact_linear_velocity(inputs: ArcLengthInputs, wheel: &VirtualWheel) -> Vec3 {
    Vec3::new(
        inputs.delta * (1.0 + wheel.radius * inputs.gamma_s),
        0.0,
        0.0,
    )
}

/// Planar Darboux basis for a vehicle heading `psi`.
pub fn basis_from_heading(psi: f64) -> DarbouxBasis {
    let (s, c) = psi.sin_cos();
    DarbouxBasis {
        e1: Vec3::new(c, s, 0.0),
        e2: Vec3::new(-s, c, 0.0),
        e3: Vec3::new(0.0, 0.0, 1.0),
    }
}

/// Wraps an angle into `(-pi, pi]`. Presentation only; kinematics keep
/// headings unwrapped.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}
