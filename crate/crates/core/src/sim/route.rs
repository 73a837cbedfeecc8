//! Reference routes sampled as dense polylines.

use serde::{Deserialize, Serialize};
use std::f64::consts::{SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Upper bound on the distance between consecutive route samples (m).
pub const MAX_SPACING: f64 = 0.05;
const TARGET_SPACING: f64 = 0.04;

#[derive(Debug, Error, PartialEq)]
pub enum RouteError {
    #[error("route scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("a route needs at least two distinct finite points")]
    TooShort,
    #[error("unknown route kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteKind {
    #[serde(rename = "figure8")]
    FigureEight,
    Spiral,
    Custom,
}

impl fmt::Display for RouteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RouteKind::FigureEight => "figure8",
            RouteKind::Spiral => "spiral",
            RouteKind::Custom => "custom",
        })
    }
}

impl FromStr for RouteKind {
    type Err = RouteError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "figure8" | "figure-eight" => Ok(RouteKind::FigureEight),
            "spiral" => Ok(RouteKind::Spiral),
            "custom" => Ok(RouteKind::Custom),
            other => Err(RouteError::UnknownKind(other.into())),
        }
    }
}

impl RouteKind {
    pub fn default_scale(self) -> f64 {
        match self {
            RouteKind::FigureEight => 5.0,
            RouteKind::Spiral => 16.0,
            RouteKind::Custom => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

/// Distance from `p` to the segment `a`-`b`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len_sq = dx * dx + dy * dy;
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq).clamp(0.0, 1.0);
    p.dist(Point2::new(a.x + t * dx, a.y + t * dy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub kind: RouteKind,
    pub scale: f64,
    pub closed: bool,
    /// Corner waypoints for polyline routes; empty for smooth curves.
    pub vertices: Vec<Point2>,
    /// Dense samples. Closed routes do not repeat the first point.
    pub points: Vec<Point2>,
}

impl Route {
    /// Gerono lemniscate `x = a sin t`, `y = a sin t cos t`, closed.
    pub fn figure_eight(a: f64) -> Result<Self, RouteError> {
        check_scale(a)?;
        // |r'(t)| <= a sqrt(2), so this step bounds every chord.
        // Even count so t = pi (the crossing) is sampled.
        let n = 2 * ((TAU * a * SQRT_2) / (2.0 * TARGET_SPACING)).ceil() as usize;
        let points = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                Point2::new(a * t.sin(), a * t.sin() * t.cos())
            })
            .collect();
        Ok(Self {
            kind: RouteKind::FigureEight,
            scale: a,
            closed: true,
            vertices: Vec::new(),
            points,
        })
    }

    /// Inward rectangular spiral with `4 * turns + 1` straight sides and a
    /// right-angle corner between consecutive sides. Side lengths shrink by
    /// `side / (2 turns + 1)` every second side.
    pub fn sharp_spiral(side: f64, turns: usize) -> Result<Self, RouteError> {
        check_scale(side)?;
        if turns == 0 {
            return Err(RouteError::TooShort);
        }
        let sides = 4 * turns + 1;
        let shrink = side / (2 * turns + 1) as f64;
        let dirs = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        let mut vertices = vec![Point2::new(0.0, 0.0)];
        let mut cur = Point2::new(0.0, 0.0);
        for i in 0..sides {
            let len = side - (i / 2) as f64 * shrink;
            let (dx, dy) = dirs[i % 4];
            cur = Point2::new(cur.x + dx * len, cur.y + dy * len);
            vertices.push(cur);
        }
        let mut route = Self::from_waypoints(&vertices, false)?;
        route.kind = RouteKind::Spiral;
        route.scale = side;
        Ok(route)
    }

    /// Polyline through the given waypoints, resampled to the spacing bound.
    pub fn from_waypoints(waypoints: &[Point2], closed: bool) -> Result<Self, RouteError> {
        if waypoints.len() < 2
            || waypoints.iter().any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(RouteError::TooShort);
        }
        let mut legs: Vec<(Point2, Point2)> = waypoints.windows(2).map(|w| (w[0], w[1])).collect();
        if closed {
            legs.push((waypoints[waypoints.len() - 1], waypoints[0]));
        }
        let mut points = Vec::new();
        for (a, b) in legs {
            let len = a.dist(b);
            let pieces = ((len / TARGET_SPACING).ceil() as usize).max(1);
            for k in 0..pieces {
                let t = k as f64 / pieces as f64;
                points.push(Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
            }
        }
        if !closed {
            points.push(waypoints[waypoints.len() - 1]);
        }
        points.dedup();
        if points.len() < 2 {
            return Err(RouteError::TooShort);
        }
        Ok(Self {
            kind: RouteKind::Custom,
            scale: 1.0,
            closed,
            vertices: waypoints.to_vec(),
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of segments, including the closing one for closed routes.
    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        }
    }

    pub fn segment(&self, i: usize) -> (Point2, Point2) {
        let n = self.points.len();
        (self.points[i % n], self.points[(i + 1) % n])
    }

    pub fn start_heading(&self) -> f64 {
        let (a, b) = self.segment(0);
        (b.y - a.y).atan2(b.x - a.x)
    }

    /// Shortest distance from `p` to the polyline.
    pub fn distance_to(&self, p: Point2) -> f64 {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                point_segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the sample nearest to `p` among the `window` samples that
    /// follow `from` (wrapping on closed routes).
    pub fn nearest_ahead(&self, p: Point2, from: usize, window: usize) -> usize {
        let n = self.points.len();
        let mut best = (from % n, f64::INFINITY);
        for k in 0..=window {
            let i = if self.closed {
                (from + k) % n
            } else if from + k < n {
                from + k
            } else {
                break;
            };
            let d = p.dist(self.points[i]);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    /// Walks `distance` metres forward along the samples from `index`;
    /// open routes stop at their last point.
    pub fn walk(&self, index: usize, distance: f64) -> Point2 {
        let n = self.points.len();
        let mut i = index % n;
        let mut left = distance;
        loop {
            let next = if self.closed {
                (i + 1) % n
            } else if i + 1 < n {
                i + 1
            } else {
                return self.points[i];
            };
            let step = self.points[i].dist(self.points[next]);
            if step >= left {
                let t = if step > 0.0 { left / step } else { 0.0 };
                let (a, b) = (self.points[i], self.points[next]);
                return Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
            }
            left -= step;
            i = next;
        }
    }

    pub fn is_end(&self, index: usize) -> bool {
        !self.closed && index + 1 >= self.points.len()
    }
}

fn check_scale(s: f64) -> Result<(), RouteError> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(RouteError::BadScale(s))
    }
}

/// Builds one of the named reference routes. Spirals use four turns.
pub fn make_route(kind: RouteKind, scale: f64) -> Result<Route, RouteError> {
    match kind {
        RouteKind::FigureEight => Route::figure_eight(scale),
        RouteKind::Spiral => Route::sharp_spiral(scale, 4),
        RouteKind::Custom => Err(RouteError::UnknownKind(
            "custom routes are built from waypoints".into(),
        )),
    }
}
