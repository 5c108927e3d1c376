//! Planar geometry and run configuration shared by every simulator.
//!
//! Discrete-world quantities are in SI units (metres, seconds). The continuum
//! solver uses nondimensional lengths but the same [`Vec2`].

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// A point or displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `theta` from the x axis: the heading `p̂`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2 { x: c, y: s }
    }

    /// Left-hand normal of the heading `theta`: `n̂ = (-sin θ, cos θ)`.
    pub fn normal(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2 { x: -s, y: c }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the planar cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotate counter-clockwise by `phi`.
    pub fn rotate(self, phi: f64) -> Vec2 {
        let (s, c) = phi.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = theta.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Axis-aligned rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    /// Rectangle of the given size centred inside `outer`.
    pub fn centered_in(outer: &Rect, width: f64, height: f64) -> Self {
        let c = outer.center();
        Rect::new(
            Vec2::new(c.x - width / 2.0, c.y - height / 2.0),
            Vec2::new(c.x + width / 2.0, c.y + height / 2.0),
        )
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x < self.max.x && p.y >= self.min.y && p.y < self.max.y
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.min.x >= self.min.x
            && other.min.y >= self.min.y
            && other.max.x <= self.max.x
            && other.max.y <= self.max.y
    }
}

/// How the domain edges behave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Torus: leaving one edge re-enters through the opposite one.
    Periodic,
    /// Solid walls; the world module handles the collision response.
    Walls,
}

/// Time stepping and domain of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub total_time: f64,
    pub width: f64,
    pub height: f64,
    pub boundary: Boundary,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", "must be positive"));
        }
        if !(self.total_time >= self.dt) {
            return Err(Error::config("total_time", "must be at least dt"));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::config("width", "must be positive"));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::config("height", "must be positive"));
        }
        Ok(())
    }

    pub fn domain(&self) -> Rect {
        Rect::new(Vec2::ZERO, Vec2::new(self.width, self.height))
    }

    /// Arena crossing time `t_s = width / v_o`.
    pub fn crossing_time(&self, v_o: f64) -> f64 {
        self.width / v_o
    }

    pub fn steps(&self) -> usize {
        (self.total_time / self.dt).round() as usize
    }
}

/// Map `p` into the domain under periodic boundaries; walls mode is a
/// pass-through because the wall response belongs to the world module.
pub fn wrap_or_clamp(p: Vec2, cfg: &SimConfig) -> Vec2 {
    match cfg.boundary {
        Boundary::Periodic => Vec2::new(wrap_coord(p.x, cfg.width), wrap_coord(p.y, cfg.height)),
        Boundary::Walls => p,
    }
}

pub(crate) fn wrap_coord(v: f64, len: f64) -> f64 {
    let w = v.rem_euclid(len);
    // rem_euclid can return `len` itself for tiny negative inputs
    if w >= len {
        0.0
    } else {
        w
    }
}

/// Shortest displacement from `a` to `b` on a torus of the given size.
pub fn min_image(a: Vec2, b: Vec2, width: f64, height: f64) -> Vec2 {
    let mut d = b - a;
    d.x -= width * (d.x / width).round();
    d.y -= height * (d.y / height).round();
    d
}
