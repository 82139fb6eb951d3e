//! Points, vectors and lines in the affine plane.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point (or free vector) of the affine plane.
///
/// Serialized as a two-element array `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `theta` (radians).
    #[inline]
    pub fn polar(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    #[inline]
    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    /// Counterclockwise rotation by a right angle.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    #[inline]
    pub fn lerp(self, o: Point2, t: f64) -> Self {
        self + (o - self) * t
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point2 {
    #[inline]
    fn add_assign(&mut self, o: Point2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    #[inline]
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// The line `u x + v y + w = 0`, stored with `u² + v² = 1`.
///
/// Lines produced as supporting lines of a domain are oriented so that
/// `(u, v)` is the outward normal: the domain lies where `u x + v y + w < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line2 {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl Line2 {
    /// Normalizes `(u, v, w)`; `None` when `(u, v) = (0, 0)`.
    pub fn new(u: f64, v: f64, w: f64) -> Option<Self> {
        let n = u.hypot(v);
        (n > 0.0 && n.is_finite()).then(|| Self {
            u: u / n,
            v: v / n,
            w: w / n,
        })
    }

    /// Line through `p` with the given (not necessarily unit) normal.
    pub fn through(p: Point2, normal: Point2) -> Option<Self> {
        Self::new(normal.x, normal.y, -normal.dot(p))
    }

    #[inline]
    pub fn normal(&self) -> Point2 {
        Point2::new(self.u, self.v)
    }

    /// Signed Euclidean distance; negative on the domain side.
    #[inline]
    pub fn signed_distance(&self, p: Point2) -> f64 {
        self.u * p.x + self.v * p.y + self.w
    }

    #[inline]
    pub fn flipped(&self) -> Self {
        Self {
            u: -self.u,
            v: -self.v,
            w: -self.w,
        }
    }

    #[inline]
    pub fn coeffs(&self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    /// Distance between two oriented lines as coefficient vectors.
    pub fn coeff_distance(&self, o: &Line2) -> f64 {
        let d = [self.u - o.u, self.v - o.v, self.w - o.w];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// Sign function with `sign(0) = 0`.
#[inline]
pub(crate) fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
