//! Homographies of the projective plane acting on affine points.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::primitives::{Line2, Point2};
use crate::error::{Error, Result};

/// Nonsingular 3×3 matrix acting on homogeneous coordinates `(x, y, 1)`.
///
/// Serialized as a row-major `[[f64; 3]; 3]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct ProjectiveMap {
    m: Matrix3<f64>,
    inv: Matrix3<f64>,
}

impl ProjectiveMap {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularMap);
        }
        let scale = m.norm();
        if scale == 0.0 || m.determinant().abs() <= 1e-14 * scale.powi(3) {
            return Err(Error::SingularMap);
        }
        let inv = m.try_inverse().ok_or(Error::SingularMap)?;
        Ok(Self { m, inv })
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(Matrix3::from_fn(|i, j| rows[i][j]))
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
            inv: Matrix3::identity(),
        }
    }

    /// Affine map `x ↦ A x + t`, `A` given row-major.
    pub fn affine(a: [[f64; 2]; 2], t: [f64; 2]) -> Result<Self> {
        Self::from_rows([
            [a[0][0], a[0][1], t[0]],
            [a[1][0], a[1][1], t[1]],
            [0.0, 0.0, 1.0],
        ])
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.m;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn inverse(&self) -> Self {
        Self {
            m: self.inv,
            inv: self.m,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ProjectiveMap) -> Self {
        Self {
            m: self.m * other.m,
            inv: other.inv * self.inv,
        }
    }

    /// Image of `p`, or `None` when `p` is sent to the line at infinity.
    #[inline]
    pub fn apply(&self, p: Point2) -> Option<Point2> {
        dehomogenize(self.m * Vector3::new(p.x, p.y, 1.0))
    }

    #[inline]
    pub fn apply_inverse(&self, p: Point2) -> Option<Point2> {
        dehomogenize(self.inv * Vector3::new(p.x, p.y, 1.0))
    }

    /// Third homogeneous coordinate of the image of `p`; the map is defined
    /// where it is nonzero.
    #[inline]
    pub fn denominator(&self, p: Point2) -> f64 {
        self.m[(2, 0)] * p.x + self.m[(2, 1)] * p.y + self.m[(2, 2)]
    }

    /// The row of `self` producing the denominator, as the affine functional
    /// `(a, b, c)` with value `a x + b y + c`.
    pub fn denominator_row(&self) -> [f64; 3] {
        [self.m[(2, 0)], self.m[(2, 1)], self.m[(2, 2)]]
    }

    /// Image of a line: covectors transform by the inverse transpose.
    /// Orientation is preserved when the denominator is positive on the
    /// side of interest; callers re-orient as needed.
    pub fn apply_line(&self, l: &Line2) -> Option<Line2> {
        let c = self.inv.transpose() * Vector3::new(l.u, l.v, l.w);
        Line2::new(c[0], c[1], c[2])
    }

    /// Differential of the map at `p` applied to `v`.
    pub fn push_vector(&self, p: Point2, v: Point2) -> Option<Point2> {
        let hp = self.m * Vector3::new(p.x, p.y, 1.0);
        let hv = self.m * Vector3::new(v.x, v.y, 0.0);
        if hp[2] == 0.0 {
            return None;
        }
        let w2 = hp[2] * hp[2];
        Some(Point2::new(
            (hv[0] * hp[2] - hp[0] * hv[2]) / w2,
            (hv[1] * hp[2] - hp[1] * hv[2]) / w2,
        ))
    }

    /// Matrix scaled to unit Frobenius norm with a deterministic sign
    /// (largest-magnitude entry positive). Two maps are projectively equal
    /// iff their normalized matrices coincide.
    pub fn normalized_matrix(&self) -> Matrix3<f64> {
        normalize_matrix(&self.m)
    }

    /// Frobenius distance between normalized representatives.
    pub fn distance(&self, other: &ProjectiveMap) -> f64 {
        (self.normalized_matrix() - other.normalized_matrix()).norm()
    }
}

pub(crate) fn normalize_matrix(m: &Matrix3<f64>) -> Matrix3<f64> {
    let n = m.norm();
    let mut best = 0.0f64;
    for v in m.iter() {
        if v.abs() > best.abs() + 1e-12 {
            best = *v;
        }
    }
    let s = if best < 0.0 { -1.0 / n } else { 1.0 / n };
    m * s
}

#[inline]
fn dehomogenize(h: Vector3<f64>) -> Option<Point2> {
    if h[2] == 0.0 || !h[2].is_finite() {
        return None;
    }
    let p = Point2::new(h[0] / h[2], h[1] / h[2]);
    p.is_finite().then_some(p)
}

impl TryFrom<[[f64; 3]; 3]> for ProjectiveMap {
    type Error = Error;
    fn try_from(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<ProjectiveMap> for [[f64; 3]; 3] {
    fn from(h: ProjectiveMap) -> Self {
        h.rows()
    }
}
