//! Planar convex bodies with chord, supporting-line and projective queries.

mod primitives;
mod projective;
mod spec;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::Vector3;

pub use primitives::{Line2, Point2};
pub(crate) use primitives::sign0;
pub use projective::ProjectiveMap;
pub use spec::DomainSpec;

use crate::error::{Error, Result};

/// Boundary predicate tolerance accepted by [`ConvexDomain::supporting_line`].
pub const BOUNDARY_TOL: f64 = 1e-7;

const NEWTON_MAX_ITER: usize = 200;

/// The two boundary hits of the line through an interior point.
///
/// `t_minus`, `t_plus` are the Euclidean distances from the query point to
/// `p_minus`, `p_plus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub p_minus: Point2,
    pub p_plus: Point2,
    pub t_minus: f64,
    pub t_plus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipse {
    center: Point2,
    a: f64,
    b: f64,
    rotation: f64,
    cos: f64,
    sin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PBall {
    p: f64,
    center: Point2,
    scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
    edges: Vec<Line2>,
    cumulative: Vec<f64>,
    centroid: Point2,
}

/// `{ |x|^alpha < y < 1 }`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCap {
    alpha: f64,
}

/// Sublevel set `{ (Σ max(0, n_k·x)^p)^{1/p} < 1 }` of a smoothed regular
/// polygon gauge. Four sides recover the p-ball.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothPolygon {
    sides: usize,
    p: f64,
    center: Point2,
    scale: f64,
    rotation: f64,
    normals: Vec<Point2>,
}

/// Image `map(inner)` of a domain under a proper projective map.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveImage {
    inner: Arc<ConvexDomain>,
    map: ProjectiveMap,
    /// Sign of the map's denominator on the closure of `inner`.
    denom_sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexDomain {
    Ellipse(Ellipse),
    PBall(PBall),
    Polygon(Polygon),
    PowerCap(PowerCap),
    SmoothPolygon(SmoothPolygon),
    Projective(ProjectiveImage),
}

impl ConvexDomain {
    pub fn ellipse(center: Point2, a: f64, b: f64, rotation: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidDomain("ellipse semi-axes must be positive".into()));
        }
        if !center.is_finite() || !rotation.is_finite() {
            return Err(Error::InvalidDomain("non-finite ellipse parameters".into()));
        }
        let (sin, cos) = rotation.sin_cos();
        Ok(Self::Ellipse(Ellipse {
            center,
            a,
            b,
            rotation,
            cos,
            sin,
        }))
    }

    pub fn disk(center: Point2, radius: f64) -> Result<Self> {
        Self::ellipse(center, radius, radius, 0.0)
    }

    pub fn unit_disk() -> Self {
        Self::disk(Point2::ORIGIN, 1.0).expect("valid")
    }

    pub fn pball(p: f64, center: Point2, scale: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidDomain("p-ball exponent must be finite and >= 1".into()));
        }
        if !(scale > 0.0 && scale.is_finite()) || !center.is_finite() {
            return Err(Error::InvalidDomain("p-ball scale must be positive".into()));
        }
        Ok(Self::PBall(PBall { p, center, scale }))
    }

    pub fn unit_pball(p: f64) -> Result<Self> {
        Self::pball(p, Point2::ORIGIN, 1.0)
    }

    /// Convex polygon from its vertices in either orientation. Collinear
    /// vertices are dropped; a non-convex vertex list is rejected.
    pub fn polygon(vertices: Vec<Point2>) -> Result<Self> {
        Polygon::new(vertices).map(Self::Polygon)
    }

    /// The square `(0, 1)²`.
    pub fn unit_square() -> Self {
        Self::polygon(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .expect("valid")
    }

    /// Regular polygon with circumradius `r`, first vertex at angle `phase`.
    pub fn regular_polygon(sides: usize, center: Point2, r: f64, phase: f64) -> Result<Self> {
        if sides < 3 {
            return Err(Error::InvalidDomain("polygon needs at least 3 vertices".into()));
        }
        let v = (0..sides)
            .map(|k| center + Point2::polar(phase + TAU * k as f64 / sides as f64) * r)
            .collect();
        Self::polygon(v)
    }

    pub fn power_cap(alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::InvalidDomain("power cap exponent must be >= 1".into()));
        }
        Ok(Self::PowerCap(PowerCap { alpha }))
    }

    pub fn smooth_polygon(
        sides: usize,
        p: f64,
        center: Point2,
        scale: f64,
        rotation: f64,
    ) -> Result<Self> {
        if sides < 3 {
            return Err(Error::InvalidDomain("smoothed polygon needs at least 3 sides".into()));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidDomain("smoothing exponent must be finite and >= 1".into()));
        }
        if !(scale > 0.0 && scale.is_finite()) || !center.is_finite() || !rotation.is_finite() {
            return Err(Error::InvalidDomain("invalid smoothed polygon frame".into()));
        }
        let normals = (0..sides)
            .map(|k| Point2::polar(rotation + TAU * k as f64 / sides as f64))
            .collect();
        Ok(Self::SmoothPolygon(SmoothPolygon {
            sides,
            p,
            center,
            scale,
            rotation,
            normals,
        }))
    }

    /// Image of `self` under `h`. Nested images are flattened into a single
    /// map over the base domain.
    pub fn projective_image(&self, h: &ProjectiveMap) -> Result<Self> {
        let (inner, map) = match self {
            Self::Projective(pi) => (pi.inner.clone(), h.compose(&pi.map)),
            other => (Arc::new(other.clone()), *h),
        };
        let [c1, c2, c3] = map.denominator_row();
        let c = Point2::new(c1, c2);
        let (lo, hi) = if c.norm() == 0.0 {
            (c3, c3)
        } else {
            (c3 - inner.support(-c), c3 + inner.support(c))
        };
        let scale = c.norm() * inner.extent() + c3.abs();
        if !(lo * hi > 0.0) || lo.abs().min(hi.abs()) <= 1e-12 * scale {
            return Err(Error::ImproperImage);
        }
        Ok(Self::Projective(ProjectiveImage {
            inner,
            map,
            denom_sign: hi.signum(),
        }))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Ellipse(e) if e.a == e.b => "disk".into(),
            Self::Ellipse(_) => "ellipse".into(),
            Self::PBall(b) => format!("pball(p={})", b.p),
            Self::Polygon(g) => format!("polygon({})", g.vertices.len()),
            Self::PowerCap(c) => format!("powercap(alpha={})", c.alpha),
            Self::SmoothPolygon(s) => format!("smoothpoly(n={},p={})", s.sides, s.p),
            Self::Projective(pi) => format!("projective[{}]", pi.inner.label()),
        }
    }

    /// True iff `p` lies in the open domain.
    pub fn contains(&self, p: Point2) -> bool {
        if !p.is_finite() {
            return false;
        }
        match self {
            Self::Ellipse(e) => e.to_unit(p).norm_sq() < 1.0,
            Self::PBall(b) => b.gauge(b.local(p)) < 1.0,
            Self::Polygon(g) => g.edges.iter().all(|l| l.signed_distance(p) < 0.0),
            Self::PowerCap(c) => p.y < 1.0 && p.x.abs().powf(c.alpha) < p.y,
            Self::SmoothPolygon(s) => s.gauge(s.local(p)) < 1.0,
            Self::Projective(pi) => pi
                .map
                .apply_inverse(p)
                .is_some_and(|q| pi.inner.contains(q)),
        }
    }

    /// Signed boundary function: negative inside, zero on the boundary,
    /// positive outside. Not a distance, but comparable to one near the
    /// boundary for the affine variants.
    pub fn boundary_residual(&self, p: Point2) -> f64 {
        match self {
            Self::Ellipse(e) => e.to_unit(p).norm() - 1.0,
            Self::PBall(b) => b.gauge(b.local(p)) - 1.0,
            Self::Polygon(g) => g
                .edges
                .iter()
                .map(|l| l.signed_distance(p))
                .fold(f64::NEG_INFINITY, f64::max),
            Self::PowerCap(c) => (p.y - 1.0).max(p.x.abs().powf(c.alpha) - p.y),
            Self::SmoothPolygon(s) => s.gauge(s.local(p)) - 1.0,
            Self::Projective(pi) => match pi.map.apply_inverse(p) {
                Some(q) => pi.inner.boundary_residual(q),
                None => f64::INFINITY,
            },
        }
    }

    /// Distance from the interior point `p` to the boundary along the unit
    /// direction `u`.
    fn ray_exit(&self, p: Point2, u: Point2) -> Result<f64> {
        match self {
            Self::Ellipse(e) => Ok(e.ray_exit(p, u)),
            Self::PBall(b) => b.ray_exit(p, u),
            Self::Polygon(g) => Ok(g.ray_exit(p, u)),
            Self::PowerCap(c) => c.ray_exit(p, u),
            Self::SmoothPolygon(s) => s.ray_exit(p, u),
            Self::Projective(pi) => pi.ray_exits(p, u).map(|(_, t)| t),
        }
    }

    /// Both boundary hits of the line through `p` with direction `v`.
    pub fn chord(&self, p: Point2, v: Point2) -> Result<Chord> {
        if !self.contains(p) {
            return Err(Error::PointNotInterior);
        }
        let u = v.normalized().ok_or(Error::ZeroDirection)?;
        let (t_minus, t_plus) = match self {
            Self::Projective(pi) => pi.ray_exits(p, u)?,
            _ => (self.ray_exit(p, -u)?, self.ray_exit(p, u)?),
        };
        Ok(Chord {
            p_minus: p - u * t_minus,
            p_plus: p + u * t_plus,
            t_minus,
            t_plus,
        })
    }

    /// A supporting line at the boundary point `b`, oriented with the domain
    /// on its negative side. At corners the bisector of the normal cone is
    /// used.
    pub fn supporting_line(&self, b: Point2) -> Result<Line2> {
        let residual = self.boundary_residual(b);
        let tol = BOUNDARY_TOL * (1.0 + self.extent());
        if !(residual.abs() <= tol) {
            return Err(Error::NotOnBoundary { residual });
        }
        let normal = match self {
            Self::Ellipse(e) => {
                let q = e.to_unit(b);
                e.rotate(Point2::new(q.x / e.a, q.y / e.b))
            }
            Self::PBall(ball) => ball.gradient(ball.local(b)),
            Self::SmoothPolygon(s) => s.gradient(s.local(b)),
            Self::Polygon(g) => g.normal_at(b, tol),
            Self::PowerCap(c) => c.normal_at(b, tol),
            Self::Projective(pi) => {
                let q = pi.map.apply_inverse(b).ok_or(Error::NotOnBoundary { residual })?;
                let inner = pi.inner.supporting_line(q)?;
                let l = pi.map.apply_line(&inner).ok_or(Error::SingularMap)?;
                let l = if pi.denom_sign < 0.0 { l.flipped() } else { l };
                // re-anchor exactly at b
                return Line2::through(b, l.normal()).ok_or(Error::ZeroDirection);
            }
        };
        let n = normal.normalized().ok_or(Error::ZeroDirection)?;
        Line2::through(b, n).ok_or(Error::ZeroDirection)
    }

    /// Period of the boundary parameterization: `2π` for angular
    /// parameterizations, `1` for arc-length fractions on polygons.
    pub fn param_period(&self) -> f64 {
        match self {
            Self::Polygon(_) => 1.0,
            Self::Projective(pi) => pi.inner.param_period(),
            _ => TAU,
        }
    }

    /// True when boundary parameters are angles.
    pub fn angular_params(&self) -> bool {
        self.param_period() == TAU
    }

    /// Boundary point for parameter `t` (taken modulo the period).
    ///
    /// Ellipses use the eccentric angle, gauge domains the polar angle seen
    /// from the center, polygons the arc-length fraction from vertex 0.
    pub fn boundary_point(&self, t: f64) -> Point2 {
        match self {
            Self::Ellipse(e) => e.center + e.rotate(Point2::new(e.a * t.cos(), e.b * t.sin())),
            Self::PBall(b) => {
                let u = Point2::polar(t);
                b.center + u * (b.scale / b.gauge(u))
            }
            Self::SmoothPolygon(s) => {
                let u = Point2::polar(t);
                s.center + u * (s.scale / s.gauge(u))
            }
            Self::Polygon(g) => g.point_at(t),
            Self::PowerCap(c) => {
                let o = c.center();
                let u = Point2::polar(t);
                o + u * c.ray_exit(o, u).unwrap_or(0.0)
            }
            Self::Projective(pi) => {
                let q = pi.inner.boundary_point(t);
                pi.map.apply(q).unwrap_or(q)
            }
        }
    }

    /// Parameters of distinguished boundary points: axis ends of ellipses,
    /// the points at multiples of π/4 on p-balls, polygon vertices, corners.
    pub fn special_params(&self) -> Vec<f64> {
        match self {
            Self::Ellipse(_) => (0..4).map(|k| k as f64 * PI / 2.0).collect(),
            Self::PBall(_) => (0..8).map(|k| k as f64 * PI / 4.0).collect(),
            Self::SmoothPolygon(s) => (0..2 * s.sides)
                .map(|k| (s.rotation + PI * k as f64 / s.sides as f64).rem_euclid(TAU))
                .collect(),
            Self::Polygon(g) => g.cumulative[..g.vertices.len()].to_vec(),
            Self::PowerCap(c) => {
                let o = c.center();
                vec![
                    (Point2::new(1.0, 1.0) - o).angle().rem_euclid(TAU),
                    (Point2::new(-1.0, 1.0) - o).angle().rem_euclid(TAU),
                    1.5 * PI,
                ]
            }
            Self::Projective(pi) => pi.inner.special_params(),
        }
    }

    /// Boundary point maximizing `u · x` over the closure.
    pub fn support_point(&self, u: Point2) -> Point2 {
        match self {
            Self::Ellipse(e) => {
                let w = e.unrotate(u);
                let z = Point2::new(e.a * w.x, e.b * w.y);
                match z.normalized() {
                    Some(z) => e.center + e.rotate(Point2::new(e.a * z.x, e.b * z.y)),
                    None => e.center,
                }
            }
            Self::PBall(b) => b.center + b.unit_support_point(u) * b.scale,
            Self::Polygon(g) => *g
                .vertices
                .iter()
                .max_by(|a, b| a.dot(u).total_cmp(&b.dot(u)))
                .expect("nonempty"),
            Self::PowerCap(c) => c.support_point(u),
            Self::SmoothPolygon(_) => self.support_point_by_scan(u),
            Self::Projective(pi) => pi.support_point(u),
        }
    }

    /// Support function `max { u · x : x in closure }`.
    pub fn support(&self, u: Point2) -> f64 {
        u.dot(self.support_point(u))
    }

    /// `[xmin, xmax, ymin, ymax]` of the closure.
    pub fn bounding_box(&self) -> [f64; 4] {
        let ex = Point2::new(1.0, 0.0);
        let ey = Point2::new(0.0, 1.0);
        [
            -self.support(-ex),
            self.support(ex),
            -self.support(-ey),
            self.support(ey),
        ]
    }

    /// Diameter of the bounding box; a length scale for tolerances.
    pub fn extent(&self) -> f64 {
        let [x0, x1, y0, y1] = self.bounding_box();
        (x1 - x0).hypot(y1 - y0)
    }

    /// A canonical interior point.
    pub fn center(&self) -> Point2 {
        match self {
            Self::Ellipse(e) => e.center,
            Self::PBall(b) => b.center,
            Self::Polygon(g) => g.centroid,
            Self::PowerCap(c) => c.center(),
            Self::SmoothPolygon(s) => s.center,
            Self::Projective(pi) => pi
                .map
                .apply(pi.inner.center())
                .expect("proper image keeps interior finite"),
        }
    }

    /// Whether the boundary contains no segment.
    pub fn is_strictly_convex(&self) -> bool {
        match self {
            Self::Ellipse(_) => true,
            Self::PBall(b) => b.p > 1.0,
            Self::SmoothPolygon(s) => s.p > 1.0 && s.sides >= 4,
            Self::Polygon(_) | Self::PowerCap(_) => false,
            Self::Projective(pi) => pi.inner.is_strictly_convex(),
        }
    }

    /// Vertices when the domain is a polygon or a projective image of one.
    pub fn polygon_vertices(&self) -> Option<Vec<Point2>> {
        match self {
            Self::Polygon(g) => Some(g.vertices.clone()),
            Self::Projective(pi) => pi
                .inner
                .polygon_vertices()
                .map(|v| v.into_iter().filter_map(|q| pi.map.apply(q)).collect()),
            _ => None,
        }
    }

    pub fn as_projective(&self) -> Option<(&ConvexDomain, &ProjectiveMap)> {
        match self {
            Self::Projective(pi) => Some((&pi.inner, &pi.map)),
            _ => None,
        }
    }

    pub fn to_spec(&self) -> DomainSpec {
        DomainSpec::from_domain(self)
    }

    fn support_point_by_scan(&self, u: Point2) -> Point2 {
        let f = |t: f64| u.dot(self.boundary_point(t));
        let n = 512;
        let h = TAU / n as f64;
        let best = (0..n)
            .map(|k| k as f64 * h)
            .max_by(|a, b| f(*a).total_cmp(&f(*b)))
            .expect("nonempty");
        let t = crate::numeric::golden_max(f, best - h, best + h, 1e-13);
        self.boundary_point(t)
    }
}

impl Ellipse {
    #[inline]
    fn unrotate(&self, v: Point2) -> Point2 {
        Point2::new(self.cos * v.x + self.sin * v.y, -self.sin * v.x + self.cos * v.y)
    }

    #[inline]
    fn rotate(&self, v: Point2) -> Point2 {
        Point2::new(self.cos * v.x - self.sin * v.y, self.sin * v.x + self.cos * v.y)
    }

    /// Coordinates in which the ellipse is the unit disk.
    #[inline]
    fn to_unit(&self, p: Point2) -> Point2 {
        let q = self.unrotate(p - self.center);
        Point2::new(q.x / self.a, q.y / self.b)
    }

    fn ray_exit(&self, p: Point2, u: Point2) -> f64 {
        let q = self.to_unit(p);
        let w = self.unrotate(u);
        let d = Point2::new(w.x / self.a, w.y / self.b);
        let a = d.norm_sq();
        let b = q.dot(d);
        let c = q.norm_sq() - 1.0;
        let disc = (b * b - a * c).max(0.0).sqrt();
        if b > 0.0 {
            -c / (b + disc)
        } else {
            (disc - b) / a
        }
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn semi_axes(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }
}

/// `m (1 + Σ (a_i/m)^p)^{1/p}` over nonnegative terms, `m` their maximum.
fn lp_norm(terms: &[f64], p: f64) -> f64 {
    let m = terms.iter().copied().fold(0.0f64, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = terms.iter().map(|a| (a / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

impl PBall {
    #[inline]
    fn local(&self, p: Point2) -> Point2 {
        (p - self.center) * (1.0 / self.scale)
    }

    #[inline]
    fn gauge(&self, w: Point2) -> f64 {
        lp_norm(&[w.x.abs(), w.y.abs()], self.p)
    }

    fn gradient(&self, w: Point2) -> Point2 {
        let g = self.gauge(w);
        if g == 0.0 {
            return Point2::ORIGIN;
        }
        let e = self.p - 1.0;
        Point2::new(
            sign0(w.x) * (w.x.abs() / g).powf(e),
            sign0(w.y) * (w.y.abs() / g).powf(e),
        )
    }

    fn unit_support_point(&self, u: Point2) -> Point2 {
        if self.p == 1.0 {
            return if u.x.abs() >= u.y.abs() {
                Point2::new(sign0(u.x), 0.0)
            } else {
                Point2::new(0.0, sign0(u.y))
            };
        }
        let q = self.p / (self.p - 1.0);
        let nq = lp_norm(&[u.x.abs(), u.y.abs()], q);
        if nq == 0.0 {
            return Point2::ORIGIN;
        }
        Point2::new(
            sign0(u.x) * (u.x.abs() / nq).powf(q - 1.0),
            sign0(u.y) * (u.y.abs() / nq).powf(q - 1.0),
        )
    }

    fn ray_exit(&self, p: Point2, u: Point2) -> Result<f64> {
        let w = self.local(p);
        let d = u * (1.0 / self.scale);
        let mut t_hi = f64::INFINITY;
        for (wi, di) in [(w.x, d.x), (w.y, d.y)] {
            if di != 0.0 {
                t_hi = t_hi.min((di.signum() - wi) / di);
            }
        }
        newton_from_right(
            |t| {
                let x = w + d * t;
                (self.gauge(x) - 1.0, self.gradient(x).dot(d))
            },
            t_hi,
        )
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl SmoothPolygon {
    #[inline]
    fn local(&self, p: Point2) -> Point2 {
        (p - self.center) * (1.0 / self.scale)
    }

    fn terms(&self, w: Point2) -> Vec<f64> {
        self.normals.iter().map(|n| n.dot(w).max(0.0)).collect()
    }

    fn gauge(&self, w: Point2) -> f64 {
        lp_norm(&self.terms(w), self.p)
    }

    fn gradient(&self, w: Point2) -> Point2 {
        let g = self.gauge(w);
        if g == 0.0 {
            return Point2::ORIGIN;
        }
        let e = self.p - 1.0;
        let mut acc = Point2::ORIGIN;
        for (n, a) in self.normals.iter().zip(self.terms(w)) {
            if a > 0.0 {
                acc += *n * (a / g).powf(e);
            }
        }
        acc
    }

    fn ray_exit(&self, p: Point2, u: Point2) -> Result<f64> {
        let w = self.local(p);
        let d = u * (1.0 / self.scale);
        // the gauge dominates max_k n_k·x, so the enclosing polygon brackets
        let mut t_hi = f64::INFINITY;
        for n in &self.normals {
            let nd = n.dot(d);
            if nd > 0.0 {
                t_hi = t_hi.min((1.0 - n.dot(w)) / nd);
            }
        }
        newton_from_right(
            |t| {
                let x = w + d * t;
                (self.gauge(x) - 1.0, self.gradient(x).dot(d))
            },
            t_hi,
        )
    }

    pub fn sides(&self) -> usize {
        self.sides
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }
}

impl Polygon {
    fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 || vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("polygon needs at least 3 finite vertices".into()));
        }
        let n = vertices.len();
        let area2: f64 = (0..n)
            .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
            .sum();
        if area2 < 0.0 {
            vertices.reverse();
        }
        let scale = vertices
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        // drop duplicate and collinear vertices
        let mut kept: Vec<Point2> = Vec::with_capacity(n);
        for i in 0..n {
            let prev = vertices[(i + n - 1) % n];
            let cur = vertices[i];
            let next = vertices[(i + 1) % n];
            let turn = (cur - prev).cross(next - cur);
            if turn < -1e-12 * scale * scale {
                return Err(Error::InvalidDomain("polygon is not convex".into()));
            }
            if turn > 1e-12 * scale * scale {
                kept.push(cur);
            }
        }
        if kept.len() < 3 {
            return Err(Error::InvalidDomain("polygon is degenerate".into()));
        }
        let n = kept.len();
        let edges = (0..n)
            .map(|i| {
                let a = kept[i];
                let b = kept[(i + 1) % n];
                // outward normal of a counterclockwise edge
                Line2::through(a, Point2::new(b.y - a.y, a.x - b.x))
                    .ok_or_else(|| Error::InvalidDomain("repeated vertex".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..n {
            acc += kept[i].dist(kept[(i + 1) % n]);
            cumulative.push(acc);
        }
        for c in cumulative.iter_mut() {
            *c /= acc;
        }
        let centroid = kept.iter().fold(Point2::ORIGIN, |s, v| s + *v) * (1.0 / n as f64);
        Ok(Self {
            vertices: kept,
            edges,
            cumulative,
            centroid,
        })
    }

    fn ray_exit(&self, p: Point2, u: Point2) -> f64 {
        self.edges
            .iter()
            .filter_map(|l| {
                let nu = l.normal().dot(u);
                (nu > 0.0).then(|| -l.signed_distance(p) / nu)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn point_at(&self, t: f64) -> Point2 {
        let t = t.rem_euclid(1.0);
        let n = self.vertices.len();
        let i = self.cumulative.partition_point(|&c| c <= t).clamp(1, n) - 1;
        let len = self.cumulative[i + 1] - self.cumulative[i];
        let s = if len > 0.0 {
            (t - self.cumulative[i]) / len
        } else {
            0.0
        };
        self.vertices[i].lerp(self.vertices[(i + 1) % n], s)
    }

    fn normal_at(&self, b: Point2, tol: f64) -> Point2 {
        let active: Vec<Point2> = self
            .edges
            .iter()
            .filter(|l| l.signed_distance(b).abs() <= tol)
            .map(|l| l.normal())
            .collect();
        match active.len() {
            0 => self
                .edges
                .iter()
                .max_by(|x, y| x.signed_distance(b).total_cmp(&y.signed_distance(b)))
                .expect("nonempty")
                .normal(),
            _ => active.iter().fold(Point2::ORIGIN, |s, n| s + *n),
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Line2] {
        &self.edges
    }

    /// Boundary parameter (arc-length fraction) of vertex `i`.
    pub fn vertex_param(&self, i: usize) -> f64 {
        self.cumulative[i % self.vertices.len()]
    }

    /// Index of the edge containing the boundary point `b`, if unique.
    pub fn edge_of(&self, b: Point2, tol: f64) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, l)| l.signed_distance(b).abs() <= tol)
            .map(|(i, _)| i)
            .collect()
    }
}

impl PowerCap {
    fn center(&self) -> Point2 {
        Point2::new(0.0, 0.5)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn ray_exit(&self, p: Point2, u: Point2) -> Result<f64> {
        let a = self.alpha;
        // box [-1,1] x [0,1] contains the closure
        let mut t_hi = f64::INFINITY;
        if u.x != 0.0 {
            t_hi = t_hi.min((u.x.signum() - p.x) / u.x);
        }
        if u.y > 0.0 {
            t_hi = t_hi.min((1.0 - p.y) / u.y);
        } else if u.y < 0.0 {
            t_hi = t_hi.min(-p.y / u.y);
        }
        let phi = |t: f64| {
            let x = p.x + t * u.x;
            let y = p.y + t * u.y;
            let ax = x.abs();
            (
                ax.powf(a) - y,
                a * sign0(x) * ax.powf(a - 1.0) * u.x - u.y,
            )
        };
        if phi(t_hi).0 <= 0.0 {
            // top edge (or a corner) is hit first
            return Ok(t_hi);
        }
        newton_from_right(phi, t_hi)
    }

    fn normal_at(&self, b: Point2, tol: f64) -> Point2 {
        let a = self.alpha;
        let top = (b.y - 1.0).abs() <= tol;
        let curve_n = Point2::new(a * sign0(b.x) * b.x.abs().powf(a - 1.0), -1.0);
        let on_curve = (b.x.abs().powf(a) - b.y).abs() <= tol;
        match (top, on_curve) {
            (true, true) => Point2::new(0.0, 1.0) + curve_n.normalized().expect("nonzero"),
            (true, false) => Point2::new(0.0, 1.0),
            _ => curve_n,
        }
    }

    fn support_point(&self, u: Point2) -> Point2 {
        let a = self.alpha;
        if u.y >= 0.0 {
            let x = if u.x == 0.0 { 0.0 } else { u.x.signum() };
            return Point2::new(x, 1.0);
        }
        let s = sign0(u.x);
        let (ux, uy) = (u.x.abs(), -u.y);
        let xs = if a == 1.0 {
            if ux > uy {
                1.0
            } else {
                0.0
            }
        } else {
            (ux / (a * uy)).powf(1.0 / (a - 1.0)).min(1.0)
        };
        // compare the curve optimum with the top corners
        let curve = Point2::new(s * xs, xs.powf(a));
        let corner = Point2::new(if s == 0.0 { 1.0 } else { s }, 1.0);
        if corner.dot(u) > curve.dot(u) {
            corner
        } else {
            curve
        }
    }
}

impl ProjectiveImage {
    pub fn inner(&self) -> &ConvexDomain {
        &self.inner
    }

    pub fn map(&self) -> &ProjectiveMap {
        &self.map
    }

    /// Exit distances `(t_minus, t_plus)` along `∓u`, computed by pulling the
    /// line back to the inner domain.
    fn ray_exits(&self, p: Point2, u: Point2) -> Result<(f64, f64)> {
        let hinv = self.map.inverse();
        let m = hinv.matrix();
        let pp = m * Vector3::new(p.x, p.y, 1.0);
        let vv = m * Vector3::new(u.x, u.y, 0.0);
        let (p3, v3) = (pp[2], vv[2]);
        let d = Point2::new(p3 * vv[0] - v3 * pp[0], p3 * vv[1] - v3 * pp[1]);
        let dn = d.norm();
        if dn == 0.0 || p3 == 0.0 {
            return Err(Error::ZeroDirection);
        }
        let q = Point2::new(pp[0] / p3, pp[1] / p3);
        let ch = self.inner.chord(q, d)?;
        let sp = ch.t_plus / dn;
        let sm = ch.t_minus / dn;
        let k = p3 * v3;
        let t_plus = sp * p3 * p3 / (1.0 - sp * k);
        let t_minus = sm * p3 * p3 / (1.0 + sm * k);
        if !(t_plus > 0.0 && t_minus > 0.0 && t_plus.is_finite() && t_minus.is_finite()) {
            return Err(Error::NoConvergence("projective chord pull-back"));
        }
        Ok((t_minus, t_plus))
    }

    /// Maximizes `u · H(y)` over the inner closure by Dinkelbach iteration on
    /// the linear-fractional objective.
    fn support_point(&self, u: Point2) -> Point2 {
        let m = self.map.matrix();
        let s = self.denom_sign;
        let num = [
            s * (u.x * m[(0, 0)] + u.y * m[(1, 0)]),
            s * (u.x * m[(0, 1)] + u.y * m[(1, 1)]),
            s * (u.x * m[(0, 2)] + u.y * m[(1, 2)]),
        ];
        let den = [s * m[(2, 0)], s * m[(2, 1)], s * m[(2, 2)]];
        let ratio = |y: Point2| {
            (num[0] * y.x + num[1] * y.y + num[2]) / (den[0] * y.x + den[1] * y.y + den[2])
        };
        let mut y = self.inner.center();
        let mut lam = ratio(y);
        for _ in 0..100 {
            let dir = Point2::new(num[0] - lam * den[0], num[1] - lam * den[1]);
            if dir.norm() == 0.0 {
                break;
            }
            let y_new = self.inner.support_point(dir);
            let lam_new = ratio(y_new);
            if !(lam_new > lam + 1e-15 * (1.0 + lam.abs())) {
                if lam_new >= lam {
                    y = y_new;
                }
                break;
            }
            y = y_new;
            lam = lam_new;
        }
        self.map.apply(y).unwrap_or(y)
    }
}

/// Root of a convex increasing-at-root function from a right bracket
/// `t_hi` with `phi(t_hi) >= 0`; Newton iterates decrease monotonically.
/// `phi` returns value and derivative.
fn newton_from_right<F>(phi: F, t_hi: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    if !(t_hi.is_finite() && t_hi > 0.0) {
        return Err(Error::NoConvergence("chord bracket"));
    }
    let mut lo = 0.0;
    let mut hi = t_hi;
    let mut t = t_hi;
    for _ in 0..NEWTON_MAX_ITER {
        let (f, df) = phi(t);
        if f <= 0.0 {
            if f == 0.0 || hi - t <= 4.0 * f64::EPSILON * hi {
                return Ok(t);
            }
            lo = t;
            // rounding overshoot: bisect back toward the bracket
            t = 0.5 * (lo + hi);
            continue;
        }
        hi = t;
        let step = if df > 0.0 { f / df } else { f64::NAN };
        if step.is_finite() && step <= 4.0 * f64::EPSILON * t {
            return Ok((t - step).max(lo));
        }
        let next = t - step;
        t = if next > lo && next < t {
            next
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(hi);
        }
    }
    Err(Error::NoConvergence("chord root"))
}
