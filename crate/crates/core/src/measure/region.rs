//! Hilbert areas of regions and metric balls.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quadrature::{integrate_adaptive, integrate_fixed, AdaptiveResult};
use super::{density_tol, QuadratureEstimate, QUADRATURE_DENSITY_TOL};
use crate::domain::{ConvexDomain, Point2, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::numeric::gauss_legendre;

/// A region of integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Region {
    Empty,
    /// Convex polygon; either orientation.
    Polygon { vertices: Vec<Point2> },
    /// Euclidean disk, which must lie in the open domain.
    Disk { center: Point2, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionOptions {
    /// Relative tolerance of each adaptive integration.
    pub tol: f64,
    pub depth_cap: usize,
    pub max_cells: usize,
    /// Number of strips in the boundary ladder.
    pub ladder_levels: usize,
    /// Relative width of the first strip.
    pub first_strip: f64,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            depth_cap: 14,
            max_cells: 400_000,
            ladder_levels: 12,
            first_strip: 0.25,
        }
    }
}

impl RegionOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Partial sums of a truncation ladder `A_k = base + Δ_1 + … + Δ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderResult {
    pub partials: Vec<f64>,
    pub increments: Vec<f64>,
    pub extrapolated: f64,
    pub diverged: bool,
    /// Estimated truncation error of `extrapolated`.
    pub error: f64,
}

/// Increments that shrink by less than this factor count as non-decreasing.
const DIVERGENCE_SLACK: f64 = 0.98;

/// Sums `base` and the increments `increment(1..=levels)`. The tail is
/// extrapolated by Aitken's Δ² when the increments decay geometrically; the
/// ladder is declared divergent when the last three increments do not
/// decrease.
pub fn ladder<F>(base: f64, levels: usize, mut increment: F) -> Result<LadderResult>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut partials = Vec::with_capacity(levels);
    let mut increments = Vec::with_capacity(levels);
    let mut acc = base;
    for k in 1..=levels {
        let d = increment(k)?;
        acc += d;
        increments.push(d);
        partials.push(acc);
    }
    let n = increments.len();
    let diverged = n >= 3 && {
        let (a, b, c) = (increments[n - 3], increments[n - 2], increments[n - 1]);
        b >= DIVERGENCE_SLACK * a && c >= DIVERGENCE_SLACK * b && c > 0.0
    };
    let (extrapolated, error) = if n == 0 {
        (base, 0.0)
    } else if diverged || n < 2 {
        (acc, increments[n - 1].abs())
    } else {
        let (prev, last) = (increments[n - 2], increments[n - 1]);
        let ratio = last / prev;
        if prev > 0.0 && last >= 0.0 && ratio < 1.0 {
            let tail = last * ratio / (1.0 - ratio);
            (acc + tail, tail.abs().max(f64::EPSILON * acc.abs()))
        } else {
            (acc, last.abs())
        }
    };
    Ok(LadderResult {
        partials,
        increments,
        extrapolated,
        diverged,
        error,
    })
}

pub(crate) fn density_or_nan(domain: &ConvexDomain, p: Point2) -> f64 {
    density_tol(domain, p, QUADRATURE_DENSITY_TOL).unwrap_or(f64::NAN)
}

pub(crate) fn integrate_density(
    domain: &ConvexDomain,
    tris: &[[Point2; 3]],
    opts: &RegionOptions,
) -> Result<AdaptiveResult> {
    let f = |p: Point2| density_or_nan(domain, p);
    let r = integrate_adaptive(&f, tris, opts.tol, 0.0, opts.depth_cap, opts.max_cells);
    if !r.value.is_finite() {
        return Err(Error::RegionOutsideDomain);
    }
    Ok(r)
}

pub(crate) fn fan(c: Point2, v: &[Point2]) -> Vec<[Point2; 3]> {
    let n = v.len();
    (0..n).map(|i| [c, v[i], v[(i + 1) % n]]).collect()
}

/// Where a polygon meets the boundary.
struct Contact {
    vertices: Vec<bool>,
    edges: bool,
}

impl Contact {
    fn any(&self) -> bool {
        self.edges || self.vertices.iter().any(|b| *b)
    }
}

/// Normalizes a convex polygon to counter-clockwise order and checks that
/// it lies in the closed domain.
fn checked_polygon(domain: &ConvexDomain, vertices: &[Point2]) -> Result<(Vec<Point2>, Contact)> {
    let poly = ConvexDomain::polygon(vertices.to_vec())
        .map_err(|e| Error::InvalidRegion(e.to_string()))?;
    let v = poly.polygon_vertices().expect("polygon");
    let scale = 1.0 + domain.extent();
    let outside = BOUNDARY_TOL * scale;
    let touch = 1e-9 * scale;
    let n = v.len();
    let mut contact = Contact {
        vertices: vec![false; n],
        edges: false,
    };
    for i in 0..n {
        for j in 0..32 {
            let r = domain.boundary_residual(v[i].lerp(v[(i + 1) % n], j as f64 / 32.0));
            if r > outside {
                return Err(Error::RegionOutsideDomain);
            }
            if r > -touch {
                if j == 0 {
                    contact.vertices[i] = true;
                } else {
                    contact.edges = true;
                }
            }
        }
    }
    Ok((v, contact))
}

/// Ladder over the corner of a polygon at `p` with neighbours `next` and
/// `prev`: trapezoids between cuts parallel to `next − prev` at side
/// fractions `cut·2^{1-k}` and `cut·2^{-k}`. Returns the ladder, the summed
/// quadrature error and the deepest refinement.
pub(crate) fn corner_ladder(
    domain: &ConvexDomain,
    p: Point2,
    next: Point2,
    prev: Point2,
    cut: f64,
    levels: usize,
    opts: &RegionOptions,
) -> Result<(LadderResult, f64, usize)> {
    let mut err = 0.0;
    let mut depth = 0;
    let lad = ladder(0.0, levels, |k| {
        let s_out = cut * 0.5f64.powi(k as i32 - 1);
        let s_in = cut * 0.5f64.powi(k as i32);
        let t = [p.lerp(next, s_out), p.lerp(prev, s_out), p.lerp(prev, s_in), p.lerp(next, s_in)];
        let r = integrate_density(domain, &[[t[0], t[1], t[2]], [t[0], t[2], t[3]]], opts)?;
        err += r.error;
        depth = depth.max(r.depth);
        Ok(r.value)
    })?;
    Ok((lad, err, depth))
}

fn centroid(v: &[Point2]) -> Point2 {
    let n = v.len();
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        let w = p.cross(q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Point2::new(cx / (3.0 * a), cy / (3.0 * a))
}

pub fn region_area(domain: &ConvexDomain, region: &Region, tol: f64) -> Result<QuadratureEstimate> {
    region_area_with(domain, region, &RegionOptions::with_tol(tol))
}

/// Hilbert area of `region`. Polygons away from the boundary are integrated
/// directly. A polygon touching the boundary only at vertices loses a corner
/// at each such vertex, and every corner is summed as a ladder of trapezoids
/// shrinking toward the vertex. A polygon with an edge on the boundary is
/// split into a core, shrunk about the centroid, and a ladder of strips
/// whose widths halve toward the boundary. Ladder sums are extrapolated, and
/// a ladder whose pieces stop shrinking is reported as divergent.
pub fn region_area_with(
    domain: &ConvexDomain,
    region: &Region,
    opts: &RegionOptions,
) -> Result<QuadratureEstimate> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    match region {
        Region::Empty => Ok(QuadratureEstimate::zero()),
        Region::Disk { center, radius } => disk_area(domain, *center, *radius, opts.tol),
        Region::Polygon { vertices } => {
            let (v, contact) = checked_polygon(domain, vertices)?;
            let c = centroid(&v);
            if !contact.any() {
                let r = integrate_density(domain, &fan(c, &v), opts)?;
                return Ok(QuadratureEstimate {
                    value: r.value,
                    error_bound: r.error,
                    depth: r.depth,
                    diverged: false,
                });
            }
            if contact.edges {
                homothetic_ladder(domain, &v, c, opts)
            } else {
                vertex_ladders(domain, &v, &contact.vertices, opts)
            }
        }
    }
}

/// Core shrunk about the centroid plus strips between homothetic copies.
fn homothetic_ladder(
    domain: &ConvexDomain,
    v: &[Point2],
    c: Point2,
    opts: &RegionOptions,
) -> Result<QuadratureEstimate> {
    let h0 = opts.first_strip.clamp(1e-3, 0.9);
    let scaled = |s: f64| -> Vec<Point2> { v.iter().map(|p| c.lerp(*p, s)).collect() };
    let core = integrate_density(domain, &fan(c, &scaled(1.0 - h0)), opts)?;
    let mut depth = core.depth;
    let mut quad_err = core.error;
    let lad = ladder(core.value, opts.ladder_levels, |k| {
        let inner = scaled(1.0 - h0 * 0.5f64.powi(k as i32 - 1));
        let outer = scaled(1.0 - h0 * 0.5f64.powi(k as i32));
        let r = integrate_density(domain, &annulus(&inner, &outer), opts)?;
        depth = depth.max(r.depth);
        quad_err += r.error;
        Ok(r.value)
    })?;
    Ok(QuadratureEstimate {
        value: lad.extrapolated,
        error_bound: lad.error + quad_err,
        depth,
        diverged: lad.diverged,
    })
}

/// Corners at the touching vertices cut off and integrated as ladders; the
/// remaining core is compact in the domain.
fn vertex_ladders(
    domain: &ConvexDomain,
    v: &[Point2],
    touching: &[bool],
    opts: &RegionOptions,
) -> Result<QuadratureEstimate> {
    let n = v.len();
    let s = opts.first_strip.clamp(1e-3, 0.45);
    let mut core = Vec::with_capacity(2 * n);
    for i in 0..n {
        let (prev, next) = (v[(i + n - 1) % n], v[(i + 1) % n]);
        if touching[i] {
            core.push(v[i].lerp(prev, s));
            core.push(v[i].lerp(next, s));
        } else {
            core.push(v[i]);
        }
    }
    let r = integrate_density(domain, &fan(centroid(&core), &core), opts)?;
    let mut est = QuadratureEstimate {
        value: r.value,
        error_bound: r.error,
        depth: r.depth,
        diverged: false,
    };
    for i in (0..n).filter(|i| touching[*i]) {
        let (lad, err, depth) = corner_ladder(
            domain,
            v[i],
            v[(i + 1) % n],
            v[(i + n - 1) % n],
            s,
            opts.ladder_levels,
            opts,
        )?;
        est.value += lad.extrapolated;
        est.error_bound += lad.error + err;
        est.depth = est.depth.max(depth);
        est.diverged |= lad.diverged;
    }
    Ok(est)
}

/// Triangulation of the ring between two homothetic convex polygons. Each
/// edge trapezoid is cut into pieces that grow geometrically away from its
/// ends, so cells near a corner are about as long as the ring is wide.
pub(crate) fn annulus(inner: &[Point2], outer: &[Point2]) -> Vec<[Point2; 3]> {
    let n = inner.len();
    let mut out = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        let width = inner[i].dist(outer[i]).min(inner[j].dist(outer[j]));
        let len = outer[i].dist(outer[j]);
        for w in graded_cuts(width / len).windows(2) {
            let (a, b) = (inner[i].lerp(inner[j], w[0]), inner[i].lerp(inner[j], w[1]));
            let (c, d) = (outer[i].lerp(outer[j], w[0]), outer[i].lerp(outer[j], w[1]));
            out.push([a, c, d]);
            out.push([a, d, b]);
        }
    }
    out
}

/// Breakpoints in `[0, 1]` at `r·2^k` from either end.
pub(crate) fn graded_cuts(r: f64) -> Vec<f64> {
    let mut cuts = vec![0.0, 1.0];
    let mut f = r;
    while f.is_finite() && f > 0.0 && f < 0.25 {
        cuts.push(f);
        cuts.push(1.0 - f);
        f *= 2.0;
    }
    if cuts.len() > 2 {
        cuts.push(0.5);
    }
    cuts.sort_by(f64::total_cmp);
    cuts
}

/// Hilbert area of a convex polygon inside the open domain on the uniform
/// refinement of its centroid fan at `level`. Two domains integrated at the
/// same level share nodes, so their areas compare pointwise.
pub fn polygon_area_fixed(domain: &ConvexDomain, vertices: &[Point2], level: usize) -> Result<f64> {
    let (v, contact) = checked_polygon(domain, vertices)?;
    if contact.any() {
        return Err(Error::InvalidRegion("polygon touches the boundary".into()));
    }
    let f = |p: Point2| density_or_nan(domain, p);
    let a = integrate_fixed(&f, &fan(centroid(&v), &v), level);
    if a.is_finite() {
        Ok(a)
    } else {
        Err(Error::RegionOutsideDomain)
    }
}

/// Panel length and node count of the radial Gauss–Legendre rule.
const RADIAL_PANEL: f64 = 0.5;
const RADIAL_NODES: usize = 8;

/// Periodic trapezoid rule in the angle, doubled from 32 nodes until the
/// relative change drops below `tol / 10` or 1024 nodes are used. Returns
/// the value and the last change.
fn angular_trapezoid<F>(g: F, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut n = 32usize;
    let mut sum = 0.0;
    for i in 0..n {
        sum += g(2.0 * PI * i as f64 / n as f64)?;
    }
    let mut value = sum * 2.0 * PI / n as f64;
    let mut change = f64::INFINITY;
    while n < 1024 {
        for i in 0..n {
            sum += g(2.0 * PI * (2 * i + 1) as f64 / (2 * n) as f64)?;
        }
        n *= 2;
        let next = sum * 2.0 * PI / n as f64;
        change = (next - value).abs();
        value = next;
        if change <= 0.1 * tol * value.abs() {
            break;
        }
    }
    Ok((value, change))
}

fn radial_rule(len: f64) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(RADIAL_NODES);
    let panels = (len / RADIAL_PANEL).ceil().max(1.0) as usize;
    let h = len / panels as f64;
    let mut out = Vec::with_capacity(panels * RADIAL_NODES);
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for (x, w) in &gl {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

fn disk_area(domain: &ConvexDomain, center: Point2, radius: f64, tol: f64) -> Result<QuadratureEstimate> {
    if !(radius >= 0.0) || !center.is_finite() {
        return Err(Error::InvalidRegion("bad disk".into()));
    }
    if radius == 0.0 {
        return Ok(QuadratureEstimate::zero());
    }
    let clear = (0..720)
        .map(|i| {
            let u = Point2::polar(PI * i as f64 / 360.0);
            domain.support(u) - center.dot(u) - radius
        })
        .fold(f64::INFINITY, f64::min);
    if !(clear > 0.0) || !domain.contains(center) {
        return Err(Error::RegionOutsideDomain);
    }
    let nodes = radial_rule(radius);
    let (value, change) = angular_trapezoid(
        |t| {
            let u = Point2::polar(t);
            let mut s = 0.0;
            for (r, w) in &nodes {
                s += w * r * density_tol(domain, center + u * *r, QUADRATURE_DENSITY_TOL)?;
            }
            Ok(s)
        },
        tol,
    )?;
    Ok(QuadratureEstimate {
        value,
        error_bound: change,
        depth: 0,
        diverged: false,
    })
}

pub fn ball_area(domain: &ConvexDomain, q: Point2, radius: f64) -> Result<QuadratureEstimate> {
    ball_area_with(domain, q, radius, 1e-3)
}

/// Hilbert area of the metric ball `{p : d(q, p) < radius}`, in polar
/// coordinates about `q` with the Hilbert radius as the radial variable.
/// Along a ray with boundary distances `t-` behind and `t+` ahead, the point
/// at Hilbert distance `ρ` sits at Euclidean distance
/// `r = (e^{2ρ} − 1) / (1/t- + e^{2ρ}/t+)`.
pub fn ball_area_with(domain: &ConvexDomain, q: Point2, radius: f64, tol: f64) -> Result<QuadratureEstimate> {
    if !domain.contains(q) {
        return Err(Error::PointNotInterior);
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let nodes = radial_rule(radius);
    let (value, change) = angular_trapezoid(
        |t| {
            let u = Point2::polar(t);
            let c = domain.chord(q, u)?;
            let (a, b) = (1.0 / c.t_minus, 1.0 / c.t_plus);
            let mut s = 0.0;
            for (rho, w) in &nodes {
                let e = (2.0 * rho).exp();
                let den = a + e * b;
                let r = (e - 1.0) / den;
                let dr = 2.0 * e * (a + b) / (den * den);
                s += w * r * dr * density_tol(domain, q + u * r, QUADRATURE_DENSITY_TOL)?;
            }
            Ok(s)
        },
        tol,
    )?;
    Ok(QuadratureEstimate {
        value,
        error_bound: change,
        depth: 0,
        diverged: false,
    })
}
