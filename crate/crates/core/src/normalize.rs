//! Projective normal form of triangle-pointed domains and boundary graphs
//! over tangent strips.

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::domain::{ConvexDomain, Line2, Point2, ProjectiveMap};
use crate::error::{Error, Result};
use crate::metric::hilbert_distance;
use crate::numeric::golden_max;
use crate::triangles::IdealTriangle;

/// Orthonormal frame: `origin`, x-axis along `x_axis`, y-axis its
/// counterclockwise rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: Point2,
    pub x_axis: Point2,
}

impl Frame {
    pub fn new(origin: Point2, x_axis: Point2) -> Result<Self> {
        Ok(Self {
            origin,
            x_axis: x_axis.normalized().ok_or(Error::ZeroDirection)?,
        })
    }

    /// Frame at a boundary point with the supporting line as x-axis and the
    /// domain above it.
    pub fn at_boundary(domain: &ConvexDomain, b: Point2) -> Result<Self> {
        let l = domain.supporting_line(b)?;
        let up = -l.normal();
        Self::new(b, Point2::new(up.y, -up.x))
    }

    pub fn y_axis(&self) -> Point2 {
        self.x_axis.perp()
    }

    pub fn to_world(&self, x: f64, y: f64) -> Point2 {
        self.origin + self.x_axis * x + self.y_axis() * y
    }

    pub fn to_local(&self, p: Point2) -> Point2 {
        let d = p - self.origin;
        Point2::new(d.dot(self.x_axis), d.dot(self.y_axis()))
    }
}

/// Samples of the lower boundary `f` over `[-rho, rho]` in a frame whose
/// x-axis supports the domain. Below the cap line `y = s x + b` the boundary
/// is the graph of `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStrip {
    pub frame: Frame,
    pub rho: f64,
    pub s: f64,
    pub b: f64,
    pub values: Vec<f64>,
}

/// Default number of samples of a boundary graph.
pub const GRAPH_SAMPLES: usize = 4097;

impl GraphStrip {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.rho / (self.values.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.rho + i as f64 * self.spacing()
    }

    /// Most negative second difference `f(x-h) + f(x+h) - 2 f(x)`.
    pub fn convexity_defect(&self) -> f64 {
        self.values
            .windows(3)
            .map(|w| w[0] + w[2] - 2.0 * w[1])
            .fold(0.0, f64::min)
    }
}

/// Lower boundary height over `x` in the frame: the largest value of
/// `m x − h(m)` over slopes `m`, where `h(m)` is the support function in the
/// local direction `(m, −1)`.
fn lower_boundary(domain: &ConvexDomain, frame: &Frame, x: f64) -> f64 {
    let (e1, e2) = (frame.x_axis, frame.y_axis());
    let obj = |phi: f64| {
        let (s, c) = phi.sin_cos();
        let d = e1 * s - e2 * c;
        let h = domain.support(d) - d.dot(frame.origin);
        (x * s - h) / c
    };
    let lim = std::f64::consts::FRAC_PI_2 - 1e-9;
    let n = 64;
    let step = 2.0 * lim / n as f64;
    let best = (0..=n)
        .map(|k| -lim + k as f64 * step)
        .max_by(|a, b| obj(*a).total_cmp(&obj(*b)))
        .expect("nonempty");
    let phi = golden_max(obj, (best - step).max(-lim), (best + step).min(lim), 1e-15);
    obj(phi).max(obj(best))
}

pub fn boundary_graph(domain: &ConvexDomain, frame: &Frame, rho: f64) -> Result<GraphStrip> {
    boundary_graph_with(domain, frame, rho, GRAPH_SAMPLES)
}

/// Samples `f(x) = inf { y ≥ 0 : (x, y) in the closure }` on a uniform grid
/// of `n` points over `[-rho, rho]`.
pub fn boundary_graph_with(domain: &ConvexDomain, frame: &Frame, rho: f64, n: usize) -> Result<GraphStrip> {
    if !(rho > 0.0) || n < 3 {
        return Err(Error::InvalidArgument("strip needs rho > 0 and at least 3 samples".into()));
    }
    let (e1, e2) = (frame.x_axis, frame.y_axis());
    let scale = 1.0 + domain.extent();
    let below = domain.support(-e2) + e2.dot(frame.origin);
    if below.abs() > 1e-9 * scale {
        return Err(Error::PreconditionViolated(
            "frame x-axis is not a supporting line with the domain above".into(),
        ));
    }
    let right = domain.support(e1) - e1.dot(frame.origin);
    let left = domain.support(-e1) + e1.dot(frame.origin);
    if !(right > rho && left > rho) {
        return Err(Error::StripTooWide);
    }
    let h = 2.0 * rho / (n - 1) as f64;
    let values: Vec<f64> = (0..n)
        .map(|i| lower_boundary(domain, frame, -rho + i as f64 * h).max(0.0))
        .collect();
    let (fl, fr) = (values[0], values[n - 1]);
    Ok(GraphStrip {
        frame: *frame,
        rho,
        s: (fr - fl) / (2.0 * rho),
        b: 0.5 * (fl + fr),
        values,
    })
}

/// Power law `f ≈ mu |x|^alpha` fitted on the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub mu: f64,
    pub alpha: f64,
    /// Root mean square residual of the log-log fit.
    pub residual: f64,
}

/// Values below this are treated as zero by [`graph_alpha_fit`].
pub const SIGNAL_FLOOR: f64 = 1e-13;

/// Least-squares fit of `ln f` against `ln |x|` over `rho/100 ≤ |x| ≤ rho/3`.
pub fn graph_alpha_fit(strip: &GraphStrip) -> Result<PowerFit> {
    let (lo, hi) = (strip.rho / 100.0, strip.rho / 3.0);
    let pts: Vec<(f64, f64)> = (0..strip.len())
        .filter_map(|i| {
            let x = strip.x(i).abs();
            let f = strip.values[i];
            (x >= lo && x <= hi && f > SIGNAL_FLOOR).then(|| (x.ln(), f.ln()))
        })
        .collect();
    if pts.len() < 8 {
        return Err(Error::InsufficientSignal);
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx).powi(2), a.1 + (p.0 - mx) * (p.1 - my)));
    let alpha = sxy / sxx;
    let c = my - alpha * mx;
    let residual = (pts.iter().map(|p| (p.1 - c - alpha * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(PowerFit {
        mu: c.exp(),
        alpha,
        residual,
    })
}

/// Images of the normal form: `a ↦ (1,0)`, `b ↦ (0,1)`, `c ↦ (1,1)`.
pub const NORMAL_VERTICES: [Point2; 3] = [
    Point2 { x: 1.0, y: 0.0 },
    Point2 { x: 0.0, y: 1.0 },
    Point2 { x: 1.0, y: 1.0 },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationResult {
    pub map: ProjectiveMap,
    pub domain: ConvexDomain,
    pub alpha: f64,
    /// Which input vertex went to each of `(1,0)`, `(0,1)`, `(1,1)`.
    pub labeling: [usize; 3],
    pub vertex_residual: f64,
    pub tangency_residual: f64,
    /// Smallest `alpha` seen so far; for a single result, `alpha` itself.
    pub e_report: f64,
}

const LABELINGS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn hom(p: Point2) -> [f64; 3] {
    [p.x, p.y, 1.0]
}

/// Projective map with `a ↦ (1,0)`, `b ↦ (0,1)`, `c ↦ (1,1)`, `la ↦ {y=0}`
/// and `lb ↦ {x=0}`, as the null vector of the stacked linear constraints on
/// the nine matrix entries.
pub fn solve_normal_map(v: [Point2; 3], la: &Line2, lb: &Line2) -> Result<ProjectiveMap> {
    let mut rows: Vec<[f64; 9]> = Vec::with_capacity(12);
    let put = |r: usize, p: [f64; 3], sign: f64, row: &mut [f64; 9]| {
        for k in 0..3 {
            row[3 * r + k] += sign * p[k];
        }
    };
    // a point p ↦ (x, y, 1)·λ: row_i·p − target_i · row_3·p = 0
    for (p, t) in v.iter().zip(NORMAL_VERTICES) {
        let ph = hom(*p);
        for (r, tr) in [(0, t.x), (1, t.y)] {
            let mut row = [0.0; 9];
            put(r, ph, 1.0, &mut row);
            put(2, ph, -tr, &mut row);
            rows.push(row);
        }
    }
    // the pulled-back covector of {y=0} is row 2; of {x=0} row 1
    for (r, l) in [(1, la), (0, lb)] {
        let c = l.coeffs();
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let mut row = [0.0; 9];
            row[3 * r + i] = c[j];
            row[3 * r + j] = -c[i];
            rows.push(row);
        }
    }
    let a = DMatrix::from_fn(rows.len(), 9, |i, j| rows[i][j]);
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or(Error::SingularConstraints)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|i, j| svd.singular_values[*i].total_cmp(&svd.singular_values[*j]));
    let (s0, s1, smax) = (
        svd.singular_values[order[0]],
        svd.singular_values[order[1]],
        svd.singular_values[order[order.len() - 1]],
    );
    if !(s1 > 1e-10 * smax) || s0 > 1e-6 * smax {
        return Err(Error::SingularConstraints);
    }
    let h = vt.row(order[0]);
    let m = Matrix3::from_fn(|i, j| h[3 * i + j]);
    ProjectiveMap::new(m).map_err(|_| Error::SingularConstraints)
}

fn line_residual(l: Option<Line2>, target: Line2) -> f64 {
    match l {
        Some(l) => l.coeff_distance(&target).min(l.flipped().coeff_distance(&target)),
        None => f64::INFINITY,
    }
}

struct Candidate {
    map: ProjectiveMap,
    alpha: f64,
    labeling: [usize; 3],
    vertex_residual: f64,
    tangency_residual: f64,
}

fn candidate(domain: &ConvexDomain, v: &[Point2; 3], lines: &[Line2; 3], lab: [usize; 3]) -> Result<Candidate> {
    let pts = lab.map(|i| v[i]);
    let map = solve_normal_map(pts, &lines[lab[0]], &lines[lab[1]])?;
    let vertex_residual = pts
        .iter()
        .zip(NORMAL_VERTICES)
        .map(|(p, t)| map.apply(*p).map_or(f64::INFINITY, |q| q.dist(t)))
        .fold(0.0, f64::max);
    let x_axis = Line2::new(0.0, -1.0, 0.0).expect("line");
    let y_axis = Line2::new(-1.0, 0.0, 0.0).expect("line");
    let lc = map.apply_line(&lines[lab[2]]).ok_or(Error::SingularConstraints)?;
    let alpha = lc.u / (lc.u + lc.v);
    let through_c = lc.signed_distance(NORMAL_VERTICES[2]).abs();
    let tangency_residual = line_residual(map.apply_line(&lines[lab[0]]), x_axis)
        .max(line_residual(map.apply_line(&lines[lab[1]]), y_axis))
        .max(through_c);
    let inside = map.apply(domain.center()).ok_or(Error::ImproperImage)?;
    if !(alpha > 0.0 && alpha < 1.0) || !(inside.x > 0.0 && inside.y > 0.0) {
        return Err(Error::ImproperImage);
    }
    Ok(Candidate {
        map,
        alpha,
        labeling: lab,
        vertex_residual,
        tangency_residual,
    })
}

/// Normal form of a triangle-pointed domain. All six labelings are tried;
/// among those with a proper image the smallest `alpha` wins, earlier
/// labelings winning ties.
pub fn normalize_triangle_pointed(domain: &ConvexDomain, tri: &IdealTriangle) -> Result<NormalizationResult> {
    if !tri.valid {
        return Err(Error::InvalidTriangle(
            tri.invalid_reason.clone().unwrap_or_else(|| "invalid".into()),
        ));
    }
    let v = tri.vertices();
    let lines = [
        domain.supporting_line(v[0])?,
        domain.supporting_line(v[1])?,
        domain.supporting_line(v[2])?,
    ];
    let mut best: Option<(Candidate, ConvexDomain)> = None;
    let mut first_err = None;
    for lab in LABELINGS {
        let c = match candidate(domain, &v, &lines, lab) {
            Ok(c) => c,
            Err(e) => {
                first_err.get_or_insert(e);
                continue;
            }
        };
        if best.as_ref().is_some_and(|(b, _)| c.alpha >= b.alpha - 1e-12) {
            continue;
        }
        match domain.projective_image(&c.map) {
            Ok(img) => best = Some((c, img)),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let (c, img) = best.ok_or(first_err.unwrap_or(Error::SingularConstraints))?;
    Ok(NormalizationResult {
        map: c.map,
        domain: img,
        alpha: c.alpha,
        labeling: c.labeling,
        vertex_residual: c.vertex_residual,
        tangency_residual: c.tangency_residual,
        e_report: c.alpha,
    })
}

/// Smallest `alpha` over a batch, written into every result.
pub fn report_batch(results: &mut [NormalizationResult]) -> Option<f64> {
    let e = results.iter().map(|r| r.alpha).fold(f64::INFINITY, f64::min);
    if !e.is_finite() {
        return None;
    }
    for r in results.iter_mut() {
        r.e_report = e;
    }
    Some(e)
}

/// Largest change of Hilbert distance under the normalizing map among the
/// side midpoints and the centroid of the triangle.
pub fn isometry_defect(domain: &ConvexDomain, tri: &IdealTriangle, res: &NormalizationResult) -> Result<f64> {
    let v = tri.vertices();
    let pts = [
        v[0].lerp(v[1], 0.5),
        v[1].lerp(v[2], 0.5),
        v[2].lerp(v[0], 0.5),
        (v[0] + v[1] + v[2]) * (1.0 / 3.0),
    ];
    let mut worst = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d0 = hilbert_distance(domain, pts[i], pts[j])?;
            let (p, q) = (
                res.map.apply(pts[i]).ok_or(Error::ImproperImage)?,
                res.map.apply(pts[j]).ok_or(Error::ImproperImage)?,
            );
            let d1 = hilbert_distance(&res.domain, p, q)?;
            worst = worst.max((d0 - d1).abs());
        }
    }
    Ok(worst)
}

/// Lets callers compare against a hand-built map: the unique `w` with
/// `w·â = ℓb(a)/ℓb(c)`, `w·b̂ = ℓa(b)/ℓa(c)`, `w·ĉ = 1`, giving rows
/// `ℓb/ℓb(c)`, `ℓa/ℓa(c)`, `w`.
pub fn closed_form_normal_map(v: [Point2; 3], la: &Line2, lb: &Line2) -> Result<ProjectiveMap> {
    let ev = |l: &Line2, p: Point2| l.signed_distance(p);
    let (la_c, lb_c) = (ev(la, v[2]), ev(lb, v[2]));
    let m = Matrix3::from_rows(&[
        Vector3::from(hom(v[0])).transpose(),
        Vector3::from(hom(v[1])).transpose(),
        Vector3::from(hom(v[2])).transpose(),
    ]);
    let rhs = Vector3::new(ev(lb, v[0]) / lb_c, ev(la, v[1]) / la_c, 1.0);
    let w = m.lu().solve(&rhs).ok_or(Error::SingularConstraints)?;
    let r1 = Vector3::from(la.coeffs()) / la_c;
    let r0 = Vector3::from(lb.coeffs()) / lb_c;
    ProjectiveMap::new(Matrix3::from_rows(&[r0.transpose(), r1.transpose(), w.transpose()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangles::{ideal_triangle_area, ideal_triangle_from_points, make_ideal_triangle};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn disk_bottom() -> (ConvexDomain, Frame) {
        let d = ConvexDomain::unit_disk();
        let f = Frame::at_boundary(&d, Point2::new(0.0, -1.0)).unwrap();
        (d, f)
    }

    #[test]
    fn frame_at_the_disk_bottom_is_standard() {
        let (_, f) = disk_bottom();
        assert!(f.x_axis.dist(Point2::new(1.0, 0.0)) < 1e-15);
        assert!(f.y_axis().dist(Point2::new(0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn disk_graph_is_a_circle() {
        let (d, f) = disk_bottom();
        let g = boundary_graph(&d, &f, 0.5).unwrap();
        assert_eq!(g.len(), GRAPH_SAMPLES);
        for i in 0..g.len() {
            let x = g.x(i);
            assert!((g.values[i] - (1.0 - (1.0 - x * x).sqrt())).abs() < 1e-9);
        }
        assert!((g.values[g.len() - 1] - 0.13397).abs() < 1e-5);
        assert_eq!(g.values[g.len() / 2], 0.0);
        assert!(g.convexity_defect() >= -1e-12);
        assert!(g.b > 0.0 && g.s.abs() < 1e-12);
    }

    #[test]
    fn four_ball_graph() {
        let d = ConvexDomain::unit_pball(4.0).unwrap();
        let f = Frame::at_boundary(&d, Point2::new(0.0, -1.0)).unwrap();
        let g = boundary_graph(&d, &f, 0.5).unwrap();
        for i in 0..g.len() {
            let x: f64 = g.x(i);
            assert!((g.values[i] - (1.0 - (1.0 - x.powi(4)).powf(0.25))).abs() < 1e-9);
        }
        assert!((g.values[g.len() - 1] - 0.016005).abs() < 1e-6);
        let fit = graph_alpha_fit(&g).unwrap();
        assert!((fit.alpha - 4.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn circle_fit_is_quadratic() {
        let (d, f) = disk_bottom();
        let fit = graph_alpha_fit(&boundary_graph(&d, &f, 0.5).unwrap()).unwrap();
        assert!((fit.alpha - 2.0).abs() < 0.05);
        assert!((fit.mu - 0.5).abs() < 0.05);
    }

    #[test]
    fn flat_edges_have_no_signal() {
        let sq = ConvexDomain::unit_square();
        let f = Frame::at_boundary(&sq, Point2::new(0.5, 0.0)).unwrap();
        let g = boundary_graph(&sq, &f, 0.3).unwrap();
        assert!(g.values.iter().all(|v| *v == 0.0));
        assert_eq!(graph_alpha_fit(&g).unwrap_err(), Error::InsufficientSignal);
    }

    #[test]
    fn strip_must_fit() {
        let (d, f) = disk_bottom();
        assert_eq!(boundary_graph(&d, &f, 1.0).unwrap_err(), Error::StripTooWide);
        let tilted = Frame::new(Point2::new(0.0, -1.0), Point2::new(1.0, 0.3)).unwrap();
        assert!(matches!(
            boundary_graph(&d, &tilted, 0.5),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn symmetric_disk_triangle_has_alpha_half() {
        let d = ConvexDomain::unit_disk();
        let t = make_ideal_triangle(&d, PI / 2.0, 7.0 * PI / 6.0, 11.0 * PI / 6.0).unwrap();
        let r = normalize_triangle_pointed(&d, &t).unwrap();
        assert!((r.alpha - 0.5).abs() < 1e-9);
        assert!(r.vertex_residual < 1e-9 && r.tangency_residual < 1e-9);
        assert!(isometry_defect(&d, &t, &r).unwrap() < 1e-6);
    }

    #[test]
    fn normal_form_is_a_fixed_point() {
        let d = ConvexDomain::ellipse(Point2::new(0.2, -0.1), 1.4, 0.8, 0.4).unwrap();
        let t = make_ideal_triangle(&d, 0.2, 2.5, 4.0).unwrap();
        let r = normalize_triangle_pointed(&d, &t).unwrap();
        let t2 = ideal_triangle_from_points(&r.domain, NORMAL_VERTICES, [0.0; 3]).unwrap();
        assert!(t2.valid);
        let r2 = normalize_triangle_pointed(&r.domain, &t2).unwrap();
        assert!(r2.map.distance(&ProjectiveMap::identity()) < 1e-8);
        assert!((r2.alpha - r.alpha).abs() < 1e-9);
    }

    #[test]
    fn area_survives_normalization() {
        let d = ConvexDomain::unit_pball(3.0).unwrap();
        let t = make_ideal_triangle(&d, 0.4, 2.3, 4.1).unwrap();
        let r = normalize_triangle_pointed(&d, &t).unwrap();
        let t2 = ideal_triangle_from_points(&r.domain, NORMAL_VERTICES, [0.0; 3]).unwrap();
        let a = ideal_triangle_area(&d, &t, 1e-3).unwrap().value;
        let b = ideal_triangle_area(&r.domain, &t2, 1e-3).unwrap().value;
        assert!((a - b).abs() < 0.01 * a, "{a} {b}");
    }

    #[test]
    fn side_in_boundary_is_rejected() {
        let sq = ConvexDomain::unit_square();
        let t = make_ideal_triangle(&sq, 0.05, 0.2, 0.6).unwrap();
        assert!(matches!(normalize_triangle_pointed(&sq, &t), Err(Error::InvalidTriangle(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn svd_matches_closed_form(p in 1.5f64..8.0, t in proptest::array::uniform3(0.0f64..6.28)) {
            let d = ConvexDomain::unit_pball(p).unwrap();
            let Ok(tri) = make_ideal_triangle(&d, t[0], t[1], t[2]) else { return Ok(()) };
            prop_assume!(tri.valid);
            let v = tri.vertices();
            prop_assume!(v[0].dist(v[1]).min(v[1].dist(v[2])).min(v[2].dist(v[0])) > 0.1);
            let la = d.supporting_line(v[0]).unwrap();
            let lb = d.supporting_line(v[1]).unwrap();
            let h = solve_normal_map(v, &la, &lb).unwrap();
            let oracle = closed_form_normal_map(v, &la, &lb).unwrap();
            prop_assert!(h.distance(&oracle) < 1e-8);
            let r = normalize_triangle_pointed(&d, &tri).unwrap();
            prop_assert!(r.alpha > 0.0 && r.alpha <= 0.5 + 1e-12);
            prop_assert!(r.vertex_residual < 1e-8 && r.tangency_residual < 1e-8);
        }
    }
}
