//! Hilbert distance, Finsler norm and Gromov hyperbolicity estimators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{ConvexDomain, Point2};
use crate::error::{Error, Result};
use crate::numeric::{golden_max, scan_then_golden};
use crate::sampling::{self, SamplerConfig};

/// Points closer than this are treated as coincident.
pub const COINCIDENCE: f64 = 1e-14;

/// Grid size of the pre-scan in [`point_to_segment_distance`].
pub const SEGMENT_SCAN: usize = 256;

/// Samples per side in the outer maximization of [`triangle_thinness`].
const SIDE_SCAN: usize = 33;

pub fn hilbert_distance(domain: &ConvexDomain, p: Point2, q: Point2) -> Result<f64> {
    if !domain.contains(p) || !domain.contains(q) {
        return Err(Error::PointNotInterior);
    }
    let s = p.dist(q);
    if s < COINCIDENCE {
        return Ok(0.0);
    }
    let c = domain.chord(p, q - p)?;
    if s >= c.t_plus {
        return Err(Error::PointNotInterior);
    }
    // ln[a,p,q,b] = ln(1 + s/t-) - ln(1 - s/t+)
    Ok(0.5 * ((s / c.t_minus).ln_1p() - (-s / c.t_plus).ln_1p()))
}

pub fn finsler_norm(domain: &ConvexDomain, p: Point2, v: Point2) -> Result<f64> {
    if !domain.contains(p) {
        return Err(Error::PointNotInterior);
    }
    let n = v.norm();
    if n == 0.0 {
        return Ok(0.0);
    }
    let c = domain.chord(p, v)?;
    Ok(0.5 * n * (1.0 / c.t_minus + 1.0 / c.t_plus))
}

/// `(x · y)_w = ½ (d(x,w) + d(y,w) − d(x,y))`.
pub fn gromov_product(domain: &ConvexDomain, x: Point2, y: Point2, w: Point2) -> Result<f64> {
    let xw = hilbert_distance(domain, x, w)?;
    let yw = hilbert_distance(domain, y, w)?;
    let xy = hilbert_distance(domain, x, y)?;
    Ok(0.5 * (xw + yw - xy))
}

/// Four-point defect of a quadruple: half the gap between the two largest of
/// the three pairwise distance sums. Equals the maximum over labelings of
/// `min((x·y)_w, (y·z)_w) − (x·z)_w`, clamped at zero.
pub fn four_point_defect(domain: &ConvexDomain, q: &[Point2; 4]) -> Result<f64> {
    let d = |i: usize, j: usize| hilbert_distance(domain, q[i], q[j]);
    let mut s = [
        d(0, 1)? + d(2, 3)?,
        d(0, 2)? + d(1, 3)?,
        d(0, 3)? + d(1, 2)?,
    ];
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((0.5 * (s[0] - s[1])).max(0.0))
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    let ab = b - a;
    let l2 = ab.norm_sq();
    if l2 == 0.0 {
        return p.dist(a) < COINCIDENCE;
    }
    let s = (p - a).dot(ab) / l2;
    (0.0..=1.0).contains(&s) && (p - a).cross(ab).abs() <= COINCIDENCE * l2.sqrt()
}

/// `min_{s in [0,1]} d(p, a + s(b − a))`, by a uniform pre-scan followed by
/// golden-section refinement. The endpoints may lie on the boundary.
pub fn point_to_segment_distance(
    domain: &ConvexDomain,
    p: Point2,
    a: Point2,
    b: Point2,
) -> Result<f64> {
    if !domain.contains(p) {
        return Err(Error::PointNotInterior);
    }
    let tol = 1e-9 * (1.0 + domain.extent());
    let in_closure = |x: Point2| domain.boundary_residual(x) <= tol;
    if !in_closure(a) || !in_closure(b) || !domain.contains(a.lerp(b, 0.5)) {
        return Err(Error::SegmentNotInDomain);
    }
    if on_segment(p, a, b) {
        return Ok(0.0);
    }
    let f = |s: f64| hilbert_distance(domain, p, a.lerp(b, s)).unwrap_or(f64::INFINITY);
    let (_, v) = scan_then_golden(f, 0.0, 1.0, SEGMENT_SCAN, 1e-12);
    Ok(v)
}

/// Where an estimate was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    None,
    Quadruple { points: [Point2; 4] },
    Triangle {
        vertices: [Point2; 3],
        /// Side `i` joins vertices `i` and `i + 1`.
        side: usize,
        point: Point2,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta_hat: f64,
    pub witness: Witness,
    pub samples_used: usize,
}

impl DeltaEstimate {
    /// Recomputes the estimate from its witness alone.
    pub fn reevaluate(&self, domain: &ConvexDomain) -> Result<f64> {
        match &self.witness {
            Witness::None => Ok(0.0),
            Witness::Quadruple { points } => four_point_defect(domain, points),
            Witness::Triangle {
                vertices,
                side,
                point,
            } => side_point_thinness(domain, vertices, *side, *point),
        }
    }
}

fn argmax_by_value<T: Clone>(items: Vec<(f64, T)>) -> Option<(usize, f64, T)> {
    // first maximal element, so ties resolve to the earliest sample
    let mut best: Option<(usize, f64, T)> = None;
    for (i, (v, t)) in items.into_iter().enumerate() {
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((i, v, t));
        }
    }
    best
}

/// Four-point estimate over `cfg.budget` sampled quadruples.
pub fn delta_four_point(domain: &ConvexDomain, cfg: &SamplerConfig) -> DeltaEstimate {
    let quads = sampling::quadruples(domain, cfg);
    delta_four_point_over(domain, &quads)
}

/// Four-point estimate over an explicit sample set.
pub fn delta_four_point_over(domain: &ConvexDomain, quads: &[[Point2; 4]]) -> DeltaEstimate {
    let vals: Vec<(f64, [Point2; 4])> = quads
        .par_iter()
        .map(|q| (four_point_defect(domain, q).unwrap_or(0.0), *q))
        .collect();
    match argmax_by_value(vals) {
        Some((_, v, q)) if v > 0.0 => DeltaEstimate {
            delta_hat: v,
            witness: Witness::Quadruple { points: q },
            samples_used: quads.len(),
        },
        _ => DeltaEstimate {
            delta_hat: 0.0,
            witness: Witness::None,
            samples_used: quads.len(),
        },
    }
}

fn side_point_thinness(
    domain: &ConvexDomain,
    v: &[Point2; 3],
    side: usize,
    p: Point2,
) -> Result<f64> {
    let j = (side + 1) % 3;
    let k = (side + 2) % 3;
    let d1 = point_to_segment_distance(domain, p, v[j], v[k])?;
    let d2 = point_to_segment_distance(domain, p, v[k], v[side])?;
    Ok(d1.min(d2))
}

/// Thinness of the geodesic triangle with straight sides: the largest
/// distance from a point of one side to the union of the other two.
/// Returns `(value, side, point)`.
pub fn triangle_thinness(domain: &ConvexDomain, v: &[Point2; 3]) -> Result<(f64, usize, Point2)> {
    for p in v {
        if !domain.contains(*p) {
            return Err(Error::PointNotInterior);
        }
    }
    let scale = v[1].dist(v[0]).max(v[2].dist(v[0])).max(1e-300);
    if (v[1] - v[0]).cross(v[2] - v[0]).abs() <= 1e-14 * scale * scale {
        return Ok((0.0, 0, v[0]));
    }
    let mut best = (0.0, 0, v[0]);
    for side in 0..3 {
        let a = v[side];
        let b = v[(side + 1) % 3];
        let g = |s: f64| side_point_thinness(domain, v, side, a.lerp(b, s)).unwrap_or(0.0);
        let h = 1.0 / (SIDE_SCAN - 1) as f64;
        let (mut bi, mut bv) = (0, f64::NEG_INFINITY);
        for i in 0..SIDE_SCAN {
            let val = g(i as f64 * h);
            if val > bv {
                bv = val;
                bi = i;
            }
        }
        let lo = ((bi as f64 - 1.0) * h).max(0.0);
        let hi = ((bi as f64 + 1.0) * h).min(1.0);
        let s = golden_max(g, lo, hi, 1e-10);
        let (s, val) = if g(s) >= bv { (s, g(s)) } else { (bi as f64 * h, bv) };
        if val > best.0 {
            best = (val, side, a.lerp(b, s));
        }
    }
    Ok(best)
}

/// Thin-triangle estimate over `cfg.budget` sampled triangles.
pub fn delta_thin(domain: &ConvexDomain, cfg: &SamplerConfig) -> DeltaEstimate {
    let tris = sampling::geodesic_triangles(domain, cfg);
    delta_thin_over(domain, &tris)
}

pub fn delta_thin_over(domain: &ConvexDomain, tris: &[[Point2; 3]]) -> DeltaEstimate {
    let vals: Vec<(f64, ([Point2; 3], usize, Point2))> = tris
        .par_iter()
        .map(|t| match triangle_thinness(domain, t) {
            Ok((v, side, p)) => (v, (*t, side, p)),
            Err(_) => (0.0, (*t, 0, t[0])),
        })
        .collect();
    match argmax_by_value(vals) {
        Some((_, v, (vertices, side, point))) if v > 0.0 => DeltaEstimate {
            delta_hat: v,
            witness: Witness::Triangle {
                vertices,
                side,
                point,
            },
            samples_used: tris.len(),
        },
        _ => DeltaEstimate {
            delta_hat: 0.0,
            witness: Witness::None,
            samples_used: tris.len(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ProjectiveMap;
    use proptest::prelude::*;

    fn disk() -> ConvexDomain {
        ConvexDomain::unit_disk()
    }

    /// Hyperbolic distance in the Klein model.
    fn klein(p: Point2, q: Point2) -> f64 {
        let num = 1.0 - p.dot(q);
        let den = ((1.0 - p.norm_sq()) * (1.0 - q.norm_sq())).sqrt();
        (num / den).max(1.0).acosh()
    }

    #[test]
    fn disk_distances() {
        let d = disk();
        let v = hilbert_distance(&d, Point2::ORIGIN, Point2::new(0.5, 0.0)).unwrap();
        assert!((v - 0.5 * 3f64.ln()).abs() < 1e-15);
        let v = hilbert_distance(&d, Point2::ORIGIN, Point2::new(0.9, 0.0)).unwrap();
        assert!((v - 0.9f64.atanh()).abs() < 1e-12);
        assert!((v - 1.472219).abs() < 1e-6);
        let p = Point2::new(0.2, 0.3);
        assert_eq!(hilbert_distance(&d, p, p).unwrap(), 0.0);
        assert_eq!(
            hilbert_distance(&d, p, Point2::new(1.5, 0.0)).unwrap_err(),
            Error::PointNotInterior
        );
    }

    #[test]
    fn disk_finsler() {
        let d = disk();
        let f = finsler_norm(&d, Point2::ORIGIN, Point2::new(1.0, 0.0)).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        let f = finsler_norm(&d, Point2::new(0.5, 0.0), Point2::new(1.0, 0.0)).unwrap();
        assert!((f - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(finsler_norm(&d, Point2::ORIGIN, Point2::ORIGIN).unwrap(), 0.0);
    }

    #[test]
    fn gromov_product_cases() {
        let d = disk();
        let x = Point2::new(0.5, 0.0);
        let y = Point2::new(-0.5, 0.0);
        let w = Point2::new(0.0, 0.5);
        let g = gromov_product(&d, x, x, w).unwrap();
        assert!((g - hilbert_distance(&d, x, w).unwrap()).abs() < 1e-14);
        assert!(gromov_product(&d, x, y, x).unwrap().abs() < 1e-14);
        let oracle = 0.5 * (klein(x, w) + klein(y, w) - klein(x, y));
        assert!((gromov_product(&d, x, y, w).unwrap() - oracle).abs() < 1e-9);
    }

    fn brute_four_point(d: &ConvexDomain, q: &[Point2; 4]) -> f64 {
        let gp = |a: usize, b: usize, w: usize| gromov_product(d, q[a], q[b], q[w]).unwrap();
        let mut best = 0.0f64;
        let perms = [
            [0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3], [0, 2, 3, 1], [0, 3, 1, 2], [0, 3, 2, 1],
            [1, 0, 2, 3], [1, 0, 3, 2], [1, 2, 0, 3], [1, 2, 3, 0], [1, 3, 0, 2], [1, 3, 2, 0],
            [2, 0, 1, 3], [2, 0, 3, 1], [2, 1, 0, 3], [2, 1, 3, 0], [2, 3, 0, 1], [2, 3, 1, 0],
            [3, 0, 1, 2], [3, 0, 2, 1], [3, 1, 0, 2], [3, 1, 2, 0], [3, 2, 0, 1], [3, 2, 1, 0],
        ];
        for [x, y, z, w] in perms {
            best = best.max(gp(x, y, w).min(gp(y, z, w)) - gp(x, z, w));
        }
        best
    }

    #[test]
    fn four_point_matches_brute_force_orderings() {
        let d = ConvexDomain::unit_pball(3.0).unwrap();
        let quads = sampling::quadruples(&d, &SamplerConfig::new(200, 3, 1e-4));
        for q in &quads {
            let a = four_point_defect(&d, q).unwrap();
            let b = brute_four_point(&d, q);
            assert!((a - b).abs() < 1e-9 * (1.0 + a), "{a} {b}");
        }
    }

    #[test]
    fn repeated_points_contribute_nothing() {
        let d = disk();
        let p = Point2::new(0.3, 0.1);
        let q = Point2::new(-0.6, 0.2);
        assert_eq!(four_point_defect(&d, &[p, p, q, q]).unwrap(), 0.0);
        assert_eq!(four_point_defect(&d, &[p, p, p, p]).unwrap(), 0.0);
    }

    #[test]
    fn disk_four_point_is_bounded_and_equals_brute_force() {
        let d = disk();
        let cfg = SamplerConfig::new(100_000, 11, 1e-6);
        let quads = sampling::quadruples(&d, &cfg);
        let est = delta_four_point_over(&d, &quads);
        let brute = quads
            .iter()
            .map(|q| four_point_defect(&d, q).unwrap())
            .fold(0.0, f64::max);
        assert_eq!(est.delta_hat, brute);
        // four-point constant of the hyperbolic plane is ln 2
        assert!(est.delta_hat <= 2f64.ln() + 1e-9, "{}", est.delta_hat);
        assert!((est.reevaluate(&d).unwrap() - est.delta_hat).abs() < 1e-9);
    }

    #[test]
    fn square_four_point_exceeds_three() {
        let d = ConvexDomain::unit_square();
        let est = delta_four_point(&d, &SamplerConfig::new(20_000, 0, 1e-6));
        assert!(est.delta_hat > 3.0, "{}", est.delta_hat);
        assert!((est.reevaluate(&d).unwrap() - est.delta_hat).abs() < 1e-9);
    }

    #[test]
    fn estimators_are_monotone_in_budget() {
        let d = ConvexDomain::unit_pball(4.0).unwrap();
        let mut last = 0.0;
        for n in [10, 40, 160] {
            let e = delta_four_point(&d, &SamplerConfig::new(n, 5, 1e-5)).delta_hat;
            assert!(e >= last);
            last = e;
        }
        let mut last = 0.0;
        for n in [2, 6, 12] {
            let e = delta_thin(&d, &SamplerConfig::new(n, 5, 1e-4)).delta_hat;
            assert!(e >= last);
            last = e;
        }
    }

    #[test]
    fn point_to_segment_cases() {
        let d = disk();
        let a = Point2::new(-0.5, 0.0);
        let b = Point2::new(0.5, 0.0);
        assert_eq!(point_to_segment_distance(&d, Point2::new(0.1, 0.0), a, b).unwrap(), 0.0);
        // the chord is a geodesic of the hyperbolic plane; the closest point
        // of the full geodesic to (0, y) is the origin
        let p = Point2::new(0.0, 0.5);
        let v = point_to_segment_distance(&d, p, a, b).unwrap();
        assert!((v - klein(p, Point2::ORIGIN)).abs() < 1e-9);
        let grid = (0..=10_000)
            .map(|i| klein(p, a.lerp(b, i as f64 / 10_000.0)))
            .fold(f64::INFINITY, f64::min);
        assert!((v - grid).abs() < 1e-6);
        let mirrored = point_to_segment_distance(
            &d,
            Point2::new(-0.3, 0.4),
            Point2::new(0.2, -0.1),
            Point2::new(-0.7, 0.1),
        )
        .unwrap();
        let original = point_to_segment_distance(
            &d,
            Point2::new(0.3, 0.4),
            Point2::new(-0.2, -0.1),
            Point2::new(0.7, 0.1),
        )
        .unwrap();
        assert!((mirrored - original).abs() < 1e-9);
        assert_eq!(
            point_to_segment_distance(&d, p, a, Point2::new(2.0, 0.0)).unwrap_err(),
            Error::SegmentNotInDomain
        );
    }

    #[test]
    fn degenerate_triangle_is_thin() {
        let d = disk();
        let t = [Point2::new(-0.5, 0.0), Point2::new(0.1, 0.0), Point2::new(0.6, 0.0)];
        assert_eq!(triangle_thinness(&d, &t).unwrap().0, 0.0);
    }

    /// Exact hyperbolic distance from `p` to the Klein-model segment `[a, b]`.
    fn klein_to_segment(p: Point2, a: Point2, b: Point2) -> f64 {
        let lift = |x: Point2| [x.x, x.y, 1.0];
        let mink = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] - u[2] * v[2];
        let (pa, pb) = (lift(a), lift(b));
        // Minkowski normal of the plane through the origin, a and b
        let n = [
            pa[1] * pb[2] - pa[2] * pb[1],
            pa[2] * pb[0] - pa[0] * pb[2],
            -(pa[0] * pb[1] - pa[1] * pb[0]),
        ];
        let nn = mink(n, n).sqrt();
        let n = n.map(|c| c / nn);
        let pp = lift(p);
        let k = mink(pp, n);
        let f = [pp[0] - k * n[0], pp[1] - k * n[1], pp[2] - k * n[2]];
        let foot = Point2::new(f[0] / f[2], f[1] / f[2]);
        let s = (foot - a).dot(b - a) / (b - a).norm_sq();
        if (0.0..=1.0).contains(&s) {
            klein(p, foot)
        } else {
            klein(p, a).min(klein(p, b))
        }
    }

    #[test]
    fn klein_segment_oracle_agrees_with_scan() {
        let (a, b) = (Point2::new(-0.5, 0.0), Point2::new(0.5, 0.0));
        let p = Point2::new(0.2, 0.6);
        let scan = (0..=100_000)
            .map(|i| klein(p, a.lerp(b, i as f64 / 100_000.0)))
            .fold(f64::INFINITY, f64::min);
        assert!((klein_to_segment(p, a, b) - scan).abs() < 1e-8);
    }

    #[test]
    fn disk_thinness_matches_dense_grid_and_stays_below_ideal_bound() {
        let d = disk();
        let cfg = SamplerConfig::new(6, 2, 1e-4);
        let est = delta_thin(&d, &cfg);
        let ideal = (1.0 + 2f64.sqrt()).ln();
        assert!(est.delta_hat > 0.5 && est.delta_hat < ideal, "{}", est.delta_hat);
        for t in sampling::geodesic_triangles(&d, &cfg) {
            let (v, _, _) = triangle_thinness(&d, &t).unwrap();
            let mut grid = 0.0f64;
            for side in 0..3 {
                let (a, b) = (t[side], t[(side + 1) % 3]);
                let (j, k) = ((side + 1) % 3, (side + 2) % 3);
                let g = |s: f64| {
                    let p = a.lerp(b, s);
                    klein_to_segment(p, t[j], t[k]).min(klein_to_segment(p, t[k], t[side]))
                };
                let n = 4000;
                let h = 1.0 / n as f64;
                let best = (0..=n).max_by(|x, y| g(*x as f64 * h).total_cmp(&g(*y as f64 * h))).unwrap();
                let lo = (best as f64 - 1.0).max(0.0) * h;
                let fine = (0..=n)
                    .map(|i| g((lo + 2.0 * h * i as f64 / n as f64).min(1.0)))
                    .fold(0.0, f64::max);
                grid = grid.max(fine);
            }
            assert!((v - grid).abs() < 1e-6, "{v} {grid}");
        }
        assert!((est.reevaluate(&d).unwrap() - est.delta_hat).abs() < 1e-9);
    }

    #[test]
    fn square_thin_triangles_near_corners_are_fat() {
        let d = ConvexDomain::unit_square();
        let est = delta_thin(&d, &SamplerConfig::new(4, 0, 1e-6));
        assert!(est.delta_hat > 2.0, "{}", est.delta_hat);
    }

    fn test_domains() -> Vec<ConvexDomain> {
        vec![
            disk(),
            ConvexDomain::unit_pball(4.0).unwrap(),
            ConvexDomain::unit_square(),
            ConvexDomain::ellipse(Point2::new(0.1, 0.0), 1.5, 0.8, 0.3).unwrap(),
        ]
    }

    fn pt(d: &ConvexDomain, t: f64, r: f64) -> Point2 {
        d.center().lerp(d.boundary_point(t * d.param_period()), r)
    }

    proptest! {
        #[test]
        fn metric_axioms(
            idx in 0usize..4,
            t in proptest::array::uniform3(0.0f64..1.0),
            r in proptest::array::uniform3(0.0f64..0.99)
        ) {
            let d = &test_domains()[idx];
            let [x, y, z] = [pt(d, t[0], r[0]), pt(d, t[1], r[1]), pt(d, t[2], r[2])];
            let dxy = hilbert_distance(d, x, y).unwrap();
            let dyx = hilbert_distance(d, y, x).unwrap();
            let dyz = hilbert_distance(d, y, z).unwrap();
            let dxz = hilbert_distance(d, x, z).unwrap();
            prop_assert!((dxy - dyx).abs() <= 1e-10 * (1.0 + dxy));
            prop_assert!(dxz <= dxy + dyz + 1e-9);
            prop_assert_eq!(dxy == 0.0, x.dist(y) < COINCIDENCE);
        }

        #[test]
        fn finsler_is_homogeneous(
            idx in 0usize..4, t in 0.0f64..1.0, r in 0.0f64..0.99,
            ang in 0.0f64..6.28, k in 0.01f64..100.0
        ) {
            let d = &test_domains()[idx];
            let p = pt(d, t, r);
            let v = Point2::polar(ang);
            let a = finsler_norm(d, p, v * k).unwrap();
            let b = finsler_norm(d, p, v).unwrap();
            prop_assert!((a - k * b).abs() <= 1e-12 * a);
        }

        #[test]
        fn distance_is_projectively_invariant(
            idx in 0usize..4,
            e in proptest::array::uniform6(-0.3f64..0.3),
            t in proptest::array::uniform2(0.0f64..1.0),
            r in proptest::array::uniform2(0.0f64..0.999)
        ) {
            let d = &test_domains()[idx];
            let h = ProjectiveMap::from_rows([
                [1.0 + e[0], e[1], e[2]],
                [e[3], 1.0 + e[4], e[5]],
                [0.3 * e[1], 0.3 * e[3], 1.0],
            ]).unwrap();
            let Ok(img) = d.projective_image(&h) else { return Ok(()); };
            let (p, q) = (pt(d, t[0], r[0]), pt(d, t[1], r[1]));
            let a = hilbert_distance(d, p, q).unwrap();
            let b = hilbert_distance(&img, h.apply(p).unwrap(), h.apply(q).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a));
        }

        #[test]
        fn disk_distance_is_klein(
            t in proptest::array::uniform2(0.0f64..6.3),
            r in proptest::array::uniform2(0.0f64..0.999)
        ) {
            let d = disk();
            let p = Point2::polar(t[0]) * r[0];
            let q = Point2::polar(t[1]) * r[1];
            prop_assert!((hilbert_distance(&d, p, q).unwrap() - klein(p, q)).abs() < 1e-9);
        }

        #[test]
        fn nested_domains_compare(
            s in 1.01f64..3.0, t in proptest::array::uniform2(0.0f64..1.0),
            r in proptest::array::uniform2(0.0f64..0.99), ang in 0.0f64..6.28
        ) {
            let a = ConvexDomain::unit_pball(4.0).unwrap();
            let b = ConvexDomain::regular_polygon(8, Point2::ORIGIN, s * 1.5, 0.0).unwrap();
            let (p, q) = (pt(&a, t[0], r[0]), pt(&a, t[1], r[1]));
            let v = Point2::polar(ang);
            prop_assert!(finsler_norm(&b, p, v).unwrap() <= finsler_norm(&a, p, v).unwrap() + 1e-9);
            prop_assert!(hilbert_distance(&b, p, q).unwrap() <= hilbert_distance(&a, p, q).unwrap() + 1e-9);
        }
    }
}
