//! Ideal triangles: construction, decomposition into a hexagon and three
//! corners, and Hilbert areas with divergence detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{ConvexDomain, Point2, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::measure::region::{corner_ladder, fan, integrate_density};
use crate::measure::{LadderResult, QuadratureEstimate, RegionOptions};
use crate::sampling::{self, SamplerConfig};

/// Three boundary points and whether their hull is an ideal triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealTriangle {
    pub a: Point2,
    pub b: Point2,
    pub c: Point2,
    pub params: [f64; 3],
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invalid_reason: Option<String>,
}

impl IdealTriangle {
    pub fn vertices(&self) -> [Point2; 3] {
        [self.a, self.b, self.c]
    }

    fn require_valid(&self) -> Result<()> {
        if self.valid {
            Ok(())
        } else {
            Err(Error::InvalidTriangle(
                self.invalid_reason.clone().unwrap_or_else(|| "invalid".into()),
            ))
        }
    }
}

/// Samples per side in the validity check.
const SIDE_SAMPLES: usize = 64;

pub fn make_ideal_triangle(domain: &ConvexDomain, t1: f64, t2: f64, t3: f64) -> Result<IdealTriangle> {
    let params = [t1, t2, t3];
    if params.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("non-finite boundary parameter".into()));
    }
    let [a, b, c] = params.map(|t| domain.boundary_point(t));
    ideal_triangle_from_points(domain, [a, b, c], params)
}

/// Builds an ideal triangle from three points on the boundary.
pub fn ideal_triangle_from_points(
    domain: &ConvexDomain,
    v: [Point2; 3],
    params: [f64; 3],
) -> Result<IdealTriangle> {
    let scale = domain.extent().max(f64::MIN_POSITIVE);
    let [a, b, c] = v;
    let min_side = a.dist(b).min(b.dist(c)).min(c.dist(a));
    if min_side <= 1e-12 * scale || (b - a).cross(c - a).abs() <= 1e-12 * scale * scale {
        return Err(Error::DegenerateVertices);
    }
    let mut tri = IdealTriangle {
        a,
        b,
        c,
        params,
        valid: true,
        invalid_reason: None,
    };
    let on_boundary = v
        .iter()
        .all(|p| domain.boundary_residual(*p).abs() <= BOUNDARY_TOL * (1.0 + scale));
    let reason = if !on_boundary {
        Some("vertex not on the boundary")
    } else {
        side_defect(domain, &v, 1e-12 * (1.0 + scale))
    };
    if let Some(r) = reason {
        tri.valid = false;
        tri.invalid_reason = Some(r.to_string());
    }
    Ok(tri)
}

fn side_defect(domain: &ConvexDomain, v: &[Point2; 3], tiny: f64) -> Option<&'static str> {
    for i in 0..3 {
        let (p, q) = (v[i], v[(i + 1) % 3]);
        let mut worst = f64::NEG_INFINITY;
        for j in 1..SIDE_SAMPLES {
            let r = domain.boundary_residual(p.lerp(q, j as f64 / SIDE_SAMPLES as f64));
            worst = worst.max(r);
        }
        if worst > tiny {
            return Some("side leaves the domain");
        }
        if worst > -tiny {
            return Some("side in boundary");
        }
    }
    None
}

/// Corner triangles cut off by segments parallel to the opposite sides, and
/// the remaining hexagon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerDecomposition {
    pub cut: f64,
    /// `[vertex, cut point toward the next vertex, cut point toward the previous vertex]`.
    pub corners: [[Point2; 3]; 3],
    pub hexagon: [Point2; 6],
}

fn cut_points(v: &[Point2; 3], s: f64) -> [(Point2, Point2); 3] {
    std::array::from_fn(|i| {
        let (p, n, q) = (v[i], v[(i + 1) % 3], v[(i + 2) % 3]);
        (p.lerp(n, s), p.lerp(q, s))
    })
}

/// Cuts each corner at side fraction `s ∈ (0, 1/2)`; larger cuts would
/// overlap.
pub fn corner_decomposition(tri: &IdealTriangle, s: f64) -> Result<CornerDecomposition> {
    tri.require_valid()?;
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::InvalidArgument("cut fraction must lie in (0, 1/2)".into()));
    }
    let v = tri.vertices();
    let cuts = cut_points(&v, s);
    let corners = std::array::from_fn(|i| [v[i], cuts[i].0, cuts[i].1]);
    let hexagon = [
        cuts[0].0,
        cuts[1].1,
        cuts[1].0,
        cuts[2].1,
        cuts[2].0,
        cuts[0].1,
    ];
    Ok(CornerDecomposition {
        cut: s,
        corners,
        hexagon,
    })
}

/// Options for [`ideal_triangle_area_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleAreaOptions {
    pub quadrature: RegionOptions,
    /// Cut fraction separating the hexagon from the corners.
    pub cut: f64,
    /// Number of nested cuts in each corner ladder.
    pub levels: usize,
}

impl Default for TriangleAreaOptions {
    fn default() -> Self {
        Self {
            quadrature: RegionOptions::default(),
            cut: 0.25,
            levels: 12,
        }
    }
}

impl TriangleAreaOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            quadrature: RegionOptions::with_tol(tol),
            ..Self::default()
        }
    }
}

/// Area of an ideal triangle with the hexagon and corner contributions kept
/// apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleArea {
    pub total: QuadratureEstimate,
    pub hexagon: QuadratureEstimate,
    pub corners: [LadderResult; 3],
}

pub fn ideal_triangle_area(domain: &ConvexDomain, tri: &IdealTriangle, tol: f64) -> Result<QuadratureEstimate> {
    Ok(ideal_triangle_area_with(domain, tri, &TriangleAreaOptions::with_tol(tol))?.total)
}

/// Hexagon integrated directly; each corner as a ladder of trapezoids
/// between cuts at fractions `cut·2^{-k}`, summed and extrapolated.
pub fn ideal_triangle_area_with(
    domain: &ConvexDomain,
    tri: &IdealTriangle,
    opts: &TriangleAreaOptions,
) -> Result<TriangleArea> {
    let dec = corner_decomposition(tri, opts.cut)?;
    let q = &opts.quadrature;
    let v = tri.vertices();
    let hex_c = v.iter().fold(Point2::ORIGIN, |s, p| s + *p) * (1.0 / 3.0);
    let hex = integrate_density(domain, &fan(hex_c, &dec.hexagon), q)?;
    let mut depth = hex.depth;
    let corners: Vec<(LadderResult, f64, usize)> = (0..3)
        .into_par_iter()
        .map(|i| corner_ladder(domain, v[i], v[(i + 1) % 3], v[(i + 2) % 3], opts.cut, opts.levels, q))
        .collect::<Result<_>>()?;
    let mut value = hex.value;
    let mut error = hex.error;
    let mut diverged = false;
    for (lad, err, d) in &corners {
        value += lad.extrapolated;
        error += lad.error + err;
        diverged |= lad.diverged;
        depth = depth.max(*d);
    }
    let mut it = corners.into_iter().map(|c| c.0);
    let corners = [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()];
    Ok(TriangleArea {
        total: QuadratureEstimate {
            value,
            error_bound: error,
            depth,
            diverged,
        },
        hexagon: QuadratureEstimate {
            value: hex.value,
            error_bound: hex.error,
            depth: hex.depth,
            diverged: false,
        },
        corners,
    })
}

/// Result of a sampled search for the largest ideal-triangle area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupAreaResult {
    pub best: Option<IdealTriangle>,
    pub best_area: QuadratureEstimate,
    /// Parameters and partial areas of the samples whose corner ladders diverged.
    pub diverged: Vec<([f64; 3], f64)>,
    pub evaluated: usize,
    /// Samples that were degenerate or not ideal triangles.
    pub skipped: usize,
}

/// Maximum of the ideal-triangle area over the sampled parameter triples of
/// [`sampling::ideal_triangle_params`]. Divergent samples take part with
/// their partial sums, which are lower bounds.
pub fn sup_area_search(domain: &ConvexDomain, cfg: &SamplerConfig, opts: &TriangleAreaOptions) -> SupAreaResult {
    let triples = sampling::ideal_triangle_params(domain, cfg);
    sup_area_over(domain, &triples, opts)
}

pub fn sup_area_over(domain: &ConvexDomain, triples: &[[f64; 3]], opts: &TriangleAreaOptions) -> SupAreaResult {
    let results: Vec<Option<(IdealTriangle, QuadratureEstimate)>> = triples
        .par_iter()
        .map(|t| {
            let tri = make_ideal_triangle(domain, t[0], t[1], t[2]).ok()?;
            if !tri.valid {
                return None;
            }
            let a = ideal_triangle_area_with(domain, &tri, opts).ok()?;
            Some((tri, a.total))
        })
        .collect();
    let mut out = SupAreaResult {
        best: None,
        best_area: QuadratureEstimate::zero(),
        diverged: Vec::new(),
        evaluated: 0,
        skipped: 0,
    };
    for r in results {
        let Some((tri, a)) = r else {
            out.skipped += 1;
            continue;
        };
        out.evaluated += 1;
        if a.diverged {
            out.diverged.push((tri.params, a.value));
        }
        if out.best.is_none() || a.value > out.best_area.value {
            out.best_area = a;
            out.best = Some(tri);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{region_area, Region};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    #[test]
    fn construction_rules() {
        let d = ConvexDomain::unit_disk();
        let t = make_ideal_triangle(&d, deg(90.0), deg(210.0), deg(330.0)).unwrap();
        assert!(t.valid);
        assert_eq!(
            make_ideal_triangle(&d, 0.0, 0.0, deg(90.0)).unwrap_err(),
            Error::DegenerateVertices
        );
        let sq = ConvexDomain::unit_square();
        // two points inside the bottom edge, one on the top edge
        let t = make_ideal_triangle(&sq, 0.05, 0.2, 0.6).unwrap();
        assert!(!t.valid);
        assert_eq!(t.invalid_reason.as_deref(), Some("side in boundary"));
        assert!(ideal_triangle_area(&sq, &t, 1e-3).is_err());
        // one point per edge on three edges
        assert!(make_ideal_triangle(&sq, 0.1, 0.4, 0.6).unwrap().valid);
    }

    #[test]
    fn disk_ideal_triangles_have_area_pi() {
        let d = ConvexDomain::unit_disk();
        for t in [[90.0, 210.0, 330.0], [0.0, 100.0, 250.0], [10.0, 30.0, 200.0]] {
            let tri = make_ideal_triangle(&d, deg(t[0]), deg(t[1]), deg(t[2])).unwrap();
            let a = ideal_triangle_area(&d, &tri, 1e-4).unwrap();
            assert!(!a.diverged);
            assert!((a.value - PI).abs() < 0.01 * PI, "{t:?} {}", a.value);
        }
    }

    #[test]
    fn symmetric_decomposition() {
        let d = ConvexDomain::unit_disk();
        let tri = make_ideal_triangle(&d, deg(90.0), deg(210.0), deg(330.0)).unwrap();
        let dec = corner_decomposition(&tri, 0.25).unwrap();
        let areas: Vec<f64> = dec
            .corners
            .iter()
            .map(|c| {
                // trapezoid between the cut and a deeper cut
                let trap = vec![c[1], c[2], c[0].lerp(c[2], 0.5), c[0].lerp(c[1], 0.5)];
                region_area(&d, &Region::Polygon { vertices: trap }, 1e-9).unwrap().value
            })
            .collect();
        assert!((areas[0] - areas[1]).abs() < 1e-6 * areas[0]);
        assert!((areas[0] - areas[2]).abs() < 1e-6 * areas[0]);
        // cuts parallel to the opposite sides
        for (i, c) in dec.corners.iter().enumerate() {
            let v = tri.vertices();
            let opp = v[(i + 2) % 3] - v[(i + 1) % 3];
            assert!((c[2] - c[1]).cross(opp).abs() < 1e-12);
        }
    }

    #[test]
    fn pieces_partition_the_triangle() {
        let d = ConvexDomain::unit_pball(3.0).unwrap();
        let tri = make_ideal_triangle(&d, 0.3, 2.2, 4.4).unwrap();
        let tol = 1e-4;
        let dec = corner_decomposition(&tri, 0.25).unwrap();
        let hex = region_area(&d, &Region::Polygon { vertices: dec.hexagon.to_vec() }, tol).unwrap();
        let corners: f64 = dec
            .corners
            .iter()
            .map(|c| region_area(&d, &Region::Polygon { vertices: c.to_vec() }, tol).unwrap().value)
            .sum();
        let whole = region_area(&d, &Region::Polygon { vertices: tri.vertices().to_vec() }, tol).unwrap();
        let split = ideal_triangle_area(&d, &tri, tol).unwrap();
        assert!(!whole.diverged && !split.diverged);
        assert!((hex.value + corners - whole.value).abs() <= 2.0 * tol * whole.value);
        assert!((split.value - whole.value).abs() <= 2.0 * tol * whole.value);
    }

    #[test]
    fn hexagon_fills_the_triangle_as_the_cut_shrinks() {
        let d = ConvexDomain::unit_disk();
        let tri = make_ideal_triangle(&d, 0.0, 2.0, 4.0).unwrap();
        let big = corner_decomposition(&tri, 0.3).unwrap();
        let small = corner_decomposition(&tri, 1e-3).unwrap();
        let euclid = |v: &[Point2]| {
            let n = v.len();
            0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>().abs()
        };
        let full = euclid(&tri.vertices());
        assert!(euclid(&small.hexagon) > euclid(&big.hexagon));
        assert!((full - euclid(&small.hexagon)) < 1e-5 * full);
    }

    #[test]
    fn square_corner_triangle_diverges() {
        let sq = ConvexDomain::unit_square();
        let t = &sampling::deliberate_triples(&sq)[0];
        let tri = make_ideal_triangle(&sq, t[0], t[1], t[2]).unwrap();
        let a = ideal_triangle_area_with(&sq, &tri, &TriangleAreaOptions::default()).unwrap();
        assert!(a.total.diverged);
        assert!(a.corners[0].diverged);
        let inc = &a.corners[0].increments;
        assert!(inc[inc.len() - 1] >= 0.98 * inc[inc.len() - 4]);
    }

    #[test]
    fn disk_search_finds_pi() {
        let d = ConvexDomain::unit_disk();
        let r = sup_area_search(&d, &SamplerConfig::new(6, 3, 1e-6), &TriangleAreaOptions::default());
        assert!(r.diverged.is_empty());
        assert!(r.evaluated >= 5);
        assert!((r.best_area.value - PI).abs() < 0.01 * PI);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn disk_areas_are_universal(t in proptest::array::uniform3(0.0f64..6.28)) {
            let d = ConvexDomain::unit_disk();
            let Ok(tri) = make_ideal_triangle(&d, t[0], t[1], t[2]) else { return Ok(()) };
            prop_assume!(tri.valid);
            let v = tri.vertices();
            prop_assume!(v[0].dist(v[1]).min(v[1].dist(v[2])).min(v[2].dist(v[0])) > 0.05);
            let a = ideal_triangle_area(&d, &tri, 1e-3).unwrap();
            prop_assert!(!a.diverged);
            prop_assert!((a.value - PI).abs() < 0.01 * PI, "{}", a.value);
        }
    }
}
