//! Busemann density of the Hilbert metric, unit-ball areas and region
//! quadrature.

mod quadrature;
pub(crate) mod region;

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

pub use quadrature::{integrate_adaptive, integrate_fixed, triangle_rule, AdaptiveResult};
pub use region::{
    ball_area, ball_area_with, ladder, polygon_area_fixed, region_area, region_area_with,
    LadderResult, Region, RegionOptions,
};

use crate::domain::{ConvexDomain, Point2};
use crate::error::{Error, Result};
use crate::metric::finsler_norm;
use crate::numeric::adaptive_kronrod;

/// Quadrature result. When `diverged` is set, `value` is only a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error_bound: f64,
    pub depth: usize,
    pub diverged: bool,
}

impl QuadratureEstimate {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            error_bound: 0.0,
            depth: 0,
            diverged: false,
        }
    }
}

/// Linear frame `A` with `F(p, A w) ≈ |w|`, from a quadratic fit of `F²`.
fn fitted_frame(domain: &ConvexDomain, p: Point2) -> Result<Matrix2<f64>> {
    let mut a = Matrix2::identity();
    for _ in 0..2 {
        let mut ata = Matrix3::zeros();
        let mut atb = Vector3::zeros();
        let mut worst = 0.0f64;
        let mut samples = [(0.0, 0.0, 0.0); 8];
        for (j, s) in samples.iter_mut().enumerate() {
            let (sn, cs) = (PI * j as f64 / 8.0).sin_cos();
            let v = a * nalgebra::Vector2::new(cs, sn);
            let f = finsler_norm(domain, p, Point2::new(v[0], v[1]))?;
            *s = (cs, sn, f * f);
            let row = Vector3::new(cs * cs, 2.0 * cs * sn, sn * sn);
            ata += row * row.transpose();
            atb += row * (f * f);
        }
        let m = ata.lu().solve(&atb).ok_or(Error::NoConvergence("ball frame fit"))?;
        for (cs, sn, f2) in samples {
            let fit = m[0] * cs * cs + 2.0 * m[1] * cs * sn + m[2] * sn * sn;
            worst = worst.max((fit - f2).abs() / f2);
        }
        let mm = Matrix2::new(m[0], m[1], m[1], m[2]);
        let eig = SymmetricEigen::new(mm);
        if eig.eigenvalues.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            break;
        }
        let inv_sqrt = eig.eigenvectors
            * Matrix2::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
            * eig.eigenvectors.transpose();
        a *= inv_sqrt;
        if worst < 1e-3 {
            break;
        }
    }
    Ok(a)
}

fn normalized_radius_sq(domain: &ConvexDomain, p: Point2, a: &Matrix2<f64>, phi: f64) -> Result<f64> {
    let (s, c) = phi.sin_cos();
    let v = a * nalgebra::Vector2::new(c, s);
    let f = finsler_norm(domain, p, Point2::new(v[0], v[1]))?;
    Ok(1.0 / (f * f))
}

/// Area of the tangent unit ball `{v : F(p, v) < 1}` by composite Simpson
/// over `n_dirs` directions, in a frame where the ball is nearly round.
pub fn unit_ball_area(domain: &ConvexDomain, p: Point2, n_dirs: usize) -> Result<f64> {
    if !domain.contains(p) {
        return Err(Error::PointNotInterior);
    }
    if n_dirs < 16 {
        return Err(Error::InvalidArgument("n_dirs must be at least 16".into()));
    }
    let a = fitted_frame(domain, p)?;
    // F is even, so the half turn carries half the area
    let n = n_dirs / 2 + (n_dirs / 2) % 2;
    let h = PI / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += w * normalized_radius_sq(domain, p, &a, i as f64 * h)?;
    }
    Ok(a.determinant().abs() * s * h / 3.0)
}

/// Unit-ball area to near machine precision: exact for polygonal domains,
/// otherwise adaptive Gauss–Kronrod in the angle.
pub fn unit_ball_area_precise(domain: &ConvexDomain, p: Point2) -> Result<f64> {
    unit_ball_area_tol(domain, p, PRECISE_TOL)
}

const PRECISE_TOL: f64 = 1e-11;

/// Relative accuracy of the density inside area quadratures.
pub(crate) const QUADRATURE_DENSITY_TOL: f64 = 1e-6;

/// Unit-ball area to relative accuracy about `rel_tol`.
pub fn unit_ball_area_tol(domain: &ConvexDomain, p: Point2, rel_tol: f64) -> Result<f64> {
    if !domain.contains(p) {
        return Err(Error::PointNotInterior);
    }
    if let Some(v) = domain.polygon_vertices() {
        return polygonal_ball_area(domain, p, &v);
    }
    let a = fitted_frame(domain, p)?;
    let g = |phi: f64| normalized_radius_sq(domain, p, &a, phi).unwrap_or(f64::NAN);
    let (s, _) = adaptive_kronrod(g, 0.0, PI, 2, rel_tol, 400);
    if !s.is_finite() {
        return Err(Error::NoConvergence("unit ball area"));
    }
    Ok(a.determinant().abs() * s)
}

/// On a polygon the Finsler norm is linear between the directions of the
/// vertices seen from `p`, so the unit ball is a polygon.
fn polygonal_ball_area(domain: &ConvexDomain, p: Point2, vertices: &[Point2]) -> Result<f64> {
    let mut angles: Vec<f64> = vertices
        .iter()
        .flat_map(|v| {
            let a = (*v - p).angle();
            [a, a + PI]
        })
        .map(|a| a.rem_euclid(2.0 * PI))
        .collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let pts = angles
        .iter()
        .map(|&t| {
            let u = Point2::polar(t);
            finsler_norm(domain, p, u).map(|f| u * (1.0 / f))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = pts.len();
    Ok(0.5 * (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>())
}

/// Density `π / Vol(B(p))` of the Hilbert measure.
pub fn density(domain: &ConvexDomain, p: Point2) -> Result<f64> {
    Ok(PI / unit_ball_area_precise(domain, p)?)
}

/// Density with the unit-ball area computed to relative accuracy `rel_tol`.
pub fn density_tol(domain: &ConvexDomain, p: Point2, rel_tol: f64) -> Result<f64> {
    Ok(PI / unit_ball_area_tol(domain, p, rel_tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ProjectiveMap;
    use proptest::prelude::*;

    fn klein_density(p: Point2) -> f64 {
        (1.0 - p.norm_sq()).powf(-1.5)
    }

    #[test]
    fn disk_ball_areas() {
        let d = ConvexDomain::unit_disk();
        assert!((unit_ball_area(&d, Point2::ORIGIN, 64).unwrap() - PI).abs() < 1e-12);
        let v = unit_ball_area(&d, Point2::new(0.5, 0.0), 64).unwrap();
        assert!((v - PI * 0.75f64.powf(1.5)).abs() < 1e-10);
        assert!((v - 2.0405).abs() < 1e-4);
        let e = ConvexDomain::ellipse(Point2::ORIGIN, 2.0, 1.0, 0.0).unwrap();
        assert!((unit_ball_area(&e, Point2::ORIGIN, 64).unwrap() - 2.0 * PI).abs() < 1e-10);
        assert!(unit_ball_area(&d, Point2::ORIGIN, 8).is_err());
    }

    #[test]
    fn disk_densities() {
        let d = ConvexDomain::unit_disk();
        assert!((density(&d, Point2::ORIGIN).unwrap() - 1.0).abs() < 1e-12);
        let v = density(&d, Point2::new(0.5, 0.0)).unwrap();
        assert!((v - 0.75f64.powf(-1.5)).abs() < 1e-9);
        assert!(density(&d, Point2::new(0.99, 0.0)).unwrap() > 300.0);
        assert_eq!(density(&d, Point2::new(1.0, 0.0)).unwrap_err(), Error::PointNotInterior);
    }

    #[test]
    fn simpson_agrees_with_refinement_on_smooth_domains() {
        for d in [
            ConvexDomain::unit_pball(4.0).unwrap(),
            ConvexDomain::ellipse(Point2::new(0.1, 0.2), 1.3, 0.6, 0.5).unwrap(),
        ] {
            let p = Point2::new(0.3, 0.1);
            let a = unit_ball_area(&d, p, 256).unwrap();
            let b = unit_ball_area(&d, p, 1024).unwrap();
            assert!((a - b).abs() <= 1e-6 * b);
            assert!((a - unit_ball_area_precise(&d, p).unwrap()).abs() <= 1e-6 * b);
        }
    }

    #[test]
    fn polygon_ball_is_exact() {
        let sq = ConvexDomain::unit_square();
        let p = Point2::new(0.3, 0.6);
        let exact = unit_ball_area_precise(&sq, p).unwrap();
        let fine = unit_ball_area(&sq, p, 1 << 16).unwrap();
        assert!((exact - fine).abs() < 1e-8 * exact);
        // at the center the ball is the square with vertices at (±½, ±½)
        let c = unit_ball_area_precise(&sq, Point2::new(0.5, 0.5)).unwrap();
        assert!((c - 1.0).abs() < 1e-14, "{c}");
    }

    proptest! {
        #[test]
        fn disk_density_is_klein(t in 0.0f64..6.3, r in 0.0f64..0.999) {
            let d = ConvexDomain::unit_disk();
            let p = Point2::polar(t) * r;
            let v = density(&d, p).unwrap();
            prop_assert!((v - klein_density(p)).abs() <= 1e-8 * v);
        }

        #[test]
        fn nested_unit_balls_compare(s in 1.01f64..2.0, t in 0.0f64..6.3, r in 0.0f64..0.99) {
            let a = ConvexDomain::unit_disk();
            let b = ConvexDomain::disk(Point2::ORIGIN, s).unwrap();
            let p = Point2::polar(t) * r;
            prop_assert!(unit_ball_area_precise(&a, p).unwrap() <= unit_ball_area_precise(&b, p).unwrap() + 1e-9);
        }

        #[test]
        fn density_transforms_with_jacobian(
            e in proptest::array::uniform6(-0.2f64..0.2), t in 0.0f64..6.3, r in 0.0f64..0.95
        ) {
            // h_{HC}(Hp) |det DH(p)| = h_C(p)
            let d = ConvexDomain::unit_pball(3.0).unwrap();
            let h = ProjectiveMap::from_rows([
                [1.0 + e[0], e[1], e[2]],
                [e[3], 1.0 + e[4], e[5]],
                [0.3 * e[0], 0.3 * e[5], 1.0],
            ]).unwrap();
            let img = d.projective_image(&h).unwrap();
            let p = d.center().lerp(d.boundary_point(t), r);
            let j1 = h.push_vector(p, Point2::new(1.0, 0.0)).unwrap();
            let j2 = h.push_vector(p, Point2::new(0.0, 1.0)).unwrap();
            let jac = j1.cross(j2).abs();
            let lhs = density(&img, h.apply(p).unwrap()).unwrap() * jac;
            let rhs = density(&d, p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-7 * rhs);
        }
    }
}
