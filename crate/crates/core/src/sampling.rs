//! Seeded, boundary-biased samplers for hyperbolicity and area searches.
//!
//! Every sampler draws from a single ChaCha stream, so the first `n` samples
//! are the same for any budget `>= n`. Estimators taking a maximum over the
//! samples are therefore nondecreasing in the budget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ConvexDomain, Point2};

/// Budget, seed and boundary approach `epsilon`: sampled interior points sit
/// at radial fraction up to `1 - epsilon` between the center and the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub budget: usize,
    pub seed: u64,
    pub epsilon: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            budget: 10_000,
            seed: 0,
            epsilon: 1e-6,
        }
    }
}

impl SamplerConfig {
    pub fn new(budget: usize, seed: u64, epsilon: f64) -> Self {
        Self {
            budget,
            seed,
            epsilon,
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }
}

/// Offset of the deliberate near-corner vertices along polygon edges.
pub const EDGE_OFFSET: f64 = 1e-3;

struct PointSampler<'a> {
    domain: &'a ConvexDomain,
    center: Point2,
    special: Vec<f64>,
    vertices: Option<Vec<Point2>>,
    epsilon: f64,
    rng: ChaCha8Rng,
}

impl<'a> PointSampler<'a> {
    fn new(domain: &'a ConvexDomain, cfg: &SamplerConfig, stream: u64) -> Self {
        Self {
            domain,
            center: domain.center(),
            special: domain.special_params(),
            vertices: domain.polygon_vertices(),
            epsilon: cfg.epsilon.clamp(1e-15, 0.5),
            rng: cfg.rng(stream),
        }
    }

    /// Depth factor `epsilon^u` with `u` biased toward 1.
    fn depth(&mut self) -> f64 {
        let u: f64 = self.rng.random::<f64>().sqrt();
        self.epsilon.powf(u)
    }

    fn radial(&mut self, t: f64) -> Point2 {
        let e = self.depth();
        let b = self.domain.boundary_point(t);
        b.lerp(self.center, e)
    }

    fn next(&mut self) -> Point2 {
        let period = self.domain.param_period();
        if let Some(v) = self.vertices.clone() {
            if self.rng.random_bool(0.5) {
                let n = v.len();
                let i = self.rng.random_range(0..n);
                let (a, b) = (self.depth(), self.depth());
                let (vp, vi, vn) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
                return vi + (vp - vi) * (0.5 * a) + (vn - vi) * (0.5 * b);
            }
        }
        let t = if !self.special.is_empty() && self.rng.random_bool(0.25) {
            self.special[self.rng.random_range(0..self.special.len())]
        } else {
            self.rng.random::<f64>() * period
        };
        self.radial(t)
    }
}

/// `n` boundary-biased interior points.
pub fn interior_points(domain: &ConvexDomain, cfg: &SamplerConfig, n: usize) -> Vec<Point2> {
    let mut s = PointSampler::new(domain, cfg, 1);
    (0..n).map(|_| s.next()).filter(|p| domain.contains(*p)).collect()
}

/// `cfg.budget` quadruples of boundary-biased interior points.
pub fn quadruples(domain: &ConvexDomain, cfg: &SamplerConfig) -> Vec<[Point2; 4]> {
    let mut s = PointSampler::new(domain, cfg, 2);
    let mut out = Vec::with_capacity(cfg.budget);
    while out.len() < cfg.budget {
        let q = [s.next(), s.next(), s.next(), s.next()];
        if q.iter().all(|p| domain.contains(*p)) {
            out.push(q);
        }
    }
    out
}

/// Deliberate parameter triples: for smooth domains spread triples of the
/// distinguished parameters, for polygons a corner plus points close to the
/// two neighbouring corners on the edges away from it.
pub fn deliberate_triples(domain: &ConvexDomain) -> Vec<[f64; 3]> {
    let period = domain.param_period();
    if let Some(v) = domain.polygon_vertices() {
        let n = v.len();
        let special = domain.special_params();
        let param_on_edge = |from: usize, frac: f64| {
            let a = special[from % n];
            let b = if (from + 1) % n == 0 { period } else { special[(from + 1) % n] };
            a + frac * (b - a)
        };
        return (0..n)
            .map(|i| {
                [
                    special[i],
                    param_on_edge(i + 1, EDGE_OFFSET),
                    param_on_edge(i + n - 2, 1.0 - EDGE_OFFSET),
                ]
            })
            .collect();
    }
    let special = domain.special_params();
    let m = special.len();
    if m < 3 {
        return vec![[0.0, period / 3.0, 2.0 * period / 3.0]];
    }
    let q = (m / 4).max(1);
    let h = (m / 2).max(2);
    (0..m)
        .map(|i| [special[i], special[(i + q) % m], special[(i + h) % m]])
        .collect()
}

/// Boundary parameter triples for ideal-triangle searches: the deliberate
/// triples first, then stratified random triples (one parameter per third of
/// the boundary, with a random common offset).
pub fn ideal_triangle_params(domain: &ConvexDomain, cfg: &SamplerConfig) -> Vec<[f64; 3]> {
    let period = domain.param_period();
    let mut out = deliberate_triples(domain);
    out.truncate(cfg.budget);
    let mut rng = cfg.rng(3);
    while out.len() < cfg.budget {
        let o: f64 = rng.random::<f64>() * period;
        let t: [f64; 3] = std::array::from_fn(|k| {
            ((k as f64 + rng.random::<f64>()) / 3.0 * period + o).rem_euclid(period)
        });
        out.push(t);
    }
    out
}

/// Triangles with boundary-biased interior vertices for the thin-triangle
/// estimator. The deliberate triples come first, pushed to full depth.
pub fn geodesic_triangles(domain: &ConvexDomain, cfg: &SamplerConfig) -> Vec<[Point2; 3]> {
    let c = domain.center();
    let e = cfg.epsilon.clamp(1e-15, 0.5);
    let mut out: Vec<[Point2; 3]> = deliberate_triples(domain)
        .into_iter()
        .map(|t| t.map(|s| domain.boundary_point(s).lerp(c, e)))
        .filter(|t| t.iter().all(|p| domain.contains(*p)))
        .collect();
    out.truncate(cfg.budget);
    let mut s = PointSampler::new(domain, cfg, 4);
    while out.len() < cfg.budget {
        let t = [s.next(), s.next(), s.next()];
        if t.iter().all(|p| domain.contains(*p)) {
            out.push(t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_prefix_stable() {
        let d = ConvexDomain::unit_square();
        let small = SamplerConfig::new(50, 7, 1e-6);
        let big = SamplerConfig::new(200, 7, 1e-6);
        assert_eq!(quadruples(&d, &small)[..], quadruples(&d, &big)[..50]);
        assert_eq!(
            ideal_triangle_params(&d, &small)[..],
            ideal_triangle_params(&d, &big)[..50]
        );
        assert_eq!(
            geodesic_triangles(&d, &small)[..],
            geodesic_triangles(&d, &big)[..50]
        );
    }

    #[test]
    fn samples_are_interior_and_deep() {
        let d = ConvexDomain::unit_pball(4.0).unwrap();
        let cfg = SamplerConfig::new(2000, 1, 1e-6);
        let pts = interior_points(&d, &cfg, 2000);
        assert_eq!(pts.len(), 2000);
        let deepest = pts
            .iter()
            .map(|p| d.boundary_residual(*p))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(deepest > -1e-4 && deepest < 0.0);
    }

    #[test]
    fn square_deliberate_triples_avoid_shared_edges() {
        let d = ConvexDomain::unit_square();
        let t = deliberate_triples(&d);
        assert_eq!(t.len(), 4);
        let p = t[0].map(|s| d.boundary_point(s));
        assert_eq!(p[0], Point2::ORIGIN);
        assert!(p[1].dist(Point2::new(1.0, EDGE_OFFSET)) < 1e-12);
        assert!(p[2].dist(Point2::new(EDGE_OFFSET, 1.0)) < 1e-12);
    }
}
