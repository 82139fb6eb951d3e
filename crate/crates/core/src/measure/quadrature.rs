//! Adaptive quadrature over triangulations.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::domain::Point2;

const A1: f64 = 0.101_286_507_323_456_34;
const B1: f64 = 0.797_426_985_353_087_3;
const W1: f64 = 0.125_939_180_544_827_15;
const A2: f64 = 0.470_142_064_105_115_1;
const B2: f64 = 0.059_715_871_789_769_82;
const W2: f64 = 0.132_394_152_788_506_18;

/// Seven-point rule, exact for polynomials of degree 5; barycentric nodes
/// and weights normalized to unit area.
const RULE: [(f64, f64, f64, f64); 7] = [
    (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225),
    (A1, A1, B1, W1),
    (A1, B1, A1, W1),
    (B1, A1, A1, W1),
    (A2, A2, B2, W2),
    (A2, B2, A2, W2),
    (B2, A2, A2, W2),
];

/// Cells per parallel refinement batch.
const BATCH: usize = 16;

#[inline]
pub(crate) fn tri_area(t: &[Point2; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0]).abs()
}

pub fn triangle_rule<F: Fn(Point2) -> f64>(f: &F, t: &[Point2; 3]) -> f64 {
    let area = tri_area(t);
    let mut s = 0.0;
    for (a, b, c, w) in RULE {
        let p = Point2::new(
            a * t[0].x + b * t[1].x + c * t[2].x,
            a * t[0].y + b * t[1].y + c * t[2].y,
        );
        s += w * f(p);
    }
    s * area
}

/// Midpoint subdivision into four similar triangles.
pub(crate) fn split4(t: &[Point2; 3]) -> [[Point2; 3]; 4] {
    let m01 = t[0].lerp(t[1], 0.5);
    let m12 = t[1].lerp(t[2], 0.5);
    let m20 = t[2].lerp(t[0], 0.5);
    [
        [t[0], m01, m20],
        [m01, t[1], m12],
        [m20, m12, t[2]],
        [m01, m12, m20],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error: f64,
    pub depth: usize,
    pub cells: usize,
    pub converged: bool,
}

struct Cell {
    tri: [Point2; 3],
    children: [f64; 4],
    error: f64,
    depth: usize,
    id: u64,
}

impl Cell {
    fn refined(&self) -> f64 {
        self.children.iter().sum()
    }
}

struct Key(f64, Reverse<u64>);

impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

fn make_cell<F: Fn(Point2) -> f64>(f: &F, tri: [Point2; 3], value: f64, depth: usize, id: u64) -> Cell {
    let kids = split4(&tri);
    let children = kids.map(|k| triangle_rule(f, &k));
    let refined: f64 = children.iter().sum();
    Cell {
        tri,
        children,
        error: (value - refined).abs(),
        depth,
        id,
    }
}

/// Integrates `f` over the union of `tris`. Cells with the largest local
/// error `|parent − Σ children|` are split first; the queue is ordered by
/// `(error, id)` so results do not depend on thread scheduling. Stops when
/// the summed error is below `max(tol_rel·|value|, tol_abs)`, or when no
/// cell below `depth_cap` remains, or after `max_cells` cells.
pub fn integrate_adaptive<F>(
    f: &F,
    tris: &[[Point2; 3]],
    tol_rel: f64,
    tol_abs: f64,
    depth_cap: usize,
    max_cells: usize,
) -> AdaptiveResult
where
    F: Fn(Point2) -> f64 + Sync,
{
    let mut next_id = 0u64;
    let seeds: Vec<([Point2; 3], u64)> = tris
        .iter()
        .map(|t| {
            next_id += 1;
            (*t, next_id - 1)
        })
        .collect();
    let initial: Vec<Cell> = seeds
        .par_iter()
        .map(|(t, id)| make_cell(f, *t, triangle_rule(f, t), 0, *id))
        .collect();
    let mut cells: Vec<Option<Cell>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    for c in initial {
        total += c.refined();
        err += c.error;
        heap.push((Key(c.error, Reverse(c.id)), cells.len()));
        cells.push(Some(c));
    }
    let mut depth = 0;
    let mut count = cells.len();
    let mut converged = false;
    loop {
        if err <= (tol_rel * total.abs()).max(tol_abs) {
            converged = true;
            break;
        }
        if count >= max_cells {
            break;
        }
        let mut batch = Vec::with_capacity(BATCH);
        let mut frozen = Vec::new();
        while batch.len() < BATCH {
            let Some((_, idx)) = heap.pop() else { break };
            let c = cells[idx].as_ref().expect("live cell");
            if c.depth >= depth_cap {
                frozen.push(idx);
                continue;
            }
            batch.push(idx);
        }
        if batch.is_empty() {
            break;
        }
        // frozen cells stay in the total but leave the queue
        let parents: Vec<Cell> = batch.iter().map(|&i| cells[i].take().expect("live")).collect();
        let jobs: Vec<([Point2; 3], f64, usize, u64)> = parents
            .iter()
            .flat_map(|p| {
                let kids = split4(&p.tri);
                (0..4)
                    .map(|k| {
                        next_id += 1;
                        (kids[k], p.children[k], p.depth + 1, next_id - 1)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let children: Vec<Cell> = jobs
            .par_iter()
            .map(|(t, v, d, id)| make_cell(f, *t, *v, *d, *id))
            .collect();
        for p in &parents {
            total -= p.refined();
            err -= p.error;
        }
        for c in children {
            total += c.refined();
            err += c.error;
            depth = depth.max(c.depth);
            heap.push((Key(c.error, Reverse(c.id)), cells.len()));
            cells.push(Some(c));
            count += 1;
        }
        let _ = frozen;
    }
    // exact re-summation in id order
    let mut live: Vec<&Cell> = cells.iter().flatten().collect();
    live.sort_by_key(|c| c.id);
    let value: f64 = live.iter().map(|c| c.refined()).sum();
    let error: f64 = live.iter().map(|c| c.error).sum();
    AdaptiveResult {
        value,
        error,
        depth,
        cells: live.len(),
        converged,
    }
}

/// Integrates `f` on the uniform refinement of `tris` of the given level
/// (`4^level` cells per triangle). Two integrands evaluated this way use
/// identical nodes and weights.
pub fn integrate_fixed<F>(f: &F, tris: &[[Point2; 3]], level: usize) -> f64
where
    F: Fn(Point2) -> f64 + Sync,
{
    let mut cur: Vec<[Point2; 3]> = tris.to_vec();
    for _ in 0..level {
        cur = cur.iter().flat_map(split4).collect();
    }
    let vals: Vec<f64> = cur.par_iter().map(|t| triangle_rule(f, t)).collect();
    vals.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_tri() -> [Point2; 3] {
        [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]
    }

    #[test]
    fn rule_is_exact_to_degree_five() {
        // ∫ x^a y^b over the unit triangle = a! b! / (a + b + 2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let got = triangle_rule(&|p: Point2| p.x.powi(a as i32) * p.y.powi(b as i32), &unit_tri());
                assert!((got - exact).abs() < 1e-15, "{a} {b}");
            }
        }
    }

    #[test]
    fn adaptive_handles_a_corner_singularity() {
        // in polar form ∫ dθ / (cos θ + sin θ) over [0, π/2] = √2 asinh(1)
        let f = |p: Point2| 1.0 / p.norm().max(1e-300);
        let exact = 2f64.sqrt() * 1f64.asinh();
        let r = integrate_adaptive(&f, &[unit_tri()], 1e-6, 0.0, 30, 200_000);
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-5, "{} {}", r.value, exact);
    }

    #[test]
    fn fixed_levels_converge() {
        let f = |p: Point2| (p.x * 3.0).sin() * p.y.exp();
        let a = integrate_fixed(&f, &[unit_tri()], 3);
        let b = integrate_fixed(&f, &[unit_tri()], 5);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn deterministic_across_runs() {
        let f = |p: Point2| 1.0 / (0.01 + p.x * p.x + p.y * p.y);
        let a = integrate_adaptive(&f, &[unit_tri()], 1e-8, 0.0, 14, 100_000);
        let b = integrate_adaptive(&f, &[unit_tri()], 1e-8, 0.0, 14, 100_000);
        assert_eq!(a, b);
    }
}
