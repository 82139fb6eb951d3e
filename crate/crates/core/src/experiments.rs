//! Sweeps over domain families and the numeric verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::domain::{ConvexDomain, Point2};
use crate::error::{Error, Result};
use crate::measure::{ball_area_with, polygon_area_fixed, region_area_with, Region, RegionOptions};
use crate::metric::{delta_four_point, delta_thin, finsler_norm, hilbert_distance};
use crate::normalize::{
    boundary_graph, graph_alpha_fit, isometry_defect, normalize_triangle_pointed, Frame, NORMAL_VERTICES,
};
use crate::regularity::{
    chain_constant, chain_exponent, derivative_holder_check, holder_bound_check, qs_constant, qsc_constant,
    SampledFunction, REGULARITY_GRID,
};
use crate::sampling::SamplerConfig;
use crate::triangles::{ideal_triangle_from_points, make_ideal_triangle, sup_area_search, TriangleAreaOptions};
use crate::ProjectiveMap;

/// Budgets and seed shared by every row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub thin_budget: usize,
    pub four_point_budget: usize,
    pub area_budget: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            thin_budget: 64,
            four_point_budget: 2000,
            area_budget: 8,
            seed: 0,
            epsilon: 1e-6,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub param: f64,
    pub delta_thin: f64,
    pub delta_4pt: f64,
    /// Largest sampled area; diverged samples contribute their partial sums.
    pub sup_area: f64,
    /// Number of sampled triangles whose corner ladders diverged.
    pub diverged: usize,
    pub seed: u64,
    #[serde(skip)]
    pub budgets: [usize; 3],
}

/// One-parameter domain families for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// Unit `p`-balls; the parameter is `p`.
    Pball,
    /// Regular polygons with `sides` sides smoothed by an `ℓ^p` corner
    /// rounding; the parameter is `p`.
    Smoothpoly { sides: usize },
}

impl Family {
    pub fn domain(&self, param: f64) -> Result<ConvexDomain> {
        match self {
            Self::Pball => ConvexDomain::unit_pball(param),
            Self::Smoothpoly { sides } => ConvexDomain::smooth_polygon(*sides, param, Point2::new(0.0, 0.0), 1.0, 0.0),
        }
    }
}

/// Hyperbolicity and area estimates of one domain.
pub fn sweep_row(domain: &ConvexDomain, param: f64, cfg: &SweepConfig) -> SweepRow {
    let sc = |budget| SamplerConfig::new(budget, cfg.seed, cfg.epsilon);
    let thin = delta_thin(domain, &sc(cfg.thin_budget));
    let four = delta_four_point(domain, &sc(cfg.four_point_budget));
    let area = sup_area_search(domain, &sc(cfg.area_budget), &TriangleAreaOptions::with_tol(cfg.tol));
    SweepRow {
        label: domain.label(),
        param,
        delta_thin: thin.delta_hat,
        delta_4pt: four.delta_hat,
        sup_area: area.best_area.value,
        diverged: area.diverged.len(),
        seed: cfg.seed,
        budgets: [cfg.thin_budget, cfg.four_point_budget, cfg.area_budget],
    }
}

/// One row per grid parameter, in grid order.
pub fn sweep(family: &Family, grid: &[f64], cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty parameter grid".into()));
    }
    let domains = grid.iter().map(|p| family.domain(*p)).collect::<Result<Vec<_>>>()?;
    Ok(domains.iter().zip(grid).map(|(d, p)| sweep_row(d, *p, cfg)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value >= bound,
        }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: f64::from(u8::from(ok)),
            bound: 1.0,
            passed: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, checks: Vec<Check>) -> Self {
        Self {
            suite: suite.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub const SUITES: [&str; 6] = ["comparison", "graph", "lemma-a4", "regularity", "ball-growth", "normalization"];

/// Runs a suite by name with its default size.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    match name {
        "comparison" => Ok(comparison_suite(500, seed)),
        "graph" => graph_suite(),
        "lemma-a4" => cone_area_suite(),
        "regularity" => regularity_suite(),
        "ball-growth" => ball_growth_suite(),
        "normalization" => Ok(normalization_suite(100, seed)),
        _ => Err(Error::InvalidArgument(format!("unknown suite {name:?}"))),
    }
}

/// Interior point at radial fraction `s` from the center toward `b`.
fn toward(domain: &ConvexDomain, t: f64, s: f64) -> Point2 {
    domain.center().lerp(domain.boundary_point(t), s)
}

/// Nested pair `inner ⊂ outer`: a disk inside a larger disk, or a `p`-ball
/// inside a polygon circumscribed around a dilate of it.
pub fn nested_pair(rng: &mut ChaCha8Rng, i: usize) -> Result<(ConvexDomain, ConvexDomain)> {
    if i % 2 == 0 {
        let c = Point2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let r = rng.random_range(0.3..1.5);
        let s = rng.random_range(1.0..2.0);
        let shift = Point2::polar(rng.random_range(0.0..TAU)) * (0.9 * r * (s - 1.0) * rng.random::<f64>());
        Ok((ConvexDomain::disk(c, r)?, ConvexDomain::disk(c + shift, r * s)?))
    } else {
        let inner = ConvexDomain::unit_pball(rng.random_range(1.2..8.0))?;
        let n = rng.random_range(4..=8usize);
        let phase = rng.random_range(0.0..TAU);
        let grow = 1.0 + rng.random_range(0.0..0.3);
        // tangent lines of the scaled ball, so no line is redundant
        let lines: Vec<(Point2, f64)> = (0..n)
            .map(|k| {
                let jitter = rng.random_range(-0.4..0.4) * TAU / n as f64;
                let u = Point2::polar(phase + TAU * k as f64 / n as f64 + jitter);
                (u, inner.support(u) * grow)
            })
            .collect();
        let vertices = (0..n)
            .map(|k| {
                let ((u1, h1), (u2, h2)) = (lines[k], lines[(k + 1) % n]);
                let det = u1.cross(u2);
                Point2::new((h1 * u2.y - h2 * u1.y) / det, (u1.x * h2 - u2.x * h1) / det)
            })
            .collect();
        Ok((inner, ConvexDomain::polygon(vertices)?))
    }
}

/// Monotonicity of the Finsler norm, the distance and the measure under
/// inclusion, on `pairs` nested pairs with one random `(p, q, v, A)` each.
pub fn comparison_suite(pairs: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut vf, mut vd, mut vm, mut errors) = (0usize, 0usize, 0usize, 0usize);
    let (mut worst_f, mut worst_d, mut worst_m) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for i in 0..pairs {
        let Ok((a, b)) = nested_pair(&mut rng, i) else {
            errors += 1;
            continue;
        };
        let period = a.param_period();
        let pt = |rng: &mut ChaCha8Rng, max: f64| toward(&a, rng.random::<f64>() * period, max * rng.random::<f64>().sqrt());
        let (p, q) = (pt(&mut rng, 0.999), pt(&mut rng, 0.999));
        let v = Point2::polar(rng.random_range(0.0..TAU));
        let tri = [pt(&mut rng, 0.9), pt(&mut rng, 0.9), pt(&mut rng, 0.9)];
        let tri = if (tri[1] - tri[0]).cross(tri[2] - tri[0]) < 0.0 { [tri[0], tri[2], tri[1]] } else { tri };
        let res = (|| -> Result<(f64, f64, f64, f64, f64, f64)> {
            Ok((
                finsler_norm(&a, p, v)?,
                finsler_norm(&b, p, v)?,
                hilbert_distance(&a, p, q)?,
                hilbert_distance(&b, p, q)?,
                polygon_area_fixed(&a, &tri, 1)?,
                polygon_area_fixed(&b, &tri, 1)?,
            ))
        })();
        let Ok((fa, fb, da, db, ma, mb)) = res else {
            errors += 1;
            continue;
        };
        worst_f = worst_f.max(fb - fa);
        worst_d = worst_d.max(db - da);
        worst_m = worst_m.max(mb / ma - 1.0);
        vf += usize::from(fb > fa + 1e-9);
        vd += usize::from(db > da + 1e-9);
        vm += usize::from(mb > ma * (1.0 + 1e-3));
    }
    SuiteReport::new(
        "comparison",
        vec![
            Check::at_most("finsler violations", vf as f64, 0.0),
            Check::at_most("distance violations", vd as f64, 0.0),
            Check::at_most("measure violations", vm as f64, 0.0),
            Check::at_most("evaluation errors", errors as f64, 0.0),
            Check::at_most("worst finsler excess", worst_f, 1e-9),
            Check::at_most("worst distance excess", worst_d, 1e-9),
            Check::at_most("worst relative measure excess", worst_m, 1e-3),
        ],
    )
}

/// Boundary graphs of the disk and the 4-ball at their lowest point.
pub fn graph_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let cases: [(&str, ConvexDomain, fn(f64) -> f64, f64); 2] = [
        ("disk", ConvexDomain::unit_disk(), |x| 1.0 - (1.0 - x * x).sqrt(), 2.0),
        ("4-ball", ConvexDomain::unit_pball(4.0)?, |x| 1.0 - (1.0 - x.powi(4)).powf(0.25), 4.0),
    ];
    for (name, d, exact, alpha) in cases {
        let frame = Frame::at_boundary(&d, Point2::new(0.0, -1.0))?;
        let g = boundary_graph(&d, &frame, 0.5)?;
        let err = (0..g.len())
            .map(|i| (g.values[i] - exact(g.x(i))).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("{name} graph error"), err, 1e-9));
        checks.push(Check::at_most(format!("{name} convexity defect"), g.convexity_defect(), 0.0));
        checks.push(Check::at_most(format!("{name} |f(0)|"), g.values[g.len() / 2].abs(), 0.0));
        let ends = g.values[0].min(g.values[g.len() - 1]);
        checks.push(Check::at_least(format!("{name} endpoint value"), ends, f64::MIN_POSITIVE));
        let tol = if alpha == 2.0 { 0.05 } else { 0.1 };
        let fit = graph_alpha_fit(&g)?;
        checks.push(Check::at_most(format!("{name} fitted exponent error"), (fit.alpha - alpha).abs(), tol));
    }
    Ok(SuiteReport::new("graph", checks))
}

/// Closed-form upper bound for the area of the cone `{λ|x| < y < τ}` in the
/// cap `{|x|^α < y < 1}`.
pub fn cone_area_bound(alpha: f64, lambda: f64, tau: f64) -> f64 {
    let big = alpha * lambda.powf(-1.0 / alpha)
        / ((1.0 - tau.powf(alpha - 1.0) * lambda.powf(-alpha)) * (1.0 - tau.powf(2.0 - 2.0 / alpha) * lambda.powf(-2.0)));
    let x = tau / lambda;
    let integral = x.powf(1.0 - 1.0 / alpha) / (1.0 - 1.0 / alpha);
    PI / (4.0 * (1.0 - tau)) * big * integral
}

/// Area of the cone at two tolerances, and the relative change between them.
pub fn cone_area(alpha: f64, lambda: f64, tau: f64) -> Result<(f64, f64, bool)> {
    let d = ConvexDomain::power_cap(alpha)?;
    let x = tau / lambda;
    let region = Region::Polygon {
        vertices: vec![Point2::new(0.0, 0.0), Point2::new(x, tau), Point2::new(-x, tau)],
    };
    let coarse = region_area_with(&d, &region, &RegionOptions::with_tol(1e-3))?;
    let fine = region_area_with(&d, &region, &RegionOptions::with_tol(1e-4))?;
    let change = (fine.value - coarse.value).abs() / fine.value;
    Ok((fine.value, change, coarse.diverged || fine.diverged))
}

pub fn cone_area_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for (alpha, lambda, tau) in [(2.0, 1.0, 2.0 / 3.0), (1.5, 1.0, 0.5)] {
        let tag = format!("alpha={alpha} lambda={lambda} tau={tau:.4}");
        let (value, change, diverged) = cone_area(alpha, lambda, tau)?;
        checks.push(Check::at_most(format!("{tag} area vs bound"), value, cone_area_bound(alpha, lambda, tau)));
        checks.push(Check::at_most(format!("{tag} refinement change"), change, 0.01));
        checks.push(Check::flag(format!("{tag} converged"), !diverged));
    }
    Ok(SuiteReport::new("lemma-a4", checks))
}

/// Named test functions on `[-2, 2]` and boundary graphs at the lowest
/// point of strictly convex domains.
pub fn regularity_corpus() -> Result<Vec<(String, SampledFunction)>> {
    let n = REGULARITY_GRID;
    let mut out = vec![
        ("x^2".to_string(), SampledFunction::symmetric(|x| x * x, 1.0, n)?.with_derivative(|x| 2.0 * x)),
        (
            "|x|^1.2".into(),
            SampledFunction::symmetric(|x: f64| x.abs().powf(1.2), 1.0, n)?
                .with_derivative(|x: f64| 1.2 * x.signum() * x.abs().powf(0.2)),
        ),
        (
            "|x|^1.5".into(),
            SampledFunction::symmetric(|x: f64| x.abs().powf(1.5), 1.0, n)?
                .with_derivative(|x: f64| 1.5 * x.signum() * x.abs().sqrt()),
        ),
    ];
    let domains = [
        ("disk graph", ConvexDomain::unit_disk(), 1.0),
        ("ellipse graph", ConvexDomain::ellipse(Point2::new(0.0, 0.0), 1.5, 0.8, 0.0)?, 0.8),
        ("1.5-ball graph", ConvexDomain::unit_pball(1.5)?, 1.0),
        ("2-ball graph", ConvexDomain::unit_pball(2.0)?, 1.0),
        ("4-ball graph", ConvexDomain::unit_pball(4.0)?, 1.0),
    ];
    for (name, d, low) in domains {
        let frame = Frame::at_boundary(&d, Point2::new(0.0, -low))?;
        let g = crate::normalize::boundary_graph_with(&d, &frame, 0.5, n)?;
        out.push((name.into(), SampledFunction::new(-0.5, 0.5, g.values)?.with_difference_derivative()));
    }
    Ok(out)
}

pub fn regularity_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for (h, a) in [(1.0f64, 1.0f64), (1.7, 0.25), (3.0, 2.0)] {
        let direct = ((1.0 + a) / a * (4.0 * h * (h + 1.0)).ln()).exp();
        let k = chain_constant(h, a);
        checks.push(Check::at_most(
            format!("constant identity H={h} a={a}"),
            (k - direct).abs() / direct,
            8.0 * f64::EPSILON,
        ));
        let alpha = chain_exponent(k);
        let back = 1.0 / (2f64.powf(alpha - 1.0) - 1.0);
        checks.push(Check::at_most(
            format!("exponent identity H={h} a={a}"),
            (back - k).abs() / k,
            1e-9,
        ));
    }
    for (name, f) in regularity_corpus()? {
        let a = 0.25 * (f.hi - f.lo);
        let h = qsc_constant(&f)?;
        let r = holder_bound_check(&f, a, h)?;
        checks.push(Check::at_least(format!("{name} bound margin (H={h:.4})"), r.bound_margin, -1e-9));
        let k = qs_constant(&f.derivative_function()?);
        let d = derivative_holder_check(&f, k)?;
        checks.push(Check::at_least(format!("{name} derivative margin (K={k:.4})"), d.margin, -1e-9));
    }
    Ok(SuiteReport::new("regularity", checks))
}

/// Point at Hilbert distance `s` from `q` in direction `u`.
pub fn point_at_distance(domain: &ConvexDomain, q: Point2, u: Point2, s: f64) -> Result<Point2> {
    let chord = domain.chord(q, u)?;
    let t_plus = chord.t_plus;
    let (mut lo, mut hi) = (0.0, t_plus);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hilbert_distance(domain, q, q + u * mid)? < s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * t_plus {
            break;
        }
    }
    Ok(q + u * (0.5 * (lo + hi)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub radius: f64,
    pub area: f64,
    /// `(R/2 − 1) V1`, from `floor(R/2)` disjoint unit balls.
    pub packing_bound: f64,
    /// `(R − 1) V1`, from `floor(R)` unit balls.
    pub literal_bound: f64,
}

/// Ball areas about `q` against the unit-ball areas along the geodesic from
/// `q` in direction `u`. Returns `V1` and one row per radius.
pub fn ball_growth(domain: &ConvexDomain, q: Point2, u: Point2, radii: &[f64], tol: f64) -> Result<(f64, Vec<GrowthRow>)> {
    let r_max = radii.iter().fold(0.0f64, |m, r| m.max(*r));
    let mut v1 = f64::INFINITY;
    for k in 0..=(r_max.ceil() as usize) {
        let c = point_at_distance(domain, q, u, k as f64)?;
        v1 = v1.min(ball_area_with(domain, c, 1.0, tol)?.value);
    }
    let rows = radii
        .iter()
        .map(|&r| {
            Ok(GrowthRow {
                radius: r,
                area: ball_area_with(domain, q, r, tol)?.value,
                packing_bound: (r / 2.0 - 1.0) * v1,
                literal_bound: (r - 1.0) * v1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((v1, rows))
}

pub fn ball_growth_suite() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let radii: Vec<f64> = (2..=8).map(f64::from).collect();
    for (name, d) in [("disk", ConvexDomain::unit_disk()), ("4-ball", ConvexDomain::unit_pball(4.0)?)] {
        let (_, rows) = ball_growth(&d, Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), &radii, 1e-3)?;
        for r in rows {
            checks.push(Check::at_least(format!("{name} R={} area vs (R/2-1)V1", r.radius), r.area, r.packing_bound));
        }
    }
    Ok(SuiteReport::new("ball-growth", checks))
}

/// Random domain for the normalization suite.
pub fn random_smooth_domain(rng: &mut ChaCha8Rng, i: usize) -> Result<ConvexDomain> {
    let c = Point2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    match i % 4 {
        0 => ConvexDomain::disk(c, rng.random_range(0.5..2.0)),
        1 => ConvexDomain::ellipse(c, rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), rng.random_range(0.0..PI)),
        2 => ConvexDomain::pball(rng.random_range(1.5..8.0), c, rng.random_range(0.5..2.0)),
        _ => ConvexDomain::smooth_polygon(rng.random_range(3..=6), rng.random_range(2.0..8.0), c, 1.0, rng.random_range(0.0..PI)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub cases: usize,
    pub worst_vertex_residual: f64,
    pub worst_tangency_residual: f64,
    pub min_alpha: f64,
    pub max_alpha: f64,
    pub worst_fixed_point_drift: f64,
    pub worst_isometry_defect: f64,
    pub errors: usize,
}

/// Normalizes `cases` random ideal triangles in random smooth domains.
pub fn normalization_stats(cases: usize, seed: u64) -> NormalizationStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = NormalizationStats {
        cases: 0,
        worst_vertex_residual: 0.0,
        worst_tangency_residual: 0.0,
        min_alpha: f64::INFINITY,
        max_alpha: f64::NEG_INFINITY,
        worst_fixed_point_drift: 0.0,
        worst_isometry_defect: 0.0,
        errors: 0,
    };
    let mut i = 0;
    while s.cases < cases {
        i += 1;
        let Ok(d) = random_smooth_domain(&mut rng, i) else { continue };
        let period = d.param_period();
        let t: [f64; 3] = std::array::from_fn(|k| (k as f64 + rng.random_range(0.1..0.9)) / 3.0 * period);
        let Ok(tri) = make_ideal_triangle(&d, t[0], t[1], t[2]) else { continue };
        if !tri.valid {
            continue;
        }
        s.cases += 1;
        let run = || -> Result<(f64, f64, f64, f64, f64)> {
            let r = normalize_triangle_pointed(&d, &tri)?;
            let t2 = ideal_triangle_from_points(&r.domain, NORMAL_VERTICES, [0.0; 3])?;
            let r2 = normalize_triangle_pointed(&r.domain, &t2)?;
            let drift = r2.map.distance(&ProjectiveMap::identity()).max((r2.alpha - r.alpha).abs());
            Ok((r.vertex_residual, r.tangency_residual, r.alpha, drift, isometry_defect(&d, &tri, &r)?))
        };
        match run() {
            Ok((vr, tr, alpha, drift, iso)) => {
                s.worst_vertex_residual = s.worst_vertex_residual.max(vr);
                s.worst_tangency_residual = s.worst_tangency_residual.max(tr);
                s.min_alpha = s.min_alpha.min(alpha);
                s.max_alpha = s.max_alpha.max(alpha);
                s.worst_fixed_point_drift = s.worst_fixed_point_drift.max(drift);
                s.worst_isometry_defect = s.worst_isometry_defect.max(iso);
            }
            Err(_) => s.errors += 1,
        }
    }
    s
}

pub fn normalization_suite(cases: usize, seed: u64) -> SuiteReport {
    let s = normalization_stats(cases, seed);
    SuiteReport::new(
        "normalization",
        vec![
            Check::at_most("errors", s.errors as f64, 0.0),
            Check::at_most("vertex residual", s.worst_vertex_residual, 1e-8),
            Check::at_most("tangency residual", s.worst_tangency_residual, 1e-8),
            Check::at_least("smallest alpha", s.min_alpha, f64::MIN_POSITIVE),
            Check::at_most("largest alpha", s.max_alpha, 0.5 + 1e-12),
            Check::at_most("fixed point drift", s.worst_fixed_point_drift, 1e-8),
            Check::at_most("isometry defect", s.worst_isometry_defect, 1e-6),
        ],
    )
}
