//! Quasi-symmetry constants of sampled convex functions and the Hölder
//! bounds they imply.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{ConvexDomain, Point2};
use crate::error::{Error, Result};
use crate::normalize::{boundary_graph_with, graph_alpha_fit, Frame, PowerFit, SIGNAL_FLOOR};

/// Default grid size of the pair scans.
pub const REGULARITY_GRID: usize = 1025;

/// Uniform samples of a function on `[lo, hi]`, with optional derivative
/// samples on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub lo: f64,
    pub hi: f64,
    pub values: Vec<f64>,
    pub derivative: Option<Vec<f64>>,
}

impl SampledFunction {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 65 {
            return Err(Error::InvalidArgument("at least 65 samples required".into()));
        }
        if !(hi > lo) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("bad interval or non-finite samples".into()));
        }
        Ok(Self {
            lo,
            hi,
            values,
            derivative: None,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let h = (hi - lo) / (n.max(2) - 1) as f64;
        Self::new(lo, hi, (0..n).map(|i| f(lo + i as f64 * h)).collect())
    }

    /// Samples on `[-2a, 2a]`.
    pub fn symmetric<F: Fn(f64) -> f64>(f: F, a: f64, n: usize) -> Result<Self> {
        Self::from_fn(f, -2.0 * a, 2.0 * a, n)
    }

    /// Attaches exact derivative samples.
    pub fn with_derivative<F: Fn(f64) -> f64>(mut self, df: F) -> Self {
        self.derivative = Some((0..self.len()).map(|i| df(self.x(i))).collect());
        self
    }

    /// Attaches central-difference derivatives, one-sided at the ends.
    pub fn with_difference_derivative(mut self) -> Self {
        self.derivative = Some(self.differences());
        self
    }

    fn differences(&self) -> Vec<f64> {
        let (v, h, n) = (&self.values, self.spacing(), self.len());
        (0..n)
            .map(|i| match i {
                0 => (v[1] - v[0]) / h,
                _ if i == n - 1 => (v[n - 1] - v[n - 2]) / h,
                _ => (v[i + 1] - v[i - 1]) / (2.0 * h),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    /// Linear interpolation, exact at grid points.
    pub fn at(&self, x: f64) -> f64 {
        let t = ((x - self.lo) / self.spacing()).clamp(0.0, (self.len() - 1) as f64);
        let i = (t.floor() as usize).min(self.len() - 2);
        let s = t - i as f64;
        self.values[i] * (1.0 - s) + self.values[i + 1] * s
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Midpoint convexity on consecutive grid triples, up to rounding.
    pub fn is_convex(&self) -> bool {
        let tol = 1e-12 * self.sup_norm().max(f64::MIN_POSITIVE);
        self.values.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -tol)
    }

    /// Derivative samples as a function of their own.
    pub fn derivative_function(&self) -> Result<SampledFunction> {
        let d = self.derivative.clone().unwrap_or_else(|| self.differences());
        SampledFunction::new(self.lo, self.hi, d)
    }

    fn degenerate_floor(&self) -> f64 {
        1e-14 * self.sup_norm()
    }
}

/// Ratio with the conventions `0/0 = 1` and `positive/0 = ∞`; magnitudes
/// below `floor` count as zero.
fn ratio(num: f64, den: f64, floor: f64) -> f64 {
    let (num, den) = (num.abs(), den.abs());
    match (num <= floor, den <= floor) {
        (true, true) => 1.0,
        (false, true) => f64::INFINITY,
        _ => num / den,
    }
}

/// Sup over grid pairs `(i, k)` of `ratio(i, k)`, scanned by row in parallel.
fn pair_sup<F: Fn(usize, usize) -> f64 + Sync>(n: usize, g: F) -> f64 {
    (1..n.saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            let kmax = i.min(n - 1 - i);
            (1..=kmax).map(|k| g(i, k)).fold(1.0f64, f64::max)
        })
        .reduce(|| 1.0, f64::max)
}

/// Smallest `K ≥ 1` with `|f(x+h) − f(x)| ≤ K |f(x) − f(x−h)|` on all grid
/// pairs.
pub fn qs_constant(f: &SampledFunction) -> f64 {
    let v = &f.values;
    let floor = f.degenerate_floor();
    pair_sup(f.len(), |i, k| ratio(v[i + k] - v[i], v[i] - v[i - k], floor))
}

/// Smallest `H ≥ 1` with `D_x(h) ≤ H D_x(−h)` on all grid pairs, where
/// `D_x(h) = f(x+h) − f(x) − f'(x) h`. Uses the attached derivative or
/// central differences.
pub fn qsc_constant(f: &SampledFunction) -> Result<f64> {
    if !f.is_convex() {
        return Err(Error::NotConvex);
    }
    let d = f.derivative.clone().unwrap_or_else(|| f.differences());
    let (v, h) = (&f.values, f.spacing());
    let floor = f.degenerate_floor();
    Ok(pair_sup(f.len(), |i, k| {
        let step = k as f64 * h;
        let fwd = v[i + k] - v[i] - d[i] * step;
        let bwd = v[i - k] - v[i] + d[i] * step;
        ratio(fwd, bwd, floor)
    }))
}

/// `(4 H (H + 1))^{(1 + a)/a}`.
pub fn chain_constant(h: f64, a: f64) -> f64 {
    (4.0 * h * (h + 1.0)).powf((1.0 + a) / a)
}

/// `1 + log2(1 + 1/c)`.
pub fn chain_exponent(c: f64) -> f64 {
    1.0 + (1.0 + 1.0 / c).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub a: f64,
    pub h: f64,
    pub k: f64,
    pub h2: f64,
    pub alpha: f64,
    pub m_f: f64,
    pub bound_margin: f64,
    pub passes: bool,
}

/// Margin below which a bound counts as violated.
pub const MARGIN_TOL: f64 = -1e-9;

/// Checks `f(x) ≤ 160 (H2 + 1) M(f) |x|^α` on the grid points of `[-a, a]`,
/// with `H2 = (4H(H+1))^{(1+a)/a}`, `α = 1 + log2(1 + 1/H2)` and
/// `M(f) = max(f(−a), f(a))`. The samples must cover `[-2a, 2a]`.
pub fn holder_bound_check(f: &SampledFunction, a: f64, h: f64) -> Result<RegularityReport> {
    if !(a > 0.0) || !(h >= 1.0) {
        return Err(Error::InvalidArgument("need a > 0 and H >= 1".into()));
    }
    if f.lo > -2.0 * a * (1.0 - 1e-12) || f.hi < 2.0 * a * (1.0 - 1e-12) {
        return Err(Error::PreconditionViolated("samples must cover [-2a, 2a]".into()));
    }
    let tiny = 1e-14 * f.sup_norm();
    if f.values.iter().any(|v| *v < -tiny) {
        return Err(Error::PreconditionViolated("f is negative".into()));
    }
    if f.at(0.0).abs() > tiny {
        return Err(Error::PreconditionViolated("f(0) is not 0".into()));
    }
    let h2 = chain_constant(h, a);
    let alpha = chain_exponent(h2);
    let m_f = f.at(-a).max(f.at(a));
    let mu = 160.0 * (h2 + 1.0) * m_f;
    let bound_margin = (0..f.len())
        .filter(|i| {
            let x = f.x(*i);
            x.abs() <= a * (1.0 + 1e-12) && x.abs() > 0.5 * f.spacing()
        })
        .map(|i| mu * f.x(i).abs().powf(alpha) - f.values[i])
        .fold(f64::INFINITY, f64::min);
    let bound_margin = if bound_margin.is_finite() { bound_margin } else { 0.0 };
    Ok(RegularityReport {
        a,
        h,
        k: chain_constant(h, a),
        h2,
        alpha,
        m_f,
        bound_margin,
        passes: bound_margin >= MARGIN_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub k: f64,
    pub alpha: f64,
    pub coefficient: f64,
    pub margin: f64,
    pub passes: bool,
}

/// Checks `|f'(x) − f'(y)| ≤ 160 (1 + K) ‖f‖∞ |x − y|^{α−1}` on all grid
/// pairs, with `α = 1 + log2(1 + 1/K)`.
pub fn derivative_holder_check(f: &SampledFunction, k: f64) -> Result<DerivativeCheck> {
    if !f.is_convex() {
        return Err(Error::NotConvex);
    }
    if !(k >= 1.0) {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let d = f.derivative.clone().unwrap_or_else(|| f.differences());
    let alpha = chain_exponent(k);
    let coefficient = 160.0 * (1.0 + k) * f.sup_norm();
    let h = f.spacing();
    let n = f.len();
    let margin = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| coefficient * ((j - i) as f64 * h).powf(alpha - 1.0) - (d[j] - d[i]).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(DerivativeCheck {
        k,
        alpha,
        coefficient,
        margin,
        passes: margin >= MARGIN_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRegularity {
    pub point: Point2,
    /// Half-width of the extracted strip; the chain runs with `a = rho / 2`.
    pub rho: f64,
    /// Set when the graph vanishes on a neighbourhood of the tangency point.
    pub flat: bool,
    pub report: RegularityReport,
    pub derivative: DerivativeCheck,
    pub fit: Option<PowerFit>,
    /// `f ≤ μ |x|^α` with `μ = 160 (H2 + 1) M(f)` on `[-a, a]`.
    pub chain_holds: bool,
}

/// Extracts the boundary graph at `b` over a strip of half the admissible
/// width, measures `H` and `K` on it and runs both Hölder checks.
pub fn boundary_regularity_report(domain: &ConvexDomain, b: Point2) -> Result<BoundaryRegularity> {
    let frame = Frame::at_boundary(domain, b)?;
    let (e1, o) = (frame.x_axis, frame.origin);
    let reach = (domain.support(e1) - e1.dot(o)).min(domain.support(-e1) + e1.dot(o));
    let rho = 0.5 * reach;
    let strip = boundary_graph_with(domain, &frame, rho, REGULARITY_GRID)?;
    let f = SampledFunction::new(-rho, rho, strip.values.clone())?.with_difference_derivative();
    let flat = {
        let c = f.len() / 2;
        f.values[c - 1] <= SIGNAL_FLOOR && f.values[c + 1] <= SIGNAL_FLOOR
    };
    let h = qsc_constant(&f)?;
    let report = holder_bound_check(&f, 0.5 * rho, h)?;
    let k = qs_constant(&f.derivative_function()?);
    let derivative = derivative_holder_check(&f, if k.is_finite() { k } else { 1.0 })?;
    Ok(BoundaryRegularity {
        point: b,
        rho,
        flat,
        chain_holds: report.passes,
        report,
        derivative,
        fit: graph_alpha_fit(&strip).ok(),
    })
}
