//! Small one-dimensional numerical helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
/// Returns the abscissa.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    golden_min(|x| -f(x), a, b, tol)
}

/// Minimum of `f` on `[a, b]`: a uniform pre-scan of `n` points, then
/// golden-section refinement around the best sample. Returns `(x, f(x))`.
pub fn scan_then_golden<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize, tol: f64) -> (f64, f64) {
    let n = n.max(2);
    let h = (b - a) / (n - 1) as f64;
    let (mut bi, mut bv) = (0, f64::INFINITY);
    for i in 0..n {
        let v = f(a + i as f64 * h);
        if v < bv {
            bv = v;
            bi = i;
        }
    }
    let lo = (a + (bi as f64 - 1.0) * h).max(a);
    let hi = (a + (bi as f64 + 1.0) * h).min(b);
    let x = golden_min(&f, lo, hi, tol);
    let v = f(x);
    if v <= bv {
        (x, v)
    } else {
        (a + bi as f64 * h, bv)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton on the Legendre
/// recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

/// Composite Simpson rule over `[a, b]` with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod rule on `[a, b]`; returns the estimate and an error
/// estimate from the embedded 7-point Gauss rule.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [0.0; 15];
    fv[7] = f(c);
    for i in 0..7 {
        fv[i] = f(c - h * GK_X[i]);
        fv[14 - i] = f(c + h * GK_X[i]);
    }
    let mut k = GK_WK[7] * fv[7];
    let mut g = GK_WG[3] * fv[7];
    for i in 0..7 {
        let s = fv[i] + fv[14 - i];
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    let err = ((k - g) * h).abs();
    (k * h, err)
}

/// Globally adaptive Gauss–Kronrod quadrature: the interval with the
/// largest error estimate is bisected until the summed estimate is below
/// `rel_tol·|value|` or `max_intervals` is reached. Starts from `pieces`
/// equal subintervals. Returns `(value, error estimate)`.
pub fn adaptive_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    pieces: usize,
    rel_tol: f64,
    max_intervals: usize,
) -> (f64, f64) {
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let mut iv: Vec<(f64, f64, f64, f64)> = (0..pieces)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (v, e) = kronrod15(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    loop {
        let value: f64 = iv.iter().map(|t| t.2).sum();
        let err: f64 = iv.iter().map(|t| t.3).sum();
        if !value.is_finite() || err <= rel_tol * value.abs() || iv.len() >= max_intervals {
            return (value, err);
        }
        let (w, _) = iv
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = iv.swap_remove(w);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        iv.push((lo, mid, v1, e1));
        iv.push((mid, hi, v2, e2));
    }
}
