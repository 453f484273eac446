//! Gauss–Legendre rules, dyadically graded composite quadrature for
//! endpoint singularities, pointwise evaluation of the logarithmic
//! Laplacian, load vectors and the discrete error norms.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::mesh::{FemFunction, Mesh};
use crate::special::rho1;

pub const MAX_GAUSS_ORDER: usize = 64;
pub const DEFAULT_ORDER: usize = 16;
pub const DEFAULT_DEPTH: usize = 40;

/// Smallest lower limit used when `L_Δu` is sampled exactly at an endpoint.
pub const ENDPOINT_TRUNCATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule on [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut acc = 0.0;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + r * t);
        }
        acc * r
    }
}

fn legendre_rule(n: usize) -> QuadRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            x = 0.0;
            dp = 1.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadRule { nodes, weights }
}

fn rules() -> &'static [QuadRule] {
    static RULES: OnceLock<Vec<QuadRule>> = OnceLock::new();
    RULES.get_or_init(|| (1..=MAX_GAUSS_ORDER).map(legendre_rule).collect())
}

pub(crate) fn rule(n: usize) -> &'static QuadRule {
    &rules()[n - 1]
}

/// Gauss–Legendre rule with `n` points on (−1, 1), 1 ≤ n ≤ 64.
pub fn gauss_legendre(n: usize) -> Result<QuadRule> {
    if !(1..=MAX_GAUSS_ORDER).contains(&n) {
        return Err(Error::arg(format!(
            "Gauss-Legendre order must lie in 1..={MAX_GAUSS_ORDER}, got {n}"
        )));
    }
    Ok(rule(n).clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularEnd {
    None,
    Left,
    Right,
    Both,
}

impl SingularEnd {
    pub fn from_flags(left: bool, right: bool) -> Self {
        match (left, right) {
            (false, false) => SingularEnd::None,
            (true, false) => SingularEnd::Left,
            (false, true) => SingularEnd::Right,
            (true, true) => SingularEnd::Both,
        }
    }
}

/// Panel count and rule order for graded quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadParams {
    pub order: usize,
    pub depth: usize,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            order: DEFAULT_ORDER,
            depth: DEFAULT_DEPTH,
        }
    }
}

impl QuadParams {
    fn validate(&self) -> Result<()> {
        if !(1..=MAX_GAUSS_ORDER).contains(&self.order) {
            return Err(Error::arg(format!("quadrature order {} out of range", self.order)));
        }
        Ok(())
    }
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { x, value: v })
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, q: &QuadRule) -> Result<f64> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut acc = 0.0;
    for (t, w) in q.nodes.iter().zip(&q.weights) {
        acc += w * checked(f, c + r * t)?;
    }
    Ok(acc * r)
}

/// Dyadic grading toward `a` (when `toward_a`) or toward `b`.
fn graded_one_side<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    toward_a: bool,
    depth: usize,
    q: &QuadRule,
) -> Result<f64> {
    let len = b - a;
    let point = |frac: f64| if toward_a { a + len * frac } else { b - len * frac };
    let mut total = 0.0;
    let mut outer = 1.0;
    for _ in 0..depth {
        let inner = 0.5 * outer;
        let (lo, hi) = if toward_a {
            (point(inner), point(outer))
        } else {
            (point(outer), point(inner))
        };
        total += panel(f, lo, hi, q)?;
        outer = inner;
    }
    let (lo, hi) = if toward_a {
        (a, point(outer))
    } else {
        (point(outer), b)
    };
    // innermost panel: skipped when it has collapsed onto the end in floating
    // point, dropped when negligible
    let c = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    if q.nodes.iter().all(|t| {
        let x = c + r * t;
        x > lo && x < hi
    }) {
        let last = panel(f, lo, hi, q)?;
        if last.abs() >= 1e-16 * total.abs() {
            total += last;
        }
    }
    Ok(total)
}

/// Integrates `f` over [a, b].
///
/// With a singular end the interval is cut into panels whose lengths halve
/// toward that end (`depth` levels); `Both` grades each half toward its own end.
/// Without one, `depth` equal panels are used.
pub fn integrate_graded<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    singular_end: SingularEnd,
    depth: usize,
    order: usize,
) -> Result<f64> {
    if !(a < b) {
        return Err(Error::arg(format!("integration interval [{a}, {b}] is empty")));
    }
    QuadParams { order, depth }.validate()?;
    let q = rule(order);
    match singular_end {
        SingularEnd::None => {
            let n = depth.max(1);
            let h = (b - a) / n as f64;
            let mut acc = 0.0;
            for k in 0..n {
                acc += panel(&f, a + k as f64 * h, a + (k + 1) as f64 * h, q)?;
            }
            Ok(acc)
        }
        SingularEnd::Left => graded_one_side(&f, a, b, true, depth, q),
        SingularEnd::Right => graded_one_side(&f, a, b, false, depth, q),
        SingularEnd::Both => {
            let m = 0.5 * (a + b);
            Ok(graded_one_side(&f, a, m, true, depth, q)? + graded_one_side(&f, m, b, false, depth, q)?)
        }
    }
}

/// A function on the real line that vanishes outside `[a, b]`, with the
/// points where it is not smooth (jumps, kinks, log-type singularities).
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub a: f64,
    pub b: f64,
    pub breaks: Vec<f64>,
}

impl Support {
    pub fn interval(a: f64, b: f64) -> Self {
        Support {
            a,
            b,
            breaks: Vec::new(),
        }
    }

    pub fn with_breaks(a: f64, b: f64, breaks: Vec<f64>) -> Self {
        Support { a, b, breaks }
    }

    /// Support of φ_i on `mesh`, with the hat's own nodes as breaks.
    pub fn of_basis(mesh: &Mesh, i: usize) -> Self {
        let (a, b) = mesh.support(i);
        Support::with_breaks(a, b, vec![mesh.node(i)])
    }

    fn all_breaks(&self) -> impl Iterator<Item = f64> + '_ {
        [self.a, self.b].into_iter().chain(self.breaks.iter().copied())
    }
}

fn sorted_cuts(lo: f64, hi: f64, pts: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut cuts = vec![lo, hi];
    let tiny = 1e-14 * (hi - lo).abs().max(1.0);
    cuts.extend(pts.filter(|&p| p > lo + tiny && p < hi - tiny));
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup_by(|x, y| (*x - *y).abs() <= tiny);
    cuts
}

fn loglap_level<F: Fn(f64) -> f64>(
    u: &F,
    support: &Support,
    x: f64,
    t_min: f64,
    params: QuadParams,
) -> Result<f64> {
    let q = rule(params.order);
    let ux = checked(u, x)?;

    // ∫_{t_min}^1 [2u(x) − u(x+t) − u(x−t)] / t dt
    let diff = |t: f64| (2.0 * ux - u(x + t) - u(x - t)) / t;
    let cuts = sorted_cuts(t_min, 1.0, support.all_breaks().map(|p| (p - x).abs()));
    let mut near = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let m = 0.5 * (lo + hi);
        near += graded_one_side(&diff, lo, m, true, params.depth, q)?;
        near += graded_one_side(&diff, m, hi, false, params.depth, q)?;
    }

    // −∫_{Ω∖(x−1, x+1)} u(y)/|x−y| dy, bounded kernel
    let far_fn = |y: f64| u(y) / (x - y).abs();
    let mut far = 0.0;
    let pieces = [(support.a, support.b.min(x - 1.0)), (support.a.max(x + 1.0), support.b)];
    for (lo, hi) in pieces {
        if hi <= lo {
            continue;
        }
        let cuts = sorted_cuts(lo, hi, support.breaks.iter().copied());
        for w in cuts.windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            far += graded_one_side(&far_fn, w[0], m, true, params.depth, q)?;
            far += graded_one_side(&far_fn, m, w[1], false, params.depth, q)?;
        }
    }
    Ok(near - far + rho1() * ux)
}

fn loglap_refined<F: Fn(f64) -> f64>(
    u: &F,
    support: &Support,
    x: f64,
    tol: f64,
    t_min: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::arg("tolerance must be positive"));
    }
    const LEVELS: [QuadParams; 8] = [
        QuadParams { order: 8, depth: 12 },
        QuadParams { order: 12, depth: 20 },
        QuadParams { order: 16, depth: 30 },
        QuadParams { order: 20, depth: 40 },
        QuadParams { order: 28, depth: 50 },
        QuadParams { order: 40, depth: 60 },
        QuadParams { order: 52, depth: 80 },
        QuadParams { order: 64, depth: 100 },
    ];
    let mut prev = loglap_level(u, support, x, t_min, LEVELS[0])?;
    let mut achieved = f64::INFINITY;
    for p in &LEVELS[1..] {
        let cur = loglap_level(u, support, x, t_min, *p)?;
        achieved = (cur - prev).abs();
        if achieved <= tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Convergence {
        what: "eval_loglap",
        estimate: prev,
        achieved,
    })
}

/// Evaluates L_Δu at an interior point `x` of the support of `u`.
///
/// Refines order and grading depth together until two successive levels
/// agree within `tol`.
pub fn eval_loglap<F: Fn(f64) -> f64>(u: F, support: &Support, x: f64, tol: f64) -> Result<f64> {
    if !(x > support.a && x < support.b) {
        return Err(Error::arg(format!(
            "x = {x} must lie strictly inside ({}, {})",
            support.a, support.b
        )));
    }
    loglap_refined(&u, support, x, tol, 0.0)
}

/// Same as [`eval_loglap`] but accepts the closed support, cutting the
/// singular integral at `t ≥ t_min` when `x` is an endpoint.
pub fn eval_loglap_truncated<F: Fn(f64) -> f64>(
    u: F,
    support: &Support,
    x: f64,
    tol: f64,
    t_min: f64,
) -> Result<f64> {
    if !(x >= support.a && x <= support.b) {
        return Err(Error::arg(format!(
            "x = {x} outside [{}, {}]",
            support.a, support.b
        )));
    }
    let at_end = x == support.a || x == support.b;
    if at_end {
        log::info!("L_Δu sampled at endpoint x = {x}: singular integral truncated at t = {t_min:e}");
        loglap_refined(&u, support, x, tol, t_min)
    } else {
        loglap_refined(&u, support, x, tol, 0.0)
    }
}

/// F_i = ∫ f φ_i. Elements touching a flagged endpoint are integrated with
/// graded panels; the rest with a single rule of `params.order` points.
pub fn load_vector<F: Fn(f64) -> f64>(
    mesh: &Mesh,
    f: F,
    ends: SingularEnd,
    params: QuadParams,
) -> Result<Vec<f64>> {
    params.validate()?;
    let h = mesh.h();
    let last = mesh.elements() - 1;
    let mut out = vec![0.0; mesh.dim()];
    for e in 0..mesh.elements() {
        let a = mesh.node(e);
        let b = mesh.node(e + 1);
        let left_end = e == 0 && matches!(ends, SingularEnd::Left | SingularEnd::Both);
        let right_end = e == last && matches!(ends, SingularEnd::Right | SingularEnd::Both);
        let grading = SingularEnd::from_flags(left_end, right_end);
        let depth = if grading == SingularEnd::None { 1 } else { params.depth };
        out[e] += integrate_graded(|x| f(x) * (b - x) / h, a, b, grading, depth, params.order)?;
        out[e + 1] += integrate_graded(|x| f(x) * (x - a) / h, a, b, grading, depth, params.order)?;
    }
    Ok(out)
}

/// M·g for the mass matrix of `mesh`, computed from its three bands.
pub fn mass_weighted_load(mesh: &Mesh, nodal_values: &[f64]) -> Result<Vec<f64>> {
    let n = mesh.dim();
    if nodal_values.len() != n {
        return Err(Error::arg(format!(
            "expected {n} nodal values, got {}",
            nodal_values.len()
        )));
    }
    let h = mesh.h();
    let g = nodal_values;
    Ok((0..n)
        .map(|i| {
            let diag = if i == 0 || i == n - 1 { h / 3.0 } else { 2.0 * h / 3.0 };
            let mut v = diag * g[i];
            if i > 0 {
                v += h / 6.0 * g[i - 1];
            }
            if i + 1 < n {
                v += h / 6.0 * g[i + 1];
            }
            v
        })
        .collect())
}

/// L² error over `window` (default the whole mesh interval). Boundary
/// elements of the window are graded toward the outer ends.
pub fn error_l2<F: Fn(f64) -> f64>(exact: F, approx: &FemFunction, window: Option<(f64, f64)>) -> f64 {
    let mesh = approx.mesh();
    let (wa, wb) = window.unwrap_or((0.0, mesh.length()));
    let (wa, wb) = (wa.max(0.0), wb.min(mesh.length()));
    if wb <= wa {
        return 0.0;
    }
    let q = rule(DEFAULT_ORDER);
    let sq = |x: f64| {
        let d = exact(x) - approx.eval(x);
        d * d
    };
    let mut total = 0.0;
    for e in 0..mesh.elements() {
        let a = mesh.node(e).max(wa);
        let b = mesh.node(e + 1).min(wb);
        if b <= a {
            continue;
        }
        let grade_left = e == 0;
        let grade_right = e == mesh.elements() - 1;
        total += match (grade_left, grade_right) {
            (false, false) => q.integrate(a, b, sq),
            (l, r) => {
                let end = SingularEnd::from_flags(l, r);
                integrate_unchecked(&sq, a, b, end, DEFAULT_DEPTH, q)
            }
        };
    }
    total.sqrt()
}

fn integrate_unchecked<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, end: SingularEnd, depth: usize, q: &QuadRule) -> f64 {
    let g = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::NAN
        }
    };
    let one = |lo: f64, hi: f64, toward_lo: bool| {
        let mut total = 0.0;
        let mut outer = 1.0;
        let len = hi - lo;
        for level in 0..=depth {
            let inner = if level == depth { 0.0 } else { 0.5 * outer };
            let (p, r) = if toward_lo {
                (lo + len * inner, lo + len * outer)
            } else {
                (hi - len * outer, hi - len * inner)
            };
            let v = q.integrate(p, r, g);
            if v.is_finite() {
                total += v;
            }
            outer = inner;
        }
        total
    };
    match end {
        SingularEnd::None => q.integrate(a, b, g),
        SingularEnd::Left => one(a, b, true),
        SingularEnd::Right => one(a, b, false),
        SingularEnd::Both => {
            let m = 0.5 * (a + b);
            one(a, m, true) + one(m, b, false)
        }
    }
}

/// Maximum of |exact − approx| over `samples_per_element` equispaced points
/// per element, nodes included.
pub fn error_sup<F: Fn(f64) -> f64>(exact: F, approx: &FemFunction, samples_per_element: usize) -> Result<f64> {
    if samples_per_element < 2 {
        return Err(Error::arg("need at least two samples per element"));
    }
    Ok(sup_location(&exact, approx, samples_per_element).0)
}

/// Value and abscissa of the largest sampled error.
pub fn sup_location<F: Fn(f64) -> f64>(exact: &F, approx: &FemFunction, samples_per_element: usize) -> (f64, f64) {
    let mesh = approx.mesh();
    let s = samples_per_element.max(2);
    let mut best = (0.0, 0.0);
    for e in 0..mesh.elements() {
        let a = mesh.node(e);
        let b = mesh.node(e + 1);
        for k in 0..s {
            let x = if k == s - 1 { b } else { a + (b - a) * k as f64 / (s - 1) as f64 };
            let d = (exact(x) - approx.eval(x)).abs();
            if d > best.0 {
                best = (d, x);
            }
        }
    }
    best
}
