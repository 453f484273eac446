//! Finite-difference-like combinations of shifted powers and shifted
//! `x^d ln x` terms whose leading orders cancel exactly. Direct evaluation
//! loses all digits for large indices, so beyond `SWITCH` the combination is
//! expanded in powers of 1/j and only the surviving orders are summed.

/// Index from which the series replaces direct evaluation.
pub(crate) const SWITCH: f64 = 16.0;
const TERMS: usize = 48;

/// w · (j + o)^(a − d)
#[derive(Debug, Clone, Copy)]
pub(crate) struct Pow {
    pub w: f64,
    pub o: f64,
    pub d: usize,
}

fn pow0(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

/// Σ w_i (j + o_i)^(a − d_i), all buckets of order j^(a − n) with n < `first`
/// being identically zero.
pub(crate) fn pow_combo(terms: &[Pow], a: f64, j: f64, first: usize) -> f64 {
    if j < SWITCH {
        terms.iter().map(|t| t.w * pow0(j + t.o, a - t.d as f64)).sum()
    } else {
        pow_series(terms, a, j, first)
    }
}

/// Coefficient of j^(a − n) in the expansion.
pub(crate) fn pow_bucket(terms: &[Pow], a: f64, n: usize) -> f64 {
    terms
        .iter()
        .filter(|t| t.d <= n)
        .map(|t| {
            let m = n - t.d;
            t.w * binom(a - t.d as f64, m) * t.o.powi(m as i32)
        })
        .sum()
}

fn pow_series(terms: &[Pow], a: f64, j: f64, first: usize) -> f64 {
    let mut acc = 0.0;
    let inv = 1.0 / j;
    let mut scale = j.powf(a) * inv.powi(first as i32);
    for n in first..first + TERMS {
        acc += pow_bucket(terms, a, n) * scale;
        scale *= inv;
    }
    acc
}

/// Generalized binomial coefficient C(p, m).
pub(crate) fn binom(p: f64, m: usize) -> f64 {
    let mut c = 1.0;
    for r in 0..m {
        c *= (p - r as f64) / (r as f64 + 1.0);
    }
    c
}

/// w · P(j) · ln(j + o), with P given by coefficients of 1, j, j², j³.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogTerm {
    pub w: f64,
    pub o: f64,
    pub poly: [f64; 4],
}

/// Σ w_i P_i(j) ln(j + o_i) + `constant(j)`, where the ln j part and every
/// non-negative power of j cancel exactly against the constant.
pub(crate) fn log_combo<C: Fn(f64) -> f64>(terms: &[LogTerm], constant: C, j: f64) -> f64 {
    if j < SWITCH {
        let direct: f64 = terms
            .iter()
            .map(|t| {
                let x = j + t.o;
                if x == 0.0 {
                    0.0
                } else {
                    t.w * horner(&t.poly, j) * x.ln()
                }
            })
            .sum();
        direct + constant(j)
    } else {
        log_series(terms, j)
    }
}

/// Coefficient of j^(−n), n ≥ 1, in the expansion of the log terms.
pub(crate) fn log_bucket(terms: &[LogTerm], n: usize) -> f64 {
    let mut c = 0.0;
    for t in terms {
        if t.o == 0.0 {
            continue;
        }
        for (d, p) in t.poly.iter().enumerate() {
            // j^d · (−1)^{m+1} o^m / (m j^m) with d − m = −n
            let m = d + n;
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            c += t.w * p * sign * t.o.powi(m as i32) / m as f64;
        }
    }
    c
}

fn log_series(terms: &[LogTerm], j: f64) -> f64 {
    let inv = 1.0 / j;
    let mut scale = inv;
    let mut acc = 0.0;
    for n in 1..=TERMS {
        acc += log_bucket(terms, n) * scale;
        scale *= inv;
    }
    acc
}

fn horner(p: &[f64; 4], x: f64) -> f64 {
    ((p[3] * x + p[2]) * x + p[1]) * x + p[0]
}
