//! Scalar constants and special functions: digamma, Gamma, the constant
//! `rho1`, the log-Hölder modulus `ell` and the fractional normalisation `c1s`.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// Cutoff of the log-Hölder modulus.
pub const RHO0: f64 = 0.1;

/// Snapshot of the constants used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub euler_gamma: f64,
    pub rho1: f64,
    pub rho0: f64,
}

impl Constants {
    pub fn new() -> Self {
        Constants {
            euler_gamma: EULER_GAMMA,
            rho1: rho1(),
            rho0: RHO0,
        }
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::new()
    }
}

/// ψ(1/2) = −γ − 2 ln 2.
pub const DIGAMMA_HALF: f64 = -1.963_510_026_021_423_5;

/// Digamma function for positive arguments.
///
/// Shifts the argument above 6 with ψ(x) = ψ(x+1) − 1/x and then sums the
/// asymptotic series in 1/x².
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "digamma",
            value: x,
            domain: "(0, inf)",
        });
    }
    Ok(digamma_unchecked(x))
}

fn digamma_unchecked(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 6.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    // Bernoulli terms B_2k / (2k) for k = 1..8
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
        -3617.0 / 8160.0,
    ];
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * inv2 + c;
    }
    shift + x.ln() - 0.5 / x - series * inv2
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function (Lanczos approximation, reflection below 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// ρ₁ = 2 ln 2 + ψ(1/2) − γ, which equals −2γ.
pub fn rho1() -> f64 {
    2.0 * LN_2 + digamma_unchecked(0.5) - EULER_GAMMA
}

/// Log-Hölder modulus ℓ(r) = 1/|ln(min(0.1, r))|.
pub fn ell(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain {
            what: "ell",
            value: r,
            domain: "(0, inf)",
        });
    }
    Ok(1.0 / r.min(RHO0).ln().abs())
}

fn check_open_unit(what: &'static str, s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: s,
            domain: "(0, 1)",
        })
    }
}

/// Normalisation constant of the one-dimensional fractional Laplacian,
/// c₁,ₛ = sin(πs) Γ(2s+1) / π.
pub fn c1s(s: f64) -> Result<f64> {
    check_open_unit("c1s", s)?;
    Ok((PI * s).sin() * gamma(2.0 * s + 1.0) / PI)
}

/// The same constant through 4ˢ π^{−1/2} s (1−s) Γ(1/2+s) / Γ(2−s).
pub fn c1s_gamma_ratio(s: f64) -> Result<f64> {
    check_open_unit("c1s", s)?;
    Ok(s * c1s_over_s(s))
}

/// c₁,ₛ / s = 4ˢ π^{−1/2} Γ(1/2+s) / Γ(1−s), finite as s → 0.
pub(crate) fn c1s_over_s(s: f64) -> f64 {
    4f64.powf(s) * gamma(0.5 + s) / (PI.sqrt() * gamma(1.0 - s))
}
