//! Regularized incomplete gamma functions and the chi-squared distribution.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000_000;

/// Above this many degrees of freedom the Wilson-Hilferty normal
/// approximation replaces the incomplete gamma evaluation.
pub const WILSON_HILFERTY_DOF: u64 = 1_000_000;

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn log_prefactor(a: f64, x: f64) -> f64 {
    -x + a * x.ln() - ln_gamma(a)
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum.ln() + log_prefactor(a, x)).exp()
}

fn upper_fraction(a: f64, x: f64) -> f64 {
    // modified Lentz
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (h.ln() + log_prefactor(a, x)).exp()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_series(a, x).min(1.0)
    } else {
        (1.0 - upper_fraction(a, x)).max(0.0)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`, accurate in
/// the far tail.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        (1.0 - lower_series(a, x)).max(0.0)
    } else {
        upper_fraction(a, x).min(1.0)
    }
}

fn standard_normal_cdf(z: f64) -> f64 {
    // erfc(t) = Q(1/2, t^2)
    let tail = 0.5 * regularized_gamma_q(0.5, 0.5 * z * z);
    if z < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

fn standard_normal_sf(z: f64) -> f64 {
    standard_normal_cdf(-z)
}

fn wilson_hilferty_z(x: f64, dof: f64) -> f64 {
    let s = 2.0 / (9.0 * dof);
    ((x / dof).cbrt() - (1.0 - s)) / s.sqrt()
}

fn check(x: f64, dof: u64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::arg(format!("chi-squared argument must be >= 0, got {x}")));
    }
    if dof == 0 {
        return Err(Error::arg("chi-squared needs at least one degree of freedom"));
    }
    Ok(())
}

/// `P(X <= x)` for `X ~ chi2(dof)`.
pub fn chi_squared_cdf(x: f64, dof: u64) -> Result<f64> {
    check(x, dof)?;
    if dof > WILSON_HILFERTY_DOF {
        return Ok(standard_normal_cdf(wilson_hilferty_z(x, dof as f64)));
    }
    Ok(regularized_gamma_p(dof as f64 / 2.0, x / 2.0))
}

/// `P(X > x)` for `X ~ chi2(dof)`, computed directly so tiny p-values do not
/// cancel to zero early.
pub fn chi_squared_sf(x: f64, dof: u64) -> Result<f64> {
    check(x, dof)?;
    if dof > WILSON_HILFERTY_DOF {
        return Ok(standard_normal_sf(wilson_hilferty_z(x, dof as f64)));
    }
    Ok(regularized_gamma_q(dof as f64 / 2.0, x / 2.0))
}
