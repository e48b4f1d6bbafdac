//! Complementary error function and its inverse.

use core::f64::consts::PI;

use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = core::f64::consts::FRAC_2_SQRT_PI;

/// Below this the power series for erf is used; above it the continued
/// fraction for erfc. At the switch erfc(2) ~ 4.7e-3, so `1 - erf` loses
/// under two decimal digits.
const SERIES_LIMIT: f64 = 2.0;
const MAX_TERMS: usize = 5_000;

/// `erfc(x) = 2/sqrt(pi) * integral_x^inf exp(-t^2) dt`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < SERIES_LIMIT {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (2n+1)!!
///
/// All terms are positive, so there is no cancellation inside the sum.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..MAX_TERMS {
        term *= 2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term <= sum * f64::EPSILON * 0.5 {
            break;
        }
    }
    FRAC_2_SQRT_PI * libm::exp(-x2) * sum
}

/// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
/// evaluated with the modified Lentz algorithm.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..MAX_TERMS {
        let a = k as f64 * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < f64::EPSILON * 0.5 {
            break;
        }
    }
    libm::exp(-x * x) / (libm::sqrt(PI) * f)
}

/// Inverse of [`erfc`] on `(0, 2)`.
///
/// Newton iteration on `ln erfc(x) - ln y`, safeguarded by a bisection
/// bracket. Arguments above 1 are reflected through `erfc(-x) = 2 - erfc(x)`;
/// `2 - y` is exact there.
pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(Error::Domain { name: "erfc_inv argument", value: y });
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    if y > 1.0 {
        return Ok(-erfc_inv_upper(2.0 - y));
    }
    Ok(erfc_inv_upper(y))
}

/// Root of `erfc(x) = y` for `y` in `(0, 1)`; the root is positive.
fn erfc_inv_upper(y: f64) -> f64 {
    // erfc(28) underflows to zero, so every positive double maps below it.
    let (mut lo, mut hi) = (0.0_f64, 28.0_f64);
    let ln_y = libm::log(y);
    let mut x = libm::sqrt(-ln_y).clamp(lo, hi);

    for _ in 0..200 {
        let e = erfc(x);
        let g = libm::log(e) - ln_y;
        if g > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if g == 0.0 {
            return x;
        }
        // d/dx ln erfc(x) = -2/sqrt(pi) exp(-x^2) / erfc(x)
        let slope = -FRAC_2_SQRT_PI * libm::exp(-x * x) / e;
        let mut next = x - g / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.abs().max(1.0) || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    x
}
