//! Exponentially scaled modified Bessel function e^{-x} I_n(x), x >= 0.
//!
//! Internally every regime returns a mantissa and a log shift so that values
//! far below the double-precision range (large order, tiny argument) are still
//! representable in log form.

use std::f64::consts::TAU;

use super::{check_finite, check_order, ln_fact, SpecFunResult};
use crate::error::{Error, Result};

const SERIES_MAX_X: f64 = 2.0;
const RESCALE_AT: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;
const LN_RESCALE_BY: f64 = -575.646_273_248_511_4; // ln(1e-250)

fn check_arg(order: u32, x: f64) -> Result<()> {
    check_order(order)?;
    check_finite("x", x)?;
    if x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "modified Bessel argument must be non-negative, got {x}"
        )));
    }
    Ok(())
}

/// e^{-x} I_order(x). Lies in (0, 1] for order 0 and [0, 1) otherwise; may
/// underflow to zero for large orders at small x.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    check_arg(order, x)?;
    Ok(ie(order, x))
}

/// I_order(x) as `value * exp(log_scale)` with a finite mantissa.
pub fn bessel_i(order: u32, x: f64) -> Result<SpecFunResult> {
    check_arg(order, x)?;
    if x == 0.0 {
        return Ok(SpecFunResult::unscaled(if order == 0 { 1.0 } else { 0.0 }));
    }
    let (mant, shift) = ie_parts(order, x);
    Ok(SpecFunResult {
        value: mant,
        log_scale: shift + x,
    })
}

pub(crate) fn ie(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let (mant, shift) = ie_parts(n, x);
    if shift == 0.0 {
        mant
    } else {
        mant * shift.exp()
    }
}

/// ln(e^{-x} I_n(x)) for x > 0.
pub(crate) fn ln_ie(n: u32, x: f64) -> f64 {
    let (mant, shift) = ie_parts(n, x);
    mant.ln() + shift
}

pub(crate) fn asymptotic_threshold(n: u32) -> f64 {
    let nf = n as f64;
    (0.5 * nf * nf).max(30.0)
}

fn ie_parts(n: u32, x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= SERIES_MAX_X {
        ie_series(n, x)
    } else if x >= asymptotic_threshold(n) {
        (ie_asymptotic(n, x), 0.0)
    } else {
        ie_miller(n, x)
    }
}

fn ie_series(n: u32, x: f64) -> (f64, f64) {
    let half = 0.5 * x;
    let shift = n as f64 * half.ln() - ln_fact(n as u64) - x;
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + n as f64));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    (sum, shift)
}

fn ie_miller(n: u32, x: f64) -> (f64, f64) {
    let start = (n as f64).max((80.0 * x).sqrt()).max(x) + 30.0;
    let top = start.ceil() as u32;
    let two_over_x = 2.0 / x;
    let mut i_next = 0.0;
    let mut i_cur = 1e-30;
    let mut norm = 0.0; // 2 * sum_{k >= 1}
    let mut saved = 0.0;
    let mut saved_shift = 0.0;
    for k in (1..=top).rev() {
        let i_prev = k as f64 * two_over_x * i_cur + i_next;
        i_next = i_cur;
        i_cur = i_prev;
        let idx = k - 1;
        if idx == n {
            saved = i_cur;
            saved_shift = 0.0;
        }
        if idx > 0 {
            norm += 2.0 * i_cur;
        }
        if i_cur > RESCALE_AT {
            i_cur *= RESCALE_BY;
            i_next *= RESCALE_BY;
            norm *= RESCALE_BY;
            // Keep the saved value's mantissa and account for the rescale in
            // its shift, so it cannot underflow.
            saved_shift += LN_RESCALE_BY;
        }
    }
    norm += i_cur;
    (saved / norm, saved_shift)
}

fn ie_asymptotic(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let eight_x = 8.0 * x;
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut prev_mag = f64::INFINITY;
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * eight_x);
        let mag = term.abs();
        if mag > prev_mag {
            break;
        }
        sum += term;
        if mag < 1e-17 * sum.abs() {
            break;
        }
        prev_mag = mag;
    }
    sum / (TAU * x).sqrt()
}
