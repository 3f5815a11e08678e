//! Bessel function of the first kind J_n(x) for integer n >= 0.
//!
//! Three regimes:
//! * power series for x <= 2 (terms decrease monotonically, no cancellation),
//! * Miller backward recurrence normalised by J_0 + 2 sum J_2k = 1,
//! * Hankel asymptotic expansion once x >= max(25, n^2/2).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI};

use super::{check_finite, check_order, ln_fact};
use crate::error::Result;

const SERIES_MAX_X: f64 = 2.0;
const RESCALE_AT: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// J_order(x). Odd orders are odd in x, even orders even, exactly.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    check_order(order)?;
    check_finite("x", x)?;
    Ok(bessel_j_unchecked(order, x))
}

/// J_n(x) for pre-validated order and finite x.
pub(crate) fn bessel_j_unchecked(n: u32, x: f64) -> f64 {
    let v = j_nonneg(n, x.abs());
    if x < 0.0 && n % 2 == 1 {
        -v
    } else {
        v
    }
}

pub(crate) fn j_nonneg(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_MAX_X {
        j_series(n, x)
    } else if x >= asymptotic_threshold(n) {
        j_hankel(n, x)
    } else {
        j_miller(n, x)
    }
}

pub(crate) fn asymptotic_threshold(n: u32) -> f64 {
    let nf = n as f64;
    (0.5 * nf * nf).max(25.0)
}

fn j_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let ln_t0 = n as f64 * half.ln() - ln_fact(n as u64);
    let t0 = ln_t0.exp();
    if t0 == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + n as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    t0 * sum
}

fn j_miller(n: u32, x: f64) -> f64 {
    let start = x.max(n as f64) + 20.0 + 12.0 * x.cbrt();
    let mut top = start.ceil() as u32;
    if top % 2 == 1 {
        top += 1;
    }
    let two_over_x = 2.0 / x;
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-30; // J_k
    let mut norm = 0.0; // 2 * sum of even-index terms with index >= 2
    let mut saved = 0.0;
    for k in (1..=top).rev() {
        let j_prev = k as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        let idx = k - 1;
        if idx == n {
            saved = j_cur;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > RESCALE_AT {
            j_cur *= RESCALE_BY;
            j_next *= RESCALE_BY;
            norm *= RESCALE_BY;
            saved *= RESCALE_BY;
        }
    }
    norm += j_cur;
    saved / norm
}

fn j_hankel(n: u32, x: f64) -> f64 {
    let (p, q) = hankel_pq(n, x);
    let (s, c) = x.sin_cos();
    // y = x - pi/4
    let cy = (c + s) * FRAC_1_SQRT_2;
    let sy = (s - c) * FRAC_1_SQRT_2;
    // chi = y - n*pi/2
    let (cchi, schi) = match n % 4 {
        0 => (cy, sy),
        1 => (sy, -cy),
        2 => (-cy, -sy),
        _ => (-sy, cy),
    };
    (FRAC_2_PI / x).sqrt() * (p * cchi - q * schi)
}

/// P and Q of the Hankel expansion, summed until terms stop contributing.
fn hankel_pq(n: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (n as f64) * (n as f64);
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev_mag = f64::INFINITY;
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        let mag = term.abs();
        if mag > prev_mag {
            break;
        }
        // a_k / x^k enters P for even k and Q for odd k with alternating signs.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-17 {
            break;
        }
        prev_mag = mag;
    }
    (p, q)
}
