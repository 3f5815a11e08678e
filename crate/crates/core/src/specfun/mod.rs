//! Special functions: Bessel J_n, exponentially scaled modified Bessel I_n,
//! Laguerre polynomials and ln n!.
//!
//! Only non-negative integer orders up to [`MAX_ORDER`] are supported. The
//! modified Bessel function is exposed only in scaled or log-split form
//! because I_n(x) overflows double precision well inside the argument range
//! used by the vortex states (I_2(225) is of order 10^95).

mod bessel;
mod modified;

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub use bessel::bessel_j;
pub(crate) use bessel::bessel_j_unchecked;
pub use modified::{bessel_i, bessel_i_scaled};
pub(crate) use modified::{ie, ln_ie};

/// Largest supported Bessel/Laguerre order.
pub const MAX_ORDER: u32 = 200;

/// Largest `n` accepted by [`log_factorial`].
pub const MAX_FACTORIAL_ARG: u64 = 1_000_000;

/// A special-function value carried with a natural-log prefactor.
///
/// The represented number is `value * exp(log_scale)`; `value` is always
/// finite. Unscaled calls use `log_scale == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunResult {
    pub value: f64,
    pub log_scale: f64,
}

impl SpecFunResult {
    pub fn unscaled(value: f64) -> Self {
        SpecFunResult {
            value,
            log_scale: 0.0,
        }
    }

    /// Natural log of the represented (positive) number.
    pub fn ln(&self) -> f64 {
        self.value.ln() + self.log_scale
    }
}

pub(crate) fn check_order(order: u32) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "order {order} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

pub(crate) fn check_finite(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "{name} must be finite, got {x}"
        )));
    }
    Ok(())
}

const LN_FACT_TABLE_LEN: usize = 256;

fn ln_fact_table() -> &'static [f64; LN_FACT_TABLE_LEN] {
    static TABLE: OnceLock<[f64; LN_FACT_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; LN_FACT_TABLE_LEN];
        // Products are exact in f64 up to 22!, so start the log sum from there.
        let mut prod = 1.0f64;
        for (n, slot) in t.iter_mut().enumerate().take(23) {
            if n > 0 {
                prod *= n as f64;
            }
            *slot = prod.ln();
        }
        for n in 23..LN_FACT_TABLE_LEN {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// ln(n!) with relative error below 1e-13 for n up to 10^6.
pub fn log_factorial(n: u64) -> Result<f64> {
    if n > MAX_FACTORIAL_ARG {
        return Err(Error::InvalidArgument(format!(
            "log_factorial argument {n} exceeds {MAX_FACTORIAL_ARG}"
        )));
    }
    Ok(ln_fact(n))
}

/// Unchecked ln(n!) for internal callers.
pub(crate) fn ln_fact(n: u64) -> f64 {
    if (n as usize) < LN_FACT_TABLE_LEN {
        return ln_fact_table()[n as usize];
    }
    // Stirling series; the first omitted term is below 1e-22 for n >= 256.
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let corr = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    x * x.ln() - x + 0.5 * (std::f64::consts::TAU * x).ln() + corr
}

/// Laguerre polynomial L_n(x) by the three-term recurrence.
pub fn laguerre(order: u32, x: f64) -> Result<f64> {
    check_order(order)?;
    check_finite("x", x)?;
    Ok(laguerre_unchecked(order, x))
}

pub(crate) fn laguerre_unchecked(order: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if order == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..order {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_factorial_small_values() {
        assert_eq!(log_factorial(0).unwrap(), 0.0);
        assert_eq!(log_factorial(1).unwrap(), 0.0);
        let exact: u64 = (1..=20).product();
        assert_eq!(exact, 2_432_902_008_176_640_000);
        let lf = log_factorial(20).unwrap();
        assert!((lf - (exact as f64).ln()).abs() <= 1e-13 * lf);
    }

    #[test]
    fn log_factorial_stirling_branch_is_continuous() {
        // Table value for 255 plus ln(256) must agree with the Stirling branch.
        let below = ln_fact(255) + 256f64.ln();
        let above = ln_fact(256);
        assert!((below - above).abs() <= 1e-13 * above);
        // ln(10^6 !) to 20 digits.
        let big = log_factorial(1_000_000).unwrap();
        assert!((big - 12_815_518.384_658_17).abs() <= 1e-13 * big);
    }

    #[test]
    fn log_factorial_rejects_huge() {
        assert!(log_factorial(MAX_FACTORIAL_ARG + 1).is_err());
    }

    #[test]
    fn laguerre_low_orders() {
        for q in 0..30 {
            assert_eq!(laguerre(q, 0.0).unwrap(), 1.0);
        }
        assert_eq!(laguerre(1, 2.0).unwrap(), -1.0);
        assert!(laguerre(MAX_ORDER + 1, 1.0).is_err());
        assert!(laguerre(3, f64::NAN).is_err());
    }

    /// Monomial expansion with exact rational coefficients:
    /// L_n(x) = sum_k (-1)^k C(n,k) x^k / k!.
    fn laguerre_monomial(n: u32, x: f64) -> f64 {
        let mut sum = 0.0;
        for k in 0..=n as u64 {
            let binom: u64 = (0..k).fold(1u64, |acc, i| acc * (n as u64 - i) / (i + 1));
            let kfact: u64 = (1..=k).product();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom as f64 * x.powi(k as i32) / kfact as f64;
        }
        sum
    }

    #[test]
    fn laguerre_matches_monomial_oracle() {
        let v = laguerre(5, 3.7).unwrap();
        let oracle = laguerre_monomial(5, 3.7);
        assert!((v - oracle).abs() < 1e-13, "{v} vs {oracle}");
        // Frozen 40-digit value of L_5(3.7).
        assert!((v + 0.205_308_916_666_666_67).abs() < 1e-14);
        for n in 0..12 {
            for &x in &[0.1, 1.0, 2.5, 7.0] {
                let a = laguerre(n, x).unwrap();
                let b = laguerre_monomial(n, x);
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn laguerre_recurrence_roundoff() {
        for q in 1..60u32 {
            for &x in &[0.3, 4.0, 19.5, 60.0] {
                let lm = laguerre(q - 1, x).unwrap();
                let l = laguerre(q, x).unwrap();
                let lp = laguerre(q + 1, x).unwrap();
                let lhs = (q as f64 + 1.0) * lp;
                let rhs = (2.0 * q as f64 + 1.0 - x) * l - q as f64 * lm;
                let scale = lhs.abs().max(rhs.abs()).max((q as f64) * lm.abs()).max(1.0);
                assert!((lhs - rhs).abs() <= 1e-13 * scale, "q={q} x={x}");
            }
        }
    }
}
