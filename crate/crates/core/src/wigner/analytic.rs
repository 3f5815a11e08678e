//! Closed-form Wigner expression for the perfect vortex, transcribed
//! literally with physical sigma:
//!
//! W = |A|²/(4π²) e^{-2|r|²/σ²} e^{-|p|²σ²/2} (-1)^q C(q) 2^{1-q} π σ^{2q+2}
//!     I_q(B|r|²) L_q[(4|r|² + |p|²σ⁴ + 4(p_x y - p_y x)σ²)/(2σ²)],
//!
//! with C(q) = Σ_{k=0}^{q} k!. Its absolute scale is far below the double
//! range, so it is evaluated as a sign and a logarithm.

use std::f64::consts::{LN_2, PI};

use super::PhaseSpacePoint;
use crate::error::{Error, Result};
use crate::specfun::{bessel_i, laguerre, ln_fact};
use crate::states::{DerivedScales, VortexSpec};

/// Largest charge accepted by the closed form.
pub const ANALYTIC_MAX_CHARGE: u32 = 50;

/// ln Σ_{k=0}^{q} k!.
pub fn ln_factorial_sum(q: u32) -> f64 {
    let top = ln_fact(q as u64);
    let s: f64 = (0..=q as u64).map(|k| (ln_fact(k) - top).exp()).sum();
    top + s.ln()
}

/// Laguerre argument in dimensionless coordinates:
/// 2(x² + y²) + (px² + py²)/2 + 2(px y - py x).
pub fn laguerre_argument(p: &PhaseSpacePoint) -> f64 {
    2.0 * (p.x * p.x + p.y * p.y)
        + 0.5 * (p.px * p.px + p.py * p.py)
        + 2.0 * (p.px * p.y - p.py * p.x)
}

/// (ln|W|, sign of W). A zero value is reported as (-inf, 0).
pub fn wigner_analytic_log(
    scales: &DerivedScales,
    spec: &VortexSpec,
    p: &PhaseSpacePoint,
) -> Result<(f64, f64)> {
    p.check()?;
    let q = spec.charge;
    if q > ANALYTIC_MAX_CHARGE {
        return Err(Error::UnsupportedRange(format!(
            "closed-form Wigner supports q <= {ANALYTIC_MAX_CHARGE}, got {q}"
        )));
    }
    let sigma = scales.sigma;
    let r2 = p.x * p.x + p.y * p.y;
    let p2 = p.px * p.px + p.py * p.py;
    // B|r|² with |r| in meters.
    let z = scales.coeff_b * r2 * sigma * sigma;
    let bess = bessel_i(q, z)?;
    let lag = laguerre(q, laguerre_argument(p))?;
    if bess.value == 0.0 || lag == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let ln_w = 2.0 * scales.coeff_a_log - (4.0 * PI * PI).ln() - 2.0 * r2 - 0.5 * p2
        + ln_factorial_sum(q)
        + (1.0 - q as f64) * LN_2
        + PI.ln()
        + (2 * q + 2) as f64 * sigma.ln()
        + bess.ln()
        + lag.abs().ln();
    let parity = if q.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok((ln_w, parity * lag.signum()))
}

/// The closed form as a plain number (underflows to ±0 for the physical
/// default scales).
pub fn wigner_analytic(
    scales: &DerivedScales,
    spec: &VortexSpec,
    p: &PhaseSpacePoint,
) -> Result<f64> {
    let (ln_w, sign) = wigner_analytic_log(scales, spec, p)?;
    Ok(sign * ln_w.exp())
}
