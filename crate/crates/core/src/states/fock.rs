use serde::Serialize;

use super::VortexSpec;
use crate::error::{Error, Result};
use crate::specfun::ln_fact;

/// Tail mass above which a truncated basis is flagged.
pub const TAIL_WARNING: f64 = 1e-9;

/// Truncated pair-coherent-state amplitudes c_n on |n+q, n>.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FockCoefficients {
    /// Renormalised so that the squares sum to one over `0..cutoff`.
    pub coeffs: Vec<f64>,
    /// Fraction of the untruncated norm lying at n >= cutoff.
    pub tail_mass: f64,
    /// Set when `tail_mass` exceeds [`TAIL_WARNING`].
    pub truncation_warning: bool,
}

impl FockCoefficients {
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.abs() > self.coeffs[best].abs() {
                best = n;
            }
        }
        best
    }
}

/// c_n ∝ α^n / sqrt(n! (n+q)!) for n = 0..cutoff, with α taken real.
pub fn pcs_fock_coefficients(spec: &VortexSpec, cutoff: usize) -> Result<FockCoefficients> {
    if cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    let q = spec.charge as u64;
    let ln_a = spec.alpha.ln();
    let ln_term = |n: u64| n as f64 * ln_a - 0.5 * (ln_fact(n) + ln_fact(n + q));
    let logs: Vec<f64> = (0..cutoff as u64).map(ln_term).collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut coeffs: Vec<f64> = logs.iter().map(|l| (l - peak).exp()).collect();
    let kept: f64 = coeffs.iter().map(|c| c * c).sum();

    // Continue the ratio recurrence t_{n+1}/t_n = α / sqrt((n+1)(n+q+1))
    // past the cutoff until the squared terms stop contributing.
    let mut tail = 0.0;
    let mut n = cutoff as u64;
    let mut t = (ln_term(n) - peak).exp();
    #[allow(clippy::explicit_counter_loop)]
    for _ in 0..1_000_000 {
        let t2 = t * t;
        tail += t2;
        if t2 <= 1e-18 * (kept + tail) && (n as f64) > spec.alpha {
            break;
        }
        t *= spec.alpha / (((n + 1) * (n + q + 1)) as f64).sqrt();
        n += 1;
    }
    let tail_mass = tail / (kept + tail);
    let norm = kept.sqrt();
    for c in &mut coeffs {
        *c /= norm;
    }
    Ok(FockCoefficients {
        coeffs,
        tail_mass,
        truncation_warning: tail_mass > TAIL_WARNING,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_i;

    #[test]
    fn tiny_alpha_is_vacuum_like() {
        let spec = VortexSpec::new(1e-12, 0).unwrap();
        let f = pcs_fock_coefficients(&spec, 8).unwrap();
        assert!((f.coeffs[0] - 1.0).abs() < 1e-15);
        assert!(f.coeffs[1..].iter().all(|c| c.abs() < 1e-11));
        assert!(!f.truncation_warning);
    }

    #[test]
    fn alpha_one_matches_direct_sum() {
        let spec = VortexSpec::new(1.0, 0).unwrap();
        let f = pcs_fock_coefficients(&spec, 32).unwrap();
        let mut fact = 1.0f64;
        let raw: Vec<f64> = (0..32)
            .map(|n| {
                if n > 0 {
                    fact *= n as f64;
                }
                1.0 / fact
            })
            .collect();
        let norm: f64 = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
        for (a, b) in f.coeffs.iter().zip(&raw) {
            assert!((a - b / norm).abs() < 1e-15);
        }
    }

    #[test]
    fn alpha_15_charge_2() {
        let spec = VortexSpec::new(15.0, 2).unwrap();
        let f = pcs_fock_coefficients(&spec, 1024).unwrap();
        let s: f64 = f.coeffs.iter().map(|c| c * c).sum();
        assert!((s - 1.0).abs() < 1e-12);
        // Ratio c_{n+1}/c_n = α / sqrt((n+1)(n+q+1)) crosses one here.
        let crossing = (0..1024)
            .find(|&n| 15.0 / (((n + 1) * (n + 3)) as f64).sqrt() < 1.0)
            .unwrap();
        assert_eq!(f.argmax(), crossing);
        assert!((f.argmax() as f64 - 15.0).abs() <= 3.0);
        assert!(!f.truncation_warning);
    }

    #[test]
    fn tail_mass_matches_closed_form_total() {
        // The untruncated sum of α^{2n}/(n!(n+q)!) is α^{-q} I_q(2α).
        let spec = VortexSpec::new(6.0, 3).unwrap();
        let f = pcs_fock_coefficients(&spec, 10).unwrap();
        let q = 3u64;
        let kept: f64 = (0..10u64)
            .map(|n| (2.0 * n as f64 * 6f64.ln() - ln_fact(n) - ln_fact(n + q)).exp())
            .sum();
        let total = bessel_i(3, 12.0).unwrap();
        let total = (total.ln() - 3.0 * 6f64.ln()).exp();
        let want = 1.0 - kept / total;
        assert!(
            (f.tail_mass - want).abs() < 1e-12,
            "{} vs {want}",
            f.tail_mass
        );
        assert!(f.truncation_warning);
    }

    #[test]
    fn zero_cutoff_rejected() {
        assert!(pcs_fock_coefficients(&VortexSpec::new(1.0, 0).unwrap(), 0).is_err());
    }
}
