//! State families, physical scales and quadrature amplitudes.
//!
//! All evaluation happens in dimensionless coordinates: positions are measured
//! in units of the focal-plane Gaussian scale `sigma` and momenta in units of
//! `1/sigma`. Physical units only appear in [`DerivedScales`] and in output
//! metadata.

mod amplitude;
mod diagnostics;
mod field;
mod fock;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{self, MAX_ORDER};

pub(crate) use amplitude::i_pow;
pub use amplitude::{
    bg_amplitude, bg_theta_oracle, calibrate_oracle, perfect_amplitude, BgVortex, OracleConvention,
    PerfectVortex, TwoModeAmplitude, PERFECT_PREFACTOR,
};
pub use diagnostics::{bg_core_radius, count_phase_jumps, radial_fwhm, ring_radius};
pub use field::{amplitude_grid, Axis, ComplexField2D, Field2D, RealField2D};
pub use fock::{pcs_fock_coefficients, FockCoefficients};

/// Largest alpha^2 accepted by [`derive_scales`].
pub const MAX_ALPHA_SQ: f64 = 500.0;

/// Lens and light parameters, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalConfig {
    pub wavelength: f64,
    pub focal_length: f64,
}

impl OpticalConfig {
    pub fn new(wavelength: f64, focal_length: f64) -> Result<Self> {
        for (name, v) in [("wavelength", wavelength), ("focal length", focal_length)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(OpticalConfig {
            wavelength,
            focal_length,
        })
    }

    /// Wave number 2π/λ.
    pub fn wave_number(&self) -> f64 {
        TAU / self.wavelength
    }
}

impl Default for OpticalConfig {
    /// 810 nm light through a 70 cm lens.
    fn default() -> Self {
        OpticalConfig {
            wavelength: 810e-9,
            focal_length: 0.70,
        }
    }
}

/// Coherent amplitude alpha = |zeta| and topological charge q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexSpec {
    pub alpha: f64,
    pub charge: u32,
}

impl VortexSpec {
    pub fn new(alpha: f64, charge: u32) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(VortexSpec { alpha, charge })
    }

    pub(crate) fn check_supported(&self) -> Result<()> {
        if self.charge > MAX_ORDER {
            return Err(Error::UnsupportedRange(format!(
                "charge {} exceeds {MAX_ORDER}",
                self.charge
            )));
        }
        let a2 = self.alpha * self.alpha;
        if a2 > MAX_ALPHA_SQ {
            return Err(Error::UnsupportedRange(format!(
                "alpha^2 = {a2} exceeds {MAX_ALPHA_SQ}"
            )));
        }
        Ok(())
    }
}

/// Constants shared by every amplitude formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    /// Wave number, 1/m.
    pub k: f64,
    /// Focal-plane Gaussian scale sqrt(2) f / k, m.
    pub sigma: f64,
    /// Dark-core radius alpha * sigma, m.
    pub r_core: f64,
    /// N^2 = 1 / (4 pi^2 e^{-alpha^2} I_q(alpha^2)).
    pub norm_n_sq: f64,
    /// ln|A| with A = N * PERFECT_PREFACTOR / sigma * exp(-r_core^2 / sigma^2).
    pub coeff_a_log: f64,
    /// B = 2 r_core / sigma^2, 1/m.
    pub coeff_b: f64,
}

impl DerivedScales {
    /// ln N.
    pub fn ln_norm(&self) -> f64 {
        0.5 * self.norm_n_sq.ln()
    }
}

pub fn derive_scales(cfg: &OpticalConfig, spec: &VortexSpec) -> Result<DerivedScales> {
    spec.check_supported()?;
    let k = cfg.wave_number();
    let sigma = std::f64::consts::SQRT_2 * cfg.focal_length / k;
    let r_core = spec.alpha * sigma;
    let a2 = spec.alpha * spec.alpha;
    // ln(e^{-a^2} I_q(a^2)); the log-split form keeps tiny alpha and large q finite.
    let ln_ie = specfun::bessel_i(spec.charge, a2)?.ln() - a2;
    let ln_n_sq = -(4.0 * PI * PI).ln() - ln_ie;
    let norm_n_sq = ln_n_sq.exp();
    let coeff_a_log = 0.5 * ln_n_sq + (PERFECT_PREFACTOR / sigma).ln() - a2;
    let coeff_b = 2.0 * r_core / (sigma * sigma);
    let scales = DerivedScales {
        k,
        sigma,
        r_core,
        norm_n_sq,
        coeff_a_log,
        coeff_b,
    };
    if ![k, sigma, r_core, norm_n_sq, coeff_a_log, coeff_b]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::UnsupportedRange(format!(
            "non-finite derived scale for {spec:?}"
        )));
    }
    Ok(scales)
}

/// Which state family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateFamily {
    /// Bessel–Gauss vortex before the lens.
    Bg,
    /// Perfect vortex in the focal plane.
    Perfect,
}

impl StateFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateFamily::Bg => "bg",
            StateFamily::Perfect => "perfect",
        }
    }
}

/// Polar point with `r` in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub r: f64,
    pub theta: f64,
}

impl PhasePoint {
    /// Builds a point, wrapping `theta` into [0, 2π).
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0 && theta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "invalid polar point r={r}, theta={theta}"
            )));
        }
        let mut t = theta.rem_euclid(TAU);
        if t >= TAU {
            t = 0.0;
        }
        Ok(PhasePoint { r, theta: t })
    }

    pub fn from_cartesian(x: f64, y: f64) -> Result<Self> {
        PhasePoint::new(x.hypot(y), y.atan2(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_scales() {
        let cfg = OpticalConfig::default();
        let spec = VortexSpec::new(15.0, 2).unwrap();
        let s = derive_scales(&cfg, &spec).unwrap();
        let sigma = std::f64::consts::SQRT_2 * 0.7 * 810e-9 / TAU;
        assert!((s.sigma - sigma).abs() <= 1e-15 * sigma);
        // 40-digit value of the same expression.
        assert!((s.sigma - 1.276_198_378_152_698e-7).abs() < 1e-21);
        assert!((s.sigma / 1.2757e-7 - 1.0).abs() < 1e-3);
        assert!((s.r_core - 15.0 * s.sigma).abs() <= 1e-15 * s.r_core);
        assert!((s.coeff_b - 2.0 * s.r_core / (s.sigma * s.sigma)).abs() <= 1e-15 * s.coeff_b);
        // N^2 from a 40-digit evaluation of 1 / (4 pi^2 e^{-225} I_2(225)).
        assert!((s.norm_n_sq / 0.960_392_219_542_576_9 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_alpha_limit() {
        let cfg = OpticalConfig::default();
        let s = derive_scales(&cfg, &VortexSpec::new(1e-9, 0).unwrap()).unwrap();
        assert!((s.norm_n_sq * 4.0 * PI * PI - 1.0).abs() < 1e-12);
    }

    #[test]
    fn range_checks() {
        let cfg = OpticalConfig::default();
        assert!(matches!(
            derive_scales(&cfg, &VortexSpec::new(23.0, 1).unwrap()),
            Err(Error::UnsupportedRange(_))
        ));
        assert!(matches!(
            derive_scales(&cfg, &VortexSpec::new(5.0, 201).unwrap()),
            Err(Error::UnsupportedRange(_))
        ));
        assert!(VortexSpec::new(0.0, 1).is_err());
        assert!(OpticalConfig::new(-1.0, 0.7).is_err());
        assert!(OpticalConfig::new(810e-9, f64::INFINITY).is_err());
        // e^{-1} I_100(1) ~ 1e-189 underflows nothing thanks to the log-split Bessel.
        let s = derive_scales(&cfg, &VortexSpec::new(1.0, 100).unwrap()).unwrap();
        assert!(s.norm_n_sq.is_finite() && s.norm_n_sq > 1e180);
        // N^2 itself overflows here, which is reported rather than returned.
        assert!(matches!(
            derive_scales(&cfg, &VortexSpec::new(0.5, 200).unwrap()),
            Err(Error::UnsupportedRange(_))
        ));
    }

    #[test]
    fn phase_point_wraps() {
        let p = PhasePoint::new(1.0, -0.5).unwrap();
        assert!((p.theta - (TAU - 0.5)).abs() < 1e-15);
        assert!(PhasePoint::new(-1.0, 0.0).is_err());
        let c = PhasePoint::from_cartesian(0.0, 2.0).unwrap();
        assert!((c.theta - PI / 2.0).abs() < 1e-15 && (c.r - 2.0).abs() < 1e-15);
    }
}
