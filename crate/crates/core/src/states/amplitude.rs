use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use num_complex::Complex64;

use super::{DerivedScales, PhasePoint, VortexSpec};
use crate::error::{Error, Result};
use crate::specfun::{self, bessel_j, bessel_j_unchecked, ie};

/// Constant in front of the perfect-vortex amplitude: 2 sqrt(2π).
///
/// This is the value that makes the focal-plane state unit-normalised and
/// equal to the lens transform of the Bessel–Gauss state.
pub const PERFECT_PREFACTOR: f64 = 5.013_256_549_262_000_6;

/// Half width of the perfect-vortex ring beyond which e^{-(u-α)²} < 5e-19.
const RING_HALF_WIDTH: f64 = 6.5;

/// i^n for any integer n.
pub(crate) fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// e^{i q θ} for the direction of (x, y), computed without trigonometry.
fn vortex_phase(charge: u32, x: f64, y: f64, r: f64) -> Complex64 {
    if charge == 0 || r == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::new(x / r, y / r).powu(charge)
}

/// A two-mode wavefunction over dimensionless quadratures (x, y).
pub trait TwoModeAmplitude: Sync {
    fn amplitude(&self, x: f64, y: f64) -> Complex64;

    /// Radius beyond which |ψ| is below ~1e-15 of its peak.
    fn support_radius(&self) -> f64;

    /// Radius in momentum space beyond which the Wigner function is below
    /// ~1e-15 of its peak.
    fn momentum_support(&self) -> f64;

    /// Charge of the angular factor, if the state has one.
    fn charge(&self) -> Option<u32> {
        None
    }

    /// False where |ψ| is negligible (below ~1e-18 of its peak).
    fn support_contains(&self, x: f64, y: f64) -> bool {
        x.hypot(y) <= self.support_radius()
    }
}

impl<T: TwoModeAmplitude + ?Sized> TwoModeAmplitude for &T {
    fn amplitude(&self, x: f64, y: f64) -> Complex64 {
        (**self).amplitude(x, y)
    }
    fn support_radius(&self) -> f64 {
        (**self).support_radius()
    }
    fn momentum_support(&self) -> f64 {
        (**self).momentum_support()
    }
    fn charge(&self) -> Option<u32> {
        (**self).charge()
    }
    fn support_contains(&self, x: f64, y: f64) -> bool {
        (**self).support_contains(x, y)
    }
}

/// Perfect vortex in dimensionless focal-plane coordinates (x/σ, y/σ).
///
/// The amplitude is σ·ψ so that it is normalised over d(x/σ) d(y/σ).
#[derive(Debug, Clone, Copy)]
pub struct PerfectVortex {
    alpha: f64,
    charge: u32,
    ln_coeff: f64,
    phase: Complex64,
}

impl PerfectVortex {
    pub fn new(spec: &VortexSpec) -> Result<Self> {
        spec.check_supported()?;
        let a2 = spec.alpha * spec.alpha;
        let ln_n = -(TAU).ln() - 0.5 * (specfun::bessel_i(spec.charge, a2)?.ln() - a2);
        Ok(PerfectVortex {
            alpha: spec.alpha,
            charge: spec.charge,
            ln_coeff: ln_n + PERFECT_PREFACTOR.ln(),
            phase: i_pow(2 * spec.charge as i64 - 1),
        })
    }

    /// Radial modulus at dimensionless radius r.
    pub fn radial(&self, r: f64) -> f64 {
        let d = r - self.alpha;
        let e = self.ln_coeff - d * d;
        if e < -745.0 {
            return 0.0;
        }
        e.exp() * ie(self.charge, 2.0 * self.alpha * r)
    }
}

impl TwoModeAmplitude for PerfectVortex {
    fn amplitude(&self, x: f64, y: f64) -> Complex64 {
        let r = x.hypot(y);
        let rad = self.radial(r);
        if rad == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.phase * vortex_phase(self.charge, x, y, r) * rad
    }

    fn support_radius(&self) -> f64 {
        self.alpha + RING_HALF_WIDTH
    }

    fn support_contains(&self, x: f64, y: f64) -> bool {
        (x.hypot(y) - self.alpha).abs() <= RING_HALF_WIDTH
    }

    fn momentum_support(&self) -> f64 {
        // The Wigner envelope in momentum is e^{-|p|^2/2} for every charge.
        8.7
    }

    fn charge(&self) -> Option<u32> {
        Some(self.charge)
    }
}

/// Bessel–Gauss vortex in its own dimensionless coordinates.
#[derive(Debug, Clone, Copy)]
pub struct BgVortex {
    alpha: f64,
    charge: u32,
    coeff: f64,
    phase: Complex64,
}

impl BgVortex {
    pub fn new(spec: &VortexSpec) -> Result<Self> {
        spec.check_supported()?;
        let a2 = spec.alpha * spec.alpha;
        let ln_n = -(TAU).ln() - 0.5 * (specfun::bessel_i(spec.charge, a2)?.ln() - a2);
        Ok(BgVortex {
            alpha: spec.alpha,
            charge: spec.charge,
            coeff: 2.0 * PI.sqrt() * ln_n.exp(),
            phase: i_pow(spec.charge as i64),
        })
    }

    /// Signed radial factor 2 sqrt(π) N e^{-ρ²/2} J_q(sqrt(2) α ρ).
    pub fn radial(&self, rho: f64) -> f64 {
        let g = -0.5 * rho * rho;
        if g < -745.0 {
            return 0.0;
        }
        self.coeff * g.exp() * bessel_j_unchecked(self.charge, SQRT_2 * self.alpha * rho)
    }

    /// Phase constant i^q of the amplitude.
    pub fn phase(&self) -> Complex64 {
        self.phase
    }
}

impl TwoModeAmplitude for BgVortex {
    fn amplitude(&self, x: f64, y: f64) -> Complex64 {
        let r = x.hypot(y);
        self.phase * vortex_phase(self.charge, x, y, r) * self.radial(r)
    }

    fn support_radius(&self) -> f64 {
        9.0
    }

    fn momentum_support(&self) -> f64 {
        SQRT_2 * self.alpha + 9.0
    }

    fn charge(&self) -> Option<u32> {
        Some(self.charge)
    }
}

/// Bessel–Gauss amplitude 2 i^q sqrt(π) N e^{-ρ²/2} J_q(sqrt(2) α ρ) e^{iqφ}
/// at the polar point `p` (ρ = p.r).
pub fn bg_amplitude(scales: &DerivedScales, spec: &VortexSpec, p: PhasePoint) -> Result<Complex64> {
    spec.check_supported()?;
    let n = scales.norm_n_sq.sqrt();
    let j = bessel_j(spec.charge, SQRT_2 * spec.alpha * p.r)?;
    let modulus = 2.0 * PI.sqrt() * n * (-0.5 * p.r * p.r).exp() * j;
    let angle = Complex64::from_polar(1.0, spec.charge as f64 * p.theta);
    Ok(i_pow(spec.charge as i64) * angle * modulus)
}

/// Perfect-vortex amplitude in physical units (1/m) at the polar point `p`,
/// whose radius is given in units of sigma.
pub fn perfect_amplitude(
    scales: &DerivedScales,
    spec: &VortexSpec,
    p: PhasePoint,
) -> Result<Complex64> {
    spec.check_supported()?;
    let alpha = spec.alpha;
    let d = p.r - alpha;
    let ln_mod = scales.ln_norm() + (PERFECT_PREFACTOR / scales.sigma).ln() - d * d;
    let bess = specfun::bessel_i_scaled(spec.charge, 2.0 * alpha * p.r)?;
    let modulus = if ln_mod < -745.0 {
        0.0
    } else {
        ln_mod.exp() * bess
    };
    let angle = Complex64::from_polar(1.0, spec.charge as f64 * p.theta);
    Ok(i_pow(2 * spec.charge as i64 - 1) * angle * modulus)
}

/// Phase convention for the coherent-state integral oracle: the argument of
/// the complex amplitude zeta = alpha e^{i zeta_phase}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConvention {
    pub zeta_phase: f64,
}

/// Quadrature wavefunction of a coherent state:
/// <x|β> = π^{-1/4} exp(-(x - √2 Re β)²/2 + i √2 x Im β - i Re β Im β).
fn coherent_wavefunction(x: f64, beta: Complex64) -> Complex64 {
    let d = x - SQRT_2 * beta.re;
    let re = -0.5 * d * d;
    let im = SQRT_2 * x * beta.im - beta.re * beta.im;
    Complex64::from_polar(PI.powf(-0.25) * re.exp(), im)
}

const ORACLE_REL_TOL: f64 = 1e-8;
const ORACLE_MAX_DOUBLINGS: u32 = 14;

/// Evaluates N ∫₀^{2π} e^{iqθ} <x|ζ cos θ><y|ζ sin θ> dθ by the trapezoid
/// rule with node doubling, using the given phase convention for ζ.
pub fn bg_theta_oracle_with(
    spec: &VortexSpec,
    conv: &OracleConvention,
    x: f64,
    y: f64,
) -> Result<Complex64> {
    spec.check_supported()?;
    let bound = 10.0 * (spec.alpha + 5.0);
    if !(x.is_finite() && y.is_finite()) || x.abs() > bound || y.abs() > bound {
        return Err(Error::InvalidArgument(format!(
            "oracle point ({x}, {y}) outside |x|,|y| <= {bound}"
        )));
    }
    let a2 = spec.alpha * spec.alpha;
    let ln_n = -(TAU).ln() - 0.5 * (specfun::bessel_i(spec.charge, a2)?.ln() - a2);
    let norm = ln_n.exp();
    let zeta = Complex64::from_polar(spec.alpha, conv.zeta_phase);
    let q = spec.charge as f64;
    let integrand = |theta: f64| -> Complex64 {
        let (s, c) = theta.sin_cos();
        Complex64::from_polar(1.0, q * theta)
            * coherent_wavefunction(x, zeta * c)
            * coherent_wavefunction(y, zeta * s)
    };

    let mut n = 8 * (spec.charge as usize + spec.alpha.ceil() as usize + 16);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for j in 0..n {
        let f = integrand(TAU * j as f64 / n as f64);
        sum += f;
        abs_sum += f.norm();
    }
    let mut value = sum * (TAU / n as f64);
    for _ in 0..ORACLE_MAX_DOUBLINGS {
        // Doubling adds the midpoints of the current rule.
        for j in 0..n {
            let f = integrand(TAU * (j as f64 + 0.5) / n as f64);
            sum += f;
            abs_sum += f.norm();
        }
        n *= 2;
        let next = sum * (TAU / n as f64);
        let l1 = abs_sum * (TAU / n as f64);
        let change = (next - value).norm();
        value = next;
        if change <= ORACLE_REL_TOL * value.norm() + 1e-13 * l1 {
            return Ok(value * norm);
        }
    }
    Err(Error::Accuracy(format!(
        "coherent-state oracle did not converge at ({x}, {y}) with {n} nodes"
    )))
}

/// Picks the quarter-turn phase of ζ under which the coherent-state integral
/// reproduces the closed-form Bessel–Gauss amplitude at a reference point.
pub fn calibrate_oracle(spec: &VortexSpec) -> Result<OracleConvention> {
    let bg = BgVortex::new(spec)?;
    let q = spec.charge as f64;
    let rho = ((q + 1.0) / (SQRT_2 * spec.alpha)).clamp(0.3, 3.0);
    let (s, c) = 0.4f64.sin_cos();
    let (x, y) = (rho * c, rho * s);
    let target = bg.amplitude(x, y);
    let mut best: Option<(f64, OracleConvention)> = None;
    for k in 0..4 {
        let conv = OracleConvention {
            zeta_phase: k as f64 * FRAC_PI_2,
        };
        let v = bg_theta_oracle_with(spec, &conv, x, y)?;
        let dev = (v - target).norm() / target.norm();
        if best.is_none_or(|(d, _)| dev < d) {
            best = Some((dev, conv));
        }
    }
    match best {
        Some((dev, conv)) if dev < 1e-6 => Ok(conv),
        Some((dev, _)) => Err(Error::Accuracy(format!(
            "no quarter-turn phase of zeta reproduces the Bessel-Gauss amplitude (best deviation {dev:e})"
        ))),
        None => unreachable!(),
    }
}

/// Coherent-state integral oracle with the calibrated convention.
pub fn bg_theta_oracle(spec: &VortexSpec, x: f64, y: f64) -> Result<Complex64> {
    let conv = calibrate_oracle(spec)?;
    bg_theta_oracle_with(spec, &conv, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{derive_scales, OpticalConfig};

    fn scales(alpha: f64, q: u32) -> (DerivedScales, VortexSpec) {
        let spec = VortexSpec::new(alpha, q).unwrap();
        (
            derive_scales(&OpticalConfig::default(), &spec).unwrap(),
            spec,
        )
    }

    #[test]
    fn prefactor_constant() {
        assert!((PERFECT_PREFACTOR - 2.0 * TAU.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bg_origin_values() {
        for q in 1..6 {
            let (s, spec) = scales(15.0, q);
            let v = bg_amplitude(&s, &spec, PhasePoint::new(0.0, 0.3).unwrap()).unwrap();
            assert_eq!(v.norm(), 0.0);
        }
        let (s, spec) = scales(15.0, 0);
        let v = bg_amplitude(&s, &spec, PhasePoint::new(0.0, 0.0).unwrap()).unwrap();
        let expect = 2.0 * PI.sqrt() * s.norm_n_sq.sqrt();
        assert!((v.re - expect).abs() < 1e-15 * expect && v.im == 0.0);
    }

    #[test]
    fn perfect_dark_core_and_phase_advance() {
        let (s, spec) = scales(15.0, 3);
        let z = perfect_amplitude(&s, &spec, PhasePoint::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(z.norm(), 0.0);
        let a = perfect_amplitude(&s, &spec, PhasePoint::new(14.8, 0.2).unwrap()).unwrap();
        let b =
            perfect_amplitude(&s, &spec, PhasePoint::new(14.8, 0.2 + TAU / 3.0).unwrap()).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
        let c = perfect_amplitude(&s, &spec, PhasePoint::new(14.8, 0.5).unwrap()).unwrap();
        let dphi = (c / a).arg();
        assert!((dphi - 3.0 * 0.3).abs() < 1e-12);
    }

    #[test]
    fn dimensionless_evaluator_matches_physical() {
        let (s, spec) = scales(15.0, 4);
        let pv = PerfectVortex::new(&spec).unwrap();
        for &(r, t) in &[(14.0, 0.1), (15.3, 2.0), (16.1, 4.0)] {
            let phys = perfect_amplitude(&s, &spec, PhasePoint::new(r, t).unwrap()).unwrap();
            let dimless = pv.amplitude(r * t.cos(), r * t.sin());
            assert!((phys * s.sigma - dimless).norm() < 1e-11 * dimless.norm());
        }
        let bg = BgVortex::new(&spec).unwrap();
        let p = PhasePoint::new(0.9, 1.1).unwrap();
        let a = bg_amplitude(&s, &spec, p).unwrap();
        let b = bg.amplitude(0.9 * 1.1f64.cos(), 0.9 * 1.1f64.sin());
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn oracle_dark_core() {
        for q in 1..4 {
            let spec = VortexSpec::new(15.0, q).unwrap();
            let v = bg_theta_oracle(&spec, 0.0, 0.0).unwrap();
            assert!(v.norm() < 1e-10, "q={q}: {v}");
        }
    }

    #[test]
    fn oracle_matches_closed_form_small_alpha() {
        let spec = VortexSpec::new(0.05, 0).unwrap();
        let bg = BgVortex::new(&spec).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.4, -0.3), (1.5, 0.7)] {
            let o = bg_theta_oracle(&spec, x, y).unwrap();
            let e = bg.amplitude(x, y);
            assert!((o - e).norm() <= 1e-8 * e.norm(), "({x},{y}): {o} vs {e}");
        }
    }

    #[test]
    fn oracle_matches_closed_form_alpha_15() {
        let (s, spec) = scales(15.0, 2);
        let conv = calibrate_oracle(&spec).unwrap();
        assert!((conv.zeta_phase - FRAC_PI_2).abs() < 1e-15);
        let p = PhasePoint::new(1.3, 0.8).unwrap();
        let e = bg_amplitude(&s, &spec, p).unwrap();
        let o = bg_theta_oracle_with(&spec, &conv, 1.3 * 0.8f64.cos(), 1.3 * 0.8f64.sin()).unwrap();
        assert!((o - e).norm() <= 1e-6 * e.norm(), "{o} vs {e}");
        let bg = BgVortex::new(&spec).unwrap();
        let o = bg_theta_oracle_with(&spec, &conv, 1.0, 0.5).unwrap();
        let e = bg.amplitude(1.0, 0.5);
        assert!((o - e).norm() <= 1e-6 * e.norm());
    }

    #[test]
    fn real_zeta_gives_modified_bessel_shape() {
        // With zeta real the integral produces I_q instead of J_q, which no
        // global phase can fix; calibration must therefore reject phase 0.
        let spec = VortexSpec::new(2.0, 1).unwrap();
        let conv = OracleConvention { zeta_phase: 0.0 };
        let bg = BgVortex::new(&spec).unwrap();
        let r1 = bg_theta_oracle_with(&spec, &conv, 0.5, 0.0).unwrap() / bg.amplitude(0.5, 0.0);
        let r2 = bg_theta_oracle_with(&spec, &conv, 1.5, 0.0).unwrap() / bg.amplitude(1.5, 0.0);
        assert!((r1 - r2).norm() > 0.1 * r1.norm());
    }

    #[test]
    fn oracle_rejects_far_points() {
        let spec = VortexSpec::new(1.0, 0).unwrap();
        assert!(bg_theta_oracle(&spec, 61.0, 0.0).is_err());
    }
}
