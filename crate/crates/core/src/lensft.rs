//! Lens (optical Fourier) transform of a field with a single angular
//! harmonic e^{iqφ}.
//!
//! The angular integral is done analytically, leaving a Hankel-type radial
//! integral evaluated by composite Gauss–Legendre panels sized to the
//! oscillation of the kernel. Input radii are the dimensionless coordinates
//! of the Bessel–Gauss state; output radii are in units of sigma, so the
//! kernel phase (k/f) ρ r becomes sqrt(2) ρ r̃.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::quadrature::composite_gl;
use crate::specfun::{bessel_j_unchecked, MAX_ORDER};
use crate::states::{i_pow, BgVortex, OpticalConfig, VortexSpec};

/// Relative size below which the profile counts as decayed.
pub const DECAY_THRESHOLD: f64 = 1e-14;
const CONVERGENCE_TOL: f64 = 1e-8;
const MAX_DOUBLINGS: u32 = 6;

/// Sign of the exponent in the lens kernel exp(±i (k/f) ρ r cos(θ-φ)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelSign {
    /// exp(+i ...): maps the Bessel–Gauss phase i^q onto i^{2q-1}.
    #[default]
    Plus,
    /// exp(-i ...): output differs from `Plus` by (-1)^q, i.e. r -> -r.
    Minus,
}

impl KernelSign {
    fn value(self) -> f64 {
        match self {
            KernelSign::Plus => 1.0,
            KernelSign::Minus => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KernelSign::Plus => "plus",
            KernelSign::Minus => "minus",
        }
    }
}

/// How the 2-D transform integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LensMode {
    /// Angular integral done analytically; 1-D radial quadrature.
    #[default]
    Reduced,
    /// Trapezoid in φ times Gauss–Legendre in ρ, no analytic reduction.
    Direct2D,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensOptions {
    pub sign: KernelSign,
    pub mode: LensMode,
    /// Hard cut of the input at this radius; skips the decay check.
    pub truncate_at: Option<f64>,
}

impl Default for LensOptions {
    fn default() -> Self {
        LensOptions {
            sign: KernelSign::Plus,
            mode: LensMode::Reduced,
            truncate_at: None,
        }
    }
}

type Evaluator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Radial factor of an input field whose angular dependence is e^{iqφ}.
#[derive(Clone)]
pub struct RadialProfile {
    evaluator: Evaluator,
    pub charge: u32,
    /// Radius beyond which the profile is negligible.
    pub r_max: f64,
    /// Largest spatial frequency of the profile itself, rad per unit radius.
    pub bandwidth: f64,
    pub meta: BTreeMap<String, Value>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("charge", &self.charge)
            .field("r_max", &self.r_max)
            .field("bandwidth", &self.bandwidth)
            .field("meta", &self.meta)
            .finish()
    }
}

impl RadialProfile {
    pub fn new<F>(charge: u32, r_max: f64, bandwidth: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        if charge > MAX_ORDER {
            return Err(Error::UnsupportedRange(format!(
                "charge {charge} exceeds {MAX_ORDER}"
            )));
        }
        if !(r_max.is_finite() && r_max > 0.0 && bandwidth.is_finite() && bandwidth >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid profile support {r_max} or bandwidth {bandwidth}"
            )));
        }
        Ok(RadialProfile {
            evaluator: Arc::new(f),
            charge,
            r_max,
            bandwidth,
            meta: BTreeMap::new(),
        })
    }

    /// Radial factor of the Bessel–Gauss state including its i^q phase,
    /// supported on [0, α + 12].
    pub fn bessel_gauss(spec: &VortexSpec) -> Result<Self> {
        let bg = BgVortex::new(spec)?;
        let phase = bg.phase();
        let mut p = RadialProfile::new(
            spec.charge,
            spec.alpha + 12.0,
            SQRT_2 * spec.alpha,
            move |rho| phase * bg.radial(rho),
        )?;
        p.meta.insert("profile".into(), json!("bessel-gauss"));
        p.meta.insert("alpha".into(), json!(spec.alpha));
        p.meta.insert("q".into(), json!(spec.charge));
        Ok(p)
    }

    /// e^{-ρ²/(2 w²)} with charge 0.
    pub fn gaussian(width: f64) -> Result<Self> {
        let mut p = RadialProfile::new(0, 12.0 * width, 0.0, move |rho| {
            let t = rho / width;
            Complex64::new((-0.5 * t * t).exp(), 0.0)
        })?;
        p.meta.insert("profile".into(), json!("gaussian"));
        p.meta.insert("width".into(), json!(width));
        Ok(p)
    }

    pub fn eval(&self, rho: f64) -> Complex64 {
        (self.evaluator)(rho)
    }
}

/// Transformed radial factor; multiply by e^{iqθ} for the full field.
#[derive(Debug, Clone, PartialEq)]
pub struct LensOutput {
    /// Output radii in units of sigma.
    pub r_out: Vec<f64>,
    /// Field values in 1/m.
    pub values: Vec<Complex64>,
    pub sigma: f64,
    pub charge: u32,
    pub meta: BTreeMap<String, Value>,
}

/// Composite rule on [0, upper] with the profile sampled at its nodes.
struct Level {
    rho: Vec<f64>,
    /// w_i ρ_i f(ρ_i)
    wf: Vec<Complex64>,
}

impl Level {
    fn new(profile: &RadialProfile, upper: f64, panels: usize) -> Self {
        let (rho, w) = composite_gl(0.0, upper, panels);
        let wf = rho
            .iter()
            .zip(&w)
            .map(|(&r, &w)| profile.eval(r) * (w * r))
            .collect();
        Level { rho, wf }
    }
}

/// Largest sampled radius where the profile is still above `rel` of its
/// sampled maximum; integration beyond it only adds rounding noise.
fn effective_support(profile: &RadialProfile, upper: f64, rel: f64) -> (f64, f64, f64) {
    let n = 4096;
    let h = upper / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| profile.eval(h * i as f64).norm()).collect();
    let max = vals.iter().cloned().fold(0.0, f64::max);
    let last = vals.iter().rposition(|&v| v > rel * max).unwrap_or(0);
    let eff = (h * (last + 2) as f64).min(upper);
    (eff, max, vals[n])
}

/// Lens transform of `profile` sampled at the output radii `r_out` (in
/// units of sigma).
pub fn lens_transform(
    profile: &RadialProfile,
    cfg: &OpticalConfig,
    r_out: &[f64],
    opts: &LensOptions,
) -> Result<LensOutput> {
    if let Some(r) = r_out.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "output radii must be finite and non-negative, got {r}"
        )));
    }
    let sigma = SQRT_2 * cfg.focal_length / cfg.wave_number();
    let upper = match opts.truncate_at {
        Some(t) => {
            if !(t > 0.0 && t <= profile.r_max) {
                return Err(Error::InvalidArgument(format!(
                    "truncation radius {t} outside (0, {}]",
                    profile.r_max
                )));
            }
            t
        }
        None => profile.r_max,
    };
    let (support, peak, edge) = effective_support(profile, upper, 1e-18);
    if peak == 0.0 || !peak.is_finite() {
        return Err(Error::InvalidArgument(
            "profile is zero or non-finite".into(),
        ));
    }
    if opts.truncate_at.is_none() && edge > DECAY_THRESHOLD * peak {
        return Err(Error::Truncation(format!(
            "profile at R_max = {} is {:e} of its maximum",
            profile.r_max,
            edge / peak
        )));
    }
    let support = if opts.truncate_at.is_some() {
        upper
    } else {
        support
    };

    let q = profile.charge;
    let s = opts.sign.value();
    // (k/f) / i * (±i)^q, with k/f = sqrt(2)/sigma.
    let angular = match opts.sign {
        KernelSign::Plus => i_pow(q as i64),
        KernelSign::Minus => i_pow(-(q as i64)),
    };
    let pref = Complex64::new(0.0, -SQRT_2 / sigma) * angular;

    let r_top = r_out.iter().cloned().fold(0.0, f64::max);
    let freq = profile.bandwidth + SQRT_2 * r_top;
    let base = ((support * (freq + 1.0) / TAU).ceil() as usize).max(8);

    let values = match opts.mode {
        LensMode::Reduced => reduced(profile, support, base, q, r_out)?,
        LensMode::Direct2D => direct(profile, support, base, q, s, r_out)?
            .into_iter()
            .map(|v| v / angular)
            .collect(),
    };
    let values: Vec<Complex64> = values.into_iter().map(|v| v * pref).collect();

    let mut meta = profile.meta.clone();
    meta.insert("kernel_sign".into(), json!(opts.sign.as_str()));
    meta.insert(
        "mode".into(),
        json!(match opts.mode {
            LensMode::Reduced => "reduced",
            LensMode::Direct2D => "direct-2d",
        }),
    );
    meta.insert("integration_radius".into(), json!(support));
    meta.insert("base_panels".into(), json!(base));
    meta.insert("sigma_m".into(), json!(sigma));
    Ok(LensOutput {
        r_out: r_out.to_vec(),
        values,
        sigma,
        charge: q,
        meta,
    })
}

/// ∫ f(ρ) J_q(sqrt(2) ρ r) ρ dρ at every r, with node doubling.
fn reduced(
    profile: &RadialProfile,
    support: f64,
    base: usize,
    q: u32,
    r_out: &[f64],
) -> Result<Vec<Complex64>> {
    let sum = |lvl: &Level, r: f64| -> (Complex64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for (&rho, &wf) in lvl.rho.iter().zip(&lvl.wf) {
            let t = wf * bessel_j_unchecked(q, SQRT_2 * rho * r);
            acc += t;
            mag += t.norm();
        }
        (acc, mag)
    };
    let mut levels = vec![
        Level::new(profile, support, base),
        Level::new(profile, support, 2 * base),
    ];
    let mut out: Vec<Option<Complex64>> = vec![None; r_out.len()];
    let mut prev: Vec<Complex64> = r_out.par_iter().map(|&r| sum(&levels[0], r).0).collect();
    for d in 1..=MAX_DOUBLINGS as usize {
        if d >= levels.len() {
            levels.push(Level::new(profile, support, base << d));
        }
        let lvl = &levels[d];
        let pending: Vec<usize> = (0..r_out.len()).filter(|&i| out[i].is_none()).collect();
        let results: Vec<(Complex64, f64)> =
            pending.par_iter().map(|&i| sum(lvl, r_out[i])).collect();
        for (&i, &(v, mag)) in pending.iter().zip(&results) {
            let change = (v - prev[i]).norm();
            if change <= CONVERGENCE_TOL * v.norm() || change <= 64.0 * f64::EPSILON * mag {
                out[i] = Some(v);
            }
            prev[i] = v;
        }
        if out.iter().all(Option::is_some) {
            return Ok(out.into_iter().map(Option::unwrap).collect());
        }
    }
    let bad = out.iter().position(Option::is_none).unwrap();
    Err(Error::Accuracy(format!(
        "lens transform did not converge at r = {} after {MAX_DOUBLINGS} doublings",
        r_out[bad]
    )))
}

/// (1/2π) ∫∫ f(ρ) e^{iqφ} e^{±i sqrt(2) ρ r cos φ} ρ dρ dφ at θ = 0, with
/// node doubling in both directions.
fn direct(
    profile: &RadialProfile,
    support: f64,
    base: usize,
    q: u32,
    s: f64,
    r_out: &[f64],
) -> Result<Vec<Complex64>> {
    let levels = [
        Level::new(profile, support, base),
        Level::new(profile, support, 2 * base),
    ];
    let eval = |lvl: &Level, r: f64, m: usize| -> (Complex64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for k in 0..m {
            let phi = TAU * k as f64 / m as f64;
            let c = phi.cos();
            let carrier = Complex64::from_polar(1.0, q as f64 * phi);
            let mut inner = Complex64::new(0.0, 0.0);
            for (&rho, &wf) in lvl.rho.iter().zip(&lvl.wf) {
                let t = wf * Complex64::from_polar(1.0, s * SQRT_2 * rho * r * c);
                inner += t;
                mag += t.norm();
            }
            acc += carrier * inner;
        }
        (acc / m as f64, mag / m as f64)
    };
    r_out
        .par_iter()
        .map(|&r| {
            // The trapezoid rule in φ is exact once m exceeds the highest
            // Fourier harmonic of the integrand, about sqrt(2) ρ r + q.
            let m = 2 * ((SQRT_2 * support * r) as usize + q as usize + 40);
            let (coarse, _) = eval(&levels[0], r, m);
            let (fine, mag) = eval(&levels[1], r, 2 * m);
            let change = (fine - coarse).norm();
            if change <= CONVERGENCE_TOL * fine.norm() || change <= 64.0 * f64::EPSILON * mag {
                Ok(fine)
            } else {
                Err(Error::Accuracy(format!(
                    "direct 2-D lens transform did not converge at r = {r}"
                )))
            }
        })
        .collect()
}

/// Output energy over input energy, both over the full plane. The output
/// integral uses the trapezoid rule on the sampled radii.
pub fn energy_ratio(profile_in: &RadialProfile, out: &LensOutput) -> f64 {
    let panels = ((profile_in.r_max * (profile_in.bandwidth + 1.0) / PI).ceil() as usize).max(64);
    let (rho, w) = composite_gl(0.0, profile_in.r_max, panels);
    let e_in: f64 = TAU
        * rho
            .iter()
            .zip(&w)
            .map(|(&r, &w)| w * r * profile_in.eval(r).norm_sqr())
            .sum::<f64>();
    let mut e_out = 0.0;
    for i in 1..out.r_out.len() {
        let (r0, r1) = (out.r_out[i - 1], out.r_out[i]);
        let g0 = out.values[i - 1].norm_sqr() * r0;
        let g1 = out.values[i].norm_sqr() * r1;
        e_out += 0.5 * (r1 - r0) * (g0 + g1);
    }
    let e_out = TAU * out.sigma * out.sigma * e_out;
    e_out / e_in
}
