use std::f64::consts::{LN_2, PI, SQRT_2, TAU};

use num_complex::Complex64;

use super::{ComplexField2D, DerivedScales, VortexSpec};
use crate::error::{Error, Result};
use crate::quadrature::{bisect, golden_max};
use crate::specfun::{bessel_j_unchecked, ln_ie};

const RADIAL_TOL: f64 = 1e-9;

/// ln of the perfect-vortex radial modulus, up to an additive constant.
fn perfect_ln_profile(spec: &VortexSpec, r: f64) -> f64 {
    if r <= 0.0 {
        return if spec.charge == 0 {
            -spec.alpha * spec.alpha
        } else {
            f64::NEG_INFINITY
        };
    }
    let d = r - spec.alpha;
    -d * d + ln_ie(spec.charge, 2.0 * spec.alpha * r)
}

/// Coarse scan for the largest sample, then golden-section refinement.
fn scan_max<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, step: f64) -> Result<f64> {
    let n = ((hi - lo) / step).ceil() as usize;
    let mut best = (0, f(lo));
    for i in 1..=n {
        let v = f(lo + step * i as f64);
        if v > best.1 {
            best = (i, v);
        }
    }
    if best.0 == n {
        return Err(Error::Bracketing(format!(
            "profile still rising at the scan end {hi}"
        )));
    }
    if best.0 == 0 {
        return Ok(lo);
    }
    let a = lo + step * (best.0 - 1) as f64;
    let b = lo + step * (best.0 + 1) as f64;
    Ok(golden_max(f, a, b, RADIAL_TOL))
}

/// Radius (in sigma) of the perfect-vortex intensity ring.
pub fn ring_radius(scales: &DerivedScales, spec: &VortexSpec) -> Result<f64> {
    let _ = scales;
    spec.check_supported()?;
    let f = |r: f64| perfect_ln_profile(spec, r);
    scan_max(&f, 0.0, spec.alpha + 12.0, 0.02)
}

/// Full width at half maximum of the perfect-vortex radial modulus.
pub fn radial_fwhm(spec: &VortexSpec) -> Result<f64> {
    spec.check_supported()?;
    let f = |r: f64| perfect_ln_profile(spec, r);
    let peak = scan_max(&f, 0.0, spec.alpha + 12.0, 0.02)?;
    let half = f(peak) - LN_2;
    let g = |r: f64| f(r) - half;
    let left = bisect(g, 0.0, peak, RADIAL_TOL)?;
    let right = bisect(g, peak, peak + 12.0, RADIAL_TOL)?;
    Ok(right - left)
}

/// Radius of the first maximum of the Bessel–Gauss radial modulus
/// e^{-ρ²/2} |J_q(sqrt(2) α ρ)|; zero for q = 0.
pub fn bg_core_radius(spec: &VortexSpec) -> Result<f64> {
    spec.check_supported()?;
    if spec.charge == 0 {
        return Ok(0.0);
    }
    let k = SQRT_2 * spec.alpha;
    let f = |rho: f64| (-0.5 * rho * rho).exp() * bessel_j_unchecked(spec.charge, k * rho).abs();
    let step = 0.02 / k;
    let mut prev = 0.0;
    let mut i = 1usize;
    loop {
        let rho = step * i as f64;
        let v = f(rho);
        if v < prev {
            let a = step * (i as f64 - 2.0).max(0.0);
            return Ok(golden_max(f, a, rho, RADIAL_TOL));
        }
        if rho > 12.0 {
            return Err(Error::Bracketing(
                "no Bessel-Gauss maximum inside rho <= 12".into(),
            ));
        }
        prev = v;
        i += 1;
    }
}

fn bilinear(field: &ComplexField2D, x: f64, y: f64) -> Complex64 {
    let (a1, a2) = (&field.axis1, &field.axis2);
    let fx = ((x - a1.min) / a1.step()).clamp(0.0, (a1.count - 1) as f64);
    let fy = ((y - a2.min) / a2.step()).clamp(0.0, (a2.count - 1) as f64);
    let i = (fx.floor() as usize).min(a1.count - 2);
    let j = (fy.floor() as usize).min(a2.count - 2);
    let (tx, ty) = (fx - i as f64, fy - j as f64);
    field.get(i, j) * ((1.0 - tx) * (1.0 - ty))
        + field.get(i + 1, j) * (tx * (1.0 - ty))
        + field.get(i, j + 1) * ((1.0 - tx) * ty)
        + field.get(i + 1, j + 1) * (tx * ty)
}

/// Winding number of the field's phase around the origin-centred circle of
/// the given radius, in the field's axis units.
pub fn count_phase_jumps(field: &ComplexField2D, circle_radius: f64) -> Result<i64> {
    let (a1, a2) = (&field.axis1, &field.axis2);
    if circle_radius.is_nan()
        || circle_radius <= 0.0
        || -circle_radius < a1.min
        || circle_radius > a1.max
        || -circle_radius < a2.min
        || circle_radius > a2.max
    {
        return Err(Error::InvalidArgument(format!(
            "circle of radius {circle_radius} does not fit inside the grid"
        )));
    }
    let grid_max = field.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = 1e-12 * grid_max;
    let q_hint = field.meta.get("q").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
    let mut n = 64 * (q_hint + 1);
    loop {
        let samples: Vec<Complex64> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                bilinear(field, circle_radius * t.cos(), circle_radius * t.sin())
            })
            .collect();
        if samples.iter().any(|z| z.norm() <= floor) {
            return Err(Error::DegenerateCircle(format!(
                "modulus falls below {floor:e} on the circle of radius {circle_radius}"
            )));
        }
        let mut total = 0.0;
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let d = (samples[(k + 1) % n] * samples[k].conj()).arg();
            max_step = max_step.max(d.abs());
            total += d;
        }
        // Unwrapping is only trustworthy when neighbouring samples differ by
        // well under π.
        if max_step < 0.5 * PI || n >= 1 << 18 {
            return Ok((total / TAU).round() as i64);
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{amplitude_grid, derive_scales, Axis, OpticalConfig, StateFamily};

    fn ring(alpha: f64, q: u32) -> f64 {
        let spec = VortexSpec::new(alpha, q).unwrap();
        let s = derive_scales(&OpticalConfig::default(), &spec).unwrap();
        ring_radius(&s, &spec).unwrap()
    }

    #[test]
    fn ring_radius_against_dense_scan() {
        for q in [0, 1, 10] {
            let spec = VortexSpec::new(15.0, q).unwrap();
            let mut best = (0.0, f64::NEG_INFINITY);
            for i in 0..=200_000 {
                let r = 10.0 + 1e-4 * i as f64;
                let v = perfect_ln_profile(&spec, r);
                if v > best.1 {
                    best = (r, v);
                }
            }
            assert!((ring(15.0, q) - best.0).abs() < 1e-4, "q={q}");
        }
        // Expansion of the peak condition in 1/α.
        let q = 10.0;
        let approx = 15.0 - 1.0 / 60.0 + q * q / (8.0 * 15f64.powi(3));
        assert!((ring(15.0, 10) - approx).abs() < 2e-3);
        assert!((ring(15.0, 10) - 14.98).abs() < 0.05);
    }

    #[test]
    fn ring_and_width_constancy() {
        let r1 = ring(15.0, 1);
        let w1 = radial_fwhm(&VortexSpec::new(15.0, 1).unwrap()).unwrap();
        for q in [10, 15, 20] {
            assert!((ring(15.0, q) / r1 - 1.0).abs() < 0.03);
            let w = radial_fwhm(&VortexSpec::new(15.0, q).unwrap()).unwrap();
            assert!((w / w1 - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn bg_core_grows_with_charge() {
        let mut prev = 0.0;
        for q in [1, 2, 5, 10, 15, 20] {
            let r = bg_core_radius(&VortexSpec::new(15.0, q).unwrap()).unwrap();
            assert!(r > prev, "q={q}");
            prev = r;
        }
        // Small-ρ regime: the Gaussian is flat and the maximum sits at the
        // first maximum of J_1, x = 1.8411837813...
        let r1 = bg_core_radius(&VortexSpec::new(15.0, 1).unwrap()).unwrap();
        assert!((r1 * SQRT_2 * 15.0 - 1.841_183_781_340_659_3).abs() < 0.02);
    }

    #[test]
    fn winding_counts() {
        let cfg = OpticalConfig::default();
        for q in [0u32, 1, 3, 10] {
            let spec = VortexSpec::new(15.0, q).unwrap();
            let f = amplitude_grid(
                StateFamily::Perfect,
                &cfg,
                &spec,
                Axis::symmetric("x", 20.0, 128).unwrap(),
                Axis::symmetric("y", 20.0, 128).unwrap(),
            )
            .unwrap();
            assert_eq!(count_phase_jumps(&f, 15.0).unwrap(), q as i64);
        }
    }

    #[test]
    fn winding_errors() {
        let cfg = OpticalConfig::default();
        let spec = VortexSpec::new(15.0, 2).unwrap();
        let f = amplitude_grid(
            StateFamily::Perfect,
            &cfg,
            &spec,
            Axis::symmetric("x", 20.0, 64).unwrap(),
            Axis::symmetric("y", 20.0, 64).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            count_phase_jumps(&f, 25.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            count_phase_jumps(&f, 0.1),
            Err(Error::DegenerateCircle(_))
        ));
    }
}
