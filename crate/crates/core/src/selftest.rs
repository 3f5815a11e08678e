//! Reduced-size cross-module checks behind `pqovs selftest`.

use std::f64::consts::{PI, TAU};

use crate::lensft::{lens_transform, LensOptions, RadialProfile};
use crate::specfun::bessel_i_scaled;
use crate::states::{
    amplitude_grid, count_phase_jumps, derive_scales, perfect_amplitude, ring_radius, Axis,
    OpticalConfig, PerfectVortex, PhasePoint, StateFamily, TwoModeAmplitude, VortexSpec,
};
use crate::wigner::{
    marginal_density, wigner_definition, wigner_slice, DefinitionQuad, Method, Normalized,
    PhaseSpacePoint, Plane, SliceRequest,
};

/// Special functions used by the checks; replaceable so a harness can
/// inject faults.
#[derive(Clone, Copy)]
pub struct SelfTestProviders {
    pub bessel_j: fn(u32, f64) -> f64,
}

impl Default for SelfTestProviders {
    fn default() -> Self {
        SelfTestProviders {
            bessel_j: |n, x| crate::specfun::bessel_j(n, x).expect("order in range"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: crate::Result<(f64, f64)>) -> CheckResult {
    match outcome {
        Ok((err, tol)) => CheckResult {
            name,
            passed: err <= tol,
            detail: format!("error {err:.3e} (tolerance {tol:.0e})"),
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn bessel_recurrence(p: &SelfTestProviders) -> crate::Result<(f64, f64)> {
    let mut worst: f64 = 0.0;
    for &x in &[0.5, 5.0, 40.0] {
        for &q in &[1u32, 5, 20] {
            let (a, b, c) = (
                (p.bessel_j)(q - 1, x),
                (p.bessel_j)(q, x),
                (p.bessel_j)(q + 1, x),
            );
            let scale = a.abs().max(b.abs()).max(c.abs()).max(1e-300);
            worst = worst.max((a + c - 2.0 * q as f64 / x * b).abs() / scale);
        }
    }
    Ok((worst, 1e-10))
}

fn jacobi_anger(p: &SelfTestProviders) -> crate::Result<(f64, f64)> {
    let n = 4096;
    let mut worst: f64 = 0.0;
    for &(q, x) in &[(0u32, 1.0), (2, 10.0), (20, 30.0)] {
        let s: f64 = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                (x * t.sin() - q as f64 * t).cos()
            })
            .sum();
        worst = worst.max((s / n as f64 - (p.bessel_j)(q, x)).abs());
    }
    Ok((worst, 1e-12))
}

fn scaled_i_recurrence() -> crate::Result<(f64, f64)> {
    let mut worst: f64 = 0.0;
    for &x in &[0.5, 10.0, 450.0] {
        for &q in &[1u32, 7, 30] {
            let a = bessel_i_scaled(q - 1, x)?;
            let b = bessel_i_scaled(q, x)?;
            let c = bessel_i_scaled(q + 1, x)?;
            worst = worst.max((a - c - 2.0 * q as f64 / x * b).abs() / a.abs().max(1e-300));
        }
    }
    Ok((worst, 1e-10))
}

fn lens_equivalence(q: u32) -> crate::Result<(f64, f64)> {
    let cfg = OpticalConfig::default();
    let spec = VortexSpec::new(5.0, q)?;
    let scales = derive_scales(&cfg, &spec)?;
    let rs = [3.0, 4.0, 5.0, 6.0, 7.0];
    let out = lens_transform(
        &RadialProfile::bessel_gauss(&spec)?,
        &cfg,
        &rs,
        &LensOptions::default(),
    )?;
    let mut worst: f64 = 0.0;
    for (&r, v) in rs.iter().zip(&out.values) {
        let want = perfect_amplitude(&scales, &spec, PhasePoint::new(r, 0.0)?)?;
        worst = worst.max((v - want).norm() / want.norm());
    }
    Ok((worst, 1e-6))
}

fn wigner_reality() -> crate::Result<(f64, f64)> {
    let spec = VortexSpec::new(5.0, 2)?;
    let req = SliceRequest {
        plane: Plane::XPy,
        fixed: [0.0, 0.0],
        axis1: Axis::symmetric("x", 9.0, 9)?,
        axis2: Axis::symmetric("py", 6.0, 9)?,
        method: Method::Definition,
        quad: DefinitionQuad {
            check_doubling: false,
            ..DefinitionQuad::default()
        },
    };
    let slice = wigner_slice(&OpticalConfig::default(), &spec, &req)?;
    Ok((slice.imag_residual, 1e-8))
}

fn marginal_point() -> crate::Result<(f64, f64)> {
    let psi = Normalized::new(PerfectVortex::new(&VortexSpec::new(5.0, 2)?)?)?;
    let (x, y) = (4.0, 2.5);
    let rule = DefinitionQuad::default().rule;
    let m = marginal_density(&psi, x, y, &rule)?;
    let want = psi.amplitude(x, y).norm_sqr();
    Ok(((m - want).abs() / want, 1e-4))
}

/// |W| <= 1/π² at a point inside the ring, reported as the excess over it.
fn wigner_bound() -> crate::Result<(f64, f64)> {
    let psi = Normalized::new(PerfectVortex::new(&VortexSpec::new(5.0, 2)?)?)?;
    let p = PhaseSpacePoint::new(0.0, 0.0, 0.0, 0.0)?;
    let w = wigner_definition(&psi, &p, &DefinitionQuad::default())?;
    Ok(((w.abs() * PI * PI - 1.0).max(0.0), 1e-9))
}

fn phase_count_q1() -> crate::Result<(f64, f64)> {
    let cfg = OpticalConfig::default();
    let spec = VortexSpec::new(15.0, 1)?;
    let f = amplitude_grid(
        StateFamily::Perfect,
        &cfg,
        &spec,
        Axis::symmetric("x", 25.0, 128)?,
        Axis::symmetric("y", 25.0, 128)?,
    )?;
    let r = ring_radius(&derive_scales(&cfg, &spec)?, &spec)?;
    let n = count_phase_jumps(&f, r)?;
    Ok(((n - 1).abs() as f64, 0.0))
}

/// Runs every check in a fixed order.
pub fn run_selftest(p: &SelfTestProviders) -> Vec<CheckResult> {
    vec![
        check("bessel-j recurrence", bessel_recurrence(p)),
        check("bessel-j jacobi-anger", jacobi_anger(p)),
        check("scaled-bessel-i recurrence", scaled_i_recurrence()),
        check("lens transform equivalence q=0", lens_equivalence(0)),
        check("lens transform equivalence q=2", lens_equivalence(2)),
        check("wigner reality", wigner_reality()),
        check("wigner marginal", marginal_point()),
        check("wigner bound", wigner_bound()),
        check("phase count q=1", phase_count_q1()),
    ]
}

pub fn format_report(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in results {
        s.push_str(&format!(
            "{:<width$}  {}  {}\n",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        ));
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name)
        .collect();
    if failed.is_empty() {
        s.push_str("all checks passed\n");
    } else {
        s.push_str(&format!("failed: {}\n", failed.join(", ")));
    }
    s
}
