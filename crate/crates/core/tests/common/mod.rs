//! Independent reference implementations shared by the integration tests.
#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::{PI, TAU};

use pqovs::specfun::{bessel_i_scaled, bessel_j, laguerre, log_factorial};

/// J_q(x) from its power series; accurate for moderate x (x <~ 15).
pub fn j_series(q: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=q {
        term *= h / k as f64;
    }
    let mut sum = term;
    for k in 1..200 {
        term *= -h * h / (k as f64 * (k + q) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// e^{-x} I_q(x) = (1/π) ∫_0^π e^{x(cos θ - 1)} cos(qθ) dθ by the
/// trapezoid rule on the full period (spectrally accurate).
pub fn ie_integral(q: u32, x: f64, n: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..n {
        let t = TAU * k as f64 / n as f64;
        s += (x * (t.cos() - 1.0)).exp() * (q as f64 * t).cos();
    }
    s / n as f64
}

/// Frozen 20-digit values of e^{-x} I_q(x) (arbitrary-precision reference).
pub const IE_REFERENCE: [(u32, f64, f64); 5] = [
    (2, 225.0, 0.026374949104282575212),
    (0, 0.5, 0.64503527044915006811),
    (20, 450.0, 0.012056515066894013716),
    (50, 10.0, 2.1596267894454476333e-34),
    (7, 100.0, 0.031229165630467613268),
];

/// Frozen 20-digit values of J_q(x).
pub const J_REFERENCE: [(u32, f64, f64); 6] = [
    (0, 1.0, 0.76519768655796655145),
    (2, 10.0, 0.25463031368512062253),
    (20, 30.0, 0.0048310199934040645386),
    (5, 0.1, 2.6030817909644415564e-9),
    (50, 100.0, -0.038698339728525383467),
    (1, 2.5, 0.49709410246427403801),
];

/// Exact Wigner function of the unit-norm perfect vortex written as a
/// superposition of coherent states on the ring of radius α:
///
/// W = 1/(4π⁴ ie_q(α²)) ∬ e^{iq(φ-φ')} e^{-2|r-m|²} e^{-|p|²/2}
///     e^{-ip·(a-b)} dφ dφ',
///
/// with a = α n_φ, b = α n_φ', m = (a + b)/2, evaluated by the trapezoid
/// rule with `n` nodes per angle.
pub fn ring_wigner(alpha: f64, q: u32, r: [f64; 4], n: usize) -> f64 {
    let [x, y, px, py] = r;
    let ie = bessel_i_scaled(q, alpha * alpha).unwrap();
    let h = TAU / n as f64;
    let cs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let t = h * k as f64;
            (alpha * t.cos(), alpha * t.sin())
        })
        .collect();
    let mut re = 0.0;
    for (i, &(ax, ay)) in cs.iter().enumerate() {
        for (j, &(bx, by)) in cs.iter().enumerate() {
            let (mx, my) = (0.5 * (ax + bx), 0.5 * (ay + by));
            let d2 = (x - mx).powi(2) + (y - my).powi(2);
            let g = (-2.0 * d2).exp();
            if g < 1e-300 {
                continue;
            }
            let phase = q as f64 * h * (i as f64 - j as f64) - (px * (ax - bx) + py * (ay - by));
            re += g * phase.cos();
        }
    }
    let p2 = px * px + py * py;
    re * h * h * (-0.5 * p2).exp() / (4.0 * PI.powi(4) * ie)
}

/// Worst deviations of the specfun invariants: (name, worst, tolerance).
pub fn specfun_suite() -> Vec<(&'static str, f64, f64)> {
    let mut out = Vec::new();

    let mut w: f64 = 0.0;
    for i in 0..=400 {
        let x = 0.1 + (100.0 - 0.1) * i as f64 / 400.0;
        for q in 1..=50u32 {
            let a = bessel_j(q - 1, x).unwrap();
            let b = bessel_j(q, x).unwrap();
            let c = bessel_j(q + 1, x).unwrap();
            w = w.max((a + c - 2.0 * q as f64 / x * b).abs());
        }
    }
    out.push(("J recurrence, absolute", w, 1e-10));

    let mut w: f64 = 0.0;
    for i in 0..=500 {
        let x = 0.1 + (500.0 - 0.1) * i as f64 / 500.0;
        for q in 1..=50u32 {
            let a = bessel_i_scaled(q - 1, x).unwrap();
            let b = bessel_i_scaled(q, x).unwrap();
            let c = bessel_i_scaled(q + 1, x).unwrap();
            w = w.max((a - c - 2.0 * q as f64 / x * b).abs() / a);
        }
    }
    out.push(("scaled I recurrence, relative", w, 1e-10));

    let mut w: f64 = 0.0;
    for &x in &[-3.0, 0.0, 0.7, 5.0, 20.0, 60.0] {
        for q in 1..60u32 {
            let (a, b, c) = (
                laguerre(q - 1, x).unwrap(),
                laguerre(q, x).unwrap(),
                laguerre(q + 1, x).unwrap(),
            );
            let lhs = (q + 1) as f64 * c;
            let rhs = (2 * q + 1) as f64 * b - x * b - q as f64 * a;
            let scale =
                ((2 * q + 1) as f64 * b.abs() + x.abs() * b.abs() + q as f64 * a.abs()).max(1.0);
            w = w.max((lhs - rhs).abs() / scale);
        }
    }
    out.push(("Laguerre recurrence, relative to terms", w, 1e-13));

    let mut w: f64 = 0.0;
    for &(q, x) in &[(0u32, 1.0), (2, 10.0), (20, 30.0)] {
        let n = 4096;
        let s: f64 = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                (q as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            / n as f64;
        w = w.max((s - bessel_j(q, x).unwrap()).abs());
    }
    out.push(("Jacobi-Anger closure", w, 1e-8));

    let mut w: f64 = 0.0;
    for &(q, x, v) in &J_REFERENCE {
        w = w.max((bessel_j(q, x).unwrap() - v).abs());
    }
    for q in 0..=30u32 {
        for &x in &[0.3, 2.0, 7.5, 12.0] {
            w = w.max((bessel_j(q, x).unwrap() - j_series(q, x)).abs());
        }
    }
    out.push(("J vs series and reference, absolute", w, 1e-12));

    let lo = bisect(|x| j_series(0, x), 2.0, 3.0);
    let zero = bessel_j(0, lo).unwrap().abs();
    out.push(("J0 at series-oracle zero", zero, 1e-12));
    out.push(("J0 zero location", (lo - 2.404825557).abs(), 1e-9));

    let mut w: f64 = 0.0;
    for &(q, x, v) in &IE_REFERENCE {
        w = w.max((bessel_i_scaled(q, x).unwrap() / v - 1.0).abs());
    }
    let quad = ie_integral(2, 225.0, 4096);
    w = w.max((bessel_i_scaled(2, 225.0).unwrap() / quad - 1.0).abs());
    out.push(("scaled I vs integral and reference, relative", w, 1e-10));

    // L_5 by its monomial expansion with exact rational coefficients.
    let x: f64 = 3.7;
    let l5 = 1.0 - 5.0 * x + 5.0 * x * x - 5.0 / 3.0 * x.powi(3) + 5.0 / 24.0 * x.powi(4)
        - x.powi(5) / 120.0;
    out.push((
        "Laguerre L5(3.7) monomial oracle",
        (laguerre(5, x).unwrap() - l5).abs(),
        1e-13,
    ));

    let exact: u64 = (1..=20u64).product();
    let lf = log_factorial(20).unwrap();
    out.push((
        "ln 20! vs exact product",
        (lf / (exact as f64).ln() - 1.0).abs(),
        1e-13,
    ));
    out
}

pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}
