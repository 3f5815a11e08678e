//! Quadrature rules and 1-D search helpers shared by the transform and
//! Wigner code.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of a rule on its reference interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// n-point Gauss–Legendre rule on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        loop {
            let (p, d) = legendre_with_derivative(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// The 16-point Gauss–Legendre rule used for composite panels.
pub fn gl16() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Composite Gauss–Legendre nodes on [a, b] with `panels` equal panels.
/// Returns (abscissae, weights) already mapped to the interval.
pub fn composite_gl(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gl16();
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut xs = Vec::with_capacity(panels * rule.nodes.len());
    let mut ws = Vec::with_capacity(panels * rule.nodes.len());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(mid + half * t);
            ws.push(half * w);
        }
    }
    (xs, ws)
}

/// n-point Gauss–Hermite rule for the weight e^{-t^2} on (-inf, inf).
///
/// Returned weights are the plain Gauss weights; multiply by e^{t^2} to use
/// the rule on integrands that are not written with the weight factored out.
pub fn gauss_hermite(n: usize) -> Result<Rule> {
    if n == 0 || n > 150 {
        return Err(Error::InvalidArgument(format!(
            "Gauss-Hermite order must be in 1..=150, got {n}"
        )));
    }
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..m {
        // Initial guesses follow the classic asymptotic placement.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[n - 1],
            3 => 1.91 * z - 0.91 * nodes[n - 2],
            _ => 2.0 * z - nodes[n - i + 1],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Accuracy(format!(
                "Gauss-Hermite root {i} of {n} did not converge"
            )));
        }
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        let w = 2.0 / (pp * pp);
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok(Rule { nodes, weights })
}

/// Golden-section search for a maximum of a unimodal `f` on [a, b].
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Bisection for a sign change of `f` on [a, b].
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracketing(format!("no sign change on [{a}, {b}]")));
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Composite trapezoid over uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(16);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // x^30 over [-1, 1] = 2/31 (degree 31 rule is exact).
        let v: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(30))
            .sum();
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn composite_integrates_oscillation() {
        let (x, w) = composite_gl(0.0, 10.0, 20);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * (3.0 * x).cos()).sum();
        assert!((v - (30f64).sin() / 3.0).abs() < 1e-13);
    }

    #[test]
    fn hermite_moments() {
        for n in [10, 80, 150] {
            let r = gauss_hermite(n).unwrap();
            let m0: f64 = r.weights.iter().sum();
            assert!((m0 - PI.sqrt()).abs() < 1e-12, "n={n}");
            let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * t * t).sum();
            assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-12, "n={n}");
            // e^{-t^2} cos(t) integrates to sqrt(pi) e^{-1/4}.
            let c: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(t, w)| w * t.cos())
                .sum();
            assert!((c - PI.sqrt() * (-0.25f64).exp()).abs() < 1e-12, "n={n}");
        }
        assert!(gauss_hermite(0).is_err());
    }

    #[test]
    fn golden_and_bisect() {
        let x = golden_max(|x| -(x - 1.3) * (x - 1.3), 0.0, 4.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-8);
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-6).is_err());
    }
}
