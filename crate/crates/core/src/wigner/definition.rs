//! Wigner function from its defining integral,
//! W(r, p) = (1/4π²) ∬ ψ(r + R/2) ψ*(r - R/2) e^{i R·p} d²R.
//!
//! The kernel ψ(r + R/2) ψ*(r - R/2) is sampled once per position on a
//! tensor rule symmetric under R -> -R, so ψ is evaluated only once per node
//! and the sum is real up to rounding. Momentum sums are separable.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde_json::{json, Value};

use super::PhaseSpacePoint;
use crate::error::{Error, Result};
use crate::quadrature::gauss_hermite;
use crate::states::TwoModeAmplitude;

/// Imaginary part allowed relative to the slice (or Wigner-bound) scale.
pub const IMAG_TOL: f64 = 1e-8;
/// Node-doubling change allowed relative to the slice scale.
pub const DOUBLING_TOL: f64 = 1e-6;
/// |W| <= 1/π² for any normalised two-mode state.
pub const WIGNER_BOUND: f64 = 1.0 / (PI * PI);

/// Quadrature over the displacement R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadRule {
    /// Uniform nodes on |R_i| <= 2 × support radius with spacing
    /// 2π / (|p|_max + momentum support) / 2^refine, which keeps aliased
    /// copies of W outside the momentum support.
    Trapezoid { refine: u32 },
    /// Tensor Gauss–Hermite rule with nodes R = scale × t_k.
    GaussHermite { nodes: usize, scale: f64 },
}

impl QuadRule {
    /// The rule used by the node-doubling check.
    pub fn refined(&self) -> QuadRule {
        match *self {
            QuadRule::Trapezoid { refine } => QuadRule::Trapezoid { refine: refine + 1 },
            QuadRule::GaussHermite { nodes, scale } => QuadRule::GaussHermite {
                nodes: (2 * nodes).min(150),
                scale,
            },
        }
    }

    pub fn describe(&self) -> Value {
        match *self {
            QuadRule::Trapezoid { refine } => json!({"rule": "trapezoid", "refine": refine}),
            QuadRule::GaussHermite { nodes, scale } => {
                json!({"rule": "gauss-hermite", "nodes": nodes, "scale": scale})
            }
        }
    }
}

impl Default for QuadRule {
    fn default() -> Self {
        QuadRule::Trapezoid { refine: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefinitionQuad {
    pub rule: QuadRule,
    /// Re-evaluate with the refined rule and fail on a change above
    /// [`DOUBLING_TOL`].
    pub check_doubling: bool,
}

impl Default for DefinitionQuad {
    fn default() -> Self {
        DefinitionQuad {
            rule: QuadRule::default(),
            check_doubling: true,
        }
    }
}

/// Nodes and weights along one component of R.
#[derive(Debug, Clone)]
pub(crate) struct AxisNodes {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
}

impl AxisNodes {
    pub fn new<A: TwoModeAmplitude + ?Sized>(rule: &QuadRule, psi: &A, p_max: f64) -> Result<Self> {
        match *rule {
            QuadRule::Trapezoid { refine } => {
                let half = 2.0 * psi.support_radius();
                let h =
                    TAU / (p_max.abs() + psi.momentum_support()) / f64::powi(2.0, refine as i32);
                let k = (half / h).floor() as i64;
                let r: Vec<f64> = (-k..=k).map(|i| i as f64 * h).collect();
                let w = vec![h; r.len()];
                Ok(AxisNodes { r, w })
            }
            QuadRule::GaussHermite { nodes, scale } => {
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "Gauss-Hermite scale must be positive, got {scale}"
                    )));
                }
                let rule = gauss_hermite(nodes)?;
                let r = rule.nodes.iter().map(|t| scale * t).collect();
                let w = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(t, w)| scale * w * (t * t).exp())
                    .collect();
                Ok(AxisNodes { r, w })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    /// e^{i R_k p_m}, laid out as `[k * ps.len() + m]`.
    pub fn phases(&self, ps: &[f64]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len() * ps.len());
        for &r in &self.r {
            for &p in ps {
                out.push(Complex64::from_polar(1.0, r * p));
            }
        }
        out
    }
}

/// Weighted kernel w1_i w2_j ψ(r + R_ij/2) ψ*(r - R_ij/2), row-major in i.
pub(crate) fn position_kernel<A: TwoModeAmplitude + ?Sized>(
    psi: &A,
    x: f64,
    y: f64,
    n1: &AxisNodes,
    n2: &AxisNodes,
) -> Vec<Complex64> {
    let (m1, m2) = (n1.len(), n2.len());
    let mut a = vec![Complex64::new(0.0, 0.0); m1 * m2];
    for i in 0..m1 {
        let px = x + 0.5 * n1.r[i];
        for j in 0..m2 {
            let py = y + 0.5 * n2.r[j];
            if psi.support_contains(px, py) {
                a[i * m2 + j] = psi.amplitude(px, py);
            }
        }
    }
    // Both rules are symmetric, so -R_ij is node (m1-1-i, m2-1-j).
    let mut k = vec![Complex64::new(0.0, 0.0); m1 * m2];
    for i in 0..m1 {
        for j in 0..m2 {
            let fwd = a[i * m2 + j];
            if fwd == Complex64::new(0.0, 0.0) {
                continue;
            }
            let back = a[(m1 - 1 - i) * m2 + (m2 - 1 - j)];
            k[i * m2 + j] = fwd * back.conj() * (n1.w[i] * n2.w[j]);
        }
    }
    k
}

/// (1/4π²) Σ_ij K_ij e^{i(R1_i px_a + R2_j py_b)} for every (a, b), laid out
/// as `[b * px.len() + a]`. `e1`/`e2` are the phase tables of the axes.
pub(crate) fn momentum_sums(
    kernel: &[Complex64],
    m1: usize,
    m2: usize,
    e1: &[Complex64],
    e2: &[Complex64],
    npx: usize,
    npy: usize,
) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; npx * npy];
    let scale = 1.0 / (4.0 * PI * PI);
    if npx <= npy {
        // Contract over i first: S[j][a] = Σ_i K_ij e1[i][a].
        let mut s = vec![zero; m2 * npx];
        for i in 0..m1 {
            let row = &kernel[i * m2..(i + 1) * m2];
            let ph = &e1[i * npx..(i + 1) * npx];
            for (j, &kij) in row.iter().enumerate() {
                if kij == zero {
                    continue;
                }
                for a in 0..npx {
                    s[j * npx + a] += kij * ph[a];
                }
            }
        }
        for j in 0..m2 {
            let ph = &e2[j * npy..(j + 1) * npy];
            for a in 0..npx {
                let sja = s[j * npx + a];
                if sja == zero {
                    continue;
                }
                for b in 0..npy {
                    out[b * npx + a] += sja * ph[b];
                }
            }
        }
    } else {
        // Contract over j first: T[i][b] = Σ_j K_ij e2[j][b].
        let mut t = vec![zero; m1 * npy];
        for i in 0..m1 {
            let row = &kernel[i * m2..(i + 1) * m2];
            for (j, &kij) in row.iter().enumerate() {
                if kij == zero {
                    continue;
                }
                let ph = &e2[j * npy..(j + 1) * npy];
                for b in 0..npy {
                    t[i * npy + b] += kij * ph[b];
                }
            }
        }
        for i in 0..m1 {
            let ph = &e1[i * npx..(i + 1) * npx];
            for b in 0..npy {
                let tib = t[i * npy + b];
                if tib == zero {
                    continue;
                }
                for a in 0..npx {
                    out[b * npx + a] += tib * ph[a];
                }
            }
        }
    }
    for v in &mut out {
        *v *= scale;
    }
    out
}

/// Complex value of the defining integral with the given rule.
pub(crate) fn wigner_complex<A: TwoModeAmplitude + ?Sized>(
    psi: &A,
    p: &PhaseSpacePoint,
    rule: &QuadRule,
) -> Result<Complex64> {
    let n1 = AxisNodes::new(rule, psi, p.px)?;
    let n2 = AxisNodes::new(rule, psi, p.py)?;
    let k = position_kernel(psi, p.x, p.y, &n1, &n2);
    let e1 = n1.phases(&[p.px]);
    let e2 = n2.phases(&[p.py]);
    Ok(momentum_sums(&k, n1.len(), n2.len(), &e1, &e2, 1, 1)[0])
}

/// W at one phase-space point for a unit-normalised ψ.
///
/// The imaginary residual and the node-doubling change are judged against
/// max(|W|, 1e-6 × 1/π²).
pub fn wigner_definition<A: TwoModeAmplitude + ?Sized>(
    psi: &A,
    p: &PhaseSpacePoint,
    quad: &DefinitionQuad,
) -> Result<f64> {
    p.check()?;
    let w = wigner_complex(psi, p, &quad.rule)?;
    let scale = w.re.abs().max(1e-6 * WIGNER_BOUND);
    if w.im.abs() > IMAG_TOL * scale {
        return Err(Error::Accuracy(format!(
            "Wigner imaginary residual {:e} at {p:?}",
            w.im
        )));
    }
    if quad.check_doubling && quad.rule.refined() != quad.rule {
        let fine = wigner_complex(psi, p, &quad.rule.refined())?;
        if (fine.re - w.re).abs() > DOUBLING_TOL * scale {
            return Err(Error::Accuracy(format!(
                "Wigner node doubling changed {} -> {} at {p:?}",
                w.re, fine.re
            )));
        }
    }
    Ok(w.re)
}

/// ∬ W(x, y, px, py) dpx dpy by the trapezoid rule over a momentum grid
/// fine enough to resolve the kernel's support; equals |ψ(x, y)|² for an
/// exact Wigner function.
pub fn marginal_density<A: TwoModeAmplitude + ?Sized>(
    psi: &A,
    x: f64,
    y: f64,
    rule: &QuadRule,
) -> Result<f64> {
    let p_max = psi.momentum_support();
    let step = 0.9 * TAU / (4.0 * psi.support_radius());
    let half = (p_max / step).ceil() as i64;
    let ps: Vec<f64> = (-half..=half).map(|k| k as f64 * step).collect();
    let n1 = AxisNodes::new(rule, psi, p_max)?;
    let n2 = AxisNodes::new(rule, psi, p_max)?;
    let k = position_kernel(psi, x, y, &n1, &n2);
    let e1 = n1.phases(&ps);
    let e2 = n2.phases(&ps);
    let w = momentum_sums(&k, n1.len(), n2.len(), &e1, &e2, ps.len(), ps.len());
    let total: Complex64 = w.iter().sum();
    Ok(total.re * step * step)
}

/// ψ divided by its numerically computed L² norm.
pub struct Normalized<A> {
    inner: A,
    inv_norm: f64,
    norm: f64,
}

impl<A: TwoModeAmplitude> Normalized<A> {
    pub fn new(inner: A) -> Result<Self> {
        let s = inner.support_radius();
        // |ψ|² has twice the momentum bandwidth of ψ; the trapezoid rule is
        // spectrally accurate below that spacing.
        let h = (0.9 * PI / (2.0 * inner.momentum_support())).min(0.125);
        let n = (s / h).ceil() as i64;
        let mut sum = 0.0;
        for i in -n..=n {
            let x = i as f64 * h;
            for j in -n..=n {
                let y = j as f64 * h;
                if inner.support_contains(x, y) {
                    sum += inner.amplitude(x, y).norm_sqr();
                }
            }
        }
        let norm = (sum * h * h).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Accuracy(format!(
                "cannot normalise state, norm = {norm}"
            )));
        }
        Ok(Normalized {
            inner,
            inv_norm: 1.0 / norm,
            norm,
        })
    }

    /// L² norm of the wrapped state before rescaling.
    pub fn original_norm(&self) -> f64 {
        self.norm
    }
}

impl<A: TwoModeAmplitude> TwoModeAmplitude for Normalized<A> {
    fn amplitude(&self, x: f64, y: f64) -> Complex64 {
        self.inner.amplitude(x, y) * self.inv_norm
    }
    fn support_radius(&self) -> f64 {
        self.inner.support_radius()
    }
    fn momentum_support(&self) -> f64 {
        self.inner.momentum_support()
    }
    fn charge(&self) -> Option<u32> {
        self.inner.charge()
    }
    fn support_contains(&self, x: f64, y: f64) -> bool {
        self.inner.support_contains(x, y)
    }
}
