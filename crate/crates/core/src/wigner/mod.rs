//! Two-mode Wigner function of the perfect vortex: closed form, defining
//! integral, 2-D slices and the negativity volume.
//!
//! Coordinates are dimensionless: positions in units of sigma, momenta in
//! units of 1/sigma, so dx dp_y is the same measure in either system.

mod analytic;
mod definition;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::states::{
    derive_scales, Axis, OpticalConfig, PerfectVortex, RealField2D, TwoModeAmplitude, VortexSpec,
};

pub use analytic::{
    laguerre_argument, ln_factorial_sum, wigner_analytic, wigner_analytic_log, ANALYTIC_MAX_CHARGE,
};
pub use definition::{
    marginal_density, wigner_definition, DefinitionQuad, Normalized, QuadRule, DOUBLING_TOL,
    IMAG_TOL, WIGNER_BOUND,
};

use definition::{momentum_sums, position_kernel, wigner_complex, AxisNodes};

/// Largest charge accepted by [`negativity_scan`].
pub const SCAN_MAX_CHARGE: u32 = 20;
/// Boundary values must be below this fraction of the slice maximum.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Allowed change of n(W) between the grid and its 2x subsample.
pub const REFINEMENT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpacePoint {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl PhaseSpacePoint {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Result<Self> {
        let p = PhaseSpacePoint { x, y, px, py };
        p.check()?;
        Ok(p)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if [self.x, self.y, self.px, self.py]
            .iter()
            .all(|v| v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "non-finite phase-space point {self:?}"
            )))
        }
    }

    fn from_coords(c: [f64; 4]) -> Self {
        PhaseSpacePoint {
            x: c[0],
            y: c[1],
            px: c[2],
            py: c[3],
        }
    }
}

const COORD_NAMES: [&str; 4] = ["x", "y", "px", "py"];

/// Which two phase-space coordinates vary across a slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Plane {
    #[serde(rename = "xy")]
    Xy,
    #[serde(rename = "x_px")]
    XPx,
    #[serde(rename = "x_py")]
    XPy,
    #[serde(rename = "y_py")]
    YPy,
    #[serde(rename = "y_px")]
    YPx,
    #[serde(rename = "px_py")]
    PxPy,
}

impl Plane {
    pub const ALL: [Plane; 6] = [
        Plane::Xy,
        Plane::XPx,
        Plane::XPy,
        Plane::YPy,
        Plane::YPx,
        Plane::PxPy,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Plane::Xy => "xy",
            Plane::XPx => "x_px",
            Plane::XPy => "x_py",
            Plane::YPy => "y_py",
            Plane::YPx => "y_px",
            Plane::PxPy => "px_py",
        }
    }

    /// Indices into (x, y, px, py) of the horizontal and vertical axes.
    pub fn varying(&self) -> (usize, usize) {
        match self {
            Plane::Xy => (0, 1),
            Plane::XPx => (0, 2),
            Plane::XPy => (0, 3),
            Plane::YPy => (1, 3),
            Plane::YPx => (1, 2),
            Plane::PxPy => (2, 3),
        }
    }

    /// Indices of the two held coordinates, in (x, y, px, py) order.
    pub fn fixed(&self) -> (usize, usize) {
        let (a, b) = self.varying();
        let mut rest = (0..4).filter(|&i| i != a && i != b);
        (rest.next().unwrap(), rest.next().unwrap())
    }

    pub fn axis_labels(&self) -> (&'static str, &'static str) {
        let (a, b) = self.varying();
        (COORD_NAMES[a], COORD_NAMES[b])
    }

    pub fn fixed_labels(&self) -> (&'static str, &'static str) {
        let (a, b) = self.fixed();
        (COORD_NAMES[a], COORD_NAMES[b])
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Plane {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Plane::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown plane {s:?}; expected one of xy, x_px, x_py, y_py, y_px, px_py"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Definition,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Definition => "definition",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Method::Analytic),
            "definition" => Ok(Method::Definition),
            _ => Err(Error::InvalidArgument(format!(
                "unknown method {s:?}; expected analytic or definition"
            ))),
        }
    }
}

/// What to compute for a slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceRequest {
    pub plane: Plane,
    /// Values of the held coordinates, in (x, y, px, py) order.
    pub fixed: [f64; 2],
    pub axis1: Axis,
    pub axis2: Axis,
    pub method: Method,
    pub quad: DefinitionQuad,
}

/// A 2-D cut of the Wigner function. The true value at a grid node is
/// `grid value × exp(ln_scale)`; `ln_scale` is zero unless the values would
/// not fit in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerSlice {
    pub plane: Plane,
    pub fixed: [f64; 2],
    pub grid: RealField2D,
    pub method: Method,
    pub ln_scale: f64,
    /// max |Im W| / max |Re W| (definition method only).
    pub imag_residual: f64,
}

impl WignerSlice {
    pub fn max_abs(&self) -> f64 {
        self.grid.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn coords_at(plane: Plane, fixed: [f64; 2], a: f64, b: f64) -> [f64; 4] {
    let (ia, ib) = plane.varying();
    let (fa, fb) = plane.fixed();
    let mut c = [0.0; 4];
    c[ia] = a;
    c[ib] = b;
    c[fa] = fixed[0];
    c[fb] = fixed[1];
    c
}

fn slice_meta(req: &SliceRequest, spec: &VortexSpec) -> BTreeMap<String, Value> {
    let (fa, fb) = req.plane.fixed_labels();
    let mut m = BTreeMap::new();
    m.insert("plane".into(), json!(req.plane.as_str()));
    m.insert(
        "fixed".into(),
        json!({ fa: req.fixed[0], fb: req.fixed[1] }),
    );
    m.insert("q".into(), json!(spec.charge));
    m.insert("alpha".into(), json!(spec.alpha));
    m.insert("method".into(), json!(req.method.as_str()));
    m.insert("fourier_sign".into(), json!("exp(+i R.p)"));
    m
}

/// Slice of the perfect vortex's Wigner function.
pub fn wigner_slice(
    cfg: &OpticalConfig,
    spec: &VortexSpec,
    req: &SliceRequest,
) -> Result<WignerSlice> {
    let mut slice = match req.method {
        Method::Analytic => analytic_slice(cfg, spec, req)?,
        Method::Definition => {
            let psi = Normalized::new(PerfectVortex::new(spec)?)?;
            let mut s = definition_slice(&psi, req)?;
            s.grid
                .meta
                .insert("input_norm".into(), json!(psi.original_norm()));
            s
        }
    };
    let scales = derive_scales(cfg, spec)?;
    let extra = slice_meta(req, spec);
    slice.grid.meta.extend(extra);
    slice
        .grid
        .meta
        .insert("sigma_m".into(), json!(scales.sigma));
    slice
        .grid
        .meta
        .insert("wavelength_m".into(), json!(cfg.wavelength));
    slice
        .grid
        .meta
        .insert("focal_length_m".into(), json!(cfg.focal_length));
    Ok(slice)
}

fn analytic_slice(
    cfg: &OpticalConfig,
    spec: &VortexSpec,
    req: &SliceRequest,
) -> Result<WignerSlice> {
    let scales = derive_scales(cfg, spec)?;
    let logs = crate::states::Field2D::<(f64, f64)>::try_fill(
        req.axis1.clone(),
        req.axis2.clone(),
        |a, b| {
            let p = PhaseSpacePoint::from_coords(coords_at(req.plane, req.fixed, a, b));
            wigner_analytic_log(&scales, spec, &p)
        },
    )?;
    let top = logs
        .values
        .iter()
        .map(|v| v.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let ln_scale = if top.is_finite() && top.abs() > 600.0 {
        top
    } else {
        0.0
    };
    let mut grid = logs.map(|(l, s)| {
        if s == 0.0 {
            0.0
        } else {
            s * (l - ln_scale).exp()
        }
    });
    grid.meta.insert("ln_scale".into(), json!(ln_scale));
    Ok(WignerSlice {
        plane: req.plane,
        fixed: req.fixed,
        grid,
        method: Method::Analytic,
        ln_scale,
        imag_residual: 0.0,
    })
}

/// Slice from the defining integral for any unit-normalised ψ.
///
/// Grid nodes sharing a position reuse one kernel; momentum sums are
/// separable. Probe points are re-evaluated with the refined rule when
/// `req.quad.check_doubling` is set.
pub fn definition_slice<A: TwoModeAmplitude + ?Sized>(
    psi: &A,
    req: &SliceRequest,
) -> Result<WignerSlice> {
    let (c1, c2) = req.plane.varying();
    let ax1 = req.axis1.values();
    let ax2 = req.axis2.values();
    let base = coords_at(req.plane, req.fixed, 0.0, 0.0);

    // Momentum lists: an axis if that momentum varies, else the held value.
    let mom_list = |c: usize| -> Vec<f64> {
        if c1 == c {
            ax1.clone()
        } else if c2 == c {
            ax2.clone()
        } else {
            vec![base[c]]
        }
    };
    let pxs = mom_list(2);
    let pys = mom_list(3);
    let pmax = |v: &[f64]| v.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let n1 = AxisNodes::new(&req.quad.rule, psi, pmax(&pxs))?;
    let n2 = AxisNodes::new(&req.quad.rule, psi, pmax(&pys))?;
    let e1 = n1.phases(&pxs);
    let e2 = n2.phases(&pys);

    // Positions: one per combination of the varying position axes.
    let pos1 = if c1 < 2 { ax1.len() } else { 1 };
    let pos2 = if c2 < 2 { ax2.len() } else { 1 };
    let keys: Vec<(usize, usize)> = (0..pos2)
        .flat_map(|j| (0..pos1).map(move |i| (i, j)))
        .collect();

    let blocks: Vec<Result<Vec<Complex64>>> = keys
        .par_iter()
        .map(|&(i, j)| {
            let mut c = base;
            if c1 < 2 {
                c[c1] = ax1[i];
            }
            if c2 < 2 {
                c[c2] = ax2[j];
            }
            let k = position_kernel(psi, c[0], c[1], &n1, &n2);
            let w = momentum_sums(&k, n1.len(), n2.len(), &e1, &e2, pxs.len(), pys.len());
            if w.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
                Ok(w)
            } else {
                Err(Error::Accuracy("non-finite Wigner value".into()).at(j, i))
            }
        })
        .collect();
    let blocks: Vec<Vec<Complex64>> = blocks.into_iter().collect::<Result<_>>()?;

    let (m1, m2) = (ax1.len(), ax2.len());
    let mut values = vec![Complex64::new(0.0, 0.0); m1 * m2];
    let npx = pxs.len();
    for row in 0..m2 {
        for col in 0..m1 {
            let key_i = if c1 < 2 { col } else { 0 };
            let key_j = if c2 < 2 { row } else { 0 };
            let block = &blocks[key_j * pos1 + key_i];
            let idx_for = |c: usize| {
                if c1 == c {
                    col
                } else if c2 == c {
                    row
                } else {
                    0
                }
            };
            values[row * m1 + col] = block[idx_for(3) * npx + idx_for(2)];
        }
    }

    let max_re = values.iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
    let max_im = values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    let residual = if max_re > 0.0 {
        max_im / max_re
    } else {
        max_im
    };
    if residual > IMAG_TOL {
        return Err(Error::Accuracy(format!(
            "Wigner imaginary residual {residual:e} of the slice maximum"
        )));
    }
    let mut grid = RealField2D::new(
        req.axis1.clone(),
        req.axis2.clone(),
        values.iter().map(|v| v.re).collect(),
    )?;

    let mut max_change: Option<f64> = None;
    if req.quad.check_doubling && req.quad.rule.refined() != req.quad.rule {
        let refined = req.quad.rule.refined();
        let mut probes: Vec<(usize, usize)> = vec![
            (m1 / 4, m2 / 4),
            (3 * m1 / 4, m2 / 2),
            (m1 / 2, 3 * m2 / 4),
            (m1 / 3, 2 * m2 / 3),
        ];
        let argmax = (0..values.len())
            .max_by(|&a, &b| values[a].re.abs().total_cmp(&values[b].re.abs()))
            .unwrap_or(0);
        probes.push((argmax % m1, argmax / m1));
        let mut worst = 0.0f64;
        for &(col, row) in &probes {
            let p =
                PhaseSpacePoint::from_coords(coords_at(req.plane, req.fixed, ax1[col], ax2[row]));
            let fine = wigner_complex(psi, &p, &refined)?;
            worst = worst.max((fine.re - grid.get(col, row)).abs());
        }
        let rel = if max_re > 0.0 { worst / max_re } else { worst };
        if rel > DOUBLING_TOL {
            return Err(Error::Accuracy(format!(
                "Wigner node doubling changed the slice by {rel:e} of its maximum"
            )));
        }
        max_change = Some(rel);
    }

    let m = &mut grid.meta;
    m.insert("quadrature".into(), req.quad.rule.describe());
    m.insert("nodes".into(), json!([n1.len(), n2.len()]));
    m.insert("imag_residual".into(), json!(residual));
    if let Some(c) = max_change {
        m.insert("doubling_change".into(), json!(c));
    }
    Ok(WignerSlice {
        plane: req.plane,
        fixed: req.fixed,
        grid,
        method: Method::Definition,
        ln_scale: 0.0,
        imag_residual: residual,
    })
}

/// What to do when the 2x-subsampled grid disagrees with the full grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinementPolicy {
    /// Fail with an accuracy error above [`REFINEMENT_TOL`].
    Enforce,
    /// Only report the change.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativityReport {
    pub value: f64,
    /// |n(full) - n(every other node)|, when both counts are odd.
    pub refinement_change: Option<f64>,
    /// Largest boundary |W| over the slice maximum.
    pub boundary_ratio: f64,
}

fn half_abs_integral(values: &[f64], n1: usize, n2: usize, stride: usize, h1: f64, h2: f64) -> f64 {
    let mut total = 0.0;
    let last1 = n1 - 1;
    let last2 = n2 - 1;
    for j in (0..n2).step_by(stride) {
        let wj = if j == 0 || j == last2 { 0.5 } else { 1.0 };
        let mut row = 0.0;
        for i in (0..n1).step_by(stride) {
            let wi = if i == 0 || i == last1 { 0.5 } else { 1.0 };
            row += wi * values[j * n1 + i].abs();
        }
        total += wj * row;
    }
    0.5 * total * h1 * h2 * stride as f64 * stride as f64
}

/// ½ ∬ |W| - 1 over the slice, by the 2-D trapezoid rule.
pub fn negativity_volume(slice: &WignerSlice) -> Result<f64> {
    negativity_volume_with(slice, RefinementPolicy::Enforce).map(|r| r.value)
}

pub fn negativity_volume_with(
    slice: &WignerSlice,
    policy: RefinementPolicy,
) -> Result<NegativityReport> {
    let g = &slice.grid;
    let (n1, n2) = (g.axis1.count, g.axis2.count);
    let max = slice.max_abs();
    if max.is_nan() || max <= 0.0 {
        return Err(Error::Accuracy("slice is identically zero".into()));
    }
    let mut edge = 0.0f64;
    for i in 0..n1 {
        edge = edge.max(g.get(i, 0).abs()).max(g.get(i, n2 - 1).abs());
    }
    for j in 0..n2 {
        edge = edge.max(g.get(0, j).abs()).max(g.get(n1 - 1, j).abs());
    }
    let boundary_ratio = edge / max;
    if boundary_ratio > BOUNDARY_TOL {
        return Err(Error::DomainTooSmall(format!(
            "boundary |W| is {boundary_ratio:e} of the slice maximum"
        )));
    }
    let scale = slice.ln_scale.exp();
    let (h1, h2) = (g.axis1.step(), g.axis2.step());
    let value = scale * half_abs_integral(&g.values, n1, n2, 1, h1, h2) - 1.0;
    let refinement_change = if n1 % 2 == 1 && n2 % 2 == 1 && n1 >= 5 && n2 >= 5 {
        let coarse = scale * half_abs_integral(&g.values, n1, n2, 2, h1, h2) - 1.0;
        Some((value - coarse).abs())
    } else {
        None
    };
    if let (RefinementPolicy::Enforce, Some(c)) = (policy, refinement_change) {
        if c > REFINEMENT_TOL {
            return Err(Error::Accuracy(format!(
                "negativity volume changed by {c:e} between the grid and its subsample"
            )));
        }
    }
    Ok(NegativityReport {
        value,
        refinement_change,
        boundary_ratio,
    })
}

/// Grid and quadrature for the x–p_y negativity slice at y = 0, p_x = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativitySettings {
    /// Half width in x; `None` means α + 6.
    pub x_extent: Option<f64>,
    pub p_extent: f64,
    pub grid: usize,
    pub refinement: RefinementPolicy,
    pub quad: DefinitionQuad,
}

impl Default for NegativitySettings {
    fn default() -> Self {
        NegativitySettings {
            x_extent: None,
            p_extent: 10.0,
            grid: 1025,
            refinement: RefinementPolicy::Enforce,
            quad: DefinitionQuad::default(),
        }
    }
}

impl NegativitySettings {
    pub fn request(&self, alpha: f64, method: Method) -> Result<SliceRequest> {
        let xe = self.x_extent.unwrap_or(alpha + 6.0);
        Ok(SliceRequest {
            plane: Plane::XPy,
            fixed: [0.0, 0.0],
            axis1: Axis::symmetric("x", xe, self.grid)?,
            axis2: Axis::symmetric("py", self.p_extent, self.grid)?,
            method,
            quad: self.quad,
        })
    }

    pub fn describe(&self, alpha: f64) -> Value {
        json!({
            "x_extent": self.x_extent.unwrap_or(alpha + 6.0),
            "p_extent": self.p_extent,
            "grid": self.grid,
            "refinement": match self.refinement {
                RefinementPolicy::Enforce => "enforce",
                RefinementPolicy::Report => "report",
            },
            "quadrature": self.quad.rule.describe(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativityEntry {
    pub charge: u32,
    pub n_value: Option<f64>,
    pub method: Method,
    pub refinement_change: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativityCurve {
    pub alpha: f64,
    pub settings: Value,
    pub entries: Vec<NegativityEntry>,
}

impl NegativityCurve {
    pub fn value(&self, q: u32) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.charge == q)
            .and_then(|e| e.n_value)
    }

    pub fn failures(&self) -> Vec<&NegativityEntry> {
        self.entries.iter().filter(|e| e.error.is_some()).collect()
    }
}

/// n(W) on the x–p_y slice at y = 0, p_x = 0 for each q in the range.
/// Failures are recorded per entry and do not stop the scan.
pub fn negativity_scan(
    cfg: &OpticalConfig,
    alpha: f64,
    q_min: u32,
    q_max: u32,
    method: Method,
    settings: &NegativitySettings,
) -> Result<NegativityCurve> {
    if q_min > q_max || q_max > SCAN_MAX_CHARGE {
        return Err(Error::InvalidArgument(format!(
            "charge range {q_min}..={q_max} must satisfy q_min <= q_max <= {SCAN_MAX_CHARGE}"
        )));
    }
    let mut entries = Vec::new();
    for q in q_min..=q_max {
        let spec = VortexSpec::new(alpha, q)?;
        let outcome = settings
            .request(alpha, method)
            .and_then(|req| wigner_slice(cfg, &spec, &req))
            .and_then(|slice| negativity_volume_with(&slice, settings.refinement));
        entries.push(match outcome {
            Ok(r) => NegativityEntry {
                charge: q,
                n_value: Some(r.value),
                method,
                refinement_change: r.refinement_change,
                error: None,
            },
            Err(e) => NegativityEntry {
                charge: q,
                n_value: None,
                method,
                refinement_change: None,
                error: Some(e.to_string()),
            },
        });
    }
    Ok(NegativityCurve {
        alpha,
        settings: settings.describe(alpha),
        entries,
    })
}
