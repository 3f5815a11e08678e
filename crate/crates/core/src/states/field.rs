use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{
    derive_scales, BgVortex, OpticalConfig, PerfectVortex, StateFamily, TwoModeAmplitude,
    VortexSpec,
};
use crate::error::{Error, Result};

/// A uniformly sampled axis including both end points.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(label: impl Into<String>, min: f64, max: f64, count: usize) -> Result<Self> {
        let label = label.into();
        if count < 2 {
            return Err(Error::InvalidArgument(format!(
                "axis {label} needs at least 2 points, got {count}"
            )));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::InvalidArgument(format!(
                "axis {label} has invalid range [{min}, {max}]"
            )));
        }
        Ok(Axis {
            label,
            min,
            max,
            count,
        })
    }

    /// Symmetric axis [-extent, extent].
    pub fn symmetric(label: impl Into<String>, extent: f64, count: usize) -> Result<Self> {
        Axis::new(label, -extent, extent, count)
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + self.step() * i as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Row-major grid: `values[row * axis1.count + col]`, where the row index
/// runs along `axis2` and the column index along `axis1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D<T> {
    pub axis1: Axis,
    pub axis2: Axis,
    pub values: Vec<T>,
    pub meta: BTreeMap<String, Value>,
}

pub type ComplexField2D = Field2D<Complex64>;
pub type RealField2D = Field2D<f64>;

impl<T: Copy> Field2D<T> {
    pub fn new(axis1: Axis, axis2: Axis, values: Vec<T>) -> Result<Self> {
        if values.len() != axis1.count * axis2.count {
            return Err(Error::InvalidArgument(format!(
                "grid has {} values, expected {} x {}",
                values.len(),
                axis1.count,
                axis2.count
            )));
        }
        Ok(Field2D {
            axis1,
            axis2,
            values,
            meta: BTreeMap::new(),
        })
    }

    /// Value at column `i` (axis1) and row `j` (axis2).
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[j * self.axis1.count + i]
    }

    /// Fills the grid in parallel over rows; the result does not depend on
    /// scheduling. Errors carry the (row, col) of the first failure.
    pub fn try_fill<F>(axis1: Axis, axis2: Axis, f: F) -> Result<Self>
    where
        T: Send,
        F: Fn(f64, f64) -> Result<T> + Sync,
    {
        let xs = axis1.values();
        let ys = axis2.values();
        let rows: Vec<Result<Vec<T>>> = ys
            .par_iter()
            .enumerate()
            .map(|(j, &y)| {
                xs.iter()
                    .enumerate()
                    .map(|(i, &x)| f(x, y).map_err(|e| e.at(j, i)))
                    .collect()
            })
            .collect();
        let mut values = Vec::with_capacity(xs.len() * ys.len());
        for row in rows {
            values.extend(row?);
        }
        Field2D::new(axis1, axis2, values)
    }

    pub fn map<U: Copy, F: Fn(T) -> U>(&self, f: F) -> Field2D<U> {
        Field2D {
            axis1: self.axis1.clone(),
            axis2: self.axis2.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            meta: self.meta.clone(),
        }
    }
}

impl RealField2D {
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates a state's quadrature amplitude on a grid of dimensionless
/// coordinates. Perfect-vortex values are scaled by sigma so the field is
/// normalised over the dimensionless plane.
pub fn amplitude_grid(
    family: StateFamily,
    cfg: &OpticalConfig,
    spec: &VortexSpec,
    axis1: Axis,
    axis2: Axis,
) -> Result<ComplexField2D> {
    if axis1.count < 16 || axis2.count < 16 {
        return Err(Error::InvalidArgument(format!(
            "amplitude grids need at least 16 points per axis, got {} x {}",
            axis1.count, axis2.count
        )));
    }
    let scales = derive_scales(cfg, spec)?;
    let state: Box<dyn TwoModeAmplitude> = match family {
        StateFamily::Perfect => Box::new(PerfectVortex::new(spec)?),
        StateFamily::Bg => Box::new(BgVortex::new(spec)?),
    };
    let mut field = ComplexField2D::try_fill(axis1, axis2, |x, y| {
        let v = state.amplitude(x, y);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Accuracy(format!(
                "non-finite amplitude at ({x}, {y})"
            )))
        }
    })?;
    let m = &mut field.meta;
    m.insert("state".into(), json!(family.as_str()));
    m.insert("q".into(), json!(spec.charge));
    m.insert("alpha".into(), json!(spec.alpha));
    m.insert("wavelength_m".into(), json!(cfg.wavelength));
    m.insert("focal_length_m".into(), json!(cfg.focal_length));
    m.insert("sigma_m".into(), json!(scales.sigma));
    m.insert("r_core_m".into(), json!(scales.r_core));
    m.insert(
        "units".into(),
        json!(match family {
            StateFamily::Perfect => "axes in sigma; amplitude in 1/sigma",
            StateFamily::Bg => "dimensionless input-plane quadratures",
        }),
    );
    Ok(field)
}
