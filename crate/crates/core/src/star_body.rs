//! Star bodies represented by their radial functions sampled on a grid, and
//! closed-form body generators that can be rotated exactly.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sphere_grid::{GridSpec, SphereGrid};

const ORTHO_TOL: f64 = 1e-10;

/// Sampled radial function `ρ_K ≥ 0`, one value per grid node.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl PartialEq for RadialFunction {
    fn eq(&self, other: &Self) -> bool {
        self.same_grid(other) && self.values == other.values
    }
}

impl RadialFunction {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid(format!("radial value at node {i} is {} (must be finite and >= 0)", values[i])));
        }
        Ok(RadialFunction { grid, values })
    }

    /// The body `{0}`.
    pub fn origin(grid: Arc<SphereGrid>) -> Self {
        let n = grid.len();
        RadialFunction { grid, values: vec![0.0; n] }
    }

    /// The ball `r·B_n`.
    pub fn ball(grid: Arc<SphereGrid>, r: f64) -> Result<Self> {
        let n = grid.len();
        RadialFunction::new(grid, vec![r; n])
    }

    pub(crate) fn from_raw(grid: Arc<SphereGrid>, values: Vec<f64>) -> Self {
        debug_assert!(values.len() == grid.len() && values.iter().all(|v| v.is_finite() && *v >= 0.0));
        RadialFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(*v))
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect();
        Ok(RadialFunction { grid: self.grid.clone(), values })
    }

    /// `ρ_{K∪L} = ρ_K ∨ ρ_L`.
    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, f64::max)
    }

    /// `ρ_{K∩L} = ρ_K ∧ ρ_L`.
    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, f64::min)
    }

    /// Radial sum `K +̃ L`.
    pub fn radial_sum(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Radial metric `δ(K, L) = ‖ρ_K − ρ_L‖∞` over the grid nodes.
    pub fn radial_metric(&self, other: &Self) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Pointwise product with a `[0, 1]`-valued weight.
    pub fn scaled_by(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.values.len() {
            return Err(invalid("weight count does not match grid"));
        }
        let values = self.values.iter().zip(weights).map(|(v, w)| v * w).collect();
        RadialFunction::new(self.grid.clone(), values)
    }

    /// Exact rotation of circle-grid samples by `steps` grid steps
    /// (value at node `i` becomes the old value at node `i − steps`).
    pub fn rotate_steps(&self, steps: i64) -> Result<Self> {
        if !self.grid.is_circle() {
            return Err(Error::Unsupported("sampled rotation requires a circle grid".into()));
        }
        let n = self.values.len() as i64;
        let shift = steps.rem_euclid(n) as usize;
        let mut values = self.values.clone();
        values.rotate_right(shift);
        Ok(RadialFunction { grid: self.grid.clone(), values })
    }

    /// Recovers `ρ_L(t) = sup{c ≥ 0 : ct ∈ L}` at every node by bisection on `[0, rmax]`.
    ///
    /// The returned value is the largest probed point known to be inside,
    /// so it lies within `tol` below the boundary.
    pub fn from_membership<F>(grid: Arc<SphereGrid>, oracle: F, rmax: f64, tol: f64) -> Result<Self>
    where
        F: Fn(&[f64]) -> bool,
    {
        if !(rmax > 0.0 && rmax.is_finite()) || !(tol > 0.0) {
            return Err(invalid("rmax and tol must be positive"));
        }
        let dim = grid.dim();
        if !oracle(&vec![0.0; dim]) {
            return Err(Error::NotStarSet);
        }
        let mut point = vec![0.0; dim];
        let mut values = Vec::with_capacity(grid.len());
        for (i, t) in grid.nodes().iter().enumerate() {
            let mut inside = |c: f64| {
                for (p, x) in point.iter_mut().zip(t) {
                    *p = c * x;
                }
                oracle(&point)
            };
            if inside(rmax) {
                return Err(Error::UnboundedBody { node: i });
            }
            let (mut lo, mut hi) = (0.0, rmax);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if inside(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            values.push(lo);
        }
        Ok(RadialFunction { grid, values })
    }

    /// Serializes as `{grid_ref, values}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&BodyJson::Sampled { grid_ref: self.grid.spec().to_string(), values: self.values.clone() })?)
    }

    /// CSV of `(angle, value)` on circle grids, `(node, value)` otherwise.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.grid.is_circle() {
            w.write_record(["angle", "value"])?;
        } else {
            w.write_record(["node", "value"])?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let key = self.grid.angle(i).map_or_else(|| i.to_string(), |a| a.to_string());
            w.write_record([key, v.to_string()])?;
        }
        csv_string(w)
    }
}

pub(crate) fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

/// Orthogonal `n×n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation(DMatrix<f64>);

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        Rotation(DMatrix::identity(dim, dim))
    }

    /// Checks orthogonality within `1e-10`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(invalid("rotation matrix must be square"));
        }
        let deviation = (m.transpose() * &m - DMatrix::<f64>::identity(m.nrows(), m.nrows())).amax();
        if deviation > ORTHO_TOL {
            return Err(Error::NotOrthogonal { deviation });
        }
        Ok(Rotation(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("rotation rows must form a square matrix"));
        }
        Rotation::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Planar rotation by `angle`.
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    /// Rotation by `angle` about coordinate axis `axis` in `R^3`.
    pub fn about_axis(axis: usize, angle: f64) -> Result<Self> {
        if axis > 2 {
            return Err(invalid("axis must be 0, 1 or 2"));
        }
        let (s, c) = angle.sin_cos();
        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
        let mut m = DMatrix::identity(3, 3);
        m[(a, a)] = c;
        m[(a, b)] = -s;
        m[(b, a)] = s;
        m[(b, b)] = c;
        Ok(Rotation(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.0.row(i).iter().copied().collect()).collect()
    }

    pub fn then(&self, outer: &Rotation) -> Rotation {
        Rotation(&outer.0 * &self.0)
    }

    /// `R⁻¹·t = Rᵀ·t`.
    fn apply_inverse(&self, t: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|j| (0..n).map(|i| self.0[(i, j)] * t[i]).sum()).collect()
    }
}

impl Serialize for Rotation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rotation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Rotation::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// One harmonic of a trigonometric blob.
///
/// In the plane the term is `cos_coef·cos(mφ) + sin_coef·sin(mφ)` with
/// `m = azimuthal`. On `S^2` it is
/// `cos(l·ϑ)·sin(ϑ)^m·(cos_coef·cos(mφ) + sin_coef·sin(mφ))` with polar
/// angle `ϑ`, `l = polar`, `m = azimuthal`; the `sin^m` factor keeps it
/// continuous at the poles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    #[serde(default)]
    pub polar: u32,
    pub azimuthal: u32,
    pub cos_coef: f64,
    #[serde(default)]
    pub sin_coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Origin { dim: usize },
    Ball { dim: usize, radius: f64 },
    Ellipsoid { semi_axes: Vec<f64> },
    /// `max(floor, constant + Σ terms)`.
    TrigBlob { dim: usize, constant: f64, terms: Vec<TrigTerm>, floor: f64 },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Origin { dim } | Shape::Ball { dim, .. } | Shape::TrigBlob { dim, .. } => *dim,
            Shape::Ellipsoid { semi_axes } => semi_axes.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim() < 2 {
            return Err(invalid("body dimension must be at least 2"));
        }
        match self {
            Shape::Origin { .. } => Ok(()),
            Shape::Ball { radius, .. } if radius.is_finite() && *radius >= 0.0 => Ok(()),
            Shape::Ball { radius, .. } => Err(invalid(format!("ball radius {radius} must be finite and >= 0"))),
            Shape::Ellipsoid { semi_axes } if semi_axes.iter().all(|a| a.is_finite() && *a > 0.0) => Ok(()),
            Shape::Ellipsoid { .. } => Err(invalid("ellipsoid semi-axes must be positive")),
            Shape::TrigBlob { dim, floor, constant, terms } => {
                if *dim > 3 {
                    return Err(invalid("trig blobs are defined for n = 2 and n = 3"));
                }
                if !(floor.is_finite() && *floor >= 0.0) || !constant.is_finite() {
                    return Err(invalid("trig blob floor must be finite and >= 0"));
                }
                if *dim == 2 && terms.iter().any(|t| t.polar != 0) {
                    return Err(invalid("planar trig blob terms cannot have a polar index"));
                }
                if terms.iter().any(|t| !t.cos_coef.is_finite() || !t.sin_coef.is_finite()) {
                    return Err(invalid("trig blob coefficients must be finite"));
                }
                Ok(())
            }
        }
    }

    /// Radial function at the unit vector `u` in the body frame.
    fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Shape::Origin { .. } => 0.0,
            Shape::Ball { radius, .. } => *radius,
            Shape::Ellipsoid { semi_axes } => {
                let q: f64 = u.iter().zip(semi_axes).map(|(x, a)| (x / a) * (x / a)).sum();
                1.0 / q.sqrt()
            }
            Shape::TrigBlob { dim, constant, terms, floor } => {
                let phi = u[1].atan2(u[0]);
                let raw = if *dim == 2 {
                    constant
                        + terms
                            .iter()
                            .map(|t| {
                                let m = t.azimuthal as f64;
                                t.cos_coef * (m * phi).cos() + t.sin_coef * (m * phi).sin()
                            })
                            .sum::<f64>()
                } else {
                    let polar = u[2].clamp(-1.0, 1.0).acos();
                    let sin_polar = (u[0] * u[0] + u[1] * u[1]).sqrt();
                    constant
                        + terms
                            .iter()
                            .map(|t| {
                                let m = t.azimuthal as f64;
                                let radial = (t.polar as f64 * polar).cos() * sin_polar.powi(t.azimuthal as i32);
                                radial * (t.cos_coef * (m * phi).cos() + t.sin_coef * (m * phi).sin())
                            })
                            .sum::<f64>()
                };
                raw.max(*floor)
            }
        }
    }
}

/// Closed-form radial function with an exact rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyGenerator {
    pub shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation: Option<Rotation>,
}

impl BodyGenerator {
    pub fn new(shape: Shape) -> Result<Self> {
        shape.validate()?;
        Ok(BodyGenerator { shape, rotation: None })
    }

    pub fn origin(dim: usize) -> Result<Self> {
        Self::new(Shape::Origin { dim })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::new(Shape::Ball { dim, radius })
    }

    pub fn ellipsoid(semi_axes: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Ellipsoid { semi_axes })
    }

    /// Planar blob `max(floor, constant + Σ_m a_m cos(mφ) + b_m sin(mφ))`,
    /// harmonics given as `(m, a_m, b_m)`.
    pub fn trig_blob_2d(constant: f64, harmonics: &[(u32, f64, f64)], floor: f64) -> Result<Self> {
        let terms = harmonics
            .iter()
            .map(|&(m, a, b)| TrigTerm { polar: 0, azimuthal: m, cos_coef: a, sin_coef: b })
            .collect();
        Self::new(Shape::TrigBlob { dim: 2, constant, terms, floor })
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation.clone().unwrap_or_else(|| Rotation::identity(self.dim()))
    }

    /// Evaluates `ρ(R⁻¹·t)` at a unit vector `t`.
    pub fn eval(&self, t: &[f64]) -> f64 {
        match &self.rotation {
            None => self.shape.eval(t),
            Some(r) => self.shape.eval(&r.apply_inverse(t)),
        }
    }

    /// Composes `r` after the current rotation.
    pub fn rotate(&self, r: &Rotation) -> Result<Self> {
        if r.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: r.dim() });
        }
        Ok(BodyGenerator { shape: self.shape.clone(), rotation: Some(self.rotation().then(r)) })
    }

    pub fn sample(&self, grid: &Arc<SphereGrid>) -> Result<RadialFunction> {
        if grid.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: self.dim() });
        }
        let values = grid.nodes().iter().map(|t| self.eval(t).max(0.0)).collect();
        RadialFunction::new(grid.clone(), values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&BodyJson::Generator { generator: self.clone() })?)
    }
}

/// Wire format for bodies: `{generator: {...}}` or `{grid_ref, values}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BodyJson {
    Generator { generator: BodyGenerator },
    Sampled { grid_ref: String, values: Vec<f64> },
}

impl BodyJson {
    /// Resolves to samples on `grid`; sampled bodies must reference the same grid.
    pub fn resolve(&self, grid: &Arc<SphereGrid>) -> Result<RadialFunction> {
        match self {
            BodyJson::Generator { generator } => {
                generator.shape.validate()?;
                generator.sample(grid)
            }
            BodyJson::Sampled { grid_ref, values } => {
                let spec: GridSpec = grid_ref.parse()?;
                if spec != grid.spec() {
                    return Err(Error::GridMismatch);
                }
                RadialFunction::new(grid.clone(), values.clone())
            }
        }
    }
}

/// The angle `2π·steps/n` of a grid-step rotation.
pub fn grid_step_angle(steps: i64, n: usize) -> f64 {
    2.0 * PI * steps as f64 / n as f64
}
