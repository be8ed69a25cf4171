//! Valuations on sampled star bodies and executable checks of the valuation
//! axioms: the inclusion-exclusion identity, the profile representation
//! `θ(λ) = V(λ·B)`, rotational invariance, boundedness on bounded sets and
//! continuity in the radial metric.
//!
//! The checks that draw random bodies use per-probe seeds
//! ([`crate::exec::derive_seed`]) so their output does not depend on the
//! execution mode.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::{probe_rng, stream, Exec};
use crate::sphere_grid::SphereGrid;
use crate::star_body::{BodyGenerator, RadialFunction, Rotation};
use crate::theta::ThetaCurve;

type EvalFn = dyn Fn(&RadialFunction) -> f64 + Send + Sync;

/// Opaque functional on sampled bodies with a declared radius bound.
#[derive(Clone)]
pub struct Blackbox {
    name: String,
    lambda_max: f64,
    eval: Arc<EvalFn>,
}

impl Blackbox {
    pub fn new(name: impl Into<String>, lambda_max: f64, eval: impl Fn(&RadialFunction) -> f64 + Send + Sync + 'static) -> Self {
        Blackbox { name: name.into(), lambda_max, eval: Arc::new(eval) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for Blackbox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Blackbox").field("name", &self.name).field("lambda_max", &self.lambda_max).finish()
    }
}

#[derive(Debug, Clone)]
pub enum ValuationSpec {
    /// `V(K) = ∫ θ(ρ_K(t)) dm(t)`.
    Theta(ThetaCurve),
    Blackbox(Blackbox),
}

/// A rotation usable by the invariance checks.
#[derive(Debug, Clone, PartialEq)]
pub enum RotationSpec {
    /// Arbitrary orthogonal matrix, applied exactly through a body generator.
    Matrix(Rotation),
    /// Cyclic shift by whole grid steps (circle grids only), an exact permutation of samples.
    GridSteps(i64),
}

impl ValuationSpec {
    pub fn theta(curve: ThetaCurve) -> Self {
        ValuationSpec::Theta(curve)
    }

    pub fn lambda_max(&self) -> f64 {
        match self {
            ValuationSpec::Theta(c) => c.domain_max(),
            ValuationSpec::Blackbox(b) => b.lambda_max,
        }
    }

    pub fn theta_curve(&self) -> Option<&ThetaCurve> {
        match self {
            ValuationSpec::Theta(c) => Some(c),
            ValuationSpec::Blackbox(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            ValuationSpec::Theta(c) => c.to_string(),
            ValuationSpec::Blackbox(b) => b.name.clone(),
        }
    }

    /// `V(K)`; bodies reaching beyond `λ_max` are a domain error.
    pub fn evaluate(&self, body: &RadialFunction) -> Result<f64> {
        let sup = body.sup_norm();
        if sup > self.lambda_max() {
            return Err(Error::Domain(format!("body radius {sup} exceeds λ_max = {}", self.lambda_max())));
        }
        match self {
            ValuationSpec::Theta(c) => Ok(body.grid().integrate_unchecked(body.values().iter().map(|v| c.eval_unchecked(*v)))),
            ValuationSpec::Blackbox(b) => {
                let v = (b.eval)(body);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Domain(format!("blackbox {} returned {v}", b.name)))
                }
            }
        }
    }

    /// Evaluates on raw values already known to lie in `[0, λ_max]`.
    pub(crate) fn evaluate_values(&self, grid: &Arc<SphereGrid>, values: &[f64]) -> Result<f64> {
        match self {
            ValuationSpec::Theta(c) => Ok(grid.integrate_unchecked(values.iter().map(|v| c.eval_unchecked(*v)))),
            ValuationSpec::Blackbox(_) => self.evaluate(&RadialFunction::from_raw(grid.clone(), values.to_vec())),
        }
    }

    /// `V(K∪L) + V(K∩L) − V(K) − V(L)`.
    pub fn valuation_residual(&self, k: &RadialFunction, l: &RadialFunction) -> Result<f64> {
        let union = k.union(l)?;
        let inter = k.intersection(l)?;
        Ok((self.evaluate(&union)? + self.evaluate(&inter)?) - (self.evaluate(k)? + self.evaluate(l)?))
    }

    /// Recovers the profile `λ ↦ V(λ·B)` at the given radii as a piecewise-linear curve.
    pub fn extract_theta(&self, grid: &Arc<SphereGrid>, lambdas: &[f64]) -> Result<ThetaCurve> {
        if lambdas.len() < 2 || lambdas[0] != 0.0 {
            return Err(invalid("λ samples must start at 0 and contain at least two values"));
        }
        if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("λ samples must be strictly increasing"));
        }
        let ys = lambdas
            .iter()
            .map(|&l| self.evaluate(&RadialFunction::ball(grid.clone(), l)?))
            .collect::<Result<Vec<_>>>()?;
        ThetaCurve::piecewise_linear(lambdas.to_vec(), ys)
    }

    /// `max_R |V(K) − V(R·K)|` for `K = gen` sampled on `grid`.
    pub fn check_rotational_invariance(&self, gen: &BodyGenerator, rotations: &[RotationSpec], grid: &Arc<SphereGrid>) -> Result<f64> {
        let base = gen.sample(grid)?;
        let v0 = self.evaluate(&base)?;
        let mut worst = 0.0f64;
        for r in rotations {
            let rotated = match r {
                RotationSpec::Matrix(m) => gen.rotate(m)?.sample(grid)?,
                RotationSpec::GridSteps(k) => base.rotate_steps(*k)?,
            };
            worst = worst.max((v0 - self.evaluate(&rotated)?).abs());
        }
        Ok(worst)
    }

    pub fn check_bounded_on_bounded(&self, grid: &Arc<SphereGrid>, lambda: f64, trials: usize, seed: u64, model: BodyModel) -> Result<BoundednessReport> {
        self.check_bounded_on_bounded_with(grid, lambda, trials, seed, model, Exec::default())
    }

    /// Largest `|V|` over `trials` seeded random bodies inside `λ·B`; theta
    /// valuations also report the analytic bound `max_{[0,λ]} |θ|`.
    pub fn check_bounded_on_bounded_with(
        &self,
        grid: &Arc<SphereGrid>,
        lambda: f64,
        trials: usize,
        seed: u64,
        model: BodyModel,
        exec: Exec,
    ) -> Result<BoundednessReport> {
        if !(lambda >= 0.0 && lambda <= self.lambda_max()) {
            return Err(Error::Domain(format!("λ = {lambda} outside [0, {}]", self.lambda_max())));
        }
        let values = exec.try_map(trials, |i| {
            let body = model.draw(grid, lambda, seed, stream::BOUNDED, i as u64);
            self.evaluate(&body).map(f64::abs)
        })?;
        let empirical_max = values.into_iter().fold(0.0, f64::max);
        let analytic_bound = self.theta_curve().map(|c| c.sup_abs(lambda)).transpose()?;
        Ok(BoundednessReport { lambda, trials, seed, model, empirical_max, analytic_bound })
    }

    pub fn check_continuity(&self, body: &RadialFunction, deltas: &[f64], probes: usize, seed: u64) -> Result<Vec<ContinuityRow>> {
        self.check_continuity_with(body, deltas, probes, seed, Exec::default())
    }

    /// Empirical modulus of continuity at `body`: for each `δ`, the largest
    /// `|V(K) − V(K')|` over random perturbations with `δ(K, K') ≤ δ`
    /// (perturbed values clamped at 0).
    pub fn check_continuity_with(&self, body: &RadialFunction, deltas: &[f64], probes: usize, seed: u64, exec: Exec) -> Result<Vec<ContinuityRow>> {
        if deltas.iter().any(|d| !(*d >= 0.0)) {
            return Err(invalid("deltas must be nonnegative"));
        }
        let base = self.evaluate(body)?;
        let lipschitz = self.theta_curve().and_then(|c| c.lipschitz());
        deltas
            .iter()
            .enumerate()
            .map(|(di, &delta)| {
                let devs = exec.try_map(probes, |p| {
                    let mut rng = probe_rng(seed, stream::CONTINUITY, ((di as u64) << 32) | p as u64);
                    let values: Vec<f64> = body.values().iter().map(|v| (v + delta * rng.random_range(-1.0..=1.0)).max(0.0)).collect();
                    let probe = RadialFunction::new(body.grid().clone(), values)?;
                    Ok::<_, Error>((self.evaluate(&probe)? - base).abs())
                })?;
                Ok(ContinuityRow {
                    delta,
                    max_deviation: devs.into_iter().fold(0.0, f64::max),
                    lipschitz_envelope: lipschitz.map(|l| l * delta),
                })
            })
            .collect()
    }
}

/// Random body family used by the boundedness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BodyModel {
    /// Node values i.i.d. uniform on `[0, λ]`.
    #[default]
    IidUniform,
    /// `λ·clamp(c + a·t + tᵀBt, 0, 1)` with random coefficients: continuous and smooth away from the clamp.
    SmoothQuadratic,
}

impl BodyModel {
    pub fn draw(&self, grid: &Arc<SphereGrid>, lambda: f64, seed: u64, stream: u64, index: u64) -> RadialFunction {
        let mut rng = probe_rng(seed, stream, index);
        let values = match self {
            BodyModel::IidUniform => (0..grid.len()).map(|_| lambda * rng.random::<f64>()).collect(),
            BodyModel::SmoothQuadratic => {
                let n = grid.dim();
                let c: f64 = rng.random_range(0.0..=1.0);
                let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let b: Vec<f64> = (0..n * n).map(|_| rng.random_range(-0.5..=0.5)).collect();
                grid.nodes()
                    .iter()
                    .map(|t| {
                        let lin: f64 = a.iter().zip(t).map(|(x, y)| x * y).sum();
                        let quad: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| b[i * n + j] * t[i] * t[j]).sum();
                        lambda * (c + lin + quad).clamp(0.0, 1.0)
                    })
                    .collect()
            }
        };
        RadialFunction::from_raw(grid.clone(), values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub lambda: f64,
    pub trials: usize,
    pub seed: u64,
    pub model: BodyModel,
    pub empirical_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub delta: f64,
    pub max_deviation: f64,
    /// `Λ·δ` when the profile has a Lipschitz constant `Λ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz_envelope: Option<f64>,
}
