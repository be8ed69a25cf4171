//! Jordan decomposition `V = V⁺ − V⁻` of valuations on sampled bodies.
//!
//! Two independent routes are provided. The ladder search evaluates
//! `V⁺(f) = sup{V(g) : 0 ≤ g ≤ f}` directly, restricting `g` to the
//! per-node ladder `gᵢ ∈ {0, fᵢ/L, …, fᵢ}`; it works for any valuation but
//! only at small scale. For profile valuations the closed form
//! `V⁺(K) = ∫ θ⁺(ρ_K) dm` with `θ⁺` the running maximum of `θ − θ(0)` is
//! used, and [`oracle_agreement`] checks the two against each other.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::{probe_rng, stream, Exec};
use crate::sphere_grid::SphereGrid;
use crate::star_body::{csv_string, RadialFunction};
use crate::theta::{ThetaCurve, ThetaDecomposition};
use crate::valuation::{RotationSpec, ValuationSpec};

pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 10_000_000;
const IMPROVEMENT_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Enumerates all `(L+1)^N` ladder functions; fails if that exceeds `budget`.
    Exhaustive { budget: u128 },
    /// Coordinate ascent over ladder levels from `restarts` starting points
    /// (at least two: `g = f` and `g = 0`, then seeded random ladders).
    Greedy { restarts: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchKind {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone)]
pub struct LadderSearchResult {
    pub value: f64,
    pub maximizer: RadialFunction,
    pub evaluations: u64,
    pub mode: SearchKind,
}

/// `(L+1)^N`, saturating.
pub fn ladder_size(nodes: usize, levels: u32) -> u128 {
    (0..nodes).try_fold(1u128, |acc, _| acc.checked_mul(levels as u128 + 1)).unwrap_or(u128::MAX)
}

pub fn sup_search(spec: &ValuationSpec, f: &RadialFunction, levels: u32, mode: SearchMode) -> Result<LadderSearchResult> {
    sup_search_with(spec, f, levels, mode, Exec::default())
}

/// Approximates `V⁺(f) = sup{V(g) : 0 ≤ g ≤ f}` over the proportional ladder.
///
/// Exhaustive enumeration is split by the level of node 0 and merged by
/// maximum; ties resolve to the lexicographically smallest level vector, so
/// the result does not depend on `exec`.
pub fn sup_search_with(spec: &ValuationSpec, f: &RadialFunction, levels: u32, mode: SearchMode, exec: Exec) -> Result<LadderSearchResult> {
    if levels < 1 {
        return Err(invalid("ladder needs at least one level"));
    }
    if f.sup_norm() > spec.lambda_max() {
        return Err(Error::Domain(format!("body radius {} exceeds λ_max = {}", f.sup_norm(), spec.lambda_max())));
    }
    let (value, best_levels, evaluations) = match mode {
        SearchMode::Exhaustive { budget } => {
            let required = ladder_size(f.values().len(), levels);
            if required > budget {
                return Err(Error::BudgetExceeded { required, budget });
            }
            exhaustive(spec, f, levels, exec)?
        }
        SearchMode::Greedy { restarts, seed } => greedy(spec, f, levels, restarts.max(2), seed, exec)?,
    };
    let maximizer = RadialFunction::from_raw(f.grid().clone(), ladder_values(f.values(), &best_levels, levels));
    let mode = match mode {
        SearchMode::Exhaustive { .. } => SearchKind::Exhaustive,
        SearchMode::Greedy { .. } => SearchKind::Greedy,
    };
    Ok(LadderSearchResult { value, maximizer, evaluations, mode })
}

fn ladder_values(f: &[f64], levels_at: &[u32], levels: u32) -> Vec<f64> {
    f.iter().zip(levels_at).map(|(v, &k)| v * (k as f64 / levels as f64)).collect()
}

fn exhaustive(spec: &ValuationSpec, f: &RadialFunction, levels: u32, exec: Exec) -> Result<(f64, Vec<u32>, u64)> {
    let grid = f.grid();
    let n = f.values().len();
    let steps: Vec<Vec<f64>> = f.values().iter().map(|v| (0..=levels).map(|k| v * (k as f64 / levels as f64)).collect()).collect();
    let parts = exec.try_map(levels as usize + 1, |lead| {
        let mut at = vec![0u32; n];
        at[0] = lead as u32;
        let mut g: Vec<f64> = at.iter().enumerate().map(|(i, &k)| steps[i][k as usize]).collect();
        let mut best = (f64::NEG_INFINITY, at.clone());
        let mut evals = 0u64;
        loop {
            let v = spec.evaluate_values(grid, &g)?;
            evals += 1;
            if v > best.0 {
                best = (v, at.clone());
            }
            // odometer over nodes 1..n, last node fastest
            let mut i = n;
            loop {
                i -= 1;
                if i == 0 {
                    return Ok::<_, Error>((best.0, best.1, evals));
                }
                if at[i] < levels {
                    at[i] += 1;
                    g[i] = steps[i][at[i] as usize];
                    break;
                }
                at[i] = 0;
                g[i] = steps[i][0];
            }
        }
    })?;
    let evaluations = parts.iter().map(|p| p.2).sum();
    let (value, best) = parts.into_iter().fold((f64::NEG_INFINITY, Vec::new()), |acc, (v, at, _)| if v > acc.0 { (v, at) } else { acc });
    Ok((value, best, evaluations))
}

fn greedy(spec: &ValuationSpec, f: &RadialFunction, levels: u32, restarts: usize, seed: u64, exec: Exec) -> Result<(f64, Vec<u32>, u64)> {
    let grid: &Arc<SphereGrid> = f.grid();
    let n = f.values().len();
    let runs = exec.try_map(restarts, |r| {
        let mut rng = probe_rng(seed, stream::GREEDY, r as u64);
        let mut at: Vec<u32> = match r {
            0 => vec![levels; n],
            1 => vec![0; n],
            _ => (0..n).map(|_| rng.random_range(0..=levels)).collect(),
        };
        let mut g = ladder_values(f.values(), &at, levels);
        let mut current = spec.evaluate_values(grid, &g)?;
        let mut evals = 1u64;
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..MAX_SWEEPS {
            order.shuffle(&mut rng);
            let mut improved = false;
            for &i in &order {
                let keep = at[i];
                let mut best = (current, keep);
                for k in (0..=levels).filter(|k| *k != keep) {
                    g[i] = f.values()[i] * (k as f64 / levels as f64);
                    let v = spec.evaluate_values(grid, &g)?;
                    evals += 1;
                    if v > best.0 + IMPROVEMENT_EPS {
                        best = (v, k);
                    }
                }
                at[i] = best.1;
                g[i] = f.values()[i] * (best.1 as f64 / levels as f64);
                if best.1 != keep {
                    current = best.0;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        Ok::<_, Error>((current, at, evals))
    })?;
    let evaluations = runs.iter().map(|r| r.2).sum();
    let (value, best) = runs.into_iter().fold((f64::NEG_INFINITY, Vec::new()), |acc, (v, at, _)| if v > acc.0 { (v, at) } else { acc });
    Ok((value, best, evaluations))
}

/// Tolerances for [`verify_decomposition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionTolerances {
    pub reconstruction: f64,
    pub positivity: f64,
    pub invariance: f64,
}

impl DecompositionTolerances {
    /// `1e-12` for exact curves, `1e-9` for sampled closed forms.
    pub fn for_curve(theta: &ThetaCurve) -> Self {
        DecompositionTolerances {
            reconstruction: if theta.is_piecewise_linear() { 1e-12 } else { 1e-9 },
            positivity: 1e-12,
            invariance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionFlags {
    pub reconstruction: bool,
    pub positivity: bool,
    pub origin: bool,
    pub invariance: bool,
}

impl DecompositionFlags {
    pub fn all(&self) -> bool {
        self.reconstruction && self.positivity && self.origin && self.invariance
    }
}

/// Outcome of [`verify_decomposition`].
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub theta: ThetaCurve,
    pub resolution: usize,
    pub theta_plus: ThetaCurve,
    pub theta_minus: ThetaCurve,
    pub offset: f64,
    pub bodies: usize,
    pub max_reconstruction_residual: f64,
    #[serde(rename = "min_Vplus")]
    pub min_v_plus: f64,
    #[serde(rename = "min_Vminus")]
    pub min_v_minus: f64,
    #[serde(rename = "Vplus_at_origin")]
    pub v_plus_at_origin: f64,
    #[serde(rename = "Vminus_at_origin")]
    pub v_minus_at_origin: f64,
    pub invariance_deviation: Option<f64>,
    pub tolerances: DecompositionTolerances,
    pub flags: DecompositionFlags,
}

impl DecompositionReport {
    pub fn passed(&self) -> bool {
        self.flags.all()
    }

    pub fn decomposition(&self) -> ThetaDecomposition {
        ThetaDecomposition { plus: self.theta_plus.clone(), minus: self.theta_minus.clone(), offset: self.offset }
    }
}

/// The valuation pair `(V⁺, V⁻)` built from a profile decomposition.
pub fn split_valuation(theta: &ThetaCurve, resolution: usize) -> Result<(ThetaDecomposition, ValuationSpec, ValuationSpec)> {
    let d = theta.decompose(resolution)?;
    let plus = ValuationSpec::theta(d.plus.clone());
    let minus = ValuationSpec::theta(d.minus.clone());
    Ok((d, plus, minus))
}

pub fn verify_decomposition(spec: &ValuationSpec, bodies: &[RadialFunction], rotations: Option<&[RotationSpec]>, resolution: usize) -> Result<DecompositionReport> {
    verify_decomposition_with(spec, bodies, rotations, resolution, Exec::default())
}

/// Builds `V⁺, V⁻` from the running-max decomposition and checks
/// `V⁺ − V⁻ = V − θ(0)`, positivity, vanishing at `{0}` and, when grid
/// rotations are supplied, invariance of `V`, `V⁺` and `V⁻`.
pub fn verify_decomposition_with(
    spec: &ValuationSpec,
    bodies: &[RadialFunction],
    rotations: Option<&[RotationSpec]>,
    resolution: usize,
    exec: Exec,
) -> Result<DecompositionReport> {
    let theta = spec
        .theta_curve()
        .ok_or_else(|| Error::Unsupported("decomposition verification needs a profile valuation; use sup_search for blackboxes".into()))?;
    let first = bodies.first().ok_or_else(|| invalid("no bodies supplied"))?;
    let (d, plus, minus) = split_valuation(theta, resolution)?;

    let per_body = exec.try_map(bodies.len(), |i| {
        let k = &bodies[i];
        let v = spec.evaluate(k)?;
        let vp = plus.evaluate(k)?;
        let vm = minus.evaluate(k)?;
        let residual = (vp - vm - (v - d.offset)).abs();
        let mut deviation = 0.0f64;
        for r in rotations.unwrap_or(&[]) {
            let rotated = match r {
                RotationSpec::GridSteps(s) => k.rotate_steps(*s)?,
                RotationSpec::Matrix(_) => {
                    return Err(Error::Unsupported("sampled bodies rotate by grid steps only; use a body generator for matrix rotations".into()))
                }
            };
            deviation = deviation
                .max((v - spec.evaluate(&rotated)?).abs())
                .max((vp - plus.evaluate(&rotated)?).abs())
                .max((vm - minus.evaluate(&rotated)?).abs());
        }
        Ok::<_, Error>((residual, vp, vm, deviation))
    })?;

    let origin = RadialFunction::origin(first.grid().clone());
    let v_plus_at_origin = plus.evaluate(&origin)?;
    let v_minus_at_origin = minus.evaluate(&origin)?;
    let max_reconstruction_residual = per_body.iter().map(|r| r.0).fold(0.0, f64::max);
    let min_v_plus = per_body.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let min_v_minus = per_body.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let invariance_deviation = rotations.map(|_| per_body.iter().map(|r| r.3).fold(0.0, f64::max));

    let tolerances = DecompositionTolerances::for_curve(theta);
    let flags = DecompositionFlags {
        reconstruction: max_reconstruction_residual <= tolerances.reconstruction,
        positivity: min_v_plus >= -tolerances.positivity && min_v_minus >= -tolerances.positivity,
        origin: v_plus_at_origin == 0.0 && v_minus_at_origin == 0.0,
        invariance: invariance_deviation.is_none_or(|d| d <= tolerances.invariance),
    };
    Ok(DecompositionReport {
        theta: theta.clone(),
        resolution,
        theta_plus: d.plus,
        theta_minus: d.minus,
        offset: d.offset,
        bodies: bodies.len(),
        max_reconstruction_residual,
        min_v_plus,
        min_v_minus,
        v_plus_at_origin,
        v_minus_at_origin,
        invariance_deviation,
        tolerances,
        flags,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub trial: usize,
    pub nodes: usize,
    pub levels: u32,
    pub ladder_sup: f64,
    /// `θ(0) + ∫ θ⁺∘f dm`.
    pub closed_form: f64,
    pub disagreement: f64,
    /// `Λ·‖f‖∞/L`, absent when the profile has no Lipschitz constant.
    pub bound: Option<f64>,
    pub within_bound: bool,
}

pub fn oracle_agreement(spec: &ValuationSpec, grid_sizes: &[usize], levels: u32, trials: usize, seed: u64, resolution: usize) -> Result<Vec<OracleRow>> {
    oracle_agreement_with(spec, grid_sizes, levels, trials, seed, resolution, Exec::default())
}

/// Compares the exhaustive ladder supremum with the closed form on random
/// bodies (node values i.i.d. uniform on `[0, λ_max]`) over circle grids of
/// the given sizes. Trials run in parallel; each search is sequential.
pub fn oracle_agreement_with(
    spec: &ValuationSpec,
    grid_sizes: &[usize],
    levels: u32,
    trials: usize,
    seed: u64,
    resolution: usize,
    exec: Exec,
) -> Result<Vec<OracleRow>> {
    let theta = spec.theta_curve().ok_or_else(|| Error::Unsupported("oracle agreement needs a profile valuation".into()))?;
    let (d, plus, _) = split_valuation(theta, resolution)?;
    let lipschitz = theta.lipschitz();
    let lmax = spec.lambda_max();
    let grids = grid_sizes.iter().map(|&n| SphereGrid::circle(n).map(Arc::new)).collect::<Result<Vec<_>>>()?;
    for g in &grids {
        let required = ladder_size(g.len(), levels);
        if required > DEFAULT_EXHAUSTIVE_BUDGET {
            return Err(Error::BudgetExceeded { required, budget: DEFAULT_EXHAUSTIVE_BUDGET });
        }
    }
    let jobs: Vec<(usize, usize)> = (0..grids.len()).flat_map(|gi| (0..trials).map(move |t| (gi, t))).collect();
    exec.try_map(jobs.len(), |j| {
        let (gi, trial) = jobs[j];
        let grid = &grids[gi];
        let mut rng = probe_rng(seed, stream::ORACLE, ((gi as u64) << 32) | trial as u64);
        let values: Vec<f64> = (0..grid.len()).map(|_| lmax * rng.random::<f64>()).collect();
        let f = RadialFunction::new(grid.clone(), values)?;
        let ladder = sup_search_with(spec, &f, levels, SearchMode::Exhaustive { budget: DEFAULT_EXHAUSTIVE_BUDGET }, Exec::Sequential)?;
        let closed_form = d.offset + plus.evaluate(&f)?;
        let disagreement = (ladder.value - closed_form).abs();
        let bound = lipschitz.map(|l| l * f.sup_norm() / levels as f64);
        Ok(OracleRow {
            trial,
            nodes: grid.len(),
            levels,
            ladder_sup: ladder.value,
            closed_form,
            disagreement,
            bound,
            within_bound: bound.is_none_or(|b| disagreement <= b + 1e-12),
        })
    })
}

/// CSV `trial,N,L,disagreement,bound`.
pub fn oracle_csv(rows: &[OracleRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["trial", "N", "L", "disagreement", "bound"])?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.nodes.to_string(),
            r.levels.to_string(),
            r.disagreement.to_string(),
            r.bound.map_or_else(String::new, |b| b.to_string()),
        ])?;
    }
    csv_string(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::star_body::BodyGenerator;
    use crate::theta::DEFAULT_RESOLUTION;
    use crate::valuation::{BodyModel, Blackbox};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn circle(n: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::circle(n).unwrap())
    }

    fn theta(desc: &str, domain: f64) -> ValuationSpec {
        ValuationSpec::theta(ThetaCurve::parse(desc, domain).unwrap())
    }

    const EXH: SearchMode = SearchMode::Exhaustive { budget: DEFAULT_EXHAUSTIVE_BUDGET };

    /// Plain nested-loop enumeration, independent of the odometer used by the search.
    fn brute_force(spec: &ValuationSpec, f: &RadialFunction, levels: u32) -> f64 {
        let n = f.values().len();
        let total = ladder_size(n, levels) as usize;
        (0..total)
            .map(|mut code| {
                let g: Vec<f64> = f
                    .values()
                    .iter()
                    .map(|v| {
                        let k = code % (levels as usize + 1);
                        code /= levels as usize + 1;
                        v * k as f64 / levels as f64
                    })
                    .collect();
                spec.evaluate(&RadialFunction::new(f.grid().clone(), g).unwrap()).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn monotone_valuation_takes_top() {
        let g = circle(5);
        let f = BodyModel::IidUniform.draw(&g, 2.0, 1, 0, 0);
        let spec = theta("power:1", 2.0);
        let r = sup_search(&spec, &f, 3, EXH).unwrap();
        assert_eq!(r.maximizer, f);
        assert_eq!(r.value, spec.evaluate(&f).unwrap());
        assert_eq!(r.evaluations, 4u64.pow(5));
        assert_eq!(r.mode, SearchKind::Exhaustive);
    }

    #[test]
    fn decreasing_valuation_takes_bottom() {
        let g = circle(5);
        let f = BodyModel::IidUniform.draw(&g, 2.0, 1, 0, 1);
        let r = sup_search(&theta("neg-power:1", 2.0), &f, 3, EXH).unwrap();
        assert!(r.maximizer.values().iter().all(|&v| v == 0.0));
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn exhaustive_matches_brute_force_and_closed_form() {
        let g = circle(6);
        let spec = theta("sine:1,1", TAU);
        let f = BodyGenerator::ball(2, TAU).unwrap().sample(&g).unwrap();
        let r = sup_search(&spec, &f, 4, EXH).unwrap();
        assert_eq!(r.value, brute_force(&spec, &f, 4));
        let (_, plus, _) = split_valuation(spec.theta_curve().unwrap(), DEFAULT_RESOLUTION).unwrap();
        let closed = plus.evaluate(&f).unwrap();
        assert!((r.value - closed).abs() <= 1.0 * TAU / 4.0);
        for v in r.maximizer.values() {
            assert!(*v >= 0.0 && *v <= TAU);
        }
    }

    #[test]
    fn exhaustive_budget() {
        let f = RadialFunction::ball(circle(10), 1.0).unwrap();
        let err = sup_search(&theta("power:1", 2.0), &f, 6, SearchMode::Exhaustive { budget: 1000 }).unwrap_err();
        assert_eq!(err, Error::BudgetExceeded { required: 7u128.pow(10), budget: 1000 });
        assert!(sup_search(&theta("power:1", 2.0), &f, 0, EXH).is_err());
    }

    #[test]
    fn exhaustive_modes_agree() {
        let g = circle(5);
        let spec = theta("sine:2,1", 3.0);
        let f = BodyModel::IidUniform.draw(&g, 3.0, 8, 0, 0);
        let a = sup_search_with(&spec, &f, 5, EXH, Exec::Sequential).unwrap();
        let b = sup_search_with(&spec, &f, 5, EXH, Exec::Parallel).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.maximizer, b.maximizer);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn greedy_below_exhaustive_and_above_endpoints() {
        let g = circle(6);
        let spec = theta("sine:2,1", 3.0);
        for i in 0..10 {
            let f = BodyModel::IidUniform.draw(&g, 3.0, 21, 0, i);
            let ex = sup_search(&spec, &f, 4, EXH).unwrap();
            let gr = sup_search(&spec, &f, 4, SearchMode::Greedy { restarts: 4, seed: i }).unwrap();
            assert_eq!(gr.mode, SearchKind::Greedy);
            assert!(gr.value <= ex.value + 1e-12);
            let top = spec.evaluate(&f).unwrap();
            let bottom = spec.evaluate(&RadialFunction::origin(g.clone())).unwrap();
            assert!(gr.value >= top.max(bottom) - 1e-15);
            // theta valuations separate over nodes, so coordinate ascent is exact
            assert_abs_diff_eq!(gr.value, ex.value, epsilon = 1e-12);
        }
    }

    #[test]
    fn greedy_on_blackbox() {
        let g = circle(4);
        let bb = ValuationSpec::Blackbox(Blackbox::new("max-minus-mean", 2.0, |f| {
            f.sup_norm() - f.values().iter().sum::<f64>() / f.values().len() as f64
        }));
        let f = RadialFunction::new(g, vec![2.0, 1.0, 0.5, 1.5]).unwrap();
        let ex = sup_search(&bb, &f, 2, EXH).unwrap();
        let gr = sup_search(&bb, &f, 2, SearchMode::Greedy { restarts: 6, seed: 0 }).unwrap();
        assert_abs_diff_eq!(ex.value, 1.5, epsilon = 1e-15);
        assert!(gr.value <= ex.value + 1e-12);
    }

    #[test]
    fn nested_ladders_monotone() {
        let g = circle(4);
        let spec = theta("sine:3,1", 3.0);
        let f = BodyModel::IidUniform.draw(&g, 3.0, 2, 0, 0);
        let coarse = sup_search(&spec, &f, 3, EXH).unwrap().value;
        let fine = sup_search(&spec, &f, 6, EXH).unwrap().value;
        assert!(fine >= coarse - 1e-12);
    }

    #[test]
    fn verify_power_two() {
        let g = circle(64);
        let spec = theta("power:2", 3.0);
        let bodies: Vec<_> = (0..20).map(|i| BodyModel::IidUniform.draw(&g, 3.0, 0, 0, i)).collect();
        let r = verify_decomposition(&spec, &bodies, None, 1000).unwrap();
        assert_eq!(r.min_v_minus, 0.0);
        assert!(r.max_reconstruction_residual <= 1e-12);
        assert!(r.passed());
        assert_eq!(r.invariance_deviation, None);
    }

    #[test]
    fn verify_sine_random_bodies() {
        let g = circle(128);
        let spec = theta("sine:1,1", TAU);
        let bodies: Vec<_> = (0..100).map(|i| BodyModel::IidUniform.draw(&g, TAU, 5, 0, i)).collect();
        let r = verify_decomposition(&spec, &bodies, Some(&[RotationSpec::GridSteps(3), RotationSpec::GridSteps(-40)]), DEFAULT_RESOLUTION).unwrap();
        assert!(r.max_reconstruction_residual <= 1e-9);
        assert!(r.min_v_plus >= -1e-12 && r.min_v_minus >= -1e-12);
        assert!(r.invariance_deviation.unwrap() <= 1e-12);
        assert!(r.passed(), "{:?}", r.flags);
    }

    #[test]
    fn verify_origin_only() {
        let g = circle(16);
        let r = verify_decomposition(&theta("sine:1,1", TAU), &[RadialFunction::origin(g)], None, 1000).unwrap();
        assert_eq!(r.v_plus_at_origin, 0.0);
        assert_eq!(r.v_minus_at_origin, 0.0);
        assert_eq!(r.max_reconstruction_residual, 0.0);
    }

    #[test]
    fn verify_rejects_blackbox_and_matrix_rotation() {
        let g = circle(8);
        let bb = ValuationSpec::Blackbox(Blackbox::new("sup", 2.0, |f| f.sup_norm()));
        let body = RadialFunction::ball(g, 1.0).unwrap();
        assert!(matches!(verify_decomposition(&bb, std::slice::from_ref(&body), None, 10), Err(Error::Unsupported(_))));
        let rot = [RotationSpec::Matrix(crate::star_body::Rotation::planar(0.1))];
        assert!(verify_decomposition(&theta("power:1", 2.0), &[body], Some(&rot), 10).is_err());
    }

    #[test]
    fn oracle_trivial_profiles() {
        for d in ["power:1", "neg-power:1"] {
            let rows = oracle_agreement(&theta(d, 2.0), &[4, 5], 3, 5, 1, 1000).unwrap();
            assert_eq!(rows.len(), 10);
            for r in rows {
                assert!(r.disagreement <= 1e-15, "{d}: {r:?}");
            }
        }
    }

    #[test]
    fn oracle_sine_within_bound() {
        let rows = oracle_agreement(&theta("sine:1,1", TAU), &[5], 6, 8, 3, DEFAULT_RESOLUTION).unwrap();
        assert!(rows.iter().all(|r| r.within_bound));
        let csv = oracle_csv(&rows).unwrap();
        assert!(csv.starts_with("trial,N,L,disagreement,bound\n0,5,6,"));
    }

    #[test]
    fn oracle_modes_agree() {
        let spec = theta("sine:2,1", 3.0);
        let a = oracle_agreement_with(&spec, &[4], 4, 6, 2, 10_000, Exec::Sequential).unwrap();
        let b = oracle_agreement_with(&spec, &[4], 4, 6, 2, 10_000, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
