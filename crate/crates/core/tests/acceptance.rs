//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use starval::exec::stream;
use starval::theta::DEFAULT_RESOLUTION;
use starval::{
    oracle_agreement, partition_of_unity, rim_decay_profile, verify_decomposition, BodyGenerator, BodyModel, NodeSet, RadialFunction,
    RotationSpec, SphereGrid, ThetaCurve, ValuationSpec,
};

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn circle(n: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::circle(n).expect("circle grid"))
}

fn theta(c: ThetaCurve) -> ValuationSpec {
    ValuationSpec::theta(c)
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (elapsed < limit, format!("{:.3} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs_f64()))
}

fn valuation_identity() -> Outcome {
    let start = Instant::now();
    let grid = circle(256);
    let curves = [
        ThetaCurve::power(1.0, TAU).unwrap(),
        ThetaCurve::power(2.0, TAU).unwrap(),
        ThetaCurve::sine(1.0, 1.0, TAU).unwrap(),
    ];
    let mut worst = 0.0f64;
    for c in curves {
        let v = theta(c);
        for i in 0..100u64 {
            let k = BodyModel::IidUniform.draw(&grid, TAU, SEED, stream::BODIES, 2 * i);
            let l = BodyModel::IidUniform.draw(&grid, TAU, SEED, stream::BODIES, 2 * i + 1);
            let scale = 1.0 + v.evaluate(&k).unwrap().abs() + v.evaluate(&l).unwrap().abs();
            worst = worst.max(v.valuation_residual(&k, &l).unwrap().abs() / scale);
        }
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(1));
    Outcome { passed: worst <= 1e-12 && fast, detail: format!("max scaled residual {worst:.3e} (tol 1e-12), {time}") }
}

fn representation_exactness() -> Outcome {
    let start = Instant::now();
    let grid = circle(256);
    let d = 3.0;
    let presets = [
        ThetaCurve::parse("power:1", d).unwrap(),
        ThetaCurve::parse("power:2", d).unwrap(),
        ThetaCurve::parse("neg-power:1", d).unwrap(),
        ThetaCurve::parse("sine:1,1", d).unwrap(),
        ThetaCurve::parse("poly:0.5,-1,0.25", d).unwrap(),
        ThetaCurve::parse("pwl:0,0,1,2,2,-1,3,0.5", d).unwrap(),
    ];
    let lambdas: Vec<f64> = (0..50).map(|k| d * k as f64 / 49.0).collect();
    let mut worst = 0.0f64;
    for c in &presets {
        let extracted = theta(c.clone()).extract_theta(&grid, &lambdas).unwrap();
        for &l in &lambdas {
            worst = worst.max((extracted.eval(l).unwrap() - c.eval(l).unwrap()).abs());
        }
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(1));
    Outcome {
        passed: worst <= 1e-12 && fast,
        detail: format!("{} curves x 50 radii, max |extracted - theta| {worst:.3e} (tol 1e-12), {time}", presets.len()),
    }
}

fn quadrature_convergence() -> Outcome {
    let v = theta(ThetaCurve::power(2.0, 2.0).unwrap());
    let ellipse = BodyGenerator::ellipsoid(vec![2.0, 1.0]).unwrap();
    let error = |n: usize| (v.evaluate(&ellipse.sample(&circle(n)).unwrap()).unwrap() - 2.0).abs();
    let sizes = [128usize, 256, 512, 1024, 2048];
    let errors: Vec<f64> = sizes.iter().map(|&n| error(n)).collect();
    let at_2048 = errors[errors.len() - 1];
    // the trapezoid rule is geometrically convergent here and reaches 0 by N=128,
    // so strict decrease is observed on the coarse grids leading up to it
    let decreasing = errors.windows(2).all(|w| w[1] <= w[0]);
    let coarse: Vec<f64> = [8usize, 16, 32, 64].iter().map(|&n| error(n)).collect();
    let coarse_strict = coarse.windows(2).all(|w| w[1] < w[0]);
    let listing: Vec<String> = [8usize, 16, 32, 64]
        .iter()
        .chain(&sizes)
        .zip(coarse.iter().chain(&errors))
        .map(|(n, e)| format!("N={n}: {e:.2e}"))
        .collect();
    Outcome {
        passed: at_2048 <= 1e-6 && decreasing && coarse_strict,
        detail: format!(
            "errors {} (tol 1e-6 at N=2048; nonincreasing 128..2048: {decreasing}; strictly decreasing 8..64: {coarse_strict})",
            listing.join(", ")
        ),
    }
}

fn jordan_decomposition() -> Outcome {
    let start = Instant::now();
    let sine = ThetaCurve::sine(1.0, 1.0, TAU).unwrap();
    let d = sine.decompose(DEFAULT_RESOLUTION).unwrap();
    let checks = 200_001;
    let mut min_part = f64::INFINITY;
    let mut monotone = true;
    let mut prev = f64::NEG_INFINITY;
    for j in 0..checks {
        let l = TAU * j as f64 / (checks - 1) as f64;
        let p = d.plus.eval(l).unwrap();
        let m = d.minus.eval(l).unwrap();
        min_part = min_part.min(p).min(m);
        monotone &= p >= prev;
        prev = p;
    }
    let origin = d.plus.eval(0.0).unwrap() == 0.0 && d.minus.eval(0.0).unwrap() == 0.0;
    let grid = circle(256);
    let bodies: Vec<RadialFunction> = (0..1000).map(|i| BodyModel::IidUniform.draw(&grid, TAU, SEED, stream::BODIES, i)).collect();
    let report = verify_decomposition(&theta(sine), &bodies, None, DEFAULT_RESOLUTION).unwrap();
    let residual = report.max_reconstruction_residual;
    let (fast, time) = within(start.elapsed(), Duration::from_secs(5));
    Outcome {
        passed: min_part >= -1e-12 && monotone && origin && residual <= 1e-9 && fast,
        detail: format!(
            "min(theta+, theta-) {min_part:.3e}, theta+ nondecreasing: {monotone}, zero at 0: {origin}, max residual over 1000 bodies {residual:.3e} (tol 1e-9), {time}"
        ),
    }
}

fn sup_oracle_agreement() -> Outcome {
    let start = Instant::now();
    let sine = ThetaCurve::sine(1.0, 1.0, TAU).unwrap();
    let rows = oracle_agreement(&theta(sine), &[6], 8, 50, SEED, DEFAULT_RESOLUTION).unwrap();
    let mut all_within = rows.len() == 50;
    let mut worst_ratio = 0.0f64;
    for r in &rows {
        let bound = r.bound.expect("sine has a Lipschitz constant");
        all_within &= r.disagreement <= bound && r.nodes == 6 && r.levels == 8;
        worst_ratio = worst_ratio.max(r.disagreement / bound);
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(120));
    Outcome {
        passed: all_within && fast,
        detail: format!("{} trials on N=6, L=8; worst disagreement/bound {worst_ratio:.3}; {time}", rows.len()),
    }
}

fn positivity_and_origin() -> Outcome {
    let grid = circle(256);
    let curves = [
        ThetaCurve::sine(1.0, 1.0, TAU).unwrap(),
        ThetaCurve::sine(3.0, -2.0, TAU).unwrap(),
        ThetaCurve::power(2.0, TAU).unwrap(),
        ThetaCurve::neg_power(1.5, TAU).unwrap(),
        ThetaCurve::polynomial(vec![1.0, -2.0, 0.5], TAU).unwrap(),
        ThetaCurve::piecewise_linear(vec![0.0, 1.0, 2.0, 4.0, TAU], vec![0.0, 2.0, -1.0, 3.0, 0.0]).unwrap(),
    ];
    let mut bodies: Vec<RadialFunction> = (0..200).map(|i| BodyModel::IidUniform.draw(&grid, TAU, SEED, stream::BODIES, i)).collect();
    bodies.extend((0..200).map(|i| BodyModel::SmoothQuadratic.draw(&grid, TAU, SEED, stream::BODIES, i)));
    bodies.push(RadialFunction::ball(grid.clone(), TAU).unwrap());
    bodies.push(RadialFunction::origin(grid.clone()));
    let mut min_value = f64::INFINITY;
    let mut origin_exact = true;
    for c in &curves {
        let r = verify_decomposition(&theta(c.clone()), &bodies, None, DEFAULT_RESOLUTION).unwrap();
        min_value = min_value.min(r.min_v_plus).min(r.min_v_minus);
        origin_exact &= r.v_plus_at_origin == 0.0 && r.v_minus_at_origin == 0.0;
    }
    Outcome {
        passed: min_value >= -1e-12 && origin_exact,
        detail: format!(
            "{} curves x {} bodies, min(V+, V-) {min_value:.3e} (tol -1e-12), V+({{0}}) = V-({{0}}) = 0 exactly: {origin_exact}",
            curves.len(),
            bodies.len()
        ),
    }
}

fn rotational_invariance() -> Outcome {
    let grid = circle(360);
    let gens = [
        BodyGenerator::ellipsoid(vec![2.0, 1.0]).unwrap(),
        BodyGenerator::ellipsoid(vec![1.5, 0.5]).unwrap().rotate(&starval::Rotation::planar(0.3)).unwrap(),
        BodyGenerator::trig_blob_2d(1.5, &[(2, 0.3, -0.2), (3, 0.1, 0.25), (5, -0.05, 0.1)], 0.05).unwrap(),
    ];
    let bodies: Vec<RadialFunction> = gens.iter().map(|g| g.sample(&grid).unwrap()).collect();
    let rotations: Vec<RotationSpec> = [1i64, 7, 45, 90, 180, 359, -13, 1000].into_iter().map(RotationSpec::GridSteps).collect();
    let mut worst = 0.0f64;
    for c in [ThetaCurve::sine(1.0, 1.0, TAU).unwrap(), ThetaCurve::polynomial(vec![0.5, -1.0, 0.3], TAU).unwrap()] {
        let r = verify_decomposition(&theta(c), &bodies, Some(&rotations), DEFAULT_RESOLUTION).unwrap();
        worst = worst.max(r.invariance_deviation.unwrap());
    }
    Outcome {
        passed: worst <= 1e-12,
        detail: format!("ellipsoid and trigblob bodies, {} grid-step rotations, max deviation of V, V+, V- {worst:.3e} (tol 1e-12)", rotations.len()),
    }
}

fn rim_decay() -> Outcome {
    let grid = circle(1024);
    let sine = ThetaCurve::sine(1.0, 1.0, TAU).unwrap();
    let sup_theta = sine.sup_abs(2.0).unwrap();
    let base = NodeSet::from_indices(grid, &[0]).unwrap();
    let omegas = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let rows = rim_decay_profile(&theta(sine), &base, 2.0, &omegas, 200, SEED).unwrap();
    let bounded = rows.iter().all(|r| r.sup_abs_v <= sup_theta * r.band_measure);
    let shrinking = rows.windows(2).all(|w| w[1].band_measure < w[0].band_measure);
    let decays = rows[rows.len() - 1].sup_abs_v < rows[0].sup_abs_v;
    let listing: Vec<String> = rows.iter().map(|r| format!("{}: {:.4} <= {:.4}", r.omega, r.sup_abs_v, sup_theta * r.band_measure)).collect();
    Outcome {
        passed: bounded && shrinking && decays,
        detail: format!("[{}], band measures strictly decreasing: {shrinking}, last < first: {decays}", listing.join("; ")),
    }
}

fn partition_splitting() -> Outcome {
    let grid = circle(512);
    let radius = 0.6 * PI;
    let covers = [NodeSet::cap(grid.clone(), &[1.0, 0.0], radius).unwrap(), NodeSet::cap(grid.clone(), &[-1.0, 0.0], radius).unwrap()];
    let covered = (0..grid.len()).all(|i| covers.iter().any(|c| c.contains(i)));
    let pu = partition_of_unity(&covers).unwrap();
    let phi = pu.functions();
    let max_one = (0..grid.len()).all(|i| phi.iter().map(|f| f[i]).fold(f64::NEG_INFINITY, f64::max) == 1.0);
    let supported = phi.iter().zip(&covers).all(|(f, c)| (0..grid.len()).all(|i| f[i] == 0.0 || c.contains(i)));
    let mut recovers = true;
    for k in 0..20 {
        let f = BodyModel::IidUniform.draw(&grid, 3.0, SEED, stream::BODIES, k);
        let parts = pu.split(&f).unwrap();
        recovers &= (0..grid.len()).all(|i| parts.iter().map(|p| p.values()[i]).fold(f64::NEG_INFINITY, f64::max) == f.values()[i]);
    }
    Outcome {
        passed: covered && max_one && supported && recovers,
        detail: format!("arcs cover S1: {covered}, max phi = 1 at every node: {max_one}, supp phi_i in G_i: {supported}, max(phi_i f) = f for 20 f: {recovers}"),
    }
}

fn boundedness() -> Outcome {
    let v = theta(ThetaCurve::power(2.0, 2.0).unwrap());
    let grid = circle(2);
    let report = v.check_bounded_on_bounded(&grid, 2.0, 10_000, SEED, BodyModel::IidUniform).unwrap();
    let analytic = report.analytic_bound.unwrap();
    let m = report.empirical_max;
    Outcome {
        passed: (3.5..=4.0 + 1e-12).contains(&m) && (analytic - 4.0).abs() <= 1e-12,
        detail: format!("empirical max |V| {m:.6} over 10^4 bodies on a 2-node circle grid, analytic bound {analytic}"),
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("valuation identity", valuation_identity),
        ("representation exactness", representation_exactness),
        ("quadrature convergence", quadrature_convergence),
        ("jordan decomposition", jordan_decomposition),
        ("sup-oracle agreement", sup_oracle_agreement),
        ("positivity and origin normalization", positivity_and_origin),
        ("rotational-invariance inheritance", rotational_invariance),
        ("rim decay", rim_decay),
        ("partition splitting", partition_splitting),
        ("boundedness on bounded sets", boundedness),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        if !outcome.passed {
            failures += 1;
        }
        println!("{} {:>2} {name}: {}", if outcome.passed { "PASS" } else { "FAIL" }, i + 1, outcome.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
