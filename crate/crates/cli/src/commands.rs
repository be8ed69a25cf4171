use std::f64::consts::TAU;
use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use starval::exec::stream;
use starval::jordan::{oracle_csv, split_valuation};
use starval::{
    oracle_agreement, partition_of_unity, rim_csv, rim_decay_profile, verify_decomposition, BodyModel, CheckReport, NodeSet, PropertyResult,
    RadialFunction, RimRow, Rotation, RotationSpec, SphereGrid, ValuationSpec,
};

use crate::args::*;
use crate::descriptors::{self, Body};
use crate::failure::Outcome;

/// What a command produced: a JSON document, its CSV rendering, whether all
/// checked properties held, and any side files requested by flags.
pub struct Report {
    pub json: Value,
    pub csv: String,
    pub passed: bool,
    pub files: Vec<(PathBuf, String)>,
}

impl Report {
    fn ok(json: Value, csv: String) -> Self {
        Report { json, csv, passed: true, files: Vec::new() }
    }

    fn check(report: CheckReport, csv: Option<String>) -> Outcome<Self> {
        let csv = match csv {
            Some(c) => c,
            None => properties_csv(&report.result.properties),
        };
        Ok(Report { passed: report.passed(), json: serde_json::to_value(&report)?, csv, files: Vec::new() })
    }
}

fn params(args: &impl Serialize) -> Outcome<Value> {
    Ok(serde_json::to_value(args)?)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn properties_csv(props: &[PropertyResult]) -> String {
    let mut out = String::from("name,passed,value,threshold\n");
    for p in props {
        out.push_str(&format!("{},{},{},{}\n", csv_field(&p.name), p.passed, p.value, p.threshold));
    }
    out
}

fn random_bodies(grid: &Arc<SphereGrid>, lambda: f64, count: usize, seed: u64) -> Vec<RadialFunction> {
    (0..count as u64).map(|i| BodyModel::IidUniform.draw(grid, lambda, seed, stream::BODIES, i)).collect()
}

fn valuation(theta: &ThetaArgs, default_domain: f64) -> Outcome<ValuationSpec> {
    let domain = theta.domain.unwrap_or(default_domain);
    Ok(ValuationSpec::theta(descriptors::theta(&theta.theta, domain)?))
}

fn sup_of(bodies: &[RadialFunction]) -> f64 {
    let s = bodies.iter().map(|b| b.sup_norm()).fold(0.0, f64::max);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

pub fn run(cli: &Cli) -> Outcome<Report> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Grid(a) => grid(a),
        Command::Body(a) => body(a),
        Command::Eval(a) => eval(a),
        Command::Decompose(a) => decompose(a, seed),
        Command::Rims(a) => rims_table(a, seed),
        Command::Split(a) => split_table(a),
        Command::Check { suite } => match suite {
            Suite::Identity(a) => identity(a, seed),
            Suite::Invariance(a) => invariance(a, seed),
            Suite::Bounded(a) => bounded(a, seed),
            Suite::Continuity(a) => continuity(a, seed),
            Suite::Rims(a) => rims_check(a, seed),
            Suite::Oracle(a) => oracle(a, seed),
            Suite::Split(a) => split_check(a, seed),
        },
    }
}

fn grid(a: &GridArgs) -> Outcome<Report> {
    let g = descriptors::grid(&a.grid)?;
    let json: Value = serde_json::from_str(&g.to_json()?)?;
    let mut csv: Vec<String> = (0..g.dim()).map(|i| format!("x{i}")).collect();
    csv.push("weight".into());
    let mut out = csv.join(",") + "\n";
    for (node, w) in g.nodes().iter().zip(g.weights()) {
        let row: Vec<String> = node.iter().chain(std::iter::once(w)).map(|v| v.to_string()).collect();
        out.push_str(&(row.join(",") + "\n"));
    }
    Ok(Report::ok(json, out))
}

fn body(a: &BodyArgs) -> Outcome<Report> {
    let g = descriptors::grid(&a.grid)?;
    let r = Body::parse(&a.body)?.sample(&g)?;
    Ok(Report::ok(serde_json::from_str(&r.to_json()?)?, r.to_csv()?))
}

fn eval(a: &EvalArgs) -> Outcome<Report> {
    let g = descriptors::grid(&a.grid)?;
    let bodies = a.body.iter().map(|d| Body::parse(d)?.sample(&g)).collect::<Outcome<Vec<_>>>()?;
    let spec = valuation(&a.theta, sup_of(&bodies))?;
    let mut results = Vec::new();
    let mut csv = String::from("body,value\n");
    for (desc, b) in a.body.iter().zip(&bodies) {
        let v = spec.evaluate(b)?;
        results.push(json!({"body": desc, "value": v}));
        csv.push_str(&format!("{},{v}\n", csv_field(desc)));
    }
    let json = json!({
        "command": "eval",
        "params": params(a)?,
        "domain": spec.lambda_max(),
        "results": results,
    });
    Ok(Report::ok(json, csv))
}

fn decompose(a: &DecomposeArgs, seed: u64) -> Outcome<Report> {
    let spec = valuation(&a.theta, TAU)?;
    let theta = spec.theta_curve().expect("profile valuation").clone();
    let domain = theta.domain_max();
    let g = descriptors::grid(&a.grid)?;
    let mut bodies = random_bodies(&g, domain, a.bodies, seed);
    bodies.push(RadialFunction::ball(g.clone(), domain)?);
    bodies.push(RadialFunction::origin(g.clone()));
    let rotations: Option<Vec<RotationSpec>> = g.is_circle().then(|| {
        let n = g.len() as i64;
        [1, 7, n / 3, n / 2, -13].into_iter().map(RotationSpec::GridSteps).collect()
    });
    let report = verify_decomposition(&spec, &bodies, rotations.as_deref(), a.resolution)?;
    let step = a.step.unwrap_or(domain / 100.0);
    let table = report.decomposition().table_csv(&theta, step)?;
    if !report.passed() {
        eprintln!("decomposition verification failed: {:?}", report.flags);
    }
    let json = json!({
        "command": "decompose",
        "params": params(a)?,
        "seed": seed,
        "passed": report.passed(),
        "report": serde_json::to_value(&report)?,
    });
    let files = a.table.iter().map(|p| (p.clone(), table.clone())).collect();
    Ok(Report { json, csv: table, passed: report.passed(), files })
}

fn identity(a: &IdentityArgs, seed: u64) -> Outcome<Report> {
    let spec = valuation(&a.theta, TAU)?;
    let g = descriptors::grid(&a.grid)?;
    let bodies = random_bodies(&g, spec.lambda_max(), 2 * a.pairs, seed);
    let mut worst = 0.0f64;
    for pair in bodies.chunks(2) {
        let (k, l) = (&pair[0], &pair[1]);
        let scale = 1.0 + spec.evaluate(k)?.abs() + spec.evaluate(l)?.abs();
        worst = worst.max(spec.valuation_residual(k, l)?.abs() / scale);
    }
    let props = vec![PropertyResult::at_most("max_scaled_residual", worst, a.tol)];
    Report::check(CheckReport::new("identity", params(a)?, seed, props), None)
}

fn invariance(a: &InvarianceArgs, seed: u64) -> Outcome<Report> {
    let g = descriptors::grid(&a.grid)?;
    let gens = a.body.iter().map(|d| Body::parse(d)?.generator(g.dim())).collect::<Outcome<Vec<_>>>()?;
    let rotations: Vec<RotationSpec> = if g.is_circle() {
        a.steps.iter().copied().map(RotationSpec::GridSteps).collect()
    } else {
        a.angles
            .iter()
            .map(|&t| if g.dim() == 2 { Ok(Rotation::planar(t)) } else { Rotation::about_axis(g.dim() - 1, t) })
            .map(|r| r.map(RotationSpec::Matrix))
            .collect::<starval::Result<_>>()?
    };
    let mut samples = Vec::new();
    for gen in &gens {
        let base = gen.sample(&g)?;
        for r in &rotations {
            samples.push(match r {
                RotationSpec::GridSteps(k) => base.rotate_steps(*k)?,
                RotationSpec::Matrix(m) => gen.rotate(m)?.sample(&g)?,
            });
        }
        samples.push(base);
    }
    let spec = valuation(&a.theta, sup_of(&samples))?;
    let (_, plus, minus) = split_valuation(spec.theta_curve().expect("profile valuation"), a.resolution)?;
    let tol = a.tol.unwrap_or(if g.is_circle() { 1e-12 } else { 1e-6 });
    let mut rows = Vec::new();
    let mut worst = [0.0f64; 3];
    for (desc, gen) in a.body.iter().zip(&gens) {
        let dev = [
            spec.check_rotational_invariance(gen, &rotations, &g)?,
            plus.check_rotational_invariance(gen, &rotations, &g)?,
            minus.check_rotational_invariance(gen, &rotations, &g)?,
        ];
        for (w, d) in worst.iter_mut().zip(dev) {
            *w = w.max(d);
        }
        rows.push(json!({"body": desc, "V": dev[0], "Vplus": dev[1], "Vminus": dev[2]}));
    }
    let props = vec![
        PropertyResult::at_most("V_deviation", worst[0], tol),
        PropertyResult::at_most("Vplus_deviation", worst[1], tol),
        PropertyResult::at_most("Vminus_deviation", worst[2], tol),
    ];
    Report::check(CheckReport::new("invariance", params(a)?, seed, props).with_table(Value::Array(rows)), None)
}

fn bounded(a: &BoundedArgs, seed: u64) -> Outcome<Report> {
    let domain = a.theta.domain.or(a.lambda).unwrap_or(TAU);
    let spec = valuation(&a.theta, domain)?;
    let lambda = a.lambda.unwrap_or(spec.lambda_max());
    let g = descriptors::grid(&a.grid)?;
    let model = match a.model {
        ModelArg::Iid => BodyModel::IidUniform,
        ModelArg::Smooth => BodyModel::SmoothQuadratic,
    };
    let r = spec.check_bounded_on_bounded(&g, lambda, a.trials, seed, model)?;
    let bound = r.analytic_bound.expect("profile valuations report an analytic bound");
    let props = vec![PropertyResult::at_most("empirical_max", r.empirical_max, bound + a.tol)];
    Report::check(CheckReport::new("bounded", params(a)?, seed, props).with_table(serde_json::to_value(&r)?), None)
}

fn continuity(a: &ContinuityArgs, seed: u64) -> Outcome<Report> {
    let g = descriptors::grid(&a.grid)?;
    let k = Body::parse(&a.body)?.sample(&g)?;
    let reach = k.sup_norm() + a.deltas.iter().copied().fold(0.0, f64::max);
    let spec = valuation(&a.theta, if reach > 0.0 { reach } else { 1.0 })?;
    let rows = spec.check_continuity(&k, &a.deltas, a.probes, seed)?;
    let props = rows
        .iter()
        .filter_map(|r| r.lipschitz_envelope.map(|e| PropertyResult::at_most(format!("deviation_at_delta_{}", r.delta), r.max_deviation, e + a.tol)))
        .collect();
    let mut csv = String::from("delta,max_deviation,lipschitz_envelope\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{}\n", r.delta, r.max_deviation, r.lipschitz_envelope.map_or_else(String::new, |e| e.to_string())));
    }
    Report::check(CheckReport::new("continuity", params(a)?, seed, props).with_table(serde_json::to_value(&rows)?), Some(csv))
}

fn rim_rows(a: &RimsArgs, seed: u64) -> Outcome<(ValuationSpec, Vec<RimRow>)> {
    let spec = valuation(&a.theta, TAU.max(a.lambda))?;
    let g = descriptors::grid(&a.grid)?;
    let base = match &a.cap {
        Some(c) => descriptors::cap(&g, c)?,
        None => NodeSet::from_indices(g.clone(), &[0])?,
    };
    let rows = rim_decay_profile(&spec, &base, a.lambda, &a.omegas, a.probes, seed)?;
    Ok((spec, rows))
}

fn rims_table(a: &RimsArgs, seed: u64) -> Outcome<Report> {
    let (_, rows) = rim_rows(a, seed)?;
    let json = json!({"command": "rims", "params": params(a)?, "seed": seed, "rows": rows});
    Ok(Report::ok(json, rim_csv(&rows)?))
}

fn rims_check(a: &RimsArgs, seed: u64) -> Outcome<Report> {
    let (_, rows) = rim_rows(a, seed)?;
    let mut props: Vec<PropertyResult> = rows
        .iter()
        .filter_map(|r| r.envelope.map(|e| PropertyResult::at_most(format!("sup_abs_V_at_omega_{}", r.omega), r.sup_abs_v, e + a.tol)))
        .collect();
    props.push(PropertyResult::flag("band_measure_strictly_decreasing", rows.windows(2).all(|w| w[1].band_measure < w[0].band_measure)));
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        props.push(PropertyResult::at_most("final_over_first", last.sup_abs_v / first.sup_abs_v, 1.0 - f64::EPSILON));
    }
    let csv = rim_csv(&rows)?;
    Report::check(CheckReport::new("rims", params(a)?, seed, props).with_table(serde_json::to_value(&rows)?), Some(csv))
}

fn oracle(a: &OracleArgs, seed: u64) -> Outcome<Report> {
    let spec = valuation(&a.theta, TAU)?;
    let rows = oracle_agreement(&spec, &a.nodes, a.levels, a.trials, seed, a.resolution)?;
    let mut props = vec![PropertyResult::flag("all_within_bound", rows.iter().all(|r| r.within_bound))];
    let ratio = rows.iter().filter_map(|r| r.bound.map(|b| if b > 0.0 { r.disagreement / b } else { 0.0 })).fold(None, |m: Option<f64>, x| {
        Some(m.map_or(x, |m| m.max(x)))
    });
    if let Some(ratio) = ratio {
        props.push(PropertyResult::at_most("max_disagreement_over_bound", ratio, 1.0));
    }
    let csv = oracle_csv(&rows)?;
    Report::check(CheckReport::new("oracle", params(a)?, seed, props).with_table(serde_json::to_value(&rows)?), Some(csv))
}

fn covers(a: &SplitArgs) -> Outcome<(Arc<SphereGrid>, Vec<NodeSet>)> {
    let g = descriptors::grid(&a.grid)?;
    let caps = a.cap.iter().map(|c| descriptors::cap_str(&g, c)).collect::<Outcome<Vec<_>>>()?;
    Ok((g, caps))
}

fn split_table(a: &SplitArgs) -> Outcome<Report> {
    let (_, caps) = covers(a)?;
    let pu = partition_of_unity(&caps)?;
    let json = json!({"command": "split", "params": params(a)?, "functions": pu.functions()});
    Ok(Report::ok(json, pu.to_csv()?))
}

fn split_check(a: &SplitArgs, seed: u64) -> Outcome<Report> {
    let (g, caps) = covers(a)?;
    let pu = partition_of_unity(&caps)?;
    let phi = pu.functions();
    let n = g.len();
    let covered = (0..n).all(|i| caps.iter().any(|c| c.contains(i)));
    let max_one = (0..n).all(|i| phi.iter().map(|f| f[i]).fold(0.0, f64::max) == 1.0);
    let supported = phi.iter().zip(&caps).all(|(f, c)| (0..n).all(|i| f[i] == 0.0 || c.contains(i)));
    let mut recovers = true;
    for k in 0..a.functions as u64 {
        let f = BodyModel::IidUniform.draw(&g, 1.0, seed, stream::BODIES, k);
        let f = RadialFunction::new(g.clone(), (0..n).map(|i| if caps.iter().any(|c| c.contains(i)) { f.values()[i] } else { 0.0 }).collect())?;
        let parts = pu.split(&f)?;
        recovers &= (0..n).all(|i| parts.iter().map(|p| p.values()[i]).fold(0.0, f64::max) == f.values()[i]);
    }
    let props = vec![
        PropertyResult::flag("covers_sphere", covered),
        PropertyResult::flag("max_phi_is_one", max_one),
        PropertyResult::flag("support_in_cover", supported),
        PropertyResult::flag("max_of_parts_recovers_f", recovers),
    ];
    Report::check(CheckReport::new("split", params(a)?, seed, props), None)
}
