//! Node sets on a grid, chordal distances to them, partitions of unity
//! subordinate to finite open covers (max-combine variant), and the outer
//! parallel bands `A_ω = {t : 0 < d(t, A) < ω}` used by the rim-decay
//! experiment.
//!
//! Openness is a continuum notion, so sets are stored as node masks plus an
//! optional closed-form descriptor. With a descriptor, distances to the set
//! and to its complement are exact; without one they are measured to the
//! nearest member / non-member node.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::{probe_rng, stream, Exec};
use crate::sphere_grid::SphereGrid;
use crate::star_body::{csv_string, RadialFunction};
use crate::valuation::ValuationSpec;

const POINT_TOL: f64 = 1e-12;

fn chord(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    2.0 * (0.5 * chord(a, b)).min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetDescriptor {
    /// Open spherical cap `{t : angle(t, center) < angular_radius}`.
    Cap { center: Vec<f64>, angular_radius: f64 },
    /// Finite point set on the sphere.
    Points { points: Vec<Vec<f64>> },
}

/// A subset of grid nodes.
#[derive(Debug, Clone)]
pub struct NodeSet {
    grid: Arc<SphereGrid>,
    members: Vec<bool>,
    descriptor: Option<SetDescriptor>,
}

impl NodeSet {
    pub fn from_indices(grid: Arc<SphereGrid>, indices: &[usize]) -> Result<Self> {
        let mut members = vec![false; grid.len()];
        for &i in indices {
            *members.get_mut(i).ok_or_else(|| invalid(format!("node index {i} out of range")))? = true;
        }
        Ok(NodeSet { grid, members, descriptor: None })
    }

    pub fn all(grid: Arc<SphereGrid>) -> Self {
        let members = vec![true; grid.len()];
        NodeSet { grid, members, descriptor: None }
    }

    pub fn cap(grid: Arc<SphereGrid>, center: &[f64], angular_radius: f64) -> Result<Self> {
        if center.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: center.len() });
        }
        if !(angular_radius > 0.0) {
            return Err(invalid("cap radius must be positive"));
        }
        let norm = center.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("cap center must be a nonzero vector"));
        }
        let center: Vec<f64> = center.iter().map(|x| x / norm).collect();
        Self::from_descriptor(grid, SetDescriptor::Cap { center, angular_radius })
    }

    pub fn points(grid: Arc<SphereGrid>, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(p) = points.iter().find(|p| p.len() != grid.dim()) {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: p.len() });
        }
        Self::from_descriptor(grid, SetDescriptor::Points { points })
    }

    pub fn from_descriptor(grid: Arc<SphereGrid>, descriptor: SetDescriptor) -> Result<Self> {
        let members = grid
            .nodes()
            .iter()
            .map(|t| match &descriptor {
                SetDescriptor::Cap { center, angular_radius } => angle_between(t, center) < *angular_radius,
                SetDescriptor::Points { points } => points.iter().any(|p| chord(t, p) <= POINT_TOL),
            })
            .collect();
        Ok(NodeSet { grid, members, descriptor: Some(descriptor) })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn descriptor(&self) -> Option<&SetDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn indices(&self) -> Vec<usize> {
        self.members.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect()
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `m(A)` as the total weight of member nodes.
    pub fn measure(&self) -> f64 {
        self.grid.weights().iter().zip(&self.members).filter(|(_, m)| **m).map(|(w, _)| *w).sum()
    }

    /// Chordal distance `d(t, A)` from a point of the sphere.
    pub fn distance_to_point(&self, t: &[f64]) -> Result<f64> {
        match &self.descriptor {
            Some(SetDescriptor::Cap { center, angular_radius }) => {
                let excess = angle_between(t, center) - angular_radius;
                Ok(if excess > 0.0 { 2.0 * (0.5 * excess).sin() } else { 0.0 })
            }
            Some(SetDescriptor::Points { points }) => {
                Ok(points.iter().map(|p| chord(t, p)).fold(f64::INFINITY, f64::min))
            }
            None => {
                if self.is_empty() {
                    return Err(Error::EmptySet);
                }
                Ok(self.grid.nodes().iter().zip(&self.members).filter(|(_, m)| **m).map(|(a, _)| chord(t, a)).fold(f64::INFINITY, f64::min))
            }
        }
    }

    /// `d(node_i, A)`.
    pub fn distance_to_node(&self, i: usize) -> Result<f64> {
        if self.members[i] {
            return Ok(0.0);
        }
        self.distance_to_point(self.grid.node(i))
    }

    /// `d(node_i, Aᶜ)`; `+∞` when the complement is empty.
    pub fn complement_distance(&self, i: usize) -> f64 {
        if !self.members[i] {
            return 0.0;
        }
        let t = self.grid.node(i);
        match &self.descriptor {
            Some(SetDescriptor::Cap { center, angular_radius }) => {
                if *angular_radius > std::f64::consts::PI {
                    f64::INFINITY
                } else {
                    2.0 * (0.5 * (angular_radius - angle_between(t, center))).sin()
                }
            }
            _ => self
                .grid
                .nodes()
                .iter()
                .zip(&self.members)
                .filter(|(_, m)| !**m)
                .map(|(a, _)| chord(t, a))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let json = match &self.descriptor {
            Some(d) => NodeSetJson::Descriptor(d.clone()),
            None => NodeSetJson::Indices(self.indices()),
        };
        Ok(serde_json::to_string(&json)?)
    }
}

/// Wire format for node sets: an index array or a closed-form descriptor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeSetJson {
    Indices(Vec<usize>),
    Descriptor(SetDescriptor),
}

impl NodeSetJson {
    pub fn resolve(&self, grid: &Arc<SphereGrid>) -> Result<NodeSet> {
        match self {
            NodeSetJson::Indices(ix) => NodeSet::from_indices(grid.clone(), ix),
            NodeSetJson::Descriptor(SetDescriptor::Cap { center, angular_radius }) => NodeSet::cap(grid.clone(), center, *angular_radius),
            NodeSetJson::Descriptor(SetDescriptor::Points { points }) => NodeSet::points(grid.clone(), points.clone()),
        }
    }
}

/// Base set `A` and width `ω` of an outer parallel band.
#[derive(Debug, Clone)]
pub struct BandSpec {
    pub base: NodeSet,
    pub width: f64,
}

impl BandSpec {
    pub fn new(base: NodeSet, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(invalid("band width must be positive"));
        }
        Ok(BandSpec { base, width })
    }

    fn distances(&self) -> Result<Vec<f64>> {
        (0..self.base.grid.len()).map(|i| self.base.distance_to_node(i)).collect()
    }

    /// Nodes with `0 < d(t, A) < ω`.
    pub fn outer_band(&self) -> Result<NodeSet> {
        let members = self.distances()?.into_iter().map(|d| d > 0.0 && d < self.width).collect();
        Ok(NodeSet { grid: self.base.grid.clone(), members, descriptor: None })
    }

    /// Tent of height `λ` across the band, peaking at `d(t, A) = ω/2`.
    pub fn bump(&self, height: f64) -> Result<RadialFunction> {
        if !(height >= 0.0) || !height.is_finite() {
            return Err(invalid("bump height must be finite and >= 0"));
        }
        let w = self.width;
        let values = self
            .distances()?
            .into_iter()
            .map(|d| if d > 0.0 && d < w { height * (1.0 - (2.0 * d / w - 1.0).abs()).max(0.0) } else { 0.0 })
            .collect();
        RadialFunction::new(self.base.grid.clone(), values)
    }
}

/// Functions `φ_i` with `φ_i ≺ G_i` and `max_i φ_i = 1` on `G = ∪ G_i`.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    grid: Arc<SphereGrid>,
    functions: Vec<Vec<f64>>,
}

impl PartitionOfUnity {
    /// `φ_i(t) = d(t, G_iᶜ) / max_j d(t, G_jᶜ)` on `G`, zero elsewhere.
    /// Where some cover has an empty complement its `φ` is 1 and the others 0.
    pub fn new(covers: &[NodeSet]) -> Result<Self> {
        let first = covers.first().ok_or_else(|| invalid("no covers supplied"))?;
        let grid = first.grid.clone();
        if covers.iter().any(|c| *c.grid != *grid) {
            return Err(Error::GridMismatch);
        }
        if covers.iter().all(NodeSet::is_empty) {
            return Err(invalid("all covers are empty"));
        }
        let dist: Vec<Vec<f64>> = covers.iter().map(|c| (0..grid.len()).map(|i| c.complement_distance(i)).collect()).collect();
        let mut functions = vec![vec![0.0; grid.len()]; covers.len()];
        for t in 0..grid.len() {
            let top = dist.iter().map(|d| d[t]).fold(0.0, f64::max);
            if top == 0.0 {
                continue;
            }
            for (phi, d) in functions.iter_mut().zip(&dist) {
                phi[t] = if top.is_infinite() {
                    if d[t].is_infinite() { 1.0 } else { 0.0 }
                } else {
                    d[t] / top
                };
            }
        }
        Ok(PartitionOfUnity { grid, functions })
    }

    pub fn functions(&self) -> &[Vec<f64>] {
        &self.functions
    }

    /// `f_i = φ_i·f`; requires `supp f ⊆ G` at the nodes.
    pub fn split(&self, f: &RadialFunction) -> Result<Vec<RadialFunction>> {
        if *f.grid().as_ref() != *self.grid {
            return Err(Error::GridMismatch);
        }
        for (t, v) in f.values().iter().enumerate() {
            if *v > 0.0 && self.functions.iter().all(|phi| phi[t] == 0.0) {
                return Err(invalid(format!("f is positive at node {t}, outside the union of the covers")));
            }
        }
        self.functions.iter().map(|phi| f.scaled_by(phi)).collect()
    }

    /// CSV with a `node` column followed by one `phi_i` column per cover.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["node".to_string()];
        header.extend((0..self.functions.len()).map(|i| format!("phi_{i}")));
        w.write_record(&header)?;
        for t in 0..self.grid.len() {
            let mut row = vec![t.to_string()];
            row.extend(self.functions.iter().map(|phi| phi[t].to_string()));
            w.write_record(&row)?;
        }
        csv_string(w)
    }
}

pub fn partition_of_unity(covers: &[NodeSet]) -> Result<PartitionOfUnity> {
    PartitionOfUnity::new(covers)
}

pub fn split_function(f: &RadialFunction, partition: &PartitionOfUnity) -> Result<Vec<RadialFunction>> {
    partition.split(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RimRow {
    pub omega: f64,
    pub sup_abs_v: f64,
    pub band_measure: f64,
    pub band_nodes: usize,
    /// `max_{[0,λ]} |θ − θ(0)| · m(A_ω)` for profile valuations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<f64>,
}

pub fn rim_decay_profile(spec: &ValuationSpec, base: &NodeSet, lambda: f64, omegas: &[f64], probes: usize, seed: u64) -> Result<Vec<RimRow>> {
    rim_decay_profile_with(spec, base, lambda, omegas, probes, seed, Exec::default())
}

/// For each `ω`, the largest `|V(f) − V({0})|` over bumps `f ≺ A_ω` with
/// `‖f‖∞ ≤ λ`: the tent, the constant-`λ` bump on the band nodes, and
/// `probes` seeded random sub-bumps (each band node independently zero or
/// uniform on `[0, λ]`).
pub fn rim_decay_profile_with(
    spec: &ValuationSpec,
    base: &NodeSet,
    lambda: f64,
    omegas: &[f64],
    probes: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<RimRow>> {
    if !(lambda >= 0.0 && lambda <= spec.lambda_max()) {
        return Err(Error::Domain(format!("λ = {lambda} outside [0, {}]", spec.lambda_max())));
    }
    if omegas.iter().any(|w| !(*w > 0.0)) || omegas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("omegas must be positive and strictly decreasing"));
    }
    let grid = base.grid();
    let at_origin = spec.evaluate(&RadialFunction::origin(grid.clone()))?;
    let oscillation = spec.theta_curve().map(|c| c.sup_oscillation(lambda)).transpose()?;
    omegas
        .iter()
        .enumerate()
        .map(|(wi, &omega)| {
            let band_spec = BandSpec::new(base.clone(), omega)?;
            let band = band_spec.outer_band()?;
            let band_measure = band.measure();
            let flat: Vec<f64> = (0..grid.len()).map(|i| if band.contains(i) { lambda } else { 0.0 }).collect();
            let mut sup = (spec.evaluate(&band_spec.bump(lambda)?)? - at_origin)
                .abs()
                .max((spec.evaluate(&RadialFunction::new(grid.clone(), flat)?)? - at_origin).abs());
            let random = exec.try_map(probes, |p| {
                let mut rng = probe_rng(seed, stream::RIMS, ((wi as u64) << 32) | p as u64);
                let values: Vec<f64> = (0..grid.len())
                    .map(|i| if band.contains(i) && rng.random::<bool>() { lambda * rng.random::<f64>() } else { 0.0 })
                    .collect();
                Ok::<_, Error>((spec.evaluate(&RadialFunction::new(grid.clone(), values)?)? - at_origin).abs())
            })?;
            sup = random.into_iter().fold(sup, f64::max);
            Ok(RimRow { omega, sup_abs_v: sup, band_measure, band_nodes: band.len(), envelope: oscillation.map(|m| m * band_measure) })
        })
        .collect()
}

/// CSV `omega,sup_abs_V,band_measure`.
pub fn rim_csv(rows: &[RimRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["omega", "sup_abs_V", "band_measure"])?;
    for r in rows {
        w.write_record([r.omega.to_string(), r.sup_abs_v.to_string(), r.band_measure.to_string()])?;
    }
    csv_string(w)
}
