//! Quadrature grids on the unit sphere realizing the normalized measure `m`
//! (total mass 1).
//!
//! Three families are provided: equally spaced circles (`n = 2`),
//! latitude/longitude grids with sine-weighted band midpoints (`n = 3`), and
//! seeded Monte Carlo grids for any dimension. Monte Carlo nodes are drawn
//! with `ChaCha8Rng::seed_from_u64(seed)`: each node takes `n` standard
//! normal draws (`rand_distr::StandardNormal`, in coordinate order) and is
//! normalized to unit length.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// Grid family together with its construction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridSpec {
    Circle { n: usize },
    LatLong { p: usize, q: usize },
    MonteCarlo { dim: usize, n: usize, seed: u64 },
}

impl GridSpec {
    pub fn build(&self) -> Result<SphereGrid> {
        match *self {
            GridSpec::Circle { n } => SphereGrid::circle(n),
            GridSpec::LatLong { p, q } => SphereGrid::latlong(p, q),
            GridSpec::MonteCarlo { dim, n, seed } => SphereGrid::monte_carlo(dim, n, seed),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GridSpec::Circle { .. } => "circle",
            GridSpec::LatLong { .. } => "latlong",
            GridSpec::MonteCarlo { .. } => "montecarlo",
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Circle { n } => write!(f, "circle:{n}"),
            GridSpec::LatLong { p, q } => write!(f, "latlong:{p},{q}"),
            GridSpec::MonteCarlo { dim, n, seed } => write!(f, "mc:{dim},{n},{seed}"),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// Parses `circle:N`, `latlong:P,Q` or `mc:DIM,N[,SEED]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<u64> = params
            .split(',')
            .filter(|p| !p.is_empty())
            .map(|p| p.trim().parse::<u64>().map_err(|_| invalid(format!("bad grid parameter {p:?}"))))
            .collect::<Result<_>>()?;
        match (name, nums.as_slice()) {
            ("circle", [n]) => Ok(GridSpec::Circle { n: *n as usize }),
            ("latlong", [p, q]) => Ok(GridSpec::LatLong { p: *p as usize, q: *q as usize }),
            ("mc" | "montecarlo", [dim, n]) => Ok(GridSpec::MonteCarlo { dim: *dim as usize, n: *n as usize, seed: 0 }),
            ("mc" | "montecarlo", [dim, n, seed]) => Ok(GridSpec::MonteCarlo { dim: *dim as usize, n: *n as usize, seed: *seed }),
            _ => Err(invalid(format!("unrecognized grid descriptor {s:?}"))),
        }
    }
}

/// Nodes and weights of a quadrature rule for the normalized measure on `S^{n-1}`.
///
/// Node order is part of the grid's identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    spec: GridSpec,
    dim: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SphereGrid {
    /// `n` equally spaced directions on the circle at angles `2πk/n`.
    pub fn circle(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("circle grid needs at least 2 nodes, got {n}")));
        }
        let nodes = (0..n)
            .map(|k| {
                let (s, c) = circle_angle(k, n).sin_cos();
                vec![c, s]
            })
            .collect();
        Ok(SphereGrid { spec: GridSpec::Circle { n }, dim: 2, nodes, weights: vec![1.0 / n as f64; n] })
    }

    /// `p` polar bands at midpoints `(j + 1/2)π/p`, `q` azimuths `2πk/q`, sine weighting.
    pub fn latlong(p: usize, q: usize) -> Result<Self> {
        if p < 2 || q < 3 {
            return Err(invalid(format!("latlong grid needs P >= 2 and Q >= 3, got P={p}, Q={q}")));
        }
        let polar: Vec<f64> = (0..p).map(|j| (j as f64 + 0.5) * PI / p as f64).collect();
        let band_total: f64 = polar.iter().map(|t| t.sin()).sum::<f64>() * q as f64;
        let mut nodes = Vec::with_capacity(p * q);
        let mut weights = Vec::with_capacity(p * q);
        for &theta in &polar {
            let (st, ct) = theta.sin_cos();
            for k in 0..q {
                let (sp, cp) = circle_angle(k, q).sin_cos();
                nodes.push(vec![st * cp, st * sp, ct]);
                weights.push(st / band_total);
            }
        }
        Ok(SphereGrid { spec: GridSpec::LatLong { p, q }, dim: 3, nodes, weights })
    }

    /// `n` i.i.d. uniform directions on `S^{dim-1}`, equal weights.
    pub fn monte_carlo(dim: usize, n: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {dim}")));
        }
        if n < 1 {
            return Err(invalid("Monte Carlo grid needs at least one node"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = Vec::with_capacity(n);
        while nodes.len() < n {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-150 {
                nodes.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        Ok(SphereGrid { spec: GridSpec::MonteCarlo { dim, n, seed }, dim, nodes, weights: vec![1.0 / n as f64; n] })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_circle(&self) -> bool {
        matches!(self.spec, GridSpec::Circle { .. })
    }

    /// Angle of node `i` on a circle grid.
    pub fn angle(&self, i: usize) -> Option<f64> {
        match self.spec {
            GridSpec::Circle { n } => Some(circle_angle(i, n)),
            _ => None,
        }
    }

    /// `Σ wᵢ·valuesᵢ`, accumulated with compensated summation.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(invalid(format!("expected {} values, got {}", self.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at node {i}")));
        }
        Ok(self.integrate_unchecked(values.iter().copied()))
    }

    /// Integrates a lazily computed integrand; the iterator must yield one value per node.
    pub(crate) fn integrate_unchecked(&self, values: impl Iterator<Item = f64>) -> f64 {
        neumaier_sum(self.weights.iter().zip(values).map(|(w, v)| w * v))
    }

    /// Integrates `f` evaluated at every node.
    pub fn integrate_fn(&self, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
        let values: Vec<f64> = self.nodes.iter().map(|t| f(t)).collect();
        self.integrate(&values)
    }

    /// Checks the structural invariants (unit nodes, normalized nonnegative weights).
    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() || self.nodes.is_empty() {
            return Err(invalid("node and weight counts differ or are zero"));
        }
        for (i, t) in self.nodes.iter().enumerate() {
            if t.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: t.len() });
            }
            let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(invalid(format!("node {i} has norm {norm}")));
            }
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(invalid("weights must be nonnegative"));
        }
        let total = neumaier_sum(self.weights.iter().copied());
        if (total - 1.0).abs() > UNIT_TOL {
            return Err(invalid(format!("weights sum to {total}, expected 1")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GridJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: GridJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

fn circle_angle(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

pub(crate) fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Wire format: `{dim, kind, params, seed?, nodes, weights}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct GridJson {
    pub dim: usize,
    pub kind: String,
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl From<&SphereGrid> for GridJson {
    fn from(g: &SphereGrid) -> Self {
        let (params, seed) = match g.spec {
            GridSpec::Circle { n } => (serde_json::json!({ "n": n }), None),
            GridSpec::LatLong { p, q } => (serde_json::json!({ "p": p, "q": q }), None),
            GridSpec::MonteCarlo { dim, n, seed } => (serde_json::json!({ "dim": dim, "n": n }), Some(seed)),
        };
        GridJson {
            dim: g.dim,
            kind: g.spec.kind().to_string(),
            params,
            seed,
            nodes: g.nodes.clone(),
            weights: g.weights.clone(),
        }
    }
}

impl TryFrom<GridJson> for SphereGrid {
    type Error = Error;

    fn try_from(raw: GridJson) -> Result<Self> {
        let param = |key: &str| {
            raw.params
                .get(key)
                .and_then(|v| v.as_u64())
                .map(|v| v as usize)
                .ok_or_else(|| invalid(format!("grid params missing {key:?}")))
        };
        let spec = match raw.kind.as_str() {
            "circle" => GridSpec::Circle { n: param("n")? },
            "latlong" => GridSpec::LatLong { p: param("p")?, q: param("q")? },
            "montecarlo" => GridSpec::MonteCarlo {
                dim: raw.dim,
                n: param("n")?,
                seed: raw.seed.ok_or_else(|| invalid("montecarlo grid without seed"))?,
            },
            other => return Err(invalid(format!("unknown grid kind {other:?}"))),
        };
        let grid = SphereGrid { spec, dim: raw.dim, nodes: raw.nodes, weights: raw.weights };
        grid.validate()?;
        Ok(grid)
    }
}
