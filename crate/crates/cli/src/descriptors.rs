//! `name:params` descriptors for grids, bodies and caps.

use std::path::PathBuf;
use std::sync::Arc;

use starval::{BodyGenerator, BodyJson, GridSpec, NodeSet, RadialFunction, Rotation, SphereGrid, ThetaCurve};

use crate::failure::{Failure, Outcome};

pub fn grid(desc: &str) -> Outcome<Arc<SphereGrid>> {
    let spec: GridSpec = desc.parse()?;
    Ok(Arc::new(spec.build()?))
}

pub fn theta(desc: &str, domain: f64) -> Outcome<ThetaCurve> {
    Ok(ThetaCurve::parse(desc, domain)?)
}

fn numbers(params: &str, what: &str) -> Outcome<Vec<f64>> {
    params
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|_| Failure::usage(format!("bad {what} parameter {p:?}"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Origin,
    Ball(f64),
    Ellipsoid(Vec<f64>),
    Trig(f64, Vec<(u32, f64, f64)>),
    File(PathBuf),
}

/// A parsed body descriptor with an optional planar rotation angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub shape: Shape,
    pub angle: Option<f64>,
}

impl Body {
    pub fn parse(desc: &str) -> Outcome<Self> {
        let (main, angle) = match desc.rsplit_once('@') {
            Some((m, a)) => (m, Some(a.trim().parse::<f64>().map_err(|_| Failure::usage(format!("bad rotation angle in {desc:?}")))?)),
            None => (desc, None),
        };
        let (name, params) = main.split_once(':').unwrap_or((main, ""));
        let shape = match name {
            "origin" if params.is_empty() => Shape::Origin,
            "ball" => match numbers(params, "ball")?.as_slice() {
                [r] => Shape::Ball(*r),
                _ => return Err(Failure::usage("ball takes one radius, e.g. ball:2")),
            },
            "ellipsoid" => {
                let axes = numbers(params, "ellipsoid")?;
                if axes.len() < 2 {
                    return Err(Failure::usage("ellipsoid takes at least two semi-axes, e.g. ellipsoid:2,1"));
                }
                Shape::Ellipsoid(axes)
            }
            "trig" => {
                let mut parts = params.split(',');
                let constant = parts
                    .next()
                    .and_then(|c| c.trim().parse::<f64>().ok())
                    .ok_or_else(|| Failure::usage("trig needs a constant term, e.g. trig:1.5,2:0.3:-0.2"))?;
                let harmonics = parts
                    .map(|h| {
                        let f: Vec<&str> = h.split(':').collect();
                        match f.as_slice() {
                            [m, a, b] => Ok((
                                m.trim().parse::<u32>().map_err(|_| Failure::usage(format!("bad harmonic order {m:?}")))?,
                                a.trim().parse::<f64>().map_err(|_| Failure::usage(format!("bad coefficient {a:?}")))?,
                                b.trim().parse::<f64>().map_err(|_| Failure::usage(format!("bad coefficient {b:?}")))?,
                            )),
                            _ => Err(Failure::usage(format!("harmonic {h:?} must be M:A:B"))),
                        }
                    })
                    .collect::<Outcome<Vec<_>>>()?;
                Shape::Trig(constant, harmonics)
            }
            "json" if !params.is_empty() => Shape::File(PathBuf::from(params)),
            _ => return Err(Failure::usage(format!("unrecognized body descriptor {desc:?}"))),
        };
        Ok(Body { shape, angle })
    }

    fn load(path: &PathBuf) -> Outcome<BodyJson> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Closed-form generator in dimension `dim`, rotation applied.
    pub fn generator(&self, dim: usize) -> Outcome<BodyGenerator> {
        let gen = match &self.shape {
            Shape::Origin => BodyGenerator::origin(dim)?,
            Shape::Ball(r) => BodyGenerator::ball(dim, *r)?,
            Shape::Ellipsoid(axes) => BodyGenerator::ellipsoid(axes.clone())?,
            Shape::Trig(c, h) => BodyGenerator::trig_blob_2d(*c, h, 0.0)?,
            Shape::File(path) => match Self::load(path)? {
                BodyJson::Generator { generator } => generator,
                BodyJson::Sampled { .. } => return Err(Failure::usage(format!("{} holds sampled values, not a generator", path.display()))),
            },
        };
        match self.angle {
            None => Ok(gen),
            Some(a) if gen.dim() == 2 => Ok(gen.rotate(&Rotation::planar(a))?),
            Some(a) => Ok(gen.rotate(&Rotation::about_axis(gen.dim() - 1, a)?)?),
        }
    }

    pub fn sample(&self, grid: &Arc<SphereGrid>) -> Outcome<RadialFunction> {
        if let Shape::File(path) = &self.shape {
            if let BodyJson::Sampled { .. } = Self::load(path)? {
                if self.angle.is_some() {
                    return Err(Failure::usage("sampled bodies cannot be rotated by angle"));
                }
                return Ok(Self::load(path)?.resolve(grid)?);
            }
        }
        Ok(self.generator(grid.dim())?.sample(grid)?)
    }
}

/// `CENTER...,RADIUS` as an open cap on `grid`.
pub fn cap(grid: &Arc<SphereGrid>, values: &[f64]) -> Outcome<NodeSet> {
    if values.len() != grid.dim() + 1 {
        return Err(Failure::usage(format!("cap needs {} center coordinates and a radius", grid.dim())));
    }
    let (center, radius) = values.split_at(grid.dim());
    Ok(NodeSet::cap(grid.clone(), center, radius[0])?)
}

pub fn cap_str(grid: &Arc<SphereGrid>, desc: &str) -> Outcome<NodeSet> {
    cap(grid, &numbers(desc, "cap")?)
}
