//! Radial continuous valuations on star bodies.
//!
//! Star bodies are handled through their radial functions sampled on a
//! [`SphereGrid`] whose weights realize the normalized measure `m`. Profile
//! valuations `V(K) = ∫ θ(ρ_K) dm` are decomposed as `V = V⁺ − V⁻` through
//! the running maximum of `θ`, and the decomposition is cross-checked
//! against a direct ladder search for `sup{V(g) : 0 ≤ g ≤ ρ_K}`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cover;
pub mod error;
pub mod exec;
pub mod jordan;
pub mod report;
pub mod sphere_grid;
pub mod star_body;
pub mod theta;
pub mod valuation;

pub use cover::{partition_of_unity, rim_csv, rim_decay_profile, split_function, BandSpec, NodeSet, PartitionOfUnity, RimRow, SetDescriptor};
pub use error::{Error, Result};
pub use exec::Exec;
pub use jordan::{oracle_agreement, sup_search, verify_decomposition, DecompositionReport, LadderSearchResult, OracleRow, SearchMode};
pub use report::{CheckReport, PropertyResult};
pub use sphere_grid::{GridSpec, SphereGrid};
pub use star_body::{BodyGenerator, BodyJson, RadialFunction, Rotation, Shape};
pub use theta::{ThetaCurve, ThetaDecomposition, ThetaForm};
pub use valuation::{Blackbox, BodyModel, RotationSpec, ValuationSpec};
