use std::f64::consts::TAU;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use starval::theta::DEFAULT_RESOLUTION;

#[derive(Debug, Parser)]
#[command(name = "starval", version, about = "Radial continuous valuations on star bodies", args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "STARVAL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a quadrature grid.
    Grid(GridArgs),
    /// Sample a body on a grid.
    Body(BodyArgs),
    /// Evaluate V(K) for one or more bodies.
    Eval(EvalArgs),
    /// Decompose V = V+ - V- and verify the decomposition.
    Decompose(DecomposeArgs),
    /// Run a property suite.
    Check {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Rim-decay table.
    Rims(RimsArgs),
    /// Partition of unity subordinate to a finite cover of caps.
    Split(SplitArgs),
}

#[derive(Debug, Subcommand)]
pub enum Suite {
    /// V(K∪L) + V(K∩L) = V(K) + V(L) on random pairs.
    Identity(IdentityArgs),
    /// Rotational invariance of V, V+ and V-.
    Invariance(InvarianceArgs),
    /// Empirical bound on bodies inside a ball.
    Bounded(BoundedArgs),
    /// Empirical modulus of continuity.
    Continuity(ContinuityArgs),
    /// Rim decay near a base set.
    Rims(RimsArgs),
    /// Ladder supremum against the running-max closed form.
    Oracle(OracleArgs),
    /// Splitting a function along a partition of unity.
    Split(SplitArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThetaArgs {
    /// power:K, neg-power:K, sine:FREQ,AMP, poly:C0,C1,... or pwl:X0,Y0,X1,Y1,...
    #[arg(long)]
    pub theta: String,
    /// Right end of the domain of theta.
    #[arg(long)]
    pub domain: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// circle:N, latlong:P,Q or mc:DIM,N[,SEED]
    #[arg(long, default_value = "circle:256")]
    pub grid: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BodyArgs {
    /// origin, ball:R, ellipsoid:A,B[,C], trig:C[,M:A:B]..., json:PATH; append @ANGLE to rotate a planar body.
    #[arg(long)]
    pub body: String,
    #[arg(long, default_value = "circle:256")]
    pub grid: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: ThetaArgs,
    #[arg(long, required = true)]
    pub body: Vec<String>,
    #[arg(long, default_value = "circle:256")]
    pub grid: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecomposeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: ThetaArgs,
    /// Samples used for closed-form curves.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// Spacing of the (λ, θ, θ+, θ-) table; defaults to domain/100.
    #[arg(long)]
    pub step: Option<f64>,
    /// Grid for the verification bodies; circle grids also check grid-step invariance.
    #[arg(long, default_value = "circle:360")]
    pub grid: String,
    /// Number of random verification bodies.
    #[arg(long, default_value_t = 100)]
    pub bodies: usize,
    /// Also write the (λ, θ, θ+, θ-) table as CSV here.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IdentityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: ThetaArgs,
    #[arg(long, default_value = "circle:256")]
    pub grid: String,
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    /// Relative tolerance on the residual.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InvarianceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: ThetaArgs,
    #[arg(long, default_value = "circle:360")]
    pub grid: String,
    #[arg(long, default_values_t = ["ellipsoid:2,1".to_string(), "trig:1.5,2:0.3:-0.2,3:0.1:0.25".to_string()])]
    pub body: Vec<String>,
    /// Grid-step rotations (circle grids).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [1i64, 7, 45, 90, 180, -13])]
    pub steps: Vec<i64>,
    /// Rotation angles about the last axis (other grids).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [0.5, 1.3])]
    pub angles: Vec<f64>,
    /// Defaults to 1e-12 on circle grids and 1e-6 elsewhere.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    Iid,
    Smooth,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: ThetaArgs,
    #[arg(long, default_value = "circle:256")]
    pub grid: String,
    /// Radius of the enclosing ball; defaults to the domain end.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = ModelArg::Iid)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ContinuityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: ThetaArgs,
    #[arg(long, default_value = "circle:256")]
    pub grid: String,
    #[arg(long, default_value = "ellipsoid:2,1")]
    pub body: String,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.01, 0.001])]
    pub deltas: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub probes: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RimsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: ThetaArgs,
    #[arg(long, default_value = "circle:1024")]
    pub grid: String,
    /// Height bound of the bumps.
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    /// Use the first grid node as the base set (the default).
    #[arg(long, conflicts_with = "cap")]
    pub point_base: bool,
    /// Base cap as CENTER...,ANGULAR_RADIUS.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub cap: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.25, 0.125, 0.0625])]
    pub omegas: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub probes: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: ThetaArgs,
    /// Circle grid sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [6usize])]
    pub nodes: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    pub levels: u32,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long, default_value = "circle:512")]
    pub grid: String,
    /// Cover cap as CENTER...,ANGULAR_RADIUS; repeat for each cover.
    #[arg(long, allow_negative_numbers = true, default_values_t = [format!("1,0,{}", 0.3 * TAU), format!("-1,0,{}", 0.3 * TAU)])]
    pub cap: Vec<String>,
    /// Random functions to split.
    #[arg(long, default_value_t = 20)]
    pub functions: usize,
}
