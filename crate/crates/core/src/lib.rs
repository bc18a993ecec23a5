//! Log-subdyadic Littlewood–Paley toolkit on the periodic grid.
//!
//! The frequency scale `ρ(R) = R/(log R)^{γ-1}` adapted to the phase
//! `(log R)^γ` drives a lattice partition of each dyadic annulus, square
//! functions with spatial aperture `a_γ(t) = t(log 1/t)^{γ-1}`, and a
//! logarithmic geometric maximal operator. Everything is generic over the
//! floating-point type; `f64` aliases are exported at the crate root.

pub mod error;
pub mod geometry;
pub mod grid;
pub mod jet;
pub mod maximal;
pub mod partition;
pub mod scalar;
pub mod special;
pub mod squarefn;
pub mod symbols;

pub use error::{Error, Result};
pub use geometry::{log_aperture, log_scale, Ball, BallClass, LogParams};
pub use grid::{default_du, Field, FieldDtype, RealField, ScaleGrid, SpectralField, TorusGrid};
pub use maximal::{
    hl_maximal, hl_maximal_s, log_maximal, radius_ladder, rhs_weight, smooth_average, AveragingKernel,
};
pub use partition::{BesselReport, BumpProfile, Cell, CellRecord, Partition};
pub use scalar::Scalar;
pub use squarefn::{
    kernel_conv_stability, kernel_mass, phi_hat, RobustKernel, SquareFunctions, SquareMeta, SquareOutput,
    StabilityReport,
};
pub use symbols::{
    canonical_balls, hi_projection, localized_sobolev_norm, LowCutoff, MiyachiRecord, MiyachiReport,
    RadialSymbol, SobolevOptions, SymbolKind, Table,
};

pub type Params = LogParams<f64>;
pub type Field64 = Field<f64>;
pub type RealField64 = RealField<f64>;
pub type Spectral64 = SpectralField<f64>;
pub type Scales64 = ScaleGrid<f64>;
pub type Field32 = Field<f32>;
pub type RealField32 = RealField<f32>;
