//! Error type shared by the simulation core.
//!
//! Scalar values carried inside errors are stored as `f64` regardless of the
//! scalar the computation ran with, so the type stays object-safe and easy
//! to print.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Hermite order {order} exceeds supported maximum {max}")]
    UnsupportedHermiteOrder { order: u32, max: u32 },

    #[error("length must be positive: {name} = {value}")]
    NonPositiveLength { name: &'static str, value: f64 },

    #[error("duplicate mode index ({m},{n}) in superposition")]
    DuplicateMode { m: u32, n: u32 },

    #[error("degenerate grid window: min {min} >= max {max}")]
    DegenerateWindow { min: f64, max: f64 },

    #[error("grid needs at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },

    #[error("field outgrew the grid window: edge energy fraction {fraction:.3e} > {limit:.1e}")]
    WindowingLoss { fraction: f64, limit: f64 },

    #[error("propagation distance must be positive, got {delta_z}; use the identity for zero")]
    InvalidDistance { delta_z: f64 },

    #[error("element at z = {element_z} does not match field plane z = {field_z} (tolerance {tolerance:.3e})")]
    PlaneMismatch {
        element_z: f64,
        field_z: f64,
        tolerance: f64,
    },

    #[error("down-conversion requires lambda_s > lambda_p, got lambda_p = {lambda_p}, lambda_s = {lambda_s}")]
    InvalidWavelengths { lambda_p: f64, lambda_s: f64 },

    #[error("element at z = {z} lies outside the open interval (0, {arm_length}) of its arm")]
    ElementOutsideArm { z: f64, arm_length: f64 },

    #[error("kernel engine only accepts signal/idler arm elements, got a {arm} element")]
    ElementWrongArm { arm: &'static str },

    #[error("kernel engine grids are under-resolved: element-free cross-check error {max_rel_err:.3e} > {limit:.1e}")]
    ResolutionCheck { max_rel_err: f64, limit: f64 },

    #[error("kernel hop from z = {from_z} to z = {to_z} cannot be sampled adequately (needs {needed} points, cap {cap})")]
    HopUnderSampled {
        from_z: f64,
        to_z: f64,
        needed: usize,
        cap: usize,
    },

    #[error("profile has too few fringes: found {found} interior maxima, need {need}")]
    InsufficientFringes { found: usize, need: usize },

    #[error("visibility undefined: max + min = 0 over the window")]
    UndefinedVisibility,

    #[error("analysis window [{lo}, {hi}] lies outside the scan range")]
    WindowOutsideScan { lo: f64, hi: f64 },

    #[error("profiles are on different scan grids")]
    GridMismatch,

    #[error("reference profile integrates to zero")]
    ZeroReference,

    #[error("scan mode is not supported by this engine: {reason}")]
    UnsupportedScan { reason: &'static str },
}
