//! Simulation core for Gouy-phase engineered self-splitting beams and for
//! the transfer of their structure into the spatial correlations of SPDC
//! photon pairs.
//!
//! The crate is organised around five pieces:
//!
//! - [`modes`]: exact Hermite-Gauss mode evaluation, Gouy phases, and mode
//!   superpositions, including the two-lobe self-splitting beam.
//! - [`grid`] / [`propagate`]: sampled complex fields, an FFT
//!   angular-spectrum propagator, and dense 1D Fresnel transfer matrices.
//!   The analytic modal route and the numeric route cross-validate each
//!   other.
//! - [`elements`]: opaque strips and glass-plate phase patches.
//! - [`spdc`]: down-conversion geometry plus two coincidence engines — the
//!   closed-form pump-transfer law and a general biphoton kernel engine
//!   that supports per-arm elements.
//! - [`analysis`]: peak finding, fringe spacing, visibility and depletion
//!   ratios.
//!
//! Everything is generic over the scalar type through [`real::Real`]
//! (`f32` or `f64`); the aliases below fix `f64`, which is what the
//! scenario runner uses. All operations are pure functions of immutable
//! inputs and are deterministic for fixed inputs regardless of thread
//! count.

pub mod analysis;
pub mod elements;
pub mod error;
pub mod grid;
pub mod modes;
pub mod propagate;
pub mod real;
pub mod spdc;

pub use elements::{apply_element, Arm, ElementKind, OpticalElement, Side};
pub use error::{Error, Result};
pub use grid::{sample_grid, total_power, Axis, FieldGrid, GridDescriptor};
pub use modes::{
    evaluate_superposition, gouy_phase, hermite_poly, hg_field, self_splitting_modes,
    BeamParams, ModeIndex, ModeSuperposition, NormalizedPoint,
};
pub use propagate::{
    fresnel_transfer_1d, propagate_angular_spectrum, spectral_transfer_1d, TransferMatrix,
};
pub use real::Real;
pub use spdc::{
    biphoton_kernel_scan, derive_geometry, heralded_map_2d, pump_profile_at_z0,
    scan_closed_form, CoincidenceProfile, KernelGrids, Provenance, ScanConfig, ScanMode,
    SpdcGeometry,
};

pub use analysis::{
    depletion_ratio, find_peaks, fringe_spacing, visibility, FringeMethod, FringeReport,
    PeakSet,
};

// Concrete f64 instantiations of the main types.
pub type BeamParams64 = modes::BeamParams<f64>;
pub type ModeSuperposition64 = modes::ModeSuperposition<f64>;
pub type NormalizedPoint64 = modes::NormalizedPoint<f64>;
pub type Axis64 = grid::Axis<f64>;
pub type FieldGrid64 = grid::FieldGrid<f64>;
pub type GridDescriptor64 = grid::GridDescriptor<f64>;
pub type OpticalElement64 = elements::OpticalElement<f64>;
pub type TransferMatrix64 = propagate::TransferMatrix<f64>;
pub type SpdcGeometry64 = spdc::SpdcGeometry<f64>;
pub type ScanConfig64 = spdc::ScanConfig<f64>;
pub type CoincidenceProfile64 = spdc::CoincidenceProfile<f64>;
pub type KernelGrids64 = spdc::KernelGrids<f64>;
pub type PeakSet64 = analysis::PeakSet<f64>;
pub type FringeReport64 = analysis::FringeReport<f64>;

// f32 instantiations, for callers trading precision for memory.
pub type BeamParams32 = modes::BeamParams<f32>;
pub type ModeSuperposition32 = modes::ModeSuperposition<f32>;
pub type FieldGrid32 = grid::FieldGrid<f32>;
