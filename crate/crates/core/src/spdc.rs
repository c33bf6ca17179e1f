//! SPDC geometry bookkeeping and the two coincidence engines.
//!
//! The closed-form engine uses the pump-transfer law: with the pair born at
//! a single transverse point (thin crystal), the coincidence rate at
//! detector positions `(rho_s, rho_i)` is the pump intensity profile
//! propagated to the effective distance `Z0`, read at
//! `R = eta_s rho_s + eta_i rho_i` with
//!
//! `1/Z0 = (w_s/w_p)/z_s + (w_i/w_p)/z_i`,  `eta_j = (w_j/w_p)(Z0/z_j)`,
//!
//! so `eta_s + eta_i = 1` identically. The kernel engine instead builds
//! dense 1D Fresnel kernels per arm so amplitude and phase masks can be
//! inserted anywhere between the crystal and the detectors; with no
//! elements it reproduces the closed form, which it verifies on every run.

use num_complex::Complex;
use rayon::prelude::*;

use crate::elements::{Arm, OpticalElement};
use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::modes::ModeSuperposition;
use crate::propagate::{
    fresnel_transfer_1d, fresnel_well_sampled, spectral_transfer_1d, TransferMatrix,
};
use crate::real::Real;

/// Wavelengths, arm lengths and the derived transfer constants of one SPDC
/// setup. All derived quantities are computed at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdcGeometry<T> {
    lambda_p: T,
    lambda_s: T,
    lambda_i: T,
    z_s: T,
    z_i: T,
    z0: T,
    eta_s: T,
    eta_i: T,
}

impl<T: Real> SpdcGeometry<T> {
    pub fn lambda_p(&self) -> T {
        self.lambda_p
    }

    pub fn lambda_s(&self) -> T {
        self.lambda_s
    }

    pub fn lambda_i(&self) -> T {
        self.lambda_i
    }

    pub fn z_s(&self) -> T {
        self.z_s
    }

    pub fn z_i(&self) -> T {
        self.z_i
    }

    /// Effective pump propagation distance imprinted on the coincidences.
    pub fn z0(&self) -> T {
        self.z0
    }

    pub fn eta_s(&self) -> T {
        self.eta_s
    }

    pub fn eta_i(&self) -> T {
        self.eta_i
    }
}

/// Builds the geometry from pump/signal wavelengths and arm lengths.
///
/// The idler wavelength follows from energy conservation,
/// `1/lambda_i = 1/lambda_p - 1/lambda_s`; it is not rounded, so
/// `eta_s + eta_i = 1` holds to machine precision.
pub fn derive_geometry<T: Real>(
    lambda_p: T,
    lambda_s: T,
    z_s: T,
    z_i: T,
) -> Result<SpdcGeometry<T>> {
    if !(lambda_p > T::zero()) {
        return Err(Error::NonPositiveLength {
            name: "lambda_p",
            value: lambda_p.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(lambda_s > lambda_p) {
        return Err(Error::InvalidWavelengths {
            lambda_p: lambda_p.to_f64().unwrap_or(f64::NAN),
            lambda_s: lambda_s.to_f64().unwrap_or(f64::NAN),
        });
    }
    for (name, z) in [("z_s", z_s), ("z_i", z_i)] {
        if !(z > T::zero()) {
            return Err(Error::NonPositiveLength {
                name,
                value: z.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let lambda_i = lambda_p * lambda_s / (lambda_s - lambda_p);
    // Frequency fractions; the idler fraction is computed as 1 - w_s/w_p so
    // the pair sums to one exactly.
    let omega_s = lambda_p / lambda_s;
    let omega_i = T::one() - omega_s;
    let inv_z0 = omega_s / z_s + omega_i / z_i;
    let z0 = inv_z0.recip();
    Ok(SpdcGeometry {
        lambda_p,
        lambda_s,
        lambda_i,
        z_s,
        z_i,
        z0,
        eta_s: omega_s * z0 / z_s,
        eta_i: omega_i * z0 / z_i,
    })
}

/// Pump field propagated to the effective plane `Z0`, evaluated at a
/// transverse point. The pump superposition should carry the pump
/// wavelength of `geom`.
pub fn pump_profile_at_z0<T: Real>(
    pump: &ModeSuperposition<T>,
    geom: &SpdcGeometry<T>,
    point: (T, T),
) -> Result<Complex<T>> {
    pump.evaluate(point.0, point.1, geom.z0)
}

/// Detector trajectories of a 1D coincidence scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMode<T> {
    /// Signal scanned along x at y = 0, idler fixed at the given point.
    Heralded { idler: (T, T) },
    /// Both detectors at the same point: `rho_i = rho_s = (x, 0)`.
    Joint,
    /// Detectors displaced oppositely: `rho_i = (-x, 0)`, `rho_s = (x, 0)`.
    Counter,
}

/// One 1D scan: a detector trajectory plus the scan coordinate values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig<T> {
    pub mode: ScanMode<T>,
    pub positions: Vec<T>,
}

impl<T: Real> ScanConfig<T> {
    pub fn heralded(positions: Vec<T>, idler: (T, T)) -> Self {
        Self {
            mode: ScanMode::Heralded { idler },
            positions,
        }
    }

    pub fn joint(positions: Vec<T>) -> Self {
        Self {
            mode: ScanMode::Joint,
            positions,
        }
    }

    pub fn counter(positions: Vec<T>) -> Self {
        Self {
            mode: ScanMode::Counter,
            positions,
        }
    }
}

/// Which engine produced a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    KernelEngine,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed_form",
            Provenance::KernelEngine => "kernel_engine",
        }
    }
}

/// Coincidence rates along a scan, in arbitrary units (`|C2|^2 = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceProfile<T> {
    pub positions: Vec<T>,
    pub rates: Vec<T>,
    pub geometry: SpdcGeometry<T>,
    pub provenance: Provenance,
}

impl<T: Real> CoincidenceProfile<T> {
    pub fn max_rate(&self) -> T {
        self.rates.iter().fold(T::zero(), |a, &r| a.max(r))
    }

    /// Same profile with the peak scaled to one (unchanged if all zero).
    /// Profiles are in arbitrary units, so cross-engine comparisons go
    /// through this normalisation.
    pub fn peak_normalized(&self) -> Self {
        let max = self.max_rate();
        if max <= T::zero() {
            return self.clone();
        }
        Self {
            positions: self.positions.clone(),
            rates: self.rates.iter().map(|&r| r / max).collect(),
            geometry: self.geometry,
            provenance: self.provenance,
        }
    }
}

fn transfer_point<T: Real>(geom: &SpdcGeometry<T>, mode: &ScanMode<T>, x: T) -> (T, T) {
    match mode {
        ScanMode::Heralded { idler } => (
            geom.eta_s * x + geom.eta_i * idler.0,
            geom.eta_i * idler.1,
        ),
        ScanMode::Joint => ((geom.eta_s + geom.eta_i) * x, T::zero()),
        ScanMode::Counter => ((geom.eta_s - geom.eta_i) * x, T::zero()),
    }
}

/// Closed-form coincidence scan: `rate(x) = |W(R(x); Z0)|^2`.
pub fn scan_closed_form<T: Real>(
    pump: &ModeSuperposition<T>,
    geom: &SpdcGeometry<T>,
    scan: &ScanConfig<T>,
) -> Result<CoincidenceProfile<T>> {
    let rates = scan
        .positions
        .par_iter()
        .map(|&x| {
            let r = transfer_point(geom, &scan.mode, x);
            pump_profile_at_z0(pump, geom, r).map(|a| a.norm_sqr())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoincidenceProfile {
        positions: scan.positions.clone(),
        rates,
        geometry: *geom,
        provenance: Provenance::ClosedForm,
    })
}

/// Closed-form 2D heralded map `C(x_s, y_s)` with the idler fixed.
/// Returned row-major with y as the outer index.
pub fn heralded_map_2d<T: Real>(
    pump: &ModeSuperposition<T>,
    geom: &SpdcGeometry<T>,
    xs: &[T],
    ys: &[T],
    idler: (T, T),
) -> Result<Vec<T>> {
    let rows: Vec<Result<Vec<T>>> = ys
        .par_iter()
        .map(|&y| {
            xs.iter()
                .map(|&x| {
                    let r = (
                        geom.eta_s * x + geom.eta_i * idler.0,
                        geom.eta_s * y + geom.eta_i * idler.1,
                    );
                    pump_profile_at_z0(pump, geom, r).map(|a| a.norm_sqr())
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}

/// Crystal-plane source grid and sizing limits for the kernel engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGrids<T> {
    pub source_points: usize,
    pub source_half_width: T,
    pub max_intermediate_points: usize,
}

impl<T: Real> KernelGrids<T> {
    /// Source window of six pump waists, 512 points, intermediate grids
    /// capped at 8192 points.
    pub fn default_for(pump: &ModeSuperposition<T>) -> Self {
        Self {
            source_points: 512,
            source_half_width: T::of(6.0) * pump.params().waist_w0(),
            max_intermediate_points: 8192,
        }
    }
}

/// Relative L-infinity tolerance of the mandatory element-free cross-check
/// against the closed form.
const CROSS_CHECK_LIMIT: f64 = 0.05;

/// Builds the dense kernel of one arm: crystal-plane samples to field
/// values at the output positions, through every element of that arm.
fn arm_kernel<T: Real>(
    lambda: T,
    arm_length: T,
    elements: &[&OpticalElement<T>],
    src: &Axis<T>,
    out_positions: &[T],
    max_points: usize,
) -> Result<TransferMatrix<T>> {
    let k = (T::PI() + T::PI()) / lambda;
    let hw_out = out_positions
        .iter()
        .fold(T::zero(), |a, &x| a.max(x.abs()));

    // Group elements sharing a plane so they stack as one mask.
    let mut planes: Vec<(T, Vec<&OpticalElement<T>>)> = Vec::new();
    for e in elements {
        match planes.last_mut() {
            Some((z, v)) if (*z - e.z_plane).abs() <= T::of(1e-12) => v.push(e),
            _ => planes.push((e.z_plane, vec![e])),
        }
    }

    let hw_interior = T::of(1.5) * src.half_extent().max(hw_out);
    let mut acc: Option<TransferMatrix<T>> = None;
    let mut cur_axis = *src;
    let mut z_cur = T::zero();

    for (i, (z_e, elems)) in planes.iter().enumerate() {
        let dz = *z_e - z_cur;
        if dz > T::zero() {
            if fresnel_well_sampled(&cur_axis, hw_interior, dz, lambda) {
                // Size the intermediate grid for the hop that leaves it.
                let dz_next = if i + 1 < planes.len() {
                    planes[i + 1].0 - *z_e
                } else {
                    arm_length - *z_e
                };
                let dx_needed =
                    T::FRAC_PI_2() * dz_next / (k * (hw_interior + hw_interior.max(hw_out)));
                let n_needed = (T::of(2.0) * hw_interior / dx_needed)
                    .ceil()
                    .to_f64()
                    .unwrap_or(f64::INFINITY) as usize
                    + 1;
                if n_needed > max_points {
                    return Err(Error::HopUnderSampled {
                        from_z: z_e.to_f64().unwrap_or(f64::NAN),
                        to_z: (*z_e + dz_next).to_f64().unwrap_or(f64::NAN),
                        needed: n_needed,
                        cap: max_points,
                    });
                }
                let target = Axis::symmetric(hw_interior, n_needed.max(src.len()))?;
                let hop = fresnel_transfer_1d(&cur_axis, &target.values(), dz, lambda)?;
                acc = Some(match acc {
                    Some(m) => hop.compose(&m),
                    None => hop,
                });
                cur_axis = target;
            } else {
                // Hop too short for the dense chirp: spectral propagation
                // on the unchanged grid.
                let hop = spectral_transfer_1d(&cur_axis, dz, lambda)?;
                acc = Some(match acc {
                    Some(m) => hop.compose(&m),
                    None => hop,
                });
            }
        }
        let one = Complex::new(T::one(), T::zero());
        let mask: Vec<Complex<T>> = cur_axis
            .values()
            .into_iter()
            .map(|x| elems.iter().fold(one, |t, e| t * e.transmission(x)))
            .collect();
        acc = Some(
            acc.expect("elements sit strictly after the crystal, so a hop preceded the mask")
                .mask_output(&mask),
        );
        z_cur = *z_e;
    }

    let dz_final = arm_length - z_cur;
    if !fresnel_well_sampled(&cur_axis, hw_out, dz_final, lambda) {
        let dx_needed = T::FRAC_PI_2() * dz_final / (k * (cur_axis.half_extent() + hw_out));
        let needed = (cur_axis.span() / dx_needed)
            .ceil()
            .to_f64()
            .unwrap_or(f64::INFINITY) as usize
            + 1;
        return Err(Error::HopUnderSampled {
            from_z: z_cur.to_f64().unwrap_or(f64::NAN),
            to_z: arm_length.to_f64().unwrap_or(f64::NAN),
            needed,
            cap: max_points,
        });
    }
    let hop = fresnel_transfer_1d(&cur_axis, out_positions, dz_final, lambda)?;
    Ok(match acc {
        Some(m) => hop.compose(&m),
        None => hop,
    })
}

fn contract<T: Real>(
    ks: &TransferMatrix<T>,
    ki: &TransferMatrix<T>,
    pump_slice: &[Complex<T>],
    dx_src: T,
    row_wise_idler: bool,
) -> Vec<T> {
    let n_src = pump_slice.len();
    (0..ks.n_out())
        .into_par_iter()
        .map(|row| {
            let idler_row = if row_wise_idler { row } else { 0 };
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..n_src {
                acc = acc + ks.entry(row, j) * ki.entry(idler_row, j) * pump_slice[j];
            }
            // Each arm kernel carries one factor of the source spacing;
            // the pair amplitude is a single quadrature over the source.
            (acc / dx_src).norm_sqr()
        })
        .collect()
}

/// General biphoton coincidence scan with per-arm optical elements.
///
/// The pair amplitude is
/// `Psi(x_s, x_i) = sum_x0 W(x0; 0) K_s(x_s, x0) K_i(x_i, x0) dx0`
/// with `K_j` the Fresnel kernel of arm `j` at its own wavelength,
/// interleaved with the arm's element masks. Every call verifies its grids
/// by recomputing the element-free profile and comparing it to the closed
/// form; a mismatch beyond 5% fails with a resolution error.
pub fn biphoton_kernel_scan<T: Real>(
    pump: &ModeSuperposition<T>,
    geom: &SpdcGeometry<T>,
    elements: &[OpticalElement<T>],
    scan: &ScanConfig<T>,
    grids: &KernelGrids<T>,
) -> Result<CoincidenceProfile<T>> {
    let mut signal_elems: Vec<&OpticalElement<T>> = Vec::new();
    let mut idler_elems: Vec<&OpticalElement<T>> = Vec::new();
    for e in elements {
        let arm_length = match e.arm {
            Arm::Signal => geom.z_s,
            Arm::Idler => geom.z_i,
            Arm::Pump => return Err(Error::ElementWrongArm { arm: "pump" }),
        };
        if !(e.z_plane > T::zero() && e.z_plane < arm_length) {
            return Err(Error::ElementOutsideArm {
                z: e.z_plane.to_f64().unwrap_or(f64::NAN),
                arm_length: arm_length.to_f64().unwrap_or(f64::NAN),
            });
        }
        match e.arm {
            Arm::Signal => signal_elems.push(e),
            Arm::Idler => idler_elems.push(e),
            Arm::Pump => unreachable!(),
        }
    }
    let by_z = |a: &&OpticalElement<T>, b: &&OpticalElement<T>| {
        a.z_plane
            .partial_cmp(&b.z_plane)
            .expect("element planes are finite")
    };
    signal_elems.sort_by(by_z);
    idler_elems.sort_by(by_z);

    let (signal_out, idler_out, row_wise): (Vec<T>, Vec<T>, bool) = match &scan.mode {
        ScanMode::Heralded { idler } => {
            if idler.1 != T::zero() {
                return Err(Error::UnsupportedScan {
                    reason: "kernel engine is 1D; the fixed idler must sit at y = 0",
                });
            }
            (scan.positions.clone(), vec![idler.0], false)
        }
        ScanMode::Joint => (scan.positions.clone(), scan.positions.clone(), true),
        ScanMode::Counter => (
            scan.positions.clone(),
            scan.positions.iter().map(|&x| -x).collect(),
            true,
        ),
    };

    let src = Axis::symmetric(grids.source_half_width, grids.source_points)?;
    let dx_src = src.spacing();
    let pump_slice: Vec<Complex<T>> = src
        .values()
        .into_iter()
        .map(|x0| pump.evaluate(x0, T::zero(), T::zero()))
        .collect::<Result<Vec<_>>>()?;

    let cap = grids.max_intermediate_points;
    let ks = arm_kernel(
        geom.lambda_s,
        geom.z_s,
        &signal_elems,
        &src,
        &signal_out,
        cap,
    )?;
    let ki = arm_kernel(geom.lambda_i, geom.z_i, &idler_elems, &src, &idler_out, cap)?;
    let rates = contract(&ks, &ki, &pump_slice, dx_src, row_wise);

    // Mandatory resolution check: the element-free engine must agree with
    // the closed form.
    let (ks0, ki0) = if signal_elems.is_empty() && idler_elems.is_empty() {
        (None, None)
    } else {
        (
            Some(arm_kernel(
                geom.lambda_s,
                geom.z_s,
                &[],
                &src,
                &signal_out,
                cap,
            )?),
            Some(arm_kernel(geom.lambda_i, geom.z_i, &[], &src, &idler_out, cap)?),
        )
    };
    let rates0 = match (&ks0, &ki0) {
        (Some(a), Some(b)) => contract(a, b, &pump_slice, dx_src, row_wise),
        _ => rates.clone(),
    };
    let closed = scan_closed_form(pump, geom, scan)?;
    let max_engine = rates0.iter().fold(T::zero(), |a, &r| a.max(r));
    let max_closed = closed.max_rate();
    if max_engine <= T::zero() || max_closed <= T::zero() {
        return Err(Error::ResolutionCheck {
            max_rel_err: f64::INFINITY,
            limit: CROSS_CHECK_LIMIT,
        });
    }
    let mut max_err = T::zero();
    for (&e, &c) in rates0.iter().zip(closed.rates.iter()) {
        let diff = (e / max_engine - c / max_closed).abs();
        max_err = max_err.max(diff);
    }
    if max_err > T::of(CROSS_CHECK_LIMIT) {
        return Err(Error::ResolutionCheck {
            max_rel_err: max_err.to_f64().unwrap_or(f64::NAN),
            limit: CROSS_CHECK_LIMIT,
        });
    }

    Ok(CoincidenceProfile {
        positions: scan.positions.clone(),
        rates,
        geometry: *geom,
        provenance: Provenance::KernelEngine,
    })
}
