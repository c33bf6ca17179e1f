//! Free-space propagation: an FFT angular-spectrum propagator for sampled
//! fields and dense Fresnel transfer matrices for the biphoton engine.
//!
//! Both act on the field envelope (the forward plane-wave carrier
//! `exp(ikz)` is factored out), matching the convention of the analytic
//! mode evaluation in [`crate::modes`]. The two routes validate each other:
//! modal evolution is exact for pure superpositions, the numeric propagator
//! also handles fields after masks have broken the mode basis.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{Axis, FieldGrid};
use crate::real::{pairwise_sum, Real};

/// Fraction of total spectral energy tolerated near the spectral window
/// edge before a sampling warning is emitted.
const SPECTRAL_EDGE_WARN: f64 = 1e-6;
/// Fraction of total energy tolerated in the outer 10% of the spatial
/// window after propagation before the step is rejected.
const SPATIAL_EDGE_LIMIT: f64 = 1e-3;

/// FFT angular frequency for bin `i` of an `n`-point grid with spacing `d`.
fn fft_freq<T: Real>(i: usize, n: usize, d: T) -> T {
    let idx = if i <= n / 2 {
        i as isize
    } else {
        i as isize - n as isize
    };
    let two_pi = T::PI() + T::PI();
    two_pi * T::of(idx as f64) / (T::of_usize(n) * d)
}

/// Envelope transfer phase `(sqrt(k^2 - q^2) - k) dz`, computed in the
/// cancellation-free form `-q^2 dz / (k + sqrt(k^2 - q^2))`. Returns `None`
/// for evanescent components (`q^2 > k^2`), which are discarded.
fn transfer_phase<T: Real>(k: T, q_sq: T, delta_z: T) -> Option<T> {
    let k_sq = k * k;
    if q_sq > k_sq {
        return None;
    }
    Some(-q_sq * delta_z / (k + (k_sq - q_sq).sqrt()))
}

fn edge_energy_fraction<T: Real>(samples: &[Complex<T>], edge_cells: usize) -> T {
    let sq: Vec<T> = samples.iter().map(|s| s.norm_sqr()).collect();
    let total = pairwise_sum(&sq);
    if total <= T::zero() {
        return T::zero();
    }
    let n = sq.len();
    let edge: Vec<T> = sq[..edge_cells.min(n)]
        .iter()
        .chain(sq[n.saturating_sub(edge_cells)..].iter())
        .copied()
        .collect();
    pairwise_sum(&edge) / total
}

/// Propagates a sampled field by `delta_z` via the angular spectrum:
/// FFT, multiply each plane wave by `exp(i (sqrt(k^2-q^2) - k) dz)`
/// (evanescent components zeroed), inverse FFT.
///
/// `delta_z = 0` is the identity. A warning is logged when a noticeable
/// fraction of the spectrum sits near the spectral window edge before the
/// step; the step is rejected if the propagated beam runs into the spatial
/// window edge.
pub fn propagate_angular_spectrum<T: Real>(
    f: &FieldGrid<T>,
    delta_z: T,
) -> Result<FieldGrid<T>> {
    if delta_z == T::zero() {
        return Ok(f.clone());
    }
    let k = (T::PI() + T::PI()) / f.wavelength();
    let mut planner = FftPlanner::<T>::new();

    let mut spectrum_then_back = |samples: &mut Vec<Complex<T>>| -> Result<()> {
        match f.y_axis() {
            None => {
                let n = f.x_axis().len();
                let dx = f.x_axis().spacing();
                planner.plan_fft_forward(n).process(samples);
                check_spectral_edges(samples, 1);
                for (i, s) in samples.iter_mut().enumerate() {
                    let q = fft_freq(i, n, dx);
                    *s = match transfer_phase(k, q * q, delta_z) {
                        Some(phi) => *s * Complex::from_polar(T::one(), phi),
                        None => Complex::new(T::zero(), T::zero()),
                    };
                }
                planner.plan_fft_inverse(n).process(samples);
                let scale = T::of_usize(n).recip();
                for s in samples.iter_mut() {
                    *s = *s * scale;
                }
                Ok(())
            }
            Some(y_axis) => {
                let nx = f.x_axis().len();
                let ny = y_axis.len();
                let dx = f.x_axis().spacing();
                let dy = y_axis.spacing();

                let row_fft = planner.plan_fft_forward(nx);
                for row in samples.chunks_mut(nx) {
                    row_fft.process(row);
                }
                let col_fft = planner.plan_fft_forward(ny);
                let mut col = vec![Complex::new(T::zero(), T::zero()); ny];
                for ix in 0..nx {
                    for iy in 0..ny {
                        col[iy] = samples[iy * nx + ix];
                    }
                    col_fft.process(&mut col);
                    for iy in 0..ny {
                        samples[iy * nx + ix] = col[iy];
                    }
                }
                check_spectral_edges(samples, 2);

                for iy in 0..ny {
                    let qy = fft_freq(iy, ny, dy);
                    for ix in 0..nx {
                        let qx = fft_freq(ix, nx, dx);
                        let s = &mut samples[iy * nx + ix];
                        *s = match transfer_phase(k, qx * qx + qy * qy, delta_z) {
                            Some(phi) => *s * Complex::from_polar(T::one(), phi),
                            None => Complex::new(T::zero(), T::zero()),
                        };
                    }
                }

                let row_ifft = planner.plan_fft_inverse(nx);
                for row in samples.chunks_mut(nx) {
                    row_ifft.process(row);
                }
                let col_ifft = planner.plan_fft_inverse(ny);
                for ix in 0..nx {
                    for iy in 0..ny {
                        col[iy] = samples[iy * nx + ix];
                    }
                    col_ifft.process(&mut col);
                    for iy in 0..ny {
                        samples[iy * nx + ix] = col[iy];
                    }
                }
                let scale = (T::of_usize(nx) * T::of_usize(ny)).recip();
                for s in samples.iter_mut() {
                    *s = *s * scale;
                }
                Ok(())
            }
        }
    };

    let mut samples = f.samples().to_vec();
    spectrum_then_back(&mut samples)?;

    let out = f.with_samples(f.z_plane() + delta_z, samples);
    let edge_cells = (out.x_axis().len() / 10).max(1);
    let fraction = match out.y_axis() {
        None => edge_energy_fraction(out.samples(), edge_cells),
        Some(y_axis) => {
            // Check x edges row-wise and y edges column-wise.
            let nx = out.x_axis().len();
            let ny = y_axis.len();
            let sq: Vec<T> = out.samples().iter().map(|s| s.norm_sqr()).collect();
            let total = pairwise_sum(&sq).max(T::of(f64::MIN_POSITIVE));
            let ex = (nx / 10).max(1);
            let ey = (ny / 10).max(1);
            let mut edge = T::zero();
            for iy in 0..ny {
                for ix in 0..nx {
                    let on_x_edge = ix < ex || ix >= nx - ex;
                    let on_y_edge = iy < ey || iy >= ny - ey;
                    if on_x_edge || on_y_edge {
                        edge += sq[iy * nx + ix];
                    }
                }
            }
            edge / total
        }
    };
    if fraction > T::of(SPATIAL_EDGE_LIMIT) {
        return Err(Error::WindowingLoss {
            fraction: fraction.to_f64().unwrap_or(f64::NAN),
            limit: SPATIAL_EDGE_LIMIT,
        });
    }
    Ok(out)
}

fn check_spectral_edges<T: Real>(spectrum: &[Complex<T>], _dims: usize) {
    // Outer 10% of the spectral window = |index offset from DC| > 0.45 n.
    let n = spectrum.len();
    let sq: Vec<T> = spectrum.iter().map(|s| s.norm_sqr()).collect();
    let total = pairwise_sum(&sq);
    if total <= T::zero() {
        return;
    }
    let lo = (n as f64 * 0.45) as usize;
    let hi = n - lo;
    let edge: Vec<T> = sq[lo..hi].to_vec();
    let fraction = pairwise_sum(&edge) / total;
    if fraction > T::of(SPECTRAL_EDGE_WARN) {
        log::warn!(
            "field under-sampled: {:.3e} of spectral energy near the window edge",
            fraction.to_f64().unwrap_or(f64::NAN)
        );
    }
}

/// Dense 1D propagation kernel mapping samples on one grid (times its
/// spacing) to field values at arbitrary output positions.
#[derive(Debug, Clone)]
pub struct TransferMatrix<T> {
    kernel: Vec<Complex<T>>,
    x_in: Axis<T>,
    x_out: Vec<T>,
    delta_z: T,
    wavelength: T,
}

impl<T: Real> TransferMatrix<T> {
    pub fn n_in(&self) -> usize {
        self.x_in.len()
    }

    pub fn n_out(&self) -> usize {
        self.x_out.len()
    }

    pub fn x_in(&self) -> &Axis<T> {
        &self.x_in
    }

    pub fn x_out(&self) -> &[T] {
        &self.x_out
    }

    pub fn delta_z(&self) -> T {
        self.delta_z
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.kernel[row * self.n_in() + col]
    }

    /// Applies the kernel to input samples; `field` must live on `x_in`.
    pub fn apply(&self, field: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(field.len(), self.n_in(), "field not on the input grid");
        let n_in = self.n_in();
        self.kernel
            .par_chunks(n_in)
            .map(|row| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (k, f) in row.iter().zip(field.iter()) {
                    acc = acc + *k * *f;
                }
                acc
            })
            .collect()
    }

    /// Composes `self` after `first` (so `self.compose(first)` maps the
    /// input of `first` to the output of `self`).
    pub fn compose(&self, first: &TransferMatrix<T>) -> TransferMatrix<T> {
        assert_eq!(
            self.n_in(),
            first.n_out(),
            "inner grids do not match for composition"
        );
        let n_mid = self.n_in();
        let n_in = first.n_in();
        let kernel: Vec<Complex<T>> = self
            .kernel
            .par_chunks(n_mid)
            .flat_map_iter(|row| {
                let mut out_row = vec![Complex::new(T::zero(), T::zero()); n_in];
                for (mid, k) in row.iter().enumerate() {
                    if k.norm_sqr() == T::zero() {
                        continue;
                    }
                    let first_row = &first.kernel[mid * n_in..(mid + 1) * n_in];
                    for (o, f) in out_row.iter_mut().zip(first_row.iter()) {
                        *o = *o + *k * *f;
                    }
                }
                out_row
            })
            .collect();
        TransferMatrix {
            kernel,
            x_in: first.x_in,
            x_out: self.x_out.clone(),
            delta_z: self.delta_z + first.delta_z,
            wavelength: self.wavelength,
        }
    }

    /// Applies a diagonal mask on the output plane: row `i` of the kernel
    /// is scaled by `transmission[i]`.
    pub fn mask_output(&self, transmission: &[Complex<T>]) -> TransferMatrix<T> {
        assert_eq!(transmission.len(), self.n_out());
        let n_in = self.n_in();
        let kernel = self
            .kernel
            .iter()
            .enumerate()
            .map(|(i, k)| *k * transmission[i / n_in])
            .collect();
        TransferMatrix {
            kernel,
            x_in: self.x_in,
            x_out: self.x_out.clone(),
            delta_z: self.delta_z,
            wavelength: self.wavelength,
        }
    }
}

/// Phase-sampling check for the dense Fresnel kernel: adjacent input
/// samples must advance the chirp phase by well under pi across the whole
/// output range.
pub fn fresnel_well_sampled<T: Real>(
    grid_in: &Axis<T>,
    max_abs_out: T,
    delta_z: T,
    wavelength: T,
) -> bool {
    let k = (T::PI() + T::PI()) / wavelength;
    let reach = grid_in.half_extent() + max_abs_out;
    let phase_step = k * reach * grid_in.spacing() / delta_z;
    phase_step <= T::FRAC_PI_2()
}

/// Dense discretisation of the 1D Fresnel kernel
/// `sqrt(1/(i lambda dz)) exp(i k (x_out - x_in)^2 / (2 dz))` with the input
/// spacing folded in, so applying it to samples performs the propagation
/// quadrature. `delta_z` must be strictly positive (use the identity for
/// zero).
pub fn fresnel_transfer_1d<T: Real>(
    grid_in: &Axis<T>,
    x_out: &[T],
    delta_z: T,
    wavelength: T,
) -> Result<TransferMatrix<T>> {
    if !(delta_z > T::zero()) {
        return Err(Error::InvalidDistance {
            delta_z: delta_z.to_f64().unwrap_or(f64::NAN),
        });
    }
    let k = (T::PI() + T::PI()) / wavelength;
    let dx = grid_in.spacing();
    let amp = (wavelength * delta_z).sqrt().recip() * dx;
    let prefactor = Complex::from_polar(amp, -T::FRAC_PI_4());
    let xs_in = grid_in.values();
    let half = T::of(0.5);

    let kernel: Vec<Complex<T>> = x_out
        .par_iter()
        .flat_map_iter(|&xo| {
            let pref = prefactor;
            xs_in.iter().map(move |&xi| {
                let d = xo - xi;
                pref * Complex::from_polar(T::one(), half * k * d * d / delta_z)
            })
        })
        .collect();

    Ok(TransferMatrix {
        kernel,
        x_in: *grid_in,
        x_out: x_out.to_vec(),
        delta_z,
        wavelength,
    })
}

/// Circulant angular-spectrum propagator on a single grid, used for hops
/// too short for the dense Fresnel kernel to be sampled adequately. Input
/// and output share the axis; wrap-around is negligible while the field
/// stays clear of the window edges.
pub fn spectral_transfer_1d<T: Real>(
    grid: &Axis<T>,
    delta_z: T,
    wavelength: T,
) -> Result<TransferMatrix<T>> {
    if !(delta_z > T::zero()) {
        return Err(Error::InvalidDistance {
            delta_z: delta_z.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = grid.len();
    let dx = grid.spacing();
    let k = (T::PI() + T::PI()) / wavelength;

    let mut column: Vec<Complex<T>> = (0..n)
        .map(|i| {
            let q = fft_freq(i, n, dx);
            match transfer_phase(k, q * q, delta_z) {
                Some(phi) => Complex::from_polar(T::one(), phi),
                None => Complex::new(T::zero(), T::zero()),
            }
        })
        .collect();
    FftPlanner::<T>::new()
        .plan_fft_inverse(n)
        .process(&mut column);
    let scale = T::of_usize(n).recip();
    for c in column.iter_mut() {
        *c = *c * scale;
    }

    let mut kernel = vec![Complex::new(T::zero(), T::zero()); n * n];
    for row in 0..n {
        for col in 0..n {
            kernel[row * n + col] = column[(n + row - col) % n];
        }
    }
    Ok(TransferMatrix {
        kernel,
        x_in: *grid,
        x_out: grid.values(),
        delta_z,
        wavelength,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_grid, total_power, GridDescriptor};
    use crate::modes::{BeamParams, ModeIndex, ModeSuperposition};
    use approx::assert_relative_eq;
    use num_complex::Complex;

    fn gaussian_1d(axis: &Axis<f64>, w: f64) -> Vec<Complex<f64>> {
        axis.values()
            .into_iter()
            .map(|x| Complex::new((-x * x / (w * w)).exp(), 0.0))
            .collect()
    }

    fn rel_l2(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
        let num: f64 = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn zero_distance_is_identity() {
        let p = BeamParams::new(405e-9, 1e-4).unwrap();
        let s = ModeSuperposition::new(
            p,
            vec![(ModeIndex::new(0, 0), Complex::new(1.0, 0.0))],
        )
        .unwrap();
        let desc = GridDescriptor::one_dim(Axis::symmetric(5e-4, 256).unwrap());
        let g = sample_grid(&s, &desc, 0.0).unwrap();
        let out = propagate_angular_spectrum(&g, 0.0).unwrap();
        assert_eq!(g.samples(), out.samples());
    }

    #[test]
    fn gaussian_propagates_to_analytic_width() {
        // 1D propagation of the y = 0 slice of a 2D mode differs from the
        // 2D mode's slice by the y-factor sqrt(w0/w) e^{-i atan(z~)/2},
        // which is common to every n = 0 term.
        let p = BeamParams::<f64>::new(405e-9, 1e-4).unwrap();
        let zr = p.rayleigh_zr();
        let s = ModeSuperposition::new(
            p,
            vec![(ModeIndex::new(0, 0), Complex::new(1.0, 0.0))],
        )
        .unwrap();
        let axis = Axis::symmetric(8.0 * p.width_at(zr), 512).unwrap();
        let g = sample_grid(&s, &GridDescriptor::one_dim(axis), 0.0).unwrap();
        let propagated = propagate_angular_spectrum(&g, zr).unwrap();
        let zn = 1.0;
        let y_factor = Complex::from_polar(
            (p.waist_w0() / p.width_at(zr)).sqrt(),
            -0.5 * f64::atan(zn),
        );
        let corrected: Vec<Complex<f64>> = propagated
            .samples()
            .iter()
            .map(|&s| s * y_factor)
            .collect();
        let analytic = sample_grid(&s, &GridDescriptor::one_dim(axis), zr).unwrap();
        assert!(rel_l2(&corrected, analytic.samples()) < 1e-3);
        assert_relative_eq!(
            total_power(&propagated),
            total_power(&g),
            max_relative = 1e-10
        );
    }

    #[test]
    fn propagation_2d_matches_modes() {
        let p = BeamParams::new(405e-9, 1e-4).unwrap();
        let zr = p.rayleigh_zr();
        let s = ModeSuperposition::new(
            p,
            vec![(ModeIndex::new(1, 1), Complex::new(1.0, 0.0))],
        )
        .unwrap();
        let axis = Axis::symmetric(8.0 * p.width_at(zr), 256).unwrap();
        let desc = GridDescriptor::two_dim(axis, axis);
        let g = sample_grid(&s, &desc, 0.0).unwrap();
        let propagated = propagate_angular_spectrum(&g, zr).unwrap();
        let analytic = sample_grid(&s, &desc, zr).unwrap();
        assert!(rel_l2(propagated.samples(), analytic.samples()) < 1e-3);
        assert_relative_eq!(
            total_power(&propagated),
            total_power(&g),
            max_relative = 1e-10
        );
    }

    #[test]
    fn outgrowing_the_window_is_rejected() {
        let p = BeamParams::new(405e-9, 1e-4).unwrap();
        let s = ModeSuperposition::new(
            p,
            vec![(ModeIndex::new(0, 0), Complex::new(1.0, 0.0))],
        )
        .unwrap();
        // Window barely covers the waist; after 3 z_R the beam is ~3x wider.
        let axis = Axis::symmetric(2e-4, 256).unwrap();
        let g = sample_grid(&s, &GridDescriptor::one_dim(axis), 0.0).unwrap();
        let out = propagate_angular_spectrum(&g, 3.0 * p.rayleigh_zr());
        assert!(matches!(out, Err(Error::WindowingLoss { .. })));
    }

    #[test]
    fn fresnel_rejects_zero_distance() {
        let axis = Axis::symmetric(1e-3, 64).unwrap();
        let out = fresnel_transfer_1d(&axis, &axis.values(), 0.0, 780e-9);
        assert!(matches!(out, Err(Error::InvalidDistance { .. })));
    }

    #[test]
    fn fresnel_delta_input_reproduces_kernel_column() {
        let axis = Axis::symmetric(1e-3, 128).unwrap();
        let dz = 0.3;
        let m = fresnel_transfer_1d(&axis, &axis.values(), dz, 780e-9).unwrap();
        let mut field = vec![Complex::new(0.0, 0.0); 128];
        field[40] = Complex::new(1.0, 0.0);
        let out = m.apply(&field);
        for row in 0..128 {
            let diff = (out[row] - m.entry(row, 40)).norm();
            assert!(diff < 1e-14);
        }
    }

    #[test]
    fn fresnel_matches_gaussian_evolution() {
        // 1D Gaussian beam: w(z) growth of the intensity profile.
        let w0 = 1e-4;
        let lambda = 780e-9;
        let zr = std::f64::consts::PI * w0 * w0 / lambda;
        let axis_in = Axis::symmetric(6.0 * w0, 1024).unwrap();
        let w_out = w0 * 2f64.sqrt();
        let axis_out = Axis::symmetric(6.0 * w_out, 512).unwrap();
        let m = fresnel_transfer_1d(&axis_in, &axis_out.values(), zr, lambda).unwrap();
        let out = m.apply(&gaussian_1d(&axis_in, w0));
        // analytic 1D envelope: (w0/w)^{1/2} exp(-x^2 (1 - i z~)/w^2) e^{-i atan(z~)/2}
        let analytic: Vec<Complex<f64>> = axis_out
            .values()
            .into_iter()
            .map(|x| {
                let zn = 1.0;
                let w = w_out;
                let mag = (w0 / w).sqrt() * (-x * x / (w * w)).exp();
                let phase = zn * x * x / (w * w) - 0.5 * zn.atan();
                Complex::from_polar(mag, phase)
            })
            .collect();
        assert!(rel_l2(&out, &analytic) < 1e-2);
    }

    #[test]
    fn fresnel_composition_semigroup() {
        let lambda = 780e-9;
        let w0 = 1e-4;
        let zr = std::f64::consts::PI * w0 * w0 / lambda;
        let dz = zr;
        let axis = Axis::symmetric(8.0 * w0 * 2f64.sqrt(), 768).unwrap();
        let field = gaussian_1d(&axis, w0);

        let half = fresnel_transfer_1d(&axis, &axis.values(), dz / 2.0, lambda).unwrap();
        let full = fresnel_transfer_1d(&axis, &axis.values(), dz, lambda).unwrap();
        let two_steps = half.apply(&half.apply(&field));
        let one_step = full.apply(&field);
        assert!(rel_l2(&two_steps, &one_step) < 1e-3);

        let composed = half.compose(&half);
        assert_relative_eq!(composed.delta_z(), dz);
        let via_matrix = composed.apply(&field);
        assert!(rel_l2(&via_matrix, &two_steps) < 1e-10);
    }

    #[test]
    fn transfer_matrix_maps_zero_to_zero() {
        let axis = Axis::symmetric(1e-3, 64).unwrap();
        let m = fresnel_transfer_1d(&axis, &axis.values(), 0.1, 780e-9).unwrap();
        let out = m.apply(&vec![Complex::new(0.0, 0.0); 64]);
        assert!(out.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn fresnel_consistent_with_angular_spectrum() {
        let p = BeamParams::new(780e-9, 1e-4).unwrap();
        let zr = p.rayleigh_zr();
        let s = ModeSuperposition::new(
            p,
            vec![(ModeIndex::new(0, 0), Complex::new(1.0, 0.0))],
        )
        .unwrap();
        let axis = Axis::symmetric(8.0 * p.width_at(zr), 1024).unwrap();
        let g = sample_grid(&s, &GridDescriptor::one_dim(axis), 0.0).unwrap();

        let via_fft = propagate_angular_spectrum(&g, zr).unwrap();
        let m = fresnel_transfer_1d(&axis, &axis.values(), zr, 780e-9).unwrap();
        let via_matrix = m.apply(g.samples());
        assert!(rel_l2(&via_matrix, via_fft.samples()) < 1e-2);
    }

    #[test]
    fn spectral_matrix_matches_fft_propagation() {
        let p = BeamParams::new(780e-9, 1e-4).unwrap();
        let s = ModeSuperposition::new(
            p,
            vec![(ModeIndex::new(2, 0), Complex::new(1.0, 0.0))],
        )
        .unwrap();
        let axis = Axis::symmetric(8e-4, 256).unwrap();
        let g = sample_grid(&s, &GridDescriptor::one_dim(axis), 0.0).unwrap();
        let dz = 1e-3;
        let via_fft = propagate_angular_spectrum(&g, dz).unwrap();
        let m = spectral_transfer_1d(&axis, dz, 780e-9).unwrap();
        let via_matrix = m.apply(g.samples());
        assert!(rel_l2(&via_matrix, via_fft.samples()) < 1e-10);
    }
}
