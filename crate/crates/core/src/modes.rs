//! Hermite-Gauss modes, Gouy phases, and finite mode superpositions.
//!
//! Fields are complex envelopes relative to the forward plane-wave carrier,
//! normalised so that the transverse 2D intensity integrates to one. A mode
//! of total order `N = m + n` accumulates the Gouy phase
//! `phi_N(z) = (N + 1) atan(z / z_R)`; that order dependence is the only
//! source of z-dependent relative phase between superposed modes, which is
//! what drives the self-splitting dynamics.

use num_complex::Complex;
use std::f64::consts;

use crate::error::{Error, Result};
use crate::real::Real;

/// Highest Hermite order evaluated by the three-term recurrence.
pub const MAX_HERMITE_ORDER: u32 = 30;

/// Wavelength, waist and the derived Rayleigh length of one monochromatic
/// paraxial beam. The Rayleigh length is always `pi w0^2 / lambda`; it is
/// computed at construction and never stored inconsistently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams<T> {
    wavelength: T,
    waist_w0: T,
    rayleigh_zr: T,
}

impl<T: Real> BeamParams<T> {
    pub fn new(wavelength: T, waist_w0: T) -> Result<Self> {
        if !(wavelength > T::zero()) || !wavelength.is_finite() {
            return Err(Error::NonPositiveLength {
                name: "wavelength",
                value: wavelength.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !(waist_w0 > T::zero()) || !waist_w0.is_finite() {
            return Err(Error::NonPositiveLength {
                name: "waist_w0",
                value: waist_w0.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            wavelength,
            waist_w0,
            rayleigh_zr: T::PI() * waist_w0 * waist_w0 / wavelength,
        })
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    pub fn waist_w0(&self) -> T {
        self.waist_w0
    }

    pub fn rayleigh_zr(&self) -> T {
        self.rayleigh_zr
    }

    /// Free-space wavenumber `2 pi / lambda`.
    pub fn wavenumber(&self) -> T {
        (T::PI() + T::PI()) / self.wavelength
    }

    /// Beam width `w(z) = w0 sqrt(1 + (z/z_R)^2)`.
    pub fn width_at(&self, z: T) -> T {
        let zn = z / self.rayleigh_zr;
        self.waist_w0 * (T::one() + zn * zn).sqrt()
    }
}

/// Transverse mode indices `(m, n)`; the total order is `m + n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    m: u32,
    n: u32,
}

impl ModeIndex {
    pub fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Total order `N = m + n`.
    pub fn order(&self) -> u32 {
        self.m + self.n
    }
}

/// Dimensionless coordinates `(x/w(z), y/w(z), z/z_R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPoint<T> {
    pub x_norm: T,
    pub y_norm: T,
    pub z_norm: T,
}

impl<T: Real> NormalizedPoint<T> {
    pub fn from_physical(params: &BeamParams<T>, x: T, y: T, z: T) -> Self {
        let z_norm = z / params.rayleigh_zr();
        let w = params.width_at(z);
        Self {
            x_norm: x / w,
            y_norm: y / w,
            z_norm,
        }
    }

    pub fn to_physical(&self, params: &BeamParams<T>) -> (T, T, T) {
        let z = self.z_norm * params.rayleigh_zr();
        let w = params.width_at(z);
        (self.x_norm * w, self.y_norm * w, z)
    }
}

/// Physicists' Hermite polynomial `H_j(u)` via the three-term recurrence
/// `H_{j+1} = 2u H_j - 2j H_{j-1}`. Orders above [`MAX_HERMITE_ORDER`] are
/// rejected before the recurrence can overflow.
pub fn hermite_poly<T: Real>(j: u32, u: T) -> Result<T> {
    if j > MAX_HERMITE_ORDER {
        return Err(Error::UnsupportedHermiteOrder {
            order: j,
            max: MAX_HERMITE_ORDER,
        });
    }
    let two = T::of(2.0);
    let mut h_prev = T::one();
    if j == 0 {
        return Ok(h_prev);
    }
    let mut h = two * u;
    for k in 1..j {
        let next = two * u * h - two * T::of_usize(k as usize) * h_prev;
        h_prev = h;
        h = next;
    }
    Ok(h)
}

/// Gouy phase `(N + 1) atan(z_norm)` of a mode with total order `N`.
///
/// Strictly increasing in `z_norm` and bounded by `(N + 1) pi / 2` in
/// magnitude.
pub fn gouy_phase<T: Real>(order_n: u32, z_norm: T) -> T {
    T::of_usize(order_n as usize + 1) * z_norm.atan()
}

/// ln(n!) accumulated in double precision; exact enough for any order the
/// Hermite guard admits.
fn ln_factorial(n: u32) -> f64 {
    (2..=n as u64).map(|k| (k as f64).ln()).sum()
}

/// `C_{m,n} = sqrt(2/pi) / sqrt(2^N m! n!)`, the mode normalisation
/// constant, evaluated through logarithms to avoid factorial overflow.
fn norm_constant<T: Real>(mode: ModeIndex) -> T {
    let ln = mode.order() as f64 * consts::LN_2
        + ln_factorial(mode.m())
        + ln_factorial(mode.n());
    T::of((2.0 / consts::PI).sqrt() * (-0.5 * ln).exp())
}

/// Complex Hermite-Gauss field at a physical point, in units of 1/m.
///
/// `HG_{m,n} = C_{m,n}/w(z) H_m(sqrt2 x~) H_n(sqrt2 y~)
///             exp(-(1 - i z~)(x~^2 + y~^2)) exp(-i phi_N(z))`
///
/// The `1/w(z)` amplitude factor makes the transverse L2 norm exactly one in
/// 2D; the `+i z~ r~^2` term is the wavefront curvature consistent with
/// forward angular-spectrum propagation `exp(i sqrt(k^2 - q^2) z)` of the
/// envelope. The overall plane-wave phase `exp(ikz)` is not included.
pub fn hg_field<T: Real>(
    mode: ModeIndex,
    params: &BeamParams<T>,
    x: T,
    y: T,
    z: T,
) -> Result<Complex<T>> {
    let p = NormalizedPoint::from_physical(params, x, y, z);
    let w = params.width_at(z);
    let sqrt2 = T::SQRT_2();
    let hm = hermite_poly(mode.m(), sqrt2 * p.x_norm)?;
    let hn = hermite_poly(mode.n(), sqrt2 * p.y_norm)?;
    let r2 = p.x_norm * p.x_norm + p.y_norm * p.y_norm;
    let magnitude = norm_constant::<T>(mode) / w * hm * hn * (-r2).exp();
    let phase = p.z_norm * r2 - gouy_phase(mode.order(), p.z_norm);
    Ok(Complex::from_polar(magnitude, phase))
}

/// A finite list of `(mode, complex coefficient)` terms over shared beam
/// parameters. Modes are orthonormal, so the total power of the field is
/// the sum of `|coefficient|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSuperposition<T> {
    params: BeamParams<T>,
    terms: Vec<(ModeIndex, Complex<T>)>,
}

impl<T: Real> ModeSuperposition<T> {
    /// Builds a superposition, rejecting duplicate mode indices.
    pub fn new(params: BeamParams<T>, terms: Vec<(ModeIndex, Complex<T>)>) -> Result<Self> {
        for (i, (mode, _)) in terms.iter().enumerate() {
            if terms[..i].iter().any(|(other, _)| other == mode) {
                return Err(Error::DuplicateMode {
                    m: mode.m(),
                    n: mode.n(),
                });
            }
        }
        Ok(Self { params, terms })
    }

    pub fn params(&self) -> &BeamParams<T> {
        &self.params
    }

    pub fn terms(&self) -> &[(ModeIndex, Complex<T>)] {
        &self.terms
    }

    /// `sum |c|^2` over the terms.
    pub fn total_power(&self) -> T {
        let powers: Vec<T> = self.terms.iter().map(|(_, c)| c.norm_sqr()).collect();
        crate::real::pairwise_sum(&powers)
    }

    /// Returns the same superposition scaled to unit total power. A zero
    /// superposition is returned unchanged.
    pub fn normalized(&self) -> Self {
        let power = self.total_power();
        if power <= T::zero() {
            return self.clone();
        }
        let scale = power.sqrt().recip();
        let terms = self
            .terms
            .iter()
            .map(|&(mode, c)| (mode, c * scale))
            .collect();
        Self {
            params: self.params,
            terms,
        }
    }

    /// Coherent sum of the term fields at a physical point.
    pub fn evaluate(&self, x: T, y: T, z: T) -> Result<Complex<T>> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(mode, coeff) in &self.terms {
            acc = acc + coeff * hg_field(mode, &self.params, x, y, z)?;
        }
        Ok(acc)
    }
}

/// Coherent field of a superposition at a physical point.
pub fn evaluate_superposition<T: Real>(
    s: &ModeSuperposition<T>,
    x: T,
    y: T,
    z: T,
) -> Result<Complex<T>> {
    s.evaluate(x, y, z)
}

/// The self-splitting superposition `HG00 - sqrt2 e^{i theta_c} HG20`.
///
/// Total power is 3 before any normalisation; the control phase lives
/// entirely in the HG20 coefficient so arbitrary superpositions stay
/// representable through [`ModeSuperposition`].
pub fn self_splitting_modes<T: Real>(params: BeamParams<T>, theta_c: T) -> ModeSuperposition<T> {
    let hg20_coeff = -Complex::from_polar(T::SQRT_2(), theta_c);
    ModeSuperposition::new(
        params,
        vec![
            (ModeIndex::new(0, 0), Complex::new(T::one(), T::zero())),
            (ModeIndex::new(2, 0), hg20_coeff),
        ],
    )
    .expect("the two component modes are distinct")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn beam() -> BeamParams<f64> {
        BeamParams::new(405e-9, 1e-4).unwrap()
    }

    #[test]
    fn rayleigh_length_is_derived() {
        let p = beam();
        assert_relative_eq!(p.rayleigh_zr(), PI * 1e-8 / 405e-9, max_relative = 1e-15);
    }

    #[test]
    fn beam_params_reject_nonpositive_inputs() {
        assert!(BeamParams::new(0.0, 1e-4).is_err());
        assert!(BeamParams::new(405e-9, -1e-4).is_err());
    }

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite_poly::<f64>(0, 5.0).unwrap(), 1.0);
        assert_eq!(hermite_poly::<f64>(1, 1.0).unwrap(), 2.0);
        assert_eq!(hermite_poly::<f64>(2, 0.0).unwrap(), -2.0);
        // H3(u) = 8u^3 - 12u
        assert_relative_eq!(hermite_poly::<f64>(3, 1.5).unwrap(), 8.0 * 3.375 - 18.0);
    }

    #[test]
    fn hermite_guard_rejects_large_orders() {
        assert!(matches!(
            hermite_poly::<f64>(31, 0.0),
            Err(Error::UnsupportedHermiteOrder { order: 31, max: 30 })
        ));
        assert!(hermite_poly::<f64>(30, 0.5).is_ok());
    }

    #[test]
    fn gouy_phase_values_and_bounds() {
        assert_relative_eq!(gouy_phase::<f64>(0, 1.0), PI / 4.0);
        assert_relative_eq!(gouy_phase::<f64>(2, 1.0), 3.0 * PI / 4.0);
        assert_relative_eq!(gouy_phase::<f64>(2, 1e12), 3.0 * PI / 2.0, epsilon = 1e-9);
        // monotone and bounded for z >= 0
        let mut prev = -1.0;
        for i in 0..200 {
            let z = i as f64 * 0.1;
            let phi = gouy_phase::<f64>(3, z);
            assert!(phi >= 0.0 && phi < 4.0 * PI / 2.0);
            assert!(phi > prev || i == 0);
            prev = phi;
        }
    }

    #[test]
    fn hg00_amplitude_at_origin() {
        let p = beam();
        let v = hg_field(ModeIndex::new(0, 0), &p, 0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(v.re, (2.0 / PI).sqrt() / 1e-4, max_relative = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-18);
    }

    #[test]
    fn hg20_amplitude_at_origin() {
        let p = beam();
        let v = hg_field(ModeIndex::new(2, 0), &p, 0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(v.re, -(1.0 / PI.sqrt()) / 1e-4, max_relative = 1e-12);
    }

    #[test]
    fn hg00_on_axis_magnitude_tracks_beam_width() {
        let p = beam();
        for &zn in &[-3.0, -0.4, 0.7, 2.0, 5.0] {
            let z = zn * p.rayleigh_zr();
            let v = hg_field(ModeIndex::new(0, 0), &p, 0.0, 0.0, z).unwrap();
            assert_relative_eq!(
                v.norm(),
                (2.0 / PI).sqrt() / p.width_at(z),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn self_splitting_coefficients() {
        let p = beam();
        let s = self_splitting_modes(p, 0.0);
        assert_eq!(s.terms().len(), 2);
        assert_eq!(s.terms()[0].0, ModeIndex::new(0, 0));
        assert_relative_eq!(s.terms()[0].1.re, 1.0);
        assert_relative_eq!(s.terms()[1].1.re, -2f64.sqrt());
        assert_abs_diff_eq!(s.terms()[1].1.im, 0.0);

        let s_pi = self_splitting_modes(p, PI);
        assert_relative_eq!(s_pi.terms()[1].1.re, 2f64.sqrt(), max_relative = 1e-12);
        assert_abs_diff_eq!(s_pi.terms()[1].1.im, 0.0, epsilon = 1e-12);

        let s_half = self_splitting_modes(p, PI / 2.0);
        assert_abs_diff_eq!(s_half.terms()[1].1.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(s_half.terms()[1].1.im, -2f64.sqrt(), max_relative = 1e-12);

        assert_relative_eq!(s.total_power(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn superposition_rejects_duplicate_modes() {
        let p = beam();
        let err = ModeSuperposition::new(
            p,
            vec![
                (ModeIndex::new(1, 1), Complex::new(1.0, 0.0)),
                (ModeIndex::new(1, 1), Complex::new(0.5, 0.0)),
            ],
        );
        assert!(matches!(err, Err(Error::DuplicateMode { m: 1, n: 1 })));
    }

    #[test]
    fn normalized_superposition_has_unit_power() {
        let p = beam();
        let s = self_splitting_modes(p, 1.3).normalized();
        assert_relative_eq!(s.total_power(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn on_axis_null_and_peak() {
        let p = beam();
        let null = self_splitting_modes(p, PI).evaluate(0.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(null.norm(), 0.0, epsilon = 1e-9);

        let peak = self_splitting_modes(p, 0.0).evaluate(0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(
            peak.norm(),
            2.0 * (2.0 / PI).sqrt() / 1e-4,
            max_relative = 1e-12
        );
    }

    #[test]
    fn empty_superposition_evaluates_to_zero() {
        let p = beam();
        let s = ModeSuperposition::new(p, vec![]).unwrap();
        assert_eq!(s.evaluate(1e-4, 0.0, 0.0).unwrap().norm(), 0.0);
        assert_eq!(s.total_power(), 0.0);
    }

    #[test]
    fn on_axis_interference_law() {
        // |Psi(0,0,z)|^2 = 4 (2/pi) / w(z)^2 cos^2((theta_c - 2 atan z~)/2)
        let p = beam();
        for &theta in &[0.0, 0.7, PI / 2.0, 2.4, PI] {
            for &zn in &[-5.0, -1.2, 0.0, 0.6, 1.0, 3.3, 5.0] {
                let z = zn * p.rayleigh_zr();
                let got = self_splitting_modes(p, theta)
                    .evaluate(0.0, 0.0, z)
                    .unwrap()
                    .norm_sqr();
                let w = p.width_at(z);
                let expect = 4.0 * (2.0 / PI) / (w * w)
                    * ((theta - 2.0 * zn.atan()) / 2.0).cos().powi(2);
                assert_abs_diff_eq!(got, expect, epsilon = 1e-10 * 4.0 * (2.0 / PI) / (w * w));
            }
        }
    }

    #[test]
    fn f32_instantiation_agrees_with_f64() {
        let p64 = beam();
        let p32 = BeamParams::<f32>::new(405e-9, 1e-4).unwrap();
        let v64 = hg_field(ModeIndex::new(2, 1), &p64, 5e-5, -2e-5, 0.03).unwrap();
        let v32 = hg_field(ModeIndex::new(2, 1), &p32, 5e-5, -2e-5, 0.03).unwrap();
        assert_relative_eq!(v32.re as f64, v64.re, max_relative = 1e-3);
        assert_relative_eq!(v32.im as f64, v64.im, max_relative = 1e-3);
    }

    proptest! {
        #[test]
        fn intensity_is_even_in_x(
            theta in 0.0..(2.0 * PI),
            zn in -6.0f64..6.0,
            xn in 0.0f64..4.0,
        ) {
            let p = beam();
            let s = self_splitting_modes(p, theta);
            let z = zn * p.rayleigh_zr();
            let x = xn * p.width_at(z);
            let plus = s.evaluate(x, 0.0, z).unwrap().norm_sqr();
            let minus = s.evaluate(-x, 0.0, z).unwrap().norm_sqr();
            let scale = s.evaluate(0.0, 0.0, 0.0).unwrap().norm_sqr().max(plus).max(1e-30);
            prop_assert!((plus - minus).abs() <= 1e-12 * scale);
        }

        #[test]
        fn normalized_point_roundtrip(
            xn in -8.0f64..8.0,
            yn in -8.0f64..8.0,
            zn in -10.0f64..10.0,
        ) {
            let p = beam();
            let np = NormalizedPoint { x_norm: xn, y_norm: yn, z_norm: zn };
            let (x, y, z) = np.to_physical(&p);
            let back = NormalizedPoint::from_physical(&p, x, y, z);
            prop_assert!((back.x_norm - xn).abs() <= 1e-14 * xn.abs().max(1.0));
            prop_assert!((back.y_norm - yn).abs() <= 1e-14 * yn.abs().max(1.0));
            prop_assert!((back.z_norm - zn).abs() <= 1e-14 * zn.abs().max(1.0));
        }
    }
}
