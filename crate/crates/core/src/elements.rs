//! Intermediate optical elements: opaque strips and glass-plate phase
//! patches. Elements are thin masks along x, infinite in y (the obstacles
//! and plates of interest are tall compared to the beam).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::FieldGrid;
use crate::real::Real;

/// Which beam path an element sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Pump,
    Signal,
    Idler,
}

impl Arm {
    pub fn name(&self) -> &'static str {
        match self {
            Arm::Pump => "pump",
            Arm::Signal => "signal",
            Arm::Idler => "idler",
        }
    }
}

/// Region a phase patch covers relative to its centre coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `x <= x_center` (covers one lobe of a split beam).
    Left,
    /// `x >= x_center`.
    Right,
    /// `|x - x_center| <= width / 2`.
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind<T> {
    /// Transmission exactly 0 inside `[x_center - width/2, x_center + width/2]`,
    /// 1 outside.
    OpaqueStrip,
    /// Unit-modulus transmission `e^{i phase}` over the selected region,
    /// 1 elsewhere.
    PhasePatch { phase: T, side: Side },
}

/// An amplitude or phase mask at a plane in a named arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalElement<T> {
    pub kind: ElementKind<T>,
    pub arm: Arm,
    pub z_plane: T,
    pub x_center: T,
    pub width: T,
}

impl<T: Real> OpticalElement<T> {
    pub fn opaque_strip(arm: Arm, z_plane: T, x_center: T, width: T) -> Result<Self> {
        if !(width > T::zero()) {
            return Err(Error::NonPositiveLength {
                name: "width",
                value: width.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            kind: ElementKind::OpaqueStrip,
            arm,
            z_plane,
            x_center,
            width,
        })
    }

    pub fn phase_patch(
        arm: Arm,
        z_plane: T,
        x_center: T,
        width: T,
        phase: T,
        side: Side,
    ) -> Result<Self> {
        if !(width > T::zero()) {
            return Err(Error::NonPositiveLength {
                name: "width",
                value: width.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            kind: ElementKind::PhasePatch { phase, side },
            arm,
            z_plane,
            x_center,
            width,
        })
    }

    /// Complex transmission at transverse position `x`.
    pub fn transmission(&self, x: T) -> Complex<T> {
        let half = self.width / T::of(2.0);
        match self.kind {
            ElementKind::OpaqueStrip => {
                if (x - self.x_center).abs() <= half {
                    Complex::new(T::zero(), T::zero())
                } else {
                    Complex::new(T::one(), T::zero())
                }
            }
            ElementKind::PhasePatch { phase, side } => {
                let inside = match side {
                    Side::Left => x <= self.x_center,
                    Side::Right => x >= self.x_center,
                    Side::Centered => (x - self.x_center).abs() <= half,
                };
                if inside {
                    Complex::from_polar(T::one(), phase)
                } else {
                    Complex::new(T::one(), T::zero())
                }
            }
        }
    }
}

/// Multiplies a sampled field by an element's transmission.
///
/// The element must sit at the field's plane; one transverse grid spacing
/// of longitudinal slack is tolerated.
pub fn apply_element<T: Real>(f: &FieldGrid<T>, e: &OpticalElement<T>) -> Result<FieldGrid<T>> {
    let tolerance = f.x_axis().spacing();
    if (e.z_plane - f.z_plane()).abs() > tolerance {
        return Err(Error::PlaneMismatch {
            element_z: e.z_plane.to_f64().unwrap_or(f64::NAN),
            field_z: f.z_plane().to_f64().unwrap_or(f64::NAN),
            tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
        });
    }
    let nx = f.x_axis().len();
    let transmissions: Vec<Complex<T>> = f
        .x_axis()
        .values()
        .into_iter()
        .map(|x| e.transmission(x))
        .collect();
    Ok(f.map(|i, s| s * transmissions[i % nx]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_grid, total_power, Axis, GridDescriptor};
    use crate::modes::{BeamParams, ModeIndex, ModeSuperposition};
    use approx::assert_relative_eq;

    fn gaussian_grid(w: f64, half_width: f64, n: usize) -> FieldGrid<f64> {
        let p = BeamParams::new(780e-9, w).unwrap();
        let s = ModeSuperposition::new(
            p,
            vec![(ModeIndex::new(0, 0), Complex::new(1.0, 0.0))],
        )
        .unwrap();
        sample_grid(&s, &GridDescriptor::one_dim(Axis::symmetric(half_width, n).unwrap()), 0.0)
            .unwrap()
    }

    #[test]
    fn strip_blocks_the_quadrature_mass_inside() {
        // Strip of width 1.2 mm on a Gaussian with w = 0.4 mm.
        let w = 4e-4;
        let g = gaussian_grid(w, 3.2e-3, 4097);
        let e = OpticalElement::opaque_strip(Arm::Signal, 0.0, 0.0, 1.2e-3).unwrap();
        let masked = apply_element(&g, &e).unwrap();

        // Independent quadrature of the blocked fraction of |u|^2.
        let dx = g.x_axis().spacing();
        let total: f64 = g.samples().iter().map(|s| s.norm_sqr() * dx).sum();
        let inside: f64 = g
            .x_axis()
            .values()
            .iter()
            .zip(g.samples())
            .filter(|(x, _)| x.abs() <= 0.6e-3)
            .map(|(_, s)| s.norm_sqr() * dx)
            .sum();
        let expected_fraction = 1.0 - inside / total;

        assert_relative_eq!(
            total_power(&masked) / total_power(&g),
            expected_fraction,
            max_relative = 1e-6
        );
    }

    #[test]
    fn zero_phase_patch_is_identity() {
        let g = gaussian_grid(4e-4, 2e-3, 512);
        let e =
            OpticalElement::phase_patch(Arm::Pump, 0.0, 0.0, 1e-3, 0.0, Side::Left).unwrap();
        let out = apply_element(&g, &e).unwrap();
        assert_eq!(out.samples(), g.samples());
    }

    #[test]
    fn strip_outside_window_is_identity() {
        let g = gaussian_grid(4e-4, 2e-3, 512);
        let e = OpticalElement::opaque_strip(Arm::Signal, 0.0, 5e-3, 1e-3).unwrap();
        let out = apply_element(&g, &e).unwrap();
        let diff: f64 = out
            .samples()
            .iter()
            .zip(g.samples())
            .map(|(a, b)| (a - b).norm())
            .sum();
        assert!(diff < 1e-15);
    }

    #[test]
    fn plane_mismatch_is_rejected() {
        let g = gaussian_grid(4e-4, 2e-3, 512);
        let e = OpticalElement::opaque_strip(Arm::Signal, 0.05, 0.0, 1e-3).unwrap();
        assert!(matches!(
            apply_element(&g, &e),
            Err(Error::PlaneMismatch { .. })
        ));
    }

    #[test]
    fn disjoint_strips_commute() {
        let g = gaussian_grid(4e-4, 2e-3, 512);
        let a = OpticalElement::opaque_strip(Arm::Signal, 0.0, -5e-4, 2e-4).unwrap();
        let b = OpticalElement::opaque_strip(Arm::Signal, 0.0, 6e-4, 3e-4).unwrap();
        let ab = apply_element(&apply_element(&g, &a).unwrap(), &b).unwrap();
        let ba = apply_element(&apply_element(&g, &b).unwrap(), &a).unwrap();
        assert_eq!(ab.samples(), ba.samples());
    }

    #[test]
    fn phase_patches_add() {
        let g = gaussian_grid(4e-4, 2e-3, 512);
        let p1 =
            OpticalElement::phase_patch(Arm::Pump, 0.0, 1e-4, 1e-3, 0.7, Side::Left).unwrap();
        let p2 =
            OpticalElement::phase_patch(Arm::Pump, 0.0, 1e-4, 1e-3, 1.9, Side::Left).unwrap();
        let sum =
            OpticalElement::phase_patch(Arm::Pump, 0.0, 1e-4, 1e-3, 0.7 + 1.9, Side::Left)
                .unwrap();
        let seq = apply_element(&apply_element(&g, &p1).unwrap(), &p2).unwrap();
        let direct = apply_element(&g, &sum).unwrap();
        let diff: f64 = seq
            .samples()
            .iter()
            .zip(direct.samples())
            .map(|(a, b)| (a - b).norm())
            .sum();
        let scale: f64 = g.samples().iter().map(|s| s.norm()).sum();
        assert!(diff < 1e-12 * scale);
    }

    #[test]
    fn patch_preserves_power() {
        let g = gaussian_grid(4e-4, 2e-3, 512);
        let e =
            OpticalElement::phase_patch(Arm::Pump, 0.0, 0.0, 1e-3, 2.2, Side::Right).unwrap();
        let out = apply_element(&g, &e).unwrap();
        assert_relative_eq!(total_power(&out), total_power(&g), max_relative = 1e-14);
    }

    #[test]
    fn nonpositive_width_rejected() {
        assert!(OpticalElement::<f64>::opaque_strip(Arm::Signal, 0.0, 0.0, 0.0).is_err());
        assert!(
            OpticalElement::<f64>::phase_patch(Arm::Pump, 0.0, 0.0, -1.0, 0.3, Side::Left)
                .is_err()
        );
    }
}
