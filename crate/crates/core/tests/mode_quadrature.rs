//! Quadrature-oracle checks of the mode math: orthonormality, lobe
//! geometry, and the exact equivalence between propagating and tuning the
//! control phase.

use num_complex::Complex;
use selfsplit_core::{
    hg_field, self_splitting_modes, Axis64, BeamParams64, GridDescriptor64, ModeIndex,
};

fn beam() -> BeamParams64 {
    BeamParams64::new(405e-9, 1e-4).unwrap()
}

/// 2D inner product of two modes on a quadrature grid at plane `z`.
fn mode_inner(
    a: ModeIndex,
    b: ModeIndex,
    params: &BeamParams64,
    z: f64,
    half_width: f64,
    n: usize,
) -> Complex<f64> {
    let axis = Axis64::symmetric(half_width, n).unwrap();
    let xs = axis.values();
    let d = axis.spacing();
    let mut acc = Complex::new(0.0, 0.0);
    for &y in &xs {
        for &x in &xs {
            let ua = hg_field(a, params, x, y, z).unwrap();
            let ub = hg_field(b, params, x, y, z).unwrap();
            acc += ua * ub.conj();
        }
    }
    acc * d * d
}

#[test]
fn low_order_modes_are_orthonormal_by_quadrature() {
    let p = beam();
    for &z in &[0.0, 1.7 * p.rayleigh_zr()] {
        let hw = 6.0 * p.width_at(z);
        let modes: Vec<ModeIndex> = (0..3)
            .flat_map(|m| (0..3).map(move |n| ModeIndex::new(m, n)))
            .collect();
        for (i, &a) in modes.iter().enumerate() {
            for &b in &modes[i..] {
                let inner = mode_inner(a, b, &p, z, hw, 512);
                if a == b {
                    assert!(
                        (inner.re - 1.0).abs() < 1e-6 && inner.im.abs() < 1e-6,
                        "norm of {a:?} at z={z}: {inner}"
                    );
                } else {
                    assert!(
                        inner.norm() < 1e-6,
                        "overlap of {a:?} and {b:?} at z={z}: {inner}"
                    );
                }
            }
        }
    }
}

#[test]
fn split_beam_lobes_sit_at_the_waist_radius() {
    // Oracle: the intensity along y = 0 at theta_c = pi is proportional to
    // x~^4 exp(-2 x~^2); its grid argmax must coincide with the sampled
    // superposition's argmax, and both sit at +-w0 within one spacing.
    let p = beam();
    let s = self_splitting_modes(p, std::f64::consts::PI);
    let axis = Axis64::symmetric(3e-4, 1201).unwrap();
    let xs = axis.values();

    let sampled: Vec<f64> = xs
        .iter()
        .map(|&x| s.evaluate(x, 0.0, 0.0).unwrap().norm_sqr())
        .collect();
    let oracle: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let xn = x / 1e-4;
            xn.powi(4) * (-2.0 * xn * xn).exp()
        })
        .collect();

    let argmax = |v: &[f64], lo: usize, hi: usize| {
        (lo..hi).fold(lo, |best, i| if v[i] > v[best] { i } else { best })
    };
    let mid = xs.len() / 2;
    let dx = axis.spacing();
    for (lo, hi) in [(0, mid), (mid, xs.len())] {
        let i_impl = argmax(&sampled, lo, hi);
        let i_oracle = argmax(&oracle, lo, hi);
        assert_eq!(i_impl, i_oracle);
        assert!((xs[i_impl].abs() - 1e-4).abs() <= dx);
    }
}

/// Pointwise identity between rescaled propagation and control-phase
/// shift: the normalised transverse intensity at (theta_c, z~), with x
/// rescaled by w0/w(z), equals the normalised intensity of
/// (theta_c - 2 atan z~) at the waist.
pub fn gouy_equivalence_max_error(theta_c: f64, z_norm: f64, points: usize) -> f64 {
    let p = beam();
    let z = z_norm * p.rayleigh_zr();
    let w_z = p.width_at(z);
    let w0 = p.waist_w0();

    let s_there = self_splitting_modes(p, theta_c);
    let s_here = self_splitting_modes(p, theta_c - 2.0 * z_norm.atan());

    let mut i_there = Vec::with_capacity(points);
    let mut i_here = Vec::with_capacity(points);
    for i in 0..points {
        let xn = -4.0 + 8.0 * i as f64 / (points - 1) as f64;
        i_there.push(s_there.evaluate(xn * w_z, 0.0, z).unwrap().norm_sqr());
        i_here.push(s_here.evaluate(xn * w0, 0.0, 0.0).unwrap().norm_sqr());
    }
    let max_there = i_there.iter().cloned().fold(0.0, f64::max);
    let max_here = i_here.iter().cloned().fold(0.0, f64::max);
    i_there
        .iter()
        .zip(i_here.iter())
        .map(|(a, b)| (a / max_there - b / max_here).abs())
        .fold(0.0, f64::max)
}

#[test]
fn propagation_is_equivalent_to_control_phase() {
    for &theta in &[0.0, 1.0, std::f64::consts::FRAC_PI_2, 2.5, std::f64::consts::PI] {
        for &zn in &[-5.0, -1.0, 0.5, 2.0, 5.0] {
            let err = gouy_equivalence_max_error(theta, zn, 161);
            assert!(
                err < 1e-10,
                "equivalence broken at theta_c={theta}, z~={zn}: {err:.3e}"
            );
        }
    }
}

#[test]
fn window_warning_does_not_change_samples() {
    // A narrow window only warns; values still match direct evaluation.
    let p = beam();
    let s = self_splitting_modes(p, 0.3);
    let desc = GridDescriptor64::one_dim(Axis64::symmetric(1e-4, 33).unwrap());
    let g = selfsplit_core::sample_grid(&s, &desc, 0.0).unwrap();
    for (i, &x) in desc.x.values().iter().enumerate() {
        assert_eq!(g.sample_1d(i), s.evaluate(x, 0.0, 0.0).unwrap());
    }
}
