//! Named scenario reproductions. Each scenario writes one or more
//! plot-ready CSV files and returns their paths.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex;
use selfsplit_core::{
    apply_element, biphoton_kernel_scan, depletion_ratio, derive_geometry, fringe_spacing,
    heralded_map_2d, propagate_angular_spectrum, sample_grid, scan_closed_form,
    self_splitting_modes, Arm, Axis64, BeamParams64, CoincidenceProfile64, FringeMethod,
    GridDescriptor64, KernelGrids64, ModeIndex, ModeSuperposition64, OpticalElement64,
    Provenance, ScanConfig64, SpdcGeometry64,
};

use crate::config::{PlateArms, PumpKind, ScenarioConfig, ScenarioKind};
use crate::error::CliError;
use crate::output::{write_grid, GridOutput};

/// Runs the configured scenario, writing its output files under the
/// configured directory.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>, CliError> {
    match cfg.scenario {
        ScenarioKind::SelfsplitMap => selfsplit_map(cfg),
        ScenarioKind::Heralded2d => heralded_2d(cfg),
        ScenarioKind::Obstacle => obstacle(cfg),
        ScenarioKind::ThetaSweep => theta_sweep(cfg),
        ScenarioKind::JointCounter => joint_counter(cfg),
        ScenarioKind::GlassPlate => glass_plate(cfg),
    }
}

/// Control phase that places the fully split two-lobe pattern exactly at
/// the detection plane: the lobe separation there is maximal, which is
/// what the obstacle test needs.
pub fn split_at_detector_phase(geom: &SpdcGeometry64, pump: &BeamParams64) -> f64 {
    wrap_two_pi(PI + 2.0 * (geom.z0() / pump.rayleigh_zr()).atan())
}

fn wrap_two_pi(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    ((x % two_pi) + two_pi) % two_pi
}

fn pump_beam(cfg: &ScenarioConfig) -> Result<BeamParams64, CliError> {
    Ok(BeamParams64::new(cfg.lambda_p, cfg.w0)?)
}

fn hg00_pump(params: BeamParams64) -> ModeSuperposition64 {
    ModeSuperposition64::new(params, vec![(ModeIndex::new(0, 0), Complex::new(1.0, 0.0))])
        .expect("single mode")
}

fn geometry(cfg: &ScenarioConfig) -> Result<SpdcGeometry64, CliError> {
    Ok(derive_geometry(
        cfg.lambda_p,
        cfg.lambda_s,
        cfg.z_s_eff(),
        cfg.z_i_eff(),
    )?)
}

fn base_output(cfg: &ScenarioConfig, geom: &SpdcGeometry64, columns: &[&str]) -> GridOutput {
    let mut g = GridOutput::new(columns);
    g.meta("scenario", cfg.scenario.name());
    g.meta("version", env!("CARGO_PKG_VERSION"));
    g.meta("units", "lengths m, angles rad, rates arbitrary");
    g.meta_num("lambda_p", geom.lambda_p());
    g.meta_num("lambda_s", geom.lambda_s());
    g.meta_num("lambda_i", geom.lambda_i());
    g.meta_num("w0", cfg.w0);
    g.meta_num("z_s", geom.z_s());
    g.meta_num("z_i", geom.z_i());
    g.meta_num("z0", geom.z0());
    g.meta_num("eta_s", geom.eta_s());
    g.meta_num("eta_i", geom.eta_i());
    g
}

fn profile_rows(g: &mut GridOutput, profile: &CoincidenceProfile64) {
    for (&x, &r) in profile.positions.iter().zip(profile.rates.iter()) {
        g.push_row(vec![x, r]);
    }
}

fn theta_label(theta: f64) -> &'static str {
    if theta == 0.0 {
        "0"
    } else if theta == PI {
        "pi"
    } else {
        "pi_over_2"
    }
}

// --------------------------------------------------------------------------
// selfsplit_map: classical intensity maps I(x, z~) for theta_c in {0, pi}
// --------------------------------------------------------------------------

fn selfsplit_map(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = pump_beam(cfg)?;
    let geom = geometry(cfg)?;
    let zr = params.rayleigh_zr();
    let x_axis = Axis64::symmetric(cfg.map_half_width_eff(), cfg.map_points)?;
    let xs = x_axis.values();
    let mut paths = Vec::new();

    for theta in [0.0, PI] {
        let pump = self_splitting_modes(params, theta);
        let mut g = base_output(cfg, &geom, &["z_norm", "x", "intensity"]);
        g.meta("engine", "modal");
        g.meta_num("theta_c", theta);
        g.meta_num("z_norm_min", cfg.z_norm_min);
        g.meta_num("z_norm_max", cfg.z_norm_max);
        for iz in 0..cfg.z_steps {
            let zn = cfg.z_norm_min
                + (cfg.z_norm_max - cfg.z_norm_min) * iz as f64 / (cfg.z_steps - 1) as f64;
            let z = zn * zr;
            for &x in &xs {
                let intensity = pump.evaluate(x, 0.0, z)?.norm_sqr();
                g.push_row(vec![zn, x, intensity]);
            }
        }
        let path = cfg
            .out_dir
            .join(format!("selfsplit_map_theta_{}.csv", theta_label(theta)));
        paths.push(write_grid(&g, &path)?);
    }
    Ok(paths)
}

// --------------------------------------------------------------------------
// heralded_2d: 2D heralded coincidence maps at the detection plane
// --------------------------------------------------------------------------

fn heralded_2d(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = pump_beam(cfg)?;
    let geom = geometry(cfg)?;
    let axis = Axis64::symmetric(cfg.map_half_width_eff(), cfg.map_points)?;
    let coords = axis.values();
    let mut paths = Vec::new();

    for theta in [0.0, PI / 2.0, PI] {
        let pump = self_splitting_modes(params, theta);
        let rates = heralded_map_2d(&pump, &geom, &coords, &coords, (0.0, 0.0))?;
        let mut g = base_output(cfg, &geom, &["x_s", "y_s", "rate"]);
        g.meta("engine", Provenance::ClosedForm.name());
        g.meta_num("theta_c", theta);
        g.meta("idler", "fixed at origin");
        for (iy, &y) in coords.iter().enumerate() {
            for (ix, &x) in coords.iter().enumerate() {
                g.push_row(vec![x, y, rates[iy * coords.len() + ix]]);
            }
        }
        let path = cfg
            .out_dir
            .join(format!("heralded_2d_theta_{}.csv", theta_label(theta)));
        paths.push(write_grid(&g, &path)?);
    }
    Ok(paths)
}

// --------------------------------------------------------------------------
// obstacle: heralded profiles with/without an opaque strip in the signal arm
// --------------------------------------------------------------------------

/// Everything the obstacle scenario measures, exposed for the validation
/// suite as well as the CSV writer.
pub struct ObstacleResult {
    pub theta_c: f64,
    pub hg00_clear: CoincidenceProfile64,
    pub hg00_strip: CoincidenceProfile64,
    pub selfsplit_clear: CoincidenceProfile64,
    pub selfsplit_strip: CoincidenceProfile64,
    pub depletion_hg00: f64,
    pub depletion_selfsplit: f64,
}

pub fn run_obstacle(cfg: &ScenarioConfig) -> Result<ObstacleResult, CliError> {
    let params = pump_beam(cfg)?;
    let geom = geometry(cfg)?;
    let theta = cfg
        .theta_c
        .unwrap_or_else(|| split_at_detector_phase(&geom, &params));

    let strip = OpticalElement64::opaque_strip(
        Arm::Signal,
        cfg.strip_z,
        cfg.strip_center,
        cfg.strip_width,
    )?;
    let positions = Axis64::symmetric(cfg.scan_half_width_eff(), cfg.scan_points)?.values();
    let scan = ScanConfig64::heralded(positions, (0.0, 0.0));

    let run = |pump: &ModeSuperposition64,
               elements: &[OpticalElement64]|
     -> Result<CoincidenceProfile64, CliError> {
        let grids = KernelGrids64 {
            source_points: cfg.source_points,
            ..KernelGrids64::default_for(pump)
        };
        Ok(biphoton_kernel_scan(pump, &geom, elements, &scan, &grids)?)
    };

    let hg00 = hg00_pump(params);
    let selfsplit = self_splitting_modes(params, theta);
    let hg00_clear = run(&hg00, &[])?;
    let hg00_strip = run(&hg00, &[strip])?;
    let selfsplit_clear = run(&selfsplit, &[])?;
    let selfsplit_strip = run(&selfsplit, &[strip])?;

    let depletion_hg00 = depletion_ratio(
        &hg00_strip.positions,
        &hg00_strip.rates,
        &hg00_clear.positions,
        &hg00_clear.rates,
    )?;
    let depletion_selfsplit = depletion_ratio(
        &selfsplit_strip.positions,
        &selfsplit_strip.rates,
        &selfsplit_clear.positions,
        &selfsplit_clear.rates,
    )?;

    Ok(ObstacleResult {
        theta_c: theta,
        hg00_clear,
        hg00_strip,
        selfsplit_clear,
        selfsplit_strip,
        depletion_hg00,
        depletion_selfsplit,
    })
}

fn obstacle(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>, CliError> {
    let geom = geometry(cfg)?;
    let result = run_obstacle(cfg)?;
    let mut paths = Vec::new();

    let profiles = [
        ("obstacle_hg00_clear.csv", &result.hg00_clear, None),
        (
            "obstacle_hg00_strip.csv",
            &result.hg00_strip,
            Some(result.depletion_hg00),
        ),
        ("obstacle_selfsplit_clear.csv", &result.selfsplit_clear, None),
        (
            "obstacle_selfsplit_strip.csv",
            &result.selfsplit_strip,
            Some(result.depletion_selfsplit),
        ),
    ];
    for (name, profile, depletion) in profiles {
        let mut g = base_output(cfg, &geom, &["x", "rate"]);
        g.meta("engine", profile.provenance.name());
        g.meta(
            "pump",
            if name.contains("hg00") { "hg00" } else { "selfsplit" },
        );
        g.meta_num("theta_c", result.theta_c);
        g.meta_num("strip_width", cfg.strip_width);
        g.meta_num("strip_center", cfg.strip_center);
        g.meta_num("strip_z", cfg.strip_z);
        if let Some(d) = depletion {
            g.meta_num("depletion_ratio", d);
        }
        profile_rows(&mut g, profile);
        paths.push(write_grid(&g, &cfg.out_dir.join(name))?);
    }

    let mut summary = base_output(
        cfg,
        &geom,
        &["depletion_hg00", "depletion_selfsplit", "advantage"],
    );
    summary.meta("engine", Provenance::KernelEngine.name());
    summary.meta_num("theta_c", result.theta_c);
    summary.push_row(vec![
        result.depletion_hg00,
        result.depletion_selfsplit,
        result.depletion_selfsplit / result.depletion_hg00,
    ]);
    paths.push(write_grid(&summary, &cfg.out_dir.join("obstacle_summary.csv"))?);
    Ok(paths)
}

// --------------------------------------------------------------------------
// theta_sweep: emulated longitudinal evolution at a fixed plane
// --------------------------------------------------------------------------

fn theta_sweep(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = pump_beam(cfg)?;
    let geom = geometry(cfg)?;
    let thetas: Vec<f64> = (0..cfg.theta_steps)
        .map(|i| 2.0 * PI * i as f64 / cfg.theta_steps as f64)
        .collect();

    let heralded_axis = Axis64::symmetric(cfg.scan_half_width_eff(), cfg.scan_points)?;
    let native_axis = Axis64::symmetric(cfg.scan_half_width_eff() / 2.0, cfg.scan_points)?;
    let mut paths = Vec::new();

    // heralded C(x_s; theta_c)
    let mut heralded = base_output(cfg, &geom, &["theta_c", "x", "rate"]);
    heralded.meta("engine", Provenance::ClosedForm.name());
    heralded.meta("detection", "heralded, idler fixed at origin");
    // joint C(x; theta_c)
    let mut joint = base_output(cfg, &geom, &["theta_c", "x", "rate"]);
    joint.meta("engine", Provenance::ClosedForm.name());
    joint.meta("detection", "joint, x_i = x_s");
    // pump intensity(x; theta_c) at the same plane
    let mut pump_map = base_output(cfg, &geom, &["theta_c", "x", "intensity"]);
    pump_map.meta("engine", "modal");
    pump_map.meta_num("z_detect", geom.z_s());

    for &theta in &thetas {
        let pump = self_splitting_modes(params, theta);
        let h = scan_closed_form(
            &pump,
            &geom,
            &ScanConfig64::heralded(heralded_axis.values(), (0.0, 0.0)),
        )?;
        for (&x, &r) in h.positions.iter().zip(h.rates.iter()) {
            heralded.push_row(vec![theta, x, r]);
        }
        let j = scan_closed_form(&pump, &geom, &ScanConfig64::joint(native_axis.values()))?;
        for (&x, &r) in j.positions.iter().zip(j.rates.iter()) {
            joint.push_row(vec![theta, x, r]);
        }
        for &x in &native_axis.values() {
            let intensity = pump.evaluate(x, 0.0, geom.z_s())?.norm_sqr();
            pump_map.push_row(vec![theta, x, intensity]);
        }
    }

    paths.push(write_grid(&heralded, &cfg.out_dir.join("theta_sweep_heralded.csv"))?);
    paths.push(write_grid(&joint, &cfg.out_dir.join("theta_sweep_joint.csv"))?);
    paths.push(write_grid(&pump_map, &cfg.out_dir.join("theta_sweep_pump.csv"))?);
    Ok(paths)
}

// --------------------------------------------------------------------------
// joint_counter: joint and counter scans for theta_c in {0, pi}
// --------------------------------------------------------------------------

fn joint_counter(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = pump_beam(cfg)?;
    let geom = geometry(cfg)?;
    let positions = Axis64::symmetric(cfg.scan_half_width_eff(), cfg.scan_points)?.values();

    let mut profiles = Vec::new();
    for theta in [0.0, PI] {
        let pump = self_splitting_modes(params, theta);
        profiles.push(scan_closed_form(
            &pump,
            &geom,
            &ScanConfig64::joint(positions.clone()),
        )?);
        profiles.push(scan_closed_form(
            &pump,
            &geom,
            &ScanConfig64::counter(positions.clone()),
        )?);
    }

    let mut g = base_output(
        cfg,
        &geom,
        &[
            "x",
            "joint_theta_0",
            "counter_theta_0",
            "joint_theta_pi",
            "counter_theta_pi",
        ],
    );
    g.meta("engine", Provenance::ClosedForm.name());
    for (i, &x) in positions.iter().enumerate() {
        g.push_row(vec![
            x,
            profiles[0].rates[i],
            profiles[1].rates[i],
            profiles[2].rates[i],
            profiles[3].rates[i],
        ]);
    }
    Ok(vec![write_grid(&g, &cfg.out_dir.join("joint_counter.csv"))?])
}

// --------------------------------------------------------------------------
// glass_plate: Mach-Zehnder-like phase sensing
// --------------------------------------------------------------------------

/// One plate-phase setting of the glass-plate scenario.
pub struct GlassPlateStep {
    pub phi: f64,
    pub heralded: CoincidenceProfile64,
    pub joint: CoincidenceProfile64,
    /// Spacings and visibilities when fringes resolve on both scans.
    pub fringes: Option<GlassFringes>,
}

pub struct GlassFringes {
    pub spacing_heralded: f64,
    pub spacing_joint: f64,
    pub spacing_heralded_p2p: f64,
    pub spacing_joint_p2p: f64,
    pub visibility_heralded: f64,
    pub visibility_joint: f64,
}

pub fn run_glass_plate_step(
    cfg: &ScenarioConfig,
    phi: f64,
) -> Result<GlassPlateStep, CliError> {
    let params = pump_beam(cfg)?;
    let geom = geometry(cfg)?;
    let theta = cfg.theta_c.unwrap_or(PI);
    let pump = match cfg.pump_kind {
        PumpKind::Selfsplit => self_splitting_modes(params, theta),
        PumpKind::Hg00 => hg00_pump(params),
    };

    // Patch width only matters for centered patches; half-plane sides
    // ignore it.
    let patch_width = 1e-3;
    let mut elements = Vec::new();
    if matches!(cfg.plate_arms, PlateArms::Both | PlateArms::Signal) {
        elements.push(OpticalElement64::phase_patch(
            Arm::Signal,
            cfg.plate_z,
            cfg.plate_center,
            patch_width,
            phi,
            cfg.plate_side,
        )?);
    }
    if matches!(cfg.plate_arms, PlateArms::Both | PlateArms::Idler) {
        elements.push(OpticalElement64::phase_patch(
            Arm::Idler,
            cfg.plate_z,
            cfg.plate_center,
            patch_width,
            phi,
            cfg.plate_side,
        )?);
    }

    let joint_hw = cfg.scan_half_width_eff();
    let heralded_hw = joint_hw / geom.eta_s();
    let grids = KernelGrids64 {
        source_points: cfg.source_points,
        ..KernelGrids64::default_for(&pump)
    };

    let heralded_scan = ScanConfig64::heralded(
        Axis64::symmetric(heralded_hw, cfg.scan_points)?.values(),
        (0.0, 0.0),
    );
    let joint_scan = ScanConfig64::joint(Axis64::symmetric(joint_hw, cfg.scan_points)?.values());
    let heralded = biphoton_kernel_scan(&pump, &geom, &elements, &heralded_scan, &grids)?;
    let joint = biphoton_kernel_scan(&pump, &geom, &elements, &joint_scan, &grids)?;

    let spectral = |p: &CoincidenceProfile64| {
        fringe_spacing(&p.positions, &p.rates, FringeMethod::SpectralPeak)
    };
    let p2p = |p: &CoincidenceProfile64| {
        fringe_spacing(&p.positions, &p.rates, FringeMethod::PeakToPeak)
    };
    let fringes = match (spectral(&heralded), spectral(&joint), p2p(&heralded), p2p(&joint)) {
        (Ok(h), Ok(j), Ok(hp), Ok(jp)) => Some(GlassFringes {
            spacing_heralded: h.spacing,
            spacing_joint: j.spacing,
            spacing_heralded_p2p: hp.spacing,
            spacing_joint_p2p: jp.spacing,
            visibility_heralded: h.visibility,
            visibility_joint: j.visibility,
        }),
        _ => None,
    };

    Ok(GlassPlateStep {
        phi,
        heralded,
        joint,
        fringes,
    })
}

fn glass_plate(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = pump_beam(cfg)?;
    let geom = geometry(cfg)?;
    let theta = cfg.theta_c.unwrap_or(PI);
    let phis: Vec<f64> = (0..cfg.plate_phase_steps)
        .map(|i| 2.0 * PI * i as f64 / cfg.plate_phase_steps as f64)
        .collect();

    let mut pump_out = base_output(cfg, &geom, &["phi", "x", "intensity"]);
    pump_out.meta("engine", "angular_spectrum");
    pump_out.meta_num("theta_c", theta);
    pump_out.meta_num("plate_z", cfg.plate_z);
    pump_out.meta_num("z_detect", geom.z_s());

    let mut heralded_out = base_output(cfg, &geom, &["phi", "x", "rate"]);
    heralded_out.meta("engine", Provenance::KernelEngine.name());
    heralded_out.meta_num("theta_c", theta);
    heralded_out.meta("detection", "heralded, idler fixed at origin");

    let mut joint_out = base_output(cfg, &geom, &["phi", "x", "rate"]);
    joint_out.meta("engine", Provenance::KernelEngine.name());
    joint_out.meta_num("theta_c", theta);
    joint_out.meta("detection", "joint, x_i = x_s");

    let mut fringe_out = base_output(
        cfg,
        &geom,
        &[
            "phi",
            "resolved",
            "spacing_heralded",
            "spacing_joint",
            "spacing_ratio",
            "spacing_heralded_p2p",
            "spacing_joint_p2p",
            "visibility_heralded",
            "visibility_joint",
        ],
    );
    fringe_out.meta("engine", Provenance::KernelEngine.name());
    fringe_out.meta_num("theta_c", theta);
    fringe_out.meta("method", "spectral_peak with peak_to_peak cross-check");

    for &phi in &phis {
        // Classical pump far field with the plate in its near-field lobe.
        let pump = match cfg.pump_kind {
            PumpKind::Selfsplit => self_splitting_modes(params, theta),
            PumpKind::Hg00 => hg00_pump(params),
        };
        let pump_axis = Axis64::symmetric(cfg.scan_half_width_eff() + 1e-3, 2048)?;
        let near = sample_grid(&pump, &GridDescriptor64::one_dim(pump_axis), 0.0)?;
        let at_plate = propagate_angular_spectrum(&near, cfg.plate_z)?;
        let plate = OpticalElement64::phase_patch(
            Arm::Pump,
            cfg.plate_z,
            cfg.plate_center,
            1e-3,
            phi,
            cfg.plate_side,
        )?;
        let masked = apply_element(&at_plate, &plate)?;
        let far = propagate_angular_spectrum(&masked, geom.z_s() - cfg.plate_z)?;
        for (i, &x) in pump_axis.values().iter().enumerate() {
            if x.abs() <= cfg.scan_half_width_eff() {
                pump_out.push_row(vec![phi, x, far.sample_1d(i).norm_sqr()]);
            }
        }

        let step = run_glass_plate_step(cfg, phi)?;
        for (&x, &r) in step.heralded.positions.iter().zip(step.heralded.rates.iter()) {
            heralded_out.push_row(vec![phi, x, r]);
        }
        for (&x, &r) in step.joint.positions.iter().zip(step.joint.rates.iter()) {
            joint_out.push_row(vec![phi, x, r]);
        }
        match &step.fringes {
            Some(f) => fringe_out.push_row(vec![
                phi,
                1.0,
                f.spacing_heralded,
                f.spacing_joint,
                f.spacing_joint / f.spacing_heralded,
                f.spacing_heralded_p2p,
                f.spacing_joint_p2p,
                f.visibility_heralded,
                f.visibility_joint,
            ]),
            None => fringe_out.push_row(vec![phi, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        }
    }

    let mut paths = Vec::new();
    paths.push(write_grid(&pump_out, &cfg.out_dir.join("glass_plate_pump.csv"))?);
    paths.push(write_grid(
        &heralded_out,
        &cfg.out_dir.join("glass_plate_heralded.csv"),
    )?);
    paths.push(write_grid(&joint_out, &cfg.out_dir.join("glass_plate_joint.csv"))?);
    paths.push(write_grid(
        &fringe_out,
        &cfg.out_dir.join("glass_plate_fringes.csv"),
    )?);
    Ok(paths)
}
