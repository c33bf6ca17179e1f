//! Strict INI-style scenario configuration.
//!
//! A config names one scenario and optionally overrides the defaults,
//! which encode the reference setup: a 405 nm pump focused to
//! w0 = 0.1 mm at the crystal, a 780 nm signal, and 0.6 m arms. Scenarios
//! that emulate propagation at a fixed plane default to the detection
//! plane at five Rayleigh lengths instead.
//!
//! Parsing is strict: unknown sections or keys, malformed numbers, and
//! non-positive lengths are rejected with the offending line number. A
//! parsed config re-serialises to an equivalent config (normalisation is
//! idempotent).

use std::path::PathBuf;

use selfsplit_core::Side;

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    SelfsplitMap,
    Heralded2d,
    Obstacle,
    ThetaSweep,
    JointCounter,
    GlassPlate,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::SelfsplitMap,
        ScenarioKind::Heralded2d,
        ScenarioKind::Obstacle,
        ScenarioKind::ThetaSweep,
        ScenarioKind::JointCounter,
        ScenarioKind::GlassPlate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::SelfsplitMap => "selfsplit_map",
            ScenarioKind::Heralded2d => "heralded_2d",
            ScenarioKind::Obstacle => "obstacle",
            ScenarioKind::ThetaSweep => "theta_sweep",
            ScenarioKind::JointCounter => "joint_counter",
            ScenarioKind::GlassPlate => "glass_plate",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            ScenarioKind::SelfsplitMap => {
                "classical intensity maps I(x, z~) of the split/merge cycle for theta_c in {0, pi}"
            }
            ScenarioKind::Heralded2d => {
                "2D heralded coincidence maps C(x_s, y_s) for theta_c in {0, pi/2, pi}"
            }
            ScenarioKind::Obstacle => {
                "heralded profiles with/without a centered opaque strip for hg00 and selfsplit pumps"
            }
            ScenarioKind::ThetaSweep => {
                "heralded, joint and pump profiles versus the control phase (emulated propagation)"
            }
            ScenarioKind::JointCounter => {
                "joint (x_i = x_s) and counter (x_i = -x_s) scans at theta_c in {0, pi}"
            }
            ScenarioKind::GlassPlate => {
                "phase-sensing fringes: pump far field plus heralded and joint coincidences vs plate phase"
            }
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpKind {
    Hg00,
    Selfsplit,
}

impl PumpKind {
    pub fn name(&self) -> &'static str {
        match self {
            PumpKind::Hg00 => "hg00",
            PumpKind::Selfsplit => "selfsplit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateArms {
    Both,
    Signal,
    Idler,
}

impl PlateArms {
    pub fn name(&self) -> &'static str {
        match self {
            PlateArms::Both => "both",
            PlateArms::Signal => "signal",
            PlateArms::Idler => "idler",
        }
    }
}

/// Fully parsed scenario configuration. Lengths are SI metres, angles are
/// radians. `None` fields take scenario-dependent defaults at run time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    // [pump]
    pub pump_kind: PumpKind,
    pub theta_c: Option<f64>,
    // [geometry]
    pub lambda_p: f64,
    pub lambda_s: f64,
    pub w0: f64,
    pub z_s: Option<f64>,
    pub z_i: Option<f64>,
    // [grid]
    pub source_points: usize,
    pub scan_points: usize,
    pub scan_half_width: Option<f64>,
    pub map_points: usize,
    pub map_half_width: Option<f64>,
    pub theta_steps: usize,
    pub z_norm_min: f64,
    pub z_norm_max: f64,
    pub z_steps: usize,
    // [elements]
    pub strip_width: f64,
    pub strip_center: f64,
    pub strip_z: f64,
    pub plate_phase_steps: usize,
    pub plate_z: f64,
    pub plate_center: f64,
    pub plate_side: Side,
    pub plate_arms: PlateArms,
    // [output]
    pub out_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn defaults(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            pump_kind: PumpKind::Selfsplit,
            theta_c: None,
            lambda_p: 405e-9,
            lambda_s: 780e-9,
            w0: 1e-4,
            z_s: None,
            z_i: None,
            source_points: 512,
            scan_points: match scenario {
                ScenarioKind::GlassPlate => 513,
                _ => 401,
            },
            scan_half_width: None,
            map_points: 201,
            map_half_width: None,
            theta_steps: 64,
            z_norm_min: -5.0,
            z_norm_max: 5.0,
            z_steps: 201,
            strip_width: 1.2e-3,
            strip_center: 0.0,
            strip_z: 0.5,
            plate_phase_steps: 8,
            plate_z: 1e-3,
            plate_center: 0.0,
            plate_side: Side::Left,
            plate_arms: PlateArms::Both,
            out_dir: PathBuf::from("out"),
        }
    }

    /// Pump Rayleigh length for the configured waist and wavelength.
    pub fn rayleigh_zr(&self) -> f64 {
        std::f64::consts::PI * self.w0 * self.w0 / self.lambda_p
    }

    /// Signal arm length; defaults to five Rayleigh lengths for the
    /// fixed-plane emulation scenarios and 0.6 m otherwise.
    pub fn z_s_eff(&self) -> f64 {
        self.z_s.unwrap_or_else(|| self.default_arm_length())
    }

    pub fn z_i_eff(&self) -> f64 {
        self.z_i.unwrap_or_else(|| self.default_arm_length())
    }

    fn default_arm_length(&self) -> f64 {
        match self.scenario {
            ScenarioKind::Heralded2d | ScenarioKind::ThetaSweep | ScenarioKind::JointCounter => {
                5.0 * self.rayleigh_zr()
            }
            _ => 0.6,
        }
    }

    pub fn scan_half_width_eff(&self) -> f64 {
        self.scan_half_width.unwrap_or(match self.scenario {
            ScenarioKind::Obstacle | ScenarioKind::ThetaSweep => 4e-3,
            ScenarioKind::JointCounter => 2e-3,
            ScenarioKind::GlassPlate => 3e-3,
            _ => 3e-3,
        })
    }

    pub fn map_half_width_eff(&self) -> f64 {
        self.map_half_width.unwrap_or(match self.scenario {
            ScenarioKind::SelfsplitMap => 2.1e-3,
            _ => 2.5e-3,
        })
    }

    /// Serialises the config with its effective values filled in. Parsing
    /// the result reproduces an equivalent configuration.
    pub fn to_config_string(&self) -> String {
        let num = crate::output::format_number;
        let mut s = String::new();
        s.push_str(&format!("scenario = {}\n\n", self.scenario.name()));
        s.push_str("[pump]\n");
        s.push_str(&format!("type = {}\n", self.pump_kind.name()));
        if let Some(theta) = self.theta_c {
            s.push_str(&format!("theta_c = {}\n", num(theta)));
        }
        s.push_str("\n[geometry]\n");
        s.push_str(&format!("lambda_p = {}\n", num(self.lambda_p)));
        s.push_str(&format!("lambda_s = {}\n", num(self.lambda_s)));
        s.push_str(&format!("w0 = {}\n", num(self.w0)));
        s.push_str(&format!("z_s = {}\n", num(self.z_s_eff())));
        s.push_str(&format!("z_i = {}\n", num(self.z_i_eff())));
        s.push_str("\n[grid]\n");
        s.push_str(&format!("source_points = {}\n", self.source_points));
        s.push_str(&format!("scan_points = {}\n", self.scan_points));
        s.push_str(&format!("scan_half_width = {}\n", num(self.scan_half_width_eff())));
        s.push_str(&format!("map_points = {}\n", self.map_points));
        s.push_str(&format!("map_half_width = {}\n", num(self.map_half_width_eff())));
        s.push_str(&format!("theta_steps = {}\n", self.theta_steps));
        s.push_str(&format!("z_norm_min = {}\n", num(self.z_norm_min)));
        s.push_str(&format!("z_norm_max = {}\n", num(self.z_norm_max)));
        s.push_str(&format!("z_steps = {}\n", self.z_steps));
        s.push_str("\n[elements]\n");
        s.push_str(&format!("strip_width = {}\n", num(self.strip_width)));
        s.push_str(&format!("strip_center = {}\n", num(self.strip_center)));
        s.push_str(&format!("strip_z = {}\n", num(self.strip_z)));
        s.push_str(&format!("plate_phase_steps = {}\n", self.plate_phase_steps));
        s.push_str(&format!("plate_z = {}\n", num(self.plate_z)));
        s.push_str(&format!("plate_center = {}\n", num(self.plate_center)));
        s.push_str(&format!("plate_side = {}\n", side_name(self.plate_side)));
        s.push_str(&format!("plate_arms = {}\n", self.plate_arms.name()));
        s.push_str("\n[output]\n");
        s.push_str(&format!("dir = {}\n", self.out_dir.display()));
        s
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
        Side::Centered => "centered",
    }
}

fn parse_side(s: &str) -> Option<Side> {
    match s {
        "left" => Some(Side::Left),
        "right" => Some(Side::Right),
        "centered" => Some(Side::Centered),
        _ => None,
    }
}

fn parse_f64(key: &str, value: &str, line: usize) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ConfigError::at(line, format!("key '{key}': invalid number '{value}'")))
}

fn parse_positive(key: &str, value: &str, line: usize) -> Result<f64, ConfigError> {
    let v = parse_f64(key, value, line)?;
    if v <= 0.0 {
        return Err(ConfigError::at(
            line,
            format!("key '{key}': must be positive, got {value}"),
        ));
    }
    Ok(v)
}

fn parse_usize(key: &str, value: &str, line: usize, min: usize) -> Result<usize, ConfigError> {
    let v: usize = value.parse().map_err(|_| {
        ConfigError::at(line, format!("key '{key}': invalid integer '{value}'"))
    })?;
    if v < min {
        return Err(ConfigError::at(
            line,
            format!("key '{key}': must be at least {min}, got {v}"),
        ));
    }
    Ok(v)
}

/// Parses a scenario configuration from INI-style text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    // First pass: find the scenario so defaults can be laid down.
    let mut scenario: Option<(ScenarioKind, usize)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if let Some((key, value)) = split_key_value(line) {
            if key == "scenario" {
                if scenario.is_some() {
                    return Err(ConfigError::at(idx + 1, "duplicate 'scenario' key"));
                }
                let kind = ScenarioKind::parse(value).ok_or_else(|| {
                    ConfigError::at(
                        idx + 1,
                        format!(
                            "unknown scenario '{value}'; expected one of: {}",
                            ScenarioKind::ALL.map(|k| k.name()).join(", ")
                        ),
                    )
                })?;
                scenario = Some((kind, idx + 1));
            }
        }
    }
    let (kind, _) = scenario
        .ok_or_else(|| ConfigError::general("missing required top-level key 'scenario'"))?;
    let mut cfg = ScenarioConfig::defaults(kind);

    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(lineno, format!("malformed section '{line}'")))?
                .trim();
            if !["pump", "geometry", "grid", "elements", "output"].contains(&name) {
                return Err(ConfigError::at(lineno, format!("unknown section '[{name}]'")));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = split_key_value(line)
            .ok_or_else(|| ConfigError::at(lineno, format!("expected 'key = value', got '{line}'")))?;

        match (section.as_str(), key) {
            ("", "scenario") => {}
            ("pump", "type") => {
                cfg.pump_kind = match value {
                    "hg00" => PumpKind::Hg00,
                    "selfsplit" => PumpKind::Selfsplit,
                    other => {
                        return Err(ConfigError::at(
                            lineno,
                            format!("key 'type': unknown pump '{other}' (hg00|selfsplit)"),
                        ))
                    }
                };
            }
            ("pump", "theta_c") => cfg.theta_c = Some(parse_f64(key, value, lineno)?),
            ("geometry", "lambda_p") => cfg.lambda_p = parse_positive(key, value, lineno)?,
            ("geometry", "lambda_s") => cfg.lambda_s = parse_positive(key, value, lineno)?,
            ("geometry", "w0") => cfg.w0 = parse_positive(key, value, lineno)?,
            ("geometry", "z_s") => cfg.z_s = Some(parse_positive(key, value, lineno)?),
            ("geometry", "z_i") => cfg.z_i = Some(parse_positive(key, value, lineno)?),
            ("grid", "source_points") => cfg.source_points = parse_usize(key, value, lineno, 16)?,
            ("grid", "scan_points") => cfg.scan_points = parse_usize(key, value, lineno, 16)?,
            ("grid", "scan_half_width") => {
                cfg.scan_half_width = Some(parse_positive(key, value, lineno)?)
            }
            ("grid", "map_points") => cfg.map_points = parse_usize(key, value, lineno, 16)?,
            ("grid", "map_half_width") => {
                cfg.map_half_width = Some(parse_positive(key, value, lineno)?)
            }
            ("grid", "theta_steps") => cfg.theta_steps = parse_usize(key, value, lineno, 4)?,
            ("grid", "z_norm_min") => cfg.z_norm_min = parse_f64(key, value, lineno)?,
            ("grid", "z_norm_max") => cfg.z_norm_max = parse_f64(key, value, lineno)?,
            ("grid", "z_steps") => cfg.z_steps = parse_usize(key, value, lineno, 2)?,
            ("elements", "strip_width") => cfg.strip_width = parse_positive(key, value, lineno)?,
            ("elements", "strip_center") => cfg.strip_center = parse_f64(key, value, lineno)?,
            ("elements", "strip_z") => cfg.strip_z = parse_positive(key, value, lineno)?,
            ("elements", "plate_phase_steps") => {
                cfg.plate_phase_steps = parse_usize(key, value, lineno, 1)?
            }
            ("elements", "plate_z") => cfg.plate_z = parse_positive(key, value, lineno)?,
            ("elements", "plate_center") => cfg.plate_center = parse_f64(key, value, lineno)?,
            ("elements", "plate_side") => {
                cfg.plate_side = parse_side(value).ok_or_else(|| {
                    ConfigError::at(
                        lineno,
                        format!("key 'plate_side': unknown side '{value}' (left|right|centered)"),
                    )
                })?;
            }
            ("elements", "plate_arms") => {
                cfg.plate_arms = match value {
                    "both" => PlateArms::Both,
                    "signal" => PlateArms::Signal,
                    "idler" => PlateArms::Idler,
                    other => {
                        return Err(ConfigError::at(
                            lineno,
                            format!("key 'plate_arms': unknown value '{other}' (both|signal|idler)"),
                        ))
                    }
                };
            }
            ("output", "dir") => cfg.out_dir = PathBuf::from(value),
            (sec, key) => {
                let place = if sec.is_empty() {
                    "top level".to_string()
                } else {
                    format!("section [{sec}]")
                };
                return Err(ConfigError::at(
                    lineno,
                    format!("unknown key '{key}' in {place}"),
                ));
            }
        }
    }

    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    if cfg.lambda_s <= cfg.lambda_p {
        return Err(ConfigError::general(format!(
            "lambda_s ({}) must exceed lambda_p ({}) for down-conversion",
            cfg.lambda_s, cfg.lambda_p
        )));
    }
    if cfg.z_norm_max <= cfg.z_norm_min {
        return Err(ConfigError::general(
            "z_norm_max must exceed z_norm_min".to_string(),
        ));
    }
    if cfg.scenario == ScenarioKind::Obstacle && cfg.strip_z >= cfg.z_s_eff() {
        return Err(ConfigError::general(format!(
            "strip_z ({}) must lie inside the signal arm (z_s = {})",
            cfg.strip_z,
            cfg.z_s_eff()
        )));
    }
    if cfg.scenario == ScenarioKind::GlassPlate {
        let max_arm = cfg.z_s_eff().min(cfg.z_i_eff());
        if cfg.plate_z >= max_arm {
            return Err(ConfigError::general(format!(
                "plate_z ({}) must lie inside both arms (min arm = {max_arm})",
                cfg.plate_z
            )));
        }
    }
    Ok(())
}

fn strip_comment(line: &str) -> &str {
    let line = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    line.trim()
}

fn split_key_value(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    let k = k.trim();
    let v = v.trim();
    if k.is_empty() {
        return None;
    }
    Some((k, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("scenario = joint_counter\n[pump]\ntype = selfsplit\ntheta_c = 0")
            .unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::JointCounter);
        assert_eq!(cfg.pump_kind, PumpKind::Selfsplit);
        assert_eq!(cfg.theta_c, Some(0.0));
        assert_eq!(cfg.lambda_p, 405e-9);
        assert_eq!(cfg.lambda_s, 780e-9);
        assert_eq!(cfg.w0, 1e-4);
        // joint_counter defaults to the five-Rayleigh-length plane
        let zr = cfg.rayleigh_zr();
        assert!((cfg.z_s_eff() - 5.0 * zr).abs() < 1e-12);
    }

    #[test]
    fn non_numeric_value_errors_with_key_and_line() {
        let err = parse_config("scenario = joint_counter\n[pump]\ntheta_c = π").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.message.contains("theta_c"), "{}", err.message);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err =
            parse_config("scenario = obstacle\n[geometry]\nwaist = 1e-4").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.message.contains("waist"));
    }

    #[test]
    fn unknown_section_is_rejected() {
        let err = parse_config("scenario = obstacle\n[beam]\nw0 = 1e-4").unwrap_err();
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn missing_scenario_is_rejected() {
        let err = parse_config("[pump]\ntype = hg00").unwrap_err();
        assert!(err.message.contains("scenario"));
    }

    #[test]
    fn nonpositive_length_is_rejected() {
        let err = parse_config("scenario = obstacle\n[geometry]\nw0 = -1e-4").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.message.contains("positive"));
    }

    #[test]
    fn z_det_override_applies() {
        let cfg = parse_config("scenario = heralded_2d\n[geometry]\nz_s = 0.388\nz_i = 0.388")
            .unwrap();
        assert_eq!(cfg.z_s_eff(), 0.388);
        assert_eq!(cfg.z_i_eff(), 0.388);
    }

    #[test]
    fn serialisation_is_idempotent() {
        for kind in ScenarioKind::ALL {
            let text = format!("scenario = {}\n", kind.name());
            let once = parse_config(&text).unwrap().to_config_string();
            let twice = parse_config(&once).unwrap().to_config_string();
            assert_eq!(once, twice, "normalisation not idempotent for {kind:?}");
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config(
            "# full setup\nscenario = obstacle  # trailing comment\n\n[geometry]\n# waist\nw0 = 2e-4\n",
        )
        .unwrap();
        assert_eq!(cfg.w0, 2e-4);
    }
}
