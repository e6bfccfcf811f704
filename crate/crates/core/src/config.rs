//! Flat `key = value` configuration shared by the CLI subcommands.
//!
//! The format is deliberately primitive: one `key = value` per line, `#` or
//! `;` comments, dotted namespaces, no nesting. Unknown keys are rejected
//! by name and numeric values are range-checked at load time.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::netsim::{
    DegradationCdf, GridScenario, GridSpec, InterferenceScope, LinkBudget, NetModels, Shadowing,
};
use crate::propagation::{preset, Preset, PRESET_KEYS};
use crate::raytrace::CanyonGeometry;

/// Value constraint for a known key.
enum Kind {
    F64 { min: f64, max: f64 },
    U64 { min: u64, max: u64 },
    Bool,
    String,
}

/// The full key schema: name, constraint, documentation default.
const KNOWN_KEYS: &[(&str, Kind)] = &[
    (
        "seed",
        Kind::U64 {
            min: 0,
            max: u64::MAX,
        },
    ),
    // canyon.*
    (
        "canyon.width_m",
        Kind::F64 {
            min: 1.0,
            max: 500.0,
        },
    ),
    (
        "canyon.eps_r",
        Kind::F64 {
            min: 1.0 + 1e-9,
            max: 1e15,
        },
    ),
    (
        "canyon.bs_height_m",
        Kind::F64 {
            min: 0.1,
            max: 500.0,
        },
    ),
    (
        "canyon.ue_height_m",
        Kind::F64 {
            min: 0.1,
            max: 500.0,
        },
    ),
    (
        "canyon.bs_offset_m",
        Kind::F64 {
            min: 0.0,
            max: 500.0,
        },
    ),
    (
        "canyon.ue_offset_m",
        Kind::F64 {
            min: 0.0,
            max: 500.0,
        },
    ),
    ("canyon.max_bounces", Kind::U64 { min: 0, max: 64 }),
    ("canyon.ground", Kind::Bool),
    // grid.*
    (
        "grid.block_long_m",
        Kind::F64 {
            min: 1.0,
            max: 5000.0,
        },
    ),
    (
        "grid.block_short_m",
        Kind::F64 {
            min: 1.0,
            max: 5000.0,
        },
    ),
    ("grid.blocks_x", Kind::U64 { min: 4, max: 512 }),
    ("grid.blocks_y", Kind::U64 { min: 4, max: 512 }),
    (
        "grid.site_spacing_long_m",
        Kind::F64 {
            min: 1.0,
            max: 20000.0,
        },
    ),
    (
        "grid.site_spacing_short_m",
        Kind::F64 {
            min: 1.0,
            max: 20000.0,
        },
    ),
    (
        "grid.ue_step_m",
        Kind::F64 {
            min: 0.5,
            max: 1000.0,
        },
    ),
    // budget.*
    (
        "budget.tx_power_dbm",
        Kind::F64 {
            min: -50.0,
            max: 100.0,
        },
    ),
    (
        "budget.antenna_gain_dbi",
        Kind::F64 {
            min: -20.0,
            max: 60.0,
        },
    ),
    (
        "budget.ue_gain_dbi",
        Kind::F64 {
            min: -20.0,
            max: 60.0,
        },
    ),
    (
        "budget.noise_figure_db",
        Kind::F64 {
            min: 0.0,
            max: 30.0,
        },
    ),
    (
        "budget.bandwidth_hz",
        Kind::F64 {
            min: 1e3,
            max: 1e11,
        },
    ),
    (
        "budget.impl_penalty_db",
        Kind::F64 {
            min: 0.0,
            max: 30.0,
        },
    ),
    (
        "budget.cell_height_m",
        Kind::F64 {
            min: 1.0,
            max: 500.0,
        },
    ),
    (
        "budget.ue_height_m",
        Kind::F64 {
            min: 0.1,
            max: 100.0,
        },
    ),
    // netsim knobs
    ("degradation_cdf_file", Kind::String),
    ("shadowing.enabled", Kind::Bool),
    (
        "shadowing.corner_sigma_db",
        Kind::F64 {
            min: 0.0,
            max: 30.0,
        },
    ),
    ("interference.scope", Kind::String),
    ("netsim.same_street_preset", Kind::String),
    ("netsim.corner_preset", Kind::String),
    // angular.*
    (
        "angular.bins",
        Kind::U64 {
            min: 144,
            max: 1 << 20,
        },
    ),
];

/// Preset-override key fields: `preset.<name>.<field> = value`.
const PRESET_FIELDS: &[&str] = &[
    "intercept_db_1m",
    "exponent",
    "exponent_after",
    "sigma_db",
    "corner_loss_db",
    "corner_distance_m",
];

/// Parsed, validated configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ToolConfig {
    map: BTreeMap<String, String>,
}

impl ToolConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            validate_key(&key, &value)?;
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::config(format!(
                    "line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
        }
        Ok(ToolConfig { map })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        ToolConfig::parse(&text)
    }

    fn get_f64(&self, key: &str) -> Option<f64> {
        self.map.get(key).map(|v| v.parse().expect("validated"))
    }

    fn get_u64(&self, key: &str) -> Option<u64> {
        self.map.get(key).map(|v| v.parse().expect("validated"))
    }

    fn get_bool(&self, key: &str) -> Option<bool> {
        self.map.get(key).map(|v| parse_bool(v).expect("validated"))
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn seed(&self) -> Option<u64> {
        self.get_u64("seed")
    }

    pub fn angular_bins(&self) -> usize {
        self.get_u64("angular.bins").unwrap_or(144) as usize
    }

    /// Canyon geometry with config overrides applied to the defaults.
    pub fn canyon_geometry(&self) -> Result<CanyonGeometry> {
        let mut g = CanyonGeometry::default();
        if let Some(v) = self.get_f64("canyon.width_m") {
            g.street_width_m = v;
        }
        if let Some(v) = self.get_f64("canyon.eps_r") {
            g.wall_rel_permittivity = v;
        }
        if let Some(v) = self.get_f64("canyon.bs_height_m") {
            g.bs_height_m = v;
        }
        if let Some(v) = self.get_f64("canyon.ue_height_m") {
            g.ue_height_m = v;
        }
        if let Some(v) = self.get_f64("canyon.bs_offset_m") {
            g.bs_lateral_offset_m = v;
        }
        if let Some(v) = self.get_f64("canyon.ue_offset_m") {
            g.ue_lateral_offset_m = v;
        }
        if let Some(v) = self.get_u64("canyon.max_bounces") {
            g.max_wall_reflections = v as u32;
        }
        if let Some(v) = self.get_bool("canyon.ground") {
            g.include_ground = v;
        }
        g.validate()?;
        Ok(g)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let mut s = GridSpec::default();
        if let Some(v) = self.get_f64("grid.block_long_m") {
            s.block_long_m = v;
        }
        if let Some(v) = self.get_f64("grid.block_short_m") {
            s.block_short_m = v;
        }
        if let Some(v) = self.get_u64("grid.blocks_x") {
            s.blocks_x = v as u32;
        }
        if let Some(v) = self.get_u64("grid.blocks_y") {
            s.blocks_y = v as u32;
        }
        if let Some(v) = self.get_f64("grid.site_spacing_long_m") {
            s.site_spacing_long_m = v;
        }
        if let Some(v) = self.get_f64("grid.site_spacing_short_m") {
            s.site_spacing_short_m = v;
        }
        if let Some(v) = self.get_f64("grid.ue_step_m") {
            s.ue_step_m = v;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn link_budget(&self) -> LinkBudget {
        let mut b = LinkBudget::default();
        if let Some(v) = self.get_f64("budget.tx_power_dbm") {
            b.tx_power_dbm = v;
        }
        if let Some(v) = self.get_f64("budget.antenna_gain_dbi") {
            b.antenna_gain_dbi = v;
        }
        if let Some(v) = self.get_f64("budget.ue_gain_dbi") {
            b.ue_gain_dbi = v;
        }
        if let Some(v) = self.get_f64("budget.noise_figure_db") {
            b.noise_figure_db = v;
        }
        if let Some(v) = self.get_f64("budget.bandwidth_hz") {
            b.bandwidth_hz = v;
        }
        if let Some(v) = self.get_f64("budget.impl_penalty_db") {
            b.impl_penalty_db = v;
        }
        if let Some(v) = self.get_f64("budget.cell_height_m") {
            b.cell_height_m = v;
        }
        if let Some(v) = self.get_f64("budget.ue_height_m") {
            b.ue_height_m = v;
        }
        b
    }

    /// A preset with any `preset.<name>.<field>` overrides applied.
    pub fn preset(&self, name: &str) -> Result<Preset> {
        let mut p = preset(name)?;
        for field in PRESET_FIELDS {
            let key = format!("preset.{name}.{field}");
            let Some(v) = self.get_f64(&key) else {
                continue;
            };
            match (&mut p, *field) {
                (Preset::Slope(m), "intercept_db_1m") => m.intercept_db_1m = v,
                (Preset::Slope(m), "exponent") => m.exponent = v,
                (Preset::Slope(m), "sigma_db") => m.sigma_db = v,
                (Preset::Corner(m), "intercept_db_1m") => m.intercept_db_1m = v,
                (Preset::Corner(m), "exponent") => {
                    m.exponent_before = v;
                    if m.variant != crate::propagation::CornerVariant::DualSlope {
                        m.exponent_after = v;
                    }
                }
                (Preset::Corner(m), "exponent_after") => m.exponent_after = v,
                (Preset::Corner(m), "corner_loss_db") => m.corner_loss_db = v,
                (Preset::Corner(m), "corner_distance_m") => m.corner_distance_m = v,
                _ => {
                    return Err(Error::config(format!(
                        "key '{key}' does not apply to preset '{name}'"
                    )))
                }
            }
        }
        Ok(p)
    }

    /// Full network scenario: grid, budget, models, degradation CDF,
    /// shadowing, interference scope.
    pub fn grid_scenario(&self) -> Result<GridScenario> {
        let spec = self.grid_spec()?;
        let budget = self.link_budget();
        let same_key = self
            .get_str("netsim.same_street_preset")
            .unwrap_or("roof-edge");
        let corner_key = self
            .get_str("netsim.corner_preset")
            .unwrap_or("corner-diffraction-friis");
        let Preset::Slope(same_street) = self.preset(same_key)? else {
            return Err(Error::config(format!(
                "netsim.same_street_preset '{same_key}' is not a slope-intercept preset"
            )));
        };
        let Preset::Corner(corner) = self.preset(corner_key)? else {
            return Err(Error::config(format!(
                "netsim.corner_preset '{corner_key}' is not a corner preset"
            )));
        };
        let degradation = match self.get_str("degradation_cdf_file") {
            Some(path) => load_degradation_cdf(path)?,
            None => DegradationCdf::default_roof_edge(),
        };
        let shadowing = Shadowing {
            enabled: self.get_bool("shadowing.enabled").unwrap_or(false),
            corner_sigma_db: self
                .get_f64("shadowing.corner_sigma_db")
                .unwrap_or(Shadowing::default().corner_sigma_db),
        };
        let interference = match self.get_str("interference.scope").unwrap_or("all-routes") {
            "all-routes" => InterferenceScope::AllRoutes,
            "same-street" => InterferenceScope::SameStreetOnly,
            other => {
                return Err(Error::config(format!(
                    "interference.scope must be 'all-routes' or 'same-street', got '{other}'"
                )))
            }
        };
        Ok(GridScenario {
            spec,
            budget,
            models: NetModels {
                same_street,
                corner,
            },
            degradation,
            shadowing,
            interference,
        })
    }
}

/// Degradation CDF file: CSV with header `prob,degradation_db`.
pub fn load_degradation_cdf(path: impl AsRef<Path>) -> Result<DegradationCdf> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.as_ref().display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "prob,degradation_db" => {}
        _ => {
            return Err(Error::data(
                "degradation CDF must start with header 'prob,degradation_db'",
            ))
        }
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::data(format!(
                "degradation CDF line {}: expected 2 fields",
                i + 2
            )));
        }
        let p: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::data(format!("degradation CDF line {}: bad prob", i + 2)))?;
        let d: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::data(format!("degradation CDF line {}: bad value", i + 2)))?;
        points.push((p, d));
    }
    DegradationCdf::new(points)
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::config(format!("expected a boolean, got '{other}'"))),
    }
}

fn validate_key(key: &str, value: &str) -> Result<()> {
    if let Some(rest) = key.strip_prefix("preset.") {
        let Some((name, field)) = rest.rsplit_once('.') else {
            return Err(Error::config(format!(
                "unknown key '{key}' (preset overrides are preset.<name>.<field>)"
            )));
        };
        if !PRESET_KEYS.contains(&name) {
            return Err(Error::config(format!(
                "unknown key '{key}': no preset named '{name}'"
            )));
        }
        // The UMa comparison constants are reference values, not tunables.
        if name == "uma-los" || name == "uma-nlos" {
            return Err(Error::config(format!(
                "key '{key}': the {name} reference constants are not overridable"
            )));
        }
        if !PRESET_FIELDS.contains(&field) {
            return Err(Error::config(format!(
                "unknown key '{key}': no preset field '{field}'"
            )));
        }
        value
            .parse::<f64>()
            .map_err(|_| Error::config(format!("key '{key}': expected a number, got '{value}'")))?;
        return Ok(());
    }
    let Some((_, kind)) = KNOWN_KEYS.iter().find(|(k, _)| *k == key) else {
        return Err(Error::config(format!("unknown key '{key}'")));
    };
    match kind {
        Kind::F64 { min, max } => {
            let v: f64 = value.parse().map_err(|_| {
                Error::config(format!("key '{key}': expected a number, got '{value}'"))
            })?;
            if !(v >= *min && v <= *max) {
                return Err(Error::config(format!(
                    "key '{key}': value {v} outside [{min}, {max}]"
                )));
            }
        }
        Kind::U64 { min, max } => {
            let v: u64 = value.parse().map_err(|_| {
                Error::config(format!("key '{key}': expected an integer, got '{value}'"))
            })?;
            if v < *min || v > *max {
                return Err(Error::config(format!(
                    "key '{key}': value {v} outside [{min}, {max}]"
                )));
            }
        }
        Kind::Bool => {
            parse_bool(value).map_err(|_| {
                Error::config(format!("key '{key}': expected a boolean, got '{value}'"))
            })?;
        }
        Kind::String => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies_overrides() {
        let cfg = ToolConfig::parse(
            "# comment\n\
             seed = 42\n\
             canyon.width_m = 25\n\
             canyon.ground = false\n\
             grid.blocks_x = 6\n\
             preset.roof-edge.sigma_db = 6.5\n",
        )
        .unwrap();
        assert_eq!(cfg.seed(), Some(42));
        let g = cfg.canyon_geometry().unwrap();
        assert_eq!(g.street_width_m, 25.0);
        assert!(!g.include_ground);
        assert_eq!(cfg.grid_spec().unwrap().blocks_x, 6);
        let Preset::Slope(m) = cfg.preset("roof-edge").unwrap() else {
            panic!()
        };
        assert_eq!(m.sigma_db, 6.5);
        assert_eq!(m.intercept_db_1m, -35.0);
    }

    #[test]
    fn rejects_unknown_and_out_of_range() {
        let err = ToolConfig::parse("grid.bogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("grid.bogus"), "{err}");
        assert!(ToolConfig::parse("canyon.width_m = -3\n").is_err());
        assert!(ToolConfig::parse("canyon.ground = maybe\n").is_err());
        assert!(ToolConfig::parse("seed 42\n").is_err());
        assert!(ToolConfig::parse("seed = 1\nseed = 2\n").is_err());
        assert!(ToolConfig::parse("preset.nope.exponent = 1\n").is_err());
        assert!(ToolConfig::parse("preset.roof-edge.bogus = 1\n").is_err());
        assert!(ToolConfig::parse("preset.uma-los.exponent = -2\n").is_err());
    }

    #[test]
    fn default_scenario_from_empty_config() {
        let cfg = ToolConfig::parse("").unwrap();
        let scenario = cfg.grid_scenario().unwrap();
        assert_eq!(scenario.spec, GridSpec::default());
        assert_eq!(scenario.interference, InterferenceScope::AllRoutes);
        assert!(!scenario.shadowing.enabled);
        assert!((scenario.models.same_street.exponent - -3.56).abs() < 1e-12);
    }

    #[test]
    fn degradation_cdf_from_file() {
        let dir = std::env::temp_dir().join("canyoncov-config-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("deg.csv");
        std::fs::write(&path, "prob,degradation_db\n0,1.5\n1,1.5\n").unwrap();
        let cfg =
            ToolConfig::parse(&format!("degradation_cdf_file = {}\n", path.display())).unwrap();
        let scenario = cfg.grid_scenario().unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(0, 1 << 40);
        for _ in 0..16 {
            let d = scenario.degradation.sample(&mut rng);
            assert!((d - 1.5).abs() < 1e-12, "{d}");
        }

        std::fs::write(&path, "prob,degradation_db\n0,2\n1,1\n").unwrap();
        assert!(cfg.grid_scenario().is_err());
        std::fs::write(&path, "wrong,header\n").unwrap();
        assert!(cfg.grid_scenario().is_err());
    }

    #[test]
    fn scenario_knobs() {
        let cfg = ToolConfig::parse(
            "interference.scope = same-street\n\
             shadowing.enabled = true\n\
             netsim.corner_preset = corner-dualslope-friis\n",
        )
        .unwrap();
        let s = cfg.grid_scenario().unwrap();
        assert_eq!(s.interference, InterferenceScope::SameStreetOnly);
        assert!(s.shadowing.enabled);
        assert_eq!(
            s.models.corner.variant,
            crate::propagation::CornerVariant::DualSlope
        );
    }
}
