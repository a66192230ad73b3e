//! Mission configuration file. TOML with the sections `orbit`, `species`
//! (exactly two), `control`, and the optional `source` and `run`. Unknown
//! keys are rejected.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use ggc_core::budget::Mission;
use ggc_core::{OrbitModel, OrbitalPhase, SpeciesParams, TensorMode, UncertaintyInputs};
use serde::Deserialize;

pub const TABLE1: &str = include_str!("../presets/table1.toml");

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionConfig {
    pub orbit: OrbitSection,
    pub species: Vec<SpeciesSection>,
    pub control: ControlSection,
    #[serde(default)]
    pub source: SourceSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSection {
    /// Perigee altitude, m.
    pub altitude: f64,
    #[serde(default)]
    pub ellipticity: f64,
    pub gamma: Option<f64>,
    pub g0: Option<f64>,
    /// Orbital frequency, Hz.
    pub frequency: Option<f64>,
    #[serde(default)]
    pub chi0: f64,
    #[serde(default)]
    pub tensor_mode: Mode,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Circular,
    #[default]
    Exact,
    FirstOrder,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    pub name: String,
    pub lambda: f64,
    pub t: f64,
    pub mass_u: f64,
    pub atoms: f64,
    #[serde(default = "one")]
    pub contrast: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub delta_r0: Axes,
    pub delta_v0: Axes,
    #[serde(default)]
    pub offset_r0: Axes,
    #[serde(default)]
    pub offset_v0: Axes,
    pub delta_omega: f64,
    pub delta_gamma: f64,
    pub delta_theta: f64,
    pub delta_f: f64,
    #[serde(default)]
    pub delta_t: f64,
    #[serde(default)]
    pub delta_a_indep: f64,
    pub cycle_time: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub sigma_r: f64,
    pub sigma_v: f64,
    pub atoms: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        SourceSection { sigma_r: 224e-6, sigma_v: 100e-6, atoms: 1e6 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub chi_steps: usize,
    pub months: f64,
    pub max_rows: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { chi_steps: 720, months: 15.0, max_rows: 2000, output_dir: None }
    }
}

fn one() -> f64 {
    1.0
}

/// Per-axis value written either as one number or as `[x, y, z]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Axes {
    Same(f64),
    Each([f64; 3]),
}

impl Default for Axes {
    fn default() -> Self {
        Axes::Same(0.0)
    }
}

impl Axes {
    pub fn to_array(self) -> [f64; 3] {
        match self {
            Axes::Same(x) => [x; 3],
            Axes::Each(a) => a,
        }
    }
}

impl MissionConfig {
    /// `table1` selects the shipped preset; anything else is a file path.
    pub fn load(spec: &str) -> Result<Self, ConfigError> {
        if spec == "table1" {
            return Self::parse(TABLE1);
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: MissionConfig = toml::from_str(text)?;
        if cfg.species.len() != 2 {
            return Err(ConfigError::Invalid(format!("expected exactly 2 [[species]], found {}", cfg.species.len())));
        }
        Ok(cfg)
    }

    pub fn mission(&self) -> Result<Mission, ConfigError> {
        let invalid = |e: ggc_core::Error| ConfigError::Invalid(e.to_string());
        let o = &self.orbit;
        let mut orbit = OrbitModel::new(o.altitude, o.ellipticity).map_err(invalid)?;
        if let Some(g) = o.gamma {
            orbit = orbit.with_gamma(g);
        }
        if let Some(g0) = o.g0 {
            orbit = orbit.with_g0(g0);
        }
        if let Some(f) = o.frequency {
            orbit = orbit.with_omega(TAU * f);
        }
        let species = |s: &SpeciesSection| SpeciesParams {
            name: s.name.clone(),
            lambda: s.lambda,
            t: s.t,
            mass_u: s.mass_u,
            atoms: s.atoms,
            contrast: s.contrast,
        };
        let c = &self.control;
        let v = |a: Axes| a.to_array().into();
        let mission = Mission {
            orbit,
            species: [species(&self.species[0]), species(&self.species[1])],
            uncertainties: UncertaintyInputs {
                delta_r0: v(c.delta_r0),
                delta_v0: v(c.delta_v0),
                offset_r0: v(c.offset_r0),
                offset_v0: v(c.offset_v0),
                delta_omega: c.delta_omega,
                delta_gamma: c.delta_gamma,
                delta_theta: c.delta_theta,
                delta_f: c.delta_f,
                delta_t: c.delta_t,
                delta_a_indep: c.delta_a_indep,
            },
            cycle_time: c.cycle_time,
            chi0: OrbitalPhase::new(o.chi0),
            chi_steps: self.run.chi_steps,
            tensor_mode: match o.tensor_mode {
                Mode::Circular => TensorMode::Circular,
                Mode::Exact => TensorMode::Exact,
                Mode::FirstOrder => TensorMode::FirstOrder,
            },
        };
        mission.validate().map_err(invalid)?;
        Ok(mission)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_matches_library_mission() {
        let m = MissionConfig::load("table1").unwrap().mission().unwrap();
        let lib = Mission::table1();
        assert_eq!(m.species, lib.species);
        assert_eq!(m.uncertainties, lib.uncertainties);
        assert_eq!(m.cycle_time, lib.cycle_time);
        assert_eq!(m.orbit.gamma(), lib.orbit.gamma());
        assert!((m.orbit.omega() - lib.orbit.omega()).abs() < 1e-18);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = TABLE1.replace("[control]", "[control]\nbogus = 1");
        assert!(matches!(MissionConfig::parse(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn per_axis_values() {
        let text = TABLE1.replace("delta_r0 = 1e-6", "delta_r0 = [1e-6, 2e-6, 3e-6]");
        let m = MissionConfig::parse(&text).unwrap().mission().unwrap();
        assert_eq!(m.uncertainties.delta_r0.y, 2e-6);
    }
}
