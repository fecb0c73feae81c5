//! TOML run configuration: `[plant]`, `[radar]`, `[evolution]`,
//! `[episode]`, and `[controller.*]` sections, all optional. Command-line
//! flags override file values; file values override the defaults baked in
//! here.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controllers::{ControlLimits, PidMode, PidParams};
use crate::evolution::{EpisodeTemplate, EvolutionConfig};
use crate::genome::{GenomeKind, MutationRanges};
use crate::plant::{PlantModel, RadarModel};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub plant: PlantSection,
    pub radar: RadarSection,
    pub evolution: EvolutionSection,
    pub episode: EpisodeSection,
    pub controller: ControllerSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub a1: f64,
    pub a2: f64,
    pub d1: f64,
    pub d2: f64,
    pub dt: f64,
}

impl Default for PlantSection {
    fn default() -> Self {
        let fitted = PlantModel::fitted();
        Self {
            a1: fitted.num.0,
            a2: fitted.num.1,
            d1: fitted.den.0,
            d2: fitted.den.1,
            dt: fitted.dt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarSection {
    pub noise_sigma: f64,
    pub quantization: f64,
    pub median_window: usize,
    pub avg_window: usize,
    /// Run measurements through the median/average cascade inside the
    /// simulation loop. Off by default.
    pub apply_filters: bool,
}

impl Default for RadarSection {
    fn default() -> Self {
        let radar = RadarModel {
            quantization: 0.0,
            ..RadarModel::default()
        };
        Self {
            noise_sigma: radar.noise_sigma,
            quantization: radar.quantization,
            median_window: radar.median_window,
            avg_window: radar.avg_window,
            apply_filters: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub controller: GenomeKind,
    pub pop_size: usize,
    pub tournament_size: usize,
    pub p_mut_individual: f64,
    pub p_mut_param: f64,
    pub n_generations: usize,
    pub hof_size: usize,
    pub seed: u64,
    pub mutation: MutationSection,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let d = EvolutionConfig::default();
        Self {
            controller: d.kind,
            pop_size: d.pop_size,
            tournament_size: d.tournament_size,
            p_mut_individual: d.p_mut_individual,
            p_mut_param: d.p_mut_param,
            n_generations: d.n_generations,
            hof_size: d.hof_size,
            seed: d.seed,
            mutation: MutationSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MutationSection {
    pub weight: f64,
    pub threshold: f64,
    pub scale: f64,
    pub decay: f64,
}

impl Default for MutationSection {
    fn default() -> Self {
        let d = MutationRanges::default();
        Self {
            weight: d.weight,
            threshold: d.threshold,
            scale: d.scale,
            decay: d.decay,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeSection {
    pub n_setpoints: usize,
    pub setpoint_min: f64,
    pub setpoint_max: f64,
    pub hold_seconds: f64,
}

impl Default for EpisodeSection {
    fn default() -> Self {
        let d = EpisodeTemplate::default();
        Self {
            n_setpoints: d.n_setpoints,
            setpoint_min: d.setpoint_range.0,
            setpoint_max: d.setpoint_range.1,
            hold_seconds: d.hold_seconds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    pub u_max: f64,
    pub pid: PidSection,
    pub ann: HybridGainsSection,
    pub snn: HybridGainsSection,
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self {
            u_max: ControlLimits::default().u_max,
            pid: PidSection::default(),
            ann: HybridGainsSection::default(),
            snn: HybridGainsSection::default(),
        }
    }
}

/// Reality-gap PD gains per controller family (5 Hz loop).
const ANN_PD_GAINS: (f64, f64) = (1.3, 0.4);
const SNN_PD_GAINS: (f64, f64) = (1.4, 0.3);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidSection {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub mode: PidMode,
}

impl Default for PidSection {
    fn default() -> Self {
        let d = PidParams::altitude_default();
        Self {
            kp: d.kp,
            ki: d.ki,
            kd: d.kd,
            mode: d.mode,
        }
    }
}

/// Unset gains fall back to the family defaults in [`Config::hybrid_gains`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HybridGainsSection {
    pub pd_kp: Option<f64>,
    pub pd_kd: Option<f64>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.plant_model()?;
        config.radar_model()?;
        Ok(config)
    }

    pub fn plant_model(&self) -> Result<PlantModel, ConfigError> {
        PlantModel::new(
            (self.plant.a1, self.plant.a2),
            (self.plant.d1, self.plant.d2),
            self.plant.dt,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn radar_model(&self) -> Result<RadarModel, ConfigError> {
        let radar = RadarModel {
            noise_sigma: self.radar.noise_sigma,
            quantization: self.radar.quantization,
            median_window: self.radar.median_window,
            avg_window: self.radar.avg_window,
        };
        radar
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(radar)
    }

    pub fn limits(&self) -> Result<ControlLimits, ConfigError> {
        if !self.controller.u_max.is_finite() || self.controller.u_max <= 0.0 {
            return Err(ConfigError::Invalid("controller.u_max must be > 0".into()));
        }
        Ok(ControlLimits {
            u_max: self.controller.u_max,
        })
    }

    pub fn pid_params(&self) -> PidParams {
        PidParams {
            kp: self.controller.pid.kp,
            ki: self.controller.pid.ki,
            kd: self.controller.pid.kd,
            t: self.plant.dt,
            mode: self.controller.pid.mode,
        }
    }

    /// Parallel-PD gains for the hybrid wrapper of the given family.
    pub fn hybrid_gains(&self, kind: GenomeKind) -> (f64, f64) {
        let (section, defaults) = match kind {
            GenomeKind::Ann => (&self.controller.ann, ANN_PD_GAINS),
            GenomeKind::Snn => (&self.controller.snn, SNN_PD_GAINS),
        };
        (
            section.pd_kp.unwrap_or(defaults.0),
            section.pd_kd.unwrap_or(defaults.1),
        )
    }

    pub fn episode_template(&self) -> Result<EpisodeTemplate, ConfigError> {
        Ok(EpisodeTemplate {
            n_setpoints: self.episode.n_setpoints,
            setpoint_range: (self.episode.setpoint_min, self.episode.setpoint_max),
            hold_seconds: self.episode.hold_seconds,
            dt: self.plant.dt,
            radar: self.radar_model()?,
        })
    }

    pub fn evolution_config(&self) -> Result<EvolutionConfig, ConfigError> {
        let config = EvolutionConfig {
            kind: self.evolution.controller,
            pop_size: self.evolution.pop_size,
            tournament_size: self.evolution.tournament_size,
            p_mut_individual: self.evolution.p_mut_individual,
            p_mut_param: self.evolution.p_mut_param,
            n_generations: self.evolution.n_generations,
            hof_size: self.evolution.hof_size,
            mutation: MutationRanges {
                weight: self.evolution.mutation.weight,
                threshold: self.evolution.mutation.threshold,
                scale: self.evolution.mutation.scale,
                decay: self.evolution.mutation.decay,
            },
            episode: self.episode_template()?,
            plant: self.plant_model()?,
            limits: self.limits()?,
            apply_filters: self.radar.apply_filters,
            seed: self.evolution.seed,
        };
        config
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_yields_paper_defaults() {
        let config = Config::parse("").unwrap();
        let plant = config.plant_model().unwrap();
        assert_eq!(plant, PlantModel::fitted());
        let evo = config.evolution_config().unwrap();
        assert_eq!(evo.pop_size, 100);
        assert_eq!(evo.n_generations, 300);
        assert_eq!(evo.tournament_size, 3);
        assert_eq!(evo.p_mut_individual, 0.4);
        assert_eq!(evo.p_mut_param, 0.6);
        assert_eq!(evo.hof_size, 5);
        assert_eq!(config.pid_params().kp, 6.0);
        assert_eq!(config.hybrid_gains(GenomeKind::Snn), (1.4, 0.3));
        assert_eq!(config.hybrid_gains(GenomeKind::Ann), (1.3, 0.4));
    }

    #[test]
    fn sections_override_defaults() {
        let text = r#"
[plant]
d1 = -2.0
d2 = 1.0

[radar]
noise_sigma = 0.1
apply_filters = true

[evolution]
pop_size = 20
n_generations = 50
seed = 7

[episode]
hold_seconds = 10.0

[controller]
u_max = 2.0

[controller.pid]
kp = 1.0
mode = "accumulating"
"#;
        let config = Config::parse(text).unwrap();
        assert_eq!(config.plant_model().unwrap().den, (-2.0, 1.0));
        let evo = config.evolution_config().unwrap();
        assert_eq!(evo.pop_size, 20);
        assert_eq!(evo.seed, 7);
        assert_eq!(evo.limits.u_max, 2.0);
        assert!(evo.apply_filters);
        assert_eq!(evo.episode.hold_seconds, 10.0);
        assert_eq!(config.pid_params().mode, PidMode::Accumulating);
        assert_eq!(config.pid_params().kp, 1.0);
        // Untouched fields keep their defaults.
        assert_eq!(config.pid_params().ki, 0.4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::parse("[plant]\nwingspan = 4.0\n").is_err());
        assert!(Config::parse("[turbo]\nboost = true\n").is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(Config::parse("[plant]\ndt = 0.0\n").is_err());
        assert!(Config::parse("[radar]\nmedian_window = 2\n").is_err());
        let config = Config::parse("[evolution]\npop_size = 2\ntournament_size = 5\n").unwrap();
        assert!(config.evolution_config().is_err());
    }
}
