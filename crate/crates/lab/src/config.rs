use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qumi_core::NoiseParams;
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    StrategySweep,
    OptimalCurve,
    RandomUnitarySweep,
    LossSweep,
    DephasingSweep,
    PermanentCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::StrategySweep,
        Experiment::OptimalCurve,
        Experiment::RandomUnitarySweep,
        Experiment::LossSweep,
        Experiment::DephasingSweep,
        Experiment::PermanentCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::StrategySweep => "strategy-sweep",
            Experiment::OptimalCurve => "optimal-curve",
            Experiment::RandomUnitarySweep => "random-unitary-sweep",
            Experiment::LossSweep => "loss-sweep",
            Experiment::DephasingSweep => "dephasing-sweep",
            Experiment::PermanentCheck => "permanent-check",
        }
    }

    /// Inclusive bounds on the mode count.
    fn n_limits(self) -> (usize, usize) {
        match self {
            Experiment::PermanentCheck => (1, 10),
            Experiment::RandomUnitarySweep => (2, 8),
            _ => (2, 8),
        }
    }

    /// Configuration used when neither the file nor the flags set a field.
    pub fn defaults(self) -> ExperimentConfig {
        let base = ExperimentConfig {
            experiment: self,
            n_min: 2,
            n_max: 8,
            phi0: 1e-3,
            samples: 1000,
            seed: 1,
            noise: NoiseParams::default(),
            output_path: PathBuf::from("-"),
            format: OutputFormat::Csv,
        };
        match self {
            Experiment::RandomUnitarySweep => ExperimentConfig { n_max: 5, ..base },
            Experiment::LossSweep => ExperimentConfig {
                n_min: 3,
                n_max: 6,
                noise: NoiseParams {
                    fidelity: 0.02,
                    dephasing_var: 0.0,
                },
                ..base
            },
            Experiment::DephasingSweep => ExperimentConfig {
                phi0: 0.1,
                noise: NoiseParams {
                    fidelity: 1.0,
                    dephasing_var: 0.005,
                },
                ..base
            },
            Experiment::PermanentCheck => ExperimentConfig { n_max: 10, ..base },
            _ => base,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| LabError::Usage(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Fully resolved experiment settings.
///
/// `noise.fidelity` is the lowest fidelity on the loss-sweep grid and
/// `noise.dephasing_var` the largest variance on the dephasing-sweep grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_min: usize,
    pub n_max: usize,
    pub phi0: f64,
    pub samples: usize,
    pub seed: u64,
    pub noise: NoiseParams,
    pub output_path: PathBuf,
    pub format: OutputFormat,
}

/// Partial configuration as read from a TOML file or the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub experiment: Option<Experiment>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub phi0: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub noise: Option<NoiseOverrides>,
    pub output_path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseOverrides {
    pub fidelity: Option<f64>,
    pub dephasing_var: Option<f64>,
}

impl ConfigOverrides {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Usage(format!("invalid config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: ConfigOverrides) -> ConfigOverrides {
        let noise = match (self.noise, other.noise) {
            (Some(a), Some(b)) => Some(NoiseOverrides {
                fidelity: b.fidelity.or(a.fidelity),
                dephasing_var: b.dephasing_var.or(a.dephasing_var),
            }),
            (a, b) => b.or(a),
        };
        ConfigOverrides {
            experiment: other.experiment.or(self.experiment),
            n_min: other.n_min.or(self.n_min),
            n_max: other.n_max.or(self.n_max),
            phi0: other.phi0.or(self.phi0),
            samples: other.samples.or(self.samples),
            seed: other.seed.or(self.seed),
            noise,
            output_path: other.output_path.or(self.output_path),
            format: other.format.or(self.format),
        }
    }

    /// Applies the overrides on top of the experiment's defaults and
    /// validates the result.
    pub fn resolve(self) -> Result<ExperimentConfig, LabError> {
        let experiment = self
            .experiment
            .ok_or_else(|| LabError::Usage("no experiment selected".into()))?;
        let d = experiment.defaults();
        let noise = self.noise.unwrap_or_default();
        let cfg = ExperimentConfig {
            experiment,
            n_min: self.n_min.unwrap_or(d.n_min),
            n_max: self.n_max.unwrap_or(d.n_max),
            phi0: self.phi0.unwrap_or(d.phi0),
            samples: self.samples.unwrap_or(d.samples),
            seed: self.seed.unwrap_or(d.seed),
            noise: NoiseParams {
                fidelity: noise.fidelity.unwrap_or(d.noise.fidelity),
                dephasing_var: noise.dephasing_var.unwrap_or(d.noise.dephasing_var),
            },
            output_path: self.output_path.unwrap_or(d.output_path),
            format: self.format.unwrap_or(d.format),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), LabError> {
        let (lo, hi) = self.experiment.n_limits();
        if !(lo <= self.n_min && self.n_min <= self.n_max && self.n_max <= hi) {
            return Err(LabError::Usage(format!(
                "{} needs {lo} <= n_min <= n_max <= {hi}, got n_min={} n_max={}",
                self.experiment, self.n_min, self.n_max
            )));
        }
        if self.samples < 1 {
            return Err(LabError::Usage("samples must be at least 1".into()));
        }
        if !self.phi0.is_finite() {
            return Err(LabError::Usage(format!(
                "phi0 must be finite, got {}",
                self.phi0
            )));
        }
        NoiseParams::new(self.noise.fidelity, self.noise.dephasing_var)
            .map_err(|e| LabError::Usage(e.to_string()))?;
        Ok(())
    }

    pub fn ns(&self) -> Vec<usize> {
        (self.n_min..=self.n_max).collect()
    }
}
