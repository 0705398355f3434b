//! Experiment configuration: the JSON file format, CLI overrides, and the
//! per-experiment defaults that turn a partial file into concrete settings.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use rmt_entangle::ensembles::{EnsembleKind, EnsembleSpec};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Interpolating ensembles across δ with a CUE reference.
    FigInterpolating,
    /// Pseudo-random circuit operators across iteration counts.
    FigPseudorandom,
    /// Fixed-δ interpolating ensembles across dimensions.
    FigDimensionScan,
    /// ⟨Q(t)⟩ traces of the sawtooth, Harper and baker maps.
    FigMaps,
    /// ⟨Q(t)⟩ traces of interpolating operators and matched time pairs.
    FigInterpolatingTime,
    /// Diagonal and conjugated-diagonal counterexample ensembles.
    Counterexamples,
    /// Raw matrices of one ensemble in the interchange format.
    Export,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::FigInterpolating => "fig-interpolating",
            Self::FigPseudorandom => "fig-pseudorandom",
            Self::FigDimensionScan => "fig-dimension-scan",
            Self::FigMaps => "fig-maps",
            Self::FigInterpolatingTime => "fig-interpolating-time",
            Self::Counterexamples => "counterexamples",
            Self::Export => "export",
        }
    }

    /// Config keys this experiment understands besides the shared ones.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Self::FigInterpolating => &["dim", "qubit_count", "deltas", "q_samples", "bins"],
            Self::FigPseudorandom => &["dim", "qubit_count", "iterations", "bins"],
            Self::FigDimensionScan => &["dims", "delta", "bins"],
            Self::FigMaps => &["dim", "qubit_count", "sawtooth_k", "harper_gamma", "t_max", "hist_times", "bins"],
            Self::FigInterpolatingTime => &["dim", "qubit_count", "deltas", "t_max", "pairs", "bins"],
            Self::Counterexamples => &["dim", "qubit_count", "bins"],
            Self::Export => &["dim", "qubit_count", "ensemble", "format"],
        }
    }
}

/// `count` equal bins on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl BinSpec {
    fn validate(&self, what: &str) -> Result<(), CliError> {
        if self.count == 0 || !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(CliError::Config(format!(
                "bins.{what}: need finite lo < hi and count >= 1"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bins {
    pub amplitude: BinSpec,
    pub spacing: BinSpec,
    pub q: BinSpec,
}

impl Default for Bins {
    fn default() -> Self {
        Self {
            amplitude: BinSpec { lo: 0.0, hi: 8.0, count: 50 },
            spacing: BinSpec { lo: 0.0, hi: 4.0, count: 50 },
            q: BinSpec { lo: 0.0, hi: 1.0, count: 50 },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Binary,
    Csv,
}

/// The JSON configuration file. Every field is optional; unset fields take
/// the experiment's defaults and keys that the experiment does not use are
/// rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubit_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sawtooth_k: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harper_gamma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hist_times: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[u64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<Bins>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<ExportFormat>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    fn present_keys(&self) -> Vec<&'static str> {
        let flags = [
            ("dim", self.dim.is_some()),
            ("qubit_count", self.qubit_count.is_some()),
            ("dims", self.dims.is_some()),
            ("delta", self.delta.is_some()),
            ("deltas", self.deltas.is_some()),
            ("iterations", self.iterations.is_some()),
            ("sawtooth_k", self.sawtooth_k.is_some()),
            ("harper_gamma", self.harper_gamma.is_some()),
            ("q_samples", self.q_samples.is_some()),
            ("t_max", self.t_max.is_some()),
            ("hist_times", self.hist_times.is_some()),
            ("pairs", self.pairs.is_some()),
            ("bins", self.bins.is_some()),
            ("ensemble", self.ensemble.is_some()),
            ("format", self.format.is_some()),
        ];
        flags.iter().filter(|(_, set)| *set).map(|(k, _)| *k).collect()
    }
}

pub const DEFAULT_SEED: u64 = 20_040_101;

/// Fully resolved settings for one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub experiment: Experiment,
    pub seed: u64,
    pub samples: usize,
    pub output_dir: PathBuf,
    pub bins: Bins,
    pub params: Params,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Interpolating {
        dim: usize,
        deltas: Vec<f64>,
        q_samples: usize,
    },
    PseudoRandom {
        dim: usize,
        iterations: Vec<usize>,
    },
    DimensionScan {
        dims: Vec<usize>,
        delta: f64,
    },
    Maps {
        dim: usize,
        sawtooth_k: Vec<f64>,
        harper_gamma: Vec<f64>,
        t_max: u64,
        hist_times: Vec<u64>,
    },
    InterpolatingTime {
        dim: usize,
        deltas: [f64; 2],
        t_max: u64,
        pairs: Vec<[u64; 2]>,
    },
    Counterexamples {
        dim: usize,
    },
    Export {
        spec: EnsembleSpec,
        format: ExportFormat,
    },
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub amplitude_bins: Option<usize>,
    pub spacing_bins: Option<usize>,
    pub q_bins: Option<usize>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn resolve_dim(cfg: &ExperimentConfig, default: usize) -> Result<usize, CliError> {
    match (cfg.dim, cfg.qubit_count) {
        (Some(_), Some(_)) => Err(config_err("give either dim or qubit_count, not both")),
        (Some(d), None) => Ok(d),
        (None, Some(n)) if (1..=12).contains(&n) => Ok(1 << n),
        (None, Some(n)) => Err(config_err(format!("qubit_count {n} outside 1..=12"))),
        (None, None) => Ok(default),
    }
}

fn register_dim(dim: usize) -> Result<usize, CliError> {
    if dim >= 4 && dim.is_power_of_two() && dim <= 1 << 12 {
        Ok(dim)
    } else {
        Err(config_err(format!(
            "dim {dim} must be a power of two between 4 and 4096"
        )))
    }
}

fn unit_interval(values: &[f64], what: &str) -> Result<(), CliError> {
    if values.iter().all(|d| (0.0..=1.0).contains(d)) {
        Ok(())
    } else {
        Err(config_err(format!("{what} must lie in [0, 1]")))
    }
}

fn non_empty<T>(values: &[T], what: &str) -> Result<(), CliError> {
    if values.is_empty() {
        Err(config_err(format!("{what} must not be empty")))
    } else {
        Ok(())
    }
}

impl Settings {
    pub fn resolve(
        experiment: Experiment,
        cfg: &ExperimentConfig,
        overrides: &Overrides,
    ) -> Result<Self, CliError> {
        if let Some(named) = cfg.experiment {
            if named != experiment {
                return Err(config_err(format!(
                    "config is for {} but {} was requested",
                    named.name(),
                    experiment.name()
                )));
            }
        }
        let allowed = experiment.keys();
        if let Some(bad) = cfg.present_keys().into_iter().find(|k| !allowed.contains(k)) {
            return Err(config_err(format!(
                "key `{bad}` is not used by {}",
                experiment.name()
            )));
        }

        let default_samples = match experiment {
            Experiment::Export => 1,
            _ => 50,
        };
        let samples = overrides.samples.or(cfg.samples).unwrap_or(default_samples);
        if samples == 0 {
            return Err(config_err("samples must be >= 1"));
        }
        let seed = overrides.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
        let output_dir = overrides
            .output_dir
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(experiment.name()));

        let mut bins = cfg.bins.unwrap_or_default();
        if let Some(c) = overrides.amplitude_bins {
            bins.amplitude.count = c;
        }
        if let Some(c) = overrides.spacing_bins {
            bins.spacing.count = c;
        }
        if let Some(c) = overrides.q_bins {
            bins.q.count = c;
        }
        bins.amplitude.validate("amplitude")?;
        bins.spacing.validate("spacing")?;
        bins.q.validate("q")?;

        let params = match experiment {
            Experiment::FigInterpolating => {
                let deltas = cfg.deltas.clone().unwrap_or_else(|| vec![0.1, 0.5, 0.9, 0.98]);
                non_empty(&deltas, "deltas")?;
                unit_interval(&deltas, "deltas")?;
                let q_samples = cfg.q_samples.unwrap_or(100);
                if q_samples == 0 {
                    return Err(config_err("q_samples must be >= 1"));
                }
                Params::Interpolating {
                    dim: register_dim(resolve_dim(cfg, 256)?)?,
                    deltas,
                    q_samples,
                }
            }
            Experiment::FigPseudorandom => {
                let iterations = cfg.iterations.clone().unwrap_or_else(|| vec![2, 4, 8, 16, 40]);
                non_empty(&iterations, "iterations")?;
                if iterations.contains(&0) {
                    return Err(config_err("iterations must be >= 1"));
                }
                Params::PseudoRandom {
                    dim: register_dim(resolve_dim(cfg, 256)?)?,
                    iterations,
                }
            }
            Experiment::FigDimensionScan => {
                let dims = cfg.dims.clone().unwrap_or_else(|| vec![256, 128, 64, 32, 16, 8]);
                non_empty(&dims, "dims")?;
                for &d in &dims {
                    register_dim(d)?;
                }
                let delta = cfg.delta.unwrap_or(0.9);
                unit_interval(&[delta], "delta")?;
                Params::DimensionScan { dims, delta }
            }
            Experiment::FigMaps => {
                let t_max = cfg.t_max.unwrap_or(100);
                let hist_times = cfg.hist_times.clone().unwrap_or_else(|| vec![1, 50, 100]);
                if t_max == 0 || hist_times.iter().any(|&t| t == 0 || t > t_max) {
                    return Err(config_err("need t_max >= 1 and hist_times within 1..=t_max"));
                }
                let sawtooth_k = cfg.sawtooth_k.clone().unwrap_or_else(|| vec![1.5, -1.5]);
                let harper_gamma = cfg.harper_gamma.clone().unwrap_or_else(|| vec![1.0, 0.1]);
                if sawtooth_k.iter().chain(&harper_gamma).any(|x| !x.is_finite()) {
                    return Err(config_err("map parameters must be finite"));
                }
                Params::Maps {
                    dim: register_dim(resolve_dim(cfg, 256)?)?,
                    sawtooth_k,
                    harper_gamma,
                    t_max,
                    hist_times,
                }
            }
            Experiment::FigInterpolatingTime => {
                let deltas = cfg.deltas.clone().unwrap_or_else(|| vec![0.9, 0.98]);
                let deltas: [f64; 2] = deltas
                    .try_into()
                    .map_err(|_| config_err("deltas must hold exactly two values (slow, fast)"))?;
                unit_interval(&deltas, "deltas")?;
                let pairs = cfg
                    .pairs
                    .clone()
                    .unwrap_or_else(|| vec![[5, 1], [10, 2], [15, 3], [20, 4], [30, 6]]);
                let t_max = cfg.t_max.unwrap_or(30);
                if t_max == 0 || pairs.iter().flatten().any(|&t| t == 0 || t > t_max) {
                    return Err(config_err("need t_max >= 1 and pair times within 1..=t_max"));
                }
                Params::InterpolatingTime {
                    dim: register_dim(resolve_dim(cfg, 256)?)?,
                    deltas,
                    t_max,
                    pairs,
                }
            }
            Experiment::Counterexamples => Params::Counterexamples {
                dim: register_dim(resolve_dim(cfg, 256)?)?,
            },
            Experiment::Export => {
                let kind = cfg.ensemble.unwrap_or(EnsembleKind::CueHurwitz);
                let dim = resolve_dim(cfg, 256)?;
                let spec = EnsembleSpec::new(kind, dim, seed)
                    .map_err(|e| config_err(format!("ensemble: {e}")))?;
                Params::Export {
                    spec,
                    format: cfg.format.unwrap_or(ExportFormat::Csv),
                }
            }
        };
        Ok(Self {
            experiment,
            seed,
            samples,
            output_dir,
            bins,
            params,
        })
    }
}
