use std::f64::consts::PI;

use qumi_core::matrix::{build_qumi_cascade, sample_haar_unitary_with};
use qumi_core::metrology::{
    analytic_delta_phi, heisenberg_limit, network_sensitivity, shot_noise_limit,
    strategy_sensitivity, DEFAULT_STEP,
};
use qumi_core::noise::{dephased_sensitivity, lossy_sensitivity};
use qumi_core::permanent::{permanent_ryser, qufti_network_matrix, qufti_permanent_closed_form};
use qumi_core::strategy::strategy_table;
use qumi_core::{Complex64, Network, StrategyKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ExperimentConfig, OutputFormat};
use crate::{output, LabError};

/// Points on the loss grid, from `noise.fidelity` up to 1.
pub const LOSS_GRID_POINTS: usize = 50;
/// Points on the dephasing grid, from 0 up to `noise.dephasing_var`.
pub const DEPHASING_GRID_POINTS: usize = 51;
/// Phases in [0, 2 pi) compared by the permanent check.
pub const PERMANENT_GRID_POINTS: usize = 32;
pub const PERMANENT_TOLERANCE: f64 = 1e-9;
/// Label of the baseline rows in the strategy sweep.
pub const SHOT_NOISE_LABEL: &str = "shot-noise";

/// Switches that are not part of the reproducible configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Perturb one network entry before the Ryser evaluation of the
    /// permanent check, so that the check must fail.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub n: usize,
    pub strategy: String,
    pub delta_phi: Option<f64>,
    pub ratio_to_shotnoise: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalRow {
    pub n: usize,
    pub analytic_delta_phi: f64,
    pub pipeline_delta_phi: Option<f64>,
    pub shot_noise: f64,
    pub heisenberg: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomUnitaryRow {
    pub n: usize,
    pub samples: usize,
    pub min_delta_phi: Option<f64>,
    pub mean_delta_phi: Option<f64>,
    pub qumi_delta_phi: Option<f64>,
    pub shot_noise: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub n: usize,
    pub fidelity: f64,
    pub delta_phi: Option<f64>,
    pub shot_noise: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephasingRow {
    pub n: usize,
    pub phi: f64,
    pub dephasing_var: f64,
    pub delta_phi: Option<f64>,
    pub shot_noise: f64,
    pub heisenberg: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermanentRow {
    pub n: usize,
    pub points: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Strategy(Vec<StrategyRow>),
    Optimal(Vec<OptimalRow>),
    RandomUnitary(Vec<RandomUnitaryRow>),
    Loss(Vec<LossRow>),
    Dephasing(Vec<DephasingRow>),
    Permanent(Vec<PermanentRow>),
}

impl Report {
    /// True when some row carries an error or breaches its tolerance.
    pub fn has_failures(&self) -> bool {
        match self {
            Report::Strategy(r) => r.iter().any(|x| x.error.is_some()),
            Report::Optimal(r) => r.iter().any(|x| x.error.is_some()),
            Report::RandomUnitary(r) => r.iter().any(|x| x.error.is_some()),
            Report::Loss(r) => r.iter().any(|x| x.error.is_some()),
            Report::Dephasing(r) => r.iter().any(|x| x.error.is_some()),
            Report::Permanent(r) => r.iter().any(|x| !x.pass),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Report::Strategy(r) => r.len(),
            Report::Optimal(r) => r.len(),
            Report::RandomUnitary(r) => r.len(),
            Report::Loss(r) => r.len(),
            Report::Dephasing(r) => r.len(),
            Report::Permanent(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn emit(&self, format: OutputFormat) -> Result<String, LabError> {
        match self {
            Report::Strategy(r) => output::emit(r, format),
            Report::Optimal(r) => output::emit(r, format),
            Report::RandomUnitary(r) => output::emit(r, format),
            Report::Loss(r) => output::emit(r, format),
            Report::Dephasing(r) => output::emit(r, format),
            Report::Permanent(r) => output::emit(r, format),
        }
    }
}

pub fn run(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Report, LabError> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        Experiment::StrategySweep => Report::Strategy(strategy_sweep(cfg)),
        Experiment::OptimalCurve => Report::Optimal(optimal_curve(cfg)?),
        Experiment::RandomUnitarySweep => Report::RandomUnitary(random_unitary_sweep(cfg)),
        Experiment::LossSweep => Report::Loss(loss_sweep(cfg)),
        Experiment::DephasingSweep => Report::Dephasing(dephasing_sweep(cfg)),
        Experiment::PermanentCheck => Report::Permanent(permanent_check(cfg, opts.inject_fault)?),
    })
}

fn split<E: ToString>(r: Result<f64, E>) -> (Option<f64>, Option<String>) {
    match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

pub fn strategy_sweep(cfg: &ExperimentConfig) -> Vec<StrategyRow> {
    let ns = cfg.ns();
    let grid: Vec<(StrategyKind, usize)> = StrategyKind::TABLE
        .iter()
        .flat_map(|&k| ns.iter().map(move |&n| (k, n)))
        .collect();
    let mut rows: Vec<StrategyRow> = grid
        .par_iter()
        .map(|&(kind, n)| {
            let (delta_phi, error) = split(strategy_sensitivity(kind, n, cfg.phi0));
            StrategyRow {
                n,
                strategy: kind.name().to_string(),
                delta_phi,
                ratio_to_shotnoise: delta_phi.map(|d| d * (n as f64).sqrt()),
                error,
            }
        })
        .collect();
    rows.extend(ns.iter().map(|&n| StrategyRow {
        n,
        strategy: SHOT_NOISE_LABEL.to_string(),
        delta_phi: Some(shot_noise_limit(n)),
        ratio_to_shotnoise: Some(1.0),
        error: None,
    }));
    rows
}

pub fn optimal_curve(cfg: &ExperimentConfig) -> Result<Vec<OptimalRow>, LabError> {
    cfg.ns()
        .into_par_iter()
        .map(|n| {
            let pipeline =
                Network::qufti(n).and_then(|net| network_sensitivity(&net, cfg.phi0, DEFAULT_STEP));
            let (pipeline_delta_phi, error) = split(pipeline);
            Ok(OptimalRow {
                n,
                analytic_delta_phi: analytic_delta_phi(n)?,
                pipeline_delta_phi,
                shot_noise: shot_noise_limit(n),
                heisenberg: heisenberg_limit(n),
                error,
            })
        })
        .collect()
}

fn delta_network_sensitivity(v1: qumi_core::Matrix, phi0: f64) -> qumi_core::Result<f64> {
    let n = v1.dim();
    let net = Network::with_inverse(v1, strategy_table(StrategyKind::Delta, n)?)?;
    network_sensitivity(&net, phi0, DEFAULT_STEP)
}

/// Haar unitaries for one `n`, drawn from stream `n` of the seeded
/// generator so that changing the range does not change the draws.
pub fn haar_draws(n: usize, samples: usize, seed: u64) -> Vec<qumi_core::Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    (0..samples)
        .map(|_| sample_haar_unitary_with::<f64, _>(n, &mut rng))
        .collect()
}

pub fn random_unitary_sweep(cfg: &ExperimentConfig) -> Vec<RandomUnitaryRow> {
    cfg.ns()
        .into_iter()
        .map(|n| {
            let values: Vec<qumi_core::Result<f64>> = haar_draws(n, cfg.samples, cfg.seed)
                .into_par_iter()
                .map(|v1| delta_network_sensitivity(v1, cfg.phi0))
                .collect();
            let ok: Vec<f64> = values
                .iter()
                .filter_map(|r| r.as_ref().ok().copied())
                .collect();
            let failed = values.len() - ok.len();
            let mut error = values
                .iter()
                .find_map(|r| r.as_ref().err())
                .map(|e| format!("{failed} of {} samples failed, first: {e}", values.len()));
            let (qumi_delta_phi, qumi_err) =
                split(delta_network_sensitivity(build_qumi_cascade(n), cfg.phi0));
            if let Some(e) = qumi_err {
                error = Some(match error {
                    Some(prev) => format!("{prev}; cascade: {e}"),
                    None => format!("cascade: {e}"),
                });
            }
            let (min_delta_phi, mean_delta_phi) = if ok.is_empty() {
                (None, None)
            } else {
                let min = ok.iter().copied().fold(f64::INFINITY, f64::min);
                let mean = ok.iter().sum::<f64>() / ok.len() as f64;
                (Some(min), Some(mean))
            };
            RandomUnitaryRow {
                n,
                samples: cfg.samples,
                min_delta_phi,
                mean_delta_phi,
                qumi_delta_phi,
                shot_noise: shot_noise_limit(n),
                error,
            }
        })
        .collect()
}

/// `points` values from `lo` to `hi` with both ends hit exactly.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let last = (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * (i as f64 / last)
                    }
                })
                .collect()
        }
    }
}

pub fn loss_sweep(cfg: &ExperimentConfig) -> Vec<LossRow> {
    let grid: Vec<(usize, f64)> = cfg
        .ns()
        .into_iter()
        .flat_map(|n| {
            linspace(cfg.noise.fidelity, 1.0, LOSS_GRID_POINTS)
                .into_iter()
                .map(move |l| (n, l))
        })
        .collect();
    grid.par_iter()
        .map(|&(n, fidelity)| {
            let (delta_phi, error) = split(lossy_sensitivity(n, cfg.phi0, fidelity));
            LossRow {
                n,
                fidelity,
                delta_phi,
                shot_noise: shot_noise_limit(n),
                error,
            }
        })
        .collect()
}

pub fn dephasing_sweep(cfg: &ExperimentConfig) -> Vec<DephasingRow> {
    let grid: Vec<(usize, f64)> = cfg
        .ns()
        .into_iter()
        .flat_map(|n| {
            linspace(0.0, cfg.noise.dephasing_var, DEPHASING_GRID_POINTS)
                .into_iter()
                .map(move |v| (n, v))
        })
        .collect();
    grid.par_iter()
        .map(|&(n, dephasing_var)| {
            let (delta_phi, error) = split(dephased_sensitivity(n, cfg.phi0, dephasing_var));
            DephasingRow {
                n,
                phi: cfg.phi0,
                dephasing_var,
                delta_phi,
                shot_noise: shot_noise_limit(n),
                heisenberg: heisenberg_limit(n),
                error,
            }
        })
        .collect()
}

fn permanent_deviation(n: usize, phi: f64, inject_fault: bool) -> qumi_core::Result<f64> {
    let mut m = qufti_network_matrix(n, phi);
    if inject_fault {
        m[(0, 0)] += Complex64::new(1e-3, 0.0);
    }
    let ryser = permanent_ryser(&m)?;
    let closed = qufti_permanent_closed_form(n, phi)?;
    Ok((ryser - closed).norm())
}

pub fn permanent_check(
    cfg: &ExperimentConfig,
    inject_fault: bool,
) -> Result<Vec<PermanentRow>, LabError> {
    let phis: Vec<f64> = (0..PERMANENT_GRID_POINTS)
        .map(|k| 2.0 * PI * k as f64 / PERMANENT_GRID_POINTS as f64)
        .collect();
    cfg.ns()
        .into_par_iter()
        .map(|n| {
            let devs = phis
                .iter()
                .map(|&phi| permanent_deviation(n, phi, inject_fault))
                .collect::<qumi_core::Result<Vec<f64>>>()?;
            let max_deviation = devs.into_iter().fold(0.0, f64::max);
            Ok(PermanentRow {
                n,
                points: phis.len(),
                max_deviation,
                tolerance: PERMANENT_TOLERANCE,
                pass: max_deviation <= PERMANENT_TOLERANCE,
            })
        })
        .collect()
}
