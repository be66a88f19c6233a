//! Phase strategies: how the unknown phase is distributed over the modes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Sublinear,
    Linear,
    Quadratic,
    Exponential,
    Delta,
    Custom,
}

impl StrategyKind {
    /// The tabulated trial strategies, in table order.
    pub const TABLE: [StrategyKind; 5] = [
        StrategyKind::Sublinear,
        StrategyKind::Linear,
        StrategyKind::Quadratic,
        StrategyKind::Exponential,
        StrategyKind::Delta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Sublinear => "sublinear",
            StrategyKind::Linear => "linear",
            StrategyKind::Quadratic => "quadratic",
            StrategyKind::Exponential => "exponential",
            StrategyKind::Delta => "delta",
            StrategyKind::Custom => "custom",
        }
    }

    /// Unnormalized weight of mode `j` (1-based).
    fn raw_weight(self, j: usize) -> f64 {
        let x = j as f64;
        match self {
            StrategyKind::Sublinear => x.sqrt(),
            StrategyKind::Linear => x - 1.0,
            StrategyKind::Quadratic => x * x,
            StrategyKind::Exponential => 2f64.powi(j as i32),
            StrategyKind::Delta => {
                if j == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            StrategyKind::Custom => unreachable!("custom strategies carry explicit weights"),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sublinear" | "sub-linear" => Ok(StrategyKind::Sublinear),
            "linear" => Ok(StrategyKind::Linear),
            "quadratic" => Ok(StrategyKind::Quadratic),
            "exponential" => Ok(StrategyKind::Exponential),
            "delta" => Ok(StrategyKind::Delta),
            "custom" => Ok(StrategyKind::Custom),
            other => Err(format!("unknown phase strategy `{other}`")),
        }
    }
}

/// Nonnegative per-mode phase weights normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStrategy {
    kind: StrategyKind,
    weights: Vec<f64>,
}

impl PhaseStrategy {
    /// Normalizes arbitrary nonnegative weights.
    pub fn custom(weights: &[f64]) -> Result<Self> {
        Self::normalized(StrategyKind::Custom, weights.to_vec())
    }

    fn normalized(kind: StrategyKind, mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::DegenerateStrategy(kind.to_string()));
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(
                "phase weight",
                w,
                "weights must be finite and nonnegative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::DegenerateStrategy(kind.to_string()));
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { kind, weights })
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Normalized trial strategy of the given kind over `n` modes.
///
/// The delta strategy is exactly `(1, 0, ..., 0)`; the linear strategy is
/// degenerate for a single mode.
pub fn strategy_table(kind: StrategyKind, n: usize) -> Result<PhaseStrategy> {
    if kind == StrategyKind::Custom {
        return Err(Error::DegenerateStrategy(
            "custom strategies need explicit weights".into(),
        ));
    }
    let weights = (1..=n).map(|j| kind.raw_weight(j)).collect();
    PhaseStrategy::normalized(kind, weights)
}
