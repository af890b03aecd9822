//! Switching-sequence synthesis.
//!
//! Four strategies share one report type:
//!
//! * `receding_horizon`: hold each candidate mode over a prediction horizon,
//!   pick the cheapest one that satisfies the piecewise-decrease constraint
//!   `W²(t_{j+1}) - W²(t_{j-1}) <= -γ W²(t_{j-1})`, apply it until the next
//!   jump time, repeat.
//! * `pointwise`: greedy one-step minimization, no constraint.
//! * `infinite_horizon`: best single mode by truncated area.
//! * `exact_tree`: exhaustive search over every per-step sequence.

mod baselines;
mod receding;
mod schedule;
mod tree;

use serde::{Deserialize, Serialize};

pub use baselines::{constant_mode_areas, synthesize_infinite_horizon, synthesize_pointwise};
pub use receding::synthesize_receding_horizon;
pub use schedule::SwitchingSchedule;
pub use tree::{solve_exact_tree, ENUMERATION_CAP_BITS};

use crate::error::{Error, Result};
use crate::system_model::{GaussianBelief, JumpSystem};
use crate::wasserstein::W2Trace;

/// Final W² must fall below this fraction of W²(0) for a truncated
/// infinite-horizon evaluation to count as converged.
pub const TRUNCATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum Strategy {
    RecedingHorizon,
    Pointwise,
    InfiniteHorizon,
    ExactTree,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::RecedingHorizon => "receding_horizon",
            Strategy::Pointwise => "pointwise",
            Strategy::InfiniteHorizon => "infinite_horizon",
            Strategy::ExactTree => "exact_tree",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    /// Prediction horizon `T` in steps. The horizon cost sums `T + 1` terms.
    pub horizon: usize,
    /// Steps between jump times. `None` picks `max(1, T / 2)`, the longest
    /// interval for which `T >= t_{j+1} - t_{j-1}` holds.
    pub update_interval: Option<usize>,
    pub dk: f64,
    /// Relative stability margin: `ε(t_j) = γ · W²(t_{j-1})`.
    pub gamma: f64,
    /// How far a single decision's span may be extended when no mode meets
    /// the constraint.
    pub max_horizon_growth: usize,
    pub total_steps: usize,
    pub strategy: Strategy,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            horizon: 10,
            update_interval: None,
            dk: 1.0,
            gamma: 0.01,
            max_horizon_growth: 100,
            total_steps: 100,
            strategy: Strategy::RecedingHorizon,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dk > 0.0 && self.dk.is_finite()) {
            return Err(Error::Config(format!("dk must be positive, got {}", self.dk)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if self.strategy == Strategy::RecedingHorizon && self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1 for receding_horizon".into()));
        }
        if self.update_interval == Some(0) {
            return Err(Error::Config("update_interval must be at least 1".into()));
        }
        Ok(())
    }

    pub fn effective_update_interval(&self) -> usize {
        self.update_interval.unwrap_or((self.horizon / 2).max(1))
    }
}

/// Every candidate evaluation made at one decision for one span length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonAttempt {
    /// Steps the mode would be held before the next jump time.
    pub span: usize,
    /// Prediction horizon used for the cost.
    pub horizon: usize,
    /// Horizon cost per mode (0-based index).
    pub costs: Vec<f64>,
    /// Predicted `W²(t_{j+1})` per mode.
    pub next_w2: Vec<f64>,
    pub feasible: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionRecord {
    pub jump_time: usize,
    /// 0-based.
    pub chosen_mode: usize,
    /// `W²(t_{j-1})`; absent at the first decision where the constraint is
    /// waived.
    pub reference_w2: Option<f64>,
    /// `ε(t_j)`.
    pub margin: Option<f64>,
    pub constraint_satisfied: bool,
    pub horizon_used: usize,
    pub span: usize,
    pub attempts: Vec<HorizonAttempt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationCheck {
    pub converged: bool,
    pub tail_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisReport {
    pub strategy: Strategy,
    pub schedule: SwitchingSchedule,
    pub trace: W2Trace,
    /// Area of each constant-mode schedule over the same number of steps.
    pub per_mode_areas: Vec<f64>,
    pub constraint_log: Vec<DecisionRecord>,
    /// Set by `infinite_horizon` only.
    pub truncation: Option<TruncationCheck>,
}

impl SynthesisReport {
    pub fn area(&self) -> f64 {
        self.trace.area()
    }

    /// 0-based index of the constant mode with the smallest area; ties go to
    /// the lower index.
    pub fn best_constant_mode(&self) -> Option<usize> {
        argmin(&self.per_mode_areas)
    }

    /// Decisions whose realized trajectory breaks the logged constraint
    /// `W²(t_{j+1}) - W²(t_{j-1}) <= -ε(t_j)`. Decisions whose span runs
    /// past the end of the trace are skipped.
    pub fn realized_constraint_violations(&self) -> Vec<usize> {
        let values = self.trace.values();
        self.constraint_log
            .iter()
            .filter_map(|d| {
                let (reference, margin) = (d.reference_w2?, d.margin?);
                let end = d.jump_time + d.span;
                let next = *values.get(end)?;
                (next - reference > -margin).then_some(d.jump_time)
            })
            .collect()
    }
}

/// Lowest-index minimum.
pub(crate) fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v < values[b]) {
            best = Some(i);
        }
    }
    best
}

pub(crate) fn check_belief(system: &JumpSystem, initial: &GaussianBelief) -> Result<()> {
    if initial.dim() != system.dim() {
        return Err(Error::dimension(
            "initial belief",
            (system.dim(), 1),
            (initial.dim(), 1),
        ));
    }
    Ok(())
}

/// Runs whichever strategy `config` selects.
pub fn synthesize(system: &JumpSystem, initial: &GaussianBelief, config: &SynthesisConfig) -> Result<SynthesisReport> {
    config.validate()?;
    match config.strategy {
        Strategy::RecedingHorizon => synthesize_receding_horizon(system, initial, config),
        Strategy::Pointwise => synthesize_pointwise(system, initial, config),
        Strategy::InfiniteHorizon => synthesize_infinite_horizon(system, initial, config),
        Strategy::ExactTree => solve_exact_tree(system, initial, config.total_steps, config.dk),
    }
}
