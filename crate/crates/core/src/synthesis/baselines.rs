use super::{
    argmin, check_belief, DecisionRecord, HorizonAttempt, Strategy, SwitchingSchedule, SynthesisConfig,
    SynthesisReport, TruncationCheck, TRUNCATION_TOLERANCE,
};
use crate::analysis::ensure_schur_stable;
use crate::error::Result;
use crate::system_model::{propagate_unchecked, GaussianBelief, JumpSystem};
use crate::wasserstein::{w2_gaussian_dirac, w2_trajectory, W2Trace};

/// Area under each constant-mode schedule over `steps` steps.
pub fn constant_mode_areas(system: &JumpSystem, initial: &GaussianBelief, steps: usize, dk: f64) -> Result<Vec<f64>> {
    (0..system.mode_count())
        .map(|mode| {
            w2_trajectory(system, initial, &SwitchingSchedule::constant(mode, steps), steps, dk).map(|t| t.area())
        })
        .collect()
}

/// Greedy baseline: at every step take the mode with the smallest
/// one-step-ahead W². No lookahead and no stability constraint, so it can
/// do worse than simply holding a good mode.
pub fn synthesize_pointwise(
    system: &JumpSystem,
    initial: &GaussianBelief,
    config: &SynthesisConfig,
) -> Result<SynthesisReport> {
    check_belief(system, initial)?;
    ensure_schur_stable(system)?;
    let total = config.total_steps;
    let per_mode_areas = constant_mode_areas(system, initial, total, config.dk)?;

    let mut current = initial.clone();
    let mut values = vec![w2_gaussian_dirac(initial)];
    let mut sequence = Vec::with_capacity(total);
    let mut log = Vec::with_capacity(total);
    for k in 0..total {
        let candidates: Vec<GaussianBelief> = system
            .modes()
            .iter()
            .map(|a| propagate_unchecked(&current, a))
            .collect();
        let next_w2: Vec<f64> = candidates.iter().map(w2_gaussian_dirac).collect();
        let mode = argmin(&next_w2).expect("a jump system has at least one mode");
        log.push(DecisionRecord {
            jump_time: k,
            chosen_mode: mode,
            reference_w2: None,
            margin: None,
            constraint_satisfied: true,
            horizon_used: 1,
            span: 1,
            attempts: vec![HorizonAttempt {
                span: 1,
                horizon: 1,
                costs: next_w2.iter().map(|w| w * config.dk).collect(),
                feasible: vec![true; next_w2.len()],
                next_w2: next_w2.clone(),
            }],
        });
        sequence.push(mode);
        values.push(next_w2[mode]);
        current = candidates.into_iter().nth(mode).expect("index from argmin");
    }

    Ok(SynthesisReport {
        strategy: Strategy::Pointwise,
        schedule: SwitchingSchedule::from_sequence(&sequence),
        trace: W2Trace::new(values, config.dk)?,
        per_mode_areas,
        constraint_log: log,
        truncation: None,
    })
}

/// Best single mode by area over `total_steps` (a truncation of the
/// infinite sum). The truncation is flagged unconverged unless the final
/// W² of the chosen mode is below `1e-9 · W²(0)`.
pub fn synthesize_infinite_horizon(
    system: &JumpSystem,
    initial: &GaussianBelief,
    config: &SynthesisConfig,
) -> Result<SynthesisReport> {
    check_belief(system, initial)?;
    ensure_schur_stable(system)?;
    let total = config.total_steps;
    let traces: Vec<W2Trace> = (0..system.mode_count())
        .map(|mode| {
            w2_trajectory(
                system,
                initial,
                &SwitchingSchedule::constant(mode, total),
                total,
                config.dk,
            )
        })
        .collect::<Result<_>>()?;
    let per_mode_areas: Vec<f64> = traces.iter().map(W2Trace::area).collect();
    let mode = argmin(&per_mode_areas).expect("a jump system has at least one mode");
    let trace = traces[mode].clone();

    let tail_ratio = if trace.first() > 0.0 {
        trace.last() / trace.first()
    } else {
        0.0
    };
    let truncation = TruncationCheck {
        converged: tail_ratio < TRUNCATION_TOLERANCE || trace.last() == 0.0,
        tail_ratio,
    };

    let log = if total > 0 {
        vec![DecisionRecord {
            jump_time: 0,
            chosen_mode: mode,
            reference_w2: None,
            margin: None,
            constraint_satisfied: true,
            horizon_used: total,
            span: total,
            attempts: vec![HorizonAttempt {
                span: total,
                horizon: total,
                costs: per_mode_areas.clone(),
                next_w2: traces.iter().map(W2Trace::last).collect(),
                feasible: vec![true; per_mode_areas.len()],
            }],
        }]
    } else {
        Vec::new()
    };

    Ok(SynthesisReport {
        strategy: Strategy::InfiniteHorizon,
        schedule: SwitchingSchedule::constant(mode, total),
        trace,
        per_mode_areas,
        constraint_log: log,
        truncation: Some(truncation),
    })
}
