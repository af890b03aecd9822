use log::debug;
use nalgebra::DMatrix;

use super::{
    argmin, check_belief, constant_mode_areas, DecisionRecord, HorizonAttempt, Strategy, SwitchingSchedule,
    SynthesisConfig, SynthesisReport,
};
use crate::analysis::ensure_schur_stable;
use crate::error::{Error, Result};
use crate::system_model::{propagate_unchecked, GaussianBelief, JumpSystem};
use crate::wasserstein::{w2_gaussian_dirac, W2Trace};

/// W² along a constant-mode continuation from the current belief, grown on
/// demand.
struct Rollout<'a> {
    mode: &'a DMatrix<f64>,
    tip: GaussianBelief,
    w2: Vec<f64>,
}

impl<'a> Rollout<'a> {
    fn new(mode: &'a DMatrix<f64>, start: &GaussianBelief) -> Self {
        Self {
            mode,
            tip: start.clone(),
            w2: vec![w2_gaussian_dirac(start)],
        }
    }

    fn extend_to(&mut self, steps: usize) {
        while self.w2.len() <= steps {
            self.tip = propagate_unchecked(&self.tip, self.mode);
            self.w2.push(w2_gaussian_dirac(&self.tip));
        }
    }

    /// `dk · Σ_{s=0}^{horizon} W²(t_j + s)`.
    fn cost(&self, horizon: usize, dk: f64) -> f64 {
        dk * self.w2[..=horizon].iter().sum::<f64>()
    }
}

/// Receding-horizon switching with the piecewise-decrease constraint.
///
/// At each jump time every mode is held constant over the prediction horizon
/// and scored by its summed W². The cheapest mode whose W² at the next jump
/// time is at least `γ · W²(t_{j-1})` below the value at the previous jump
/// time wins (lower index on ties). The first decision has no previous jump
/// time and is unconstrained. When no mode qualifies, the span to the next
/// jump time grows one step at a time, up to `max_horizon_growth` extra
/// steps; the prediction horizon grows with it when the span overtakes it.
pub fn synthesize_receding_horizon(
    system: &JumpSystem,
    initial: &GaussianBelief,
    config: &SynthesisConfig,
) -> Result<SynthesisReport> {
    config.validate()?;
    check_belief(system, initial)?;
    ensure_schur_stable(system)?;

    let total = config.total_steps;
    let interval = config.effective_update_interval();
    if 2 * interval > config.horizon {
        debug!(
            "update interval {interval} exceeds half the horizon {}; jump spacing no longer fits inside one horizon",
            config.horizon
        );
    }
    let per_mode_areas = constant_mode_areas(system, initial, total, config.dk)?;

    let mut current = initial.clone();
    let mut values = vec![w2_gaussian_dirac(initial)];
    let mut entries = Vec::new();
    let mut log = Vec::new();
    let mut previous_jump_w2: Option<f64> = None;
    let mut k = 0;

    while k < total {
        let now_w2 = values[k];
        let margin = previous_jump_w2.map(|r| config.gamma * r);
        let mut rollouts: Vec<Rollout> = system.modes().iter().map(|a| Rollout::new(a, &current)).collect();
        let mut attempts = Vec::new();
        let mut choice = None;

        for growth in 0..=config.max_horizon_growth {
            let span = interval + growth;
            let horizon = config.horizon.max(span);
            for r in rollouts.iter_mut() {
                r.extend_to(horizon);
            }
            let costs: Vec<f64> = rollouts.iter().map(|r| r.cost(horizon, config.dk)).collect();
            let next_w2: Vec<f64> = rollouts.iter().map(|r| r.w2[span]).collect();
            let feasible: Vec<bool> = next_w2
                .iter()
                .map(|&w| match (previous_jump_w2, margin) {
                    (Some(reference), Some(eps)) => w - reference <= -eps,
                    _ => true,
                })
                .collect();
            let masked: Vec<f64> = costs
                .iter()
                .zip(&feasible)
                .map(|(&c, &ok)| if ok { c } else { f64::INFINITY })
                .collect();
            let best = argmin(&masked).filter(|&i| feasible[i]);
            attempts.push(HorizonAttempt {
                span,
                horizon,
                costs,
                next_w2,
                feasible,
            });
            if let Some(mode) = best {
                choice = Some((mode, span, horizon));
                break;
            }
        }

        let Some((mode, span, horizon)) = choice else {
            let partial = SynthesisReport {
                strategy: Strategy::RecedingHorizon,
                schedule: SwitchingSchedule::new(entries, k)?,
                trace: W2Trace::new(values, config.dk)?,
                per_mode_areas,
                constraint_log: log,
                truncation: None,
            };
            return Err(Error::ConstraintUnsatisfiable {
                jump_time: k,
                max_growth: config.max_horizon_growth,
                partial: Box::new(partial),
            });
        };

        debug!("t={k}: mode {} held for {span} steps (horizon {horizon})", mode + 1);
        entries.push((k, mode));
        log.push(DecisionRecord {
            jump_time: k,
            chosen_mode: mode,
            reference_w2: previous_jump_w2,
            margin,
            constraint_satisfied: true,
            horizon_used: horizon,
            span,
            attempts,
        });

        let a = &system.modes()[mode];
        let applied = span.min(total - k);
        for _ in 0..applied {
            current = propagate_unchecked(&current, a);
            values.push(w2_gaussian_dirac(&current));
        }
        previous_jump_w2 = Some(now_w2);
        k += applied;
    }

    Ok(SynthesisReport {
        strategy: Strategy::RecedingHorizon,
        schedule: SwitchingSchedule::new(entries, total)?,
        trace: W2Trace::new(values, config.dk)?,
        per_mode_areas,
        constraint_log: log,
        truncation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{example1_initial, example1_system};
    use crate::wasserstein::w2_trajectory;
    use nalgebra::DMatrix;

    fn config(horizon: usize, total: usize) -> SynthesisConfig {
        SynthesisConfig {
            horizon,
            total_steps: total,
            ..Default::default()
        }
    }

    #[test]
    fn single_mode_gives_constant_schedule() {
        let sys = JumpSystem::new(vec![example1_system().modes()[1].clone()]).unwrap();
        let rep = synthesize_receding_horizon(&sys, &example1_initial(), &config(4, 30)).unwrap();
        assert!(rep.schedule.to_sequence().iter().all(|&m| m == 0));
        let constant = w2_trajectory(&sys, &example1_initial(), &SwitchingSchedule::constant(0, 30), 30, 1.0).unwrap();
        assert_eq!(rep.trace, constant);
    }

    #[test]
    fn identical_modes_tie_to_lower_index() {
        let a = example1_system().modes()[2].clone();
        let sys = JumpSystem::new(vec![a.clone(), a]).unwrap();
        let rep = synthesize_receding_horizon(&sys, &example1_initial(), &config(3, 20)).unwrap();
        assert!(rep.schedule.to_sequence().iter().all(|&m| m == 0));
    }

    #[test]
    fn unstable_mode_rejected() {
        let sys = JumpSystem::new(vec![DMatrix::identity(2, 2) * 0.5, DMatrix::identity(2, 2) * 1.01]).unwrap();
        let err = synthesize_receding_horizon(&sys, &example1_initial(), &config(2, 10)).unwrap_err();
        assert!(matches!(err, Error::NotSchurStable { mode: 2, .. }));
    }

    #[test]
    fn example1_beats_every_constant_mode() {
        let rep = synthesize_receding_horizon(&example1_system(), &example1_initial(), &config(2, 60)).unwrap();
        assert_eq!(rep.best_constant_mode(), Some(1));
        for &a in &rep.per_mode_areas {
            assert!(rep.area() < a);
        }
        assert!(rep.realized_constraint_violations().is_empty());
    }

    #[test]
    fn first_decision_is_unconstrained() {
        let rep = synthesize_receding_horizon(&example1_system(), &example1_initial(), &config(2, 10)).unwrap();
        let first = &rep.constraint_log[0];
        assert_eq!(first.reference_w2, None);
        assert!(first.attempts[0].feasible.iter().all(|&f| f));
        assert!(rep.constraint_log[1..].iter().all(|d| d.margin.is_some()));
    }

    #[test]
    fn span_extends_when_constraint_fails() {
        // Mode 1 has a large transient: after one step W² grows, so a 1-step
        // span cannot satisfy the decrease requirement; it needs a few steps.
        let shear = DMatrix::from_row_slice(2, 2, &[0.6, 3.0, 0.0, 0.6]);
        let sys = JumpSystem::new(vec![shear]).unwrap();
        let init = GaussianBelief::dirac(nalgebra::DVector::from_vec(vec![0.0, 1.0])).unwrap();
        let cfg = SynthesisConfig {
            horizon: 1,
            update_interval: Some(1),
            total_steps: 12,
            ..Default::default()
        };
        let rep = synthesize_receding_horizon(&sys, &init, &cfg).unwrap();
        assert!(rep.constraint_log.iter().any(|d| d.span > 1 && d.attempts.len() > 1));
        assert!(rep.realized_constraint_violations().is_empty());
    }

    #[test]
    fn unsatisfiable_constraint_carries_partial_report() {
        let shear = DMatrix::from_row_slice(2, 2, &[0.6, 3.0, 0.0, 0.6]);
        let sys = JumpSystem::new(vec![shear]).unwrap();
        let init = GaussianBelief::dirac(nalgebra::DVector::from_vec(vec![0.0, 1.0])).unwrap();
        let cfg = SynthesisConfig {
            horizon: 1,
            update_interval: Some(1),
            max_horizon_growth: 0,
            total_steps: 12,
            ..Default::default()
        };
        match synthesize_receding_horizon(&sys, &init, &cfg).unwrap_err() {
            Error::ConstraintUnsatisfiable { jump_time, partial, .. } => {
                assert_eq!(jump_time, 1);
                assert_eq!(partial.schedule.total_steps(), 1);
                assert_eq!(partial.trace.len(), 2);
            }
            e => panic!("unexpected {e}"),
        }
    }
}
