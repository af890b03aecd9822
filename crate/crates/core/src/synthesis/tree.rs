use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{check_belief, constant_mode_areas, Strategy, SwitchingSchedule, SynthesisReport};
use crate::error::{Error, Result};
use crate::system_model::{GaussianBelief, JumpSystem};
use crate::wasserstein::w2_trajectory;

/// Enumeration is refused when `steps · log2(m)` exceeds this many bits.
pub const ENUMERATION_CAP_BITS: f64 = 24.0;

type Best = Option<(f64, Vec<usize>)>;

/// Exhaustive search over all `m^steps` per-step mode sequences for the
/// minimum of `dk · Σ_{k=0}^{steps} W²(k)`. Modes may change at every step.
///
/// Ties resolve to the lexicographically smallest sequence. The search is
/// split across workers by first mode; the reduction keeps the earlier
/// partition on equal cost, so the result does not depend on scheduling.
pub fn solve_exact_tree(
    system: &JumpSystem,
    initial: &GaussianBelief,
    steps: usize,
    dk: f64,
) -> Result<SynthesisReport> {
    check_belief(system, initial)?;
    let m = system.mode_count();
    if steps as f64 * (m as f64).log2() > ENUMERATION_CAP_BITS {
        return Err(Error::EnumerationCap { modes: m, steps });
    }
    if !(dk > 0.0 && dk.is_finite()) {
        return Err(Error::Input(format!("sampling interval dk must be positive, got {dk}")));
    }

    let sequence = if steps == 0 || m == 1 {
        vec![0; steps]
    } else {
        let root = initial.second_moment();
        let partitions: Vec<Best> = (0..m)
            .into_par_iter()
            .map(|first| {
                let a = &system.modes()[first];
                let next = a * &root * a.transpose();
                let mut seq = Vec::with_capacity(steps);
                seq.push(first);
                let mut best = None;
                search(
                    system.modes(),
                    &next,
                    steps,
                    root.trace() + next.trace(),
                    &mut seq,
                    &mut best,
                );
                best
            })
            .collect();
        partitions
            .into_iter()
            .flatten()
            .fold(None::<(f64, Vec<usize>)>, |acc, cand| match acc {
                Some(ref b) if b.0 <= cand.0 => acc,
                _ => Some(cand),
            })
            .map(|(_, seq)| seq)
            .expect("at least one partition is searched")
    };

    let schedule = SwitchingSchedule::from_sequence(&sequence);
    let trace = w2_trajectory(system, initial, &schedule, steps, dk)?;
    Ok(SynthesisReport {
        strategy: Strategy::ExactTree,
        schedule,
        trace,
        per_mode_areas: constant_mode_areas(system, initial, steps, dk)?,
        constraint_log: Vec::new(),
        truncation: None,
    })
}

/// Depth-first over the second-moment matrix `μμᵀ + Σ`, whose trace is W².
/// Children are visited in mode order and only a strictly better leaf
/// replaces the incumbent.
fn search(
    modes: &[DMatrix<f64>],
    moment: &DMatrix<f64>,
    steps: usize,
    sum: f64,
    seq: &mut Vec<usize>,
    best: &mut Best,
) {
    if seq.len() == steps {
        if best.as_ref().is_none_or(|b| sum < b.0) {
            *best = Some((sum, seq.clone()));
        }
        return;
    }
    for (i, a) in modes.iter().enumerate() {
        let next = a * moment * a.transpose();
        seq.push(i);
        search(modes, &next, steps, sum + next.trace(), seq, best);
        seq.pop();
    }
}
