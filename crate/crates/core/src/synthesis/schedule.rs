use crate::error::{Error, Result};

/// A piecewise-constant mode assignment over `[0, total_steps)`.
///
/// Each entry is `(jump_time, mode)`; the mode holds until the next entry's
/// jump time (or the end of the schedule). Modes are 0-based. Consecutive
/// entries may carry the same mode: a decision that keeps the current mode
/// is still a jump time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchingSchedule {
    entries: Vec<(usize, usize)>,
    total_steps: usize,
}

impl SwitchingSchedule {
    pub fn new(entries: Vec<(usize, usize)>, total_steps: usize) -> Result<Self> {
        if total_steps == 0 {
            return Ok(Self { entries, total_steps });
        }
        match entries.first() {
            Some(&(0, _)) => {}
            Some(&(t, _)) => {
                return Err(Error::Input(format!(
                    "schedule must start at step 0, first jump is at {t}"
                )))
            }
            None => return Err(Error::Input("schedule has no entries".into())),
        }
        for w in entries.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Input(format!(
                    "jump times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(t, _)) = entries.last() {
            if t >= total_steps {
                return Err(Error::Input(format!(
                    "jump at step {t} lies outside the schedule of {total_steps} steps"
                )));
            }
        }
        Ok(Self { entries, total_steps })
    }

    pub fn constant(mode: usize, total_steps: usize) -> Self {
        let entries = if total_steps == 0 { Vec::new() } else { vec![(0, mode)] };
        Self { entries, total_steps }
    }

    /// One entry per step, i.e. every step is a jump time.
    pub fn from_sequence(modes: &[usize]) -> Self {
        Self {
            entries: modes.iter().copied().enumerate().collect(),
            total_steps: modes.len(),
        }
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    pub fn jump_times(&self) -> Vec<usize> {
        self.entries.iter().map(|&(t, _)| t).collect()
    }

    /// Mode applied at step `k` (the transition `k -> k+1`).
    pub fn mode_at(&self, k: usize) -> Result<usize> {
        if k >= self.total_steps {
            return Err(Error::Input(format!(
                "step {k} is outside the schedule of {} steps",
                self.total_steps
            )));
        }
        let idx = self.entries.partition_point(|&(t, _)| t <= k);
        Ok(self.entries[idx - 1].1)
    }

    /// Expanded per-step mode sequence.
    pub fn to_sequence(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total_steps);
        for (i, &(t, mode)) in self.entries.iter().enumerate() {
            let end = self.entries.get(i + 1).map_or(self.total_steps, |e| e.0);
            out.extend(std::iter::repeat_n(mode, end - t));
        }
        out
    }

    pub fn validate_modes(&self, mode_count: usize) -> Result<()> {
        match self.entries.iter().find(|&&(_, m)| m >= mode_count) {
            Some(&(t, m)) => Err(Error::Input(format!(
                "schedule uses mode {} at step {t}, but only {mode_count} modes exist",
                m + 1
            ))),
            None => Ok(()),
        }
    }
}
