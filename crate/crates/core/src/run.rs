//! Batch runner: synthesize, then write the trajectory CSV and summary JSON.
//!
//! CSV header: `k,time,mode,w2,mu_1..mu_n,trace_sigma`. `mode` is the
//! 1-based mode applied on the step from `k` to `k+1` and is empty on the
//! last row. Every float in both files is written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::analysis::{stability_report, verify_ms_stability, MsVerdict, DEFAULT_MS_THRESHOLD};
use crate::config::RunConfig;
use crate::error::Result;
use crate::synthesis::{synthesize, DecisionRecord, SynthesisReport};
use crate::system_model::simulate_schedule;
use crate::wasserstein::w2_gaussian_dirac;

/// Fixed 17-significant-digit rendering.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A float that serializes with [`fmt_f64`]; non-finite values become null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(fmt_f64(self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().copied().map(Num).collect()
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub name: Option<String>,
    pub system_source: &'static str,
    pub strategy: String,
    pub state_dim: usize,
    pub mode_count: usize,
    pub total_steps: usize,
    pub dk: Num,
    pub horizon: usize,
    pub update_interval: usize,
    pub gamma: Num,
    pub initial_w2: Num,
    pub per_mode_areas: Vec<ModeArea>,
    pub best_constant_mode: usize,
    pub best_constant_area: Num,
    pub switched_area: Num,
    /// Best constant-mode area divided by the switched area.
    pub area_ratio: Num,
    pub schedule: Vec<ScheduleEntry>,
    pub stability: StabilitySummary,
    pub truncation: Option<TruncationSummary>,
    pub constraint_log: Vec<LogEntry>,
}

#[derive(Debug, Serialize)]
pub struct ModeArea {
    pub mode: usize,
    pub area: Num,
}

#[derive(Debug, Serialize)]
pub struct ScheduleEntry {
    pub jump_time: usize,
    pub mode: usize,
}

#[derive(Debug, Serialize)]
pub struct StabilitySummary {
    pub spectral_radii: Vec<Num>,
    pub all_schur: bool,
    pub ms_stable: bool,
    pub terminal_w2: Num,
    pub threshold: Num,
    pub violation: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct TruncationSummary {
    pub converged: bool,
    pub tail_ratio: Num,
}

#[derive(Debug, Serialize)]
pub struct LogEntry {
    pub jump_time: usize,
    pub mode: usize,
    pub reference_w2: Option<Num>,
    pub margin: Option<Num>,
    pub constraint_satisfied: bool,
    pub horizon_used: usize,
    pub span: usize,
    pub attempts: Vec<AttemptEntry>,
}

#[derive(Debug, Serialize)]
pub struct AttemptEntry {
    pub span: usize,
    pub horizon: usize,
    pub costs: Vec<Num>,
    pub next_w2: Vec<Num>,
    pub feasible: Vec<bool>,
}

impl From<&DecisionRecord> for LogEntry {
    fn from(d: &DecisionRecord) -> Self {
        Self {
            jump_time: d.jump_time,
            mode: d.chosen_mode + 1,
            reference_w2: d.reference_w2.map(Num),
            margin: d.margin.map(Num),
            constraint_satisfied: d.constraint_satisfied,
            horizon_used: d.horizon_used,
            span: d.span,
            attempts: d
                .attempts
                .iter()
                .map(|a| AttemptEntry {
                    span: a.span,
                    horizon: a.horizon,
                    costs: nums(&a.costs),
                    next_w2: nums(&a.next_w2),
                    feasible: a.feasible.clone(),
                })
                .collect(),
        }
    }
}

/// Everything a run produces, before it is written out.
#[derive(Debug)]
pub struct RunOutput {
    pub report: SynthesisReport,
    pub verdict: MsVerdict,
    pub csv: String,
    pub summary: Summary,
    pub summary_json: String,
}

/// Synthesizes and renders, without touching the filesystem.
pub fn execute(config: &RunConfig) -> Result<RunOutput> {
    let report = synthesize(&config.system, &config.initial, &config.synthesis)?;
    let verdict = verify_ms_stability(&report.trace, &report.schedule.jump_times(), DEFAULT_MS_THRESHOLD);
    let csv = render_csv(config, &report)?;
    let summary = build_summary(config, &report, &verdict)?;
    let mut summary_json = serde_json::to_string_pretty(&summary)
        .map_err(|e| crate::error::Error::Parse(format!("cannot serialize summary: {e}")))?;
    summary_json.push('\n');
    Ok(RunOutput {
        report,
        verdict,
        csv,
        summary,
        summary_json,
    })
}

/// Paths of the files written by [`run`].
#[derive(Debug, Clone)]
pub struct WrittenFiles {
    pub trajectory_csv: PathBuf,
    pub summary_json: PathBuf,
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<(RunOutput, WrittenFiles)> {
    let output = execute(config)?;
    fs::create_dir_all(out_dir)?;
    let files = WrittenFiles {
        trajectory_csv: out_dir.join(&config.output.trajectory_csv),
        summary_json: out_dir.join(&config.output.summary_json),
    };
    fs::write(&files.trajectory_csv, &output.csv)?;
    fs::write(&files.summary_json, &output.summary_json)?;
    Ok((output, files))
}

fn render_csv(config: &RunConfig, report: &SynthesisReport) -> Result<String> {
    let steps = report.schedule.total_steps();
    let beliefs = simulate_schedule(&config.system, &config.initial, &report.schedule, steps)?;
    let n = config.system.dim();
    let dk = config.synthesis.dk;

    let mut out = String::from("k,time,mode,w2");
    for i in 1..=n {
        let _ = write!(out, ",mu_{i}");
    }
    out.push_str(",trace_sigma\n");
    for (k, b) in beliefs.iter().enumerate() {
        let mode = if k < steps {
            (report.schedule.mode_at(k)? + 1).to_string()
        } else {
            String::new()
        };
        let _ = write!(
            out,
            "{k},{},{mode},{}",
            fmt_f64(k as f64 * dk),
            fmt_f64(w2_gaussian_dirac(b))
        );
        for v in b.mu().iter() {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        let _ = writeln!(out, ",{}", fmt_f64(b.sigma().trace()));
    }
    Ok(out)
}

fn build_summary(config: &RunConfig, report: &SynthesisReport, verdict: &MsVerdict) -> Result<Summary> {
    let stability = stability_report(&config.system, Some(verdict.clone()))?;
    let best = report.best_constant_mode().expect("at least one mode");
    let best_area = report.per_mode_areas[best];
    let s = &config.synthesis;
    Ok(Summary {
        name: config.name.clone(),
        system_source: config.source.as_str(),
        strategy: report.strategy.to_string(),
        state_dim: config.system.dim(),
        mode_count: config.system.mode_count(),
        total_steps: s.total_steps,
        dk: Num(s.dk),
        horizon: s.horizon,
        update_interval: s.effective_update_interval(),
        gamma: Num(s.gamma),
        initial_w2: Num(report.trace.first()),
        per_mode_areas: report
            .per_mode_areas
            .iter()
            .enumerate()
            .map(|(i, &a)| ModeArea {
                mode: i + 1,
                area: Num(a),
            })
            .collect(),
        best_constant_mode: best + 1,
        best_constant_area: Num(best_area),
        switched_area: Num(report.area()),
        area_ratio: Num(best_area / report.area()),
        schedule: report
            .schedule
            .entries()
            .iter()
            .map(|&(t, m)| ScheduleEntry {
                jump_time: t,
                mode: m + 1,
            })
            .collect(),
        stability: StabilitySummary {
            spectral_radii: nums(&stability.per_mode_spectral_radius),
            all_schur: stability.all_schur,
            ms_stable: verdict.stable,
            terminal_w2: Num(verdict.terminal_w2),
            threshold: Num(verdict.threshold),
            violation: verdict.violation,
        },
        truncation: report.truncation.map(|t| TruncationSummary {
            converged: t.converged,
            tail_ratio: Num(t.tail_ratio),
        }),
        constraint_log: report.constraint_log.iter().map(LogEntry::from).collect(),
    })
}
