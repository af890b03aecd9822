//! Declarative run configuration (JSON).
//!
//! Matrices are row-major nested arrays. Exactly one system source must be
//! present: `modes` (closed-loop matrices given directly), `plant`
//! (`A`, `B` and feedback gains), or `quadrotor` (physical parameters,
//! gains and sampling time). Modes are written 1-based everywhere a user
//! sees them; the config itself lists them in order.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::quadrotor::{build_quadrotor_jump_system, QuadrotorParams};
use crate::synthesis::{Strategy, SynthesisConfig};
use crate::system_model::{build_closed_loop, GaussianBelief, JumpSystem, PlantWithControllers};

pub const EXAMPLE1_JSON: &str = include_str!("../configs/example1.json");
pub const QUADROTOR_JSON: &str = include_str!("../configs/quadrotor.json");

type RawMatrix = Vec<Vec<f64>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    modes: Option<Vec<RawMatrix>>,
    plant: Option<RawPlant>,
    quadrotor: Option<RawQuadrotor>,
    initial: RawInitial,
    #[serde(default)]
    synthesis: RawSynthesis,
    #[serde(default)]
    output: OutputPaths,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlant {
    a: RawMatrix,
    b: RawMatrix,
    gains: Vec<RawMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrotor {
    #[serde(default)]
    params: QuadrotorParams,
    gains: Vec<RawMatrix>,
    dt: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    mu: Vec<f64>,
    sigma: RawMatrix,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSynthesis {
    strategy: Option<Strategy>,
    horizon: Option<usize>,
    update_interval: Option<usize>,
    dk: Option<f64>,
    gamma: Option<f64>,
    max_horizon_growth: Option<usize>,
    total_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub trajectory_csv: String,
    pub summary_json: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            trajectory_csv: "trajectory.csv".into(),
            summary_json: "summary.json".into(),
        }
    }
}

/// Where the mode matrices came from.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSource {
    Modes,
    Plant,
    Quadrotor { params: QuadrotorParams, dt: f64 },
}

impl SystemSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemSource::Modes => "modes",
            SystemSource::Plant => "plant",
            SystemSource::Quadrotor { .. } => "quadrotor",
        }
    }
}

/// A fully validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub name: Option<String>,
    pub source: SystemSource,
    pub system: JumpSystem,
    pub initial: GaussianBelief,
    pub synthesis: SynthesisConfig,
    pub output: OutputPaths,
}

/// Command-line overrides; `None` keeps the config value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub strategy: Option<Strategy>,
    pub total_steps: Option<usize>,
    pub horizon: Option<usize>,
    pub dk: Option<f64>,
    pub gamma: Option<f64>,
}

impl RunConfig {
    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        let s = &mut self.synthesis;
        if let Some(v) = o.strategy {
            s.strategy = v;
        }
        if let Some(v) = o.total_steps {
            s.total_steps = v;
        }
        if let Some(v) = o.horizon {
            s.horizon = v;
        }
        if let Some(v) = o.dk {
            s.dk = v;
        }
        if let Some(v) = o.gamma {
            s.gamma = v;
        }
        s.validate()
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse(format!(
            "line {} column {} (field `{path}`): {inner}",
            inner.line(),
            inner.column()
        ))
    })?;
    de.end().map_err(|e| Error::Parse(e.to_string()))?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig> {
    let present = [raw.modes.is_some(), raw.plant.is_some(), raw.quadrotor.is_some()];
    if present.iter().filter(|&&p| p).count() != 1 {
        return Err(Error::Config(
            "exactly one system source (`modes`, `plant` or `quadrotor`) must be given".into(),
        ));
    }

    let (source, system) = if let Some(modes) = raw.modes {
        let mats = modes
            .iter()
            .enumerate()
            .map(|(i, m)| to_matrix(m, &format!("mode {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        for (i, m) in mats.iter().enumerate() {
            if !m.is_square() {
                return Err(Error::dimension(
                    format!("mode {}", i + 1),
                    (m.nrows(), m.nrows()),
                    m.shape(),
                ));
            }
        }
        (SystemSource::Modes, JumpSystem::new(mats)?)
    } else if let Some(plant) = raw.plant {
        let p = PlantWithControllers {
            a: to_matrix(&plant.a, "plant.a")?,
            b: to_matrix(&plant.b, "plant.b")?,
            gains: plant
                .gains
                .iter()
                .enumerate()
                .map(|(i, k)| to_matrix(k, &format!("plant gain {}", i + 1)))
                .collect::<Result<_>>()?,
        };
        (SystemSource::Plant, build_closed_loop(&p)?)
    } else {
        let q = raw.quadrotor.expect("checked above");
        let gains = q
            .gains
            .iter()
            .enumerate()
            .map(|(i, k)| to_matrix(k, &format!("quadrotor gain {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        let system = build_quadrotor_jump_system(&q.params, &gains, q.dt)?;
        (
            SystemSource::Quadrotor {
                params: q.params,
                dt: q.dt,
            },
            system,
        )
    };

    let sigma = to_matrix(&raw.initial.sigma, "initial.sigma")?;
    let initial = GaussianBelief::new(DVector::from_vec(raw.initial.mu), sigma)?;
    if initial.dim() != system.dim() {
        return Err(Error::dimension("initial.mu", (system.dim(), 1), (initial.dim(), 1)));
    }

    let d = SynthesisConfig::default();
    let s = raw.synthesis;
    let synthesis = SynthesisConfig {
        horizon: s.horizon.unwrap_or(d.horizon),
        update_interval: s.update_interval,
        dk: s.dk.unwrap_or(d.dk),
        gamma: s.gamma.unwrap_or(d.gamma),
        max_horizon_growth: s.max_horizon_growth.unwrap_or(d.max_horizon_growth),
        total_steps: s.total_steps.unwrap_or(d.total_steps),
        strategy: s.strategy.unwrap_or(d.strategy),
    };
    synthesis.validate()?;

    Ok(RunConfig {
        name: raw.name,
        source,
        system,
        initial,
        synthesis,
        output: raw.output,
    })
}

fn to_matrix(rows: &RawMatrix, what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Config(format!("{what} is empty")));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::Config(format!(
            "{what} is ragged: row {} has {} entries, row 1 has {ncols}",
            i + 1,
            r.len()
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{what} has non-finite entries")));
    }
    Ok(DMatrix::from_row_iterator(nrows, ncols, rows.iter().flatten().copied()))
}

/// Gains shipped with the bundled quadrotor config (stabilizing, designed
/// offline by per-axis pole placement).
pub fn bundled_quadrotor_gains() -> Vec<DMatrix<f64>> {
    let raw: RawConfig = serde_json::from_str(QUADROTOR_JSON).expect("bundled config parses");
    raw.quadrotor
        .expect("bundled quadrotor section")
        .gains
        .iter()
        .map(|k| to_matrix(k, "bundled gain").expect("bundled gain is well-formed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{example1_initial, example1_system, example2_initial};

    #[test]
    fn example1_config_matches_reference_data() {
        let cfg = parse_config(EXAMPLE1_JSON).unwrap();
        assert_eq!(cfg.source, SystemSource::Modes);
        assert_eq!(cfg.system, example1_system());
        assert_eq!(cfg.initial, example1_initial());
        assert_eq!(cfg.synthesis.strategy, Strategy::RecedingHorizon);
        assert_eq!(cfg.synthesis.dk, 1.0);
        assert_eq!(cfg.synthesis.gamma, 0.01);
    }

    #[test]
    fn quadrotor_config_builds() {
        let cfg = parse_config(QUADROTOR_JSON).unwrap();
        assert_eq!(cfg.system.mode_count(), 2);
        assert_eq!(cfg.system.dim(), 6);
        assert_eq!(cfg.initial, example2_initial());
        assert!(matches!(cfg.source, SystemSource::Quadrotor { dt, .. } if dt == 0.01));
    }

    #[test]
    fn defaults_are_applied() {
        let cfg = parse_config(r#"{"modes": [[[0.5]]], "initial": {"mu": [1.0], "sigma": [[0.0]]}}"#).unwrap();
        assert_eq!(cfg.synthesis.dk, 1.0);
        assert_eq!(cfg.synthesis.gamma, 0.01);
        assert_eq!(cfg.synthesis.strategy, Strategy::RecedingHorizon);
        assert_eq!(cfg.output, OutputPaths::default());
    }

    #[test]
    fn non_square_mode_is_named() {
        let text = r#"{"modes": [[[0.5, 0.0], [0.0, 0.5]], [[0.1, 0.2, 0.3], [0.0, 0.1, 0.2]]],
                       "initial": {"mu": [1.0, 1.0], "sigma": [[0.0, 0.0], [0.0, 0.0]]}}"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("mode 2"), "{err}");
    }

    #[test]
    fn two_sources_rejected() {
        let text = r#"{"modes": [[[0.5]]],
                       "quadrotor": {"gains": [], "dt": 0.01},
                       "initial": {"mu": [1.0], "sigma": [[0.0]]}}"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("exactly one"), "{err}");
    }

    #[test]
    fn no_source_rejected() {
        let err = parse_config(r#"{"initial": {"mu": [1.0], "sigma": [[0.0]]}}"#).unwrap_err();
        assert!(err.to_string().contains("exactly one"));
    }

    #[test]
    fn parse_errors_carry_location_and_field() {
        let text = "{\n  \"modes\": [[[0.5]]],\n  \"initial\": {\"mu\": [1.0], \"sigma\": [[0.0]]},\n  \"synthesis\": {\"dk\": \"fast\"}\n}";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
        assert!(err.contains("synthesis.dk"), "{err}");
    }

    #[test]
    fn unknown_strategy_rejected() {
        let text = r#"{"modes": [[[0.5]]], "initial": {"mu": [1.0], "sigma": [[0.0]]},
                       "synthesis": {"strategy": "genetic"}}"#;
        assert!(matches!(parse_config(text), Err(Error::Parse(_))));
    }

    #[test]
    fn asymmetric_sigma_rejected() {
        let text = r#"{"modes": [[[0.5, 0.0], [0.0, 0.5]]],
                       "initial": {"mu": [1.0, 1.0], "sigma": [[1.0, 0.2], [0.1, 1.0]]}}"#;
        assert!(parse_config(text).is_err());
    }

    #[test]
    fn plant_source() {
        let text = r#"{"plant": {"a": [[1.0, 0.1], [0.0, 1.0]], "b": [[0.0], [0.1]],
                                 "gains": [[[-1.0, -1.5]], [[-2.0, -2.0]]]},
                       "initial": {"mu": [1.0, 0.0], "sigma": [[0.1, 0.0], [0.0, 0.1]]}}"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.source, SystemSource::Plant);
        assert_eq!(cfg.system.mode_count(), 2);
        assert!((cfg.system.modes()[0][(1, 0)] - (-0.1)).abs() < 1e-15);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let mut cfg = parse_config(EXAMPLE1_JSON).unwrap();
        cfg.apply_overrides(&Overrides {
            horizon: Some(5),
            gamma: Some(0.05),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(cfg.synthesis.horizon, 5);
        assert_eq!(cfg.synthesis.gamma, 0.05);
        assert!(cfg
            .apply_overrides(&Overrides {
                dk: Some(-1.0),
                ..Default::default()
            })
            .is_err());
    }
}
