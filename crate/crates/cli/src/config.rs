//! Config file schema: fail-closed JSON with explicit keys.
//!
//! Unknown keys are rejected everywhere so a typo in a sweep axis or analysis
//! block surfaces as a config error instead of a silently ignored setting.

use serde::{Deserialize, Serialize};

use kdv_core::{InitialDataSpec, SolverConfig};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub box_length: f64,
    pub n: usize,
}

/// Damping selector; `zero` is the undamped flow, the rest mirror the
/// profile constructors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DampingConfig {
    Zero,
    Constant { alpha0: f64 },
    RightStep { alpha0: f64, r1: f64, width: f64 },
    LeftStep { alpha0: f64, r1: f64, width: f64 },
    Sponge { alpha0: f64, r1: f64, width: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDamping {
    kind: String,
    alpha0: Option<f64>,
    r1: Option<f64>,
    width: Option<f64>,
}

impl<'de> Deserialize<'de> for DampingConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawDamping::deserialize(d)?;
        fn need<E: Error>(v: Option<f64>, kind: &str, name: &str) -> Result<f64, E> {
            v.ok_or_else(|| E::custom(format!("{kind} damping requires field `{name}`")))
        }
        fn forbid<E: Error>(v: Option<f64>, kind: &str, name: &str) -> Result<(), E> {
            if v.is_some() {
                Err(E::custom(format!(
                    "field `{name}` does not apply to {kind} damping"
                )))
            } else {
                Ok(())
            }
        }
        match raw.kind.as_str() {
            "zero" => {
                forbid(raw.alpha0, "zero", "alpha0")?;
                forbid(raw.r1, "zero", "r1")?;
                forbid(raw.width, "zero", "width")?;
                Ok(DampingConfig::Zero)
            }
            "constant" => {
                forbid(raw.r1, "constant", "r1")?;
                forbid(raw.width, "constant", "width")?;
                Ok(DampingConfig::Constant {
                    alpha0: need(raw.alpha0, "constant", "alpha0")?,
                })
            }
            "right_step" | "left_step" | "sponge" => {
                let alpha0 = need(raw.alpha0, &raw.kind, "alpha0")?;
                let r1 = need(raw.r1, &raw.kind, "r1")?;
                let width = need(raw.width, &raw.kind, "width")?;
                Ok(match raw.kind.as_str() {
                    "right_step" => DampingConfig::RightStep { alpha0, r1, width },
                    "left_step" => DampingConfig::LeftStep { alpha0, r1, width },
                    _ => DampingConfig::Sponge { alpha0, r1, width },
                })
            }
            other => Err(D::Error::custom(format!(
                "unknown damping kind `{other}` (expected zero, constant, right_step, left_step, or sponge)"
            ))),
        }
    }
}

fn default_t0() -> f64 {
    1.0
}

/// One requested analysis; the JSON form is tagged by `kind`.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalysisSpec {
    /// Log-linear decay fits of the half-L2 energy over the given windows.
    DecayFit { windows: Vec<(f64, f64)> },
    /// Ratio of dissipation captured left of `r1` over `[T0, T]`.
    Observability {
        r1: f64,
        #[serde(rename = "T")]
        t_upper: f64,
        #[serde(rename = "T0")]
        t0: f64,
    },
    /// Non-decay floors under constant damping `mu`; when
    /// `supercritical_margin` is set the data is constructed on the threshold
    /// ray instead of taking the scenario's initial data.
    Vitillaro {
        mu: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        supercritical_margin: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        restarts: Option<usize>,
    },
    /// Picard fixed-point solve against the contraction-window bookkeeping.
    Picard {
        #[serde(rename = "T")]
        t_horizon: f64,
        tol: f64,
        c1: f64,
        n_t: usize,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    kind: String,
    windows: Option<Vec<(f64, f64)>>,
    r1: Option<f64>,
    #[serde(rename = "T")]
    t_upper: Option<f64>,
    #[serde(rename = "T0")]
    t0: Option<f64>,
    mu: Option<f64>,
    supercritical_margin: Option<f64>,
    restarts: Option<usize>,
    tol: Option<f64>,
    c1: Option<f64>,
    n_t: Option<usize>,
}

impl<'de> Deserialize<'de> for AnalysisSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawAnalysis::deserialize(d)?;
        let kind = raw.kind.clone();
        let need = |missing: &str| -> D::Error {
            D::Error::custom(format!("{kind} analysis requires field `{missing}`"))
        };
        let forbid = |present: bool, name: &str| -> Result<(), D::Error> {
            if present {
                Err(D::Error::custom(format!(
                    "field `{name}` does not apply to {kind} analysis"
                )))
            } else {
                Ok(())
            }
        };
        match raw.kind.as_str() {
            "decay_fit" => {
                forbid(raw.r1.is_some(), "r1")?;
                forbid(raw.t_upper.is_some(), "T")?;
                forbid(raw.t0.is_some(), "T0")?;
                forbid(raw.mu.is_some(), "mu")?;
                forbid(raw.supercritical_margin.is_some(), "supercritical_margin")?;
                forbid(raw.restarts.is_some(), "restarts")?;
                forbid(raw.tol.is_some(), "tol")?;
                forbid(raw.c1.is_some(), "c1")?;
                forbid(raw.n_t.is_some(), "n_t")?;
                Ok(AnalysisSpec::DecayFit {
                    windows: raw.windows.ok_or_else(|| need("windows"))?,
                })
            }
            "observability" => {
                forbid(raw.windows.is_some(), "windows")?;
                forbid(raw.mu.is_some(), "mu")?;
                forbid(raw.supercritical_margin.is_some(), "supercritical_margin")?;
                forbid(raw.restarts.is_some(), "restarts")?;
                forbid(raw.tol.is_some(), "tol")?;
                forbid(raw.c1.is_some(), "c1")?;
                forbid(raw.n_t.is_some(), "n_t")?;
                Ok(AnalysisSpec::Observability {
                    r1: raw.r1.ok_or_else(|| need("r1"))?,
                    t_upper: raw.t_upper.ok_or_else(|| need("T"))?,
                    t0: raw.t0.unwrap_or_else(default_t0),
                })
            }
            "vitillaro" => {
                forbid(raw.windows.is_some(), "windows")?;
                forbid(raw.r1.is_some(), "r1")?;
                forbid(raw.t_upper.is_some(), "T")?;
                forbid(raw.t0.is_some(), "T0")?;
                forbid(raw.tol.is_some(), "tol")?;
                forbid(raw.c1.is_some(), "c1")?;
                forbid(raw.n_t.is_some(), "n_t")?;
                Ok(AnalysisSpec::Vitillaro {
                    mu: raw.mu.ok_or_else(|| need("mu"))?,
                    supercritical_margin: raw.supercritical_margin,
                    restarts: raw.restarts,
                })
            }
            "picard" => {
                forbid(raw.windows.is_some(), "windows")?;
                forbid(raw.r1.is_some(), "r1")?;
                forbid(raw.t0.is_some(), "T0")?;
                forbid(raw.mu.is_some(), "mu")?;
                forbid(raw.supercritical_margin.is_some(), "supercritical_margin")?;
                forbid(raw.restarts.is_some(), "restarts")?;
                Ok(AnalysisSpec::Picard {
                    t_horizon: raw.t_upper.ok_or_else(|| need("T"))?,
                    tol: raw.tol.ok_or_else(|| need("tol"))?,
                    c1: raw.c1.ok_or_else(|| need("c1"))?,
                    n_t: raw.n_t.ok_or_else(|| need("n_t"))?,
                })
            }
            other => Err(D::Error::custom(format!(
                "unknown analysis kind `{other}` (expected decay_fit, observability, vitillaro, or picard)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub grid: GridConfig,
    pub initial_data: InitialDataSpec,
    pub damping: DampingConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub analyses: Vec<AnalysisSpec>,
    pub output_dir: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

fn default_parallelism() -> usize {
    4
}

fn default_max_runs() -> usize {
    512
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ScenarioConfig,
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_max_runs")]
    pub max_runs: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_round_trips_through_json() {
        let text = r#"{
            "scenario_id": "demo",
            "grid": {"box_length": 80.0, "n": 256},
            "initial_data": {"kind": "soliton", "c": 1.0, "x0": -10.0},
            "damping": {"kind": "right_step", "alpha0": 1.0, "r1": 10.0, "width": 4.0},
            "solver": {"dt": 0.001, "t_end": 1.0},
            "analyses": [
                {"kind": "decay_fit", "windows": [[0.2, 0.8]]},
                {"kind": "observability", "r1": 10.0, "T": 1.0},
                {"kind": "picard", "T": 0.05, "tol": 1e-8, "c1": 2.0, "n_t": 64}
            ],
            "output_dir": "out/demo"
        }"#;
        let cfg: ScenarioConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.scenario_id, "demo");
        match &cfg.analyses[1] {
            AnalysisSpec::Observability { t0, .. } => assert_eq!(*t0, 1.0),
            other => panic!("unexpected: {other:?}"),
        }
        let echoed = serde_json::to_string(&cfg).unwrap();
        let again: ScenarioConfig = serde_json::from_str(&echoed).unwrap();
        assert_eq!(serde_json::to_string(&again).unwrap(), echoed);
    }

    #[test]
    fn unknown_keys_fail_closed() {
        let bad = r#"{"kind": "constant", "alpha0": 0.1, "r2": 3.0}"#;
        assert!(serde_json::from_str::<DampingConfig>(bad).is_err());
        let bad2 = r#"{"kind": "zero", "alpha0": 0.1}"#;
        assert!(serde_json::from_str::<DampingConfig>(bad2).is_err());
        let bad3 = r#"{"kind": "decay_fit", "windows": [[0, 1]], "mu": 0.1}"#;
        assert!(serde_json::from_str::<AnalysisSpec>(bad3).is_err());
        let bad4 = r#"{"kind": "warp"}"#;
        assert!(serde_json::from_str::<AnalysisSpec>(bad4).is_err());
    }

    #[test]
    fn sweep_defaults_apply() {
        let text = r#"{
            "base": {
                "scenario_id": "base",
                "grid": {"box_length": 80.0, "n": 256},
                "initial_data": {"kind": "gaussian", "amplitude": 1.0, "sigma": 2.0},
                "damping": {"kind": "constant", "alpha0": 0.1},
                "solver": {"dt": 0.01, "t_end": 1.0},
                "output_dir": "out/sweep"
            },
            "axes": [{"name": "mu", "values": [0.01, 0.1]}]
        }"#;
        let cfg: SweepConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.parallelism, 4);
        assert_eq!(cfg.max_runs, 512);
        assert_eq!(cfg.axes[0].values.len(), 2);
    }
}
