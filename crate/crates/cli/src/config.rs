//! Scenario files.
//!
//! ```json
//! {
//!   "experiment": "E3_shorttime_scaling",
//!   "parameters": { "lambda": 0.3 },
//!   "seed": 42,
//!   "output_path": "out/e3.csv"
//! }
//! ```
//!
//! Missing parameters take their defaults; unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;

use gnfield_core::ModelKind;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Experiment {
    #[serde(rename = "E1_unitarity")]
    E1Unitarity,
    #[serde(rename = "E2_oracle_bosonic")]
    E2OracleBosonic,
    #[serde(rename = "E3_shorttime_scaling")]
    E3ShorttimeScaling,
    #[serde(rename = "E4_stochastic_match")]
    E4StochasticMatch,
    #[serde(rename = "E5_spin_env")]
    E5SpinEnv,
    #[serde(rename = "E6_largeN_scaling")]
    E6LargeNScaling,
    #[serde(rename = "E7_spectrum_spread")]
    E7SpectrumSpread,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    /// Integer `>= 1`.
    Count,
    /// Finite real.
    Real,
    /// Real `> 0`.
    Positive,
    /// Real `>= 0`.
    NonNegative,
    /// Non-empty list of reals `>= 0`.
    NonNegativeList,
    /// Non-empty list of integers `>= 1`.
    CountList,
    /// `"exchange"`, `"hopping"` or `"both"`.
    Model,
}

pub struct ParamSpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: fn() -> Value,
    pub help: &'static str,
}

macro_rules! p {
    ($name:literal, $kind:ident, $default:expr, $help:literal) => {
        ParamSpec {
            name: $name,
            kind: Kind::$kind,
            default: || json!($default),
            help: $help,
        }
    };
}

const E1: &[ParamSpec] = &[
    p!("draws", Count, 10_000, "random parameter sets"),
    p!("block", Count, 1_000, "draws per reported block"),
    p!("freq_max", Positive, 10.0, "ν, ω drawn from (0, freq_max)"),
    p!("lambda_max", Positive, 10.0, "Λ drawn from [0, lambda_max)"),
    p!("t_max", Positive, 10.0, "t drawn from [0, t_max)"),
    p!("tolerance", Positive, 1e-12, "bound on |residual| / max(1, |μ|²)"),
];

const E2: &[ParamSpec] = &[
    p!("n_modes", Count, 3, "environment modes"),
    p!("nu", Positive, 1.0, "system frequency"),
    p!("omega", Positive, 1.0, "environment frequency"),
    p!("lambda", NonNegative, 0.3, "collective coupling"),
    p!("n_thermal", NonNegative, 0.1, "environment occupation"),
    p!("alpha_re", Real, 0.3, "initial coherent amplitude, real part"),
    p!("alpha_im", Real, 0.0, "initial coherent amplitude, imaginary part"),
    p!("truncation", Count, 10, "starting Fock truncation (doubled on leakage)"),
    p!("n_times", Count, 21, "times on [0, 2/Δ]"),
    p!("model", Model, "both", "coupling type"),
    p!("tolerance", Positive, 1e-6, "bound on the moment error"),
];

const E3: &[ParamSpec] = &[
    p!("nu", Positive, 2.0, "system frequency"),
    p!("omega", Positive, 1.0, "environment frequency"),
    p!("lambda", Positive, 0.3, "collective coupling"),
    p!("n_thermal", NonNegativeList, [0.0, 0.5, 5.0, 50.0], "environment occupations"),
    p!("input_n", NonNegative, 0.5, "occupation of the thermal input state"),
    p!("t_min", Positive, 1e-3, "first time"),
    p!("t_max", Positive, 1e-1, "last time"),
    p!("n_points", Count, 20, "log-spaced times"),
    p!("model", Model, "both", "coupling type"),
    p!("slope_tolerance", Positive, 0.1, "bound on |slope − 2|"),
];

const E4: &[ParamSpec] = &[
    p!("lambda", Positive, 1.0, "collective coupling"),
    p!("n_thermal", NonNegative, 0.5, "environment occupation"),
    p!("tau", Positive, 10.0, "field correlation time"),
    p!("nu", Positive, 1.0, "system frequency"),
    p!("detuning", Real, 0.0, "δ_ζ = ω_ζ − ν"),
    p!("times", NonNegativeList, [0.005, 0.01, 0.02], "evaluation times"),
    p!("n_traj", Count, 100_000, "trajectories per time"),
    p!("z_max", Positive, 4.0, "bound on |empirical − analytic| in standard errors"),
];

const E5: &[ParamSpec] = &[
    p!("n_spins", Count, 4, "spins in the environment"),
    p!("f", Positive, 2.0, "single-spin splitting"),
    p!("g", Positive, 0.3, "aggregate coupling √Σ|g_i|²"),
    p!("nu", Positive, 2.0, "system frequency"),
    p!("temperatures", NonNegativeList, [2.0, 1.0, 0.5, 0.25], "temperatures, high to low"),
    p!("t", Positive, 0.1, "evaluation time"),
    p!("truncation", Count, 8, "system Fock truncation"),
    p!("model", Model, "exchange", "coupling type"),
];

const E6: &[ParamSpec] = &[
    p!("n_values", CountList, [4, 16, 64, 256, 1024, 4096], "N for the coefficient scaling"),
    p!("symbol_n_values", CountList, [2, 3, 4], "N for the matrix symbols"),
    p!("truncation", Count, 8, "per-mode truncation for the matrix tier"),
    p!("eps", Real, 0.2, "ε of the coherent-state generator"),
    p!("beta_scaled", NonNegative, 0.2, "β√N of the coherent-state generator"),
    p!("slope_tolerance", Positive, 0.05, "bound on |slope + 1|"),
];

const E7: &[ParamSpec] = &[
    p!("n_modes", Count, 3, "environment modes"),
    p!("nu", Positive, 1.0, "system frequency"),
    p!("omega", Positive, 1.0, "central environment frequency"),
    p!("lambda", Positive, 0.3, "collective coupling"),
    p!("n_thermal", NonNegative, 0.05, "occupation at the central frequency"),
    p!("alpha_re", Real, 0.3, "initial coherent amplitude, real part"),
    p!("alpha_im", Real, 0.0, "initial coherent amplitude, imaginary part"),
    p!("spreads", NonNegativeList, [0.02, 0.1, 0.2], "relative spreads s, ascending"),
    p!("truncation", Count, 10, "starting Fock truncation"),
    p!("n_times", Count, 11, "times on [0, 2/Δ]"),
    p!("model", Model, "both", "coupling type"),
];

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::E1Unitarity,
        Experiment::E2OracleBosonic,
        Experiment::E3ShorttimeScaling,
        Experiment::E4StochasticMatch,
        Experiment::E5SpinEnv,
        Experiment::E6LargeNScaling,
        Experiment::E7SpectrumSpread,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::E1Unitarity => "E1_unitarity",
            Experiment::E2OracleBosonic => "E2_oracle_bosonic",
            Experiment::E3ShorttimeScaling => "E3_shorttime_scaling",
            Experiment::E4StochasticMatch => "E4_stochastic_match",
            Experiment::E5SpinEnv => "E5_spin_env",
            Experiment::E6LargeNScaling => "E6_largeN_scaling",
            Experiment::E7SpectrumSpread => "E7_spectrum_spread",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }

    pub fn summary(self) -> &'static str {
        match self {
            Experiment::E1Unitarity => "random parameter sets: |μ|² − (−)^j|π|² − 1",
            Experiment::E2OracleBosonic => "truncated-Fock oracle vs exact reduced map, identical modes",
            Experiment::E3ShorttimeScaling => "exact vs short-time map; log-log slope of the moment error",
            Experiment::E4StochasticMatch => "Monte-Carlo classical field vs analytic added variance",
            Experiment::E5SpinEnv => "spin oracle vs bosonised short-time map over temperature",
            Experiment::E6LargeNScaling => "central-term scaling and coherent-state symbols",
            Experiment::E7SpectrumSpread => "reduction error vs spread of environment frequencies",
        }
    }

    /// Experiments that draw random numbers and therefore need a seed.
    pub fn needs_seed(self) -> bool {
        matches!(self, Experiment::E1Unitarity | Experiment::E4StochasticMatch)
    }

    pub fn params(self) -> &'static [ParamSpec] {
        match self {
            Experiment::E1Unitarity => E1,
            Experiment::E2OracleBosonic => E2,
            Experiment::E3ShorttimeScaling => E3,
            Experiment::E4StochasticMatch => E4,
            Experiment::E5SpinEnv => E5,
            Experiment::E6LargeNScaling => E6,
            Experiment::E7SpectrumSpread => E7,
        }
    }
}

/// A validated scenario with every parameter resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub output_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn err(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        message: message.into(),
    }
}

const TOP_KEYS: [&str; 4] = ["experiment", "parameters", "seed", "output_path"];

/// Parses and validates a scenario; every problem is reported.
pub fn validate(text: &str) -> Result<ScenarioConfig, Vec<ConfigError>> {
    let root: Value = if text.trim().is_empty() {
        Value::Object(Map::new())
    } else {
        serde_json::from_str(text).map_err(|e| vec![err("$", format!("invalid JSON: {e}"))])?
    };
    let Value::Object(obj) = root else {
        return Err(vec![err("$", "expected a JSON object")]);
    };
    let mut errors = Vec::new();
    for k in obj.keys() {
        if !TOP_KEYS.contains(&k.as_str()) {
            errors.push(err(format!("$.{k}"), "unknown key"));
        }
    }

    let experiment = match obj.get("experiment") {
        None => {
            errors.push(err("$.experiment", "required key missing"));
            None
        }
        Some(Value::String(s)) => match Experiment::from_name(s) {
            Some(e) => Some(e),
            None => {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                errors.push(err("$.experiment", format!("unknown experiment {s:?}; expected one of {}", names.join(", "))));
                None
            }
        },
        Some(_) => {
            errors.push(err("$.experiment", "expected a string"));
            None
        }
    };

    let output_path = match obj.get("output_path") {
        None => {
            errors.push(err("$.output_path", "required key missing"));
            None
        }
        Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
        Some(_) => {
            errors.push(err("$.output_path", "expected a non-empty string"));
            None
        }
    };

    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => match v.as_u64() {
            Some(s) => Some(s),
            None => {
                errors.push(err("$.seed", "expected a non-negative integer"));
                None
            }
        },
    };
    if let Some(e) = experiment {
        if e.needs_seed() && obj.get("seed").is_none_or(Value::is_null) {
            errors.push(err("$.seed", format!("required key missing: {} is stochastic", e.name())));
        }
    }

    let mut parameters = BTreeMap::new();
    let given = match obj.get("parameters") {
        None => Map::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => {
            errors.push(err("$.parameters", "expected an object"));
            Map::new()
        }
    };
    if let Some(e) = experiment {
        for k in given.keys() {
            if !e.params().iter().any(|p| p.name == k) {
                errors.push(err(format!("$.parameters.{k}"), format!("unknown parameter for {}", e.name())));
            }
        }
        for spec in e.params() {
            let path = format!("$.parameters.{}", spec.name);
            let v = given.get(spec.name).cloned().unwrap_or_else(spec.default);
            match check_kind(spec.kind, &v) {
                Ok(()) => {
                    parameters.insert(spec.name.to_string(), v);
                }
                Err(m) => errors.push(err(path, m)),
            }
        }
    }

    if errors.is_empty() {
        Ok(ScenarioConfig {
            experiment: experiment.unwrap(),
            parameters,
            seed,
            output_path: output_path.unwrap(),
        })
    } else {
        Err(errors)
    }
}

fn check_kind(kind: Kind, v: &Value) -> Result<(), String> {
    let real = |v: &Value| v.as_f64().filter(|x| x.is_finite());
    let count = |v: &Value| v.as_u64().filter(|&n| n >= 1);
    match kind {
        Kind::Count => count(v).map(|_| ()).ok_or_else(|| "expected an integer >= 1".into()),
        Kind::Real => real(v).map(|_| ()).ok_or_else(|| "expected a finite number".into()),
        Kind::Positive => real(v).filter(|&x| x > 0.0).map(|_| ()).ok_or_else(|| "expected a number > 0".into()),
        Kind::NonNegative => real(v).filter(|&x| x >= 0.0).map(|_| ()).ok_or_else(|| "expected a number >= 0".into()),
        Kind::NonNegativeList => match v.as_array() {
            Some(a) if !a.is_empty() => a
                .iter()
                .enumerate()
                .try_for_each(|(i, x)| real(x).filter(|&x| x >= 0.0).map(|_| ()).ok_or(format!("element {i}: expected a number >= 0"))),
            _ => Err("expected a non-empty list of numbers".into()),
        },
        Kind::CountList => match v.as_array() {
            Some(a) if !a.is_empty() => a
                .iter()
                .enumerate()
                .try_for_each(|(i, x)| count(x).map(|_| ()).ok_or(format!("element {i}: expected an integer >= 1"))),
            _ => Err("expected a non-empty list of integers".into()),
        },
        Kind::Model => match v.as_str() {
            Some("exchange" | "hopping" | "both") => Ok(()),
            _ => Err("expected \"exchange\", \"hopping\" or \"both\"".into()),
        },
    }
}

impl ScenarioConfig {
    fn param(&self, name: &str) -> &Value {
        self.parameters
            .get(name)
            .unwrap_or_else(|| panic!("parameter {name} is not part of {}", self.experiment.name()))
    }

    pub fn f64(&self, name: &str) -> f64 {
        self.param(name).as_f64().unwrap()
    }

    pub fn usize(&self, name: &str) -> usize {
        self.param(name).as_u64().unwrap() as usize
    }

    pub fn f64_list(&self, name: &str) -> Vec<f64> {
        self.param(name).as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect()
    }

    pub fn usize_list(&self, name: &str) -> Vec<usize> {
        self.param(name).as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect()
    }

    pub fn models(&self, name: &str) -> Vec<ModelKind> {
        match self.param(name).as_str().unwrap() {
            "exchange" => vec![ModelKind::Exchange],
            "hopping" => vec![ModelKind::Hopping],
            _ => ModelKind::ALL.to_vec(),
        }
    }

    /// The resolved configuration as JSON.
    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("config is plain data")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paths(r: Result<ScenarioConfig, Vec<ConfigError>>) -> Vec<String> {
        r.unwrap_err().into_iter().map(|e| e.path).collect()
    }

    #[test]
    fn empty_file_lists_required_keys() {
        let p = paths(validate(""));
        assert_eq!(p, vec!["$.experiment", "$.output_path"]);
    }

    #[test]
    fn defaults_are_filled_in() {
        let c = validate(r#"{"experiment": "E2_oracle_bosonic", "output_path": "e2.csv"}"#).unwrap();
        assert_eq!(c.usize("n_modes"), 3);
        assert_eq!(c.models("model").len(), 2);
        assert_eq!(c.parameters.len(), E2.len());
        assert_eq!(c.echo()["experiment"], "E2_oracle_bosonic");
    }

    #[test]
    fn stochastic_experiment_requires_seed() {
        let p = paths(validate(r#"{"experiment": "E4_stochastic_match", "output_path": "e4.csv"}"#));
        assert_eq!(p, vec!["$.seed"]);
    }

    #[test]
    fn every_violation_is_reported() {
        let p = paths(validate(
            r#"{"experiment": "E3_shorttime_scaling", "output_path": "x.csv", "extra": 1,
                "parameters": {"lambda": -1, "n_thermal": [0, -2], "bogus": true, "model": "swap"}}"#,
        ));
        assert_eq!(
            p,
            vec!["$.extra", "$.parameters.bogus", "$.parameters.lambda", "$.parameters.n_thermal", "$.parameters.model"]
        );
    }

    #[test]
    fn rejects_unknown_experiment_and_bad_json() {
        assert_eq!(paths(validate(r#"{"experiment": "E9", "output_path": "x"}"#)), vec!["$.experiment"]);
        assert_eq!(paths(validate("{")), vec!["$"]);
        assert_eq!(paths(validate("[1]")), vec!["$"]);
    }
}
