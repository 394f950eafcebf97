//! Flat `key=value` experiment configuration.
//!
//! One pair per line, `#` starts a comment, unknown keys are rejected.
//! Model parameters use a `model.` prefix, e.g. `model.c5=1.5`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exact::BreatherParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Decay,
    Breather,
    Convergence,
    Spectral,
    VirialCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Decay,
        Scenario::Breather,
        Scenario::Convergence,
        Scenario::Spectral,
        Scenario::VirialCheck,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Decay => "decay",
            Scenario::Breather => "breather",
            Scenario::Convergence => "convergence",
            Scenario::Spectral => "spectral",
            Scenario::VirialCheck => "virial-check",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFamily {
    /// `u₁ = ε x e^{-x²/σ²} / Z`, `u₂ = 0`.
    GaussOddDisplacement,
    /// `u₁ = 0`, `u₂ = ε x e^{-x²/σ²} / Z`.
    GaussOddVelocity,
}

impl DataFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            DataFamily::GaussOddDisplacement => "gauss-odd-displacement",
            DataFamily::GaussOddVelocity => "gauss-odd-velocity",
        }
    }
}

impl FromStr for DataFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss-odd-displacement" => Ok(DataFamily::GaussOddDisplacement),
            "gauss-odd-velocity" => Ok(DataFamily::GaussOddVelocity),
            other => Err(Error::Config(format!("unknown data_family `{other}`"))),
        }
    }
}

/// Which solution the convergence study refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Submode {
    Decay,
    Breather,
}

impl FromStr for Submode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decay" => Ok(Submode::Decay),
            "breather" => Ok(Submode::Breather),
            other => Err(Error::Config(format!("unknown submode `{other}`"))),
        }
    }
}

impl Submode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Submode::Decay => "decay",
            Submode::Breather => "breather",
        }
    }
}

pub const KEYS: [&str; 15] = [
    "scenario",
    "model",
    "epsilon",
    "sigma",
    "L",
    "N",
    "dt_safety",
    "T",
    "lambda",
    "record_every",
    "beta",
    "output_dir",
    "data_family",
    "seed",
    "submode",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub model: String,
    pub model_params: BTreeMap<String, f64>,
    pub epsilon: f64,
    pub sigma: f64,
    /// Half-width of the domain.
    pub length: f64,
    /// Interior points of the half line; full-line runs use `2N + 1` so the
    /// spacing is unchanged.
    pub n: usize,
    pub dt_safety: f64,
    t_final: Option<f64>,
    pub lambda: f64,
    pub record_every: usize,
    pub beta: Option<f64>,
    pub output_dir: PathBuf,
    pub data_family: DataFamily,
    pub seed: u64,
    pub submode: Submode,
}

impl ExperimentConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        ExperimentConfig {
            scenario,
            model: "sine-gordon".to_string(),
            model_params: BTreeMap::new(),
            epsilon: 0.05,
            sigma: 2.0,
            length: 80.0,
            n: 7999,
            dt_safety: 0.4,
            t_final: None,
            lambda: 10.0,
            record_every: 25,
            beta: None,
            output_dir: PathBuf::from("out"),
            data_family: DataFamily::GaussOddDisplacement,
            seed: 1,
            submode: Submode::Decay,
        }
    }

    /// Breather runs (and the breather convergence study) use the
    /// full-line grid; everything else is odd on the half line.
    pub fn full_line(&self) -> bool {
        match self.scenario {
            Scenario::Breather => true,
            Scenario::Convergence => self.submode == Submode::Breather,
            _ => false,
        }
    }

    pub fn breather(&self) -> Result<BreatherParams> {
        let beta = self
            .beta
            .ok_or_else(|| Error::Config("missing key `beta`".into()))?;
        BreatherParams::new(beta).map_err(|e| Error::Config(e.to_string()))
    }

    /// Final time, with per-scenario defaults: 200 for decay, three
    /// breather periods, 50 (decay) or 10 (breather) for convergence.
    pub fn t_final(&self) -> f64 {
        if let Some(t) = self.t_final {
            return t;
        }
        let period = || self.breather().map(|b| b.period()).unwrap_or(0.0);
        match (self.scenario, self.submode) {
            (Scenario::Decay, _) => 200.0,
            (Scenario::Breather, _) => 3.0 * period(),
            (Scenario::Convergence, Submode::Decay) => 50.0,
            (Scenario::Convergence, Submode::Breather) => 10.0,
            _ => 0.0,
        }
    }

    pub fn set_t_final(&mut self, t: f64) {
        self.t_final = Some(t);
    }

    fn validate(&self, present: &BTreeMap<String, String>) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("`{name}` must be positive, got {v}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("sigma", self.sigma)?;
        positive("L", self.length)?;
        positive("lambda", self.lambda)?;
        if !(self.dt_safety > 0.0 && self.dt_safety < 1.0) {
            return Err(Error::Config(format!(
                "`dt_safety` must lie in (0, 1), got {}",
                self.dt_safety
            )));
        }
        if self.n < crate::grid::MIN_POINTS {
            return Err(Error::Config(format!(
                "`N` must be at least {}, got {}",
                crate::grid::MIN_POINTS,
                self.n
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Config("`record_every` must be at least 1".into()));
        }
        if let Some(t) = self.t_final {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Config(format!("`T` must be nonnegative, got {t}")));
            }
        }
        if let Some(beta) = self.beta {
            BreatherParams::new(beta).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.full_line() {
            self.breather()?;
            if present.contains_key("model") && self.model != "sine-gordon" {
                return Err(Error::Config(format!(
                    "breather runs use sine-gordon, got model `{}`",
                    self.model
                )));
            }
        } else if matches!(self.scenario, Scenario::Decay | Scenario::Convergence)
            && !present.contains_key("model")
        {
            return Err(Error::Config("missing key `model`".into()));
        }
        // catches unknown names and bad custom-poly coefficients up front
        crate::model::make_model(&self.model, &self.model_params)?;
        Ok(())
    }

    /// Resolved configuration as parseable `key=value` lines.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        line("scenario", self.scenario.to_string());
        line("model", self.model.clone());
        for (k, v) in &self.model_params {
            line(&format!("model.{k}"), v.to_string());
        }
        line("epsilon", self.epsilon.to_string());
        line("sigma", self.sigma.to_string());
        line("L", self.length.to_string());
        line("N", self.n.to_string());
        line("dt_safety", self.dt_safety.to_string());
        line("T", self.t_final().to_string());
        line("lambda", self.lambda.to_string());
        line("record_every", self.record_every.to_string());
        if let Some(beta) = self.beta {
            line("beta", beta.to_string());
        }
        line("output_dir", self.output_dir.display().to_string());
        line("data_family", self.data_family.as_str().to_string());
        line("seed", self.seed.to_string());
        line("submode", self.submode.as_str().to_string());
        out
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{raw}`")))
}

/// `key=value` pairs from config text, duplicates rejected.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if pairs.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }
    Ok(pairs)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    build(parse_pairs(text)?)
}

/// Parses `text`, then applies `overrides` in order. A `scenario` argument
/// fills the scenario key when absent and must agree with it otherwise.
pub fn parse_config_with(
    text: &str,
    overrides: &[(String, String)],
    scenario: Option<Scenario>,
) -> Result<ExperimentConfig> {
    let mut pairs = parse_pairs(text)?;
    for (k, v) in overrides {
        pairs.insert(k.trim().to_string(), v.trim().to_string());
    }
    if let Some(sc) = scenario {
        match pairs.get("scenario") {
            Some(existing) if existing != sc.as_str() => {
                return Err(Error::Config(format!(
                    "config says scenario `{existing}` but `{sc}` was requested"
                )))
            }
            _ => {
                pairs.insert("scenario".into(), sc.as_str().into());
            }
        }
    }
    build(pairs)
}

fn build(pairs: BTreeMap<String, String>) -> Result<ExperimentConfig> {
    let scenario: Scenario = pairs
        .get("scenario")
        .ok_or_else(|| Error::Config("missing key `scenario`".into()))?
        .parse()?;
    let mut cfg = ExperimentConfig::defaults(scenario);
    for (key, value) in &pairs {
        if let Some(param) = key.strip_prefix("model.") {
            cfg.model_params
                .insert(param.to_string(), parse_value(key, value)?);
            continue;
        }
        match key.as_str() {
            "scenario" => {}
            "model" => cfg.model = value.clone(),
            "epsilon" => cfg.epsilon = parse_value(key, value)?,
            "sigma" => cfg.sigma = parse_value(key, value)?,
            "L" => cfg.length = parse_value(key, value)?,
            "N" => cfg.n = parse_value(key, value)?,
            "dt_safety" => cfg.dt_safety = parse_value(key, value)?,
            "T" => cfg.t_final = Some(parse_value(key, value)?),
            "lambda" => cfg.lambda = parse_value(key, value)?,
            "record_every" => cfg.record_every = parse_value(key, value)?,
            "beta" => cfg.beta = Some(parse_value(key, value)?),
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "data_family" => cfg.data_family = value.parse()?,
            "seed" => cfg.seed = parse_value(key, value)?,
            "submode" => cfg.submode = value.parse()?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
    }
    cfg.validate(&pairs)?;
    Ok(cfg)
}
