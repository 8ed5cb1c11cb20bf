//! Scenario files: flat `key = value` lines.
//!
//! ```text
//! space = saps.space
//! train_instances = train.txt
//! test_instances = test.txt
//! surrogate = seed:7 noise_sigma:0.3
//! cutoff_time = 5
//! budget_target_s = 18000
//! strategy = focusedils
//! capping = tp
//! ```
//!
//! Relative paths are resolved against the scenario file's directory.

use std::fmt;
use std::path::{Path, PathBuf};

use paramils_core::objective::{Capping, ObjectiveSettings, DEFAULT_BOUND_MULTIPLIER, DEFAULT_PENALTY};
use paramils_core::search::{SearchParams, Strategy};
use paramils_core::surrogate::SurrogateSpec;
use paramils_core::{Budget, ConfigurationSpace};

use crate::error::{Error, Result};
use crate::instances::InstanceSet;

pub const KEYS: &[&str] = &[
    "space",
    "train_instances",
    "test_instances",
    "wrapper",
    "surrogate",
    "cutoff_time",
    "penalty",
    "budget_target_s",
    "budget_wall_s",
    "max_iterations",
    "seed",
    "strategy",
    "capping",
    "bm",
    "r",
    "s",
    "p_restart",
    "n",
];

pub const DEFAULT_N: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    BasicIls,
    FocusedIls,
    Random,
    SimpleLs,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::BasicIls => "basicils",
            StrategyKind::FocusedIls => "focusedils",
            StrategyKind::Random => "random",
            StrategyKind::SimpleLs => "simplels",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "basicils" => StrategyKind::BasicIls,
            "focusedils" => StrategyKind::FocusedIls,
            "random" => StrategyKind::Random,
            "simplels" => StrategyKind::SimpleLs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CappingKind {
    None,
    Tp,
    Aggressive,
}

impl CappingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CappingKind::None => "none",
            CappingKind::Tp => "tp",
            CappingKind::Aggressive => "aggressive",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "none" => CappingKind::None,
            "tp" => CappingKind::Tp,
            "aggressive" => CappingKind::Aggressive,
            _ => return None,
        })
    }
}

/// Surrogate settings; a missing `seed` is derived from the scenario seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSettings {
    pub spec: SurrogateSpec,
    pub seed: Option<u64>,
}

impl SurrogateSettings {
    fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut spec = SurrogateSpec::default();
        let mut seed = None;
        for tok in text.split_whitespace() {
            if tok == "default" {
                continue;
            }
            let (k, v) = tok.split_once(':').ok_or_else(|| format!("expected key:value, got `{tok}`"))?;
            let float = || v.parse::<f64>().ok().filter(|x| x.is_finite() && *x >= 0.0);
            let bad = || format!("bad surrogate value `{tok}`");
            match k {
                "seed" => seed = Some(v.parse().map_err(|_| bad())?),
                "base" => spec.base = float().filter(|x| *x > 0.0).ok_or_else(bad)?,
                "effect_sigma" => spec.effect_sigma = float().ok_or_else(bad)?,
                "hardness_sigma" => spec.hardness_sigma = float().ok_or_else(bad)?,
                "noise_sigma" => spec.noise_sigma = float().ok_or_else(bad)?,
                "interactions" => spec.interactions = v.parse().map_err(|_| bad())?,
                "interaction_strength" => spec.interaction_strength = float().ok_or_else(bad)?,
                _ => return Err(format!("unknown surrogate key `{k}`")),
            }
        }
        Ok(SurrogateSettings { spec, seed })
    }
}

impl fmt::Display for SurrogateSettings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.spec;
        if let Some(seed) = self.seed {
            write!(f, "seed:{seed} ")?;
        }
        write!(
            f,
            "base:{} effect_sigma:{} hardness_sigma:{} noise_sigma:{} interactions:{} interaction_strength:{}",
            s.base, s.effect_sigma, s.hardness_sigma, s.noise_sigma, s.interactions, s.interaction_strength
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendSpec {
    /// command line split on whitespace; the first word is the program
    Wrapper(Vec<String>),
    Surrogate(SurrogateSettings),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// directory relative paths are resolved against
    pub dir: PathBuf,
    pub space: String,
    pub train_instances: String,
    pub test_instances: Option<String>,
    pub backend: BackendSpec,
    pub cutoff_time: f64,
    pub penalty: f64,
    pub budget_target_s: Option<f64>,
    pub budget_wall_s: Option<f64>,
    pub max_iterations: Option<u64>,
    pub seed: Option<u64>,
    pub strategy: StrategyKind,
    pub capping: CappingKind,
    pub bm: f64,
    pub r: usize,
    pub s: usize,
    pub p_restart: f64,
    pub n: usize,
}

/// Splits `key=value` into its parts (used for `--set`).
pub fn parse_override(text: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = text.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{text}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl Scenario {
    /// Reads and validates a scenario file, applying `overrides` on top.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.into(), source })?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let scenario = Self::parse(&text, dir, overrides).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::Parse { path: path.into(), line, message },
            other => other,
        })?;
        scenario.check_files()?;
        Ok(scenario)
    }

    /// Parses scenario text without touching the file system.
    pub fn parse(text: &str, dir: PathBuf, overrides: &[(String, String)]) -> Result<Self> {
        let mut entries: Vec<(String, String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { path: PathBuf::new(), line: i + 1, message };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(err(format!("unknown key `{k}`")));
            }
            if entries.iter().any(|e| e.0 == k) {
                return Err(err(format!("duplicate key `{k}`")));
            }
            entries.push((k.to_string(), v.to_string(), i + 1));
        }
        for (k, v) in overrides {
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Invalid(format!("unknown key `{k}` in override")));
            }
            match entries.iter_mut().find(|e| &e.0 == k) {
                Some(e) => e.1 = v.clone(),
                None => entries.push((k.clone(), v.clone(), 0)),
            }
        }
        let get = |key: &str| entries.iter().find(|e| e.0 == key).map(|e| (e.1.as_str(), e.2));
        let bad = |key: &str, line: usize, why: &str| -> Error {
            let message = format!("`{key}`: {why}");
            if line == 0 {
                Error::Invalid(message)
            } else {
                Error::Parse { path: PathBuf::new(), line, message }
            }
        };
        let required = |key: &str| -> Result<(&str, usize)> {
            get(key).ok_or_else(|| Error::Invalid(format!("missing required key `{key}`")))
        };
        fn num<T: std::str::FromStr>(v: &str) -> Option<T> {
            v.parse().ok()
        }

        let space = required("space")?.0.to_string();
        let train_instances = required("train_instances")?.0.to_string();
        let test_instances = get("test_instances").map(|v| v.0.to_string());
        let backend = match (get("wrapper"), get("surrogate")) {
            (Some(_), Some(_)) => return Err(Error::Invalid("give either `wrapper` or `surrogate`, not both".into())),
            (None, None) => return Err(Error::Invalid("missing required key `wrapper` or `surrogate`".into())),
            (Some((w, line)), None) => {
                let words: Vec<String> = w.split_whitespace().map(String::from).collect();
                if words.is_empty() {
                    return Err(bad("wrapper", line, "empty command"));
                }
                BackendSpec::Wrapper(words)
            }
            (None, Some((s, line))) => {
                BackendSpec::Surrogate(SurrogateSettings::parse(s).map_err(|e| bad("surrogate", line, &e))?)
            }
        };

        let (v, line) = required("cutoff_time")?;
        let cutoff_time = num::<f64>(v)
            .filter(|x| x.is_finite() && *x > 0.0)
            .ok_or_else(|| bad("cutoff_time", line, "must be a positive number of seconds"))?;

        let opt_f64 = |key: &str, min: f64, why: &str| -> Result<Option<f64>> {
            get(key)
                .map(|(v, line)| num::<f64>(v).filter(|x| !x.is_nan() && *x >= min).ok_or_else(|| bad(key, line, why)))
                .transpose()
        };
        let opt_usize = |key: &str, min: usize| -> Result<Option<usize>> {
            get(key)
                .map(|(v, line)| {
                    num::<usize>(v).filter(|x| *x >= min).ok_or_else(|| bad(key, line, &format!("must be an integer ≥ {min}")))
                })
                .transpose()
        };

        let penalty = opt_f64("penalty", 1.0, "must be at least 1")?.unwrap_or(DEFAULT_PENALTY);
        let budget_target_s = opt_f64("budget_target_s", 0.0, "must be a nonnegative number")?;
        let budget_wall_s = opt_f64("budget_wall_s", 0.0, "must be a nonnegative number")?;
        let max_iterations = get("max_iterations")
            .map(|(v, line)| num::<u64>(v).ok_or_else(|| bad("max_iterations", line, "must be a nonnegative integer")))
            .transpose()?;
        if budget_target_s.is_none() && budget_wall_s.is_none() && max_iterations.is_none() {
            return Err(Error::Invalid(
                "missing budget: set `budget_target_s`, `budget_wall_s` or `max_iterations`".into(),
            ));
        }
        let seed = get("seed")
            .map(|(v, line)| num::<u64>(v).ok_or_else(|| bad("seed", line, "must be an unsigned integer")))
            .transpose()?;
        let strategy = get("strategy")
            .map(|(v, line)| {
                StrategyKind::parse(v).ok_or_else(|| bad("strategy", line, "expected basicils, focusedils, random or simplels"))
            })
            .transpose()?
            .unwrap_or(StrategyKind::FocusedIls);
        let capping = get("capping")
            .map(|(v, line)| CappingKind::parse(v).ok_or_else(|| bad("capping", line, "expected none, tp or aggressive")))
            .transpose()?
            .unwrap_or(CappingKind::Tp);
        let bm = opt_f64("bm", 1.0, "must be at least 1")?.unwrap_or(DEFAULT_BOUND_MULTIPLIER);
        if !bm.is_finite() {
            return Err(Error::Invalid("`bm` must be finite".into()));
        }
        let defaults = SearchParams::default();
        let r = opt_usize("r", 0)?.unwrap_or(defaults.r);
        let s = opt_usize("s", 1)?.unwrap_or(defaults.s);
        let p_restart = opt_f64("p_restart", 0.0, "must be a probability")?.unwrap_or(defaults.p_restart);
        if p_restart > 1.0 {
            return Err(Error::Invalid("`p_restart` must be a probability".into()));
        }
        let n = opt_usize("n", 1)?.unwrap_or(DEFAULT_N);

        Ok(Scenario {
            dir,
            space,
            train_instances,
            test_instances,
            backend,
            cutoff_time,
            penalty,
            budget_target_s,
            budget_wall_s,
            max_iterations,
            seed,
            strategy,
            capping,
            bm,
            r,
            s,
            p_restart,
            n,
        })
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    fn check_files(&self) -> Result<()> {
        let mut files = vec![("space", &self.space), ("train_instances", &self.train_instances)];
        if let Some(t) = &self.test_instances {
            files.push(("test_instances", t));
        }
        for (key, rel) in files {
            if !self.resolve(rel).is_file() {
                return Err(Error::Invalid(format!("`{key}`: file {} not found", self.resolve(rel).display())));
            }
        }
        Ok(())
    }

    pub fn load_space(&self) -> Result<ConfigurationSpace> {
        let path = self.resolve(&self.space);
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Read { path: path.clone(), source })?;
        ConfigurationSpace::parse(&text).map_err(|source| Error::Space { path, source })
    }

    pub fn load_train(&self) -> Result<InstanceSet> {
        let set = InstanceSet::load(&self.resolve(&self.train_instances))?;
        if set.is_empty() {
            return Err(Error::Invalid("training instance list is empty".into()));
        }
        Ok(set)
    }

    pub fn load_test(&self) -> Result<Option<InstanceSet>> {
        self.test_instances.as_ref().map(|t| InstanceSet::load(&self.resolve(t))).transpose()
    }

    pub fn objective_settings(&self) -> ObjectiveSettings {
        let capping = match self.capping {
            CappingKind::None => Capping::None,
            CappingKind::Tp => Capping::TrajectoryPreserving,
            CappingKind::Aggressive => Capping::Aggressive { bound_multiplier: self.bm },
        };
        ObjectiveSettings::new(self.cutoff_time, self.penalty, capping)
    }

    pub fn budget(&self) -> Budget {
        Budget {
            target_s: self.budget_target_s.unwrap_or(f64::INFINITY),
            wall_s: self.budget_wall_s.unwrap_or(f64::INFINITY),
        }
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            r: self.r,
            s: self.s,
            p_restart: self.p_restart,
            max_iterations: self.max_iterations,
            ..SearchParams::default()
        }
    }

    pub fn strategy(&self) -> Strategy {
        match self.strategy {
            StrategyKind::BasicIls => Strategy::BasicIls { n: self.n },
            StrategyKind::FocusedIls => Strategy::FocusedIls,
            StrategyKind::Random => Strategy::RandomSearch { n: self.n },
            StrategyKind::SimpleLs => Strategy::SimpleLs { n: self.n },
        }
    }

    /// The file form; `parse(to_text())` gives back an equal scenario.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("space", self.space.clone());
        put("train_instances", self.train_instances.clone());
        if let Some(t) = &self.test_instances {
            put("test_instances", t.clone());
        }
        match &self.backend {
            BackendSpec::Wrapper(words) => put("wrapper", words.join(" ")),
            BackendSpec::Surrogate(s) => put("surrogate", s.to_string()),
        }
        put("cutoff_time", self.cutoff_time.to_string());
        put("penalty", self.penalty.to_string());
        if let Some(b) = self.budget_target_s {
            put("budget_target_s", b.to_string());
        }
        if let Some(b) = self.budget_wall_s {
            put("budget_wall_s", b.to_string());
        }
        if let Some(m) = self.max_iterations {
            put("max_iterations", m.to_string());
        }
        if let Some(seed) = self.seed {
            put("seed", seed.to_string());
        }
        put("strategy", self.strategy.as_str().into());
        put("capping", self.capping.as_str().into());
        put("bm", self.bm.to_string());
        put("r", self.r.to_string());
        put("s", self.s.to_string());
        put("p_restart", self.p_restart.to_string());
        put("n", self.n.to_string());
        out
    }
}
