use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{Fading, Geometry};
use crate::error::{Error, Result};
use crate::jammer::JammerConfig;
use crate::learn::{DqnConfig, EpsilonSchedule, SinrQuantizer};
use crate::rates::UtilityParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scheme {
    Qlu,
    Dqlu,
    Hbdqlu,
    Qls,
    #[serde(rename = "NE-ANALYSIS")]
    NeAnalysis,
}

impl Scheme {
    pub const LEARNING: [Scheme; 4] = [Scheme::Qlu, Scheme::Dqlu, Scheme::Hbdqlu, Scheme::Qls];

    pub fn is_deep(self) -> bool {
        matches!(self, Scheme::Dqlu | Scheme::Hbdqlu)
    }

    /// Lower-case stem used in output file names.
    pub fn file_stem(self) -> &'static str {
        match self {
            Scheme::Qlu => "qlu",
            Scheme::Dqlu => "dqlu",
            Scheme::Hbdqlu => "hbdqlu",
            Scheme::Qls => "qls",
            Scheme::NeAnalysis => "ne_analysis",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scheme::Qlu => "QLU",
            Scheme::Dqlu => "DQLU",
            Scheme::Hbdqlu => "HBDQLU",
            Scheme::Qls => "QLS",
            Scheme::NeAnalysis => "NE-ANALYSIS",
        };
        f.write_str(s)
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('_', "-").as_str() {
            "QLU" => Ok(Scheme::Qlu),
            "DQLU" => Ok(Scheme::Dqlu),
            "HBDQLU" => Ok(Scheme::Hbdqlu),
            "QLS" => Ok(Scheme::Qls),
            "NE-ANALYSIS" | "NE" => Ok(Scheme::NeAnalysis),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JammerMode {
    /// Tabular Q-learning jammer observing the previous slot's BS powers.
    Learning,
    /// Exact best response to the current BS powers.
    BestResponse,
}

impl FromStr for JammerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "learning" | "ql" => Ok(JammerMode::Learning),
            "best-response" | "br" => Ok(JammerMode::BestResponse),
            other => Err(Error::Config(format!("unknown jammer mode '{other}'"))),
        }
    }
}

impl fmt::Display for JammerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JammerMode::Learning => "learning",
            JammerMode::BestResponse => "best-response",
        })
    }
}

/// Every knob of a run. `Default` is the reference scenario, so an empty
/// config file is a valid run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub slots: usize,
    pub seeds: Vec<u64>,
    /// Averaging window for summaries.
    pub window: usize,
    pub geometry: Geometry,
    pub fading: Fading,
    /// Power levels per BS (`L_p`).
    pub grid_levels: usize,
    pub p_bs_max: f64,
    pub params: UtilityParams,
    pub jammer: JammerConfig,
    pub jammer_mode: JammerMode,
    pub jammer_alpha: f64,
    pub alpha_ql: f64,
    pub alpha_dqn: f64,
    pub delta: f64,
    pub epsilon: EpsilonSchedule,
    pub quantizer: SinrQuantizer,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub sync_period: usize,
    pub use_replay: bool,
    pub reward_scale: f64,
    pub hot_boot_scenarios: usize,
    pub hot_boot_slots: usize,
    /// Keep the pre-training exploration position when hot booting.
    pub hot_boot_keep_epsilon: bool,
    /// Slots between channel redraws; 0 keeps one realization for the whole run.
    pub redraw_period: usize,
    /// Let the analysis grid contain zero weak-user power.
    pub analysis_zero_weak: bool,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scheme: Scheme::Qlu,
            slots: 2000,
            seeds: (1..=10).collect(),
            window: 200,
            geometry: Geometry::default(),
            fading: Fading::Rayleigh,
            grid_levels: 10,
            p_bs_max: 40.0,
            params: UtilityParams::default(),
            jammer: JammerConfig::default(),
            jammer_mode: JammerMode::Learning,
            jammer_alpha: 0.2,
            alpha_ql: 0.2,
            alpha_dqn: 0.1,
            delta: 0.7,
            epsilon: EpsilonSchedule::default(),
            quantizer: SinrQuantizer::default(),
            batch_size: 32,
            replay_capacity: 10_000,
            sync_period: 100,
            use_replay: true,
            reward_scale: 100.0,
            hot_boot_scenarios: 3,
            hot_boot_slots: 1000,
            hot_boot_keep_epsilon: true,
            redraw_period: 0,
            analysis_zero_weak: true,
            out_dir: PathBuf::from("results"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for '{key}'")))
}

fn parse_list<T: FromStr, const N: usize>(key: &str, value: &str) -> Result<[T; N]> {
    let items: Vec<T> = value.split(',').map(|v| parse(key, v)).collect::<Result<_>>()?;
    let n = items.len();
    items
        .try_into()
        .map_err(|_| Error::Config(format!("'{key}' needs {N} comma-separated values, got {n}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean '{value}' for '{key}'"))),
    }
}

/// Seeds as a comma list whose items are single values or inclusive `a-b` ranges.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (parse("seeds", a)?, parse("seeds", b)?);
                if b < a {
                    return Err(Error::Config(format!("empty seed range '{item}'")));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(parse("seeds", item)?),
        }
    }
    Ok(seeds)
}

impl ExperimentConfig {
    /// Sets one key; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "scheme" => self.scheme = v.parse()?,
            "slots" => self.slots = parse(key, v)?,
            "seeds" => self.seeds = parse_seeds(v)?,
            "window" => self.window = parse(key, v)?,
            "user_positions" => self.geometry.user_positions = parse_list(key, v)?,
            "bs_positions" => self.geometry.bs_positions = parse_list(key, v)?,
            "jammer_position" => self.geometry.jammer_position = parse(key, v)?,
            "noise_power_db" => self.geometry.noise_power_db = parse(key, v)?,
            "fading" => {
                self.fading = match v.to_ascii_lowercase().as_str() {
                    "rayleigh" => Fading::Rayleigh,
                    "none" => Fading::None,
                    _ => return Err(Error::Config(format!("unknown fading '{v}'"))),
                }
            }
            "grid_levels" => self.grid_levels = parse(key, v)?,
            "p_bs_max" => self.p_bs_max = parse(key, v)?,
            "p_j_max" => self.jammer.p_j_max = parse(key, v)?,
            "r0" => self.params.r0 = parse(key, v)?,
            "gamma" => {
                self.params.gamma = parse(key, v)?;
                self.jammer.gamma = self.params.gamma;
            }
            "z" => self.params.z = parse(key, v)?,
            "jammer_levels" => self.jammer.grid_levels = parse(key, v)?,
            "search_tolerance" => self.jammer.search_tolerance = parse(key, v)?,
            "jammer_mode" => self.jammer_mode = v.parse()?,
            "jammer_alpha" => self.jammer_alpha = parse(key, v)?,
            "alpha_ql" => self.alpha_ql = parse(key, v)?,
            "alpha_dqn" => self.alpha_dqn = parse(key, v)?,
            "delta" => self.delta = parse(key, v)?,
            "eps_start" => self.epsilon = EpsilonSchedule::new(parse(key, v)?, self.epsilon.decay, self.epsilon.floor),
            "eps_decay" => self.epsilon = EpsilonSchedule::new(self.epsilon.start, parse(key, v)?, self.epsilon.floor),
            "eps_floor" => self.epsilon = EpsilonSchedule::new(self.epsilon.start, self.epsilon.decay, parse(key, v)?),
            "sinr_levels" => self.quantizer.levels = parse(key, v)?,
            "sinr_lo_db" => self.quantizer.lo_db = parse(key, v)?,
            "sinr_hi_db" => self.quantizer.hi_db = parse(key, v)?,
            "batch_size" => self.batch_size = parse(key, v)?,
            "replay_capacity" => self.replay_capacity = parse(key, v)?,
            "sync_period" => self.sync_period = parse(key, v)?,
            "use_replay" => self.use_replay = parse_bool(key, v)?,
            "reward_scale" => self.reward_scale = parse(key, v)?,
            "hot_boot_scenarios" => self.hot_boot_scenarios = parse(key, v)?,
            "hot_boot_slots" => self.hot_boot_slots = parse(key, v)?,
            "hot_boot_keep_epsilon" => self.hot_boot_keep_epsilon = parse_bool(key, v)?,
            "redraw_period" => self.redraw_period = parse(key, v)?,
            "analysis_zero_weak" => self.analysis_zero_weak = parse_bool(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn from_kv_str(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_path_buf(),
                message: format!("line {}: expected key = value", n + 1),
            })?;
            cfg.set(k, v).map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                message: format!("line {}: {e}", n + 1),
            })?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text, path)
    }

    /// Renders the config back into the key = value format.
    pub fn to_kv_string(&self) -> String {
        let join = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let seeds = self.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        let fading = match self.fading {
            Fading::Rayleigh => "rayleigh",
            Fading::None => "none",
        };
        let g = &self.geometry;
        let lines = [
            format!("scheme = {}", self.scheme),
            format!("slots = {}", self.slots),
            format!("seeds = {seeds}"),
            format!("window = {}", self.window),
            format!("user_positions = {}", join(&g.user_positions)),
            format!("bs_positions = {}", join(&g.bs_positions)),
            format!("jammer_position = {}", g.jammer_position),
            format!("noise_power_db = {}", g.noise_power_db),
            format!("fading = {fading}"),
            format!("grid_levels = {}", self.grid_levels),
            format!("p_bs_max = {}", self.p_bs_max),
            format!("p_j_max = {}", self.jammer.p_j_max),
            format!("r0 = {}", self.params.r0),
            format!("gamma = {}", self.params.gamma),
            format!("z = {}", self.params.z),
            format!("jammer_levels = {}", self.jammer.grid_levels),
            format!("search_tolerance = {}", self.jammer.search_tolerance),
            format!("jammer_mode = {}", self.jammer_mode),
            format!("jammer_alpha = {}", self.jammer_alpha),
            format!("alpha_ql = {}", self.alpha_ql),
            format!("alpha_dqn = {}", self.alpha_dqn),
            format!("delta = {}", self.delta),
            format!("eps_start = {}", self.epsilon.start),
            format!("eps_decay = {}", self.epsilon.decay),
            format!("eps_floor = {}", self.epsilon.floor),
            format!("sinr_levels = {}", self.quantizer.levels),
            format!("sinr_lo_db = {}", self.quantizer.lo_db),
            format!("sinr_hi_db = {}", self.quantizer.hi_db),
            format!("batch_size = {}", self.batch_size),
            format!("replay_capacity = {}", self.replay_capacity),
            format!("sync_period = {}", self.sync_period),
            format!("use_replay = {}", self.use_replay),
            format!("reward_scale = {}", self.reward_scale),
            format!("hot_boot_scenarios = {}", self.hot_boot_scenarios),
            format!("hot_boot_slots = {}", self.hot_boot_slots),
            format!("hot_boot_keep_epsilon = {}", self.hot_boot_keep_epsilon),
            format!("redraw_period = {}", self.redraw_period),
            format!("analysis_zero_weak = {}", self.analysis_zero_weak),
            format!("out_dir = {}", self.out_dir.display()),
        ];
        lines.join("\n") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        self.geometry.validate()?;
        self.jammer.validate()?;
        if self.slots == 0 {
            return cfg_err("slots must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return cfg_err("no seeds given".into());
        }
        if self.window == 0 {
            return cfg_err("window must be at least 1".into());
        }
        if self.grid_levels < 2 {
            return cfg_err(format!("grid_levels = {} leaves no positive action", self.grid_levels));
        }
        if !(self.p_bs_max > 0.0) || !self.p_bs_max.is_finite() {
            return cfg_err("p_bs_max must be positive".into());
        }
        if !(self.params.r0 >= 0.0) {
            return cfg_err("r0 must be non-negative".into());
        }
        if !(self.params.z > 0.0 && self.params.z < 1.0) {
            return cfg_err("z must lie in (0, 1)".into());
        }
        if self.params.gamma != self.jammer.gamma {
            return cfg_err("utility and jammer cost differ".into());
        }
        for (name, a) in [("alpha_ql", self.alpha_ql), ("alpha_dqn", self.alpha_dqn), ("jammer_alpha", self.jammer_alpha)] {
            if !(a > 0.0 && a <= 1.0) {
                return cfg_err(format!("{name} must lie in (0, 1]"));
            }
        }
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return cfg_err("delta must lie in [0, 1)".into());
        }
        let e = &self.epsilon;
        if ![e.start, e.floor, e.decay].iter().all(|x| (0.0..=1.0).contains(x)) {
            return cfg_err("exploration parameters must lie in [0, 1]".into());
        }
        if self.quantizer.levels < 2 || !(self.quantizer.hi_db > self.quantizer.lo_db) {
            return cfg_err("SINR quantizer needs at least 2 levels over a nonempty range".into());
        }
        if self.batch_size == 0 || self.replay_capacity == 0 {
            return cfg_err("batch_size and replay_capacity must be positive".into());
        }
        if !(self.reward_scale > 0.0) {
            return cfg_err("reward_scale must be positive".into());
        }
        if self.scheme == Scheme::Hbdqlu && self.hot_boot_scenarios == 0 {
            return cfg_err("hot booting needs at least one scenario".into());
        }
        Ok(())
    }

    pub fn dqn_config(&self) -> DqnConfig {
        DqnConfig {
            lr: self.alpha_dqn,
            delta: self.delta,
            batch_size: self.batch_size,
            replay_capacity: self.replay_capacity,
            sync_period: self.sync_period,
            use_replay: self.use_replay,
            reward_scale: self.reward_scale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        let c = ExperimentConfig::from_kv_str("# nothing\n\n", Path::new("x.cfg")).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn kv_round_trip() {
        let mut c = ExperimentConfig::default();
        c.set("scheme", "hbdqlu").unwrap();
        c.set("seeds", "3, 7-9").unwrap();
        c.set("gamma", "0.25").unwrap();
        c.set("user_positions", "1,2,3,4").unwrap();
        c.set("eps_floor", "0.01").unwrap();
        assert_eq!(c.seeds, [3, 7, 8, 9]);
        assert_eq!(c.jammer.gamma, 0.25);
        let back = ExperimentConfig::from_kv_str(&c.to_kv_string(), Path::new("x")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn bad_input_is_config_error() {
        let p = Path::new("bad.cfg");
        for text in ["slots", "nope = 1", "slots = many", "user_positions = 1,2", "scheme = SARSA"] {
            let e = ExperimentConfig::from_kv_str(text, p).unwrap_err();
            assert!(e.is_config(), "{text}: {e}");
            assert!(e.to_string().contains("bad.cfg"));
        }
    }

    #[test]
    fn validation_rejects_degenerate_values() {
        let bad = [("grid_levels", "0"), ("grid_levels", "1"), ("slots", "0"), ("seeds", ""), ("z", "0"), ("p_bs_max", "-1")];
        for (k, v) in bad {
            let mut c = ExperimentConfig::default();
            c.set(k, v).unwrap();
            assert!(c.validate().unwrap_err().is_config(), "{k} = {v}");
        }
        let mut c = ExperimentConfig::default();
        c.set("jammer_position", "250").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let e = ExperimentConfig::from_file(Path::new("/nonexistent/run.cfg")).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/run.cfg"));
        assert!(!e.is_config());
    }
}
