//! Experiment configuration and its flat `key = value` text form.

use std::fmt::Write as _;
use std::str::FromStr;

use otfs_radar::{CfarConfig, FrameGrid, PilotStrategy};

use crate::error::{SimError, SimResult};
use crate::format::fmt9;

/// How target positions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioMode {
    /// Integer delay bins pairwise distinct and integer Doppler bins pairwise distinct.
    DistinctRows,
    /// Independent uniform draws.
    Random,
    /// Fixed four-target layout on a 32×32 grid (random gain phases).
    Reference,
}

impl ScenarioMode {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioMode::DistinctRows => "distinct_rows",
            ScenarioMode::Random => "random",
            ScenarioMode::Reference => "reference",
        }
    }
}

impl FromStr for ScenarioMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "distinct_rows" | "distinct" => Ok(ScenarioMode::DistinctRows),
            "random" => Ok(ScenarioMode::Random),
            "reference" => Ok(ScenarioMode::Reference),
            other => Err(format!("unknown scenario mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    None,
    OfdmPeriodogram,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::None => "none",
            Baseline::OfdmPeriodogram => "ofdm_periodogram",
        }
    }
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "none" => Ok(Baseline::None),
            "ofdm_periodogram" | "ofdm" => Ok(Baseline::OfdmPeriodogram),
            other => Err(format!("unknown baseline '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_doppler: usize,
    pub m_delay: usize,
    /// Δf in Hz.
    pub subcarrier_spacing: f64,
    /// `T` in seconds; `None` means `1/Δf`.
    pub slot_duration: Option<f64>,
    pub carrier_freq: f64,
    pub target_count: usize,
    pub snr_sweep_db: Vec<f64>,
    pub trials_per_point: usize,
    pub cfar: CfarConfig,
    pub pilot_strategy: PilotStrategy,
    pub scenario_mode: ScenarioMode,
    pub rng_seed: u64,
    pub baseline: Baseline,
    /// Caps for drawn targets.
    pub max_range_m: f64,
    pub max_speed_kmh: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_doppler: 32,
            m_delay: 32,
            subcarrier_spacing: 39_063.0,
            slot_duration: None,
            carrier_freq: 24e9,
            target_count: 4,
            snr_sweep_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0],
            trials_per_point: 200,
            cfar: CfarConfig::default(),
            pilot_strategy: PilotStrategy::FullPilot,
            scenario_mode: ScenarioMode::DistinctRows,
            rng_seed: 1,
            baseline: Baseline::None,
            max_range_m: 3830.0,
            max_speed_kmh: 440.0,
        }
    }
}

/// Keys accepted by [`ExperimentConfig::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "n_doppler",
    "m_delay",
    "subcarrier_spacing",
    "slot_duration",
    "carrier_freq",
    "target_count",
    "snr_sweep_db",
    "trials_per_point",
    "guard_cells",
    "training_cells",
    "p_fa",
    "pilot_strategy",
    "scenario_mode",
    "rng_seed",
    "baseline",
    "max_range_m",
    "max_speed_kmh",
];

fn parse<V: FromStr>(key: &str, value: &str) -> SimResult<V>
where
    V::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| SimError::Config(format!("{key}: cannot parse '{value}': {e}")))
}

fn parse_list(key: &str, value: &str) -> SimResult<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_pair(key: &str, value: &str) -> SimResult<[usize; 2]> {
    let parts: Vec<usize> = value
        .split(',')
        .map(|s| parse(key, s))
        .collect::<SimResult<_>>()?;
    match parts[..] {
        [a] => Ok([a, a]),
        [a, b] => Ok([a, b]),
        _ => Err(SimError::Config(format!("{key}: expected one or two integers"))),
    }
}

impl ExperimentConfig {
    /// Desk-scale version of the 64×128 reference grid.
    pub fn full_scale() -> Self {
        Self {
            n_doppler: 64,
            m_delay: 128,
            trials_per_point: 10_000,
            ..Self::default()
        }
    }

    pub fn grid(&self) -> SimResult<FrameGrid<f64>> {
        let g = match self.slot_duration {
            Some(t) => FrameGrid::with_slot_duration(
                self.n_doppler,
                self.m_delay,
                self.subcarrier_spacing,
                t,
                self.carrier_freq,
            ),
            None => FrameGrid::new(self.n_doppler, self.m_delay, self.subcarrier_spacing, self.carrier_freq),
        };
        Ok(g?)
    }

    pub fn validate(&self) -> SimResult<()> {
        let grid = self.grid()?;
        if self.trials_per_point == 0 {
            return Err(SimError::Config("trials_per_point must be at least 1".into()));
        }
        if self.snr_sweep_db.is_empty() {
            return Err(SimError::Config("snr_sweep_db is empty".into()));
        }
        if self.snr_sweep_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(SimError::Config("snr_sweep_db contains an invalid value".into()));
        }
        if self.scenario_mode == ScenarioMode::DistinctRows
            && self.target_count > self.n_doppler.min(self.m_delay)
        {
            return Err(SimError::Config(format!(
                "{} targets cannot occupy distinct rows of a {}x{} grid",
                self.target_count, self.n_doppler, self.m_delay
            )));
        }
        if self.scenario_mode == ScenarioMode::Reference && (self.n_doppler < 24 || self.m_delay < 16) {
            return Err(SimError::Config("reference layout needs N >= 24 and M >= 16".into()));
        }
        if !(self.max_range_m > 0.0 && self.max_speed_kmh >= 0.0) {
            return Err(SimError::Config("range and speed caps must be positive".into()));
        }
        self.cfar.validate(grid.n_doppler(), grid.m_delay())?;
        Ok(())
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> SimResult<()> {
        let key = key.trim();
        match key {
            "n_doppler" => self.n_doppler = parse(key, value)?,
            "m_delay" => self.m_delay = parse(key, value)?,
            "subcarrier_spacing" => self.subcarrier_spacing = parse(key, value)?,
            "slot_duration" => {
                self.slot_duration = match value.trim() {
                    "" | "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "carrier_freq" => self.carrier_freq = parse(key, value)?,
            "target_count" => self.target_count = parse(key, value)?,
            "snr_sweep_db" => self.snr_sweep_db = parse_list(key, value)?,
            "trials_per_point" => self.trials_per_point = parse(key, value)?,
            "guard_cells" => self.cfar.guard_cells = parse_pair(key, value)?,
            "training_cells" => self.cfar.training_cells = parse_pair(key, value)?,
            "p_fa" => self.cfar.p_fa = parse(key, value)?,
            "pilot_strategy" => self.pilot_strategy = parse(key, value)?,
            "scenario_mode" => self.scenario_mode = parse(key, value)?,
            "rng_seed" => self.rng_seed = parse(key, value)?,
            "baseline" => self.baseline = parse(key, value)?,
            "max_range_m" => self.max_range_m = parse(key, value)?,
            "max_speed_kmh" => self.max_speed_kmh = parse(key, value)?,
            other => return Err(SimError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Apply a `key = value` assignment written as one string.
    pub fn set_assignment(&mut self, assignment: &str) -> SimResult<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| SimError::Config(format!("expected key=value, got '{assignment}'")))?;
        self.set(k, v)
    }

    /// Overlay a config file body onto `self`. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> SimResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_assignment(line)
                .map_err(|e| SimError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> SimResult<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Every field as `key = value`, readable by [`Self::from_text`].
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| fmt9(*x)).collect::<Vec<_>>().join(", ");
        let pair = |p: [usize; 2]| format!("{}, {}", p[0], p[1]);
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("n_doppler", self.n_doppler.to_string());
        kv("m_delay", self.m_delay.to_string());
        kv("subcarrier_spacing", fmt9(self.subcarrier_spacing));
        kv("slot_duration", self.slot_duration.map_or("auto".into(), fmt9));
        kv("carrier_freq", fmt9(self.carrier_freq));
        kv("target_count", self.target_count.to_string());
        kv("snr_sweep_db", list(&self.snr_sweep_db));
        kv("trials_per_point", self.trials_per_point.to_string());
        kv("guard_cells", pair(self.cfar.guard_cells));
        kv("training_cells", pair(self.cfar.training_cells));
        kv("p_fa", fmt9(self.cfar.p_fa));
        kv("pilot_strategy", self.pilot_strategy.name().into());
        kv("scenario_mode", self.scenario_mode.name().into());
        kv("rng_seed", self.rng_seed.to_string());
        kv("baseline", self.baseline.name().into());
        kv("max_range_m", fmt9(self.max_range_m));
        kv("max_speed_kmh", fmt9(self.max_speed_kmh));
        s
    }
}
