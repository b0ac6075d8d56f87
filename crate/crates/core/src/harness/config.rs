use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::css::{SvCollection, SvSet};
use crate::modem::Seed;
use crate::partition::PartitionKind;
use crate::spectral::check_power_of_two;
use crate::svsets::{parse_sv_set, preset, read_sv_file, to_sv_string, PRESET_NAMES};
use crate::{Error, Result};

/// Candidate generation used by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Cyclic shifted sequences.
    Css,
    /// Partial transmit sequences with rotation factors from {+1, -1, +j, -j}.
    Pts,
    /// No reduction; the selected signal is the original.
    None,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Css => "css",
            Scheme::Pts => "pts",
            Scheme::None => "none",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "css" => Ok(Scheme::Css),
            "pts" => Ok(Scheme::Pts),
            "none" => Ok(Scheme::None),
            other => Err(Error::config(format!("unknown scheme '{other}', expected css, pts or none"))),
        }
    }
}

/// CCDF threshold grid in dB: `min, min + step, ..., <= max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdGrid {
    pub min_db: f64,
    pub max_db: f64,
    pub step_db: f64,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        Self {
            min_db: 4.0,
            max_db: 13.0,
            step_db: 0.1,
        }
    }
}

impl ThresholdGrid {
    pub fn thresholds(&self) -> Vec<f64> {
        let count = ((self.max_db - self.min_db) / self.step_db + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let t = self.min_db + i as f64 * self.step_db;
                (t * 1e9).round() / 1e9
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.step_db > 0.0) || !self.min_db.is_finite() || !(self.max_db >= self.min_db) {
            return Err(Error::config(format!(
                "invalid threshold grid {}..{} step {}",
                self.min_db, self.max_db, self.step_db
            )));
        }
        Ok(())
    }
}

/// Where the SV collection of an experiment comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SvSource {
    Preset(String),
    File(PathBuf),
    Inline(Vec<SvSet>),
}

impl SvSource {
    fn parse(value: &str) -> Result<Self> {
        let value = value.trim();
        if let Some(path) = value.strip_prefix('@') {
            return Ok(SvSource::File(PathBuf::from(path.trim())));
        }
        if PRESET_NAMES.contains(&value) {
            return Ok(SvSource::Preset(value.to_string()));
        }
        if value.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            return Err(Error::config(format!(
                "unknown SV preset '{value}', expected one of {}",
                PRESET_NAMES.join(", ")
            )));
        }
        value
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_sv_set(s, 0))
            .collect::<Result<Vec<_>>>()
            .map(SvSource::Inline)
    }
}

impl fmt::Display for SvSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SvSource::Preset(name) => f.write_str(name),
            SvSource::File(path) => write!(f, "@{}", path.display()),
            SvSource::Inline(sets) => {
                let parts: Vec<String> = sets.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join(";"))
            }
        }
    }
}

/// One Monte Carlo experiment.
///
/// The text form is one `key = value` per line (`#` starts a comment). Keys
/// are the field names below; `sv_collection` takes a preset name, `@path`
/// to an SV-set file, or inline sets separated by `;`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub v_count: usize,
    /// Defaults to the size of the SV collection, or 4.
    pub u_count: Option<usize>,
    pub partition_kind: PartitionKind,
    pub partition_seed: Seed,
    /// Replays a saved `k,v` partition instead of generating one.
    pub partition_file: Option<PathBuf>,
    pub sv_collection: Option<SvSource>,
    pub trials: usize,
    pub master_seed: Seed,
    pub oversample: usize,
    pub scheme: Scheme,
    pub grid: ThresholdGrid,
    /// Smallest CCDF level the experiment is meant to resolve.
    pub ccdf_depth: f64,
    /// Worker threads, 0 for one per core. Never affects results.
    pub workers: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 128,
            v_count: 4,
            u_count: None,
            partition_kind: PartitionKind::Random,
            partition_seed: Seed(0),
            partition_file: None,
            sv_collection: None,
            trials: 100_000,
            master_seed: Seed(0),
            oversample: 1,
            scheme: Scheme::Css,
            grid: ThresholdGrid::default(),
            ccdf_depth: 1e-3,
            workers: 0,
        }
    }
}

/// Keys accepted by [`SimConfig::set`], in echo order.
pub const CONFIG_KEYS: [&str; 16] = [
    "n",
    "v_count",
    "u_count",
    "partition_kind",
    "partition_seed",
    "partition_file",
    "sv_collection",
    "trials",
    "master_seed",
    "oversample",
    "scheme",
    "ccdf_min_db",
    "ccdf_max_db",
    "ccdf_step_db",
    "ccdf_depth",
    "workers",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::config(format!("bad value '{value}' for {key}: {e}")))
}

impl SimConfig {
    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "n" => self.n = parse_num(&key, value)?,
            "v_count" | "v" => self.v_count = parse_num(&key, value)?,
            "u_count" | "u" => self.u_count = Some(parse_num(&key, value)?),
            "partition_kind" | "partition" => self.partition_kind = value.parse()?,
            "partition_seed" => self.partition_seed = parse_num(&key, value)?,
            "partition_file" => {
                self.partition_file = Some(PathBuf::from(value.trim())).filter(|p| !p.as_os_str().is_empty())
            }
            "sv_collection" => self.sv_collection = Some(SvSource::parse(value)?),
            "trials" => self.trials = parse_num(&key, value)?,
            "master_seed" => self.master_seed = parse_num(&key, value)?,
            "oversample" => self.oversample = parse_num(&key, value)?,
            "scheme" => self.scheme = value.parse()?,
            "ccdf_min_db" => self.grid.min_db = parse_num(&key, value)?,
            "ccdf_max_db" => self.grid.max_db = parse_num(&key, value)?,
            "ccdf_step_db" => self.grid.step_db = parse_num(&key, value)?,
            "ccdf_depth" => self.ccdf_depth = parse_num(&key, value)?,
            "workers" => self.workers = parse_num(&key, value)?,
            other => return Err(Error::config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Parses the `key = value` text form on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, "expected 'key = value'"))?;
            config.set(key, value).map_err(|e| match e {
                Error::Config(msg) => Error::parse(idx + 1, msg),
                other => other,
            })?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Resolves the SV collection, if any.
    pub fn collection(&self) -> Result<Option<SvCollection>> {
        let c = match &self.sv_collection {
            None => return Ok(None),
            Some(SvSource::Preset(name)) => preset(name)?,
            Some(SvSource::File(path)) => read_sv_file(BufReader::new(File::open(path)?))?,
            Some(SvSource::Inline(sets)) => SvCollection::new(self.n, self.v_count, sets.clone())?,
        };
        if c.n() != self.n || c.v_count() != self.v_count {
            return Err(Error::config(format!(
                "SV collection is for N={}, V={} but the experiment uses N={}, V={}",
                c.n(),
                c.v_count(),
                self.n,
                self.v_count
            )));
        }
        Ok(Some(c))
    }

    /// Effective number of candidates.
    pub fn effective_u_count(&self) -> Result<usize> {
        let from_collection = match self.scheme {
            Scheme::Css => self.collection()?.map(|c| c.u_count()),
            _ => None,
        };
        match (self.u_count, from_collection) {
            (Some(u), Some(c)) if u != c => Err(Error::config(format!(
                "u_count={u} but the SV collection has {c} sets"
            ))),
            (Some(u), _) => Ok(u),
            (None, Some(c)) => Ok(c),
            (None, None) => Ok(4),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_power_of_two(self.n, "n")?;
        check_power_of_two(self.v_count, "v_count")?;
        if self.v_count > self.n {
            return Err(Error::config("v_count must not exceed n"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        check_power_of_two(self.oversample, "oversample")?;
        self.grid.validate()?;
        if !(self.ccdf_depth > 0.0 && self.ccdf_depth <= 1.0) {
            return Err(Error::config("ccdf_depth must lie in (0, 1]"));
        }
        if self.effective_u_count()? == 0 {
            return Err(Error::config("u_count must be at least 1"));
        }
        if self.scheme == Scheme::Css && self.sv_collection.is_none() {
            return Err(Error::config("scheme=css needs an sv_collection"));
        }
        Ok(())
    }

    /// Canonical `key=value` lines describing everything that affects results.
    /// `workers` is left out on purpose: output must not depend on it.
    pub fn echo(&self) -> Result<Vec<String>> {
        let mut lines = vec![
            format!("n={}", self.n),
            format!("v_count={}", self.v_count),
            format!("u_count={}", self.effective_u_count()?),
            format!("partition_kind={}", self.partition_kind),
            format!("partition_seed={}", self.partition_seed),
        ];
        if let Some(path) = &self.partition_file {
            lines.push(format!("partition_file={}", path.display()));
        }
        if let Some(src) = &self.sv_collection {
            lines.push(format!("sv_collection={src}"));
            if let Some(c) = self.collection()? {
                let sets: Vec<String> = to_sv_string(&c).lines().skip(1).map(str::to_string).collect();
                lines.push(format!("sv_sets={}", sets.join(";")));
            }
        }
        lines.extend([
            format!("trials={}", self.trials),
            format!("master_seed={}", self.master_seed),
            format!("oversample={}", self.oversample),
            format!("scheme={}", self.scheme),
            format!("ccdf_min_db={}", self.grid.min_db),
            format!("ccdf_max_db={}", self.grid.max_db),
            format!("ccdf_step_db={}", self.grid.step_db),
            format!("ccdf_depth={}", self.ccdf_depth),
        ]);
        Ok(lines)
    }
}
