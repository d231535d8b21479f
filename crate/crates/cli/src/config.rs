//! `key = value` configuration with `[subcommand]` sections.
//!
//! Precedence, lowest first: built-in defaults, keys before any section,
//! keys in the section named after the subcommand, command-line flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use critlab_core::data::default_bump;
use critlab_core::{DataSpec, Error, ModelOperator, Result};

pub const KEYS: &[&str] = &[
    "op",
    "data",
    "alpha",
    "alpha_lo",
    "alpha_hi",
    "alpha_step",
    "grid_m",
    "grid_r",
    "t_min",
    "t_max",
    "points_per_decade",
    "times",
    "sigma_max",
    "x",
    "y",
    "out",
    "seed",
    "samples",
];

/// Raw key/value pairs of a parsed file.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    pub global: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = ConfigFile::default();
        let mut section: Option<String> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse(format!("line {}: unterminated section header", n + 1)))?;
                section = Some(name.trim().to_string());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim().replace('-', "_");
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Parse(format!("line {}: unknown key '{k}'", n + 1)));
            }
            let map = match &section {
                Some(s) => file.sections.entry(s.clone()).or_default(),
                None => &mut file.global,
            };
            map.insert(k, v.trim().to_string());
        }
        Ok(file)
    }

    /// Global keys overlaid by the section for `command`.
    pub fn for_command(&self, command: &str) -> BTreeMap<String, String> {
        let mut out = self.global.clone();
        if let Some(s) = self.sections.get(command) {
            out.extend(s.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        out
    }
}

/// Effective settings for one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: String,
    pub op: ModelOperator,
    pub data: DataSpec,
    pub alpha: Vec<f64>,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub alpha_step: f64,
    pub grid_m: usize,
    pub grid_r: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
    pub times: Vec<f64>,
    pub sigma_max: Option<f64>,
    pub x: f64,
    pub y: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub samples: usize,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad value '{v}' for {key}")))
}

pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num(key, s)).collect()
}

impl ExperimentConfig {
    /// Builds the effective config from merged key/value pairs.
    pub fn from_map(command: &str, map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let op: ModelOperator = get("op").unwrap_or("free:3").parse()?;
        let data = match get("data") {
            Some(s) => s.parse()?,
            None => default_bump(op.kind()),
        };
        let wave_like = command == "wave";
        let alpha_default = match command {
            "seminorm" => vec![0.4],
            "green" => vec![0.5],
            _ => Vec::new(),
        };
        let cfg = ExperimentConfig {
            command: command.to_string(),
            op,
            data,
            alpha: match get("alpha") {
                Some(v) => parse_list("alpha", v)?,
                None => alpha_default,
            },
            alpha_lo: get("alpha_lo").map_or(Ok(0.02), |v| parse_num("alpha_lo", v))?,
            alpha_hi: get("alpha_hi").map_or(Ok(1.5), |v| parse_num("alpha_hi", v))?,
            alpha_step: get("alpha_step").map_or(Ok(0.02), |v| parse_num("alpha_step", v))?,
            grid_m: get("grid_m").map_or(Ok(512), |v| parse_num("grid_m", v))?,
            grid_r: get("grid_r").map_or(Ok(40.0), |v| parse_num("grid_r", v))?,
            t_min: get("t_min").map_or(Ok(if wave_like { 1.0 } else { 1e-4 }), |v| parse_num("t_min", v))?,
            t_max: get("t_max").map_or(Ok(if wave_like { 1e3 } else { 1e6 }), |v| parse_num("t_max", v))?,
            points_per_decade: get("points_per_decade").map_or(Ok(32), |v| parse_num("points_per_decade", v))?,
            times: match get("times") {
                Some(v) => parse_list("times", v)?,
                None => vec![0.5, 1.0, 2.0],
            },
            sigma_max: get("sigma_max").map(|v| parse_num("sigma_max", v)).transpose()?,
            x: get("x").map_or(Ok(1.0), |v| parse_num("x", v))?,
            y: get("y").map_or(Ok(2.0), |v| parse_num("y", v))?,
            out: PathBuf::from(get("out").unwrap_or("out")),
            seed: get("seed").map_or(Ok(20240917), |v| parse_num("seed", v))?,
            samples: get("samples").map_or(Ok(100), |v| parse_num("samples", v))?,
        };
        Ok(cfg)
    }

    /// Every effective setting as `key = value`, in a fixed order.
    pub fn manifest(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "op = {}", self.op);
        let _ = writeln!(s, "data = {}", self.data);
        let _ = writeln!(s, "alpha = {}", list(&self.alpha));
        let _ = writeln!(s, "alpha_lo = {}", self.alpha_lo);
        let _ = writeln!(s, "alpha_hi = {}", self.alpha_hi);
        let _ = writeln!(s, "alpha_step = {}", self.alpha_step);
        let _ = writeln!(s, "grid_m = {}", self.grid_m);
        let _ = writeln!(s, "grid_r = {}", self.grid_r);
        let _ = writeln!(s, "t_min = {}", self.t_min);
        let _ = writeln!(s, "t_max = {}", self.t_max);
        let _ = writeln!(s, "points_per_decade = {}", self.points_per_decade);
        let _ = writeln!(s, "times = {}", list(&self.times));
        match self.sigma_max {
            Some(v) => {
                let _ = writeln!(s, "sigma_max = {v}");
            }
            None => {
                let _ = writeln!(s, "sigma_max = auto");
            }
        }
        let _ = writeln!(s, "x = {}", self.x);
        let _ = writeln!(s, "y = {}", self.y);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "samples = {}", self.samples);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_override_globals() {
        let f = ConfigFile::parse("op = free:2\ngrid-m = 256\n# note\n[scan]\nop = free1d\n").unwrap();
        let scan = f.for_command("scan");
        assert_eq!(scan["op"], "free1d");
        assert_eq!(scan["grid_m"], "256");
        assert_eq!(f.for_command("wave")["op"], "free:2");
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("op free:3").is_err());
        assert!(ConfigFile::parse("[scan\nop = free:3").is_err());
    }

    #[test]
    fn defaults_follow_the_kind() {
        let mut m = BTreeMap::new();
        m.insert("op".to_string(), "hardy:3:-0.25".to_string());
        let c = ExperimentConfig::from_map("scan", &m).unwrap();
        assert_eq!(c.data, default_bump(c.op.kind()));
        assert_eq!(c.grid_m, 512);
        let c = ExperimentConfig::from_map("wave", &m).unwrap();
        assert_eq!((c.t_min, c.t_max), (1.0, 1e3));
        assert!(c.manifest().contains("op = hardy:3:-0.25"));
    }
}
