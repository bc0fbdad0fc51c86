//! `key = value` sweep configuration files.
//!
//! Blank lines and `#` comments are ignored. Every error names its line.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use locality_mpc::StrategyKind;

use crate::scenario::Scenario;

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    N,
    T,
    D,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::N => "N",
            SweepParam::T => "T",
            SweepParam::D => "d",
        }
    }

    pub fn apply(self, sc: &mut Scenario, value: usize) {
        match self {
            SweepParam::N => sc.n = value,
            SweepParam::T => sc.t_horizon = value,
            SweepParam::D => sc.d = value,
        }
    }

    pub fn value(self, sc: &Scenario) -> usize {
        match self {
            SweepParam::N => sc.n,
            SweepParam::T => sc.t_horizon,
            SweepParam::D => sc.d,
        }
    }
}

impl FromStr for SweepParam {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "N" | "n" => Ok(SweepParam::N),
            "T" | "t" | "t_horizon" => Ok(SweepParam::T),
            "d" | "D" => Ok(SweepParam::D),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub vary: SweepParam,
    pub values: Vec<usize>,
    /// Values of the parameters that are not varied.
    pub base: Scenario,
    pub strategies: Vec<StrategyKind>,
    pub repeats: usize,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            vary: SweepParam::N,
            values: vec![10],
            base: Scenario::default(),
            strategies: StrategyKind::ALL.to_vec(),
            repeats: 10,
            out: None,
        }
    }
}

impl SweepConfig {
    /// Scenarios in sweep order: value, then strategy, then repeat. Repeat
    /// `k` uses seed `base.seed + k`.
    pub fn scenarios(&self) -> Vec<(usize, Scenario)> {
        let mut out = Vec::new();
        for &v in &self.values {
            for &kind in &self.strategies {
                for k in 0..self.repeats {
                    let mut sc = self.base.with_strategy(kind);
                    self.vary.apply(&mut sc, v);
                    sc.seed = self.base.seed + k as u64;
                    out.push((k, sc));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at line {}", self.message, self.line)
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let mut cfg = SweepConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| ConfigError { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(err(format!("missing value for {key}")));
        }
        match key {
            "vary" => {
                cfg.vary = value
                    .parse()
                    .map_err(|_| err(format!("unknown parameter {value}")))?
            }
            "values" => cfg.values = parse_list(value, key, line)?,
            "strategies" => {
                cfg.strategies = if value == "all" {
                    StrategyKind::ALL.to_vec()
                } else {
                    value
                        .split(',')
                        .map(|s| {
                            s.trim()
                                .parse()
                                .map_err(|_| err(format!("unknown strategy {}", s.trim())))
                        })
                        .collect::<Result<_, _>>()?
                }
            }
            "repeats" => cfg.repeats = parse_one(value, key, line)?,
            "out" => cfg.out = Some(PathBuf::from(value)),
            "n" | "N" => cfg.base.n = parse_one(value, key, line)?,
            "t_horizon" | "T" => cfg.base.t_horizon = parse_one(value, key, line)?,
            "d" => cfg.base.d = parse_one(value, key, line)?,
            "t_sim" => cfg.base.t_sim = parse_one(value, key, line)?,
            "seed" => cfg.base.seed = parse_one(value, key, line)?,
            "rho" => cfg.base.rho = parse_one(value, key, line)?,
            "eps" => cfg.base.eps = parse_one(value, key, line)?,
            "max_iter" => cfg.base.max_iter = parse_one(value, key, line)?,
            "coupling_radius" => cfg.base.coupling_radius = parse_one(value, key, line)?,
            "workers" => cfg.base.worker_count = parse_one(value, key, line)?,
            _ => return Err(err(format!("unknown key {key}"))),
        }
    }
    if cfg.values.is_empty() {
        return Err(ConfigError {
            line: 0,
            message: "values must not be empty".into(),
        });
    }
    Ok(cfg)
}

fn parse_one<T: FromStr>(value: &str, key: &str, line: usize) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError {
        line,
        message: format!("invalid value `{value}` for {key}"),
    })
}

fn parse_list<T: FromStr>(value: &str, key: &str, line: usize) -> Result<Vec<T>, ConfigError> {
    value
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(|s| parse_one(s.trim(), key, line))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.vary, SweepParam::N);
        assert_eq!(c.values, vec![10]);
        assert_eq!(c.repeats, 10);
        assert_eq!((c.base.n, c.base.t_horizon, c.base.d, c.base.t_sim), (10, 5, 2, 20));
        assert_eq!(c.strategies.len(), 5);
    }

    #[test]
    fn full_file() {
        let c = parse_config(
            "# scaling\nvary = d\nvalues = [1, 2, 3]\nstrategies = sequential, fused\n\
             repeats = 2\nn = 20  # inline comment\nt_sim = 4\neps = 1e-5\nout = r.csv\n",
        )
        .unwrap();
        assert_eq!(c.vary, SweepParam::D);
        assert_eq!(c.values, vec![1, 2, 3]);
        assert_eq!(c.strategies, vec![StrategyKind::Sequential, StrategyKind::Fused]);
        assert_eq!(c.base.n, 20);
        assert_eq!(c.base.eps, 1e-5);
        assert_eq!(c.out, Some(PathBuf::from("r.csv")));
        let scs = c.scenarios();
        assert_eq!(scs.len(), 3 * 2 * 2);
        assert_eq!(scs[1].1.seed, 2);
        assert_eq!(scs.last().unwrap().1.d, 3);
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_config("vary = Q").unwrap_err();
        assert_eq!(e.to_string(), "unknown parameter Q at line 1");
        let e = parse_config("\n# c\nbogus = 3").unwrap_err();
        assert_eq!(e.to_string(), "unknown key bogus at line 3");
        let e = parse_config("n = 3\nrepeats").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_config("values = 1, x").unwrap_err();
        assert_eq!(e.to_string(), "invalid value `x` for values at line 1");
        let e = parse_config("strategies = warp").unwrap_err();
        assert_eq!(e.line, 1);
    }
}
