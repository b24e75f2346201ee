//! Run configuration: merged view of command line flags and an optional
//! INI-style `key=value` config file (flags win). Re-emitting the
//! effective configuration produces a file that parses back to itself.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub scheme: Option<String>,
    pub theta: Option<f64>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
    pub mesh: Option<String>,
    pub interp: Option<String>,
    pub ghost_ch: Option<f64>,
    pub ghost_h: Option<f64>,
    pub out: Option<String>,
    pub threads: Option<usize>,
    pub checkpoints: Vec<f64>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let mut cfg = RunConfig::default();
        let parse_f64 = |k: &str, v: &str| -> Result<f64, String> {
            v.parse().map_err(|_| format!("{k}: bad number '{v}'"))
        };
        for (key, value) in map {
            match key.as_str() {
                "problem" => cfg.problem = Some(value),
                "scheme" => cfg.scheme = Some(value),
                "theta" => cfg.theta = Some(parse_f64("theta", &value)?),
                "dx" => cfg.dx = Some(parse_f64("dx", &value)?),
                "dt" => cfg.dt = Some(parse_f64("dt", &value)?),
                "mu" => cfg.mu = Some(parse_f64("mu", &value)?),
                "lambda" => cfg.lambda = Some(parse_f64("lambda", &value)?),
                "mesh" => cfg.mesh = Some(value),
                "interp" => cfg.interp = Some(value),
                "ghost_ch" => cfg.ghost_ch = Some(parse_f64("ghost_ch", &value)?),
                "ghost_h" => cfg.ghost_h = Some(parse_f64("ghost_h", &value)?),
                "out" => cfg.out = Some(value),
                "threads" => {
                    cfg.threads =
                        Some(value.parse().map_err(|_| "threads: not an integer".to_string())?)
                }
                "checkpoints" => {
                    cfg.checkpoints = value
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| parse_f64("checkpoints", s.trim()))
                        .collect::<Result<_, _>>()?
                }
                other => return Err(format!("unknown config key '{other}'")),
            }
        }
        Ok(cfg)
    }

    /// Flags override file values; lists are replaced wholesale.
    pub fn overridden_by(mut self, flags: &RunConfig) -> Self {
        macro_rules! take {
            ($field:ident) => {
                if flags.$field.is_some() {
                    self.$field = flags.$field.clone();
                }
            };
        }
        take!(problem);
        take!(scheme);
        take!(theta);
        take!(dx);
        take!(dt);
        take!(mu);
        take!(lambda);
        take!(mesh);
        take!(interp);
        take!(ghost_ch);
        take!(ghost_h);
        take!(out);
        take!(threads);
        if !flags.checkpoints.is_empty() {
            self.checkpoints = flags.checkpoints.clone();
        }
        self
    }

    /// Effective configuration as a config file.
    pub fn to_config_string(&self) -> String {
        let mut lines: Vec<String> = Vec::new();
        if let Some(v) = &self.problem {
            lines.push(format!("problem = {v}"));
        }
        if let Some(v) = &self.scheme {
            lines.push(format!("scheme = {v}"));
        }
        if let Some(v) = self.theta {
            lines.push(format!("theta = {v}"));
        }
        if let Some(v) = self.dx {
            lines.push(format!("dx = {v}"));
        }
        if let Some(v) = self.dt {
            lines.push(format!("dt = {v}"));
        }
        if let Some(v) = self.mu {
            lines.push(format!("mu = {v}"));
        }
        if let Some(v) = self.lambda {
            lines.push(format!("lambda = {v}"));
        }
        if let Some(v) = &self.mesh {
            lines.push(format!("mesh = {v}"));
        }
        if let Some(v) = &self.interp {
            lines.push(format!("interp = {v}"));
        }
        if let Some(v) = self.ghost_ch {
            lines.push(format!("ghost_ch = {v}"));
        }
        if let Some(v) = self.ghost_h {
            lines.push(format!("ghost_h = {v}"));
        }
        if let Some(v) = &self.out {
            lines.push(format!("out = {v}"));
        }
        if let Some(v) = self.threads {
            lines.push(format!("threads = {v}"));
        }
        if !self.checkpoints.is_empty() {
            let list: Vec<String> = self.checkpoints.iter().map(|c| c.to_string()).collect();
            lines.push(format!("checkpoints = {}", list.join(",")));
        }
        lines.sort();
        lines.join("\n") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_roundtrip() {
        let text = "# run setup\nproblem = pure_diffusion\nscheme=sl2\ndx = 0.02\nmu=3.2\ncheckpoints = 0.5, 1\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.problem.as_deref(), Some("pure_diffusion"));
        assert_eq!(cfg.mu, Some(3.2));
        assert_eq!(cfg.checkpoints, vec![0.5, 1.0]);
        // Idempotent: parse(emit(cfg)) == cfg, emit stable.
        let emitted = cfg.to_config_string();
        let back = RunConfig::parse(&emitted).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_config_string(), emitted);
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::parse("problem = pure_diffusion\ndt = 0.1\n").unwrap();
        let flags = RunConfig {
            dt: Some(0.05),
            ..Default::default()
        };
        let merged = file.overridden_by(&flags);
        assert_eq!(merged.dt, Some(0.05));
        assert_eq!(merged.problem.as_deref(), Some("pure_diffusion"));
    }

    #[test]
    fn bad_keys_and_values_are_reported() {
        assert!(RunConfig::parse("nope = 1\n").is_err());
        assert!(RunConfig::parse("dt = abc\n").is_err());
        assert!(RunConfig::parse("dt 0.1\n").is_err());
    }
}
