//! Run configuration: flags over a `key = value` file over defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use fq_junta::FieldSpec;

/// Environment variable consulted for `seed` when neither flag nor file sets it.
pub const SEED_ENV: &str = "FQJ_SEED";

/// Every recognised key with its default (`auto` means derived at use).
pub const KEYS: &[(&str, &str)] = &[
    ("backend", "naive"),
    ("cor_multiplier", "1"),
    ("count", "500"),
    ("d", "auto"),
    ("delta", "0.1"),
    ("instance", "none"),
    ("k", "2"),
    ("kind", "junta"),
    ("ldme_rho", "auto"),
    ("ldme_runs", "auto"),
    ("min_success", "0"),
    ("multiplier", "1"),
    ("n", "16"),
    ("out", "none"),
    ("profile", "exact"),
    ("q", "2"),
    ("repeats", "auto"),
    ("residual_k", "auto"),
    ("reuse", "fresh"),
    ("rho", "0.5"),
    ("row_multiplier", "1"),
    ("seed", "0"),
    ("timing", "false"),
    ("trials", "1"),
    ("weight", "auto"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "config line {}: {}", self.line, self.msg)
        } else {
            write!(f, "{}", self.msg)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError { line, msg: msg.into() }
}

pub fn is_known_key(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

/// Parses `key = value` lines; `#` starts a comment.  Unknown and repeated
/// keys are errors.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| err(ln, "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if !is_known_key(k) {
            return Err(err(ln, format!("unknown key {k:?}")));
        }
        if v.is_empty() || v.chars().any(char::is_whitespace) {
            return Err(err(ln, format!("bad value for {k}")));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(err(ln, format!("duplicate key {k:?}")));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Flag,
    File,
    Env,
    Default,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Flag => "flag",
            Source::File => "file",
            Source::Env => "env",
            Source::Default => "default",
        })
    }
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, (String, Source)>,
}

impl RunConfig {
    /// Resolves every key: flag, then file, then (for `seed`) the environment,
    /// then the default.
    pub fn resolve(
        flags: &BTreeMap<String, String>,
        file: &BTreeMap<String, String>,
        env_seed: Option<String>,
    ) -> Result<Self, ConfigError> {
        for k in flags.keys() {
            if !is_known_key(k) {
                return Err(err(0, format!("unknown key {k:?}")));
            }
        }
        let mut values = BTreeMap::new();
        for &(key, default) in KEYS {
            let v = if let Some(v) = flags.get(key) {
                (v.clone(), Source::Flag)
            } else if let Some(v) = file.get(key) {
                (v.clone(), Source::File)
            } else if let (Some(v), "seed") = (&env_seed, key) {
                (v.clone(), Source::Env)
            } else {
                (default.to_string(), Source::Default)
            };
            values.insert(key, v);
        }
        Ok(RunConfig { values })
    }

    pub fn defaults() -> Self {
        Self::resolve(&BTreeMap::new(), &BTreeMap::new(), None).expect("defaults are valid")
    }

    pub fn raw(&self, key: &str) -> &str {
        &self.values.get(key).unwrap_or_else(|| panic!("unknown key {key}")).0
    }

    pub fn source(&self, key: &str) -> Source {
        self.values.get(key).map(|v| v.1).unwrap_or(Source::Default)
    }

    pub fn set(&mut self, key: &'static str, value: impl Into<String>) {
        self.values.insert(key, (value.into(), Source::Flag));
    }

    pub fn is_auto(&self, key: &str) -> bool {
        matches!(self.raw(key), "auto" | "none")
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let v = self.raw(key);
        v.parse().map_err(|_| err(0, format!("bad value {v:?} for {key}")))
    }

    /// `None` for `auto` / `none`.
    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        if self.is_auto(key) {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    /// `q` accepts a prime power (`4`) or a field token (`2:2`, `2:2:1,1,1`).
    pub fn field(&self) -> Result<FieldSpec, ConfigError> {
        parse_field(self.raw("q")).map_err(|m| err(0, m))
    }

    /// `config key=value` lines in key order, then the seed's source.
    pub fn echo(&self) -> Vec<String> {
        let mut out: Vec<String> = self.values.iter().map(|(k, (v, _))| format!("config {k}={v}")).collect();
        out.push(format!("config seed_source={}", self.source("seed")));
        out
    }
}

pub fn parse_field(s: &str) -> Result<FieldSpec, String> {
    if s.contains(':') {
        s.parse::<FieldSpec>().map_err(|e| e.to_string())
    } else {
        let q: u64 = s.parse().map_err(|_| format!("bad field {s:?}"))?;
        FieldSpec::of_order(q).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parsing() {
        let m = parse_config_text("# run\nq = 3\nn=10 # inline\n\nrho = 0.25\n").unwrap();
        assert_eq!(m.get("q").unwrap(), "3");
        assert_eq!(m.get("n").unwrap(), "10");
        assert_eq!(m.len(), 3);
        assert_eq!(parse_config_text("bogus = 1").unwrap_err().line, 1);
        assert!(parse_config_text("q = 3\nq = 4").is_err());
        assert!(parse_config_text("q 3").is_err());
        assert!(parse_config_text("q = ").is_err());
    }

    #[test]
    fn precedence() {
        let mut flags = BTreeMap::new();
        flags.insert("n".to_string(), "12".to_string());
        let file = parse_config_text("n = 10\nk = 3\n").unwrap();
        let cfg = RunConfig::resolve(&flags, &file, Some("77".into())).unwrap();
        assert_eq!(cfg.get::<usize>("n").unwrap(), 12);
        assert_eq!(cfg.source("n"), Source::Flag);
        assert_eq!(cfg.get::<usize>("k").unwrap(), 3);
        assert_eq!(cfg.get::<u64>("seed").unwrap(), 77);
        assert_eq!(cfg.source("seed"), Source::Env);
        assert_eq!(cfg.get_opt::<usize>("d").unwrap(), None);
        assert!(cfg.echo().contains(&"config seed_source=env".to_string()));
    }

    #[test]
    fn field_tokens() {
        assert_eq!(parse_field("4").unwrap().q(), 4);
        assert_eq!(parse_field("2:2").unwrap().q(), 4);
        assert!(parse_field("6").is_err());
        assert!(parse_field("x").is_err());
    }
}
