use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use crate::CliError;

/// A complex command-line value: `re` or `re,im`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CplxArg(pub f64, pub f64);

impl FromStr for CplxArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {t:?}"))
        };
        let v = match s.split_once(',') {
            Some((a, b)) => CplxArg(num(a)?, num(b)?),
            None => CplxArg(num(s)?, 0.0),
        };
        if !v.0.is_finite() || !v.1.is_finite() {
            return Err(format!("not finite: {s:?}"));
        }
        Ok(v)
    }
}

impl fmt::Display for CplxArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

impl From<CplxArg> for Value {
    fn from(c: CplxArg) -> Value {
        Value::from(vec![c.0, c.1])
    }
}

/// Reads `key=value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut kv = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("config line {}: expected key=value", n + 1))
        })?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(kv)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse_pairs(&text)
}

/// Resolves each setting from the command line, then the config file, then
/// a default, and records what was used for the artifact's config echo.
pub struct Resolver {
    file: BTreeMap<String, String>,
    echo: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Resolver {
            file,
            echo: BTreeMap::new(),
        }
    }

    pub fn file(&self) -> &BTreeMap<String, String> {
        &self.file
    }

    pub fn opt<V>(&mut self, key: &str, cli: Option<V>) -> Result<Option<V>, CliError>
    where
        V: FromStr + Into<Value> + Clone,
        V::Err: fmt::Display,
    {
        let v = match cli {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(
                    s.parse::<V>()
                        .map_err(|e| CliError::Validation(format!("config key {key}: {e}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.echo.insert(key.to_string(), v.clone().into());
        }
        Ok(v)
    }

    pub fn get<V>(&mut self, key: &str, cli: Option<V>, default: V) -> Result<V, CliError>
    where
        V: FromStr + Into<Value> + Clone,
        V::Err: fmt::Display,
    {
        let v = self.opt(key, cli)?.unwrap_or(default);
        self.echo.insert(key.to_string(), v.clone().into());
        Ok(v)
    }

    pub fn require<V>(&mut self, key: &str, cli: Option<V>) -> Result<V, CliError>
    where
        V: FromStr + Into<Value> + Clone,
        V::Err: fmt::Display,
    {
        self.opt(key, cli)?
            .ok_or_else(|| CliError::Validation(format!("missing --{key}")))
    }

    pub fn record(&mut self, key: &str, value: Value) {
        self.echo.insert(key.to_string(), value);
    }

    pub fn echo(&self) -> Value {
        Value::Object(self.echo.clone().into_iter().collect())
    }
}
