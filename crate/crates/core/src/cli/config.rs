//! Flag > config file > default resolution, with every resolved value
//! echoed and recorded for the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Flag,
    File,
    Default,
}

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub key: String,
    pub value: String,
    pub source: Source,
}

/// Parses `key = value` lines; `#` starts a comment. Keys are normalized to
/// kebab case so `alpha_hat` and `alpha-hat` are the same key. Repeated
/// keys accumulate into a comma-separated list.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out: BTreeMap<String, String> = BTreeMap::new();
    for (row, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Format {
                row,
                msg: format!("expected key=value, found {line:?}"),
            });
        };
        let key = k.trim().replace('_', "-");
        let value = v.trim().to_string();
        out.entry(key)
            .and_modify(|old| {
                old.push(',');
                old.push_str(&value);
            })
            .or_insert(value);
    }
    Ok(out)
}

pub struct Resolver {
    file: BTreeMap<String, String>,
    used: BTreeSet<String>,
    pub resolved: Vec<Resolved>,
}

fn bad_value(key: &str, raw: &str, err: impl Display) -> Error {
    Error::Config {
        field: key.into(),
        msg: format!("cannot parse {raw:?}: {err}"),
    }
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> Result<Self> {
        let file = match config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self {
            file,
            used: BTreeSet::new(),
            resolved: Vec::new(),
        })
    }

    fn record(&mut self, key: &str, value: String, source: Source) {
        self.resolved.push(Resolved {
            key: key.into(),
            value,
            source,
        });
    }

    fn file_value<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.used.insert(key.into());
        match self.file.get(key) {
            Some(raw) => raw.parse().map(Some).map_err(|e| bad_value(key, raw, e)),
            None => Ok(None),
        }
    }

    pub fn value<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        let file = self.file_value(key)?;
        let (v, src) = match (flag, file) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(v)) => (v, Source::File),
            (None, None) => (default, Source::Default),
        };
        self.record(key, v.to_string(), src);
        Ok(v)
    }

    pub fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        let file = self.file_value(key)?;
        let (v, src) = match (flag, file) {
            (Some(v), _) => (Some(v), Source::Flag),
            (None, Some(v)) => (Some(v), Source::File),
            (None, None) => (None, Source::Default),
        };
        if let Some(v) = &v {
            self.record(key, v.to_string(), src);
        }
        Ok(v)
    }

    pub fn path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>> {
        self.used.insert(key.into());
        let (v, src) = match (flag, self.file.get(key)) {
            (Some(v), _) => (Some(v), Source::Flag),
            (None, Some(raw)) => (Some(PathBuf::from(raw)), Source::File),
            (None, None) => (None, Source::Default),
        };
        if let Some(v) = &v {
            self.record(key, v.display().to_string(), src);
        }
        Ok(v)
    }

    /// A repeatable flag; the file form is a comma-separated list.
    pub fn list<T: FromStr + Display>(&mut self, key: &str, flag: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        self.used.insert(key.into());
        let (v, src) = if !flag.is_empty() {
            (flag, Source::Flag)
        } else if let Some(raw) = self.file.get(key) {
            let parsed = raw
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<T>().map_err(|e| bad_value(key, s, e)))
                .collect::<Result<Vec<T>>>()?;
            (parsed, Source::File)
        } else {
            (Vec::new(), Source::Default)
        };
        let text = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        self.record(key, text, src);
        Ok(v)
    }

    /// A presence flag that the file can also switch on.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        let file: Option<bool> = self.file_value(key)?;
        let (v, src) = match (flag, file) {
            (true, _) => (true, Source::Flag),
            (false, Some(v)) => (v, Source::File),
            (false, None) => (false, Source::Default),
        };
        self.record(key, v.to_string(), src);
        Ok(v)
    }

    /// Rejects config-file keys nobody asked for.
    pub fn finish(&self) -> Result<()> {
        match self.file.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(Error::Config {
                field: k.clone(),
                msg: "unknown key in config file".into(),
            }),
            None => Ok(()),
        }
    }

    /// `key=value` lines that replay this resolution through `--config`.
    pub fn to_config_text(&self) -> String {
        self.resolved
            .iter()
            .filter(|r| !r.value.is_empty())
            .map(|r| format!("{}={}\n", r.key, r.value))
            .collect()
    }

    /// One line per value to stderr, marking those that fell back to
    /// defaults.
    pub fn echo(&self) {
        for r in &self.resolved {
            let note = match r.source {
                Source::Flag => "",
                Source::File => " (config file)",
                Source::Default => " (default)",
            };
            eprintln!("{} = {}{note}", r.key, r.value);
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub config: Vec<Resolved>,
    /// Path → SHA-256 of every input file read.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, resolver: &Resolver) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config: resolver.resolved.clone(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let digest = hex::encode(Sha256::digest(&bytes));
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    /// Writes `manifest.json` and the replayable `resolved.conf`.
    pub fn write(&mut self, dir: &Path, resolver: &Resolver) -> Result<()> {
        let conf = dir.join("resolved.conf");
        fs::write(&conf, resolver.to_config_text()).map_err(|e| Error::io(&conf, e))?;
        self.outputs.push("resolved.conf".into());
        self.outputs.sort();
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_parsing() {
        let c = parse_config("# comment\nk = 7\nalpha_hat=100 # trailing\nknown-class=3\nknown-class=5\n").unwrap();
        assert_eq!(c["k"], "7");
        assert_eq!(c["alpha-hat"], "100");
        assert_eq!(c["known-class"], "3,5");
        assert!(parse_config("novalue\n").is_err());
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.conf");
        fs::write(&p, "k=7\nsigma=2\nknown-class=1,2\n").unwrap();
        let mut r = Resolver::new(Some(&p)).unwrap();
        assert_eq!(r.value("k", Some(3usize), 12).unwrap(), 3);
        assert_eq!(r.value("sigma", None, 1.0).unwrap(), 2.0);
        assert_eq!(r.value("m", None, 50usize).unwrap(), 50);
        assert_eq!(r.list::<i64>("known-class", vec![]).unwrap(), vec![1, 2]);
        r.finish().unwrap();
        let sources: Vec<Source> = r.resolved.iter().map(|x| x.source).collect();
        assert_eq!(sources, vec![Source::Flag, Source::File, Source::Default, Source::File]);
        assert!(r.to_config_text().contains("sigma=2\n"));
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.conf");
        fs::write(&p, "kk=7\n").unwrap();
        let r = Resolver::new(Some(&p)).unwrap();
        assert!(matches!(r.finish(), Err(Error::Config { field, .. }) if field == "kk"));
        fs::write(&p, "k=seven\n").unwrap();
        let mut r = Resolver::new(Some(&p)).unwrap();
        assert!(matches!(r.value("k", None, 1usize), Err(Error::Config { .. })));
    }
}
