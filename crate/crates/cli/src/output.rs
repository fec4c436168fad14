use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::{Global, Units};

#[derive(Serialize)]
pub struct Meta<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: Value,
    pub seed: u64,
    pub units: Units,
}

pub struct Reporter<'a> {
    pub global: &'a Global,
    pub command: &'a str,
    pub config: Value,
}

impl<'a> Reporter<'a> {
    pub fn new<C: Serialize>(global: &'a Global, command: &'a str, config: &C) -> Result<Self> {
        Ok(Self { global, command, config: serde_json::to_value(config)? })
    }

    pub fn meta(&self) -> Meta<'_> {
        Meta {
            tool: "jja",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: self.config.clone(),
            seed: self.global.seed,
            units: self.global.units,
        }
    }

    /// `{meta…, result}` as pretty JSON.
    pub fn envelope<T: Serialize>(&self, result: &T) -> Result<String> {
        let mut v = serde_json::to_value(self.meta())?;
        v["result"] = serde_json::to_value(result)?;
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }

    /// Data file with an embedded `meta` key.
    pub fn artifact<T: Serialize>(&self, data: &T) -> Result<String> {
        let mut v = serde_json::to_value(data)?;
        if let Value::Object(map) = &mut v {
            map.insert("meta".into(), serde_json::to_value(self.meta())?);
        }
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }

    fn dir(&self) -> Result<Option<PathBuf>> {
        match &self.global.out {
            Some(d) => {
                fs::create_dir_all(d).with_context(|| format!("creating output directory {}", d.display()))?;
                Ok(Some(d.clone()))
            }
            None => Ok(None),
        }
    }

    /// Writes `name` under `--out` when given.
    pub fn write_in_dir(&self, name: &str, contents: &str) -> Result<()> {
        if let Some(d) = self.dir()? {
            write(&d.join(name), contents)?;
        }
        Ok(())
    }

    /// Prints the envelope (`--json`) or just the result, and saves the
    /// envelope under `--out` as `<stem>.json`.
    pub fn report<T: Serialize>(&self, stem: &str, result: &T) -> Result<()> {
        let env = self.envelope(result)?;
        self.write_in_dir(&format!("{stem}.json"), &env)?;
        if self.global.json {
            print!("{env}");
        } else {
            let units = serde_json::to_value(self.global.units)?;
            println!("# jja {} {} (units: {}, seed: {})", env!("CARGO_PKG_VERSION"), self.command, units.as_str().unwrap_or_default(), self.global.seed);
            println!("{}", serde_json::to_string_pretty(result)?);
        }
        Ok(())
    }
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}
