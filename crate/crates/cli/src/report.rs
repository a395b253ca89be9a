//! Writes the artifacts of a run: one CSV per table, `ledger.csv` when the
//! theory constants were computed, `summary.txt` and `manifest.toml`.
//!
//! The manifest is the effective configuration with an extra `[manifest]`
//! table, so it can be passed back to the runner to repeat the run.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use varifold_core::table::number;

use crate::config::ExperimentConfig;
use crate::experiments::Outcome;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub config_sha256: String,
    /// `(file name, sha256)` of every CSV written.
    pub outputs: Vec<(String, String)>,
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical effective configuration.
pub fn config_hash(config: &ExperimentConfig) -> String {
    sha256(config.to_toml().as_bytes())
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), contents)
        .map_err(|e| CliError::Config(format!("{}: {e}", dir.join(name).display())))
}

pub fn summary_text(config: &ExperimentConfig, outcome: &Outcome, hash: &str) -> String {
    let mut s = format!("kind: {}\nseed: {}\nconfig sha256: {hash}\nversion: {VERSION}\n", config.kind.name(), config.seed);
    if let Some(g) = &outcome.gamma {
        s += &format!("gamma: {} ({} bound)\n", number(g.gamma), g.binding.name());
    }
    for c in &outcome.checks {
        s += &c.line();
        s.push('\n');
    }
    for n in &outcome.notes {
        s += &format!("note: {n}\n");
    }
    s += if outcome.passed() { "overall: PASS\n" } else { "overall: FAIL\n" };
    s
}

/// Writes every artifact of `outcome` into `dir`, creating it if needed.
pub fn write_outputs(config: &ExperimentConfig, outcome: &Outcome, dir: &Path) -> Result<Manifest, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
    let hash = config_hash(config);
    let mut outputs = Vec::new();
    let mut tables: Vec<(String, String)> = outcome
        .tables
        .iter()
        .map(|(stem, t)| (format!("{stem}.csv"), t.to_csv_string()))
        .collect();
    if let Some(ledger) = &outcome.ledger {
        tables.push(("ledger.csv".into(), ledger.to_table().to_csv_string()));
    }
    for (name, csv) in &tables {
        write(dir, name, csv)?;
        outputs.push((name.clone(), sha256(csv.as_bytes())));
    }
    write(dir, "summary.txt", &summary_text(config, outcome, &hash))?;

    let mut doc = toml::Table::try_from(config).map_err(|e| CliError::Config(e.to_string()))?;
    let mut m = toml::Table::new();
    m.insert("version".into(), VERSION.into());
    m.insert("config_sha256".into(), hash.clone().into());
    m.insert("seed".into(), toml::Value::Integer(config.seed as i64));
    let mut files = toml::Table::new();
    for (name, digest) in &outputs {
        files.insert(name.clone(), digest.clone().into());
    }
    m.insert("outputs".into(), files.into());
    if let Some(ledger) = &outcome.ledger {
        let mut constants = toml::Table::new();
        for (name, value) in ledger.entries() {
            constants.insert(name.into(), number(value).into());
        }
        m.insert("ledger".into(), constants.into());
    }
    doc.insert("manifest".into(), m.into());
    write(dir, "manifest.toml", &doc.to_string())?;
    Ok(Manifest {
        config_sha256: hash,
        outputs,
    })
}
