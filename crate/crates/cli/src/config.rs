//! TOML configuration files.

use std::path::Path;

use derivkit::expr::SymbolTable;
use derivkit::gen::GenConfig;
use derivkit::perturb::GreekPool;
use serde::de::DeserializeOwned;

use crate::error::CliError;
use crate::io::read_text;

pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    toml::from_str(&text).map_err(|e| CliError::config(path, e.message()))
}

/// Generation settings from an optional TOML file. A relative vocabulary
/// path is taken relative to the file.
pub fn load_gen_config(path: Option<&Path>) -> Result<GenConfig, CliError> {
    let Some(path) = path else {
        return Ok(GenConfig::default());
    };
    let mut cfg: GenConfig = load_toml(path)?;
    if let (Some(v), Some(dir)) = (&cfg.vocabulary, path.parent()) {
        if v.is_relative() {
            cfg.vocabulary = Some(dir.join(v));
        }
    }
    cfg.validate().map_err(|e| CliError::config(path, e))?;
    Ok(cfg)
}

/// Symbol table for `cfg`, with the letters of `pool` made renderable.
pub fn load_table(cfg: &GenConfig, pool: Option<&GreekPool>) -> Result<SymbolTable, CliError> {
    let mut table = match &cfg.vocabulary {
        Some(p) => SymbolTable::from_file(p).map_err(|e| CliError::config(p, e))?,
        None => SymbolTable::default(),
    };
    if let Some(pool) = pool {
        pool.register(&mut table).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(table)
}

/// Eleven whitespace-separated letters.
pub fn load_pool(path: Option<&Path>) -> Result<GreekPool, CliError> {
    let Some(path) = path else {
        return Ok(GreekPool::default());
    };
    let letters = read_text(path)?.split_whitespace().map(str::to_string).collect();
    GreekPool::new(letters).map_err(|e| CliError::config(path, e))
}
