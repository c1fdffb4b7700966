//! Configuration, presets and output handling for the `infolat` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;

use std::path::{Path, PathBuf};

use config::{merge_tables, parse_table, ExperimentConfig, Task};
use error::{CliError, CliResult};
use output::{Manifest, OutputEntry, MANIFEST_SCHEMA_VERSION};

/// A fully resolved invocation.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub task: Task,
    pub preset: Option<String>,
    pub config: ExperimentConfig,
}

/// Merges the preset (if any) with the config file (if any) and decides the
/// task: the command line wins over the config file, which wins over the
/// preset's default.
pub fn resolve(task: Option<Task>, config: Option<&Path>, preset: Option<&str>) -> CliResult<Invocation> {
    let mut table = toml::Table::new();
    let mut preset_task = None;
    if let Some(name) = preset {
        let p = presets::find(name).ok_or_else(|| CliError::Config(format!("unknown preset {name:?}")))?;
        table = parse_table(&p.toml, &p.name)?;
        preset_task = Some(p.task);
    }
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            context: format!("reading {}", path.display()),
            source,
        })?;
        merge_tables(&mut table, parse_table(&text, &path.display().to_string())?);
    }
    if config.is_none() && preset.is_none() {
        return Err(CliError::Config("give --config, --preset or both".into()));
    }
    let mut cfg = ExperimentConfig::from_table(table)?;
    let task = task
        .or(cfg.task)
        .or(preset_task)
        .ok_or_else(|| CliError::Config("no task given on the command line, in the config or by a preset".into()))?;
    cfg.task = Some(task);
    Ok(Invocation {
        task,
        preset: preset.map(str::to_string),
        config: cfg,
    })
}

/// Runs an invocation and writes its tables and manifest into `out`.
pub fn execute(inv: &Invocation, out: &Path) -> CliResult<Manifest> {
    let result = run::run(inv.task, &inv.config)?;
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool: "infolat",
        version: env!("CARGO_PKG_VERSION"),
        task: inv.task.name(),
        preset: inv.preset.clone(),
        config: serde_json::to_value(&inv.config).map_err(|e| CliError::Config(e.to_string()))?,
        outputs: result
            .tables
            .iter()
            .map(|t| OutputEntry {
                file: t.file_name(),
                columns: t.header.clone(),
                rows: t.rows.len(),
            })
            .collect(),
        warnings: result.warnings.clone(),
    };
    output::write_outputs(out, &result.tables, &manifest)?;
    Ok(manifest)
}

pub fn default_out_dir(inv: &Invocation) -> PathBuf {
    PathBuf::from("out").join(inv.preset.clone().unwrap_or_else(|| inv.task.name().to_string()))
}
