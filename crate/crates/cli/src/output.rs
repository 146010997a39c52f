//! Writes a [`SeriesDocument`] as JSON (file or stdout) or as CSV files.
//!
//! CSV output is one `x,value` file per series plus `<stem>.meta.json`, which
//! carries labels, kinds, meta blocks and the file name of each series. With a
//! single series the CSV goes to `--out` itself; with several, series `i` goes
//! to `<stem>-<i>.csv` next to it.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sparse_ula::{SeriesDocument, SeriesKind};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    command: &'a str,
    meta: &'a Map<String, Value>,
    series: Vec<SidecarEntry<'a>>,
}

#[derive(Debug, Serialize)]
struct SidecarEntry<'a> {
    label: &'a str,
    kind: SeriesKind,
    file: String,
    meta: &'a Map<String, Value>,
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn csv_paths(out: &Path, count: usize) -> Vec<PathBuf> {
    if count == 1 {
        return vec![out.to_path_buf()];
    }
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
    (0..count).map(|i| out.with_file_name(format!("{stem}-{i}.csv"))).collect()
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
    out.with_file_name(format!("{stem}.meta.json"))
}

pub fn write(doc: &SeriesDocument, cfg: &RunConfig) -> CliResult<()> {
    match (&cfg.out, cfg.format) {
        (None, _) => {
            let text = doc.to_json()?;
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
        (Some(path), Format::Json) => {
            doc.write_json(path)?;
            log::info!("wrote {}", path.display());
            Ok(())
        }
        (Some(path), Format::Csv) => write_csv(doc, path),
    }
}

fn write_csv(doc: &SeriesDocument, out: &Path) -> CliResult<()> {
    let paths = csv_paths(out, doc.series.len());
    let mut entries = Vec::with_capacity(paths.len());
    for (series, path) in doc.series.iter().zip(&paths) {
        series.write_csv(path)?;
        entries.push(SidecarEntry {
            label: &series.label,
            kind: series.kind,
            file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            meta: &series.meta,
        });
    }
    let sidecar = Sidecar {
        schema_version: doc.schema_version,
        command: &doc.command,
        meta: &doc.meta,
        series: entries,
    };
    let meta_path = sidecar_path(out);
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| io(&meta_path, e))?;
    fs::write(&meta_path, text).map_err(|e| io(&meta_path, e))?;
    log::info!("wrote {} CSV file(s) and {}", paths.len(), meta_path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_naming() {
        let out = Path::new("/tmp/x/run.csv");
        assert_eq!(csv_paths(out, 1), vec![PathBuf::from("/tmp/x/run.csv")]);
        assert_eq!(
            csv_paths(out, 2),
            vec![PathBuf::from("/tmp/x/run-0.csv"), PathBuf::from("/tmp/x/run-1.csv")]
        );
        assert_eq!(sidecar_path(out), PathBuf::from("/tmp/x/run.meta.json"));
    }
}
