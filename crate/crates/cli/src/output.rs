use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::experiments::RunOutput;
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Writes `<experiment>.csv` and `manifest.json` into `dir`. The CSV holds
/// only deterministic values; timings live in the manifest.
pub fn write_outputs(dir: &Path, out: &RunOutput, wall_seconds: f64, threads: usize) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let csv_name = format!("{}.csv", out.resolved.experiment);
    let csv_path = dir.join(&csv_name);
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    w.write_record(&out.table.header).map_err(csv_err)?;
    for row in &out.table.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;

    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": out.resolved.experiment,
        "csv": csv_name,
        "columns": out.table.header,
        "spec": out.resolved,
        "derived": Value::Object(out.derived.clone()),
        "threads": threads,
        "wall_time_seconds": wall_seconds,
        "point_wall_time_seconds": out.point_wall_times,
        "warnings": out.warnings,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest is plain data");
    fs::write(dir.join(MANIFEST), text + "\n")?;
    Ok(csv_path)
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io(io),
        other => CliError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}
