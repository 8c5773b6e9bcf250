//! Artifact files. Every file is written to a temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nmdis_core::spectral::Spectrum;

use crate::config::{Format, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::scenario::{fmt_num, ScenarioOutput, ScenarioReport, SeriesTable};

pub fn series_path(cfg: &ScenarioConfig) -> PathBuf {
    artifact(cfg, "series.csv")
}

pub fn spectrum_path(cfg: &ScenarioConfig) -> PathBuf {
    artifact(cfg, "spectrum.csv")
}

pub fn report_path(cfg: &ScenarioConfig) -> PathBuf {
    artifact(cfg, "report.json")
}

fn artifact(cfg: &ScenarioConfig, suffix: &str) -> PathBuf {
    cfg.output
        .directory
        .join(format!("{}_{suffix}", cfg.scenario.as_str()))
}

pub fn series_csv(table: &SeriesTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::io("<csv buffer>", e.into_error()))
}

/// Columns f, re, im, power, plus omega = 2πf when `angular` is set.
pub fn spectrum_csv(spec: &Spectrum, angular: bool) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["f", "re", "im", "power"];
    if angular {
        header.push("omega");
    }
    w.write_record(&header).map_err(csv_err)?;
    for ((f, z), p) in spec.frequencies.iter().zip(&spec.amplitudes).zip(&spec.power) {
        let mut row = vec![fmt_num(*f), fmt_num(z.re), fmt_num(z.im), fmt_num(*p)];
        if angular {
            row.push(fmt_num(2.0 * std::f64::consts::PI * f));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::io("<csv buffer>", e.into_error()))
}

pub fn report_json(report: &ScenarioReport) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(report)
        .map_err(|e| CliError::io("<json buffer>", std::io::Error::other(e)))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::io("<csv buffer>", std::io::Error::other(e))
}

/// Write `bytes` to a temporary file next to `path`, then rename over it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

/// Write every artifact requested by the config; returns the paths written.
pub fn write_outputs(cfg: &ScenarioConfig, out: &ScenarioOutput) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if cfg.output.formats.contains(&Format::Csv) {
        let p = series_path(cfg);
        write_atomic(&p, &series_csv(&out.series)?)?;
        written.push(p);
        if let Some(spec) = &out.spectrum {
            let p = spectrum_path(cfg);
            write_atomic(&p, &spectrum_csv(spec, cfg.spectral.angular_display)?)?;
            written.push(p);
        }
    }
    if cfg.output.formats.contains(&Format::Json) {
        let p = report_path(cfg);
        write_atomic(&p, &report_json(&out.report)?)?;
        written.push(p);
    }
    Ok(written)
}
