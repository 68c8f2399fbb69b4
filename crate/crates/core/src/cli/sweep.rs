use super::config::RunConfig;
use super::Emission;
use crate::error::{Error, Result};
use crate::output::{write_csv, Cell, Format, Table};
use rayon::prelude::*;
use std::path::Path;

/// One swept key and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

pub fn parse_axis(spec: &str) -> Result<Axis> {
    let (key, values) = spec.split_once('=').ok_or_else(|| {
        Error::Config(format!(
            "sweep axis '{spec}' is not of the form KEY=V1,V2,..."
        ))
    })?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
    if key.trim().is_empty() || values.iter().any(|v| v.is_empty()) {
        return Err(Error::Config(format!("malformed sweep axis '{spec}'")));
    }
    Ok(Axis {
        key: key.trim().to_string(),
        values,
    })
}

/// All combinations, first axis slowest.
pub fn cartesian(axes: &[Axis]) -> Vec<Vec<String>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect()
    })
}

/// Runs every point of the sweep concurrently, writes one file per point
/// and `index.csv`, and returns the worst exit status.
pub fn run<P, W>(base: &RunConfig, vary: &[String], point: P, write: W) -> Result<i32>
where
    P: Fn(&[String]) -> Result<(RunConfig, Emission)> + Sync,
    W: Fn(&Emission, &RunConfig, &Path) -> Result<()> + Sync,
{
    let dir = base
        .output
        .path
        .clone()
        .ok_or_else(|| Error::Config("sweep needs --out DIR".into()))?;
    std::fs::create_dir_all(&dir)?;
    let axes = vary
        .iter()
        .map(|s| parse_axis(s))
        .collect::<Result<Vec<_>>>()?;
    let points = cartesian(&axes);
    let ext = match base.output.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let outcomes: Vec<(String, String, i32)> = points
        .par_iter()
        .enumerate()
        .map(|(i, values)| {
            let overrides: Vec<String> = axes
                .iter()
                .zip(values)
                .map(|(a, v)| format!("{}={v}", a.key))
                .collect();
            let file = format!("point_{i:04}.{ext}");
            let result = point(&overrides).and_then(|(cfg, e)| {
                write(&e, &cfg, &dir.join(&file))?;
                std::fs::write(dir.join(format!("point_{i:04}.toml")), cfg.to_toml()?)?;
                Ok(e)
            });
            match result {
                Ok(e) => match e.tolerance_failure {
                    Some(msg) => (file, format!("tolerance: {msg}"), 2),
                    None => (file, "ok".into(), 0),
                },
                Err(err) => (String::new(), format!("error: {err}"), err.exit_code()),
            }
        })
        .collect();
    let mut columns = vec!["point".to_string()];
    columns.extend(axes.iter().map(|a| a.key.clone()));
    columns.extend(["file".to_string(), "status".to_string()]);
    let mut index = Table {
        columns,
        rows: Vec::new(),
    };
    for (i, (values, (file, status, _))) in points.iter().zip(&outcomes).enumerate() {
        let mut row: Vec<Cell> = vec![i.into()];
        row.extend(values.iter().map(|v| Cell::from(v.as_str())));
        row.extend([Cell::from(file.as_str()), Cell::from(status.as_str())]);
        index.push(row);
    }
    let mut buf = Vec::new();
    write_csv(&index, base.output.precision, &mut buf)?;
    std::fs::write(dir.join("index.csv"), buf)?;
    // errors dominate tolerance failures
    let worst = outcomes
        .iter()
        .map(|o| o.2)
        .fold(0, |acc, c| match (acc, c) {
            (1, _) | (_, 1) => 1,
            (a, b) => a.max(b),
        });
    Ok(worst)
}
