use std::fmt;
use std::path::{Path, PathBuf};

use randpoly::experiments::ExperimentConfig;
use randpoly::geometry::Point;
use randpoly::Error;
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Input(String),
    Degenerate(String),
    Capacity(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Input(_) => 4,
            CliError::Degenerate(_) => 5,
            CliError::Capacity(_) => 6,
            CliError::Data(_) => 7,
            CliError::Internal(_) => 8,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m)
            | CliError::Input(m)
            | CliError::Degenerate(m)
            | CliError::Capacity(m)
            | CliError::Data(m)
            | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Config(_) | Error::InvalidArgument(_) => CliError::Config(msg),
            Error::Io(_) => CliError::Input(msg),
            Error::DimensionMismatch { .. }
            | Error::NonFinite(_)
            | Error::GeneralPosition { .. }
            | Error::NotOnBoundary { .. } => CliError::Degenerate(msg),
            Error::Capacity(_) => CliError::Capacity(msg),
            Error::InsufficientData(_) => CliError::Data(msg),
            Error::Invariant(_) => CliError::Internal(msg),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Parses a point file; `dim` checks the row length when given.
pub fn read_points(path: &str, dim: Option<usize>) -> CliResult<(usize, Vec<Point>)> {
    let path = Path::new(path);
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut points = Vec::new();
    let mut d = dim;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| io_err(path, format!("line {}: {e}", lineno + 1)))?;
        match d {
            None => d = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(io_err(
                    path,
                    format!("line {}: expected {d} coordinates, found {}", lineno + 1, coords.len()),
                ))
            }
            _ => {}
        }
        let index = points.len();
        points.push(Point {
            coords,
            index: Some(index),
        });
    }
    let Some(d) = d.filter(|_| !points.is_empty()) else {
        return Err(io_err(path, "no points"));
    };
    Ok((d, points))
}

/// Formats `(a, b, c)`.
pub fn tuple(xs: &[u64]) -> String {
    let parts: Vec<String> = xs.iter().map(u64::to_string).collect();
    format!("({})", parts.join(", "))
}

pub struct OutDir {
    pub path: PathBuf,
    artifacts: Vec<String>,
}

impl OutDir {
    pub fn create(path: &str) -> CliResult<Self> {
        let path = PathBuf::from(path);
        std::fs::create_dir_all(&path).map_err(|e| io_err(&path, e))?;
        Ok(OutDir {
            path,
            artifacts: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> CliResult {
        let p = self.path.join(name);
        std::fs::write(&p, contents).map_err(|e| io_err(&p, e))?;
        self.record(name);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn record(&mut self, name: &str) {
        if !self.artifacts.iter().any(|a| a == name) {
            self.artifacts.push(name.to_string());
        }
    }

    pub fn finish(mut self, manifest: Manifest) -> CliResult {
        let m = ManifestFile {
            tool: "randpoly",
            version: env!("CARGO_PKG_VERSION"),
            command: manifest.command,
            master_seed: manifest.config.as_ref().map(|c| c.master_seed.to_string()),
            config: manifest.config,
            inputs: manifest.inputs,
            params: manifest.params,
            artifacts: std::mem::take(&mut self.artifacts),
        };
        self.write_json("manifest.json", &m)
    }
}

/// Run description recorded next to the outputs.
pub struct Manifest {
    pub command: &'static str,
    pub config: Option<ExperimentConfig>,
    pub inputs: Vec<String>,
    pub params: serde_json::Value,
}

#[derive(Serialize)]
struct ManifestFile {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    master_seed: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<ExperimentConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    inputs: Vec<String>,
    params: serde_json::Value,
    artifacts: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pts.txt");
        std::fs::write(&p, "# comment\n0 0 1\n\n1 0 0\n").unwrap();
        let (d, pts) = read_points(p.to_str().unwrap(), None).unwrap();
        assert_eq!(d, 3);
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].coords, vec![1.0, 0.0, 0.0]);
        std::fs::write(&p, "0 0 1\n1 0\n").unwrap();
        assert!(matches!(read_points(p.to_str().unwrap(), None), Err(CliError::Input(_))));
        std::fs::write(&p, "0 x 1\n").unwrap();
        assert!(matches!(read_points(p.to_str().unwrap(), None), Err(CliError::Input(_))));
        assert!(matches!(read_points("/nonexistent/pts", None), Err(CliError::Input(_))));
    }

    #[test]
    fn error_codes_are_distinct() {
        let errs = [
            CliError::from(Error::Config(String::new())),
            CliError::from(Error::Io(String::new())),
            CliError::from(Error::GeneralPosition { indices: vec![], reason: String::new() }),
            CliError::from(Error::Capacity(String::new())),
            CliError::from(Error::InsufficientData(String::new())),
            CliError::from(Error::Invariant(String::new())),
        ];
        let mut codes: Vec<u8> = errs.iter().map(CliError::code).collect();
        codes.push(2);
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), 7);
    }

    #[test]
    fn tuple_format() {
        assert_eq!(tuple(&[5, 9, 6]), "(5, 9, 6)");
    }
}
