//! Space and function loading: builtin textual specs or files on disk.

use std::fs;
use std::path::Path;

use lochom::error::Error;
use lochom::space::{Level, LocalStructure, PointCloud, Rho};
use lochom::{builtin, functions, Result, SampledFunction, Space};

/// On-disk space description; constructed through the same validating
/// constructors as the builtins, so a bad file fails with the usual
/// structural errors.
#[derive(serde::Deserialize)]
struct SpaceFile {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    /// Defaults to the Euclidean distance.
    rho: Option<Rho>,
    levels: Vec<LevelFile>,
}

#[derive(serde::Deserialize)]
struct LevelFile {
    members: Vec<usize>,
    eps: f64,
    b: f64,
    c: f64,
}

fn format_err(msg: String) -> Error {
    Error::Format(msg)
}

/// A spec is a file when it names one on disk; otherwise it must parse as a
/// builtin name.
pub fn load_space(spec: &str) -> Result<Space> {
    if Path::new(spec).is_file() {
        let text = fs::read_to_string(spec)?;
        let file: SpaceFile = serde_json::from_str(&text)
            .map_err(|e| format_err(format!("space file {spec}: {e}")))?;
        let cloud = PointCloud::new(file.dim, file.coords, file.weights)?;
        let levels = file
            .levels
            .into_iter()
            .map(|l| Level {
                members: l.members.into_iter().collect(),
                eps: l.eps,
                b: l.b,
                c: l.c,
            })
            .collect();
        return Space::new(
            cloud,
            LocalStructure {
                rho: file.rho.unwrap_or(Rho::Euclidean),
                levels,
            },
        );
    }
    builtin::instantiate(&builtin::parse_spec(spec)?)
}

/// Functions come from the builtin library or from a CSV file with one
/// value per point, in id order (`value` or `id,value` rows; a non-numeric
/// first row is treated as a header).
pub fn load_function(space: &Space, spec: &str) -> Result<SampledFunction> {
    if Path::new(spec).is_file() {
        let text = fs::read_to_string(spec)?;
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let cell = line.rsplit(',').next().unwrap_or(line).trim();
            match cell.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if i == 0 => continue,
                Err(_) => {
                    return Err(format_err(format!(
                        "function file {spec}: line {} is not a number: {line}",
                        i + 1
                    )))
                }
            }
        }
        if values.len() != space.len() {
            return Err(format_err(format!(
                "function file {spec}: {} values for {} points",
                values.len(),
                space.len()
            )));
        }
        return SampledFunction::from_values(values);
    }
    functions::sample(space, &functions::parse_spec(spec)?)
}
