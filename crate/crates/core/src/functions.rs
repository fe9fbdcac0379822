//! A small library of test functions, named and parameterized so that
//! experiment configurations can reference them textually and reproduce the
//! exact same samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::builtin::nearest_id;
use crate::error::{invalid, Result};
use crate::space::{SampledFunction, Space};

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FunctionSpec {
    Constant {
        c: f64,
    },
    /// 1 where the coordinate on `axis` is at least `threshold`, else 0.
    IndicatorHalfspace {
        axis: usize,
        threshold: f64,
    },
    /// `ln rho(x, anchor)`, clipped below at the log of the smallest
    /// positive distance in the cloud; the anchor is the nearest point to
    /// `coords`.
    LogSingularity {
        coords: Vec<f64>,
    },
    /// -1 below the threshold coordinate, +1 from there on.
    TwoValued {
        axis: usize,
        threshold: f64,
    },
    /// `value` at the point nearest to `coords`, 0 elsewhere.
    AtomSpike {
        coords: Vec<f64>,
        value: f64,
    },
    /// Piecewise constant over `pieces` contiguous id blocks, with values
    /// drawn uniformly from [-1, 1) by a seeded generator.
    RandomPiecewise {
        seed: u64,
        pieces: usize,
    },
}

/// Pads a parsed coordinate list to the cloud dimension by repeating the
/// last entry, so 1-d configs carry over to grids of any dimension.
fn broadcast(coords: &[f64], dim: usize) -> Result<Vec<f64>> {
    if coords.is_empty() || coords.len() > dim {
        return Err(invalid(format!(
            "anchor needs 1..={dim} coordinates, got {}",
            coords.len()
        )));
    }
    let mut out = coords.to_vec();
    while out.len() < dim {
        out.push(*coords.last().unwrap());
    }
    Ok(out)
}

pub fn sample(space: &Space, spec: &FunctionSpec) -> Result<SampledFunction> {
    let n = space.len();
    match spec {
        FunctionSpec::Constant { c } => Ok(SampledFunction::from_fn(n, |_| *c)),
        FunctionSpec::IndicatorHalfspace { axis, threshold } => {
            let dim = space.cloud().dim();
            if *axis >= dim {
                return Err(invalid(format!("axis {axis} out of range for dim {dim}")));
            }
            Ok(SampledFunction::from_fn(n, |i| {
                if space.cloud().coords(i)[*axis] >= *threshold {
                    1.0
                } else {
                    0.0
                }
            }))
        }
        FunctionSpec::LogSingularity { coords } => {
            let anchor = nearest_id(space, &broadcast(coords, space.cloud().dim())?);
            let floor = space.min_positive_distance().ln();
            Ok(SampledFunction::from_fn(n, |i| {
                if i == anchor {
                    floor
                } else {
                    space.rho(anchor, i).ln().max(floor)
                }
            }))
        }
        FunctionSpec::TwoValued { axis, threshold } => {
            let dim = space.cloud().dim();
            if *axis >= dim {
                return Err(invalid(format!("axis {axis} out of range for dim {dim}")));
            }
            Ok(SampledFunction::from_fn(n, |i| {
                if space.cloud().coords(i)[*axis] >= *threshold {
                    1.0
                } else {
                    -1.0
                }
            }))
        }
        FunctionSpec::AtomSpike { coords, value } => {
            let anchor = nearest_id(space, &broadcast(coords, space.cloud().dim())?);
            Ok(SampledFunction::from_fn(n, |i| {
                if i == anchor {
                    *value
                } else {
                    0.0
                }
            }))
        }
        FunctionSpec::RandomPiecewise { seed, pieces } => {
            if *pieces == 0 {
                return Err(invalid("piece count must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let values: Vec<f64> = (0..*pieces).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let pieces = *pieces;
            Ok(SampledFunction::from_fn(n, |i| {
                values[(i * pieces / n).min(pieces - 1)]
            }))
        }
    }
}

/// Textual form: `name[:arg[:arg..]]`, matching the variant names. Omitted
/// arguments fall back to centered anchors and unit values.
pub fn parse_spec(text: &str) -> Result<FunctionSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.parse().map_err(|_| invalid(format!("bad number {s}")))
    };
    match parts.as_slice() {
        ["constant"] => Ok(FunctionSpec::Constant { c: 1.0 }),
        ["constant", c] => Ok(FunctionSpec::Constant { c: num(c)? }),
        ["indicator_halfspace"] => Ok(FunctionSpec::IndicatorHalfspace {
            axis: 0,
            threshold: 0.5,
        }),
        ["indicator_halfspace", t] => Ok(FunctionSpec::IndicatorHalfspace {
            axis: 0,
            threshold: num(t)?,
        }),
        ["log_singularity"] => Ok(FunctionSpec::LogSingularity { coords: vec![0.5] }),
        ["log_singularity", x] => Ok(FunctionSpec::LogSingularity {
            coords: vec![num(x)?],
        }),
        ["two_valued"] => Ok(FunctionSpec::TwoValued {
            axis: 0,
            threshold: 0.5,
        }),
        ["two_valued", t] => Ok(FunctionSpec::TwoValued {
            axis: 0,
            threshold: num(t)?,
        }),
        ["atom_spike"] => Ok(FunctionSpec::AtomSpike {
            coords: vec![0.5],
            value: 1.0,
        }),
        ["atom_spike", x, v] => Ok(FunctionSpec::AtomSpike {
            coords: vec![num(x)?],
            value: num(v)?,
        }),
        ["random_piecewise", seed] => Ok(FunctionSpec::RandomPiecewise {
            seed: seed
                .parse()
                .map_err(|_| invalid(format!("bad seed {seed}")))?,
            pieces: 16,
        }),
        ["random_piecewise", seed, pieces] => Ok(FunctionSpec::RandomPiecewise {
            seed: seed
                .parse()
                .map_err(|_| invalid(format!("bad seed {seed}")))?,
            pieces: pieces
                .parse()
                .map_err(|_| invalid(format!("bad piece count {pieces}")))?,
        }),
        _ => Err(invalid(format!(
            "unknown function spec '{text}' (expected constant[:c] | indicator_halfspace[:t] | log_singularity[:x] | two_valued[:t] | atom_spike[:x:v] | random_piecewise:SEED[:PIECES])"
        ))),
    }
}
