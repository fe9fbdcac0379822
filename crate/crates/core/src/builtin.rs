//! Built-in example spaces.
//!
//! Each builder produces a cloud plus a four-level exhaustion. The levels of
//! the grid families are nested open boxes `(1/4,3/4)`, `(1/8,7/8)`,
//! `(1/16,15/16)` and the full domain; the enlargement radius of a level is
//! half the gap to the next box, expressed in quasi-distance units. The
//! quasi-triangle constant is analytic (`1` for Euclidean, `2^(s-1)` for the
//! power distance); the doubling constant is measured exhaustively on the
//! finished cloud and declared with 25% headroom.

use crate::axioms::measured_doubling_exhaustive;
use crate::error::{invalid, Result};
use crate::set::{PointId, PointSet};
use crate::space::{Level, LocalStructure, PointCloud, Rho, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightProfile {
    /// `w_i` proportional to `1 + x_i`.
    Linear,
    /// Unit weight left of `x = 1/2`, double weight from there on.
    StepDouble,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Builtin {
    /// `n` cell centers of the unit interval, uniform weights.
    Grid1d { n: usize },
    /// `nx * ny` cell centers of the unit square, uniform weights.
    Grid2d { nx: usize, ny: usize },
    /// 1-d grid with `rho = |x - y|^s`, `s >= 1`.
    PowerRhoGrid { n: usize, exponent: f64 },
    /// 1-d grid with a nonuniform weight profile.
    WeightedGrid { n: usize, profile: WeightProfile },
    /// Four points 0.1/0.3/0.5/0.7 with weights 0.1/0.2/0.3/0.4.
    Tiny4,
}

/// The open sub-boxes generating the level chain of the grid families, as
/// `(lo, hi)` per axis, identical on every axis.
const LEVEL_BOXES: [(f64, f64); 4] = [
    (0.25, 0.75),
    (0.125, 0.875),
    (0.0625, 0.9375),
    (0.0, 1.0),
];

/// Coordinate gap between consecutive level boxes (last repeats; the top
/// level's enlargement axiom is vacuous for a finite cloud).
const LEVEL_MARGINS: [f64; 4] = [0.125, 0.0625, 0.0625, 0.0625];

fn grid_coords_1d(n: usize) -> Vec<f64> {
    (0..n).map(|i| (2 * i + 1) as f64 / (2 * n) as f64).collect()
}

fn box_members_1d(coords: &[f64], lo: f64, hi: f64) -> PointSet {
    coords
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > lo && x < hi)
        .map(|(i, _)| i)
        .collect()
}

fn box_members_2d(coords: &[f64], lo: f64, hi: f64) -> PointSet {
    coords
        .chunks(2)
        .enumerate()
        .filter(|(_, xy)| xy.iter().all(|&v| v > lo && v < hi))
        .map(|(i, _)| i)
        .collect()
}

/// Replaces the provisional doubling constants with measured values plus 25%
/// headroom, re-validating the space.
fn calibrate_doubling(cloud: PointCloud, mut structure: LocalStructure) -> Result<Space> {
    let provisional = Space::new(cloud.clone(), structure.clone())?.with_dense_cache();
    let mut c_floor = 1.25f64;
    for n in 1..=structure.levels.len() {
        let measured = measured_doubling_exhaustive(&provisional, n)?;
        // keep the declared chain nondecreasing
        c_floor = c_floor.max(1.25 * measured);
        structure.levels[n - 1].c = c_floor;
    }
    Space::new(cloud, structure)
}

fn grid_levels(
    members: impl Fn(f64, f64) -> PointSet,
    eps_of_margin: impl Fn(f64) -> f64,
    b: f64,
) -> Result<Vec<Level>> {
    let mut levels = Vec::with_capacity(4);
    let mut eps_prev = f64::INFINITY;
    for (i, (lo, hi)) in LEVEL_BOXES.iter().enumerate() {
        let ms = members(*lo, *hi);
        if ms.is_empty() {
            return Err(invalid(format!(
                "grid too coarse: level {} box ({lo}, {hi}) holds no points",
                i + 1
            )));
        }
        let eps = eps_of_margin(LEVEL_MARGINS[i]).min(eps_prev);
        eps_prev = eps;
        levels.push(Level {
            members: ms,
            eps,
            b,
            c: 2.0, // provisional, replaced by the measured pre-pass
        });
    }
    Ok(levels)
}

/// Builds one of the example spaces. The result always passes
/// `verify_axioms` with its declared constants.
pub fn instantiate(which: &Builtin) -> Result<Space> {
    match which {
        Builtin::Grid1d { n } => {
            let coords = grid_coords_1d(*n);
            let weights = vec![1.0 / *n as f64; *n];
            let cloud = PointCloud::new(1, coords.clone(), weights)?;
            let levels = grid_levels(|lo, hi| box_members_1d(&coords, lo, hi), |m| m / 2.0, 1.0)?;
            calibrate_doubling(cloud, LocalStructure { rho: Rho::Euclidean, levels })
        }
        Builtin::Grid2d { nx, ny } => {
            let xs = grid_coords_1d(*nx);
            let ys = grid_coords_1d(*ny);
            let mut coords = Vec::with_capacity(nx * ny * 2);
            for y in &ys {
                for x in &xs {
                    coords.push(*x);
                    coords.push(*y);
                }
            }
            let weights = vec![1.0 / (nx * ny) as f64; nx * ny];
            let cloud = PointCloud::new(2, coords.clone(), weights)?;
            let levels = grid_levels(|lo, hi| box_members_2d(&coords, lo, hi), |m| m / 2.0, 1.0)?;
            calibrate_doubling(cloud, LocalStructure { rho: Rho::Euclidean, levels })
        }
        Builtin::PowerRhoGrid { n, exponent } => {
            let rho = Rho::PowerEuclidean { exponent: *exponent };
            rho.validate()?;
            let coords = grid_coords_1d(*n);
            let weights = vec![1.0 / *n as f64; *n];
            let cloud = PointCloud::new(1, coords.clone(), weights)?;
            let b = rho.triangle_constant();
            let s = *exponent;
            let levels = grid_levels(
                |lo, hi| box_members_1d(&coords, lo, hi),
                |m| m.powf(s) / 2.0,
                b,
            )?;
            calibrate_doubling(cloud, LocalStructure { rho, levels })
        }
        Builtin::WeightedGrid { n, profile } => {
            let coords = grid_coords_1d(*n);
            let raw: Vec<f64> = coords
                .iter()
                .map(|&x| match profile {
                    WeightProfile::Linear => 1.0 + x,
                    WeightProfile::StepDouble => {
                        if x < 0.5 {
                            1.0
                        } else {
                            2.0
                        }
                    }
                })
                .collect();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let cloud = PointCloud::new(1, coords.clone(), weights)?;
            let levels = grid_levels(|lo, hi| box_members_1d(&coords, lo, hi), |m| m / 2.0, 1.0)?;
            calibrate_doubling(cloud, LocalStructure { rho: Rho::Euclidean, levels })
        }
        Builtin::Tiny4 => {
            let coords = vec![0.1, 0.3, 0.5, 0.7];
            let weights = vec![0.1, 0.2, 0.3, 0.4];
            let cloud = PointCloud::new(1, coords, weights)?;
            let inner: PointSet = [1usize, 2].into_iter().collect();
            let all = PointSet::universe(4);
            let mut levels = Vec::new();
            for i in 0..4 {
                levels.push(Level {
                    members: if i == 0 { inner.clone() } else { all.clone() },
                    eps: 0.1,
                    b: 1.0,
                    c: 2.0,
                });
            }
            calibrate_doubling(cloud, LocalStructure { rho: Rho::Euclidean, levels })
        }
    }
}

/// Canonical textual names accepted by config files and the CLI.
pub fn parse_spec(spec: &str) -> Result<Builtin> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["tiny4"] => Ok(Builtin::Tiny4),
        ["grid1d", n] => Ok(Builtin::Grid1d { n: parse_n(n)? }),
        ["grid2d", dims] => {
            let (nx, ny) = dims
                .split_once('x')
                .ok_or_else(|| invalid(format!("grid2d wants NXxNY, got {dims}")))?;
            Ok(Builtin::Grid2d {
                nx: parse_n(nx)?,
                ny: parse_n(ny)?,
            })
        }
        ["power", n, s] => Ok(Builtin::PowerRhoGrid {
            n: parse_n(n)?,
            exponent: s
                .parse()
                .map_err(|_| invalid(format!("bad exponent {s}")))?,
        }),
        ["weighted", n, profile] => {
            let profile = match *profile {
                "linear" => WeightProfile::Linear,
                "step" => WeightProfile::StepDouble,
                other => return Err(invalid(format!("unknown weight profile {other}"))),
            };
            Ok(Builtin::WeightedGrid { n: parse_n(n)?, profile })
        }
        _ => Err(invalid(format!(
            "unknown space spec '{spec}' (expected tiny4 | grid1d:N | grid2d:NXxNY | power:N:S | weighted:N:{{linear|step}})"
        ))),
    }
}

fn parse_n(s: &str) -> Result<usize> {
    s.parse().map_err(|_| invalid(format!("bad point count {s}")))
}

/// Id of the grid point nearest to the given coordinates (helper for tests
/// and function builders).
pub fn nearest_id(space: &Space, coords: &[f64]) -> PointId {
    space.nearest_point(coords).expect("dimension mismatch")
}
