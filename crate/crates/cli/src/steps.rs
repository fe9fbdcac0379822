//! One runner per pipeline operation. Each returns a [`Step`]: a canonical
//! JSON report, a pass flag, and optional flat artifacts (CSV tables, SVG
//! plots, DOT dumps) derived from the same data.

use serde::Serialize;
use serde_json::Value;

use lochom::axioms::{verify_axioms, AxiomOptions};
use lochom::bmo::{
    bmo_equiv_check, bmo_p_seminorm, bmo_seminorm, jn_construct, jn_radius_cap, jn_verify,
};
use lochom::covering::{family_seeded, finite_ball_cover, vitali_cover, BallSpec};
use lochom::cz::cz_family_properties;
use lochom::dyadic::{build_forest, verify_forest, DyadicForest};
use lochom::error::Error;
use lochom::fs::{corollary_ball_check, cover_lp_check, cover_test_family, fs_verify, SharpKind};
use lochom::io::{fmt_f64, svg_plot, CsvTable, PlotStyle, Series};
use lochom::maximal::{
    differentiation_check, local_maximal, strong_type_check, weak_type_check, RadiusGrid,
};
use lochom::num::geometric_grid;
use lochom::sharp::sharp_comparison_check;
use lochom::{Result, SampledFunction, Space};

pub struct Ctx {
    pub space: Space,
    pub f: SampledFunction,
    pub seed: u64,
}

pub enum Artifact {
    Csv(&'static str, CsvTable),
    Svg(&'static str, String),
    Dot(&'static str, String),
}

impl Artifact {
    pub fn file_name(&self, prefix: &str) -> String {
        match self {
            Artifact::Csv(tag, _) => format!("{prefix}_{tag}.csv"),
            Artifact::Svg(tag, _) => format!("{prefix}_{tag}.svg"),
            Artifact::Dot(tag, _) => format!("{prefix}_{tag}.dot"),
        }
    }

    pub fn contents(&self) -> String {
        match self {
            Artifact::Csv(_, table) => table.render(),
            Artifact::Svg(_, body) | Artifact::Dot(_, body) => body.clone(),
        }
    }
}

pub struct Step {
    pub name: &'static str,
    pub pass: bool,
    pub report: Value,
    pub artifacts: Vec<Artifact>,
}

fn to_value<T: Serialize>(name: &'static str, pass: bool, v: &T) -> Result<Step> {
    Ok(Step {
        name,
        pass,
        report: serde_json::to_value(v).map_err(|e| Error::Format(e.to_string()))?,
        artifacts: Vec::new(),
    })
}

pub fn run_axioms(ctx: &Ctx) -> Result<Step> {
    let opts = AxiomOptions {
        seed: ctx.seed,
        ..AxiomOptions::default()
    };
    let rep = verify_axioms(&ctx.space, &opts)?;
    to_value("axioms", rep.pass, &rep)
}

/// Builds a forest whose cubes partition level `n + 1` and finds the
/// coarsest generation fine enough to cover level `n`, deepening the forest
/// when no built generation is fine enough.
fn feasible_cover(
    space: &Space,
    n: usize,
    delta: f64,
    depth: usize,
) -> Result<(DyadicForest, lochom::covering::FiniteCoverReport)> {
    let mut depth = depth;
    loop {
        let forest = build_forest(space, n + 1, delta, depth)?;
        match finite_ball_cover(space, &forest, n, 0) {
            Ok(r) => return Ok((forest, r)),
            Err(Error::Scale {
                min_admissible: Some(k),
                ..
            }) => {
                let r = finite_ball_cover(space, &forest, n, k)?;
                return Ok((forest, r));
            }
            Err(Error::Scale {
                min_admissible: None,
                ..
            }) if depth < 24 => depth += 3,
            Err(e) => return Err(e),
        }
    }
}

#[derive(Serialize)]
struct CoverReport {
    vitali: lochom::covering::CoveringReport,
    finite: lochom::covering::FiniteCoverReport,
}

pub fn run_cover(ctx: &Ctx, level: usize, count: usize) -> Result<Step> {
    let family = family_seeded(&ctx.space, level, count, ctx.seed)?;
    let vitali = vitali_cover(&ctx.space, level, &family)?;
    let (_, finite) = feasible_cover(&ctx.space, level, 0.25, 3)?;
    let pass = vitali.pass && finite.pass;
    to_value("cover", pass, &CoverReport { vitali, finite })
}

pub fn run_cubes(
    ctx: &Ctx,
    level: usize,
    delta: f64,
    depth: usize,
    budget: usize,
    dot: bool,
) -> Result<Step> {
    let forest = build_forest(&ctx.space, level, delta, depth)?;
    let rep = verify_forest(&ctx.space, &forest, budget)?;
    let mut step = to_value("cubes", rep.pass, &rep)?;
    if dot {
        step.artifacts.push(Artifact::Dot("forest", forest.to_dot()));
    }
    Ok(step)
}

#[derive(Serialize)]
struct MaximalReport {
    cap_r: f64,
    candidate_count: u64,
    weak: lochom::maximal::WeakTypeReport,
    strong: lochom::maximal::StrongTypeReport,
    differentiation: lochom::maximal::DifferentiationReport,
}

pub fn run_maximal(ctx: &Ctx, level: usize, p: f64) -> Result<Step> {
    let mr = local_maximal(&ctx.space, &ctx.f, level, &RadiusGrid::Lossless)?;
    let members = &ctx.space.level(level)?.members;
    let mf_max = members
        .iter()
        .map(|x| mr.values.value(x))
        .fold(0.0f64, f64::max);
    let t_grid = if mf_max > 0.0 {
        geometric_grid(mf_max / 1e4, mf_max, 17)
    } else {
        vec![1.0]
    };
    let weak = weak_type_check(&ctx.space, &ctx.f, level, &t_grid, None)?;
    let strong = strong_type_check(&ctx.space, &ctx.f, level, p)?;
    let differentiation = differentiation_check(&ctx.space, &ctx.f, level)?;
    let pass = weak.pass && strong.pass && differentiation.pass;

    let mut csv = CsvTable::new(&["t", "mass", "c_hat"]);
    for e in &weak.entries {
        csv.push_row(vec![fmt_f64(e.t), fmt_f64(e.level_set_measure), fmt_f64(e.c_hat)]);
    }
    let points: Vec<(f64, f64)> = weak
        .entries
        .iter()
        .map(|e| (e.t, e.level_set_measure))
        .collect();
    let svg = svg_plot(
        "superlevel mass of Mf",
        &[Series {
            label: "mass",
            points: &points,
            style: PlotStyle::Step,
        }],
        false,
    );
    let mut step = to_value(
        "maximal",
        pass,
        &MaximalReport {
            cap_r: mr.cap_r,
            candidate_count: mr.candidate_count,
            weak,
            strong,
            differentiation,
        },
    )?;
    step.artifacts.push(Artifact::Csv("weak", csv));
    step.artifacts.push(Artifact::Svg("weak", svg));
    Ok(step)
}

pub fn run_sharp(ctx: &Ctx, level: usize, delta: f64, depth: usize) -> Result<Step> {
    // deepen until some generation's cubes fit inside next-level balls, so
    // the comparison is measured under the hypothesis that bounds it
    let mut depth = depth;
    let rep = loop {
        let forest = build_forest(&ctx.space, level, delta, depth)?;
        let rep = sharp_comparison_check(&ctx.space, &forest, &ctx.f)?;
        if rep.scale_matched || depth >= 24 {
            break rep;
        }
        depth += 3;
    };
    to_value("sharp", rep.pass, &rep)
}

/// Threshold grid for the stopping-time scan: from the root average of |f|
/// (the smallest admissible threshold) up past its maximum.
fn cz_grid(space: &Space, f: &SampledFunction, members: &lochom::PointSet) -> Result<Vec<f64>> {
    let absf = SampledFunction::from_fn(f.len(), |id| f.value(id).abs());
    let a = space.average(&absf, members)?;
    let hi = members.iter().map(|x| absf.value(x)).fold(0.0f64, f64::max);
    let lo = if a > 0.0 {
        a
    } else if hi > 0.0 {
        hi / 16.0
    } else {
        1.0
    };
    Ok(geometric_grid(lo, (2.0 * lo).max(hi), 9))
}

pub fn run_cz(ctx: &Ctx, level: usize, delta: f64, depth: usize) -> Result<Step> {
    let forest = build_forest(&ctx.space, level, delta, depth)?;
    let root = forest.roots()[0];
    let grid = cz_grid(&ctx.space, &ctx.f, &forest.cubes[root].members)?;
    let rep = cz_family_properties(&ctx.space, &forest, &ctx.f, root, &grid)?;
    let mut csv = CsvTable::new(&["lambda", "cubes", "union_mass"]);
    for row in &rep.rows {
        csv.push_row(vec![
            fmt_f64(row.lambda),
            row.cube_count.to_string(),
            fmt_f64(row.union_mass),
        ]);
    }
    let mut step = to_value("cz", rep.pass, &rep)?;
    step.artifacts.push(Artifact::Csv("families", csv));
    Ok(step)
}

#[derive(Serialize)]
struct FsReportBundle {
    dyadic: lochom::fs::FSReport,
    ball: lochom::fs::FSReport,
    corollary: lochom::fs::CorollaryBallReport,
    cover_lp: Option<lochom::fs::CoverLpReport>,
    /// Set when the cover's cores are all singletons, which leaves no
    /// admissible mean-zero test family.
    cover_lp_skipped: Option<String>,
}

pub fn run_fs(ctx: &Ctx, level: usize, delta: f64, depth: usize, p: f64) -> Result<Step> {
    let forest = build_forest(&ctx.space, level, delta, depth)?;
    let root = forest.roots()[0];
    let dyadic = fs_verify(&ctx.space, &forest, &ctx.f, root, p, SharpKind::Dyadic)?;
    let ball = fs_verify(&ctx.space, &forest, &ctx.f, root, p, SharpKind::Ball)?;
    let corollary = corollary_ball_check(&ctx.space, &forest, &ctx.f, root, p)?;

    let (_, cover) = feasible_cover(&ctx.space, level, delta, depth)?;
    let family = cover_test_family(&ctx.space, &cover)?;
    let (cover_lp, cover_lp_skipped) = if family.is_empty() {
        (None, Some("no core holds two points".to_string()))
    } else {
        (Some(cover_lp_check(&ctx.space, &cover, &family, p)?), None)
    };

    let pass = dyadic.pass
        && ball.pass
        && corollary.pass
        && cover_lp.as_ref().map_or(true, |c| c.pass);
    let mut csv = CsvTable::new(&["kind", "p", "lhs", "sharp_term", "avg_term", "ratio"]);
    for rep in [&dyadic, &ball] {
        csv.push_row(vec![
            format!("{:?}", rep.kind).to_lowercase(),
            fmt_f64(rep.p),
            fmt_f64(rep.lhs),
            fmt_f64(rep.rhs_sharp_term),
            fmt_f64(rep.rhs_avg_term),
            fmt_f64(rep.ratio),
        ]);
    }
    let mut step = to_value(
        "fs",
        pass,
        &FsReportBundle {
            dyadic,
            ball,
            corollary,
            cover_lp,
            cover_lp_skipped,
        },
    )?;
    step.artifacts.push(Artifact::Csv("ratios", csv));
    Ok(step)
}

#[derive(Serialize)]
struct BmoReport {
    seminorm_1: lochom::bmo::OscillationSup,
    seminorm_p: lochom::bmo::OscillationSup,
    equivalence: lochom::bmo::BMOEquivReport,
}

pub fn run_bmo(ctx: &Ctx, level: usize, p: f64) -> Result<Step> {
    let seminorm_1 = bmo_seminorm(&ctx.space, &ctx.f, level)?;
    let seminorm_p = bmo_p_seminorm(&ctx.space, &ctx.f, level, p)?;
    let equivalence = bmo_equiv_check(&ctx.space, &ctx.f, level, p)?;
    let pass = equivalence.pass;
    to_value(
        "bmo",
        pass,
        &BmoReport {
            seminorm_1,
            seminorm_p,
            equivalence,
        },
    )
}

#[derive(Serialize)]
struct JnReport {
    params: lochom::bmo::JNParams,
    tree: lochom::bmo::JNTree,
    decay: lochom::bmo::JNVerifyReport,
}

pub fn run_jn(ctx: &Ctx, level: usize, steps: usize) -> Result<Step> {
    let params = jn_radius_cap(&ctx.space, level)?;
    // decompose around the witness ball of the 1-seminorm: the region of
    // largest mean oscillation
    let witness = bmo_seminorm(&ctx.space, &ctx.f, level)?;
    let ball = BallSpec {
        center: witness.center,
        radius: params.r_cap,
    };
    let tree = jn_construct(&ctx.space, &ctx.f, level, ball, steps)?;
    let decay = jn_verify(&ctx.space, &ctx.f, level, ball, None)?;
    let pass = tree.pass && decay.pass;

    let mut csv = CsvTable::new(&["lambda", "D", "bound"]);
    for i in 0..decay.lambdas.len() {
        csv.push_row(vec![
            fmt_f64(decay.lambdas[i]),
            fmt_f64(decay.d[i]),
            fmt_f64(decay.bound[i]),
        ]);
    }
    let d_pts: Vec<(f64, f64)> = decay.lambdas.iter().copied().zip(decay.d.iter().copied()).collect();
    let b_pts: Vec<(f64, f64)> =
        decay.lambdas.iter().copied().zip(decay.bound.iter().copied()).collect();
    let svg = svg_plot(
        "deviation distribution and exponential bound",
        &[
            Series {
                label: "D",
                points: &d_pts,
                style: PlotStyle::Step,
            },
            Series {
                label: "bound",
                points: &b_pts,
                style: PlotStyle::Line,
            },
        ],
        false,
    );
    let mut step = to_value("jn", pass, &JnReport { params, tree, decay })?;
    step.artifacts.push(Artifact::Csv("decay", csv));
    step.artifacts.push(Artifact::Svg("decay", svg));
    Ok(step)
}
