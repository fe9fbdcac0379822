//! Fefferman–Stein comparisons: Lp norms of the maximal function against
//! the sharp function, over a root cube or over a finite ball cover.

use serde::Serialize;

use crate::covering::FiniteCoverReport;
use crate::dyadic::DyadicForest;
use crate::error::{forest_geometry, invalid, precondition, Result};
use crate::maximal::{local_maximal, lp_norm, RadiusGrid};
use crate::num::{fpow, geometric_grid, KahanSum};
use crate::set::PointSet;
use crate::sharp::{ball_sharp, dyadic_sharp, p_mean};
use crate::space::{SampledFunction, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SharpKind {
    Dyadic,
    Ball,
}

/// Constants from the good-lambda style comparison of superlevel sets of
/// the maximal function against those of the sharp function.
#[derive(Clone, Debug, Serialize)]
pub struct GoodLambdaConstants {
    /// Smallest power-of-two split constant that makes every grid point
    /// pass; None when no power up to 2^20 works.
    pub a_searched: Option<f64>,
    /// Closed form assembled from the measured decomposition constants.
    pub a_closed_form: Option<f64>,
    pub c_prime: Option<f64>,
    pub c_second: Option<f64>,
    pub c_third: Option<f64>,
    pub grid: Vec<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FSReport {
    pub kind: SharpKind,
    pub p: f64,
    /// Lp mean of the maximal function over the root.
    pub lhs: f64,
    /// Lp mean of |f| itself, for side-by-side reading.
    pub lhs_f: f64,
    /// Lp mean of the sharp function over the root.
    pub rhs_sharp_term: f64,
    /// Average of |f| over the root.
    pub rhs_avg_term: f64,
    /// lhs over (sharp term + average term); 1 when everything vanishes.
    pub ratio: f64,
    pub degenerate: bool,
    pub good_lambda: Option<GoodLambdaConstants>,
    pub pass: bool,
    pub paper_ref: &'static str,
}

/// Compares the Lp mean of the localized maximal function over a root cube
/// against the sharp function plus the plain average. The ratio is the
/// measured comparison constant; good-lambda constants are derived on a
/// threshold grid when the function does not vanish.
pub fn fs_verify(
    space: &Space,
    forest: &DyadicForest,
    f: &SampledFunction,
    root: usize,
    p: f64,
    kind: SharpKind,
) -> Result<FSReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("exponent {p} outside [1, inf)")));
    }
    if root >= forest.cubes.len() {
        return Err(invalid(format!("cube {root} out of range")));
    }
    let root_members = forest.cubes[root].members.clone();
    let clipped = f.restricted(&root_members);
    let mf = local_maximal(space, &clipped, forest.level + 1, &RadiusGrid::Lossless)?;
    let sharp = match kind {
        SharpKind::Dyadic => dyadic_sharp(space, forest, &clipped, root)?,
        SharpKind::Ball => ball_sharp(space, &clipped, forest.level + 1)?,
    };

    let lhs = p_mean(space, &mf.values, &root_members, p);
    let lhs_f = p_mean(space, &clipped, &root_members, p);
    let rhs_sharp_term = p_mean(space, &sharp, &root_members, p);
    let rhs_avg_term = space.oscillation_around(&clipped, &root_members, 0.0)?;
    let rhs = rhs_sharp_term + rhs_avg_term;
    let degenerate = rhs == 0.0;
    let ratio = if degenerate { 1.0 } else { lhs / rhs };

    let good_lambda = if rhs_avg_term > 0.0 {
        Some(good_lambda_constants(
            space,
            forest,
            &clipped,
            root,
            &mf.values,
            &sharp,
            rhs_avg_term,
            p,
        )?)
    } else {
        None
    };

    let pass = ratio.is_finite() && good_lambda.as_ref().map_or(true, |g| g.pass);
    Ok(FSReport {
        kind,
        p,
        lhs,
        lhs_f,
        rhs_sharp_term,
        rhs_avg_term,
        ratio,
        degenerate,
        good_lambda,
        pass,
        paper_ref: "local_fefferman_stein_inequality",
    })
}

fn superlevel_mass(space: &Space, g: &SampledFunction, ids: &PointSet, t: f64) -> f64 {
    let set: PointSet = ids.iter().filter(|&x| g.value(x) > t).collect();
    space.measure(&set)
}

/// Measured decomposition constants on a geometric threshold grid, then the
/// smallest power-of-two constant A with
///   mu(Mf > c2 t) <= c3 ( mu(sharp > t/A) + (2/A) mu(Mf > t/(2 c c')) )
/// at every grid point.
#[allow(clippy::too_many_arguments)]
fn good_lambda_constants(
    space: &Space,
    forest: &DyadicForest,
    clipped: &SampledFunction,
    root: usize,
    mf: &SampledFunction,
    sharp: &SampledFunction,
    avg: f64,
    p: f64,
) -> Result<GoodLambdaConstants> {
    let root_members = &forest.cubes[root].members;
    let c_hat = forest.max_parent_child_measure_ratio(space);
    let mf_max = root_members
        .iter()
        .map(|x| mf.value(x))
        .fold(0.0f64, f64::max);
    let lo = 2.0 * c_hat * avg;
    let hi = mf_max.max(lo * 2.0);
    let grid = geometric_grid(lo, hi, 16);

    // decomposition families on this grid feed the measured constants
    let families: Vec<Vec<usize>> = grid
        .iter()
        .map(|&l| {
            crate::cz::cz_decompose(space, forest, clipped, root, l).map(|fam| fam.cubes)
        })
        .collect::<Result<_>>()?;

    let union_mass = |cubes: &[usize]| -> f64 {
        let u = PointSet::union_all(cubes.iter().map(|&q| &forest.cubes[q].members));
        space.measure(&u)
    };

    let mut distinct: Vec<f64> = root_members.iter().map(|x| mf.value(x)).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    distinct.push(0.0);
    let mut saw_nonempty = false;
    let mut c_prime: Option<f64> = Some(0.0);
    for (cubes, &l) in families.iter().zip(&grid) {
        if cubes.is_empty() {
            continue;
        }
        saw_nonempty = true;
        let s = union_mass(cubes);
        let t_star = distinct
            .iter()
            .copied()
            .filter(|&t| superlevel_mass(space, mf, root_members, t) >= s)
            .fold(f64::NEG_INFINITY, f64::max);
        if t_star > 0.0 {
            c_prime = c_prime.map(|c| c.max(l / t_star));
        } else {
            c_prime = None;
            break;
        }
    }
    let c_prime = c_prime.filter(|&c| c > 0.0);

    let level_members = &space.level(forest.level + 1)?.members;
    let mut c_second = None;
    let mut c_third = None;
    for e in 0..=20u32 {
        let cand = f64::from(2u32.pow(e));
        let ok = families.iter().zip(&grid).all(|(cubes, &l)| {
            !cubes.is_empty() || superlevel_mass(space, mf, level_members, cand * l) == 0.0
        });
        if ok {
            let worst = families
                .iter()
                .zip(&grid)
                .filter(|(cubes, _)| !cubes.is_empty())
                .map(|(cubes, &l)| {
                    superlevel_mass(space, mf, level_members, cand * l) / union_mass(cubes)
                })
                .fold(0.0f64, f64::max);
            c_second = Some(cand);
            c_third = Some(worst);
            break;
        }
    }

    let (mut a_searched, mut a_closed_form) = (None, None);
    let search = |c2: f64, c3: f64, cp: f64| -> Option<f64> {
        (0..=20u32).map(|e| f64::from(2u32.pow(e))).find(|&a| {
            grid.iter().all(|&l| {
                let lhs = superlevel_mass(space, mf, root_members, c2 * l);
                let rhs = c3
                    * (superlevel_mass(space, sharp, root_members, l / a)
                        + 2.0 / a * superlevel_mass(space, mf, root_members, l / (2.0 * c_hat * cp)));
                lhs <= rhs * (1.0 + 1e-12)
            })
        })
    };
    if let (Some(c2), Some(c3)) = (c_second, c_third) {
        if let Some(cp) = c_prime {
            a_closed_form = Some(4.0 * fpow(2.0 * c_hat * cp * c2, p) * c3.max(1.0));
            a_searched = search(c2, c3, cp);
        } else if !saw_nonempty {
            // no threshold ever selects a cube, so by the c_second property
            // the left side is identically zero and any split constant works;
            // the placeholder divisor never matters
            a_searched = search(c2, c3, 1.0);
        }
    }
    let pass = a_searched.is_some();
    Ok(GoodLambdaConstants {
        a_searched,
        a_closed_form,
        c_prime,
        c_second,
        c_third,
        grid,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryBallReport {
    pub root: usize,
    pub p: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub inner_size: usize,
    pub outer_size: usize,
    /// Lp mean over the inner ball of the deviation from the outer mean.
    pub lhs: f64,
    /// Lp mean of the sharp function over the outer ball.
    pub rhs: f64,
    pub ratio: f64,
    pub degenerate: bool,
    pub pass: bool,
    pub paper_ref: &'static str,
}

/// Ball form of the comparison on a root cube: an inner ball inside the
/// cube against the sharp function on an outer ball containing it, with the
/// function clipped to the outer ball.
pub fn corollary_ball_check(
    space: &Space,
    forest: &DyadicForest,
    f: &SampledFunction,
    root: usize,
    p: f64,
) -> Result<CorollaryBallReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("exponent {p} outside [1, inf)")));
    }
    let cube = forest
        .cubes
        .get(root)
        .ok_or_else(|| invalid(format!("cube {root} out of range")))?;
    let a0 = forest
        .inner_ball_constant(space)?
        .ok_or_else(|| forest_geometry("no cube has an inner ball gap"))?;
    let c1 = forest.containment_constant(space);
    let scale = forest.scale(cube.k);
    let level_members = &space.level(forest.level)?.members;

    let inner_radius = a0 * scale;
    let inner = space
        .ball(cube.center, inner_radius)?
        .intersection(level_members);
    let outer_radius = (c1 * scale).next_up();
    let outer = space.ball(cube.center, outer_radius)?;
    if !inner.is_subset(&cube.members) {
        return Err(forest_geometry("inner ball escapes its cube"));
    }
    if !cube.members.is_subset(&outer) {
        return Err(forest_geometry("cube escapes its outer ball"));
    }

    let g = f.restricted(&outer);
    let outer_mean = space.average(&g, &outer)?;
    let centered = g.minus_const(outer_mean);
    let lhs = p_mean(space, &centered, &inner, p);
    let sharp = ball_sharp(space, &g, forest.level + 1)?;
    let rhs = p_mean(space, &sharp, &outer, p);
    let degenerate = lhs == 0.0 && rhs == 0.0;
    let ratio = if degenerate { 1.0 } else { lhs / rhs };
    let pass = ratio.is_finite();
    Ok(CorollaryBallReport {
        root,
        p,
        inner_radius,
        outer_radius,
        inner_size: inner.len(),
        outer_size: outer.len(),
        lhs,
        rhs,
        ratio,
        degenerate,
        pass,
        paper_ref: "local_fefferman_stein_ball_form",
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverLpRow {
    pub function: usize,
    pub ball: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverLpReport {
    pub p: f64,
    pub rows: Vec<CoverLpRow>,
    pub max_ratio: f64,
    pub pass: bool,
    pub paper_ref: &'static str,
}

/// For mean-zero functions supported in a core ball of the cover, compares
/// the Lp norm over the core against the Lp norm of the sharp function over
/// the enclosing region.
pub fn cover_lp_check(
    space: &Space,
    cover: &FiniteCoverReport,
    family: &[SampledFunction],
    p: f64,
) -> Result<CoverLpReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("exponent {p} outside [1, inf)")));
    }
    if family.is_empty() {
        return Err(invalid("empty function family"));
    }
    let mut rows = Vec::new();
    let mut max_ratio = 0.0f64;
    for (fi, f) in family.iter().enumerate() {
        let support: PointSet = (0..space.len())
            .filter(|&x| f.value(x) != 0.0)
            .collect();
        let sup_norm = support
            .iter()
            .map(|x| f.value(x).abs())
            .fold(0.0f64, f64::max);
        let (bi, ball) = if support.is_empty() {
            (0, &cover.balls[0])
        } else {
            cover
                .balls
                .iter()
                .enumerate()
                .find(|(_, b)| support.is_subset(&b.core))
                .ok_or_else(|| {
                    precondition(format!("function {fi} is not supported in any core ball"))
                })?
        };
        if !support.is_empty() {
            let mut num = KahanSum::new();
            for x in ball.core.iter() {
                num.add(space.cloud().weight(x) * f.value(x));
            }
            if num.value().abs() > 1e-12 * sup_norm.max(1.0) {
                return Err(precondition(format!(
                    "function {fi} has nonzero mean {} over its core ball",
                    num.value()
                )));
            }
        }
        let sharp = ball_sharp(space, f, cover.level + 2)?;
        let lhs = lp_norm(space, f, &ball.core, p);
        let rhs = lp_norm(space, &sharp, &ball.region, p);
        let degenerate = lhs == 0.0 && rhs == 0.0;
        let ratio = if degenerate { 1.0 } else { lhs / rhs };
        max_ratio = max_ratio.max(ratio);
        rows.push(CoverLpRow {
            function: fi,
            ball: bi,
            lhs,
            rhs,
            ratio,
            degenerate,
        });
    }
    let pass = max_ratio.is_finite();
    Ok(CoverLpReport {
        p,
        rows,
        max_ratio,
        pass,
        paper_ref: "cover_sharp_lp_comparison",
    })
}

/// One mean-zero test function per core ball: an indicator of the first
/// half of the core (by id) recentered by the mass fraction it carries.
pub fn cover_test_family(space: &Space, cover: &FiniteCoverReport) -> Result<Vec<SampledFunction>> {
    let mut out = Vec::with_capacity(cover.balls.len());
    for ball in &cover.balls {
        let ids = ball.core.as_slice();
        if ids.len() < 2 {
            continue;
        }
        let half: PointSet = ids[..ids.len() / 2].iter().copied().collect();
        let theta = space.measure(&half) / space.measure(&ball.core);
        let core = ball.core.clone();
        out.push(SampledFunction::from_fn(space.len(), |x| {
            if half.contains(x) {
                1.0 - theta
            } else if core.contains(x) {
                -theta
            } else {
                0.0
            }
        }));
    }
    if out.is_empty() {
        return Err(invalid("cover has no core ball with at least two points"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{instantiate, Builtin};
    use crate::covering::finite_ball_cover;
    use crate::dyadic::build_forest;
    use crate::num::ulp_distance;

    fn fixture() -> (Space, DyadicForest, usize) {
        let sp = instantiate(&Builtin::Grid1d { n: 256 }).unwrap();
        let forest = build_forest(&sp, 1, 0.25, 3).unwrap();
        let root = forest.generations[1][0];
        (sp, forest, root)
    }

    #[test]
    fn constant_functions_are_degenerate_for_centered_terms_only() {
        let (sp, forest, root) = fixture();
        let f = SampledFunction::from_fn(sp.len(), |_| 3.0);
        let rep = fs_verify(&sp, &forest, &f, root, 2.0, SharpKind::Dyadic).unwrap();
        // sharp term vanishes but the average keeps the right side alive
        assert_eq!(rep.rhs_sharp_term, 0.0);
        assert!(rep.rhs_avg_term > 0.0);
        assert!(rep.ratio.is_finite());
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn zero_function_reports_the_degenerate_ratio() {
        let (sp, forest, root) = fixture();
        let f = SampledFunction::from_fn(sp.len(), |_| 0.0);
        let rep = fs_verify(&sp, &forest, &f, root, 1.0, SharpKind::Ball).unwrap();
        assert!(rep.degenerate);
        assert_eq!(rep.ratio, 1.0);
        assert!(rep.good_lambda.is_none());
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let (sp, forest, root) = fixture();
        let f = SampledFunction::from_fn(sp.len(), |id| ((id * 7) % 23) as f64 + 0.4);
        let g = f.scaled(64.0);
        let a = fs_verify(&sp, &forest, &f, root, 2.0, SharpKind::Dyadic).unwrap();
        let b = fs_verify(&sp, &forest, &g, root, 2.0, SharpKind::Dyadic).unwrap();
        assert!(ulp_distance(a.ratio, b.ratio) <= 8, "{} vs {}", a.ratio, b.ratio);
    }

    #[test]
    fn good_lambda_constants_exist_on_a_spiky_function() {
        // one spike inside the 85-point root at ids 107..=191 lifts its leaf
        // cube's average past the grid floor, so low thresholds select it
        // while high ones stay empty, exercising both sides of the search
        let (sp, forest, _) = fixture();
        let root = forest.roots()[1];
        let f = SampledFunction::from_fn(sp.len(), |id| {
            0.3 + (id % 3) as f64 * 0.2 + if id == 121 { 100.0 } else { 0.0 }
        });
        for kind in [SharpKind::Dyadic, SharpKind::Ball] {
            let rep = fs_verify(&sp, &forest, &f, root, 2.0, kind).unwrap();
            let gl = rep.good_lambda.as_ref().expect("nonzero average");
            assert!(gl.pass, "{gl:?}");
            assert!(gl.a_searched.is_some());
            assert!(gl.c_prime.unwrap() > 0.0);
            assert!(gl.a_closed_form.unwrap() > 0.0);
            assert!(rep.pass);
        }
    }

    #[test]
    fn corollary_ball_ratio_is_finite_and_the_balls_nest() {
        let (sp, forest, root) = fixture();
        let f = SampledFunction::from_fn(sp.len(), |id| if id < 120 { 2.0 } else { -1.0 });
        let rep = corollary_ball_check(&sp, &forest, &f, root, 2.0).unwrap();
        assert!(rep.inner_size >= 1);
        assert!(rep.inner_size <= rep.outer_size);
        assert!(rep.ratio.is_finite());
        assert!(rep.pass);
    }

    #[test]
    fn cover_lp_rejects_a_function_with_drifting_mean() {
        let sp = instantiate(&Builtin::Grid1d { n: 256 }).unwrap();
        let forest = build_forest(&sp, 2, 0.25, 3).unwrap();
        let k = match finite_ball_cover(&sp, &forest, 1, 0) {
            Ok(_) => 0,
            Err(crate::error::Error::Scale { min_admissible, .. }) => min_admissible.unwrap(),
            Err(e) => panic!("{e}"),
        };
        let cover = finite_ball_cover(&sp, &forest, 1, k).unwrap();
        let core = cover.balls[0].core.clone();
        let bad = SampledFunction::from_fn(sp.len(), |x| if core.contains(x) { 1.0 } else { 0.0 });
        assert!(cover_lp_check(&sp, &cover, &[bad], 2.0).is_err());
    }

    #[test]
    fn cover_lp_passes_on_the_builtin_mean_zero_family() {
        let sp = instantiate(&Builtin::Grid1d { n: 256 }).unwrap();
        let forest = build_forest(&sp, 2, 0.25, 3).unwrap();
        let k = match finite_ball_cover(&sp, &forest, 1, 0) {
            Ok(_) => 0,
            Err(crate::error::Error::Scale { min_admissible, .. }) => min_admissible.unwrap(),
            Err(e) => panic!("{e}"),
        };
        let cover = finite_ball_cover(&sp, &forest, 1, k).unwrap();
        let family = cover_test_family(&sp, &cover).unwrap();
        let rep = cover_lp_check(&sp, &cover, &family, 2.0).unwrap();
        assert_eq!(rep.rows.len(), family.len());
        assert!(rep.pass, "{rep:?}");
        assert!(rep.max_ratio.is_finite());
    }

    #[test]
    fn disjoint_core_balls_with_the_same_pattern_agree() {
        let sp = instantiate(&Builtin::Grid1d { n: 1024 }).unwrap();
        let forest = build_forest(&sp, 2, 0.25, 4).unwrap();
        let k = match finite_ball_cover(&sp, &forest, 1, 0) {
            Ok(_) => 0,
            Err(crate::error::Error::Scale { min_admissible, .. }) => min_admissible.unwrap(),
            Err(e) => panic!("{e}"),
        };
        let cover = finite_ball_cover(&sp, &forest, 1, k).unwrap();
        // hunt for two same-size disjoint cores away from the boundary
        let mut pair = None;
        'outer: for i in 0..cover.balls.len() {
            for j in i + 1..cover.balls.len() {
                let (a, b) = (&cover.balls[i], &cover.balls[j]);
                if a.core.len() == b.core.len()
                    && a.core.len() >= 4
                    && a.core.is_disjoint(&b.core)
                    && a.region.len() == b.region.len()
                {
                    pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = pair else { return };
        let family = cover_test_family(&sp, &cover).unwrap();
        let rep = cover_lp_check(&sp, &cover, &family, 2.0).unwrap();
        let ri = rep.rows.iter().find(|r| r.ball == i).unwrap();
        let rj = rep.rows.iter().find(|r| r.ball == j).unwrap();
        assert!(
            (ri.ratio - rj.ratio).abs() <= 1e-9 * ri.ratio.abs().max(1.0),
            "{} vs {}",
            ri.ratio,
            rj.ratio
        );
    }
}
