//! Local Hardy-Littlewood maximal operator with a radius cap.
//!
//! `Mf(x)` is the largest average of `|f|` over admissible balls containing
//! `x`: centers range over the level's points, radii up to the covering cap
//! of the level. On a point cloud the supremum over all radii is attained on
//! finitely many balls, one per distinct center-to-point distance, so the
//! default "lossless" grid scans exactly those prefixes of each center's
//! distance-sorted sweep and the result is the exact discrete supremum.
//!
//! Averages are computed as running compensated prefix sums along each
//! sweep. The naive reference path recomputes every ball from scratch in the
//! same order with the same compensation, so the two agree bit for bit.

use crate::covering::vitali_params;
use crate::error::{invalid, precondition, Result};
use crate::num::{approx_le, fpow, KahanSum};
use crate::set::{PointId, PointSet};
use crate::space::{SampledFunction, Space};

#[derive(Clone, Debug, PartialEq)]
pub enum RadiusGrid {
    /// All realizable admissible balls; the exact discrete supremum.
    Lossless,
    /// Averages only over the given radii (each in `(0, cap]`).
    Explicit(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct MaximalResult {
    pub level: usize,
    /// The radius cap `r_n` the scan used.
    pub cap_r: f64,
    /// Number of candidate balls inspected.
    pub candidate_count: u64,
    /// `Mf`, supported on the level's members (reads 0 elsewhere).
    pub values: SampledFunction,
}

/// Largest admissible radius for maximal averages at level `n`; equals the
/// covering radius cap, so every candidate ball stays inside level `n + 1`.
pub fn radius_cap(space: &Space, n: usize) -> Result<f64> {
    Ok(vitali_params(space, n)?.r_cap)
}

fn explicit_radii<'a>(grid: &'a RadiusGrid, cap: f64) -> Result<Option<&'a [f64]>> {
    match grid {
        RadiusGrid::Lossless => Ok(None),
        RadiusGrid::Explicit(rs) => {
            if rs.is_empty() {
                return Err(invalid("explicit radius grid is empty"));
            }
            for &r in rs {
                if !(r > 0.0) || r > cap * (1.0 + 1e-12) {
                    return Err(precondition(format!(
                        "radius {r} outside the admissible range (0, {cap}]"
                    )));
                }
            }
            Ok(Some(rs))
        }
    }
}

pub fn local_maximal(
    space: &Space,
    f: &SampledFunction,
    n: usize,
    grid: &RadiusGrid,
) -> Result<MaximalResult> {
    let cap = radius_cap(space, n)?;
    let radii = explicit_radii(grid, cap)?;
    let members = space.level(n)?.members.clone();

    let mut best = vec![0.0f64; space.len()];
    let mut candidates = 0u64;
    for center in members.iter() {
        let sweep = space.sweep(center, cap);
        // running compensated prefix sums of weight and weight * |f|
        let mut num = KahanSum::new();
        let mut den = KahanSum::new();
        let mut prefix = Vec::with_capacity(sweep.entries.len() + 1);
        prefix.push((0.0f64, 0.0f64));
        for &(_, id) in &sweep.entries {
            let w = space.cloud().weight(id);
            num.add(w * f.value(id).abs());
            den.add(w);
            prefix.push((num.value(), den.value()));
        }
        let mut update = |end: usize| {
            let (num, den) = prefix[end];
            let avg = num / den;
            for &(_, id) in &sweep.entries[..end] {
                if avg > best[id] {
                    best[id] = avg;
                }
            }
        };
        match radii {
            None => {
                for ball in sweep.balls() {
                    update(ball.end);
                    candidates += 1;
                }
            }
            Some(rs) => {
                for &r in rs {
                    let end = sweep.entries.partition_point(|&(d, _)| d < r);
                    if end > 0 {
                        update(end);
                    }
                    candidates += 1;
                }
            }
        }
    }

    let values = SampledFunction::from_values(best)?.restricted(&members);
    Ok(MaximalResult {
        level: n,
        cap_r: cap,
        candidate_count: candidates,
        values,
    })
}

/// Reference implementation: for every point, rescan every center's balls
/// from scratch. Slow but structurally independent of the prefix-sum path.
pub fn naive_local_maximal(
    space: &Space,
    f: &SampledFunction,
    n: usize,
    grid: &RadiusGrid,
) -> Result<MaximalResult> {
    let cap = radius_cap(space, n)?;
    let radii = explicit_radii(grid, cap)?;
    let members = space.level(n)?.members.clone();

    let mut best = vec![0.0f64; space.len()];
    let mut candidates = 0u64;
    for center in members.iter() {
        let sweep = space.sweep(center, cap);
        let mut consider = |end: usize| {
            let mut num = KahanSum::new();
            let mut den = KahanSum::new();
            for &(_, id) in &sweep.entries[..end] {
                let w = space.cloud().weight(id);
                num.add(w * f.value(id).abs());
                den.add(w);
            }
            let avg = num.value() / den.value();
            for &(_, id) in &sweep.entries[..end] {
                if avg > best[id] {
                    best[id] = avg;
                }
            }
        };
        match radii {
            None => {
                for ball in sweep.balls() {
                    consider(ball.end);
                    candidates += 1;
                }
            }
            Some(rs) => {
                for &r in rs {
                    let end = sweep.entries.partition_point(|&(d, _)| d < r);
                    if end > 0 {
                        consider(end);
                    }
                    candidates += 1;
                }
            }
        }
    }

    let values = SampledFunction::from_values(best)?.restricted(&members);
    Ok(MaximalResult {
        level: n,
        cap_r: cap,
        candidate_count: candidates,
        values,
    })
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct WeakTypeEntry {
    pub t: f64,
    pub level_set_measure: f64,
    /// `t * mu({Mf > t}) / ||f||_1`.
    pub c_hat: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct WeakTypeReport {
    pub level: usize,
    pub l1_norm: f64,
    pub entries: Vec<WeakTypeEntry>,
    pub c_max: f64,
    /// Configured bound, if any; `pass` compares against it.
    pub bound: Option<f64>,
    pub pass: bool,
    pub paper_ref: &'static str,
}

/// Weak (1,1) inequality scan: the measure of `{Mf > t}` against `t` for
/// every threshold in the grid.
pub fn weak_type_check(
    space: &Space,
    f: &SampledFunction,
    n: usize,
    t_grid: &[f64],
    bound: Option<f64>,
) -> Result<WeakTypeReport> {
    if t_grid.is_empty() {
        return Err(invalid("threshold grid is empty"));
    }
    for &t in t_grid {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid(format!("thresholds must be positive, got {t}")));
        }
    }
    let next = space.level(n + 1)?.members.clone();
    let mut norm = KahanSum::new();
    for id in next.iter() {
        norm.add(space.cloud().weight(id) * f.value(id).abs());
    }
    let l1 = norm.value();
    let mf = local_maximal(space, f, n, &RadiusGrid::Lossless)?;
    let members = space.level(n)?.members.clone();

    let mut entries = Vec::with_capacity(t_grid.len());
    let mut c_max = 0.0f64;
    for &t in t_grid {
        let set: PointSet = members.iter().filter(|&x| mf.values.value(x) > t).collect();
        let mass = space.measure(&set);
        let c_hat = if l1 > 0.0 {
            t * mass / l1
        } else {
            // zero function: every level set is empty
            0.0
        };
        c_max = c_max.max(c_hat);
        entries.push(WeakTypeEntry { t, level_set_measure: mass, c_hat });
    }
    let pass = c_max.is_finite() && bound.map_or(true, |b| c_max <= b);
    Ok(WeakTypeReport {
        level: n,
        l1_norm: l1,
        entries,
        c_max,
        bound,
        pass,
        paper_ref: "maximal_weak_type_1_1",
    })
}

/// `(sum w |g|^p)^(1/p)` over `ids`, or the max for infinite `p`.
pub fn lp_norm(space: &Space, f: &SampledFunction, ids: &PointSet, p: f64) -> f64 {
    if p.is_infinite() {
        return ids.iter().map(|id| f.value(id).abs()).fold(0.0, f64::max);
    }
    let mut acc = KahanSum::new();
    for id in ids.iter() {
        acc.add(space.cloud().weight(id) * fpow(f.value(id).abs(), p));
    }
    acc.value().powf(1.0 / p)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct StrongTypeReport {
    pub level: usize,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `||Mf||_p / ||f||_p`; 0 when both norms vanish.
    pub ratio: f64,
    pub degenerate: bool,
    pub pass: bool,
    pub paper_ref: &'static str,
}

/// Strong-type ratio for `p` in `(1, inf]`; `p = inf` compares sup norms
/// (averages never exceed the sup, so the ratio is at most 1).
pub fn strong_type_check(space: &Space, f: &SampledFunction, n: usize, p: f64) -> Result<StrongTypeReport> {
    if !(p > 1.0) {
        return Err(invalid(format!("strong type needs p > 1, got {p}")));
    }
    let mf = local_maximal(space, f, n, &RadiusGrid::Lossless)?;
    let lhs = lp_norm(space, &mf.values, &space.level(n)?.members, p);
    let rhs = lp_norm(space, f, &space.level(n + 1)?.members, p);
    let degenerate = rhs == 0.0;
    let ratio = if degenerate { 0.0 } else { lhs / rhs };
    let pass = if p.is_infinite() {
        approx_le(lhs, rhs, 8)
    } else {
        ratio.is_finite()
    };
    Ok(StrongTypeReport {
        level: n,
        p,
        lhs,
        rhs,
        ratio,
        degenerate,
        pass,
        paper_ref: "maximal_strong_type_p",
    })
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DifferentiationReport {
    pub level: usize,
    /// `|f(x)| <= Mf(x)` at every level point, up to 4 ulps.
    pub pointwise_pass: bool,
    pub worst_point: Option<PointId>,
    /// Largest `|avg(f, smallest ball at x) - f(x)|`.
    pub proxy_max: f64,
    pub pass: bool,
    pub paper_ref: &'static str,
}

/// Pointwise domination `|f| <= Mf` plus the smallest-ball average as a
/// differentiation proxy. The singleton ball at `x` realizes `|f(x)|` as an
/// average, so the inequality is exact up to final rounding.
pub fn differentiation_check(space: &Space, f: &SampledFunction, n: usize) -> Result<DifferentiationReport> {
    let mf = local_maximal(space, f, n, &RadiusGrid::Lossless)?;
    let cap = mf.cap_r;
    let members = space.level(n)?.members.clone();
    let mut pointwise_pass = true;
    let mut worst: Option<(u64, PointId)> = None;
    let mut proxy_max = 0.0f64;
    for x in members.iter() {
        let fx = f.value(x);
        if !approx_le(fx.abs(), mf.values.value(x), 4) {
            pointwise_pass = false;
            let gap = crate::num::ulp_distance(fx.abs(), mf.values.value(x));
            if worst.map_or(true, |(g, _)| gap > g) {
                worst = Some((gap, x));
            }
        }
        let sweep = space.sweep(x, cap);
        let smallest = sweep.balls()[0];
        let ids: PointSet = sweep.entries[..smallest.end].iter().map(|e| e.1).collect();
        let avg = space.average(f, &ids)?;
        proxy_max = proxy_max.max((avg - fx).abs());
    }
    Ok(DifferentiationReport {
        level: n,
        pointwise_pass,
        worst_point: worst.map(|(_, x)| x),
        proxy_max,
        pass: pointwise_pass,
        paper_ref: "lebesgue_differentiation_pointwise_bound",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{instantiate, Builtin};
    use crate::functions::{sample, FunctionSpec};

    #[test]
    fn constant_function_is_its_own_maximal() {
        let sp = instantiate(&Builtin::Grid1d { n: 64 }).unwrap();
        let f = sample(&sp, &FunctionSpec::Constant { c: -2.5 }).unwrap();
        let mf = local_maximal(&sp, &f, 1, &RadiusGrid::Lossless).unwrap();
        for x in sp.level(1).unwrap().members.iter() {
            assert!(crate::num::approx_eq(mf.values.value(x), 2.5, 4));
        }
    }

    #[test]
    fn tiny4_spike_is_recovered_by_the_singleton_ball() {
        let sp = instantiate(&Builtin::Tiny4).unwrap();
        let f = sample(&sp, &FunctionSpec::AtomSpike { coords: vec![0.5], value: 1.0 }).unwrap();
        let mf = local_maximal(&sp, &f, 1, &RadiusGrid::Lossless).unwrap();
        // cap 0.04 < spacing 0.2, so all candidate balls are singletons
        assert_eq!(mf.values.value(2), 1.0);
        assert_eq!(mf.values.value(1), 0.0);
        assert_eq!(mf.values.value(0), 0.0); // off the level
    }

    #[test]
    fn indicator_maximal_is_one_well_inside_the_support() {
        let sp = instantiate(&Builtin::Grid1d { n: 256 }).unwrap();
        let f = sample(&sp, &FunctionSpec::IndicatorHalfspace { axis: 0, threshold: 0.5 }).unwrap();
        // flip so the support is (0, 1/2)
        let g = SampledFunction::from_fn(sp.len(), |i| 1.0 - f.value(i));
        let mf = local_maximal(&sp, &g, 1, &RadiusGrid::Lossless).unwrap();
        // id 70 sits at 0.2754, more than cap 0.05 away from the jump
        assert_eq!(mf.values.value(70), 1.0);
    }

    #[test]
    fn prefix_path_equals_naive_path_bitwise() {
        let sp = instantiate(&Builtin::WeightedGrid { n: 128, profile: crate::builtin::WeightProfile::Linear }).unwrap();
        let f = sample(&sp, &FunctionSpec::RandomPiecewise { seed: 3, pieces: 16 }).unwrap();
        for n in [1usize, 2] {
            let fast = local_maximal(&sp, &f, n, &RadiusGrid::Lossless).unwrap();
            let slow = naive_local_maximal(&sp, &f, n, &RadiusGrid::Lossless).unwrap();
            assert_eq!(fast.candidate_count, slow.candidate_count);
            for x in 0..sp.len() {
                assert_eq!(fast.values.value(x).to_bits(), slow.values.value(x).to_bits());
            }
        }
    }

    #[test]
    fn explicit_grid_never_exceeds_lossless() {
        let sp = instantiate(&Builtin::Grid1d { n: 128 }).unwrap();
        let f = sample(&sp, &FunctionSpec::RandomPiecewise { seed: 5, pieces: 8 }).unwrap();
        let cap = radius_cap(&sp, 1).unwrap();
        let coarse = local_maximal(
            &sp,
            &f,
            1,
            &RadiusGrid::Explicit(vec![cap / 4.0, cap / 2.0, cap]),
        )
        .unwrap();
        let full = local_maximal(&sp, &f, 1, &RadiusGrid::Lossless).unwrap();
        for x in 0..sp.len() {
            assert!(coarse.values.value(x) <= full.values.value(x) + 1e-15);
        }
    }

    #[test]
    fn oversized_explicit_radius_is_rejected() {
        let sp = instantiate(&Builtin::Grid1d { n: 64 }).unwrap();
        let f = sample(&sp, &FunctionSpec::Constant { c: 1.0 }).unwrap();
        let cap = radius_cap(&sp, 1).unwrap();
        let err = local_maximal(&sp, &f, 1, &RadiusGrid::Explicit(vec![cap * 2.0]));
        assert!(err.is_err());
    }

    #[test]
    fn weak_type_zero_function_and_high_threshold() {
        let sp = instantiate(&Builtin::Grid1d { n: 64 }).unwrap();
        let zero = sample(&sp, &FunctionSpec::Constant { c: 0.0 }).unwrap();
        let report = weak_type_check(&sp, &zero, 1, &[0.5, 1.0], None).unwrap();
        assert_eq!(report.c_max, 0.0);
        assert!(report.pass);

        let spike = sample(&sp, &FunctionSpec::AtomSpike { coords: vec![0.5], value: 1.0 }).unwrap();
        let report = weak_type_check(&sp, &spike, 1, &[1e9], None).unwrap();
        assert_eq!(report.entries[0].level_set_measure, 0.0);
    }

    #[test]
    fn weak_type_constant_is_bounded_by_measure_ratio() {
        // Mf = c on the level, so c(t) = t mu({..}) / (c mu(next)) <= 1
        let sp = instantiate(&Builtin::Grid1d { n: 128 }).unwrap();
        let f = sample(&sp, &FunctionSpec::Constant { c: 2.0 }).unwrap();
        let grid = crate::num::geometric_grid(0.1, 4.0, 16);
        let report = weak_type_check(&sp, &f, 1, &grid, Some(1.0)).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn strong_type_ratios() {
        let sp = instantiate(&Builtin::Tiny4).unwrap();
        let one = sample(&sp, &FunctionSpec::Constant { c: 1.0 }).unwrap();
        let r2 = strong_type_check(&sp, &one, 1, 2.0).unwrap();
        // mu(level 1) = 0.5, mu(level 2) = 1: ratio = sqrt(1/2)
        assert!((r2.ratio - 0.5f64.sqrt()).abs() < 1e-15);
        let rinf = strong_type_check(&sp, &one, 1, f64::INFINITY).unwrap();
        assert!(rinf.pass && rinf.ratio <= 1.0 + 1e-15);
        assert!(strong_type_check(&sp, &one, 1, 1.0).is_err());
        let zero = sample(&sp, &FunctionSpec::Constant { c: 0.0 }).unwrap();
        let rz = strong_type_check(&sp, &zero, 1, 2.0).unwrap();
        assert!(rz.degenerate && rz.pass);
    }

    #[test]
    fn sup_norm_bound_for_noise() {
        let sp = instantiate(&Builtin::Grid1d { n: 128 }).unwrap();
        let f = sample(&sp, &FunctionSpec::RandomPiecewise { seed: 11, pieces: 13 }).unwrap();
        let r = strong_type_check(&sp, &f, 2, f64::INFINITY).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn differentiation_bound_holds_everywhere() {
        let sp = instantiate(&Builtin::Tiny4).unwrap();
        for spec in [
            FunctionSpec::Constant { c: 3.0 },
            FunctionSpec::TwoValued { axis: 0, threshold: 0.4 },
            FunctionSpec::RandomPiecewise { seed: 2, pieces: 3 },
        ] {
            let f = sample(&sp, &spec).unwrap();
            let report = differentiation_check(&sp, &f, 1).unwrap();
            assert!(report.pass, "{spec:?}: {report:?}");
            assert!(report.proxy_max <= 1e-14);
        }
    }

    #[test]
    fn differentiation_proxy_vanishes_away_from_jumps() {
        let sp = instantiate(&Builtin::Grid1d { n: 256 }).unwrap();
        let f = sample(&sp, &FunctionSpec::IndicatorHalfspace { axis: 0, threshold: 0.5 }).unwrap();
        let report = differentiation_check(&sp, &f, 1).unwrap();
        assert!(report.pass);
        // smallest balls are singletons: the proxy is pure rounding noise
        assert!(report.proxy_max <= 1e-14, "{}", report.proxy_max);
    }
}
