//! Vitali-type covering selection at a level of the exhaustion.
//!
//! Given a family of admissible balls centered in level `n` with radii at
//! most `r_cap`, the greedy pass (largest radius first, ties by center id)
//! keeps a maximal pairwise disjoint subfamily. Every discarded ball meets a
//! kept ball of at least its own radius, so the kept balls enlarged by the
//! factor `k` cover the union of the family. The caps are tied together by
//! `k * r_cap = 2 * eps_n`, which keeps every enlarged ball inside level
//! `n + 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::DyadicForest;
use crate::error::{invalid, precondition, Error, Result};
use crate::num::KahanSum;
use crate::set::{PointId, PointSet};
use crate::space::Space;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BallSpec {
    pub center: PointId,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct VitaliParams {
    pub level: usize,
    /// Largest admissible ball radius at this level.
    pub r_cap: f64,
    /// Enlargement factor applied to kept balls; `k * r_cap = 2 * eps_n`.
    pub k: f64,
}

/// Radius cap and enlargement factor for coverings at level `n`. Needs the
/// next level's quasi-triangle constant, so `n` must not be the top level.
pub fn vitali_params(space: &Space, n: usize) -> Result<VitaliParams> {
    let eps = space.level(n)?.eps;
    let b_next = space
        .level(n + 1)
        .map_err(|_| precondition(format!("covering at level {n} needs level {}", n + 1)))?
        .b;
    let k = 2.0 * b_next + 3.0 * b_next * b_next;
    Ok(VitaliParams {
        level: n,
        r_cap: 2.0 * eps / k,
        k,
    })
}

/// Result of the greedy disjoint-subfamily pass, shared by the public
/// covering report and the iteration construction.
pub(crate) struct GreedyOutcome {
    /// Materialized member sets, indexed like the family.
    pub sets: Vec<PointSet>,
    /// Family indices kept, in selection order.
    pub selected: Vec<usize>,
    /// For every discarded family index, the kept index it intersects.
    pub owner: Vec<Option<usize>>,
}

/// Greedy pass over the family in order of decreasing radius (ties: smaller
/// center id, then family position). No admissibility checks here; callers
/// validate radii against their own caps.
pub(crate) fn greedy_select(space: &Space, family: &[BallSpec]) -> Result<GreedyOutcome> {
    let sets: Vec<PointSet> = family
        .iter()
        .map(|b| space.ball(b.center, b.radius))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..family.len()).collect();
    order.sort_by(|&i, &j| {
        family[j]
            .radius
            .total_cmp(&family[i].radius)
            .then(family[i].center.cmp(&family[j].center))
            .then(i.cmp(&j))
    });
    let mut point_owner: Vec<Option<usize>> = vec![None; space.len()];
    let mut selected = Vec::new();
    let mut owner = vec![None; family.len()];
    for &i in &order {
        let hit = sets[i].iter().find_map(|p| point_owner[p]);
        match hit {
            Some(j) => owner[i] = Some(j),
            None => {
                for p in sets[i].iter() {
                    point_owner[p] = Some(i);
                }
                selected.push(i);
            }
        }
    }
    Ok(GreedyOutcome { sets, selected, owner })
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct CoveringReport {
    pub level: usize,
    pub family_size: usize,
    /// Size of the target set whose coverage is being certified.
    pub target_size: usize,
    pub selected: Vec<BallSpec>,
    pub k: f64,
    /// Exact pairwise disjointness of the kept balls.
    pub disjoint: bool,
    /// Exact containment of the target in the enlarged kept balls.
    pub covered: bool,
    /// Up to three points of the target missed by every enlargement.
    pub uncovered_examples: Vec<PointId>,
    /// Largest enlargement factor actually needed by a discarded ball.
    pub measured_engulfing: Option<f64>,
    /// Kept mass over target mass; the comparability constant of the lemma
    /// bounds its reciprocal.
    pub efficiency: f64,
    pub pass: bool,
    pub paper_ref: &'static str,
}

/// Greedy covering selection against an explicit target set. The target must
/// sit inside the union of the family, and the kept balls enlarged by `k`
/// must recover all of it.
pub fn vitali_select(
    space: &Space,
    n: usize,
    family: &[BallSpec],
    target: &PointSet,
) -> Result<CoveringReport> {
    if family.is_empty() {
        return Err(invalid("covering family is empty"));
    }
    if target.is_empty() {
        return Err(invalid("covering target set is empty"));
    }
    let params = vitali_params(space, n)?;
    for b in family {
        space.require_admissible(b.center, b.radius, n, params.r_cap, "covering family ball")?;
    }
    let out = greedy_select(space, family)?;

    let union = PointSet::union_all(out.sets.iter());
    if !target.is_subset(&union) {
        return Err(precondition("covering target escapes the family union"));
    }

    let mut disjoint = true;
    let mut seen = vec![false; space.len()];
    for &j in &out.selected {
        for p in out.sets[j].iter() {
            if seen[p] {
                disjoint = false;
            }
            seen[p] = true;
        }
    }

    let mut covered_mask = vec![false; space.len()];
    for &j in &out.selected {
        let enlarged = space.ball(family[j].center, params.k * family[j].radius)?;
        for p in enlarged.iter() {
            covered_mask[p] = true;
        }
    }
    let uncovered: Vec<PointId> = target.iter().filter(|&p| !covered_mask[p]).collect();

    let mut engulfing: Option<f64> = None;
    for (i, owner) in out.owner.iter().enumerate() {
        if let Some(j) = owner {
            let c = family[*j].center;
            let r = family[*j].radius;
            for y in out.sets[i].iter() {
                let need = space.rho(y, c) / r;
                engulfing = Some(engulfing.map_or(need, |e| e.max(need)));
            }
        }
    }

    let mut kept_mass = KahanSum::new();
    for &j in &out.selected {
        kept_mass.add(space.measure(&out.sets[j]));
    }
    let efficiency = kept_mass.value() / space.measure(target);

    let pass = disjoint && uncovered.is_empty();
    Ok(CoveringReport {
        level: n,
        family_size: family.len(),
        target_size: target.len(),
        selected: out.selected.iter().map(|&j| family[j]).collect(),
        k: params.k,
        disjoint,
        covered: uncovered.is_empty(),
        uncovered_examples: uncovered.into_iter().take(3).collect(),
        measured_engulfing: engulfing,
        efficiency,
        pass,
        paper_ref: "vitali_covering_lemma",
    })
}

/// Runs the greedy covering selection against the whole family union.
pub fn vitali_cover(space: &Space, n: usize, family: &[BallSpec]) -> Result<CoveringReport> {
    if family.is_empty() {
        return Err(invalid("covering family is empty"));
    }
    let sets: Vec<PointSet> = family
        .iter()
        .map(|b| space.ball(b.center, b.radius))
        .collect::<Result<_>>()?;
    let union = PointSet::union_all(sets.iter());
    vitali_select(space, n, family, &union)
}

/// Family with one ball per level point, all at `fraction * r_cap`.
pub fn family_uniform(space: &Space, n: usize, fraction: f64) -> Result<Vec<BallSpec>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid(format!("radius fraction must be in (0, 1], got {fraction}")));
    }
    let params = vitali_params(space, n)?;
    Ok(space
        .level(n)?
        .members
        .iter()
        .map(|center| BallSpec { center, radius: fraction * params.r_cap })
        .collect())
}

/// Seeded family of `count` balls with centers drawn from the level and
/// radii uniform in `[r_cap / 4, r_cap]`.
pub fn family_seeded(space: &Space, n: usize, count: usize, seed: u64) -> Result<Vec<BallSpec>> {
    if count == 0 {
        return Err(invalid("seeded family needs at least one ball"));
    }
    let params = vitali_params(space, n)?;
    let members = space.level(n)?.members.as_slice();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| BallSpec {
            center: members[rng.gen_range(0..members.len())],
            radius: params.r_cap * rng.gen_range(0.25..=1.0),
        })
        .collect())
}

/// One covering unit of the finite dyadic cover: a generation-`k` cube that
/// meets the target level, its core ball, and the block of generation-`k`
/// cubes the core ball touches.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CoverBall {
    /// Index of the cube in the forest.
    pub cube: usize,
    pub center: PointId,
    pub core_radius: f64,
    #[serde(skip)]
    pub core: PointSet,
    /// Indices of the generation-`k` cubes meeting the core ball.
    pub region_cubes: Vec<usize>,
    #[serde(skip)]
    pub region: PointSet,
    /// Measured reach of the region from the center, in units of delta^k.
    pub c_prime: f64,
    pub enclosing_radius: f64,
    /// Ratio of enclosing to core radius.
    pub gamma: f64,
    /// Doubling supremum of the region as a standalone set.
    pub region_doubling: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct FiniteCoverReport {
    /// Level being covered; the forest partitions the next level.
    pub level: usize,
    pub generation: usize,
    /// Containment factor of the forest; core radius is `c1 * delta^k`.
    pub c1: f64,
    /// Largest per-ball region reach, in units of delta^k.
    pub c_prime: f64,
    /// Largest per-ball gamma.
    pub gamma: f64,
    /// Exact containment of the level in the union of selected cubes.
    pub covered: bool,
    /// Every selected cube sits inside its own core ball.
    pub cubes_in_cores: bool,
    /// Every core ball sits inside its own region.
    pub cores_in_regions: bool,
    /// Largest doubling supremum over the regions.
    pub region_doubling: f64,
    pub balls: Vec<CoverBall>,
    pub pass: bool,
    pub paper_ref: &'static str,
}

/// Doubling supremum of `set` as a metric measure space of its own: masses
/// of concentric balls intersected with `set`, radii up to `cap`. The
/// supremum over the continuum of radii is attained at a breakpoint.
fn restricted_doubling(space: &Space, set: &PointSet, cap: f64) -> f64 {
    let pts = set.as_slice();
    let mut best = 1.0f64;
    for &x in pts {
        let mut entries: Vec<(f64, f64)> = pts
            .iter()
            .map(|&y| (space.rho(x, y), space.cloud().weight(y)))
            .collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(entries.len() + 1);
        let mut acc = KahanSum::new();
        prefix.push(0.0);
        for &(_, w) in &entries {
            acc.add(w);
            prefix.push(acc.value());
        }
        let closed = |t: f64| -> f64 {
            let j = entries.partition_point(|&(d, _)| d <= t);
            prefix[j]
        };
        let mut seen = f64::NAN;
        for &(d, _) in &entries {
            if d <= 0.0 || d == seen {
                continue;
            }
            seen = d;
            for t in [d, d / 2.0] {
                if t <= cap {
                    let denom = closed(t);
                    if denom > 0.0 {
                        best = best.max(closed(2.0 * t) / denom);
                    }
                }
            }
        }
    }
    best
}

/// Covers level `n` by the generation-`k` cubes of a forest built one level
/// up, pairing each selected cube with a core ball and the block of
/// generation-`k` cubes that ball touches. Every reported containment is
/// checked exactly; the enclosing radii are measured, not assumed.
pub fn finite_ball_cover(
    space: &Space,
    forest: &DyadicForest,
    n: usize,
    k: usize,
) -> Result<FiniteCoverReport> {
    if forest.level != n + 1 {
        return Err(precondition(format!(
            "covering level {n} needs a forest of the next level, got {}",
            forest.level
        )));
    }
    if k >= forest.generations.len() {
        return Err(invalid(format!(
            "generation {k} not built; forest has {}",
            forest.generations.len()
        )));
    }
    let target = &space.level(n)?.members;
    let host = &space.level(n + 1)?.members;
    let c1 = forest.containment_constant(space);
    let scale_k = forest.scale(k);
    let core_radius = (c1 * scale_k).next_up();

    let gen: &[usize] = &forest.generations[k];
    let selected: Vec<usize> = gen
        .iter()
        .copied()
        .filter(|&q| forest.cubes[q].members.iter().any(|p| target.contains(p)))
        .collect();

    // exact: generation k partitions the host level, so the selected cubes
    // recover the target
    let mut covered_mask = vec![false; space.len()];
    for &q in &selected {
        for p in forest.cubes[q].members.iter() {
            covered_mask[p] = true;
        }
    }
    let covered = target.iter().all(|p| covered_mask[p]);

    // core balls must stay inside the host level; report the first usable
    // generation when they escape
    let escape = selected.iter().copied().find_map(|q| {
        let core = space.ball(forest.cubes[q].center, core_radius).ok()?;
        let hit = core.iter().find(|&p| !host.contains(p)).map(|p| (q, p));
        hit
    });
    if let Some((q, p)) = escape {
        let min_admissible = (k + 1..forest.generations.len()).find(|&kk| {
            let r = (c1 * forest.scale(kk)).next_up();
            forest.generations[kk].iter().all(|&qq| {
                let meets = forest.cubes[qq].members.iter().any(|m| target.contains(m));
                !meets
                    || space
                        .ball(forest.cubes[qq].center, r)
                        .map(|b| b.is_subset(host))
                        .unwrap_or(false)
            })
        });
        return Err(Error::Scale {
            msg: format!(
                "core ball of cube {q} leaves the host level at point {p}; \
                 generation {k} is too coarse"
            ),
            min_admissible,
        });
    }

    let mut balls = Vec::with_capacity(selected.len());
    let mut cubes_in_cores = true;
    let mut cores_in_regions = true;
    for &q in &selected {
        let center = forest.cubes[q].center;
        let core = space.ball(center, core_radius)?;
        cubes_in_cores &= forest.cubes[q].members.is_subset(&core);

        let region_cubes: Vec<usize> = gen
            .iter()
            .copied()
            .filter(|&qq| !forest.cubes[qq].members.is_disjoint(&core))
            .collect();
        let region = PointSet::union_all(region_cubes.iter().map(|&qq| &forest.cubes[qq].members));
        cores_in_regions &= core.is_subset(&region);

        let c_prime = region
            .iter()
            .map(|y| space.rho(center, y) / scale_k)
            .fold(c1, f64::max);
        let enclosing_radius = (c_prime * scale_k).next_up();
        debug_assert!(region.is_subset(&space.ball(center, enclosing_radius)?));
        let region_doubling = restricted_doubling(space, &region, scale_k);
        balls.push(CoverBall {
            cube: q,
            center,
            core_radius,
            core,
            region_cubes,
            region,
            c_prime,
            enclosing_radius,
            gamma: c_prime / c1,
            region_doubling,
        });
    }

    let c_prime = balls.iter().map(|b| b.c_prime).fold(c1, f64::max);
    let region_doubling = balls.iter().map(|b| b.region_doubling).fold(1.0, f64::max);
    let pass = covered && cubes_in_cores && cores_in_regions && region_doubling.is_finite();
    Ok(FiniteCoverReport {
        level: n,
        generation: k,
        c1,
        c_prime,
        gamma: c_prime / c1,
        covered,
        cubes_in_cores,
        cores_in_regions,
        region_doubling,
        balls,
        pass,
        paper_ref: "finite_dyadic_cover",
    })
}
