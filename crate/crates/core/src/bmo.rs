//! Bounded mean oscillation on a level: seminorms over admissible balls,
//! the iterative John–Nirenberg ball tree with its measured constants, the
//! exponential decay verifier, and the p-seminorm equivalence check.
//!
//! All thresholds and means are reported in the units of the input function;
//! the constructions are invariant under scaling, so nothing is gained by
//! normalizing first.

use rayon::prelude::*;
use serde::Serialize;

use crate::covering::{greedy_select, BallSpec};
use crate::error::{construction, invalid, Result};
use crate::num::{fpow, geometric_grid, proot, KahanSum};
use crate::set::{PointId, PointSet};
use crate::space::{SampledFunction, Space};

/// Supremum of the p-mean oscillation over admissible balls, with the
/// witness ball that attains it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OscillationSup {
    pub value: f64,
    pub center: PointId,
    pub radius: f64,
    pub ball_size: usize,
}

/// Sup over balls centered at level-`n` points with radius in `(0, r_cap]`
/// of the p-mean of `|f - f_B|` over the ball. Every swept ball must stay
/// inside the next level; a ball escaping it is a structural error, not a
/// failed check.
pub fn oscillation_sup(
    space: &Space,
    f: &SampledFunction,
    n: usize,
    r_cap: f64,
    p: f64,
) -> Result<OscillationSup> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("exponent {p} outside [1, inf)")));
    }
    if !(r_cap > 0.0) || !r_cap.is_finite() {
        return Err(invalid(format!("radius cap {r_cap} must be positive")));
    }
    let centers = &space.level(n)?.members;
    let host = &space.level(n + 1)?.members;
    let per_center: Vec<Result<OscillationSup>> = centers
        .as_slice()
        .par_iter()
        .map(|&xc| {
            let sweep = space.sweep(xc, r_cap);
            for &(_, id) in &sweep.entries {
                if !host.contains(id) {
                    return Err(construction(format!(
                        "ball around {xc} escapes level {}",
                        n + 1
                    )));
                }
            }
            let m = sweep.entries.len();
            let mut w_pre = Vec::with_capacity(m + 1);
            let mut wf_pre = Vec::with_capacity(m + 1);
            let (mut sw, mut swf) = (KahanSum::new(), KahanSum::new());
            w_pre.push(0.0);
            wf_pre.push(0.0);
            for &(_, id) in &sweep.entries {
                let w = space.cloud().weight(id);
                sw.add(w);
                swf.add(w * f.value(id));
                w_pre.push(sw.value());
                wf_pre.push(swf.value());
            }
            let mut best = OscillationSup {
                value: f64::NEG_INFINITY,
                center: xc,
                radius: 0.0,
                ball_size: 0,
            };
            for ball in sweep.balls() {
                let mean = wf_pre[ball.end] / w_pre[ball.end];
                let mut acc = KahanSum::new();
                for &(_, id) in &sweep.entries[..ball.end] {
                    acc.add(space.cloud().weight(id) * fpow((f.value(id) - mean).abs(), p));
                }
                let value = proot(acc.value() / w_pre[ball.end], p);
                if value > best.value {
                    best = OscillationSup {
                        value,
                        center: xc,
                        radius: ball.radius,
                        ball_size: ball.end,
                    };
                }
            }
            Ok(best)
        })
        .collect();
    let mut out: Option<OscillationSup> = None;
    for r in per_center {
        let cand = r?;
        if cand.ball_size == 0 {
            continue;
        }
        let better = match &out {
            None => true,
            Some(cur) => {
                cand.value > cur.value
                    || (cand.value == cur.value && cand.center < cur.center)
            }
        };
        if better {
            out = Some(cand);
        }
    }
    out.ok_or_else(|| construction("no admissible ball at this level"))
}

/// Mean-oscillation seminorm at level `n`: p = 1, radii up to twice the
/// level enlargement.
pub fn bmo_seminorm(space: &Space, f: &SampledFunction, n: usize) -> Result<OscillationSup> {
    let eps = space.level(n)?.eps;
    oscillation_sup(space, f, n, 2.0 * eps, 1.0)
}

/// p-mean oscillation seminorm at level `n` for p > 1, radii capped by the
/// iterative-construction radius so the two seminorms are comparable.
pub fn bmo_p_seminorm(
    space: &Space,
    f: &SampledFunction,
    n: usize,
    p: f64,
) -> Result<OscillationSup> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid(format!("exponent {p} outside (1, inf)")));
    }
    let params = jn_radius_cap(space, n)?;
    oscillation_sup(space, f, n, params.r_cap, p)
}

/// Radius budget of the iterative construction at level `n`. `k` is the
/// engulfing factor of the covering step, `alpha` the expansion that all
/// auxiliary balls must fit in, and `r_cap * alpha = 2 * eps_n` keeps them
/// inside level `n + 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct JNParams {
    pub level: usize,
    pub k: f64,
    pub alpha: f64,
    pub r_cap: f64,
}

pub fn jn_radius_cap(space: &Space, n: usize) -> Result<JNParams> {
    let eps = space.level(n)?.eps;
    let b = space
        .level(n + 1)
        .map_err(|_| invalid(format!("level {n} has no successor level")))?
        .b;
    let k = 2.0 * b + 3.0 * b * b;
    let alpha = b * (1.5 * k + 1.0);
    Ok(JNParams {
        level: n,
        k,
        alpha,
        r_cap: 2.0 * eps / alpha,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Children were produced.
    Expanded,
    /// The superlevel set of the local maximal function is empty.
    SuperlevelEmpty,
    /// Too few points to subdivide further.
    TooFewPoints,
    /// The step budget ran out.
    DepthLimit,
}

#[derive(Clone, Debug, Serialize)]
pub struct JNNode {
    pub depth: usize,
    pub parent: Option<usize>,
    pub center: PointId,
    pub radius: f64,
    #[serde(skip)]
    pub members: PointSet,
    pub size: usize,
    /// Mean of `f` over this ball.
    pub mean: f64,
    /// Local threshold `2 * c * a_hat`.
    pub lambda0: f64,
    pub c_local: f64,
    /// Least constant with `t * mu(M > t) <= a_hat * mu(S)` for every t,
    /// for the local maximal function M of `|f - mean|`.
    pub a_hat: f64,
    pub u_size: usize,
    pub termination: Termination,
    /// `{|f - mean| > lambda0}` inside the ball is contained in the union
    /// of the children.
    pub superlevel_covered: bool,
    /// The union of the children equals the superlevel set of M exactly.
    pub exact_union: bool,
    /// Every child stays inside this ball's member set.
    pub nested: bool,
    /// Total child mass over this ball's mass.
    pub children_mass_ratio: f64,
    pub halving: bool,
    /// Largest child mean drift over `c_local * lambda0`.
    pub max_drift_ratio: f64,
    pub drift_ok: bool,
    pub children: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct JN7Row {
    pub n: usize,
    pub threshold: f64,
    pub mass: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct JNTree {
    pub level: usize,
    pub center: PointId,
    pub radius: f64,
    pub seminorm: f64,
    pub alpha: f64,
    pub k: f64,
    pub steps: usize,
    /// Largest local threshold in the tree.
    pub lambda0: f64,
    /// One decay step: `c * lambda0`.
    pub lambda1: f64,
    /// Largest local constant in the tree.
    pub c: f64,
    pub nodes: Vec<JNNode>,
    pub jn7: Vec<JN7Row>,
    pub degenerate: bool,
    pub pass: bool,
    pub paper_ref: &'static str,
}

struct JNContext<'a> {
    space: &'a Space,
    f: &'a SampledFunction,
    host: &'a PointSet,
    params: JNParams,
    b: f64,
    steps: usize,
}

/// Iterative decomposition of a ball: at every node, points where the local
/// maximal function of the deviation exceeds `2 c a_hat` are covered by
/// child balls of at most half the mass, whose means drift by at most
/// `c * lambda0`. The local constant `c` is ratcheted upward until the
/// children it produces justify it.
pub fn jn_construct(
    space: &Space,
    f: &SampledFunction,
    n: usize,
    ball: BallSpec,
    steps: usize,
) -> Result<JNTree> {
    if steps == 0 {
        return Err(invalid("step budget must be positive"));
    }
    let params = jn_radius_cap(space, n)?;
    space.require_admissible(ball.center, ball.radius, n, params.r_cap, "decomposition ball")?;
    let host = &space.level(n + 1)?.members;
    let seminorm = bmo_seminorm(space, f, n)?.value;
    let b = space.level(n + 1)?.b;
    let ctx = JNContext {
        space,
        f,
        host,
        params,
        b,
        steps,
    };
    let root_members = space.ball(ball.center, ball.radius)?.intersection(host);
    if root_members.is_empty() {
        return Err(construction("decomposition ball holds no level points"));
    }
    let mut nodes: Vec<JNNode> = Vec::new();
    expand_node(&ctx, &mut nodes, None, ball.center, ball.radius, root_members, 0)?;

    let lambda0 = nodes.iter().map(|nd| nd.lambda0).fold(0.0f64, f64::max);
    let c = nodes.iter().map(|nd| nd.c_local).fold(1.0f64, f64::max);
    let lambda1 = c * lambda0;
    let root_mass = space.measure(&nodes[0].members);
    let root_mean = nodes[0].mean;
    let mut jn7 = Vec::with_capacity(steps);
    let mut nodes_ok = true;
    for nd in &nodes {
        if nd.termination == Termination::Expanded {
            nodes_ok &= nd.superlevel_covered
                && nd.exact_union
                && nd.nested
                && nd.halving
                && nd.drift_ok;
        }
    }
    let degenerate = lambda1 == 0.0;
    for step in 1..=steps {
        let threshold = step as f64 * lambda1;
        let over: PointSet = nodes[0]
            .members
            .iter()
            .filter(|&x| (f.value(x) - root_mean).abs() > threshold)
            .collect();
        let mass = space.measure(&over);
        let bound = root_mass / fpow(2.0, step as f64);
        jn7.push(JN7Row {
            n: step,
            threshold,
            mass,
            bound,
            pass: mass <= bound * (1.0 + 1e-12),
        });
    }
    let pass = nodes_ok && jn7.iter().all(|r| r.pass);
    Ok(JNTree {
        level: n,
        center: ball.center,
        radius: ball.radius,
        seminorm,
        alpha: params.alpha,
        k: params.k,
        steps,
        lambda0,
        lambda1,
        c,
        nodes,
        jn7,
        degenerate,
        pass,
        paper_ref: "john_nirenberg_iterative_construction",
    })
}

/// Local maximal function of `|f - mean|` on the expansion ball `a_set`:
/// for every point, the largest average over a swept ball that contains it,
/// is centered in the expansion, and stays inside it.
fn local_deviation_maximal(
    ctx: &JNContext,
    a_set: &PointSet,
    mean: f64,
    radius: f64,
) -> Vec<(PointId, f64)> {
    let cap = 2.0 * ctx.b * ctx.params.alpha * radius;
    let per_center: Vec<Vec<(PointId, f64)>> = a_set
        .as_slice()
        .par_iter()
        .map(|&xc| {
            let sweep = ctx.space.sweep(xc, cap.next_up());
            let limit = sweep
                .entries
                .iter()
                .position(|&(_, id)| !a_set.contains(id))
                .unwrap_or(sweep.entries.len());
            let mut w_pre = vec![0.0];
            let mut wo_pre = vec![0.0];
            let (mut sw, mut so) = (KahanSum::new(), KahanSum::new());
            for &(_, id) in &sweep.entries[..limit] {
                let w = ctx.space.cloud().weight(id);
                sw.add(w);
                so.add(w * (ctx.f.value(id) - mean).abs());
                w_pre.push(sw.value());
                wo_pre.push(so.value());
            }
            let ends: Vec<usize> = sweep
                .balls()
                .into_iter()
                .map(|b| b.end)
                .filter(|&e| e <= limit)
                .collect();
            // a point is contained in exactly the balls ending beyond it, so
            // its value is a suffix maximum over the per-ball averages
            let mut out = vec![0.0f64; limit];
            let mut running = f64::NEG_INFINITY;
            for (j, &end) in ends.iter().enumerate().rev() {
                running = running.max(wo_pre[end] / w_pre[end]);
                let lower = if j == 0 { 0 } else { ends[j - 1] };
                for slot in out.iter_mut().take(end).skip(lower) {
                    *slot = running;
                }
            }
            sweep.entries[..limit]
                .iter()
                .zip(&out)
                .map(|(&(_, id), &v)| (id, v))
                .collect()
        })
        .collect();
    let mut best: Vec<f64> = vec![f64::NEG_INFINITY; ctx.space.len()];
    for chunk in per_center {
        for (id, v) in chunk {
            if v > best[id] {
                best[id] = v;
            }
        }
    }
    a_set.iter().map(|id| (id, best[id])).collect()
}

#[allow(clippy::too_many_arguments)]
fn expand_node(
    ctx: &JNContext,
    nodes: &mut Vec<JNNode>,
    parent: Option<usize>,
    center: PointId,
    radius: f64,
    members: PointSet,
    depth: usize,
) -> Result<usize> {
    let space = ctx.space;
    let idx = nodes.len();
    let mean = space.average(ctx.f, &members)?;
    let size = members.len();
    nodes.push(JNNode {
        depth,
        parent,
        center,
        radius,
        members: members.clone(),
        size,
        mean,
        lambda0: 0.0,
        c_local: 1.0,
        a_hat: 0.0,
        u_size: 0,
        termination: Termination::Expanded,
        superlevel_covered: true,
        exact_union: true,
        nested: true,
        children_mass_ratio: 0.0,
        halving: true,
        max_drift_ratio: 0.0,
        drift_ok: true,
        children: Vec::new(),
    });
    if size <= 2 {
        nodes[idx].termination = Termination::TooFewPoints;
        return Ok(idx);
    }
    if depth >= ctx.steps {
        nodes[idx].termination = Termination::DepthLimit;
        return Ok(idx);
    }

    let a_raw = space.ball(center, ctx.params.alpha * radius)?;
    if !a_raw.is_subset(ctx.host) {
        return Err(construction(format!(
            "expansion ball around {center} escapes level {}",
            ctx.params.level + 1
        )));
    }
    let m_vals = local_deviation_maximal(ctx, &a_raw, mean, radius);
    let m_of: std::collections::HashMap<PointId, f64> = m_vals.iter().copied().collect();

    // least a_hat with t * mu({M > t} cap S) <= a_hat * mu(S) for all t
    let node_mass = space.measure(&members);
    let mut distinct: Vec<f64> = members.iter().map(|x| m_of[&x]).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut a_hat = 0.0f64;
    for &v in &distinct {
        if v <= 0.0 {
            continue;
        }
        let geq: PointSet = members.iter().filter(|&x| m_of[&x] >= v).collect();
        a_hat = a_hat.max(v * space.measure(&geq) / node_mass);
    }
    nodes[idx].a_hat = a_hat;

    let kf = ctx.params.k;
    let mut c = 1.0f64;
    let fixpoint = loop {
        let lambda0 = 2.0 * c * a_hat;
        let u: PointSet = members.iter().filter(|&x| m_of[&x] > lambda0).collect();
        if u.is_empty() {
            break None;
        }
        let u_comp = ctx.host.difference(&u);
        if u_comp.is_empty() {
            return Err(construction("superlevel set swallowed the whole level"));
        }
        let family: Vec<BallSpec> = u
            .iter()
            .map(|x| {
                let d = u_comp
                    .iter()
                    .map(|y| space.rho(x, y))
                    .fold(f64::INFINITY, f64::min);
                BallSpec {
                    center: x,
                    radius: d / (2.0 * kf),
                }
            })
            .collect();
        if family.iter().any(|b| !(b.radius > 0.0)) {
            return Err(construction("a superlevel point touches the complement"));
        }
        let greedy = greedy_select(space, &family)?;
        let mut c_req = 1.0f64;
        let mut kids = Vec::new();
        for &j in &greedy.selected {
            let xj = family[j].center;
            let rj = family[j].radius;
            let core = greedy.sets[j].intersection(ctx.host);
            let child = space.ball(xj, kf * rj)?.intersection(ctx.host);
            let wide = space.ball(xj, 3.0 * kf * rj)?;
            if !wide.is_subset(&a_raw) {
                return Err(construction(
                    "tripled child ball escapes the expansion ball",
                ));
            }
            let core_mass = space.measure(&core);
            let child_mass = space.measure(&child);
            let wide_mass = space.measure(&wide);
            c_req = c_req.max(child_mass / core_mass).max(wide_mass / child_mass);
            kids.push((xj, kf * rj, child, child_mass));
        }
        if c_req <= c {
            break Some((lambda0, u, kids));
        }
        c = c_req;
    };

    let Some((lambda0, u, kids)) = fixpoint else {
        nodes[idx].termination = Termination::SuperlevelEmpty;
        nodes[idx].lambda0 = 2.0 * c * a_hat;
        nodes[idx].c_local = c;
        return Ok(idx);
    };
    nodes[idx].lambda0 = lambda0;
    nodes[idx].c_local = c;
    nodes[idx].u_size = u.len();

    let union = PointSet::union_all(kids.iter().map(|(_, _, ch, _)| ch));
    let superlevel: PointSet = members
        .iter()
        .filter(|&x| (ctx.f.value(x) - mean).abs() > lambda0)
        .collect();
    nodes[idx].superlevel_covered = superlevel.is_subset(&union);
    nodes[idx].exact_union = union == u;
    nodes[idx].nested = kids.iter().all(|(_, _, ch, _)| ch.is_subset(&members));
    let mut kid_mass = KahanSum::new();
    for (_, _, _, m) in &kids {
        kid_mass.add(*m);
    }
    nodes[idx].children_mass_ratio = kid_mass.value() / node_mass;
    nodes[idx].halving = nodes[idx].children_mass_ratio <= 0.5 * (1.0 + 1e-12);

    let mut drift = 0.0f64;
    let mut child_idx = Vec::with_capacity(kids.len());
    for (xj, rj, child, _) in kids {
        let child_mean = space.average(ctx.f, &child)?;
        drift = drift.max((child_mean - mean).abs());
        let ci = expand_node(ctx, nodes, Some(idx), xj, rj, child, depth + 1)?;
        child_idx.push(ci);
    }
    nodes[idx].max_drift_ratio = if lambda0 > 0.0 {
        drift / (c * lambda0)
    } else {
        0.0
    };
    nodes[idx].drift_ok = drift <= c * lambda0 * (1.0 + 1e-12);
    nodes[idx].children = child_idx;
    Ok(idx)
}

#[derive(Clone, Debug, Serialize)]
pub struct JNVerifyReport {
    pub level: usize,
    pub center: PointId,
    pub radius: f64,
    pub seminorm: f64,
    pub ball_mass: f64,
    pub lambdas: Vec<f64>,
    /// Superlevel masses of `|f - f_B|` at each threshold.
    pub d: Vec<f64>,
    /// `2 mu(B) exp(-b_hat lambda / seminorm)` at each threshold.
    pub bound: Vec<f64>,
    /// Largest decay rate consistent with every measured mass; None when
    /// the deviation never exceeds any threshold.
    pub b_hat: Option<f64>,
    pub unbounded: bool,
    pub pass: bool,
    pub paper_ref: &'static str,
}

/// Measures the exponential decay of the deviation distribution on one
/// admissible ball: the largest rate `b_hat` with
/// `mu(|f - f_B| > lambda) <= 2 mu(B) exp(-b_hat lambda / seminorm)`
/// across the threshold grid.
pub fn jn_verify(
    space: &Space,
    f: &SampledFunction,
    n: usize,
    ball: BallSpec,
    lambda_grid: Option<&[f64]>,
) -> Result<JNVerifyReport> {
    let params = jn_radius_cap(space, n)?;
    space.require_admissible(ball.center, ball.radius, n, params.r_cap, "decay ball")?;
    let host = &space.level(n + 1)?.members;
    let members = space.ball(ball.center, ball.radius)?.intersection(host);
    if members.is_empty() {
        return Err(construction("decay ball holds no level points"));
    }
    let seminorm = bmo_seminorm(space, f, n)?.value;
    let mean = space.average(f, &members)?;
    let max_dev = members
        .iter()
        .map(|x| (f.value(x) - mean).abs())
        .fold(0.0f64, f64::max);

    let lambdas: Vec<f64> = match lambda_grid {
        Some(grid) => {
            if grid.is_empty() || grid.iter().any(|&l| !(l > 0.0)) {
                return Err(invalid("threshold grid must be positive"));
            }
            grid.to_vec()
        }
        None => {
            let lo = if seminorm > 0.0 {
                0.05 * seminorm
            } else if max_dev > 0.0 {
                max_dev / 100.0
            } else {
                1.0
            };
            geometric_grid(lo, max_dev.max(lo * 2.0), 64)
        }
    };

    let ball_mass = space.measure(&members);
    let d: Vec<f64> = lambdas
        .iter()
        .map(|&l| {
            let over: PointSet = members
                .iter()
                .filter(|&x| (f.value(x) - mean).abs() > l)
                .collect();
            space.measure(&over)
        })
        .collect();
    let b_hat = lambdas
        .iter()
        .zip(&d)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&l, &m)| seminorm / l * (2.0 * ball_mass / m).ln())
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.min(r)))
        });
    let unbounded = b_hat.is_none();
    let bound: Vec<f64> = match b_hat {
        Some(bh) => lambdas
            .iter()
            .map(|&l| {
                let rate = if seminorm > 0.0 { bh * l / seminorm } else { 0.0 };
                2.0 * ball_mass * (-rate).exp()
            })
            .collect(),
        None => vec![2.0 * ball_mass; lambdas.len()],
    };
    let pass = unbounded || b_hat.unwrap() > 0.0;
    Ok(JNVerifyReport {
        level: n,
        center: ball.center,
        radius: ball.radius,
        seminorm,
        ball_mass,
        lambdas,
        d,
        bound,
        b_hat,
        unbounded,
        pass,
        paper_ref: "john_nirenberg_exponential_decay",
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BMOEquivReport {
    pub level: usize,
    pub p: f64,
    pub seminorm_1: f64,
    pub seminorm_p: f64,
    /// p-seminorm over 1-seminorm; 1 when both vanish.
    pub ratio: f64,
    pub degenerate: bool,
    pub b_hat: Option<f64>,
    /// `(2 p Gamma(p) / b_hat^p)^(1/p)`: the bound the measured decay rate
    /// yields for the ratio.
    pub proof_constant: Option<f64>,
    pub within_proof: bool,
    pub pass: bool,
    pub paper_ref: &'static str,
}

/// Compares the p-seminorm to the 1-seminorm and checks the measured ratio
/// against the constant implied by the measured exponential decay rate on
/// the witness ball of the 1-seminorm.
pub fn bmo_equiv_check(
    space: &Space,
    f: &SampledFunction,
    n: usize,
    p: f64,
) -> Result<BMOEquivReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid(format!("exponent {p} outside (1, inf)")));
    }
    let params = jn_radius_cap(space, n)?;
    let s1 = oscillation_sup(space, f, n, params.r_cap, 1.0)?;
    let sp = oscillation_sup(space, f, n, params.r_cap, p)?;
    let degenerate = s1.value == 0.0 && sp.value == 0.0;
    let ratio = if degenerate { 1.0 } else { sp.value / s1.value };

    let witness = BallSpec {
        center: s1.center,
        radius: s1.radius,
    };
    let decay = jn_verify(space, f, n, witness, None)?;
    let proof_constant = decay
        .b_hat
        .filter(|&bh| bh > 0.0)
        .map(|bh| proot(2.0 * p * statrs::function::gamma::gamma(p) / fpow(bh, p), p));
    let within_proof = match proof_constant {
        Some(pc) => ratio <= pc * 1.05,
        None => ratio.is_finite(),
    };
    let pass = ratio.is_finite() && within_proof;
    Ok(BMOEquivReport {
        level: n,
        p,
        seminorm_1: s1.value,
        seminorm_p: sp.value,
        ratio,
        degenerate,
        b_hat: decay.b_hat,
        proof_constant,
        within_proof,
        pass,
        paper_ref: "bmo_p_seminorm_equivalence",
    })
}
