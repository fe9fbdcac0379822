//! Finite weighted point clouds with a quasi-distance and a nested exhaustion.
//!
//! The model: a cloud of `n` sample points with strictly positive weights, a
//! symmetric quasi-distance `rho` evaluated on coordinates, and an increasing
//! chain of levels. Level `n` carries three declared constants:
//!
//! * `eps`: the enlargement radius; every point within `2*eps` of level `n`
//!   must already belong to level `n+1`,
//! * `b`: the quasi-triangle constant valid for triples drawn from level `n`,
//! * `c`: the doubling constant valid for centers in level `n` and radii up
//!   to `eps`.
//!
//! Balls are strict: `ball(x, r) = {y : rho(x, y) < r}`. Measures and
//! averages are weighted sums over id sets; an optional support mask lets a
//! sampled function be "extended by zero" outside a region while keeping the
//! ambient weights.

use crate::error::{invalid, precondition, Error, Result};
use crate::num::KahanSum;
use crate::set::{PointId, PointSet};
use std::sync::OnceLock;

/// Quasi-distance evaluated on point coordinates.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rho {
    /// Euclidean distance; triangle constant 1.
    Euclidean,
    /// `|x - y|^s` for `s >= 1`; triangle constant `2^(s-1)`.
    PowerEuclidean { exponent: f64 },
}

impl Rho {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut sq = 0.0;
        for (x, y) in a.iter().zip(b) {
            let d = x - y;
            sq += d * d;
        }
        let d = sq.sqrt();
        match self {
            Rho::Euclidean => d,
            Rho::PowerEuclidean { exponent } => d.powf(*exponent),
        }
    }

    /// The analytic quasi-triangle constant for this distance kind.
    pub fn triangle_constant(&self) -> f64 {
        match self {
            Rho::Euclidean => 1.0,
            Rho::PowerEuclidean { exponent } => 2f64.powf(exponent - 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Rho::PowerEuclidean { exponent } = self {
            if !exponent.is_finite() || *exponent < 1.0 {
                return Err(invalid(format!(
                    "power quasi-distance needs exponent >= 1, got {exponent}"
                )));
            }
        }
        Ok(())
    }
}

/// The weighted sample points. Ids are contiguous indices starting at 0.
#[derive(Clone, Debug)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if coords.len() % dim != 0 {
            return Err(invalid(format!(
                "coordinate buffer length {} is not a multiple of dim {}",
                coords.len(),
                dim
            )));
        }
        let n = coords.len() / dim;
        if n == 0 {
            return Err(invalid("empty point cloud"));
        }
        if weights.len() != n {
            return Err(invalid(format!(
                "{} weights for {} points",
                weights.len(),
                n
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(invalid(format!("weights must be finite and positive, got {w}")));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        Ok(Self { dim, coords, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty clouds
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self, id: PointId) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn weight(&self, id: PointId) -> f64 {
        self.weights[id]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// One level of the exhaustion together with its declared constants.
#[derive(Clone, Debug)]
pub struct Level {
    pub members: PointSet,
    /// Enlargement radius `eps_n`.
    pub eps: f64,
    /// Quasi-triangle constant `B_n >= 1`.
    pub b: f64,
    /// Doubling constant `C_n > 1`.
    pub c: f64,
}

/// The quasi-distance plus the level chain.
#[derive(Clone, Debug)]
pub struct LocalStructure {
    pub rho: Rho,
    pub levels: Vec<Level>,
}

impl LocalStructure {
    /// Validates the cheap structural invariants: levels are nonempty,
    /// nested, the top level is the whole cloud, `eps` is nonincreasing and
    /// the quasi-triangle / doubling constants are nondecreasing.
    pub fn validate(&self, n_points: usize) -> Result<()> {
        self.rho.validate()?;
        if self.levels.is_empty() {
            return Err(configuration_err("structure has no levels"));
        }
        for (i, lv) in self.levels.iter().enumerate() {
            if lv.members.is_empty() {
                return Err(configuration_err(format!("level {} is empty", i + 1)));
            }
            if let Some(max) = lv.members.as_slice().last() {
                if *max >= n_points {
                    return Err(Error::UnknownId(*max));
                }
            }
            if !(lv.eps > 0.0) || !lv.eps.is_finite() {
                return Err(configuration_err(format!("level {}: eps must be positive", i + 1)));
            }
            if !(lv.b >= 1.0) || !lv.b.is_finite() {
                return Err(configuration_err(format!("level {}: b must be >= 1", i + 1)));
            }
            if !(lv.c > 1.0) || !lv.c.is_finite() {
                return Err(configuration_err(format!("level {}: c must be > 1", i + 1)));
            }
        }
        for w in self.levels.windows(2) {
            if !w[0].members.is_subset(&w[1].members) {
                return Err(configuration_err("levels are not nested"));
            }
            if w[1].eps > w[0].eps {
                return Err(configuration_err("eps must be nonincreasing across levels"));
            }
            if w[1].b < w[0].b || w[1].c < w[0].c {
                return Err(configuration_err(
                    "quasi-triangle and doubling constants must be nondecreasing",
                ));
            }
        }
        let top = self.levels.last().unwrap();
        if top.members.len() != n_points {
            return Err(configuration_err(
                "top level must contain every point of the cloud",
            ));
        }
        Ok(())
    }
}

fn configuration_err(msg: impl Into<String>) -> Error {
    Error::Configuration(msg.into())
}

/// A real-valued function sampled on the cloud, with an optional support
/// mask. Outside the mask the function reads as zero while the ambient
/// weights stay in place, which is exactly "extension by zero".
#[derive(Clone, Debug)]
pub struct SampledFunction {
    values: Vec<f64>,
    support: Option<PointSet>,
}

impl SampledFunction {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("function values must be finite"));
        }
        Ok(Self { values, support: None })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(PointId) -> f64) -> Self {
        Self {
            values: (0..n).map(&mut f).collect(),
            support: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The value at `id`, honoring the support mask.
    #[inline]
    pub fn value(&self, id: PointId) -> f64 {
        match &self.support {
            Some(mask) if !mask.contains(id) => 0.0,
            _ => self.values[id],
        }
    }

    pub fn support(&self) -> Option<&PointSet> {
        self.support.as_ref()
    }

    /// The same values restricted to `mask` (zero outside, full weight kept).
    pub fn restricted(&self, mask: &PointSet) -> SampledFunction {
        let support = match &self.support {
            Some(prev) => prev.intersection(mask),
            None => mask.clone(),
        };
        SampledFunction {
            values: self.values.clone(),
            support: Some(support),
        }
    }

    pub fn scaled(&self, c: f64) -> SampledFunction {
        SampledFunction {
            values: self.values.iter().map(|v| c * v).collect(),
            support: self.support.clone(),
        }
    }

    /// Pointwise sum; the result has no mask (masked reads are materialized).
    pub fn plus(&self, other: &SampledFunction) -> SampledFunction {
        assert_eq!(self.values.len(), other.values.len());
        SampledFunction {
            values: (0..self.values.len())
                .map(|i| self.value(i) + other.value(i))
                .collect(),
            support: None,
        }
    }

    /// Subtracts a constant on the (masked) support only.
    pub fn minus_const(&self, c: f64) -> SampledFunction {
        SampledFunction {
            values: (0..self.values.len()).map(|i| self.value(i) - c).collect(),
            support: None,
        }
    }

    /// Materializes masked reads into plain values.
    pub fn materialized(&self) -> SampledFunction {
        SampledFunction {
            values: (0..self.values.len()).map(|i| self.value(i)).collect(),
            support: None,
        }
    }
}

/// Distance-sorted view of the cloud around one center, trimmed to `< cap`.
///
/// Entries are sorted by `(distance, id)`. A realizable ball of the sweep is
/// any prefix that ends just before a strict increase of the distance; the
/// prefix `{rho < r}` is realized by every radius in `(d_last, next_d]`.
pub struct Sweep {
    pub center: PointId,
    pub cap: f64,
    /// `(distance, id)` sorted ascending; always starts with `(0, center)`.
    pub entries: Vec<(f64, PointId)>,
}

/// One realizable ball inside a sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepBall {
    /// Entries `0..end` of the sweep form the ball.
    pub end: usize,
    /// A radius realizing it: the next distinct distance, capped.
    pub radius: f64,
}

impl Sweep {
    /// Enumerates the realizable balls: one per distinct distance value.
    pub fn balls(&self) -> Vec<SweepBall> {
        let mut out = Vec::new();
        let n = self.entries.len();
        let mut i = 0;
        while i < n {
            let d = self.entries[i].0;
            let mut j = i + 1;
            while j < n && self.entries[j].0 == d {
                j += 1;
            }
            let radius = if j < n { self.entries[j].0 } else { self.cap };
            out.push(SweepBall { end: j, radius });
            i = j;
        }
        out
    }
}

/// A point cloud together with its local structure. The distance cache is
/// optional; with it, `rho` lookups are O(1) at O(n^2) memory.
pub struct Space {
    cloud: PointCloud,
    structure: LocalStructure,
    cache: Option<Vec<f64>>,
    min_pos_dist: OnceLock<f64>,
    total_weight: f64,
}

impl Space {
    pub fn new(cloud: PointCloud, structure: LocalStructure) -> Result<Self> {
        structure.validate(cloud.len())?;
        let total_weight = {
            let mut acc = KahanSum::new();
            for &w in cloud.weights() {
                acc.add(w);
            }
            acc.value()
        };
        Ok(Self {
            cloud,
            structure,
            cache: None,
            min_pos_dist: OnceLock::new(),
            total_weight,
        })
    }

    /// Builds the dense `n x n` distance cache. Intended for `n <= 8192`.
    pub fn with_dense_cache(mut self) -> Self {
        let n = self.cloud.len();
        let rho = &self.structure.rho;
        let mut cache = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = rho.eval(self.cloud.coords(i), self.cloud.coords(j));
                cache[i * n + j] = d;
                cache[j * n + i] = d;
            }
        }
        self.cache = Some(cache);
        self
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn structure(&self) -> &LocalStructure {
        &self.structure
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Number of levels in the exhaustion.
    pub fn depth(&self) -> usize {
        self.structure.levels.len()
    }

    /// The 1-based level `n`.
    pub fn level(&self, n: usize) -> Result<&Level> {
        if n == 0 || n > self.structure.levels.len() {
            return Err(invalid(format!(
                "level {n} out of range 1..={}",
                self.structure.levels.len()
            )));
        }
        Ok(&self.structure.levels[n - 1])
    }

    pub fn check_id(&self, id: PointId) -> Result<()> {
        if id >= self.cloud.len() {
            return Err(Error::UnknownId(id));
        }
        Ok(())
    }

    /// Quasi-distance between two sample points.
    #[inline]
    pub fn rho(&self, i: PointId, j: PointId) -> f64 {
        match &self.cache {
            Some(c) => c[i * self.cloud.len() + j],
            None => self
                .structure
                .rho
                .eval(self.cloud.coords(i), self.cloud.coords(j)),
        }
    }

    /// Quasi-distance from a sample point to an arbitrary coordinate tuple.
    pub fn rho_to_coords(&self, i: PointId, coords: &[f64]) -> f64 {
        self.structure.rho.eval(self.cloud.coords(i), coords)
    }

    /// Strict ball `{y : rho(center, y) < r}` as a sorted id set.
    pub fn ball(&self, center: PointId, r: f64) -> Result<PointSet> {
        self.check_id(center)?;
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid(format!("ball radius must be positive, got {r}")));
        }
        let mut ids = Vec::new();
        for j in 0..self.cloud.len() {
            if self.rho(center, j) < r {
                ids.push(j);
            }
        }
        Ok(PointSet::from_sorted(ids))
    }

    /// `{x : rho(x, y) < r for some y in set}`.
    pub fn enlargement(&self, set: &PointSet, r: f64) -> PointSet {
        let mut ids = Vec::new();
        'point: for x in 0..self.cloud.len() {
            for y in set.iter() {
                if self.rho(x, y) < r {
                    ids.push(x);
                    continue 'point;
                }
            }
        }
        PointSet::from_sorted(ids)
    }

    /// Weighted measure of an id set.
    pub fn measure(&self, ids: &PointSet) -> f64 {
        let mut acc = KahanSum::new();
        for id in ids.iter() {
            acc.add(self.cloud.weight(id));
        }
        acc.value()
    }

    /// Weighted average of `f` over `ids`; masked ids contribute value zero
    /// at full weight. Errors on an empty or zero-measure set.
    pub fn average(&self, f: &SampledFunction, ids: &PointSet) -> Result<f64> {
        if ids.is_empty() {
            return Err(Error::ZeroMeasure("average over empty set".into()));
        }
        let mut num = KahanSum::new();
        let mut den = KahanSum::new();
        for id in ids.iter() {
            let w = self.cloud.weight(id);
            num.add(w * f.value(id));
            den.add(w);
        }
        let d = den.value();
        if !(d > 0.0) {
            return Err(Error::ZeroMeasure("set has zero measure".into()));
        }
        Ok(num.value() / d)
    }

    /// Weighted average of `|f - c|` over `ids`.
    pub fn oscillation_around(&self, f: &SampledFunction, ids: &PointSet, c: f64) -> Result<f64> {
        if ids.is_empty() {
            return Err(Error::ZeroMeasure("oscillation over empty set".into()));
        }
        let mut num = KahanSum::new();
        let mut den = KahanSum::new();
        for id in ids.iter() {
            let w = self.cloud.weight(id);
            num.add(w * (f.value(id) - c).abs());
            den.add(w);
        }
        Ok(num.value() / den.value())
    }

    /// Distance-sorted neighbors of `center` with `rho < cap`.
    pub fn sweep(&self, center: PointId, cap: f64) -> Sweep {
        let mut entries: Vec<(f64, PointId)> = Vec::new();
        for j in 0..self.cloud.len() {
            let d = self.rho(center, j);
            if d < cap {
                entries.push((d, j));
            }
        }
        entries.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Sweep {
            center,
            cap,
            entries,
        }
    }

    /// Smallest positive pairwise distance in the cloud (cached).
    pub fn min_positive_distance(&self) -> f64 {
        *self.min_pos_dist.get_or_init(|| {
            let n = self.cloud.len();
            let mut best = f64::INFINITY;
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = self.rho(i, j);
                    if d > 0.0 && d < best {
                        best = d;
                    }
                }
            }
            best
        })
    }

    /// Largest pairwise distance in the cloud.
    pub fn diameter(&self) -> f64 {
        let n = self.cloud.len();
        let mut best = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.rho(i, j);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    /// The sample point nearest to a coordinate tuple; ties break to the
    /// smaller id.
    pub fn nearest_point(&self, coords: &[f64]) -> Result<PointId> {
        if coords.len() != self.cloud.dim() {
            return Err(invalid(format!(
                "coordinate tuple of length {} in a {}-dimensional cloud",
                coords.len(),
                self.cloud.dim()
            )));
        }
        let mut best = (f64::INFINITY, 0usize);
        for i in 0..self.cloud.len() {
            let d = self.rho_to_coords(i, coords);
            if d < best.0 {
                best = (d, i);
            }
        }
        Ok(best.1)
    }

    /// Validates that `center` lies in level `n` and `r` does not exceed
    /// `cap`; shared precondition of the scanning operators.
    pub(crate) fn require_admissible(
        &self,
        center: PointId,
        r: f64,
        n: usize,
        cap: f64,
        what: &str,
    ) -> Result<()> {
        let lv = self.level(n)?;
        if !lv.members.contains(center) {
            return Err(precondition(format!(
                "{what}: center {center} is not in level {n}"
            )));
        }
        if !(r > 0.0) || r > cap * (1.0 + 1e-12) {
            return Err(precondition(format!(
                "{what}: radius {r} outside (0, {cap}]"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{instantiate, Builtin};

    fn tiny() -> Space {
        instantiate(&Builtin::Tiny4).unwrap()
    }

    #[test]
    fn tiny4_ball_measure_average() {
        let sp = tiny();
        // points 0.1 0.3 0.5 0.7, weights 0.1 0.2 0.3 0.4
        let b = sp.ball(1, 0.25).unwrap();
        assert_eq!(b.as_slice(), &[0, 1, 2]); // strict: |0.7-0.3| = 0.4 excluded
        let e = PointSet::from_vec(vec![1, 2]);
        assert_eq!(sp.measure(&e), 0.5);
        let f = SampledFunction::from_fn(4, |i| sp.cloud().coords(i)[0]);
        let avg = sp.average(&f, &e).unwrap();
        // (0.2*0.3 + 0.3*0.5) / 0.5 = 0.42
        assert!((avg - 0.42).abs() < 1e-15);
    }

    #[test]
    fn strict_ball_boundary() {
        let sp = tiny();
        // radius exactly at a realized distance excludes the boundary point
        let d = sp.rho(0, 1);
        let b = sp.ball(0, d).unwrap();
        assert_eq!(b.as_slice(), &[0]);
        let b = sp.ball(0, d.next_up()).unwrap();
        assert_eq!(b.as_slice(), &[0, 1]);
    }

    #[test]
    fn ball_rejects_bad_input() {
        let sp = tiny();
        assert!(matches!(sp.ball(9, 0.1), Err(Error::UnknownId(9))));
        assert!(sp.ball(0, 0.0).is_err());
        assert!(sp.ball(0, -1.0).is_err());
    }

    #[test]
    fn average_over_empty_is_zero_measure_error() {
        let sp = tiny();
        let f = SampledFunction::from_fn(4, |_| 1.0);
        assert!(matches!(
            sp.average(&f, &PointSet::new()),
            Err(Error::ZeroMeasure(_))
        ));
    }

    #[test]
    fn support_mask_reads_zero_at_full_weight() {
        let sp = tiny();
        let f = SampledFunction::from_fn(4, |_| 2.0).restricted(&PointSet::from_vec(vec![1]));
        assert_eq!(f.value(0), 0.0);
        assert_eq!(f.value(1), 2.0);
        let all = PointSet::universe(4);
        // masked ids contribute value 0 but their weight stays: 2*0.2 / 1.0
        let avg = sp.average(&f, &all).unwrap();
        assert!((avg - 0.4).abs() < 1e-15);
    }

    #[test]
    fn sweep_prefixes_match_balls() {
        let sp = tiny();
        let sw = sp.sweep(1, 0.45);
        let balls = sw.balls();
        // distances from 0.3: 0 (self), then 0.1 and 0.5 at two distances a
        // hair either side of 0.2 (0.3 is not exact in binary), then 0.7
        assert_eq!(balls.len(), 4);
        for b in &balls {
            let ids: PointSet = sw.entries[..b.end].iter().map(|e| e.1).collect();
            let direct = sp.ball(1, b.radius).unwrap();
            assert_eq!(ids.as_slice(), direct.as_slice());
        }
    }

    #[test]
    fn dense_cache_matches_direct() {
        let sp = tiny();
        let cached = instantiate(&Builtin::Tiny4).unwrap().with_dense_cache();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(sp.rho(i, j), cached.rho(i, j));
            }
        }
    }
}
