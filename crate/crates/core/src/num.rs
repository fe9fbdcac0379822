//! Compensated summation and ulp-distance helpers.
//!
//! All weighted sums that feed measured constants go through Neumaier
//! compensation. The point is not raw accuracy but stability: both the fast
//! prefix-sum paths and their naive re-computation oracles add the same terms
//! in the same order with the same compensation, so they agree bit for bit,
//! and algebraic identities (like pulling a power-of-two factor out of a sum)
//! survive with at most a couple of ulps of drift.

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator of terms.
pub fn kahan_total(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for v in it {
        acc.add(v);
    }
    acc.value()
}

/// Maps a float to an integer so that consecutive representable values are
/// consecutive integers (standard order-preserving bit trick).
fn ordered_bits(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b < 0 {
        i64::MIN ^ b
    } else {
        b
    }
}

/// Distance in representable steps between two finite floats.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        // covers +0/-0
        return 0;
    }
    if !a.is_finite() || !b.is_finite() {
        return u64::MAX;
    }
    let (x, y) = (ordered_bits(a), ordered_bits(b));
    x.abs_diff(y)
}

/// `a <= b` up to `ulps` representable steps of slack.
pub fn approx_le(a: f64, b: f64, ulps: u64) -> bool {
    a <= b || ulp_distance(a, b) <= ulps
}

/// `a == b` up to `ulps` representable steps.
pub fn approx_eq(a: f64, b: f64, ulps: u64) -> bool {
    ulp_distance(a, b) <= ulps
}

/// `x^p` with an exact multiplication chain for small integer `p`; `powf`
/// otherwise. Integer exponents keep power-of-two scaling exact, which the
/// scale-invariance checks rely on.
pub fn fpow(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        return x;
    }
    if p.fract() == 0.0 && (2.0..=64.0).contains(&p) {
        let mut acc = 1.0;
        for _ in 0..p as u32 {
            acc *= x;
        }
        return acc;
    }
    x.powf(p)
}

/// `x^(1/p)`; square roots stay IEEE-exact rather than routing through
/// `powf`.
pub fn proot(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x.sqrt()
    } else {
        x.powf(1.0 / p)
    }
}

/// `count` geometrically spaced values from `lo` to `hi`, endpoints included.
/// Requires `0 < lo <= hi`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo, "geometric grid needs 0 < lo <= hi");
    if count <= 1 || lo == hi {
        return vec![lo];
    }
    let step = (hi / lo).powf(1.0 / (count - 1) as f64);
    let mut out: Vec<f64> = (0..count - 1).map(|i| lo * step.powi(i as i32)).collect();
    out.push(hi);
    out
}
