//! Shared numeric kernels: compensated summation, binary entropy and the
//! concavity gap of the binary entropy function.
//!
//! Everything here works in nats.

/// Neumaier-compensated accumulator. Keeps long sums accurate to a few ulp
/// independently of length, which the 1e-12-level invariants rely on.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Accum {
    sum: f64,
    comp: f64,
}

impl Accum {
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

pub(crate) fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Accum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[inline]
fn neg_x_ln_x(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        -t * t.ln()
    }
}

/// Binary entropy h(p) = -p ln p - (1-p) ln(1-p), exactly 0 at the endpoints.
///
/// The two terms are accumulated smaller-argument first so that h(p) and
/// h(1-p) evaluate identically whenever both arguments are representable.
#[inline]
pub(crate) fn h2(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p), "entropy argument {p} out of range");
    let r = 1.0 - p;
    let (lo, hi) = if p <= r { (p, r) } else { (r, p) };
    neg_x_ln_x(lo) + neg_x_ln_x(hi)
}

/// Entropy of a nonnegative vector (zero terms skipped), compensated.
pub(crate) fn entropy(mass: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Accum::new();
    for m in mass {
        acc.add(neg_x_ln_x(m));
    }
    acc.value()
}

/// Binary KL divergence d(p||m) with the difference `p - m` supplied in a
/// cancellation-free form. Requires 0 < m < 1.
#[inline]
fn kl_with_diff(p: f64, m: f64, p_minus_m: f64) -> f64 {
    let a = if p == 0.0 {
        0.0
    } else {
        p * (p_minus_m / m).ln_1p()
    };
    let b = if p == 1.0 {
        0.0
    } else {
        (1.0 - p) * (-p_minus_m / (1.0 - m)).ln_1p()
    };
    a + b
}

/// Concavity gap of the binary entropy:
///
/// h(w·p0 + (1-w)·p1) - w·h(p0) - (1-w)·h(p1)
///
/// evaluated through its divergence identity
/// w·d(p0||m) + (1-w)·d(p1||m), m = w·p0 + (1-w)·p1,
/// which stays accurate to relative precision even when p0 and p1 are nearly
/// equal (the direct three-entropy difference loses all digits there).
/// Accepts the pair in either order; always >= 0.
pub(crate) fn concavity_gap_raw(p0: f64, p1: f64, w: f64) -> f64 {
    if p0 == p1 || w == 0.0 || w == 1.0 {
        return 0.0;
    }
    if p0 > p1 {
        return concavity_gap_raw(p1, p0, 1.0 - w);
    }
    let d = p1 - p0;
    let m = w * p0 + (1.0 - w) * p1;
    let d0 = -(1.0 - w) * d; // p0 - m, computed without cancellation
    let d1 = w * d; // p1 - m
    let gap = w * kl_with_diff(p0, m, d0) + (1.0 - w) * kl_with_diff(p1, m, d1);
    gap.max(0.0)
}

/// Mutual information of a binary-input channel given per-output masses and
/// posteriors: h(sum pi*p) - sum pi*h(p). Clamped at 0.
pub(crate) fn binary_view_mi(masses: &[f64], posteriors: &[f64]) -> f64 {
    debug_assert_eq!(masses.len(), posteriors.len());
    let mut mean = Accum::new();
    let mut cond = Accum::new();
    for (&m, &p) in masses.iter().zip(posteriors) {
        mean.add(m * p);
        cond.add(m * h2(p));
    }
    let mean = mean.value().clamp(0.0, 1.0);
    (h2(mean) - cond.value()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn entropy_direct_values() {
        assert_relative_eq!(h2(0.5), std::f64::consts::LN_2, max_relative = 1e-15);
        assert_eq!(h2(0.0), 0.0);
        assert_eq!(h2(1.0), 0.0);
        assert_relative_eq!(h2(0.2), 0.5004024235381879, max_relative = 1e-14);
    }

    #[test]
    fn entropy_symmetric_on_representable_complements() {
        for p in [0.0, 0.125, 0.25, 0.375, 0.5, 0.6875] {
            assert_eq!(h2(p).to_bits(), h2(1.0 - p).to_bits());
        }
    }

    #[test]
    fn gap_matches_three_entropy_difference_when_well_separated() {
        let direct = |p0: f64, p1: f64, w: f64| {
            h2(w * p0 + (1.0 - w) * p1) - w * h2(p0) - (1.0 - w) * h2(p1)
        };
        for (p0, p1, w) in [
            (0.2, 0.8, 0.5),
            (0.0, 1.0, 0.5),
            (0.1, 0.35, 0.9),
            (0.01, 0.99, 0.25),
        ] {
            assert_relative_eq!(
                concavity_gap_raw(p0, p1, w),
                direct(p0, p1, w),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn gap_is_nonnegative_and_symmetric_in_argument_order() {
        let g1 = concavity_gap_raw(0.3, 0.7, 0.25);
        let g2 = concavity_gap_raw(0.7, 0.3, 0.75);
        assert_relative_eq!(g1, g2, epsilon = 1e-16);
        assert!(g1 >= 0.0);
        assert_eq!(concavity_gap_raw(0.4, 0.4, 0.3), 0.0);
    }

    #[test]
    fn gap_stays_accurate_for_near_equal_posteriors() {
        // quadratic regime: gap ~ w(1-w) d^2 / (2 m(1-m))
        let p0 = 0.5;
        let d = 1e-9;
        let g = concavity_gap_raw(p0, p0 + d, 0.5);
        let expect = 0.25 * d * d / (2.0 * 0.5 * 0.5);
        assert_relative_eq!(g, expect, max_relative = 1e-6);
    }

    #[test]
    fn compensated_sum_beats_naive_on_adversarial_input() {
        let mut acc = Accum::new();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-18);
        }
        acc.add(-1.0);
        assert_relative_eq!(acc.value(), 1e-15, max_relative = 1e-9);
    }
}
