//! Deterministic channel generators for tests and experiments.
//!
//! Reproducibility contract: all randomness flows through [`SplitMix64`]
//! (Steele, Lea & Flood's 64-bit generator with the standard constants), and
//! each output symbol draws from its own stream derived from `(seed, y)`.
//! Identical specs therefore produce bit-identical joints, independent of
//! parallelism.

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::par;

/// Hard cap on generated output-alphabet sizes.
pub const MAX_GENERATED_OUTPUTS: u128 = 4_000_000;

/// SplitMix64: state advances by the golden-ratio increment, output is the
/// mixed state. Portable across languages; documented here so seeds can be
/// reproduced outside this crate.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in (0, 1]: the top 53 bits of the next output, plus one,
    /// scaled by 2^-53.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn next_unit_open(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }
}

/// Stream for output symbol `y` under `seed`.
fn output_stream(seed: u64, y: usize) -> SplitMix64 {
    SplitMix64::new(seed ^ (y as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Channel whose outputs are all length-`q` compositions of `m` (the integer
/// grid on the probability simplex): output `a = (a_1..a_q)` has posterior
/// `a / m` and uniform marginal mass. The posteriors fill the simplex evenly,
/// which makes the channel adversarial for alphabet reduction.
pub fn grid_channel(q: usize, m: usize) -> Result<JointDistribution> {
    assert!(q >= 2, "grid channel needs q >= 2");
    let count = compositions(m as u128, q as u128);
    if count > MAX_GENERATED_OUTPUTS {
        return Err(Error::TooLarge {
            requested: count,
            cap: MAX_GENERATED_OUTPUTS,
        });
    }
    let n = count as usize;
    let mut labels = Vec::with_capacity(n);
    let mut cols: Vec<Vec<usize>> = Vec::with_capacity(n);
    enumerate_compositions(m, q, &mut Vec::with_capacity(q), &mut |a| {
        labels.push(
            a.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("-"),
        );
        cols.push(a.to_vec());
    });
    debug_assert_eq!(cols.len(), n);
    let scale = 1.0 / (n as f64 * m as f64);
    let rows: Vec<Vec<f64>> = (0..q)
        .map(|x| cols.iter().map(|a| a[x] as f64 * scale).collect())
        .collect();
    Ok(JointDistribution::new(labels, rows)?.0)
}

/// Number of length-`q` compositions of `m`: C(m + q - 1, q - 1).
pub fn compositions(m: u128, q: u128) -> u128 {
    let mut result: u128 = 1;
    for i in 0..(q - 1) {
        result = result.saturating_mul(m + q - 1 - i) / (i + 1);
    }
    result
}

fn enumerate_compositions(m: usize, parts: usize, prefix: &mut Vec<usize>, emit: &mut impl FnMut(&[usize])) {
    if parts == 1 {
        prefix.push(m);
        emit(prefix);
        prefix.pop();
        return;
    }
    for v in 0..=m {
        prefix.push(v);
        enumerate_compositions(m - v, parts - 1, prefix, emit);
        prefix.pop();
    }
}

/// Random channel: every output has mass 1/n and a posterior drawn uniformly
/// on the simplex (normalized exponentials). Deterministic per `(q, n, seed)`
/// and independent of parallelism because each output uses its own stream.
pub fn random_channel(q: usize, n: usize, seed: u64) -> JointDistribution {
    assert!(q >= 2 && n >= 1);
    let cols: Vec<Vec<f64>> = par::map_range(n, |y| {
        let mut rng = output_stream(seed, y);
        let mut exps: Vec<f64> = (0..q).map(|_| -rng.next_unit().ln()).collect();
        let total: f64 = exps.iter().sum();
        if total <= 0.0 {
            // all draws hit ln(1) = 0; fall back to a uniform posterior
            exps = vec![1.0; q];
        }
        let total: f64 = exps.iter().sum();
        let scale = 1.0 / (n as f64 * total);
        exps.iter().map(|e| e * scale).collect()
    });
    let labels = (1..=n).map(|i| format!("y{i}")).collect();
    let rows: Vec<Vec<f64>> = (0..q).map(|x| cols.iter().map(|c| c[x]).collect()).collect();
    JointDistribution::new(labels, rows)
        .expect("generated channel is valid")
        .0
}

/// Built-in reference channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedChannel {
    /// Identity channel under a uniform input: I = ln q.
    Noiseless,
    /// Single output: I = 0.
    Useless,
}

pub fn named_channel(kind: NamedChannel, q: usize) -> JointDistribution {
    assert!(q >= 2);
    match kind {
        NamedChannel::Noiseless => {
            let rows: Vec<Vec<f64>> = (0..q)
                .map(|x| (0..q).map(|y| if x == y { 1.0 / q as f64 } else { 0.0 }).collect())
                .collect();
            let labels = (1..=q).map(|i| format!("y{i}")).collect();
            JointDistribution::new(labels, rows).expect("valid").0
        }
        NamedChannel::Useless => {
            let rows: Vec<Vec<f64>> = (0..q).map(|_| vec![1.0 / q as f64]).collect();
            JointDistribution::new(vec!["y1".into()], rows).expect("valid").0
        }
    }
}

/// Parseable description of a generated (or file-backed) channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// `hard-grid:q:m` (also accepted: `grid:q:m`)
    Grid { q: usize, m: usize },
    /// `random:q:n:seed`
    Random { q: usize, n: usize, seed: u64 },
    /// `noiseless:q`
    Noiseless { q: usize },
    /// `useless:q`
    Useless { q: usize },
}

impl GeneratorSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::BadGeneratorSpec(spec.to_string());
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["hard-grid", q, m] | ["grid", q, m] | ["hard", q, m] => Ok(Self::Grid {
                q: num(q)?,
                m: num(m)?,
            }),
            ["random", q, n, seed] => Ok(Self::Random {
                q: num(q)?,
                n: num(n)?,
                seed: seed.parse().map_err(|_| bad())?,
            }),
            ["noiseless", q] => Ok(Self::Noiseless { q: num(q)? }),
            ["useless", q] => Ok(Self::Useless { q: num(q)? }),
            _ => Err(bad()),
        }
    }

    pub fn generate(&self) -> Result<JointDistribution> {
        match *self {
            Self::Grid { q, m } => grid_channel(q, m),
            Self::Random { q, n, seed } => Ok(random_channel(q, n, seed)),
            Self::Noiseless { q } => Ok(named_channel(NamedChannel::Noiseless, q)),
            Self::Useless { q } => Ok(named_channel(NamedChannel::Useless, q)),
        }
    }
}

impl std::fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Grid { q, m } => write!(f, "hard-grid:{q}:{m}"),
            Self::Random { q, n, seed } => write!(f, "random:{q}:{n}:{seed}"),
            Self::Noiseless { q } => write!(f, "noiseless:{q}"),
            Self::Useless { q } => write!(f, "useless:{q}"),
        }
    }
}
