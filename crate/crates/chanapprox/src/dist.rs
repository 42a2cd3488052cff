//! Finite joint input/output distributions and the information measures on
//! them.
//!
//! A [`JointDistribution`] stores P(X, Y) for an input alphabet of `q >= 2`
//! letters and a finite set of labeled outputs. Construction validates,
//! prunes zero-probability letters and outputs, and renormalizes, so every
//! value of the type satisfies: all entries >= 0, total mass 1 (within
//! 1e-12), and strictly positive input and output marginals.
//!
//! All information quantities are in nats; conversion to bits happens only
//! at the presentation layer.

use crate::error::{Error, Result};
use crate::numerics;

/// Tolerance accepted on sums of externally supplied probability vectors.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Outputs whose posteriors differ by at most this much are coalesced when
/// building a [`BinaryPosteriorChannel`]; merging equal posteriors costs no
/// mutual information.
pub const COALESCE_TOLERANCE: f64 = 1e-14;

/// Record of which input letters / output labels were dropped during
/// construction because they carried no probability.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PruneReport {
    /// 0-based indices of removed input letters (in the caller's numbering).
    pub inputs: Vec<usize>,
    /// Labels of removed outputs.
    pub outputs: Vec<String>,
}

impl PruneReport {
    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty() && self.outputs.is_empty()
    }
}

/// A validated joint distribution P(X, Y) over `q` input letters and `n`
/// labeled outputs, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    q: usize,
    n: usize,
    labels: Vec<String>,
    mass: Vec<f64>,
}

impl JointDistribution {
    /// Validate, prune and renormalize a raw mass matrix (rows = input
    /// letters). Entries in `[-1e-12, 0)` are clamped to zero; anything more
    /// negative is an error.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<(Self, PruneReport)> {
        if rows.len() < 2 {
            return Err(Error::DegenerateInput);
        }
        let n = labels.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::FileFormat(format!(
                "expected {n} entries per row to match the label list"
            )));
        }
        let mut mass = Vec::with_capacity(rows.len() * n);
        for (x, row) in rows.iter().enumerate() {
            for (y, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: x, col: y });
                }
                if v < -1e-12 {
                    return Err(Error::NegativeEntry {
                        row: x,
                        col: y,
                        value: v,
                    });
                }
                mass.push(v.max(0.0));
            }
        }
        let total = numerics::sum(mass.iter().copied());
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::NonStochastic { sum: total });
        }
        Self::prune_and_normalize(rows.len(), n, labels, mass)
    }

    /// Build the joint P(x, y) = P_X(x) * W(y | x) from an input distribution
    /// and a row-stochastic channel matrix. Outputs are labeled "y1".."yn".
    pub fn from_input_and_channel(
        input: &[f64],
        channel: &[Vec<f64>],
    ) -> Result<(Self, PruneReport)> {
        if input.len() < 2 || channel.len() != input.len() {
            return Err(Error::DegenerateInput);
        }
        let n = channel[0].len();
        check_vector(input, usize::MAX)?;
        for (x, row) in channel.iter().enumerate() {
            if row.len() != n {
                return Err(Error::FileFormat(
                    "channel rows have inconsistent lengths".into(),
                ));
            }
            check_vector(row, x)?;
        }
        let labels = (1..=n).map(|i| format!("y{i}")).collect();
        let rows = input
            .iter()
            .zip(channel)
            .map(|(&px, row)| row.iter().map(|&w| px * w).collect())
            .collect();
        Self::new(labels, rows)
    }

    fn prune_and_normalize(
        q: usize,
        n: usize,
        labels: Vec<String>,
        mass: Vec<f64>,
    ) -> Result<(Self, PruneReport)> {
        let row_mass: Vec<f64> = (0..q)
            .map(|x| numerics::sum(mass[x * n..(x + 1) * n].iter().copied()))
            .collect();
        let col_mass: Vec<f64> =
            (0..n).map(|y| numerics::sum((0..q).map(|x| mass[x * n + y]))).collect();
        let keep_rows: Vec<usize> = (0..q).filter(|&x| row_mass[x] > 0.0).collect();
        let keep_cols: Vec<usize> = (0..n).filter(|&y| col_mass[y] > 0.0).collect();
        if keep_rows.len() < 2 {
            return Err(Error::DegenerateInput);
        }
        let report = PruneReport {
            inputs: (0..q).filter(|&x| row_mass[x] <= 0.0).collect(),
            outputs: (0..n)
                .filter(|&y| col_mass[y] <= 0.0)
                .map(|y| labels[y].clone())
                .collect(),
        };
        let mut pruned = Vec::with_capacity(keep_rows.len() * keep_cols.len());
        for &x in &keep_rows {
            for &y in &keep_cols {
                pruned.push(mass[x * n + y]);
            }
        }
        let total = numerics::sum(pruned.iter().copied());
        for v in &mut pruned {
            *v /= total;
        }
        let labels = keep_cols.iter().map(|&y| labels[y].clone()).collect();
        Ok((
            Self {
                q: keep_rows.len(),
                n: keep_cols.len(),
                labels,
                mass: pruned,
            },
            report,
        ))
    }

    /// Internal constructor for matrices already known to be valid
    /// (normalized, positive marginals). Skips pruning and renormalization so
    /// exact values flow through unchanged.
    pub(crate) fn from_raw_validated(labels: Vec<String>, q: usize, mass: Vec<f64>) -> Self {
        let n = labels.len();
        debug_assert_eq!(mass.len(), q * n);
        debug_assert!(
            (numerics::sum(mass.iter().copied()) - 1.0).abs() < 1e-6,
            "raw joint not normalized"
        );
        Self { q, n, labels, mass }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of output symbols.
    pub fn outputs(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn mass(&self, x: usize, y: usize) -> f64 {
        self.mass[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.mass[x * self.n..(x + 1) * self.n]
    }

    /// P_X, by compensated column sums.
    pub fn input_marginal(&self) -> Vec<f64> {
        (0..self.q)
            .map(|x| numerics::sum(self.row(x).iter().copied()))
            .collect()
    }

    /// P_Y, by compensated row sums.
    pub fn output_marginal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|y| numerics::sum((0..self.q).map(|x| self.mass(x, y))))
            .collect()
    }

    pub fn total(&self) -> f64 {
        numerics::sum(self.mass.iter().copied())
    }

    /// I(X; Y) in nats, via H(X) + H(Y) - H(X, Y) with compensated entropy
    /// sums and 0 ln 0 = 0. Clamped at zero.
    pub fn mutual_information(&self) -> f64 {
        let hx = numerics::entropy(self.input_marginal());
        let hy = numerics::entropy(self.output_marginal());
        let hxy = numerics::entropy(self.mass.iter().copied());
        (hx + hy - hxy).max(0.0)
    }

    /// Binary-input posterior view with equal posteriors coalesced.
    pub fn binary_view(&self) -> Result<BinaryPosteriorChannel> {
        BinaryPosteriorChannel::from_joint(self, true)
    }

    /// Binary-input posterior view keeping every output separate.
    pub fn binary_view_uncoalesced(&self) -> Result<BinaryPosteriorChannel> {
        BinaryPosteriorChannel::from_joint(self, false)
    }

    /// CSV export: header `x,y,p`, one row per positive entry, x 1-based.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,p\n");
        for x in 0..self.q {
            for y in 0..self.n {
                let p = self.mass(x, y);
                if p > 0.0 {
                    out.push_str(&format!("{},{},{}\n", x + 1, self.labels[y], p));
                }
            }
        }
        out
    }
}

/// Free-function form of [`JointDistribution::mutual_information`].
pub fn mutual_information(joint: &JointDistribution) -> f64 {
    joint.mutual_information()
}

/// Binary entropy in nats, endpoints exactly zero.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(p));
    }
    Ok(numerics::h2(p))
}

/// Binary KL divergence d(p || r) = p ln(p/r) + (1-p) ln((1-p)/(1-r)) in
/// nats. Infinite cases (p > 0 with r = 0, or p < 1 with r = 1) are reported
/// as a distinct error rather than returning infinity.
pub fn binary_kl(p: f64, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(p));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::OutOfRange(r));
    }
    if (p > 0.0 && r == 0.0) || (p < 1.0 && r == 1.0) {
        return Err(Error::DivergenceInfinite { p, r });
    }
    let a = if p == 0.0 { 0.0 } else { p * (p / r).ln() };
    let b = if p == 1.0 {
        0.0
    } else {
        (1.0 - p) * ((1.0 - p) / (1.0 - r)).ln()
    };
    Ok((a + b).max(0.0))
}

/// The binary-input channel seen through its per-output posterior
/// P(X = first letter | Y = y), sorted ascending by posterior with ties
/// broken by original output index. Outputs with posteriors equal within
/// [`COALESCE_TOLERANCE`] may be merged into one entry; the entry-to-source
/// map is stored flat (offsets into one index array) so views of large
/// alphabets stay allocation-light.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryPosteriorChannel {
    masses: Vec<f64>,
    posteriors: Vec<f64>,
    src_idx: Vec<u32>,
    src_off: Vec<u32>,
    entry_of: Vec<u32>,
}

impl BinaryPosteriorChannel {
    fn from_joint(joint: &JointDistribution, coalesce: bool) -> Result<Self> {
        if joint.q() != 2 {
            return Err(Error::NotBinary(joint.q()));
        }
        let n = joint.outputs();
        let stats: Vec<(f64, f64)> = (0..n)
            .map(|y| {
                let top = joint.mass(0, y);
                let mass = top + joint.mass(1, y);
                (mass, top / mass)
            })
            .collect();
        // sorting (posterior, index) pairs keeps comparisons local
        let mut order: Vec<(f64, u32)> = stats
            .iter()
            .enumerate()
            .map(|(y, &(_, p))| (p, y as u32))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

        // group boundaries: sorted runs whose posteriors chain within
        // tolerance coalesce into one entry
        let mut starts = Vec::new();
        for k in 0..n {
            if k == 0 || !coalesce || (order[k].0 - order[k - 1].0).abs() > COALESCE_TOLERANCE {
                starts.push(k);
            }
        }
        let groups = starts.len();
        let mut masses = Vec::with_capacity(groups);
        let mut posteriors = Vec::with_capacity(groups);
        let mut src_off = Vec::with_capacity(groups + 1);
        let mut entry_of = vec![0u32; n];
        for (g, &lo) in starts.iter().enumerate() {
            let hi = if g + 1 < groups { starts[g + 1] } else { n };
            src_off.push(lo as u32);
            if hi - lo == 1 {
                let (m, p) = stats[order[lo].1 as usize];
                masses.push(m);
                posteriors.push(p);
            } else {
                // merged groups take the mass-weighted mean posterior
                let mut m = 0.0;
                let mut weighted = 0.0;
                for &(_, y) in &order[lo..hi] {
                    let (ym, yp) = stats[y as usize];
                    m += ym;
                    weighted += ym * yp;
                }
                masses.push(m);
                posteriors.push(weighted / m);
            }
            for &(_, y) in &order[lo..hi] {
                entry_of[y as usize] = g as u32;
            }
        }
        src_off.push(n as u32);
        let src_idx: Vec<u32> = order.iter().map(|&(_, y)| y).collect();
        Ok(Self {
            masses,
            posteriors,
            src_idx,
            src_off,
            entry_of,
        })
    }

    /// Build a view directly from (mass, posterior) pairs; test and
    /// generator helper. Pairs are sorted and validated but not coalesced.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let n = pairs.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| pairs[a].1.total_cmp(&pairs[b].1).then_with(|| a.cmp(&b)));
        let mut masses = Vec::with_capacity(n);
        let mut posteriors = Vec::with_capacity(n);
        let mut entry_of = vec![0u32; n];
        for (e, &y) in order.iter().enumerate() {
            let (m, p) = pairs[y];
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::OutOfRange(p));
            }
            if m <= 0.0 {
                return Err(Error::ZeroMass);
            }
            masses.push(m);
            posteriors.push(p);
            entry_of[y] = e as u32;
        }
        Ok(Self {
            masses,
            posteriors,
            src_idx: order.iter().map(|&y| y as u32).collect(),
            src_off: (0..=n as u32).collect(),
            entry_of,
        })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn posteriors(&self) -> &[f64] {
        &self.posteriors
    }

    pub fn mass(&self, entry: usize) -> f64 {
        self.masses[entry]
    }

    pub fn posterior(&self, entry: usize) -> f64 {
        self.posteriors[entry]
    }

    /// Original output indices folded into `entry`.
    pub fn sources(&self, entry: usize) -> &[u32] {
        &self.src_idx[self.src_off[entry] as usize..self.src_off[entry + 1] as usize]
    }

    /// Number of original outputs this view was built from.
    pub fn source_len(&self) -> usize {
        self.entry_of.len()
    }

    /// Entry covering original output `y`.
    pub fn entry_of(&self, y: usize) -> usize {
        self.entry_of[y] as usize
    }

    /// I(X; Y) of the view in nats.
    pub fn mutual_information(&self) -> f64 {
        numerics::binary_view_mi(&self.masses, &self.posteriors)
    }

    /// Rebuild a 2-row joint from the view entries (labels `z1..zk`).
    pub fn to_joint(&self) -> JointDistribution {
        let k = self.len();
        let labels = (1..=k).map(|i| format!("z{i}")).collect();
        let mut mass = vec![0.0; 2 * k];
        for e in 0..k {
            mass[e] = self.masses[e] * self.posteriors[e];
            mass[k + e] = self.masses[e] * (1.0 - self.posteriors[e]);
        }
        JointDistribution::from_raw_validated(labels, 2, mass)
    }
}

fn check_vector(v: &[f64], row: usize) -> Result<()> {
    for (col, &x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
        if x < -1e-12 {
            return Err(Error::NegativeEntry { row, col, value: x });
        }
    }
    let sum = numerics::sum(v.iter().copied());
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::NonStochastic { sum });
    }
    Ok(())
}

/// Entropy of a probability vector in nats (compensated, 0 ln 0 = 0).
pub fn entropy(mass: &[f64]) -> f64 {
    numerics::entropy(mass.iter().copied())
}

/// Conditional entropy H(X | Y) of a joint, in nats.
pub fn conditional_input_entropy(joint: &JointDistribution) -> f64 {
    let hxy = numerics::entropy((0..joint.q()).flat_map(|x| joint.row(x).iter().copied()));
    let hy = numerics::entropy(joint.output_marginal());
    hxy - hy
}
