//! Reduction of a q-ary input alphabet to a chain of q-1 conditional binary
//! sub-problems via the one-hot encoding of the input letter, plus the
//! per-coordinate budget split.
//!
//! Letter `i` (1-based, i < q) maps to the coordinate vector with bit i set;
//! letter `q` maps to the all-zero vector. Coordinate `c` (0-based) then
//! carries the binary sub-problem "is the letter c, given no earlier letter
//! matched", whose joint with Y is the conditional distribution used by the
//! binary algorithms.

pub mod degrade;
pub mod upgrade;

pub use degrade::{apply_quantizer, degrade, OneHotDegradeResult};
pub use upgrade::{assemble_pstar, upgrade, verify_upgrade_consistency, ConsistencyReport, OneHotUpgradeResult};

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::numerics::{self, Accum};

/// One-hot encoding of `letter` (1-based, in `1..=q`) as a length `q-1` bit
/// vector; letter `q` is the all-zero vector.
pub fn one_hot(letter: usize, q: usize) -> Result<Vec<bool>> {
    if letter == 0 || letter > q {
        return Err(Error::OutOfRange(letter as f64));
    }
    Ok((1..q).map(|i| i == letter).collect())
}

/// Largest per-coordinate budget whose (q-1)-fold product stays within the
/// total output budget `l`: the integer floor of l^(1/(q-1)), computed with
/// exact integer power-and-compare (floating-point roots misround near
/// perfect powers).
pub fn coordinate_budget(l: usize, q: usize) -> usize {
    assert!(q >= 2 && l >= 1);
    if q == 2 {
        return l;
    }
    let fits = |candidate: usize| -> bool {
        let mut acc: usize = 1;
        for _ in 0..(q - 1) {
            match acc.checked_mul(candidate) {
                Some(v) if v <= l => acc = v,
                _ => return false,
            }
        }
        true
    };
    let mut est = (l as f64).powf(1.0 / (q - 1) as f64).round() as usize;
    est = est.max(1);
    while !fits(est) {
        est -= 1;
    }
    while fits(est + 1) {
        est += 1;
    }
    est
}

/// One conditional binary sub-problem: the joint over {letter matched, some
/// later letter matched} x Y, conditioned on no earlier letter matching.
#[derive(Debug, Clone)]
pub struct ChainLink {
    /// Binary joint; row 0 is "the letter for this coordinate", row 1 the
    /// remaining tail. Columns are the outputs with positive conditional
    /// probability.
    pub joint: JointDistribution,
    /// Probability of the conditioning event (no earlier letter).
    pub prefix_mass: f64,
    /// Source output index -> column of `joint`, None if the output has zero
    /// probability under the conditioning event.
    pub col_of: Vec<Option<usize>>,
}

/// The q-1 conditional binary sub-problems of a joint distribution.
#[derive(Debug, Clone)]
pub struct BinaryChain {
    pub links: Vec<ChainLink>,
    pub q: usize,
    pub source_outputs: usize,
}

/// Build the chain in O(q n) using suffix sums of the rows: the tail mass for
/// coordinate c at output y is the sum of rows c.. at y, so no subtraction
/// (and no cancellation) ever occurs, and the q = 2 chain equals the source
/// joint exactly.
pub fn binary_chain(joint: &JointDistribution) -> Result<BinaryChain> {
    let q = joint.q();
    let n = joint.outputs();
    // tails[c][y] = sum of rows c.. at y
    let mut tails: Vec<Vec<f64>> = vec![Vec::new(); q];
    tails[q - 1] = joint.row(q - 1).to_vec();
    for c in (0..q - 1).rev() {
        tails[c] = joint
            .row(c)
            .iter()
            .zip(&tails[c + 1])
            .map(|(&a, &b)| a + b)
            .collect();
    }
    let mut links = Vec::with_capacity(q - 1);
    for c in 0..q - 1 {
        let mut prefix = Accum::new();
        for &t in &tails[c] {
            prefix.add(t);
        }
        let prefix_mass = prefix.value();
        if prefix_mass <= 0.0 {
            return Err(Error::DegenerateTail(c));
        }
        let top_total = numerics::sum(joint.row(c).iter().copied());
        let tail_total = numerics::sum(tails[c + 1].iter().copied());
        if top_total <= 0.0 || tail_total <= 0.0 {
            // the coordinate's letter (or everything after it) never occurs
            return Err(Error::DegenerateTail(c));
        }
        let mut labels = Vec::new();
        let mut top = Vec::new();
        let mut bottom = Vec::new();
        let mut col_of = vec![None; n];
        for y in 0..n {
            if tails[c][y] > 0.0 {
                col_of[y] = Some(labels.len());
                labels.push(joint.labels()[y].clone());
                top.push(joint.mass(c, y) / prefix_mass);
                bottom.push(tails[c + 1][y] / prefix_mass);
            }
        }
        let mut mass = top;
        mass.extend_from_slice(&bottom);
        links.push(ChainLink {
            joint: JointDistribution::from_raw_validated(labels, 2, mass),
            prefix_mass,
            col_of,
        });
    }
    Ok(BinaryChain {
        links,
        q,
        source_outputs: n,
    })
}

impl BinaryChain {
    /// Chain-rule reconstruction: the source mutual information equals the
    /// prefix-mass-weighted sum of the links' mutual informations.
    pub fn weighted_information(&self) -> f64 {
        let mut acc = Accum::new();
        for link in &self.links {
            acc.add(link.prefix_mass * link.joint.mutual_information());
        }
        acc.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::JointDistribution;
    use approx::assert_relative_eq;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("y{i}")).collect()
    }

    #[test]
    fn one_hot_examples() {
        assert_eq!(one_hot(1, 3).unwrap(), vec![true, false]);
        assert_eq!(one_hot(3, 3).unwrap(), vec![false, false]);
        assert_eq!(one_hot(2, 4).unwrap(), vec![false, true, false]);
        assert!(one_hot(0, 3).is_err());
        assert!(one_hot(4, 3).is_err());
    }

    #[test]
    fn coordinate_budget_examples() {
        assert_eq!(coordinate_budget(10, 3), 3);
        assert_eq!(coordinate_budget(7, 2), 7);
        assert_eq!(coordinate_budget(8, 4), 2);
        // exact powers must not misround
        assert_eq!(coordinate_budget(9, 3), 3);
        assert_eq!(coordinate_budget(1_000_000, 3), 1000);
        assert_eq!(coordinate_budget(999_999, 3), 999);
        assert_eq!(coordinate_budget(1, 5), 1);
    }

    #[test]
    fn chain_hand_example() {
        // q = 3 with masses picked for easy hand marginalization
        let (j, _) = JointDistribution::new(
            labels(2),
            vec![vec![0.3, 0.1], vec![0.1, 0.2], vec![0.1, 0.2]],
        )
        .unwrap();
        let chain = binary_chain(&j).unwrap();
        assert_eq!(chain.links.len(), 2);
        let l1 = &chain.links[0];
        assert_relative_eq!(l1.prefix_mass, 1.0, epsilon = 1e-12);
        assert_relative_eq!(l1.joint.mass(0, 0), 0.3, epsilon = 1e-15);
        assert_relative_eq!(l1.joint.mass(0, 1), 0.1, epsilon = 1e-15);
        assert_relative_eq!(l1.joint.mass(1, 0), 0.2, epsilon = 1e-15);
        assert_relative_eq!(l1.joint.mass(1, 1), 0.4, epsilon = 1e-15);
        let l2 = &chain.links[1];
        assert_relative_eq!(l2.prefix_mass, 0.6, epsilon = 1e-12);
        assert_relative_eq!(l2.joint.mass(0, 0), 1.0 / 6.0, epsilon = 1e-14);
        assert_relative_eq!(l2.joint.mass(0, 1), 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(l2.joint.mass(1, 0), 1.0 / 6.0, epsilon = 1e-14);
        assert_relative_eq!(l2.joint.mass(1, 1), 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn chain_for_binary_input_is_the_source_bit_for_bit() {
        let j = crate::gen::random_channel(2, 64, 5);
        let chain = binary_chain(&j).unwrap();
        assert_eq!(chain.links.len(), 1);
        let link = &chain.links[0];
        assert_eq!(link.prefix_mass.to_bits(), 1.0f64.to_bits());
        for x in 0..2 {
            for y in 0..64 {
                assert_eq!(link.joint.mass(x, y).to_bits(), j.mass(x, y).to_bits());
            }
        }
    }

    #[test]
    fn chain_rule_reconstructs_information() {
        for (q, seed) in [(2, 1u64), (3, 2), (4, 3), (5, 4), (6, 5)] {
            let j = crate::gen::random_channel(q, 40, seed);
            let chain = binary_chain(&j).unwrap();
            assert!(
                (chain.weighted_information() - j.mutual_information()).abs() < 1e-10,
                "chain rule violated for q={q}"
            );
        }
    }

    #[test]
    fn tail_sums_match_prefix_mass() {
        let j = crate::gen::random_channel(4, 30, 9);
        let chain = binary_chain(&j).unwrap();
        for link in &chain.links {
            // each link's joint is a normalized conditional
            assert!((link.joint.total() - 1.0).abs() < 1e-12);
        }
        // prefix masses are decreasing and start at 1
        assert!((chain.links[0].prefix_mass - 1.0).abs() < 1e-12);
        for w in chain.links.windows(2) {
            assert!(w[1].prefix_mass <= w[0].prefix_mass + 1e-15);
        }
    }

    #[test]
    fn degenerate_tail_detected() {
        // letter 3 never occurs: coordinate 1's tail is empty. Such a joint
        // cannot come from the public constructor, so build it raw.
        let j = JointDistribution::from_raw_validated(
            labels(2),
            3,
            vec![0.3, 0.2, 0.3, 0.2, 0.0, 0.0],
        );
        assert!(matches!(binary_chain(&j), Err(Error::DegenerateTail(1))));
    }

    #[test]
    fn zero_conditional_columns_are_pruned_per_link() {
        // output y2 only ever occurs with letter 1, so it vanishes from the
        // second coordinate's conditional sub-problem
        let (j, _) = JointDistribution::new(
            labels(2),
            vec![vec![0.2, 0.3], vec![0.25, 0.0], vec![0.25, 0.0]],
        )
        .unwrap();
        let chain = binary_chain(&j).unwrap();
        assert_eq!(chain.links[0].col_of, vec![Some(0), Some(1)]);
        assert_eq!(chain.links[1].col_of, vec![Some(0), None]);
        assert_eq!(chain.links[1].joint.outputs(), 1);
    }
}
