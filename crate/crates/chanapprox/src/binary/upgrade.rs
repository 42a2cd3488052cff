//! Greedy-split upgrading for binary-input channels.
//!
//! Symbols are kept sorted by posterior. Each step removes the cheapest
//! interior symbol and splits its mass between its two live neighbors with
//! the unique weight that preserves the symbol's posterior as a convex
//! combination. Extreme symbols are never removed, so every original
//! posterior stays representable and the result is an upgraded channel.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::StepCost;
use crate::dist::{BinaryPosteriorChannel, JointDistribution};
use crate::error::{Error, Result};
use crate::numerics::{self, Accum};

/// How one source output's mass lands on the surviving set: weight
/// `left_weight` on slot `left` and the rest on slot `right` (slots index
/// the surviving list in posterior order). A surviving output has
/// `left == right` and weight 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSplit {
    pub left: usize,
    pub right: usize,
    pub left_weight: f64,
}

impl BetaSplit {
    pub fn weight_on(&self, slot: usize) -> f64 {
        if slot == self.left {
            if self.left == self.right {
                1.0
            } else {
                self.left_weight
            }
        } else if slot == self.right {
            1.0 - self.left_weight
        } else {
            0.0
        }
    }
}

/// Result of a greedy-split run.
#[derive(Debug, Clone)]
pub struct UpgradeOutcome {
    /// Surviving view-entry indices, ascending posterior order.
    pub surviving: Vec<usize>,
    /// Final masses of the surviving symbols (after all redistributions).
    pub surviving_masses: Vec<f64>,
    /// Posteriors of the surviving symbols (unchanged by splitting).
    pub surviving_posteriors: Vec<f64>,
    /// Per source output: how its mass maps onto the surviving slots.
    pub beta: Vec<BetaSplit>,
    /// The upgraded joint over {0, 1} x surviving symbols.
    pub pstar: JointDistribution,
    /// I(X; Z) - I(X; Y), recomputed from the final joint. Nats.
    pub delta_i: f64,
    /// Running sum of executed split costs (kept for invariant checks).
    pub cost_sum: f64,
    /// Executed steps in order.
    pub steps: Vec<StepCost>,
}

/// Weight placed on the left neighbor when a symbol with posterior `p_mid`
/// is split between neighbors with posteriors `p_left <= p_mid <= p_right`:
/// the w solving w*p_left + (1-w)*p_right = p_mid. Returns 1 when all three
/// coincide.
pub fn split_weight(p_left: f64, p_mid: f64, p_right: f64) -> Result<f64> {
    if !(p_left <= p_mid && p_mid <= p_right) {
        return Err(Error::NotSorted);
    }
    if p_right == p_left {
        return Ok(1.0);
    }
    Ok((p_right - p_mid) / (p_right - p_left))
}

/// Mutual-information gain of splitting a symbol of mass `mid_mass`:
///
/// mid_mass * [h(p_mid) - w*h(p_left) - (1-w)*h(p_right)]
///
/// with w from [`split_weight`]. Nonnegative by concavity.
pub fn split_cost(mid_mass: f64, p_left: f64, p_mid: f64, p_right: f64) -> Result<f64> {
    let w = split_weight(p_left, p_mid, p_right)?;
    Ok(mid_mass * numerics::concavity_gap_raw(p_left, p_right, w))
}

/// 16-byte heap entry: cheapest cost first, then lowest symbol index for
/// deterministic tie-breaking. `epoch` lazily invalidates entries whose
/// neighborhood or mass changed after the push.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    idx: u32,
    epoch: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.idx.cmp(&other.idx))
            .then_with(|| self.epoch.cmp(&other.epoch))
    }
}

const NONE32: u32 = u32::MAX;

/// Reduce the view to at most `budget` symbols by greedy splitting.
///
/// Stale heap entries are detected with a per-symbol epoch counter instead
/// of a decrease-key structure; total running time is O(n log n).
pub fn greedy_split(view: &BinaryPosteriorChannel, budget: usize) -> Result<UpgradeOutcome> {
    if budget < 2 {
        return Err(Error::BudgetTooSmall { budget, min: 2 });
    }
    let n = view.len();
    let posteriors = view.posteriors();
    let mut mass = view.masses().to_vec();
    let mut prev: Vec<u32> = (0..n as u32)
        .map(|i| if i == 0 { NONE32 } else { i - 1 })
        .collect();
    let mut next: Vec<u32> = (0..n as u32)
        .map(|i| if i + 1 == n as u32 { NONE32 } else { i + 1 })
        .collect();
    let mut alive = vec![true; n];
    let mut epoch = vec![0u32; n];
    let mut steps = Vec::new();
    let mut cost_sum = Accum::new();
    let mut count = n;

    let interior_cost = |mass: &[f64], l: usize, i: usize, r: usize| -> f64 {
        let w = split_weight(posteriors[l], posteriors[i], posteriors[r])
            .expect("posteriors sorted");
        mass[i] * numerics::concavity_gap_raw(posteriors[l], posteriors[r], w)
    };

    let mut heap: BinaryHeap<Reverse<Candidate>> = if count > budget {
        (1..n.saturating_sub(1))
            .map(|i| {
                Reverse(Candidate {
                    cost: interior_cost(&mass, i - 1, i, i + 1),
                    idx: i as u32,
                    epoch: 0,
                })
            })
            .collect()
    } else {
        BinaryHeap::new()
    };

    while count > budget {
        let Reverse(cand) = heap.pop().expect("interior symbol available while count > budget");
        let i = cand.idx as usize;
        if !alive[i] || epoch[i] != cand.epoch {
            continue;
        }
        let (l, r) = (prev[i] as usize, next[i] as usize);
        debug_assert!(prev[i] != NONE32 && next[i] != NONE32);
        steps.push(StepCost {
            size_before: count,
            cost: cand.cost,
        });
        cost_sum.add(cand.cost);
        let w = split_weight(posteriors[l], posteriors[i], posteriors[r])?;
        mass[l] += w * mass[i];
        mass[r] += (1.0 - w) * mass[i];
        alive[i] = false;
        next[l] = r as u32;
        prev[r] = l as u32;
        count -= 1;
        epoch[l] += 1;
        epoch[r] += 1;
        if prev[l] != NONE32 {
            heap.push(Reverse(Candidate {
                cost: interior_cost(&mass, prev[l] as usize, l, r),
                idx: l as u32,
                epoch: epoch[l],
            }));
        }
        if next[r] != NONE32 {
            heap.push(Reverse(Candidate {
                cost: interior_cost(&mass, l, r, next[r] as usize),
                idx: r as u32,
                epoch: epoch[r],
            }));
        }
    }

    let surviving: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    let surviving_masses: Vec<f64> = surviving.iter().map(|&i| mass[i]).collect();
    let surviving_posteriors: Vec<f64> = surviving.iter().map(|&i| posteriors[i]).collect();
    let beta = final_beta_map(view, &surviving)?;
    let pstar = survivors_to_joint(&surviving_masses, &surviving_posteriors);
    let delta_i = numerics::binary_view_mi(&surviving_masses, &surviving_posteriors)
        - view.mutual_information();

    Ok(UpgradeOutcome {
        surviving,
        surviving_masses,
        surviving_posteriors,
        beta,
        pstar,
        delta_i,
        cost_sum: cost_sum.value(),
        steps,
    })
}

pub(crate) fn survivors_to_joint(masses: &[f64], posteriors: &[f64]) -> JointDistribution {
    let k = masses.len();
    let labels = (1..=k).map(|i| format!("z{i}")).collect();
    let mut mass = vec![0.0; 2 * k];
    for e in 0..k {
        mass[e] = masses[e] * posteriors[e];
        mass[k + e] = masses[e] * (1.0 - posteriors[e]);
    }
    JointDistribution::from_raw_validated(labels, 2, mass)
}

/// Compute, for every source output, the two bracketing surviving symbols
/// (in posterior order) and the left weight from [`split_weight`]. Surviving
/// outputs map to themselves with weight 1. `surviving` must be ascending
/// view-entry indices containing both extremes.
pub fn final_beta_map(
    view: &BinaryPosteriorChannel,
    surviving: &[usize],
) -> Result<Vec<BetaSplit>> {
    let n = view.len();
    if surviving.is_empty()
        || surviving.first() != Some(&0)
        || surviving.last() != Some(&(n - 1))
    {
        return Err(Error::ExtremeRemoved);
    }
    if surviving.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NotSorted);
    }
    let posteriors = view.posteriors();
    let mut per_entry = vec![
        BetaSplit {
            left: 0,
            right: 0,
            left_weight: 1.0
        };
        n
    ];
    let mut slot = 0usize;
    for e in 0..n {
        if slot + 1 < surviving.len() && surviving[slot + 1] == e {
            slot += 1;
        }
        if surviving[slot] == e {
            per_entry[e] = BetaSplit {
                left: slot,
                right: slot,
                left_weight: 1.0,
            };
        } else {
            let (sl, sr) = (surviving[slot], surviving[slot + 1]);
            let w = split_weight(posteriors[sl], posteriors[e], posteriors[sr])?;
            per_entry[e] = BetaSplit {
                left: slot,
                right: slot + 1,
                left_weight: w,
            };
        }
    }
    // expand from view entries to the original source outputs
    Ok((0..view.source_len())
        .map(|y| per_entry[view.entry_of(y)])
        .collect())
}
