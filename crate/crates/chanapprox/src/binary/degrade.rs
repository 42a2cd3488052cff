//! Greedy-merge degrading for binary-input channels.
//!
//! In posterior order the optimal pair to merge is always adjacent, so the
//! algorithm tracks the costs of all adjacent cluster pairs and repeatedly
//! merges the cheapest one until the budget is met. Clusters therefore stay
//! contiguous intervals of the sorted view.

use super::StepCost;
use crate::dist::{BinaryPosteriorChannel, JointDistribution};
use crate::error::{Error, Result};
use crate::numerics::{self, Accum};

/// Result of a greedy-merge (or oracle) degrading run.
#[derive(Debug, Clone)]
pub struct DegradeOutcome {
    /// Per source output: 0-based cluster id, clusters in posterior order.
    pub quantizer: Vec<usize>,
    /// Total mass of each cluster.
    pub cluster_masses: Vec<f64>,
    /// Mass-weighted mean posterior of each cluster.
    pub cluster_posteriors: Vec<f64>,
    /// The degraded joint over {0, 1} x clusters.
    pub pxz: JointDistribution,
    /// I(X; Y) - I(X; f(Y)), recomputed from the final clusters. Nats.
    pub delta_i: f64,
    /// Running sum of executed merge costs.
    pub cost_sum: f64,
    /// Executed steps in order.
    pub steps: Vec<StepCost>,
}

impl DegradeOutcome {
    /// CSV export `y,z` with 1-based cluster ids, one row per source output.
    pub fn quantizer_csv(&self) -> String {
        let mut out = String::from("y,z\n");
        for (y, &z) in self.quantizer.iter().enumerate() {
            out.push_str(&format!("{},{}\n", y + 1, z + 1));
        }
        out
    }
}

/// Mutual-information loss of merging two symbols or clusters:
///
/// (m_a + m_b) * [h(w*p_a + (1-w)*p_b) - w*h(p_a) - (1-w)*h(p_b)]
///
/// with w = m_a / (m_a + m_b). Nonnegative by concavity.
pub fn merge_cost(mass_a: f64, post_a: f64, mass_b: f64, post_b: f64) -> Result<f64> {
    if mass_a <= 0.0 || mass_b <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let total = mass_a + mass_b;
    let w = mass_a / total;
    Ok(total * numerics::concavity_gap_raw(post_a, post_b, w))
}

const NONE32: u32 = u32::MAX;

/// Tournament tree over the adjacent-pair positions: the root always holds
/// the cheapest live pair, updates rewrite one leaf and its ancestor chain.
/// Equal costs resolve to the lower position, so tie-breaking stays
/// deterministic. Compared with a lazy-invalidation heap this keeps memory
/// traffic on predictable index paths, which is what the near-linear
/// wall-time contract needs at 10^5-size alphabets.
struct PairTree {
    size: usize,
    cost: Vec<f64>,
    who: Vec<u32>,
}

impl PairTree {
    fn new(leaves: &[f64]) -> Self {
        let size = leaves.len().next_power_of_two().max(1);
        let mut cost = vec![f64::INFINITY; 2 * size];
        let mut who = vec![u32::MAX; 2 * size];
        for (i, &c) in leaves.iter().enumerate() {
            cost[size + i] = c;
            who[size + i] = i as u32;
        }
        for k in (1..size).rev() {
            let (l, r) = (2 * k, 2 * k + 1);
            // left sibling wins ties: its position is always lower
            if cost[l] <= cost[r] {
                cost[k] = cost[l];
                who[k] = who[l];
            } else {
                cost[k] = cost[r];
                who[k] = who[r];
            }
        }
        Self { size, cost, who }
    }

    fn update(&mut self, pos: usize, value: f64) {
        let mut k = self.size + pos;
        self.cost[k] = value;
        k >>= 1;
        while k >= 1 {
            let (l, r) = (2 * k, 2 * k + 1);
            if self.cost[l] <= self.cost[r] {
                self.cost[k] = self.cost[l];
                self.who[k] = self.who[l];
            } else {
                self.cost[k] = self.cost[r];
                self.who[k] = self.who[r];
            }
            if k == 1 {
                break;
            }
            k >>= 1;
        }
    }

    fn min(&self) -> (f64, usize) {
        (self.cost[1], self.who[1] as usize)
    }
}

/// Merge adjacent clusters of the view until at most `budget` remain.
///
/// Cluster statistics are accumulated sums (mass, mass*posterior) rather
/// than chains of pairwise means, bounding floating-point drift; the final
/// cluster statistics are recomputed from the contiguous member ranges.
/// Each merge updates at most three pair positions, so the total running
/// time is O(n log n).
pub fn greedy_merge(view: &BinaryPosteriorChannel, budget: usize) -> Result<DegradeOutcome> {
    if budget < 1 {
        return Err(Error::BudgetTooSmall { budget, min: 1 });
    }
    let n = view.len();
    // cluster c is identified by its leftmost view entry
    let mut sum_mass = view.masses().to_vec();
    let mut sum_top: Vec<f64> = view
        .masses()
        .iter()
        .zip(view.posteriors())
        .map(|(&m, &p)| m * p)
        .collect();
    let mut prev: Vec<u32> = (0..n as u32)
        .map(|i| if i == 0 { NONE32 } else { i - 1 })
        .collect();
    let mut next: Vec<u32> = (0..n as u32)
        .map(|i| if i + 1 == n as u32 { NONE32 } else { i + 1 })
        .collect();
    let mut alive = vec![true; n];
    let mut steps = Vec::with_capacity(n.saturating_sub(budget));
    let mut cost_sum = Accum::new();
    let mut count = n;

    let pair_cost = |sum_mass: &[f64], sum_top: &[f64], c: usize, r: usize| -> f64 {
        let (ma, mb) = (sum_mass[c], sum_mass[r]);
        let total = ma + mb;
        let w = ma / total;
        total * numerics::concavity_gap_raw(sum_top[c] / ma, sum_top[r] / mb, w)
    };

    if count > budget {
        // one position per cluster head; the tail's position stays infinite
        let leaves: Vec<f64> = (0..n)
            .map(|c| {
                if c + 1 < n {
                    pair_cost(&sum_mass, &sum_top, c, c + 1)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let mut tree = PairTree::new(&leaves);
        while count > budget {
            let (cost, c) = tree.min();
            debug_assert!(cost.is_finite(), "live pair available while count > budget");
            let r = next[c] as usize;
            debug_assert!(next[c] != NONE32 && alive[c] && alive[r]);
            steps.push(StepCost {
                size_before: count,
                cost,
            });
            cost_sum.add(cost);
            sum_mass[c] += sum_mass[r];
            sum_top[c] += sum_top[r];
            alive[r] = false;
            next[c] = next[r];
            if next[c] != NONE32 {
                prev[next[c] as usize] = c as u32;
            }
            count -= 1;
            // pair led by the absorbed cluster is gone; the pairs on either
            // side of the merged cluster changed cost
            tree.update(r, f64::INFINITY);
            let new_right = if next[c] == NONE32 {
                f64::INFINITY
            } else {
                pair_cost(&sum_mass, &sum_top, c, next[c] as usize)
            };
            tree.update(c, new_right);
            if prev[c] != NONE32 {
                let l = prev[c] as usize;
                tree.update(l, pair_cost(&sum_mass, &sum_top, l, c));
            }
        }
    }

    let bounds: Vec<usize> = (0..n).filter(|&c| alive[c]).collect();
    Ok(outcome_with_steps(view, &bounds, steps, cost_sum.value()))
}

/// Build a [`DegradeOutcome`] from explicit interval boundaries over the
/// view. `bounds` holds the first entry of every cluster, ascending,
/// starting at 0. Cluster statistics come from compensated sums over the
/// members.
pub(crate) fn outcome_from_intervals(
    view: &BinaryPosteriorChannel,
    bounds: &[usize],
) -> DegradeOutcome {
    outcome_with_steps(view, bounds, Vec::new(), f64::NAN)
}

fn outcome_with_steps(
    view: &BinaryPosteriorChannel,
    bounds: &[usize],
    steps: Vec<StepCost>,
    cost_sum: f64,
) -> DegradeOutcome {
    let n = view.len();
    let k = bounds.len();
    let mut cluster_masses = Vec::with_capacity(k);
    let mut cluster_posteriors = Vec::with_capacity(k);
    let mut mass = vec![0.0; 2 * k];
    let mut entry_cluster = vec![0usize; n];
    for z in 0..k {
        let start = bounds[z];
        let end = if z + 1 < k { bounds[z + 1] } else { n };
        let mut m = Accum::new();
        let mut top = Accum::new();
        let mut bot = Accum::new();
        for e in start..end {
            entry_cluster[e] = z;
            m.add(view.mass(e));
            top.add(view.mass(e) * view.posterior(e));
            bot.add(view.mass(e) * (1.0 - view.posterior(e)));
        }
        cluster_masses.push(m.value());
        cluster_posteriors.push(top.value() / m.value());
        mass[z] = top.value();
        mass[k + z] = bot.value();
    }
    let quantizer: Vec<usize> = (0..view.source_len())
        .map(|y| entry_cluster[view.entry_of(y)])
        .collect();
    let labels = (1..=k).map(|i| format!("z{i}")).collect();
    let pxz = JointDistribution::from_raw_validated(labels, 2, mass);
    let delta_i = view.mutual_information()
        - numerics::binary_view_mi(&cluster_masses, &cluster_posteriors);
    let cost_sum = if cost_sum.is_nan() { delta_i } else { cost_sum };
    DegradeOutcome {
        quantizer,
        cluster_masses,
        cluster_posteriors,
        pxz,
        delta_i,
        cost_sum,
        steps,
    }
}
