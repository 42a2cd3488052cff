//! Output-alphabet reduction for binary-input channels: greedy-split
//! upgrading and greedy-merge degrading over the sorted posterior view.

pub mod degrade;
pub mod upgrade;

pub use degrade::{greedy_merge, merge_cost, DegradeOutcome};
pub use upgrade::{final_beta_map, greedy_split, split_cost, split_weight, BetaSplit, UpgradeOutcome};

/// Cost and pre-step alphabet size of one executed reduction step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCost {
    /// Alphabet (or cluster) count before the step ran.
    pub size_before: usize,
    /// Mutual-information change paid by the step, in nats.
    pub cost: f64,
}
