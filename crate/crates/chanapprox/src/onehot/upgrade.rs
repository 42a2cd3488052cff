//! General-alphabet upgrading: run greedy-split on every conditional binary
//! sub-problem with the per-coordinate budget, then assemble the upgraded
//! joint over tuples of surviving symbols through the sparse two-target
//! split maps. Each source output reaches at most 2^(q-1) tuples, so
//! assembly is O(n q 2^(q-1)) instead of the dense q x budget^(q-1) table.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use super::{binary_chain, coordinate_budget, BinaryChain};
use crate::binary::upgrade::{greedy_split, UpgradeOutcome};
use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::numerics::Accum;

/// Gate on full three-way materialization in consistency checks.
pub const MATERIALIZE_GATE: u128 = 1_000_000;

/// Result of a one-hot upgrade run.
#[derive(Debug, Clone)]
pub struct OneHotUpgradeResult {
    pub q: usize,
    /// Requested total output budget.
    pub l_design: usize,
    /// Per-coordinate budget actually used.
    pub coordinate_budget: usize,
    /// Per-coordinate greedy-split outcomes.
    pub per_coordinate: Vec<UpgradeOutcome>,
    /// Occupied tuples of per-coordinate surviving slots, ascending.
    pub tuples: Vec<Vec<usize>>,
    /// Upgraded joint over q letters x occupied tuples.
    pub pstar: JointDistribution,
    /// I(X; Z) - I(X; Y) in nats, recomputed from the assembled joint.
    pub delta_i: f64,
    /// Closed-form guarantee 128 (q-1) / budget^2 in nats.
    pub bound: f64,
    pub elapsed: Duration,
}

impl OneHotUpgradeResult {
    /// Achieved output-alphabet size (occupied tuples).
    pub fn l_actual(&self) -> usize {
        self.tuples.len()
    }
}

/// Upgrade `joint` to an output alphabet of at most `l` symbols.
///
/// For binary inputs this is exactly the binary greedy split (same floats,
/// same outcome); otherwise the chain of conditional sub-problems is built,
/// each coordinate is reduced to the per-coordinate budget, and the joint is
/// assembled sparsely.
pub fn upgrade(joint: &JointDistribution, l: usize) -> Result<OneHotUpgradeResult> {
    let start = Instant::now();
    let q = joint.q();
    if l == 0 {
        return Err(Error::BudgetTooSmall { budget: 0, min: 2 });
    }
    let budget = coordinate_budget(l, q);
    if budget < 2 {
        return Err(Error::BudgetTooSmall { budget, min: 2 });
    }
    let bound = 128.0 * (q - 1) as f64 / (budget as f64 * budget as f64);

    if q == 2 {
        let view = joint.binary_view()?;
        let out = greedy_split(&view, l)?;
        let tuples = (0..out.surviving.len()).map(|k| vec![k]).collect();
        let pstar = out.pstar.clone();
        let delta_i = out.delta_i;
        return Ok(OneHotUpgradeResult {
            q,
            l_design: l,
            coordinate_budget: budget,
            per_coordinate: vec![out],
            tuples,
            pstar,
            delta_i,
            bound,
            elapsed: start.elapsed(),
        });
    }

    let chain = binary_chain(joint)?;
    // coordinates run one after another: a single reduction's parallelism
    // lives at the ensemble/sweep level, and interleaving two large merges
    // on a small cache costs more than it saves
    let mut per_coordinate = Vec::with_capacity(chain.links.len());
    for link in &chain.links {
        let view = link.joint.binary_view()?;
        per_coordinate.push(greedy_split(&view, budget)?);
    }
    let (tuples, pstar) = assemble_pstar(&chain, &per_coordinate, joint)?;
    let delta_i = pstar.mutual_information() - joint.mutual_information();
    Ok(OneHotUpgradeResult {
        q,
        l_design: l,
        coordinate_budget: budget,
        per_coordinate,
        tuples,
        pstar,
        delta_i,
        bound,
        elapsed: start.elapsed(),
    })
}

/// The split branches (surviving slot, weight) a source output takes at one
/// coordinate. Outputs outside a sub-problem's support get a fixed point
/// mass on slot 0: the choice cannot matter because every letter the
/// coordinate could distinguish has zero probability there.
fn branches_for(
    chain: &BinaryChain,
    outcomes: &[UpgradeOutcome],
    c: usize,
    y: usize,
    buf: &mut Vec<(usize, f64)>,
) {
    buf.clear();
    match chain.links[c].col_of[y] {
        None => buf.push((0, 1.0)),
        Some(col) => {
            let b = outcomes[c].beta[col];
            if b.left == b.right {
                buf.push((b.left, 1.0));
            } else {
                if b.left_weight > 0.0 {
                    buf.push((b.left, b.left_weight));
                }
                if b.left_weight < 1.0 {
                    buf.push((b.right, 1.0 - b.left_weight));
                }
            }
        }
    }
}

/// Assemble the upgraded joint over tuples of surviving slots:
/// for every source output, distribute its marginal mass over the at most
/// 2^(q-1) tuples reachable through the per-coordinate split maps, then
/// expand each occupied tuple into per-letter masses with shared prefix
/// products. Zero-mass tuples are never created.
pub fn assemble_pstar(
    chain: &BinaryChain,
    outcomes: &[UpgradeOutcome],
    source: &JointDistribution,
) -> Result<(Vec<Vec<usize>>, JointDistribution)> {
    let q = chain.q;
    assert_eq!(outcomes.len(), q - 1, "one outcome per coordinate");
    let radices: Vec<usize> = outcomes.iter().map(|o| o.surviving.len()).collect();
    // mixed-radix strides; the product is bounded by the total budget
    let mut strides = vec![1usize; q - 1];
    for c in 1..q - 1 {
        strides[c] = strides[c - 1] * radices[c - 1];
    }
    let py = source.output_marginal();

    let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
    let mut branch_buf: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(2); q - 1];
    // (key, weight) pairs under construction, doubled per coordinate
    let mut frontier: Vec<(usize, f64)> = Vec::with_capacity(1 << (q - 1));
    let mut next_frontier: Vec<(usize, f64)> = Vec::with_capacity(1 << (q - 1));
    for y in 0..source.outputs() {
        for (c, buf) in branch_buf.iter_mut().enumerate() {
            branches_for(chain, outcomes, c, y, buf);
        }
        frontier.clear();
        frontier.push((0usize, py[y]));
        for (c, buf) in branch_buf.iter().enumerate() {
            next_frontier.clear();
            for &(key, w) in &frontier {
                for &(slot, bw) in buf {
                    next_frontier.push((key + slot * strides[c], w * bw));
                }
            }
            std::mem::swap(&mut frontier, &mut next_frontier);
        }
        for &(key, w) in &frontier {
            *weights.entry(key).or_insert(0.0) += w;
        }
    }

    let tuples: Vec<Vec<usize>> = weights
        .keys()
        .map(|&key| {
            (0..q - 1)
                .map(|c| (key / strides[c]) % radices[c])
                .collect()
        })
        .collect();
    let t = tuples.len();
    let mut mass = vec![0.0; q * t];
    for (col, (tuple, (_, w))) in tuples.iter().zip(weights.iter()).enumerate() {
        // P(letter | tuple) via prefix products over "not this letter" odds
        let mut prefix = *w;
        for (c, &slot) in tuple.iter().enumerate() {
            let s = outcomes[c].surviving_posteriors[slot];
            mass[c * t + col] = prefix * s;
            prefix *= 1.0 - s;
        }
        mass[(q - 1) * t + col] = prefix;
    }
    let labels: Vec<String> = tuples
        .iter()
        .map(|tuple| {
            let parts: Vec<String> = tuple.iter().map(|z| (z + 1).to_string()).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    Ok((tuples, JointDistribution::from_raw_validated(labels, q, mass)))
}

/// Residual report of the structural checks on an upgrade result.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    /// |total mass - 1| of the materialized three-way distribution.
    pub total_residual: f64,
    /// max |sum_z P*(x,z,y) - P(x,y)|.
    pub marginalization_residual: f64,
    /// max |P*(x|z,y) - P*(x|z)| over positive P*(z,y).
    pub markov_residual: f64,
    /// max deviation of the embedded per-coordinate sub-problem joints.
    pub embedding_residual: f64,
    pub delta_i: f64,
    pub bound: f64,
    pub tolerance: f64,
}

impl ConsistencyReport {
    pub fn pass(&self) -> bool {
        self.total_residual <= self.tolerance
            && self.marginalization_residual <= self.tolerance
            && self.markov_residual <= self.tolerance
            && self.embedding_residual <= self.tolerance
            && self.delta_i <= self.bound + self.tolerance
    }

    pub fn max_residual(&self) -> f64 {
        self.total_residual
            .max(self.marginalization_residual)
            .max(self.markov_residual)
            .max(self.embedding_residual)
    }
}

/// Materialize the full three-way distribution P*(x, z, y) of `result` on a
/// small instance and measure: validity of the total mass, marginalization
/// back to the source, the Markov property of x - z - y, and the embedding
/// of each conditional sub-problem. Refuses instances whose materialization
/// would exceed [`MATERIALIZE_GATE`] cells.
pub fn verify_upgrade_consistency(
    result: &OneHotUpgradeResult,
    source: &JointDistribution,
    tolerance: f64,
) -> Result<ConsistencyReport> {
    let q = source.q();
    let n = source.outputs();
    let cells = (n as u128) << (q - 1);
    if cells > MATERIALIZE_GATE {
        return Err(Error::MaterializationTooLarge {
            requested: cells,
            gate: MATERIALIZE_GATE,
        });
    }
    let chain = binary_chain(source)?;
    let outcomes = &result.per_coordinate;
    let radices: Vec<usize> = outcomes.iter().map(|o| o.surviving.len()).collect();
    let mut strides = vec![1usize; q - 1];
    for c in 1..q - 1 {
        strides[c] = strides[c - 1] * radices[c - 1];
    }
    let py = source.output_marginal();

    // sparse materialization: per y, tuple weights and per-letter masses
    // cells[(y, key)] = (weight, per-letter vector)
    let mut table: BTreeMap<(usize, usize), (f64, Vec<f64>)> = BTreeMap::new();
    let mut branch_buf: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(2); q - 1];
    let mut frontier: Vec<(usize, f64)> = Vec::new();
    let mut next_frontier: Vec<(usize, f64)> = Vec::new();
    for y in 0..n {
        for (c, buf) in branch_buf.iter_mut().enumerate() {
            branches_for(&chain, outcomes, c, y, buf);
        }
        frontier.clear();
        frontier.push((0usize, py[y]));
        for (c, buf) in branch_buf.iter().enumerate() {
            next_frontier.clear();
            for &(key, w) in &frontier {
                for &(slot, bw) in buf {
                    next_frontier.push((key + slot * strides[c], w * bw));
                }
            }
            std::mem::swap(&mut frontier, &mut next_frontier);
        }
        for &(key, w) in &frontier {
            if w == 0.0 {
                continue;
            }
            let mut letters = vec![0.0; q];
            let mut prefix = w;
            for c in 0..q - 1 {
                let slot = (key / strides[c]) % radices[c];
                let s = outcomes[c].surviving_posteriors[slot];
                letters[c] = prefix * s;
                prefix *= 1.0 - s;
            }
            letters[q - 1] = prefix;
            let entry = table.entry((y, key)).or_insert_with(|| (0.0, vec![0.0; q]));
            entry.0 += w;
            for x in 0..q {
                entry.1[x] += letters[x];
            }
        }
    }

    // total mass
    let mut total = Accum::new();
    for (_, letters) in table.values() {
        for &v in letters {
            total.add(v);
        }
    }
    let total_residual = (total.value() - 1.0).abs();

    // marginalization over z
    let mut marg = vec![0.0; q * n];
    for (&(y, _), (_, letters)) in &table {
        for x in 0..q {
            marg[x * n + y] += letters[x];
        }
    }
    let mut marginalization_residual: f64 = 0.0;
    for x in 0..q {
        for y in 0..n {
            marginalization_residual =
                marginalization_residual.max((marg[x * n + y] - source.mass(x, y)).abs());
        }
    }

    // Markov: P*(x | z, y) must not depend on y
    let mut zmass: BTreeMap<usize, (f64, Vec<f64>)> = BTreeMap::new();
    for (&(_, key), (w, letters)) in &table {
        let entry = zmass.entry(key).or_insert_with(|| (0.0, vec![0.0; q]));
        entry.0 += w;
        for x in 0..q {
            entry.1[x] += letters[x];
        }
    }
    let mut markov_residual: f64 = 0.0;
    for (&(_, key), (w, letters)) in &table {
        if *w <= 0.0 {
            continue;
        }
        let (zw, zletters) = &zmass[&key];
        for x in 0..q {
            let cond_zy = letters[x] / w;
            let cond_z = zletters[x] / zw;
            markov_residual = markov_residual.max((cond_zy - cond_z).abs());
        }
    }

    // embedding: conditioned on no earlier letter, (letter flag, slot, y)
    // must reproduce the sub-problem joint composed with its split map
    let mut embedding_residual: f64 = 0.0;
    for c in 0..q - 1 {
        let link = &chain.links[c];
        let out = &outcomes[c];
        // measured: sum over letters >= c of table masses, keyed by (flag, slot, y)
        let mut measured: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for (&(y, key), (_, letters)) in &table {
            let slot = (key / strides[c]) % radices[c];
            for x in c..q {
                let flag = usize::from(x == c);
                *measured.entry((flag, slot, y)).or_insert(0.0) += letters[x];
            }
        }
        for flag in 0..2usize {
            for slot in 0..radices[c] {
                for y in 0..n {
                    let lhs =
                        measured.get(&(flag, slot, y)).copied().unwrap_or(0.0) / link.prefix_mass;
                    let rhs = match link.col_of[y] {
                        None => 0.0,
                        Some(col) => {
                            let b = out.beta[col];
                            let w = b.weight_on(slot);
                            let s = out.surviving_posteriors[slot];
                            let col_mass = link.joint.mass(0, col) + link.joint.mass(1, col);
                            col_mass * w * if flag == 1 { s } else { 1.0 - s }
                        }
                    };
                    embedding_residual = embedding_residual.max((lhs - rhs).abs());
                }
            }
        }
    }

    Ok(ConsistencyReport {
        total_residual,
        marginalization_residual,
        markov_residual,
        embedding_residual,
        delta_i: result.delta_i,
        bound: result.bound,
        tolerance,
    })
}
