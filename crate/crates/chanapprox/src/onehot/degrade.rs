//! General-alphabet degrading: greedy-merge every conditional binary
//! sub-problem with the per-coordinate budget, combine the per-coordinate
//! quantizers into one tuple-valued quantizer, and aggregate the joint with
//! a single pass over the outputs. The occupied-tuple table is sparse
//! (keyed by tuple), since occupancy never exceeds the source alphabet.

use super::{binary_chain, coordinate_budget};
use crate::binary::degrade::{greedy_merge, DegradeOutcome};
use crate::dist::JointDistribution;
use crate::error::{Error, Result};

/// Result of a one-hot degrade run.
#[derive(Debug, Clone)]
pub struct OneHotDegradeResult {
    pub q: usize,
    /// Requested total output budget.
    pub l_design: usize,
    /// Per-coordinate budget actually used.
    pub coordinate_budget: usize,
    /// Per-coordinate greedy-merge outcomes.
    pub per_coordinate: Vec<DegradeOutcome>,
    /// Per-coordinate cluster lookup over all source outputs (outputs a
    /// sub-problem never sees map to cluster 0).
    pub coordinate_quantizers: Vec<Vec<usize>>,
    /// Occupied cluster tuples, ascending.
    pub tuples: Vec<Vec<usize>>,
    /// Source output -> index into `tuples`.
    pub quantizer: Vec<usize>,
    /// Degraded joint over q letters x occupied tuples.
    pub pxz: JointDistribution,
    /// I(X; Y) - I(X; f(Y)) in nats.
    pub delta_i: f64,
    /// Closed-form guarantee 64 (q-1) / budget^2 in nats.
    pub bound: f64,
}

impl OneHotDegradeResult {
    pub fn l_actual(&self) -> usize {
        self.tuples.len()
    }

    /// CSV export `y,z1,...,z{q-1},z_id` with 1-based ids.
    pub fn quantizer_csv(&self) -> String {
        let coords = self.q - 1;
        let mut header = String::from("y");
        for c in 1..=coords {
            header.push_str(&format!(",z{c}"));
        }
        header.push_str(",z_id\n");
        let mut out = header;
        for (y, &t) in self.quantizer.iter().enumerate() {
            out.push_str(&(y + 1).to_string());
            for &slot in &self.tuples[t] {
                out.push_str(&format!(",{}", slot + 1));
            }
            out.push_str(&format!(",{}\n", t + 1));
        }
        out
    }
}

/// Degrade `joint` to an output alphabet of at most `l` symbols.
///
/// For binary inputs this is exactly the binary greedy merge; otherwise each
/// conditional sub-problem is merged to the per-coordinate budget and the
/// tuple quantizer is aggregated in one pass.
pub fn degrade(joint: &JointDistribution, l: usize) -> Result<OneHotDegradeResult> {
    let q = joint.q();
    if l == 0 {
        return Err(Error::BudgetTooSmall { budget: 0, min: 1 });
    }
    let budget = coordinate_budget(l, q);
    let bound = 64.0 * (q - 1) as f64 / (budget as f64 * budget as f64);

    if q == 2 {
        let view = joint.binary_view()?;
        let out = greedy_merge(&view, l)?;
        let k = out.cluster_masses.len();
        let tuples: Vec<Vec<usize>> = (0..k).map(|z| vec![z]).collect();
        let quantizer = out.quantizer.clone();
        let pxz = out.pxz.clone();
        let delta_i = out.delta_i;
        return Ok(OneHotDegradeResult {
            q,
            l_design: l,
            coordinate_budget: budget,
            coordinate_quantizers: vec![out.quantizer.clone()],
            per_coordinate: vec![out],
            tuples,
            quantizer,
            pxz,
            delta_i,
            bound,
        });
    }

    let chain = binary_chain(joint)?;
    // coordinates run sequentially; see the note in the upgrade path
    let mut per_coordinate = Vec::with_capacity(chain.links.len());
    for link in &chain.links {
        let view = link.joint.binary_view()?;
        per_coordinate.push(greedy_merge(&view, budget)?);
    }

    let n = joint.outputs();
    // extend each per-coordinate quantizer to every source output
    let coordinate_quantizers: Vec<Vec<usize>> = (0..q - 1)
        .map(|c| {
            (0..n)
                .map(|y| match chain.links[c].col_of[y] {
                    Some(col) => per_coordinate[c].quantizer[col],
                    None => 0,
                })
                .collect()
        })
        .collect();

    // pack tuples with mixed radix, collect the occupied set
    let radices: Vec<usize> = per_coordinate
        .iter()
        .map(|o| o.cluster_masses.len())
        .collect();
    let mut strides = vec![1usize; q - 1];
    for c in 1..q - 1 {
        strides[c] = strides[c - 1] * radices[c - 1];
    }
    let keys: Vec<usize> = (0..n)
        .map(|y| {
            (0..q - 1)
                .map(|c| coordinate_quantizers[c][y] * strides[c])
                .sum()
        })
        .collect();
    let mut occupied: Vec<usize> = keys.clone();
    occupied.sort_unstable();
    occupied.dedup();
    let column_of = |key: usize| occupied.binary_search(&key).expect("occupied key");
    let quantizer: Vec<usize> = keys.iter().map(|&k| column_of(k)).collect();
    let tuples: Vec<Vec<usize>> = occupied
        .iter()
        .map(|&key| (0..q - 1).map(|c| (key / strides[c]) % radices[c]).collect())
        .collect();

    // one-pass aggregation of the degraded joint
    let t = tuples.len();
    let mut mass = vec![0.0; q * t];
    for y in 0..n {
        let col = quantizer[y];
        for x in 0..q {
            mass[x * t + col] += joint.mass(x, y);
        }
    }
    let labels: Vec<String> = tuples
        .iter()
        .map(|tuple| {
            let parts: Vec<String> = tuple.iter().map(|z| (z + 1).to_string()).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let pxz = JointDistribution::from_raw_validated(labels, q, mass);
    let delta_i = joint.mutual_information() - pxz.mutual_information();

    Ok(OneHotDegradeResult {
        q,
        l_design: l,
        coordinate_budget: budget,
        per_coordinate,
        coordinate_quantizers,
        tuples,
        quantizer,
        pxz,
        delta_i,
        bound,
    })
}

/// Aggregate a joint through a deterministic quantizer `f` (source output ->
/// cluster id). Empty cluster ids are dropped; labels are `z<id+1>`.
pub fn apply_quantizer(joint: &JointDistribution, f: &[usize]) -> Result<JointDistribution> {
    let n = joint.outputs();
    if f.len() != n {
        return Err(Error::PartialQuantizer(f.len().min(n)));
    }
    let q = joint.q();
    let k = f.iter().copied().max().map_or(0, |m| m + 1);
    let mut mass = vec![0.0; q * k];
    for y in 0..n {
        let z = f[y];
        for x in 0..q {
            mass[x * k + z] += joint.mass(x, y);
        }
    }
    // drop empty clusters, keep exact cell values
    let occupied: Vec<usize> = (0..k)
        .filter(|&z| (0..q).any(|x| mass[x * k + z] > 0.0))
        .collect();
    let labels: Vec<String> = occupied.iter().map(|&z| format!("z{}", z + 1)).collect();
    let mut compact = Vec::with_capacity(q * occupied.len());
    for x in 0..q {
        for &z in &occupied {
            compact.push(mass[x * k + z]);
        }
    }
    Ok(JointDistribution::from_raw_validated(labels, q, compact))
}
