//! File formats: the JSON channel description, JSON result files for
//! upgrade/degrade runs, and CSV exports. Result files carry only
//! deterministic content (no timings), so identical runs produce identical
//! bytes. All stored information values are in nats.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{JointDistribution, PruneReport};
use crate::error::{Error, Result};
use crate::onehot::{OneHotDegradeResult, OneHotUpgradeResult};

/// On-disk channel description: `pxy` rows are input letters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub q: usize,
    pub labels: Vec<String>,
    pub pxy: Vec<Vec<f64>>,
}

impl ChannelFile {
    pub fn from_joint(joint: &JointDistribution) -> Self {
        Self {
            q: joint.q(),
            labels: joint.labels().to_vec(),
            pxy: (0..joint.q()).map(|x| joint.row(x).to_vec()).collect(),
        }
    }

    /// Validate and prune into a joint distribution.
    pub fn into_joint(self) -> Result<(JointDistribution, PruneReport)> {
        if self.pxy.len() != self.q {
            return Err(Error::FileFormat(format!(
                "declared q = {} but pxy has {} rows",
                self.q,
                self.pxy.len()
            )));
        }
        JointDistribution::new(self.labels, self.pxy)
    }
}

pub fn read_channel(path: &Path) -> Result<(JointDistribution, PruneReport)> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ChannelFile = serde_json::from_str(&text)?;
    file.into_joint()
}

pub fn write_channel(path: &Path, joint: &JointDistribution) -> Result<()> {
    let text = serde_json::to_string_pretty(&ChannelFile::from_joint(joint))?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Sparse entry of a reduced joint: 1-based input letter, 1-based surviving
/// slots per coordinate, probability mass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassTriplet {
    pub x: usize,
    pub z: Vec<usize>,
    pub p: f64,
}

/// Serialized upgrade result. Values are nats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpgradeResultFile {
    pub q: usize,
    pub l_design: usize,
    pub l_actual: usize,
    pub coordinate_budget: usize,
    pub delta_i_nats: f64,
    pub bound_nats: f64,
    /// Surviving posteriors of every coordinate's sub-problem.
    pub surviving_posteriors: Vec<Vec<f64>>,
    pub pxz: Vec<MassTriplet>,
}

impl UpgradeResultFile {
    pub fn from_result(result: &OneHotUpgradeResult) -> Self {
        let mut pxz = Vec::new();
        for x in 0..result.q {
            for (col, tuple) in result.tuples.iter().enumerate() {
                let p = result.pstar.mass(x, col);
                if p > 0.0 {
                    pxz.push(MassTriplet {
                        x: x + 1,
                        z: tuple.iter().map(|s| s + 1).collect(),
                        p,
                    });
                }
            }
        }
        Self {
            q: result.q,
            l_design: result.l_design,
            l_actual: result.l_actual(),
            coordinate_budget: result.coordinate_budget,
            delta_i_nats: result.delta_i,
            bound_nats: result.bound,
            surviving_posteriors: result
                .per_coordinate
                .iter()
                .map(|o| o.surviving_posteriors.clone())
                .collect(),
            pxz,
        }
    }
}

/// Serialized degrade result. Values are nats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegradeResultFile {
    pub q: usize,
    pub l_design: usize,
    pub l_actual: usize,
    pub coordinate_budget: usize,
    pub delta_i_nats: f64,
    pub bound_nats: f64,
    /// Per source output: 1-based cluster tuple.
    pub quantizer: Vec<Vec<usize>>,
    pub pxz: Vec<MassTriplet>,
}

impl DegradeResultFile {
    pub fn from_result(result: &OneHotDegradeResult) -> Self {
        let mut pxz = Vec::new();
        for x in 0..result.q {
            for (col, tuple) in result.tuples.iter().enumerate() {
                let p = result.pxz.mass(x, col);
                if p > 0.0 {
                    pxz.push(MassTriplet {
                        x: x + 1,
                        z: tuple.iter().map(|s| s + 1).collect(),
                        p,
                    });
                }
            }
        }
        Self {
            q: result.q,
            l_design: result.l_design,
            l_actual: result.l_actual(),
            coordinate_budget: result.coordinate_budget,
            delta_i_nats: result.delta_i,
            bound_nats: result.bound,
            quantizer: result
                .quantizer
                .iter()
                .map(|&t| result.tuples[t].iter().map(|s| s + 1).collect())
                .collect(),
            pxz,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
