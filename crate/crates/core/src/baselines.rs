//! Binary tomography baseline: paths are only classified good or bad, and
//! the smallest consistent failure set (SCFS) blames the highest links whose
//! every downstream path is bad.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::lossmodel::addloss_value;
use crate::topology::{LogicalTree, ROOT};

/// Loss probability above which an estimated path counts as bad when the
/// observation is noisy.
pub const NOISY_BAD_LOSS: f64 = 0.005;

/// [`NOISY_BAD_LOSS`] in addloss units.
pub fn noisy_bad_threshold() -> f64 {
    addloss_value(NOISY_BAD_LOSS)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinaryPathObservation {
    pub bad: Vec<bool>,
}

impl BinaryPathObservation {
    /// Bad paths, 1-based.
    pub fn bad_paths(&self) -> Vec<usize> {
        (1..=self.bad.len()).filter(|&j| self.bad[j - 1]).collect()
    }
}

pub fn binarize(y: &[f64], threshold: f64) -> Result<BinaryPathObservation> {
    if !(threshold >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "binarisation threshold must be non-negative, got {threshold}"
        )));
    }
    Ok(BinaryPathObservation {
        bad: y.iter().map(|&v| v > threshold).collect(),
    })
}

/// Links whose subtree paths are all bad while their father's are not.
pub fn scfs(tree: &LogicalTree, obs: &BinaryPathObservation) -> Result<Vec<usize>> {
    check_len("binary path observation", tree.m(), obs.bad.len())?;
    let mut all_bad = vec![false; tree.n() + 1];
    for k in tree.postorder() {
        all_bad[k] = if tree.is_leaf(k) {
            obs.bad[k - 1]
        } else {
            tree.children(k).iter().all(|&c| all_bad[c])
        };
    }
    let set: Vec<usize> = (1..=tree.n())
        .filter(|&k| {
            let f = tree.father(k);
            all_bad[k] && (f == ROOT || !all_bad[f])
        })
        .collect();

    let mut covered = vec![false; tree.m()];
    for &k in &set {
        for j in tree.leaf_range(k) {
            covered[j - 1] = true;
        }
    }
    if covered != obs.bad {
        return Err(Error::InconsistentObservation(
            "failure set does not reproduce the bad paths".into(),
        ));
    }
    Ok(set)
}
