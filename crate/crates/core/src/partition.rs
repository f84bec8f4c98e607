//! Residue-class and shifted-block partitions of `{1, ..., n}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Interval;

/// `J_r = {k in 1..=n : k ≡ r (mod m+1)}` for `r = 1..=m+1`.
///
/// Distinct indices in one class differ by a nonzero multiple of `m + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueClassPartition {
    pub n: usize,
    pub m: usize,
    /// `classes[r - 1]` is `J_r`, in increasing order.
    pub classes: Vec<Vec<usize>>,
}

pub fn residue_classes(n: usize, m: usize) -> ResidueClassPartition {
    let width = m + 1;
    let mut classes = vec![Vec::with_capacity(n / width + 1); width];
    for k in 1..=n {
        // k ≡ r with r in 1..=m+1; r = m+1 is the class of multiples of m+1.
        let r = (k - 1) % width;
        classes[r].push(k);
    }
    ResidueClassPartition { n, m, classes }
}

/// One block `I^{(r)}_j` of a shifted partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// Block number `j`; block `j` of shift `r` nominally spans
    /// `r + (j-1)m + 1 ..= r + jm`.
    pub j: usize,
    pub indices: Interval,
}

/// The `r`-shifted partition of `{1, ..., n}` into length-`m` blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftedBlockPartition {
    pub n: usize,
    pub m: usize,
    pub shift: usize,
    /// Nonempty blocks in increasing `j`.
    pub blocks: Vec<Block>,
}

impl ShiftedBlockPartition {
    /// The block containing `k`, if `1 <= k <= n`.
    pub fn block_of(&self, k: usize) -> Option<usize> {
        if k == 0 || k > self.n {
            return None;
        }
        // Block number is floor((k - r - 1) / m) + 1, and k - r - 1 >= -m.
        let j = (k + self.m - self.shift - 1) / self.m;
        Some(j)
    }
}

pub fn shifted_blocks(n: usize, m: usize, shift: usize) -> Result<ShiftedBlockPartition> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "shifted block partitions need m >= 1".into(),
        ));
    }
    if shift >= m {
        return Err(Error::InvalidArgument(format!(
            "shift {shift} out of range 0..={}",
            m - 1
        )));
    }
    let mut blocks = Vec::new();
    let mut j = 0usize;
    loop {
        // r + (j-1)m + 1 may be nonpositive for j = 0.
        let nominal_first = (shift + 1 + j * m) as isize - m as isize;
        let nominal_last = shift + j * m;
        let first = nominal_first.max(1) as usize;
        if first > n {
            break;
        }
        let last = nominal_last.min(n);
        if first <= last {
            blocks.push(Block {
                j,
                indices: Interval::new(first, last),
            });
        }
        j += 1;
    }
    Ok(ShiftedBlockPartition {
        n,
        m,
        shift,
        blocks,
    })
}

/// Number of shifts `r in 0..m` for which `i` and `l` share a block:
/// `m - d` when the gap `d = l - i` is at most `m - 1`, otherwise 0.
pub fn pair_shift_count(i: usize, l: usize, m: usize) -> Result<usize> {
    if i >= l {
        return Err(Error::InvalidArgument(format!(
            "pair_shift_count needs i < l, got i = {i}, l = {l}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("pair_shift_count needs m >= 1".into()));
    }
    let d = l - i;
    Ok(m.saturating_sub(d))
}
