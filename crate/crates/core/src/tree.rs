//! Configuration tree of outcome counts.
//!
//! Node `j` at level `k` (`2^k <= j < 2^(k+1)`) counts the examples whose
//! correctness pattern under the first `k` classifiers is the genealogy of
//! `j`: the binary digits of `j` after the leading one, with `0 -> -1`
//! (misclassified) and `1 -> +1` (correct). The root is `j = 1` with
//! `c_1 = n`; children of `j` are `2j` (misclassified by the next
//! classifier) and `2j + 1`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::OutcomeMatrix;
use crate::error::{Error, Result};

/// Largest supported number of classifiers (the flat array has `2^(p+1)` slots).
pub const MAX_DEPTH: usize = 30;

/// Leaf indices of `n_0..n_3` in a depth-3 tree.
const N_LEAVES: [usize; 4] = [8, 12, 10, 9];
/// Leaf indices of `m_0..m_3` in a depth-3 tree.
const M_LEAVES: [usize; 4] = [15, 11, 13, 14];

/// The `+-1` path from the root to a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genealogy {
    signs: Vec<i8>,
}

impl Genealogy {
    pub fn of(j: usize) -> Result<Self> {
        if j < 2 {
            return Err(Error::validation(format!(
                "genealogy needs an index >= 2, got {j}"
            )));
        }
        let level = level_of(j);
        let signs = (0..level)
            .rev()
            .map(|bit| if (j >> bit) & 1 == 1 { 1 } else { -1 })
            .collect();
        Ok(Genealogy { signs })
    }

    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.len() > MAX_DEPTH {
            return Err(Error::validation("genealogy length out of range"));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::validation("genealogy entries must be -1 or 1"));
        }
        Ok(Genealogy { signs })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Prepends the leading one and reads the path back as an index.
    pub fn to_index(&self) -> usize {
        self.signs
            .iter()
            .fold(1, |j, &s| 2 * j + usize::from(s == 1))
    }
}

/// Level `k` of index `j >= 1`, i.e. `floor(log2 j)`.
#[inline]
pub fn level_of(j: usize) -> usize {
    (usize::BITS - 1 - j.leading_zeros()) as usize
}

/// The eight depth-3 leaf counts under the `n_j` / `m_j` labels: `n_j`
/// are the complements of the `m_j` patterns, `m_0` is "all correct" and
/// `m_j` (`j >= 1`) is "only classifier `j` wrong".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafTableP3 {
    pub n: [u64; 4],
    pub m: [u64; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeTree {
    depth: usize,
    counts: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeJson {
    p: usize,
    counts: Vec<Option<u64>>,
}

fn check_depth(p: usize) -> Result<()> {
    if p == 0 || p > MAX_DEPTH {
        return Err(Error::validation(format!(
            "tree depth must be in 1..={MAX_DEPTH}, got {p}"
        )));
    }
    Ok(())
}

impl OutcomeTree {
    pub fn build(outcomes: &OutcomeMatrix) -> Result<Self> {
        let p = outcomes.p();
        check_depth(p)?;
        let mut counts = vec![0u64; 1 << (p + 1)];
        for row in outcomes.rows() {
            let leaf = row.iter().fold(1usize, |j, &o| 2 * j + usize::from(o == 1));
            counts[leaf] += 1;
        }
        fill_parents(&mut counts, p);
        Ok(OutcomeTree { depth: p, counts })
    }

    /// Builds the tree from its `2^p` leaf counts in index order.
    pub fn from_leaf_counts(p: usize, leaves: &[u64]) -> Result<Self> {
        check_depth(p)?;
        if leaves.len() != 1 << p {
            return Err(Error::validation(format!(
                "depth {p} needs {} leaf counts, got {}",
                1usize << p,
                leaves.len()
            )));
        }
        let mut counts = vec![0u64; 1 << (p + 1)];
        counts[1 << p..].copy_from_slice(leaves);
        fill_parents(&mut counts, p);
        if counts[1] == 0 {
            return Err(Error::validation("tree must count at least one example"));
        }
        Ok(OutcomeTree { depth: p, counts })
    }

    /// Accepts a full flat array (index 0 ignored) and checks the parent rule.
    pub fn from_counts(p: usize, counts: Vec<u64>) -> Result<Self> {
        check_depth(p)?;
        if counts.len() != 1 << (p + 1) {
            return Err(Error::validation(format!(
                "depth {p} needs {} slots, got {}",
                1usize << (p + 1),
                counts.len()
            )));
        }
        let tree = Self::from_leaf_counts(p, &counts[1 << p..])?;
        if let Some(j) = (1..counts.len()).find(|&j| counts[j] != tree.counts[j]) {
            return Err(Error::validation(format!(
                "count c_{j} = {} breaks the parent rule (expected {})",
                counts[j], tree.counts[j]
            )));
        }
        Ok(tree)
    }

    pub fn from_leaf_table_p3(table: &LeafTableP3) -> Result<Self> {
        let mut leaves = [0u64; 8];
        for j in 0..4 {
            leaves[N_LEAVES[j] - 8] = table.n[j];
            leaves[M_LEAVES[j] - 8] = table.m[j];
        }
        Self::from_leaf_counts(3, &leaves)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n(&self) -> u64 {
        self.counts[1]
    }

    /// `c_j`; panics when `j` is outside `1..2^(p+1)`.
    pub fn count(&self, j: usize) -> u64 {
        assert!(j >= 1, "index 0 is unused");
        self.counts[j]
    }

    /// Flat array, index 0 unused (always 0).
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Counts of level `k`, indices `2^k..2^(k+1)`.
    pub fn level(&self, k: usize) -> &[u64] {
        assert!(k <= self.depth, "level {k} beyond depth {}", self.depth);
        &self.counts[1 << k..1 << (k + 1)]
    }

    pub fn leaves(&self) -> &[u64] {
        self.level(self.depth)
    }

    /// The tree restricted to the first `k` classifiers.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        check_depth(k)?;
        if k > self.depth {
            return Err(Error::validation(format!(
                "cannot truncate depth {} to {k}",
                self.depth
            )));
        }
        Ok(OutcomeTree {
            depth: k,
            counts: self.counts[..1 << (k + 1)].to_vec(),
        })
    }

    pub fn all_leaves_positive(&self) -> bool {
        self.leaves().iter().all(|&c| c > 0)
    }

    pub fn leaf_table_p3(&self) -> Result<LeafTableP3> {
        if self.depth != 3 {
            return Err(Error::validation(format!(
                "the n/m leaf table needs depth 3, got {}",
                self.depth
            )));
        }
        Ok(LeafTableP3 {
            n: N_LEAVES.map(|j| self.counts[j]),
            m: M_LEAVES.map(|j| self.counts[j]),
        })
    }

    /// `{p, counts: [null, c_1, ...]}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let counts = std::iter::once(None)
            .chain(self.counts[1..].iter().copied().map(Some))
            .collect();
        serde_json::to_value(TreeJson {
            p: self.depth,
            counts,
        })
        .expect("tree json is always serializable")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("tree json")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TreeJson = serde_json::from_str(text)?;
        Self::from_json_parts(raw)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        Self::from_json_parts(serde_json::from_value(value)?)
    }

    fn from_json_parts(raw: TreeJson) -> Result<Self> {
        if raw.counts.first().is_some_and(Option::is_some) {
            return Err(Error::validation("tree counts[0] must be null"));
        }
        let mut counts = Vec::with_capacity(raw.counts.len());
        counts.push(0);
        for (j, c) in raw.counts.iter().enumerate().skip(1) {
            counts.push(c.ok_or_else(|| Error::validation(format!("count {j} is null")))?);
        }
        Self::from_counts(raw.p, counts)
    }

    /// Three-classifier truth table as CSV: one row per classifier plus the
    /// count row, columns `n0,m0,...,n3,m3`.
    pub fn write_table_p3_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let table = self.leaf_table_p3()?;
        let columns: Vec<usize> = (0..4).flat_map(|j| [N_LEAVES[j], M_LEAVES[j]]).collect();
        writeln!(out, "row,n0,m0,n1,m1,n2,m2,n3,m3")?;
        for k in 0..3 {
            let signs: Vec<String> = columns
                .iter()
                .map(|&j| Genealogy::of(j).expect("leaf index").signs()[k].to_string())
                .collect();
            writeln!(out, "G{},{}", k + 1, signs.join(","))?;
        }
        let counts: Vec<String> = (0..4)
            .flat_map(|j| [table.n[j], table.m[j]])
            .map(|c| c.to_string())
            .collect();
        writeln!(out, "count,{}", counts.join(","))?;
        Ok(())
    }
}

fn fill_parents(counts: &mut [u64], p: usize) {
    for j in (1..(1usize << p)).rev() {
        counts[j] = counts[2 * j] + counts[2 * j + 1];
    }
}
