//! Coalitions, canonical partitions, and size-capped partition families.
//!
//! A [`Partition`] is kept in canonical form: blocks are sorted by their
//! smallest member and members ascend inside each block. Its `Display`
//! output is the canonical string `0,1|2|3`, which is also accepted by
//! `FromStr`.
//!
//! Families are enumerated as restricted growth strings (RGS) with a cap on
//! block sizes, so the order is lexicographic in the RGS and deterministic.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Hard upper bound on the player count; coalitions are 64-bit member masks.
pub const MAX_PLAYERS: usize = 64;

/// Default cap on the player count for enumeration.
pub const DEFAULT_PLAYER_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerId(pub usize);

impl From<usize> for PlayerId {
    fn from(i: usize) -> Self {
        PlayerId(i)
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A nonempty set of players, stored as a member bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(u64);

#[allow(clippy::len_without_is_empty)] // never empty
impl Coalition {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Result<Self> {
        let mut bits = 0u64;
        for m in members {
            if m >= MAX_PLAYERS {
                return Err(Error::InvalidParameter(format!(
                    "player index {m} exceeds the maximum of {}",
                    MAX_PLAYERS - 1
                )));
            }
            if bits & (1 << m) != 0 {
                return Err(Error::InvalidParameter(format!(
                    "player {m} listed twice in a coalition"
                )));
            }
            bits |= 1 << m;
        }
        Self::from_bits(bits).ok_or_else(|| Error::InvalidParameter("empty coalition".to_string()))
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_PLAYERS, "player index {i} out of range");
        Coalition(1 << i)
    }

    pub fn from_bits(bits: u64) -> Option<Self> {
        (bits != 0).then_some(Coalition(bits))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_PLAYERS && self.0 & (1 << i) != 0
    }

    pub fn smallest(self) -> usize {
        self.0.trailing_zeros() as usize
    }

    /// Members in ascending order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        core::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let m = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(m)
        })
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.members().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// A coalition structure over players `0..n`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    n: usize,
    blocks: Vec<Coalition>,
}

#[allow(clippy::len_without_is_empty)] // never empty
impl Partition {
    /// Builds a partition, validating disjointness and coverage, and
    /// canonicalizes block order.
    pub fn from_blocks(n: usize, mut blocks: Vec<Coalition>) -> Result<Self> {
        let render = |blocks: &[Coalition]| {
            blocks
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join("|")
        };
        if n == 0 || n > MAX_PLAYERS {
            return Err(Error::InvalidPartition {
                input: render(&blocks),
                reason: format!("player count {n} outside 1..={MAX_PLAYERS}"),
            });
        }
        let mut seen = 0u64;
        for b in &blocks {
            if b.bits() & seen != 0 {
                return Err(Error::InvalidPartition {
                    input: render(&blocks),
                    reason: "blocks overlap".to_string(),
                });
            }
            seen |= b.bits();
        }
        let all = full_mask(n);
        if seen & !all != 0 {
            return Err(Error::InvalidPartition {
                input: render(&blocks),
                reason: format!("member outside 0..{n}"),
            });
        }
        if seen != all {
            return Err(Error::InvalidPartition {
                input: render(&blocks),
                reason: format!("blocks do not cover players 0..{n}"),
            });
        }
        blocks.sort_by_key(|b| b.smallest());
        Ok(Partition { n, blocks })
    }

    pub fn singletons(n: usize) -> Self {
        assert!((1..=MAX_PLAYERS).contains(&n));
        Partition {
            n,
            blocks: (0..n).map(Coalition::singleton).collect(),
        }
    }

    pub fn grand(n: usize) -> Self {
        assert!((1..=MAX_PLAYERS).contains(&n));
        Partition {
            n,
            blocks: vec![Coalition(full_mask(n))],
        }
    }

    /// Builds a partition from a restricted growth string: `labels[i]` is the
    /// block index of player `i`.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let n = labels.len();
        let groups = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut masks = vec![0u64; groups];
        for (i, &l) in labels.iter().enumerate() {
            if i >= MAX_PLAYERS {
                return Err(Error::InvalidParameter(format!(
                    "more than {MAX_PLAYERS} players"
                )));
            }
            masks[l] |= 1 << i;
        }
        let blocks = masks.into_iter().filter_map(Coalition::from_bits).collect();
        Self::from_blocks(n, blocks)
    }

    /// Parses the canonical string form against a known player count.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let p: Partition = s.parse()?;
        if p.n != n {
            return Err(Error::InvalidPartition {
                input: s.to_string(),
                reason: format!("covers {} players, expected {n}", p.n),
            });
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Coalition] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).max().unwrap_or(0)
    }

    pub fn is_singletons(&self) -> bool {
        self.blocks.len() == self.n
    }

    /// The block containing `i`.
    ///
    /// Panics if `i` is not a player of this partition.
    pub fn coalition_of(&self, i: PlayerId) -> Coalition {
        assert!(i.0 < self.n, "player {} outside 0..{}", i.0, self.n);
        *self
            .blocks
            .iter()
            .find(|b| b.contains(i.0))
            .expect("partition covers every player")
    }

    /// The restricted growth string of this partition.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (k, b) in self.blocks.iter().enumerate() {
            for m in b.members() {
                labels[m] = k;
            }
        }
        labels
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                f.write_str("|")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition({self})")
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Accepts `0,1|2|3`; blocks and members may appear in any order and the
    /// player count is inferred from the largest member.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidPartition {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(bad("empty string"));
        }
        let mut blocks = Vec::new();
        let mut max = 0usize;
        for block in trimmed.split('|') {
            let mut members = Vec::new();
            for tok in block.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    return Err(bad("empty member or block"));
                }
                let m: usize = tok.parse().map_err(|_| bad("member is not an index"))?;
                if m >= MAX_PLAYERS {
                    return Err(bad("member index too large"));
                }
                max = max.max(m);
                members.push(m);
            }
            let c = Coalition::new(members).map_err(|e| bad(&e.to_string()))?;
            blocks.push(c);
        }
        Partition::from_blocks(max + 1, blocks).map_err(|e| match e {
            Error::InvalidPartition { reason, .. } => bad(&reason),
            other => other,
        })
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// All partitions of `0..n` whose blocks have at most `max_size` members.
#[derive(Clone, Debug)]
pub struct PartitionFamily {
    n: usize,
    max_size: usize,
    partitions: Vec<Partition>,
    index: BTreeMap<Partition, usize>,
}

#[allow(clippy::len_without_is_empty)] // never empty
impl PartitionFamily {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn get(&self, idx: usize) -> Option<&Partition> {
        self.partitions.get(idx)
    }

    pub fn index_of(&self, p: &Partition) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &Partition) -> bool {
        self.index.contains_key(p)
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Partition> {
        self.partitions.iter()
    }
}

impl PartialEq for PartitionFamily {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.max_size == other.max_size && self.partitions == other.partitions
    }
}

fn check_params(n: usize, k: usize, min_n: usize, limit: usize) -> Result<()> {
    if n < min_n {
        return Err(Error::InvalidParameter(format!(
            "need at least {min_n} players, got {n}"
        )));
    }
    if n > limit.min(MAX_PLAYERS) {
        return Err(Error::InvalidParameter(format!(
            "{n} players exceeds the limit of {}",
            limit.min(MAX_PLAYERS)
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter(
            "maximum coalition size must be at least 1".to_string(),
        ));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "maximum coalition size {k} exceeds the player count {n}"
        )));
    }
    Ok(())
}

/// Enumerates `P(K)` for `n` players with the default player limit.
pub fn enumerate_partitions(n: usize, max_size: usize) -> Result<PartitionFamily> {
    enumerate_partitions_with_limit(n, max_size, DEFAULT_PLAYER_LIMIT)
}

pub fn enumerate_partitions_with_limit(
    n: usize,
    max_size: usize,
    player_limit: usize,
) -> Result<PartitionFamily> {
    check_params(n, max_size, 2, player_limit)?;

    let mut partitions = Vec::new();
    let mut labels = vec![0usize; n];
    let mut sizes = vec![0usize; n];
    sizes[0] = 1;
    extend_rgs(1, 1, max_size, &mut labels, &mut sizes, &mut partitions);

    let index = partitions
        .iter()
        .enumerate()
        .map(|(k, p)| (p.clone(), k))
        .collect();
    Ok(PartitionFamily {
        n,
        max_size,
        partitions,
        index,
    })
}

// Depth-first over restricted growth strings; position `pos` may reuse any
// open block that still has room, or open block `used`.
fn extend_rgs(
    pos: usize,
    used: usize,
    cap: usize,
    labels: &mut [usize],
    sizes: &mut [usize],
    out: &mut Vec<Partition>,
) {
    if pos == labels.len() {
        out.push(Partition::from_labels(labels).expect("restricted growth string is valid"));
        return;
    }
    for l in 0..=used {
        if l < used && sizes[l] >= cap {
            continue;
        }
        labels[pos] = l;
        sizes[l] += 1;
        extend_rgs(pos + 1, used.max(l + 1), cap, labels, sizes, out);
        sizes[l] -= 1;
    }
}

/// `|P(K)|` from the recurrence `a(m) = Σ_{j=1..min(K,m)} C(m-1, j-1) a(m-j)`,
/// `a(0) = 1`, without enumerating. Accepts a single player.
pub fn count_partitions(n: usize, max_size: usize) -> Result<u128> {
    check_params(n, max_size, 1, MAX_PLAYERS)?;
    let mut binom = vec![vec![0u128; n + 1]; n + 1];
    for m in 0..=n {
        binom[m][0] = 1;
        for j in 1..=m {
            binom[m][j] = binom[m - 1][j - 1] + if j < m { binom[m - 1][j] } else { 0 };
        }
    }
    let mut a = vec![0u128; n + 1];
    a[0] = 1;
    for m in 1..=n {
        a[m] = (1..=max_size.min(m))
            .map(|j| binom[m - 1][j - 1] * a[m - j])
            .sum();
    }
    Ok(a[n])
}

/// Whether every partition of `small` also belongs to `large`.
pub fn is_nested(small: &PartitionFamily, large: &PartitionFamily) -> Result<bool> {
    if small.n != large.n {
        return Err(Error::InvalidParameter(format!(
            "families cover {} and {} players",
            small.n, large.n
        )));
    }
    Ok(small.partitions.iter().all(|p| large.contains(p)))
}
