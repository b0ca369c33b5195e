//! Set partitions, two-block splits and dissections of ordered label lists.

use crate::error::{Error, Result};

/// A partition of a label set into non-empty blocks.
///
/// Blocks are sorted internally and ordered by their smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn into_blocks(self) -> Vec<Vec<usize>> {
        self.blocks
    }

    fn from_rgs(items: &[usize], rgs: &[usize], k: usize) -> Self {
        let mut blocks = vec![Vec::new(); k];
        for (&b, &x) in rgs.iter().zip(items) {
            blocks[b].push(x);
        }
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        Self { blocks }
    }
}

/// An ordered dissection of a chain into consecutive, non-empty segments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dissection {
    segments: Vec<Vec<usize>>,
}

impl Dissection {
    pub fn segments(&self) -> &[Vec<usize>] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Visits every restricted growth string of length `n`, in lexicographic order.
fn for_each_rgs(n: usize, mut f: impl FnMut(&[usize], usize)) {
    if n == 0 {
        return;
    }
    let mut a = vec![0usize; n];
    // m[i] = 1 + max(a[0..i])
    let mut m = vec![1usize; n];
    loop {
        f(&a, m[n - 1].max(a[n - 1] + 1));
        // advance
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            if a[i] < m[i - 1] {
                a[i] += 1;
                m[i] = m[i - 1].max(a[i] + 1);
                for j in i + 1..n {
                    a[j] = 0;
                    m[j] = m[j - 1];
                }
                break;
            }
            i -= 1;
        }
    }
}

/// All set partitions of `items` with a block count in `min_blocks..=max_blocks`.
pub fn set_partitions(items: &[usize], min_blocks: usize, max_blocks: usize) -> Result<Vec<SetPartition>> {
    if items.is_empty() {
        return Err(Error::InvalidArgument("cannot partition an empty label list".into()));
    }
    if min_blocks < 1 || min_blocks > max_blocks || max_blocks > items.len() {
        return Err(Error::InvalidArgument(format!(
            "block range {min_blocks}..={max_blocks} invalid for {} items",
            items.len()
        )));
    }
    let mut out = Vec::new();
    for_each_rgs(items.len(), |rgs, k| {
        if (min_blocks..=max_blocks).contains(&k) {
            out.push(SetPartition::from_rgs(items, rgs, k));
        }
    });
    Ok(out)
}

/// All set partitions of `items` with any number of blocks; the empty list
/// has exactly one (empty) partition.
pub fn all_set_partitions(items: &[usize]) -> Vec<SetPartition> {
    if items.is_empty() {
        return vec![SetPartition { blocks: Vec::new() }];
    }
    set_partitions(items, 1, items.len()).expect("valid range")
}

/// Unordered splits of `items` into two non-empty blocks.
///
/// The first block always contains `items[0]`.
pub fn two_block_splits(items: &[usize]) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let n = items.len();
    if n < 2 {
        return Err(Error::InvalidArgument("two-block splits need at least two labels".into()));
    }
    let mut out = Vec::with_capacity((1 << (n - 1)) - 1);
    // mask over items[1..]: bit set means the element joins the second block
    for mask in 1u64..(1u64 << (n - 1)) {
        let mut x1 = vec![items[0]];
        let mut x2 = Vec::new();
        for (i, &x) in items[1..].iter().enumerate() {
            if mask >> i & 1 == 1 {
                x2.push(x);
            } else {
                x1.push(x);
            }
        }
        out.push((x1, x2));
    }
    Ok(out)
}

/// Dissections of the chain `segment` into at most `max_segments` consecutive
/// segments, ordered by segment count and then lexicographically by cut points.
pub fn ordered_dissections(segment: &[usize], max_segments: usize) -> Result<Vec<Dissection>> {
    let n = segment.len();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot dissect an empty chain".into()));
    }
    if max_segments == 0 {
        return Err(Error::InvalidArgument("max_segments must be at least 1".into()));
    }
    let mut out = Vec::new();
    for k in 1..=max_segments.min(n) {
        for cuts in combinations(n - 1, k - 1) {
            let mut segments = Vec::with_capacity(k);
            let mut start = 0;
            for &c in &cuts {
                segments.push(segment[start..=c].to_vec());
                start = c + 1;
            }
            segments.push(segment[start..].to_vec());
            out.push(Dissection { segments });
        }
    }
    Ok(out)
}

/// k-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All subsets of `items`, each kept in ground order, smallest first.
pub fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 0..=items.len() {
        for c in combinations(items.len(), k) {
            out.push(c.into_iter().map(|i| items[i]).collect());
        }
    }
    out
}

/// Injective maps from `0..k` into `0..n`, as image lists.
pub fn injections(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    let mut used = vec![false; n];
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(k, n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(k, n, &mut cur, &mut used, &mut out);
    out
}

/// Compositions of every integer in `1..=total` whose parts are all positive.
pub fn compositions_up_to(total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for m in 1..=total {
        for k in 1..=m {
            for cuts in combinations(m - 1, k - 1) {
                let mut parts = Vec::with_capacity(k);
                let mut prev = 0;
                for &c in &cuts {
                    parts.push(c + 1 - prev);
                    prev = c + 1;
                }
                parts.push(m - prev);
                out.push(parts);
            }
        }
    }
    out
}

/// `(−1)^{p−1}(p−1)!`
pub fn cumulant_coefficient(p: usize) -> Result<i64> {
    if p < 1 {
        return Err(Error::InvalidArgument("cumulant coefficient needs at least one block".into()));
    }
    if p > 21 {
        return Err(Error::InvalidArgument(format!("{p} blocks overflow the coefficient")));
    }
    let f: i64 = (1..p as i64).product();
    Ok(if p % 2 == 1 { f } else { -f })
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}
