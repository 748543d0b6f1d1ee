//! k-splittings of `{1, …, m}` and the two correspondences that relate the
//! splittings of `m + 1` to those of `m`.
//!
//! A k-splitting is a tuple `(I_1, …, I_k; i_1 > … > i_{k-1})` of pairwise
//! disjoint blocks and strictly decreasing markers that together exhaust
//! `{1, …, m}`, where every element of `I_α` exceeds `i_α` for `α < k`. The
//! last block `I_k` is unconstrained.
//!
//! Splittings of `m + 1` come in two kinds:
//! - type 1: `m + 1` is a marker (necessarily `i_1`, with `I_1 = ∅`); dropping
//!   both gives a `(k-1)`-splitting of `m`.
//! - type 2: `m + 1` lies in some block; removing it gives a k-splitting of `m`,
//!   and each k-splitting of `m` arises from exactly `k` of these.
//!
//! [`SplittingTable`] generates splittings by running those two constructions
//! forward; [`brute_force_splittings`] is an independent filter over all
//! labelings used to validate it.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::SplittingError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "SplittingWire", into = "SplittingWire")]
pub struct KSplitting {
    m: usize,
    /// Each block sorted decreasingly, so that `η_I = η_{i_1} ⋯ η_{i_l}` reads left to right.
    blocks: Vec<Vec<usize>>,
    markers: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplittingType {
    Type1,
    Type2,
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplittingType::Type1 => f.write_str("type1"),
            SplittingType::Type2 => f.write_str("type2"),
        }
    }
}

impl KSplitting {
    /// Validates every invariant. Blocks may be given in any order internally;
    /// they are stored sorted decreasingly. Markers must already be strictly
    /// decreasing.
    pub fn new(
        m: usize,
        mut blocks: Vec<Vec<usize>>,
        markers: Vec<usize>,
    ) -> Result<Self, SplittingError> {
        let invalid = |reason: String| SplittingError::Invalid { m, reason };
        if blocks.is_empty() {
            return Err(invalid("no blocks".into()));
        }
        if blocks.len() != markers.len() + 1 {
            return Err(invalid(format!(
                "{} blocks but {} markers",
                blocks.len(),
                markers.len()
            )));
        }
        if markers.windows(2).any(|w| w[0] <= w[1]) {
            return Err(invalid("markers not strictly decreasing".into()));
        }
        for b in blocks.iter_mut() {
            b.sort_unstable_by(|a, b| b.cmp(a));
        }
        let mut seen = BTreeSet::new();
        for &x in markers.iter().chain(blocks.iter().flatten()) {
            if x == 0 || x > m {
                return Err(invalid(format!("element {x} outside 1..={m}")));
            }
            if !seen.insert(x) {
                return Err(invalid(format!("element {x} used twice")));
            }
        }
        if seen.len() != m {
            return Err(invalid(
                "blocks and markers do not cover the ground set".into(),
            ));
        }
        for (alpha, &marker) in markers.iter().enumerate() {
            if let Some(&low) = blocks[alpha].last() {
                if low <= marker {
                    return Err(invalid(format!(
                        "block {} holds {low}, not above its marker {marker}",
                        alpha + 1
                    )));
                }
            }
        }
        Ok(Self { m, blocks, markers })
    }

    /// The unique 1-splitting of 0.
    pub fn empty() -> Self {
        Self {
            m: 0,
            blocks: vec![Vec::new()],
            markers: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn markers(&self) -> &[usize] {
        &self.markers
    }

    /// Block sizes shifted by one: `l_α = |I_α| + 1` for every α, a
    /// composition of `m + 1` into `k` positive parts.
    pub fn term_type(&self) -> TermType {
        TermType(self.blocks.iter().map(|b| b.len() + 1).collect())
    }

    /// Type 1 iff `m` is a marker. Needs `m ≥ 1` (the splitting is viewed as
    /// one of `(m-1) + 1`).
    pub fn classify(&self) -> Result<SplittingType, SplittingError> {
        if self.m == 0 {
            return Err(SplittingError::EmptyGroundSet);
        }
        Ok(if self.markers.first() == Some(&self.m) {
            SplittingType::Type1
        } else {
            SplittingType::Type2
        })
    }

    /// Type-1 map to a `(k-1)`-splitting of `m - 1`: drop `I_1 = ∅` and `i_1 = m`.
    pub fn drop_leading_marker(&self) -> Result<KSplitting, SplittingError> {
        if self.classify()? != SplittingType::Type1 || !self.blocks[0].is_empty() {
            return Err(SplittingError::Invalid {
                m: self.m,
                reason: "not a type-1 splitting".into(),
            });
        }
        KSplitting::new(
            self.m - 1,
            self.blocks[1..].to_vec(),
            self.markers[1..].to_vec(),
        )
    }

    /// Inverse of [`drop_leading_marker`](Self::drop_leading_marker): a type-1
    /// `(k+1)`-splitting of `m + 1`.
    pub fn adjoin_leading_marker(&self) -> KSplitting {
        let mut blocks = Vec::with_capacity(self.blocks.len() + 1);
        blocks.push(Vec::new());
        blocks.extend(self.blocks.iter().cloned());
        let mut markers = Vec::with_capacity(self.markers.len() + 1);
        markers.push(self.m + 1);
        markers.extend(self.markers.iter().copied());
        KSplitting {
            m: self.m + 1,
            blocks,
            markers,
        }
    }

    /// Type-2 map: put `m + 1` at the front of block `alpha`.
    pub fn insert_top(&self, alpha: usize) -> KSplitting {
        let mut blocks = self.blocks.clone();
        blocks[alpha].insert(0, self.m + 1);
        KSplitting {
            m: self.m + 1,
            blocks,
            markers: self.markers.clone(),
        }
    }

    /// Type-2 inverse: remove `m` from whichever block holds it.
    pub fn remove_top(&self) -> Result<KSplitting, SplittingError> {
        if self.classify()? != SplittingType::Type2 {
            return Err(SplittingError::Invalid {
                m: self.m,
                reason: "not a type-2 splitting".into(),
            });
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().copied().filter(|&x| x != self.m).collect())
            .collect();
        KSplitting::new(self.m - 1, blocks, self.markers.clone())
    }
}

impl fmt::Display for KSplitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                format!(
                    "{{{}}}",
                    b.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        let markers: Vec<String> = self.markers.iter().map(|x| x.to_string()).collect();
        write!(f, "({}; {})", blocks.join(", "), markers.join(","))
    }
}

#[derive(Serialize, Deserialize)]
struct SplittingWire {
    m: usize,
    blocks: Vec<Vec<usize>>,
    markers: Vec<usize>,
}

impl From<KSplitting> for SplittingWire {
    fn from(s: KSplitting) -> Self {
        SplittingWire {
            m: s.m,
            blocks: s.blocks,
            markers: s.markers,
        }
    }
}

impl TryFrom<SplittingWire> for KSplitting {
    type Error = SplittingError;
    fn try_from(w: SplittingWire) -> Result<Self, SplittingError> {
        KSplitting::new(w.m, w.blocks, w.markers)
    }
}

/// A composition `(l_1, …, l_k)` of `m + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermType(pub Vec<usize>);

impl TermType {
    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `(l_1 + … + l_k)! / (l_1! ⋯ l_k!)`.
    pub fn multinomial(&self) -> BigUint {
        multinomial(&self.0)
    }

    /// `(l_1 - 1)! ⋯ (l_k - 1)!`.
    pub fn factorial_weight(&self) -> BigUint {
        self.0.iter().map(|&l| factorial(l - 1)).product()
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

pub fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::from(0u32);
    }
    factorial(n) / (factorial(r) * factorial(n - r))
}

pub fn multinomial(parts: &[usize]) -> BigUint {
    let n: usize = parts.iter().sum();
    factorial(n) / parts.iter().map(|&l| factorial(l)).product::<BigUint>()
}

/// All compositions of `n` into exactly `k` positive parts, lexicographic.
pub fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            if n == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for first in 1..=n.saturating_sub(k - 1) {
            prefix.push(first);
            go(n - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        go(n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Splittings of every `m ≤ m_max`, built from the type-1 and type-2
/// constructions. Indexed as `[m][k]`; index `k = 0` is always empty.
#[derive(Clone, Debug)]
pub struct SplittingTable {
    rows: Vec<Vec<Vec<KSplitting>>>,
}

impl SplittingTable {
    pub fn build(m_max: usize) -> Self {
        let mut rows: Vec<Vec<Vec<KSplitting>>> = vec![vec![Vec::new(), vec![KSplitting::empty()]]];
        for m in 0..m_max {
            let prev = &rows[m];
            let mut next = vec![Vec::new(); m + 3];
            for (k, slot) in next.iter_mut().enumerate().skip(1) {
                if k >= 2 {
                    slot.extend(prev[k - 1].iter().map(KSplitting::adjoin_leading_marker));
                }
                if let Some(sources) = prev.get(k) {
                    for src in sources {
                        slot.extend((0..k).map(|alpha| src.insert_top(alpha)));
                    }
                }
            }
            rows.push(next);
        }
        Self { rows }
    }

    pub fn m_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// Empty for `k` outside `1..=m+1` or `m` beyond the table.
    pub fn get(&self, m: usize, k: usize) -> &[KSplitting] {
        self.rows
            .get(m)
            .and_then(|row| row.get(k))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Every splitting of `m`, ordered by `k`.
    pub fn all(&self, m: usize) -> impl Iterator<Item = &KSplitting> {
        self.rows.get(m).into_iter().flatten().flatten()
    }
}

/// All distinct k-splittings of `m`; empty when `k ∉ 1..=m+1`.
pub fn enumerate_splittings(m: usize, k: usize) -> Vec<KSplitting> {
    if k == 0 || k > m + 1 {
        return Vec::new();
    }
    SplittingTable::build(m).get(m, k).to_vec()
}

pub fn count_splittings(m: usize, k: usize) -> u64 {
    enumerate_splittings(m, k).len() as u64
}

/// `N(m, k)` from `N(m+1, k) = N(m, k-1) + k N(m, k)`, `N(0, 1) = 1`.
pub fn count_by_recursion(m: usize, k: usize) -> u64 {
    let mut row = vec![0u64, 1];
    for _ in 0..m {
        let mut next = vec![0u64; row.len() + 1];
        for (kk, slot) in next.iter_mut().enumerate().skip(1) {
            let from_type1 = row.get(kk - 1).copied().unwrap_or(0);
            let from_type2 = kk as u64 * row.get(kk).copied().unwrap_or(0);
            *slot = from_type1 + from_type2;
        }
        row = next;
    }
    row.get(k).copied().unwrap_or(0)
}

/// Every k-splitting of `m`, found by labeling each element of `{1, …, m}`
/// as a marker or as a member of one of the `k` blocks and keeping the
/// labelings that satisfy the invariants. Exponential; meant for `m ≤ 7`.
pub fn brute_force_splittings(m: usize, k: usize) -> Vec<KSplitting> {
    if k == 0 {
        return Vec::new();
    }
    // label 0 = marker, label α = block α (1-based)
    let mut labels = vec![0usize; m];
    let mut out = Vec::new();
    loop {
        let markers: Vec<usize> = (1..=m).rev().filter(|&x| labels[x - 1] == 0).collect();
        if markers.len() + 1 == k {
            let mut blocks = vec![Vec::new(); k];
            for x in 1..=m {
                if labels[x - 1] > 0 {
                    blocks[labels[x - 1] - 1].push(x);
                }
            }
            let ok = (0..k - 1).all(|alpha| blocks[alpha].iter().all(|&x| x > markers[alpha]));
            if ok {
                if let Ok(s) = KSplitting::new(m, blocks, markers) {
                    out.push(s);
                }
            }
        }
        // odometer over labels in 0..=k
        let mut pos = 0;
        loop {
            if pos == m {
                out.sort();
                return out;
            }
            labels[pos] += 1;
            if labels[pos] <= k {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
    }
}

/// Pairs each type-1 k-splitting of `m + 1` with the `(k-1)`-splitting of `m`
/// it reduces to, after checking the map is a bijection with inverse
/// "adjoin `I_1 = ∅`, `i_1 = m + 1`".
pub fn type1_bijection(
    m: usize,
    k: usize,
) -> Result<Vec<(KSplitting, KSplitting)>, SplittingError> {
    if k < 2 || k > m + 2 {
        return Err(SplittingError::KOutOfRange { m, k });
    }
    let table = SplittingTable::build(m + 1);
    type1_bijection_in(&table, m, k)
}

pub fn type1_bijection_in(
    table: &SplittingTable,
    m: usize,
    k: usize,
) -> Result<Vec<(KSplitting, KSplitting)>, SplittingError> {
    let fail = |reason: String| SplittingError::Correspondence { m, k, reason };
    let sources: HashSet<&KSplitting> = table.get(m, k - 1).iter().collect();
    let mut images = HashSet::new();
    let mut pairs = Vec::new();
    for target in table.get(m + 1, k) {
        if target.classify()? != SplittingType::Type1 {
            continue;
        }
        let image = target
            .drop_leading_marker()
            .map_err(|e| fail(format!("{target} does not reduce: {e}")))?;
        if !sources.contains(&image) {
            return Err(fail(format!("{image} is not a known splitting of m")));
        }
        if image.adjoin_leading_marker() != *target {
            return Err(fail(format!(
                "adjoining to {image} does not recover {target}"
            )));
        }
        if !images.insert(image.clone()) {
            return Err(fail(format!("{image} hit twice")));
        }
        pairs.push((target.clone(), image));
    }
    if images.len() != sources.len() {
        return Err(fail(format!(
            "{} of {} splittings of m are reached",
            images.len(),
            sources.len()
        )));
    }
    Ok(pairs)
}

/// For each k-splitting of `m`, the `k` type-2 splittings of `m + 1` obtained
/// by inserting `m + 1` into each block, after checking these covers are
/// pairwise disjoint and exhaust the type-2 class.
pub fn type2_correspondence(
    m: usize,
    k: usize,
) -> Result<Vec<(KSplitting, Vec<KSplitting>)>, SplittingError> {
    if k == 0 || k > m + 1 {
        return Err(SplittingError::KOutOfRange { m, k });
    }
    let table = SplittingTable::build(m + 1);
    type2_correspondence_in(&table, m, k)
}

pub fn type2_correspondence_in(
    table: &SplittingTable,
    m: usize,
    k: usize,
) -> Result<Vec<(KSplitting, Vec<KSplitting>)>, SplittingError> {
    let fail = |reason: String| SplittingError::Correspondence { m, k, reason };
    let targets: HashSet<&KSplitting> = table
        .get(m + 1, k)
        .iter()
        .filter(|s| s.classify() == Ok(SplittingType::Type2))
        .collect();
    let mut covered = HashSet::new();
    let mut out = Vec::new();
    for src in table.get(m, k) {
        let mut fiber = Vec::with_capacity(k);
        for alpha in 0..k {
            let img = src.insert_top(alpha);
            let img = KSplitting::new(img.m, img.blocks, img.markers)
                .map_err(|e| fail(format!("inserting into block {} of {src}: {e}", alpha + 1)))?;
            if img.classify()? != SplittingType::Type2 {
                return Err(fail(format!("{img} is not type 2")));
            }
            if img.remove_top()? != *src {
                return Err(fail(format!("{img} does not reduce to {src}")));
            }
            if !targets.contains(&img) {
                return Err(fail(format!("{img} missing from the type-2 class")));
            }
            if !covered.insert(img.clone()) {
                return Err(fail(format!("{img} reached twice")));
            }
            fiber.push(img);
        }
        out.push((src.clone(), fiber));
    }
    if covered.len() != targets.len() {
        return Err(fail(format!(
            "{} of {} type-2 splittings covered",
            covered.len(),
            targets.len()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unique_splitting_of_zero() {
        let all = enumerate_splittings(0, 1);
        assert_eq!(all, vec![KSplitting::empty()]);
        assert_eq!(all[0].k(), 1);
        assert!(all[0].blocks()[0].is_empty());
    }

    #[test]
    fn small_enumerations() {
        let one_two = enumerate_splittings(1, 2);
        assert_eq!(
            one_two,
            vec![KSplitting::new(1, vec![vec![], vec![]], vec![1]).unwrap()]
        );
        assert_eq!(enumerate_splittings(2, 2).len(), 3);
        assert!(enumerate_splittings(2, 0).is_empty());
        assert!(enumerate_splittings(2, 4).is_empty());
    }

    #[test]
    fn generator_matches_brute_force() {
        for m in 0..=6 {
            for k in 1..=m + 2 {
                let mut generated = enumerate_splittings(m, k);
                generated.sort();
                assert_eq!(generated, brute_force_splittings(m, k), "m={m} k={k}");
            }
        }
    }

    #[test]
    fn counts_follow_recursion() {
        assert_eq!(count_splittings(0, 1), 1);
        assert_eq!(count_splittings(2, 2), 3);
        assert_eq!((1..=4).map(|k| count_splittings(3, k)).sum::<u64>(), 15);
        for m in 0..=8 {
            for k in 0..=m + 2 {
                assert_eq!(
                    count_splittings(m, k),
                    count_by_recursion(m, k),
                    "m={m} k={k}"
                );
            }
        }
    }

    #[test]
    fn invariants_rejected() {
        // marker 2 with block {1} violates "elements above the marker"
        assert!(KSplitting::new(2, vec![vec![1], vec![]], vec![2]).is_err());
        // not covering
        assert!(KSplitting::new(2, vec![vec![2]], vec![]).is_err());
        // duplicate
        assert!(KSplitting::new(2, vec![vec![2, 2], vec![1]], vec![]).is_err());
        // wrong marker count
        assert!(KSplitting::new(1, vec![vec![1], vec![]], vec![]).is_err());
        // increasing markers
        assert!(KSplitting::new(2, vec![vec![], vec![], vec![]], vec![1, 2]).is_err());
        // out of range
        assert!(KSplitting::new(1, vec![vec![2]], vec![]).is_err());
    }

    #[test]
    fn classification_examples() {
        let a = KSplitting::new(1, vec![vec![], vec![]], vec![1]).unwrap();
        assert_eq!(a.classify().unwrap(), SplittingType::Type1);
        let b = KSplitting::new(1, vec![vec![1]], vec![]).unwrap();
        assert_eq!(b.classify().unwrap(), SplittingType::Type2);
        assert_eq!(
            KSplitting::empty().classify(),
            Err(SplittingError::EmptyGroundSet)
        );
        for m in 0..=5 {
            for s in enumerate_splittings(m + 1, m + 2) {
                assert_eq!(s.classify().unwrap(), SplittingType::Type1);
            }
            for s in enumerate_splittings(m + 1, 1) {
                assert_eq!(s.classify().unwrap(), SplittingType::Type2);
            }
        }
    }

    #[test]
    fn type1_examples() {
        let pairs = type1_bijection(0, 2).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].1, KSplitting::empty());
        assert_eq!(type1_bijection(2, 2).unwrap().len(), 1);
        assert_eq!(
            type1_bijection(3, 3).unwrap().len(),
            count_splittings(3, 2) as usize
        );
        assert!(type1_bijection(2, 1).is_err());
        assert!(type1_bijection(2, 5).is_err());
    }

    #[test]
    fn type2_examples() {
        let c = type2_correspondence(0, 1).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(
            c[0].1,
            vec![KSplitting::new(1, vec![vec![1]], vec![]).unwrap()]
        );
        let c = type2_correspondence(1, 2).unwrap();
        assert_eq!(c.iter().map(|(_, f)| f.len()).sum::<usize>(), 2);
        let c = type2_correspondence(2, 2).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.iter().map(|(_, f)| f.len()).sum::<usize>(), 6);
        assert!(type2_correspondence(2, 4).is_err());
    }

    #[test]
    fn term_types_are_compositions() {
        let table = SplittingTable::build(6);
        for m in 0..=6 {
            for k in 1..=m + 1 {
                let comps: BTreeSet<Vec<usize>> = compositions(m + 1, k).into_iter().collect();
                assert_eq!(BigUint::from(comps.len()), binomial(m, k - 1));
                let mut counts = std::collections::BTreeMap::new();
                for s in table.get(m, k) {
                    let t = s.term_type();
                    assert_eq!(t.total(), m + 1);
                    assert!(comps.contains(t.parts()));
                    *counts.entry(t).or_insert(0u64) += 1;
                }
                for (t, n) in counts {
                    assert!(BigUint::from(n) <= t.multinomial(), "m={m} type={:?}", t.0);
                }
            }
        }
    }

    #[test]
    fn combinatorial_helpers() {
        assert_eq!(factorial(5), BigUint::from(120u32));
        assert_eq!(binomial(6, 2), BigUint::from(15u32));
        assert_eq!(binomial(2, 3), BigUint::from(0u32));
        assert_eq!(multinomial(&[2, 1, 1]), BigUint::from(12u32));
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert!(compositions(2, 3).is_empty());
    }

    #[test]
    fn json_form() {
        let s = KSplitting::new(3, vec![vec![3], vec![1]], vec![2]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"m":3,"blocks":[[3],[1]],"markers":[2]}"#);
        assert_eq!(serde_json::from_str::<KSplitting>(&text).unwrap(), s);
        assert!(
            serde_json::from_str::<KSplitting>(r#"{"m":2,"blocks":[[1],[]],"markers":[2]}"#)
                .is_err()
        );
    }
}
