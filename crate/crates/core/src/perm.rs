//! Permutations in one-line notation.
//!
//! Positions and values are 1-indexed everywhere in the public API, so a cell
//! `(i, w_i)` of the permutation matrix reads the same way it is written by
//! hand.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `[n]` stored as its one-line word.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    word: Vec<u8>,
}

/// Inversions, length and anti-inversion count of a permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthStats {
    pub inversions: Vec<(usize, usize)>,
    pub ell: usize,
    pub anti_inversions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub grassmannian: bool,
    pub smooth: bool,
    pub gasharov_reiner: bool,
    pub avoids_321: bool,
    pub avoids_3412: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    Light,
    Heavy,
    Neither,
}

/// Classification of the first descent of a permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionPairInfo {
    pub descent_position: usize,
    pub kind: PairKind,
    /// The upper entry `(i, w_i)`.
    pub y: (usize, usize),
    /// The lower entry `(i+1, w_{i+1})`.
    pub x: (usize, usize),
    /// Minimal index with `w_j > w_{i+1}`; set when `kind` is `Heavy`.
    pub j: Option<usize>,
    pub k_witness: Option<usize>,
}

/// The four patterns whose avoidance defines the Gasharov-Reiner class.
pub const GASHAROV_REINER_PATTERNS: [&[u8]; 4] =
    [&[4, 2, 3, 1], &[3, 5, 1, 4, 2], &[4, 2, 5, 1, 3], &[3, 5, 1, 6, 2, 4]];

impl Permutation {
    /// Builds a permutation from a word of 1-based values.
    pub fn new<I>(word: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: TryInto<u8> + Copy + fmt::Debug,
    {
        let raw: Vec<I::Item> = word.into_iter().collect();
        let mut vals = Vec::with_capacity(raw.len());
        for v in &raw {
            match (*v).try_into() {
                Ok(x) => vals.push(x),
                Err(_) => return Err(Error::NotAPermutation(format!("{raw:?}"))),
            }
        }
        Self::from_values(vals)
    }

    fn from_values(word: Vec<u8>) -> Result<Self> {
        let n = word.len();
        if n == 0 || n > u8::MAX as usize {
            return Err(Error::NotAPermutation(format!("{word:?}")));
        }
        let mut seen = vec![false; n + 1];
        for &v in &word {
            let v = v as usize;
            if v == 0 || v > n || seen[v] {
                return Err(Error::NotAPermutation(format!("{word:?}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { word })
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1 && n <= u8::MAX as usize);
        Permutation {
            word: (1..=n as u8).collect(),
        }
    }

    /// The longest element `n (n-1) ... 1`.
    pub fn reverse_identity(n: usize) -> Self {
        assert!(n >= 1 && n <= u8::MAX as usize);
        Permutation {
            word: (1..=n as u8).rev().collect(),
        }
    }

    /// Rank-compresses a sequence of distinct values into the permutation it
    /// is order-isomorphic to.
    pub fn standardize(values: &[usize]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by_key(|&k| values[k]);
        let mut word = vec![0u8; values.len()];
        for (rank, &k) in order.iter().enumerate() {
            word[k] = (rank + 1) as u8;
        }
        Permutation { word }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    /// `w_pos` for a 1-based position.
    pub fn value(&self, pos: usize) -> usize {
        self.word[pos - 1] as usize
    }

    pub fn values(&self) -> impl Iterator<Item = usize> + '_ {
        self.word.iter().map(|&v| v as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.word.iter().enumerate().all(|(k, &v)| v as usize == k + 1)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u8; self.len()];
        for (k, &v) in self.word.iter().enumerate() {
            inv[v as usize - 1] = (k + 1) as u8;
        }
        Permutation { word: inv }
    }

    /// Number of inversions.
    pub fn length(&self) -> usize {
        let w = &self.word;
        let mut count = 0;
        for a in 0..w.len() {
            for b in a + 1..w.len() {
                if w[a] > w[b] {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn length_stats(&self) -> LengthStats {
        let n = self.len();
        let mut inversions = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                if self.value(i) > self.value(j) {
                    inversions.push((i, j));
                }
            }
        }
        let ell = inversions.len();
        LengthStats {
            inversions,
            ell,
            anti_inversions: n * (n - 1) / 2 - ell,
        }
    }

    /// Positions `i` with `w_i > w_{i+1}`.
    pub fn descents(&self) -> Vec<usize> {
        (1..self.len())
            .filter(|&i| self.value(i) > self.value(i + 1))
            .collect()
    }

    pub fn first_descent(&self) -> Option<usize> {
        (1..self.len()).find(|&i| self.value(i) > self.value(i + 1))
    }

    /// Left multiplication by the adjacent transposition `s_i`, which swaps
    /// the letters in positions `i` and `i+1`.
    pub fn swap_positions(&self, i: usize) -> Result<Self> {
        if i == 0 || i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len().saturating_sub(1),
            });
        }
        let mut word = self.word.clone();
        word.swap(i - 1, i);
        Ok(Permutation { word })
    }

    /// Right multiplication by the transposition `t_{ab}` (swap positions).
    pub fn times_transposition(&self, a: usize, b: usize) -> Self {
        let mut word = self.word.clone();
        word.swap(a - 1, b - 1);
        Permutation { word }
    }

    /// The permutation order-isomorphic to `w` with the entry in position
    /// `pos` removed.
    pub fn delete_entry(&self, pos: usize) -> Result<Self> {
        self.delete_entries(&[pos])
    }

    /// Deletes several positions at once (`w - x - y`).
    pub fn delete_entries(&self, positions: &[usize]) -> Result<Self> {
        let n = self.len();
        for &p in positions {
            if p == 0 || p > n {
                return Err(Error::IndexOutOfRange { index: p, len: n });
            }
        }
        let kept: Vec<usize> = (1..=n)
            .filter(|p| !positions.contains(p))
            .map(|p| self.value(p))
            .collect();
        if kept.is_empty() {
            return Err(Error::CannotDeleteFromSingleton);
        }
        Ok(Self::standardize(&kept))
    }

    /// True iff some subsequence of `self` is order-isomorphic to `pattern`.
    pub fn contains_pattern(&self, pattern: &Permutation) -> Result<bool> {
        if pattern.len() > self.len() {
            return Err(Error::PatternLongerThanWord {
                pattern: pattern.len(),
                word: self.len(),
            });
        }
        let mut chosen = Vec::with_capacity(pattern.len());
        Ok(self.embed(pattern.word(), 0, &mut chosen))
    }

    fn embed(&self, pattern: &[u8], start: usize, chosen: &mut Vec<u8>) -> bool {
        let t = chosen.len();
        if t == pattern.len() {
            return true;
        }
        let remaining = pattern.len() - t;
        for pos in start..=self.len() - remaining {
            let v = self.word[pos];
            let consistent = chosen
                .iter()
                .zip(pattern)
                .all(|(&c, &p)| (c < v) == (p < pattern[t]));
            if consistent {
                chosen.push(v);
                if self.embed(pattern, pos + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    fn avoids(&self, pattern: &[u8]) -> bool {
        if pattern.len() > self.len() {
            return true;
        }
        let mut chosen = Vec::with_capacity(pattern.len());
        !self.embed(pattern, 0, &mut chosen)
    }

    pub fn is_gasharov_reiner(&self) -> bool {
        GASHAROV_REINER_PATTERNS.iter().all(|p| self.avoids(p))
    }

    pub fn is_smooth(&self) -> bool {
        self.avoids(&[3, 4, 1, 2]) && self.avoids(&[4, 2, 3, 1])
    }

    pub fn classify(&self) -> ClassFlags {
        ClassFlags {
            grassmannian: self.descents().len() <= 1,
            smooth: self.is_smooth(),
            gasharov_reiner: self.is_gasharov_reiner(),
            avoids_321: self.avoids(&[3, 2, 1]),
            avoids_3412: self.avoids(&[3, 4, 1, 2]),
        }
    }

    /// Light-pair conditions for the descent at position `i`.
    pub fn is_light_at(&self, i: usize) -> bool {
        let (hi, lo) = (self.value(i), self.value(i + 1));
        let before = (1..i).all(|j| self.value(j) <= hi);
        let after = (i + 2..=self.len()).all(|j| {
            let v = self.value(j);
            !(lo < v && v < hi)
        });
        before && after
    }

    /// Heavy-pair conditions for the descent at position `i`; returns the
    /// minimal `j` with `w_j > w_{i+1}` and the least witness `k`.
    pub fn heavy_witness_at(&self, i: usize) -> Option<(usize, usize)> {
        let n = self.len();
        let (hi, lo) = (self.value(i), self.value(i + 1));
        if (i + 2..=n).any(|j| self.value(j) < lo) {
            return None;
        }
        if (1..i).any(|j| self.value(j) > hi) {
            return None;
        }
        let k = (lo..=hi).find(|&k| {
            let left_clear = (1..i).all(|j| {
                let v = self.value(j);
                !(lo < v && v <= k)
            });
            let right_clear = (i + 2..=n).all(|j| {
                let v = self.value(j);
                !(k < v && v < hi)
            });
            left_clear && right_clear
        })?;
        let j = (1..=n).find(|&j| self.value(j) > lo)?;
        Some((j, k))
    }

    /// Classifies the first descent. A descent meeting both sets of
    /// conditions is reported as `Light`.
    pub fn reduction_pair(&self) -> Result<ReductionPairInfo> {
        let i = self.first_descent().ok_or(Error::IdentityHasNoDescent)?;
        let y = (i, self.value(i));
        let x = (i + 1, self.value(i + 1));
        let (kind, j, k_witness) = if self.is_light_at(i) {
            (PairKind::Light, None, None)
        } else if let Some((j, k)) = self.heavy_witness_at(i) {
            (PairKind::Heavy, Some(j), Some(k))
        } else {
            (PairKind::Neither, None, None)
        };
        Ok(ReductionPairInfo {
            descent_position: i,
            kind,
            y,
            x,
            j,
            k_witness,
        })
    }

    /// True iff the first descent satisfies the heavy conditions (whether or
    /// not it is also light).
    pub fn first_descent_is_heavy(&self) -> bool {
        self.first_descent()
            .is_some_and(|i| self.heavy_witness_at(i).is_some())
    }

    pub fn first_descent_is_light(&self) -> bool {
        self.first_descent().is_some_and(|i| self.is_light_at(i))
    }

    /// The `(n-1)`-permutation obtained from a heavy first descent by moving
    /// `w_j` behind the block `w_{j+1} .. w_i` and dropping `w_{i+1}`.
    pub fn v_of(&self) -> Result<Self> {
        let i = self.first_descent().ok_or(Error::NotHeavyReductionPair)?;
        let (j, _) = self
            .heavy_witness_at(i)
            .ok_or(Error::NotHeavyReductionPair)?;
        let mut seq: Vec<usize> = Vec::with_capacity(self.len() - 1);
        seq.extend((1..j).map(|p| self.value(p)));
        seq.extend((j + 1..=i).map(|p| self.value(p)));
        seq.push(self.value(j));
        seq.extend((i + 2..=self.len()).map(|p| self.value(p)));
        Ok(Self::standardize(&seq))
    }

    /// All permutations of `[n]` in lexicographic order.
    pub fn all(n: usize) -> AllPermutations {
        AllPermutations {
            next: Some(Permutation::identity(n)),
        }
    }

    fn next_lex(&self) -> Option<Self> {
        let mut w = self.word.clone();
        let n = w.len();
        let mut a = n.checked_sub(2)?;
        while w[a] > w[a + 1] {
            a = a.checked_sub(1)?;
        }
        let mut b = n - 1;
        while w[b] < w[a] {
            b -= 1;
        }
        w.swap(a, b);
        w[a + 1..].reverse();
        Some(Permutation { word: w })
    }
}

pub struct AllPermutations {
    next: Option<Permutation>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let cur = self.next.take()?;
        self.next = cur.next_lex();
        Some(cur)
    }
}

/// Parses either a digit string (`"3412"`) or comma/space separated values.
pub fn parse(text: &str) -> Result<Permutation> {
    let t = text.trim();
    let separated = t.contains(|c: char| c == ',' || c.is_whitespace());
    let values: Vec<usize> = if separated {
        let mut out = Vec::new();
        for tok in t.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            out.push(
                tok.parse()
                    .map_err(|_| Error::NotAPermutation(text.to_string()))?,
            );
        }
        out
    } else {
        t.chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::NotAPermutation(text.to_string()))?
    };
    if values.iter().any(|&v| v > u8::MAX as usize) {
        return Err(Error::NotAPermutation(text.to_string()));
    }
    Permutation::new(values.iter().map(|&v| v as u8).collect::<Vec<u8>>())
        .map_err(|_| Error::NotAPermutation(text.to_string()))
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 9 {
            for v in &self.word {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.word.iter().map(u8::to_string).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        parse(s).unwrap()
    }

    #[test]
    fn parse_forms() {
        assert_eq!(p("3412").word(), &[3, 4, 1, 2]);
        let ten = p("10,2,3,4,5,6,7,8,9,1");
        assert_eq!(ten.len(), 10);
        assert_eq!(ten.value(1), 10);
        assert_eq!(ten.to_string(), "10,2,3,4,5,6,7,8,9,1");
        assert_eq!(p("3 4 1 2"), p("3412"));
        assert!(matches!(parse("3312"), Err(Error::NotAPermutation(_))));
        assert!(matches!(parse("3402"), Err(Error::NotAPermutation(_))));
        assert!(matches!(parse(""), Err(Error::NotAPermutation(_))));
        assert!(matches!(parse("1,x"), Err(Error::NotAPermutation(_))));
    }

    #[test]
    fn length_stats_examples() {
        let s = p("3412").length_stats();
        assert_eq!(s.inversions, vec![(1, 3), (1, 4), (2, 3), (2, 4)]);
        assert_eq!((s.ell, s.anti_inversions), (4, 2));
        let id = Permutation::identity(5).length_stats();
        assert_eq!((id.ell, id.anti_inversions), (0, 10));
        assert_eq!(p("3142").length(), 3);
    }

    #[test]
    fn pattern_examples() {
        let w = p("4231");
        assert!(w.contains_pattern(&w).unwrap());
        assert!(!p("351624").contains_pattern(&p("321")).unwrap());
        assert!(p("5673412").contains_pattern(&p("4231")).unwrap());
        assert!(matches!(
            p("12").contains_pattern(&p("321")),
            Err(Error::PatternLongerThanWord { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let f = p("3412").classify();
        assert!(f.grassmannian && !f.smooth && f.gasharov_reiner);
        assert!(!p("4231").classify().gasharov_reiner);
        let id = Permutation::identity(4).classify();
        assert!(id.grassmannian && id.smooth && id.gasharov_reiner && id.avoids_321 && id.avoids_3412);
    }

    #[test]
    fn reduction_pair_examples() {
        let r = p("3412").reduction_pair().unwrap();
        assert_eq!(r.kind, PairKind::Heavy);
        assert_eq!((r.descent_position, r.y, r.x, r.j), (2, (2, 4), (3, 1), Some(1)));
        let r = p("3241").reduction_pair().unwrap();
        assert_eq!(r.kind, PairKind::Light);
        assert_eq!((r.descent_position, r.y, r.x), (1, (1, 3), (2, 2)));
        let r = p("4231").reduction_pair().unwrap();
        assert_eq!((r.kind, r.descent_position), (PairKind::Neither, 1));
        assert_eq!(
            Permutation::identity(3).reduction_pair(),
            Err(Error::IdentityHasNoDescent)
        );
    }

    #[test]
    fn deletion_examples() {
        assert_eq!(p("3412").delete_entry(3).unwrap(), p("231"));
        assert_eq!(p("3412").delete_entry(2).unwrap(), p("312"));
        assert_eq!(p("3412").delete_entries(&[2, 3]).unwrap(), p("21"));
        assert_eq!(
            Permutation::identity(5).delete_entry(1).unwrap(),
            Permutation::identity(4)
        );
        assert_eq!(p("1").delete_entry(1), Err(Error::CannotDeleteFromSingleton));
        assert!(matches!(p("21").delete_entry(3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn v_examples() {
        assert_eq!(p("3412").v_of().unwrap(), p("321"));
        assert_eq!(p("3241").v_of(), Err(Error::NotHeavyReductionPair));
        // i = j: the two windows coincide and v(w) = w - x
        let w = p("1243");
        let i = w.first_descent().unwrap();
        assert_eq!(w.heavy_witness_at(i).map(|(j, _)| j), Some(i));
        assert_eq!(w.v_of().unwrap(), w.delete_entry(i + 1).unwrap());
        let big = p("1,2,6,7,8,3,10,4,9,5");
        assert_eq!(big.reduction_pair().unwrap().kind, PairKind::Heavy);
        assert_eq!(big.v_of().unwrap(), p("126759384"));
    }

    #[test]
    fn lexicographic_enumeration() {
        let all: Vec<String> = Permutation::all(3).map(|w| w.to_string()).collect();
        assert_eq!(all, ["123", "132", "213", "231", "312", "321"]);
        assert_eq!(Permutation::all(6).count(), 720);
        assert_eq!(Permutation::all(1).count(), 1);
    }

    #[test]
    fn swap_and_inverse() {
        assert_eq!(p("3412").swap_positions(2).unwrap(), p("3142"));
        assert_eq!(p("3142").inverse(), p("2413"));
        assert!(p("21").swap_positions(2).is_err());
    }

    /// Every position subset of size `|p|`, standardized and compared.
    fn contains_by_bitmask(w: &Permutation, p: &Permutation) -> bool {
        let n = w.len();
        (0u32..1 << n).filter(|m| m.count_ones() as usize == p.len()).any(|m| {
            let vals: Vec<usize> = (0..n).filter(|&k| m >> k & 1 == 1).map(|k| w.value(k + 1)).collect();
            Permutation::standardize(&vals) == *p
        })
    }

    #[test]
    fn containment_matches_bitmask_oracle() {
        let patterns: Vec<Permutation> = (1..=4).flat_map(Permutation::all).collect();
        for n in 1..=6 {
            for w in Permutation::all(n) {
                for pat in patterns.iter().filter(|pat| pat.len() <= n) {
                    assert_eq!(w.contains_pattern(pat).unwrap(), contains_by_bitmask(&w, pat), "{w} {pat}");
                }
            }
        }
    }

    #[test]
    fn length_complements_anti_inversions() {
        for n in 1..=6 {
            for w in Permutation::all(n) {
                let s = w.length_stats();
                assert_eq!(s.ell + s.anti_inversions, n * (n - 1) / 2);
            }
        }
    }

    #[test]
    fn gasharov_reiner_has_reduction_pair_for_w_or_inverse() {
        for n in 2..=6 {
            for w in Permutation::all(n).filter(|w| !w.is_identity() && w.is_gasharov_reiner()) {
                let a = w.reduction_pair().unwrap().kind;
                let b = w.inverse().reduction_pair().unwrap().kind;
                assert!(a != PairKind::Neither || b != PairKind::Neither, "{w}");
            }
        }
    }

    #[test]
    fn heavy_pairs_have_prefix_structure() {
        for n in 2..=7 {
            for w in Permutation::all(n) {
                let Some(i) = w.first_descent() else { continue };
                let Some((j, _)) = w.heavy_witness_at(i) else { continue };
                assert!((1..j).all(|p| w.value(p) == p), "{w}");
                assert!((j..=i).all(|p| w.value(p) == w.value(i) - (i - p)), "{w}");
                assert_eq!(w.value(i + 1), j, "{w}");
            }
        }
    }

    #[test]
    fn v_is_gasharov_reiner_with_light_descent() {
        for n in 3..=6 {
            for w in Permutation::all(n) {
                if !w.is_gasharov_reiner() {
                    continue;
                }
                let Some(i) = w.first_descent() else { continue };
                let Some((j, _)) = w.heavy_witness_at(i) else { continue };
                if i <= j {
                    continue;
                }
                let v = w.v_of().unwrap();
                assert!(v.is_gasharov_reiner(), "{w}");
                assert_eq!(v.first_descent(), Some(i - 1), "{w}");
                assert!(v.is_light_at(i - 1), "{w}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn standardize_roundtrips(n in 1usize..9, seed in 0u64..10_000) {
            let k = (seed as usize) % (1..=n).product::<usize>();
            let w = Permutation::all(n).nth(k).unwrap();
            let stretched: Vec<usize> = w.values().map(|v| 3 * v + 7).collect();
            proptest::prop_assert_eq!(Permutation::standardize(&stretched), w.clone());
            proptest::prop_assert_eq!(w.inverse().inverse(), w.clone());
            proptest::prop_assert_eq!(w.inverse().length(), w.length());
            proptest::prop_assert_eq!(parse(&w.to_string()).unwrap(), w);
        }
    }
}
