//! Reduced words, Cayley spheres and balls, conjugacy classes, and
//! primitivity in a rank-k free group.
//!
//! Letters are nonzero `i32` values: `ℓ > 0` is the generator `g_ℓ`, and
//! `−ℓ` is its inverse. The natural `i32` order on letters
//! (`−k < … < −1 < 1 < … < k`) fixes the lexicographic order used both for
//! enumeration and for canonical rotations; everything downstream
//! (deterministic parallel folds, cache keys, CSV rows) relies on that
//! order being stable.
//!
//! Spheres and balls are produced by streaming iterators, so a ball with
//! ~10⁶ elements is never materialized at once. A sphere can be split by
//! reduced prefix ([`sphere_with_prefix`]) for parallel consumption;
//! [`Word`] values are immutable and freely shareable across threads.

use std::fmt;

use crate::{Error, Result};

/// A letter of the free group: nonzero, `−ℓ` is the inverse of `ℓ`.
pub type Letter = i32;

/// A freely reduced word in a free group.
///
/// The group-theoretic length `|w|` is exactly `letters().len()`: free
/// reduction is performed on construction and preserved by every
/// operation, so the letter count is the minimum number of generators
/// needed to write the element.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Word {
    letters: Vec<Letter>,
}

/// Freely reduce a letter sequence in place (stack scan, O(n)).
fn reduce_letters(letters: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

fn validate_letters(letters: &[Letter], rank: usize) -> Result<()> {
    if rank == 0 {
        return Err(Error::RankTooSmall { rank });
    }
    for &l in letters {
        if l == 0 || l.unsigned_abs() as usize > rank {
            return Err(Error::LetterOutOfRange { letter: l, rank });
        }
    }
    Ok(())
}

impl Word {
    /// The empty word.
    pub fn identity() -> Word {
        Word { letters: Vec::new() }
    }

    /// Build a word from raw letters, validating them against `rank` and
    /// freely reducing the result.
    pub fn new(letters: &[Letter], rank: usize) -> Result<Word> {
        validate_letters(letters, rank)?;
        Ok(Word {
            letters: reduce_letters(letters),
        })
    }

    /// The single-letter word for generator `i` (1-based).
    pub fn generator(i: usize) -> Word {
        Word {
            letters: vec![i as Letter],
        }
    }

    /// Internal constructor for letters already known to be reduced.
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Word {
        debug_assert!(letters.windows(2).all(|w| w[0] != -w[1]));
        Word { letters }
    }

    /// The reduced letter sequence.
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Word length `|w|` (number of letters after free reduction).
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// True for the empty word.
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// True for the empty word (group identity).
    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Largest generator index appearing in the word (0 for the identity).
    pub fn max_letter(&self) -> usize {
        self.letters
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Group product `self · other`, reduced at the seam.
    ///
    /// Cancellation only shortens: `|w₁·w₂| ≤ |w₁| + |w₂|`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last() == Some(&-l) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Word { letters }
    }

    /// Group inverse: reverse the letters and negate each one.
    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    /// Integer power; negative exponents use the inverse.
    pub fn pow(&self, n: i32) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }
}

impl fmt::Display for Word {
    /// Compact text form: generators 1..=26 print as `a..z`, inverses as
    /// `A..Z`; larger ranks fall back to dot-separated signed integers.
    /// The identity prints as `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        if self.letters.iter().all(|l| l.unsigned_abs() <= 26) {
            for &l in &self.letters {
                let base = if l > 0 { b'a' } else { b'A' };
                write!(f, "{}", (base + (l.unsigned_abs() as u8 - 1)) as char)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// A conjugacy class of a nontrivial element, stored as the canonical
/// rotation (lexicographically least under the letter order) of the
/// cyclically reduced word.
///
/// Inverse classes are *not* identified: `ab` and `B A` are distinct
/// classes, because sums over the group visit an element and its inverse
/// separately.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CyclicWord {
    letters: Vec<Letter>,
    primitive: bool,
}

/// Strip matching first/last inverse pairs from a reduced word.
fn cyclic_reduce(mut letters: Vec<Letter>) -> Vec<Letter> {
    while letters.len() >= 2 && letters[0] == -letters[letters.len() - 1] {
        letters.pop();
        letters.remove(0);
    }
    letters
}

/// Lexicographically least rotation under the `i32` letter order.
fn least_rotation(letters: &[Letter]) -> Vec<Letter> {
    let n = letters.len();
    let mut best: Option<Vec<Letter>> = None;
    for r in 0..n {
        let rot: Vec<Letter> = (0..n).map(|i| letters[(i + r) % n]).collect();
        if best.as_ref().map_or(true, |b| rot < *b) {
            best = Some(rot);
        }
    }
    best.unwrap_or_default()
}

/// A cyclic word of length n is a proper power iff its letter sequence has
/// period n/m for some prime divisor m of n.
fn has_proper_period(letters: &[Letter]) -> bool {
    let n = letters.len();
    let mut m = n;
    let mut primes = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            primes.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    primes.iter().any(|&q| {
        let step = n / q;
        (0..n).all(|i| letters[i] == letters[(i + step) % n])
    })
}

impl CyclicWord {
    /// Cyclically reduce `w`, canonicalize the rotation, and record
    /// primitivity. Errors with [`Error::TrivialCyclicWord`] when the
    /// cyclic reduction is empty (the identity has no conjugacy-class
    /// representative here).
    pub fn from_word(w: &Word) -> Result<CyclicWord> {
        let core = cyclic_reduce(w.letters.clone());
        if core.is_empty() {
            return Err(Error::TrivialCyclicWord);
        }
        let letters = least_rotation(&core);
        let primitive = !has_proper_period(&letters);
        Ok(CyclicWord { letters, primitive })
    }

    /// The canonical (lexicographically least) rotation.
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Cyclic length (the translation-length generator count).
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// Cyclic words are never empty.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// True iff the class is not a proper power of a shorter class.
    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    /// The canonical rotation as an ordinary [`Word`].
    pub fn to_word(&self) -> Word {
        Word::from_reduced(self.letters.clone())
    }

    /// The prefix of the bi-infinite repetition `w w w …` with exactly
    /// `depth` letters. For a cyclically reduced word this prefix is
    /// already reduced; it realizes the attracting endpoint of the class
    /// as a limit of group elements.
    pub fn power_prefix(&self, depth: usize) -> Word {
        let n = self.letters.len();
        Word::from_reduced((0..depth).map(|i| self.letters[i % n]).collect())
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_word())
    }
}

/// Number of reduced words of length exactly `len`: `2k(2k−1)^{len−1}`
/// for `len ≥ 1`, and 1 for the empty word.
pub fn sphere_size(rank: usize, len: usize) -> u128 {
    if len == 0 {
        return 1;
    }
    if rank == 0 {
        return 0;
    }
    let k = rank as u128;
    2 * k * (2 * k - 1).pow(len as u32 - 1)
}

/// Number of reduced words of length at most `len`.
pub fn ball_size(rank: usize, len: usize) -> u128 {
    (0..=len).map(|l| sphere_size(rank, l)).sum()
}

/// Streaming iterator over the reduced words of one exact length, in
/// lexicographic order of their letter sequences.
///
/// Implemented as an odometer over letter slots: each slot ranges over the
/// alphabet `−k,…,−1,1,…,k` in increasing `i32` order, skipping the letter
/// that would cancel against the previous slot.
pub struct SphereIter {
    alphabet: Vec<Letter>,
    /// Indices into `alphabet`, one per free slot.
    state: Vec<usize>,
    /// Letters of the full word: `prefix_len` pinned, the rest driven by
    /// `state`.
    letters: Vec<Letter>,
    prefix_len: usize,
    exhausted: bool,
    started: bool,
}

impl SphereIter {
    fn alphabet(rank: usize) -> Vec<Letter> {
        let k = rank as i32;
        (-k..=k).filter(|&l| l != 0).collect()
    }

    fn new(rank: usize, len: usize) -> SphereIter {
        SphereIter {
            alphabet: Self::alphabet(rank),
            state: vec![0; len],
            letters: vec![0; len],
            prefix_len: 0,
            exhausted: rank == 0 && len > 0,
            started: false,
        }
    }

    fn with_prefix(rank: usize, len: usize, prefix: &[Letter]) -> SphereIter {
        let mut it = SphereIter {
            alphabet: Self::alphabet(rank),
            state: vec![0; len - prefix.len()],
            letters: {
                let mut v = prefix.to_vec();
                v.resize(len, 0);
                v
            },
            prefix_len: prefix.len(),
            exhausted: false,
            started: false,
        };
        if rank == 0 && len > prefix.len() {
            it.exhausted = true;
        }
        it
    }

    /// Smallest alphabet index usable at `slot` (must not cancel against
    /// the letter at `slot − 1`).
    fn first_valid(&self, slot: usize) -> usize {
        if slot == 0 {
            return 0;
        }
        let prev = self.letters[slot - 1];
        let mut idx = 0;
        if self.alphabet[idx] == -prev {
            idx += 1;
        }
        idx
    }

    /// Fill slots `from..` with their minimal valid letters.
    fn reset_from(&mut self, from: usize) {
        for slot in from..self.letters.len() {
            let idx = self.first_valid(slot);
            self.state[slot - self.prefix_len] = idx;
            self.letters[slot] = self.alphabet[idx];
        }
    }

    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            if self.letters.len() == self.prefix_len {
                return true; // single fully pinned word (possibly empty)
            }
            self.reset_from(self.prefix_len);
            return true;
        }
        if self.letters.len() == self.prefix_len {
            return false;
        }
        let mut slot = self.letters.len();
        loop {
            if slot == self.prefix_len {
                return false;
            }
            slot -= 1;
            let prev = if slot == 0 { 0 } else { self.letters[slot - 1] };
            let mut idx = self.state[slot - self.prefix_len] + 1;
            while idx < self.alphabet.len() && self.alphabet[idx] == -prev {
                idx += 1;
            }
            if idx < self.alphabet.len() {
                self.state[slot - self.prefix_len] = idx;
                self.letters[slot] = self.alphabet[idx];
                self.reset_from(slot + 1);
                return true;
            }
        }
    }
}

impl Iterator for SphereIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.exhausted {
            return None;
        }
        if self.advance() {
            Some(Word::from_reduced(self.letters.clone()))
        } else {
            self.exhausted = true;
            None
        }
    }
}

/// All reduced words of length exactly `len`, lazily.
pub fn sphere(rank: usize, len: usize) -> SphereIter {
    SphereIter::new(rank, len)
}

/// All reduced words with the given reduced prefix and length exactly
/// `len`, lazily. Errors when the prefix is unreduced, uses letters
/// outside the rank, or is longer than `len`. Spheres partition over the
/// prefixes of a fixed length, which is how parallel consumers split the
/// enumeration.
pub fn sphere_with_prefix(rank: usize, len: usize, prefix: &[Letter]) -> Result<SphereIter> {
    if rank == 0 {
        return Err(Error::RankTooSmall { rank });
    }
    validate_letters(prefix, rank)?;
    if prefix.windows(2).any(|w| w[0] == -w[1]) {
        return Err(Error::InvalidParameter(
            "sphere prefix must be freely reduced".into(),
        ));
    }
    if prefix.len() > len {
        return Err(Error::InvalidParameter(format!(
            "sphere prefix length {} exceeds word length {len}",
            prefix.len()
        )));
    }
    Ok(SphereIter::with_prefix(rank, len, prefix))
}

/// All reduced words of length at most `len`, lazily, shortest first.
pub fn ball(rank: usize, len: usize) -> impl Iterator<Item = Word> {
    (0..=len).flat_map(move |l| sphere(rank, l))
}

/// One canonical representative per conjugacy class of nontrivial
/// elements with cyclic length in `1..=len`, each carrying its
/// primitivity flag. Streams in order of cyclic length, then
/// lexicographically.
pub fn conjugacy_classes(rank: usize, len: usize) -> impl Iterator<Item = CyclicWord> {
    (1..=len).flat_map(move |l| {
        sphere(rank, l).filter_map(|w| {
            let letters = w.letters();
            // Cyclically reduced: the wrap-around pair must not cancel.
            if letters.len() >= 2 && letters[0] == -letters[letters.len() - 1] {
                return None;
            }
            // Keep exactly the words that are their own canonical rotation.
            if least_rotation(letters) != letters {
                return None;
            }
            Some(CyclicWord {
                letters: letters.to_vec(),
                primitive: !has_proper_period(letters),
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashMap, HashSet};

    // ---------------------------------------------------------------
    // Oracles (independent implementations used to pin expected values)
    // ---------------------------------------------------------------

    /// Quadratic reduction oracle: repeatedly scan for an adjacent
    /// cancelling pair, remove it, and restart the scan.
    fn reduce_oracle(mut v: Vec<Letter>) -> Vec<Letter> {
        loop {
            let mut cancelled = false;
            for i in 0..v.len().saturating_sub(1) {
                if v[i] == -v[i + 1] {
                    v.drain(i..=i + 1);
                    cancelled = true;
                    break;
                }
            }
            if !cancelled {
                return v;
            }
        }
    }

    /// Conjugacy oracle: u ~ v iff some conjugator c with |c| ≤ 3
    /// satisfies c·u·c⁻¹ = v. For cyclic lengths ≤ 2 any conjugator can
    /// be shortened below the bound, so the bounded search is exact.
    fn conjugate_oracle(u: &Word, v: &Word) -> bool {
        ball(2, 3).any(|c| c.concat(u).concat(&c.inverse()) == *v)
    }

    /// Proper-power oracle built from Word arithmetic: w is a proper
    /// power iff repeating its first d letters n/d times reproduces it,
    /// for some proper divisor d of n.
    fn proper_power_oracle(letters: &[Letter]) -> bool {
        let n = letters.len();
        (1..n).filter(|d| n % d == 0).any(|d| {
            let base = Word::from_reduced(letters[..d].to_vec());
            base.pow((n / d) as i32).letters() == letters
        })
    }

    fn random_letters(rng: &mut ChaCha8Rng, rank: i32, len: usize) -> Vec<Letter> {
        (0..len)
            .map(|_| {
                let mag = rng.gen_range(1..=rank);
                if rng.gen_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            })
            .collect()
    }

    // ----------------------------- reduction ------------------------

    #[test]
    fn reduce_cancels_adjacent_pair() {
        let w = Word::new(&[1, -1], 2).unwrap();
        assert!(w.is_identity());
        let w = Word::new(&[1, 2, -2, 1], 2).unwrap();
        assert_eq!(w.letters(), &[1, 1]);
    }

    #[test]
    fn reduce_matches_quadratic_scan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let raw = random_letters(&mut rng, 2, 20);
            let fast = Word::new(&raw, 2).unwrap();
            assert_eq!(fast.letters(), reduce_oracle(raw).as_slice());
        }
    }

    #[test]
    fn letters_validated() {
        assert!(matches!(
            Word::new(&[0], 2),
            Err(Error::LetterOutOfRange { letter: 0, rank: 2 })
        ));
        assert!(matches!(
            Word::new(&[3], 2),
            Err(Error::LetterOutOfRange { letter: 3, rank: 2 })
        ));
        assert!(matches!(Word::new(&[1], 0), Err(Error::RankTooSmall { rank: 0 })));
    }

    // ----------------------------- group laws -----------------------

    #[test]
    fn product_with_inverse_is_identity() {
        let w = Word::new(&[1, 2, -1, 2, 2], 2).unwrap();
        assert!(w.concat(&w.inverse()).is_identity());
        assert!(w.inverse().concat(&w).is_identity());
    }

    #[test]
    fn inverse_reverses_and_negates() {
        let w = Word::new(&[1, 2], 2).unwrap();
        assert_eq!(w.inverse().letters(), &[-2, -1]);
    }

    #[test]
    fn pow_matches_repeated_product() {
        let w = Word::new(&[1, 2, -1], 2).unwrap();
        assert_eq!(w.pow(3), w.concat(&w).concat(&w));
        assert_eq!(w.pow(-2), w.inverse().concat(&w.inverse()));
        assert!(w.pow(0).is_identity());
        // Conjugate shape collapses: (aba⁻¹)³ = ab³a⁻¹.
        assert_eq!(w.pow(3).letters(), &[1, 2, 2, 2, -1]);
    }

    // ----------------------------- enumeration ----------------------

    #[test]
    fn sphere_counts_k2() {
        assert_eq!(sphere(2, 1).count(), 4);
        assert_eq!(sphere(2, 3).count(), 36);
        assert_eq!(ball(2, 2).count(), 17); // 1 + 4 + 12
    }

    #[test]
    fn sphere_matches_closed_form_and_is_duplicate_free() {
        // Rank 2 through length 12 (the experiment regime) and rank 3
        // through length 9; larger rank-3 spheres take tens of seconds
        // and add no new information.
        for (rank, max_len) in [(2usize, 12usize), (3, 9)] {
            let mut per_len_total = 0u128;
            for len in 0..=max_len {
                let count = sphere(rank, len).count() as u128;
                assert_eq!(count, sphere_size(rank, len), "rank {rank} len {len}");
                per_len_total += count;
            }
            assert_eq!(per_len_total, ball_size(rank, max_len));
        }
        // Duplicate-freeness and reducedness, exhaustively at small size.
        let mut seen = HashSet::new();
        for w in ball(2, 6) {
            assert!(w.letters().windows(2).all(|p| p[0] != -p[1]));
            assert!(seen.insert(w.letters().to_vec()));
        }
        assert_eq!(seen.len() as u128, ball_size(2, 6));
    }

    #[test]
    fn sphere_prefix_partition_reassembles_sphere() {
        let whole: HashSet<Vec<Letter>> =
            sphere(2, 4).map(|w| w.letters().to_vec()).collect();
        let mut reassembled = HashSet::new();
        for first in sphere(2, 2) {
            for w in sphere_with_prefix(2, 4, first.letters()).unwrap() {
                assert!(reassembled.insert(w.letters().to_vec()));
            }
        }
        assert_eq!(whole, reassembled);
        // Degenerate splits.
        let pinned: Vec<Word> = sphere_with_prefix(2, 2, &[1, 2]).unwrap().collect();
        assert_eq!(pinned.len(), 1);
        assert_eq!(pinned[0].letters(), &[1, 2]);
        assert!(sphere_with_prefix(2, 3, &[1, -1]).is_err());
        assert!(sphere_with_prefix(2, 1, &[1, 2]).is_err());
    }

    #[test]
    fn empty_sphere_is_identity_only() {
        let words: Vec<Word> = sphere(2, 0).collect();
        assert_eq!(words.len(), 1);
        assert!(words[0].is_identity());
    }

    // ----------------------------- conjugacy ------------------------

    #[test]
    fn squares_are_not_primitive() {
        let w = Word::new(&[1, 1], 2).unwrap();
        let c = CyclicWord::from_word(&w).unwrap();
        assert!(!c.is_primitive());
        let w = Word::new(&[1, 2], 2).unwrap();
        let c = CyclicWord::from_word(&w).unwrap();
        assert!(c.is_primitive());
    }

    #[test]
    fn rotations_share_canonical_form() {
        let ab = CyclicWord::from_word(&Word::new(&[1, 2], 2).unwrap()).unwrap();
        let ba = CyclicWord::from_word(&Word::new(&[2, 1], 2).unwrap()).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn conjugation_invariant_canonical_form() {
        // A conjugate w = c·u·c⁻¹ cyclically reduces back to u's class.
        let u = Word::new(&[1, 2, 1], 2).unwrap();
        let c = Word::new(&[2, -1, 2], 2).unwrap();
        let w = c.concat(&u).concat(&c.inverse());
        assert_eq!(
            CyclicWord::from_word(&w).unwrap(),
            CyclicWord::from_word(&u).unwrap()
        );
    }

    #[test]
    fn trivial_class_is_rejected() {
        assert!(matches!(
            CyclicWord::from_word(&Word::identity()),
            Err(Error::TrivialCyclicWord)
        ));
        // Nontrivial word that cyclically reduces to nothing.
        let w = Word::new(&[1, 2, -2, -1], 2); // reduces to identity already
        assert!(w.unwrap().is_identity());
        let w = Word::new(&[1, 2, -1], 2).unwrap(); // cyclic reduction → [2]
        let c = CyclicWord::from_word(&w).unwrap();
        assert_eq!(c.letters(), &[2]);
    }

    #[test]
    fn class_count_matches_conjugator_partition_oracle() {
        // Brute force: partition the nontrivial ball of radius 2 into
        // conjugacy classes by explicit conjugator search.
        let words: Vec<Word> = ball(2, 2).filter(|w| !w.is_identity()).collect();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (i, u) in words.iter().enumerate() {
            match classes
                .iter_mut()
                .find(|cls| conjugate_oracle(&words[cls[0]], u))
            {
                Some(cls) => cls.push(i),
                None => classes.push(vec![i]),
            }
        }
        assert_eq!(classes.len(), 12); // 4 length-1 + 8 length-2 words in 4+4+4 classes

        // The canonical form must be a complete conjugacy invariant on
        // this range: same class ⟺ same canonical letters.
        let canon: Vec<CyclicWord> = words
            .iter()
            .map(|w| CyclicWord::from_word(w).unwrap())
            .collect();
        for cls in &classes {
            for &i in cls {
                assert_eq!(canon[i], canon[cls[0]]);
            }
        }
        let distinct: HashSet<Vec<Letter>> =
            canon.iter().map(|c| c.letters().to_vec()).collect();
        assert_eq!(distinct.len(), 12);

        // And the streaming enumerator must produce exactly those classes.
        let enumerated: HashSet<Vec<Letter>> = conjugacy_classes(2, 2)
            .map(|c| c.letters().to_vec())
            .collect();
        assert_eq!(enumerated, distinct);
    }

    #[test]
    fn class_count_matches_rotation_partition_oracle() {
        // Independent count: cyclically reduced words of length ≤ 5,
        // partitioned by rotation equivalence.
        let mut orbits: HashMap<Vec<Letter>, ()> = HashMap::new();
        for len in 1..=5usize {
            for w in sphere(2, len) {
                let l = w.letters();
                if l.len() >= 2 && l[0] == -l[l.len() - 1] {
                    continue;
                }
                let mut best = l.to_vec();
                for r in 1..l.len() {
                    let rot: Vec<Letter> = (0..l.len()).map(|i| l[(i + r) % l.len()]).collect();
                    if rot < best {
                        best = rot;
                    }
                }
                orbits.insert(best, ());
            }
        }
        assert_eq!(conjugacy_classes(2, 5).count(), orbits.len());
    }

    #[test]
    fn canonical_form_is_rotation_invariant_exhaustively() {
        // Every cyclically reduced word of length ≤ 8 at rank 2: all
        // rotations canonicalize identically.
        for len in 1..=8usize {
            for w in sphere(2, len) {
                let l = w.letters();
                if l.len() >= 2 && l[0] == -l[l.len() - 1] {
                    continue;
                }
                let canon = CyclicWord::from_word(&w).unwrap();
                for r in 1..len {
                    let rot: Vec<Letter> =
                        (0..len).map(|i| l[(i + r) % len]).collect();
                    let rotated = CyclicWord::from_word(&Word::from_reduced(rot)).unwrap();
                    assert_eq!(rotated, canon);
                }
            }
        }
    }

    #[test]
    fn primitivity_matches_divisor_oracle_exhaustively() {
        for c in conjugacy_classes(2, 8) {
            assert_eq!(
                c.is_primitive(),
                !proper_power_oracle(c.letters()),
                "class {:?}",
                c.letters()
            );
        }
    }

    // ----------------------------- power prefix ---------------------

    #[test]
    fn power_prefix_values() {
        let a = CyclicWord::from_word(&Word::new(&[1], 2).unwrap()).unwrap();
        assert_eq!(a.power_prefix(3).letters(), &[1, 1, 1]);
        let ab = CyclicWord::from_word(&Word::new(&[1, 2], 2).unwrap()).unwrap();
        assert_eq!(ab.power_prefix(3).letters(), &[1, 2, 1]);
        assert!(ab.power_prefix(0).is_identity());
    }

    #[test]
    fn power_prefix_is_reduced() {
        for c in conjugacy_classes(2, 5) {
            for depth in [1usize, 7, 13] {
                let p = c.power_prefix(depth);
                assert_eq!(p.len(), depth);
                assert_eq!(reduce_letters(p.letters()), p.letters());
            }
        }
    }

    // ----------------------------- display --------------------------

    #[test]
    fn display_forms() {
        assert_eq!(Word::identity().to_string(), "e");
        assert_eq!(Word::new(&[1, -2, 1], 2).unwrap().to_string(), "aBa");
        assert_eq!(Word::new(&[27], 30).unwrap().to_string(), "27");
    }

    // ----------------------------- properties -----------------------

    fn arb_letters() -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec(
            (1..=2i32, any::<bool>()).prop_map(|(m, s)| if s { m } else { -m }),
            0..24,
        )
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(raw in arb_letters()) {
            let once = Word::new(&raw, 2).unwrap();
            let twice = Word::new(once.letters(), 2).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn product_length_subadditive(a in arb_letters(), b in arb_letters()) {
            let wa = Word::new(&a, 2).unwrap();
            let wb = Word::new(&b, 2).unwrap();
            prop_assert!(wa.concat(&wb).len() <= wa.len() + wb.len());
        }

        #[test]
        fn product_associative(a in arb_letters(), b in arb_letters(), c in arb_letters()) {
            let (wa, wb, wc) = (
                Word::new(&a, 2).unwrap(),
                Word::new(&b, 2).unwrap(),
                Word::new(&c, 2).unwrap(),
            );
            prop_assert_eq!(wa.concat(&wb).concat(&wc), wa.concat(&wb.concat(&wc)));
        }

        #[test]
        fn inverse_cancels(a in arb_letters()) {
            let w = Word::new(&a, 2).unwrap();
            prop_assert!(w.concat(&w.inverse()).is_identity());
        }

        #[test]
        fn rotation_invariance_random(a in arb_letters(), r in 0usize..24) {
            let w = Word::new(&a, 2).unwrap();
            if let Ok(c) = CyclicWord::from_word(&w) {
                let l = c.letters();
                let rot: Vec<Letter> =
                    (0..l.len()).map(|i| l[(i + r % l.len()) % l.len()]).collect();
                let c2 = CyclicWord::from_word(&Word::from_reduced(rot)).unwrap();
                prop_assert_eq!(c, c2);
            }
        }
    }
}
