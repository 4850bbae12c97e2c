//! Universal lifts to the free product of pointed spaces.
//!
//! The free product `H₁ * … * H_K = CΩ ⊕ ⨁ Ĥ_{k₁} ⊗ … ⊗ Ĥ_{kₙ}` is spanned by
//! alternating basis words: sequences of `(letter, index)` pairs with no two
//! equal adjacent letters, where `index ≥ 1` selects the basis vector `e_index`
//! of `H_letter` (which lies in `Ĥ_letter`). The empty word is the vacuum.
//!
//! Lifts are described relative to a split of the letters into two groups,
//! `first | second`, which identifies the product with `G₁ * G₂` where `G₁`
//! (resp. `G₂`) is the free product of the factors in the first (resp.
//! second) group. A word then decomposes into maximal *blocks* of letters
//! from one group. Iterated products such as `(H₁ * H₂) * H₃` and
//! `H₁ * (H₂ * H₃)` are therefore both words over `{1, 2, 3}`; the two
//! bracketings differ only in how letters are grouped, so the associativity
//! identifications are pure relabelings.
//!
//! The classified left-acting lift on the slot group `G` splits every word
//! into its *head* (the leading `G`-block, or Ω) and the *rest*. If the rest is
//! Ω the operator acts on the head; otherwise its γ-deformation does. In
//! operator form this is `U*(T ⊗ P_Ω + T_γ ⊗ P_Ω⊥)U` with the canonical
//! unitary `U` splitting off the head. Right-acting lifts are conjugated by
//! the reversal unitary `R`, which reverses the order of the blocks.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{deformation_factor, gamma_deform, CircleParam, Isometry, Op, PointedSpace, C64, ONE, ZERO};

/// Coefficients at or below this modulus are dropped from [`FreeVector`]s.
pub const PRUNE_TOL: f64 = 1e-14;

/// Upper bound on the truncated basis size of [`dense_free_operator`].
pub const MAX_DENSE_BASIS: usize = 4096;

/// A set of letters, stored as a bit mask (`bit k` ↔ letter `k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LetterSet(u16);

impl LetterSet {
    /// The empty set.
    pub const EMPTY: LetterSet = LetterSet(0);

    /// The set containing the given letters (each in `1..=15`).
    pub fn of(letters: &[u8]) -> Self {
        LetterSet(letters.iter().fold(0, |m, &l| m | (1 << l)))
    }

    /// `{1, …, k}`.
    pub fn range(k: u8) -> Self {
        Self::of(&(1..=k).collect::<Vec<_>>())
    }

    /// Membership test.
    pub fn contains(&self, letter: u8) -> bool {
        self.0 & (1 << letter) != 0
    }

    /// Union.
    pub fn union(&self, other: LetterSet) -> Self {
        LetterSet(self.0 | other.0)
    }

    /// Whether the sets share a letter.
    pub fn intersects(&self, other: LetterSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Whether `self ⊆ other`.
    pub fn is_subset(&self, other: LetterSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Letters in increasing order.
    pub fn letters(&self) -> Vec<u8> {
        (0..16).filter(|&l| self.contains(l)).collect()
    }
}

/// A basis word of the free product; the empty word is Ω.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisWord {
    letters: Vec<u8>,
    indices: Vec<usize>,
}

impl BasisWord {
    /// The vacuum word.
    pub fn vacuum() -> Self {
        Self {
            letters: Vec::new(),
            indices: Vec::new(),
        }
    }

    /// A word from letters and indices; checks alternation and `index ≥ 1`.
    /// Index ranges are checked against a space by [`FreeSpace::check_word`].
    pub fn new(letters: Vec<u8>, indices: Vec<usize>) -> Result<Self> {
        if letters.len() != indices.len() {
            return Err(Error::InvalidInput("word letters and indices differ in length".into()));
        }
        if letters.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!("word {letters:?} is not alternating")));
        }
        if letters.iter().any(|&l| l == 0 || l > 15) {
            return Err(Error::InvalidInput("letters must lie in 1..=15".into()));
        }
        if indices.contains(&0) {
            return Err(Error::InvalidInput(
                "indices select complement vectors and start at 1".into(),
            ));
        }
        Ok(Self { letters, indices })
    }

    /// A single-letter word.
    pub fn letter(letter: u8, index: usize) -> Self {
        Self {
            letters: vec![letter],
            indices: vec![index],
        }
    }

    /// Letters (the word type).
    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    /// Indices into the factor spaces.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Word length.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// Whether this is the vacuum word.
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation; the caller guarantees the result alternates.
    fn concat(&self, other: &BasisWord) -> BasisWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        let mut indices = self.indices.clone();
        indices.extend_from_slice(&other.indices);
        BasisWord { letters, indices }
    }

    fn slice(&self, from: usize, to: usize) -> BasisWord {
        BasisWord {
            letters: self.letters[from..to].to_vec(),
            indices: self.indices[from..to].to_vec(),
        }
    }

    /// Letter-wise reversal `x₁⊗…⊗xₙ ↦ xₙ⊗…⊗x₁`.
    pub fn reversed(&self) -> BasisWord {
        BasisWord {
            letters: self.letters.iter().rev().copied().collect(),
            indices: self.indices.iter().rev().copied().collect(),
        }
    }

    /// Splits the word into maximal blocks of letters from `group` and from
    /// its complement; returns the block boundaries.
    fn blocks(&self, group: LetterSet) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for p in 1..=self.len() {
            if p == self.len() || group.contains(self.letters[p]) != group.contains(self.letters[start]) {
                out.push((start, p));
                start = p;
            }
        }
        out
    }

    /// Reverses the order of the blocks relative to `group`, keeping each
    /// block intact.
    pub fn reversed_blocks(&self, group: LetterSet) -> BasisWord {
        let mut out = BasisWord::vacuum();
        for (a, b) in self.blocks(group).into_iter().rev() {
            out = out.concat(&self.slice(a, b));
        }
        out
    }

    /// Sequence of group labels of the blocks (`true` for blocks in `group`).
    pub fn block_type(&self, group: LetterSet) -> Vec<bool> {
        self.blocks(group)
            .into_iter()
            .map(|(a, _)| group.contains(self.letters[a]))
            .collect()
    }

    /// Splits off the leading block if it lies in `group`; otherwise the head
    /// is Ω. Returns `(head, rest)`.
    pub fn split_head(&self, group: LetterSet) -> (BasisWord, BasisWord) {
        let n = self.letters.iter().take_while(|&&l| group.contains(l)).count();
        (self.slice(0, n), self.slice(n, self.len()))
    }

    /// Set of letters occurring in the word.
    pub fn support(&self) -> LetterSet {
        LetterSet::of(&self.letters)
    }
}

impl PartialOrd for BasisWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded lexicographic order: by length, then letters, then indices.
impl Ord for BasisWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
            .then_with(|| self.indices.cmp(&other.indices))
    }
}

/// The free product of the factors `H₁, …, H_K` (letters `1..=K`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeSpace {
    factors: Vec<PointedSpace>,
}

impl FreeSpace {
    /// Free product of the given factors, labelled `1..=K`.
    pub fn new(factors: Vec<PointedSpace>) -> Result<Self> {
        if factors.is_empty() || factors.len() > 15 {
            return Err(Error::InvalidInput(
                "a free product needs between 1 and 15 factors".into(),
            ));
        }
        Ok(Self { factors })
    }

    /// `H₁ * H₂`.
    pub fn pair(h1: PointedSpace, h2: PointedSpace) -> Self {
        Self { factors: vec![h1, h2] }
    }

    /// Number of factors.
    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// The factor carrying `letter`.
    pub fn factor(&self, letter: u8) -> PointedSpace {
        self.factors[letter as usize - 1]
    }

    /// All letters of the product.
    pub fn letters(&self) -> LetterSet {
        LetterSet::range(self.factors.len() as u8)
    }

    /// Checks that a word's letters and indices fit the factors.
    pub fn check_word(&self, w: &BasisWord) -> Result<()> {
        for (&l, &i) in w.letters.iter().zip(&w.indices) {
            if l as usize > self.factors.len() {
                return Err(Error::InvalidInput(format!("letter {l} exceeds the number of factors")));
            }
            if i >= self.factor(l).dim() {
                return Err(Error::InvalidInput(format!("index {i} out of range for factor {l}")));
            }
        }
        Ok(())
    }

    /// All basis words of length ≤ `max_len`, in graded lexicographic order.
    pub fn basis(&self, max_len: usize) -> Vec<BasisWord> {
        let mut out = vec![BasisWord::vacuum()];
        let mut layer = vec![BasisWord::vacuum()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for l in 1..=self.factors.len() as u8 {
                    if w.letters.last() == Some(&l) {
                        continue;
                    }
                    for i in 1..self.factor(l).dim() {
                        let mut v = w.clone();
                        v.letters.push(l);
                        v.indices.push(i);
                        next.push(v);
                    }
                }
            }
            next.sort();
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    /// Number of basis words of length ≤ `max_len`.
    pub fn basis_size(&self, max_len: usize) -> usize {
        // counts[l] = number of words of the current length ending in letter l
        let k = self.factors.len();
        let hat: Vec<usize> = self.factors.iter().map(|f| f.complement_dim()).collect();
        let mut counts = hat.clone();
        let mut total = 1usize;
        for len in 1..=max_len {
            if len > 1 {
                let sum: usize = counts.iter().sum();
                counts = (0..k).map(|l| (sum - counts[l]).saturating_mul(hat[l])).collect();
            }
            total = total.saturating_add(counts.iter().sum());
        }
        total
    }
}

/// A finite linear combination of basis words of a truncated free product.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeVector {
    space: FreeSpace,
    terms: BTreeMap<BasisWord, C64>,
    max_len: usize,
}

/// JSON form of one [`FreeVector`] term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeTermJson {
    /// Letters of the word.
    pub word: Vec<u8>,
    /// Indices of the word.
    pub indices: Vec<usize>,
    /// Coefficient as `[re, im]`.
    pub coeff: [f64; 2],
}

impl FreeVector {
    /// The zero vector.
    pub fn zero(space: FreeSpace, max_len: usize) -> Self {
        Self {
            space,
            terms: BTreeMap::new(),
            max_len,
        }
    }

    /// The vacuum Ω.
    pub fn vacuum(space: FreeSpace, max_len: usize) -> Self {
        Self::from_word(space, BasisWord::vacuum(), max_len).expect("the vacuum fits any truncation")
    }

    /// A single basis word.
    pub fn from_word(space: FreeSpace, word: BasisWord, max_len: usize) -> Result<Self> {
        let mut v = Self::zero(space, max_len);
        v.add_term(word, ONE)?;
        Ok(v)
    }

    /// Builds a vector from terms.
    pub fn from_terms(
        space: FreeSpace,
        terms: impl IntoIterator<Item = (BasisWord, C64)>,
        max_len: usize,
    ) -> Result<Self> {
        let mut v = Self::zero(space, max_len);
        for (w, c) in terms {
            v.add_term(w, c)?;
        }
        v.prune();
        Ok(v)
    }

    /// Adds `c · word`.
    pub fn add_term(&mut self, word: BasisWord, c: C64) -> Result<()> {
        self.space.check_word(&word)?;
        if word.len() > self.max_len {
            return Err(Error::Truncation { max_len: self.max_len });
        }
        *self.terms.entry(word).or_insert(ZERO) += c;
        Ok(())
    }

    /// Drops coefficients of modulus ≤ [`PRUNE_TOL`].
    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE_TOL);
    }

    /// Underlying free product.
    pub fn space(&self) -> &FreeSpace {
        &self.space
    }

    /// Truncation bound.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Same vector with a different truncation bound.
    pub fn with_max_len(mut self, max_len: usize) -> Result<Self> {
        if self.terms.keys().any(|w| w.len() > max_len) {
            return Err(Error::Truncation { max_len });
        }
        self.max_len = max_len;
        Ok(self)
    }

    /// Terms in graded lexicographic order.
    pub fn terms(&self) -> &BTreeMap<BasisWord, C64> {
        &self.terms
    }

    /// Coefficient of a basis word.
    pub fn coefficient(&self, w: &BasisWord) -> C64 {
        self.terms.get(w).copied().unwrap_or(ZERO)
    }

    /// Coefficient of Ω.
    pub fn vacuum_coefficient(&self) -> C64 {
        self.coefficient(&BasisWord::vacuum())
    }

    /// Inner product, antilinear in `self`.
    pub fn inner(&self, other: &FreeVector) -> C64 {
        self.terms.iter().map(|(w, c)| c.conj() * other.coefficient(w)).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-entry distance.
    pub fn distance(&self, other: &FreeVector) -> f64 {
        let a = self.terms.iter().map(|(w, c)| (c - other.coefficient(w)).norm());
        let b = other
            .terms
            .iter()
            .filter(|(w, _)| !self.terms.contains_key(*w))
            .map(|(_, c)| c.norm());
        a.chain(b).fold(0.0, f64::max)
    }

    /// Scalar multiple.
    pub fn scale(&self, c: C64) -> FreeVector {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|v| *v *= c);
        out.prune();
        out
    }

    /// The reversal unitary `R`: reverses every word letter by letter.
    pub fn reverse(&self) -> FreeVector {
        self.map_words(BasisWord::reversed)
    }

    fn map_words(&self, f: impl Fn(&BasisWord) -> BasisWord) -> FreeVector {
        let mut out = FreeVector::zero(self.space.clone(), self.max_len);
        for (w, c) in &self.terms {
            *out.terms.entry(f(w)).or_insert(ZERO) += c;
        }
        out
    }

    /// Applies Ω-preserving isometries letter-wise: `(W₁ * … * W_K)`.
    pub fn map_isometries(&self, maps: &[Isometry], target: FreeSpace) -> Result<FreeVector> {
        if maps.len() != self.space.num_factors() || target.num_factors() != maps.len() {
            return Err(Error::InvalidInput("one isometry per factor is required".into()));
        }
        for (k, w) in maps.iter().enumerate() {
            let l = k as u8 + 1;
            if w.domain() != self.space.factor(l) || w.codomain() != target.factor(l) {
                return Err(Error::DimensionMismatch {
                    expected: self.space.factor(l).dim(),
                    found: w.domain().dim(),
                });
            }
        }
        let mut out = FreeVector::zero(target, self.max_len);
        for (w, c) in &self.terms {
            let mut partial: Vec<(BasisWord, C64)> = vec![(BasisWord::vacuum(), *c)];
            for (&l, &i) in w.letters.iter().zip(&w.indices) {
                let m = maps[l as usize - 1].matrix();
                let mut next = Vec::new();
                for (pw, pc) in &partial {
                    for r in 1..m.nrows() {
                        let e = m[(r, i)];
                        if e != ZERO {
                            next.push((pw.concat(&BasisWord::letter(l, r)), pc * e));
                        }
                    }
                }
                partial = next;
            }
            for (pw, pc) in partial {
                *out.terms.entry(pw).or_insert(ZERO) += pc;
            }
        }
        out.prune();
        Ok(out)
    }

    /// JSON-friendly list of terms.
    pub fn to_json_terms(&self) -> Vec<FreeTermJson> {
        self.terms
            .iter()
            .map(|(w, c)| FreeTermJson {
                word: w.letters.clone(),
                indices: w.indices.clone(),
                coeff: [c.re, c.im],
            })
            .collect()
    }

    /// Parses a list of JSON terms.
    pub fn from_json_terms(space: FreeSpace, terms: &[FreeTermJson], max_len: usize) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|t| {
                Ok((
                    BasisWord::new(t.word.clone(), t.indices.clone())?,
                    C64::new(t.coeff[0], t.coeff[1]),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(space, parsed, max_len)
    }
}

/// `U`-splitting of every term: `(head in H₁ or Ω, remainder not starting in Ĥ₁)`.
pub fn u_split(v: &FreeVector) -> Vec<(BasisWord, BasisWord, C64)> {
    split_terms(v, LetterSet::of(&[1]))
}

/// `V`-splitting of every term: `(head in H₂ or Ω, remainder not starting in Ĥ₂)`.
pub fn v_split(v: &FreeVector) -> Vec<(BasisWord, BasisWord, C64)> {
    split_terms(v, LetterSet::of(&[2]))
}

fn split_terms(v: &FreeVector, group: LetterSet) -> Vec<(BasisWord, BasisWord, C64)> {
    v.terms
        .iter()
        .map(|(w, c)| {
            let (h, r) = w.split_head(group);
            (h, r, *c)
        })
        .collect()
}

/// The reversal unitary `R` on `H₁ * H₂`.
pub fn reverse(v: &FreeVector) -> FreeVector {
    v.reverse()
}

/// Whether a lift acts on words from the left or from the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `ℓ^γ`, `r^δ`: act on the leading letter.
    Left,
    /// `ℓ̄^γ`, `r̄^δ`: act on the trailing letter (conjugation by `R`).
    Right,
}

/// Which factor of a binary product a lift embeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    /// The first factor (`ℓ`).
    First,
    /// The second factor (`r`).
    Second,
}

/// One classified free lift: `ℓ^γ`, `r^δ`, `ℓ̄^γ` or `r̄^δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeLiftSpec {
    /// Acting side.
    pub side: Side,
    /// Embedded factor.
    pub slot: Slot,
    /// Deformation parameter.
    pub param: CircleParam,
}

/// The rule used by a lift node of a [`FreeOperator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiftRule {
    /// Classified free lift acting from the given side.
    Free(Side),
    /// The tensor-style lift compressed to `CΩ ⊕ Ĝ₁ ⊕ Ĝ₂ ⊕ Ĝ₁⊗Ĝ₂`.
    Naive,
}

/// An operator on a free product built from an operator on one factor by
/// iterated lifts.
#[derive(Debug, Clone, PartialEq)]
pub enum FreeOperator {
    /// An operator on the factor with the given letter.
    Base {
        /// Factor label.
        letter: u8,
        /// The operator.
        op: Op,
    },
    /// A lift of `inner` from the slot group to the product of two groups.
    Lift {
        /// Lift rule.
        rule: LiftRule,
        /// Deformation parameter.
        param: CircleParam,
        /// Letters of the first group.
        first: LetterSet,
        /// Letters of the second group.
        second: LetterSet,
        /// The group that `inner` lives on.
        slot: Slot,
        /// The lifted operator.
        inner: Box<FreeOperator>,
    },
}

impl FreeOperator {
    /// An operator on a single factor.
    pub fn base(letter: u8, op: Op) -> Self {
        FreeOperator::Base { letter, op }
    }

    /// Lifts `self` into the product of the groups `first | second`.
    /// `self` must live on the slot group.
    pub fn lift(
        self,
        rule: LiftRule,
        param: CircleParam,
        first: LetterSet,
        second: LetterSet,
        slot: Slot,
    ) -> Result<Self> {
        if first.intersects(second) || first == LetterSet::EMPTY || second == LetterSet::EMPTY {
            return Err(Error::InvalidInput(
                "letter groups must be disjoint and nonempty".into(),
            ));
        }
        let own = if slot == Slot::First { first } else { second };
        if self.support() != own {
            return Err(Error::InvalidInput(format!(
                "operator on letters {:?} cannot be lifted from group {:?}",
                self.support().letters(),
                own.letters()
            )));
        }
        Ok(FreeOperator::Lift {
            rule,
            param,
            first,
            second,
            slot,
            inner: Box::new(self),
        })
    }

    /// Lifts `self` by a classified free lift.
    pub fn free_lift(self, spec: FreeLiftSpec, first: LetterSet, second: LetterSet) -> Result<Self> {
        self.lift(LiftRule::Free(spec.side), spec.param, first, second, spec.slot)
    }

    /// Letters of the space the operator acts on.
    pub fn support(&self) -> LetterSet {
        match self {
            FreeOperator::Base { letter, .. } => LetterSet::of(&[*letter]),
            FreeOperator::Lift { first, second, .. } => first.union(*second),
        }
    }

    /// Applies the operator. Fails with [`Error::Truncation`] if a resulting
    /// word would exceed the vector's truncation bound.
    pub fn apply(&self, v: &FreeVector) -> Result<FreeVector> {
        let support = self.support();
        let mut out = FreeVector::zero(v.space.clone(), v.max_len);
        for (w, c) in &v.terms {
            if !w.support().is_subset(support) {
                return Err(Error::InvalidInput(format!(
                    "word {:?} outside the operator's domain",
                    w.letters
                )));
            }
            self.apply_word(w, *c, v.max_len, &mut out.terms)?;
        }
        for w in out.terms.keys() {
            v.space.check_word(w)?;
        }
        out.prune();
        Ok(out)
    }

    fn apply_word(&self, w: &BasisWord, coeff: C64, max_len: usize, out: &mut BTreeMap<BasisWord, C64>) -> Result<()> {
        match self {
            FreeOperator::Base { letter, op } => {
                let col = match w.letters.first() {
                    None => 0,
                    Some(l) if *l == *letter && w.len() == 1 => w.indices[0],
                    Some(_) => {
                        return Err(Error::InvalidInput(format!(
                            "word {:?} outside factor {letter}",
                            w.letters
                        )))
                    }
                };
                for r in 0..op.dim() {
                    let m = op.entry(r, col);
                    if m == ZERO {
                        continue;
                    }
                    let word = if r == 0 {
                        BasisWord::vacuum()
                    } else {
                        BasisWord::letter(*letter, r)
                    };
                    if word.len() > max_len {
                        return Err(Error::Truncation { max_len });
                    }
                    *out.entry(word).or_insert(ZERO) += coeff * m;
                }
                Ok(())
            }
            FreeOperator::Lift {
                rule,
                param,
                first,
                second,
                slot,
                inner,
            } => {
                let own = if *slot == Slot::First { *first } else { *second };
                match rule {
                    LiftRule::Free(Side::Left) => head_rule(inner, *param, own, w, coeff, max_len, out),
                    LiftRule::Free(Side::Right) => {
                        let mut tmp = BTreeMap::new();
                        head_rule(inner, *param, own, &w.reversed_blocks(*first), coeff, max_len, &mut tmp)?;
                        for (u, c) in tmp {
                            *out.entry(u.reversed_blocks(*first)).or_insert(ZERO) += c;
                        }
                        Ok(())
                    }
                    LiftRule::Naive => {
                        if !naive_kept(w, *first) {
                            return Ok(());
                        }
                        // The second factor is the trailing tensor leg, so
                        // its lift acts on the trailing block.
                        let reverse = *slot == Slot::Second;
                        let input = if reverse { w.reversed_blocks(*first) } else { w.clone() };
                        let mut tmp = BTreeMap::new();
                        head_rule(inner, *param, own, &input, coeff, max_len, &mut tmp)?;
                        for (u, c) in tmp {
                            let u = if reverse { u.reversed_blocks(*first) } else { u };
                            if naive_kept(&u, *first) {
                                *out.entry(u).or_insert(ZERO) += c;
                            }
                        }
                        Ok(())
                    }
                }
            }
        }
    }
}

/// Whether a word lies in `CΩ ⊕ Ĝ₁ ⊕ Ĝ₂ ⊕ Ĝ₁⊗Ĝ₂` (block types ∅, (1), (2), (1,2)).
fn naive_kept(w: &BasisWord, first: LetterSet) -> bool {
    matches!(w.block_type(first).as_slice(), [] | [_] | [true, false])
}

/// The left-acting rule on the leading block of the `own` group.
fn head_rule(
    inner: &FreeOperator,
    param: CircleParam,
    own: LetterSet,
    w: &BasisWord,
    coeff: C64,
    max_len: usize,
    out: &mut BTreeMap<BasisWord, C64>,
) -> Result<()> {
    let (head, rest) = w.split_head(own);
    let budget = max_len.checked_sub(rest.len()).ok_or(Error::Truncation { max_len })?;
    let mut images = BTreeMap::new();
    inner.apply_word(&head, ONE, budget, &mut images)?;
    for (h, c) in images {
        let factor = if rest.is_empty() {
            ONE
        } else {
            deformation_factor(param, head.is_empty(), h.is_empty())
        };
        if factor == ZERO {
            continue;
        }
        *out.entry(h.concat(&rest)).or_insert(ZERO) += coeff * c * factor;
    }
    Ok(())
}

fn letter_of(slot: Slot) -> u8 {
    match slot {
        Slot::First => 1,
        Slot::Second => 2,
    }
}

/// Applies a classified lift of an operator on `H₁` or `H₂` to a vector of `H₁ * H₂`.
pub fn apply_free_lift(spec: &FreeLiftSpec, t: &Op, v: &FreeVector) -> Result<FreeVector> {
    binary_operator(LiftRule::Free(spec.side), spec.param, spec.slot, t, v.space())?.apply(v)
}

/// Applies the compressed tensor-style lift `P U*(T⊗P_Ω + T_γ⊗P_Ω⊥)U P`
/// (slot second uses `V`) to a vector of `H₁ * H₂`.
pub fn apply_naive_lift(slot: Slot, param: CircleParam, t: &Op, v: &FreeVector) -> Result<FreeVector> {
    binary_operator(LiftRule::Naive, param, slot, t, v.space())?.apply(v)
}

fn binary_operator(rule: LiftRule, param: CircleParam, slot: Slot, t: &Op, space: &FreeSpace) -> Result<FreeOperator> {
    if space.num_factors() != 2 {
        return Err(Error::InvalidInput(
            "binary lifts act on a product of two factors".into(),
        ));
    }
    let letter = letter_of(slot);
    if t.dim() != space.factor(letter).dim() {
        return Err(Error::DimensionMismatch {
            expected: space.factor(letter).dim(),
            found: t.dim(),
        });
    }
    FreeOperator::base(letter, t.clone()).lift(rule, param, LetterSet::of(&[1]), LetterSet::of(&[2]), slot)
}

/// A lift materialized as a dense matrix over the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFreeOperator {
    /// Basis words in graded lexicographic order.
    pub basis: Vec<BasisWord>,
    /// Matrix in that basis.
    pub matrix: DMatrix<C64>,
}

impl DenseFreeOperator {
    /// Applies the matrix to a vector expanded in the truncated basis.
    pub fn apply(&self, v: &FreeVector) -> Result<FreeVector> {
        let pos: BTreeMap<&BasisWord, usize> = self.basis.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let mut x = nalgebra::DVector::zeros(self.basis.len());
        for (w, c) in v.terms() {
            let i = pos.get(w).ok_or(Error::Truncation {
                max_len: self.basis.last().map_or(0, |w| w.len()),
            })?;
            x[*i] = *c;
        }
        let y = &self.matrix * x;
        let terms = self.basis.iter().cloned().zip(y.iter().copied());
        FreeVector::from_terms(v.space().clone(), terms, v.max_len())
    }
}

/// Builds the classified lift as a dense matrix `U*(T⊗P_Ω + T_γ⊗P_Ω⊥)U`
/// (with `V` for the second slot and `R`-conjugation for right-acting
/// specs) from explicit matrices of the canonical unitaries, restricted to
/// words of length ≤ `max_len`. It agrees with [`apply_free_lift`] on words
/// of length `< max_len`.
pub fn dense_free_operator(
    spec: &FreeLiftSpec,
    t: &Op,
    left: PointedSpace,
    right: PointedSpace,
    max_len: usize,
) -> Result<DenseFreeOperator> {
    let space = FreeSpace::pair(left, right);
    let size = space.basis_size(max_len);
    if size > MAX_DENSE_BASIS {
        return Err(Error::SizeOverflow(format!(
            "{size} basis words exceed the dense bound {MAX_DENSE_BASIS}"
        )));
    }
    let letter = letter_of(spec.slot);
    let factor = space.factor(letter);
    if t.dim() != factor.dim() {
        return Err(Error::DimensionMismatch {
            expected: factor.dim(),
            found: t.dim(),
        });
    }
    let basis = space.basis(max_len);
    let pos: BTreeMap<&BasisWord, usize> = basis.iter().enumerate().map(|(i, w)| (w, i)).collect();
    // Complement space H(k): truncated words not starting with the slot letter.
    let tail: Vec<&BasisWord> = basis.iter().filter(|w| w.letters.first() != Some(&letter)).collect();
    let tail_pos: BTreeMap<&BasisWord, usize> = tail.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let (n, m) = (factor.dim(), tail.len());
    // U : truncated basis → H_k ⊗ H(k), index (i, j) ↦ i·m + j.
    let mut u = DMatrix::from_element(n * m, basis.len(), ZERO);
    for (col, w) in basis.iter().enumerate() {
        let (i, rest) = if w.letters.first() == Some(&letter) {
            (w.indices[0], w.slice(1, w.len()))
        } else {
            (0, w.clone())
        };
        u[(i * m + tail_pos[&rest], col)] = ONE;
    }
    let tail_vac = DMatrix::from_fn(m, m, |i, j| if i == 0 && j == 0 { ONE } else { ZERO });
    let tail_comp = DMatrix::from_fn(m, m, |i, j| if i == j && i != 0 { ONE } else { ZERO });
    let inner = t.matrix().kronecker(&tail_vac) + gamma_deform(t, spec.param).matrix().kronecker(&tail_comp);
    let mut matrix = u.adjoint() * inner * &u;
    if spec.side == Side::Right {
        let mut r = DMatrix::from_element(basis.len(), basis.len(), ZERO);
        for (col, w) in basis.iter().enumerate() {
            r[(pos[&w.reversed()], col)] = ONE;
        }
        matrix = &r * matrix * &r;
    }
    Ok(DenseFreeOperator { basis, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{creation, random_op, rng_from_seed, Vector};

    fn sp(n: usize) -> PointedSpace {
        PointedSpace::new(n).unwrap()
    }

    fn word(letters: &[u8], indices: &[usize]) -> BasisWord {
        BasisWord::new(letters.to_vec(), indices.to_vec()).unwrap()
    }

    fn pair() -> FreeSpace {
        FreeSpace::pair(sp(2), sp(2))
    }

    fn left(param: CircleParam) -> FreeLiftSpec {
        FreeLiftSpec {
            side: Side::Left,
            slot: Slot::First,
            param,
        }
    }

    #[test]
    fn u_split_rules() {
        let v = FreeVector::from_terms(
            pair(),
            [
                (BasisWord::vacuum(), ONE),
                (word(&[1], &[1]), ONE),
                (word(&[2, 1], &[1, 1]), ONE),
            ],
            3,
        )
        .unwrap();
        let split = u_split(&v);
        assert_eq!(split[0], (BasisWord::vacuum(), BasisWord::vacuum(), ONE));
        assert_eq!(split[1], (word(&[1], &[1]), BasisWord::vacuum(), ONE));
        assert_eq!(split[2], (BasisWord::vacuum(), word(&[2, 1], &[1, 1]), ONE));
        let vs = v_split(&v);
        assert_eq!(vs[2], (word(&[2], &[1]), word(&[1], &[1]), ONE));
    }

    #[test]
    fn alternation_is_enforced() {
        assert!(BasisWord::new(vec![1, 1], vec![1, 1]).is_err());
        assert!(BasisWord::new(vec![1], vec![0]).is_err());
    }

    #[test]
    fn lift_table_examples() {
        let g = CircleParam::from_angle(0.9);
        let space = FreeSpace::pair(sp(3), sp(3));
        let x = Vector::basis(sp(3), 2);
        let yw = FreeVector::from_word(space.clone(), word(&[2, 1], &[1, 2]), 3).unwrap();
        let out = apply_free_lift(&left(g), &creation(&x).unwrap(), &yw).unwrap();
        assert_eq!(out.terms().len(), 1);
        assert!((out.coefficient(&word(&[1, 2, 1], &[2, 1, 2])) - g.value()).norm() < 1e-15);

        let proj = apply_free_lift(&left(g), &Op::vacuum_projection(sp(3)), &yw).unwrap();
        assert!(proj.distance(&yw.scale(C64::new(g.modulus(), 0.0))) < 1e-15);

        let t = random_op(sp(3), 4);
        let hat = Op::complement_projection(sp(3))
            .mul(&t)
            .unwrap()
            .mul(&Op::complement_projection(sp(3)))
            .unwrap();
        let xyw = FreeVector::from_word(space.clone(), word(&[1, 2, 1], &[1, 2, 2]), 3).unwrap();
        let out = apply_free_lift(&left(g), &hat, &xyw).unwrap();
        for i in 1..3 {
            let expect = t.entry(i, 1) * g.modulus();
            assert!((out.coefficient(&word(&[1, 2, 1], &[i, 2, 2])) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn reversal_examples() {
        let space = pair();
        let om = FreeVector::vacuum(space.clone(), 2);
        assert_eq!(reverse(&om), om);
        let xy = FreeVector::from_word(space.clone(), word(&[1, 2], &[1, 1]), 2).unwrap();
        assert_eq!(reverse(&xy).terms().keys().next().unwrap(), &word(&[2, 1], &[1, 1]));
        let mut rng = rng_from_seed(3);
        let terms = space
            .basis(3)
            .into_iter()
            .map(|w| (w, crate::hilbert::random_scalar(&mut rng)));
        let v = FreeVector::from_terms(space, terms, 3).unwrap();
        assert_eq!(reverse(&reverse(&v)), v);
    }

    #[test]
    fn naive_lift_examples() {
        let space = pair();
        let a = creation(&Vector::basis(sp(2), 1)).unwrap();
        let y = FreeVector::from_word(space.clone(), word(&[2], &[1]), 3).unwrap();
        let out = apply_naive_lift(Slot::First, CircleParam::one(), &a, &y).unwrap();
        assert_eq!(out.coefficient(&word(&[1, 2], &[1, 1])), ONE);
        let yxy = FreeVector::from_word(space.clone(), word(&[2, 1, 2], &[1, 1, 1]), 3).unwrap();
        let t = random_op(sp(2), 1);
        assert_eq!(
            apply_naive_lift(Slot::First, CircleParam::one(), &t, &yxy)
                .unwrap()
                .terms()
                .len(),
            0
        );
        // γ = 0 coincides with the boolean lift.
        for w in space.basis(3) {
            if w.len() == 3 {
                continue;
            }
            let v = FreeVector::from_word(space.clone(), w, 3).unwrap();
            for slot in [Slot::First, Slot::Second] {
                let naive = apply_naive_lift(slot, CircleParam::zero(), &t, &v).unwrap();
                let spec = FreeLiftSpec {
                    side: Side::Left,
                    slot,
                    param: CircleParam::zero(),
                };
                let boolean = apply_free_lift(&spec, &t, &v).unwrap();
                assert!(naive.distance(&boolean) < 1e-15);
            }
        }
    }

    #[test]
    fn truncation_overflow_is_reported() {
        let a = creation(&Vector::basis(sp(2), 1)).unwrap();
        let v = FreeVector::from_word(pair(), word(&[2], &[1]), 1).unwrap();
        assert!(matches!(
            apply_free_lift(&left(CircleParam::one()), &a, &v),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn dense_identity_and_boolean_projection() {
        let spec = left(CircleParam::one());
        let d = dense_free_operator(&spec, &Op::identity(sp(3)), sp(3), sp(2), 3).unwrap();
        for (i, w) in d.basis.iter().enumerate() {
            if w.len() < 3 {
                for j in 0..d.basis.len() {
                    let e = if i == j { ONE } else { ZERO };
                    assert_eq!(d.matrix[(j, i)], e);
                }
            }
        }
        let spec0 = left(CircleParam::zero());
        let p = Op::vacuum_projection(sp(2));
        let d = dense_free_operator(&spec0, &p, sp(2), sp(2), 3).unwrap();
        let space = pair();
        for w in space.basis(2) {
            let v = FreeVector::from_word(space.clone(), w.clone(), 3).unwrap();
            let rule = apply_free_lift(&spec0, &p, &v).unwrap();
            assert!(d.apply(&v).unwrap().distance(&rule) == 0.0);
            // Only Ω survives.
            let expect = if w.is_empty() { 1.0 } else { 0.0 };
            assert_eq!(rule.norm(), expect);
        }
    }

    #[test]
    fn second_slot_mirrors_first_slot_under_swap() {
        let g = CircleParam::from_angle(2.0);
        let t = random_op(sp(3), 8);
        let r = dense_free_operator(
            &FreeLiftSpec {
                side: Side::Left,
                slot: Slot::Second,
                param: g,
            },
            &t,
            sp(2),
            sp(3),
            3,
        )
        .unwrap();
        let l = dense_free_operator(&left(g), &t, sp(3), sp(2), 3).unwrap();
        let swap = |w: &BasisWord| BasisWord {
            letters: w.letters.iter().map(|l| 3 - l).collect(),
            indices: w.indices.clone(),
        };
        let lpos: BTreeMap<BasisWord, usize> = l.basis.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        for (i, wi) in r.basis.iter().enumerate() {
            for (j, wj) in r.basis.iter().enumerate() {
                let li = lpos[&swap(wi)];
                let lj = lpos[&swap(wj)];
                assert_eq!(r.matrix[(i, j)], l.matrix[(li, lj)]);
            }
        }
    }

    #[test]
    fn basis_size_matches_enumeration() {
        let s = FreeSpace::new(vec![sp(3), sp(2), sp(4)]).unwrap();
        for len in 0..5 {
            assert_eq!(s.basis(len).len(), s.basis_size(len));
        }
        assert_eq!(FreeSpace::pair(sp(3), sp(3)).basis_size(6), 253);
    }

    #[test]
    fn json_round_trip() {
        let v = FreeVector::from_terms(pair(), [(word(&[1, 2], &[1, 1]), C64::new(0.5, -1.0))], 2).unwrap();
        let json = serde_json::to_string(&v.to_json_terms()).unwrap();
        assert_eq!(json, r#"[{"word":[1,2],"indices":[1,1],"coeff":[0.5,-1.0]}]"#);
        let back: Vec<FreeTermJson> = serde_json::from_str(&json).unwrap();
        assert_eq!(FreeVector::from_json_terms(pair(), &back, 2).unwrap(), v);
    }
}
