//! Multi-faced universal products of representations and states.
//!
//! A [`ProductSpec`] assigns to each face a pair of lifts: a left lift for
//! the first algebra and a right lift for the second. The product of two
//! representations sends a letter of algebra 1 on face `f` to the left lift
//! of face `f` and a letter of algebra 2 to the right lift of face `f`; the
//! product of the vacuum states is the vacuum expectation of that product
//! representation.
//!
//! Nested products over more than two algebras are described by a
//! [`Bracketing`]; at each node the letter's algebra decides whether the left
//! or the right lift of its face is applied.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free::{FreeOperator, FreeSpace, FreeVector, LetterSet, LiftRule, Side, Slot};
use crate::hilbert::{
    creation, format_scalar, random_isometry_with, random_op_with, rng_from_seed, vacuum_expectation, CircleParam, Op,
    PointedSpace, Vector, C64, DEFAULT_TOL, ONE,
};
use crate::tensor::{lift_left_tensor, lift_right_tensor, tensor_space, validate_tensor_pair};

/// The monoidal product the lifts act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monoidal {
    /// `H₁ ⊗ H₂`.
    Tensor,
    /// `H₁ * H₂`.
    Free,
}

/// How the lifts of one face act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceSide {
    /// Tensor lifts `(λ^γ, ρ^δ)` or left-acting free lifts `(ℓ^γ, r^δ)`.
    #[default]
    Left,
    /// Right-acting free lifts `(ℓ̄^γ, r̄^δ)`.
    Right,
    /// The compressed tensor-style lifts `(λ̃^γ, ρ̃^δ)` on the free product.
    Naive,
}

/// The lift pair of one face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceSpec {
    /// Acting side (free products only).
    #[serde(default)]
    pub side: FaceSide,
    /// Parameter of the left lift.
    pub gamma: CircleParam,
    /// Parameter of the right lift.
    pub delta: CircleParam,
}

impl FaceSpec {
    /// A left-acting (or tensor) face.
    pub fn new(gamma: CircleParam, delta: CircleParam) -> Self {
        Self {
            side: FaceSide::Left,
            gamma,
            delta,
        }
    }

    /// A face with an explicit side.
    pub fn with_side(side: FaceSide, gamma: CircleParam, delta: CircleParam) -> Self {
        Self { side, gamma, delta }
    }

    /// Whether both parameters vanish.
    pub fn is_boolean(&self) -> bool {
        self.gamma.is_zero() && self.delta.is_zero()
    }
}

/// Which lifts every face uses, on which monoidal product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProductSpec")]
pub struct ProductSpec {
    monoidal: Monoidal,
    faces: Vec<FaceSpec>,
}

#[derive(Deserialize)]
struct RawProductSpec {
    monoidal: Monoidal,
    faces: Vec<FaceSpec>,
}

impl TryFrom<RawProductSpec> for ProductSpec {
    type Error = Error;

    fn try_from(raw: RawProductSpec) -> Result<Self> {
        ProductSpec::new(raw.monoidal, raw.faces)
    }
}

impl ProductSpec {
    /// A validated specification: every face must be admissible.
    pub fn new(monoidal: Monoidal, faces: Vec<FaceSpec>) -> Result<Self> {
        let spec = Self::unchecked(monoidal, faces)?;
        for (i, face) in spec.faces.iter().enumerate() {
            check_face(monoidal, face).map_err(|e| Error::Inadmissible(format!("face {}: {e}", i + 1)))?;
        }
        Ok(spec)
    }

    /// A specification that skips the admissibility check (used to exhibit
    /// the failures outside the admissible sets).
    pub fn unchecked(monoidal: Monoidal, faces: Vec<FaceSpec>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::InvalidInput("a product needs at least one face".into()));
        }
        if monoidal == Monoidal::Tensor && faces.iter().any(|f| f.side != FaceSide::Left) {
            return Err(Error::InvalidInput("tensor faces have no acting side".into()));
        }
        Ok(Self { monoidal, faces })
    }

    /// Tensor spec from `(γ_f, δ_f)` pairs.
    pub fn tensor(pairs: &[(CircleParam, CircleParam)]) -> Result<Self> {
        Self::new(
            Monoidal::Tensor,
            pairs.iter().map(|&(g, d)| FaceSpec::new(g, d)).collect(),
        )
    }

    /// Free spec from `(side, γ_f, δ_f)` triples.
    pub fn free(faces: &[(FaceSide, CircleParam, CircleParam)]) -> Result<Self> {
        Self::new(
            Monoidal::Free,
            faces.iter().map(|&(s, g, d)| FaceSpec::with_side(s, g, d)).collect(),
        )
    }

    /// Monoidal product.
    pub fn monoidal(&self) -> Monoidal {
        self.monoidal
    }

    /// Faces, in order.
    pub fn faces(&self) -> &[FaceSpec] {
        &self.faces
    }

    /// Face `f` (1-based).
    pub fn face(&self, f: usize) -> Result<&FaceSpec> {
        f.checked_sub(1)
            .and_then(|i| self.faces.get(i))
            .ok_or_else(|| Error::InvalidInput(format!("face {f} does not exist (spec has {})", self.faces.len())))
    }

    /// Whether every face is admissible.
    pub fn is_admissible(&self) -> bool {
        self.faces.iter().all(|f| check_face(self.monoidal, f).is_ok())
    }

    /// `(γ₁, δ₁, γ₂, δ₂)` of a two-faced spec.
    pub fn params(&self) -> Result<TwoFaceParams> {
        match self.faces.as_slice() {
            [f1, f2] => Ok(TwoFaceParams {
                gamma1: f1.gamma,
                delta1: f1.delta,
                gamma2: f2.gamma,
                delta2: f2.delta,
            }),
            _ => Err(Error::InvalidInput(format!(
                "expected two faces, found {}",
                self.faces.len()
            ))),
        }
    }

    /// The spec with the two algebras' roles exchanged (`γ_f ↔ δ_f`);
    /// `(φ ⊙ ψ)(w) = (ψ ⊙′ φ)(Θw)` for this swapped product `⊙′`.
    pub fn swapped(&self) -> ProductSpec {
        let faces = self
            .faces
            .iter()
            .map(|f| FaceSpec {
                side: f.side,
                gamma: f.delta,
                delta: f.gamma,
            })
            .collect();
        ProductSpec {
            monoidal: self.monoidal,
            faces,
        }
    }
}

fn check_face(monoidal: Monoidal, face: &FaceSpec) -> std::result::Result<(), String> {
    let (g, d) = (face.gamma, face.delta);
    match monoidal {
        Monoidal::Tensor => {
            if validate_tensor_pair(g, d) {
                Ok(())
            } else {
                Err(format!(
                    "(γ, δ) = ({g}, {d}) is not in J_⊗ = {{γ = δ or γ = 0 or δ = 0}}"
                ))
            }
        }
        Monoidal::Free => {
            if face.side == FaceSide::Naive && !face.is_boolean() {
                return Err(format!(
                    "the compressed tensor-style lifts with (γ, δ) = ({g}, {d}) are not universal; only γ = δ = 0 is"
                ));
            }
            if g.is_zero() == d.is_zero() {
                Ok(())
            } else {
                Err(format!("(γ, δ) = ({g}, {d}) is not in T² ∪ {{(0, 0)}}"))
            }
        }
    }
}

/// The parameters `(γ₁, δ₁, γ₂, δ₂)` of a two-faced product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoFaceParams {
    /// Left-lift parameter of face 1.
    pub gamma1: CircleParam,
    /// Right-lift parameter of face 1.
    pub delta1: CircleParam,
    /// Left-lift parameter of face 2.
    pub gamma2: CircleParam,
    /// Right-lift parameter of face 2.
    pub delta2: CircleParam,
}

impl TwoFaceParams {
    /// `γ_f`.
    pub fn gamma(&self, f: usize) -> C64 {
        if f == 1 {
            self.gamma1.value()
        } else {
            self.gamma2.value()
        }
    }

    /// `δ_f`.
    pub fn delta(&self, f: usize) -> C64 {
        if f == 1 {
            self.delta1.value()
        } else {
            self.delta2.value()
        }
    }
}

/// One operator of a moment word: `op` represents an element of face `face`
/// of algebra `algebra`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Letter {
    /// Algebra / tensor factor label, starting at 1.
    pub algebra: u8,
    /// Face label, starting at 1.
    pub face: usize,
    /// The represented operator.
    pub op: Op,
}

impl Letter {
    /// Convenience constructor.
    pub fn new(algebra: u8, face: usize, op: Op) -> Self {
        Self { algebra, face, op }
    }
}

/// A formal product of letters, read left to right as an operator product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MomentWord {
    /// The letters.
    pub letters: Vec<Letter>,
}

impl MomentWord {
    /// A nonempty word.
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidInput("a moment word needs at least one letter".into()));
        }
        Ok(Self { letters })
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// Whether the word is empty (never true for validated words).
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The formal adjoint: reversed order, adjoint operators.
    pub fn adjoint(&self) -> MomentWord {
        let letters = self
            .letters
            .iter()
            .rev()
            .map(|l| Letter::new(l.algebra, l.face, l.op.adjoint()))
            .collect();
        MomentWord { letters }
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &MomentWord) -> MomentWord {
        MomentWord {
            letters: self.letters.iter().chain(&other.letters).cloned().collect(),
        }
    }

    /// Relabels algebras by `f`.
    pub fn relabel(&self, f: impl Fn(u8) -> u8) -> MomentWord {
        let letters = self
            .letters
            .iter()
            .map(|l| Letter::new(f(l.algebra), l.face, l.op.clone()))
            .collect();
        MomentWord { letters }
    }
}

/// How iterated binary products of algebras are nested.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Bracketing {
    /// A single algebra with its label.
    Leaf(u8),
    /// The product of two nested products.
    Node(Box<Bracketing>, Box<Bracketing>),
}

impl Bracketing {
    /// `1 ⊙ 2`.
    pub fn pair() -> Self {
        Self::node(Self::Leaf(1), Self::Leaf(2))
    }

    /// `(1 ⊙ 2) ⊙ 3`.
    pub fn left_nested() -> Self {
        Self::node(Self::pair(), Self::Leaf(3))
    }

    /// `1 ⊙ (2 ⊙ 3)`.
    pub fn right_nested() -> Self {
        Self::node(Self::Leaf(1), Self::node(Self::Leaf(2), Self::Leaf(3)))
    }

    /// Binary node.
    pub fn node(a: Bracketing, b: Bracketing) -> Self {
        Self::Node(Box::new(a), Box::new(b))
    }

    /// Leaf labels from left to right.
    pub fn leaves(&self) -> Vec<u8> {
        match self {
            Bracketing::Leaf(l) => vec![*l],
            Bracketing::Node(a, b) => {
                let mut v = a.leaves();
                v.extend(b.leaves());
                v
            }
        }
    }

    fn letters(&self) -> LetterSet {
        LetterSet::of(&self.leaves())
    }

    fn contains(&self, algebra: u8) -> bool {
        self.letters().contains(algebra)
    }

    fn dim(&self, spaces: &[PointedSpace]) -> usize {
        self.leaves().iter().map(|&l| spaces[l as usize - 1].dim()).product()
    }
}

fn check_bracketing(b: &Bracketing, spaces: &[PointedSpace]) -> Result<()> {
    let leaves = b.leaves();
    let expected: Vec<u8> = (1..=spaces.len() as u8).collect();
    if leaves != expected {
        return Err(Error::InvalidInput(format!(
            "bracketing leaves {leaves:?} must be 1..={} in order",
            spaces.len()
        )));
    }
    Ok(())
}

/// The lifted operator of one letter on the tensor product of all factors.
fn tensor_lifted(spec: &ProductSpec, node: &Bracketing, letter: &Letter, spaces: &[PointedSpace]) -> Result<Op> {
    match node {
        Bracketing::Leaf(_) => Ok(letter.op.clone()),
        Bracketing::Node(a, b) => {
            let face = spec.face(letter.face)?;
            let ts = tensor_space(PointedSpace::new(a.dim(spaces))?, PointedSpace::new(b.dim(spaces))?);
            if a.contains(letter.algebra) {
                lift_left_tensor(&tensor_lifted(spec, a, letter, spaces)?, face.gamma, &ts)
            } else {
                lift_right_tensor(&tensor_lifted(spec, b, letter, spaces)?, face.delta, &ts)
            }
        }
    }
}

/// The lifted operator of one letter on the free product of all factors.
fn free_lifted(spec: &ProductSpec, node: &Bracketing, letter: &Letter) -> Result<FreeOperator> {
    match node {
        Bracketing::Leaf(l) => Ok(FreeOperator::base(*l, letter.op.clone())),
        Bracketing::Node(a, b) => {
            let face = spec.face(letter.face)?;
            let rule = match face.side {
                FaceSide::Left => LiftRule::Free(Side::Left),
                FaceSide::Right => LiftRule::Free(Side::Right),
                FaceSide::Naive => LiftRule::Naive,
            };
            if a.contains(letter.algebra) {
                free_lifted(spec, a, letter)?.lift(rule, face.gamma, a.letters(), b.letters(), Slot::First)
            } else {
                free_lifted(spec, b, letter)?.lift(rule, face.delta, a.letters(), b.letters(), Slot::Second)
            }
        }
    }
}

fn check_word(word: &MomentWord, spaces: &[PointedSpace], faces: usize) -> Result<()> {
    if word.is_empty() {
        return Err(Error::InvalidInput("empty moment word".into()));
    }
    for (p, l) in word.letters.iter().enumerate() {
        if l.algebra == 0 || l.algebra as usize > spaces.len() {
            return Err(Error::InvalidInput(format!(
                "letter {}: algebra {} does not exist",
                p + 1,
                l.algebra
            )));
        }
        if l.face == 0 || l.face > faces {
            return Err(Error::InvalidInput(format!(
                "letter {}: face {} does not exist",
                p + 1,
                l.face
            )));
        }
        let space = spaces[l.algebra as usize - 1];
        if l.op.dim() != space.dim() {
            return Err(Error::InvalidInput(format!(
                "letter {}: operator of dimension {} on algebra {} of dimension {}",
                p + 1,
                l.op.dim(),
                l.algebra,
                space.dim()
            )));
        }
    }
    Ok(())
}

/// `⟨Ω, π(w) Ω⟩` for the nested product representation described by `bracketing`.
pub fn nested_moment(
    spec: &ProductSpec,
    bracketing: &Bracketing,
    word: &MomentWord,
    spaces: &[PointedSpace],
) -> Result<C64> {
    check_bracketing(bracketing, spaces)?;
    check_word(word, spaces, spec.faces.len())?;
    match spec.monoidal {
        Monoidal::Tensor => {
            let dim = bracketing.dim(spaces);
            let mut v = nalgebra::DVector::<C64>::zeros(dim);
            v[0] = ONE;
            for letter in word.letters.iter().rev() {
                let op = tensor_lifted(spec, bracketing, letter, spaces)?;
                v = op.matrix() * v;
            }
            Ok(v[0])
        }
        Monoidal::Free => {
            let space = FreeSpace::new(spaces.to_vec())?;
            let mut v = FreeVector::vacuum(space, word.len());
            for letter in word.letters.iter().rev() {
                v = free_lifted(spec, bracketing, letter)?.apply(&v)?;
            }
            Ok(v.vacuum_coefficient())
        }
    }
}

/// A computed mixed moment with the inputs needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentResult {
    /// The moment.
    #[serde(serialize_with = "serialize_scalar")]
    pub value: C64,
    /// The product specification used.
    pub spec: ProductSpec,
    /// Seed of the random data, if any.
    pub seed: Option<u64>,
}

/// Serializes a scalar as `[re, im]`.
pub fn serialize_scalar<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// `φ₁ ⊙ φ₂ (w)` for the vacuum states of the factor spaces.
pub fn mixed_moment(spec: &ProductSpec, word: &MomentWord, h1: PointedSpace, h2: PointedSpace) -> Result<MomentResult> {
    if !spec.is_admissible() {
        let err = ProductSpec::new(spec.monoidal, spec.faces.clone()).unwrap_err();
        return Err(err);
    }
    let value = nested_moment(spec, &Bracketing::pair(), word, &[h1, h2])?;
    Ok(MomentResult {
        value,
        spec: spec.clone(),
        seed: None,
    })
}

/// Vacuum expectation of the product of the given operators.
pub fn marginal_moment(ops: &[&Op]) -> Result<C64> {
    let mut it = ops.iter();
    let first = it.next().ok_or_else(|| Error::InvalidInput("empty product".into()))?;
    let mut acc = (*first).clone();
    for op in it {
        acc = acc.mul(op)?;
    }
    Ok(vacuum_expectation(&acc))
}

/// Marginal moments entering the length-four closed forms: the means of the
/// two `a`s and two `b`s and the moments of the `a`-pair and `b`-pair in the
/// order they occur in the word.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourLetterMarginals {
    /// Means of the first and second `a` in word order.
    pub a: [C64; 2],
    /// Mean of the product of the two `a`s in word order.
    pub aa: C64,
    /// Means of the first and second `b` in word order.
    pub b: [C64; 2],
    /// Mean of the product of the two `b`s in word order.
    pub bb: C64,
}

impl FourLetterMarginals {
    /// Computes the marginals from operators listed in word order.
    pub fn from_ops(a: [&Op; 2], b: [&Op; 2]) -> Result<Self> {
        Ok(Self {
            a: [vacuum_expectation(a[0]), vacuum_expectation(a[1])],
            aa: marginal_moment(&a)?,
            b: [vacuum_expectation(b[0]), vacuum_expectation(b[1])],
            bb: marginal_moment(&b)?,
        })
    }

    fn a_cov(&self) -> C64 {
        self.aa - self.a[0] * self.a[1]
    }

    fn b_cov(&self) -> C64 {
        self.bb - self.b[0] * self.b[1]
    }

    fn means(&self) -> C64 {
        self.a[0] * self.a[1] * self.b[0] * self.b[1]
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Tensor-lift moment of `a₁b₁a₂b₂`:
/// `⟨a₁⟩⟨b₁⟩⟨a₂⟩⟨b₂⟩ + |δ₁|cov(a)⟨b₁⟩⟨b₂⟩ + |γ₂|⟨a₁⟩⟨a₂⟩cov(b) + γ₂δ̄₁ cov(a)cov(b)`.
pub fn closed_form_tensor_abab(p: &TwoFaceParams, m: &FourLetterMarginals) -> C64 {
    closed_form_free_abab(p, m) + p.gamma2.value() * p.delta1.value().conj() * m.a_cov() * m.b_cov()
}

/// Moment of `a₁b₁a₂b₂` for two left-acting free faces: the first three
/// terms of the tensor formula only.
pub fn closed_form_free_abab(p: &TwoFaceParams, m: &FourLetterMarginals) -> C64 {
    m.means()
        + real(p.delta1.modulus()) * m.a_cov() * m.b[0] * m.b[1]
        + real(p.gamma2.modulus()) * m.a[0] * m.a[1] * m.b_cov()
}

/// Moment of `b₂a₂a₁b₁` for two left-acting free faces; the marginals are
/// in word order (`a = [a₂, a₁]`, `b = [b₂, b₁]`).
pub fn closed_form_free_b2a2a1b1(p: &TwoFaceParams, m: &FourLetterMarginals) -> C64 {
    let g12 = real(p.gamma1.modulus() * p.gamma2.modulus());
    m.means()
        + m.b[0] * m.b[1] * m.a_cov()
        + g12 * m.a[0] * m.a[1] * m.b_cov()
        + p.gamma1.value() * p.gamma2.value().conj() * m.b_cov() * m.a_cov()
}

/// Moment of `a₁b₁a₂b₂` when face 1 is left-acting and face 2 right-acting:
/// the same four terms as the tensor formula.
pub fn closed_form_bifree_abab(p: &TwoFaceParams, m: &FourLetterMarginals) -> C64 {
    closed_form_tensor_abab(p, m)
}

/// Which family of witness moments to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessStyle {
    /// `b_i* a_k* a_ℓ b_j = γ_ℓγ̄_k` and `a_i* b_k* b_ℓ a_j = δ_ℓδ̄_k`.
    FreeFree,
    /// `a_i* b_k* a_ℓ b_j = γ_ℓδ̄_k` (`k ≠ ℓ`), `b_i* a_k* a_k b_j = |γ_k|²`,
    /// `a_i* b_k* b_k a_j = |δ_k|²`.
    BiFree,
}

/// One witness moment with its predicted value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialMoment {
    /// Pattern such as `"b*a*ab"`.
    pub pattern: String,
    /// Face indices `(i, k, ℓ, j)`.
    pub indices: [usize; 4],
    /// Computed moment.
    #[serde(serialize_with = "serialize_scalar")]
    pub value: C64,
    /// Value predicted by the parameter monomials.
    #[serde(serialize_with = "serialize_scalar")]
    pub expected: C64,
}

/// The witness pair `a = b = a*_ξ` on `CΩ ⊕ Cξ`.
pub fn witness_creation() -> Op {
    let h = PointedSpace::new(2).expect("dimension 2");
    creation(&Vector::basis(h, 1)).expect("ξ ⊥ Ω")
}

/// All 64 witness moments `x_i* y_k* z_ℓ w_j` with `x, y, z, w ∈ {a, b}`
/// patterns `b*a*ab`, `a*b*ba`, `a*b*ab` over face indices in `{1, 2}`.
pub fn witness_moments(spec: &ProductSpec) -> Result<Vec<SpecialMoment>> {
    let mut out = Vec::new();
    for pattern in ["b*a*ab", "a*b*ba", "a*b*ab"] {
        for_each_index(|idx| {
            let value = witness_value(spec, pattern, idx)?;
            let expected = predicted_witness(spec, pattern, idx)?;
            out.push(SpecialMoment {
                pattern: pattern.into(),
                indices: idx,
                value,
                expected,
            });
            Ok(())
        })?;
    }
    Ok(out)
}

fn for_each_index(mut f: impl FnMut([usize; 4]) -> Result<()>) -> Result<()> {
    for i in 1..=2 {
        for k in 1..=2 {
            for l in 1..=2 {
                for j in 1..=2 {
                    f([i, k, l, j])?;
                }
            }
        }
    }
    Ok(())
}

fn witness_value(spec: &ProductSpec, pattern: &str, [i, k, l, j]: [usize; 4]) -> Result<C64> {
    let a = witness_creation();
    let algebra = |c: char| if c == 'a' { 1 } else { 2 };
    let chars: Vec<char> = pattern.chars().filter(|c| *c != '*').collect();
    let faces = [i, k, l, j];
    let letters = (0..4)
        .map(|p| {
            let op = if p < 2 { a.adjoint() } else { a.clone() };
            Letter::new(algebra(chars[p]), faces[p], op)
        })
        .collect();
    let h = a.space();
    Ok(mixed_moment(spec, &MomentWord::new(letters)?, h, h)?.value)
}

/// Predicted witness moment in terms of parameter monomials.
///
/// * tensor lifts: `b*a*ab ↦ γ_ℓγ̄_k`, `a*b*ba ↦ δ_ℓδ̄_k`, `a*b*ab ↦ γ_ℓδ̄_k`;
/// * free faces acting from the same side: the first two as for tensor
///   lifts, while `a*b*ab` vanishes;
/// * free faces acting from opposite sides: `b*a*ab ↦ |γ_k|²` and
///   `a*b*ba ↦ |δ_k|²` if `k = ℓ` (0 otherwise), `a*b*ab ↦ γ_ℓδ̄_k` if
///   `k ≠ ℓ` (0 otherwise).
pub fn predicted_witness(spec: &ProductSpec, pattern: &str, [_, k, l, _]: [usize; 4]) -> Result<C64> {
    let p = spec.params()?;
    let zero = C64::new(0.0, 0.0);
    let mixed_sides = spec.monoidal == Monoidal::Free && spec.faces[0].side != spec.faces[1].side;
    Ok(match (spec.monoidal, mixed_sides, pattern) {
        (_, false, "b*a*ab") => p.gamma(l) * p.gamma(k).conj(),
        (_, false, "a*b*ba") => p.delta(l) * p.delta(k).conj(),
        (Monoidal::Tensor, _, "a*b*ab") => p.gamma(l) * p.delta(k).conj(),
        (_, false, _) => zero,
        (_, true, "b*a*ab") if k == l => real(p.gamma(k).norm_sqr()),
        (_, true, "a*b*ba") if k == l => real(p.delta(k).norm_sqr()),
        (_, true, "a*b*ab") if k != l => p.gamma(l) * p.delta(k).conj(),
        _ => zero,
    })
}

/// Tabulates the witness moments of the given style together with their
/// predicted parameter monomials.
pub fn special_moment_checks(spec: &ProductSpec, style: WitnessStyle) -> Result<Vec<SpecialMoment>> {
    let params = spec.params()?;
    let mut out = Vec::new();
    let mut push = |pattern: &str, idx: [usize; 4], expected: C64| -> Result<()> {
        let value = witness_value(spec, pattern, idx)?;
        out.push(SpecialMoment {
            pattern: pattern.into(),
            indices: idx,
            value,
            expected,
        });
        Ok(())
    };
    for_each_index(|idx| {
        let [_, k, l, _] = idx;
        match style {
            WitnessStyle::FreeFree => {
                push("b*a*ab", idx, params.gamma(l) * params.gamma(k).conj())?;
                push("a*b*ba", idx, params.delta(l) * params.delta(k).conj())
            }
            WitnessStyle::BiFree => {
                if k != l {
                    push("a*b*ab", idx, params.gamma(l) * params.delta(k).conj())
                } else {
                    push("b*a*ab", idx, real(params.gamma(k).norm_sqr()))?;
                    push("a*b*ba", idx, real(params.delta(k).norm_sqr()))
                }
            }
        }
    })?;
    Ok(out)
}

/// The five single-faced universal products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingleFaceProduct {
    /// Tensor independence.
    Tensor,
    /// Free independence.
    Free,
    /// Boolean independence.
    Boolean,
    /// Monotone independence.
    Monotone,
    /// Antimonotone independence.
    Antimonotone,
}

impl fmt::Display for SingleFaceProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SingleFaceProduct::Tensor => "tensor",
            SingleFaceProduct::Free => "free",
            SingleFaceProduct::Boolean => "boolean",
            SingleFaceProduct::Monotone => "monotone",
            SingleFaceProduct::Antimonotone => "antimonotone",
        };
        f.write_str(s)
    }
}

/// Identifies the single-faced product induced by the lift pair `(g, d)`.
pub fn classify_single_face(monoidal: Monoidal, g: CircleParam, d: CircleParam) -> Result<SingleFaceProduct> {
    check_face(monoidal, &FaceSpec::new(g, d)).map_err(Error::Inadmissible)?;
    Ok(match (monoidal, g.is_zero(), d.is_zero()) {
        (_, true, true) => SingleFaceProduct::Boolean,
        (Monoidal::Free, _, _) => SingleFaceProduct::Free,
        (Monoidal::Tensor, false, false) => SingleFaceProduct::Tensor,
        (Monoidal::Tensor, false, true) => SingleFaceProduct::Antimonotone,
        (Monoidal::Tensor, true, false) => SingleFaceProduct::Monotone,
    })
}

fn rotate(p: CircleParam, by: CircleParam) -> CircleParam {
    p.mul(&by)
}

fn first_nonzero(params: &[CircleParam]) -> CircleParam {
    params
        .iter()
        .copied()
        .find(|p| !p.is_zero())
        .unwrap_or_else(CircleParam::one)
}

/// Normalizes a two-faced spec within its gauge orbit.
///
/// * tensor: all four parameters are rotated by one `ε ∈ T` making the first
///   nonzero of `γ₂, δ₂, γ₁, δ₁` equal to 1;
/// * two free faces acting from the same side: `γ`s are rotated by `α` and
///   `δ`s by `β` so that `γ₂ = δ₂ = 1`, and the side becomes left;
/// * free faces acting from opposite sides: `(γ₁, δ₂)` are rotated by `α` and
///   `(γ₂, δ₁)` by `β` so that `γ₂ = δ₂ = 1`, face 1 acting from the left and
///   face 2 from the right;
/// * a boolean face makes the other face's side and phase irrelevant.
pub fn canonicalize_spec(spec: &ProductSpec) -> Result<ProductSpec> {
    let p = spec.params()?;
    if !spec.is_admissible() {
        return Err(ProductSpec::new(spec.monoidal, spec.faces.clone()).unwrap_err());
    }
    let one = CircleParam::one();
    let zero = CircleParam::zero();
    match spec.monoidal {
        Monoidal::Tensor => {
            let eps = first_nonzero(&[p.gamma2, p.delta2, p.gamma1, p.delta1]).conj();
            ProductSpec::tensor(&[
                (rotate(p.gamma1, eps), rotate(p.delta1, eps)),
                (rotate(p.gamma2, eps), rotate(p.delta2, eps)),
            ])
        }
        Monoidal::Free => {
            let [f1, f2] = [spec.faces[0], spec.faces[1]];
            let left = FaceSide::Left;
            match (f1.is_boolean(), f2.is_boolean()) {
                (true, true) => ProductSpec::free(&[(left, zero, zero), (left, zero, zero)]),
                (false, true) => ProductSpec::free(&[(left, one, one), (left, zero, zero)]),
                (true, false) => ProductSpec::free(&[(left, zero, zero), (left, one, one)]),
                (false, false) if f1.side == f2.side => {
                    let (alpha, beta) = (p.gamma2.conj(), p.delta2.conj());
                    ProductSpec::free(&[
                        (left, rotate(p.gamma1, alpha), rotate(p.delta1, beta)),
                        (left, one, one),
                    ])
                }
                (false, false) => {
                    let (alpha, beta) = (p.delta2.conj(), p.gamma2.conj());
                    ProductSpec::free(&[
                        (left, rotate(p.gamma1, alpha), rotate(p.delta1, beta)),
                        (FaceSide::Right, one, one),
                    ])
                }
            }
        }
    }
}

/// Whether two two-faced specs induce the same product of states (equal
/// canonical forms).
pub fn same_product(a: &ProductSpec, b: &ProductSpec) -> Result<bool> {
    let (ca, cb) = (canonicalize_spec(a)?, canonicalize_spec(b)?);
    Ok(ca.monoidal == cb.monoidal
        && ca.faces.iter().zip(&cb.faces).all(|(x, y)| {
            x.side == y.side && x.gamma.approx_eq(&y.gamma, DEFAULT_TOL) && x.delta.approx_eq(&y.delta, DEFAULT_TOL)
        }))
}

/// The name of a two-faced product and its continuous parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductName {
    /// Family name, e.g. `"deformed bi-free"` or `"tensor-monotone"`.
    pub family: String,
    /// First continuous parameter, if the family has one.
    #[serde(serialize_with = "serialize_opt_scalar")]
    pub zeta: Option<C64>,
    /// Second continuous parameter, if the family has one.
    #[serde(serialize_with = "serialize_opt_scalar")]
    pub theta: Option<C64>,
}

fn serialize_opt_scalar<S: serde::Serializer>(z: &Option<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    z.map(|z| [z.re, z.im]).serialize(s)
}

impl fmt::Display for ProductName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.family)?;
        if let Some(z) = self.zeta {
            write!(f, ", ζ={}", format_scalar(z))?;
        }
        if let Some(t) = self.theta {
            write!(f, ", θ={}", format_scalar(t))?;
        }
        Ok(())
    }
}

/// Names the product induced by a two-faced spec from its canonical form.
pub fn name_product(spec: &ProductSpec) -> Result<ProductName> {
    let c = canonicalize_spec(spec)?;
    let p = c.params()?;
    match c.monoidal {
        Monoidal::Tensor => {
            let k1 = classify_single_face(Monoidal::Tensor, p.gamma1, p.delta1)?;
            let k2 = classify_single_face(Monoidal::Tensor, p.gamma2, p.delta2)?;
            let continuous = k1 != SingleFaceProduct::Boolean && k2 != SingleFaceProduct::Boolean;
            let zeta = continuous.then(|| first_nonzero(&[p.gamma1, p.delta1]).value());
            Ok(ProductName {
                family: format!("{k1}-{k2}"),
                zeta,
                theta: None,
            })
        }
        Monoidal::Free => {
            let (b1, b2) = (c.faces[0].is_boolean(), c.faces[1].is_boolean());
            let named = |family: &str| ProductName {
                family: family.into(),
                zeta: None,
                theta: None,
            };
            Ok(match (b1, b2) {
                (true, true) => named("boolean-boolean"),
                (false, true) => named("free-boolean"),
                (true, false) => named("boolean-free"),
                (false, false) => {
                    let family = if c.faces[1].side == FaceSide::Right {
                        "deformed bi-free"
                    } else {
                        "deformed free-free"
                    };
                    ProductName {
                        family: family.into(),
                        zeta: Some(p.gamma1.value()),
                        theta: Some(p.delta1.value()),
                    }
                }
            })
        }
    }
}

/// One cell of the classification tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    /// Kind of face 1.
    pub face1: String,
    /// Kind of face 2.
    pub face2: String,
    /// Family name of the resulting product.
    pub product: String,
    /// Canonical parameters `(γ₁, δ₁, γ₂, δ₂)` with `ζ`, `θ` for continuous ones.
    pub canonical: String,
    /// Whether the cell is a continuous family.
    pub continuous: bool,
}

fn pattern(params: &[CircleParam; 4], zeta: Option<C64>, theta: Option<C64>) -> String {
    let show = |p: &CircleParam| {
        let v = p.value();
        if p.is_zero() {
            "0".to_string()
        } else if zeta.is_some_and(|z| (z - v).norm() < 1e-12) {
            "ζ".into()
        } else if theta.is_some_and(|t| (t - v).norm() < 1e-12) {
            "θ".into()
        } else {
            format_scalar(v)
        }
    };
    format!("({})", params.iter().map(show).collect::<Vec<_>>().join(","))
}

/// Generic test phases used when rendering continuous table cells.
fn generic_phases() -> (CircleParam, CircleParam) {
    (CircleParam::from_angle(0.3), CircleParam::from_angle(1.7))
}

/// The 4×4 classification of two-faced products from tensor lifts,
/// regenerated by canonicalizing a representative spec of every cell.
pub fn tensor_table() -> Result<Vec<TableCell>> {
    let (a1, a2) = generic_phases();
    let zero = CircleParam::zero();
    let kinds = |a: CircleParam| {
        [
            ("tensor", a, a),
            ("antimonotone", a, zero),
            ("monotone", zero, a),
            ("boolean", zero, zero),
        ]
    };
    let mut out = Vec::new();
    for (n1, g1, d1) in kinds(a1) {
        for (n2, g2, d2) in kinds(a2) {
            let spec = ProductSpec::tensor(&[(g1, d1), (g2, d2)])?;
            let c = canonicalize_spec(&spec)?.params()?;
            let name = name_product(&spec)?;
            out.push(TableCell {
                face1: n1.into(),
                face2: n2.into(),
                product: name.family.clone(),
                canonical: pattern(&[c.gamma1, c.delta1, c.gamma2, c.delta2], name.zeta, None),
                continuous: name.zeta.is_some(),
            });
        }
    }
    Ok(out)
}

/// The 3×3 classification of two-faced products from free lifts.
pub fn free_table() -> Result<Vec<TableCell>> {
    let (a1, a2) = generic_phases();
    let (b1, b2) = (CircleParam::from_angle(-0.8), CircleParam::from_angle(2.9));
    let zero = CircleParam::zero();
    let kinds1 = [
        ("left free", FaceSide::Left, a1, b1),
        ("right free", FaceSide::Right, a1, b1),
        ("boolean", FaceSide::Left, zero, zero),
    ];
    let kinds2 = [
        ("left free", FaceSide::Left, a2, b2),
        ("right free", FaceSide::Right, a2, b2),
        ("boolean", FaceSide::Left, zero, zero),
    ];
    let mut out = Vec::new();
    for (n1, s1, g1, d1) in kinds1 {
        for (n2, s2, g2, d2) in kinds2 {
            let spec = ProductSpec::free(&[(s1, g1, d1), (s2, g2, d2)])?;
            let c = canonicalize_spec(&spec)?.params()?;
            let name = name_product(&spec)?;
            out.push(TableCell {
                face1: n1.into(),
                face2: n2.into(),
                product: name.family.clone(),
                canonical: pattern(&[c.gamma1, c.delta1, c.gamma2, c.delta2], name.zeta, name.theta),
                continuous: name.zeta.is_some(),
            });
        }
    }
    Ok(out)
}

/// Outcome of [`check_symmetry`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// Whether `(φ ⊙ ψ)(w) = (ψ ⊙ φ)(Θw)` held on every trial.
    pub symmetric: bool,
    /// Prediction from the parameters.
    pub predicted: bool,
    /// Largest observed `|(φ ⊙ ψ)(w) − (ψ ⊙ φ)(Θw)|`.
    pub max_difference: f64,
    /// Largest `|(φ ⊙ ψ)(w) − (ψ ⊙′ φ)(Θw)|` with the role-swapped product
    /// `⊙′`; this identity holds for every spec.
    pub swap_identity_error: f64,
    /// Number of random words.
    pub trials: usize,
    /// Seed.
    pub seed: u64,
}

/// Predicted symmetry of a two-faced product.
pub fn predicted_symmetric(spec: &ProductSpec) -> Result<bool> {
    let c = canonicalize_spec(spec)?;
    let p = c.params()?;
    let tol = DEFAULT_TOL;
    Ok(match c.monoidal {
        Monoidal::Tensor => p.gamma1.approx_eq(&p.delta1, tol) && p.gamma2.approx_eq(&p.delta2, tol),
        Monoidal::Free => c.faces.iter().any(|f| f.is_boolean()) || p.gamma1.approx_eq(&p.delta1, tol),
    })
}

/// Empirically tests whether the product of states is symmetric, i.e.
/// `(φ ⊙ ψ)(w) = (ψ ⊙ φ)(Θw)` where `Θ` exchanges the two algebras, over
/// random representations and random words. Words mix random operators with
/// the witness operators `a*_ξ`, which expose the parameter monomials.
pub fn check_symmetry(spec: &ProductSpec, trials: usize, seed: u64) -> Result<SymmetryReport> {
    let mut rng = rng_from_seed(seed);
    let swapped = spec.swapped();
    let faces = spec.faces.len();
    let mut max_difference: f64 = 0.0;
    let mut swap_identity_error: f64 = 0.0;
    for t in 0..trials {
        let (h, g) = (
            PointedSpace::new(rng.gen_range(2..=3))?,
            PointedSpace::new(rng.gen_range(2..=3))?,
        );
        let len = 2 + t % 5;
        let word = if t % 2 == 0 {
            random_word(&mut rng, len, &[h, g], faces)?
        } else {
            witness_word(&mut rng, len, faces)?
        };
        let (h, g) = if t % 2 == 0 {
            (h, g)
        } else {
            (PointedSpace::new(2)?, PointedSpace::new(2)?)
        };
        let theta = word.relabel(|a| 3 - a);
        let lhs = nested_moment(spec, &Bracketing::pair(), &word, &[h, g])?;
        let same = nested_moment(spec, &Bracketing::pair(), &theta, &[g, h])?;
        let swap = nested_moment(&swapped, &Bracketing::pair(), &theta, &[g, h])?;
        max_difference = max_difference.max((lhs - same).norm());
        swap_identity_error = swap_identity_error.max((lhs - swap).norm());
    }
    Ok(SymmetryReport {
        symmetric: max_difference <= DEFAULT_TOL,
        predicted: predicted_symmetric(spec)?,
        max_difference,
        swap_identity_error,
        trials,
        seed,
    })
}

/// A random word of the given length with uniformly random algebras, faces
/// and operators on the given spaces.
pub fn random_word(rng: &mut impl Rng, len: usize, spaces: &[PointedSpace], faces: usize) -> Result<MomentWord> {
    let letters = (0..len)
        .map(|_| {
            let algebra = rng.gen_range(1..=spaces.len() as u8);
            let face = rng.gen_range(1..=faces);
            Letter::new(algebra, face, random_op_with(spaces[algebra as usize - 1], rng))
        })
        .collect();
    MomentWord::new(letters)
}

/// A random word in the witness operators `a*_ξ` and `a_ξ` on `CΩ ⊕ Cξ`.
pub fn witness_word(rng: &mut impl Rng, len: usize, faces: usize) -> Result<MomentWord> {
    let a = witness_creation();
    let letters = (0..len)
        .map(|p| {
            // Annihilators first so that the word can return to the vacuum.
            let op = if p < len / 2 { a.adjoint() } else { a.clone() };
            Letter::new(rng.gen_range(1..=2), rng.gen_range(1..=faces), op)
        })
        .collect();
    MomentWord::new(letters)
}

/// A representation of a multi-faced algebra: for each face, the operators
/// representing its generators.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    /// Representation space.
    pub space: PointedSpace,
    /// `generators[f][g]` represents generator `g` of face `f + 1`.
    pub generators: Vec<Vec<Op>>,
}

impl Representation {
    /// Random generators on a space.
    pub fn random(space: PointedSpace, faces: usize, generators: usize, rng: &mut impl Rng) -> Self {
        let generators = (0..faces)
            .map(|_| (0..generators).map(|_| random_op_with(space, rng)).collect())
            .collect();
        Self { space, generators }
    }

    /// `W π W* + Q Z Q` for a random Ω-preserving isometry `W` into a space
    /// with `extra` more dimensions; realizes the same state.
    pub fn padded(&self, extra: usize, rng: &mut impl Rng) -> Result<Self> {
        let target = PointedSpace::new(self.space.dim() + extra)?;
        let w = random_isometry_with(self.space, target, rng)?;
        self.transport(&w, rng)
    }

    /// `U π U*` for a random Ω-fixing unitary `U`; realizes the same state.
    pub fn conjugated(&self, rng: &mut impl Rng) -> Result<Self> {
        let u = random_isometry_with(self.space, self.space, rng)?;
        self.transport(&u, rng)
    }

    fn transport(&self, w: &crate::hilbert::Isometry, rng: &mut impl Rng) -> Result<Self> {
        let generators = self
            .generators
            .iter()
            .map(|face| {
                face.iter()
                    .map(|t| w.intertwined_extension(t, rng))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            space: w.codomain(),
            generators,
        })
    }
}

/// A letter of an abstract word: generator `generator` of face `face` of
/// algebra `algebra`, possibly adjoined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AbstractLetter {
    /// Algebra label (1 or 2).
    pub algebra: u8,
    /// Face label, starting at 1.
    pub face: usize,
    /// Generator index.
    pub generator: usize,
    /// Whether the adjoint is taken.
    pub adjoint: bool,
}

/// Evaluates an abstract word through a pair of representations.
pub fn realize(word: &[AbstractLetter], reps: &[&Representation; 2]) -> Result<MomentWord> {
    let letters = word
        .iter()
        .map(|l| {
            let rep = reps
                .get(l.algebra as usize - 1)
                .ok_or_else(|| Error::InvalidInput(format!("algebra {} does not exist", l.algebra)))?;
            let op = rep
                .generators
                .get(l.face - 1)
                .and_then(|f| f.get(l.generator))
                .ok_or_else(|| Error::InvalidInput("generator out of range".into()))?;
            Ok(Letter::new(
                l.algebra,
                l.face,
                if l.adjoint { op.adjoint() } else { op.clone() },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    MomentWord::new(letters)
}

/// Checks that the product state does not depend on the representations
/// chosen for the factor states: every representation pair must give the
/// same mixed moments on every word, within `tol`. Returns the largest
/// deviation from the first pair.
pub fn check_state_welldefined(
    spec: &ProductSpec,
    pairs: &[[Representation; 2]],
    words: &[Vec<AbstractLetter>],
    tol: f64,
) -> Result<(bool, f64)> {
    let mut worst: f64 = 0.0;
    let Some((first, rest)) = pairs.split_first() else {
        return Ok((true, 0.0));
    };
    for w in words {
        let reference = mixed_moment(
            spec,
            &realize(w, &[&first[0], &first[1]])?,
            first[0].space,
            first[1].space,
        )?
        .value;
        for pair in rest {
            let value = mixed_moment(spec, &realize(w, &[&pair[0], &pair[1]])?, pair[0].space, pair[1].space)?.value;
            worst = worst.max((value - reference).norm());
        }
    }
    Ok((worst <= tol, worst))
}

/// Random abstract word.
pub fn random_abstract_word(rng: &mut impl Rng, len: usize, faces: usize, generators: usize) -> Vec<AbstractLetter> {
    (0..len)
        .map(|_| AbstractLetter {
            algebra: rng.gen_range(1..=2),
            face: rng.gen_range(1..=faces),
            generator: rng.gen_range(0..generators),
            adjoint: rng.gen_bool(0.5),
        })
        .collect()
}
