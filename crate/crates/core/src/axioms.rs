//! Numerical checks of the lift axioms and of the axioms of universal
//! products of states.
//!
//! Every check runs a fixed list of explicit witness instances first
//! (creation, annihilation and identity operators evaluated on every basis
//! word of a small product space) and then seeded random instances. Trials
//! are independent and run in parallel; each trial draws from its own
//! ChaCha stream of the given seed, so reports are reproducible regardless
//! of thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::free::{BasisWord, FreeOperator, FreeSpace, FreeVector, LetterSet, LiftRule, Side, Slot};
use crate::hilbert::{
    annihilation, creation, random_isometry_with, random_op_with, random_scalar, rng_from_seed, CircleParam, Isometry,
    Op, PointedSpace, Vector, C64,
};
use crate::products::{
    check_state_welldefined, nested_moment, random_abstract_word, realize, witness_creation, AbstractLetter,
    Bracketing, FaceSide, FaceSpec, Letter, MomentWord, Monoidal, ProductSpec, Representation,
};
use crate::tensor::{lift_left_tensor, lift_right_tensor, tensor_space, validate_tensor_pair};

/// Violations above this bound count as failures.
pub const AXIOM_TOL: f64 = 1e-9;

/// The axioms checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    /// Lifts are multiplicative and linear.
    Homomorphism,
    /// Lifts commute with adjoints.
    Adjoint,
    /// A lift restricted to the embedded factor is the original operator.
    Restriction,
    /// Lifts intertwine Ω-preserving isometries.
    Universality,
    /// Iterated left lifts agree on threefold products.
    LeftAssociativity,
    /// Iterated right lifts agree on threefold products.
    RightAssociativity,
    /// A left lift inside a right lift agrees with the reverse order.
    MiddleAssociativity,
    /// `(φ₁ ⊙ φ₂) ⊙ φ₃ = φ₁ ⊙ (φ₂ ⊙ φ₃)`.
    StateAssociativity,
    /// `(φ₁ ⊙ φ₂)` restricts to `φ₁` and `φ₂`.
    StateRestriction,
    /// The product state is independent of the realizing representations.
    StateWellDefined,
    /// Evaluating through products of generators agrees with evaluating
    /// the expanded word.
    StateUniversality,
}

impl Axiom {
    /// Kebab-case name.
    pub fn name(&self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }
}

/// Outcome of one axiom check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    /// The axiom.
    pub axiom: Axiom,
    /// What was checked, e.g. `"tensor γ=1 δ=0"`.
    pub subject: String,
    /// `max_violation ≤ tolerance`.
    pub passed: bool,
    /// The classification's prediction, if it makes one.
    pub expected: Option<bool>,
    /// Largest violation over all trials.
    pub max_violation: f64,
    /// Tolerance used for `passed`.
    pub tolerance: f64,
    /// Inputs of the worst trial.
    pub witness: Value,
    /// Number of trials (explicit witnesses included).
    pub trials: usize,
    /// Seed.
    pub seed: u64,
}

impl AxiomReport {
    /// Whether the outcome agrees with the prediction (or no prediction is made).
    pub fn as_expected(&self) -> bool {
        self.expected.is_none_or(|e| e == self.passed)
    }
}

/// Which lift implements one side of a lift pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftKind {
    /// `λ^γ` / `ρ^δ` on the tensor product.
    Tensor,
    /// `ℓ^γ` / `r^δ`, acting on the leading letters.
    FreeLeft,
    /// `ℓ̄^γ` / `r̄^δ`, acting on the trailing letters.
    FreeRight,
    /// `λ̃^γ` / `ρ̃^δ`, the tensor-style lifts compressed into the free product.
    Naive,
}

impl LiftKind {
    fn rule(self) -> LiftRule {
        match self {
            LiftKind::FreeLeft | LiftKind::Tensor => LiftRule::Free(Side::Left),
            LiftKind::FreeRight => LiftRule::Free(Side::Right),
            LiftKind::Naive => LiftRule::Naive,
        }
    }
}

/// A left lift and a right lift with their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiftPair {
    /// Lift of operators on the first factor.
    pub left: LiftKind,
    /// Lift of operators on the second factor.
    pub right: LiftKind,
    /// Parameter of the left lift.
    pub gamma: CircleParam,
    /// Parameter of the right lift.
    pub delta: CircleParam,
}

/// Identifiers accepted by [`LiftPair::from_id`].
pub const LIFT_IDS: [&str; 6] = [
    "tensor",
    "free",
    "free-right",
    "free-mixed",
    "free-mixed-reversed",
    "naive",
];

impl LiftPair {
    /// Looks up a lift family by identifier: `tensor` `(λ, ρ)`, `free`
    /// `(ℓ, r)`, `free-right` `(ℓ̄, r̄)`, `free-mixed` `(ℓ, r̄)`,
    /// `free-mixed-reversed` `(ℓ̄, r)`, `naive` `(λ̃, ρ̃)`.
    pub fn from_id(id: &str, gamma: CircleParam, delta: CircleParam) -> Result<Self> {
        use LiftKind::*;
        let (left, right) = match id {
            "tensor" => (Tensor, Tensor),
            "free" => (FreeLeft, FreeLeft),
            "free-right" => (FreeRight, FreeRight),
            "free-mixed" => (FreeLeft, FreeRight),
            "free-mixed-reversed" => (FreeRight, FreeLeft),
            "naive" => (Naive, Naive),
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown lift identifier {other:?}; expected one of {}",
                    LIFT_IDS.join(", ")
                )))
            }
        };
        Ok(Self {
            left,
            right,
            gamma,
            delta,
        })
    }

    /// Whether the pair lives on the tensor product.
    pub fn is_tensor(&self) -> bool {
        self.left == LiftKind::Tensor
    }

    /// Short description.
    pub fn describe(&self) -> String {
        let name = |k: LiftKind, l: bool| match (k, l) {
            (LiftKind::Tensor, true) => "λ",
            (LiftKind::Tensor, false) => "ρ",
            (LiftKind::FreeLeft, true) => "ℓ",
            (LiftKind::FreeLeft, false) => "r",
            (LiftKind::FreeRight, true) => "ℓ̄",
            (LiftKind::FreeRight, false) => "r̄",
            (LiftKind::Naive, true) => "λ̃",
            (LiftKind::Naive, false) => "ρ̃",
        };
        format!(
            "({}^{}, {}^{})",
            name(self.left, true),
            self.gamma,
            name(self.right, false),
            self.delta
        )
    }

    /// The classification's prediction for an axiom.
    pub fn expected(&self, axiom: Axiom) -> Option<bool> {
        let (g, d) = (self.gamma, self.delta);
        let both_zero = g.is_zero() && d.is_zero();
        match axiom {
            Axiom::Homomorphism | Axiom::Adjoint | Axiom::Restriction | Axiom::Universality => Some(true),
            Axiom::LeftAssociativity => Some(self.left != LiftKind::Naive || g.is_zero()),
            Axiom::RightAssociativity => Some(self.right != LiftKind::Naive || d.is_zero()),
            Axiom::MiddleAssociativity => match (self.left, self.right) {
                (LiftKind::Tensor, _) => Some(validate_tensor_pair(g, d)),
                (l, r) if l == r && l != LiftKind::Naive => Some(g.is_zero() == d.is_zero()),
                // The compressed pair inherits the tensor boundary.
                (LiftKind::Naive, LiftKind::Naive) => Some(validate_tensor_pair(g, d)),
                (LiftKind::Naive, _) | (_, LiftKind::Naive) => both_zero.then_some(true),
                _ => Some(both_zero),
            },
            _ => None,
        }
    }
}

/// Outcome of a single trial: violation and a description of its inputs.
type Trial = (f64, Value);

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Runs `trials` trials in parallel and merges them by maximal violation
/// (ties go to the earliest trial).
fn run_trials(trials: usize, f: impl Fn(usize) -> Result<Trial> + Sync) -> Result<Trial> {
    let results: Vec<Result<Trial>> = (0..trials).into_par_iter().map(&f).collect();
    let mut best: Trial = (0.0, Value::Null);
    for r in results {
        let (v, w) = r?;
        if v > best.0 || best.1.is_null() {
            best = (v, w);
        }
    }
    Ok(best)
}

fn report(
    axiom: Axiom,
    subject: String,
    expected: Option<bool>,
    trials: usize,
    seed: u64,
    (v, w): Trial,
) -> AxiomReport {
    AxiomReport {
        axiom,
        subject,
        passed: v <= AXIOM_TOL,
        expected,
        max_violation: v,
        tolerance: AXIOM_TOL,
        witness: w,
        trials,
        seed,
    }
}

/// Dimension of factor `k` (0-based); missing entries repeat the last one.
fn factor_dim(dims: &[usize], k: usize) -> Result<PointedSpace> {
    let d = dims.get(k).or(dims.last()).copied().unwrap_or(2);
    PointedSpace::new(d)
}

/// Operators used by the explicit witness trials on `CΩ ⊕ Cξ`.
fn witness_ops(space: PointedSpace) -> Vec<(&'static str, Op)> {
    let xi = Vector::basis(space, 1);
    vec![
        ("identity", Op::identity(space)),
        ("creation", creation(&xi).expect("ξ ⊥ Ω")),
        ("annihilation", annihilation(&xi).expect("ξ ⊥ Ω")),
    ]
}

fn op_json(op: &Op) -> Value {
    serde_json::to_value(op).unwrap_or(Value::Null)
}

// ---------------------------------------------------------------------------
// Operator models of the lifts.

/// A lift of an operator on the factor `letter` of a product of three or
/// fewer factors, realized in one of the two models.
enum Lifted {
    Dense(Op),
    Free(FreeOperator),
}

/// One binary lift step: lifts `inner` (living on `own`) into `first | second`.
fn lift_step(
    kind: LiftKind,
    param: CircleParam,
    inner: Lifted,
    first: &[u8],
    second: &[u8],
    slot: Slot,
    spaces: &[PointedSpace],
) -> Result<Lifted> {
    let dim = |g: &[u8]| g.iter().map(|&l| spaces[l as usize - 1].dim()).product::<usize>();
    match inner {
        Lifted::Dense(op) => {
            let ts = tensor_space(PointedSpace::new(dim(first))?, PointedSpace::new(dim(second))?);
            let lifted = match slot {
                Slot::First => lift_left_tensor(&op, param, &ts)?,
                Slot::Second => lift_right_tensor(&op, param, &ts)?,
            };
            Ok(Lifted::Dense(lifted))
        }
        Lifted::Free(op) => Ok(Lifted::Free(op.lift(
            kind.rule(),
            param,
            LetterSet::of(first),
            LetterSet::of(second),
            slot,
        )?)),
    }
}

fn base(tensor: bool, letter: u8, op: &Op) -> Lifted {
    if tensor {
        Lifted::Dense(op.clone())
    } else {
        Lifted::Free(FreeOperator::base(letter, op.clone()))
    }
}

/// Test vectors of a free product: every basis word up to `len` (explicit
/// trials) or a few random combinations of them.
fn free_test_vectors(space: &FreeSpace, len: usize, random: Option<&mut ChaCha8Rng>) -> Result<Vec<FreeVector>> {
    let basis = space.basis(len);
    let max_len = len + 2;
    match random {
        None => basis
            .into_iter()
            .map(|w| FreeVector::from_word(space.clone(), w, max_len))
            .collect(),
        Some(rng) => (0..3)
            .map(|_| {
                let terms: Vec<(BasisWord, C64)> = basis.iter().map(|w| (w.clone(), random_scalar(rng))).collect();
                FreeVector::from_terms(space.clone(), terms, max_len)
            })
            .collect(),
    }
}

/// `max ‖A v − B v‖` over the test vectors; for dense operators the
/// largest entry of `A − B`.
fn distance(a: &Lifted, b: &Lifted, vectors: &[FreeVector]) -> Result<f64> {
    match (a, b) {
        (Lifted::Dense(a), Lifted::Dense(b)) => a.distance(b),
        (Lifted::Free(a), Lifted::Free(b)) => {
            let mut worst: f64 = 0.0;
            for v in vectors {
                worst = worst.max(a.apply(v)?.distance(&b.apply(v)?));
            }
            Ok(worst)
        }
        _ => Err(Error::InvalidInput(
            "cannot compare operators of different models".into(),
        )),
    }
}

/// Shared context of one trial of a lift check.
struct LiftTrial {
    tensor: bool,
    spaces: Vec<PointedSpace>,
    /// `(name, operator)` pairs; random trials have a single random operator
    /// per factor.
    ops: Vec<Vec<(String, Op)>>,
    vectors2: Vec<FreeVector>,
    vectors3: Vec<FreeVector>,
}

impl LiftTrial {
    fn new(pair: &LiftPair, dims: &[usize], seed: u64, trial: usize) -> Result<(Self, ChaCha8Rng)> {
        let tensor = pair.is_tensor();
        let mut rng = trial_rng(seed, trial);
        let explicit = trial == 0;
        let spaces = if explicit {
            vec![PointedSpace::new(2)?; 3]
        } else {
            (0..3).map(|k| factor_dim(dims, k)).collect::<Result<Vec<_>>>()?
        };
        let ops = spaces
            .iter()
            .map(|&s| {
                if explicit {
                    witness_ops(s).into_iter().map(|(n, o)| (n.to_string(), o)).collect()
                } else {
                    vec![("random".to_string(), random_op_with(s, &mut rng))]
                }
            })
            .collect();
        let (vectors2, vectors3) = if tensor {
            (Vec::new(), Vec::new())
        } else {
            let (len2, len3) = if explicit { (4, 4) } else { (3, 3) };
            let s2 = FreeSpace::new(spaces[..2].to_vec())?;
            let s3 = FreeSpace::new(spaces.clone())?;
            let r = if explicit { None } else { Some(&mut rng) };
            let v2 = free_test_vectors(&s2, len2, r)?;
            let r = if explicit { None } else { Some(&mut rng) };
            (v2, free_test_vectors(&s3, len3, r)?)
        };
        Ok((
            Self {
                tensor,
                spaces,
                ops,
                vectors2,
                vectors3,
            },
            rng,
        ))
    }

    /// The lift of an operator on factor 1 (left lift) or 2 (right lift) of
    /// the binary product.
    fn binary(&self, pair: &LiftPair, slot: Slot, op: &Op, spaces: &[PointedSpace]) -> Result<Lifted> {
        let (kind, param, letter) = match slot {
            Slot::First => (pair.left, pair.gamma, 1),
            Slot::Second => (pair.right, pair.delta, 2),
        };
        lift_step(kind, param, base(self.tensor, letter, op), &[1], &[2], slot, spaces)
    }
}

fn for_each_op<'a>(ops: &'a [(String, Op)], mut f: impl FnMut(&'a str, &'a Op) -> Result<f64>) -> Result<Trial> {
    let mut best: Trial = (0.0, Value::Null);
    for (name, op) in ops {
        let v = f(name, op)?;
        if v > best.0 || best.1.is_null() {
            best = (v, json!({ "operator": name, "matrix": op_json(op) }));
        }
    }
    Ok(best)
}

fn mul(a: &Lifted, b: &Lifted, vectors: &[FreeVector]) -> Result<Vec<FreeVector>> {
    match (a, b) {
        (Lifted::Free(a), Lifted::Free(b)) => vectors.iter().map(|v| a.apply(&b.apply(v)?)).collect(),
        _ => Err(Error::InvalidInput(
            "product of dense lifts is computed directly".into(),
        )),
    }
}

fn homomorphism_trial(pair: &LiftPair, ctx: &LiftTrial, rng: &mut ChaCha8Rng) -> Result<Trial> {
    let sp = &ctx.spaces[..2];
    let mut best: Trial = (0.0, Value::Null);
    for slot in [Slot::First, Slot::Second] {
        let k = if slot == Slot::First { 0 } else { 1 };
        let y = random_op_with(sp[k], rng);
        let (c1, c2) = (random_scalar(rng), random_scalar(rng));
        let t = for_each_op(&ctx.ops[k], |_, x| {
            let lx = ctx.binary(pair, slot, x, sp)?;
            let ly = ctx.binary(pair, slot, &y, sp)?;
            let lxy = ctx.binary(pair, slot, &x.mul(&y)?, sp)?;
            let lin = ctx.binary(pair, slot, &x.scale(c1).add(&y.scale(c2))?, sp)?;
            match (&lx, &ly) {
                (Lifted::Dense(a), Lifted::Dense(b)) => {
                    let Lifted::Dense(ab) = &lxy else { unreachable!() };
                    let Lifted::Dense(l) = &lin else { unreachable!() };
                    let v1 = ab.distance(&a.mul(b)?)?;
                    let v2 = l.distance(&a.scale(c1).add(&b.scale(c2))?)?;
                    Ok(v1.max(v2))
                }
                _ => {
                    let prod = mul(&lx, &ly, &ctx.vectors2)?;
                    let Lifted::Free(ab) = &lxy else { unreachable!() };
                    let Lifted::Free(l) = &lin else { unreachable!() };
                    let (Lifted::Free(a), Lifted::Free(b)) = (&lx, &ly) else {
                        unreachable!()
                    };
                    let mut worst: f64 = 0.0;
                    for (v, p) in ctx.vectors2.iter().zip(&prod) {
                        worst = worst.max(ab.apply(v)?.distance(p));
                        let lhs = l.apply(v)?;
                        let mut rhs = a.apply(v)?.scale(c1);
                        for (w, c) in b.apply(v)?.scale(c2).terms() {
                            rhs.add_term(w.clone(), *c)?;
                        }
                        worst = worst.max(lhs.distance(&rhs));
                    }
                    Ok(worst)
                }
            }
        })?;
        if t.0 > best.0 || best.1.is_null() {
            best = (t.0, json!({ "slot": format!("{slot:?}").to_lowercase(), "case": t.1 }));
        }
    }
    Ok(best)
}

fn adjoint_trial(pair: &LiftPair, ctx: &LiftTrial) -> Result<Trial> {
    let sp = &ctx.spaces[..2];
    let mut best: Trial = (0.0, Value::Null);
    for slot in [Slot::First, Slot::Second] {
        let k = if slot == Slot::First { 0 } else { 1 };
        let t = for_each_op(&ctx.ops[k], |_, x| {
            let lx = ctx.binary(pair, slot, x, sp)?;
            let lxa = ctx.binary(pair, slot, &x.adjoint(), sp)?;
            match (&lx, &lxa) {
                (Lifted::Dense(a), Lifted::Dense(b)) => a.adjoint().distance(b),
                (Lifted::Free(a), Lifted::Free(b)) => {
                    let mut worst: f64 = 0.0;
                    let images: Vec<FreeVector> = ctx.vectors2.iter().map(|v| a.apply(v)).collect::<Result<_>>()?;
                    let adj: Vec<FreeVector> = ctx.vectors2.iter().map(|v| b.apply(v)).collect::<Result<_>>()?;
                    for (i, u) in ctx.vectors2.iter().enumerate() {
                        for (j, v) in ctx.vectors2.iter().enumerate() {
                            // ⟨u, κ(X) v⟩ = ⟨κ(X*) u, v⟩.
                            worst = worst.max((u.inner(&images[j]) - adj[i].inner(v)).norm());
                        }
                    }
                    Ok(worst)
                }
                _ => unreachable!(),
            }
        })?;
        if t.0 > best.0 || best.1.is_null() {
            best = (t.0, json!({ "slot": format!("{slot:?}").to_lowercase(), "case": t.1 }));
        }
    }
    Ok(best)
}

fn restriction_trial(pair: &LiftPair, ctx: &LiftTrial) -> Result<Trial> {
    let sp = &ctx.spaces[..2];
    let mut best: Trial = (0.0, Value::Null);
    for slot in [Slot::First, Slot::Second] {
        let k = if slot == Slot::First { 0 } else { 1 };
        let t = for_each_op(&ctx.ops[k], |_, x| match ctx.binary(pair, slot, x, sp)? {
            Lifted::Dense(lx) => {
                let ts = tensor_space(sp[0], sp[1]);
                let mut worst: f64 = 0.0;
                for i in 0..sp[k].dim() {
                    for r in 0..sp[k].dim() {
                        let (col, row) = match slot {
                            Slot::First => (ts.index(i, 0), ts.index(r, 0)),
                            Slot::Second => (ts.index(0, i), ts.index(0, r)),
                        };
                        worst = worst.max((lx.entry(row, col) - x.entry(r, i)).norm());
                    }
                }
                Ok(worst)
            }
            Lifted::Free(lx) => {
                let letter = k as u8 + 1;
                let space = FreeSpace::new(sp.to_vec())?;
                let plain = FreeOperator::base(letter, x.clone());
                let mut worst: f64 = 0.0;
                for i in 0..sp[k].dim() {
                    let w = if i == 0 {
                        BasisWord::vacuum()
                    } else {
                        BasisWord::letter(letter, i)
                    };
                    let v = FreeVector::from_word(space.clone(), w, 2)?;
                    worst = worst.max(lx.apply(&v)?.distance(&plain.apply(&v)?));
                }
                Ok(worst)
            }
        })?;
        if t.0 > best.0 || best.1.is_null() {
            best = (t.0, json!({ "slot": format!("{slot:?}").to_lowercase(), "case": t.1 }));
        }
    }
    Ok(best)
}

fn universality_trial(pair: &LiftPair, ctx: &LiftTrial, rng: &mut ChaCha8Rng) -> Result<Trial> {
    let sp = &ctx.spaces[..2];
    let big: Vec<PointedSpace> = sp
        .iter()
        .map(|s| PointedSpace::new(s.dim() + 1))
        .collect::<Result<_>>()?;
    let ws: Vec<Isometry> = sp
        .iter()
        .zip(&big)
        .map(|(&a, &b)| random_isometry_with(a, b, rng))
        .collect::<Result<_>>()?;
    let mut best: Trial = (0.0, Value::Null);
    for slot in [Slot::First, Slot::Second] {
        let k = if slot == Slot::First { 0 } else { 1 };
        let t = for_each_op(&ctx.ops[k], |_, x| {
            let s = ws[k].intertwined_extension(x, &mut rng.clone())?;
            let small = ctx.binary(pair, slot, x, sp)?;
            let large = ctx.binary(pair, slot, &s, &big)?;
            match (&small, &large) {
                (Lifted::Dense(a), Lifted::Dense(b)) => {
                    let w = ws[0].kron(&ws[1]);
                    Ok(crate::hilbert::max_entry(
                        &(b.matrix() * w.matrix() - w.matrix() * a.matrix()),
                    ))
                }
                (Lifted::Free(a), Lifted::Free(b)) => {
                    let target = FreeSpace::new(big.clone())?;
                    let mut worst: f64 = 0.0;
                    for v in &ctx.vectors2 {
                        let lhs = b.apply(&v.map_isometries(&ws, target.clone())?)?;
                        let rhs = a.apply(v)?.map_isometries(&ws, target.clone())?;
                        worst = worst.max(lhs.distance(&rhs));
                    }
                    Ok(worst)
                }
                _ => unreachable!(),
            }
        })?;
        if t.0 > best.0 || best.1.is_null() {
            best = (t.0, json!({ "slot": format!("{slot:?}").to_lowercase(), "case": t.1 }));
        }
    }
    Ok(best)
}

fn associativity_trial(pair: &LiftPair, ctx: &LiftTrial, axiom: Axiom) -> Result<Trial> {
    let sp = &ctx.spaces;
    let t = ctx.tensor;
    let (l, r, g, d) = (pair.left, pair.right, pair.gamma, pair.delta);
    let (first, second) = (Slot::First, Slot::Second);
    let k = match axiom {
        Axiom::LeftAssociativity => 0,
        Axiom::MiddleAssociativity => 1,
        _ => 2,
    };
    for_each_op(&ctx.ops[k], |_, y| {
        let (lhs, rhs) = match axiom {
            // λ_{12,3} ∘ λ_{1,2} = λ_{1,23}
            Axiom::LeftAssociativity => (
                lift_step(
                    l,
                    g,
                    lift_step(l, g, base(t, 1, y), &[1], &[2], first, sp)?,
                    &[1, 2],
                    &[3],
                    first,
                    sp,
                )?,
                lift_step(l, g, base(t, 1, y), &[1], &[2, 3], first, sp)?,
            ),
            // ρ_{1,23} ∘ ρ_{2,3} = ρ_{12,3}
            Axiom::RightAssociativity => (
                lift_step(
                    r,
                    d,
                    lift_step(r, d, base(t, 3, y), &[2], &[3], second, sp)?,
                    &[1],
                    &[2, 3],
                    second,
                    sp,
                )?,
                lift_step(r, d, base(t, 3, y), &[1, 2], &[3], second, sp)?,
            ),
            // ρ_{1,23} ∘ λ_{2,3} = λ_{12,3} ∘ ρ_{1,2}
            _ => (
                lift_step(
                    r,
                    d,
                    lift_step(l, g, base(t, 2, y), &[2], &[3], first, sp)?,
                    &[1],
                    &[2, 3],
                    second,
                    sp,
                )?,
                lift_step(
                    l,
                    g,
                    lift_step(r, d, base(t, 2, y), &[1], &[2], second, sp)?,
                    &[1, 2],
                    &[3],
                    first,
                    sp,
                )?,
            ),
        };
        distance(&lhs, &rhs, &ctx.vectors3)
    })
}

/// Checks every lift axiom for a lift pair: homomorphism, adjoint,
/// restriction and universality on binary products, and left, right and
/// middle associativity on threefold products. `dims` lists the factor
/// dimensions of the random trials; trial 0 uses the explicit witnesses on
/// two-dimensional factors.
pub fn check_lift_axioms(pair: &LiftPair, dims: &[usize], trials: usize, seed: u64) -> Result<Vec<AxiomReport>> {
    let trials = trials.max(1);
    let axioms = [
        Axiom::Homomorphism,
        Axiom::Adjoint,
        Axiom::Restriction,
        Axiom::Universality,
        Axiom::LeftAssociativity,
        Axiom::RightAssociativity,
        Axiom::MiddleAssociativity,
    ];
    axioms
        .iter()
        .map(|&axiom| check_lift_axiom(pair, axiom, dims, trials, seed))
        .collect()
}

/// Checks a single lift axiom.
pub fn check_lift_axiom(
    pair: &LiftPair,
    axiom: Axiom,
    dims: &[usize],
    trials: usize,
    seed: u64,
) -> Result<AxiomReport> {
    let result = run_trials(trials, |trial| {
        let (ctx, mut rng) = LiftTrial::new(pair, dims, seed, trial)?;
        let (v, w) = match axiom {
            Axiom::Homomorphism => homomorphism_trial(pair, &ctx, &mut rng)?,
            Axiom::Adjoint => adjoint_trial(pair, &ctx)?,
            Axiom::Restriction => restriction_trial(pair, &ctx)?,
            Axiom::Universality => universality_trial(pair, &ctx, &mut rng)?,
            Axiom::LeftAssociativity | Axiom::RightAssociativity | Axiom::MiddleAssociativity => {
                associativity_trial(pair, &ctx, axiom)?
            }
            other => return Err(Error::InvalidInput(format!("{} is not a lift axiom", other.name()))),
        };
        let dims: Vec<usize> = ctx.spaces.iter().map(|s| s.dim()).collect();
        Ok((v, json!({ "trial": trial, "dims": dims, "case": w })))
    })?;
    Ok(report(
        axiom,
        pair.describe(),
        pair.expected(axiom),
        trials,
        seed,
        result,
    ))
}

// ---------------------------------------------------------------------------
// Products of states.

fn spec_label(spec: &ProductSpec) -> String {
    let faces: Vec<String> = spec
        .faces()
        .iter()
        .map(|f| {
            let side = match (spec.monoidal(), f.side) {
                (Monoidal::Tensor, _) => "",
                (_, FaceSide::Left) => "left ",
                (_, FaceSide::Right) => "right ",
                (_, FaceSide::Naive) => "naive ",
            };
            format!("{side}γ={} δ={}", f.gamma, f.delta)
        })
        .collect();
    let m = if spec.monoidal() == Monoidal::Tensor {
        "tensor"
    } else {
        "free"
    };
    format!("{m} [{}]", faces.join("; "))
}

/// Predicted outcome of a product axiom: everything holds for admissible
/// specs; a non-boolean compressed tensor-style face breaks associativity
/// only. No prediction is made for other inadmissible specs.
pub fn expected_product_axiom(spec: &ProductSpec, axiom: Axiom) -> Option<bool> {
    if spec.is_admissible() {
        return Some(true);
    }
    let only_naive_defects = spec.faces().iter().all(|f| {
        let ok = ProductSpec::new(
            spec.monoidal(),
            vec![FaceSpec::with_side(FaceSide::Left, f.gamma, f.delta)],
        )
        .is_ok();
        f.side == FaceSide::Naive || ok
    });
    if !only_naive_defects {
        return None;
    }
    Some(axiom != Axiom::StateAssociativity)
}

/// The non-associativity witness `w*w` with `w = x₁^{(2)} x₃^{(1)} x₂^{(1)}`
/// over three copies of `CΩ ⊕ Cξ`, all letters `a*_ξ`.
pub fn compressed_lift_witness_word() -> MomentWord {
    let a = witness_creation();
    let w = MomentWord {
        letters: vec![
            Letter::new(1, 2, a.clone()),
            Letter::new(3, 1, a.clone()),
            Letter::new(2, 1, a),
        ],
    };
    w.adjoint().concat(&w)
}

fn random_triple_word(rng: &mut ChaCha8Rng, spaces: &[PointedSpace], faces: usize, creation_only: bool) -> MomentWord {
    let len = rng.gen_range(1..=6);
    let a = witness_creation();
    let letters = (0..len)
        .map(|_| {
            let algebra = rng.gen_range(1..=spaces.len() as u8);
            let face = rng.gen_range(1..=faces);
            let op = if creation_only {
                if rng.gen_bool(0.5) {
                    a.clone()
                } else {
                    a.adjoint()
                }
            } else {
                random_op_with(spaces[algebra as usize - 1], rng)
            };
            Letter::new(algebra, face, op)
        })
        .collect();
    MomentWord { letters }
}

fn word_json(word: &MomentWord) -> Value {
    Value::Array(
        word.letters
            .iter()
            .map(|l| json!({ "algebra": l.algebra, "face": l.face, "op": op_json(&l.op) }))
            .collect(),
    )
}

fn state_associativity_trial(spec: &ProductSpec, dims: &[usize], seed: u64, trial: usize) -> Result<Trial> {
    let faces = spec.faces().len();
    let mut rng = trial_rng(seed, trial);
    let (word, spaces) = if trial == 0 && faces >= 2 {
        (compressed_lift_witness_word(), vec![PointedSpace::new(2)?; 3])
    } else if trial % 2 == 1 {
        let spaces = vec![PointedSpace::new(2)?; 3];
        (random_triple_word(&mut rng, &spaces, faces, true), spaces)
    } else {
        let spaces = (0..3).map(|k| factor_dim(dims, k)).collect::<Result<Vec<_>>>()?;
        (random_triple_word(&mut rng, &spaces, faces, false), spaces)
    };
    let left = nested_moment(spec, &Bracketing::left_nested(), &word, &spaces)?;
    let right = nested_moment(spec, &Bracketing::right_nested(), &word, &spaces)?;
    Ok((
        (left - right).norm(),
        json!({ "trial": trial, "word": word_json(&word), "left_nested": [left.re, left.im], "right_nested": [right.re, right.im] }),
    ))
}

fn state_restriction_trial(spec: &ProductSpec, dims: &[usize], seed: u64, trial: usize) -> Result<Trial> {
    let faces = spec.faces().len();
    let mut rng = trial_rng(seed, trial);
    let spaces = [factor_dim(dims, 0)?, factor_dim(dims, 1)?];
    let algebra = 1 + (trial % 2) as u8;
    let len = rng.gen_range(1..=5);
    let letters: Vec<Letter> = (0..len)
        .map(|_| {
            Letter::new(
                algebra,
                rng.gen_range(1..=faces),
                random_op_with(spaces[algebra as usize - 1], &mut rng),
            )
        })
        .collect();
    let word = MomentWord { letters };
    let joint = nested_moment(spec, &Bracketing::pair(), &word, &spaces)?;
    let ops: Vec<&Op> = word.letters.iter().map(|l| &l.op).collect();
    let marginal = crate::products::marginal_moment(&ops)?;
    Ok((
        (joint - marginal).norm(),
        json!({ "trial": trial, "word": word_json(&word) }),
    ))
}

fn well_defined_trial(spec: &ProductSpec, dims: &[usize], seed: u64, trial: usize) -> Result<Trial> {
    let faces = spec.faces().len();
    let mut rng = trial_rng(seed, trial);
    let reps = [
        Representation::random(factor_dim(dims, 0)?, faces, 2, &mut rng),
        Representation::random(factor_dim(dims, 1)?, faces, 2, &mut rng),
    ];
    let conj = [reps[0].conjugated(&mut rng)?, reps[1].conjugated(&mut rng)?];
    let padded = [reps[0].padded(1, &mut rng)?, reps[1].padded(2, &mut rng)?];
    let words: Vec<Vec<AbstractLetter>> = (1..=5)
        .map(|len| random_abstract_word(&mut rng, len, faces, 2))
        .collect();
    let pairs = [reps, conj, padded];
    let (_, worst) = welldefined_with(spec, &pairs, &words)?;
    Ok((worst, json!({ "trial": trial, "word_lengths": [1, 2, 3, 4, 5] })))
}

fn welldefined_with(
    spec: &ProductSpec,
    pairs: &[[Representation; 2]],
    words: &[Vec<AbstractLetter>],
) -> Result<(bool, f64)> {
    if spec.is_admissible() {
        return check_state_welldefined(spec, pairs, words, AXIOM_TOL);
    }
    // Inadmissible specs are evaluated without the admissibility gate.
    let mut worst: f64 = 0.0;
    for w in words {
        let moment = |p: &[Representation; 2]| -> Result<C64> {
            nested_moment(
                spec,
                &Bracketing::pair(),
                &realize(w, &[&p[0], &p[1]])?,
                &[p[0].space, p[1].space],
            )
        };
        let reference = moment(&pairs[0])?;
        for p in &pairs[1..] {
            worst = worst.max((moment(p)? - reference).norm());
        }
    }
    Ok((worst <= AXIOM_TOL, worst))
}

fn state_universality_trial(spec: &ProductSpec, dims: &[usize], seed: u64, trial: usize) -> Result<Trial> {
    let faces = spec.faces().len();
    let mut rng = trial_rng(seed, trial);
    let spaces = [factor_dim(dims, 0)?, factor_dim(dims, 1)?];
    let len = rng.gen_range(1..=4);
    // Each letter is a product of two generators; the expanded word lists
    // the generators separately.
    let mut compact = Vec::new();
    let mut expanded = Vec::new();
    for _ in 0..len {
        let algebra = rng.gen_range(1..=2u8);
        let face = rng.gen_range(1..=faces);
        let s = spaces[algebra as usize - 1];
        let (g1, g2) = (random_op_with(s, &mut rng), random_op_with(s, &mut rng));
        compact.push(Letter::new(algebra, face, g1.mul(&g2)?));
        expanded.push(Letter::new(algebra, face, g1));
        expanded.push(Letter::new(algebra, face, g2));
    }
    let (compact, expanded) = (MomentWord { letters: compact }, MomentWord { letters: expanded });
    let a = nested_moment(spec, &Bracketing::pair(), &compact, &spaces)?;
    let b = nested_moment(spec, &Bracketing::pair(), &expanded, &spaces)?;
    Ok(((a - b).norm(), json!({ "trial": trial, "word": word_json(&compact) })))
}

/// One trial of a state-product axiom: spec, dims, seed, trial index.
type ProductTrial = fn(&ProductSpec, &[usize], u64, usize) -> Result<Trial>;

/// Checks the axioms of a universal product of states for a spec:
/// associativity on triples (trial 0 is the compressed-lift witness word),
/// restriction, independence of the realizing representations, and
/// compatibility with products of generators. Inadmissible specs are
/// rejected unless their only defect is a compressed tensor-style face.
pub fn check_product_axioms(spec: &ProductSpec, dims: &[usize], trials: usize, seed: u64) -> Result<Vec<AxiomReport>> {
    if expected_product_axiom(spec, Axiom::StateAssociativity).is_none() {
        // Reproduces the admissibility error of the offending face.
        ProductSpec::new(spec.monoidal(), spec.faces().to_vec())?;
    }
    let trials = trials.max(1);
    let label = spec_label(spec);
    let checks: [(Axiom, ProductTrial); 4] = [
        (Axiom::StateAssociativity, state_associativity_trial),
        (Axiom::StateRestriction, state_restriction_trial),
        (Axiom::StateWellDefined, well_defined_trial),
        (Axiom::StateUniversality, state_universality_trial),
    ];
    checks
        .iter()
        .map(|(axiom, f)| {
            let result = run_trials(trials, |t| f(spec, dims, seed, t))?;
            Ok(report(
                *axiom,
                label.clone(),
                expected_product_axiom(spec, *axiom),
                trials,
                seed,
                result,
            ))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Classification boundaries.

/// Lift families swept by [`boundary_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepFamily {
    /// `(λ^γ, ρ^δ)`.
    TensorPair,
    /// `(ℓ^γ, r^δ)`.
    FreeSameSide,
    /// `(ℓ^γ, r̄^δ)`.
    FreeMixedSide,
}

impl SweepFamily {
    /// Parses `tensor-pair`, `free-same-side` or `free-mixed-side`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tensor-pair" | "tensor" => Ok(Self::TensorPair),
            "free-same-side" | "free" => Ok(Self::FreeSameSide),
            "free-mixed-side" | "free-mixed" => Ok(Self::FreeMixedSide),
            other => Err(Error::InvalidInput(format!(
                "unknown sweep family {other:?}; expected tensor-pair, free-same-side or free-mixed-side"
            ))),
        }
    }

    fn id(self) -> &'static str {
        match self {
            Self::TensorPair => "tensor",
            Self::FreeSameSide => "free",
            Self::FreeMixedSide => "free-mixed",
        }
    }
}

/// Middle associativity at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Left-lift parameter.
    pub gamma: CircleParam,
    /// Right-lift parameter.
    pub delta: CircleParam,
    /// Whether middle associativity held.
    pub passed: bool,
    /// The classification's prediction.
    pub expected: bool,
    /// Largest violation.
    pub violation: f64,
    /// Inputs of the worst trial.
    pub witness: Value,
}

/// The grid `{e^{2πik/12}} ∪ {0}`.
pub fn roots_of_unity_grid(n: i64) -> Vec<CircleParam> {
    std::iter::once(CircleParam::zero())
        .chain((0..n).map(|k| CircleParam::root_of_unity(k, n)))
        .collect()
}

/// Middle associativity over `grid × grid` for a lift family. Each point
/// runs the explicit witnesses plus two random trials.
pub fn boundary_sweep(family: SweepFamily, grid: &[CircleParam], dims: &[usize], seed: u64) -> Result<Vec<SweepPoint>> {
    let points: Vec<(CircleParam, CircleParam)> =
        grid.iter().flat_map(|&g| grid.iter().map(move |&d| (g, d))).collect();
    points
        .par_iter()
        .map(|&(g, d)| {
            let pair = LiftPair::from_id(family.id(), g, d)?;
            let r = check_lift_axiom(&pair, Axiom::MiddleAssociativity, dims, 3, seed)?;
            Ok(SweepPoint {
                gamma: g,
                delta: d,
                passed: r.passed,
                expected: pair.expected(Axiom::MiddleAssociativity).unwrap_or(true),
                violation: r.max_violation,
                witness: r.witness,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Named verification suites.

/// Families accepted by [`verification_suite`].
pub const SUITE_FAMILIES: [&str; 5] = ["tensor", "free", "naive-free", "products", "all"];

/// Parameter points used by the suites: `{0, 1, i, e^{5πi/6}}²`, covering
/// both admissible and inadmissible pairs of every family.
fn suite_points() -> Vec<(CircleParam, CircleParam)> {
    let values = [
        CircleParam::zero(),
        CircleParam::one(),
        CircleParam::root_of_unity(3, 12),
        CircleParam::root_of_unity(5, 12),
    ];
    values
        .iter()
        .flat_map(|&g| values.iter().map(move |&d| (g, d)))
        .collect()
}

fn lift_suite(ids: &[&str], dims: &[usize], trials: usize, seed: u64) -> Result<Vec<AxiomReport>> {
    let mut out = Vec::new();
    for id in ids {
        for (g, d) in suite_points() {
            out.extend(check_lift_axioms(&LiftPair::from_id(id, g, d)?, dims, trials, seed)?);
        }
    }
    Ok(out)
}

fn product_suite(specs: &[ProductSpec], dims: &[usize], trials: usize, seed: u64) -> Result<Vec<AxiomReport>> {
    let mut out = Vec::new();
    for spec in specs {
        out.extend(check_product_axioms(spec, dims, trials, seed)?);
    }
    Ok(out)
}

fn suite_specs(family: &str) -> Result<Vec<ProductSpec>> {
    let (zero, one) = (CircleParam::zero(), CircleParam::one());
    let (i, w) = (CircleParam::root_of_unity(3, 12), CircleParam::root_of_unity(5, 12));
    let (l, r) = (FaceSide::Left, FaceSide::Right);
    Ok(match family {
        "tensor" => vec![
            ProductSpec::tensor(&[(one, one), (one, one)])?,
            ProductSpec::tensor(&[(i, i), (zero, w)])?,
            ProductSpec::tensor(&[(w, zero), (zero, zero)])?,
        ],
        "free" => vec![
            ProductSpec::free(&[(l, one, one), (l, one, one)])?,
            ProductSpec::free(&[(l, i, w), (r, one, one)])?,
            ProductSpec::free(&[(r, w, one), (l, zero, zero)])?,
            ProductSpec::free(&[(l, zero, zero), (l, zero, zero)])?,
        ],
        "naive-free" => vec![
            ProductSpec::unchecked(
                Monoidal::Free,
                vec![
                    FaceSpec::with_side(l, one, one),
                    FaceSpec::with_side(FaceSide::Naive, one, zero),
                ],
            )?,
            ProductSpec::free(&[(l, one, one), (FaceSide::Naive, zero, zero)])?,
        ],
        _ => Vec::new(),
    })
}

/// Runs the lift and product checks of a family: `tensor` (tensor lifts and
/// products), `free` (the four free lift pairs and free products),
/// `naive-free` (the compressed tensor-style lifts and the free-antimonotone
/// product built from them), `products` (product checks of every family)
/// or `all`.
pub fn verification_suite(family: &str, dims: &[usize], trials: usize, seed: u64) -> Result<Vec<AxiomReport>> {
    let free_ids = ["free", "free-right", "free-mixed", "free-mixed-reversed"];
    match family {
        "tensor" => {
            let mut out = lift_suite(&["tensor"], dims, trials, seed)?;
            out.extend(product_suite(&suite_specs("tensor")?, dims, trials, seed)?);
            Ok(out)
        }
        "free" => {
            let mut out = lift_suite(&free_ids, dims, trials, seed)?;
            out.extend(product_suite(&suite_specs("free")?, dims, trials, seed)?);
            Ok(out)
        }
        "naive-free" => {
            let mut out = lift_suite(&["naive"], dims, trials, seed)?;
            out.extend(product_suite(&suite_specs("naive-free")?, dims, trials, seed)?);
            Ok(out)
        }
        "products" => {
            let mut out = Vec::new();
            for f in ["tensor", "free", "naive-free"] {
                out.extend(product_suite(&suite_specs(f)?, dims, trials, seed)?);
            }
            Ok(out)
        }
        "all" => {
            let mut out = Vec::new();
            for f in ["tensor", "free", "naive-free"] {
                out.extend(verification_suite(f, dims, trials, seed)?);
            }
            Ok(out)
        }
        other => Err(Error::InvalidInput(format!(
            "unknown family {other:?}; expected one of {}",
            SUITE_FAMILIES.join(", ")
        ))),
    }
}
