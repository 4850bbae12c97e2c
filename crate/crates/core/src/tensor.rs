//! Universal lifts to the tensor product of pointed spaces.
//!
//! `H₁ ⊗ H₂` is flattened with `index(i, j) = i·m + j` (`m = dim H₂`), so the
//! vacuum `Ω ⊗ Ω` has index 0. Iterating the construction gives the same
//! flattening for `(H₁ ⊗ H₂) ⊗ H₃` and `H₁ ⊗ (H₂ ⊗ H₃)`, which turns the
//! associativity identities into plain matrix equalities.
//!
//! The classified lifts are
//!
//! ```text
//! λ^γ(X) = X ⊗ P_Ω + X_γ ⊗ P_Ω⊥        ρ^δ(Y) = P_Ω ⊗ Y + P_Ω⊥ ⊗ Y_δ
//! ```
//!
//! and a pair `(λ^γ, ρ^δ)` is middle-associative exactly when `γ = δ`, `γ = 0`
//! or `δ = 0`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{gamma_deform, CircleParam, Isometry, Op, PointedSpace, ONE, ZERO};

/// The tensor product of two pointed spaces with a fixed basis ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorSpace {
    left: PointedSpace,
    right: PointedSpace,
}

impl TensorSpace {
    /// Left factor.
    pub fn left(&self) -> PointedSpace {
        self.left
    }

    /// Right factor.
    pub fn right(&self) -> PointedSpace {
        self.right
    }

    /// Dimension `n·m`.
    pub fn dim(&self) -> usize {
        self.left.dim() * self.right.dim()
    }

    /// The product as a pointed space in its own right.
    pub fn space(&self) -> PointedSpace {
        PointedSpace::new(self.dim()).expect("product of positive dimensions")
    }

    /// Flattened index of `e_i ⊗ e_j`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.right.dim() + j
    }

    /// Index of the vacuum `Ω ⊗ Ω`; always 0.
    pub fn vacuum_index(&self) -> usize {
        self.index(0, 0)
    }
}

/// Builds `H₁ ⊗ H₂`.
pub fn tensor_space(h1: PointedSpace, h2: PointedSpace) -> TensorSpace {
    TensorSpace { left: h1, right: h2 }
}

fn check_space(op: &Op, space: PointedSpace) -> Result<()> {
    if op.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: op.dim(),
        });
    }
    Ok(())
}

/// The left lift `λ^g(X) = X ⊗ P_Ω + X_g ⊗ P_Ω⊥` of an operator on the left factor.
pub fn lift_left_tensor(x: &Op, g: CircleParam, ts: &TensorSpace) -> Result<Op> {
    check_space(x, ts.left)?;
    let vac = Op::vacuum_projection(ts.right);
    let comp = Op::complement_projection(ts.right);
    x.kron(&vac).add(&gamma_deform(x, g).kron(&comp))
}

/// The right lift `ρ^d(Y) = P_Ω ⊗ Y + P_Ω⊥ ⊗ Y_d` of an operator on the right factor.
pub fn lift_right_tensor(y: &Op, d: CircleParam, ts: &TensorSpace) -> Result<Op> {
    check_space(y, ts.right)?;
    let vac = Op::vacuum_projection(ts.left);
    let comp = Op::complement_projection(ts.left);
    vac.kron(y).add(&comp.kron(&gamma_deform(y, d)))
}

/// Whether `(g, d)` lies in the admissible set `{γ = δ} ∪ {γ = 0} ∪ {δ = 0}`.
pub fn validate_tensor_pair(g: CircleParam, d: CircleParam) -> bool {
    g.is_zero() || d.is_zero() || g.approx_eq(&d, crate::hilbert::DEFAULT_TOL)
}

/// The flip unitary `F: H₁ ⊗ H₂ → H₂ ⊗ H₁`, `F(h ⊗ g) = g ⊗ h`.
pub fn flip_operator(ts: &TensorSpace) -> Isometry {
    let (n, m) = (ts.left.dim(), ts.right.dim());
    let swapped = tensor_space(ts.right, ts.left);
    let mut matrix = DMatrix::from_element(n * m, n * m, ZERO);
    for i in 0..n {
        for j in 0..m {
            matrix[(swapped.index(j, i), ts.index(i, j))] = ONE;
        }
    }
    Isometry::new(matrix, crate::hilbert::DEFAULT_TOL).expect("a permutation fixing index 0 is an Ω-preserving unitary")
}

/// Side of a lift: acting on the left or on the right tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TensorSide {
    /// `λ^γ`, acting on the left factor.
    Left,
    /// `ρ^δ`, acting on the right factor.
    Right,
}

/// Applies the lift of the given side.
pub fn lift_tensor(side: TensorSide, op: &Op, p: CircleParam, ts: &TensorSpace) -> Result<Op> {
    match side {
        TensorSide::Left => lift_left_tensor(op, p, ts),
        TensorSide::Right => lift_right_tensor(op, p, ts),
    }
}

/// The two sides of the middle-associativity identity for an operator on `H₂`:
/// `(ρ^d_{H₁,H₂⊗H₃} ∘ λ^g_{H₂,H₃}(Y), λ^g_{H₁⊗H₂,H₃} ∘ ρ^d_{H₁,H₂}(Y))`.
pub fn middle_associativity_pair(
    y: &Op,
    g: CircleParam,
    d: CircleParam,
    h1: PointedSpace,
    h3: PointedSpace,
) -> Result<(Op, Op)> {
    let h2 = y.space();
    let t23 = tensor_space(h2, h3);
    let lhs = lift_right_tensor(&lift_left_tensor(y, g, &t23)?, d, &tensor_space(h1, t23.space()))?;
    let t12 = tensor_space(h1, h2);
    let rhs = lift_left_tensor(&lift_right_tensor(y, d, &t12)?, g, &tensor_space(t12.space(), h3))?;
    Ok((lhs, rhs))
}
