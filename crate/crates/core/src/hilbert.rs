//! Finite-dimensional pointed inner-product spaces.
//!
//! Every space is `C^n` with the standard inner product and the distinguished
//! unit vector `Ω = e₀`. Operators are dense matrices acting on columns:
//! `(T v)_i = Σ_j M_ij v_j`. This convention is used everywhere in the crate.
//!
//! Relative to the orthogonal decomposition `H = CΩ ⊕ Ĥ` an operator has the
//! block form
//!
//! ```text
//!     ⎡ τ   t′* ⎤
//! T = ⎢         ⎥
//!     ⎣ t   T̂   ⎦
//! ```
//!
//! and the γ-deformation rescales those blocks to `(|γ|τ, γt, (γt′)*, |γ|T̂)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used for every coefficient, parameter and moment.
pub type C64 = Complex64;

/// Default tolerance for operator and moment comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Snapping window of [`CircleParam`]: moduli this close to 0 or 1 are
/// normalized exactly.
pub const CIRCLE_SNAP: f64 = 1e-9;

/// Deterministic random generator used for every random object.
pub type SeededRng = ChaCha8Rng;

/// Creates the crate's deterministic generator from a seed.
pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `0 + 0i`.
pub const ZERO: C64 = C64::new(0.0, 0.0);
/// `1 + 0i`.
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Max-entry norm of a matrix.
pub fn max_entry(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A finite-dimensional pointed space `C^dim` with vacuum `e₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointedSpace {
    dim: usize,
}

impl PointedSpace {
    /// A space of dimension `dim ≥ 1`.
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("a pointed space needs dimension ≥ 1".into()));
        }
        Ok(Self { dim })
    }

    /// Dimension of the space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the vacuum complement `Ĥ`.
    pub fn complement_dim(&self) -> usize {
        self.dim - 1
    }

    /// Index of the vacuum vector; always 0.
    pub fn vacuum_index(&self) -> usize {
        0
    }

    /// The vacuum vector `Ω`.
    pub fn vacuum(&self) -> Vector {
        Vector::basis(*self, 0)
    }
}

/// A vector of a [`PointedSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    space: PointedSpace,
    coeffs: DVector<C64>,
}

impl Vector {
    /// Builds a vector from coordinates; the length must match the space.
    pub fn new(space: PointedSpace, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            space,
            coeffs: DVector::from_vec(coeffs),
        })
    }

    /// The `i`-th standard basis vector.
    pub fn basis(space: PointedSpace, i: usize) -> Self {
        let mut coeffs = DVector::zeros(space.dim());
        coeffs[i] = ONE;
        Self { space, coeffs }
    }

    /// Underlying space.
    pub fn space(&self) -> PointedSpace {
        self.space
    }

    /// Coordinates.
    pub fn coeffs(&self) -> &DVector<C64> {
        &self.coeffs
    }

    /// Inner product `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Vector) -> C64 {
        self.coeffs.dotc(&other.coeffs)
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// Whether the vacuum component vanishes within `tol`.
    pub fn is_in_complement(&self, tol: f64) -> bool {
        self.coeffs[0].norm() <= tol
    }

    /// Uniformly random coordinates in the unit square, Ω-component zero.
    pub fn random_in_complement(space: PointedSpace, rng: &mut impl Rng) -> Self {
        let mut coeffs = DVector::from_fn(space.dim(), |_, _| random_scalar(rng));
        coeffs[0] = ZERO;
        Self { space, coeffs }
    }
}

/// A uniformly random scalar with real and imaginary parts in `[-1, 1)`.
pub fn random_scalar(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// An operator on a [`PointedSpace`], stored as a dense square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 2]>>", into = "Vec<Vec<[f64; 2]>>")]
pub struct Op {
    matrix: DMatrix<C64>,
}

impl Op {
    /// Wraps a square matrix.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidMatrix(format!(
                "operator matrix must be square and nonempty, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    /// Builds an operator from rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("rows of unequal length or non-square".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Identity operator.
    pub fn identity(space: PointedSpace) -> Self {
        Self {
            matrix: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    /// Zero operator.
    pub fn zeros(space: PointedSpace) -> Self {
        Self {
            matrix: DMatrix::zeros(space.dim(), space.dim()),
        }
    }

    /// Projection `P_Ω` onto the vacuum line.
    pub fn vacuum_projection(space: PointedSpace) -> Self {
        let mut matrix = DMatrix::zeros(space.dim(), space.dim());
        matrix[(0, 0)] = ONE;
        Self { matrix }
    }

    /// Projection `P_Ω⊥` onto the vacuum complement.
    pub fn complement_projection(space: PointedSpace) -> Self {
        let mut matrix = DMatrix::identity(space.dim(), space.dim());
        matrix[(0, 0)] = ZERO;
        Self { matrix }
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Underlying space.
    pub fn space(&self) -> PointedSpace {
        PointedSpace { dim: self.dim() }
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Entry `M_ij`.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &Op) -> Result<Op> {
        self.check_same(other)?;
        Ok(Op {
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// Sum `self + other`.
    pub fn add(&self, other: &Op) -> Result<Op> {
        self.check_same(other)?;
        Ok(Op {
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Difference `self − other`.
    pub fn sub(&self, other: &Op) -> Result<Op> {
        self.check_same(other)?;
        Ok(Op {
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, c: C64) -> Op {
        Op {
            matrix: &self.matrix * c,
        }
    }

    /// Adjoint (conjugate transpose).
    pub fn adjoint(&self) -> Op {
        Op {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Kronecker product; index `(i, j) ↦ i·m + j`.
    pub fn kron(&self, other: &Op) -> Op {
        Op {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// Applies the operator to a vector.
    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.space().dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.space().dim(),
            });
        }
        Ok(Vector {
            space: self.space(),
            coeffs: &self.matrix * &v.coeffs,
        })
    }

    /// Max-entry norm.
    pub fn max_norm(&self) -> f64 {
        max_entry(&self.matrix)
    }

    /// Max-entry distance to another operator of the same dimension.
    pub fn distance(&self, other: &Op) -> Result<f64> {
        self.check_same(other)?;
        Ok(max_entry(&(&self.matrix - &other.matrix)))
    }

    fn check_same(&self, other: &Op) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for Op {
    type Error = Error;

    fn try_from(rows: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        if rows.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Op::from_rows(&rows)
    }
}

impl From<Op> for Vec<Vec<[f64; 2]>> {
    fn from(op: Op) -> Self {
        let n = op.dim();
        (0..n)
            .map(|i| (0..n).map(|j| [op.matrix[(i, j)].re, op.matrix[(i, j)].im]).collect())
            .collect()
    }
}

/// A lift parameter in `T ∪ {0}`: a complex number of modulus exactly 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct CircleParam {
    value: C64,
}

impl CircleParam {
    /// Validates and normalizes `value`: moduli within [`CIRCLE_SNAP`] of 0
    /// or 1 are snapped exactly; anything else is rejected.
    pub fn new(value: C64) -> Result<Self> {
        let modulus = value.norm();
        if !modulus.is_finite() {
            return Err(Error::NotOnCircle {
                re: value.re,
                im: value.im,
                modulus,
            });
        }
        if modulus <= CIRCLE_SNAP {
            Ok(Self::zero())
        } else if (modulus - 1.0).abs() <= 4.0 * f64::EPSILON {
            // Already unit up to rounding; keep the bits so values round-trip.
            Ok(Self { value })
        } else if (modulus - 1.0).abs() <= CIRCLE_SNAP {
            Ok(Self { value: value / modulus })
        } else {
            Err(Error::NotOnCircle {
                re: value.re,
                im: value.im,
                modulus,
            })
        }
    }

    /// The parameter 0.
    pub fn zero() -> Self {
        Self { value: ZERO }
    }

    /// The parameter 1.
    pub fn one() -> Self {
        Self { value: ONE }
    }

    /// `e^{iθ}`.
    pub fn from_angle(theta: f64) -> Self {
        Self {
            value: C64::from_polar(1.0, theta),
        }
    }

    /// The root of unity `e^{2πik/n}`, computed so that quarter turns are exact.
    pub fn root_of_unity(k: i64, n: i64) -> Self {
        let k = k.rem_euclid(n);
        if (4 * k) % n == 0 {
            let quarter = (4 * k / n) as usize;
            let value = [ONE, C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][quarter];
            return Self { value };
        }
        Self::from_angle(2.0 * std::f64::consts::PI * k as f64 / n as f64)
    }

    /// The parameter as a complex number.
    pub fn value(&self) -> C64 {
        self.value
    }

    /// `|γ| ∈ {0, 1}`.
    pub fn modulus(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }

    /// Whether the parameter is 0.
    pub fn is_zero(&self) -> bool {
        self.value == ZERO
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            value: self.value.conj(),
        }
    }

    /// Product of two parameters (again in `T ∪ {0}`).
    pub fn mul(&self, other: &CircleParam) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let v = self.value * other.value;
        Self { value: v / v.norm() }
    }

    /// Equality within `tol`.
    pub fn approx_eq(&self, other: &CircleParam, tol: f64) -> bool {
        (self.value - other.value).norm() <= tol
    }
}

impl TryFrom<[f64; 2]> for CircleParam {
    type Error = Error;

    fn try_from([re, im]: [f64; 2]) -> Result<Self> {
        CircleParam::new(C64::new(re, im))
    }
}

impl From<CircleParam> for [f64; 2] {
    fn from(p: CircleParam) -> Self {
        [p.value.re, p.value.im]
    }
}

impl std::fmt::Display for CircleParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_scalar(self.value))
    }
}

/// Short human-readable rendering of a scalar (`1`, `-i`, `0.5+0.866i`).
pub fn format_scalar(z: C64) -> String {
    let clean = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    let num = |x: f64| {
        let s = format!("{:.6}", x);
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    };
    match (re == 0.0, im == 0.0) {
        (_, true) => num(re),
        (true, false) if im == 1.0 => "i".into(),
        (true, false) if im == -1.0 => "-i".into(),
        (true, false) => format!("{}i", num(im)),
        (false, false) => {
            let sign = if im < 0.0 { "-" } else { "+" };
            let mag = if im.abs() == 1.0 { String::new() } else { num(im.abs()) };
            format!("{}{}{}i", num(re), sign, mag)
        }
    }
}

/// The block form `(τ, t, t′, T̂)` of an operator relative to `CΩ ⊕ Ĥ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockForm {
    /// `⟨Ω, TΩ⟩`.
    pub tau: C64,
    /// `P_Ω⊥ T Ω`, as coordinates in `Ĥ`.
    pub t: DVector<C64>,
    /// The vector whose adjoint is the row `P_Ω T P_Ω⊥`.
    pub t_prime: DVector<C64>,
    /// `P_Ω⊥ T P_Ω⊥` on `Ĥ`.
    pub hat: DMatrix<C64>,
}

impl BlockForm {
    /// Reassembles the full matrix.
    pub fn reassemble(&self) -> Op {
        let n = self.t.len() + 1;
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = self.tau;
        for i in 1..n {
            m[(i, 0)] = self.t[i - 1];
            m[(0, i)] = self.t_prime[i - 1].conj();
            for j in 1..n {
                m[(i, j)] = self.hat[(i - 1, j - 1)];
            }
        }
        Op { matrix: m }
    }
}

/// Splits an operator into its block form.
pub fn block_decompose(t: &Op) -> BlockForm {
    let n = t.dim();
    let m = t.matrix();
    BlockForm {
        tau: m[(0, 0)],
        t: DVector::from_fn(n - 1, |i, _| m[(i + 1, 0)]),
        t_prime: DVector::from_fn(n - 1, |i, _| m[(0, i + 1)].conj()),
        hat: DMatrix::from_fn(n - 1, n - 1, |i, j| m[(i + 1, j + 1)]),
    }
}

/// Factor by which the γ-deformation scales the matrix entry `(i, j)`.
///
/// Entry `(i, j)` maps the `j`-th basis vector to the `i`-th; the factor is
/// `|γ|` for vacuum-to-vacuum and complement-to-complement entries, `γ` for
/// vacuum-to-complement entries and `γ̄` for complement-to-vacuum entries.
pub fn deformation_factor(g: CircleParam, from_vacuum: bool, to_vacuum: bool) -> C64 {
    match (from_vacuum, to_vacuum) {
        (true, false) => g.value(),
        (false, true) => g.value().conj(),
        _ => C64::new(g.modulus(), 0.0),
    }
}

/// The γ-deformation `T_γ` with blocks `(|γ|τ, γt, (γt′)*, |γ|T̂)`.
pub fn gamma_deform(t: &Op, g: CircleParam) -> Op {
    let n = t.dim();
    let m = t.matrix();
    Op {
        matrix: DMatrix::from_fn(n, n, |i, j| m[(i, j)] * deformation_factor(g, j == 0, i == 0)),
    }
}

/// The creation operator `a*_x`: `Ω ↦ x`, `Ĥ ↦ 0`.
pub fn creation(x: &Vector) -> Result<Op> {
    if !x.is_in_complement(DEFAULT_TOL) {
        return Err(Error::NotInComplement(x.coeffs()[0].norm()));
    }
    let n = x.space().dim();
    let mut m = DMatrix::zeros(n, n);
    for i in 1..n {
        m[(i, 0)] = x.coeffs()[i];
    }
    Ok(Op { matrix: m })
}

/// The annihilation operator `a_x = (a*_x)*`: `x′ ↦ ⟨x, x′⟩Ω`.
pub fn annihilation(x: &Vector) -> Result<Op> {
    Ok(creation(x)?.adjoint())
}

/// The vacuum expectation `⟨Ω, TΩ⟩`.
pub fn vacuum_expectation(t: &Op) -> C64 {
    t.entry(0, 0)
}

/// Random operator with independent entries uniform in the unit square.
pub fn random_op(space: PointedSpace, seed: u64) -> Op {
    random_op_with(space, &mut rng_from_seed(seed))
}

/// [`random_op`] drawing from an existing generator.
pub fn random_op_with(space: PointedSpace, rng: &mut impl Rng) -> Op {
    let n = space.dim();
    Op {
        matrix: DMatrix::from_fn(n, n, |_, _| random_scalar(rng)),
    }
}

/// An Ω-preserving isometry `W: H → G` (`W*W = 1`, `WΩ = Ω`).
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    domain: PointedSpace,
    codomain: PointedSpace,
    matrix: DMatrix<C64>,
}

impl Isometry {
    /// Validates `matrix` (codomain dim × domain dim) as an Ω-preserving isometry.
    pub fn new(matrix: DMatrix<C64>, tol: f64) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows < cols || cols == 0 {
            return Err(Error::InvalidMatrix(format!("{rows}×{cols} cannot be an isometry")));
        }
        let gram = matrix.adjoint() * &matrix;
        if max_entry(&(gram - DMatrix::identity(cols, cols))) > tol {
            return Err(Error::InvalidMatrix("W*W differs from the identity".into()));
        }
        let omega_err = (matrix[(0, 0)] - ONE).norm() + (1..rows).map(|i| matrix[(i, 0)].norm()).sum::<f64>();
        if omega_err > tol {
            return Err(Error::InvalidMatrix("W does not fix the vacuum".into()));
        }
        Ok(Self {
            domain: PointedSpace { dim: cols },
            codomain: PointedSpace { dim: rows },
            matrix,
        })
    }

    /// The identity of a space.
    pub fn identity(space: PointedSpace) -> Self {
        Self {
            domain: space,
            codomain: space,
            matrix: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    /// Domain space.
    pub fn domain(&self) -> PointedSpace {
        self.domain
    }

    /// Codomain space.
    pub fn codomain(&self) -> PointedSpace {
        self.codomain
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Image of a vector.
    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.space() != self.domain {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                found: v.space().dim(),
            });
        }
        Ok(Vector {
            space: self.codomain,
            coeffs: &self.matrix * v.coeffs(),
        })
    }

    /// Kronecker product `W₁ ⊗ W₂`, again Ω-preserving.
    pub fn kron(&self, other: &Isometry) -> Isometry {
        Isometry {
            domain: PointedSpace {
                dim: self.domain.dim * other.domain.dim,
            },
            codomain: PointedSpace {
                dim: self.codomain.dim * other.codomain.dim,
            },
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// An operator `S` on the codomain intertwined with `T` on the domain:
    /// `W T = S W` and `W T* = S* W`. It acts as `W T W*` on the range of
    /// `W` and as a random operator on its orthogonal complement.
    pub fn intertwined_extension(&self, t: &Op, rng: &mut impl Rng) -> Result<Op> {
        if t.dim() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                found: t.dim(),
            });
        }
        let n = self.codomain.dim();
        let w = &self.matrix;
        let q = DMatrix::identity(n, n) - w * w.adjoint();
        let z = random_op_with(self.codomain, rng);
        let s = w * t.matrix() * w.adjoint() + &q * z.matrix() * &q;
        Op::new(s)
    }
}

/// Random Ω-preserving isometry by Gram–Schmidt on a seeded random complement.
pub fn random_isometry(domain: PointedSpace, codomain: PointedSpace, seed: u64) -> Result<Isometry> {
    random_isometry_with(domain, codomain, &mut rng_from_seed(seed))
}

/// [`random_isometry`] drawing from an existing generator.
pub fn random_isometry_with(domain: PointedSpace, codomain: PointedSpace, rng: &mut impl Rng) -> Result<Isometry> {
    let (n, m) = (codomain.dim(), domain.dim());
    if n < m {
        return Err(Error::DimensionMismatch { expected: m, found: n });
    }
    let mut columns: Vec<DVector<C64>> = vec![DVector::from_fn(n, |i, _| if i == 0 { ONE } else { ZERO })];
    while columns.len() < m {
        let mut v = DVector::from_fn(n, |_, _| random_scalar(rng));
        for _ in 0..2 {
            for c in &columns {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            columns.push(v / C64::new(norm, 0.0));
        }
    }
    Isometry::new(DMatrix::from_columns(&columns), DEFAULT_TOL)
}

/// Whether `‖W T − S W‖ ≤ tol` (max-entry norm).
pub fn check_intertwiner(w: &Isometry, t: &Op, s: &Op, tol: f64) -> Result<bool> {
    if t.dim() != w.domain().dim() {
        return Err(Error::DimensionMismatch {
            expected: w.domain().dim(),
            found: t.dim(),
        });
    }
    if s.dim() != w.codomain().dim() {
        return Err(Error::DimensionMismatch {
            expected: w.codomain().dim(),
            found: s.dim(),
        });
    }
    let lhs = w.matrix() * t.matrix();
    let rhs = s.matrix() * w.matrix();
    Ok(max_entry(&(lhs - rhs)) <= tol)
}
