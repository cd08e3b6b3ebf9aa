//! Symplectic spaces, symplectic and Hamiltonian matrices, Lagrangian
//! frames and symplectic reduction.
//!
//! A space carries its form matrix `Ω` with `ω(u, v) = ⟨Ω u, v⟩`. The
//! standard space uses `Ω = J = [[0, -I], [I, 0]]`; the doubled space used
//! for graphs of symplectic maps uses `diag(-J, J)`, so the first factor
//! carries `-ω₀`.

mod random;
mod reduction;

pub use random::{
    normal_form_generator, random_hamiltonian, random_hamiltonian_with, random_lagrangian,
    random_lagrangian_with, random_symplectic, random_symplectic_with, GeneratorBlock,
    SpectrumProfile,
};
pub use reduction::{symplectic_reduction, Reduction};

use crate::error::{IndexError, Result};
use crate::numerics::{
    block_diag, ensure_finite, ensure_square, hstack, kernel_basis, numerical_rank, range_basis,
    same_span, vstack, Mat, Tolerances,
};

/// The standard complex structure `J` on `R^{2n}`.
pub fn standard_j(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// A symplectic vector space `R^{2n}` with form matrix `Ω`.
#[derive(Debug, Clone)]
pub struct SymplecticSpace {
    half_dim: usize,
    form: Mat,
}

impl PartialEq for SymplecticSpace {
    fn eq(&self, other: &Self) -> bool {
        self.half_dim == other.half_dim && (&self.form - &other.form).norm() <= 1e-12
    }
}

impl SymplecticSpace {
    pub fn standard(n: usize) -> Self {
        Self {
            half_dim: n,
            form: standard_j(n),
        }
    }

    /// `R^{2n} x R^{2n}` with `Ω̃ = diag(-J, J)`.
    pub fn product(n: usize) -> Self {
        let j = standard_j(n);
        Self {
            half_dim: 2 * n,
            form: block_diag(&(-&j), &j),
        }
    }

    /// A space with an arbitrary antisymmetric invertible form matrix.
    pub fn from_form(form: Mat, tol: &Tolerances) -> Result<Self> {
        ensure_square(form.nrows(), form.ncols())?;
        ensure_finite(&form)?;
        if !form.nrows().is_multiple_of(2) {
            return Err(IndexError::OddDimension(form.nrows()));
        }
        let skew = (&form + form.transpose()).norm();
        if skew > tol.eps_sym * (1.0 + form.norm()) || numerical_rank(&form, tol) < form.nrows() {
            return Err(IndexError::InvalidForm);
        }
        let form = (&form - form.transpose()) * 0.5;
        Ok(Self {
            half_dim: form.nrows() / 2,
            form,
        })
    }

    /// Orthogonal direct sum `V ⊕ Ṽ` with form `diag(Ω, Ω̃)`.
    pub fn direct_sum(&self, other: &SymplecticSpace) -> Self {
        Self {
            half_dim: self.half_dim + other.half_dim,
            form: block_diag(&self.form, &other.form),
        }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    pub fn form(&self) -> &Mat {
        &self.form
    }

    pub fn omega(&self, u: &Mat, v: &Mat) -> f64 {
        (v.transpose() * &self.form * u)[(0, 0)]
    }

    /// Matrix of `ω` between the columns of `a` and `b`: entry `(i, j)` is
    /// `ω(a_i, b_j)`.
    pub fn omega_matrix(&self, a: &Mat, b: &Mat) -> Mat {
        a.transpose() * self.form.transpose() * b
    }

    /// Frame of `W^♯ = {v : ω(u, v) = 0 for all u ∈ W}`.
    pub fn symplectic_orthogonal(&self, w: &Mat, tol: &Tolerances) -> Mat {
        if w.ncols() == 0 {
            return Mat::identity(self.dim(), self.dim());
        }
        kernel_basis(&(w.transpose() * &self.form), tol)
    }
}

fn check_even_square(m: &Mat) -> Result<usize> {
    ensure_square(m.nrows(), m.ncols())?;
    ensure_finite(m)?;
    if !m.nrows().is_multiple_of(2) {
        return Err(IndexError::OddDimension(m.nrows()));
    }
    Ok(m.nrows() / 2)
}

/// `‖Mᵀ J M − J‖`, relative to `max(1, ‖M‖²)`.
fn symplectic_defect(m: &Mat, n: usize) -> f64 {
    let j = standard_j(n);
    (m.transpose() * &j * m - &j).norm() / m.norm_squared().max(1.0)
}

/// `‖Hᵀ J + J H‖`, relative to `max(1, ‖H‖)`.
fn hamiltonian_defect(h: &Mat, n: usize) -> f64 {
    let j = standard_j(n);
    (h.transpose() * &j + &j * h).norm() / h.norm().max(1.0)
}

pub fn is_symplectic(m: &Mat, tol: &Tolerances) -> Result<bool> {
    let n = check_even_square(m)?;
    Ok(symplectic_defect(m, n) <= tol.eps_sym)
}

pub fn is_hamiltonian(m: &Mat, tol: &Tolerances) -> Result<bool> {
    let n = check_even_square(m)?;
    Ok(hamiltonian_defect(m, n) <= tol.eps_sym)
}

/// A validated real symplectic matrix, `MᵀJM = J`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMat(Mat);

impl SymplecticMat {
    pub fn new(m: Mat, tol: &Tolerances) -> Result<Self> {
        let n = check_even_square(&m)?;
        let defect = symplectic_defect(&m, n);
        if defect > tol.eps_sym {
            return Err(IndexError::NotSymplectic { defect });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(2 * n, 2 * n))
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    pub fn half_dim(&self) -> usize {
        self.0.nrows() / 2
    }

    /// `M⁻¹ = -J Mᵀ J`.
    pub fn inverse(&self) -> Self {
        let j = standard_j(self.half_dim());
        Self(-(&j * self.0.transpose() * &j))
    }

    /// Image `M·L` of a Lagrangian of the standard space.
    pub fn apply(&self, l: &LagrangianFrame, tol: &Tolerances) -> Result<LagrangianFrame> {
        if *l.space() != SymplecticSpace::standard(self.half_dim()) {
            return Err(IndexError::DimensionMismatch(format!(
                "{}x{} symplectic matrix applied to a frame in dimension {}",
                self.0.nrows(),
                self.0.ncols(),
                l.space().dim()
            )));
        }
        LagrangianFrame::new(l.space().clone(), &self.0 * l.frame(), tol)
    }

    /// The graph `{(v, Mv)}` as a Lagrangian of the doubled space.
    pub fn graph(&self, tol: &Tolerances) -> Result<LagrangianFrame> {
        let n = self.half_dim();
        LagrangianFrame::new(
            SymplecticSpace::product(n),
            vstack(&Mat::identity(2 * n, 2 * n), &self.0),
            tol,
        )
    }

    /// Blocks `(A, B, C, D)` of `M = [[A, B], [C, D]]`.
    pub fn blocks(&self) -> (Mat, Mat, Mat, Mat) {
        let n = self.half_dim();
        let m = &self.0;
        (
            m.view((0, 0), (n, n)).into_owned(),
            m.view((0, n), (n, n)).into_owned(),
            m.view((n, 0), (n, n)).into_owned(),
            m.view((n, n), (n, n)).into_owned(),
        )
    }
}

/// A validated Hamiltonian matrix, `HᵀJ + JH = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMat(Mat);

impl HamiltonianMat {
    pub fn new(h: Mat, tol: &Tolerances) -> Result<Self> {
        let n = check_even_square(&h)?;
        let defect = hamiltonian_defect(&h, n);
        if defect > tol.eps_sym {
            return Err(IndexError::NotHamiltonian { defect });
        }
        Ok(Self(h))
    }

    /// `H = α J`, the generator of the rotation path.
    pub fn rotation(n: usize, alpha: f64) -> Self {
        Self(standard_j(n) * alpha)
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn half_dim(&self) -> usize {
        self.0.nrows() / 2
    }

    /// `S⁻¹ H S` for symplectic `S`.
    pub fn conjugate_by(&self, s: &SymplecticMat) -> Self {
        Self(s.inverse().matrix() * &self.0 * s.matrix())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    /// `e^{tH}`.
    pub fn flow(&self, t: f64, tol: &Tolerances) -> Result<SymplecticMat> {
        SymplecticMat::new(crate::numerics::matrix_exp(&(&self.0 * t))?, tol)
    }
}

/// An orthonormal frame of a Lagrangian subspace.
#[derive(Debug, Clone)]
pub struct LagrangianFrame {
    space: SymplecticSpace,
    frame: Mat,
}

impl LagrangianFrame {
    /// Validates rank and isotropy of `f` and orthonormalizes its columns.
    pub fn new(space: SymplecticSpace, f: Mat, tol: &Tolerances) -> Result<Self> {
        ensure_finite(&f)?;
        let n = space.half_dim();
        if f.nrows() != space.dim() {
            return Err(IndexError::DimensionMismatch(format!(
                "frame has {} rows, space has dimension {}",
                f.nrows(),
                space.dim()
            )));
        }
        let q = range_basis(&f, tol);
        if q.ncols() != n {
            return Err(IndexError::NotLagrangian(format!(
                "frame spans dimension {} instead of {n}",
                q.ncols()
            )));
        }
        let defect = (q.transpose() * space.form() * &q).norm();
        if defect > tol.eps_sym * space.form().norm().max(1.0) {
            return Err(IndexError::NotLagrangian(format!(
                "isotropy defect {defect:.3e}"
            )));
        }
        Ok(Self { space, frame: q })
    }

    pub fn space(&self) -> &SymplecticSpace {
        &self.space
    }

    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn isotropy_defect(&self) -> f64 {
        (self.frame.transpose() * self.space.form() * &self.frame).norm()
    }

    pub fn same_subspace(&self, other: &LagrangianFrame, tol: &Tolerances) -> bool {
        self.space == other.space && same_span(&self.frame, &other.frame, tol)
    }

    /// `L ⊕ L̃` in the direct sum of the two spaces.
    pub fn direct_sum(&self, other: &LagrangianFrame) -> LagrangianFrame {
        LagrangianFrame {
            space: self.space.direct_sum(&other.space),
            frame: block_diag(&self.frame, &other.frame),
        }
    }
}

/// `L₀ = {0} ⊕ Rⁿ`.
pub fn vertical_lagrangian(n: usize) -> LagrangianFrame {
    LagrangianFrame {
        space: SymplecticSpace::standard(n),
        frame: vstack(&Mat::zeros(n, n), &Mat::identity(n, n)),
    }
}

/// `Rⁿ ⊕ {0}`.
pub fn horizontal_lagrangian(n: usize) -> LagrangianFrame {
    LagrangianFrame {
        space: SymplecticSpace::standard(n),
        frame: vstack(&Mat::identity(n, n), &Mat::zeros(n, n)),
    }
}

/// The diagonal `Δ = {(v, v)}` of the doubled space.
pub fn diagonal(n: usize) -> LagrangianFrame {
    let i = Mat::identity(2 * n, 2 * n);
    LagrangianFrame {
        space: SymplecticSpace::product(n),
        frame: vstack(&i, &i) * std::f64::consts::FRAC_1_SQRT_2,
    }
}

/// `L_a × L_b` in the doubled space of two standard Lagrangians.
pub fn product_lagrangian(a: &LagrangianFrame, b: &LagrangianFrame) -> Result<LagrangianFrame> {
    let n = a.space.half_dim();
    if a.space != SymplecticSpace::standard(n) || b.space != a.space {
        return Err(IndexError::SpaceMismatch);
    }
    Ok(LagrangianFrame {
        space: SymplecticSpace::product(n),
        frame: block_diag(&a.frame, &b.frame),
    })
}

/// The graph of a symplectic matrix in the doubled space.
pub fn graph_lagrangian(m: &SymplecticMat, tol: &Tolerances) -> Result<LagrangianFrame> {
    m.graph(tol)
}

/// Frame of `W^♯` for an arbitrary subspace `W` (given by spanning columns).
pub fn symplectic_orthogonal(space: &SymplecticSpace, w: &Mat, tol: &Tolerances) -> Mat {
    space.symplectic_orthogonal(&range_basis(w, tol), tol)
}

/// `[F_a | F_b]`, the juxtaposed frame used for crossing detection.
pub fn juxtapose(a: &Mat, b: &Mat) -> Mat {
    hstack(a, b)
}
