//! The Kashiwara triple index, its reduction by isotropic subspaces, and the
//! Hörmander four-fold index.

use nalgebra::Schur;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IndexError, Result};
use crate::maslov::{maslov_index, HalfInt, LagrangianPath, MaslovOptions};
use crate::numerics::{
    hstack, matrix_exp, numerical_rank, subspace_intersection, sym_signature, CMat, Inertia, Mat,
    Tolerances,
};
use crate::symplectic::{
    horizontal_lagrangian, random_lagrangian_with, random_symplectic_with, vertical_lagrangian,
    HamiltonianMat, LagrangianFrame, Reduction, SymplecticMat, SymplecticSpace,
};

/// Value of the triple index with the inertia it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KashiwaraIndex {
    pub value: i64,
    pub inertia: Inertia,
}

impl KashiwaraIndex {
    /// `Q` has a nontrivial radical; the index is still well defined.
    pub fn degenerate(&self) -> bool {
        self.inertia.n_zero > 0
    }
}

fn check_triple(space: &SymplecticSpace, frames: &[&LagrangianFrame]) -> Result<()> {
    for (i, f) in frames.iter().enumerate() {
        if f.space() != space {
            return Err(IndexError::NotLagrangian(format!(
                "frame {} does not belong to the given space",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Symmetric matrix of `Q(x₁, x₂, x₃) = ω(x₁, x₂) + ω(x₂, x₃) + ω(x₃, x₁)`
/// in the coordinates of the three frames.
pub fn kashiwara_form(
    space: &SymplecticSpace,
    l1: &LagrangianFrame,
    l2: &LagrangianFrame,
    l3: &LagrangianFrame,
) -> Mat {
    let n = space.half_dim();
    let mut t = Mat::zeros(3 * n, 3 * n);
    let pairs = [(0, 1, l1, l2), (1, 2, l2, l3), (2, 0, l3, l1)];
    for (i, j, a, b) in pairs {
        let block = space.omega_matrix(a.frame(), b.frame());
        t.view_mut((i * n, j * n), (n, n)).copy_from(&block);
    }
    (&t + t.transpose()) * 0.5
}

pub fn kashiwara_index_full(
    space: &SymplecticSpace,
    l1: &LagrangianFrame,
    l2: &LagrangianFrame,
    l3: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<KashiwaraIndex> {
    check_triple(space, &[l1, l2, l3])?;
    let inertia = if space.half_dim() == 0 {
        Inertia::default()
    } else {
        sym_signature(&kashiwara_form(space, l1, l2, l3), tol)?
    };
    Ok(KashiwaraIndex {
        value: inertia.signature(),
        inertia,
    })
}

/// Signature of `Q` on `L₁ ⊕ L₂ ⊕ L₃`.
pub fn kashiwara_index(
    space: &SymplecticSpace,
    l1: &LagrangianFrame,
    l2: &LagrangianFrame,
    l3: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<i64> {
    Ok(kashiwara_index_full(space, l1, l2, l3, tol)?.value)
}

/// `({y = 0}, {y = Ax}, {x = 0})` for a symmetric `A`.
pub fn transversal_frames(a: &Mat, tol: &Tolerances) -> Result<[LagrangianFrame; 3]> {
    let n = a.nrows();
    crate::numerics::ensure_square(n, a.ncols())?;
    crate::numerics::ensure_finite(a)?;
    let defect = (a - a.transpose()).norm();
    if defect > tol.eps_sym * (1.0 + a.norm()) {
        return Err(IndexError::AsymmetricInput { defect });
    }
    let space = SymplecticSpace::standard(n);
    let graph = crate::numerics::vstack(&Mat::identity(n, n), a);
    Ok([
        horizontal_lagrangian(n),
        LagrangianFrame::new(space, graph, tol)?,
        vertical_lagrangian(n),
    ])
}

/// Index of the transversal triple built by [`transversal_frames`]; agrees
/// with `sign A`.
pub fn kashiwara_transversal(a: &Mat, tol: &Tolerances) -> Result<i64> {
    if !sym_signature(a, tol)?.is_nondegenerate() {
        return Err(IndexError::SingularA);
    }
    let [l1, l2, l3] = transversal_frames(a, tol)?;
    kashiwara_index(&SymplecticSpace::standard(a.nrows()), &l1, &l2, &l3, tol)
}

/// Checks `K ⊆ L₁∩L₂ + L₂∩L₃ + L₃∩L₁` by a rank test.
pub fn is_admissible(
    l1: &LagrangianFrame,
    l2: &LagrangianFrame,
    l3: &LagrangianFrame,
    k: &Mat,
    tol: &Tolerances,
) -> bool {
    if k.ncols() == 0 {
        return true;
    }
    let sum = hstack(
        &hstack(
            &subspace_intersection(l1.frame(), l2.frame(), tol),
            &subspace_intersection(l2.frame(), l3.frame(), tol),
        ),
        &subspace_intersection(l3.frame(), l1.frame(), tol),
    );
    numerical_rank(&hstack(&sum, k), tol) == numerical_rank(&sum, tol)
}

/// Index of the triple after reduction by an admissible isotropic `K`.
pub fn kashiwara_reduced(
    space: &SymplecticSpace,
    l1: &LagrangianFrame,
    l2: &LagrangianFrame,
    l3: &LagrangianFrame,
    k: &Mat,
    tol: &Tolerances,
) -> Result<i64> {
    check_triple(space, &[l1, l2, l3])?;
    let r = Reduction::new(space, k, tol)?;
    if !is_admissible(l1, l2, l3, r.isotropic(), tol) {
        return Err(IndexError::KNotAdmissible);
    }
    let (a, b, c) = (r.reduce(l1, tol)?, r.reduce(l2, tol)?, r.reduce(l3, tol)?);
    kashiwara_index(r.reduced_space(), &a, &b, &c, tol)
}

/// `½[τ(L₀, L₁, L′₀) − τ(L₀, L₁, L′₁)]`.
pub fn hormander_index(
    l0: &LagrangianFrame,
    l1: &LagrangianFrame,
    l0p: &LagrangianFrame,
    l1p: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<HalfInt> {
    let space = l0.space();
    let a = kashiwara_index(space, l0, l1, l0p, tol)?;
    let b = kashiwara_index(space, l0, l1, l1p, tol)?;
    Ok(HalfInt::from_twice(a - b))
}

/// `μ(l, L₁) − μ(l, L₀)` along a path `l`.
pub fn hormander_via_path<P: LagrangianPath + ?Sized>(
    l0: &LagrangianFrame,
    l1: &LagrangianFrame,
    path: &P,
    opts: &MaslovOptions,
) -> Result<HalfInt> {
    Ok(maslov_index(path, l1, opts)? - maslov_index(path, l0, opts)?)
}

fn unitary_of(frame: &LagrangianFrame) -> CMat {
    let n = frame.space().half_dim();
    let f = frame.frame();
    CMat::from_fn(n, n, |i, j| Complex64::new(f[(i, j)], f[(n + i, j)]))
}

fn real_form(z: &CMat) -> Mat {
    let n = z.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let w = z[(i, j)];
            m[(i, j)] = w.re;
            m[(i, n + j)] = -w.im;
            m[(n + i, j)] = w.im;
            m[(n + i, n + j)] = w.re;
        }
    }
    m
}

/// A Hamiltonian generator `H` in `sp(2n) ∩ o(2n)` with `e^H L′₀ = L′₁`.
///
/// `twist` is a real orthogonal `n×n` matrix selecting which frame vector
/// of `L′₁` each vector of `L′₀` is carried to, and `winding[j]` adds
/// `2π·winding[j]` to the `j`-th eigen-angle of the connecting unitary.
pub fn connecting_generator(
    from: &LagrangianFrame,
    to: &LagrangianFrame,
    twist: &Mat,
    winding: &[i64],
) -> Result<HamiltonianMat> {
    let std = SymplecticSpace::standard(from.space().half_dim());
    if *from.space() != std || *to.space() != std {
        return Err(IndexError::SpaceMismatch);
    }
    let n = std.half_dim();
    if twist.shape() != (n, n) || winding.len() > n {
        return Err(IndexError::DimensionMismatch(format!(
            "twist must be {n}x{n} with at most {n} winding numbers"
        )));
    }
    let zf = unitary_of(from);
    let zg = unitary_of(to);
    let o = twist.map(|v| Complex64::new(v, 0.0));
    let w = &zg * o * zf.adjoint();
    let (q, t) = Schur::new(w).unpack();
    let mut log = CMat::zeros(n, n);
    for j in 0..n {
        let theta = t[(j, j)].arg()
            + 2.0 * std::f64::consts::PI * winding.get(j).copied().unwrap_or(0) as f64;
        log[(j, j)] = Complex64::new(0.0, theta);
    }
    let gen = &q * log * q.adjoint();
    let skew = (&gen - gen.adjoint()) * Complex64::new(0.5, 0.0);
    HamiltonianMat::new(real_form(&skew), &Tolerances::default())
}

/// Random triple in the standard space with `L₁ ∩ L₂` one-dimensional,
/// returned with a frame of that intersection.
pub fn random_triple_with_intersection(
    n: usize,
    seed: u64,
) -> (LagrangianFrame, LagrangianFrame, LagrangianFrame, Mat) {
    assert!(n >= 1);
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = random_symplectic_with(&mut rng, n);
    // ψ fixes the (x₁, y₁) plane and moves the rest.
    let inner = random_symplectic_with(&mut rng, n.max(2) - 1);
    let mut psi = Mat::identity(2 * n, 2 * n);
    if n > 1 {
        let m = n - 1;
        let im = inner.matrix();
        for i in 0..2 * m {
            for j in 0..2 * m {
                let oi = if i < m { 1 + i } else { n + 1 + (i - m) };
                let oj = if j < m { 1 + j } else { n + 1 + (j - m) };
                psi[(oi, oj)] = im[(i, j)];
            }
        }
    }
    let psi = SymplecticMat::new(psi, &tol).expect("block symplectic");
    let l0 = vertical_lagrangian(n);
    let l1 = phi.apply(&l0, &tol).expect("lagrangian");
    let l2 = phi
        .apply(&psi.apply(&l0, &tol).expect("lagrangian"), &tol)
        .expect("lagrangian");
    let l3 = random_lagrangian_with(&mut rng, n);
    let mut e = Mat::zeros(2 * n, 1);
    e[(n, 0)] = 1.0;
    let k = phi.matrix() * e;
    let k = &k / k.norm();
    (l1, l2, l3, k)
}

/// `e^{tH}` applied to `L` at `t = 1`, as a frame.
pub fn flow_frame(
    h: &HamiltonianMat,
    l: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<LagrangianFrame> {
    LagrangianFrame::new(l.space().clone(), matrix_exp(h.matrix())? * l.frame(), tol)
}
