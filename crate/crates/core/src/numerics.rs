//! Dense matrix utilities shared by every index computation: tolerance
//! policy, inertia of symmetric and Hermitian forms, the matrix
//! exponential, kernels, column spans and subspace comparisons.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{IndexError, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Numerical thresholds. All values are relative and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Singular values below `eps_rank * sigma_max` count as zero.
    pub eps_rank: f64,
    /// Admissible symmetry (and isotropy) defect.
    pub eps_sym: f64,
    /// Eigenvalues of a form with `|lambda| <= eps_sign * ||S||` are degenerate.
    pub eps_sign: f64,
    /// Target relative accuracy of the matrix exponential.
    pub eps_exp: f64,
    /// Relative gap under which eigenvalues are grouped into one cluster.
    pub eps_cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_rank: 1e-9,
            eps_sym: 1e-8,
            eps_sign: 1e-8,
            eps_exp: 1e-12,
            eps_cluster: 1e-6,
        }
    }
}

impl Tolerances {
    /// Tolerances derived from a single base value: `eps_rank = base`,
    /// `eps_sym = eps_sign = 10 * base`. `scaled(1e-9)` is the default set.
    pub fn scaled(base: f64) -> Result<Self> {
        let tol = Self {
            eps_rank: base,
            eps_sym: 10.0 * base,
            eps_sign: 10.0 * base,
            ..Self::default()
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eps_rank", self.eps_rank),
            ("eps_sym", self.eps_sym),
            ("eps_sign", self.eps_sign),
            ("eps_exp", self.eps_exp),
            ("eps_cluster", self.eps_cluster),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(IndexError::InvalidTolerance(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// Sylvester inertia of a quadratic or Hermitian form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Inertia {
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_zero: usize,
}

impl Inertia {
    pub fn new(n_pos: usize, n_neg: usize, n_zero: usize) -> Self {
        Self {
            n_pos,
            n_neg,
            n_zero,
        }
    }

    pub fn signature(&self) -> i64 {
        self.n_pos as i64 - self.n_neg as i64
    }

    pub fn dim(&self) -> usize {
        self.n_pos + self.n_neg + self.n_zero
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.n_zero == 0
    }

    fn from_eigenvalues(values: impl Iterator<Item = f64> + Clone, eps_sign: f64) -> Self {
        let scale = values.clone().fold(0.0_f64, |m, v| m.max(v.abs()));
        let cut = eps_sign * scale;
        let mut inertia = Inertia::default();
        for v in values {
            if v.abs() <= cut {
                inertia.n_zero += 1;
            } else if v > 0.0 {
                inertia.n_pos += 1;
            } else {
                inertia.n_neg += 1;
            }
        }
        inertia
    }
}

impl std::ops::Add for Inertia {
    type Output = Inertia;
    fn add(self, rhs: Inertia) -> Inertia {
        Inertia::new(
            self.n_pos + rhs.n_pos,
            self.n_neg + rhs.n_neg,
            self.n_zero + rhs.n_zero,
        )
    }
}

pub fn ensure_finite(m: &Mat) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(IndexError::NonFinite)
    }
}

pub fn ensure_square(rows: usize, cols: usize) -> Result<()> {
    if rows == cols {
        Ok(())
    } else {
        Err(IndexError::NotSquare { rows, cols })
    }
}

/// Builds a matrix from row-major data, rejecting non-finite entries.
pub fn mat_from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Mat> {
    if data.len() != rows * cols {
        return Err(IndexError::DimensionMismatch(format!(
            "{} entries for a {rows}x{cols} matrix",
            data.len()
        )));
    }
    let m = Mat::from_row_slice(rows, cols, data);
    ensure_finite(&m)?;
    Ok(m)
}

/// Inertia of the symmetric part of `s`.
pub fn sym_signature(s: &Mat, tol: &Tolerances) -> Result<Inertia> {
    ensure_square(s.nrows(), s.ncols())?;
    ensure_finite(s)?;
    if s.nrows() == 0 {
        return Ok(Inertia::default());
    }
    let defect = (s - s.transpose()).norm();
    if defect > tol.eps_sym * (1.0 + s.norm()) {
        return Err(IndexError::AsymmetricInput { defect });
    }
    let sym = (s + s.transpose()) * 0.5;
    let eig = f64::hermitian_eigenvalues(&sym);
    Ok(Inertia::from_eigenvalues(eig.iter().copied(), tol.eps_sign))
}

/// Inertia of the Hermitian part of `s`.
pub fn herm_signature(s: &CMat, tol: &Tolerances) -> Result<Inertia> {
    ensure_square(s.nrows(), s.ncols())?;
    if s.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(IndexError::NonFinite);
    }
    if s.nrows() == 0 {
        return Ok(Inertia::default());
    }
    let adj = s.adjoint();
    let defect = (s - &adj).norm();
    if defect > tol.eps_sym * (1.0 + s.norm()) {
        return Err(IndexError::NonHermitianInput { defect });
    }
    let herm = (s + adj).map(|z| z * 0.5);
    let eig = Complex64::hermitian_eigenvalues(&herm);
    Ok(Inertia::from_eigenvalues(eig.iter().copied(), tol.eps_sign))
}

/// `exp(m)` by scaling and squaring with a Padé approximant.
pub fn matrix_exp(m: &Mat) -> Result<Mat> {
    ensure_square(m.nrows(), m.ncols())?;
    ensure_finite(m)?;
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    Ok(m.clone().exp())
}

/// Singular values and both singular bases, sorted by decreasing singular
/// value. The right basis is always complete (`cols x cols`).
#[doc(hidden)]
pub struct FullSvd<T> {
    /// Left singular vectors for the leading `min(rows, cols)` values.
    u: DMatrix<T>,
    /// Singular values in decreasing order, padded with zeros to `cols`.
    values: Vec<f64>,
    /// Complete right singular basis.
    v: DMatrix<T>,
}

/// Element types with dense SVD and Hermitian eigensolvers.
pub trait Scalar: nalgebra::ComplexField<RealField = f64> + Copy {
    #[doc(hidden)]
    fn full_svd(m: &DMatrix<Self>) -> FullSvd<Self>;
    /// Eigenvalues of a Hermitian matrix, increasing.
    fn hermitian_eigenvalues(m: &DMatrix<Self>) -> Vec<f64>;
}

fn to_faer<T>(m: &DMatrix<T>) -> faer::Mat<T>
where
    T: faer::traits::ComplexField + Copy,
{
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

macro_rules! impl_scalar {
    ($t:ty, $re:expr) => {
        impl Scalar for $t {
            fn full_svd(m: &DMatrix<$t>) -> FullSvd<$t> {
                let (r, c) = m.shape();
                let svd = to_faer(m).svd().expect("svd converges");
                let k = r.min(c);
                let (su, sv, ss) = (svd.U(), svd.V(), svd.S());
                let mut values: Vec<f64> = (0..k).map(|i| $re(ss[i])).collect();
                values.resize(c, 0.0);
                FullSvd {
                    u: DMatrix::from_fn(r, k, |i, j| su[(i, j)]),
                    values,
                    v: DMatrix::from_fn(c, c, |i, j| sv[(i, j)]),
                }
            }

            fn hermitian_eigenvalues(m: &DMatrix<$t>) -> Vec<f64> {
                to_faer(m)
                    .self_adjoint_eigenvalues(faer::Side::Lower)
                    .expect("eigensolver converges")
            }
        }
    };
}

impl_scalar!(f64, |x: f64| x);
impl_scalar!(Complex64, |x: Complex64| x.re);

fn full_svd<T: Scalar>(m: &DMatrix<T>) -> FullSvd<T> {
    T::full_svd(m)
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &Mat) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    to_faer(m).eigenvalues().expect("eigensolver converges")
}

/// Eigenvalues of the symmetric part of `m`, increasing.
pub fn symmetric_eigenvalues(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    f64::hermitian_eigenvalues(&((m + m.transpose()) * 0.5))
}

fn rank_from_values(values: &[f64], rel: f64) -> usize {
    let smax = values.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    values.iter().filter(|&&s| s >= rel * smax).count()
}

/// Orthonormal basis of the kernel of `m`, using the relative singular
/// value cut `rel`.
pub fn kernel_basis_rel<T: Scalar>(m: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    let c = m.ncols();
    if m.nrows() == 0 || c == 0 {
        return DMatrix::<T>::identity(c, c);
    }
    let svd = full_svd(m);
    let rank = rank_from_values(&svd.values, rel).min(c);
    svd.v.columns(rank, c - rank).into_owned()
}

/// Orthonormal basis of `ker m` (singular values below `eps_rank * sigma_max`).
pub fn kernel_basis(m: &Mat, tol: &Tolerances) -> Mat {
    kernel_basis_rel(m, tol.eps_rank)
}

/// Orthonormal basis of the column span of `m` at relative cut `rel`.
pub fn range_basis_rel<T: Scalar>(m: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::<T>::zeros(m.nrows(), 0);
    }
    let svd = full_svd(m);
    let rank = rank_from_values(&svd.values, rel).min(svd.u.ncols());
    svd.u.columns(0, rank).into_owned()
}

pub fn range_basis(m: &Mat, tol: &Tolerances) -> Mat {
    range_basis_rel(m, tol.eps_rank)
}

pub fn numerical_rank(m: &Mat, tol: &Tolerances) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    rank_from_values(&singular_values_desc(m), tol.eps_rank)
}

/// Singular values in decreasing order.
pub fn singular_values_desc(m: &Mat) -> Vec<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Vec::new();
    }
    let mut s = to_faer(m).singular_values().expect("svd converges");
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn smallest_singular_value(m: &Mat) -> f64 {
    let s = singular_values_desc(m);
    if m.nrows() < m.ncols() {
        // A wide matrix always has a kernel.
        return 0.0;
    }
    s.last().copied().unwrap_or(0.0)
}

/// The `k` right singular vectors of `m` with the smallest singular values,
/// together with all singular values in decreasing order.
pub fn trailing_right_singular<T: Scalar>(m: &DMatrix<T>, k: usize) -> (DMatrix<T>, Vec<f64>) {
    let c = m.ncols();
    let k = k.min(c);
    if m.nrows() == 0 || c == 0 {
        return (
            DMatrix::<T>::identity(c, c).columns(0, k).into_owned(),
            Vec::new(),
        );
    }
    let svd = full_svd(m);
    (svd.v.columns(c - k, k).into_owned(), svd.values)
}

/// Orthonormal basis of the intersection of the column spans of `a` and `b`.
pub fn subspace_intersection(a: &Mat, b: &Mat, tol: &Tolerances) -> Mat {
    let qa = range_basis(a, tol);
    let qb = range_basis(b, tol);
    let dim = qa.nrows();
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return Mat::zeros(dim, 0);
    }
    let mut joint = Mat::zeros(dim, qa.ncols() + qb.ncols());
    joint.columns_mut(0, qa.ncols()).copy_from(&qa);
    joint.columns_mut(qa.ncols(), qb.ncols()).copy_from(&(-&qb));
    let ker = kernel_basis(&joint, tol);
    if ker.ncols() == 0 {
        return Mat::zeros(dim, 0);
    }
    let vectors = &qa * ker.rows(0, qa.ncols());
    range_basis(&vectors, tol)
}

/// Sine of the largest principal angle between two subspaces of equal
/// dimension (1.0 when the dimensions differ).
pub fn max_principal_angle_sin(a: &Mat, b: &Mat, tol: &Tolerances) -> f64 {
    let qa = range_basis(a, tol);
    let qb = range_basis(b, tol);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    // Residual of projecting qa onto span(qb).
    let resid = &qa - &qb * (qb.transpose() * &qa);
    singular_values_desc(&resid).first().copied().unwrap_or(0.0)
}

/// Span equality test: largest principal angle below `1e-8`.
pub fn same_span(a: &Mat, b: &Mat, tol: &Tolerances) -> bool {
    max_principal_angle_sin(a, b, tol) < 1e-8
}

/// The matrix `[a | b]`.
pub fn hstack(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// The matrix `[a; b]`.
pub fn vstack(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn rand_mat(n: usize, vals: &[f64]) -> Mat {
        Mat::from_fn(n, n, |i, j| {
            vals[(i * n + j) % vals.len()] + if i == j { 0.1 } else { 0.0 }
        })
    }

    #[test]
    fn signature_of_diagonal_and_zero() {
        let d = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, -3.0, 0.0]));
        assert_eq!(sym_signature(&d, &tol()).unwrap(), Inertia::new(1, 1, 1));
        assert_eq!(
            sym_signature(&Mat::zeros(2, 2), &tol()).unwrap(),
            Inertia::new(0, 0, 2)
        );
    }

    #[test]
    fn signature_rejects_asymmetric() {
        let m = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            sym_signature(&m, &tol()),
            Err(IndexError::AsymmetricInput { .. })
        ));
    }

    #[test]
    fn worked_y_matrix_signature_follows_x() {
        // Oracle: eigenvalues of [[0,-1,x],[-1,0,1],[x,1,0]] are the roots of
        // l^3 - (2 + x^2) l + 2x = (l - x)(l^2 + x l - 2); the quadratic factor
        // always has one root of each sign.
        for &x in &[-3.0, -0.7, -0.01, 0.02, 0.5, 4.0] {
            let y = Mat::from_row_slice(3, 3, &[0.0, -1.0, x, -1.0, 0.0, 1.0, x, 1.0, 0.0]);
            let roots = [
                x,
                (-x + (x * x + 8.0_f64).sqrt()) / 2.0,
                (-x - (x * x + 8.0_f64).sqrt()) / 2.0,
            ];
            let brute: i64 = roots.iter().map(|r| r.signum() as i64).sum();
            let got = sym_signature(&y, &tol()).unwrap();
            assert_eq!(got.signature(), brute);
            assert_eq!(got.signature(), x.signum() as i64);
        }
    }

    #[test]
    fn hermitian_signatures() {
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        let g = CMat::from_row_slice(2, 2, &[z, i, -i, z]);
        assert_eq!(herm_signature(&g, &tol()).unwrap(), Inertia::new(1, 1, 0));
        assert_eq!(
            herm_signature(&CMat::identity(2, 2), &tol()).unwrap(),
            Inertia::new(2, 0, 0)
        );
        let d = to_complex(&Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0, -1.0, 0.0,
        ])));
        assert_eq!(herm_signature(&d, &tol()).unwrap(), Inertia::new(1, 1, 1));
        let bad = CMat::from_row_slice(2, 2, &[z, i, i, z]);
        assert!(matches!(
            herm_signature(&bad, &tol()),
            Err(IndexError::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn exponential_closed_forms() {
        for &alpha in &[0.3, 2.0, PI, 7.5] {
            let j = Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
            let e = matrix_exp(&(j * alpha)).unwrap();
            let expect =
                Mat::from_row_slice(2, 2, &[alpha.cos(), -alpha.sin(), alpha.sin(), alpha.cos()]);
            assert!((e - expect).norm() < 1e-12);
        }
        assert_eq!(matrix_exp(&Mat::zeros(3, 3)).unwrap(), Mat::identity(3, 3));
        let beta = 1.7;
        let e = matrix_exp(&Mat::from_row_slice(2, 2, &[beta, 0.0, 0.0, -beta])).unwrap();
        assert!((e[(0, 0)] - beta.exp()).abs() < 1e-12 * beta.exp());
        assert!((e[(1, 1)] - (-beta).exp()).abs() < 1e-12);
        assert!(matrix_exp(&Mat::zeros(2, 3)).is_err());
    }

    #[test]
    fn kernels() {
        let j = Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert_eq!(kernel_basis(&j, &tol()).ncols(), 0);
        let z = kernel_basis(&Mat::zeros(3, 3), &tol());
        assert_eq!(z.ncols(), 3);
        assert!((z.transpose() * &z - Mat::identity(3, 3)).norm() < 1e-12);
        let p = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let k = kernel_basis(&p, &tol());
        assert_eq!(k.ncols(), 1);
        assert!((k[(1, 0)].abs() - 1.0).abs() < 1e-12);
        // wide matrices have a kernel
        assert_eq!(
            kernel_basis(&Mat::from_row_slice(1, 2, &[1.0, 1.0]), &tol()).ncols(),
            1
        );
    }

    #[test]
    fn smallest_singular_values() {
        assert!((smallest_singular_value(&Mat::identity(3, 3)) - 1.0).abs() < 1e-14);
        assert_eq!(smallest_singular_value(&Mat::zeros(2, 2)), 0.0);
        let d = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 0.5]));
        assert!((smallest_singular_value(&d) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn intersections_and_spans() {
        let a = Mat::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let b = Mat::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let i = subspace_intersection(&a, &b, &tol());
        assert_eq!(i.ncols(), 1);
        assert!((i[(1, 0)].abs() - 1.0).abs() < 1e-12);
        let a2 = &a * Mat::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 3.0]);
        assert!(same_span(&a, &a2, &tol()));
        assert!(!same_span(&a, &b, &tol()));
    }

    #[test]
    fn tolerances_validate() {
        assert!(Tolerances::default().validate().is_ok());
        assert_eq!(Tolerances::scaled(1e-9).unwrap(), Tolerances::default());
        assert!(Tolerances::scaled(0.0).is_err());
        assert!(Tolerances::scaled(f64::NAN).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(mat_from_row_major(1, 2, &[1.0, f64::NAN]).is_err());
        assert!(mat_from_row_major(1, 2, &[1.0]).is_err());
        assert!(sym_signature(&Mat::from_element(1, 1, f64::INFINITY), &tol()).is_err());
    }

    proptest! {
        #[test]
        fn sylvester_congruence(vals in prop::collection::vec(-2.0..2.0f64, 16),
                                pvals in prop::collection::vec(-2.0..2.0f64, 16)) {
            let n = 4;
            let a = rand_mat(n, &vals);
            let s = &a + a.transpose();
            let inertia = sym_signature(&s, &tol()).unwrap();
            prop_assert_eq!(inertia.dim(), n);
            let p = rand_mat(n, &pvals) + Mat::identity(n, n) * 3.0;
            prop_assume!(smallest_singular_value(&p) > 1e-2);
            prop_assume!(inertia.n_zero == 0);
            let eig = symmetric_eigenvalues(&s);
            let gap = eig.iter().fold(f64::MAX, |m, v| m.min(v.abs()));
            prop_assume!(gap > 1e-6 * s.norm());
            let c = p.transpose() * &s * &p;
            prop_assert_eq!(sym_signature(&c, &tol()).unwrap().signature(), inertia.signature());
        }

        #[test]
        fn exp_inverse(vals in prop::collection::vec(-1.5..1.5f64, 9)) {
            let m = Mat::from_row_slice(3, 3, &vals);
            let prod = matrix_exp(&m).unwrap() * matrix_exp(&(-&m)).unwrap();
            prop_assert!((prod - Mat::identity(3, 3)).norm() < 1e-8);
        }

        #[test]
        fn kernel_is_orthonormal(vals in prop::collection::vec(-3.0..3.0f64, 8)) {
            // rank <= 2 by construction: 4x2 times 2x4
            let a = Mat::from_row_slice(4, 2, &vals);
            let m = &a * a.transpose();
            let t = tol();
            let k = kernel_basis(&m, &t);
            prop_assert!(k.ncols() >= 2);
            prop_assert!((k.transpose() * &k - Mat::identity(k.ncols(), k.ncols())).norm() < 1e-10);
            let smax = singular_values_desc(&m)[0];
            prop_assert!((&m * &k).norm() <= 10.0 * t.eps_rank * smax + 1e-300);
        }
    }
}
