//! Krein signatures of unit-circle eigenvalues and classification of
//! semisimple symplectic matrices into rotation, hyperbolic and
//! loxodromic blocks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{IndexError, Result};
use crate::numerics::{
    eigenvalues, ensure_finite, ensure_square, herm_signature, kernel_basis_rel, to_complex,
    trailing_right_singular, CMat, Inertia, Mat, Tolerances,
};
use crate::symplectic::{standard_j, HamiltonianMat, SymplecticMat};

/// A cluster of numerically equal eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCluster {
    pub value: Complex64,
    pub multiplicity: usize,
    /// Largest distance of a member from the cluster mean.
    pub spread: f64,
}

/// One row of a Krein spectrum table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KreinEigenvalue {
    pub re: f64,
    pub im: f64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    pub on_unit_circle: bool,
    /// Inertia `(p, q)` of the Krein form on the generalized eigenspace.
    pub krein: Option<Inertia>,
}

impl KreinEigenvalue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormalFormBlock {
    /// Rotation by `alpha ∈ (-π, π]`.
    Rotation { alpha: f64 },
    /// `diag(mu, 1/mu)` with `|mu| > 1`.
    Hyperbolic { mu: f64 },
    /// `diag(λ R_α, λ⁻¹ R_α)` with `λ > 1`, `α ∈ (0, π)`.
    Loxodromic { lambda: f64, alpha: f64 },
}

impl std::fmt::Display for NormalFormBlock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormalFormBlock::Rotation { alpha } => write!(f, "rotation({alpha:.6})"),
            NormalFormBlock::Hyperbolic { mu } => write!(f, "hyperbolic({mu:.6})"),
            NormalFormBlock::Loxodromic { lambda, alpha } => {
                write!(f, "loxodromic({lambda:.6}, {alpha:.6})")
            }
        }
    }
}

fn close(a: Complex64, b: Complex64, tol: &Tolerances) -> bool {
    (a - b).norm() <= tol.eps_cluster * a.norm().max(b.norm()).max(1.0)
}

/// Eigenvalues of `m` grouped by single linkage at relative gap
/// `eps_cluster`, sorted by argument then modulus.
pub fn eigenvalue_clusters(m: &Mat, tol: &Tolerances) -> Vec<EigenCluster> {
    let eig = eigenvalues(m);
    let k = eig.len();
    let mut label: Vec<usize> = (0..k).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..k {
        for j in i + 1..k {
            if close(eig[i], eig[j], tol) {
                let (a, b) = (root(&mut label, i), root(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut slot = vec![usize::MAX; k];
    for (i, &z) in eig.iter().enumerate() {
        let r = root(&mut label, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(z);
    }
    let mut clusters: Vec<EigenCluster> = groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().sum::<Complex64>() / g.len() as f64;
            let spread = g.iter().map(|z| (z - mean).norm()).fold(0.0, f64::max);
            EigenCluster {
                value: mean,
                multiplicity: g.len(),
                spread,
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        (a.value.arg(), a.value.norm())
            .partial_cmp(&(b.value.arg(), b.value.norm()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    clusters
}

fn shifted(m: &Mat, lambda: Complex64) -> CMat {
    let mut c = to_complex(m);
    for i in 0..c.nrows() {
        c[(i, i)] -= lambda;
    }
    c
}

fn geometric_multiplicity(m: &Mat, cluster: &EigenCluster, tol: &Tolerances) -> usize {
    let shifted = shifted(m, cluster.value);
    let smax = m.norm().max(1.0);
    let rel = tol.eps_rank.max(1e3 * cluster.spread / smax);
    kernel_basis_rel(&shifted, rel).ncols()
}

/// True when every eigenvalue cluster has a full set of eigenvectors.
pub fn is_semisimple(m: &Mat, tol: &Tolerances) -> bool {
    eigenvalue_clusters(m, tol)
        .iter()
        .all(|c| geometric_multiplicity(m, c, tol) >= c.multiplicity)
}

/// Orthonormal basis of the generalized eigenspace of a cluster.
fn generalized_eigenspace(m: &Mat, cluster: &EigenCluster, semisimple: bool) -> CMat {
    let mut op = shifted(m, cluster.value);
    if !semisimple {
        let base = op.clone();
        for _ in 1..cluster.multiplicity {
            op = &op * &base;
        }
    }
    trailing_right_singular(&op, cluster.multiplicity).0
}

fn krein_form(basis: &CMat, n: usize) -> CMat {
    let g = to_complex(&standard_j(n)) * Complex64::new(0.0, -1.0);
    basis.adjoint() * g * basis
}

fn check_square_even(m: &Mat) -> Result<usize> {
    ensure_square(m.nrows(), m.ncols())?;
    ensure_finite(m)?;
    if !m.nrows().is_multiple_of(2) {
        return Err(IndexError::OddDimension(m.nrows()));
    }
    Ok(m.nrows() / 2)
}

fn find_cluster(m: &Mat, lambda: Complex64, tol: &Tolerances) -> Result<EigenCluster> {
    eigenvalue_clusters(m, tol)
        .into_iter()
        .filter(|c| (c.value - lambda).norm() <= tol.eps_cluster.sqrt().max(10.0 * c.spread))
        .min_by(|a, b| {
            (a.value - lambda)
                .norm()
                .partial_cmp(&(b.value - lambda).norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or(IndexError::NotAnEigenvalue {
            re: lambda.re,
            im: lambda.im,
        })
}

/// Inertia of `v ↦ v*(-iJ)v` on the generalized eigenspace of `lambda`.
pub fn krein_signature(m: &SymplecticMat, lambda: Complex64, tol: &Tolerances) -> Result<Inertia> {
    let mat = m.matrix();
    let n = check_square_even(mat)?;
    if (lambda.norm() - 1.0).abs() >= tol.eps_cluster {
        return Err(IndexError::NotOnUnitCircle {
            re: lambda.re,
            im: lambda.im,
        });
    }
    let cluster = find_cluster(mat, lambda, tol)?;
    let semisimple = geometric_multiplicity(mat, &cluster, tol) >= cluster.multiplicity;
    let basis = generalized_eigenspace(mat, &cluster, semisimple);
    let inertia = herm_signature(&krein_form(&basis, n), tol)?;
    if semisimple && inertia.n_zero > 0 {
        return Err(IndexError::DegenerateForm {
            re: lambda.re,
            im: lambda.im,
        });
    }
    Ok(inertia)
}

/// Eigenvalue table of a symplectic matrix with Krein inertia on the unit
/// circle.
pub fn krein_spectrum(m: &SymplecticMat, tol: &Tolerances) -> Result<Vec<KreinEigenvalue>> {
    let mat = m.matrix();
    let n = check_square_even(mat)?;
    let mut rows = Vec::new();
    for c in eigenvalue_clusters(mat, tol) {
        let geometric = geometric_multiplicity(mat, &c, tol);
        let on_circle = (c.value.norm() - 1.0).abs() < tol.eps_cluster;
        let krein = if on_circle {
            let basis = generalized_eigenspace(mat, &c, geometric >= c.multiplicity);
            Some(herm_signature(&krein_form(&basis, n), tol)?)
        } else {
            None
        };
        rows.push(KreinEigenvalue {
            re: c.value.re,
            im: c.value.im,
            algebraic_multiplicity: c.multiplicity,
            geometric_multiplicity: geometric.min(c.multiplicity),
            on_unit_circle: on_circle,
            krein,
        });
    }
    Ok(rows)
}

/// Imaginary parts `α` of the eigenvalues `iα` of `H`, each repeated by
/// its Krein-positive count. Angles are not reduced modulo `2π`.
pub fn krein_positive_angles(h: &HamiltonianMat, tol: &Tolerances) -> Result<Vec<f64>> {
    let mat = h.matrix();
    let n = check_square_even(mat)?;
    if !is_semisimple(mat, tol) {
        return Err(IndexError::NotSemisimple);
    }
    let scale = mat.norm().max(1.0);
    let mut angles = Vec::new();
    for c in eigenvalue_clusters(mat, tol) {
        if c.value.re.abs() > tol.eps_cluster * scale {
            continue;
        }
        let basis = generalized_eigenspace(mat, &c, true);
        let inertia = herm_signature(&krein_form(&basis, n), tol)?;
        if inertia.n_zero > 0 {
            return Err(IndexError::DegenerateForm {
                re: c.value.re,
                im: c.value.im,
            });
        }
        let alpha = if c.value.im.abs() <= tol.eps_cluster * scale {
            0.0
        } else {
            c.value.im
        };
        angles.extend(std::iter::repeat_n(alpha, inertia.n_pos));
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(angles)
}

/// Block decomposition of a semisimple symplectic matrix by spectral type.
pub fn classify_normal_form(m: &SymplecticMat, tol: &Tolerances) -> Result<Vec<NormalFormBlock>> {
    let mat = m.matrix();
    let n = check_square_even(mat)?;
    if !is_semisimple(mat, tol) {
        return Err(IndexError::NotSemisimple);
    }
    let clusters = eigenvalue_clusters(mat, tol);
    let partner_mult = |z: Complex64| -> usize {
        clusters
            .iter()
            .filter(|c| close(c.value, z, tol))
            .map(|c| c.multiplicity)
            .sum()
    };
    let unclassifiable = |c: &EigenCluster, why: &str| {
        IndexError::UnclassifiableSpectrum(format!(
            "eigenvalue {:.6}{:+.6}i (multiplicity {}): {why}",
            c.value.re, c.value.im, c.multiplicity
        ))
    };
    let mut blocks = Vec::new();
    for c in &clusters {
        let z = c.value;
        let modulus = z.norm();
        let real = z.im.abs() <= tol.eps_cluster * modulus.max(1.0);
        if (modulus - 1.0).abs() < tol.eps_cluster {
            if real {
                if c.multiplicity % 2 != 0 {
                    return Err(unclassifiable(c, "odd multiplicity at ±1"));
                }
                let alpha = if z.re > 0.0 { 0.0 } else { PI };
                blocks.extend(std::iter::repeat_n(
                    NormalFormBlock::Rotation { alpha },
                    c.multiplicity / 2,
                ));
            } else if z.im > 0.0 {
                if partner_mult(z.conj()) != c.multiplicity {
                    return Err(unclassifiable(c, "conjugate multiplicity differs"));
                }
                let basis = generalized_eigenspace(mat, c, true);
                let inertia = herm_signature(&krein_form(&basis, n), tol)?;
                if inertia.n_zero > 0 {
                    return Err(IndexError::DegenerateForm { re: z.re, im: z.im });
                }
                let theta = z.arg();
                blocks.extend(std::iter::repeat_n(
                    NormalFormBlock::Rotation { alpha: theta },
                    inertia.n_pos,
                ));
                blocks.extend(std::iter::repeat_n(
                    NormalFormBlock::Rotation { alpha: -theta },
                    inertia.n_neg,
                ));
            }
        } else if modulus > 1.0 {
            if partner_mult(z.inv()) != c.multiplicity {
                return Err(unclassifiable(c, "reciprocal multiplicity differs"));
            }
            if real {
                blocks.extend(std::iter::repeat_n(
                    NormalFormBlock::Hyperbolic { mu: z.re },
                    c.multiplicity,
                ));
            } else if z.im > 0.0 {
                if partner_mult(z.conj()) != c.multiplicity {
                    return Err(unclassifiable(c, "conjugate multiplicity differs"));
                }
                blocks.extend(std::iter::repeat_n(
                    NormalFormBlock::Loxodromic {
                        lambda: modulus,
                        alpha: z.arg(),
                    },
                    c.multiplicity,
                ));
            }
        }
    }
    let covered: usize = blocks
        .iter()
        .map(|b| match b {
            NormalFormBlock::Loxodromic { .. } => 4,
            _ => 2,
        })
        .sum();
    if covered != 2 * n {
        return Err(IndexError::UnclassifiableSpectrum(format!(
            "blocks cover dimension {covered} of {}",
            2 * n
        )));
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::block_diag;
    use crate::symplectic::{
        normal_form_generator, random_hamiltonian, random_symplectic, GeneratorBlock,
        SpectrumProfile,
    };
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn rotation(alpha: f64) -> SymplecticMat {
        HamiltonianMat::rotation(1, alpha)
            .flow(1.0, &tol())
            .unwrap()
    }

    fn cis(a: f64) -> Complex64 {
        Complex64::from_polar(1.0, a)
    }

    #[test]
    fn rotation_krein_pair() {
        let t = tol();
        for alpha in [0.3, 1.0, 2.0, 3.0] {
            let m = rotation(alpha);
            assert_eq!(
                krein_signature(&m, cis(alpha), &t).unwrap(),
                Inertia::new(1, 0, 0)
            );
            assert_eq!(
                krein_signature(&m, cis(-alpha), &t).unwrap(),
                Inertia::new(0, 1, 0)
            );
        }
    }

    #[test]
    fn krein_block_additivity() {
        let t = tol();
        let h =
            normal_form_generator(&[GeneratorBlock::Rotation(1.2), GeneratorBlock::Rotation(1.2)]);
        let m = h.flow(1.0, &t).unwrap();
        assert_eq!(
            krein_signature(&m, cis(1.2), &t).unwrap(),
            Inertia::new(2, 0, 0)
        );
    }

    #[test]
    fn krein_signature_errors() {
        let t = tol();
        let m = rotation(1.0);
        assert!(matches!(
            krein_signature(&m, Complex64::new(2.0, 0.0), &t),
            Err(IndexError::NotOnUnitCircle { .. })
        ));
        assert!(matches!(
            krein_signature(&m, cis(2.5), &t),
            Err(IndexError::NotAnEigenvalue { .. })
        ));
    }

    #[test]
    fn positive_angles_of_rotations() {
        let t = tol();
        assert_eq!(
            krein_positive_angles(&HamiltonianMat::rotation(1, 2.0), &t)
                .unwrap()
                .len(),
            1
        );
        for alpha in [2.0, -2.0, 7.5, -0.4] {
            let got = krein_positive_angles(&HamiltonianMat::rotation(1, alpha), &t).unwrap();
            assert_eq!(got.len(), 1);
            assert!((got[0] - alpha).abs() < 1e-10, "{alpha}: {got:?}");
        }
        let h =
            normal_form_generator(&[GeneratorBlock::Rotation(0.7), GeneratorBlock::Rotation(4.0)]);
        let got = krein_positive_angles(&h, &t).unwrap();
        assert!((got[0] - 0.7).abs() < 1e-10 && (got[1] - 4.0).abs() < 1e-10);
    }

    #[test]
    fn hyperbolic_has_no_angles() {
        let h = normal_form_generator(&[GeneratorBlock::Hyperbolic(0.8)]);
        assert!(krein_positive_angles(&h, &tol()).unwrap().is_empty());
    }

    #[test]
    fn semisimplicity() {
        let t = tol();
        assert!(is_semisimple(rotation(1.0).matrix(), &t));
        assert!(is_semisimple(&Mat::identity(4, 4), &t));
        let jordan = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(!is_semisimple(&jordan, &t));
        let h = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            krein_positive_angles(&HamiltonianMat::new(h, &t).unwrap(), &t),
            Err(IndexError::NotSemisimple)
        ));
    }

    #[test]
    fn classify_single_blocks() {
        let t = tol();
        let blocks = classify_normal_form(&rotation(1.3), &t).unwrap();
        assert_eq!(blocks.len(), 1);
        assert!(
            matches!(blocks[0], NormalFormBlock::Rotation { alpha } if (alpha - 1.3).abs() < 1e-10)
        );
        let blocks = classify_normal_form(&rotation(-2.0), &t).unwrap();
        assert!(
            matches!(blocks[0], NormalFormBlock::Rotation { alpha } if (alpha + 2.0).abs() < 1e-10)
        );

        let hyp = SymplecticMat::new(
            Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0 / 3.0])),
            &t,
        )
        .unwrap();
        let blocks = classify_normal_form(&hyp, &t).unwrap();
        assert!(
            matches!(blocks[..], [NormalFormBlock::Hyperbolic { mu }] if (mu - 3.0).abs() < 1e-10)
        );

        let (lam, a) = (2.0_f64, 1.0_f64);
        let r = Mat::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()]);
        let a3 = block_diag(&(&r * lam), &(&r / lam));
        let blocks = classify_normal_form(&SymplecticMat::new(a3, &t).unwrap(), &t).unwrap();
        assert_eq!(blocks.len(), 1);
        assert!(
            matches!(blocks[0], NormalFormBlock::Loxodromic { lambda, alpha }
            if (lambda - 2.0).abs() < 1e-10 && (alpha - 1.0).abs() < 1e-10)
        );
    }

    #[test]
    fn classify_identity_and_minus_identity() {
        let t = tol();
        let blocks = classify_normal_form(&SymplecticMat::identity(2), &t).unwrap();
        assert_eq!(blocks, vec![NormalFormBlock::Rotation { alpha: 0.0 }; 2]);
        let m = SymplecticMat::new(-Mat::identity(2, 2), &t).unwrap();
        assert_eq!(
            classify_normal_form(&m, &t).unwrap(),
            vec![NormalFormBlock::Rotation { alpha: PI }]
        );
    }

    #[test]
    fn classify_rejects_shear() {
        let t = tol();
        let shear =
            SymplecticMat::new(Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]), &t).unwrap();
        assert!(matches!(
            classify_normal_form(&shear, &t),
            Err(IndexError::NotSemisimple)
        ));
    }

    #[test]
    fn classify_conjugated_mixed() {
        let t = tol();
        let h0 = normal_form_generator(&[
            GeneratorBlock::Rotation(1.1),
            GeneratorBlock::Hyperbolic(0.5),
            GeneratorBlock::Loxodromic {
                growth: 0.4,
                angle: 0.9,
            },
        ]);
        let s = random_symplectic(4, 9);
        let m = h0.conjugate_by(&s).flow(1.0, &t).unwrap();
        let blocks = classify_normal_form(&m, &t).unwrap();
        assert_eq!(blocks.len(), 3);
        assert!(blocks.iter().any(
            |b| matches!(b, NormalFormBlock::Rotation { alpha } if (alpha - 1.1).abs() < 1e-7)
        ));
        assert!(blocks.iter().any(
            |b| matches!(b, NormalFormBlock::Hyperbolic { mu } if (mu - 0.5_f64.exp()).abs() < 1e-7)
        ));
        assert!(blocks.iter().any(
            |b| matches!(b, NormalFormBlock::Loxodromic { lambda, alpha }
            if (lambda - 0.4_f64.exp()).abs() < 1e-7 && (alpha - 0.9).abs() < 1e-7)
        ));
    }

    #[test]
    fn spectrum_sum_rule_and_pairing() {
        let t = tol();
        for seed in 0..50 {
            let n = 1 + (seed as usize % 4);
            let h = random_hamiltonian(n, seed, SpectrumProfile::Elliptic);
            let m = h.flow(1.0, &t).unwrap();
            let rows = krein_spectrum(&m, &t).unwrap();
            let total: usize = rows.iter().map(|r| r.algebraic_multiplicity).sum();
            assert_eq!(total, 2 * n);
            for r in rows.iter().filter(|r| r.on_unit_circle) {
                let k = r.krein.unwrap();
                let partner = krein_signature(&m, r.value().conj(), &t).unwrap();
                assert_eq!(
                    (k.n_pos, k.n_neg),
                    (partner.n_neg, partner.n_pos),
                    "seed {seed}"
                );
                assert_eq!(k.n_pos + k.n_neg, r.algebraic_multiplicity);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn angles_invariant_under_conjugation(seed in 0u64..10_000, n in 1usize..4) {
            let t = tol();
            let h = random_hamiltonian(n, seed, SpectrumProfile::Elliptic);
            let s = random_symplectic(n, seed ^ 0x5a5a);
            let a = krein_positive_angles(&h, &t).unwrap();
            let b = krein_positive_angles(&h.conjugate_by(&s), &t).unwrap();
            prop_assert_eq!(a.len(), n);
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-8, "{:?} vs {:?}", a, b);
            }
        }
    }
}
