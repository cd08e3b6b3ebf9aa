//! Symplectic reduction `V^K = K^♯ / K` by an isotropic subspace `K`,
//! realized on the orthogonal complement `S_K` of `K` inside `K^♯`.

use super::{LagrangianFrame, SymplecticSpace};
use crate::error::{IndexError, Result};
use crate::numerics::{kernel_basis, range_basis, subspace_intersection, vstack, Mat, Tolerances};

#[derive(Debug, Clone)]
pub struct Reduction {
    ambient: SymplecticSpace,
    isotropic: Mat,
    complement: Mat,
    reduced: SymplecticSpace,
}

impl Reduction {
    pub fn new(space: &SymplecticSpace, k: &Mat, tol: &Tolerances) -> Result<Self> {
        if k.nrows() != space.dim() {
            return Err(IndexError::DimensionMismatch(format!(
                "K has {} rows, space has dimension {}",
                k.nrows(),
                space.dim()
            )));
        }
        let kq = range_basis(k, tol);
        let defect = (kq.transpose() * space.form() * &kq).norm();
        if defect > tol.eps_sym * space.form().norm().max(1.0) {
            return Err(IndexError::NotIsotropic { defect });
        }
        // S_K = K^♯ ∩ K^⊥ = ker [Kᵀ Ω; Kᵀ]
        let constraints = vstack(&(kq.transpose() * space.form()), &kq.transpose());
        let complement = if kq.ncols() == 0 {
            Mat::identity(space.dim(), space.dim())
        } else {
            kernel_basis(&constraints, tol)
        };
        let reduced_form = complement.transpose() * space.form() * &complement;
        let reduced = SymplecticSpace::from_form(reduced_form, tol)?;
        Ok(Self {
            ambient: space.clone(),
            isotropic: kq,
            complement,
            reduced,
        })
    }

    pub fn ambient(&self) -> &SymplecticSpace {
        &self.ambient
    }

    pub fn reduced_space(&self) -> &SymplecticSpace {
        &self.reduced
    }

    /// Orthonormal basis of `K`.
    pub fn isotropic(&self) -> &Mat {
        &self.isotropic
    }

    /// Orthonormal basis of `S_K`; its columns are the reduced coordinates.
    pub fn complement(&self) -> &Mat {
        &self.complement
    }

    /// Maps reduced coordinates back into the ambient space.
    pub fn embed(&self, coords: &Mat) -> Mat {
        &self.complement * coords
    }

    /// `L^K`: the image of `L ∩ K^♯` under the projection along `K`.
    pub fn reduce(&self, l: &LagrangianFrame, tol: &Tolerances) -> Result<LagrangianFrame> {
        if *l.space() != self.ambient {
            return Err(IndexError::SpaceMismatch);
        }
        let ksharp = self.ambient.symplectic_orthogonal(&self.isotropic, tol);
        let meet = subspace_intersection(l.frame(), &ksharp, tol);
        let coords = self.complement.transpose() * meet;
        LagrangianFrame::new(self.reduced.clone(), coords, tol)
    }
}

/// Reduces a single Lagrangian by `K`, returning `(V^K, L^K)`.
pub fn symplectic_reduction(
    k: &Mat,
    l: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<(SymplecticSpace, LagrangianFrame)> {
    let r = Reduction::new(l.space(), k, tol)?;
    let lk = r.reduce(l, tol)?;
    Ok((r.reduced_space().clone(), lk))
}
