//! Maslov index of Lagrangian paths with half-weighted endpoints, the
//! Conley-Zehnder index of a linear flow, and closed forms for rotation
//! generators.

mod crossing;
mod halfint;
mod path;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use crossing::{
    crossing_form, crossing_form_on_basis, crossing_form_vertical, find_crossings,
    intersection_dim, Crossing, CrossingScan,
};
pub use halfint::{HalfInt, ParseHalfIntError};
pub use path::{fd_step, frame_derivative, FnPath, GraphPath, LagrangianPath, OrbitPath, Reversed};

use crate::error::{IndexError, Result};
use crate::krein::krein_positive_angles;
use crate::numerics::Tolerances;
use crate::symplectic::{diagonal, HamiltonianMat, LagrangianFrame};

/// Distance to the nearest integer below which a real is treated as that
/// integer.
pub const INTEGER_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaslovOptions {
    pub grid_n: usize,
    pub tol: Tolerances,
    /// How many times the grid is doubled when two crossings share a cell.
    pub max_doublings: u32,
}

impl Default for MaslovOptions {
    fn default() -> Self {
        Self {
            grid_n: 256,
            tol: Tolerances::default(),
            max_doublings: 3,
        }
    }
}

impl MaslovOptions {
    pub fn with_grid(mut self, grid_n: usize) -> Self {
        self.grid_n = grid_n;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaslovComputation {
    pub index: HalfInt,
    pub scan: CrossingScan,
}

/// `½ sign Γ(a) + Σ sign Γ(t) + ½ sign Γ(b)` over the crossings of a scan.
pub fn index_from_scan(scan: &CrossingScan) -> Result<HalfInt> {
    let mut twice = 0;
    for c in &scan.crossings {
        if !c.regular {
            return Err(IndexError::NonRegularCrossing { t: c.t });
        }
        let s = c.reduced_inertia.signature();
        twice += if c.at_endpoint { s } else { 2 * s };
    }
    Ok(HalfInt::from_twice(twice))
}

pub fn maslov_index_detailed<P: LagrangianPath + ?Sized>(
    path: &P,
    l_ref: &LagrangianFrame,
    opts: &MaslovOptions,
) -> Result<MaslovComputation> {
    let mut grid_n = opts.grid_n;
    let mut attempt = 0;
    loop {
        match find_crossings(path, l_ref, grid_n, &opts.tol) {
            Err(IndexError::GridTooCoarse { .. }) if attempt < opts.max_doublings => {
                grid_n *= 2;
                attempt += 1;
            }
            other => {
                let scan = other?;
                let index = index_from_scan(&scan)?;
                return Ok(MaslovComputation { index, scan });
            }
        }
    }
}

/// Maslov index of `path` relative to the fixed Lagrangian `l_ref`.
pub fn maslov_index<P: LagrangianPath + ?Sized>(
    path: &P,
    l_ref: &LagrangianFrame,
    opts: &MaslovOptions,
) -> Result<HalfInt> {
    Ok(maslov_index_detailed(path, l_ref, opts)?.index)
}

/// `μ_L(ψ)`: the index of `t ↦ e^{tH} L` against `L` on `[0, 1]`.
pub fn maslov_index_symplectic(
    h: &HamiltonianMat,
    l: &LagrangianFrame,
    opts: &MaslovOptions,
) -> Result<HalfInt> {
    maslov_index(&OrbitPath::new(h, l)?, l, opts)
}

pub fn conley_zehnder_detailed(
    h: &HamiltonianMat,
    opts: &MaslovOptions,
) -> Result<MaslovComputation> {
    maslov_index_detailed(&GraphPath::new(h), &diagonal(h.half_dim()), opts)
}

/// `μ_CZ`: the index of `t ↦ Gr(e^{tH})` against the diagonal.
pub fn conley_zehnder(h: &HamiltonianMat, opts: &MaslovOptions) -> Result<HalfInt> {
    Ok(conley_zehnder_detailed(h, opts)?.index)
}

fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() < INTEGER_SNAP).then_some(r as i64)
}

/// Index of the rotation path `e^{tαJ}L₀` on `[0, 1]`: `α/π` when the
/// endpoint lies on the train, `⌊α/π⌋ + ½` otherwise.
pub fn rotation_index_closed_form(alpha: f64) -> HalfInt {
    let x = alpha / PI;
    match near_integer(x) {
        Some(k) => HalfInt::from_int(k),
        None => HalfInt::from_twice(2 * x.floor() as i64 + 1),
    }
}

/// Identity on `½ℤ`; otherwise the nearest odd multiple of `½`.
pub fn f_semi(x: f64) -> HalfInt {
    match near_integer(2.0 * x) {
        Some(k) => HalfInt::from_twice(k),
        None => HalfInt::from_twice(2 * x.floor() as i64 + 1),
    }
}

/// Identity on `ℤ`; otherwise the odd member of `{⌊x⌋, ⌊x⌋ + 1}`.
pub fn g_odd(x: f64) -> i64 {
    match near_integer(x) {
        Some(k) => k,
        None => {
            let f = x.floor() as i64;
            if f.rem_euclid(2) == 1 {
                f
            } else {
                f + 1
            }
        }
    }
}

/// `Σ f(α_j/π)` over the Krein-positive angles of `H`.
pub fn spectral_maslov(h: &HamiltonianMat, tol: &Tolerances) -> Result<HalfInt> {
    Ok(krein_positive_angles(h, tol)?
        .into_iter()
        .map(|a| f_semi(a / PI))
        .sum())
}
