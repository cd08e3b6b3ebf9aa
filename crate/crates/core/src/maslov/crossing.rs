use serde::{Deserialize, Serialize};

use super::path::{frame_derivative, LagrangianPath};
use crate::error::{IndexError, Result};
use crate::numerics::{
    hstack, matrix_exp, range_basis, singular_values_desc, symmetric_eigenvalues,
    trailing_right_singular, Inertia, Mat, Tolerances,
};
use crate::symplectic::{HamiltonianMat, LagrangianFrame};

/// A detected intersection of the path with the reference Lagrangian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    /// `dim l(t) ∩ L_ref`.
    pub kernel_dim: usize,
    /// Dimension of the part of the intersection shared by the whole path.
    pub persistent_dim: usize,
    /// Inertia of the crossing form on the full intersection.
    pub form_inertia: Inertia,
    /// Inertia on the intersection with the persistent part removed.
    pub reduced_inertia: Inertia,
    /// The reduced form is nondegenerate.
    pub regular: bool,
    pub at_endpoint: bool,
}

/// Result of scanning a path against a reference Lagrangian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingScan {
    pub crossings: Vec<Crossing>,
    /// Dimension of the intersection common to every `l(t)`.
    pub persistent_dim: usize,
    /// The path meets the reference in a constant excess dimension with a
    /// vanishing form over the whole domain.
    pub constant_interval: bool,
    pub grid_n: usize,
}

/// Orthonormal basis of `{v : σ(v) <= cut}`, the right singular vectors with
/// singular values at most `cut`.
fn null_space_below(m: &Mat, cut: f64) -> Mat {
    let c = m.ncols();
    let (v, mut values) = trailing_right_singular(m, c);
    values.resize(c, 0.0);
    let k = values.iter().filter(|&&s| s <= cut).count();
    v.columns(c - k, k).into_owned()
}

/// Orthonormal basis of `span(a) ∩ span(b)` for orthonormal `a`, `b`,
/// keeping directions whose juxtaposed singular value is at most `cut`.
fn intersect(a: &Mat, b: &Mat, cut: f64) -> Mat {
    if a.ncols() == 0 || b.ncols() == 0 {
        return Mat::zeros(a.nrows(), 0);
    }
    let null = null_space_below(&hstack(a, b), cut);
    if null.ncols() == 0 {
        return Mat::zeros(a.nrows(), 0);
    }
    let v = a * null.rows(0, a.ncols());
    let tol = Tolerances::default();
    let basis = range_basis(&v, &tol);
    basis
        .columns(0, basis.ncols().min(null.ncols()))
        .into_owned()
}

fn orthonormal(f: &Mat) -> Mat {
    f.clone().qr().q()
}

struct Probe<'a, P: LagrangianPath + ?Sized> {
    path: &'a P,
    reference: Mat,
    persistent: Mat,
    tol: Tolerances,
}

impl<P: LagrangianPath + ?Sized> Probe<'_, P> {
    fn svals(&self, t: f64) -> Vec<f64> {
        singular_values_desc(&hstack(&orthonormal(&self.path.frame(t)), &self.reference))
    }

    fn cut(&self, values: &[f64]) -> f64 {
        100.0 * self.tol.eps_rank * values.first().copied().unwrap_or(1.0)
    }

    /// The first singular value not forced to zero by the persistent part.
    fn signal(&self, t: f64) -> f64 {
        let s = self.svals(t);
        s[s.len() - 1 - self.persistent.ncols()]
    }

    fn intersection(&self, t: f64) -> Mat {
        let q = orthonormal(&self.path.frame(t));
        let s = self.svals(t);
        intersect(&q, &self.reference, self.cut(&s))
    }

    fn excess(&self, t: f64) -> usize {
        let s = self.svals(t);
        let cut = self.cut(&s);
        s.iter()
            .filter(|&&v| v <= cut)
            .count()
            .saturating_sub(self.persistent.ncols())
    }

    /// Crossing form on the intersection at `t` with the persistent part
    /// removed, plus the scale used for the degeneracy band.
    fn reduced_form(&self, t: f64) -> Result<(Mat, Mat, usize, f64)> {
        let u = self.intersection(t);
        let kd = u.ncols();
        let k0 = self.persistent.ncols();
        let u_red = if k0 == 0 {
            u
        } else {
            let c =
                trailing_right_singular(&(self.persistent.transpose() * &u), kd.saturating_sub(k0))
                    .0;
            &u * c
        };
        let (form, scale) = form_on_basis(self.path, t, &u_red)?;
        Ok((u_red, form, kd, scale))
    }
}

/// `Γ(u_i, u_j) = ω(u_i, ġ_j)` where `ġ_j` is the velocity of `u_j` under the
/// frame motion; returns the symmetrized matrix and the rate scale
/// `‖Ω‖·‖F' R⁻¹‖`.
fn form_on_basis<P: LagrangianPath + ?Sized>(path: &P, t: f64, u: &Mat) -> Result<(Mat, f64)> {
    let frame = path.frame(t);
    let dframe = frame_derivative(path, t);
    let qr = frame.clone().qr();
    let q = qr.q();
    let rinv = qr
        .r()
        .try_inverse()
        .ok_or(IndexError::ComplementFailure { t })?;
    let velocity = dframe * rinv;
    let space = path.space();
    let scale = space.form().norm() * velocity.norm();
    if u.ncols() == 0 {
        return Ok((Mat::zeros(0, 0), scale));
    }
    let coeffs = q.transpose() * u;
    let raw = space.omega_matrix(u, &(&velocity * coeffs));
    Ok(((&raw + raw.transpose()) * 0.5, scale))
}

fn inertia_abs(form: &Mat, scale: f64, tol: &Tolerances) -> Inertia {
    if form.nrows() == 0 {
        return Inertia::default();
    }
    let eig = symmetric_eigenvalues(form);
    let biggest = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cut = tol.eps_sign * scale.max(biggest);
    let mut inertia = Inertia::default();
    for &v in eig.iter() {
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

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > width {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let candidates = [(lo, f(lo)), (hi, f(hi)), (x1, f1), (x2, f2)];
    candidates
        .into_iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap()
}

fn check_reference<P: LagrangianPath + ?Sized>(path: &P, l_ref: &LagrangianFrame) -> Result<()> {
    if path.space() != l_ref.space() {
        return Err(IndexError::SpaceMismatch);
    }
    let f = path.frame(path.domain().0);
    if f.nrows() != path.space().dim() || f.ncols() != path.space().half_dim() {
        return Err(IndexError::DimensionMismatch(format!(
            "path frame is {}x{} in a space of dimension {}",
            f.nrows(),
            f.ncols(),
            path.space().dim()
        )));
    }
    Ok(())
}

/// Locates every crossing of `path` with `l_ref` and evaluates its form.
pub fn find_crossings<P: LagrangianPath + ?Sized>(
    path: &P,
    l_ref: &LagrangianFrame,
    grid_n: usize,
    tol: &Tolerances,
) -> Result<CrossingScan> {
    if grid_n < 64 {
        return Err(IndexError::GridTooSmall(grid_n));
    }
    check_reference(path, l_ref)?;
    let (a, b) = path.domain();
    let h = (b - a) / grid_n as f64;
    let grid: Vec<f64> = (0..=grid_n)
        .map(|i| if i == grid_n { b } else { a + h * i as f64 })
        .collect();

    let mut probe = Probe {
        path,
        reference: l_ref.frame().clone(),
        persistent: Mat::zeros(path.space().dim(), 0),
        tol: *tol,
    };
    let mut persistent = l_ref.frame().clone();
    for &t in &grid {
        if persistent.ncols() == 0 {
            break;
        }
        let q = orthonormal(&path.frame(t));
        let s = singular_values_desc(&hstack(&q, &persistent));
        persistent = intersect(&persistent, &q, probe.cut(&s));
    }
    probe.persistent = persistent;
    let k0 = probe.persistent.ncols();

    let excess: Vec<usize> = grid.iter().map(|&t| probe.excess(t)).collect();
    let touching = excess.iter().filter(|&&e| e >= 1).count();
    if touching * 4 > grid.len() {
        return interval_mode(&probe, &grid, &excess, grid_n);
    }

    let signal: Vec<f64> = grid.iter().map(|&t| probe.signal(t)).collect();
    let width = 1e-12 * (b - a).max(1.0);
    let merge = 1e-9 * (b - a).max(1.0);
    let mut times: Vec<f64> = Vec::new();
    for i in 0..=grid_n {
        let left_ok = i == 0 || signal[i] <= signal[i - 1];
        let right_ok = i == grid_n || signal[i] < signal[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid_n)];
        let (t, _) = golden_min(|t| probe.signal(t), lo, hi, width);
        if probe.excess(t) == 0 {
            continue;
        }
        let mut found = vec![t];
        // Look for a second zero hiding on either side of the first.
        let gap = 1e-3 * h;
        for (l, r) in [(lo, t - gap), (t + gap, hi)] {
            if r - l > width {
                let (u, _) = golden_min(|t| probe.signal(t), l, r, width);
                if probe.excess(u) >= 1 {
                    found.push(u);
                }
            }
        }
        for t in found {
            let t = if t - a <= merge {
                a
            } else if b - t <= merge {
                b
            } else {
                t
            };
            times.push(t);
        }
    }
    // Odd crossings flip the orientation of the juxtaposed raw frame; with a
    // persistent part the determinant vanishes identically.
    let orientation = |t: f64| hstack(&path.frame(t), &probe.reference).determinant();
    let dets: Vec<f64> = if k0 == 0 {
        grid.iter().map(|&t| orientation(t)).collect()
    } else {
        Vec::new()
    };
    for i in 0..grid_n {
        if k0 == 0 && dets[i] * dets[i + 1] < 0.0 {
            let (mut lo, mut hi, mut dlo) = (grid[i], grid[i + 1], dets[i]);
            while hi - lo > width {
                let mid = 0.5 * (lo + hi);
                let dm = orientation(mid);
                if dm == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if dm * dlo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    dlo = dm;
                }
            }
            times.push(0.5 * (lo + hi));
        }
    }
    for end in [a, b] {
        if probe.excess(end) >= 1 {
            times.push(end);
        }
    }
    times.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // Candidates joined by a stretch on the train are one crossing.
    let mut merged: Vec<f64> = Vec::with_capacity(times.len());
    for t in times {
        match merged.last_mut() {
            Some(prev) if t - *prev <= merge || probe.excess(0.5 * (t + *prev)) >= 1 => {
                if t == b || (*prev != a && probe.signal(t) < probe.signal(*prev)) {
                    *prev = t;
                }
            }
            _ => merged.push(t),
        }
    }
    let times = merged;
    for w in times.windows(2) {
        if w[1] - w[0] < h {
            return Err(IndexError::GridTooCoarse { grid_n });
        }
    }

    let mut crossings = Vec::with_capacity(times.len());
    for t in times {
        let (_, form, kd, scale) = probe.reduced_form(t)?;
        let reduced = inertia_abs(&form, scale, tol);
        crossings.push(Crossing {
            t,
            kernel_dim: kd,
            persistent_dim: k0,
            form_inertia: reduced + Inertia::new(0, 0, kd - reduced.dim()),
            reduced_inertia: reduced,
            regular: reduced.is_nondegenerate(),
            at_endpoint: t == a || t == b,
        });
    }
    Ok(CrossingScan {
        crossings,
        persistent_dim: k0,
        constant_interval: false,
        grid_n,
    })
}

fn interval_mode<P: LagrangianPath + ?Sized>(
    probe: &Probe<'_, P>,
    grid: &[f64],
    excess: &[usize],
    grid_n: usize,
) -> Result<CrossingScan> {
    let first = excess[0];
    for (i, &t) in grid.iter().enumerate() {
        if excess[i] != first {
            return Err(IndexError::NonRegularCrossing { t });
        }
        let (_, form, _, scale) = probe.reduced_form(t)?;
        if form.norm() > probe.tol.eps_sign * scale {
            return Err(IndexError::NonRegularCrossing { t });
        }
    }
    Ok(CrossingScan {
        crossings: Vec::new(),
        persistent_dim: probe.persistent.ncols(),
        constant_interval: true,
        grid_n,
    })
}

/// Crossing form at `t0` on an orthonormal basis of `l(t0) ∩ L_ref`.
/// Returns `(basis, form)`.
pub fn crossing_form<P: LagrangianPath + ?Sized>(
    path: &P,
    l_ref: &LagrangianFrame,
    t0: f64,
    tol: &Tolerances,
) -> Result<(Mat, Mat)> {
    check_reference(path, l_ref)?;
    let probe = Probe {
        path,
        reference: l_ref.frame().clone(),
        persistent: Mat::zeros(path.space().dim(), 0),
        tol: *tol,
    };
    let u = probe.intersection(t0);
    if u.ncols() == 0 {
        return Err(IndexError::EmptyKernel { t: t0 });
    }
    let (form, _) = form_on_basis(path, t0, &u)?;
    Ok((u, form))
}

/// Crossing form at `t0` evaluated on caller-supplied vectors of `l(t0)`.
pub fn crossing_form_on_basis<P: LagrangianPath + ?Sized>(
    path: &P,
    t0: f64,
    u: &Mat,
) -> Result<Mat> {
    Ok(form_on_basis(path, t0, u)?.0)
}

/// `v ↦ -⟨d(t0) v, b'(t0) v⟩` on an orthonormal basis of `ker b(t0)` for
/// `ψ(t) = e^{tH} = [[a, b], [c, d]]`. Returns `(kernel basis, form)`.
pub fn crossing_form_vertical(h: &HamiltonianMat, t0: f64, tol: &Tolerances) -> Result<(Mat, Mat)> {
    let n = h.half_dim();
    let psi = matrix_exp(&(h.matrix() * t0))?;
    let dpsi = h.matrix() * &psi;
    let b = psi.view((0, n), (n, n)).into_owned();
    let d = psi.view((n, n), (n, n)).into_owned();
    let db = dpsi.view((0, n), (n, n)).into_owned();
    let cut = 100.0 * tol.eps_rank * psi.norm().max(1.0);
    let ker = null_space_below(&b, cut);
    if ker.ncols() == 0 {
        return Err(IndexError::EmptyKernel { t: t0 });
    }
    let raw = -(d.transpose() * db);
    let sym = (&raw + raw.transpose()) * 0.5;
    Ok((ker.clone(), ker.transpose() * sym * ker))
}

/// `dim(L_a ∩ L_b)` from the numerical rank of `[F_a | F_b]`.
pub fn intersection_dim(
    la: &LagrangianFrame,
    lb: &LagrangianFrame,
    tol: &Tolerances,
) -> Result<usize> {
    if la.space() != lb.space() {
        return Err(IndexError::SpaceMismatch);
    }
    Ok(crate::numerics::kernel_basis(&hstack(la.frame(), lb.frame()), tol).ncols())
}
