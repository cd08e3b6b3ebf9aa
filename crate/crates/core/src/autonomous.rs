//! Linear autonomous systems `w′ = Hw` on `[0, 1]`: the transversality
//! condition, the correction matrix `X̃`, the closed and spectral formulas for
//! `μ_{L₀}`, sign calibration and cross-validation reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IndexError, Result};
use crate::kashiwara::{kashiwara_index, kashiwara_reduced};
use crate::krein::krein_positive_angles;
use crate::maslov::{
    conley_zehnder, g_odd, maslov_index_symplectic, spectral_maslov, HalfInt, MaslovOptions,
};
use crate::numerics::{
    singular_values_desc, subspace_intersection, sym_signature, Mat, Tolerances,
};
use crate::symplectic::{
    diagonal, normal_form_generator, product_lagrangian, random_hamiltonian_with,
    vertical_lagrangian, GeneratorBlock, HamiltonianMat, SpectrumProfile, SymplecticMat,
    SymplecticSpace,
};

/// `e^{tH}`.
pub fn fundamental_solution(h: &HamiltonianMat, t: f64, tol: &Tolerances) -> Result<SymplecticMat> {
    h.flow(t, tol)
}

/// A generator `H` together with `ψ(1) = e^H` and its blocks.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    h: HamiltonianMat,
    psi1: SymplecticMat,
    a: Mat,
    b: Mat,
    c: Mat,
    d: Mat,
}

impl HamiltonianSystem {
    pub fn new(h: HamiltonianMat, tol: &Tolerances) -> Result<Self> {
        let psi1 = fundamental_solution(&h, 1.0, tol)?;
        let (a, b, c, d) = psi1.blocks();
        let sys = Self {
            h,
            psi1,
            a,
            b,
            c,
            d,
        };
        let defect = sys.block_relation_defect();
        let scale = sys.psi1.matrix().norm().powi(2).max(1.0);
        if defect > tol.eps_sym * scale {
            return Err(IndexError::NotSymplectic { defect });
        }
        Ok(sys)
    }

    pub fn half_dim(&self) -> usize {
        self.h.half_dim()
    }

    pub fn hamiltonian(&self) -> &HamiltonianMat {
        &self.h
    }

    pub fn psi1(&self) -> &SymplecticMat {
        &self.psi1
    }

    /// `(A, B, C, D)`.
    pub fn blocks(&self) -> (&Mat, &Mat, &Mat, &Mat) {
        (&self.a, &self.b, &self.c, &self.d)
    }

    /// Largest residual of `AᵀD − CᵀB = I`, `AᵀC = CᵀA`, `DᵀB = BᵀD`.
    pub fn block_relation_defect(&self) -> f64 {
        let (a, b, c, d) = self.blocks();
        let n = self.half_dim();
        let r1 = (a.transpose() * d - c.transpose() * b - Mat::identity(n, n)).norm();
        let r2 = (a.transpose() * c - c.transpose() * a).norm();
        let r3 = (d.transpose() * b - b.transpose() * d).norm();
        r1.max(r2).max(r3)
    }

    fn scale(&self) -> f64 {
        singular_values_desc(self.psi1.matrix())
            .first()
            .copied()
            .unwrap_or(1.0)
            .max(1.0)
    }

    /// Smallest singular value of `B`.
    pub fn sigma_min_b(&self) -> f64 {
        if self.half_dim() == 0 {
            return f64::INFINITY;
        }
        singular_values_desc(&self.b).last().copied().unwrap_or(0.0)
    }

    /// `ψ(1)` differs from the identity by rounding only.
    pub fn is_loop(&self, tol: &Tolerances) -> bool {
        let n = self.half_dim();
        (self.psi1.matrix() - Mat::identity(2 * n, 2 * n)).norm() <= tol.eps_sym * self.scale()
    }

    /// `ψ(1) − I` is invertible.
    pub fn is_nondegenerate(&self, tol: &Tolerances) -> bool {
        let n = self.half_dim();
        if n == 0 {
            return true;
        }
        let s = singular_values_desc(&(self.psi1.matrix() - Mat::identity(2 * n, 2 * n)));
        s.last().copied().unwrap_or(0.0) > tol.eps_rank * self.scale()
    }
}

/// Condition (H): `ψ(1)L₀ ∩ L₀ = {0}`, tested as invertibility of `B`.
pub fn transversality_h(system: &HamiltonianSystem, tol: &Tolerances) -> bool {
    system.sigma_min_b() > tol.eps_rank * system.scale()
}

fn require_h(system: &HamiltonianSystem, tol: &Tolerances) -> Result<()> {
    if transversality_h(system, tol) {
        Ok(())
    } else {
        Err(IndexError::TransversalityViolated)
    }
}

/// `(I − D)B⁻¹(I − A) − C`, unsymmetrized. Equals `2X`.
pub fn twice_x(system: &HamiltonianSystem, tol: &Tolerances) -> Result<Mat> {
    require_h(system, tol)?;
    let (a, b, c, d) = system.blocks();
    let n = system.half_dim();
    let i = Mat::identity(n, n);
    let solved = b
        .clone()
        .lu()
        .solve(&(&i - a))
        .ok_or(IndexError::TransversalityViolated)?;
    Ok((&i - d) * solved - c)
}

/// `X̃ = C + (D − I)B⁻¹(I − A)`, checked for symmetry and returned
/// symmetrized.
pub fn correction_matrix(system: &HamiltonianSystem, tol: &Tolerances) -> Result<Mat> {
    let xt = -twice_x(system, tol)?;
    let defect = (&xt - xt.transpose()).norm();
    if defect > tol.eps_sym * (1.0 + xt.norm()) {
        return Err(IndexError::SymmetryDefect { defect });
    }
    Ok((&xt + xt.transpose()) * 0.5)
}

/// `sign X̃`.
pub fn correction_signature(system: &HamiltonianSystem, tol: &Tolerances) -> Result<i64> {
    Ok(sym_signature(&correction_matrix(system, tol)?, tol)?.signature())
}

/// The two evaluations of `τ(Δ, L₀×L₀, Gr ψ(1))` and the signatures of the
/// matrices `X` and `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauComputation {
    pub direct: i64,
    pub reduced: i64,
    pub sign_x: i64,
    pub sign_y: i64,
}

/// `Y = [[0, −I, X], [−I, 0, I], [Xᵀ, I, 0]]`.
pub fn y_matrix(x: &Mat) -> Mat {
    let n = x.nrows();
    let i = Mat::identity(n, n);
    let mut y = Mat::zeros(3 * n, 3 * n);
    y.view_mut((0, n), (n, n)).copy_from(&(-&i));
    y.view_mut((0, 2 * n), (n, n)).copy_from(x);
    y.view_mut((n, 0), (n, n)).copy_from(&(-&i));
    y.view_mut((n, 2 * n), (n, n)).copy_from(&i);
    y.view_mut((2 * n, 0), (n, n)).copy_from(&x.transpose());
    y.view_mut((2 * n, n), (n, n)).copy_from(&i);
    y
}

/// `τ(Δ, L₀×L₀, Gr ψ(1))` computed in the doubled space and after reduction
/// by `K = Δ ∩ (L₀×L₀)`; both routes and `sign Y = sign X` are enforced.
pub fn tau_worked_example(system: &HamiltonianSystem, tol: &Tolerances) -> Result<TauComputation> {
    let x = twice_x(system, tol)? * 0.5;
    let x = (&x + x.transpose()) * 0.5;
    let n = system.half_dim();
    let l0 = vertical_lagrangian(n);
    let space = SymplecticSpace::product(n);
    let delta = diagonal(n);
    let l00 = product_lagrangian(&l0, &l0)?;
    let graph = system.psi1.graph(tol)?;
    let direct = kashiwara_index(&space, &delta, &l00, &graph, tol)?;
    let k = subspace_intersection(delta.frame(), l00.frame(), tol);
    let reduced = kashiwara_reduced(&space, &delta, &l00, &graph, &k, tol)?;
    if direct != reduced {
        return Err(IndexError::InternalMismatch(format!(
            "direct tau {direct} differs from reduced tau {reduced}"
        )));
    }
    let sign_x = sym_signature(&x, tol)?.signature();
    let sign_y = sym_signature(&y_matrix(&x), tol)?.signature();
    if sign_x != sign_y {
        return Err(IndexError::InternalMismatch(format!(
            "sign Y = {sign_y} but sign X = {sign_x}"
        )));
    }
    Ok(TauComputation {
        direct,
        reduced,
        sign_x,
        sign_y,
    })
}

/// The global sign `σ` in `μ_{L₀} = μ_CZ + σ·½·sign X̃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CorrectionSign(i8);

impl CorrectionSign {
    pub const PLUS: CorrectionSign = CorrectionSign(1);
    pub const MINUS: CorrectionSign = CorrectionSign(-1);
    /// The conventional sign of the closed formula, shown for comparison.
    pub const PRINTED: CorrectionSign = CorrectionSign::PLUS;

    pub fn value(self) -> i64 {
        self.0 as i64
    }
}

impl Default for CorrectionSign {
    fn default() -> Self {
        Self::PRINTED
    }
}

impl fmt::Display for CorrectionSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0 > 0 { "+1" } else { "-1" })
    }
}

impl FromStr for CorrectionSign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "+1" | "1" | "+" => Ok(Self::PLUS),
            "-1" | "-" => Ok(Self::MINUS),
            other => Err(format!("sign must be +1 or -1, got {other:?}")),
        }
    }
}

impl Serialize for CorrectionSign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.0)
    }
}

impl<'de> Deserialize<'de> for CorrectionSign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i8::deserialize(d)? {
            1 => Ok(Self::PLUS),
            -1 => Ok(Self::MINUS),
            v => Err(serde::de::Error::custom(format!(
                "sign must be 1 or -1, got {v}"
            ))),
        }
    }
}

/// One rotation probe used by [`calibrate_sign`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProbe {
    pub alpha: f64,
    pub mu_path: HalfInt,
    pub mu_cz: HalfInt,
    pub sign_xtilde: i64,
}

impl CalibrationProbe {
    fn fits(&self, sigma: CorrectionSign) -> bool {
        self.mu_path.twice() == self.mu_cz.twice() + sigma.value() * self.sign_xtilde
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub sigma: CorrectionSign,
    pub printed: CorrectionSign,
    pub probes: Vec<CalibrationProbe>,
}

/// Rotation angles of the calibration probes.
pub const CALIBRATION_ANGLES: [f64; 2] = [2.0, 5.0];

/// Determines `σ` from the rotations `α ∈ {2, 5}`, where `μ_path`, `μ_CZ`
/// and `sign X̃` are all known independently.
pub fn calibrate_sign(opts: &MaslovOptions) -> Result<Calibration> {
    let tol = &opts.tol;
    let mut probes = Vec::new();
    for alpha in CALIBRATION_ANGLES {
        let h = HamiltonianMat::rotation(1, alpha);
        let sys = HamiltonianSystem::new(h.clone(), tol)?;
        let fail = |e: IndexError| IndexError::CalibrationFailure(format!("alpha = {alpha}: {e}"));
        probes.push(CalibrationProbe {
            alpha,
            mu_path: maslov_index_symplectic(&h, &vertical_lagrangian(1), opts).map_err(fail)?,
            mu_cz: conley_zehnder(&h, opts).map_err(fail)?,
            sign_xtilde: correction_signature(&sys, tol).map_err(fail)?,
        });
    }
    let fitting: Vec<CorrectionSign> = [CorrectionSign::PLUS, CorrectionSign::MINUS]
        .into_iter()
        .filter(|&s| probes.iter().all(|p| p.fits(s)))
        .collect();
    match fitting.as_slice() {
        [sigma] => Ok(Calibration {
            sigma: *sigma,
            printed: CorrectionSign::PRINTED,
            probes,
        }),
        _ => Err(IndexError::CalibrationFailure(format!(
            "{} signs fit the probes {probes:?}",
            fitting.len()
        ))),
    }
}

/// [`calibrate_sign`] with default options, computed once per process.
pub fn calibrated() -> Result<&'static Calibration> {
    static CELL: OnceLock<Result<Calibration>> = OnceLock::new();
    CELL.get_or_init(|| calibrate_sign(&MaslovOptions::default()))
        .as_ref()
        .map_err(Clone::clone)
}

/// `μ_CZ + σ·½·sign X̃` under (H); `μ_CZ` alone when `ψ(1) = I`.
pub fn maslov_via_formula(
    system: &HamiltonianSystem,
    sigma: CorrectionSign,
    opts: &MaslovOptions,
) -> Result<HalfInt> {
    let tol = &opts.tol;
    if system.is_loop(tol) {
        return conley_zehnder(&system.h, opts);
    }
    let s = correction_signature(system, tol)?;
    let cz = conley_zehnder(&system.h, opts)?;
    Ok(cz + HalfInt::from_twice(sigma.value() * s))
}

/// `Σ g(α_j/π) + σ·½·sign X̃` over the Krein-positive angles of `H`.
pub fn maslov_spectral(
    system: &HamiltonianSystem,
    sigma: CorrectionSign,
    tol: &Tolerances,
) -> Result<HalfInt> {
    let angles = krein_positive_angles(&system.h, tol)?;
    let s = correction_signature(system, tol)?;
    if !system.is_nondegenerate(tol) {
        return Err(IndexError::DegenerateEndpoint);
    }
    let g: i64 = angles.iter().map(|a| g_odd(a / PI)).sum();
    Ok(HalfInt::from_int(g) + HalfInt::from_twice(sigma.value() * s))
}

/// Recovers the blocks when `H` is exactly a block-diagonal normal-form
/// generator in the standard coordinates.
pub fn normal_form_blocks(h: &HamiltonianMat, tol: &Tolerances) -> Option<Vec<GeneratorBlock>> {
    let m = h.matrix();
    let n = h.half_dim();
    let eps = tol.eps_sym * m.norm().max(1.0);
    let mut blocks = Vec::new();
    let mut p = 0;
    while p < n {
        if p + 1 < n && m[(p + 1, p)].abs() > eps {
            blocks.push(GeneratorBlock::Loxodromic {
                growth: m[(p, p)],
                angle: m[(p + 1, p)],
            });
            p += 2;
        } else if m[(p, p)].abs() > eps {
            blocks.push(GeneratorBlock::Hyperbolic(m[(p, p)]));
            p += 1;
        } else {
            blocks.push(GeneratorBlock::Rotation(m[(n + p, p)]));
            p += 1;
        }
    }
    let rebuilt = normal_form_generator(&blocks);
    ((rebuilt.matrix() - m).norm() <= eps).then_some(blocks)
}

/// Names of the index routes in an [`IndexReport`].
pub const ROUTES: [&str; 4] = ["path", "formula", "spectral_f", "spectral_g"];

/// Whether two routes produced the same value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agreement {
    pub left: String,
    pub right: String,
    pub agree: bool,
}

/// Every applicable route to `μ_{L₀}` for one system, with per-route errors.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct IndexReport {
    pub n: usize,
    pub sigma: CorrectionSign,
    pub printed_sigma: CorrectionSign,
    pub transversal_h: bool,
    pub nondegenerate: bool,
    pub loop_case: bool,
    pub block_normal_form: bool,
    pub mu_path: Option<HalfInt>,
    pub mu_cz: Option<HalfInt>,
    pub sign_xtilde: Option<i64>,
    pub mu_formula: Option<HalfInt>,
    pub mu_spectral_f: Option<HalfInt>,
    pub mu_spectral_g: Option<HalfInt>,
    pub errors: BTreeMap<String, String>,
}

impl IndexReport {
    fn route(&self, name: &str) -> Option<HalfInt> {
        match name {
            "path" => self.mu_path,
            "formula" => self.mu_formula,
            "spectral_f" => self.mu_spectral_f,
            "spectral_g" => self.mu_spectral_g,
            _ => None,
        }
    }

    /// Pairwise comparison of all routes that produced a value.
    pub fn agreements(&self) -> Vec<Agreement> {
        let mut out = Vec::new();
        for (i, l) in ROUTES.iter().enumerate() {
            for r in &ROUTES[i + 1..] {
                if let (Some(a), Some(b)) = (self.route(l), self.route(r)) {
                    out.push(Agreement {
                        left: l.to_string(),
                        right: r.to_string(),
                        agree: a == b,
                    });
                }
            }
        }
        out
    }

    pub fn all_agree(&self) -> bool {
        self.agreements().iter().all(|a| a.agree)
    }
}

impl Serialize for IndexReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            n: usize,
            sigma: CorrectionSign,
            printed_sigma: CorrectionSign,
            transversal_h: bool,
            nondegenerate: bool,
            loop_case: bool,
            block_normal_form: bool,
            mu_path: Option<HalfInt>,
            mu_cz: Option<HalfInt>,
            sign_xtilde: Option<i64>,
            mu_formula: Option<HalfInt>,
            mu_spectral_f: Option<HalfInt>,
            mu_spectral_g: Option<HalfInt>,
            errors: &'a BTreeMap<String, String>,
            agreement: Vec<Agreement>,
            all_agree: bool,
        }
        Wire {
            n: self.n,
            sigma: self.sigma,
            printed_sigma: self.printed_sigma,
            transversal_h: self.transversal_h,
            nondegenerate: self.nondegenerate,
            loop_case: self.loop_case,
            block_normal_form: self.block_normal_form,
            mu_path: self.mu_path,
            mu_cz: self.mu_cz,
            sign_xtilde: self.sign_xtilde,
            mu_formula: self.mu_formula,
            mu_spectral_f: self.mu_spectral_f,
            mu_spectral_g: self.mu_spectral_g,
            errors: &self.errors,
            agreement: self.agreements(),
            all_agree: self.all_agree(),
        }
        .serialize(s)
    }
}

fn record<T>(errors: &mut BTreeMap<String, String>, route: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            errors.insert(route.to_string(), e.to_string());
            None
        }
    }
}

/// Runs every applicable route for `H`. Failures are recorded per route.
/// The spectral routes run only for block normal forms.
pub fn validate(
    system: &HamiltonianSystem,
    sigma: CorrectionSign,
    opts: &MaslovOptions,
) -> IndexReport {
    let tol = &opts.tol;
    let n = system.half_dim();
    let mut errors = BTreeMap::new();
    let transversal_h = transversality_h(system, tol);
    let loop_case = system.is_loop(tol);
    let block_normal_form = normal_form_blocks(&system.h, tol).is_some();
    let mu_path = record(
        &mut errors,
        "path",
        maslov_index_symplectic(&system.h, &vertical_lagrangian(n), opts),
    );
    let mu_cz = record(&mut errors, "cz", conley_zehnder(&system.h, opts));
    let sign_xtilde = if transversal_h {
        record(
            &mut errors,
            "sign_xtilde",
            correction_signature(system, tol),
        )
    } else {
        None
    };
    let mu_formula = if transversal_h || loop_case {
        record(
            &mut errors,
            "formula",
            maslov_via_formula(system, sigma, opts),
        )
    } else {
        None
    };
    let nondegenerate = system.is_nondegenerate(tol);
    let (mut mu_spectral_f, mut mu_spectral_g) = (None, None);
    if block_normal_form {
        mu_spectral_f = record(&mut errors, "spectral_f", spectral_maslov(&system.h, tol));
        if transversal_h && nondegenerate {
            mu_spectral_g = record(
                &mut errors,
                "spectral_g",
                maslov_spectral(system, sigma, tol),
            );
        }
    }
    IndexReport {
        n,
        sigma,
        printed_sigma: CorrectionSign::PRINTED,
        transversal_h,
        nondegenerate,
        loop_case,
        block_normal_form,
        mu_path,
        mu_cz,
        sign_xtilde,
        mu_formula,
        mu_spectral_f,
        mu_spectral_g,
        errors,
    }
}

/// Rejection-samples a system of the given profile with `σ_min(B) > min_b`.
pub fn random_transversal_system_with<R: Rng>(
    rng: &mut R,
    n: usize,
    profile: SpectrumProfile,
    min_b: f64,
    tol: &Tolerances,
) -> HamiltonianSystem {
    loop {
        let h = random_hamiltonian_with(rng, n, profile);
        if let Ok(sys) = HamiltonianSystem::new(h, tol) {
            if sys.sigma_min_b() > min_b {
                return sys;
            }
        }
    }
}

pub fn random_transversal_system(
    n: usize,
    seed: u64,
    profile: SpectrumProfile,
    min_b: f64,
) -> HamiltonianSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_transversal_system_with(&mut rng, n, profile, min_b, &Tolerances::default())
}
