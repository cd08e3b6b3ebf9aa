//! Seeded property sweeps over random ensembles, one tally per property.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::autonomous::{
    maslov_spectral, maslov_via_formula, random_transversal_system_with, tau_worked_example,
    twice_x, CorrectionSign, HamiltonianSystem,
};
use crate::error::IndexError;
use crate::kashiwara::{
    connecting_generator, hormander_index, hormander_via_path, kashiwara_index, kashiwara_reduced,
    kashiwara_transversal, random_triple_with_intersection,
};
use crate::krein::krein_spectrum;
use crate::maslov::{
    conley_zehnder, maslov_index_symplectic, spectral_maslov, HalfInt, MaslovOptions, OrbitPath,
};
use crate::numerics::{smallest_singular_value, Mat, Tolerances};
use crate::symplectic::{
    normal_form_generator, random_hamiltonian_with, random_lagrangian_with, random_symplectic_with,
    vertical_lagrangian, GeneratorBlock, LagrangianFrame, SpectrumProfile, SymplecticSpace,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Trial {
    Pass,
    Fail(String),
    Skip(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub profile: SpectrumProfile,
    pub count: usize,
    pub seed: u64,
    pub sigma: CorrectionSign,
    pub properties: Vec<PropertyOutcome>,
}

impl SuiteSummary {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.failed == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub profile: SpectrumProfile,
    pub count: usize,
    pub seed: u64,
    pub sigma: CorrectionSign,
    pub opts: MaslovOptions,
}

struct Ctx {
    profile: SpectrumProfile,
    sigma: CorrectionSign,
    opts: MaslovOptions,
}

impl Ctx {
    fn tol(&self) -> &Tolerances {
        &self.opts.tol
    }
}

type Check = fn(&mut ChaCha8Rng, usize, &Ctx) -> Trial;

/// Property names in the order they are reported.
pub const PROPERTIES: [&str; 15] = [
    "kashiwara_skew",
    "kashiwara_additive",
    "kashiwara_invariant",
    "kashiwara_normalization",
    "kashiwara_transversal",
    "block_relations",
    "x_symmetry",
    "reduction",
    "sign_y_equals_sign_x",
    "hormander_path_independence",
    "hormander_formula",
    "closed_formula",
    "loop_identity",
    "spectral_formulas",
    "zero_property",
];

const CHECKS: [Check; 15] = [
    skew,
    additive,
    invariant,
    normalization,
    transversal,
    block_relations,
    x_symmetry,
    reduction,
    sign_y,
    hormander_paths,
    hormander_formula,
    closed_formula,
    loop_identity,
    spectral,
    zero_property,
];

/// Krein pairing is reported last; it has its own name constant.
pub const KREIN_PAIRING: &str = "krein_pairing";

fn trial_seed(seed: u64, prop: usize, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ ((prop as u64) << 40)
        ^ (i as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

fn tally(name: &str, prop: usize, cfg: &SuiteConfig, ctx: &Ctx, check: Check) -> PropertyOutcome {
    let mut out = PropertyOutcome {
        name: name.to_string(),
        passed: 0,
        failed: 0,
        skipped: 0,
        first_failure: None,
    };
    for i in 0..cfg.count {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, prop, i));
        match check(&mut rng, i, ctx) {
            Trial::Pass => out.passed += 1,
            Trial::Skip(_) => out.skipped += 1,
            Trial::Fail(msg) => {
                out.failed += 1;
                out.first_failure.get_or_insert(format!("trial {i}: {msg}"));
            }
        }
    }
    out
}

/// Runs every property `count` times. Identical configurations give
/// identical summaries.
pub fn run_suite(cfg: &SuiteConfig) -> SuiteSummary {
    let ctx = Ctx {
        profile: cfg.profile,
        sigma: cfg.sigma,
        opts: cfg.opts,
    };
    let mut properties: Vec<PropertyOutcome> = PROPERTIES
        .iter()
        .zip(CHECKS)
        .enumerate()
        .map(|(k, (name, check))| tally(name, k, cfg, &ctx, check))
        .collect();
    properties.push(tally(KREIN_PAIRING, CHECKS.len(), cfg, &ctx, krein_pairing));
    SuiteSummary {
        profile: cfg.profile,
        count: cfg.count,
        seed: cfg.seed,
        sigma: cfg.sigma,
        properties,
    }
}

macro_rules! attempt {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Trial::Fail(e.to_string()),
        }
    };
}

fn expect_eq<T: PartialEq + std::fmt::Display>(got: T, want: T, what: &str) -> Trial {
    if got == want {
        Trial::Pass
    } else {
        Trial::Fail(format!("{what}: got {got}, expected {want}"))
    }
}

fn triple(rng: &mut ChaCha8Rng, n: usize) -> [LagrangianFrame; 3] {
    [
        random_lagrangian_with(rng, n),
        random_lagrangian_with(rng, n),
        random_lagrangian_with(rng, n),
    ]
}

fn tau(l: &[&LagrangianFrame; 3], tol: &Tolerances) -> Result<i64, IndexError> {
    kashiwara_index(l[0].space(), l[0], l[1], l[2], tol)
}

fn skew(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let [a, b, c] = triple(rng, 1 + i % 3);
    let t = attempt!(tau(&[&a, &b, &c], ctx.tol()));
    let perms: [([&LagrangianFrame; 3], i64); 5] = [
        ([&b, &c, &a], 1),
        ([&c, &a, &b], 1),
        ([&b, &a, &c], -1),
        ([&a, &c, &b], -1),
        ([&c, &b, &a], -1),
    ];
    for (p, sign) in perms {
        let v = attempt!(tau(&p, ctx.tol()));
        if v != sign * t {
            return Trial::Fail(format!("permuted index {v}, base {t}"));
        }
    }
    Trial::Pass
}

fn additive(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let (n, m) = (1 + i % 3, 1 + (i / 3) % 3);
    let xs = triple(rng, n);
    let ys = triple(rng, m);
    let sums: Vec<_> = xs.iter().zip(&ys).map(|(x, y)| x.direct_sum(y)).collect();
    let whole = attempt!(tau(&[&sums[0], &sums[1], &sums[2]], ctx.tol()));
    let a = attempt!(tau(&[&xs[0], &xs[1], &xs[2]], ctx.tol()));
    let b = attempt!(tau(&[&ys[0], &ys[1], &ys[2]], ctx.tol()));
    expect_eq(whole, a + b, "index on the direct sum")
}

fn invariant(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let n = 1 + i % 3;
    let ls = triple(rng, n);
    let phi = random_symplectic_with(rng, n);
    let moved: Vec<_> = ls.iter().map(|l| phi.apply(l, ctx.tol())).collect();
    let moved: Vec<_> = attempt!(moved.into_iter().collect::<Result<Vec<_>, _>>());
    let a = attempt!(tau(&[&ls[0], &ls[1], &ls[2]], ctx.tol()));
    let b = attempt!(tau(&[&moved[0], &moved[1], &moved[2]], ctx.tol()));
    expect_eq(b, a, "index after a symplectic map")
}

fn line(theta: f64, tol: &Tolerances) -> Result<LagrangianFrame, IndexError> {
    LagrangianFrame::new(
        SymplecticSpace::standard(1),
        Mat::from_column_slice(2, 1, &[theta.cos(), theta.sin()]),
        tol,
    )
}

fn normalization(_: &mut ChaCha8Rng, _: usize, ctx: &Ctx) -> Trial {
    let ls = [0.0, PI / 4.0, PI / 2.0].map(|t| line(t, ctx.tol()));
    let [a, b, c] = ls;
    let (a, b, c) = (attempt!(a), attempt!(b), attempt!(c));
    expect_eq(
        attempt!(tau(&[&a, &b, &c], ctx.tol())),
        1,
        "normalization triple",
    )
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let a = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&a + a.transpose()) * 0.5
}

fn transversal(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let n = 1 + i % 5;
    let a = random_symmetric(rng, n);
    if smallest_singular_value(&a) < 1e-3 {
        return Trial::Skip("nearly singular A".into());
    }
    let sign = attempt!(crate::numerics::sym_signature(&a, ctx.tol())).signature();
    expect_eq(
        attempt!(kashiwara_transversal(&a, ctx.tol())),
        sign,
        "sign A",
    )
}

fn system(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx, max_n: usize) -> HamiltonianSystem {
    random_transversal_system_with(rng, 1 + i % max_n, ctx.profile, 1e-3, ctx.tol())
}

fn block_relations(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let sys = system(rng, i, ctx, 5);
    let scale = sys.psi1().matrix().norm().powi(2).max(1.0);
    let defect = sys.block_relation_defect();
    if defect <= 1e-9 * scale {
        Trial::Pass
    } else {
        Trial::Fail(format!("block relation defect {defect:.3e}"))
    }
}

fn x_symmetry(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let m = attempt!(twice_x(&system(rng, i, ctx, 5), ctx.tol()));
    let defect = (&m - m.transpose()).norm();
    if defect <= 1e-8 * (1.0 + m.norm()) {
        Trial::Pass
    } else {
        Trial::Fail(format!("symmetry defect {defect:.3e}"))
    }
}

fn reduction(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let t = attempt!(tau_worked_example(&system(rng, i, ctx, 3), ctx.tol()));
    if t.direct != t.reduced {
        return Trial::Fail(format!("direct {} vs reduced {}", t.direct, t.reduced));
    }
    let (a, b, c, k) = random_triple_with_intersection(1 + i % 3, rng.random());
    let direct = attempt!(tau(&[&a, &b, &c], ctx.tol()));
    let reduced = attempt!(kashiwara_reduced(a.space(), &a, &b, &c, &k, ctx.tol()));
    expect_eq(reduced, direct, "engineered triple")
}

fn sign_y(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    match tau_worked_example(&system(rng, i, ctx, 4), ctx.tol()) {
        Ok(t) => expect_eq(t.sign_y, t.sign_x, "sign Y"),
        Err(e) => Trial::Fail(e.to_string()),
    }
}

/// A random orthogonal `n×n` matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

/// `μ(l, L₁) − μ(l, L₀)` along five different paths from `L′₀` to `L′₁`,
/// together with the value of the four-fold formula.
pub fn hormander_values<R: Rng>(
    rng: &mut R,
    n: usize,
    opts: &MaslovOptions,
) -> Result<(Vec<HalfInt>, HalfInt), IndexError> {
    let ls: Vec<_> = (0..4).map(|_| random_lagrangian_with(rng, n)).collect();
    let id = Mat::identity(n, n);
    let twist = random_orthogonal(rng, n);
    let choices: [(&Mat, Vec<i64>); 5] = [
        (&id, vec![0]),
        (&id, vec![1]),
        (&id, vec![-1]),
        (&twist, vec![0]),
        (&twist, vec![1, -1]),
    ];
    let mut values = Vec::new();
    for (o, w) in choices {
        let w = &w[..w.len().min(n)];
        let h = connecting_generator(&ls[2], &ls[3], o, w)?;
        let path = OrbitPath::new(&h, &ls[2])?;
        values.push(hormander_via_path(&ls[0], &ls[1], &path, opts)?);
    }
    let formula = hormander_index(&ls[0], &ls[1], &ls[2], &ls[3], &opts.tol)?;
    Ok((values, formula))
}

fn hormander_paths(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let (values, _) = attempt!(hormander_values(rng, 1 + i % 2, &ctx.opts));
    if values.iter().all(|v| *v == values[0]) {
        Trial::Pass
    } else {
        Trial::Fail(format!("path values {values:?}"))
    }
}

fn hormander_formula(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let (values, formula) = attempt!(hormander_values(rng, 1 + i % 2, &ctx.opts));
    expect_eq(
        values[0],
        formula,
        "path value against the four-fold formula",
    )
}

fn closed_formula(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let sys = system(rng, i, ctx, 4);
    let path = match maslov_index_symplectic(
        sys.hamiltonian(),
        &vertical_lagrangian(sys.half_dim()),
        &ctx.opts,
    ) {
        Ok(v) => v,
        Err(e @ IndexError::NonRegularCrossing { .. }) => return Trial::Skip(e.to_string()),
        Err(e) => return Trial::Fail(e.to_string()),
    };
    let formula = attempt!(maslov_via_formula(&sys, ctx.sigma, &ctx.opts));
    expect_eq(formula, path, "closed formula")
}

/// Block-normal-form elliptic generator with the given angles.
pub fn rotation_blocks(angles: &[f64]) -> crate::symplectic::HamiltonianMat {
    let blocks: Vec<_> = angles
        .iter()
        .map(|&a| GeneratorBlock::Rotation(a))
        .collect();
    normal_form_generator(&blocks)
}

fn loop_identity(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let n = 1 + i % 3;
    let angles: Vec<f64> = (0..n)
        .map(|_| 2.0 * PI * rng.random_range(1..4) as f64)
        .collect();
    let h = rotation_blocks(&angles);
    let path = attempt!(maslov_index_symplectic(
        &h,
        &vertical_lagrangian(n),
        &ctx.opts
    ));
    let cz = attempt!(conley_zehnder(&h, &ctx.opts));
    expect_eq(path, cz, "loop index against the Conley-Zehnder index")
}

/// Random rotation angles in `±[0.3, 3π]` kept away from `πℤ`.
pub fn random_angles<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| loop {
            let a: f64 = rng.random_range(0.3..3.0 * PI);
            let frac = a / PI - (a / PI).round();
            if frac.abs() > 0.05 {
                break if rng.random_bool(0.5) { a } else { -a };
            }
        })
        .collect()
}

fn spectral(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let n = 1 + i % 3;
    let h = rotation_blocks(&random_angles(rng, n));
    let sys = attempt!(HamiltonianSystem::new(h.clone(), ctx.tol()));
    let path = attempt!(maslov_index_symplectic(
        &h,
        &vertical_lagrangian(n),
        &ctx.opts
    ));
    let f = attempt!(spectral_maslov(&h, ctx.tol()));
    if f != path {
        return Trial::Fail(format!("f-sum {f} vs path {path}"));
    }
    let g = attempt!(maslov_spectral(&sys, ctx.sigma, ctx.tol()));
    expect_eq(g, path, "g-sum with correction")
}

fn zero_property(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let block = if i.is_multiple_of(2) {
        GeneratorBlock::Hyperbolic(rng.random_range(0.2..1.5))
    } else {
        GeneratorBlock::Loxodromic {
            growth: rng.random_range(0.2..1.0),
            angle: rng.random_range(0.3..PI - 0.3),
        }
    };
    let h = normal_form_generator(&[block]);
    let path = attempt!(maslov_index_symplectic(
        &h,
        &vertical_lagrangian(h.half_dim()),
        &ctx.opts
    ));
    expect_eq(path, HalfInt::ZERO, "hyperbolic contribution")
}

fn krein_pairing(rng: &mut ChaCha8Rng, i: usize, ctx: &Ctx) -> Trial {
    let n = 1 + i % 3;
    let h = random_hamiltonian_with(rng, n, SpectrumProfile::Elliptic);
    let m = attempt!(h.flow(1.0, ctx.tol()));
    let rows = attempt!(krein_spectrum(&m, ctx.tol()));
    for r in rows
        .iter()
        .filter(|r| r.on_unit_circle && r.im.abs() > 1e-6)
    {
        let Some(k) = r.krein else {
            return Trial::Fail("missing Krein inertia".into());
        };
        let partner = rows
            .iter()
            .find(|s| (s.re - r.re).abs() < 1e-6 && (s.im + r.im).abs() < 1e-6);
        match partner.and_then(|s| s.krein) {
            Some(c) if c.n_pos == k.n_neg && c.n_neg == k.n_pos => {}
            other => return Trial::Fail(format!("inertia {k:?} vs conjugate {other:?}")),
        }
    }
    Trial::Pass
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(count: usize, seed: u64) -> SuiteConfig {
        SuiteConfig {
            profile: SpectrumProfile::Elliptic,
            count,
            seed,
            sigma: CorrectionSign::MINUS,
            opts: MaslovOptions::default(),
        }
    }

    #[test]
    fn empty_run() {
        let s = run_suite(&cfg(0, 1));
        assert!(s.all_passed());
        assert!(s
            .properties
            .iter()
            .all(|p| p.passed + p.failed + p.skipped == 0));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(run_suite(&cfg(3, 9)), run_suite(&cfg(3, 9)));
    }

    #[test]
    fn outcomes_by_property() {
        let s = run_suite(&cfg(4, 2));
        for p in &s.properties {
            if p.name == "hormander_formula" {
                assert_eq!(p.passed + p.failed + p.skipped, 4);
            } else {
                assert_eq!(p.failed, 0, "{p:?}");
            }
        }
    }
}
