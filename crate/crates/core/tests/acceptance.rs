//! One line per acceptance criterion; the process fails if any line fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use maslov_core::autonomous::{
    calibrate_sign, maslov_spectral, maslov_via_formula, random_transversal_system_with,
    tau_worked_example, CorrectionSign, HamiltonianSystem,
};
use maslov_core::kashiwara::{
    kashiwara_index, kashiwara_reduced, kashiwara_transversal, random_triple_with_intersection,
};
use maslov_core::krein::krein_spectrum;
use maslov_core::maslov::{
    conley_zehnder, maslov_index_symplectic, rotation_index_closed_form, spectral_maslov, HalfInt,
    MaslovOptions,
};
use maslov_core::numerics::{smallest_singular_value, sym_signature, Mat, Tolerances};
use maslov_core::suite::{hormander_values, random_angles, rotation_blocks};
use maslov_core::symplectic::{
    normal_form_generator, random_hamiltonian_with, random_lagrangian_with, random_symplectic_with,
    vertical_lagrangian, GeneratorBlock, HamiltonianMat, LagrangianFrame, SpectrumProfile,
    SymplecticSpace,
};
use maslov_core::IndexError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const SYMMETRY_DEFECT: f64 = 1e-8;
const MIN_SIGMA_B: f64 = 1e-3;
const GRID: usize = 256;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn opts() -> MaslovOptions {
    MaslovOptions::default().with_grid(GRID)
}

fn tau(a: &LagrangianFrame, b: &LagrangianFrame, c: &LagrangianFrame) -> i64 {
    kashiwara_index(a.space(), a, b, c, &tol()).expect("triple index")
}

fn crit_rotation() -> Verdict {
    let alphas = [-7.0, -2.0, 0.5, 2.0, 2.0 * PI, 5.0, 3.0 * PI, 8.0];
    let mut bad = Vec::new();
    for a in alphas {
        let h = HamiltonianMat::rotation(1, a);
        let got = maslov_index_symplectic(&h, &vertical_lagrangian(1), &opts());
        let want = rotation_index_closed_form(a);
        if got.as_ref() != Ok(&want) {
            bad.push(format!("alpha {a}: {got:?} vs {want}"));
        }
    }
    verdict(
        bad.is_empty(),
        format!("{} angles, mismatches {bad:?}", alphas.len()),
    )
}

fn crit_kashiwara_axioms() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    let mut failures = Vec::new();
    for i in 0..200 {
        let n = 1 + i % 3;
        let [a, b, c] = [0, 1, 2].map(|_| random_lagrangian_with(&mut rng, n));
        let t = tau(&a, &b, &c);
        let perms = [
            (tau(&a, &b, &c), 1),
            (tau(&b, &c, &a), 1),
            (tau(&c, &a, &b), 1),
            (tau(&b, &a, &c), -1),
            (tau(&a, &c, &b), -1),
            (tau(&c, &b, &a), -1),
        ];
        if perms.iter().any(|&(v, s)| v != s * t) {
            failures.push(format!("skew triple {i}"));
        }
    }
    for i in 0..50 {
        let (n, m) = (1 + i % 3, 1 + (i / 3) % 3);
        let xs = [0, 1, 2].map(|_| random_lagrangian_with(&mut rng, n));
        let ys = [0, 1, 2].map(|_| random_lagrangian_with(&mut rng, m));
        let s: Vec<_> = xs.iter().zip(&ys).map(|(x, y)| x.direct_sum(y)).collect();
        if tau(&s[0], &s[1], &s[2]) != tau(&xs[0], &xs[1], &xs[2]) + tau(&ys[0], &ys[1], &ys[2]) {
            failures.push(format!("additivity pair {i}"));
        }
    }
    for i in 0..200 {
        let n = 1 + i % 3;
        let ls = [0, 1, 2].map(|_| random_lagrangian_with(&mut rng, n));
        let phi = random_symplectic_with(&mut rng, n);
        let moved: Vec<_> = ls.iter().map(|l| phi.apply(l, &tol()).unwrap()).collect();
        if tau(&moved[0], &moved[1], &moved[2]) != tau(&ls[0], &ls[1], &ls[2]) {
            failures.push(format!("invariance conjugation {i}"));
        }
    }
    let line = |t: f64| {
        LagrangianFrame::new(
            SymplecticSpace::standard(1),
            Mat::from_column_slice(2, 1, &[t.cos(), t.sin()]),
            &tol(),
        )
        .unwrap()
    };
    let p4 = tau(&line(0.0), &line(PI / 4.0), &line(PI / 2.0));
    if p4 != 1 {
        failures.push(format!("normalization gives {p4}"));
    }
    verdict(
        failures.is_empty(),
        format!(
            "skew 1200, additivity 50, invariance 200, normalization = {p4}; failures {failures:?}"
        ),
    )
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let a = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&a + a.transpose()) * 0.5
}

fn crit_transversal() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    let (mut done, mut bad) = (0, 0);
    while done < 100 {
        let n = 1 + done % 5;
        let a = random_symmetric(&mut rng, n);
        if smallest_singular_value(&a) < 1e-3 {
            continue;
        }
        let sign = sym_signature(&a, &tol()).unwrap().signature();
        if kashiwara_transversal(&a, &tol()) != Ok(sign) {
            bad += 1;
        }
        done += 1;
    }
    verdict(bad == 0, format!("100 matrices, {bad} mismatches"))
}

fn crit_x_symmetry() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4);
    let (mut done, mut worst) = (0, 0.0_f64);
    while done < 100 {
        let n = 1 + done % 5;
        let m = random_symplectic_with(&mut rng, n);
        let (a, b, c, d) = m.blocks();
        if smallest_singular_value(&b) <= MIN_SIGMA_B {
            continue;
        }
        let i = Mat::identity(n, n);
        let x = (&i - &d) * b.lu().solve(&(&i - &a)).unwrap() - c;
        worst = worst.max((&x - x.transpose()).norm());
        done += 1;
    }
    verdict(
        worst < SYMMETRY_DEFECT,
        format!("100 matrices, worst defect {worst:.3e} (bound {SYMMETRY_DEFECT:e})"),
    )
}

fn h_systems(count: usize, seed: u64) -> Vec<HamiltonianSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let profile = SpectrumProfile::ALL[i % 4];
            random_transversal_system_with(&mut rng, 1 + i % 3, profile, MIN_SIGMA_B, &tol())
        })
        .collect()
}

fn crit_reduction() -> Verdict {
    let mut bad = Vec::new();
    for (i, sys) in h_systems(50, 0xA5).iter().enumerate() {
        match tau_worked_example(sys, &tol()) {
            Ok(t) if t.direct == t.reduced => {}
            other => bad.push(format!("system {i}: {other:?}")),
        }
    }
    for seed in 0..50u64 {
        let (a, b, c, k) = random_triple_with_intersection(1 + seed as usize % 3, seed);
        if kashiwara_reduced(a.space(), &a, &b, &c, &k, &tol()) != Ok(tau(&a, &b, &c)) {
            bad.push(format!("engineered {seed}"));
        }
    }
    verdict(
        bad.is_empty(),
        format!("50 systems + 50 triples; failures {bad:?}"),
    )
}

fn crit_sign_y() -> Verdict {
    let mut bad = Vec::new();
    for (i, sys) in h_systems(50, 0xA5).iter().enumerate() {
        match tau_worked_example(sys, &tol()) {
            Ok(t) if t.sign_x == t.sign_y => {}
            other => bad.push(format!("system {i}: {other:?}")),
        }
    }
    verdict(bad.is_empty(), format!("50 systems; failures {bad:?}"))
}

fn crit_hormander() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA7);
    let (mut constant, mut equal, mut negated, mut errors) = (0, 0, 0, Vec::new());
    for i in 0..20 {
        match hormander_values(&mut rng, 1 + i % 2, &opts()) {
            Ok((values, formula)) => {
                if values.iter().all(|v| *v == values[0]) {
                    constant += 1;
                }
                if values.iter().all(|v| *v == formula) {
                    equal += 1;
                }
                if values.iter().all(|v| *v == -formula) {
                    negated += 1;
                }
            }
            Err(e) => errors.push(format!("quadruple {i}: {e}")),
        }
    }
    verdict(
        constant == 20 && equal == 20,
        format!(
            "20 quadruples x 5 paths: path-independent {constant}/20, equal to the four-fold \
             formula {equal}/20, equal to its negative {negated}/20; errors {errors:?}"
        ),
    )
}

fn crit_calibration() -> Verdict {
    match calibrate_sign(&opts()) {
        Ok(c) => {
            let rows: Vec<String> = c
                .probes
                .iter()
                .map(|p| {
                    format!(
                        "alpha {}: ({}, {}, {:+})",
                        p.alpha, p.mu_path, p.mu_cz, p.sign_xtilde
                    )
                })
                .collect();
            verdict(
                c.sigma == CorrectionSign::MINUS,
                format!(
                    "sigma = {} (printed sign {}); {}",
                    c.sigma,
                    c.printed,
                    rows.join("; ")
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn sigma() -> CorrectionSign {
    calibrate_sign(&opts()).map(|c| c.sigma).unwrap_or_default()
}

fn crit_closed_formula() -> Verdict {
    let s = sigma();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA9);
    let (mut done, mut rejected, mut bad) = (0, 0, Vec::new());
    while done < 50 {
        let n = 1 + done % 4;
        let profile = if done % 2 == 0 {
            SpectrumProfile::Elliptic
        } else {
            SpectrumProfile::Mixed
        };
        let sys = random_transversal_system_with(&mut rng, n, profile, MIN_SIGMA_B, &tol());
        if !maslov_core::krein::is_semisimple(sys.hamiltonian().matrix(), &tol()) {
            rejected += 1;
            continue;
        }
        let path =
            match maslov_index_symplectic(sys.hamiltonian(), &vertical_lagrangian(n), &opts()) {
                Ok(v) => v,
                Err(IndexError::NonRegularCrossing { .. }) => {
                    rejected += 1;
                    continue;
                }
                Err(e) => {
                    bad.push(format!("system {done}: {e}"));
                    done += 1;
                    continue;
                }
            };
        match maslov_via_formula(&sys, s, &opts()) {
            Ok(f) if f == path => {}
            other => bad.push(format!("system {done}: path {path}, formula {other:?}")),
        }
        done += 1;
    }
    verdict(
        bad.is_empty(),
        format!("50 systems (n = 1..4, {rejected} rejected), sigma {s}; failures {bad:?}"),
    )
}

fn crit_loop() -> Verdict {
    let cases: [&[f64]; 4] = [
        &[2.0 * PI],
        &[2.0 * PI, 4.0 * PI],
        &[4.0 * PI],
        &[2.0 * PI, 2.0 * PI, 6.0 * PI],
    ];
    let mut bad = Vec::new();
    let mut first = None;
    for angles in cases {
        let h = rotation_blocks(angles);
        let n = angles.len();
        let path = maslov_index_symplectic(&h, &vertical_lagrangian(n), &opts());
        let cz = conley_zehnder(&h, &opts());
        first.get_or_insert(path.clone());
        if path.is_err() || path != cz {
            bad.push(format!("{angles:?}: path {path:?}, cz {cz:?}"));
        }
    }
    let two = first == Some(Ok(HalfInt::from_int(2)));
    let shown = match first {
        Some(Ok(v)) => v.to_string(),
        other => format!("{other:?}"),
    };
    verdict(
        bad.is_empty() && two,
        format!(
            "{} loops, 2piJ gives {shown}; failures {bad:?}",
            cases.len()
        ),
    )
}

fn crit_spectral() -> Verdict {
    let s = sigma();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAB);
    let (mut g_checked, mut bad) = (0, Vec::new());
    for i in 0..30 {
        let n = 1 + i % 3;
        let h = rotation_blocks(&random_angles(&mut rng, n));
        let path = maslov_index_symplectic(&h, &vertical_lagrangian(n), &opts());
        let f = spectral_maslov(&h, &tol());
        if path.is_err() || f != path {
            bad.push(format!("system {i}: f {f:?} vs path {path:?}"));
            continue;
        }
        let sys = HamiltonianSystem::new(h, &tol()).unwrap();
        if maslov_core::autonomous::transversality_h(&sys, &tol()) && sys.is_nondegenerate(&tol()) {
            g_checked += 1;
            let g = maslov_spectral(&sys, s, &tol());
            if g != path {
                bad.push(format!("system {i}: g {g:?} vs path {path:?}"));
            }
        }
    }
    verdict(
        bad.is_empty() && g_checked > 0,
        format!("30 systems, g-route applicable on {g_checked}; failures {bad:?}"),
    )
}

fn crit_zero() -> Verdict {
    let cases = vec![
        vec![GeneratorBlock::Hyperbolic(0.7)],
        vec![GeneratorBlock::Hyperbolic(-1.3)],
        vec![GeneratorBlock::Loxodromic {
            growth: 0.5,
            angle: 1.1,
        }],
        vec![GeneratorBlock::Loxodromic {
            growth: -0.8,
            angle: 2.4,
        }],
        vec![
            GeneratorBlock::Hyperbolic(0.4),
            GeneratorBlock::Loxodromic {
                growth: 0.3,
                angle: 0.6,
            },
        ],
    ];
    let mut bad = Vec::new();
    for blocks in &cases {
        let h = normal_form_generator(blocks);
        let got = maslov_index_symplectic(&h, &vertical_lagrangian(h.half_dim()), &opts());
        if got != Ok(HalfInt::ZERO) {
            bad.push(format!("{blocks:?}: {got:?}"));
        }
    }
    verdict(
        bad.is_empty(),
        format!("{} generators; failures {bad:?}", cases.len()),
    )
}

fn crit_krein() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAD);
    let mut bad = Vec::new();
    for i in 0..50 {
        let h = random_hamiltonian_with(&mut rng, 1 + i % 3, SpectrumProfile::Elliptic);
        let m = h.flow(1.0, &tol()).unwrap();
        let rows = match krein_spectrum(&m, &tol()) {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("matrix {i}: {e}"));
                continue;
            }
        };
        for r in rows
            .iter()
            .filter(|r| r.on_unit_circle && r.im.abs() > 1e-6)
        {
            let partner = rows
                .iter()
                .find(|s| (s.re - r.re).abs() < 1e-6 && (s.im + r.im).abs() < 1e-6);
            let ok = match (r.krein, partner.and_then(|p| p.krein)) {
                (Some(a), Some(b)) => a.n_pos == b.n_neg && a.n_neg == b.n_pos,
                _ => false,
            };
            if !ok {
                bad.push(format!("matrix {i} at {}+{}i", r.re, r.im));
            }
        }
    }
    verdict(bad.is_empty(), format!("50 matrices; failures {bad:?}"))
}

type Criterion = (&'static str, u64, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 13] = [
        ("rotation closed form", 1, crit_rotation),
        ("Kashiwara axioms", 10, crit_kashiwara_axioms),
        ("transversal formula", 2, crit_transversal),
        ("symmetry of (I-D)B^-1(I-A) - C", 2, crit_x_symmetry),
        ("reduction", 10, crit_reduction),
        ("sign Y = sign X", 5, crit_sign_y),
        (
            "Hormander path independence and four-fold formula",
            30,
            crit_hormander,
        ),
        ("sign calibration", 1, crit_calibration),
        ("closed formula, calibrated", 60, crit_closed_formula),
        ("loop case", 5, crit_loop),
        ("spectral formulas", 30, crit_spectral),
        ("zero property", 2, crit_zero),
        ("Krein pairing", 5, crit_krein),
    ];
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let ok = v.ok && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {name} ({:.2}s, budget {budget}s{}): {}",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" },
            v.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
