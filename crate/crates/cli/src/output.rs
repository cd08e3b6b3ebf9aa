//! Report documents and their text renderings. Every JSON document parses
//! back into its type and re-renders to the same bytes.

use maslov_core::autonomous::{Calibration, IndexReport};
use maslov_core::krein::{KreinEigenvalue, NormalFormBlock};
use maslov_core::maslov::HalfInt;
use maslov_core::numerics::Inertia;
use maslov_core::suite::SuiteSummary;
use serde::{Deserialize, Serialize};

use crate::lines;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSource {
    Calibrated,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexOutput {
    pub schema_version: String,
    pub sigma_source: SigmaSource,
    pub reports: Vec<IndexReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KashiwaraOutput {
    pub schema_version: String,
    pub tau: Option<i64>,
    pub inertia: Option<Inertia>,
    pub hormander: Option<HalfInt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KreinOutput {
    pub schema_version: String,
    pub eigenvalues: Vec<KreinEigenvalue>,
    pub blocks: Option<Vec<NormalFormBlock>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutput {
    pub schema_version: String,
    pub sigma_source: SigmaSource,
    pub summary: SuiteSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrateOutput {
    pub schema_version: String,
    pub calibration: Calibration,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref()
        .map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn index_text(out: &IndexOutput) -> String {
    let mut parts = Vec::new();
    for (i, r) in out.reports.iter().enumerate() {
        if out.reports.len() > 1 {
            parts.push(format!("system {}", i + 1));
        }
        let source = match out.sigma_source {
            SigmaSource::Calibrated => "calibrated",
            SigmaSource::Fixed => "fixed",
        };
        parts.push(format!(
            "n = {}  sigma = {} ({source}; printed {})",
            r.n, r.sigma, r.printed_sigma
        ));
        parts.push(format!(
            "(H) {}  nondegenerate {}  block normal form {}",
            r.transversal_h, r.nondegenerate, r.block_normal_form
        ));
        if r.loop_case {
            parts.push("loop case: psi(1) = I, correction term absent".to_string());
        }
        parts.push(format!("mu_path       {}", opt(&r.mu_path)));
        parts.push(format!("mu_cz         {}", opt(&r.mu_cz)));
        parts.push(format!("sign Xtilde   {}", opt(&r.sign_xtilde)));
        parts.push(format!("mu_formula    {}", opt(&r.mu_formula)));
        parts.push(format!("mu_spectral_f {}", opt(&r.mu_spectral_f)));
        parts.push(format!("mu_spectral_g {}", opt(&r.mu_spectral_g)));
        for a in r.agreements() {
            let mark = if a.agree { "agree" } else { "DISAGREE" };
            parts.push(format!("  {} vs {}: {mark}", a.left, a.right));
        }
        for (route, e) in &r.errors {
            parts.push(format!("  error in {route}: {e}"));
        }
        parts.push(format!("agreement {}", r.all_agree()));
    }
    lines(&parts)
}

pub fn kashiwara_text(out: &KashiwaraOutput) -> String {
    let mut parts = Vec::new();
    if let (Some(t), Some(i)) = (out.tau, out.inertia) {
        parts.push(format!(
            "tau = {t}  (p, q, z) = ({}, {}, {})",
            i.n_pos, i.n_neg, i.n_zero
        ));
    }
    if let Some(h) = out.hormander {
        parts.push(format!("s = {h}"));
    }
    lines(&parts)
}

pub fn krein_text(out: &KreinOutput) -> String {
    let mut parts = vec![format!(
        "{:>24}  {:>4}  {:>4}  krein",
        "eigenvalue", "alg", "geo"
    )];
    for e in &out.eigenvalues {
        let krein = e.krein.map_or_else(
            || "-".to_string(),
            |k| format!("({}, {})", k.n_pos, k.n_neg),
        );
        parts.push(format!(
            "{:>24}  {:>4}  {:>4}  {krein}",
            format!("{:.6}{:+.6}i", e.re, e.im),
            e.algebraic_multiplicity,
            e.geometric_multiplicity
        ));
    }
    if let Some(blocks) = &out.blocks {
        let names: Vec<String> = blocks.iter().map(|b| b.to_string()).collect();
        parts.push(format!("blocks: {}", names.join(", ")));
    }
    for w in &out.warnings {
        parts.push(format!("warning: {w}"));
    }
    lines(&parts)
}

pub fn check_text(out: &CheckOutput) -> String {
    let s = &out.summary;
    let mut parts = vec![format!(
        "ensemble {}  count {}  seed {}  sigma {}",
        s.profile.name(),
        s.count,
        s.seed,
        s.sigma
    )];
    for p in &s.properties {
        parts.push(format!(
            "{:<28} pass {:>4}  fail {:>4}  skip {:>4}",
            p.name, p.passed, p.failed, p.skipped
        ));
        if let Some(f) = &p.first_failure {
            parts.push(format!("    first failure: {f}"));
        }
    }
    parts.push(format!("all passed {}", s.all_passed()));
    lines(&parts)
}

pub fn calibrate_text(out: &CalibrateOutput) -> String {
    let c = &out.calibration;
    let mut parts = vec![
        format!("sigma = {}  (printed sign {})", c.sigma, c.printed),
        format!(
            "{:>6}  {:>7}  {:>5}  {:>11}",
            "alpha", "mu_path", "mu_cz", "sign Xtilde"
        ),
    ];
    for p in &c.probes {
        parts.push(format!(
            "{:>6.2}  {:>7}  {:>5}  {:>11}",
            p.alpha,
            p.mu_path.to_string(),
            p.mu_cz.to_string(),
            format!("{:+}", p.sign_xtilde)
        ));
    }
    lines(&parts)
}
