//! Command-line front end for the index computations.

pub mod input;
pub mod output;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use maslov_core::autonomous::{calibrate_sign, validate, CorrectionSign, HamiltonianSystem};
use maslov_core::kashiwara::{hormander_index, kashiwara_index_full};
use maslov_core::krein::{classify_normal_form, is_semisimple, krein_spectrum};
use maslov_core::maslov::MaslovOptions;
use maslov_core::numerics::Tolerances;
use maslov_core::suite::{run_suite, SuiteConfig};
use maslov_core::symplectic::{random_hamiltonian, SpectrumProfile, SymplecticMat};
use maslov_core::IndexError;

use input::{parse_document, Payload, SCHEMA_VERSION};
use output::{
    CalibrateOutput, CheckOutput, IndexOutput, KashiwaraOutput, KreinOutput, SigmaSource,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DISAGREE: i32 = 2;
pub const EXIT_CALIBRATION: i32 = 3;

const INPUT_HELP: &str = "\
Input files hold one JSON object with \"schema_version\": \"1\" and exactly one payload:
  {\"n\": N, \"H\": [...]}        Hamiltonian generator, 2N x 2N, row-major
  {\"n\": N, \"psi1\": [...]}     symplectic matrix, 2N x 2N, row-major
  {\"n\": N, \"frames\": [[...]]} Lagrangian frames, each 2N x N, column-major
  {\"ensemble\": P, \"count\": K, \"seed\": S}
                                 P is generic, elliptic, hyperbolic or mixed

Exit codes: 0 routes agree, 1 input error, 2 route disagreement or failed
property, 3 sign calibration failure.";

#[derive(Debug, Parser)]
#[command(
    name = "maslov",
    version,
    about = "Maslov, Conley-Zehnder, Krein and Kashiwara indices"
)]
#[command(after_help = INPUT_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Grid intervals for crossing detection (at least 64).
    #[arg(long, global = true, default_value_t = 256)]
    pub grid: usize,
    /// Base relative tolerance; rank tests use it, form tests use ten times it.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every applicable route to the index of e^{tH}L₀, cross-checked.
    Index {
        file: PathBuf,
        /// auto (calibrated), +1 or -1.
        #[arg(long, default_value = "auto", allow_hyphen_values = true)]
        sigma: String,
    },
    /// Kashiwara index of three frames or Hörmander index of four.
    Kashiwara { file: PathBuf },
    /// Eigenvalues of ψ(1) (or e^H) with Krein inertia and block types.
    Krein { file: PathBuf },
    /// Seeded property sweep over a random ensemble.
    Check {
        #[arg(long, default_value = "mixed")]
        ensemble: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// auto (calibrated), +1 or -1.
        #[arg(long, default_value = "auto", allow_hyphen_values = true)]
        sigma: String,
    },
    /// Determines the correction sign from the rotation probes.
    Calibrate,
}

/// Exit code and the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        stderr.push('\n');
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

struct Settings {
    opts: MaslovOptions,
    format: Format,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome::ok(EXIT_OK, text)
            } else {
                Outcome::fail(EXIT_INPUT, text.trim_end())
            };
        }
    };
    let tol = match Tolerances::scaled(cli.tol) {
        Ok(t) => t,
        Err(e) => return Outcome::fail(EXIT_INPUT, format!("--tol: {e}")),
    };
    if cli.grid < 64 {
        return Outcome::fail(
            EXIT_INPUT,
            format!("--grid: {}", IndexError::GridTooSmall(cli.grid)),
        );
    }
    let settings = Settings {
        opts: MaslovOptions {
            grid_n: cli.grid,
            tol,
            ..MaslovOptions::default()
        },
        format: cli.format,
    };
    match cli.command {
        Command::Index { file, sigma } => cmd_index(&file, &sigma, &settings),
        Command::Kashiwara { file } => cmd_kashiwara(&file, &settings),
        Command::Krein { file } => cmd_krein(&file, &settings),
        Command::Check {
            ensemble,
            count,
            seed,
            sigma,
        } => cmd_check(&ensemble, count, seed, &sigma, &settings),
        Command::Calibrate => cmd_calibrate(&settings),
    }
}

fn render<T: serde::Serialize>(value: &T, format: Format, text: impl FnOnce() -> String) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("output serializes");
            s.push('\n');
            s
        }
        Format::Text => text(),
    }
}

fn load(file: &PathBuf, tol: &Tolerances) -> Result<Payload, Outcome> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Outcome::fail(EXIT_INPUT, format!("{}: {e}", file.display())))?;
    parse_document(&text, tol)
        .map_err(|e| Outcome::fail(EXIT_INPUT, format!("{}: {e}", file.display())))
}

fn resolve_sigma(
    arg: &str,
    opts: &MaslovOptions,
) -> Result<(CorrectionSign, SigmaSource), Outcome> {
    if arg == "auto" {
        return calibrate_sign(opts)
            .map(|c| (c.sigma, SigmaSource::Calibrated))
            .map_err(|e| Outcome::fail(EXIT_CALIBRATION, e.to_string()));
    }
    arg.parse::<CorrectionSign>()
        .map(|s| (s, SigmaSource::Fixed))
        .map_err(|e| Outcome::fail(EXIT_INPUT, format!("--sigma: {e}")))
}

fn cmd_index(file: &PathBuf, sigma: &str, s: &Settings) -> Outcome {
    let payload = match load(file, &s.opts.tol) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let (sigma, source) = match resolve_sigma(sigma, &s.opts) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let generators = match payload {
        Payload::Hamiltonian(h) => vec![h],
        Payload::Ensemble {
            profile,
            count,
            seed,
        } => (0..count as u64)
            .map(|i| random_hamiltonian(1 + (i % 3) as usize, seed.wrapping_add(i), profile))
            .collect(),
        other => {
            return Outcome::fail(
                EXIT_INPUT,
                format!("index needs an H or ensemble payload, got {}", other.kind()),
            )
        }
    };
    let mut reports = Vec::with_capacity(generators.len());
    for h in generators {
        match HamiltonianSystem::new(h, &s.opts.tol) {
            Ok(sys) => reports.push(validate(&sys, sigma, &s.opts)),
            Err(e) => return Outcome::fail(EXIT_INPUT, e.to_string()),
        }
    }
    let out = IndexOutput {
        schema_version: SCHEMA_VERSION.to_string(),
        sigma_source: source,
        reports,
    };
    let code = if out.reports.iter().all(|r| r.all_agree()) {
        EXIT_OK
    } else {
        EXIT_DISAGREE
    };
    Outcome::ok(code, render(&out, s.format, || output::index_text(&out)))
}

fn cmd_kashiwara(file: &PathBuf, s: &Settings) -> Outcome {
    let tol = &s.opts.tol;
    let frames = match load(file, tol) {
        Ok(Payload::Frames(f)) => f,
        Ok(other) => {
            return Outcome::fail(
                EXIT_INPUT,
                format!("kashiwara needs a frames payload, got {}", other.kind()),
            )
        }
        Err(o) => return o,
    };
    let out = match frames.as_slice() {
        [a, b, c] => kashiwara_index_full(a.space(), a, b, c, tol).map(|k| KashiwaraOutput {
            schema_version: SCHEMA_VERSION.to_string(),
            tau: Some(k.value),
            inertia: Some(k.inertia),
            hormander: None,
        }),
        [a, b, c, d] => hormander_index(a, b, c, d, tol).map(|h| KashiwaraOutput {
            schema_version: SCHEMA_VERSION.to_string(),
            tau: None,
            inertia: None,
            hormander: Some(h),
        }),
        other => {
            return Outcome::fail(
                EXIT_INPUT,
                format!("kashiwara needs 3 or 4 frames, got {}", other.len()),
            )
        }
    };
    match out {
        Ok(out) => Outcome::ok(
            EXIT_OK,
            render(&out, s.format, || output::kashiwara_text(&out)),
        ),
        Err(e) => Outcome::fail(EXIT_INPUT, e.to_string()),
    }
}

fn cmd_krein(file: &PathBuf, s: &Settings) -> Outcome {
    let tol = &s.opts.tol;
    let m: SymplecticMat = match load(file, tol) {
        Ok(Payload::Monodromy(m)) => m,
        Ok(Payload::Hamiltonian(h)) => match h.flow(1.0, tol) {
            Ok(m) => m,
            Err(e) => return Outcome::fail(EXIT_INPUT, e.to_string()),
        },
        Ok(other) => {
            return Outcome::fail(
                EXIT_INPUT,
                format!("krein needs a psi1 or H payload, got {}", other.kind()),
            )
        }
        Err(o) => return o,
    };
    let mut warnings = Vec::new();
    if !is_semisimple(m.matrix(), tol) {
        warnings.push(IndexError::NotSemisimple.to_string());
    }
    let rows = match krein_spectrum(&m, tol) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(EXIT_INPUT, e.to_string()),
    };
    let blocks = match classify_normal_form(&m, tol) {
        Ok(b) => Some(b),
        Err(e) => {
            if !warnings.contains(&e.to_string()) {
                warnings.push(e.to_string());
            }
            None
        }
    };
    let out = KreinOutput {
        schema_version: SCHEMA_VERSION.to_string(),
        eigenvalues: rows,
        blocks,
        warnings,
    };
    Outcome::ok(EXIT_OK, render(&out, s.format, || output::krein_text(&out)))
}

fn cmd_check(ensemble: &str, count: usize, seed: u64, sigma: &str, s: &Settings) -> Outcome {
    let profile = match ensemble.parse::<SpectrumProfile>() {
        Ok(p) => p,
        Err(e) => return Outcome::fail(EXIT_INPUT, format!("--ensemble: {e}")),
    };
    let (sigma, source) = match resolve_sigma(sigma, &s.opts) {
        Ok(v) => v,
        Err(o) => return o,
    };
    let summary = run_suite(&SuiteConfig {
        profile,
        count,
        seed,
        sigma,
        opts: s.opts,
    });
    let out = CheckOutput {
        schema_version: SCHEMA_VERSION.to_string(),
        sigma_source: source,
        summary,
    };
    let code = if out.summary.all_passed() {
        EXIT_OK
    } else {
        EXIT_DISAGREE
    };
    Outcome::ok(code, render(&out, s.format, || output::check_text(&out)))
}

fn cmd_calibrate(s: &Settings) -> Outcome {
    match calibrate_sign(&s.opts) {
        Ok(calibration) => {
            let out = CalibrateOutput {
                schema_version: SCHEMA_VERSION.to_string(),
                calibration,
            };
            Outcome::ok(
                EXIT_OK,
                render(&out, s.format, || output::calibrate_text(&out)),
            )
        }
        Err(e) => Outcome::fail(EXIT_CALIBRATION, e.to_string()),
    }
}

/// Joins lines with a trailing newline.
pub(crate) fn lines(parts: &[String]) -> String {
    let mut s = String::new();
    for p in parts {
        let _ = writeln!(s, "{p}");
    }
    s
}
