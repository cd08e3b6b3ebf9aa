//! Seeded test ensembles: random symplectic matrices, Lagrangians and
//! Hamiltonian generators with prescribed spectral type.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{standard_j, vertical_lagrangian, HamiltonianMat, LagrangianFrame, SymplecticMat};
use crate::numerics::{matrix_exp, Mat, Tolerances};

/// Spectral type of a random Hamiltonian generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumProfile {
    /// `H = J S` for a random symmetric `S`.
    Generic,
    /// Rotation blocks conjugated by a random symplectic matrix.
    Elliptic,
    /// Hyperbolic blocks conjugated by a random symplectic matrix.
    Hyperbolic,
    /// Rotation, hyperbolic and loxodromic blocks, conjugated.
    Mixed,
}

impl SpectrumProfile {
    pub const ALL: [SpectrumProfile; 4] = [
        SpectrumProfile::Generic,
        SpectrumProfile::Elliptic,
        SpectrumProfile::Hyperbolic,
        SpectrumProfile::Mixed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SpectrumProfile::Generic => "generic",
            SpectrumProfile::Elliptic => "elliptic",
            SpectrumProfile::Hyperbolic => "hyperbolic",
            SpectrumProfile::Mixed => "mixed",
        }
    }
}

impl FromStr for SpectrumProfile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "generic" => Ok(SpectrumProfile::Generic),
            "elliptic" | "semisimple-elliptic" => Ok(SpectrumProfile::Elliptic),
            "hyperbolic" => Ok(SpectrumProfile::Hyperbolic),
            "mixed" => Ok(SpectrumProfile::Mixed),
            other => Err(format!(
                "unknown profile '{other}' (expected generic, elliptic, hyperbolic or mixed)"
            )),
        }
    }
}

/// One block of a generator in normal form. Rotation and hyperbolic blocks
/// occupy one coordinate pair `(x_j, y_j)`, loxodromic blocks two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GeneratorBlock {
    /// `α J₁`; the flow at time one is the rotation by `α`.
    Rotation(f64),
    /// `diag(β, -β)`; the flow at time one is `diag(e^β, e^{-β})`.
    Hyperbolic(f64),
    /// `diag(P, -Pᵀ)` with `P = growth·I + angle·J₁`; the flow at time one is
    /// the loxodromic block with modulus `e^growth`.
    Loxodromic { growth: f64, angle: f64 },
}

impl GeneratorBlock {
    pub fn pairs(&self) -> usize {
        match self {
            GeneratorBlock::Loxodromic { .. } => 2,
            _ => 1,
        }
    }
}

/// Block-diagonal generator in the standard coordinates; block `k` acts on
/// the next free coordinate pairs.
pub fn normal_form_generator(blocks: &[GeneratorBlock]) -> HamiltonianMat {
    let n: usize = blocks.iter().map(|b| b.pairs()).sum();
    let mut h = Mat::zeros(2 * n, 2 * n);
    let mut p = 0;
    for b in blocks {
        match *b {
            GeneratorBlock::Rotation(alpha) => {
                h[(p, n + p)] = -alpha;
                h[(n + p, p)] = alpha;
            }
            GeneratorBlock::Hyperbolic(beta) => {
                h[(p, p)] = beta;
                h[(n + p, n + p)] = -beta;
            }
            GeneratorBlock::Loxodromic { growth, angle } => {
                let (i, k) = (p, p + 1);
                // x-part P = [[g, -a], [a, g]]
                h[(i, i)] = growth;
                h[(k, k)] = growth;
                h[(i, k)] = -angle;
                h[(k, i)] = angle;
                // y-part -Pᵀ = [[-g, -a], [a, -g]]
                h[(n + i, n + i)] = -growth;
                h[(n + k, n + k)] = -growth;
                h[(n + i, n + k)] = -angle;
                h[(n + k, n + i)] = angle;
            }
        }
        p += b.pairs();
    }
    HamiltonianMat(h)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_symmetric<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Mat {
    let a = Mat::from_fn(dim, dim, |_, _| {
        rng.sample::<f64, _>(StandardNormal) * scale
    });
    (&a + a.transpose()) * 0.5
}

fn signed_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let v = rng.random_range(lo..hi);
    if rng.random_bool(0.5) {
        v
    } else {
        -v
    }
}

pub fn random_symplectic_with<R: Rng>(rng: &mut R, n: usize) -> SymplecticMat {
    let s = random_symmetric(rng, 2 * n, 0.3);
    let m = matrix_exp(&(standard_j(n) * s)).expect("finite square input");
    SymplecticMat(m)
}

/// `exp` of a random Hamiltonian matrix; deterministic per seed.
pub fn random_symplectic(n: usize, seed: u64) -> SymplecticMat {
    random_symplectic_with(&mut rng_for(seed), n)
}

pub fn random_lagrangian_with<R: Rng>(rng: &mut R, n: usize) -> LagrangianFrame {
    let m = random_symplectic_with(rng, n);
    m.apply(&vertical_lagrangian(n), &Tolerances::default())
        .expect("symplectic image of a Lagrangian")
}

/// A random symplectic matrix applied to the vertical Lagrangian.
pub fn random_lagrangian(n: usize, seed: u64) -> LagrangianFrame {
    random_lagrangian_with(&mut rng_for(seed), n)
}

fn rotation_block<R: Rng>(rng: &mut R) -> GeneratorBlock {
    GeneratorBlock::Rotation(signed_uniform(rng, 0.3, 2.0 * PI - 0.3))
}

fn hyperbolic_block<R: Rng>(rng: &mut R) -> GeneratorBlock {
    GeneratorBlock::Hyperbolic(signed_uniform(rng, 0.2, 1.5))
}

pub fn random_hamiltonian_with<R: Rng>(
    rng: &mut R,
    n: usize,
    profile: SpectrumProfile,
) -> HamiltonianMat {
    if profile == SpectrumProfile::Generic {
        let s = random_symmetric(rng, 2 * n, 0.8);
        return HamiltonianMat(standard_j(n) * s);
    }
    let mut blocks = Vec::new();
    let mut used = 0;
    while used < n {
        let block = match profile {
            SpectrumProfile::Elliptic => rotation_block(rng),
            SpectrumProfile::Hyperbolic => hyperbolic_block(rng),
            _ => {
                let roll: f64 = rng.random();
                if n - used >= 2 && roll < 0.25 {
                    GeneratorBlock::Loxodromic {
                        growth: signed_uniform(rng, 0.2, 1.0),
                        angle: signed_uniform(rng, 0.3, PI - 0.3),
                    }
                } else if roll < 0.6 {
                    rotation_block(rng)
                } else {
                    hyperbolic_block(rng)
                }
            }
        };
        used += block.pairs();
        blocks.push(block);
    }
    let h0 = normal_form_generator(&blocks);
    let t = random_symplectic_with(rng, n);
    h0.conjugate_by(&t)
}

/// Random Hamiltonian generator of the given spectral type; deterministic
/// per seed.
pub fn random_hamiltonian(n: usize, seed: u64, profile: SpectrumProfile) -> HamiltonianMat {
    random_hamiltonian_with(&mut rng_for(seed), n, profile)
}
