//! Symmetric random matrix ensembles and entry-law diagnostics.
//!
//! Five entry laws are supported:
//!
//! * `Levy` — symmetric Pareto tails `P(|x| ≥ u) = min(1, u^{−α})`,
//!   scaled by `a_n = n^{1/α}` and multiplied by `σ`;
//! * `ExplodingMoments` — entries `±√(x_i/n)` with probability
//!   `w_i/(2n)` per atom `(w_i, x_i)` of a finite atomic measure, else 0;
//! * `ErdosRenyi` — Bernoulli(p/n) recentered by `−p/n` (a special case
//!   of the previous law up to recentering, with `m = p·δ₁`);
//! * `GaussianBaseline` — centered normal entries with variance `σ²/n`
//!   (light-tail control case);
//! * `PermutationBaseline` — the permutation matrix of a uniform random
//!   permutation, used directly as a bistochastic matrix downstream.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which matrix law to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleKind {
    Levy,
    ExplodingMoments,
    ErdosRenyi,
    GaussianBaseline,
    PermutationBaseline,
}

/// One atom `(weight, location)` of the measure `m` of an
/// exploding-moments model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub weight: f64,
    pub location: f64,
}

/// Full description of a matrix law: kind, parameters, and base seed.
///
/// Together with a dimension `n` and a replicate index this determines
/// the sampled matrix exactly (reproducibility contract).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    /// Tail index, Lévy only; must lie in (0, 2).
    #[serde(default)]
    pub alpha: f64,
    /// Scale, Lévy and Gaussian; must be positive.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Mean degree, Erdős–Rényi only; must be positive.
    #[serde(default)]
    pub p: f64,
    /// Atomic measure `m`, exploding-moments only.
    #[serde(default)]
    pub m_atoms: Vec<Atom>,
    /// Base seed; replicate streams are derived from it.
    pub seed: u64,
}

fn default_sigma() -> f64 {
    1.0
}

impl EnsembleSpec {
    pub fn levy(alpha: f64, sigma: f64, seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::Levy,
            alpha,
            sigma,
            p: 0.0,
            m_atoms: Vec::new(),
            seed,
        }
    }

    pub fn exploding_moments(m_atoms: Vec<Atom>, seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::ExplodingMoments,
            alpha: 0.0,
            sigma: 1.0,
            p: 0.0,
            m_atoms,
            seed,
        }
    }

    pub fn erdos_renyi(p: f64, seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::ErdosRenyi,
            alpha: 0.0,
            sigma: 1.0,
            p,
            m_atoms: Vec::new(),
            seed,
        }
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::GaussianBaseline,
            alpha: 0.0,
            sigma,
            p: 0.0,
            m_atoms: Vec::new(),
            seed,
        }
    }

    pub fn permutation(seed: u64) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::PermutationBaseline,
            alpha: 0.0,
            sigma: 1.0,
            p: 0.0,
            m_atoms: Vec::new(),
            seed,
        }
    }

    /// Validate parameter ranges for the chosen kind.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            EnsembleKind::Levy => {
                if !(self.alpha > 0.0 && self.alpha < 2.0) {
                    return Err(Error::Parameter(format!(
                        "Levy requires alpha in (0,2), got {}",
                        self.alpha
                    )));
                }
                if !(self.sigma > 0.0) {
                    return Err(Error::Parameter(format!(
                        "Levy requires sigma > 0, got {}",
                        self.sigma
                    )));
                }
            }
            EnsembleKind::ErdosRenyi => {
                if !(self.p > 0.0) {
                    return Err(Error::Parameter(format!(
                        "ErdosRenyi requires p > 0, got {}",
                        self.p
                    )));
                }
            }
            EnsembleKind::ExplodingMoments => {
                if self.m_atoms.is_empty() {
                    return Err(Error::Parameter(
                        "ExplodingMoments requires a nonempty atom list".into(),
                    ));
                }
                let total: f64 = self.m_atoms.iter().map(|a| a.weight).sum();
                if !(total > 0.0) {
                    return Err(Error::Parameter(
                        "ExplodingMoments requires total atom weight > 0".into(),
                    ));
                }
                for a in &self.m_atoms {
                    if a.weight < 0.0 || a.location < 0.0 {
                        return Err(Error::Parameter(format!(
                            "ExplodingMoments atom with negative weight or location: ({}, {})",
                            a.weight, a.location
                        )));
                    }
                }
            }
            EnsembleKind::GaussianBaseline => {
                if !(self.sigma > 0.0) {
                    return Err(Error::Parameter(format!(
                        "GaussianBaseline requires sigma > 0, got {}",
                        self.sigma
                    )));
                }
            }
            EnsembleKind::PermutationBaseline => {}
        }
        Ok(())
    }

    /// Deterministic per-replicate RNG: a single base seed with a
    /// distinct counter stream per replicate, so replicates are
    /// independent and order-insensitive.
    pub fn rng(&self, replicate_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate_index);
        rng
    }
}

/// A dense symmetric matrix in full row-major storage.
///
/// The mirror halves are written from the same value, so symmetry is
/// exact bit-for-bit.  (`PermutationBaseline` output is the sampled
/// permutation matrix and is the one deliberate exception; it bypasses
/// eigendecomposition entirely.)
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    pub n: usize,
    /// Row-major n×n entries.
    pub entries: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..i {
                if self.entries[i * n + j].to_bits() != self.entries[j * n + i].to_bits() {
                    return false;
                }
            }
        }
        true
    }

    /// Max-absolute-entry norm (diagnostics).
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

/// Draw one entry of the (scaled) matrix law at dimension `n`.
fn sample_entry<R: Rng>(spec: &EnsembleSpec, n: usize, rng: &mut R) -> f64 {
    let nf = n as f64;
    match spec.kind {
        EnsembleKind::Levy => {
            // |x| = (1−U)^{−1/α} is Pareto with P(|x| ≥ u) = min(1, u^{−α});
            // scale by a_n = n^{1/α} and σ.
            let u: f64 = rng.gen::<f64>();
            let mag = (1.0 - u).powf(-1.0 / spec.alpha);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            spec.sigma * sign * mag / nf.powf(1.0 / spec.alpha)
        }
        EnsembleKind::ErdosRenyi => {
            let b = if rng.gen::<f64>() < spec.p / nf { 1.0 } else { 0.0 };
            b - spec.p / nf
        }
        EnsembleKind::ExplodingMoments => {
            // ±√(x_i) with probability w_i/(2n·x_i) each; 0 otherwise.
            // This is the law with n·E[a^{2k}] → Σ w_i x_i^{k−1} = ∫x^{k−1}dm
            // and n(E[e^{−iλa²}]−1) → Σ w_i (e^{−iλx_i}−1)/x_i, and it reduces
            // to the (sign-symmetrized) Bernoulli(p/n) law for m = p·δ₁.
            // Atoms at x = 0 carry no entry mass at finite n (they encode the
            // Gaussian component of the limit and only enter through Φ).
            let u: f64 = rng.gen::<f64>();
            let mut acc = 0.0;
            for a in &spec.m_atoms {
                if a.location == 0.0 {
                    continue;
                }
                let half = a.weight / (2.0 * nf * a.location);
                if u < acc + half {
                    return a.location.sqrt();
                }
                if u < acc + 2.0 * half {
                    return -a.location.sqrt();
                }
                acc += 2.0 * half;
            }
            0.0
        }
        EnsembleKind::GaussianBaseline => {
            let g: f64 = StandardNormal.sample(rng);
            spec.sigma * g / nf.sqrt()
        }
        EnsembleKind::PermutationBaseline => {
            unreachable!("permutation matrices are not sampled entrywise")
        }
    }
}

/// Sample one matrix from the spec's law at dimension `n`.
///
/// Deterministic in `(spec, n, replicate_index)`.
pub fn sample_matrix(spec: &EnsembleSpec, n: usize, replicate_index: u64) -> Result<SymmetricMatrix> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::Parameter(format!("n must be ≥ 2, got {n}")));
    }
    if spec.kind == EnsembleKind::ExplodingMoments {
        let mass: f64 = spec
            .m_atoms
            .iter()
            .filter(|a| a.location > 0.0)
            .map(|a| a.weight / a.location)
            .sum();
        if mass / n as f64 > 1.0 {
            return Err(Error::Parameter(format!(
                "ExplodingMoments entry probability Σ w_i/x_i = {mass} exceeds n = {n}"
            )));
        }
    }
    let mut rng = spec.rng(replicate_index);
    let mut entries = vec![0.0f64; n * n];
    if spec.kind == EnsembleKind::PermutationBaseline {
        // Fisher–Yates permutation, matrix P[i][π(i)] = 1.
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        for (i, &pi) in perm.iter().enumerate() {
            entries[i * n + pi] = 1.0;
        }
    } else {
        // Lower triangle including the diagonal (same law), mirrored.
        for i in 0..n {
            for j in 0..=i {
                let v = sample_entry(spec, n, &mut rng);
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
    }
    Ok(SymmetricMatrix { n, entries })
}

/// Monte Carlo estimate of `n(φ_n(λ) − 1)` with `φ_n(λ) = E[e^{−iλa²}]`,
/// for comparison against the closed-form characteristic exponent Φ.
///
/// Returns `(estimate, standard error)` per grid point, where the
/// standard error is the Euclidean norm of the component-wise standard
/// errors of the complex mean.
pub fn estimate_char_exponent(
    spec: &EnsembleSpec,
    n: usize,
    n_samples: usize,
    lambda_grid: &[Complex64],
) -> Result<Vec<(Complex64, f64)>> {
    spec.validate()?;
    if spec.kind == EnsembleKind::PermutationBaseline {
        return Err(Error::Unsupported(
            "PermutationBaseline has no entrywise characteristic exponent".into(),
        ));
    }
    if n < 2 {
        return Err(Error::Parameter(format!("n must be ≥ 2, got {n}")));
    }
    if n_samples < 1000 {
        return Err(Error::Parameter(format!(
            "n_samples must be ≥ 1000, got {n_samples}"
        )));
    }
    for l in lambda_grid {
        if l.im > 0.0 {
            return Err(Error::Domain(format!(
                "lambda must lie in the closed lower half-plane, got {l}"
            )));
        }
    }
    let mut rng = spec.rng(u64::MAX); // dedicated stream, disjoint from matrix replicates
    let nf = n as f64;
    let mut sums = vec![Complex64::new(0.0, 0.0); lambda_grid.len()];
    let mut sums_sq = vec![0.0f64; lambda_grid.len()]; // Σ|w|² for variance
    let mut sums_re2 = vec![0.0f64; lambda_grid.len()];
    let mut sums_im2 = vec![0.0f64; lambda_grid.len()];
    for _ in 0..n_samples {
        let a = sample_entry(spec, n, &mut rng);
        let a2 = a * a;
        for (k, &l) in lambda_grid.iter().enumerate() {
            // e^{−iλa²}; Im λ ≤ 0 keeps |e^{−iλa²}| ≤ 1... in fact
            // −iλa² = (−Im λ·a²) − i(Re λ·a²): Im λ ≤ 0 gives bounded growth
            // only when Im λ = 0; for Im λ < 0 the modulus is e^{|Im λ| a²},
            // which is integrable for our entry laws at fixed n.
            let w = (Complex64::new(0.0, -1.0) * l * a2).exp();
            sums[k] += w;
            sums_sq[k] += w.norm_sqr();
            sums_re2[k] += w.re * w.re;
            sums_im2[k] += w.im * w.im;
        }
    }
    let m = n_samples as f64;
    let mut out = Vec::with_capacity(lambda_grid.len());
    for k in 0..lambda_grid.len() {
        let mean = sums[k] / m;
        let var_re = (sums_re2[k] / m - mean.re * mean.re).max(0.0);
        let var_im = (sums_im2[k] / m - mean.im * mean.im).max(0.0);
        let se = nf * ((var_re + var_im) / m).sqrt();
        out.push((nf * (mean - 1.0), se));
    }
    Ok(out)
}
