//! From a sampled matrix to the empirical objects of interest:
//! eigendecomposition with an exchangeable-basis convention, the overlap
//! matrix `w_ij = u_ij²`, the processes `B^n`, `C^n`, the empirical CDF
//! `F_n`, the resolvent statistic `X^n`, and the per-row spectral
//! measures.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ensembles::SymmetricMatrix;
use crate::error::{Error, Result};
use crate::linalg::sym_eig;

/// Default clustering threshold (relative to the spectral radius) below
/// which eigenvalues are treated as degenerate and their eigenbasis is
/// re-randomized.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-10;

/// Eigenvalues (ascending) and the doubly stochastic overlap matrix.
///
/// For the permutation baseline the "overlaps" are the permutation
/// matrix itself (it is bistochastic) and `eigenvalues` is empty; the
/// eigenvalue-indexed operations reject such decompositions.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub n: usize,
    /// Ascending; empty for the bistochastic-only (permutation) path.
    pub eigenvalues: Vec<f64>,
    /// Row-major n×n, `w_ij = u_ij²`.
    pub overlaps: Vec<f64>,
    /// Column-major eigenvectors when produced by [`decompose`]
    /// (kept for reconstruction oracles; `None` for the permutation path).
    pub eigenvectors: Option<Vec<f64>>,
}

impl SpectralDecomposition {
    /// Wrap an already-bistochastic matrix (permutation baseline).
    pub fn from_bistochastic(m: &SymmetricMatrix) -> SpectralDecomposition {
        SpectralDecomposition {
            n: m.n,
            eigenvalues: Vec::new(),
            overlaps: m.entries.clone(),
            eigenvectors: None,
        }
    }

    pub fn w(&self, i: usize, j: usize) -> f64 {
        self.overlaps[i * self.n + j]
    }

    fn require_eigenvalues(&self) -> Result<()> {
        if self.eigenvalues.len() != self.n {
            return Err(Error::Unsupported(
                "operation requires eigenvalues (bistochastic-only decomposition)".into(),
            ));
        }
        Ok(())
    }

    /// Worst row/column-sum deviation from 1 (doubly stochastic check).
    pub fn bistochastic_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                r += self.w(i, j);
                c += self.w(j, i);
            }
            worst = worst.max((r - 1.0).abs()).max((c - 1.0).abs());
        }
        worst
    }
}

/// Full symmetric eigendecomposition with the exchangeability
/// convention: inside every cluster of numerically degenerate
/// eigenvalues (gap < `degeneracy_tol`·spectral radius) the eigenbasis
/// is rotated by a Haar-distributed orthogonal matrix drawn from
/// `seed`, so overlaps of degenerate eigenvectors are well-defined in
/// distribution rather than an artifact of the eigensolver.
pub fn decompose(
    matrix: &SymmetricMatrix,
    degeneracy_tol: f64,
    seed: u64,
) -> Result<SpectralDecomposition> {
    let n = matrix.n;
    let (evals, mut vecs) = sym_eig(n, &matrix.entries)?;
    let norm = evals
        .iter()
        .fold(0.0f64, |m, &x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = degeneracy_tol * norm;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && evals[end] - evals[end - 1] < tol {
            end += 1;
        }
        let k = end - start;
        if k > 1 {
            rotate_cluster(&mut vecs, n, start, k, &mut rng);
        }
        start = end;
    }

    let mut overlaps = vec![0.0f64; n * n];
    for j in 0..n {
        for i in 0..n {
            let u = vecs[i + j * n];
            overlaps[i * n + j] = u * u;
        }
    }
    Ok(SpectralDecomposition {
        n,
        eigenvalues: evals,
        overlaps,
        eigenvectors: Some(vecs),
    })
}

/// Right-multiply the eigenvector block of a degenerate cluster by a
/// Haar orthogonal k×k matrix (QR of a Gaussian matrix with the sign of
/// R's diagonal fixed).
fn rotate_cluster(vecs: &mut [f64], n: usize, start: usize, k: usize, rng: &mut ChaCha8Rng) {
    // Gaussian k×k, column-major.
    let mut q: Vec<f64> = (0..k * k)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            g
        })
        .collect();
    // Modified Gram–Schmidt; make the R diagonal positive so Q is Haar.
    for c in 0..k {
        for prev in 0..c {
            let mut dot = 0.0;
            for r in 0..k {
                dot += q[r + prev * k] * q[r + c * k];
            }
            for r in 0..k {
                q[r + c * k] -= dot * q[r + prev * k];
            }
        }
        let mut norm = 0.0;
        for r in 0..k {
            norm += q[r + c * k] * q[r + c * k];
        }
        let norm = norm.sqrt();
        if norm < 1e-300 {
            // astronomically unlikely; retry with a perturbed column
            for r in 0..k {
                q[r + c * k] = if r == c { 1.0 } else { 0.0 };
            }
            continue;
        }
        for r in 0..k {
            q[r + c * k] /= norm;
        }
        let _ = rng.gen::<f64>(); // keep stream advancing deterministically
    }
    // block = block · Q
    let mut newblock = vec![0.0f64; n * k];
    for c in 0..k {
        for r in 0..n {
            let mut s = 0.0;
            for m in 0..k {
                s += vecs[r + (start + m) * n] * q[m + c * k];
            }
            newblock[r + c * n] = s;
        }
    }
    for c in 0..k {
        for r in 0..n {
            vecs[r + (start + c) * n] = newblock[r + c * n];
        }
    }
}

/// Inclusive prefix sums of the overlap matrix:
/// `cum(I, J) = Σ_{i<I, j<J} w_ij`, the workhorse for `B^n`/`C^n`/`X^n`.
pub struct OverlapPrefix {
    pub n: usize,
    cum: Vec<f64>,
}

impl OverlapPrefix {
    pub fn new(dec: &SpectralDecomposition) -> OverlapPrefix {
        let n = dec.n;
        let m = n + 1;
        let mut cum = vec![0.0f64; m * m];
        for i in 0..n {
            for j in 0..n {
                cum[(i + 1) * m + (j + 1)] =
                    dec.w(i, j) + cum[i * m + (j + 1)] + cum[(i + 1) * m + j] - cum[i * m + j];
            }
        }
        OverlapPrefix { n, cum }
    }

    #[inline]
    pub fn prefix(&self, i_count: usize, j_count: usize) -> f64 {
        self.cum[i_count * (self.n + 1) + j_count]
    }

    /// `B^n` evaluated at integer counts (I, J):
    /// n^{−1/2}(Σ_{i≤I,j≤J} w_ij − I·J/n).
    #[inline]
    pub fn b_at_counts(&self, i_count: usize, j_count: usize) -> f64 {
        // Identically zero on the boundary: empty sums at count 0, and
        // row/column stochasticity at count n.  Return the exact value
        // rather than the rounding residue of the prefix sums.
        if i_count == 0 || j_count == 0 || i_count == self.n || j_count == self.n {
            return 0.0;
        }
        let nf = self.n as f64;
        (self.prefix(i_count, j_count) - (i_count as f64) * (j_count as f64) / nf) / nf.sqrt()
    }

    #[inline]
    pub fn b_value(&self, s: f64, t: f64) -> f64 {
        self.b_at_counts(floor_count(self.n, s), floor_count(self.n, t))
    }
}

/// ⌊n·s⌋ clamped to [0, n].
pub fn floor_count(n: usize, s: f64) -> usize {
    ((n as f64 * s).floor() as i64).clamp(0, n as i64) as usize
}

/// Number of eigenvalues ≤ λ (eigenvalues ascending).
pub fn count_leq(eigenvalues: &[f64], lambda: f64) -> usize {
    eigenvalues.partition_point(|&x| x <= lambda)
}

/// Which axis the second grid of a surface indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceAxis {
    /// Column fraction t ∈ [0,1] (a `B^n` surface).
    Fraction,
    /// Eigenvalue threshold λ (a `C^n` surface).
    Lambda,
}

/// Values of `B^n` or `C^n` on a rectangular grid.
#[derive(Debug, Clone)]
pub struct ProcessSurface {
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub axis: SurfaceAxis,
    /// Row-major: `values[a * t_grid.len() + b]` at `(s_grid[a], t_grid[b])`.
    pub values: Vec<f64>,
}

impl ProcessSurface {
    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.t_grid.len() + b]
    }
}

fn validate_fraction_grid(grid: &[f64], name: &str, need_endpoints: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Parameter(format!("{name} grid is empty")));
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Parameter(format!("{name} grid not strictly ascending")));
        }
    }
    if grid.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::Parameter(format!("{name} grid leaves [0,1]")));
    }
    if need_endpoints && (grid[0] != 0.0 || *grid.last().unwrap() != 1.0) {
        return Err(Error::Parameter(format!("{name} grid must contain 0 and 1")));
    }
    Ok(())
}

/// The bivariate overlap process `B^n` on a grid.
pub fn bivariate_process(
    dec: &SpectralDecomposition,
    s_grid: &[f64],
    t_grid: &[f64],
) -> Result<ProcessSurface> {
    validate_fraction_grid(s_grid, "s", true)?;
    validate_fraction_grid(t_grid, "t", true)?;
    let pre = OverlapPrefix::new(dec);
    let mut values = Vec::with_capacity(s_grid.len() * t_grid.len());
    for &s in s_grid {
        for &t in t_grid {
            values.push(pre.b_value(s, t));
        }
    }
    Ok(ProcessSurface {
        s_grid: s_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        axis: SurfaceAxis::Fraction,
        values,
    })
}

/// The eigenvalue-indexed process `C^n` on a grid; satisfies
/// `C^n_{s,λ} = B^n_{s,F_n(λ)}` exactly by construction.
pub fn eigenvalue_process(
    dec: &SpectralDecomposition,
    s_grid: &[f64],
    lambda_grid: &[f64],
) -> Result<ProcessSurface> {
    dec.require_eigenvalues()?;
    validate_fraction_grid(s_grid, "s", true)?;
    if lambda_grid.is_empty() {
        return Err(Error::Parameter("lambda grid is empty".into()));
    }
    for w in lambda_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Parameter("lambda grid not strictly ascending".into()));
        }
    }
    let pre = OverlapPrefix::new(dec);
    let mut values = Vec::with_capacity(s_grid.len() * lambda_grid.len());
    for &s in s_grid {
        let i_count = floor_count(dec.n, s);
        for &l in lambda_grid {
            let j_count = count_leq(&dec.eigenvalues, l);
            values.push(pre.b_at_counts(i_count, j_count));
        }
    }
    Ok(ProcessSurface {
        s_grid: s_grid.to_vec(),
        t_grid: lambda_grid.to_vec(),
        axis: SurfaceAxis::Lambda,
        values,
    })
}

/// Empirical spectral CDF `F_n(λ)`.
pub fn empirical_cdf(dec: &SpectralDecomposition, lambda: f64) -> f64 {
    count_leq(&dec.eigenvalues, lambda) as f64 / dec.n as f64
}

/// The resolvent statistic `X^n(s,z)`.
#[derive(Debug, Clone, Copy)]
pub struct ResolventStat {
    pub s: f64,
    pub z: Complex64,
    pub value: Complex64,
}

/// `X^n(s,z) = n^{−1/2} Σ_{i≤ns} Σ_j (w_ij − 1/n)/(z − λ_j)`
/// (eigen representation).
pub fn resolvent_stat(dec: &SpectralDecomposition, s: f64, z: Complex64) -> Result<ResolventStat> {
    dec.require_eigenvalues()?;
    if z.im == 0.0 {
        return Err(Error::Domain("resolvent_stat requires Im z ≠ 0".into()));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Parameter(format!("s must lie in [0,1], got {s}")));
    }
    let pre = OverlapPrefix::new(dec);
    Ok(ResolventStat { s, z, value: resolvent_stat_with(dec, &pre, s, z) })
}

/// As [`resolvent_stat`] with a precomputed prefix table (hot path for
/// Monte Carlo loops).
pub fn resolvent_stat_with(
    dec: &SpectralDecomposition,
    pre: &OverlapPrefix,
    s: f64,
    z: Complex64,
) -> Complex64 {
    let n = dec.n;
    let nf = n as f64;
    let i_count = floor_count(n, s);
    // Identically zero at s ∈ {0, 1}: empty sum at count 0, column
    // stochasticity at count n.
    if i_count == 0 || i_count == n {
        return Complex64::new(0.0, 0.0);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..n {
        // Σ_{i≤I} w_ij as a difference of prefix sums
        let colsum = pre.prefix(i_count, j + 1) - pre.prefix(i_count, j);
        let num = colsum - i_count as f64 / nf;
        sum += num / (z - dec.eigenvalues[j]);
    }
    sum / nf.sqrt()
}

/// Exact verification of the step-function identity
/// ∫ C^n_{s,λ}/(z−λ)² dλ = −X^n(s,z): the left side is integrated in
/// closed form over each interval where C^n_{s,·} is constant, so the
/// residual is at rounding level regardless of any grid resolution.
pub fn quadrature_identity_check(dec: &SpectralDecomposition, s: f64, z: Complex64) -> Result<f64> {
    dec.require_eigenvalues()?;
    if z.im == 0.0 {
        return Err(Error::Domain("quadrature identity requires Im z ≠ 0".into()));
    }
    let n = dec.n;
    let pre = OverlapPrefix::new(dec);
    let i_count = floor_count(n, s);
    let mut lhs = Complex64::new(0.0, 0.0);
    // On [λ_j, λ_{j+1}) the step value is B at counts (I, j+1);
    // ∫_a^b dλ/(z−λ)² = 1/(z−b) − 1/(z−a).  Values vanish below λ₁ and
    // from λ_n on (row sums are 1), so the two tails contribute 0.
    for j in 0..n.saturating_sub(1) {
        let v = pre.b_at_counts(i_count, j + 1);
        let a = dec.eigenvalues[j];
        let b = dec.eigenvalues[j + 1];
        lhs += v * ((z - b).inv() - (z - a).inv());
    }
    let x = resolvent_stat_with(dec, &pre, s, z);
    Ok((lhs + x).norm())
}

/// Rectangle increment of a surface; the four corner coordinates must be
/// grid members.
pub fn increment(surface: &ProcessSurface, s: f64, sp: f64, t: f64, tp: f64) -> Result<f64> {
    let find = |grid: &[f64], x: f64, name: &str| -> Result<usize> {
        grid.iter()
            .position(|&g| (g - x).abs() <= 1e-12 * g.abs().max(1.0))
            .ok_or_else(|| Error::Parameter(format!("{name} = {x} is not a grid point")))
    };
    let a = find(&surface.s_grid, s, "s")?;
    let ap = find(&surface.s_grid, sp, "s'")?;
    let b = find(&surface.t_grid, t, "t")?;
    let bp = find(&surface.t_grid, tp, "t'")?;
    Ok(surface.value(ap, bp) - surface.value(a, bp) - surface.value(ap, b) + surface.value(a, b))
}

/// The signed spectral weights `(λ_j, w_ij)` of the vector `e_i`:
/// the measure with `(f(A))_{ii} = Σ_j f(λ_j) w_ij`.
pub fn vector_spectral_measure(dec: &SpectralDecomposition, i: usize) -> Result<Vec<(f64, f64)>> {
    dec.require_eigenvalues()?;
    if i >= dec.n {
        return Err(Error::Parameter(format!("row index {i} out of range")));
    }
    Ok(dec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, &l)| (l, dec.w(i, j)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, EnsembleSpec};
    use approx::assert_abs_diff_eq;

    fn random_dec(n: usize, seed: u64) -> SpectralDecomposition {
        let spec = EnsembleSpec::gaussian(1.0, seed);
        let m = sample_matrix(&spec, n, 0).unwrap();
        decompose(&m, DEFAULT_DEGENERACY_TOL, seed).unwrap()
    }

    #[test]
    fn identity_matrix_full_degeneracy() {
        let m = SymmetricMatrix {
            n: 3,
            entries: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        };
        let dec = decompose(&m, DEFAULT_DEGENERACY_TOL, 9).unwrap();
        assert!(dec.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));
        assert!(dec.bistochastic_defect() < 1e-10);
        // the Haar rotation makes the overlaps non-trivial
        let off = dec.w(0, 1) + dec.w(0, 2);
        assert!(off > 1e-6, "expected randomized overlaps, got {off}");
        // determinism in the rotation seed
        let dec2 = decompose(&m, DEFAULT_DEGENERACY_TOL, 9).unwrap();
        assert_eq!(dec.overlaps, dec2.overlaps);
    }

    #[test]
    fn diagonal_matrix_permutation_overlaps() {
        let m = SymmetricMatrix {
            n: 3,
            entries: vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0],
        };
        let dec = decompose(&m, DEFAULT_DEGENERACY_TOL, 0).unwrap();
        assert_eq!(dec.eigenvalues, vec![1.0, 2.0, 3.0]);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dec.w(i, j), want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn reconstruction_oracle() {
        let spec = EnsembleSpec::gaussian(1.0, 17);
        let m = sample_matrix(&spec, 50, 0).unwrap();
        let dec = decompose(&m, DEFAULT_DEGENERACY_TOL, 0).unwrap();
        let u = dec.eigenvectors.as_ref().unwrap();
        let n = 50;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += u[i + k * n] * dec.eigenvalues[k] * u[j + k * n];
                }
                assert_abs_diff_eq!(s, m.get(i, j), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn doubly_stochastic_random() {
        for seed in 0..5 {
            let dec = random_dec(60, seed);
            assert!(dec.bistochastic_defect() < 1e-10);
        }
    }

    #[test]
    fn b_surface_brute_force_and_boundary() {
        let dec = random_dec(37, 1);
        let s_grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let t_grid = [0.0, 0.2, 0.5, 0.9, 1.0];
        let surf = bivariate_process(&dec, &s_grid, &t_grid).unwrap();
        let n = dec.n;
        let nf = n as f64;
        for (a, &s) in s_grid.iter().enumerate() {
            for (b, &t) in t_grid.iter().enumerate() {
                let mut brute = 0.0;
                for i in 0..floor_count(n, s) {
                    for j in 0..floor_count(n, t) {
                        brute += dec.w(i, j) - 1.0 / nf;
                    }
                }
                brute /= nf.sqrt();
                assert_abs_diff_eq!(surf.value(a, b), brute, epsilon = 1e-12);
            }
        }
        // boundary rows/columns vanish
        for a in 0..s_grid.len() {
            assert_abs_diff_eq!(surf.value(a, 0), 0.0, epsilon = 1e-12);
            assert!(surf.value(a, t_grid.len() - 1).abs() < 1e-10);
        }
        for b in 0..t_grid.len() {
            assert_abs_diff_eq!(surf.value(0, b), 0.0, epsilon = 1e-12);
            assert!(surf.value(s_grid.len() - 1, b).abs() < 1e-10);
        }
    }

    #[test]
    fn c_equals_b_compose_fn() {
        let dec = random_dec(41, 2);
        let s_grid = [0.0, 0.3, 0.5, 1.0];
        let lmin = dec.eigenvalues[0] - 1.0;
        let lmax = dec.eigenvalues[40] + 1.0;
        let lambda_grid: Vec<f64> = (0..9).map(|k| lmin + (lmax - lmin) * k as f64 / 8.0).collect();
        let c = eigenvalue_process(&dec, &s_grid, &lambda_grid).unwrap();
        // build a B surface whose t grid contains every F_n(λ)
        let mut t_grid: Vec<f64> = lambda_grid.iter().map(|&l| empirical_cdf(&dec, l)).collect();
        t_grid.push(0.0);
        t_grid.push(1.0);
        t_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t_grid.dedup();
        let b = bivariate_process(&dec, &s_grid, &t_grid).unwrap();
        for (a, _) in s_grid.iter().enumerate() {
            for (k, &l) in lambda_grid.iter().enumerate() {
                let fnl = empirical_cdf(&dec, l);
                let bt = t_grid.iter().position(|&t| t == fnl).unwrap();
                assert_abs_diff_eq!(c.value(a, k), b.value(a, bt), epsilon = 1e-12);
            }
        }
        // λ outside the spectrum
        assert_abs_diff_eq!(c.value(2, 0), 0.0, epsilon = 1e-12);
        assert!(c.value(2, 8).abs() < 1e-10);
    }

    #[test]
    fn empirical_cdf_basic() {
        let m = SymmetricMatrix {
            n: 3,
            entries: vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0],
        };
        let dec = decompose(&m, DEFAULT_DEGENERACY_TOL, 0).unwrap();
        assert_eq!(empirical_cdf(&dec, 0.5), 0.0);
        assert_eq!(empirical_cdf(&dec, 2.0), 2.0 / 3.0);
        assert_eq!(empirical_cdf(&dec, 3.0), 1.0);
    }

    #[test]
    fn x_eigen_vs_trace_form() {
        let dec = random_dec(30, 3);
        let spec_m = sample_matrix(&EnsembleSpec::gaussian(1.0, 3), 30, 0).unwrap();
        let n = 30;
        let z = Complex64::new(0.7, 1.3);
        let s = 0.4;
        let x = resolvent_stat(&dec, s, z).unwrap().value;
        // trace form via direct inversion: n^{−1/2}(Tr(P_s G) − s_n Tr G)
        let g = crate::linalg::resolvent(n, &spec_m.entries, z).unwrap();
        let i_count = floor_count(n, s);
        let mut tr_p = Complex64::new(0.0, 0.0);
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..n {
            if i < i_count {
                tr_p += g[i + i * n];
            }
            tr += g[i + i * n];
        }
        let want = (tr_p - (i_count as f64 / n as f64) * tr) / (n as f64).sqrt();
        assert!((x - want).norm() < 1e-9, "{x} vs {want}");
    }

    #[test]
    fn x_boundary_and_conjugation() {
        let dec = random_dec(25, 4);
        let z = Complex64::new(0.3, 2.0);
        assert_abs_diff_eq!(resolvent_stat(&dec, 0.0, z).unwrap().value.norm(), 0.0, epsilon = 1e-12);
        assert!(resolvent_stat(&dec, 1.0, z).unwrap().value.norm() < 1e-10);
        let x = resolvent_stat(&dec, 0.35, z).unwrap().value;
        let xb = resolvent_stat(&dec, 0.35, z.conj()).unwrap().value;
        assert!((xb - x.conj()).norm() < 1e-12);
        assert!(resolvent_stat(&dec, 0.5, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn quadrature_identity_cases() {
        // n = 2 diagonal
        let m = SymmetricMatrix { n: 2, entries: vec![-1.0, 0.0, 0.0, 1.0] };
        let dec = decompose(&m, DEFAULT_DEGENERACY_TOL, 0).unwrap();
        let r = quadrature_identity_check(&dec, 0.5, Complex64::new(0.0, 2.0)).unwrap();
        assert!(r < 1e-12, "residual {r}");
        // s = 0
        let r0 = quadrature_identity_check(&dec, 0.0, Complex64::new(0.0, 2.0)).unwrap();
        assert!(r0 < 1e-15);
        // random Levy 50×50
        let spec = EnsembleSpec::levy(1.5, 1.0, 5);
        let a = sample_matrix(&spec, 50, 0).unwrap();
        let dec = decompose(&a, DEFAULT_DEGENERACY_TOL, 5).unwrap();
        let r = quadrature_identity_check(&dec, 0.5, Complex64::new(0.4, -1.1)).unwrap();
        assert!(r < 1e-9, "residual {r}");
    }

    #[test]
    fn increment_brute_force() {
        let dec = random_dec(20, 6);
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let surf = bivariate_process(&dec, &grid, &grid).unwrap();
        assert_abs_diff_eq!(increment(&surf, 0.25, 0.25, 0.0, 1.0).unwrap(), 0.0);
        assert!(increment(&surf, 0.0, 1.0, 0.0, 1.0).unwrap().abs() < 1e-10);
        let d = increment(&surf, 0.25, 0.75, 0.25, 0.5).unwrap();
        let n = dec.n;
        let nf = n as f64;
        let mut brute = 0.0;
        for i in floor_count(n, 0.25)..floor_count(n, 0.75) {
            for j in floor_count(n, 0.25)..floor_count(n, 0.5) {
                brute += dec.w(i, j) - 1.0 / nf;
            }
        }
        brute /= nf.sqrt();
        assert_abs_diff_eq!(d, brute, epsilon = 1e-12);
        assert!(increment(&surf, 0.1, 0.75, 0.25, 0.5).is_err());
    }

    #[test]
    fn vector_measure_identity() {
        let dec = random_dec(23, 7);
        let n = dec.n;
        // weights sum to 1 per row
        for i in 0..n {
            let mu = vector_spectral_measure(&dec, i).unwrap();
            let tot: f64 = mu.iter().map(|&(_, w)| w).sum();
            assert_abs_diff_eq!(tot, 1.0, epsilon = 1e-10);
        }
        // C^n_{s,λ} = n^{−1/2} Σ_{i≤ns} (μ_{n,e_i} − μ_n)((−∞,λ])
        let s = 0.6;
        let lambda = dec.eigenvalues[n / 2] + 1e-9;
        let s_grid = [0.0, s, 1.0];
        let c = eigenvalue_process(&dec, &s_grid, &[lambda]).unwrap();
        let f_n = empirical_cdf(&dec, lambda);
        let mut sum = 0.0;
        for i in 0..floor_count(n, s) {
            let mu = vector_spectral_measure(&dec, i).unwrap();
            let mass: f64 = mu.iter().filter(|&&(l, _)| l <= lambda).map(|&(_, w)| w).sum();
            sum += mass - f_n;
        }
        sum /= (n as f64).sqrt();
        assert_abs_diff_eq!(c.value(1, 0), sum, epsilon = 1e-12);
    }

    #[test]
    fn permutation_bistochastic_path() {
        let m = sample_matrix(&EnsembleSpec::permutation(2), 10, 0).unwrap();
        let dec = SpectralDecomposition::from_bistochastic(&m);
        assert!(dec.bistochastic_defect() < 1e-15);
        let grid = [0.0, 0.5, 1.0];
        let surf = bivariate_process(&dec, &grid, &grid).unwrap();
        assert!(surf.value(0, 1).abs() < 1e-15);
        assert!(resolvent_stat(&dec, 0.5, Complex64::new(0.0, 1.0)).is_err());
    }
}
