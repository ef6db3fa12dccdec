//! Replicated simulation: covariance estimation for `B^n`/`C^n`/`X^n`,
//! the exchangeability variance identity, scaling-law, tightness and
//! Gaussianity diagnostics.
//!
//! All estimators reduce replicate results in replicate-index order so
//! output is bit-stable; replicate streams come from the ensemble's
//! splittable seeding.

use num_complex::Complex64;
use serde::Serialize;

use crate::eigenprocess::{
    bivariate_process, count_leq, decompose, floor_count, resolvent_stat_with, OverlapPrefix,
    SpectralDecomposition, DEFAULT_DEGENERACY_TOL,
};
use crate::ensembles::{sample_matrix, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};

/// A point of one of the three processes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProcessPoint {
    /// `B^n_{s,t}`
    B { s: f64, t: f64 },
    /// `C^n_{s,λ}`
    C { s: f64, lambda: f64 },
    /// `X^n(s,z)`
    X { s: f64, re_z: f64, im_z: f64 },
}

impl ProcessPoint {
    pub fn x(s: f64, z: Complex64) -> ProcessPoint {
        ProcessPoint::X { s, re_z: z.re, im_z: z.im }
    }

    fn needs_eigenvalues(&self) -> bool {
        !matches!(self, ProcessPoint::B { .. })
    }
}

/// Deterministic per-replicate seed for the Haar rotations inside
/// `decompose`, derived from the ensemble seed (SplitMix-style mix so
/// it is uncorrelated with the sampling streams).
fn rotation_seed(spec: &EnsembleSpec, replicate: u64) -> u64 {
    let mut x = spec
        .seed
        .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(replicate.wrapping_add(1)));
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Sample one replicate and evaluate the requested process points.
pub fn sample_process_values(
    spec: &EnsembleSpec,
    n: usize,
    replicate: u64,
    points: &[ProcessPoint],
) -> Result<Vec<Complex64>> {
    let m = sample_matrix(spec, n, replicate)?;
    let dec = if spec.kind == EnsembleKind::PermutationBaseline {
        SpectralDecomposition::from_bistochastic(&m)
    } else {
        decompose(&m, DEFAULT_DEGENERACY_TOL, rotation_seed(spec, replicate))?
    };
    if spec.kind == EnsembleKind::PermutationBaseline
        && points.iter().any(|p| p.needs_eigenvalues())
    {
        return Err(Error::Unsupported(
            "C/X points are undefined for the permutation baseline".into(),
        ));
    }
    let pre = OverlapPrefix::new(&dec);
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let v = match *p {
            ProcessPoint::B { s, t } => Complex64::new(pre.b_value(s, t), 0.0),
            ProcessPoint::C { s, lambda } => {
                let i = floor_count(n, s);
                let j = count_leq(&dec.eigenvalues, lambda);
                Complex64::new(pre.b_at_counts(i, j), 0.0)
            }
            ProcessPoint::X { s, re_z, im_z } => {
                let z = Complex64::new(re_z, im_z);
                if z.im == 0.0 {
                    return Err(Error::Domain("X points need Im z ≠ 0".into()));
                }
                resolvent_stat_with(&dec, &pre, s, z)
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// Monte Carlo mean and covariance at a list of process points.
///
/// Both complex covariance forms are reported:
/// `cov = Ê[(V−μ)(V′−μ′)]` and `cov_conj = Ê[(V−μ)·conj(V′−μ′)]`.
/// Standard errors are leave-one-replicate-out jackknife, stored
/// componentwise (`re` = SE of the real part, `im` = SE of the
/// imaginary part).
#[derive(Debug, Clone, Serialize)]
pub struct CovEstimate {
    pub points: Vec<ProcessPoint>,
    pub replicates: usize,
    pub mean: Vec<Complex64>,
    pub se_mean: Vec<f64>,
    /// Row-major p×p.
    pub cov: Vec<Complex64>,
    pub cov_conj: Vec<Complex64>,
    pub se_cov: Vec<Complex64>,
    pub se_cov_conj: Vec<Complex64>,
}

pub fn estimate_cov(
    spec: &EnsembleSpec,
    n: usize,
    r: usize,
    points: &[ProcessPoint],
) -> Result<CovEstimate> {
    if r < 30 {
        return Err(Error::Parameter(format!("R must be ≥ 30, got {r}")));
    }
    if points.is_empty() {
        return Err(Error::Parameter("empty point list".into()));
    }
    let p = points.len();
    let mut samples: Vec<Vec<Complex64>> = Vec::with_capacity(r);
    for rep in 0..r {
        samples.push(sample_process_values(spec, n, rep as u64, points)?);
    }
    let rf = r as f64;
    let mut mean = vec![Complex64::new(0.0, 0.0); p];
    for v in &samples {
        for (m, &x) in mean.iter_mut().zip(v.iter()) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= rf;
    }
    let mut se_mean = vec![0.0f64; p];
    for a in 0..p {
        let var: f64 = samples.iter().map(|v| (v[a] - mean[a]).norm_sqr()).sum::<f64>() / rf;
        se_mean[a] = (var / rf).sqrt();
    }

    // Centered products, full-sample estimates, and jackknife SEs.
    let mut cov = vec![Complex64::new(0.0, 0.0); p * p];
    let mut cov_conj = vec![Complex64::new(0.0, 0.0); p * p];
    let mut se_cov = vec![Complex64::new(0.0, 0.0); p * p];
    let mut se_cov_conj = vec![Complex64::new(0.0, 0.0); p * p];

    // Raw sums needed for O(R) leave-one-out recomputation.
    let mut s1 = vec![Complex64::new(0.0, 0.0); p];
    let mut s2 = vec![Complex64::new(0.0, 0.0); p * p];
    let mut s2c = vec![Complex64::new(0.0, 0.0); p * p];
    for v in &samples {
        for a in 0..p {
            s1[a] += v[a];
            for b in 0..p {
                s2[a * p + b] += v[a] * v[b];
                s2c[a * p + b] += v[a] * v[b].conj();
            }
        }
    }
    for a in 0..p {
        for b in 0..p {
            cov[a * p + b] = s2[a * p + b] / rf - mean[a] * mean[b];
            cov_conj[a * p + b] = s2c[a * p + b] / rf - mean[a] * mean[b].conj();
        }
    }
    // jackknife replicates of each covariance entry
    let rm1 = rf - 1.0;
    for a in 0..p {
        for b in 0..p {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut acc2_re = 0.0;
            let mut acc2_im = 0.0;
            let mut accc = Complex64::new(0.0, 0.0);
            let mut accc2_re = 0.0;
            let mut accc2_im = 0.0;
            let mut thetas = Vec::with_capacity(r);
            let mut thetas_c = Vec::with_capacity(r);
            for v in &samples {
                let m_a = (s1[a] - v[a]) / rm1;
                let m_b = (s1[b] - v[b]) / rm1;
                let th = (s2[a * p + b] - v[a] * v[b]) / rm1 - m_a * m_b;
                let thc = (s2c[a * p + b] - v[a] * v[b].conj()) / rm1 - m_a * m_b.conj();
                acc += th;
                accc += thc;
                thetas.push(th);
                thetas_c.push(thc);
            }
            let th_bar = acc / rf;
            let thc_bar = accc / rf;
            for (th, thc) in thetas.iter().zip(thetas_c.iter()) {
                acc2_re += (th.re - th_bar.re).powi(2);
                acc2_im += (th.im - th_bar.im).powi(2);
                accc2_re += (thc.re - thc_bar.re).powi(2);
                accc2_im += (thc.im - thc_bar.im).powi(2);
            }
            let f = rm1 / rf;
            se_cov[a * p + b] = Complex64::new((f * acc2_re).sqrt(), (f * acc2_im).sqrt());
            se_cov_conj[a * p + b] = Complex64::new((f * accc2_re).sqrt(), (f * accc2_im).sqrt());
        }
    }

    Ok(CovEstimate {
        points: points.to_vec(),
        replicates: r,
        mean,
        se_mean,
        cov,
        cov_conj,
        se_cov,
        se_cov_conj,
    })
}

/// Variance of `C^n_{s,λ}` through the exchangeability identity
/// `Var(C^n_{s,λ}) = (s_n − s_n²)·E[X₁(X₁ − X₂)]`, with
/// `X_i = Σ_{j: λ_j ≤ λ}(w_ij − 1/n)`.
///
/// Since rows of the overlap matrix are exchangeable and `Σ_i X_i = 0`
/// exactly, the per-replicate estimate reduces to
/// `(s_n − s_n²)·Σ_i X_i² / (n−1)`.
/// Returns `(estimate, jackknife standard error)`.
pub fn variance_exchangeable(
    spec: &EnsembleSpec,
    n: usize,
    r: usize,
    s: f64,
    lambda: f64,
) -> Result<(f64, f64)> {
    if r < 2 {
        return Err(Error::Parameter("need at least 2 replicates".into()));
    }
    let s_n = floor_count(n, s) as f64 / n as f64;
    let factor = s_n - s_n * s_n;
    let mut per_rep = Vec::with_capacity(r);
    for rep in 0..r {
        let m = sample_matrix(spec, n, rep as u64)?;
        let dec = if spec.kind == EnsembleKind::PermutationBaseline {
            return Err(Error::Unsupported(
                "C points are undefined for the permutation baseline".into(),
            ));
        } else {
            decompose(&m, DEFAULT_DEGENERACY_TOL, rotation_seed(spec, rep as u64))?
        };
        let j_count = count_leq(&dec.eigenvalues, lambda);
        let mut sum_sq = 0.0;
        for i in 0..n {
            let mut xi = 0.0;
            for j in 0..j_count {
                xi += dec.w(i, j);
            }
            xi -= j_count as f64 / n as f64;
            sum_sq += xi * xi;
        }
        per_rep.push(factor * sum_sq / (n as f64 - 1.0));
    }
    Ok(mean_and_se(&per_rep))
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let r = v.len() as f64;
    let mean = v.iter().sum::<f64>() / r;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / r;
    (mean, (var / (r - 1.0)).sqrt())
}

/// Per-n variances of a `B^n` point with a fitted log-log slope.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub n_list: Vec<usize>,
    pub variances: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub slope: f64,
    pub slope_se: f64,
}

/// Fit the slope of `log Var(B^n_{s,t})` against `log n`.
pub fn scaling_scan(
    spec: &EnsembleSpec,
    n_list: &[usize],
    r: usize,
    s: f64,
    t: f64,
) -> Result<ScalingReport> {
    if n_list.len() < 2 {
        return Err(Error::Parameter("need at least two n values".into()));
    }
    let mut variances = Vec::with_capacity(n_list.len());
    let mut stderrs = Vec::with_capacity(n_list.len());
    let point = [ProcessPoint::B { s, t }];
    for &n in n_list {
        let est = estimate_cov(spec, n, r, &point)?;
        variances.push(est.cov[0].re);
        stderrs.push(est.se_cov[0].re);
    }
    // OLS on (log n, log var), slope SE by the delta method on log var.
    let xs: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = variances
        .iter()
        .map(|&v| {
            if v <= 0.0 {
                return f64::NAN;
            }
            v.ln()
        })
        .collect();
    if ys.iter().any(|y| y.is_nan()) {
        return Err(Error::Numeric("nonpositive variance estimate in scaling scan".into()));
    }
    let k = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar) * (x - x_bar)).sum();
    let slope: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - x_bar) * y)
        .sum::<f64>()
        / sxx;
    let slope_se = xs
        .iter()
        .zip(variances.iter().zip(stderrs.iter()))
        .map(|(x, (v, se))| ((x - x_bar) / sxx * se / v).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ScalingReport {
        n_list: n_list.to_vec(),
        variances,
        stderrs,
        slope,
        slope_se,
    })
}

/// One rectangle of a tightness report.
#[derive(Debug, Clone, Serialize)]
pub struct TightnessRectangle {
    pub s: f64,
    pub sp: f64,
    pub t: f64,
    pub tp: f64,
    pub fourth_moment: f64,
    pub stderr: f64,
    pub bound: f64,
    /// (m4 − 3·stderr)/bound; the check passes iff ≤ 1.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TightnessReport {
    pub n: usize,
    pub replicates: usize,
    pub rectangles: Vec<TightnessRectangle>,
    pub worst_ratio: f64,
}

/// Monte Carlo check of the fourth-moment increment bound
/// `E[(ΔS)⁴] ≤ 7/n + 6·Δs²(1−Δs)²·Δt²` (with the fractions taken at
/// the floor counts the increment actually uses).
pub fn tightness_check(
    spec: &EnsembleSpec,
    n: usize,
    r: usize,
    grid: &[f64],
) -> Result<TightnessReport> {
    let mut g = grid.to_vec();
    if g.first() != Some(&0.0) {
        g.insert(0, 0.0);
    }
    if g.last() != Some(&1.0) {
        g.push(1.0);
    }
    let m = g.len();
    let rects: Vec<(usize, usize, usize, usize)> = {
        let mut v = Vec::new();
        for a in 0..m {
            for ap in a + 1..m {
                for b in 0..m {
                    for bp in b + 1..m {
                        v.push((a, ap, b, bp));
                    }
                }
            }
        }
        v
    };
    let mut sums = vec![0.0f64; rects.len()];
    let mut sums2 = vec![0.0f64; rects.len()];
    for rep in 0..r {
        let mat = sample_matrix(spec, n, rep as u64)?;
        let dec = if spec.kind == EnsembleKind::PermutationBaseline {
            SpectralDecomposition::from_bistochastic(&mat)
        } else {
            decompose(&mat, DEFAULT_DEGENERACY_TOL, rotation_seed(spec, rep as u64))?
        };
        let surf = bivariate_process(&dec, &g, &g)?;
        for (k, &(a, ap, b, bp)) in rects.iter().enumerate() {
            let d = surf.value(ap, bp) - surf.value(a, bp) - surf.value(ap, b) + surf.value(a, b);
            let d4 = d * d * d * d;
            sums[k] += d4;
            sums2[k] += d4 * d4;
        }
    }
    let rf = r as f64;
    let mut rectangles = Vec::with_capacity(rects.len());
    let mut worst = f64::NEG_INFINITY;
    for (k, &(a, ap, b, bp)) in rects.iter().enumerate() {
        let m4 = sums[k] / rf;
        let var = (sums2[k] / rf - m4 * m4).max(0.0);
        let se = (var / (rf - 1.0)).sqrt();
        let ds = (floor_count(n, g[ap]) - floor_count(n, g[a])) as f64 / n as f64;
        let dt = (floor_count(n, g[bp]) - floor_count(n, g[b])) as f64 / n as f64;
        let bound = 7.0 / n as f64 + 6.0 * ds * ds * (1.0 - ds) * (1.0 - ds) * dt * dt;
        let ratio = (m4 - 3.0 * se) / bound;
        worst = worst.max(ratio);
        rectangles.push(TightnessRectangle {
            s: g[a],
            sp: g[ap],
            t: g[b],
            tp: g[bp],
            fourth_moment: m4,
            stderr: se,
            bound,
            ratio,
        });
    }
    Ok(TightnessReport { n, replicates: r, rectangles, worst_ratio: worst })
}

/// Moment-based Gaussianity z-scores `(skewness, excess kurtosis)`,
/// each divided by its exact standard error under the normal null.
pub fn gaussianity_diag(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 8 {
        return Err(Error::Parameter("need at least 8 samples".into()));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    if m2 <= 0.0 {
        return Err(Error::Numeric("zero variance in gaussianity diagnostic".into()));
    }
    let m3 = samples.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / nf;
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let g1 = m3 / m2.powf(1.5);
    let g2 = m4 / (m2 * m2) - 3.0;
    let se_skew = (6.0 * nf * (nf - 1.0) / ((nf - 2.0) * (nf + 1.0) * (nf + 3.0))).sqrt();
    let se_kurt = (24.0 * nf * (nf - 1.0) * (nf - 1.0)
        / ((nf - 3.0) * (nf - 2.0) * (nf + 3.0) * (nf + 5.0)))
        .sqrt();
    Ok((g1 / se_skew, g2 / se_kurt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn boundary_points_exact_zero() {
        let spec = EnsembleSpec::permutation(3);
        let est = estimate_cov(
            &spec,
            60,
            30,
            &[ProcessPoint::B { s: 0.0, t: 0.5 }, ProcessPoint::B { s: 0.5, t: 1.0 }],
        )
        .unwrap();
        assert_eq!(est.mean[0].norm(), 0.0);
        assert_eq!(est.cov[0].norm(), 0.0);
        assert!(est.cov[3].norm() < 1e-20);
    }

    #[test]
    fn permutation_brownian_bridge_variance() {
        // Var(B^n_{0.5,0.5}) → (0.5·0.5)² = 0.0625 for permutations
        let spec = EnsembleSpec::permutation(8);
        let est = estimate_cov(&spec, 200, 200, &[ProcessPoint::B { s: 0.5, t: 0.5 }]).unwrap();
        let v = est.cov[0].re;
        let se = est.se_cov[0].re;
        assert!(
            (v - 0.0625).abs() < 3.0 * se + 0.01,
            "var {v} ± {se} vs 0.0625"
        );
    }

    #[test]
    fn exchangeable_matches_direct() {
        let spec = EnsembleSpec::erdos_renyi(2.0, 17);
        let n = 150;
        let r = 60;
        let lambda = 0.5;
        let (ve, se_e) = variance_exchangeable(&spec, n, r, 0.5, lambda).unwrap();
        let est = estimate_cov(&spec, n, r, &[ProcessPoint::C { s: 0.5, lambda }]).unwrap();
        let vd = est.cov[0].re;
        let se_d = est.se_cov[0].re;
        let joint = (se_e * se_e + se_d * se_d).sqrt();
        assert!(
            (ve - vd).abs() < 3.0 * joint + 1e-3,
            "exchangeable {ve}±{se_e} vs direct {vd}±{se_d}"
        );
    }

    #[test]
    fn exchangeable_diagonal_matrix_zero() {
        // w = I makes X_i ∈ {1−j/n, −j/n} but Var(C) = 0 is false in
        // general; instead check both estimators agree by brute force on
        // the deterministic diagonal case: all replicates identical ⇒
        // direct variance 0, and the exchangeable estimator equals its
        // deterministic single-replicate value.
        let n = 12;
        let lambda = 0.0;
        // build a deterministic "ensemble": a diagonal matrix via Gaussian
        // sampling is not deterministic, so call the internals directly.
        let m = crate::ensembles::SymmetricMatrix {
            n,
            entries: {
                let mut e = vec![0.0; n * n];
                for i in 0..n {
                    e[i * n + i] = i as f64 - 6.0;
                }
                e
            },
        };
        let dec = decompose(&m, DEFAULT_DEGENERACY_TOL, 0).unwrap();
        let j_count = count_leq(&dec.eigenvalues, lambda);
        let s_n = floor_count(n, 0.5) as f64 / n as f64;
        let mut sum_sq = 0.0;
        for i in 0..n {
            let mut xi = 0.0;
            for j in 0..j_count {
                xi += dec.w(i, j);
            }
            xi -= j_count as f64 / n as f64;
            sum_sq += xi * xi;
        }
        let est = (s_n - s_n * s_n) * sum_sq / (n as f64 - 1.0);
        // brute force: with w = I (up to eigen-order permutation),
        // X_i ∈ {1 − j/n (j_count rows), −j/n (rest)}:
        // Σ X² = j(1−j/n)² + (n−j)(j/n)² = j(1−j/n)
        let j = j_count as f64;
        let brute = (s_n - s_n * s_n) * j * (1.0 - j / n as f64) / (n as f64 - 1.0);
        assert!((est - brute).abs() < 1e-12);
    }

    #[test]
    fn tightness_small_case() {
        let spec = EnsembleSpec::permutation(4);
        let rep = tightness_check(&spec, 50, 80, &[0.25, 0.5, 0.75]).unwrap();
        assert!(
            rep.worst_ratio <= 1.0,
            "tightness violated: {}",
            rep.worst_ratio
        );
        // full square has ΔS = 0
        let full = rep
            .rectangles
            .iter()
            .find(|r| r.s == 0.0 && r.sp == 1.0 && r.t == 0.0 && r.tp == 1.0)
            .unwrap();
        assert!(full.fourth_moment < 1e-20);
    }

    #[test]
    fn gaussianity_null_and_alternative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let normal: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let (zs, zk) = gaussianity_diag(&normal).unwrap();
        assert!(zs.abs() < 4.0 && zk.abs() < 4.0, "null z-scores {zs}, {zk}");
        let expo: Vec<f64> = (0..10_000).map(|_| -rng.gen::<f64>().ln()).collect();
        let (_, zk) = gaussianity_diag(&expo).unwrap();
        assert!(zk > 4.0, "exponential kurtosis z {zk}");
        assert!(gaussianity_diag(&vec![1.0; 100]).is_err());
    }

    #[test]
    fn scaling_permutation_flat() {
        let spec = EnsembleSpec::permutation(6);
        let rep = scaling_scan(&spec, &[50, 100, 200], 120, 0.5, 0.5).unwrap();
        assert!(rep.slope.abs() < 0.4, "slope {} ± {}", rep.slope, rep.slope_se);
    }
}
