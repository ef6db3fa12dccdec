//! Stand-alone implementations of the linear-algebra and analysis
//! lemmas used as exact test oracles.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::ensembles::SymmetricMatrix;
use crate::error::{Error, Result};
use crate::linalg::resolvent;

/// The Schur-complement trace identity.
///
/// For `G = (z−A)⁻¹`, `P` diagonal, and `G^{(k)}` the resolvent of `A`
/// with row/column `k` removed,
///
/// `Tr(PG) − Tr(P^{(k)}G^{(k)})
///   = (P_kk + a_k* G^{(k)} P^{(k)} G^{(k)} a_k) / (z − a_kk − a_k* G^{(k)} a_k)`
///
/// with `a_k` the k-th column of `A` without its k-th entry.  Returns
/// `(lhs, rhs)` computed independently (lhs by two direct inversions),
/// and verifies the companion bound `|lhs| ≤ 5‖P‖_∞/|Im z|`.
pub fn schur_trace_delta(
    a: &SymmetricMatrix,
    p_diag: &[f64],
    k: usize,
    z: Complex64,
) -> Result<(Complex64, Complex64)> {
    let n = a.n;
    if z.im == 0.0 {
        return Err(Error::Domain("schur_trace_delta requires Im z ≠ 0".into()));
    }
    if k >= n || p_diag.len() != n {
        return Err(Error::Parameter(format!(
            "index k = {k} or P size {} incompatible with n = {n}",
            p_diag.len()
        )));
    }

    // Full resolvent and trace.
    let g = resolvent(n, &a.entries, z)?;
    let mut tr_pg = Complex64::new(0.0, 0.0);
    for i in 0..n {
        tr_pg += p_diag[i] * g[i + i * n];
    }

    // Minor with row/column k removed.
    let m = n - 1;
    let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    let mut a_minor = vec![0.0f64; m * m];
    for (ii, &i) in keep.iter().enumerate() {
        for (jj, &j) in keep.iter().enumerate() {
            a_minor[ii * m + jj] = a.get(i, j);
        }
    }
    let gk = resolvent(m, &a_minor, z)?;
    let mut tr_pgk = Complex64::new(0.0, 0.0);
    for (ii, &i) in keep.iter().enumerate() {
        tr_pgk += p_diag[i] * gk[ii + ii * m];
    }
    let lhs = tr_pg - tr_pgk;

    // Right-hand side from the Schur complement.
    let ak: Vec<f64> = keep.iter().map(|&i| a.get(i, k)).collect();
    // v = G^{(k)} a_k ;  u = P^{(k)} v ;  w = G^{(k)} u
    let mut v = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..m {
            s += gk[i + j * m] * ak[j];
        }
        v[i] = s;
    }
    let mut quad_pgg = Complex64::new(0.0, 0.0); // a_k* G P G a_k (G symmetric)
    let mut quad_g = Complex64::new(0.0, 0.0); // a_k* G a_k
    for i in 0..m {
        quad_g += ak[i] * v[i];
        // (G P G)_{a,a} = Σ_i P_i v_i² since G^{(k)} is complex symmetric
        quad_pgg += p_diag[keep[i]] * v[i] * v[i];
    }
    let rhs = (p_diag[k] + quad_pgg) / (z - a.get(k, k) - quad_g);

    // Companion bound.
    let p_norm = p_diag.iter().fold(0.0f64, |mx, &x| mx.max(x.abs()));
    let bound = 5.0 * p_norm / z.im.abs();
    if lhs.norm() > bound * (1.0 + 1e-9) {
        return Err(Error::Numeric(format!(
            "resolvent-difference bound violated: |lhs| = {} > {bound}",
            lhs.norm()
        )));
    }
    Ok((lhs, rhs))
}

/// The universal radius R of the product–exponential lemma: largest r
/// (up to a coarse search grid) such that |log(1+z) − z| ≤ |z|² on
/// |z| ≤ r.  Computed once, numerically (the source only asserts
/// existence of a universal constant); ≈ 0.68.
pub fn prod_exp_radius() -> f64 {
    static R: OnceLock<f64> = OnceLock::new();
    *R.get_or_init(|| {
        // |log(1+z)−z|/|z|² is maximized on the circle |z| = r at z = −r
        // (closest approach to the singularity), but scan the circle to
        // stay assumption-free.
        let ok = |r: f64| -> bool {
            let m = 720;
            for k in 0..m {
                let th = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                let z = Complex64::from_polar(r, th);
                let gap = ((Complex64::new(1.0, 0.0) + z).ln() - z).norm();
                if gap > r * r {
                    return false;
                }
            }
            true
        };
        let mut lo = 0.0;
        let mut hi = 1.0;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    })
}

/// Product–exponential gap: compares `P = Π(1 + u_i/n)` with
/// `e^S, S = (1/n)Σu_i`.
///
/// Returns `(gap, bound, applicable)` where `gap = |P − e^S|`,
/// `bound = (M²/n)e^{|S| + M²/n}` with `M = max|u_i|`, and
/// `applicable = (M/n ≤ R)`.  When applicable, asserts `gap ≤ bound`.
pub fn prod_exp_gap(u: &[Complex64], n: usize) -> Result<(f64, f64, bool)> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let nf = n as f64;
    let mut prod = Complex64::new(1.0, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    let mut m_max = 0.0f64;
    for &ui in u {
        prod *= Complex64::new(1.0, 0.0) + ui / nf;
        s += ui / nf;
        m_max = m_max.max(ui.norm());
    }
    let gap = (prod - s.exp()).norm();
    let m2n = m_max * m_max / nf;
    let bound = m2n * (s.norm() + m2n).exp();
    let applicable = m_max / nf <= prod_exp_radius();
    if applicable && gap > bound * (1.0 + 1e-9) + 1e-300 {
        return Err(Error::Numeric(format!(
            "product–exponential bound violated: gap {gap} > bound {bound}"
        )));
    }
    Ok((gap, bound, applicable))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, EnsembleSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn schur_zero_matrix() {
        let a = SymmetricMatrix { n: 2, entries: vec![0.0; 4] };
        let p = vec![1.0, 1.0];
        let z = Complex64::new(0.0, 1.0);
        let (lhs, rhs) = schur_trace_delta(&a, &p, 0, z).unwrap();
        // G = z⁻¹I: Tr(PG) = 2/z, minor trace = 1/z, difference = 1/z = −i
        let want = z.inv();
        assert!((lhs - want).norm() < 1e-13);
        assert!((rhs - want).norm() < 1e-13);
    }

    #[test]
    fn schur_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..100 {
            let n = rng.gen_range(3..=50);
            let spec = EnsembleSpec::gaussian(1.0, 1000 + trial);
            let a = sample_matrix(&spec, n, 0).unwrap();
            let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let k = rng.gen_range(0..n);
            let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.3..2.0));
            let (lhs, rhs) = schur_trace_delta(&a, &p, k, z).unwrap();
            assert!(
                (lhs - rhs).norm() < 1e-10,
                "trial {trial}: lhs {lhs} vs rhs {rhs}"
            );
        }
    }

    #[test]
    fn schur_bound_tight_config() {
        // ‖P‖∞ = 1, z = 0.5i: the identity call itself asserts
        // |lhs| ≤ 5/0.5 = 10 on every instance.
        for seed in 0..20 {
            let spec = EnsembleSpec::levy(1.2, 1.0, seed);
            let a = sample_matrix(&spec, 50, 0).unwrap();
            let p = vec![1.0; 50];
            schur_trace_delta(&a, &p, 7, Complex64::new(0.0, 0.5)).unwrap();
        }
    }

    #[test]
    fn radius_value() {
        let r = prod_exp_radius();
        assert!(r > 0.5 && r < 0.9, "R = {r}");
    }

    #[test]
    fn prod_exp_cases() {
        // all zeros
        let (gap, bound, app) = prod_exp_gap(&vec![Complex64::new(0.0, 0.0); 10], 10).unwrap();
        assert!(gap < 1e-15 && bound == 0.0 && app);

        // u ≡ 1, n = 100: gap = |1.01^100 − e|
        let (gap, bound, app) = prod_exp_gap(&vec![Complex64::new(1.0, 0.0); 100], 100).unwrap();
        let direct = (1.01f64.powi(100) - 1f64.exp()).abs();
        assert!((gap - direct).abs() < 1e-12);
        assert!(app && gap <= bound);

        // inapplicable guard
        let big = vec![Complex64::new(500.0, 0.0); 4];
        let (_, _, app) = prod_exp_gap(&big, 4).unwrap();
        assert!(!app);
    }

    #[test]
    fn prod_exp_random_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=50);
            let len = rng.gen_range(1..=n);
            let scale = rng.gen_range(0.01..0.6) * n as f64;
            let u: Vec<Complex64> = (0..len)
                .map(|_| {
                    Complex64::from_polar(
                        rng.gen_range(0.0..scale),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            // errors only if the bound is violated while applicable
            prod_exp_gap(&u, n).unwrap();
        }
    }
}
