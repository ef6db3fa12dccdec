//! Cauchy/Stieltjes inversion: recovery of the spectral CDF F_{μΦ}, the
//! attained-range set E_Φ, and the covariance of the eigenvalue counting
//! process C_{s,λ} from the covariance of the resolvent field H.
//!
//! All limits Im z ↓ 0 are computed on a descending η-schedule followed
//! by a least-squares linear extrapolation in η (the smoothing bias of a
//! Poisson-kernel convolution is O(η) at continuity points).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fixedpoint::{SolverConfig, UnivariateSolver};
use crate::philib::PhiModel;

/// Descending η values for the boundary limit, with linear η → 0
/// extrapolation.
#[derive(Debug, Clone)]
pub struct EtaSchedule {
    etas: Vec<f64>,
}

/// An extrapolated limit together with the maximum deviation of the
/// linear fit from the data (a self-diagnostic of the error model).
#[derive(Debug, Clone, Copy)]
pub struct Extrapolated {
    pub value: f64,
    pub fit_residual: f64,
}

impl Default for EtaSchedule {
    fn default() -> Self {
        EtaSchedule { etas: vec![0.2, 0.1, 0.05] }
    }
}

impl EtaSchedule {
    pub fn new(etas: Vec<f64>) -> Result<EtaSchedule> {
        if etas.is_empty() {
            return Err(Error::Parameter("η schedule must be nonempty".into()));
        }
        if etas.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Parameter("η values must be positive".into()));
        }
        if etas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Parameter("η schedule must be strictly descending".into()));
        }
        Ok(EtaSchedule { etas })
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    /// Least-squares linear fit v ≈ a + b·η; returns the intercept a.
    /// With a single η the value is passed through unchanged.
    pub fn extrapolate(&self, values: &[f64]) -> Result<Extrapolated> {
        let n = self.etas.len();
        if values.len() != n {
            return Err(Error::Parameter(format!(
                "expected {} values for the schedule, got {}",
                n,
                values.len()
            )));
        }
        if n == 1 {
            return Ok(Extrapolated { value: values[0], fit_residual: 0.0 });
        }
        let nf = n as f64;
        let sx: f64 = self.etas.iter().sum();
        let sxx: f64 = self.etas.iter().map(|e| e * e).sum();
        let sy: f64 = values.iter().sum();
        let sxy: f64 = self.etas.iter().zip(values.iter()).map(|(e, v)| e * v).sum();
        let det = nf * sxx - sx * sx;
        let b = (nf * sxy - sx * sy) / det;
        let a = (sy - b * sx) / nf;
        let fit_residual = self
            .etas
            .iter()
            .zip(values.iter())
            .fold(0.0f64, |m, (e, v)| m.max((a + b * e - v).abs()));
        Ok(Extrapolated { value: a, fit_residual })
    }
}

/// Adaptive Simpson quadrature with an absolute tolerance.
fn adaptive_simpson<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn recurse<F: FnMut(f64) -> f64>(
        f: &mut F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let err = left + right - whole;
        if !err.is_finite() {
            return Err(Error::Numeric("non-finite integrand in adaptive quadrature".into()));
        }
        if err.abs() <= 15.0 * tol || depth == 0 {
            if depth == 0 && err.abs() > 1e3 * tol {
                return Err(Error::Numeric(
                    "adaptive quadrature failed to converge within depth limit".into(),
                ));
            }
            return Ok(left + right + err / 15.0);
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    if b <= a {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Recover f(λ) = μ((−∞, λ]) from the Cauchy transform
/// K(z) = ∫ dμ(x)/(x − z) of a (possibly signed) measure μ:
/// f(λ) = lim_{η↓0} (1/π) ∫_{−E_window}^{λ} Im K(E + iη) dE.
pub fn invert_cauchy_cdf<K: Fn(Complex64) -> Complex64>(
    k: K,
    lambda: f64,
    schedule: &EtaSchedule,
    e_window: f64,
) -> Result<f64> {
    if !(e_window > 0.0) {
        return Err(Error::Parameter("E_window must be positive".into()));
    }
    let mut per_eta = Vec::with_capacity(schedule.etas().len());
    for &eta in schedule.etas() {
        let mut f = |e: f64| k(Complex64::new(e, eta)).im;
        let integral = adaptive_simpson(&mut f, -e_window, lambda, 1e-9 * (e_window + 1.0))?;
        per_eta.push(integral / std::f64::consts::PI);
    }
    Ok(schedule.extrapolate(&per_eta)?.value)
}

/// The spectral CDF on a λ-grid, with diagnostics.
#[derive(Debug, Clone)]
pub struct SpectralCdf {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest pointwise change made by the clip + isotonic pass.
    pub max_adjustment: f64,
    /// Largest η-fit deviation over the grid (extrapolation diagnostic).
    pub fit_residual: f64,
}

/// F_{μΦ} on `lambda_grid` via Stieltjes inversion of G_{μΦ}:
/// F(λ) = lim_{η↓0} ∫_{−E_window}^{λ} (−1/π)·Im G_{μΦ}(E + iη) dE,
/// computed by a warm-started E-sweep of the fixed-point solver per η,
/// then extrapolated, clipped to [0, 1], and monotonized.
pub fn spectral_cdf(
    model: &PhiModel,
    lambda_grid: &[f64],
    schedule: &EtaSchedule,
    cfg: &SolverConfig,
    e_window: f64,
) -> Result<SpectralCdf> {
    if lambda_grid.is_empty() {
        return Err(Error::Parameter("empty λ grid".into()));
    }
    if lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("λ grid must be strictly ascending".into()));
    }
    let lam_max = *lambda_grid.last().unwrap();
    if !(e_window > 0.0) || lam_max > e_window || lambda_grid[0] < -e_window {
        return Err(Error::Parameter("λ grid must lie inside [−E_window, E_window]".into()));
    }
    let w = e_window;
    let osc_max = w.max(lam_max.abs());
    let n_eta = schedule.etas().len();
    // per λ, the value at each η
    let mut per_eta = vec![vec![0.0f64; lambda_grid.len()]; n_eta];
    for (ei, &eta) in schedule.etas().iter().enumerate() {
        let solver = UnivariateSolver::new(model, Complex64::new(osc_max, eta), cfg)?;
        let step = eta / 3.0;
        let n_pts = (((lam_max + w) / step).ceil() as usize).max(2);
        let step = (lam_max + w) / n_pts as f64;
        // left tail of the smoothed CDF: ≈ −(η/π)·Re G(−W + iη)
        let mut warm: Option<Vec<Complex64>> = None;
        let mut density = Vec::with_capacity(n_pts + 1);
        let mut tail = 0.0;
        for j in 0..=n_pts {
            let e = -w + step * j as f64;
            let z = Complex64::new(e, eta);
            let rho = solver.solve(z, Complex64::new(0.0, 0.0), 0.5, warm.as_deref())?;
            let g = crate::fixedpoint::stieltjes_from(&solver, &rho);
            if j == 0 {
                tail = -(eta / std::f64::consts::PI) * g.re;
            }
            density.push(-g.im / std::f64::consts::PI);
            warm = Some(rho.values);
        }
        // cumulative trapezoid, then interpolate at the λ grid
        let mut cum = vec![tail; n_pts + 1];
        for j in 1..=n_pts {
            cum[j] = cum[j - 1] + 0.5 * step * (density[j - 1] + density[j]);
        }
        for (li, &lam) in lambda_grid.iter().enumerate() {
            let x = (lam + w) / step;
            let j = (x.floor() as usize).min(n_pts - 1);
            let frac = x - j as f64;
            per_eta[ei][li] = cum[j] * (1.0 - frac) + cum[j + 1] * frac;
        }
    }
    let mut values = Vec::with_capacity(lambda_grid.len());
    let mut fit_residual = 0.0f64;
    for li in 0..lambda_grid.len() {
        let data: Vec<f64> = (0..n_eta).map(|ei| per_eta[ei][li]).collect();
        let ex = schedule.extrapolate(&data)?;
        values.push(ex.value);
        fit_residual = fit_residual.max(ex.fit_residual);
    }
    // clip + isotonic regression (pool adjacent violators)
    let raw = values.clone();
    for v in values.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let mut level: Vec<(f64, usize)> = Vec::new(); // (mean, count)
    for &v in &values {
        let mut m = v;
        let mut c = 1usize;
        while let Some(&(pm, pc)) = level.last() {
            if pm <= m {
                break;
            }
            m = (pm * pc as f64 + m * c as f64) / (pc + c) as f64;
            c += pc;
            level.pop();
        }
        level.push((m, c));
    }
    let mut iso = Vec::with_capacity(values.len());
    for &(m, c) in &level {
        iso.extend(std::iter::repeat(m.clamp(0.0, 1.0)).take(c));
    }
    let max_adjustment = raw
        .iter()
        .zip(iso.iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(SpectralCdf {
        lambdas: lambda_grid.to_vec(),
        values: iso,
        max_adjustment,
        fit_residual,
    })
}

/// A detected jump (atom of μΦ) in a CDF sampled on a grid.
#[derive(Debug, Clone, Copy)]
pub struct JumpInfo {
    /// Midpoint of the grid cell containing the jump.
    pub lambda: f64,
    pub size: f64,
}

/// The closure of {0} ∪ range(F) ∪ {1} as disjoint intervals, with the
/// gaps (jumps of F above `jump_tol`) reported.
#[derive(Debug, Clone)]
pub struct EPhiSet {
    pub intervals: Vec<(f64, f64)>,
    pub jumps: Vec<JumpInfo>,
}

pub fn e_phi_set(lambdas: &[f64], f_values: &[f64], jump_tol: f64) -> Result<EPhiSet> {
    if lambdas.len() != f_values.len() || lambdas.is_empty() {
        return Err(Error::Parameter("λ and F grids must match and be nonempty".into()));
    }
    if !(jump_tol > 0.0) {
        return Err(Error::Parameter("jump threshold must be positive".into()));
    }
    let mut intervals = Vec::new();
    let mut jumps = Vec::new();
    let mut lo = 0.0f64; // F(−∞) = 0 always attained
    for i in 1..f_values.len() {
        let d = f_values[i] - f_values[i - 1];
        if d > jump_tol {
            intervals.push((lo, f_values[i - 1]));
            jumps.push(JumpInfo {
                lambda: 0.5 * (lambdas[i - 1] + lambdas[i]),
                size: d,
            });
            lo = f_values[i];
        }
    }
    // the top of the last interval is 1: total mass is always attained
    intervals.push((lo, 1.0f64.max(lo)));
    Ok(EPhiSet { intervals, jumps })
}

/// Gauss–Legendre nodes/weights on [−1, 1] for small n.
fn gl_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    match n {
        2 => Ok((
            vec![-0.5773502691896257, 0.5773502691896257],
            vec![1.0, 1.0],
        )),
        3 => Ok((
            vec![-0.7745966692414834, 0.0, 0.7745966692414834],
            vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
        )),
        4 => Ok((
            vec![
                -0.8611363115940526,
                -0.3399810435848563,
                0.3399810435848563,
                0.8611363115940526,
            ],
            vec![
                0.34785484513745385,
                0.6521451548625461,
                0.6521451548625461,
                0.34785484513745385,
            ],
        )),
        16 => {
            let (x, w) = crate::fixedpoint::quadrature::gauss_legendre_16();
            Ok((x, w))
        }
        _ => Err(Error::Parameter(format!("unsupported Gauss–Legendre order {n}"))),
    }
}

/// E-axis quadrature for the covariance inversion: a coarse panel over
/// the far-left tail plus an `n`-point panel over the bulk up to λ.
fn cov_axis_nodes(w: f64, lambda: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let push_panel = |a: f64, b: f64, order: usize, out: &mut Vec<(f64, f64)>| -> Result<()> {
        let (x, wt) = gl_rule(order)?;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (xi, wi) in x.iter().zip(wt.iter()) {
            out.push((mid + half * xi, half * wi));
        }
        Ok(())
    };
    let split = -1.0;
    if lambda > split && -w < split {
        push_panel(-w, split, 2, &mut out)?;
        push_panel(split, lambda, n, &mut out)?;
    } else {
        push_panel(-w, lambda, n, &mut out)?;
    }
    Ok(out)
}

/// Cov(C_{s,λ}, C_{s′,λ′}) from the limit covariance of the resolvent
/// field H = X:
///
///   E[C C′] = (1/π²)·lim_{η↓0} ∬_{E ≤ λ, E′ ≤ λ′} E[Im H Im H′] dE dE′,
///   E[Im H(z) Im H(z′)] = −(1/2)·Re[ C(s,z;s′,z′) − C(s,z;s′,z̄′) ],
///
/// using the conjugation symmetry of the limit covariance.  `limit_cov`
/// is the covariance handle (s, z, s′, z′) ↦ C(s,z;s′,z′).
pub fn cov_c_from_h<F>(
    mut limit_cov: F,
    s1: f64,
    lambda1: f64,
    s2: f64,
    lambda2: f64,
    schedule: &EtaSchedule,
    e_window: f64,
    nodes_per_axis: usize,
) -> Result<f64>
where
    F: FnMut(f64, Complex64, f64, Complex64) -> Result<Complex64>,
{
    if !(0.0..=1.0).contains(&s1) || !(0.0..=1.0).contains(&s2) {
        return Err(Error::Parameter("s must lie in [0,1]".into()));
    }
    if !(e_window > 0.0) || lambda1 < -e_window || lambda2 < -e_window {
        return Err(Error::Parameter("λ must lie to the right of −E_window".into()));
    }
    if s1 == 0.0 || s2 == 0.0 {
        return Ok(0.0); // C_0 ≡ 0
    }
    let symmetric = s1 == s2 && lambda1 == lambda2;
    let mut per_eta = Vec::with_capacity(schedule.etas().len());
    for &eta in schedule.etas() {
        let ax1 = cov_axis_nodes(e_window, lambda1, nodes_per_axis)?;
        let ax2 = cov_axis_nodes(e_window, lambda2, nodes_per_axis)?;
        let mut total = 0.0;
        for (i, &(e1, w1)) in ax1.iter().enumerate() {
            let z1 = Complex64::new(e1, eta);
            let j0 = if symmetric { i } else { 0 };
            for &(e2, w2) in &ax2[j0..] {
                let z2 = Complex64::new(e2, eta);
                let c_same = limit_cov(s1, z1, s2, z2)?;
                let c_mixed = limit_cov(s1, z1, s2, z2.conj())?;
                let imim = -0.5 * (c_same - c_mixed).re;
                let mult = if symmetric && e2 != e1 { 2.0 } else { 1.0 };
                total += mult * w1 * w2 * imim;
            }
        }
        per_eta.push(total / (std::f64::consts::PI * std::f64::consts::PI));
    }
    Ok(schedule.extrapolate(&per_eta)?.value)
}
