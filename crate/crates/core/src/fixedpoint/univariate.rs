//! Univariate fixed-point solver for the functions ρ_z and ρ_{z,z̃,s},
//! the Stieltjes transform of the limit spectral law, and the linear
//! functional L_u built from them.
//!
//! The equations solved (collocation on a shared quadrature grid, damped
//! Picard iteration with continuation in Im z):
//!
//! * ρ_{z,z̃,s}(t) = t ∫₀^∞ g(ty)·(s·e^{iy·sgn·z̃} + (1−s))·
//!   e^{iy·sgn·(z−s·z̃)}·e^{ρ(y)} dy, with sgn = sign(Im z); ρ_z is the
//!   special case z̃ = 0 (any s).
//! * G_{μΦ}(z) = −i·sgn·∫₀^∞ e^{i·sgn·t·z + ρ_z(t)} dt.
//! * L_u(z,s) = −∫₀^∞ (1/t)·∂_{z̃}|₀ [e^{i·sgn·t·(z+z̃(1_{u≤s}−s))}
//!   e^{ρ_{z,z̃,s}(t)}] dt, evaluated by central differences in z̃ taken
//!   inside the integral (so the O(1) common factor cancels exactly)
//!   with one Richardson step.
//!
//! Kernel evaluation: the atomic-family kernel g(ty) = −Σ w·J₁(2√(x t y))
//! /√(x t y) oscillates in √(ty), so the n² kernel values are read per
//! iteration from a precomputed table in v = √(ty) (one multiply per
//! entry via √t·√y); the Lévy kernel (ty)^{α/2−1} is separable and uses
//! a rank-one fast path.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fixedpoint::quadrature::{build_grid, Grid};
use crate::philib::PhiModel;

/// Tuning knobs of the Picard solvers.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Quadrature/collocation node budget.
    pub max_nodes: usize,
    /// Sup-norm residual target.
    pub tol: f64,
    /// Iteration cap per continuation stage.
    pub max_iter: usize,
    /// Initial Picard damping factor in (0, 1].
    pub damping: f64,
    /// Continuation starts at Im z = ±this and halves down to the target.
    pub continuation_start: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_nodes: 6144,
            tol: 1e-9,
            max_iter: 250,
            damping: 0.7,
            continuation_start: 8.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_nodes < 64 {
            return Err(Error::Parameter("max_nodes must be ≥ 64".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1e-6) {
            return Err(Error::Parameter(format!(
                "tol must lie in (0, 1e-6), got {}",
                self.tol
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Parameter("damping must lie in (0, 1]".into()));
        }
        if self.max_iter == 0 || self.continuation_start <= 0.0 {
            return Err(Error::Parameter("max_iter and continuation_start must be positive".into()));
        }
        Ok(())
    }
}

/// True iff (z, z̃) lies in the domain ℂ²_s: Im z ≠ 0 and both
/// Im(z+(1−s)z̃) and Im(z−s·z̃) share its sign.
pub fn domain_pair_ok(z: Complex64, z_tilde: Complex64, s: f64) -> bool {
    if z.im == 0.0 {
        return false;
    }
    let sgn = z.im.signum();
    sgn * (z + (1.0 - s) * z_tilde).im > 0.0 && sgn * (z - s * z_tilde).im > 0.0
}

/// A converged collocation solution ρ on a quadrature grid.
#[derive(Debug, Clone)]
pub struct RhoSolution {
    pub z: Complex64,
    pub z_tilde: Complex64,
    pub s: f64,
    pub grid: Grid,
    /// ρ at the grid nodes.
    pub values: Vec<Complex64>,
    /// Final sup-norm residual of the defining equation on the nodes.
    pub residual: f64,
    pub iterations: usize,
}

impl RhoSolution {
    /// Interpolated ρ(t): 4-point Lagrange in log t between nodes,
    /// the model's t^{1+γ} power law below the first node, constant
    /// beyond the last (where the solution is only used with weights
    /// already ≈ e^{−δt}).
    pub fn eval(&self, t: f64, gamma: f64) -> Complex64 {
        let nodes = &self.grid.nodes;
        let n = nodes.len();
        if t <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if t <= nodes[0] {
            return self.values[0] * (t / nodes[0]).powf(1.0 + gamma);
        }
        if t >= nodes[n - 1] {
            return self.values[n - 1];
        }
        let k = nodes.partition_point(|&x| x < t).min(n - 2).max(2) - 2;
        let k = k.min(n - 4);
        let lx: [f64; 4] = [
            nodes[k].ln(),
            nodes[k + 1].ln(),
            nodes[k + 2].ln(),
            nodes[k + 3].ln(),
        ];
        let x = t.ln();
        let mut out = Complex64::new(0.0, 0.0);
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (x - lx[b]) / (lx[a] - lx[b]);
                }
            }
            out += w * self.values[k + a];
        }
        out
    }

    /// Largest real part over the nodes (the limit function satisfies
    /// Re ρ ≤ 0).
    pub fn max_re(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(v.re))
    }
}

enum Kernel {
    /// g(ty) = c·(ty)^γ: rank-one, t_i^{1+γ} ⊗ y_j^γ (c real).
    Separable { c: f64, t_pow: Vec<f64>, y_pow: Vec<f64> },
    /// Table of g over v = √(ty), uniform spacing; one multiply
    /// per entry via √t·√y.
    Table { sqrt_nodes: Vec<f64>, table: Vec<f64>, inv_dv: f64 },
}

/// Collocation solver for one model at one target z (the grid and
/// kernel are reused across z̃/s variations and warm-started sweeps
/// whose decay rate is at least that of the target).
pub struct UnivariateSolver {
    pub model: PhiModel,
    pub grid: Grid,
    kernel: Kernel,
    pub cfg: SolverConfig,
}

impl UnivariateSolver {
    pub fn new(model: &PhiModel, z: Complex64, cfg: &SolverConfig) -> Result<UnivariateSolver> {
        cfg.validate()?;
        if z.im == 0.0 {
            return Err(Error::Domain("solver target needs Im z ≠ 0".into()));
        }
        let delta = z.im.abs();
        let is_levy = model.m_atoms.is_empty();
        let x_max = model
            .m_atoms
            .iter()
            .fold(0.0f64, |m, a| m.max(a.location));
        // Panel sizing must resolve the kernel's own oscillation
        // (frequency √(x·t/y) in y for row t); fold a conservative
        // surrogate into the oscillation rate, with one refinement pass
        // in case the budget truncates the domain.
        let mut t_est = 27.631 / delta;
        let mut grid = loop {
            let osc_k = if is_levy { 0.0 } else { 0.4 * (x_max * t_est).sqrt() };
            let g = build_grid(model.gamma, delta, z.re.abs() + osc_k, cfg.max_nodes);
            if g.t_max >= t_est * 0.999 || g.t_max >= t_est {
                break g;
            }
            if (t_est - g.t_max) / t_est < 0.05 {
                break g;
            }
            t_est = g.t_max;
        };
        grid.nodes.shrink_to_fit();

        let kernel = if is_levy {
            let gamma = model.alpha / 2.0 - 1.0;
            Kernel::Separable {
                c: model.c_alpha.re,
                t_pow: grid.nodes.iter().map(|t| t.powf(1.0 + gamma)).collect(),
                y_pow: grid.nodes.iter().map(|y| y.powf(gamma)).collect(),
            }
        } else {
            let v_max = grid.t_max * 1.0001;
            let dv = if x_max > 0.0 { 0.05 / x_max.sqrt() } else { v_max / 16.0 };
            let len = (v_max / dv).ceil() as usize + 4;
            let mut table = Vec::with_capacity(len);
            for k in 0..len {
                let v = dv * k as f64;
                table.push(model.g_unchecked(v * v).re);
            }
            Kernel::Table {
                sqrt_nodes: grid.nodes.iter().map(|t| t.sqrt()).collect(),
                table,
                inv_dv: 1.0 / dv,
            }
        };
        Ok(UnivariateSolver { model: model.clone(), grid, kernel, cfg: cfg.clone() })
    }

    /// out_i = t_i Σ_j g(t_i y_j) f_j (f already carries quadrature
    /// weights and the phase/exponential factors).
    fn apply(&self, f: &[Complex64], out: &mut [Complex64]) {
        let n = f.len();
        match &self.kernel {
            Kernel::Separable { c, t_pow, y_pow } => {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    s += y_pow[j] * f[j];
                }
                for i in 0..n {
                    out[i] = c * t_pow[i] * s;
                }
            }
            Kernel::Table { sqrt_nodes, table, inv_dv } => {
                let hi = table.len() - 3;
                for i in 0..n {
                    let si = sqrt_nodes[i];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        let p = (si * sqrt_nodes[j] * inv_dv).min(hi as f64);
                        let k = (p as usize).clamp(1, hi - 1);
                        let x = p - k as f64;
                        // 4-point Lagrange on the uniform v-table
                        let g = table[k - 1] * (x * (x - 1.0) * (x - 2.0) * (-1.0 / 6.0))
                            + table[k] * ((x * x - 1.0) * (x - 2.0) * 0.5)
                            + table[k + 1] * (x * (x + 1.0) * (x - 2.0) * (-0.5))
                            + table[k + 2] * (x * (x * x - 1.0) * (1.0 / 6.0));
                        acc += g * f[j];
                    }
                    out[i] = self.grid.nodes[i] * acc;
                }
            }
        }
    }

    /// One application of the fixed-point operator at (z, z̃, s).
    fn picard_rhs(
        &self,
        z: Complex64,
        z_tilde: Complex64,
        s: f64,
        rho: &[Complex64],
        out: &mut [Complex64],
    ) {
        let sgn = z.im.signum();
        let n = rho.len();
        let i_sgn = Complex64::new(0.0, sgn);
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let y = self.grid.nodes[j];
            let pref = s * (i_sgn * y * z_tilde).exp() + (1.0 - s);
            f[j] = self.grid.weights[j]
                * pref
                * (i_sgn * y * (z - s * z_tilde) + rho[j]).exp();
        }
        self.apply(&f, out);
    }

    /// Solve ρ_{z,z̃,s} on the grid.  `warm`, when given, must hold node
    /// values of a nearby solution; continuation in Im z is used
    /// otherwise.
    pub fn solve(
        &self,
        z: Complex64,
        z_tilde: Complex64,
        s: f64,
        warm: Option<&[Complex64]>,
    ) -> Result<RhoSolution> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Parameter(format!("s must lie in [0,1], got {s}")));
        }
        if !domain_pair_ok(z, z_tilde, s) {
            return Err(Error::Domain(format!(
                "(z, z̃) = ({z}, {z_tilde}) outside the admissible domain for s = {s}"
            )));
        }
        let sgn = z.im.signum();
        let im_target = z.im.abs();
        let mut stages = Vec::new();
        if warm.is_none() {
            let mut im = self.cfg.continuation_start;
            while im > im_target * 1.5 {
                stages.push(im);
                im *= 0.5;
            }
        }
        stages.push(im_target);

        let n = self.grid.len();
        let mut rho = match warm {
            Some(w) => {
                if w.len() != n {
                    return Err(Error::Parameter("warm start has wrong node count".into()));
                }
                w.to_vec()
            }
            None => vec![Complex64::new(0.0, 0.0); n],
        };
        let mut total_iters = 0usize;
        let mut residual = f64::INFINITY;
        let n_stages = stages.len();
        for (si, &im) in stages.iter().enumerate() {
            let z_stage = Complex64::new(z.re, sgn * im);
            let stage_tol = if si + 1 == n_stages { self.cfg.tol } else { self.cfg.tol.max(1e-8) };
            let mut d = self.cfg.damping;
            let mut rhs = vec![Complex64::new(0.0, 0.0); n];
            let mut best_res = f64::INFINITY;
            let mut best = rho.clone();
            let mut worse = 0usize;
            let mut converged = false;
            for it in 0..self.cfg.max_iter {
                self.picard_rhs(z_stage, z_tilde, s, &rho, &mut rhs);
                let r = rho
                    .iter()
                    .zip(rhs.iter())
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
                total_iters = total_iters.max(0) + 1;
                if r < best_res {
                    best_res = r;
                    best.copy_from_slice(&rho);
                    worse = 0;
                } else {
                    worse += 1;
                    if worse >= 5 {
                        d *= 0.5;
                        rho.copy_from_slice(&best);
                        worse = 0;
                        if d < 0.02 {
                            break;
                        }
                        continue;
                    }
                }
                if r <= stage_tol {
                    residual = r;
                    converged = true;
                    let _ = it;
                    break;
                }
                for (x, y) in rho.iter_mut().zip(rhs.iter()) {
                    *x = (1.0 - d) * *x + d * *y;
                }
            }
            if !converged {
                if si + 1 == n_stages {
                    return Err(Error::NonConvergence {
                        residual: best_res,
                        iterations: total_iters,
                        context: format!("rho solve at z = {z}, z̃ = {z_tilde}, s = {s}"),
                    });
                }
                // intermediate stages may stop short; carry the best
                // iterate into the next stage
                rho.copy_from_slice(&best);
            }
        }
        Ok(RhoSolution {
            z,
            z_tilde,
            s,
            grid: self.grid.clone(),
            values: rho,
            residual,
            iterations: total_iters,
        })
    }
}

/// Solve ρ_z (the z̃ = 0 case).
pub fn solve_rho_z(model: &PhiModel, z: Complex64, cfg: &SolverConfig) -> Result<RhoSolution> {
    let solver = UnivariateSolver::new(model, z, cfg)?;
    solver.solve(z, Complex64::new(0.0, 0.0), 0.5, None)
}

/// Solve ρ_{z,z̃,s}.
pub fn solve_rho_s(
    model: &PhiModel,
    z: Complex64,
    z_tilde: Complex64,
    s: f64,
    cfg: &SolverConfig,
) -> Result<RhoSolution> {
    let solver = UnivariateSolver::new(model, z, cfg)?;
    solver.solve(z, z_tilde, s, None)
}

/// Stieltjes transform of the limit spectral law from a converged ρ_z.
pub fn stieltjes_from(solver: &UnivariateSolver, rho: &RhoSolution) -> Complex64 {
    let z = rho.z;
    let sgn = z.im.signum();
    let i_sgn = Complex64::new(0.0, sgn);
    let mut g = Complex64::new(0.0, 0.0);
    for ((t, w), r) in solver
        .grid
        .nodes
        .iter()
        .zip(solver.grid.weights.iter())
        .zip(rho.values.iter())
    {
        g += w * (i_sgn * t * z + r).exp();
    }
    // the grid also omits (0, ε): integrand → 1 there
    g += solver.grid.eps;
    let mut out = -i_sgn * g;
    if solver.grid.truncated {
        // first-order tail with ρ frozen at its last node
        let t = solver.grid.t_max;
        out += ((i_sgn * t * z) + rho.values[rho.values.len() - 1]).exp() / z;
    }
    out
}

/// G_{μΦ}(z) for Im z ≠ 0.
pub fn stieltjes_mu_phi(model: &PhiModel, z: Complex64, cfg: &SolverConfig) -> Result<Complex64> {
    let solver = UnivariateSolver::new(model, z, cfg)?;
    let rho = solver.solve(z, Complex64::new(0.0, 0.0), 0.5, None)?;
    Ok(stieltjes_from(&solver, &rho))
}

/// L_u(z, s) from solutions at z̃ = ±h, ±h/2 (differences taken inside
/// the integral, one Richardson extrapolation step).
pub fn eval_l_u_with(
    solver: &UnivariateSolver,
    z: Complex64,
    s: f64,
    u: f64,
    base: &RhoSolution,
) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Parameter(format!("u must lie in [0,1], got {u}")));
    }
    let f = if u <= s { 1.0 - s } else { -s };
    let h = 1e-4 * z.norm().max(1.0);
    let sgn = z.im.signum();
    let i_sgn = Complex64::new(0.0, sgn);
    let mut diffs = [Complex64::new(0.0, 0.0); 2];
    for (idx, &hh) in [h, 0.5 * h].iter().enumerate() {
        let zt = Complex64::new(hh, 0.0);
        let rp = solver.solve(z, zt, s, Some(&base.values))?;
        let rm = solver.solve(z, -zt, s, Some(&base.values))?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, (t, w)) in solver
            .grid
            .nodes
            .iter()
            .zip(solver.grid.weights.iter())
            .enumerate()
        {
            let ep = (i_sgn * t * (z + hh * f) + rp.values[j]).exp();
            let em = (i_sgn * t * (z - hh * f) + rm.values[j]).exp();
            acc += w / t * (ep - em);
        }
        diffs[idx] = acc / (2.0 * hh);
    }
    Ok(-(4.0 * diffs[1] - diffs[0]) / 3.0)
}

/// L_u(z, s), cold-started.
pub fn eval_l_u(
    model: &PhiModel,
    z: Complex64,
    s: f64,
    u: f64,
    cfg: &SolverConfig,
) -> Result<Complex64> {
    let solver = UnivariateSolver::new(model, z, cfg)?;
    let base = solver.solve(z, Complex64::new(0.0, 0.0), s, None)?;
    eval_l_u_with(&solver, z, s, u, &base)
}
