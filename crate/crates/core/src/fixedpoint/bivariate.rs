//! Bivariate fixed-point solver for ρ_u, the pair functional L_u(s,z;s′,z′)
//! and the limit covariance C(s,z;s′,z′) = ∫₀¹ (L_u(s,z;s′,z′) −
//! L_u(z,s)L_u(z′,s′)) du of the resolvent process.
//!
//! For s₁ ≤ s₂ and the exact shared-row weights c₁ = u∧s₁,
//! c₂ = u∧s₂ − u∧s₁, c₃ = u − u∧s₂ (the fractions of indices j ≤ un
//! falling before ns₁, between ns₁ and ns₂, and after ns₂), the
//! function ρ_u(t₁,t₂) solves
//!
//! ρ_u(t₁,t₂) = Σ_β c_β ∬ e^{Σ_r i·sgn_r·(v_r/t_r)·ζ_{rβ}}
//!              e^{ρ_u(v₁/t₁, v₂/t₂)} dτ̃(v₁,v₂)
//!            + Σ_r t_r ∫ g(t_r y)·{(s_r−u)⁺e^{iy·sgn_r·z̃_r} + 1−max(s_r,u)}
//!              ·e^{iy·sgn_r(z_r−s_r z̃_r)}·e^{ρ_{z_r,z̃_r,s_r}(y)} dy
//!
//! with ζ_{rβ} = z_r + z̃_r(1_{β≤r} − s_r) and τ̃ = τ + δ₀⊗μ + μ⊗δ₀.
//! Consistency checks on the weights: c_β + its j > un counterpart
//! reconstructs the univariate weights (u∧s₁ + (s₁−u)⁺ = s₁ etc.), and
//! at u = 1 the equation collapses to the univariate ρ equation.
//! Structure exploited by the solver, after substituting w_r = v_r/t_r:
//!
//! * the δ₀⊗μ and μ⊗δ₀ parts of τ̃ only see the boundary values
//!   ρ_u(0,·) and ρ_u(·,0), which solve *univariate* equations
//!   ("edges"): edge_r = ψ_r + t∫g(tw)·[(u∧s_r)e^{iw·sgn_r·ζ_r¹} +
//!   (u−u∧s_r)e^{iw·sgn_r·ζ_r⁰}]·e^{edge_r(w)} dw, with ψ_r the r-th
//!   univariate correction term; at u = 1 this is exactly the
//!   ρ_{z_r,z̃_r,s_r} equation and at u = 0 it is ψ_r itself.
//! * ρ_u then decomposes as edge₁(t₁) + edge₂(t₂) + coupling, where the
//!   coupling comes from the absolutely continuous part τ whose density
//!   Σ_a w·x·j1n(x v₁)j1n(x v₂) is separable per atom; on the
//!   tensor-product collocation grid each Picard step is two small
//!   matrix products A₁·(E∘M)·A₂ᵀ with the β-sum folded into a rank-2
//!   phase mask M.
//!
//! The solver is restricted to the atomic (exploding-moments) family,
//! where τ̃ is available in closed form.

use num_complex::Complex64;

use crate::ensembles::Atom;
use crate::error::{Error, Result};
use crate::fixedpoint::quadrature::{build_grid_with, Grid, PanelShape};
use crate::fixedpoint::univariate::domain_pair_ok;
use crate::philib::PhiModel;
use crate::special::j1_normalized;

/// 4-point Gauss–Legendre rule on [−1,1] (positive half mirrored).
const GL4_X: [f64; 2] = [0.3399810435848563, 0.8611363115940526];
const GL4_W: [f64; 2] = [0.6521451548625461, 0.34785484513745385];

/// Tuning knobs of the bivariate solver.
#[derive(Debug, Clone)]
pub struct BivariateConfig {
    /// Collocation node budget per axis.
    pub max_nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Continuation start for the axis ρ solves.
    pub continuation_start: f64,
    /// Relative z̃ step of the mixed finite differences.
    pub fd_step: f64,
}

impl Default for BivariateConfig {
    fn default() -> Self {
        BivariateConfig {
            max_nodes: 512,
            tol: 1e-9,
            max_iter: 300,
            damping: 0.7,
            continuation_start: 8.0,
            fd_step: 1e-3,
        }
    }
}

/// One collocation axis: grid, the g-kernel matrix and the per-atom
/// Bessel factors of the τ coupling.
struct Axis {
    grid: Grid,
    z: Complex64,
    sgn: f64,
    /// t_i·ω_j·g(t_i y_j), row-major n×n.
    k: Vec<f64>,
    /// Per τ atom: t_i·ω_q·j1n(x·t_i·w_q), row-major n×n.
    a_mats: Vec<Vec<f64>>,
}

impl Axis {
    fn new(model: &PhiModel, atoms: &[Atom], z: Complex64, cfg: &BivariateConfig) -> Result<Axis> {
        if z.im == 0.0 {
            return Err(Error::Domain("axis point needs Im z ≠ 0".into()));
        }
        let delta = z.im.abs();
        let x_max = atoms.iter().fold(0.0f64, |m, a| m.max(a.location));
        let shape = PanelShape { log_du: 1.2, width_factor: 2.5, eps: Some(1e-10) };
        let mut t_est = 27.631 / delta;
        let grid = loop {
            let osc_k = 0.4 * (x_max * t_est).sqrt();
            let g = build_grid_with(0.0, delta, z.re.abs() + osc_k, cfg.max_nodes, shape);
            if g.t_max >= t_est * 0.95 {
                break g;
            }
            t_est = g.t_max;
        };
        let n = grid.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            let t = grid.nodes[i];
            for j in 0..n {
                k[i * n + j] = t * grid.weights[j] * model.g_unchecked(t * grid.nodes[j]).re;
            }
        }
        let mut a_mats = Vec::new();
        for a in atoms {
            if a.location <= 0.0 {
                a_mats.push(Vec::new());
                continue;
            }
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                let t = grid.nodes[i];
                for q in 0..n {
                    m[i * n + q] =
                        t * grid.weights[q] * j1_normalized(a.location * t * grid.nodes[q]);
                }
            }
            a_mats.push(m);
        }
        Ok(Axis { grid, z, sgn: z.im.signum(), k, a_mats })
    }

    /// out = base + coef·K·(phase ∘ e^{rho})
    fn picard_rhs(
        &self,
        base: Option<&[Complex64]>,
        coef: f64,
        phase: &[Complex64],
        rho: &[Complex64],
        out: &mut [Complex64],
    ) {
        let n = rho.len();
        let f: Vec<Complex64> = phase.iter().zip(rho.iter()).map(|(p, r)| p * r.exp()).collect();
        for i in 0..n {
            let row = &self.k[i * n..(i + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += row[j] * f[j];
            }
            out[i] = coef * acc + base.map_or(Complex64::new(0.0, 0.0), |b| b[i]);
        }
    }
}

/// Damped Picard iteration on one axis; returns (solution, residual,
/// iterations).
fn damped_picard(
    axis: &Axis,
    base: Option<&[Complex64]>,
    coef: f64,
    phase: &[Complex64],
    init: Vec<Complex64>,
    cfg: &BivariateConfig,
    tol: f64,
    context: &str,
) -> Result<(Vec<Complex64>, f64, usize)> {
    let n = init.len();
    let mut rho = init;
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut d = cfg.damping;
    let mut best_res = f64::INFINITY;
    let mut best = rho.clone();
    let mut worse = 0usize;
    for it in 0..cfg.max_iter {
        axis.picard_rhs(base, coef, phase, &rho, &mut rhs);
        let r = rho
            .iter()
            .zip(rhs.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
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
        if r <= tol {
            return Ok((rho, r, it + 1));
        }
        for (x, y) in rho.iter_mut().zip(rhs.iter()) {
            *x = (1.0 - d) * *x + d * *y;
        }
    }
    Err(Error::NonConvergence {
        residual: best_res,
        iterations: cfg.max_iter,
        context: context.to_string(),
    })
}

/// Kernel prefactor of the univariate ρ_{z,z̃,s} equation on an axis:
/// s·e^{iy·sgn(z+(1−s)z̃)} + (1−s)·e^{iy·sgn(z−sz̃)}.
fn rho_phase(axis: &Axis, z: Complex64, zt: Complex64, s: f64) -> Vec<Complex64> {
    let i_sgn = Complex64::new(0.0, axis.sgn);
    axis.grid
        .nodes
        .iter()
        .map(|&y| {
            s * (i_sgn * y * (z + (1.0 - s) * zt)).exp()
                + (1.0 - s) * (i_sgn * y * (z - s * zt)).exp()
        })
        .collect()
}

/// Solve ρ_{z,z̃,s} on an axis grid with continuation in Im z.
fn axis_rho(
    axis: &Axis,
    zt: Complex64,
    s: f64,
    cfg: &BivariateConfig,
    warm: Option<&[Complex64]>,
) -> Result<Vec<Complex64>> {
    let z = axis.z;
    if !domain_pair_ok(z, zt, s) {
        return Err(Error::Domain(format!(
            "(z, z̃) = ({z}, {zt}) outside the admissible domain for s = {s}"
        )));
    }
    let n = axis.grid.len();
    let im_target = z.im.abs();
    let mut stages = Vec::new();
    if warm.is_none() {
        let mut im = cfg.continuation_start;
        while im > im_target * 1.5 {
            stages.push(im);
            im *= 0.5;
        }
    }
    stages.push(im_target);
    let mut rho = warm.map_or(vec![Complex64::new(0.0, 0.0); n], |w| w.to_vec());
    let n_stages = stages.len();
    for (si, &im) in stages.iter().enumerate() {
        let z_stage = Complex64::new(z.re, axis.sgn * im);
        let phase = rho_phase(axis, z_stage, zt, s);
        let tol = if si + 1 == n_stages { cfg.tol } else { cfg.tol.max(1e-8) };
        match damped_picard(axis, None, 1.0, &phase, rho.clone(), cfg, tol, "axis rho") {
            Ok((v, _, _)) => rho = v,
            Err(e) => {
                if si + 1 == n_stages {
                    return Err(e);
                }
            }
        }
    }
    Ok(rho)
}

/// A converged bivariate solution at one (z̃₁, z̃₂, u).
#[derive(Debug, Clone)]
pub struct BivariateSolution {
    pub u: f64,
    pub n1: usize,
    pub n2: usize,
    /// ρ_u on the tensor grid, row-major n1×n2.
    pub values: Vec<Complex64>,
    /// Boundary functions ρ_u(·, 0) and ρ_u(0, ·).
    pub edge1: Vec<Complex64>,
    pub edge2: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Warm-start state for a repeated solve at nearby parameters.
#[derive(Debug, Clone)]
pub struct BivariateWarm {
    pub edge1: Vec<Complex64>,
    pub edge2: Vec<Complex64>,
    pub rho: Vec<Complex64>,
}

/// Solver for one base point pair (s₁, z₁; s₂, z₂) with s₁ ≤ s₂.
pub struct BivariateSolver {
    pub model: PhiModel,
    atoms: Vec<Atom>,
    s1: f64,
    s2: f64,
    ax1: Axis,
    ax2: Axis,
    pub cfg: BivariateConfig,
}

impl BivariateSolver {
    pub fn new(
        model: &PhiModel,
        s1: f64,
        z1: Complex64,
        s2: f64,
        z2: Complex64,
        cfg: &BivariateConfig,
    ) -> Result<BivariateSolver> {
        if s1 > s2 {
            return Err(Error::Parameter(
                "BivariateSolver requires s1 ≤ s2 (swap the arguments)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&s1) || !(0.0..=1.0).contains(&s2) {
            return Err(Error::Parameter("s must lie in [0,1]".into()));
        }
        let atoms = model.kernel_tau_tilde()?.m_atoms;
        let ax1 = Axis::new(model, &atoms, z1, cfg)?;
        let ax2 = Axis::new(model, &atoms, z2, cfg)?;
        Ok(BivariateSolver {
            model: model.clone(),
            atoms,
            s1,
            s2,
            ax1,
            ax2,
            cfg: cfg.clone(),
        })
    }

    pub fn grids(&self) -> (&Grid, &Grid) {
        (&self.ax1.grid, &self.ax2.grid)
    }

    /// Univariate ρ_{z_r,z̃,s_r} on axis r ∈ {1, 2}.
    pub fn rho_axis(
        &self,
        r: usize,
        zt: Complex64,
        warm: Option<&[Complex64]>,
    ) -> Result<Vec<Complex64>> {
        let (axis, s) = if r == 1 { (&self.ax1, self.s1) } else { (&self.ax2, self.s2) };
        axis_rho(axis, zt, s, &self.cfg, warm)
    }

    /// ψ_r: the univariate correction term of the ρ_u equation.
    fn psi(&self, r: usize, zt: Complex64, u: f64, rho_r: &[Complex64]) -> Vec<Complex64> {
        let (axis, s) = if r == 1 { (&self.ax1, self.s1) } else { (&self.ax2, self.s2) };
        let i_sgn = Complex64::new(0.0, axis.sgn);
        let sp = (s - u).max(0.0);
        let cst = 1.0 - s.max(u);
        let phase: Vec<Complex64> = axis
            .grid
            .nodes
            .iter()
            .zip(rho_r.iter())
            .map(|(&y, rr)| {
                (sp * (i_sgn * y * zt).exp() + cst) * (i_sgn * y * (axis.z - s * zt) + rr).exp()
            })
            .collect();
        let n = axis.grid.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let row = &axis.k[i * n..(i + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += row[j] * phase[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Full solve of ρ_u at (z̃₁, z̃₂, u) given the univariate solutions
    /// ρ_{z_r,z̃_r,s_r} on the axis grids.
    pub fn solve(
        &self,
        zt1: Complex64,
        zt2: Complex64,
        u: f64,
        rho1: &[Complex64],
        rho2: &[Complex64],
        warm: Option<&BivariateWarm>,
    ) -> Result<BivariateSolution> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Parameter(format!("u must lie in [0,1], got {u}")));
        }
        if !domain_pair_ok(self.ax1.z, zt1, self.s1) || !domain_pair_ok(self.ax2.z, zt2, self.s2) {
            return Err(Error::Domain("(z, z̃) outside the admissible domain".into()));
        }
        let n1 = self.ax1.grid.len();
        let n2 = self.ax2.grid.len();

        // Exact β-weights of the shared-row sum (1/n)Σ_{j≤un}: the
        // fraction of those rows with j ≤ ns_r is min(u, s_r), so
        //   c₁ = u∧s₁,  c₂ = u∧s₂ − u∧s₁,  c₃ = u − u∧s₂
        // (summing to u; they reduce to u·(s₁, s₂−s₁, 1−s₂) only at
        // u = 1, where the edge equation is the univariate one).
        let c1 = u.min(self.s1);
        let c2 = u.min(self.s2) - u.min(self.s1);
        let c3 = u - u.min(self.s2);

        // Edges: boundary functions ρ_u(·,0) and ρ_u(0,·); the μ-axis
        // β-sum folds to (u∧s_r)·p_r¹ + (u − u∧s_r)·p_r⁰.
        let psi1 = self.psi(1, zt1, u, rho1);
        let psi2 = self.psi(2, zt2, u, rho2);
        let edge_phase = |axis: &Axis, zt: Complex64, s: f64| -> Vec<Complex64> {
            let i_sgn = Complex64::new(0.0, axis.sgn);
            let cs = u.min(s);
            axis.grid
                .nodes
                .iter()
                .map(|&y| {
                    cs * (i_sgn * y * (axis.z + (1.0 - s) * zt)).exp()
                        + (u - cs) * (i_sgn * y * (axis.z - s * zt)).exp()
                })
                .collect()
        };
        let ph1 = edge_phase(&self.ax1, zt1, self.s1);
        let ph2 = edge_phase(&self.ax2, zt2, self.s2);
        let (edge1, _, it1) = damped_picard(
            &self.ax1,
            Some(&psi1),
            1.0,
            &ph1,
            warm.map_or(psi1.clone(), |w| w.edge1.clone()),
            &self.cfg,
            self.cfg.tol,
            "edge 1",
        )?;
        let (edge2, _, it2) = damped_picard(
            &self.ax2,
            Some(&psi2),
            1.0,
            &ph2,
            warm.map_or(psi2.clone(), |w| w.edge2.clone()),
            &self.cfg,
            self.cfg.tol,
            "edge 2",
        )?;

        // Rank-2 phase mask of the β-sum:
        //   Σ_β c_β φ_{1β}⊗φ_{2β} = (c₁p₁¹+c₂p₁⁰)⊗p₂¹ + c₃p₁⁰⊗p₂⁰.
        let pvec = |axis: &Axis, zt: Complex64, s: f64, up: bool| -> Vec<Complex64> {
            let i_sgn = Complex64::new(0.0, axis.sgn);
            let zeta = if up { axis.z + (1.0 - s) * zt } else { axis.z - s * zt };
            axis.grid.nodes.iter().map(|&w| (i_sgn * w * zeta).exp()).collect()
        };
        let p1_1 = pvec(&self.ax1, zt1, self.s1, true);
        let p1_0 = pvec(&self.ax1, zt1, self.s1, false);
        let p2_1 = pvec(&self.ax2, zt2, self.s2, true);
        let p2_0 = pvec(&self.ax2, zt2, self.s2, false);
        let uvec: Vec<Complex64> = p1_1
            .iter()
            .zip(p1_0.iter())
            .map(|(a, b)| c1 * a + c2 * b)
            .collect();

        // Base part edge₁ ⊕ edge₂.
        let mut base = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                base[i1 * n2 + i2] = edge1[i1] + edge2[i2];
            }
        }

        let mut rho = warm.map_or(base.clone(), |w| w.rho.clone());
        let mut d_mask = vec![Complex64::new(0.0, 0.0); n1 * n2];
        let mut tmp = vec![Complex64::new(0.0, 0.0); n1 * n2];
        let mut rhs = vec![Complex64::new(0.0, 0.0); n1 * n2];
        let mut d = self.cfg.damping;
        let mut best_res = f64::INFINITY;
        let mut best = rho.clone();
        let mut worse = 0usize;
        let mut total_it = it1 + it2;
        for _it in 0..self.cfg.max_iter {
            // D[q1][q2] = (uvec⊗p₂¹ + c₃p₁⁰⊗p₂⁰) ∘ e^{ρ}
            for q1 in 0..n1 {
                let a = uvec[q1];
                let b = c3 * p1_0[q1];
                let row = &mut d_mask[q1 * n2..(q1 + 1) * n2];
                let rrow = &rho[q1 * n2..(q1 + 1) * n2];
                for q2 in 0..n2 {
                    row[q2] = (a * p2_1[q2] + b * p2_0[q2]) * rrow[q2].exp();
                }
            }
            rhs.copy_from_slice(&base);
            for (atom, (a1, a2)) in self
                .atoms
                .iter()
                .zip(self.ax1.a_mats.iter().zip(self.ax2.a_mats.iter()))
            {
                if atom.location <= 0.0 {
                    continue;
                }
                // the u-dependence sits in the c_β weights of the mask
                let c = atom.weight * atom.location;
                // tmp[q1][i2] = Σ_{q2} D[q1][q2]·A2[i2][q2]
                for q1 in 0..n1 {
                    let drow = &d_mask[q1 * n2..(q1 + 1) * n2];
                    let trow = &mut tmp[q1 * n2..(q1 + 1) * n2];
                    for i2 in 0..n2 {
                        let arow = &a2[i2 * n2..(i2 + 1) * n2];
                        let mut acc = Complex64::new(0.0, 0.0);
                        for q2 in 0..n2 {
                            acc += arow[q2] * drow[q2];
                        }
                        trow[i2] = acc;
                    }
                }
                // rhs[i1][i2] += c·Σ_{q1} A1[i1][q1]·tmp[q1][i2]
                for i1 in 0..n1 {
                    let arow = &a1[i1 * n1..(i1 + 1) * n1];
                    let orow = &mut rhs[i1 * n2..(i1 + 1) * n2];
                    for q1 in 0..n1 {
                        let w = c * arow[q1];
                        let trow = &tmp[q1 * n2..(q1 + 1) * n2];
                        for i2 in 0..n2 {
                            orow[i2] += w * trow[i2];
                        }
                    }
                }
            }
            total_it += 1;
            let r = rho
                .iter()
                .zip(rhs.iter())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
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
            if r <= self.cfg.tol {
                return Ok(BivariateSolution {
                    u,
                    n1,
                    n2,
                    values: rho,
                    edge1,
                    edge2,
                    residual: r,
                    iterations: total_it,
                });
            }
            for (x, y) in rho.iter_mut().zip(rhs.iter()) {
                *x = (1.0 - d) * *x + d * *y;
            }
        }
        Err(Error::NonConvergence {
            residual: best_res,
            iterations: total_it,
            context: format!("bivariate rho at u = {u}"),
        })
    }

    /// L_u(s₁,z₁;s₂,z₂) by 4-point mixed differences taken inside the
    /// double integral; the four `sols` must correspond to the z̃ sign
    /// combinations (+,+), (+,−), (−,+), (−,−) at steps (h1, h2).
    pub fn l_pair(
        &self,
        u: f64,
        h1: f64,
        h2: f64,
        sols: [&BivariateSolution; 4],
    ) -> Complex64 {
        let f1 = if u <= self.s1 { 1.0 - self.s1 } else { -self.s1 };
        let f2 = if u <= self.s2 { 1.0 - self.s2 } else { -self.s2 };
        let n1 = self.ax1.grid.len();
        let n2 = self.ax2.grid.len();
        let i1s = Complex64::new(0.0, self.ax1.sgn);
        let i2s = Complex64::new(0.0, self.ax2.sgn);
        // base_r[i] = (ω_i/t_i)·e^{i sgn_r t_i z_r}; shift_r^±[i] = e^{±i sgn_r t_i h_r f_r}
        let base1: Vec<Complex64> = self
            .ax1
            .grid
            .nodes
            .iter()
            .zip(self.ax1.grid.weights.iter())
            .map(|(&t, &w)| w / t * (i1s * t * self.ax1.z).exp())
            .collect();
        let base2: Vec<Complex64> = self
            .ax2
            .grid
            .nodes
            .iter()
            .zip(self.ax2.grid.weights.iter())
            .map(|(&t, &w)| w / t * (i2s * t * self.ax2.z).exp())
            .collect();
        let sh1: Vec<Complex64> =
            self.ax1.grid.nodes.iter().map(|&t| (i1s * t * h1 * f1).exp()).collect();
        let sh2: Vec<Complex64> =
            self.ax2.grid.nodes.iter().map(|&t| (i2s * t * h2 * f2).exp()).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for i1 in 0..n1 {
            let b1p = base1[i1] * sh1[i1];
            let b1m = base1[i1] / sh1[i1];
            let rpp = &sols[0].values[i1 * n2..(i1 + 1) * n2];
            let rpm = &sols[1].values[i1 * n2..(i1 + 1) * n2];
            let rmp = &sols[2].values[i1 * n2..(i1 + 1) * n2];
            let rmm = &sols[3].values[i1 * n2..(i1 + 1) * n2];
            for i2 in 0..n2 {
                let b2p = base2[i2] * sh2[i2];
                let b2m = base2[i2] / sh2[i2];
                acc += b1p * b2p * rpp[i2].exp() - b1p * b2m * rpm[i2].exp()
                    - b1m * b2p * rmp[i2].exp()
                    + b1m * b2m * rmm[i2].exp();
            }
        }
        acc / (4.0 * h1 * h2)
    }

    /// Univariate L_u(z,s) on axis r, from ρ solutions at z̃ = ±h, ±h/2
    /// (Richardson-extrapolated central differences inside the integral).
    /// `f` is the indicator coefficient 1_{u≤s} − s.
    pub fn l_axis(
        &self,
        r: usize,
        f: f64,
        h: f64,
        rho_ph: &[Complex64],
        rho_mh: &[Complex64],
        rho_ph2: &[Complex64],
        rho_mh2: &[Complex64],
    ) -> Complex64 {
        let axis = if r == 1 { &self.ax1 } else { &self.ax2 };
        let i_sgn = Complex64::new(0.0, axis.sgn);
        let mut diffs = [Complex64::new(0.0, 0.0); 2];
        for (idx, (hh, (rp, rm))) in [
            (h, (rho_ph, rho_mh)),
            (0.5 * h, (rho_ph2, rho_mh2)),
        ]
        .into_iter()
        .enumerate()
        {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, (&t, &w)) in axis
                .grid
                .nodes
                .iter()
                .zip(axis.grid.weights.iter())
                .enumerate()
            {
                let ep = (i_sgn * t * (axis.z + hh * f) + rp[j]).exp();
                let em = (i_sgn * t * (axis.z - hh * f) + rm[j]).exp();
                acc += w / t * (ep - em);
            }
            diffs[idx] = acc / (2.0 * hh);
        }
        -(4.0 * diffs[1] - diffs[0]) / 3.0
    }
}

/// Convenience: a single cold ρ_u solve.
pub fn solve_rho_pair(
    model: &PhiModel,
    s1: f64,
    z1: Complex64,
    zt1: Complex64,
    s2: f64,
    z2: Complex64,
    zt2: Complex64,
    u: f64,
    cfg: &BivariateConfig,
) -> Result<BivariateSolution> {
    let solver = BivariateSolver::new(model, s1, z1, s2, z2, cfg)?;
    let rho1 = solver.rho_axis(1, zt1, None)?;
    let rho2 = solver.rho_axis(2, zt2, None)?;
    solver.solve(zt1, zt2, u, &rho1, &rho2, None)
}

/// The limit covariance C(s,z;s′,z′) = ∫₀¹ (L_u(s,z;s′,z′) −
/// L_u(z,s)·L_u(z′,s′)) du; the u-integral is cut at s and s′ where the
/// integrand has kinks, with 4-point Gauss–Legendre per segment.
pub fn limit_cov(
    model: &PhiModel,
    s1: f64,
    z1: Complex64,
    s2: f64,
    z2: Complex64,
    cfg: &BivariateConfig,
) -> Result<Complex64> {
    let (s1, z1, s2, z2) = if s1 <= s2 { (s1, z1, s2, z2) } else { (s2, z2, s1, z1) };
    let solver = BivariateSolver::new(model, s1, z1, s2, z2, cfg)?;
    let h1 = cfg.fd_step * z1.norm().max(1.0);
    let h2 = cfg.fd_step * z2.norm().max(1.0);

    // Univariate ρ solutions per axis (u-independent).
    let base1 = solver.rho_axis(1, Complex64::new(0.0, 0.0), None)?;
    let base2 = solver.rho_axis(2, Complex64::new(0.0, 0.0), None)?;
    let var = |r: usize, base: &[Complex64], h: f64| -> Result<[Vec<Complex64>; 4]> {
        Ok([
            solver.rho_axis(r, Complex64::new(h, 0.0), Some(base))?,
            solver.rho_axis(r, Complex64::new(-h, 0.0), Some(base))?,
            solver.rho_axis(r, Complex64::new(0.5 * h, 0.0), Some(base))?,
            solver.rho_axis(r, Complex64::new(-0.5 * h, 0.0), Some(base))?,
        ])
    };
    let r1 = var(1, &base1, h1)?;
    let r2 = var(2, &base2, h2)?;

    // The univariate L takes two values in u (the indicator flips at s).
    let l1_in = solver.l_axis(1, 1.0 - s1, h1, &r1[0], &r1[1], &r1[2], &r1[3]);
    let l1_out = solver.l_axis(1, -s1, h1, &r1[0], &r1[1], &r1[2], &r1[3]);
    let l2_in = solver.l_axis(2, 1.0 - s2, h2, &r2[0], &r2[1], &r2[2], &r2[3]);
    let l2_out = solver.l_axis(2, -s2, h2, &r2[0], &r2[1], &r2[2], &r2[3]);

    // u segments with Gauss–Legendre nodes.
    let mut cuts = vec![0.0, s1, s2, 1.0];
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut u_nodes = Vec::new();
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b - a < 1e-12 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for k in 0..2 {
            u_nodes.push((mid - half * GL4_X[1 - k], half * GL4_W[1 - k]));
        }
        for k in 0..2 {
            u_nodes.push((mid + half * GL4_X[k], half * GL4_W[k]));
        }
    }

    // z̃ sign combinations for the mixed difference.
    let combos = [(h1, h2), (h1, -h2), (-h1, h2), (-h1, -h2)];
    let mut warms: [Option<BivariateWarm>; 4] = [None, None, None, None];
    let mut cov = Complex64::new(0.0, 0.0);
    for &(u, wu) in &u_nodes {
        let mut sols = Vec::with_capacity(4);
        for (ci, &(a, b)) in combos.iter().enumerate() {
            let rho_a = if a > 0.0 { &r1[0] } else { &r1[1] };
            let rho_b = if b > 0.0 { &r2[0] } else { &r2[1] };
            let sol = solver.solve(
                Complex64::new(a, 0.0),
                Complex64::new(b, 0.0),
                u,
                rho_a,
                rho_b,
                warms[ci].as_ref(),
            )?;
            warms[ci] = Some(BivariateWarm {
                edge1: sol.edge1.clone(),
                edge2: sol.edge2.clone(),
                rho: sol.values.clone(),
            });
            sols.push(sol);
        }
        let lp = solver.l_pair(u, h1, h2, [&sols[0], &sols[1], &sols[2], &sols[3]]);
        let l1 = if u <= s1 { l1_in } else { l1_out };
        let l2 = if u <= s2 { l2_in } else { l2_out };
        cov += wu * (lp - l1 * l2);
    }
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EnsembleSpec;

    fn er_model() -> PhiModel {
        PhiModel::from_spec(&EnsembleSpec::erdos_renyi(2.0, 0)).unwrap()
    }

    fn test_cfg() -> BivariateConfig {
        BivariateConfig { max_nodes: 384, ..BivariateConfig::default() }
    }

    #[test]
    fn degenerate_pair_and_cov_vanish() {
        let model = PhiModel::degenerate();
        let cfg = test_cfg();
        let z1 = Complex64::new(0.0, 2.0);
        let z2 = Complex64::new(0.5, -1.5);
        let sol = solve_rho_pair(
            &model,
            0.3,
            z1,
            Complex64::new(1e-3, 0.0),
            0.6,
            z2,
            Complex64::new(-1e-3, 0.0),
            0.4,
            &cfg,
        )
        .unwrap();
        assert!(sol.values.iter().all(|v| v.norm() < 1e-13));
        // with g ≡ 0, L_pair factorizes exactly, so the covariance is 0
        let c = limit_cov(&model, 0.3, z1, 0.6, z2, &cfg).unwrap();
        // the floor is the O(h²) error of the mixed finite differences
        assert!(c.norm() < 1e-7, "degenerate cov {c}");
    }

    #[test]
    fn edge_at_u_one_is_univariate_rho() {
        let model = er_model();
        let cfg = test_cfg();
        let z1 = Complex64::new(0.0, 2.0);
        let z2 = Complex64::new(0.0, 3.0);
        let solver = BivariateSolver::new(&model, 0.4, z1, 0.7, z2, &cfg).unwrap();
        let zt1 = Complex64::new(2e-3, 0.0);
        let zt2 = Complex64::new(-1e-3, 0.0);
        let rho1 = solver.rho_axis(1, zt1, None).unwrap();
        let rho2 = solver.rho_axis(2, zt2, None).unwrap();
        let sol = solver.solve(zt1, zt2, 1.0, &rho1, &rho2, None).unwrap();
        let d1 = sol
            .edge1
            .iter()
            .zip(rho1.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        let d2 = sol
            .edge2
            .iter()
            .zip(rho2.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(d1 < 1e-7 && d2 < 1e-7, "edges vs univariate: {d1}, {d2}");
    }

    #[test]
    fn pair_symmetry_for_equal_s() {
        // with s₁ = s₂ the axis swap is a genuine symmetry of the
        // equation (not enforced by canonicalization)
        let model = er_model();
        let cfg = test_cfg();
        let z1 = Complex64::new(0.0, 2.0);
        let z2 = Complex64::new(0.0, 3.0);
        let zt = Complex64::new(1e-3, 0.0);
        let a = solve_rho_pair(&model, 0.5, z1, zt, 0.5, z2, zt, 0.35, &cfg).unwrap();
        let b = solve_rho_pair(&model, 0.5, z2, zt, 0.5, z1, zt, 0.35, &cfg).unwrap();
        assert_eq!(a.n1, b.n2);
        let mut worst = 0.0f64;
        for i in 0..a.n1 {
            for j in 0..a.n2 {
                worst = worst.max((a.values[i * a.n2 + j] - b.values[j * b.n2 + i]).norm());
            }
        }
        assert!(worst < 1e-7, "transpose symmetry violated by {worst}");
    }

    #[test]
    fn cov_symmetry_and_conjugation() {
        let model = er_model();
        let cfg = test_cfg();
        let z1 = Complex64::new(0.0, 2.0);
        let z2 = Complex64::new(0.0, 3.0);
        let c12 = limit_cov(&model, 0.25, z1, 0.5, z2, &cfg).unwrap();
        let c21 = limit_cov(&model, 0.5, z2, 0.25, z1, &cfg).unwrap();
        assert!((c12 - c21).norm() < 1e-10);
        let cbar = limit_cov(&model, 0.25, -z1, 0.5, -z2, &cfg).unwrap();
        assert!(
            (c12 - cbar.conj()).norm() < 1e-6,
            "conjugation: {c12} vs {cbar}"
        );
    }

    #[test]
    fn cov_factorizes_in_s() {
        // Exchangeability of the matrix rows forces the limit covariance
        // to factorize as C(s,z;s′,z′) = (s∧s′ − ss′)·K(z,z′); the
        // s-structure of the solver (edge weights, phase mask, indicator
        // flips, u-segmentation) is all pinned by this single law.
        let model = er_model();
        let cfg = test_cfg();
        let z = Complex64::new(0.0, 2.0);
        let c50 = limit_cov(&model, 0.5, z, 0.5, -z, &cfg).unwrap();
        let c25 = limit_cov(&model, 0.25, z, 0.25, -z, &cfg).unwrap();
        let cx = limit_cov(&model, 0.25, z, 0.5, -z, &cfg).unwrap();
        let r1 = (c25 / c50).re;
        let r2 = (cx / c50).re;
        assert!((r1 - 0.75).abs() < 2e-3, "C(.25,.25)/C(.5,.5) = {r1}");
        assert!((r2 - 0.50).abs() < 2e-3, "C(.25,.5)/C(.5,.5) = {r2}");
        assert!((c25 / c50).im.abs() < 1e-3 && (cx / c50).im.abs() < 1e-3);
    }

    #[test]
    fn er_cov_matches_monte_carlo() {
        use crate::montecarlo::{estimate_cov, ProcessPoint};
        let model = er_model();
        let cfg = test_cfg();
        let z = Complex64::new(0.0, 2.0);
        let limit = limit_cov(&model, 0.5, z, 0.5, -z, &cfg).unwrap();
        let spec = EnsembleSpec::erdos_renyi(2.0, 3);
        let est = estimate_cov(
            &spec,
            250,
            100,
            &[ProcessPoint::x(0.5, z), ProcessPoint::x(0.5, -z)],
        )
        .unwrap();
        let mc = est.cov[1]; // E[X(0.5,z)·X(0.5,−z)]
        let se = est.se_cov[1];
        let tol = 3.0 * (se.re.powi(2) + se.im.powi(2)).sqrt() + 0.05;
        assert!(
            (limit - mc).norm() < tol,
            "limit {limit} vs MC {mc} ± {se} (tol {tol})"
        );
        // E[X(s,z)·X(s,z̄)] = E[|X|²] > 0: sanity on sign/scale
        assert!(limit.re > 0.0);
    }
}
