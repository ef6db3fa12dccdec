pub mod bivariate;
pub mod quadrature;
pub mod univariate;

pub use bivariate::{
    limit_cov, solve_rho_pair, BivariateConfig, BivariateSolution, BivariateSolver, BivariateWarm,
};

pub use univariate::{
    domain_pair_ok, eval_l_u, eval_l_u_with, solve_rho_s, solve_rho_z, stieltjes_from,
    stieltjes_mu_phi, RhoSolution, SolverConfig, UnivariateSolver,
};
