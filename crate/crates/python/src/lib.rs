//! Python bindings: ensembles and Monte Carlo on one side, the limit
//! theory (Φ, fixed points, inversion) on the other.
//!
//! The module name is `heavyeig_py`; see `python/smoke_test.py` at the
//! repository root for a usage tour.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use heavyeig::eigenprocess::{
    bivariate_process, decompose, eigenvalue_process, SpectralDecomposition,
    DEFAULT_DEGENERACY_TOL,
};
use heavyeig::ensembles::{sample_matrix, Atom, EnsembleKind, EnsembleSpec};
use heavyeig::error::Error;
use heavyeig::fixedpoint::{
    limit_cov, stieltjes_mu_phi, BivariateConfig, SolverConfig,
};
use heavyeig::inversion::{cov_c_from_h, spectral_cdf, EtaSchedule};
use heavyeig::montecarlo::{estimate_cov, tightness_check, ProcessPoint};
use heavyeig::philib::PhiModel;

fn to_py_err(e: Error) -> PyErr {
    match &e {
        Error::Parameter(_) | Error::Domain(_) | Error::Unsupported(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A matrix ensemble: kind, parameters, and base seed.
#[pyclass(name = "Ensemble")]
#[derive(Clone)]
struct PyEnsemble {
    spec: EnsembleSpec,
}

#[pymethods]
impl PyEnsemble {
    #[staticmethod]
    fn erdos_renyi(p: f64, seed: u64) -> PyResult<Self> {
        let spec = EnsembleSpec::erdos_renyi(p, seed);
        spec.validate().map_err(to_py_err)?;
        Ok(PyEnsemble { spec })
    }

    #[staticmethod]
    fn levy(alpha: f64, sigma: f64, seed: u64) -> PyResult<Self> {
        let spec = EnsembleSpec::levy(alpha, sigma, seed);
        spec.validate().map_err(to_py_err)?;
        Ok(PyEnsemble { spec })
    }

    #[staticmethod]
    fn gaussian(sigma: f64, seed: u64) -> PyResult<Self> {
        let spec = EnsembleSpec::gaussian(sigma, seed);
        spec.validate().map_err(to_py_err)?;
        Ok(PyEnsemble { spec })
    }

    #[staticmethod]
    fn permutation(seed: u64) -> PyResult<Self> {
        let spec = EnsembleSpec::permutation(seed);
        spec.validate().map_err(to_py_err)?;
        Ok(PyEnsemble { spec })
    }

    /// Exploding-moments ensemble from `[(weight, location), ...]`.
    #[staticmethod]
    fn exploding_moments(atoms: Vec<(f64, f64)>, seed: u64) -> PyResult<Self> {
        let spec = EnsembleSpec::exploding_moments(
            atoms
                .into_iter()
                .map(|(weight, location)| Atom { weight, location })
                .collect(),
            seed,
        );
        spec.validate().map_err(to_py_err)?;
        Ok(PyEnsemble { spec })
    }

    /// One sampled matrix as a nested list (row-major).
    fn sample(&self, n: usize, replicate: u64) -> PyResult<Vec<Vec<f64>>> {
        let m = sample_matrix(&self.spec, n, replicate).map_err(to_py_err)?;
        Ok((0..n)
            .map(|i| (0..n).map(|j| m.get(i, j)).collect())
            .collect())
    }

    /// Eigenvalues of one sampled matrix (ascending).
    fn eigenvalues(&self, n: usize, replicate: u64) -> PyResult<Vec<f64>> {
        let dec = self.decompose(n, replicate)?;
        if dec.eigenvalues.is_empty() {
            return Err(PyValueError::new_err(
                "this ensemble's decomposition carries no eigenvalues",
            ));
        }
        Ok(dec.eigenvalues)
    }

    /// The overlap process `B^n` on a (s, t) grid as a nested list
    /// indexed `[i_s][i_t]`.
    fn b_surface(
        &self,
        n: usize,
        replicate: u64,
        s_grid: Vec<f64>,
        t_grid: Vec<f64>,
    ) -> PyResult<Vec<Vec<f64>>> {
        let dec = self.decompose(n, replicate)?;
        let surf = bivariate_process(&dec, &s_grid, &t_grid).map_err(to_py_err)?;
        Ok((0..s_grid.len())
            .map(|a| (0..t_grid.len()).map(|b| surf.value(a, b)).collect())
            .collect())
    }

    /// The eigenvalue-counting process `C^n` on a (s, λ) grid.
    fn c_surface(
        &self,
        n: usize,
        replicate: u64,
        s_grid: Vec<f64>,
        lambda_grid: Vec<f64>,
    ) -> PyResult<Vec<Vec<f64>>> {
        let dec = self.decompose(n, replicate)?;
        let surf = eigenvalue_process(&dec, &s_grid, &lambda_grid).map_err(to_py_err)?;
        Ok((0..s_grid.len())
            .map(|a| (0..lambda_grid.len()).map(|b| surf.value(a, b)).collect())
            .collect())
    }

    /// Monte Carlo mean/covariance of process points over replicates.
    ///
    /// Points are tuples: `("B", s, t)`, `("C", s, lam)`, or
    /// `("X", s, complex(z))`.  Returns a dict with `mean`, `se_mean`,
    /// `cov`, `cov_conj`, `se_cov` (row-major p×p complex lists).
    fn mc_cov(
        &self,
        py: Python<'_>,
        n: usize,
        replicates: usize,
        points: Vec<(String, f64, Complex64)>,
    ) -> PyResult<PyObject> {
        let pts: PyResult<Vec<ProcessPoint>> = points
            .iter()
            .map(|(kind, s, arg)| match kind.as_str() {
                "B" => Ok(ProcessPoint::B { s: *s, t: arg.re }),
                "C" => Ok(ProcessPoint::C { s: *s, lambda: arg.re }),
                "X" => Ok(ProcessPoint::x(*s, *arg)),
                other => Err(PyValueError::new_err(format!(
                    "unknown point kind {other:?}; expected \"B\", \"C\" or \"X\""
                ))),
            })
            .collect();
        let est = estimate_cov(&self.spec, n, replicates, &pts?).map_err(to_py_err)?;
        let d = pyo3::types::PyDict::new_bound(py);
        d.set_item("mean", est.mean)?;
        d.set_item("se_mean", est.se_mean)?;
        d.set_item("cov", est.cov)?;
        d.set_item("cov_conj", est.cov_conj)?;
        d.set_item("se_cov", est.se_cov)?;
        Ok(d.into())
    }

    /// Monte Carlo fourth-moment tightness check on a fraction grid;
    /// returns `(worst_ratio, n_rectangles)`.
    fn tightness(&self, n: usize, replicates: usize, grid: Vec<f64>) -> PyResult<(f64, usize)> {
        let rep = tightness_check(&self.spec, n, replicates, &grid).map_err(to_py_err)?;
        Ok((rep.worst_ratio, rep.rectangles.len()))
    }
}

impl PyEnsemble {
    fn decompose(&self, n: usize, replicate: u64) -> PyResult<SpectralDecomposition> {
        let m = sample_matrix(&self.spec, n, replicate).map_err(to_py_err)?;
        if self.spec.kind == EnsembleKind::PermutationBaseline {
            Ok(SpectralDecomposition::from_bistochastic(&m))
        } else {
            decompose(&m, DEFAULT_DEGENERACY_TOL, self.spec.seed ^ replicate.wrapping_add(1))
                .map_err(to_py_err)
        }
    }
}

/// The limit theory of an ensemble: characteristic exponent, Stieltjes
/// transform, limit covariance, and spectral CDF.
#[pyclass(name = "Model")]
struct PyModel {
    model: PhiModel,
}

fn solver_cfg(max_nodes: Option<usize>, tol: Option<f64>) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    if let Some(m) = max_nodes {
        cfg.max_nodes = m;
    }
    if let Some(t) = tol {
        cfg.tol = t;
    }
    cfg
}

fn bivariate_cfg(max_nodes: Option<usize>, tol: Option<f64>) -> BivariateConfig {
    let mut cfg = BivariateConfig::default();
    if let Some(m) = max_nodes {
        cfg.max_nodes = m;
    }
    if let Some(t) = tol {
        cfg.tol = t;
    }
    cfg
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(ensemble: PyEnsemble) -> PyResult<Self> {
        Ok(PyModel {
            model: PhiModel::from_spec(&ensemble.spec).map_err(to_py_err)?,
        })
    }

    /// Characteristic exponent Φ(λ) for Im λ ≤ 0.
    fn phi(&self, lam: Complex64) -> PyResult<Complex64> {
        self.model.phi_eval(lam).map_err(to_py_err)
    }

    /// Kernel g(y) of the exponential representation of Φ.
    fn g(&self, y: f64) -> PyResult<Complex64> {
        self.model.g_eval(y).map_err(to_py_err)
    }

    /// Stieltjes transform G_{μΦ}(z) of the limiting spectral measure.
    #[pyo3(signature = (z, max_nodes=None, tol=None))]
    fn stieltjes(
        &self,
        z: Complex64,
        max_nodes: Option<usize>,
        tol: Option<f64>,
    ) -> PyResult<Complex64> {
        stieltjes_mu_phi(&self.model, z, &solver_cfg(max_nodes, tol)).map_err(to_py_err)
    }

    /// Limit covariance C(s, z; s′, z′) of the resolvent process.
    #[pyo3(signature = (s, z, s2, z2, max_nodes=None, tol=None))]
    fn limit_cov(
        &self,
        s: f64,
        z: Complex64,
        s2: f64,
        z2: Complex64,
        max_nodes: Option<usize>,
        tol: Option<f64>,
    ) -> PyResult<Complex64> {
        limit_cov(&self.model, s, z, s2, z2, &bivariate_cfg(max_nodes, tol)).map_err(to_py_err)
    }

    /// Spectral CDF F_{μΦ} on a λ grid; returns the list of values.
    #[pyo3(signature = (lambda_grid, etas, e_window=12.0, max_nodes=None, tol=None))]
    fn spectral_cdf(
        &self,
        lambda_grid: Vec<f64>,
        etas: Vec<f64>,
        e_window: f64,
        max_nodes: Option<usize>,
        tol: Option<f64>,
    ) -> PyResult<Vec<f64>> {
        let sched = EtaSchedule::new(etas).map_err(to_py_err)?;
        let f = spectral_cdf(
            &self.model,
            &lambda_grid,
            &sched,
            &solver_cfg(max_nodes, tol),
            e_window,
        )
        .map_err(to_py_err)?;
        Ok(f.values)
    }

    /// Cov(C_{s,λ}, C_{s′,λ′}) via inversion of the resolvent
    /// covariance.
    #[pyo3(signature = (s, lam, s2, lam2, etas, e_window=12.0, nodes_per_axis=3, max_nodes=None, tol=None))]
    #[allow(clippy::too_many_arguments)]
    fn cov_c(
        &self,
        s: f64,
        lam: f64,
        s2: f64,
        lam2: f64,
        etas: Vec<f64>,
        e_window: f64,
        nodes_per_axis: usize,
        max_nodes: Option<usize>,
        tol: Option<f64>,
    ) -> PyResult<f64> {
        let sched = EtaSchedule::new(etas).map_err(to_py_err)?;
        let cfg = bivariate_cfg(max_nodes, tol);
        cov_c_from_h(
            |sa, za, sb, zb| limit_cov(&self.model, sa, za, sb, zb, &cfg),
            s,
            lam,
            s2,
            lam2,
            &sched,
            e_window,
            nodes_per_axis,
        )
        .map_err(to_py_err)
    }
}

#[pymodule]
fn heavyeig_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyModel>()?;
    m.add("__doc__", "Eigenvector overlap processes of heavy-tailed random matrices")?;
    Ok(())
}
