//! Python bindings: `import ghz_dfs_py`.

use ghz_dfs::dephasing::{self, DephasingModel};
use ghz_dfs::protocol::{self, GhzCoefficients, Mode};
use ghz_dfs::{Complex64, Error, StateVector};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(ghz_dfs_py, SimulationError, PyRuntimeError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_)
        | Error::LabelOutOfRange { .. }
        | Error::LabelCount { .. }
        | Error::SubsystemOutOfRange(_)
        | Error::NotAQutrit(_)
        | Error::SpaceMismatch
        | Error::MissingSubsystem(_)
        | Error::ZeroNorm
        | Error::Commensurability { .. }
        | Error::Dephasing(_) => PyValueError::new_err(e.to_string()),
        _ => SimulationError::new_err(e.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(py_err)
}

fn coeffs(alpha: Complex64, beta: Complex64) -> PyResult<GhzCoefficients> {
    GhzCoefficients::normalized(alpha, beta).map_err(py_err)
}

/// Protocol parameters. Frequencies in rad/s, times in seconds.
#[pyclass(frozen, name = "ProtocolParams")]
struct PyProtocolParams {
    inner: protocol::ProtocolParams,
}

#[pymethods]
impl PyProtocolParams {
    #[new]
    #[pyo3(signature = (n, mu1, mu1p, mu, mup, delta, deltap, m=0, k=0, fock_cutoff=2, tau_p=1e-8, tau_d=2e-9, omega_c=None, q=5e5))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        mu1: f64,
        mu1p: f64,
        mu: f64,
        mup: f64,
        delta: f64,
        deltap: f64,
        m: u32,
        k: u32,
        fock_cutoff: usize,
        tau_p: f64,
        tau_d: f64,
        omega_c: Option<f64>,
        q: f64,
    ) -> PyResult<Self> {
        let inner = protocol::ProtocolParams {
            n,
            coupling: ghz_dfs::CouplingParams {
                mu1,
                mu1p,
                mu,
                mup,
                delta,
                deltap,
            },
            m,
            k,
            fock_cutoff,
            tau_p,
            tau_d,
            omega_c: omega_c.unwrap_or_else(|| ghz_dfs::units::ghz_2pi(5.0)),
            quality_factor: q,
        }
        .validated()
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    /// All couplings 2pi x 10 MHz, detunings ten times larger.
    #[staticmethod]
    fn circuit_qed_example(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be at least 1"));
        }
        Ok(Self {
            inner: protocol::ProtocolParams::circuit_qed_example(n),
        })
    }

    /// Copy with `delta'` chosen so that `(2m+1)/lambda = (2k+1)/lambda'`.
    fn with_commensurate_deltap(&self, m: u32, k: u32) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_commensurate_deltap(m, k).map_err(py_err)?,
        })
    }

    fn with_fock_cutoff(&self, cutoff: usize) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_fock_cutoff(cutoff).map_err(py_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn fock_cutoff(&self) -> usize {
        self.inner.fock_cutoff
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.coupling.delta
    }

    #[getter]
    fn deltap(&self) -> f64 {
        self.inner.coupling.deltap
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.coupling.mu
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.coupling.lambda()
    }

    /// `(t1, t2, t3)` in seconds.
    fn step_durations(&self) -> (f64, f64, f64) {
        let [a, b, c] = self.inner.step_durations();
        (a, b, c)
    }

    fn operation_time(&self) -> f64 {
        protocol::operation_time(&self.inner)
    }

    /// `(p, p')`.
    fn leakage_estimate(&self) -> (f64, f64) {
        protocol::leakage_estimate(&self.inner)
    }

    fn cavity_lifetime(&self) -> f64 {
        protocol::cavity_lifetime(&self.inner)
    }

    fn __repr__(&self) -> String {
        let c = &self.inner.coupling;
        format!(
            "ProtocolParams(n={}, mu={:.6e}, delta={:.6e}, deltap={:.6e}, m={}, k={}, fock_cutoff={})",
            self.inner.n, c.mu, c.delta, c.deltap, self.inner.m, self.inner.k, self.inner.fock_cutoff
        )
    }
}

#[pyclass(frozen, name = "TransferResult")]
struct PyTransferResult {
    inner: protocol::TransferResult,
}

#[pymethods]
impl PyTransferResult {
    #[getter]
    fn fidelity(&self) -> f64 {
        self.inner.fidelity_to_target
    }

    /// `[(role, population)]` of `|f>` for every qutrit after the transfer.
    #[getter]
    fn leakage_f(&self) -> Vec<(String, f64)> {
        self.inner
            .leakage_f
            .iter()
            .map(|(r, p)| (r.to_string(), *p))
            .collect()
    }

    #[getter]
    fn leakage_photon(&self) -> f64 {
        self.inner.leakage_photon
    }

    /// Peak `|f>` occupancy during the dispersive step, per exposed qutrit.
    #[getter]
    fn dispersive_leakage(&self) -> Vec<(String, f64)> {
        self.inner
            .dispersive_leakage
            .iter()
            .map(|(r, p)| (r.to_string(), *p))
            .collect()
    }

    #[getter]
    fn step_durations(&self) -> (f64, f64, f64) {
        let [a, b, c] = self.inner.step_durations;
        (a, b, c)
    }

    #[getter]
    fn total_time(&self) -> f64 {
        self.inner.total_time
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode.to_string()
    }

    /// Final state amplitudes; subsystem 0 varies fastest.
    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.final_state.amplitudes().to_vec()
    }

    /// Subsystem dimensions in index order.
    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.final_state.space().dims().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "TransferResult(mode={}, fidelity={:.9}, total_time={:.4e})",
            self.inner.mode, self.inner.fidelity_to_target, self.inner.total_time
        )
    }
}

#[pyfunction]
#[pyo3(signature = (params, alpha, beta, mode="ideal"))]
fn run_transfer(
    py: Python<'_>,
    params: &PyProtocolParams,
    alpha: Complex64,
    beta: Complex64,
    mode: &str,
) -> PyResult<PyTransferResult> {
    let co = coeffs(alpha, beta)?;
    let mode = parse_mode(mode)?;
    let p = params.inner;
    let inner = py
        .detach(|| protocol::run_transfer(&p, &co, mode))
        .map_err(py_err)?;
    Ok(PyTransferResult { inner })
}

#[pyfunction]
#[pyo3(signature = (amplitudes, params, mode="ideal"))]
fn inverse_transfer(
    amplitudes: Vec<Complex64>,
    params: &PyProtocolParams,
    mode: &str,
) -> PyResult<Vec<Complex64>> {
    let space = params.inner.space().map_err(py_err)?;
    let psi = StateVector::from_amplitudes(space, amplitudes).map_err(py_err)?;
    let out = protocol::inverse_transfer(&psi, &params.inner, parse_mode(mode)?).map_err(py_err)?;
    Ok(out.into_amplitudes())
}

/// Decoded DFS target for the given coefficients.
#[pyfunction]
fn target_state(
    params: &PyProtocolParams,
    alpha: Complex64,
    beta: Complex64,
) -> PyResult<Vec<Complex64>> {
    let space = params.inner.space().map_err(py_err)?;
    let psi =
        protocol::target_state(&space, &params.inner, &coeffs(alpha, beta)?).map_err(py_err)?;
    Ok(psi.into_amplitudes())
}

/// `||S psi||` for the DFS target with per-pair couplings `g`.
#[pyfunction]
fn verify_dfs_annihilation(
    params: &PyProtocolParams,
    alpha: Complex64,
    beta: Complex64,
    couplings: Vec<f64>,
) -> PyResult<f64> {
    let space = params.inner.space().map_err(py_err)?;
    let psi =
        protocol::target_state(&space, &params.inner, &coeffs(alpha, beta)?).map_err(py_err)?;
    dephasing::verify_dfs_annihilation(&psi, &couplings).map_err(py_err)
}

/// Monte-Carlo storage fidelity `(mean, stderr)` of the encoded target or,
/// with `encoded=False`, of the bare memory GHZ state.
#[pyfunction]
#[pyo3(signature = (n, alpha, beta, sigma, trials=10000, seed=0, model="collective_pair", couplings=None, encoded=true))]
#[allow(clippy::too_many_arguments)]
fn storage_fidelity(
    py: Python<'_>,
    n: usize,
    alpha: Complex64,
    beta: Complex64,
    sigma: f64,
    trials: usize,
    seed: u64,
    model: &str,
    couplings: Option<Vec<f64>>,
    encoded: bool,
) -> PyResult<(f64, f64)> {
    let model: DephasingModel = model.parse().map_err(py_err)?;
    let co = coeffs(alpha, beta)?;
    let couplings = couplings.unwrap_or_else(|| vec![1.0; n]);
    let space = ghz_dfs::HilbertSpace::build(n, 1, false).map_err(py_err)?;
    let psi = if encoded {
        let p = protocol::ProtocolParams::circuit_qed_example(n.max(1))
            .with_fock_cutoff(1)
            .map_err(py_err)?;
        protocol::target_state(&space, &p, &co).map_err(py_err)?
    } else {
        dephasing::bare_memory_ghz(&space, &co).map_err(py_err)?
    };
    let stats = py
        .detach(|| {
            dephasing::storage_fidelity_ensemble(&psi, &couplings, model, sigma, trials, seed)
        })
        .map_err(py_err)?;
    Ok((stats.mean, stats.stderr))
}

#[pymodule]
fn ghz_dfs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProtocolParams>()?;
    m.add_class::<PyTransferResult>()?;
    m.add_function(wrap_pyfunction!(run_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(target_state, m)?)?;
    m.add_function(wrap_pyfunction!(verify_dfs_annihilation, m)?)?;
    m.add_function(wrap_pyfunction!(storage_fidelity, m)?)?;
    m.add("SimulationError", m.py().get_type::<SimulationError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
