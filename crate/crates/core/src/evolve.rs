//! State propagation: exponential action for static Hamiltonians, an
//! adaptive Dormand-Prince integrator for time-dependent ones, and the
//! closed-form evolution under the diagonal Stark-shift Hamiltonian.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{l2_norm, Level, StateVector};
use crate::operators::{CouplingParams, DispersiveSets, OperatorMatrix, PhasedHamiltonian};
use crate::sparse::CsrMatrix;

const HERMITIAN_TOL: f64 = 1e-12;
/// Largest accepted norm drift before renormalization.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const MINUS_I: Complex64 = Complex64 { re: 0.0, im: -1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step. `None` picks a twentieth of the fastest
    /// oscillation period of the Hamiltonian.
    pub max_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::InvalidParameter(
                "integrator tolerances must be positive".into(),
            ));
        }
        if let Some(h) = self.max_step {
            if !positive(h) {
                return Err(Error::InvalidParameter("max_step must be positive".into()));
            }
        }
        Ok(())
    }

    fn resolve_max_step(&self, max_frequency: f64, span: f64) -> f64 {
        match self.max_step {
            Some(h) => h,
            None if max_frequency > 0.0 => std::f64::consts::TAU / max_frequency / 20.0,
            None => span,
        }
    }
}

/// `exp(-i H t)|psi>` for a static Hermitian `H` and `t >= 0`.
///
/// Uses a scaled truncated Taylor expansion of the action, so `H` is never
/// exponentiated densely.
pub fn evolve_static(h: &OperatorMatrix, t: f64, psi: &StateVector) -> Result<StateVector> {
    if **psi.space() != **h.space() {
        return Err(Error::SpaceMismatch);
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "evolution time must be non-negative, got {t}"
        )));
    }
    if !h.is_hermitian() {
        let r = h.hermitian_residual();
        if r >= HERMITIAN_TOL {
            return Err(Error::NotHermitian(r));
        }
    }
    let out = expm_action(h.matrix(), t, psi.amplitudes());
    finish(psi, out)
}

fn finish(psi: &StateVector, out: Vec<Complex64>) -> Result<StateVector> {
    let drift = (l2_norm(&out) - 1.0).abs();
    if drift > NORM_DRIFT_TOL {
        return Err(Error::NormDrift(drift));
    }
    StateVector::normalized(psi.space().clone(), out)
}

// Also false for NaN.
fn positive(x: f64) -> bool {
    x > 0.0
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm()).fold(0.0, f64::max)
}

/// `exp(-i H t) v` by `s` Taylor substeps with `|H t / s|_1 <= 1`, each
/// truncated once two consecutive terms fall below machine precision.
pub(crate) fn expm_action(h: &CsrMatrix, t: f64, v: &[Complex64]) -> Vec<Complex64> {
    const MAX_TERMS: usize = 60;
    let norm = h.norm_one() * t.abs();
    let substeps = norm.ceil().max(1.0) as usize;
    let scale = MINUS_I * (t / substeps as f64);

    let mut acc = v.to_vec();
    let mut term = vec![ZERO; v.len()];
    let mut next = vec![ZERO; v.len()];
    if norm == 0.0 {
        return acc;
    }
    for _ in 0..substeps {
        term.copy_from_slice(&acc);
        let mut small = 0;
        for k in 1..=MAX_TERMS {
            h.mul_vec_into(&term, &mut next);
            let f = scale / k as f64;
            for (tm, nx) in term.iter_mut().zip(&next) {
                *tm = nx * f;
            }
            for (a, tm) in acc.iter_mut().zip(&term) {
                *a += tm;
            }
            if max_abs(&term) <= f64::EPSILON * 0.5 * max_abs(&acc) {
                small += 1;
                if small == 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
    }
    acc
}

/// A Hamiltonian that can be applied at any time `t`.
pub trait TimeDependentHamiltonian: Sync {
    fn dim(&self) -> usize;

    /// `out = H(t) x`.
    fn apply(&self, t: f64, x: &[Complex64], out: &mut [Complex64]);

    /// Fastest explicit oscillation frequency, used to bound the step.
    fn max_frequency(&self) -> f64 {
        0.0
    }
}

impl TimeDependentHamiltonian for PhasedHamiltonian {
    fn dim(&self) -> usize {
        self.space().total_dim()
    }

    fn apply(&self, t: f64, x: &[Complex64], out: &mut [Complex64]) {
        self.apply_into(t, x, out)
    }

    fn max_frequency(&self) -> f64 {
        PhasedHamiltonian::max_frequency(self)
    }
}

impl TimeDependentHamiltonian for OperatorMatrix {
    fn dim(&self) -> usize {
        self.space().total_dim()
    }

    fn apply(&self, _t: f64, x: &[Complex64], out: &mut [Complex64]) {
        self.matrix().mul_vec_into(x, out)
    }
}

/// Adapter for a closure that builds `H(t)` on demand.
pub struct FnHamiltonian<F> {
    dim: usize,
    build: F,
}

impl<F> FnHamiltonian<F>
where
    F: Fn(f64) -> OperatorMatrix + Sync,
{
    pub fn new(dim: usize, build: F) -> Self {
        Self { dim, build }
    }
}

impl<F> TimeDependentHamiltonian for FnHamiltonian<F>
where
    F: Fn(f64) -> OperatorMatrix + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, x: &[Complex64], out: &mut [Complex64]) {
        (self.build)(t).matrix().mul_vec_into(x, out)
    }
}

/// Counters reported by the integrator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// `|  |psi| - 1 |` before renormalization.
    pub norm_drift: f64,
}

/// Solves `i d|psi>/dt = H(t)|psi>` from `t = 0` to `t_final`.
pub fn evolve_timedep(
    h: &dyn TimeDependentHamiltonian,
    t_final: f64,
    psi: &StateVector,
    cfg: &IntegratorConfig,
) -> Result<StateVector> {
    evolve_timedep_between(h, 0.0, t_final, psi, cfg)
}

/// Solves the Schrodinger equation from `t0` to `t1`; `t1 < t0` runs the
/// propagator backwards, which inverts a forward run.
pub fn evolve_timedep_between(
    h: &dyn TimeDependentHamiltonian,
    t0: f64,
    t1: f64,
    psi: &StateVector,
    cfg: &IntegratorConfig,
) -> Result<StateVector> {
    if h.dim() != psi.space().total_dim() {
        return Err(Error::SpaceMismatch);
    }
    let mut amps = psi.amplitudes().to_vec();
    integrate(h, t0, t1, &mut amps, cfg, &mut |_, _| {})?;
    StateVector::normalized(psi.space().clone(), amps)
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates raw amplitudes in place, calling `observer(t, y)` at the start
/// and after every accepted step. The result is renormalized when the drift
/// stays below [`NORM_DRIFT_TOL`].
pub fn integrate(
    h: &dyn TimeDependentHamiltonian,
    t0: f64,
    t1: f64,
    y: &mut [Complex64],
    cfg: &IntegratorConfig,
    observer: &mut dyn FnMut(f64, &[Complex64]),
) -> Result<IntegrationStats> {
    cfg.validate()?;
    let dim = y.len();
    if dim != h.dim() {
        return Err(Error::SpaceMismatch);
    }
    let norm0 = l2_norm(y);
    let mut stats = IntegrationStats::default();
    observer(t0, y);
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(stats);
    }
    let dir = span.signum();
    let max_step = cfg.resolve_max_step(h.max_frequency(), span.abs());

    let rhs = |t: f64, x: &[Complex64], out: &mut [Complex64]| {
        h.apply(t, x, out);
        out.iter_mut().for_each(|o| *o *= MINUS_I);
    };

    let mut k: Vec<Vec<Complex64>> = vec![vec![ZERO; dim]; 7];
    let mut stage = vec![ZERO; dim];
    let mut y_new = vec![ZERO; dim];
    let mut t = t0;
    let mut step = max_step.min(span.abs());
    rhs(t, y, &mut k[0]);
    stats.rhs_evals += 1;

    while dir * (t1 - t) > 0.0 {
        let remaining = (t1 - t).abs();
        let last = step >= remaining;
        let hs = if last { remaining } else { step };
        if hs <= 1e-14 * span.abs().max(t.abs()) {
            return Err(Error::StepUnderflow(t));
        }
        let dt = dir * hs;

        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += kj[i] * (a * dt);
                    }
                }
                stage[i] = acc;
            }
            rhs(t + C[s] * dt, &stage, &mut k[s]);
            stats.rhs_evals += 1;
        }
        // stage 7 input is the 5th-order solution (FSAL)
        y_new.copy_from_slice(&stage);

        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut e = ZERO;
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += kj[i] * (E[j] * dt);
                }
            }
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].norm().max(y_new[i].norm());
            err_sq += (e.norm() / sc).powi(2);
        }
        let err = (err_sq / dim as f64).sqrt();

        if err <= 1.0 {
            t = if last { t1 } else { t + dt };
            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            stats.accepted += 1;
            observer(t, y);
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            step = (hs * grow).min(max_step);
        } else {
            stats.rejected += 1;
            step = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    let norm = l2_norm(y);
    stats.norm_drift = (norm - norm0).abs() / norm0.max(f64::MIN_POSITIVE);
    if stats.norm_drift > NORM_DRIFT_TOL {
        return Err(Error::NormDrift(stats.norm_drift));
    }
    let fix = norm0 / norm;
    y.iter_mut().for_each(|a| *a *= fix);
    Ok(stats)
}

/// Exact evolution under the diagonal Stark-shift Hamiltonian: every
/// excited dispersive qutrit picks up `e^{i lambda t q}` (operation) or
/// `e^{i lambda' t q}` (memory) for photon number `q`.
pub fn analytic_reduced_evolution(
    params: &CouplingParams,
    t: f64,
    psi: &StateVector,
) -> Result<StateVector> {
    params.validate()?;
    let space = psi.space();
    let sets = DispersiveSets::locate(space)?;
    let f = Level::F.index();
    let leak: f64 = sets
        .all()
        .map(|q| crate::hilbert::raw_population(space, psi.amplitudes(), q, f))
        .fold(0.0, f64::max);
    if leak > 1e-12 {
        return Err(Error::FLevelPopulated(leak));
    }
    let e = Level::E.index();
    let cav = space.cavity();
    let (lam, lam_p) = (params.lambda(), params.lambda_p());
    let amps = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let q = space.label(i, cav) as f64;
            if q == 0.0 {
                return a;
            }
            let ops = sets
                .operation
                .iter()
                .filter(|&&s| space.label(i, s) == e)
                .count() as f64;
            let mems = sets.memory().filter(|&s| space.label(i, s) == e).count() as f64;
            a * Complex64::from_polar(1.0, (lam * ops + lam_p * mems) * q * t)
        })
        .collect();
    Ok(StateVector::from_raw(space.clone(), amps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::HilbertSpace;
    use crate::operators::{dispersive_reduced, resonant_jc};
    use std::f64::consts::PI;

    #[test]
    fn half_rabi_transfer() {
        let space = HilbertSpace::build(1, 2, false).unwrap();
        let mu1 = 2.0 * PI * 10e6;
        let h = resonant_jc(&space, 0, mu1).unwrap();
        let f0 = StateVector::basis(space.clone(), &[2, 0, 0, 0]).unwrap();
        let out = evolve_static(&h, PI / (2.0 * mu1), &f0).unwrap();
        let amp = out.amplitude(&[1, 0, 0, 1]).unwrap();
        assert!((amp - Complex64::new(0.0, -1.0)).norm() < 1e-10);
    }

    #[test]
    fn dark_state_is_unchanged() {
        let space = HilbertSpace::build(1, 2, false).unwrap();
        let h = resonant_jc(&space, 0, 3.0).unwrap();
        let e0 = StateVector::basis(space.clone(), &[1, 0, 0, 0]).unwrap();
        for t in [0.0, 0.3, 17.0] {
            let out = evolve_static(&h, t, &e0).unwrap();
            assert_eq!(out, e0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let space = HilbertSpace::build(1, 1, false).unwrap();
        let h = resonant_jc(&space, 0, 1.0).unwrap();
        let psi = StateVector::basis(space.clone(), &[2, 0, 0, 0]).unwrap();
        assert!(evolve_static(&h, -1.0, &psi).is_err());
        let skew = OperatorMatrix::new(
            space.clone(),
            h.matrix().scaled(Complex64::new(0.0, 1.0)),
            false,
        )
        .unwrap();
        assert!(matches!(
            evolve_static(&skew, 1.0, &psi),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let space = HilbertSpace::build(1, 1, false).unwrap();
        let zero = OperatorMatrix::new(space.clone(), CsrMatrix::zeros(54), true).unwrap();
        let psi = StateVector::product(
            space.clone(),
            &[
                vec![1.0.into(), 2.0.into(), 0.0.into()],
                vec![0.0.into(), 1.0.into(), Complex64::new(0.0, 1.0)],
                vec![1.0.into(), 0.0.into(), 0.0.into()],
                vec![1.0.into(), 1.0.into()],
            ],
        )
        .unwrap();
        let out = evolve_timedep(&zero, 5.0, &psi, &IntegratorConfig::default()).unwrap();
        assert!((out.fidelity(&psi).unwrap() - 1.0).abs() < 1e-14);
        let out = evolve_static(&zero, 5.0, &psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn constant_timedep_matches_static() {
        let space = HilbertSpace::build(1, 2, false).unwrap();
        let h = resonant_jc(&space, 0, 1.0).unwrap();
        let psi = StateVector::normalized(
            space.clone(),
            (0..81)
                .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
                .collect(),
        )
        .unwrap();
        let cfg = IntegratorConfig {
            max_step: Some(0.05),
            ..Default::default()
        };
        let a = evolve_timedep(&h, 2.3, &psi, &cfg).unwrap();
        let b = evolve_static(&h, 2.3, &psi).unwrap();
        assert!(1.0 - a.fidelity(&b).unwrap() < 1e-8);

        let back = evolve_timedep_between(&h, 2.3, 0.0, &a, &cfg).unwrap();
        assert!(1.0 - back.fidelity(&psi).unwrap() < 1e-8);
    }

    #[test]
    fn closure_hamiltonian() {
        let space = HilbertSpace::build(1, 1, false).unwrap();
        let h = resonant_jc(&space, 0, 1.0).unwrap();
        let psi = StateVector::basis(space.clone(), &[2, 0, 0, 0]).unwrap();
        let wrapped = FnHamiltonian::new(54, |_t| h.clone());
        let cfg = IntegratorConfig {
            max_step: Some(0.05),
            ..Default::default()
        };
        let a = evolve_timedep(&wrapped, PI / 2.0, &psi, &cfg).unwrap();
        assert!((a.population(0, 1).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn analytic_reduced_flips_minus_to_plus() {
        let space = HilbertSpace::build(1, 1, false).unwrap();
        let params = CouplingParams {
            mu1: 1.0,
            mu1p: 1.0,
            mu: 1.0,
            mup: 1.0,
            delta: 10.0,
            deltap: 10.0,
        };
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus_with_photon = StateVector::product(
            space.clone(),
            &[
                vec![0.0.into(), 1.0.into(), 0.0.into()],
                vec![0.0.into(), 1.0.into(), 0.0.into()],
                vec![s.into(), (-s).into(), 0.0.into()],
                vec![0.0.into(), 1.0.into()],
            ],
        )
        .unwrap();
        let same = analytic_reduced_evolution(&params, 0.0, &minus_with_photon).unwrap();
        assert_eq!(same, minus_with_photon);
        let t = PI / params.lambda_p();
        let out = analytic_reduced_evolution(&params, t, &minus_with_photon).unwrap();
        let plus = StateVector::product(
            space.clone(),
            &[
                vec![0.0.into(), 1.0.into(), 0.0.into()],
                vec![0.0.into(), 1.0.into(), 0.0.into()],
                vec![s.into(), s.into(), 0.0.into()],
                vec![0.0.into(), 1.0.into()],
            ],
        )
        .unwrap();
        assert!((out.fidelity(&plus).unwrap() - 1.0).abs() < 1e-15);

        // photon-0 branch never acquires a phase
        let vac = StateVector::basis(space.clone(), &[1, 1, 1, 0]).unwrap();
        assert_eq!(analytic_reduced_evolution(&params, 3.7, &vac).unwrap(), vac);

        let h = dispersive_reduced(&space, &params).unwrap();
        let numeric = evolve_static(&h, t, &minus_with_photon).unwrap();
        assert!((numeric.inner(&out).unwrap() - 1.0).norm() < 1e-10);

        let leaky = StateVector::basis(space.clone(), &[0, 0, 2, 1]).unwrap();
        assert!(matches!(
            analytic_reduced_evolution(&params, t, &leaky),
            Err(Error::FLevelPopulated(_))
        ));
    }
}
