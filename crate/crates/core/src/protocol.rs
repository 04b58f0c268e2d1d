//! The transfer protocol: preparation, the three cavity interactions,
//! decoding onto the decoherence-free memory pairs, the inverse transfer and
//! the timing and leakage estimates.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::evolve::{self, IntegratorConfig, TimeDependentHamiltonian};
use crate::hilbert::{raw_population, HilbertSpace, Level, Role, StateVector};
use crate::operators::{
    apply_pulse, dispersive_full_hamiltonian, dispersive_reduced, resonant_jc, CouplingParams,
    DispersiveSets, OperatorMatrix, PhasedHamiltonian, PulseKind,
};
use crate::units::{ghz_2pi, mhz_2pi, ns};

/// Peak `|f>` population per qutrit during the dispersive step.
type PeakLeakage = Vec<(Role, f64)>;

const COMMENSURABILITY_TOL: f64 = 1e-9;

/// Physical parameters of one transfer.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProtocolParams {
    pub n: usize,
    pub coupling: CouplingParams,
    pub m: u32,
    pub k: u32,
    pub fock_cutoff: usize,
    /// Classical-pulse time budget (s).
    pub tau_p: f64,
    /// Cavity retuning time (s).
    pub tau_d: f64,
    /// Cavity angular frequency (rad/s), only used for the photon lifetime.
    pub omega_c: f64,
    pub quality_factor: f64,
}

impl ProtocolParams {
    /// Validated parameters with the default bookkeeping values
    /// (`fock_cutoff = 2`, `tau_p = 10 ns`, `tau_d = 2 ns`,
    /// `omega_c = 2 pi x 5 GHz`, `Q = 5e5`).
    pub fn new(n: usize, coupling: CouplingParams, m: u32, k: u32) -> Result<Self> {
        Self {
            n,
            coupling,
            m,
            k,
            fock_cutoff: 2,
            tau_p: ns(10.0),
            tau_d: ns(2.0),
            omega_c: ghz_2pi(5.0),
            quality_factor: 5e5,
        }
        .validated()
    }

    /// Flux-qubit/transmon estimate: all couplings `2 pi x 10 MHz`,
    /// `delta = 10 mu`, `delta' = 10 mu'`, `m = k = 0`.
    pub fn circuit_qed_example(n: usize) -> Self {
        let mu = mhz_2pi(10.0);
        Self::new(
            n,
            CouplingParams {
                mu1: mu,
                mu1p: mu,
                mu,
                mup: mu,
                delta: 10.0 * mu,
                deltap: 10.0 * mu,
            },
            0,
            0,
        )
        .expect("example parameters are commensurate")
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if self.fock_cutoff == 0 {
            return Err(Error::InvalidParameter(
                "fock_cutoff must be at least 1".into(),
            ));
        }
        self.coupling.validate()?;
        for (name, v) in [("tau_p", self.tau_p), ("tau_d", self.tau_d)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [("omega_c", self.omega_c), ("Q", self.quality_factor)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let lhs = (2 * self.m + 1) as f64 / self.coupling.lambda();
        let rhs = (2 * self.k + 1) as f64 / self.coupling.lambda_p();
        if (lhs - rhs).abs() > COMMENSURABILITY_TOL * lhs.abs().max(rhs.abs()) {
            return Err(Error::Commensurability { lhs, rhs });
        }
        Ok(())
    }

    /// Picks `delta'` so that `(2m+1)/lambda = (2k+1)/lambda'` for the given
    /// integers, keeping every other parameter.
    pub fn with_commensurate_deltap(mut self, m: u32, k: u32) -> Result<Self> {
        self.m = m;
        self.k = k;
        let lambda_p = (2 * k + 1) as f64 * self.coupling.lambda() / (2 * m + 1) as f64;
        self.coupling.deltap = self.coupling.mup * self.coupling.mup / lambda_p;
        self.validated()
    }

    pub fn with_fock_cutoff(mut self, cutoff: usize) -> Result<Self> {
        self.fock_cutoff = cutoff;
        self.validated()
    }

    /// Step durations `(t1, t2, t3)`.
    pub fn step_durations(&self) -> [f64; 3] {
        let c = &self.coupling;
        [
            PI / (2.0 * c.mu1),
            (2 * self.m + 1) as f64 * PI / c.lambda(),
            3.0 * PI / (2.0 * c.mu1p),
        ]
    }

    pub fn space(&self) -> Result<Arc<HilbertSpace>> {
        HilbertSpace::build(self.n, self.fock_cutoff, false)
    }
}

/// Total operation time `t1 + t3 + t2 + tau_p + 4 tau_d`.
pub fn operation_time(params: &ProtocolParams) -> f64 {
    let [t1, t2, t3] = params.step_durations();
    t1 + t3 + t2 + params.tau_p + 4.0 * params.tau_d
}

/// Estimated peak `|f>` occupancy `(p, p')` of the dispersively coupled
/// operation and memory qutrits.
pub fn leakage_estimate(params: &ProtocolParams) -> (f64, f64) {
    let c = &params.coupling;
    let p = |mu: f64, delta: f64| 4.0 * mu * mu / (4.0 * mu * mu + delta * delta);
    (p(c.mu, c.delta), p(c.mup, c.deltap))
}

/// Cavity photon lifetime `Q / omega_c`.
pub fn cavity_lifetime(params: &ProtocolParams) -> f64 {
    params.quality_factor / params.omega_c
}

/// Normalized GHZ amplitudes `alpha |g..g> + beta |e..e>`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GhzCoefficients {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl GhzCoefficients {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "|alpha|^2 + |beta|^2 = {norm}, expected 1"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    /// Haar-random point on the Bloch sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut draw = || -> f64 { rng.sample(StandardNormal) };
            let alpha = Complex64::new(draw(), draw());
            let beta = Complex64::new(draw(), draw());
            if let Ok(c) = Self::normalized(alpha, beta) {
                return c;
            }
        }
    }

    pub fn equal() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: s.into(),
            beta: s.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Conditional-phase step under the diagonal Stark-shift Hamiltonian.
    Ideal,
    /// Conditional-phase step integrated from the time-dependent
    /// interaction-picture Hamiltonian.
    Full,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ideal => "ideal",
            Mode::Full => "full",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Mode::Ideal),
            "full" => Ok(Mode::Full),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

/// One entry of the executed schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    /// Classical pulses that produce the initial state from the bare GHZ
    /// register and all-ground memory.
    EncodePulses,
    /// Resonant half Rabi cycle of operation qubit 1.
    ResonantOperation,
    /// Dispersive conditional-phase step.
    Dispersive,
    /// Resonant 3/2 Rabi cycle of memory qubit 1'.
    ResonantMemory,
    /// Pulses mapping the memory register onto the DFS basis.
    DecodePulses,
}

impl Segment {
    pub fn is_cavity_interaction(self) -> bool {
        matches!(
            self,
            Segment::ResonantOperation | Segment::Dispersive | Segment::ResonantMemory
        )
    }
}

/// The transfer schedule. Its length does not depend on `n`.
pub const SCHEDULE: [Segment; 5] = [
    Segment::EncodePulses,
    Segment::ResonantOperation,
    Segment::Dispersive,
    Segment::ResonantMemory,
    Segment::DecodePulses,
];

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub after: Segment,
    pub state: StateVector,
}

/// Outcome of [`run_transfer`].
#[derive(Debug, Clone)]
pub struct TransferResult {
    pub final_state: StateVector,
    pub fidelity_to_target: f64,
    /// Final `|f>` population of every qutrit.
    pub leakage_f: Vec<(Role, f64)>,
    /// Final probability of one or more photons in the cavity.
    pub leakage_photon: f64,
    /// Largest `|f>` population of each dispersively coupled qutrit during
    /// the conditional-phase step, divided by the population that could leak
    /// (qutrit in `|e>` with at least one photon at the start of the step).
    /// Zero in ideal mode.
    pub dispersive_leakage: Vec<(Role, f64)>,
    /// `(t1, t2, t3)`.
    pub step_durations: [f64; 3],
    pub total_time: f64,
    pub mode: Mode,
    pub checkpoints: Vec<Checkpoint>,
}

impl TransferResult {
    pub fn max_leakage_f(&self) -> f64 {
        self.leakage_f.iter().map(|l| l.1).fold(0.0, f64::max)
    }

    pub fn mean_dispersive_leakage(&self) -> f64 {
        if self.dispersive_leakage.is_empty() {
            return 0.0;
        }
        self.dispersive_leakage.iter().map(|l| l.1).sum::<f64>()
            / self.dispersive_leakage.len() as f64
    }

    pub fn checkpoint(&self, after: Segment) -> Option<&StateVector> {
        self.checkpoints
            .iter()
            .find(|c| c.after == after)
            .map(|c| &c.state)
    }
}

/// Maps states of a full space onto blocks of its active-only subspace, one
/// block per configuration of the spectator subsystems.
struct SpectatorSplit {
    active_space: Arc<HilbertSpace>,
    active_offsets: Vec<usize>,
    spectator_offsets: Vec<usize>,
}

impl SpectatorSplit {
    fn new(space: &HilbertSpace) -> Result<Self> {
        let active_space = HilbertSpace::build(space.n(), space.fock_cutoff(), true)?;
        let active: Vec<usize> = active_space
            .roles()
            .iter()
            .map(|&r| space.require(r))
            .collect::<Result<_>>()?;
        let spectators: Vec<usize> = (0..space.num_subsystems())
            .filter(|s| !active.contains(s))
            .collect();
        let offsets = |subsystems: &[usize]| -> Vec<usize> {
            let mut out = vec![0usize];
            for &s in subsystems {
                out = (0..space.dims()[s])
                    .flat_map(|l| out.iter().map(move |o| o + l * space.stride(s)))
                    .collect();
            }
            out
        };
        Ok(Self {
            active_offsets: offsets(&active),
            spectator_offsets: offsets(&spectators),
            active_space,
        })
    }

    /// Non-empty blocks as `(spectator offset, amplitudes)`.
    fn split(&self, amps: &[Complex64]) -> Vec<(usize, Vec<Complex64>)> {
        self.spectator_offsets
            .iter()
            .map(|&o| {
                let block: Vec<Complex64> =
                    self.active_offsets.iter().map(|&a| amps[o + a]).collect();
                (o, block)
            })
            .filter(|(_, b)| b.iter().any(|a| a.norm_sqr() > 0.0))
            .collect()
    }

    fn merge(&self, blocks: &[(usize, Vec<Complex64>)], amps: &mut [Complex64]) {
        amps.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for (o, block) in blocks {
            for (&a, &v) in self.active_offsets.iter().zip(block) {
                amps[o + a] = v;
            }
        }
    }
}

/// Block-diagonal copy of one Hamiltonian over stacked state blocks.
struct Stacked<'a> {
    inner: &'a PhasedHamiltonian,
    blocks: usize,
}

impl TimeDependentHamiltonian for Stacked<'_> {
    fn dim(&self) -> usize {
        self.inner.space().total_dim() * self.blocks
    }

    fn apply(&self, t: f64, x: &[Complex64], out: &mut [Complex64]) {
        let d = self.inner.space().total_dim();
        for (xb, ob) in x.chunks(d).zip(out.chunks_mut(d)) {
            self.inner.apply_into(t, xb, ob);
        }
    }

    fn max_frequency(&self) -> f64 {
        self.inner.max_frequency()
    }
}

/// Output of the time-dependent dispersive step.
struct DispersiveRun {
    state: StateVector,
    leakage: Vec<(Role, f64)>,
}

/// Precomputed operators for repeated transfers with fixed parameters.
pub struct Transfer {
    params: ProtocolParams,
    mode: Mode,
    space: Arc<HilbertSpace>,
    jc_operation: OperatorMatrix,
    jc_memory: OperatorMatrix,
    reduced: Option<OperatorMatrix>,
    full: Option<(SpectatorSplit, PhasedHamiltonian)>,
    integrator: IntegratorConfig,
}

impl Transfer {
    pub fn new(params: &ProtocolParams, mode: Mode) -> Result<Self> {
        Self::with_integrator(params, mode, IntegratorConfig::default())
    }

    pub fn with_integrator(
        params: &ProtocolParams,
        mode: Mode,
        integrator: IntegratorConfig,
    ) -> Result<Self> {
        params.validate()?;
        integrator.validate()?;
        let space = params.space()?;
        let q1 = space.require(Role::Operation(1))?;
        let q1p = space.require(Role::MemoryPrimed(1))?;
        let jc_operation = resonant_jc(&space, q1, params.coupling.mu1)?;
        let jc_memory = resonant_jc(&space, q1p, params.coupling.mu1p)?;
        let (reduced, full) = match mode {
            Mode::Ideal => (Some(dispersive_reduced(&space, &params.coupling)?), None),
            Mode::Full => {
                let split = SpectatorSplit::new(&space)?;
                let h = dispersive_full_hamiltonian(&split.active_space, &params.coupling)?;
                (None, Some((split, h)))
            }
        };
        Ok(Self {
            params: *params,
            mode,
            space,
            jc_operation,
            jc_memory,
            reduced,
            full,
            integrator,
        })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    fn check_space(&self, psi: &StateVector) -> Result<()> {
        if **psi.space() == *self.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// Bare register: GHZ on the operation qubits, memory in `|g>`, cavity
    /// empty.
    pub fn ghz_register(&self, coeffs: &GhzCoefficients) -> StateVector {
        ghz_register(&self.space, coeffs)
    }

    pub fn prepare_initial(&self, coeffs: &GhzCoefficients) -> Result<StateVector> {
        self.apply_segment(Segment::EncodePulses, &self.ghz_register(coeffs), false)
            .map(|(s, _)| s)
    }

    pub fn target_state(&self, coeffs: &GhzCoefficients) -> StateVector {
        build_target(&self.space, coeffs)
    }

    /// Runs the whole schedule from the bare GHZ register.
    pub fn run(&self, coeffs: &GhzCoefficients) -> Result<TransferResult> {
        let mut state = self.ghz_register(coeffs);
        let mut checkpoints = Vec::with_capacity(SCHEDULE.len());
        let mut dispersive_leakage = Vec::new();
        for seg in SCHEDULE {
            let (next, leak) = self.apply_segment(seg, &state, false)?;
            if let Some(leak) = leak {
                dispersive_leakage = leak;
            }
            state = next;
            checkpoints.push(Checkpoint {
                after: seg,
                state: state.clone(),
            });
        }
        let target = self.target_state(coeffs);
        let f = Level::F.index();
        let leakage_f = self
            .space
            .qutrits()
            .map(|q| Ok((self.space.roles()[q], state.population(q, f)?)))
            .collect::<Result<Vec<_>>>()?;
        let leakage_photon = 1.0 - state.population(self.space.cavity(), 0)?;
        Ok(TransferResult {
            fidelity_to_target: state.fidelity(&target)?,
            final_state: state,
            leakage_f,
            leakage_photon: leakage_photon.max(0.0),
            dispersive_leakage,
            step_durations: self.params.step_durations(),
            total_time: operation_time(&self.params),
            mode: self.mode,
            checkpoints,
        })
    }

    /// Undoes decoding and the three cavity steps, returning the state the
    /// transfer started from (after the encoding pulses).
    pub fn inverse(&self, state: &StateVector) -> Result<StateVector> {
        self.check_space(state)?;
        let mut psi = state.clone();
        for seg in SCHEDULE
            .iter()
            .rev()
            .filter(|s| **s != Segment::EncodePulses)
        {
            psi = self.apply_segment(*seg, &psi, true)?.0;
        }
        Ok(psi)
    }

    /// Applies one segment forwards, or its inverse with `inverse` set.
    pub fn step(&self, seg: Segment, psi: &StateVector, inverse: bool) -> Result<StateVector> {
        self.apply_segment(seg, psi, inverse).map(|(s, _)| s)
    }

    fn apply_segment(
        &self,
        seg: Segment,
        psi: &StateVector,
        inverse: bool,
    ) -> Result<(StateVector, Option<PeakLeakage>)> {
        self.check_space(psi)?;
        let [t1, t2, t3] = self.params.step_durations();
        let sign = if inverse { -1.0 } else { 1.0 };
        match seg {
            Segment::EncodePulses | Segment::DecodePulses => {
                let block = if seg == Segment::EncodePulses {
                    encode_pulses(&self.space)?
                } else {
                    decode_pulses(&self.space)?
                };
                Ok((apply_block(psi, &block, inverse)?, None))
            }
            Segment::ResonantOperation => Ok((
                evolve::evolve_static(&self.jc_operation.scaled(sign), t1, psi)?,
                None,
            )),
            Segment::ResonantMemory => Ok((
                evolve::evolve_static(&self.jc_memory.scaled(sign), t3, psi)?,
                None,
            )),
            Segment::Dispersive => match (&self.reduced, &self.full) {
                (Some(h), _) => Ok((
                    evolve::evolve_static(&h.scaled(sign), t2, psi)?,
                    Some(Vec::new()),
                )),
                (None, Some((split, h))) => {
                    let (t0, t1) = if inverse { (t2, 0.0) } else { (0.0, t2) };
                    let run = self.dispersive_full(split, h, psi, t0, t1)?;
                    Ok((run.state, Some(run.leakage)))
                }
                (None, None) => unreachable!("transfer built without a dispersive operator"),
            },
        }
    }

    fn dispersive_full(
        &self,
        split: &SpectatorSplit,
        h: &PhasedHamiltonian,
        psi: &StateVector,
        t0: f64,
        t1: f64,
    ) -> Result<DispersiveRun> {
        let blocks = split.split(psi.amplitudes());
        let d = split.active_space.total_dim();
        let mut stacked: Vec<Complex64> = blocks.iter().flat_map(|(_, b)| b.clone()).collect();

        let active = &split.active_space;
        let sets = DispersiveSets::locate(active)?;
        let watched: Vec<usize> = sets.all().collect();
        let (e, f) = (Level::E.index(), Level::F.index());
        let cav = active.cavity();
        // population that can leak: qutrit in |e> with at least one photon
        let exposed: Vec<f64> = watched
            .iter()
            .map(|&q| {
                stacked
                    .chunks(d)
                    .flat_map(|b| b.iter().enumerate())
                    .filter(|(i, _)| active.label(*i, q) == e && active.label(*i, cav) > 0)
                    .map(|(_, a)| a.norm_sqr())
                    .sum()
            })
            .collect();
        let mut peak = vec![0.0f64; watched.len()];
        let mut observe = |_t: f64, y: &[Complex64]| {
            for (p, &q) in peak.iter_mut().zip(&watched) {
                let pop: f64 = y.chunks(d).map(|b| raw_population(active, b, q, f)).sum();
                *p = p.max(pop);
            }
        };
        let stacked_h = Stacked {
            inner: h,
            blocks: blocks.len(),
        };
        evolve::integrate(
            &stacked_h,
            t0,
            t1,
            &mut stacked,
            &self.integrator,
            &mut observe,
        )?;

        let evolved: Vec<(usize, Vec<Complex64>)> = blocks
            .iter()
            .zip(stacked.chunks(d))
            .map(|((o, _), b)| (*o, b.to_vec()))
            .collect();
        let mut amps = vec![Complex64::new(0.0, 0.0); psi.amplitudes().len()];
        split.merge(&evolved, &mut amps);
        let leakage = watched
            .iter()
            .zip(peak.iter().zip(&exposed))
            .map(|(&q, (&pk, &ex))| {
                let ratio = if ex > 1e-12 { pk / ex } else { 0.0 };
                (active.roles()[q], ratio)
            })
            .collect();
        Ok(DispersiveRun {
            state: StateVector::normalized(psi.space().clone(), amps)?,
            leakage,
        })
    }
}

type PulseBlock = Vec<(usize, PulseKind)>;

fn encode_pulses(space: &HilbertSpace) -> Result<PulseBlock> {
    let n = space.n();
    let mut block = vec![
        (space.require(Role::Operation(1))?, PulseKind::PiEf),
        (space.require(Role::Operation(1))?, PulseKind::PiGe),
    ];
    for l in 2..=n {
        block.push((space.require(Role::Operation(l))?, PulseKind::HadamardGe));
    }
    block.push((space.require(Role::MemoryPrimed(1))?, PulseKind::PiGe));
    for l in 2..=n {
        block.push((space.require(Role::MemoryPrimed(l))?, PulseKind::HadamardGe));
    }
    for l in 1..=n {
        let q = space.require(Role::MemoryDoublePrimed(l))?;
        block.push((q, PulseKind::PiGe));
        block.push((q, PulseKind::HadamardGe));
    }
    Ok(block)
}

fn decode_pulses(space: &HilbertSpace) -> Result<PulseBlock> {
    let n = space.n();
    let mut block = vec![(space.require(Role::MemoryPrimed(1))?, PulseKind::LadderDown)];
    for l in 2..=n {
        block.push((
            space.require(Role::MemoryPrimed(l))?,
            PulseKind::HadamardGeInverse,
        ));
    }
    for l in 1..=n {
        block.push((
            space.require(Role::MemoryDoublePrimed(l))?,
            PulseKind::HadamardGeInverse,
        ));
    }
    Ok(block)
}

fn apply_block(psi: &StateVector, block: &PulseBlock, inverse: bool) -> Result<StateVector> {
    let mut out = psi.clone();
    if inverse {
        for &(q, kind) in block.iter().rev() {
            out = apply_pulse(&out, q, kind.inverse())?;
        }
    } else {
        for &(q, kind) in block {
            out = apply_pulse(&out, q, kind)?;
        }
    }
    Ok(out)
}

fn ghz_register(space: &Arc<HilbertSpace>, coeffs: &GhzCoefficients) -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); space.total_dim()];
    let mut excited = vec![0usize; space.num_subsystems()];
    for l in 1..=space.n() {
        excited[space.find(Role::Operation(l)).expect("full space")] = Level::E.index();
    }
    amps[0] = coeffs.alpha;
    amps[space.index_of(&excited).expect("valid labels")] = coeffs.beta;
    StateVector::from_raw(space.clone(), amps)
}

fn build_target(space: &Arc<HilbertSpace>, coeffs: &GhzCoefficients) -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut branch_a = vec![0usize; space.num_subsystems()];
    let mut branch_b = vec![0usize; space.num_subsystems()];
    let (g, e) = (Level::G.index(), Level::E.index());
    for l in 1..=space.n() {
        let p = space.find(Role::MemoryPrimed(l)).expect("full space");
        let pp = space.find(Role::MemoryDoublePrimed(l)).expect("full space");
        branch_a[p] = g;
        branch_a[pp] = e;
        branch_b[p] = e;
        branch_b[pp] = g;
    }
    let q1 = space.find(Role::Operation(1)).expect("full space");
    branch_a[q1] = e;
    branch_b[q1] = e;
    // operation qubits 2..n stay in |+>
    let ops: Vec<usize> = (2..=space.n())
        .map(|l| space.find(Role::Operation(l)).expect("full space"))
        .collect();
    let weight = Complex64::from(s.powi(ops.len() as i32));
    let mut amps = vec![Complex64::new(0.0, 0.0); space.total_dim()];
    for mask in 0..(1usize << ops.len()) {
        for (bit, &q) in ops.iter().enumerate() {
            let level = (mask >> bit) & 1;
            branch_a[q] = level;
            branch_b[q] = level;
        }
        amps[space.index_of(&branch_a).expect("valid")] += coeffs.alpha * weight;
        amps[space.index_of(&branch_b).expect("valid")] += coeffs.beta * weight;
    }
    StateVector::from_raw(space.clone(), amps)
}

fn check_full_space(space: &HilbertSpace, params: &ProtocolParams) -> Result<()> {
    if space.n() != params.n || space.fock_cutoff() != params.fock_cutoff || space.is_active_only()
    {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

/// Initial state: the operation GHZ state with qubit 1 lifted to `{e, f}` and
/// qubits `2..n` rotated to `{|+>, |->}`, memory in
/// `|e>_1' prod |+>_l' prod |->_l''`, cavity in vacuum.
pub fn prepare_initial(
    space: &Arc<HilbertSpace>,
    params: &ProtocolParams,
    coeffs: &GhzCoefficients,
) -> Result<StateVector> {
    params.validate()?;
    check_full_space(space, params)?;
    apply_block(&ghz_register(space, coeffs), &encode_pulses(space)?, false)
}

/// DFS-encoded memory state `alpha |ge>...|ge> + beta |eg>...|eg>` on the
/// pairs `(l', l'')`, with qubit 1 in `|e>`, qubits `2..n` in `|+>` and the
/// cavity empty.
pub fn target_state(
    space: &Arc<HilbertSpace>,
    params: &ProtocolParams,
    coeffs: &GhzCoefficients,
) -> Result<StateVector> {
    check_full_space(space, params)?;
    Ok(build_target(space, coeffs))
}

pub fn run_transfer(
    params: &ProtocolParams,
    coeffs: &GhzCoefficients,
    mode: Mode,
) -> Result<TransferResult> {
    Transfer::new(params, mode)?.run(coeffs)
}

pub fn inverse_transfer(
    state: &StateVector,
    params: &ProtocolParams,
    mode: Mode,
) -> Result<StateVector> {
    Transfer::new(params, mode)?.inverse(state)
}
