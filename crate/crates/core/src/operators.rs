//! Hamiltonians and pulse unitaries for the qutrit-cavity system.
//!
//! All Hamiltonians are in angular-frequency units with hbar = 1 and only
//! couple the `e <-> f` transition of each qutrit to the cavity.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, Level, Role, StateVector, NORM_TOL};
use crate::sparse::CsrMatrix;

const HERMITIAN_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Qutrit-cavity couplings and detunings, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CouplingParams {
    /// Resonant coupling of operation qubit 1.
    pub mu1: f64,
    /// Resonant coupling of memory qubit 1'.
    pub mu1p: f64,
    /// Dispersive coupling of operation qubits 2..n.
    pub mu: f64,
    /// Dispersive coupling of memory qubits 2'..n' and 1''..n''.
    pub mup: f64,
    /// Detuning `omega_fe - omega_c` of the operation qubits.
    pub delta: f64,
    /// Detuning `omega'_fe - omega_c` of the memory qubits.
    pub deltap: f64,
}

impl CouplingParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("mu1", self.mu1),
            ("mu1p", self.mu1p),
            ("mu", self.mu),
            ("mup", self.mup),
            ("delta", self.delta),
            ("deltap", self.deltap),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Dispersive shift `mu^2 / delta` of the operation qubits.
    pub fn lambda(&self) -> f64 {
        self.mu * self.mu / self.delta
    }

    /// Dispersive shift `mu'^2 / delta'` of the memory qubits.
    pub fn lambda_p(&self) -> f64 {
        self.mup * self.mup / self.deltap
    }

    /// Cavity-mediated operation/memory exchange strength
    /// `(mu mu' / 2)(1/delta + 1/delta')`.
    pub fn lambda_cross(&self) -> f64 {
        0.5 * self.mu * self.mup * (1.0 / self.delta + 1.0 / self.deltap)
    }
}

/// Square sparse operator tied to a Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    space: Arc<HilbertSpace>,
    matrix: CsrMatrix,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wraps `matrix`. With `hermitian` set the residual `|A - A^dag|_max` is
    /// checked against 1e-12.
    pub fn new(space: Arc<HilbertSpace>, matrix: CsrMatrix, hermitian: bool) -> Result<Self> {
        if matrix.dim() != space.total_dim() {
            return Err(Error::SpaceMismatch);
        }
        if hermitian {
            let r = matrix.hermitian_residual();
            if r >= HERMITIAN_TOL {
                return Err(Error::NotHermitian(r));
            }
        }
        Ok(Self {
            space,
            matrix,
            hermitian,
        })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.matrix.hermitian_residual()
    }

    pub fn element(&self, row: &[usize], col: &[usize]) -> Result<Complex64> {
        Ok(self
            .matrix
            .get(self.space.index_of(row)?, self.space.index_of(col)?))
    }

    /// Real multiple of the operator; keeps the Hermitian flag.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scaled(c(s)),
            hermitian: self.hermitian,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// Raw matrix-vector product `A|psi>` (not normalized).
    pub fn apply(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        if **psi.space() != *self.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.matrix.mul_vec(psi.amplitudes()))
    }

    /// Applies an operator expected to be unitary, rejecting norm drift.
    pub fn apply_unitary(&self, psi: &StateVector) -> Result<StateVector> {
        let out = self.apply(psi)?;
        let drift = (crate::hilbert::l2_norm(&out) - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::NormDrift(drift));
        }
        StateVector::normalized(self.space.clone(), out)
    }
}

/// Sparse entries `(row, col, value)` of an operator on one subsystem.
pub(crate) type LocalOp = Vec<(usize, usize, Complex64)>;

/// Triplets of `coeff * (A_1 ⊗ A_2 ⊗ ...)` embedded in `space`, with identity
/// on every subsystem not listed in `factors`.
pub(crate) fn embed(
    space: &HilbertSpace,
    coeff: Complex64,
    factors: &[(usize, &LocalOp)],
) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    let mut frontier: Vec<(usize, Complex64)> = Vec::with_capacity(8);
    let mut next: Vec<(usize, Complex64)> = Vec::with_capacity(8);
    for col in 0..space.total_dim() {
        frontier.clear();
        frontier.push((col, coeff));
        for &(s, op) in factors {
            next.clear();
            let stride = space.stride(s);
            for &(idx, val) in &frontier {
                let label = space.label(idx, s);
                for &(r, cl, v) in op.iter() {
                    if cl == label {
                        next.push((idx - label * stride + r * stride, val * v));
                    }
                }
            }
            std::mem::swap(&mut frontier, &mut next);
            if frontier.is_empty() {
                break;
            }
        }
        out.extend(frontier.iter().map(|&(row, v)| (row, col, v)));
    }
    out
}

pub(crate) fn ket_bra(a: Level, b: Level) -> LocalOp {
    vec![(a.index(), b.index(), c(1.0))]
}

fn creation(cutoff: usize) -> LocalOp {
    (0..cutoff)
        .map(|q| (q + 1, q, c(((q + 1) as f64).sqrt())))
        .collect()
}

fn annihilation(cutoff: usize) -> LocalOp {
    (0..cutoff)
        .map(|q| (q, q + 1, c(((q + 1) as f64).sqrt())))
        .collect()
}

pub(crate) fn number(cutoff: usize) -> LocalOp {
    (1..=cutoff).map(|q| (q, q, c(q as f64))).collect()
}

/// `a a^dag` with the untruncated value `q + 1` on every Fock level.
fn anti_number(cutoff: usize) -> LocalOp {
    (0..=cutoff).map(|q| (q, q, c((q + 1) as f64))).collect()
}

/// Qutrits coupled dispersively during the conditional-phase step, grouped
/// as operation `2..n`, memory `2'..n'`, memory `1''..n''`.
pub(crate) struct DispersiveSets {
    pub operation: Vec<usize>,
    pub primed: Vec<usize>,
    pub double_primed: Vec<usize>,
}

impl DispersiveSets {
    pub fn locate(space: &HilbertSpace) -> Result<Self> {
        let n = space.n();
        let collect = |roles: Vec<Role>| -> Result<Vec<usize>> {
            roles.into_iter().map(|r| space.require(r)).collect()
        };
        Ok(Self {
            operation: collect((2..=n).map(Role::Operation).collect())?,
            primed: collect((2..=n).map(Role::MemoryPrimed).collect())?,
            double_primed: collect((1..=n).map(Role::MemoryDoublePrimed).collect())?,
        })
    }

    pub fn memory(&self) -> impl Iterator<Item = usize> + '_ {
        self.primed.iter().chain(&self.double_primed).copied()
    }

    pub fn all(&self) -> impl Iterator<Item = usize> + '_ {
        self.operation.iter().copied().chain(self.memory())
    }
}

/// `coupling * (a^dag |e><f| + a |f><e|)` on one qutrit.
pub fn resonant_jc(
    space: &Arc<HilbertSpace>,
    qubit: usize,
    coupling: f64,
) -> Result<OperatorMatrix> {
    space.check_qutrit(qubit)?;
    if coupling.is_nan() || coupling <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "coupling must be positive, got {coupling}"
        )));
    }
    let cav = space.cavity();
    let cut = space.fock_cutoff();
    let lower = ket_bra(Level::E, Level::F);
    let raise = ket_bra(Level::F, Level::E);
    let (ad, a) = (creation(cut), annihilation(cut));
    let mut t = embed(space, c(coupling), &[(qubit, &lower), (cav, &ad)]);
    t.extend(embed(space, c(coupling), &[(qubit, &raise), (cav, &a)]));
    OperatorMatrix::new(
        space.clone(),
        CsrMatrix::from_triplets(space.total_dim(), t),
        true,
    )
}

/// One term `coeff * e^{-i freq t} * op` of a time-dependent Hamiltonian.
#[derive(Debug, Clone)]
pub struct PhasedTerm {
    pub coeff: Complex64,
    pub freq: f64,
    pub op: CsrMatrix,
}

/// Hamiltonian of the form `H(t) = sum_k c_k e^{-i w_k t} A_k`.
#[derive(Debug, Clone)]
pub struct PhasedHamiltonian {
    space: Arc<HilbertSpace>,
    terms: Vec<PhasedTerm>,
}

impl PhasedHamiltonian {
    pub fn new(space: Arc<HilbertSpace>, terms: Vec<PhasedTerm>) -> Self {
        Self { space, terms }
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn terms(&self) -> &[PhasedTerm] {
        &self.terms
    }

    /// Largest oscillation frequency among the terms.
    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.freq.abs()).fold(0.0, f64::max)
    }

    fn coefficient(&self, term: &PhasedTerm, t: f64) -> Complex64 {
        term.coeff * Complex64::from_polar(1.0, -term.freq * t)
    }

    /// Snapshot of `H(t)` as a Hermitian operator.
    pub fn at(&self, t: f64) -> Result<OperatorMatrix> {
        let parts: Vec<(Complex64, &CsrMatrix)> = self
            .terms
            .iter()
            .map(|term| (self.coefficient(term, t), &term.op))
            .collect();
        let m = CsrMatrix::linear_combination(self.space.total_dim(), &parts);
        OperatorMatrix::new(self.space.clone(), m, true)
    }

    /// `out = H(t) x`.
    pub fn apply_into(&self, t: f64, x: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for term in &self.terms {
            term.op.mul_vec_add(self.coefficient(term, t), x, out);
        }
    }
}

/// Interaction-picture Hamiltonian of the dispersive step:
///
/// ```text
/// H(t) = mu  sum_{l=2..n}    (e^{-i delta t}  |e><f|_l a^dag + h.c.)
///      + mu' sum_{l'=2'..n'} (e^{-i delta' t} |e><f|_l' a^dag + h.c.)
///      + mu' sum_{l''}       (e^{-i delta' t} |e><f|_l'' a^dag + h.c.)
/// ```
pub fn dispersive_full_hamiltonian(
    space: &Arc<HilbertSpace>,
    params: &CouplingParams,
) -> Result<PhasedHamiltonian> {
    params.validate()?;
    let sets = DispersiveSets::locate(space)?;
    let cav = space.cavity();
    let dim = space.total_dim();
    let lower = ket_bra(Level::E, Level::F);
    let ad = creation(space.fock_cutoff());

    let sum_lowering = |qutrits: &mut dyn Iterator<Item = usize>| {
        let t = qutrits
            .flat_map(|q| embed(space, c(1.0), &[(q, &lower), (cav, &ad)]))
            .collect();
        CsrMatrix::from_triplets(dim, t)
    };
    let op_lower = sum_lowering(&mut sets.operation.iter().copied());
    let mem_lower = sum_lowering(&mut sets.memory());

    let mut terms = Vec::new();
    for (lower, coupling, detuning) in [
        (op_lower, params.mu, params.delta),
        (mem_lower, params.mup, params.deltap),
    ] {
        if lower.nnz() == 0 {
            continue;
        }
        terms.push(PhasedTerm {
            coeff: c(coupling),
            freq: -detuning,
            op: lower.adjoint(),
        });
        terms.push(PhasedTerm {
            coeff: c(coupling),
            freq: detuning,
            op: lower,
        });
    }
    Ok(PhasedHamiltonian::new(space.clone(), terms))
}

/// Snapshot of the dispersive-step Hamiltonian at time `t`.
pub fn dispersive_full(
    space: &Arc<HilbertSpace>,
    params: &CouplingParams,
    t: f64,
) -> Result<OperatorMatrix> {
    dispersive_full_hamiltonian(space, params)?.at(t)
}

/// Second-order effective Hamiltonian of the dispersive step: photon-number
/// dependent Stark shifts, intra-set exchange couplings (`l != k`) and
/// cavity-mediated exchange between the sets. The inter-set terms carry their
/// Hermitian conjugates.
pub fn dispersive_effective_hamiltonian(
    space: &Arc<HilbertSpace>,
    params: &CouplingParams,
) -> Result<PhasedHamiltonian> {
    params.validate()?;
    let sets = DispersiveSets::locate(space)?;
    let cav = space.cavity();
    let dim = space.total_dim();
    let cut = space.fock_cutoff();
    let (lam, lam_p, lam_x) = (params.lambda(), params.lambda_p(), params.lambda_cross());

    let ff = ket_bra(Level::F, Level::F);
    let ee = ket_bra(Level::E, Level::E);
    let fe = ket_bra(Level::F, Level::E);
    let ef = ket_bra(Level::E, Level::F);
    let (aad, ada) = (anti_number(cut), number(cut));

    let mut stat = Vec::new();
    for (qutrits, shift) in [
        (&sets.operation, lam),
        (&sets.primed, lam_p),
        (&sets.double_primed, lam_p),
    ] {
        for &q in qutrits {
            stat.extend(embed(space, c(shift), &[(q, &ff), (cav, &aad)]));
            stat.extend(embed(space, c(-shift), &[(q, &ee), (cav, &ada)]));
        }
        for &l in qutrits {
            for &k in qutrits {
                if l != k {
                    stat.extend(embed(space, c(shift), &[(l, &fe), (k, &ef)]));
                }
            }
        }
    }
    for &l in &sets.primed {
        for &k in &sets.double_primed {
            stat.extend(embed(space, c(lam_p), &[(l, &fe), (k, &ef)]));
            stat.extend(embed(space, c(lam_p), &[(l, &ef), (k, &fe)]));
        }
    }

    // operation <-> memory exchange, rotating at delta - delta'
    let mut forward = Vec::new();
    for &l in &sets.operation {
        for k in sets.memory() {
            forward.extend(embed(space, c(1.0), &[(l, &fe), (k, &ef)]));
        }
    }
    let forward = CsrMatrix::from_triplets(dim, forward);

    let mut terms = vec![PhasedTerm {
        coeff: c(1.0),
        freq: 0.0,
        op: CsrMatrix::from_triplets(dim, stat),
    }];
    if forward.nnz() > 0 {
        // e^{i(delta - delta')t} multiplies |f><e|_l (x) |e><f|_k
        let detune = params.delta - params.deltap;
        terms.push(PhasedTerm {
            coeff: c(lam_x),
            freq: detune,
            op: forward.adjoint(),
        });
        terms.push(PhasedTerm {
            coeff: c(lam_x),
            freq: -detune,
            op: forward,
        });
    }
    Ok(PhasedHamiltonian::new(space.clone(), terms))
}

pub fn dispersive_effective(
    space: &Arc<HilbertSpace>,
    params: &CouplingParams,
    t: f64,
) -> Result<OperatorMatrix> {
    dispersive_effective_hamiltonian(space, params)?.at(t)
}

/// Diagonal Stark-shift Hamiltonian
/// `-lambda sum_l |e><e|_l a^dag a - lambda' sum_{memory} |e><e| a^dag a`.
pub fn dispersive_reduced(
    space: &Arc<HilbertSpace>,
    params: &CouplingParams,
) -> Result<OperatorMatrix> {
    params.validate()?;
    let diag = reduced_diagonal(space, params)?;
    OperatorMatrix::new(space.clone(), CsrMatrix::from_diagonal(&diag), true)
}

pub(crate) fn reduced_diagonal(
    space: &HilbertSpace,
    params: &CouplingParams,
) -> Result<Vec<Complex64>> {
    let sets = DispersiveSets::locate(space)?;
    let cav = space.cavity();
    let e = Level::E.index();
    let (lam, lam_p) = (params.lambda(), params.lambda_p());
    Ok((0..space.total_dim())
        .map(|i| {
            let photons = space.label(i, cav) as f64;
            let ops = sets
                .operation
                .iter()
                .filter(|&&q| space.label(i, q) == e)
                .count() as f64;
            let mems = sets.memory().filter(|&q| space.label(i, q) == e).count() as f64;
            c(-(lam * ops + lam_p * mems) * photons)
        })
        .collect())
}

/// Total excitation number: `e` counts 1, `f` counts 2, plus photons.
pub fn excitation_number(space: &Arc<HilbertSpace>) -> OperatorMatrix {
    let cav = space.cavity();
    let diag: Vec<Complex64> = (0..space.total_dim())
        .map(|i| {
            let q: usize = space.qutrits().map(|s| space.label(i, s)).sum();
            c((q + space.label(i, cav)) as f64)
        })
        .collect();
    OperatorMatrix {
        space: space.clone(),
        matrix: CsrMatrix::from_diagonal(&diag),
        hermitian: true,
    }
}

/// Ideal classical-pulse operations on a single qutrit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseKind {
    /// Swap `g <-> e`.
    PiGe,
    /// Swap `e <-> f`.
    PiEf,
    /// `g -> |+>`, `e -> |->`.
    HadamardGe,
    /// `g -> e -> f -> g`; equals `PiGe * PiEf`.
    LadderUp,
    LadderDown,
    /// `|+> -> g`, `|-> -> e`.
    HadamardGeInverse,
}

impl PulseKind {
    /// Real 3x3 matrix in the `(g, e, f)` basis, indexed `[row][col]`.
    pub fn matrix(self) -> [[f64; 3]; 3] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            PulseKind::PiGe => [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
            PulseKind::PiEf => [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]],
            PulseKind::HadamardGe | PulseKind::HadamardGeInverse => {
                [[h, h, 0.0], [h, -h, 0.0], [0.0, 0.0, 1.0]]
            }
            PulseKind::LadderUp => [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            PulseKind::LadderDown => [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            PulseKind::PiGe => PulseKind::PiGe,
            PulseKind::PiEf => PulseKind::PiEf,
            PulseKind::HadamardGe => PulseKind::HadamardGeInverse,
            PulseKind::HadamardGeInverse => PulseKind::HadamardGe,
            PulseKind::LadderUp => PulseKind::LadderDown,
            PulseKind::LadderDown => PulseKind::LadderUp,
        }
    }

    fn local(self) -> LocalOp {
        let m = self.matrix();
        let mut out = Vec::new();
        for (r, row) in m.iter().enumerate() {
            for (col, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    out.push((r, col, c(v)));
                }
            }
        }
        out
    }
}

/// Embeds a pulse unitary acting on one qutrit.
pub fn pulse_unitary(
    space: &Arc<HilbertSpace>,
    qubit: usize,
    kind: PulseKind,
) -> Result<OperatorMatrix> {
    space.check_qutrit(qubit)?;
    let t = embed(space, c(1.0), &[(qubit, &kind.local())]);
    OperatorMatrix::new(
        space.clone(),
        CsrMatrix::from_triplets(space.total_dim(), t),
        false,
    )
}

/// Applies a pulse directly to the amplitudes of `psi`, without assembling
/// the embedded matrix.
pub fn apply_pulse(psi: &StateVector, qubit: usize, kind: PulseKind) -> Result<StateVector> {
    let space = psi.space().clone();
    space.check_qutrit(qubit)?;
    let m = kind.matrix();
    let stride = space.stride(qubit);
    let amps = psi.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let row = space.label(i, qubit);
        let base = i - row * stride;
        *o = (0..3)
            .map(|col| amps[base + col * stride] * m[row][col])
            .sum();
    }
    Ok(StateVector::from_raw(space, out))
}
