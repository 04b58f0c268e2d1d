//! Composite Hilbert spaces of qutrits plus one truncated cavity mode.
//!
//! Subsystems are always ordered operation qutrits `1..n`, primed memory
//! qutrits `1'..n'`, double-primed memory qutrits `1''..n''`, then the
//! cavity. The linear basis index uses strides that grow along that order,
//! so the first operation qutrit varies fastest and the cavity photon number
//! varies slowest:
//!
//! ```text
//! index = sum_s label[s] * prod_{r < s} dim[r]
//! ```

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const QUTRIT_DIM: usize = 3;

/// Qutrit level, with `g < e < f` mapped to indices `0, 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    G,
    E,
    F,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::F];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl From<Level> for usize {
    fn from(l: Level) -> usize {
        l.index()
    }
}

/// What a subsystem is. Qubit numbers are 1-based, as in the physical layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Operation(usize),
    MemoryPrimed(usize),
    MemoryDoublePrimed(usize),
    Cavity,
}

impl Role {
    pub fn is_qutrit(self) -> bool {
        !matches!(self, Role::Cavity)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Operation(j) => write!(f, "{j}"),
            Role::MemoryPrimed(j) => write!(f, "{j}'"),
            Role::MemoryDoublePrimed(j) => write!(f, "{j}''"),
            Role::Cavity => write!(f, "c"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    n: usize,
    fock_cutoff: usize,
    roles: Vec<Role>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl HilbertSpace {
    /// Builds the layout for `n` operation qutrits, `2n` memory qutrits and a
    /// cavity truncated at `fock_cutoff` photons.
    ///
    /// With `active_only`, only the qutrits that couple dispersively during
    /// the conditional-phase step are kept (operation `2..n`, memory `2'..n'`
    /// and `1''..n''`); qutrits `1` and `1'` are dropped.
    pub fn build(n: usize, fock_cutoff: usize, active_only: bool) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if fock_cutoff == 0 {
            return Err(Error::InvalidParameter(
                "fock_cutoff must be at least 1".into(),
            ));
        }
        let first = if active_only { 2 } else { 1 };
        let mut roles: Vec<Role> = (first..=n).map(Role::Operation).collect();
        roles.extend((first..=n).map(Role::MemoryPrimed));
        roles.extend((1..=n).map(Role::MemoryDoublePrimed));
        roles.push(Role::Cavity);
        Ok(Arc::new(Self::from_roles(n, fock_cutoff, roles)))
    }

    fn from_roles(n: usize, fock_cutoff: usize, roles: Vec<Role>) -> Self {
        let dims: Vec<usize> = roles
            .iter()
            .map(|r| {
                if r.is_qutrit() {
                    QUTRIT_DIM
                } else {
                    fock_cutoff + 1
                }
            })
            .collect();
        let mut strides = Vec::with_capacity(dims.len());
        let mut acc = 1usize;
        for &d in &dims {
            strides.push(acc);
            acc *= d;
        }
        Self {
            n,
            fock_cutoff,
            roles,
            dims,
            strides,
            total: acc,
        }
    }

    #[cfg(test)]
    pub(crate) fn restricted(&self, keep: &[usize]) -> Self {
        let roles = keep.iter().map(|&s| self.roles[s]).collect();
        Self::from_roles(self.n, self.fock_cutoff, roles)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn stride(&self, subsystem: usize) -> usize {
        self.strides[subsystem]
    }

    pub fn cavity(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn is_active_only(&self) -> bool {
        !self.roles.contains(&Role::Operation(1))
    }

    pub fn find(&self, role: Role) -> Option<usize> {
        self.roles.iter().position(|&r| r == role)
    }

    /// Like [`find`](Self::find) but reports a missing role as an error.
    pub fn require(&self, role: Role) -> Result<usize> {
        self.find(role)
            .ok_or_else(|| Error::MissingSubsystem(role.to_string()))
    }

    pub fn qutrits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_subsystems()).filter(move |&s| self.roles[s].is_qutrit())
    }

    pub fn check_qutrit(&self, subsystem: usize) -> Result<()> {
        match self.roles.get(subsystem) {
            None => Err(Error::SubsystemOutOfRange(subsystem)),
            Some(Role::Cavity) => Err(Error::NotAQutrit(subsystem)),
            Some(_) => Ok(()),
        }
    }

    pub fn index_of(&self, labels: &[usize]) -> Result<usize> {
        if labels.len() != self.dims.len() {
            return Err(Error::LabelCount {
                expected: self.dims.len(),
                got: labels.len(),
            });
        }
        labels
            .iter()
            .enumerate()
            .try_fold(0usize, |acc, (s, &label)| {
                if label >= self.dims[s] {
                    Err(Error::LabelOutOfRange {
                        subsystem: s,
                        label,
                        dim: self.dims[s],
                    })
                } else {
                    Ok(acc + label * self.strides[s])
                }
            })
    }

    pub fn labels_of(&self, index: usize) -> Vec<usize> {
        assert!(index < self.total);
        self.dims
            .iter()
            .zip(&self.strides)
            .map(|(&d, &st)| (index / st) % d)
            .collect()
    }

    /// Label of one subsystem within a basis index.
    #[inline]
    pub fn label(&self, index: usize, subsystem: usize) -> usize {
        (index / self.strides[subsystem]) % self.dims[subsystem]
    }
}

/// Normalized pure state over a [`HilbertSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: Arc<HilbertSpace>,
    amps: Vec<Complex64>,
}

pub(crate) const NORM_TOL: f64 = 1e-10;

impl StateVector {
    /// Normalizes `amps` and wraps them. Fails on a zero vector.
    pub fn normalized(space: Arc<HilbertSpace>, mut amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != space.total_dim() {
            return Err(Error::SpaceMismatch);
        }
        let norm = l2_norm(&amps);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { space, amps })
    }

    /// Wraps amplitudes that must already be normalized within 1e-10.
    pub fn from_amplitudes(space: Arc<HilbertSpace>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != space.total_dim() {
            return Err(Error::SpaceMismatch);
        }
        let drift = (l2_norm(&amps) - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::NormDrift(drift));
        }
        Ok(Self { space, amps })
    }

    pub(crate) fn from_raw(space: Arc<HilbertSpace>, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), space.total_dim());
        Self { space, amps }
    }

    pub fn basis(space: Arc<HilbertSpace>, labels: &[usize]) -> Result<Self> {
        let idx = space.index_of(labels)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); space.total_dim()];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { space, amps })
    }

    /// Tensor product of one local (possibly unnormalized) state per
    /// subsystem, normalized at the end.
    pub fn product(space: Arc<HilbertSpace>, factors: &[Vec<Complex64>]) -> Result<Self> {
        if factors.len() != space.num_subsystems() {
            return Err(Error::LabelCount {
                expected: space.num_subsystems(),
                got: factors.len(),
            });
        }
        for (s, f) in factors.iter().enumerate() {
            if f.len() != space.dims()[s] {
                return Err(Error::SpaceMismatch);
            }
        }
        let amps = (0..space.total_dim())
            .map(|i| {
                factors
                    .iter()
                    .enumerate()
                    .map(|(s, f)| f[space.label(i, s)])
                    .product()
            })
            .collect();
        Self::normalized(space, amps)
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amps)
    }

    pub fn amplitude(&self, labels: &[usize]) -> Result<Complex64> {
        Ok(self.amps[self.space.index_of(labels)?])
    }

    fn check_same_space(&self, other: &StateVector) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same_space(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`, clamped to `[0, 1]`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// Probability of finding `subsystem` with the given label.
    pub fn population(&self, subsystem: usize, label: usize) -> Result<f64> {
        let dim = *self
            .space
            .dims()
            .get(subsystem)
            .ok_or(Error::SubsystemOutOfRange(subsystem))?;
        if label >= dim {
            return Err(Error::LabelOutOfRange {
                subsystem,
                label,
                dim,
            });
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| self.space.label(*i, subsystem) == label)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Multiplies by a global phase `e^{i theta}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let ph = Complex64::from_polar(1.0, theta);
        Self {
            space: self.space.clone(),
            amps: self.amps.iter().map(|a| a * ph).collect(),
        }
    }
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Population of `label` on `subsystem` summed from raw amplitudes.
pub(crate) fn raw_population(
    space: &HilbertSpace,
    amps: &[Complex64],
    subsystem: usize,
    label: usize,
) -> f64 {
    amps.iter()
        .enumerate()
        .filter(|(i, _)| space.label(*i, subsystem) == label)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sizes() {
        let s = HilbertSpace::build(1, 2, false).unwrap();
        assert_eq!(s.dims(), &[3, 3, 3, 3]);
        assert_eq!(s.total_dim(), 81);
        let s = HilbertSpace::build(3, 2, false).unwrap();
        assert_eq!(s.num_subsystems(), 10);
        assert_eq!(s.total_dim(), 59049);
    }

    #[test]
    fn active_only_drops_spectators() {
        let s = HilbertSpace::build(2, 2, true).unwrap();
        assert_eq!(
            s.roles(),
            &[
                Role::Operation(2),
                Role::MemoryPrimed(2),
                Role::MemoryDoublePrimed(1),
                Role::MemoryDoublePrimed(2),
                Role::Cavity
            ]
        );
        assert_eq!(s.total_dim(), 243);
        assert!(s.is_active_only());
    }

    #[test]
    fn ordering_is_operation_primed_double_primed_cavity() {
        let s = HilbertSpace::build(2, 1, false).unwrap();
        let names: Vec<String> = s.roles().iter().map(|r| r.to_string()).collect();
        assert_eq!(names, ["1", "2", "1'", "2'", "1''", "2''", "c"]);
        assert_eq!(s.dims()[6], 2);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(HilbertSpace::build(0, 2, false).is_err());
        assert!(HilbertSpace::build(1, 0, false).is_err());
    }

    #[test]
    fn basis_state_indexing() {
        let s = HilbertSpace::build(1, 2, false).unwrap();
        let v = StateVector::basis(s.clone(), &[0, 0, 0, 0]).unwrap();
        assert_eq!(v.amplitudes()[0], Complex64::new(1.0, 0.0));
        // |f> on qubit 1: first subsystem is fastest-varying
        let v = StateVector::basis(s.clone(), &[2, 0, 0, 0]).unwrap();
        assert_eq!(v.amplitudes()[2], Complex64::new(1.0, 0.0));
        // one photon sits at the largest stride
        let v = StateVector::basis(s.clone(), &[0, 0, 0, 1]).unwrap();
        assert_eq!(v.amplitudes()[27], Complex64::new(1.0, 0.0));
        assert!(matches!(
            StateVector::basis(s, &[0, 0, 0, 3]),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let s = HilbertSpace::build(1, 1, false).unwrap();
        let a = StateVector::product(
            s.clone(),
            &[
                vec![1.0.into(), Complex64::new(0.3, -0.2), 0.0.into()],
                vec![0.0.into(), 1.0.into(), 0.5.into()],
                vec![1.0.into(), 0.0.into(), 0.0.into()],
                vec![1.0.into(), 1.0.into()],
            ],
        )
        .unwrap();
        assert!((a.fidelity(&a).unwrap() - 1.0).abs() < 1e-14);
        assert!((a.fidelity(&a.with_global_phase(1.234)).unwrap() - 1.0).abs() < 1e-14);
        let e0 = StateVector::basis(s.clone(), &[0, 0, 0, 0]).unwrap();
        let e1 = StateVector::basis(s.clone(), &[1, 0, 0, 0]).unwrap();
        assert_eq!(e0.fidelity(&e1).unwrap(), 0.0);

        let other = HilbertSpace::build(1, 2, false).unwrap();
        let x = StateVector::basis(other, &[0, 0, 0, 0]).unwrap();
        assert_eq!(e0.fidelity(&x), Err(Error::SpaceMismatch));
    }

    #[test]
    fn population_examples() {
        let s = HilbertSpace::build(2, 2, false).unwrap();
        let v = StateVector::basis(s.clone(), &[0, 1, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(v.population(1, Level::E.index()).unwrap(), 1.0);
        assert_eq!(v.population(1, Level::F.index()).unwrap(), 0.0);
        let mut factors: Vec<Vec<Complex64>> = s
            .dims()
            .iter()
            .map(|&d| {
                let mut f = vec![Complex64::new(0.0, 0.0); d];
                f[0] = 1.0.into();
                f
            })
            .collect();
        factors[3] = vec![1.0.into(), 1.0.into(), 0.0.into()];
        let plus = StateVector::product(s.clone(), &factors).unwrap();
        assert!((plus.population(3, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!(plus.population(7, 0).is_err());
        assert!(plus.population(6, 3).is_err());
    }

    fn arb_state(space: Arc<HilbertSpace>) -> impl Strategy<Value = StateVector> {
        let dim = space.total_dim();
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map(
            "nonzero",
            move |v| {
                let amps = v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
                StateVector::normalized(space.clone(), amps).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn populations_sum_to_one(psi in arb_state(HilbertSpace::build(1, 2, false).unwrap())) {
            let space = psi.space().clone();
            for s in 0..space.num_subsystems() {
                let total: f64 = (0..space.dims()[s]).map(|l| psi.population(s, l).unwrap()).sum();
                prop_assert!((total - 1.0).abs() < 1e-10);
            }
        }

        #[test]
        fn index_round_trip(idx in 0usize..59049) {
            let space = HilbertSpace::build(3, 2, false).unwrap();
            let labels = space.labels_of(idx);
            prop_assert_eq!(space.index_of(&labels).unwrap(), idx);
        }

        #[test]
        fn basis_states_orthonormal(a in 0usize..243, b in 0usize..243) {
            let space = HilbertSpace::build(2, 2, true).unwrap();
            let va = StateVector::basis(space.clone(), &space.labels_of(a)).unwrap();
            let vb = StateVector::basis(space.clone(), &space.labels_of(b)).unwrap();
            let expected = if a == b { 1.0 } else { 0.0 };
            prop_assert_eq!(va.fidelity(&vb).unwrap(), expected);
        }
    }
}
