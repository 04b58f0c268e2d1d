//! Phase noise on the memory register: the collective `sigma_z` coupling,
//! single noise trajectories and Monte-Carlo storage fidelity.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, Level, Role, StateVector};
use crate::operators::OperatorMatrix;
use crate::protocol::GhzCoefficients;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingModel {
    /// One random phase per memory pair, shared by `j'` and `j''`.
    CollectivePair,
    /// An independent random phase for every memory qutrit.
    Independent,
}

impl fmt::Display for DephasingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DephasingModel::CollectivePair => "collective_pair",
            DephasingModel::Independent => "independent",
        })
    }
}

impl std::str::FromStr for DephasingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "collective_pair" | "collective" => Ok(DephasingModel::CollectivePair),
            "independent" => Ok(DephasingModel::Independent),
            other => Err(Error::Dephasing(format!("unknown model {other:?}"))),
        }
    }
}

/// `sigma_z = |e><e| - |g><g|`, zero on `|f>`.
pub fn sigma_z(label: usize) -> f64 {
    match Level::from_index(label) {
        Some(Level::G) => -1.0,
        Some(Level::E) => 1.0,
        _ => 0.0,
    }
}

fn memory_pairs(space: &HilbertSpace) -> Result<Vec<(usize, usize)>> {
    (1..=space.n())
        .map(|j| {
            Ok((
                space.require(Role::MemoryPrimed(j))?,
                space.require(Role::MemoryDoublePrimed(j))?,
            ))
        })
        .collect()
}

fn check_couplings(space: &HilbertSpace, couplings: &[f64]) -> Result<()> {
    if couplings.len() != space.n() {
        return Err(Error::Dephasing(format!(
            "expected {} couplings, got {}",
            space.n(),
            couplings.len()
        )));
    }
    if let Some(g) = couplings.iter().find(|g| !g.is_finite()) {
        return Err(Error::Dephasing(format!("coupling {g} is not finite")));
    }
    Ok(())
}

/// Diagonal of `sum_j g_j (sigma_z_j' + sigma_z_j'')` weighted per qutrit.
fn weighted_sigma_z(space: &HilbertSpace, weights: &[(usize, f64)]) -> Vec<f64> {
    (0..space.total_dim())
        .map(|i| {
            weights
                .iter()
                .map(|&(q, w)| w * sigma_z(space.label(i, q)))
                .sum()
        })
        .collect()
}

/// System part `S = sum_j g_j (sigma_z_j' + sigma_z_j'')` of the
/// memory-environment coupling.
pub fn dephasing_hamiltonian(
    space: &Arc<HilbertSpace>,
    couplings: &[f64],
) -> Result<OperatorMatrix> {
    check_couplings(space, couplings)?;
    let weights: Vec<(usize, f64)> = memory_pairs(space)?
        .into_iter()
        .zip(couplings)
        .flat_map(|((p, pp), &g)| [(p, g), (pp, g)])
        .collect();
    let diag = weighted_sigma_z(space, &weights);
    OperatorMatrix::new(
        space.clone(),
        CsrMatrix::from_diagonal(&diag.into_iter().map(Complex64::from).collect::<Vec<_>>()),
        true,
    )
}

/// `||S psi||`, zero for states inside the decoherence-free subspace.
pub fn verify_dfs_annihilation(state: &StateVector, couplings: &[f64]) -> Result<f64> {
    let s = dephasing_hamiltonian(state.space(), couplings)?;
    let out = s.apply(state)?;
    Ok(out.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt())
}

/// Phase `theta_i` picked up by basis state `i` for one draw of the noise:
/// the state is multiplied by `exp(-i theta_i)`.
struct PhaseKick {
    weights: Vec<(usize, usize)>,
    couplings: Vec<f64>,
    model: DephasingModel,
    sigma: f64,
}

impl PhaseKick {
    fn new(
        space: &HilbertSpace,
        couplings: &[f64],
        model: DephasingModel,
        sigma: f64,
    ) -> Result<Self> {
        check_couplings(space, couplings)?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Dephasing(format!(
                "sigma must be non-negative, got {sigma}"
            )));
        }
        Ok(Self {
            weights: memory_pairs(space)?,
            couplings: couplings.to_vec(),
            model,
            sigma,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(usize, f64)> {
        let normal = Normal::new(0.0, self.sigma).expect("sigma validated");
        let mut kicks = Vec::with_capacity(2 * self.weights.len());
        for (&(p, pp), &g) in self.weights.iter().zip(&self.couplings) {
            match self.model {
                DephasingModel::CollectivePair => {
                    let phi = normal.sample(rng);
                    kicks.push((p, g * phi));
                    kicks.push((pp, g * phi));
                }
                DephasingModel::Independent => {
                    kicks.push((p, g * normal.sample(rng)));
                    kicks.push((pp, g * normal.sample(rng)));
                }
            }
        }
        kicks
    }
}

fn kick_phases(space: &HilbertSpace, kicks: &[(usize, f64)], amps: &[Complex64]) -> Vec<f64> {
    amps.iter()
        .enumerate()
        .map(|(i, a)| {
            if a.norm_sqr() == 0.0 {
                0.0
            } else {
                kicks
                    .iter()
                    .map(|&(q, phi)| phi * sigma_z(space.label(i, q)))
                    .sum()
            }
        })
        .collect()
}

/// Applies one random draw of the phase noise to `state`.
pub fn dephase_trajectory<R: Rng + ?Sized>(
    state: &StateVector,
    couplings: &[f64],
    model: DephasingModel,
    sigma: f64,
    rng: &mut R,
) -> Result<StateVector> {
    let space = state.space();
    let kick = PhaseKick::new(space, couplings, model, sigma)?;
    let kicks = kick.draw(rng);
    let phases = kick_phases(space, &kicks, state.amplitudes());
    let amps = state
        .amplitudes()
        .iter()
        .zip(&phases)
        .map(|(a, th)| a * Complex64::from_polar(1.0, -th))
        .collect();
    StateVector::from_amplitudes(space.clone(), amps)
}

/// Mean and standard error of the per-trajectory fidelity.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnsembleStats {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Per-trial generator: `trial` selects the ChaCha stream so results do not
/// depend on thread scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Fidelity `|<psi| U_noise |psi>|^2` averaged over `trials` draws.
pub fn storage_fidelity_ensemble(
    state: &StateVector,
    couplings: &[f64],
    model: DephasingModel,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<EnsembleStats> {
    if trials == 0 {
        return Err(Error::Dephasing("trials must be at least 1".into()));
    }
    let space = state.space();
    let kick = PhaseKick::new(space, couplings, model, sigma)?;
    // only the support of the state matters
    let support: Vec<(usize, f64)> = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, a)| (i, a.norm_sqr()))
        .collect();
    let fidelities: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let kicks = kick.draw(&mut trial_rng(seed, trial));
            let overlap: Complex64 = support
                .iter()
                .map(|&(i, w)| {
                    let th: f64 = kicks
                        .iter()
                        .map(|&(q, phi)| phi * sigma_z(space.label(i, q)))
                        .sum();
                    Complex64::from_polar(w, -th)
                })
                .sum();
            overlap.norm_sqr()
        })
        .collect();
    let n = fidelities.len() as f64;
    let mean = fidelities.iter().sum::<f64>() / n;
    let stderr = if fidelities.len() > 1 {
        let var = fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(EnsembleStats {
        mean,
        stderr,
        trials,
    })
}

/// Unencoded GHZ state `alpha |g...g> + beta |e...e>` on all `2n` memory
/// qutrits, everything else in the ground state and the cavity empty.
pub fn bare_memory_ghz(space: &Arc<HilbertSpace>, coeffs: &GhzCoefficients) -> Result<StateVector> {
    let mut excited = vec![0usize; space.num_subsystems()];
    for (p, pp) in memory_pairs(space)? {
        excited[p] = Level::E.index();
        excited[pp] = Level::E.index();
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); space.total_dim()];
    amps[0] = coeffs.alpha;
    amps[space.index_of(&excited)?] = coeffs.beta;
    StateVector::from_amplitudes(space.clone(), amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_pair(encoded: bool) -> StateVector {
        let space = HilbertSpace::build(1, 1, false).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = if encoded {
            ([0, 0, 1, 0], [0, 1, 0, 0])
        } else {
            ([0, 0, 0, 0], [0, 1, 1, 0])
        };
        let mut amps = vec![Complex64::new(0.0, 0.0); space.total_dim()];
        amps[space.index_of(&a).unwrap()] = s.into();
        amps[space.index_of(&b).unwrap()] = s.into();
        StateVector::from_amplitudes(space, amps).unwrap()
    }

    #[test]
    fn sigma_z_values() {
        assert_eq!(sigma_z(0), -1.0);
        assert_eq!(sigma_z(1), 1.0);
        assert_eq!(sigma_z(2), 0.0);
    }

    #[test]
    fn dfs_states_are_annihilated() {
        assert!(verify_dfs_annihilation(&bell_pair(true), &[0.7]).unwrap() < 1e-15);
        let bare = verify_dfs_annihilation(&bell_pair(false), &[1.0]).unwrap();
        assert!((bare - 2.0).abs() < 1e-12);
        assert!(verify_dfs_annihilation(&bell_pair(true), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn collective_trajectory_leaves_encoded_pair_alone() {
        let psi = bell_pair(true);
        let mut rng = trial_rng(1, 0);
        let out = dephase_trajectory(&psi, &[1.3], DephasingModel::CollectivePair, 5.0, &mut rng)
            .unwrap();
        assert!((out.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let psi = bell_pair(false);
        let stats =
            storage_fidelity_ensemble(&psi, &[1.0], DephasingModel::Independent, 0.0, 10, 4)
                .unwrap();
        assert!((stats.mean - 1.0).abs() < 1e-12);
        assert!(stats.stderr < 1e-12);
    }

    #[test]
    fn ensemble_is_reproducible() {
        let psi = bell_pair(false);
        let run = || {
            storage_fidelity_ensemble(&psi, &[1.0], DephasingModel::CollectivePair, 0.5, 500, 9)
                .unwrap()
        };
        assert_eq!(run(), run());
        assert!(matches!(
            storage_fidelity_ensemble(&psi, &[1.0], DephasingModel::CollectivePair, -1.0, 5, 0),
            Err(Error::Dephasing(_))
        ));
    }

    #[test]
    fn model_names_round_trip() {
        for m in [DephasingModel::CollectivePair, DephasingModel::Independent] {
            assert_eq!(m.to_string().parse::<DephasingModel>().unwrap(), m);
        }
    }
}
