mod common;

use std::f64::consts::PI;

use common::*;
use ghz_dfs::evolve::{evolve_timedep, IntegratorConfig};
use ghz_dfs::operators::{
    dispersive_effective_hamiltonian, dispersive_full_hamiltonian, CouplingParams,
};
use ghz_dfs::protocol::{GhzCoefficients, Mode, ProtocolParams, Segment, Transfer};
use ghz_dfs::{HilbertSpace, Role, StateVector};

fn couplings(ratio: f64, ratio_p: f64) -> CouplingParams {
    let mu = 2.0 * PI * 10e6;
    CouplingParams {
        mu1: mu,
        mu1p: mu,
        mu,
        mup: mu,
        delta: ratio * mu,
        deltap: ratio_p * mu,
    }
}

fn tight() -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: 1e-10,
        abs_tol: 1e-13,
        max_step: None,
    }
}

fn population(psi: &StateVector, labels: &[(Role, usize)]) -> f64 {
    let space = psi.space();
    let mut l = vec![0; space.num_subsystems()];
    for &(r, v) in labels {
        l[space.require(r).unwrap()] = v;
    }
    psi.amplitude(&l).unwrap().norm_sqr()
}

// Excitation hopping |f>_2 |e>_2' -> |e>_2 |f>_2' through the virtual photon.
// The effective model with the second-order cross coupling tracks the full
// dynamics; a cross coupling of order delta would not.
#[test]
fn effective_cross_coupling_tracks_full_dynamics() {
    let p = couplings(20.0, 20.0);
    let space = HilbertSpace::build(2, 2, true).unwrap();
    let start = StateVector::from_amplitudes(
        space.clone(),
        product(
            &space,
            &[(Role::Operation(2), f()), (Role::MemoryPrimed(2), e())],
        ),
    )
    .unwrap();
    let full = dispersive_full_hamiltonian(&space, &p).unwrap();
    let eff = dispersive_effective_hamiltonian(&space, &p).unwrap();
    let swap_time = PI / (2.0 * p.lambda_cross());
    let hopped = [(Role::Operation(2), 1), (Role::MemoryPrimed(2), 2)];
    for frac in [0.25, 0.5, 1.0] {
        let t = frac * swap_time;
        let a = evolve_timedep(&full, t, &start, &tight()).unwrap();
        let b = evolve_timedep(&eff, t, &start, &tight()).unwrap();
        let (pa, pb) = (population(&a, &hopped), population(&b, &hopped));
        assert!(
            (pa - pb).abs() < 0.03,
            "t/T = {frac}: full {pa}, effective {pb}"
        );
    }
    let done = evolve_timedep(&full, swap_time, &start, &tight()).unwrap();
    assert!(population(&done, &hopped) > 0.9);
}

#[test]
fn effective_exchange_is_suppressed_by_detuning_mismatch() {
    let p = couplings(20.0, 30.0);
    let space = HilbertSpace::build(2, 1, true).unwrap();
    let start = StateVector::from_amplitudes(
        space.clone(),
        product(
            &space,
            &[(Role::Operation(2), f()), (Role::MemoryPrimed(2), e())],
        ),
    )
    .unwrap();
    let eff = dispersive_effective_hamiltonian(&space, &p).unwrap();
    let full = dispersive_full_hamiltonian(&space, &p).unwrap();
    let t = PI / (2.0 * p.lambda_cross());
    let hopped = [(Role::Operation(2), 1), (Role::MemoryPrimed(2), 2)];
    let pe = population(&evolve_timedep(&eff, t, &start, &tight()).unwrap(), &hopped);
    let pf = population(
        &evolve_timedep(&full, t, &start, &tight()).unwrap(),
        &hopped,
    );
    assert!(pe < 0.2 && pf < 0.2, "effective {pe}, full {pf}");
}

#[test]
fn full_mode_never_exceeds_one_photon() {
    let p = ProtocolParams::circuit_qed_example(2);
    let transfer = Transfer::new(&p, Mode::Full).unwrap();
    let r = transfer.run(&GhzCoefficients::equal()).unwrap();
    let cav = transfer.space().cavity();
    for seg in [
        Segment::ResonantOperation,
        Segment::Dispersive,
        Segment::ResonantMemory,
    ] {
        let psi = r.checkpoint(seg).unwrap();
        assert!(psi.population(cav, 2).unwrap() < 1e-20);
    }
}

#[test]
fn full_mode_round_trip() {
    let p = ProtocolParams::circuit_qed_example(2);
    let transfer = Transfer::new(&p, Mode::Full).unwrap();
    let co = GhzCoefficients::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
    let r = transfer.run(&co).unwrap();
    let back = transfer.inverse(&r.final_state).unwrap();
    let start = transfer.prepare_initial(&co).unwrap();
    assert!(1.0 - back.fidelity(&start).unwrap() < 1e-6);
}

#[test]
fn full_mode_approaches_ideal_at_large_detuning() {
    let mut p = ProtocolParams::circuit_qed_example(2);
    p.coupling.delta *= 4.0;
    p.coupling.deltap *= 4.0;
    let co = GhzCoefficients::equal();
    let ideal = Transfer::new(&p, Mode::Ideal).unwrap().run(&co).unwrap();
    let full = Transfer::new(&p, Mode::Full).unwrap().run(&co).unwrap();
    let overlap = ideal.final_state.fidelity(&full.final_state).unwrap();
    assert!(overlap > 0.995, "{overlap}");
    assert!(full.max_leakage_f() < 1e-3);
}
