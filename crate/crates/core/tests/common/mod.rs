//! Reference states built by hand, without going through the protocol code.
//! Index layout: subsystem 0 varies fastest.

#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

use ghz_dfs::{Complex64, HilbertSpace, Role};

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn g() -> Vec<C> {
    vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
}

pub fn e() -> Vec<C> {
    vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]
}

pub fn f() -> Vec<C> {
    vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
}

pub fn plus() -> Vec<C> {
    vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0)]
}

pub fn minus() -> Vec<C> {
    vec![c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0), c(0.0, 0.0)]
}

pub fn fock(space: &HilbertSpace, k: usize) -> Vec<C> {
    let mut v = vec![c(0.0, 0.0); space.fock_cutoff() + 1];
    v[k] = c(1.0, 0.0);
    v
}

/// Tensor product; subsystems not listed are in their ground state.
pub fn product(space: &HilbertSpace, factors: &[(Role, Vec<C>)]) -> Vec<C> {
    let dims = space.dims().to_vec();
    let local: Vec<Vec<C>> = space
        .roles()
        .iter()
        .zip(&dims)
        .map(|(r, &d)| {
            factors
                .iter()
                .find(|(fr, _)| fr == r)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| {
                    let mut v = vec![c(0.0, 0.0); d];
                    v[0] = c(1.0, 0.0);
                    v
                })
        })
        .collect();
    let total: usize = dims.iter().product();
    (0..total)
        .map(|mut idx| {
            let mut amp = c(1.0, 0.0);
            for (s, &d) in dims.iter().enumerate() {
                amp *= local[s][idx % d];
                idx /= d;
            }
            amp
        })
        .collect()
}

pub fn add(a: &[C], ca: C, b: &[C], cb: C) -> Vec<C> {
    a.iter().zip(b).map(|(x, y)| ca * x + cb * y).collect()
}

pub fn overlap(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn fidelity(a: &[C], b: &[C]) -> f64 {
    overlap(a, b).norm_sqr()
}

/// `|<a|b> - 1|`: zero only when the states agree including global phase.
pub fn phase_exact_gap(a: &[C], b: &[C]) -> f64 {
    (overlap(a, b) - c(1.0, 0.0)).norm()
}

fn ops(n: usize, from: usize) -> impl Iterator<Item = Role> {
    (from..=n).map(Role::Operation)
}

fn primed(n: usize, from: usize) -> impl Iterator<Item = Role> {
    (from..=n).map(Role::MemoryPrimed)
}

fn double_primed(n: usize) -> impl Iterator<Item = Role> {
    (1..=n).map(Role::MemoryDoublePrimed)
}

fn with(factors: &mut Vec<(Role, Vec<C>)>, roles: impl Iterator<Item = Role>, v: fn() -> Vec<C>) {
    factors.extend(roles.map(|r| (r, v())));
}

/// State right before the first cavity interaction:
/// `(a prod|+>_l |e>_1 + b prod|->_l |f>_1) |e>_1' prod|+>_l' prod|->_l'' |0>`.
pub fn start_state(space: &HilbertSpace, alpha: C, beta: C) -> Vec<C> {
    let n = space.n();
    let mut common = vec![(Role::MemoryPrimed(1), e()), (Role::Cavity, fock(space, 0))];
    with(&mut common, primed(n, 2), plus);
    with(&mut common, double_primed(n), minus);
    let mut a = common.clone();
    a.push((Role::Operation(1), e()));
    with(&mut a, ops(n, 2), plus);
    let mut b = common;
    b.push((Role::Operation(1), f()));
    with(&mut b, ops(n, 2), minus);
    add(&product(space, &a), alpha, &product(space, &b), beta)
}

/// After the resonant step on qubit 1.
pub fn after_step_one(space: &HilbertSpace, alpha: C, beta: C) -> Vec<C> {
    let n = space.n();
    let mut common = vec![(Role::Operation(1), e()), (Role::MemoryPrimed(1), e())];
    with(&mut common, primed(n, 2), plus);
    with(&mut common, double_primed(n), minus);
    let mut a = common.clone();
    a.push((Role::Cavity, fock(space, 0)));
    with(&mut a, ops(n, 2), plus);
    let mut b = common;
    b.push((Role::Cavity, fock(space, 1)));
    with(&mut b, ops(n, 2), minus);
    add(
        &product(space, &a),
        alpha,
        &product(space, &b),
        c(0.0, -1.0) * beta,
    )
}

/// After the conditional-phase step with `t2 = (2m+1) pi / lambda`.
pub fn after_step_two(space: &HilbertSpace, alpha: C, beta: C) -> Vec<C> {
    let n = space.n();
    let mut common = vec![(Role::Operation(1), e()), (Role::MemoryPrimed(1), e())];
    with(&mut common, ops(n, 2), plus);
    let mut a = common.clone();
    a.push((Role::Cavity, fock(space, 0)));
    with(&mut a, primed(n, 2), plus);
    with(&mut a, double_primed(n), minus);
    let mut b = common;
    b.push((Role::Cavity, fock(space, 1)));
    with(&mut b, primed(n, 2), minus);
    with(&mut b, double_primed(n), plus);
    add(
        &product(space, &a),
        alpha,
        &product(space, &b),
        c(0.0, -1.0) * beta,
    )
}

/// After the resonant step on qubit 1'.
pub fn after_step_three(space: &HilbertSpace, alpha: C, beta: C) -> Vec<C> {
    let n = space.n();
    let mut common = vec![(Role::Operation(1), e()), (Role::Cavity, fock(space, 0))];
    with(&mut common, ops(n, 2), plus);
    let mut a = common.clone();
    a.push((Role::MemoryPrimed(1), e()));
    with(&mut a, primed(n, 2), plus);
    with(&mut a, double_primed(n), minus);
    let mut b = common;
    b.push((Role::MemoryPrimed(1), f()));
    with(&mut b, primed(n, 2), minus);
    with(&mut b, double_primed(n), plus);
    add(&product(space, &a), alpha, &product(space, &b), beta)
}

/// Decoded memory: `a |ge>...|ge> + b |eg>...|eg>` on the pairs, qubit 1 in
/// `|e>`, qubits `2..n` in `|+>`, cavity empty.
pub fn decoded(space: &HilbertSpace, alpha: C, beta: C) -> Vec<C> {
    let n = space.n();
    let mut common = vec![(Role::Operation(1), e()), (Role::Cavity, fock(space, 0))];
    with(&mut common, ops(n, 2), plus);
    let mut a = common.clone();
    with(&mut a, primed(n, 1), g);
    with(&mut a, double_primed(n), e);
    let mut b = common;
    with(&mut b, primed(n, 1), e);
    with(&mut b, double_primed(n), g);
    add(&product(space, &a), alpha, &product(space, &b), beta)
}
