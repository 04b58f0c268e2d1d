//! Output records. Field order is the CSV column order; JSON uses the same
//! names in the same order.

use std::io::Write;

use serde::Serialize;

use crate::protocol::{
    cavity_lifetime, leakage_estimate, operation_time, GhzCoefficients, ProtocolParams,
    TransferResult,
};

use super::{CliError, Format};

/// One transfer, as written by `run` and `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferRecord {
    pub draw: usize,
    pub ratio: f64,
    pub n: usize,
    pub mode: String,
    pub seed: u64,
    pub fock_cutoff: usize,
    pub m: u32,
    pub k: u32,
    pub mu1: f64,
    pub mu1p: f64,
    pub mu: f64,
    pub mup: f64,
    pub delta: f64,
    pub deltap: f64,
    pub tau_p: f64,
    pub tau_d: f64,
    pub omega_c: f64,
    pub q: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub fidelity: f64,
    pub leakage_f_max: f64,
    pub leakage_photon: f64,
    pub dispersive_f_peak: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub tau: f64,
    pub p: f64,
    pub p_prime: f64,
    pub kappa_inv: f64,
}

impl TransferRecord {
    pub fn new(
        draw: usize,
        seed: u64,
        params: &ProtocolParams,
        coeffs: &GhzCoefficients,
        result: &TransferResult,
    ) -> Self {
        let c = &params.coupling;
        let (p, p_prime) = leakage_estimate(params);
        let [t1, t2, t3] = result.step_durations;
        Self {
            draw,
            ratio: c.delta / c.mu,
            n: params.n,
            mode: result.mode.to_string(),
            seed,
            fock_cutoff: params.fock_cutoff,
            m: params.m,
            k: params.k,
            mu1: c.mu1,
            mu1p: c.mu1p,
            mu: c.mu,
            mup: c.mup,
            delta: c.delta,
            deltap: c.deltap,
            tau_p: params.tau_p,
            tau_d: params.tau_d,
            omega_c: params.omega_c,
            q: params.quality_factor,
            alpha_re: coeffs.alpha.re,
            alpha_im: coeffs.alpha.im,
            beta_re: coeffs.beta.re,
            beta_im: coeffs.beta.im,
            fidelity: result.fidelity_to_target,
            leakage_f_max: result.max_leakage_f(),
            leakage_photon: result.leakage_photon,
            dispersive_f_peak: result.mean_dispersive_leakage(),
            t1,
            t2,
            t3,
            tau: operation_time(params),
            p,
            p_prime,
            kappa_inv: cavity_lifetime(params),
        }
    }
}

/// Storage fidelity of the encoded and bare states at one noise strength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DephaseRecord {
    pub draw: usize,
    pub n: usize,
    pub seed: u64,
    pub model: String,
    pub sigma: f64,
    pub trials: usize,
    /// Per-pair couplings joined with `;`.
    pub couplings: String,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub encoded_mean: f64,
    pub encoded_stderr: f64,
    pub bare_mean: f64,
    pub bare_stderr: f64,
}

pub fn write_records<T: Serialize, W: Write>(
    records: &[T],
    format: Format,
    mut out: W,
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r)
                    .map_err(|e| CliError::Output(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::Output(e.to_string()))
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, records)
                .map_err(|e| CliError::Output(e.to_string()))?;
            writeln!(out).map_err(|e| CliError::Output(e.to_string()))
        }
    }
}
