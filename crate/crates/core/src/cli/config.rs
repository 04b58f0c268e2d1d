//! Config file parsing. The format is TOML; frequencies and times may be
//! given as plain numbers (rad/s, s) or as annotated strings such as
//! `"10 MHz*2pi"`, `"62.8 Mrad/s"` or `"10 ns"`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::dephasing::DephasingModel;
use crate::operators::CouplingParams;
use crate::protocol::{GhzCoefficients, Mode, ProtocolParams};
use crate::units::ns;

use super::{CliError, Format};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Dimension {
    Frequency,
    Time,
}

impl Quantity {
    fn resolve(&self, key: &str, dim: Dimension) -> Result<f64, CliError> {
        match self {
            Quantity::Number(v) => Ok(*v),
            Quantity::Text(s) => parse_quantity(s, dim)
                .ok_or_else(|| CliError::Config(format!("{key}: cannot parse {s:?}"))),
        }
    }
}

/// Parses `"<number> <unit>"`; frequency units may carry a `*2pi` suffix
/// (also written `x2pi`, `×2π`), meaning the value is a cyclic frequency.
fn parse_quantity(text: &str, dim: Dimension) -> Option<f64> {
    let compact: String = text.split_whitespace().collect();
    let split = compact
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E' || !c.is_ascii())
        .or_else(|| {
            // a trailing exponent-looking unit such as "1e3" has no unit at all
            compact.parse::<f64>().ok().map(|_| compact.len())
        })?;
    let (num, unit) = compact.split_at(split);
    let value: f64 = num.parse().ok()?;
    match dim {
        Dimension::Time => {
            let scale = match unit {
                "" | "s" => 1.0,
                "ms" => 1e-3,
                "us" | "µs" | "μs" => 1e-6,
                "ns" => 1e-9,
                "ps" => 1e-12,
                _ => return None,
            };
            Some(value * scale)
        }
        Dimension::Frequency => {
            let lower = unit.to_lowercase();
            let (base, cyclic) = ["*2pi", "x2pi", "×2pi", "*2π", "x2π", "×2π"]
                .iter()
                .find_map(|suf| lower.strip_suffix(suf))
                .map_or((lower.as_str(), false), |b| (b, true));
            let two_pi = 2.0 * std::f64::consts::PI;
            // "Mrad/s" lowercases to "mrad/s"; it means mega, milli is not accepted
            let scale = match (base, cyclic) {
                ("" | "rad/s", false) => 1.0,
                ("krad/s", false) => 1e3,
                ("mrad/s", false) => 1e6,
                ("grad/s", false) => 1e9,
                ("hz", _) => two_pi,
                ("khz", _) => 1e3 * two_pi,
                ("mhz", _) => 1e6 * two_pi,
                ("ghz", _) => 1e9 * two_pi,
                _ => return None,
            };
            Some(value * scale)
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    mu1: Option<Quantity>,
    mu1p: Option<Quantity>,
    mu: Option<Quantity>,
    mup: Option<Quantity>,
    delta: Option<Quantity>,
    deltap: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTiming {
    tau_p: Option<Quantity>,
    tau_d: Option<Quantity>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCavity {
    omega_c: Option<Quantity>,
    q: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawCoeffs {
    Spec(String),
    Pair { alpha: [f64; 2], beta: [f64; 2] },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    ratios: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDephase {
    sigmas: Option<Vec<f64>>,
    model: Option<String>,
    trials: Option<usize>,
    couplings: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
    format: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: usize,
    mode: Option<String>,
    seed: Option<u64>,
    m: Option<u32>,
    k: Option<u32>,
    fock_cutoff: Option<usize>,
    #[serde(default)]
    coupling: RawCoupling,
    #[serde(default)]
    timing: RawTiming,
    #[serde(default)]
    cavity: RawCavity,
    coeffs: Option<RawCoeffs>,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    dephase: RawDephase,
    #[serde(default)]
    output: RawOutput,
}

/// Which source supplied the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffSpec {
    Fixed(GhzCoefficients),
    Random(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DephaseConfig {
    pub sigmas: Vec<f64>,
    pub model: DephasingModel,
    pub trials: usize,
    pub couplings: Vec<f64>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ProtocolParams,
    pub coeffs: CoeffSpec,
    pub mode: Option<Mode>,
    pub seed: u64,
    pub ratios: Vec<f64>,
    pub dephase: DephaseConfig,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;
        raw.resolve()
    }

    /// The coefficient list: one entry for fixed coefficients, `N` seeded
    /// draws for `random:N`.
    pub fn coefficients(&self) -> Vec<GhzCoefficients> {
        match &self.coeffs {
            CoeffSpec::Fixed(c) => vec![*c],
            CoeffSpec::Random(count) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..*count)
                    .map(|_| GhzCoefficients::random(&mut rng))
                    .collect()
            }
        }
    }
}

impl RawConfig {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let example = ProtocolParams::circuit_qed_example(self.n.max(1));
        let freq = |key: &str, q: &Option<Quantity>, default: f64| -> Result<f64, CliError> {
            q.as_ref()
                .map_or(Ok(default), |q| q.resolve(key, Dimension::Frequency))
        };
        let time = |key: &str, q: &Option<Quantity>, default: f64| -> Result<f64, CliError> {
            q.as_ref()
                .map_or(Ok(default), |q| q.resolve(key, Dimension::Time))
        };
        let c = &self.coupling;
        let d = example.coupling;
        let mu = freq("coupling.mu", &c.mu, d.mu)?;
        let coupling = CouplingParams {
            mu1: freq("coupling.mu1", &c.mu1, d.mu1)?,
            mu1p: freq("coupling.mu1p", &c.mu1p, d.mu1p)?,
            mu,
            mup: freq("coupling.mup", &c.mup, d.mup)?,
            delta: freq("coupling.delta", &c.delta, 10.0 * mu)?,
            // replaced below when absent
            deltap: freq("coupling.deltap", &c.deltap, 1.0)?,
        };
        let m = self.m.unwrap_or(0);
        let k = self.k.unwrap_or(0);
        let params = ProtocolParams {
            n: self.n,
            coupling,
            m,
            k,
            fock_cutoff: self.fock_cutoff.unwrap_or(2),
            tau_p: time("timing.tau_p", &self.timing.tau_p, ns(10.0))?,
            tau_d: time("timing.tau_d", &self.timing.tau_d, ns(2.0))?,
            omega_c: freq("cavity.omega_c", &self.cavity.omega_c, example.omega_c)?,
            quality_factor: self.cavity.q.unwrap_or(example.quality_factor),
        };
        let params = if c.deltap.is_none() {
            params.with_commensurate_deltap(m, k)
        } else {
            params.validated()
        }
        .map_err(|e| CliError::Config(e.to_string()))?;

        let coeffs = match self.coeffs {
            None => CoeffSpec::Fixed(GhzCoefficients::equal()),
            Some(RawCoeffs::Pair { alpha, beta }) => CoeffSpec::Fixed(
                GhzCoefficients::normalized(
                    Complex64::new(alpha[0], alpha[1]),
                    Complex64::new(beta[0], beta[1]),
                )
                .map_err(|e| CliError::Config(format!("coeffs: {e}")))?,
            ),
            Some(RawCoeffs::Spec(s)) => {
                let count = s
                    .strip_prefix("random:")
                    .and_then(|c| c.trim().parse::<usize>().ok())
                    .filter(|&c| c > 0)
                    .ok_or_else(|| {
                        CliError::Config(format!(
                            "coeffs: expected \"random:N\" or alpha/beta pairs, got {s:?}"
                        ))
                    })?;
                CoeffSpec::Random(count)
            }
        };

        let mode = self
            .mode
            .map(|s| s.parse::<Mode>())
            .transpose()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let ratios = self.sweep.ratios.unwrap_or_else(|| vec![5.0, 10.0, 20.0]);
        if ratios.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(CliError::Config("sweep.ratios must be positive".into()));
        }

        let dephase = DephaseConfig {
            sigmas: self
                .dephase
                .sigmas
                .unwrap_or_else(|| vec![0.0, 0.25, 0.5, 1.0]),
            model: self
                .dephase
                .model
                .as_deref()
                .unwrap_or("collective_pair")
                .parse()
                .map_err(|e: crate::Error| CliError::Config(e.to_string()))?,
            trials: self.dephase.trials.unwrap_or(10_000),
            couplings: self.dephase.couplings.unwrap_or_else(|| vec![1.0; self.n]),
        };
        if dephase.trials == 0 {
            return Err(CliError::Config("dephase.trials must be positive".into()));
        }
        if dephase.couplings.len() != self.n {
            return Err(CliError::Config(format!(
                "dephase.couplings needs {} entries",
                self.n
            )));
        }
        if dephase.sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(CliError::Config(
                "dephase.sigmas must be non-negative".into(),
            ));
        }

        let format = self
            .output
            .format
            .map(|s| s.parse::<Format>())
            .transpose()?;

        Ok(RunConfig {
            params,
            coeffs,
            mode,
            seed: self.seed.unwrap_or(0),
            ratios,
            dephase,
            out: self.output.path,
            format,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantities() {
        let f = |s| parse_quantity(s, Dimension::Frequency).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((f("10 MHz*2pi") - two_pi * 1e7).abs() < 1e-3);
        assert!((f("10 MHz x2pi") - two_pi * 1e7).abs() < 1e-3);
        assert!((f("5 GHz×2π") - two_pi * 5e9).abs() < 1.0);
        assert!((f("10 MHz") - two_pi * 1e7).abs() < 1e-3);
        assert_eq!(f("62.8 Mrad/s"), 62.8e6);
        assert_eq!(f("1e3"), 1e3);
        assert!(parse_quantity("10 parsecs", Dimension::Frequency).is_none());
        assert!(parse_quantity("10 rad/s*2pi", Dimension::Frequency).is_none());
        let t = |s| parse_quantity(s, Dimension::Time).unwrap();
        assert!((t("10 ns") - 1e-8).abs() < 1e-22);
        assert!((t("2.5us") - 2.5e-6).abs() < 1e-20);
        assert_eq!(t("0.5"), 0.5);
        assert!(parse_quantity("3 MHz", Dimension::Time).is_none());
    }

    #[test]
    fn defaults_match_example() {
        let cfg = RunConfig::parse("n = 2").unwrap();
        let ex = ProtocolParams::circuit_qed_example(2);
        assert!((cfg.params.coupling.deltap - ex.coupling.deltap).abs() < 1e-3);
        assert_eq!(cfg.params.fock_cutoff, 2);
        assert_eq!(cfg.coefficients().len(), 1);
        assert_eq!(cfg.dephase.couplings, vec![1.0, 1.0]);
    }

    #[test]
    fn random_coefficients_are_seeded() {
        let text = "n = 1\nseed = 4\ncoeffs = \"random:3\"";
        let a = RunConfig::parse(text).unwrap().coefficients();
        let b = RunConfig::parse(text).unwrap().coefficients();
        assert_eq!(a.len(), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "n = ",
            "n = 2\nbogus = 1",
            "n = 2\ncoeffs = \"random:0\"",
            "n = 2\nmode = \"fast\"",
            "n = 2\n[coupling]\ndelta = \"ten\"",
            "n = 2\n[coupling]\ndeltap = \"123 MHz*2pi\"",
            "n = 2\n[dephase]\ncouplings = [1.0]",
            "n = 0",
        ] {
            assert!(
                matches!(RunConfig::parse(text), Err(CliError::Config(_))),
                "{text}"
            );
        }
    }
}
