//! Experiment configuration: a flat TOML table whose keys carry their units.
//!
//! Every key is optional; omitted keys take the values of the reference
//! scenario (16 × 16 half-wavelength arrays, target at broadside, receiver at
//! 32°, 128 BPSK symbols of amplitude 0.1, 1.5 times the minimum energy,
//! `P_FA = 1e-6`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dfrc_core::{ArrayConfig, Scenario, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// ChaCha8 stream reserved for the communication symbols, kept clear of the
/// low-numbered streams used by Monte Carlo blocks and oracle restarts.
pub const SYMBOL_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("`{field}` has {found} entries, expected {expected}")]
    LengthMismatch { field: &'static str, expected: usize, found: usize },
    #[error("`{first}` and `{second}` are mutually exclusive")]
    Conflict { first: &'static str, second: &'static str },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommModulation {
    /// Random ±amplitude symbols drawn from the seed.
    Bpsk,
    /// Symbols listed in `comm_vector_re` / `comm_vector_im`.
    ExplicitVector,
}

/// How the transmit energy budget is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySpec {
    Absolute(f64),
    /// Multiple of the minimum energy `||d_c||² / N_T`.
    RatioToMinimum(f64),
}

/// Raw file contents before defaults and validation.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_tx: Option<usize>,
    n_rx: Option<usize>,
    d_tx_wavelengths: Option<f64>,
    d_rx_wavelengths: Option<f64>,
    code_length: Option<usize>,
    theta_t_deg: Option<f64>,
    theta_c_deg: Option<f64>,
    comm_modulation: Option<CommModulation>,
    bpsk_amplitude: Option<f64>,
    comm_vector_re: Option<Vec<f64>>,
    comm_vector_im: Option<Vec<f64>>,
    e_t: Option<f64>,
    energy_ratio: Option<f64>,
    sigma2: Option<f64>,
    p_fa: Option<f64>,
    input_snr_grid_db: Option<Vec<f64>>,
    input_snr_db: Option<f64>,
    theta_sweep_start_deg: Option<f64>,
    theta_sweep_stop_deg: Option<f64>,
    theta_sweep_step_deg: Option<f64>,
    mc_trials: Option<u64>,
    mc_p_fa: Option<f64>,
    oracle_restarts: Option<usize>,
    oracle_max_iters: Option<usize>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

/// Validated configuration. Angles in degrees, SNR in dB.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub d_tx_wavelengths: f64,
    pub d_rx_wavelengths: f64,
    pub code_length: usize,
    pub theta_t_deg: f64,
    pub theta_c_deg: f64,
    pub comm_modulation: CommModulation,
    pub bpsk_amplitude: f64,
    /// Real and imaginary parts, only for [`CommModulation::ExplicitVector`].
    pub comm_vector: Option<(Vec<f64>, Vec<f64>)>,
    pub energy: EnergySpec,
    pub sigma2: f64,
    pub p_fa: f64,
    pub input_snr_grid_db: Vec<f64>,
    /// Operating point for the angle sweep and Monte Carlo checks.
    pub input_snr_db: f64,
    pub theta_sweep_start_deg: f64,
    pub theta_sweep_stop_deg: f64,
    pub theta_sweep_step_deg: f64,
    pub mc_trials: u64,
    /// False-alarm rate for simulation; `p_fa` itself is usually too small.
    pub mc_p_fa: f64,
    pub oracle_restarts: usize,
    pub oracle_max_iters: usize,
    pub seed: u64,
    /// Not part of the hash: where results land does not change them.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_raw(RawConfig::default()).expect("defaults are valid")
    }
}

/// `-10, -9.9, ..., 10` dB.
fn default_snr_grid() -> Vec<f64> {
    (0..=200).map(|k| -10.0 + 0.1 * k as f64).collect()
}

fn positive(field: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(field, format!("{value} is not a finite positive number")))
    }
}

fn angle_deg(field: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() && value.abs() <= 90.0 {
        Ok(value)
    } else {
        Err(invalid(field, format!("{value} is outside [-90, 90] degrees")))
    }
}

fn probability(field: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 && value <= 0.5 {
        Ok(value)
    } else {
        Err(invalid(field, format!("{value} is outside (0, 0.5]")))
    }
}

impl ExperimentConfig {
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        Self::from_raw(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::parse_str(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let n_tx = raw.n_tx.unwrap_or(16);
        if n_tx < 2 {
            return Err(invalid("n_tx", "at least two transmit elements are required"));
        }
        let n_rx = raw.n_rx.unwrap_or(16);
        if n_rx < 1 {
            return Err(invalid("n_rx", "at least one receive element is required"));
        }
        let d_tx_wavelengths = positive("d_tx_wavelengths", raw.d_tx_wavelengths.unwrap_or(0.5))?;
        let d_rx_wavelengths = positive("d_rx_wavelengths", raw.d_rx_wavelengths.unwrap_or(0.5))?;
        let theta_t_deg = angle_deg("theta_t_deg", raw.theta_t_deg.unwrap_or(0.0))?;
        let theta_c_deg = angle_deg("theta_c_deg", raw.theta_c_deg.unwrap_or(32.0))?;

        let comm_modulation = raw.comm_modulation.unwrap_or(CommModulation::Bpsk);
        let bpsk_amplitude = positive("bpsk_amplitude", raw.bpsk_amplitude.unwrap_or(0.1))?;
        let (code_length, comm_vector) = match comm_modulation {
            CommModulation::Bpsk => {
                if raw.comm_vector_re.is_some() || raw.comm_vector_im.is_some() {
                    return Err(invalid("comm_vector_re", "only allowed with comm_modulation = \"explicit_vector\""));
                }
                let l = raw.code_length.unwrap_or(128);
                if l == 0 {
                    return Err(invalid("code_length", "must be positive"));
                }
                (l, None)
            }
            CommModulation::ExplicitVector => {
                let re = raw
                    .comm_vector_re
                    .ok_or_else(|| invalid("comm_vector_re", "required with comm_modulation = \"explicit_vector\""))?;
                let l = raw.code_length.unwrap_or(re.len());
                if re.len() != l {
                    return Err(ConfigError::LengthMismatch { field: "comm_vector_re", expected: l, found: re.len() });
                }
                let im = raw.comm_vector_im.unwrap_or_else(|| vec![0.0; l]);
                if im.len() != l {
                    return Err(ConfigError::LengthMismatch { field: "comm_vector_im", expected: l, found: im.len() });
                }
                if l == 0 {
                    return Err(invalid("comm_vector_re", "must not be empty"));
                }
                if re.iter().chain(&im).any(|x| !x.is_finite()) {
                    return Err(invalid("comm_vector_re", "entries must be finite"));
                }
                if re.iter().chain(&im).all(|&x| x == 0.0) {
                    return Err(invalid("comm_vector_re", "the symbol vector must not be all zeros"));
                }
                (l, Some((re, im)))
            }
        };

        let energy = match (raw.e_t, raw.energy_ratio) {
            (Some(_), Some(_)) => return Err(ConfigError::Conflict { first: "e_t", second: "energy_ratio" }),
            (Some(e), None) => EnergySpec::Absolute(positive("e_t", e)?),
            (None, r) => EnergySpec::RatioToMinimum(positive("energy_ratio", r.unwrap_or(1.5))?),
        };
        let sigma2 = positive("sigma2", raw.sigma2.unwrap_or(1.0))?;
        let p_fa = probability("p_fa", raw.p_fa.unwrap_or(1e-6))?;

        let input_snr_grid_db = raw.input_snr_grid_db.unwrap_or_else(default_snr_grid);
        if input_snr_grid_db.is_empty() {
            return Err(invalid("input_snr_grid_db", "must not be empty"));
        }
        if input_snr_grid_db.iter().any(|x| !x.is_finite()) {
            return Err(invalid("input_snr_grid_db", "entries must be finite"));
        }
        let input_snr_db = raw.input_snr_db.unwrap_or(0.0);
        if !input_snr_db.is_finite() {
            return Err(invalid("input_snr_db", "must be finite"));
        }

        let theta_sweep_start_deg = angle_deg("theta_sweep_start_deg", raw.theta_sweep_start_deg.unwrap_or(-90.0))?;
        let theta_sweep_stop_deg = angle_deg("theta_sweep_stop_deg", raw.theta_sweep_stop_deg.unwrap_or(90.0))?;
        let theta_sweep_step_deg = positive("theta_sweep_step_deg", raw.theta_sweep_step_deg.unwrap_or(0.1))?;
        if theta_sweep_stop_deg < theta_sweep_start_deg {
            return Err(invalid("theta_sweep_stop_deg", "must not be below theta_sweep_start_deg"));
        }

        let mc_trials = raw.mc_trials.unwrap_or(100_000);
        if mc_trials < dfrc_core::montecarlo::MIN_TRIALS {
            return Err(invalid("mc_trials", format!("at least {} trials are required", dfrc_core::montecarlo::MIN_TRIALS)));
        }
        let mc_p_fa = probability("mc_p_fa", raw.mc_p_fa.unwrap_or(1e-3))?;
        let oracle_restarts = raw.oracle_restarts.unwrap_or(32);
        if oracle_restarts == 0 {
            return Err(invalid("oracle_restarts", "must be positive"));
        }
        let oracle_max_iters = raw.oracle_max_iters.unwrap_or(10_000);
        if oracle_max_iters == 0 {
            return Err(invalid("oracle_max_iters", "must be positive"));
        }

        Ok(Self {
            n_tx,
            n_rx,
            d_tx_wavelengths,
            d_rx_wavelengths,
            code_length,
            theta_t_deg,
            theta_c_deg,
            comm_modulation,
            bpsk_amplitude,
            comm_vector,
            energy,
            sigma2,
            p_fa,
            input_snr_grid_db,
            input_snr_db,
            theta_sweep_start_deg,
            theta_sweep_stop_deg,
            theta_sweep_step_deg,
            mc_trials,
            mc_p_fa,
            oracle_restarts,
            oracle_max_iters,
            seed: raw.seed.unwrap_or(1),
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    /// Applies command-line overrides, validating them like file values.
    pub fn with_overrides(
        mut self,
        output_dir: Option<&Path>,
        seed: Option<u64>,
        trials: Option<u64>,
    ) -> Result<Self, ConfigError> {
        if let Some(dir) = output_dir {
            self.output_dir = dir.to_owned();
        }
        if let Some(seed) = seed {
            self.seed = seed;
        }
        if let Some(trials) = trials {
            if trials < dfrc_core::montecarlo::MIN_TRIALS {
                return Err(invalid("mc_trials", format!("at least {} trials are required", dfrc_core::montecarlo::MIN_TRIALS)));
            }
            self.mc_trials = trials;
        }
        Ok(self)
    }

    /// Communication symbols `d_c`.
    pub fn comm_symbols(&self) -> Vec<C64> {
        match &self.comm_vector {
            Some((re, im)) => re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(SYMBOL_STREAM);
                let a = self.bpsk_amplitude;
                (0..self.code_length).map(|_| C64::new(if rng.random::<bool>() { a } else { -a }, 0.0)).collect()
            }
        }
    }

    pub fn array(&self) -> Result<ArrayConfig, dfrc_core::Error> {
        ArrayConfig::new(self.n_tx, self.n_rx, self.d_tx_wavelengths, self.d_rx_wavelengths)
    }

    /// The configured scenario. Energy given as a ratio is resolved against
    /// the minimum energy of the generated symbols.
    pub fn scenario(&self) -> Result<Scenario, dfrc_core::Error> {
        let d_c = self.comm_symbols();
        let e_t = match self.energy {
            EnergySpec::Absolute(e) => e,
            EnergySpec::RatioToMinimum(r) => r * dfrc_core::linalg::norm_sqr(&d_c) / self.n_tx as f64,
        };
        Scenario::new(
            self.array()?,
            self.theta_t_deg.to_radians(),
            self.theta_c_deg.to_radians(),
            d_c,
            e_t,
            self.sigma2,
        )
    }

    /// `theta_c` grid of the angle sweep, in degrees, start and stop included
    /// when they fall on the grid.
    pub fn sweep_angles_deg(&self) -> Vec<f64> {
        let span = self.theta_sweep_stop_deg - self.theta_sweep_start_deg;
        let count = (span / self.theta_sweep_step_deg + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| (self.theta_sweep_start_deg + k as f64 * self.theta_sweep_step_deg).clamp(-90.0, 90.0))
            .collect()
    }

    /// SHA-256 of the canonical serialization of the resolved configuration.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("configuration serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_scenario() {
        let c = ExperimentConfig::parse_str("").unwrap();
        assert_eq!((c.n_tx, c.n_rx, c.code_length), (16, 16, 128));
        assert_eq!((c.theta_t_deg, c.theta_c_deg), (0.0, 32.0));
        assert_eq!(c.comm_modulation, CommModulation::Bpsk);
        assert_eq!(c.bpsk_amplitude, 0.1);
        assert_eq!(c.energy, EnergySpec::RatioToMinimum(1.5));
        assert_eq!(c.p_fa, 1e-6);
        assert_eq!(c.input_snr_grid_db.len(), 201);
        assert_eq!(c.sweep_angles_deg().len(), 1801);
        assert_eq!(*c.sweep_angles_deg().last().unwrap(), 90.0);

        let s = c.scenario().unwrap();
        assert!(s.d_c().iter().all(|z| z.im == 0.0 && z.re.abs() == 0.1));
        assert!((s.e_t() - 1.5 * 1.28 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn negative_energy_names_the_field() {
        let err = ExperimentConfig::parse_str("e_t = -1.0").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { field: "e_t", .. }), "{err}");
        assert!(err.to_string().contains("e_t"));
    }

    #[test]
    fn explicit_vector_length_mismatch() {
        let text = "comm_modulation = \"explicit_vector\"\ncode_length = 3\ncomm_vector_re = [1.0, -1.0]\n";
        let err = ExperimentConfig::parse_str(text).unwrap_err();
        assert!(matches!(err, ConfigError::LengthMismatch { field: "comm_vector_re", expected: 3, found: 2 }));

        let text = "comm_modulation = \"explicit_vector\"\ncomm_vector_re = [1.0, -1.0]\ncomm_vector_im = [0.5]\n";
        let err = ExperimentConfig::parse_str(text).unwrap_err();
        assert!(matches!(err, ConfigError::LengthMismatch { field: "comm_vector_im", expected: 2, found: 1 }));
    }

    #[test]
    fn explicit_vector_is_used_verbatim() {
        let text = "comm_modulation = \"explicit_vector\"\ncomm_vector_re = [1.0, 0.0]\ncomm_vector_im = [0.0, -2.0]\n";
        let c = ExperimentConfig::parse_str(text).unwrap();
        assert_eq!(c.comm_symbols(), vec![C64::new(1.0, 0.0), C64::new(0.0, -2.0)]);
    }

    #[test]
    fn unknown_keys_and_type_errors_are_located() {
        let err = ExperimentConfig::parse_str("n_tx = 16\nthetac_deg = 3.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("thetac_deg") && msg.contains("line 2"), "{msg}");
        let err = ExperimentConfig::parse_str("n_tx = \"sixteen\"").unwrap_err();
        assert!(err.to_string().contains("n_tx"), "{err}");
    }

    #[test]
    fn range_checks() {
        assert!(ExperimentConfig::parse_str("theta_c_deg = 91.0").is_err());
        assert!(ExperimentConfig::parse_str("p_fa = 0.0").is_err());
        assert!(ExperimentConfig::parse_str("theta_sweep_step_deg = 0.0").is_err());
        assert!(ExperimentConfig::parse_str("input_snr_grid_db = []").is_err());
        assert!(ExperimentConfig::parse_str("mc_trials = 10").is_err());
        assert!(matches!(
            ExperimentConfig::parse_str("e_t = 1.0\nenergy_ratio = 2.0").unwrap_err(),
            ConfigError::Conflict { .. }
        ));
    }

    #[test]
    fn symbols_and_hash_follow_the_seed() {
        let a = ExperimentConfig::parse_str("seed = 5").unwrap();
        let b = ExperimentConfig::parse_str("seed = 5").unwrap();
        let c = ExperimentConfig::parse_str("seed = 6").unwrap();
        assert_eq!(a.comm_symbols(), b.comm_symbols());
        assert_ne!(a.comm_symbols(), c.comm_symbols());
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
