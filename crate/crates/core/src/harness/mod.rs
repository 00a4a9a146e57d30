//! Experiment configuration, the Monte Carlo BER engine, and result
//! persistence.

mod ber;
pub mod output;

pub use ber::{
    run_ber_point, run_sweep, wilson_interval, with_worker_pool, BerRecord, HarnessError,
    RunManifest, BATCH_TRIALS,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::Detector;
use crate::modem::{log2_exact, Constellation, ConstellationKind, ModemError};
use crate::selection::{binomial, SelectionMethod, MAX_ANTENNAS};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Modem(#[from] ModemError),
}

/// Simulated system family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    /// Single receive antenna, all bits on a QAM symbol.
    RisQam,
    /// Single receive antenna, all bits on a PSK symbol.
    RisPsk,
    /// Receive spatial modulation over all `n_r` antennas, no selection.
    RisRsm,
    /// Receive spatial modulation over `n_s` antennas selected from `n_r`.
    AsRisRsm,
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            System::RisQam => "ris-qam",
            System::RisPsk => "ris-psk",
            System::RisRsm => "ris-rsm",
            System::AsRisRsm => "as-ris-rsm",
        })
    }
}

fn default_es() -> f64 {
    1.0
}
fn default_min_bit_errors() -> u64 {
    200
}
fn default_max_trials() -> u64 {
    100_000_000
}
fn default_subset_cap() -> u64 {
    1_000_000
}

/// One experiment: system, dimensions, SNR grid, seed and stop rule.
///
/// In TOML form every field uses its snake_case name; unset fields take the
/// defaults shown by [`SimConfig::as_ris_rsm`] and friends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub system: System,
    #[serde(default)]
    pub selection: SelectionMethod,
    #[serde(default)]
    pub detector: Detector,
    /// Constellation order `M`.
    pub m: usize,
    /// Available receive antennas `n_R`.
    pub n_r: usize,
    /// Selected (used) receive antennas `n_S`.
    pub n_s: usize,
    /// Reflecting surface elements `N`.
    pub n_ris: usize,
    /// Per-symbol energy `Es`; SNR(dB) = 10·log10(Es/N0).
    #[serde(default = "default_es")]
    pub es: f64,
    /// Strictly increasing SNR grid in dB.
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Stop a point once this many bit errors were seen…
    #[serde(default = "default_min_bit_errors")]
    pub min_bit_errors: u64,
    /// …or once this many trials ran, whichever comes first.
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    /// Worker threads; 0 uses the process-wide default.
    #[serde(default)]
    pub workers: usize,
    /// Refuse ACAS/EDAS scans wider than this many subsets.
    #[serde(default = "default_subset_cap")]
    pub subset_cap: u64,
    /// Debug switch: transmit with N0 = 0 regardless of the grid value.
    #[serde(default)]
    pub noiseless: bool,
}

impl SimConfig {
    fn base(system: System, m: usize, n_r: usize, n_s: usize, n_ris: usize) -> Self {
        Self {
            system,
            selection: SelectionMethod::None,
            detector: Detector::Ml,
            m,
            n_r,
            n_s,
            n_ris,
            es: default_es(),
            snr_db: Vec::new(),
            seed: 0,
            min_bit_errors: default_min_bit_errors(),
            max_trials: default_max_trials(),
            workers: 0,
            subset_cap: default_subset_cap(),
            noiseless: false,
        }
    }

    /// Selection-aided RSM system.
    pub fn as_ris_rsm(
        selection: SelectionMethod,
        detector: Detector,
        m: usize,
        n_r: usize,
        n_s: usize,
        n_ris: usize,
    ) -> Self {
        Self {
            selection,
            detector,
            ..Self::base(System::AsRisRsm, m, n_r, n_s, n_ris)
        }
    }

    /// RSM over all antennas, no selection.
    pub fn ris_rsm(m: usize, n_r: usize, n_ris: usize) -> Self {
        Self::base(System::RisRsm, m, n_r, n_r, n_ris)
    }

    /// Single-antenna QAM baseline carrying all bits on the symbol.
    pub fn ris_qam(m: usize, n_ris: usize) -> Self {
        Self::base(System::RisQam, m, 1, 1, n_ris)
    }

    /// Single-antenna PSK baseline.
    pub fn ris_psk(m: usize, n_ris: usize) -> Self {
        Self::base(System::RisPsk, m, 1, 1, n_ris)
    }

    /// With an SNR grid (builder style).
    pub fn with_snr_grid(mut self, snr_db: Vec<f64>) -> Self {
        self.snr_db = snr_db;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Constellation kind implied by the system family.
    pub fn constellation_kind(&self) -> ConstellationKind {
        match self.system {
            System::RisPsk => ConstellationKind::Psk,
            _ => ConstellationKind::Qam,
        }
    }

    pub fn constellation(&self) -> Result<Constellation, ConfigError> {
        Ok(Constellation::new(self.constellation_kind(), self.m)?)
    }

    /// Bits per channel use, `η = log2(n_s) + log2(M)`.
    pub fn eta(&self) -> u32 {
        log2_exact(self.n_s).expect("validated n_s") + log2_exact(self.m).expect("validated m")
    }

    /// Compact one-line echo of the knobs that define an experiment.
    pub fn fingerprint(&self) -> String {
        format!(
            "{}/{}/{} m={} n_r={} n_s={} n_ris={} es={} seed={}",
            self.system,
            self.selection,
            self.detector,
            self.m,
            self.n_r,
            self.n_s,
            self.n_ris,
            self.es,
            self.seed
        )
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        self.constellation()?;
        if log2_exact(self.n_s).is_none() {
            return invalid(format!("n_s = {} must be a power of two", self.n_s));
        }
        if self.n_ris == 0 {
            return invalid("need at least one reflecting element".into());
        }
        if self.n_r == 0 || self.n_r > MAX_ANTENNAS {
            return invalid(format!(
                "n_r = {} out of range 1..={MAX_ANTENNAS}",
                self.n_r
            ));
        }
        if self.n_s > self.n_r {
            return invalid(format!("n_s = {} exceeds n_r = {}", self.n_s, self.n_r));
        }
        match self.system {
            System::AsRisRsm => {
                if self.selection == SelectionMethod::None && self.n_s != self.n_r {
                    return invalid("as-ris-rsm without a selection rule needs n_s = n_r".into());
                }
                if self.selection == SelectionMethod::Acas && self.n_s < 2 {
                    return invalid("acas needs at least two selected antennas".into());
                }
            }
            System::RisRsm => {
                if self.selection != SelectionMethod::None || self.n_s != self.n_r {
                    return invalid("ris-rsm uses all antennas: selection none, n_s = n_r".into());
                }
            }
            System::RisQam | System::RisPsk => {
                if self.selection != SelectionMethod::None || self.n_s != 1 || self.n_r != 1 {
                    return invalid(
                        "single-antenna baselines need selection none and n_s = n_r = 1".into(),
                    );
                }
            }
        }
        if matches!(
            self.selection,
            SelectionMethod::Acas | SelectionMethod::Edas
        ) {
            let count = binomial(self.n_r as u64, self.n_s as u64);
            if count > self.subset_cap as u128 {
                return invalid(format!(
                    "selection scan over C({}, {}) = {count} subsets exceeds subset_cap = {}",
                    self.n_r, self.n_s, self.subset_cap
                ));
            }
            if count > 10_000 {
                log::warn!(
                    "selection scans C({}, {}) = {count} subsets per trial; this dominates runtime",
                    self.n_r,
                    self.n_s
                );
            }
        }
        if !self.snr_db.windows(2).all(|w| w[0] < w[1]) {
            return invalid("snr_db grid must be strictly increasing".into());
        }
        if self.es <= 0.0 || !self.es.is_finite() {
            return invalid(format!("es = {} must be positive and finite", self.es));
        }
        if self.max_trials == 0 || self.max_trials > 1_000_000_000_000 {
            return invalid(format!(
                "max_trials = {} out of range 1..=1e12",
                self.max_trials
            ));
        }
        Ok(())
    }
}
