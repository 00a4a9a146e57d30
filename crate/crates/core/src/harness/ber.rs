//! Monte Carlo BER engine.
//!
//! One trial: draw a fresh channel, select antennas, map η random bits onto
//! a frame, transmit through the aligned surface, detect, count bit errors.
//! Each trial runs on its own seeded substream keyed by the trial index, so
//! the aggregate counts do not depend on how trials are scheduled across
//! threads. The stop rule (enough bit errors, or the trial budget) is only
//! evaluated at fixed batch boundaries for the same reason.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ConfigError, SimConfig};
use crate::channel::{
    noise_level, transmit_with_gains, ChannelMatrix, EffectiveGains, ReceivedVector,
};
use crate::detection::detect;
use crate::modem::{count_bit_errors, Constellation, FrameSymbol};
use crate::rng::{snr_point_factory, Domain};
use crate::selection::{select, SelectionMethod};
use rand::Rng;

/// Trials per stop-rule evaluation window.
pub const BATCH_TRIALS: u64 = 10_000;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Measured BER at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// 95% Wilson interval on the bit error probability.
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub wall_time_s: f64,
}

impl BerRecord {
    /// Equality on everything that is reproducible (wall time is not).
    pub fn same_counts(&self, other: &BerRecord) -> bool {
        self.snr_db == other.snr_db
            && self.trials == other.trials
            && self.bit_errors == other.bit_errors
            && self.ber == other.ber
            && self.ci_lo == other.ci_lo
            && self.ci_hi == other.ci_hi
    }
}

/// Everything needed to reproduce a sweep: the full config echo plus the
/// per-point records. Replaying the config gives identical counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: SimConfig,
    pub seed: u64,
    pub version: String,
    pub timestamp: String,
    pub records: Vec<BerRecord>,
}

/// Runs the configured closure on a dedicated pool of `workers` threads,
/// or inline on the global pool when `workers` is 0.
pub fn with_worker_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("worker pool")
            .install(f)
    }
}

/// Per-thread scratch buffers reused across trials.
struct Workspace {
    g: ChannelMatrix,
    rx: ReceivedVector,
}

/// Immutable per-point state shared by all trial workers.
struct TrialEngine {
    constellation: Constellation,
    selection: SelectionMethod,
    detector: crate::detection::Detector,
    n_r: usize,
    n_s: usize,
    n_ris: usize,
    eta: u32,
    es: f64,
    n0: f64,
    factory: crate::rng::SubstreamFactory,
}

impl TrialEngine {
    fn new(cfg: &SimConfig, snr_db: f64) -> Result<Self, ConfigError> {
        let n0 = if cfg.noiseless {
            0.0
        } else {
            noise_level(cfg.es, snr_db)
        };
        Ok(Self {
            constellation: cfg.constellation()?,
            selection: cfg.selection,
            detector: cfg.detector,
            n_r: cfg.n_r,
            n_s: cfg.n_s,
            n_ris: cfg.n_ris,
            eta: cfg.eta(),
            es: cfg.es,
            n0,
            factory: snr_point_factory(cfg.seed, Domain::BerTrial, snr_db),
        })
    }

    fn workspace(&self) -> Workspace {
        Workspace {
            g: ChannelMatrix::from_columns(&vec![
                vec![Complex64::new(0.0, 0.0); self.n_ris];
                self.n_r
            ]),
            rx: ReceivedVector {
                y: vec![Complex64::new(0.0, 0.0); self.n_s],
                n0: self.n0,
                es: self.es,
            },
        }
    }

    fn run_trial(&self, ws: &mut Workspace, trial: u64) -> u32 {
        let mut rng = self.factory.substream(trial);
        ws.g.resample(&mut rng);
        let gains = if self.selection == SelectionMethod::None {
            EffectiveGains::compute(&ws.g)
        } else {
            let sel = select(self.selection, &ws.g, self.n_s, &self.constellation)
                .expect("selection parameters were validated");
            EffectiveGains::compute(&ws.g.select_columns(&sel.indices))
        };
        let value = rng.gen_range(0..(1u32 << self.eta));
        let frame = FrameSymbol::from_value(value, self.n_s, self.constellation.order())
            .expect("validated dimensions");
        transmit_with_gains(
            &gains,
            &frame,
            &self.constellation,
            self.es,
            self.n0,
            &mut rng,
            &mut ws.rx.y,
        );
        let decided = detect(&ws.rx, &gains, &self.constellation, self.detector);
        count_bit_errors(&frame, decided.antenna, decided.symbol)
    }
}

/// Runs trials at one SNR point until `min_bit_errors` errors accumulated or
/// `max_trials` trials ran, whichever the next batch boundary reaches first.
///
/// Deterministic given `(config, snr_db)`; the worker count only changes the
/// wall time.
pub fn run_ber_point(cfg: &SimConfig, snr_db: f64) -> Result<BerRecord, HarnessError> {
    cfg.validate()?;
    let engine = TrialEngine::new(cfg, snr_db)?;
    let start = std::time::Instant::now();

    let (trials, bit_errors) = with_worker_pool(cfg.workers, || {
        let mut trials = 0u64;
        let mut bit_errors = 0u64;
        while trials < cfg.max_trials && bit_errors < cfg.min_bit_errors {
            let end = (trials + BATCH_TRIALS).min(cfg.max_trials);
            bit_errors += (trials..end)
                .into_par_iter()
                .map_init(
                    || engine.workspace(),
                    |ws, trial| u64::from(engine.run_trial(ws, trial)),
                )
                .sum::<u64>();
            trials = end;
        }
        (trials, bit_errors)
    });

    let total_bits = trials * u64::from(engine.eta);
    let (ci_lo, ci_hi) = wilson_interval(bit_errors, total_bits, 1.96);
    Ok(BerRecord {
        snr_db,
        trials,
        bit_errors,
        ber: bit_errors as f64 / total_bits as f64,
        ci_lo,
        ci_hi,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs [`run_ber_point`] over the config's SNR grid and wraps the records
/// in a reproducibility manifest. An empty grid yields an empty manifest.
pub fn run_sweep(cfg: &SimConfig) -> Result<RunManifest, HarnessError> {
    cfg.validate()?;
    let records = cfg
        .snr_db
        .iter()
        .map(|&snr| run_ber_point(cfg, snr))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunManifest {
        config: cfg.clone(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        records,
    })
}

/// Wilson score interval for `successes` out of `total` Bernoulli draws.
pub fn wilson_interval(successes: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
