//! Ergodic capacity of the selection-aided link.
//!
//! With the surface able to target any of the `n_s` selected antennas, the
//! covariance of the noiseless receive vector is `(Es/n_s) Σ_l h_l h_l^H`
//! where `h_l` is the effective gain vector when antenna `l` is targeted.
//! Capacity per channel use is then
//! `E{ log2 det(I + Es · Σ_l h_l h_l^H / (n_s N0)) }`, estimated by
//! averaging over sampled (and selected) channel realizations. The single
//! antenna case reduces to `E{ log2(1 + Es (Σ_r λ_r)² / N0) }`.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kahan_sum, AnalysisError};
use crate::channel::{noise_level, ChannelMatrix, EffectiveGains};
use crate::harness::SimConfig;
use crate::rng::{snr_point_factory, Domain};
use crate::selection::select;

/// Ergodic capacity estimate at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRecord {
    pub snr_db: f64,
    pub bits_per_use: f64,
    pub realizations: u64,
    /// Standard error of the realization mean.
    pub std_error: f64,
}

/// Estimates ergodic capacity by averaging the log-det expression over
/// `n_channel` selected channel realizations.
///
/// Deterministic given `(config.seed, snr_db, n_channel)` regardless of
/// thread count.
pub fn ergodic_capacity(
    cfg: &SimConfig,
    snr_db: f64,
    n_channel: u64,
) -> Result<CapacityRecord, AnalysisError> {
    cfg.validate()?;
    if n_channel == 0 {
        return Err(AnalysisError::NoRealizations);
    }
    let constellation = cfg.constellation()?;
    let n0 = noise_level(cfg.es, snr_db);
    if n0 <= 0.0 {
        return Err(AnalysisError::ZeroNoise);
    }
    let scale = cfg.es / (cfg.n_s as f64 * n0);
    let factory = snr_point_factory(cfg.seed, Domain::CapacityRealization, snr_db);

    let samples: Vec<Result<f64, AnalysisError>> = (0..n_channel)
        .into_par_iter()
        .map(|i| {
            let mut rng = factory.substream(i);
            let g = ChannelMatrix::sample(&mut rng, cfg.n_ris, cfg.n_r);
            let sel = select(cfg.selection, &g, cfg.n_s, &constellation)
                .expect("selection parameters were validated");
            let gains = EffectiveGains::compute(&g.select_columns(&sel.indices));
            log_det_capacity(&gains, scale)
        })
        .collect();
    let samples = samples.into_iter().collect::<Result<Vec<f64>, _>>()?;

    let mean = kahan_sum(&samples) / n_channel as f64;
    let variance = if n_channel > 1 {
        let sq: Vec<f64> = samples.iter().map(|c| (c - mean) * (c - mean)).collect();
        kahan_sum(&sq) / (n_channel - 1) as f64
    } else {
        0.0
    };
    Ok(CapacityRecord {
        snr_db,
        bits_per_use: mean,
        realizations: n_channel,
        std_error: (variance / n_channel as f64).sqrt(),
    })
}

/// `log2 det(I + scale · Σ_l h_l h_l^H)` for one realization.
fn log_det_capacity(gains: &EffectiveGains, scale: f64) -> Result<f64, AnalysisError> {
    let n_s = gains.n_antennas();
    // Hermitian by construction: fill the upper triangle, mirror the rest.
    let mut a = DMatrix::<Complex64>::zeros(n_s, n_s);
    for row in 0..n_s {
        for col in row..n_s {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..n_s {
                let h = gains.target_column(t);
                acc += h[row] * h[col].conj();
            }
            let value = scale * acc;
            if row == col {
                // PSD sanity: diagonal entries of Σ h h^H are Σ |h|² ≥ 0.
                if value.re < -1e-9 || value.im.abs() > 1e-6 {
                    return Err(AnalysisError::NotPositiveDefinite);
                }
                a[(row, col)] = Complex64::new(1.0 + value.re, 0.0);
            } else {
                a[(row, col)] = value;
                a[(col, row)] = value.conj();
            }
        }
    }
    let chol = Cholesky::new(a).ok_or(AnalysisError::NotPositiveDefinite)?;
    let log_det: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.re.ln()).sum();
    Ok(log_det / std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::Detector;
    use crate::selection::SelectionMethod;

    fn as_cfg(n_ris: usize) -> SimConfig {
        let mut cfg = SimConfig::as_ris_rsm(SelectionMethod::Coas, Detector::Ml, 4, 8, 2, n_ris);
        cfg.seed = 7;
        cfg
    }

    #[test]
    fn capacity_vanishes_in_heavy_noise() {
        let rec = ergodic_capacity(&as_cfg(8), -80.0, 100).unwrap();
        assert!(rec.bits_per_use >= 0.0);
        assert!(rec.bits_per_use < 1e-4, "capacity {}", rec.bits_per_use);
    }

    #[test]
    fn capacity_grows_with_surface_size() {
        let small = ergodic_capacity(&as_cfg(4), 10.0, 400).unwrap();
        let large = ergodic_capacity(&as_cfg(16), 10.0, 400).unwrap();
        assert!(
            large.bits_per_use - small.bits_per_use > 2.0 * (large.std_error + small.std_error),
            "N = 16 ({}) not above N = 4 ({})",
            large.bits_per_use,
            small.bits_per_use
        );
    }

    #[test]
    fn capacity_is_deterministic() {
        let a = ergodic_capacity(&as_cfg(8), 5.0, 200).unwrap();
        let b = ergodic_capacity(&as_cfg(8), 5.0, 200).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_antenna_matches_scalar_formula() {
        // For n_s = 1 the log-det collapses to log2(1 + Es (Σλ)² / N0);
        // check one realization against the scalar route.
        let mut cfg = SimConfig::ris_qam(4, 8);
        cfg.seed = 3;
        let snr_db = 6.0;
        let rec = ergodic_capacity(&cfg, snr_db, 1).unwrap();

        let factory = snr_point_factory(cfg.seed, Domain::CapacityRealization, snr_db);
        let mut rng = factory.substream(0);
        let g = ChannelMatrix::sample(&mut rng, cfg.n_ris, cfg.n_r);
        let amp: f64 = g.column(0).iter().map(|x| x.norm()).sum();
        let n0 = noise_level(cfg.es, snr_db);
        let expected = (1.0 + cfg.es * amp * amp / n0).log2();
        approx::assert_abs_diff_eq!(rec.bits_per_use, expected, epsilon = 1e-10);
    }
}
