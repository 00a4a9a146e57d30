//! Semi-analytic error analysis, ergodic capacity, and complexity counts.
//!
//! The bit-error bound sums, over every ordered pair of transmission
//! hypotheses, the pairwise probability that the ML metric prefers the wrong
//! one, weighted by the number of bit errors that decision costs. The
//! expectation over the fading channel has no closed form once antenna
//! selection is involved, so it is evaluated by averaging over sampled (and
//! selected) channel realizations.

mod capacity;
mod complexity;

pub use capacity::{ergodic_capacity, CapacityRecord};
pub use complexity::{
    complexity_rm, complexity_table, ComplexityParams, ComplexityReport, ComplexitySystem,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{effective_gain, noise_level, ChannelMatrix, EffectiveGains};
use crate::detection::Detector;
use crate::harness::{ConfigError, SimConfig};
use crate::modem::Constellation;
use crate::rng::{snr_point_factory, Domain};
use crate::selection::{select, SelectionError};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("division by zero: noise level N0 = 0")]
    ZeroNoise,
    #[error("invalid combination: {system} has no {detector} complexity formula")]
    InvalidCombination {
        system: ComplexitySystem,
        detector: Detector,
    },
    #[error("complexity formula does not evaluate to an integer for these parameters")]
    NonIntegerResult,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("need at least one channel realization")]
    NoRealizations,
    #[error("capacity determinant argument was not positive definite")]
    NotPositiveDefinite,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

/// Standard Gaussian tail probability `Q(x) = P(Z > x)`, evaluated through
/// the complementary error function: `Q(x) = erfc(x/√2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Pairwise probability, conditioned on the selected channel, that the ML
/// metric prefers hypothesis `(t̂, q̂)` over the true `(t, q)`:
/// `Q(√(Υ / 2N₀))` with `Υ = Es · Σ_l |H_l(t)·s_q − H_l(t̂)·s_q̂|²`.
///
/// Identical hypotheses give `Υ = 0` and therefore 0.5.
#[allow(clippy::too_many_arguments)]
pub fn conditional_pep(
    g_s: &ChannelMatrix,
    t: usize,
    q: usize,
    t_hat: usize,
    q_hat: usize,
    constellation: &Constellation,
    es: f64,
    n0: f64,
) -> Result<f64, AnalysisError> {
    if n0 <= 0.0 {
        return Err(AnalysisError::ZeroNoise);
    }
    let h = effective_gain(g_s, t);
    let h_hat = effective_gain(g_s, t_hat);
    let s = constellation.point(q);
    let s_hat = constellation.point(q_hat);
    let upsilon: f64 = es
        * h.iter()
            .zip(&h_hat)
            .map(|(a, b)| (a * s - b * s_hat).norm_sqr())
            .sum::<f64>();
    Ok(q_function((upsilon / (2.0 * n0)).sqrt()))
}

/// Same quantity against precomputed gain columns (bound inner loop).
#[allow(clippy::too_many_arguments)]
fn pep_with_gains(
    gains: &EffectiveGains,
    t: usize,
    q: usize,
    t_hat: usize,
    q_hat: usize,
    constellation: &Constellation,
    es: f64,
    n0: f64,
) -> f64 {
    let s = constellation.point(q);
    let s_hat = constellation.point(q_hat);
    let upsilon: f64 = es
        * gains
            .target_column(t)
            .iter()
            .zip(gains.target_column(t_hat))
            .map(|(a, b)| (a * s - b * s_hat).norm_sqr())
            .sum::<f64>();
    q_function((upsilon / (2.0 * n0)).sqrt())
}

/// A semi-analytic average bit-error-rate estimate at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AberEstimate {
    pub snr_db: f64,
    pub value: f64,
    pub channel_realizations: u64,
    /// Configuration the estimate was computed under.
    pub fingerprint: String,
}

/// Union-bound ABER estimate, averaged over `n_channel` selected channel
/// realizations:
/// `(1/(η·2^η)) · Σ_{(t,q) ≠ (t̂,q̂)} E_H[pep] · hamming(bits(t,q), bits(t̂,q̂))`.
///
/// The estimate is deterministic given `(config.seed, snr_db, n_channel)`
/// and independent of thread count: per-realization contributions come from
/// seeded substreams and are reduced in index order.
pub fn aber_union_bound(
    cfg: &SimConfig,
    snr_db: f64,
    n_channel: u64,
) -> Result<AberEstimate, AnalysisError> {
    cfg.validate()?;
    if n_channel == 0 {
        return Err(AnalysisError::NoRealizations);
    }
    let constellation = cfg.constellation()?;
    let n0 = noise_level(cfg.es, snr_db);
    if n0 <= 0.0 {
        return Err(AnalysisError::ZeroNoise);
    }
    let eta = cfg.eta();
    let n_hyp = 1u32 << eta;
    let symbol_bits = constellation.bits_per_symbol();
    let factory = snr_point_factory(cfg.seed, Domain::AberRealization, snr_db);

    let contributions: Vec<f64> = (0..n_channel)
        .into_par_iter()
        .map(|i| {
            let mut rng = factory.substream(i);
            let g = ChannelMatrix::sample(&mut rng, cfg.n_ris, cfg.n_r);
            let sel = select(cfg.selection, &g, cfg.n_s, &constellation)
                .expect("selection parameters were validated");
            let gains = EffectiveGains::compute(&g.select_columns(&sel.indices));
            let mut sum = 0.0;
            for a in 0..n_hyp {
                let (t, q) = unpack(a, symbol_bits);
                for b in 0..n_hyp {
                    if a == b {
                        continue;
                    }
                    let (t_hat, q_hat) = unpack(b, symbol_bits);
                    let pep =
                        pep_with_gains(&gains, t, q, t_hat, q_hat, &constellation, cfg.es, n0);
                    sum += pep * f64::from((a ^ b).count_ones());
                }
            }
            sum
        })
        .collect();

    let total = kahan_sum(&contributions);
    let value = total / (f64::from(eta) * f64::from(n_hyp) * n_channel as f64);
    Ok(AberEstimate {
        snr_db,
        value,
        channel_realizations: n_channel,
        fingerprint: cfg.fingerprint(),
    })
}

fn unpack(packed: u32, symbol_bits: u32) -> (usize, usize) {
    (
        (packed >> symbol_bits) as usize,
        (packed & ((1 << symbol_bits) - 1)) as usize,
    )
}

/// Compensated (Kahan) summation in index order.
pub(crate) fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::transmit;
    use crate::modem::{ConstellationKind, FrameSymbol};
    use crate::selection::SelectionMethod;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn q_function_fixed_points() {
        assert_abs_diff_eq!(q_function(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q_function(1.6449), 0.05, epsilon = 1e-4);
        for x in [-2.0, -0.3, 0.7, 1.9] {
            assert_abs_diff_eq!(q_function(x) + q_function(-x), 1.0, epsilon = 1e-14);
        }
    }

    /// Independent oracle: integrate the standard normal density from x
    /// outward with Simpson's rule.
    #[test]
    fn q_function_matches_numeric_integration() {
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let simpson = |a: f64, b: f64, n: usize| -> f64 {
            let h = (b - a) / n as f64;
            let mut s = pdf(a) + pdf(b);
            for i in 1..n {
                let w = if i % 2 == 0 { 2.0 } else { 4.0 };
                s += w * pdf(a + i as f64 * h);
            }
            s * h / 3.0
        };
        for x in [0.0, 0.5, 1.0, 1.6449, 2.5, 4.0] {
            let oracle = simpson(x, x + 12.0, 20_000);
            assert_abs_diff_eq!(q_function(x), oracle, epsilon = 1e-10);
        }
    }

    fn qam4() -> Constellation {
        Constellation::new(ConstellationKind::Qam, 4).unwrap()
    }

    #[test]
    fn identical_hypotheses_give_one_half() {
        let g = ChannelMatrix::sample(&mut ChaCha8Rng::seed_from_u64(1), 4, 2);
        let p = conditional_pep(&g, 0, 1, 0, 1, &qam4(), 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn bpsk_antipodal_pep_closed_form() {
        let c = Constellation::new(ConstellationKind::Psk, 2).unwrap();
        let g = ChannelMatrix::sample(&mut ChaCha8Rng::seed_from_u64(2), 4, 1);
        let (es, n0) = (1.5, 0.7);
        let h = effective_gain(&g, 0)[0];
        let expected = q_function((2.0 * es * h.norm_sqr() / n0).sqrt());
        let p = conditional_pep(&g, 0, 0, 0, 1, &c, es, n0).unwrap();
        assert_abs_diff_eq!(p, expected, epsilon = 1e-12);
    }

    #[test]
    fn pep_stays_in_half_open_range() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let c = qam4();
        for _ in 0..50 {
            let g = ChannelMatrix::sample(&mut r, 4, 2);
            for t in 0..2 {
                for q in 0..4 {
                    let p = conditional_pep(&g, 0, 0, t, q, &c, 1.0, 1.0).unwrap();
                    assert!(p > 0.0 && p <= 0.5, "pep {p} out of range");
                }
            }
        }
        assert_eq!(
            conditional_pep(
                &ChannelMatrix::sample(&mut r, 2, 2),
                0,
                0,
                1,
                1,
                &c,
                1.0,
                0.0
            ),
            Err(AnalysisError::ZeroNoise)
        );
    }

    /// Event-simulation oracle for the pairwise comparison: draw noise,
    /// count how often the wrong hypothesis wins the metric contest.
    #[test]
    fn pep_matches_event_simulation() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let c = qam4();
        let g = ChannelMatrix::sample(&mut r, 2, 2);
        let gains = EffectiveGains::compute(&g);
        let (es, n0) = (1.0, 1.0);
        let (t, q, t_hat, q_hat) = (0usize, 0usize, 1usize, 2usize);
        let analytic = conditional_pep(&g, t, q, t_hat, q_hat, &c, es, n0).unwrap();

        let frame = FrameSymbol::from_value(((t as u32) << 2) | q as u32, 2, 4).unwrap();
        let draws = 100_000;
        let mut wins = 0u64;
        for _ in 0..draws {
            let rx = transmit(&g, &frame, &c, es, n0, &mut r);
            let metric = |tt: usize, qq: usize| -> f64 {
                rx.y.iter()
                    .zip(gains.target_column(tt))
                    .map(|(y, h)| (y - es.sqrt() * c.point(qq) * h).norm_sqr())
                    .sum()
            };
            if metric(t, q) > metric(t_hat, q_hat) {
                wins += 1;
            }
        }
        let empirical = wins as f64 / draws as f64;
        let se = (analytic * (1.0 - analytic) / draws as f64).sqrt();
        assert!(
            (empirical - analytic).abs() <= 3.0 * se,
            "empirical {empirical} vs analytic {analytic} (se {se})"
        );
    }

    fn bound_config() -> SimConfig {
        let mut cfg = SimConfig::as_ris_rsm(SelectionMethod::Coas, Detector::Ml, 4, 8, 2, 8);
        cfg.seed = 99;
        cfg
    }

    #[test]
    fn bound_vanishes_at_high_snr() {
        let est = aber_union_bound(&bound_config(), 60.0, 50).unwrap();
        assert!(est.value < 1e-10, "bound {} at 60 dB", est.value);
    }

    #[test]
    fn bound_is_deterministic() {
        let a = aber_union_bound(&bound_config(), -10.0, 200).unwrap();
        let b = aber_union_bound(&bound_config(), -10.0, 200).unwrap();
        assert_eq!(a, b);
        assert!(a.value > 0.0);
    }

    #[test]
    fn bound_rejects_zero_realizations() {
        assert_eq!(
            aber_union_bound(&bound_config(), 0.0, 0),
            Err(AnalysisError::NoRealizations)
        );
    }
}
