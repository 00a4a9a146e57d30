//! Joint detection of (target antenna, symbol) from one received vector.
//!
//! The ML detector scans all `n_s · M` hypotheses of the received-signal
//! model `y_l = √Es · H_l(t) · s_q + w_l`. The greedy detector decides in two
//! stages: the antenna with the largest received energy, then the nearest
//! symbol assuming that antenna's coherent amplitude `Σ_r |g[r][t̂]|` — the
//! amplitude is used as-is even though it only equals the true effective
//! gain when the stage-1 decision is correct, which is what makes the
//! detector cheap and slightly sub-optimal.
//!
//! All ties resolve to the smallest index so runs are reproducible.

use serde::{Deserialize, Serialize};

use crate::channel::{EffectiveGains, ReceivedVector};
use crate::modem::Constellation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    #[default]
    Ml,
    Greedy,
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Detector::Ml => "ml",
            Detector::Greedy => "greedy",
        })
    }
}

/// Detected indices (zero-based) and the achieved decision metric: the
/// global minimum for ML, the stage-2 symbol metric for the greedy detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult {
    pub antenna: usize,
    pub symbol: usize,
    pub metric: f64,
}

/// Exhaustive minimization of `Σ_l |y_l − √Es · H_l(t) · s_q|²` over all
/// `n_s · M` hypotheses. Ties keep the smaller `(t, q)`.
pub fn ml_detect(
    rx: &ReceivedVector,
    gains: &EffectiveGains,
    constellation: &Constellation,
) -> DetectionResult {
    let sqrt_es = rx.es.sqrt();
    let mut best = DetectionResult {
        antenna: 0,
        symbol: 0,
        metric: f64::INFINITY,
    };
    for t in 0..gains.n_antennas() {
        let column = gains.target_column(t);
        for (q, s) in constellation.points().iter().enumerate() {
            let scaled = sqrt_es * s;
            let metric: f64 =
                rx.y.iter()
                    .zip(column)
                    .map(|(y, h)| (y - scaled * h).norm_sqr())
                    .sum();
            if metric < best.metric {
                best = DetectionResult {
                    antenna: t,
                    symbol: q,
                    metric,
                };
            }
        }
    }
    best
}

/// Two-stage detection: `t̂ = argmax_l |y_l|²`, then
/// `q̂ = argmin_q |y_t̂ − √Es · (Σ_r |g[r][t̂]|) · s_q|²`.
pub fn greedy_detect(
    rx: &ReceivedVector,
    gains: &EffectiveGains,
    constellation: &Constellation,
) -> DetectionResult {
    let mut antenna = 0;
    let mut energy = f64::NEG_INFINITY;
    for (l, y) in rx.y.iter().enumerate() {
        let e = y.norm_sqr();
        if e > energy {
            energy = e;
            antenna = l;
        }
    }

    let reference = rx.es.sqrt() * gains.amplitude(antenna);
    let y_hat = rx.y[antenna];
    let mut symbol = 0;
    let mut metric = f64::INFINITY;
    for (q, s) in constellation.points().iter().enumerate() {
        let m = (y_hat - reference * s).norm_sqr();
        if m < metric {
            metric = m;
            symbol = q;
        }
    }
    DetectionResult {
        antenna,
        symbol,
        metric,
    }
}

/// Dispatches on the detector choice.
pub fn detect(
    rx: &ReceivedVector,
    gains: &EffectiveGains,
    constellation: &Constellation,
    detector: Detector,
) -> DetectionResult {
    match detector {
        Detector::Ml => ml_detect(rx, gains, constellation),
        Detector::Greedy => greedy_detect(rx, gains, constellation),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{transmit, ChannelMatrix};
    use crate::modem::{Constellation, ConstellationKind, FrameSymbol};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn noiseless_ml_recovers_every_frame() {
        let mut r = rng(1);
        let c = Constellation::new(ConstellationKind::Qam, 4).unwrap();
        let (n_s, m) = (4, 4);
        for _ in 0..50 {
            let g = ChannelMatrix::sample(&mut r, 16, n_s);
            let gains = EffectiveGains::compute(&g);
            for value in 0..(n_s * m) as u32 {
                let frame = FrameSymbol::from_value(value, n_s, m).unwrap();
                let rx = transmit(&g, &frame, &c, 1.0, 0.0, &mut r);
                let det = ml_detect(&rx, &gains, &c);
                assert_eq!((det.antenna, det.symbol), (frame.antenna, frame.symbol));
                assert!(det.metric < 1e-18);
            }
        }
    }

    #[test]
    fn scalar_bpsk_ml_matches_sign_rule() {
        let mut r = rng(2);
        let c = Constellation::new(ConstellationKind::Psk, 2).unwrap();
        for _ in 0..500 {
            let g = ChannelMatrix::sample(&mut r, 4, 1);
            let gains = EffectiveGains::compute(&g);
            let frame = FrameSymbol::from_value(r.gen_range(0..2), 1, 2).unwrap();
            let rx = transmit(&g, &frame, &c, 1.0, 2.0, &mut r);
            let det = ml_detect(&rx, &gains, &c);
            // Two-hypothesis expansion: prefer +1 iff Re(y · conj(a)) > 0
            // where a = √Es · H is real positive here.
            let a = rx.es.sqrt() * gains.gain(0, 0);
            let expected = if (rx.y[0] * a.conj()).re > 0.0 { 0 } else { 1 };
            assert_eq!(det.symbol, expected);
        }
    }

    #[test]
    fn ml_metric_is_the_global_minimum() {
        let mut r = rng(3);
        let c = Constellation::new(ConstellationKind::Qam, 8).unwrap();
        for _ in 0..100 {
            let g = ChannelMatrix::sample(&mut r, 8, 2);
            let gains = EffectiveGains::compute(&g);
            let frame = FrameSymbol::from_value(r.gen_range(0..16), 2, 8).unwrap();
            let rx = transmit(&g, &frame, &c, 1.0, 1.0, &mut r);
            let det = ml_detect(&rx, &gains, &c);
            let recompute = |t: usize, q: usize| -> f64 {
                rx.y.iter()
                    .zip(gains.target_column(t))
                    .map(|(y, h)| (y - rx.es.sqrt() * c.point(q) * h).norm_sqr())
                    .sum()
            };
            for t in 0..2 {
                for q in 0..8 {
                    assert!(det.metric <= recompute(t, q) + 1e-12);
                }
            }
            assert!(det.metric <= recompute(frame.antenna, frame.symbol) + 1e-12);
        }
    }

    #[test]
    fn greedy_stage_one_picks_largest_energy() {
        let g = ChannelMatrix::sample(&mut rng(4), 8, 3);
        let gains = EffectiveGains::compute(&g);
        let c = Constellation::new(ConstellationKind::Qam, 4).unwrap();
        let rx = ReceivedVector {
            y: vec![
                Complex64::new(0.1, 0.0),
                Complex64::new(0.0, 2.3),
                Complex64::new(-0.5, 0.0),
            ],
            n0: 1.0,
            es: 1.0,
        };
        assert_eq!(greedy_detect(&rx, &gains, &c).antenna, 1);
    }

    #[test]
    fn greedy_recovers_noiseless_frames_at_large_n() {
        // The coherent amplitude at the target dwarfs the incoherent
        // off-target gains, and a positive real gain preserves the quadrant.
        let mut r = rng(5);
        let c = Constellation::new(ConstellationKind::Qam, 4).unwrap();
        let (n_s, m) = (4, 4);
        for _ in 0..200 {
            let g = ChannelMatrix::sample(&mut r, 32, n_s);
            let gains = EffectiveGains::compute(&g);
            let frame = FrameSymbol::from_value(r.gen_range(0..(n_s * m) as u32), n_s, m).unwrap();
            let rx = transmit(&g, &frame, &c, 1.0, 0.0, &mut r);
            let det = greedy_detect(&rx, &gains, &c);
            assert_eq!((det.antenna, det.symbol), (frame.antenna, frame.symbol));
        }
    }

    #[test]
    fn greedy_agrees_with_ml_at_large_n() {
        let mut r = rng(6);
        let c = Constellation::new(ConstellationKind::Qam, 4).unwrap();
        let (n_s, m, n_elements) = (2usize, 4usize, 256usize);
        // Noise fixed relative to the mean coherent gain: 14 dB post-alignment.
        let mean_amp = n_elements as f64 * std::f64::consts::PI.sqrt() / 2.0;
        let n0 = mean_amp * mean_amp / 10f64.powf(1.4);
        let trials = 2000;
        let mut agree = 0;
        for _ in 0..trials {
            let g = ChannelMatrix::sample(&mut r, n_elements, n_s);
            let gains = EffectiveGains::compute(&g);
            let frame = FrameSymbol::from_value(r.gen_range(0..(n_s * m) as u32), n_s, m).unwrap();
            let rx = transmit(&g, &frame, &c, 1.0, n0, &mut r);
            let ml = ml_detect(&rx, &gains, &c);
            let gd = greedy_detect(&rx, &gains, &c);
            if (ml.antenna, ml.symbol) == (gd.antenna, gd.symbol) {
                agree += 1;
            }
        }
        let rate = agree as f64 / trials as f64;
        assert!(rate >= 0.99, "agreement rate {rate} below 0.99");
    }

    #[test]
    fn detect_dispatches_to_both_detectors() {
        let mut r = rng(7);
        let c = Constellation::new(ConstellationKind::Qam, 4).unwrap();
        let g = ChannelMatrix::sample(&mut r, 8, 2);
        let gains = EffectiveGains::compute(&g);
        let frame = FrameSymbol::from_value(5, 2, 4).unwrap();
        let rx = transmit(&g, &frame, &c, 1.0, 0.5, &mut r);
        assert_eq!(
            detect(&rx, &gains, &c, Detector::Ml),
            ml_detect(&rx, &gains, &c)
        );
        assert_eq!(
            detect(&rx, &gains, &c, Detector::Greedy),
            greedy_detect(&rx, &gains, &c)
        );
    }
}
