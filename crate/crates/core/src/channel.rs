//! Rayleigh fading between RIS elements and receive antennas, RIS phase
//! alignment, and noisy signal generation.
//!
//! The channel from the surface to the receiver is an `N × n` matrix of
//! i.i.d. circularly-symmetric complex Gaussian coefficients with unit
//! variance. To target antenna `t` the surface rotates each element by the
//! conjugate phase of that antenna's coefficient, so all `N` reflections add
//! coherently there: the effective gain at the target is `Σ_r |g[r][t]|`,
//! real and maximal over all unit-modulus phase choices.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::modem::{Constellation, FrameSymbol};

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("division by zero: noise level N0 = 0")]
    ZeroNoise,
}

/// Complex channel coefficients between `n_elements` RIS elements (rows) and
/// `n_antennas` receive antennas (columns), stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    n_elements: usize,
    n_antennas: usize,
    data: Vec<Complex64>,
}

impl ChannelMatrix {
    /// Draws an `n_elements × n_antennas` matrix of i.i.d. CN(0, 1) entries.
    pub fn sample<R: Rng>(rng: &mut R, n_elements: usize, n_antennas: usize) -> Self {
        let mut m = Self {
            n_elements,
            n_antennas,
            data: vec![Complex64::new(0.0, 0.0); n_elements * n_antennas],
        };
        m.resample(rng);
        m
    }

    /// Redraws every entry in place, reusing the allocation.
    pub fn resample<R: Rng>(&mut self, rng: &mut R) {
        for g in &mut self.data {
            *g = sample_cn01(rng);
        }
    }

    pub fn from_columns(columns: &[Vec<Complex64>]) -> Self {
        let n_elements = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == n_elements));
        Self {
            n_elements,
            n_antennas: columns.len(),
            data: columns.concat(),
        }
    }

    /// Number of RIS elements `N` (rows).
    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    /// Number of antennas (columns).
    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    /// Coefficient between element `r` and antenna `l` (zero-based).
    pub fn entry(&self, r: usize, l: usize) -> Complex64 {
        self.data[l * self.n_elements + r]
    }

    /// Column of coefficients for antenna `l`.
    pub fn column(&self, l: usize) -> &[Complex64] {
        &self.data[l * self.n_elements..(l + 1) * self.n_elements]
    }

    /// Squared Frobenius norm of column `l`.
    pub fn col_norm_sq(&self, l: usize) -> f64 {
        self.column(l).iter().map(|g| g.norm_sqr()).sum()
    }

    /// Submatrix keeping `indices` columns in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.n_elements);
        for &l in indices {
            data.extend_from_slice(self.column(l));
        }
        Self {
            n_elements: self.n_elements,
            n_antennas: indices.len(),
            data,
        }
    }

    /// Scales every entry by a real factor (test and analysis helper).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_elements: self.n_elements,
            n_antennas: self.n_antennas,
            data: self.data.iter().map(|g| g * factor).collect(),
        }
    }
}

fn sample_cn01<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Unit-modulus RIS phase settings, one column per selectable target
/// antenna: `Φ[r][l] = conj(g[r][l]) / |g[r][l]|`.
///
/// Multiplying a coefficient by its own profile entry cancels its phase, so
/// column `t` makes all element contributions at antenna `t` add coherently.
#[derive(Debug, Clone)]
pub struct PhaseProfile {
    n_elements: usize,
    n_targets: usize,
    data: Vec<Complex64>,
}

impl PhaseProfile {
    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    pub fn entry(&self, r: usize, t: usize) -> Complex64 {
        self.data[t * self.n_elements + r]
    }

    /// Profile column applied when targeting antenna `t`.
    pub fn column(&self, t: usize) -> &[Complex64] {
        &self.data[t * self.n_elements..(t + 1) * self.n_elements]
    }
}

/// Builds the phase profile aligned to each column of `g_s`.
///
/// A coefficient that is exactly zero has no defined phase; its profile
/// entry is set to 1 and the (measure-zero) event is logged.
pub fn phase_profile(g_s: &ChannelMatrix) -> PhaseProfile {
    let data = g_s
        .data
        .iter()
        .map(|g| {
            let mag = g.norm();
            if mag == 0.0 {
                log::warn!("degenerate zero channel entry; substituting unit phase");
                Complex64::new(1.0, 0.0)
            } else {
                g.conj() / mag
            }
        })
        .collect();
    PhaseProfile {
        n_elements: g_s.n_elements,
        n_targets: g_s.n_antennas,
        data,
    }
}

/// Effective aligned gain at antenna `l` when the surface targets `t`:
/// `H_l(t) = Σ_r g[r][l] · Φ[r][t]`. At `l = t` this is `Σ_r |g[r][t]|`.
pub fn effective_gain(g_s: &ChannelMatrix, t: usize) -> Vec<Complex64> {
    let profile = phase_profile(g_s);
    (0..g_s.n_antennas)
        .map(|l| {
            g_s.column(l)
                .iter()
                .zip(profile.column(t))
                .map(|(g, phi)| g * phi)
                .sum()
        })
        .collect()
}

/// All effective gain columns of a selected channel, precomputed once per
/// realization: `gain(l, t)` for every candidate target `t`. Detection needs
/// the full set; the greedy second stage needs only the real amplitudes
/// `amp[t] = Σ_r |g[r][t]|`.
#[derive(Debug, Clone)]
pub struct EffectiveGains {
    n_antennas: usize,
    /// Column-major: `h[t * n_antennas + l]` is `H_l(t)`.
    h: Vec<Complex64>,
    amp: Vec<f64>,
}

impl EffectiveGains {
    pub fn compute(g_s: &ChannelMatrix) -> Self {
        let n = g_s.n_antennas;
        let mut h = vec![Complex64::new(0.0, 0.0); n * n];
        let mut amp = vec![0.0; n];
        for t in 0..n {
            // Inline phase alignment: g[r][l] * conj(g[r][t]) / |g[r][t]|.
            let target = g_s.column(t);
            for l in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (g, gt) in g_s.column(l).iter().zip(target) {
                    let mag = gt.norm();
                    if mag == 0.0 {
                        log::warn!("degenerate zero channel entry; substituting unit phase");
                        acc += g;
                    } else {
                        acc += g * gt.conj() / mag;
                    }
                }
                h[t * n + l] = acc;
            }
            amp[t] = target.iter().map(|g| g.norm()).sum();
        }
        Self {
            n_antennas: n,
            h,
            amp,
        }
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    /// `H_l(t)`: gain at antenna `l` when targeting `t`.
    pub fn gain(&self, l: usize, t: usize) -> Complex64 {
        self.h[t * self.n_antennas + l]
    }

    /// Gain vector over all antennas for target `t`.
    pub fn target_column(&self, t: usize) -> &[Complex64] {
        &self.h[t * self.n_antennas..(t + 1) * self.n_antennas]
    }

    /// Coherent amplitude `Σ_r |g[r][t]|` at the target itself.
    pub fn amplitude(&self, t: usize) -> f64 {
        self.amp[t]
    }
}

/// One noisy channel use as seen by the receiver.
#[derive(Debug, Clone)]
pub struct ReceivedVector {
    pub y: Vec<Complex64>,
    pub n0: f64,
    pub es: f64,
}

/// Transmits one frame through the aligned surface:
/// `y_l = √Es · H_l(t) · s_q + w_l` with `w_l` i.i.d. CN(0, N0).
///
/// `n0 = 0` produces the noiseless output.
pub fn transmit<R: Rng>(
    g_s: &ChannelMatrix,
    frame: &FrameSymbol,
    constellation: &Constellation,
    es: f64,
    n0: f64,
    rng: &mut R,
) -> ReceivedVector {
    let gains = EffectiveGains::compute(g_s);
    let mut y = vec![Complex64::new(0.0, 0.0); g_s.n_antennas];
    transmit_with_gains(&gains, frame, constellation, es, n0, rng, &mut y);
    ReceivedVector { y, n0, es }
}

/// [`transmit`] against precomputed gains, writing into `y`.
pub fn transmit_with_gains<R: Rng>(
    gains: &EffectiveGains,
    frame: &FrameSymbol,
    constellation: &Constellation,
    es: f64,
    n0: f64,
    rng: &mut R,
    y: &mut [Complex64],
) {
    debug_assert_eq!(y.len(), gains.n_antennas);
    let scaled = constellation.point(frame.symbol) * es.sqrt();
    let column = gains.target_column(frame.antenna);
    if n0 == 0.0 {
        for (out, h) in y.iter_mut().zip(column) {
            *out = scaled * h;
        }
    } else {
        let noise_scale = (n0 / 2.0).sqrt();
        for (out, h) in y.iter_mut().zip(column) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *out = scaled * h + Complex64::new(re, im) * noise_scale;
        }
    }
}

/// Post-alignment SNR at the target antenna: `Es · (Σ_r |g[r][t]|)² / N0`.
pub fn target_snr(g_s: &ChannelMatrix, t: usize, es: f64, n0: f64) -> Result<f64, ChannelError> {
    if n0 <= 0.0 {
        return Err(ChannelError::ZeroNoise);
    }
    let amp: f64 = g_s.column(t).iter().map(|g| g.norm()).sum();
    Ok(es * amp * amp / n0)
}

/// `N0` for a target `SNR(dB) = 10·log10(Es/N0)`.
pub fn noise_level(es: f64, snr_db: f64) -> f64 {
    es / 10f64.powf(snr_db / 10.0)
}
