//! Constellations and the bit ↔ (antenna, symbol) frame mapping.
//!
//! A frame carries `η = log2(n_s) + log2(M)` bits: the leading `log2(n_s)`
//! bits pick the target receive antenna, the trailing `log2(M)` bits pick the
//! constellation symbol. Constellations are normalized to unit average symbol
//! energy so the per-symbol energy `Es` can be scaled independently, and are
//! Gray-labelled so one symbol-neighbour error costs one bit.

use num_complex::Complex64;
use thiserror::Error;

/// Supported constellation orders for both QAM and PSK.
pub const SUPPORTED_ORDERS: [usize; 6] = [2, 4, 8, 16, 32, 64];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModemError {
    #[error("unsupported constellation order {0}: expected a power of two in 2..=64")]
    UnsupportedOrder(usize),
    #[error("antenna count {0} must be a nonzero power of two")]
    UnsupportedAntennaCount(usize),
    #[error("bit string has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("index out of range: antenna {antenna} (n_s = {n_s}), symbol {symbol} (M = {m})")]
    IndexOutOfRange {
        antenna: usize,
        n_s: usize,
        symbol: usize,
        m: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationKind {
    Qam,
    Psk,
}

/// An `M`-ary symbol set with unit average energy.
///
/// `points[i]` is the symbol whose bit label is the `log2(M)`-bit binary
/// representation of `i` (most significant bit first). The construction
/// places labels so that neighbouring symbols (grid neighbours for QAM, ring
/// neighbours for PSK) differ in exactly one label bit.
#[derive(Debug, Clone)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
}

impl Constellation {
    /// Builds a normalized, Gray-labelled constellation of order `m`.
    ///
    /// QAM uses a rectangular grid (square when `log2(M)` is even, otherwise
    /// twice as wide as tall, e.g. 2×4 for M = 8). PSK spaces points evenly
    /// on the unit circle starting at angle 0.
    pub fn new(kind: ConstellationKind, m: usize) -> Result<Self, ModemError> {
        if !SUPPORTED_ORDERS.contains(&m) {
            return Err(ModemError::UnsupportedOrder(m));
        }
        let k = log2_exact(m).expect("supported orders are powers of two");
        let points = match kind {
            ConstellationKind::Qam => qam_points(k),
            ConstellationKind::Psk => psk_points(m),
        };
        Ok(Self { kind, points })
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    /// Constellation order `M`.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// `log2(M)` bits carried by one symbol.
    pub fn bits_per_symbol(&self) -> u32 {
        self.points.len().trailing_zeros()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Symbol for zero-based index `q`.
    pub fn point(&self, q: usize) -> Complex64 {
        self.points[q]
    }

    /// Bit label of symbol `q`, most significant bit first.
    pub fn label_bits(&self, q: usize) -> Vec<u8> {
        value_to_bits(q as u32, self.bits_per_symbol() as usize)
    }

    /// Minimum squared distance between any two distinct symbols.
    pub fn min_distance_sq(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (a, sa) in self.points.iter().enumerate() {
            for sb in &self.points[a + 1..] {
                best = best.min((sa - sb).norm_sqr());
            }
        }
        best
    }
}

/// Rectangular Gray-coded QAM: the high `⌈k/2⌉` label bits select the real
/// level (ascending), the low `⌊k/2⌋` bits the imaginary level (descending,
/// so label 0 sits in the upper-left corner).
fn qam_points(k: u32) -> Vec<Complex64> {
    let re_bits = k.div_ceil(2);
    let im_bits = k / 2;
    let re_levels = 1usize << re_bits;
    let im_levels = 1usize << im_bits;
    // Mean square of the ±1, ±3, … level set is (L² − 1)/3 per axis.
    let axis_energy = |l: usize| ((l * l - 1) as f64) / 3.0;
    let scale = 1.0 / (axis_energy(re_levels) + axis_energy(im_levels)).sqrt();
    let amp = |p: usize, l: usize| (2 * p as i64 - (l as i64 - 1)) as f64;

    let mut pts = vec![Complex64::new(0.0, 0.0); 1 << k];
    for p_re in 0..re_levels {
        for p_im in 0..im_levels {
            let label = (gray(p_re) << im_bits) | gray(p_im);
            pts[label] =
                Complex64::new(scale * amp(p_re, re_levels), -scale * amp(p_im, im_levels));
        }
    }
    pts
}

fn psk_points(m: usize) -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0); m];
    for p in 0..m {
        let theta = std::f64::consts::TAU * p as f64 / m as f64;
        pts[gray(p)] = Complex64::new(theta.cos(), theta.sin());
    }
    pts
}

fn gray(p: usize) -> usize {
    p ^ (p >> 1)
}

/// One transmission frame: target antenna `t`, symbol `q`, and the source
/// bits they came from. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSymbol {
    pub antenna: usize,
    pub symbol: usize,
    /// Packed source bits: antenna bits in the high part, symbol bits low.
    pub bits: u32,
    pub antenna_bits: u32,
    pub symbol_bits: u32,
}

impl FrameSymbol {
    /// Builds a frame from the packed η-bit value (antenna bits high).
    pub fn from_value(value: u32, n_s: usize, m: usize) -> Result<Self, ModemError> {
        let antenna_bits = log2_exact(n_s).ok_or(ModemError::UnsupportedAntennaCount(n_s))?;
        let symbol_bits = log2_exact(m).ok_or(ModemError::UnsupportedOrder(m))?;
        let eta = antenna_bits + symbol_bits;
        debug_assert!(value < (1 << eta));
        Ok(Self {
            antenna: (value >> symbol_bits) as usize,
            symbol: (value & ((1 << symbol_bits) - 1)) as usize,
            bits: value,
            antenna_bits,
            symbol_bits,
        })
    }

    /// Number of source bits `η` in the frame.
    pub fn bit_count(&self) -> u32 {
        self.antenna_bits + self.symbol_bits
    }

    /// Source bits as a vector, most significant first.
    pub fn bit_vec(&self) -> Vec<u8> {
        value_to_bits(self.bits, self.bit_count() as usize)
    }
}

/// Maps an η-bit string onto (antenna, symbol).
///
/// The first `log2(n_s)` bits give the zero-based antenna index, the
/// remaining `log2(M)` bits the symbol index.
pub fn map_bits(bits: &[u8], n_s: usize, m: usize) -> Result<FrameSymbol, ModemError> {
    let antenna_bits = log2_exact(n_s).ok_or(ModemError::UnsupportedAntennaCount(n_s))?;
    let symbol_bits = log2_exact(m).ok_or(ModemError::UnsupportedOrder(m))?;
    let eta = (antenna_bits + symbol_bits) as usize;
    if bits.len() != eta {
        return Err(ModemError::LengthMismatch {
            expected: eta,
            got: bits.len(),
        });
    }
    let value = bits_to_value(bits);
    FrameSymbol::from_value(value, n_s, m)
}

/// Inverse of [`map_bits`]: recovers the η-bit string from detected indices.
pub fn demap(antenna: usize, symbol: usize, n_s: usize, m: usize) -> Result<Vec<u8>, ModemError> {
    let antenna_bits = log2_exact(n_s).ok_or(ModemError::UnsupportedAntennaCount(n_s))?;
    let symbol_bits = log2_exact(m).ok_or(ModemError::UnsupportedOrder(m))?;
    if antenna >= n_s || symbol >= m {
        return Err(ModemError::IndexOutOfRange {
            antenna,
            n_s,
            symbol,
            m,
        });
    }
    let value = ((antenna as u32) << symbol_bits) | symbol as u32;
    Ok(value_to_bits(value, (antenna_bits + symbol_bits) as usize))
}

/// Hamming distance between the sent frame's bits and the bits a detected
/// (antenna, symbol) pair demaps to.
pub fn count_bit_errors(sent: &FrameSymbol, antenna: usize, symbol: usize) -> u32 {
    debug_assert!(antenna < (1 << sent.antenna_bits) && symbol < (1 << sent.symbol_bits));
    let detected = ((antenna as u32) << sent.symbol_bits) | symbol as u32;
    (sent.bits ^ detected).count_ones()
}

/// `log2(x)` when `x` is a nonzero power of two.
pub fn log2_exact(x: usize) -> Option<u32> {
    (x != 0 && x.is_power_of_two()).then(|| x.trailing_zeros())
}

fn bits_to_value(bits: &[u8]) -> u32 {
    bits.iter().fold(0u32, |acc, &b| {
        debug_assert!(b <= 1);
        (acc << 1) | b as u32
    })
}

fn value_to_bits(value: u32, len: usize) -> Vec<u8> {
    (0..len).rev().map(|i| ((value >> i) & 1) as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const EPS: f64 = 1e-12;

    #[test]
    fn qam4_matches_reference_symbols() {
        // Unnormalized reference order: -1+j, -1-j, 1+j, 1-j, scaled by 1/√2.
        let c = Constellation::new(ConstellationKind::Qam, 4).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [(-s, s), (-s, -s), (s, s), (s, -s)];
        for (q, &(re, im)) in expect.iter().enumerate() {
            assert_abs_diff_eq!(c.point(q).re, re, epsilon = EPS);
            assert_abs_diff_eq!(c.point(q).im, im, epsilon = EPS);
        }
    }

    #[test]
    fn bpsk_is_plus_minus_one() {
        let c = Constellation::new(ConstellationKind::Psk, 2).unwrap();
        assert_abs_diff_eq!(c.point(0).re, 1.0, epsilon = EPS);
        assert_abs_diff_eq!(c.point(1).re, -1.0, epsilon = EPS);
        assert_abs_diff_eq!(c.point(0).im, 0.0, epsilon = EPS);
        assert_abs_diff_eq!(c.point(1).im, 0.0, epsilon = EPS);
    }

    #[test]
    fn unit_average_energy_for_all_supported_orders() {
        for kind in [ConstellationKind::Qam, ConstellationKind::Psk] {
            for m in SUPPORTED_ORDERS {
                let c = Constellation::new(kind, m).unwrap();
                let energy: f64 = c.points().iter().map(|s| s.norm_sqr()).sum::<f64>() / m as f64;
                assert_abs_diff_eq!(energy, 1.0, epsilon = EPS);
            }
        }
    }

    #[test]
    fn all_points_distinct() {
        for kind in [ConstellationKind::Qam, ConstellationKind::Psk] {
            for m in SUPPORTED_ORDERS {
                let c = Constellation::new(kind, m).unwrap();
                for a in 0..m {
                    for b in a + 1..m {
                        assert!((c.point(a) - c.point(b)).norm() > 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn unsupported_order_rejected() {
        assert!(matches!(
            Constellation::new(ConstellationKind::Qam, 3),
            Err(ModemError::UnsupportedOrder(3))
        ));
        assert!(matches!(
            Constellation::new(ConstellationKind::Psk, 128),
            Err(ModemError::UnsupportedOrder(128))
        ));
    }

    /// Grid-adjacent QAM points (one spacing apart along one axis) must
    /// differ in exactly one label bit; PSK ring neighbours likewise.
    #[test]
    fn gray_labelling_holds_across_neighbours() {
        for m in SUPPORTED_ORDERS {
            let c = Constellation::new(ConstellationKind::Qam, m).unwrap();
            // Spacing along an axis is twice the normalization scale.
            let spacing = c
                .points()
                .iter()
                .enumerate()
                .flat_map(|(a, sa)| c.points()[a + 1..].iter().map(move |sb| (sa - sb).norm()))
                .fold(f64::INFINITY, f64::min);
            let mut neighbour_pairs = 0;
            for a in 0..m {
                for b in a + 1..m {
                    let d = c.point(a) - c.point(b);
                    let axis_adjacent = (d.re.abs() < EPS && (d.im.abs() - spacing).abs() < EPS)
                        || (d.im.abs() < EPS && (d.re.abs() - spacing).abs() < EPS);
                    if axis_adjacent {
                        neighbour_pairs += 1;
                        assert_eq!(
                            (a ^ b).count_ones(),
                            1,
                            "QAM{m}: adjacent symbols {a} and {b} differ in more than one bit"
                        );
                    }
                }
            }
            assert!(neighbour_pairs > 0);

            if m > 2 {
                let c = Constellation::new(ConstellationKind::Psk, m).unwrap();
                let step = std::f64::consts::TAU / m as f64;
                for a in 0..m {
                    for b in a + 1..m {
                        let mut delta = (c.point(a) / c.point(b)).arg().abs();
                        delta = delta.min(std::f64::consts::TAU - delta);
                        if (delta - step).abs() < 1e-9 {
                            assert_eq!((a ^ b).count_ones(), 1, "PSK{m}: {a} vs {b}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn frame_0110_maps_to_second_antenna_third_symbol() {
        let f = map_bits(&[0, 1, 1, 0], 4, 4).unwrap();
        assert_eq!((f.antenna, f.symbol), (1, 2));
        // Symbol index 2 is 1+j before normalization.
        let c = Constellation::new(ConstellationKind::Qam, 4).unwrap();
        let unnormalized = c.point(f.symbol) * std::f64::consts::SQRT_2;
        assert_abs_diff_eq!(unnormalized.re, 1.0, epsilon = EPS);
        assert_abs_diff_eq!(unnormalized.im, 1.0, epsilon = EPS);
    }

    #[test]
    fn corner_frames_map_to_corner_indices() {
        let f = map_bits(&[0, 0, 0, 0], 4, 4).unwrap();
        assert_eq!((f.antenna, f.symbol), (0, 0));
        let f = map_bits(&[1, 1, 1, 1], 4, 4).unwrap();
        assert_eq!((f.antenna, f.symbol), (3, 3));
    }

    #[test]
    fn demap_frame_1001() {
        // Third antenna, second symbol.
        assert_eq!(demap(2, 1, 4, 4).unwrap(), vec![1, 0, 0, 1]);
    }

    #[test]
    fn demap_smallest_system() {
        assert_eq!(demap(0, 0, 2, 2).unwrap(), vec![0, 0]);
    }

    #[test]
    fn map_and_demap_are_inverse_over_all_frames() {
        for n_s in [1usize, 2, 4, 8] {
            for m in SUPPORTED_ORDERS {
                let eta = (log2_exact(n_s).unwrap() + log2_exact(m).unwrap()) as usize;
                for value in 0..(1u32 << eta) {
                    let bits = value_to_bits(value, eta);
                    let f = map_bits(&bits, n_s, m).unwrap();
                    assert_eq!(demap(f.antenna, f.symbol, n_s, m).unwrap(), bits);
                    assert_eq!(FrameSymbol::from_value(value, n_s, m).unwrap(), f);
                }
            }
        }
    }

    #[test]
    fn map_rejects_wrong_length() {
        assert_eq!(
            map_bits(&[0, 1, 1], 4, 4),
            Err(ModemError::LengthMismatch {
                expected: 4,
                got: 3
            })
        );
    }

    #[test]
    fn demap_rejects_out_of_range() {
        assert!(matches!(
            demap(4, 0, 4, 4),
            Err(ModemError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            demap(0, 4, 4, 4),
            Err(ModemError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn bit_error_counts_match_hand_hamming() {
        let sent = map_bits(&[0, 0, 0, 0], 4, 4).unwrap();
        assert_eq!(count_bit_errors(&sent, 0, 0), 0);
        // Detected second antenna, same symbol: bits 0100, one error.
        assert_eq!(count_bit_errors(&sent, 1, 0), 1);
        // Detected fourth antenna, fourth symbol: bits 1111, four errors.
        assert_eq!(count_bit_errors(&sent, 3, 3), 4);
    }
}
