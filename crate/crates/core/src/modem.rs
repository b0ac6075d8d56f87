//! 16-QAM mapping and seeded random symbol generation.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::ComplexSequence;
use crate::{Error, Result};

/// Gray-coded amplitude levels per axis, indexed by the two-bit label.
/// `00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3`.
const GRAY_LEVELS: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

/// A 64-bit seed for the experiment's random streams.
///
/// All randomness comes from ChaCha8 keyed by the seed; independent streams
/// (trials, partitions, rotation tables) are selected with the ChaCha stream
/// id, so `(seed, stream)` identifies a generator uniquely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        self.stream_rng(0)
    }

    pub fn stream_rng(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Seed {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.trim().parse().map(Seed)
    }
}

/// A point of the unit-average-power 16-QAM constellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationPoint(Complex64);

impl ConstellationPoint {
    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// Maps the low four bits of `bits` to a 16-QAM point.
///
/// Bits 3..2 select the in-phase level, bits 1..0 the quadrature level.
pub fn map_16qam(bits: u8) -> ConstellationPoint {
    let scale = 1.0 / 10f64.sqrt();
    let i = GRAY_LEVELS[usize::from((bits >> 2) & 0b11)];
    let q = GRAY_LEVELS[usize::from(bits & 0b11)];
    ConstellationPoint(Complex64::new(i * scale, q * scale))
}

/// All 16 points, indexed by their 4-bit label.
pub fn constellation_16qam() -> [ConstellationPoint; 16] {
    std::array::from_fn(|b| map_16qam(b as u8))
}

/// Draws `n` i.i.d. uniform 16-QAM symbols from `rng`.
pub fn random_symbols<R: RngCore>(rng: &mut R, n: usize) -> Result<ComplexSequence> {
    if n == 0 {
        return Err(Error::config("symbol count must be at least 1"));
    }
    // Top four bits of each 32-bit word: independent of the rand crate's
    // range-sampling algorithm, so the stream is fixed by ChaCha8 alone.
    let symbols = (0..n)
        .map(|_| map_16qam((rng.next_u32() >> 28) as u8).value())
        .collect();
    ComplexSequence::new(symbols)
}

/// `n` uniform 16-QAM symbols from the default stream of `seed`.
pub fn random_symbol_sequence(seed: Seed, n: usize) -> Result<ComplexSequence> {
    random_symbols(&mut seed.rng(), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(i: f64, q: f64) -> Complex64 {
        Complex64::new(i, q) / 10f64.sqrt()
    }

    #[test]
    fn mapping_table_examples() {
        assert_eq!(map_16qam(0b0000).value(), point(-3.0, -3.0));
        assert_eq!(map_16qam(0b1110).value(), point(1.0, 3.0));
        assert_eq!(map_16qam(0b0101).value(), point(-1.0, -1.0));
        assert_eq!(map_16qam(0b1011).value(), point(3.0, 1.0));
    }

    #[test]
    fn constellation_has_unit_average_power() {
        let mean: f64 = constellation_16qam()
            .iter()
            .map(|p| p.value().norm_sqr())
            .sum::<f64>()
            / 16.0;
        assert!((mean - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constellation_points_are_distinct() {
        let pts = constellation_16qam();
        for a in 0..16 {
            for b in a + 1..16 {
                assert_ne!(pts[a], pts[b]);
            }
        }
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        // Adjacent levels on one axis carry labels one bit apart.
        let order = [0b00u8, 0b01, 0b11, 0b10];
        for w in order.windows(2) {
            assert_eq!((w[0] ^ w[1]).count_ones(), 1);
            let a = GRAY_LEVELS[usize::from(w[0])];
            let b = GRAY_LEVELS[usize::from(w[1])];
            assert_eq!(b - a, 2.0);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = random_symbol_sequence(Seed(42), 256).unwrap();
        let b = random_symbol_sequence(Seed(42), 256).unwrap();
        assert_eq!(a, b);
        let c = random_symbol_sequence(Seed(43), 256).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn streams_are_distinct() {
        let a = random_symbols(&mut Seed(1).stream_rng(0), 64).unwrap();
        let b = random_symbols(&mut Seed(1).stream_rng(1), 64).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn zero_length_is_rejected() {
        assert!(random_symbol_sequence(Seed(0), 0).is_err());
    }

    #[test]
    fn empirical_mean_power_is_one() {
        let x = random_symbol_sequence(Seed(7), 100_000).unwrap();
        let mean = x.energy() / x.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean power {mean}");
    }

    #[test]
    fn every_symbol_is_a_table_point_and_frequencies_are_uniform() {
        let table = constellation_16qam();
        let draws = 160_000;
        let x = random_symbol_sequence(Seed(11), draws).unwrap();
        let mut counts = [0usize; 16];
        for s in &x {
            let idx = table
                .iter()
                .position(|p| p.value() == *s)
                .expect("symbol not in constellation");
            counts[idx] += 1;
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 16.0).abs() < 0.005, "frequency {freq}");
        }
    }
}
