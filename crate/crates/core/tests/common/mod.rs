//! Reference computations used by the integration tests. Everything here is
//! written from the definitions and shares no code path with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// O(N^2) unitary DFT with kernel `exp(sign * j 2 pi k n / N)`.
pub fn naive_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                let angle = sign * 2.0 * PI * ((i * k) % n) as f64 / n as f64;
                acc += v * Complex64::new(angle.cos(), angle.sin());
            }
            acc * scale
        })
        .collect()
}

/// Time signal of one candidate built straight from the symbols: each
/// subcarrier of subblock `v` is rotated by `exp(j 2 pi k tau_v / N)` and the
/// full sequence is transformed with the naive IDFT.
pub fn candidate_from_symbols(
    symbols: &[Complex64],
    assignment: &[usize],
    shifts: &[usize],
) -> Vec<Complex64> {
    let n = symbols.len();
    let rotated: Vec<Complex64> = symbols
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let tau = shifts[assignment[k] - 1];
            let angle = 2.0 * PI * ((k * tau) % n) as f64 / n as f64;
            s * Complex64::new(angle.cos(), angle.sin())
        })
        .collect();
    naive_dft(&rotated, 1.0)
}

pub fn papr_db_ref(x: &[Complex64], reference: f64) -> f64 {
    let mut peak = 0.0f64;
    for s in x {
        let p = s.re * s.re + s.im * s.im;
        if p > peak {
            peak = p;
        }
    }
    10.0 * (peak / reference).log10()
}

pub fn energy_ref(x: &[Complex64]) -> f64 {
    x.iter().map(|s| s.re * s.re + s.im * s.im).sum()
}

/// Criterion check from the definition: for each pair of sets and each pair
/// of subblocks, the signed difference `(a_v - b_v) - (a_w - b_w)` must not
/// be a multiple of `modulus`.
pub fn distinct_by_definition(sets: &[Vec<usize>], modulus: i64) -> bool {
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            if i == j {
                continue;
            }
            for v in 0..sets[i].len() {
                for w in 0..sets[i].len() {
                    if v == w {
                        continue;
                    }
                    let dv = sets[i][v] as i64 - sets[j][v] as i64;
                    let dw = sets[i][w] as i64 - sets[j][w] as i64;
                    if (dv - dw).rem_euclid(modulus) == 0 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// `(min, mean)` circular gap over every ordered set pair and every ordered
/// subblock pair. Ordered enumeration visits each unordered term twice with
/// the same circular distance, so min and mean match the unordered version.
pub fn criterion3_by_enumeration(sets: &[Vec<usize>], n: i64) -> (i64, f64) {
    let mut gaps = Vec::new();
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            if i == j {
                continue;
            }
            for v in 0..sets[i].len() {
                for w in 0..sets[i].len() {
                    if v == w {
                        continue;
                    }
                    let rv = sets[i][v] as i64 - sets[j][v] as i64;
                    let rw = sets[i][w] as i64 - sets[j][w] as i64;
                    let delta = (rv - rw).rem_euclid(n);
                    gaps.push(delta.min(n - delta));
                }
            }
        }
    }
    let min = *gaps.iter().min().unwrap();
    let mean = gaps.iter().sum::<i64>() as f64 / gaps.len() as f64;
    (min, mean)
}

/// CCDF level at which i.i.d. Rayleigh samples with unit mean power cross
/// `probability`: solves `1 - (1 - exp(-g))^N = probability` for `g` in dB.
pub fn gaussian_ccdf_threshold_db(n: usize, probability: f64) -> f64 {
    let g = -(1.0 - (1.0 - probability).powf(1.0 / n as f64)).ln();
    10.0 * g.log10()
}

/// Small xorshift generator so oracle inputs do not depend on the library RNG.
pub struct XorShift(u64);

impl XorShift {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    pub fn complex_vec(&mut self, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(self.uniform() - 0.5, self.uniform() - 0.5))
            .collect()
    }
}
