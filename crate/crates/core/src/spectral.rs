//! Unitary discrete Fourier transforms, cyclic shifts and PAPR measurement.
//!
//! Both transform directions carry a `1/sqrt(N)` factor so that energy is
//! preserved exactly up to rounding:
//!
//! ```text
//! x(n) = 1/sqrt(N) * sum_k X(k) exp(+j 2 pi k n / N)      (idft)
//! X(k) = 1/sqrt(N) * sum_n x(n) exp(-j 2 pi k n / N)      (dft)
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, IndexMut};

use num_complex::Complex64;

use crate::{Error, Result};

/// An ordered, non-empty sequence of complex samples.
///
/// Used for frequency-domain symbol sequences as well as time-domain
/// OFDM signal sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence(Vec<Complex64>);

impl ComplexSequence {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::config("sequence length must be at least 1"));
        }
        Ok(Self(samples))
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "sequence length must be at least 1");
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    /// Builds a sequence from real samples.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Sum of squared magnitudes.
    pub fn energy(&self) -> f64 {
        self.0.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Largest instantaneous power `max_n |x(n)|^2`.
    pub fn peak_power(&self) -> f64 {
        self.0.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max)
    }

    /// Adds `other` into `self` elementwise.
    pub fn accumulate(&mut self, other: &ComplexSequence) {
        assert_eq!(self.len(), other.len(), "length mismatch");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += *b;
        }
    }
}

impl Index<usize> for ComplexSequence {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ComplexSequence {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add<&ComplexSequence> for &ComplexSequence {
    type Output = ComplexSequence;

    fn add(self, rhs: &ComplexSequence) -> ComplexSequence {
        let mut out = self.clone();
        out.accumulate(rhs);
        out
    }
}

impl<'a> IntoIterator for &'a ComplexSequence {
    type Item = &'a Complex64;
    type IntoIter = std::slice::Iter<'a, Complex64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// A peak-to-average power ratio in decibels.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PaprDb(pub f64);

impl PaprDb {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for PaprDb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} dB", self.0)
    }
}

pub(crate) fn check_power_of_two(len: usize, what: &str) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::config(format!(
            "{what} must be a power of two, got {len}"
        )));
    }
    Ok(())
}

/// In-place radix-2 decimation-in-time FFT with kernel `exp(sign * j 2 pi k n / N)`.
/// No scaling is applied.
fn fft_in_place(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    // Twiddles are evaluated directly rather than by recurrence so the error
    // stays at a few ulps for N up to several thousand.
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

fn unitary_transform(input: &ComplexSequence, sign: f64) -> Result<ComplexSequence> {
    check_power_of_two(input.len(), "transform length")?;
    let mut buf = input.0.clone();
    fft_in_place(&mut buf, sign);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    for s in &mut buf {
        *s *= scale;
    }
    Ok(ComplexSequence(buf))
}

/// Unitary inverse DFT, frequency domain to time domain.
pub fn idft(symbols: &ComplexSequence) -> Result<ComplexSequence> {
    unitary_transform(symbols, 1.0)
}

/// Unitary forward DFT, time domain to frequency domain.
pub fn dft(signal: &ComplexSequence) -> Result<ComplexSequence> {
    unitary_transform(signal, -1.0)
}

/// Inverse DFT after zero-padding the spectrum to `factor * N` bins.
///
/// The upper half of the spectrum (negative frequencies) is moved to the top
/// of the padded grid. `factor == 1` is exactly [`idft`]. A cyclic shift by
/// `tau` at the Nyquist rate corresponds to a shift by `factor * tau` here.
pub fn idft_oversampled(symbols: &ComplexSequence, factor: usize) -> Result<ComplexSequence> {
    if factor == 0 {
        return Err(Error::config("oversampling factor must be at least 1"));
    }
    if factor == 1 {
        return idft(symbols);
    }
    let n = symbols.len();
    check_power_of_two(n, "transform length")?;
    check_power_of_two(factor, "oversampling factor")?;
    let mut padded = ComplexSequence::zeros(n * factor);
    let half = n / 2;
    for k in 0..half {
        padded[k] = symbols[k];
    }
    let offset = n * factor - n;
    for k in half..n {
        padded[k + offset] = symbols[k];
    }
    idft(&padded)
}

/// Leftward cyclic shift: `y(n) = x((n + tau) mod N)`.
pub fn cyclic_shift_left(signal: &ComplexSequence, tau: usize) -> ComplexSequence {
    let mut out = signal.0.clone();
    out.rotate_left(tau % signal.len());
    ComplexSequence(out)
}

/// Empirical mean power `(1/N) sum |x(n)|^2`.
pub fn mean_power(signal: &ComplexSequence) -> f64 {
    signal.energy() / signal.len() as f64
}

/// `10 log10(max |x(n)|^2 / reference_power)`.
pub fn papr_db(signal: &ComplexSequence, reference_power: f64) -> Result<PaprDb> {
    if !(reference_power > 0.0) || !reference_power.is_finite() {
        return Err(Error::Domain(format!(
            "reference power must be positive and finite, got {reference_power}"
        )));
    }
    Ok(PaprDb(10.0 * (signal.peak_power() / reference_power).log10()))
}
