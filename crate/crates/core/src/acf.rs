//! Power spectra of subblocks and the magnitude of their autocorrelation.
//!
//! With unit-power subcarriers the power spectrum of subblock `v` is the
//! 0/1 indicator of the subcarriers it owns, and the ACF of the subblock
//! signal is the IDFT of that indicator. For interleaved and adjacent
//! partitions the magnitude has a closed form:
//!
//! ```text
//! interleaved:  |R(m)| = sqrt(N)/V  if m = 0 mod N/V, else 0
//! adjacent:     |R(0)| = sqrt(N)/V
//!               |R(m)| = |sin(m pi / V)| / (sqrt(N) |sin(m pi / N)|),  m != 0
//! ```
//!
//! Random partitions have no closed form; their sidelobe level is measured.

use std::f64::consts::PI;

use crate::partition::{PartitionKind, PartitionPattern};
use crate::spectral::{check_power_of_two, idft, ComplexSequence};
use crate::{Error, Result};

/// Binary per-subcarrier power of one subblock.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    values: Vec<f64>,
}

impl PowerSpectrum {
    /// Builds a spectrum from explicit 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_power_of_two(bits.len(), "spectrum length")?;
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::config(format!("spectrum value {b} is not 0 or 1")));
        }
        Ok(Self {
            values: bits.iter().map(|&b| f64::from(b)).collect(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.values.iter().filter(|&&p| p == 1.0).count()
    }
}

/// `|R(m)|` for lags `m = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfMagnitude {
    values: Vec<f64>,
}

impl AcfMagnitude {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at a possibly negative lag, via `R(-m) = R(N - m)`.
    pub fn at(&self, lag: i64) -> f64 {
        let n = self.values.len() as i64;
        self.values[lag.rem_euclid(n) as usize]
    }

    /// Largest magnitude over the non-zero lags.
    pub fn max_sidelobe(&self) -> f64 {
        self.values[1..].iter().copied().fold(0.0, f64::max)
    }
}

/// Indicator spectrum of subblock `v` (1-based).
pub fn power_spectrum(pattern: &PartitionPattern, v: usize) -> Result<PowerSpectrum> {
    if v == 0 || v > pattern.v_count() {
        return Err(Error::config(format!(
            "subblock {v} outside 1..={}",
            pattern.v_count()
        )));
    }
    Ok(PowerSpectrum {
        values: pattern
            .assignment()
            .iter()
            .map(|&owner| if owner == v { 1.0 } else { 0.0 })
            .collect(),
    })
}

/// `|idft(S)(m)|` with the unitary IDFT.
pub fn acf_numeric(spectrum: &PowerSpectrum) -> Result<AcfMagnitude> {
    let seq = ComplexSequence::from_real(&spectrum.values)?;
    let r = idft(&seq)?;
    Ok(AcfMagnitude {
        values: r.iter().map(|z| z.norm()).collect(),
    })
}

fn check_closed_form_args(n: usize, v_count: usize) -> Result<()> {
    check_power_of_two(n, "subcarrier count")?;
    check_power_of_two(v_count, "subblock count")?;
    if v_count > n {
        return Err(Error::config(format!(
            "subblock count {v_count} exceeds subcarrier count {n}"
        )));
    }
    Ok(())
}

/// Closed-form `|R(m)|` for the interleaved partition.
pub fn acf_interleaved_closed(n: usize, v_count: usize, m: usize) -> Result<f64> {
    check_closed_form_args(n, v_count)?;
    let period = n / v_count;
    Ok(if m.is_multiple_of(period) {
        (n as f64).sqrt() / v_count as f64
    } else {
        0.0
    })
}

/// Closed-form `|R(m)|` for the adjacent partition.
pub fn acf_adjacent_closed(n: usize, v_count: usize, m: usize) -> Result<f64> {
    check_closed_form_args(n, v_count)?;
    let nf = n as f64;
    if m.is_multiple_of(n) {
        return Ok(nf.sqrt() / v_count as f64);
    }
    let m = (m % n) as f64;
    let denom = (m * PI / nf).sin();
    if denom.abs() < 1e-12 {
        // Unreachable for m in 1..N; fall back to the direct sum.
        return Ok(adjacent_direct(n, v_count, m as usize));
    }
    Ok(((m * PI / v_count as f64).sin() / (nf.sqrt() * denom)).abs())
}

/// `|(1/sqrt N) sum_{k < N/V} exp(j 2 pi k m / N)|` evaluated term by term.
fn adjacent_direct(n: usize, v_count: usize, m: usize) -> f64 {
    let width = n / v_count;
    let sum: num_complex::Complex64 = (0..width)
        .map(|k| num_complex::Complex64::from_polar(1.0, 2.0 * PI * ((k * m) % n) as f64 / n as f64))
        .sum();
    sum.norm() / (n as f64).sqrt()
}

/// Closed form for the pattern's kind, if one exists.
pub fn acf_closed(pattern: &PartitionPattern) -> Result<Option<AcfMagnitude>> {
    let (n, v) = (pattern.n(), pattern.v_count());
    let f: fn(usize, usize, usize) -> Result<f64> = match pattern.kind() {
        PartitionKind::Interleaved => acf_interleaved_closed,
        PartitionKind::Adjacent => acf_adjacent_closed,
        PartitionKind::Random => return Ok(None),
    };
    let values = (0..n).map(|m| f(n, v, m)).collect::<Result<Vec<_>>>()?;
    Ok(Some(AcfMagnitude { values }))
}

/// One row of the numeric vs closed-form comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfRow {
    pub lag: usize,
    pub numeric: f64,
    pub closed_form: Option<f64>,
}

impl AcfRow {
    pub fn deviation(&self) -> Option<f64> {
        self.closed_form.map(|c| (self.numeric - c).abs())
    }
}

/// Lag-by-lag table for subblock `v` of `pattern`.
pub fn acf_table(pattern: &PartitionPattern, v: usize) -> Result<Vec<AcfRow>> {
    let numeric = acf_numeric(&power_spectrum(pattern, v)?)?;
    let closed = acf_closed(pattern)?;
    Ok(numeric
        .values()
        .iter()
        .enumerate()
        .map(|(lag, &value)| AcfRow {
            lag,
            numeric: value,
            closed_form: closed.as_ref().map(|c| c.values()[lag]),
        })
        .collect())
}

/// For interleaved and adjacent patterns: the largest absolute deviation
/// between the numeric ACF and the closed form. For random patterns: the
/// largest sidelobe `max_{m != 0} |R(m)|`.
pub fn acf_compare(pattern: &PartitionPattern, v: usize) -> Result<f64> {
    let numeric = acf_numeric(&power_spectrum(pattern, v)?)?;
    match acf_closed(pattern)? {
        Some(closed) => Ok(numeric
            .values()
            .iter()
            .zip(closed.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)),
        None => Ok(numeric.max_sidelobe()),
    }
}
