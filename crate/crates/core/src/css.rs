//! Candidate generation for cyclic shifted sequences (CSS) and the
//! partial transmit sequences (PTS) baseline, plus minimum-PAPR selection.
//!
//! Subblock IFFTs are computed once per symbol sequence ([`SubblockSignals`])
//! and every candidate is then only a shift-and-add (CSS) or a
//! rotate-and-add (PTS) of those subblock signals.

use std::fmt;

use num_complex::Complex64;
use rand::RngCore;

use crate::partition::{split, PartitionPattern};
use crate::spectral::{
    check_power_of_two, idft_oversampled, mean_power, papr_db, ComplexSequence, PaprDb,
};
use crate::{Error, Result};

/// One cyclic shift per subblock.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SvSet {
    shifts: Vec<usize>,
}

impl SvSet {
    pub fn new(shifts: Vec<usize>) -> Self {
        Self { shifts }
    }

    pub fn zeros(v_count: usize) -> Self {
        Self {
            shifts: vec![0; v_count],
        }
    }

    pub fn shifts(&self) -> &[usize] {
        &self.shifts
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.shifts.iter().all(|&s| s == 0)
    }
}

impl From<Vec<usize>> for SvSet {
    fn from(shifts: Vec<usize>) -> Self {
        Self::new(shifts)
    }
}

impl fmt::Display for SvSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.shifts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// `U` shift-value sets for an `N`-subcarrier, `V`-subblock system.
///
/// By convention the first set is all zeros, so the unmodified signal is
/// always one of the candidates. This is not enforced here because the
/// criteria apply to arbitrary collections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvCollection {
    n: usize,
    v_count: usize,
    sets: Vec<SvSet>,
}

impl SvCollection {
    pub fn new(n: usize, v_count: usize, sets: Vec<SvSet>) -> Result<Self> {
        check_power_of_two(n, "subcarrier count")?;
        check_power_of_two(v_count, "subblock count")?;
        if v_count > n {
            return Err(Error::config(format!(
                "subblock count {v_count} exceeds subcarrier count {n}"
            )));
        }
        if sets.is_empty() {
            return Err(Error::config("a collection needs at least one SV set"));
        }
        for (u, set) in sets.iter().enumerate() {
            if set.len() != v_count {
                return Err(Error::config(format!(
                    "SV set {} has {} shifts, expected {v_count}",
                    u + 1,
                    set.len()
                )));
            }
            if let Some(&s) = set.shifts().iter().find(|&&s| s >= n) {
                return Err(Error::config(format!(
                    "SV set {} has shift {s} outside [0, {n})",
                    u + 1
                )));
            }
        }
        Ok(Self { n, v_count, sets })
    }

    /// Convenience constructor from nested vectors.
    pub fn from_shifts(n: usize, v_count: usize, sets: &[&[usize]]) -> Result<Self> {
        Self::new(n, v_count, sets.iter().map(|s| SvSet::new(s.to_vec())).collect())
    }

    /// The single all-zeros set; selection then returns the original signal.
    pub fn identity(n: usize, v_count: usize) -> Result<Self> {
        Self::new(n, v_count, vec![SvSet::zeros(v_count)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn v_count(&self) -> usize {
        self.v_count
    }

    pub fn u_count(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[SvSet] {
        &self.sets
    }

    /// Set `u`, 1-based.
    pub fn set(&self, u: usize) -> &SvSet {
        &self.sets[u - 1]
    }

    pub fn contains_identity(&self) -> bool {
        self.sets.iter().any(SvSet::is_identity)
    }

    /// Adds `offset` (mod N) to every shift of every set.
    pub fn translated(&self, offset: usize) -> Self {
        let sets = self
            .sets
            .iter()
            .map(|s| SvSet::new(s.shifts().iter().map(|&t| (t + offset) % self.n).collect()))
            .collect();
        Self {
            n: self.n,
            v_count: self.v_count,
            sets,
        }
    }
}

/// The winning candidate of a minimum-PAPR search.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    /// 1-based candidate index `u`.
    pub index: usize,
    pub papr: PaprDb,
    pub signal: Option<ComplexSequence>,
}

/// PTS rotation factor alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rotation {
    PlusOne,
    MinusOne,
    PlusJ,
    MinusJ,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [
        Rotation::PlusOne,
        Rotation::MinusOne,
        Rotation::PlusJ,
        Rotation::MinusJ,
    ];

    pub fn value(self) -> Complex64 {
        match self {
            Rotation::PlusOne => Complex64::new(1.0, 0.0),
            Rotation::MinusOne => Complex64::new(-1.0, 0.0),
            Rotation::PlusJ => Complex64::new(0.0, 1.0),
            Rotation::MinusJ => Complex64::new(0.0, -1.0),
        }
    }

    /// Multiplies `z` without rounding.
    fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Rotation::PlusOne => z,
            Rotation::MinusOne => -z,
            Rotation::PlusJ => Complex64::new(-z.im, z.re),
            Rotation::MinusJ => Complex64::new(z.im, -z.re),
        }
    }
}

/// `U` rotation vectors for the PTS baseline. The first is all `+1`; in the
/// others subblock 1 stays at `+1` and the remaining factors are drawn
/// uniformly from the alphabet using `rng`.
pub fn pts_rotation_table<R: RngCore>(v_count: usize, u_count: usize, rng: &mut R) -> Vec<Vec<Rotation>> {
    let mut table = Vec::with_capacity(u_count);
    if u_count > 0 {
        table.push(vec![Rotation::PlusOne; v_count]);
    }
    for _ in 1..u_count {
        let mut row = vec![Rotation::PlusOne; v_count];
        for r in row.iter_mut().skip(1) {
            *r = Rotation::ALL[(rng.next_u32() >> 30) as usize];
        }
        table.push(row);
    }
    table
}

/// Time-domain images of the `V` subblocks of one symbol sequence.
#[derive(Debug, Clone)]
pub struct SubblockSignals {
    signals: Vec<ComplexSequence>,
    oversample: usize,
}

impl SubblockSignals {
    pub fn new(symbols: &ComplexSequence, pattern: &PartitionPattern) -> Result<Self> {
        Self::with_oversampling(symbols, pattern, 1)
    }

    /// Each subblock is zero-padded to `oversample * N` bins before the IDFT.
    pub fn with_oversampling(
        symbols: &ComplexSequence,
        pattern: &PartitionPattern,
        oversample: usize,
    ) -> Result<Self> {
        let signals = split(symbols, pattern)?
            .iter()
            .map(|part| idft_oversampled(part, oversample))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            signals,
            oversample,
        })
    }

    /// Wraps precomputed Nyquist-rate subblock signals.
    pub fn from_signals(signals: Vec<ComplexSequence>) -> Result<Self> {
        let first = signals
            .first()
            .ok_or_else(|| Error::config("at least one subblock signal is required"))?;
        if signals.iter().any(|s| s.len() != first.len()) {
            return Err(Error::config("subblock signals differ in length"));
        }
        Ok(Self {
            signals,
            oversample: 1,
        })
    }

    pub fn signals(&self) -> &[ComplexSequence] {
        &self.signals
    }

    pub fn v_count(&self) -> usize {
        self.signals.len()
    }

    /// Samples per signal (`oversample * N`).
    pub fn len(&self) -> usize {
        self.signals[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nyquist-rate subcarrier count `N`.
    pub fn n(&self) -> usize {
        self.len() / self.oversample
    }

    /// Sum of the unshifted subblock signals.
    pub fn original(&self) -> ComplexSequence {
        let mut out = ComplexSequence::zeros(self.len());
        for s in &self.signals {
            out.accumulate(s);
        }
        out
    }

    /// `sum_v shift_left(x_v, tau_v)`; shifts are in Nyquist-rate samples.
    pub fn css_candidate(&self, tau: &SvSet) -> Result<ComplexSequence> {
        if tau.len() != self.v_count() {
            return Err(Error::config(format!(
                "SV set has {} shifts for {} subblocks",
                tau.len(),
                self.v_count()
            )));
        }
        let len = self.len();
        let mut out = ComplexSequence::zeros(len);
        for (signal, &shift) in self.signals.iter().zip(tau.shifts()) {
            let offset = (shift * self.oversample) % len;
            let src = signal.as_slice();
            for (i, dst) in (0..len).zip(offset..).map(|(i, j)| (i, j % len)) {
                out[i] += src[dst];
            }
        }
        Ok(out)
    }

    /// `sum_v b_v x_v` with `b_v` from the PTS alphabet.
    pub fn pts_candidate(&self, rotations: &[Rotation]) -> Result<ComplexSequence> {
        if rotations.len() != self.v_count() {
            return Err(Error::config(format!(
                "{} rotation factors for {} subblocks",
                rotations.len(),
                self.v_count()
            )));
        }
        let mut out = ComplexSequence::zeros(self.len());
        for (signal, &r) in self.signals.iter().zip(rotations) {
            for (o, &s) in (0..self.len()).zip(signal.iter()) {
                out[o] += r.apply(s);
            }
        }
        Ok(out)
    }

    /// Evaluates every CSS candidate of `collection` against the mean power
    /// of the unshifted signal and keeps the lowest PAPR (first on ties).
    pub fn select_css(&self, collection: &SvCollection, retain_signal: bool) -> Result<CandidateResult> {
        if collection.v_count() != self.v_count() || collection.n() != self.n() {
            return Err(Error::config(format!(
                "collection is for N={}, V={} but signals are N={}, V={}",
                collection.n(),
                collection.v_count(),
                self.n(),
                self.v_count()
            )));
        }
        let reference = mean_power(&self.original());
        select_lowest(
            collection.sets().iter().map(|tau| self.css_candidate(tau)),
            reference,
            retain_signal,
        )
    }

    /// PTS counterpart of [`select_css`](Self::select_css).
    pub fn select_pts(&self, table: &[Vec<Rotation>], retain_signal: bool) -> Result<CandidateResult> {
        let reference = mean_power(&self.original());
        select_lowest(
            table.iter().map(|row| self.pts_candidate(row)),
            reference,
            retain_signal,
        )
    }
}

fn select_lowest<I>(candidates: I, reference: f64, retain_signal: bool) -> Result<CandidateResult>
where
    I: Iterator<Item = Result<ComplexSequence>>,
{
    let mut best: Option<CandidateResult> = None;
    for (i, candidate) in candidates.enumerate() {
        let candidate = candidate?;
        let papr = papr_db(&candidate, reference)?;
        if best.as_ref().is_none_or(|b| papr < b.papr) {
            best = Some(CandidateResult {
                index: i + 1,
                papr,
                signal: retain_signal.then_some(candidate),
            });
        }
    }
    best.ok_or_else(|| Error::config("no candidates to select from"))
}

/// IDFT of each subblock: `x_v = idft(X_v)`.
pub fn subblock_signals(
    symbols: &ComplexSequence,
    pattern: &PartitionPattern,
) -> Result<Vec<ComplexSequence>> {
    Ok(SubblockSignals::new(symbols, pattern)?.signals)
}

/// One CSS candidate from Nyquist-rate subblock signals.
pub fn make_candidate(subblocks: &[ComplexSequence], tau: &SvSet) -> Result<ComplexSequence> {
    SubblockSignals::from_signals(subblocks.to_vec())?.css_candidate(tau)
}

/// One PTS candidate from Nyquist-rate subblock signals.
pub fn pts_candidate(subblocks: &[ComplexSequence], rotations: &[Rotation]) -> Result<ComplexSequence> {
    SubblockSignals::from_signals(subblocks.to_vec())?.pts_candidate(rotations)
}

/// Full CSS pipeline for one symbol sequence: partition, subblock IDFTs,
/// all `U` candidates, lowest PAPR wins. The winning signal is retained.
pub fn select_min_papr(
    symbols: &ComplexSequence,
    pattern: &PartitionPattern,
    collection: &SvCollection,
) -> Result<CandidateResult> {
    if collection.n() != pattern.n() || collection.v_count() != pattern.v_count() {
        return Err(Error::config(format!(
            "collection is for N={}, V={} but partition is N={}, V={}",
            collection.n(),
            collection.v_count(),
            pattern.n(),
            pattern.v_count()
        )));
    }
    SubblockSignals::new(symbols, pattern)?.select_css(collection, true)
}

/// Bits needed to signal which of `u_count` candidates was sent: `ceil(log2 U)`.
pub fn side_info_bits(u_count: usize) -> u32 {
    assert!(u_count >= 1, "candidate count must be at least 1");
    u_count.next_power_of_two().trailing_zeros()
}
