//! Subcarrier partitions into `V` disjoint, equally sized subblocks.
//!
//! Subblocks are numbered from 1 to `V`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;

use crate::modem::Seed;
use crate::spectral::{check_power_of_two, ComplexSequence};
use crate::{Error, Result};

/// How subcarriers are assigned to subblocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartitionKind {
    Random,
    Adjacent,
    Interleaved,
}

impl PartitionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PartitionKind::Random => "random",
            PartitionKind::Adjacent => "adjacent",
            PartitionKind::Interleaved => "interleaved",
        }
    }
}

impl fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PartitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(PartitionKind::Random),
            "adjacent" => Ok(PartitionKind::Adjacent),
            "interleaved" => Ok(PartitionKind::Interleaved),
            other => Err(Error::config(format!("unknown partition kind '{other}'"))),
        }
    }
}

/// A balanced assignment of `n` subcarriers to `v_count` subblocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPattern {
    n: usize,
    v_count: usize,
    kind: PartitionKind,
    assignment: Vec<usize>,
}

fn check_dims(n: usize, v_count: usize) -> Result<()> {
    check_power_of_two(n, "subcarrier count")?;
    check_power_of_two(v_count, "subblock count")?;
    if v_count > n {
        return Err(Error::config(format!(
            "subblock count {v_count} exceeds subcarrier count {n}"
        )));
    }
    Ok(())
}

impl PartitionPattern {
    /// Builds a pattern from an explicit 1-based assignment, checking balance.
    pub fn from_assignment(
        v_count: usize,
        kind: PartitionKind,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        let n = assignment.len();
        check_dims(n, v_count)?;
        let mut counts = vec![0usize; v_count];
        for (k, &v) in assignment.iter().enumerate() {
            if v == 0 || v > v_count {
                return Err(Error::config(format!(
                    "subcarrier {k} assigned to subblock {v}, expected 1..={v_count}"
                )));
            }
            counts[v - 1] += 1;
        }
        if let Some(v) = counts.iter().position(|&c| c != n / v_count) {
            return Err(Error::config(format!(
                "subblock {} owns {} subcarriers, expected {}",
                v + 1,
                counts[v],
                n / v_count
            )));
        }
        Ok(Self {
            n,
            v_count,
            kind,
            assignment,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn v_count(&self) -> usize {
        self.v_count
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    /// Subblock (1-based) owning subcarrier `k`.
    pub fn subblock_of(&self, k: usize) -> usize {
        self.assignment[k]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Subcarrier indices owned by subblock `v` (1-based), ascending.
    pub fn members(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&k| self.assignment[k] == v).collect()
    }

    pub fn subblock_size(&self) -> usize {
        self.n / self.v_count
    }

    /// Writes one `k,v` line per subcarrier.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in self.assignment.iter().enumerate() {
            writeln!(out, "{k},{v}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Reads the `k,v` format produced by [`write_csv`](Self::write_csv).
    ///
    /// Lines may come in any order but every subcarrier must appear exactly
    /// once. The kind is recovered by comparing against the structured
    /// patterns; anything else is reported as random.
    pub fn read_csv<R: BufRead>(input: R, v_count: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(idx + 1, "expected 'k,v'"))?;
            let k: usize = k
                .trim()
                .parse()
                .map_err(|e| Error::parse(idx + 1, format!("bad subcarrier index: {e}")))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|e| Error::parse(idx + 1, format!("bad subblock index: {e}")))?;
            pairs.push((k, v));
        }
        let n = pairs.len();
        let mut assignment = vec![0usize; n];
        for (k, v) in pairs {
            if k >= n || assignment[k] != 0 {
                return Err(Error::config(format!(
                    "subcarrier {k} is out of range or listed twice"
                )));
            }
            assignment[k] = v;
        }
        let mut pattern = Self::from_assignment(v_count, PartitionKind::Random, assignment)?;
        if pattern.assignment == interleaved_pattern(n, v_count)?.assignment {
            pattern.kind = PartitionKind::Interleaved;
        } else if pattern.assignment == adjacent_pattern(n, v_count)?.assignment {
            pattern.kind = PartitionKind::Adjacent;
        }
        Ok(pattern)
    }
}

/// Subcarrier `k` goes to subblock `(k mod V) + 1`.
pub fn interleaved_pattern(n: usize, v_count: usize) -> Result<PartitionPattern> {
    check_dims(n, v_count)?;
    let assignment = (0..n).map(|k| k % v_count + 1).collect();
    PartitionPattern::from_assignment(v_count, PartitionKind::Interleaved, assignment)
}

/// Subcarrier `k` goes to subblock `floor(k / (N/V)) + 1`.
pub fn adjacent_pattern(n: usize, v_count: usize) -> Result<PartitionPattern> {
    check_dims(n, v_count)?;
    let width = n / v_count;
    let assignment = (0..n).map(|k| k / width + 1).collect();
    PartitionPattern::from_assignment(v_count, PartitionKind::Adjacent, assignment)
}

/// Balanced random partition: a seeded Fisher-Yates shuffle of the multiset
/// holding `N/V` copies of every subblock index.
pub fn random_pattern(n: usize, v_count: usize, seed: Seed) -> Result<PartitionPattern> {
    check_dims(n, v_count)?;
    let width = n / v_count;
    let mut assignment: Vec<usize> = (0..n).map(|k| k / width + 1).collect();
    let mut rng = seed.rng();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i as u64) as usize;
        assignment.swap(i, j);
    }
    PartitionPattern::from_assignment(v_count, PartitionKind::Random, assignment)
}

/// Builds a pattern of the requested kind; `seed` is only used for random.
pub fn make_pattern(
    kind: PartitionKind,
    n: usize,
    v_count: usize,
    seed: Seed,
) -> Result<PartitionPattern> {
    match kind {
        PartitionKind::Random => random_pattern(n, v_count, seed),
        PartitionKind::Adjacent => adjacent_pattern(n, v_count),
        PartitionKind::Interleaved => interleaved_pattern(n, v_count),
    }
}

/// Feedback taps `t` for `a[i + deg] = xor_t a[i + t]` (primitive
/// characteristic polynomials), with the register fill used for each degree.
const M_SEQUENCE_TABLE: [(u32, &[usize], &[u8]); 9] = [
    (2, &[0, 1], &[1, 0]),
    (3, &[0, 1], &[1, 0, 0]),
    (4, &[0, 1], &[1, 0, 0, 0]),
    (5, &[0, 2], &[1, 0, 0, 1, 0]),
    (6, &[0, 1], &[1, 0, 0, 0, 0, 0]),
    (7, &[0, 1], &[1, 0, 0, 0, 0, 0, 0]),
    (8, &[0, 2, 3, 4], &[1, 0, 0, 0, 0, 0, 0, 0]),
    (9, &[0, 4], &[1, 0, 0, 0, 0, 0, 0, 0, 0]),
    (10, &[0, 3], &[1, 0, 0, 0, 0, 0, 0, 0, 0, 0]),
];

/// One period (`2^degree - 1` bits) of a maximal-length LFSR sequence.
pub fn m_sequence(degree: u32) -> Result<Vec<u8>> {
    let (_, taps, fill) = M_SEQUENCE_TABLE
        .iter()
        .find(|(d, _, _)| *d == degree)
        .ok_or_else(|| Error::config(format!("no m-sequence table entry for degree {degree}")))?;
    let len = (1usize << degree) - 1;
    let deg = degree as usize;
    let mut bits: Vec<u8> = fill.to_vec();
    while bits.len() < len {
        let i = bits.len() - deg;
        bits.push(taps.iter().fold(0, |acc, &t| acc ^ bits[i + t]));
    }
    Ok(bits)
}

/// Two-subblock random partition whose first spectrum is an m-sequence of
/// length `n - 1` followed by a single zero.
///
/// For `n = 32` this is `1001011001111100011011101010000` + `0`.
pub fn m_sequence_pattern(n: usize, v_count: usize) -> Result<PartitionPattern> {
    check_dims(n, v_count)?;
    if v_count != 2 || n < 4 {
        return Err(Error::config(
            "m-sequence partitions need V = 2 and N >= 4",
        ));
    }
    let mut bits = m_sequence(n.trailing_zeros())?;
    bits.push(0);
    let assignment = bits.iter().map(|&b| if b == 1 { 1 } else { 2 }).collect();
    PartitionPattern::from_assignment(v_count, PartitionKind::Random, assignment)
}

/// Splits `symbols` into `V` length-N sequences, zero outside each subblock.
pub fn split(symbols: &ComplexSequence, pattern: &PartitionPattern) -> Result<Vec<ComplexSequence>> {
    if symbols.len() != pattern.n() {
        return Err(Error::config(format!(
            "symbol sequence has length {}, partition expects {}",
            symbols.len(),
            pattern.n()
        )));
    }
    let mut parts = vec![ComplexSequence::zeros(pattern.n()); pattern.v_count()];
    for (k, &v) in pattern.assignment().iter().enumerate() {
        parts[v - 1][k] = symbols[k];
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn interleaved_examples() {
        let p = interleaved_pattern(8, 2).unwrap();
        assert_eq!(p.members(1), vec![0, 2, 4, 6]);
        assert_eq!(p.members(2), vec![1, 3, 5, 7]);

        let p = interleaved_pattern(4, 4).unwrap();
        for v in 1..=4 {
            assert_eq!(p.members(v), vec![v - 1]);
        }

        let p = interleaved_pattern(128, 4).unwrap();
        assert_eq!(p.members(1), (0..128).step_by(4).collect::<Vec<_>>());
    }

    #[test]
    fn adjacent_examples() {
        let p = adjacent_pattern(8, 2).unwrap();
        assert_eq!(p.members(1), vec![0, 1, 2, 3]);

        let p = adjacent_pattern(32, 2).unwrap();
        let s1: Vec<usize> = (0..32).map(|k| usize::from(p.subblock_of(k) == 1)).collect();
        let mut want = vec![1; 16];
        want.extend(vec![0; 16]);
        assert_eq!(s1, want);

        let p = adjacent_pattern(128, 4).unwrap();
        assert_eq!(p.members(3), (64..96).collect::<Vec<_>>());
    }

    #[test]
    fn invalid_dimensions_are_rejected() {
        assert!(interleaved_pattern(12, 4).is_err());
        assert!(interleaved_pattern(16, 3).is_err());
        assert!(adjacent_pattern(4, 8).is_err());
        assert!(random_pattern(0, 1, Seed(0)).is_err());
    }

    #[test]
    fn random_pattern_is_balanced_and_deterministic() {
        for seed in 0..20 {
            let a = random_pattern(128, 4, Seed(seed)).unwrap();
            let b = random_pattern(128, 4, Seed(seed)).unwrap();
            assert_eq!(a, b);
            for v in 1..=4 {
                assert_eq!(a.members(v).len(), 32);
            }
        }
        assert_ne!(
            random_pattern(128, 4, Seed(1)).unwrap(),
            random_pattern(128, 4, Seed(2)).unwrap()
        );
    }

    #[test]
    fn m_sequence_pattern_matches_reference_spectrum() {
        let p = m_sequence_pattern(32, 2).unwrap();
        let want = [
            1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 1, 1, 1, 1, 0, 0, 0, 1, 1, 0, 1, 1, 1, 0, 1, 0, 1, 0, 0,
            0, 0, 0,
        ];
        let s1: Vec<usize> = (0..32).map(|k| usize::from(p.subblock_of(k) == 1)).collect();
        assert_eq!(s1, want);
        assert_eq!(p.kind(), PartitionKind::Random);
    }

    #[test]
    fn m_sequences_are_maximal_length() {
        for degree in 2..=10u32 {
            let bits = m_sequence(degree).unwrap();
            let len = bits.len();
            assert_eq!(len, (1 << degree) - 1);
            assert_eq!(bits.iter().filter(|&&b| b == 1).count(), 1 << (degree - 1));
            // Every non-zero window of `degree` bits appears exactly once per period.
            let mut seen = vec![false; 1 << degree];
            for i in 0..len {
                let w = (0..degree as usize).fold(0usize, |acc, j| (acc << 1) | bits[(i + j) % len] as usize);
                assert!(w != 0 && !seen[w]);
                seen[w] = true;
            }
        }
        assert!(m_sequence(11).is_err());
        assert!(m_sequence_pattern(32, 4).is_err());
    }

    #[test]
    fn split_examples() {
        let ones = ComplexSequence::from_real(&[1.0; 8]).unwrap();
        let parts = split(&ones, &interleaved_pattern(8, 2).unwrap()).unwrap();
        assert_eq!(
            parts[0],
            ComplexSequence::from_real(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap()
        );

        let x = ComplexSequence::new((0..8).map(|k| Complex64::new(k as f64, -1.0)).collect()).unwrap();
        let parts = split(&x, &adjacent_pattern(8, 1).unwrap()).unwrap();
        assert_eq!(parts, vec![x.clone()]);

        let p = random_pattern(8, 4, Seed(3)).unwrap();
        let parts = split(&x, &p).unwrap();
        let mut sum = ComplexSequence::zeros(8);
        for part in &parts {
            let zeros = part.iter().filter(|s| s.norm() == 0.0).count();
            // x(0) has a non-zero imaginary part, so every kept sample is non-zero.
            assert_eq!(zeros, 8 - 2);
            sum.accumulate(part);
        }
        assert_eq!(sum, x);

        assert!(split(&ComplexSequence::zeros(4), &p).is_err());
    }

    #[test]
    fn csv_round_trip_recovers_kind() {
        for pattern in [
            interleaved_pattern(16, 4).unwrap(),
            adjacent_pattern(16, 4).unwrap(),
            random_pattern(16, 4, Seed(5)).unwrap(),
        ] {
            let text = pattern.to_csv();
            assert_eq!(text.lines().next().unwrap(), format!("0,{}", pattern.subblock_of(0)));
            let back = PartitionPattern::read_csv(text.as_bytes(), 4).unwrap();
            assert_eq!(back.assignment(), pattern.assignment());
            if pattern.kind() != PartitionKind::Random {
                assert_eq!(back.kind(), pattern.kind());
            }
        }
    }

    #[test]
    fn csv_rejects_unbalanced_or_duplicate() {
        assert!(PartitionPattern::read_csv("0,1\n1,1\n2,1\n3,2\n".as_bytes(), 2).is_err());
        assert!(PartitionPattern::read_csv("0,1\n0,2\n".as_bytes(), 2).is_err());
        assert!(PartitionPattern::read_csv("0;1\n".as_bytes(), 2).is_err());
    }
}
