//! Shift-value set criteria, scoring and search.
//!
//! For two SV sets `i` and `j` the relative distances are
//! `r_v = (tau_v^i - tau_v^j) mod M`, one per subblock.
//!
//! - Criterion 1: for every pair of sets the `V` distances mod `N` are
//!   pairwise distinct.
//! - Criterion 2: the same with modulus `N/V` (interleaved partitions, whose
//!   subblock ACF repeats every `N/V` lags).
//! - Criterion 3: Criterion 1, and the mutual differences `r_v - r_w` should
//!   be as close to `N/2` as possible (adjacent partitions). Scored by
//!   [`criterion3_score`].

use std::cmp::Ordering;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::css::{SvCollection, SvSet};
use crate::modem::Seed;
use crate::partition::PartitionKind;
use crate::{Error, Result};

/// `(a_v - b_v) mod modulus` for every subblock.
pub fn relative_distances(a: &SvSet, b: &SvSet, modulus: usize) -> Vec<usize> {
    assert_eq!(a.len(), b.len(), "SV sets differ in length");
    assert!(modulus > 0, "modulus must be positive");
    a.shifts()
        .iter()
        .zip(b.shifts())
        .map(|(&x, &y)| (x % modulus + modulus - y % modulus) % modulus)
        .collect()
}

/// Circular distance `min(d, N - d)` of a lag difference.
pub fn circular_distance(delta: usize, modulus: usize) -> usize {
    let d = delta % modulus;
    d.min(modulus - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    One,
    Two,
    Three,
}

impl Criterion {
    /// The criterion that matches a partition kind.
    pub fn for_partition(kind: PartitionKind) -> Self {
        match kind {
            PartitionKind::Random => Criterion::One,
            PartitionKind::Interleaved => Criterion::Two,
            PartitionKind::Adjacent => Criterion::Three,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Criterion::One => 1,
            Criterion::Two => 2,
            Criterion::Three => 3,
        };
        write!(f, "{n}")
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Criterion::One),
            "2" => Ok(Criterion::Two),
            "3" => Ok(Criterion::Three),
            other => Err(Error::config(format!("unknown criterion '{other}', expected 1, 2 or 3"))),
        }
    }
}

/// Two subblocks of one SV-set pair whose relative distances coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    /// 1-based SV set indices `(i, j)`, `i < j`.
    pub sets: (usize, usize),
    /// 1-based subblock indices `(v, w)`, `v < w`.
    pub subblocks: (usize, usize),
    /// The shared relative distance.
    pub distance: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sets ({}, {}): subblocks {} and {} share distance {}",
            self.sets.0, self.sets.1, self.subblocks.0, self.subblocks.1, self.distance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionReport {
    pub satisfied: bool,
    pub violations: Vec<Violation>,
}

fn check_distinct(c: &SvCollection, modulus: usize) -> CriterionReport {
    let mut violations = Vec::new();
    let sets = c.sets();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let r = relative_distances(&sets[i], &sets[j], modulus);
            for v in 0..r.len() {
                for w in v + 1..r.len() {
                    if r[v] == r[w] {
                        violations.push(Violation {
                            sets: (i + 1, j + 1),
                            subblocks: (v + 1, w + 1),
                            distance: r[v],
                        });
                    }
                }
            }
        }
    }
    CriterionReport {
        satisfied: violations.is_empty(),
        violations,
    }
}

/// Relative distances mod `N` distinct within every pair of sets.
pub fn check_criterion1(c: &SvCollection) -> CriterionReport {
    check_distinct(c, c.n())
}

/// Relative distances mod `N/V` distinct within every pair of sets.
pub fn check_criterion2(c: &SvCollection) -> CriterionReport {
    check_distinct(c, c.n() / c.v_count())
}

/// Circular spread of the mutual differences of relative distances.
///
/// Ordered lexicographically by `(min, mean)`: larger is better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criterion3Score {
    pub min_circular_gap: usize,
    pub mean_circular_gap: f64,
}

impl Criterion3Score {
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.min_circular_gap
            .cmp(&other.min_circular_gap)
            .then(self.mean_circular_gap.total_cmp(&other.mean_circular_gap))
    }
}

impl PartialOrd for Criterion3Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl fmt::Display for Criterion3Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "min_circular_gap={} mean_circular_gap={:.4}",
            self.min_circular_gap, self.mean_circular_gap
        )
    }
}

/// Scores how far the mutual differences `r_v - r_w` (`v < w`) sit from 0
/// on the circle mod `N`, over all pairs of sets.
///
/// Requires Criterion 1. With no pairs at all (`U = 1` or `V = 1`) the
/// score is the maximum `N/2`.
pub fn criterion3_score(c: &SvCollection) -> Result<Criterion3Score> {
    let report = check_criterion1(c);
    if !report.satisfied {
        return Err(Error::Precondition(format!(
            "Criterion 1 does not hold ({})",
            report.violations[0]
        )));
    }
    let n = c.n();
    let sets = c.sets();
    let mut min = n / 2;
    let mut total = 0usize;
    let mut count = 0usize;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let r = relative_distances(&sets[i], &sets[j], n);
            for v in 0..r.len() {
                for w in v + 1..r.len() {
                    let d = circular_distance(r[v] + n - r[w], n);
                    min = min.min(d);
                    total += d;
                    count += 1;
                }
            }
        }
    }
    let mean = if count == 0 {
        (n / 2) as f64
    } else {
        total as f64 / count as f64
    };
    Ok(Criterion3Score {
        min_circular_gap: min,
        mean_circular_gap: mean,
    })
}

/// Verdict of one criterion. For Criterion 3 the collection must satisfy
/// Criterion 1 and reach `min_gap` (pass `1` to require only Criterion 1).
pub fn check(c: &SvCollection, criterion: Criterion, min_gap: usize) -> bool {
    match criterion {
        Criterion::One => check_criterion1(c).satisfied,
        Criterion::Two => check_criterion2(c).satisfied,
        Criterion::Three => {
            criterion3_score(c).is_ok_and(|s| s.min_circular_gap >= min_gap)
        }
    }
}

fn propose(n: usize, v_count: usize, u_count: usize, seed: Seed, index: u64) -> Result<SvCollection> {
    let mut rng = seed.stream_rng(index);
    let mut sets = Vec::with_capacity(u_count);
    sets.push(SvSet::zeros(v_count));
    for _ in 1..u_count {
        // A common offset on all shifts only rotates the candidate, so the
        // first subblock is pinned at 0.
        let mut shifts = vec![0usize; v_count];
        for s in shifts.iter_mut().skip(1) {
            *s = rng.random_range(0..n as u64) as usize;
        }
        sets.push(SvSet::new(shifts));
    }
    SvCollection::new(n, v_count, sets)
}

/// Random search for an SV collection suited to `kind`.
///
/// Proposal `i` is drawn from stream `i` of `seed`; its first set is all
/// zeros. Random partitions take the first proposal passing Criterion 1,
/// interleaved the first passing Criterion 2. Adjacent partitions scan all
/// `iterations` proposals and keep the Criterion-1-valid one with the best
/// [`Criterion3Score`], earliest index on ties. The result does not depend
/// on the number of worker threads.
pub fn search_sv_collection(
    n: usize,
    v_count: usize,
    u_count: usize,
    kind: PartitionKind,
    seed: Seed,
    iterations: usize,
) -> Result<SvCollection> {
    if u_count == 0 {
        return Err(Error::config("U must be at least 1"));
    }
    // Validates the dimensions up front.
    propose(n, v_count, u_count, seed, 0)?;

    match kind {
        PartitionKind::Random | PartitionKind::Interleaved => {
            let check: fn(&SvCollection) -> CriterionReport = if kind == PartitionKind::Random {
                check_criterion1
            } else {
                check_criterion2
            };
            (0..iterations as u64)
                .into_par_iter()
                .map(|i| propose(n, v_count, u_count, seed, i).expect("dimensions validated"))
                .find_first(|c| check(c).satisfied)
                .ok_or(Error::SearchExhausted {
                    attempts: iterations,
                })
        }
        PartitionKind::Adjacent => (0..iterations as u64)
            .into_par_iter()
            .filter_map(|i| {
                let c = propose(n, v_count, u_count, seed, i).expect("dimensions validated");
                criterion3_score(&c).ok().map(|s| (s, i, c))
            })
            .reduce_with(|a, b| match a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)) {
                Ordering::Less => b,
                _ => a,
            })
            .map(|(_, _, c)| c)
            .ok_or(Error::SearchExhausted {
                attempts: iterations,
            }),
    }
}

/// Writes the `n=<N>,v=<V>` header followed by one comma-separated set per line.
pub fn write_sv_file<W: Write>(c: &SvCollection, mut out: W) -> Result<()> {
    writeln!(out, "n={},v={}", c.n(), c.v_count())?;
    for set in c.sets() {
        writeln!(out, "{set}")?;
    }
    Ok(())
}

pub fn to_sv_string(c: &SvCollection) -> String {
    let mut buf = Vec::new();
    write_sv_file(c, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_header(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut n = None;
    let mut v = None;
    for field in line.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("expected key=value in header, got '{field}'")))?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|e| Error::parse(lineno, format!("bad header value '{value}': {e}")))?;
        match key.trim() {
            "n" => n = Some(value),
            "v" => v = Some(value),
            other => return Err(Error::parse(lineno, format!("unknown header key '{other}'"))),
        }
    }
    match (n, v) {
        (Some(n), Some(v)) => Ok((n, v)),
        _ => Err(Error::parse(lineno, "header must define both n and v")),
    }
}

/// Parses a comma-separated list of shifts.
pub fn parse_sv_set(line: &str, lineno: usize) -> Result<SvSet> {
    line.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::parse(lineno, format!("bad shift value '{}': {e}", t.trim())))
        })
        .collect::<Result<Vec<_>>>()
        .map(SvSet::new)
}

/// Reads the SV-set file format. Blank lines and `#` comments are ignored.
pub fn read_sv_file<R: BufRead>(input: R) -> Result<SvCollection> {
    let mut header = None;
    let mut sets = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if header.is_none() {
            header = Some(parse_header(line, idx + 1)?);
        } else {
            sets.push(parse_sv_set(line, idx + 1)?);
        }
    }
    let (n, v) = header.ok_or_else(|| Error::parse(1, "missing 'n=<N>,v=<V>' header"))?;
    SvCollection::new(n, v, sets)
}

/// Built-in `N = 128`, `V = 4`, `U = 4` collections, one pair per partition
/// kind: a "good" collection designed by the matching criterion and a
/// "poor" one that misses it.
pub const PRESET_NAMES: [&str; 6] = [
    "random-good",
    "random-poor",
    "interleaved-good",
    "interleaved-poor",
    "adjacent-good",
    "adjacent-poor",
];

pub fn preset(name: &str) -> Result<SvCollection> {
    let sets: [[usize; 4]; 4] = match name {
        "random-good" | "interleaved-poor" => [[0, 0, 0, 0], [0, 8, 16, 24], [0, 16, 32, 48], [0, 24, 48, 72]],
        "random-poor" => [[0, 0, 0, 0], [0, 4, 8, 12], [0, 16, 20, 24], [0, 28, 32, 36]],
        "interleaved-good" | "adjacent-poor" => [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 4, 6], [0, 3, 6, 9]],
        "adjacent-good" => [[0, 0, 0, 0], [0, 44, 73, 95], [0, 9, 35, 84], [0, 25, 45, 110]],
        other => {
            return Err(Error::config(format!(
                "unknown preset '{other}', expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    SvCollection::new(128, 4, sets.iter().map(|s| SvSet::new(s.to_vec())).collect())
}
