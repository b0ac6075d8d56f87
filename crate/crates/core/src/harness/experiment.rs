use std::fs::File;
use std::io::{BufReader, Write};

use rayon::prelude::*;

use super::config::{Scheme, SimConfig};
use crate::css::{pts_rotation_table, Rotation, SubblockSignals, SvCollection};
use crate::modem::random_symbols;
use crate::partition::{make_pattern, PartitionPattern};
use crate::spectral::{mean_power, papr_db, PaprDb};
use crate::{Error, Result};

/// ChaCha stream reserved for the PTS rotation table. Trial `t` uses stream `t`.
const ROTATION_STREAM: u64 = u64::MAX;

/// Expected exceedance events at `ccdf_depth` below which a warning is emitted.
const MIN_EXPECTED_EVENTS: f64 = 100.0;

/// Every `SANITY_STRIDE`-th trial re-checks candidate energy.
const SANITY_STRIDE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub papr_original: PaprDb,
    pub papr_selected: PaprDb,
    /// 1-based index of the transmitted candidate.
    pub selected_index: usize,
}

/// A configured experiment: the fixed partition and candidate tables.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: SimConfig,
    pattern: PartitionPattern,
    collection: Option<SvCollection>,
    rotations: Vec<Vec<Rotation>>,
}

impl Experiment {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let pattern = match &config.partition_file {
            Some(path) => {
                let p = PartitionPattern::read_csv(BufReader::new(File::open(path)?), config.v_count)?;
                if p.n() != config.n {
                    return Err(Error::config(format!(
                        "partition file has {} subcarriers, expected {}",
                        p.n(),
                        config.n
                    )));
                }
                p
            }
            None => make_pattern(config.partition_kind, config.n, config.v_count, config.partition_seed)?,
        };
        let collection = match config.scheme {
            Scheme::Css => config.collection()?,
            _ => None,
        };
        let rotations = match config.scheme {
            Scheme::Pts => pts_rotation_table(
                config.v_count,
                config.effective_u_count()?,
                &mut config.master_seed.stream_rng(ROTATION_STREAM),
            ),
            _ => Vec::new(),
        };
        Ok(Self {
            config,
            pattern,
            collection,
            rotations,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn pattern(&self) -> &PartitionPattern {
        &self.pattern
    }

    pub fn rotations(&self) -> &[Vec<Rotation>] {
        &self.rotations
    }

    pub fn run_trial(&self, trial_index: usize) -> Result<TrialOutcome> {
        let mut rng = self.config.master_seed.stream_rng(trial_index as u64);
        let symbols = random_symbols(&mut rng, self.config.n)?;
        let subblocks = SubblockSignals::with_oversampling(&symbols, &self.pattern, self.config.oversample)?;
        let original = subblocks.original();
        let reference = mean_power(&original);
        let papr_original = papr_db(&original, reference)?;

        let check = trial_index.is_multiple_of(SANITY_STRIDE);
        let best = match self.config.scheme {
            Scheme::None => {
                return Ok(TrialOutcome {
                    papr_original,
                    papr_selected: papr_original,
                    selected_index: 1,
                })
            }
            Scheme::Css => {
                let c = self.collection.as_ref().expect("css experiments carry a collection");
                subblocks.select_css(c, check)?
            }
            Scheme::Pts => subblocks.select_pts(&self.rotations, check)?,
        };
        if let Some(signal) = &best.signal {
            let (a, b) = (signal.energy(), original.energy());
            if (a - b).abs() > 1e-9 {
                return Err(Error::Invariant(format!(
                    "trial {trial_index}: candidate energy {a} differs from original {b}"
                )));
            }
        }
        Ok(TrialOutcome {
            papr_original,
            papr_selected: best.papr,
            selected_index: best.index,
        })
    }

    /// Runs all trials (in parallel when `workers != 1`) and tabulates the CCDFs.
    pub fn run(&self) -> Result<CcdfTable> {
        let trials = self.config.trials;
        let run_all = || {
            (0..trials)
                .into_par_iter()
                .map(|t| self.run_trial(t))
                .collect::<Result<Vec<_>>>()
        };
        let outcomes = if self.config.workers == 0 {
            run_all()?
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.config.workers)
                .build()
                .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?
                .install(run_all)?
        };

        let mut original: Vec<f64> = outcomes.iter().map(|o| o.papr_original.value()).collect();
        let mut selected: Vec<f64> = outcomes.iter().map(|o| o.papr_selected.value()).collect();
        original.sort_by(f64::total_cmp);
        selected.sort_by(f64::total_cmp);

        let thresholds = self.config.grid.thresholds();
        let exceed = |sorted: &[f64], t: f64| {
            let above = sorted.len() - sorted.partition_point(|&p| p <= t);
            above as f64 / trials as f64
        };
        let prob_original = thresholds.iter().map(|&t| exceed(&original, t)).collect();
        let prob_selected = thresholds.iter().map(|&t| exceed(&selected, t)).collect();

        let mut warnings = Vec::new();
        let expected = trials as f64 * self.config.ccdf_depth;
        if expected < MIN_EXPECTED_EVENTS {
            warnings.push(format!(
                "trials={trials} gives about {expected} exceedance events at CCDF {}; \
                 at least {MIN_EXPECTED_EVENTS} are needed for a stable estimate",
                self.config.ccdf_depth
            ));
        }
        if self.config.scheme == Scheme::Css
            && !self.collection.as_ref().is_some_and(SvCollection::contains_identity)
        {
            warnings.push("SV collection has no all-zeros set; CSS may exceed the original PAPR".into());
        }

        let mut metadata = vec![format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))];
        metadata.extend(self.config.echo()?);

        Ok(CcdfTable {
            thresholds_db: thresholds,
            prob_original,
            prob_selected,
            trials,
            metadata,
            warnings,
        })
    }
}

/// PAPRs of one trial: `(original, selected)`.
pub fn run_trial(config: &SimConfig, trial_index: usize) -> Result<(PaprDb, PaprDb)> {
    let o = Experiment::new(config.clone())?.run_trial(trial_index)?;
    Ok((o.papr_original, o.papr_selected))
}

pub fn run_experiment(config: &SimConfig) -> Result<CcdfTable> {
    Experiment::new(config.clone())?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcdfColumn {
    Original,
    Selected,
}

/// Empirical `P(PAPR > threshold)` for the original and selected signals.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfTable {
    pub thresholds_db: Vec<f64>,
    pub prob_original: Vec<f64>,
    pub prob_selected: Vec<f64>,
    pub trials: usize,
    /// Tool version and configuration echo, written as `#` comment lines.
    pub metadata: Vec<String>,
    pub warnings: Vec<String>,
}

impl CcdfTable {
    pub fn column(&self, column: CcdfColumn) -> &[f64] {
        match column {
            CcdfColumn::Original => &self.prob_original,
            CcdfColumn::Selected => &self.prob_selected,
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for line in &self.metadata {
            writeln!(out, "# {line}")?;
        }
        for w in &self.warnings {
            writeln!(out, "# warning: {w}")?;
        }
        writeln!(out, "threshold_db,ccdf_original,ccdf_selected,trials")?;
        for ((t, po), ps) in self.thresholds_db.iter().zip(&self.prob_original).zip(&self.prob_selected) {
            writeln!(out, "{t},{po},{ps},{}", self.trials)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }
}

/// Threshold at which a CCDF column crosses `probability`, interpolating
/// linearly in `log10(probability)` between grid points.
///
/// The valid range is from the smallest positive to the largest observed
/// probability; a probability hit exactly returns the smallest threshold
/// carrying it.
pub fn interpolate_papr_at(table: &CcdfTable, probability: f64, column: CcdfColumn) -> Result<PaprDb> {
    let probs = table.column(column);
    let t = &table.thresholds_db;
    let max = probs.iter().copied().fold(0.0, f64::max);
    let min = probs.iter().copied().filter(|&p| p > 0.0).fold(f64::INFINITY, f64::min);
    let out_of_range = || Error::OutOfRange {
        probability,
        min: if min.is_finite() { min } else { 0.0 },
        max,
    };
    if !(probability > 0.0) || probability > max || probability < min {
        return Err(out_of_range());
    }
    for i in 0..probs.len() {
        if probs[i] == probability {
            return Ok(PaprDb(t[i]));
        }
        if i + 1 < probs.len() && probs[i] > probability && probability > probs[i + 1] {
            let (p0, p1) = (probs[i].log10(), probs[i + 1].log10());
            let frac = (probability.log10() - p0) / (p1 - p0);
            return Ok(PaprDb(t[i] + frac * (t[i + 1] - t[i])));
        }
    }
    Err(out_of_range())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(probs: &[f64]) -> CcdfTable {
        CcdfTable {
            thresholds_db: (0..probs.len()).map(|i| 5.0 + i as f64).collect(),
            prob_original: probs.to_vec(),
            prob_selected: probs.to_vec(),
            trials: 1000,
            metadata: vec![],
            warnings: vec![],
        }
    }

    #[test]
    fn interpolation_is_log_linear() {
        let t = table(&[1.0, 1.0, 0.1, 0.001, 0.0]);
        assert_eq!(interpolate_papr_at(&t, 1.0, CcdfColumn::Original).unwrap(), PaprDb(5.0));
        assert_eq!(interpolate_papr_at(&t, 0.1, CcdfColumn::Original).unwrap(), PaprDb(7.0));
        let mid = interpolate_papr_at(&t, 0.01, CcdfColumn::Original).unwrap().value();
        assert!((mid - 7.5).abs() < 1e-12);
        let q = interpolate_papr_at(&t, 10f64.powf(-0.5), CcdfColumn::Selected).unwrap().value();
        assert!((q - 6.5).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_monotone() {
        let t = table(&[0.9, 0.5, 0.2, 0.05, 0.01, 0.002]);
        let mut last = f64::INFINITY;
        for p in [0.002, 0.004, 0.01, 0.03, 0.1, 0.3, 0.6, 0.9] {
            let x = interpolate_papr_at(&t, p, CcdfColumn::Original).unwrap().value();
            assert!(x <= last);
            last = x;
        }
    }

    #[test]
    fn interpolation_out_of_range() {
        let t = table(&[0.5, 0.1, 0.01, 0.0]);
        for p in [0.6, 0.005, 0.0, -1.0, f64::NAN] {
            assert!(matches!(
                interpolate_papr_at(&t, p, CcdfColumn::Original),
                Err(Error::OutOfRange { .. })
            ));
        }
        let zeros = table(&[0.0, 0.0]);
        assert!(interpolate_papr_at(&zeros, 0.1, CcdfColumn::Original).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut t = table(&[1.0, 0.5]);
        t.metadata = vec!["css-papr 0.1.0".into(), "n=128".into()];
        t.warnings = vec!["few trials".into()];
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# css-papr 0.1.0");
        assert_eq!(lines[2], "# warning: few trials");
        assert_eq!(lines[3], "threshold_db,ccdf_original,ccdf_selected,trials");
        assert_eq!(lines[4], "5,1,1,1000");
        assert_eq!(lines[5], "6,0.5,0.5,1000");
    }
}
