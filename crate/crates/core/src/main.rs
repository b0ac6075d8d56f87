use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use css_papr::acf::acf_table;
use css_papr::harness::{interpolate_papr_at, CcdfColumn, Experiment, SimConfig};
use css_papr::modem::Seed;
use css_papr::partition::{m_sequence_pattern, make_pattern, PartitionKind};
use css_papr::svsets::{
    check, check_criterion1, check_criterion2, criterion3_score, read_sv_file, search_sv_collection,
    write_sv_file, Criterion,
};
use css_papr::{Error, Result};

/// Cyclic shifted sequences PAPR reduction toolkit.
#[derive(Parser)]
#[command(name = "css-papr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run a Monte Carlo CCDF experiment and write the table as CSV.
    Simulate(SimulateArgs),
    /// Compare numeric and closed-form ACF magnitudes of one subblock.
    Acf(AcfArgs),
    /// Check an SV-set file against the selection criteria.
    CheckSvsets(CheckArgs),
    /// Search for an SV collection suited to a partition kind.
    SearchSvsets(SearchArgs),
}

/// Every config key is also a flag; flags win over the config file.
#[derive(Args)]
struct SimulateArgs {
    /// Config file with one `key = value` per line.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the partition used as `k,v` lines.
    #[arg(long = "partition_out", alias = "partition-out")]
    partition_out: Option<PathBuf>,

    #[arg(long)]
    n: Option<String>,
    #[arg(long = "v_count", alias = "v-count")]
    v_count: Option<String>,
    #[arg(long = "u_count", alias = "u-count")]
    u_count: Option<String>,
    #[arg(long = "partition_kind", alias = "partition-kind")]
    partition_kind: Option<String>,
    #[arg(long = "partition_seed", alias = "partition-seed")]
    partition_seed: Option<String>,
    #[arg(long = "partition_file", alias = "partition-file")]
    partition_file: Option<String>,
    /// Preset name, `@path` to an SV-set file, or `0,0,0,0;0,1,2,3;...`.
    #[arg(long = "sv_collection", alias = "sv-collection")]
    sv_collection: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long = "master_seed", alias = "master-seed")]
    master_seed: Option<String>,
    #[arg(long)]
    oversample: Option<String>,
    /// css, pts or none.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long = "ccdf_min_db", alias = "ccdf-min-db")]
    ccdf_min_db: Option<String>,
    #[arg(long = "ccdf_max_db", alias = "ccdf-max-db")]
    ccdf_max_db: Option<String>,
    #[arg(long = "ccdf_step_db", alias = "ccdf-step-db")]
    ccdf_step_db: Option<String>,
    #[arg(long = "ccdf_depth", alias = "ccdf-depth")]
    ccdf_depth: Option<String>,
    #[arg(long)]
    workers: Option<String>,
}

impl SimulateArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 16] {
        [
            ("n", &self.n),
            ("v_count", &self.v_count),
            ("u_count", &self.u_count),
            ("partition_kind", &self.partition_kind),
            ("partition_seed", &self.partition_seed),
            ("partition_file", &self.partition_file),
            ("sv_collection", &self.sv_collection),
            ("trials", &self.trials),
            ("master_seed", &self.master_seed),
            ("oversample", &self.oversample),
            ("scheme", &self.scheme),
            ("ccdf_min_db", &self.ccdf_min_db),
            ("ccdf_max_db", &self.ccdf_max_db),
            ("ccdf_step_db", &self.ccdf_step_db),
            ("ccdf_depth", &self.ccdf_depth),
            ("workers", &self.workers),
        ]
    }
}

#[derive(Args)]
struct AcfArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    v: usize,
    /// interleaved, adjacent, random or mseq.
    #[arg(long)]
    partition: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Subblock to analyse, 1-based.
    #[arg(long, default_value_t = 1)]
    subblock: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    file: PathBuf,
    /// Expected N; must match the file header when given.
    #[arg(long)]
    n: Option<usize>,
    /// Expected V; must match the file header when given.
    #[arg(long)]
    v: Option<usize>,
    /// Criterion deciding the exit code.
    #[arg(long, default_value = "1")]
    criterion: String,
    /// Smallest acceptable circular gap for criterion 3.
    #[arg(long = "min-gap", default_value_t = 1)]
    min_gap: usize,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    v: usize,
    #[arg(long)]
    u: usize,
    #[arg(long)]
    partition: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let mut config = match &args.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    for (key, value) in args.overrides() {
        if let Some(value) = value {
            config.set(key, value)?;
        }
    }
    let experiment = Experiment::new(config)?;
    if let Some(path) = &args.partition_out {
        experiment.pattern().write_csv(BufWriter::new(File::create(path)?))?;
    }
    let table = experiment.run()?;
    let mut out = open_output(args.out.as_deref())?;
    table.write_csv(&mut out)?;
    out.flush()?;

    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    for p in [1e-2, 1e-3] {
        let fmt = |c| {
            interpolate_papr_at(&table, p, c)
                .map(|v| format!("{:.3} dB", v.value()))
                .unwrap_or_else(|_| "n/a".into())
        };
        eprintln!(
            "CCDF {p:e}: original {}, selected {}",
            fmt(CcdfColumn::Original),
            fmt(CcdfColumn::Selected)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn acf(args: &AcfArgs) -> Result<ExitCode> {
    let pattern = match args.partition.trim().to_ascii_lowercase().as_str() {
        "mseq" | "m-sequence" => m_sequence_pattern(args.n, args.v)?,
        other => make_pattern(other.parse()?, args.n, args.v, Seed(args.seed))?,
    };
    let rows = acf_table(&pattern, args.subblock)?;
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "m,numeric,closed_form,deviation")?;
    for r in rows {
        let closed = r.closed_form.map(|c| c.to_string()).unwrap_or_default();
        let dev = r.deviation().map(|d| d.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{closed},{dev}", r.lag, r.numeric)?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn check_svsets(args: &CheckArgs) -> Result<ExitCode> {
    let criterion: Criterion = args.criterion.parse()?;
    let c = read_sv_file(BufReader::new(File::open(&args.file)?))?;
    if args.n.is_some_and(|n| n != c.n()) || args.v.is_some_and(|v| v != c.v_count()) {
        return Err(Error::Config(format!(
            "file header says n={}, v={}",
            c.n(),
            c.v_count()
        )));
    }

    let verdict = |ok: bool| if ok { "pass" } else { "fail" };
    println!("n={} v={} u={}", c.n(), c.v_count(), c.u_count());
    for (name, report) in [("criterion 1", check_criterion1(&c)), ("criterion 2", check_criterion2(&c))] {
        println!("{name}: {}", verdict(report.satisfied));
        for v in &report.violations {
            println!("  {v}");
        }
    }
    match criterion3_score(&c) {
        Ok(score) => println!(
            "criterion 3: {} ({score})",
            verdict(score.min_circular_gap >= args.min_gap)
        ),
        Err(_) => println!("criterion 3: fail (criterion 1 does not hold)"),
    }

    Ok(if check(&c, criterion, args.min_gap) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn search_svsets(args: &SearchArgs) -> Result<ExitCode> {
    let kind: PartitionKind = args.partition.parse()?;
    let c = search_sv_collection(args.n, args.v, args.u, kind, Seed(args.seed), args.iterations)?;
    let mut out = open_output(args.out.as_deref())?;
    write_sv_file(&c, &mut out)?;
    out.flush()?;
    if let Ok(score) = criterion3_score(&c) {
        eprintln!("criterion 3 score: {score}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Acf(a) => acf(a),
        Command::CheckSvsets(a) => check_svsets(a),
        Command::SearchSvsets(a) => search_svsets(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
