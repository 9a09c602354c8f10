//! Command implementations behind the `gasvm` binary.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use gasvm_core::data::{build_matrix, feature_names, user_counts, Drug, DrugEncoding, Record};
use gasvm_core::report::baseline_svm;

use crate::config::Config;
use crate::parse::parse_records;
use crate::reports::{self, ReportKind};
use crate::runner::{prepare, run_sweep, thread_pool};
use crate::store::{sha256_file, Manifest, RunStore, TOOL_VERSION};
use crate::table1;

#[derive(Debug, Parser)]
#[command(name = "gasvm", version, about = "GA-tuned RBF SVMs on the drug-consumption survey")]
pub struct Cli {
    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a data file, printing per-drug user counts.
    Ingest(IngestArgs),
    /// Run (or resume) a weight-condition sweep into a run directory.
    Run(RunArgs),
    /// Emit a CSV report from a run directory.
    Report(ReportArgs),
    /// Print the default configuration.
    Config,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "heroin")]
    pub target: String,
    /// Fail unless the counts match the published user table.
    #[arg(long)]
    pub expect_table1: bool,
    /// Write the predictor matrix for `--target` as CSV.
    #[arg(long, value_name = "FILE")]
    pub export_matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "binary")]
    pub encoding: EncodingArg,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum EncodingArg {
    Binary,
    Ordinal,
}

impl From<EncodingArg> for DrugEncoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Binary => DrugEncoding::Binary,
            EncodingArg::Ordinal => DrugEncoding::Ordinal,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Data file; overrides `data` in the configuration.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Run directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed; overrides `seed` in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// One of averages, features, best, curves, stats, baseline.
    pub kind: ReportKind,
    /// Run directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Data file for `baseline`; defaults to the one in the manifest.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

/// How a successful command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// `--expect-table1` found differences.
    Mismatch,
    /// The sweep finished but some runs failed; rerun to retry them.
    RunsFailed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Mismatch | Status::RunsFailed => 2,
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> anyhow::Result<Status> {
    match cli.command {
        Command::Ingest(args) => ingest(&args, out),
        Command::Run(args) => run(&args),
        Command::Report(args) => report(&args, out),
        Command::Config => {
            out.write_all(Config::default().to_toml().as_bytes())?;
            Ok(Status::Ok)
        }
    }
}

pub fn read_records(path: &Path) -> anyhow::Result<Vec<Record>> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_records(BufReader::new(file)).with_context(|| format!("{}", path.display()))
}

fn ingest(args: &IngestArgs, out: &mut dyn Write) -> anyhow::Result<Status> {
    let target: Drug = args.target.parse()?;
    let records = read_records(&args.data)?;
    log::info!("{}: {} records", args.data.display(), records.len());
    let counts = user_counts(&records);

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["drug", "users", "percent", "role"];
    if args.expect_table1 {
        header.extend(["expected_users", "expected_percent", "match"]);
    }
    w.write_record(&header)?;
    let mismatches = table1::compare(&counts);
    for (c, &(_, exp_users, exp_percent)) in counts.iter().zip(&table1::EXPECTED) {
        let mut row = vec![
            c.drug.name().to_string(),
            c.users.to_string(),
            format!("{:.2}", c.percent()),
            if c.drug == target { "target" } else { "" }.to_string(),
        ];
        if args.expect_table1 {
            let ok = !mismatches.iter().any(|m| m.drug == c.drug);
            row.extend([
                exp_users.to_string(),
                format!("{exp_percent:.2}"),
                if ok { "yes" } else { "NO" }.into(),
            ]);
        }
        w.write_record(&row)?;
    }
    out.write_all(&w.into_inner()?)?;

    if let Some(path) = &args.export_matrix {
        let ds = build_matrix(&records, target, args.encoding.into());
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
        let mut header = vec!["id".to_string()];
        header.extend(ds.feature_names.iter().cloned());
        header.push(format!("{} user", target.name()));
        w.write_record(&header)?;
        for (i, r) in records.iter().enumerate() {
            let mut row = vec![r.id.to_string()];
            row.extend(ds.x.row(i).iter().map(|v| v.to_string()));
            row.push(u8::from(ds.y[i].is_user()).to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        log::info!("wrote {} ({} x {})", path.display(), ds.len(), ds.feature_count());
    }

    if args.expect_table1 {
        if records.len() != table1::EXPECTED_TOTAL {
            log::error!("expected {} records, found {}", table1::EXPECTED_TOTAL, records.len());
        }
        for m in &mismatches {
            log::error!(
                "{}: expected {} ({:.2}%), found {} ({:.2}%)",
                m.drug,
                m.expected.0,
                m.expected.1,
                m.found.0,
                m.found.1
            );
        }
        if !mismatches.is_empty() || records.len() != table1::EXPECTED_TOTAL {
            return Ok(Status::Mismatch);
        }
        log::info!("all {} rows match the published table", table1::EXPECTED.len());
    }
    Ok(Status::Ok)
}

fn now_rfc3339() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_default()
}

fn run(args: &RunArgs) -> anyhow::Result<Status> {
    let mut cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let Some(data) = args.data.clone().or_else(|| cfg.data.clone()) else {
        bail!("no data file: pass --data or set `data` in the configuration");
    };
    // the manifest records the data file separately
    cfg.data = None;
    let exp = cfg.experiment()?;

    let records = read_records(&data)?;
    let prepared = prepare(&records, &exp)?;
    log::info!(
        "{} records, target {} with {} users, fold sizes {:?}",
        prepared.dataset.len(),
        exp.target,
        prepared.dataset.positives(),
        prepared.split.fold_sizes()
    );

    let manifest = Manifest {
        tool_version: TOOL_VERSION.into(),
        seed: cfg.seed,
        fold_seed: exp.fold_seed(),
        data_path: fs::canonicalize(&data).unwrap_or(data.clone()),
        data_sha256: sha256_file(&data)?,
        created_at: now_rfc3339(),
        config: cfg,
    };
    let store = RunStore::create_or_resume(&args.out, &manifest)?;
    let pool = thread_pool(args.workers)?;
    log::info!(
        "{} runs over conditions {} with {} workers",
        exp.run_keys().len(),
        exp.conditions.iter().map(|w| w.label()).collect::<Vec<_>>().join(", "),
        pool.current_num_threads()
    );
    let summary = run_sweep(&store, &prepared, &exp, &pool)?;
    log::info!(
        "{} completed, {} already present, {} failed",
        summary.completed,
        summary.skipped,
        summary.failed.len()
    );
    if summary.failed.is_empty() {
        Ok(Status::Ok)
    } else {
        Ok(Status::RunsFailed)
    }
}

fn write_report(store: &RunStore, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    let dir = store.reports_dir();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(format!("{name}.csv"));
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn report(args: &ReportArgs, out: &mut dyn Write) -> anyhow::Result<Status> {
    let store = RunStore::open(&args.out)?;
    let manifest = store.manifest()?;
    let exp = manifest.config.experiment()?;
    let names = feature_names(exp.target);

    if args.kind == ReportKind::Baseline {
        let data = args.data.clone().unwrap_or_else(|| manifest.data_path.clone());
        let digest = sha256_file(&data)?;
        if digest != manifest.data_sha256 {
            bail!("{} does not match the data checksum in the manifest", data.display());
        }
        let prepared = prepare(&read_records(&data)?, &exp)?;
        let result = baseline_svm(
            &prepared.dataset,
            &prepared.split,
            manifest.config.baseline_params()?,
            &exp.solver,
        )?;
        let csv = reports::baseline(&result)?;
        write_report(&store, "baseline", &csv)?;
        out.write_all(csv.as_bytes())?;
        return Ok(Status::Ok);
    }

    let (records, problems) = store.audit(&exp.run_keys())?;
    for p in &problems {
        log::warn!("{p}");
    }
    if records.is_empty() {
        bail!("{} has no readable records", args.out.display());
    }
    log::info!("{} records, {} problems", records.len(), problems.len());
    let primary = match args.kind {
        ReportKind::Averages => reports::averages(&records)?,
        ReportKind::Features => reports::features(&records, &names)?,
        ReportKind::Curves => reports::curves(&records)?,
        ReportKind::Best => {
            let (summary, selected) = reports::best(&records, &names)?;
            write_report(&store, "best_features", &selected)?;
            summary
        }
        ReportKind::Stats => {
            let (table, long) = reports::stats(&records)?;
            write_report(&store, "stats_long", &long)?;
            table
        }
        ReportKind::Baseline => unreachable!("handled above"),
    };
    write_report(&store, args.kind.name(), &primary)?;
    out.write_all(primary.as_bytes())?;
    Ok(Status::Ok)
}
