use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hcarank::compare::{distribution_stats, size_performance_correlation, ShiftAveraging};
use hcarank::hca::detect_hcas;
use hcarank::ingest::{load_config, load_corpus, CorpusPaths, Warning};
use hcarank::pipeline::{compare_cost_modes, profile, run_assessment, AssessmentResult};
use hcarank::report::{emit_report, emit_report_to_path, Format, Report};
use hcarank::{AssessmentConfig, CostMode, Error, ScoreRow};

#[derive(Parser, Debug)]
#[command(
    name = "hcarank",
    version,
    about = "Rank universities by highly-cited articles per unit of research labor cost"
)]
struct Cli {
    /// TOML file with assessment parameters; defaults apply to missing keys.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory holding publications.csv, authorship.csv, researchers.csv,
    /// taxonomy.csv and salaries.csv.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    data_dir: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    /// Overrides the config file's cost mode.
    #[arg(long, global = true, value_enum)]
    cost_mode: Option<CostModeArg>,

    /// Overrides the share of each cohort counted as highly cited.
    #[arg(long, global = true, value_name = "FRACTION")]
    top_fraction: Option<f64>,

    /// Write the report here instead of standard output.
    #[arg(short, long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Do not print warnings and diagnostics.
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every assessed publication with its averaged citation percentile.
    DetectHca,
    /// League table of one field (SDS).
    RankSds { sds: String },
    /// League table of one discipline (UDA).
    RankUda { uda: String },
    /// League table over all fields.
    RankOverall,
    /// Every field, discipline and overall position of one university.
    Profile { university: String },
    /// Compare salary-weighted and headcount-based rankings.
    CompareCostModes {
        /// Denominator of the mean rank shift.
        #[arg(long, value_enum, default_value_t = ShiftAverage::All)]
        shift_average: ShiftAverage,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CostModeArg {
    Salary,
    YearsOnly,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ShiftAverage {
    /// Every ranked university.
    All,
    /// Only universities whose rank changed.
    Shifters,
}

fn build_config(cli: &Cli) -> Result<AssessmentConfig> {
    let mut config = match &cli.config {
        Some(path) => load_config(path).map_err(Error::from)?,
        None => AssessmentConfig::default(),
    };
    if let Some(mode) = cli.cost_mode {
        config.cost_mode = match mode {
            CostModeArg::Salary => CostMode::Salary,
            CostModeArg::YearsOnly => CostMode::YearsOnly,
        };
    }
    if let Some(fraction) = cli.top_fraction {
        config.hca_top_fraction = fraction;
    }
    config.validate().map_err(Error::from)?;
    Ok(config)
}

fn emit(cli: &Cli, report: &Report) -> Result<()> {
    let format = match cli.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    match &cli.output {
        Some(path) => emit_report_to_path(report, format, path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => emit_report(report, format, BufWriter::new(io::stdout().lock()))?,
    }
    Ok(())
}

fn warn_all(cli: &Cli, warnings: &[Warning]) {
    if cli.quiet {
        return;
    }
    for w in warnings {
        eprintln!("{w}");
    }
}

/// Shape of the score distribution and its link with unit size.
fn diagnose(cli: &Cli, table: &[ScoreRow]) {
    if cli.quiet || table.is_empty() {
        return;
    }
    let scores: Vec<f64> = table.iter().map(|r| r.score).collect();
    let staff: Vec<usize> = table.iter().map(|r| r.staff_count).collect();
    if let Ok(stats) = distribution_stats(&scores) {
        let skew = stats.skewness.map_or("n/a".to_string(), |s| format!("{s:.2}"));
        eprintln!("units: {}  mean: {:.2}  median: {:.2}  skewness: {skew}", stats.n, stats.mean, stats.median);
    }
    match size_performance_correlation(&staff, &scores) {
        Ok(rho) => eprintln!("size/performance spearman: {rho:.2}"),
        Err(e) => eprintln!("size/performance spearman: n/a ({e})"),
    }
}

fn assess(cli: &Cli, config: &AssessmentConfig) -> Result<AssessmentResult> {
    let (corpus, load_report) = load_corpus(&CorpusPaths::in_dir(&cli.data_dir), config)?;
    warn_all(cli, &load_report.warnings);
    let result = run_assessment(&corpus, config)?;
    warn_all(cli, &result.warnings);
    Ok(result)
}

fn run(cli: &Cli) -> Result<()> {
    let config = build_config(cli)?;
    match &cli.command {
        Command::DetectHca => {
            let (corpus, load_report) = load_corpus(&CorpusPaths::in_dir(&cli.data_dir), &config)?;
            warn_all(cli, &load_report.warnings);
            let hcas = detect_hcas(&corpus.publications, &config);
            if !cli.quiet {
                eprintln!("{} of {} publications highly cited", hcas.hca_count(), hcas.len());
            }
            emit(cli, &Report::hcas(&hcas))
        }
        Command::RankSds { sds } => {
            let result = assess(cli, &config)?;
            let table = result
                .sds_tables
                .get(sds)
                .ok_or_else(|| Error::NotFound(format!("SDS {sds} is unknown or below the coverage threshold")))?;
            diagnose(cli, table);
            emit(cli, &Report::league(table))
        }
        Command::RankUda { uda } => {
            let result = assess(cli, &config)?;
            let table = result
                .uda_tables
                .get(uda)
                .ok_or_else(|| Error::NotFound(format!("no assessed field in UDA {uda}")))?;
            diagnose(cli, table);
            emit(cli, &Report::league(table))
        }
        Command::RankOverall => {
            let result = assess(cli, &config)?;
            diagnose(cli, &result.overall_table);
            emit(cli, &Report::league(&result.overall_table))
        }
        Command::Profile { university } => {
            let result = assess(cli, &config)?;
            let rows = profile(&result, university)?;
            emit(cli, &Report::profile(&rows))
        }
        Command::CompareCostModes { shift_average } => {
            let (corpus, load_report) = load_corpus(&CorpusPaths::in_dir(&cli.data_dir), &config)?;
            warn_all(cli, &load_report.warnings);
            let averaging = match shift_average {
                ShiftAverage::All => ShiftAveraging::AllUnits,
                ShiftAverage::Shifters => ShiftAveraging::ShiftersOnly,
            };
            let comparison = compare_cost_modes(&corpus, &config, averaging)?;
            warn_all(cli, &comparison.warnings);
            if comparison.rows.is_empty() {
                return Err(anyhow!("no table has enough units to compare"));
            }
            emit(cli, &Report::comparison(&comparison.rows))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
