use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use charrep::pipeline::{emit_plotdata, run_pipeline, ComparisonReport, Figure, RunConfig, Stage, Workspace};
use charrep::{fixtures, Error};

/// Worker count for per-source stages; results do not depend on it.
const WORKERS_ENV: &str = "CHARREP_WORKERS";

#[derive(Parser)]
#[command(name = "charrep", version, about = "Compare character representation across a source text and its retellings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Score axes against the reference poles after alignment.
    #[arg(long)]
    aligned_axes: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check every corpus, writing ingest.json.
    Ingest(Common),
    /// Count alias mentions per source.
    Mentions(Common),
    /// Select the common character set from mentions.csv.
    Charset(Common),
    /// Build co-occurrence networks for the character set.
    Network(Common),
    /// Compute centrality metrics and rank shifts from the network files.
    Metrics(Common),
    /// Train one embedding model per source.
    Embed(Common),
    /// Align every model to the reference and compare names.
    Align(Common),
    /// Rank characters on every axis in the last two models.
    Axes(Common),
    /// Extract descriptions from the dependency parses.
    Describe(Common),
    /// Weighted log-odds between the first two description contexts.
    Logodds(Common),
    /// Run every stage and write report.json.
    Report(Common),
    /// Write plot CSV files from report.json.
    Plotdata {
        #[command(flatten)]
        common: Common,
        /// One of slope_ranks, name_similarity, axis_shift; all if omitted.
        #[arg(long)]
        figure: Option<String>,
    },
    /// Write the bundled mini corpus and print its content hash.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn load_config(c: &Common) -> Result<RunConfig, Failure> {
    let usage = |e: Error| Failure::Usage(e.to_string());
    let mut cfg = RunConfig::load(&c.config).map_err(usage)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    cfg.aligned_axes |= c.aligned_axes;
    cfg.validate().map_err(usage)?;
    cfg.check_paths().map_err(usage)?;
    Ok(cfg)
}

fn run_stage(c: &Common, st: Stage) -> Result<(), Failure> {
    let cfg = load_config(c)?;
    if matches!(st, Stage::Align | Stage::Axes) {
        cfg.require_comparison().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let mut ws = Workspace::new(&cfg)?;
    ws.run_stage(st)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stage = |c: &Common, st| run_stage(c, st);
    match &cli.command {
        Command::Ingest(c) => stage(c, Stage::Ingest),
        Command::Mentions(c) => stage(c, Stage::Mentions),
        Command::Charset(c) => stage(c, Stage::Charset),
        Command::Network(c) => stage(c, Stage::Network),
        Command::Metrics(c) => stage(c, Stage::Metrics),
        Command::Embed(c) => stage(c, Stage::Embed),
        Command::Align(c) => stage(c, Stage::Align),
        Command::Axes(c) => stage(c, Stage::Axes),
        Command::Describe(c) => stage(c, Stage::Describe),
        Command::Logodds(c) => stage(c, Stage::Logodds),
        Command::Report(c) => {
            let cfg = load_config(c)?;
            cfg.require_comparison().map_err(|e| Failure::Usage(e.to_string()))?;
            run_pipeline(&cfg)?;
            println!("{}", cfg.output_dir.join("report.json").display());
            Ok(())
        }
        Command::Plotdata { common, figure } => {
            let cfg = load_config(common)?;
            let figures = match figure {
                Some(f) => vec![f.parse::<Figure>().map_err(|_| Failure::Usage(format!("unknown figure {f:?}")))?],
                None => Figure::ALL.to_vec(),
            };
            let report_path = cfg.output_dir.join("report.json");
            if !report_path.exists() {
                return Err(Failure::Usage(format!("{} is missing; run report first", report_path.display())));
            }
            let report = ComparisonReport::load(&report_path)?;
            for f in figures {
                let p = cfg.output_dir.join(format!("plot_{}.csv", f.as_str()));
                emit_plotdata(&report, f, &p)?;
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Fixtures { out } => {
            let hash = fixtures::write_mini_corpus(out)?;
            println!("{hash}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Ok(n) = std::env::var(WORKERS_ENV) {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {WORKERS_ENV} must be a positive integer");
                return ExitCode::from(1);
            }
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
