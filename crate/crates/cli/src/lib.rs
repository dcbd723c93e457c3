//! The `opengrid` command line: dataset checks, direction recovery,
//! demand allocation, the flow LP and renderings.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use opengrid_core::analysis::{
    direction_diff, load_grid, orient_scenario, render_dot, render_geojson, render_svg,
    solve_scenario, LoadedGrid, PipelineError, PipelineOptions, RenderStyle, Summary,
};
use opengrid_core::demand::{
    allocate_demand_index, discover_year_loads, read_year_loads, similarity_report,
    write_similarity_csv, DemandError, DEFAULT_URBAN_SHARE,
};
use opengrid_core::direction::DEFAULT_SEED;
use opengrid_core::dispatch::{DispatchError, ScenarioMode};
use opengrid_core::ingest::{
    fetch_dataset, parse_hourly_loads, validate_dataset, DatasetFiles, FetchError, FetchManifest,
    HttpTransport, IngestError,
};

#[derive(Parser, Debug)]
#[command(
    name = "opengrid",
    version,
    about = "Reconstruct power flow directions and dispatch from open grid data"
)]
struct Cli {
    /// Directory holding the dataset CSV files.
    #[arg(long, global = true, default_value = ".")]
    data_dir: PathBuf,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Fraction of each area's load assigned to urban buses.
    #[arg(long, global = true, default_value_t = DEFAULT_URBAN_SHARE)]
    urban_share: f64,
    /// Generation scenario; defaults to `timepoint` when --snapshot is given.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Generator outputs (`generator_id,output_mw`) for time-point mode.
    #[arg(long, global = true)]
    snapshot: Option<PathBuf>,
    /// Output file, or output directory for `solve`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Geojson)]
    format: Format,
    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Max,
    Timepoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Geojson,
    Dot,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Download manifest entries into a cache and copy them into --data-dir.
    Fetch {
        /// Lines of `name = url [sha256:<hex>]`.
        #[arg(long)]
        manifest: PathBuf,
        /// Defaults to `<data-dir>/.cache`.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Parse the dataset and list consistency findings.
    Validate,
    /// Assign a direction to every line.
    Orient,
    /// Compare yearly area loads against area population.
    Similarity,
    /// Per-bus relative demand index.
    DemandIndex,
    /// Estimate bus loads and solve the flow LP.
    Solve,
    /// Lines whose direction differs from the max-capacity baseline.
    Diff {
        /// Use this time-point snapshot as the baseline instead.
        #[arg(long)]
        baseline_snapshot: Option<PathBuf>,
    },
    /// Draw the solved grid.
    Render,
}

/// A failed run: exit code 1 for bad input, 2 for internal failures.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl CliError {
    fn input(message: impl fmt::Display) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }

    fn internal(message: impl fmt::Display) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        Self::input(e)
    }
}

impl From<DemandError> for CliError {
    fn from(e: DemandError) -> Self {
        Self::input(e)
    }
}

impl From<DispatchError> for CliError {
    fn from(e: DispatchError) -> Self {
        match e {
            DispatchError::SolverStall { .. } | DispatchError::Unbounded => Self::internal(e),
            _ => Self::input(e),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Ingest(e) => e.into(),
            PipelineError::Demand(e) => e.into(),
            PipelineError::Dispatch(e) => e.into(),
        }
    }
}

impl From<FetchError> for CliError {
    fn from(e: FetchError) -> Self {
        match e {
            FetchError::Network { .. } | FetchError::Io { .. } => Self::internal(e),
            _ => Self::input(e),
        }
    }
}

fn write_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::internal(format!("{}: {e}", path.display()))
}

/// Where the primary artifact goes, and with it the summary line.
struct Output<'a> {
    path: Option<&'a Path>,
}

impl Output<'_> {
    fn emit(&self, bytes: &[u8], summary: &Summary) -> Result<(), CliError> {
        match self.path {
            Some(p) => {
                fs::write(p, bytes).map_err(write_err(p))?;
                println!("{summary}");
            }
            None => {
                io::stdout().write_all(bytes).map_err(CliError::internal)?;
                eprintln!("{summary}");
            }
        }
        Ok(())
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(CliError::internal)?;
    Ok(buf)
}

impl Cli {
    fn resolve_snapshot(&self, path: &Path) -> PathBuf {
        if path.is_relative() && !path.exists() {
            let in_data = self.data_dir.join(path);
            if in_data.exists() {
                return in_data;
            }
        }
        path.to_path_buf()
    }

    fn options(&self) -> Result<PipelineOptions, CliError> {
        if !(0.0..=1.0).contains(&self.urban_share) {
            return Err(CliError::input(format!(
                "--urban-share must lie in [0, 1], got {}",
                self.urban_share
            )));
        }
        let mode = match self.mode {
            Some(Mode::Max) => ScenarioMode::Max,
            Some(Mode::Timepoint) => ScenarioMode::TimePoint,
            None if self.snapshot.is_some() => ScenarioMode::TimePoint,
            None => ScenarioMode::Max,
        };
        if mode == ScenarioMode::Max && self.snapshot.is_some() {
            log::warn!("--snapshot is ignored in max mode");
        }
        Ok(PipelineOptions {
            seed: self.seed,
            urban_share: self.urban_share,
            mode,
            snapshot_file: self.snapshot.as_deref().map(|p| self.resolve_snapshot(p)),
        })
    }

    fn output(&self) -> Output<'_> {
        Output {
            path: self.out.as_deref(),
        }
    }
}

/// Parses `argv` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();

    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fetch {
            manifest,
            cache_dir,
        } => fetch(cli, manifest, cache_dir.as_deref()),
        Command::Validate => validate(cli),
        Command::Orient => orient(cli),
        Command::Similarity => similarity(cli),
        Command::DemandIndex => demand_index(cli),
        Command::Solve => solve(cli),
        Command::Diff { baseline_snapshot } => diff(cli, baseline_snapshot.as_deref()),
        Command::Render => render(cli),
    }
}

fn fetch(cli: &Cli, manifest: &Path, cache_dir: Option<&Path>) -> Result<(), CliError> {
    let manifest = FetchManifest::from_file(manifest)?;
    let cache = cache_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cli.data_dir.join(".cache"));
    let cached = fetch_dataset(&manifest, &cache, &HttpTransport)?;
    fs::create_dir_all(&cli.data_dir).map_err(write_err(&cli.data_dir))?;
    let mut copied = 0;
    for (entry, src) in manifest.entries.iter().zip(&cached) {
        let dst = cli.data_dir.join(&entry.name);
        let bytes = fs::read(src).map_err(write_err(src))?;
        if dst.exists() {
            let current = fs::read(&dst).map_err(write_err(&dst))?;
            if current != bytes {
                return Err(CliError::input(format!(
                    "{} already exists with different content; not overwriting",
                    dst.display()
                )));
            }
            continue;
        }
        fs::write(&dst, &bytes).map_err(write_err(&dst))?;
        copied += 1;
    }
    log::info!("{copied} new files in {}", cli.data_dir.display());
    println!("{}", Summary::default());
    Ok(())
}

fn validate(cli: &Cli) -> Result<(), CliError> {
    let loaded = load_grid(&cli.data_dir)?;
    let report = validate_dataset(&loaded.dataset);
    let mut text = report.to_string();
    if !text.is_empty() && !text.ends_with('\n') {
        text.push('\n');
    }
    let summary = Summary {
        lines: Some(loaded.grid.line_count()),
        ..Default::default()
    };
    cli.output().emit(text.as_bytes(), &summary)
}

fn orient(cli: &Cli) -> Result<(), CliError> {
    let loaded = load_grid(&cli.data_dir)?;
    let scenario = orient_scenario(&loaded, &cli.options()?)?;
    let o = &scenario.orientation;
    for line in &o.conflicts {
        log::info!("generator rule overrode a voltage rule on {line}");
    }
    let bytes = csv_bytes(|b| o.write_csv(b))?;
    let summary = Summary {
        lines: Some(o.len()),
        directed_heuristic: Some(o.heuristic_count()),
        ..Default::default()
    };
    cli.output().emit(&bytes, &summary)
}

fn similarity(cli: &Cli) -> Result<(), CliError> {
    let loaded = load_grid(&cli.data_dir)?;
    let files = discover_year_loads(&cli.data_dir)?;
    let years = if files.is_empty() {
        let path = cli.data_dir.join(DatasetFiles::HOURLY_LOAD);
        vec![("current".to_string(), parse_hourly_loads(&path)?)]
    } else {
        read_year_loads(&files)?
    };
    let rows = similarity_report(&loaded.dataset, &years)?;
    let bytes = csv_bytes(|b| write_similarity_csv(&rows, b))?;
    cli.output().emit(&bytes, &Summary::default())
}

fn demand_index(cli: &Cli) -> Result<(), CliError> {
    let loaded = load_grid(&cli.data_dir)?;
    let out = allocate_demand_index(&loaded.dataset, cli.options()?.urban_share)?;
    for area in &out.areas_without_buses {
        log::warn!("planning area {area} has load but no buses");
    }
    let bytes = csv_bytes(|b| out.index.write_csv(b))?;
    cli.output().emit(&bytes, &Summary::default())
}

fn solve(cli: &Cli) -> Result<(), CliError> {
    let options = cli.options()?;
    let loaded = load_grid(&cli.data_dir)?;
    let scenario = orient_scenario(&loaded, &options)?;
    let (_, bus_load, solution) = solve_scenario(&loaded, &scenario, options.urban_share)?;
    for bus in &bus_load.zero_index_buses {
        log::warn!("generation at {bus} reaches no demand; kept on the bus");
    }
    let summary = Summary {
        objective: Some(solution.objective),
        max_residual: Some(solution.max_residual),
        lines: Some(scenario.orientation.len()),
        directed_heuristic: Some(scenario.orientation.heuristic_count()),
        changed: None,
    };
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(write_err(dir))?;
            let files: [(&str, Vec<u8>); 4] = [
                ("flows.csv", csv_bytes(|b| solution.write_flows_csv(b))?),
                ("buses.csv", csv_bytes(|b| solution.write_buses_csv(b))?),
                (
                    "orientation.csv",
                    csv_bytes(|b| scenario.orientation.write_csv(b))?,
                ),
                ("summary.txt", solution.summary_text().into_bytes()),
            ];
            for (name, bytes) in files {
                let p = dir.join(name);
                fs::write(&p, bytes).map_err(write_err(&p))?;
            }
            println!("{summary}");
        }
        None => {
            print!("{}", solution.summary_text());
            println!("{summary}");
        }
    }
    Ok(())
}

fn diff(cli: &Cli, baseline_snapshot: Option<&Path>) -> Result<(), CliError> {
    let options = cli.options()?;
    let loaded: LoadedGrid = load_grid(&cli.data_dir)?;
    let baseline_options = PipelineOptions {
        mode: if baseline_snapshot.is_some() {
            ScenarioMode::TimePoint
        } else {
            ScenarioMode::Max
        },
        snapshot_file: baseline_snapshot.map(|p| cli.resolve_snapshot(p)),
        ..options.clone()
    };
    let baseline = orient_scenario(&loaded, &baseline_options)?;
    let current = orient_scenario(&loaded, &options)?;
    let d =
        direction_diff(&baseline.orientation, &current.orientation).map_err(CliError::internal)?;
    let bytes = csv_bytes(|b| d.write_csv(b))?;
    let summary = Summary {
        lines: Some(d.total),
        directed_heuristic: Some(current.orientation.heuristic_count()),
        changed: Some(d.changed()),
        ..Default::default()
    };
    cli.output().emit(&bytes, &summary)
}

fn render(cli: &Cli) -> Result<(), CliError> {
    let options = cli.options()?;
    let loaded = load_grid(&cli.data_dir)?;
    let scenario = orient_scenario(&loaded, &options)?;
    let (_, _, solution) = solve_scenario(&loaded, &scenario, options.urban_share)?;
    let style = RenderStyle::default();
    let (ds, grid, o) = (&loaded.dataset, &loaded.grid, &scenario.orientation);
    let text = match cli.format {
        Format::Geojson => {
            let doc =
                render_geojson(ds, grid, o, Some(&solution), &style).map_err(CliError::internal)?;
            let mut s = serde_json::to_string_pretty(&doc).map_err(CliError::internal)?;
            s.push('\n');
            s
        }
        Format::Dot => render_dot(grid, o).map_err(CliError::internal)?,
        Format::Svg => {
            render_svg(ds, grid, o, Some(&solution), &style).map_err(CliError::internal)?
        }
    };
    let summary = Summary {
        objective: Some(solution.objective),
        max_residual: Some(solution.max_residual),
        lines: Some(o.len()),
        directed_heuristic: Some(o.heuristic_count()),
        changed: None,
    };
    cli.output().emit(text.as_bytes(), &summary)
}
