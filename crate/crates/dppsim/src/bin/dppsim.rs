//! Command-line front end: sampling runs, bound reports, transport
//! distances, batch statistics, scatter plots, and scaling benchmarks.
//!
//! Exit codes: 0 on success, 2 for usage, configuration, or file problems,
//! 3 when a numerical routine fails.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use dppsim::active_set::tail_mass;
use dppsim::diagnostics::{count_moments, intensity_profile};
use dppsim::error::{Error, Result};
use dppsim::formats;
use dppsim::kernel::{GinibreSpectrum, SpectrumParams};
use dppsim::rng::SampleStream;
use dppsim::sampler::{sample_ginibre, SamplerMode, SamplerOptions};
use dppsim::transport::{
    approximation_bound, cardinality_lower_bound, kr_truncation_bound, quadratic_matching_cost,
    tv_config_distance, Configuration,
};

#[derive(Parser)]
#[command(
    name = "dppsim",
    version,
    about = "Sample the Ginibre point process on a disc and quantify approximation accuracy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples; one output file per replication plus a manifest.
    Sample(SampleArgs),
    /// Print closed-form accuracy bounds for a disc radius and margin.
    Bounds(BoundsArgs),
    /// Compare two point files in transport metrics.
    Distance(DistanceArgs),
    /// Summarize sample files against the theoretical count and intensity.
    Stats(StatsArgs),
    /// Render a point file as a deterministic SVG scatter.
    Plot(PlotArgs),
    /// Time the sampler across a grid of expected point counts.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Ring,
}

impl From<ModeArg> for SamplerMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Exact => SamplerMode::Exact,
            ModeArg::Ring => SamplerMode::Ring,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Parser)]
struct SampleArgs {
    /// Disc radius R.
    #[arg(long)]
    radius: f64,
    /// Truncation margin c.
    #[arg(long, default_value_t = 3.0)]
    margin: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Condition on a point at the origin.
    #[arg(long)]
    palm: bool,
    /// Independent thinning probability in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    thinning: f64,
    /// Dilation ratio applied to the output points.
    #[arg(long, default_value_t = 1.0)]
    dilation: f64,
    /// Base seed; drawn from entropy and echoed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    replications: usize,
    /// CDF inversion tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Output stem; files get a seed and replication suffix.
    #[arg(long, default_value = "sample")]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Parser)]
struct BoundsArgs {
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value_t = 3.0)]
    margin: f64,
}

#[derive(Parser)]
struct DistanceArgs {
    left: PathBuf,
    right: PathBuf,
    /// Points closer than this count as equal in the symmetric difference.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
}

#[derive(Parser)]
struct StatsArgs {
    /// Sample files (CSV or JSON), e.g. a shell glob.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value_t = 3.0)]
    margin: f64,
    #[arg(long)]
    palm: bool,
    #[arg(long, default_value_t = 1.0)]
    thinning: f64,
    /// Annulus count of the intensity profile.
    #[arg(long, default_value_t = 12)]
    bins: usize,
}

#[derive(Parser)]
struct PlotArgs {
    input: PathBuf,
    /// Output SVG path; defaults to the input with extension .svg.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Disc radius of the outline; defaults to JSON metadata when present.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Parser)]
struct BenchArgs {
    /// Expected point counts to target (radius = √count).
    #[arg(long, value_delimiter = ',', default_values_t = vec![64, 128, 256, 512, 1024])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3.0)]
    margin: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Ring)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replications: usize,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Per-step timing CSV.
    #[arg(long, default_value = "bench.csv")]
    output: PathBuf,
}

fn main() -> ExitCode {
    // Die quietly when stdout is a pipe the reader closed early
    // (`dppsim stats ... | head`); the default Rust behavior is a panic
    // with a backtrace on the first failed print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    if let Ok(threads) = std::env::var("DPPSIM_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                // A second build_global is harmless; the first pool wins.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: DPPSIM_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => run_sample(args),
        Command::Bounds(args) => run_bounds(args),
        Command::Distance(args) => run_distance(args),
        Command::Stats(args) => run_stats(args),
        Command::Plot(args) => run_plot(args),
        Command::Bench(args) => run_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_numerical() { 3 } else { 2 })
        }
    }
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if !(tolerance > 0.0 && tolerance <= 1e-6) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must lie in (0, 1e-6], got {tolerance}"
        )));
    }
    Ok(())
}

fn spectrum_params(radius: f64, margin: f64, palm: bool, thinning: f64) -> SpectrumParams {
    let mut params = SpectrumParams::new(radius).with_margin(margin);
    params.palm = palm;
    params.thinning = thinning;
    params
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|err| Error::Parse(format!("cannot read {}: {err}", path.display())))
}

/// Reads a point file, dispatching on the extension (.csv or .json).
fn load_points(path: &Path) -> Result<Vec<Complex64>> {
    let text = read_file(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => formats::points_from_csv(&text),
        Some("json") => formats::record_from_json(&text)?.points(),
        other => Err(Error::Parse(format!(
            "cannot infer format of {} (extension {:?}); use .csv or .json",
            path.display(),
            other.unwrap_or("none")
        ))),
    }
}

fn load_configuration(path: &Path) -> Result<Configuration> {
    Configuration::new(load_points(path)?)
}

#[derive(serde::Serialize)]
struct ManifestEntry {
    file: String,
    stream: u64,
    n_points: usize,
}

#[derive(serde::Serialize)]
struct Manifest {
    command: &'static str,
    tool_version: &'static str,
    radius: f64,
    margin: f64,
    mode: &'static str,
    palm: bool,
    thinning: f64,
    dilation: f64,
    seed: u64,
    replications: usize,
    tolerance: f64,
    format: &'static str,
    files: Vec<ManifestEntry>,
}

fn run_sample(args: SampleArgs) -> Result<()> {
    check_tolerance(args.tolerance)?;
    let seed = args.seed.unwrap_or_else(rand::random::<u64>);
    if args.replications == 0 {
        return Err(Error::InvalidConfig("need at least one replication".into()));
    }
    let params = spectrum_params(args.radius, args.margin, args.palm, args.thinning);
    let params = SpectrumParams {
        dilation: args.dilation,
        ..params
    };
    let mode: SamplerMode = args.mode.into();
    let mut options = SamplerOptions::new(mode);
    options.cdf_tolerance = args.tolerance;
    // Validate parameters once up front so a bad config fails before any
    // file is written.
    GinibreSpectrum::build(params)?;

    let extension = match args.format {
        FormatArg::Csv => "csv",
        FormatArg::Json => "json",
    };
    let stem = args.output.display().to_string();
    if let Some(parent) = args.output.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let entries: Vec<ManifestEntry> = (0..args.replications)
        .into_par_iter()
        .map(|rep| -> Result<ManifestEntry> {
            let mut stream = SampleStream::substream(seed, rep as u64);
            let sample = sample_ginibre(params, &options, &mut stream)?;
            let file = format!("{stem}_{seed}_{rep:04}.{extension}");
            let text = match args.format {
                FormatArg::Csv => formats::points_to_csv(&sample.points),
                FormatArg::Json => formats::sample_to_json(&sample)?,
            };
            std::fs::write(&file, text)?;
            Ok(ManifestEntry {
                file,
                stream: rep as u64,
                n_points: sample.points.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = Manifest {
        command: "sample",
        tool_version: dppsim::TOOL_VERSION,
        radius: args.radius,
        margin: args.margin,
        mode: mode.as_str(),
        palm: args.palm,
        thinning: args.thinning,
        dilation: args.dilation,
        seed,
        replications: args.replications,
        tolerance: args.tolerance,
        format: extension,
        files: entries,
    };
    let manifest_path = format!("{stem}_{seed}_manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&manifest_path, text)?;
    println!("seed: {seed}");
    for entry in &manifest.files {
        println!("wrote {} ({} points)", entry.file, entry.n_points);
    }
    println!("wrote {manifest_path}");
    Ok(())
}

fn run_bounds(args: BoundsArgs) -> Result<()> {
    let params = spectrum_params(args.radius, args.margin, false, 1.0);
    let spectrum = GinibreSpectrum::build(params)?;
    let basis = dppsim::kernel::RingBasis::build(spectrum.clone())?;
    let tail = tail_mass(&spectrum, spectrum.truncation())?;
    let kr = kr_truncation_bound(args.radius, args.margin)?;
    let cardinality = cardinality_lower_bound(args.radius, args.margin)?;
    let approximation = approximation_bound(&basis);
    println!("radius                    {}", args.radius);
    println!("margin                    {}", args.margin);
    println!("truncation                {}", spectrum.truncation());
    println!("trace                     {}", spectrum.trace());
    println!("tail_mass                 {}", tail.total());
    println!("kr_truncation_bound       {kr}");
    println!("cardinality_lower_bound   {cardinality}");
    println!("approximation_bound       {}", approximation.total);
    println!("approximation_scale       {}", approximation.reference_scale);
    Ok(())
}

fn run_distance(args: DistanceArgs) -> Result<()> {
    let left = load_configuration(&args.left)?;
    let right = load_configuration(&args.right)?;
    let tv = tv_config_distance(&left, &right, args.tol)?;
    println!("cardinality               {} vs {}", left.len(), right.len());
    println!("tv_config_distance        {tv}");
    if left.len() == right.len() {
        let matching = quadratic_matching_cost(&left, &right)?;
        println!("quadratic_matching_cost   {}", matching.cost);
    } else {
        println!("quadratic_matching_cost   infinite (cardinality mismatch)");
    }
    Ok(())
}

fn run_stats(args: StatsArgs) -> Result<()> {
    let params = spectrum_params(args.radius, args.margin, args.palm, args.thinning);
    let spectrum = GinibreSpectrum::build(params)?;
    let samples: Vec<Configuration> = args
        .files
        .iter()
        .map(|path| load_configuration(path))
        .collect::<Result<Vec<_>>>()?;
    println!("samples                   {}", samples.len());
    let trace = spectrum.trace();
    let bernoulli_variance: f64 = spectrum
        .eigenvalues()
        .iter()
        .map(|&l| l * (1.0 - l))
        .sum();
    if samples.len() >= 2 {
        let (mean, variance) = count_moments(&samples)?;
        println!("count mean                {mean}  (theory {trace})");
        println!("count variance            {variance}  (theory {bernoulli_variance})");
    } else {
        println!("count mean                {}  (theory {trace}; need 2+ files for moments)",
            samples[0].len());
    }
    let profile = intensity_profile(&samples, &spectrum, args.bins)?;
    println!("intensity profile ({} points total)", profile.total_points);
    println!("{:>10} {:>10} {:>14} {:>14}", "r_lo", "r_hi", "empirical", "theoretical");
    for (edge, (emp, theo)) in profile
        .edges
        .windows(2)
        .zip(profile.empirical.iter().zip(&profile.theoretical))
    {
        println!("{:>10.4} {:>10.4} {:>14.8} {:>14.8}", edge[0], edge[1], emp, theo);
    }
    Ok(())
}

fn run_plot(args: PlotArgs) -> Result<()> {
    let text = read_file(&args.input)?;
    let (points, meta_radius) = match args.input.extension().and_then(|e| e.to_str()) {
        Some("csv") => (formats::points_from_csv(&text)?, None),
        Some("json") => {
            let record = formats::record_from_json(&text)?;
            let radius = record.radius;
            (record.points()?, Some(radius))
        }
        other => {
            return Err(Error::Parse(format!(
                "cannot infer format of {} (extension {:?}); use .csv or .json",
                args.input.display(),
                other.unwrap_or("none")
            )))
        }
    };
    let radius = match args.radius.or(meta_radius) {
        Some(r) => r,
        None => {
            return Err(Error::InvalidConfig(
                "CSV input carries no radius; pass --radius".into(),
            ))
        }
    };
    let svg = formats::svg_scatter(&points, radius)?;
    let output = args
        .output
        .unwrap_or_else(|| args.input.with_extension("svg"));
    std::fs::write(&output, svg)?;
    println!("wrote {} ({} points)", output.display(), points.len());
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<()> {
    check_tolerance(args.tolerance)?;
    if args.sizes.is_empty() || args.replications == 0 {
        return Err(Error::InvalidConfig(
            "need at least one size and one replication".into(),
        ));
    }
    let mode: SamplerMode = args.mode.into();
    let mut options = SamplerOptions::new(mode);
    options.cdf_tolerance = args.tolerance;
    options.collect_costs = true;
    let mut csv = String::from("target,mode,replication,points,solve_ns,frame_ns,update_ns,wall_ns\n");
    for &size in &args.sizes {
        let radius = (size as f64).sqrt();
        let params = SpectrumParams::new(radius).with_margin(args.margin);
        for rep in 0..args.replications {
            let mut stream = SampleStream::substream(args.seed, rep as u64);
            let started = std::time::Instant::now();
            let sample = sample_ginibre(params, &options, &mut stream)?;
            let wall_ns = started.elapsed().as_nanos();
            let costs = sample
                .diagnostics
                .costs
                .as_deref()
                .expect("bench enables cost collection");
            let solve: u64 = costs.iter().map(|c| c.solve_nanos).sum();
            let frame: u64 = costs.iter().map(|c| c.frame_nanos).sum();
            let update: u64 = costs.iter().map(|c| c.update_nanos).sum();
            writeln!(
                csv,
                "{size},{},{rep},{},{solve},{frame},{update},{wall_ns}",
                mode.as_str(),
                sample.points.len()
            )
            .expect("writing to a string cannot fail");
            println!(
                "size {size}: {} points in {:.3} s (solve {:.3} s, frame {:.3} s, update {:.3} s)",
                sample.points.len(),
                wall_ns as f64 * 1e-9,
                solve as f64 * 1e-9,
                frame as f64 * 1e-9,
                update as f64 * 1e-9,
            );
        }
    }
    std::fs::write(&args.output, csv)?;
    println!("wrote {}", args.output.display());
    Ok(())
}
