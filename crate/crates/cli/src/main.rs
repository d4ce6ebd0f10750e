//! `hers`: segment images into superpixels, replay stored hierarchies,
//! score segmentations and time the solvers.

use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hers_core::hierarchy::{self, MergeHierarchy};
use hers_core::image_io::{self, LabelFormat};
use hers_core::metrics::{self, MetricReport};
use hers_core::{affinity, baseline, AffinityMap, Execution, LabelMap, PixelGraph, RgbImage};

#[derive(Parser)]
#[command(name = "hers", version, about = "Hierarchical entropy-rate superpixels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a hierarchy and write one label map per k.
    Segment(SegmentArgs),
    /// Cut a stored HRS1 hierarchy at new k values.
    Extract(ExtractArgs),
    /// Score a segmentation against ground truth as a CSV row.
    Eval(EvalArgs),
    /// Time a solver across k values; CSV on stdout.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AffinitySource {
    Gaussian,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Solver {
    Hers,
    Lazy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LabelsFormat {
    Pgm,
    Csv,
}

impl From<LabelsFormat> for LabelFormat {
    fn from(f: LabelsFormat) -> Self {
        match f {
            LabelsFormat::Pgm => LabelFormat::Pgm,
            LabelsFormat::Csv => LabelFormat::Csv,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// PNG or binary PPM image.
    #[arg(long)]
    image: Option<PathBuf>,

    /// Where affinities come from; defaults to `file` when --affinity-file is given.
    #[arg(long, value_enum)]
    affinity: Option<AffinitySource>,

    /// AFF8 affinity map.
    #[arg(long)]
    affinity_file: Option<PathBuf>,

    /// Gaussian bandwidth; estimated from the image when omitted.
    #[arg(long)]
    sigma: Option<f64>,

    /// EDG1 boundary probabilities to divide the affinities by.
    #[arg(long)]
    edge_probs: Option<PathBuf>,

    #[arg(long, default_value_t = affinity::DEFAULT_EPSILON)]
    epsilon: f64,

    /// Output channel c reads file channel perm[c], e.g. 7,6,5,4,3,2,1,0.
    #[arg(long, value_delimiter = ',')]
    channel_perm: Option<Vec<usize>>,

    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SegmentArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Superpixel counts, comma separated.
    #[arg(long, required = true, value_delimiter = ',')]
    k: Vec<usize>,

    #[arg(long)]
    out: PathBuf,

    #[arg(long, value_enum, default_value_t = LabelsFormat::Pgm)]
    labels_format: LabelsFormat,
}

#[derive(Args)]
struct ExtractArgs {
    /// HRS1 hierarchy file.
    #[arg(long)]
    hierarchy: PathBuf,

    #[arg(long, required = true, value_delimiter = ',')]
    k: Vec<usize>,

    /// Frame width; the height follows from the node count.
    #[arg(long)]
    width: usize,

    #[arg(long)]
    out: PathBuf,

    #[arg(long, value_enum, default_value_t = LabelsFormat::Pgm)]
    labels_format: LabelsFormat,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth label map (PGM or CSV).
    #[arg(long)]
    gt: PathBuf,

    /// Segmentation label map (PGM or CSV).
    #[arg(long)]
    seg: PathBuf,

    /// Source image; enables explained variation.
    #[arg(long)]
    image: Option<PathBuf>,

    #[arg(long, default_value_t = metrics::DEFAULT_TOLERANCE)]
    tolerance: usize,

    /// Append the row to this CSV file instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, required = true, value_delimiter = ',')]
    k: Vec<usize>,

    #[arg(long, value_enum, default_value_t = Solver::Hers)]
    solver: Solver,
}

#[derive(Debug)]
enum CliError {
    Io(String),
    Format(String),
    Argument(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Argument(_) => 2,
            CliError::Io(_) => 3,
            CliError::Format(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "error[io]: {m}"),
            CliError::Format(m) => write!(f, "error[format]: {m}"),
            CliError::Argument(m) => write!(f, "error[argument]: {m}"),
        }
    }
}

impl From<hers_core::Error> for CliError {
    fn from(e: hers_core::Error) -> Self {
        use hers_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Io { .. } => CliError::Io(msg),
            E::Format(_) | E::ZeroWeight | E::Disconnected { .. } | E::DoubleCommit(_) => {
                CliError::Format(msg)
            }
            E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::KOutOfRange { .. } => {
                CliError::Argument(msg)
            }
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Segment(args) => cmd_segment(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Rejects an empty list and zero; returns the distinct values ascending.
fn check_ks(ks: &[usize]) -> CliResult<Vec<usize>> {
    if ks.is_empty() {
        return Err(CliError::Argument("--k needs at least one value".into()));
    }
    if ks.contains(&0) {
        return Err(CliError::Argument("--k values must be at least 1".into()));
    }
    let mut sorted = ks.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(sorted)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}

struct Loaded {
    name: String,
    image: Option<RgbImage>,
    affinity: AffinityMap,
}

impl InputArgs {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn load(&self) -> CliResult<Loaded> {
        let source = match (self.affinity, &self.affinity_file) {
            (Some(s), _) => s,
            (None, Some(_)) => AffinitySource::File,
            (None, None) => AffinitySource::Gaussian,
        };
        let image = self.image.as_deref().map(image_io::load_image).transpose()?;
        let (name, mut map) = match source {
            AffinitySource::Gaussian => {
                let image = image.as_ref().ok_or_else(|| {
                    CliError::Argument("gaussian affinities need --image".into())
                })?;
                let params = match self.sigma {
                    Some(s) => affinity::GaussianParams::new(s)?,
                    None => affinity::auto_sigma(image),
                };
                let map = affinity::gaussian_affinity_with(image, params, self.execution());
                (stem(self.image.as_deref().unwrap()), map)
            }
            AffinitySource::File => {
                let path = self.affinity_file.as_deref().ok_or_else(|| {
                    CliError::Argument("--affinity file needs --affinity-file".into())
                })?;
                let mut map = image_io::read_affinity(path)?;
                if let Some(perm) = &self.channel_perm {
                    let perm: [usize; 8] = perm.as_slice().try_into().map_err(|_| {
                        CliError::Argument(format!(
                            "--channel-perm needs 8 entries, got {}",
                            perm.len()
                        ))
                    })?;
                    map = map.permute_channels(&perm)?;
                }
                let name = self.image.as_deref().unwrap_or(path);
                (stem(name), map)
            }
        };
        if let Some(path) = &self.edge_probs {
            let probs = image_io::read_edge_probs(path)?;
            map = affinity::apply_edge_probs(&map, &probs, self.epsilon)?;
        }
        if let Some(img) = &image {
            if (img.height(), img.width()) != (map.height(), map.width()) {
                return Err(CliError::Argument(format!(
                    "image is {}x{} but affinities are {}x{}",
                    img.height(),
                    img.width(),
                    map.height(),
                    map.width()
                )));
            }
        }
        Ok(Loaded {
            name,
            image,
            affinity: map,
        })
    }
}

fn write_label_maps(
    out: &Path,
    name: &str,
    maps: &[LabelMap],
    format: LabelFormat,
) -> CliResult<Vec<PathBuf>> {
    maps.iter()
        .map(|m| {
            let path = out.join(format!("{name}_k{}.{}", m.k(), format.extension()));
            image_io::write_labels_as(m, &path, format)?;
            Ok(path)
        })
        .collect()
}

fn cmd_segment(args: SegmentArgs) -> CliResult<()> {
    let ks = check_ks(&args.k)?;
    let loaded = args.input.load()?;
    let (h, w) = (loaded.affinity.height(), loaded.affinity.width());
    if let Some(&k) = ks.last().filter(|&&k| k > h * w) {
        return Err(CliError::Argument(format!("k = {k} exceeds the {} pixels", h * w)));
    }
    fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;

    let graph = PixelGraph::from_affinity(&loaded.affinity)?;
    let (hier, _) = hierarchy::build_hierarchy_with(&graph, args.input.execution())?;
    hierarchy::write_hierarchy(&hier, args.out.join(format!("{}.hrs1", loaded.name)))?;

    let maps = hier.extract_many(&ks, h, w)?;
    write_label_maps(&args.out, &loaded.name, &maps, args.labels_format.into())?;
    match &loaded.image {
        Some(image) => {
            for m in &maps {
                let path = args.out.join(format!("{}_k{}_overlay.png", loaded.name, m.k()));
                image_io::save_overlay(image, m, path)?;
            }
        }
        None => eprintln!("warning: no --image given; skipping boundary overlays"),
    }
    Ok(())
}

fn cmd_extract(args: ExtractArgs) -> CliResult<()> {
    let ks = check_ks(&args.k)?;
    let hier: MergeHierarchy = hierarchy::read_hierarchy(&args.hierarchy)?;
    let n = hier.node_count();
    if args.width == 0 || !n.is_multiple_of(args.width) {
        return Err(CliError::Argument(format!(
            "width {} does not divide the {n} nodes",
            args.width
        )));
    }
    let height = n / args.width;
    fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;
    let maps = hier.extract_many(&ks, height, args.width)?;
    write_label_maps(&args.out, &stem(&args.hierarchy), &maps, args.labels_format.into())?;
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let gt = image_io::read_labels(&args.gt)?;
    let seg = image_io::read_labels(&args.seg)?;
    let image = args.image.as_deref().map(image_io::load_image).transpose()?;
    let report = MetricReport::compute(&gt, &seg, image.as_ref(), args.tolerance)?;
    let row = report.csv_row(&stem(&args.seg));
    match &args.out {
        Some(path) => {
            let fresh = !path.exists();
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| io_err(path, e))?;
            if fresh {
                writeln!(file, "{}", MetricReport::CSV_HEADER).map_err(|e| io_err(path, e))?;
            }
            writeln!(file, "{row}").map_err(|e| io_err(path, e))?;
        }
        None => {
            println!("{}", MetricReport::CSV_HEADER);
            println!("{row}");
        }
    }
    Ok(())
}

fn millis(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    let ks = check_ks(&args.k)?;
    let loaded = args.input.load()?;
    let (h, w) = (loaded.affinity.height(), loaded.affinity.width());
    if let Some(&k) = ks.last().filter(|&&k| k > h * w) {
        return Err(CliError::Argument(format!("k = {k} exceeds the {} pixels", h * w)));
    }
    println!("phase,k,millis");
    let mut cumulative = 0.0;
    match args.solver {
        Solver::Hers => {
            let start = Instant::now();
            let graph = PixelGraph::from_affinity(&loaded.affinity)?;
            let (hier, _) = hierarchy::build_hierarchy_with(&graph, args.input.execution())?;
            let build = millis(start);
            cumulative += build;
            println!("build,,{build:.3}");
            for &k in &ks {
                let start = Instant::now();
                std::hint::black_box(hier.extract(k, h, w)?);
                let t = millis(start);
                cumulative += t;
                println!("extract,{k},{t:.3}");
                println!("cumulative,{k},{cumulative:.3}");
            }
        }
        Solver::Lazy => {
            for &k in &ks {
                let start = Instant::now();
                let graph = PixelGraph::from_affinity(&loaded.affinity)?;
                std::hint::black_box(baseline::lazy_greedy_segment(&graph, k)?);
                let t = millis(start);
                cumulative += t;
                println!("segment,{k},{t:.3}");
                println!("cumulative,{k},{cumulative:.3}");
            }
        }
    }
    Ok(())
}
