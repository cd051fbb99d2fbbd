//! `qvr`: command-line front end for the quantum video reduction simulator.
//!
//! Verbs: `generate` (synthetic dataset), `train` (manifest → model file),
//! `classify` (model + video → result line), `sweep` (config → reports),
//! `import-pgm` (frame directory → QVID). Progress goes to stderr; only
//! results are printed to stdout. Exit codes: 0 success, 1 configuration
//! error, 2 data error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use qvr_core::classifier::{classify, train, ModelSet};
use qvr_core::harness::{emit_report, parse_config_file, parse_key_values, run_sweep, ConfigMap};
use qvr_core::primitives::ShotPlan;
use qvr_core::seeds::{mix64, tags};
use qvr_core::videodata::{
    generate_synthetic, import_pgm_dir, load_video, read_manifest, save_video, write_manifest,
    MotionKind, SyntheticClassSpec,
};
use qvr_core::{Error, Result};

#[derive(Parser)]
#[command(name = "qvr", about = "Quantum video reduction simulator", version)]
struct Cli {
    /// Base seed for every random stream [default: 42].
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Replace sampling with analytic values everywhere.
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    exact: bool,

    /// Shots per estimate in sampled mode [default: 10000].
    #[arg(long, global = true)]
    shots: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

impl Cli {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(42)
    }

    fn shots(&self) -> u64 {
        self.shots.unwrap_or(10_000)
    }
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Generate a synthetic gesture dataset as QVID files plus a manifest.
    Generate(GenerateArgs),
    /// Train class models from a manifest and write a QVRM model file.
    Train(TrainArgs),
    /// Classify one QVID video against a model file.
    Classify(ClassifyArgs),
    /// Run a (k, M, q) sweep from a config file and emit CSV/SVG reports.
    Sweep(SweepArgs),
    /// Convert a directory of grayscale PGM frames into one QVID video.
    ImportPgm(ImportPgmArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Output directory for the dataset.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated motion kinds, one class each.
    #[arg(long, default_value = "sweep_left,approach")]
    kinds: String,
    /// Videos per class.
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 64)]
    n: u32,
    #[arg(long, default_value_t = 32)]
    t: u32,
    /// Uniform noise amplitude.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long)]
    blob_min: Option<u32>,
    #[arg(long)]
    blob_max: Option<u32>,
    #[arg(long)]
    speed_min: Option<f64>,
    #[arg(long)]
    speed_max: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset manifest (`<relative-path> <label>` lines).
    #[arg(long)]
    manifest: PathBuf,
    /// Register qubits.
    #[arg(long)]
    q: u32,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Cap on training videos per class (first M in manifest order).
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// QVRM model file.
    #[arg(long)]
    model: PathBuf,
    /// QVID video to classify.
    #[arg(long)]
    video: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Config file of `key = value` lines; flags override file keys.
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    manifest: Option<String>,
    #[arg(long)]
    kinds: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    blob_min: Option<String>,
    #[arg(long)]
    blob_max: Option<String>,
    #[arg(long)]
    speed_min: Option<String>,
    #[arg(long)]
    speed_max: Option<String>,
    #[arg(long)]
    m: Option<String>,
    /// q values: comma list and/or a-b ranges, e.g. `5,8,10-12`.
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    test_per_class: Option<String>,
    /// Report directory.
    #[arg(long)]
    out: Option<String>,
}

fn parse_kinds(raw: &str) -> Result<Vec<MotionKind>> {
    let mut kinds = Vec::new();
    for name in raw.split(',') {
        let kind: MotionKind = name
            .trim()
            .parse()
            .map_err(|e: String| Error::InvalidConfig(e))?;
        if kinds.contains(&kind) {
            return Err(Error::InvalidConfig(format!(
                "kind `{kind}` listed twice; classes must be distinct"
            )));
        }
        kinds.push(kind);
    }
    if kinds.is_empty() {
        return Err(Error::InvalidConfig("no kinds given".into()));
    }
    Ok(kinds)
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let kinds = parse_kinds(&args.kinds)?;
    std::fs::create_dir_all(&args.out)?;
    let mut manifest_entries = Vec::new();
    for (class_idx, kind) in kinds.iter().enumerate() {
        let mut spec =
            SyntheticClassSpec::new(*kind, mix64(&[cli.seed(), tags::GENERATE, class_idx as u64]));
        spec.n = args.n;
        spec.t = args.t;
        spec.noise_amplitude = args.noise;
        if let Some(lo) = args.blob_min {
            spec.blob_size.0 = lo;
        }
        if let Some(hi) = args.blob_max {
            spec.blob_size.1 = hi;
        }
        if let Some(lo) = args.speed_min {
            spec.speed.0 = lo;
        }
        if let Some(hi) = args.speed_max {
            spec.speed.1 = hi;
        }
        let videos = generate_synthetic(&spec, args.count);
        for (i, video) in videos.iter().enumerate() {
            let name = format!("{kind}_{i:04}.qvid");
            save_video(video, args.out.join(&name))?;
            manifest_entries.push((name, kind.to_string()));
        }
        eprintln!("generated {} {kind} videos", videos.len());
    }
    write_manifest(args.out.join("manifest.txt"), &manifest_entries)?;
    eprintln!(
        "wrote {} videos and manifest.txt to {}",
        manifest_entries.len(),
        args.out.display()
    );
    Ok(())
}

type LabeledDataset = Vec<(u32, qvr_core::videodata::VideoTensor)>;

/// Loads a manifest into `(class_id, video)` pairs; labels sorted ascending
/// map to ids 0..k. Returns the label table alongside.
fn load_labeled_dataset(
    manifest: &PathBuf,
    m_cap: Option<usize>,
) -> Result<(LabeledDataset, Vec<String>)> {
    let entries = read_manifest(manifest)?;
    if entries.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "manifest {} lists no videos",
            manifest.display()
        )));
    }
    let mut labels: Vec<String> = entries.iter().map(|e| e.label.clone()).collect();
    labels.sort_unstable();
    labels.dedup();

    let mut dataset = Vec::new();
    let mut taken = vec![0usize; labels.len()];
    for entry in &entries {
        let class_id = labels.iter().position(|l| *l == entry.label).unwrap();
        if let Some(cap) = m_cap {
            if taken[class_id] >= cap {
                continue;
            }
        }
        taken[class_id] += 1;
        dataset.push((class_id as u32, load_video(&entry.path)?));
    }
    Ok((dataset, labels))
}

fn cmd_train(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let (dataset, labels) = load_labeled_dataset(&args.manifest, args.m)?;
    for (id, label) in labels.iter().enumerate() {
        let count = dataset.iter().filter(|(c, _)| *c == id as u32).count();
        eprintln!("class {id} = {label} ({count} training videos)");
    }
    let models = train(&dataset, args.q, cli.seed())?;
    let stats = models.stats();
    eprintln!(
        "trained {} classes at q={}; {} frame pairs ({} degenerate), mean post-selection repeats {:.2}",
        models.k(),
        models.q(),
        stats.pairs_total,
        stats.pairs_degenerate,
        stats.mean_expected_repeats
    );
    models.save(&args.out)?;
    eprintln!("wrote model to {}", args.out.display());
    Ok(())
}

fn cmd_classify(cli: &Cli, args: &ClassifyArgs) -> Result<()> {
    let plan = if cli.exact {
        ShotPlan::exact()
    } else if cli.shots() == 0 {
        return Err(Error::InvalidConfig("shots must be >= 1 in sampled mode".into()));
    } else {
        ShotPlan::sampled(cli.shots(), cli.seed())
    };
    let models = ModelSet::load(&args.model)?;
    let video = load_video(&args.video)?;
    let result = classify(&video, &models, &plan)?;
    let scores = result
        .scores
        .iter()
        .map(|(class, score)| format!("{class}:{score:.6}"))
        .collect::<Vec<_>>()
        .join(",");
    println!(
        "predicted_class={} scores={} shots_per_score={} tie_broken={}",
        result.predicted_class, scores, result.shots_per_score, result.tie_broken
    );
    Ok(())
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let mut map = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => ConfigMap::new(),
    };
    let overrides = [
        ("data", &args.data),
        ("manifest", &args.manifest),
        ("kinds", &args.kinds),
        ("n", &args.n),
        ("t", &args.t),
        ("noise", &args.noise),
        ("blob_min", &args.blob_min),
        ("blob_max", &args.blob_max),
        ("speed_min", &args.speed_min),
        ("speed_max", &args.speed_max),
        ("m", &args.m),
        ("q", &args.q),
        ("trials", &args.trials),
        ("test_per_class", &args.test_per_class),
        ("out", &args.out),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            map.insert(key.to_string(), value.clone());
        }
    }
    // Global flags override their config keys only when actually given;
    // --exact can only assert.
    if let Some(seed) = cli.seed {
        map.insert("seed".into(), seed.to_string());
    }
    if let Some(shots) = cli.shots {
        map.insert("shots".into(), shots.to_string());
    }
    if cli.exact {
        map.insert("exact".into(), "true".into());
    }

    let config = parse_key_values(&map)?;
    let result = run_sweep(&config)?;
    let written = emit_report(&result, &config.output_dir)?;
    for cell in &result.cells {
        eprintln!(
            "k={} M={} q={:2}: accuracy {:.4} ± {:.4} over {} trials ({:.1}s, mean shots {})",
            cell.k,
            cell.m,
            cell.q,
            cell.mean_accuracy,
            cell.std_accuracy,
            cell.trials,
            cell.wall_seconds,
            cell.mean_shots
        );
    }
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Args)]
struct ImportPgmArgs {
    /// Directory of per-frame .pgm images (lexicographic order).
    #[arg(long)]
    frames: PathBuf,
    /// Output QVID file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 64)]
    n: u32,
    #[arg(long, default_value_t = 32)]
    t: u32,
}

fn cmd_import_pgm(args: &ImportPgmArgs) -> Result<()> {
    let video = import_pgm_dir(&args.frames, args.n, args.t)?;
    save_video(&video, &args.out)?;
    eprintln!(
        "imported {} as {}x{}x{} QVID at {}",
        args.frames.display(),
        video.n(),
        video.n(),
        video.t(),
        args.out.display()
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(cli, args),
        Command::Train(args) => cmd_train(cli, args),
        Command::Classify(args) => cmd_classify(cli, args),
        Command::Sweep(args) => cmd_sweep(cli, args),
        Command::ImportPgm(args) => cmd_import_pgm(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // Flag and usage mistakes are configuration errors.
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
