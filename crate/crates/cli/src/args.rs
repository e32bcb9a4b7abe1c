use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "voicescreen",
    version,
    about = "Sustained-vowel voice analysis and screening"
)]
pub struct Cli {
    /// Worker threads for parallel stages (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a vowel with known cycle boundaries.
    Synth(SynthArgs),
    /// Track the fundamental frequency of a recording.
    F0(F0Args),
    /// Split a recording into glottal cycles.
    Segment(SegmentArgs),
    /// Compute the eight-feature vector of one or more recordings.
    Extract(ExtractArgs),
    /// Pathological vibrato index of a recording.
    Pvi(PviArgs),
    /// Per-group feature statistics and density estimates.
    Stats(StatsArgs),
    /// Remove the healthy-control age trend from a feature table.
    AgeCorrect(AgeCorrectArgs),
    /// Cross-validate a classifier on a feature subset.
    Classify(ClassifyArgs),
    /// Cross-validate every feature subset and rank them.
    Search(SearchArgs),
    /// Generate a synthetic feature table with a study-like cohort.
    Cohort(CohortArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output WAV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth CSV path (default: <out>.truth.csv).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 130.0)]
    pub f0: f64,
    #[arg(long, default_value_t = 4.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 44100)]
    pub sample_rate: u32,
    /// Target local jitter in percent.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Target local shimmer in percent.
    #[arg(long, default_value_t = 0.0)]
    pub shimmer: f64,
    #[arg(long, default_value_t = 0.0)]
    pub vibrato_rate: f64,
    /// Peak deviation as a fraction of f0.
    #[arg(long, default_value_t = 0.0)]
    pub vibrato_depth: f64,
    /// Additive white noise at this SNR in dB.
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub harmonics: usize,
    #[arg(long, env = "VOICESCREEN_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Seconds removed from the start of the recording.
    #[arg(long, default_value_t = 0.0)]
    pub trim_head: f64,
    /// Seconds removed from the end of the recording.
    #[arg(long, default_value_t = 0.0)]
    pub trim_tail: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PitchArgs {
    #[arg(long, default_value_t = 50.0)]
    pub f_min: f64,
    #[arg(long, default_value_t = 400.0)]
    pub f_max: f64,
    /// Frame hop in seconds.
    #[arg(long, default_value_t = 0.005)]
    pub hop: f64,
    /// Analysis frame length in seconds.
    #[arg(long, default_value_t = 0.040)]
    pub frame: f64,
    /// Minimum correlation peak for a voiced frame.
    #[arg(long, default_value_t = 0.5)]
    pub voicing_threshold: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SegArgs {
    /// Refinement window as a fraction of the nominal period.
    #[arg(long, default_value_t = 0.15)]
    pub refine_window: f64,
    #[arg(long, default_value_t = 30)]
    pub min_cycles: usize,
    /// Fraction of the phase residual removed at every cycle.
    #[arg(long, default_value_t = 0.1)]
    pub phase_pull: f64,
}

#[derive(Debug, Clone, Args)]
pub struct BandArgs {
    #[arg(long, default_value_t = 9.0)]
    pub band_lo: f64,
    #[arg(long, default_value_t = 14.0)]
    pub band_hi: f64,
    /// Butterworth prototype order.
    #[arg(long, default_value_t = 3)]
    pub filter_order: usize,
    /// Welch segment length in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub welch_window: f64,
    #[arg(long, default_value_t = 0.95)]
    pub welch_overlap: f64,
    /// Filter the normalized contour without subtracting its mean level.
    #[arg(long)]
    pub keep_mean: bool,
}

#[derive(Debug, Args)]
pub struct F0Args {
    #[arg(long)]
    pub input: PathBuf,
    /// CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub io: InputArgs,
    #[command(flatten)]
    pub pitch: PitchArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SegMethod {
    WmPc,
    Wm,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SegMethod::WmPc)]
    pub method: SegMethod,
    /// CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub io: InputArgs,
    #[command(flatten)]
    pub pitch: PitchArgs,
    #[command(flatten)]
    pub seg: SegArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RapMode {
    AsPrinted,
    Classical,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Recordings to analyse; ids default to the file stem.
    #[arg(long, num_args = 1.., required_unless_present = "manifest")]
    pub input: Vec<PathBuf>,
    /// CSV with columns path,id,label,age,sex; paths are relative to the manifest.
    #[arg(long, conflicts_with = "input")]
    pub manifest: Option<PathBuf>,
    /// Label applied to every --input recording (ALS or HC).
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub age: Option<f64>,
    #[arg(long)]
    pub sex: Option<String>,
    /// Features CSV output.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = RapMode::AsPrinted)]
    pub rap: RapMode,
    #[command(flatten)]
    pub io: InputArgs,
    #[command(flatten)]
    pub pitch: PitchArgs,
    #[command(flatten)]
    pub seg: SegArgs,
    #[command(flatten)]
    pub band: BandArgs,
}

#[derive(Debug, Args)]
pub struct PviArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// JSON output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the amplitude spectrum as CSV.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    #[command(flatten)]
    pub io: InputArgs,
    #[command(flatten)]
    pub pitch: PitchArgs,
    #[command(flatten)]
    pub band: BandArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Restrict to these features (comma separated).
    #[arg(long)]
    pub subset: Option<String>,
    /// JSON output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Density grid CSV.
    #[arg(long)]
    pub kde: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AgeCorrectArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Lda,
    Knn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BiasChoice {
    Prior,
    Midpoint,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelChoice::Lda)]
    pub model: ModelChoice,
    /// Neighbours per class for k-NN.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = BiasChoice::Prior)]
    pub lda_bias: BiasChoice,
    #[arg(long, default_value_t = 7)]
    pub folds: usize,
    #[arg(long, default_value_t = 40)]
    pub repeats: usize,
    #[arg(long, env = "VOICESCREEN_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Deal folds without regard to class.
    #[arg(long)]
    pub unstratified: bool,
    /// JSON report path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Features to use, e.g. S1,S3,S11,PVI (default: all).
    #[arg(long)]
    pub subset: Option<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Rows shown in the table.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct CohortArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 39)]
    pub n_healthy: usize,
    #[arg(long, default_value_t = 15)]
    pub n_als: usize,
    /// ALS mean shift on the informative features, in feature SDs.
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
    /// Informative features (comma separated).
    #[arg(long, default_value = "S1,S3,S11,PVI")]
    pub informative: String,
    #[arg(long, env = "VOICESCREEN_SEED", default_value_t = 0)]
    pub seed: u64,
}
