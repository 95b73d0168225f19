//! The `collage` command line.
//!
//! Parameters come from flags, then an optional TOML config file
//! (`--config`), then built-in defaults; flags win. The effective
//! configuration is echoed to stderr as JSON before any work starts.
//!
//! ```toml
//! seed = 7
//! workers = 4
//!
//! [inventory]
//! n = 2
//! gap_tolerance = 0.2
//!
//! [generate]
//! overlap = 0.05
//! context = 0.05
//! crossfade_mode = "normalized-hamming"   # or "raw-hamming"
//! output_level = "source_mean_rms"        # or "unit_rms"
//! subset_percent = 100.0
//!
//! [synth_text]
//! rate = 0.2
//! source_lang = "arabic"
//! target_lang = "english"
//!
//! [score]
//! mode = "mer"                            # "wer" | "cer" | "mer"
//! cmi = true
//! filter_threshold = 0.2
//! ```
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data validation
//! error, 3 I/O error. The log level is read from `COLLAGE_LOG`.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::corpus::{self, check_audio, load_ctm, load_manifest, validate};
use crate::cstext::{self, load_cs_text, load_parallel, ReplacementPolicy};
use crate::dsp::{self, CrossfadeMode, CrossfadeSpec};
use crate::error::{Error, Result};
use crate::generator::{self, AudioCorpus, CollageConfig, CollageRequest, OutputLevel};
use crate::inventory::{build_inventory, Inventory};
use crate::metrics::{self, Lang, ScoreMode, ScoreOptions};

pub const LOG_ENV: &str = "COLLAGE_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "collage",
    version,
    about = "Splice code-switched speech from monolingual aligned audio"
)]
pub struct Cli {
    /// TOML file with default parameters; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random decision.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for generation (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate alignments, then dump the n-gram unit inventory.
    BuildInventory(BuildInventoryArgs),
    /// Render code-switched utterances from an inventory.
    Generate(GenerateArgs),
    /// Synthesize code-switched text from parallel text and word alignments.
    SynthText(SynthTextArgs),
    /// Score hypotheses against references (WER/CER/MER, CMI).
    Score(ScoreArgs),
    /// Print one manifest record and re-render its audio.
    Inspect(InspectArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct InventoryFlags {
    /// Largest n-gram length to index.
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest silence (seconds) allowed inside a multi-token unit.
    #[arg(long)]
    pub gap_tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BuildInventoryArgs {
    /// Corpus manifest (JSON lines).
    #[arg(long)]
    pub corpus: PathBuf,
    /// CTM alignments.
    #[arg(long)]
    pub ctm: PathBuf,
    #[command(flatten)]
    pub inventory: InventoryFlags,
    /// Inventory dump to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Prebuilt inventory dump; alternatively pass --ctm to build one.
    #[arg(long, conflicts_with = "ctm")]
    pub inventory: Option<PathBuf>,
    #[arg(long, required_unless_present = "inventory")]
    pub ctm: Option<PathBuf>,
    #[command(flatten)]
    pub inventory_flags: InventoryFlags,
    /// Code-switched text (`id<TAB>tokens`).
    #[arg(long)]
    pub cs_text: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Crossfade overlap in seconds.
    #[arg(long)]
    pub overlap: Option<f64>,
    /// Context read around each cut, in seconds.
    #[arg(long)]
    pub context: Option<f64>,
    #[arg(long)]
    pub crossfade_mode: Option<CrossfadeMode>,
    #[arg(long)]
    pub output_level: Option<OutputLevel>,
    /// Generate only the first N% of utterances.
    #[arg(long)]
    pub subset_percent: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthTextArgs {
    /// `id<TAB>source<TAB>target` lines.
    #[arg(long)]
    pub parallel: PathBuf,
    /// Pharaoh `i-j` alignments, one line per sentence.
    #[arg(long)]
    pub alignments: PathBuf,
    /// Per-word replacement probability.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub source_lang: Option<Lang>,
    #[arg(long)]
    pub target_lang: Option<Lang>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Reference transcripts (`id<TAB>text`).
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Hypothesis transcripts (`id<TAB>text`).
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long)]
    pub mode: Option<ScoreMode>,
    /// Report corpus CMI of references and hypotheses.
    #[arg(long)]
    pub cmi: bool,
    /// Report CMI over hypotheses with MER at most this fraction.
    #[arg(long)]
    pub filter_threshold: Option<f64>,
    /// Include per-utterance scores.
    #[arg(long)]
    pub per_utterance: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Generation output directory (holds manifest.jsonl).
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub utterance: String,
    /// Write the re-rendered audio here.
    #[arg(long)]
    pub render: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub inventory: InventorySection,
    #[serde(default)]
    pub generate: GenerateSection,
    #[serde(default)]
    pub synth_text: SynthSection,
    #[serde(default)]
    pub score: ScoreSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InventorySection {
    pub n: Option<usize>,
    pub gap_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSection {
    pub overlap: Option<f64>,
    pub context: Option<f64>,
    pub crossfade_mode: Option<CrossfadeMode>,
    pub output_level: Option<OutputLevel>,
    pub subset_percent: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub rate: Option<f64>,
    pub source_lang: Option<Lang>,
    pub target_lang: Option<Lang>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreSection {
    pub mode: Option<ScoreMode>,
    pub cmi: Option<bool>,
    pub filter_threshold: Option<f64>,
}

pub fn load_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

pub const DEFAULT_N: usize = 2;
pub const DEFAULT_GAP_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InventoryParams {
    pub n: usize,
    pub gap_tolerance: f64,
}

impl InventoryParams {
    fn resolve(flags: &InventoryFlags, file: &InventorySection) -> Self {
        Self {
            n: flags.n.or(file.n).unwrap_or(DEFAULT_N),
            gap_tolerance: flags
                .gap_tolerance
                .or(file.gap_tolerance)
                .unwrap_or(DEFAULT_GAP_TOLERANCE),
        }
    }
}

fn echo<T: Serialize>(command: &str, config: &T) {
    let value = serde_json::json!({ "command": command, "config": config });
    eprintln!("effective config: {value}");
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let text = serde_json::to_string_pretty(value).expect("output serializes");
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn load_checked_corpus(path: &Path) -> Result<Vec<corpus::Recording>> {
    let recordings = load_manifest(path)?;
    if !recordings.is_empty() {
        corpus::corpus_sample_rate(&recordings)?;
    }
    for r in &recordings {
        check_audio(r)?;
    }
    Ok(recordings)
}

fn build_from_ctm(
    corpus_path: &Path,
    ctm: &Path,
    params: InventoryParams,
) -> Result<(Vec<corpus::Recording>, Inventory)> {
    let recordings = load_checked_corpus(corpus_path)?;
    let set = load_ctm(ctm, &recordings)?;
    let report = validate(&set);
    for f in &report.findings {
        log::error!("{f}");
    }
    report.into_result()?;
    let inv = build_inventory(&set, params.n, params.gap_tolerance)?;
    Ok((recordings, inv))
}

fn cmd_build_inventory(args: &BuildInventoryArgs, file: &FileConfig) -> Result<()> {
    let params = InventoryParams::resolve(&args.inventory, &file.inventory);
    echo(
        "build-inventory",
        &serde_json::json!({ "corpus": args.corpus, "ctm": args.ctm, "out": args.out, "inventory": params }),
    );
    let (_, inv) = build_from_ctm(&args.corpus, &args.ctm, params)?;
    std::fs::write(&args.out, inv.dump()).map_err(|e| Error::io(&args.out, e))?;
    print_json(&serde_json::json!({
        "keys": inv.len(),
        "keys_by_length": inv.stats().keys_by_length,
        "cuts_by_length": inv.stats().cuts_by_length,
        "out": args.out,
    }))
}

#[derive(Debug, Serialize)]
struct GenerateEcho<'a> {
    corpus: &'a Path,
    inventory: Option<&'a Path>,
    ctm: Option<&'a Path>,
    inventory_params: InventoryParams,
    cs_text: &'a Path,
    out_dir: &'a Path,
    collage: CollageConfig,
    subset_percent: f64,
}

fn cmd_generate(args: &GenerateArgs, seed: u64, workers: usize, file: &FileConfig) -> Result<()> {
    let g = &file.generate;
    let overlap = args.overlap.or(g.overlap).unwrap_or(dsp::DEFAULT_OVERLAP);
    let config = CollageConfig {
        seed,
        crossfade: CrossfadeSpec {
            overlap,
            mode: args.crossfade_mode.or(g.crossfade_mode).unwrap_or_default(),
        },
        context: args.context.or(g.context).unwrap_or(dsp::DEFAULT_CONTEXT),
        output_level: args.output_level.or(g.output_level).unwrap_or_default(),
        workers,
    };
    let subset_percent = args.subset_percent.or(g.subset_percent).unwrap_or(100.0);
    let inventory_params = InventoryParams::resolve(&args.inventory_flags, &file.inventory);
    echo(
        "generate",
        &GenerateEcho {
            corpus: &args.corpus,
            inventory: args.inventory.as_deref(),
            ctm: args.ctm.as_deref(),
            inventory_params,
            cs_text: &args.cs_text,
            out_dir: &args.out_dir,
            collage: config,
            subset_percent,
        },
    );
    config.check()?;
    let cs_text = load_cs_text(&args.cs_text)?.subset_percent(subset_percent)?;
    let (recordings, inventory) = match (&args.inventory, &args.ctm) {
        (Some(dump), _) => (load_checked_corpus(&args.corpus)?, Inventory::load(dump)?),
        (None, Some(ctm)) => build_from_ctm(&args.corpus, ctm, inventory_params)?,
        (None, None) => return Err(Error::InvalidArgument("pass --inventory or --ctm".into())),
    };
    let report = generator::generate_collage(&CollageRequest {
        cs_text: &cs_text,
        inventory: &inventory,
        recordings: &recordings,
        config,
        output_dir: args.out_dir.clone(),
    })?;
    log::info!(
        "generated {} of {} utterances, {:.6} h",
        report.generated_count,
        report.utterances,
        report.total_audio_hours
    );
    print_json(&report)
}

fn cmd_synth_text(args: &SynthTextArgs, seed: u64, file: &FileConfig) -> Result<()> {
    let s = &file.synth_text;
    let defaults = ReplacementPolicy::default();
    let policy = ReplacementPolicy {
        rate: args.rate.or(s.rate).unwrap_or(defaults.rate),
        seed,
        source_lang: args.source_lang.or(s.source_lang).unwrap_or(defaults.source_lang),
        target_lang: args.target_lang.or(s.target_lang).unwrap_or(defaults.target_lang),
    };
    echo(
        "synth-text",
        &serde_json::json!({ "parallel": args.parallel, "alignments": args.alignments, "out": args.out, "policy": policy }),
    );
    policy.check()?;
    let pairs = load_parallel(&args.parallel, &args.alignments)?;
    for p in &pairs {
        cstext::check_utterance_id(&p.id)?;
    }
    let out = cstext::synthesize_corpus(&pairs, &policy)?;
    std::fs::write(&args.out, out.text.to_tsv()).map_err(|e| Error::io(&args.out, e))?;
    let tags: Vec<Vec<Lang>> = out.text.utterances.iter().map(|u| u.langs.clone()).collect();
    print_json(&serde_json::json!({
        "sentences": out.text.len(),
        "eligible_words": out.eligible,
        "replaced_words": out.replaced,
        "replaced_fraction": out.replaced_fraction(),
        "corpus_cmi": metrics::corpus_cmi(tags.iter().map(Vec::as_slice)),
        "out": args.out,
    }))
}

fn cmd_score(args: &ScoreArgs, file: &FileConfig) -> Result<()> {
    let s = &file.score;
    let opts = ScoreOptions {
        mode: args.mode.or(s.mode).unwrap_or_default(),
        cmi: args.cmi || s.cmi.unwrap_or(false),
        filter_threshold: args.filter_threshold.or(s.filter_threshold),
    };
    echo(
        "score",
        &serde_json::json!({
            "ref": args.reference, "hyp": args.hyp, "mode": opts.mode,
            "cmi": opts.cmi, "filter_threshold": opts.filter_threshold,
        }),
    );
    if let Some(t) = opts.filter_threshold {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("filter threshold {t} must be >= 0")));
        }
    }
    let refs = metrics::load_transcripts(&args.reference)?;
    let hyps = metrics::load_transcripts(&args.hyp)?;
    let mut report = metrics::score(&refs, &hyps, &opts);
    if !args.per_utterance {
        report.utterances.clear();
    }
    print_json(&report)
}

fn cmd_inspect(args: &InspectArgs) -> Result<()> {
    echo(
        "inspect",
        &serde_json::json!({ "dir": args.dir, "corpus": args.corpus, "utterance": args.utterance, "render": args.render }),
    );
    let records = generator::load_generation_manifest(&args.dir.join(generator::MANIFEST_FILE))?;
    let record = records
        .into_iter()
        .find(|r| r.utterance_id == args.utterance)
        .ok_or_else(|| Error::InvalidArgument(format!("no manifest record for `{}`", args.utterance)))?;
    let recordings = load_checked_corpus(&args.corpus)?;
    let corpus = AudioCorpus::new(&recordings)?;
    let wave = generator::rerender(&record, &corpus)?;
    let stored = crate::audio::read_wav(&args.dir.join(&record.audio_path), 0)?;
    let stored_pcm: Vec<i16> = stored
        .samples
        .iter()
        .map(|&s| crate::audio::sample_to_pcm16(s))
        .collect();
    let fresh_pcm: Vec<i16> = wave.samples.iter().map(|&s| crate::audio::sample_to_pcm16(s)).collect();
    let matches = stored_pcm == fresh_pcm;
    if let Some(path) = &args.render {
        crate::audio::write_wav(path, &wave)?;
    }
    print_json(&serde_json::json!({
        "record": record,
        "ledger_samples": record.ledger_samples(),
        "rerendered_samples": wave.len(),
        "matches_stored_audio": matches,
    }))?;
    if matches {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{}: re-rendered audio differs from stored file",
            args.utterance
        )))
    }
}

/// Run the command line, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let workers = cli.workers.or(file.workers).unwrap_or(0);
    match &cli.command {
        Command::BuildInventory(a) => cmd_build_inventory(a, &file),
        Command::Generate(a) => cmd_generate(a, seed, workers, &file),
        Command::SynthText(a) => cmd_synth_text(a, seed, &file),
        Command::Score(a) => cmd_score(a, &file),
        Command::Inspect(a) => cmd_inspect(a),
    }
}

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}
