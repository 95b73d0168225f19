//! Collage generation: realize each code-switched utterance by splicing
//! sampled unit cuts.
//!
//! Per utterance:
//!
//! 1. segment the text into the longest inventory units (skip on OOV);
//! 2. sample one cut per unit and read it with context;
//! 3. equalize every segment to unit RMS;
//! 4. left-fold overlap-add, each joint using
//!    `min(nominal overlap, previous tail context, next head context)`;
//! 5. rescale the utterance to the output level;
//! 6. limit the peak to [`PEAK_LIMIT`] and record provenance.
//!
//! `generate_collage` writes `<utterance_id>.wav` per utterance plus
//! `manifest.jsonl` (sorted by utterance index) and `report.json`.

use std::collections::{BTreeMap, HashMap};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{self, samples_to_seconds, seconds_to_samples, Waveform};
use crate::corpus::{corpus_sample_rate, Recording};
use crate::cstext::{check_utterance_id, CsText};
use crate::dsp::{self, CrossfadeMode, CrossfadeSpec, Extracted};
use crate::error::{Error, Result};
use crate::inventory::{CutRef, Inventory, UnitKey};
use crate::rng;

pub const PEAK_LIMIT: f32 = 0.999;
pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputLevel {
    /// Final utterance RMS of 1.0.
    UnitRms,
    /// Final utterance RMS equal to the mean RMS of the raw segments.
    #[default]
    SourceMeanRms,
}

impl std::str::FromStr for OutputLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit_rms" | "unit-rms" => Ok(Self::UnitRms),
            "source_mean_rms" | "source-mean-rms" => Ok(Self::SourceMeanRms),
            _ => Err(Error::InvalidArgument(format!("unknown output level `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollageConfig {
    pub seed: u64,
    pub crossfade: CrossfadeSpec,
    /// Seconds of audio read on each side of a cut.
    pub context: f64,
    pub output_level: OutputLevel,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
}

impl Default for CollageConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            crossfade: CrossfadeSpec::default(),
            context: dsp::DEFAULT_CONTEXT,
            output_level: OutputLevel::default(),
            workers: 0,
        }
    }
}

impl CollageConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.crossfade.overlap >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "overlap {} must be >= 0",
                self.crossfade.overlap
            )));
        }
        if !(self.context >= self.crossfade.overlap) {
            return Err(Error::InvalidArgument(format!(
                "context {} must be at least the overlap {}",
                self.context, self.crossfade.overlap
            )));
        }
        Ok(())
    }
}

/// Everything one run needs. The inventory and corpus are shared read-only.
#[derive(Debug, Clone)]
pub struct CollageRequest<'a> {
    pub cs_text: &'a CsText,
    pub inventory: &'a Inventory,
    pub recordings: &'a [Recording],
    pub config: CollageConfig,
    pub output_dir: PathBuf,
}

/// Recording lookup plus the corpus rate, checked once per run.
#[derive(Debug, Clone)]
pub struct AudioCorpus<'a> {
    by_id: HashMap<&'a str, &'a Recording>,
    sample_rate: u32,
}

impl<'a> AudioCorpus<'a> {
    pub fn new(recordings: &'a [Recording]) -> Result<Self> {
        let sample_rate = corpus_sample_rate(recordings)?;
        Ok(Self {
            by_id: recordings.iter().map(|r| (r.id.as_str(), r)).collect(),
            sample_rate,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn get(&self, id: &str) -> Result<&'a Recording> {
        self.by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownRecording(id.to_string()))
    }

    /// Fail if any inventory cut points at a recording outside the corpus.
    pub fn check_inventory(&self, inv: &Inventory) -> Result<()> {
        for (_, cuts) in inv.iter() {
            for c in cuts {
                self.get(&c.recording_id)?;
            }
        }
        Ok(())
    }
}

/// One spliced unit of a generated utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub cut: CutRef,
    pub head_samples: usize,
    pub tail_samples: usize,
    pub segment_samples: usize,
    /// Overlap with the previous segment; 0 for the first.
    pub joint_overlap_samples: usize,
    pub raw_rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedUtterance {
    pub index: usize,
    pub utterance_id: String,
    pub text: Vec<String>,
    pub waveform: Waveform,
    pub provenance: Vec<Provenance>,
    pub target_rms: f64,
    pub peak_limited: bool,
}

impl GeneratedUtterance {
    pub fn duration(&self) -> f64 {
        self.waveform.duration()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SkipReason {
    Oov { missing_tokens: Vec<String> },
    SilentSegment { unit: String },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub index: usize,
    pub utterance_id: String,
    #[serde(flatten)]
    pub reason: SkipReason,
}

/// Segments after extraction and equalization, ready to splice.
struct Rendered {
    waveform: Waveform,
    joints: Vec<usize>,
    target_rms: f64,
    peak_limited: bool,
}

/// Equalize, splice, level and peak-limit; shared by generation and
/// re-rendering.
/// `joints[i]` is the overlap before segment `i` (`joints[0]` is ignored).
fn splice(segments: &[Extracted], joints: &[usize], mode: CrossfadeMode, level: OutputLevel) -> Result<Rendered> {
    let mut raw_rms_sum = 0.0;
    let mut out: Option<Waveform> = None;
    for (i, seg) in segments.iter().enumerate() {
        raw_rms_sum += seg.waveform.rms();
        let eq = dsp::normalize_energy(&seg.waveform)?;
        out = Some(match out {
            None => eq,
            Some(acc) => dsp::overlap_add_samples(&acc, &eq, joints[i], mode)?,
        });
    }
    let joined = out.ok_or_else(|| Error::Degenerate("no segments to splice".into()))?;
    let target_rms = match level {
        OutputLevel::UnitRms => 1.0,
        OutputLevel::SourceMeanRms => raw_rms_sum / segments.len() as f64,
    };
    let mut waveform = dsp::rescale(&joined, target_rms)?;
    let peak = waveform.peak();
    let peak_limited = peak > PEAK_LIMIT;
    if peak_limited {
        let gain = f64::from(PEAK_LIMIT) / f64::from(peak);
        for s in &mut waveform.samples {
            *s = (f64::from(*s) * gain) as f32;
        }
    }
    Ok(Rendered {
        waveform,
        joints: joints.to_vec(),
        target_rms,
        peak_limited,
    })
}

fn joint_overlaps(segments: &[Extracted], nominal: usize) -> Vec<usize> {
    let mut joints = vec![0; segments.len()];
    for i in 1..segments.len() {
        joints[i] = nominal.min(segments[i - 1].tail_samples).min(segments[i].head_samples);
    }
    joints
}

/// Render one utterance. `Ok(Err(_))` is a skip (out-of-inventory tokens or
/// a silent segment); `Err(_)` is a hard failure such as unreadable audio.
pub fn generate_utterance<R: RngCore + ?Sized>(
    index: usize,
    utterance_id: &str,
    tokens: &[String],
    inventory: &Inventory,
    corpus: &AudioCorpus<'_>,
    config: &CollageConfig,
    rng: &mut R,
) -> Result<std::result::Result<GeneratedUtterance, SkipReason>> {
    let units = match inventory.segment(tokens) {
        Ok(units) => units,
        Err(oov) => {
            return Ok(Err(SkipReason::Oov {
                missing_tokens: oov.missing,
            }))
        }
    };
    if units.is_empty() {
        return Ok(Err(SkipReason::Failed {
            message: "empty utterance".into(),
        }));
    }
    let mut cuts = Vec::with_capacity(units.len());
    let mut segments = Vec::with_capacity(units.len());
    for key in &units {
        let cut = inventory.sample(key.tokens(), rng)?.clone();
        let rec = corpus.get(&cut.recording_id)?;
        let seg = dsp::extract_with_context(rec, &cut, config.context)?;
        if seg.waveform.rms() < dsp::SILENCE_RMS {
            return Ok(Err(SkipReason::SilentSegment { unit: key.to_string() }));
        }
        cuts.push(cut);
        segments.push(seg);
    }
    let nominal = seconds_to_samples(config.crossfade.overlap, corpus.sample_rate()) as usize;
    let joints = joint_overlaps(&segments, nominal);
    let rendered = match splice(&segments, &joints, config.crossfade.mode, config.output_level) {
        Ok(r) => r,
        Err(Error::Degenerate(_)) => {
            return Ok(Err(SkipReason::SilentSegment {
                unit: units.iter().map(UnitKey::to_string).collect::<Vec<_>>().join(" | "),
            }))
        }
        Err(e) => return Err(e),
    };
    let provenance = cuts
        .into_iter()
        .zip(&segments)
        .zip(&rendered.joints)
        .map(|((cut, seg), &joint)| Provenance {
            cut,
            head_samples: seg.head_samples,
            tail_samples: seg.tail_samples,
            segment_samples: seg.waveform.len(),
            joint_overlap_samples: joint,
            raw_rms: seg.waveform.rms(),
        })
        .collect();
    Ok(Ok(GeneratedUtterance {
        index,
        utterance_id: utterance_id.to_string(),
        text: tokens.to_vec(),
        waveform: rendered.waveform,
        provenance,
        target_rms: rendered.target_rms,
        peak_limited: rendered.peak_limited,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub tokens: Vec<String>,
    pub recording_id: String,
    pub channel: u16,
    pub start: f64,
    pub end: f64,
    pub head_ext: f64,
    pub tail_ext: f64,
    pub joint_overlap: f64,
    pub segment_samples: usize,
    pub joint_overlap_samples: usize,
}

/// One line of `manifest.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub index: usize,
    pub utterance_id: String,
    pub text: String,
    pub duration_seconds: f64,
    pub num_samples: usize,
    pub sample_rate: u32,
    /// Relative to the manifest's directory.
    pub audio_path: String,
    pub provenance: Vec<ProvenanceRecord>,
    pub level_mode: OutputLevel,
    pub target_rms: f64,
    pub peak_limited: bool,
    pub context_seconds: f64,
    pub overlap_seconds: f64,
    pub crossfade_mode: CrossfadeMode,
}

impl ManifestRecord {
    pub fn from_utterance(u: &GeneratedUtterance, config: &CollageConfig) -> Self {
        let rate = u.waveform.sample_rate;
        let secs = |n: usize| samples_to_seconds(n, rate);
        Self {
            index: u.index,
            utterance_id: u.utterance_id.clone(),
            text: u.text.join(" "),
            duration_seconds: u.duration(),
            num_samples: u.waveform.len(),
            sample_rate: rate,
            audio_path: format!("{}.wav", u.utterance_id),
            provenance: u
                .provenance
                .iter()
                .map(|p| ProvenanceRecord {
                    tokens: p.cut.tokens.tokens().to_vec(),
                    recording_id: p.cut.recording_id.clone(),
                    channel: p.cut.channel,
                    start: p.cut.start,
                    end: p.cut.end,
                    head_ext: secs(p.head_samples),
                    tail_ext: secs(p.tail_samples),
                    joint_overlap: secs(p.joint_overlap_samples),
                    segment_samples: p.segment_samples,
                    joint_overlap_samples: p.joint_overlap_samples,
                })
                .collect(),
            level_mode: config.output_level,
            target_rms: u.target_rms,
            peak_limited: u.peak_limited,
            context_seconds: config.context,
            overlap_seconds: config.crossfade.overlap,
            crossfade_mode: config.crossfade.mode,
        }
    }

    /// Sample count implied by the provenance: segments minus joint overlaps.
    pub fn ledger_samples(&self) -> usize {
        let segs: usize = self.provenance.iter().map(|p| p.segment_samples).sum();
        let joints: usize = self.provenance.iter().map(|p| p.joint_overlap_samples).sum();
        segs - joints
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("manifest record serializes")
    }
}

/// Re-run extraction and splicing from a manifest record alone.
pub fn rerender(record: &ManifestRecord, corpus: &AudioCorpus<'_>) -> Result<Waveform> {
    let mut segments = Vec::with_capacity(record.provenance.len());
    let mut joints = Vec::with_capacity(record.provenance.len());
    for p in &record.provenance {
        let cut = CutRef {
            recording_id: p.recording_id.clone(),
            channel: p.channel,
            start: p.start,
            end: p.end,
            tokens: UnitKey::new(p.tokens.clone())?,
        };
        let seg = dsp::extract_with_context(corpus.get(&p.recording_id)?, &cut, record.context_seconds)?;
        if seg.waveform.len() != p.segment_samples {
            return Err(Error::Validation(format!(
                "{}: segment {} re-extracted to {} samples, manifest says {}",
                record.utterance_id,
                cut.tokens,
                seg.waveform.len(),
                p.segment_samples
            )));
        }
        segments.push(seg);
        joints.push(p.joint_overlap_samples);
    }
    Ok(splice(&segments, &joints, record.crossfade_mode, record.level_mode)?.waveform)
}

pub fn load_generation_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::parse(&path.display().to_string(), i + 1, e.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub utterances: usize,
    pub generated_count: usize,
    pub skipped: Vec<Skip>,
    pub sample_rate: u32,
    pub total_samples: u64,
    pub total_audio_seconds: f64,
    pub total_audio_hours: f64,
    /// Unit length in tokens -> number of units spliced.
    pub unit_length_histogram: BTreeMap<usize, usize>,
    pub peak_limited_count: usize,
}

impl GenerationReport {
    fn empty(sample_rate: u32) -> Self {
        Self {
            utterances: 0,
            generated_count: 0,
            skipped: Vec::new(),
            sample_rate,
            total_samples: 0,
            total_audio_seconds: 0.0,
            total_audio_hours: 0.0,
            unit_length_histogram: BTreeMap::new(),
            peak_limited_count: 0,
        }
    }
}

enum Outcome {
    Generated(ManifestRecord),
    Skipped(Skip),
}

fn render_and_write(
    index: usize,
    utt: &crate::cstext::CsUtterance,
    req: &CollageRequest<'_>,
    corpus: &AudioCorpus<'_>,
) -> Outcome {
    let skip = |reason| {
        Outcome::Skipped(Skip {
            index,
            utterance_id: utt.id.clone(),
            reason,
        })
    };
    let mut stream = rng::stream(req.config.seed, index as u64);
    let generated = match generate_utterance(
        index,
        &utt.id,
        &utt.tokens,
        req.inventory,
        corpus,
        &req.config,
        &mut stream,
    ) {
        Ok(Ok(g)) => g,
        Ok(Err(reason)) => return skip(reason),
        Err(e) => {
            log::warn!("utterance {} failed: {e}", utt.id);
            return skip(SkipReason::Failed { message: e.to_string() });
        }
    };
    let record = ManifestRecord::from_utterance(&generated, &req.config);
    if let Err(e) = audio::write_wav(&req.output_dir.join(&record.audio_path), &generated.waveform) {
        log::warn!("utterance {} failed: {e}", utt.id);
        return skip(SkipReason::Failed { message: e.to_string() });
    }
    Outcome::Generated(record)
}

/// Generate every utterance of the request into `output_dir`.
pub fn generate_collage(req: &CollageRequest<'_>) -> Result<GenerationReport> {
    req.config.check()?;
    let corpus = AudioCorpus::new(req.recordings)?;
    corpus.check_inventory(req.inventory)?;
    for u in &req.cs_text.utterances {
        check_utterance_id(&u.id)?;
    }
    std::fs::create_dir_all(&req.output_dir).map_err(|e| Error::io(&req.output_dir, e))?;
    let manifest_path = req.output_dir.join(MANIFEST_FILE);
    let manifest_file = std::fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(req.config.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        req.cs_text
            .utterances
            .par_iter()
            .enumerate()
            .map(|(i, u)| render_and_write(i, u, req, &corpus))
            .collect()
    });

    let mut report = GenerationReport::empty(corpus.sample_rate());
    report.utterances = req.cs_text.len();
    let mut manifest = std::io::BufWriter::new(manifest_file);
    for outcome in outcomes {
        match outcome {
            Outcome::Generated(rec) => {
                writeln!(manifest, "{}", rec.to_json_line()).map_err(|e| Error::io(&manifest_path, e))?;
                report.generated_count += 1;
                report.total_samples += rec.num_samples as u64;
                report.peak_limited_count += usize::from(rec.peak_limited);
                for p in &rec.provenance {
                    *report.unit_length_histogram.entry(p.tokens.len()).or_default() += 1;
                }
            }
            Outcome::Skipped(s) => report.skipped.push(s),
        }
    }
    manifest.flush().map_err(|e| Error::io(&manifest_path, e))?;
    report.total_audio_seconds = report.total_samples as f64 / f64::from(report.sample_rate);
    report.total_audio_hours = report.total_audio_seconds / 3600.0;

    let report_path = req.output_dir.join(REPORT_FILE);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&report_path, json + "\n").map_err(|e| Error::io(&report_path, e))?;
    Ok(report)
}
