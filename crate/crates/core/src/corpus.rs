//! Corpus metadata, CTM alignments and raw sample access.
//!
//! A corpus manifest is JSON lines, one recording per line:
//!
//! ```text
//! {"id":"rec1","audio_path":"rec1.wav","sample_rate":16000,"duration":10.0}
//! ```
//!
//! `num_samples` may be given instead of (or alongside) `duration`; it wins
//! when both are present. `channel` is an optional 0-based default channel.
//! Relative audio paths resolve against the manifest's directory.
//!
//! CTM lines are `<recording-id> <channel> <begin> <duration> <token> [<conf>]`
//! with a 1-based channel. Blank lines and `;;` comments are skipped.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::{self, seconds_to_samples, Waveform};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub id: String,
    pub audio_path: PathBuf,
    pub sample_rate: u32,
    pub num_samples: u64,
    /// 0-based channel used by [`read_window`].
    pub channel: u16,
}

impl Recording {
    pub fn duration(&self) -> f64 {
        self.num_samples as f64 / f64::from(self.sample_rate)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestRecord {
    id: String,
    audio_path: PathBuf,
    sample_rate: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    num_samples: Option<u64>,
    #[serde(default)]
    channel: u16,
}

pub fn parse_manifest<R: BufRead>(reader: R, base_dir: &Path, source_name: &str) -> Result<Vec<Recording>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rec: ManifestRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?;
        if rec.sample_rate == 0 {
            return Err(Error::parse(source_name, i + 1, "sample_rate must be positive"));
        }
        let num_samples = match (rec.num_samples, rec.duration) {
            (Some(n), _) => n,
            (None, Some(d)) if d.is_finite() && d > 0.0 => seconds_to_samples(d, rec.sample_rate).max(0) as u64,
            (None, Some(_)) => return Err(Error::parse(source_name, i + 1, "duration must be positive")),
            (None, None) => return Err(Error::parse(source_name, i + 1, "missing duration or num_samples")),
        };
        if num_samples == 0 {
            return Err(Error::parse(source_name, i + 1, "recording has no samples"));
        }
        let audio_path = if rec.audio_path.is_absolute() {
            rec.audio_path
        } else {
            base_dir.join(rec.audio_path)
        };
        out.push(Recording {
            id: rec.id,
            audio_path,
            sample_rate: rec.sample_rate,
            num_samples,
            channel: rec.channel,
        });
    }
    Ok(out)
}

pub fn load_manifest(path: &Path) -> Result<Vec<Recording>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(std::io::BufReader::new(file), base, &path.display().to_string())
}

/// Serialize recordings as manifest lines. Paths are written relative to
/// `base_dir` when they live under it.
pub fn write_manifest(recordings: &[Recording], base_dir: &Path) -> String {
    let mut out = String::new();
    for r in recordings {
        let rel = r
            .audio_path
            .strip_prefix(base_dir)
            .unwrap_or(&r.audio_path)
            .to_path_buf();
        let rec = ManifestRecord {
            id: r.id.clone(),
            audio_path: rel,
            sample_rate: r.sample_rate,
            duration: Some(r.duration()),
            num_samples: Some(r.num_samples),
            channel: r.channel,
        };
        out.push_str(&serde_json::to_string(&rec).expect("manifest record serializes"));
        out.push('\n');
    }
    out
}

/// The single sample rate shared by every recording.
pub fn corpus_sample_rate(recordings: &[Recording]) -> Result<u32> {
    let Some(first) = recordings.first() else {
        return Err(Error::Validation("corpus has no recordings".into()));
    };
    for r in recordings {
        if r.sample_rate != first.sample_rate {
            return Err(Error::RateMismatch {
                what: r.id.clone(),
                expected: first.sample_rate,
                found: r.sample_rate,
            });
        }
    }
    Ok(first.sample_rate)
}

/// Check that a recording's audio file exists, is 16-bit PCM, and agrees
/// with the manifest on rate, channel count and length.
pub fn check_audio(rec: &Recording) -> Result<()> {
    let info = audio::wav_info(&rec.audio_path)?;
    if info.sample_rate != rec.sample_rate {
        return Err(Error::RateMismatch {
            what: rec.audio_path.display().to_string(),
            expected: rec.sample_rate,
            found: info.sample_rate,
        });
    }
    if rec.channel >= info.channels {
        return Err(Error::Validation(format!(
            "{}: channel {} out of range ({} channel(s))",
            rec.audio_path.display(),
            rec.channel,
            info.channels
        )));
    }
    if info.num_frames < rec.num_samples {
        return Err(Error::Validation(format!(
            "{}: manifest says {} samples, file has {}",
            rec.audio_path.display(),
            rec.num_samples,
            info.num_frames
        )));
    }
    Ok(())
}

/// One time-stamped token inside a recording.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedToken {
    pub recording_id: String,
    /// CTM channel, 1-based.
    pub channel: u16,
    pub start: f64,
    pub duration: f64,
    pub token: String,
}

impl AlignedToken {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// 0-based audio channel.
    pub fn channel_index(&self) -> u16 {
        self.channel - 1
    }

    /// Half-open sample interval `[start, end)`.
    pub fn sample_span(&self, sample_rate: u32) -> (i64, i64) {
        (
            seconds_to_samples(self.start, sample_rate),
            seconds_to_samples(self.end(), sample_rate),
        )
    }
}

/// Recordings plus their tokens, grouped by recording id and sorted by
/// (channel, start).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SupervisionSet {
    pub recordings: Vec<Recording>,
    pub tokens: BTreeMap<String, Vec<AlignedToken>>,
}

impl SupervisionSet {
    pub fn new(recordings: Vec<Recording>) -> Self {
        Self {
            recordings,
            tokens: BTreeMap::new(),
        }
    }

    pub fn recording(&self, id: &str) -> Option<&Recording> {
        self.recordings.iter().find(|r| r.id == id)
    }

    pub fn token_count(&self) -> usize {
        self.tokens.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.token_count() == 0
    }

    pub fn iter_tokens(&self) -> impl Iterator<Item = &AlignedToken> {
        self.tokens.values().flatten()
    }

    /// Insert a token, keeping its group sorted.
    pub fn push(&mut self, token: AlignedToken) {
        let group = self.tokens.entry(token.recording_id.clone()).or_default();
        let pos = group.partition_point(|t| token_order(t, &token).is_le());
        group.insert(pos, token);
    }

    /// Serialize to CTM, one line per token in canonical order.
    pub fn to_ctm(&self) -> String {
        let mut out = String::new();
        for t in self.iter_tokens() {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                t.recording_id, t.channel, t.start, t.duration, t.token
            );
        }
        out
    }
}

fn token_order(a: &AlignedToken, b: &AlignedToken) -> std::cmp::Ordering {
    a.channel
        .cmp(&b.channel)
        .then(a.start.total_cmp(&b.start))
        .then(a.duration.total_cmp(&b.duration))
        .then_with(|| a.token.cmp(&b.token))
}

/// Parse CTM into a [`SupervisionSet`] over `recordings`.
pub fn parse_ctm<R: BufRead>(reader: R, recordings: &[Recording], source_name: &str) -> Result<SupervisionSet> {
    let known: HashSet<&str> = recordings.iter().map(|r| r.id.as_str()).collect();
    let mut set = SupervisionSet::new(recordings.to_vec());
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(source_name, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(";;") {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if !(5..=6).contains(&fields.len()) {
            return Err(Error::parse(
                source_name,
                lineno,
                format!("expected 5 or 6 fields, found {}", fields.len()),
            ));
        }
        let channel: u16 = fields[1]
            .parse()
            .map_err(|_| Error::parse(source_name, lineno, format!("bad channel `{}`", fields[1])))?;
        if channel == 0 {
            return Err(Error::parse(source_name, lineno, "channel is 1-based"));
        }
        let number = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(source_name, lineno, format!("non-numeric {what} `{s}`")))
        };
        let start = number(fields[2], "begin time")?;
        let duration = number(fields[3], "duration")?;
        if start < 0.0 {
            return Err(Error::Validation(format!(
                "{source_name}:{lineno}: negative begin time {start}"
            )));
        }
        if duration <= 0.0 {
            return Err(Error::Validation(format!(
                "{source_name}:{lineno}: non-positive duration {duration}"
            )));
        }
        if !known.contains(fields[0]) {
            return Err(Error::UnknownRecording(fields[0].to_string()));
        }
        set.push(AlignedToken {
            recording_id: fields[0].to_string(),
            channel,
            start,
            duration,
            token: fields[4].to_string(),
        });
    }
    Ok(set)
}

pub fn load_ctm(path: &Path, recordings: &[Recording]) -> Result<SupervisionSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ctm(std::io::BufReader::new(file), recordings, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    OutOfBounds {
        recording_id: String,
        token: String,
        end: f64,
        recording_duration: f64,
    },
    Overlap {
        recording_id: String,
        channel: u16,
        first: (String, f64, f64),
        second: (String, f64, f64),
    },
    DuplicateRecording(String),
    UnknownRecording(String),
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Finding::OutOfBounds {
                recording_id,
                token,
                end,
                recording_duration,
            } => write!(
                f,
                "{recording_id}: token `{token}` ends at {end}s past recording end {recording_duration}s"
            ),
            Finding::Overlap {
                recording_id,
                channel,
                first,
                second,
            } => write!(
                f,
                "{recording_id} ch{channel}: `{}` [{}, {}] overlaps `{}` [{}, {}]",
                first.0, first.1, first.2, second.0, second.1, second.2
            ),
            Finding::DuplicateRecording(id) => write!(f, "duplicate recording id `{id}`"),
            Finding::UnknownRecording(id) => write!(f, "tokens reference unknown recording `{id}`"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_accepted() {
            return Ok(());
        }
        let mut msg = format!("{} finding(s)", self.findings.len());
        for f in self.findings.iter().take(10) {
            let _ = write!(msg, "\n  {f}");
        }
        Err(Error::Validation(msg))
    }
}

/// Report every out-of-bounds token, every overlapping token pair on the same
/// recording channel, and every duplicate recording id. Times are compared at
/// sample resolution; a token may end up to one sample past the recording.
pub fn validate(set: &SupervisionSet) -> ValidationReport {
    let mut findings = Vec::new();
    let mut seen = HashSet::new();
    for r in &set.recordings {
        if !seen.insert(r.id.as_str()) {
            findings.push(Finding::DuplicateRecording(r.id.clone()));
        }
    }
    let by_id: HashMap<&str, &Recording> = set.recordings.iter().map(|r| (r.id.as_str(), r)).collect();

    for (rec_id, tokens) in &set.tokens {
        let Some(rec) = by_id.get(rec_id.as_str()) else {
            findings.push(Finding::UnknownRecording(rec_id.clone()));
            continue;
        };
        let rate = rec.sample_rate;
        for t in tokens {
            let (_, end) = t.sample_span(rate);
            if end > rec.num_samples as i64 + 1 {
                findings.push(Finding::OutOfBounds {
                    recording_id: rec_id.clone(),
                    token: t.token.clone(),
                    end: t.end(),
                    recording_duration: rec.duration(),
                });
            }
        }
        // Sweep: tokens are sorted by (channel, start); keep earlier tokens
        // whose end is still past the current start.
        let mut active: Vec<&AlignedToken> = Vec::new();
        let mut channel = None;
        for t in tokens {
            if channel != Some(t.channel) {
                active.clear();
                channel = Some(t.channel);
            }
            let (start, end) = t.sample_span(rate);
            active.retain(|a| a.sample_span(rate).1 > start);
            for a in &active {
                let (a_start, a_end) = a.sample_span(rate);
                if a_start < end && start < a_end {
                    findings.push(Finding::Overlap {
                        recording_id: rec_id.clone(),
                        channel: t.channel,
                        first: (a.token.clone(), a.start, a.end()),
                        second: (t.token.clone(), t.start, t.end()),
                    });
                }
            }
            active.push(t);
        }
    }
    ValidationReport { findings }
}

/// Read `[start, end]` seconds of the recording's default channel. The range
/// is clipped to the recording first.
pub fn read_window(rec: &Recording, start: f64, end: f64) -> Result<Waveform> {
    read_channel_window(rec, rec.channel, start, end)
}

pub fn read_channel_window(rec: &Recording, channel: u16, start: f64, end: f64) -> Result<Waveform> {
    if !(start < end) || !start.is_finite() || !end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "empty or invalid window [{start}, {end}]"
        )));
    }
    let clipped_start = start.max(0.0);
    let clipped_end = end.min(rec.duration());
    if clipped_start >= clipped_end {
        return Ok(Waveform::new(Vec::new(), rec.sample_rate));
    }
    let first = seconds_to_samples(clipped_start, rec.sample_rate).max(0) as u64;
    let len = seconds_to_samples(clipped_end - clipped_start, rec.sample_rate).max(0) as u64;
    let len = len.min(rec.num_samples.saturating_sub(first));
    read_samples(rec, channel, first, len as usize)
}

/// Read `len` samples of `channel` starting at sample `first`.
pub fn read_samples(rec: &Recording, channel: u16, first: u64, len: usize) -> Result<Waveform> {
    let (samples, rate) = audio::read_wav_frames(&rec.audio_path, channel, first, len)?;
    if rate != rec.sample_rate {
        return Err(Error::RateMismatch {
            what: rec.audio_path.display().to_string(),
            expected: rec.sample_rate,
            found: rate,
        });
    }
    Ok(Waveform::new(samples, rate))
}
