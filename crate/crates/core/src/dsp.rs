//! Splicing primitives: context-extended extraction, Hamming crossfade
//! overlap-add and RMS energy normalization.

use serde::{Deserialize, Serialize};

use crate::audio::{samples_to_seconds, seconds_to_samples, Waveform};
use crate::corpus::{read_samples, Recording};
use crate::error::{Error, Result};
use crate::inventory::CutRef;

/// Below this RMS a signal is treated as silent.
pub const SILENCE_RMS: f64 = 1e-8;

pub const DEFAULT_OVERLAP: f64 = 0.05;
pub const DEFAULT_CONTEXT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossfadeMode {
    /// Hamming-shaped weights rescaled so fade-in + fade-out = 1.
    #[default]
    NormalizedHamming,
    /// Rising and falling Hamming halves as-is; their sum ripples.
    RawHamming,
}

impl std::str::FromStr for CrossfadeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized-hamming" => Ok(Self::NormalizedHamming),
            "raw-hamming" => Ok(Self::RawHamming),
            _ => Err(Error::InvalidArgument(format!("unknown crossfade mode `{s}`"))),
        }
    }
}

impl std::fmt::Display for CrossfadeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::NormalizedHamming => "normalized-hamming",
            Self::RawHamming => "raw-hamming",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossfadeSpec {
    /// Overlap in seconds.
    pub overlap: f64,
    pub mode: CrossfadeMode,
}

impl Default for CrossfadeSpec {
    fn default() -> Self {
        Self {
            overlap: DEFAULT_OVERLAP,
            mode: CrossfadeMode::NormalizedHamming,
        }
    }
}

/// Rising half (`m = 0..len`) of the symmetric Hamming window of length
/// `2 * len`: `w(m) = 0.54 - 0.46 cos(2 pi m / (2 len - 1))`.
pub fn hamming_rising_half(len: usize) -> Vec<f64> {
    let denom = (2 * len).saturating_sub(1).max(1) as f64;
    (0..len)
        .map(|m| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * m as f64 / denom).cos())
        .collect()
}

/// `(fade_in, fade_out)` weights for an overlap of `len` samples.
pub fn fade_weights(len: usize, mode: CrossfadeMode) -> (Vec<f64>, Vec<f64>) {
    let h = hamming_rising_half(len);
    match mode {
        CrossfadeMode::NormalizedHamming => {
            let fade_in: Vec<f64> = (0..len).map(|k| h[k] / (h[k] + h[len - 1 - k])).collect();
            let fade_out = fade_in.iter().map(|w| 1.0 - w).collect();
            (fade_in, fade_out)
        }
        CrossfadeMode::RawHamming => {
            let fade_out = (0..len).map(|k| h[len - 1 - k]).collect();
            (h, fade_out)
        }
    }
}

/// Join `a` and `b`, crossfading the last `overlap` samples of `a` with the
/// first `overlap` samples of `b`.
pub fn overlap_add_samples(a: &Waveform, b: &Waveform, overlap: usize, mode: CrossfadeMode) -> Result<Waveform> {
    if a.sample_rate != b.sample_rate {
        return Err(Error::RateMismatch {
            what: "overlap-add operands".into(),
            expected: a.sample_rate,
            found: b.sample_rate,
        });
    }
    if overlap > a.len() || overlap > b.len() {
        return Err(Error::InvalidArgument(format!(
            "overlap of {overlap} samples exceeds operand lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let head = a.len() - overlap;
    let mut out = Vec::with_capacity(a.len() + b.len() - overlap);
    out.extend_from_slice(&a.samples[..head]);
    let (fade_in, fade_out) = fade_weights(overlap, mode);
    for k in 0..overlap {
        let mixed = fade_out[k] * f64::from(a.samples[head + k]) + fade_in[k] * f64::from(b.samples[k]);
        out.push(mixed as f32);
    }
    out.extend_from_slice(&b.samples[overlap..]);
    Ok(Waveform::new(out, a.sample_rate))
}

pub fn overlap_add(a: &Waveform, b: &Waveform, spec: &CrossfadeSpec) -> Result<Waveform> {
    if !(spec.overlap >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative overlap {}", spec.overlap)));
    }
    let len = seconds_to_samples(spec.overlap, a.sample_rate) as usize;
    overlap_add_samples(a, b, len, spec.mode)
}

fn loud_rms(x: &Waveform) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Degenerate("empty waveform".into()));
    }
    let r = x.rms();
    if !(r >= SILENCE_RMS) {
        return Err(Error::Degenerate(format!("silent waveform (rms {r:e})")));
    }
    Ok(r)
}

/// Scale `x` so its RMS equals `target_rms`.
pub fn rescale(x: &Waveform, target_rms: f64) -> Result<Waveform> {
    if !(target_rms > 0.0) || !target_rms.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target rms {target_rms} must be positive"
        )));
    }
    let gain = target_rms / loud_rms(x)?;
    Ok(Waveform::new(
        x.samples.iter().map(|&s| (f64::from(s) * gain) as f32).collect(),
        x.sample_rate,
    ))
}

/// Divide every sample by the signal's RMS.
pub fn normalize_energy(x: &Waveform) -> Result<Waveform> {
    rescale(x, 1.0)
}

/// A cut read with surrounding context.
#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    pub waveform: Waveform,
    /// Context actually obtained before the cut, in samples.
    pub head_samples: usize,
    /// Context actually obtained after the cut, in samples.
    pub tail_samples: usize,
}

impl Extracted {
    pub fn head(&self) -> f64 {
        samples_to_seconds(self.head_samples, self.waveform.sample_rate)
    }

    pub fn tail(&self) -> f64 {
        samples_to_seconds(self.tail_samples, self.waveform.sample_rate)
    }
}

/// Read `cut` widened by `context` seconds on each side, clipped to the
/// recording.
pub fn extract_with_context(rec: &Recording, cut: &CutRef, context: f64) -> Result<Extracted> {
    if cut.recording_id != rec.id {
        return Err(Error::InvalidArgument(format!(
            "cut from `{}` applied to recording `{}`",
            cut.recording_id, rec.id
        )));
    }
    if !(context >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative context {context}")));
    }
    let rate = rec.sample_rate;
    let total = rec.num_samples as i64;
    let start = seconds_to_samples(cut.start, rate);
    let end = seconds_to_samples(cut.end, rate).min(total);
    if start < 0 || start >= end {
        return Err(Error::Validation(format!(
            "cut [{}, {}] of `{}` lies outside the recording",
            cut.start, cut.end, rec.id
        )));
    }
    let ctx = seconds_to_samples(context, rate);
    let from = (start - ctx).max(0);
    let to = (end + ctx).min(total);
    let waveform = read_samples(rec, cut.channel, from as u64, (to - from) as usize)?;
    Ok(Extracted {
        waveform,
        head_samples: (start - from) as usize,
        tail_samples: (to - end) as usize,
    })
}
