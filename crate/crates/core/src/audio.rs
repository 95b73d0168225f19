//! Waveform buffers and 16-bit PCM WAV I/O.
//!
//! Samples are decoded as `i16 / 32768` and encoded with
//! `clamp(round(x * 32768), -32768, 32767)`.

use std::path::Path;

use crate::error::{Error, Result};

/// Seconds to a sample index: `round(seconds * rate)` with ties to even.
///
/// This is the only time/sample conversion in the crate, so segment lengths
/// computed anywhere agree to the sample.
pub fn seconds_to_samples(seconds: f64, sample_rate: u32) -> i64 {
    (seconds * f64::from(sample_rate)).round_ties_even() as i64
}

pub fn samples_to_seconds(samples: usize, sample_rate: u32) -> f64 {
    samples as f64 / f64::from(sample_rate)
}

/// Mono floating-point audio.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Self {
        Self { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        samples_to_seconds(self.samples.len(), self.sample_rate)
    }

    /// Root mean square, accumulated in f64.
    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.is_finite())
    }
}

pub fn rms(samples: &[f32]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let sum: f64 = samples.iter().map(|&s| f64::from(s) * f64::from(s)).sum();
    (sum / samples.len() as f64).sqrt()
}

pub fn sample_to_pcm16(x: f32) -> i16 {
    (f64::from(x) * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

pub fn pcm16_to_sample(x: i16) -> f32 {
    f32::from(x) / 32768.0
}

/// Header facts about a WAV file, read without decoding samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavInfo {
    pub sample_rate: u32,
    pub channels: u16,
    /// Frames per channel.
    pub num_frames: u64,
}

fn open_reader(path: &Path) -> Result<hound::WavReader<std::io::BufReader<std::fs::File>>> {
    let reader = hound::WavReader::open(path).map_err(|e| Error::Wav {
        path: path.to_path_buf(),
        source: e,
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::Wav {
            path: path.to_path_buf(),
            source: hound::Error::Unsupported,
        });
    }
    Ok(reader)
}

pub fn wav_info(path: &Path) -> Result<WavInfo> {
    let reader = open_reader(path)?;
    let spec = reader.spec();
    Ok(WavInfo {
        sample_rate: spec.sample_rate,
        channels: spec.channels,
        num_frames: u64::from(reader.duration()),
    })
}

/// Read `len` frames of one channel starting at frame `start`.
///
/// The caller has already clipped the range to the file; reading past the
/// end is reported as a corrupt file.
pub fn read_wav_frames(path: &Path, channel: u16, start: u64, len: usize) -> Result<(Vec<f32>, u32)> {
    let mut reader = open_reader(path)?;
    let spec = reader.spec();
    if channel >= spec.channels {
        return Err(Error::Validation(format!(
            "{}: channel {} requested but file has {} channel(s)",
            path.display(),
            channel,
            spec.channels
        )));
    }
    let wav_err = |e| Error::Wav {
        path: path.to_path_buf(),
        source: e,
    };
    reader.seek(start as u32).map_err(|e| Error::io(path, e))?;
    let channels = usize::from(spec.channels);
    let mut out = Vec::with_capacity(len);
    let mut samples = reader.samples::<i16>();
    for _ in 0..len {
        for c in 0..channels {
            let s = samples
                .next()
                .ok_or_else(|| wav_err(hound::Error::FormatError("unexpected end of data")))?
                .map_err(wav_err)?;
            if c == usize::from(channel) {
                out.push(pcm16_to_sample(s));
            }
        }
    }
    Ok((out, spec.sample_rate))
}

pub fn read_wav(path: &Path, channel: u16) -> Result<Waveform> {
    let info = wav_info(path)?;
    let (samples, rate) = read_wav_frames(path, channel, 0, info.num_frames as usize)?;
    Ok(Waveform::new(samples, rate))
}

/// Encode a mono waveform as 16-bit PCM into any seekable writer.
pub fn encode_wav<W: std::io::Write + std::io::Seek>(wave: &Waveform, writer: W) -> Result<(), hound::Error> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: wave.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::new(writer, spec)?;
    {
        let mut w16 = w.get_i16_writer(wave.samples.len() as u32);
        for &s in &wave.samples {
            w16.write_sample(sample_to_pcm16(s));
        }
        w16.flush()?;
    }
    w.finalize()
}

pub fn write_wav(path: &Path, wave: &Waveform) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    encode_wav(wave, std::io::BufWriter::new(file)).map_err(|e| Error::Wav {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Interleave several equal-length channels into one multi-channel WAV.
pub fn write_wav_channels(path: &Path, channels: &[Vec<f32>], sample_rate: u32) -> Result<()> {
    let wav_err = |e| Error::Wav {
        path: path.to_path_buf(),
        source: e,
    };
    let spec = hound::WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let frames = channels.first().map_or(0, Vec::len);
    if channels.iter().any(|c| c.len() != frames) {
        return Err(Error::InvalidArgument("channel lengths differ".into()));
    }
    let mut w = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for i in 0..frames {
        for ch in channels {
            w.write_sample(sample_to_pcm16(ch[i])).map_err(wav_err)?;
        }
    }
    w.finalize().map_err(wav_err)
}
