//! A small synthetic corpus for demos and end-to-end tests.
//!
//! Four monolingual "recordings" (two English, two Mandarin) in which every
//! token is a short tone at a token-specific pitch, with CTM alignments, a
//! 20-sentence code-switched text and a toy parallel corpus for text
//! synthesis. Everything is generated deterministically.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::audio::{self, Waveform};
use crate::corpus::{write_manifest, Recording};
use crate::cstext::ParallelSentence;
use crate::error::{Error, Result};
use crate::rng;

pub const SAMPLE_RATE: u32 = 16_000;

const VOCAB: &[&str] = &[
    "i", "like", "to", "eat", "rice", "we", "go", "home", "today", "every", "day", "is", "very", "good", "我", "喜",
    "欢", "吃", "米", "饭", "们", "今", "天", "回", "家", "每", "很", "好",
];

/// (recording id, leading silence in seconds, amplitude, phrases)
const RECORDINGS: &[(&str, f64, f32, &[&str])] = &[
    (
        "en_a",
        0.20,
        0.30,
        &["i like to eat rice", "we go home today", "every day is very good"],
    ),
    (
        "en_b",
        0.15,
        0.55,
        &["today we eat rice", "i go home every day", "very good"],
    ),
    (
        "zh_a",
        0.25,
        0.12,
        &["我 喜 欢 吃 米 饭", "我 们 今 天 回 家", "每 天 很 好"],
    ),
    ("zh_b", 0.02, 0.40, &["今 天 我 们 吃 饭", "我 很 喜 欢", "天 天 回 家"]),
];

const CS_SENTENCES: &[&str] = &[
    "我 喜 欢 eat rice",
    "i like 吃 米 饭",
    "we 回 家 today",
    "今 天 we go home",
    "every day 我 们 吃 饭",
    "我 like to eat 米 饭",
    "very good 很 好",
    "i 喜 欢 rice",
    "我 们 go home every day",
    "today 我 很 好",
    "每 天 i eat rice",
    "we like 今 天",
    "我 go home",
    "天 天 eat rice",
    "i like pizza 饭",
    "好 good",
    "我 们 今 天 eat rice",
    "every day is 很 好",
    "i go 回 家",
    "今 天 is very good",
];

/// Within-phrase gap between tokens, seconds.
const WORD_GAP: f64 = 0.03;
/// Gap between phrases; wider than the default gap tolerance.
const PHRASE_GAP: f64 = 0.8;
const TRAILING: f64 = 1.0;

fn token_index(token: &str) -> usize {
    VOCAB.iter().position(|v| *v == token).expect("toy token in vocabulary")
}

fn token_duration(token: &str) -> f64 {
    0.22 + 0.02 * (token_index(token) % 9) as f64
}

fn token_pitch(token: &str) -> f64 {
    140.0 + 23.0 * token_index(token) as f64
}

/// A tone with a 10 ms raised-cosine fade at each end.
fn tone(freq: f64, len: usize, amp: f32) -> Vec<f32> {
    let fade = (0.01 * f64::from(SAMPLE_RATE)) as usize;
    (0..len)
        .map(|i| {
            let t = i as f64 / f64::from(SAMPLE_RATE);
            let edge = i.min(len - 1 - i);
            let env = if edge < fade {
                0.5 - 0.5 * (std::f64::consts::PI * edge as f64 / fade as f64).cos()
            } else {
                1.0
            };
            let s = (2.0 * std::f64::consts::PI * freq * t).sin() + 0.3 * (4.0 * std::f64::consts::PI * freq * t).sin();
            (f64::from(amp) * env * s / 1.3) as f32
        })
        .collect()
}

/// Paths of a written toy corpus.
#[derive(Debug, Clone)]
pub struct ToyCorpus {
    pub root: PathBuf,
    pub manifest: PathBuf,
    pub ctm: PathBuf,
    pub cs_text: PathBuf,
    pub recordings: Vec<Recording>,
}

/// Write audio, manifest, CTM and CS text under `root`.
pub fn write_toy_corpus(root: &Path) -> Result<ToyCorpus> {
    let audio_dir = root.join("audio");
    std::fs::create_dir_all(&audio_dir).map_err(|e| Error::io(&audio_dir, e))?;
    let mut ctm = String::new();
    let mut recordings = Vec::new();
    for &(id, lead, amp, phrases) in RECORDINGS {
        let mut samples: Vec<f32> = Vec::new();
        let mut cursor = lead;
        let pad_to = |samples: &mut Vec<f32>, t: f64| {
            let n = audio::seconds_to_samples(t, SAMPLE_RATE) as usize;
            samples.resize(n, 0.0);
        };
        for (p, phrase) in phrases.iter().enumerate() {
            if p > 0 {
                cursor += PHRASE_GAP;
            }
            for (w, token) in phrase.split_whitespace().enumerate() {
                if w > 0 {
                    cursor += WORD_GAP;
                }
                let dur = token_duration(token);
                pad_to(&mut samples, cursor);
                let start = samples.len();
                let len = audio::seconds_to_samples(cursor + dur, SAMPLE_RATE) as usize - start;
                samples.extend(tone(token_pitch(token), len, amp));
                let _ = writeln!(ctm, "{id} 1 {cursor:.3} {dur:.3} {token}");
                cursor += dur;
            }
        }
        pad_to(&mut samples, cursor + TRAILING);
        let path = audio_dir.join(format!("{id}.wav"));
        audio::write_wav(&path, &Waveform::new(samples.clone(), SAMPLE_RATE))?;
        recordings.push(Recording {
            id: id.to_string(),
            audio_path: path,
            sample_rate: SAMPLE_RATE,
            num_samples: samples.len() as u64,
            channel: 0,
        });
    }
    let write = |name: &str, text: &str| -> Result<PathBuf> {
        let path = root.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    };
    let manifest = write("corpus.jsonl", &write_manifest(&recordings, root))?;
    let ctm = write("alignments.ctm", &ctm)?;
    let cs: String = CS_SENTENCES
        .iter()
        .enumerate()
        .map(|(i, s)| format!("cs{i:02}\t{s}\n"))
        .collect();
    let cs_text = write("cs_text.tsv", &cs)?;
    Ok(ToyCorpus {
        root: root.to_path_buf(),
        manifest,
        ctm,
        cs_text,
        recordings,
    })
}

const LEXICON: &[(&str, &str)] = &[
    ("كتاب", "book"),
    ("بيت", "house"),
    ("ماء", "water"),
    ("شمس", "sun"),
    ("قلم", "pen"),
    ("باب", "door"),
    ("ولد", "boy"),
    ("مدينة", "city"),
    ("سيارة", "car"),
    ("طريق", "road"),
];

/// Unaligned function words.
const FUNCTION_WORDS: &[&str] = &["في", "على", "و"];

/// `count` seeded Arabic/English sentence pairs with one-to-one alignments
/// for lexicon words and no alignment for function words.
pub fn parallel_corpus(count: usize, seed: u64) -> Vec<ParallelSentence> {
    (0..count)
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let len = r.gen_range(3..=9);
            let mut source = Vec::with_capacity(len);
            let mut target = Vec::new();
            let mut alignment = Vec::new();
            for s in 0..len {
                if r.gen_bool(0.25) {
                    source.push(FUNCTION_WORDS[r.gen_range(0..FUNCTION_WORDS.len())].to_string());
                } else {
                    let (ar, en) = LEXICON[r.gen_range(0..LEXICON.len())];
                    source.push(ar.to_string());
                    alignment.push((s, target.len()));
                    target.push(en.to_string());
                }
            }
            ParallelSentence {
                id: format!("par{i:05}"),
                source_tokens: source,
                target_tokens: target,
                alignment,
            }
        })
        .collect()
}

/// Render sentences as the parallel-text and Pharaoh alignment files.
pub fn parallel_files(sentences: &[ParallelSentence]) -> (String, String) {
    let mut parallel = String::new();
    let mut align = String::new();
    for s in sentences {
        let _ = writeln!(
            parallel,
            "{}\t{}\t{}",
            s.id,
            s.source_tokens.join(" "),
            s.target_tokens.join(" ")
        );
        let pairs: Vec<String> = s.alignment.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        let _ = writeln!(align, "{}", pairs.join(" "));
    }
    (parallel, align)
}
