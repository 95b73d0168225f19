//! Code-switching and recognition metrics.
//!
//! * Script-based language tags for tokens.
//! * Code-Mixing Index (CMI), reported on a 0..100 scale.
//! * Edit-distance error rates: WER (whitespace words), CER (characters) and
//!   MER (English words plus single Mandarin characters).
//! * Corpus CMI restricted to hypotheses whose MER is within a threshold.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    Mandarin,
    English,
    Arabic,
    /// Digits, punctuation and scripts outside the three above.
    Other,
}

impl std::str::FromStr for Lang {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mandarin" | "zh" | "cmn" => Ok(Lang::Mandarin),
            "english" | "en" | "eng" => Ok(Lang::English),
            "arabic" | "ar" | "ara" => Ok(Lang::Arabic),
            "other" => Ok(Lang::Other),
            _ => Err(Error::InvalidArgument(format!("unknown language `{s}`"))),
        }
    }
}

pub fn is_cjk_ideograph(c: char) -> bool {
    matches!(c as u32,
        0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2A6DF
        | 0x2A700..=0x2EBEF
        | 0x30000..=0x3134F)
}

fn is_arabic_block(c: char) -> bool {
    matches!(c as u32,
        0x0600..=0x06FF
        | 0x0750..=0x077F
        | 0x08A0..=0x08FF
        | 0xFB50..=0xFDFF
        | 0xFE70..=0xFEFF)
}

fn is_latin(c: char) -> bool {
    (c as u32) < 0x0250 || matches!(c as u32, 0x1E00..=0x1EFF)
}

/// Tag a token by the script of its first letter. Tokens without letters
/// are [`Lang::Other`].
pub fn classify_token(token: &str) -> Lang {
    for c in token.chars() {
        if is_cjk_ideograph(c) {
            return Lang::Mandarin;
        }
        if c.is_alphabetic() {
            return if is_arabic_block(c) {
                Lang::Arabic
            } else if is_latin(c) {
                Lang::English
            } else {
                Lang::Other
            };
        }
    }
    Lang::Other
}

/// Split on whitespace, then split every CJK ideograph out as its own token.
pub fn tokenize_mixed(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let mut word = String::new();
        for c in chunk.chars() {
            if is_cjk_ideograph(c) {
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                out.push(c.to_string());
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedUtterance {
    pub tokens: Vec<String>,
    pub tags: Vec<Lang>,
}

impl TaggedUtterance {
    pub fn classify(tokens: Vec<String>) -> Self {
        let tags = tokens.iter().map(|t| classify_token(t)).collect();
        Self { tokens, tags }
    }
}

/// CMI of a tag sequence, ×100. `None` when no token carries a language.
///
/// With N language-bearing tokens, `max` the count of the dominant language
/// and P the number of language changes between consecutive language-bearing
/// tokens: `100 * (0.5 * (N - max) + 0.5 * P) / N`.
pub fn cmi_of_tags(tags: &[Lang]) -> Option<f64> {
    let counted: Vec<Lang> = tags.iter().copied().filter(|&t| t != Lang::Other).collect();
    let n = counted.len();
    if n == 0 {
        return None;
    }
    let mut counts: HashMap<Lang, usize> = HashMap::new();
    for &t in &counted {
        *counts.entry(t).or_default() += 1;
    }
    let max = counts.values().copied().max().unwrap_or(0);
    let switches = counted.windows(2).filter(|p| p[0] != p[1]).count();
    Some(100.0 * (0.5 * (n - max) as f64 + 0.5 * switches as f64) / n as f64)
}

pub fn cmi(utt: &TaggedUtterance) -> Option<f64> {
    cmi_of_tags(&utt.tags)
}

/// Mean CMI over utterances where it is defined.
pub fn corpus_cmi<'a, I>(utterances: I) -> Option<f64>
where
    I: IntoIterator<Item = &'a [Lang]>,
{
    let (sum, count) = utterances
        .into_iter()
        .filter_map(cmi_of_tags)
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorRateResult {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub reference_length: usize,
    pub rate: f64,
}

impl ErrorRateResult {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    fn with_rate(mut self) -> Self {
        self.rate = if self.reference_length == 0 {
            0.0
        } else {
            self.errors() as f64 / self.reference_length as f64
        };
        self
    }

    /// Pool counts from several utterances.
    pub fn accumulate(&self, other: &ErrorRateResult) -> ErrorRateResult {
        ErrorRateResult {
            substitutions: self.substitutions + other.substitutions,
            deletions: self.deletions + other.deletions,
            insertions: self.insertions + other.insertions,
            reference_length: self.reference_length + other.reference_length,
            rate: 0.0,
        }
        .with_rate()
    }
}

/// Levenshtein alignment with unit costs. Counts come from the backtrace
/// that, walking back from the end, prefers substitution/match, then
/// insertion, then deletion.
pub fn error_rate<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Result<ErrorRateResult> {
    if reference.is_empty() {
        return Err(Error::InvalidArgument(
            "error rate undefined for an empty reference".into(),
        ));
    }
    Ok(align_counts(reference, hypothesis).with_rate())
}

fn align_counts<T: PartialEq>(r: &[T], h: &[T]) -> ErrorRateResult {
    let (n, m) = (r.len(), h.len());
    let width = m + 1;
    let mut d = vec![0usize; (n + 1) * width];
    for (j, cell) in d[..width].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        d[i * width] = i;
        for j in 1..=m {
            let sub = d[(i - 1) * width + j - 1] + usize::from(r[i - 1] != h[j - 1]);
            let ins = d[i * width + j - 1] + 1;
            let del = d[(i - 1) * width + j] + 1;
            d[i * width + j] = sub.min(ins).min(del);
        }
    }
    let mut out = ErrorRateResult {
        reference_length: n,
        ..Default::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * width + j];
        if i > 0 && j > 0 {
            let mismatch = r[i - 1] != h[j - 1];
            if d[(i - 1) * width + j - 1] + usize::from(mismatch) == here {
                out.substitutions += usize::from(mismatch);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && d[i * width + j - 1] + 1 == here {
            out.insertions += 1;
            j -= 1;
        } else {
            out.deletions += 1;
            i -= 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    Wer,
    Cer,
    #[default]
    Mer,
}

impl ScoreMode {
    pub fn tokenize(self, text: &str) -> Vec<String> {
        match self {
            ScoreMode::Wer => text.split_whitespace().map(str::to_string).collect(),
            ScoreMode::Cer => text.chars().filter(|c| !c.is_whitespace()).map(String::from).collect(),
            ScoreMode::Mer => tokenize_mixed(text),
        }
    }
}

impl std::str::FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wer" => Ok(ScoreMode::Wer),
            "cer" => Ok(ScoreMode::Cer),
            "mer" => Ok(ScoreMode::Mer),
            _ => Err(Error::InvalidArgument(format!("unknown scoring mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilteredCmi {
    /// `None` when no retained utterance has a defined CMI.
    pub cmi: Option<f64>,
    pub retained: usize,
    pub total: usize,
}

/// Corpus CMI of the hypotheses whose MER against their reference is at most
/// `threshold` (a fraction, 0.20 = 20%).
pub fn filtered_corpus_cmi<S: AsRef<str>>(pairs: &[(S, S)], threshold: f64) -> FilteredCmi {
    let mut tags = Vec::new();
    for (r, h) in pairs {
        let ref_tokens = tokenize_mixed(r.as_ref());
        let hyp_tokens = tokenize_mixed(h.as_ref());
        let Ok(score) = error_rate(&ref_tokens, &hyp_tokens) else {
            continue;
        };
        if score.rate <= threshold {
            tags.push(TaggedUtterance::classify(hyp_tokens).tags);
        }
    }
    FilteredCmi {
        cmi: corpus_cmi(tags.iter().map(Vec::as_slice)),
        retained: tags.len(),
        total: pairs.len(),
    }
}

/// Parse `utterance_id<TAB>text` lines.
pub fn parse_transcripts<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line.split_once('\t').unwrap_or((line.as_str(), ""));
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::parse(source_name, i + 1, "empty utterance id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(
                source_name,
                i + 1,
                format!("duplicate utterance id `{id}`"),
            ));
        }
        out.push((id.to_string(), text.trim().to_string()));
    }
    Ok(out)
}

pub fn load_transcripts(path: &Path) -> Result<Vec<(String, String)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_transcripts(std::io::BufReader::new(file), &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtteranceScore {
    pub id: String,
    #[serde(flatten)]
    pub result: ErrorRateResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub mode: ScoreMode,
    pub corpus: ErrorRateResult,
    pub utterances: Vec<UtteranceScore>,
    /// Reference ids with no hypothesis; scored against an empty hypothesis.
    pub missing_hypotheses: Vec<String>,
    /// Hypothesis ids with no reference; ignored.
    pub extra_hypotheses: Vec<String>,
    /// References with no tokens under this mode; excluded from the corpus rate.
    pub empty_references: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_cmi: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_cmi: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filtered_cmi: Option<FilteredCmi>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreOptions {
    pub mode: ScoreMode,
    pub cmi: bool,
    pub filter_threshold: Option<f64>,
}

/// Score hypotheses against references, pairing them by utterance id.
pub fn score(refs: &[(String, String)], hyps: &[(String, String)], opts: &ScoreOptions) -> ScoreReport {
    let hyp_map: HashMap<&str, &str> = hyps.iter().map(|(id, t)| (id.as_str(), t.as_str())).collect();
    let ref_ids: std::collections::HashSet<&str> = refs.iter().map(|(id, _)| id.as_str()).collect();
    let mut corpus = ErrorRateResult::default();
    let mut utterances = Vec::new();
    let mut missing = Vec::new();
    let mut empty = Vec::new();
    let mut pairs = Vec::new();
    for (id, ref_text) in refs {
        let hyp_text = hyp_map.get(id.as_str()).copied().unwrap_or_else(|| {
            missing.push(id.clone());
            ""
        });
        pairs.push((ref_text.as_str(), hyp_text));
        let r = opts.mode.tokenize(ref_text);
        let h = opts.mode.tokenize(hyp_text);
        match error_rate(&r, &h) {
            Ok(result) => {
                corpus = corpus.accumulate(&result);
                utterances.push(UtteranceScore { id: id.clone(), result });
            }
            Err(_) => empty.push(id.clone()),
        }
    }
    let extra = hyps
        .iter()
        .filter(|(id, _)| !ref_ids.contains(id.as_str()))
        .map(|(id, _)| id.clone())
        .collect();
    let tags_of = |texts: &mut dyn Iterator<Item = &str>| -> Vec<Vec<Lang>> {
        texts
            .map(|t| TaggedUtterance::classify(tokenize_mixed(t)).tags)
            .collect()
    };
    let (reference_cmi, hypothesis_cmi) = if opts.cmi {
        let rt = tags_of(&mut pairs.iter().map(|p| p.0));
        let ht = tags_of(&mut pairs.iter().map(|p| p.1));
        (
            Some(corpus_cmi(rt.iter().map(Vec::as_slice))),
            Some(corpus_cmi(ht.iter().map(Vec::as_slice))),
        )
    } else {
        (None, None)
    };
    ScoreReport {
        mode: opts.mode,
        corpus,
        utterances,
        missing_hypotheses: missing,
        extra_hypotheses: extra,
        empty_references: empty,
        reference_cmi,
        hypothesis_cmi,
        filtered_cmi: opts.filter_threshold.map(|t| filtered_corpus_cmi(&pairs, t)),
        filter_threshold: opts.filter_threshold,
    }
}
