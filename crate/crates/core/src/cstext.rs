//! Code-switched text: file I/O and zero-shot synthesis by aligned random
//! replacement.
//!
//! Inputs for synthesis are a parallel text file
//! (`id<TAB>source sentence<TAB>target sentence`) and a Pharaoh alignment file
//! with one line of 0-based `i-j` pairs per sentence, in the same order.
//! CS text files are `id<TAB>space-separated tokens`.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{classify_token, Lang};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsUtterance {
    pub id: String,
    pub tokens: Vec<String>,
    pub langs: Vec<Lang>,
}

impl CsUtterance {
    /// Tokens tagged by script.
    pub fn from_tokens(id: impl Into<String>, tokens: Vec<String>) -> Self {
        let langs = tokens.iter().map(|t| classify_token(t)).collect();
        Self {
            id: id.into(),
            tokens,
            langs,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsText {
    pub utterances: Vec<CsUtterance>,
}

impl CsText {
    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for u in &self.utterances {
            let _ = writeln!(out, "{}\t{}", u.id, u.tokens.join(" "));
        }
        out
    }

    /// The first `percent`% of utterances by index, rounded down.
    pub fn subset_percent(&self, percent: f64) -> Result<CsText> {
        if !(0.0..=100.0).contains(&percent) {
            return Err(Error::InvalidArgument(format!(
                "subset percent {percent} outside 0..=100"
            )));
        }
        let count = ((self.len() as f64 * percent / 100.0) + 1e-9).floor() as usize;
        Ok(CsText {
            utterances: self.utterances[..count.min(self.len())].to_vec(),
        })
    }
}

/// Utterance ids become file names, so they must be plain names.
pub fn check_utterance_id(id: &str) -> Result<()> {
    if id.is_empty() || id == "." || id == ".." || id.chars().any(|c| c == '/' || c == '\\' || c.is_whitespace()) {
        return Err(Error::InvalidArgument(format!(
            "utterance id `{id}` is not a plain file name"
        )));
    }
    Ok(())
}

pub fn parse_cs_text<R: BufRead>(reader: R, source_name: &str) -> Result<CsText> {
    let mut utterances = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(source_name, i + 1, "expected `id<TAB>text`"))?;
        check_utterance_id(id).map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?;
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(
                source_name,
                i + 1,
                format!("duplicate utterance id `{id}`"),
            ));
        }
        let tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            return Err(Error::parse(source_name, i + 1, "utterance has no tokens"));
        }
        utterances.push(CsUtterance::from_tokens(id, tokens));
    }
    Ok(CsText { utterances })
}

pub fn load_cs_text(path: &Path) -> Result<CsText> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_cs_text(std::io::BufReader::new(file), &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelSentence {
    pub id: String,
    pub source_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
    /// `(source_index, target_index)` pairs.
    pub alignment: Vec<(usize, usize)>,
}

impl ParallelSentence {
    pub fn check(&self) -> Result<()> {
        for &(s, t) in &self.alignment {
            if s >= self.source_tokens.len() || t >= self.target_tokens.len() {
                return Err(Error::Validation(format!(
                    "sentence `{}`: alignment {s}-{t} out of bounds ({}x{})",
                    self.id,
                    self.source_tokens.len(),
                    self.target_tokens.len()
                )));
            }
        }
        Ok(())
    }
}

fn parse_pharaoh(line: &str) -> std::result::Result<Vec<(usize, usize)>, String> {
    line.split_whitespace()
        .map(|pair| {
            let (s, t) = pair
                .split_once('-')
                .ok_or_else(|| format!("bad alignment pair `{pair}`"))?;
            let s = s.parse().map_err(|_| format!("bad source index in `{pair}`"))?;
            let t = t.parse().map_err(|_| format!("bad target index in `{pair}`"))?;
            Ok((s, t))
        })
        .collect()
}

/// Read a parallel text and its alignments. Errors name the 1-based record.
pub fn parse_parallel<P: BufRead, A: BufRead>(parallel: P, alignments: A) -> Result<Vec<ParallelSentence>> {
    let mut sentences = Vec::new();
    for (i, line) in parallel.lines().enumerate() {
        let line = line.map_err(|e| Error::io("parallel text", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                "parallel text",
                i + 1,
                "expected `id<TAB>source<TAB>target`",
            ));
        }
        sentences.push(ParallelSentence {
            id: fields[0].trim().to_string(),
            source_tokens: fields[1].split_whitespace().map(str::to_string).collect(),
            target_tokens: fields[2].split_whitespace().map(str::to_string).collect(),
            alignment: Vec::new(),
        });
    }
    let lines: Vec<String> = alignments
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io("alignments", e))?;
    let mut lines = lines;
    while lines.len() > sentences.len() && lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    if lines.len() != sentences.len() {
        return Err(Error::parse(
            "alignments",
            lines.len().min(sentences.len()) + 1,
            format!("{} alignment records for {} sentences", lines.len(), sentences.len()),
        ));
    }
    for (i, (sent, line)) in sentences.iter_mut().zip(&lines).enumerate() {
        sent.alignment = parse_pharaoh(line).map_err(|m| Error::parse("alignments", i + 1, m))?;
        sent.check()
            .map_err(|e| Error::parse("alignments", i + 1, e.to_string()))?;
    }
    Ok(sentences)
}

pub fn load_parallel(parallel: &Path, alignments: &Path) -> Result<Vec<ParallelSentence>> {
    let p = std::fs::File::open(parallel).map_err(|e| Error::io(parallel, e))?;
    let a = std::fs::File::open(alignments).map_err(|e| Error::io(alignments, e))?;
    parse_parallel(std::io::BufReader::new(p), std::io::BufReader::new(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplacementPolicy {
    /// Per-word replacement probability.
    pub rate: f64,
    pub seed: u64,
    pub source_lang: Lang,
    pub target_lang: Lang,
}

impl Default for ReplacementPolicy {
    fn default() -> Self {
        Self {
            rate: 0.2,
            seed: 0,
            source_lang: Lang::Arabic,
            target_lang: Lang::English,
        }
    }
}

impl ReplacementPolicy {
    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::InvalidArgument(format!(
                "replacement rate {} outside [0, 1]",
                self.rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replaced {
    pub utterance: CsUtterance,
    /// Source tokens with at least one aligned target token.
    pub eligible: usize,
    pub replaced: usize,
}

/// Replace each aligned source word, independently with probability
/// `policy.rate`, by its aligned target words in target order. A target word
/// is emitted at most once per sentence.
pub fn random_replace<R: RngCore + ?Sized>(
    sent: &ParallelSentence,
    policy: &ReplacementPolicy,
    rng: &mut R,
) -> Replaced {
    let mut aligned: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); sent.source_tokens.len()];
    for &(s, t) in &sent.alignment {
        aligned[s].insert(t);
    }
    let mut tokens = Vec::with_capacity(sent.source_tokens.len());
    let mut langs = Vec::with_capacity(sent.source_tokens.len());
    let mut emitted = HashSet::new();
    let (mut eligible, mut replaced) = (0, 0);
    for (word, targets) in sent.source_tokens.iter().zip(&aligned) {
        let swap = !targets.is_empty() && {
            eligible += 1;
            rng::unit_f64(rng) < policy.rate
        };
        if swap {
            replaced += 1;
            for &t in targets {
                if emitted.insert(t) {
                    tokens.push(sent.target_tokens[t].clone());
                    langs.push(policy.target_lang);
                }
            }
        } else {
            tokens.push(word.clone());
            langs.push(policy.source_lang);
        }
    }
    Replaced {
        utterance: CsUtterance {
            id: sent.id.clone(),
            tokens,
            langs,
        },
        eligible,
        replaced,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub text: CsText,
    pub eligible: usize,
    pub replaced: usize,
}

impl Synthesized {
    pub fn replaced_fraction(&self) -> Option<f64> {
        (self.eligible > 0).then(|| self.replaced as f64 / self.eligible as f64)
    }
}

/// Apply [`random_replace`] to every sentence with the stream
/// `(policy.seed, sentence index)`.
pub fn synthesize_corpus(pairs: &[ParallelSentence], policy: &ReplacementPolicy) -> Result<Synthesized> {
    policy.check()?;
    for p in pairs {
        p.check()?;
    }
    let results: Vec<Replaced> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| random_replace(p, policy, &mut rng::stream(policy.seed, i as u64)))
        .collect();
    let eligible = results.iter().map(|r| r.eligible).sum();
    let replaced = results.iter().map(|r| r.replaced).sum();
    Ok(Synthesized {
        text: CsText {
            utterances: results.into_iter().map(|r| r.utterance).collect(),
        },
        eligible,
        replaced,
    })
}
