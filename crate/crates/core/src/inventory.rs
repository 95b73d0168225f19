//! N-gram unit inventory: which audio spans realize which token sequences.
//!
//! Every contiguous run of `1..=n_max` aligned tokens whose inter-token gaps
//! stay within `gap_tolerance` is indexed as one unit. Text is segmented
//! greedily into the longest indexed units, backing off to shorter ones.
//!
//! Dump format, one cut per line after a header:
//!
//! ```text
//! #inventory n_max=2 gap_tolerance=0.2
//! <space-joined tokens>\t<recording_id>\t<channel>\t<start>\t<end>
//! ```
//!
//! `channel` is the 0-based audio channel.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::BufRead;
use std::path::Path;

use rand::RngCore;

use crate::corpus::{validate, AlignedToken, SupervisionSet};
use crate::error::{Error, Result};
use crate::rng;

/// Slack for float noise when comparing gaps against the tolerance.
const GAP_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitKey(Vec<String>);

impl UnitKey {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty()
            || tokens
                .iter()
                .any(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(Error::InvalidArgument(format!("invalid unit key {tokens:?}")));
        }
        Ok(Self(tokens))
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Borrow<[String]> for UnitKey {
    fn borrow(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for UnitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

/// A span of one recording channel that realizes a unit.
#[derive(Debug, Clone, PartialEq)]
pub struct CutRef {
    pub recording_id: String,
    pub channel: u16,
    pub start: f64,
    pub end: f64,
    pub tokens: UnitKey,
}

impl CutRef {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inventory {
    n_max: usize,
    gap_tolerance: f64,
    entries: BTreeMap<UnitKey, Vec<CutRef>>,
}

/// Tokens with no unigram entry, in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Oov {
    pub missing: Vec<String>,
}

impl fmt::Display for Oov {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "out-of-inventory tokens: {}", self.missing.join(" "))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct InventoryStats {
    /// n-gram length -> number of distinct keys.
    pub keys_by_length: BTreeMap<usize, usize>,
    /// n-gram length -> number of cuts.
    pub cuts_by_length: BTreeMap<usize, usize>,
}

impl Inventory {
    pub fn new(n_max: usize, gap_tolerance: f64) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidArgument("n-gram size must be at least 1".into()));
        }
        if !(gap_tolerance >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gap tolerance {gap_tolerance} must be >= 0"
            )));
        }
        Ok(Self {
            n_max,
            gap_tolerance,
            entries: BTreeMap::new(),
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn gap_tolerance(&self) -> f64 {
        self.gap_tolerance
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, tokens: &[String]) -> bool {
        self.entries.contains_key(tokens)
    }

    pub fn cuts(&self, tokens: &[String]) -> Option<&[CutRef]> {
        self.entries.get(tokens).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UnitKey, &[CutRef])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Index every gap-contiguous k-gram (k <= n_max) of the supervisions.
    /// Existing entries are kept; new cuts are appended.
    pub fn add_supervisions(&mut self, set: &SupervisionSet) {
        for tokens in set.tokens.values() {
            for run in tokens.chunk_by(|a, b| a.channel == b.channel) {
                self.add_run(run);
            }
        }
    }

    fn add_run(&mut self, run: &[AlignedToken]) {
        for i in 0..run.len() {
            let mut words = Vec::with_capacity(self.n_max);
            for j in i..run.len().min(i + self.n_max) {
                if j > i && run[j].start - run[j - 1].end() > self.gap_tolerance + GAP_EPSILON {
                    break;
                }
                words.push(run[j].token.clone());
                let key = UnitKey(words.clone());
                let cut = CutRef {
                    recording_id: run[i].recording_id.clone(),
                    channel: run[i].channel_index(),
                    start: run[i].start,
                    end: run[j].end(),
                    tokens: key.clone(),
                };
                self.entries.entry(key).or_default().push(cut);
            }
        }
    }

    /// Greedy left-to-right segmentation into the longest available units.
    pub fn segment(&self, utterance: &[String]) -> Result<Vec<UnitKey>, Oov> {
        let mut missing: Vec<String> = Vec::new();
        for t in utterance {
            if !self.contains(std::slice::from_ref(t)) && !missing.contains(t) {
                missing.push(t.clone());
            }
        }
        if !missing.is_empty() {
            return Err(Oov { missing });
        }
        let mut units = Vec::new();
        let mut i = 0;
        while i < utterance.len() {
            let longest = (utterance.len() - i).min(self.n_max);
            let (key, len) = (1..=longest)
                .rev()
                .find_map(|k| {
                    self.entries
                        .get_key_value(&utterance[i..i + k])
                        .map(|(key, _)| (key, k))
                })
                .expect("unigram presence checked above");
            units.push(key.clone());
            i += len;
        }
        Ok(units)
    }

    /// Uniformly pick one cut for `key`, consuming one draw from `rng`.
    pub fn sample<R: RngCore + ?Sized>(&self, key: &[String], rng: &mut R) -> Result<&CutRef> {
        let cuts = self.entries.get(key).ok_or_else(|| Error::MissingUnit(key.join(" ")))?;
        Ok(&cuts[rng::index(rng, cuts.len())])
    }

    pub fn stats(&self) -> InventoryStats {
        let mut stats = InventoryStats::default();
        for (k, cuts) in &self.entries {
            *stats.keys_by_length.entry(k.len()).or_default() += 1;
            *stats.cuts_by_length.entry(k.len()).or_default() += cuts.len();
        }
        stats
    }

    pub fn dump(&self) -> String {
        let mut out = format!("#inventory n_max={} gap_tolerance={}\n", self.n_max, self.gap_tolerance);
        for (key, cuts) in &self.entries {
            for c in cuts {
                let _ = writeln!(out, "{key}\t{}\t{}\t{}\t{}", c.recording_id, c.channel, c.start, c.end);
            }
        }
        out
    }

    pub fn parse_dump<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| Error::io(source_name, e))?,
            None => return Err(Error::parse(source_name, 1, "missing inventory header")),
        };
        let (n_max, gap) = parse_header(&header).ok_or_else(|| Error::parse(source_name, 1, "bad inventory header"))?;
        let mut inv = Inventory::new(n_max, gap)?;
        for (i, line) in lines {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::io(source_name, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(Error::parse(
                    source_name,
                    lineno,
                    format!("expected 5 fields, found {}", fields.len()),
                ));
            }
            let key = UnitKey::new(fields[0].split(' ').map(str::to_string).collect())
                .map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
            if key.len() > n_max {
                return Err(Error::parse(source_name, lineno, "key longer than n_max"));
            }
            let bad = |what: &str| Error::parse(source_name, lineno, format!("bad {what}"));
            let channel: u16 = fields[2].parse().map_err(|_| bad("channel"))?;
            let start: f64 = fields[3].parse().map_err(|_| bad("start"))?;
            let end: f64 = fields[4].parse().map_err(|_| bad("end"))?;
            if !(start >= 0.0 && start < end) {
                return Err(bad("time span"));
            }
            inv.entries.entry(key.clone()).or_default().push(CutRef {
                recording_id: fields[1].to_string(),
                channel,
                start,
                end,
                tokens: key,
            });
        }
        Ok(inv)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_dump(std::io::BufReader::new(file), &path.display().to_string())
    }
}

fn parse_header(line: &str) -> Option<(usize, f64)> {
    let rest = line.strip_prefix("#inventory")?;
    let mut n = None;
    let mut gap = None;
    for field in rest.split_whitespace() {
        let (k, v) = field.split_once('=')?;
        match k {
            "n_max" => n = v.parse().ok(),
            "gap_tolerance" => gap = v.parse().ok(),
            _ => {}
        }
    }
    Some((n?, gap?))
}

/// Validate `set` and index it.
pub fn build_inventory(set: &SupervisionSet, n: usize, gap_tolerance: f64) -> Result<Inventory> {
    let mut inv = Inventory::new(n, gap_tolerance)?;
    validate(set).into_result()?;
    inv.add_supervisions(set);
    Ok(inv)
}

pub fn get_consec_units(utterance: &[String], inv: &Inventory) -> Result<Vec<UnitKey>, Oov> {
    inv.segment(utterance)
}

pub fn sample_unit<'a, R: RngCore + ?Sized>(inv: &'a Inventory, key: &[String], rng: &mut R) -> Result<&'a CutRef> {
    inv.sample(key, rng)
}
