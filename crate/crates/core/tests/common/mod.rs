//! Reference implementations used only by tests. Each one is written
//! independently of the library code path it checks.

#![allow(dead_code)]

use std::collections::HashSet;

/// Longest-prefix segmentation against a plain set of token sequences.
/// Returns the missing unigrams when some token has none.
pub fn greedy_oracle(
    dict: &HashSet<Vec<String>>,
    n_max: usize,
    utt: &[String],
) -> Result<Vec<Vec<String>>, Vec<String>> {
    let mut missing = Vec::new();
    for t in utt {
        if !dict.contains(&vec![t.clone()]) && !missing.contains(t) {
            missing.push(t.clone());
        }
    }
    if !missing.is_empty() {
        return Err(missing);
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < utt.len() {
        let mut best = 0;
        for k in 1..=utt.len() - i {
            if k <= n_max && dict.contains(&utt[i..i + k].to_vec()) {
                best = k;
            }
        }
        out.push(utt[i..i + best].to_vec());
        i += best;
    }
    Ok(out)
}

/// Exhaustive search over edit paths, walking back from the end and trying
/// match/substitution, then insertion, then deletion. The first path found
/// with the minimum cost is kept. Returns (substitutions, deletions,
/// insertions).
pub fn edit_oracle<T: PartialEq>(r: &[T], h: &[T]) -> (usize, usize, usize) {
    struct Search<'a, T> {
        r: &'a [T],
        h: &'a [T],
        best: usize,
        counts: (usize, usize, usize),
    }
    impl<T: PartialEq> Search<'_, T> {
        fn go(&mut self, i: usize, j: usize, cost: usize, c: (usize, usize, usize)) {
            if cost + i.abs_diff(j) >= self.best {
                return;
            }
            if i == 0 && j == 0 {
                self.best = cost;
                self.counts = c;
                return;
            }
            if i > 0 && j > 0 {
                let sub = usize::from(self.r[i - 1] != self.h[j - 1]);
                self.go(i - 1, j - 1, cost + sub, (c.0 + sub, c.1, c.2));
            }
            if j > 0 {
                self.go(i, j - 1, cost + 1, (c.0, c.1, c.2 + 1));
            }
            if i > 0 {
                self.go(i - 1, j, cost + 1, (c.0, c.1 + 1, c.2));
            }
        }
    }
    let mut s = Search {
        r,
        h,
        best: usize::MAX,
        counts: (0, 0, 0),
    };
    s.go(r.len(), h.len(), 0, (0, 0, 0));
    s.counts
}

/// All overlapping pairs among half-open sample intervals, by pairwise check.
pub fn overlapping_pairs(spans: &[(i64, i64)]) -> usize {
    let mut n = 0;
    for a in 0..spans.len() {
        for b in a + 1..spans.len() {
            let (s1, e1) = spans[a];
            let (s2, e2) = spans[b];
            if s1 < e2 && s2 < e1 {
                n += 1;
            }
        }
    }
    n
}

/// Every k-gram (k <= n) of a timed token list whose internal gaps are all
/// within `tol`, as (tokens, start, end).
pub fn enumerate_ngrams(tokens: &[(String, f64, f64)], n: usize, tol: f64) -> Vec<(Vec<String>, f64, f64)> {
    let mut out = Vec::new();
    for i in 0..tokens.len() {
        for j in i..tokens.len() {
            if j - i + 1 > n {
                break;
            }
            let contiguous = (i..j).all(|m| tokens[m + 1].1 - tokens[m].2 <= tol + 1e-9);
            if contiguous {
                let words = tokens[i..=j].iter().map(|t| t.0.clone()).collect();
                out.push((words, tokens[i].1, tokens[j].2));
            }
        }
    }
    out
}

/// Direct evaluation of the Code-Mixing Index on labels, ×100; `None` marks
/// an empty label sequence. Labels equal to `other` are dropped first.
pub fn cmi_reference(labels: &[u8], other: u8) -> Option<f64> {
    let kept: Vec<u8> = labels.iter().copied().filter(|&l| l != other).collect();
    if kept.is_empty() {
        return None;
    }
    let n = kept.len() as f64;
    let mut best = 0usize;
    for l in 0..=u8::MAX {
        best = best.max(kept.iter().filter(|&&k| k == l).count());
    }
    let mut p = 0usize;
    for w in 0..kept.len().saturating_sub(1) {
        if kept[w] != kept[w + 1] {
            p += 1;
        }
    }
    Some(100.0 * (0.5 * (n - best as f64) + 0.5 * p as f64) / n)
}

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

/// A random matcher instance: an inventory loaded from a dump text (so the
/// indexing path is not involved), the same key set as a plain set, n_max
/// and an utterance. Vocabulary ≤ 10 tokens, utterances ≤ 12, n ≤ 3.
pub fn random_matcher_case<R: rand::Rng>(
    r: &mut R,
) -> (speech_collage::Inventory, HashSet<Vec<String>>, usize, Vec<String>) {
    let vocab: Vec<String> = (0..r.gen_range(1..=10)).map(|i| format!("w{i}")).collect();
    let n_max = r.gen_range(1..=3);
    let mut keys: HashSet<Vec<String>> = HashSet::new();
    // Mostly-complete unigrams so that OOV cases occur but are not dominant.
    for v in &vocab {
        if r.gen_bool(0.93) {
            keys.insert(vec![v.clone()]);
        }
    }
    for _ in 0..r.gen_range(0..40) {
        let k = r.gen_range(2..=3);
        let key: Vec<String> = (0..k).map(|_| vocab[r.gen_range(0..vocab.len())].clone()).collect();
        if key.len() <= n_max {
            keys.insert(key);
        }
    }
    let mut dump = format!("#inventory n_max={n_max} gap_tolerance=0.2\n");
    let mut sorted: Vec<&Vec<String>> = keys.iter().collect();
    sorted.sort();
    for (i, k) in sorted.into_iter().enumerate() {
        for c in 0..r.gen_range(1..=3) {
            dump.push_str(&format!("{}\trec{i}\t0\t{}\t{}\n", k.join(" "), c, c as f64 + 0.5));
        }
    }
    let inv = speech_collage::Inventory::parse_dump(dump.as_bytes(), "random").expect("valid dump");
    let utt: Vec<String> = (0..r.gen_range(1..=12))
        .map(|_| vocab[r.gen_range(0..vocab.len())].clone())
        .collect();
    (inv, keys, n_max, utt)
}

/// Write the toy corpus under `root`, index it with n = 3 and generate its
/// CS text into `out`.
pub fn generate_toy(
    root: &std::path::Path,
    out: &std::path::Path,
    workers: usize,
    seed: u64,
) -> (speech_collage::toy::ToyCorpus, speech_collage::GenerationReport) {
    use speech_collage::{corpus, cstext, generator, inventory, toy};
    let toy = toy::write_toy_corpus(root).expect("toy corpus");
    let recs = corpus::load_manifest(&toy.manifest).expect("manifest");
    let set = corpus::load_ctm(&toy.ctm, &recs).expect("ctm");
    let inv = inventory::build_inventory(&set, 3, 0.2).expect("inventory");
    let text = cstext::load_cs_text(&toy.cs_text).expect("cs text");
    let req = generator::CollageRequest {
        cs_text: &text,
        inventory: &inv,
        recordings: &recs,
        config: generator::CollageConfig {
            seed,
            workers,
            ..Default::default()
        },
        output_dir: out.to_path_buf(),
    };
    let report = generator::generate_collage(&req).expect("generation");
    (toy, report)
}

/// Every file in `dir` by name, with its bytes.
pub fn dir_contents(dir: &std::path::Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .expect("read dir")
        .map(|e| {
            let e = e.expect("dir entry");
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).expect("read"),
            )
        })
        .collect()
}
