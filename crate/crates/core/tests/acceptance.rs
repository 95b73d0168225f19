//! Acceptance checks. Runs as a plain binary (no libtest harness) and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use speech_collage::audio::Waveform;
use speech_collage::corpus::{AlignedToken, Recording, SupervisionSet};
use speech_collage::cstext::{synthesize_corpus, ReplacementPolicy};
use speech_collage::dsp::{normalize_energy, overlap_add_samples, CrossfadeMode};
use speech_collage::generator::{load_generation_manifest, MANIFEST_FILE};
use speech_collage::inventory::{build_inventory, get_consec_units, sample_unit};
use speech_collage::metrics::{cmi_of_tags, error_rate, Lang, ScoreMode};
use speech_collage::{rng, toy};

use common::{dir_contents, edit_oracle, generate_toy, greedy_oracle, random_matcher_case};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_signal(r: &mut ChaCha8Rng, len: usize) -> Vec<f32> {
    let scale: f32 = r.gen_range(0.001..2.0);
    (0..len).map(|_| r.gen_range(-1.0f32..1.0) * scale).collect()
}

fn max_abs_diff(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| f64::from((x - y).abs()))
        .fold(0.0, f64::max)
}

fn crossfade_reconstruction() -> Outcome {
    let t0 = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let cases = 600;
    for _ in 0..cases {
        let len = r.gen_range(16..=16384);
        let x = random_signal(&mut r, len);
        let l = r.gen_range(1..=256.min(len - 1));
        let split = r.gen_range(1..=len - l);
        let a = Waveform::new(x[..split + l].to_vec(), 16_000);
        let b = Waveform::new(x[split..].to_vec(), 16_000);
        let y = overlap_add_samples(&a, &b, l, CrossfadeMode::NormalizedHamming).map_err(|e| e.to_string())?;
        if y.len() != len {
            return Err(format!("length {} != {len}", y.len()));
        }
        worst = worst.max(max_abs_diff(&y.samples, &x));
    }
    let elapsed = t0.elapsed();
    check(
        worst < 1e-6 && elapsed < Duration::from_secs(10),
        format!(
            "{cases} cases, max abs error {worst:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn energy_normalization() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let cases = 1500;
    let (mut rms_err, mut scale_err, mut idem_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cases {
        let len = r.gen_range(1..4000);
        let x = Waveform::new(random_signal(&mut r, len), 16_000);
        if x.rms() < 1e-6 {
            continue;
        }
        let y = normalize_energy(&x).map_err(|e| e.to_string())?;
        rms_err = rms_err.max((y.rms() - 1.0).abs());
        let c: f32 = r.gen_range(0.01..100.0);
        let scaled = Waveform::new(x.samples.iter().map(|s| s * c).collect(), 16_000);
        let ys = normalize_energy(&scaled).map_err(|e| e.to_string())?;
        scale_err = scale_err.max(max_abs_diff(&ys.samples, &y.samples));
        let yy = normalize_energy(&y).map_err(|e| e.to_string())?;
        idem_err = idem_err.max(max_abs_diff(&yy.samples, &y.samples));
    }
    check(
        rms_err < 1e-6 && scale_err < 1e-6 && idem_err < 1e-6,
        format!("{cases} cases, |rms-1| {rms_err:.2e}, scale {scale_err:.2e}, idempotence {idem_err:.2e}"),
    )
}

fn backoff_matcher() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let cases = 5000;
    let mut mismatches = 0;
    let mut oov = 0;
    for _ in 0..cases {
        let (inv, keys, n, utt) = random_matcher_case(&mut r);
        let want = greedy_oracle(&keys, n, &utt);
        oov += usize::from(want.is_err());
        let got = get_consec_units(&utt, &inv)
            .map(|u| u.iter().map(|k| k.tokens().to_vec()).collect::<Vec<_>>())
            .map_err(|o| o.missing);
        mismatches += usize::from(got != want);
    }
    check(
        mismatches == 0,
        format!("{cases} instances ({oov} with OOV), {mismatches} mismatches"),
    )
}

fn sampling_uniformity() -> Outcome {
    let rec = Recording {
        id: "r".into(),
        audio_path: "r.wav".into(),
        sample_rate: 16_000,
        num_samples: 16_000 * 10,
        channel: 0,
    };
    let mut set = SupervisionSet::new(vec![rec]);
    for i in 0..3 {
        set.push(AlignedToken {
            recording_id: "r".into(),
            channel: 1,
            start: f64::from(i),
            duration: 0.5,
            token: "x".into(),
        });
    }
    let inv = build_inventory(&set, 1, 0.2).map_err(|e| e.to_string())?;
    let key = vec!["x".to_string()];
    let mut counts = [0usize; 3];
    let mut s = rng::stream(2024, 0);
    for _ in 0..30_000 {
        counts[sample_unit(&inv, &key, &mut s).map_err(|e| e.to_string())?.start as usize] += 1;
    }
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / 30_000.0).collect();
    let worst = freqs.iter().map(|f| (f - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    check(
        worst <= 0.02,
        format!("frequencies {freqs:.4?}, max deviation {worst:.4}"),
    )
}

fn replacement_rate() -> Outcome {
    let pairs = toy::parallel_corpus(2500, 17);
    let policy = |rate| ReplacementPolicy {
        rate,
        seed: 99,
        ..ReplacementPolicy::default()
    };
    let out = synthesize_corpus(&pairs, &policy(0.2)).map_err(|e| e.to_string())?;
    let f = out.replaced_fraction().unwrap_or(f64::NAN);
    let zero = synthesize_corpus(&pairs, &policy(0.0)).map_err(|e| e.to_string())?;
    let one = synthesize_corpus(&pairs, &policy(1.0)).map_err(|e| e.to_string())?;
    check(
        out.eligible >= 10_000 && (0.18..=0.22).contains(&f) && zero.replaced == 0 && one.replaced == one.eligible,
        format!(
            "{} eligible, fraction {f:.4}; rate 0 -> {} replaced, rate 1 -> {}/{}",
            out.eligible, zero.replaced, one.replaced, one.eligible
        ),
    )
}

fn cmi_suite() -> Outcome {
    use Lang::*;
    let mono = cmi_of_tags(&[English; 5]);
    let aba = cmi_of_tags(&[Mandarin, English, Mandarin]);
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let (mut asym, mut max_seen) = (0, 0.0f64);
    for _ in 0..1000 {
        let len = r.gen_range(1..60);
        let tags: Vec<Lang> = (0..len)
            .map(|_| [Mandarin, English, Other][r.gen_range(0..3)])
            .collect();
        let swapped: Vec<Lang> = tags
            .iter()
            .map(|t| match t {
                Mandarin => English,
                English => Mandarin,
                o => *o,
            })
            .collect();
        let c = cmi_of_tags(&tags);
        asym += usize::from(c != cmi_of_tags(&swapped));
        max_seen = max_seen.max(c.unwrap_or(0.0));
    }
    check(
        mono == Some(0.0) && aba == Some(50.0) && max_seen < 100.0 && asym == 0,
        format!("mono {mono:?}, [A,B,A] {aba:?}, max {max_seen:.2}, {asym} asymmetric of 1000"),
    )
}

fn all_sequences(max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for sym in 0..3u8 {
                let mut t: Vec<u8> = s.clone();
                t.push(sym);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn error_rate_oracle() -> Outcome {
    let t0 = Instant::now();
    let seqs = all_sequences(6);
    let render = |mode: ScoreMode, s: &[u8]| -> String {
        match mode {
            ScoreMode::Wer => s
                .iter()
                .map(|&c| ["alpha", "beta", "gamma"][c as usize])
                .collect::<Vec<_>>()
                .join(" "),
            ScoreMode::Cer => s.iter().map(|&c| ['a', 'b', 'c'][c as usize]).collect(),
            // Characters run together; the English word is space-delimited.
            ScoreMode::Mer => s.iter().map(|&c| ["我", " rice ", "你"][c as usize]).collect(),
        }
    };
    // Empty references have no defined rate; they are excluded.
    let refs: Vec<&Vec<u8>> = seqs.iter().filter(|s| !s.is_empty()).collect();
    let pairs = refs.len() * seqs.len();
    let mismatches: usize = refs
        .par_iter()
        .map(|r| {
            let mut bad = 0;
            for h in &seqs {
                let want = edit_oracle(r, h);
                for mode in [ScoreMode::Wer, ScoreMode::Cer, ScoreMode::Mer] {
                    let rt = mode.tokenize(&render(mode, r));
                    let ht = mode.tokenize(&render(mode, h));
                    let ok = match error_rate(&rt, &ht) {
                        Ok(got) => {
                            (got.substitutions, got.deletions, got.insertions) == want
                                && got.reference_length == r.len()
                        }
                        Err(_) => false,
                    };
                    bad += usize::from(!ok);
                }
            }
            bad
        })
        .sum();
    check(
        mismatches == 0,
        format!(
            "{pairs} pairs x 3 modes, {mismatches} mismatches, {:.1} s",
            t0.elapsed().as_secs_f64()
        ),
    )
}

fn golden_run() -> Outcome {
    let t0 = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = tmp.path();
    let (_, a) = generate_toy(&p.join("c"), &p.join("a"), 1, 0);
    let (_, b) = generate_toy(&p.join("c"), &p.join("b"), 1, 0);
    let (_, c) = generate_toy(&p.join("c"), &p.join("w4"), 4, 0);
    let da = dir_contents(&p.join("a"));
    let same_runs = da == dir_contents(&p.join("b"));
    let same_workers = da == dir_contents(&p.join("w4"));
    let records = load_generation_manifest(&p.join("a").join(MANIFEST_FILE)).map_err(|e| e.to_string())?;
    let ledger_bad = records.iter().filter(|r| r.ledger_samples() != r.num_samples).count();
    let elapsed = t0.elapsed();
    check(
        same_runs && same_workers && a == b && a == c && ledger_bad == 0 && elapsed < Duration::from_secs(30),
        format!(
            "{} of {} generated, identical runs {same_runs}, workers 1 vs 4 identical {same_workers}, \
             {ledger_bad} ledger mismatches, {:.2} s",
            a.generated_count,
            a.utterances,
            elapsed.as_secs_f64()
        ),
    )
}

fn hours_bookkeeping() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let toy = toy::write_toy_corpus(tmp.path()).map_err(|e| e.to_string())?;
    let out = tmp.path().join("gen");
    let run = Command::new(env!("CARGO_BIN_EXE_collage"))
        .args(["--seed", "1", "generate", "--n", "3", "--corpus"])
        .arg(&toy.manifest)
        .arg("--ctm")
        .arg(&toy.ctm)
        .arg("--cs-text")
        .arg(&toy.cs_text)
        .arg("--out-dir")
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    if !run.status.success() {
        return Err(String::from_utf8_lossy(&run.stderr).into_owned());
    }
    let report: serde_json::Value = serde_json::from_slice(&run.stdout).map_err(|e| e.to_string())?;
    let hours = report["total_audio_hours"].as_f64().ok_or("no hours in report")?;
    let rate = report["sample_rate"].as_f64().ok_or("no rate in report")?;
    let records = load_generation_manifest(&out.join(MANIFEST_FILE)).map_err(|e| e.to_string())?;
    let manifest_seconds: f64 = records.iter().map(|r| r.duration_seconds).sum();
    let splices: usize = records.iter().map(|r| r.provenance.len().saturating_sub(1)).sum();
    let diff_samples = (hours * 3600.0 - manifest_seconds).abs() * rate;
    check(
        !records.is_empty() && diff_samples <= splices.max(1) as f64,
        format!(
            "reported {hours:.9} h, manifest {:.9} h, difference {diff_samples:.3e} samples over {splices} splices",
            manifest_seconds / 3600.0
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("exact-reconstruction crossfade", crossfade_reconstruction),
        ("energy normalization", energy_normalization),
        ("back-off matcher vs oracle", backoff_matcher),
        ("sampling uniformity", sampling_uniformity),
        ("replacement rate", replacement_rate),
        ("CMI micro-suite", cmi_suite),
        ("error-rate oracle", error_rate_oracle),
        ("end-to-end golden run", golden_run),
        ("duration bookkeeping", hours_bookkeeping),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
