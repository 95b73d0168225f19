use std::path::Path;
use std::process::{Command, Output};

use speech_collage::toy::{parallel_corpus, parallel_files, write_toy_corpus};

fn collage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collage"))
        .args(args)
        .output()
        .expect("run collage")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn build_generate_inspect() {
    let tmp = tempfile::tempdir().unwrap();
    let toy = write_toy_corpus(tmp.path()).unwrap();
    let inv = tmp.path().join("inv.tsv");
    let built = stdout_json(&collage(&[
        "build-inventory",
        "--corpus",
        s(&toy.manifest),
        "--ctm",
        s(&toy.ctm),
        "--n",
        "3",
        "--out",
        s(&inv),
    ]));
    assert_eq!(built["keys_by_length"].as_object().unwrap().len(), 3);

    let out = tmp.path().join("gen");
    let report = stdout_json(&collage(&[
        "--seed",
        "5",
        "--workers",
        "2",
        "generate",
        "--corpus",
        s(&toy.manifest),
        "--inventory",
        s(&inv),
        "--cs-text",
        s(&toy.cs_text),
        "--out-dir",
        s(&out),
    ]));
    assert_eq!(report["generated_count"], 19);

    // Building from the CTM directly gives the same result.
    let out2 = tmp.path().join("gen2");
    let report2 = stdout_json(&collage(&[
        "--seed",
        "5",
        "generate",
        "--corpus",
        s(&toy.manifest),
        "--ctm",
        s(&toy.ctm),
        "--n",
        "3",
        "--cs-text",
        s(&toy.cs_text),
        "--out-dir",
        s(&out2),
    ]));
    assert_eq!(report, report2);

    let rendered = tmp.path().join("again.wav");
    let inspected = stdout_json(&collage(&[
        "inspect",
        "--dir",
        s(&out),
        "--corpus",
        s(&toy.manifest),
        "--utterance",
        "cs03",
        "--render",
        s(&rendered),
    ]));
    assert_eq!(inspected["matches_stored_audio"], true);
    assert_eq!(inspected["ledger_samples"], inspected["record"]["num_samples"]);
    assert!(rendered.exists());

    let missing = collage(&[
        "inspect",
        "--dir",
        s(&out),
        "--corpus",
        s(&toy.manifest),
        "--utterance",
        "nope",
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn subset_and_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let toy = write_toy_corpus(tmp.path()).unwrap();
    let cfg = tmp.path().join("collage.toml");
    std::fs::write(
        &cfg,
        "seed = 9\n[inventory]\nn = 1\n[generate]\nsubset_percent = 50.0\n\
         crossfade_mode = \"raw-hamming\"\noutput_level = \"unit_rms\"\n",
    )
    .unwrap();
    let out = tmp.path().join("gen");
    let run = collage(&[
        "--config",
        s(&cfg),
        "generate",
        "--corpus",
        s(&toy.manifest),
        "--ctm",
        s(&toy.ctm),
        "--cs-text",
        s(&toy.cs_text),
        "--out-dir",
        s(&out),
    ]);
    let report = stdout_json(&run);
    assert_eq!(report["utterances"], 10);
    assert_eq!(
        report["unit_length_histogram"]
            .as_object()
            .unwrap()
            .keys()
            .collect::<Vec<_>>(),
        ["1"]
    );
    let echo = String::from_utf8_lossy(&run.stderr);
    assert!(echo.contains("\"seed\":9"), "{echo}");
    assert!(echo.contains("raw-hamming") && echo.contains("unit_rms"), "{echo}");

    // Flags win over the file.
    let out2 = tmp.path().join("gen2");
    let report = stdout_json(&collage(&[
        "--config",
        s(&cfg),
        "generate",
        "--corpus",
        s(&toy.manifest),
        "--ctm",
        s(&toy.ctm),
        "--n",
        "2",
        "--subset-percent",
        "100",
        "--cs-text",
        s(&toy.cs_text),
        "--out-dir",
        s(&out2),
    ]));
    assert_eq!(report["utterances"], 20);

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let bad = collage(&["--config", s(&cfg), "score", "--ref", "a", "--hyp", "b"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let toy = write_toy_corpus(tmp.path()).unwrap();
    let inv = tmp.path().join("inv.tsv");

    assert_eq!(collage(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(collage(&["--help"]).status.code(), Some(0));

    // Missing audio: I/O error naming the file.
    std::fs::remove_file(toy.root.join("audio/zh_b.wav")).unwrap();
    let out = collage(&[
        "build-inventory",
        "--corpus",
        s(&toy.manifest),
        "--ctm",
        s(&toy.ctm),
        "--out",
        s(&inv),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zh_b.wav"));
    write_toy_corpus(tmp.path()).unwrap();

    // Overlapping alignments: validation error.
    let bad_ctm = tmp.path().join("bad.ctm");
    std::fs::write(&bad_ctm, "en_a 1 0.5 0.4 i\nen_a 1 0.7 0.4 like\n").unwrap();
    let out = collage(&[
        "build-inventory",
        "--corpus",
        s(&toy.manifest),
        "--ctm",
        s(&bad_ctm),
        "--out",
        s(&inv),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // An empty CTM is a valid, empty inventory.
    let empty = tmp.path().join("empty.ctm");
    std::fs::write(&empty, "").unwrap();
    let built = stdout_json(&collage(&[
        "build-inventory",
        "--corpus",
        s(&toy.manifest),
        "--ctm",
        s(&empty),
        "--out",
        s(&inv),
    ]));
    assert_eq!(built["keys"], 0);

    let out = collage(&[
        "generate",
        "--corpus",
        s(&toy.manifest),
        "--ctm",
        s(&toy.ctm),
        "--cs-text",
        s(&toy.cs_text),
        "--out-dir",
        s(&tmp.path().join("g")),
        "--overlap",
        "0.1",
        "--context",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synth_text_and_score() {
    let tmp = tempfile::tempdir().unwrap();
    let (par, align) = parallel_files(&parallel_corpus(200, 1));
    let par_path = tmp.path().join("par.tsv");
    let align_path = tmp.path().join("align.txt");
    std::fs::write(&par_path, par).unwrap();
    std::fs::write(&align_path, align).unwrap();
    let out = tmp.path().join("cs.tsv");
    let args = [
        "--seed",
        "3",
        "synth-text",
        "--parallel",
        s(&par_path),
        "--alignments",
        s(&align_path),
        "--out",
        s(&out),
    ];
    let first = stdout_json(&collage(&args));
    let text = std::fs::read(&out).unwrap();
    assert_eq!(stdout_json(&collage(&args)), first);
    assert_eq!(std::fs::read(&out).unwrap(), text);
    let f = first["replaced_fraction"].as_f64().unwrap();
    assert!((0.1..0.3).contains(&f), "{f}");

    let refs = tmp.path().join("ref.txt");
    let hyps = tmp.path().join("hyp.txt");
    std::fs::write(&refs, "u1\t我喜欢 rice\nu2\tgood day\n").unwrap();
    std::fs::write(&hyps, "u1\t我喜欢 rice\nu2\tbad day\n").unwrap();
    let scored = stdout_json(&collage(&[
        "score",
        "--ref",
        s(&refs),
        "--hyp",
        s(&hyps),
        "--cmi",
        "--filter-threshold",
        "0.2",
        "--per-utterance",
    ]));
    assert_eq!(scored["corpus"]["substitutions"], 1);
    assert_eq!(scored["utterances"].as_array().unwrap().len(), 2);
    assert_eq!(scored["filtered_cmi"]["retained"], 1);
    let wer = stdout_json(&collage(&[
        "score",
        "--ref",
        s(&refs),
        "--hyp",
        s(&hyps),
        "--mode",
        "wer",
    ]));
    assert_eq!(wer["corpus"]["reference_length"], 4);
    assert!(wer.get("reference_cmi").is_none());
}

#[test]
fn two_recording_inventory_matches_hand_count() {
    use speech_collage::audio::{write_wav, Waveform};
    let tmp = tempfile::tempdir().unwrap();
    for id in ["ra", "rb"] {
        write_wav(
            &tmp.path().join(format!("{id}.wav")),
            &Waveform::new(vec![0.1; 48_000], 16_000),
        )
        .unwrap();
    }
    let manifest = tmp.path().join("corpus.jsonl");
    std::fs::write(
        &manifest,
        "{\"id\":\"ra\",\"audio_path\":\"ra.wav\",\"sample_rate\":16000,\"duration\":3.0}\n\
         {\"id\":\"rb\",\"audio_path\":\"rb.wav\",\"sample_rate\":16000,\"duration\":3.0}\n",
    )
    .unwrap();
    // ra: "a b" contiguous, then "a" after a long pause; rb: "b a" contiguous.
    let ctm = tmp.path().join("a.ctm");
    std::fs::write(
        &ctm,
        "ra 1 0.0 0.5 a\nra 1 0.6 0.5 b\nra 1 2.0 0.5 a\nrb 1 0.1 0.4 b\nrb 1 0.5 0.4 a\n",
    )
    .unwrap();
    let inv = tmp.path().join("inv.tsv");
    let stats = stdout_json(&collage(&[
        "build-inventory",
        "--corpus",
        s(&manifest),
        "--ctm",
        s(&ctm),
        "--out",
        s(&inv),
    ]));
    // Unigrams {a, b}; bigrams {a b, b a}; 5 unigram cuts, 2 bigram cuts.
    assert_eq!(stats["keys_by_length"], serde_json::json!({"1": 2, "2": 2}));
    assert_eq!(stats["cuts_by_length"], serde_json::json!({"1": 5, "2": 2}));
}

#[test]
fn identical_transcripts_score_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let refs = tmp.path().join("ref.txt");
    std::fs::write(&refs, "u1\tgood day to you\nu2\tvery good\n").unwrap();
    let scored = stdout_json(&collage(&["score", "--ref", s(&refs), "--hyp", s(&refs), "--cmi"]));
    assert_eq!(scored["corpus"]["rate"], 0.0);
    assert_eq!(scored["reference_cmi"], 0.0);
}
