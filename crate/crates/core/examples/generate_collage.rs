//! Generate code-switched audio from the toy corpus and print the report.
//! Output goes to the given directory, or a temp dir that is removed on exit.
//!
//!     cargo run --example generate_collage [-- out_dir]

use speech_collage::corpus::{load_ctm, load_manifest};
use speech_collage::cstext::load_cs_text;
use speech_collage::generator::{
    generate_collage, load_generation_manifest, CollageConfig, CollageRequest, MANIFEST_FILE,
};
use speech_collage::inventory::build_inventory;
use speech_collage::toy;

fn main() -> anyhow::Result<()> {
    let tmp = tempfile::tempdir()?;
    let t = toy::write_toy_corpus(&tmp.path().join("corpus"))?;
    let out_dir = std::env::args_os()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| tmp.path().join("out"));

    let recordings = load_manifest(&t.manifest)?;
    let inventory = build_inventory(&load_ctm(&t.ctm, &recordings)?, 3, 0.2)?;
    let cs_text = load_cs_text(&t.cs_text)?;
    let report = generate_collage(&CollageRequest {
        cs_text: &cs_text,
        inventory: &inventory,
        recordings: &recordings,
        config: CollageConfig {
            seed: 1,
            ..Default::default()
        },
        output_dir: out_dir.clone(),
    })?;

    println!(
        "{} of {} utterances, {:.2} s of audio in {}",
        report.generated_count,
        report.utterances,
        report.total_audio_seconds,
        out_dir.display()
    );
    for s in &report.skipped {
        println!("skipped {}: {:?}", s.utterance_id, s.reason);
    }
    for r in load_generation_manifest(&out_dir.join(MANIFEST_FILE))?.iter().take(3) {
        let units: Vec<String> = r
            .provenance
            .iter()
            .map(|p| format!("{}@{}:{:.2}", p.tokens.join(" "), p.recording_id, p.start))
            .collect();
        println!("{} {:.3} s  {}", r.utterance_id, r.duration_seconds, units.join(" + "));
    }
    Ok(())
}
