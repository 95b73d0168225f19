//! Load a corpus manifest and CTM alignments, validate them and print a
//! summary. With no arguments a toy corpus is written to a temp dir first.
//!
//!     cargo run --example ingest_alignments [-- corpus.jsonl alignments.ctm]

use std::path::PathBuf;

use speech_collage::corpus::{check_audio, load_ctm, load_manifest, validate};
use speech_collage::toy;

fn main() -> anyhow::Result<()> {
    let args: Vec<PathBuf> = std::env::args_os().skip(1).map(PathBuf::from).collect();
    let _tmp;
    let (manifest, ctm) = match args.as_slice() {
        [m, c] => (m.clone(), c.clone()),
        [] => {
            _tmp = tempfile::tempdir()?;
            let t = toy::write_toy_corpus(_tmp.path())?;
            (t.manifest, t.ctm)
        }
        _ => anyhow::bail!("usage: ingest_alignments [corpus.jsonl alignments.ctm]"),
    };

    let recordings = load_manifest(&manifest)?;
    for r in &recordings {
        check_audio(r)?;
        println!(
            "{:<8} {:>7.2} s  {} Hz  {}",
            r.id,
            r.duration(),
            r.sample_rate,
            r.audio_path.display()
        );
    }
    let set = load_ctm(&ctm, &recordings)?;
    println!("{} tokens over {} recordings", set.token_count(), set.tokens.len());

    let report = validate(&set);
    if report.is_accepted() {
        println!("alignments valid");
    } else {
        for f in &report.findings {
            println!("  {f}");
        }
        anyhow::bail!("{} validation finding(s)", report.findings.len());
    }
    Ok(())
}
