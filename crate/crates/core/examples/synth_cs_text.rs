//! Synthesize code-switched text from aligned parallel sentences at several
//! replacement rates and report how mixed the result is.
//!
//!     cargo run --example synth_cs_text

use speech_collage::cstext::{synthesize_corpus, ReplacementPolicy};
use speech_collage::metrics::corpus_cmi;
use speech_collage::toy;

fn main() -> anyhow::Result<()> {
    let pairs = toy::parallel_corpus(2000, 7);
    for rate in [0.0, 0.05, 0.2, 0.5, 1.0] {
        let policy = ReplacementPolicy {
            rate,
            seed: 3,
            ..ReplacementPolicy::default()
        };
        let out = synthesize_corpus(&pairs, &policy)?;
        let cmi = corpus_cmi(out.text.utterances.iter().map(|u| u.langs.as_slice()));
        println!(
            "rate {rate:.2}: replaced {:>5}/{} words ({:.3}), CMI {:.2}",
            out.replaced,
            out.eligible,
            out.replaced_fraction().unwrap_or(0.0),
            cmi.unwrap_or(0.0)
        );
        if rate == 0.2 {
            for u in out.text.utterances.iter().take(3) {
                println!("    {}\t{}", u.id, u.tokens.join(" "));
            }
        }
    }
    Ok(())
}
