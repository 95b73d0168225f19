//! Score mixed Mandarin/English hypotheses with WER, CER and MER, plus CMI
//! over the hypotheses that pass an error-rate filter.
//!
//!     cargo run --example score

use speech_collage::metrics::{score, ScoreMode, ScoreOptions};

fn main() -> anyhow::Result<()> {
    let pair = |id: &str, text: &str| (id.to_string(), text.to_string());
    let refs = vec![
        pair("u1", "我喜欢 eat rice"),
        pair("u2", "今天 we go home"),
        pair("u3", "every day 很好"),
    ];
    let hyps = vec![
        pair("u1", "我喜欢 eat rice"),
        pair("u2", "今天 we go"),
        pair("u3", "very day 狠好 ok"),
    ];
    for mode in [ScoreMode::Wer, ScoreMode::Cer, ScoreMode::Mer] {
        let report = score(
            &refs,
            &hyps,
            &ScoreOptions {
                mode,
                cmi: true,
                filter_threshold: Some(0.2),
            },
        );
        let c = report.corpus;
        println!(
            "{mode:?}: {:.3} (S {} D {} I {} / N {})",
            c.rate, c.substitutions, c.deletions, c.insertions, c.reference_length
        );
        if mode == ScoreMode::Mer {
            println!(
                "reference CMI {:?}, hypothesis CMI {:?}",
                report.reference_cmi, report.hypothesis_cmi
            );
            println!("filtered CMI {:?}", report.filtered_cmi);
        }
    }
    Ok(())
}
