//! Index the toy corpus into an n-gram unit inventory and show how code-
//! switched sentences are segmented, including back-off and OOV reporting.
//!
//!     cargo run --example unit_inventory

use speech_collage::corpus::{load_ctm, load_manifest};
use speech_collage::inventory::{build_inventory, get_consec_units, sample_unit};
use speech_collage::{rng, toy};

fn main() -> anyhow::Result<()> {
    let tmp = tempfile::tempdir()?;
    let t = toy::write_toy_corpus(tmp.path())?;
    let recordings = load_manifest(&t.manifest)?;
    let set = load_ctm(&t.ctm, &recordings)?;

    for n in 1..=3 {
        let inv = build_inventory(&set, n, 0.2)?;
        let stats = inv.stats();
        println!("n={n}: {} keys, keys by length {:?}", inv.len(), stats.keys_by_length);
    }

    let inv = build_inventory(&set, 3, 0.2)?;
    for sentence in ["我 喜 欢 eat rice", "we go home every day", "i like pizza"] {
        let tokens: Vec<String> = sentence.split_whitespace().map(String::from).collect();
        match get_consec_units(&tokens, &inv) {
            Ok(units) => {
                let shown: Vec<String> = units.iter().map(|u| format!("[{u}]")).collect();
                println!("{sentence:<24} -> {}", shown.join(" "));
                let mut r = rng::stream(0, 0);
                for u in &units {
                    let cut = sample_unit(&inv, u.tokens(), &mut r)?;
                    println!(
                        "    {:<14} {} {:.3}-{:.3}",
                        u.to_string(),
                        cut.recording_id,
                        cut.start,
                        cut.end
                    );
                }
            }
            Err(oov) => println!("{sentence:<24} -> {oov}"),
        }
    }
    Ok(())
}
