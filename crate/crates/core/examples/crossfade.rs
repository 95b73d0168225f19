//! Overlap-add two halves of one signal and compare the crossfade modes.
//! The normalized Hamming fade rebuilds the signal exactly; the raw fade
//! dips or bulges across the overlap.
//!
//!     cargo run --example crossfade

use speech_collage::audio::Waveform;
use speech_collage::dsp::{fade_weights, normalize_energy, overlap_add_samples, CrossfadeMode};

fn main() -> anyhow::Result<()> {
    let rate = 16_000;
    let x: Vec<f32> = (0..4000).map(|i| (i as f32 * 0.03).sin() * 0.5).collect();
    let (split, overlap) = (1800, 800);
    let a = Waveform::new(x[..split + overlap].to_vec(), rate);
    let b = Waveform::new(x[split..].to_vec(), rate);

    for mode in [CrossfadeMode::NormalizedHamming, CrossfadeMode::RawHamming] {
        let y = overlap_add_samples(&a, &b, overlap, mode)?;
        let err = y.samples.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f32::max);
        let (fin, fout) = fade_weights(overlap, mode);
        let gain = fin.iter().zip(&fout).map(|(i, o)| i + o);
        let (lo, hi) = gain.fold((f64::MAX, f64::MIN), |(lo, hi), g| (lo.min(g), hi.max(g)));
        println!(
            "{mode:<18} len {} max error {err:.2e}  fade gain {lo:.3}..{hi:.3}",
            y.len()
        );
    }

    let quiet = Waveform::new(x.iter().map(|s| s * 0.01).collect(), rate);
    let eq = normalize_energy(&quiet)?;
    println!("energy normalization: rms {:.5} -> {:.6}", quiet.rms(), eq.rms());
    Ok(())
}
