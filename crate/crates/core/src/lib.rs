//! Code-switched speech synthesis by splicing aligned audio units.
//!
//! The pipeline ingests monolingual recordings with CTM word/character
//! alignments ([`corpus`]), indexes every short run of consecutive tokens
//! as a spliceable unit ([`inventory`]), and renders code-switched
//! sentences by sampling one cut per unit, crossfading neighbours with a
//! Hamming overlap-add and equalizing segment energy ([`dsp`],
//! [`generator`]). Code-switched text can itself be synthesized from
//! parallel text and word alignments ([`cstext`]), and [`metrics`] scores
//! the results (WER/CER/MER and the Code-Mixing Index).
//!
//! Runnable examples live in `examples/`; the `collage` binary exposes the
//! same pipeline as subcommands.

// `!(x >= 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod cli;
pub mod corpus;
pub mod cstext;
pub mod dsp;
pub mod error;
pub mod generator;
pub mod inventory;
pub mod metrics;
pub mod rng;
pub mod toy;

pub use audio::Waveform;
pub use corpus::{AlignedToken, Recording, SupervisionSet};
pub use dsp::{CrossfadeMode, CrossfadeSpec};
pub use error::{Error, Result};
pub use generator::{CollageConfig, CollageRequest, GenerationReport, OutputLevel};
pub use inventory::{CutRef, Inventory, UnitKey};
