//! Core library for `discsent`: turns plain text into three
//! discourse-coherence training tasks (sentence ordering, next-sentence
//! selection, conjunction prediction) and trains sentence encoders
//! against them with a small reverse-mode tensor library.
//!
//! Everything in this crate is deterministic: the RNG is a seeded
//! SplitMix64, reductions have fixed summation order, and all
//! transcendental math goes through `libm` so results do not depend on
//! the platform's libm. The crate is `no_std`-compatible (it requires
//! `alloc`); file IO, the CLI, and on-disk formats live in the
//! companion `discsent` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod checkpoint;
pub mod discourse;
pub mod embed;
pub mod encoder;
pub mod heads;
pub mod model;
pub mod optim;
pub mod probe;
pub mod retrieval;
pub mod rng;
pub mod schedule;
pub mod tape;
pub mod tensor;
pub mod text;
pub mod train;
pub mod vocab;

pub use rng::Rng;
pub use tensor::{Scalar, ShapeError, Tensor};
pub use text::Sentence;
pub use vocab::Vocabulary;
