//! Instantaneous noise-based logic over asymmetric random telegraph waves,
//! applied to the two "drawing from hats" identification problems.
//!
//! An `N`-bit system carries `2N` independent clocked sign streams. Products
//! of one stream per noise-bit encode integers; the superposition of all
//! `2^N` encodings — the universe — collapses to a product of `N` two-term
//! factors and is computable in `2N - 1` operations. Hats are universes with
//! numbers removed; decisions compare hats against regenerated references
//! using exact dyadic arithmetic, so every zero test is an integer
//! comparison.
//!
//! - [`rtw`]: reference streams, product strings, universes, op counting.
//! - [`dyadic`]: the exact sample representation.
//! - [`hats`]: hat state, draws, and the two decision procedures.
//! - [`experiments`]: seeded Monte Carlo batches and quantitative checks.

pub mod dyadic;
pub mod experiments;
pub mod hats;
pub mod rtw;

pub use dyadic::DyadicSample;
pub use hats::{
    decide_double_draw, decide_single_draw, setup_hats, DoubleDecision, DoubleOutcome, HatId,
    HatState, ProtocolError, SampleStream, SingleDecision,
};
pub use rtw::{derive_seed, zero_bit_count, OpCount, ReferenceSystem, Role, Sign, SplitMix64};
