//! Table-driven acceleration of radio signal-processing kernels.
//!
//! The crate has two halves. The decoding half implements a quantized
//! hard-decision Viterbi decoder twice: once through pure computation
//! ([`viterbi::Decoder`]) and once with its add-compare-select and
//! likeliest-state stages replaced by precomputed lookup tables
//! ([`accel::TabledDecoder`]). The two are bit-exact equivalent; the table
//! variant trades 16 MiB of memory for most of the per-step arithmetic.
//! A tone bank ([`nco::ToneBank`]) applies the same trade to fractional
//! frequency-offset correction.
//!
//! The planning half models a radio as a cost-annotated dataflow graph
//! ([`model::BlockGraph`]) and decides, under a memory budget, which block
//! aggregates to replace with precomputed tables ([`planner::plan`]),
//! reporting the resulting speedup, efficiency and merit figures
//! ([`model::AccelMetrics`]).
//!
//! The crate is `no_std`-compatible (it requires `alloc`); file I/O and
//! the command-line front end live in the companion `memaccel-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod accel;
pub mod model;
pub mod nco;
pub mod planner;
pub mod tables;
pub mod trellis;
pub mod viterbi;
