//! The memory-accelerated Viterbi decoder.
//!
//! Externally this decoder behaves exactly like [`crate::viterbi::Decoder`];
//! its output is defined to be bit-exact equal on every input. Internally
//! the add-compare-select stage is 16 [`AcsTable`] reads per trellis step
//! (one per butterfly group) and the global minimum needed for both
//! normalization and likeliest-state selection comes from a 16-to-4-to-1
//! tournament of 21 [`MinSelectTable`] reads. The decision-register
//! exchange and the 64 normalization subtractions stay computational: the
//! register state is far too wide to key a table, and tabling the
//! subtraction would need the whole 256-bit metric vector as a key. Both
//! look-up families are counted so the per-step management cost can be
//! checked against instrumentation.

use alloc::vec::Vec;

use crate::tables::{AcsTable, MinSelectTable, TableError};
use crate::trellis::CodeSpec;
use crate::viterbi::{register_bit, register_shift, DecoderConfig, DecoderState};

/// Table reads per trellis step.
pub const ACS_LOOKUPS_PER_STEP: u64 = 16;
pub const MIN_SELECT_LOOKUPS_PER_STEP: u64 = 21;

/// Streaming decoder driven by the precomputed tables.
#[derive(Debug, Clone)]
pub struct TabledDecoder {
    config: DecoderConfig,
    acs: AcsTable,
    min_select: MinSelectTable,
    state: DecoderState,
    acs_lookups: u64,
    min_select_lookups: u64,
}

impl TabledDecoder {
    /// Wire tables to a decoder configuration.
    ///
    /// Fails with [`TableError::SpecDigestMismatch`] unless both tables
    /// were built for exactly this code and quantization, and with
    /// [`TableError::UnsupportedCode`] for codes the table layout cannot
    /// express.
    pub fn new(
        config: DecoderConfig,
        acs: AcsTable,
        min_select: MinSelectTable,
    ) -> Result<Self, TableError> {
        if config.code().num_states() != 64 {
            return Err(TableError::UnsupportedCode);
        }
        // Re-binding through the typed constructors re-checks the digests.
        let acs = AcsTable::from_table(config.code(), acs.into_table())?;
        let min_select = MinSelectTable::from_table(config.code(), min_select.into_table())?;
        let state = DecoderState::new(&config);
        Ok(TabledDecoder {
            config,
            acs,
            min_select,
            state,
            acs_lookups: 0,
            min_select_lookups: 0,
        })
    }

    /// Build fresh tables for `code` and wire them directly.
    pub fn with_fresh_tables(config: DecoderConfig, budget_bytes: u64) -> Result<Self, TableError> {
        let acs = AcsTable::build(config.code(), budget_bytes)?;
        let min_select = MinSelectTable::build(config.code(), budget_bytes)?;
        TabledDecoder::new(config, acs, min_select)
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn state(&self) -> &DecoderState {
        &self.state
    }

    /// (ACS reads, min-select reads) since construction or counter reset.
    pub fn lookup_counts(&self) -> (u64, u64) {
        (self.acs_lookups, self.min_select_lookups)
    }

    pub fn reset_lookup_counts(&mut self) {
        self.acs_lookups = 0;
        self.min_select_lookups = 0;
    }

    pub fn reset(&mut self) {
        self.state = DecoderState::new(&self.config);
    }

    #[inline]
    fn min_select(&mut self, metrics: [u8; 4]) -> (u8, u8) {
        self.min_select_lookups += 1;
        self.min_select.lookup(MinSelectTable::key(metrics))
    }

    /// Min and argmin over all 64 metrics via the tournament. First-wins
    /// at every level composes to the lowest-index global minimum, the
    /// same tie rule the computed decoder uses.
    fn tournament(&mut self, metrics: &[u8]) -> (usize, u8) {
        let mut leaf_arg = [0u8; 16];
        let mut leaf_min = [0u8; 16];
        for g in 0..16 {
            let (arg, min) = self.min_select([
                metrics[4 * g],
                metrics[4 * g + 1],
                metrics[4 * g + 2],
                metrics[4 * g + 3],
            ]);
            leaf_arg[g] = arg;
            leaf_min[g] = min;
        }
        let mut mid_arg = [0u8; 4];
        let mut mid_min = [0u8; 4];
        for h in 0..4 {
            let (arg, min) = self.min_select([
                leaf_min[4 * h],
                leaf_min[4 * h + 1],
                leaf_min[4 * h + 2],
                leaf_min[4 * h + 3],
            ]);
            mid_arg[h] = arg;
            mid_min[h] = min;
        }
        let (top_arg, min) = self.min_select(mid_min);
        let leaf = 4 * usize::from(top_arg) + usize::from(mid_arg[usize::from(top_arg)]);
        let state = 4 * leaf + usize::from(leaf_arg[leaf]);
        (state, min)
    }

    /// One trellis step: 16 ACS reads, register exchange, tournament
    /// min, computational normalization.
    fn step(&mut self, received: u8) -> (usize, u8) {
        assert!(received < 4, "received symbol must be a dibit");
        let words = self.state.words;
        let depth = self.config.depth();

        let mut next_metrics = [0u8; 64];
        let mut oldest = [0u8; 64];
        for group in 0..16usize {
            let slot_states = [2 * group, 2 * group + 32, 2 * group + 1, 2 * group + 33];
            let packed = MinSelectTable::key([
                self.state.metrics[slot_states[0]],
                self.state.metrics[slot_states[1]],
                self.state.metrics[slot_states[2]],
                self.state.metrics[slot_states[3]],
            ]);
            self.acs_lookups += 1;
            let (new_metrics, decisions) = self.acs.lookup(group as u8, received, packed);
            for i in 0..4usize {
                let n = 4 * group + i;
                next_metrics[n] = ((new_metrics >> (4 * i)) & 0xF) as u8;
                let slot = (i >> 1) * 2 + usize::from((decisions >> i) & 1);
                let survivor = slot_states[slot];
                let src = &self.state.registers[survivor * words..(survivor + 1) * words];
                let dst = &mut self.state.scratch_registers[n * words..(n + 1) * words];
                oldest[n] = register_shift(dst, src, depth, (n & 1) as u8);
            }
        }

        let (likeliest, min) = self.tournament(&next_metrics);
        for (slot, value) in next_metrics.iter().enumerate() {
            self.state.scratch_metrics[slot] = value - min;
        }
        let oldest_bit = oldest[likeliest];
        self.state.finish_step();
        (likeliest, oldest_bit)
    }

    /// Feed one dibit; emits a decoded bit once the delay pipeline is full.
    pub fn push(&mut self, dibit: u8) -> Option<u8> {
        let (_, oldest_bit) = self.step(dibit);
        (self.state.step_count() > self.config.depth() as u64).then_some(oldest_bit)
    }

    /// Drain the likeliest state's register at end of input, oldest bit
    /// first.
    pub fn flush(&mut self) -> Vec<u8> {
        let (likeliest, _) = self.tournament_over_current();
        let register = self.state.register(likeliest);
        let n = self.config.depth().min(self.state.step_count() as usize);
        (0..n).rev().map(|bit| register_bit(register, bit)).collect()
    }

    fn tournament_over_current(&mut self) -> (usize, u8) {
        let metrics: Vec<u8> = self.state.metrics().to_vec();
        self.tournament(&metrics)
    }

    /// Decode a whole dibit sequence; bit-exact equal to the computed
    /// decoder on the same configuration.
    pub fn decode(&mut self, dibits: &[u8]) -> Vec<u8> {
        self.reset();
        let mut out = Vec::with_capacity(dibits.len());
        for &d in dibits {
            if let Some(bit) = self.push(d) {
                out.push(bit);
            }
        }
        out.extend(self.flush());
        out
    }
}

/// Build both decoder tables in one call.
pub fn build_decoder_tables(
    code: &CodeSpec,
    budget_bytes: u64,
) -> Result<(AcsTable, MinSelectTable), TableError> {
    let acs = AcsTable::build(code, budget_bytes)?;
    let remaining = budget_bytes.saturating_sub(AcsTable::SPEC.total_bytes());
    let min_select = MinSelectTable::build(code, remaining)?;
    Ok((acs, min_select))
}
