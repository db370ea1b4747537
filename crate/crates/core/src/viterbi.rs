//! Quantized hard-decision Viterbi decoding, implemented through pure
//! computation.
//!
//! Each received dibit drives the classical stages in order: branch
//! distance from every transition label, add-compare-select per state,
//! register exchange of the survivor decision bits, global metric
//! normalization, and likeliest-state selection. Path metrics are 4-bit
//! saturating integers and every step subtracts the global minimum, so the
//! whole decoder is a deterministic finite-state machine: identical inputs
//! give identical outputs on every platform. Keeping the metric state
//! space closed like this is what makes the add-compare-select stage small
//! enough to tabulate (see [`crate::tables`]).
//!
//! Survivor memory uses register exchange: every state carries the last
//! `traceback_depth` decision bits of its own path. Decoding is streaming
//! with that depth as delay; the decoder emits the oldest bit of the
//! likeliest state's register once the pipeline is full and flushes the
//! remainder at end of input, so output length always equals input length.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::trellis::CodeSpec;

/// Saturation ceiling of the 4-bit path metrics.
pub const METRIC_MAX: u8 = 15;

/// Default traceback depth; well past five constraint lengths for K=7.
pub const DEFAULT_TRACEBACK_DEPTH: usize = 64;

/// Hamming distance between two dibits.
#[inline]
pub fn branch_distance(received: u8, expected: u8) -> u8 {
    (u32::from(received ^ expected) & 0b11).count_ones() as u8
}

/// Index of the smallest metric; ties resolve to the lowest index.
pub fn select_likeliest(metrics: &[u8]) -> usize {
    let mut best = 0;
    for (i, &m) in metrics.iter().enumerate() {
        if m < metrics[best] {
            best = i;
        }
    }
    best
}

#[inline]
fn saturating_add_metric(metric: u8, distance: u8) -> u8 {
    (metric + distance).min(METRIC_MAX)
}

/// Add-compare-select for one butterfly group of a 64-state code, computed
/// directly from the trellis.
///
/// Group `j` produces new states `4j..4j+3` from predecessor states
/// `[2j, 2j+32, 2j+1, 2j+33]`; `packed_metrics` holds those four metrics
/// in that slot order, one nibble each, lowest slot in the lowest nibble.
/// Returns the four un-normalized new metrics packed the same way plus one
/// decision bit per new state (0 = the lower-index predecessor survived,
/// which is also the tie rule).
pub fn acs_group(code: &CodeSpec, group: u8, received: u8, packed_metrics: u16) -> (u16, u8) {
    assert_eq!(code.num_states(), 64, "butterfly grouping assumes 64 states");
    assert!(group < 16 && received < 4);
    let j = u32::from(group);
    let slot_states = [2 * j, 2 * j + 32, 2 * j + 1, 2 * j + 33];
    let metric = |slot: usize| ((packed_metrics >> (4 * slot)) & 0xF) as u8;

    let mut new_metrics = 0u16;
    let mut decisions = 0u8;
    for i in 0..4u32 {
        let new_state = 4 * j + i;
        let bit = (new_state & 1) as u8;
        let base = ((i >> 1) * 2) as usize;
        let (_, label_lo) = code.transition(slot_states[base], bit);
        let (_, label_hi) = code.transition(slot_states[base + 1], bit);
        let cand_lo = saturating_add_metric(metric(base), branch_distance(received, label_lo));
        let cand_hi = saturating_add_metric(metric(base + 1), branch_distance(received, label_hi));
        let (survivor, decision) = if cand_hi < cand_lo { (cand_hi, 1) } else { (cand_lo, 0) };
        new_metrics |= u16::from(survivor) << (4 * i);
        decisions |= decision << i;
    }
    (new_metrics, decisions)
}

/// Rejected decoder configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigError {
    /// Traceback depth shorter than five constraint lengths.
    DepthTooShort { depth: usize, minimum: usize },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::DepthTooShort { depth, minimum } => {
                write!(f, "traceback depth {depth} below the minimum {minimum}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}

/// Code, traceback depth and the precomputed branch labels.
///
/// Ties in the compare step always go to the lower-index predecessor;
/// the rule is fixed so that table-driven and computed decoding stay
/// bit-exact equal.
#[derive(Debug, Clone)]
pub struct DecoderConfig {
    code: CodeSpec,
    depth: usize,
    /// labels[n] = dibits on the edges from predecessors n>>1 and
    /// n>>1 + num_states/2 into new state n.
    labels: Vec<[u8; 2]>,
}

impl DecoderConfig {
    pub fn new(code: CodeSpec, depth: usize) -> Result<Self, ConfigError> {
        let minimum = 5 * code.constraint_length() as usize;
        if depth < minimum {
            return Err(ConfigError::DepthTooShort { depth, minimum });
        }
        let ns = code.num_states();
        let mut labels = Vec::with_capacity(ns as usize);
        for n in 0..ns {
            let bit = (n & 1) as u8;
            let (lo, hi) = (n >> 1, (n >> 1) + ns / 2);
            let (next_lo, label_lo) = code.transition(lo, bit);
            let (next_hi, label_hi) = code.transition(hi, bit);
            debug_assert_eq!(next_lo, n);
            debug_assert_eq!(next_hi, n);
            labels.push([label_lo, label_hi]);
        }
        Ok(DecoderConfig { code, depth, labels })
    }

    /// Configuration with [`DEFAULT_TRACEBACK_DEPTH`] (or the minimum
    /// legal depth for long codes).
    pub fn with_default_depth(code: CodeSpec) -> Self {
        let minimum = 5 * code.constraint_length() as usize;
        let depth = DEFAULT_TRACEBACK_DEPTH.max(minimum);
        DecoderConfig::new(code, depth).expect("depth satisfies the minimum")
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub(crate) fn edge_labels(&self, new_state: usize) -> [u8; 2] {
        self.labels[new_state]
    }

    pub(crate) fn register_words(&self) -> usize {
        self.depth.div_ceil(64)
    }
}

/// Shift `src` left by one, append `new_bit`, and report the bit that
/// fell out of the `depth`-bit window.
#[inline]
pub(crate) fn register_shift(dst: &mut [u64], src: &[u64], depth: usize, new_bit: u8) -> u8 {
    let top_word = (depth - 1) / 64;
    let top_bit = ((depth - 1) % 64) as u32;
    let outgoing = ((src[top_word] >> top_bit) & 1) as u8;
    let mut carry = u64::from(new_bit);
    for w in 0..=top_word {
        let v = src[w];
        dst[w] = (v << 1) | carry;
        carry = v >> 63;
    }
    let keep = if top_bit == 63 { u64::MAX } else { (1u64 << (top_bit + 1)) - 1 };
    dst[top_word] &= keep;
    outgoing
}

#[inline]
pub(crate) fn register_bit(words: &[u64], bit: usize) -> u8 {
    ((words[bit / 64] >> (bit % 64)) & 1) as u8
}

/// Running decoder state: path metrics, decision registers, step count.
///
/// After every completed step the minimum metric is zero and every metric
/// is at most [`METRIC_MAX`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderState {
    pub(crate) metrics: Vec<u8>,
    pub(crate) registers: Vec<u64>,
    pub(crate) scratch_metrics: Vec<u8>,
    pub(crate) scratch_registers: Vec<u64>,
    pub(crate) scratch_oldest: Vec<u8>,
    pub(crate) words: usize,
    pub(crate) step_count: u64,
}

impl DecoderState {
    /// Fresh state assuming the encoder starts in the all-zero state:
    /// state 0 at metric zero, everything else saturated.
    pub fn new(config: &DecoderConfig) -> Self {
        let ns = config.code().num_states() as usize;
        let words = config.register_words();
        let mut metrics = vec![METRIC_MAX; ns];
        metrics[0] = 0;
        DecoderState {
            metrics,
            registers: vec![0; ns * words],
            scratch_metrics: vec![0; ns],
            scratch_registers: vec![0; ns * words],
            scratch_oldest: vec![0; ns],
            words,
            step_count: 0,
        }
    }

    pub fn metrics(&self) -> &[u8] {
        &self.metrics
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub(crate) fn register(&self, state: usize) -> &[u64] {
        &self.registers[state * self.words..(state + 1) * self.words]
    }

    /// Write back the double-buffered step outputs.
    pub(crate) fn finish_step(&mut self) {
        core::mem::swap(&mut self.metrics, &mut self.scratch_metrics);
        core::mem::swap(&mut self.registers, &mut self.scratch_registers);
        self.step_count += 1;
    }
}

/// What one trellis step produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutput {
    /// State with the smallest metric after normalization (lowest index
    /// on ties).
    pub likeliest: usize,
    /// Oldest decision bit that fell out of the likeliest state's
    /// register this step; meaningful once the pipeline is full.
    pub oldest_bit: u8,
}

/// One add-compare-select step over the whole trellis, followed by
/// register exchange and global normalization.
pub fn acs_step(state: &mut DecoderState, config: &DecoderConfig, received: u8) -> StepOutput {
    assert!(received < 4, "received symbol must be a dibit");
    let ns = config.code().num_states() as usize;
    let words = state.words;
    let depth = config.depth();

    for n in 0..ns {
        let lo = n >> 1;
        let hi = lo + ns / 2;
        let [label_lo, label_hi] = config.edge_labels(n);
        let cand_lo = saturating_add_metric(state.metrics[lo], branch_distance(received, label_lo));
        let cand_hi = saturating_add_metric(state.metrics[hi], branch_distance(received, label_hi));
        // Ties keep the lower-index predecessor.
        let (survivor, metric) = if cand_hi < cand_lo { (hi, cand_hi) } else { (lo, cand_lo) };
        state.scratch_metrics[n] = metric;
        let src = &state.registers[survivor * words..(survivor + 1) * words];
        let dst = &mut state.scratch_registers[n * words..(n + 1) * words];
        state.scratch_oldest[n] = register_shift(dst, src, depth, (n & 1) as u8);
    }

    let likeliest = select_likeliest(&state.scratch_metrics);
    let min = state.scratch_metrics[likeliest];
    for m in state.scratch_metrics.iter_mut() {
        *m -= min;
    }
    let oldest_bit = state.scratch_oldest[likeliest];
    state.finish_step();
    StepOutput { likeliest, oldest_bit }
}

/// Computation-only streaming decoder.
#[derive(Debug, Clone)]
pub struct Decoder {
    config: DecoderConfig,
    state: DecoderState,
}

impl Decoder {
    pub fn new(config: DecoderConfig) -> Self {
        let state = DecoderState::new(&config);
        Decoder { config, state }
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn state(&self) -> &DecoderState {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state = DecoderState::new(&self.config);
    }

    /// Feed one dibit; emits a decoded bit once the delay pipeline is full.
    pub fn push(&mut self, dibit: u8) -> Option<u8> {
        let out = acs_step(&mut self.state, &self.config, dibit);
        (self.state.step_count > self.config.depth as u64).then_some(out.oldest_bit)
    }

    /// Drain the likeliest state's register at end of input, oldest bit
    /// first. Returns `min(depth, steps)` bits.
    pub fn flush(&self) -> Vec<u8> {
        let likeliest = select_likeliest(&self.state.metrics);
        let register = self.state.register(likeliest);
        let n = self.config.depth.min(self.state.step_count as usize);
        (0..n).rev().map(|bit| register_bit(register, bit)).collect()
    }

    /// Decode a whole dibit sequence; output length equals input length.
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
