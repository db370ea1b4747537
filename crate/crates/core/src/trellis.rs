//! Convolutional code definition and reference encoder.
//!
//! The encoder window holds `constraint_length` bits with the newest input
//! bit in the least-significant position. A trellis state is the low
//! `constraint_length - 1` bits of the window, so pushing bit `b` into
//! state `s` forms window `w = (s << 1) | b` and lands in state
//! `w & (num_states - 1)`. Every module that keys tables on states or
//! branch labels inherits this bit ordering.

use alloc::vec::Vec;
use core::fmt;

/// Generator masks of the rate-1/2 K=7 mother code used by DVB-T
/// (171/133 octal).
pub const DVBT_GENERATORS: [u32; 2] = [0o171, 0o133];

/// A rate-1/2 binary convolutional code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    constraint_length: u32,
    generators: [u32; 2],
}

/// Rejected [`CodeSpec`] parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeError {
    /// Constraint length outside the supported 2..=16 range.
    ConstraintLength(u32),
    /// Generator mask has bits beyond the constraint length.
    GeneratorWidth { index: usize, mask: u32 },
    /// Generator mask is missing its top or bottom tap. Both ends must be
    /// set; this is the cheap screen against degenerate generators.
    GeneratorEnds { index: usize, mask: u32 },
}

impl fmt::Display for CodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeError::ConstraintLength(k) => {
                write!(f, "unsupported constraint length {k} (expected 2..=16)")
            }
            CodeError::GeneratorWidth { index, mask } => {
                write!(f, "generator {index} mask {mask:#o} wider than the constraint length")
            }
            CodeError::GeneratorEnds { index, mask } => {
                write!(f, "generator {index} mask {mask:#o} must have its MSB and LSB set")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CodeError {}

impl CodeSpec {
    /// Build a code description and validate the generator masks.
    pub fn new(constraint_length: u32, generators: [u32; 2]) -> Result<Self, CodeError> {
        if !(2..=16).contains(&constraint_length) {
            return Err(CodeError::ConstraintLength(constraint_length));
        }
        let top = 1u32 << (constraint_length - 1);
        let width = (1u32 << constraint_length) - 1;
        for (index, &mask) in generators.iter().enumerate() {
            if mask & !width != 0 {
                return Err(CodeError::GeneratorWidth { index, mask });
            }
            if mask & top == 0 || mask & 1 == 0 {
                return Err(CodeError::GeneratorEnds { index, mask });
            }
        }
        Ok(CodeSpec { constraint_length, generators })
    }

    /// The K=7 DVB-T mother code, 171/133 octal.
    pub fn dvbt() -> Self {
        CodeSpec::new(7, DVBT_GENERATORS).expect("preset is valid")
    }

    pub fn constraint_length(&self) -> u32 {
        self.constraint_length
    }

    pub fn generators(&self) -> [u32; 2] {
        self.generators
    }

    /// Number of trellis states, `2^(K-1)`.
    pub fn num_states(&self) -> u32 {
        1 << (self.constraint_length - 1)
    }

    /// Output dibits per input bit.
    pub fn rate_inverse(&self) -> u32 {
        2
    }

    fn state_mask(&self) -> u32 {
        self.num_states() - 1
    }

    /// Advance `state` by one input bit.
    ///
    /// Returns the successor state and the output dibit, generator 0's
    /// output in the high bit. The successor keeps the input bit as its
    /// least-significant bit.
    #[inline]
    pub fn transition(&self, state: u32, bit: u8) -> (u32, u8) {
        assert!(state < self.num_states(), "state out of range");
        assert!(bit <= 1, "input bit out of range");
        let window = (state << 1) | u32::from(bit);
        let out0 = (self.generators[0] & window).count_ones() & 1;
        let out1 = (self.generators[1] & window).count_ones() & 1;
        (window & self.state_mask(), ((out0 << 1) | out1) as u8)
    }

    /// Encode a bit sequence starting from the all-zero state.
    ///
    /// Produces one dibit per input bit and reports the final encoder
    /// state. Callers that want the decoder to terminate cleanly append
    /// `constraint_length - 1` zero tail bits themselves.
    pub fn encode(&self, bits: &[u8]) -> (Vec<u8>, u32) {
        let mut state = 0u32;
        let mut out = Vec::with_capacity(bits.len());
        for &bit in bits {
            let (next, dibit) = self.transition(state, bit);
            out.push(dibit);
            state = next;
        }
        (out, state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Parity of `mask & window` evaluated bit by bit, kept deliberately
    /// different from the implementation's `count_ones` path.
    fn slow_parity(mask: u32, window: u32) -> u8 {
        let mut acc = 0u8;
        let mut v = mask & window;
        while v != 0 {
            acc ^= (v & 1) as u8;
            v >>= 1;
        }
        acc
    }

    fn slow_dibit(code: &CodeSpec, state: u32, bit: u8) -> u8 {
        let window = (state << 1) | u32::from(bit);
        let [g0, g1] = code.generators();
        (slow_parity(g0, window) << 1) | slow_parity(g1, window)
    }

    #[test]
    fn zero_state_zero_bit_is_silent() {
        let code = CodeSpec::dvbt();
        assert_eq!(code.transition(0, 0), (0, 0b00));
    }

    #[test]
    fn zero_state_one_bit_emits_both_taps() {
        // Both generators have their LSB set, so the first 1 toggles both.
        let code = CodeSpec::dvbt();
        assert_eq!(code.transition(0, 1), (1, 0b11));
    }

    #[test]
    fn full_state_zero_bit() {
        // Window 0b1111110: both 171/133 parities evaluate to zero.
        let code = CodeSpec::dvbt();
        let (next, dibit) = code.transition(63, 0);
        assert_eq!(next, 62);
        assert_eq!(dibit, slow_dibit(&code, 63, 0));
        assert_eq!(dibit, 0b00);
    }

    #[test]
    fn transition_matches_bitwise_parity_everywhere() {
        let code = CodeSpec::dvbt();
        for state in 0..code.num_states() {
            for bit in 0..2u8 {
                let (next, dibit) = code.transition(state, bit);
                assert_eq!(dibit, slow_dibit(&code, state, bit));
                assert_eq!(next & 1, u32::from(bit), "input bit must be the new LSB");
                assert_eq!(next, ((state << 1) | u32::from(bit)) & 0x3F);
            }
        }
    }

    #[test]
    fn every_state_has_the_two_expected_predecessors() {
        let code = CodeSpec::dvbt();
        let ns = code.num_states();
        let mut preds = vec![Vec::new(); ns as usize];
        for state in 0..ns {
            for bit in 0..2u8 {
                let (next, _) = code.transition(state, bit);
                preds[next as usize].push((state, bit));
            }
        }
        for (next, p) in preds.iter().enumerate() {
            let next = next as u32;
            assert_eq!(p.len(), 2);
            let expect_bit = (next & 1) as u8;
            assert!(p.contains(&(next >> 1, expect_bit)));
            assert!(p.contains(&((next >> 1) + ns / 2, expect_bit)));
        }
    }

    #[test]
    fn butterfly_groups_share_predecessors() {
        // New states {4j..4j+3} must draw exactly on {2j, 2j+32, 2j+1, 2j+33}.
        let code = CodeSpec::dvbt();
        for j in 0..16u32 {
            let mut sources = Vec::new();
            for state in 0..64u32 {
                for bit in 0..2u8 {
                    let (next, _) = code.transition(state, bit);
                    if next >> 2 == j {
                        sources.push(state);
                    }
                }
            }
            sources.sort_unstable();
            sources.dedup();
            let mut expected = vec![2 * j, 2 * j + 1, 2 * j + 32, 2 * j + 33];
            expected.sort_unstable();
            assert_eq!(sources, expected);
        }
    }

    #[test]
    fn all_zero_input_encodes_to_all_zero() {
        let code = CodeSpec::dvbt();
        let (dibits, state) = code.encode(&[0; 100]);
        assert_eq!(dibits, vec![0; 100]);
        assert_eq!(state, 0);
    }

    #[test]
    fn impulse_response_reads_the_generator_taps() {
        let code = CodeSpec::dvbt();
        let (dibits, state) = code.encode(&[1, 0, 0, 0, 0, 0, 0]);
        let expected: Vec<u8> = (0..7)
            .map(|step| {
                let window = 1u32 << step;
                let [g0, g1] = code.generators();
                (slow_parity(g0, window) << 1) | slow_parity(g1, window)
            })
            .collect();
        assert_eq!(dibits, expected);
        assert_eq!(dibits, vec![0b11, 0b01, 0b00, 0b11, 0b11, 0b10, 0b11]);
        assert_eq!(state, 0, "the impulse flushes out after K-1 zeros");
    }

    #[test]
    fn rejects_bad_generators() {
        assert_eq!(
            CodeSpec::new(7, [0o171, 0o132]),
            Err(CodeError::GeneratorEnds { index: 1, mask: 0o132 })
        );
        assert_eq!(
            CodeSpec::new(3, [0o17, 0o5]),
            Err(CodeError::GeneratorWidth { index: 0, mask: 0o17 })
        );
        assert_eq!(CodeSpec::new(1, [1, 1]), Err(CodeError::ConstraintLength(1)));
        assert!(CodeSpec::new(3, [0o7, 0o5]).is_ok());
    }
}
