//! Tabled fractional frequency-offset correction.
//!
//! A single computed oscillator that can synthesize any correction tone is
//! split into a bank of single-frequency oscillators, one per supported
//! fractional offset, and each of those is just a table of one tone period
//! in Q1.15 fixed point. Correction is then an element-wise complex
//! multiply against the selected table.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use num_complex::Complex64;

/// Q1.15 scale: 15 fractional bits.
pub const TONE_SCALE: f64 = 32768.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcoError {
    /// No tone stored at the requested offset index.
    IndexOutOfRange { index: usize, tones: usize },
}

impl fmt::Display for NcoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NcoError::IndexOutOfRange { index, tones } => {
                write!(f, "offset index {index} out of range for {tones} tones")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NcoError {}

fn quantize(value: f64) -> i16 {
    let scaled = libm::round(value * TONE_SCALE);
    scaled.clamp(-32768.0, 32767.0) as i16
}

/// One period of `e^(-i 2π ε k / N)` per supported offset ε, quantized to
/// Q1.15. Immutable after build and shareable across correctors.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneBank {
    period: usize,
    offsets: Vec<f64>,
    tones: Vec<Vec<(i16, i16)>>,
}

impl ToneBank {
    /// Tabulate one tone period for every offset. Offsets are in units of
    /// subcarrier spacing; the list is caller-chosen and kept in order.
    pub fn build(period: usize, offsets: &[f64]) -> ToneBank {
        assert!(period > 0, "tone period must be positive");
        let tones = offsets
            .iter()
            .map(|&offset| {
                (0..period)
                    .map(|k| {
                        let phase = -TAU * offset * k as f64 / period as f64;
                        (quantize(libm::cos(phase)), quantize(libm::sin(phase)))
                    })
                    .collect()
            })
            .collect();
        ToneBank { period, offsets: offsets.to_vec(), tones }
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Table footprint in bytes (4 bytes per stored sample).
    pub fn table_bytes(&self) -> usize {
        self.tones.len() * self.period * 4
    }

    pub fn tone(&self, offset_index: usize) -> Result<&[(i16, i16)], NcoError> {
        self.tones
            .get(offset_index)
            .map(Vec::as_slice)
            .ok_or(NcoError::IndexOutOfRange { index: offset_index, tones: self.tones.len() })
    }

    /// Multiply one period of samples by the selected tone.
    ///
    /// `samples` must hold exactly one period.
    pub fn correct(
        &self,
        samples: &[Complex64],
        offset_index: usize,
    ) -> Result<Vec<Complex64>, NcoError> {
        assert_eq!(samples.len(), self.period, "input must span one tone period");
        let tone = self.tone(offset_index)?;
        Ok(samples
            .iter()
            .zip(tone)
            .map(|(&s, &(re, im))| {
                s * Complex64::new(f64::from(re) / TONE_SCALE, f64::from(im) / TONE_SCALE)
            })
            .collect())
    }
}
