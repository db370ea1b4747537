//! Seeded test channel and bit plumbing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic random bit source.
pub fn random_bits(count: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0..2u8)).collect()
}

/// Binary symmetric channel: flip each bit independently with
/// probability `p`, driven by its own seeded generator.
pub fn bsc(bits: &[u8], p: f64, seed: u64) -> Vec<u8> {
    assert!((0.0..=1.0).contains(&p), "crossover probability out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    bits.iter().map(|&b| if rng.random::<f64>() < p { b ^ 1 } else { b }).collect()
}

/// Serialize dibits to a bit stream, high (first-generator) bit first.
pub fn dibits_to_bits(dibits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(dibits.len() * 2);
    for &d in dibits {
        out.push((d >> 1) & 1);
        out.push(d & 1);
    }
    out
}

/// Pack a bit stream back into dibits; length must be even.
pub fn bits_to_dibits(bits: &[u8]) -> Vec<u8> {
    assert!(bits.len().is_multiple_of(2), "dibit stream needs an even bit count");
    bits.chunks_exact(2).map(|pair| (pair[0] << 1) | pair[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_zero_is_identity_and_p_one_flips_all() {
        let bits = random_bits(4096, 11);
        assert_eq!(bsc(&bits, 0.0, 5), bits);
        let flipped = bsc(&bits, 1.0, 5);
        assert!(bits.iter().zip(&flipped).all(|(&a, &b)| a != b));
    }

    #[test]
    fn flip_fraction_tracks_p() {
        // Binomial 5-sigma window around p = 0.1 over 1e6 bits.
        let n = 1_000_000;
        let bits = vec![0u8; n];
        let flipped = bsc(&bits, 0.1, 42);
        let count = flipped.iter().filter(|&&b| b == 1).count() as f64;
        let fraction = count / n as f64;
        assert!((fraction - 0.1).abs() < 0.0015, "fraction {fraction} too far from 0.1");
    }

    #[test]
    fn same_seed_same_noise() {
        let bits = random_bits(1000, 3);
        assert_eq!(bsc(&bits, 0.3, 9), bsc(&bits, 0.3, 9));
    }

    #[test]
    fn dibit_bit_round_trip() {
        let dibits: Vec<u8> = (0..64).map(|i| (i % 4) as u8).collect();
        assert_eq!(bits_to_dibits(&dibits_to_bits(&dibits)), dibits);
    }
}
