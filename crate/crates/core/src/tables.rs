//! Precomputed lookup tables and their on-disk image.
//!
//! A table is filled by sweeping a computation-only oracle over its whole
//! key space, so by construction every entry equals what the computed path
//! would have produced. Two concrete tables back the accelerated decoder:
//!
//! * [`AcsTable`] answers add-compare-select for four states at once. The
//!   22-bit key packs a butterfly group id, the received dibit and the
//!   four predecessor metrics; at four value bytes per entry the table
//!   occupies exactly 16 MiB.
//! * [`MinSelectTable`] answers min/argmin over four packed metrics and is
//!   used as a 16-to-4-to-1 tournament to pick the likeliest of 64 states
//!   in 21 look-ups.
//!
//! Keys place the metric nibbles in the low bits, so patterns that differ
//! only in their metrics sit in adjacent entries: information used close
//! together in time stays close together in memory.
//!
//! The serialized image is little-endian: magic `MATB`, a u16 format
//! version, key bits, value bytes, a 32-byte digest binding the table to
//! its code and metric quantization, then the raw payload. The digest is
//! what stops a stale table from being wired to a mismatched decoder.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest, Sha256};

use crate::trellis::CodeSpec;
use crate::viterbi::{acs_group, METRIC_MAX};

pub const TABLE_MAGIC: [u8; 4] = *b"MATB";
pub const TABLE_FORMAT_VERSION: u16 = 1;
/// Serialized header size in bytes.
pub const TABLE_HEADER_BYTES: usize = 4 + 2 + 1 + 1 + 32;

/// Key and value geometry of a lookup table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableSpec {
    pub key_bits: u8,
    pub value_bytes: u8,
}

impl TableSpec {
    pub const fn new(key_bits: u8, value_bytes: u8) -> Self {
        TableSpec { key_bits, value_bytes }
    }

    pub fn entry_count(&self) -> u64 {
        1u64 << self.key_bits
    }

    /// Total payload footprint in bytes.
    pub fn total_bytes(&self) -> u64 {
        self.entry_count() * u64::from(self.value_bytes)
    }
}

/// Table construction and deserialization failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableError {
    /// The table would not fit the configured memory budget.
    BudgetExceeded { required: u64, budget: u64 },
    /// Bad magic or unsupported format version.
    FormatMismatch,
    /// Serialized image shorter than its header promises.
    TruncatedFile { expected: usize, actual: usize },
    /// Table was built for a different code or quantization.
    SpecDigestMismatch,
    /// Table layout requires a 64-state code.
    UnsupportedCode,
    /// Key width or value width outside what the format can carry.
    UnsupportedSpec,
}

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableError::BudgetExceeded { required, budget } => {
                write!(f, "table needs {required} bytes but the budget is {budget}")
            }
            TableError::FormatMismatch => write!(f, "not a valid table image"),
            TableError::TruncatedFile { expected, actual } => {
                write!(f, "truncated table image: expected {expected} bytes, got {actual}")
            }
            TableError::SpecDigestMismatch => {
                write!(f, "table digest does not match the decoder's code and quantization")
            }
            TableError::UnsupportedCode => write!(f, "table layout requires a 64-state code"),
            TableError::UnsupportedSpec => write!(f, "unsupported table geometry"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TableError {}

/// Which table a digest binds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Acs,
    MinSelect,
}

/// Digest binding a table to the code and metric quantization it was
/// built for.
pub fn table_digest(code: &CodeSpec, kind: TableKind) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"MATB-SPEC-V1");
    hasher.update([match kind {
        TableKind::Acs => 1u8,
        TableKind::MinSelect => 2u8,
    }]);
    hasher.update(code.constraint_length().to_le_bytes());
    let [g0, g1] = code.generators();
    hasher.update(g0.to_le_bytes());
    hasher.update(g1.to_le_bytes());
    hasher.update(code.rate_inverse().to_le_bytes());
    hasher.update([METRIC_MAX]);
    hasher.finalize().into()
}

/// A filled input-to-output map with its geometry and binding digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupTable {
    spec: TableSpec,
    digest: [u8; 32],
    payload: Vec<u8>,
}

impl LookupTable {
    /// Fill a table by evaluating `oracle` over the entire key space.
    ///
    /// Entries are written in ascending key order with little-endian
    /// values, so the payload is byte-identical across builds no matter
    /// how the oracle is scheduled.
    pub fn build<F>(
        spec: TableSpec,
        digest: [u8; 32],
        budget_bytes: u64,
        oracle: F,
    ) -> Result<Self, TableError>
    where
        F: Fn(u64) -> u64,
    {
        if spec.key_bits >= 48 || spec.value_bytes == 0 || spec.value_bytes > 8 {
            return Err(TableError::UnsupportedSpec);
        }
        let required = spec.total_bytes();
        if required > budget_bytes {
            return Err(TableError::BudgetExceeded { required, budget: budget_bytes });
        }
        let width = usize::from(spec.value_bytes);
        let mut payload = vec![0u8; required as usize];
        for key in 0..spec.entry_count() {
            let value = oracle(key).to_le_bytes();
            let at = key as usize * width;
            payload[at..at + width].copy_from_slice(&value[..width]);
        }
        Ok(LookupTable { spec, digest, payload })
    }

    pub fn spec(&self) -> TableSpec {
        self.spec
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Read the value stored for `key`.
    #[inline]
    pub fn get(&self, key: u64) -> u64 {
        let width = usize::from(self.spec.value_bytes);
        let at = key as usize * width;
        let mut raw = [0u8; 8];
        raw[..width].copy_from_slice(&self.payload[at..at + width]);
        u64::from_le_bytes(raw)
    }

    /// Serialize to the versioned little-endian image.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(TABLE_HEADER_BYTES + self.payload.len());
        out.extend_from_slice(&TABLE_MAGIC);
        out.extend_from_slice(&TABLE_FORMAT_VERSION.to_le_bytes());
        out.push(self.spec.key_bits);
        out.push(self.spec.value_bytes);
        out.extend_from_slice(&self.digest);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parse a serialized image, validating magic, version and length.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TableError> {
        if bytes.len() < TABLE_HEADER_BYTES {
            return Err(TableError::TruncatedFile {
                expected: TABLE_HEADER_BYTES,
                actual: bytes.len(),
            });
        }
        if bytes[0..4] != TABLE_MAGIC {
            return Err(TableError::FormatMismatch);
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != TABLE_FORMAT_VERSION {
            return Err(TableError::FormatMismatch);
        }
        let spec = TableSpec::new(bytes[6], bytes[7]);
        if spec.key_bits >= 48 || spec.value_bytes == 0 || spec.value_bytes > 8 {
            return Err(TableError::UnsupportedSpec);
        }
        let mut digest = [0u8; 32];
        digest.copy_from_slice(&bytes[8..40]);
        let expected = TABLE_HEADER_BYTES + spec.total_bytes() as usize;
        if bytes.len() < expected {
            return Err(TableError::TruncatedFile { expected, actual: bytes.len() });
        }
        if bytes.len() > expected {
            return Err(TableError::FormatMismatch);
        }
        Ok(LookupTable {
            spec,
            digest,
            payload: bytes[TABLE_HEADER_BYTES..].to_vec(),
        })
    }
}

/// Add-compare-select for a whole butterfly group in one read.
///
/// Key layout, low bits first: 16 metric bits (predecessor slots
/// `[2j, 2j+32, 2j+1, 2j+33]`, one nibble each), 2 dibit bits, 4 group
/// bits. Value layout: 16 new-metric bits for states `4j..4j+3`, then 4
/// decision bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcsTable {
    table: LookupTable,
}

pub const ACS_KEY_BITS: u8 = 22;
pub const ACS_VALUE_BYTES: u8 = 4;

impl AcsTable {
    pub const SPEC: TableSpec = TableSpec::new(ACS_KEY_BITS, ACS_VALUE_BYTES);

    /// Compose a key; packing is one shift-or per field.
    #[inline]
    pub fn key(group: u8, dibit: u8, packed_metrics: u16) -> u64 {
        (u64::from(group) << 18) | (u64::from(dibit) << 16) | u64::from(packed_metrics)
    }

    /// Split a key back into (group, dibit, packed metrics).
    #[inline]
    pub fn split_key(key: u64) -> (u8, u8, u16) {
        ((key >> 18) as u8, ((key >> 16) & 0b11) as u8, (key & 0xFFFF) as u16)
    }

    /// Fill the table from the computation-only group oracle.
    pub fn build(code: &CodeSpec, budget_bytes: u64) -> Result<Self, TableError> {
        if code.num_states() != 64 {
            return Err(TableError::UnsupportedCode);
        }
        let digest = table_digest(code, TableKind::Acs);
        let table = LookupTable::build(Self::SPEC, digest, budget_bytes, |key| {
            let (group, dibit, metrics) = Self::split_key(key);
            let (new_metrics, decisions) = acs_group(code, group, dibit, metrics);
            u64::from(new_metrics) | (u64::from(decisions) << 16)
        })?;
        Ok(AcsTable { table })
    }

    /// Wrap a deserialized table, verifying geometry and digest.
    pub fn from_table(code: &CodeSpec, table: LookupTable) -> Result<Self, TableError> {
        if table.spec() != Self::SPEC {
            return Err(TableError::FormatMismatch);
        }
        if table.digest() != &table_digest(code, TableKind::Acs) {
            return Err(TableError::SpecDigestMismatch);
        }
        Ok(AcsTable { table })
    }

    /// One indexed read: four new metrics and four decision bits.
    #[inline]
    pub fn lookup(&self, group: u8, dibit: u8, packed_metrics: u16) -> (u16, u8) {
        let value = self.table.get(Self::key(group, dibit, packed_metrics));
        ((value & 0xFFFF) as u16, ((value >> 16) & 0xF) as u8)
    }

    pub fn as_table(&self) -> &LookupTable {
        &self.table
    }

    pub fn into_table(self) -> LookupTable {
        self.table
    }
}

/// Min and first-wins argmin over four packed 4-bit metrics.
///
/// Value layout: argmin in bits 0..2, minimum in bits 2..6.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinSelectTable {
    table: LookupTable,
}

pub const MIN_SELECT_KEY_BITS: u8 = 16;
pub const MIN_SELECT_VALUE_BYTES: u8 = 1;

impl MinSelectTable {
    pub const SPEC: TableSpec = TableSpec::new(MIN_SELECT_KEY_BITS, MIN_SELECT_VALUE_BYTES);

    /// Pack four metrics, slot 0 in the low nibble.
    #[inline]
    pub fn key(metrics: [u8; 4]) -> u16 {
        u16::from(metrics[0])
            | (u16::from(metrics[1]) << 4)
            | (u16::from(metrics[2]) << 8)
            | (u16::from(metrics[3]) << 12)
    }

    /// Fill the table from a linear first-wins scan.
    pub fn build(code: &CodeSpec, budget_bytes: u64) -> Result<Self, TableError> {
        let digest = table_digest(code, TableKind::MinSelect);
        let table = LookupTable::build(Self::SPEC, digest, budget_bytes, |key| {
            let mut arg = 0u64;
            let mut min = 0xFu64;
            for slot in 0..4u64 {
                let v = (key >> (4 * slot)) & 0xF;
                if v < min {
                    min = v;
                    arg = slot;
                }
            }
            arg | (min << 2)
        })?;
        Ok(MinSelectTable { table })
    }

    /// Wrap a deserialized table, verifying geometry and digest.
    pub fn from_table(code: &CodeSpec, table: LookupTable) -> Result<Self, TableError> {
        if table.spec() != Self::SPEC {
            return Err(TableError::FormatMismatch);
        }
        if table.digest() != &table_digest(code, TableKind::MinSelect) {
            return Err(TableError::SpecDigestMismatch);
        }
        Ok(MinSelectTable { table })
    }

    /// One indexed read: (argmin, min).
    #[inline]
    pub fn lookup(&self, packed_metrics: u16) -> (u8, u8) {
        let value = self.table.get(u64::from(packed_metrics));
        ((value & 0b11) as u8, ((value >> 2) & 0xF) as u8)
    }

    pub fn as_table(&self) -> &LookupTable {
        &self.table
    }

    pub fn into_table(self) -> LookupTable {
        self.table
    }
}
