//! Table files on disk.

use std::fs;
use std::io;
use std::path::Path;

use memaccel::tables::{AcsTable, LookupTable, MinSelectTable, TableError};
use memaccel::trellis::CodeSpec;

pub const ACS_FILE_NAME: &str = "acs.matb";
pub const MIN_SELECT_FILE_NAME: &str = "minsel.matb";

#[derive(Debug)]
pub enum TableIoError {
    Io(io::Error),
    Format(TableError),
}

impl std::fmt::Display for TableIoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TableIoError::Io(e) => write!(f, "table file i/o: {e}"),
            TableIoError::Format(e) => write!(f, "table file: {e}"),
        }
    }
}

impl std::error::Error for TableIoError {}

impl From<io::Error> for TableIoError {
    fn from(e: io::Error) -> Self {
        TableIoError::Io(e)
    }
}

impl From<TableError> for TableIoError {
    fn from(e: TableError) -> Self {
        TableIoError::Format(e)
    }
}

pub fn save_table(table: &LookupTable, path: &Path) -> io::Result<()> {
    fs::write(path, table.to_bytes())
}

pub fn load_table(path: &Path) -> Result<LookupTable, TableIoError> {
    Ok(LookupTable::from_bytes(&fs::read(path)?)?)
}

/// Write both decoder tables into `dir`.
pub fn save_decoder_tables(
    dir: &Path,
    acs: &AcsTable,
    min_select: &MinSelectTable,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    save_table(acs.as_table(), &dir.join(ACS_FILE_NAME))?;
    save_table(min_select.as_table(), &dir.join(MIN_SELECT_FILE_NAME))
}

/// Load both decoder tables from `dir`, digest-checked against `code`.
pub fn load_decoder_tables(
    code: &CodeSpec,
    dir: &Path,
) -> Result<(AcsTable, MinSelectTable), TableIoError> {
    let acs = AcsTable::from_table(code, load_table(&dir.join(ACS_FILE_NAME))?)?;
    let min_select =
        MinSelectTable::from_table(code, load_table(&dir.join(MIN_SELECT_FILE_NAME))?)?;
    Ok((acs, min_select))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip_is_byte_identical() {
        let code = CodeSpec::dvbt();
        let dir = tempfile::tempdir().unwrap();
        let min_select = MinSelectTable::build(&code, 1 << 20).unwrap();
        let path = dir.path().join(MIN_SELECT_FILE_NAME);
        save_table(min_select.as_table(), &path).unwrap();
        let raw = std::fs::read(&path).unwrap();
        assert_eq!(raw, min_select.as_table().to_bytes());
        let loaded = load_table(&path).unwrap();
        assert_eq!(&loaded, min_select.as_table());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_table(&dir.path().join("absent.matb")),
            Err(TableIoError::Io(_))
        ));
    }
}
