//! Command implementations behind the `memaccel` binary.
//!
//! Everything here is std-side plumbing around the `memaccel` core:
//! seeded test channels, table files, the graph description format, and
//! the verify/bench/plan/report runs with their JSON reports.

pub mod channel;
pub mod graph_file;
pub mod numeric;
pub mod report;
pub mod run;
pub mod table_io;
