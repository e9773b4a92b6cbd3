//! Specifications, field files, reports and run orchestration.

pub mod field_file;
pub mod format;
pub mod run;
pub mod spec;

pub use field_file::{read_field, read_field_file, write_field, FieldFile};
pub use format::{fmt_f64, to_json};
pub use run::{exit_code, run, RunOptions, RunSummary, Status};
pub use spec::{load_spec, parse_spec, ProblemSpec, Task};
