//! Configuration, persistence and batch task execution.

pub mod config;
pub mod events;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig, Task};
pub use events::{read_binary, read_csv, write_binary, write_csv, EventIoError};
pub use run::{records_to_jsonl, run_task, write_outputs, RecordKind, ResultRecord, RunError, RunOutput};
