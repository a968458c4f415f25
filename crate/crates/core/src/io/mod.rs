//! LIBSVM ingestion, instance JSON files and trace CSV serialization.

mod instance;
mod libsvm;
mod trace;

pub use instance::InstanceFile;
pub use libsvm::{load_libsvm, parse_libsvm, LibsvmData, LibsvmDataset, LibsvmRecord};
pub use trace::{format_float, read_trace, write_current_series, write_trace, TRACE_HEADER};
