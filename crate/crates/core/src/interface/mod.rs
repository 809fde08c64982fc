//! File formats and atomic output.
//!
//! Every format written here starts with a `# bidfm-<kind> v1` comment line.

mod edges;
mod labels;
mod reports;
mod text;

pub use edges::{read_edge_list, read_edge_list_str, write_edge_list, EdgeListOptions, EdgeListRead, IdUniverse};
pub use reports::{eigengap_csv, filter_summary_csv, index_list, metrics_csv, ReportFormat};
pub use labels::{read_labels, read_labels_str, write_labels, LabelFile};
pub use text::{matrix_from_str, matrix_to_string, read_matrix, write_matrix};

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Writes `contents` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
