use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::membership::Membership;

use super::write_atomic;

pub const LABELS_HEADER: &str = "# bidfm-labels v1";

/// `id<TAB>label` lines with 1-based labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelFile {
    pub ids: Vec<String>,
    pub membership: Membership,
}

/// Writes one line per node. Without `ids` the node's 0-based index is used.
pub fn write_labels(path: &Path, membership: &Membership, ids: Option<&[String]>) -> Result<()> {
    if let Some(ids) = ids {
        if ids.len() != membership.len() {
            return Err(Error::Dimension(format!(
                "{} ids for {} labels",
                ids.len(),
                membership.len()
            )));
        }
    }
    let mut out = format!("{LABELS_HEADER} k={}\n", membership.k());
    for (i, label) in membership.one_based().into_iter().enumerate() {
        match ids {
            Some(ids) => writeln!(out, "{}\t{label}", ids[i]),
            None => writeln!(out, "{i}\t{label}"),
        }
        .expect("writing to a String");
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_labels(path: &Path) -> Result<LabelFile> {
    read_labels_str(&std::fs::read_to_string(path)?)
}

/// Also accepts bare labels, one per line, in which case ids are line indices.
pub fn read_labels_str(text: &str) -> Result<LabelFile> {
    let mut declared_k = None;
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim();
        if let Some(rest) = line.strip_prefix(LABELS_HEADER) {
            declared_k = rest.trim().strip_prefix("k=").and_then(|v| v.parse().ok());
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(['\t', ',', ' ']).filter(|f| !f.is_empty()).collect();
        let (id, label) = match fields[..] {
            [label] => (labels.len().to_string(), label),
            [id, label] => (id.to_string(), label),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `id label`, found {} fields", fields.len()),
                })
            }
        };
        let label: usize = label.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad label {label:?}"),
        })?;
        if label == 0 {
            return Err(Error::Parse {
                line: line_no,
                message: "labels are 1-based".into(),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate id {id:?}"),
            });
        }
        ids.push(id);
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no labels".into(),
        });
    }
    let membership = Membership::from_one_based(&labels, declared_k)?;
    Ok(LabelFile { ids, membership })
}
