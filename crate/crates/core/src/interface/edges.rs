use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::write_atomic;

pub const EDGES_HEADER: &str = "# bidfm-edges v1";

/// How node ids map to matrix indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum IdUniverse {
    /// Sources index rows, targets index columns, each side ordered separately.
    #[default]
    Separate,
    /// Directed network read as bipartite: rows and columns share one id list.
    Shared,
    /// Ids are 0-based integers below the given sizes, so isolated nodes keep their slot.
    Indexed { rows: usize, cols: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeListOptions {
    pub delimiter: u8,
    /// Skip the first non-comment record.
    pub header: bool,
    pub universe: IdUniverse,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        EdgeListOptions {
            delimiter: b'\t',
            header: false,
            universe: IdUniverse::Separate,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeListRead {
    pub matrix: Matrix,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub records: usize,
    /// Records whose `(source, target)` pair had already appeared; their weights were summed.
    pub duplicates: usize,
}

pub fn read_edge_list(path: &Path, opts: &EdgeListOptions) -> Result<EdgeListRead> {
    read_edge_list_str(&std::fs::read_to_string(path)?, opts)
}

/// `source<delim>target[<delim>weight]` records; weight defaults to 1.
///
/// A leading `# bidfm-edges v1 rows=R cols=C` line switches a `Separate`
/// universe to `Indexed`.
pub fn read_edge_list_str(text: &str, opts: &EdgeListOptions) -> Result<EdgeListRead> {
    let universe = match (opts.universe, text.lines().next().and_then(declared_shape)) {
        (IdUniverse::Separate, Some((rows, cols))) => IdUniverse::Indexed { rows, cols },
        (u, _) => u,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.header)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut edges: Vec<(String, String, f64, usize)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() < 2 || record.len() > 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 or 3 fields, found {}", record.len()),
            });
        }
        let weight = match record.get(2) {
            None | Some("") => 1.0,
            Some(w) => w.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("bad weight {w:?}"),
            })?,
        };
        if !weight.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("non-finite weight {weight}"),
            });
        }
        edges.push((record[0].to_string(), record[1].to_string(), weight, line));
    }
    if edges.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no edge records".into(),
        });
    }
    let (row_ids, col_ids) = match universe {
        IdUniverse::Separate => (
            sorted_ids(edges.iter().map(|e| e.0.as_str())),
            sorted_ids(edges.iter().map(|e| e.1.as_str())),
        ),
        IdUniverse::Shared => {
            let ids = sorted_ids(edges.iter().flat_map(|e| [e.0.as_str(), e.1.as_str()]));
            (ids.clone(), ids)
        }
        IdUniverse::Indexed { rows, cols } => (
            (0..rows).map(|i| i.to_string()).collect(),
            (0..cols).map(|j| j.to_string()).collect(),
        ),
    };
    let index = |ids: &[String]| -> HashMap<String, usize> {
        ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
    };
    let (ri, ci) = (index(&row_ids), index(&col_ids));
    let mut matrix = Matrix::zeros(row_ids.len(), col_ids.len());
    let mut seen = vec![false; row_ids.len() * col_ids.len()];
    let mut duplicates = 0;
    for (s, t, w, line) in &edges {
        let lookup = |map: &HashMap<String, usize>, id: &str, side: &str| {
            map.get(canonical(id, universe).as_str()).copied().ok_or_else(|| Error::Parse {
                line: *line,
                message: format!("{side} id {id:?} outside the declared index range"),
            })
        };
        let i = lookup(&ri, s, "source")?;
        let j = lookup(&ci, t, "target")?;
        let slot = i * col_ids.len() + j;
        if seen[slot] {
            duplicates += 1;
        }
        seen[slot] = true;
        matrix.row_mut(i)[j] += w;
    }
    Ok(EdgeListRead {
        matrix,
        row_ids,
        col_ids,
        records: edges.len(),
        duplicates,
    })
}

fn canonical(id: &str, universe: IdUniverse) -> String {
    match universe {
        IdUniverse::Indexed { .. } => id.parse::<usize>().map_or_else(|_| id.to_string(), |v| v.to_string()),
        _ => id.to_string(),
    }
}

/// Distinct ids, numerically ordered when every id is an integer.
fn sorted_ids<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<String> {
    let ids: Vec<&str> = ids.collect();
    if ids.iter().all(|s| s.parse::<i64>().is_ok()) {
        let mut set: BTreeMap<i64, &str> = BTreeMap::new();
        for s in ids {
            set.entry(s.parse().unwrap()).or_insert(s);
        }
        set.into_values().map(str::to_string).collect()
    } else {
        let mut v: Vec<String> = ids.into_iter().map(str::to_string).collect();
        v.sort();
        v.dedup();
        v
    }
}

fn declared_shape(line: &str) -> Option<(usize, usize)> {
    let rest = line.trim().strip_prefix(EDGES_HEADER)?;
    let mut rows = None;
    let mut cols = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("rows=") {
            rows = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("cols=") {
            cols = v.parse().ok();
        }
    }
    Some((rows?, cols?))
}

/// Nonzero entries as `row<TAB>col<TAB>weight` with 0-based ids and the shape in the header.
pub fn write_edge_list(path: &Path, m: &Matrix) -> Result<()> {
    let mut out = format!("{EDGES_HEADER} rows={} cols={}\n", m.rows(), m.cols());
    for (i, row) in m.row_iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if w != 0.0 {
                let _ = writeln!(out, "{i}\t{j}\t{w}");
            }
        }
    }
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let r = read_edge_list_str("a\tx\t1\nb\tx\t2\na\tx\t0.5\n", &EdgeListOptions::default()).unwrap();
        assert_eq!(r.matrix, Matrix::from_rows(&[vec![1.5], vec![2.0]]).unwrap());
        assert_eq!((r.records, r.duplicates), (3, 1));
        assert_eq!(r.row_ids, vec!["a", "b"]);
    }

    #[test]
    fn header_and_shared_ids() {
        let opts = EdgeListOptions {
            delimiter: b',',
            header: true,
            universe: IdUniverse::Shared,
        };
        let r = read_edge_list_str("from,to\n10,2\n2,3\n", &opts).unwrap();
        assert_eq!(r.row_ids, vec!["2", "3", "10"]);
        assert_eq!(r.matrix.shape(), (3, 3));
        assert_eq!(r.matrix.row(2)[0], 1.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let opts = EdgeListOptions::default();
        assert!(read_edge_list_str("", &opts).is_err());
        assert!(read_edge_list_str("# only a comment\n", &opts).is_err());
        match read_edge_list_str("a\tb\t1\na\tc\tinf\n", &opts) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match read_edge_list_str("a\tb\t1\nlonely\n", &opts) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn declared_shape_keeps_isolated_nodes() {
        let text = format!("{EDGES_HEADER} rows=3 cols=2\n0\t1\t-2.5\n");
        let r = read_edge_list_str(&text, &EdgeListOptions::default()).unwrap();
        assert_eq!(r.matrix.shape(), (3, 2));
        assert_eq!(r.matrix.row(0)[1], -2.5);
        let bad = format!("{EDGES_HEADER} rows=1 cols=1\n0\t1\n");
        assert!(read_edge_list_str(&bad, &EdgeListOptions::default()).is_err());
    }
}
