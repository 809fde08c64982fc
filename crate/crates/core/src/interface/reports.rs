use std::fmt::Write as _;

use crate::experiments::{EigengapEstimate, FilterResult};
use crate::metrics::MetricsReport;

/// Output delimiter for CSV-like reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Tsv,
}

impl ReportFormat {
    /// Rewrites a comma-separated report; comment lines are left alone.
    pub fn apply(self, csv: &str) -> String {
        match self {
            ReportFormat::Csv => csv.to_string(),
            ReportFormat::Tsv => csv
                .lines()
                .map(|l| if l.starts_with('#') { l.to_string() } else { l.replace(',', "\t") })
                .map(|l| l + "\n")
                .collect(),
        }
    }
}

pub fn metrics_csv(report: &MetricsReport) -> String {
    format!(
        "# bidfm-metrics v1\n{}\n{}\n",
        MetricsReport::CSV_HEADER,
        report.to_csv_row()
    )
}

pub fn eigengap_csv(e: &EigengapEstimate) -> String {
    let mut out = format!("# bidfm-estimate-k v1 suggested_k={}\nindex,singular_value,ratio\n", e.k);
    for (i, s) in e.singular_values.iter().enumerate() {
        let ratio = e.ratios.get(i).map_or_else(String::new, f64::to_string);
        let _ = writeln!(out, "{},{s},{ratio}", i + 1);
    }
    out
}

/// Sizes of the zero-degree sets and of what was kept.
pub fn filter_summary_csv(mode: &str, shape: (usize, usize), f: &FilterResult) -> String {
    let mut out = String::from(
        "# bidfm-preprocess v1\nmode,rows,cols,zero_rows,zero_cols,zero_both,zero_either,kept_rows,kept_cols\n",
    );
    let (both, either) = if shape.0 == shape.1 {
        let both = f.zero_rows.iter().filter(|i| f.zero_cols.binary_search(i).is_ok()).count();
        (both.to_string(), (f.zero_rows.len() + f.zero_cols.len() - both).to_string())
    } else {
        ("NA".to_string(), "NA".to_string())
    };
    let _ = writeln!(
        out,
        "{mode},{},{},{},{},{both},{either},{},{}",
        shape.0,
        shape.1,
        f.zero_rows.len(),
        f.zero_cols.len(),
        f.kept_rows.len(),
        f.kept_cols.len()
    );
    out
}

/// One entry per line, resolved through `ids` when given.
pub fn index_list(indices: &[usize], ids: Option<&[String]>) -> String {
    let mut out = String::from("# bidfm-index v1\n");
    for &i in indices {
        match ids {
            Some(ids) => out.push_str(&ids[i]),
            None => out.push_str(&i.to_string()),
        }
        out.push('\n');
    }
    out
}
