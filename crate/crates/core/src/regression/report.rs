use serde::Serialize;

use super::RegressionResult;

fn round3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

/// `estimate` with stars followed by the standard error in parentheses,
/// both rounded to three decimals: `0.733*** (0.024)`.
pub fn format_cell(estimate: f64, std_error: f64, stars: &str) -> String {
    format!("{}{} ({})", round3(estimate), stars, round3(std_error))
}

/// Coefficient table with one column per pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportTable {
    pub columns: Vec<String>,
    /// Row label followed by one cell per column.
    pub rows: Vec<(String, Vec<String>)>,
    #[serde(skip)]
    results: Vec<RegressionResult>,
}

/// Lays results out side by side. Rows follow the order in which coefficients
/// first appear, then adjusted R² and the observation count.
pub fn report_table(results: &[RegressionResult]) -> ReportTable {
    let columns = results.iter().map(|r| format!("{} pair {}", r.commodity, r.pair_index)).collect();
    let mut names: Vec<&str> = Vec::new();
    for r in results {
        for c in &r.coefficients {
            if !names.contains(&c.name.as_str()) {
                names.push(&c.name);
            }
        }
    }
    let mut rows: Vec<(String, Vec<String>)> = names
        .iter()
        .map(|&name| {
            let cells = results
                .iter()
                .map(|r| {
                    r.coefficient(name)
                        .map(|c| format_cell(c.estimate, c.std_error, c.stars))
                        .unwrap_or_default()
                })
                .collect();
            (name.to_string(), cells)
        })
        .collect();
    rows.push(("Adj. R^2".into(), results.iter().map(|r| round3(r.adj_r_squared)).collect()));
    rows.push(("N".into(), results.iter().map(|r| r.n_obs.to_string()).collect()));
    ReportTable { columns, rows, results: results.to_vec() }
}

impl ReportTable {
    /// Aligned plain text.
    pub fn to_text(&self) -> String {
        let label_w = self.rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(8);
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, h)| self.rows.iter().map(|(_, c)| c[j].len()).chain([h.len()]).max().unwrap_or(0))
            .collect();
        let mut out = format!("{:label_w$}", "");
        for (h, w) in self.columns.iter().zip(&widths) {
            out.push_str(&format!("  {h:>w$}"));
        }
        out.push('\n');
        for (label, cells) in &self.rows {
            out.push_str(&format!("{label:label_w$}"));
            for (c, w) in cells.iter().zip(&widths) {
                out.push_str(&format!("  {c:>w$}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("variable").chain(self.columns.iter().map(String::as_str)).collect();
        w.write_record(&header).expect("in-memory write");
        for (label, cells) in &self.rows {
            let record: Vec<&str> = std::iter::once(label.as_str()).chain(cells.iter().map(String::as_str)).collect();
            w.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 cells")
    }

    /// Full-precision results: `{"regressions": [RegressionResult, ...]}`.
    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({ "regressions": self.results });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable results");
        s.push('\n');
        s
    }
}
