use std::fs;
use std::path::Path;

use spinnet::Graph;

use crate::error::{CliError, CliResult};

pub fn read_graph(path: &Path) -> CliResult<Graph> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Graph::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `(x, y)` pairs from two named columns of a CSV file; `#` lines are skipped.
/// Without `y_column` the first column other than `x_column` is used.
pub fn read_series(path: &Path, x_column: &str, y_column: Option<&str>) -> CliResult<Vec<(f64, f64)>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{}: no column `{name}`", path.display())))
    };
    let xi = find(x_column)?;
    let yi = match y_column {
        Some(name) => find(name)?,
        None => (0..headers.len())
            .find(|&i| i != xi)
            .ok_or_else(|| CliError::Config(format!("{}: needs two columns", path.display())))?,
    };
    let mut out = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let parse = |i: usize| -> CliResult<f64> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse().map_err(|_| {
                CliError::Config(format!("{}: row {}: `{raw}` is not a number", path.display(), line + 1))
            })
        };
        if rec.get(yi).is_some_and(|v| v.is_empty()) {
            continue;
        }
        out.push((parse(xi)?, parse(yi)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn reads_named_and_default_columns() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "# comment\nN,best_dn,best_qfi\n1,0.07,108.1\n2,0.1,\n").unwrap();
        let all = read_series(f.path(), "N", None).unwrap();
        assert_eq!(all, vec![(1.0, 0.07), (2.0, 0.1)]);
        let q = read_series(f.path(), "N", Some("best_qfi")).unwrap();
        assert_eq!(q, vec![(1.0, 108.1)]);
        assert!(matches!(read_series(f.path(), "M", None), Err(CliError::Config(_))));
        assert!(matches!(
            read_series(Path::new("/nonexistent/x.csv"), "N", None),
            Err(CliError::Io { .. })
        ));
    }
}
