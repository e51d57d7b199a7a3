use std::fs::File;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { pos, expected_len, len } => format!(
            "ragged row{}: {len} fields, expected {expected_len}",
            pos.as_ref().map(|p| format!(" at line {}", p.line())).unwrap_or_default()
        ),
        _ => e.to_string(),
    };
    Error::Csv {
        path: path.to_path_buf(),
        message,
    }
}

/// Reads every row as numbers. Returns the header and the row-major values.
fn read_numeric(path: &Path) -> Result<(Vec<String>, Vec<f64>, usize)> {
    let mut reader = open(path)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            message: "empty file (no header row)".into(),
        });
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        for (c, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    row: r + 1,
                    column: header[c].clone(),
                    value: cell.to_string(),
                })?;
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    Ok((header, values, rows))
}

/// Loads a labelled dataset. `target` names the header column holding `y`;
/// all other columns become features, in file order.
pub fn load_csv(path: impl AsRef<Path>, target: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let (header, values, rows) = read_numeric(path)?;
    let cols = header.len();
    let t = header.iter().position(|h| h == target).ok_or_else(|| Error::Csv {
        path: path.to_path_buf(),
        message: format!("no column named `{target}` (columns: {})", header.join(",")),
    })?;
    if cols < 2 {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            message: "need at least one feature column besides the target".into(),
        });
    }
    let mut features = Vec::with_capacity(rows * (cols - 1));
    let mut targets = Vec::with_capacity(rows);
    for row in values.chunks_exact(cols) {
        for (c, &v) in row.iter().enumerate() {
            if c == t {
                targets.push(v);
            } else {
                features.push(v);
            }
        }
    }
    let names = header
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != t)
        .map(|(_, h)| h.clone())
        .collect();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::with_feature_names(name, names, features, targets)
}

/// Loads an unlabelled feature matrix. Returns `(column names, rows)`.
pub fn load_features_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let (header, values, _) = read_numeric(path)?;
    let rows = values.chunks_exact(header.len()).map(<[f64]>::to_vec).collect();
    Ok((header, rows))
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn io_csv(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| csv_err(path, e)
}

/// Writes features followed by the target column `target`. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>, target: &str) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    header.push(target);
    w.write_record(&header).map_err(io_csv(path))?;
    for (i, row) in data.rows().enumerate() {
        let mut record: Vec<String> = row.iter().map(f64::to_string).collect();
        record.push(data.target(i).to_string());
        w.write_record(&record).map_err(io_csv(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a single-column or multi-column table of numbers with a header.
pub fn write_features_csv(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_record(header).map_err(io_csv(path))?;
    for row in rows {
        w.write_record(row.iter().map(f64::to_string)).map_err(io_csv(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_small_file() {
        let f = file("x,y\n0,0\n1,2\n2,4\n");
        let d = load_csv(f.path(), "y").unwrap();
        assert_eq!(d.n_samples(), 3);
        assert_eq!(d.n_features(), 1);
        assert_eq!(d.targets(), &[0.0, 2.0, 4.0]);
    }

    #[test]
    fn target_may_be_any_column() {
        let f = file("y,a,b\n1,2,3\n4,5,6\n");
        let d = load_csv(f.path(), "y").unwrap();
        assert_eq!(d.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.row(1), &[5.0, 6.0]);
        assert_eq!(d.targets(), &[1.0, 4.0]);
    }

    #[test]
    fn reports_bad_cell() {
        let f = file("x,y\n0,0\nabc,2\n");
        let err = load_csv(f.path(), "y").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("abc") && msg.contains("row 2") && msg.contains("`x`"), "{msg}");
    }

    #[test]
    fn rejects_ragged_empty_missing() {
        let f = file("x,y\n0,0\n1\n");
        assert!(load_csv(f.path(), "y").unwrap_err().to_string().contains("ragged"));
        let f = file("");
        assert!(load_csv(f.path(), "y").is_err());
        let f = file("x,y\n");
        assert!(load_csv(f.path(), "y").unwrap_err().to_string().contains("no data rows"));
        let err = load_csv("/definitely/not/here.csv", "y").unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.csv"));
        let f = file("x,y\n1,2\n");
        assert!(load_csv(f.path(), "z").is_err());
    }

    #[test]
    fn wide_file() {
        let p = 1040;
        let mut s: String = (0..p).map(|j| format!("f{j},")).collect();
        s.push_str("y\n");
        for r in 0..3 {
            let row: Vec<String> = (0..=p).map(|j| format!("{}", (r * j) as f64 * 0.5)).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        let f = file(&s);
        let d = load_csv(f.path(), "y").unwrap();
        assert_eq!(d.n_features(), 1040);
        assert_eq!(d.n_samples(), 3);
    }
}
