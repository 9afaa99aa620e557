//! CSV ingestion and emission.
//!
//! One sample per row, features as decimal floats, optional trailing
//! integer `label` column (1-based). UTF-8, LF line endings. Floats are
//! written in shortest round-trip form, so identical data always produces
//! byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::data::Dataset;
use crate::error::{Error, Result};

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

pub fn write_dataset_csv(path: &Path, data: &Dataset, header: bool) -> Result<()> {
    let mut out = String::new();
    let d = data.d();
    if header {
        for j in 0..d {
            out.push_str(&format!("x{},", j + 1));
        }
        if data.labels().is_some() {
            out.push_str("label");
        } else {
            out.pop();
        }
        out.push('\n');
    }
    for i in 0..data.n() {
        for j in 0..d {
            out.push_str(&format!("{}", data.points()[[i, j]]));
            if j + 1 < d || data.labels().is_some() {
                out.push(',');
            }
        }
        if let Some(labels) = data.labels() {
            out.push_str(&format!("{}", labels[i]));
        }
        out.push('\n');
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// Reads a dataset CSV.
///
/// With `header`, the first row is consumed; a trailing column literally
/// named `label` is then treated as labels regardless of `labeled`. Without
/// a header, `labeled` decides whether the final column holds 1-based
/// integer labels.
pub fn read_dataset_csv(path: &Path, header: bool, labeled: bool) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let mut labeled = labeled;
    if header {
        match lines.next() {
            Some((_, first)) => {
                if first.split(',').next_back().map(str::trim) == Some("label") {
                    labeled = true;
                }
            }
            None => return Err(parse_err(path, 1, "empty file")),
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut width = None;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("expected {w} fields, got {}", fields.len()),
                ))
            }
            _ => {}
        }
        let feature_count = if labeled {
            fields.len().saturating_sub(1)
        } else {
            fields.len()
        };
        if labeled && fields.len() < 2 {
            return Err(parse_err(path, lineno, "labeled row needs >= 2 fields"));
        }
        let mut row = Vec::with_capacity(feature_count);
        for f in &fields[..feature_count] {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad float {f:?}")))?;
            row.push(v);
        }
        if labeled {
            let raw = fields[feature_count];
            let y: usize = raw
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad label {raw:?}")))?;
            if y == 0 {
                return Err(parse_err(path, lineno, "labels are 1-based"));
            }
            labels.push(y);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let (n, d) = (rows.len(), rows[0].len());
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let points = Array2::from_shape_vec((n, d), flat)
        .map_err(|e| parse_err(path, 1, format!("shape error: {e}")))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Dataset::new(points, if labeled { Some(labels) } else { None }, name)
}

pub fn write_labels_csv(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::new();
    for y in labels {
        out.push_str(&format!("{y}\n"));
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// Reads a label vector. Accepts either a single-column file of 1-based
/// integers or a dataset CSV whose final column holds the labels (a lone
/// `label` header row is skipped).
pub fn read_labels_csv(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let last = trimmed.split(',').next_back().map(str::trim).unwrap_or("");
        if lineno == 1 && last.parse::<usize>().is_err() {
            continue; // header row
        }
        let y: usize = last
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad label {last:?}")))?;
        if y == 0 {
            return Err(parse_err(path, lineno, "labels are 1-based"));
        }
        labels.push(y);
    }
    if labels.is_empty() {
        return Err(parse_err(path, 1, "no labels"));
    }
    Ok(labels)
}

/// Writes a model selection curve as `t,lsmi,selected` rows.
pub fn write_curve_csv(path: &Path, rows: &[(usize, f64, bool)]) -> Result<()> {
    let mut out = String::from("t,lsmi,selected\n");
    for (t, lsmi, selected) in rows {
        out.push_str(&format!("{t},{lsmi},{selected}\n"));
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("smic-io-tests");
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn roundtrip_labeled_dataset() {
        let data = Dataset::new(
            array![[0.125, -3.5], [1e-7, 2.0], [4.0, 0.3333333333333333]],
            Some(vec![1, 2, 1]),
            "rt",
        )
        .unwrap();
        for header in [false, true] {
            let path = tmp(&format!("rt-{header}.csv"));
            write_dataset_csv(&path, &data, header).unwrap();
            let back = read_dataset_csv(&path, header, !header).unwrap();
            assert_eq!(back.points(), data.points());
            assert_eq!(back.labels(), data.labels());
        }
    }

    #[test]
    fn header_detects_label_column() {
        let path = tmp("hdr.csv");
        let mut f = fs::File::create(&path).unwrap();
        writeln!(f, "x1,x2,label\n0.5,1.5,2\n-1,0,1").unwrap();
        let data = read_dataset_csv(&path, true, false).unwrap();
        assert_eq!(data.labels(), Some(&[2usize, 1][..]));
        assert_eq!(data.d(), 2);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let path = tmp("bad.csv");
        fs::write(&path, "1.0,2.0\n1.0,oops\n").unwrap();
        match read_dataset_csv(&path, false, false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn labels_file_roundtrip_and_last_column_fallback() {
        let path = tmp("labels.csv");
        write_labels_csv(&path, &[1, 2, 2, 1]).unwrap();
        assert_eq!(read_labels_csv(&path).unwrap(), vec![1, 2, 2, 1]);

        let path = tmp("labels-wide.csv");
        fs::write(&path, "x1,x2,label\n0.0,1.0,2\n1.0,0.0,1\n").unwrap();
        assert_eq!(read_labels_csv(&path).unwrap(), vec![2, 1]);
    }

    #[test]
    fn identical_writes_are_byte_identical() {
        let data = Dataset::new(array![[0.1, 0.2], [0.3, 0.4]], Some(vec![1, 2]), "d").unwrap();
        let p1 = tmp("b1.csv");
        let p2 = tmp("b2.csv");
        write_dataset_csv(&p1, &data, false).unwrap();
        write_dataset_csv(&p2, &data, false).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }
}
