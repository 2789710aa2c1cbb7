use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Label, PointCloud};
use crate::error::{Error, Result};

fn delimiter(first_line: &str) -> char {
    if first_line.contains(';') {
        ';'
    } else {
        ','
    }
}

/// Number of columns in the first non-empty line.
pub(crate) fn column_count(text: &str) -> usize {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .map_or(0, |l| l.split(delimiter(l)).count())
}

/// Reads one point per row; comma or semicolon separated, detected from the
/// first line. With `label_column` set, that column is parsed as an integer
/// label and excluded from the coordinates.
pub fn load_point_csv(path: impl AsRef<Path>, label_column: Option<usize>) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_point_csv(&text, label_column)
}

pub(crate) fn parse_point_csv(text: &str, label_column: Option<usize>) -> Result<PointCloud> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let Some(&(_, first)) = lines.first() else {
        return Err(Error::EmptyInput("csv file contains no rows".into()));
    };
    let delim = delimiter(first);
    let width = first.split(delim).count();
    if let Some(c) = label_column {
        if c >= width {
            return Err(Error::Bounds(format!(
                "label column {c} but rows have {width} columns"
            )));
        }
        if width < 2 {
            return Err(Error::Shape("label column leaves no coordinates".into()));
        }
    }

    let d = width - usize::from(label_column.is_some());
    let mut values = Vec::with_capacity(lines.len() * d);
    let mut labels = Vec::new();
    for &(row, line) in &lines {
        let cells: Vec<&str> = line.split(delim).map(str::trim).collect();
        if cells.len() != width {
            return Err(Error::Format {
                row,
                msg: format!("expected {width} columns, found {}", cells.len()),
            });
        }
        for (column, cell) in cells.iter().enumerate() {
            if Some(column) == label_column {
                let l = cell.parse::<Label>().map_err(|_| Error::Parse {
                    row,
                    column,
                    cell: cell.to_string(),
                })?;
                labels.push(l);
            } else {
                let v = cell
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row,
                        column,
                        cell: cell.to_string(),
                    })?;
                values.push(v);
            }
        }
    }
    let pc = PointCloud::new(lines.len(), d, values)?;
    if label_column.is_some() {
        pc.with_labels(labels)
    } else {
        Ok(pc)
    }
}

/// Reads integer labels separated by whitespace, commas or semicolons.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<Label>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (row, line) in text.lines().enumerate() {
        let cells = line
            .split(|c: char| c.is_whitespace() || c == ',' || c == ';')
            .filter(|c| !c.is_empty());
        for (column, cell) in cells.enumerate() {
            out.push(cell.parse::<Label>().map_err(|_| Error::Parse {
                row,
                column,
                cell: cell.to_string(),
            })?);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no labels", path.display())));
    }
    Ok(out)
}

/// Writes rows as comma-separated values using the shortest round-trip
/// float representation, appending the label column when present.
pub fn write_point_csv(path: impl AsRef<Path>, pc: &PointCloud) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for i in 0..pc.len() {
        for (c, v) in pc.point(i).iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        if let Some(l) = pc.labels() {
            write!(out, ",{}", l[i]).unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_column_semicolon_file() {
        let pc = parse_point_csv("0;1;3\n", None);
        // A single row with semicolons is three columns.
        assert_eq!(pc.unwrap().dim(), 3);

        let pc = parse_point_csv("0\n1\n3\n", None).unwrap();
        assert_eq!((pc.len(), pc.dim()), (3, 1));
        assert_eq!(pc.values(), &[0.0, 1.0, 3.0]);
    }

    #[test]
    fn label_column_is_split_off() {
        let pc = parse_point_csv("1.0,2.0,5\n", Some(2)).unwrap();
        assert_eq!(pc.point(0), &[1.0, 2.0]);
        assert_eq!(pc.labels().unwrap(), &[5]);
    }

    #[test]
    fn ragged_rows_name_the_row() {
        let err = parse_point_csv("1,2,3\n1,2,3,4\n", None).unwrap_err();
        assert!(matches!(err, Error::Format { row: 1, .. }), "{err}");
    }

    #[test]
    fn bad_cell_reports_position() {
        let err = parse_point_csv("1,2\n3,x\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, column: 1, .. }), "{err}");
        assert!(parse_point_csv("1,inf\n", None).is_err());
    }

    #[test]
    fn empty_file() {
        assert!(matches!(
            parse_point_csv("\n\n", None),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn write_then_load_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let pc = PointCloud::new(2, 2, vec![0.1, 1e-300, -3.25, 1.0 / 3.0])
            .unwrap()
            .with_labels(vec![4, 0])
            .unwrap();
        write_point_csv(&path, &pc).unwrap();
        let back = load_point_csv(&path, Some(2)).unwrap();
        assert_eq!(back, pc);
    }
}
