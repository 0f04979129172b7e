//! Delimited-text ingestion: a feature table plus one group column with
//! exactly two values.

use std::collections::BTreeSet;
use std::path::Path;

use subpop::{Error, PointSet, Result, TwoSampleData};

/// A parsed input table.
#[derive(Debug, Clone)]
pub struct InputTable {
    /// Column names: from the header row, or "0", "1", ... without one.
    pub columns: Vec<String>,
    /// Raw cells, row-major.
    pub rows: Vec<Vec<String>>,
}

/// The two-sample view of an input table.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub data: TwoSampleData,
    pub control_label: String,
    pub treatment_label: String,
    pub feature_names: Vec<String>,
}

/// Decides whether the first row is a header: a column whose first cell is
/// non-numeric while a later cell in the same column is numeric can only be
/// a header.
fn looks_like_header(rows: &[Vec<String>]) -> bool {
    if rows.len() < 2 {
        return false;
    }
    let ncol = rows[0].len();
    for j in 0..ncol {
        let first_numeric = rows[0][j].trim().parse::<f64>().is_ok();
        if !first_numeric {
            let any_later_numeric = rows[1..]
                .iter()
                .any(|r| r.get(j).is_some_and(|c| c.trim().parse::<f64>().is_ok()));
            if any_later_numeric {
                return true;
            }
        }
    }
    false
}

/// Reads a delimited file. The delimiter defaults to tab when the first line
/// contains one, comma otherwise.
pub fn read_table(path: &Path, delimiter: Option<u8>) -> Result<InputTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_table(&text, delimiter)
}

pub fn parse_table(text: &str, delimiter: Option<u8>) -> Result<InputTable> {
    let delimiter = delimiter.unwrap_or_else(|| {
        match text.lines().next() {
            Some(line) if line.contains('\t') => b'\t',
            _ => b',',
        }
    });
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::InvalidArgument(format!("row {}: {e}", i + 1)))?;
        let row: Vec<String> = record.iter().map(|c| c.trim().to_string()).collect();
        if row.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidArgument("input file has no data rows".into()));
    }
    let ncol = rows[0].len();
    if let Some(bad) = rows.iter().position(|r| r.len() != ncol) {
        return Err(Error::InvalidArgument(format!(
            "row {} has {} fields, expected {ncol}",
            bad + 1,
            rows[bad].len()
        )));
    }

    let (columns, rows) = if looks_like_header(&rows) {
        let header = rows[0].clone();
        (header, rows[1..].to_vec())
    } else {
        ((0..ncol).map(|j| j.to_string()).collect(), rows)
    };
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no data rows after the header".into()));
    }
    Ok(InputTable { columns, rows })
}

impl InputTable {
    fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "no column named '{name}' (available: {})",
                    self.columns.join(", ")
                ))
            })
    }
}

/// Partitions the table rows into the two groups.
///
/// Features default to every numeric column except the group column and any
/// excluded ones. The lexicographically smaller group value is the control
/// group unless `control_override` names the other.
pub fn load_two_sample(
    table: &InputTable,
    group_column: &str,
    feature_columns: Option<&[String]>,
    exclude: &[String],
    control_override: Option<&str>,
) -> Result<LoadedData> {
    let group_idx = table.column_index(group_column)?;

    let feature_idx: Vec<usize> = match feature_columns {
        Some(names) => names
            .iter()
            .map(|n| {
                let idx = table.column_index(n)?;
                if idx == group_idx {
                    return Err(Error::InvalidArgument(format!(
                        "'{n}' is the group column, not a feature"
                    )));
                }
                Ok(idx)
            })
            .collect::<Result<_>>()?,
        None => {
            let excluded: BTreeSet<usize> = exclude
                .iter()
                .map(|n| table.column_index(n))
                .collect::<Result<_>>()?;
            (0..table.columns.len())
                .filter(|&j| j != group_idx && !excluded.contains(&j))
                .filter(|&j| {
                    table
                        .rows
                        .iter()
                        .all(|r| r[j].parse::<f64>().is_ok())
                })
                .collect()
        }
    };
    if feature_idx.is_empty() {
        return Err(Error::InvalidArgument(
            "no usable numeric feature columns".into(),
        ));
    }

    let mut group_values: Vec<String> = table
        .rows
        .iter()
        .map(|r| r[group_idx].clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if group_values.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "group column '{group_column}' must have exactly 2 distinct values, found {}: {}",
            group_values.len(),
            group_values.join(", ")
        )));
    }
    if let Some(control) = control_override {
        if !group_values.iter().any(|v| v == control) {
            return Err(Error::InvalidArgument(format!(
                "requested control group '{control}' not present (values: {})",
                group_values.join(", ")
            )));
        }
        if group_values[0] != control {
            group_values.swap(0, 1);
        }
    }
    let (control_label, treatment_label) = (group_values[0].clone(), group_values[1].clone());

    let mut rows1 = Vec::new();
    let mut rows2 = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let mut features = Vec::with_capacity(feature_idx.len());
        for &j in &feature_idx {
            let v: f64 = row[j].parse().map_err(|_| {
                Error::InvalidArgument(format!(
                    "row {}, column '{}': '{}' is not numeric",
                    i + 1,
                    table.columns[j],
                    row[j]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "row {}, column '{}': non-finite value",
                    i + 1,
                    table.columns[j]
                )));
            }
            features.push(v);
        }
        if row[group_idx] == control_label {
            rows1.push(features);
        } else {
            rows2.push(features);
        }
    }
    if rows1.len() < 2 || rows2.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "each group needs at least 2 rows (got {} '{control_label}', {} '{treatment_label}')",
            rows1.len(),
            rows2.len()
        )));
    }

    let data = TwoSampleData::new(PointSet::from_rows(&rows1)?, PointSet::from_rows(&rows2)?)?;
    Ok(LoadedData {
        data,
        control_label,
        treatment_label,
        feature_names: feature_idx
            .iter()
            .map(|&j| table.columns[j].clone())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_row_file_without_header() {
        let table = parse_table("A,1.0\nA,2.0\nB,3.0\nB,4.0\n", None).unwrap();
        assert_eq!(table.columns, vec!["0", "1"]);
        let loaded = load_two_sample(&table, "0", None, &[], None).unwrap();
        assert_eq!(loaded.data.n1(), 2);
        assert_eq!(loaded.data.n2(), 2);
        assert_eq!(loaded.control_label, "A");
    }

    #[test]
    fn header_and_named_features() {
        let text = "arm,height,weight\nctl,1.0,5.0\nctl,2.0,6.0\ntrt,3.0,7.0\ntrt,4.0,8.0\n";
        let table = parse_table(text, None).unwrap();
        let names = vec!["height".to_string()];
        let loaded = load_two_sample(&table, "arm", Some(&names), &[], None).unwrap();
        assert_eq!(loaded.feature_names, vec!["height"]);
        assert_eq!(loaded.data.dim(), 1);
        assert_eq!(loaded.data.x2.point(0), &[3.0]);
    }

    #[test]
    fn three_group_values_is_an_error_naming_them() {
        let table = parse_table("g,x\na,1\nb,2\nc,3\n", None).unwrap();
        let err = load_two_sample(&table, "g", None, &[], None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("exactly 2"), "{msg}");
        assert!(msg.contains('c'), "{msg}");
    }

    #[test]
    fn non_numeric_feature_is_located() {
        let text = "g,x\na,1.0\na,2.0\nb,oops\nb,4.0\n";
        let table = parse_table(text, None).unwrap();
        let names = vec!["x".to_string()];
        let err = load_two_sample(&table, "g", Some(&names), &[], None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3") && msg.contains("'x'"), "{msg}");
    }

    #[test]
    fn tab_delimiter_is_sniffed() {
        let table = parse_table("g\tx\na\t1.0\na\t2.0\nb\t3.0\nb\t4.0\n", None).unwrap();
        assert_eq!(table.columns, vec!["g", "x"]);
        let loaded = load_two_sample(&table, "g", None, &[], None).unwrap();
        assert_eq!(loaded.data.n1(), 2);
    }

    #[test]
    fn control_override_swaps_groups() {
        let table = parse_table("g,x\na,1.0\na,2.0\nb,3.0\nb,4.0\n", None).unwrap();
        let loaded = load_two_sample(&table, "g", None, &[], Some("b")).unwrap();
        assert_eq!(loaded.control_label, "b");
        assert_eq!(loaded.data.x1.point(0), &[3.0]);
    }

    #[test]
    fn exclude_drops_a_column() {
        let text = "g,x,sex\na,1.0,m\na,2.0,f\nb,3.0,m\nb,4.0,f\n";
        let table = parse_table(text, None).unwrap();
        let loaded =
            load_two_sample(&table, "g", None, &["sex".to_string()], None).unwrap();
        assert_eq!(loaded.feature_names, vec!["x"]);
    }

    #[test]
    fn loaded_values_roundtrip_exactly() {
        let text = "g,x\na,0.1\na,1e-3\nb,2.5000001\nb,-7.25\n";
        let table = parse_table(text, None).unwrap();
        let loaded = load_two_sample(&table, "g", None, &[], None).unwrap();
        for (p, orig) in loaded
            .data
            .x1
            .iter()
            .chain(loaded.data.x2.iter())
            .zip(["0.1", "1e-3", "2.5000001", "-7.25"])
        {
            let reparsed: f64 = format!("{:?}", p[0]).parse().unwrap();
            assert_eq!(reparsed, orig.parse::<f64>().unwrap());
        }
    }
}
