//! Dataset loading, validation and standardization.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::varset::MAX_PREDICTORS;

/// How the response column is designated when loading a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseColumn {
    Name(String),
    /// 0-based column index.
    Index(usize),
    Last,
}

impl From<&str> for ResponseColumn {
    /// A bare integer is read as a 0-based index, anything else as a name.
    fn from(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ResponseColumn::Index(i),
            Err(_) => ResponseColumn::Name(s.to_string()),
        }
    }
}

/// Location and scale applied to one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub mean: f64,
    pub scale: f64,
    /// Zero-variance column; left untouched by standardization.
    pub constant: bool,
}

/// Metadata recorded by [`Dataset::standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    /// Divisor used for the variance, `n - 1`.
    pub divisor: String,
    pub predictors: Vec<ColumnScale>,
    pub response: ColumnScale,
}

impl Standardization {
    pub fn constant_predictors(&self) -> Vec<usize> {
        self.predictors
            .iter()
            .enumerate()
            .filter(|(_, c)| c.constant)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Regression data: `n` rows of `p` explanatory values plus a response.
///
/// Columns are stored contiguously (`columns[j][i]` is `x_ij`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    response: Vec<f64>,
    /// `p + 1` labels; the response label is last.
    names: Vec<String>,
    standardization: Option<Standardization>,
}

impl Dataset {
    /// Build a dataset from predictor columns and a response vector.
    pub fn from_columns(columns: Vec<Vec<f64>>, response: Vec<f64>) -> Result<Self> {
        let names = (0..columns.len())
            .map(|j| format!("x{}", j + 1))
            .chain(std::iter::once("y".to_string()))
            .collect();
        Self::with_names(columns, response, names)
    }

    pub fn with_names(columns: Vec<Vec<f64>>, response: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let n = response.len();
        if n < 2 {
            return Err(Error::TooFewRows(n));
        }
        if columns.is_empty() {
            return Err(Error::NoPredictors);
        }
        if columns.len() > MAX_PREDICTORS {
            return Err(Error::TooManyPredictors {
                found: columns.len(),
                max: MAX_PREDICTORS,
            });
        }
        if names.len() != columns.len() + 1 {
            return Err(Error::Config(format!(
                "expected {} names, got {}",
                columns.len() + 1,
                names.len()
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::RaggedRow {
                    row: j + 1,
                    found: col.len(),
                    expected: n,
                });
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonNumeric {
                    row: i + 1,
                    column: j + 1,
                    name: names[j].clone(),
                    value: col[i].to_string(),
                });
            }
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonNumeric {
                row: i + 1,
                column: columns.len() + 1,
                name: names[columns.len()].clone(),
                value: response[i].to_string(),
            });
        }
        Ok(Dataset {
            columns,
            response,
            names,
            standardization: None,
        })
    }

    /// Row-major constructor, convenient in tests and examples.
    pub fn from_rows(rows: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::with_capacity(rows.len()); p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    found: row.len(),
                    expected: p,
                });
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        if rows.len() != response.len() {
            return Err(Error::RaggedRow {
                row: rows.len(),
                found: response.len(),
                expected: rows.len(),
            });
        }
        Self::from_columns(columns, response)
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn predictor_name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn response_name(&self) -> &str {
        &self.names[self.p()]
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    /// Center every column and divide by its sample standard deviation
    /// (divisor `n - 1`). Constant predictor columns are left as they are and
    /// flagged in the returned metadata.
    pub fn standardize(&self) -> Result<Dataset> {
        if self.standardization.is_some() {
            return Err(Error::AlreadyStandardized);
        }
        let response = column_scale(&self.response);
        if response.constant {
            return Err(Error::ConstantResponse);
        }
        let predictors: Vec<ColumnScale> = self.columns.iter().map(|c| column_scale(c)).collect();
        let columns = self
            .columns
            .iter()
            .zip(&predictors)
            .map(|(c, s)| apply_scale(c, s))
            .collect();
        Ok(Dataset {
            columns,
            response: apply_scale(&self.response, &response),
            names: self.names.clone(),
            standardization: Some(Standardization {
                divisor: "n-1".to_string(),
                predictors,
                response,
            }),
        })
    }

    /// Invert [`Dataset::standardize`]. A raw dataset is returned unchanged.
    pub fn unstandardize(&self) -> Dataset {
        let Some(meta) = &self.standardization else {
            return self.clone();
        };
        let undo = |c: &[f64], s: &ColumnScale| -> Vec<f64> {
            if s.constant {
                c.to_vec()
            } else {
                c.iter().map(|v| v * s.scale + s.mean).collect()
            }
        };
        Dataset {
            columns: self
                .columns
                .iter()
                .zip(&meta.predictors)
                .map(|(c, s)| undo(c, s))
                .collect(),
            response: undo(&self.response, &meta.response),
            names: self.names.clone(),
            standardization: None,
        }
    }

    /// Write as CSV with the predictors first and the response last.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.names)?;
        for i in 0..self.n() {
            let row = self.columns.iter().map(|c| c[i]).chain([self.response[i]]);
            w.write_record(row.map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

fn column_scale(values: &[f64]) -> ColumnScale {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1.0)).sqrt();
    let constant = sd <= 1e-12 * mean.abs() + 1e-300;
    ColumnScale {
        mean,
        scale: if constant { 1.0 } else { sd },
        constant,
    }
}

fn apply_scale(values: &[f64], s: &ColumnScale) -> Vec<f64> {
    if s.constant {
        values.to_vec()
    } else {
        values.iter().map(|v| (v - s.mean) / s.scale).collect()
    }
}

/// Read a comma-separated file with one header row.
///
/// The response column is removed from the predictors; the remaining column
/// order is preserved.
pub fn load_csv(path: impl AsRef<Path>, response: &ResponseColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, response)
}

/// Like [`load_csv`] but from any reader.
pub fn read_csv<R: std::io::Read>(reader: R, response: &ResponseColumn) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let width = header.len();
    let target = match response {
        ResponseColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingResponse(name.clone()))?,
        ResponseColumn::Index(i) if *i < width => *i,
        ResponseColumn::Index(i) => return Err(Error::MissingResponse(i.to_string())),
        ResponseColumn::Last if width > 0 => width - 1,
        ResponseColumn::Last => return Err(Error::MissingResponse("<last>".into())),
    };

    let mut raw: Vec<Vec<f64>> = vec![Vec::new(); width];
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != width {
            return Err(Error::RaggedRow {
                row,
                found: record.len(),
                expected: width,
            });
        }
        for (c, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => raw[c].push(v),
                _ => {
                    return Err(Error::NonNumeric {
                        row,
                        column: c + 1,
                        name: header[c].clone(),
                        value: field.to_string(),
                    })
                }
            }
        }
    }
    let n = raw[target].len();
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    let y = raw.remove(target);
    let mut names = header;
    let y_name = names.remove(target);
    names.push(y_name);
    Dataset::with_names(raw, y, names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, response: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), &ResponseColumn::from(response))
    }

    #[test]
    fn loads_small_file() {
        let d = parse("a,b,y\n1,2,3\n4,5,6\n7,8,10\n", "y").unwrap();
        assert_eq!((d.n(), d.p()), (3, 2));
        assert_eq!(d.column(1), &[2.0, 5.0, 8.0]);
        assert_eq!(d.response(), &[3.0, 6.0, 10.0]);
        assert_eq!(d.names(), &["a", "b", "y"]);
    }

    #[test]
    fn response_in_the_middle_keeps_order() {
        let d = parse("a,y,b\n1,2,3\n4,5,6\n", "y").unwrap();
        assert_eq!(d.names(), &["a", "b", "y"]);
        assert_eq!(d.column(1), &[3.0, 6.0]);
        let by_index = parse("a,y,b\n1,2,3\n4,5,6\n", "1").unwrap();
        assert_eq!(by_index, d);
    }

    #[test]
    fn nan_cell_names_row_and_column() {
        let err = parse("a,b,y\n1,2,3\n4,NaN,6\n", "y").unwrap_err();
        match err {
            Error::NonNumeric {
                row, column, ref name, ..
            } => {
                assert_eq!((row, column), (2, 2));
                assert_eq!(name, "b");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("row 2, column 2"));
    }

    #[test]
    fn non_numeric_and_structural_errors() {
        assert!(matches!(parse("a,y\n1,x\n2,3\n", "y"), Err(Error::NonNumeric { .. })));
        assert!(matches!(parse("a,y\n1,2\n", "y"), Err(Error::TooFewRows(1))));
        assert!(matches!(parse("a,y\n1,2\n3,4\n", "z"), Err(Error::MissingResponse(_))));
        assert!(matches!(parse("a,y\n1,2\n3\n", "y"), Err(Error::RaggedRow { .. })));
        assert!(matches!(parse("y\n1\n2\n", "y"), Err(Error::NoPredictors)));
    }

    #[test]
    fn missing_file() {
        let err = load_csv("/definitely/not/here.csv", &ResponseColumn::Last).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn standardize_simple_column() {
        let d = Dataset::from_columns(vec![vec![1.0, 2.0, 3.0]], vec![3.0, 1.0, 2.0]).unwrap();
        let s = d.standardize().unwrap();
        assert_eq!(s.column(0), &[-1.0, 0.0, 1.0]);
        let meta = s.standardization().unwrap();
        assert_eq!(meta.predictors[0].mean, 2.0);
        assert_eq!(meta.predictors[0].scale, 1.0);
        assert!(matches!(s.standardize(), Err(Error::AlreadyStandardized)));
    }

    #[test]
    fn constant_column_flagged_and_untouched() {
        let d = Dataset::from_columns(vec![vec![5.0, 5.0, 5.0], vec![1.0, 0.0, 2.0]], vec![1.0, 2.0, 4.0]).unwrap();
        let s = d.standardize().unwrap();
        assert_eq!(s.column(0), &[5.0, 5.0, 5.0]);
        assert_eq!(s.standardization().unwrap().constant_predictors(), vec![0]);
    }

    #[test]
    fn constant_response_rejected() {
        let d = Dataset::from_columns(vec![vec![1.0, 2.0, 3.0]], vec![7.0, 7.0, 7.0]).unwrap();
        assert!(matches!(d.standardize(), Err(Error::ConstantResponse)));
    }

    #[test]
    fn standardized_moments() {
        let d = crate::synth::SynthSpec::new(20, 4).seed(11).generate();
        let s = d.standardize().unwrap();
        let n = s.n() as f64;
        for col in s.columns().iter().map(Vec::as_slice).chain([s.response()]) {
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!(mean.abs() <= 1e-10);
            assert!((var.sqrt() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = crate::synth::SynthSpec::new(12, 3).seed(8).generate();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(read_csv(&buf[..], &ResponseColumn::Last).unwrap(), d);
    }

    #[test]
    fn unstandardize_round_trip() {
        let d = crate::synth::SynthSpec::new(20, 4).seed(3).generate();
        let back = d.standardize().unwrap().unstandardize();
        for (a, b) in d.columns().iter().flatten().zip(back.columns().iter().flatten()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        for (a, b) in d.response().iter().zip(back.response()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
