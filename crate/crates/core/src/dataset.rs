//! CSV ingestion: header `group,x,<y1>,…,<yq>`, one observation per row.

use std::io::Read;
use std::path::Path;

use thiserror::Error;

use crate::linalg::Mat;
use crate::model::{GroupSample, ModelError};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad header: {0}")]
    Header(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("need at least 2 groups, found {0}")]
    TooFewGroups(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Grouped responses, groups in order of first appearance.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub response_names: Vec<String>,
    pub groups: Vec<GroupSample>,
}

impl Dataset {
    pub fn q(&self) -> usize {
        self.response_names.len()
    }

    /// `(label, n_r)` per group.
    pub fn group_sizes(&self) -> Vec<(&str, usize)> {
        self.groups.iter().map(|g| (g.label(), g.n())).collect()
    }
}

pub fn ingest(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_reader(file)
}

pub fn from_reader<R: Read>(reader: R) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr
        .headers()
        .map_err(|e| DataError::Header(e.to_string()))?
        .clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(DataError::Header("file is empty".into()));
    }
    if header.len() < 3 {
        return Err(DataError::Header(format!(
            "expected group,x,y1,...,yq but found {} column(s)",
            header.len()
        )));
    }
    if !header[0].eq_ignore_ascii_case("group") || !header[1].eq_ignore_ascii_case("x") {
        return Err(DataError::Header(format!(
            "first two columns must be 'group' and 'x', found '{}' and '{}'",
            &header[0], &header[1]
        )));
    }
    let response_names: Vec<String> = header.iter().skip(2).map(str::to_owned).collect();
    let q = response_names.len();
    let width = q + 2;

    // label -> (x values, row-major y values)
    let mut groups: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for result in rdr.records() {
        let record = result.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            return Err(DataError::Parse {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let label = &record[0];
        if label.is_empty() {
            return Err(DataError::Parse {
                line,
                message: "empty group label".into(),
            });
        }
        let mut values = Vec::with_capacity(q + 1);
        for (k, field) in record.iter().enumerate().skip(1) {
            let v: f64 = field.parse().map_err(|_| DataError::Parse {
                line,
                message: format!("column '{}': '{field}' is not a number", &header[k]),
            })?;
            if !v.is_finite() {
                return Err(DataError::Parse {
                    line,
                    message: format!("column '{}': '{field}' is not finite", &header[k]),
                });
            }
            values.push(v);
        }
        let idx = match groups.iter().position(|(l, _, _)| l == label) {
            Some(i) => i,
            None => {
                groups.push((label.to_owned(), Vec::new(), Vec::new()));
                groups.len() - 1
            }
        };
        let (_, xs, ys) = &mut groups[idx];
        xs.push(values[0]);
        ys.extend_from_slice(&values[1..]);
    }

    if groups.len() < 2 {
        return Err(DataError::TooFewGroups(groups.len()));
    }
    let groups = groups
        .into_iter()
        .map(|(label, x, y)| {
            let n = x.len();
            if n <= q + 2 {
                return Err(ModelError::SampleSize { label, n, q });
            }
            let y = Mat::new(n, q, y).expect("row widths checked above");
            GroupSample::new(label, x, y)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Dataset {
        response_names,
        groups,
    })
}
