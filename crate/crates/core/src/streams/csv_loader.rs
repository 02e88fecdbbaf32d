use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Instance;
use crate::error::{ObalError, Result};

/// Column layout of a CSV stream. Column indices are zero-based; errors
/// report one-based rows and columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    pub has_header: bool,
    /// Feature columns; `None` means every column except the label column.
    pub feature_columns: Option<Vec<usize>>,
    /// Label column; `None` loads an unlabeled stream.
    pub label_column: Option<usize>,
    /// Maps label tokens to class indices. Without a map, label cells must be
    /// nonnegative integers.
    pub class_map: Option<BTreeMap<String, usize>>,
}

impl CsvSchema {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

pub fn load_csv_stream(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Vec<Instance>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| ObalError::io(path, e))?;
    read_csv_stream(file, schema)
}

pub(crate) fn read_csv_stream<R: std::io::Read>(reader: R, schema: &CsvSchema) -> Result<Vec<Instance>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut out = Vec::new();
    let mut dim = None;
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let columns: Vec<usize> = match &schema.feature_columns {
            Some(cols) => cols.clone(),
            None => (0..record.len()).filter(|c| Some(*c) != schema.label_column).collect(),
        };
        let mut features = Vec::with_capacity(columns.len());
        for &c in &columns {
            let cell = record.get(c).ok_or_else(|| ObalError::CsvParse {
                row,
                column: c + 1,
                message: "missing cell".into(),
            })?;
            let value: f64 = cell.parse().map_err(|_| ObalError::CsvParse {
                row,
                column: c + 1,
                message: format!("non-numeric feature `{cell}`"),
            })?;
            if !value.is_finite() {
                return Err(ObalError::CsvParse {
                    row,
                    column: c + 1,
                    message: format!("non-finite feature `{cell}`"),
                });
            }
            features.push(value);
        }
        match dim {
            None => dim = Some(features.len()),
            Some(d) if d != features.len() => {
                return Err(ObalError::CsvParse {
                    row,
                    column: features.len() + 1,
                    message: format!("expected {d} features"),
                })
            }
            _ => {}
        }
        let label = match schema.label_column {
            None => None,
            Some(c) => {
                let cell = record.get(c).ok_or_else(|| ObalError::CsvParse {
                    row,
                    column: c + 1,
                    message: "missing label".into(),
                })?;
                let label = match &schema.class_map {
                    Some(map) => *map.get(cell).ok_or_else(|| ObalError::CsvParse {
                        row,
                        column: c + 1,
                        message: format!("unknown class token `{cell}`"),
                    })?,
                    None => cell.parse::<usize>().map_err(|_| ObalError::CsvParse {
                        row,
                        column: c + 1,
                        message: format!("unknown class token `{cell}`"),
                    })?,
                };
                Some(label)
            }
        };
        out.push(Instance {
            features,
            label,
            timestamp: i as u64,
        });
    }
    Ok(out)
}
