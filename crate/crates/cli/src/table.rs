//! Column tables and their text forms.
//!
//! CSV: one header row, `,` separators, `.` decimals, values written with 17
//! significant digits so they parse back to the same bits. An empty field
//! means "not defined". The last column is always `status`. Lines starting
//! with `#` are comments.

use serde_json::{json, Map, Value};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<Option<f64>>,
    pub status: String,
}

impl Row {
    pub fn ok(values: Vec<Option<f64>>) -> Self {
        Row {
            values,
            status: "ok".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push_str(",status\n");
        for row in &self.rows {
            for v in &row.values {
                if let Some(v) = v {
                    out.push_str(&format!("{v:.16e}"));
                }
                out.push(',');
            }
            // status values never contain separators
            out.push_str(&row.status.replace([',', '\n'], ";"));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> CliResult<Table> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| CliError::Io("empty CSV input".into()))?;
        let mut columns: Vec<String> = header.split(',').map(str::to_string).collect();
        if columns.pop().as_deref() != Some("status") {
            return Err(CliError::Io("CSV header must end with a status column".into()));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() + 1 {
                return Err(CliError::Io(format!(
                    "CSV row {} has {} fields, expected {}",
                    i + 1,
                    fields.len(),
                    columns.len() + 1
                )));
            }
            let status = fields.pop().unwrap_or_default().to_string();
            let values = fields
                .into_iter()
                .map(|f| {
                    if f.is_empty() {
                        Ok(None)
                    } else {
                        f.parse::<f64>()
                            .map(Some)
                            .map_err(|_| CliError::Io(format!("CSV row {}: '{f}' is not a number", i + 1)))
                    }
                })
                .collect::<CliResult<_>>()?;
            rows.push(Row { values, status });
        }
        Ok(Table { columns, rows })
    }

    /// `{"metadata": ..., "rows": [{column: value, ..., "status": ...}]}`.
    /// Undefined and non-finite values become `null`.
    pub fn to_json(&self, metadata: Value) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, v) in self.columns.iter().zip(&row.values) {
                    obj.insert(name.clone(), v.map_or(Value::Null, |v| json!(v)));
                }
                obj.insert("status".into(), json!(row.status));
                Value::Object(obj)
            })
            .collect();
        json!({ "metadata": metadata, "rows": rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["E", "T2"]);
        t.rows.push(Row::ok(vec![Some(0.5), None]));
        t.rows.push(Row {
            values: vec![Some(1.0), Some(0.25)],
            status: "failed, badly".into(),
        });
        let csv = t.to_csv();
        assert_eq!(
            csv,
            "E,T2,status\n5.0000000000000000e-1,,ok\n1.0000000000000000e0,2.5000000000000000e-1,failed; badly\n"
        );
        let back = Table::from_csv(&csv).unwrap();
        assert_eq!(back.rows[0], t.rows[0]);
        assert_eq!(back.rows[1].status, "failed; badly");
    }

    #[test]
    fn malformed_csv() {
        assert!(Table::from_csv("").is_err());
        assert!(Table::from_csv("E,T2\n1,2\n").is_err());
        assert!(Table::from_csv("E,status\n1,2,ok\n").is_err());
        assert!(Table::from_csv("E,status\nx,ok\n").is_err());
    }

    #[test]
    fn json_nulls() {
        let mut t = Table::new(&["E", "T2"]);
        t.rows.push(Row::ok(vec![Some(0.5), None]));
        let v = t.to_json(json!({"k": 1}));
        assert_eq!(v["rows"][0]["E"], json!(0.5));
        assert!(v["rows"][0]["T2"].is_null());
        assert_eq!(v["metadata"]["k"], json!(1));
    }
}
