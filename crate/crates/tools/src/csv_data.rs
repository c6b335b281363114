//! Tabular datasets: a `label,f0,f1,…` header followed by one sample per row.

use std::path::Path;

use crate::dataset::DatasetHandle;
use crate::error::{Result, ToolError};

fn csv_error(path: &Path, line: u64, message: impl Into<String>) -> ToolError {
    ToolError::Csv {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Loads a flat feature table. Features are kept as written; no rescaling.
pub fn load_csv_dataset(path: &Path, num_classes: usize) -> Result<DatasetHandle> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| ToolError::csv(path, e))?;
    let header = reader
        .headers()
        .map_err(|e| ToolError::csv(path, e))?
        .clone();
    if header.is_empty() || &header[0] != "label" {
        return Err(csv_error(path, 1, "header must start with `label`"));
    }
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("f{i}") {
            return Err(csv_error(
                path,
                1,
                format!("column {} is `{name}`, expected `f{i}`", i + 1),
            ));
        }
    }
    let width = header.len() - 1;
    if width == 0 {
        return Err(csv_error(path, 1, "no feature columns"));
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ToolError::csv(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width + 1 {
            return Err(csv_error(
                path,
                line,
                format!("{} fields, header has {}", record.len(), width + 1),
            ));
        }
        let label: usize = record[0].trim().parse().map_err(|_| {
            csv_error(
                path,
                line,
                format!("label `{}` is not a class id", &record[0]),
            )
        })?;
        if label >= num_classes {
            return Err(csv_error(
                path,
                line,
                format!("label {label} outside 0..{num_classes}"),
            ));
        }
        labels.push(label);
        for (j, cell) in record.iter().skip(1).enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| csv_error(path, line, format!("f{j}: `{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(csv_error(path, line, format!("f{j}: non-finite value")));
            }
            values.push(v);
        }
    }
    let split = path
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    DatasetHandle::new(vec![width], values, labels, num_classes, split)
}

/// Writes the flattened samples of `data` in the format read by
/// [`load_csv_dataset`]. Floats use shortest round-trip formatting.
pub fn write_csv_dataset(path: &Path, data: &DatasetHandle) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| ToolError::csv(path, e))?;
    let width: usize = data.sample_shape.iter().product();
    let mut row = Vec::with_capacity(width + 1);
    row.push("label".to_string());
    row.extend((0..width).map(|i| format!("f{i}")));
    writer
        .write_record(&row)
        .map_err(|e| ToolError::csv(path, e))?;
    for i in 0..data.len() {
        row.clear();
        row.push(data.labels[i].to_string());
        row.extend(data.sample(i).iter().map(|v| v.to_string()));
        writer
            .write_record(&row)
            .map_err(|e| ToolError::csv(path, e))?;
    }
    writer.flush().map_err(|e| ToolError::io(path, e))
}
