use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::OutputFormat;
use crate::LabError;

/// Rows as CSV (header from the field names, `\n` line endings) or as a
/// pretty-printed JSON array.
pub fn emit<R: Serialize>(rows: &[R], format: OutputFormat) -> Result<String, LabError> {
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn to_csv<R: Serialize>(rows: &[R]) -> Result<String, LabError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_csv<R: DeserializeOwned>(text: &str) -> Result<Vec<R>, LabError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<R>, _>>()
        .map_err(LabError::from)
}

pub fn parse_json<R: DeserializeOwned>(text: &str) -> Result<Vec<R>, LabError> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse<R: DeserializeOwned>(text: &str, format: OutputFormat) -> Result<Vec<R>, LabError> {
    match format {
        OutputFormat::Csv => parse_csv(text),
        OutputFormat::Json => parse_json(text),
    }
}

/// Writes to `path`, or to stdout when `path` is `-`.
pub fn write_output(path: &Path, text: &str) -> Result<(), LabError> {
    if path.as_os_str() == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()?;
    } else {
        std::fs::write(path, text)?;
    }
    Ok(())
}
