//! Workbench exchange format: one [`AnswerGrouping`] per line, each line
//! tagged with the schema version.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::AnswerGrouping;
use super::validate::validate_grouping;
use super::CorpusError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct LineOut<'a> {
    schema_version: u32,
    #[serde(flatten)]
    grouping: &'a AnswerGrouping,
}

#[derive(Deserialize)]
struct LineIn {
    schema_version: u32,
    #[serde(flatten)]
    grouping: AnswerGrouping,
}

/// Serializes one grouping as a single exchange-format line (no newline).
pub fn grouping_to_line(g: &AnswerGrouping) -> String {
    serde_json::to_string(&LineOut {
        schema_version: SCHEMA_VERSION,
        grouping: g,
    })
    .expect("grouping serialization is infallible")
}

/// Parses and validates one exchange-format line. `line_no` is 1-based and
/// only used for error reporting.
pub fn grouping_from_line(line: &str, line_no: usize) -> Result<AnswerGrouping, CorpusError> {
    let parsed: LineIn = serde_json::from_str(line).map_err(|e| CorpusError::Line {
        line: line_no,
        message: e.to_string(),
    })?;
    if parsed.schema_version != SCHEMA_VERSION {
        return Err(CorpusError::SchemaVersion {
            line: line_no,
            found: parsed.schema_version,
        });
    }
    validate_grouping(&parsed.grouping).map_err(|violation| CorpusError::Validation {
        line: line_no,
        violation,
    })?;
    Ok(parsed.grouping)
}

pub fn write_groupings<W: Write>(mut w: W, groupings: &[AnswerGrouping]) -> std::io::Result<()> {
    for g in groupings {
        writeln!(w, "{}", grouping_to_line(g))?;
    }
    w.flush()
}

pub fn read_groupings<R: BufRead>(r: R) -> Result<Vec<AnswerGrouping>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| CorpusError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(grouping_from_line(&line, i + 1)?);
    }
    Ok(out)
}

/// Writes groupings to `path`, returning the number of lines written.
/// Every grouping is validated first; nothing is written if one fails.
pub fn export_jsonl(groupings: &[AnswerGrouping], path: &Path) -> Result<usize, CorpusError> {
    for (i, g) in groupings.iter().enumerate() {
        validate_grouping(g).map_err(|violation| CorpusError::Validation {
            line: i + 1,
            violation,
        })?;
    }
    let io = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_groupings(BufWriter::new(file), groupings).map_err(io)?;
    Ok(groupings.len())
}

pub fn import_jsonl(path: &Path) -> Result<Vec<AnswerGrouping>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_groupings(BufReader::new(file))
}

/// Reads any JSONL file of `T`, skipping blank lines.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CorpusError::Line {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
