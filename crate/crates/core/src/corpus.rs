//! Name/property records and external descriptor matrices.
//!
//! JSONL is the canonical corpus format, one record per line:
//! `{"refcode":"ABCDEF","name":"catena-(...)","properties":{"bandgap_pbe_ev":1.2}}`.
//! CSV corpora use `refcode`, `name` and `properties.<key>` columns, with an
//! empty cell meaning the property is absent.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nomenclature::has_catena_marker;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub refcode: String,
    pub name: String,
    #[serde(default)]
    pub properties: BTreeMap<String, f64>,
}

impl CorpusRecord {
    pub fn new(refcode: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            refcode: refcode.into(),
            name: name.into(),
            properties: BTreeMap::new(),
        }
    }

    pub fn with_property(mut self, key: impl Into<String>, value: f64) -> Self {
        self.properties.insert(key.into(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// `.csv` selects CSV; anything else is read as JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("duplicate refcode '{refcode}' on lines {first_line} and {second_line}")]
    DuplicateRefcode {
        refcode: String,
        first_line: u64,
        second_line: u64,
    },
    #[error("line {line}: record '{refcode}': {message}")]
    Invariant {
        line: u64,
        refcode: String,
        message: String,
    },
    #[error("descriptor matrix and corpus share no refcodes")]
    EmptyIntersection,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Checks the per-record invariants: non-empty refcode, finite values,
/// `void_fraction` in [0, 1] and non-negative bandgaps.
pub fn validate_record(record: &CorpusRecord, line: u64) -> Result<(), CorpusError> {
    let fail = |message: String| {
        Err(CorpusError::Invariant {
            line,
            refcode: record.refcode.clone(),
            message,
        })
    };
    if record.refcode.trim().is_empty() {
        return fail("empty refcode".into());
    }
    for (key, value) in &record.properties {
        if !value.is_finite() {
            return fail(format!("{key} is not finite"));
        }
        if key == "void_fraction" && !(0.0..=1.0).contains(value) {
            return fail(format!("void_fraction {value} outside [0, 1]"));
        }
        if key.starts_with("bandgap") && *value < 0.0 {
            return fail(format!("{key} {value} is negative"));
        }
    }
    Ok(())
}

fn check_all(records: Vec<(u64, CorpusRecord)>) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut seen: HashMap<String, u64> = HashMap::new();
    let mut out = Vec::with_capacity(records.len());
    for (line, record) in records {
        validate_record(&record, line)?;
        if let Some(first) = seen.insert(record.refcode.clone(), line) {
            return Err(CorpusError::DuplicateRefcode {
                refcode: record.refcode,
                first_line: first,
                second_line: line,
            });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn read_jsonl(reader: impl Read) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        records.push((line_no, record));
    }
    check_all(records)
}

pub fn read_csv(reader: impl Read) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let malformed = |line: u64, message: String| CorpusError::Malformed { line, message };
    let headers = rdr.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let refcode_col = col("refcode").ok_or_else(|| malformed(1, "missing 'refcode' column".into()))?;
    let name_col = col("name").ok_or_else(|| malformed(1, "missing 'name' column".into()))?;
    let mut prop_cols = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        if let Some(key) = h.strip_prefix("properties.") {
            prop_cols.push((i, key.to_string()));
        } else if i != refcode_col && i != name_col {
            return Err(malformed(1, format!("unexpected column '{h}'")));
        }
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let mut record = CorpusRecord::new(&row[refcode_col], &row[name_col]);
        for (i, key) in &prop_cols {
            let cell = row[*i].trim();
            if cell.is_empty() {
                continue;
            }
            let value: f64 = cell
                .parse()
                .map_err(|_| malformed(line, format!("'{cell}' in column properties.{key} is not a number")))?;
            record.properties.insert(key.clone(), value);
        }
        records.push((line, record));
    }
    check_all(records)
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Vec<CorpusRecord>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    match format {
        CorpusFormat::Jsonl => read_jsonl(file),
        CorpusFormat::Csv => read_csv(file),
    }
}

pub fn write_jsonl(records: &[CorpusRecord], mut w: impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes records as JSONL.
pub fn save_corpus(records: &[CorpusRecord], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_jsonl(records, &mut w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Splits records into those whose name carries the `catena` marker and the rest.
pub fn filter_catena(records: Vec<CorpusRecord>) -> (Vec<CorpusRecord>, Vec<CorpusRecord>) {
    records.into_iter().partition(|r| has_catena_marker(&r.name))
}

/// Refcode-labelled rows of externally computed descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorMatrix {
    pub labels: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

/// Reads a CSV whose first column is `refcode` followed by numeric columns.
pub fn read_descriptors(reader: impl Read) -> Result<DescriptorMatrix, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let malformed = |line: u64, message: String| CorpusError::Malformed { line, message };
    let headers = rdr.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    if headers.get(0) != Some("refcode") {
        return Err(malformed(1, "first column must be 'refcode'".into()));
    }
    let width = headers.len() - 1;
    let mut seen = HashMap::new();
    let mut matrix = DescriptorMatrix {
        labels: Vec::new(),
        vectors: Vec::new(),
    };
    for row in rdr.records() {
        let row = row.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let label = row[0].to_string();
        if let Some(first) = seen.insert(label.clone(), line) {
            return Err(CorpusError::DuplicateRefcode {
                refcode: label,
                first_line: first,
                second_line: line,
            });
        }
        let values: Vec<f64> = row
            .iter()
            .skip(1)
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| malformed(line, format!("'{c}' is not a finite number")))
            })
            .collect::<Result<_, _>>()?;
        if values.len() != width {
            return Err(malformed(line, format!("expected {width} values, found {}", values.len())));
        }
        matrix.labels.push(label);
        matrix.vectors.push(values);
    }
    Ok(matrix)
}

pub fn load_descriptors(path: impl AsRef<Path>) -> Result<DescriptorMatrix, CorpusError> {
    let path = path.as_ref();
    read_descriptors(File::open(path).map_err(io_err(path))?)
}

/// Records and descriptor rows restricted to their shared refcodes, both in
/// sorted refcode order.
pub fn join_descriptors(
    records: &[CorpusRecord],
    matrix: &DescriptorMatrix,
) -> Result<(Vec<CorpusRecord>, DescriptorMatrix), CorpusError> {
    let rows: HashMap<&str, &Vec<f64>> = matrix
        .labels
        .iter()
        .map(String::as_str)
        .zip(&matrix.vectors)
        .collect();
    let mut joined: Vec<&CorpusRecord> = records
        .iter()
        .filter(|r| rows.contains_key(r.refcode.as_str()))
        .collect();
    if joined.is_empty() {
        return Err(CorpusError::EmptyIntersection);
    }
    joined.sort_by(|a, b| a.refcode.cmp(&b.refcode));
    let mut seen = HashSet::new();
    joined.retain(|r| seen.insert(r.refcode.as_str()));
    let out = DescriptorMatrix {
        labels: joined.iter().map(|r| r.refcode.clone()).collect(),
        vectors: joined.iter().map(|r| rows[r.refcode.as_str()].clone()).collect(),
    };
    Ok((joined.into_iter().cloned().collect(), out))
}
