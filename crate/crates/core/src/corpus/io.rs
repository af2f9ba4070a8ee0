//! Line-delimited JSON and CSV readers for corpus inputs.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Parses one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|source| CorpusError::Json { line: i + 1, source })?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut writer: W, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

#[derive(Deserialize)]
struct PopulationRow {
    region: String,
    persons: f64,
}

/// Reads a `region,persons` CSV. Repeated regions are summed.
pub fn read_population<R: Read>(reader: R) -> Result<BTreeMap<String, f64>, CorpusError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut table = BTreeMap::new();
    for row in rdr.deserialize() {
        let row: PopulationRow = row?;
        if row.persons < 0.0 {
            return Err(CorpusError::NegativeCount(row.region));
        }
        *table.entry(row.region).or_insert(0.0) += row.persons;
    }
    Ok(table)
}

/// Writes rows as CSV with a header; column order follows field order.
pub fn write_csv<T: Serialize, W: Write>(writer: W, rows: &[T]) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::GeoDocument;

    #[test]
    fn jsonl_reports_bad_line_number() {
        let data = "{\"id\":\"a\",\"text\":\"x\",\"language\":\"eng\",\"source\":\"web\",\"origin\":\"a.nz\"}\n\nnot json\n";
        let err = read_jsonl::<GeoDocument, _>(data.as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::Json { line: 3, .. }));
    }

    #[test]
    fn population_csv() {
        let t = read_population("region,persons\nNZ,4.7e6\nAU,25000000\n".as_bytes()).unwrap();
        assert_eq!(t["AU"], 25_000_000.0);
        assert!(read_population("region,persons\nNZ,-1\n".as_bytes()).is_err());
    }
}
