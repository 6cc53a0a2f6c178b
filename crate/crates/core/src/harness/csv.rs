//! Versioned CSV output for experiment records.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_LINE: &str = "# mirrorgeo-csv v1";

/// One experiment row. Fields not produced by an experiment stay empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ResultRecord {
    pub config_digest: String,
    pub n: usize,
    pub d: usize,
    pub measured_regret: Option<f64>,
    pub bound: Option<f64>,
    pub d2_hat: Option<f64>,
    pub fitted_exponent: Option<f64>,
    pub value_lower: Option<f64>,
    pub c_p_hat: Option<f64>,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_records<W: Write>(records: &[ResultRecord], mut out: W) -> Result<()> {
    writeln!(out, "{SCHEMA_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    if records.is_empty() {
        w.write_record(["config_digest", "n", "d", "measured_regret", "bound", "d2_hat", "fitted_exponent", "value_lower", "c_p_hat"])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn records_to_string(records: &[ResultRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_records(records, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ResultRecord>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let recs = vec![
            ResultRecord { config_digest: "ab".into(), n: 4, d: 2, measured_regret: Some(0.25), ..Default::default() },
            ResultRecord { config_digest: "ab".into(), n: 8, d: 2, bound: Some(1.5), ..Default::default() },
        ];
        let s = records_to_string(&recs).unwrap();
        assert!(s.starts_with("# mirrorgeo-csv v1\nconfig_digest,n,d,"));
        assert_eq!(read_records(s.as_bytes()).unwrap(), recs);
    }
}
