use std::io::{Read, Write};
use std::path::Path;

use crate::error::HarnessError;
use crate::experiment::RunResult;

pub fn write_results<W: Write>(out: W, rows: &[RunResult]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<RunResult>, HarnessError> {
    let mut rd = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for r in rd.deserialize() {
        rows.push(r?);
    }
    Ok(rows)
}

pub fn write_results_file(path: impl AsRef<Path>, rows: &[RunResult]) -> Result<(), HarnessError> {
    write_results(std::fs::File::create(path)?, rows)
}

pub fn read_results_file(path: impl AsRef<Path>) -> Result<Vec<RunResult>, HarnessError> {
    read_results(std::fs::File::open(path)?)
}

pub fn results_to_string(rows: &[RunResult]) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    write_results(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
