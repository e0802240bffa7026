//! Combination files and schedule CSV export.
//!
//! A combination file is line oriented:
//!
//! ```text
//! RWS-COMBINATIONS 1
//! {"request":{...},"combinations_examined":"2002",...}
//! 11111110110000
//! ...
//! ```
//!
//! The second line is a JSON header with the full generation request and
//! counters; every further line is one array as a bitstring.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::model::{
    derive_total_shifts, parse_bits, AssignmentMatrix, BooleanShiftArray, Cell, CoverageTable,
    Fingerprint, ScheduleParams, DAYS_PER_WEEK, DAY_NAMES, FREE_TOKEN,
};
use crate::phase1::{GenerationRequest, GenerationResult};
use crate::phase2::build_coverage_table;

pub const FORMAT_MAGIC: &str = "RWS-COMBINATIONS";
pub const FORMAT_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
struct Header {
    request: GenerationRequest,
    fingerprint: Fingerprint,
    combinations_examined: String,
    solutions_found: usize,
    elapsed: f64,
    truncated: bool,
}

/// Writes `result` and returns the number of bytes written.
pub fn save_combinations(result: &GenerationResult, out: impl Write) -> Result<u64, IoError> {
    let mut out = CountingWriter {
        inner: BufWriter::new(out),
        written: 0,
    };
    let header = Header {
        request: result.request.clone(),
        fingerprint: result.request.params.fingerprint(),
        combinations_examined: result.combinations_examined.to_string(),
        solutions_found: result.solutions_found,
        elapsed: result.elapsed,
        truncated: result.truncated,
    };
    writeln!(out, "{FORMAT_MAGIC} {FORMAT_VERSION}")?;
    serde_json::to_writer(&mut out, &header).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    let mut line = String::new();
    for array in &result.arrays {
        line.clear();
        line.extend(array.bits().iter().map(|&b| if b { '1' } else { '0' }));
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(out.written)
}

pub fn save_combinations_to_path(result: &GenerationResult, path: impl AsRef<Path>) -> Result<u64, IoError> {
    save_combinations(result, File::create(path)?)
}

pub fn load_combinations(input: impl BufRead) -> Result<GenerationResult, IoError> {
    let mut lines = input.lines();
    let mut next_line = || -> Result<Option<String>, IoError> { Ok(lines.next().transpose()?) };

    let magic = next_line()?.ok_or(IoError::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    match magic.split_once(' ') {
        Some((FORMAT_MAGIC, FORMAT_VERSION)) => {}
        Some((FORMAT_MAGIC, other)) => return Err(IoError::Version(other.to_owned())),
        _ => {
            return Err(IoError::Parse {
                line: 1,
                message: format!("expected `{FORMAT_MAGIC} <version>`"),
            })
        }
    }

    let header_line = next_line()?.ok_or(IoError::Parse {
        line: 2,
        message: "missing header".into(),
    })?;
    let header: Header = serde_json::from_str(&header_line).map_err(|e| IoError::Parse {
        line: 2,
        message: e.to_string(),
    })?;
    let params = &header.request.params;
    params.validate()?;
    let fingerprint = params.fingerprint();
    if fingerprint != header.fingerprint {
        return Err(IoError::Validation {
            line: 2,
            message: format!("fingerprint {} does not match parameters ({fingerprint})", header.fingerprint),
        });
    }
    let combinations_examined: BigUint = header.combinations_examined.parse().map_err(|_| IoError::Parse {
        line: 2,
        message: "combinations_examined is not an integer".into(),
    })?;
    let shifts = derive_total_shifts(params)?;
    let slots = params.slots();

    let mut arrays = Vec::with_capacity(header.solutions_found);
    let mut line_no = 2;
    while let Some(line) = next_line()? {
        line_no += 1;
        let bits = parse_bits(&line).ok_or_else(|| IoError::Parse {
            line: line_no,
            message: "expected a string over {0,1}".into(),
        })?;
        if bits.len() != slots {
            return Err(IoError::Validation {
                line: line_no,
                message: format!("length {} differs from {slots} slots", bits.len()),
            });
        }
        let ones = bits.iter().filter(|&&b| b).count();
        if ones != shifts {
            return Err(IoError::Validation {
                line: line_no,
                message: format!("{ones} working days, expected {shifts}"),
            });
        }
        arrays.push(BooleanShiftArray::new(bits, fingerprint));
    }
    if arrays.len() != header.solutions_found {
        return Err(IoError::Validation {
            line: line_no,
            message: format!(
                "header announces {} arrays, found {}",
                header.solutions_found,
                arrays.len()
            ),
        });
    }
    Ok(GenerationResult {
        request: header.request,
        arrays,
        combinations_examined,
        solutions_found: header.solutions_found,
        elapsed: header.elapsed,
        truncated: header.truncated,
    })
}

pub fn load_combinations_from_path(path: impl AsRef<Path>) -> Result<GenerationResult, IoError> {
    load_combinations(BufReader::new(File::open(path)?))
}

struct CountingWriter<W: Write> {
    inner: W,
    written: u64,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.written += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

fn label(cell: Cell, params: &ScheduleParams) -> &str {
    match cell {
        Cell::Free => FREE_TOKEN,
        Cell::Shift(s) => &params.shift_catalog[s as usize].label,
    }
}

/// Person rows for one schedule: person `p` starts the rotation at week `p`.
fn person_rows(solution: &AssignmentMatrix, params: &ScheduleParams) -> Vec<Vec<String>> {
    (0..solution.weeks())
        .map(|p| {
            solution
                .rotate_weeks(p)
                .into_iter()
                .map(|c| label(c, params).to_owned())
                .collect()
        })
        .collect()
}

fn render(rows: &[Vec<String>], coverage: &CoverageTable, params: &ScheduleParams) -> String {
    let width = rows.iter().map(Vec::len).max().unwrap_or(DAYS_PER_WEEK).max(DAYS_PER_WEEK);
    let mut out = String::from("Person");
    for i in 0..width {
        out.push(',');
        out.push_str(DAY_NAMES[i % DAYS_PER_WEEK]);
    }
    out.push('\n');
    for (p, row) in rows.iter().enumerate() {
        out.push_str(&p.to_string());
        for i in 0..width {
            out.push(',');
            if let Some(cell) = row.get(i) {
                out.push_str(cell);
            }
        }
        out.push('\n');
    }
    for (s, shift) in params.shift_catalog.iter().enumerate() {
        out.push_str(&shift.label);
        for day in 0..DAYS_PER_WEEK {
            out.push(',');
            out.push_str(&coverage.get(day, s).to_string());
        }
        out.push('\n');
    }
    out
}

/// One schedule as CSV: a header row, one row per person, then one footer
/// row per shift type with its count on each day of the week.
pub fn export_csv(solution: &AssignmentMatrix, params: &ScheduleParams) -> Result<String, IoError> {
    let coverage = build_coverage_table(solution, params)?;
    Ok(render(&person_rows(solution, params), &coverage, params))
}

/// Concatenates schedules that share a shift catalog. Persons are numbered
/// continuously and the footer sums the members' coverage.
pub fn merge_schedules(members: &[(&AssignmentMatrix, &ScheduleParams)]) -> Result<String, IoError> {
    let Some(&(_, first)) = members.first() else {
        return Err(IoError::Validation {
            line: 0,
            message: "nothing to merge".into(),
        });
    };
    let mut rows = Vec::new();
    let mut coverage = CoverageTable::zeroed(first.n_shift_types());
    for &(solution, params) in members {
        if params.shift_catalog != first.shift_catalog {
            return Err(IoError::CatalogMismatch);
        }
        coverage.add(&build_coverage_table(solution, params)?);
        rows.extend(person_rows(solution, params));
    }
    Ok(render(&rows, &coverage, first))
}
