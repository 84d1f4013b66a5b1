//! CSV and JSON emission.
//!
//! CSV files open with `# key=value` comment lines carrying the header, then
//! one header record in [`COLUMNS`] order and one record per row. Output is
//! a pure function of the outcome.

use std::io::Write;
use std::path::Path;

use crate::error::{BenchError, Result};
use crate::run::{Outcome, COLUMNS};
use crate::spec::Format;

fn compact<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("report fields serialize")
}

pub fn write_csv(outcome: &Outcome, mut w: impl Write) -> std::io::Result<()> {
    let h = &outcome.header;
    writeln!(w, "# schema={}", h.schema)?;
    writeln!(w, "# version={}", h.version)?;
    writeln!(w, "# mode={}", h.spec.mode.name())?;
    writeln!(w, "# seed={}", h.spec.seed)?;
    writeln!(w, "# params={}", compact(&h.params))?;
    writeln!(w, "# cost_table={}", compact(&h.spec.pim.cost_table))?;
    writeln!(w, "# spec={}", compact(&h.spec))?;
    if let Some(r) = &outcome.result {
        let answers: Vec<String> = r.answers.iter().map(ToString::to_string).collect();
        writeln!(w, "# answers={}", answers.join(";"))?;
    }
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    csv.write_record(COLUMNS)?;
    for row in &outcome.rows {
        csv.serialize(row)?;
    }
    csv.flush()
}

pub fn write_json(outcome: &Outcome, mut w: impl Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, outcome)?;
    writeln!(w)
}

pub fn emit(outcome: &Outcome, format: Format, w: impl Write) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(outcome, w),
        Format::Json => write_json(outcome, w),
    }
}

/// Writes to `path`, or stdout when there is none.
pub fn write_report(outcome: &Outcome, format: Format, path: Option<&Path>) -> Result<()> {
    fn io(path: &str) -> impl Fn(std::io::Error) -> BenchError + '_ {
        move |source| BenchError::Io {
            path: path.to_string(),
            source,
        }
    }
    match path {
        Some(p) => {
            let name = p.display().to_string();
            let mut buf = Vec::new();
            emit(outcome, format, &mut buf).map_err(io(&name))?;
            std::fs::write(p, buf).map_err(io(&name))
        }
        None => emit(outcome, format, std::io::stdout().lock()).map_err(io("<stdout>")),
    }
}
