//! CSV (config comment line, header row, rows, elapsed comment) or schema-versioned JSON.

use crate::config::{csv_config_line, RunConfig};
use crate::error::CliError;
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::time::Duration;

pub const RESULT_SCHEMA: u32 = 1;

fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn wants_json(cfg: &RunConfig) -> bool {
    cfg.out.as_ref().and_then(|p| p.extension()).is_some_and(|e| e == "json")
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Output(e.to_string())
}

#[derive(Serialize)]
struct Envelope<'a, S: Serialize, R: Serialize> {
    schema_version: u32,
    config: &'a RunConfig,
    elapsed_seconds: f64,
    summary: &'a S,
    rows: &'a [R],
}

/// Writes `rows` as the table and `summary` as JSON-only extra data.
pub fn emit<R: Serialize, S: Serialize>(cfg: &RunConfig, rows: &[R], summary: &S, elapsed: Duration) -> Result<(), CliError> {
    let mut w = sink(cfg)?;
    if wants_json(cfg) {
        let env = Envelope { schema_version: RESULT_SCHEMA, config: cfg, elapsed_seconds: elapsed.as_secs_f64(), summary, rows };
        serde_json::to_writer_pretty(&mut w, &env).map_err(io_err)?;
        writeln!(w).map_err(io_err)?;
    } else {
        writeln!(w, "{}", csv_config_line(cfg)).map_err(io_err)?;
        {
            let mut cw = csv::Writer::from_writer(&mut w);
            for r in rows {
                cw.serialize(r).map_err(io_err)?;
            }
            cw.flush().map_err(io_err)?;
        }
        writeln!(w, "# elapsed_seconds: {:.6}", elapsed.as_secs_f64()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
