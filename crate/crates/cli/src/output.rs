//! Artifact writing: CSV or JSON rows plus a metadata sidecar.

use crate::{CliError, Format, OutputArgs};
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn write_rows<R: Serialize, W: Write>(
    rows: &[R],
    format: Format,
    mut out: W,
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            for row in rows {
                writer
                    .serialize(row)
                    .map_err(|e| CliError::Io(io::Error::other(e)))?;
            }
            writer.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows).map_err(io::Error::other)?;
            writeln!(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Write `rows` to `--out` (or stdout) and, for files, the flag sidecar.
pub fn emit<R: Serialize>(
    rows: &[R],
    output: &OutputArgs,
    meta: &serde_json::Value,
) -> Result<(), CliError> {
    match &output.out {
        None => write_rows(rows, output.format, io::stdout().lock()),
        Some(path) => {
            write_rows(rows, output.format, BufWriter::new(File::create(path)?))?;
            let sidecar = serde_json::json!({
                "tool": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "rows": rows.len(),
                "flags": meta,
            });
            let mut file = BufWriter::new(File::create(sidecar_path(path))?);
            serde_json::to_writer_pretty(&mut file, &sidecar).map_err(io::Error::other)?;
            writeln!(file)?;
            file.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(
            sidecar_path(Path::new("out/k.csv")),
            PathBuf::from("out/k.csv.meta.json")
        );
    }

    #[test]
    fn csv_rows_have_a_header() {
        #[derive(Serialize)]
        struct Row {
            a: usize,
            b: f64,
        }
        let mut buf = Vec::new();
        write_rows(&[Row { a: 1, b: 0.5 }], Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,0.5\n");
    }
}
