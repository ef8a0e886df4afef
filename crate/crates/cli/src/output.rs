//! Output plumbing: stdout-or-file writers and CSV field formatting.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use crate::CliError;

/// Buffered writer over the `--out` target, defaulting to stdout.
pub fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => {
            let f = File::create(path).map_err(|e| {
                CliError::config(format!("cannot create {}: {e}", path.display()))
            })?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

pub fn write_failed(e: io::Error) -> CliError {
    CliError::numerical(format!("write failed: {e}"))
}

/// RFC-4180 quoting: only fields containing commas, quotes or newlines are
/// wrapped, so plain numeric output stays byte-stable.
pub fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Shortest round-trip decimal form, `.` separator, no locale.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_with_commas_are_quoted() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn numbers_round_trip() {
        for &x in &[0.3, 1.0 / 3.0, 156.70013651096653, 2e-12] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
