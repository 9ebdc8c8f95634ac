//! CSV emission. Every file starts with a `#` header carrying the tool
//! version, the echoed configuration and the column names.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::RunConfig;
use crate::CliError;

pub const TOOL: &str = concat!("qbm ", env!("CARGO_PKG_VERSION"));

pub fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.12e}")
    }
}

pub struct Table {
    text: String,
    columns: usize,
}

impl Table {
    /// `notes` are extra header lines, written after the configuration.
    pub fn new(command: &str, cfg: &RunConfig, notes: &[String], columns: &[&str]) -> Self {
        let mut text = format!("# {TOOL} {command}\n# config:\n");
        for (k, v) in cfg.entries() {
            let _ = writeln!(text, "#   {k} = {v}");
        }
        for n in notes {
            let _ = writeln!(text, "# {n}");
        }
        let _ = writeln!(text, "# columns: {}", columns.join(","));
        Self {
            text,
            columns: columns.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.text)
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
