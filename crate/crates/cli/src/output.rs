use std::io::{self, BufWriter, Write};
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::{CliError, Stage};

/// Writes to `path` through a temporary file in the same directory that is
/// renamed into place only after `body` succeeds, or to stdout without a path.
pub fn write_output<F>(path: Option<&Path>, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let io_err =
        |what: &str, e: &dyn std::fmt::Display| CliError::user(Stage::Io, format!("{what}: {e}"));
    let Some(path) = path else {
        let stdout = io::stdout();
        let mut sink = BufWriter::new(stdout.lock());
        body(&mut sink).map_err(|e| io_err("writing stdout", &e))?;
        return sink.flush().map_err(|e| io_err("writing stdout", &e));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let shown = path.display().to_string();
    let tmp = NamedTempFile::new_in(dir).map_err(|e| io_err(&shown, &e))?;
    {
        let mut sink = BufWriter::new(tmp.as_file());
        body(&mut sink).map_err(|e| io_err(&shown, &e))?;
        sink.flush().map_err(|e| io_err(&shown, &e))?;
    }
    tmp.persist(path).map_err(|e| io_err(&shown, &e.error))?;
    Ok(())
}
