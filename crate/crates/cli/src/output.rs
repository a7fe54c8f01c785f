use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use spectral_attention::Matrix64;

use crate::commands::CliError;
use crate::CommandResult;

/// Where a command's primary output lands.
#[derive(Debug, Default)]
pub struct Sink {
    files: Vec<PathBuf>,
    stdout: String,
}

impl Sink {
    /// Writes `body` to `out`, or appends it to standard output.
    pub fn emit(&mut self, out: Option<&Path>, body: &str) -> Result<(), CliError> {
        match out {
            Some(path) => {
                fs::write(path, body).map_err(|source| CliError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                self.files.push(path.to_path_buf());
            }
            None => self.stdout.push_str(body),
        }
        Ok(())
    }

    /// Exit 0 when `failed` is `None`, otherwise 1 with the failing check
    /// named in the summary.
    pub fn finish(self, summary: String, failed: Option<String>) -> CommandResult {
        let (exit_code, summary) = match failed {
            None => (CommandResult::SUCCESS, summary),
            Some(check) => (CommandResult::VALIDATION_FAILURE, format!("FAILED {check}; {summary}")),
        };
        CommandResult {
            exit_code,
            files: self.files,
            stdout: self.stdout,
            summary,
        }
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header `c0..c{n-1}` followed by one line per row.
pub fn matrix_csv(m: &Matrix64) -> String {
    let mut out = (0..m.cols()).map(|j| format!("c{j}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|&v| num(v)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// `dir/stem.csv -> dir/stem-<suffix>.csv`.
pub fn companion(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned());
    let name = match ext {
        Some(ext) => format!("{stem}-{suffix}.{ext}"),
        None => format!("{stem}-{suffix}"),
    };
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_keeps_directory_and_extension() {
        assert_eq!(companion(Path::new("/tmp/d.csv"), "dbar"), PathBuf::from("/tmp/d-dbar.csv"));
        assert_eq!(companion(Path::new("table"), "dbar"), PathBuf::from("table-dbar"));
    }

    #[test]
    fn failed_check_is_named() {
        let r = Sink::default().finish("ok".into(), Some("coverage".into()));
        assert_eq!(r.exit_code, 1);
        assert!(r.summary.starts_with("FAILED coverage"));
    }

    #[test]
    fn matrix_csv_layout() {
        let m = Matrix64::identity(2);
        assert_eq!(matrix_csv(&m), "c0,c1\n1.0000000000000000e0,0.0000000000000000e0\n0.0000000000000000e0,1.0000000000000000e0\n");
    }
}
