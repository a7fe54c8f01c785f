use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::json;
use spectral_attention::dense::Matrix;
use spectral_attention::transform::{dct_matrix, energy_compaction, klt_compare, spectral_coverage, truncate};

use super::CliError;
use crate::output::{companion, matrix_csv, num, Sink};
use crate::CommandResult;

const ORTHO_TOL: f64 = 1e-12;
const COVERAGE_TOL: f64 = 1e-10;

pub fn dct_table(size: usize, tau: Option<f64>, out: Option<PathBuf>) -> Result<CommandResult, CliError> {
    let basis = dct_matrix::<f64>(size)?;
    let d = basis.matrix();
    let eye = Matrix::identity(size);
    let dev = d
        .matmul_t(d, None)?
        .max_abs_diff(&eye)
        .max(d.t_matmul(d)?.max_abs_diff(&eye));

    let mut sink = Sink::default();
    sink.emit(out.as_deref(), &matrix_csv(d))?;
    let mut summary = format!("C={size} max |DD^T - I| = {dev:.2e}");
    if let Some(tau) = tau {
        let trunc = truncate(&basis, tau)?;
        let dbar = matrix_csv(trunc.dbar());
        match &out {
            Some(path) => sink.emit(Some(&companion(path, "dbar")), &dbar)?,
            None => {
                sink.emit(None, "\n")?;
                sink.emit(None, &dbar)?;
            }
        }
        let _ = write!(summary, ", kept {} of {size}", trunc.kept());
    }
    let failed = (dev >= ORTHO_TOL).then(|| format!("orthonormality ({dev:e} >= {ORTHO_TOL:e})"));
    Ok(sink.finish(summary, failed))
}

pub fn coverage(size: usize, out: Option<PathBuf>) -> Result<CommandResult, CliError> {
    let report = spectral_coverage::<f64>(size)?;
    let mut body = String::from("k,coverage");
    for l in 0..size {
        let _ = write!(body, ",spectrum_{l}");
    }
    body.push('\n');
    let mut worst: f64 = 0.0;
    for k in 0..size {
        let cov = report.coverage[k];
        worst = worst.max((cov - 1.0).abs());
        let _ = write!(body, "{k},{}", num(cov));
        for l in 0..size {
            let _ = write!(body, ",{}", num(report.spectra[(l, k)]));
        }
        body.push('\n');
    }
    let mut sink = Sink::default();
    sink.emit(out.as_deref(), &body)?;
    let failed = (worst >= COVERAGE_TOL).then(|| format!("coverage (max |coverage - 1| = {worst:e})"));
    Ok(sink.finish(format!("C={size} max |coverage - 1| = {worst:.2e}"), failed))
}

pub fn klt(size: usize, rho: f64, out: Option<PathBuf>) -> Result<CommandResult, CliError> {
    let report = klt_compare::<f64>(size, rho)?;
    let curve = (1..=size)
        .map(|kept| energy_compaction::<f64>(size, rho, kept as f64 / size as f64).map(|e| json!({"kept": kept, "energy": e})))
        .collect::<Result<Vec<_>, _>>()?;
    let body = serde_json::to_string_pretty(&json!({"report": report, "compaction": curve}))? + "\n";
    let mut sink = Sink::default();
    sink.emit(out.as_deref(), &body)?;
    Ok(sink.finish(
        format!(
            "C={size} rho={rho}: off-diagonal ratio {:.6}, mean |cos| {:.6}",
            report.off_diagonal_ratio, report.mean_cosine
        ),
        None,
    ))
}
