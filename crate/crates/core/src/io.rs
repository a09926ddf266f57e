//! CSV and gnuplot writers.
//!
//! Values are written with Rust's shortest round-trip float formatting and
//! check magnitudes in scientific notation, so identical inputs always
//! produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::diagnostics::CheckResult;
use crate::error::CoreError;
use crate::fv_solver::{CellField, SolutionRecord};
use crate::stationary::FaceFluxProfile;

/// `x,u` rows at cell centers.
pub fn write_snapshot_csv(path: &Path, field: &CellField) -> Result<(), CoreError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,u")?;
    let grid = field.grid();
    for (i, v) in field.values().iter().enumerate() {
        writeln!(w, "{},{}", grid.center(i), v)?;
    }
    w.flush()?;
    Ok(())
}

/// `step,time,mass,left_flux,right_flux` rows, one per accepted step.
pub fn write_run_log_csv(path: &Path, rec: &SolutionRecord) -> Result<(), CoreError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "step,time,mass,left_flux,right_flux")?;
    for s in rec.steps() {
        writeln!(w, "{},{},{},{},{}", s.step, s.time, s.mass, s.left_flux, s.right_flux)?;
    }
    w.flush()?;
    Ok(())
}

/// `x_face,total_flux` rows, one per face.
pub fn write_face_flux_csv(path: &Path, profile: &FaceFluxProfile) -> Result<(), CoreError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x_face,total_flux")?;
    for (i, v) in profile.faces().iter().enumerate() {
        writeln!(w, "{},{}", profile.position(i), v)?;
    }
    w.flush()?;
    Ok(())
}

/// `check,pass,magnitude,tolerance,witness_step,witness_cell` rows.
/// Witness columns stay empty for checks without one.
pub fn write_checks_csv(path: &Path, checks: &[CheckResult]) -> Result<(), CoreError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "check,pass,magnitude,tolerance,witness_step,witness_cell")?;
    for c in checks {
        let (ws, wc) = match c.witness {
            Some((s, i)) => (s.to_string(), i.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(w, "{},{},{:e},{:e},{},{}", c.check, c.pass, c.magnitude, c.tolerance, ws, wc)?;
    }
    w.flush()?;
    Ok(())
}

/// A minimal gnuplot script plotting `u` over `x` from the given CSV
/// files (paths relative to the script's own directory).
pub fn write_gnuplot_script(path: &Path, plots: &[(&str, &str)]) -> Result<(), CoreError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "set datafile separator ','")?;
    writeln!(w, "set xlabel 'x'")?;
    writeln!(w, "set ylabel 'u'")?;
    writeln!(w, "set key top left")?;
    let series: Vec<String> = plots
        .iter()
        .map(|(file, title)| format!("'{file}' every ::1 using 1:2 with steps title '{title}'"))
        .collect();
    writeln!(w, "plot {}", series.join(", \\\n     "))?;
    writeln!(w, "pause -1")?;
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
