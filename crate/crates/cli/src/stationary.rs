//! `stationary` subcommand: solve `u + (total flux)' = g` and report the
//! regularity of the resulting flux profile.

use std::fs;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use degenfv_core::fv_solver::{CellField, Grid};
use degenfv_core::io;
use degenfv_core::stationary::{
    flux_regularity_report, solve_stationary, SolveOptions, StationaryProblem,
    StationarySolution,
};

use crate::manifest::Resolved;
use crate::CliError;

pub enum Source {
    Constant(f64),
    /// Last column of a CSV, one value per cell; header lines whose last
    /// column is not a number are skipped.
    Csv(PathBuf),
}

impl Source {
    fn field(&self, grid: Grid) -> Result<CellField, CliError> {
        match self {
            Source::Constant(v) => Ok(CellField::constant(grid, *v)),
            Source::Csv(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
                let mut values = Vec::new();
                for line in text.lines() {
                    let last = line.split(',').last().unwrap_or("").trim();
                    if let Ok(v) = last.parse::<f64>() {
                        values.push(v);
                    } else if !values.is_empty() {
                        return Err(CliError::config(format!(
                            "{}: non-numeric value '{last}' after data started",
                            path.display()
                        )));
                    }
                }
                if values.len() != grid.cells() {
                    return Err(CliError::config(format!(
                        "{}: {} values for a grid of {} cells",
                        path.display(),
                        values.len(),
                        grid.cells()
                    )));
                }
                CellField::from_values(grid, values)
                    .map_err(|e| CliError::config(e.to_string()))
            }
        }
    }
}

pub fn cmd_stationary(
    res: &Resolved,
    source: &Source,
    refine: bool,
    out: &Path,
    gnuplot: bool,
) -> Result<(), CliError> {
    fs::create_dir_all(out)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", out.display())))?;

    let (sol, prob) = solve_on(res, source, res.grid)?;
    io::write_snapshot_csv(&out.join("stationary.csv"), &sol.u)
        .map_err(|e| CliError::config(e.to_string()))?;
    io::write_face_flux_csv(&out.join("face_flux.csv"), &sol.faces)
        .map_err(|e| CliError::config(e.to_string()))?;

    let mut table = File::create(out.join("flux_regularity.csv"))
        .map_err(|e| CliError::config(format!("flux_regularity.csv: {e}")))?;
    writeln!(
        table,
        "dx,cells,iterations,residual_l1,max_cell_jump,left_residual,right_residual,jump_ratio"
    )
    .map_err(|e| CliError::config(e.to_string()))?;
    let base = flux_regularity_report(&sol, &prob);
    writeln!(
        table,
        "{},{},{},{:e},{:e},{:e},{:e},",
        res.grid.dx(),
        res.grid.cells(),
        sol.iterations,
        sol.residual_l1,
        base.max_cell_jump,
        base.left_residual,
        base.right_residual
    )
    .map_err(|e| CliError::config(e.to_string()))?;

    println!(
        "{}: stationary profile in {} iterations, residual {:.3e}, max flux jump {:.3e}",
        res.name, sol.iterations, sol.residual_l1, base.max_cell_jump
    );

    if refine {
        if matches!(source, Source::Csv(_)) {
            return Err(CliError::config("refine requires a constant g"));
        }
        let fine = Grid::uniform(res.grid.a(), res.grid.b(), 2 * res.grid.cells())
            .map_err(|e| CliError::config(e.to_string()))?;
        let (fsol, fprob) = solve_on(res, source, fine)?;
        let frep = flux_regularity_report(&fsol, &fprob);
        let ratio = frep.max_cell_jump / base.max_cell_jump;
        writeln!(
            table,
            "{},{},{},{:e},{:e},{:e},{:e},{:e}",
            fine.dx(),
            fine.cells(),
            fsol.iterations,
            fsol.residual_l1,
            frep.max_cell_jump,
            frep.left_residual,
            frep.right_residual,
            ratio
        )
        .map_err(|e| CliError::config(e.to_string()))?;
        println!(
            "  refined dx = {}: max flux jump {:.3e} (ratio {:.3})",
            fine.dx(),
            frep.max_cell_jump,
            ratio
        );
    }

    if gnuplot {
        io::write_gnuplot_script(
            &out.join("plot.gp"),
            &[("stationary.csv", "stationary profile"), ("face_flux.csv", "total flux")],
        )
        .map_err(|e| CliError::config(e.to_string()))?;
    }
    Ok(())
}

fn solve_on(
    res: &Resolved,
    source: &Source,
    grid: Grid,
) -> Result<(StationarySolution, StationaryProblem), CliError> {
    let g = source.field(grid)?;
    let prob = StationaryProblem::new(res.spec.clone(), g)
        .map_err(|e| CliError::config(e.to_string()))?;
    let opts = SolveOptions::for_grid(&grid);
    let sol = solve_stationary(&prob, &res.flux, &opts)
        .map_err(|e| CliError::diagnostic(e.to_string()))?;
    Ok((sol, prob))
}
