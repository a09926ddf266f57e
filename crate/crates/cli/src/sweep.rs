//! `sweep` subcommand: run a family of problems varying one parameter,
//! one output subdirectory per member plus an aggregate summary.

use std::fs;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use degenfv_core::diagnostics::{viscous_estimates, CheckResult};
use degenfv_core::fv_solver::SolutionRecord;

use crate::manifest::Manifest;
use crate::run;
use crate::CliError;

pub fn cmd_sweep(
    manifest: &Manifest,
    param: &str,
    values: &[f64],
    out: &Path,
) -> Result<(), CliError> {
    if values.len() < 2 {
        return Err(CliError::config("a sweep needs at least two values"));
    }
    for pair in values.windows(2) {
        if pair[1] >= pair[0] {
            return Err(CliError::config(format!(
                "sweep values must decrease strictly: {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    match param {
        "epsilon" => sweep_epsilon(manifest, values, out),
        "dx" => sweep_dx(manifest, values, out),
        other => Err(CliError::config(format!("unknown sweep parameter '{other}' (epsilon | dx)"))),
    }
}

/// Resolve members up front, evolve them on separate threads, return
/// records and check rows in the input order.
fn run_members(
    members: Vec<(String, Manifest)>,
    out: &Path,
) -> Result<Vec<(String, SolutionRecord, Vec<CheckResult>)>, CliError> {
    let resolved: Vec<_> = members
        .into_iter()
        .map(|(dir, m)| m.resolve().map(|r| (dir, r)))
        .collect::<Result<_, _>>()?;
    let outcomes: Vec<Result<_, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = resolved
            .iter()
            .map(|(dir, res)| {
                scope.spawn(move || {
                    let (rec, rows) = run::execute(res, &out.join(dir), false)?;
                    Ok((dir.clone(), rec, rows))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("member thread panicked")).collect()
    });
    outcomes.into_iter().collect()
}

/// First failing check across members, reported after the summary is on
/// disk so partial results stay inspectable.
fn bad_member(done: &[(String, SolutionRecord, Vec<CheckResult>)]) -> Option<CliError> {
    for (dir, _, rows) in done {
        if let Some(bad) = rows.iter().find(|r| !r.pass) {
            return Some(CliError::diagnostic(format!("{dir}: check failed: {}", bad.check)));
        }
    }
    None
}

fn sweep_epsilon(manifest: &Manifest, values: &[f64], out: &Path) -> Result<(), CliError> {
    if values.iter().any(|&v| v <= 0.0) {
        return Err(CliError::config(
            "epsilon sweep values must be positive (the reference run supplies epsilon = 0)",
        ));
    }
    let mut members = Vec::new();
    for &eps in values {
        let mut m = manifest.clone();
        m.epsilon = eps;
        members.push((format!("eps_{eps}"), m));
    }
    let mut reference = manifest.clone();
    reference.epsilon = 0.0;
    members.push(("eps_0".into(), reference));

    let done = run_members(members, out)?;
    let inviscid = done.last().expect("reference member present");
    let spec = manifest.resolve()?.spec;
    let viscous: Vec<&SolutionRecord> =
        done[..values.len()].iter().map(|(_, rec, _)| rec).collect();
    let report =
        viscous_estimates(&spec, &viscous).map_err(|e| CliError::diagnostic(e.to_string()))?;

    let mut table = File::create(out.join("sweep_summary.csv"))
        .map_err(|e| CliError::config(format!("sweep_summary.csv: {e}")))?;
    writeln!(table, "epsilon,distance_to_inviscid,grad_l2,phi_h1,boundary_l1")
        .map_err(|e| CliError::config(e.to_string()))?;
    for (member, norms) in done[..values.len()].iter().zip(&report.norms) {
        let distance = member
            .1
            .final_field()
            .l1_distance(&inviscid.1.final_field())
            .map_err(|e| CliError::diagnostic(e.to_string()))?;
        writeln!(
            table,
            "{},{:e},{:e},{:e},{:e}",
            norms.epsilon, distance, norms.grad_l2, norms.phi_h1, norms.boundary_l1
        )
        .map_err(|e| CliError::config(e.to_string()))?;
        println!(
            "epsilon = {}: distance to inviscid {:.3e}, grad {:.3e}, phi-H1 {:.3e}, boundary {:.3e}",
            norms.epsilon, distance, norms.grad_l2, norms.phi_h1, norms.boundary_l1
        );
    }
    drop(table);

    if let Some(err) = bad_member(&done) {
        return Err(err);
    }
    if !report.pass {
        return Err(CliError::diagnostic(format!(
            "check failed: viscous_growth (worst factor {:.3} over limit {})",
            report.max_growth.iter().fold(0.0_f64, |a, &b| a.max(b)),
            report.growth_limit
        )));
    }
    Ok(())
}

fn sweep_dx(manifest: &Manifest, values: &[f64], out: &Path) -> Result<(), CliError> {
    let mut members = Vec::new();
    for &dx in values {
        let mut m = manifest.clone();
        m.dx = dx;
        members.push((format!("dx_{dx}"), m));
    }
    let done = run_members(members, out)?;

    fs::create_dir_all(out)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", out.display())))?;
    let mut table = File::create(out.join("sweep_summary.csv"))
        .map_err(|e| CliError::config(format!("sweep_summary.csv: {e}")))?;
    writeln!(table, "dx,cells,consecutive_l1").map_err(|e| CliError::config(e.to_string()))?;
    for (i, (_, rec, _)) in done.iter().enumerate() {
        let grid = rec.grid();
        if i == 0 {
            writeln!(table, "{},{},", grid.dx(), grid.cells())
                .map_err(|e| CliError::config(e.to_string()))?;
            println!("dx = {}: {} cells", grid.dx(), grid.cells());
            continue;
        }
        let coarse = done[i - 1].1.grid();
        let restricted = rec
            .final_field()
            .restrict_to(coarse)
            .map_err(|e| CliError::config(e.to_string()))?;
        let dist = restricted
            .l1_distance(&done[i - 1].1.final_field())
            .map_err(|e| CliError::diagnostic(e.to_string()))?;
        writeln!(table, "{},{},{:e}", grid.dx(), grid.cells(), dist)
            .map_err(|e| CliError::config(e.to_string()))?;
        println!(
            "dx = {}: {} cells, L1 distance to previous level {:.3e}",
            grid.dx(),
            grid.cells(),
            dist
        );
    }
    drop(table);

    if let Some(err) = bad_member(&done) {
        return Err(err);
    }
    Ok(())
}
