//! `check` subcommand: audit structural hypotheses and print a table.
//! Advisory only; violated hypotheses are legitimate experiments, so the
//! exit code stays 0.

use degenfv_core::problem::hypothesis_report;

use crate::manifest::Resolved;
use crate::CliError;

pub fn cmd_check(res: &Resolved) -> Result<(), CliError> {
    let report =
        hypothesis_report(&res.spec).map_err(|e| CliError::config(e.to_string()))?;

    println!("{}", res.name);
    println!("{:<16} {:<6} detail", "hypothesis", "holds");

    let h1 = &report.h1;
    println!(
        "{:<16} {:<6} f(0) = {}, b(0) = {}",
        "zero-state",
        yn(h1.pass),
        h1.f_at_zero,
        h1.b_at_zero
    );

    let h2 = &report.h2;
    let h2_detail = match (&h2.flat_zone_violation, &h2.beta) {
        (Some((u, dev)), _) => {
            format!("b varies on the degenerate zone: b({u:.6}) deviates by {dev:.3e}")
        }
        (None, Some(_)) => format!("b factors through phi, Lipschitz slope {:.6}", h2.lipschitz_beta),
        (None, None) => format!("no factorization; worst slope ratio {:.3e}", h2.lipschitz_beta),
    };
    println!("{:<16} {:<6} {}", "drain-via-phi", yn(h2.pass), h2_detail);

    let h3 = &report.h3;
    println!(
        "{:<16} {:<6} b({}) = {} vs |f({})| = {} (margin {})",
        "drain-capacity",
        yn(h3.pass),
        res.spec.u_max(),
        h3.b_at_umax,
        res.spec.u_max(),
        h3.f_at_umax.abs(),
        h3.margin
    );

    let nd = &report.nondegeneracy;
    println!(
        "{:<16} {:<6} longest affine stretch of f: {:.6} (window {:.6})",
        "nondegeneracy",
        yn(nd.nondegenerate),
        nd.longest_affine_window,
        nd.window
    );

    Ok(())
}

fn yn(pass: bool) -> &'static str {
    if pass {
        "yes"
    } else {
        "no"
    }
}
