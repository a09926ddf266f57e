//! Certificates computed from recorded trajectories and stationary states.
//!
//! Everything in this module is a pure function of its inputs: no solver
//! state is consulted, so a stored record can be re-audited later and must
//! produce bit-identical reports.
//!
//! The discrete entropy residual is the Crandall-Majda cell inequality for
//! the Kruzhkov pair `(|u - k|, G_k)` with `G_k(u, v) =
//! F(u max k, v max k) - F(u min k, v min k)` and diffusion entropy
//! `|phi(u) - phi(k)|`. For interior cells the scheme satisfies it to
//! rounding under the step-size bound; at the boundary cells the constant
//! `k` is not preserved (the faces drain `b`), which adds the data terms
//! `|b(u) - b(k)|` and `-|f(k) eta - b(k)|`. Those boundary rows are
//! reported but carry no sign guarantee of their own.

use crate::error::CoreError;
use crate::fv_solver::{CellField, EffectiveProblem, SolutionRecord};
use crate::numflux::NumericalFlux;
use crate::problem::{ProblemSpec, Side};

/// Interior entropy residuals and the mass identity hold to rounding;
/// this is the shared "to rounding" tolerance per cell.
pub const ROUNDING_TOL: f64 = 1e-12;

/// Two states closer than this are treated as equal when a sign is needed.
const EQ_TOL: f64 = 1e-12;

/// One named check, CSV-serializable.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub check: String,
    pub pass: bool,
    /// The measured quantity the tolerance applies to.
    pub magnitude: f64,
    pub tolerance: f64,
    /// `(step, cell)` of the worst offender, when one exists.
    pub witness: Option<(usize, usize)>,
}

impl CheckResult {
    pub fn new(
        check: impl Into<String>,
        pass: bool,
        magnitude: f64,
        tolerance: f64,
        witness: Option<(usize, usize)>,
    ) -> Self {
        Self { check: check.into(), pass, magnitude, tolerance, witness }
    }
}

// ---------------------------------------------------------------------------
// Mass balance
// ---------------------------------------------------------------------------

/// Per-step discrete mass identity
/// `mass' = mass - dt (right_flux - left_flux)` checked against the
/// recorded fluxes; exact up to accumulation rounding `1e-13 * cells`.
#[derive(Clone, Copy, Debug)]
pub struct MassBalanceReport {
    pub max_error: f64,
    pub witness_step: Option<usize>,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn mass_balance_check(rec: &SolutionRecord) -> MassBalanceReport {
    let tolerance = 1e-13 * rec.grid().cells() as f64;
    let mut prev = rec.initial_field().mass();
    let mut max_error = 0.0;
    let mut witness_step = None;
    for s in rec.steps() {
        let expected = prev - s.dt * (s.right_flux - s.left_flux);
        let e = (s.mass - expected).abs();
        if e > max_error {
            max_error = e;
            witness_step = Some(s.step);
        }
        prev = s.mass;
    }
    MassBalanceReport { max_error, witness_step, tolerance, pass: max_error <= tolerance }
}

// ---------------------------------------------------------------------------
// Maximum principle
// ---------------------------------------------------------------------------

/// First cell leaving `[0, u_max]` beyond rounding.
#[derive(Clone, Copy, Debug)]
pub struct RangeViolation {
    pub step: usize,
    pub cell: usize,
    pub time: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct MaxPrincipleReport {
    pub min: f64,
    pub max: f64,
    pub first_violation: Option<RangeViolation>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Scan every stored state for values outside `[0, u_max]` (tolerance
/// `1e-12`); reports the global range and the first offending cell.
pub fn max_principle_scan(rec: &SolutionRecord, u_max: f64) -> MaxPrincipleReport {
    let tol = ROUNDING_TOL;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut first = None;
    for k in 0..rec.times().len() {
        let state = rec.state(k);
        for (i, &v) in state.iter().enumerate() {
            lo = lo.min(v);
            hi = hi.max(v);
            if first.is_none() && (v < -tol || v > u_max + tol) {
                first = Some(RangeViolation {
                    step: k,
                    cell: i,
                    time: rec.times()[k],
                    value: v,
                });
            }
        }
    }
    MaxPrincipleReport { min: lo, max: hi, first_violation: first, tolerance: tol, pass: first.is_none() }
}

// ---------------------------------------------------------------------------
// Entropy residuals
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct EntropyWitness {
    pub step: usize,
    pub cell: usize,
    pub level: f64,
}

#[derive(Clone, Debug)]
pub struct EntropyReport {
    /// Largest interior cell residual over all steps and levels; the
    /// scheme guarantees this is `<= 0` up to rounding.
    pub max_interior: f64,
    pub interior_witness: Option<EntropyWitness>,
    /// Largest boundary-cell residuals including the `|b(u)-b(k)|` and
    /// `-|f(k) eta - b(k)|` data terms; informational.
    pub max_left_boundary: f64,
    pub max_right_boundary: f64,
    pub tolerance: f64,
    /// Interior residuals within tolerance.
    pub pass: bool,
}

/// Entropy residuals of a recorded trajectory at the given levels.
///
/// The supplied flux must be the one the record was produced with (matched
/// by name); the spec must be the same problem. Viscous records rebuild
/// the perturbed `phi` and `b` from the spec, so records of problems whose
/// boundary rule does not factor through the diffusion cannot be audited
/// at `epsilon > 0`.
pub fn entropy_residual(
    rec: &SolutionRecord,
    spec: &ProblemSpec,
    flux: &NumericalFlux,
    levels: &[f64],
) -> Result<EntropyReport, CoreError> {
    if rec.flux_name() != flux.name() {
        return Err(CoreError::FluxMismatch {
            recorded: rec.flux_name().to_string(),
            supplied: flux.name().to_string(),
        });
    }
    let eff = EffectiveProblem::build(spec, rec.epsilon())?;
    let grid = rec.grid();
    let n = grid.cells();
    let dx = grid.dx();

    let phiks: Vec<f64> = levels.iter().map(|&k| eff.phi(k)).collect();
    let bks: Vec<f64> = levels.iter().map(|&k| eff.b(k)).collect();
    let fks: Vec<f64> = levels.iter().map(|&k| spec.f.eval(k)).collect();

    let mut phis = vec![0.0; n];
    let mut psi = vec![0.0; n];
    let mut gf = vec![0.0; n - 1];

    let mut max_interior = f64::NEG_INFINITY;
    let mut witness = None;
    let mut max_left = f64::NEG_INFINITY;
    let mut max_right = f64::NEG_INFINITY;

    for m in 0..rec.n_steps() {
        let u = rec.state(m);
        let up = rec.state(m + 1);
        let dt = rec.steps()[m].dt;
        let lam = dt / dx;
        let mu = dt / (dx * dx);
        for i in 0..n {
            phis[i] = eff.phi(u[i]);
        }
        let b0 = eff.b(u[0]);
        let bn = eff.b(u[n - 1]);

        for (kk, &k) in levels.iter().enumerate() {
            for i in 0..n {
                psi[i] = (phis[i] - phiks[kk]).abs();
            }
            for j in 0..n - 1 {
                gf[j] = flux.entropy_eval(k, u[j], u[j + 1]);
            }
            for i in 1..n - 1 {
                let r = (up[i] - k).abs() - (u[i] - k).abs() + lam * (gf[i] - gf[i - 1])
                    - mu * (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]);
                if r > max_interior {
                    max_interior = r;
                    witness = Some(EntropyWitness { step: m + 1, cell: i, level: k });
                }
            }
            let rl = (up[0] - k).abs() - (u[0] - k).abs()
                + lam * (gf[0] + (b0 - bks[kk]).abs())
                - mu * (psi[1] - psi[0])
                - lam * (fks[kk] + bks[kk]).abs();
            let rr = (up[n - 1] - k).abs() - (u[n - 1] - k).abs()
                + lam * ((bn - bks[kk]).abs() - gf[n - 2])
                + mu * (psi[n - 1] - psi[n - 2])
                - lam * (bks[kk] - fks[kk]).abs();
            max_left = max_left.max(rl);
            max_right = max_right.max(rr);
        }
    }

    if rec.n_steps() == 0 || levels.is_empty() {
        max_interior = 0.0;
        max_left = 0.0;
        max_right = 0.0;
    }
    Ok(EntropyReport {
        max_interior,
        interior_witness: witness,
        max_left_boundary: max_left,
        max_right_boundary: max_right,
        tolerance: ROUNDING_TOL,
        pass: max_interior <= ROUNDING_TOL,
    })
}

// ---------------------------------------------------------------------------
// L1 contraction between two runs
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ContractionReport {
    /// `||u_k - v_k||_{L1}` for every stored state.
    pub distances: Vec<f64>,
    /// Largest single-step increase `d_{k+1} - d_k`.
    pub max_increase: f64,
    pub witness_step: Option<usize>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Stepwise L1 distance between two records of the same scheme on the
/// same grid; the distance must be non-increasing (tolerance `1e-12`).
/// Records with different grids, fluxes, step sequences, viscosities or
/// boundary orientations are rejected rather than compared.
pub fn l1_contraction_check(
    a: &SolutionRecord,
    b: &SolutionRecord,
) -> Result<ContractionReport, CoreError> {
    if a.grid() != b.grid() {
        return Err(CoreError::ConfigMismatch("records use different grids".into()));
    }
    if a.flux_name() != b.flux_name() {
        return Err(CoreError::FluxMismatch {
            recorded: a.flux_name().to_string(),
            supplied: b.flux_name().to_string(),
        });
    }
    if a.epsilon() != b.epsilon() {
        return Err(CoreError::ConfigMismatch(format!(
            "records use different viscosities ({} vs {})",
            a.epsilon(),
            b.epsilon()
        )));
    }
    if a.paper_literal_left_boundary() != b.paper_literal_left_boundary() {
        return Err(CoreError::ConfigMismatch(
            "records use different left-boundary orientations".into(),
        ));
    }
    if a.n_steps() != b.n_steps() {
        return Err(CoreError::ConfigMismatch(format!(
            "records have different step counts ({} vs {})",
            a.n_steps(),
            b.n_steps()
        )));
    }
    for (sa, sb) in a.steps().iter().zip(b.steps()) {
        if sa.dt != sb.dt {
            return Err(CoreError::ConfigMismatch(format!(
                "step {} sizes differ ({} vs {})",
                sa.step, sa.dt, sb.dt
            )));
        }
    }

    let dx = a.grid().dx();
    let mut distances = Vec::with_capacity(a.n_steps() + 1);
    for k in 0..=a.n_steps() {
        let d: f64 = a
            .state(k)
            .iter()
            .zip(b.state(k))
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
            * dx;
        distances.push(d);
    }
    let mut max_increase = f64::NEG_INFINITY;
    let mut witness_step = None;
    for k in 0..distances.len().saturating_sub(1) {
        let inc = distances[k + 1] - distances[k];
        if inc > max_increase {
            max_increase = inc;
            witness_step = Some(k + 1);
        }
    }
    if distances.len() < 2 {
        max_increase = 0.0;
        witness_step = None;
    }
    Ok(ContractionReport {
        distances,
        max_increase,
        witness_step,
        tolerance: ROUNDING_TOL,
        pass: max_increase <= ROUNDING_TOL,
    })
}

// ---------------------------------------------------------------------------
// Comparison with a stationary state
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct IntegralCheckReport {
    /// Largest per-step violation of the dissipation inequality.
    pub max_violation: f64,
    pub witness_step: Option<usize>,
    pub slack: f64,
    pub pass: bool,
}

/// Dissipation inequality of a trajectory against a stationary state `U`
/// with source `g`: for every recorded step,
///
/// ```text
/// (D^{m+1} - D^m) / dt  <=  sum_i s_i (U_i - g_i) dx  +  sum_{v=U} |U_i - g_i| dx
/// ```
///
/// where `D^m = ||v^m - U||_{L1}` and `s_i` is the sign of
/// `v^{m+1}_i - U_i` (zero within `1e-12`). This follows from the L1
/// contraction of the step map, so it holds exactly when `U` is an exact
/// fixed point; an approximate stationary state pollutes the bound by its
/// own residual, which the slack must absorb.
pub fn integral_solution_check(
    rec: &SolutionRecord,
    stationary: &CellField,
    source: &CellField,
    slack: f64,
) -> Result<IntegralCheckReport, CoreError> {
    if stationary.grid() != rec.grid() || source.grid() != rec.grid() {
        return Err(CoreError::ConfigMismatch(
            "stationary state and source must live on the record's grid".into(),
        ));
    }
    if rec.paper_literal_left_boundary() {
        return Err(CoreError::ConfigMismatch(
            "the dissipation inequality is only valid for the draining left boundary".into(),
        ));
    }
    let dx = rec.grid().dx();
    let us = stationary.values();
    let gs = source.values();

    let dist = |v: &[f64]| -> f64 {
        v.iter().zip(us).map(|(x, y)| (x - y).abs()).sum::<f64>() * dx
    };

    let mut max_violation = f64::NEG_INFINITY;
    let mut witness_step = None;
    let mut d_prev = dist(rec.state(0));
    for m in 0..rec.n_steps() {
        let v = rec.state(m + 1);
        let dt = rec.steps()[m].dt;
        let d = dist(v);
        let mut rhs = 0.0;
        for i in 0..v.len() {
            let diff = v[i] - us[i];
            if diff.abs() <= EQ_TOL {
                rhs += (us[i] - gs[i]).abs();
            } else {
                rhs += diff.signum() * (us[i] - gs[i]);
            }
        }
        rhs *= dx;
        let violation = (d - d_prev) / dt - rhs;
        if violation > max_violation {
            max_violation = violation;
            witness_step = Some(m + 1);
        }
        d_prev = d;
    }
    if rec.n_steps() == 0 {
        max_violation = 0.0;
    }
    Ok(IntegralCheckReport {
        max_violation,
        witness_step,
        slack,
        pass: max_violation <= slack,
    })
}

// ---------------------------------------------------------------------------
// Stationary entropy residual
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct StationaryEntropyReport {
    pub max_residual: f64,
    /// `(cell, level)` of the worst interior residual.
    pub witness: Option<(usize, f64)>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Interior entropy inequality of a stationary state: for each level `k`,
///
/// ```text
/// (G_{i+1/2} - G_{i-1/2} - (psi_{i+1} - 2 psi_i + psi_{i-1}) / dx) / dx
///     + s_i (u_i - g_i) - [u_i = k] |u_i - g_i|  <=  tol
/// ```
///
/// with `s_i = sign(u_i - k)` (zero within `1e-12`) and
/// `psi = |phi(u) - phi(k)|`. Holds for exact solutions of the discrete
/// system; the tolerance absorbs the cellwise solver residual.
pub fn stationary_entropy_residual(
    u: &CellField,
    source: &CellField,
    spec: &ProblemSpec,
    flux: &NumericalFlux,
    levels: &[f64],
    tolerance: f64,
) -> Result<StationaryEntropyReport, CoreError> {
    if u.grid() != source.grid() {
        return Err(CoreError::ConfigMismatch(
            "state and source live on different grids".into(),
        ));
    }
    let eff = EffectiveProblem::build(spec, 0.0)?;
    let grid = u.grid();
    let n = grid.cells();
    let dx = grid.dx();
    let uv = u.values();
    let gv = source.values();
    let phis: Vec<f64> = uv.iter().map(|&s| eff.phi(s)).collect();

    let mut max_residual = f64::NEG_INFINITY;
    let mut witness = None;
    for &k in levels {
        let phik = eff.phi(k);
        for i in 1..n - 1 {
            let gr = flux.entropy_eval(k, uv[i], uv[i + 1]);
            let gl = flux.entropy_eval(k, uv[i - 1], uv[i]);
            let psi_l = (phis[i - 1] - phik).abs();
            let psi_c = (phis[i] - phik).abs();
            let psi_r = (phis[i + 1] - phik).abs();
            let diff = uv[i] - k;
            let data = if diff.abs() <= EQ_TOL {
                -(uv[i] - gv[i]).abs()
            } else {
                diff.signum() * (uv[i] - gv[i])
            };
            let r = (gr - gl - (psi_r - 2.0 * psi_c + psi_l) / dx) / dx + data;
            if r > max_residual {
                max_residual = r;
                witness = Some((i, k));
            }
        }
    }
    if levels.is_empty() || n < 3 {
        max_residual = 0.0;
    }
    Ok(StationaryEntropyReport {
        max_residual,
        witness,
        tolerance,
        pass: max_residual <= tolerance,
    })
}

// ---------------------------------------------------------------------------
// Boundary layer indicator
// ---------------------------------------------------------------------------

/// Ratio of the steepest cell-to-cell slope within `width` cells of the
/// chosen boundary to the median absolute slope over the middle third of
/// the domain. Scale-invariant; `0/0` is reported as 1 and a boundary
/// slope over a flat interior as infinity.
///
/// Requires `1 <= width <= cells / 4` so the window and the interior
/// sample cannot overlap.
pub fn boundary_layer_indicator(field: &CellField, width: usize, side: Side) -> f64 {
    let n = field.grid().cells();
    assert!(
        width >= 1 && 4 * width <= n,
        "window width {width} must satisfy 1 <= width <= cells/4 = {}",
        n / 4
    );
    let dx = field.grid().dx();
    let u = field.values();
    let slope = |i: usize| (u[i + 1] - u[i]).abs() / dx;

    let face_range = match side {
        Side::Left => 0..width,
        Side::Right => (n - 1 - width)..(n - 1),
    };
    let peak = face_range.map(slope).fold(0.0_f64, f64::max);

    let (lo, hi) = (n / 3, 2 * n / 3);
    let mut interior: Vec<f64> = (lo..hi.saturating_sub(1).max(lo)).map(slope).collect();
    interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if interior.is_empty() {
        0.0
    } else if interior.len() % 2 == 1 {
        interior[interior.len() / 2]
    } else {
        0.5 * (interior[interior.len() / 2 - 1] + interior[interior.len() / 2])
    };

    if median == 0.0 {
        if peak == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        peak / median
    }
}

// ---------------------------------------------------------------------------
// Viscous norms
// ---------------------------------------------------------------------------

/// Space-time norms of one viscous run.
#[derive(Clone, Copy, Debug)]
pub struct ViscousNorms {
    pub epsilon: f64,
    /// `epsilon * sum_n dt sum_faces ((du/dx)^2) dx`
    pub grad_l2: f64,
    /// `sum_n dt (sum_i phi_eps(u_i)^2 dx + sum_faces ((d phi_eps/dx)^2) dx)`
    pub phi_h1: f64,
    /// `sum_n dt (|b_eps(u_1)| + |b_eps(u_I)|)`
    pub boundary_l1: f64,
}

#[derive(Clone, Debug)]
pub struct ViscousReport {
    /// One entry per record, in the given (decreasing-epsilon) order.
    pub norms: Vec<ViscousNorms>,
    /// Worst growth factor relative to the largest-epsilon entry, per
    /// norm: `[grad_l2, phi_h1, boundary_l1]`.
    pub max_growth: [f64; 3],
    pub growth_limit: f64,
    pub pass: bool,
}

/// Uniform-boundedness estimates along a vanishing-viscosity sequence.
///
/// Records must be ordered by strictly decreasing `epsilon` and share a
/// grid. Each norm may shrink as `epsilon` drops but must not grow past
/// `growth_limit = 2` times its value at the largest `epsilon` (absolute
/// floor `1e-14`).
pub fn viscous_estimates(
    spec: &ProblemSpec,
    records: &[&SolutionRecord],
) -> Result<ViscousReport, CoreError> {
    if records.len() < 2 {
        return Err(CoreError::InvalidInput(
            "need at least two viscosities to compare".into(),
        ));
    }
    for pair in records.windows(2) {
        if pair[1].epsilon() >= pair[0].epsilon() {
            return Err(CoreError::InvalidInput(format!(
                "viscosities must decrease strictly: {} then {}",
                pair[0].epsilon(),
                pair[1].epsilon()
            )));
        }
        if pair[1].grid() != pair[0].grid() {
            return Err(CoreError::ConfigMismatch(
                "viscous records must share a grid".into(),
            ));
        }
    }

    let mut norms = Vec::with_capacity(records.len());
    for rec in records {
        let eff = EffectiveProblem::build(spec, rec.epsilon())?;
        let grid = rec.grid();
        let n = grid.cells();
        let dx = grid.dx();
        let mut grad = 0.0;
        let mut phi_h1 = 0.0;
        let mut bdry = 0.0;
        for m in 0..rec.n_steps() {
            let u = rec.state(m);
            let dt = rec.steps()[m].dt;
            let mut g = 0.0;
            let mut pl2 = 0.0;
            let mut pg = 0.0;
            let mut phi_prev = eff.phi(u[0]);
            pl2 += phi_prev * phi_prev;
            for i in 0..n - 1 {
                let phi_next = eff.phi(u[i + 1]);
                let du = (u[i + 1] - u[i]) / dx;
                let dphi = (phi_next - phi_prev) / dx;
                g += du * du;
                pg += dphi * dphi;
                pl2 += phi_next * phi_next;
                phi_prev = phi_next;
            }
            grad += dt * g * dx;
            phi_h1 += dt * (pl2 + pg) * dx;
            bdry += dt * (eff.b(u[0]).abs() + eff.b(u[n - 1]).abs());
        }
        norms.push(ViscousNorms {
            epsilon: rec.epsilon(),
            grad_l2: rec.epsilon() * grad,
            phi_h1,
            boundary_l1: bdry,
        });
    }

    let growth_limit = 2.0;
    let base = [norms[0].grad_l2, norms[0].phi_h1, norms[0].boundary_l1];
    let mut max_growth = [0.0_f64; 3];
    for nm in &norms {
        let vals = [nm.grad_l2, nm.phi_h1, nm.boundary_l1];
        for j in 0..3 {
            let factor = if vals[j] <= 1e-14 {
                0.0
            } else if base[j] <= 1e-14 {
                f64::INFINITY
            } else {
                vals[j] / base[j]
            };
            max_growth[j] = max_growth[j].max(factor);
        }
    }
    let pass = max_growth.iter().all(|&g| g <= growth_limit);
    Ok(ViscousReport { norms, max_growth, growth_limit, pass })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fv_solver::{init_cells, run, DtRule, Grid, SchemeConfig, StepRecord};
    use crate::numflux::{godunov, rusanov_default};
    use crate::problem::{BoundarySpec, DiffusionSpec, InitialData, ProblemSpec, ScalarFn};
    use crate::stationary::{solve_stationary, SolveOptions, StationaryProblem};

    fn traffic_spec(horizon: f64) -> ProblemSpec {
        ProblemSpec::new(
            ScalarFn::lwr(),
            DiffusionSpec::threshold(0.6, 1.0).unwrap(),
            BoundarySpec::with_beta(ScalarFn::threshold(0.6), ScalarFn::identity()),
            InitialData::step(0.5, 0.0, 0.7),
            (0.0, 1.0),
            horizon,
        )
        .unwrap()
    }

    fn short_run(cells: usize, horizon: f64) -> (ProblemSpec, SolutionRecord) {
        let spec = traffic_spec(horizon);
        let grid = Grid::uniform(0.0, 1.0, cells).unwrap();
        let cfg = SchemeConfig::new(godunov(&spec.f, 1.0));
        let rec = run(&spec, &grid, &cfg).unwrap();
        (spec, rec)
    }

    #[test]
    fn mass_balance_passes_on_a_run() {
        let (_, rec) = short_run(50, 0.005);
        let rep = mass_balance_check(&rec);
        assert!(rep.pass, "max error {}", rep.max_error);
        assert!(rep.witness_step.is_some());
    }

    #[test]
    fn max_principle_flags_planted_violation() {
        let grid = Grid::uniform(0.0, 1.0, 10).unwrap();
        let mut states = vec![vec![0.5; 10], vec![0.5; 10], vec![0.5; 10]];
        states[1][3] = 1.2;
        states[2][7] = 1.4;
        let steps = (1..3)
            .map(|s| StepRecord {
                step: s,
                time: s as f64 * 1e-3,
                dt: 1e-3,
                mass: 0.5,
                left_flux: 0.0,
                right_flux: 0.0,
            })
            .collect();
        let rec = SolutionRecord::from_parts(
            grid,
            "godunov".into(),
            0.0,
            1e-3,
            false,
            vec![0.0, 1e-3, 2e-3],
            states,
            steps,
            vec![(0.0, CellField::constant(grid, 0.5))],
        );
        let rep = max_principle_scan(&rec, 1.0);
        assert!(!rep.pass);
        assert_eq!(rep.max, 1.4);
        let v = rep.first_violation.unwrap();
        assert_eq!((v.step, v.cell), (1, 3));
        assert_eq!(v.value, 1.2);
    }

    #[test]
    fn entropy_residual_nonpositive_on_a_run() {
        let (spec, rec) = short_run(50, 0.01);
        let flux = godunov(&spec.f, 1.0);
        let rep = entropy_residual(&rec, &spec, &flux, &[0.0, 0.3, 0.6, 0.9, 1.0]).unwrap();
        assert!(rep.pass, "interior residual {}", rep.max_interior);
        assert!(rep.max_interior <= 1e-12);
        assert!(rep.max_left_boundary.is_finite());
        assert!(rep.max_right_boundary.is_finite());
    }

    #[test]
    fn entropy_residual_rejects_wrong_flux() {
        let (spec, rec) = short_run(20, 0.002);
        let other = rusanov_default(&spec.f, 1.0);
        match entropy_residual(&rec, &spec, &other, &[0.5]) {
            Err(CoreError::FluxMismatch { recorded, supplied }) => {
                assert_eq!(recorded, "godunov");
                assert_eq!(supplied, "rusanov");
            }
            other => panic!("expected FluxMismatch, got {other:?}"),
        }
    }

    #[test]
    fn contraction_holds_for_ordered_data() {
        let spec_lo = traffic_spec(0.01);
        let mut spec_hi = spec_lo.clone();
        spec_hi.u0 = InitialData::step(0.5, 0.1, 0.8);
        let grid = Grid::uniform(0.0, 1.0, 40).unwrap();
        let cfg = SchemeConfig::new(godunov(&spec_lo.f, 1.0));
        let a = run(&spec_lo, &grid, &cfg).unwrap();
        let b = run(&spec_hi, &grid, &cfg).unwrap();
        let rep = l1_contraction_check(&a, &b).unwrap();
        assert!(rep.pass, "increase {}", rep.max_increase);
        assert_eq!(rep.distances.len(), a.n_steps() + 1);
        assert!(rep.distances[0] > 0.0);
    }

    #[test]
    fn contraction_rejects_mismatched_records() {
        let (_, a) = short_run(20, 0.002);
        let (_, b) = short_run(40, 0.002);
        assert!(matches!(
            l1_contraction_check(&a, &b),
            Err(CoreError::ConfigMismatch(_))
        ));
    }

    #[test]
    fn dissipation_inequality_against_stationary_state() {
        let spec = traffic_spec(0.01);
        let grid = Grid::uniform(0.0, 1.0, 20).unwrap();
        let g = CellField::constant(grid, 0.5);
        let prob = StationaryProblem::new(traffic_spec(0.01), g.clone()).unwrap();
        let flux = godunov(&spec.f, 1.0);
        let opts = SolveOptions::for_grid(&grid).with_tol(1e-12 * grid.cells() as f64);
        let sol = solve_stationary(&prob, &flux, &opts).unwrap();

        let cfg = SchemeConfig::new(godunov(&spec.f, 1.0));
        let rec = run(&spec, &grid, &cfg).unwrap();
        let rep = integral_solution_check(&rec, &sol.u, &g, 1e-8).unwrap();
        assert!(rep.pass, "violation {}", rep.max_violation);
    }

    #[test]
    fn stationary_entropy_residual_nonpositive() {
        let spec = traffic_spec(0.01);
        let grid = Grid::uniform(0.0, 1.0, 25).unwrap();
        let g = CellField::constant(grid, 1.0);
        let prob = StationaryProblem::new(spec.clone(), g.clone()).unwrap();
        let flux = godunov(&spec.f, 1.0);
        let sol = solve_stationary(&prob, &flux, &SolveOptions::for_grid(&grid)).unwrap();
        let rep =
            stationary_entropy_residual(&sol.u, &g, &spec, &flux, &[0.0, 0.3, 0.7, 1.0], 1e-7)
                .unwrap();
        assert!(rep.pass, "residual {}", rep.max_residual);
    }

    #[test]
    fn layer_indicator_measures_relative_steepness() {
        let grid = Grid::uniform(0.0, 1.0, 40).unwrap();
        // Linear ramp: every slope equal, ratio 1 on both sides.
        let ramp = CellField::from_values(grid, (0..40).map(|i| i as f64 * 0.01).collect()).unwrap();
        assert!((boundary_layer_indicator(&ramp, 3, Side::Right) - 1.0).abs() <= 1e-12);
        assert!((boundary_layer_indicator(&ramp, 3, Side::Left) - 1.0).abs() <= 1e-12);

        // Flat everywhere: 0/0 reads as 1.
        let flat = CellField::constant(grid, 0.3);
        assert_eq!(boundary_layer_indicator(&flat, 3, Side::Right), 1.0);

        // Flat interior with a jump at the right boundary: infinite ratio.
        let mut vals = vec![0.2; 40];
        vals[39] = 0.9;
        let jump = CellField::from_values(grid, vals).unwrap();
        assert_eq!(boundary_layer_indicator(&jump, 3, Side::Right), f64::INFINITY);

        // Ramp interior, 8x steeper cells near the right boundary.
        let mut vals: Vec<f64> = (0..40).map(|i| i as f64 * 0.01).collect();
        for i in 37..40 {
            vals[i] = vals[36] + (i - 36) as f64 * 0.08;
        }
        let layered = CellField::from_values(grid, vals).unwrap();
        let r = boundary_layer_indicator(&layered, 3, Side::Right);
        assert!((r - 8.0).abs() <= 1e-9, "ratio {r}");

        // Scale invariance.
        let scaled = CellField::from_values(
            grid,
            layered.values().iter().map(|v| 7.3 * v).collect(),
        )
        .unwrap();
        let rs = boundary_layer_indicator(&scaled, 3, Side::Right);
        assert!((r - rs).abs() <= 1e-9 * r.max(1.0));
    }

    #[test]
    #[should_panic(expected = "window width")]
    fn layer_indicator_rejects_wide_window() {
        let grid = Grid::uniform(0.0, 1.0, 12).unwrap();
        let f = CellField::constant(grid, 0.1);
        boundary_layer_indicator(&f, 4, Side::Left);
    }

    #[test]
    fn viscous_norms_stay_bounded_as_epsilon_vanishes() {
        let spec = traffic_spec(0.01);
        let grid = Grid::uniform(0.0, 1.0, 30).unwrap();
        let cfg = SchemeConfig::new(godunov(&spec.f, 1.0));
        let recs: Vec<_> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&e| crate::fv_solver::viscous_run(&spec, &grid, &cfg, e).unwrap())
            .collect();
        let refs: Vec<&SolutionRecord> = recs.iter().collect();
        let rep = viscous_estimates(&spec, &refs).unwrap();
        assert!(rep.pass, "growth {:?}", rep.max_growth);
        assert_eq!(rep.norms.len(), 3);
        assert!(rep.norms[0].boundary_l1 > 0.0);

        let reversed: Vec<&SolutionRecord> = recs.iter().rev().collect();
        assert!(viscous_estimates(&spec, &reversed).is_err());
    }

    #[test]
    fn fixed_dt_runs_are_bit_reproducible() {
        let spec = traffic_spec(0.004);
        let grid = Grid::uniform(0.0, 1.0, 50).unwrap();
        let mut cfg = SchemeConfig::new(godunov(&spec.f, 1.0));
        cfg.dt = DtRule::Fixed(2e-5);
        let a = run(&spec, &grid, &cfg).unwrap();
        let b = run(&spec, &grid, &cfg).unwrap();
        for k in 0..=a.n_steps() {
            assert_eq!(a.state(k), b.state(k));
        }
        let u0 = init_cells(&spec, &grid).unwrap();
        assert_eq!(a.state(0), u0.values());
    }
}
