//! Stationary problem `u + (f(u) - phi(u)_x)_x = g` with the nonlinear
//! boundary flux, and the resolvent step `u + lambda A(u) = w` behind it.
//!
//! The discrete system uses the same face fluxes as the evolution scheme
//! (the left boundary face is always `-b(u_1)` here, so both boundaries
//! drain by `b`). It is solved by damped pseudo-time marching,
//!
//! ```text
//! w <- w - dtau (w + lambda div Phi(w) - g)
//! ```
//!
//! with `dtau = safety dx^2 / (dx^2 + lambda (L_f dx + 2 L_phi))`; the
//! bracket is then a monotone convex combination in the stencil values, so
//! the iteration is a contraction with factor `1 - dtau` per sweep and
//! needs no Jacobians. Residuals are measured in the discrete L1 norm
//! `sum |res_i| dx`.

use crate::error::CoreError;
use crate::fv_solver::{phi_lipschitz, CellField, EffectiveProblem, Grid};
use crate::numflux::NumericalFlux;
use crate::problem::ProblemSpec;

/// Stationary data: the problem functions plus a cellwise source `g`.
#[derive(Clone, Debug)]
pub struct StationaryProblem {
    pub spec: ProblemSpec,
    pub g: CellField,
}

impl StationaryProblem {
    pub fn new(spec: ProblemSpec, g: CellField) -> Result<Self, CoreError> {
        let grid = g.grid();
        let span = spec.domain.1 - spec.domain.0;
        if (grid.a() - spec.domain.0).abs() > 1e-12 * span
            || (grid.b() - spec.domain.1).abs() > 1e-12 * span
        {
            return Err(CoreError::ConfigMismatch(format!(
                "source grid covers ({}, {}) but the problem domain is ({}, {})",
                grid.a(),
                grid.b(),
                spec.domain.0,
                spec.domain.1
            )));
        }
        if let Some(i) = g.values().iter().position(|v| !v.is_finite()) {
            return Err(CoreError::InvalidInput(format!(
                "source value at cell {i} is not finite"
            )));
        }
        Ok(Self { spec, g })
    }
}

/// Total flux `F(u_i, u_{i+1}) - (phi_{i+1} - phi_i)/dx` at every face,
/// boundary faces included.
#[derive(Clone, Debug)]
pub struct FaceFluxProfile {
    grid: Grid,
    faces: Vec<f64>,
}

impl FaceFluxProfile {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// One value per face; entry 0 is the left boundary.
    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn position(&self, i: usize) -> f64 {
        self.grid.face(i)
    }
}

fn faces_kernel(eff: &EffectiveProblem, flux: &NumericalFlux, dx: f64, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut faces = Vec::with_capacity(n + 1);
    faces.push(-eff.b(u[0]));
    let mut phi_prev = eff.phi(u[0]);
    for i in 0..n - 1 {
        let phi_next = eff.phi(u[i + 1]);
        faces.push(flux.eval(u[i], u[i + 1]) - (phi_next - phi_prev) / dx);
        phi_prev = phi_next;
    }
    faces.push(eff.b(u[n - 1]));
    faces
}

pub fn face_fluxes(
    u: &CellField,
    spec: &ProblemSpec,
    flux: &NumericalFlux,
) -> Result<FaceFluxProfile, CoreError> {
    let eff = EffectiveProblem::build(spec, 0.0)?;
    let grid = u.grid();
    Ok(FaceFluxProfile {
        grid,
        faces: faces_kernel(&eff, flux, grid.dx(), u.values()),
    })
}

/// Fill `res_i = u_i + lambda (Phi_{i+1/2} - Phi_{i-1/2})/dx - g_i` and
/// return `sum |res_i| dx`.
fn residual_kernel(
    eff: &EffectiveProblem,
    flux: &NumericalFlux,
    dx: f64,
    lambda: f64,
    u: &[f64],
    g: &[f64],
    res: &mut [f64],
) -> f64 {
    let n = u.len();
    let mut l1 = 0.0;
    let mut prev = -eff.b(u[0]);
    let mut phi_prev = eff.phi(u[0]);
    for i in 0..n {
        let next = if i + 1 == n {
            eff.b(u[n - 1])
        } else {
            let phi_next = eff.phi(u[i + 1]);
            let v = flux.eval(u[i], u[i + 1]) - (phi_next - phi_prev) / dx;
            phi_prev = phi_next;
            v
        };
        let r = u[i] + lambda * (next - prev) / dx - g[i];
        res[i] = r;
        l1 += r.abs();
        prev = next;
    }
    l1 * dx
}

/// Cellwise residual of the stationary system (`lambda = 1`).
pub fn assemble_residual(
    u: &CellField,
    prob: &StationaryProblem,
    flux: &NumericalFlux,
) -> Result<CellField, CoreError> {
    if u.grid() != prob.g.grid() {
        return Err(CoreError::ConfigMismatch(
            "state and source live on different grids".into(),
        ));
    }
    let eff = EffectiveProblem::build(&prob.spec, 0.0)?;
    let mut res = vec![0.0; u.grid().cells()];
    residual_kernel(
        &eff,
        flux,
        u.grid().dx(),
        1.0,
        u.values(),
        prob.g.values(),
        &mut res,
    );
    CellField::from_values(u.grid(), res)
}

/// Marching controls. The tolerance is an absolute bound on the discrete
/// L1 residual, so it should scale with the cell count; `for_grid` uses
/// `1e-10 * cells`.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: u64,
    pub safety: f64,
}

impl SolveOptions {
    pub fn for_grid(grid: &Grid) -> Self {
        Self { tol: 1e-10 * grid.cells() as f64, max_iters: 10_000_000, safety: 0.9 }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<(), CoreError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CoreError::InvalidInput(format!("tolerance {} must be positive", self.tol)));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(CoreError::InvalidInput(format!(
                "marching safety {} outside (0, 1]",
                self.safety
            )));
        }
        Ok(())
    }
}

fn march(
    spec: &ProblemSpec,
    flux: &NumericalFlux,
    lambda: f64,
    rhs: &CellField,
    opts: &SolveOptions,
) -> Result<(CellField, u64, f64), CoreError> {
    opts.validate()?;
    let eff = EffectiveProblem::build(spec, 0.0)?;
    let grid = rhs.grid();
    let dx = grid.dx();
    let dtau = opts.safety * dx * dx
        / (dx * dx + lambda * (flux.f_lipschitz() * dx + 2.0 * phi_lipschitz(spec)));

    let mut w = rhs.clone();
    let mut res = vec![0.0; grid.cells()];
    let mut iter: u64 = 0;
    loop {
        let l1 = residual_kernel(&eff, flux, dx, lambda, w.values(), rhs.values(), &mut res);
        if !l1.is_finite() {
            let cell = res.iter().position(|r| !r.is_finite()).unwrap_or(0);
            return Err(CoreError::NanDetected { step: iter as usize, cell });
        }
        if l1 < opts.tol {
            return Ok((w, iter, l1));
        }
        if iter >= opts.max_iters {
            return Err(CoreError::NoConvergence { iterations: iter, residual: l1, tol: opts.tol });
        }
        for (wi, ri) in w.values_mut().iter_mut().zip(&res) {
            *wi -= dtau * ri;
        }
        iter += 1;
    }
}

/// A converged stationary state with its face fluxes.
#[derive(Clone, Debug)]
pub struct StationarySolution {
    pub u: CellField,
    pub faces: FaceFluxProfile,
    pub iterations: u64,
    pub residual_l1: f64,
}

pub fn solve_stationary(
    prob: &StationaryProblem,
    flux: &NumericalFlux,
    opts: &SolveOptions,
) -> Result<StationarySolution, CoreError> {
    prob.spec.validate()?;
    let (u, iterations, residual_l1) = march(&prob.spec, flux, 1.0, &prob.g, opts)?;
    let faces = face_fluxes(&u, &prob.spec, flux)?;
    Ok(StationarySolution { u, faces, iterations, residual_l1 })
}

/// Solve `u + lambda A(u) = w` for the scheme's spatial operator `A`.
/// `lambda = 0` returns `w` unchanged.
pub fn resolvent(
    lambda: f64,
    w: &CellField,
    spec: &ProblemSpec,
    flux: &NumericalFlux,
    opts: &SolveOptions,
) -> Result<CellField, CoreError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(CoreError::InvalidInput(format!(
            "resolvent parameter {lambda} must be finite and non-negative"
        )));
    }
    if lambda == 0.0 {
        return Ok(w.clone());
    }
    march(spec, flux, lambda, w, opts).map(|(u, _, _)| u)
}

/// Flux regularity of a stationary state: the largest total-flux jump
/// across a cell, and how far the boundary faces sit from `b` (zero by
/// construction for converged states; reported to make that checkable).
#[derive(Clone, Copy, Debug)]
pub struct FluxRegularityReport {
    pub max_cell_jump: f64,
    pub left_residual: f64,
    pub right_residual: f64,
}

pub fn flux_regularity_report(
    sol: &StationarySolution,
    prob: &StationaryProblem,
) -> FluxRegularityReport {
    let faces = sol.faces.faces();
    let u = sol.u.values();
    let b = &prob.spec.boundary.b;
    let max_cell_jump = faces
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0_f64, f64::max);
    FluxRegularityReport {
        max_cell_jump,
        left_residual: (faces[0] + b.eval(u[0])).abs(),
        right_residual: (faces[faces.len() - 1] - b.eval(u[u.len() - 1])).abs(),
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numflux::godunov;
    use crate::problem::{BoundarySpec, DiffusionSpec, InitialData, ProblemSpec, ScalarFn};

    fn traffic_spec() -> ProblemSpec {
        ProblemSpec::new(
            ScalarFn::lwr(),
            DiffusionSpec::threshold(0.6, 1.0).unwrap(),
            BoundarySpec::with_beta(ScalarFn::threshold(0.6), ScalarFn::identity()),
            InitialData::step(0.5, 0.0, 0.7),
            (0.0, 1.0),
            0.12,
        )
        .unwrap()
    }

    fn setup(cells: usize, g_value: f64) -> (StationaryProblem, crate::numflux::NumericalFlux, SolveOptions) {
        let spec = traffic_spec();
        let grid = Grid::uniform(0.0, 1.0, cells).unwrap();
        let g = CellField::constant(grid, g_value);
        let flux = godunov(&spec.f, spec.u_max());
        let opts = SolveOptions::for_grid(&grid);
        (StationaryProblem::new(spec, g).unwrap(), flux, opts)
    }

    #[test]
    fn saturated_source_is_an_exact_fixed_point() {
        // With b = 0 and g = u_max: u = u_max has zero transport
        // (f(1) = 0), flat diffusion and sealed boundaries, so the guess
        // u = g already has a bitwise-zero residual.
        let spec = ProblemSpec::new(
            ScalarFn::lwr(),
            DiffusionSpec::threshold(0.6, 1.0).unwrap(),
            BoundarySpec::with_beta(ScalarFn::zero(), ScalarFn::zero()),
            InitialData::constant(1.0),
            (0.0, 1.0),
            0.12,
        )
        .unwrap();
        let grid = Grid::uniform(0.0, 1.0, 25).unwrap();
        let g = CellField::constant(grid, 1.0);
        let flux = godunov(&spec.f, 1.0);
        let prob = StationaryProblem::new(spec, g).unwrap();
        let opts = SolveOptions::for_grid(&grid);
        let sol = solve_stationary(&prob, &flux, &opts).unwrap();
        assert_eq!(sol.iterations, 0, "perfect guess should converge immediately");
        assert_eq!(sol.u.values(), prob.g.values());
    }

    #[test]
    fn converged_solve_satisfies_residual_and_mass_identity() {
        let (prob, flux, opts) = setup(50, 1.0);
        let sol = solve_stationary(&prob, &flux, &opts).unwrap();
        assert!(sol.residual_l1 < opts.tol);
        let res = assemble_residual(&sol.u, &prob, &flux).unwrap();
        let l1: f64 = res.values().iter().map(|r| r.abs()).sum::<f64>() * res.grid().dx();
        assert!((l1 - sol.residual_l1).abs() <= 1e-15 + 1e-9 * l1);

        // Integrating the system: sum u dx + b(u_1) + b(u_I) = sum g dx,
        // up to the residual mass.
        let b = &prob.spec.boundary.b;
        let u = sol.u.values();
        let lhs = sol.u.mass() + b.eval(u[0]) + b.eval(u[u.len() - 1]);
        assert!((lhs - prob.g.mass()).abs() <= opts.tol);
    }

    #[test]
    fn boundary_face_residuals_vanish_bitwise() {
        let (prob, flux, opts) = setup(40, 0.8);
        let sol = solve_stationary(&prob, &flux, &opts).unwrap();
        let rep = flux_regularity_report(&sol, &prob);
        assert_eq!(rep.left_residual, 0.0);
        assert_eq!(rep.right_residual, 0.0);
        assert!(rep.max_cell_jump > 0.0);
    }

    #[test]
    fn refined_grid_shrinks_flux_jumps() {
        let (coarse_prob, flux, coarse_opts) = setup(25, 1.0);
        let (fine_prob, _, fine_opts) = setup(50, 1.0);
        let a = solve_stationary(&coarse_prob, &flux, &coarse_opts).unwrap();
        let b = solve_stationary(&fine_prob, &flux, &fine_opts).unwrap();
        let ja = flux_regularity_report(&a, &coarse_prob).max_cell_jump;
        let jb = flux_regularity_report(&b, &fine_prob).max_cell_jump;
        assert!(
            jb <= 0.6 * ja,
            "jump {jb} at dx = 0.02 vs {ja} at dx = 0.04"
        );
    }

    #[test]
    fn resolvent_at_zero_is_identity() {
        let spec = traffic_spec();
        let grid = Grid::uniform(0.0, 1.0, 30).unwrap();
        let w = CellField::from_values(
            grid,
            (0..30).map(|i| 0.5 + 0.4 * (i as f64 / 29.0)).collect(),
        )
        .unwrap();
        let flux = godunov(&spec.f, 1.0);
        let opts = SolveOptions::for_grid(&grid);
        let u = resolvent(0.0, &w, &spec, &flux, &opts).unwrap();
        assert_eq!(u.values(), w.values());
        assert!(resolvent(-1.0, &w, &spec, &flux, &opts).is_err());
    }

    #[test]
    fn resolvent_mass_identity() {
        let spec = traffic_spec();
        let grid = Grid::uniform(0.0, 1.0, 30).unwrap();
        let w = CellField::constant(grid, 0.9);
        let flux = godunov(&spec.f, 1.0);
        let opts = SolveOptions::for_grid(&grid);
        let lambda = 0.25;
        let u = resolvent(lambda, &w, &spec, &flux, &opts).unwrap();
        let b = &spec.boundary.b;
        let uv = u.values();
        let lhs = u.mass() + lambda * (b.eval(uv[0]) + b.eval(uv[uv.len() - 1]));
        assert!((lhs - w.mass()).abs() <= opts.tol);
    }

    #[test]
    fn exhausted_budget_reports_no_convergence() {
        let (prob, flux, mut opts) = setup(50, 1.0);
        opts.max_iters = 40;
        match solve_stationary(&prob, &flux, &opts) {
            Err(CoreError::NoConvergence { iterations, residual, tol }) => {
                assert_eq!(iterations, 40);
                assert!(residual > tol);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
