//! Explicit finite-volume marching for the degenerate parabolic problem.
//!
//! One step on a uniform grid of `I` cells writes, with total face fluxes
//! `Phi_{i+1/2} = F(u_i, u_{i+1}) - (phi(u_{i+1}) - phi(u_i)) / dx` at the
//! interior faces,
//!
//! ```text
//! u_i' = u_i - (dt/dx) (Phi_{i+1/2} - Phi_{i-1/2})
//! ```
//!
//! The boundary faces carry the flux relation directly: the right face is
//! `b(u_I)` and the left face is `-b(u_1)`, so both boundaries drain mass at
//! rate `b` and the discrete mass identity
//! `sum u' dx = sum u dx - dt (b(u_1) + b(u_I))` holds to rounding. A
//! compatibility switch flips the left face to `+b(u_1)` (see
//! `SchemeConfig::paper_literal_left_boundary`), which feeds mass in on the
//! left instead; contraction and entropy guarantees only cover the default
//! orientation.
//!
//! Under the time-step bound of [`compute_dt`] the update is monotone in all
//! three stencil arguments, which is what every diagnostic in this crate
//! leans on.

use crate::error::CoreError;
use crate::numflux::NumericalFlux;
use crate::problem::{lipschitz_estimate, BetaTable, ProblemSpec, ScalarFn};

/// Relative slop when deciding that the remaining time to a stop fits in
/// one step; avoids trailing micro-steps from accumulated rounding.
const STOP_SNAP: f64 = 1e-9;

/// Uniform one-dimensional grid on `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    cells: usize,
}

impl Grid {
    pub fn uniform(a: f64, b: f64, cells: usize) -> Result<Self, CoreError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(CoreError::InvalidGrid(format!(
                "domain ({a}, {b}) is not a bounded interval"
            )));
        }
        if cells < 3 {
            return Err(CoreError::InvalidGrid(format!(
                "{cells} cells; need at least 3 for an interior"
            )));
        }
        Ok(Self { a, b, cells })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.cells as f64
    }

    /// Center of cell `i` (0-based).
    pub fn center(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.dx()
    }

    /// Position of face `i` (0-based; face 0 is the left boundary).
    pub fn face(&self, i: usize) -> f64 {
        self.a + i as f64 * self.dx()
    }
}

/// Piecewise-constant state: one value per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField {
    grid: Grid,
    values: Vec<f64>,
}

impl CellField {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, CoreError> {
        if values.len() != grid.cells() {
            return Err(CoreError::InvalidGrid(format!(
                "{} values for {} cells",
                values.len(),
                grid.cells()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.cells()] }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum_i u_i dx`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    /// `sum_i |u_i - v_i| dx` on a shared grid.
    pub fn l1_distance(&self, other: &CellField) -> Result<f64, CoreError> {
        if self.grid != other.grid {
            return Err(CoreError::ConfigMismatch(
                "L1 distance requires matching grids".into(),
            ));
        }
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(s * self.grid.dx())
    }

    /// Block-average onto a coarser grid over the same interval; the cell
    /// counts must divide evenly.
    pub fn restrict_to(&self, coarse: Grid) -> Result<CellField, CoreError> {
        if coarse.a() != self.grid.a() || coarse.b() != self.grid.b() {
            return Err(CoreError::InvalidGrid(
                "restriction requires the same interval".into(),
            ));
        }
        let fine = self.grid.cells();
        let n = coarse.cells();
        if n == 0 || fine % n != 0 {
            return Err(CoreError::InvalidGrid(format!(
                "cannot restrict {fine} cells onto {n}"
            )));
        }
        let r = fine / n;
        let values = (0..n)
            .map(|j| self.values[j * r..(j + 1) * r].iter().sum::<f64>() / r as f64)
            .collect();
        CellField::from_values(coarse, values)
    }
}

/// How the step size is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtRule {
    /// Use this step verbatim; it is checked against the stability bound.
    Fixed(f64),
    /// Derive the step from the grid and the sampled Lipschitz constants.
    Cfl,
}

/// Scheme parameters for a run.
#[derive(Clone, Debug)]
pub struct SchemeConfig {
    pub flux: NumericalFlux,
    pub dt: DtRule,
    /// Multiplier on the stability bound when `dt` is [`DtRule::Cfl`];
    /// must lie in `(0, 1]`. The default 0.9 also absorbs the extra
    /// per-argument slope of the default Rusanov speed.
    pub cfl_safety: f64,
    /// Artificial viscosity; `phi` becomes `phi + epsilon * u` and the
    /// boundary rule is rebuilt through `beta` (hypothesis (H2)).
    pub epsilon: f64,
    /// Extra times at which the full state is kept as a labeled snapshot;
    /// `t = 0` and the horizon are always included.
    pub snapshot_times: Vec<f64>,
    /// Flip the left boundary face to `+b(u_1)`, matching a transcription
    /// in which both boundary faces carry the same sign. Mass then enters
    /// on the left and the contraction/entropy guarantees do not apply.
    pub paper_literal_left_boundary: bool,
}

impl SchemeConfig {
    pub fn new(flux: NumericalFlux) -> Self {
        Self {
            flux,
            dt: DtRule::Cfl,
            cfl_safety: 0.9,
            epsilon: 0.0,
            snapshot_times: Vec::new(),
            paper_literal_left_boundary: false,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(CoreError::InvalidInput(format!(
                "cfl_safety {} outside (0, 1]",
                self.cfl_safety
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(CoreError::InvalidInput(format!(
                "epsilon {} must be finite and non-negative",
                self.epsilon
            )));
        }
        if let DtRule::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CoreError::InvalidInput(format!(
                    "fixed dt {dt} must be positive and finite"
                )));
            }
        }
        Ok(())
    }
}

/// Effective problem functions after adding `epsilon * u` to the diffusion.
///
/// For `epsilon > 0` the boundary rule must factor through the diffusion
/// (hypothesis (H2)): with `b = beta(phi)` the perturbed rule is
/// `beta(phi + epsilon u)`. An explicit `beta` on the boundary spec is used
/// when present; otherwise one is reconstructed by sampling, and specs where
/// that fails are rejected.
pub(crate) struct EffectiveProblem {
    phi: ScalarFn,
    b: ScalarFn,
    epsilon: f64,
    beta: Option<BetaKind>,
}

enum BetaKind {
    Explicit(ScalarFn),
    Sampled(BetaTable),
}

impl EffectiveProblem {
    pub(crate) fn build(spec: &ProblemSpec, epsilon: f64) -> Result<Self, CoreError> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(CoreError::InvalidInput(format!(
                "epsilon {epsilon} must be finite and non-negative"
            )));
        }
        let beta = if epsilon == 0.0 {
            None
        } else if let Some(beta) = &spec.boundary.beta {
            Some(BetaKind::Explicit(beta.clone()))
        } else {
            let report = crate::problem::check_h2(spec, 2048)?;
            match (report.pass, report.beta) {
                (true, Some(table)) => Some(BetaKind::Sampled(table)),
                _ => return Err(CoreError::NoBeta),
            }
        };
        Ok(Self {
            phi: spec.diffusion.phi.clone(),
            b: spec.boundary.b.clone(),
            epsilon,
            beta,
        })
    }

    #[inline]
    pub(crate) fn phi(&self, u: f64) -> f64 {
        self.phi.eval(u) + self.epsilon * u
    }

    #[inline]
    pub(crate) fn b(&self, u: f64) -> f64 {
        match &self.beta {
            None => self.b.eval(u),
            Some(BetaKind::Explicit(beta)) => beta.eval(self.phi(u)),
            Some(BetaKind::Sampled(table)) => table.eval(self.phi(u)),
        }
    }
}

/// Sampled Lipschitz constant of the problem's diffusion on `[0, u_max]`.
pub fn phi_lipschitz(spec: &ProblemSpec) -> f64 {
    lipschitz_estimate(&spec.diffusion.phi, 0.0, spec.u_max())
}

/// Resolve the step size for a run.
///
/// The monotonicity bound is `dt <= dx^2 / (L_f dx + 2 (L_phi + epsilon))`
/// with sampled Lipschitz constants. Under [`DtRule::Cfl`] the bound is
/// scaled by `cfl_safety`; a fixed step is validated against the bare bound
/// and rejected when it exceeds it. A problem with no transport and no
/// diffusion has no bound; the CFL rule then returns infinity and the
/// caller's stop times cut the actual steps.
pub fn compute_dt(spec: &ProblemSpec, grid: &Grid, config: &SchemeConfig) -> Result<f64, CoreError> {
    let dx = grid.dx();
    let denom = config.flux.f_lipschitz() * dx + 2.0 * (phi_lipschitz(spec) + config.epsilon);
    match config.dt {
        DtRule::Fixed(dt) => {
            if denom > 0.0 {
                let bound = dx * dx / denom;
                if dt > bound {
                    return Err(CoreError::TimeStepTooLarge { dt, bound });
                }
            }
            Ok(dt)
        }
        DtRule::Cfl => {
            if denom > 0.0 {
                Ok(config.cfl_safety * dx * dx / denom)
            } else {
                Ok(f64::INFINITY)
            }
        }
    }
}

/// Cell averages of the initial data; values must sit in `[0, u_max]` up to
/// rounding.
pub fn init_cells(spec: &ProblemSpec, grid: &Grid) -> Result<CellField, CoreError> {
    let u_max = spec.u_max();
    let mut values = Vec::with_capacity(grid.cells());
    for i in 0..grid.cells() {
        let v = spec.u0.cell_average(grid.face(i), grid.face(i + 1));
        if !v.is_finite() || v < -1e-12 || v > u_max + 1e-12 {
            return Err(CoreError::InitOutOfRange { cell: i, value: v, u_max });
        }
        values.push(v);
    }
    CellField::from_values(*grid, values)
}

/// Record of one accepted step.
#[derive(Clone, Copy, Debug)]
pub struct StepRecord {
    pub step: usize,
    /// Time after the step.
    pub time: f64,
    pub dt: f64,
    /// `sum u dx` after the step.
    pub mass: f64,
    /// Total flux at the left boundary face during the step.
    pub left_flux: f64,
    /// Total flux at the right boundary face during the step.
    pub right_flux: f64,
}

/// Full history of a run: every intermediate state, per-step flux records
/// and the requested snapshots.
///
/// States are kept densely (steps x cells) because the contraction,
/// entropy and comparison diagnostics all consume consecutive pairs; at the
/// resolutions this crate targets that is a few megabytes.
#[derive(Clone, Debug)]
pub struct SolutionRecord {
    grid: Grid,
    flux_name: String,
    epsilon: f64,
    dt_nominal: f64,
    paper_literal_left_boundary: bool,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    steps: Vec<StepRecord>,
    snapshots: Vec<(f64, CellField)>,
}

impl SolutionRecord {
    /// Assemble a record from raw parts (crate-internal, for diagnostics
    /// tests that need planted trajectories).
    #[cfg(test)]
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        grid: Grid,
        flux_name: String,
        epsilon: f64,
        dt_nominal: f64,
        paper_literal_left_boundary: bool,
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
        steps: Vec<StepRecord>,
        snapshots: Vec<(f64, CellField)>,
    ) -> Self {
        Self {
            grid,
            flux_name,
            epsilon,
            dt_nominal,
            paper_literal_left_boundary,
            times,
            states,
            steps,
            snapshots,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn flux_name(&self) -> &str {
        &self.flux_name
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The resolved step size (the last step to each stop may be shorter).
    pub fn dt_nominal(&self) -> f64 {
        self.dt_nominal
    }

    pub fn paper_literal_left_boundary(&self) -> bool {
        self.paper_literal_left_boundary
    }

    /// Number of accepted steps.
    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    /// Times of the stored states; entry 0 is the initial time.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// State after `k` steps (`k = 0` is the initial state).
    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k]
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn snapshots(&self) -> &[(f64, CellField)] {
        &self.snapshots
    }

    pub fn initial_field(&self) -> CellField {
        CellField::from_values(self.grid, self.states[0].clone()).expect("stored state fits grid")
    }

    pub fn final_field(&self) -> CellField {
        CellField::from_values(self.grid, self.states.last().expect("non-empty").clone())
            .expect("stored state fits grid")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }
}

/// One explicit update; returns the boundary face fluxes used.
fn step_kernel(
    eff: &EffectiveProblem,
    flux: &NumericalFlux,
    literal_left: bool,
    dx: f64,
    dt: f64,
    u: &[f64],
    phis: &mut Vec<f64>,
    out: &mut Vec<f64>,
) -> (f64, f64) {
    let n = u.len();
    phis.clear();
    phis.extend(u.iter().map(|&s| eff.phi(s)));
    let bl = eff.b(u[0]);
    let br = eff.b(u[n - 1]);
    let left_face = if literal_left { bl } else { -bl };
    let lam = dt / dx;

    out.clear();
    let mut prev = left_face;
    for i in 0..n {
        let next = if i + 1 == n {
            br
        } else {
            flux.eval(u[i], u[i + 1]) - (phis[i + 1] - phis[i]) / dx
        };
        out.push(u[i] - lam * (next - prev));
        prev = next;
    }
    (left_face, br)
}

/// One explicit step at the configured step size.
pub fn step(
    state: &CellField,
    spec: &ProblemSpec,
    config: &SchemeConfig,
) -> Result<CellField, CoreError> {
    config.validate()?;
    let grid = state.grid();
    let dt = compute_dt(spec, &grid, config)?;
    if !dt.is_finite() {
        return Err(CoreError::InvalidInput(
            "step size is unbounded for this problem; use a fixed dt".into(),
        ));
    }
    let eff = EffectiveProblem::build(spec, config.epsilon)?;
    let mut phis = Vec::new();
    let mut out = Vec::new();
    step_kernel(
        &eff,
        &config.flux,
        config.paper_literal_left_boundary,
        grid.dx(),
        dt,
        state.values(),
        &mut phis,
        &mut out,
    );
    if let Some(cell) = out.iter().position(|v| !v.is_finite()) {
        return Err(CoreError::NanDetected { step: 1, cell });
    }
    CellField::from_values(grid, out)
}

/// March the scheme to the horizon, recording every step.
///
/// Stops are the configured snapshot times inside `(0, T)` plus `T` itself;
/// each stop is hit exactly (the last step to a stop is shortened, and a
/// remainder within a relative `1e-9` of the nominal step is folded into
/// one step rather than left as a micro-step).
pub fn run(
    spec: &ProblemSpec,
    grid: &Grid,
    config: &SchemeConfig,
) -> Result<SolutionRecord, CoreError> {
    spec.validate()?;
    config.validate()?;
    let dt_nominal = compute_dt(spec, grid, config)?;
    let eff = EffectiveProblem::build(spec, config.epsilon)?;
    let u0 = init_cells(spec, grid)?;
    let horizon = spec.horizon;

    let mut stops: Vec<f64> = config
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < horizon)
        .collect();
    stops.push(horizon);
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup();

    let mut record = SolutionRecord {
        grid: *grid,
        flux_name: config.flux.name().to_string(),
        epsilon: config.epsilon,
        dt_nominal,
        paper_literal_left_boundary: config.paper_literal_left_boundary,
        times: vec![0.0],
        states: vec![u0.values().to_vec()],
        steps: Vec::new(),
        snapshots: vec![(0.0, u0.clone())],
    };

    let dx = grid.dx();
    let mut u = u0.values().to_vec();
    let mut out = Vec::with_capacity(u.len());
    let mut phis = Vec::with_capacity(u.len());
    let mut t = 0.0;
    let mut step_no = 0usize;

    for &stop in &stops {
        if stop <= 0.0 {
            continue;
        }
        while t < stop {
            let remaining = stop - t;
            let dt = if remaining <= dt_nominal * (1.0 + STOP_SNAP) {
                remaining
            } else {
                dt_nominal
            };
            let (lf, rf) = step_kernel(
                &eff,
                &config.flux,
                config.paper_literal_left_boundary,
                dx,
                dt,
                &u,
                &mut phis,
                &mut out,
            );
            std::mem::swap(&mut u, &mut out);
            step_no += 1;
            if let Some(cell) = u.iter().position(|v| !v.is_finite()) {
                return Err(CoreError::NanDetected { step: step_no, cell });
            }
            t = if dt == remaining { stop } else { t + dt };
            let mass = u.iter().sum::<f64>() * dx;
            record.steps.push(StepRecord {
                step: step_no,
                time: t,
                dt,
                mass,
                left_flux: lf,
                right_flux: rf,
            });
            record.times.push(t);
            record.states.push(u.clone());
        }
        record
            .snapshots
            .push((stop, CellField::from_values(*grid, u.clone())?));
    }
    Ok(record)
}

/// Run with the diffusion perturbed to `phi + epsilon * u` and the boundary
/// rule rebuilt through `beta`. `epsilon = 0` is exactly [`run`].
pub fn viscous_run(
    spec: &ProblemSpec,
    grid: &Grid,
    config: &SchemeConfig,
    epsilon: f64,
) -> Result<SolutionRecord, CoreError> {
    let mut cfg = config.clone();
    cfg.epsilon = epsilon;
    run(spec, grid, &cfg)
}

// ---------------------------------------------------------------------------
