//! Ready-made problem instances shared by the tests and the CLI.
//!
//! All four use the same degenerate diffusion `phi(u) = max(u - 0.6, 0)`,
//! the same step datum `0.7 * 1_{[1/2, 1]}` on `(0, 1)`, horizon `0.12`,
//! and differ only in the convective flux and the boundary drain:
//!
//! - `traffic-drain`: `f = u(1-u)`, `b = phi`; every hypothesis holds.
//! - `burgers-weak-drain`: `f = u^2/2`, `b = phi`; the drain is too weak
//!   for the peak flux (`b(1) = 0.4 < f(1) = 0.5`), so the invariant
//!   region is no longer guaranteed: data touching `u = 1` overshoot at
//!   the outflow cell, though this step datum stays inside it.
//! - `traffic-direct-drain`: `f = u(1-u)`, `b = u`; the drain does not
//!   factor through the diffusion, and the state develops a boundary
//!   layer instead of following the drain.
//! - `sealed`: `f = u(1-u)`, `b = 0`; mass is conserved exactly.

use crate::error::CoreError;
use crate::fv_solver::{DtRule, Grid, SchemeConfig};
use crate::numflux::{self, NumericalFlux};
use crate::problem::{BoundarySpec, DiffusionSpec, InitialData, ProblemSpec, ScalarFn};

/// Which structural hypotheses a preset deliberately breaks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScenarioTags {
    /// Boundary rule does not factor through the diffusion.
    pub h2_violated: bool,
    /// Drain capacity below the peak convective flux.
    pub h3_violated: bool,
}

/// A named problem with its reference discretization.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: &'static str,
    pub spec: ProblemSpec,
    pub tags: ScenarioTags,
    /// Reference cell size.
    pub default_dx: f64,
    /// Reference step: `dt = dx^2 / dt_divisor`.
    pub dt_divisor: f64,
}

pub const PRESET_NAMES: [&str; 4] =
    ["traffic-drain", "burgers-weak-drain", "traffic-direct-drain", "sealed"];

fn base(
    name: &'static str,
    f: ScalarFn,
    boundary: BoundarySpec,
    tags: ScenarioTags,
) -> Scenario {
    let diffusion = DiffusionSpec::threshold(0.6, 1.0).expect("reference diffusion is valid");
    let spec = ProblemSpec::new(
        f,
        diffusion,
        boundary,
        InitialData::step(0.5, 0.0, 0.7),
        (0.0, 1.0),
        0.12,
    )
    .expect("preset problem is valid");
    Scenario { name, spec, tags, default_dx: 0.01, dt_divisor: 5.0 }
}

pub fn preset(name: &str) -> Result<Scenario, CoreError> {
    match name {
        "traffic-drain" => Ok(base(
            "traffic-drain",
            ScalarFn::lwr(),
            BoundarySpec::with_beta(ScalarFn::threshold(0.6), ScalarFn::identity()),
            ScenarioTags::default(),
        )),
        "burgers-weak-drain" => Ok(base(
            "burgers-weak-drain",
            ScalarFn::burgers(),
            BoundarySpec::with_beta(ScalarFn::threshold(0.6), ScalarFn::identity()),
            ScenarioTags { h3_violated: true, ..Default::default() },
        )),
        "traffic-direct-drain" => Ok(base(
            "traffic-direct-drain",
            ScalarFn::lwr(),
            BoundarySpec::new(ScalarFn::identity()),
            ScenarioTags { h2_violated: true, ..Default::default() },
        )),
        "sealed" => Ok(base(
            "sealed",
            ScalarFn::lwr(),
            BoundarySpec::with_beta(ScalarFn::zero(), ScalarFn::zero()),
            ScenarioTags::default(),
        )),
        other => Err(CoreError::InvalidInput(format!(
            "unknown scenario '{other}' (expected one of {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

pub fn all() -> Vec<Scenario> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("preset names are valid")).collect()
}

impl Scenario {
    /// Uniform grid at cell size `dx` (rounded to a whole cell count).
    pub fn grid(&self, dx: f64) -> Result<Grid, CoreError> {
        let (a, b) = self.spec.domain;
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(CoreError::InvalidGrid(format!("dx = {dx} must be positive")));
        }
        let cells = ((b - a) / dx).round() as usize;
        Grid::uniform(a, b, cells)
    }

    /// The reference fixed step at cell size `dx`.
    pub fn fixed_dt(&self, dx: f64) -> f64 {
        dx * dx / self.dt_divisor
    }

    pub fn flux(&self, flux_name: &str) -> Result<NumericalFlux, CoreError> {
        numflux::by_name(flux_name, &self.spec.f, self.spec.u_max())
    }

    /// Scheme configuration with the named flux and the reference fixed
    /// step for `dx`.
    pub fn config(&self, flux_name: &str, dx: f64) -> Result<SchemeConfig, CoreError> {
        let mut cfg = SchemeConfig::new(self.flux(flux_name)?);
        cfg.dt = DtRule::Fixed(self.fixed_dt(dx));
        Ok(cfg)
    }

    /// Godunov flux and the reference step at the preset's default `dx`.
    pub fn standard_config(&self) -> SchemeConfig {
        self.config("godunov", self.default_dx).expect("godunov always constructs")
    }
}

// ---------------------------------------------------------------------------
