//! Flat run description and its resolution into solver inputs.
//!
//! A manifest starts from built-in defaults (the compliant drain
//! problem), optionally rebased onto a named scenario, then overridden
//! key by key from a config file and from flags.

use std::fs;
use std::path::Path;

use degenfv_core::fv_solver::{DtRule, Grid, SchemeConfig};
use degenfv_core::numflux::{self, NumericalFlux};
use degenfv_core::presets::PRESET_NAMES;
use degenfv_core::problem::{
    hypothesis_report, BoundarySpec, DiffusionSpec, InitialData, ProblemSpec, ScalarFn,
};

use crate::CliError;

#[derive(Clone, Copy, Debug)]
pub enum U0Key {
    Step { x0: f64, left: f64, right: f64 },
    Constant(f64),
}

#[derive(Clone, Copy, Debug)]
pub enum DtKey {
    /// `dt = dx^2 / divisor`; rescales when dx is overridden.
    Divisor(f64),
    Fixed(f64),
    Cfl,
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub name: String,
    /// Convective flux: burgers | lwr.
    pub f: String,
    pub u_c: f64,
    pub u_max: f64,
    /// Diffusion: threshold | none.
    pub phi: String,
    /// Boundary drain: zero | phi | scaled-phi | identity.
    pub b: String,
    pub b_scale: f64,
    pub u0: U0Key,
    pub domain: (f64, f64),
    pub horizon: f64,
    pub dx: f64,
    pub dt: DtKey,
    pub flux: String,
    pub epsilon: f64,
    pub snapshots: Vec<f64>,
    pub paper_literal_left_boundary: bool,
    pub seed: u64,
    /// Random initial-data pairs checked for L1 contraction during `run`.
    pub contraction_probes: u32,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            name: "traffic-drain".into(),
            f: "lwr".into(),
            u_c: 0.6,
            u_max: 1.0,
            phi: "threshold".into(),
            b: "phi".into(),
            b_scale: 1.0,
            u0: U0Key::Step { x0: 0.5, left: 0.0, right: 0.7 },
            domain: (0.0, 1.0),
            horizon: 0.12,
            dx: 0.01,
            dt: DtKey::Divisor(5.0),
            flux: "godunov".into(),
            epsilon: 0.0,
            snapshots: Vec::new(),
            paper_literal_left_boundary: false,
            seed: 0,
            contraction_probes: 0,
        }
    }
}

/// Everything a command needs, built once per run.
pub struct Resolved {
    pub name: String,
    pub spec: ProblemSpec,
    pub grid: Grid,
    pub config: SchemeConfig,
    pub flux: NumericalFlux,
    /// Drain does not factor through the diffusion; the boundary-layer
    /// check is expected to fail.
    pub h2_violated: bool,
    /// Drain capacity below the peak flux; the range check is expected
    /// to fail.
    pub h3_violated: bool,
    pub seed: u64,
    pub contraction_probes: u32,
}

impl Manifest {
    /// Rebase onto a named scenario: resets the problem shape, keeps
    /// discretization defaults.
    pub fn apply_scenario(&mut self, name: &str) -> Result<(), CliError> {
        let (f, b) = match name {
            "traffic-drain" => ("lwr", "phi"),
            "burgers-weak-drain" => ("burgers", "phi"),
            "traffic-direct-drain" => ("lwr", "identity"),
            "sealed" => ("lwr", "zero"),
            other => {
                return Err(CliError::config(format!(
                    "unknown scenario '{other}' (expected one of {})",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
        self.name = name.to_string();
        self.f = f.into();
        self.b = b.into();
        Ok(())
    }

    /// Apply `key = value` lines in file order; `#` starts a comment.
    pub fn apply_config(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!("{}:{}: expected key = value", path.display(), idx + 1))
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| {
                CliError::config(format!("{}:{}: {e}", path.display(), idx + 1))
            })?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "scenario" => self.apply_scenario(value).map_err(|e| match e {
                CliError::Config(m) | CliError::Diagnostic(m) => m,
            })?,
            "name" => self.name = value.into(),
            "f" => self.f = value.into(),
            "u_c" => self.u_c = num(value)?,
            "u_max" => self.u_max = num(value)?,
            "phi" => self.phi = value.into(),
            "b" => self.b = value.into(),
            "b_scale" => self.b_scale = num(value)?,
            "u0" => self.u0 = parse_u0(value)?,
            "domain" => {
                let parts = numbers(value)?;
                if parts.len() != 2 {
                    return Err(format!("domain needs two endpoints, got '{value}'"));
                }
                self.domain = (parts[0], parts[1]);
            }
            "horizon" => self.horizon = num(value)?,
            "dx" => self.dx = num(value)?,
            "dt" => {
                self.dt = if value == "cfl" { DtKey::Cfl } else { DtKey::Fixed(num(value)?) }
            }
            "dt_divisor" => self.dt = DtKey::Divisor(num(value)?),
            "flux" => self.flux = value.into(),
            "epsilon" => self.epsilon = num(value)?,
            "snapshots" => self.snapshots = parse_list(value)?,
            "paper_literal_left_boundary" => {
                self.paper_literal_left_boundary = match value {
                    "true" => true,
                    "false" => false,
                    other => return Err(format!("expected true or false, got '{other}'")),
                }
            }
            "seed" => self.seed = value.parse().map_err(|_| format!("bad seed '{value}'"))?,
            "contraction_probes" => {
                self.contraction_probes =
                    value.parse().map_err(|_| format!("bad probe count '{value}'"))?
            }
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let f = match self.f.as_str() {
            "burgers" => ScalarFn::burgers(),
            "lwr" => ScalarFn::lwr(),
            other => {
                return Err(CliError::config(format!("unknown f '{other}' (burgers | lwr)")))
            }
        };
        let diffusion = match self.phi.as_str() {
            "threshold" => DiffusionSpec::threshold(self.u_c, self.u_max)
                .map_err(|e| CliError::config(e.to_string()))?,
            "none" => {
                DiffusionSpec::none(self.u_max).map_err(|e| CliError::config(e.to_string()))?
            }
            other => {
                return Err(CliError::config(format!("unknown phi '{other}' (threshold | none)")))
            }
        };
        let boundary = match self.b.as_str() {
            "zero" => BoundarySpec::with_beta(ScalarFn::zero(), ScalarFn::zero()),
            "phi" => match self.phi.as_str() {
                "threshold" => BoundarySpec::with_beta(
                    ScalarFn::threshold(self.u_c),
                    ScalarFn::identity(),
                ),
                _ => BoundarySpec::with_beta(ScalarFn::zero(), ScalarFn::zero()),
            },
            "scaled-phi" => BoundarySpec::with_beta(
                ScalarFn::scaled_threshold(self.b_scale, self.u_c),
                ScalarFn::linear(self.b_scale),
            ),
            "identity" => BoundarySpec::new(ScalarFn::identity()),
            other => {
                return Err(CliError::config(format!(
                    "unknown b '{other}' (zero | phi | scaled-phi | identity)"
                )))
            }
        };
        let u0 = match self.u0 {
            U0Key::Step { x0, left, right } => InitialData::step(x0, left, right),
            U0Key::Constant(v) => InitialData::constant(v),
        };
        let spec = ProblemSpec::new(f, diffusion, boundary, u0, self.domain, self.horizon)
            .map_err(|e| CliError::config(e.to_string()))?;

        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(CliError::config(format!("dx = {} must be positive", self.dx)));
        }
        let cells = ((self.domain.1 - self.domain.0) / self.dx).round() as usize;
        let grid = Grid::uniform(self.domain.0, self.domain.1, cells)
            .map_err(|e| CliError::config(e.to_string()))?;

        let flux = numflux::by_name(&self.flux, &spec.f, spec.u_max())
            .map_err(|e| CliError::config(e.to_string()))?;
        let mut config = SchemeConfig::new(flux.clone());
        config.dt = match self.dt {
            DtKey::Divisor(d) => DtRule::Fixed(self.dx * self.dx / d),
            DtKey::Fixed(v) => DtRule::Fixed(v),
            DtKey::Cfl => DtRule::Cfl,
        };
        config.epsilon = self.epsilon;
        config.snapshot_times = self.snapshots.clone();
        config.paper_literal_left_boundary = self.paper_literal_left_boundary;

        let hyp = hypothesis_report(&spec).map_err(|e| CliError::config(e.to_string()))?;
        Ok(Resolved {
            name: self.name.clone(),
            spec,
            grid,
            config,
            flux,
            h2_violated: !hyp.h2.pass,
            h3_violated: !hyp.h3.pass,
            seed: self.seed,
            contraction_probes: self.contraction_probes,
        })
    }
}

fn num(value: &str) -> Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("'{value}' is not a number"))
        .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("'{value}' is not finite")) })
}

fn numbers(value: &str) -> Result<Vec<f64>, String> {
    value.split_whitespace().map(num).collect()
}

fn parse_u0(value: &str) -> Result<U0Key, String> {
    let mut parts = value.split_whitespace();
    match parts.next() {
        Some("step") => {
            let rest: Vec<f64> =
                parts.map(num).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            if rest.len() != 3 {
                return Err(format!("u0 = step needs 'step x0 left right', got '{value}'"));
            }
            Ok(U0Key::Step { x0: rest[0], left: rest[1], right: rest[2] })
        }
        Some("constant") => {
            let rest: Vec<f64> =
                parts.map(num).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
            if rest.len() != 1 {
                return Err(format!("u0 = constant needs one value, got '{value}'"));
            }
            Ok(U0Key::Constant(rest[0]))
        }
        _ => Err(format!("u0 must be 'step x0 left right' or 'constant v', got '{value}'")),
    }
}

/// Comma-separated floats, e.g. snapshot times or sweep values.
pub fn parse_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(num)
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.is_empty() {
                Err("expected at least one value".into())
            } else {
                Ok(v)
            }
        })
}
