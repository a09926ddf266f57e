//! Problem data and hypothesis checks.
//!
//! A problem instance collects the convective flux `f`, the degenerate
//! diffusion `phi` (zero on `[0, u_c]`, strictly increasing on
//! `[u_c, u_max]`), the non-decreasing boundary flux `b`, initial data,
//! domain and horizon. Well-posedness rests on four checkable hypotheses:
//!
//! - compatibility at zero: `f(0) = 0` and `b(0) = 0`;
//! - factorization: `b = beta(phi)` with `beta` non-decreasing Lipschitz;
//! - boundary-flux dominance: `b(u_max) >= |f(u_max)|`;
//! - non-degeneracy: `f` is not affine on subintervals of `[0, u_c]`.
//!
//! All checks are sampled semi-decisions reporting numeric evidence; they
//! never mutate the problem data.

use std::fmt;
use std::sync::Arc;

use crate::error::CoreError;

/// Default sample count for the hypothesis checks.
pub const DEFAULT_HYPOTHESIS_SAMPLES: usize = 10_000;

/// Measured `beta` slopes above this are treated as unbounded.
const BETA_RATIO_BOUND: f64 = 1e8;

/// Two `phi` samples closer than this are considered equal states.
const PHI_EQUAL_EPS: f64 = 1e-14;

// ---------------------------------------------------------------------------
// Scalar functions
// ---------------------------------------------------------------------------

#[derive(Clone)]
enum Kind {
    Zero,
    /// `c * u`
    Linear(f64),
    /// `slope * u + offset`
    Affine { slope: f64, offset: f64 },
    /// `u^2 / 2`
    Burgers,
    /// `u (1 - u)` on `[0, 1]`, zero outside
    Lwr,
    /// `scale * max(u - u_c, 0)`
    Threshold { u_c: f64, scale: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A named scalar function with a declared Lipschitz constant.
///
/// The declared constant refers to the state interval the function is used
/// on (presets use `[0, 1]`); evaluation itself is total so that states
/// which temporarily leave the interval stay well-defined.
#[derive(Clone)]
pub struct ScalarFn {
    name: String,
    lipschitz: f64,
    kind: Kind,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({}, L={})", self.name, self.lipschitz)
    }
}

impl ScalarFn {
    pub fn zero() -> Self {
        Self { name: "zero".into(), lipschitz: 0.0, kind: Kind::Zero }
    }

    pub fn identity() -> Self {
        Self { name: "identity".into(), lipschitz: 1.0, kind: Kind::Linear(1.0) }
    }

    /// `u -> c * u`
    pub fn linear(c: f64) -> Self {
        Self { name: format!("linear({c})"), lipschitz: c.abs(), kind: Kind::Linear(c) }
    }

    /// `u -> slope * u + offset`
    pub fn affine(slope: f64, offset: f64) -> Self {
        Self {
            name: format!("affine({slope},{offset})"),
            lipschitz: slope.abs(),
            kind: Kind::Affine { slope, offset },
        }
    }

    /// `u -> u^2 / 2`, Lipschitz constant declared on `[0, 1]`.
    pub fn burgers() -> Self {
        Self { name: "burgers".into(), lipschitz: 1.0, kind: Kind::Burgers }
    }

    /// `u -> u (1 - u)` on `[0, 1]`, zero outside.
    pub fn lwr() -> Self {
        Self { name: "lwr".into(), lipschitz: 1.0, kind: Kind::Lwr }
    }

    /// `u -> max(u - u_c, 0)`
    pub fn threshold(u_c: f64) -> Self {
        Self {
            name: format!("threshold({u_c})"),
            lipschitz: 1.0,
            kind: Kind::Threshold { u_c, scale: 1.0 },
        }
    }

    /// `u -> scale * max(u - u_c, 0)`
    pub fn scaled_threshold(scale: f64, u_c: f64) -> Self {
        Self {
            name: format!("threshold({u_c})*{scale}"),
            lipschitz: scale.abs(),
            kind: Kind::Threshold { u_c, scale },
        }
    }

    pub fn custom(
        name: impl Into<String>,
        lipschitz: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), lipschitz, kind: Kind::Custom(Arc::new(f)) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Linear(c) => c * u,
            Kind::Affine { slope, offset } => slope * u + offset,
            Kind::Burgers => 0.5 * u * u,
            Kind::Lwr => {
                if (0.0..=1.0).contains(&u) {
                    u * (1.0 - u)
                } else {
                    0.0
                }
            }
            Kind::Threshold { u_c, scale } => scale * (u - u_c).max(0.0),
            Kind::Custom(f) => f(u),
        }
    }

    /// Structural check on `[lo, hi]`: finite values, sampled slopes within
    /// the declared Lipschitz constant (relative slack 1e-8).
    pub fn validate_on(&self, lo: f64, hi: f64) -> Result<(), CoreError> {
        let n = 4097;
        for j in 0..n {
            let x = lo + (hi - lo) * j as f64 / (n - 1) as f64;
            let v = self.eval(x);
            if !v.is_finite() {
                return Err(CoreError::InvalidSpec(format!(
                    "{}({x}) = {v} is not finite",
                    self.name
                )));
            }
        }
        let est = lipschitz_estimate(self, lo, hi);
        if est > self.lipschitz * (1.0 + 1e-8) + 1e-14 {
            return Err(CoreError::InvalidSpec(format!(
                "{}: sampled slope {est} exceeds declared Lipschitz constant {}",
                self.name, self.lipschitz
            )));
        }
        Ok(())
    }
}

/// Largest sampled chord slope of `g` on `[lo, hi]`.
///
/// Sample points are multiples of a fixed absolute quantum, so the estimate
/// is monotone under interval inclusion; the steepest segments are bisected
/// down to a floor width of `2^-26` where chord slopes still carry ~8
/// significant digits. Chord slopes never exceed the true constant, so the
/// result is a lower bound converging from below.
pub fn lipschitz_estimate(g: &ScalarFn, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    // Quantum grows with the span so the point count stays bounded.
    let mut quantum = 2f64.powi(-12);
    while (hi - lo) / quantum > 65536.0 {
        quantum *= 2.0;
    }

    let mut points = Vec::with_capacity(((hi - lo) / quantum) as usize + 2);
    points.push(lo);
    let mut m = (lo / quantum).floor() + 1.0;
    while m * quantum < hi {
        if m * quantum > lo {
            points.push(m * quantum);
        }
        m += 1.0;
    }
    points.push(hi);

    let vals: Vec<f64> = points.iter().map(|&x| g.eval(x)).collect();
    let slope = |x0: f64, v0: f64, x1: f64, v1: f64| -> f64 {
        if x1 > x0 {
            ((v1 - v0) / (x1 - x0)).abs()
        } else {
            0.0
        }
    };

    let mut best = 0.0f64;
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    for j in 0..points.len() - 1 {
        let s = slope(points[j], vals[j], points[j + 1], vals[j + 1]);
        best = best.max(s);
        segs.push((points[j], vals[j], points[j + 1], vals[j + 1]));
    }

    // Deterministic refinement of the steepest segments.
    segs.sort_by(|a, b| {
        slope(b.0, b.1, b.2, b.3).partial_cmp(&slope(a.0, a.1, a.2, a.3)).unwrap()
    });
    let floor_width = 2f64.powi(-26);
    for seg in segs.into_iter().take(8) {
        let (mut x0, mut v0, mut x1, mut v1) = seg;
        while x1 - x0 > floor_width {
            let xm = 0.5 * (x0 + x1);
            let vm = g.eval(xm);
            let left = slope(x0, v0, xm, vm);
            let right = slope(xm, vm, x1, v1);
            best = best.max(left).max(right);
            if left >= right {
                x1 = xm;
                v1 = vm;
            } else {
                x0 = xm;
                v0 = vm;
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Problem building blocks
// ---------------------------------------------------------------------------

/// Degenerate diffusion: `phi = 0` on `[0, u_c]`, strictly increasing on
/// `[u_c, u_max]`.
#[derive(Clone, Debug)]
pub struct DiffusionSpec {
    pub u_c: f64,
    pub u_max: f64,
    pub phi: ScalarFn,
}

impl DiffusionSpec {
    pub fn new(u_c: f64, u_max: f64, phi: ScalarFn) -> Result<Self, CoreError> {
        if !(u_max > 0.0) || !u_max.is_finite() {
            return Err(CoreError::InvalidSpec(format!("u_max = {u_max} must be positive")));
        }
        if !(0.0..=u_max).contains(&u_c) {
            return Err(CoreError::InvalidSpec(format!(
                "u_c = {u_c} must lie in [0, u_max = {u_max}]"
            )));
        }
        phi.validate_on(0.0, u_max)?;

        let n = 4097;
        let mut prev: Option<(f64, f64)> = None;
        for j in 0..n {
            let s = u_max * j as f64 / (n - 1) as f64;
            let p = phi.eval(s);
            if s <= u_c && p.abs() > 1e-12 {
                return Err(CoreError::InvalidSpec(format!(
                    "phi({s}) = {p} but phi must vanish on [0, u_c = {u_c}]"
                )));
            }
            if let Some((sp, pp)) = prev {
                if sp >= u_c && p <= pp {
                    return Err(CoreError::InvalidSpec(format!(
                        "phi must increase strictly on [u_c, u_max]: phi({sp}) = {pp}, phi({s}) = {p}"
                    )));
                }
            }
            if s >= u_c {
                prev = Some((s, p));
            }
        }
        Ok(Self { u_c, u_max, phi })
    }

    /// `phi(u) = max(u - u_c, 0)`.
    pub fn threshold(u_c: f64, u_max: f64) -> Result<Self, CoreError> {
        Self::new(u_c, u_max, ScalarFn::threshold(u_c))
    }

    /// No diffusion at all (`u_c = u_max`, `phi = 0`).
    pub fn none(u_max: f64) -> Result<Self, CoreError> {
        Self::new(u_max, u_max, ScalarFn::zero())
    }
}

/// Domain endpoint, with its outward normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Outward normal: -1 at the left endpoint, +1 at the right.
    pub fn outward_normal(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// Boundary flux `b`, optionally with an explicit factor `beta` such that
/// `b = beta(phi)`.
#[derive(Clone, Debug)]
pub struct BoundarySpec {
    pub b: ScalarFn,
    pub beta: Option<ScalarFn>,
}

impl BoundarySpec {
    pub fn new(b: ScalarFn) -> Self {
        Self { b, beta: None }
    }

    pub fn with_beta(b: ScalarFn, beta: ScalarFn) -> Self {
        Self { b, beta: Some(beta) }
    }

    /// Structural check against the diffusion: `b` finite, non-decreasing,
    /// and consistent with an explicit `beta` when one is given.
    pub fn validate(&self, diffusion: &DiffusionSpec) -> Result<(), CoreError> {
        let u_max = diffusion.u_max;
        self.b.validate_on(0.0, u_max)?;
        let n = 4097;
        let mut prev = self.b.eval(0.0);
        for j in 1..n {
            let s = u_max * j as f64 / (n - 1) as f64;
            let v = self.b.eval(s);
            if v < prev - 1e-12 {
                return Err(CoreError::InvalidSpec(format!(
                    "b must be non-decreasing: b({s}) = {v} < {prev}"
                )));
            }
            prev = v;
        }
        if let Some(beta) = &self.beta {
            for j in 0..n {
                let s = u_max * j as f64 / (n - 1) as f64;
                let composed = beta.eval(diffusion.phi.eval(s));
                let direct = self.b.eval(s);
                if (composed - direct).abs() > 1e-12 {
                    return Err(CoreError::InvalidSpec(format!(
                        "beta(phi({s})) = {composed} but b({s}) = {direct}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Initial datum as a rule on the spatial domain.
#[derive(Clone)]
pub enum InitialData {
    /// Piecewise constant: `values[k]` on `(breakpoints[k-1], breakpoints[k])`.
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64> },
    /// Arbitrary profile `x -> u0(x)`.
    Profile { name: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Piecewise { breakpoints, values } => {
                write!(f, "Piecewise({breakpoints:?}, {values:?})")
            }
            InitialData::Profile { name, .. } => write!(f, "Profile({name})"),
        }
    }
}

/// 16-point Gauss-Legendre rule on [-1, 1]: positive abscissae and weights.
const GL16: [(f64, f64); 8] = [
    (0.0950125098376374, 0.1894506104550685),
    (0.2816035507792589, 0.1826034150449236),
    (0.4580167776572274, 0.1691565193950025),
    (0.6178762444026438, 0.1495959888165767),
    (0.7554044083550030, 0.1246289712555339),
    (0.8656312023878318, 0.0951585116824928),
    (0.9445750230732326, 0.0622535239386479),
    (0.9894009349916499, 0.0271524594117541),
];

impl InitialData {
    pub fn constant(c: f64) -> Self {
        InitialData::Piecewise { breakpoints: vec![], values: vec![c] }
    }

    /// `left` for `x < x0`, `right` for `x >= x0`.
    pub fn step(x0: f64, left: f64, right: f64) -> Self {
        InitialData::Piecewise { breakpoints: vec![x0], values: vec![left, right] }
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, CoreError> {
        if values.len() != breakpoints.len() + 1 {
            return Err(CoreError::InvalidInput(format!(
                "piecewise data needs {} values for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::InvalidInput(
                "piecewise breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(InitialData::Piecewise { breakpoints, values })
    }

    pub fn profile(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        InitialData::Profile { name: name.into(), f: Arc::new(f) }
    }

    /// Average over `[x0, x1]`: exact for piecewise-constant data, composite
    /// 16-point Gauss-Legendre otherwise.
    pub fn cell_average(&self, x0: f64, x1: f64) -> f64 {
        debug_assert!(x1 > x0);
        match self {
            InitialData::Piecewise { breakpoints, values } => {
                let mut acc = 0.0;
                let mut lo = x0;
                for (k, &bp) in breakpoints.iter().enumerate() {
                    if bp <= lo {
                        continue;
                    }
                    if bp >= x1 {
                        acc += values[k] * (x1 - lo);
                        lo = x1;
                        break;
                    }
                    acc += values[k] * (bp - lo);
                    lo = bp;
                }
                if lo < x1 {
                    acc += values[breakpoints.len()] * (x1 - lo);
                }
                acc / (x1 - x0)
            }
            InitialData::Profile { f, .. } => {
                let c = 0.5 * (x0 + x1);
                let h = 0.5 * (x1 - x0);
                let mut acc = 0.0;
                for (x, w) in GL16 {
                    acc += w * (f(c + h * x) + f(c - h * x));
                }
                0.5 * acc
            }
        }
    }
}

/// Full problem instance.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub f: ScalarFn,
    pub diffusion: DiffusionSpec,
    pub boundary: BoundarySpec,
    pub u0: InitialData,
    /// Spatial domain `(a, b)`.
    pub domain: (f64, f64),
    /// Final time `T`.
    pub horizon: f64,
}

impl ProblemSpec {
    pub fn new(
        f: ScalarFn,
        diffusion: DiffusionSpec,
        boundary: BoundarySpec,
        u0: InitialData,
        domain: (f64, f64),
        horizon: f64,
    ) -> Result<Self, CoreError> {
        if !(domain.1 > domain.0) || !domain.0.is_finite() || !domain.1.is_finite() {
            return Err(CoreError::InvalidSpec(format!(
                "domain ({}, {}) must be a proper interval",
                domain.0, domain.1
            )));
        }
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(CoreError::InvalidSpec(format!("horizon {horizon} must be >= 0")));
        }
        f.validate_on(0.0, diffusion.u_max)?;
        boundary.validate(&diffusion)?;

        let u_max = diffusion.u_max;
        match &u0 {
            InitialData::Piecewise { values, .. } => {
                for v in values {
                    if !(-1e-12..=u_max + 1e-12).contains(v) {
                        return Err(CoreError::InvalidSpec(format!(
                            "initial value {v} outside [0, {u_max}]"
                        )));
                    }
                }
            }
            InitialData::Profile { f, name } => {
                let n = 4097;
                for j in 0..n {
                    let x = domain.0 + (domain.1 - domain.0) * j as f64 / (n - 1) as f64;
                    let v = f(x);
                    if !v.is_finite() || !(-1e-12..=u_max + 1e-12).contains(&v) {
                        return Err(CoreError::InvalidSpec(format!(
                            "initial profile {name}({x}) = {v} outside [0, {u_max}]"
                        )));
                    }
                }
            }
        }
        Ok(Self { f, diffusion, boundary, u0, domain, horizon })
    }

    pub fn u_max(&self) -> f64 {
        self.diffusion.u_max
    }

    pub fn u_c(&self) -> f64 {
        self.diffusion.u_c
    }

    /// Re-run the structural validation (useful after field edits).
    pub fn validate(&self) -> Result<(), CoreError> {
        Self::new(
            self.f.clone(),
            self.diffusion.clone(),
            self.boundary.clone(),
            self.u0.clone(),
            self.domain,
            self.horizon,
        )
        .map(|_| ())
    }
}

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

/// Compatibility at zero.
#[derive(Clone, Debug)]
pub struct H1Report {
    pub pass: bool,
    pub f_at_zero: f64,
    pub b_at_zero: f64,
}

pub fn check_h1(spec: &ProblemSpec) -> H1Report {
    let f0 = spec.f.eval(0.0);
    let b0 = spec.boundary.b.eval(0.0);
    H1Report { pass: f0.abs() <= 1e-12 && b0.abs() <= 1e-12, f_at_zero: f0, b_at_zero: b0 }
}

/// Monotone piecewise-linear table for `beta` with `b = beta(phi)`.
#[derive(Clone, Debug)]
pub struct BetaTable {
    /// `(phi value, b value)` nodes, strictly increasing in the first slot.
    nodes: Vec<(f64, f64)>,
}

impl BetaTable {
    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// Piecewise-linear evaluation; linear extrapolation beyond the table.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if n == 1 {
            return self.nodes[0].1;
        }
        let seg = match self.nodes.partition_point(|&(p, _)| p <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (x0, y0) = self.nodes[seg];
        let (x1, y1) = self.nodes[seg + 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Largest segment slope.
    pub fn lipschitz(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max)
    }
}

/// Factorization `b = beta(phi)`.
#[derive(Clone, Debug)]
pub struct H2Report {
    pub pass: bool,
    /// Largest measured slope of `beta`.
    pub lipschitz_beta: f64,
    /// Reconstructed table, available when the factorization holds.
    pub beta: Option<BetaTable>,
    /// First sampled state in `[0, u_c]` where `b` deviates from `b(0)`,
    /// with the deviation.
    pub flat_zone_violation: Option<(f64, f64)>,
}

/// Sampled check of `b = beta(phi)` with `beta` non-decreasing Lipschitz.
///
/// On `[0, u_c]` the diffusion is flat, so `b` must be constant there;
/// elsewhere the slopes `db/dphi` must stay bounded. States that `phi`
/// cannot separate but `b` does make the factorization impossible and are
/// reported as an error rather than a plain failure.
pub fn check_h2(spec: &ProblemSpec, n_samples: usize) -> Result<H2Report, CoreError> {
    if n_samples < 100 {
        return Err(CoreError::InvalidInput(format!(
            "check_h2 needs at least 100 samples, got {n_samples}"
        )));
    }
    let u_max = spec.u_max();
    let u_c = spec.u_c();
    let b = &spec.boundary.b;
    let phi = &spec.diffusion.phi;

    let b0 = b.eval(0.0);
    let mut flat_zone_violation = None;
    let mut nodes: Vec<(f64, f64)> = vec![(0.0, b0)];
    let mut last_state = 0.0f64;

    for j in 1..n_samples {
        let s = u_max * j as f64 / (n_samples - 1) as f64;
        let bs = b.eval(s);
        if s <= u_c {
            if (bs - b0).abs() > 1e-12 && flat_zone_violation.is_none() {
                flat_zone_violation = Some((s, bs - b0));
            }
            continue;
        }
        let ps = phi.eval(s);
        let (pp, bp) = *nodes.last().unwrap();
        if ps - pp <= PHI_EQUAL_EPS {
            if (bs - bp).abs() > 1e-12 {
                return Err(CoreError::InconsistentB { s, t: last_state, b_s: bs, b_t: bp });
            }
        } else {
            nodes.push((ps, bs));
            last_state = s;
        }
    }

    let table = BetaTable { nodes };
    let lipschitz_beta = table.lipschitz();
    let pass = flat_zone_violation.is_none() && lipschitz_beta <= BETA_RATIO_BOUND;
    Ok(H2Report {
        pass,
        lipschitz_beta,
        beta: if pass { Some(table) } else { None },
        flat_zone_violation,
    })
}

/// Boundary-flux dominance at `u_max`.
#[derive(Clone, Debug)]
pub struct H3Report {
    pub pass: bool,
    /// `b(u_max) - |f(u_max)|`; negative when the hypothesis fails.
    pub margin: f64,
    pub b_at_umax: f64,
    pub f_at_umax: f64,
}

pub fn check_h3(spec: &ProblemSpec) -> H3Report {
    let b_at_umax = spec.boundary.b.eval(spec.u_max());
    let f_at_umax = spec.f.eval(spec.u_max());
    let margin = b_at_umax - f_at_umax.abs();
    H3Report { pass: margin >= -1e-12, margin, b_at_umax, f_at_umax }
}

/// Non-degeneracy of `f` on the diffusion-free zone `[0, u_c]`.
#[derive(Clone, Debug)]
pub struct NondegReport {
    pub nondegenerate: bool,
    /// Length of the longest sampled stretch where `f` looks affine.
    pub longest_affine_window: f64,
    pub window: f64,
    pub tol: f64,
}

/// Scans `[0, u_c]` for stretches where second differences of `f` stay
/// below `tol`; `f` is degenerate when such a stretch is at least `window`
/// long. An empty zone (`u_c = 0`) is trivially non-degenerate.
pub fn check_nondegeneracy(
    spec: &ProblemSpec,
    window: f64,
    tol: f64,
) -> Result<NondegReport, CoreError> {
    let u_c = spec.u_c();
    if u_c == 0.0 {
        return Ok(NondegReport {
            nondegenerate: true,
            longest_affine_window: 0.0,
            window,
            tol,
        });
    }
    if !(window > 0.0) || !(tol > 0.0) {
        return Err(CoreError::InvalidInput(format!(
            "check_nondegeneracy needs window > 0 and tol > 0, got {window}, {tol}"
        )));
    }
    // Keep at least eight samples per window.
    let n = DEFAULT_HYPOTHESIS_SAMPLES.max((8.0 * u_c / window).ceil() as usize).max(16);
    let h = u_c / (n - 1) as f64;
    let vals: Vec<f64> = (0..n).map(|j| spec.f.eval(h * j as f64)).collect();

    let mut longest = 0usize;
    let mut run = 0usize;
    for j in 1..n - 1 {
        let d = vals[j - 1] - 2.0 * vals[j] + vals[j + 1];
        if d.abs() <= tol {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    // A run of m flagged interior points spans m + 1 grid intervals.
    let longest_affine_window = if longest == 0 { 0.0 } else { (longest + 1) as f64 * h };
    Ok(NondegReport {
        nondegenerate: longest_affine_window < window,
        longest_affine_window,
        window,
        tol,
    })
}

/// Bundle of all hypothesis checks with their numeric evidence.
#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub h1: H1Report,
    pub h2: H2Report,
    pub h3: H3Report,
    pub nondegeneracy: NondegReport,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.h1.pass && self.h2.pass && self.h3.pass && self.nondegeneracy.nondegenerate
    }
}

/// Runs all four checks with default resolutions (window `u_c / 20`,
/// second-difference tolerance 1e-10).
pub fn hypothesis_report(spec: &ProblemSpec) -> Result<HypothesisReport, CoreError> {
    let u_c = spec.u_c();
    let window = if u_c > 0.0 { u_c / 20.0 } else { 1.0 };
    Ok(HypothesisReport {
        h1: check_h1(spec),
        h2: check_h2(spec, DEFAULT_HYPOTHESIS_SAMPLES)?,
        h3: check_h3(spec),
        nondegeneracy: check_nondegeneracy(spec, window, 1e-10)?,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_domain() -> (f64, f64) {
        (0.0, 1.0)
    }

    fn paper_u0() -> InitialData {
        InitialData::step(0.5, 0.0, 0.7)
    }

    fn spec_with(f: ScalarFn, b: BoundarySpec) -> ProblemSpec {
        ProblemSpec::new(
            f,
            DiffusionSpec::threshold(0.6, 1.0).unwrap(),
            b,
            paper_u0(),
            paper_domain(),
            0.12,
        )
        .unwrap()
    }

    fn compliant_spec() -> ProblemSpec {
        spec_with(
            ScalarFn::lwr(),
            BoundarySpec::with_beta(ScalarFn::threshold(0.6), ScalarFn::identity()),
        )
    }

    #[test]
    fn builtin_evaluations() {
        assert!((ScalarFn::burgers().eval(0.7) - 0.245).abs() < 1e-15);
        assert!((ScalarFn::lwr().eval(0.3) - 0.21).abs() < 1e-15);
        assert_eq!(ScalarFn::lwr().eval(1.5), 0.0);
        assert_eq!(ScalarFn::threshold(0.6).eval(0.5), 0.0);
        assert!((ScalarFn::threshold(0.6).eval(0.9) - 0.3).abs() < 1e-15);
        assert_eq!(ScalarFn::zero().eval(0.4), 0.0);
        assert_eq!(ScalarFn::identity().eval(0.4), 0.4);
    }

    #[test]
    fn lipschitz_estimate_builtins_within_one_percent() {
        let cases = [
            (ScalarFn::burgers(), 1.0),
            (ScalarFn::lwr(), 1.0),
            (ScalarFn::threshold(0.6), 1.0),
            (ScalarFn::identity(), 1.0),
            (ScalarFn::scaled_threshold(2.0, 0.6), 2.0),
        ];
        for (g, exact) in cases {
            let est = lipschitz_estimate(&g, 0.0, 1.0);
            assert!(est <= exact + 1e-9, "{}: {est} > {exact}", g.name());
            assert!(est >= exact * 0.99, "{}: {est} underestimates {exact}", g.name());
        }
    }

    #[test]
    fn lipschitz_estimate_constant_is_zero() {
        assert_eq!(lipschitz_estimate(&ScalarFn::zero(), 0.0, 1.0), 0.0);
        let c = ScalarFn::custom("const", 0.0, |_| 3.25);
        assert_eq!(lipschitz_estimate(&c, 0.0, 1.0), 0.0);
    }

    #[test]
    fn lipschitz_estimate_monotone_under_inclusion() {
        let chain = [(0.0, 1.0), (0.25, 1.0), (0.25, 0.75), (0.3, 0.7), (0.5, 0.5625)];
        for g in [ScalarFn::burgers(), ScalarFn::lwr(), ScalarFn::threshold(0.6)] {
            let mut prev = f64::INFINITY;
            for (lo, hi) in chain {
                let est = lipschitz_estimate(&g, lo, hi);
                assert!(est <= prev + 1e-12, "{}: [{lo},{hi}] gives {est} > {prev}", g.name());
                prev = est;
            }
        }
    }

    #[test]
    fn understated_lipschitz_is_rejected() {
        let bad = ScalarFn::custom("steep", 0.5, |u| u);
        assert!(matches!(bad.validate_on(0.0, 1.0), Err(CoreError::InvalidSpec(_))));
    }

    #[test]
    fn initial_step_average_matches_hand_value() {
        // Step 0.7 * 1_{[0.5, 1]}, middle cell of a 3-cell grid on [0, 1]:
        // overlap [0.5, 2/3] of width 1/6 gives average 0.7 / 2 = 0.35.
        let u0 = InitialData::step(0.5, 0.0, 0.7);
        let avg = u0.cell_average(1.0 / 3.0, 2.0 / 3.0);
        assert!((avg - 0.35).abs() < 1e-14, "got {avg}");
    }

    #[test]
    fn profile_average_matches_analytic_integral() {
        // x^2 averaged over [x0, x1] is (x1^3 - x0^3) / (3 (x1 - x0)).
        let u0 = InitialData::profile("sq", |x: f64| x * x);
        let (x0, x1): (f64, f64) = (0.2, 0.9);
        let exact = (x1.powi(3) - x0.powi(3)) / (3.0 * (x1 - x0));
        assert!((u0.cell_average(x0, x1) - exact).abs() < 1e-14);
    }

    #[test]
    fn piecewise_constructor_validates_shape() {
        assert!(InitialData::piecewise(vec![0.5, 0.4], vec![0.0, 1.0, 0.5]).is_err());
        assert!(InitialData::piecewise(vec![0.5], vec![0.0]).is_err());
        assert!(InitialData::piecewise(vec![0.3, 0.6], vec![0.1, 0.2, 0.3]).is_ok());
    }

    #[test]
    fn diffusion_rejects_non_monotone_phi() {
        let hump = ScalarFn::custom("hump", 1.0, |u| u * (1.0 - u));
        assert!(DiffusionSpec::new(0.0, 1.0, hump).is_err());
    }

    #[test]
    fn diffusion_rejects_nonzero_flat_zone() {
        let shifted = ScalarFn::custom("shifted", 1.0, |u| u);
        assert!(DiffusionSpec::new(0.5, 1.0, shifted).is_err());
    }

    #[test]
    fn boundary_rejects_decreasing_b() {
        let dec = ScalarFn::custom("dec", 1.0, |u| -u);
        let diff = DiffusionSpec::threshold(0.6, 1.0).unwrap();
        assert!(BoundarySpec::new(dec).validate(&diff).is_err());
    }

    #[test]
    fn boundary_rejects_beta_that_disagrees() {
        let diff = DiffusionSpec::threshold(0.6, 1.0).unwrap();
        let spec = BoundarySpec::with_beta(ScalarFn::threshold(0.6), ScalarFn::linear(2.0));
        assert!(spec.validate(&diff).is_err());
    }

    #[test]
    fn outward_normals() {
        assert_eq!(Side::Left.outward_normal(), -1.0);
        assert_eq!(Side::Right.outward_normal(), 1.0);
    }

    #[test]
    fn h1_passes_for_compliant_data() {
        let rep = check_h1(&compliant_spec());
        assert!(rep.pass);
        assert_eq!(rep.f_at_zero, 0.0);
        assert_eq!(rep.b_at_zero, 0.0);
    }

    #[test]
    fn h1_fails_with_offset_flux() {
        let spec = spec_with(
            ScalarFn::affine(1.0, 0.1),
            BoundarySpec::new(ScalarFn::threshold(0.6)),
        );
        let rep = check_h1(&spec);
        assert!(!rep.pass);
        assert!((rep.f_at_zero - 0.1).abs() < 1e-15);
    }

    #[test]
    fn h2_identity_beta_has_unit_slope() {
        let rep = check_h2(&compliant_spec(), DEFAULT_HYPOTHESIS_SAMPLES).unwrap();
        assert!(rep.pass);
        assert!((rep.lipschitz_beta - 1.0).abs() < 1e-9, "L = {}", rep.lipschitz_beta);
    }

    #[test]
    fn h2_scaled_boundary_has_doubled_slope() {
        let spec = spec_with(
            ScalarFn::lwr(),
            BoundarySpec::new(ScalarFn::scaled_threshold(2.0, 0.6)),
        );
        let rep = check_h2(&spec, DEFAULT_HYPOTHESIS_SAMPLES).unwrap();
        assert!(rep.pass);
        assert!((rep.lipschitz_beta - 2.0).abs() < 1e-9, "L = {}", rep.lipschitz_beta);
    }

    #[test]
    fn h2_fails_when_b_moves_on_flat_zone() {
        let spec = spec_with(ScalarFn::lwr(), BoundarySpec::new(ScalarFn::identity()));
        let rep = check_h2(&spec, DEFAULT_HYPOTHESIS_SAMPLES).unwrap();
        assert!(!rep.pass);
        let (s, dev) = rep.flat_zone_violation.expect("expected flat-zone evidence");
        assert!(s <= 0.6 && dev > 0.0);
        assert!(rep.beta.is_none());
    }

    #[test]
    fn h2_reports_unfactorable_b_as_error() {
        // phi rises like (u - 0.6)^5: too flat near u_c to separate states
        // that b = u distinguishes.
        let phi = ScalarFn::custom("quintic", 0.13, |u: f64| (u - 0.6).max(0.0).powi(5));
        let diff = DiffusionSpec::new(0.6, 1.0, phi).unwrap();
        let b = ScalarFn::custom("drain", 1.0, |u: f64| 0.5 * (u - 0.6).max(0.0));
        let spec = ProblemSpec::new(
            ScalarFn::lwr(),
            diff,
            BoundarySpec::new(b),
            paper_u0(),
            paper_domain(),
            0.12,
        )
        .unwrap();
        match check_h2(&spec, DEFAULT_HYPOTHESIS_SAMPLES) {
            Err(CoreError::InconsistentB { .. }) => {}
            other => panic!("expected InconsistentB, got {other:?}"),
        }
    }

    #[test]
    fn h2_beta_table_reproduces_b_on_fresh_samples() {
        let spec = spec_with(
            ScalarFn::lwr(),
            BoundarySpec::new(ScalarFn::scaled_threshold(2.0, 0.6)),
        );
        let rep = check_h2(&spec, DEFAULT_HYPOTHESIS_SAMPLES).unwrap();
        let table = rep.beta.expect("table");
        for j in 0..997 {
            let s = j as f64 / 996.0;
            let recomposed = table.eval(spec.diffusion.phi.eval(s));
            let direct = spec.boundary.b.eval(s);
            assert!(
                (recomposed - direct).abs() <= 1e-10,
                "s = {s}: {recomposed} vs {direct}"
            );
        }
    }

    #[test]
    fn h3_margins_for_paper_data() {
        // b = phi gives b(1) = 0.4; traffic flux vanishes at 1.
        let good = compliant_spec();
        let rep = check_h3(&good);
        assert!(rep.pass);
        assert!((rep.margin - 0.4).abs() < 1e-14);

        // Burgers flux: f(1) = 0.5 > b(1) = 0.4.
        let bad = spec_with(ScalarFn::burgers(), BoundarySpec::new(ScalarFn::threshold(0.6)));
        let rep = check_h3(&bad);
        assert!(!rep.pass);
        assert!((rep.margin + 0.1).abs() < 1e-14);
    }

    #[test]
    fn nondegeneracy_flags_affine_flux() {
        let affine = spec_with(
            ScalarFn::custom("half", 0.5, |u| 0.5 * u),
            BoundarySpec::new(ScalarFn::threshold(0.6)),
        );
        let rep = check_nondegeneracy(&affine, 0.03, 1e-10).unwrap();
        assert!(!rep.nondegenerate);
        assert!(rep.longest_affine_window >= 0.9 * 0.6, "window {}", rep.longest_affine_window);
    }

    #[test]
    fn nondegeneracy_accepts_curved_flux() {
        let rep = check_nondegeneracy(&compliant_spec(), 0.03, 1e-10).unwrap();
        assert!(rep.nondegenerate);
        assert_eq!(rep.longest_affine_window, 0.0);
    }

    #[test]
    fn nondegeneracy_localizes_partial_affine_stretch() {
        // Affine on [0, 0.3], quadratic beyond; C^1 at the junction.
        let f = ScalarFn::custom("mixed", 1.9, |u: f64| {
            if u <= 0.3 {
                0.5 * u
            } else {
                0.5 * u + (u - 0.3) * (u - 0.3)
            }
        });
        let spec = spec_with(f, BoundarySpec::new(ScalarFn::threshold(0.6)));
        let rep = check_nondegeneracy(&spec, 0.03, 1e-10).unwrap();
        assert!(!rep.nondegenerate);
        assert!(
            (rep.longest_affine_window - 0.3).abs() < 0.01,
            "window {}",
            rep.longest_affine_window
        );
    }

    #[test]
    fn nondegeneracy_trivial_without_flat_zone() {
        let spec = ProblemSpec::new(
            ScalarFn::burgers(),
            DiffusionSpec::new(0.0, 1.0, ScalarFn::identity()).unwrap(),
            BoundarySpec::new(ScalarFn::identity()),
            paper_u0(),
            paper_domain(),
            0.1,
        )
        .unwrap();
        let rep = check_nondegeneracy(&spec, 0.05, 1e-10).unwrap();
        assert!(rep.nondegenerate);
    }

    #[test]
    fn nondegeneracy_rejects_bad_window() {
        assert!(check_nondegeneracy(&compliant_spec(), 0.0, 1e-10).is_err());
        assert!(check_nondegeneracy(&compliant_spec(), 0.03, -1.0).is_err());
    }

    #[test]
    fn h2_rejects_sparse_sampling() {
        assert!(matches!(
            check_h2(&compliant_spec(), 50),
            Err(CoreError::InvalidInput(_))
        ));
    }

    #[test]
    fn full_report_for_compliant_data() {
        let rep = hypothesis_report(&compliant_spec()).unwrap();
        assert!(rep.all_pass());
    }
}
